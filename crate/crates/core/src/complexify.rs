//! Extensions of cocycles into a complex strip: analytic (expression trees)
//! and asymptotically holomorphic (moment kernels on sampled data), plus
//! certification of the contracting half-strip.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{disk_coords, mobius_image_disk, Mat2C, C64};
use crate::cocycle::{real_point, Family};
use crate::grid::TorusGrid;
use crate::{Error, Result};

/// Fewest samples allowed under the rescaled kernel.
pub const MIN_KERNEL_SAMPLES: usize = 32;
/// Containment margin required of every image disk.
pub const STRIP_MARGIN: f64 = 1e-10;
/// Number of dyadic levels probed below tmax.
pub const STRIP_LEVELS: usize = 16;

const KERNEL_NODES: usize = 4096;

fn bump(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

/// K(x) = p(x/h)·bump(x/h) with ∫ xᵏ K = iᵏ for k ≤ ⌊η+1⌋.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AHKernel {
    pub eta: f64,
    pub halfwidth: f64,
    /// Coefficients of p in powers of u = x/h.
    pub coeffs: Vec<C64>,
    /// K on the uniform grid of [−h, h] with `KERNEL_NODES` intervals.
    pub samples: Vec<C64>,
    pub moment_residuals: Vec<f64>,
}

impl AHKernel {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> C64 {
        let u = x / self.halfwidth;
        let b = bump(u);
        if b == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let mut p = C64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            p = p * u + c;
        }
        p * b
    }
}

/// Trapezoid nodes and weights on [−1, 1]; the bump kills the endpoints.
fn unit_quadrature() -> (Vec<f64>, f64) {
    let h = 2.0 / KERNEL_NODES as f64;
    ((0..=KERNEL_NODES).map(|j| -1.0 + j as f64 * h).collect(), h)
}

fn i_pow(k: usize) -> C64 {
    [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)][k % 4]
}

pub fn ah_kernel(eta: f64, halfwidth: f64) -> Result<AHKernel> {
    if eta < 1.0 || !eta.is_finite() {
        return Err(Error::InvalidArgument(format!("eta must be >= 1, got {eta}")));
    }
    if halfwidth <= 0.0 || !halfwidth.is_finite() {
        return Err(Error::InvalidArgument(format!("halfwidth must be positive, got {halfwidth}")));
    }
    let m = (eta + 1.0).floor() as usize;
    let (us, du) = unit_quadrature();
    let bs: Vec<f64> = us.iter().map(|u| bump(*u)).collect();
    // ν_n = ∫ uⁿ bump(u) du
    let nu: Vec<f64> = (0..=2 * m).map(|n| us.iter().zip(&bs).map(|(u, b)| u.powi(n as i32) * b).sum::<f64>() * du).collect();
    // in u = x/h: Σ_j c_j ν_{k+j} = iᵏ / h^{k+1}
    let mat = DMatrix::from_fn(m + 1, m + 1, |k, j| nu[k + j]);
    let sv = mat.singular_values();
    let cond = sv.max() / sv.min();
    if !(cond <= 1e12) {
        return Err(Error::IllConditioned(cond));
    }
    let lu = mat.clone().lu();
    let rhs = |part: fn(C64) -> f64| DVector::from_fn(m + 1, |k, _| part(i_pow(k)) / halfwidth.powi(k as i32 + 1));
    let re = lu.solve(&rhs(|z| z.re)).ok_or(Error::IllConditioned(f64::INFINITY))?;
    let im = lu.solve(&rhs(|z| z.im)).ok_or(Error::IllConditioned(f64::INFINITY))?;
    let coeffs: Vec<C64> = (0..=m).map(|j| C64::new(re[j], im[j])).collect();
    let mut k = AHKernel { eta, halfwidth, coeffs, samples: Vec::new(), moment_residuals: Vec::new() };
    k.samples = us.iter().map(|u| k.eval(u * halfwidth)).collect();
    let dx = du * halfwidth;
    k.moment_residuals = (0..=m)
        .map(|n| {
            let mom: C64 = us.iter().zip(&k.samples).map(|(u, s)| s * (u * halfwidth).powi(n as i32)).sum::<C64>() * dx;
            (mom - i_pow(n)).norm()
        })
        .collect();
    Ok(k)
}

/// Values of a 1-periodic function on the uniform grid j/n.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sampled {
    pub values: Vec<C64>,
}

impl Sampled {
    pub fn from_fn(n: usize, f: impl Fn(f64) -> C64) -> Self {
        Self { values: (0..n).map(|j| f(j as f64 / n as f64)).collect() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Trigonometric interpolation at a real point.
    pub fn interpolate(&self, x: f64) -> C64 {
        let n = self.len();
        let pos = x.rem_euclid(1.0) * n as f64;
        let j = pos.round();
        if (pos - j).abs() < 1e-9 {
            return self.values[j as usize % n];
        }
        let coeffs = crate::grid::fourier_coefficients(&self.values, &TorusGrid::new(vec![n]));
        coeffs
            .iter()
            .map(|(k, c)| {
                let w = if n % 2 == 0 && 2 * k[0].unsigned_abs() as usize == n {
                    C64::from((2.0 * PI * k[0] as f64 * x).cos())
                } else {
                    C64::from_polar(1.0, 2.0 * PI * k[0] as f64 * x)
                };
                c * w
            })
            .sum()
    }
}

/// Φ_η(f)(σ+it) = ∫ K(x) f(σ+tx) dx by the periodic trapezoid rule on the
/// sample grid. For t < 0 the kernel is conjugated, so real f gives
/// Φ(f)(σ−it) = conj Φ(f)(σ+it).
pub fn ah_extend_scalar(f: &Sampled, k: &AHKernel, z: C64) -> Result<C64> {
    let (sigma, t) = (z.re, z.im);
    if t == 0.0 {
        return Ok(f.interpolate(sigma));
    }
    let n = f.len();
    let at = t.abs();
    let reach = k.halfwidth * at;
    let samples = (2.0 * reach * n as f64).floor() as usize;
    if samples < MIN_KERNEL_SAMPLES {
        return Err(Error::Undersampled { samples, needed: MIN_KERNEL_SAMPLES });
    }
    let lo = ((sigma - reach) * n as f64).ceil() as i64;
    let hi = ((sigma + reach) * n as f64).floor() as i64;
    let mut acc = C64::new(0.0, 0.0);
    for j in lo..=hi {
        let y = j as f64 / n as f64;
        let kv = k.eval((y - sigma) / at);
        let kv = if t < 0.0 { kv.conj() } else { kv };
        acc += kv * f.values[j.rem_euclid(n as i64) as usize];
    }
    Ok(acc / (at * n as f64))
}

/// ∂̄ = (∂_σ + i∂_t)/2 of the extension by central differences with step `h`.
pub fn dbar_residual(f: &Sampled, k: &AHKernel, z: C64, h: f64) -> Result<C64> {
    let e = |dz: C64| ah_extend_scalar(f, k, z + dz);
    let ds = (e(C64::new(h, 0.0))? - e(C64::new(-h, 0.0))?) / (2.0 * h);
    let dt = (e(C64::new(0.0, h))? - e(C64::new(0.0, -h))?) / (2.0 * h);
    Ok(0.5 * (ds + C64::i() * dt))
}

/// Asymptotically holomorphic extension of a sampled one-frequency cocycle,
/// complexified along the phase: A_z(x) = Φ(A)(x + z).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AhCocycle {
    pub alpha: f64,
    /// Entries a, b, c, d on a common grid.
    pub entries: [Sampled; 4],
    pub kernel: AHKernel,
}

/// Substeps used to follow the square-root branch from t = 0.
const BRANCH_STEPS: usize = 8;

impl AhCocycle {
    fn raw(&self, z: C64) -> Result<Mat2C> {
        let e = |i: usize| ah_extend_scalar(&self.entries[i], &self.kernel, z);
        Ok(Mat2C::new(e(0)?, e(1)?, e(2)?, e(3)?))
    }

    /// (ΦaΦd − ΦbΦc)^{−1/2}·Φ(A), with the root continued from 1 at t = 0.
    pub fn eval(&self, x: f64, z: C64) -> Result<Mat2C> {
        let w = C64::new(x + z.re, z.im);
        let m = self.raw(w)?;
        if z.im == 0.0 {
            return Ok(m);
        }
        let mut root = C64::new(1.0, 0.0);
        for s in 1..=BRANCH_STEPS {
            let det = if s == BRANCH_STEPS {
                m.det()
            } else {
                // near the axis det → 1, so unresolved substeps keep the branch
                match self.raw(C64::new(w.re, w.im * s as f64 / BRANCH_STEPS as f64)) {
                    Ok(r) => r.det(),
                    Err(Error::Undersampled { .. }) => continue,
                    Err(e) => return Err(e),
                }
            };
            if det.norm() < 1e-6 {
                return Err(Error::DetVanishes(det.norm()));
            }
            let r = det.sqrt();
            root = if (r - root).norm() <= (r + root).norm() { r } else { -r };
        }
        Ok(m.scale(root.inv()))
    }
}

pub fn ah_extend_cocycle(alpha: f64, entries: [Sampled; 4], kernel: AHKernel) -> Result<AhCocycle> {
    let n = entries[0].len();
    if entries.iter().any(|e| e.len() != n) || n == 0 {
        return Err(Error::InvalidArgument("entries must share a nonempty grid".into()));
    }
    Ok(AhCocycle { alpha, entries, kernel })
}

/// Which half-plane of the complexified parameter contracts the disk.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Upper,
    Lower,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Upper => 1.0,
            Side::Lower => -1.0,
        }
    }
}

/// Something that can be evaluated at (x, σ+it).
pub trait StripEval: Sync {
    fn dim(&self) -> usize;
    fn alpha(&self) -> Vec<f64>;
    fn eval_at(&self, x: &[f64], z: C64) -> Result<Mat2C>;
}

impl StripEval for Family {
    fn dim(&self) -> usize {
        Family::dim(self)
    }

    fn alpha(&self) -> Vec<f64> {
        self.alpha.clone()
    }

    fn eval_at(&self, x: &[f64], z: C64) -> Result<Mat2C> {
        self.eval(&real_point(x), z)
    }
}

impl StripEval for AhCocycle {
    fn dim(&self) -> usize {
        1
    }

    fn alpha(&self) -> Vec<f64> {
        vec![self.alpha]
    }

    fn eval_at(&self, x: &[f64], z: C64) -> Result<Mat2C> {
        self.eval(x[0], z)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extension {
    Analytic(Family),
    Ah(AhCocycle),
}

impl StripEval for Extension {
    fn dim(&self) -> usize {
        match self {
            Extension::Analytic(f) => StripEval::dim(f),
            Extension::Ah(a) => a.dim(),
        }
    }

    fn alpha(&self) -> Vec<f64> {
        match self {
            Extension::Analytic(f) => f.alpha.clone(),
            Extension::Ah(a) => vec![a.alpha],
        }
    }

    fn eval_at(&self, x: &[f64], z: C64) -> Result<Mat2C> {
        match self {
            Extension::Analytic(f) => f.eval_at(x, z),
            Extension::Ah(a) => a.eval_at(x, z),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripReport {
    pub delta: f64,
    pub side: Side,
    /// (t, ε̂(t)) for every certified level, largest t first.
    pub eps_hat: Vec<(f64, f64)>,
}

enum Probe {
    /// Largest ln(radius + |center|) over the nodes.
    Pass(f64),
    Fail,
    /// The extension cannot be evaluated this close to the real axis.
    Unresolved,
}

fn probe<F: StripEval + ?Sized>(f: &F, sigmas: &[f64], xgrid: &TorusGrid, t: f64) -> Probe {
    let jobs: Vec<(usize, usize)> = (0..sigmas.len()).flat_map(|s| (0..xgrid.len()).map(move |i| (s, i))).collect();
    let vals: Vec<Probe> = jobs
        .par_iter()
        .map(|&(s, i)| {
            let m = match f.eval_at(&xgrid.point(i), C64::new(sigmas[s], t)) {
                Ok(m) => m,
                Err(Error::Undersampled { .. }) => return Probe::Unresolved,
                Err(_) => return Probe::Fail,
            };
            match mobius_image_disk(&disk_coords(&m)) {
                Ok(d) if d.margin() >= STRIP_MARGIN => Probe::Pass((d.radius + d.center.norm()).ln()),
                _ => Probe::Fail,
            }
        })
        .collect();
    let mut worst = f64::NEG_INFINITY;
    for v in vals {
        match v {
            Probe::Pass(w) => worst = worst.max(w),
            other => return other,
        }
    }
    Probe::Pass(worst)
}

/// Dyadic descent from tmax on both half-planes. δ is the largest level t
/// such that every node passes at t and at every smaller probed level;
/// levels too close to the axis for a sampled extension are skipped.
pub fn strip_width<F: StripEval + ?Sized>(f: &F, tmax: f64, sigmas: &[f64], xgrid: &TorusGrid) -> Result<StripReport> {
    if !(tmax > 0.0) || sigmas.is_empty() {
        return Err(Error::InvalidArgument("strip probe needs tmax > 0 and a nonempty σ-grid".into()));
    }
    if xgrid.dim() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: xgrid.dim() });
    }
    let levels: Vec<f64> = (0..=STRIP_LEVELS).map(|k| tmax / (1u64 << k) as f64).collect();
    let mut best: Option<StripReport> = None;
    for side in [Side::Upper, Side::Lower] {
        // walk up from the smallest level while containment holds
        let mut certified = Vec::new();
        for &t in levels.iter().rev() {
            match probe(f, sigmas, xgrid, side.sign() * t) {
                Probe::Pass(w) => certified.push((t, -w / (2.0 * t))),
                Probe::Unresolved if certified.is_empty() => continue,
                _ => break,
            }
        }
        if let Some(&(delta, _)) = certified.last() {
            if best.as_ref().map_or(true, |b| delta > b.delta) {
                certified.reverse();
                best = Some(StripReport { delta, side, eps_hat: certified });
            }
        }
    }
    best.ok_or(Error::NoContraction(levels[STRIP_LEVELS]))
}

/// An extension together with its certified contracting half-strip.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StripCocycle {
    pub base: Extension,
    pub delta: f64,
    pub side: Side,
    pub eps_hat: Vec<(f64, f64)>,
}

impl StripCocycle {
    pub fn certify(base: Extension, tmax: f64, sigmas: &[f64], xgrid: &TorusGrid) -> Result<Self> {
        let r = strip_width(&base, tmax, sigmas, xgrid)?;
        Ok(Self { base, delta: r.delta, side: r.side, eps_hat: r.eps_hat })
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn alpha(&self) -> Vec<f64> {
        self.base.alpha()
    }

    /// The fiber matrix at x for the complex parameter z.
    pub fn base_eval(&self, x: &[f64], z: C64) -> Result<Mat2C> {
        self.base.eval_at(x, z)
    }

    /// The fiber matrix at x for parameter σ + i·side·t, with t ≥ 0.
    pub fn eval(&self, x: &[f64], sigma: f64, t: f64) -> Result<Mat2C> {
        self.base.eval_at(x, C64::new(sigma, self.side.sign() * t))
    }

    /// ε̂ at the certified level closest to t.
    pub fn eps_hat_at(&self, t: f64) -> Option<f64> {
        self.eps_hat
            .iter()
            .min_by(|a, b| (a.0 - t).abs().total_cmp(&(b.0 - t).abs()))
            .map(|p| p.1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::{herman, phase_shift, rot_twist, rotation_model, schrodinger_energy_family, Cocycle, CocycleExpr};
    use crate::trigpoly::TrigPoly;
    use crate::GOLDEN;
    use proptest::prelude::*;

    #[test]
    fn kernel_moments() {
        for eta in [1.0, 1.5, 2.0, 3.0] {
            for h in [0.5, 1.0, 2.0] {
                let k = ah_kernel(eta, h).unwrap();
                assert_eq!(k.order(), (eta + 1.0f64).floor() as usize);
                assert!(k.moment_residuals.iter().all(|r| *r < 1e-8), "{eta} {h}: {:?}", k.moment_residuals);
            }
        }
        assert!(matches!(ah_kernel(0.5, 1.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(ah_kernel(40.0, 1.0), Err(Error::IllConditioned(_))));
    }

    /// Independent oracle: Simpson's rule on a finer grid.
    fn simpson_moment(k: &AHKernel, n: i32) -> C64 {
        let m = 20_000;
        let h = 2.0 * k.halfwidth / m as f64;
        (0..=m)
            .map(|j| {
                let x = -k.halfwidth + j as f64 * h;
                let w = if j == 0 || j == m { 1.0 } else if j % 2 == 1 { 4.0 } else { 2.0 };
                k.eval(x) * x.powi(n) * w
            })
            .sum::<C64>()
            * (h / 3.0)
    }

    #[test]
    fn moments_against_simpson() {
        let k = ah_kernel(2.0, 1.0).unwrap();
        let want = [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)];
        for (n, w) in want.iter().enumerate() {
            assert!((simpson_moment(&k, n as i32) - w).norm() < 1e-8);
        }
    }

    fn cos_samples(n: usize) -> Sampled {
        Sampled::from_fn(n, |x| C64::from((2.0 * PI * x).cos()))
    }

    #[test]
    fn constants_and_real_symmetry() {
        let k = ah_kernel(2.0, 1.0).unwrap();
        let c = Sampled::from_fn(4096, |_| C64::from(0.7));
        for z in [C64::new(0.3, 0.05), C64::new(0.9, -0.02)] {
            assert!((ah_extend_scalar(&c, &k, z).unwrap() - 0.7).norm() < 1e-8);
        }
        let f = cos_samples(4096);
        let up = ah_extend_scalar(&f, &k, C64::new(0.21, 0.03)).unwrap();
        let dn = ah_extend_scalar(&f, &k, C64::new(0.21, -0.03)).unwrap();
        assert!((up - dn.conj()).norm() < 1e-14);
        assert_eq!(ah_extend_scalar(&f, &k, C64::new(0.25, 0.0)).unwrap(), f.values[1024]);
        assert!(matches!(ah_extend_scalar(&f, &k, C64::new(0.1, 1e-4)), Err(Error::Undersampled { .. })));
    }

    #[test]
    fn matches_taylor_expansion() {
        let k = ah_kernel(2.0, 1.0).unwrap();
        let f = cos_samples(1 << 14);
        for t in [1e-2, 5e-3] {
            for sigma in [0.0, 0.13, 0.6] {
                let z = C64::new(sigma, t);
                let exact = (C64::new(2.0 * PI, 0.0) * z).cos();
                let got = ah_extend_scalar(&f, &k, z).unwrap();
                // error O(t^4) with constant (2π)^4·(moment of order 4)/4!
                assert!((got - exact).norm() < 40.0 * (2.0 * PI * t).powi(4), "{t} {sigma}");
                let first = (2.0 * PI * sigma).cos() - C64::i() * 2.0 * PI * t * (2.0 * PI * sigma).sin();
                assert!((got - first).norm() < 25.0 * t * t);
            }
        }
    }

    #[test]
    fn error_decreases_with_eta() {
        let f = cos_samples(1 << 14);
        let z = C64::new(0.1, 0.02);
        let exact = (C64::new(2.0 * PI, 0.0) * z).cos();
        let errs: Vec<f64> =
            [1.0, 2.0, 3.0].iter().map(|e| (ah_extend_scalar(&f, &ah_kernel(*e, 1.0).unwrap(), z).unwrap() - exact).norm()).collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    }

    #[test]
    fn dbar_matches_closed_form() {
        // ∂̄Φ(f)(σ+it) = ½∫K(x)(1 + ix) f′(σ+tx) dx, evaluated with the exact f′
        let k = ah_kernel(1.0, 1.0).unwrap();
        let f = cos_samples(1 << 14);
        let (sigma, t) = (0.17, 0.05);
        let m = 20_000;
        let dx = 2.0 / m as f64;
        let oracle: C64 = (0..=m)
            .map(|j| {
                let x = -1.0 + j as f64 * dx;
                let fp = -2.0 * PI * (2.0 * PI * (sigma + t * x)).sin();
                k.eval(x) * C64::new(1.0, x) * fp
            })
            .sum::<C64>()
            * (0.5 * dx);
        let fd = dbar_residual(&f, &k, C64::new(sigma, t), 1e-5).unwrap();
        assert!((fd - oracle).norm() < 1e-6 * (1.0 + oracle.norm()), "{fd} {oracle}");
    }

    fn rotation_entries(n: usize, phi: impl Fn(f64) -> f64) -> [Sampled; 4] {
        let r = |x: f64| crate::algebra::Mat2R::rotation(phi(x));
        [
            Sampled::from_fn(n, |x| C64::from(r(x).a)),
            Sampled::from_fn(n, |x| C64::from(r(x).b)),
            Sampled::from_fn(n, |x| C64::from(r(x).c)),
            Sampled::from_fn(n, |x| C64::from(r(x).d)),
        ]
    }

    #[test]
    fn sampled_rotation_matches_analytic_continuation() {
        let phi = |x: f64| x + 0.1 * (2.0 * PI * x).cos();
        let ah = ah_extend_cocycle(GOLDEN, rotation_entries(1 << 14, phi), ah_kernel(2.0, 1.0).unwrap()).unwrap();
        let mut p = TrigPoly::linear(&[1.0]);
        p = p.add(&TrigPoly::cos_mode(&[1], 0.1));
        let tree = CocycleExpr::Rot(p);
        for s in 0..8 {
            let sigma = s as f64 / 8.0 + 0.01;
            let z = C64::new(sigma, 0.02);
            let got = ah.eval(0.0, z).unwrap();
            let want = tree.eval(&[z]);
            assert!(got.max_abs_diff(&want) < 1e-4, "{sigma}: {}", got.max_abs_diff(&want));
            assert!((got.det() - 1.0).norm() < 1e-12);
            let mirror = ah.eval(0.0, z.conj()).unwrap();
            assert!(mirror.max_abs_diff(&got.conj()) < 1e-12);
        }
        let at0 = ah.eval(0.25, C64::new(0.0, 0.0)).unwrap();
        assert!(at0.max_abs_diff(&crate::algebra::Mat2R::rotation(phi(0.25)).to_complex()) < 1e-15);
    }

    #[test]
    fn rotation_model_strip() {
        let c = Cocycle::new(vec![GOLDEN], rotation_model(&[1])).unwrap();
        let f = phase_shift(&c, &[1.0]).unwrap();
        let r = strip_width(&f, 0.05, &[0.0, 0.3], &TorusGrid::uniform(1, 16)).unwrap();
        assert_eq!(r.side, Side::Lower);
        assert_eq!(r.delta, 0.05);
        let m = disk_coords(&f.eval(&real_point(&[0.2]), C64::new(0.1, -0.05)).unwrap());
        let disk = mobius_image_disk(&m).unwrap();
        assert!((disk.radius - (-4.0 * PI * 0.05f64).exp()).abs() < 1e-12);
        assert!((disk.radius - 0.5335).abs() < 1e-4);
        for (_, e) in &r.eps_hat {
            assert!((e - 2.0 * PI).abs() < 1e-9);
        }
    }

    #[test]
    fn schrodinger_energy_does_not_contract() {
        let f = schrodinger_energy_family(&TrigPoly::cos_mode(&[1], 1.0), &[GOLDEN]).unwrap();
        let r = strip_width(&f, 0.1, &[-0.5, 0.0, 0.5], &TorusGrid::uniform(1, 8));
        assert!(matches!(r, Err(Error::NoContraction(_))), "{r:?}");
    }

    #[test]
    fn rot_twist_has_a_strip() {
        for lambda in [1.0, 2.0, 5.0] {
            let base = Cocycle::new(vec![GOLDEN], herman(lambda, &[1])).unwrap();
            let f = rot_twist(&base).unwrap();
            let r = strip_width(&f, 0.2, &[0.0, 0.25, 0.5, 0.75], &TorusGrid::uniform(1, 32)).unwrap();
            assert!(r.delta > 0.0);
            assert_eq!(r.side, Side::Lower);
        }
    }

    #[test]
    fn ah_strip_for_sampled_rotation() {
        let ah = ah_extend_cocycle(GOLDEN, rotation_entries(1 << 13, |x| x), ah_kernel(2.0, 1.0).unwrap()).unwrap();
        let s = StripCocycle::certify(Extension::Ah(ah), 0.05, &[0.0], &TorusGrid::uniform(1, 8)).unwrap();
        assert_eq!(s.side, Side::Lower);
        assert!(s.delta >= 0.025);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn certification_stable_under_grid_doubling(lambda in 1.0f64..4.0, tmax in 0.05f64..0.4) {
            let base = Cocycle::new(vec![GOLDEN], herman(lambda, &[1])).unwrap();
            let f = rot_twist(&base).unwrap();
            let sig = [0.0, 0.5];
            let a = strip_width(&f, tmax, &sig, &TorusGrid::uniform(1, 16)).unwrap();
            let b = strip_width(&f, tmax, &[0.0, 0.25, 0.5, 0.75], &TorusGrid::uniform(1, 32)).unwrap();
            prop_assert_eq!(a.side, b.side);
            prop_assert!(b.delta >= a.delta / 2.0);
        }
    }
}
