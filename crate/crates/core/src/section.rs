//! Invariant disk sections on complexified strips and the quantities built
//! from them: Lyapunov exponents, Kotani integrals, U(t) profiles.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{disk_coords, hyperbolic_distance, mobius, tau_disk, Mat2C, C64};
use crate::cocycle::{exp_twist_family, Family};
use crate::complexify::StripCocycle;
use crate::grid::{fourier_shift, TorusGrid};
use crate::lyap::lyapunov_orbit;
use crate::monotone::MonotonicityReport;
use crate::rotnum::{affine_fit, variation_rho};
use crate::trigpoly::TrigPoly;
use crate::{Error, Result};

/// Graph-transform sweeps allowed before giving up.
pub const MAX_SWEEPS: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionKind {
    /// m⁺: attracting section of the forward dynamics on the contracting side.
    Plus,
    /// m⁻: attracting section of the inverse dynamics on the mirrored side.
    Minus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiskSection {
    pub grid: TorusGrid,
    pub values: Vec<C64>,
    pub sigma: f64,
    /// Signed imaginary part of the parameter.
    pub level: f64,
    pub kind: SectionKind,
    pub residual: f64,
    pub sweeps: usize,
}

impl DiskSection {
    pub fn sup_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

fn disk_matrices(s: &StripCocycle, sigma: f64, level: f64, grid: &TorusGrid) -> Result<Vec<Mat2C>> {
    grid.points()
        .par_iter()
        .map(|x| Ok(disk_coords(&s.base_eval(x, C64::new(sigma, level))?)))
        .collect()
}

fn sup_distance(a: &[C64], b: &[C64]) -> Result<f64> {
    let d: Vec<Result<f64>> = a.par_iter().zip(b).map(|(z, w)| hyperbolic_distance(*z, *w)).collect();
    d.into_iter().try_fold(0.0f64, |acc, v| Ok(acc.max(v?)))
}

fn transform(mats: &[Mat2C], m: &[C64], grid: &TorusGrid, alpha: &[f64], kind: SectionKind) -> Vec<C64> {
    match kind {
        // m(x) ← Å(x−α)·m(x−α)
        SectionKind::Plus => {
            let nu: Vec<C64> = mats.par_iter().zip(m).map(|(a, z)| mobius(a, *z)).collect();
            let back: Vec<f64> = alpha.iter().map(|a| -a).collect();
            fourier_shift(&nu, grid, &back)
        }
        // m(x) ← Å(x)⁻¹·m(x+α)
        SectionKind::Minus => {
            let ahead = fourier_shift(m, grid, alpha);
            mats.par_iter().zip(&ahead).map(|(a, z)| mobius(&a.adjugate(), *z)).collect()
        }
    }
}

/// max over nodes of d(m(x+α), Å(x)·m(x)), with m(x+α) interpolated.
fn section_residual(mats: &[Mat2C], m: &[C64], grid: &TorusGrid, alpha: &[f64]) -> Result<f64> {
    let ahead = fourier_shift(m, grid, alpha);
    let image: Vec<C64> = mats.par_iter().zip(m).map(|(a, z)| mobius(a, *z)).collect();
    sup_distance(&ahead, &image)
}

fn solve_section(s: &StripCocycle, sigma: f64, level: f64, grid: &TorusGrid, tol: f64, kind: SectionKind) -> Result<DiskSection> {
    if grid.dim() != s.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), got: grid.dim() });
    }
    let alpha = s.alpha();
    let mats = disk_matrices(s, sigma, level, grid)?;
    let mut m = vec![C64::new(0.0, 0.0); grid.len()];
    let mut prev_update = f64::INFINITY;
    let mut sweeps = 0;
    loop {
        let next = transform(&mats, &m, grid, &alpha, kind);
        let update = sup_distance(&m, &next)?;
        m = next;
        sweeps += 1;
        if update < tol {
            break;
        }
        // the first sweeps leave m ≡ 0, where the ratio means nothing yet
        if sweeps > 8 && update > (1.0 - 1e-4) * prev_update {
            return Err(Error::SlowContraction(update / prev_update));
        }
        if sweeps >= MAX_SWEEPS {
            return Err(Error::SlowContraction(update / prev_update));
        }
        prev_update = update;
    }
    let residual = section_residual(&mats, &m, grid, &alpha)?;
    Ok(DiskSection { grid: grid.clone(), values: m, sigma, level, kind, residual, sweeps })
}

/// m⁺ at σ + i·side·t: fixed point of the graph transform started from m ≡ 0.
pub fn invariant_section(s: &StripCocycle, sigma: f64, t: f64, grid: &TorusGrid, tol: f64) -> Result<DiskSection> {
    check_level(s, t)?;
    solve_section(s, sigma, s.side.sign() * t, grid, tol, SectionKind::Plus)
}

/// m⁻ at the mirrored level σ − i·side·t, from the inverse cocycle. It is
/// kept in D (no reflection), which makes m⁺ = m⁻ on rotation models.
pub fn invariant_section_minus(s: &StripCocycle, sigma: f64, t: f64, grid: &TorusGrid, tol: f64) -> Result<DiskSection> {
    check_level(s, t)?;
    solve_section(s, sigma, -s.side.sign() * t, grid, tol, SectionKind::Minus)
}

fn check_level(s: &StripCocycle, t: f64) -> Result<()> {
    if !(t > 0.0 && t <= s.delta * (1.0 + 1e-12)) {
        return Err(Error::InvalidArgument(format!("level {t} outside the certified strip (0, {}]", s.delta)));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionLyapunov {
    pub via_tau: f64,
    pub via_q: f64,
}

/// L = ∫ ln|τ_Å(m)| and L = ½∫ −ln q with q = |τ|⁻²(1−|m|²)/(1−|Åm|²).
pub fn section_lyapunov(s: &StripCocycle, m: &DiskSection) -> Result<SectionLyapunov> {
    let mats = disk_matrices(s, m.sigma, m.level, &m.grid)?;
    let terms: Vec<Result<(f64, f64)>> = mats
        .par_iter()
        .zip(&m.values)
        .map(|(a, z)| {
            let t = tau_disk(a, *z)?;
            let w = mobius(a, *z);
            let q = (1.0 - z.norm_sqr()) / ((1.0 - w.norm_sqr()) * t.norm_sqr());
            Ok((t.norm().ln(), -0.5 * q.ln()))
        })
        .collect();
    let (mut a, mut b) = (0.0, 0.0);
    for t in terms {
        let (x, y) = t?;
        a += x;
        b += y;
    }
    let n = m.values.len() as f64;
    Ok(SectionLyapunov { via_tau: a / n, via_q: b / n })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KotaniIntegrals {
    pub i_plus: f64,
    pub i_minus: f64,
    pub d2: f64,
}

/// I± = ∫ 1/(1−|m±|²) and D² = ∫ |m⁺ − m⁻|².
pub fn kotani_integrals(plus: &DiskSection, minus: &DiskSection) -> Result<KotaniIntegrals> {
    if plus.grid != minus.grid || plus.kind != SectionKind::Plus || minus.kind != SectionKind::Minus {
        return Err(Error::InvalidArgument("kotani integrals need m⁺ and m⁻ on a common grid".into()));
    }
    if (plus.level + minus.level).abs() > 1e-15 || plus.sigma != minus.sigma {
        return Err(Error::InvalidArgument("sections must sit at mirrored levels".into()));
    }
    let n = plus.values.len() as f64;
    let i = |v: &[C64]| v.iter().map(|z| 1.0 / (1.0 - z.norm_sqr())).sum::<f64>() / n;
    let d2 = plus.values.iter().zip(&minus.values).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / n;
    Ok(KotaniIntegrals { i_plus: i(&plus.values), i_minus: i(&minus.values), d2 })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UProfile {
    /// (t, U(t)) per level.
    pub values: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute deviation from the affine fit.
    pub residual: f64,
    /// Largest section residual met along the way.
    pub section_residual: f64,
}

/// U(t) = σ-average of the section Lyapunov exponent, with an affine fit.
pub fn u_profile(s: &StripCocycle, levels: &[f64], sigmas: &[f64], grid: &TorusGrid, tol: f64) -> Result<UProfile> {
    if levels.len() < 2 || sigmas.is_empty() {
        return Err(Error::InvalidArgument("need at least two levels and one σ".into()));
    }
    let mut values = Vec::with_capacity(levels.len());
    let mut worst = 0.0f64;
    for &t in levels {
        let per: Vec<Result<(f64, f64)>> = sigmas
            .par_iter()
            .map(|&sigma| {
                let m = invariant_section(s, sigma, t, grid, tol)?;
                Ok((section_lyapunov(s, &m)?.via_tau, m.residual))
            })
            .collect();
        let mut sum = 0.0;
        for p in per {
            let (l, r) = p?;
            sum += l;
            worst = worst.max(r);
        }
        values.push((t, sum / sigmas.len() as f64));
    }
    let (slope, intercept, residual) = affine_fit(&values);
    Ok(UProfile { values, slope, intercept, residual, section_residual: worst })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondDerivative {
    /// (2/t²)·∫L at t and at t/2.
    pub at_t: f64,
    pub at_half: f64,
    pub extrapolated: f64,
}

/// (2/t²)·∫ L(A_{θ,t}) dθ through ∫L(R_θA) = ∫ ln((‖A‖+‖A‖⁻¹)/2), at t and
/// t/2, then the first-order Richardson value 2f(t/2) − f(t).
pub fn second_derivative_limit(s1: &TrigPoly, s2: &TrigPoly, s3: &TrigPoly, l: &[i64], t: f64, thetas: usize) -> Result<SecondDerivative> {
    if !(t > 0.0) || thetas == 0 {
        return Err(Error::InvalidArgument("need t > 0 and θ-points".into()));
    }
    let alpha = vec![0.0; l.len()];
    let x0 = vec![C64::new(0.0, 0.0); l.len()];
    let scaled = |t: f64| -> Result<f64> {
        let f = exp_twist_family(s1, s2, s3, l, t, &alpha)?;
        let mut acc = 0.0;
        for k in 0..thetas {
            let nrm = f.eval(&x0, C64::from(k as f64 / thetas as f64))?.norm();
            acc += (0.5 * (nrm + 1.0 / nrm)).ln();
        }
        Ok(2.0 / (t * t) * acc / thetas as f64)
    };
    let at_t = scaled(t)?;
    let at_half = scaled(t / 2.0)?;
    Ok(SecondDerivative { at_t, at_half, extrapolated: 2.0 * at_half - at_t })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeBound {
    /// Central difference of the lifted ρ at θ*.
    pub drho: f64,
    /// |ε|/2π from the monotonicity certificate.
    pub threshold: f64,
    pub lyapunov: f64,
    /// Resolution of the ρ estimate, 2/n.
    pub tolerance: f64,
}

impl DerivativeBound {
    pub fn passes(&self, slack: f64) -> bool {
        self.drho.abs() >= self.threshold - slack
    }
}

/// Compares |dρ/dθ| at a zero-exponent parameter with the certified ε/2π.
pub fn derivative_bound_check(f: &Family, cert: &MonotonicityReport, theta: f64, h: f64, x0: &[f64], n: usize) -> Result<DerivativeBound> {
    if !cert.certified {
        return Err(Error::Uncertified(Box::new(cert.clone())));
    }
    let lyapunov = lyapunov_orbit(&f.at(theta), x0, n.max(1000)).value;
    if lyapunov >= 1e-3 {
        return Err(Error::NotAtZeroEnergy(lyapunov));
    }
    let v = variation_rho(f, C64::from(theta - h), C64::from(theta + h), x0, n, 64)?;
    Ok(DerivativeBound {
        drho: v.delta_rho / (2.0 * h),
        threshold: cert.epsilon.abs() / (2.0 * std::f64::consts::PI),
        lyapunov,
        tolerance: 2.0 / n as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Mat2R;
    use crate::cocycle::{herman, phase_shift, rot_twist, rotation_model, Cocycle, CocycleExpr};
    use crate::complexify::Extension;
    use crate::lyap::uniform_thetas;
    use crate::monotone::certify_monotonicity;
    use crate::{GOLDEN, SILVER};
    use std::f64::consts::PI;

    fn strip(f: Family, tmax: f64) -> StripCocycle {
        StripCocycle::certify(Extension::Analytic(f), tmax, &uniform_thetas(8), &TorusGrid::uniform(1, 32)).unwrap()
    }

    fn rotation_strip() -> StripCocycle {
        let c = Cocycle::new(vec![GOLDEN], rotation_model(&[1])).unwrap();
        strip(phase_shift(&c, &[1.0]).unwrap(), 0.1)
    }

    #[test]
    fn rotation_model_section_is_zero() {
        let s = rotation_strip();
        for t in [0.1, 0.05, 0.0125] {
            let m = invariant_section(&s, 0.3, t, &TorusGrid::uniform(1, 64), 1e-13).unwrap();
            assert!(m.sup_abs() < 1e-14 && m.residual < 1e-14);
            let l = section_lyapunov(&s, &m).unwrap();
            assert!((l.via_tau - 2.0 * PI * t).abs() < 1e-8);
            assert!((l.via_q - 2.0 * PI * t).abs() < 1e-8);
            let minus = invariant_section_minus(&s, 0.3, t, &TorusGrid::uniform(1, 64), 1e-13).unwrap();
            let k = kotani_integrals(&m, &minus).unwrap();
            assert_eq!((k.i_plus, k.i_minus, k.d2), (1.0, 1.0, 0.0));
        }
        assert!(invariant_section(&s, 0.0, 0.2, &TorusGrid::uniform(1, 8), 1e-10).is_err());
    }

    /// A constant matrix: m is the attracting fixed point of Å.
    #[test]
    fn constant_cocycle_section_is_the_attracting_fixed_point() {
        let base = Cocycle::new(vec![GOLDEN], CocycleExpr::Const(Mat2R::diag(1.5))).unwrap();
        let s = strip(rot_twist(&base).unwrap(), 0.1);
        let (sigma, t) = (0.05, 0.04);
        let m = invariant_section(&s, sigma, t, &TorusGrid::uniform(1, 16), 1e-14).unwrap();
        let a = disk_coords(&s.base_eval(&[0.0], C64::new(sigma, s.side.sign() * t)).unwrap());
        // eigenvector oracle: fixed points of z ↦ (az+b)/(cz+d) solve cz² + (d−a)z − b = 0
        let disc = ((a.d - a.a) * (a.d - a.a) + 4.0 * a.b * a.c).sqrt();
        let roots = [(a.a - a.d + disc) / (2.0 * a.c), (a.a - a.d - disc) / (2.0 * a.c)];
        let inside = roots.iter().find(|z| z.norm() < 1.0).unwrap();
        for v in &m.values {
            assert!((v - inside).norm() < 1e-10);
        }
        let l = section_lyapunov(&s, &m).unwrap();
        assert!((l.via_tau - l.via_q).abs() < 1e-10);
    }

    #[test]
    fn herman_sections() {
        let base = Cocycle::new(vec![GOLDEN], herman(2.0, &[1])).unwrap();
        let s = strip(rot_twist(&base).unwrap(), 0.1);
        let grid = TorusGrid::uniform(1, 256);
        let real = lyapunov_orbit(&base, &[0.0], 200_000).value;
        let mut prev_i = 0.0;
        for t in [0.1, 0.05, 0.025] {
            let m = invariant_section(&s, 0.0, t, &grid, 1e-12).unwrap();
            assert!(m.residual < 1e-8, "{t}: {}", m.residual);
            let l = section_lyapunov(&s, &m).unwrap();
            assert!((l.via_tau - l.via_q).abs() < 1e-6);
            assert!(l.via_tau >= real - 1e-2);
            let eps = s.eps_hat_at(t).unwrap();
            assert!(l.via_tau >= 0.9 * eps * t);
            let minus = invariant_section_minus(&s, 0.0, t, &grid, 1e-12).unwrap();
            let k = kotani_integrals(&m, &minus).unwrap();
            assert!(k.i_plus >= 1.0 && k.i_minus >= 1.0);
            assert!(k.i_plus > prev_i);
            prev_i = k.i_plus;
        }
    }

    #[test]
    fn u_profile_of_rotation_model() {
        let s = rotation_strip();
        let u = u_profile(&s, &[0.02, 0.04, 0.06], &[0.0, 0.5], &TorusGrid::uniform(1, 16), 1e-13).unwrap();
        assert!((u.slope - 2.0 * PI).abs() < 1e-8);
        assert!(u.intercept.abs() < 1e-9);
        assert!(u.residual < 1e-9);
    }

    #[test]
    fn u_profile_of_two_frequency_rotation() {
        let c = Cocycle::new(vec![GOLDEN, SILVER], rotation_model(&[1, 2])).unwrap();
        let f = phase_shift(&c, &[1.0, 1.0]).unwrap();
        let s = StripCocycle::certify(Extension::Analytic(f), 0.05, &[0.0], &TorusGrid::uniform(2, 8)).unwrap();
        let u = u_profile(&s, &[0.01, 0.02], &[0.0], &TorusGrid::uniform(2, 8), 1e-13).unwrap();
        // ⟨l, w⟩ = 3
        assert!((u.slope - 2.0 * PI * 3.0).abs() < 1e-8);
    }

    #[test]
    fn second_derivative_examples() {
        let z = TrigPoly::zero(1);
        let c = TrigPoly::cos_mode(&[1], 1.0);
        let s = TrigPoly::sin_mode(&[1], 1.0);
        let a = second_derivative_limit(&c, &z, &z, &[1], 0.05, 256).unwrap();
        assert!((a.extrapolated - 0.5).abs() < 0.025);
        let b = second_derivative_limit(&z, &s, &z, &[1], 0.05, 256).unwrap();
        assert!((b.extrapolated - 0.5).abs() < 0.025);
        let r = second_derivative_limit(&z, &z, &c, &[2], 0.05, 256).unwrap();
        assert!(r.extrapolated.abs() < 1e-12);
    }

    #[test]
    fn derivative_bound_on_rotation_model() {
        let c = Cocycle::new(vec![GOLDEN], rotation_model(&[1])).unwrap();
        let f = phase_shift(&c, &[1.0]).unwrap();
        let cert = certify_monotonicity(&f, &TorusGrid::uniform(1, 64), &[0.0], 3).unwrap();
        let b = derivative_bound_check(&f, &cert, 0.3, 0.01, &[0.0], 1000).unwrap();
        assert!((b.threshold - 1.0).abs() < 1e-12);
        assert!((b.drho.abs() - 1.0).abs() <= b.tolerance);
        assert!(b.passes(5e-3));
        let h = Cocycle::new(vec![GOLDEN], herman(2.0, &[1])).unwrap();
        let fh = phase_shift(&h, &[1.0]).unwrap();
        let cert = certify_monotonicity(&fh, &TorusGrid::uniform(1, 1024), &[0.0], 4).unwrap();
        assert!(matches!(derivative_bound_check(&fh, &cert, 0.0, 0.01, &[0.0], 1000), Err(Error::NotAtZeroEnergy(_))));
    }
}
