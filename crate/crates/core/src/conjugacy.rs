//! Constructive conjugacies: the L² conjugacy built from an invariant
//! section, the Fourier cohomological solver, and conjugation of a rotation
//! cocycle toward its model x ↦ R_{⟨l,x⟩}.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{disk_coords, from_disk_coords, hyperbolic_distance, mobius, Mat2C, Mat2R, C64};
use crate::cocycle::{homotopy_class, Cocycle, CocycleExpr};
use crate::grid::{fourier_coefficients, fourier_shift, TorusGrid};
use crate::trigpoly::TrigPoly;
use crate::{Error, Result};

/// Default lower bound on |1 − e^{2πi⟨k,α⟩}|.
pub const DIVISOR_CUT: f64 = 1e-6;
/// Box for the lattice search.
pub const LATTICE_BOX: i64 = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjugacyField {
    pub grid: TorusGrid,
    pub values: Vec<Mat2R>,
    /// Sup distance of the conjugated cocycle to its target class.
    pub quality: f64,
}

impl ConjugacyField {
    fn new(grid: TorusGrid, values: Vec<Mat2R>, quality: f64) -> Result<Self> {
        if let Some(m) = values.iter().find(|m| (m.det() - 1.0).abs() > 1e-10) {
            return Err(Error::InvalidArgument(format!("conjugacy has determinant {}", m.det())));
        }
        Ok(Self { grid, values, quality })
    }
}

/// The conjugacy from a section m with |m| < 1, with its input residual
/// sup_x d(m(x+α), Å(x)·m(x)).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct L2Conjugacy {
    pub field: ConjugacyField,
    pub section_residual: f64,
}

/// B̊ = (1−|m|²)^{−1/2} [[1, −m], [−m̄, 1]], which sends m to 0.
fn disk_normalizer(m: C64) -> Mat2C {
    let s = (1.0 - m.norm_sqr()).sqrt().recip();
    let one = C64::new(s, 0.0);
    Mat2C::new(one, -m * s, -m.conj() * s, one)
}

/// B = Q⁻¹ B̊ Q for a section m sampled on `grid` for the real cocycle `c`.
/// The quality is the largest deviation from 1 of the singular values of
/// B(x+α)A(x)B(x)⁻¹ over the grid; m(x+α) comes from spectral interpolation.
pub fn l2_conjugacy_from_section(c: &Cocycle, grid: &TorusGrid, m: &[C64]) -> Result<L2Conjugacy> {
    if grid.dim() != c.dim() {
        return Err(Error::DimensionMismatch { expected: c.dim(), got: grid.dim() });
    }
    if m.len() != grid.len() {
        return Err(Error::DimensionMismatch { expected: grid.len(), got: m.len() });
    }
    let sup = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !(sup < 1.0 - 1e-9) {
        return Err(Error::BoundaryPoint(sup));
    }
    let shifted = fourier_shift(m, grid, &c.alpha);
    let b_at = |z: C64| from_disk_coords(&disk_normalizer(z)).re();
    let rows: Vec<Result<(Mat2R, f64, f64)>> = grid
        .points()
        .par_iter()
        .zip(m.par_iter().zip(&shifted))
        .map(|(x, (&z, &zs))| {
            let a = c.eval_real(x);
            let residual = hyperbolic_distance(zs, mobius(&disk_coords(&a), z))?;
            let b = b_at(z);
            let conj = b_at(zs).to_complex() * a * b.adjugate().to_complex();
            let (s1, s2) = conj.singular_values();
            Ok((b, residual, (s1 - 1.0).abs().max((s2 - 1.0).abs())))
        })
        .collect();
    let (mut values, mut residual, mut quality) = (Vec::with_capacity(grid.len()), 0.0f64, 0.0f64);
    for r in rows {
        let (b, res, q) = r?;
        values.push(b);
        residual = residual.max(res);
        quality = quality.max(q);
    }
    Ok(L2Conjugacy { field: ConjugacyField::new(grid.clone(), values, quality)?, section_residual: residual })
}

/// ψ and c with φ(x) = −ψ(x+α) + ψ(x) + c.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cohomological {
    pub psi: TrigPoly,
    pub c: f64,
    pub residual: f64,
}

fn dot(k: &[i64], x: &[f64]) -> f64 {
    k.iter().zip(x).map(|(a, b)| *a as f64 * b).sum()
}

/// Solves mode by mode: ψ̂(k) = φ̂(k)/(1 − e^{2πi⟨k,α⟩}). Every nonzero mode
/// whose divisor is below `divisor_cut` is reported.
pub fn solve_cohomological(phi: &TrigPoly, alpha: &[f64], divisor_cut: f64) -> Result<Cohomological> {
    phi.validate(alpha.len())?;
    if phi.linear_part().iter().any(|v| *v != 0.0) {
        return Err(Error::InvalidArgument("φ must be periodic (no linear part)".into()));
    }
    let zero = vec![0i64; alpha.len()];
    let modes: Vec<(Vec<i64>, C64)> = phi.modes().map(|(k, c)| (k.clone(), *c)).collect();
    let solved: Vec<(Vec<i64>, Option<C64>)> = modes
        .par_iter()
        .filter(|(k, _)| *k != zero)
        .map(|(k, f)| {
            let d = C64::new(1.0, 0.0) - C64::from_polar(1.0, 2.0 * PI * dot(k, alpha));
            (k.clone(), (d.norm() >= divisor_cut).then(|| f / d))
        })
        .collect();
    let bad: Vec<Vec<i64>> = solved.iter().filter(|s| s.1.is_none()).map(|s| s.0.clone()).collect();
    if !bad.is_empty() {
        return Err(Error::SmallDivisor(bad));
    }
    let mut psi = TrigPoly::zero(alpha.len());
    for (k, v) in solved {
        psi.add_mode(k, v.unwrap_or_default());
    }
    let c = phi.mean().re;
    let residual = cohomological_residual(phi, &psi, c, alpha);
    Ok(Cohomological { psi, c, residual })
}

/// sup |φ(x) + ψ(x+α) − ψ(x) − c| on a grid fine enough for both.
pub fn cohomological_residual(phi: &TrigPoly, psi: &TrigPoly, c: f64, alpha: &[f64]) -> f64 {
    let order = phi.max_order().max(psi.max_order()) as usize;
    let per_axis = (4 * order + 8).min(match alpha.len() {
        1 => 4096,
        2 => 128,
        _ => 24,
    });
    let grid = TorusGrid::uniform(alpha.len(), per_axis);
    let shifted = psi.shifted(alpha);
    grid.points()
        .par_iter()
        .map(|x| (phi.eval_real(x) + shifted.eval_real(x) - psi.eval_real(x) - c).abs())
        .reduce(|| 0.0, f64::max)
}

fn rotation_angle(m: &Mat2R) -> f64 {
    m.c.atan2(m.a) / (2.0 * PI)
}

fn wrap(v: f64) -> f64 {
    v - v.round()
}

/// A rotation cocycle written as [A]·R_{φ(x)} with [A](x) = R_{⟨l,x⟩}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationForm {
    pub l: Vec<i64>,
    pub phi: TrigPoly,
}

/// Samples C on `per_axis` points per axis, checks it is rotation-valued and
/// recovers φ by FFT. The periodic part must oscillate by less than half a
/// turn around its circular mean.
pub fn rotation_form(c: &Cocycle, per_axis: usize) -> Result<RotationForm> {
    let l = homotopy_class(c, per_axis.max(64))?;
    let grid = TorusGrid::uniform(c.dim(), per_axis);
    let points = grid.points();
    let raw: Vec<f64> = points
        .par_iter()
        .map(|x| {
            let m = c.eval_real(x).re();
            let off = m.mul(&Mat2R::new(m.a, m.c, m.b, m.d)).max_abs_diff(&Mat2R::IDENTITY);
            if off > 1e-10 {
                return Err(Error::InvalidArgument(format!("cocycle is not rotation-valued (‖AAᵀ − I‖ = {off:e})")));
            }
            Ok(wrap(rotation_angle(&m) - dot(&l, x)))
        })
        .collect::<Result<_>>()?;
    let mean_dir: C64 = raw.iter().map(|v| C64::from_polar(1.0, 2.0 * PI * v)).sum();
    let c0 = mean_dir.arg() / (2.0 * PI);
    let phi_vals: Vec<f64> = raw.iter().map(|v| c0 + wrap(v - c0)).collect();
    if phi_vals.iter().any(|v| (v - c0).abs() > 0.45) {
        return Err(Error::UnsupportedFamily("rotation angle oscillates by half a turn or more".into()));
    }
    let data: Vec<C64> = phi_vals.iter().map(|v| C64::from(*v)).collect();
    let mut phi = TrigPoly::zero(c.dim());
    for (k, v) in fourier_coefficients(&data, &grid) {
        if v.norm() > 1e-14 {
            phi.add_mode(k, v);
        }
    }
    Ok(RotationForm { l, phi })
}

/// Integer vector l with |⟨α,l⟩ − c mod 1| ≤ tol, smallest in sup norm.
/// In one dimension the whole box |l| ≤ 10⁴ is scanned; in higher
/// dimension a full cube of radius ⌊2·10⁶^{1/d}/2⌋ plus the coordinate axes.
pub fn lattice_search(alpha: &[f64], c: f64, tol: f64) -> Result<Vec<i64>> {
    let d = alpha.len();
    let miss = |l: &[i64]| wrap(dot(l, alpha) - c).abs();
    let mut best: Option<(i64, f64, Vec<i64>)> = None;
    let mut offer = |l: Vec<i64>| {
        let e = miss(&l);
        if e <= tol {
            let size = l.iter().map(|v| v.abs()).max().unwrap_or(0);
            if best.as_ref().map_or(true, |b| (size, e) < (b.0, b.1)) {
                best = Some((size, e, l));
            }
        }
    };
    let cube = if d == 1 { LATTICE_BOX } else { (((2e6f64).powf(1.0 / d as f64) - 1.0) / 2.0).floor() as i64 };
    let side = 2 * cube + 1;
    for flat in 0..side.pow(d as u32) {
        let mut rest = flat;
        let l: Vec<i64> = (0..d)
            .map(|_| {
                let v = rest % side - cube;
                rest /= side;
                v
            })
            .collect();
        offer(l);
    }
    if d > 1 {
        for j in 0..d {
            for v in cube + 1..=LATTICE_BOX {
                for s in [v, -v] {
                    let mut l = vec![0; d];
                    l[j] = s;
                    offer(l);
                }
            }
        }
    }
    best.map(|b| b.2).ok_or(Error::LatticeSearchFail(tol))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PushOptions {
    /// Fejér order of the truncated φ at stage k ≥ 1 is 2^{k−1}·`base_order`.
    pub base_order: i64,
    /// Lattice tolerance at stage k ≥ 1 is `lattice_tol`·10^{−(k−1)}.
    pub lattice_tol: f64,
    pub divisor_cut: f64,
    /// Samples per axis when recovering φ and measuring distances.
    pub samples: usize,
}

impl Default for PushOptions {
    fn default() -> Self {
        Self { base_order: 1, lattice_tol: 1e-2, divisor_cut: DIVISOR_CUT, samples: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PushStage {
    pub stage: usize,
    pub fejer_order: i64,
    pub lattice: Vec<i64>,
    pub psi: TrigPoly,
    /// B(x) = R_{ψ(x) − ⟨l,x⟩} on the sampling grid, with quality the sup
    /// distance of B(x+α)C(x)B(x)⁻¹ to [C].
    pub field: ConjugacyField,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PushReport {
    pub form: RotationForm,
    /// Stage 0 is C itself.
    pub stages: Vec<PushStage>,
}

impl PushReport {
    pub fn distances(&self) -> Vec<f64> {
        self.stages.iter().map(|s| s.field.quality).collect()
    }
}

fn model_distance(c: &Cocycle, l: &[i64], grid: &TorusGrid) -> f64 {
    grid.points()
        .par_iter()
        .map(|x| c.eval_real(x).re().max_abs_diff(&Mat2R::rotation(dot(l, x))))
        .reduce(|| 0.0, f64::max)
}

/// Conjugates the rotation cocycle C toward [C] in `stages` stages: truncate
/// φ, solve the cohomological equation, then twist by R_{−⟨l,x⟩} with
/// ⟨α,l⟩ ≈ c mod 1.
pub fn push_to_model(c: &Cocycle, stages: usize, opts: &PushOptions) -> Result<PushReport> {
    let form = rotation_form(c, opts.samples)?;
    let grid = TorusGrid::uniform(c.dim(), opts.samples);
    let zero = vec![0i64; c.dim()];
    let mean = form.phi.mean().re;
    let mut oscillation = form.phi.clone();
    oscillation.add_mode(zero.clone(), C64::from(-mean));
    let identity = vec![Mat2R::IDENTITY; grid.len()];
    let mut out = vec![PushStage {
        stage: 0,
        fejer_order: 0,
        lattice: zero.clone(),
        psi: TrigPoly::zero(c.dim()),
        field: ConjugacyField::new(grid.clone(), identity, model_distance(c, &form.l, &grid))?,
    }];
    for k in 1..=stages {
        let order = opts.base_order << (k - 1);
        let mut target = oscillation.fejer(order);
        target.add_mode(zero.clone(), C64::from(mean));
        let sol = solve_cohomological(&target, &c.alpha, opts.divisor_cut)?;
        let lattice = lattice_search(&c.alpha, sol.c, opts.lattice_tol * 10f64.powi(1 - k as i32))?;
        let twist: Vec<f64> = lattice.iter().map(|v| -(*v as f64)).collect();
        let b = sol.psi.add(&TrigPoly::linear(&twist));
        let conj = c.conjugate_by(&CocycleExpr::Rot(b.clone()));
        let values = grid.points().iter().map(|x| Mat2R::rotation(b.eval_real(x))).collect();
        let quality = model_distance(&conj, &form.l, &grid);
        out.push(PushStage {
            stage: k,
            fejer_order: order,
            lattice,
            psi: sol.psi,
            field: ConjugacyField::new(grid.clone(), values, quality)?,
        });
    }
    Ok(PushReport { form, stages: out })
}
