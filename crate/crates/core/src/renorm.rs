//! Continued fractions and renormalization of one-frequency cocycles through
//! commuting pairs.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{Mat2C, Mat2R};
use crate::cocycle::{sampled_winding, Cocycle};
use crate::{Error, Result};

/// Convergent data. Index n of each vector is level n; levels start at −1
/// for p, q and β so that `q[n + 1]` is q_n.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CFData {
    pub alpha: f64,
    /// Partial quotients a_1, a_2, ….
    pub partial_quotients: Vec<u64>,
    p: Vec<i64>,
    q: Vec<i64>,
    beta: Vec<f64>,
}

impl CFData {
    /// Deepest level n available.
    pub fn depth(&self) -> usize {
        self.q.len() - 2
    }

    pub fn p(&self, n: i64) -> i64 {
        self.p[(n + 1) as usize]
    }

    pub fn q(&self, n: i64) -> i64 {
        self.q[(n + 1) as usize]
    }

    /// β_n = (−1)ⁿ(q_nα − p_n), with β_{−1} = 1.
    pub fn beta(&self, n: i64) -> f64 {
        self.beta[(n + 1) as usize]
    }

    /// α_n = β_n/β_{n−1}.
    pub fn alpha_n(&self, n: i64) -> f64 {
        self.beta(n) / self.beta(n - 1)
    }
}

fn sign(n: i64) -> i64 {
    if n.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// Convergents of α ∈ (0, 1) down to level `depth`.
pub fn continued_fraction(alpha: f64, depth: usize) -> Result<CFData> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let mut cf = CFData { alpha, partial_quotients: Vec::new(), p: vec![1, 0], q: vec![0, 1], beta: vec![1.0, alpha] };
    for n in 1..=depth as i64 {
        let prev = cf.beta(n - 1);
        if prev < 1e-13 {
            return Err(Error::RationalAlpha(n as usize - 1));
        }
        let a = (cf.beta(n - 2) / prev).floor() as i64;
        let (p, q) = (a * cf.p(n - 1) + cf.p(n - 2), a * cf.q(n - 1) + cf.q(n - 2));
        // one rounding: the product q·α is exact inside the fma
        let b = sign(n) as f64 * (q as f64).mul_add(alpha, -(p as f64));
        cf.partial_quotients.push(a as u64);
        cf.p.push(p);
        cf.q.push(q);
        cf.beta.push(b);
    }
    if cf.beta(depth as i64) < 1e-13 {
        return Err(Error::RationalAlpha(depth));
    }
    Ok(cf)
}

/// α = [0; a_1, a_2, …] evaluated from the tail.
pub fn alpha_from_partial_quotients(a: &[u64]) -> Result<f64> {
    if a.is_empty() || a.contains(&0) {
        return Err(Error::InvalidArgument("partial quotients must be positive".into()));
    }
    Ok(a.iter().rev().fold(0.0, |x, &k| 1.0 / (k as f64 + x)))
}

/// The pair (A^{(n,0)}, A^{(n,1)}) on R, built from the iterates at times
/// (−1)^{n−1}q_{n−1} and (−1)ⁿq_n rescaled by β_{n−1} about x*.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RenormPair {
    pub n: usize,
    pub x_star: f64,
    pub beta_prev: f64,
    pub alpha_n: f64,
    pub times: (i64, i64),
    pub commutation_residual: f64,
    pub base: Cocycle,
}

impl RenormPair {
    fn at(&self, k: i64, x: f64) -> Mat2R {
        self.base.iterate_real(&[self.x_star + self.beta_prev * x], k).value().re()
    }

    pub fn a0(&self, x: f64) -> Mat2R {
        self.at(self.times.0, x)
    }

    pub fn a1(&self, x: f64) -> Mat2R {
        self.at(self.times.1, x)
    }

    /// max ‖A1(x+1)A0(x) − A0(x+α_n)A1(x)‖ over `points` nodes of [0, 1).
    pub fn commutation(&self, points: usize) -> f64 {
        (0..points)
            .into_par_iter()
            .map(|j| {
                let x = j as f64 / points as f64;
                let l = self.a1(x + 1.0).mul(&self.a0(x));
                let r = self.a0(x + self.alpha_n).mul(&self.a1(x));
                l.max_abs_diff(&r) / l.norm().max(1.0)
            })
            .reduce(|| 0.0, f64::max)
    }
}

pub fn commuting_pair(c: &Cocycle, cf: &CFData, x_star: f64, n: usize) -> Result<RenormPair> {
    if c.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: c.dim() });
    }
    if n == 0 || n > cf.depth() {
        return Err(Error::InvalidArgument(format!("level {n} outside 1..={}", cf.depth())));
    }
    if (cf.alpha - c.alpha[0]).abs() > 1e-15 {
        return Err(Error::InvalidArgument("continued fraction built for a different alpha".into()));
    }
    let n_i = n as i64;
    let mut pair = RenormPair {
        n,
        x_star,
        beta_prev: cf.beta(n_i - 1),
        alpha_n: cf.alpha_n(n_i),
        times: (sign(n_i - 1) * cf.q(n_i - 1), sign(n_i) * cf.q(n_i)),
        commutation_residual: 0.0,
        base: c.clone(),
    };
    pair.commutation_residual = pair.commutation(64);
    if !(pair.commutation_residual <= 1e-8) {
        return Err(Error::CommutationResidual(pair.commutation_residual));
    }
    Ok(pair)
}

/// Smooth step, 0 near 0 and 1 near 1, with all derivatives flat at both ends.
pub fn smooth_step(x: f64) -> f64 {
    let psi = |s: f64| if s <= 0.0 { 0.0 } else { (-1.0 / s).exp() };
    let (a, b) = (psi(x), psi(1.0 - x));
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// Angle (revolutions) of the rotation factor in M = K·P.
fn polar_angle(m: &Mat2R) -> f64 {
    (m.c - m.b).atan2(m.a + m.d) / (2.0 * PI)
}

/// exp(s·S) for traceless symmetric S.
fn exp_sym(s: &Mat2R, scale: f64) -> Mat2R {
    let w = (s.a * s.a + s.b * s.b).sqrt();
    let (ch, sh) = ((scale * w).cosh(), if w > 0.0 { (scale * w).sinh() / w } else { scale });
    Mat2R::new(ch + sh * s.a, sh * s.b, sh * s.c, ch + sh * s.d)
}

/// Traceless symmetric log of a unimodular positive symmetric matrix.
fn log_sym(p: &Mat2R) -> Mat2R {
    let ch = (0.5 * (p.a + p.d)).max(1.0);
    let w = ch.acosh();
    let f = if w > 1e-300 { w / w.sinh() } else { 1.0 };
    let off = 0.5 * (p.b + p.c);
    Mat2R::new(f * (p.a - ch), f * off, f * off, f * (p.d - ch))
}

/// B on [0, 1) is R_{b(x)} corrected by a polar blend, where b is quadratic
/// with b(x+1) − b(x) equal to minus the affine fit of the angle of A0; on
/// [k, k+1) it is continued by B(x+1) = B(x)·A0(x)⁻¹.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormalizingMap {
    pub pair: RenormPair,
    /// Coefficients of b(x) = b1·x + b2·x².
    pub b1: f64,
    pub b2: f64,
    /// Polar factors of the correction at x = 1.
    pub kappa: f64,
    pub log_p: Mat2R,
    pub residual: f64,
}

impl NormalizingMap {
    fn seed(&self, x: f64) -> Mat2R {
        let e = smooth_step(x);
        let corr = Mat2R::rotation(e * self.kappa).mul(&exp_sym(&self.log_p, e));
        corr.mul(&Mat2R::rotation(self.b1 * x + self.b2 * x * x))
    }

    /// B(x) for x ≥ 0.
    pub fn eval(&self, x: f64) -> Mat2R {
        let k = x.floor().max(0.0);
        let mut m = self.seed(x - k);
        for j in 0..k as i64 {
            m = m.mul(&self.pair.a0(x - k + j as f64).adjugate());
        }
        m
    }
}

pub fn normalizing_map(pair: &RenormPair, samples: usize) -> Result<NormalizingMap> {
    let samples = samples.max(8);
    // unwrapped angle of A0 on [0, 1]
    let mut angles = Vec::with_capacity(samples + 1);
    let mut prev = polar_angle(&pair.a0(0.0));
    angles.push(prev);
    for j in 1..=samples {
        let raw = polar_angle(&pair.a0(j as f64 / samples as f64));
        prev += (raw - prev + 0.5).rem_euclid(1.0) - 0.5;
        angles.push(prev);
    }
    let u = angles[0];
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (j, a) in angles.iter().enumerate() {
        let x = j as f64 / samples as f64;
        sxy += x * (a - u);
        sxx += x * x;
    }
    let v = sxy / sxx;
    let (b1, b2) = (-u + 0.5 * v, -0.5 * v);
    // correction E with E·R_{b(1)} = A0(0)⁻¹
    let e1 = pair.a0(0.0).adjugate().mul(&Mat2R::rotation(-(b1 + b2)));
    let kappa = polar_angle(&e1);
    if kappa.abs() >= 0.25 {
        return Err(Error::ChartMiss(kappa));
    }
    let p = Mat2R::rotation(-kappa).mul(&e1);
    let log_p = log_sym(&p);
    let mut map = NormalizingMap { pair: pair.clone(), b1, b2, kappa, log_p, residual: 0.0 };
    map.residual = (0..samples)
        .into_par_iter()
        .map(|j| {
            let x = j as f64 / samples as f64;
            map.eval(x + 1.0).mul(&pair.a0(x)).mul(&map.eval(x).adjugate()).max_abs_diff(&Mat2R::IDENTITY)
        })
        .reduce(|| 0.0, f64::max);
    // the seed must also meet its continuation at x = 1
    let joint = map.seed(1.0).max_abs_diff(&map.eval(1.0));
    map.residual = map.residual.max(joint);
    if !(map.residual <= 1e-8) {
        return Err(Error::ChartMiss(map.residual));
    }
    Ok(map)
}

/// A^{(n)}(x) = B(x+α_n)·A1(x)·B(x)⁻¹ sampled on j/N, a 1-periodic cocycle
/// over x ↦ x + α_n.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Representative {
    pub n: usize,
    pub alpha_n: f64,
    pub samples: Vec<Mat2R>,
    pub periodicity_residual: f64,
}

impl Representative {
    pub fn homotopy_class(&self) -> Result<i64> {
        let s: Vec<Mat2C> = self.samples.iter().map(|m| m.to_complex()).collect();
        sampled_winding(&s)
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.samples.len()).map(|j| j as f64 / self.samples.len() as f64).collect()
    }
}

fn representative_at(b: &NormalizingMap, x: f64) -> Mat2R {
    b.eval(x + b.pair.alpha_n).mul(&b.pair.a1(x)).mul(&b.eval(x).adjugate())
}

pub fn renorm_representative(b: &NormalizingMap) -> Result<Representative> {
    let mut n = 1usize << 10;
    loop {
        let samples: Vec<Mat2R> = (0..n).into_par_iter().map(|j| representative_at(b, j as f64 / n as f64)).collect();
        let residual = (0..n)
            .into_par_iter()
            .map(|j| {
                let x = j as f64 / n as f64;
                representative_at(b, x + 1.0).max_abs_diff(&samples[j]) / samples[j].norm()
            })
            .reduce(|| 0.0, f64::max);
        if residual <= 1e-7 {
            return Ok(Representative { n: b.pair.n, alpha_n: b.pair.alpha_n, samples, periodicity_residual: residual });
        }
        if n >= 1 << 14 {
            return Err(Error::PeriodicityResidual(residual));
        }
        n *= 2;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationFit {
    pub theta: f64,
    pub distance: f64,
}

/// θ̂ minimizing max_x ‖R_{−θ−(−1)ⁿ deg·x}·A(x) − Id‖: a coarse scan, then
/// golden-section search in the best bracket.
pub fn rotation_distance(rep: &Representative, deg: i64, n: usize) -> RotationFit {
    let s = sign(n as i64) * deg;
    let xs = rep.points();
    let cost = |theta: f64| -> f64 {
        xs.iter()
            .zip(&rep.samples)
            .map(|(x, m)| Mat2R::rotation(-theta - s as f64 * x).mul(m).max_abs_diff(&Mat2R::IDENTITY))
            .fold(0.0, f64::max)
    };
    let coarse = 256;
    let best = (0..coarse).map(|k| k as f64 / coarse as f64).map(|t| (t, cost(t))).fold((0.0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
    let (mut lo, mut hi) = (best.0 - 1.0 / coarse as f64, best.0 + 1.0 / coarse as f64);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut c, mut d) = (hi - g * (hi - lo), lo + g * (hi - lo));
    let (mut fc, mut fd) = (cost(c), cost(d));
    while hi - lo > 1e-14 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = cost(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = cost(d);
        }
    }
    let theta = 0.5 * (lo + hi);
    RotationFit { theta: theta.rem_euclid(1.0), distance: cost(theta) }
}

/// One level of the cascade: pair, normalizing map, representative, fit.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LevelReport {
    pub n: usize,
    pub alpha_n: f64,
    pub commutation_residual: f64,
    pub normalizing_residual: f64,
    pub periodicity_residual: f64,
    pub degree: i64,
    pub theta_hat: f64,
    pub distance: f64,
}

pub fn renormalize(c: &Cocycle, deg: i64, x_star: f64, levels: std::ops::RangeInclusive<usize>) -> Result<Vec<LevelReport>> {
    let cf = continued_fraction(c.alpha[0], *levels.end())?;
    levels
        .map(|n| {
            let pair = commuting_pair(c, &cf, x_star, n)?;
            let b = normalizing_map(&pair, 1024)?;
            let rep = renorm_representative(&b)?;
            let fit = rotation_distance(&rep, deg, n);
            Ok(LevelReport {
                n,
                alpha_n: pair.alpha_n,
                commutation_residual: pair.commutation_residual,
                normalizing_residual: b.residual,
                periodicity_residual: rep.periodicity_residual,
                degree: rep.homotopy_class()?,
                theta_hat: fit.theta,
                distance: fit.distance,
            })
        })
        .collect()
}
