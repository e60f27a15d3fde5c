//! 2×2 matrices, Möbius maps, the disk model and hyperbolic geometry.
//!
//! Angles are measured in revolutions (arg / 2π).

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Points closer than this to the unit circle are rejected by disk operations.
pub const BOUNDARY_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat2R {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2R {
    pub const IDENTITY: Mat2R = Mat2R { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub fn rotation(theta: f64) -> Self {
        let (s, c) = (2.0 * PI * theta).sin_cos();
        Self::new(c, -s, s, c)
    }

    pub fn diag(l: f64) -> Self {
        Self::new(l, 0.0, 0.0, 1.0 / l)
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn to_complex(self) -> Mat2C {
        Mat2C::new(self.a.into(), self.b.into(), self.c.into(), self.d.into())
    }

    pub fn mul(&self, o: &Mat2R) -> Mat2R {
        Mat2R::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }

    /// Inverse assuming unit determinant.
    pub fn adjugate(&self) -> Mat2R {
        Mat2R::new(self.d, -self.b, -self.c, self.a)
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    pub fn norm(&self) -> f64 {
        self.to_complex().norm()
    }

    pub fn max_abs_diff(&self, o: &Mat2R) -> f64 {
        [self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d]
            .iter()
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat2C {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl Mat2C {
    pub const IDENTITY: Mat2C = Mat2C { a: ONE, b: ZERO, c: ZERO, d: ONE };
    pub const ZERO: Mat2C = Mat2C { a: ZERO, b: ZERO, c: ZERO, d: ZERO };

    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Self { a, b, c, d }
    }

    pub fn diag(u: C64, v: C64) -> Self {
        Self::new(u, ZERO, ZERO, v)
    }

    /// Rotation by `theta` revolutions; entire in `theta`.
    pub fn rotation(theta: C64) -> Self {
        let w = theta * (2.0 * PI);
        let (s, c) = (w.sin(), w.cos());
        Self::new(c, -s, s, c)
    }

    pub fn det(&self) -> C64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> C64 {
        self.a + self.d
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn scale_re(&self, s: f64) -> Self {
        Self::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    /// [[d, −b], [−c, a]]; equals the inverse when det = 1.
    pub fn adjugate(&self) -> Self {
        Self::new(self.d, -self.b, -self.c, self.a)
    }

    pub fn inverse(&self) -> Self {
        self.adjugate().scale(self.det().inv())
    }

    pub fn conj(&self) -> Self {
        Self::new(self.a.conj(), self.b.conj(), self.c.conj(), self.d.conj())
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.a, self.c, self.b, self.d)
    }

    pub fn entries(&self) -> [C64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn max_entry(&self) -> f64 {
        self.entries().iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn max_abs_diff(&self, o: &Mat2C) -> f64 {
        (*self - *o).max_entry()
    }

    pub fn max_imag(&self) -> f64 {
        self.entries().iter().fold(0.0, |m, z| m.max(z.im.abs()))
    }

    pub fn re(&self) -> Mat2R {
        Mat2R::new(self.a.re, self.b.re, self.c.re, self.d.re)
    }

    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.entries().iter().map(|z| z.norm_sqr()).sum()
    }

    /// Both singular values, largest first.
    pub fn singular_values(&self) -> (f64, f64) {
        // rotate the phase so det is real and nonnegative, then
        // σ1 ± σ2 = sqrt(|a ± d̄|² + |b ∓ c̄|²) without cancellation
        let det = self.det();
        let m = if det.norm() > 0.0 { self.scale(C64::from_polar(1.0, -0.5 * det.arg())) } else { *self };
        let p = ((m.a + m.d.conj()).norm_sqr() + (m.b - m.c.conj()).norm_sqr()).sqrt();
        let q = ((m.a - m.d.conj()).norm_sqr() + (m.b + m.c.conj()).norm_sqr()).sqrt();
        (0.5 * (p + q), 0.5 * (p - q).abs())
    }

    /// Spectral norm.
    pub fn norm(&self) -> f64 {
        self.singular_values().0
    }

    /// Divides by the principal square root of the determinant, which is the
    /// branch nearest 1 when the drift is small.
    pub fn renormalize_det(&self) -> Self {
        self.scale(self.det().sqrt().inv())
    }
}

impl Mul for Mat2C {
    type Output = Mat2C;
    fn mul(self, o: Mat2C) -> Mat2C {
        Mat2C::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

impl Add for Mat2C {
    type Output = Mat2C;
    fn add(self, o: Mat2C) -> Mat2C {
        Mat2C::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl Sub for Mat2C {
    type Output = Mat2C;
    fn sub(self, o: Mat2C) -> Mat2C {
        Mat2C::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

impl Neg for Mat2C {
    type Output = Mat2C;
    fn neg(self) -> Mat2C {
        self.scale_re(-1.0)
    }
}

fn q_matrices() -> (Mat2C, Mat2C) {
    let i = C64::i();
    let s = -(ONE + i).inv();
    let q = Mat2C::new(s, -i * s, s, i * s);
    (q, q.adjugate())
}

/// Å = Q A Q⁻¹, mapping SL(2,R) onto SU(1,1).
pub fn disk_coords(m: &Mat2C) -> Mat2C {
    let (q, qi) = q_matrices();
    q * *m * qi
}

/// A = Q⁻¹ Å Q.
pub fn from_disk_coords(m: &Mat2C) -> Mat2C {
    let (q, qi) = q_matrices();
    qi * *m * q
}

/// A point of the Riemann sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Ext {
    Finite(C64),
    Infinity,
}

impl Ext {
    pub fn finite(self) -> Option<C64> {
        match self {
            Ext::Finite(z) => Some(z),
            Ext::Infinity => None,
        }
    }
}

pub fn mobius_apply(m: &Mat2C, z: Ext) -> Ext {
    let (num, den) = match z {
        Ext::Finite(z) => (m.a * z + m.b, m.c * z + m.d),
        Ext::Infinity => (m.a, m.c),
    };
    if den == ZERO {
        Ext::Infinity
    } else {
        Ext::Finite(num / den)
    }
}

/// Möbius action on a finite point that is known to avoid the pole.
pub fn mobius(m: &Mat2C, z: C64) -> C64 {
    (m.a * z + m.b) / (m.c * z + m.d)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EuclideanDisk {
    pub center: C64,
    pub radius: f64,
}

impl EuclideanDisk {
    /// Distance from the closure of the disk to the unit circle; positive iff
    /// the closure lies in the open unit disk.
    pub fn margin(&self) -> f64 {
        1.0 - self.center.norm() - self.radius
    }
}

/// Image of the open unit disk under z ↦ (az+b)/(cz+d).
pub fn mobius_image_disk(m: &Mat2C) -> Result<EuclideanDisk> {
    let (cn, dn) = (m.c.norm(), m.d.norm());
    if dn <= cn + 1e-12 {
        return Err(Error::PoleOnCircle { d_abs: dn, c_abs: cn });
    }
    let den = m.d.norm_sqr() - m.c.norm_sqr();
    Ok(EuclideanDisk {
        center: (m.b * m.d.conj() - m.a * m.c.conj()) / den,
        radius: m.det().norm() / den,
    })
}

/// τ for a matrix already in disk coordinates: the bottom row applied to (z, 1).
pub fn tau_disk(m: &Mat2C, z: C64) -> Result<C64> {
    let t = m.c * z + m.d;
    if t.norm() < 1e-14 {
        return Err(Error::DegenerateTau(t.norm()));
    }
    Ok(t)
}

/// τ for a matrix in the original (SL(2)) coordinates.
pub fn tau(a: &Mat2C, z: C64) -> Result<C64> {
    tau_disk(&disk_coords(a), z)
}

/// arg / 2π in (−1/2, 1/2].
pub fn arg_rev(z: C64) -> f64 {
    z.arg() / (2.0 * PI)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseLift {
    pub values: Vec<f64>,
}

impl PhaseLift {
    pub fn total(&self) -> f64 {
        match (self.values.first(), self.values.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }
}

/// Largest accepted jump between consecutive samples, in revolutions.
pub const UNWRAP_LIMIT: f64 = 0.45;

pub fn phase_unwrap(seq: &[C64]) -> Result<PhaseLift> {
    let mut values = Vec::with_capacity(seq.len());
    let Some(&first) = seq.first() else {
        return Ok(PhaseLift { values });
    };
    let mut cur = arg_rev(first).rem_euclid(1.0);
    if cur >= 1.0 {
        cur = 0.0;
    }
    values.push(cur);
    for (i, w) in seq.windows(2).enumerate() {
        let step = arg_rev(w[1] / w[0]);
        if step.abs() >= UNWRAP_LIMIT {
            return Err(Error::UnwrapStep { index: i + 1, jump: step });
        }
        cur += step;
        values.push(cur);
    }
    Ok(PhaseLift { values })
}

fn check_open(z: C64) -> Result<()> {
    let r = z.norm();
    if r >= 1.0 - BOUNDARY_EPS || !r.is_finite() {
        return Err(Error::BoundaryPoint(r));
    }
    Ok(())
}

/// Geodesic distance for the metric |dz| / (1 − |z|²).
pub fn hyperbolic_distance(z: C64, w: C64) -> Result<f64> {
    check_open(z)?;
    check_open(w)?;
    let a = (ONE - z.conj() * w).norm();
    let b = (z - w).norm();
    let s = ((1.0 - z.norm_sqr()) * (1.0 - w.norm_sqr())).sqrt();
    Ok(((a + b) / s).ln())
}

/// The disk automorphism u ↦ (u − p)/(1 − p̄u), sending p to 0.
pub fn to_origin(p: C64, u: C64) -> C64 {
    (u - p) / (ONE - p.conj() * u)
}

/// Inverse of [`to_origin`].
pub fn from_origin(p: C64, u: C64) -> C64 {
    (u + p) / (ONE + p.conj() * u)
}

/// Point at fraction `s` of the hyperbolic geodesic from z to w.
pub fn geodesic_point(z: C64, w: C64, s: f64) -> Result<C64> {
    check_open(z)?;
    check_open(w)?;
    let u = to_origin(z, w);
    let r = u.norm();
    if r == 0.0 {
        return Ok(z);
    }
    let rs = (s * r.atanh()).tanh();
    Ok(from_origin(z, u * (rs / r)))
}

pub fn hyperbolic_midpoint(z: C64, w: C64) -> Result<C64> {
    check_open(z)?;
    check_open(w)?;
    let u = to_origin(z, w);
    // tanh(artanh(r)/2) · u/r
    let m = u / (1.0 + (1.0 - u.norm_sqr()).sqrt());
    Ok(from_origin(z, m))
}

/// The SU(1,1) element z ↦ e^{2πi·phi}(z + p)/(1 + p̄z), as a unimodular matrix.
pub fn su11(p: C64, phi: f64) -> Mat2C {
    let s = (1.0 - p.norm_sqr()).sqrt().recip();
    let e = C64::from_polar(1.0, PI * phi);
    Mat2C::new(e * s, e * p * s, e.conj() * p.conj() * s, e.conj() * s)
}

/// Product with the scale factored out, so long products cannot overflow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledMat {
    pub m: Mat2C,
    pub log_scale: f64,
}

impl ScaledMat {
    pub fn identity() -> Self {
        Self { m: Mat2C::IDENTITY, log_scale: 0.0 }
    }

    pub fn from_mat(m: Mat2C) -> Self {
        let mut s = Self { m, log_scale: 0.0 };
        s.rebalance();
        s
    }

    fn rebalance(&mut self) {
        let e = self.m.max_entry();
        if e > 0.0 && !(0.5..=2.0).contains(&e) {
            self.m = self.m.scale_re(1.0 / e);
            self.log_scale += e.ln();
        }
    }

    /// Left-multiplies by `a`.
    pub fn push(&mut self, a: &Mat2C) {
        self.m = *a * self.m;
        self.rebalance();
    }

    pub fn value(&self) -> Mat2C {
        self.m.scale_re(self.log_scale.exp())
    }

    pub fn log_norm(&self) -> f64 {
        self.m.norm().ln() + self.log_scale
    }

    /// Inverse assuming the represented product has unit determinant.
    pub fn inverse_unimodular(&self) -> Self {
        let mut s = Self { m: self.m.adjugate(), log_scale: self.log_scale };
        s.rebalance();
        s
    }
}
