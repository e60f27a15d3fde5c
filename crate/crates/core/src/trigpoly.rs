//! Trigonometric polynomials on the d-torus, plus an optional real linear
//! term so that degree-carrying angles such as ⟨l, x⟩ fit the same type.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::algebra::C64;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "TrigPolyRepr", into = "TrigPolyRepr")]
pub struct TrigPoly {
    dim: usize,
    modes: BTreeMap<Vec<i64>, C64>,
    linear: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModeRepr {
    k: Vec<i64>,
    c: [f64; 2],
}

#[derive(Serialize, Deserialize)]
struct TrigPolyRepr {
    dim: usize,
    #[serde(default)]
    modes: Vec<ModeRepr>,
    #[serde(default)]
    linear: Vec<f64>,
}

impl From<TrigPolyRepr> for TrigPoly {
    fn from(r: TrigPolyRepr) -> Self {
        let mut p = TrigPoly::zero(r.dim);
        for m in r.modes {
            p.add_mode(m.k, C64::new(m.c[0], m.c[1]));
        }
        if !r.linear.is_empty() {
            p.linear = r.linear;
        }
        p
    }
}

impl From<TrigPoly> for TrigPolyRepr {
    fn from(p: TrigPoly) -> Self {
        let modes = p.modes.into_iter().map(|(k, c)| ModeRepr { k, c: [c.re, c.im] }).collect();
        let linear = if p.linear.iter().all(|v| *v == 0.0) { Vec::new() } else { p.linear };
        TrigPolyRepr { dim: p.dim, modes, linear }
    }
}

fn dot_i(k: &[i64], x: &[f64]) -> f64 {
    k.iter().zip(x).map(|(a, b)| *a as f64 * b).sum()
}

fn dot_ic(k: &[i64], x: &[C64]) -> C64 {
    k.iter().zip(x).map(|(a, b)| *b * (*a as f64)).sum()
}

impl TrigPoly {
    pub fn zero(dim: usize) -> Self {
        Self { dim, modes: BTreeMap::new(), linear: vec![0.0; dim] }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        let mut p = Self::zero(dim);
        p.add_mode(vec![0; dim], c.into());
        p
    }

    /// amp · cos(2π⟨k, x⟩)
    pub fn cos_mode(k: &[i64], amp: f64) -> Self {
        let mut p = Self::zero(k.len());
        p.add_mode(k.to_vec(), (0.5 * amp).into());
        p.add_mode(k.iter().map(|v| -v).collect(), (0.5 * amp).into());
        p
    }

    /// amp · sin(2π⟨k, x⟩)
    pub fn sin_mode(k: &[i64], amp: f64) -> Self {
        let mut p = Self::zero(k.len());
        p.add_mode(k.to_vec(), C64::new(0.0, -0.5 * amp));
        p.add_mode(k.iter().map(|v| -v).collect(), C64::new(0.0, 0.5 * amp));
        p
    }

    /// ⟨l, x⟩
    pub fn linear(l: &[f64]) -> Self {
        let mut p = Self::zero(l.len());
        p.linear = l.to_vec();
        p
    }

    pub fn linear_int(l: &[i64]) -> Self {
        Self::linear(&l.iter().map(|v| *v as f64).collect::<Vec<_>>())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes(&self) -> impl Iterator<Item = (&Vec<i64>, &C64)> {
        self.modes.iter()
    }

    pub fn coeff(&self, k: &[i64]) -> C64 {
        self.modes.get(k).copied().unwrap_or_default()
    }

    pub fn linear_part(&self) -> &[f64] {
        &self.linear
    }

    pub fn add_mode(&mut self, k: Vec<i64>, c: C64) {
        assert_eq!(k.len(), self.dim, "mode dimension");
        let e = self.modes.entry(k).or_default();
        *e += c;
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.dim != dim || self.linear.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: self.dim });
        }
        Ok(())
    }

    /// c_{−k} = conj(c_k) on the stored support.
    pub fn is_real(&self) -> bool {
        self.modes.iter().all(|(k, c)| {
            let nk: Vec<i64> = k.iter().map(|v| -v).collect();
            (self.coeff(&nk) - c.conj()).norm() <= 1e-14 * (1.0 + c.norm())
        })
    }

    pub fn mean(&self) -> C64 {
        self.coeff(&vec![0; self.dim])
    }

    pub fn max_order(&self) -> i64 {
        self.modes.keys().flat_map(|k| k.iter().map(|v| v.abs())).max().unwrap_or(0)
    }

    pub fn add(&self, o: &TrigPoly) -> TrigPoly {
        assert_eq!(self.dim, o.dim);
        let mut p = self.clone();
        for (k, c) in &o.modes {
            p.add_mode(k.clone(), *c);
        }
        for (a, b) in p.linear.iter_mut().zip(&o.linear) {
            *a += b;
        }
        p
    }

    pub fn scale(&self, s: f64) -> TrigPoly {
        let mut p = self.clone();
        for c in p.modes.values_mut() {
            *c *= s;
        }
        for v in &mut p.linear {
            *v *= s;
        }
        p
    }

    /// Drops coefficients below `eps` in modulus.
    pub fn pruned(&self, eps: f64) -> TrigPoly {
        let mut p = self.clone();
        p.modes.retain(|_, c| c.norm() > eps);
        p
    }

    /// Keeps only modes with sup-norm order ≤ n.
    pub fn truncate(&self, n: i64) -> TrigPoly {
        let mut p = self.clone();
        p.modes.retain(|k, _| k.iter().all(|v| v.abs() <= n));
        p
    }

    /// Fejér (Cesàro) truncation of order n: weight Π(1 − |k_j|/(n+1)).
    pub fn fejer(&self, n: i64) -> TrigPoly {
        let mut p = self.truncate(n);
        for (k, c) in p.modes.iter_mut() {
            let w: f64 = k.iter().map(|v| 1.0 - v.abs() as f64 / (n + 1) as f64).product();
            *c *= w;
        }
        p
    }

    /// x ↦ p(x + s).
    pub fn shifted(&self, s: &[f64]) -> TrigPoly {
        let mut p = self.clone();
        for (k, c) in p.modes.iter_mut() {
            *c *= C64::from_polar(1.0, 2.0 * PI * dot_i(k, s));
        }
        let lin: f64 = self.linear.iter().zip(s).map(|(a, b)| a * b).sum();
        if lin != 0.0 {
            p.add_mode(vec![0; self.dim], lin.into());
        }
        p
    }

    pub fn eval(&self, x: &[C64]) -> C64 {
        let mut s = C64::new(0.0, 0.0);
        for (k, c) in &self.modes {
            s += c * (C64::i() * (2.0 * PI) * dot_ic(k, x)).exp();
        }
        for (l, xv) in self.linear.iter().zip(x) {
            s += xv * *l;
        }
        s
    }

    pub fn eval_real(&self, x: &[f64]) -> f64 {
        let xc: Vec<C64> = x.iter().map(|v| C64::from(*v)).collect();
        self.eval(&xc).re
    }

    /// Value and derivative along `v`.
    pub fn eval_jet(&self, x: &[C64], v: &[f64]) -> (C64, C64) {
        let mut s = C64::new(0.0, 0.0);
        let mut ds = C64::new(0.0, 0.0);
        for (k, c) in &self.modes {
            let e = c * (C64::i() * (2.0 * PI) * dot_ic(k, x)).exp();
            s += e;
            ds += e * C64::i() * (2.0 * PI * dot_i(k, v));
        }
        for ((l, xv), vv) in self.linear.iter().zip(x).zip(v) {
            s += xv * *l;
            ds += l * vv;
        }
        (s, ds)
    }

    /// Sup of |p| over real points whose linear-term range is [lo, hi].
    pub fn sup_bound(&self, lin_lo: f64, lin_hi: f64) -> f64 {
        let f: f64 = self.modes.values().map(|c| c.norm()).sum();
        f + lin_lo.abs().max(lin_hi.abs())
    }

    /// Sup of |∂_a p| on the real torus (Bernstein-type bound).
    pub fn d1_bound(&self, a: &[f64]) -> f64 {
        let f: f64 = self.modes.iter().map(|(k, c)| 2.0 * PI * dot_i(k, a).abs() * c.norm()).sum();
        let l: f64 = self.linear.iter().zip(a).map(|(x, y)| x * y).sum();
        f + l.abs()
    }

    /// Sup of |∂_a ∂_b p| on the real torus.
    pub fn d2_bound(&self, a: &[f64], b: &[f64]) -> f64 {
        self.modes
            .iter()
            .map(|(k, c)| 4.0 * PI * PI * (dot_i(k, a) * dot_i(k, b)).abs() * c.norm())
            .sum()
    }

    /// Range of the linear part over a box of intervals.
    pub fn linear_range(&self, bx: &[(f64, f64)]) -> (f64, f64) {
        let mut lo = 0.0;
        let mut hi = 0.0;
        for (l, (a, b)) in self.linear.iter().zip(bx) {
            let (u, v) = (l * a, l * b);
            lo += u.min(v);
            hi += u.max(v);
        }
        (lo, hi)
    }
}
