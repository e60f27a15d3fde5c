use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::algebra::{Mat2C, Mat2R, C64};
use crate::error::{Error, Result};
use crate::trigpoly::TrigPoly;

/// Expression tree for a map from the d-torus (or its complexification)
/// into SL(2). Every node is entire in x.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CocycleExpr {
    /// R_{φ(x)}, rotation by φ(x) revolutions.
    Rot(TrigPoly),
    /// diag(e^{p(x)}, e^{−p(x)})
    DiagExp(TrigPoly),
    /// [[1, q(x)], [0, 1]]
    ShearU(TrigPoly),
    /// [[1, 0], [q(x), 1]]
    ShearL(TrigPoly),
    Const(Mat2R),
    /// exp(t·s(x)) with s = [[s1, s2+s3], [s2−s3, −s1]].
    ExpSl2 { s1: TrigPoly, s2: TrigPoly, s3: TrigPoly, t: f64 },
    /// Ordered product: the first child is leftmost.
    Product(Vec<CocycleExpr>),
    /// child(x + offset)
    Shift { offset: Vec<f64>, child: Box<CocycleExpr> },
    /// child(L x + offset), with L given by rows (child dim × parent dim).
    Reparam { matrix: Vec<Vec<f64>>, offset: Vec<f64>, child: Box<CocycleExpr> },
    /// child(x)⁻¹
    Inverse(Box<CocycleExpr>),
}

fn jmat() -> Mat2C {
    Mat2R::new(0.0, -1.0, 1.0, 0.0).to_complex()
}

/// cosh(√w) and sinh(√w)/√w, both entire in w.
fn exp_coeffs(w: C64) -> (C64, C64) {
    if w.norm() < 1e-3 {
        let w2 = w * w;
        let c = 1.0 + w / 2.0 + w2 / 24.0 + w2 * w / 720.0 + w2 * w2 / 40320.0;
        let s = 1.0 + w / 6.0 + w2 / 120.0 + w2 * w / 5040.0 + w2 * w2 / 362880.0;
        (c, s)
    } else {
        let r = w.sqrt();
        (r.cosh(), r.sinh() / r)
    }
}

/// d/dw of sinh(√w)/√w.
fn exp_coeff_ds(w: C64, c: C64, s: C64) -> C64 {
    if w.norm() < 1e-3 {
        let w2 = w * w;
        1.0 / 6.0 + w / 60.0 + w2 / 1680.0 + w2 * w / 90720.0
    } else {
        (c - s) / (w * 2.0)
    }
}

fn sl2_gen(s1: C64, s2: C64, s3: C64) -> Mat2C {
    Mat2C::new(s1, s2 + s3, s2 - s3, -s1)
}

fn map_point(matrix: &[Vec<f64>], offset: &[f64], x: &[C64]) -> Vec<C64> {
    matrix
        .iter()
        .zip(offset)
        .map(|(row, o)| row.iter().zip(x).map(|(l, xv)| xv * *l).sum::<C64>() + o)
        .collect()
}

fn map_dir(matrix: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    matrix.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

fn map_box(matrix: &[Vec<f64>], offset: &[f64], bx: &[(f64, f64)]) -> Vec<(f64, f64)> {
    matrix
        .iter()
        .zip(offset)
        .map(|(row, o)| {
            let mut lo = *o;
            let mut hi = *o;
            for (l, (a, b)) in row.iter().zip(bx) {
                let (u, v) = (l * a, l * b);
                lo += u.min(v);
                hi += u.max(v);
            }
            (lo, hi)
        })
        .collect()
}

/// Sup-norm bounds for a node over a real box: value, first derivatives along
/// each listed direction, and mixed second derivatives ∂_a ∂_v with the
/// distinguished direction v.
#[derive(Clone, Debug)]
pub struct NodeBound {
    pub n0: f64,
    pub n1: Vec<f64>,
    pub n1v: f64,
    pub n2: Vec<f64>,
}

impl CocycleExpr {
    pub fn product(children: Vec<CocycleExpr>) -> Self {
        CocycleExpr::Product(children)
    }

    pub fn shift(self, offset: Vec<f64>) -> Self {
        CocycleExpr::Shift { offset, child: Box::new(self) }
    }

    pub fn inverse(self) -> Self {
        CocycleExpr::Inverse(Box::new(self))
    }

    /// The dimension the node expects its argument to have, if it can tell.
    pub fn dim(&self) -> Option<usize> {
        match self {
            CocycleExpr::Rot(p) | CocycleExpr::DiagExp(p) | CocycleExpr::ShearU(p) | CocycleExpr::ShearL(p) => {
                Some(p.dim())
            }
            CocycleExpr::ExpSl2 { s1, .. } => Some(s1.dim()),
            CocycleExpr::Const(_) => None,
            CocycleExpr::Product(ch) => ch.iter().find_map(|c| c.dim()),
            CocycleExpr::Shift { offset, .. } => Some(offset.len()),
            CocycleExpr::Reparam { matrix, .. } => matrix.first().map(|r| r.len()),
            CocycleExpr::Inverse(c) => c.dim(),
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let mism = |got: usize| Error::DimensionMismatch { expected: dim, got };
        match self {
            CocycleExpr::Rot(p) | CocycleExpr::DiagExp(p) | CocycleExpr::ShearU(p) | CocycleExpr::ShearL(p) => {
                p.validate(dim)
            }
            CocycleExpr::ExpSl2 { s1, s2, s3, t } => {
                if !t.is_finite() {
                    return Err(Error::InvalidArgument("non-finite scale".into()));
                }
                s1.validate(dim)?;
                s2.validate(dim)?;
                s3.validate(dim)
            }
            CocycleExpr::Const(m) => {
                if (m.det() - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidArgument(format!("constant has det {}", m.det())));
                }
                Ok(())
            }
            CocycleExpr::Product(ch) => ch.iter().try_for_each(|c| c.validate(dim)),
            CocycleExpr::Shift { offset, child } => {
                if offset.len() != dim {
                    return Err(mism(offset.len()));
                }
                child.validate(dim)
            }
            CocycleExpr::Reparam { matrix, offset, child } => {
                if matrix.len() != offset.len() {
                    return Err(Error::InvalidArgument("reparam rows and offset differ".into()));
                }
                if let Some(r) = matrix.iter().find(|r| r.len() != dim) {
                    return Err(mism(r.len()));
                }
                child.validate(matrix.len())
            }
            CocycleExpr::Inverse(c) => c.validate(dim),
        }
    }

    pub fn eval(&self, x: &[C64]) -> Mat2C {
        match self {
            CocycleExpr::Rot(p) => Mat2C::rotation(p.eval(x)),
            CocycleExpr::DiagExp(p) => {
                let e = p.eval(x).exp();
                Mat2C::diag(e, e.inv())
            }
            CocycleExpr::ShearU(q) => {
                let mut m = Mat2C::IDENTITY;
                m.b = q.eval(x);
                m
            }
            CocycleExpr::ShearL(q) => {
                let mut m = Mat2C::IDENTITY;
                m.c = q.eval(x);
                m
            }
            CocycleExpr::Const(m) => m.to_complex(),
            CocycleExpr::ExpSl2 { s1, s2, s3, t } => {
                let xm = sl2_gen(s1.eval(x), s2.eval(x), s3.eval(x)).scale_re(*t);
                let (c, s) = exp_coeffs(-xm.det());
                Mat2C::IDENTITY.scale(c) + xm.scale(s)
            }
            CocycleExpr::Product(ch) => ch.iter().fold(Mat2C::IDENTITY, |acc, c| acc * c.eval(x)),
            CocycleExpr::Shift { offset, child } => {
                let y: Vec<C64> = x.iter().zip(offset).map(|(a, o)| a + o).collect();
                child.eval(&y)
            }
            CocycleExpr::Reparam { matrix, offset, child } => child.eval(&map_point(matrix, offset, x)),
            CocycleExpr::Inverse(c) => c.eval(x).adjugate(),
        }
    }

    /// Value and exact derivative along the real direction `v`.
    pub fn jet(&self, x: &[C64], v: &[f64]) -> (Mat2C, Mat2C) {
        match self {
            CocycleExpr::Rot(p) => {
                let (phi, dphi) = p.eval_jet(x, v);
                let r = Mat2C::rotation(phi);
                (r, (jmat() * r).scale(dphi * (2.0 * PI)))
            }
            CocycleExpr::DiagExp(p) => {
                let (q, dq) = p.eval_jet(x, v);
                let e = q.exp();
                let ei = e.inv();
                (Mat2C::diag(e, ei), Mat2C::diag(e * dq, -ei * dq))
            }
            CocycleExpr::ShearU(q) => {
                let (val, d) = q.eval_jet(x, v);
                let mut m = Mat2C::IDENTITY;
                m.b = val;
                let mut dm = Mat2C::ZERO;
                dm.b = d;
                (m, dm)
            }
            CocycleExpr::ShearL(q) => {
                let (val, d) = q.eval_jet(x, v);
                let mut m = Mat2C::IDENTITY;
                m.c = val;
                let mut dm = Mat2C::ZERO;
                dm.c = d;
                (m, dm)
            }
            CocycleExpr::Const(m) => (m.to_complex(), Mat2C::ZERO),
            CocycleExpr::ExpSl2 { s1, s2, s3, t } => {
                let (a1, d1) = s1.eval_jet(x, v);
                let (a2, d2) = s2.eval_jet(x, v);
                let (a3, d3) = s3.eval_jet(x, v);
                let xm = sl2_gen(a1, a2, a3).scale_re(*t);
                let ym = sl2_gen(d1, d2, d3).scale_re(*t);
                let w = -xm.det();
                let (c, s) = exp_coeffs(w);
                let ds = exp_coeff_ds(w, c, s);
                // w' = −tr(adj(X)·Y)
                let dw = -(xm.adjugate() * ym).trace();
                let val = Mat2C::IDENTITY.scale(c) + xm.scale(s);
                let der = Mat2C::IDENTITY.scale(s * 0.5 * dw) + xm.scale(ds * dw) + ym.scale(s);
                (val, der)
            }
            CocycleExpr::Product(ch) => {
                let mut m = Mat2C::IDENTITY;
                let mut dm = Mat2C::ZERO;
                for c in ch {
                    let (cm, cd) = c.jet(x, v);
                    dm = dm * cm + m * cd;
                    m = m * cm;
                }
                (m, dm)
            }
            CocycleExpr::Shift { offset, child } => {
                let y: Vec<C64> = x.iter().zip(offset).map(|(a, o)| a + o).collect();
                child.jet(&y, v)
            }
            CocycleExpr::Reparam { matrix, offset, child } => {
                child.jet(&map_point(matrix, offset, x), &map_dir(matrix, v))
            }
            CocycleExpr::Inverse(c) => {
                let (m, d) = c.jet(x, v);
                (m.adjugate(), d.adjugate())
            }
        }
    }

    /// Sound sup-norm bounds over real points in the box `bx`.
    pub fn bounds(&self, bx: &[(f64, f64)], dirs: &[Vec<f64>], v: &[f64]) -> NodeBound {
        let nd = dirs.len();
        match self {
            CocycleExpr::Rot(p) => {
                let b1v = p.d1_bound(v);
                NodeBound {
                    n0: 1.0,
                    n1: dirs.iter().map(|a| 2.0 * PI * p.d1_bound(a)).collect(),
                    n1v: 2.0 * PI * b1v,
                    n2: dirs
                        .iter()
                        .map(|a| 2.0 * PI * p.d2_bound(a, v) + 4.0 * PI * PI * p.d1_bound(a) * b1v)
                        .collect(),
                }
            }
            CocycleExpr::DiagExp(p) => {
                let (lo, hi) = p.linear_range(bx);
                let e = p.sup_bound(lo, hi).exp();
                let b1v = p.d1_bound(v);
                NodeBound {
                    n0: e,
                    n1: dirs.iter().map(|a| p.d1_bound(a) * e).collect(),
                    n1v: b1v * e,
                    n2: dirs.iter().map(|a| (p.d2_bound(a, v) + p.d1_bound(a) * b1v) * e).collect(),
                }
            }
            CocycleExpr::ShearU(q) | CocycleExpr::ShearL(q) => {
                let (lo, hi) = q.linear_range(bx);
                NodeBound {
                    n0: 1.0 + q.sup_bound(lo, hi),
                    n1: dirs.iter().map(|a| q.d1_bound(a)).collect(),
                    n1v: q.d1_bound(v),
                    n2: dirs.iter().map(|a| q.d2_bound(a, v)).collect(),
                }
            }
            CocycleExpr::Const(m) => NodeBound { n0: m.norm(), n1: vec![0.0; nd], n1v: 0.0, n2: vec![0.0; nd] },
            CocycleExpr::ExpSl2 { s1, s2, s3, t } => {
                let ss = [s1, s2, s3];
                let at = t.abs();
                let sup: f64 = ss
                    .iter()
                    .map(|p| {
                        let (lo, hi) = p.linear_range(bx);
                        p.sup_bound(lo, hi)
                    })
                    .sum();
                let e = (at * sup).exp();
                let d1 = |a: &[f64]| at * ss.iter().map(|p| p.d1_bound(a)).sum::<f64>();
                let d2 = |a: &[f64]| at * ss.iter().map(|p| p.d2_bound(a, v)).sum::<f64>();
                let y1v = d1(v);
                NodeBound {
                    n0: e,
                    n1: dirs.iter().map(|a| d1(a) * e).collect(),
                    n1v: y1v * e,
                    n2: dirs.iter().map(|a| (d2(a) + d1(a) * y1v) * e).collect(),
                }
            }
            CocycleExpr::Product(ch) => {
                let bs: Vec<NodeBound> = ch.iter().map(|c| c.bounds(bx, dirs, v)).collect();
                let k = bs.len();
                let prod_except = |skip: &[usize]| -> f64 {
                    (0..k).filter(|i| !skip.contains(i)).map(|i| bs[i].n0).product()
                };
                let n0 = prod_except(&[]);
                let n1v = (0..k).map(|i| bs[i].n1v * prod_except(&[i])).sum();
                let mut n1 = vec![0.0; nd];
                let mut n2 = vec![0.0; nd];
                for j in 0..nd {
                    for i in 0..k {
                        n1[j] += bs[i].n1[j] * prod_except(&[i]);
                        n2[j] += bs[i].n2[j] * prod_except(&[i]);
                        for l in 0..k {
                            if l != i {
                                n2[j] += bs[i].n1[j] * bs[l].n1v * prod_except(&[i, l]);
                            }
                        }
                    }
                }
                NodeBound { n0, n1, n1v, n2 }
            }
            CocycleExpr::Shift { offset, child } => {
                let b: Vec<(f64, f64)> = bx.iter().zip(offset).map(|((a, c), o)| (a + o, c + o)).collect();
                child.bounds(&b, dirs, v)
            }
            CocycleExpr::Reparam { matrix, offset, child } => {
                let b = map_box(matrix, offset, bx);
                let d: Vec<Vec<f64>> = dirs.iter().map(|a| map_dir(matrix, a)).collect();
                child.bounds(&b, &d, &map_dir(matrix, v))
            }
            CocycleExpr::Inverse(c) => c.bounds(bx, dirs, v),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_tree() -> CocycleExpr {
        let p = TrigPoly::cos_mode(&[1, 0], 0.3).add(&TrigPoly::linear(&[1.0, 0.0]));
        let q = TrigPoly::sin_mode(&[0, 1], 0.5).add(&TrigPoly::constant(2, 0.2));
        CocycleExpr::Product(vec![
            CocycleExpr::Rot(p),
            CocycleExpr::DiagExp(q.clone()),
            CocycleExpr::ShearU(q.clone()).shift(vec![0.1, 0.2]),
            CocycleExpr::ExpSl2 {
                s1: TrigPoly::cos_mode(&[1, 1], 1.0),
                s2: TrigPoly::sin_mode(&[1, 0], 0.5),
                s3: TrigPoly::constant(2, 0.3),
                t: 0.7,
            },
            CocycleExpr::ShearL(q).inverse(),
            CocycleExpr::Reparam {
                matrix: vec![vec![2.0, 1.0]],
                offset: vec![0.05],
                child: Box::new(CocycleExpr::Rot(TrigPoly::sin_mode(&[1], 0.2))),
            },
        ])
    }

    fn pt(a: f64, b: f64, c: f64, d: f64) -> Vec<C64> {
        vec![C64::new(a, b), C64::new(c, d)]
    }

    #[test]
    fn real_eval_is_real_unimodular() {
        let e = sample_tree();
        e.validate(2).unwrap();
        for x in [[0.1, 0.2], [0.77, 0.31], [0.5, 0.9]] {
            let m = e.eval(&pt(x[0], 0.0, x[1], 0.0));
            assert!(m.max_imag() < 1e-14);
            assert!((m.det() - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn exp_of_small_and_large_generators() {
        for t in [1e-5, 0.01, 0.3, 2.0] {
            let e = CocycleExpr::ExpSl2 {
                s1: TrigPoly::cos_mode(&[1], 1.0),
                s2: TrigPoly::zero(1),
                s3: TrigPoly::zero(1),
                t,
            };
            let x = [C64::new(0.1, 0.0)];
            let m = e.eval(&x);
            let s = (2.0 * PI * 0.1).cos() * t;
            assert!((m.a.re - s.exp()).abs() < 1e-13 * s.exp());
            assert!((m.d.re - (-s).exp()).abs() < 1e-13 * s.exp());
            // rotation generator
            let r = CocycleExpr::ExpSl2 {
                s1: TrigPoly::zero(1),
                s2: TrigPoly::zero(1),
                s3: TrigPoly::constant(1, 1.0),
                t,
            };
            let want = Mat2C::rotation(C64::from(-t / (2.0 * PI)));
            assert!(r.eval(&x).max_abs_diff(&want) < 1e-13);
        }
    }

    #[test]
    fn jet_matches_finite_differences() {
        let e = sample_tree();
        let x = pt(0.3, 0.02, 0.6, -0.01);
        let v = [0.7, -0.4];
        let h = 1e-5;
        let xp: Vec<C64> = x.iter().zip(&v).map(|(a, b)| a + b * h).collect();
        let xm: Vec<C64> = x.iter().zip(&v).map(|(a, b)| a - b * h).collect();
        let fd = (e.eval(&xp) - e.eval(&xm)).scale_re(0.5 / h);
        let (m, d) = e.jet(&x, &v);
        assert!(m.max_abs_diff(&e.eval(&x)) < 1e-14);
        assert!(d.max_abs_diff(&fd) < 1e-6 * (1.0 + d.max_entry()), "{:?} vs {:?}", d, fd);
    }

    #[test]
    fn holomorphic_by_cauchy_riemann() {
        // 8th-order central differences in the real and imaginary directions
        let e = sample_tree();
        let x = pt(0.4, 0.03, 0.15, 0.0);
        let h = 1e-3;
        let w = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
        let diff = |dir: C64| -> Mat2C {
            let mut acc = Mat2C::ZERO;
            for (k, wk) in w.iter().enumerate() {
                let s = (k + 1) as f64 * h;
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[0] += dir * s;
                xm[0] -= dir * s;
                acc = acc + (e.eval(&xp) - e.eval(&xm)).scale_re(*wk / h);
            }
            acc
        };
        let dx = diff(C64::new(1.0, 0.0));
        let dy = diff(C64::new(0.0, 1.0));
        // ∂_y f = i ∂_x f for holomorphic f
        let res = (dy - dx.scale(C64::i())).max_entry();
        assert!(res < 1e-6, "{res}");
    }

    #[test]
    fn bounds_dominate_samples() {
        let e = sample_tree();
        let bx = vec![(0.0, 1.0), (0.0, 1.0)];
        let dirs = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let v = vec![1.0, 0.0];
        let b = e.bounds(&bx, &dirs, &v);
        let h = 1e-5;
        for i in 0..40 {
            for j in 0..40 {
                let x = pt(i as f64 / 40.0, 0.0, j as f64 / 40.0, 0.0);
                let (m, d) = e.jet(&x, &v);
                assert!(m.norm() <= b.n0 * (1.0 + 1e-12));
                assert!(d.norm() <= b.n1v * (1.0 + 1e-12));
                for (k, a) in dirs.iter().enumerate() {
                    let xp: Vec<C64> = x.iter().zip(a).map(|(p, q)| p + q * h).collect();
                    let (_, dp) = e.jet(&xp, &v);
                    let second = (dp - d).scale_re(1.0 / h).norm();
                    assert!(second <= b.n2[k] * 1.01 + 1e-6);
                    assert!(e.jet(&x, a).1.norm() <= b.n1[k] * (1.0 + 1e-12));
                }
            }
        }
    }
}
