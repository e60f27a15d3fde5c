use crate::algebra::Mat2R;
use crate::error::{Error, Result};
use crate::trigpoly::TrigPoly;

use super::{Cocycle, CocycleExpr, Family, FamilyKind};

/// x ↦ R_{⟨l,x⟩}
pub fn rotation_model(l: &[i64]) -> CocycleExpr {
    CocycleExpr::Rot(TrigPoly::linear_int(l))
}

/// x ↦ diag(λ, 1/λ)·R_{⟨l,x⟩}
pub fn herman(lambda: f64, l: &[i64]) -> CocycleExpr {
    CocycleExpr::Product(vec![CocycleExpr::Const(Mat2R::diag(lambda)), rotation_model(l)])
}

fn j_matrix() -> Mat2R {
    Mat2R::new(0.0, -1.0, 1.0, 0.0)
}

/// x ↦ [[E − v(x), −1], [1, 0]]
pub fn schrodinger(v: &TrigPoly, e: f64) -> CocycleExpr {
    let q = TrigPoly::constant(v.dim(), e).add(&v.scale(-1.0));
    CocycleExpr::Product(vec![CocycleExpr::ShearU(q), CocycleExpr::Const(j_matrix())])
}

/// x ↦ exp(t·s(x))
pub fn exp_family(s1: &TrigPoly, s2: &TrigPoly, s3: &TrigPoly, t: f64) -> CocycleExpr {
    CocycleExpr::ExpSl2 { s1: s1.clone(), s2: s2.clone(), s3: s3.clone(), t }
}

fn embed(base: &CocycleExpr, d: usize, w: Option<&[f64]>) -> CocycleExpr {
    // child coordinates x_j (+ θ w_j), parent coordinates (x, θ) with θ last
    let matrix = (0..d)
        .map(|r| {
            let mut row = vec![0.0; d + 1];
            row[r] = 1.0;
            if let Some(w) = w {
                row[d] = w[r];
            }
            row
        })
        .collect();
    CocycleExpr::Reparam { matrix, offset: vec![0.0; d], child: Box::new(base.clone()) }
}

/// A_θ(x) = A(x + θw)
pub fn phase_shift(base: &Cocycle, w: &[f64]) -> Result<Family> {
    let d = base.dim();
    if w.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: w.len() });
    }
    Family::new(embed(&base.expr, d, Some(w)), base.alpha.clone(), d, FamilyKind::PhaseShift { w: w.to_vec() })
}

/// A_θ(x) = R_θ·A(x)
pub fn rot_twist(base: &Cocycle) -> Result<Family> {
    let d = base.dim();
    let mut e = vec![0.0; d + 1];
    e[d] = 1.0;
    let expr = CocycleExpr::Product(vec![CocycleExpr::Rot(TrigPoly::linear(&e)), embed(&base.expr, d, None)]);
    Family::new(expr, base.alpha.clone(), d, FamilyKind::RotTwist)
}

/// E ↦ (x ↦ [[E − v(x), −1], [1, 0]])
pub fn schrodinger_energy_family(v: &TrigPoly, alpha: &[f64]) -> Result<Family> {
    let d = v.dim();
    let mut e = vec![0.0; d + 1];
    e[d] = 1.0;
    let mut q = TrigPoly::linear(&e);
    for (k, c) in v.modes() {
        let mut kk = k.clone();
        kk.push(0);
        q.add_mode(kk, -c);
    }
    let mut vl = v.linear_part().to_vec();
    vl.push(0.0);
    q = q.add(&TrigPoly::linear(&vl).scale(-1.0));
    let expr = CocycleExpr::Product(vec![CocycleExpr::ShearU(q), CocycleExpr::Const(j_matrix())]);
    Family::new(expr, alpha.to_vec(), d, FamilyKind::General)
}

/// θ ↦ (x ↦ R_{⟨l,x⟩}·exp(t·s(⟨l,x⟩ − θ))) with s a function of one variable.
pub fn exp_twist_family(s1: &TrigPoly, s2: &TrigPoly, s3: &TrigPoly, l: &[i64], t: f64, alpha: &[f64]) -> Result<Family> {
    let d = l.len();
    if s1.dim() != 1 || s2.dim() != 1 || s3.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: s1.dim() });
    }
    let mut lin: Vec<f64> = l.iter().map(|v| *v as f64).collect();
    lin.push(0.0);
    let mut row = lin.clone();
    row[d] = -1.0;
    let expr = CocycleExpr::Product(vec![
        CocycleExpr::Rot(TrigPoly::linear(&lin)),
        CocycleExpr::Reparam { matrix: vec![row], offset: vec![0.0], child: Box::new(exp_family(s1, s2, s3, t)) },
    ]);
    Family::new(expr, alpha.to_vec(), d, FamilyKind::General)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::C64;
    use crate::cocycle::real_point;

    #[test]
    fn energy_family_matches_fixed_energy() {
        let v = TrigPoly::cos_mode(&[1], 2.0);
        let f = schrodinger_energy_family(&v, &[0.3]).unwrap();
        for e in [-1.0, 0.4] {
            let c = Cocycle::new(vec![0.3], schrodinger(&v, e)).unwrap();
            let a = f.eval(&real_point(&[0.17]), C64::from(e)).unwrap();
            assert!(a.max_abs_diff(&c.eval_real(&[0.17])) < 1e-14);
        }
    }

    #[test]
    fn exp_twist_family_value() {
        let s1 = TrigPoly::cos_mode(&[1], 1.0);
        let z = TrigPoly::zero(1);
        let f = exp_twist_family(&s1, &z, &z, &[1], 0.3, &[0.618]).unwrap();
        let (x, th) = (0.4, 0.15);
        let a = f.eval(&real_point(&[x]), C64::from(th)).unwrap();
        let e = 0.3 * (2.0 * std::f64::consts::PI * (x - th)).cos();
        let want = Mat2R::rotation(x).mul(&Mat2R::new(e.exp(), 0.0, 0.0, (-e).exp()));
        assert!(a.re().max_abs_diff(&want) < 1e-13);
    }
}
