//! Variation of the fibered rotation number along parameter paths.
//!
//! Orientation: projective angles increase under R_θ as θ increases, so the
//! R_θ loop has variation +1.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{arg_rev, disk_coords, mobius, tau_disk, Mat2C, C64};
use crate::cocycle::{real_point, Cocycle, Family};
use crate::error::{Error, Result};

/// Adaptive path refinement stops here.
pub const MAX_PATH_STEPS: usize = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotVariation {
    /// Real part: change of the fibered rotation number (revolutions).
    pub delta_rho: f64,
    /// Imaginary part: (L(start) − L(end)) / 2π.
    pub delta_l: f64,
    pub n: usize,
    pub path_steps: usize,
    /// Bound on the dependence on the starting disk points.
    pub tolerance: f64,
}

fn lift_along(gamma: &dyn Fn(f64) -> Result<Mat2C>, z0: C64, z1: C64, steps: usize) -> Result<C64> {
    let tau_at = |k: usize| -> Result<C64> {
        let t = k as f64 / steps as f64;
        let m = disk_coords(&gamma(t)?);
        tau_disk(&m, z0 + (z1 - z0) * t)
    };
    let first = tau_at(0)?;
    let mut prev = first;
    let mut re = 0.0;
    for k in 1..=steps {
        let cur = tau_at(k)?;
        let step = arg_rev(cur / prev);
        if step.abs() >= crate::algebra::UNWRAP_LIMIT {
            return Err(Error::UnwrapStep { index: k, jump: step });
        }
        re += step;
        prev = cur;
    }
    let im = -(prev.norm().ln() - first.norm().ln()) / (2.0 * PI);
    Ok(C64::new(re, im))
}

/// δτ̂ = τ̂(γ(1), z1) − τ̂(γ(0), z0), lifted along the path; `gamma` returns
/// matrices in the original coordinates. Steps double on phase jumps, and a
/// lift is accepted only once doubling the steps no longer changes it (lifts at
/// different resolutions can only disagree by whole revolutions).
pub fn delta_xi(gamma: &dyn Fn(f64) -> Result<Mat2C>, z0: C64, z1: C64, steps: usize) -> Result<(C64, usize)> {
    let mut s = steps.max(1);
    let mut prev: Option<C64> = None;
    loop {
        match lift_along(gamma, z0, z1, s) {
            Err(Error::UnwrapStep { .. }) if s < MAX_PATH_STEPS => {}
            Err(e) => return Err(e),
            Ok(v) => {
                if let Some(p) = prev {
                    if (p.re - v.re).abs() < 0.5 {
                        return Ok((v, s / 2));
                    }
                }
                if s >= MAX_PATH_STEPS {
                    return Ok((v, s));
                }
                prev = Some(v);
            }
        }
        s *= 2;
    }
}

/// Birkhoff average of δτ̂ over the first n fibers of the orbit of x0, for the
/// straight parameter path θa → θb.
pub fn variation_rho(f: &Family, theta_a: C64, theta_b: C64, x0: &[f64], n: usize, steps: usize) -> Result<RotVariation> {
    let n = n.max(1);
    let ext = f.extended();
    // fibers and the starting disk points at each end of the path
    let mut fibers = Vec::with_capacity(n);
    let mut x = real_point(x0);
    let (mut za, mut zb) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
    for _ in 0..n {
        fibers.push((x.clone(), za, zb));
        za = mobius(&disk_coords(&f.eval(&x, theta_a)?), za);
        zb = mobius(&disk_coords(&f.eval(&x, theta_b)?), zb);
        x = ext.translate(&f.point(&x, C64::from(0.0)), 1.0);
        x.remove(f.param);
    }
    let parts: Vec<Result<(C64, usize)>> = fibers
        .par_iter()
        .map(|(x, za, zb)| {
            let gamma = |t: f64| f.eval(x, theta_a + (theta_b - theta_a) * t);
            delta_xi(&gamma, *za, *zb, steps)
        })
        .collect();
    let mut total = C64::new(0.0, 0.0);
    let mut used = 0;
    for p in parts {
        let (v, s) = p?;
        total += v;
        used = used.max(s);
    }
    total /= n as f64;
    Ok(RotVariation { delta_rho: total.re, delta_l: total.im, n, path_steps: used, tolerance: 1.0 / n as f64 })
}

/// Lifted profile (θ, ρ(θ) − ρ(θ₀)) glued from consecutive variations.
pub fn rho_profile(f: &Family, thetas: &[f64], x0: &[f64], n: usize, steps: usize) -> Result<Vec<(f64, f64)>> {
    let segs: Vec<Result<RotVariation>> = thetas
        .par_windows(2)
        .map(|w| variation_rho(f, C64::from(w[0]), C64::from(w[1]), x0, n, steps))
        .collect();
    let mut out = Vec::with_capacity(thetas.len());
    let mut acc = 0.0;
    if let Some(&t0) = thetas.first() {
        out.push((t0, 0.0));
    }
    for (w, s) in thetas.windows(2).zip(segs) {
        acc += s?.delta_rho;
        out.push((w[1], acc));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberedRotation {
    /// Rotation number in [0, 1).
    pub rho: f64,
    /// Raw mean of principal angle increments.
    pub slope: f64,
}

/// Mean angular increment of the orbit of (x0, (1, 0)).
pub fn fibered_rotation_number(c: &Cocycle, x0: &[f64], n: usize) -> FiberedRotation {
    let mut x = real_point(x0);
    let mut v = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    let mut total = 0.0;
    for _ in 0..n {
        let a = c.expr.eval(&x);
        let w = a.apply(v);
        let before = C64::new(v[0].re, v[1].re);
        let after = C64::new(w[0].re, w[1].re);
        total += arg_rev(after / before);
        let r = after.norm();
        v = [C64::from(after.re / r), C64::from(after.im / r)];
        for (xi, ai) in x.iter_mut().zip(&c.alpha) {
            *xi += ai;
        }
    }
    let slope = total / n as f64;
    FiberedRotation { rho: slope.rem_euclid(1.0), slope }
}

/// Least-squares line (slope, intercept, max residual).
pub fn affine_fit(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let icpt = my - slope * mx;
    let res = pts.iter().map(|p| (p.1 - slope * p.0 - icpt).abs()).fold(0.0, f64::max);
    (slope, icpt, res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Mat2R;
    use crate::cocycle::{herman, phase_shift, rot_twist, rotation_model, CocycleExpr, FamilyKind};
    use crate::trigpoly::TrigPoly;
    use crate::GOLDEN;

    #[test]
    fn delta_xi_examples() {
        let id = |_t: f64| Ok(Mat2C::IDENTITY);
        let z = C64::new(0.3, 0.2);
        assert_eq!(delta_xi(&id, z, z, 8).unwrap().0, C64::new(0.0, 0.0));
        let th = 2.3;
        let rot = |t: f64| Ok(Mat2R::rotation(t * th).to_complex());
        let (v, _) = delta_xi(&rot, z, z, 4).unwrap();
        assert!((v.re - th).abs() < 1e-12 && v.im.abs() < 1e-12, "{v}");
        // a contracting path with two different z-interpolations
        let path = |t: f64| {
            let th = C64::new(0.7 * t, -0.05 - 0.1 * t);
            Ok(Mat2C::rotation(th) * Mat2R::new(1.5, 0.3, 0.2, (1.0 + 0.06) / 1.5).to_complex())
        };
        let (a, b) = (C64::new(0.2, -0.5), C64::new(-0.6, 0.1));
        let (d1, _) = delta_xi(&path, a, b, 64).unwrap();
        let bent = |t: f64| path(t);
        let mid = C64::new(0.1, 0.6);
        let (p1, _) = delta_xi(&|t| bent(0.5 * t), a, mid, 64).unwrap();
        let (p2, _) = delta_xi(&|t| bent(0.5 + 0.5 * t), mid, b, 64).unwrap();
        assert!((d1 - p1 - p2).norm() < 1e-9);
    }

    #[test]
    fn rot_twist_loop_has_degree_one() {
        for base in [herman(2.0, &[1]), rotation_model(&[3]), CocycleExpr::Const(Mat2R::diag(5.0))] {
            let c = Cocycle::new(vec![GOLDEN], base).unwrap();
            let f = rot_twist(&c).unwrap();
            let n = 500;
            let v = variation_rho(&f, C64::from(0.0), C64::from(1.0), &[0.1], n, 64).unwrap();
            assert!((v.delta_rho - 1.0).abs() < 2.0 / n as f64, "{}", v.delta_rho);
        }
    }

    #[test]
    fn phase_shift_on_rotation_model() {
        let alpha = vec![GOLDEN, crate::SILVER];
        let c = Cocycle::new(alpha, rotation_model(&[2, -1])).unwrap();
        let f = phase_shift(&c, &[1.0, 3.0]).unwrap();
        let n = 400;
        let v = variation_rho(&f, C64::from(0.0), C64::from(1.0), &[0.0, 0.0], n, 64).unwrap();
        assert!((v.delta_rho - (-1.0)).abs() < 2.0 / n as f64);
        assert!(matches!(f.kind, FamilyKind::PhaseShift { .. }));
    }

    #[test]
    fn constant_family_has_no_variation() {
        let c = Cocycle::new(vec![GOLDEN], herman(2.0, &[1])).unwrap();
        let f = phase_shift(&c, &[0.0]).unwrap();
        let v = variation_rho(&f, C64::from(0.0), C64::from(1.0), &[0.3], 200, 16).unwrap();
        assert!(v.delta_rho.abs() < 1e-9 && v.delta_l.abs() < 1e-9);
    }

    #[test]
    fn concatenation() {
        let v = TrigPoly::cos_mode(&[1], 0.4);
        let base = Cocycle::new(vec![GOLDEN], CocycleExpr::Product(vec![herman(1.5, &[1]), CocycleExpr::Rot(v)])).unwrap();
        let f = rot_twist(&base).unwrap();
        let n = 300;
        let ab = variation_rho(&f, C64::from(0.0), C64::from(0.3), &[0.2], n, 64).unwrap();
        let bc = variation_rho(&f, C64::from(0.3), C64::from(0.8), &[0.2], n, 64).unwrap();
        let ac = variation_rho(&f, C64::from(0.0), C64::from(0.8), &[0.2], n, 64).unwrap();
        assert!((ab.delta_rho + bc.delta_rho - ac.delta_rho).abs() < 3.0 / n as f64);
    }

    #[test]
    fn profiles() {
        let c = Cocycle::new(vec![GOLDEN], rotation_model(&[1])).unwrap();
        let f = phase_shift(&c, &[1.0]).unwrap();
        let thetas: Vec<f64> = (0..32).map(|k| k as f64 / 31.0).collect();
        let n = 200;
        let prof = rho_profile(&f, &thetas, &[0.0], n, 32).unwrap();
        let (slope, _, res) = affine_fit(&prof);
        assert!(res <= 2.0 / n as f64);
        assert!((slope - 1.0).abs() < 2.0 / n as f64);

        let id = Cocycle::new(vec![GOLDEN], CocycleExpr::Const(Mat2R::IDENTITY)).unwrap();
        let f = rot_twist(&id).unwrap();
        let prof = rho_profile(&f, &thetas, &[0.0], 50, 8).unwrap();
        for (th, r) in prof {
            assert!((r - th).abs() < 1e-8);
        }

        let h = Cocycle::new(vec![GOLDEN], herman(2.0, &[1])).unwrap();
        let f = rot_twist(&h).unwrap();
        let prof = rho_profile(&f, &thetas, &[0.0], 300, 32).unwrap();
        for w in prof.windows(2) {
            assert!(w[1].1 >= w[0].1 - 2.0 / 300.0);
        }
    }

    #[test]
    fn rotation_numbers() {
        let c = Cocycle::new(vec![GOLDEN], CocycleExpr::Rot(TrigPoly::constant(1, 0.27))).unwrap();
        assert!((fibered_rotation_number(&c, &[0.0], 1000).rho - 0.27).abs() < 1e-10);
        let n = 2000;
        let h = Cocycle::new(vec![GOLDEN], CocycleExpr::Const(Mat2R::diag(2.0))).unwrap();
        assert!(fibered_rotation_number(&h, &[0.0], n).rho.abs() < 2.0 / n as f64);
        let r = Cocycle::new(vec![GOLDEN], rotation_model(&[1])).unwrap();
        let vals: Vec<f64> = (0..16).map(|k| fibered_rotation_number(&r, &[k as f64 / 16.0], n).slope).collect();
        let mean = vals.iter().sum::<f64>() / 16.0;
        for v in vals {
            assert!((v - mean).abs() < 2.0 / n as f64);
        }
    }
}
