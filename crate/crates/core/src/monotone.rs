//! Monotonicity certificates: the angular speed ∂_θ arg(A_θ(x)·y) in radians
//! per unit parameter, scanned on grids and certified with a Lipschitz margin.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{Mat2C, C64};
use crate::cocycle::{phase_shift, real_point, Cocycle, Family};
use crate::error::{Error, Result};
use crate::grid::TorusGrid;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: Vec<f64>,
    /// Direction of y = (cos φ, sin φ), φ in radians.
    pub phi: f64,
    pub theta: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    /// Signed extremum nearest zero: the minimum for increasing families, the
    /// maximum for decreasing ones, and the minimum when the sign changes.
    pub epsilon: f64,
    pub min_value: f64,
    pub max_value: f64,
    pub argmin: Witness,
    pub argmax: Witness,
    pub x_sizes: Vec<usize>,
    pub theta_size: usize,
    /// Largest possible deviation between a grid value and an off-grid value.
    pub margin: f64,
    pub certified: bool,
}

/// Angular speed of the vector A·y when A moves with velocity dA.
pub fn angular_speed(a: &Mat2C, da: &Mat2C, phi: f64) -> f64 {
    let y = [C64::from(phi.cos()), C64::from(phi.sin())];
    let u = a.apply(y);
    let du = da.apply(y);
    let (u0, u1, d0, d1) = (u[0].re, u[1].re, du[0].re, du[1].re);
    (u0 * d1 - u1 * d0) / (u0 * u0 + u1 * u1)
}

/// Exact extremes over all directions y of the angular speed, as
/// ((min, φ_min), (max, φ_max)). The speed is the Rayleigh quotient
/// yᵀPy / yᵀQy with Q = AᵀA and P the symmetric part of AᵀJᵀA′.
pub fn speed_extremes(a: &Mat2C, da: &Mat2C) -> ((f64, f64), (f64, f64)) {
    let (a, d) = (a.re(), da.re());
    // N = Aᵀ Jᵀ A′ with Jᵀ = [[0, 1], [−1, 0]]
    let jt_d = [[d.c, d.d], [-d.a, -d.b]];
    let n = [
        [a.a * jt_d[0][0] + a.c * jt_d[1][0], a.a * jt_d[0][1] + a.c * jt_d[1][1]],
        [a.b * jt_d[0][0] + a.d * jt_d[1][0], a.b * jt_d[0][1] + a.d * jt_d[1][1]],
    ];
    let p = [n[0][0], 0.5 * (n[0][1] + n[1][0]), n[1][1]];
    let q = [a.a * a.a + a.c * a.c, a.a * a.b + a.c * a.d, a.b * a.b + a.d * a.d];
    // eigenvalues of Q⁻¹P, written to avoid cancellation near a double root
    let det_q = q[0] * q[2] - q[1] * q[1];
    let m11 = (q[2] * p[0] - q[1] * p[1]) / det_q;
    let m12 = (q[2] * p[1] - q[1] * p[2]) / det_q;
    let m21 = (q[0] * p[1] - q[1] * p[0]) / det_q;
    let m22 = (q[0] * p[2] - q[1] * p[1]) / det_q;
    let half = 0.5 * (m11 + m22);
    let rad = (0.25 * (m11 - m22).powi(2) + m12 * m21).max(0.0).sqrt();
    let (l1, l2) = (half - rad, half + rad);
    let (lo, hi) = (l1.min(l2), l1.max(l2));
    let dir = |l: f64| -> f64 {
        let r0 = (p[0] - l * q[0], p[1] - l * q[1]);
        let r1 = (p[1] - l * q[1], p[2] - l * q[2]);
        let r = if r0.0.hypot(r0.1) >= r1.0.hypot(r1.1) { r0 } else { r1 };
        if r.0 == 0.0 && r.1 == 0.0 {
            return 0.0;
        }
        r.0.atan2(-r.1).rem_euclid(PI)
    };
    ((lo, dir(lo)), (hi, dir(hi)))
}

fn lipschitz_margin(f: &Family, x_sizes: &[usize], thetas: &[f64]) -> f64 {
    let d = f.dim();
    let (tlo, thi) = thetas.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), t| (a.min(*t), b.max(*t)));
    let mut bx = vec![(0.0, 1.0); d + 1];
    bx[f.param] = (tlo, thi);
    let dirs: Vec<Vec<f64>> = (0..=d)
        .map(|j| {
            let mut e = vec![0.0; d + 1];
            e[j] = 1.0;
            e
        })
        .collect();
    let b = f.expr.bounds(&bx, &dirs, &f.param_dir());
    let (na, nd) = (b.n0, b.n1v);
    let mut sorted = thetas.to_vec();
    sorted.sort_by(f64::total_cmp);
    let gap = sorted.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    // the extremes over y are exact, and a pointwise min (max) of functions
    // with a common Lipschitz bound inherits it
    let mut margin = 0.0;
    for j in 0..=d {
        let h = if j == f.param {
            gap
        } else {
            let xi = if j < f.param { j } else { j - 1 };
            1.0 / x_sizes[xi] as f64
        };
        margin += (3.0 * b.n1[j] * nd * na * na + b.n2[j] * na) * h / 2.0;
    }
    margin
}

/// Scans the extremes over y of ∂_θ arg(A_θ(x)·y) on x-grid × θ-values and
/// certifies a uniform sign when the extremum exceeds the Lipschitz margin.
pub fn monotonicity_constant(f: &Family, xgrid: &TorusGrid, thetas: &[f64]) -> Result<MonotonicityReport> {
    if xgrid.dim() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: xgrid.dim() });
    }
    if thetas.is_empty() {
        return Err(Error::InvalidArgument("empty parameter grid".into()));
    }
    let nx = xgrid.len();
    let jobs: Vec<(usize, usize)> = (0..nx).flat_map(|i| (0..thetas.len()).map(move |t| (i, t))).collect();
    let per: Vec<(Witness, Witness)> = jobs
        .par_iter()
        .map(|&(i, t)| {
            let x = xgrid.point(i);
            let (a, da) = f.jet(&real_point(&x), C64::from(thetas[t]));
            let (lo, hi) = speed_extremes(&a, &da);
            (
                Witness { x: x.clone(), phi: lo.1, theta: thetas[t], value: lo.0 },
                Witness { x, phi: hi.1, theta: thetas[t], value: hi.0 },
            )
        })
        .collect();
    // ordered reduction keeps the first extremum, so results are deterministic
    let mut argmin = per[0].0.clone();
    let mut argmax = per[0].1.clone();
    for (lo, hi) in &per {
        if lo.value < argmin.value {
            argmin = lo.clone();
        }
        if hi.value > argmax.value {
            argmax = hi.clone();
        }
    }
    let margin = lipschitz_margin(f, &xgrid.sizes, thetas);
    let (min_value, max_value) = (argmin.value, argmax.value);
    let scale = 1e-12 * (1.0 + min_value.abs().max(max_value.abs()));
    let mut report = MonotonicityReport {
        epsilon: min_value,
        min_value,
        max_value,
        argmin,
        argmax,
        x_sizes: xgrid.sizes.clone(),
        theta_size: thetas.len(),
        margin,
        certified: false,
    };
    if min_value < -scale && max_value > scale {
        return Err(Error::NotMonotonic(Box::new(report)));
    }
    if min_value < -scale || (max_value < 0.0 && min_value < 0.0) {
        report.epsilon = max_value;
    }
    if report.epsilon.abs() > margin && report.epsilon.abs() > scale {
        report.certified = true;
        Ok(report)
    } else {
        Err(Error::Uncertified(Box::new(report)))
    }
}

/// Repeats the scan, doubling every grid, while the result is Uncertified.
pub fn certify_monotonicity(
    f: &Family,
    xgrid: &TorusGrid,
    thetas: &[f64],
    refinements: usize,
) -> Result<MonotonicityReport> {
    let mut xg = xgrid.clone();
    let mut th = thetas.to_vec();
    let mut left = refinements;
    loop {
        match monotonicity_constant(f, &xg, &th) {
            Err(Error::Uncertified(r)) if left > 0 && r.epsilon.abs() > 0.0 => {
                left -= 1;
                xg = TorusGrid::new(xg.sizes.iter().map(|n| 2 * n).collect());
                if th.len() > 1 {
                    th = refine_thetas(&th);
                }
            }
            r => return r,
        }
    }
}

fn refine_thetas(th: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * th.len());
    for w in th.windows(2) {
        out.push(w[0]);
        out.push(0.5 * (w[0] + w[1]));
    }
    out.extend(th.last());
    out
}

#[derive(Debug)]
pub struct ConeSample {
    pub directions: Vec<Vec<f64>>,
    pub reports: Vec<Result<MonotonicityReport>>,
    /// Pairs (i, j) of certified-positive directions whose midpoint reported
    /// NotMonotonic; nonempty means the sample contradicts cone convexity.
    pub convexity_violations: Vec<(usize, usize)>,
}

fn phase_report(c: &Cocycle, w: &[f64], xgrid: &TorusGrid) -> Result<MonotonicityReport> {
    // phase families are translation invariant in θ, so θ = 0 covers all θ
    monotonicity_constant(&phase_shift(c, w)?, xgrid, &[0.0])
}

/// Phase-direction monotonicity for each w, plus a convexity sanity check.
pub fn w_cone_sample(c: &Cocycle, directions: &[Vec<f64>], xgrid: &TorusGrid) -> Result<ConeSample> {
    let reports: Vec<Result<MonotonicityReport>> =
        directions.iter().map(|w| phase_report(c, w, xgrid)).collect();
    let positive: Vec<usize> = reports
        .iter()
        .enumerate()
        .filter(|(_, r)| matches!(r, Ok(r) if r.epsilon > 0.0))
        .map(|(i, _)| i)
        .collect();
    let mut convexity_violations = Vec::new();
    for (a, &i) in positive.iter().enumerate() {
        for &j in &positive[a + 1..] {
            let mid: Vec<f64> = directions[i].iter().zip(&directions[j]).map(|(p, q)| 0.5 * (p + q)).collect();
            if let Err(Error::NotMonotonic(_)) = phase_report(c, &mid, xgrid) {
                convexity_violations.push((i, j));
            }
        }
    }
    Ok(ConeSample { directions: directions.to_vec(), reports, convexity_violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::{herman, rot_twist, rotation_model, schrodinger, schrodinger_energy_family};
    use crate::trigpoly::TrigPoly;
    use crate::{GOLDEN, SILVER};

    fn cocycle(alpha: Vec<f64>, e: crate::cocycle::CocycleExpr) -> Cocycle {
        Cocycle::new(alpha, e).unwrap()
    }

    #[test]
    fn rot_twist_speed_is_two_pi() {
        let base = cocycle(vec![GOLDEN], herman(3.0, &[2]));
        let f = rot_twist(&base).unwrap();
        let r = certify_monotonicity(&f, &TorusGrid::uniform(1, 1024), &[0.0], 4).unwrap();
        assert!((r.epsilon - 2.0 * PI).abs() < 1e-12);
        assert!((r.max_value - 2.0 * PI).abs() < 1e-12);
        assert!(r.certified);
    }

    #[test]
    fn phase_shift_on_rotation_model() {
        let c = cocycle(vec![GOLDEN, SILVER], rotation_model(&[2, -1]));
        let f = phase_shift(&c, &[1.0, 0.5]).unwrap();
        let r = certify_monotonicity(&f, &TorusGrid::uniform(2, 16), &[0.0], 4).unwrap();
        assert!(r.certified);
        assert!((r.epsilon - 2.0 * PI * 1.5).abs() < 1e-12);
    }

    #[test]
    fn herman_phase_shift_speed() {
        // the speed is 2π|R y|²/|D R y|², smallest along the expanding axis
        for lambda in [1.5, 2.0] {
            let c = cocycle(vec![GOLDEN], herman(lambda, &[1]));
            let f = phase_shift(&c, &[1.0]).unwrap();
            let r = certify_monotonicity(&f, &TorusGrid::uniform(1, 256), &[0.0], 4).unwrap();
            assert!(r.certified);
            assert!((r.epsilon - 2.0 * PI / (lambda * lambda)).abs() < 1e-3, "{}", r.epsilon);
        }
    }

    #[test]
    fn cone_of_rotation_model() {
        let c = cocycle(vec![GOLDEN, SILVER], rotation_model(&[1, 0]));
        let ws = vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        let s = w_cone_sample(&c, &ws, &TorusGrid::uniform(2, 64)).unwrap();
        assert!(matches!(&s.reports[0], Ok(r) if r.certified && r.epsilon > 0.0));
        assert!(matches!(&s.reports[1], Ok(r) if r.certified && r.epsilon < 0.0));
        assert!(matches!(&s.reports[2], Err(Error::Uncertified(r)) if r.epsilon == 0.0));
        assert!(s.convexity_violations.is_empty());
        let l = cocycle(vec![GOLDEN, SILVER], rotation_model(&[2, 3]));
        let s = w_cone_sample(&l, &[vec![2.0, 3.0]], &TorusGrid::uniform(2, 64)).unwrap();
        assert!(matches!(&s.reports[0], Ok(r) if r.epsilon > 0.0));
    }

    /// Independent oracle: finite-difference angular speed on a dense grid.
    fn brute_force_signs(c: &Cocycle, w: f64, n: usize) -> (bool, bool) {
        let h = 1e-6;
        let (mut neg, mut pos) = (false, false);
        for i in 0..n {
            let x = i as f64 / n as f64;
            let a = c.eval_real(&[x]).re();
            let b = c.eval_real(&[x + w * h]).re();
            for k in 0..n {
                let phi = PI * k as f64 / n as f64;
                let y = [phi.cos(), phi.sin()];
                let (u, v) = (a.apply(y), b.apply(y));
                let g = (u[0] * v[1] - u[1] * v[0]) / (u[0] * v[0] + u[1] * v[1]) / h;
                neg |= g < -1e-6;
                pos |= g > 1e-6;
            }
        }
        (neg, pos)
    }

    #[test]
    fn schrodinger_is_never_phase_monotonic() {
        let v = TrigPoly::cos_mode(&[1], 2.0);
        let c = cocycle(vec![GOLDEN], schrodinger(&v, 0.3));
        for w in [1.0, -1.0] {
            let r = phase_report(&c, &[w], &TorusGrid::uniform(1, 256));
            let Err(Error::NotMonotonic(rep)) = r else { panic!("expected a sign change") };
            assert!(rep.argmin.value < 0.0 && rep.argmax.value > 0.0);
            // the witness is a genuine sign change
            let f = phase_shift(&c, &[w]).unwrap();
            for wit in [&rep.argmin, &rep.argmax] {
                let (a, da) = f.jet(&real_point(&wit.x), C64::from(wit.theta));
                assert_eq!(angular_speed(&a, &da, wit.phi).signum(), wit.value.signum());
            }
            assert_eq!(brute_force_signs(&c, w, 256), (true, true));
        }
    }

    #[test]
    fn schrodinger_energy_monotonicity() {
        let f = schrodinger_energy_family(&TrigPoly::zero(1), &[GOLDEN]).unwrap();
        let es: Vec<f64> = (0..=64).map(|k| -0.5 + k as f64 / 64.0).collect();
        let one = monotonicity_constant(&f, &TorusGrid::uniform(1, 4), &es);
        // the speed −y₀²/|A y|² vanishes at y = (0, 1): degenerate, never certified
        assert!(matches!(&one, Err(Error::Uncertified(r)) if r.epsilon.abs() < 1e-12), "{one:?}");
        let two = f.iterate_family(2);
        let r = certify_monotonicity(&two, &TorusGrid::uniform(1, 2), &es, 4).unwrap();
        assert!(r.certified && r.epsilon < 0.0);
        assert!((r.epsilon + 0.6096).abs() < 1e-2, "{}", r.epsilon);
    }

    #[test]
    fn extremes_match_a_dense_direction_scan() {
        let v = TrigPoly::cos_mode(&[1], 2.0);
        let c = cocycle(vec![GOLDEN], schrodinger(&v, 0.3));
        let f = phase_shift(&c, &[1.0]).unwrap();
        for i in 0..16 {
            let (a, da) = f.jet(&real_point(&[i as f64 / 16.0]), C64::from(0.0));
            let ((lo, plo), (hi, phi)) = speed_extremes(&a, &da);
            let scan: Vec<f64> = (0..20_000).map(|k| angular_speed(&a, &da, PI * k as f64 / 20_000.0)).collect();
            let smin = scan.iter().cloned().fold(f64::INFINITY, f64::min);
            let smax = scan.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!(lo <= smin + 1e-12 && smin - lo < 1e-5 * (1.0 + lo.abs()));
            assert!(hi >= smax - 1e-12 && hi - smax < 1e-5 * (1.0 + hi.abs()));
            assert!((angular_speed(&a, &da, plo) - lo).abs() < 1e-9 * (1.0 + lo.abs()));
            assert!((angular_speed(&a, &da, phi) - hi).abs() < 1e-9 * (1.0 + hi.abs()));
        }
    }

    #[test]
    fn certified_value_is_a_lower_bound_off_grid() {
        let base = cocycle(vec![GOLDEN], herman(1.5, &[1]));
        let f = phase_shift(&base, &[1.0]).unwrap();
        let r = certify_monotonicity(&f, &TorusGrid::uniform(1, 128), &[0.0], 5).unwrap();
        let mut s = 0x2545F4914F6CDD1Du64;
        for _ in 0..5000 {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            let x = (s >> 11) as f64 / (1u64 << 53) as f64;
            let phi = PI * ((s >> 3) % 100_000) as f64 / 100_000.0;
            let (a, da) = f.jet(&real_point(&[x]), C64::from(0.0));
            assert!(angular_speed(&a, &da, phi) >= r.epsilon - r.margin);
        }
    }
}
