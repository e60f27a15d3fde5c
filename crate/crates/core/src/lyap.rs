//! Lyapunov exponent estimators and the average identity
//! ∫ L(R_θ A) dθ = ∫ ln((‖A‖ + ‖A‖⁻¹)/2).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{Mat2C, Mat2R, C64};
use crate::cocycle::{real_point, Cocycle, CocycleExpr};
use crate::trigpoly::TrigPoly;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapEstimate {
    pub value: f64,
    pub n: usize,
    pub error_proxy: f64,
}

fn normalize(v: &mut [C64; 2]) -> f64 {
    let r = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    v[0] /= r;
    v[1] /= r;
    r.ln()
}

/// Log-growth of two orthogonal unit vectors along the orbit, recorded at
/// step `half` and at the end. The larger of the two dominates ln‖A_n‖ up
/// to ln √2.
fn orbit_growth(c: &Cocycle, x0: &[f64], n: usize, half: usize) -> ((f64, f64), (f64, f64)) {
    let mut x = real_point(x0);
    let mut u = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    let mut w = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
    let (mut gu, mut gw) = (0.0, 0.0);
    let mut mid = (0.0, 0.0);
    for k in 0..n {
        if k == half {
            mid = (gu, gw);
        }
        let a = c.expr.eval(&x);
        u = a.apply(u);
        w = a.apply(w);
        gu += normalize(&mut u);
        gw += normalize(&mut w);
        for (xi, ai) in x.iter_mut().zip(&c.alpha) {
            *xi += ai;
            // keep the phase small; every node is 1-periodic in each coordinate
            if xi.re > 1.0 {
                xi.re -= 1.0;
            }
        }
    }
    (mid, (gu, gw))
}

/// Single-orbit Birkhoff estimate of the top exponent.
pub fn lyapunov_orbit(c: &Cocycle, x0: &[f64], n: usize) -> LyapEstimate {
    let n = n.max(2);
    let half = n / 2;
    let (mid, end) = orbit_growth(c, x0, n, half);
    let value = end.0.max(end.1) / n as f64;
    let first = mid.0.max(mid.1) / half as f64;
    LyapEstimate { value, n, error_proxy: (value - first).abs() }
}

/// (1/n)·mean over nodes of ln‖A_n(x)‖; an upper bound for L by subadditivity.
pub fn lyapunov_upper(c: &Cocycle, n: usize, nodes: &[Vec<f64>]) -> f64 {
    let n = n.max(1);
    let vals: Vec<f64> = nodes.par_iter().map(|x| c.iterate_real(x, n as i64).log_norm()).collect();
    vals.iter().sum::<f64>() / (n as f64 * nodes.len() as f64)
}

/// Mean over nodes of ln((‖A‖ + ‖A‖⁻¹)/2).
pub fn herman_average_rhs(c: &Cocycle, nodes: &[Vec<f64>]) -> f64 {
    let vals: Vec<f64> = nodes
        .par_iter()
        .map(|x| {
            let s = c.eval_real(x).norm();
            (0.5 * (s + 1.0 / s)).ln()
        })
        .collect();
    vals.iter().sum::<f64>() / nodes.len() as f64
}

/// R_θ·A as a cocycle.
pub fn rotated(c: &Cocycle, theta: f64) -> Cocycle {
    Cocycle {
        alpha: c.alpha.clone(),
        expr: CocycleExpr::Product(vec![CocycleExpr::Rot(TrigPoly::constant(c.dim(), theta)), c.expr.clone()]),
    }
}

/// Mean over θ of the orbit estimate for R_θ·A. Returns the mean and the
/// per-θ estimates in θ order.
pub fn lyapunov_theta_average(c: &Cocycle, thetas: &[f64], n: usize, x0: &[f64]) -> (f64, Vec<LyapEstimate>) {
    let est: Vec<LyapEstimate> = thetas.par_iter().map(|th| lyapunov_orbit(&rotated(c, *th), x0, n)).collect();
    let mean = est.iter().map(|e| e.value).sum::<f64>() / est.len() as f64;
    (mean, est)
}

/// Quasi-Monte Carlo nodes: the orbit x0, x0+α, … reduced mod 1.
pub fn orbit_nodes(alpha: &[f64], x0: &[f64], count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|k| x0.iter().zip(alpha).map(|(x, a)| (x + k as f64 * a).rem_euclid(1.0)).collect())
        .collect()
}

/// Uniform grid for d = 1, orbit nodes otherwise.
pub fn default_nodes(c: &Cocycle, count: usize) -> Vec<Vec<f64>> {
    if c.dim() == 1 {
        (0..count).map(|k| vec![k as f64 / count as f64]).collect()
    } else {
        orbit_nodes(&c.alpha, &vec![0.0; c.dim()], count)
    }
}

pub fn uniform_thetas(count: usize) -> Vec<f64> {
    (0..count).map(|k| k as f64 / count as f64).collect()
}

/// ln‖M‖ for a real matrix.
pub fn log_norm(m: &Mat2R) -> f64 {
    Mat2C::norm(&m.to_complex()).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::{herman, rotation_model};
    use crate::GOLDEN;

    fn constant(m: Mat2R) -> Cocycle {
        Cocycle::new(vec![GOLDEN], CocycleExpr::Const(m)).unwrap()
    }

    #[test]
    fn constant_hyperbolic() {
        let e = lyapunov_orbit(&constant(Mat2R::diag(3.0)), &[0.1], 100);
        assert!((e.value - 3f64.ln()).abs() < 1e-10);
        assert!((lyapunov_upper(&constant(Mat2R::diag(3.0)), 1, &[vec![0.0]]) - 3f64.ln()).abs() < 1e-14);
        let nodes = default_nodes(&constant(Mat2R::diag(3.0)), 8);
        assert!((herman_average_rhs(&constant(Mat2R::diag(3.0)), &nodes) - (5.0f64 / 3.0).ln()).abs() < 1e-14);
    }

    #[test]
    fn rotations_have_zero_exponent() {
        let c = Cocycle::new(vec![GOLDEN, crate::SILVER], rotation_model(&[1, -2])).unwrap();
        assert!(lyapunov_orbit(&c, &[0.1, 0.2], 10_000).value.abs() < 1e-10);
        let nodes = default_nodes(&c, 64);
        for n in [1, 4, 16] {
            assert!(lyapunov_upper(&c, n, &nodes).abs() < 1e-12);
        }
        assert_eq!(herman_average_rhs(&c, &nodes), 0.0);
        let id = constant(Mat2R::IDENTITY);
        let (avg, _) = lyapunov_theta_average(&id, &uniform_thetas(16), 2000, &[0.0]);
        assert!(avg.abs() < 1e-10);
    }

    #[test]
    fn herman_rhs_value() {
        let c = Cocycle::new(vec![GOLDEN], herman(2.0, &[1])).unwrap();
        let v = herman_average_rhs(&c, &default_nodes(&c, 64));
        assert!((v - 1.25f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn upper_bound_decreases_along_doublings() {
        let c = Cocycle::new(vec![GOLDEN], herman(2.0, &[1])).unwrap();
        let nodes = default_nodes(&c, 256);
        let orbit = lyapunov_orbit(&c, &[0.0], 200_000).value;
        let mut prev = f64::INFINITY;
        let mut n = 2;
        while n <= 256 {
            let u = lyapunov_upper(&c, n, &nodes);
            assert!(u <= prev + 1e-3, "n={n}: {u} > {prev}");
            assert!(u >= orbit - 1e-3);
            prev = u;
            n *= 2;
        }
    }
}
