use proptest::prelude::*;

use cocycles::algebra::{mobius, su11, C64};
use cocycles::barycenter::{conformal_barycenter, DiskMeasure};
use cocycles::cocycle::herman;
use cocycles::cocycle::Cocycle;
use cocycles::conjugacy::solve_cohomological;
use cocycles::lyap::lyapunov_upper;
use cocycles::trigpoly::TrigPoly;
use cocycles::GOLDEN;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn iterates_are_unimodular(lambda in 1.0f64..5.0, l in -3i64..4, x in 0.0f64..1.0, n in 1i64..200) {
        let c = Cocycle::new(vec![GOLDEN], herman(lambda, &[l])).unwrap();
        let a = c.iterate_real(&[x], n).value();
        // det is computed with cancellation of order ‖A‖²
        let scale = a.norm().powi(2).max(1.0);
        prop_assert!((a.det().re - 1.0).abs() < 1e-13 * scale, "det {} at norm {}", a.det(), a.norm());
        prop_assert!(a.max_imag() < 1e-12);
    }

    #[test]
    fn upper_bound_dominates_herman_value(lambda in 1.0f64..5.0) {
        let c = Cocycle::new(vec![GOLDEN], herman(lambda, &[1])).unwrap();
        let nodes: Vec<Vec<f64>> = (0..32).map(|j| vec![j as f64 / 32.0]).collect();
        let exact = ((lambda + 1.0 / lambda) / 2.0f64).ln();
        prop_assert!(lyapunov_upper(&c, 64, &nodes) >= exact - 1e-9);
    }

    #[test]
    fn cohomological_solution_has_small_residual(a in -1.0f64..1.0, b in -1.0f64..1.0, k in 1i64..8) {
        let phi = TrigPoly::cos_mode(&[k], a).add(&TrigPoly::sin_mode(&[k + 1], b));
        let s = solve_cohomological(&phi, &[GOLDEN], 1e-8).unwrap();
        prop_assert!(s.residual < 1e-10, "{}", s.residual);
    }

    #[test]
    fn barycenter_is_equivariant(
        pts in proptest::collection::vec((-0.6f64..0.6, -0.6f64..0.6, 0.1f64..1.0), 2..6),
        pr in -0.5f64..0.5, pi in -0.5f64..0.5, phi in 0.0f64..1.0,
    ) {
        let mu = DiskMeasure::normalized(pts.iter().map(|(x, y, w)| (C64::new(*x, *y), *w)).collect()).unwrap();
        let m = su11(C64::new(pr, pi), phi);
        let b = conformal_barycenter(&mu, 1e-11, 300).unwrap();
        let bm = conformal_barycenter(&mu.push(&m), 1e-11, 300).unwrap();
        prop_assert!((bm.point - mobius(&m, b.point)).norm() < 1e-6, "{} vs {}", bm.point, mobius(&m, b.point));
    }
}
