//! Conformal barycenter of finite measures on the disk by iterated
//! hyperbolic-midpoint self-pairing.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{from_origin, hyperbolic_distance, hyperbolic_midpoint, mobius, to_origin, Mat2C, BOUNDARY_EPS, C64};
use crate::{Error, Result};

/// Atom count kept after each compaction pass.
pub const ATOM_CAP: usize = 256;
/// Atoms lighter than this are folded into their nearest neighbour.
pub const PRUNE_WEIGHT: f64 = 1e-15;
/// Atoms closer than this (hyperbolically) are always merged.
pub const MERGE_DISTANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiskMeasure {
    pub atoms: Vec<(C64, f64)>,
}

impl DiskMeasure {
    pub fn new(atoms: Vec<(C64, f64)>) -> Result<Self> {
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if atoms.is_empty() || atoms.iter().any(|a| !(a.1 >= 0.0)) {
            return Err(Error::InvalidArgument("weights must be nonnegative and nonempty".into()));
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("total weight {total} is not 1")));
        }
        for (z, _) in &atoms {
            check_inside(*z)?;
        }
        Ok(Self { atoms })
    }

    /// Rescales the weights to total mass 1.
    pub fn normalized(atoms: Vec<(C64, f64)>) -> Result<Self> {
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if !(total > 0.0) {
            return Err(Error::InvalidArgument("zero total weight".into()));
        }
        Self::new(atoms.into_iter().map(|(z, w)| (z, w / total)).collect())
    }

    pub fn dirac(z: C64) -> Result<Self> {
        Self::new(vec![(z, 1.0)])
    }

    /// Push-forward under a disk automorphism.
    pub fn push(&self, m: &Mat2C) -> Self {
        Self { atoms: self.atoms.iter().map(|(z, w)| (mobius(m, *z), *w)).collect() }
    }

    pub fn heaviest(&self) -> C64 {
        self.atoms.iter().fold(self.atoms[0], |best, a| if a.1 > best.1 { *a } else { best }).0
    }

    pub fn diameter(&self) -> Result<f64> {
        let n = self.atoms.len();
        let rows: Vec<Result<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut m = 0.0f64;
                for j in i + 1..n {
                    m = m.max(hyperbolic_distance(self.atoms[i].0, self.atoms[j].0)?);
                }
                Ok(m)
            })
            .collect();
        rows.into_iter().try_fold(0.0f64, |acc, v| Ok(acc.max(v?)))
    }
}

fn check_inside(z: C64) -> Result<()> {
    if !(z.norm() < 1.0 - BOUNDARY_EPS) {
        return Err(Error::BoundaryPoint(z.norm()));
    }
    Ok(())
}

/// Φ(μ) = ∫ 1/(1−|z|²) dμ.
pub fn phi(mu: &DiskMeasure) -> Result<f64> {
    let mut s = 0.0;
    for (z, w) in &mu.atoms {
        check_inside(*z)?;
        s += w / (1.0 - z.norm_sqr());
    }
    Ok(s)
}

/// Coordinates centered at the weighted mean seen from the heaviest atom,
/// rotated so that the heaviest atom lies on the positive real axis. Built
/// from the atoms alone, so it moves with the measure under disk
/// automorphisms.
struct Frame {
    p: C64,
    turn: C64,
}

impl Frame {
    fn of(atoms: &[(C64, f64)]) -> Frame {
        let heavy = atoms.iter().fold(atoms[0], |best, a| if a.1 > best.1 { *a } else { best }).0;
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        let mean: C64 = atoms.iter().map(|(z, w)| to_origin(heavy, *z) * w).sum::<C64>() / total;
        let p = from_origin(heavy, mean);
        let u = to_origin(p, heavy);
        let turn = if u.norm() > 0.0 { u.conj() / u.norm() } else { C64::new(1.0, 0.0) };
        Frame { p, turn }
    }

    fn to(&self, z: C64) -> C64 {
        to_origin(self.p, z) * self.turn
    }

    fn from(&self, u: C64) -> C64 {
        from_origin(self.p, u / self.turn)
    }
}

/// Merges atoms sharing a cell of side `cell` in the frame coordinates into
/// their weighted mean there, then folds atoms lighter than `PRUNE_WEIGHT`
/// into the nearest heavy one. Output is sorted, so equal inputs give equal
/// outputs.
fn compact(atoms: &[(C64, f64)], cell: f64) -> Vec<(C64, f64)> {
    let frame = Frame::of(atoms);
    let mut cells: BTreeMap<(i64, i64), (C64, f64)> = BTreeMap::new();
    for (z, w) in atoms {
        let u = frame.to(*z);
        let key = ((u.re / cell).round() as i64, (u.im / cell).round() as i64);
        let e = cells.entry(key).or_insert((C64::new(0.0, 0.0), 0.0));
        e.0 += u * w;
        e.1 += w;
    }
    let merged: Vec<(C64, f64)> = cells.into_values().filter(|e| e.1 > 0.0).map(|(s, w)| (s / w, w)).collect();
    let (mut heavy, light): (Vec<_>, Vec<_>) = merged.into_iter().partition(|a| a.1 >= PRUNE_WEIGHT);
    if heavy.is_empty() {
        heavy = light;
    } else {
        heavy.sort_by(|a, b| a.0.re.total_cmp(&b.0.re));
        let mut extra = vec![(C64::new(0.0, 0.0), 0.0); heavy.len()];
        for (u, w) in light {
            let k = nearest(&heavy, u);
            extra[k].0 += u * w;
            extra[k].1 += w;
        }
        for (a, e) in heavy.iter_mut().zip(extra) {
            if e.1 > 0.0 {
                a.0 = (a.0 * a.1 + e.0) / (a.1 + e.1);
                a.1 += e.1;
            }
        }
    }
    heavy.into_iter().map(|(u, w)| (frame.from(u), w)).collect()
}

/// Index of the atom nearest to u in a list sorted by real part.
fn nearest(sorted: &[(C64, f64)], u: C64) -> usize {
    let start = sorted.partition_point(|a| a.0.re < u.re);
    let (mut best, mut dist) = (start.min(sorted.len() - 1), f64::INFINITY);
    let mut visit = |k: usize| {
        if (sorted[k].0.re - u.re).abs() >= dist {
            return false;
        }
        let d = (sorted[k].0 - u).norm();
        if d < dist {
            (best, dist) = (k, d);
        }
        true
    };
    for k in start..sorted.len() {
        if !visit(k) {
            break;
        }
    }
    for k in (0..start).rev() {
        if !visit(k) {
            break;
        }
    }
    best
}

/// Compacts to at most `cap` atoms. Past the cap, cells start at a size
/// matched to the spread of the measure and double.
fn compact_capped(atoms: &[(C64, f64)], cap: usize) -> Result<Vec<(C64, f64)>> {
    let fine = compact(atoms, MERGE_DISTANCE / 2.0);
    if fine.len() <= cap {
        return Ok(fine);
    }
    let frame = Frame::of(atoms);
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    let spread = (atoms.iter().map(|(z, w)| w * frame.to(*z).norm_sqr()).sum::<f64>() / total).sqrt();
    let mut cell = (MERGE_DISTANCE / 2.0).max(4.0 * spread / (cap as f64).sqrt());
    loop {
        let out = compact(atoms, cell);
        if out.len() <= cap {
            return Ok(out);
        }
        if cell > 1.0 {
            return Err(Error::AtomBlowup(out.len()));
        }
        cell *= 2.0;
    }
}

fn pair_raw(mu: &DiskMeasure, nu: &DiskMeasure) -> Result<Vec<(C64, f64)>> {
    let rows: Vec<Result<Vec<(C64, f64)>>> = mu
        .atoms
        .par_iter()
        .map(|(z, wz)| nu.atoms.iter().map(|(w, ww)| Ok((hyperbolic_midpoint(*z, *w)?, wz * ww))).collect())
        .collect();
    let mut out = Vec::with_capacity(mu.atoms.len() * nu.atoms.len());
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}

/// μ * ν: push-forward of μ ⊗ ν under the midpoint map, with coincident
/// atoms merged and negligible weights folded in.
pub fn pair_measures(mu: &DiskMeasure, nu: &DiskMeasure) -> Result<DiskMeasure> {
    // a cell of side r/2 holds points within hyperbolic distance ≲ r near 0
    Ok(DiskMeasure { atoms: compact(&pair_raw(mu, nu)?, MERGE_DISTANCE / 2.0) })
}

/// Weighted mean of the atoms seen from the heaviest one.
fn center(mu: &DiskMeasure) -> C64 {
    Frame::of(&mu.atoms).p
}

fn variance(mu: &DiskMeasure, s: C64) -> Result<f64> {
    let mut v = 0.0;
    for (z, w) in &mu.atoms {
        v += w * hyperbolic_distance(*z, s)?.powi(2);
    }
    Ok(v)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Barycenter {
    pub point: C64,
    pub iterations: usize,
    /// Φ(μ⁽ᵏ⁾) for k = 0, 1, ….
    pub phi_trace: Vec<f64>,
    pub final_atoms: usize,
}

/// Iterates μ ← μ * μ until the weighted hyperbolic variance about the
/// center is below tol² (implied by diameter < tol), compacting to
/// `ATOM_CAP` atoms.
pub fn conformal_barycenter(mu: &DiskMeasure, tol: f64, max_iter: usize) -> Result<Barycenter> {
    conformal_barycenter_capped(mu, tol, max_iter, ATOM_CAP)
}

pub fn conformal_barycenter_capped(mu: &DiskMeasure, tol: f64, max_iter: usize, cap: usize) -> Result<Barycenter> {
    let mut cur = DiskMeasure { atoms: compact(&mu.atoms, MERGE_DISTANCE / 2.0) };
    let mut phi_trace = vec![phi(&cur)?];
    for it in 0..=max_iter {
        let s = center(&cur);
        if cur.atoms.len() == 1 || variance(&cur, s)? < tol * tol {
            return Ok(Barycenter { point: s, iterations: it, phi_trace, final_atoms: cur.atoms.len() });
        }
        if it == max_iter {
            break;
        }
        // squaring doubles any rounding in the total weight, so renormalize
        let mut next = compact_capped(&pair_raw(&cur, &cur)?, cap)?;
        let total: f64 = next.iter().map(|a| a.1).sum();
        next.iter_mut().for_each(|a| a.1 /= total);
        cur = DiskMeasure { atoms: next };
        let p = phi(&cur)?;
        let last = *phi_trace.last().unwrap_or(&f64::INFINITY);
        // merging to a mean in any Möbius frame cannot raise Φ, which is
        // convex there; the slack covers rounding only
        assert!(p <= last * (1.0 + 1e-12), "Φ increased under pairing: {last} -> {p}");
        phi_trace.push(p);
    }
    Err(Error::NoConvergence { iterations: max_iter, diameter: cur.diameter()? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::su11;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn midpoint_examples() {
        let z = C64::new(0.3, -0.2);
        assert!((hyperbolic_midpoint(z, z).unwrap() - z).norm() < 1e-15);
        let m = hyperbolic_midpoint(C64::new(0.0, 0.0), C64::new(0.8, 0.0)).unwrap();
        // bisection oracle on the distance along [0, 0.8]
        let (mut lo, mut hi) = (0.0f64, 0.8f64);
        let half = hyperbolic_distance(C64::new(0.0, 0.0), C64::new(0.8, 0.0)).unwrap() / 2.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if hyperbolic_distance(C64::new(0.0, 0.0), C64::new(mid, 0.0)).unwrap() < half {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((m - C64::new(lo, 0.0)).norm() < 1e-12);
        assert!((m.re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi(&DiskMeasure::dirac(C64::new(0.0, 0.0)).unwrap()).unwrap(), 1.0);
        let mu = DiskMeasure::new(vec![(C64::new(0.6, 0.0), 0.5), (C64::new(-0.6, 0.0), 0.5)]).unwrap();
        assert!((phi(&mu).unwrap() - 1.5625).abs() < 1e-14);
        assert!(matches!(DiskMeasure::new(vec![(C64::new(1.0, 0.0), 1.0)]), Err(Error::BoundaryPoint(_))));
        assert!(DiskMeasure::new(vec![(C64::new(0.0, 0.0), 0.5)]).is_err());
    }

    #[test]
    fn pairing_examples() {
        let (z, w) = (C64::new(0.1, 0.4), C64::new(-0.5, 0.2));
        let p = pair_measures(&DiskMeasure::dirac(z).unwrap(), &DiskMeasure::dirac(w).unwrap()).unwrap();
        assert_eq!(p.atoms.len(), 1);
        assert!((p.atoms[0].0 - hyperbolic_midpoint(z, w).unwrap()).norm() < 1e-15);
        let sym = DiskMeasure::new(vec![(z, 0.5), (-z, 0.5)]).unwrap();
        let pp = pair_measures(&sym, &sym).unwrap();
        let at0: f64 = pp.atoms.iter().filter(|a| a.0.norm() < 1e-12).map(|a| a.1).sum();
        assert!((at0 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn barycenter_examples() {
        let z = C64::new(0.35, -0.6);
        let b = conformal_barycenter(&DiskMeasure::dirac(z).unwrap(), 1e-8, 10).unwrap();
        assert_eq!((b.point, b.iterations), (z, 0));
        let sym = DiskMeasure::new(vec![(z, 0.5), (-z, 0.5)]).unwrap();
        let b = conformal_barycenter(&sym, 1e-8, 100).unwrap();
        assert!(b.point.norm() < 1e-8);
        assert!(b.phi_trace.windows(2).all(|w| w[1] <= w[0]));
        assert!(matches!(conformal_barycenter(&random_measure(&mut ChaCha8Rng::seed_from_u64(3), 5), 1e-8, 1), Err(Error::NoConvergence { .. })));
    }

    fn random_measure(rng: &mut ChaCha8Rng, n: usize) -> DiskMeasure {
        let atoms = (0..n)
            .map(|_| (C64::from_polar(rng.gen_range(0.0..0.9), rng.gen_range(0.0..6.3)), rng.gen_range(0.1..1.0)))
            .collect();
        DiskMeasure::normalized(atoms).unwrap()
    }

    fn random_su11(rng: &mut ChaCha8Rng) -> Mat2C {
        su11(C64::from_polar(rng.gen_range(0.0..0.8), rng.gen_range(0.0..6.3)), rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn barycenter_is_equivariant() {
        let tol = 1e-8;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let mu = random_measure(&mut rng, 5);
            let m = random_su11(&mut rng);
            let b = conformal_barycenter_capped(&mu, tol, 200, 64).unwrap();
            let bm = conformal_barycenter_capped(&mu.push(&m), tol, 200, 64).unwrap();
            let err = hyperbolic_distance(bm.point, mobius(&m, b.point)).unwrap();
            assert!(err < 10.0 * tol, "{err}");
            assert!(phi(&DiskMeasure::dirac(b.point).unwrap()).unwrap() <= phi(&mu).unwrap() + 1e-9);
        }
    }

    #[test]
    fn deterministic() {
        let mu = random_measure(&mut ChaCha8Rng::seed_from_u64(5), 6);
        assert_eq!(conformal_barycenter(&mu, 1e-8, 200).unwrap(), conformal_barycenter(&mu, 1e-8, 200).unwrap());
    }

    #[test]
    fn barycenters_of_refined_approximations_converge() {
        // atoms of a smooth density on a circle of radius 0.5, symmetric about the real axis
        let density = |s: f64| 1.0 + 0.5 * (2.0 * std::f64::consts::PI * s).cos();
        let approx = |n: usize| {
            let atoms = (0..n)
                .map(|k| {
                    let s = (k as f64 + 0.5) / n as f64;
                    (C64::from_polar(0.5, 2.0 * std::f64::consts::PI * s), density(s))
                })
                .collect();
            conformal_barycenter(&DiskMeasure::normalized(atoms).unwrap(), 1e-9, 300).unwrap().point
        };
        let pts: Vec<C64> = [4, 8, 16, 32].iter().map(|n| approx(*n)).collect();
        let gaps: Vec<f64> = pts.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
        assert!(gaps[2] < gaps[0], "{gaps:?}");
        // past n = 16 the first pairing exceeds the cap, and compaction moves
        // the point by about 1e-5
        assert!(gaps[2] < 1e-4, "{gaps:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn midpoint_equivariance(zr in 0.0f64..0.95, za in 0.0f64..6.3, wr in 0.0f64..0.95, wa in 0.0f64..6.3,
                                 pr in 0.0f64..0.9, pa in 0.0f64..6.3, ph in -1.0f64..1.0) {
            let (z, w) = (C64::from_polar(zr, za), C64::from_polar(wr, wa));
            let m = su11(C64::from_polar(pr, pa), ph);
            let lhs = mobius(&m, hyperbolic_midpoint(z, w).unwrap());
            let rhs = hyperbolic_midpoint(mobius(&m, z), mobius(&m, w)).unwrap();
            prop_assert!((lhs - rhs).norm() < 1e-10);
        }

        #[test]
        fn pairing_lowers_phi(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mu = random_measure(&mut rng, 4);
            let nu = random_measure(&mut rng, 3);
            let mut avg = mu.atoms.iter().map(|(z, w)| (*z, w / 2.0)).collect::<Vec<_>>();
            avg.extend(nu.atoms.iter().map(|(z, w)| (*z, w / 2.0)));
            let lhs = phi(&DiskMeasure::new(avg).unwrap()).unwrap();
            prop_assert!(lhs >= phi(&pair_measures(&mu, &nu).unwrap()).unwrap());
        }
    }
}
