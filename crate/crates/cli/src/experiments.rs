use std::f64::consts::PI;
use std::path::Path;

use cocycles::algebra::C64;
use cocycles::barycenter::{conformal_barycenter_capped, DiskMeasure, ATOM_CAP};
use cocycles::cocycle::{herman, homotopy_class, phase_shift, rot_twist, rotation_model, Cocycle, CocycleFile, ExprSpec, Family, Shorthand};
use cocycles::complexify::{Extension, StripCocycle};
use cocycles::conjugacy::{l2_conjugacy_from_section, push_to_model, rotation_form, solve_cohomological, PushOptions, DIVISOR_CUT};
use cocycles::grid::TorusGrid;
use cocycles::lyap::{herman_average_rhs, lyapunov_orbit, lyapunov_theta_average, default_nodes, uniform_thetas};
use cocycles::monotone::certify_monotonicity;
use cocycles::renorm::renormalize;
use cocycles::rotnum::{affine_fit, fibered_rotation_number, rho_profile};
use cocycles::section::{invariant_section, invariant_section_minus, kotani_integrals, second_derivative_limit, section_lyapunov, u_profile};
use cocycles::trigpoly::TrigPoly;
use cocycles::{Error, GOLDEN};

use crate::alpha::parse_alpha_list;
use crate::config::ExperimentConfig;
use crate::criteria::{run_criterion, suite, DEFAULT_SEED, KOTANI_LEVELS, U_LEVELS};
use crate::error::{CliError, Context};
use crate::report::{Check, Outcome, Report};

type Checks = Result<Vec<Check>, CliError>;

pub const EXPERIMENTS: [&str; 12] = [
    "lyapunov",
    "herman-average",
    "rotnum",
    "monotone",
    "strip",
    "section",
    "uprofile",
    "d2l",
    "kotani",
    "barycenter",
    "renorm",
    "conjugate",
];

/// Runs the experiment named in `cfg.experiment`. Criterion ids (A1 … A13,
/// MC) are accepted as experiment names too.
pub fn run(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let name = cfg.require_experiment()?.to_string();
    let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
    if let Some(o) = run_criterion(&name, seed) {
        return Ok(Report::new(&o.id.clone(), vec![o]));
    }
    let f: fn(&ExperimentConfig) -> Checks = match name.as_str() {
        "lyapunov" => lyapunov,
        "herman-average" => herman_average,
        "rotnum" => rotnum,
        "monotone" => monotone,
        "strip" => strip,
        "section" => section,
        "uprofile" => uprofile,
        "d2l" => d2l,
        "kotani" => kotani,
        "barycenter" => barycenter,
        "renorm" => renorm,
        "conjugate" => conjugate,
        other => return Err(CliError::Config(format!("unknown experiment {other:?}"))),
    };
    let outcome = Outcome::run(&name, &name, || f(cfg));
    // usage problems found while running still count as usage errors
    if let Some(e) = &outcome.error {
        if e.starts_with("config error") {
            return Err(CliError::Config(e.trim_start_matches("config error: ").to_string()));
        }
    }
    Ok(Report::new(&name, vec![outcome]))
}

pub fn run_suite(name: &str, cfg: &ExperimentConfig) -> Result<Report, CliError> {
    suite(name, cfg.seed.unwrap_or(DEFAULT_SEED))
}

fn alpha_for(cfg: &ExperimentConfig, dim: usize) -> Result<Vec<f64>, CliError> {
    let alpha = match &cfg.alpha {
        Some(s) => parse_alpha_list(s).map_err(CliError::Config)?,
        None => vec![GOLDEN; dim],
    };
    if alpha.len() != dim {
        return Err(CliError::Config(format!("alpha has {} coordinates, cocycle needs {dim}", alpha.len())));
    }
    Ok(alpha)
}

/// The cocycle from `--cocycle`, or else herman(λ, l) when `--lambda` is
/// given, or else rotation_model(l). `--alpha` overrides the file's α.
pub fn load_cocycle(cfg: &ExperimentConfig) -> Result<Cocycle, CliError> {
    if let Some(p) = &cfg.cocycle {
        let mut file = CocycleFile::load(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
        if cfg.alpha.is_some() {
            file.alpha = alpha_for(cfg, file.dimension)?;
        }
        return file.to_cocycle().map_err(|e| CliError::Config(format!("{}: {e}", p.display())));
    }
    let l = cfg.l.clone().unwrap_or_else(|| vec![1]);
    let expr = match cfg.lambda {
        Some(lambda) => herman(lambda, &l),
        None => rotation_model(&l),
    };
    Cocycle::new(alpha_for(cfg, l.len())?, expr).map_err(|e| CliError::Config(e.to_string()))
}

/// The family and its fiberwise degree (⟨l,w⟩ for phase shifts, 1 for RotTwist).
fn load_family(cfg: &ExperimentConfig, c: &Cocycle) -> Result<(Family, f64), CliError> {
    match cfg.family.as_deref().unwrap_or("rot-twist") {
        "phase-shift" => {
            let w = cfg.w.clone().unwrap_or_else(|| vec![1.0; c.dim()]);
            if w.len() != c.dim() {
                return Err(CliError::Config(format!("w has {} coordinates, cocycle needs {}", w.len(), c.dim())));
            }
            let l = homotopy_class(c, 256).ctx("cocycle homotopy_class")?;
            let deg = l.iter().zip(&w).map(|(a, b)| *a as f64 * b).sum();
            Ok((phase_shift(c, &w).ctx("cocycle phase_shift")?, deg))
        }
        _ => Ok((rot_twist(c).ctx("cocycle rot_twist")?, 1.0)),
    }
}

fn certified_strip(cfg: &ExperimentConfig, f: Family) -> Result<StripCocycle, CliError> {
    let sigmas = uniform_thetas(cfg.sigmas.unwrap_or(8));
    let xgrid = TorusGrid::uniform(f.dim(), 32);
    StripCocycle::certify(Extension::Analytic(f), cfg.tmax.unwrap_or(0.1), &sigmas, &xgrid).ctx("complexify strip_width")
}

fn lyapunov(cfg: &ExperimentConfig) -> Checks {
    let c = load_cocycle(cfg)?;
    let n = cfg.n.unwrap_or(100_000);
    let x0 = vec![0.0; c.dim()];
    let e = lyapunov_orbit(&c, &x0, n);
    let p = format!("N={n}, x0=0");
    let mut out = vec![
        Check::info("L orbit estimate", &p, e.value),
        Check::info("error proxy", &p, e.error_proxy),
        Check::at_least("estimate + error proxy", &p, e.value + e.error_proxy, 0.0),
    ];
    if let Some(k) = cfg.theta_points {
        let (mean, _) = lyapunov_theta_average(&c, &uniform_thetas(k), n, &x0);
        out.push(Check::info("theta-average of L(R_theta A)", &format!("{k} theta, N={n}"), mean));
    }
    Ok(out)
}

fn herman_average(cfg: &ExperimentConfig) -> Checks {
    let lambda = cfg.lambda.unwrap_or(2.0);
    let c = match &cfg.cocycle {
        Some(_) => load_cocycle(cfg)?,
        None => {
            let l = cfg.l.clone().unwrap_or_else(|| vec![1]);
            Cocycle::new(alpha_for(cfg, l.len())?, herman(lambda, &l)).map_err(|e| CliError::Config(e.to_string()))?
        }
    };
    let k = cfg.theta_points.unwrap_or(64);
    let n = cfg.n.unwrap_or(100_000);
    let (mean, _) = lyapunov_theta_average(&c, &uniform_thetas(k), n, &vec![0.0; c.dim()]);
    let rhs = herman_average_rhs(&c, &default_nodes(&c, 4096));
    let p = format!("{k} theta, N={n}");
    Ok(vec![
        Check::info("mean of ln((|A|+1/|A|)/2)", "4096 nodes", rhs),
        Check::rel("theta-average of L vs right-hand side", &p, mean, rhs, cfg.tol.unwrap_or(1e-2)),
    ])
}

fn rotnum(cfg: &ExperimentConfig) -> Checks {
    let c = load_cocycle(cfg)?;
    let n = cfg.n.unwrap_or(10_000);
    let x0 = vec![0.0; c.dim()];
    let r = fibered_rotation_number(&c, &x0, n);
    let mut out = vec![Check::info("rho", &format!("N={n}"), r.rho), Check::info("lift slope", &format!("N={n}"), r.slope)];
    if let Ok(l) = homotopy_class(&c, 256) {
        for (i, v) in l.iter().enumerate() {
            out.push(Check::info(&format!("homotopy class l[{i}]"), "", *v as f64));
        }
    }
    if cfg.family.is_some() {
        let (f, deg) = load_family(cfg, &c)?;
        let k = cfg.theta_points.unwrap_or(32);
        let thetas: Vec<f64> = (0..k).map(|j| j as f64 / (k.max(2) - 1) as f64).collect();
        let m = cfg.n.unwrap_or(1000);
        let prof = rho_profile(&f, &thetas, &x0, m, 32).ctx("rotnum rho_profile")?;
        let (slope, icpt, res) = affine_fit(&prof);
        let p = format!("{k} theta in [0,1], N={m}");
        for (th, v) in &prof {
            out.push(Check::info(&format!("rho({th:.6})"), &p, *v));
        }
        out.push(Check::info("profile intercept", &p, icpt));
        out.push(Check::info("profile residual", &p, res));
        if cfg.family.as_deref() == Some("phase-shift") {
            out.push(Check::abs("profile slope vs <l,w>", &p, slope, deg, cfg.tol.unwrap_or(1e-2)));
        } else {
            out.push(Check::info("profile slope", &p, slope));
        }
    }
    Ok(out)
}

fn monotone(cfg: &ExperimentConfig) -> Checks {
    let c = load_cocycle(cfg)?;
    let (f, _) = load_family(cfg, &c)?;
    let n = cfg.grid.unwrap_or(256);
    let thetas = match cfg.theta_points {
        Some(k) => uniform_thetas(k),
        None => vec![cfg.theta.unwrap_or(0.0)],
    };
    let p = format!("grid {n}, {} theta, 4 refinements", thetas.len());
    let report = match certify_monotonicity(&f, &TorusGrid::uniform(c.dim(), n), &thetas, 4) {
        Ok(r) => r,
        Err(Error::NotMonotonic(r)) | Err(Error::Uncertified(r)) => *r,
        Err(e) => return Err(CliError::Module { context: "monotone certify_monotonicity".into(), source: e }),
    };
    Ok(vec![
        Check::info("epsilon", &p, report.epsilon),
        Check::info("min speed", &p, report.min_value),
        Check::info("max speed", &p, report.max_value),
        Check::info("Lipschitz margin", &p, report.margin),
        Check::holds("certified", &p, report.certified),
    ])
}

fn strip(cfg: &ExperimentConfig) -> Checks {
    let c = load_cocycle(cfg)?;
    let (f, _) = load_family(cfg, &c)?;
    let s = certified_strip(cfg, f)?;
    let mut out = vec![Check::info(&format!("side {:?}", s.side), "", s.side.sign()), Check::above("delta", "", s.delta, 0.0)];
    for (t, e) in &s.eps_hat {
        out.push(Check::info(&format!("eps_hat({t})"), "", *e));
    }
    Ok(out)
}

fn section(cfg: &ExperimentConfig) -> Checks {
    let c = load_cocycle(cfg)?;
    let (f, _) = load_family(cfg, &c)?;
    let s = certified_strip(cfg, f)?;
    let grid = TorusGrid::uniform(c.dim(), cfg.grid.unwrap_or(256));
    let tol = cfg.tol.unwrap_or(1e-12);
    let sigma = cfg.theta.unwrap_or(0.0);
    let mut out = Vec::new();
    for t in cfg.levels.clone().unwrap_or_else(|| vec![0.05]) {
        let m = invariant_section(&s, sigma, t, &grid, tol).ctx("section invariant_section")?;
        let l = section_lyapunov(&s, &m).ctx("section section_lyapunov")?;
        let p = format!("t={t}, sigma={sigma}");
        out.push(Check::info(&format!("residual t={t}"), &p, m.residual));
        out.push(Check::info(&format!("sup |m| t={t}"), &p, m.sup_abs()));
        out.push(Check::info(&format!("L via tau t={t}"), &p, l.via_tau));
        out.push(Check::abs(&format!("L via q t={t}"), &p, l.via_q, l.via_tau, 1e-6));
    }
    Ok(out)
}

fn uprofile(cfg: &ExperimentConfig) -> Checks {
    let c = load_cocycle(cfg)?;
    let (f, deg) = load_family(cfg, &c)?;
    let s = certified_strip(cfg, f)?;
    let levels = cfg.levels.clone().unwrap_or_else(|| U_LEVELS.to_vec());
    let sig = uniform_thetas(cfg.sigmas.unwrap_or(16));
    let u = u_profile(&s, &levels, &sig, &TorusGrid::uniform(c.dim(), cfg.grid.unwrap_or(256)), cfg.tol.unwrap_or(1e-12))
        .ctx("section u_profile")?;
    let mut out: Vec<Check> = u.values.iter().map(|(t, v)| Check::info(&format!("U({t})"), "", *v)).collect();
    out.push(Check::info("intercept", "", u.intercept));
    out.push(Check::info("fit residual", "", u.residual));
    out.push(Check::info("worst section residual", "", u.section_residual));
    out.push(Check::rel("|slope| vs 2 pi |deg|", &format!("deg={deg}"), u.slope.abs(), 2.0 * PI * deg.abs(), 2e-2));
    Ok(out)
}

fn d2l(cfg: &ExperimentConfig) -> Checks {
    let (s1, s2, s3) = match &cfg.cocycle {
        Some(p) => match CocycleFile::load(p).map_err(|e| CliError::Config(e.to_string()))?.expr {
            ExprSpec::Builder(Shorthand::ExpFamily { s1, s2, s3, .. }) => (s1, s2, s3),
            _ => return Err(CliError::Config("d2l needs an exp_family cocycle file".into())),
        },
        None => (TrigPoly::cos_mode(&[1], 1.0), TrigPoly::zero(1), TrigPoly::zero(1)),
    };
    let l = cfg.l.clone().unwrap_or_else(|| vec![1]);
    let t = cfg.levels.as_ref().and_then(|v| v.first().copied()).unwrap_or(0.05);
    let k = cfg.theta_points.unwrap_or(256);
    let r = second_derivative_limit(&s1, &s2, &s3, &l, t, k).ctx("section second_derivative_limit")?;
    let p = format!("l={l:?}, {k} theta");
    Ok(vec![
        Check::info(&format!("scaled value t={t}"), &p, r.at_t),
        Check::info(&format!("scaled value t={}", t / 2.0), &p, r.at_half),
        Check::info("Richardson value", &p, r.extrapolated),
    ])
}

fn kotani(cfg: &ExperimentConfig) -> Checks {
    let c = load_cocycle(cfg)?;
    let (f, _) = load_family(cfg, &c)?;
    let s = certified_strip(cfg, f)?;
    let grid = TorusGrid::uniform(c.dim(), cfg.grid.unwrap_or(1024));
    let tol = cfg.tol.unwrap_or(1e-12);
    let mut out = Vec::new();
    for t in cfg.levels.clone().unwrap_or_else(|| KOTANI_LEVELS.to_vec()) {
        let p = invariant_section(&s, 0.0, t, &grid, tol).ctx("section invariant_section")?;
        let m = invariant_section_minus(&s, 0.0, t, &grid, tol).ctx("section invariant_section_minus")?;
        let k = kotani_integrals(&p, &m).ctx("section kotani_integrals")?;
        out.push(Check::at_least(&format!("I+ t={t}"), "", k.i_plus, 1.0));
        out.push(Check::at_least(&format!("I- t={t}"), "", k.i_minus, 1.0));
        out.push(Check::info(&format!("D2 t={t}"), "", k.d2));
    }
    Ok(out)
}

pub fn read_atoms(path: &Path) -> Result<Vec<(C64, f64)>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut atoms = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v: Vec<f64> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::Config(format!("{} line {}: {e}", path.display(), i + 1)))?;
        match v.as_slice() {
            [re, im, w] => atoms.push((C64::new(*re, *im), *w)),
            [re, im] => atoms.push((C64::new(*re, *im), 1.0)),
            _ => return Err(CliError::Config(format!("{} line {}: expected `re im weight`", path.display(), i + 1))),
        }
    }
    Ok(atoms)
}

fn barycenter(cfg: &ExperimentConfig) -> Checks {
    let path = cfg.atoms.as_ref().ok_or_else(|| CliError::Config("missing field: atoms".into()))?;
    let mu = DiskMeasure::normalized(read_atoms(path)?).map_err(|e| CliError::Config(e.to_string()))?;
    let tol = cfg.tol.unwrap_or(1e-8);
    let cap = cfg.cap.unwrap_or(ATOM_CAP);
    let b = conformal_barycenter_capped(&mu, tol, cfg.n.unwrap_or(500), cap).ctx("barycenter conformal_barycenter")?;
    let p = format!("tol {tol:e}, cap {cap}");
    let mut out = vec![
        Check::info("barycenter re", &p, b.point.re),
        Check::info("barycenter im", &p, b.point.im),
        Check::info("iterations", &p, b.iterations as f64),
    ];
    for (k, v) in b.phi_trace.iter().enumerate() {
        out.push(Check::info(&format!("Phi[{k}]"), &p, *v));
    }
    let rise = b.phi_trace.windows(2).map(|w| (w[1] - w[0]) / w[0].abs().max(1e-300)).fold(0.0, f64::max);
    out.push(Check::at_most("largest relative increase of Phi", &p, rise, 1e-12));
    Ok(out)
}

fn renorm(cfg: &ExperimentConfig) -> Checks {
    let c = load_cocycle(cfg)?;
    let deg = homotopy_class(&c, 256).ctx("renorm homotopy_class")?[0];
    let depth = cfg.cf_depth.unwrap_or(5);
    let x_star = cfg.theta.unwrap_or(0.0);
    let mut out = Vec::new();
    for r in renormalize(&c, deg, x_star, 1..=depth).ctx("renorm renormalize")? {
        let p = format!("n={}, alpha_n={:.12}", r.n, r.alpha_n);
        out.push(Check::at_most(&format!("commutation residual n={}", r.n), &p, r.commutation_residual, 1e-8));
        out.push(Check::info(&format!("normalizing residual n={}", r.n), &p, r.normalizing_residual));
        out.push(Check::info(&format!("periodicity residual n={}", r.n), &p, r.periodicity_residual));
        let flip = if r.n % 2 == 0 { deg } else { -deg };
        out.push(Check::abs(&format!("degree n={}", r.n), &p, r.degree as f64, flip as f64, 0.0));
        out.push(Check::info(&format!("theta_hat n={}", r.n), &p, r.theta_hat));
        out.push(Check::info(&format!("rotation distance n={}", r.n), &p, r.distance));
    }
    Ok(out)
}

fn conjugate(cfg: &ExperimentConfig) -> Checks {
    let c = load_cocycle(cfg)?;
    let mode = cfg.mode.as_deref().ok_or_else(|| CliError::Config("missing field: mode".into()))?;
    match mode {
        "cohomological" => {
            let form = rotation_form(&c, cfg.grid.unwrap_or(64)).ctx("conjugacy rotation_form")?;
            let mut phi = TrigPoly::zero(c.dim());
            for (k, v) in form.phi.modes() {
                phi.add_mode(k.clone(), *v);
            }
            let s = solve_cohomological(&phi, &c.alpha, cfg.tol.unwrap_or(DIVISOR_CUT)).ctx("conjugacy solve_cohomological")?;
            Ok(vec![
                Check::info("mean c", "", s.c),
                Check::info("modes of psi", "", s.psi.modes().count() as f64),
                Check::at_most("residual", "verification grid", s.residual, 1e-9),
            ])
        }
        "push-to-model" => {
            let opts = PushOptions { divisor_cut: cfg.tol.unwrap_or(DIVISOR_CUT), ..PushOptions::default() };
            let r = push_to_model(&c, cfg.stages.unwrap_or(3), &opts).ctx("conjugacy push_to_model")?;
            let mut out = Vec::new();
            for s in &r.stages {
                let p = format!("fejer order {}, lattice {:?}", s.fejer_order, s.lattice);
                out.push(Check::info(&format!("distance stage {}", s.stage), &p, s.field.quality));
            }
            let d = r.distances();
            out.push(Check::at_most("final distance vs stage 0", "", d[d.len() - 1], d[0]));
            Ok(out)
        }
        "l2-from-section" => {
            let (f, _) = load_family(cfg, &c)?;
            let s = certified_strip(cfg, f)?;
            let grid = TorusGrid::uniform(c.dim(), cfg.grid.unwrap_or(256));
            let t = cfg.levels.as_ref().and_then(|v| v.last().copied()).unwrap_or(0.0125);
            let m = invariant_section(&s, 0.0, t, &grid, cfg.tol.unwrap_or(1e-12)).ctx("section invariant_section")?;
            let r = l2_conjugacy_from_section(&c, &grid, &m.values).ctx("conjugacy l2_conjugacy_from_section")?;
            let p = format!("section at t={t}");
            Ok(vec![
                Check::info("section residual for the real cocycle", &p, r.section_residual),
                Check::at_most("quality vs 10 x section residual", &p, r.field.quality, 10.0 * r.section_residual + 1e-12),
            ])
        }
        other => Err(CliError::Config(format!("unknown conjugate mode {other:?}"))),
    }
}
