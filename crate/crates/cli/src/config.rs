use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use crate::alpha::parse_alpha_list;
use crate::error::CliError;

/// Every field is optional; experiments fill in their own defaults. The same
/// names work as flags and as keys of a JSON config file.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// JSON config file; flags given on the command line win.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(skip)]
    pub experiment: Option<String>,
    /// Cocycle file (JSON).
    #[arg(long)]
    pub cocycle: Option<PathBuf>,
    /// golden, silver, a decimal, or cf:a1,a2,...; `;` separates coordinates.
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub cf_depth: Option<usize>,
    /// Points per torus axis.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Orbit length.
    #[arg(long = "N", visible_alias = "n")]
    pub n: Option<usize>,
    /// Strip levels t.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub levels: Option<Vec<f64>>,
    #[arg(long)]
    pub theta_points: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// Number of real parts σ sampled on the strip.
    #[arg(long)]
    pub sigmas: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Homotopy class of the built-in models.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub l: Option<Vec<i64>>,
    /// Phase-shift direction.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub w: Option<Vec<f64>>,
    /// phase-shift or rot-twist.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub eta: Option<f64>,
    /// Atom file: one `re im weight` per line, `#` starts a comment.
    #[arg(long)]
    pub atoms: Option<PathBuf>,
    /// Atom cap for barycenter compaction.
    #[arg(long)]
    pub cap: Option<usize>,
    #[arg(long)]
    pub stages: Option<usize>,
    /// conjugate mode: l2-from-section, cohomological or push-to-model.
    #[arg(long)]
    pub mode: Option<String>,
    /// Output directory for the CSV detail and the JSON summary.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f; } )*
    };
}

impl ExperimentConfig {
    pub fn parse_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("malformed config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse_json(&text)
    }

    /// Fields set in `top` replace those in `self`.
    pub fn overlay(mut self, top: ExperimentConfig) -> Self {
        overlay!(self, top; config, experiment, cocycle, alpha, cf_depth, grid, n, levels, theta_points, theta,
            sigmas, tol, tmax, lambda, l, w, family, eta, atoms, cap, stages, mode, output, seed);
        self
    }

    /// Loads `--config` if present, applies the flags on top, and validates.
    pub fn resolve(flags: ExperimentConfig) -> Result<Self, CliError> {
        let cfg = match &flags.config {
            Some(p) => Self::load(p)?.overlay(flags),
            None => flags,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        for (name, p) in [("cocycle", &self.cocycle), ("atoms", &self.atoms)] {
            if let Some(p) = p {
                if !p.is_file() {
                    return bad(format!("{name} file {} does not exist", p.display()));
                }
            }
        }
        for (name, v) in [("tol", self.tol), ("tmax", self.tmax), ("lambda", self.lambda)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return bad(format!("{name} must be positive, got {v}"));
                }
            }
        }
        if let Some(e) = self.eta {
            if !(e >= 1.0) {
                return bad(format!("eta must be at least 1, got {e}"));
            }
        }
        for (name, v) in [("grid", self.grid), ("N", self.n), ("theta-points", self.theta_points), ("sigmas", self.sigmas), ("cap", self.cap)] {
            if v == Some(0) {
                return bad(format!("{name} must be positive"));
            }
        }
        if let Some(levels) = &self.levels {
            if levels.is_empty() || levels.iter().any(|t| !(*t > 0.0)) {
                return bad("levels must be positive".into());
            }
        }
        if let Some(a) = &self.alpha {
            parse_alpha_list(a).map_err(CliError::Config)?;
        }
        if let Some(f) = &self.family {
            if f != "phase-shift" && f != "rot-twist" {
                return bad(format!("unknown family {f:?}; expected phase-shift or rot-twist"));
            }
        }
        Ok(())
    }

    pub fn require_experiment(&self) -> Result<&str, CliError> {
        self.experiment.as_deref().ok_or_else(|| CliError::Config("missing field: experiment".into()))
    }
}
