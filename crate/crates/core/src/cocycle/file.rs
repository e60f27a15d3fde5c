use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trigpoly::TrigPoly;

use super::{exp_family, herman, rotation_model, schrodinger, Cocycle, CocycleExpr};

/// Builder shorthands accepted in cocycle files alongside raw trees.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builder", rename_all = "snake_case")]
pub enum Shorthand {
    RotationModel { l: Vec<i64> },
    Herman { lambda: f64, l: Vec<i64> },
    Schrodinger { v: TrigPoly, energy: f64 },
    ExpFamily { s1: TrigPoly, s2: TrigPoly, s3: TrigPoly, t: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExprSpec {
    Builder(Shorthand),
    Tree(CocycleExpr),
}

impl ExprSpec {
    pub fn build(&self) -> CocycleExpr {
        match self {
            ExprSpec::Tree(e) => e.clone(),
            ExprSpec::Builder(b) => match b {
                Shorthand::RotationModel { l } => rotation_model(l),
                Shorthand::Herman { lambda, l } => herman(*lambda, l),
                Shorthand::Schrodinger { v, energy } => schrodinger(v, *energy),
                Shorthand::ExpFamily { s1, s2, s3, t } => exp_family(s1, s2, s3, *t),
            },
        }
    }
}

/// On-disk description of a cocycle (JSON).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CocycleFile {
    pub dimension: usize,
    pub alpha: Vec<f64>,
    pub expr: ExprSpec,
}

impl CocycleFile {
    pub fn from_cocycle(c: &Cocycle) -> Self {
        Self { dimension: c.dim(), alpha: c.alpha.clone(), expr: ExprSpec::Tree(c.expr.clone()) }
    }

    pub fn to_cocycle(&self) -> Result<Cocycle> {
        if self.alpha.len() != self.dimension {
            return Err(Error::DimensionMismatch { expected: self.dimension, got: self.alpha.len() });
        }
        Cocycle::new(self.alpha.clone(), self.expr.build())
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}
