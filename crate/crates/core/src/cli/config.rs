//! Run configuration, read from a TOML file with dotted sections.
//!
//! ```toml
//! seed = 0
//!
//! [domain]
//! a = 0.0
//! b = 1.0
//! n = 64
//! s = 0.5
//!
//! [obstacle]
//! preset = "bump"      # bump | plateau | negative | custom
//! c = 0.5
//! d = 4.0
//! m = 0.5
//!
//! [forcing]
//! preset = "zero"      # zero | constant | sine | custom
//!
//! [solver]
//! method = "psor"      # psor | pg | activeset | penalty
//! tol = 1e-10
//!
//! [penalty]
//! epsilon = 1e-3
//!
//! [output]
//! json = "result.json"
//! csv = "result.csv"
//!
//! [sweep]
//! axis = "s"           # s | n | epsilon | delta
//! values = [0.25, 0.5, 0.75]
//! ```
//!
//! Unknown keys anywhere are rejected.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{FracLapOperator, Grid};
use crate::solvers::{PenaltyParams, ProblemSpec, SolverKind, SolverParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub domain: DomainConfig,
    pub obstacle: ObstacleConfig,
    #[serde(default)]
    pub forcing: ForcingConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalty: Option<PenaltyParams>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub a: f64,
    pub b: f64,
    pub n: usize,
    pub s: f64,
}

/// Obstacle presets evaluated at the interior nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "lowercase", deny_unknown_fields)]
pub enum ObstacleConfig {
    /// `ψ(x) = c − d (x − m)²`.
    Bump { c: f64, d: f64, m: f64 },
    /// `ψ = c` on `[l, r]`, `−c` elsewhere.
    Plateau { c: f64, l: f64, r: f64 },
    /// `ψ = −c`.
    Negative { c: f64 },
    /// Explicit node values, one per interior node.
    Custom { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "lowercase", deny_unknown_fields)]
pub enum ForcingConfig {
    #[default]
    Zero,
    Constant { c: f64 },
    /// `f(x) = amplitude · sin(π · frequency · (x − a)/(b − a))`.
    Sine { amplitude: f64, frequency: f64 },
    Custom { values: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub method: SolverKind,
    pub tol: f64,
    pub max_iter: usize,
    pub relaxation: f64,
    pub active_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let p = SolverParams::default();
        Self {
            method: SolverKind::Psor,
            tol: p.tol,
            max_iter: p.max_iter,
            relaxation: p.relaxation,
            active_tol: p.active_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    S,
    N,
    Epsilon,
    /// Obstacle perturbation `ψ + δ·bump`.
    Delta,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "s" => Ok(SweepAxis::S),
            "n" => Ok(SweepAxis::N),
            "epsilon" => Ok(SweepAxis::Epsilon),
            "delta" => Ok(SweepAxis::Delta),
            other => Err(Error::Config(format!("unknown sweep axis '{other}'"))),
        }
    }
}

impl SweepAxis {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepAxis::S => "s",
            SweepAxis::N => "n",
            SweepAxis::Epsilon => "epsilon",
            SweepAxis::Delta => "delta",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Checks everything that can be checked without solving, so that a
    /// config that validates always builds a [`ProblemSpec`].
    pub fn validate(&self) -> Result<()> {
        self.problem().map_err(as_config)?;
        self.solver_params().validate().map_err(as_config)?;
        if let Some(pp) = &self.penalty {
            pp.validate().map_err(as_config)?;
        }
        if self.solver.method == SolverKind::Oracle || self.solver.method == SolverKind::Linear {
            return Err(Error::Config(format!(
                "solver.method '{}' is not a solve method",
                self.solver.method.as_str()
            )));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.domain.a, self.domain.b, self.domain.n)
    }

    pub fn operator(&self) -> Result<FracLapOperator> {
        FracLapOperator::assemble(self.grid()?, self.domain.s)
    }

    pub fn solver_params(&self) -> SolverParams {
        SolverParams {
            tol: self.solver.tol,
            max_iter: self.solver.max_iter,
            relaxation: self.solver.relaxation,
            active_tol: self.solver.active_tol,
            seed: self.seed,
        }
    }

    pub fn penalty_params(&self) -> PenaltyParams {
        self.penalty.unwrap_or_default()
    }

    pub fn obstacle_values(&self, grid: &Grid) -> Result<Vec<f64>> {
        Ok(match &self.obstacle {
            ObstacleConfig::Bump { c, d, m } => grid.sample(|x| c - d * (x - m).powi(2)),
            ObstacleConfig::Plateau { c, l, r } => {
                grid.sample(|x| if (*l..=*r).contains(&x) { *c } else { -c })
            }
            ObstacleConfig::Negative { c } => vec![-c; grid.n()],
            ObstacleConfig::Custom { values } => {
                check_custom("obstacle", values, grid.n())?;
                values.clone()
            }
        })
    }

    pub fn forcing_values(&self, grid: &Grid) -> Result<Vec<f64>> {
        let (a, b) = (grid.a(), grid.b());
        Ok(match &self.forcing {
            ForcingConfig::Zero => vec![0.0; grid.n()],
            ForcingConfig::Constant { c } => vec![*c; grid.n()],
            ForcingConfig::Sine { amplitude, frequency } => grid
                .sample(|x| amplitude * (std::f64::consts::PI * frequency * (x - a) / (b - a)).sin()),
            ForcingConfig::Custom { values } => {
                check_custom("forcing", values, grid.n())?;
                values.clone()
            }
        })
    }

    pub fn problem(&self) -> Result<ProblemSpec> {
        let op = self.operator()?;
        let grid = *op.grid();
        ProblemSpec::new(Arc::new(op), self.obstacle_values(&grid)?, self.forcing_values(&grid)?)
    }
}

fn check_custom(what: &str, values: &[f64], n: usize) -> Result<()> {
    if values.len() != n {
        return Err(Error::Config(format!("custom {what} has {} values, grid has {n} nodes", values.len())));
    }
    Ok(())
}

fn as_config(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}
