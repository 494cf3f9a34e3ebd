//! Solvers for the discrete obstacle problem
//! `u ≥ ψ, Au − f ≥ 0, (Au − f)·(u − ψ) = 0`.

mod active_set;
mod linear;
mod oracle;
mod penalty;
mod projected_gradient;
mod psor;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::FracLapOperator;
use crate::vector::{positive_part, sub};

pub use active_set::solve_active_set;
pub use linear::{reduce_to_zero_forcing, solve_linear, solve_linear_cg, LinearSolver, ZeroForcingReduction};
pub use oracle::{brute_force_oracle, ORACLE_MAX_N};
pub use penalty::{solve_penalty, PenaltyOutcome, PenaltyParams, PenaltyScheme, SmoothStep};
pub use projected_gradient::{solve_projected_gradient, solve_projected_gradient_traced};
pub use psor::{solve_psor, solve_psor_from};

/// Dense-factorization size limit used by the active-set solver and by
/// `solve_linear`.
pub const DENSE_LIMIT: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Psor,
    #[serde(rename = "pg")]
    ProjectedGradient,
    #[serde(rename = "activeset")]
    ActiveSet,
    Penalty,
    Oracle,
    Linear,
}

impl SolverKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverKind::Psor => "psor",
            SolverKind::ProjectedGradient => "pg",
            SolverKind::ActiveSet => "activeset",
            SolverKind::Penalty => "penalty",
            SolverKind::Oracle => "oracle",
            SolverKind::Linear => "linear",
        }
    }
}

impl std::str::FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "psor" => Ok(SolverKind::Psor),
            "pg" => Ok(SolverKind::ProjectedGradient),
            "activeset" => Ok(SolverKind::ActiveSet),
            "penalty" => Ok(SolverKind::Penalty),
            "oracle" => Ok(SolverKind::Oracle),
            other => Err(Error::InvalidInput(format!("unknown solver '{other}'"))),
        }
    }
}

/// Obstacle `ψ` and forcing `f` on the operator's grid. The feasible set is
/// `K = {v : v_i ≥ ψ_i}`, never empty since `ψ⁺ ∈ K`.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    op: Arc<FracLapOperator>,
    psi: Vec<f64>,
    f: Vec<f64>,
}

impl ProblemSpec {
    pub fn new(op: Arc<FracLapOperator>, psi: Vec<f64>, f: Vec<f64>) -> Result<Self> {
        Error::check_len(op.n(), psi.len())?;
        Error::check_len(op.n(), f.len())?;
        if psi.iter().chain(&f).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("obstacle and forcing must be finite".into()));
        }
        Ok(Self { op, psi, f })
    }

    pub fn op(&self) -> &FracLapOperator {
        &self.op
    }

    pub fn op_arc(&self) -> &Arc<FracLapOperator> {
        &self.op
    }

    pub fn psi(&self) -> &[f64] {
        &self.psi
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    pub fn n(&self) -> usize {
        self.psi.len()
    }

    pub fn is_feasible(&self, v: &[f64]) -> bool {
        v.len() == self.n() && v.iter().zip(&self.psi).all(|(v, p)| v >= p)
    }

    /// `ψ⁺`, the default starting iterate.
    pub fn default_start(&self) -> Vec<f64> {
        positive_part(&self.psi)
    }

    pub fn residual(&self, u: &[f64]) -> Result<Vec<f64>> {
        Ok(sub(&self.op.apply(u)?, &self.f))
    }

    pub fn energy(&self, v: &[f64]) -> Result<f64> {
        self.op.energy(v, &self.f)
    }

    pub fn with_psi(&self, psi: Vec<f64>) -> Result<Self> {
        Self::new(self.op.clone(), psi, self.f.clone())
    }

    pub fn with_f(&self, f: Vec<f64>) -> Result<Self> {
        Self::new(self.op.clone(), self.psi.clone(), f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverParams {
    /// KKT tolerance.
    pub tol: f64,
    pub max_iter: usize,
    /// PSOR relaxation ω ∈ (0, 2).
    pub relaxation: f64,
    /// Nodes with `u_i − ψ_i ≤ active_tol` are reported as active.
    pub active_tol: f64,
    pub seed: u64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 200_000, relaxation: 1.5, active_tol: 1e-8, seed: 0 }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidInput(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.relaxation > 0.0 && self.relaxation < 2.0) {
            return Err(Error::InvalidInput(format!(
                "relaxation must lie in (0,2), got {}",
                self.relaxation
            )));
        }
        if !(self.active_tol > 0.0) {
            return Err(Error::InvalidInput("active_tol must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidInput("max_iter must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub u: Vec<f64>,
    /// `r = A u − f`.
    pub residual: Vec<f64>,
    pub active_set: Vec<usize>,
    pub iterations: usize,
    pub solver: SolverKind,
    pub converged: bool,
    /// Worst componentwise KKT violation of `u`.
    pub kkt_violation: f64,
    /// Set when the requested solver gave up and another produced `u`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback: Option<SolverKind>,
}

impl Solution {
    pub fn from_iterate(
        spec: &ProblemSpec,
        u: Vec<f64>,
        iterations: usize,
        solver: SolverKind,
        converged: bool,
        active_tol: f64,
    ) -> Result<Self> {
        let residual = spec.residual(&u)?;
        let (kkt_violation, _) = kkt_violation(spec.psi(), &u, &residual);
        let active_set = active_set(spec.psi(), &u, active_tol);
        Ok(Self { u, residual, active_set, iterations, solver, converged, kkt_violation, fallback: None })
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.active_set.binary_search(&i).is_ok()
    }
}

/// Indices with `u_i − ψ_i ≤ active_tol`; ties count as active.
pub fn active_set(psi: &[f64], u: &[f64], active_tol: f64) -> Vec<usize> {
    u.iter()
        .zip(psi)
        .enumerate()
        .filter(|(_, (u, p))| *u - *p <= active_tol)
        .map(|(i, _)| i)
        .collect()
}

/// Worst componentwise KKT violation and its index. Per node it is the
/// largest of `ψ_i − u_i`, `−r_i` and `r_i (u_i − ψ_i) / (1 + |r_i|)`,
/// clipped at zero.
pub fn kkt_violation(psi: &[f64], u: &[f64], r: &[f64]) -> (f64, usize) {
    let mut worst = (0.0, 0);
    for i in 0..u.len() {
        let gap = u[i] - psi[i];
        let v = (-gap).max(-r[i]).max(r[i] * gap / (1.0 + r[i].abs()));
        if v > worst.0 || v.is_nan() {
            worst = (if v.is_nan() { f64::INFINITY } else { v }, i);
        }
    }
    worst
}

/// Stopping measure for the iterative solvers: [`kkt_violation`] plus
/// `r_i` on every node with `u_i − ψ_i > active_tol`, so a nearly touching
/// but inactive node cannot hide a residual behind its small gap.
pub fn stopping_violation(psi: &[f64], u: &[f64], r: &[f64], active_tol: f64) -> f64 {
    let strict = (0..u.len())
        .filter(|&i| u[i] - psi[i] > active_tol)
        .fold(0.0, |m: f64, i| m.max(r[i]));
    kkt_violation(psi, u, r).0.max(strict)
}

/// Dispatches to the named solver. `Penalty` uses default penalty
/// parameters and returns the reference obstacle solution.
pub fn solve(spec: &ProblemSpec, kind: SolverKind, params: &SolverParams) -> Result<Solution> {
    match kind {
        SolverKind::Psor => solve_psor(spec, params),
        SolverKind::ProjectedGradient => solve_projected_gradient(spec, params),
        SolverKind::ActiveSet => solve_active_set(spec, params),
        SolverKind::Penalty => Ok(solve_penalty(spec, &PenaltyParams::default(), params)?.solution),
        SolverKind::Oracle => brute_force_oracle(spec),
        SolverKind::Linear => Err(Error::InvalidInput("'linear' is not an obstacle solver".into())),
    }
}
