use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::checks::solve_with;
use super::VerifyContext;
use crate::error::{Error, Result};
use crate::operator::{FracLapOperator, Grid};
use crate::solvers::ProblemSpec;
use crate::vector::{sub, sup_norm};

/// Errors of the perturbed solutions `u_k` (obstacle `ψ + δ_k·φ`) against
/// the unperturbed `u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub deltas: Vec<f64>,
    /// `‖u_k − u‖_∞`.
    pub sup_errors: Vec<f64>,
    /// `δ_k·‖φ‖_∞`, the `L^∞`-dependence bound for `sup_errors`.
    pub sup_bounds: Vec<f64>,
    /// `⟨A(u_k − u), u_k − u⟩^{1/2}`.
    pub energy_errors: Vec<f64>,
    /// Energy errors nonincreasing along the schedule.
    pub monotone_flag: bool,
    /// Every sup error within its bound plus `tol`.
    pub bound_ok: bool,
}

impl ConvergenceReport {
    pub fn final_energy_error(&self) -> f64 {
        *self.energy_errors.last().expect("schedule is nonempty")
    }
}

/// Smooth bump `exp(1 − 1/(1 − r²))`, `r = (x − center)/radius`, with peak 1
/// and support `|x − center| < radius`, sampled on the grid.
pub fn bump(grid: &Grid, center: f64, radius: f64) -> Vec<f64> {
    grid.sample(|x| {
        let r = (x - center) / radius;
        if r.abs() < 1.0 {
            (1.0 - 1.0 / (1.0 - r * r)).exp()
        } else {
            0.0
        }
    })
}

pub fn run_obstacle_convergence(
    op: &Arc<FracLapOperator>,
    f: &[f64],
    psi: &[f64],
    perturbation: &[f64],
    schedule: &[f64],
    ctx: &VerifyContext,
) -> Result<ConvergenceReport> {
    if schedule.len() < 3 {
        return Err(Error::InvalidInput("convergence schedule needs at least 3 values".into()));
    }
    if schedule.iter().any(|d| !(*d >= 0.0)) || schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidInput("schedule must be nonnegative and strictly decreasing".into()));
    }
    Error::check_len(op.n(), perturbation.len())?;
    let base = ProblemSpec::new(op.clone(), psi.to_vec(), f.to_vec())?;
    let u = solve_with(ctx, &base)?.u;
    let pert_norm = sup_norm(perturbation);

    let mut rep = ConvergenceReport {
        deltas: schedule.to_vec(),
        sup_errors: Vec::with_capacity(schedule.len()),
        sup_bounds: Vec::with_capacity(schedule.len()),
        energy_errors: Vec::with_capacity(schedule.len()),
        monotone_flag: true,
        bound_ok: true,
    };
    for &delta in schedule {
        let psi_k: Vec<f64> = psi.iter().zip(perturbation).map(|(p, q)| p + delta * q).collect();
        let u_k = solve_with(ctx, &base.with_psi(psi_k)?)?.u;
        let e = sub(&u_k, &u);
        let sup = sup_norm(&e);
        let bound = delta * pert_norm;
        rep.bound_ok &= sup <= bound + ctx.tol;
        rep.sup_errors.push(sup);
        rep.sup_bounds.push(bound);
        rep.energy_errors.push(op.energy_norm(&e)?);
    }
    rep.monotone_flag = rep.energy_errors.windows(2).all(|w| w[1] <= w[0] + 1e-14);
    Ok(rep)
}
