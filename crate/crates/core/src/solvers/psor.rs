use super::{stopping_violation, ProblemSpec, Solution, SolverKind, SolverParams};
use crate::error::{Error, Result};

/// Projected SOR from the default start `ψ⁺`.
pub fn solve_psor(spec: &ProblemSpec, params: &SolverParams) -> Result<Solution> {
    solve_psor_from(spec, params, spec.default_start())
}

/// Projected SOR sweeps
/// `u_i ← max(ψ_i, (1−ω)u_i + (ω/D)(f_i + Σ_{j≠i} W_{|i−j|} u_j))`
/// until the worst KKT violation drops to `tol`. The start is projected
/// onto `K` first.
pub fn solve_psor_from(spec: &ProblemSpec, params: &SolverParams, start: Vec<f64>) -> Result<Solution> {
    params.validate()?;
    Error::check_len(spec.n(), start.len())?;
    let op = spec.op();
    let (psi, f) = (spec.psi(), spec.f());
    let omega = params.relaxation;
    let d = op.diag();
    let mut u: Vec<f64> = start.iter().zip(psi).map(|(u, p)| u.max(*p)).collect();
    let mut r = vec![0.0; u.len()];

    let mut violation = f64::INFINITY;
    for sweep in 0..=params.max_iter {
        op.apply_into(&u, &mut r);
        r.iter_mut().zip(f).for_each(|(r, f)| *r -= f);
        violation = stopping_violation(psi, &u, &r, params.active_tol);
        if violation <= params.tol {
            return Solution::from_iterate(spec, u, sweep, SolverKind::Psor, true, params.active_tol);
        }
        if sweep == params.max_iter {
            break;
        }
        for i in 0..u.len() {
            let gs = (f[i] + op.neighbor_sum(&u, i)) / d;
            u[i] = ((1.0 - omega) * u[i] + omega * gs).max(psi[i]);
        }
    }
    Err(Error::IterationLimit { solver: SolverKind::Psor, iterations: params.max_iter, violation, best: u })
}
