use super::{stopping_violation, ProblemSpec, Solution, SolverKind, SolverParams};
use crate::error::{Error, Result};
use crate::vector::dot;

/// Projected gradient `u ← max(ψ, u − η(Au − f))` with `η = 1/(2D)`.
pub fn solve_projected_gradient(spec: &ProblemSpec, params: &SolverParams) -> Result<Solution> {
    run(spec, params, None)
}

/// Same as [`solve_projected_gradient`] but also returns `J(u_k)` for every
/// iterate, starting with the initial one.
pub fn solve_projected_gradient_traced(
    spec: &ProblemSpec,
    params: &SolverParams,
) -> Result<(Solution, Vec<f64>)> {
    let mut trace = Vec::new();
    let sol = run(spec, params, Some(&mut trace))?;
    Ok((sol, trace))
}

fn run(spec: &ProblemSpec, params: &SolverParams, mut trace: Option<&mut Vec<f64>>) -> Result<Solution> {
    params.validate()?;
    let op = spec.op();
    let (psi, f) = (spec.psi(), spec.f());
    let h = op.h();
    let eta = 1.0 / op.lambda_max_bound();
    let mut u = spec.default_start();
    let mut r = vec![0.0; u.len()];

    let mut violation = f64::INFINITY;
    for it in 0..=params.max_iter {
        op.apply_into(&u, &mut r);
        if let Some(t) = trace.as_deref_mut() {
            // J(u) = h(½ uᵀAu − fᵀu), with Au already in r
            t.push(h * (0.5 * dot(&r, &u) - dot(f, &u)));
        }
        r.iter_mut().zip(f).for_each(|(r, f)| *r -= f);
        violation = stopping_violation(psi, &u, &r, params.active_tol);
        if violation <= params.tol {
            return Solution::from_iterate(spec, u, it, SolverKind::ProjectedGradient, true, params.active_tol);
        }
        if it == params.max_iter {
            break;
        }
        for i in 0..u.len() {
            u[i] = (u[i] - eta * r[i]).max(psi[i]);
        }
    }
    Err(Error::IterationLimit {
        solver: SolverKind::ProjectedGradient,
        iterations: params.max_iter,
        violation,
        best: u,
    })
}
