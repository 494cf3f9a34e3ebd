use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};

use super::{solve_psor, ProblemSpec, Solution, SolverKind, SolverParams, DENSE_LIMIT};
use crate::error::{Error, Result};

/// Primal-dual active-set iteration. With `S` the current guess, solve
/// `u = ψ` on `S` and `(Au − f) = 0` off `S`, then take the new guess
/// `{i ∈ S : r_i > 0} ∪ {i ∉ S : u_i < ψ_i}`. Stops when the guess repeats
/// its predecessor. A revisit of an older guess falls back to PSOR.
pub fn solve_active_set(spec: &ProblemSpec, params: &SolverParams) -> Result<Solution> {
    params.validate()?;
    let n = spec.n();
    if n > DENSE_LIMIT {
        return Err(Error::InvalidInput(format!(
            "active-set solver is dense; n = {n} exceeds {DENSE_LIMIT}"
        )));
    }
    let a = spec.op().to_dense();
    let (psi, f) = (spec.psi(), spec.f());

    let mut active = vec![false; n];
    let mut seen: HashSet<Vec<bool>> = HashSet::new();
    seen.insert(active.clone());
    for it in 1..=params.max_iter {
        let u = constrained_solve(&a, psi, f, &active)?;
        let r = spec.residual(&u)?;
        let next: Vec<bool> = (0..n)
            .map(|i| if active[i] { r[i] > 0.0 } else { u[i] < psi[i] })
            .collect();
        if next == active {
            return Solution::from_iterate(spec, u, it, SolverKind::ActiveSet, true, params.active_tol);
        }
        if !seen.insert(next.clone()) {
            let mut sol = solve_psor(spec, params)?;
            sol.solver = SolverKind::ActiveSet;
            sol.fallback = Some(SolverKind::Psor);
            sol.iterations += it;
            return Ok(sol);
        }
        active = next;
    }
    let best = constrained_solve(&a, psi, f, &active)?;
    let violation = super::kkt_violation(psi, &best, &spec.residual(&best)?).0;
    Err(Error::IterationLimit { solver: SolverKind::ActiveSet, iterations: params.max_iter, violation, best })
}

/// Solves `u_S = ψ_S`, `(A u)_F = f_F` by Cholesky on `A_FF` with one
/// refinement step.
fn constrained_solve(a: &DMatrix<f64>, psi: &[f64], f: &[f64], active: &[bool]) -> Result<Vec<f64>> {
    let n = psi.len();
    let free: Vec<usize> = (0..n).filter(|&i| !active[i]).collect();
    let mut u: Vec<f64> = (0..n).map(|i| if active[i] { psi[i] } else { 0.0 }).collect();
    if free.is_empty() {
        return Ok(u);
    }
    let sub = DMatrix::from_fn(free.len(), free.len(), |p, q| a[(free[p], free[q])]);
    let chol = sub
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numerical("principal submatrix is not positive definite".into()))?;
    let rhs = DVector::from_fn(free.len(), |p, _| {
        let i = free[p];
        f[i] - (0..n).filter(|&j| active[j]).map(|j| a[(i, j)] * psi[j]).sum::<f64>()
    });
    let mut x = chol.solve(&rhs);
    let corr = chol.solve(&(&rhs - &sub * &x));
    x += corr;
    for (p, &i) in free.iter().enumerate() {
        u[i] = x[p];
    }
    Ok(u)
}
