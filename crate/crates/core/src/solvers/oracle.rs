use nalgebra::{DMatrix, DVector};

use super::{ProblemSpec, Solution, SolverKind, SolverParams};
use crate::error::{Error, Result};

/// Largest grid the oracle will enumerate (`2^14` candidate sets).
pub const ORACLE_MAX_N: usize = 14;

const KKT_SLACK: f64 = 1e-10;

/// Ground truth by exhaustive enumeration: every subset `S` of nodes is
/// tried as the coincidence set, the equality-constrained system is solved
/// by LU, and the unique candidate with `u ≥ ψ` and `Au − f ≥ 0` is
/// returned.
pub fn brute_force_oracle(spec: &ProblemSpec) -> Result<Solution> {
    let n = spec.n();
    if n > ORACLE_MAX_N {
        return Err(Error::InvalidInput(format!("oracle limited to n <= {ORACLE_MAX_N}, got {n}")));
    }
    let a = spec.op().to_dense();
    let (psi, f) = (spec.psi(), spec.f());

    let mut found: Option<Vec<f64>> = None;
    let mut candidates = 0;
    for mask in 0u32..(1u32 << n) {
        let active: Vec<bool> = (0..n).map(|i| mask & (1 << i) != 0).collect();
        let Some(u) = candidate(&a, psi, f, &active) else {
            continue;
        };
        let feasible = u.iter().zip(psi).all(|(u, p)| *u >= p - KKT_SLACK);
        let dual = (0..n).all(|i| {
            let r: f64 = (0..n).map(|j| a[(i, j)] * u[j]).sum::<f64>() - f[i];
            r >= -KKT_SLACK
        });
        if feasible && dual {
            candidates += 1;
            found = Some(u);
        }
    }
    match (candidates, found) {
        (1, Some(u)) => {
            let params = SolverParams::default();
            Solution::from_iterate(spec, u, 1 << n, SolverKind::Oracle, true, params.active_tol)
        }
        (c, _) => Err(Error::OracleAmbiguity { candidates: c }),
    }
}

fn candidate(a: &DMatrix<f64>, psi: &[f64], f: &[f64], active: &[bool]) -> Option<Vec<f64>> {
    let n = psi.len();
    let free: Vec<usize> = (0..n).filter(|&i| !active[i]).collect();
    let mut u: Vec<f64> = (0..n).map(|i| if active[i] { psi[i] } else { 0.0 }).collect();
    if free.is_empty() {
        return Some(u);
    }
    let m = free.len();
    let sub = DMatrix::from_fn(m, m, |p, q| a[(free[p], free[q])]);
    let rhs = DVector::from_fn(m, |p, _| {
        let i = free[p];
        f[i] - (0..n).filter(|&j| active[j]).map(|j| a[(i, j)] * psi[j]).sum::<f64>()
    });
    let x = sub.lu().solve(&rhs)?;
    for (p, &i) in free.iter().enumerate() {
        u[i] = x[p];
    }
    Some(u)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::operator::{FracLapOperator, Grid};

    fn spec(n: usize, psi: Vec<f64>) -> ProblemSpec {
        let op = FracLapOperator::assemble(Grid::new(0.0, 1.0, n).unwrap(), 0.5).unwrap();
        ProblemSpec::new(Arc::new(op), psi, vec![0.0; n]).unwrap()
    }

    #[test]
    fn trivial_instances() {
        let sol = brute_force_oracle(&spec(5, vec![-1.0; 5])).unwrap();
        assert_eq!(sol.u, vec![0.0; 5]);
        assert!(sol.active_set.is_empty());
        let sol = brute_force_oracle(&spec(5, vec![1.0; 5])).unwrap();
        assert_eq!(sol.u, vec![1.0; 5]);
        assert_eq!(sol.active_set, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn three_node_regression() {
        // s = 1/2 on (0,1), h = 1/4: W_1 = 16/(3π), D = 16/π, so the free
        // middle node sits at 2W_1/D = 2/3.
        let sol = brute_force_oracle(&spec(3, vec![1.0, -5.0, 1.0])).unwrap();
        assert_eq!(sol.active_set, vec![0, 2]);
        assert_eq!(sol.u[0], 1.0);
        assert_eq!(sol.u[2], 1.0);
        assert!((sol.u[1] - 2.0 / 3.0).abs() < 1e-15, "{}", sol.u[1]);
    }

    #[test]
    fn biactive_instance_is_ambiguous() {
        // ψ = 0, f = 0: every node is biactive (u = ψ and r = 0), so every
        // subset passes.
        assert!(matches!(
            brute_force_oracle(&spec(3, vec![0.0; 3])),
            Err(Error::OracleAmbiguity { candidates: 8 })
        ));
    }

    #[test]
    fn refuses_large_grids() {
        assert!(brute_force_oracle(&spec(15, vec![0.0; 15])).is_err());
    }
}
