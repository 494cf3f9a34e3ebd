use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::{ProblemSpec, SolverKind, DENSE_LIMIT};
use crate::error::{Error, Result};
use crate::operator::FracLapOperator;
use crate::vector::{dot, is_zero, sub};

const CG_RTOL: f64 = 1e-13;

/// Cholesky factorization of the full operator, reusable across solves.
pub struct LinearSolver {
    factor: Cholesky<f64, Dyn>,
    n: usize,
}

impl LinearSolver {
    pub fn new(op: &FracLapOperator) -> Result<Self> {
        Self::from_matrix(op.to_dense())
    }

    pub(crate) fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        let factor = m
            .cholesky()
            .ok_or_else(|| Error::Numerical("matrix is not positive definite".into()))?;
        Ok(Self { factor, n })
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        Error::check_len(self.n, rhs.len())?;
        let x = self.factor.solve(&DVector::from_column_slice(rhs));
        Ok(x.as_slice().to_vec())
    }
}

/// `ω_f = A⁻¹ f`: dense Cholesky up to `DENSE_LIMIT` nodes, conjugate
/// gradients beyond.
pub fn solve_linear(op: &FracLapOperator, f: &[f64]) -> Result<Vec<f64>> {
    Error::check_len(op.n(), f.len())?;
    if f.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("forcing must be finite".into()));
    }
    if is_zero(f) {
        return Ok(vec![0.0; f.len()]);
    }
    if op.n() <= DENSE_LIMIT {
        let solver = LinearSolver::new(op)?;
        let mut x = solver.solve(f)?;
        // one step of iterative refinement
        let r = sub(f, &op.apply(&x)?);
        let dx = solver.solve(&r)?;
        x.iter_mut().zip(&dx).for_each(|(x, d)| *x += d);
        Ok(x)
    } else {
        solve_linear_cg(op, f, CG_RTOL, 10 * op.n())
    }
}

/// Conjugate gradients on `A x = f` until `‖f − Ax‖ ≤ rtol·‖f‖`.
pub fn solve_linear_cg(op: &FracLapOperator, f: &[f64], rtol: f64, max_iter: usize) -> Result<Vec<f64>> {
    Error::check_len(op.n(), f.len())?;
    let n = f.len();
    let mut x = vec![0.0; n];
    let mut r = f.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let target = rtol * dot(f, f).sqrt();
    let mut rr = dot(&r, &r);
    if rr.sqrt() <= target {
        return Ok(x);
    }
    for _ in 0..max_iter {
        op.apply_into(&p, &mut ap);
        let alpha = rr / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= target {
            return Ok(x);
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    Err(Error::IterationLimit {
        solver: SolverKind::Linear,
        iterations: max_iter,
        violation: rr.sqrt() / dot(f, f).sqrt(),
        best: x,
    })
}

/// Splitting `u = ũ + ω_f`, where `ũ` solves the obstacle problem for
/// `ψ̃ = ψ − ω_f` with zero forcing.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroForcingReduction {
    pub psi_reduced: Vec<f64>,
    pub shift: Vec<f64>,
}

impl ZeroForcingReduction {
    pub fn reduced_spec(&self, spec: &ProblemSpec) -> Result<ProblemSpec> {
        ProblemSpec::new(spec.op_arc().clone(), self.psi_reduced.clone(), vec![0.0; spec.n()])
    }

    /// Maps a solution of the reduced problem back to the original one.
    pub fn reconstruct(&self, reduced_u: &[f64]) -> Vec<f64> {
        reduced_u.iter().zip(&self.shift).map(|(u, w)| u + w).collect()
    }
}

pub fn reduce_to_zero_forcing(spec: &ProblemSpec) -> Result<ZeroForcingReduction> {
    let shift = solve_linear(spec.op(), spec.f())?;
    let psi_reduced = sub(spec.psi(), &shift);
    Ok(ZeroForcingReduction { psi_reduced, shift })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;
    use std::sync::Arc;

    use super::*;
    use crate::operator::Grid;

    #[test]
    fn one_node_half_order() {
        // h = 0.5, D = 8/π
        let op = FracLapOperator::assemble(Grid::new(0.0, 1.0, 1).unwrap(), 0.5).unwrap();
        let w = solve_linear(&op, &[1.0]).unwrap();
        assert!((w[0] - PI / 8.0).abs() < 1e-15);
    }

    #[test]
    fn zero_forcing_gives_zero() {
        let op = FracLapOperator::assemble(Grid::new(0.0, 1.0, 7).unwrap(), 0.4).unwrap();
        assert_eq!(solve_linear(&op, &[0.0; 7]).unwrap(), vec![0.0; 7]);
    }

    #[test]
    fn cg_matches_cholesky() {
        let op = FracLapOperator::assemble(Grid::new(0.0, 1.0, 40).unwrap(), 0.75).unwrap();
        let f: Vec<f64> = (0..40).map(|i| ((i * 7 % 11) as f64 - 5.0) / 3.0).collect();
        let a = solve_linear(&op, &f).unwrap();
        let b = solve_linear_cg(&op, &f, 1e-14, 1000).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn cg_reports_iteration_limit() {
        let op = FracLapOperator::assemble(Grid::new(0.0, 1.0, 40).unwrap(), 0.75).unwrap();
        let f: Vec<f64> = (0..40).map(|i| (i as f64).sin()).collect();
        match solve_linear_cg(&op, &f, 1e-14, 2) {
            Err(Error::IterationLimit { best, iterations: 2, .. }) => assert_eq!(best.len(), 40),
            other => panic!("expected iteration limit, got {other:?}"),
        }
    }

    #[test]
    fn reduction_of_homogeneous_problem_is_identity() {
        let op = Arc::new(FracLapOperator::assemble(Grid::new(0.0, 1.0, 5).unwrap(), 0.5).unwrap());
        let psi = vec![0.1, -0.2, 0.3, 0.0, 1.0];
        let spec = ProblemSpec::new(op, psi.clone(), vec![0.0; 5]).unwrap();
        let red = reduce_to_zero_forcing(&spec).unwrap();
        assert_eq!(red.psi_reduced, psi);
        assert_eq!(red.shift, vec![0.0; 5]);
    }

    #[test]
    fn obstacle_equal_to_free_solution_reduces_to_zero() {
        let op = Arc::new(FracLapOperator::assemble(Grid::new(0.0, 1.0, 6).unwrap(), 0.5).unwrap());
        let f = vec![1.0, 2.0, -1.0, 0.5, 0.0, 3.0];
        let w = solve_linear(&op, &f).unwrap();
        let spec = ProblemSpec::new(op, w, f).unwrap();
        let red = reduce_to_zero_forcing(&spec).unwrap();
        assert!(red.psi_reduced.iter().all(|&x| x == 0.0));
    }
}
