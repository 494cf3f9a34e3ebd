//! Penalized obstacle problem `A u_ε = θ_ε(u_ε − ψ)·(Aψ)⁺` for zero
//! forcing and `ψ ≥ 0`, whose solution is squeezed between the obstacle
//! solution `u` and `u + ε`.
//!
//! General data is first reduced: `ψ̃ = ψ − ω_f`, then `ψ̃` is replaced by
//! `ψ̃⁺`, which leaves the zero-forcing obstacle solution unchanged.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{
    reduce_to_zero_forcing, solve_psor_from, LinearSolver, ProblemSpec, Solution, SolverKind, SolverParams,
};
use crate::error::{Error, Result};
use crate::vector::{positive_part, sub_inf_norm, sup_norm};

/// Cubic smoothstep cutoff: `θ_ε(t) = 1` for `t ≤ 0`, `0` for `t ≥ ε`,
/// `1 − 3τ² + 2τ³` with `τ = t/ε` in between.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SmoothStep {
    #[default]
    Cubic,
}

impl SmoothStep {
    pub fn value(&self, t: f64, eps: f64) -> f64 {
        if t <= 0.0 {
            1.0
        } else if t >= eps {
            0.0
        } else {
            let tau = t / eps;
            1.0 - tau * tau * (3.0 - 2.0 * tau)
        }
    }

    pub fn derivative(&self, t: f64, eps: f64) -> f64 {
        if t <= 0.0 || t >= eps {
            0.0
        } else {
            let tau = t / eps;
            6.0 * tau * (tau - 1.0) / eps
        }
    }

    /// `∫_0^t θ_ε`.
    pub fn antiderivative(&self, t: f64, eps: f64) -> f64 {
        if t <= 0.0 {
            t
        } else if t >= eps {
            0.5 * eps
        } else {
            let tau = t / eps;
            eps * (tau - tau.powi(3) + 0.5 * tau.powi(4))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PenaltyScheme {
    /// Newton on the convex potential with Armijo backtracking.
    #[default]
    Newton,
    /// `u ← (1−d)u + d·A⁻¹[θ_ε(u − ψ)(Aψ)⁺]`.
    Picard,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PenaltyParams {
    pub epsilon: f64,
    pub theta: SmoothStep,
    pub picard_damping: f64,
    pub max_outer: usize,
    pub scheme: PenaltyScheme,
}

impl Default for PenaltyParams {
    fn default() -> Self {
        Self {
            epsilon: 1e-3,
            theta: SmoothStep::Cubic,
            picard_damping: 1.0,
            max_outer: 20_000,
            scheme: PenaltyScheme::Newton,
        }
    }
}

impl PenaltyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidInput(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.picard_damping > 0.0 && self.picard_damping <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "picard_damping must lie in (0,1], got {}",
                self.picard_damping
            )));
        }
        if self.max_outer == 0 {
            return Err(Error::InvalidInput("max_outer must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyOutcome {
    /// Obstacle solution, computed by PSOR warm-started at `u_ε`.
    pub solution: Solution,
    /// Penalized solution in the original variables.
    pub u_eps: Vec<f64>,
    /// `max_i (u_ε − u)_i`.
    pub max_gap: f64,
    /// `min_i (u_ε − u)_i`.
    pub min_gap: f64,
    pub outer_iterations: usize,
    /// Largest `|A u_ε − θ_ε(u_ε − ψ)(Aψ)⁺|` at exit (reduced variables).
    pub penalty_residual: f64,
    /// Damping in use when the Picard loop stopped; 1 for Newton.
    pub damping: f64,
}

/// Solves the penalized problem and checks `u − 10·tol ≤ u_ε ≤ u + ε + 10·tol`.
pub fn solve_penalty(spec: &ProblemSpec, pp: &PenaltyParams, params: &SolverParams) -> Result<PenaltyOutcome> {
    pp.validate()?;
    params.validate()?;
    let op = spec.op();
    let reduction = reduce_to_zero_forcing(spec)?;
    let obstacle = positive_part(&reduction.psi_reduced);
    let source = positive_part(&op.apply(&obstacle)?);
    let factor = LinearSolver::new(op)?;
    let problem = Penalized { op: op.to_dense(), obstacle, source, eps: pp.epsilon, theta: pp.theta };

    let (w, outer_iterations, penalty_residual, damping) = match pp.scheme {
        PenaltyScheme::Newton => problem.newton(pp, params)?,
        PenaltyScheme::Picard => problem.picard(&factor, pp, params)?,
    };

    let u_eps = reduction.reconstruct(&w);
    let mut solution = solve_psor_from(spec, params, u_eps.clone())?;
    solution.solver = SolverKind::Penalty;
    solution.iterations += outer_iterations;

    let gap: Vec<f64> = u_eps.iter().zip(&solution.u).map(|(e, u)| e - u).collect();
    let max_gap = gap.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_gap = gap.iter().copied().fold(f64::INFINITY, f64::min);
    let slack = 10.0 * params.tol;
    let violation = (-min_gap - slack).max(max_gap - pp.epsilon - slack);
    if violation > 0.0 {
        return Err(Error::SandwichViolated { violation });
    }
    Ok(PenaltyOutcome { solution, u_eps, max_gap, min_gap, outer_iterations, penalty_residual, damping })
}

struct Penalized {
    op: DMatrix<f64>,
    obstacle: Vec<f64>,
    source: Vec<f64>,
    eps: f64,
    theta: SmoothStep,
}

impl Penalized {
    fn cutoff(&self, w: &[f64]) -> Vec<f64> {
        w.iter()
            .zip(&self.obstacle)
            .zip(&self.source)
            .map(|((w, p), g)| self.theta.value(w - p, self.eps) * g)
            .collect()
    }

    /// `F(w) = A w − θ_ε(w − p)·g`.
    fn residual(&self, w: &[f64]) -> Vec<f64> {
        let aw = &self.op * DVector::from_column_slice(w);
        let rhs = self.cutoff(w);
        aw.iter().zip(&rhs).map(|(a, b)| a - b).collect()
    }

    /// `Φ(w − αd) − Φ(w)` with `Φ(w) = ½ wᵀAw − Σ g_i Θ_ε(w_i − p_i)`,
    /// evaluated term by term so that small decreases stay resolved. `∇Φ = F`
    /// and `Φ` is strictly convex because `θ_ε` is nonincreasing.
    fn potential_change(&self, w: &[f64], d: &DVector<f64>, alpha: f64) -> f64 {
        let wv = DVector::from_column_slice(w);
        let ad = &self.op * d;
        let quad = -alpha * ad.dot(&wv) + 0.5 * alpha * alpha * ad.dot(d);
        let pen: f64 = (0..w.len())
            .map(|i| {
                let t = w[i] - self.obstacle[i];
                let g = self.source[i];
                g * (self.theta.antiderivative(t - alpha * d[i], self.eps) - self.theta.antiderivative(t, self.eps))
            })
            .sum();
        quad - pen
    }

    fn potential_scale(&self, w: &[f64]) -> f64 {
        let wv = DVector::from_column_slice(w);
        let quad = wv.dot(&(&self.op * &wv)).abs();
        let pen: f64 = (0..w.len())
            .map(|i| (self.source[i] * self.theta.antiderivative(w[i] - self.obstacle[i], self.eps)).abs())
            .sum();
        quad + pen
    }

    fn newton(&self, pp: &PenaltyParams, params: &SolverParams) -> Result<(Vec<f64>, usize, f64, f64)> {
        let n = self.obstacle.len();
        let mut w = self.obstacle.clone();
        let mut f = self.residual(&w);
        for it in 0..pp.max_outer {
            let norm = sup_norm(&f);
            if norm <= params.tol {
                return Ok((w, it, norm, 1.0));
            }
            let mut jac = self.op.clone();
            for i in 0..n {
                jac[(i, i)] -= self.theta.derivative(w[i] - self.obstacle[i], self.eps) * self.source[i];
            }
            let chol = jac
                .cholesky()
                .ok_or_else(|| Error::Numerical("penalty Jacobian is not positive definite".into()))?;
            let step = chol.solve(&DVector::from_column_slice(&f));
            let slope: f64 = -step.iter().zip(&f).map(|(d, g)| d * g).sum::<f64>();

            // below this the decrease of Φ is lost in rounding and the
            // residual norm serves as merit function
            let noise = 1e-13 * self.potential_scale(&w);
            let mut alpha = 1.0;
            let accepted = loop {
                let trial: Vec<f64> = w.iter().zip(step.iter()).map(|(w, d)| w - alpha * d).collect();
                let sufficient = if -slope <= noise {
                    sup_norm(&self.residual(&trial)) < norm
                } else {
                    self.potential_change(&w, &step, alpha) <= 1e-4 * alpha * slope
                };
                if sufficient {
                    break Some(trial);
                }
                alpha *= 0.5;
                if alpha < 1e-12 {
                    break None;
                }
            };
            match accepted {
                Some(trial) => w = trial,
                None => {
                    // no representable decrease left: take the full step
                    // and let the residual decide
                    w.iter_mut().zip(step.iter()).for_each(|(w, d)| *w -= d);
                }
            }
            f = self.residual(&w);
        }
        let violation = sup_norm(&f);
        if violation <= params.tol {
            return Ok((w, pp.max_outer, violation, 1.0));
        }
        Err(Error::IterationLimit { solver: SolverKind::Penalty, iterations: pp.max_outer, violation, best: w })
    }

    fn picard(
        &self,
        factor: &LinearSolver,
        pp: &PenaltyParams,
        params: &SolverParams,
    ) -> Result<(Vec<f64>, usize, f64, f64)> {
        const PATIENCE: usize = 50;
        const MAX_HALVINGS: usize = 4;
        let mut damping = pp.picard_damping;
        let mut halvings = 0;
        let mut w = self.obstacle.clone();
        let mut best = f64::INFINITY;
        let mut since_best = 0;
        for it in 0..pp.max_outer {
            let norm = sup_norm(&self.residual(&w));
            if norm <= params.tol {
                return Ok((w, it, norm, damping));
            }
            if norm < best * (1.0 - 1e-3) {
                best = norm;
                since_best = 0;
            } else {
                since_best += 1;
                if since_best >= PATIENCE {
                    if halvings == MAX_HALVINGS {
                        return Err(Error::IterationLimit {
                            solver: SolverKind::Penalty,
                            iterations: it,
                            violation: norm,
                            best: w,
                        });
                    }
                    halvings += 1;
                    damping *= 0.5;
                    since_best = 0;
                    best = norm;
                }
            }
            let target = factor.solve(&self.cutoff(&w))?;
            let change = sub_inf_norm(&target, &w);
            if change == 0.0 {
                return Ok((w, it, norm, damping));
            }
            w.iter_mut().zip(&target).for_each(|(w, t)| *w = (1.0 - damping) * *w + damping * t);
        }
        let violation = sup_norm(&self.residual(&w));
        Err(Error::IterationLimit { solver: SolverKind::Penalty, iterations: pp.max_outer, violation, best: w })
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::operator::{FracLapOperator, Grid};

    fn spec(n: usize, s: f64, psi: Vec<f64>) -> ProblemSpec {
        let op = FracLapOperator::assemble(Grid::new(0.0, 1.0, n).unwrap(), s).unwrap();
        ProblemSpec::new(Arc::new(op), psi, vec![0.0; n]).unwrap()
    }

    #[test]
    fn cutoff_profile() {
        let th = SmoothStep::Cubic;
        let eps = 0.2;
        assert_eq!(th.value(-1.0, eps), 1.0);
        assert_eq!(th.value(0.0, eps), 1.0);
        assert_eq!(th.value(eps, eps), 0.0);
        assert!((th.value(0.1, eps) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for k in 0..=100 {
            let t = -0.05 + 0.003 * k as f64;
            let v = th.value(t, eps);
            assert!((0.0..=1.0).contains(&v) && v <= prev);
            prev = v;
            // derivative by central differences
            let fd = (th.value(t + 1e-7, eps) - th.value(t - 1e-7, eps)) / 2e-7;
            assert!((fd - th.derivative(t, eps)).abs() < 1e-5);
            let fd = (th.antiderivative(t + 1e-7, eps) - th.antiderivative(t - 1e-7, eps)) / 2e-7;
            assert!((fd - v).abs() < 1e-6);
        }
    }

    #[test]
    fn negative_obstacle_gives_zero() {
        let out = solve_penalty(&spec(8, 0.5, vec![-1.0; 8]), &PenaltyParams::default(), &SolverParams::default())
            .unwrap();
        assert!(out.u_eps.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn unit_obstacle_sandwich() {
        let pp = PenaltyParams { epsilon: 1e-2, ..Default::default() };
        let out = solve_penalty(&spec(10, 0.5, vec![1.0; 10]), &pp, &SolverParams::default()).unwrap();
        for &x in &out.u_eps {
            assert!((1.0 - 1e-9..=1.0 + 1e-2 + 1e-9).contains(&x), "{x}");
        }
    }

    #[test]
    fn picard_agrees_with_newton_for_wide_cutoff() {
        let psi: Vec<f64> = (0..10).map(|i| 0.6 - ((i as f64 - 4.0) / 4.0).powi(2)).collect();
        let s = spec(10, 0.5, psi);
        let newton = PenaltyParams { epsilon: 0.1, ..Default::default() };
        let picard = PenaltyParams { scheme: PenaltyScheme::Picard, picard_damping: 0.05, ..newton };
        let a = solve_penalty(&s, &newton, &SolverParams::default()).unwrap();
        let b = solve_penalty(&s, &picard, &SolverParams::default()).unwrap();
        assert!(sub_inf_norm(&a.u_eps, &b.u_eps) < 1e-9);
    }

    #[test]
    fn rejects_bad_parameters() {
        let s = spec(4, 0.5, vec![0.5; 4]);
        for pp in [
            PenaltyParams { epsilon: 0.0, ..Default::default() },
            PenaltyParams { picard_damping: 1.5, ..Default::default() },
        ] {
            assert!(matches!(solve_penalty(&s, &pp, &SolverParams::default()), Err(Error::InvalidInput(_))));
        }
    }
}
