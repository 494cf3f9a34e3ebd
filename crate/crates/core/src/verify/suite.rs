use rand::Rng;
use rand_distr::StandardNormal;

use super::checks::rng;
use super::*;
use crate::error::{Error, Result};
use crate::solvers::{brute_force_oracle, ProblemSpec};
use crate::vector::{sub_inf_norm, sup_norm};

/// Largest grid for which [`run_suite`] adds the oracle comparison.
pub const SUITE_ORACLE_MAX_N: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    pub ctx: VerifyContext,
    pub seed: u64,
    pub minty_samples: usize,
    pub supersolution_samples: usize,
    pub truncation_samples: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            ctx: VerifyContext::default(),
            seed: 0,
            minty_samples: 200,
            supersolution_samples: 200,
            truncation_samples: 100,
        }
    }
}

/// `‖u − u_oracle‖_∞ ≤ tol`. A degenerate instance gives an inconclusive
/// report.
pub fn check_oracle_agreement(spec: &ProblemSpec, u: &[f64], tol: f64) -> Result<Report> {
    let mut rep = Report::new(CheckId::OracleAgreement, tol);
    rep.samples = 1;
    match brute_force_oracle(spec) {
        Ok(sol) => rep.observe(sub_inf_norm(u, &sol.u), 0),
        Err(Error::OracleAmbiguity { .. }) => rep.inconclusive = true,
        Err(e) => return Err(e),
    }
    Ok(rep.finish())
}

/// Every checker on one solved instance. Comparison and dependence checks
/// use randomly perturbed copies of the instance's own data.
pub fn run_suite(spec: &ProblemSpec, u: &[f64], opts: &SuiteOptions) -> Result<Vec<Report>> {
    let ctx = &opts.ctx;
    let tol = ctx.tol;
    let seed = opts.seed;
    let op = spec.op_arc();
    let n = spec.n();
    let mut reports = vec![
        check_kkt(spec, u, tol)?,
        check_lewy_stampacchia(spec, u, tol)?,
        {
            let mut r = check_lewy_stampacchia_as_stated(spec, u, tol)?;
            r.asserted = false;
            r
        },
        check_minty(spec, u, opts.minty_samples, tol, seed)?,
        check_smallest_supersolution(spec, u, opts.supersolution_samples, tol, seed.wrapping_add(1))?,
        check_bounds_cinfty(spec, u, tol)?,
        check_truncation_identities(spec.op(), opts.truncation_samples, tol, seed.wrapping_add(2))?,
    ];

    let mut rng = rng(seed.wrapping_add(3));
    let f_scale = 1.0 + sup_norm(spec.f());
    let f_up: Vec<f64> = spec
        .f()
        .iter()
        .map(|f| f + rng.sample::<f64, _>(StandardNormal).abs() * f_scale)
        .collect();
    reports.push(check_comparison_in_f(op, spec.psi(), &f_up, spec.f(), ctx)?);

    let psi_scale = 0.25 * (1.0 + sup_norm(spec.psi()));
    let psi_up: Vec<f64> = spec
        .psi()
        .iter()
        .map(|p| p + rng.sample::<f64, _>(StandardNormal).abs() * psi_scale)
        .collect();
    reports.push(check_comparison_in_psi(op, spec.f(), &psi_up, spec.psi(), ctx)?);

    let psi_other: Vec<f64> = spec
        .psi()
        .iter()
        .map(|p| p + rng.sample::<f64, _>(StandardNormal) * psi_scale)
        .collect();
    reports.push(check_linfty_dependence(op, spec.f(), spec.psi(), &psi_other, ctx)?);

    if n <= SUITE_ORACLE_MAX_N {
        reports.push(check_oracle_agreement(spec, u, 1e-7)?);
    }
    for r in &mut reports {
        r.seed = seed;
    }
    Ok(reports)
}
