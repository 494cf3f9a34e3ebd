use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use super::config::{RunConfig, SweepAxis};
use super::record::{sweep_csv, PenaltySummary, ResultRecord, SweepRow};
use super::{EXIT_CONFIG, EXIT_OK, EXIT_SOLVER, EXIT_VERIFY};
use crate::error::{Error, Result};
use crate::solvers::{self, solve_penalty, ProblemSpec, Solution, SolverKind, ORACLE_MAX_N};
use crate::vector::{sub, sup_norm};
use crate::verify::{
    self, bump, check_kkt, check_oracle_agreement, CheckId, Report, SuiteOptions, VerifyContext,
};

/// Everything a command produces; [`CommandOutput::emit`] writes it out.
#[derive(Debug, Clone, Default)]
pub struct CommandOutput {
    pub exit_code: i32,
    pub record: Option<ResultRecord>,
    pub json_path: Option<PathBuf>,
    /// Print the JSON record to stdout when no path is given.
    pub json_to_stdout: bool,
    pub csv: Option<String>,
    pub csv_path: Option<PathBuf>,
    pub csv_to_stdout: bool,
    pub summary: String,
    pub stderr: String,
}

impl CommandOutput {
    fn config_error(e: &Error) -> Self {
        Self { exit_code: EXIT_CONFIG, stderr: format!("fracobs: {e}\n"), ..Default::default() }
    }

    pub fn emit(&self) -> Result<()> {
        if let Some(rec) = &self.record {
            match &self.json_path {
                Some(p) => std::fs::write(p, rec.to_json())?,
                None if self.json_to_stdout => print!("{}", rec.to_json()),
                None => {}
            }
        }
        if let Some(csv) = &self.csv {
            match &self.csv_path {
                Some(p) => std::fs::write(p, csv)?,
                None if self.csv_to_stdout => print!("{csv}"),
                None => {}
            }
        }
        print!("{}", self.summary);
        eprint!("{}", self.stderr);
        Ok(())
    }
}

struct Solved {
    spec: ProblemSpec,
    record: ResultRecord,
    failed: bool,
}

fn solve_config(command: &str, cfg: &RunConfig) -> Result<Solved> {
    let spec = cfg.problem()?;
    let params = cfg.solver_params();
    let method = cfg.solver.method;
    let start = Instant::now();
    let (outcome, penalty) = if method == SolverKind::Penalty {
        match solve_penalty(&spec, &cfg.penalty_params(), &params) {
            Ok(out) => {
                let summary = PenaltySummary {
                    epsilon: cfg.penalty_params().epsilon,
                    max_gap: out.max_gap,
                    min_gap: out.min_gap,
                    u_eps: out.u_eps.clone(),
                };
                (Ok(out.solution), Some(summary))
            }
            Err(e) => (Err(e), None),
        }
    } else {
        (solvers::solve(&spec, method, &params), None)
    };
    let elapsed = start.elapsed().as_secs_f64();

    let (sol, error) = match outcome {
        Ok(sol) => (sol, None),
        Err(e) => {
            let (u, iterations) = match &e {
                Error::IterationLimit { best, iterations, .. } => (best.clone(), *iterations),
                _ => (spec.default_start(), 0),
            };
            let sol = Solution::from_iterate(&spec, u, iterations, method, false, params.active_tol)?;
            (sol, Some(e.to_string()))
        }
    };
    let mut record = ResultRecord::from_solution(command, cfg, &spec, &sol);
    record.penalty = penalty;
    record.timing_seconds = elapsed;
    let failed = error.is_some();
    record.error = error;
    Ok(Solved { spec, record, failed })
}

pub fn cmd_solve(cfg: &RunConfig) -> CommandOutput {
    let solved = match solve_config("solve", cfg) {
        Ok(s) => s,
        Err(e) => return CommandOutput::config_error(&e),
    };
    let csv = cfg.output.csv.as_ref().map(|_| solved.record.solve_csv());
    CommandOutput {
        exit_code: if solved.failed { EXIT_SOLVER } else { EXIT_OK },
        stderr: solved.record.error.as_ref().map(|e| format!("fracobs: {e}\n")).unwrap_or_default(),
        record: Some(solved.record),
        json_path: cfg.output.json.clone(),
        json_to_stdout: true,
        csv,
        csv_path: cfg.output.csv.clone(),
        ..Default::default()
    }
}

/// Moves one node below the obstacle.
fn corrupt(spec: &ProblemSpec, u: &mut [f64]) {
    let i = u.len() / 2;
    u[i] = spec.psi()[i] - (1.0 + sup_norm(spec.psi()));
}

pub fn cmd_verify(cfg: &RunConfig, inject_corruption: bool) -> CommandOutput {
    let mut solved = match solve_config("verify", cfg) {
        Ok(s) => s,
        Err(e) => return CommandOutput::config_error(&e),
    };
    let mut out = CommandOutput { json_path: cfg.output.json.clone(), ..Default::default() };
    if solved.failed {
        out.exit_code = EXIT_SOLVER;
        out.stderr = format!("fracobs: {}\n", solved.record.error.as_deref().unwrap_or("solver failed"));
        out.record = Some(solved.record);
        return out;
    }
    let spec = &solved.spec;
    let rec = &mut solved.record;
    if inject_corruption {
        corrupt(spec, &mut rec.u);
        let sol = Solution::from_iterate(spec, rec.u.clone(), rec.iterations, rec.solver, rec.converged, cfg.solver.active_tol);
        match sol {
            Ok(sol) => {
                rec.residual = sol.residual;
                rec.active_set = sol.active_set;
                rec.kkt_violation = sol.kkt_violation;
                rec.energy = spec.energy(&rec.u).unwrap_or(f64::NAN);
            }
            Err(e) => return CommandOutput::config_error(&e),
        }
    }
    let opts = SuiteOptions {
        ctx: VerifyContext { params: cfg.solver_params(), ..Default::default() },
        seed: cfg.seed,
        ..Default::default()
    };
    let mut reports = match verify::run_suite(spec, &rec.u, &opts) {
        Ok(r) => r,
        Err(e) => {
            out.exit_code = EXIT_SOLVER;
            out.stderr = format!("fracobs: verification solve failed: {e}\n");
            out.record = Some(solved.record);
            return out;
        }
    };
    if let Some(p) = &rec.penalty {
        reports.push(sandwich_report(&rec.u, p, cfg.solver.tol));
    }
    out.summary = summary_table(&reports);
    out.exit_code = if reports.iter().all(Report::gates_ok) { EXIT_OK } else { EXIT_VERIFY };
    rec.reports = reports;
    out.record = Some(solved.record);
    out
}

fn sandwich_report(u: &[f64], p: &PenaltySummary, tol: f64) -> Report {
    let slack = 10.0 * tol;
    let gap = sub(&p.u_eps, u);
    let mut worst = (0.0f64, 0usize);
    for (i, g) in gap.iter().enumerate() {
        let v = (-g).max(g - p.epsilon).max(0.0);
        if v > worst.0 {
            worst = (v, i);
        }
    }
    Report {
        check: CheckId::PenaltySandwich,
        passed: worst.0 <= slack,
        worst_violation: worst.0,
        worst_index: worst.1,
        samples: gap.len(),
        seed: 0,
        tolerance: slack,
        inconclusive: false,
        margin: None,
        measured: Some(p.max_gap),
        asserted: true,
    }
}

pub fn summary_table(reports: &[Report]) -> String {
    let mut s = format!("{:<28} {:<8} {:>14} {:>10} {:>8}\n", "check", "status", "worst", "tolerance", "samples");
    for r in reports {
        let status = match (r.passed, r.inconclusive, r.asserted) {
            (_, true, _) => "INCONCL",
            (true, _, _) => "PASS",
            (false, _, true) => "FAIL",
            (false, _, false) => "LOGGED",
        };
        let _ = writeln!(
            s,
            "{:<28} {:<8} {:>14.6e} {:>10.1e} {:>8}",
            r.check.as_str(),
            status,
            r.worst_violation,
            r.tolerance,
            r.samples
        );
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRequest {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

impl SweepRequest {
    /// Command-line values override the config's `[sweep]` section.
    pub fn resolve(cfg: &RunConfig, axis: Option<&str>, values: Option<Vec<f64>>) -> Result<Self> {
        let axis = match axis {
            Some(a) => a.parse()?,
            None => cfg
                .sweep
                .as_ref()
                .map(|s| s.axis)
                .ok_or_else(|| Error::Config("sweep needs an axis (--axis or [sweep].axis)".into()))?,
        };
        let values = values.or_else(|| cfg.sweep.as_ref().map(|s| s.values.clone())).unwrap_or_default();
        if values.is_empty() {
            return Err(Error::Config("sweep axis has no values".into()));
        }
        let increasing = values.windows(2).all(|w| w[1] > w[0]);
        let decreasing = values.windows(2).all(|w| w[1] < w[0]);
        if !(increasing || decreasing) {
            return Err(Error::Config("sweep values must be strictly monotone".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("sweep values must be finite".into()));
        }
        if axis == SweepAxis::N && values.iter().any(|v| *v < 1.0 || v.fract() != 0.0) {
            return Err(Error::Config("n values must be positive integers".into()));
        }
        Ok(Self { axis, values })
    }
}

pub fn cmd_sweep(cfg: &RunConfig, req: &SweepRequest) -> CommandOutput {
    let baseline = if req.axis == SweepAxis::Delta { Some(delta_baseline(cfg)) } else { None };
    let rows: Vec<SweepRow> = req
        .values
        .iter()
        .map(|&v| {
            let mut row = SweepRow { axis: req.axis.as_str().to_string(), value: v, ..Default::default() };
            if let Err(e) = sweep_point(cfg, req.axis, v, baseline.as_ref(), &mut row) {
                row.converged = false;
                row.error = Some(e.to_string());
            }
            row
        })
        .collect();
    let failed = rows.iter().any(|r| r.error.is_some());
    CommandOutput {
        exit_code: if failed { EXIT_SOLVER } else { EXIT_OK },
        csv: Some(sweep_csv(&rows)),
        csv_path: cfg.output.csv.clone(),
        csv_to_stdout: true,
        ..Default::default()
    }
}

type Baseline = std::result::Result<(Vec<f64>, Vec<f64>), String>;

/// Unperturbed solution and the perturbation profile for the delta axis.
fn delta_baseline(cfg: &RunConfig) -> Baseline {
    let run = || -> Result<(Vec<f64>, Vec<f64>)> {
        let spec = cfg.problem()?;
        let sol = solvers::solve(&spec, cfg.solver.method, &cfg.solver_params())?;
        let (a, b) = (cfg.domain.a, cfg.domain.b);
        Ok((sol.u, bump(spec.op().grid(), 0.5 * (a + b), 0.25 * (b - a))))
    };
    run().map_err(|e| e.to_string())
}

fn sweep_point(cfg: &RunConfig, axis: SweepAxis, v: f64, baseline: Option<&Baseline>, row: &mut SweepRow) -> Result<()> {
    let mut cfg = cfg.clone();
    match axis {
        SweepAxis::S => cfg.domain.s = v,
        SweepAxis::N => cfg.domain.n = v as usize,
        SweepAxis::Epsilon => {
            let mut pp = cfg.penalty_params();
            pp.epsilon = v;
            cfg.penalty = Some(pp);
        }
        SweepAxis::Delta => {}
    }
    cfg.validate()?;
    let mut spec = cfg.problem()?;
    let params = cfg.solver_params();
    if let Some(base) = baseline {
        let (_, pert) = base.as_ref().map_err(|e| Error::InvalidInput(format!("baseline solve failed: {e}")))?;
        let psi: Vec<f64> = spec.psi().iter().zip(pert).map(|(p, q)| p + v * q).collect();
        spec = spec.with_psi(psi)?;
    }
    let sol = if axis == SweepAxis::Epsilon {
        let out = solve_penalty(&spec, &cfg.penalty_params(), &params)?;
        row.max_gap = Some(out.max_gap);
        row.min_gap = Some(out.min_gap);
        out.solution
    } else {
        solvers::solve(&spec, cfg.solver.method, &params)?
    };
    if let Some(Ok((u0, pert))) = baseline {
        let e = sub(&sol.u, u0);
        row.sup_error = Some(sup_norm(&e));
        row.sup_bound = Some(v.abs() * sup_norm(pert));
        row.energy_error = Some(spec.op().energy_norm(&e)?);
    }
    row.converged = sol.converged;
    row.iterations = sol.iterations;
    row.energy = Some(spec.energy(&sol.u)?);
    row.kkt_violation = Some(sol.kkt_violation);
    row.kkt_pass = check_kkt(&spec, &sol.u, verify::DEFAULT_TOL)?.passed;
    Ok(())
}

pub fn cmd_oracle_check(cfg: &RunConfig) -> CommandOutput {
    if cfg.domain.n > ORACLE_MAX_N {
        return CommandOutput::config_error(&Error::Config(format!(
            "oracle-check needs n <= {ORACLE_MAX_N}, config has n = {}",
            cfg.domain.n
        )));
    }
    let mut solved = match solve_config("oracle-check", cfg) {
        Ok(s) => s,
        Err(e) => return CommandOutput::config_error(&e),
    };
    let mut out = CommandOutput { json_path: cfg.output.json.clone(), json_to_stdout: true, ..Default::default() };
    if solved.failed {
        out.exit_code = EXIT_SOLVER;
        out.record = Some(solved.record);
        return out;
    }
    match check_oracle_agreement(&solved.spec, &solved.record.u, 1e-7) {
        Ok(rep) => {
            out.exit_code = if rep.inconclusive {
                solved.record.error = Some("oracle found no unique KKT point".into());
                EXIT_SOLVER
            } else if rep.passed {
                EXIT_OK
            } else {
                EXIT_VERIFY
            };
            solved.record.reports.push(rep);
        }
        Err(e) => {
            out.exit_code = EXIT_SOLVER;
            solved.record.error = Some(e.to_string());
        }
    }
    out.record = Some(solved.record);
    out
}
