//! JSON result document and CSV tables.
//!
//! JSON schema (`schema_version` 1):
//!
//! | field | type |
//! |---|---|
//! | `schema_version` | integer |
//! | `command` | `"solve"`, `"verify"` or `"oracle-check"` |
//! | `config` | the effective [`RunConfig`] |
//! | `solver`, `converged`, `iterations`, `energy`, `kkt_violation` | solve metadata |
//! | `x`, `psi`, `f`, `u`, `residual` | node arrays |
//! | `active_set` | zero-based node indices |
//! | `fallback` | optional solver tag |
//! | `penalty` | optional `{epsilon, max_gap, min_gap, u_eps}` |
//! | `reports` | array of verification reports |
//! | `error` | optional message for failed solves |
//! | `timing_seconds` | wall-clock time, always the last field |
//!
//! Solve CSV columns: `x,psi,f,u,r,active`. Sweep CSV columns:
//! [`SWEEP_COLUMNS`]. Both start with a `# fracobs csv schema_version=1`
//! comment line. Floats are written with 17 significant digits.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::solvers::{ProblemSpec, Solution, SolverKind};
use crate::verify::Report;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltySummary {
    pub epsilon: f64,
    pub max_gap: f64,
    pub min_gap: f64,
    pub u_eps: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub schema_version: u32,
    pub command: String,
    pub config: RunConfig,
    pub solver: SolverKind,
    pub converged: bool,
    pub iterations: usize,
    pub energy: f64,
    pub kkt_violation: f64,
    pub x: Vec<f64>,
    pub psi: Vec<f64>,
    pub f: Vec<f64>,
    pub u: Vec<f64>,
    pub residual: Vec<f64>,
    pub active_set: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback: Option<SolverKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalty: Option<PenaltySummary>,
    #[serde(default)]
    pub reports: Vec<Report>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub timing_seconds: f64,
}

impl ResultRecord {
    pub fn from_solution(command: &str, config: &RunConfig, spec: &ProblemSpec, sol: &Solution) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            config: config.clone(),
            solver: sol.solver,
            converged: sol.converged,
            iterations: sol.iterations,
            energy: spec.energy(&sol.u).unwrap_or(f64::NAN),
            kkt_violation: sol.kkt_violation,
            x: spec.op().grid().nodes(),
            psi: spec.psi().to_vec(),
            f: spec.f().to_vec(),
            u: sol.u.clone(),
            residual: sol.residual.clone(),
            active_set: sol.active_set.clone(),
            fallback: sol.fallback,
            penalty: None,
            reports: Vec::new(),
            error: None,
            timing_seconds: 0.0,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("record serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn solve_csv(&self) -> String {
        let mut out = format!("# fracobs csv schema_version={SCHEMA_VERSION}\nx,psi,f,u,r,active\n");
        let mut active = vec![false; self.u.len()];
        for &i in &self.active_set {
            active[i] = true;
        }
        for i in 0..self.u.len() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                fmt_f64(self.x[i]),
                fmt_f64(self.psi[i]),
                fmt_f64(self.f[i]),
                fmt_f64(self.u[i]),
                fmt_f64(self.residual[i]),
                u8::from(active[i])
            );
        }
        out
    }
}

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

pub const SWEEP_COLUMNS: &[&str] = &[
    "axis",
    "value",
    "converged",
    "iterations",
    "energy",
    "kkt_violation",
    "kkt_pass",
    "max_gap",
    "min_gap",
    "sup_error",
    "sup_bound",
    "energy_error",
    "error",
];

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepRow {
    pub axis: String,
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
    pub energy: Option<f64>,
    pub kkt_violation: Option<f64>,
    pub kkt_pass: bool,
    pub max_gap: Option<f64>,
    pub min_gap: Option<f64>,
    pub sup_error: Option<f64>,
    pub sup_bound: Option<f64>,
    pub energy_error: Option<f64>,
    pub error: Option<String>,
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    let mut out = format!("# fracobs csv schema_version={SCHEMA_VERSION}\n{}\n", SWEEP_COLUMNS.join(","));
    for r in rows {
        let error = r.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.axis,
            fmt_f64(r.value),
            u8::from(r.converged),
            r.iterations,
            opt(r.energy),
            opt(r.kkt_violation),
            u8::from(r.kkt_pass),
            opt(r.max_gap),
            opt(r.min_gap),
            opt(r.sup_error),
            opt(r.sup_bound),
            opt(r.energy_error),
            error
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 123456789.12345679, f64::MIN_POSITIVE] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn sweep_csv_layout() {
        let rows = vec![SweepRow { axis: "s".into(), value: 0.5, converged: true, ..Default::default() }];
        let csv = sweep_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[1], SWEEP_COLUMNS.join(","));
        assert_eq!(lines[2].split(',').count(), SWEEP_COLUMNS.len());
    }
}
