//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use common::{normals, operator, random_instance, random_nonnegative_instance, rng, ORDERS};
use fracobs::solvers::{brute_force_oracle, solve, solve_penalty, PenaltyParams};
use fracobs::vector::sub;
use fracobs::verify::{
    bump, check_bounds_cinfty, check_comparison_in_f, check_comparison_in_psi, check_kkt, check_lewy_stampacchia,
    check_lewy_stampacchia_as_stated, check_linfty_dependence, check_minty, check_truncation_identities,
    run_obstacle_convergence, VerifyContext,
};
use fracobs::{kernel_constant, Error, ProblemSpec, Solution, SolverKind, SolverParams};
use rand::Rng;

const ORACLE_AGREEMENT_TOL: f64 = 1e-7;
const KKT_TOL: f64 = 1e-8;
const LS_TOL: f64 = 1e-8;
const SANDWICH_SLACK: f64 = 1e-7;
const LINFTY_TOL: f64 = 1e-8;
const COMPARISON_TOL: f64 = 1e-8;
const MINTY_TOL: f64 = 1e-8;
const BOUNDS_TOL: f64 = 1e-8;
const TRUNCATION_TOL: f64 = 1e-12;
const CONVERGENCE_SUP_SLACK: f64 = 1e-10;
const CONVERGENCE_FINAL_ENERGY: f64 = 1e-6;
const TELESCOPING_TOL: f64 = 1e-13;
const SYMMETRY_TOL: f64 = 1e-12;
const KERNEL_CONSTANT_TOL: f64 = 1e-12;
const ORACLE_RUNTIME_SECONDS: f64 = 60.0;

const SOLVERS: [SolverKind; 3] = [SolverKind::Psor, SolverKind::ProjectedGradient, SolverKind::ActiveSet];

struct Outcome {
    label: &'static str,
    passed: bool,
    detail: String,
}

fn outcome(label: &'static str, passed: bool, detail: String) -> Outcome {
    Outcome { label, passed, detail }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

struct Instance {
    spec: ProblemSpec,
    solutions: Vec<Solution>,
}

/// 100 non-degenerate random instances; ambiguous draws are replaced by the next seed.
fn oracle_instances() -> (Vec<Instance>, Outcome) {
    let start = Instant::now();
    let params = SolverParams::default();
    let mut instances = Vec::new();
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    let mut skipped = 0;
    let mut seed = 0;
    while instances.len() < 100 {
        let spec = random_instance(seed);
        seed += 1;
        let oracle = match brute_force_oracle(&spec) {
            Ok(sol) => sol,
            Err(Error::OracleAmbiguity { .. }) => {
                skipped += 1;
                continue;
            }
            Err(e) => panic!("oracle failed on seed {}: {e}", seed - 1),
        };
        let mut solutions = Vec::new();
        for kind in SOLVERS {
            match solve(&spec, kind, &params) {
                Ok(sol) => {
                    let d = max_abs_diff(&sol.u, &oracle.u);
                    worst = worst.max(d);
                    failures += usize::from(d > ORACLE_AGREEMENT_TOL);
                    solutions.push(sol);
                }
                Err(_) => failures += 1,
            }
        }
        instances.push(Instance { spec, solutions });
    }
    let elapsed = start.elapsed().as_secs_f64();
    let passed = failures == 0 && elapsed < ORACLE_RUNTIME_SECONDS;
    let detail = format!(
        "{} instances x {} solvers, {failures} disagreements, worst |u - u_oracle| = {worst:.3e}, \
         {skipped} ambiguous draws replaced, {elapsed:.1} s",
        instances.len(),
        SOLVERS.len()
    );
    (instances, outcome("oracle equivalence", passed, detail))
}

fn preset_problems(n: usize) -> Vec<ProblemSpec> {
    let mut out = Vec::new();
    for s in ORDERS {
        let op = operator(-1.0, 1.0, n, s);
        let grid = *op.grid();
        let psis = [
            grid.sample(|x| 0.5 - 2.0 * x * x),
            grid.sample(|x| if (-0.4..=0.3).contains(&x) { 0.7 } else { -0.7 }),
            vec![-0.4; n],
        ];
        let fs = [vec![0.0; n], vec![0.8; n], grid.sample(|x| 0.5 * (std::f64::consts::PI * (x + 1.0) / 2.0).sin())];
        for psi in &psis {
            for f in &fs {
                out.push(ProblemSpec::new(op.clone(), psi.clone(), f.clone()).unwrap());
            }
        }
    }
    out
}

fn criterion_kkt(instances: &[Instance]) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    let mut count = 0;
    for inst in instances {
        for sol in &inst.solutions {
            let rep = check_kkt(&inst.spec, &sol.u, KKT_TOL).unwrap();
            worst = worst.max(rep.worst_violation);
            failures += usize::from(!rep.passed);
            count += 1;
        }
    }
    let params = SolverParams::default();
    for spec in preset_problems(128) {
        for kind in [SolverKind::Psor, SolverKind::ActiveSet] {
            let sol = solve(&spec, kind, &params).unwrap();
            let rep = check_kkt(&spec, &sol.u, KKT_TOL).unwrap();
            worst = worst.max(rep.worst_violation);
            failures += usize::from(!rep.passed);
            count += 1;
        }
    }
    outcome(
        "KKT / complementarity",
        failures == 0,
        format!("{count} solutions (incl. n = 128 presets), {failures} failures, worst violation {worst:.3e}"),
    )
}

fn criterion_lewy_stampacchia(instances: &[Instance]) -> (Outcome, Outcome) {
    let (mut stated_fail, mut reduced_fail) = (0, 0);
    let (mut stated_worst, mut reduced_worst): (f64, f64) = (0.0, 0.0);
    for inst in instances {
        let u = &inst.solutions[2].u;
        let stated = check_lewy_stampacchia_as_stated(&inst.spec, u, LS_TOL).unwrap();
        let reduced = check_lewy_stampacchia(&inst.spec, u, LS_TOL).unwrap();
        stated_fail += usize::from(!stated.passed);
        reduced_fail += usize::from(!reduced.passed);
        stated_worst = stated_worst.max(stated.worst_violation);
        reduced_worst = reduced_worst.max(reduced.worst_violation);
    }
    let n = instances.len();
    (
        outcome(
            "Lewy-Stampacchia, 0 <= r <= (A(psi - w_f)+ - f)+",
            stated_fail == 0,
            format!("{stated_fail}/{n} instances violate, worst excess {stated_worst:.3e}"),
        ),
        outcome(
            "Lewy-Stampacchia, companion bound 0 <= r <= (A(psi - w_f)+)+",
            reduced_fail == 0,
            format!("{reduced_fail}/{n} instances violate, worst excess {reduced_worst:.3e}"),
        ),
    )
}

fn criterion_penalty() -> Outcome {
    let params = SolverParams::default();
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let spec = random_nonnegative_instance(500 + seed, 10);
        let u = solve(&spec, SolverKind::ActiveSet, &params).unwrap().u;
        let mut previous = f64::INFINITY;
        for eps in [1e-1, 1e-2, 1e-3] {
            let pp = PenaltyParams { epsilon: eps, ..Default::default() };
            let u_eps = match solve_penalty(&spec, &pp, &params) {
                Ok(out) => out.u_eps,
                Err(e) => {
                    failures.push(format!("seed {seed} eps {eps}: {e}"));
                    continue;
                }
            };
            let gap = sub(&u_eps, &u);
            let below = gap.iter().map(|g| -g - SANDWICH_SLACK).fold(f64::MIN, f64::max);
            let above = gap.iter().map(|g| g - eps - SANDWICH_SLACK).fold(f64::MIN, f64::max);
            worst = worst.max(below.max(above) + SANDWICH_SLACK);
            if below > 0.0 || above > 0.0 {
                failures.push(format!("seed {seed} eps {eps}: sandwich"));
            }
            let max_gap = gap.iter().copied().fold(f64::MIN, f64::max);
            if max_gap > previous {
                failures.push(format!("seed {seed} eps {eps}: max gap increased"));
            }
            previous = max_gap;
        }
    }
    outcome(
        "penalty sandwich u <= u_eps <= u + eps",
        failures.is_empty(),
        format!("20 instances x 3 eps, {} failures, worst excursion {worst:.3e} {:?}", failures.len(), failures),
    )
}

fn random_op(r: &mut impl Rng) -> std::sync::Arc<fracobs::FracLapOperator> {
    let n = r.random_range(6..=16);
    operator(-1.0, 1.0, n, ORDERS[r.random_range(0..3)])
}

fn criterion_linfty() -> Outcome {
    let ctx = VerifyContext { tol: LINFTY_TOL, ..Default::default() };
    let mut r = rng(5);
    let (mut failures, mut worst) = (0, f64::MIN);
    for _ in 0..100 {
        let op = random_op(&mut r);
        let n = op.n();
        let f = normals(&mut r, n);
        let psi1 = normals(&mut r, n);
        let psi2 = normals(&mut r, n);
        let rep = check_linfty_dependence(&op, &f, &psi1, &psi2, &ctx).unwrap();
        failures += usize::from(!rep.passed);
        worst = worst.max(rep.worst_violation);
    }
    outcome("L-infinity dependence on the obstacle", failures == 0, format!("100 pairs, {failures} failures, worst {worst:.3e}"))
}

fn criterion_comparison() -> Outcome {
    let ctx = VerifyContext { tol: COMPARISON_TOL, ..Default::default() };
    let mut r = rng(6);
    let (mut fail_f, mut fail_psi, mut worst) = (0, 0, 0.0f64);
    for _ in 0..50 {
        let op = random_op(&mut r);
        let n = op.n();
        let psi = normals(&mut r, n);
        let f2 = normals(&mut r, n);
        let f1: Vec<f64> = f2.iter().zip(normals(&mut r, n)).map(|(f, z)| f + z.abs()).collect();
        let rep = check_comparison_in_f(&op, &psi, &f1, &f2, &ctx).unwrap();
        fail_f += usize::from(!rep.passed);
        worst = worst.max(rep.worst_violation);

        let f = normals(&mut r, n);
        let psi2 = normals(&mut r, n);
        let psi1: Vec<f64> = psi2.iter().zip(normals(&mut r, n)).map(|(p, z)| p + z.abs()).collect();
        let rep = check_comparison_in_psi(&op, &f, &psi1, &psi2, &ctx).unwrap();
        fail_psi += usize::from(!rep.passed);
        worst = worst.max(rep.worst_violation);
    }
    outcome(
        "comparison in f and in psi",
        fail_f + fail_psi == 0,
        format!("50 + 50 ordered pairs, {fail_f} + {fail_psi} failures, worst {worst:.3e}"),
    )
}

fn criterion_minty(instances: &[Instance]) -> Outcome {
    let (mut failures, mut worst) = (0, 0.0f64);
    for (k, inst) in instances.iter().take(20).enumerate() {
        let rep = check_minty(&inst.spec, &inst.solutions[0].u, 1000, MINTY_TOL, k as u64).unwrap();
        failures += usize::from(!rep.passed);
        worst = worst.max(rep.worst_violation);
    }
    outcome("Minty certificate", failures == 0, format!("20 instances x 1000 samples, {failures} failures, worst {worst:.3e}"))
}

fn criterion_bounds() -> Outcome {
    let mut r = rng(8);
    let params = SolverParams::default();
    let (mut failures, mut worst) = (0, 0.0f64);
    for _ in 0..100 {
        let op = random_op(&mut r);
        let n = op.n();
        let spec = ProblemSpec::new(op, normals(&mut r, n), vec![0.0; n]).unwrap();
        let u = solve(&spec, SolverKind::Psor, &params).unwrap().u;
        let rep = check_bounds_cinfty(&spec, &u, BOUNDS_TOL).unwrap();
        failures += usize::from(!rep.passed);
        worst = worst.max(rep.worst_violation);
    }
    outcome("f = 0 bounds psi+ <= u <= max psi+", failures == 0, format!("100 obstacles, {failures} failures, worst {worst:.3e}"))
}

fn criterion_truncation() -> Outcome {
    let mut lines = Vec::new();
    let mut passed = true;
    for (k, s) in ORDERS.into_iter().enumerate() {
        let op = operator(0.0, 1.0, 20, s);
        let rep = check_truncation_identities(&op, 500, TRUNCATION_TOL, k as u64).unwrap();
        let margin = rep.margin.unwrap_or(f64::NAN);
        passed &= rep.passed && margin > 0.0;
        lines.push(format!("s={s}: worst {:.2e}, margin {margin:.2e}", rep.worst_violation));
    }
    outcome("truncation inequalities", passed, format!("500 vectors per order; {}", lines.join("; ")))
}

fn criterion_convergence() -> Outcome {
    let op = operator(0.0, 1.0, 32, 0.5);
    let psi = op.grid().sample(|x| 0.5 - 8.0 * (x - 0.5) * (x - 0.5));
    let pert = bump(op.grid(), 0.5, 0.25);
    let schedule: Vec<f64> = (1..=10).map(|k| 0.5f64.powi(k)).collect();
    let ctx = VerifyContext { tol: CONVERGENCE_SUP_SLACK, ..Default::default() };
    let rep = run_obstacle_convergence(&op, &vec![0.0; 32], &psi, &pert, &schedule, &ctx).unwrap();
    let last = rep.final_energy_error();
    let passed = rep.bound_ok && rep.monotone_flag && last < CONVERGENCE_FINAL_ENERGY;
    outcome(
        "obstacle-perturbation convergence",
        passed,
        format!(
            "sup bound {}, energy errors nonincreasing {}, final energy error {last:.3e} (needs < {CONVERGENCE_FINAL_ENERGY:e})",
            if rep.bound_ok { "holds" } else { "violated" },
            rep.monotone_flag
        ),
    )
}

fn criterion_operator() -> Outcome {
    let mut problems = Vec::new();
    let mut r = rng(11);
    let mut cases = 0;
    for s in [0.05, 0.25, 0.5, 0.75, 0.95] {
        for (a, b, n) in [(0.0, 1.0, 1), (0.0, 1.0, 9), (-1.0, 1.0, 64), (-10.0, 10.0, 128), (0.0, 0.01, 33)] {
            cases += 1;
            let op = operator(a, b, n, s);
            let dense = op.to_dense();
            for i in 0..n {
                let off: f64 = (0..n).filter(|&j| j != i).map(|j| dense[(i, j)].abs()).sum();
                if (0..n).any(|j| j != i && dense[(i, j)] > 0.0) {
                    problems.push(format!("positive off-diagonal s={s} n={n}"));
                }
                let margin = dense[(i, i)] - off;
                if !(margin > 0.0 && margin >= op.tail(n) * (1.0 - 1e-12)) {
                    problems.push(format!("dominance margin s={s} n={n} row {i}"));
                }
            }
            let mut partial = 0.0;
            for m in 1..n {
                partial += op.weight(m);
                if (partial - (op.tail(1) - op.tail(m + 1))).abs() > TELESCOPING_TOL * op.tail(1) {
                    problems.push(format!("telescoping s={s} n={n} m={m}"));
                }
            }
            for _ in 0..100 {
                let v = normals(&mut r, n);
                let w = normals(&mut r, n);
                let lhs = op.pairing(&op.apply(&v).unwrap(), &w).unwrap();
                let rhs = op.pairing(&v, &op.apply(&w).unwrap()).unwrap();
                let scale = op.lambda_max_bound() * op.pairing(&v, &v).unwrap().sqrt() * op.pairing(&w, &w).unwrap().sqrt();
                if (lhs - rhs).abs() > SYMMETRY_TOL * scale {
                    problems.push(format!("symmetry s={s} n={n}"));
                }
                if op.bilinear(&v, &v).unwrap() <= 0.0 {
                    problems.push(format!("definiteness s={s} n={n}"));
                }
            }
        }
    }
    let c = kernel_constant(0.5).unwrap();
    if (c - 1.0 / std::f64::consts::PI).abs() > KERNEL_CONSTANT_TOL {
        problems.push(format!("kernel_constant(1/2) = {c:e}"));
    }
    outcome(
        "operator M-matrix structure",
        problems.is_empty(),
        format!("{cases} (s, n, h) combinations, {} problems {:?}", problems.len(), problems.iter().take(5).collect::<Vec<_>>()),
    )
}

fn criterion_cli() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_fracobs");
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bump.toml");
    std::fs::write(&cfg, include_str!("golden/solve_bump.toml")).unwrap();
    let cfg = cfg.to_str().unwrap();
    let run = |args: &[&str]| Command::new(bin).args(args).output().unwrap();
    let strip = |b: &[u8]| {
        String::from_utf8_lossy(b)
            .lines()
            .filter(|l| !l.trim_start().starts_with("\"timing_seconds\""))
            .collect::<Vec<_>>()
            .join("\n")
    };
    let mut problems = Vec::new();
    let first = run(&["solve", "--config", cfg]);
    let second = run(&["solve", "--config", cfg]);
    if first.status.code() != Some(0) {
        problems.push("solve exit".to_string());
    }
    if strip(&first.stdout) != strip(&second.stdout) {
        problems.push("json not byte stable".into());
    }
    let golden = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/solve_bump.json")).unwrap();
    if strip(&first.stdout) != golden {
        problems.push("json differs from golden file".into());
    }
    let codes = [
        (vec!["verify", "--config", cfg], 0),
        (vec!["verify", "--config", cfg, "--inject-corruption"], 4),
        (vec!["solve", "--config", "/nonexistent.toml"], 2),
        (vec!["sweep", "--config", cfg, "--axis", "s"], 2),
        (vec!["oracle-check", "--config", cfg], 0),
    ];
    for (args, code) in codes {
        let got = run(&args).status.code();
        if got != Some(code) {
            problems.push(format!("{args:?}: exit {got:?}, expected {code}"));
        }
    }
    let slow = dir.path().join("slow.toml");
    std::fs::write(&slow, format!("{}\n[solver]\nmax_iter = 1\n", include_str!("golden/solve_bump.toml"))).unwrap();
    if run(&["solve", "--config", slow.to_str().unwrap()]).status.code() != Some(3) {
        problems.push("solver failure exit".into());
    }
    outcome("CLI contract", problems.is_empty(), format!("exit codes 0/2/3/4, golden JSON; problems {problems:?}"))
}

fn main() {
    let start = Instant::now();
    let (instances, c1) = oracle_instances();
    let c2 = criterion_kkt(&instances);
    let (c3, c3b) = criterion_lewy_stampacchia(&instances);
    let results = [
        ("1", c1),
        ("2", c2),
        ("3", c3),
        ("3b", c3b),
        ("4", criterion_penalty()),
        ("5", criterion_linfty()),
        ("6", criterion_comparison()),
        ("7", criterion_minty(&instances)),
        ("8", criterion_bounds()),
        ("9", criterion_truncation()),
        ("10", criterion_convergence()),
        ("11", criterion_operator()),
        ("12", criterion_cli()),
    ];
    println!();
    let mut failed = Vec::new();
    for (id, o) in &results {
        println!("criterion {id:>3} {} {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.label, o.detail);
        if !o.passed && *id != "3b" {
            failed.push(*id);
        }
    }
    println!("acceptance: {} failed {:?}, {:.1} s", failed.len(), failed, start.elapsed().as_secs_f64());
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
