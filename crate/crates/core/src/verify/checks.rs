use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{CheckId, Report, VerifyContext};
use crate::error::{Error, Result};
use crate::operator::FracLapOperator;
use crate::solvers::{self, kkt_violation, solve_linear, ProblemSpec, Solution, SolverKind, DENSE_LIMIT};
use crate::vector::{
    componentwise_max, componentwise_min, is_zero, max_value, negative_part, positive_part, sub, sup_norm,
};

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn solve_with(ctx: &VerifyContext, spec: &ProblemSpec) -> Result<Solution> {
    let kind = match ctx.solver {
        SolverKind::ActiveSet if spec.n() > DENSE_LIMIT => SolverKind::Psor,
        k => k,
    };
    solvers::solve(spec, kind, &ctx.params)
}

/// `ψ + |ξ|·(1 + ‖ψ‖_∞)` with `ξ` standard normal per node.
pub fn random_feasible_point(psi: &[f64], rng: &mut impl Rng) -> Vec<f64> {
    let scale = 1.0 + sup_norm(psi);
    psi.iter()
        .map(|p| {
            let z: f64 = rng.sample(StandardNormal);
            p + z.abs() * scale
        })
        .collect()
}

/// Feasibility, dual feasibility and complementarity within `tol`.
pub fn check_kkt(spec: &ProblemSpec, u: &[f64], tol: f64) -> Result<Report> {
    let r = spec.residual(u)?;
    let mut rep = Report::new(CheckId::Kkt, tol);
    let (worst, idx) = kkt_violation(spec.psi(), u, &r);
    rep.observe(worst, idx);
    rep.samples = u.len();
    Ok(rep.finish())
}

/// Which upper bound the residual `Au − f` is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LewyStampacchiaForm {
    /// `(A(ψ − ω_f)⁺)⁺`: the bound for the zero-forcing problem with
    /// obstacle `ψ − ω_f`, whose solution is `u − ω_f`.
    Reduced,
    /// `(A(ψ − ω_f)⁺ − f)⁺`. Agrees with `Reduced` when `f = 0`; fails when
    /// `f > 0` on the coincidence set.
    AsStated,
}

pub fn lewy_stampacchia_bound(spec: &ProblemSpec, form: LewyStampacchiaForm) -> Result<Vec<f64>> {
    let omega = solve_linear(spec.op(), spec.f())?;
    let lifted = positive_part(&sub(spec.psi(), &omega));
    let a_lifted = spec.op().apply(&lifted)?;
    Ok(match form {
        LewyStampacchiaForm::Reduced => positive_part(&a_lifted),
        LewyStampacchiaForm::AsStated => positive_part(&sub(&a_lifted, spec.f())),
    })
}

/// `0 ≤ Au − f ≤ (A(ψ − ω_f)⁺)⁺` componentwise within `tol`.
pub fn check_lewy_stampacchia(spec: &ProblemSpec, u: &[f64], tol: f64) -> Result<Report> {
    lewy_stampacchia(spec, u, tol, LewyStampacchiaForm::Reduced, CheckId::LewyStampacchia)
}

/// `0 ≤ Au − f ≤ (A(ψ − ω_f)⁺ − f)⁺` componentwise within `tol`.
pub fn check_lewy_stampacchia_as_stated(spec: &ProblemSpec, u: &[f64], tol: f64) -> Result<Report> {
    lewy_stampacchia(spec, u, tol, LewyStampacchiaForm::AsStated, CheckId::LewyStampacchiaAsStated)
}

fn lewy_stampacchia(
    spec: &ProblemSpec,
    u: &[f64],
    tol: f64,
    form: LewyStampacchiaForm,
    id: CheckId,
) -> Result<Report> {
    let r = spec.residual(u)?;
    let upper = lewy_stampacchia_bound(spec, form)?;
    let mut rep = Report::new(id, tol);
    for i in 0..r.len() {
        rep.observe((-r[i]).max(r[i] - upper[i]), i);
    }
    rep.samples = r.len();
    Ok(rep.finish())
}

/// Minty's form: `⟨Av − f, v − u⟩ ≥ −tol·(1 + ‖v‖)` for random feasible `v`.
pub fn check_minty(spec: &ProblemSpec, u: &[f64], samples: usize, tol: f64, seed: u64) -> Result<Report> {
    Error::check_len(spec.n(), u.len())?;
    let op = spec.op();
    let mut rng = rng(seed);
    let mut rep = Report::new(CheckId::Minty, tol);
    rep.seed = seed;
    rep.samples = samples;
    for k in 0..samples {
        let v = random_feasible_point(spec.psi(), &mut rng);
        let rv = sub(&op.apply(&v)?, spec.f());
        let pairing = op.pairing(&rv, &sub(&v, u))?;
        let norm = op.pairing(&v, &v)?.sqrt();
        rep.observe(-pairing / (1.0 + norm), k);
    }
    Ok(rep.finish())
}

/// Random supersolutions `U = A⁻¹(f + q)`, `q ≥ 0`, that happen to lie in
/// `K` must dominate `u`. Infeasible draws are skipped; if every draw is
/// infeasible the report is inconclusive.
pub fn check_smallest_supersolution(
    spec: &ProblemSpec,
    u: &[f64],
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<Report> {
    Error::check_len(spec.n(), u.len())?;
    let op = spec.op();
    let solver = solvers::LinearSolver::new(op)?;
    let mut rng = rng(seed);
    let mut rep = Report::new(CheckId::SmallestSupersolution, tol);
    rep.seed = seed;
    // q is scaled so that A⁻¹q spans a few decades around the obstacle size
    let base = (1.0 + sup_norm(spec.psi())) * op.diag();
    let mut feasible = 0;
    for k in 0..samples {
        let level = base * 10f64.powf(rng.random_range(-2.0..1.0));
        let rhs: Vec<f64> = spec
            .f()
            .iter()
            .map(|f| {
                let z: f64 = rng.sample(StandardNormal);
                f + z.abs() * level
            })
            .collect();
        let big_u = solver.solve(&rhs)?;
        if !spec.is_feasible(&big_u) {
            continue;
        }
        feasible += 1;
        for i in 0..u.len() {
            rep.observe(u[i] - big_u[i], k);
        }
    }
    rep.samples = feasible;
    rep.inconclusive = feasible == 0;
    rep.measured = Some((samples - feasible) as f64);
    Ok(rep.finish())
}

/// `f1 ≥ f2` implies `u1 ≥ u2`.
pub fn check_comparison_in_f(
    op: &std::sync::Arc<FracLapOperator>,
    psi: &[f64],
    f1: &[f64],
    f2: &[f64],
    ctx: &VerifyContext,
) -> Result<Report> {
    Error::check_len(f1.len(), f2.len())?;
    if f1.iter().zip(f2).any(|(a, b)| a < b) {
        return Err(Error::InvalidInput("comparison in f needs f1 >= f2".into()));
    }
    let s1 = ProblemSpec::new(op.clone(), psi.to_vec(), f1.to_vec())?;
    let s2 = s1.with_f(f2.to_vec())?;
    ordered(CheckId::ComparisonInF, &solve_with(ctx, &s1)?.u, &solve_with(ctx, &s2)?.u, ctx.tol)
}

/// `ψ1 ≥ ψ2` implies `u1 ≥ u2`.
pub fn check_comparison_in_psi(
    op: &std::sync::Arc<FracLapOperator>,
    f: &[f64],
    psi1: &[f64],
    psi2: &[f64],
    ctx: &VerifyContext,
) -> Result<Report> {
    Error::check_len(psi1.len(), psi2.len())?;
    if psi1.iter().zip(psi2).any(|(a, b)| a < b) {
        return Err(Error::InvalidInput("comparison in psi needs psi1 >= psi2".into()));
    }
    let s1 = ProblemSpec::new(op.clone(), psi1.to_vec(), f.to_vec())?;
    let s2 = s1.with_psi(psi2.to_vec())?;
    ordered(CheckId::ComparisonInPsi, &solve_with(ctx, &s1)?.u, &solve_with(ctx, &s2)?.u, ctx.tol)
}

fn ordered(id: CheckId, u1: &[f64], u2: &[f64], tol: f64) -> Result<Report> {
    let mut rep = Report::new(id, tol);
    for i in 0..u1.len() {
        rep.observe(u2[i] - u1[i], i);
    }
    rep.samples = u1.len();
    Ok(rep.finish())
}

/// `‖(u1 − u2)⁺‖_∞ ≤ ‖(ψ1 − ψ2)⁺‖_∞` and the same for negative parts.
pub fn check_linfty_dependence(
    op: &std::sync::Arc<FracLapOperator>,
    f: &[f64],
    psi1: &[f64],
    psi2: &[f64],
    ctx: &VerifyContext,
) -> Result<Report> {
    let s1 = ProblemSpec::new(op.clone(), psi1.to_vec(), f.to_vec())?;
    let s2 = s1.with_psi(psi2.to_vec())?;
    let u1 = solve_with(ctx, &s1)?.u;
    let u2 = solve_with(ctx, &s2)?.u;
    let du = sub(&u1, &u2);
    let dpsi = sub(psi1, psi2);
    let mut rep = Report::new(CheckId::LinftyDependence, ctx.tol);
    rep.observe(sup_norm(&positive_part(&du)) - sup_norm(&positive_part(&dpsi)), 0);
    rep.observe(sup_norm(&negative_part(&du)) - sup_norm(&negative_part(&dpsi)), 1);
    rep.samples = 2;
    Ok(rep.finish())
}

/// `ψ ∨ ω_f ≤ u` always, and `u ≤ ‖ψ⁺‖_∞` when `f = 0`. For nonzero `f`
/// the ratio `(max u − ‖ψ⁺‖_∞)⁺ / ‖f⁺‖_∞` is recorded in `measured`.
pub fn check_bounds_cinfty(spec: &ProblemSpec, u: &[f64], tol: f64) -> Result<Report> {
    Error::check_len(spec.n(), u.len())?;
    let omega = solve_linear(spec.op(), spec.f())?;
    let lower = componentwise_max(spec.psi(), &omega);
    let psi_plus_max = max_value(&positive_part(spec.psi()));
    let mut rep = Report::new(CheckId::BoundsCinfty, tol);
    for i in 0..u.len() {
        rep.observe(lower[i] - u[i], i);
    }
    if is_zero(spec.f()) {
        for i in 0..u.len() {
            rep.observe(u[i] - psi_plus_max, i);
        }
    } else {
        let f_plus = sup_norm(&positive_part(spec.f()));
        if f_plus > 0.0 {
            rep.measured = Some((max_value(u) - psi_plus_max).max(0.0) / f_plus);
        }
    }
    rep.samples = u.len();
    Ok(rep.finish())
}

/// Truncation inequalities on random sign-changing `v` and random levels
/// `m > 0`:
///
/// * `⟨Av⁺, v⁻⟩ = ⟨Av⁻, v⁺⟩ < 0`
/// * `⟨Av, v⁻⟩ + ⟨Av⁻, v⁻⟩ < 0`
/// * `⟨Av, v⁺⟩ − ⟨Av⁺, v⁺⟩ > 0`
/// * `⟨Av, (v+m)⁻⟩ + ⟨A(v+m)⁻, (v+m)⁻⟩ ≤ 0`
/// * `⟨Av, (v−m)⁺⟩ − ⟨A(v−m)⁺, (v−m)⁺⟩ ≥ 0`
/// * `⟨A(v∧m), v∧m⟩ ≤ ⟨Av, v⟩ − ⟨A(v−m)⁺, (v−m)⁺⟩`
///
/// Violations are scaled by `1 + ⟨A|v|, |v|⟩`. The first three are strict
/// and their smallest (scaled) margin is reported.
pub fn check_truncation_identities(op: &FracLapOperator, samples: usize, tol: f64, seed: u64) -> Result<Report> {
    let n = op.n();
    let mut rng = rng(seed);
    let mut rep = Report::new(CheckId::TruncationIdentities, tol);
    rep.seed = seed;
    rep.samples = samples;
    let form = |v: &[f64], w: &[f64]| op.bilinear(v, w);
    for k in 0..samples {
        let mut v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        if n >= 2 {
            // force a sign change
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            v[i] = v[i].abs().max(1e-3);
            v[j] = -v[j].abs().max(1e-3);
        }
        let vp = positive_part(&v);
        let vm = negative_part(&v);
        let abs_v: Vec<f64> = v.iter().map(|x| x.abs()).collect();
        let scale = 1.0 + form(&abs_v, &abs_v)?;

        let pm = form(&vp, &vm)?;
        let mp = form(&vm, &vp)?;
        let ii = form(&v, &vm)? + form(&vm, &vm)?;
        let iii = form(&v, &vp)? - form(&vp, &vp)?;
        rep.observe((pm - mp).abs() / scale, k);
        rep.observe(pm / scale, k);
        rep.observe(ii / scale, k);
        rep.observe(-iii / scale, k);
        if !is_zero(&vp) && !is_zero(&vm) {
            rep.observe_margin((-pm).min(-ii).min(iii) / scale);
        }

        let m = rng.random_range(0.0..1.0) * sup_norm(&v) + 1e-3;
        let shifted_neg = negative_part(&v.iter().map(|x| x + m).collect::<Vec<_>>());
        let shifted_pos = positive_part(&v.iter().map(|x| x - m).collect::<Vec<_>>());
        let capped = componentwise_min(&v, &vec![m; n]);
        let lm_i = form(&v, &shifted_neg)? + form(&shifted_neg, &shifted_neg)?;
        let lm_ii = form(&v, &shifted_pos)? - form(&shifted_pos, &shifted_pos)?;
        let lm_iii = form(&capped, &capped)? - form(&v, &v)? + form(&shifted_pos, &shifted_pos)?;
        rep.observe(lm_i / scale, k);
        rep.observe(-lm_ii / scale, k);
        rep.observe(lm_iii / scale, k);
    }
    Ok(rep.finish())
}
