#![allow(dead_code)]

use std::sync::Arc;

use fracobs::{FracLapOperator, Grid, ProblemSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub const ORDERS: [f64; 3] = [0.25, 0.5, 0.75];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn normals(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| normal(rng)).collect()
}

pub fn operator(a: f64, b: f64, n: usize, s: f64) -> Arc<FracLapOperator> {
    Arc::new(FracLapOperator::assemble(Grid::new(a, b, n).unwrap(), s).unwrap())
}

/// n in 6..=12, s drawn from `ORDERS`, Gaussian obstacle and forcing on (-1, 1).
pub fn random_instance(seed: u64) -> ProblemSpec {
    let mut r = rng(seed);
    let n = r.random_range(6..=12);
    let s = ORDERS[r.random_range(0..3)];
    random_instance_with(&mut r, n, s)
}

pub fn random_instance_with(r: &mut ChaCha8Rng, n: usize, s: f64) -> ProblemSpec {
    let op = operator(-1.0, 1.0, n, s);
    let psi: Vec<f64> = normals(r, n).into_iter().map(|z| 0.5 * z).collect();
    let f = normals(r, n);
    ProblemSpec::new(op, psi, f).unwrap()
}

/// Obstacle `ψ ≥ 0` with zero forcing.
pub fn random_nonnegative_instance(seed: u64, n: usize) -> ProblemSpec {
    let mut r = rng(seed);
    let s = ORDERS[r.random_range(0..3)];
    let op = operator(0.0, 1.0, n, s);
    let psi: Vec<f64> = normals(&mut r, n).into_iter().map(|z| z.abs()).collect();
    ProblemSpec::new(op, psi, vec![0.0; n]).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
