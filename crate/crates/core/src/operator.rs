//! Discrete restricted fractional Laplacian on a uniform 1-D grid.
//!
//! The operator is the singular integral
//! `c(1,s) · p.v. ∫ (v(x) − v(y)) / |x − y|^{1+2s} dy` with `v = 0` outside
//! the interval. Each interior node owns a cell of width `h`; integrating
//! the kernel over cell `j` (as seen from node `i`) gives the coupling
//! weight `W_{|i−j|}`. The cell `|y − x| < h/2` is dropped; everything
//! beyond it, interior or exterior, is folded into the constant diagonal
//! through the closed-form tail of the kernel. The resulting matrix is a
//! symmetric Toeplitz M-matrix with strict diagonal dominance.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::vector::dot;

/// Uniform 1-D mesh of `(a, b)` with `n` interior nodes `x_i = a + i·h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    a: f64,
    b: f64,
    n: usize,
    h: f64,
}

impl Grid {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return Err(Error::Domain(format!("need finite a < b, got a = {a}, b = {b}")));
        }
        if n == 0 {
            return Err(Error::Domain("grid needs at least one interior node".into()));
        }
        Ok(Self { a, b, n, h: (b - a) / (n as f64 + 1.0) })
    }

    /// Builds a grid from explicit interior node positions. Only uniform
    /// spacings whose outer gaps also equal `h` are accepted.
    pub fn from_nodes(a: f64, b: f64, nodes: &[f64]) -> Result<Self> {
        let grid = Self::new(a, b, nodes.len())?;
        let scale = (b - a).abs().max(1.0);
        for (i, &x) in nodes.iter().enumerate() {
            if (x - grid.node(i)).abs() > 1e-12 * scale {
                return Err(Error::Domain(format!(
                    "node {i} at {x} breaks uniform spacing (expected {})",
                    grid.node(i)
                )));
            }
        }
        Ok(grid)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Number of interior nodes.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Position of interior node `i` (zero-based, so `x_0 = a + h`).
    pub fn node(&self, i: usize) -> f64 {
        self.a + (i as f64 + 1.0) * self.h
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Samples `g` at the interior nodes.
    pub fn sample(&self, g: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.n).map(|i| g(self.node(i))).collect()
    }
}

/// Normalization constant of the 1-D singular-integral fractional Laplacian,
/// `C(1,s) = 4^s Γ(1/2 + s) s / (√π Γ(1 − s))`.
pub fn kernel_constant(s: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!("order s must lie in (0,1), got {s}")));
    }
    Ok(4f64.powf(s) * gamma(0.5 + s) * s / (PI.sqrt() * gamma(1.0 - s)))
}

/// Assembled discrete `(−Δ)^s`: `A_ii = D`, `A_ij = −W_{|i−j|}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FracLapOperator {
    grid: Grid,
    s: f64,
    c_ker: f64,
    diag: f64,
    // weights[k - 1] = W_k, k = 1..n-1
    weights: Vec<f64>,
}

impl FracLapOperator {
    pub fn assemble(grid: Grid, s: f64) -> Result<Self> {
        let c_ker = kernel_constant(s)?;
        let mut op = Self { grid, s, c_ker, diag: 0.0, weights: Vec::new() };
        op.diag = 2.0 * op.tail(1);
        op.weights = (1..grid.n()).map(|k| op.weight_closed_form(k)).collect();
        Ok(op)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn h(&self) -> f64 {
        self.grid.h()
    }

    pub fn order(&self) -> f64 {
        self.s
    }

    pub fn kernel_constant(&self) -> f64 {
        self.c_ker
    }

    pub fn diag(&self) -> f64 {
        self.diag
    }

    /// Off-diagonal magnitudes `W_1..W_{n−1}`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `W_k` for `k ≥ 1`; zero for `k = 0`. Valid for any `k`, including
    /// distances beyond the grid.
    pub fn weight(&self, k: usize) -> f64 {
        match k {
            0 => 0.0,
            k if k < self.grid.n() => self.weights[k - 1],
            k => self.weight_closed_form(k),
        }
    }

    /// Kernel mass beyond distance `(k − ½)h` on one side:
    /// `(c/(2s)) · ((k − ½)h)^{−2s}`.
    pub fn tail(&self, k: usize) -> f64 {
        assert!(k >= 1, "tail is defined for k >= 1");
        let r = (k as f64 - 0.5) * self.grid.h();
        self.c_ker / (2.0 * self.s) * r.powf(-2.0 * self.s)
    }

    fn weight_closed_form(&self, k: usize) -> f64 {
        // tail(k) − tail(k+1) = tail(k)·(1 − ((k−½)/(k+½))^{2s}), written
        // with expm1/ln_1p so far weights keep full relative precision.
        let kf = k as f64;
        let log_ratio = (-1.0 / (kf + 0.5)).ln_1p();
        -self.tail(k) * (2.0 * self.s * log_ratio).exp_m1()
    }

    /// Exterior kernel mass of row `i`, `D − Σ_{j≠i} W_{|i−j|}`.
    pub fn row_margin(&self, i: usize) -> f64 {
        let n = self.grid.n();
        self.tail(i + 1) + self.tail(n - i)
    }

    /// `A v` by the direct Toeplitz sum.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        Error::check_len(self.n(), v.len())?;
        let mut out = vec![0.0; v.len()];
        self.apply_into(v, &mut out);
        Ok(out)
    }

    pub(crate) fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        let n = v.len();
        for i in 0..n {
            let mut acc = self.diag * v[i];
            for j in 0..i {
                acc -= self.weights[i - j - 1] * v[j];
            }
            for j in i + 1..n {
                acc -= self.weights[j - i - 1] * v[j];
            }
            out[i] = acc;
        }
    }

    /// `Σ_{j≠i} W_{|i−j|} v_j`, the off-diagonal coupling of row `i`.
    pub(crate) fn neighbor_sum(&self, v: &[f64], i: usize) -> f64 {
        let mut acc = 0.0;
        for j in 0..i {
            acc += self.weights[i - j - 1] * v[j];
        }
        for j in i + 1..v.len() {
            acc += self.weights[j - i - 1] * v[j];
        }
        acc
    }

    /// h-weighted pairing `⟨v, w⟩ = h · Σ v_i w_i`.
    pub fn pairing(&self, v: &[f64], w: &[f64]) -> Result<f64> {
        Error::check_len(self.n(), v.len())?;
        Error::check_len(self.n(), w.len())?;
        Ok(self.grid.h() * dot(v, w))
    }

    /// `⟨A v, w⟩` in the h-weighted pairing.
    pub fn bilinear(&self, v: &[f64], w: &[f64]) -> Result<f64> {
        let av = self.apply(v)?;
        self.pairing(&av, w)
    }

    /// `⟨A v, v⟩^{1/2}`, the discrete `‖(−Δ)^{s/2} v‖₂`.
    pub fn energy_norm(&self, v: &[f64]) -> Result<f64> {
        Ok(self.bilinear(v, v)?.max(0.0).sqrt())
    }

    /// `J(v) = ½⟨Av, v⟩ − ⟨f, v⟩`.
    pub fn energy(&self, v: &[f64], f: &[f64]) -> Result<f64> {
        Error::check_len(self.n(), f.len())?;
        let av = self.apply(v)?;
        Ok(self.grid.h() * (0.5 * dot(&av, v) - dot(f, v)))
    }

    /// Gershgorin bound `2D ≥ λ_max(A)`.
    pub fn lambda_max_bound(&self) -> f64 {
        2.0 * self.diag
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                self.diag
            } else {
                -self.weights[i.abs_diff(j) - 1]
            }
        })
    }
}
