//! Hankel operators of shifted reflection symbols and their regularized
//! reproducing kernels.
//!
//! For the symbol `f = s₊ t^{2n}` the operator `f ↦ P₊ t̄(s₊ t^{2n} f)(t̄)` acts on
//! the monomial basis of `H²` by the matrix `a_{-2n-(j+k+1)}`, with `a_k` the
//! Fourier coefficients of `s₊`.

use crate::error::{Error, Result};
use crate::harmonic::{CircleFunction, Spectrum};
use crate::linalg::{cholesky_solve, sym_eigenvalues};
use crate::C64;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent f64 math is only present when std is linked
use num_traits::Float;

/// Default regularization ladder, run down to `1e-12`.
pub const DEFAULT_EPS_LADDER: [f64; 11] =
    [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9, 1e-10, 1e-11, 1e-12];

/// Relative change between the last two ladder rungs that certifies convergence.
pub const LADDER_TOL: f64 = 1e-7;

/// Anti-diagonals below this fraction of the largest are treated as zero when
/// sizing the active block.
const ACTIVE_CUTOFF: f64 = 1e-15;

/// Truncated Hankel matrix, stored by anti-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelOperator {
    n_shift: i64,
    trunc: usize,
    /// `h[d] = a_{-2n-(d+1)}` for `d = j + k < 2M - 1`.
    h: Vec<f64>,
}

impl HankelOperator {
    /// Builds directly from anti-diagonal values.
    pub fn from_antidiagonals(n_shift: i64, trunc: usize, h: Vec<f64>) -> Result<Self> {
        if h.len() != 2 * trunc - 1 {
            return Err(Error::Invalid("need 2M-1 anti-diagonals".into()));
        }
        Ok(HankelOperator { n_shift, trunc, h })
    }

    pub fn n_shift(&self) -> i64 {
        self.n_shift
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    pub fn antidiagonals(&self) -> &[f64] {
        &self.h
    }

    pub fn entry(&self, j: usize, k: usize) -> f64 {
        self.h[j + k]
    }

    /// Dense row-major `M × M` matrix.
    pub fn matrix(&self) -> Vec<f64> {
        let m = self.trunc;
        let mut a = vec![0.0; m * m];
        for j in 0..m {
            for k in 0..m {
                a[j * m + k] = self.h[j + k];
            }
        }
        a
    }

    /// Smallest `r` with every entry outside the leading `r × r` block negligible.
    pub fn active_size(&self) -> usize {
        let scale = self.h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return 0;
        }
        match self.h.iter().rposition(|v| v.abs() > ACTIVE_CUTOFF * scale) {
            Some(d) => (d + 1).min(self.trunc),
            None => 0,
        }
    }

    /// `H v` for a coefficient vector of length `M`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let m = self.trunc;
        (0..m).map(|j| (0..m).map(|k| self.h[j + k] * v[k]).sum()).collect()
    }

    /// Eigenvalues of the symmetric truncation, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        sym_eigenvalues(&self.matrix(), self.trunc)
    }

    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues().iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Hankel matrix of `s₊ t^{2n}` truncated to `M × M`. Coefficients beyond the
/// grid's range are taken as zero.
pub fn build_hankel(s_plus: &CircleFunction, n_shift: i64, trunc: usize) -> Result<HankelOperator> {
    hankel_from_spectrum(&s_plus.analyze(), n_shift, trunc)
}

/// As [`build_hankel`] from precomputed coefficients.
pub fn hankel_from_spectrum(spec: &Spectrum, n_shift: i64, trunc: usize) -> Result<HankelOperator> {
    if trunc == 0 || trunc > spec.grid().len() / 4 {
        return Err(Error::Invalid(alloc::format!(
            "truncation {trunc} must lie in 1..={}",
            spec.grid().len() / 4
        )));
    }
    let imag = spec.max_imag();
    if imag > 1e-10 {
        return Err(Error::SymbolAsymmetry { max_imag: imag });
    }
    let h = (0..2 * trunc - 1)
        .map(|d| spec.get(-2 * n_shift - (d as i64 + 1)).re)
        .collect();
    Ok(HankelOperator { n_shift, trunc, h })
}

/// `k = lim (ε + I + H)^{-1} e₀` in the monomial basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ReproducingKernel {
    pub coeffs: Vec<f64>,
    pub value_at_zero: f64,
    /// `(ε, k_ε(0))` for every rung that was solved.
    pub eps_trace: Vec<(f64, f64)>,
}

impl ReproducingKernel {
    /// The kernel of the zero operator.
    pub fn unit() -> Self {
        ReproducingKernel { coeffs: vec![1.0], value_at_zero: 1.0, eps_trace: Vec::new() }
    }

    /// `K(0) = √k(0)`.
    pub fn normalized_at_zero(&self) -> f64 {
        self.value_at_zero.sqrt()
    }

    /// Coefficients of `K = k/√k(0)`.
    pub fn normalized_coeffs(&self) -> Vec<f64> {
        let c = 1.0 / self.value_at_zero.sqrt();
        self.coeffs.iter().map(|v| v * c).collect()
    }

    /// `K` on a grid.
    pub fn normalized_on(&self, grid: crate::harmonic::CircleGrid) -> CircleFunction {
        let c = self.normalized_coeffs();
        CircleFunction::from_fn(grid, |t| eval_poly(&c, t))
    }

    /// `K(ζ)` at any point.
    pub fn normalized_at(&self, zeta: C64) -> C64 {
        eval_poly(&self.normalized_coeffs(), zeta)
    }
}

fn eval_poly(c: &[f64], z: C64) -> C64 {
    c.iter().rev().fold(C64::new(0.0, 0.0), |acc, v| acc * z + *v)
}

/// Runs the regularization ladder and returns the solution at its last rung.
/// Only the active block of `H` is factorized; the complement contributes nothing.
pub fn reproducing_kernel(h: &HankelOperator, eps_ladder: &[f64]) -> Result<ReproducingKernel> {
    if eps_ladder.is_empty() || eps_ladder.windows(2).any(|w| !(w[1] < w[0])) || eps_ladder[0] <= 0.0 {
        return Err(Error::Invalid("eps ladder must be positive and decreasing".into()));
    }
    let r = h.active_size();
    if r == 0 {
        // (ε + I)^{-1} e₀ has the exact limit e₀
        let trace = eps_ladder.iter().map(|e| (*e, 1.0 / (1.0 + e))).collect();
        return Ok(ReproducingKernel { coeffs: vec![1.0], value_at_zero: 1.0, eps_trace: trace });
    }
    let mut a = vec![0.0; r * r];
    for j in 0..r {
        for k in 0..r {
            a[j * r + k] = h.entry(j, k);
        }
    }
    let mut rhs = vec![0.0; r];
    rhs[0] = 1.0;
    let mut trace = Vec::with_capacity(eps_ladder.len());
    let mut last = None;
    for &eps in eps_ladder {
        let mut b = a.clone();
        for i in 0..r {
            b[i * r + i] += 1.0 + eps;
        }
        match cholesky_solve(&b, r, &rhs) {
            Some(x) => {
                trace.push((eps, x[0]));
                last = Some(x);
            }
            None => return Err(Error::NoConvergence { trace }),
        }
    }
    let x = last.expect("ladder is nonempty");
    let n = trace.len();
    if n >= 2 {
        let (a0, a1) = (trace[n - 2].1, trace[n - 1].1);
        if (a1 - a0).abs() > LADDER_TOL * a1.abs() {
            return Err(Error::NoConvergence { trace });
        }
    }
    if !(x[0] > 0.0) {
        return Err(Error::NoConvergence { trace });
    }
    Ok(ReproducingKernel { value_at_zero: x[0], coeffs: x, eps_trace: trace })
}

/// Smallest singular value of `I + H` at the operator's truncation.
pub fn min_singular(h: &HankelOperator) -> f64 {
    let r = h.active_size();
    if r == 0 {
        return 1.0;
    }
    let mut a = vec![0.0; r * r];
    for j in 0..r {
        for k in 0..r {
            a[j * r + k] = h.entry(j, k) + if j == k { 1.0 } else { 0.0 };
        }
    }
    let block = sym_eigenvalues(&a, r).iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    // the complement of the active block is the identity
    if r < h.trunc() {
        block.min(1.0)
    } else {
        block
    }
}
