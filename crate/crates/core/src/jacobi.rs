//! Doubly-infinite Jacobi operators that are free outside a finite window:
//! half-line Weyl functions, the 2×2 resolvent on `{e_{-1}, e_0}`, orthonormal
//! polynomials, the spectral density and off-interval eigenvalue detection.
//!
//! Convention: `J e_n = p_n e_{n-1} + q_n e_n + p_{n+1} e_{n+1}`, so `p_n` couples
//! sites `n-1` and `n`. The plus half-line is `n ≥ 0`, the minus half-line is
//! `n ≤ -1` read in the order `e_{-1}, e_{-2}, …`.

use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::C64;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // inherent f64 math is only present when std is linked
use num_traits::Float;

/// Jacobi coefficients on the window `n_min ..= n_min + len - 1`, free elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiOperator {
    n_min: i64,
    p: Vec<f64>,
    q: Vec<f64>,
}

impl JacobiOperator {
    pub fn new(n_min: i64, p: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        if p.len() != q.len() {
            return Err(Error::Invalid("p and q must have equal length".into()));
        }
        if let Some(i) = p.iter().position(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::Invalid(alloc::format!(
                "p must be positive (index {})",
                n_min + i as i64
            )));
        }
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("q must be finite".into()));
        }
        Ok(JacobiOperator { n_min, p, q })
    }

    pub fn free() -> Self {
        JacobiOperator { n_min: 0, p: Vec::new(), q: Vec::new() }
    }

    pub fn n_min(&self) -> i64 {
        self.n_min
    }

    /// Last window index; `n_min - 1` for an empty window.
    pub fn n_max(&self) -> i64 {
        self.n_min + self.p.len() as i64 - 1
    }

    pub fn is_free_window(&self) -> bool {
        self.p.is_empty()
    }

    pub fn p(&self, n: i64) -> f64 {
        if n >= self.n_min && n <= self.n_max() {
            self.p[(n - self.n_min) as usize]
        } else {
            1.0
        }
    }

    pub fn q(&self, n: i64) -> f64 {
        if n >= self.n_min && n <= self.n_max() {
            self.q[(n - self.n_min) as usize]
        } else {
            0.0
        }
    }

    pub fn p_window(&self) -> &[f64] {
        &self.p
    }

    pub fn q_window(&self) -> &[f64] {
        &self.q
    }

    /// Same operator re-expressed on the window `lo ..= hi` (must cover the current one).
    pub fn on_window(&self, lo: i64, hi: i64) -> Self {
        let p = (lo..=hi).map(|n| self.p(n)).collect();
        let q = (lo..=hi).map(|n| self.q(n)).collect();
        JacobiOperator { n_min: lo, p, q }
    }

    /// Largest coefficient difference over the union of both windows.
    pub fn max_coeff_diff(&self, o: &Self) -> f64 {
        let lo = self.n_min.min(o.n_min);
        let hi = self.n_max().max(o.n_max());
        (lo..=hi)
            .map(|n| (self.p(n) - o.p(n)).abs().max((self.q(n) - o.q(n)).abs()))
            .fold(0.0, f64::max)
    }

    /// Upper bound for the operator norm.
    pub fn norm_bound(&self) -> f64 {
        let pm = self.p.iter().fold(1.0f64, |m, v| m.max(*v));
        let qm = self.q.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        2.0 * pm + qm
    }
}

/// Half-line selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

/// Recurrence coefficients of a half-line read from its first site outward:
/// diagonal `b_k`, coupling `a_k` between the `(k-1)`-th and `k`-th sites.
fn half_line(side: Side, j: &JacobiOperator, k: i64) -> (f64, f64) {
    match side {
        Side::Plus => (j.q(k), j.p(k)),
        Side::Minus => (j.q(-k - 1), j.p(-k)),
    }
}

/// Number of half-line sites after which the coefficients are free.
fn half_line_len(side: Side, j: &JacobiOperator) -> i64 {
    if j.is_free_window() {
        return 0;
    }
    match side {
        Side::Plus => (j.n_max() + 1).max(0),
        Side::Minus => (-j.n_min()).max(0),
    }
}

const POLE_TOL: f64 = 1e-14;

/// Weyl function of a half-line at `z(ζ) = ζ + 1/ζ`, as a finite continued
/// fraction terminated with the free value `-ζ`.
pub fn weyl_half_line(side: Side, j: &JacobiOperator, zeta: C64) -> Result<C64> {
    if zeta.norm() > 1.0 + 1e-12 || zeta.norm() == 0.0 {
        return Err(Error::Invalid("weyl_half_line needs 0 < |ζ| ≤ 1".into()));
    }
    let z = zeta + zeta.inv();
    let len = half_line_len(side, j);
    let mut r = -zeta;
    for k in (0..len).rev() {
        let (b, _) = half_line(side, j, k);
        let (_, a_next) = half_line(side, j, k + 1);
        let den = b - z - a_next * a_next * r;
        if den.norm() < POLE_TOL {
            return Err(Error::PoleHit);
        }
        r = den.inv();
    }
    Ok(r)
}

/// Resolvent `⟨(J - z)^{-1} e_i, e_j⟩` for `i, j ∈ {-1, 0}` (row/column 0 is `e_{-1}`).
pub fn resolvent_2x2(j: &JacobiOperator, zeta: C64) -> Result<Mat2> {
    let rm = weyl_half_line(Side::Minus, j, zeta)?;
    let rp = weyl_half_line(Side::Plus, j, zeta)?;
    let p0 = C64::new(j.p(0), 0.0);
    Mat2::new(rm.inv(), p0, p0, rp.inv()).inverse().ok_or(Error::PoleHit)
}

/// Boundary resolvent with one radial retry when a pole is hit on the circle.
fn resolvent_boundary(j: &JacobiOperator, zeta: C64) -> Result<Mat2> {
    match resolvent_2x2(j, zeta) {
        Err(Error::PoleHit) => resolvent_2x2(j, zeta * (1.0 - 1e-9)),
        r => r,
    }
}

/// Anything that can produce the 2×2 spectral density at `x = 2cos θ`.
pub trait DensitySource {
    fn density_at(&self, theta: f64) -> Result<Mat2>;

    /// `ρ⁻¹` at the same point; override when a direct formula is better conditioned.
    fn inverse_density_at(&self, theta: f64) -> Result<Mat2> {
        self.density_at(theta)?.inverse().ok_or(Error::PoleHit)
    }
}

impl DensitySource for JacobiOperator {
    /// `ρ(x) = Im R(x + i0)/π`; the upper half-plane corresponds to `ζ = e^{-iθ}`.
    fn density_at(&self, theta: f64) -> Result<Mat2> {
        let r = resolvent_boundary(self, C64::from_polar(1.0, -theta))?;
        let m = &r.0;
        Ok(Mat2::real(m[0][0].im, m[0][1].im, m[1][0].im, m[1][1].im).scale((1.0 / PI).into()))
    }
}

/// Sampled spectral density.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDensity {
    pub theta: Vec<f64>,
    pub x_nodes: Vec<f64>,
    pub rho: Vec<Mat2>,
}

/// Midpoint nodes `θ_j = (j + 1/2)π/n` with `guard` nodes dropped at each end.
pub fn theta_nodes(n: usize, guard: usize) -> Vec<f64> {
    (guard..n.saturating_sub(guard))
        .map(|j| (j as f64 + 0.5) * PI / n as f64)
        .collect()
}

impl SpectralDensity {
    pub fn sample(src: &dyn DensitySource, theta: &[f64]) -> Result<Self> {
        let rho = theta.iter().map(|t| src.density_at(*t)).collect::<Result<Vec<_>>>()?;
        Ok(SpectralDensity {
            theta: theta.to_vec(),
            x_nodes: theta.iter().map(|t| 2.0 * t.cos()).collect(),
            rho,
        })
    }

    /// Quadrature weights in `θ` over `(0, π)` from the node cells.
    pub fn theta_weights(&self) -> Vec<f64> {
        let n = self.theta.len();
        (0..n)
            .map(|i| {
                let lo = if i == 0 { 0.0 } else { 0.5 * (self.theta[i - 1] + self.theta[i]) };
                let hi = if i + 1 == n { PI } else { 0.5 * (self.theta[i] + self.theta[i + 1]) };
                hi - lo
            })
            .collect()
    }

    /// `∫ trace ρ dx` using `dx = 2 sin θ dθ`.
    pub fn total_mass(&self) -> f64 {
        self.theta_weights()
            .iter()
            .zip(&self.theta)
            .zip(&self.rho)
            .map(|((w, t), r)| w * 2.0 * t.sin() * r.trace().re)
            .sum()
    }

    /// Smallest eigenvalue over all nodes.
    pub fn min_eigenvalue(&self) -> f64 {
        self.rho
            .iter()
            .map(|r| crate::linalg::hermitian_eigenvalues(r)[0])
            .fold(f64::INFINITY, f64::min)
    }
}

/// Density at every node of [`SpectralDensity`] for a Jacobi operator.
pub fn spectral_density(j: &JacobiOperator, theta: &[f64]) -> Result<SpectralDensity> {
    SpectralDensity::sample(j, theta)
}

/// First- and second-kind orthonormal polynomials `P_0..=P_n`, `Q_0..=Q_n` of a half-line.
///
/// Normalisation: `P_0 = 1`, `Q_0 = 0`, `Q_1 = 1/a_1`, which gives
/// `a_{k+1}(P_k Q_{k+1} - P_{k+1} Q_k) = 1`.
pub fn orthonormal_polys(side: Side, j: &JacobiOperator, n: usize, x: C64) -> (Vec<C64>, Vec<C64>) {
    let mut pp = vec![C64::new(0.0, 0.0); n + 1];
    let mut qq = vec![C64::new(0.0, 0.0); n + 1];
    pp[0] = C64::new(1.0, 0.0);
    if n == 0 {
        return (pp, qq);
    }
    let (b0, _) = half_line(side, j, 0);
    let (_, a1) = half_line(side, j, 1);
    pp[1] = (x - b0) / a1;
    qq[1] = C64::new(1.0 / a1, 0.0);
    for k in 1..n {
        let (b, a) = half_line(side, j, k as i64);
        let (_, a_next) = half_line(side, j, k as i64 + 1);
        pp[k + 1] = ((x - b) * pp[k] - a * pp[k - 1]) / a_next;
        qq[k + 1] = ((x - b) * qq[k] - a * qq[k - 1]) / a_next;
    }
    (pp, qq)
}

/// Real Laurent polynomial `Σ c_i t^{low+i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Laurent {
    pub low: i64,
    pub coeffs: Vec<f64>,
}

impl Laurent {
    pub fn monomial(k: i64) -> Self {
        Laurent { low: k, coeffs: vec![1.0] }
    }

    pub fn high(&self) -> i64 {
        self.low + self.coeffs.len() as i64 - 1
    }

    pub fn coeff(&self, k: i64) -> f64 {
        if k < self.low || k > self.high() {
            0.0
        } else {
            self.coeffs[(k - self.low) as usize]
        }
    }

    pub fn lin(a: f64, x: &Laurent, b: f64, y: &Laurent) -> Laurent {
        let low = x.low.min(y.low);
        let high = x.high().max(y.high());
        let coeffs = (low..=high).map(|k| a * x.coeff(k) + b * y.coeff(k)).collect();
        Laurent { low, coeffs }
    }

    pub fn shift(&self, k: i64) -> Laurent {
        Laurent { low: self.low + k, coeffs: self.coeffs.clone() }
    }

    /// Multiplication by `z = t + 1/t`.
    pub fn times_z(&self) -> Laurent {
        Laurent::lin(1.0, &self.shift(1), 1.0, &self.shift(-1))
    }

    /// Formal derivative in `t`.
    pub fn derivative(&self) -> Laurent {
        let coeffs = (self.low..=self.high()).map(|k| k as f64 * self.coeff(k)).collect();
        Laurent { low: self.low - 1, coeffs }
    }

    /// Coefficients of `f(1/t)`.
    pub fn reflect(&self) -> Laurent {
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        Laurent { low: -self.high(), coeffs }
    }

    pub fn eval(&self, t: C64) -> C64 {
        // Horner in t from the top, then multiply by t^low
        let mut acc = C64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc * t.powi(self.low as i32)
    }

    pub fn eval_real(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc * t.powi(self.low as i32)
    }
}

/// Solution of `J u = z u` equal to `t^n` for `n ≥ n_max` as exact Laurent
/// polynomials, returned for indices `from ..= n_max + 1`.
pub fn right_jost_laurent(j: &JacobiOperator, from: i64) -> Vec<(i64, Laurent)> {
    let top = j.n_max().max(from) + 1;
    let mut out: Vec<(i64, Laurent)> = vec![(top, Laurent::monomial(top)), (top - 1, Laurent::monomial(top - 1))];
    let mut n = top - 1;
    while n > from {
        // p_n e(n-1) = (z - q_n) e(n) - p_{n+1} e(n+1)
        let en = &out[out.len() - 1].1;
        let en1 = &out[out.len() - 2].1;
        let zen = en.times_z();
        let t = Laurent::lin(1.0, &zen, -j.q(n), en);
        let next = Laurent::lin(1.0 / j.p(n), &t, -j.p(n + 1) / j.p(n), en1);
        out.push((n - 1, next));
        n -= 1;
    }
    out.reverse();
    out
}

/// Jost denominator `D(t) = e_L t^{1-L} - e_{L-1} t^{-L}` with `L = n_min - 1`,
/// together with the numerator `N(t) = e_{L-1} t^{L+1} - e_L t^L`. Then
/// `s = (t - 1/t)/D` and `s_- = N/D`.
pub fn jost_fraction(j: &JacobiOperator) -> (Laurent, Laurent) {
    let l = if j.is_free_window() { 0 } else { j.n_min() - 1 };
    let fam = right_jost_laurent(j, l - 1);
    let e_l = &fam[1].1;
    let e_lm1 = &fam[0].1;
    let d = Laurent::lin(1.0, &e_l.shift(1 - l), -1.0, &e_lm1.shift(-l));
    let num = Laurent::lin(1.0, &e_lm1.shift(l + 1), -1.0, &e_l.shift(l));
    (d, num)
}

/// Eigenvalues outside `[-2, 2]`: zeros of the Jost denominator at real `ζ ∈ (-1, 1)`.
pub fn off_interval_eigenvalues(j: &JacobiOperator) -> Vec<f64> {
    if j.is_free_window() {
        return Vec::new();
    }
    let (d, _) = jost_fraction(j);
    let umax = (j.norm_bound() + 1.0 - 2.0).max(1e-3).sqrt();
    let samples = 4000;
    let mut found = Vec::new();
    for sign in [1.0f64, -1.0] {
        let zeta_of = |u: f64| {
            let x = 2.0 + u * u;
            sign * (x - (x * x - 4.0).sqrt()) / 2.0
        };
        let f = |u: f64| d.eval_real(zeta_of(u));
        let mut u_prev = umax * 1e-6;
        let mut f_prev = f(u_prev);
        for i in 1..=samples {
            let u = umax * i as f64 / samples as f64;
            let fu = f(u);
            if fu == 0.0 || f_prev * fu < 0.0 {
                let (mut a, mut b) = (u_prev, u);
                let fa = f_prev;
                for _ in 0..80 {
                    let m = 0.5 * (a + b);
                    if f(m) * fa > 0.0 {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                let u0 = 0.5 * (a + b);
                found.push(sign * (2.0 + u0 * u0));
            }
            u_prev = u;
            f_prev = fu;
        }
    }
    found
}

/// Outcome of the Szegő-class test.
#[derive(Debug, Clone, PartialEq)]
pub struct SzegoReport {
    pub pass: bool,
    /// Clipped mean of `log det ρ(z(t))` over the circle at the finest level.
    pub value: f64,
    /// Unclipped means along the refinement ladder.
    pub trend: Vec<f64>,
}

/// `∫ log det ρ(z(t)) dm` on midpoint nodes refined `levels` times from `n0`.
/// Passes when the clipped value is above `-log_floor/2` and the unclipped
/// refinement increments contract.
pub fn szego_class_check(
    src: &dyn DensitySource,
    n0: usize,
    levels: usize,
    log_floor: f64,
) -> Result<SzegoReport> {
    let mut trend = Vec::new();
    let mut clipped = 0.0;
    for k in 0..levels.max(3) {
        let d = SpectralDensity::sample(src, &theta_nodes(n0 << k, 0))?;
        let n = d.theta.len() as f64;
        let logs: Vec<f64> = d.rho.iter().map(|r| r.det().re.max(0.0).ln()).collect();
        trend.push(logs.iter().map(|v| v.max(-1e300)).sum::<f64>() / n);
        clipped = logs.iter().map(|v| v.max(-log_floor)).sum::<f64>() / n;
    }
    let m = trend.len();
    let d1 = (trend[m - 2] - trend[m - 3]).abs();
    let d2 = (trend[m - 1] - trend[m - 2]).abs();
    let settled = d2 <= 0.75 * d1 || d2 < 1e-6 * trend[m - 1].abs().max(1.0);
    Ok(SzegoReport { pass: clipped > -log_floor / 2.0 && trend[m - 1].is_finite() && settled, value: clipped, trend })
}
