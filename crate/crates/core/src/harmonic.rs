//! Functions on a uniform grid of the unit circle, their Fourier
//! coefficients, the Riesz projection, the star involution `t̄ f(t̄)`,
//! outer functions and the inner product twisted by a reflection symbol.

use crate::error::{Error, Result};
use crate::{fft, C64};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // inherent f64 math is only present when std is linked
use num_traits::Float;

/// Default log-integrability floor for moduli.
pub const DEFAULT_LOG_FLOOR: f64 = 50.0;

/// Uniform grid `t_j = exp(2πi j/n)`, `n` a power of two, `n ≥ 16`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CircleGrid {
    n: usize,
}

impl CircleGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(n));
        }
        Ok(CircleGrid { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn angle(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n as f64
    }

    pub fn point(&self, j: usize) -> C64 {
        C64::from_polar(1.0, self.angle(j))
    }

    /// Index of `conj(t_j)`.
    pub fn conj_index(&self, j: usize) -> usize {
        (self.n - j) % self.n
    }
}

/// Samples of a complex function on a [`CircleGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct CircleFunction {
    grid: CircleGrid,
    values: Vec<C64>,
}

impl CircleFunction {
    pub fn from_values(grid: CircleGrid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch { left: grid.len(), right: values.len() });
        }
        Ok(CircleFunction { grid, values })
    }

    pub fn from_fn(grid: CircleGrid, f: impl Fn(C64) -> C64) -> Self {
        let values = (0..grid.len()).map(|j| f(grid.point(j))).collect();
        CircleFunction { grid, values }
    }

    pub fn constant(grid: CircleGrid, c: C64) -> Self {
        CircleFunction { grid, values: vec![c; grid.len()] }
    }

    /// The monomial `t^k`.
    pub fn monomial(grid: CircleGrid, k: i64) -> Self {
        let n = grid.len() as i64;
        let values = (0..n)
            .map(|j| C64::from_polar(1.0, 2.0 * PI * ((k * j).rem_euclid(n)) as f64 / n as f64))
            .collect();
        CircleFunction { grid, values }
    }

    /// `z(t) = t + 1/t` on the grid.
    pub fn joukowski(grid: CircleGrid) -> Self {
        let values = (0..grid.len())
            .map(|j| C64::new(2.0 * grid.angle(j).cos(), 0.0))
            .collect();
        CircleFunction { grid, values }
    }

    pub fn grid(&self) -> CircleGrid {
        self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        CircleFunction { grid: self.grid, values: self.values.iter().map(|v| f(*v)).collect() }
    }

    fn zip_with(&self, o: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        check_same(self, o)?;
        let values = self.values.iter().zip(&o.values).map(|(a, b)| f(*a, *b)).collect();
        Ok(CircleFunction { grid: self.grid, values })
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.zip_with(o, |a, b| a * b)
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.zip_with(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.zip_with(o, |a, b| a - b)
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map(|v| v * c)
    }

    /// Pointwise `f(t̄)`.
    pub fn reflect(&self) -> Self {
        let values = (0..self.grid.len())
            .map(|j| self.values[self.grid.conj_index(j)])
            .collect();
        CircleFunction { grid: self.grid, values }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// `(∫ |f|² dm)^{1/2}` by the uniform rule.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.grid.len() as f64).sqrt()
    }

    /// Largest deviation from `f(t̄) = conj f(t)`.
    pub fn real_symmetry_defect(&self) -> f64 {
        (0..self.grid.len())
            .map(|j| (self.values[self.grid.conj_index(j)] - self.values[j].conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn analyze(&self) -> Spectrum {
        analyze(self)
    }
}

fn check_same(a: &CircleFunction, b: &CircleFunction) -> Result<()> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch { left: a.grid.len(), right: b.grid.len() });
    }
    Ok(())
}

/// Two-sided Fourier coefficients `c_k`, `k = -n/2 .. n/2-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: CircleGrid,
    data: Vec<C64>,
}

impl Spectrum {
    pub fn zeros(grid: CircleGrid) -> Self {
        Spectrum { grid, data: vec![C64::new(0.0, 0.0); grid.len()] }
    }

    /// Builds a spectrum from `(k, c_k)` pairs; indices outside the range are rejected.
    pub fn from_pairs(grid: CircleGrid, pairs: &[(i64, C64)]) -> Result<Self> {
        let mut s = Spectrum::zeros(grid);
        for &(k, c) in pairs {
            if !s.in_range(k) {
                return Err(Error::Invalid(alloc::format!(
                    "coefficient index {k} outside [-{}, {})",
                    grid.len() / 2,
                    grid.len() / 2
                )));
            }
            s.set(k, c);
        }
        Ok(s)
    }

    pub fn grid(&self) -> CircleGrid {
        self.grid
    }

    pub fn min_index(&self) -> i64 {
        -(self.grid.len() as i64) / 2
    }

    pub fn max_index(&self) -> i64 {
        self.grid.len() as i64 / 2 - 1
    }

    pub fn in_range(&self, k: i64) -> bool {
        k >= self.min_index() && k <= self.max_index()
    }

    fn slot(&self, k: i64) -> usize {
        k.rem_euclid(self.grid.len() as i64) as usize
    }

    /// `c_k`; zero outside the stored range.
    pub fn get(&self, k: i64) -> C64 {
        if self.in_range(k) {
            self.data[self.slot(k)]
        } else {
            C64::new(0.0, 0.0)
        }
    }

    pub fn set(&mut self, k: i64, c: C64) {
        let i = self.slot(k);
        self.data[i] = c;
    }

    /// `(k, c_k)` in increasing `k`.
    pub fn pairs(&self) -> Vec<(i64, C64)> {
        (self.min_index()..=self.max_index()).map(|k| (k, self.get(k))).collect()
    }

    /// The coefficients whose index lies in the range of `grid`.
    pub fn truncated_to(&self, grid: CircleGrid) -> Spectrum {
        let mut out = Spectrum::zeros(grid);
        for k in out.min_index()..=out.max_index() {
            out.set(k, self.get(k));
        }
        out
    }

    /// Samples of the series on `grid`: each `c_k` lands on the slot `k mod n`.
    pub fn sampled_on(&self, grid: CircleGrid) -> CircleFunction {
        let mut folded = Spectrum::zeros(grid);
        for (k, c) in self.pairs() {
            let i = folded.slot(k);
            folded.data[i] += c;
        }
        folded.synthesize()
    }

    pub fn synthesize(&self) -> CircleFunction {
        let mut v = self.data.clone();
        fft::backward(&mut v);
        CircleFunction { grid: self.grid, values: v }
    }

    /// Evaluates `Σ c_k ζ^k` at an arbitrary nonzero point.
    pub fn eval(&self, zeta: C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        let mut pw = C64::new(1.0, 0.0);
        for k in 0..=self.max_index() {
            acc += self.get(k) * pw;
            pw *= zeta;
        }
        let inv = C64::new(1.0, 0.0) / zeta;
        let mut pw = inv;
        for k in 1..=-self.min_index() {
            acc += self.get(-k) * pw;
            pw *= inv;
        }
        acc
    }

    /// Largest imaginary part of any coefficient.
    pub fn max_imag(&self) -> f64 {
        self.data.iter().fold(0.0, |m, c| m.max(c.im.abs()))
    }

    /// `Σ_{k<0} |c_k|`.
    pub fn negative_mass(&self) -> f64 {
        (self.min_index()..0).map(|k| self.get(k).norm()).sum()
    }
}

/// `c_k = (1/n) Σ_j f(t_j) t_j^{-k}`.
pub fn analyze(f: &CircleFunction) -> Spectrum {
    let mut v = f.values.clone();
    fft::forward(&mut v);
    let inv = 1.0 / f.grid.len() as f64;
    for c in v.iter_mut() {
        *c *= inv;
    }
    Spectrum { grid: f.grid, data: v }
}

/// Keeps the coefficients with `k ≥ 0`.
pub fn riesz_project(f: &CircleFunction) -> CircleFunction {
    let mut s = analyze(f);
    for k in s.min_index()..0 {
        s.set(k, C64::new(0.0, 0.0));
    }
    s.synthesize()
}

/// `t̄ f(t̄)`; acts on coefficients by `c_k ↦ c_{-k-1}`.
pub fn star(f: &CircleFunction) -> CircleFunction {
    let g = f.grid;
    let values = (0..g.len())
        .map(|j| g.point(j).conj() * f.values[g.conj_index(j)])
        .collect();
    CircleFunction { grid: g, values }
}

/// Boundary values of an outer function with `s(0) > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterFunction {
    boundary: CircleFunction,
    value_at_zero: f64,
    log_coeffs: Vec<C64>,
    zeros: Vec<(C64, f64)>,
    /// `s/s̄` on the grid, with its limit at factored zeros.
    conj_ratio: Vec<C64>,
}

impl OuterFunction {
    pub fn boundary(&self) -> &CircleFunction {
        &self.boundary
    }

    pub fn value_at_zero(&self) -> f64 {
        self.value_at_zero
    }

    /// Evaluates the outer function at `|ζ| ≤ 1` from its log-series.
    pub fn eval(&self, zeta: C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        let mut pw = C64::new(1.0, 0.0);
        for g in &self.log_coeffs {
            acc += g * pw;
            pw *= zeta;
        }
        acc.exp() * zero_factor(&self.zeros, zeta)
    }

    /// `s/s̄` on the grid. At a factored zero of order `m` this is the limit
    /// `(-1)^m` times the phase of the remaining factors (the two one-sided
    /// limits are averaged for fractional `m`).
    pub fn conj_ratio(&self) -> CircleFunction {
        CircleFunction { grid: self.boundary.grid, values: self.conj_ratio.clone() }
    }

    /// Boundary zeros split off as exact factors, with their orders.
    pub fn boundary_zeros(&self) -> &[(C64, f64)] {
        &self.zeros
    }

    /// Wraps boundary samples of a function known to be outer with positive
    /// value at the origin (checked only through `c_0`).
    pub fn from_boundary(boundary: CircleFunction) -> Result<Self> {
        let c0 = analyze(&boundary).get(0).re;
        Self::from_boundary_with_value(boundary, c0)
    }

    /// As [`OuterFunction::from_boundary`] with a known value at the origin.
    pub fn from_boundary_with_value(boundary: CircleFunction, value_at_zero: f64) -> Result<Self> {
        let w = boundary.map(|v| C64::new(v.norm(), 0.0));
        let mut o = outer_from_modulus(&w, DEFAULT_LOG_FLOOR)?;
        o.value_at_zero = value_at_zero;
        if o.value_at_zero <= 0.0 {
            return Err(Error::Invalid("outer function must be positive at the origin".into()));
        }
        for (j, b) in boundary.values.iter().enumerate() {
            if b.norm() > 0.0 {
                o.conj_ratio[j] = b / b.conj();
            }
        }
        o.boundary = boundary;
        Ok(o)
    }
}

/// Zeros of `w` that fall on grid nodes: `(node, order)`. A node whose log sits
/// well below both neighbours is a zero; its order `m` is read off the neighbours
/// assuming `|θ-θ₀|^m` behaviour, and rounded when close to an integer.
fn sampled_zeros(raw: &[f64]) -> Vec<(usize, f64)> {
    let n = raw.len();
    let ln2 = core::f64::consts::LN_2;
    let mut out = Vec::new();
    for j in 0..n {
        let at = |d: i64| raw[(j as i64 + d).rem_euclid(n as i64) as usize];
        let (l1, r1, l2, r2) = (at(-1), at(1), at(-2), at(2));
        if !(l1.is_finite() && r1.is_finite() && l2.is_finite() && r2.is_finite()) {
            continue;
        }
        if raw[j] < l1.min(r1) - 5.0 {
            let mut m = (((l2 - l1) + (r2 - r1)) / (2.0 * ln2)).clamp(0.0, 8.0);
            if (m - m.round()).abs() < 0.1 {
                m = m.round();
            }
            if m > 0.0 {
                out.push((j, m));
            }
        }
    }
    out
}

/// `Π (1 - ζ t̄_j)^{m_j}`: outer, equal to 1 at the origin, vanishing at the `t_j`.
fn zero_factor(zeros: &[(C64, f64)], zeta: C64) -> C64 {
    zeros
        .iter()
        .fold(C64::new(1.0, 0.0), |acc, (t, m)| acc * (C64::new(1.0, 0.0) - zeta * t.conj()).powf(*m))
}

/// Outer function with modulus `w` on the grid.
///
/// Zeros of `w` sampled at grid nodes are split off as exact factors
/// `(1 - t t̄_j)^m`; the remaining smooth modulus goes through the FFT, with its
/// value at a zero node extrapolated from three symmetric neighbour pairs.
/// Log values below `-log_floor` are clipped.
pub fn outer_from_modulus(w: &CircleFunction, log_floor: f64) -> Result<OuterFunction> {
    let grid = w.grid;
    let n = grid.len();
    let raw: Vec<f64> = w.values.iter().map(|v| v.re.max(0.0).ln()).collect();
    let found = sampled_zeros(&raw);
    let zeros: Vec<(C64, f64)> = found.iter().map(|&(j, m)| (grid.point(j), m)).collect();
    let is_zero = |j: usize| found.iter().any(|&(k, _)| k == j);
    let mut smooth: Vec<f64> = (0..n)
        .map(|j| {
            if is_zero(j) {
                return f64::NAN;
            }
            let f = zero_factor(&zeros, grid.point(j)).norm();
            raw[j] - f.ln()
        })
        .collect();
    for &(j, _) in &found {
        let at = |d: i64| smooth[(j as i64 + d).rem_euclid(n as i64) as usize];
        let avg = |d: i64| 0.5 * (at(d) + at(-d));
        // even extrapolation to the centre from offsets 1, 2, 3
        smooth[j] = 1.5 * avg(1) - 0.6 * avg(2) + 0.1 * avg(3);
    }
    let mut clipped = Vec::new();
    for (j, v) in smooth.iter_mut().enumerate() {
        if !(*v >= -log_floor) {
            *v = -log_floor;
            clipped.push(j);
        }
    }
    let mean = smooth.iter().sum::<f64>() / n as f64;
    if mean < -log_floor / 2.0 {
        return Err(Error::SzegoViolation { clipped_mean: mean });
    }
    let l = analyze(&CircleFunction {
        grid,
        values: smooth.iter().map(|v| C64::new(*v, 0.0)).collect(),
    });
    // analytic completion: g_0 = l_0, g_k = 2 l_k (k > 0); Nyquist term kept as is
    let mut g = Spectrum::zeros(grid);
    g.set(0, C64::new(l.get(0).re, 0.0));
    for k in 1..(n as i64 / 2) {
        g.set(k, l.get(k) * 2.0);
    }
    let nyq = -(n as i64) / 2;
    g.set(nyq, l.get(nyq));
    let logs = g.synthesize().into_values();
    let mut values = vec![C64::new(0.0, 0.0); n];
    let mut conj_ratio = vec![C64::new(1.0, 0.0); n];
    for j in 0..n {
        let t = grid.point(j);
        let smooth_phase = C64::from_polar(1.0, 2.0 * logs[j].im);
        if let Some(&(_, m)) = found.iter().find(|&&(k, _)| k == j) {
            let others: Vec<(C64, f64)> = zeros.iter().copied().filter(|(z, _)| (z - t).norm() > 0.0).collect();
            let f = zero_factor(&others, t);
            conj_ratio[j] = smooth_phase * (f / f.conj()) * (PI * m).cos();
        } else {
            let v = logs[j].exp() * zero_factor(&zeros, t);
            if !(clipped.contains(&j) && raw[j] == f64::NEG_INFINITY) {
                values[j] = v;
            }
            conj_ratio[j] = if v.norm() > 0.0 { v / v.conj() } else { smooth_phase };
        }
    }
    let boundary = CircleFunction { grid, values };
    let log_coeffs = (0..n as i64 / 2).map(|k| g.get(k)).collect();
    Ok(OuterFunction { boundary, value_at_zero: mean.exp(), log_coeffs, zeros, conj_ratio })
}

/// `(1/n) Σ [f + star(s f)] conj g`, the inner product of the metric twisted by `s`.
pub fn szego_inner(f: &CircleFunction, g: &CircleFunction, s: &CircleFunction) -> Result<C64> {
    check_same(f, g)?;
    check_same(f, s)?;
    let lhs = f.add(&star(&s.mul(f)?))?;
    Ok(plain_inner(&lhs, g))
}

/// `(1/n) Σ f conj g`.
pub fn plain_inner(f: &CircleFunction, g: &CircleFunction) -> C64 {
    let n = f.grid.len() as f64;
    f.values.iter().zip(&g.values).map(|(a, b)| a * b.conj()).sum::<C64>() / n
}
