//! Direct scattering: Jost solutions, the scattering matrix and the identities
//! tying it to the spectral density.
//!
//! `e⁺(n,t) = tⁿ` to the right of the window. `e⁻(n,t)` is the value at site
//! `-n-1` of the solution equal to `t^{-m-1}` at sites `m` left of the window,
//! so that `e⁻(n,t) = tⁿ` for large `n`.

use crate::error::{Error, Result};
use crate::harmonic::{outer_from_modulus, CircleFunction, CircleGrid, OuterFunction, Spectrum, DEFAULT_LOG_FLOOR};
use crate::jacobi::{jost_fraction, off_interval_eigenvalues, JacobiOperator, Laurent, SpectralDensity};
use crate::linalg::Mat2;
use crate::C64;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // inherent f64 math is only present when std is linked
use num_traits::Float;

/// Values of `e⁺` at sites `lo ..= hi`.
pub fn e_plus_sites(j: &JacobiOperator, t: C64, lo: i64, hi: i64) -> Vec<C64> {
    let top = hi.max(j.n_max() + 1).max(lo + 1);
    let z = t + t.inv();
    let len = (top - lo + 1) as usize;
    let mut v = vec![C64::new(0.0, 0.0); len];
    v[len - 1] = t.powi(top as i32);
    v[len - 2] = t.powi((top - 1) as i32);
    for i in (1..len - 1).rev() {
        let n = lo + i as i64;
        v[i - 1] = ((z - j.q(n)) * v[i] - v[i + 1] * j.p(n + 1)) / j.p(n);
    }
    v.truncate((hi - lo + 1) as usize);
    v
}

/// Values at sites `lo ..= hi` of the solution equal to `t^{-m-1}` left of the
/// window (any `lo`). Site `m` carries `e⁻(-m-1, t)`.
pub fn e_minus_sites(j: &JacobiOperator, t: C64, lo: i64, hi: i64) -> Vec<C64> {
    let bottom = lo.min(j.n_min() - 2).min(hi - 1);
    let z = t + t.inv();
    let len = (hi - bottom + 1) as usize;
    let mut v = vec![C64::new(0.0, 0.0); len];
    v[0] = t.powi((-bottom - 1) as i32);
    v[1] = t.powi((-bottom - 2) as i32);
    for i in 1..len - 1 {
        let m = bottom + i as i64;
        v[i + 1] = ((z - j.q(m)) * v[i] - v[i - 1] * j.p(m)) / j.p(m + 1);
    }
    v.drain(..(lo - bottom) as usize);
    v
}

/// `[e⁺(-1), e⁺(0), e⁻(-1), e⁻(0)]` at a single point.
pub fn jost_core_values(j: &JacobiOperator, t: C64) -> [C64; 4] {
    let ep = e_plus_sites(j, t, -1, 0);
    // e⁻(-1) sits at site 0, e⁻(0) at site -1
    let em = e_minus_sites(j, t, -1, 0);
    [ep[0], ep[1], em[1], em[0]]
}

/// Jost solutions on a grid for sites `n_lo ..= n_hi`.
#[derive(Debug, Clone)]
pub struct JostFamily {
    grid: CircleGrid,
    jacobi: JacobiOperator,
    n_lo: i64,
    n_hi: i64,
    plus: Vec<CircleFunction>,
    minus_sites: Vec<CircleFunction>,
}

impl JostFamily {
    /// Builds the family without checking for eigenvalues off `[-2, 2]`.
    pub fn from_recurrence(j: &JacobiOperator, grid: CircleGrid) -> Self {
        let n_lo = j.n_min().min(-1) - 3;
        let n_hi = j.n_max().max(0) + 3;
        let n = grid.len();
        let width = (n_hi - n_lo + 1) as usize;
        let mut plus = vec![vec![C64::new(0.0, 0.0); n]; width];
        let mut minus = vec![vec![C64::new(0.0, 0.0); n]; width];
        for k in 0..n {
            let t = grid.point(k);
            let ep = e_plus_sites(j, t, n_lo, n_hi);
            let em = e_minus_sites(j, t, n_lo, n_hi);
            for i in 0..width {
                plus[i][k] = ep[i];
                minus[i][k] = em[i];
            }
        }
        let wrap = |rows: Vec<Vec<C64>>| {
            rows.into_iter()
                .map(|v| CircleFunction::from_values(grid, v).expect("grid length"))
                .collect()
        };
        JostFamily { grid, jacobi: j.clone(), n_lo, n_hi, plus: wrap(plus), minus_sites: wrap(minus) }
    }

    pub fn grid(&self) -> CircleGrid {
        self.grid
    }

    pub fn jacobi(&self) -> &JacobiOperator {
        &self.jacobi
    }

    pub fn site_range(&self) -> (i64, i64) {
        (self.n_lo, self.n_hi)
    }

    /// `e⁺(n, ·)` for `n` in the site range.
    pub fn e_plus(&self, n: i64) -> &CircleFunction {
        &self.plus[(n - self.n_lo) as usize]
    }

    /// `e⁻(n, ·)` for `-n-1` in the site range.
    pub fn e_minus(&self, n: i64) -> &CircleFunction {
        &self.minus_sites[(-n - 1 - self.n_lo) as usize]
    }

    /// Largest pointwise residual of the three-term recurrence for both families.
    pub fn recurrence_residual(&self) -> f64 {
        let z = CircleFunction::joukowski(self.grid);
        let j = &self.jacobi;
        let mut worst = 0.0f64;
        for fam in [&self.plus, &self.minus_sites] {
            for n in self.n_lo + 1..self.n_hi {
                let i = (n - self.n_lo) as usize;
                for k in 0..self.grid.len() {
                    let lhs = z.values()[k] * fam[i].values()[k];
                    let rhs = fam[i - 1].values()[k] * j.p(n)
                        + fam[i].values()[k] * j.q(n)
                        + fam[i + 1].values()[k] * j.p(n + 1);
                    worst = worst.max((lhs - rhs).norm() / (1.0 + lhs.norm()));
                }
            }
        }
        worst
    }
}

/// Jost family after rejecting operators with eigenvalues off `[-2, 2]`.
pub fn jost_solutions(j: &JacobiOperator, grid: CircleGrid) -> Result<JostFamily> {
    let ev = off_interval_eigenvalues(j);
    if !ev.is_empty() {
        return Err(Error::OffIntervalSpectrum { eigenvalues: ev });
    }
    Ok(JostFamily::from_recurrence(j, grid))
}

/// The triple `(s, s₊, s₋)` on a grid.
#[derive(Debug, Clone)]
pub struct ScatteringMatrix {
    pub s: OuterFunction,
    pub s_plus: CircleFunction,
    pub s_minus: CircleFunction,
    /// Fourier series of `s₊`. From the closed form it lives on a finer grid
    /// than the samples and carries no aliasing; otherwise it is the FFT of the samples.
    pub s_plus_series: Spectrum,
    pub s_minus_series: Spectrum,
    /// Grid nodes where the free-region solve degenerated and a limit was used.
    pub degenerate_nodes: Vec<usize>,
}

/// Residuals of the structural identities of a scattering matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantReport {
    pub unitarity: f64,
    pub symmetry: f64,
    pub compatibility: f64,
    pub s_at_zero: f64,
}

impl InvariantReport {
    pub fn worst(&self) -> f64 {
        self.unitarity.max(self.symmetry).max(self.compatibility)
    }
}

impl ScatteringMatrix {
    pub fn invariants(&self) -> InvariantReport {
        let s = self.s.boundary().values();
        let sp = self.s_plus.values();
        let sm = self.s_minus.values();
        let mut unitarity = 0.0f64;
        let mut compat = 0.0f64;
        for k in 0..s.len() {
            unitarity = unitarity
                .max((s[k].norm_sqr() + sp[k].norm_sqr() - 1.0).abs())
                .max((s[k].norm_sqr() + sm[k].norm_sqr() - 1.0).abs());
            compat = compat.max((sp[k].conj() * s[k] + s[k].conj() * sm[k]).norm());
        }
        let symmetry = self
            .s
            .boundary()
            .real_symmetry_defect()
            .max(self.s_plus.real_symmetry_defect())
            .max(self.s_minus.real_symmetry_defect());
        InvariantReport { unitarity, symmetry, compatibility: compat, s_at_zero: self.s.value_at_zero() }
    }

    /// Builds a triple from `s₊` and the outer `s`, with `s₋ = -conj(s₊) s / conj(s)`.
    pub fn from_s_plus_and_s(s_plus: CircleFunction, s: OuterFunction) -> Result<Self> {
        let ratio = s.conj_ratio();
        let vals = ratio.values().iter().zip(s_plus.values()).map(|(r, sp)| -sp.conj() * r).collect();
        let s_minus = CircleFunction::from_values(s_plus.grid(), vals)?;
        let (s_plus_series, s_minus_series) = (s_plus.analyze(), s_minus.analyze());
        Ok(ScatteringMatrix { s, s_plus, s_minus, s_plus_series, s_minus_series, degenerate_nodes: Vec::new() })
    }
}

/// Closed forms of `s`, `s₋`, `s₊` for a finite window, valid anywhere on the circle.
#[derive(Debug, Clone)]
pub struct JostFraction {
    pub den: Laurent,
    pub num: Laurent,
    den_d: Laurent,
    num_d: Laurent,
}

impl JostFraction {
    pub fn new(j: &JacobiOperator) -> Self {
        let (den, num) = jost_fraction(j);
        JostFraction { den_d: den.derivative(), num_d: num.derivative(), den, num }
    }

    /// `(s, s₊, s₋)` at `t`, using the limit at `t = ±1` where the solve degenerates.
    pub fn eval(&self, t: C64) -> ([C64; 3], bool) {
        let d = self.den.eval(t);
        let scale = self.den.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if d.norm() > 1e-12 * scale.max(1.0) {
            let nn = self.num.eval(t);
            let s = (t - t.inv()) / d;
            let s_minus = nn / d;
            let s_plus = self.num.eval(t.conj()) / d;
            ([s, s_plus, s_minus], false)
        } else {
            let dd = self.den_d.eval(t);
            let nd = self.num_d.eval(t);
            let s = (1.0 + t.powi(-2)) / dd;
            let s_minus = nd / dd;
            let s_plus = -nd / dd * t.powi(-2);
            ([s, s_plus, s_minus], true)
        }
    }

    /// `s(0) = -1/d_{-1}` where `d_{-1}` is the coefficient of `t^{-1}` in `D`.
    pub fn s_at_zero(&self) -> f64 {
        -1.0 / self.den.coeff(-1)
    }
}

/// Scattering matrix from the left free region of `e⁺`:
/// `e⁺(n) = A tⁿ + B t⁻ⁿ` there, `s = 1/A`, `s₋ = tB/A`, `s₊` from unitarity.
pub fn extract_scattering(fam: &JostFamily) -> Result<ScatteringMatrix> {
    let frac = JostFraction::new(&fam.jacobi);
    let g = fam.grid;
    let n = g.len();
    let mut s = vec![C64::new(0.0, 0.0); n];
    let mut sp = s.clone();
    let mut sm = s.clone();
    let mut degenerate = Vec::new();
    for k in 0..n {
        let ([a, b, c], deg) = frac.eval(g.point(k));
        s[k] = a;
        sp[k] = b;
        sm[k] = c;
        if deg {
            degenerate.push(k);
        }
    }
    let boundary = CircleFunction::from_values(g, s)?;
    let s_out = OuterFunction::from_boundary_with_value(boundary, frac.s_at_zero())?;
    let (s_plus_series, s_minus_series) = settled_series(&frac, g)?;
    Ok(ScatteringMatrix {
        s: s_out,
        s_plus: CircleFunction::from_values(g, sp)?,
        s_minus: CircleFunction::from_values(g, sm)?,
        s_plus_series,
        s_minus_series,
        degenerate_nodes: degenerate,
    })
}

/// Largest grid on which [`settled_series`] samples the closed forms.
pub const MAX_SETTLING_GRID: usize = 1 << 18;

/// Fourier series of `s₊` and `s₋` from samples of the closed forms on grids
/// doubled from `2N` until the coefficients in the range of `grid` stop moving.
/// The FFT on `grid` itself folds in the coefficients at `k ± N`, which decay
/// slowly when a resonance lies close to the circle.
pub fn settled_series(frac: &JostFraction, grid: CircleGrid) -> Result<(Spectrum, Spectrum)> {
    let series = |len: usize| -> Result<(Spectrum, Spectrum)> {
        let fine = CircleGrid::new(len)?;
        let mut sp = Vec::with_capacity(len);
        let mut sm = Vec::with_capacity(len);
        for k in 0..len {
            let ([_, b, c], _) = frac.eval(fine.point(k));
            sp.push(b);
            sm.push(c);
        }
        Ok((CircleFunction::from_values(fine, sp)?.analyze(), CircleFunction::from_values(fine, sm)?.analyze()))
    };
    let mut len = 2 * grid.len();
    let mut cur = series(len)?;
    while len < MAX_SETTLING_GRID {
        len *= 2;
        let next = series(len)?;
        let moved = next.0.truncated_to(grid).pairs().iter().zip(cur.0.truncated_to(grid).pairs())
            .map(|(a, b)| (a.1 - b.1).norm())
            .fold(0.0, f64::max);
        cur = next;
        if moved <= 1e-15 {
            break;
        }
    }
    Ok(cur)
}

/// `s` and `s₊` from the right free region of `e⁻`, where
/// `s e⁻ = t^{-m-1} + s₊ t^m` at sites `m`; used as an independent cross-check.
/// Nodes at `t = ±1` are left as `NaN`.
pub fn right_side_reflection(fam: &JostFamily) -> (Vec<C64>, Vec<C64>) {
    let g = fam.grid;
    let r = fam.jacobi.n_max().max(0) + 1;
    let mut s = Vec::with_capacity(g.len());
    let mut sp = Vec::with_capacity(g.len());
    for k in 0..g.len() {
        let t = g.point(k);
        let u0 = fam.e_minus(-r - 1).values()[k];
        let u1 = fam.e_minus(-r - 2).values()[k];
        // A t^{-r-1} + B t^r = u0 ; A t^{-r-2} + B t^{r+1} = u1
        let (a11, a12, a21, a22) = (t.powi((-r - 1) as i32), t.powi(r as i32), t.powi((-r - 2) as i32), t.powi((r + 1) as i32));
        let det = a11 * a22 - a12 * a21;
        if det.norm() < 1e-12 {
            s.push(C64::new(f64::NAN, 0.0));
            sp.push(C64::new(f64::NAN, 0.0));
            continue;
        }
        let a = (u0 * a22 - a12 * u1) / det;
        let b = (a11 * u1 - a21 * u0) / det;
        s.push(a.inv());
        sp.push(b / a);
    }
    (s, sp)
}

/// Largest deviation of `t̄ p_n {e⁺(n,t)e⁺(n-1,t̄) - e⁺(n-1,t)e⁺(n,t̄)}` from `z'(t) = 1 - t⁻²`.
pub fn wronskian_residual(fam: &JostFamily) -> f64 {
    let g = fam.grid;
    let mut worst = 0.0f64;
    for n in fam.n_lo + 1..=fam.n_hi {
        let a = fam.e_plus(n).values();
        let b = fam.e_plus(n - 1).values();
        let p = fam.jacobi.p(n);
        for k in 0..g.len() {
            let t = g.point(k);
            let kc = g.conj_index(k);
            let w = t.conj() * p * (a[k] * b[kc] - b[k] * a[kc]);
            let zp = 1.0 - t.powi(-2);
            worst = worst.max((w - zp).norm());
        }
    }
    worst
}

/// `Φ = [[e⁻(-1), -e⁻(0)], [-e⁺(0), e⁺(-1)]]`.
pub fn phi(v: [C64; 4]) -> Mat2 {
    let [ep_m1, ep_0, em_m1, em_0] = v;
    Mat2::new(em_m1, -em_0, -ep_0, ep_m1)
}

/// `Φ̃ = [[e⁻(-1), -e⁺(0)], [-e⁻(0), e⁺(-1)]]`.
pub fn phi_tilde(v: [C64; 4]) -> Mat2 {
    let [ep_m1, ep_0, em_m1, em_0] = v;
    Mat2::new(em_m1, -ep_0, -em_0, ep_m1)
}

/// Largest relative residual of `t̄Φ(t̄) = -S(t)Φ(t)` on the grid.
pub fn jump_relation_residual(fam: &JostFamily, sm: &ScatteringMatrix) -> f64 {
    let g = fam.grid;
    let at = |k: usize| {
        phi([
            fam.e_plus(-1).values()[k],
            fam.e_plus(0).values()[k],
            fam.e_minus(-1).values()[k],
            fam.e_minus(0).values()[k],
        ])
    };
    let mut worst = 0.0f64;
    for k in 0..g.len() {
        let t = g.point(k);
        let lhs = at(g.conj_index(k)).scale(t.conj());
        let (s, sp, smi) = (sm.s.boundary().values()[k], sm.s_plus.values()[k], sm.s_minus.values()[k]);
        let smat = Mat2::new(smi, s, s, sp);
        let rhs = smat.mul(&at(k)).scale((-1.0).into());
        worst = worst.max(lhs.sub(&rhs).max_abs() / (1.0 + lhs.max_abs()));
    }
    worst
}

/// Residuals of the density/scattering identities at the density nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyReport {
    /// Relative residual of `det(2π p₀ ρ) = |s|²`.
    pub determinant: f64,
    /// Relative residual of `2π p₀² ρ = Φ̃^{-1*} Φ̃^{-1} |z'|`.
    pub matrix: f64,
}

/// Checks the density against the scattering data at every node of `density`
/// (each node `θ` is read at `t = e^{-iθ}`).
pub fn density_scattering_consistency(
    j: &JacobiOperator,
    density: &SpectralDensity,
    tol: f64,
) -> Result<ConsistencyReport> {
    let frac = JostFraction::new(j);
    let p0 = j.p(0);
    let mut rep = ConsistencyReport { determinant: 0.0, matrix: 0.0 };
    let mut worst_node = 0;
    for (i, (th, rho)) in density.theta.iter().zip(&density.rho).enumerate() {
        let t = C64::from_polar(1.0, -th);
        let ([s, _, _], _) = frac.eval(t);
        let det = rho.scale((2.0 * PI * p0).into()).det().re;
        let r1 = (det - s.norm_sqr()).abs() / s.norm_sqr().max(1e-300);
        let ft = phi_tilde(jost_core_values(j, t));
        let zp = (1.0 - t.powi(-2)).norm();
        let rhs = match ft.inverse() {
            Some(inv) => inv.adjoint().mul(&inv).scale(zp.into()),
            None => return Err(Error::ConsistencyFailure { residual: f64::INFINITY, node: i }),
        };
        let lhs = rho.scale((2.0 * PI * p0 * p0).into());
        let r2 = lhs.sub(&rhs).max_abs() / lhs.max_abs().max(1e-300);
        if r1.max(r2) > rep.determinant.max(rep.matrix) {
            worst_node = i;
        }
        rep.determinant = rep.determinant.max(r1);
        rep.matrix = rep.matrix.max(r2);
    }
    if rep.determinant > tol || rep.matrix > tol {
        return Err(Error::ConsistencyFailure { residual: rep.determinant.max(rep.matrix), node: worst_node });
    }
    Ok(rep)
}

/// `s` rebuilt as the outer function with modulus `√(1 - |s₊|²)`.
pub fn outer_from_reflection(s_plus: &CircleFunction) -> Result<OuterFunction> {
    outer_from_reflection_with_floor(s_plus, DEFAULT_LOG_FLOOR)
}

/// As [`outer_from_reflection`] with log values clipped at `-log_floor`.
pub fn outer_from_reflection_with_floor(s_plus: &CircleFunction, log_floor: f64) -> Result<OuterFunction> {
    let w = s_plus.map(|v| C64::new((1.0 - v.norm_sqr()).max(0.0).sqrt(), 0.0));
    outer_from_modulus(&w, log_floor)
}
