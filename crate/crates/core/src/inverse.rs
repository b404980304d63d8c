//! Inverse scattering: the kernel basis `e⁺(n,t) = tⁿ K_{s₊t^{2n}}(t)`, recovery of
//! the Jacobi coefficients, the dual basis and the uniqueness defects.

use crate::error::{Error, Result};
use crate::forward::{outer_from_reflection_with_floor, phi_tilde, ScatteringMatrix};
use crate::hankel::{hankel_from_spectrum, reproducing_kernel, ReproducingKernel, DEFAULT_EPS_LADDER};
use crate::harmonic::{plain_inner, DEFAULT_LOG_FLOOR, star, szego_inner, CircleFunction, CircleGrid, OuterFunction, Spectrum};
use crate::jacobi::{DensitySource, JacobiOperator, SpectralDensity};
use crate::linalg::Mat2;
use crate::C64;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // inherent f64 math is only present when std is linked
use num_traits::Float;

pub const DEFAULT_S_FLOOR: f64 = 1e-8;

/// A reflection coefficient `s₊` with the transmission `s` and `s₋` it determines.
#[derive(Debug, Clone)]
pub struct ReflectionInput {
    pub s_plus: CircleFunction,
    pub s: OuterFunction,
    pub s_minus: CircleFunction,
    /// Nodes with `|s| < s_floor`. `s₋` uses the limit of `s/s̄` there.
    pub flagged: Vec<usize>,
    /// Fourier coefficients of `s₊` and `s₋` used by the Hankel operators.
    pub s_plus_coeffs: Spectrum,
    pub s_minus_coeffs: Spectrum,
}

impl ReflectionInput {
    pub fn new(s_plus: CircleFunction) -> Result<Self> {
        Self::with_floor(s_plus, DEFAULT_S_FLOOR)
    }

    pub fn with_floor(s_plus: CircleFunction, s_floor: f64) -> Result<Self> {
        Self::with_floors(s_plus, s_floor, DEFAULT_LOG_FLOOR)
    }

    /// Checks real symmetry and `‖s₊‖_∞ ≤ 1`, then builds `s` with logs clipped at `-log_floor`.
    pub fn with_floors(s_plus: CircleFunction, s_floor: f64, log_floor: f64) -> Result<Self> {
        check_reflection(&s_plus)?;
        let s = outer_from_reflection_with_floor(&s_plus, log_floor)?;
        Ok(Self::assemble(s_plus, s, s_floor))
    }

    /// Uses a known transmission coefficient instead of rebuilding it from `|s₊|`.
    pub fn with_transmission(s_plus: CircleFunction, s: OuterFunction, s_floor: f64) -> Self {
        Self::assemble(s_plus, s, s_floor)
    }

    /// Uses all three coefficients as given. `s₋` is not recomputed from
    /// `s/s̄`, whose value at a zero node is only known as a limit.
    pub fn with_parts(s_plus: CircleFunction, s: OuterFunction, s_minus: CircleFunction, s_floor: f64) -> Result<Self> {
        if s_minus.grid() != s_plus.grid() || s.boundary().grid() != s_plus.grid() {
            return Err(Error::Invalid("scattering coefficients live on different grids".into()));
        }
        check_reflection(&s_plus)?;
        let sv = s.boundary().values();
        let flagged: Vec<usize> = (0..sv.len()).filter(|&k| sv[k].norm() < s_floor).collect();
        let (s_plus_coeffs, s_minus_coeffs) = (s_plus.analyze(), s_minus.analyze());
        Ok(ReflectionInput { s_plus, s, s_minus, flagged, s_plus_coeffs, s_minus_coeffs })
    }

    /// The exact data produced by the forward map, with its alias-free coefficients.
    pub fn from_scattering(sm: &ScatteringMatrix, s_floor: f64) -> Self {
        let input = Self::with_parts(sm.s_plus.clone(), sm.s.clone(), sm.s_minus.clone(), s_floor).expect("one grid");
        input.with_series(&sm.s_plus_series, &sm.s_minus_series)
    }

    /// Replaces the Hankel coefficients by those of known series, e.g. ones
    /// computed on a finer grid than the samples.
    pub fn with_series(mut self, s_plus: &Spectrum, s_minus: &Spectrum) -> Self {
        let g = self.grid();
        self.s_plus_coeffs = s_plus.truncated_to(g);
        self.s_minus_coeffs = s_minus.truncated_to(g);
        self
    }

    fn assemble(s_plus: CircleFunction, s: OuterFunction, s_floor: f64) -> Self {
        let sv = s.boundary().values();
        let flagged: Vec<usize> = (0..sv.len()).filter(|&k| sv[k].norm() < s_floor).collect();
        let ratio = s.conj_ratio();
        let vals = s_plus.values().iter().zip(ratio.values()).map(|(sp, r)| -sp.conj() * r).collect();
        let s_minus = CircleFunction::from_values(s_plus.grid(), vals).expect("same grid");
        let (s_plus_coeffs, s_minus_coeffs) = (s_plus.analyze(), s_minus.analyze());
        ReflectionInput { s_plus, s, s_minus, flagged, s_plus_coeffs, s_minus_coeffs }
    }

    pub fn grid(&self) -> CircleGrid {
        self.s_plus.grid()
    }

    /// The same data with the roles of `s₊` and `s₋` exchanged.
    pub fn mirrored(&self) -> Self {
        ReflectionInput {
            s_plus: self.s_minus.clone(),
            s: self.s.clone(),
            s_minus: self.s_plus.clone(),
            flagged: self.flagged.clone(),
            s_plus_coeffs: self.s_minus_coeffs.clone(),
            s_minus_coeffs: self.s_plus_coeffs.clone(),
        }
    }
}

fn check_reflection(s_plus: &CircleFunction) -> Result<()> {
    let imag = s_plus.analyze().max_imag();
    if imag > 1e-10 {
        return Err(Error::SymbolAsymmetry { max_imag: imag });
    }
    let sup = s_plus.sup_norm();
    if sup > 1.0 + 1e-12 {
        return Err(Error::Invalid(alloc::format!("|s+| reaches {sup} > 1")));
    }
    Ok(())
}

/// Solver settings shared by the reconstruction routines.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseOptions {
    pub trunc: usize,
    pub eps_ladder: Vec<f64>,
    pub gram_tol: f64,
}

impl Default for InverseOptions {
    fn default() -> Self {
        InverseOptions { trunc: 256, eps_ladder: DEFAULT_EPS_LADDER.to_vec(), gram_tol: 1e-4 }
    }
}

/// `K_{s₊t^{2n}}` for one shift. Negative shifts get `2|n|` extra rows so the
/// effective truncation stays the same, capped at a quarter of the grid.
pub fn shifted_kernel(spec: &Spectrum, n: i64, opts: &InverseOptions) -> Result<ReproducingKernel> {
    let cap = spec.grid().len() / 4;
    let m = (opts.trunc + 2 * n.unsigned_abs() as usize * usize::from(n < 0)).min(cap);
    let h = hankel_from_spectrum(spec, n, m)?;
    reproducing_kernel(&h, &opts.eps_ladder).map_err(|e| match e {
        Error::NoConvergence { trace } => Error::KernelFailure { shift: n, trace },
        other => other,
    })
}

/// `tⁿ K(t)` on the grid.
fn basis_function(k: &ReproducingKernel, n: i64, g: CircleGrid) -> CircleFunction {
    let c = k.normalized_coeffs();
    CircleFunction::from_fn(g, |t| {
        let v = c.iter().rev().fold(C64::new(0.0, 0.0), |acc, a| acc * t + *a);
        v * t.powi(n as i32)
    })
}

/// Output of a reconstruction on the window `[-N, N]`.
#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    pub jacobi: JacobiOperator,
    /// `(n, K_{s₊t^{2n}}(0))` for `n ∈ [-N-1, N+1]`.
    pub kernels_at_zero: Vec<(i64, f64)>,
    pub gram_residual: f64,
    /// Largest deviation of `p_n` from `K_n(0)/K_{n-1}(0)`.
    pub ratio_residual: f64,
    /// Largest imaginary part met in the coefficient inner products.
    pub imag_residual: f64,
}

/// Matrix of multiplication by `z` in the kernel basis of `L²_{s₊}`.
pub fn reconstruct(input: &ReflectionInput, half_width: i64, opts: &InverseOptions) -> Result<ReconstructionResult> {
    let spec = &input.s_plus_coeffs;
    // The metric is a Hankel form in the coefficients of s₊. With s₊ band-limited
    // to those coefficients, quadrature on a four times finer grid is exact.
    let g = CircleGrid::new(4 * input.grid().len())?;
    let s_fine = Spectrum::from_pairs(g, &spec.pairs())?.synthesize();
    let lo = -half_width - 1;
    let hi = half_width + 1;
    let mut kernels = Vec::new();
    let mut basis = Vec::new();
    for n in lo..=hi {
        let k = shifted_kernel(spec, n, opts)?;
        basis.push(basis_function(&k, n, g));
        kernels.push((n, k.normalized_at_zero()));
    }
    let inner = |f: &CircleFunction, h: &CircleFunction| szego_inner(f, h, &s_fine);
    let mut gram = 0.0f64;
    for a in 0..basis.len() {
        for b in a..basis.len() {
            let v = inner(&basis[a], &basis[b])?;
            let want = if a == b { 1.0 } else { 0.0 };
            gram = gram.max((v - want).norm());
        }
    }
    if gram > opts.gram_tol {
        return Err(Error::GramFailure { residual: gram });
    }
    let z = CircleFunction::joukowski(g);
    let mut p = Vec::new();
    let mut q = Vec::new();
    let mut imag = 0.0f64;
    let mut ratio = 0.0f64;
    for n in -half_width..=half_width {
        let i = (n - lo) as usize;
        let ze = z.mul(&basis[i])?;
        let qn = inner(&ze, &basis[i])?;
        let pn = inner(&ze, &basis[i - 1])?;
        imag = imag.max(qn.im.abs()).max(pn.im.abs());
        ratio = ratio.max((pn.re - kernels[i].1 / kernels[i - 1].1).abs());
        p.push(pn.re);
        q.push(qn.re);
    }
    let jacobi = JacobiOperator::new(-half_width, p, q)?;
    Ok(ReconstructionResult { jacobi, kernels_at_zero: kernels, gram_residual: gram, ratio_residual: ratio, imag_residual: imag })
}

/// `f⁻ = (t̄f⁺(t̄) + s₊f⁺)/s`, the unitary map `L²_{s₊} → L²_{s₋}`.
pub fn dual_map(f_plus: &CircleFunction, input: &ReflectionInput, s_floor: f64) -> Result<CircleFunction> {
    let (f, bad) = dual_map_masked(f_plus, input, s_floor)?;
    if !bad.is_empty() {
        return Err(Error::SmallDenominator { nodes: bad });
    }
    Ok(f)
}

/// As [`dual_map`], writing zero at nodes where `|s| < s_floor` and listing them.
pub fn dual_map_masked(
    f_plus: &CircleFunction,
    input: &ReflectionInput,
    s_floor: f64,
) -> Result<(CircleFunction, Vec<usize>)> {
    let num = star(f_plus).add(&input.s_plus.mul(f_plus)?)?;
    let mut bad = Vec::new();
    let vals = num
        .values()
        .iter()
        .zip(input.s.boundary().values())
        .enumerate()
        .map(|(k, (a, s))| {
            if s.norm() < s_floor {
                bad.push(k);
                C64::new(0.0, 0.0)
            } else {
                a / s
            }
        })
        .collect();
    Ok((CircleFunction::from_values(input.grid(), vals)?, bad))
}

/// `‖f‖²` in the metric twisted by `r`.
pub fn szego_norm_sqr(f: &CircleFunction, r: &CircleFunction) -> Result<f64> {
    Ok(szego_inner(f, f, r)?.re)
}

/// `½{‖s f⁺‖² + ‖s f⁻‖²}`, the common value of both model norms.
pub fn symmetric_norm_sqr(f_plus: &CircleFunction, f_minus: &CircleFunction, s: &CircleFunction) -> Result<f64> {
    let a = s.mul(f_plus)?;
    let b = s.mul(f_minus)?;
    Ok(0.5 * (plain_inner(&a, &a).re + plain_inner(&b, &b).re))
}

/// The matrix `J̃` of multiplication by `z` in the basis dual to the kernel basis
/// of `L²_{s₋}`, together with a direct evaluation of its coefficients.
#[derive(Debug, Clone)]
pub struct DualReconstruction {
    pub jacobi: JacobiOperator,
    /// Largest difference between the coefficients and their direct evaluation
    /// through the dual map on unmasked nodes.
    pub direct_discrepancy: f64,
    pub masked_nodes: usize,
}

/// Builds `J̃` on `[-N, N]`. The dual map is unitary and intertwines
/// multiplication by `z`, so `q̃_n = q⁽⁻⁾_{-n-1}` and `p̃_n = p⁽⁻⁾_{-n}` where
/// `J⁽⁻⁾` is reconstructed from `s₋`.
pub fn reconstruct_dual(
    input: &ReflectionInput,
    half_width: i64,
    opts: &InverseOptions,
    s_floor: f64,
) -> Result<DualReconstruction> {
    let mirror = input.mirrored();
    let rm = reconstruct(&mirror, half_width + 1, opts)?;
    let jm = &rm.jacobi;
    let p: Vec<f64> = (-half_width..=half_width).map(|n| jm.p(-n)).collect();
    let q: Vec<f64> = (-half_width..=half_width).map(|n| jm.q(-n - 1)).collect();
    let jacobi = JacobiOperator::new(-half_width, p, q)?;

    // direct route: ẽ⁺(-n-1) from tⁿK_{s₋t^{2n}} through the dual map
    let g = input.grid();
    let spec = &mirror.s_plus_coeffs;
    let mut tilde = Vec::new();
    let mut masked = Vec::new();
    for m in -half_width - 1..=half_width {
        let n = -m - 1;
        let k = shifted_kernel(spec, n, opts)?;
        let (f, bad) = dual_map_masked(&basis_function(&k, n, g), &mirror, s_floor)?;
        masked = bad;
        tilde.push(f);
    }
    let z = CircleFunction::joukowski(g);
    let weight = g.len() as f64 / (g.len() - masked.len()) as f64;
    let mut worst = 0.0f64;
    for m in -half_width..=half_width {
        let i = (m + half_width + 1) as usize;
        let ze = z.mul(&tilde[i])?;
        let qd = szego_inner(&ze, &tilde[i], &input.s_plus)?.re * weight;
        let pd = szego_inner(&ze, &tilde[i - 1], &input.s_plus)?.re * weight;
        worst = worst.max((qd - jacobi.q(m)).abs()).max((pd - jacobi.p(m)).abs());
    }
    Ok(DualReconstruction { jacobi, direct_discrepancy: worst, masked_nodes: masked.len() })
}

/// `(1 - s(0)K_{s₊}(0)K_{s₋t⁻²}(0), 1 - s(0)K_{s₋}(0)K_{s₊t⁻²}(0))`.
pub fn uniqueness_defect(input: &ReflectionInput, opts: &InverseOptions) -> Result<(f64, f64)> {
    let sp = &input.s_plus_coeffs;
    let sm = &input.s_minus_coeffs;
    let s0 = input.s.value_at_zero();
    let kp0 = shifted_kernel(sp, 0, opts)?.normalized_at_zero();
    let km0 = shifted_kernel(sm, 0, opts)?.normalized_at_zero();
    let kp1 = shifted_kernel(sp, -1, opts)?.normalized_at_zero();
    let km1 = shifted_kernel(sm, -1, opts)?.normalized_at_zero();
    Ok((1.0 - s0 * kp0 * km1, 1.0 - s0 * km0 * kp1))
}

/// Outcome of the refinement test for `∫ tr ρ⁻¹ dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct MassReport {
    pub integrable: bool,
    pub value: f64,
    /// `(nodes, value)` per refinement level.
    pub trend: Vec<(usize, f64)>,
}

/// `∫ tr ρ(x)⁻¹ dx` by midpoint rules in `θ` (`dx = 2 sin θ dθ`) on `n0·2^k`
/// nodes; integrable when successive increments contract.
pub fn finite_mass_test(src: &dyn DensitySource, n0: usize, levels: usize) -> Result<MassReport> {
    let mut trend = Vec::new();
    for l in 0..levels.max(3) {
        let n = n0 << l;
        let h = PI / n as f64;
        let mut acc = 0.0;
        for j in 0..n {
            let th = (j as f64 + 0.5) * h;
            let rho = src.density_at(th)?;
            let tr = match rho.inverse() {
                Some(inv) => inv.trace().re,
                None => f64::INFINITY,
            };
            acc += tr * 2.0 * th.sin() * h;
        }
        trend.push((n, acc));
    }
    let k = trend.len();
    let d1 = (trend[k - 2].1 - trend[k - 3].1).abs();
    let d2 = (trend[k - 1].1 - trend[k - 2].1).abs();
    let value = trend[k - 1].1;
    let integrable = value.is_finite() && (d2 <= 0.75 * d1 || d2 <= 1e-9 * value.abs());
    Ok(MassReport { integrable, value, trend })
}

/// Transmission and reflection coefficients evaluated anywhere on the circle.
pub trait Symbols {
    fn s_at(&self, t: C64) -> C64;
    fn s_plus_at(&self, t: C64) -> C64;
}

/// Trigonometric interpolation of grid samples.
#[derive(Debug, Clone)]
pub struct GridSymbols {
    s: Spectrum,
    s_plus: Spectrum,
}

impl GridSymbols {
    pub fn new(input: &ReflectionInput) -> Self {
        GridSymbols { s: input.s.boundary().analyze(), s_plus: input.s_plus_coeffs.clone() }
    }
}

impl Symbols for GridSymbols {
    fn s_at(&self, t: C64) -> C64 {
        self.s.eval(t)
    }
    fn s_plus_at(&self, t: C64) -> C64 {
        self.s_plus.eval(t)
    }
}

/// Spectral density of the matrix built from the kernel basis, through
/// `2π p₀² ρ = Φ̃^{-1*} Φ̃^{-1} |z'|` with `e⁻` obtained from the duality relations.
pub struct ModelDensity<S: Symbols> {
    symbols: S,
    k_minus_one: Vec<f64>,
    k_zero: Vec<f64>,
    p0: f64,
}

impl<S: Symbols> ModelDensity<S> {
    pub fn new(symbols: S, input: &ReflectionInput, opts: &InverseOptions) -> Result<Self> {
        let spec = &input.s_plus_coeffs;
        let km = shifted_kernel(spec, -1, opts)?;
        let k0 = shifted_kernel(spec, 0, opts)?;
        let p0 = k0.normalized_at_zero() / km.normalized_at_zero();
        Ok(ModelDensity { symbols, k_minus_one: km.normalized_coeffs(), k_zero: k0.normalized_coeffs(), p0 })
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    /// `[e⁺(-1), e⁺(0), e⁻(-1), e⁻(0)]` at `t`.
    pub fn jost_values(&self, t: C64) -> [C64; 4] {
        let ev = |c: &[f64], z: C64| c.iter().rev().fold(C64::new(0.0, 0.0), |acc, a| acc * z + *a);
        let ep_m1 = |z: C64| ev(&self.k_minus_one, z) / z;
        let ep_0 = |z: C64| ev(&self.k_zero, z);
        let s = self.symbols.s_at(t);
        let sp = self.symbols.s_plus_at(t);
        let tb = t.conj();
        // s e⁻(0) = t̄ e⁺(-1, t̄) + s₊ e⁺(-1, t), and likewise for e⁻(-1) with e⁺(0)
        let em_0 = (tb * ep_m1(tb) + sp * ep_m1(t)) / s;
        let em_m1 = (tb * ep_0(tb) + sp * ep_0(t)) / s;
        [ep_m1(t), ep_0(t), em_m1, em_0]
    }
}

impl<S: Symbols> DensitySource for ModelDensity<S> {
    fn density_at(&self, theta: f64) -> Result<Mat2> {
        let t = C64::from_polar(1.0, -theta);
        let f = phi_tilde(self.jost_values(t));
        let inv = f.inverse().ok_or(Error::PoleHit)?;
        let zp = (1.0 - t.powi(-2)).norm();
        let m = inv.adjoint().mul(&inv).scale((zp / (2.0 * PI * self.p0 * self.p0)).into());
        Ok(m.hermitian_part())
    }

    /// `ρ⁻¹ = 2π p₀² Φ̃ Φ̃* / |z'|`, free of the cancellation in inverting `ρ`.
    fn inverse_density_at(&self, theta: f64) -> Result<Mat2> {
        let t = C64::from_polar(1.0, -theta);
        let f = phi_tilde(self.jost_values(t));
        let zp = (1.0 - t.powi(-2)).norm();
        let m = f.mul(&f.adjoint()).scale((2.0 * PI * self.p0 * self.p0 / zp).into());
        Ok(m.hermitian_part())
    }
}

/// Samples a [`ModelDensity`] at the given nodes.
pub fn model_density<S: Symbols>(d: &ModelDensity<S>, theta: &[f64]) -> Result<SpectralDensity> {
    SpectralDensity::sample(d, theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{extract_scattering, jost_solutions};
    use crate::jacobi::{right_jost_laurent, spectral_density, theta_nodes};
    use alloc::vec;

    fn grid(n: usize) -> CircleGrid {
        CircleGrid::new(n).unwrap()
    }

    fn window() -> JacobiOperator {
        JacobiOperator::new(-2, vec![0.9, 0.85, 0.95, 0.9, 1.05], vec![0.2, -0.1, 0.05, -0.15, 0.1]).unwrap()
    }

    fn trig(g: CircleGrid, pairs: &[(i64, f64)]) -> CircleFunction {
        let p: Vec<_> = pairs.iter().map(|&(k, c)| (k, C64::new(c, 0.0))).collect();
        Spectrum::from_pairs(g, &p).unwrap().synthesize()
    }

    fn opts() -> InverseOptions {
        InverseOptions::default()
    }

    #[test]
    fn zero_reflection_gives_free_matrix() {
        let g = grid(1024);
        let input = ReflectionInput::new(CircleFunction::constant(g, 0.0.into())).unwrap();
        let r = reconstruct(&input, 3, &opts()).unwrap();
        assert!(r.jacobi.max_coeff_diff(&JacobiOperator::free()) < 1e-12);
        assert_eq!(uniqueness_defect(&input, &opts()).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn roundtrip_of_a_window() {
        let j = window();
        let g = grid(2048);
        let sm = extract_scattering(&jost_solutions(&j, g).unwrap()).unwrap();
        let input = ReflectionInput::new(sm.s_plus.clone()).unwrap();
        let r = reconstruct(&input, 4, &opts()).unwrap();
        assert!(r.jacobi.max_coeff_diff(&j) < 1e-6, "{}", r.jacobi.max_coeff_diff(&j));
        assert!(r.gram_residual < 1e-7 && r.ratio_residual < 1e-6);
        let (dp, dm) = uniqueness_defect(&input, &opts()).unwrap();
        assert!(dp.abs() < 1e-6 && dm.abs() < 1e-6, "{dp} {dm}");
        let dual = reconstruct_dual(&input, 4, &opts(), DEFAULT_S_FLOOR).unwrap();
        assert!(dual.jacobi.max_coeff_diff(&j) < 1e-6);
    }

    #[test]
    fn exact_scattering_data_has_zero_defects() {
        let j = JacobiOperator::new(-1, vec![0.8, 1.2, 0.9], vec![0.2, 0.0, -0.1]).unwrap();
        let sm = extract_scattering(&jost_solutions(&j, grid(1024)).unwrap()).unwrap();
        let o = InverseOptions { trunc: 128, ..Default::default() };
        let (dp, dm) = uniqueness_defect(&ReflectionInput::from_scattering(&sm, 1e-8), &o).unwrap();
        assert!(dp.abs() < 1e-8 && dm.abs() < 1e-8, "{dp} {dm}");
        let other = CircleFunction::constant(grid(512), 0.0.into());
        assert!(ReflectionInput::with_parts(other, sm.s.clone(), sm.s_minus.clone(), 1e-8).is_err());
    }

    #[test]
    fn kernels_are_the_jost_polynomials() {
        // t^{-n} e⁺(n, t) is the normalized kernel of s₊t^{2n}
        let j = window();
        let g = grid(2048);
        let sm = extract_scattering(&jost_solutions(&j, g).unwrap()).unwrap();
        let spec = sm.s_plus.analyze();
        for (n, lp) in right_jost_laurent(&j, -4) {
            assert_eq!(lp.low, n.min(lp.low));
            let k = shifted_kernel(&spec, n, &opts()).unwrap().normalized_coeffs();
            for d in 0..=(lp.high() - n) {
                let want = lp.coeff(n + d);
                let got = k.get(d as usize).copied().unwrap_or(0.0);
                assert!((want - got).abs() < 1e-7, "n={n} d={d} {want} {got}");
            }
        }
    }

    #[test]
    fn trig_symbols_are_in_the_uniqueness_regime() {
        let g = grid(1024);
        let s_plus = trig(g, &[(-2, 0.25), (-1, -0.3), (1, 0.2), (3, -0.1)]);
        assert!(s_plus.sup_norm() <= 0.9);
        let input = ReflectionInput::new(s_plus).unwrap();
        let (dp, dm) = uniqueness_defect(&input, &opts()).unwrap();
        assert!(dp.abs() < 1e-6 && dm.abs() < 1e-6, "{dp} {dm}");
        let r = reconstruct(&input, 3, &opts()).unwrap();
        assert!(r.gram_residual < 1e-7);
        let d = reconstruct_dual(&input, 3, &opts(), DEFAULT_S_FLOOR).unwrap();
        assert!(d.jacobi.max_coeff_diff(&r.jacobi) < 1e-6);
        assert!(d.direct_discrepancy < 1e-6);
    }

    #[test]
    fn dual_map_is_isometric() {
        let g = grid(512);
        let s_plus = trig(g, &[(-1, 0.3), (0, -0.2), (2, 0.15)]);
        let input = ReflectionInput::new(s_plus).unwrap();
        let f = trig(g, &[(0, 1.0), (1, -0.5), (3, 0.25)]);
        let fm = dual_map(&f, &input, DEFAULT_S_FLOOR).unwrap();
        let a = szego_norm_sqr(&f, &input.s_plus).unwrap();
        let b = szego_norm_sqr(&fm, &input.s_minus).unwrap();
        let c = symmetric_norm_sqr(&f, &fm, input.s.boundary()).unwrap();
        assert!((a - b).abs() < 1e-8 && (a - c).abs() < 1e-8);
        // inverse relation s f⁺ = t̄f⁻(t̄) + s₋ f⁻
        let back = star(&fm).add(&input.s_minus.mul(&fm).unwrap()).unwrap();
        assert!(input.s.boundary().mul(&f).unwrap().sub(&back).unwrap().sup_norm() < 1e-8);
        // zero reflection: f⁻ = t̄ f⁺(t̄)
        let free = ReflectionInput::new(CircleFunction::constant(g, 0.0.into())).unwrap();
        assert!(dual_map(&f, &free, DEFAULT_S_FLOOR).unwrap().sub(&star(&f)).unwrap().sup_norm() < 1e-12);
    }

    #[test]
    fn model_density_matches_resolvent() {
        let j = window();
        let g = grid(2048);
        let sm = extract_scattering(&jost_solutions(&j, g).unwrap()).unwrap();
        let input = ReflectionInput::new(sm.s_plus.clone()).unwrap();
        let md = ModelDensity::new(GridSymbols::new(&input), &input, &opts()).unwrap();
        assert!((md.p0() - j.p(0)).abs() < 1e-8);
        let th = theta_nodes(40, 2);
        let a = model_density(&md, &th).unwrap();
        let b = spectral_density(&j, &th).unwrap();
        for (x, y) in a.rho.iter().zip(&b.rho) {
            assert!(x.sub(y).max_abs() < 1e-6 * y.max_abs(), "{x:?} {y:?}");
        }
    }

    #[test]
    fn mass_of_inverse_density() {
        let free = finite_mass_test(&JacobiOperator::free(), 64, 4).unwrap();
        assert!(free.integrable);
        // tr ρ₀⁻¹ dx = 8π dθ for the free matrix
        assert!((free.value - 8.0 * PI * PI).abs() < 1e-8);
        struct Scaled(f64);
        impl DensitySource for Scaled {
            fn density_at(&self, t: f64) -> Result<Mat2> {
                Ok(JacobiOperator::free().density_at(t)?.scale(self.0.into()))
            }
        }
        let s = finite_mass_test(&Scaled(4.0), 64, 4).unwrap();
        assert!((s.value - free.value / 4.0).abs() < 1e-10);
        let j = window();
        assert!(finite_mass_test(&j, 64, 4).unwrap().integrable);
    }

    #[test]
    fn small_transmission_is_flagged() {
        let g = grid(256);
        let input = ReflectionInput::new(trig(g, &[(-1, 0.5), (1, 0.5)])).unwrap();
        // |s₊| = |cos θ| reaches 1 at t = ±1
        assert!(!input.flagged.is_empty());
        let f = CircleFunction::constant(g, 1.0.into());
        assert!(matches!(dual_map(&f, &input, 1e-3), Err(Error::SmallDenominator { .. })));
    }
}
