//! Analytic characterizations of the uniqueness regime: the Cauchy-type
//! transform on `E = [-2, 2]`, its representation identity and weighted
//! inequality, the matrix `A₂` quotient with its scale trend, the weighted
//! projection norm, doubling and Poisson-average checks, and the three-way
//! panel comparing `A₂`, Hankel invertibility and the uniqueness defect.

use crate::error::{Error, Result};
use crate::forward::{e_minus_sites, e_plus_sites, jost_core_values, phi};
use crate::hankel::{hankel_from_spectrum, min_singular};
use crate::inverse::{uniqueness_defect, InverseOptions, ReflectionInput};
use crate::jacobi::{DensitySource, JacobiOperator};
use crate::linalg::{hermitian_eigenvalues, hermitian_sqrt, Mat2};
use crate::C64;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // inherent f64 math is only present when std is linked
use num_traits::Float;

/// Left end of `E`.
pub const E_LO: f64 = -2.0;
/// Right end of `E`.
pub const E_HI: f64 = 2.0;

/// Nodes `x = 2cos θ` and weights `2 sin θ dθ` of the midpoint rule in `θ`.
/// Spectrally accurate for integrands `g(x)/√(4-x²)` with `g` smooth (densities
/// of Jacobi matrices have this form); second order for merely smooth integrands.
pub fn theta_rule(n: usize) -> Vec<(f64, f64)> {
    let h = PI / n as f64;
    (0..n)
        .map(|j| {
            let th = (j as f64 + 0.5) * h;
            (2.0 * th.cos(), 2.0 * th.sin() * h)
        })
        .collect()
}

/// `(𝔥g)(z) = ∫_E g(x)/(z - x) dx` for `z` off `E`.
pub fn frak_h(g: &dyn Fn(f64) -> C64, z: C64, nodes: usize) -> C64 {
    theta_rule(nodes).iter().map(|&(x, w)| g(x) * w / (z - x)).sum()
}

/// Boundary side of a point of `E`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Approach {
    /// `x + i0`
    Above,
    /// `x - i0`
    Below,
}

/// Principal value `PV ∫_E g(x)/(x₀ - x) dx` by subtracting `g(x₀)`; the
/// remaining integrand is smooth, and at a node hitting `x₀` its limit `-g'(x₀)`
/// is taken by a central difference.
pub fn principal_value(g: &dyn Fn(f64) -> C64, x0: f64, nodes: usize) -> C64 {
    let g0 = g(x0);
    let mut acc = C64::new(0.0, 0.0);
    for (x, w) in theta_rule(nodes) {
        let d = x0 - x;
        if d.abs() < 1e-12 {
            let h = 1e-6;
            acc -= (g(x0 + h) - g(x0 - h)) / (2.0 * h) * w;
        } else {
            acc += (g(x) - g0) / d * w;
        }
    }
    acc + g0 * ((2.0 + x0) / (2.0 - x0)).ln()
}

/// `(𝔥g)(x₀ ± i0) = PV ∓ iπ g(x₀)`.
pub fn frak_h_boundary(g: &dyn Fn(f64) -> C64, x0: f64, side: Approach, nodes: usize) -> C64 {
    let jump = C64::new(0.0, PI) * g(x0);
    match side {
        Approach::Above => principal_value(g, x0, nodes) - jump,
        Approach::Below => principal_value(g, x0, nodes) + jump,
    }
}

/// `ê_k(x)`: the polynomial pair with `e_k = ê_k(J)` acting on `(e_{-1}, e_0)`,
/// i.e. `ê_{-1} = (1,0)`, `ê_0 = (0,1)` and the three-term recurrence.
pub fn polynomial_image(j: &JacobiOperator, k: i64, x: f64) -> [f64; 2] {
    let (mut a, mut b) = ([1.0, 0.0], [0.0, 1.0]);
    if k >= 0 {
        // a = ê_{n-1}, b = ê_n
        for n in 0..k {
            let c = [
                ((x - j.q(n)) * b[0] - j.p(n) * a[0]) / j.p(n + 1),
                ((x - j.q(n)) * b[1] - j.p(n) * a[1]) / j.p(n + 1),
            ];
            a = b;
            b = c;
        }
        b
    } else {
        // b = ê_{n+1}, a = ê_n walking down from n = -1
        let (mut hi, mut lo) = (b, a);
        let mut n = -1;
        while n > k {
            let c = [
                ((x - j.q(n)) * lo[0] - j.p(n + 1) * hi[0]) / j.p(n),
                ((x - j.q(n)) * lo[1] - j.p(n + 1) * hi[1]) / j.p(n),
            ];
            hi = lo;
            lo = c;
            n -= 1;
        }
        lo
    }
}

/// Largest relative residual of the representation
/// `[F⁻f⁻; F⁺f⁺](ζ) = p₀ Φ(ζ) {𝔥(ρ f̂)}(z(ζ))` over the sample points `zetas`
/// (inside the disk) for the finite vector `f = Σ c_k e_k`.
pub fn identity_32_check(
    j: &JacobiOperator,
    density: &dyn DensitySource,
    f: &[(i64, f64)],
    zetas: &[C64],
    nodes: usize,
) -> Result<f64> {
    let h = PI / nodes as f64;
    // ρ(x) f̂(x) · 2 sin θ dθ at every node
    let mut samples = Vec::with_capacity(nodes);
    for i in 0..nodes {
        let th = (i as f64 + 0.5) * h;
        let x = 2.0 * th.cos();
        let rho = density.density_at(th)?;
        let mut fh = [C64::new(0.0, 0.0); 2];
        for &(k, c) in f {
            let e = polynomial_image(j, k, x);
            fh[0] += e[0] * c;
            fh[1] += e[1] * c;
        }
        let v = rho.apply(fh);
        samples.push((x, [v[0] * 2.0 * th.sin() * h, v[1] * 2.0 * th.sin() * h]));
    }
    let lo = f.iter().map(|p| p.0).min().unwrap_or(0).min(-1);
    let hi = f.iter().map(|p| p.0).max().unwrap_or(0).max(0);
    let mut worst = 0.0f64;
    for &zeta in zetas {
        let z = zeta + zeta.inv();
        let mut hh = [C64::new(0.0, 0.0); 2];
        for (x, v) in &samples {
            hh[0] += v[0] / (z - x);
            hh[1] += v[1] / (z - x);
        }
        let rhs = phi(jost_core_values(j, zeta)).scale(j.p(0).into()).apply(hh);
        let ep = e_plus_sites(j, zeta, 0, hi);
        let em = e_minus_sites(j, zeta, lo, -1);
        let mut lhs = [C64::new(0.0, 0.0); 2];
        for &(k, c) in f {
            if k >= 0 {
                lhs[1] += ep[k as usize] * c;
            } else {
                lhs[0] += em[(k - lo) as usize] * c;
            }
        }
        let scale = lhs[0].norm().max(lhs[1].norm()).max(1e-300);
        let r = (lhs[0] - rhs[0]).norm().max((lhs[1] - rhs[1]).norm()) / scale;
        worst = worst.max(r);
    }
    Ok(worst)
}

/// A smooth bump `v φ((x-c)/w)` used as a test function for the weighted inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub center: f64,
    pub width: f64,
    pub vector: [C64; 2],
}

impl Bump {
    pub fn eval(&self, x: f64) -> [C64; 2] {
        let u = (x - self.center) / self.width;
        if u.abs() >= 1.0 {
            return [C64::new(0.0, 0.0); 2];
        }
        let phi = (-1.0 / (1.0 - u * u)).exp();
        [self.vector[0] * phi, self.vector[1] * phi]
    }
}

/// Best ratio found for the weighted inequality and the bump attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityEstimate {
    pub constant: f64,
    pub best: Option<Bump>,
    pub ratios: Vec<f64>,
}

/// `[∫(𝔥g)*ρ⁻¹(𝔥g)(x-i0) + ∫(𝔥g)*ρ⁻¹(𝔥g)(x+i0)] / ∫g*ρ⁻¹g` for one bump.
pub fn inequality_34_ratio(density: &dyn DensitySource, g: &Bump, nodes: usize) -> Result<f64> {
    let h = PI / nodes as f64;
    let g0 = |x: f64| g.eval(x)[0];
    let g1 = |x: f64| g.eval(x)[1];
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..nodes {
        let th = (i as f64 + 0.5) * h;
        let x = 2.0 * th.cos();
        let w = 2.0 * th.sin() * h;
        let ri = density.inverse_density_at(th)?;
        let quad = |v: [C64; 2]| {
            let r = ri.apply(v);
            (v[0].conj() * r[0] + v[1].conj() * r[1]).re
        };
        let gv = g.eval(x);
        den += quad(gv) * w;
        for side in [Approach::Above, Approach::Below] {
            let hv = [frak_h_boundary(&g0, x, side, nodes), frak_h_boundary(&g1, x, side, nodes)];
            num += quad(hv) * w;
        }
    }
    if !(den > 0.0) {
        return Err(Error::Invalid("test function has zero weighted norm".into()));
    }
    Ok(num / den)
}

/// Maximum of [`inequality_34_ratio`] over the given bumps.
pub fn inequality_34_estimate(density: &dyn DensitySource, bumps: &[Bump], nodes: usize) -> Result<InequalityEstimate> {
    let mut est = InequalityEstimate { constant: 0.0, best: None, ratios: Vec::new() };
    for b in bumps {
        let r = inequality_34_ratio(density, b, nodes)?;
        est.ratios.push(r);
        if r > est.constant {
            est.constant = r;
            est.best = Some(*b);
        }
    }
    Ok(est)
}

/// A `2 × 2` Hermitian weight on `E` (scalar weights use `w·I`).
pub trait MatrixWeight {
    fn weight(&self, x: f64) -> Mat2;

    fn inverse_weight(&self, x: f64) -> Mat2 {
        self.weight(x).inverse().unwrap_or_else(|| Mat2::identity().scale(f64::INFINITY.into()))
    }

    /// Points of `E` where the weight may be singular; quadrature is graded toward
    /// them and stops a small cutoff short.
    fn singular_points(&self) -> Vec<f64> {
        vec![E_LO, E_HI]
    }

    /// Points where the weight jumps; quadrature splits and grades there.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

fn grade_points(w: &dyn MatrixWeight, center: f64) -> Vec<f64> {
    let mut g = w.breakpoints();
    g.push(center);
    g
}

/// A scalar weight `w(x)·I`.
pub struct ScalarWeight<F: Fn(f64) -> f64> {
    pub w: F,
    pub singular: Vec<f64>,
}

impl<F: Fn(f64) -> f64> MatrixWeight for ScalarWeight<F> {
    fn weight(&self, x: f64) -> Mat2 {
        let v = (self.w)(x);
        Mat2::real(v, 0.0, 0.0, v)
    }
    fn inverse_weight(&self, x: f64) -> Mat2 {
        let v = 1.0 / (self.w)(x);
        Mat2::real(v, 0.0, 0.0, v)
    }
    fn singular_points(&self) -> Vec<f64> {
        self.singular.clone()
    }
}

/// Piecewise-constant weight on equal cells of `E`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseWeight {
    pub cells: Vec<Mat2>,
}

impl PiecewiseWeight {
    fn cell(&self, x: f64) -> usize {
        let n = self.cells.len();
        (((x - E_LO) / (E_HI - E_LO) * n as f64).floor().max(0.0) as usize).min(n - 1)
    }
}

impl MatrixWeight for PiecewiseWeight {
    fn weight(&self, x: f64) -> Mat2 {
        self.cells[self.cell(x)]
    }
    fn singular_points(&self) -> Vec<f64> {
        Vec::new()
    }
    fn breakpoints(&self) -> Vec<f64> {
        let n = self.cells.len();
        (0..=n).map(|i| E_LO + (E_HI - E_LO) * i as f64 / n as f64).collect()
    }
}

impl PiecewiseWeight {
    /// Random Hermitian positive-definite cells `AA* + cI` with entries of `A`
    /// uniform in the unit square and `c ∈ [0.05, 1]`.
    pub fn random<R: rand::Rng + ?Sized>(cells: usize, rng: &mut R) -> Self {
        let cells = (0..cells)
            .map(|_| {
                let mut e = || C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let a = Mat2::new(e(), e(), e(), e());
                let c = rng.gen_range(0.05..1.0);
                a.mul(&a.adjoint()).add(&Mat2::identity().scale(c.into())).hermitian_part()
            })
            .collect();
        PiecewiseWeight { cells }
    }
}

/// A spectral density read as a weight on `E` through `x = 2cos θ`.
pub struct DensityWeight<'a>(pub &'a dyn DensitySource);

impl MatrixWeight for DensityWeight<'_> {
    fn weight(&self, x: f64) -> Mat2 {
        self.0.density_at((x / 2.0).clamp(-1.0, 1.0).acos()).unwrap_or_else(|_| Mat2::zero())
    }
    fn inverse_weight(&self, x: f64) -> Mat2 {
        self.0
            .inverse_density_at((x / 2.0).clamp(-1.0, 1.0).acos())
            .unwrap_or_else(|_| Mat2::identity().scale(f64::INFINITY.into()))
    }
}

const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

fn gauss(f: &dyn Fn(f64) -> Mat2, a: f64, b: f64) -> Mat2 {
    let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
    let mut acc = Mat2::zero();
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
        acc = acc.add(&f(m + r * x).scale((w * r).into()));
    }
    acc
}

/// `∫_a^b f` by Gauss–Legendre on pieces halving toward every point of `sing`
/// and `grade` inside `[a, b]`. The last `cutoff` next to each point of `sing` is
/// left out; toward points of `grade` the halving stops at `1e-3·cutoff`.
pub fn graded_integral(f: &dyn Fn(f64) -> Mat2, a: f64, b: f64, sing: &[f64], grade: &[f64], cutoff: f64) -> Mat2 {
    let mut cuts: Vec<f64> = sing.iter().chain(grade).copied().filter(|s| *s >= a && *s <= b).collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap_or(core::cmp::Ordering::Equal));
    cuts.dedup();
    let is_sing = |x: f64| sing.contains(&x);
    let is_graded = |x: f64| grade.contains(&x);
    let mut acc = Mat2::zero();
    for w in cuts.windows(2) {
        let (u, v) = (w[0], w[1]);
        if v - u <= 0.0 {
            continue;
        }
        let mid = 0.5 * (u + v);
        for (end, other) in [(u, mid), (v, mid)] {
            let len = (other - end).abs();
            let dir = if other > end { 1.0 } else { -1.0 };
            let stop = if is_sing(end) {
                cutoff
            } else if is_graded(end) {
                1e-3 * cutoff
            } else {
                acc = acc.add(&gauss(f, end.min(other), end.max(other)));
                continue;
            };
            // pieces [d/2, d] in distance from the graded end
            let mut d = len;
            while d > stop {
                let inner = (d / 2.0).max(stop);
                let (p, q) = (end + dir * inner, end + dir * d);
                acc = acc.add(&gauss(f, p.min(q), p.max(q)));
                d = inner;
            }
            if !is_sing(end) {
                let q = end + dir * d;
                acc = acc.add(&gauss(f, end.min(q), end.max(q)));
            }
        }
    }
    acc
}

/// `‖⟨W⟩^{1/2}⟨W⁻¹⟩^{1/2}‖` on `I = (x-δ, x+δ)`, averages taken as
/// `(1/|I|)∫_{I∩E}`, with the quadrature cutoff given.
pub fn a2_quotient_with_cutoff(w: &dyn MatrixWeight, x: f64, delta: f64, cutoff: f64) -> Result<f64> {
    let (a, b) = ((x - delta).max(E_LO), (x + delta).min(E_HI));
    if !(b > a) {
        return Err(Error::EmptyIntersection { center: x, delta });
    }
    let sing = w.singular_points();
    let len = 2.0 * delta;
    let avg = graded_integral(&|y| w.weight(y), a, b, &sing, &grade_points(w, x), cutoff).scale((1.0 / len).into());
    let avg_inv = graded_integral(&|y| w.inverse_weight(y), a, b, &sing, &grade_points(w, x), cutoff).scale((1.0 / len).into());
    Ok(a2_from_averages(&avg, &avg_inv))
}

/// Default cutoff at scale `δ`: `10⁻⁶δ³`, shrinking faster than the scale so
/// that non-integrable inverse weights show up as growth across scales.
pub fn level_cutoff(delta: f64) -> f64 {
    1e-6 * delta * delta * delta
}

/// `‖⟨W⟩^{1/2}⟨W⁻¹⟩^{1/2}‖` at scale `δ` with the default cutoff.
pub fn a2_quotient(w: &dyn MatrixWeight, x: f64, delta: f64) -> Result<f64> {
    a2_quotient_with_cutoff(w, x, delta, level_cutoff(delta))
}

fn a2_from_averages(avg: &Mat2, avg_inv: &Mat2) -> f64 {
    let r = hermitian_sqrt(&avg.hermitian_part());
    let m = r.mul(&avg_inv.hermitian_part()).mul(&r).hermitian_part();
    hermitian_eigenvalues(&m)[1].max(0.0).sqrt()
}

/// Growth of the scale trend that marks divergence: this ratio across three scales.
pub const DIVERGENCE_RATIO: f64 = 1.5;

/// Sup of the `A₂` quotient over a lattice of centres and dyadic scales.
#[derive(Debug, Clone, PartialEq)]
pub struct A2Report {
    pub q: f64,
    /// `(x, δ, quotient)`.
    pub table: Vec<(f64, f64, f64)>,
    /// `(δ, max over centres)` per scale, coarse to fine.
    pub scale_trend: Vec<(f64, f64)>,
    pub divergent: bool,
}

/// Evaluates the quotient at every `(x, 2^{-k})`, `k ∈ scales`.
pub fn q2e(w: &dyn MatrixWeight, scales: core::ops::RangeInclusive<u32>, centers: &[f64]) -> Result<A2Report> {
    let mut table = Vec::new();
    let mut trend = Vec::new();
    for k in scales {
        let delta = 0.5f64.powi(k as i32);
        let mut best = 0.0f64;
        for &x in centers {
            let v = a2_quotient(w, x, delta)?;
            if !v.is_finite() {
                best = f64::INFINITY;
            }
            best = best.max(v);
            table.push((x, delta, v));
        }
        trend.push((delta, best));
    }
    let q = trend.iter().fold(0.0f64, |m, v| m.max(v.1));
    Ok(A2Report { q, table, divergent: trend_diverges(&trend), scale_trend: trend })
}

/// `true` when the last value is infinite or at least [`DIVERGENCE_RATIO`]
/// times the value three scales earlier.
pub fn trend_diverges(trend: &[(f64, f64)]) -> bool {
    let n = trend.len();
    if n == 0 {
        return false;
    }
    if !trend[n - 1].1.is_finite() {
        return true;
    }
    n >= 4 && trend[n - 1].1 >= DIVERGENCE_RATIO * trend[n - 4].1
}

/// Centres used by default: 33 equispaced points of `E`, which include `0` and `±2`.
pub fn default_centers() -> Vec<f64> {
    (0..=32).map(|i| E_LO + (E_HI - E_LO) * i as f64 / 32.0).collect()
}

/// Result of the discretized projection norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionNorm {
    pub norm: f64,
    pub iterations: usize,
    /// Set when the iteration hit its cap without stagnating.
    pub stalled: bool,
}

/// `‖χ_E W^{1/2} P₊ W^{-1/2} χ_E‖` on `[-L, L]` with `n` midpoints, `P₊ = ½(I + iH)`
/// and `H_{ij} = (1/π)/(i-j)`. The weight is the identity off `E`.
pub fn weighted_projection_norm(w: &dyn MatrixWeight, half_width: f64, n: usize) -> ProjectionNorm {
    let h = 2.0 * half_width / n as f64;
    let xs: Vec<f64> = (0..n).map(|i| -half_width + (i as f64 + 0.5) * h).collect();
    let inside: Vec<bool> = xs.iter().map(|x| (E_LO..=E_HI).contains(x)).collect();
    let sq: Vec<Mat2> = xs
        .iter()
        .zip(&inside)
        .map(|(x, ins)| if *ins { hermitian_sqrt(&w.weight(*x).hermitian_part()) } else { Mat2::identity() })
        .collect();
    let isq: Vec<Mat2> = xs
        .iter()
        .zip(&inside)
        .map(|(x, ins)| if *ins { hermitian_sqrt(&w.inverse_weight(*x).hermitian_part()) } else { Mat2::identity() })
        .collect();
    // ½(I + iH) is self-adjoint: H is real antisymmetric
    let proj = |v: &[[C64; 2]]| -> Vec<[C64; 2]> {
        (0..n)
            .map(|i| {
                let mut acc = [C64::new(0.0, 0.0); 2];
                for (j, vj) in v.iter().enumerate() {
                    if i != j {
                        let c = 1.0 / (PI * (i as f64 - j as f64));
                        acc[0] += vj[0] * c;
                        acc[1] += vj[1] * c;
                    }
                }
                let ih = C64::new(0.0, 1.0);
                [(v[i][0] + ih * acc[0]) * 0.5, (v[i][1] + ih * acc[1]) * 0.5]
            })
            .collect()
    };
    let mask = |v: &mut Vec<[C64; 2]>| {
        for (vi, ins) in v.iter_mut().zip(&inside) {
            if !ins {
                *vi = [C64::new(0.0, 0.0); 2];
            }
        }
    };
    let apply = |v: &[[C64; 2]]| -> Vec<[C64; 2]> {
        // A = χ W^{1/2} P₊ W^{-1/2} χ; returns A*A v
        let mut a: Vec<[C64; 2]> = v.iter().zip(&isq).map(|(x, m)| m.apply(*x)).collect();
        mask(&mut a);
        let mut b: Vec<[C64; 2]> = proj(&a).iter().zip(&sq).map(|(x, m)| m.apply(*x)).collect();
        mask(&mut b);
        let c: Vec<[C64; 2]> = b.iter().zip(&sq).map(|(x, m)| m.apply(*x)).collect();
        let mut d: Vec<[C64; 2]> = proj(&c).iter().zip(&isq).map(|(x, m)| m.apply(*x)).collect();
        mask(&mut d);
        d
    };
    let norm_of = |v: &[[C64; 2]]| v.iter().map(|x| x[0].norm_sqr() + x[1].norm_sqr()).sum::<f64>().sqrt();
    let mut v: Vec<[C64; 2]> = (0..n)
        .map(|i| {
            let s = 1.0 + 0.1 * ((i * 7919) % 13) as f64;
            [C64::new(s, 0.3), C64::new(0.5, -s)]
        })
        .collect();
    mask(&mut v);
    let mut lam = 0.0;
    let mut it = 0;
    let mut stalled = true;
    while it < 30 {
        it += 1;
        let nv = norm_of(&v);
        if nv == 0.0 {
            break;
        }
        for x in v.iter_mut() {
            x[0] /= nv;
            x[1] /= nv;
        }
        let av = apply(&v);
        let next = norm_of(&av);
        let done = (next - lam).abs() <= 1e-6 * next;
        lam = next;
        v = av;
        if done {
            stalled = false;
            break;
        }
    }
    ProjectionNorm { norm: lam.sqrt(), iterations: it, stalled }
}

/// `W(I) = ∫_{I∩E} W` for `I = (c-δ, c+δ)`.
pub fn interval_integral(w: &dyn MatrixWeight, c: f64, delta: f64) -> Mat2 {
    let (a, b) = ((c - delta).max(E_LO), (c + delta).min(E_HI));
    if b <= a {
        return Mat2::zero();
    }
    graded_integral(&|y| w.weight(y), a, b, &w.singular_points(), &grade_points(w, c), level_cutoff(delta.min(1.0)))
}

/// Homogeneity constant of `E` in the form `|λI ∩ E| ≥ η|λI|` for intervals
/// centred on `E` with radius at most `4`: half of such an interval always lies in `E`.
pub const HOMOGENEITY_ETA: f64 = 0.5;

/// `W(λI) ⪰ (1 + η²/(λ²Q²)) W(I)`: returns the smallest eigenvalue of the
/// difference relative to `‖W(λI)‖` (nonnegative when it holds).
pub fn doubling_check(w: &dyn MatrixWeight, c: f64, delta: f64, lambda: f64, eta: f64, q: f64) -> f64 {
    let big = interval_integral(w, c, lambda * delta);
    let small = interval_integral(w, c, delta);
    let factor = 1.0 + eta * eta / (lambda * lambda * q * q);
    let d = big.sub(&small.scale(factor.into())).hermitian_part();
    hermitian_eigenvalues(&d)[0] / big.norm2().max(1e-300)
}

/// The constant of the Poisson-average bound `(cQ²/η²)(1+a)/a` with
/// `λ = 2/η`, `a = η²/(λ²Q²)` and `c = 2λ²/π` from comparing the Poisson
/// kernel with `Σ λ^{-2k} χ_{λᵏI}/|I|`.
pub fn poisson_constant(q: f64) -> f64 {
    let eta = HOMOGENEITY_ETA;
    let lambda = 2.0 / eta;
    let a = eta * eta / (lambda * lambda * q * q);
    let c = 2.0 * lambda * lambda / PI;
    c * q * q / (eta * eta) * (1.0 + a) / a
}

/// `⟨W⟩_{z₀} = ∫_E W(x) P_{z₀}(x) dx` for `z₀ = c + iδ`.
pub fn poisson_average(w: &dyn MatrixWeight, c: f64, delta: f64) -> Mat2 {
    let f = |x: f64| w.weight(x).scale((delta / (PI * ((x - c) * (x - c) + delta * delta))).into());
    graded_integral(&f, E_LO, E_HI, &w.singular_points(), &grade_points(w, c), level_cutoff(delta.min(1.0)))
}

/// Smallest eigenvalue of `C⟨W⟩_I - ⟨W⟩_{z₀}` relative to `‖⟨W⟩_{z₀}‖`.
pub fn poisson_check(w: &dyn MatrixWeight, c: f64, delta: f64, q: f64) -> f64 {
    let pa = poisson_average(w, c, delta);
    let avg = interval_integral(w, c, delta).scale((1.0 / (2.0 * delta)).into());
    let d = avg.scale(poisson_constant(q).into()).sub(&pa).hermitian_part();
    hermitian_eigenvalues(&d)[0] / pa.norm2().max(1e-300)
}

/// The three indicators for one case and whether they agree with the dichotomy
/// "`A₂` ⟺ unique and invertible".
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub a2: A2Report,
    /// `(M, min over ±)` of the smallest singular value of `I + H_{s±}`.
    pub min_singular_trend: Vec<(usize, f64)>,
    pub defect_plus: f64,
    pub defect_minus: f64,
    pub a2_pass: bool,
    pub hankel_pass: bool,
    pub unique: bool,
    pub coherent: bool,
}

/// Thresholds of the panel verdicts.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelOptions {
    pub scales: core::ops::RangeInclusive<u32>,
    pub centers: Vec<f64>,
    pub truncations: Vec<usize>,
    pub tol_defect: f64,
    /// Hankel invertibility requires the smallest singular value above this at every M.
    pub min_singular_floor: f64,
    pub inverse: InverseOptions,
}

impl Default for PanelOptions {
    fn default() -> Self {
        PanelOptions {
            scales: 0..=6,
            centers: default_centers(),
            truncations: vec![64, 128, 256],
            tol_defect: 1e-6,
            min_singular_floor: 1e-3,
            inverse: InverseOptions::default(),
        }
    }
}

/// Runs the panel on reflection data with the density `density` of the
/// corresponding matrix.
pub fn theorem04_panel(input: &ReflectionInput, density: &dyn DensitySource, opts: &PanelOptions) -> Result<Panel> {
    let a2 = q2e(&DensityWeight(density), opts.scales.clone(), &opts.centers)?;
    let mut trend = Vec::new();
    for &m in &opts.truncations {
        let m = m.min(input.grid().len() / 4);
        let a = min_singular(&hankel_from_spectrum(&input.s_plus_coeffs, 0, m)?);
        let b = min_singular(&hankel_from_spectrum(&input.s_minus_coeffs, 0, m)?);
        trend.push((m, a.min(b)));
    }
    let (dp, dm) = uniqueness_defect(input, &opts.inverse)?;
    let a2_pass = !a2.divergent;
    let hankel_pass = trend.iter().all(|v| v.1 > opts.min_singular_floor);
    let unique = dp.abs() <= opts.tol_defect && dm.abs() <= opts.tol_defect;
    let coherent = a2_pass == (hankel_pass && unique);
    Ok(Panel { a2, min_singular_trend: trend, defect_plus: dp, defect_minus: dm, a2_pass, hankel_pass, unique, coherent })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jacobi::JacobiOperator;

    fn one(_: f64) -> C64 {
        C64::new(1.0, 0.0)
    }

    #[test]
    fn transform_of_constant() {
        for z in [C64::new(0.3, 0.5), C64::new(-2.5, 0.1), C64::new(3.0, -1.0)] {
            let want = (z + 2.0).ln() - (z - 2.0).ln();
            let e = (frak_h(&one, z, 2000) - want).norm();
            assert!(e < 1e-6, "{z} {e}");
        }
        // conjugation symmetry for real g
        let g = |x: f64| C64::new((x * 0.7).sin() + 2.0, 0.0);
        let z = C64::new(0.4, 0.9);
        assert!((frak_h(&g, z.conj(), 200) - frak_h(&g, z, 200).conj()).norm() < 1e-12);
    }

    #[test]
    fn boundary_values_approach_the_limits() {
        let g = |x: f64| C64::new((4.0 - x * x).sqrt() * (1.0 + 0.3 * x), 0.0);
        for x0 in [-1.3, 0.0, 0.77, 1.5] {
            let up = frak_h_boundary(&g, x0, Approach::Above, 800);
            let dn = frak_h_boundary(&g, x0, Approach::Below, 800);
            assert!((dn - up - C64::new(0.0, 2.0 * PI) * g(x0)).norm() < 1e-12);
            let near = frak_h(&g, C64::new(x0, 1e-3), 100_000);
            assert!((near - up).norm() < 2e-2, "{x0} {near} {up}");
        }
        // PV of the constant: log((2+x)/(2-x))
        assert!((principal_value(&one, 0.5, 256) - (2.5f64 / 1.5).ln()).norm() < 1e-12);
    }

    #[test]
    fn polynomial_images_generate_the_basis() {
        let j = JacobiOperator::new(-1, vec![0.9, 1.1, 0.8], vec![0.1, -0.2, 0.3]).unwrap();
        // J ê_k = x ê_k componentwise in the recurrence
        let x = 0.37;
        for n in -4i64..4 {
            let l = polynomial_image(&j, n - 1, x);
            let c = polynomial_image(&j, n, x);
            let r = polynomial_image(&j, n + 1, x);
            for i in 0..2 {
                let lhs = j.p(n) * l[i] + j.q(n) * c[i] + j.p(n + 1) * r[i];
                assert!((lhs - x * c[i]).abs() < 1e-12);
            }
        }
        assert_eq!(polynomial_image(&j, -1, x), [1.0, 0.0]);
        assert_eq!(polynomial_image(&j, 0, x), [0.0, 1.0]);
    }

    #[test]
    fn representation_identity() {
        let zs = [C64::new(0.3, 0.2), C64::from_polar(0.6, 2.0), C64::new(-0.5, -0.1)];
        let free = JacobiOperator::free();
        for f in [vec![(0, 1.0)], vec![(-1, 1.0)], vec![(2, 1.0), (-3, 0.5)]] {
            assert!(identity_32_check(&free, &free, &f, &zs, 256).unwrap() < 1e-10);
        }
        let j = JacobiOperator::new(-2, vec![0.9, 0.85, 0.95, 0.9], vec![0.2, -0.1, 0.05, -0.15]).unwrap();
        for f in [vec![(0, 1.0)], vec![(-1, 1.0)], vec![(2, 1.0)], vec![(-4, 1.0), (3, -2.0)]] {
            let r = identity_32_check(&j, &j, &f, &zs, 256).unwrap();
            assert!(r < 1e-8, "{f:?} {r}");
        }
    }

    #[test]
    fn a2_of_simple_weights() {
        let unit = ScalarWeight { w: |_| 1.0, singular: vec![] };
        assert!((a2_quotient(&unit, 0.0, 0.5).unwrap() - 1.0).abs() < 1e-12);
        let rep = q2e(&unit, 0..=5, &default_centers()).unwrap();
        assert!((rep.q - 1.0).abs() < 1e-12 && !rep.divergent);
        // |x|^{1/2}: averages over (-δ, δ) are (2/3)δ^{1/2} and 2δ^{-1/2}
        let root = ScalarWeight { w: |x: f64| x.abs().sqrt(), singular: vec![0.0] };
        let want = (4.0f64 / 3.0).sqrt();
        for k in 1..6 {
            let d = 0.5f64.powi(k);
            let v = a2_quotient(&root, 0.0, d).unwrap();
            assert!((v - want).abs() < 2.0 * (d * d * d / d).sqrt(), "{k} {v}");
        }
        let rep = q2e(&root, 0..=6, &[0.0, 0.5, 1.0]).unwrap();
        assert!(!rep.divergent, "{:?}", rep.scale_trend);
        let sq = ScalarWeight { w: |x: f64| x * x, singular: vec![0.0] };
        let rep = q2e(&sq, 0..=6, &[0.0, 0.5, 1.0]).unwrap();
        assert!(rep.divergent, "{:?}", rep.scale_trend);
    }

    #[test]
    fn free_density_is_a2() {
        let free = JacobiOperator::free();
        let rep = q2e(&DensityWeight(&free), 0..=6, &default_centers()).unwrap();
        assert!(!rep.divergent, "{:?}", rep.scale_trend);
        assert!(rep.q.is_finite());
        assert!(a2_quotient(&DensityWeight(&free), 0.0, 0.25).unwrap() >= 1.0 - 1e-9);
    }

    struct Split;

    impl MatrixWeight for Split {
        fn weight(&self, x: f64) -> Mat2 {
            let w = (x - 0.5).abs().sqrt();
            Mat2::real(w, 0.0, 0.0, 1.0 / w)
        }
        fn singular_points(&self) -> Vec<f64> {
            vec![0.5]
        }
    }

    #[test]
    fn matrix_weight_with_opposite_powers() {
        let rep = q2e(&Split, 0..=6, &[0.0, 0.5, 1.0]).unwrap();
        assert!(!rep.divergent && rep.q < 1.2, "{:?}", rep.scale_trend);
        let fine = rep.scale_trend.last().unwrap().1;
        assert!((fine - (4.0f64 / 3.0).sqrt()).abs() < 2e-3, "{fine}");
    }

    #[test]
    fn a2_quotient_rejects_disjoint_intervals() {
        let unit = ScalarWeight { w: |_| 1.0, singular: vec![] };
        assert!(matches!(a2_quotient(&unit, 3.5, 0.5), Err(Error::EmptyIntersection { .. })));
    }

    #[test]
    fn projection_norm_under_refinement() {
        let root = ScalarWeight { w: |x: f64| x.abs().sqrt(), singular: vec![0.0] };
        let a = weighted_projection_norm(&root, 4.0, 256).norm;
        let b = weighted_projection_norm(&root, 4.0, 512).norm;
        assert!((b / a - 1.0).abs() < 0.05, "{a} {b}");
        // x² is not A₂: the discrete norm grows like the square root of the grid size
        let sq = ScalarWeight { w: |x: f64| x * x, singular: vec![0.0] };
        let mut prev = weighted_projection_norm(&sq, 4.0, 128).norm;
        for n in [256, 512, 1024] {
            let next = weighted_projection_norm(&sq, 4.0, n).norm;
            assert!(next / prev > 1.35, "{n} {prev} {next}");
            prev = next;
        }
    }

    fn sup_quotient(w: &dyn MatrixWeight) -> f64 {
        let mut q = q2e(w, 0..=5, &default_centers()).unwrap().q;
        for c in default_centers() {
            for d in [2.0, 4.0] {
                q = q.max(a2_quotient(w, c, d).unwrap());
            }
        }
        q
    }

    #[test]
    fn doubling_fails_for_the_naive_constant_near_the_ends() {
        let mut cells = vec![Mat2::identity(); 8];
        cells[6] = Mat2::real(1e-2, 0.0, 0.0, 1e-2);
        let w = PiecewiseWeight { cells };
        // λ = 2, η = 1: the added part (1.25, 1.5) carries too little mass
        let q = sup_quotient(&w);
        assert!(doubling_check(&w, 1.75, 0.25, 2.0, 1.0, q) < 0.0);
        assert!(doubling_check(&w, 1.75, 0.25, 4.0, HOMOGENEITY_ETA, q) >= 0.0);
    }

    #[test]
    fn doubling_on_random_piecewise_weights() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let w = PiecewiseWeight::random(8, &mut rng);
            let q = sup_quotient(&w);
            assert!(q.is_finite() && q >= 1.0 - 1e-10);
            let (eta, lambda) = (HOMOGENEITY_ETA, 2.0 / HOMOGENEITY_ETA);
            for c in [-2.0, -1.5, -0.3, 0.0, 0.9, 1.75] {
                for d in [0.05, 0.1, 0.2] {
                    let r = doubling_check(&w, c, d, lambda, eta, q);
                    assert!(r >= -1e-12, "{c} {d} {r} {q}");
                    assert!(poisson_check(&w, c, d, q) >= 0.0, "{c} {d}");
                }
            }
        }
    }

    #[test]
    fn inequality_ratio_is_scale_invariant() {
        let free = JacobiOperator::free();
        let g = Bump { center: 0.4, width: 0.3, vector: [C64::new(1.0, 0.5), C64::new(-0.2, 0.7)] };
        let mut h = g;
        h.vector = [g.vector[0] * 3.5, g.vector[1] * 3.5];
        let a = inequality_34_ratio(&free, &g, 256).unwrap();
        let b = inequality_34_ratio(&free, &h, 256).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
        let c = inequality_34_ratio(&free, &g, 512).unwrap();
        assert!((a / c - 1.0).abs() < 0.05, "{a} {c}");
    }

    #[test]
    fn projection_norm_of_identity_weight() {
        let unit = ScalarWeight { w: |_| 1.0, singular: vec![] };
        let r = weighted_projection_norm(&unit, 4.0, 256);
        assert!(r.norm <= 1.0 + 1e-6, "{r:?}");
        assert!(r.norm > 0.75);
    }

    #[test]
    fn doubling_and_poisson_for_the_identity() {
        let unit = ScalarWeight { w: |_| 1.0, singular: vec![] };
        // W(2I) = 2 W(I) ⪰ 1.25 W(I)
        let r = doubling_check(&unit, 0.0, 0.5, 2.0, 1.0, 1.0);
        assert!((r - 0.75 / 2.0).abs() < 1e-12, "{r}");
        assert!(poisson_check(&unit, 0.0, 0.5, 1.0) >= 0.0);
    }
}
