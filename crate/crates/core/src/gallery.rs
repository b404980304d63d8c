//! Test operators and reflection coefficients: the free matrix, single bond
//! defects, random windows, Bernstein–Szegő symbols and a scattering matrix
//! whose reflection coefficient does not determine the operator.

use crate::error::{Error, Result};
use crate::harmonic::{CircleFunction, CircleGrid, OuterFunction, Spectrum};
use crate::inverse::{ReflectionInput, Symbols, DEFAULT_S_FLOOR};
use crate::jacobi::{off_interval_eigenvalues, JacobiOperator};
use crate::linalg::Mat2;
use crate::C64;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent f64 math is only present when std is linked
use num_traits::Float;
use rand::Rng;

pub fn free() -> JacobiOperator {
    JacobiOperator::free()
}

/// A single bond `p₀ = c`, everything else free. Bound states appear for `c > 1`.
pub fn single_site(c: f64) -> Result<JacobiOperator> {
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::Invalid(alloc::format!("bond {c} outside (0, 1]")));
    }
    JacobiOperator::new(0, alloc::vec![c], alloc::vec![0.0])
}

/// A window of `width` sites starting at `-width/2` with `|p-1|, |q| ≤ magnitude`,
/// redrawn until no eigenvalue lies off `[-2, 2]`.
pub fn random_window<R: Rng + ?Sized>(width: usize, magnitude: f64, rng: &mut R) -> Result<JacobiOperator> {
    if width == 0 || !(0.0..1.0).contains(&magnitude) {
        return Err(Error::Invalid("need width ≥ 1 and magnitude in [0, 1)".into()));
    }
    for _ in 0..10_000 {
        let p: Vec<f64> = (0..width).map(|_| 1.0 + rng.gen_range(-magnitude..=magnitude)).collect();
        let q: Vec<f64> = (0..width).map(|_| rng.gen_range(-magnitude..=magnitude)).collect();
        let j = JacobiOperator::new(-(width as i64) / 2, p, q)?;
        if off_interval_eigenvalues(&j).is_empty() {
            return Ok(j);
        }
    }
    Err(Error::Invalid("no window without bound states found".into()))
}

/// `s₊ = Σ_k c_k t^{-k}` (`k ≥ 1`) with `Σ|c_k| < 1`; the density is then a
/// Bernstein–Szegő weight and the data are in the uniqueness regime.
pub fn bernstein_szego(coeffs: &[f64], grid: CircleGrid) -> Result<ReflectionInput> {
    let mass: f64 = coeffs.iter().map(|c| c.abs()).sum();
    if !(mass < 1.0) {
        return Err(Error::Invalid(alloc::format!("Σ|c_k| = {mass} must be below 1")));
    }
    let pairs: Vec<(i64, C64)> = coeffs.iter().enumerate().map(|(k, c)| (-(k as i64) - 1, C64::new(*c, 0.0))).collect();
    ReflectionInput::new(Spectrum::from_pairs(grid, &pairs)?.synthesize())
}

/// The scattering matrix
/// `S = diag(s⁰₋, s⁰₊) + U E (I - V E)^{-1} U`, `E = ½[[1+Δ, 1-Δ], [1-Δ, 1+Δ]]`,
/// with `v± = a± t`, `u± = √(1-a±²)`, `s⁰± = -a± t̄` and `Δ = t^d`.
/// The factor `(1-Δ)/2` makes `s` vanish at the `d`-th roots of unity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonuniqueExample {
    pub a_plus: f64,
    pub a_minus: f64,
    pub degree: u32,
}

impl NonuniqueExample {
    pub fn new(a_plus: f64, a_minus: f64, degree: u32) -> Result<Self> {
        let ok = |a: f64| a > 0.0 && a < 1.0;
        if !ok(a_plus) || !ok(a_minus) || degree < 2 {
            return Err(Error::Invalid("need 0 < a± < 1 and degree ≥ 2".into()));
        }
        Ok(NonuniqueExample { a_plus, a_minus, degree })
    }

    pub fn standard() -> Self {
        NonuniqueExample { a_plus: 0.5, a_minus: 0.5, degree: 2 }
    }

    fn u(a: f64) -> f64 {
        (1.0 - a * a).sqrt()
    }

    /// `S(t)` on the circle, rows and columns ordered `(-, +)`.
    pub fn matrix(&self, t: C64) -> Mat2 {
        let d = t.powu(self.degree);
        let one = C64::new(1.0, 0.0);
        let e = Mat2::new((one + d) * 0.5, (one - d) * 0.5, (one - d) * 0.5, (one + d) * 0.5);
        let (um, up) = (Self::u(self.a_minus), Self::u(self.a_plus));
        let u = Mat2::real(um, 0.0, 0.0, up);
        let v = Mat2::new(t * self.a_minus, 0.0.into(), 0.0.into(), t * self.a_plus);
        let inner = Mat2::identity().sub(&v.mul(&e)).inverse().expect("‖V E‖ < 1 on the circle");
        let s0 = Mat2::new(-t.conj() * self.a_minus, 0.0.into(), 0.0.into(), -t.conj() * self.a_plus);
        s0.add(&u.mul(&e).mul(&inner).mul(&u))
    }

    /// The closed form `s = u₊u₋(1-Δ)/2 / (1 - (v₊+v₋)(1+Δ)/2 + v₊v₋Δ)`, valid on `|ζ| ≤ 1`.
    pub fn s_closed(&self, zeta: C64) -> C64 {
        let d = zeta.powu(self.degree);
        let (vp, vm) = (zeta * self.a_plus, zeta * self.a_minus);
        let num = (1.0 - d) * 0.5 * Self::u(self.a_plus) * Self::u(self.a_minus);
        num / (1.0 - (vp + vm) * (1.0 + d) * 0.5 + vp * vm * d)
    }

    pub fn s_at_zero(&self) -> f64 {
        0.5 * Self::u(self.a_plus) * Self::u(self.a_minus)
    }

    /// `s₊ - s⁰₊`, analytic in the disk; its Hankel operator vanishes.
    pub fn analytic_part(&self, t: C64) -> C64 {
        self.matrix(t).get(1, 1) + t.conj() * self.a_plus
    }

    /// Grid data with the exact transmission coefficient.
    pub fn reflection_input(&self, grid: CircleGrid) -> Result<ReflectionInput> {
        let s_plus = CircleFunction::from_fn(grid, |t| self.matrix(t).get(1, 1));
        let s = OuterFunction::from_boundary_with_value(
            CircleFunction::from_fn(grid, |t| self.s_closed(t)),
            self.s_at_zero(),
        )?;
        Ok(ReflectionInput::with_transmission(s_plus, s, DEFAULT_S_FLOOR))
    }
}

impl Symbols for NonuniqueExample {
    fn s_at(&self, t: C64) -> C64 {
        self.s_closed(t)
    }
    fn s_plus_at(&self, t: C64) -> C64 {
        self.matrix(t).get(1, 1)
    }
}
