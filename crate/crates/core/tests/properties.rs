//! Invariants that hold for every admissible input, checked on random cases.

use jscatter_core::diagnostics::{
    a2_quotient, frak_h_boundary, q2e, Approach, PiecewiseWeight,
};
use jscatter_core::forward::{extract_scattering, jost_solutions, jump_relation_residual, wronskian_residual};
use jscatter_core::hankel::{hankel_from_spectrum, reproducing_kernel, DEFAULT_EPS_LADDER};
use jscatter_core::harmonic::{riesz_project, star, CircleGrid, Spectrum};
use jscatter_core::jacobi::{off_interval_eigenvalues, JacobiOperator};
use jscatter_core::linalg::Mat2;
use jscatter_core::C64;
use proptest::prelude::*;

fn window() -> impl Strategy<Value = JacobiOperator> {
    (1usize..=6, -3i64..=1)
        .prop_flat_map(|(w, lo)| {
            (
                Just(lo),
                prop::collection::vec(0.7f64..1.3, w),
                prop::collection::vec(-0.3f64..0.3, w),
            )
        })
        .prop_map(|(lo, p, q)| JacobiOperator::new(lo, p, q).unwrap())
        .prop_filter("bound states", |j| off_interval_eigenvalues(j).is_empty())
}

fn cells() -> impl Strategy<Value = Vec<(f64, f64, f64, f64)>> {
    prop::collection::vec((0.1f64..2.0, 0.1f64..2.0, -1.0f64..1.0, -1.0f64..1.0), 2..10)
}

/// `[[a, b], [b̄, d]]` scaled to be positive definite.
fn psd((a, d, re, im): (f64, f64, f64, f64)) -> Mat2 {
    let b = C64::new(re, im) * (0.9 * (a * d).sqrt() / C64::new(re, im).norm().max(1.0));
    Mat2::new(a.into(), b, b.conj(), d.into())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn forward_data_satisfy_the_scattering_identities(j in window()) {
        let fam = jost_solutions(&j, CircleGrid::new(256).unwrap()).unwrap();
        let sm = extract_scattering(&fam).unwrap();
        prop_assert!(sm.invariants().worst() <= 1e-10, "{:?}", sm.invariants());
        prop_assert!(wronskian_residual(&fam) <= 1e-9);
        prop_assert!(jump_relation_residual(&fam, &sm) <= 1e-9);
    }

    #[test]
    fn star_kills_high_shifts(coeffs in prop::collection::vec(-1.0f64..1.0, 1..8), low in 0i64..5, extra in 0i64..4) {
        let g = CircleGrid::new(64).unwrap();
        let pairs: Vec<(i64, C64)> = coeffs.iter().enumerate().map(|(k, c)| (k as i64 - low, C64::new(*c, 0.0))).collect();
        let f = Spectrum::from_pairs(g, &pairs).unwrap().synthesize();
        let n = low + extra;
        let shifted = f.mul(&jscatter_core::harmonic::CircleFunction::monomial(g, n)).unwrap();
        prop_assert!(riesz_project(&star(&shifted)).sup_norm() < 1e-13);
    }

    #[test]
    fn hankel_entries_follow_the_antidiagonals(coeffs in prop::collection::vec(-0.5f64..0.5, 1..12), shift in -3i64..3) {
        let g = CircleGrid::new(128).unwrap();
        let pairs: Vec<(i64, C64)> = coeffs.iter().enumerate().map(|(k, c)| (-(k as i64) - 1, C64::new(*c, 0.0))).collect();
        let spec = Spectrum::from_pairs(g, &pairs).unwrap();
        let h = hankel_from_spectrum(&spec, shift, 16).unwrap();
        for j in 0..16 {
            for k in 0..16 {
                let want = spec.get(-2 * shift - (j + k + 1) as i64).re;
                prop_assert!((h.entry(j, k) - want).abs() < 1e-15);
                prop_assert_eq!(h.entry(j, k), h.entry(k, j));
            }
        }
    }

    #[test]
    fn kernel_value_grows_as_regularization_shrinks(coeffs in prop::collection::vec(-0.25f64..0.25, 1..6)) {
        let g = CircleGrid::new(128).unwrap();
        let pairs: Vec<(i64, C64)> = coeffs.iter().enumerate().map(|(k, c)| (-(k as i64) - 1, C64::new(*c, 0.0))).collect();
        let h = hankel_from_spectrum(&Spectrum::from_pairs(g, &pairs).unwrap(), 0, 16).unwrap();
        let k = reproducing_kernel(&h, &DEFAULT_EPS_LADDER).unwrap();
        for w in k.eps_trace.windows(2) {
            prop_assert!(w[1].1 >= w[0].1 - 1e-14, "{:?}", k.eps_trace);
        }
    }

    #[test]
    fn a2_quotient_is_at_least_one_inside(c in cells(), x in -1.5f64..1.5, d in 0.05f64..0.5) {
        let w = PiecewiseWeight { cells: c.into_iter().map(psd).collect() };
        prop_assert!(a2_quotient(&w, x, d).unwrap() >= 1.0 - 1e-10);
    }

    #[test]
    fn pinching_bounds_the_quotient(c in cells(), factors in prop::collection::vec(1.0f64..3.0, 10)) {
        let w1 = PiecewiseWeight { cells: c.iter().copied().map(psd).collect() };
        let w2 = PiecewiseWeight {
            cells: w1.cells.iter().zip(&factors).map(|(m, f)| m.scale((*f).into())).collect(),
        };
        let centers = [-2.0, -1.0, -0.25, 0.0, 0.6, 1.3, 2.0];
        let q1 = q2e(&w1, 0..=3, &centers).unwrap().q;
        let q2 = q2e(&w2, 0..=3, &centers).unwrap().q;
        prop_assert!(q2 <= 3.0 * q1 * (1.0 + 1e-10), "{q1} {q2}");
    }

    #[test]
    fn transform_jumps_by_the_function(a in -1.0f64..1.0, b in -1.0f64..1.0, x0 in -1.8f64..1.8) {
        let g = move |x: f64| C64::new(a + b * x * x, b * x);
        let up = frak_h_boundary(&g, x0, Approach::Above, 256);
        let dn = frak_h_boundary(&g, x0, Approach::Below, 256);
        prop_assert!((dn - up - C64::new(0.0, 2.0 * std::f64::consts::PI) * g(x0)).norm() < 1e-12);
    }
}
