//! Acceptance criteria 1 to 11, one pass/fail line each.
//!
//! Runs without the test harness so every line reaches the output; the
//! process exits non-zero when any criterion fails.

use jscatter_cli::commands::{inequality_at_two_resolutions, inequality_bumps};
use jscatter_core::diagnostics::{
    a2_quotient, default_centers, doubling_check, identity_32_check, q2e, theorem04_panel, PanelOptions,
    PiecewiseWeight, ScalarWeight, HOMOGENEITY_ETA,
};
use jscatter_core::forward::{
    density_scattering_consistency, extract_scattering, jost_solutions, wronskian_residual, ScatteringMatrix,
};
use jscatter_core::gallery::{self, NonuniqueExample};
use jscatter_core::hankel::{hankel_from_spectrum, min_singular};
use jscatter_core::harmonic::{riesz_project, star, CircleFunction, CircleGrid, Spectrum};
use jscatter_core::inverse::{
    reconstruct, reconstruct_dual, uniqueness_defect, GridSymbols, InverseOptions, ModelDensity, ReflectionInput,
};
use jscatter_core::jacobi::{spectral_density, theta_nodes, JacobiOperator};
use jscatter_core::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::time::{Duration, Instant};

const S_FLOOR: f64 = 1e-8;
/// Defect threshold for the non-uniqueness example, fixed from an M-ladder run
/// before this suite was written.
const THETA: f64 = 0.25;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn grid(n: usize) -> CircleGrid {
    CircleGrid::new(n).unwrap()
}

fn forward(j: &JacobiOperator, n: usize) -> ScatteringMatrix {
    extract_scattering(&jost_solutions(j, grid(n)).unwrap()).unwrap()
}

fn opts(m: usize) -> InverseOptions {
    InverseOptions { trunc: m, ..Default::default() }
}

/// Smallest symmetric window `[-N, N]` holding every non-free site.
fn covering(j: &JacobiOperator) -> i64 {
    j.n_min().abs().max(j.n_max().abs()) + 1
}

fn random_windows(count: usize, seed: u64) -> Vec<JacobiOperator> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let width = rng.gen_range(1..=8);
            gallery::random_window(width, 0.3, &mut rng).unwrap()
        })
        .collect()
}

/// Free, three single bonds and three random windows.
fn operator_gallery() -> Vec<(String, JacobiOperator)> {
    let mut out = vec![("free".to_string(), gallery::free())];
    for c in [0.3, 0.7, 1.0] {
        out.push((format!("single_site({c})"), gallery::single_site(c).unwrap()));
    }
    for (i, j) in random_windows(3, 17).into_iter().enumerate() {
        out.push((format!("random_window#{i}"), j));
    }
    out
}

fn free_identities() -> Verdict {
    let sm = forward(&gallery::free(), 1024);
    let sup_plus = sm.s_plus.sup_norm();
    let s_dev = sm.s.boundary().values().iter().map(|v| (v - 1.0).norm()).fold(0.0, f64::max);
    let input = ReflectionInput::new(CircleFunction::constant(grid(1024), 0.0.into())).unwrap();
    let r = reconstruct(&input, 8, &opts(256)).unwrap();
    let err = r.jacobi.max_coeff_diff(&JacobiOperator::free());
    verdict(
        sup_plus <= 1e-12 && s_dev <= 1e-12 && err <= 1e-12,
        format!("sup|s+| {sup_plus:.1e}, sup|s-1| {s_dev:.1e}, inverse(0) coefficient error {err:.1e}"),
    )
}

fn roundtrip() -> Verdict {
    let windows = random_windows(20, 2);
    let errs: Vec<f64> = windows
        .par_iter()
        .map(|j| {
            let input = ReflectionInput::from_scattering(&forward(j, 2048), S_FLOOR);
            reconstruct(&input, covering(j), &opts(256)).unwrap().jacobi.max_coeff_diff(j)
        })
        .collect();
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    verdict(worst <= 1e-6, format!("20 windows, grid 2048, M 256, worst coefficient error {worst:.2e}"))
}

fn invariants() -> Verdict {
    let mut cases = operator_gallery();
    cases.extend(random_windows(20, 2).into_iter().enumerate().map(|(i, j)| (format!("roundtrip#{i}"), j)));
    let worst = cases
        .par_iter()
        .map(|(name, j)| (forward(j, 2048).invariants().worst(), name.clone()))
        .reduce(|| (0.0, String::new()), |a, b| if b.0 > a.0 { b } else { a });
    verdict(worst.0 <= 1e-10, format!("{} forward outputs, worst {:.2e} ({})", cases.len(), worst.0, worst.1))
}

fn wronskian() -> Verdict {
    let cases = operator_gallery();
    let worst = cases
        .iter()
        .map(|(name, j)| (wronskian_residual(&jost_solutions(j, grid(1024)).unwrap()), name))
        .fold((0.0, ""), |a, b| if b.0 > a.0 { (b.0, b.1.as_str()) } else { a });
    verdict(worst.0 <= 1e-9, format!("{} gallery matrices, worst {:.2e} ({})", cases.len(), worst.0, worst.1))
}

fn density_identities() -> Verdict {
    let n = 256;
    let nodes = theta_nodes(n, n / 16);
    let mut det = 0.0f64;
    let mut mat = 0.0f64;
    for (_, j) in operator_gallery() {
        let rho = spectral_density(&j, &nodes).unwrap();
        let rep = density_scattering_consistency(&j, &rho, f64::INFINITY).unwrap();
        det = det.max(rep.determinant);
        mat = mat.max(rep.matrix);
    }
    verdict(det <= 1e-6 && mat <= 1e-6, format!("determinant {det:.2e}, matrix {mat:.2e} at interior nodes"))
}

fn random_symbol(g: CircleGrid, rng: &mut ChaCha8Rng) -> CircleFunction {
    let lo = rng.gen_range(-4i64..=-1);
    let hi = rng.gen_range(0i64..=4);
    let pairs: Vec<(i64, C64)> = (lo..=hi).map(|k| (k, C64::new(rng.gen_range(-1.0..1.0), 0.0))).collect();
    let f = Spectrum::from_pairs(g, &pairs).unwrap().synthesize();
    let target = 0.9 * rng.gen_range(0.3..=1.0);
    f.scale(C64::new(target / f.sup_norm(), 0.0))
}

fn trig_symbols_unique() -> Verdict {
    let g = grid(1024);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let symbols: Vec<CircleFunction> = (0..10).map(|_| random_symbol(g, &mut rng)).collect();
    let rows: Vec<(f64, f64)> = symbols
        .par_iter()
        .map(|s| {
            let input = ReflectionInput::new(s.clone()).unwrap();
            let ladder: Vec<(f64, f64)> =
                [64, 128, 256].iter().map(|&m| uniqueness_defect(&input, &opts(m)).unwrap()).collect();
            let last = ladder[2].0.abs().max(ladder[2].1.abs());
            let step = (ladder[2].0 - ladder[1].0).abs().max((ladder[2].1 - ladder[1].1).abs());
            (last, step)
        })
        .collect();
    let worst = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let drift = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    verdict(
        worst <= 1e-6 && drift <= 1e-6,
        format!("10 symbols, worst defect {worst:.2e}, last ladder step {drift:.2e}"),
    )
}

fn example_nonunique() -> Verdict {
    let ex = NonuniqueExample::standard();
    let input = ex.reflection_input(grid(2048)).unwrap();
    let min_s = input.s.boundary().values().iter().fold(f64::INFINITY, |m, v| m.min(v.norm()));
    let mut min_sv = f64::INFINITY;
    let mut defect = f64::INFINITY;
    for m in [64, 128, 256] {
        for sym in [&input.s_plus_coeffs, &input.s_minus_coeffs] {
            min_sv = min_sv.min(min_singular(&hankel_from_spectrum(sym, 0, m).unwrap()));
        }
        let (dp, dm) = uniqueness_defect(&input, &opts(m)).unwrap();
        defect = defect.min(dp.min(dm));
    }
    let j = reconstruct(&input, 3, &opts(256)).unwrap().jacobi;
    let dual = reconstruct_dual(&input, 3, &opts(256), S_FLOOR).unwrap().jacobi;
    let gap = j.max_coeff_diff(&dual);
    verdict(
        min_s < 1e-3 && min_sv >= 0.4 && defect > THETA && THETA >= 1e-3 && gap > 1e-3,
        format!("min|s| {min_s:.1e}, min singular {min_sv:.3}, defect {defect:.5} > {THETA}, |J~ - J| {gap:.3}"),
    )
}

fn panel_coherence() -> Verdict {
    let g = grid(2048);
    let popts = PanelOptions::default();
    let mut rows: Vec<(String, bool, String)> = operator_gallery()
        .par_iter()
        .map(|(name, j)| {
            let input = ReflectionInput::from_scattering(&forward(j, 2048), S_FLOOR);
            let p = theorem04_panel(&input, j, &popts).unwrap();
            (name.clone(), p.coherent, format!("a2 {} hankel {} unique {}", p.a2_pass, p.hankel_pass, p.unique))
        })
        .collect();
    let model = |input: &ReflectionInput| ModelDensity::new(GridSymbols::new(input), input, &popts.inverse).unwrap();
    let bs = gallery::bernstein_szego(&[0.3, -0.2, 0.1], g).unwrap();
    let example = NonuniqueExample::standard().reflection_input(g).unwrap();
    for (name, input, expect_a2) in [("bernstein_szego", bs, true), ("example", example, false)] {
        let p = theorem04_panel(&input, &model(&input), &popts).unwrap();
        rows.push((
            name.into(),
            p.coherent && p.a2_pass == expect_a2,
            format!("a2 {} hankel {} unique {}", p.a2_pass, p.hankel_pass, p.unique),
        ));
    }
    let bad: Vec<String> = rows.iter().filter(|r| !r.1).map(|r| format!("{}: {}", r.0, r.2)).collect();
    let detail = if bad.is_empty() { format!("{} cases coherent", rows.len()) } else { bad.join("; ") };
    verdict(bad.is_empty(), detail)
}

fn star_kills_high_shifts() -> Verdict {
    let g = grid(64);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let low = rng.gen_range(0i64..=5);
        let len = rng.gen_range(1..=8);
        let pairs: Vec<(i64, C64)> = (0..len).map(|k| (k - low, C64::new(rng.gen_range(-1.0..1.0), 0.0))).collect();
        let f = Spectrum::from_pairs(g, &pairs).unwrap().synthesize();
        for n in low + 1..=low + 4 {
            let shifted = f.mul(&CircleFunction::monomial(g, n)).unwrap();
            worst = worst.max(riesz_project(&star(&shifted)).sup_norm() / f.sup_norm().max(1.0));
        }
    }
    verdict(worst <= 1e-13, format!("10 polynomials, 4 shifts each, worst {worst:.1e}"))
}

fn representation_and_inequality() -> Verdict {
    let zetas = [C64::new(0.3, 0.2), C64::from_polar(0.6, 2.0), C64::new(-0.5, -0.1)];
    let mats = [gallery::single_site(0.7).unwrap(), random_windows(1, 17).remove(0)];
    let mut ident = 0.0f64;
    for j in &mats {
        for k in [-1i64, 0, 2] {
            ident = ident.max(identity_32_check(j, j, &[(k, 1.0)], &zetas, 512).unwrap());
        }
    }
    let bumps = inequality_bumps(24, 7);
    let mut drift = 0.0f64;
    for j in [gallery::free(), gallery::single_site(0.7).unwrap()] {
        let (a, b) = inequality_at_two_resolutions(&j, &bumps, 256).unwrap();
        drift = drift.max((b / a - 1.0).abs());
    }
    verdict(ident <= 1e-6 && drift <= 0.05, format!("identity residual {ident:.2e}, ratio drift {:.2}%", 100.0 * drift))
}

fn sup_quotient(w: &PiecewiseWeight) -> f64 {
    let mut q = q2e(w, 0..=5, &default_centers()).unwrap().q;
    for c in default_centers() {
        for d in [2.0, 4.0] {
            q = q.max(a2_quotient(w, c, d).unwrap());
        }
    }
    q
}

fn a2_units() -> Verdict {
    let unit = ScalarWeight { w: |_| 1.0, singular: vec![] };
    let q_unit = q2e(&unit, 0..=5, &default_centers()).unwrap().q;
    let root = ScalarWeight { w: |x: f64| x.abs().sqrt(), singular: vec![0.0] };
    let root_rep = q2e(&root, 0..=6, &[0.0, 0.5, 1.0]).unwrap();
    let sq = ScalarWeight { w: |x: f64| x * x, singular: vec![0.0] };
    let sq_trend = q2e(&sq, 0..=6, &[0.0, 0.5, 1.0]).unwrap().scale_trend;
    let k = sq_trend.len();
    let growth = sq_trend[k - 1].1 / sq_trend[k - 4].1;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let weights: Vec<PiecewiseWeight> = (0..20).map(|_| PiecewiseWeight::random(8, &mut rng)).collect();
    let lambda = 2.0 / HOMOGENEITY_ETA;
    let worst = weights
        .par_iter()
        .map(|w| {
            let q = sup_quotient(w);
            let mut r = f64::INFINITY;
            for c in [-2.0, -1.5, -0.3, 0.0, 0.9, 1.75, 2.0] {
                for d in [0.05, 0.1, 0.2] {
                    r = r.min(doubling_check(w, c, d, lambda, HOMOGENEITY_ETA, q));
                }
            }
            r
        })
        .reduce(|| f64::INFINITY, f64::min);
    verdict(
        (q_unit - 1.0).abs() <= 1e-12 && !root_rep.divergent && growth >= 1.5 && worst >= -1e-12,
        format!(
            "Q(I) {q_unit:.12}, |x|^1/2 Q {:.3} finite, x^2 growth {growth:.2} over 3 scales, doubling min {worst:.2e} on 20 weights",
            root_rep.q
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict, Option<Duration>); 11] = [
        ("free-matrix identities", free_identities, Some(Duration::from_secs(1))),
        ("inverse of forward on random windows", roundtrip, Some(Duration::from_secs(120))),
        ("scattering-matrix invariants", invariants, None),
        ("wronskian independent of site", wronskian, None),
        ("density/scattering identities", density_identities, None),
        ("trig symbols are in the uniqueness regime", trig_symbols_unique, None),
        ("invertible but not unique example", example_nonunique, None),
        ("indicator panel coherence", panel_coherence, None),
        ("star annihilates high shifts", star_kills_high_shifts, None),
        ("representation identity and inequality stability", representation_and_inequality, None),
        ("A2 unit checks and doubling", a2_units, Some(Duration::from_secs(60))),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = run();
        let took = start.elapsed();
        let in_time = limit.map_or(true, |l| took <= l);
        let pass = v.pass && in_time;
        if !pass {
            failed += 1;
        }
        let budget = limit.map_or(String::new(), |l| format!(" (limit {} s)", l.as_secs()));
        let late = if in_time { "" } else { " [over time limit]" };
        println!(
            "criterion {:>2} {}  {name}: {}; {:.2} s{budget}{late}",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            took.as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
