//! The subcommands. Each writes its artifacts and a `<command>_report.json`
//! with the residual gates; the process exit code follows the gates.

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::files::{
    read_input, read_json, real_coeffs, spectrum_coeffs, write_density_csv, write_json, InputFile, JacobiFile, ScatteringFile,
};
use jscatter_core::diagnostics::{
    identity_32_check, inequality_34_ratio, theorem04_panel, Bump, Panel, PanelOptions,
};
use jscatter_core::forward::{
    density_scattering_consistency, extract_scattering, jost_solutions, jump_relation_residual,
    wronskian_residual, ScatteringMatrix,
};
use jscatter_core::gallery::{self, NonuniqueExample};
use jscatter_core::inverse::{
    reconstruct, reconstruct_dual, shifted_kernel, uniqueness_defect, GridSymbols, ModelDensity,
    ReconstructionResult, ReflectionInput,
};
use jscatter_core::jacobi::{spectral_density, szego_class_check, theta_nodes, DensitySource, JacobiOperator};
use jscatter_core::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use std::fs;
use std::path::{Path, PathBuf};

/// One pass/fail check of a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gate {
    pub name: String,
    pub value: f64,
    /// `"max"`: passes when `value ≤ threshold`; `"min"`: when `value ≥ threshold`.
    pub kind: &'static str,
    pub threshold: f64,
    pub pass: bool,
}

impl Gate {
    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Gate { name: name.into(), value, kind: "max", threshold, pass: value <= threshold }
    }

    pub fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Gate { name: name.into(), value, kind: "min", threshold, pass: value >= threshold }
    }

    pub fn flag(name: &str, ok: bool) -> Self {
        let v = if ok { 1.0 } else { 0.0 };
        Gate { name: name.into(), value: v, kind: "min", threshold: 1.0, pass: ok }
    }
}

/// Result of one command.
#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub command: &'static str,
    pub passed: bool,
    pub gates: Vec<Gate>,
    pub details: Value,
    /// File names written to the output directory.
    pub written: Vec<String>,
}

impl Outcome {
    fn new(command: &'static str, gates: Vec<Gate>, details: Value) -> Self {
        let passed = gates.iter().all(|g| g.pass);
        Outcome { command, passed, gates, details, written: Vec::new() }
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }

    /// Human-readable gate table.
    pub fn table(&self) -> String {
        let mut s = format!("{}: {}\n", self.command, if self.passed { "PASS" } else { "FAIL" });
        for g in &self.gates {
            let op = if g.kind == "max" { "<=" } else { ">=" };
            s += &format!(
                "  {:<34} {:>12.4e} {op} {:<10.3e} {}\n",
                g.name,
                g.value,
                g.threshold,
                if g.pass { "ok" } else { "FAIL" }
            );
        }
        s
    }

    fn finish(mut self, cfg: &RunConfig, written: Vec<String>) -> CliResult<Self> {
        self.written = written;
        let name = format!("{}_report.json", self.command);
        self.written.push(name.clone());
        let report = json!({ "config": config_json(cfg), "outcome": &self });
        write_json(&cfg.output_dir.join(name), &report)?;
        Ok(self)
    }
}

fn config_json(cfg: &RunConfig) -> Value {
    let mut v = serde_json::to_value(cfg).expect("config serializes");
    // output location does not affect results; leave it out so reports compare byte for byte
    v.as_object_mut().map(|o| o.remove("output_dir"));
    v
}

fn prepare_out(cfg: &RunConfig) -> CliResult<PathBuf> {
    fs::create_dir_all(&cfg.output_dir).map_err(|e| CliError::io(&cfg.output_dir, e))?;
    Ok(cfg.output_dir.clone())
}

/// Forward data computed in memory.
pub struct ForwardData {
    pub scattering: ScatteringMatrix,
    pub gates: Vec<Gate>,
    pub details: Value,
}

/// Jost solutions, scattering matrix and its residual gates for one operator.
pub fn forward_data(j: &JacobiOperator, cfg: &RunConfig) -> CliResult<ForwardData> {
    let grid = cfg.grid()?;
    let fam = jost_solutions(j, grid)?;
    let sm = extract_scattering(&fam)?;
    let inv = sm.invariants();
    let wr = wronskian_residual(&fam);
    let jr = jump_relation_residual(&fam, &sm);
    let n = cfg.grid_size / 4;
    let interior = spectral_density(j, &theta_nodes(n, n / 16))?;
    let cons = density_scattering_consistency(j, &interior, f64::INFINITY)?;
    let gates = vec![
        Gate::at_most("unitarity", inv.unitarity, cfg.tol_unitarity),
        Gate::at_most("real_symmetry", inv.symmetry, cfg.tol_unitarity),
        Gate::at_most("compatibility", inv.compatibility, cfg.tol_unitarity),
        Gate::at_most("wronskian", wr, cfg.tol_wronskian),
        Gate::at_most("jump_relation", jr, cfg.tol_wronskian),
        Gate::at_most("determinant_identity", cons.determinant, 1e-6),
        Gate::at_most("density_matrix_identity", cons.matrix, 1e-6),
    ];
    let details = json!({
        "s_at_zero": inv.s_at_zero,
        "sup_s_plus": sm.s_plus.sup_norm(),
        "degenerate_nodes": sm.degenerate_nodes,
    });
    Ok(ForwardData { scattering: sm, gates, details })
}

fn scattering_file(sm: &ScatteringMatrix) -> ScatteringFile {
    ScatteringFile {
        grid_size: sm.s_plus.grid().len(),
        coeffs_s_plus: spectrum_coeffs(&sm.s_plus_series),
        coeffs_s_minus: Some(spectrum_coeffs(&sm.s_minus_series)),
        coeffs_s: Some(real_coeffs(sm.s.boundary())),
        s_at_zero: Some(sm.s.value_at_zero()),
    }
}

/// `forward`: Jacobi file → scattering data, density CSV and residual report.
pub fn cmd_forward(jacobi: &Path, cfg: &RunConfig) -> CliResult<Outcome> {
    cfg.validate()?;
    let j = read_json::<JacobiFile>(jacobi)?.to_operator()?;
    let out = prepare_out(cfg)?;
    let fd = forward_data(&j, cfg)?;
    write_json(&out.join("scattering.json"), &scattering_file(&fd.scattering))?;
    let density = spectral_density(&j, &theta_nodes(cfg.grid_size / 4, 0))?;
    write_density_csv(&out.join("density.csv"), &density)?;
    Outcome::new("forward", fd.gates, fd.details).finish(cfg, vec!["scattering.json".into(), "density.csv".into()])
}

/// Reflection data read from a scattering file on the configured grid.
pub fn load_reflection(path: &Path, cfg: &RunConfig) -> CliResult<ReflectionInput> {
    let file: ScatteringFile = read_json(path)?;
    if !file.grid_size.is_power_of_two() || file.grid_size < 16 {
        return Err(CliError::Validation(format!(
            "{}: grid_size {} must be a power of two",
            path.display(),
            file.grid_size
        )));
    }
    reflection_input(&file, cfg)
}

/// Uses the stored `s` and `s₋` when present on the run grid, else rebuilds them from `s₊`.
pub fn reflection_input(file: &ScatteringFile, cfg: &RunConfig) -> CliResult<ReflectionInput> {
    let grid = cfg.grid()?;
    let s_plus = file.s_plus_on(grid)?;
    match file.transmission_on(grid)? {
        Some((s, s_minus)) => {
            let input = ReflectionInput::with_parts(s_plus, s, s_minus, cfg.s_floor)?;
            let (sp, sm) = file.reflection_series()?.expect("s- is stored");
            Ok(input.with_series(&sp, &sm))
        }
        None => Ok(ReflectionInput::with_floors(s_plus, cfg.s_floor, cfg.log_floor)?),
    }
}

/// Reconstruction, dual reconstruction and defects along the M-ladder.
pub struct InverseData {
    pub result: ReconstructionResult,
    pub defects: (f64, f64),
    /// `None` when the mirrored data could not be reconstructed.
    pub dual_discrepancy: Option<f64>,
    pub gates: Vec<Gate>,
    pub details: Value,
}

pub fn inverse_data(input: &ReflectionInput, half_width: i64, cfg: &RunConfig) -> CliResult<InverseData> {
    let opts = cfg.inverse_options();
    let result = reconstruct(input, half_width, &opts)?;
    let ladder: Vec<(usize, (f64, f64))> = cfg
        .m_ladder()
        .par_iter()
        .map(|&m| {
            let o = jscatter_core::inverse::InverseOptions { trunc: m, ..opts.clone() };
            uniqueness_defect(input, &o).map(|d| (m, d))
        })
        .collect::<Result<_, _>>()?;
    let defects = ladder.last().expect("nonempty ladder").1;
    let tol = cfg.tol_defect;
    let settled = ladder.windows(2).all(|w| {
        w[1].1 .0.abs() <= w[0].1 .0.abs() + tol && w[1].1 .1.abs() <= w[0].1 .1.abs() + tol
    });
    // The dual is informational: a failure is reported, not fatal.
    let (dual_discrepancy, dual_details) = match reconstruct_dual(input, half_width, &opts, cfg.s_floor) {
        Ok(dual) => {
            let d = result.jacobi.max_coeff_diff(&dual.jacobi);
            (
                Some(d),
                json!({ "coefficient_discrepancy": d, "direct_discrepancy": dual.direct_discrepancy, "masked_nodes": dual.masked_nodes }),
            )
        }
        Err(e) => (None, json!({ "error": e.to_string() })),
    };
    let spec_p = &input.s_plus_coeffs;
    let spec_m = &input.s_minus_coeffs;
    let mut traces = Vec::new();
    for (name, spec) in [("s_plus", &spec_p), ("s_minus", &spec_m)] {
        for shift in [0i64, -1] {
            let k = shifted_kernel(spec, shift, &opts)?;
            traces.push(json!({ "symbol": name, "shift": shift, "eps_trace": k.eps_trace }));
        }
    }
    let gates = vec![
        Gate::at_most("gram_residual", result.gram_residual, cfg.tol_gram),
        Gate::at_most("defect_plus", defects.0.abs(), tol),
        Gate::at_most("defect_minus", defects.1.abs(), tol),
        Gate::flag("defects_settled_along_m_ladder", settled),
    ];
    let details = json!({
        "defect_plus": defects.0,
        "defect_minus": defects.1,
        "unique": defects.0.abs() <= tol && defects.1.abs() <= tol,
        "m_ladder": ladder.iter().map(|(m, d)| json!({ "m": m, "defect_plus": d.0, "defect_minus": d.1 })).collect::<Vec<_>>(),
        "kernels_at_zero": result.kernels_at_zero,
        "ratio_residual": result.ratio_residual,
        "imag_residual": result.imag_residual,
        "dual": dual_details,
        "kernel_traces": traces,
    });
    Ok(InverseData { result, defects, dual_discrepancy, gates, details })
}

/// `inverse`: scattering file → recovered window and defect report.
pub fn cmd_inverse(scattering: &Path, half_width: i64, cfg: &RunConfig) -> CliResult<Outcome> {
    cfg.validate()?;
    check_half_width(half_width, cfg)?;
    let input = load_reflection(scattering, cfg)?;
    let out = prepare_out(cfg)?;
    let inv = inverse_data(&input, half_width, cfg)?;
    write_json(&out.join("jacobi.json"), &JacobiFile::from_operator(&inv.result.jacobi))?;
    Outcome::new("inverse", inv.gates, inv.details).finish(cfg, vec!["jacobi.json".into()])
}

fn check_half_width(n: i64, cfg: &RunConfig) -> CliResult<()> {
    if n < 1 || n as usize > cfg.truncation / 8 {
        return Err(CliError::Validation(format!(
            "half width {n} must lie in 1..={} (an eighth of the truncation)",
            cfg.truncation / 8
        )));
    }
    Ok(())
}

/// Half width of a reconstruction window covering the operator's window.
pub fn covering_half_width(j: &JacobiOperator) -> i64 {
    (-j.n_min()).max(j.n_max()).max(1)
}

/// `roundtrip`: Jacobi file → forward → (s₊ only) → inverse, compared with the input.
pub fn cmd_roundtrip(jacobi: &Path, cfg: &RunConfig) -> CliResult<Outcome> {
    cfg.validate()?;
    let j = read_json::<JacobiFile>(jacobi)?.to_operator()?;
    let out = prepare_out(cfg)?;
    let n = covering_half_width(&j);
    check_half_width(n, cfg)?;
    let fd = forward_data(&j, cfg)?;
    let input = ReflectionInput::from_scattering(&fd.scattering, cfg.s_floor);
    let result = reconstruct(&input, n, &cfg.inverse_options())?;
    let err = result.jacobi.max_coeff_diff(&j);
    write_json(&out.join("jacobi.json"), &JacobiFile::from_operator(&result.jacobi))?;
    let mut gates = fd.gates;
    gates.push(Gate::at_most("gram_residual", result.gram_residual, cfg.tol_gram));
    gates.push(Gate::at_most("roundtrip_coefficient_error", err, cfg.tol_roundtrip));
    let details = json!({ "forward": fd.details, "half_width": n, "max_coefficient_error": err });
    Outcome::new("roundtrip", gates, details).finish(cfg, vec!["jacobi.json".into()])
}

/// What `gallery` generates.
#[derive(Debug, Clone, PartialEq)]
pub enum GallerySpec {
    Free,
    SingleSite { c: f64 },
    RandomWindow { width: usize, magnitude: f64, seed: u64 },
    BernsteinSzego { coeffs: Vec<f64> },
    ExampleNonunique { a_plus: f64, a_minus: f64, degree: u32 },
}

impl GallerySpec {
    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Validation(m));
        match self {
            GallerySpec::SingleSite { c } if !(*c > 0.0 && *c <= 1.0) => {
                bad(format!("single-site bond {c} must lie in (0, 1] (larger bonds create bound states)"))
            }
            GallerySpec::RandomWindow { width, magnitude, .. } if *width == 0 || !(*magnitude >= 0.0 && *magnitude < 1.0) => {
                bad("random window needs width >= 1 and magnitude in [0, 1)".into())
            }
            GallerySpec::BernsteinSzego { coeffs } if coeffs.iter().map(|c| c.abs()).sum::<f64>() >= 1.0 => {
                bad("Bernstein-Szego coefficients need sum |c_k| < 1".into())
            }
            GallerySpec::ExampleNonunique { a_plus, a_minus, degree } => {
                NonuniqueExample::new(*a_plus, *a_minus, *degree).map_err(|e| CliError::Validation(e.to_string()))?;
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// The operator for specs given by a Jacobi matrix.
    pub fn operator(&self) -> CliResult<Option<JacobiOperator>> {
        Ok(match self {
            GallerySpec::Free => Some(gallery::free()),
            GallerySpec::SingleSite { c } => Some(gallery::single_site(*c)?),
            GallerySpec::RandomWindow { width, magnitude, seed } => {
                Some(gallery::random_window(*width, *magnitude, &mut ChaCha8Rng::seed_from_u64(*seed))?)
            }
            _ => None,
        })
    }

    pub fn name(&self) -> String {
        match self {
            GallerySpec::Free => "free".into(),
            GallerySpec::SingleSite { c } => format!("single_site({c})"),
            GallerySpec::RandomWindow { width, magnitude, seed } => format!("random_window({width}, {magnitude}, {seed})"),
            GallerySpec::BernsteinSzego { coeffs } => format!("bernstein_szego({coeffs:?})"),
            GallerySpec::ExampleNonunique { a_plus, a_minus, degree } => {
                format!("example_nonunique({a_plus}, {a_minus}, {degree})")
            }
        }
    }
}

/// `gallery`: writes the input files of one gallery case and checks them.
pub fn cmd_gallery(spec: &GallerySpec, cfg: &RunConfig) -> CliResult<Outcome> {
    cfg.validate()?;
    spec.validate()?;
    let out = prepare_out(cfg)?;
    let grid = cfg.grid()?;
    let mut written = Vec::new();
    let (gates, details) = if let Some(j) = spec.operator()? {
        write_json(&out.join("jacobi.json"), &JacobiFile::from_operator(&j))?;
        let fd = forward_data(&j, cfg)?;
        write_json(&out.join("scattering.json"), &scattering_file(&fd.scattering))?;
        written.extend(["jacobi.json".to_string(), "scattering.json".to_string()]);
        (fd.gates, json!({ "case": spec.name(), "forward": fd.details }))
    } else {
        let (sm, mut gates, mut details) = match spec {
            GallerySpec::BernsteinSzego { coeffs } => {
                let input = gallery::bernstein_szego(coeffs, grid)?;
                let md = ModelDensity::new(GridSymbols::new(&input), &input, &cfg.inverse_options())?;
                let sz = szego_class_check(&md, 64, 4, cfg.log_floor)?;
                let sm = ScatteringMatrix::from_s_plus_and_s(input.s_plus.clone(), input.s.clone())?;
                (sm, vec![Gate::flag("szego_class", sz.pass)], json!({ "szego_value": sz.value }))
            }
            GallerySpec::ExampleNonunique { a_plus, a_minus, degree } => {
                let ex = NonuniqueExample::new(*a_plus, *a_minus, *degree)?;
                let input = ex.reflection_input(grid)?;
                let min_s = input.s.boundary().values().iter().fold(f64::INFINITY, |m, v| m.min(v.norm()));
                let sm = ScatteringMatrix::from_s_plus_and_s(input.s_plus.clone(), input.s.clone())?;
                (sm, vec![Gate::at_most("min_abs_s", min_s, 1e-3)], json!({ "min_abs_s": min_s, "flagged_nodes": input.flagged }))
            }
            _ => unreachable!("operator specs handled above"),
        };
        let inv = sm.invariants();
        gates.push(Gate::at_most("unitarity", inv.unitarity, cfg.tol_unitarity));
        gates.push(Gate::at_most("real_symmetry", inv.symmetry, cfg.tol_unitarity));
        gates.push(Gate::at_most("compatibility", inv.compatibility, cfg.tol_unitarity));
        details["case"] = json!(spec.name());
        details["s_at_zero"] = json!(inv.s_at_zero);
        write_json(&out.join("scattering.json"), &scattering_file(&sm))?;
        written.push("scattering.json".into());
        (gates, details)
    };
    Outcome::new("gallery", gates, details).finish(cfg, written)
}

/// Random bumps for the weighted inequality; deterministic in the seed.
pub fn inequality_bumps(trials: usize, seed: u64) -> Vec<Bump> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials)
        .map(|_| {
            let c: f64 = rng.gen_range(-1.9..1.9);
            let w = rng.gen_range(0.05..0.6f64).min(2.0 - c.abs());
            let mut v = || C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            Bump { center: c, width: w, vector: [v(), v()] }
        })
        .collect()
}

/// Largest inequality ratio over the bumps at `nodes` and at `2·nodes`.
pub fn inequality_at_two_resolutions(
    density: &(dyn DensitySource + Sync),
    bumps: &[Bump],
    nodes: usize,
) -> CliResult<(f64, f64)> {
    let best = |n: usize| -> CliResult<f64> {
        let r: Vec<f64> = bumps
            .par_iter()
            .map(|b| inequality_34_ratio(density, b, n))
            .collect::<Result<_, _>>()?;
        Ok(r.into_iter().fold(0.0, f64::max))
    };
    Ok((best(nodes)?, best(2 * nodes)?))
}

fn panel_options(cfg: &RunConfig) -> PanelOptions {
    let truncations = [64usize, 128, 256].into_iter().filter(|m| *m <= cfg.truncation).collect::<Vec<_>>();
    PanelOptions {
        truncations: if truncations.is_empty() { vec![cfg.truncation] } else { truncations },
        tol_defect: cfg.tol_defect,
        inverse: cfg.inverse_options(),
        ..Default::default()
    }
}

fn panel_json(p: &Panel) -> Value {
    json!({
        "a2_q": p.a2.q,
        "a2_scale_trend": p.a2.scale_trend,
        "a2_divergent": p.a2.divergent,
        "min_singular_trend": p.min_singular_trend,
        "defect_plus": p.defect_plus,
        "defect_minus": p.defect_minus,
        "a2_pass": p.a2_pass,
        "hankel_pass": p.hankel_pass,
        "unique": p.unique,
        "coherent": p.coherent,
    })
}

fn write_a2_csv(path: &Path, p: &Panel) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e.into()))?;
    let io = |e: csv::Error| CliError::io(path, e.into());
    w.write_record(["delta", "max_quotient"]).map_err(io)?;
    for (d, q) in &p.a2.scale_trend {
        w.write_record([d.to_string(), q.to_string()]).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Everything `diagnose` computes for one input.
pub struct Diagnosis {
    pub panel: Panel,
    pub inequality: (f64, f64),
    pub identity_residual: Option<f64>,
}

/// The panel, the inequality ratio at two resolutions and, for Jacobi input,
/// the representation identity residual.
pub fn diagnose_input(input: &InputFile, cfg: &RunConfig, trials: usize) -> CliResult<Diagnosis> {
    let bumps = inequality_bumps(trials, cfg.seed);
    let popts = panel_options(cfg);
    match input {
        InputFile::Jacobi(f) => {
            let j = f.to_operator()?;
            let fd = forward_data(&j, cfg)?;
            let refl = ReflectionInput::from_scattering(&fd.scattering, cfg.s_floor);
            let panel = theorem04_panel(&refl, &j, &popts)?;
            let inequality = inequality_at_two_resolutions(&j, &bumps, 256)?;
            let zetas = [C64::new(0.3, 0.2), C64::from_polar(0.6, 2.0), C64::new(-0.5, -0.1)];
            let mut worst = 0.0f64;
            for k in [-1i64, 0, 2] {
                worst = worst.max(identity_32_check(&j, &j, &[(k, 1.0)], &zetas, 512)?);
            }
            Ok(Diagnosis { panel, inequality, identity_residual: Some(worst) })
        }
        InputFile::Scattering(f) => {
            let refl = reflection_input(f, cfg)?;
            let md = ModelDensity::new(GridSymbols::new(&refl), &refl, &cfg.inverse_options())?;
            let panel = theorem04_panel(&refl, &md, &popts)?;
            let inequality = inequality_at_two_resolutions(&md, &bumps, 256)?;
            Ok(Diagnosis { panel, inequality, identity_residual: None })
        }
    }
}

/// `diagnose`: three-indicator panel, inequality estimate and A₂ trend CSV.
pub fn cmd_diagnose(path: &Path, cfg: &RunConfig, trials: usize) -> CliResult<Outcome> {
    cfg.validate()?;
    let input = read_input(path)?;
    let out = prepare_out(cfg)?;
    let d = diagnose_input(&input, cfg, trials)?;
    write_a2_csv(&out.join("a2_trend.csv"), &d.panel)?;
    let (c1, c2) = d.inequality;
    let stable = (c2 / c1 - 1.0).abs() <= 0.05;
    let mut gates = vec![Gate::flag("panel_coherent", d.panel.coherent)];
    if d.panel.a2_pass {
        gates.push(Gate::at_most("inequality_ratio_drift", (c2 / c1 - 1.0).abs(), 0.05));
    }
    if let Some(r) = d.identity_residual {
        gates.push(Gate::at_most("representation_identity", r, 1e-6));
    }
    let details = json!({
        "panel": panel_json(&d.panel),
        "inequality_ratio": { "nodes_256": c1, "nodes_512": c2, "stable": stable },
        "identity_residual": d.identity_residual,
    });
    Outcome::new("diagnose", gates, details).finish(cfg, vec!["a2_trend.csv".into()])
}
