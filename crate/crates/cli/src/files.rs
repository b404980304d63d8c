//! On-disk formats: `jacobi.json`, `scattering.json` and the density CSV.

use crate::error::{CliError, CliResult};
use jscatter_core::harmonic::{CircleFunction, CircleGrid, OuterFunction, Spectrum};
use jscatter_core::jacobi::{JacobiOperator, SpectralDensity};
use jscatter_core::C64;
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use std::fs;
use std::path::Path;

/// Coefficients on the window starting at `n_min`; free outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JacobiFile {
    pub n_min: i64,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

impl JacobiFile {
    pub fn from_operator(j: &JacobiOperator) -> Self {
        JacobiFile { n_min: j.n_min(), p: j.p_window().to_vec(), q: j.q_window().to_vec() }
    }

    pub fn to_operator(&self) -> CliResult<JacobiOperator> {
        if self.p.len() != self.q.len() {
            return Err(CliError::Validation(format!(
                "p has {} entries but q has {}",
                self.p.len(),
                self.q.len()
            )));
        }
        if let Some((i, v)) = self.p.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(CliError::Validation(format!("p[{i}] = {v}: p must be positive")));
        }
        if let Some((i, v)) = self.q.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(CliError::Validation(format!("q[{i}] = {v}: q must be finite")));
        }
        Ok(JacobiOperator::new(self.n_min, self.p.clone(), self.q.clone())?)
    }
}

/// Real Fourier coefficients `[k, value]` of the reflection coefficient on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatteringFile {
    pub grid_size: usize,
    pub coeffs_s_plus: Vec<(i64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs_s_minus: Option<Vec<(i64, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs_s: Option<Vec<(i64, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_at_zero: Option<f64>,
}

/// Coefficients at or below this are FFT round-off and are not written.
pub const COEFF_CUTOFF: f64 = 1e-15;

/// Real parts of the Fourier coefficients above [`COEFF_CUTOFF`], ordered by index.
pub fn real_coeffs(f: &CircleFunction) -> Vec<(i64, f64)> {
    spectrum_coeffs(&f.analyze())
}

pub fn spectrum_coeffs(spec: &Spectrum) -> Vec<(i64, f64)> {
    spec.pairs().into_iter().filter(|(_, c)| c.re.abs() > COEFF_CUTOFF).map(|(k, c)| (k, c.re)).collect()
}

impl ScatteringFile {
    pub fn from_s_plus(s_plus: &CircleFunction) -> Self {
        ScatteringFile {
            grid_size: s_plus.grid().len(),
            coeffs_s_plus: real_coeffs(s_plus),
            coeffs_s_minus: None,
            coeffs_s: None,
            s_at_zero: None,
        }
    }

    /// `s₊` sampled on `grid`. Coefficients outside the grid's index range
    /// fold onto it, so the samples are those of the full series.
    pub fn s_plus_on(&self, grid: CircleGrid) -> CliResult<CircleFunction> {
        Ok(series("s+", &self.coeffs_s_plus)?.sampled_on(grid))
    }

    /// The stored series of `s₊` and `s₋`, when the file carries `s₋`.
    pub fn reflection_series(&self) -> CliResult<Option<(Spectrum, Spectrum)>> {
        let Some(minus) = &self.coeffs_s_minus else {
            return Ok(None);
        };
        Ok(Some((series("s+", &self.coeffs_s_plus)?, series("s-", minus)?)))
    }

    /// The stored `s` and `s₋` sampled on `grid`, when the file carries both.
    /// The coefficients of `s` are FFT samples, so they are only reused on the grid they were written for.
    pub fn transmission_on(&self, grid: CircleGrid) -> CliResult<Option<(OuterFunction, CircleFunction)>> {
        let (Some(coeffs), Some(s0), Some(minus)) = (&self.coeffs_s, self.s_at_zero, &self.coeffs_s_minus) else {
            return Ok(None);
        };
        if self.grid_size != grid.len() {
            return Ok(None);
        }
        let boundary = series("s", coeffs)?;
        let s = OuterFunction::from_boundary_with_value(boundary.sampled_on(grid), s0)
            .map_err(|e| CliError::Validation(format!("stored transmission coefficient: {e}")))?;
        Ok(Some((s, series("s-", minus)?.sampled_on(grid))))
    }
}

/// The series with the given real coefficients, on the smallest power-of-two
/// grid whose index range holds them all.
fn series(name: &str, coeffs: &[(i64, f64)]) -> CliResult<Spectrum> {
    for (k, v) in coeffs {
        if !v.is_finite() {
            return Err(CliError::Validation(format!("coefficient {k} of {name} is not finite")));
        }
    }
    let reach = coeffs.iter().map(|(k, _)| k.unsigned_abs() as usize).max().unwrap_or(0);
    let len = (2 * reach + 2).next_power_of_two().max(16);
    let grid = CircleGrid::new(len).map_err(|e| CliError::Validation(format!("{name} coefficients: {e}")))?;
    let pairs: Vec<(i64, C64)> = coeffs.iter().map(|(k, v)| (*k, C64::new(*v, 0.0))).collect();
    Spectrum::from_pairs(grid, &pairs).map_err(|e| CliError::Validation(format!("{name} coefficients: {e}")))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable report");
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Which input a file holds, decided by its keys.
pub enum InputFile {
    Jacobi(JacobiFile),
    Scattering(ScatteringFile),
}

pub fn read_input(path: &Path) -> CliResult<InputFile> {
    let value: serde_json::Value = read_json(path)?;
    let parse_err = |e: serde_json::Error| CliError::Validation(format!("{}: {e}", path.display()));
    if value.get("p").is_some() {
        Ok(InputFile::Jacobi(serde_json::from_value(value).map_err(parse_err)?))
    } else if value.get("coeffs_s_plus").is_some() {
        Ok(InputFile::Scattering(serde_json::from_value(value).map_err(parse_err)?))
    } else {
        Err(CliError::Validation(format!(
            "{}: neither a Jacobi file (n_min, p, q) nor a scattering file (grid_size, coeffs_s_plus)",
            path.display()
        )))
    }
}

/// Rows `x, ρ₁₁, Re ρ₁₂, Im ρ₁₂, ρ₂₂` in increasing `x`.
pub fn write_density_csv(path: &Path, density: &SpectralDensity) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e.into()))?;
    let io = |e: csv::Error| CliError::io(path, e.into());
    w.write_record(["x", "rho11", "re_rho12", "im_rho12", "rho22"]).map_err(io)?;
    let mut rows: Vec<usize> = (0..density.x_nodes.len()).collect();
    rows.sort_by(|a, b| density.x_nodes[*a].total_cmp(&density.x_nodes[*b]));
    for i in rows {
        let r = &density.rho[i];
        w.write_record([
            density.x_nodes[i].to_string(),
            r.get(0, 0).re.to_string(),
            r.get(0, 1).re.to_string(),
            r.get(0, 1).im.to_string(),
            r.get(1, 1).re.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_validation() {
        let f = JacobiFile { n_min: 0, p: vec![1.0, 0.0], q: vec![0.0, 0.0] };
        let e = f.to_operator().unwrap_err().to_string();
        assert!(e.contains("p must be positive"), "{e}");
        let f = JacobiFile { n_min: 0, p: vec![1.0], q: vec![] };
        assert!(f.to_operator().is_err());
    }

    #[test]
    fn scattering_roundtrip_through_json() {
        let g = CircleGrid::new(64).unwrap();
        let f = ScatteringFile { grid_size: 64, coeffs_s_plus: vec![(-1, 0.25), (2, -0.125)], coeffs_s_minus: None, coeffs_s: None, s_at_zero: None };
        let text = serde_json::to_string(&f).unwrap();
        assert_eq!(text, r#"{"grid_size":64,"coeffs_s_plus":[[-1,0.25],[2,-0.125]]}"#);
        let back: ScatteringFile = serde_json::from_str(&text).unwrap();
        let s = back.s_plus_on(g).unwrap();
        assert_eq!(real_coeffs(&s).len(), 2);
        assert!((s.analyze().get(-1).re - 0.25).abs() < 1e-15);
    }
}
