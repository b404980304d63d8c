//! Run configuration shared by all commands.

use crate::error::{CliError, CliResult};
use jscatter_core::hankel::DEFAULT_EPS_LADDER;
use jscatter_core::inverse::InverseOptions;
use serde::Serialize;
use std::path::PathBuf;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub grid_size: usize,
    pub truncation: usize,
    pub eps_ladder: Vec<f64>,
    pub tol_unitarity: f64,
    pub tol_wronskian: f64,
    pub tol_roundtrip: f64,
    pub tol_defect: f64,
    pub tol_gram: f64,
    pub s_floor: f64,
    pub log_floor: f64,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            grid_size: 1024,
            truncation: 256,
            eps_ladder: DEFAULT_EPS_LADDER.to_vec(),
            tol_unitarity: 1e-10,
            tol_wronskian: 1e-9,
            tol_roundtrip: 1e-6,
            tol_defect: 1e-6,
            tol_gram: 1e-4,
            s_floor: 1e-8,
            log_floor: 50.0,
            output_dir: PathBuf::from("."),
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> CliResult<()> {
        let n = self.grid_size;
        if !n.is_power_of_two() || n < 64 {
            return Err(CliError::Validation(format!("grid size {n} must be a power of two and at least 64")));
        }
        if self.truncation == 0 || self.truncation > n / 4 {
            return Err(CliError::Validation(format!(
                "truncation {} must lie in 1..={} (a quarter of the grid)",
                self.truncation,
                n / 4
            )));
        }
        if self.eps_ladder.is_empty()
            || self.eps_ladder.iter().any(|e| !(*e > 0.0))
            || self.eps_ladder.windows(2).any(|w| w[1] >= w[0])
        {
            return Err(CliError::Validation("eps ladder must be positive and strictly decreasing".into()));
        }
        let tols = [
            ("tol-unitarity", self.tol_unitarity),
            ("tol-wronskian", self.tol_wronskian),
            ("tol-roundtrip", self.tol_roundtrip),
            ("tol-defect", self.tol_defect),
            ("tol-gram", self.tol_gram),
            ("s-floor", self.s_floor),
            ("log-floor", self.log_floor),
        ];
        for (name, v) in tols {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Validation(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> CliResult<jscatter_core::harmonic::CircleGrid> {
        Ok(jscatter_core::harmonic::CircleGrid::new(self.grid_size)?)
    }

    pub fn inverse_options(&self) -> InverseOptions {
        InverseOptions { trunc: self.truncation, eps_ladder: self.eps_ladder.clone(), gram_tol: self.tol_gram }
    }

    /// Truncations of the M-ladder: 64, 128, ... up to the configured M.
    pub fn m_ladder(&self) -> Vec<usize> {
        let mut v: Vec<usize> = [64, 128, 256, 512, 1024].into_iter().filter(|m| *m < self.truncation).collect();
        v.push(self.truncation);
        v
    }
}
