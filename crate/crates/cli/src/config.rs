//! Run configuration: one JSON document, unknown keys rejected.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use soliton_forge::numeric::GridSpec;
use soliton_forge::{SolitonParams, SolutionRep, Spectrum};

use crate::CliError;

/// Grid overrides; missing fields fall back to the solution's default grid.
#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub half_width: Option<f64>,
    pub points: Option<usize>,
}

/// Randomized sweep settings.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub components: usize,
    pub instances: usize,
    #[serde(default = "default_mu_min")]
    pub mu_min: f64,
    #[serde(default = "default_mu_max")]
    pub mu_max: f64,
}

fn default_mu_min() -> f64 {
    -4.0
}

fn default_mu_max() -> f64 {
    -0.25
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Potentials `mu_1 <= ... <= mu_N`, all negative.
    pub spectrum: Option<Vec<f64>>,
    /// Amplitudes `a_1..a_N`.
    pub params: Option<Vec<f64>>,
    #[serde(default)]
    pub grid: GridConfig,
    /// Tolerance applied to every verification check.
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    /// Initial value ratio `u_2(0) / u_1(0)` for branch tracing.
    pub q: Option<f64>,
    /// Initial slope ratio `u_2'(0) / u_1'(0)`; enables preimage counting.
    pub p: Option<f64>,
    pub branch_points: Option<usize>,
    pub sweep: Option<SweepConfig>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn spectrum(&self) -> Result<Spectrum, CliError> {
        let mu = self
            .spectrum
            .clone()
            .ok_or_else(|| CliError::Config("config is missing \"spectrum\"".into()))?;
        Ok(Spectrum::new(mu)?)
    }

    pub fn params(&self) -> Result<SolitonParams, CliError> {
        let a = self
            .params
            .clone()
            .ok_or_else(|| CliError::Config("config is missing \"params\"".into()))?;
        Ok(SolitonParams::new(a)?)
    }

    pub fn solution(&self) -> Result<SolutionRep, CliError> {
        Ok(soliton_forge::build_solution(&self.spectrum()?, &self.params()?)?)
    }

    /// The check grid for `rep` with any overrides applied.
    pub fn grid_for(&self, rep: &SolutionRep) -> Result<GridSpec, CliError> {
        let base = soliton_forge::invariants::default_grid(rep);
        let hw = self.grid.half_width.unwrap_or(base.half_width());
        let n = self.grid.points.unwrap_or(base.n_points());
        Ok(GridSpec::new(hw, n)?)
    }
}
