//! Simulation run configuration.

use std::path::{Path, PathBuf};

use hybrid_core::dynamics::{GaussianState, HybridSystem, Method, PairState, PropagateOptions};
use hybrid_core::{Expression, ProductSpec, Sector};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::parse::parse;
use crate::parse_sigma;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// C-sector scheme `a,b,c`.
    #[serde(default = "weyl_text")]
    pub sigma_c: String,
    /// Q-sector scheme `a,b,c`.
    #[serde(default = "weyl_text")]
    pub sigma_q: String,
    pub hbar: f64,
    pub system: SystemConfig,
    pub state: Vec<PairConfig>,
    pub times: TimeGrid,
    #[serde(default = "default_method")]
    pub method: String,
    #[serde(default)]
    pub observables: Vec<String>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    pub output: OutputConfig,
}

fn weyl_text() -> String {
    "0,0,0".into()
}

fn default_method() -> String {
    Method::MatrixExponential.name().into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(default)]
    pub h_q: Option<String>,
    #[serde(default)]
    pub h_c: Option<String>,
    #[serde(default)]
    pub h_i: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SectorName {
    Q,
    C,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairConfig {
    pub sector: SectorName,
    #[serde(default)]
    pub index: u32,
    pub mean: [f64; 2],
    pub cov: [[f64; 2]; 2],
}

/// `steps + 1` equally spaced times on `[0, stop]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub stop: f64,
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Bound on the hybrid canonical audit.
    pub audit: f64,
    /// Bound on the drift of `⟨H⟩`.
    pub energy: f64,
    pub rk4_step: f64,
    pub taylor_order: u32,
    pub taylor_step: f64,
    pub taylor_tolerance: f64,
    pub degree_cap: u32,
}

impl Default for Tolerances {
    fn default() -> Self {
        let o = PropagateOptions::default();
        Tolerances {
            audit: 1e-9,
            energy: 1e-8,
            rk4_step: o.rk4_step,
            taylor_order: o.taylor_order,
            taylor_step: o.taylor_step,
            taylor_tolerance: o.taylor_tolerance,
            degree_cap: o.degree_cap,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Relative paths are resolved against the configuration file.
    pub csv: PathBuf,
    pub json: PathBuf,
}

/// Everything a simulation needs, validated.
pub struct Run {
    pub system: HybridSystem,
    pub state: GaussianState,
    pub times: Vec<f64>,
    pub method: Method,
    pub options: PropagateOptions,
    pub observables: Vec<(String, Expression)>,
    pub csv_path: PathBuf,
    pub json_path: PathBuf,
}

fn field_expr(field: &str, text: &Option<String>) -> Result<Expression, CliError> {
    match text {
        None => Ok(Expression::zero()),
        Some(s) => parse(s).map_err(|e| CliError::Input(format!("system.{field}: {e}"))),
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("invalid run configuration: {e}")))
    }

    /// Validate the configuration. `base` is the directory of the file.
    pub fn build(&self, base: &Path) -> Result<Run, CliError> {
        let sigma_c = parse_sigma(&self.sigma_c).map_err(|e| CliError::Input(format!("sigma_c: {e}")))?;
        let sigma_q = parse_sigma(&self.sigma_q).map_err(|e| CliError::Input(format!("sigma_q: {e}")))?;
        let spec = ProductSpec::new(sigma_c, sigma_q).map_err(|e| CliError::Input(e.to_string()))?;
        if !(self.hbar.is_finite() && self.hbar > 0.0) {
            return Err(CliError::Input(format!("hbar must be positive, got {}", self.hbar)));
        }
        let system = HybridSystem::new(
            field_expr("h_q", &self.system.h_q)?,
            field_expr("h_c", &self.system.h_c)?,
            field_expr("h_i", &self.system.h_i)?,
            spec,
            self.hbar,
        )?;
        let pairs: Vec<PairState> = self
            .state
            .iter()
            .map(|p| PairState {
                sector: match p.sector {
                    SectorName::Q => Sector::Q,
                    SectorName::C => Sector::C,
                },
                index: p.index,
                mean: p.mean,
                cov: p.cov,
            })
            .collect();
        let state = GaussianState::from_pairs(&pairs, self.hbar)?;
        if !(self.times.stop.is_finite() && self.times.stop > 0.0) || self.times.steps == 0 {
            return Err(CliError::Input("times: need stop > 0 and steps >= 1".into()));
        }
        let times = (0..=self.times.steps).map(|k| self.times.stop * k as f64 / self.times.steps as f64).collect();
        let method: Method = self.method.parse().map_err(CliError::Input)?;
        let t = &self.tolerances;
        if !(t.rk4_step > 0.0 && t.taylor_step > 0.0 && t.taylor_order >= 1 && t.audit >= 0.0 && t.energy >= 0.0) {
            return Err(CliError::Input(
                "tolerances: steps must be positive, taylor_order at least 1 and bounds nonnegative".into(),
            ));
        }
        let options = PropagateOptions {
            rk4_step: t.rk4_step,
            taylor_order: t.taylor_order,
            taylor_step: t.taylor_step,
            taylor_tolerance: t.taylor_tolerance,
            degree_cap: t.degree_cap,
            ..PropagateOptions::default()
        };
        let observables = self
            .observables
            .iter()
            .enumerate()
            .map(|(k, s)| {
                parse(s).map(|e| (s.clone(), e)).map_err(|e| CliError::Input(format!("observables[{k}]: {e}")))
            })
            .collect::<Result<_, _>>()?;
        Ok(Run {
            system,
            state,
            times,
            method,
            options,
            observables,
            csv_path: base.join(&self.output.csv),
            json_path: base.join(&self.output.json),
        })
    }
}
