//! Run configuration read from a TOML file.

use std::path::{Path, PathBuf};

use bnsf_shock::{Family, GasConstants, PhaseField, ShootOptions, State, TransportModel};
use serde::Deserialize;

use crate::Failure;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub gas: GasSection,
    pub coeffs: CoeffSection,
    pub left: LeftSection,
    pub shock: ShockSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasSection {
    #[serde(rename = "R", default = "one")]
    pub r: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

impl Default for GasSection {
    fn default() -> Self {
        Self { r: 1.0, gamma: 1.4 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffSection {
    pub model: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeftSection {
    pub v: f64,
    pub u: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShockSection {
    pub eps: f64,
    #[serde(default = "default_family")]
    pub family: u8,
}

/// Omitted fields take the solver defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub tol_end_factor: Option<f64>,
    pub xi_cap_factor: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_csv")]
    pub profile_csv: String,
    #[serde(default = "default_json")]
    pub report_json: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: default_dir(), profile_csv: default_csv(), report_json: default_json() }
    }
}

fn one() -> f64 {
    1.0
}
fn default_gamma() -> f64 {
    1.4
}
fn default_family() -> u8 {
    3
}
fn default_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_csv() -> String {
    "profile.csv".into()
}
fn default_json() -> String {
    "report.json".into()
}

/// Typed objects built from a validated config.
pub struct Setup {
    pub gas: GasConstants,
    pub coeffs: TransportModel,
    pub left: State,
    pub family: Family,
    pub options: ShootOptions,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Io(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, Failure> {
        toml::from_str(text).map_err(|e| Failure::Config(e.message().to_string()))
    }

    pub fn setup(&self) -> Result<Setup, Failure> {
        let gas = GasConstants::new(self.gas.r, self.gas.gamma).map_err(Failure::config)?;
        let coeffs =
            TransportModel::builtin(&self.coeffs.model, &self.coeffs.params).map_err(Failure::config)?;
        let left = State::new(self.left.v, self.left.u, self.left.theta).map_err(Failure::config)?;
        let family = Family::try_from(self.shock.family).map_err(Failure::config)?;
        let defaults = ShootOptions::default();
        let s = &self.solver;
        let options = ShootOptions {
            rel_tol: s.rel_tol.unwrap_or(defaults.rel_tol),
            abs_tol: s.abs_tol.unwrap_or(defaults.abs_tol),
            tol_end_factor: s.tol_end_factor.unwrap_or(defaults.tol_end_factor),
            xi_cap_factor: s.xi_cap_factor.unwrap_or(defaults.xi_cap_factor),
            ..defaults
        };
        options.validate().map_err(Failure::config)?;
        Ok(Setup { gas, coeffs, left, family, options })
    }
}

impl Setup {
    /// Phase field of the shock with amplitude `eps`; bad amplitudes are config errors.
    pub fn field(&self, eps: f64) -> Result<PhaseField, Failure> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Failure::config(bnsf_shock::Error::DegenerateAmplitude(eps)));
        }
        PhaseField::from_left(self.left, eps, self.family, self.gas, self.coeffs.clone())
            .map_err(Failure::config)
    }
}
