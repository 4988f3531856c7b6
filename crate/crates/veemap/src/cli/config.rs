//! Configuration and plan documents.
//!
//! A run document is TOML with flat scalars at the top level and one level of
//! sectioning. The minimal form names a plan request by family indices:
//!
//! ```toml
//! k = 25
//! theta = 1
//! omega1 = 100.0
//! ```
//!
//! A full document may instead carry an explicit `[plan]`, the damping
//! environment in `[params]`, and run options in `[options]`. Unknown keys
//! are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::design::{design_protocol, design_protocol_damped, ProtocolPlan};
use crate::error::{Error, Result};
use crate::hilbert::SystemParams;
use crate::propagate::Mode;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvParams {
    #[serde(default)]
    pub kappa: f64,
    #[serde(default)]
    pub gamma0: f64,
    #[serde(default)]
    pub gamma1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_sum: Option<f64>,
}

impl EnvParams {
    pub fn to_system(&self) -> SystemParams {
        SystemParams {
            kappa: self.kappa,
            gamma0: self.gamma0,
            gamma1: self.gamma1,
            omega_sum: self.omega_sum,
            ..SystemParams::default()
        }
    }
}

fn default_grid() -> usize {
    64
}

fn default_tol() -> f64 {
    1e-10
}

fn default_seed() -> u64 {
    1
}

fn default_mode() -> String {
    "rwa".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default = "default_grid")]
    pub grid_chi: usize,
    #[serde(default = "default_grid")]
    pub grid_phi: usize,
    /// Local error per unit time for time-dependent integration.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Seed for optimizer restarts.
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            mode: default_mode(),
            grid_chi: default_grid(),
            grid_phi: default_grid(),
            tol: default_tol(),
            seed: default_seed(),
            output: None,
        }
    }
}

/// Fully validated run document.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Plan request by family indices (alternative to `[plan]`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<ProtocolPlan>,
    #[serde(default)]
    pub params: EnvParams,
    #[serde(default)]
    pub options: Options,
}

impl RunConfig {
    pub fn mode(&self) -> Result<Mode> {
        parse_mode(&self.options.mode)
    }

    /// Explicit plan if given, otherwise a freshly designed one (with decay
    /// corrections whenever the environment is damped).
    pub fn resolve_plan(&self) -> Result<ProtocolPlan> {
        if let Some(plan) = &self.plan {
            plan.validate()?;
            return Ok(plan.clone());
        }
        match (self.k, self.theta, self.omega1) {
            (Some(k), Some(theta), Some(omega1)) => {
                if self.params.kappa > 0.0 || self.params.gamma0 > 0.0 || self.params.gamma1 > 0.0 {
                    design_protocol_damped(
                        k,
                        theta,
                        omega1,
                        self.params.kappa,
                        self.params.gamma0,
                        self.params.gamma1,
                    )
                } else {
                    design_protocol(k, theta, omega1)
                }
            }
            _ => Err(Error::Config(
                "either [plan] or all of k, theta, omega1 must be given".into(),
            )),
        }
    }
}

pub fn parse_mode(mode: &str) -> Result<Mode> {
    match mode {
        "rwa" => Ok(Mode::Rwa),
        "full" => Ok(Mode::Full),
        other => Err(Error::Config(format!("mode must be 'rwa' or 'full', got '{other}'"))),
    }
}

/// Parse and validate a run document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let config: RunConfig =
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;

    if let Some(theta) = config.theta {
        if theta == 0 || theta.is_multiple_of(2) {
            return Err(Error::Config("theta must be odd".into()));
        }
    }
    if let Some(omega1) = config.omega1 {
        if !(omega1 > 0.0) {
            return Err(Error::Config("omega1 must be > 0".into()));
        }
    }
    if config.params.kappa < 0.0 {
        return Err(Error::Config("kappa must be >= 0".into()));
    }
    if config.params.gamma0 < 0.0 {
        return Err(Error::Config("gamma0 must be >= 0".into()));
    }
    if config.params.gamma1 < 0.0 {
        return Err(Error::Config("gamma1 must be >= 0".into()));
    }
    if let Some(ws) = config.params.omega_sum {
        if !(ws > 0.0) {
            return Err(Error::Config("omega_sum must be > 0".into()));
        }
    }
    if config.options.grid_chi < 8 || config.options.grid_phi < 8 {
        return Err(Error::Config("grid_chi and grid_phi must be >= 8".into()));
    }
    if !(1e-12..=1e-6).contains(&config.options.tol) {
        return Err(Error::Config("tol must lie in [1e-12, 1e-6]".into()));
    }
    parse_mode(&config.options.mode)?;
    if let Some(plan) = &config.plan {
        plan.validate()?;
    }
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Serialize a plan with its damping environment so it can be loaded back as
/// a run document.
pub fn plan_document(plan: &ProtocolPlan, params: &EnvParams) -> String {
    let config = RunConfig {
        plan: Some(plan.clone()),
        params: params.clone(),
        ..RunConfig::default()
    };
    toml::to_string_pretty(&config).expect("plan serialization cannot fail")
}

/// Parse a complex amplitude: `1`, `-0.5`, `0.8i`, `0.6+0.8i`, `0.6-0.8i`.
pub fn parse_complex(text: &str) -> Result<num_complex::Complex64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(Error::Config("empty complex number".into()));
    }
    let bad = |s: &str| Error::Config(format!("cannot parse complex number '{s}'"));

    let parse_imag = |part: &str| -> Result<f64> {
        let body = &part[..part.len() - 1];
        match body {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => body.parse::<f64>().map_err(|_| bad(part)),
        }
    };

    // split at the last +/- that is not leading and not an exponent sign
    let chars: Vec<char> = s.chars().collect();
    let mut split = None;
    for i in (1..chars.len()).rev() {
        if (chars[i] == '+' || chars[i] == '-')
            && chars[i - 1] != 'e'
            && chars[i - 1] != 'E'
        {
            split = Some(i);
            break;
        }
    }
    if s.ends_with('i') {
        if let Some(i) = split {
            let (re_part, im_part) = s.split_at(i);
            if re_part.ends_with('i') {
                return Err(bad(&s));
            }
            let re = re_part.parse::<f64>().map_err(|_| bad(&s))?;
            return Ok(num_complex::Complex64::new(re, parse_imag(im_part)?));
        }
        return Ok(num_complex::Complex64::new(0.0, parse_imag(&s)?));
    }
    let re = s.parse::<f64>().map_err(|_| bad(&s))?;
    Ok(num_complex::Complex64::new(re, 0.0))
}
