//! Scenario files.
//!
//! TOML sections: `[resource]` (both squeezers) or `[squeezer_1]` and
//! `[squeezer_2]`; `[gains]`; `[input]`; `[losses]`; `[eve]`; `[swap]`;
//! `[pipeline]`. Variances are in shot-noise units. Squeezer variances may
//! instead be written as a level in dB, e.g. `var_sqz = "3 dB"` (a variance
//! 3 dB below shot noise) and `var_anti = "6 dB"` (6 dB above).
//! Unknown keys are rejected.

use std::f64::consts::FRAC_1_SQRT_2;
use std::path::Path;

use serde::Deserialize;

use cvtele_core::spectra::{Averages, DEFAULT_AVERAGES};
use cvtele_core::teleporter::{EveSite, Gains, ProtocolConfig, SqueezerSpec};

use crate::CliError;

#[derive(Deserialize, Debug, Clone)]
#[serde(untagged)]
pub enum Quantity {
    Value(f64),
    Tagged(String),
}

impl Quantity {
    /// `above`: whether a dB level means a variance above shot noise.
    fn variance(&self, field: &str, above: bool) -> Result<f64, CliError> {
        match self {
            Quantity::Value(v) => Ok(*v),
            Quantity::Tagged(s) => {
                let num = s
                    .trim()
                    .strip_suffix("dB")
                    .map(str::trim)
                    .and_then(|n| n.parse::<f64>().ok())
                    .filter(|n| n.is_finite())
                    .ok_or_else(|| CliError::Config(format!("{field}: expected a number or \"<x> dB\", got {s:?}")))?;
                let db = num.abs();
                Ok(10f64.powf(if above { db } else { -db } / 10.0))
            }
        }
    }
}

#[derive(Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct SqueezerSection {
    pub var_sqz: Quantity,
    /// Defaults to `1/var_sqz` (a pure squeezer).
    pub var_anti: Option<Quantity>,
}

impl SqueezerSection {
    fn spec(&self, section: &str) -> Result<SqueezerSpec, CliError> {
        let s = self.var_sqz.variance(&format!("{section}.var_sqz"), false)?;
        let a = match &self.var_anti {
            Some(q) => q.variance(&format!("{section}.var_anti"), true)?,
            None => 1.0 / s,
        };
        SqueezerSpec::new(s, a).map_err(|e| CliError::Config(format!("[{section}]: {e}")))
    }
}

#[derive(Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields)]
pub struct GainsSection {
    pub g: Option<f64>,
    pub g_plus: Option<f64>,
    pub g_minus: Option<f64>,
}

#[derive(Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields)]
pub struct InputSection {
    /// Total amplitude, split equally between quadratures.
    pub alpha: Option<f64>,
    pub alpha_plus: Option<f64>,
    pub alpha_minus: Option<f64>,
    pub var_plus: Option<f64>,
    pub var_minus: Option<f64>,
}

#[derive(Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields)]
pub struct LossesSection {
    pub victor_loss: Option<f64>,
    pub bob_efficiency: Option<f64>,
    pub dark_noise: Option<f64>,
}

#[derive(Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct EveSection {
    pub site: EveSite,
    pub fraction: f64,
}

#[derive(Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct SwapSection {
    /// The second entangled pair, one beam of which is teleported.
    pub input: SqueezerSection,
}

#[derive(Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields)]
pub struct PipelineSection {
    /// Sweeps per spectral estimate; `"infinite"` for exact means.
    pub averages: Option<AveragesValue>,
    /// Standard deviation of per-run gain drift.
    pub gain_drift: Option<f64>,
}

#[derive(Deserialize, Debug, Clone)]
#[serde(untagged)]
pub enum AveragesValue {
    Count(u32),
    Word(String),
}

#[derive(Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub resource: Option<SqueezerSection>,
    pub squeezer_1: Option<SqueezerSection>,
    pub squeezer_2: Option<SqueezerSection>,
    #[serde(default)]
    pub gains: GainsSection,
    #[serde(default)]
    pub input: InputSection,
    #[serde(default)]
    pub losses: LossesSection,
    pub eve: Option<EveSection>,
    pub swap: Option<SwapSection>,
    #[serde(default)]
    pub pipeline: PipelineSection,
}

/// Everything a command needs to evaluate one point.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub protocol: ProtocolConfig,
    /// Resource of the pair fed to the teleporter in swapping runs.
    pub swap_input: Option<SqueezerSpec>,
    pub averages: Averages,
    pub gain_drift: f64,
}

impl Scenario {
    pub fn new(protocol: ProtocolConfig) -> Self {
        Self {
            protocol,
            swap_input: None,
            averages: Averages::Count(DEFAULT_AVERAGES),
            gain_drift: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.protocol
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(s) = self.swap_input {
            s.validate().map_err(|e| CliError::Config(format!("[swap.input]: {e}")))?;
        }
        if !(self.gain_drift.is_finite() && self.gain_drift >= 0.0) {
            return Err(CliError::Config(format!(
                "pipeline.gain_drift: must be finite and non-negative, got {}",
                self.gain_drift
            )));
        }
        self.averages
            .validate()
            .map_err(|e| CliError::Config(format!("pipeline.averages: {e}")))
    }
}

fn pick(a: Option<f64>, b: Option<f64>, default: f64) -> f64 {
    a.or(b).unwrap_or(default)
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn into_scenario(self) -> Result<Scenario, CliError> {
        let (s1, s2) = match (&self.resource, &self.squeezer_1, &self.squeezer_2) {
            (Some(r), None, None) => {
                let s = r.spec("resource")?;
                (s, s)
            }
            (None, Some(a), Some(b)) => (a.spec("squeezer_1")?, b.spec("squeezer_2")?),
            (None, None, None) => {
                return Err(CliError::Config(
                    "missing [resource] (or both [squeezer_1] and [squeezer_2])".into(),
                ))
            }
            _ => {
                return Err(CliError::Config(
                    "give either [resource] or both [squeezer_1] and [squeezer_2]".into(),
                ))
            }
        };
        let g = &self.gains;
        if g.g.is_some() && (g.g_plus.is_some() || g.g_minus.is_some()) {
            return Err(CliError::Config("gains.g conflicts with gains.g_plus/g_minus".into()));
        }
        let gains = Gains::new(pick(g.g_plus, g.g, 1.0), pick(g.g_minus, g.g, 1.0))
            .map_err(|e| CliError::Config(format!("[gains]: {e}")))?;
        let inp = &self.input;
        if inp.alpha.is_some() && (inp.alpha_plus.is_some() || inp.alpha_minus.is_some()) {
            return Err(CliError::Config("input.alpha conflicts with input.alpha_plus/alpha_minus".into()));
        }
        let split = inp.alpha.map(|a| a * FRAC_1_SQRT_2);
        let l = &self.losses;
        let mut protocol = ProtocolConfig {
            squeezer_1: s1,
            squeezer_2: s2,
            input_alpha: (pick(inp.alpha_plus, split, 0.0), pick(inp.alpha_minus, split, 0.0)),
            input_variances: (inp.var_plus.unwrap_or(1.0), inp.var_minus.unwrap_or(1.0)),
            gains,
            victor_loss: l.victor_loss.unwrap_or(0.0),
            bob_efficiency: l.bob_efficiency.unwrap_or(1.0),
            dark_noise: l.dark_noise.unwrap_or(0.0),
            eve_tap_site: EveSite::None,
            eve_tap_fraction: 0.0,
        };
        if let Some(e) = &self.eve {
            protocol = protocol.with_tap(e.site, e.fraction);
        }
        let averages = match &self.pipeline.averages {
            None => Averages::Count(DEFAULT_AVERAGES),
            Some(AveragesValue::Count(k)) => Averages::Count(*k),
            Some(AveragesValue::Word(w)) if w == "infinite" => Averages::Infinite,
            Some(AveragesValue::Word(w)) => {
                return Err(CliError::Config(format!(
                    "pipeline.averages: expected a count or \"infinite\", got {w:?}"
                )))
            }
        };
        let scenario = Scenario {
            protocol,
            swap_input: self.swap.as_ref().map(|s| s.input.spec("swap.input")).transpose()?,
            averages,
            gain_drift: self.pipeline.gain_drift.unwrap_or(0.0),
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario, CliError> {
    ConfigFile::parse(text)?.into_scenario()
}

pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse_scenario(&text).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}
