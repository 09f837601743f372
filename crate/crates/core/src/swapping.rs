//! Entanglement swapping: one beam of a second EPR pair is teleported and
//! the inseparability between the teleported beam and its untouched partner
//! is evaluated as a function of the (symmetric) teleporter gain.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{inseparability, InseparabilityReport};
use crate::noise::NoiseLedger;
use crate::optimize::{grid_roots, logspace};
use crate::teleporter::{assemble, make_epr, Gains, ProtocolConfig, SqueezerSpec};

/// Scan range and resolution used to bracket the band edges.
pub const BAND_SCAN: (f64, f64, usize) = (1e-4, 1e4, 256);
pub const BAND_TOL: f64 = 1e-10;

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwapConfig {
    pub teleporter_squeezer: SqueezerSpec,
    pub input_squeezer: SqueezerSpec,
    pub gain: f64,
}

impl SwapConfig {
    pub fn new(teleporter: SqueezerSpec, input: SqueezerSpec, gain: f64) -> Result<Self> {
        let cfg = Self {
            teleporter_squeezer: teleporter,
            input_squeezer: input,
            gain,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.teleporter_squeezer.validate()?;
        self.input_squeezer.validate()?;
        Gains::new(self.gain, self.gain)?;
        Ok(())
    }

    pub fn with_gain(mut self, gain: f64) -> Self {
        self.gain = gain;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwapOutcome {
    pub i_initial: f64,
    pub i_final: f64,
    pub k_opt: f64,
    pub initial: InseparabilityReport,
    pub after: InseparabilityReport,
}

/// Teleports beam `x` of the input pair through an ideal teleporter and
/// compares inseparability before and after.
pub fn swap_run(cfg: &SwapConfig) -> Result<SwapOutcome> {
    cfg.validate()?;
    let mut ledger = NoiseLedger::new();
    let (yx, yy) = make_epr(&mut ledger, cfg.input_squeezer, cfg.input_squeezer)?;
    let initial = inseparability(&ledger, &yx, &yy)?;
    let tele = ProtocolConfig::ideal(cfg.teleporter_squeezer, Gains::symmetric(cfg.gain));
    let out = assemble(&mut ledger, &yx, &tele)?.bob_output;
    let after = inseparability(&ledger, &out, &yy)?;
    Ok(SwapOutcome {
        i_initial: initial.i_value,
        i_final: after.i_value,
        k_opt: after.k_opt,
        initial,
        after,
    })
}

/// `i_final` at each gain, in order.
pub fn swap_scan(cfg: &SwapConfig, gains: &[f64]) -> Result<Vec<f64>> {
    gains
        .par_iter()
        .map(|&g| swap_run(&cfg.with_gain(g)).map(|o| o.i_final))
        .collect()
}

/// Optimal swapping gain for pure resources:
/// `1 − 2(s_X + s_Y)/(s_X + 1/s_X + s_Y + 1/s_Y)`.
pub fn g_opt_closed_form(cfg: &SwapConfig) -> Result<f64> {
    for (which, s) in [
        ("teleporter", cfg.teleporter_squeezer),
        ("input", cfg.input_squeezer),
    ] {
        s.validate()?;
        if !s.is_pure() {
            return Err(Error::DegenerateResource(format!(
                "optimal swapping gain formula needs a pure {which} resource (K = {})",
                s.mixedness()
            )));
        }
    }
    let sx = cfg.teleporter_squeezer.var_sqz;
    let sy = cfg.input_squeezer.var_sqz;
    Ok(1.0 - 2.0 * (sx + sy) / (sx + 1.0 / sx + sy + 1.0 / sy))
}

/// Gain range `(g_min, g_max)` over which swapping succeeds (`i_final < 1`).
pub fn swap_bandwidth(cfg: &SwapConfig) -> Result<(f64, f64)> {
    cfg.validate()?;
    let t = cfg.teleporter_squeezer;
    if t.var_sqz + t.var_anti <= 2.0 {
        return Err(Error::DegenerateResource(
            "teleporter resource carries no entanglement; swapping never succeeds".into(),
        ));
    }
    let (lo, hi, n) = BAND_SCAN;
    let grid = logspace(lo, hi, n);
    let excess = |g: f64| {
        swap_run(&cfg.with_gain(g))
            .map(|o| o.i_final - 1.0)
            .unwrap_or(f64::NAN)
    };
    let roots = grid_roots(excess, &grid, BAND_TOL)?;
    match (roots.first(), roots.last()) {
        (Some(&a), Some(&b)) if roots.len() >= 2 => Ok((a, b)),
        _ => Err(Error::DegenerateResource(format!(
            "found {} crossing(s) of i_final = 1 on [{lo}, {hi}]",
            roots.len()
        ))),
    }
}
