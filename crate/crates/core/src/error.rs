use thiserror::Error;

use crate::noise::NoiseId;

/// Errors raised by the simulation and characterization routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("noise source {0} is not registered in this ledger")]
    UnregisteredNoise(NoiseId),

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("conditioning variance is zero; conditional variance is undefined")]
    ZeroConditioningVariance,

    #[error("input amplitude is zero in the {0} quadrature; signal-to-noise ratio is undefined")]
    ZeroInputAmplitude(&'static str),

    #[error("fidelity is only defined for coherent inputs (input variances {0}, {1})")]
    NonCoherentInput(f64, f64),

    #[error("degenerate resource: {0}")]
    DegenerateResource(String),

    #[error("closed-form output does not model eavesdropper taps; use the assembled protocol")]
    TapNotSupported,

    #[error("no eavesdropper tap is configured")]
    NoTap,

    #[error("measured variance {measured} is below the loss floor {floor} for efficiency {efficiency}")]
    BelowLossFloor {
        measured: f64,
        floor: f64,
        efficiency: f64,
    },

    #[error("modulation variance {m} is below noise variance {x}; negative signal power")]
    NegativeSignalPower { m: f64, x: f64 },

    #[error("optimizer did not converge: {0}")]
    NoConvergence(String),

    #[error("spectral window {lo}..{hi} Hz {reason}")]
    BadWindow { lo: f64, hi: f64, reason: &'static str },

    #[error("record format: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_unit_interval(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::InvalidParameter {
            name,
            value,
            reason: "must lie in [0, 1]",
        });
    }
    Ok(())
}

pub(crate) fn check_finite(name: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        });
    }
    Ok(())
}
