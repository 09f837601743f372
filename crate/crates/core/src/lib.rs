//! Gaussian simulation and characterization of continuous-variable
//! quadrature teleportation. Variances are in shot-noise units (vacuum = 1)
//! and a coherent amplitude `α` displaces a quadrature mean by `2α`.

pub mod error;
pub mod feasibility;
pub mod measures;
pub mod noise;
pub mod optimize;
pub mod spectra;
pub mod swapping;
pub mod teleporter;

pub use error::{Error, Result};
pub use measures::{fidelity, measure, InseparabilityReport, MeasureReport};
pub use noise::{LinearField, LinearForm, NoiseId, NoiseLedger, Quadrature};
pub use spectra::{run_pipeline, Averages, PipelineOptions, RunRecord, SpectrumGeometry};
pub use swapping::{swap_run, SwapConfig, SwapOutcome};
pub use teleporter::{
    teleport_assembled, teleport_closed_form, EveSite, Gains, ProtocolConfig, ScenarioResult, SqueezerSpec,
};
