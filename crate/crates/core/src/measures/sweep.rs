//! Gain × resource grids on the T-V plane.

use std::f64::consts::FRAC_1_SQRT_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fidelity, measure};
use crate::error::Result;
use crate::teleporter::{teleport_assembled, teleport_closed_form, EveSite, Gains, ProtocolConfig, SqueezerSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TvRow {
    pub g: f64,
    pub var_sqz: f64,
    pub var_anti: f64,
    pub t_q: f64,
    pub v_q: f64,
    pub m: f64,
    /// Fidelity at each requested input amplitude, in request order.
    pub fidelity: Vec<f64>,
}

/// One row per `(squeezer, gain)` pair, squeezer-major. Both squeezers of the
/// template are replaced by the grid entry and the gain is applied
/// symmetrically. Fidelities use an input amplitude `α` split equally
/// between quadratures, `α± = α/√2`.
///
/// Rows are computed in parallel and returned in grid order, so the table
/// does not depend on the worker count.
pub fn tv_sweep(
    squeezers: &[SqueezerSpec],
    gains: &[f64],
    template: &ProtocolConfig,
    alphas: &[f64],
) -> Result<Vec<TvRow>> {
    let points: Vec<(SqueezerSpec, f64)> = squeezers
        .iter()
        .flat_map(|&s| gains.iter().map(move |&g| (s, g)))
        .collect();
    points
        .par_iter()
        .map(|&(s, g)| {
            let mut cfg = *template;
            cfg.squeezer_1 = s;
            cfg.squeezer_2 = s;
            cfg.gains = Gains::new(g, g)?;
            let result = if cfg.eve_tap_site == EveSite::None {
                teleport_closed_form(&cfg)?
            } else {
                teleport_assembled(&cfg)?
            };
            let report = measure(&result)?;
            let fidelity = alphas
                .iter()
                .map(|&a| {
                    let split = a * FRAC_1_SQRT_2;
                    fidelity((split, split), report.gains, report.out_variances)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(TvRow {
                g,
                var_sqz: s.var_sqz,
                var_anti: s.var_anti,
                t_q: report.t_q,
                v_q: report.v_q,
                m: report.m,
                fidelity,
            })
        })
        .collect()
}
