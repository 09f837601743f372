//! Teleportation figures of merit: fidelity, signal transfer `T_q`,
//! conditional variance product `V_q`, and the gain-normalized product `𝓜`.

mod bounds;
mod inseparability;
mod sweep;

pub use bounds::{
    classical_vq_bound, classical_vq_bound_with, m_band_numeric, m_gain_bandwidth, m_min, VqBoundOptions,
};
pub use inseparability::{
    inseparability, inseparability_from_moments, inseparability_with_mixedness, InseparabilityReport,
    PairMoments,
};
pub use sweep::{tv_sweep, TvRow};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{LinearField, NoiseLedger, Quadrature};
use crate::teleporter::{Gains, ScenarioResult};

/// Fidelity reachable without entanglement for a broad coherent alphabet.
pub const F_CLASSICAL: f64 = 0.5;
/// Fidelity above which no other party can hold a comparable copy.
pub const F_NO_CLONING: f64 = 2.0 / 3.0;

/// Coherent-input fidelity of a Gaussian teleporter.
///
/// `ℱ = 2·e^(−k⁺−k⁻)/√((1+Δ²X⁺_out)(1+Δ²X⁻_out))` with
/// `k± = α±²(1−g±)²/(1+Δ²X±_out)`.
pub fn fidelity(alpha_in: (f64, f64), gains: Gains, out_variances: (f64, f64)) -> Result<f64> {
    let (vp, vm) = out_variances;
    for (name, v) in [("out_var_plus", vp), ("out_var_minus", vm)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidParameter {
                name,
                value: v,
                reason: "output variances must be positive",
            });
        }
    }
    let kp = alpha_in.0.powi(2) * (1.0 - gains.g_plus).powi(2) / (1.0 + vp);
    let km = alpha_in.1.powi(2) * (1.0 - gains.g_minus).powi(2) / (1.0 + vm);
    Ok((2.0 * (-kp - km).exp() / ((1.0 + vp) * (1.0 + vm)).sqrt()).min(1.0))
}

/// [`fidelity`], refusing non-coherent inputs.
pub fn coherent_fidelity(
    in_variances: (f64, f64),
    alpha_in: (f64, f64),
    gains: Gains,
    out_variances: (f64, f64),
) -> Result<f64> {
    if (in_variances.0 - 1.0).abs() > 1e-12 || (in_variances.1 - 1.0).abs() > 1e-12 {
        return Err(Error::NonCoherentInput(in_variances.0, in_variances.1));
    }
    fidelity(alpha_in, gains, out_variances)
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalTransfer {
    pub t_plus: f64,
    pub t_minus: f64,
    pub t_q: f64,
}

/// `T_q = T⁺ + T⁻ − T⁺T⁻(1 − 1/(Δ²X⁺_in Δ²X⁻_in))`.
pub fn combine_transfer(t_plus: f64, t_minus: f64, in_variances: (f64, f64)) -> SignalTransfer {
    let correction = 1.0 - 1.0 / (in_variances.0 * in_variances.1);
    SignalTransfer {
        t_plus,
        t_minus,
        t_q: t_plus + t_minus - t_plus * t_minus * correction,
    }
}

/// Signal transfer from signal-to-noise ratios `SNR± = α±²/Δ²X±`.
pub fn signal_transfer(
    alpha_in: (f64, f64),
    in_variances: (f64, f64),
    alpha_out: (f64, f64),
    out_variances: (f64, f64),
) -> Result<SignalTransfer> {
    if alpha_in.0 == 0.0 {
        return Err(Error::ZeroInputAmplitude("plus"));
    }
    if alpha_in.1 == 0.0 {
        return Err(Error::ZeroInputAmplitude("minus"));
    }
    for v in [in_variances.0, in_variances.1, out_variances.0, out_variances.1] {
        if !(v > 0.0) {
            return Err(Error::InvalidParameter {
                name: "variance",
                value: v,
                reason: "must be positive",
            });
        }
    }
    let snr = |a: f64, v: f64| a * a / v;
    let tp = snr(alpha_out.0, out_variances.0) / snr(alpha_in.0, in_variances.0);
    let tm = snr(alpha_out.1, out_variances.1) / snr(alpha_in.1, in_variances.1);
    Ok(combine_transfer(tp, tm, in_variances))
}

/// Signal transfer of a linear channel with gains `g±`: `T± = g±²Δ²X±_in/Δ²X±_out`.
/// Agrees with [`signal_transfer`] whenever `α_out = g·α_in`, and stays
/// defined for an unmodulated input.
pub fn signal_transfer_from_gains(
    gains: Gains,
    in_variances: (f64, f64),
    out_variances: (f64, f64),
) -> SignalTransfer {
    let tp = gains.g_plus.powi(2) * in_variances.0 / out_variances.0;
    let tm = gains.g_minus.powi(2) * in_variances.1 / out_variances.1;
    combine_transfer(tp, tm, in_variances)
}

/// Conditional variances of `output` given `input`, and their product `V_q`.
pub fn conditional_variance_product(
    ledger: &NoiseLedger,
    input: &LinearField,
    output: &LinearField,
) -> Result<(f64, f64, f64)> {
    let vp = ledger.conditional_variance(output, input, Quadrature::Plus)?;
    let vm = ledger.conditional_variance(output, input, Quadrature::Minus)?;
    Ok((vp, vm, vp * vm))
}

/// `𝓜 = V_q/(|g⁺g⁻|+1)²`.
pub fn gain_normalized_cv(v_q: f64, gains: Gains) -> f64 {
    v_q / (gains.product().abs() + 1.0).powi(2)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    /// `None` when the input is not coherent.
    pub fidelity: Option<f64>,
    pub t_plus: f64,
    pub t_minus: f64,
    pub t_q: f64,
    pub v_plus: f64,
    pub v_minus: f64,
    pub v_q: f64,
    pub m: f64,
    pub gains: Gains,
    pub in_variances: (f64, f64),
    pub out_variances: (f64, f64),
}

impl MeasureReport {
    /// Report for a linear channel described only by its moments. The
    /// conditional variances are `Δ²X±_out − g±²Δ²X±_in`, which holds when
    /// the added noise is independent of the input.
    pub fn from_moments(
        alpha_in: (f64, f64),
        in_variances: (f64, f64),
        gains: Gains,
        out_variances: (f64, f64),
    ) -> Result<Self> {
        let v_plus = (out_variances.0 - gains.g_plus.powi(2) * in_variances.0).max(0.0);
        let v_minus = (out_variances.1 - gains.g_minus.powi(2) * in_variances.1).max(0.0);
        Self::assemble(alpha_in, in_variances, gains, out_variances, (v_plus, v_minus))
    }

    fn assemble(
        alpha_in: (f64, f64),
        in_variances: (f64, f64),
        gains: Gains,
        out_variances: (f64, f64),
        conditional: (f64, f64),
    ) -> Result<Self> {
        let fidelity = match coherent_fidelity(in_variances, alpha_in, gains, out_variances) {
            Ok(f) => Some(f),
            Err(Error::NonCoherentInput(..)) => None,
            Err(e) => return Err(e),
        };
        let t = signal_transfer_from_gains(gains, in_variances, out_variances);
        let v_q = conditional.0 * conditional.1;
        Ok(Self {
            fidelity,
            t_plus: t.t_plus,
            t_minus: t.t_minus,
            t_q: t.t_q,
            v_plus: conditional.0,
            v_minus: conditional.1,
            v_q,
            m: gain_normalized_cv(v_q, gains),
            gains,
            in_variances,
            out_variances,
        })
    }
}

/// Measures of `output` as a reconstruction of `input`, with the gains read
/// off the in/out correlations.
pub fn measure_fields(
    ledger: &NoiseLedger,
    input: &LinearField,
    output: &LinearField,
) -> Result<MeasureReport> {
    let var = |f: &LinearField, q| ledger.variance(f, q);
    let in_variances = (var(input, Quadrature::Plus)?, var(input, Quadrature::Minus)?);
    let out_variances = (var(output, Quadrature::Plus)?, var(output, Quadrature::Minus)?);
    let g = |q| -> Result<f64> {
        Ok(ledger.covariance(input, q, output, q)?.abs() / ledger.variance(input, q)?)
    };
    let gains = Gains {
        g_plus: g(Quadrature::Plus)?,
        g_minus: g(Quadrature::Minus)?,
    };
    let (vp, vm, _) = conditional_variance_product(ledger, input, output)?;
    let alpha_in = (input.alpha(Quadrature::Plus), input.alpha(Quadrature::Minus));
    MeasureReport::assemble(alpha_in, in_variances, gains, out_variances, (vp, vm))
}

/// Measures of Bob's output.
pub fn measure(result: &ScenarioResult) -> Result<MeasureReport> {
    measure_fields(&result.ledger, &result.input, &result.output)
}

/// Measures of Eve's reconstruction.
pub fn measure_eve(result: &ScenarioResult) -> Result<MeasureReport> {
    let eve = result.eve_output.as_ref().ok_or(Error::NoTap)?;
    measure_fields(&result.ledger, &result.input, eve)
}
