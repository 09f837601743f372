//! Reference experimental datapoints and their containment in the model's
//! optimum curves.
//!
//! The model is the reference resource with the experiment's detector
//! imperfections and the verifier's loss inferred out, evaluated at
//! symmetric gains. A datapoint is feasible when, within its stated
//! uncertainty, it does not beat the model optimum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{fidelity, m_band_numeric, measure};
use crate::optimize::linspace;
use crate::teleporter::{reference_resource, teleport_closed_form, Gains, ProtocolConfig};

const BUNDLED: &str = include_str!("../data/paper_datapoints.csv");

/// Gain grid used for optimum searches.
const GAIN_SCAN: (f64, f64, usize) = (0.0, 3.0, 3001);

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Fidelity,
    TQ,
    VQ,
    M,
    MBandLow,
    MBandHigh,
}

impl Metric {
    /// Larger model values are better for fidelity and `T_q`.
    fn higher_is_better(self) -> bool {
        matches!(self, Metric::Fidelity | Metric::TQ | Metric::MBandHigh)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Datapoint {
    pub name: String,
    pub metric: Metric,
    pub value: f64,
    pub uncertainty: f64,
    pub gain: Option<f64>,
    pub gain_uncertainty: Option<f64>,
    /// `T_q` measured at the same point, for a `V_q` datapoint.
    pub paired_tq: Option<f64>,
    pub paired_tq_uncertainty: Option<f64>,
    pub citation: String,
}

impl Datapoint {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("uncertainty", Some(self.uncertainty)),
            ("gain_uncertainty", self.gain_uncertainty),
            ("paired_tq_uncertainty", self.paired_tq_uncertainty),
        ] {
            if let Some(v) = v {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::InvalidParameter {
                        name,
                        value: v,
                        reason: "uncertainties must be finite and non-negative",
                    });
                }
            }
        }
        Ok(())
    }
}

pub fn parse_datapoints(text: &str) -> Result<Vec<Datapoint>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, row) in r.deserialize::<Datapoint>().enumerate() {
        let d = row.map_err(|e| Error::Format(format!("datapoint row {}: {e}", i + 1)))?;
        d.validate()?;
        out.push(d);
    }
    Ok(out)
}

/// The datapoints shipped with the crate.
pub fn bundled_datapoints() -> Vec<Datapoint> {
    parse_datapoints(BUNDLED).expect("bundled datapoints parse")
}

pub fn bundled_datapoints_csv() -> &'static str {
    BUNDLED
}

/// Reference resource, experimental detectors, verifier loss inferred out.
pub fn reference_model() -> ProtocolConfig {
    let mut cfg = ProtocolConfig::experimental(reference_resource(), Gains::unity());
    cfg.victor_loss = 0.0;
    cfg
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelPoint {
    pub g: f64,
    pub t_q: f64,
    pub v_q: f64,
    pub m: f64,
    /// Fidelity for a vanishing input amplitude, the envelope over alphabets.
    pub fidelity: f64,
}

pub fn model_point(model: &ProtocolConfig, g: f64) -> Result<ModelPoint> {
    let gains = Gains::symmetric(g);
    let r = teleport_closed_form(&model.with_gains(gains).with_input_alpha(0.0, 0.0))?;
    let rep = measure(&r)?;
    Ok(ModelPoint {
        g,
        t_q: rep.t_q,
        v_q: rep.v_q,
        m: rep.m,
        fidelity: fidelity((0.0, 0.0), gains, rep.out_variances)?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub metric: Metric,
    pub value: f64,
    pub uncertainty: f64,
    /// Model optimum the datapoint is compared against.
    pub model: f64,
    pub feasible: bool,
}

fn scan(model: &ProtocolConfig, lo: f64, hi: f64) -> Result<Vec<ModelPoint>> {
    let n = if hi > lo { GAIN_SCAN.2 } else { 1 };
    linspace(lo, hi, n.max(2))
        .into_iter()
        .map(|g| model_point(model, g))
        .collect()
}

fn best(points: &[ModelPoint], key: impl Fn(&ModelPoint) -> f64, higher: bool) -> f64 {
    let it = points.iter().map(key);
    if higher {
        it.fold(f64::NEG_INFINITY, f64::max)
    } else {
        it.fold(f64::INFINITY, f64::min)
    }
}

/// Compares one datapoint with the model optimum over the gains it allows:
/// `gain ± gain_uncertainty` when a gain is quoted, any gain otherwise.
pub fn assess(d: &Datapoint, model: &ProtocolConfig) -> Result<Verdict> {
    d.validate()?;
    let (lo, hi) = match d.gain {
        Some(g) => {
            let u = d.gain_uncertainty.unwrap_or(0.0);
            ((g - u).max(0.0), g + u)
        }
        None => (GAIN_SCAN.0, GAIN_SCAN.1),
    };
    let higher = d.metric.higher_is_better();
    let model_value = match d.metric {
        Metric::Fidelity => best(&scan(model, lo, hi)?, |p| p.fidelity, true),
        Metric::TQ => best(&scan(model, lo, hi)?, |p| p.t_q, true),
        Metric::M => best(&scan(model, lo, hi)?, |p| p.m, false),
        Metric::VQ => {
            let pts = scan(model, lo, hi)?;
            let floor = d.paired_tq.map(|t| t - d.paired_tq_uncertainty.unwrap_or(0.0));
            let eligible: Vec<ModelPoint> = pts
                .into_iter()
                .filter(|p| floor.is_none_or(|f| p.t_q >= f))
                .collect();
            best(&eligible, |p| p.v_q, false)
        }
        Metric::MBandLow => m_band_numeric(model)?.0,
        Metric::MBandHigh => m_band_numeric(model)?.1,
    };
    let feasible = match d.metric {
        // the model band must reach at least as far as the observed one
        Metric::MBandLow => model_value <= d.value + d.uncertainty,
        Metric::MBandHigh => model_value >= d.value - d.uncertainty,
        _ if higher => d.value - d.uncertainty <= model_value,
        _ => d.value + d.uncertainty >= model_value,
    };
    Ok(Verdict {
        name: d.name.clone(),
        metric: d.metric,
        value: d.value,
        uncertainty: d.uncertainty,
        model: model_value,
        feasible,
    })
}

pub fn assess_all(points: &[Datapoint], model: &ProtocolConfig) -> Result<Vec<Verdict>> {
    points.iter().map(|d| assess(d, model)).collect()
}
