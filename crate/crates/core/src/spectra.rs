//! Synthetic homodyne analysis chain.
//!
//! A scenario's model variances are turned into seeded spectral estimates
//! (scaled chi-square periodogram averages), band-averaged around the
//! modulation carrier, corrected for the verifier's detector loss, and
//! converted into coherent amplitudes, gains and measures exactly as an
//! experimenter would from recorded spectra.
//!
//! Spectral estimates are independent per bin; correlations between bins
//! closer than the resolution bandwidth are not modeled.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::io::{BufRead, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{fidelity, MeasureReport};
use crate::noise::Quadrature;
use crate::optimize::{bracketed_minimum, golden_section};
use crate::teleporter::{
    infer_out_loss, reference_resource, teleport_assembled, teleport_closed_form, EveSite, Gains, ProtocolConfig,
    ScenarioResult,
};

/// Schema tag and version written at the top of every run-record file.
pub const RUN_RECORD_SCHEMA: &str = "cvtele-runrecord";
pub const RUN_RECORD_VERSION: u32 = 1;

/// Number of averaged sweeps per spectral estimate; roughly the ratio of
/// a 10 kHz resolution bandwidth to a 30 Hz video bandwidth.
pub const DEFAULT_AVERAGES: u32 = 300;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Averages {
    Count(u32),
    /// Exact model means; no sampling noise.
    Infinite,
}

impl Averages {
    pub fn validate(self) -> Result<()> {
        match self {
            Averages::Count(0) => Err(Error::InvalidParameter {
                name: "averages",
                value: 0.0,
                reason: "at least one average is required",
            }),
            _ => Ok(()),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Port {
    Input,
    Output,
}

impl Port {
    pub fn label(self) -> &'static str {
        match self {
            Port::Input => "input",
            Port::Output => "output",
        }
    }
}

/// Frequency layout of one analysis span.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumGeometry {
    pub carrier_hz: f64,
    pub start_hz: f64,
    pub stop_hz: f64,
    pub bins: usize,
    pub resolution_bandwidth_hz: f64,
    /// Noise-floor windows on either side of the carrier.
    pub windows: Vec<(f64, f64)>,
}

impl Default for SpectrumGeometry {
    fn default() -> Self {
        Self {
            carrier_hz: 8.4e6,
            start_hz: 8.35e6,
            stop_hz: 8.45e6,
            bins: 101,
            resolution_bandwidth_hz: 1e4,
            windows: vec![(8.35e6, 8.37e6), (8.43e6, 8.45e6)],
        }
    }
}

impl SpectrumGeometry {
    pub fn frequencies(&self) -> Vec<f64> {
        crate::optimize::linspace(self.start_hz, self.stop_hz, self.bins)
    }

    pub fn carrier_index(&self) -> usize {
        let f = self.frequencies();
        let mut best = 0;
        for (i, &x) in f.iter().enumerate() {
            if (x - self.carrier_hz).abs() < (f[best] - self.carrier_hz).abs() {
                best = i;
            }
        }
        best
    }

    pub fn validate(&self) -> Result<()> {
        if self.bins < 3 || !(self.start_hz < self.stop_hz) {
            return Err(Error::BadWindow {
                lo: self.start_hz,
                hi: self.stop_hz,
                reason: "span needs at least three bins and start < stop",
            });
        }
        if !(self.start_hz..=self.stop_hz).contains(&self.carrier_hz) {
            return Err(Error::BadWindow {
                lo: self.start_hz,
                hi: self.stop_hz,
                reason: "does not contain the carrier",
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTrace {
    pub port: Port,
    pub quadrature: Quadrature,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRecord {
    pub frequency_bins: Vec<f64>,
    pub carrier_index: usize,
    /// Input then output, amplitude then phase.
    pub traces: Vec<SpectrumTrace>,
    pub resolution_bandwidth: f64,
    pub averages: Averages,
    pub seed: u64,
}

impl SpectrumRecord {
    pub fn trace(&self, port: Port, q: Quadrature) -> Result<&[f64]> {
        self.traces
            .iter()
            .find(|t| t.port == port && t.quadrature == q)
            .map(|t| t.values.as_slice())
            .ok_or_else(|| Error::Format(format!("missing {} {} trace", port.label(), q)))
    }

    pub fn carrier_value(&self, port: Port, q: Quadrature) -> Result<f64> {
        Ok(self.trace(port, q)?[self.carrier_index])
    }

    /// CSV with columns `freq_hz,quadrature,port,variance`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Format(e.to_string());
        w.write_record(["freq_hz", "quadrature", "port", "variance"]).map_err(io)?;
        for t in &self.traces {
            for (f, v) in self.frequency_bins.iter().zip(&t.values) {
                w.write_record([
                    f.to_string(),
                    t.quadrature.label().to_string(),
                    t.port.label().to_string(),
                    v.to_string(),
                ])
                .map_err(io)?;
            }
        }
        w.flush().map_err(|e| Error::Format(e.to_string()))
    }
}

/// Model moments as seen by the verifier's (lossy) homodyne detector.
#[derive(Copy, Clone, Debug, PartialEq)]
struct Observed {
    variance: f64,
    alpha: f64,
}

fn run_model(cfg: &ProtocolConfig) -> Result<ScenarioResult> {
    if cfg.eve_tap_site == EveSite::None {
        teleport_closed_form(cfg)
    } else {
        teleport_assembled(cfg)
    }
}

fn observed(cfg: &ProtocolConfig) -> Result<[(Port, Quadrature, Observed); 4]> {
    let r = run_model(cfg)?;
    let eta = 1.0 - cfg.victor_loss;
    let input = |v: f64, a: f64| Observed {
        variance: eta * v + (1.0 - eta),
        alpha: eta.sqrt() * a,
    };
    let (vip, vim) = r.input_variances()?;
    let (vop, vom) = r.output_variances()?;
    use Quadrature::{Minus, Plus};
    Ok([
        (Port::Input, Plus, input(vip, r.input.alpha(Plus))),
        (Port::Input, Minus, input(vim, r.input.alpha(Minus))),
        (Port::Output, Plus, Observed { variance: vop, alpha: r.output.alpha(Plus) }),
        (Port::Output, Minus, Observed { variance: vom, alpha: r.output.alpha(Minus) }),
    ])
}

/// Seeded spectra of both ports and quadratures. Sideband bins are
/// `Δ²·χ²_k/k`; the carrier bin additionally carries the signal power, drawn
/// as `(Δ²/k)·χ'²_k(λ)` with non-centrality `λ = 4kα²/Δ²`, so its mean is
/// `4α² + Δ²`.
pub fn synth_spectra(
    cfg: &ProtocolConfig,
    geometry: &SpectrumGeometry,
    averages: Averages,
    seed: u64,
) -> Result<SpectrumRecord> {
    averages.validate()?;
    geometry.validate()?;
    let freqs = geometry.frequencies();
    let carrier = geometry.carrier_index();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut traces = Vec::with_capacity(4);
    for (port, quadrature, obs) in observed(cfg)? {
        let signal = 4.0 * obs.alpha * obs.alpha;
        let values = match averages {
            Averages::Infinite => (0..freqs.len())
                .map(|i| obs.variance + if i == carrier { signal } else { 0.0 })
                .collect(),
            Averages::Count(k) => {
                let kf = k as f64;
                let chi_k = ChiSquared::new(kf).expect("k >= 1");
                let chi_rest = (k > 1).then(|| ChiSquared::new(kf - 1.0).expect("k >= 2"));
                (0..freqs.len())
                    .map(|i| {
                        if i == carrier {
                            let lambda = signal * kf / obs.variance;
                            let z: f64 = StandardNormal.sample(&mut rng);
                            let rest = chi_rest.map_or(0.0, |c| c.sample(&mut rng));
                            obs.variance / kf * ((z + lambda.sqrt()).powi(2) + rest)
                        } else {
                            obs.variance * chi_k.sample(&mut rng) / kf
                        }
                    })
                    .collect()
            }
        };
        traces.push(SpectrumTrace {
            port,
            quadrature,
            values,
        });
    }
    Ok(SpectrumRecord {
        frequency_bins: freqs,
        carrier_index: carrier,
        traces,
        resolution_bandwidth: geometry.resolution_bandwidth_hz,
        averages,
        seed,
    })
}

/// Width of each bin: half the distance to each neighbour, edges extended.
fn bin_widths(freqs: &[f64]) -> Vec<f64> {
    let n = freqs.len();
    (0..n)
        .map(|i| {
            let left = if i == 0 { freqs[1] - freqs[0] } else { freqs[i] - freqs[i - 1] };
            let right = if i + 1 == n { freqs[n - 1] - freqs[n - 2] } else { freqs[i + 1] - freqs[i] };
            0.5 * (left + right)
        })
        .collect()
}

/// Bin-width-weighted mean of the bins inside the union of `windows`.
pub fn band_average(
    record: &SpectrumRecord,
    port: Port,
    q: Quadrature,
    windows: &[(f64, f64)],
) -> Result<f64> {
    let values = record.trace(port, q)?;
    let freqs = &record.frequency_bins;
    let carrier = freqs[record.carrier_index];
    let widths = bin_widths(freqs);
    let mut sum = 0.0;
    let mut weight = 0.0;
    for &(lo, hi) in windows {
        if !(lo < hi) {
            return Err(Error::BadWindow { lo, hi, reason: "is empty" });
        }
        if (lo..=hi).contains(&carrier) {
            return Err(Error::BadWindow { lo, hi, reason: "contains the carrier bin" });
        }
        for (i, &f) in freqs.iter().enumerate() {
            // a bin in two overlapping windows still counts once
            let earlier = windows
                .iter()
                .take_while(|w| **w != (lo, hi))
                .any(|&(a, b)| (a..=b).contains(&f));
            if (lo..=hi).contains(&f) && !earlier {
                sum += widths[i] * values[i];
                weight += widths[i];
            }
        }
    }
    if weight == 0.0 {
        let (lo, hi) = windows.first().copied().unwrap_or((f64::NAN, f64::NAN));
        return Err(Error::BadWindow { lo, hi, reason: "covers no frequency bins" });
    }
    Ok(sum / weight)
}

/// `α = ½√(Δ²M − Δ²X)`.
pub fn estimate_alpha(m_variance: f64, x_variance: f64) -> Result<f64> {
    if m_variance < x_variance {
        return Err(Error::NegativeSignalPower {
            m: m_variance,
            x: x_variance,
        });
    }
    Ok(0.5 * (m_variance - x_variance).sqrt())
}

/// `g ≈ √(Δ²M_out/Δ²M_in)`. Only meaningful when the modulation dominates
/// both noise floors by 20 dB or more.
pub fn calibrate_gain_large_signal(m_in: f64, m_out: f64) -> f64 {
    (m_out / m_in).sqrt()
}

/// Loss-corrected band and carrier estimates of one run.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimates {
    pub x_in: (f64, f64),
    pub x_out: (f64, f64),
    pub m_in: (f64, f64),
    pub m_out: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: ProtocolConfig,
    pub spectra: SpectrumRecord,
    pub estimates: Estimates,
    pub estimated_alpha_in: (f64, f64),
    pub estimated_alpha_out: (f64, f64),
    pub estimated_gains: Gains,
    /// Quadratures with no resolvable input modulation. Their gain cannot
    /// be verified and is recorded as 1.
    pub unverified: Vec<Quadrature>,
    pub report: MeasureReport,
    /// Logical run time (run index), not wall-clock.
    pub timestamp: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineOptions {
    pub geometry: SpectrumGeometry,
    pub averages: Averages,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            geometry: SpectrumGeometry::default(),
            averages: Averages::Count(DEFAULT_AVERAGES),
        }
    }
}

/// Reference resource with the experiment's detector imperfections, unity
/// gain, and input amplitudes `(2.9, 3.5)`.
pub fn default_pipeline_config() -> ProtocolConfig {
    ProtocolConfig::experimental(reference_resource(), Gains::unity()).with_input_alpha(2.9, 3.5)
}

/// One synthetic run: spectra, estimates, and measures from estimates alone.
pub fn run_pipeline(
    cfg: &ProtocolConfig,
    opts: &PipelineOptions,
    seed: u64,
    timestamp: u64,
) -> Result<RunRecord> {
    let spectra = synth_spectra(cfg, &opts.geometry, opts.averages, seed)?;
    let eta = 1.0 - cfg.victor_loss;
    let windows = &opts.geometry.windows;
    let est = |port, q| -> Result<(f64, f64)> {
        let x = infer_out_loss(band_average(&spectra, port, q, windows)?, eta)?;
        let m = infer_out_loss(spectra.carrier_value(port, q)?, eta)?;
        Ok((x, m))
    };
    use Quadrature::{Minus, Plus};
    let (xip, mip) = est(Port::Input, Plus)?;
    let (xim, mim) = est(Port::Input, Minus)?;
    let (xop, mop) = est(Port::Output, Plus)?;
    let (xom, mom) = est(Port::Output, Minus)?;
    let estimates = Estimates {
        x_in: (xip, xim),
        x_out: (xop, xom),
        m_in: (mip, mim),
        m_out: (mop, mom),
    };
    // estimated signal power can dip below zero when nothing is modulated
    let alpha = |m: f64, x: f64| estimate_alpha(m.max(x), x);
    let a_in = (alpha(mip, xip)?, alpha(mim, xim)?);
    let a_out = (alpha(mop, xop)?, alpha(mom, xom)?);
    let mut unverified = Vec::new();
    let mut gain = |q, ai: f64, ao: f64| {
        if ai > 0.0 {
            ao / ai
        } else {
            unverified.push(q);
            1.0
        }
    };
    let gains = Gains {
        g_plus: gain(Plus, a_in.0, a_out.0),
        g_minus: gain(Minus, a_in.1, a_out.1),
    };
    // fidelity treats the input as coherent; T and V use the measured floors
    let mut report = MeasureReport::from_moments(a_in, estimates.x_in, gains, estimates.x_out)?;
    report.fidelity = Some(fidelity(a_in, gains, estimates.x_out)?);
    Ok(RunRecord {
        config: *cfg,
        spectra,
        estimates,
        estimated_alpha_in: a_in,
        estimated_alpha_out: a_out,
        estimated_gains: gains,
        unverified,
        report,
        timestamp,
        seed,
    })
}

/// One run per seed, in seed order.
pub fn run_batch(cfg: &ProtocolConfig, opts: &PipelineOptions, seeds: &[u64]) -> Result<Vec<RunRecord>> {
    seeds
        .par_iter()
        .enumerate()
        .map(|(i, &s)| run_pipeline(cfg, opts, s, i as u64))
        .collect()
}

/// Runs whose gains drift: each run draws `g±` independently from
/// `Normal(base g±, sigma)` (floored at 0) using a stream derived from its seed.
pub fn drifting_gain_runs(
    base: &ProtocolConfig,
    sigma: f64,
    opts: &PipelineOptions,
    seeds: &[u64],
) -> Result<Vec<RunRecord>> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "sigma",
            value: sigma,
            reason: "gain spread must be finite and non-negative",
        });
    }
    seeds
        .par_iter()
        .enumerate()
        .map(|(i, &s)| {
            let mut rng = ChaCha8Rng::seed_from_u64(s ^ 0x9e37_79b9_7f4a_7c15);
            let draw = |g: f64, rng: &mut ChaCha8Rng| {
                Normal::new(g, sigma).expect("sigma validated").sample(rng).max(0.0)
            };
            let gp = draw(base.gains.g_plus, &mut rng);
            let gm = draw(base.gains.g_minus, &mut rng);
            let cfg = base.with_gains(Gains::new(gp, gm)?);
            run_pipeline(&cfg, opts, s, i as u64)
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
struct SchemaHeader {
    schema: String,
    version: u32,
}

/// JSON Lines: a schema header line, then one record per line.
pub fn write_run_records<W: Write>(mut writer: W, runs: &[RunRecord]) -> Result<()> {
    let fmt = |e: serde_json::Error| Error::Format(e.to_string());
    let io = |e: std::io::Error| Error::Format(e.to_string());
    let header = SchemaHeader {
        schema: RUN_RECORD_SCHEMA.into(),
        version: RUN_RECORD_VERSION,
    };
    serde_json::to_writer(&mut writer, &header).map_err(fmt)?;
    writer.write_all(b"\n").map_err(io)?;
    for r in runs {
        serde_json::to_writer(&mut writer, r).map_err(fmt)?;
        writer.write_all(b"\n").map_err(io)?;
    }
    writer.flush().map_err(io)
}

pub fn read_run_records<R: BufRead>(reader: R) -> Result<Vec<RunRecord>> {
    let mut lines = reader.lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::Format("empty run-record file".into()))?
        .map_err(|e| Error::Format(e.to_string()))?;
    let header: SchemaHeader =
        serde_json::from_str(&first).map_err(|e| Error::Format(format!("header: {e}")))?;
    if header.schema != RUN_RECORD_SCHEMA || header.version != RUN_RECORD_VERSION {
        return Err(Error::Format(format!(
            "unsupported schema {} v{}",
            header.schema, header.version
        )));
    }
    let mut out = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::Format(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| Error::Format(format!("record {}: {e}", n + 1)))?,
        );
    }
    Ok(out)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainMode {
    /// Gains estimated from the run's own spectra.
    VerifiedGain,
    /// Gains taken to be exactly 1.
    AssumeUnity,
}

/// Fidelity of one run under the given gain treatment.
pub fn run_fidelity(run: &RunRecord, mode: GainMode) -> Result<f64> {
    let gains = match mode {
        GainMode::VerifiedGain => run.estimated_gains,
        GainMode::AssumeUnity => Gains::unity(),
    };
    fidelity(run.estimated_alpha_in, gains, run.estimates.x_out)
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramSpec {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

impl Default for HistogramSpec {
    fn default() -> Self {
        Self {
            lo: 0.0,
            hi: 1.0,
            bins: 50,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityHistogram {
    pub mode: GainMode,
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub values: Vec<f64>,
    pub mean: f64,
    pub max: f64,
}

/// Values outside `[lo, hi]` are counted in the end bins.
pub fn fidelity_histogram(
    runs: &[RunRecord],
    mode: GainMode,
    spec: HistogramSpec,
) -> Result<FidelityHistogram> {
    if runs.is_empty() {
        return Err(Error::InvalidParameter {
            name: "runs",
            value: 0.0,
            reason: "histogram needs at least one run",
        });
    }
    if spec.bins == 0 || !(spec.lo < spec.hi) {
        return Err(Error::InvalidParameter {
            name: "bins",
            value: spec.bins as f64,
            reason: "histogram needs bins > 0 and lo < hi",
        });
    }
    let values = runs
        .iter()
        .map(|r| run_fidelity(r, mode))
        .collect::<Result<Vec<_>>>()?;
    let width = (spec.hi - spec.lo) / spec.bins as f64;
    let mut counts = vec![0u64; spec.bins];
    for &v in &values {
        let i = ((v - spec.lo) / width).floor();
        let i = if i.is_nan() { 0 } else { (i.max(0.0) as usize).min(spec.bins - 1) };
        counts[i] += 1;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(FidelityHistogram {
        mode,
        edges: crate::optimize::linspace(spec.lo, spec.hi, spec.bins + 1),
        counts,
        values,
        mean,
        max,
    })
}

/// Best symmetric-gain fidelity for an input amplitude split equally
/// between quadratures. Returns `(fidelity, gain)`.
pub fn optimal_symmetric_fidelity(cfg: &ProtocolConfig, alpha: f64) -> Result<(f64, f64)> {
    let split = alpha.abs() * FRAC_1_SQRT_2;
    let f = |g: f64| -> f64 {
        let c = cfg.with_gains(Gains::symmetric(g)).with_input_alpha(split, split);
        run_model(&c)
            .and_then(|r| fidelity((split, split), Gains::symmetric(g), r.output_variances()?))
            .map(|v| -v)
            .unwrap_or(f64::INFINITY)
    };
    let m = bracketed_minimum(f, 0.0, 3.0, 301, 1e-9)?;
    Ok((-m.value, m.x))
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PhaseGainStrategy {
    /// Bob picks the phase gain minimizing the phase conditional variance.
    MinimizeNoise,
    Fixed(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopholeOutcome {
    /// Fidelity Victor computes with no phase modulation present.
    pub f_apparent: f64,
    pub g_minus: f64,
    pub report: MeasureReport,
    /// Best fidelity with the same amplitude spread over both quadratures.
    pub honest_fidelity: f64,
    pub honest_gain: f64,
}

pub const LOOPHOLE_WARNING: &str =
    "WARNING: no phase-quadrature modulation; the phase gain is unverified and the fidelity is inflated";

/// Single-quadrature-modulation scenario, evaluated with the verifier's loss
/// inferred out.
pub fn loophole_demo(cfg: &ProtocolConfig, strategy: PhaseGainStrategy) -> Result<LoopholeOutcome> {
    if cfg.input_alpha.1 != 0.0 {
        return Err(Error::InvalidParameter {
            name: "input_alpha_minus",
            value: cfg.input_alpha.1,
            reason: "the loophole scenario has no phase modulation",
        });
    }
    let mut base = *cfg;
    base.victor_loss = 0.0;
    let phase_noise = |g: f64| -> f64 {
        let c = base.with_gains(Gains {
            g_plus: base.gains.g_plus,
            g_minus: g,
        });
        run_model(&c)
            .and_then(|r| r.ledger.conditional_variance(&r.output, &r.input, Quadrature::Minus))
            .unwrap_or(f64::INFINITY)
    };
    let g_minus = match strategy {
        PhaseGainStrategy::MinimizeNoise => golden_section(phase_noise, 0.0, 3.0, 1e-10)?.x,
        PhaseGainStrategy::Fixed(g) => g,
    };
    let gains = Gains::new(base.gains.g_plus, g_minus)?;
    let r = run_model(&base.with_gains(gains))?;
    let report = crate::measures::measure(&r)?;
    let f_apparent = fidelity(cfg.input_alpha, gains, report.out_variances)?;
    let (honest_fidelity, honest_gain) = optimal_symmetric_fidelity(&base, cfg.input_alpha.0)?;
    Ok(LoopholeOutcome {
        f_apparent,
        g_minus,
        report,
        honest_fidelity,
        honest_gain,
    })
}

/// Magnitude profile of the feed-forward gain versus frequency.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Rolloff {
    Flat,
    /// `|g(f)| = g/√(1 + (f/f_c)²)`.
    SinglePole { corner_hz: f64 },
}

impl Rolloff {
    fn factor(self, f: f64) -> f64 {
        match self {
            Rolloff::Flat => 1.0,
            Rolloff::SinglePole { corner_hz } => 1.0 / (1.0 + (f / corner_hz).powi(2)).sqrt(),
        }
    }
}

/// One frequency of a broadband output spectrum.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResponsePoint {
    pub freq_hz: f64,
    pub var_plus: f64,
    pub var_minus: f64,
}

/// Output spectrum when the feed-forward is delayed by `delay` seconds.
/// The weights `(√η_B ± g)²` of the closed-form output become
/// `|√η_B ± g(f)e^{iφ(f)}|²` with `φ = 2π(f − f_ref)τ`, so the feed-forward
/// phase is optimal at `reference_hz` and cycles with period `1/τ`.
pub fn frequency_response_model(
    cfg: &ProtocolConfig,
    delay: f64,
    rolloff: Rolloff,
    reference_hz: f64,
    freqs: &[f64],
) -> Result<Vec<ResponsePoint>> {
    cfg.validate()?;
    if !(delay.is_finite() && delay >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "delay",
            value: delay,
            reason: "must be finite and non-negative",
        });
    }
    let eta = cfg.bob_efficiency;
    let e = eta.sqrt();
    let v = 1.0 - cfg.victor_loss;
    let quad = |g: f64, phi: f64, v_in: f64, sqz: f64, anti: f64| {
        let cross = 2.0 * e * g * phi.cos();
        let bob = g * g * v_in
            + 0.5 * (eta + g * g + cross) * sqz
            + 0.5 * (eta + g * g - cross) * anti
            + (1.0 - eta)
            + 2.0 * g * g * cfg.dark_noise;
        v * bob + (1.0 - v)
    };
    let (s1, s2) = (cfg.squeezer_1, cfg.squeezer_2);
    Ok(freqs
        .iter()
        .map(|&f| {
            let phi = 2.0 * PI * (f - reference_hz) * delay;
            let r = rolloff.factor(f);
            ResponsePoint {
                freq_hz: f,
                var_plus: quad(cfg.gains.g_plus * r, phi, cfg.input_variances.0, s1.var_sqz, s2.var_anti),
                var_minus: quad(cfg.gains.g_minus * r, phi, cfg.input_variances.1, s2.var_sqz, s1.var_anti),
            }
        })
        .collect())
}
