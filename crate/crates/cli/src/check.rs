//! Reference-data feasibility and closed-form identity checks.

use std::io::{self, Write};

use rayon::prelude::*;

use cvtele_core::feasibility::{assess, reference_model, Datapoint};
use cvtele_core::measures::{classical_vq_bound, m_band_numeric, m_gain_bandwidth, m_min, measure};
use cvtele_core::optimize::{bracketed_minimum, linspace};
use cvtele_core::swapping::{g_opt_closed_form, swap_bandwidth, swap_run, SwapConfig};
use cvtele_core::teleporter::{teleport_closed_form, Gains, ProtocolConfig, SqueezerSpec};
use cvtele_core::Result;

/// Closed forms under test, replaceable so the harness itself can be tested.
#[derive(Copy, Clone, Debug)]
pub struct CheckOptions {
    pub bandwidth: fn(SqueezerSpec) -> Result<(f64, f64)>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            bandwidth: m_gain_bandwidth,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn outcome(name: &str, r: std::result::Result<(bool, String), String>) -> CheckResult {
    let (pass, detail) = r.unwrap_or_else(|e| (false, e));
    CheckResult {
        name: name.to_string(),
        pass,
        detail,
    }
}

fn e(err: cvtele_core::Error) -> String {
    err.to_string()
}

fn pure(s: f64) -> SqueezerSpec {
    SqueezerSpec::pure(s).expect("check squeezing is valid")
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

type Check = fn(&CheckOptions) -> std::result::Result<(bool, String), String>;

fn classical_limit(_: &CheckOptions) -> std::result::Result<(bool, String), String> {
    let cfg = ProtocolConfig::ideal(SqueezerSpec::vacuum(), Gains::unity()).with_input_alpha(2.0, 3.0);
    let m = measure(&teleport_closed_form(&cfg).map_err(e)?).map_err(e)?;
    let f = m.fidelity.unwrap_or(f64::NAN);
    let ok = (f - 0.5).abs() < 1e-9 && (m.v_q - 4.0).abs() < 1e-9 && (m.m - 1.0).abs() < 1e-9;
    Ok((ok, format!("F = {f}, V_q = {}, M = {}", m.v_q, m.m)))
}

fn vq_bound(_: &CheckOptions) -> std::result::Result<(bool, String), String> {
    let gains = [(1.0, 1.0), (0.5, 1.5), (1.8, 0.4)];
    let worst = gains
        .par_iter()
        .map(|&(a, b)| {
            let g = Gains::new(a, b).map_err(e)?;
            let v = classical_vq_bound(g).map_err(e)?;
            Ok(rel(v, (g.product().abs() + 1.0).powi(2)))
        })
        .collect::<std::result::Result<Vec<f64>, String>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok((worst <= 1e-6, format!("worst relative error {worst:.2e} over {} gain pairs", gains.len())))
}

fn m_floor(_: &CheckOptions) -> std::result::Result<(bool, String), String> {
    let mut resources: Vec<ProtocolConfig> = [0.9, 0.5, 0.1, 0.01]
        .into_iter()
        .map(|s| ProtocolConfig::ideal(pure(s), Gains::unity()))
        .collect();
    resources.push(reference_model());
    let mut worst = f64::INFINITY;
    for cfg in &resources {
        for g in linspace(0.0, 3.0, 31) {
            for gm in [g, 0.5 * g, 1.5 * g] {
                let gains = Gains::new(g, gm).map_err(e)?;
                let m = measure(&teleport_closed_form(&cfg.with_gains(gains)).map_err(e)?).map_err(e)?;
                worst = worst.min(m.m - m_min(gains));
            }
        }
    }
    Ok((worst >= -1e-12, format!("min M - M_min = {worst:.3e}")))
}

fn m_bandwidth(opts: &CheckOptions) -> std::result::Result<(bool, String), String> {
    let mut worst: f64 = 0.0;
    for s in [0.9, 0.5, 0.25, 0.125] {
        let (a, b) = (opts.bandwidth)(pure(s)).map_err(e)?;
        let (na, nb) = m_band_numeric(&ProtocolConfig::ideal(pure(s), Gains::unity())).map_err(e)?;
        worst = worst.max(rel(a, na)).max(rel(b, nb));
    }
    Ok((worst <= 1e-6, format!("worst relative band-edge error {worst:.2e}")))
}

fn swap_band(opts: &CheckOptions) -> std::result::Result<(bool, String), String> {
    let mut worst: f64 = 0.0;
    for t in [0.5, 0.25] {
        let (a, b) = (opts.bandwidth)(pure(t)).map_err(e)?;
        for y in [0.5, 0.1] {
            let (sa, sb) = swap_bandwidth(&SwapConfig::new(pure(t), pure(y), 1.0).map_err(e)?).map_err(e)?;
            worst = worst.max((sa - a).abs()).max((sb - b).abs());
        }
    }
    Ok((worst <= 1e-5, format!("worst swap vs M band-edge difference {worst:.2e}")))
}

fn swap_g_opt(_: &CheckOptions) -> std::result::Result<(bool, String), String> {
    let mut worst: f64 = 0.0;
    let mut symmetric = f64::NAN;
    for (t, y) in [(0.5, 0.5), (0.25, 0.1), (0.8, 0.3)] {
        let cfg = SwapConfig::new(pure(t), pure(y), 1.0).map_err(e)?;
        let closed = g_opt_closed_form(&cfg).map_err(e)?;
        let f = |g: f64| swap_run(&cfg.with_gain(g)).map(|o| o.i_final).unwrap_or(f64::INFINITY);
        let numeric = bracketed_minimum(f, 0.0, 3.0, 301, 1e-10).map_err(e)?.x;
        worst = worst.max((numeric - closed).abs());
        if t == 0.5 && y == 0.5 {
            symmetric = closed;
        }
    }
    let ok = worst <= 1e-4 && (symmetric - 0.6).abs() < 1e-12;
    Ok((ok, format!("worst |g_numeric - g_opt| = {worst:.2e}; symmetric 3 dB g_opt = {symmetric}")))
}

fn swap_pure_input(_: &CheckOptions) -> std::result::Result<(bool, String), String> {
    let base = SwapConfig::new(pure(0.5), pure(1e-6), 1.0).map_err(e)?;
    let mut worst: f64 = 0.0;
    for g in linspace(0.2, 3.0, 57) {
        let i = swap_run(&base.with_gain(g)).map_err(e)?.i_final;
        let cfg = ProtocolConfig::ideal(pure(0.5), Gains::symmetric(g));
        let m = measure(&teleport_closed_form(&cfg).map_err(e)?).map_err(e)?.m;
        worst = worst.max((i - m.sqrt()).abs());
    }
    Ok((worst <= 1e-3, format!("max |I_final - sqrt(M)| = {worst:.2e}")))
}

const IDENTITIES: &[(&str, Check)] = &[
    ("identity: classical limit", classical_limit),
    ("identity: classical V_q bound", vq_bound),
    ("identity: M floor", m_floor),
    ("identity: M gain bandwidth", m_bandwidth),
    ("identity: swap band equals M band", swap_band),
    ("identity: optimal swap gain", swap_g_opt),
    ("identity: swap with perfect input", swap_pure_input),
];

pub fn run_checks(datapoints: &[Datapoint], opts: &CheckOptions) -> Vec<CheckResult> {
    let model = reference_model();
    let mut out: Vec<CheckResult> = datapoints
        .par_iter()
        .map(|d| {
            let name = format!("datapoint: {}", d.name);
            outcome(
                &name,
                assess(d, &model).map_err(e).map(|v| {
                    (
                        v.feasible,
                        format!("{} ± {} vs model {:.4} ({})", v.value, v.uncertainty, v.model, d.citation),
                    )
                }),
            )
        })
        .collect();
    out.extend(IDENTITIES.par_iter().map(|(name, f)| outcome(name, f(opts))).collect::<Vec<_>>());
    out
}

pub fn write_report<W: Write>(mut w: W, results: &[CheckResult]) -> io::Result<()> {
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    for r in results {
        let tag = if r.pass { "PASS" } else { "FAIL" };
        writeln!(w, "{tag}  {:<width$}  {}", r.name, r.detail)?;
    }
    let failed = results.iter().filter(|r| !r.pass).count();
    writeln!(w, "{} of {} checks pass", results.len() - failed, results.len())
}
