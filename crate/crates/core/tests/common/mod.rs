//! Randomized invariant suites shared by the property tests and the
//! acceptance runner. Every suite runs `CASES` cases from a fixed seed.

#![allow(dead_code)]

use std::f64::consts::FRAC_1_SQRT_2;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestCaseError, TestRunner};

use cvtele_core::measures::{
    fidelity, inseparability, m_gain_bandwidth, m_min, measure, measure_eve, PairMoments,
};
use cvtele_core::noise::{beamsplitter, BeamsplitterPhase, LinearField, NoiseLedger, Quadrature};
use cvtele_core::optimize::{linspace, logspace};
use cvtele_core::spectra::{
    band_average, fidelity_histogram, frequency_response_model, run_pipeline, synth_spectra,
    Averages, GainMode, HistogramSpec, PipelineOptions, Port, Rolloff, SpectrumGeometry,
};
use cvtele_core::swapping::{g_opt_closed_form, swap_bandwidth, swap_run, SwapConfig};
use cvtele_core::teleporter::{
    infer_out_loss, teleport_assembled, teleport_closed_form, EveSite, Gains, ProtocolConfig,
    SqueezerSpec,
};

pub const CASES: u32 = 1000;

pub fn config(seed: u64) -> Config {
    Config {
        cases: CASES,
        rng_seed: RngSeed::Fixed(seed),
        failure_persistence: None,
        ..Config::default()
    }
}

fn ok<T>(r: cvtele_core::Result<T>) -> Result<T, TestCaseError> {
    r.map_err(|e| TestCaseError::fail(e.to_string()))
}

fn run<S>(seed: u64, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String>
where
    S: Strategy,
{
    TestRunner::new(config(seed))
        .run(&strategy, test)
        .map_err(|e| e.to_string())
}

// ---- strategies ----

pub fn squeezer() -> impl Strategy<Value = SqueezerSpec> {
    (0.01f64..1.0, 1.0f64..4.0).prop_map(|(s, k)| SqueezerSpec::new(s, (k / s).max(1.0)).unwrap())
}

pub fn pure_squeezer(lo: f64, hi: f64) -> impl Strategy<Value = SqueezerSpec> {
    (lo..hi).prop_map(|s| SqueezerSpec::pure(s).unwrap())
}

pub fn gains(hi: f64) -> impl Strategy<Value = Gains> {
    (0.0..hi, 0.0..hi).prop_map(|(a, b)| Gains::new(a, b).unwrap())
}

/// Input variances with `V⁺V⁻ ≥ 1`.
fn input_variances() -> impl Strategy<Value = (f64, f64)> {
    prop_oneof![
        Just((1.0, 1.0)),
        (0.2f64..3.0, 1.0f64..3.0).prop_map(|(v, k)| (v, (k / v).max(1e-9))),
    ]
}

/// Random no-tap configuration with imperfect detectors.
pub fn protocol() -> impl Strategy<Value = ProtocolConfig> {
    (
        squeezer(),
        squeezer(),
        gains(2.5),
        (-10.0f64..10.0, -10.0f64..10.0),
        input_variances(),
        (0.0f64..0.5, 0.5f64..=1.0, 0.0f64..0.3),
    )
        .prop_map(|(s1, s2, g, a, v, (vl, be, d))| ProtocolConfig {
            squeezer_1: s1,
            squeezer_2: s2,
            input_alpha: a,
            input_variances: v,
            gains: g,
            victor_loss: vl,
            bob_efficiency: be,
            dark_noise: d,
            eve_tap_site: EveSite::None,
            eve_tap_fraction: 0.0,
        })
}

/// No-tap or tapped configuration.
pub fn any_protocol() -> impl Strategy<Value = ProtocolConfig> {
    (
        protocol(),
        prop_oneof![Just(EveSite::None), Just(EveSite::AliceArm), Just(EveSite::BobArm)],
        0.0f64..0.95,
    )
        .prop_map(|(c, site, f)| if site == EveSite::None { c } else { c.with_tap(site, f) })
}

fn lossless(mut c: ProtocolConfig) -> ProtocolConfig {
    c.victor_loss = 0.0;
    c.bob_efficiency = 1.0;
    c
}

// ---- noise ledger ----

/// A random optical circuit over a pool of four modes.
#[derive(Clone, Debug)]
pub enum Op {
    Split { i: usize, j: usize, t: f64, quarter: bool },
    Loss { i: usize, eta: f64 },
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (0usize..4, 0usize..4, 0.0f64..=1.0, any::<bool>())
            .prop_map(|(i, j, t, quarter)| Op::Split { i, j, t, quarter }),
        (0usize..4, 0.0f64..=1.0).prop_map(|(i, eta)| Op::Loss { i, eta }),
    ]
}

fn circuit() -> impl Strategy<Value = (Vec<(SqueezerSpec, bool)>, Vec<Op>)> {
    (
        proptest::collection::vec((squeezer(), any::<bool>()), 4),
        proptest::collection::vec(op(), 0..10),
    )
}

fn build(ledger: &mut NoiseLedger, sources: &[(SqueezerSpec, bool)], ops: &[Op]) -> Vec<LinearField> {
    let mut pool: Vec<LinearField> = sources
        .iter()
        .map(|(s, flip)| {
            let (vp, vm) = if *flip { (s.var_anti, s.var_sqz) } else { (s.var_sqz, s.var_anti) };
            LinearField::mode(ledger.register(vp, vm).unwrap())
        })
        .collect();
    for o in ops {
        match *o {
            Op::Split { i, j, t, quarter } if i != j => {
                let phase = if quarter { BeamsplitterPhase::Quadrature } else { BeamsplitterPhase::InPhase };
                let (a, b) = beamsplitter(&pool[i], &pool[j], t, phase).unwrap();
                pool[i] = a;
                pool[j] = b;
            }
            Op::Split { .. } => {}
            Op::Loss { i, eta } => pool[i] = ledger.apply_loss(&pool[i], eta).unwrap(),
        }
    }
    pool
}

fn uncertainty(ledger: &NoiseLedger, f: &LinearField) -> Result<f64, TestCaseError> {
    Ok(ok(ledger.variance(f, Quadrature::Plus))? * ok(ledger.variance(f, Quadrature::Minus))?)
}

pub fn noise_uncertainty(seed: u64) -> Result<(), String> {
    run(seed, (circuit(), any_protocol()), |((sources, ops), cfg)| {
        let mut ledger = NoiseLedger::new();
        for f in build(&mut ledger, &sources, &ops) {
            let p = uncertainty(&ledger, &f)?;
            prop_assert!(p >= 1.0 - 1e-9, "circuit field product {}", p);
        }
        let r = ok(teleport_assembled(&cfg))?;
        prop_assert!(uncertainty(&r.ledger, &r.output)? >= 1.0 - 1e-9);
        if let Some(e) = &r.eve_output {
            prop_assert!(uncertainty(&r.ledger, e)? >= 1.0 - 1e-9);
        }
        Ok(())
    })
}

pub fn noise_bilinear(seed: u64) -> Result<(), String> {
    run(seed, (circuit(), -5.0f64..5.0, 0usize..4, 0usize..4), |((sources, ops), c, i, j)| {
        let mut ledger = NoiseLedger::new();
        let pool = build(&mut ledger, &sources, &ops);
        let scaled = pool[i].scaled(c);
        for q in Quadrature::BOTH {
            for r in Quadrature::BOTH {
                let lhs = ok(ledger.covariance(&scaled, q, &pool[j], r))?;
                let rhs = c * ok(ledger.covariance(&pool[i], q, &pool[j], r))?;
                prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()), "{} vs {}", lhs, rhs);
            }
        }
        Ok(())
    })
}

pub fn noise_conditional(seed: u64) -> Result<(), String> {
    run(seed, (circuit(), 0usize..4, 0usize..4), |((sources, ops), i, j)| {
        let mut ledger = NoiseLedger::new();
        let pool = build(&mut ledger, &sources, &ops);
        for q in Quadrature::BOTH {
            let cv = ok(ledger.conditional_variance(&pool[i], &pool[j], q))?;
            let v = ok(ledger.variance(&pool[i], q))?;
            prop_assert!(cv <= v + 1e-12, "conditional {} > variance {}", cv, v);
        }
        Ok(())
    })
}

pub fn noise_beamsplitter(seed: u64) -> Result<(), String> {
    run(seed, (circuit(), 0.0f64..=1.0, 0usize..4, 0usize..4), |((sources, ops), t, i, j)| {
        prop_assume!(i != j);
        let mut ledger = NoiseLedger::new();
        let pool = build(&mut ledger, &sources, &ops);
        let (a, b) = ok(beamsplitter(&pool[i], &pool[j], t, BeamsplitterPhase::InPhase))?;
        for q in Quadrature::BOTH {
            let before = ok(ledger.variance(&pool[i], q))? + ok(ledger.variance(&pool[j], q))?;
            let after = ok(ledger.variance(&a, q))? + ok(ledger.variance(&b, q))?;
            prop_assert!((before - after).abs() <= 1e-12 * before.max(1.0), "{} vs {}", before, after);
        }
        Ok(())
    })
}

pub fn noise_loss_composition(seed: u64) -> Result<(), String> {
    run(seed, (circuit(), 0usize..4, 0.0f64..=1.0, 0.0f64..=1.0), |((sources, ops), i, e1, e2)| {
        let mut ledger = NoiseLedger::new();
        let pool = build(&mut ledger, &sources, &ops);
        let twice = ok(ledger.apply_loss(&pool[i], e1))?;
        let twice = ok(ledger.apply_loss(&twice, e2))?;
        let once = ok(ledger.apply_loss(&pool[i], e1 * e2))?;
        for q in Quadrature::BOTH {
            let a = ok(ledger.variance(&twice, q))?;
            let b = ok(ledger.variance(&once, q))?;
            prop_assert!((a - b).abs() <= 1e-12 * b.max(1.0), "{} vs {}", a, b);
        }
        Ok(())
    })
}

// ---- teleporter ----

pub fn tele_equivalence(seed: u64) -> Result<(), String> {
    run(seed, protocol(), |cfg| {
        let a = ok(teleport_closed_form(&cfg))?;
        let b = ok(teleport_assembled(&cfg))?;
        let (ca, cb) = (ok(a.output_variances())?, ok(b.output_variances())?);
        let (ia, ib) = (ok(a.input_variances())?, ok(b.input_variances())?);
        for (x, y) in [(ca.0, cb.0), (ca.1, cb.1), (ia.0, ib.0), (ia.1, ib.1)] {
            prop_assert!((x - y).abs() <= 1e-10 * x.abs().max(1.0), "{} vs {}", x, y);
        }
        for q in Quadrature::BOTH {
            let x = ok(a.in_out_covariance(q))?;
            let y = ok(b.in_out_covariance(q))?;
            prop_assert!((x - y).abs() <= 1e-10 * x.abs().max(1.0), "cov {} vs {}", x, y);
            prop_assert!((a.output.alpha(q) - b.output.alpha(q)).abs() <= 1e-10 * a.output.alpha(q).abs().max(1.0));
        }
        Ok(())
    })
}

pub fn tele_output_floor(seed: u64) -> Result<(), String> {
    run(seed, protocol(), |cfg| {
        let mut c = cfg;
        c.victor_loss = 0.0;
        let r = ok(teleport_closed_form(&c))?;
        let (vp, vm) = ok(r.output_variances())?;
        prop_assert!(vp >= c.gains.g_plus.powi(2) * c.input_variances.0 - 1e-12);
        prop_assert!(vm >= c.gains.g_minus.powi(2) * c.input_variances.1 - 1e-12);
        Ok(())
    })
}

pub fn tele_monotone_squeezing(seed: u64) -> Result<(), String> {
    run(seed, (0.001f64..1.0, 0.001f64..1.0, protocol()), |(a, b, cfg)| {
        let (strong, weak) = if a < b { (a, b) } else { (b, a) };
        let at = |s: f64| -> Result<(f64, f64), TestCaseError> {
            // with η_B < 1 the anti-squeezed quadrature leaks in as s → 0
            let mut c = cfg.with_gains(Gains::unity());
            c.bob_efficiency = 1.0;
            c.squeezer_1 = SqueezerSpec::pure(s).unwrap();
            c.squeezer_2 = c.squeezer_1;
            ok(ok(teleport_closed_form(&c))?.output_variances())
        };
        let (s, w) = (at(strong)?, at(weak)?);
        prop_assert!(s.0 <= w.0 + 1e-12 && s.1 <= w.1 + 1e-12, "{:?} vs {:?}", s, w);
        Ok(())
    })
}

pub fn tele_loss_round_trip(seed: u64) -> Result<(), String> {
    run(seed, (0.01f64..100.0, 0.001f64..=1.0), |(v, eta)| {
        let measured = eta * v + (1.0 - eta);
        let back = ok(infer_out_loss(measured, eta))?;
        prop_assert!((back - v).abs() <= 1e-12 * v.max(1.0) / eta, "{} vs {}", back, v);
        Ok(())
    })
}

pub fn tele_gain_realization(seed: u64) -> Result<(), String> {
    run(seed, (protocol(), 0.1f64..10.0, 0.1f64..10.0), |(cfg, ap, am)| {
        let c = lossless(cfg).with_input_alpha(ap, am);
        for r in [ok(teleport_closed_form(&c))?, ok(teleport_assembled(&c))?] {
            let gp = r.output.alpha(Quadrature::Plus) / ap;
            let gm = r.output.alpha(Quadrature::Minus) / am;
            prop_assert!((gp - c.gains.g_plus).abs() <= 1e-12 && (gm - c.gains.g_minus).abs() <= 1e-12);
        }
        Ok(())
    })
}

// ---- measures ----

pub fn measures_transfer_bounds(seed: u64) -> Result<(), String> {
    run(seed, any_protocol(), |cfg| {
        let r = ok(teleport_assembled(&cfg))?;
        let mut reports = vec![ok(measure(&r))?];
        if r.eve_output.is_some() {
            reports.push(ok(measure_eve(&r))?);
        }
        for m in reports {
            for t in [m.t_plus, m.t_minus] {
                prop_assert!((-1e-12..=1.0 + 1e-9).contains(&t), "T = {}", t);
            }
            prop_assert!(m.t_q <= 2.0 + 1e-9);
        }
        Ok(())
    })
}

pub fn measures_vq_floor(seed: u64) -> Result<(), String> {
    run(seed, any_protocol(), |cfg| {
        let r = ok(teleport_assembled(&cfg))?;
        let mut reports = vec![ok(measure(&r))?];
        if r.eve_output.is_some() {
            reports.push(ok(measure_eve(&r))?);
        }
        for m in reports {
            let floor = (m.gains.product() - 1.0).powi(2);
            prop_assert!(m.v_q >= floor - 1e-9 * floor.max(1.0), "V_q {} < {}", m.v_q, floor);
        }
        Ok(())
    })
}

pub fn measures_m_floor(seed: u64) -> Result<(), String> {
    run(seed, any_protocol(), |cfg| {
        let r = ok(teleport_assembled(&cfg))?;
        let m = ok(measure(&r))?;
        prop_assert!(m.m >= m_min(m.gains) - 1e-9, "M {} < {}", m.m, m_min(m.gains));
        let mut classical = cfg;
        classical.squeezer_1 = SqueezerSpec::vacuum();
        classical.squeezer_2 = SqueezerSpec::vacuum();
        for g in linspace(0.0, 3.0, 100) {
            let r = ok(teleport_assembled(&classical.with_gains(Gains::symmetric(g))))?;
            let m = ok(measure(&r))?;
            prop_assert!(m.m >= 1.0 - 1e-9, "separable M = {} at g = {}", m.m, g);
        }
        Ok(())
    })
}

pub fn measures_band_endpoints(seed: u64) -> Result<(), String> {
    run(seed, pure_squeezer(0.005, 0.99), |s| {
        let (lo, hi) = ok(m_gain_bandwidth(s))?;
        for g in [lo, hi] {
            let r = ok(teleport_assembled(&ProtocolConfig::ideal(s, Gains::symmetric(g))))?;
            let m = ok(measure(&r))?.m;
            prop_assert!((m - 1.0).abs() <= 1e-6, "M({}) = {}", g, m);
        }
        Ok(())
    })
}

fn pair_state() -> impl Strategy<Value = (SqueezerSpec, SqueezerSpec, f64, f64)> {
    (squeezer(), squeezer(), 0.05f64..=1.0, 0.05f64..=1.0)
}

pub fn measures_k_opt(seed: u64) -> Result<(), String> {
    run(seed, pair_state(), |(s1, s2, ex, ey)| {
        let mut ledger = NoiseLedger::new();
        let (x, y) = ok(cvtele_core::teleporter::make_epr(&mut ledger, s1, s2))?;
        let x = ok(ledger.apply_loss(&x, ex))?;
        let y = ok(ledger.apply_loss(&y, ey))?;
        let report = ok(inseparability(&ledger, &x, &y))?;
        let m = ok(PairMoments::from_fields(&ledger, &x, &y))?;
        let mut brute = f64::INFINITY;
        for lk in linspace(-4.0, 4.0, 10_000) {
            for signs in [(1.0, -1.0), (-1.0, 1.0)] {
                brute = brute.min(m.product_form(signs, lk.exp()));
            }
        }
        prop_assert!(
            (report.i_value - brute).abs() <= 1e-4 * brute,
            "optimized {} brute {}",
            report.i_value,
            brute
        );
        Ok(())
    })
}

pub fn measures_fidelity_alpha(seed: u64) -> Result<(), String> {
    let dg = prop_oneof![-1.0f64..-0.01, 0.01f64..1.0];
    run(seed, (dg, squeezer(), 0.0f64..0.3), |(dg, s, d)| {
        let mut cfg = ProtocolConfig::ideal(s, Gains::symmetric(1.0 + dg));
        cfg.dark_noise = d;
        let out = ok(ok(teleport_closed_form(&cfg))?.output_variances())?;
        let gains = cfg.gains;
        let f = |a: f64| fidelity((a * FRAC_1_SQRT_2, a * FRAC_1_SQRT_2), gains, out);
        let mut prev = ok(f(0.0))?;
        for a in linspace(0.0, 100.0, 401).into_iter().skip(1) {
            let v = ok(f(a))?;
            prop_assert!(v < prev || (v == 0.0 && prev == 0.0), "F({}) = {} after {}", a, v, prev);
            prev = v;
        }
        let far = (40.0 * (1.0 + out.0.max(out.1))).sqrt() / dg.abs();
        prop_assert!(ok(f(far))? < 1e-6);
        Ok(())
    })
}

pub fn measures_m_optimum(seed: u64) -> Result<(), String> {
    run(seed, pure_squeezer(0.01, 0.99), |s| {
        let step = 1e-3;
        let grid = linspace(0.5, 1.5, 1001);
        let mut best = (f64::INFINITY, 0.0);
        for &g in &grid {
            let r = ok(teleport_closed_form(&ProtocolConfig::ideal(s, Gains::symmetric(g))))?;
            let m = ok(measure(&r))?.m;
            if m < best.0 {
                best = (m, g);
            }
        }
        prop_assert!((best.1 - 1.0).abs() <= step + 1e-12, "argmin at {}", best.1);
        Ok(())
    })
}

// ---- swapping ----

pub fn swap_gopt(seed: u64) -> Result<(), String> {
    run(seed, (pure_squeezer(0.05, 0.95), pure_squeezer(0.05, 0.95)), |(sx, sy)| {
        let cfg = ok(SwapConfig::new(sx, sy, 1.0))?;
        let g_opt = ok(g_opt_closed_form(&cfg))?;
        let step = 0.01;
        let mut best = (f64::INFINITY, 0.0);
        for g in linspace(0.0, 1.5, 151) {
            let o = ok(swap_run(&cfg.with_gain(g)))?;
            prop_assert!(o.i_final >= o.i_initial - 1e-9, "swap improved inseparability");
            if o.i_final < best.0 {
                best = (o.i_final, g);
            }
        }
        prop_assert!((best.1 - g_opt).abs() <= step + 1e-12, "argmin {} vs {}", best.1, g_opt);
        Ok(())
    })
}

pub fn swap_band_independence(seed: u64) -> Result<(), String> {
    run(seed, pure_squeezer(0.02, 0.95), |t| {
        let weak = ok(SwapConfig::new(t, SqueezerSpec::pure(0.5).unwrap(), 1.0))?;
        let strong = ok(SwapConfig::new(t, SqueezerSpec::pure(0.1).unwrap(), 1.0))?;
        let (a, b) = (ok(swap_bandwidth(&weak))?, ok(swap_bandwidth(&strong))?);
        let (m0, m1) = ok(m_gain_bandwidth(t))?;
        for (x, y) in [(a.0, b.0), (a.1, b.1), (a.0, m0), (a.1, m1)] {
            prop_assert!((x - y).abs() <= 1e-5 * y.max(1.0), "{} vs {}", x, y);
        }
        let opt = |c: &SwapConfig| -> Result<f64, TestCaseError> {
            Ok(ok(swap_run(&c.with_gain(ok(g_opt_closed_form(c))?)))?.i_final)
        };
        prop_assert!(opt(&strong)? < opt(&weak)?);
        Ok(())
    })
}

pub fn swap_continuity(seed: u64) -> Result<(), String> {
    run(seed, (squeezer(), squeezer()), |(t, y)| {
        let cfg = ok(SwapConfig::new(t, y, 1.0))?;
        let grid = logspace(0.01, 10.0, 200);
        let vals = grid
            .iter()
            .map(|&g| ok(swap_run(&cfg.with_gain(g))).map(|o| o.i_final))
            .collect::<Result<Vec<f64>, _>>()?;
        let jumps: Vec<f64> = vals.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        for j in 1..jumps.len() - 1 {
            let local = jumps[j - 1].max(jumps[j + 1]);
            prop_assert!(jumps[j] <= 10.0 * local + 1e-9, "jump {} at g = {}", jumps[j], grid[j]);
        }
        Ok(())
    })
}

// ---- spectra pipeline ----

fn pipeline_config() -> impl Strategy<Value = ProtocolConfig> {
    (
        (0.1f64..1.0, 1.0f64..2.0),
        (0.5f64..1.5, 0.5f64..1.5),
        (5.0f64..20.0, 5.0f64..20.0),
        (0.0f64..0.3, 0.8f64..=1.0, 0.0f64..0.2),
    )
        .prop_map(|((s, k), (gp, gm), (ap, am), (vl, be, d))| {
            let r = SqueezerSpec::new(s, k / s).unwrap();
            let mut c = ProtocolConfig::ideal(r, Gains::new(gp, gm).unwrap()).with_input_alpha(ap, am);
            c.victor_loss = vl;
            c.bob_efficiency = be;
            c.dark_noise = d;
            c
        })
}

pub fn spectra_consistency(seed: u64) -> Result<(), String> {
    run(seed, (pipeline_config(), any::<u64>()), |(cfg, rng_seed)| {
        let geometry = SpectrumGeometry::default();
        let rec = ok(synth_spectra(&cfg, &geometry, Averages::Count(1_000_000), rng_seed))?;
        let exact = ok(synth_spectra(&cfg, &geometry, Averages::Infinite, 0))?;
        let eta = 1.0 - cfg.victor_loss;
        for port in [Port::Input, Port::Output] {
            for q in Quadrature::BOTH {
                let x = ok(band_average(&rec, port, q, &geometry.windows))?;
                let x0 = ok(band_average(&exact, port, q, &geometry.windows))?;
                prop_assert!((x - x0).abs() <= 1e-3 * x0, "band {} vs {}", x, x0);
                let a = 0.5 * (ok(rec.carrier_value(port, q))? - x).max(0.0).sqrt();
                let a0 = 0.5 * (ok(exact.carrier_value(port, q))? - x0).sqrt();
                prop_assert!((a - a0).abs() <= 1e-3 * a0, "alpha {} vs {}", a, a0);
            }
        }
        let want = eta.sqrt() * cfg.input_alpha.0;
        let got = 0.5 * (ok(exact.carrier_value(Port::Input, Quadrature::Plus))?
            - ok(band_average(&exact, Port::Input, Quadrature::Plus, &geometry.windows))?)
        .sqrt();
        prop_assert!((got - want).abs() <= 1e-9 * want);
        Ok(())
    })
}

pub fn spectra_determinism(seed: u64) -> Result<(), String> {
    run(seed, (pipeline_config(), any::<u64>()), |(cfg, s)| {
        let opts = PipelineOptions::default();
        let a = ok(run_pipeline(&cfg, &opts, s, 0))?;
        let b = ok(run_pipeline(&cfg, &opts, s, 0))?;
        prop_assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        prop_assert_eq!(a, b);
        Ok(())
    })
}

pub fn spectra_model_agreement(seed: u64) -> Result<(), String> {
    run(seed, pipeline_config(), |cfg| {
        let opts = PipelineOptions {
            averages: Averages::Infinite,
            ..Default::default()
        };
        let run = ok(run_pipeline(&cfg, &opts, 0, 0))?;
        let mut corrected = cfg;
        corrected.victor_loss = 0.0;
        let truth = ok(measure(&ok(teleport_closed_form(&corrected))?))?;
        let rep = &run.report;
        for (a, b) in [
            (rep.t_q, truth.t_q),
            (rep.v_q, truth.v_q),
            (rep.m, truth.m),
            (rep.fidelity.unwrap(), truth.fidelity.unwrap()),
            (run.estimated_gains.g_plus, cfg.gains.g_plus),
            (run.estimated_gains.g_minus, cfg.gains.g_minus),
        ] {
            prop_assert!((a - b).abs() <= 1e-6 * b.abs().max(1.0), "{} vs {}", a, b);
        }
        Ok(())
    })
}

pub fn spectra_histogram_order(seed: u64) -> Result<(), String> {
    run(
        seed,
        (pipeline_config(), proptest::collection::vec(any::<u64>(), 2..6), any::<u64>()),
        |(cfg, seeds, shuffle)| {
            let opts = PipelineOptions {
                averages: Averages::Count(16),
                ..Default::default()
            };
            let runs = seeds
                .iter()
                .map(|&s| ok(run_pipeline(&cfg, &opts, s, 0)))
                .collect::<Result<Vec<_>, _>>()?;
            let mut shuffled = runs.clone();
            shuffled.rotate_left((shuffle as usize) % runs.len());
            shuffled.reverse();
            for mode in [GainMode::VerifiedGain, GainMode::AssumeUnity] {
                let a = ok(fidelity_histogram(&runs, mode, HistogramSpec::default()))?;
                let b = ok(fidelity_histogram(&shuffled, mode, HistogramSpec::default()))?;
                prop_assert_eq!(a.counts, b.counts);
            }
            Ok(())
        },
    )
}

pub fn spectra_response_period(seed: u64) -> Result<(), String> {
    run(seed, (protocol(), 1e-8f64..1e-6, 1e6f64..2e7), |(cfg, tau, f)| {
        let flat = ok(frequency_response_model(&cfg, 0.0, Rolloff::Flat, 8.4e6, &[f, 2.0 * f]))?;
        prop_assert!((flat[0].var_plus - flat[1].var_plus).abs() <= 1e-12 * flat[0].var_plus);
        let pts = ok(frequency_response_model(&cfg, tau, Rolloff::Flat, 8.4e6, &[f, f + 1.0 / tau]))?;
        prop_assert!((pts[0].var_plus - pts[1].var_plus).abs() <= 1e-6 * pts[0].var_plus.max(1.0));
        prop_assert!((pts[0].var_minus - pts[1].var_minus).abs() <= 1e-6 * pts[0].var_minus.max(1.0));
        Ok(())
    })
}

/// Every suite, with the seed it runs from.
pub const SUITES: &[(&str, u64, fn(u64) -> Result<(), String>)] = &[
    ("noise::uncertainty_reachable", 0x0101, noise_uncertainty),
    ("noise::covariance_bilinear", 0x0102, noise_bilinear),
    ("noise::conditional_below_variance", 0x0103, noise_conditional),
    ("noise::beamsplitter_conserves", 0x0104, noise_beamsplitter),
    ("noise::loss_composes", 0x0105, noise_loss_composition),
    ("teleporter::closed_form_equals_assembled", 0x0201, tele_equivalence),
    ("teleporter::output_floor", 0x0202, tele_output_floor),
    ("teleporter::monotone_in_squeezing", 0x0203, tele_monotone_squeezing),
    ("teleporter::loss_round_trip", 0x0204, tele_loss_round_trip),
    ("teleporter::gain_realization", 0x0205, tele_gain_realization),
    ("measures::transfer_bounds", 0x0301, measures_transfer_bounds),
    ("measures::vq_floor", 0x0302, measures_vq_floor),
    ("measures::m_floor_and_separable", 0x0303, measures_m_floor),
    ("measures::band_endpoints", 0x0304, measures_band_endpoints),
    ("measures::k_opt_matches_grid", 0x0305, measures_k_opt),
    ("measures::fidelity_falls_with_alpha", 0x0306, measures_fidelity_alpha),
    ("measures::m_optimum_at_unity", 0x0307, measures_m_optimum),
    ("swapping::g_opt_is_argmin", 0x0401, swap_gopt),
    ("swapping::band_independent_of_input", 0x0402, swap_band_independence),
    ("swapping::continuity", 0x0403, swap_continuity),
    ("spectra::estimator_consistency", 0x0501, spectra_consistency),
    ("spectra::determinism", 0x0502, spectra_determinism),
    ("spectra::model_agreement", 0x0503, spectra_model_agreement),
    ("spectra::histogram_order_independent", 0x0504, spectra_histogram_order),
    ("spectra::response_period", 0x0505, spectra_response_period),
];

pub fn suite(name: &str) -> Result<(), String> {
    let (_, seed, f) = SUITES
        .iter()
        .find(|(n, _, _)| *n == name)
        .unwrap_or_else(|| panic!("unknown suite {name}"));
    f(*seed)
}
