//! Quadrature teleporter: EPR generation, Alice's joint measurement,
//! feed-forward onto Bob's beam, loss, detector dark noise and beamsplitter
//! eavesdroppers.
//!
//! Alice mixes the input with her EPR beam `x` on a 50/50 beamsplitter,
//! detects the amplitude quadrature of one port and the phase quadrature of
//! the other, and sends both photocurrents to Bob. Bob displaces his beam `y`
//! by `√2·g±` times each photocurrent.

use serde::{Deserialize, Serialize};

use crate::error::{check_unit_interval, Error, Result};
use crate::noise::{
    balanced_quadrature_split, beamsplitter, BeamsplitterPhase, LinearField, LinearForm,
    NoiseKey, NoiseLedger, Quadrature, Routing, Term, INV_SQRT2,
};

/// Slack allowed on `var_sqz · var_anti ≥ 1`.
pub const UNCERTAINTY_SLACK: f64 = 1e-9;

/// An amplitude-squeezed source: `var_sqz` on the amplitude quadrature and
/// `var_anti` on the phase quadrature.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezerSpec {
    pub var_sqz: f64,
    pub var_anti: f64,
}

impl SqueezerSpec {
    pub fn new(var_sqz: f64, var_anti: f64) -> Result<Self> {
        let spec = Self { var_sqz, var_anti };
        spec.validate()?;
        Ok(spec)
    }

    /// Minimum-uncertainty squeezer.
    pub fn pure(var_sqz: f64) -> Result<Self> {
        Self::new(var_sqz, 1.0 / var_sqz)
    }

    pub fn vacuum() -> Self {
        Self {
            var_sqz: 1.0,
            var_anti: 1.0,
        }
    }

    /// From squeezing and antisqueezing levels in dB.
    pub fn from_db(sqz_db: f64, anti_db: f64) -> Result<Self> {
        Self::new(10f64.powf(-sqz_db / 10.0), 10f64.powf(anti_db / 10.0))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.var_sqz > 0.0 && self.var_sqz <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "var_sqz",
                value: self.var_sqz,
                reason: "must lie in (0, 1]",
            });
        }
        if !self.var_anti.is_finite() || self.var_sqz * self.var_anti < 1.0 - UNCERTAINTY_SLACK {
            return Err(Error::InvalidParameter {
                name: "var_anti",
                value: self.var_anti,
                reason: "violates the uncertainty bound var_sqz * var_anti >= 1",
            });
        }
        Ok(())
    }

    /// `K = var_sqz · var_anti`; 1 for a pure source.
    pub fn mixedness(&self) -> f64 {
        self.var_sqz * self.var_anti
    }

    pub fn is_pure(&self) -> bool {
        (self.mixedness() - 1.0).abs() <= UNCERTAINTY_SLACK
    }

    pub fn squeezing_db(&self) -> f64 {
        -10.0 * self.var_sqz.log10()
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gains {
    pub g_plus: f64,
    pub g_minus: f64,
}

impl Gains {
    pub fn new(g_plus: f64, g_minus: f64) -> Result<Self> {
        for (name, g) in [("g_plus", g_plus), ("g_minus", g_minus)] {
            if !(g.is_finite() && g >= 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value: g,
                    reason: "gains must be finite and non-negative",
                });
            }
        }
        Ok(Self { g_plus, g_minus })
    }

    pub const fn symmetric(g: f64) -> Self {
        Self {
            g_plus: g,
            g_minus: g,
        }
    }

    pub const fn unity() -> Self {
        Self::symmetric(1.0)
    }

    pub fn get(&self, q: Quadrature) -> f64 {
        match q {
            Quadrature::Plus => self.g_plus,
            Quadrature::Minus => self.g_minus,
        }
    }

    /// `g = √|g⁺g⁻|`.
    pub fn scalar(&self) -> f64 {
        (self.g_plus * self.g_minus).abs().sqrt()
    }

    pub fn product(&self) -> f64 {
        self.g_plus * self.g_minus
    }
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EveSite {
    #[default]
    None,
    AliceArm,
    BobArm,
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub squeezer_1: SqueezerSpec,
    pub squeezer_2: SqueezerSpec,
    /// Coherent amplitudes `(α⁺, α⁻)` of the input.
    pub input_alpha: (f64, f64),
    /// Input quadrature variances; `(1, 1)` is a coherent state.
    pub input_variances: (f64, f64),
    pub gains: Gains,
    /// Fractional loss of the verifying homodyne detector.
    pub victor_loss: f64,
    /// Transmission of Bob's beam up to the output, including his coupler.
    pub bob_efficiency: f64,
    /// Additive variance on each of Alice's photocurrents.
    pub dark_noise: f64,
    pub eve_tap_site: EveSite,
    pub eve_tap_fraction: f64,
}

/// Dark noise 10 dB below shot noise.
pub const EXPERIMENT_DARK_NOISE: f64 = 0.1;
pub const EXPERIMENT_VICTOR_LOSS: f64 = 0.15;
pub const EXPERIMENT_BOB_EFFICIENCY: f64 = 0.98;

/// The reference experiment's resource after loss inference: squeezed
/// variance 0.33 with mixedness 2.8.
pub fn reference_resource() -> SqueezerSpec {
    SqueezerSpec {
        var_sqz: 0.33,
        var_anti: 2.8 / 0.33,
    }
}

impl ProtocolConfig {
    /// Lossless, noiseless detectors, coherent vacuum input.
    pub fn ideal(resource: SqueezerSpec, gains: Gains) -> Self {
        Self {
            squeezer_1: resource,
            squeezer_2: resource,
            input_alpha: (0.0, 0.0),
            input_variances: (1.0, 1.0),
            gains,
            victor_loss: 0.0,
            bob_efficiency: 1.0,
            dark_noise: 0.0,
            eve_tap_site: EveSite::None,
            eve_tap_fraction: 0.0,
        }
    }

    /// Detector and coupling imperfections of the reference experiment.
    pub fn experimental(resource: SqueezerSpec, gains: Gains) -> Self {
        Self {
            victor_loss: EXPERIMENT_VICTOR_LOSS,
            bob_efficiency: EXPERIMENT_BOB_EFFICIENCY,
            dark_noise: EXPERIMENT_DARK_NOISE,
            ..Self::ideal(resource, gains)
        }
    }

    pub fn with_input_alpha(mut self, alpha_plus: f64, alpha_minus: f64) -> Self {
        self.input_alpha = (alpha_plus, alpha_minus);
        self
    }

    pub fn with_gains(mut self, gains: Gains) -> Self {
        self.gains = gains;
        self
    }

    pub fn with_tap(mut self, site: EveSite, fraction: f64) -> Self {
        self.eve_tap_site = site;
        self.eve_tap_fraction = fraction;
        self
    }

    pub fn resource_symmetric(&self) -> bool {
        self.squeezer_1 == self.squeezer_2
    }

    pub fn validate(&self) -> Result<()> {
        self.squeezer_1.validate()?;
        self.squeezer_2.validate()?;
        Gains::new(self.gains.g_plus, self.gains.g_minus)?;
        for (name, a) in [
            ("input_alpha_plus", self.input_alpha.0),
            ("input_alpha_minus", self.input_alpha.1),
        ] {
            crate::error::check_finite(name, a)?;
        }
        for (name, v) in [
            ("input_var_plus", self.input_variances.0),
            ("input_var_minus", self.input_variances.1),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "input variances must be finite and positive",
                });
            }
        }
        check_unit_interval("victor_loss", self.victor_loss)?;
        check_unit_interval("bob_efficiency", self.bob_efficiency)?;
        if !(self.dark_noise.is_finite() && self.dark_noise >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "dark_noise",
                value: self.dark_noise,
                reason: "must be finite and non-negative",
            });
        }
        if !(0.0..1.0).contains(&self.eve_tap_fraction) {
            return Err(Error::InvalidParameter {
                name: "eve_tap_fraction",
                value: self.eve_tap_fraction,
                reason: "must lie in [0, 1)",
            });
        }
        Ok(())
    }

    pub fn input_is_coherent(&self) -> bool {
        self.input_variances == (1.0, 1.0)
    }
}

/// Fields of one protocol run, together with the ledger that resolves them.
#[derive(Clone, Debug)]
pub struct ScenarioResult {
    pub ledger: NoiseLedger,
    pub input: LinearField,
    pub output: LinearField,
    pub eve_output: Option<LinearField>,
    pub realized_gains: Gains,
    /// Eve's gain magnitudes as realized on her reconstruction.
    pub eve_realized_gains: Option<Gains>,
}

impl ScenarioResult {
    pub fn output_variances(&self) -> Result<(f64, f64)> {
        Ok((
            self.ledger.variance(&self.output, Quadrature::Plus)?,
            self.ledger.variance(&self.output, Quadrature::Minus)?,
        ))
    }

    pub fn input_variances(&self) -> Result<(f64, f64)> {
        Ok((
            self.ledger.variance(&self.input, Quadrature::Plus)?,
            self.ledger.variance(&self.input, Quadrature::Minus)?,
        ))
    }

    pub fn in_out_covariance(&self, q: Quadrature) -> Result<f64> {
        self.ledger.covariance(&self.input, q, &self.output, q)
    }
}

/// Interferes two amplitude-squeezed beams with a π/2 phase on a 50/50
/// beamsplitter. Returns `(x, y)`.
pub fn make_epr(
    ledger: &mut NoiseLedger,
    s1: SqueezerSpec,
    s2: SqueezerSpec,
) -> Result<(LinearField, LinearField)> {
    s1.validate()?;
    s2.validate()?;
    let a = LinearField::mode(ledger.register(s1.var_sqz, s1.var_anti)?);
    let b = LinearField::mode(ledger.register(s2.var_sqz, s2.var_anti)?);
    balanced_quadrature_split(&a, &b)
}

fn input_field(ledger: &mut NoiseLedger, cfg: &ProtocolConfig) -> Result<LinearField> {
    let id = ledger.register(cfg.input_variances.0, cfg.input_variances.1)?;
    Ok(LinearField::mode(id).with_amplitude(cfg.input_alpha.0, cfg.input_alpha.1))
}

fn realized(ledger: &NoiseLedger, input: &LinearField, out: &LinearField) -> Result<Gains> {
    let g = |q| -> Result<f64> {
        let v = ledger.variance(input, q)?;
        Ok(ledger.covariance(input, q, out, q)?.abs() / v)
    };
    Ok(Gains {
        g_plus: g(Quadrature::Plus)?,
        g_minus: g(Quadrature::Minus)?,
    })
}

/// Closed-form protocol output, built coefficient by coefficient.
///
/// `X⁺_out = g⁺X⁺_in + (√η_B+g⁺)/√2·S₁⁺ + (√η_B−g⁺)/√2·S₂⁻ + loss + dark`
/// and the phase mirror with `S₁ ↔ S₂`, followed by the verifier's loss.
pub fn teleport_closed_form(cfg: &ProtocolConfig) -> Result<ScenarioResult> {
    cfg.validate()?;
    if cfg.eve_tap_site != EveSite::None {
        return Err(Error::TapNotSupported);
    }
    let mut ledger = NoiseLedger::new();
    let input = input_field(&mut ledger, cfg)?;
    let s1 = ledger.register(cfg.squeezer_1.var_sqz, cfg.squeezer_1.var_anti)?;
    let s2 = ledger.register(cfg.squeezer_2.var_sqz, cfg.squeezer_2.var_anti)?;
    let eta = cfg.bob_efficiency.sqrt();
    let bob_loss = (1.0 - cfg.bob_efficiency).sqrt();
    let vac = ledger.vacuum();
    let (d1, d2) = if cfg.dark_noise > 0.0 {
        (
            Some(ledger.register(cfg.dark_noise, cfg.dark_noise)?),
            Some(ledger.register(cfg.dark_noise, cfg.dark_noise)?),
        )
    } else {
        (None, None)
    };
    use Quadrature::{Minus, Plus};
    let (gp, gm) = (cfg.gains.g_plus, cfg.gains.g_minus);

    let mut plus = LinearForm::new(0.0)
        .with_term(NoiseKey::new(s1, Plus), (eta + gp) * INV_SQRT2)
        .with_term(NoiseKey::new(s2, Minus), (eta - gp) * INV_SQRT2)
        .with_term(NoiseKey::new(vac, Plus), bob_loss);
    plus.add_scaled(input.quadrature(Plus), gp);
    let mut minus = LinearForm::new(0.0)
        .with_term(NoiseKey::new(s2, Plus), (eta + gm) * INV_SQRT2)
        .with_term(NoiseKey::new(s1, Minus), (eta - gm) * INV_SQRT2)
        .with_term(NoiseKey::new(vac, Minus), bob_loss);
    minus.add_scaled(input.quadrature(Minus), gm);
    if let (Some(d1), Some(d2)) = (d1, d2) {
        plus = plus.with_term(NoiseKey::new(d1, Plus), std::f64::consts::SQRT_2 * gp);
        minus = minus.with_term(NoiseKey::new(d2, Minus), std::f64::consts::SQRT_2 * gm);
    }
    let bob = LinearField::from_forms(plus, minus);
    let output = ledger.apply_loss(&bob, 1.0 - cfg.victor_loss)?;
    let realized_gains = realized(&ledger, &input, &output)?;
    Ok(ScenarioResult {
        ledger,
        input,
        output,
        eve_output: None,
        realized_gains,
        eve_realized_gains: None,
    })
}

/// Intermediate fields of an assembled run.
#[derive(Clone, Debug)]
pub struct Assembly {
    /// Bob's output after feed-forward, before the verifier's loss.
    pub bob_output: LinearField,
    /// Alice's amplitude and phase photocurrents.
    pub photocurrents: (LinearForm, LinearForm),
    /// The field Eve split off, if any.
    pub eve_field: Option<LinearField>,
    pub x: LinearField,
    pub y: LinearField,
}

fn tap(
    ledger: &mut NoiseLedger,
    field: &LinearField,
    fraction: f64,
) -> Result<(LinearField, LinearField)> {
    let v = ledger.vacuum_field();
    beamsplitter(field, &v, 1.0 - fraction, BeamsplitterPhase::InPhase)
}

/// Runs the protocol on an arbitrary input field already registered in
/// `ledger`. Only the resource, taps, losses and dark noise of `cfg` are
/// used; its input description is ignored.
pub fn assemble(
    ledger: &mut NoiseLedger,
    input: &LinearField,
    cfg: &ProtocolConfig,
) -> Result<Assembly> {
    cfg.validate()?;
    let (x, y) = make_epr(ledger, cfg.squeezer_1, cfg.squeezer_2)?;
    let mut eve_field = None;
    let mut alice_beam = x.clone();
    let mut bob_beam = y.clone();
    if cfg.eve_tap_site != EveSite::None {
        let target = match cfg.eve_tap_site {
            EveSite::AliceArm => &mut alice_beam,
            _ => &mut bob_beam,
        };
        let (kept, stolen) = tap(ledger, target, cfg.eve_tap_fraction)?;
        *target = kept;
        eve_field = Some(stolen);
    }
    let (c1, c2) = beamsplitter(input, &alice_beam, 0.5, BeamsplitterPhase::InPhase)?;
    let mut i_plus = c1.quadrature(Quadrature::Plus).clone();
    let mut i_minus = c2.quadrature(Quadrature::Minus).clone();
    if cfg.dark_noise > 0.0 {
        let d1 = LinearField::mode(ledger.register(cfg.dark_noise, cfg.dark_noise)?);
        let d2 = LinearField::mode(ledger.register(cfg.dark_noise, cfg.dark_noise)?);
        i_plus.add_scaled(d1.quadrature(Quadrature::Plus), 1.0);
        i_minus.add_scaled(d2.quadrature(Quadrature::Minus), 1.0);
    }
    let bob_beam = ledger.apply_loss(&bob_beam, cfg.bob_efficiency)?;
    let bob_output = feed_forward(&bob_beam, (&i_plus, &i_minus), cfg.gains, (1.0, 1.0))?;
    Ok(Assembly {
        bob_output,
        photocurrents: (i_plus, i_minus),
        eve_field,
        x,
        y,
    })
}

/// `beam± + s±·√2·g±·i±`.
fn feed_forward(
    beam: &LinearField,
    currents: (&LinearForm, &LinearForm),
    gains: Gains,
    signs: (f64, f64),
) -> Result<LinearField> {
    let c_plus = LinearField::from_forms(currents.0.clone(), LinearForm::new(0.0));
    let c_minus = LinearField::from_forms(LinearForm::new(0.0), currents.1.clone());
    let k = std::f64::consts::SQRT_2;
    crate::noise::superpose(&[
        Term::direct(1.0, beam),
        Term::new(signs.0 * k * gains.g_plus, &c_plus, Routing::Only(Quadrature::Plus)),
        Term::new(signs.1 * k * gains.g_minus, &c_minus, Routing::Only(Quadrature::Minus)),
    ])
}

/// Eve's reconstruction from her tapped field and the intercepted
/// photocurrents. Per quadrature she picks the feed-forward sign giving the
/// lower conditional variance with respect to the input.
fn eve_output(
    ledger: &NoiseLedger,
    input: &LinearField,
    assembly: &Assembly,
    gains: Gains,
) -> Result<LinearField> {
    let eve = assembly.eve_field.as_ref().ok_or(Error::NoTap)?;
    let currents = (&assembly.photocurrents.0, &assembly.photocurrents.1);
    let mut best_signs = (1.0, 1.0);
    for q in Quadrature::BOTH {
        let mut best = f64::INFINITY;
        for s in [1.0, -1.0] {
            let signs = match q {
                Quadrature::Plus => (s, best_signs.1),
                Quadrature::Minus => (best_signs.0, s),
            };
            let f = feed_forward(eve, currents, gains, signs)?;
            let cv = ledger.conditional_variance(&f, input, q)?;
            if cv < best - 1e-15 {
                best = cv;
                best_signs = signs;
            }
        }
    }
    feed_forward(eve, currents, gains, best_signs)
}

/// Protocol output assembled from its optical components.
pub fn teleport_assembled(cfg: &ProtocolConfig) -> Result<ScenarioResult> {
    teleport_assembled_with_eve_gains(cfg, cfg.gains)
}

fn teleport_assembled_with_eve_gains(
    cfg: &ProtocolConfig,
    eve_gains: Gains,
) -> Result<ScenarioResult> {
    cfg.validate()?;
    let mut ledger = NoiseLedger::new();
    let input = input_field(&mut ledger, cfg)?;
    let assembly = assemble(&mut ledger, &input, cfg)?;
    let output = ledger.apply_loss(&assembly.bob_output, 1.0 - cfg.victor_loss)?;
    let realized_gains = realized(&ledger, &input, &output)?;
    let (eve_output, eve_realized_gains) = if assembly.eve_field.is_some() {
        let e = eve_output(&ledger, &input, &assembly, eve_gains)?;
        let g = realized(&ledger, &input, &e)?;
        (Some(e), Some(g))
    } else {
        (None, None)
    };
    Ok(ScenarioResult {
        ledger,
        input,
        output,
        eve_output,
        realized_gains,
        eve_realized_gains,
    })
}

/// The full scenario with Eve reconstructing at `eve_gains`; her field is in
/// `eve_output`.
pub fn eve_reconstruction(cfg: &ProtocolConfig, eve_gains: Gains) -> Result<ScenarioResult> {
    if cfg.eve_tap_site == EveSite::None {
        return Err(Error::NoTap);
    }
    Gains::new(eve_gains.g_plus, eve_gains.g_minus)?;
    teleport_assembled_with_eve_gains(cfg, eve_gains)
}

/// Undo a detector loss on a measured variance: `(V − (1−η))/η`.
pub fn infer_out_loss(measured_variance: f64, efficiency: f64) -> Result<f64> {
    if !(efficiency > 0.0 && efficiency <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "efficiency",
            value: efficiency,
            reason: "must lie in (0, 1]",
        });
    }
    let floor = 1.0 - efficiency;
    if !(measured_variance > floor - 1e-12) {
        return Err(Error::BelowLossFloor {
            measured: measured_variance,
            floor,
            efficiency,
        });
    }
    Ok(((measured_variance - floor) / efficiency).max(0.0))
}

/// Output variance of the closed-form model, evaluated directly.
pub fn output_variance_formula(cfg: &ProtocolConfig, q: Quadrature) -> f64 {
    let (s1, s2) = (cfg.squeezer_1, cfg.squeezer_2);
    let g = cfg.gains.get(q);
    let (v_in, sqz, anti) = match q {
        Quadrature::Plus => (cfg.input_variances.0, s1.var_sqz, s2.var_anti),
        Quadrature::Minus => (cfg.input_variances.1, s2.var_sqz, s1.var_anti),
    };
    let eta = cfg.bob_efficiency;
    let e = eta.sqrt();
    let bob = g * g * v_in
        + 0.5 * (e + g).powi(2) * sqz
        + 0.5 * (e - g).powi(2) * anti
        + (1.0 - eta)
        + 2.0 * g * g * cfg.dark_noise;
    let v = 1.0 - cfg.victor_loss;
    v * bob + (1.0 - v)
}
