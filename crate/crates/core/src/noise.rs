//! Shot-noise-normalized linear noise algebra.
//!
//! Every optical field is written as a coherent amplitude plus a real linear
//! combination of independent elementary noise quadratures. Sources are held
//! in a [`NoiseLedger`]; fields only carry coefficients keyed by
//! `(source, quadrature)`, so all second moments reduce to weighted sums over
//! shared keys.
//!
//! Conventions: vacuum has unit variance in both quadratures, and
//! `X = 2α + δX`, so a field's coherent amplitude `α` is half the mean of its
//! quadrature. Quadratures of one elementary source are uncorrelated with
//! each other; correlations only arise through composition.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_finite, check_unit_interval, Error, Result};

/// Coefficients smaller than this are dropped from expansions.
pub const PRUNE_BELOW: f64 = 1e-15;

/// Tolerance on `var_plus * var_minus = 1` for a source to count as pure.
pub const PURITY_TOLERANCE: f64 = 1e-12;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NoiseId(u32);

impl NoiseId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NoiseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

/// Amplitude (`Plus`) or phase (`Minus`) quadrature.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrature {
    Plus,
    Minus,
}

impl Quadrature {
    pub const BOTH: [Quadrature; 2] = [Quadrature::Plus, Quadrature::Minus];

    pub fn conjugate(self) -> Self {
        match self {
            Quadrature::Plus => Quadrature::Minus,
            Quadrature::Minus => Quadrature::Plus,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Quadrature::Plus => "plus",
            Quadrature::Minus => "minus",
        }
    }
}

impl fmt::Display for Quadrature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// An independent Gaussian noise source with per-quadrature variances.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementaryNoise {
    pub id: NoiseId,
    pub var_plus: f64,
    pub var_minus: f64,
}

impl ElementaryNoise {
    pub fn variance(&self, q: Quadrature) -> f64 {
        match q {
            Quadrature::Plus => self.var_plus,
            Quadrature::Minus => self.var_minus,
        }
    }

    pub fn is_pure(&self) -> bool {
        (self.var_plus * self.var_minus - 1.0).abs() <= PURITY_TOLERANCE
    }

    pub fn is_vacuum(&self) -> bool {
        self.var_plus == 1.0 && self.var_minus == 1.0
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NoiseKey {
    pub source: NoiseId,
    pub quadrature: Quadrature,
}

impl NoiseKey {
    pub fn new(source: NoiseId, quadrature: Quadrature) -> Self {
        Self { source, quadrature }
    }
}

/// One quadrature of a field (or a photocurrent): `2α + Σ c·δn`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinearForm {
    alpha: f64,
    terms: BTreeMap<NoiseKey, f64>,
}

impl LinearForm {
    pub fn new(alpha: f64) -> Self {
        Self {
            alpha,
            terms: BTreeMap::new(),
        }
    }

    pub fn with_term(mut self, key: NoiseKey, coefficient: f64) -> Self {
        self.add_term(key, coefficient);
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn terms(&self) -> impl Iterator<Item = (&NoiseKey, &f64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, key: NoiseKey) -> f64 {
        self.terms.get(&key).copied().unwrap_or(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    fn add_term(&mut self, key: NoiseKey, coefficient: f64) {
        let entry = self.terms.entry(key).or_insert(0.0);
        *entry += coefficient;
        if entry.abs() < PRUNE_BELOW {
            self.terms.remove(&key);
        }
    }

    /// `self += c · other`, amplitude included.
    pub fn add_scaled(&mut self, other: &LinearForm, c: f64) {
        self.alpha += c * other.alpha;
        for (&key, &coef) in &other.terms {
            self.add_term(key, c * coef);
        }
    }

    pub fn scaled(&self, c: f64) -> LinearForm {
        let mut out = LinearForm::new(0.0);
        out.add_scaled(self, c);
        out
    }
}

/// An optical field: an amplitude-quadrature form and a phase-quadrature form.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinearField {
    plus: LinearForm,
    minus: LinearForm,
}

impl LinearField {
    pub fn from_forms(plus: LinearForm, minus: LinearForm) -> Self {
        Self { plus, minus }
    }

    /// The field of a single elementary source: `X± = δn±`.
    pub fn mode(id: NoiseId) -> Self {
        Self {
            plus: LinearForm::new(0.0).with_term(NoiseKey::new(id, Quadrature::Plus), 1.0),
            minus: LinearForm::new(0.0).with_term(NoiseKey::new(id, Quadrature::Minus), 1.0),
        }
    }

    pub fn with_amplitude(mut self, alpha_plus: f64, alpha_minus: f64) -> Self {
        self.plus.alpha = alpha_plus;
        self.minus.alpha = alpha_minus;
        self
    }

    pub fn quadrature(&self, q: Quadrature) -> &LinearForm {
        match q {
            Quadrature::Plus => &self.plus,
            Quadrature::Minus => &self.minus,
        }
    }

    pub fn alpha(&self, q: Quadrature) -> f64 {
        self.quadrature(q).alpha
    }

    /// Coherent amplitude `α = √(α⁺² + α⁻²)`.
    pub fn amplitude(&self) -> f64 {
        self.plus.alpha.hypot(self.minus.alpha)
    }

    pub fn sources(&self) -> BTreeSet<NoiseId> {
        self.plus
            .terms
            .keys()
            .chain(self.minus.terms.keys())
            .map(|k| k.source)
            .collect()
    }

    pub fn scaled(&self, c: f64) -> LinearField {
        LinearField {
            plus: self.plus.scaled(c),
            minus: self.minus.scaled(c),
        }
    }
}

/// How a term's quadratures feed the superposed field.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Routing {
    /// `plus ← plus`, `minus ← minus`.
    Direct,
    /// A quarter-wave rotation: `plus ← −minus`, `minus ← +plus`.
    QuarterTurn,
    /// Only the named quadrature contributes, to the same quadrature.
    Only(Quadrature),
}

#[derive(Copy, Clone, Debug)]
pub struct Term<'a> {
    pub coefficient: f64,
    pub field: &'a LinearField,
    pub routing: Routing,
}

impl<'a> Term<'a> {
    pub fn new(coefficient: f64, field: &'a LinearField, routing: Routing) -> Self {
        Self {
            coefficient,
            field,
            routing,
        }
    }

    pub fn direct(coefficient: f64, field: &'a LinearField) -> Self {
        Self::new(coefficient, field, Routing::Direct)
    }
}

/// Linear combination of fields with per-term quadrature routing.
pub fn superpose(terms: &[Term<'_>]) -> Result<LinearField> {
    let mut out = LinearField::default();
    for term in terms {
        check_finite("coefficient", term.coefficient)?;
        let c = term.coefficient;
        let f = term.field;
        match term.routing {
            Routing::Direct => {
                out.plus.add_scaled(&f.plus, c);
                out.minus.add_scaled(&f.minus, c);
            }
            Routing::QuarterTurn => {
                out.plus.add_scaled(&f.minus, -c);
                out.minus.add_scaled(&f.plus, c);
            }
            Routing::Only(Quadrature::Plus) => out.plus.add_scaled(&f.plus, c),
            Routing::Only(Quadrature::Minus) => out.minus.add_scaled(&f.minus, c),
        }
    }
    Ok(out)
}

/// Relative phase between the two beamsplitter inputs.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BeamsplitterPhase {
    InPhase,
    /// π/2: the second input enters quarter-turned.
    Quadrature,
}

/// Two-port beamsplitter with intensity transmittance `t`.
///
/// In phase: `out1 = √t·a + √r·b`, `out2 = √r·a − √t·b`.
///
/// With a π/2 relative phase the second port is quarter-turned, giving
/// `out1⁺ = √t·a⁺ − √r·b⁻`, `out1⁻ = √t·a⁻ + √r·b⁺`,
/// `out2⁺ = √r·a⁺ + √t·b⁻`, `out2⁻ = √r·a⁻ − √t·b⁺`.
pub fn beamsplitter(
    a: &LinearField,
    b: &LinearField,
    transmittance: f64,
    phase: BeamsplitterPhase,
) -> Result<(LinearField, LinearField)> {
    check_unit_interval("transmittance", transmittance)?;
    let t = transmittance.sqrt();
    let r = (1.0 - transmittance).sqrt();
    let routing = match phase {
        BeamsplitterPhase::InPhase => Routing::Direct,
        BeamsplitterPhase::Quadrature => Routing::QuarterTurn,
    };
    let out1 = superpose(&[Term::direct(t, a), Term::new(r, b, routing)])?;
    let out2 = superpose(&[Term::direct(r, a), Term::new(-t, b, routing)])?;
    Ok((out1, out2))
}

/// Even split with the π/2 convention used to make quadrature entanglement.
pub fn balanced_quadrature_split(
    a: &LinearField,
    b: &LinearField,
) -> Result<(LinearField, LinearField)> {
    beamsplitter(a, b, 0.5, BeamsplitterPhase::Quadrature)
}

/// Registry of elementary noise sources. Append-only.
#[derive(Clone, Debug, Default)]
pub struct NoiseLedger {
    sources: Vec<ElementaryNoise>,
}

impl NoiseLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, var_plus: f64, var_minus: f64) -> Result<NoiseId> {
        for (name, v) in [("var_plus", var_plus), ("var_minus", var_minus)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "noise variances must be finite and positive",
                });
            }
        }
        let id = NoiseId(self.sources.len() as u32);
        self.sources.push(ElementaryNoise {
            id,
            var_plus,
            var_minus,
        });
        Ok(id)
    }

    pub fn vacuum(&mut self) -> NoiseId {
        self.register(1.0, 1.0).expect("vacuum variances are valid")
    }

    pub fn vacuum_field(&mut self) -> LinearField {
        LinearField::mode(self.vacuum())
    }

    pub fn source(&self, id: NoiseId) -> Result<&ElementaryNoise> {
        self.sources
            .get(id.index())
            .ok_or(Error::UnregisteredNoise(id))
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }

    fn key_variance(&self, key: NoiseKey) -> Result<f64> {
        Ok(self.source(key.source)?.variance(key.quadrature))
    }

    pub fn form_variance(&self, form: &LinearForm) -> Result<f64> {
        form.terms()
            .map(|(&k, &c)| Ok(c * c * self.key_variance(k)?))
            .sum()
    }

    pub fn form_covariance(&self, a: &LinearForm, b: &LinearForm) -> Result<f64> {
        // validate both supports so disjoint forms still report bad ids
        for (&k, _) in a.terms().chain(b.terms()) {
            self.source(k.source)?;
        }
        let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
        small
            .terms()
            .filter_map(|(&k, &c)| large.terms.get(&k).map(|&d| (k, c * d)))
            .map(|(k, cd)| Ok(cd * self.key_variance(k)?))
            .sum()
    }

    pub fn variance(&self, field: &LinearField, q: Quadrature) -> Result<f64> {
        self.form_variance(field.quadrature(q))
    }

    pub fn covariance(
        &self,
        a: &LinearField,
        qa: Quadrature,
        b: &LinearField,
        qb: Quadrature,
    ) -> Result<f64> {
        self.form_covariance(a.quadrature(qa), b.quadrature(qb))
    }

    /// `Var(target) − Cov(target, given)² / Var(given)` in quadrature `q`.
    pub fn conditional_variance(
        &self,
        target: &LinearField,
        given: &LinearField,
        q: Quadrature,
    ) -> Result<f64> {
        let vg = self.variance(given, q)?;
        if vg <= 0.0 {
            return Err(Error::ZeroConditioningVariance);
        }
        let vt = self.variance(target, q)?;
        let c = self.covariance(target, q, given, q)?;
        Ok((vt - c * c / vg).max(0.0))
    }

    /// Vacuum-admixture loss: `√η·f + √(1−η)·v` with a fresh vacuum `v`.
    pub fn apply_loss(&mut self, field: &LinearField, efficiency: f64) -> Result<LinearField> {
        check_unit_interval("efficiency", efficiency)?;
        if efficiency == 1.0 {
            return Ok(field.clone());
        }
        let vacuum = self.vacuum_field();
        superpose(&[
            Term::direct(efficiency.sqrt(), field),
            Term::direct((1.0 - efficiency).sqrt(), &vacuum),
        ])
    }
}

/// `1/√2`, re-exported for protocol builders.
pub const INV_SQRT2: f64 = FRAC_1_SQRT_2;
