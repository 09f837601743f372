//! Product-form inseparability `𝓘` with optimized weighting `k`, the EPR
//! paradox product `𝓔`, and the unit-weight sum used at unity gain.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{LinearField, NoiseLedger, Quadrature};
use crate::optimize::bracketed_minimum;

/// Coarse grid size and golden-section tolerance for the `ln k` search.
const K_GRID: usize = 64;
const K_TOL: f64 = 1e-8;
pub(crate) const LOG_K_RANGE: f64 = 4.0;

/// Second moments of a two-beam state, per quadrature `(plus, minus)`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairMoments {
    pub var_x: (f64, f64),
    pub var_y: (f64, f64),
    pub cov: (f64, f64),
}

impl PairMoments {
    pub fn from_fields(ledger: &NoiseLedger, x: &LinearField, y: &LinearField) -> Result<Self> {
        use Quadrature::{Minus, Plus};
        Ok(Self {
            var_x: (ledger.variance(x, Plus)?, ledger.variance(x, Minus)?),
            var_y: (ledger.variance(y, Plus)?, ledger.variance(y, Minus)?),
            cov: (
                ledger.covariance(x, Plus, y, Plus)?,
                ledger.covariance(x, Minus, y, Minus)?,
            ),
        })
    }

    /// `⟨(k·δx + σ·δy/k)²⟩` for one quadrature.
    fn combination(var_x: f64, var_y: f64, cov: f64, sign: f64, k: f64) -> f64 {
        (k * k * var_x + var_y / (k * k) + 2.0 * sign * cov).max(0.0)
    }

    fn combos(&self, signs: (f64, f64), k: f64) -> (f64, f64) {
        (
            Self::combination(self.var_x.0, self.var_y.0, self.cov.0, signs.0, k),
            Self::combination(self.var_x.1, self.var_y.1, self.cov.1, signs.1, k),
        )
    }

    /// Product form at weighting `k` for a given sign pairing.
    pub fn product_form(&self, signs: (f64, f64), k: f64) -> f64 {
        let (a, b) = self.combos(signs, k);
        (a * b).sqrt() / (k * k + 1.0 / (k * k))
    }

    fn conditional(var_x: f64, var_y: f64, cov: f64) -> f64 {
        (var_x - cov * cov / var_y).max(0.0)
    }
}

/// The two sign pairings: sum on amplitude with difference on phase, and the
/// reverse.
const PAIRINGS: [(f64, f64); 2] = [(1.0, -1.0), (-1.0, 1.0)];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InseparabilityReport {
    /// `𝓘` at the optimal weighting; below 1 means inseparable.
    pub i_value: f64,
    pub k_opt: f64,
    /// Product form at `k = 1` for the same pairing.
    pub i_unit_k: f64,
    /// `⟨(δx⁺ ± δy⁺)²⟩ + ⟨(δx⁻ ∓ δy⁻)²⟩`; inseparable when below 4.
    pub tan_sum: f64,
    /// `𝓔 = Δ²X⁺_x|y · Δ²X⁻_x|y`.
    pub epr_product: f64,
    /// `K` of the generating resource, when known.
    pub mixedness: Option<f64>,
    /// Sign pairing kept, `(plus, minus)`.
    pub signs: (f64, f64),
}

pub fn inseparability_from_moments(m: &PairMoments) -> Result<InseparabilityReport> {
    for v in [m.var_x.0, m.var_x.1, m.var_y.0, m.var_y.1] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidParameter {
                name: "variance",
                value: v,
                reason: "inseparability needs positive variances on both beams",
            });
        }
    }
    let mut best: Option<(f64, f64, (f64, f64))> = None;
    for signs in PAIRINGS {
        let f = |lk: f64| m.product_form(signs, lk.exp());
        let coarse = bracketed_minimum(f, -LOG_K_RANGE, LOG_K_RANGE, K_GRID, K_TOL)?;
        // unit weighting is the conventional choice; never report worse
        let (lk, v) = if f(0.0) <= coarse.value {
            (0.0, f(0.0))
        } else {
            (coarse.x, coarse.value)
        };
        if best.is_none_or(|(bv, _, _)| v < bv) {
            best = Some((v, lk, signs));
        }
    }
    let (i_value, lk, signs) = best.expect("two pairings evaluated");
    let (a, b) = m.combos(signs, 1.0);
    let epr_product = PairMoments::conditional(m.var_x.0, m.var_y.0, m.cov.0)
        * PairMoments::conditional(m.var_x.1, m.var_y.1, m.cov.1);
    Ok(InseparabilityReport {
        i_value,
        k_opt: lk.exp(),
        i_unit_k: m.product_form(signs, 1.0),
        tan_sum: a + b,
        epr_product,
        mixedness: None,
        signs,
    })
}

/// Degree of inseparability between beams `x` and `y`.
pub fn inseparability(ledger: &NoiseLedger, x: &LinearField, y: &LinearField) -> Result<InseparabilityReport> {
    inseparability_from_moments(&PairMoments::from_fields(ledger, x, y)?)
}

/// As [`inseparability`], recording the resource mixedness `K`.
pub fn inseparability_with_mixedness(
    ledger: &NoiseLedger,
    x: &LinearField,
    y: &LinearField,
    mixedness: f64,
) -> Result<InseparabilityReport> {
    let mut r = inseparability(ledger, x, y)?;
    r.mixedness = Some(mixedness);
    Ok(r)
}
