//! Bounds on `V_q` and `𝓜`, and the gain range over which `𝓜 < 1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use super::measure;
use crate::optimize::{golden_section, grid_roots, logspace};
use crate::teleporter::{teleport_assembled, Gains, ProtocolConfig, SqueezerSpec};

/// `𝓜_min = (g⁺g⁻ − 1)²/(|g⁺g⁻| + 1)²`, the floor set by the output
/// uncertainty relation.
pub fn m_min(gains: Gains) -> f64 {
    let p = gains.product();
    (p - 1.0).powi(2) / (p.abs() + 1.0).powi(2)
}

/// Gain extrema `(g_min, g_max)` between which a teleporter built on
/// `squeezer` reaches `𝓜 < 1`: `r ∓ √(r² − 1)` with
/// `r = (a − s)/(a + s − 2)`.
pub fn m_gain_bandwidth(squeezer: SqueezerSpec) -> Result<(f64, f64)> {
    squeezer.validate()?;
    let (s, a) = (squeezer.var_sqz, squeezer.var_anti);
    let denom = a + s - 2.0;
    if denom <= 0.0 {
        return Err(Error::DegenerateResource(format!(
            "var_sqz + var_anti = {} <= 2 leaves no band with M < 1",
            a + s
        )));
    }
    let r = (a - s) / denom;
    if r < 1.0 {
        return Err(Error::DegenerateResource(format!(
            "r = {r} < 1: the band edges are not real"
        )));
    }
    let w = (r * r - 1.0).sqrt();
    Ok((r - w, r + w))
}

/// `𝓜 < 1` gain band of the full assembled protocol, found by bracketing
/// `𝓜(g) = 1` on a log grid and bisecting. Gains are applied symmetrically.
pub fn m_band_numeric(template: &ProtocolConfig) -> Result<(f64, f64)> {
    template.validate()?;
    let excess = |g: f64| {
        teleport_assembled(&template.with_gains(Gains::symmetric(g)))
            .and_then(|r| measure(&r))
            .map(|rep| rep.m - 1.0)
            .unwrap_or(f64::NAN)
    };
    let roots = grid_roots(excess, &logspace(1e-3, 1e3, 241), 1e-12)?;
    match roots.as_slice() {
        [lo, .., hi] if excess((lo * hi).sqrt()) < -1e-9 => Ok((*lo, *hi)),
        _ => Err(Error::DegenerateResource(format!(
            "found {} crossing(s) of M = 1",
            roots.len()
        ))),
    }
}

#[derive(Copy, Clone, Debug)]
pub struct VqBoundOptions {
    pub restarts: usize,
    pub seed: u64,
    pub max_sweeps: usize,
    /// Relative change in `V_q` per sweep below which a restart is done.
    pub tolerance: f64,
}

impl Default for VqBoundOptions {
    fn default() -> Self {
        Self {
            restarts: 200,
            seed: 0x5eed_0f_c1a5,
            max_sweeps: 4000,
            tolerance: 1e-14,
        }
    }
}

const LOG_BOX: f64 = 40.0;

/// Separable noise allocation, in log coordinates:
/// `[ln N_A⁺, ln N_A⁻, ln N_B⁺, ln Λ⁺]` with `Λ⁻ = 1`.
type Point = [f64; 4];

/// Projects onto the feasible set and evaluates
/// `V_q = (Υ⁺²N_A⁺ + N_B⁺)(Υ⁻²N_A⁻ + N_B⁻)` with `Υ± = g±/Λ±`,
/// `N_A⁺N_A⁻ ≥ (Λ⁺Λ⁻)²` and `N_B⁺N_B⁻ = 1`.
fn separable_vq(gains: Gains, p: &Point) -> f64 {
    let [u, w, b, l] = *p;
    let w = w.max(2.0 * l - u);
    let ups_plus = gains.g_plus * (-l).exp();
    let ups_minus = gains.g_minus;
    (ups_plus * ups_plus * u.exp() + b.exp()) * (ups_minus * ups_minus * w.exp() + (-b).exp())
}

/// Smallest `V_q` attainable without entanglement at the given gains,
/// found numerically over separable noise allocations.
pub fn classical_vq_bound(gains: Gains) -> Result<f64> {
    classical_vq_bound_with(gains, VqBoundOptions::default())
}

pub fn classical_vq_bound_with(gains: Gains, opts: VqBoundOptions) -> Result<f64> {
    Gains::new(gains.g_plus, gains.g_minus)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<(f64, Point)> = None;
    let mut converged = 0usize;
    let mut last_dump = String::new();
    for _ in 0..opts.restarts.max(1) {
        let mut p: Point = [0.0; 4];
        for c in p.iter_mut() {
            *c = rng.random_range(-10.0..10.0);
        }
        let mut value = separable_vq(gains, &p);
        let mut done = false;
        for _ in 0..opts.max_sweeps {
            let before = value;
            for i in 0..4 {
                let m = golden_section(
                    |t| {
                        let mut q = p;
                        q[i] = t;
                        separable_vq(gains, &q)
                    },
                    -LOG_BOX,
                    LOG_BOX,
                    1e-11,
                )?;
                if m.value < value {
                    p[i] = m.x;
                    value = m.value;
                }
            }
            if before - value <= opts.tolerance * value.abs().max(1e-300) {
                done = true;
                break;
            }
        }
        if done {
            converged += 1;
        } else {
            last_dump = format!("{p:?} -> {value}");
        }
        if best.is_none_or(|(v, _)| value < v) {
            best = Some((value, p));
        }
    }
    match best {
        Some((v, _)) if converged > 0 => Ok(v),
        Some((v, p)) => Err(Error::NoConvergence(format!(
            "classical V_q bound at gains ({}, {}): no restart converged; best {p:?} -> {v}; last {last_dump}",
            gains.g_plus, gains.g_minus
        ))),
        None => Err(Error::NoConvergence("no restarts were run".into())),
    }
}
