//! Parameter grids.
//!
//! An axis is `path=start:stop:count` (linear), `path=start:stop:count:log`,
//! or `path=a,b,c`. Several axes form a cartesian product with the first
//! axis varying slowest.

use std::f64::consts::FRAC_1_SQRT_2;

use cvtele_core::optimize::{linspace, logspace};
use cvtele_core::teleporter::SqueezerSpec;

use crate::config::Scenario;
use crate::CliError;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Param {
    /// Both squeezers; keeps each one's mixedness.
    ResourceVarSqz,
    ResourceVarAnti,
    Squeezer1VarSqz,
    Squeezer1VarAnti,
    Squeezer2VarSqz,
    Squeezer2VarAnti,
    Gain,
    GainPlus,
    GainMinus,
    /// Split equally between quadratures.
    Alpha,
    AlphaPlus,
    AlphaMinus,
    VictorLoss,
    BobEfficiency,
    DarkNoise,
    EveFraction,
    /// Keeps the swap input's mixedness; pure if none was configured.
    SwapInputVarSqz,
}

const PATHS: &[(&str, Param)] = &[
    ("resource.var_sqz", Param::ResourceVarSqz),
    ("resource.var_anti", Param::ResourceVarAnti),
    ("squeezer_1.var_sqz", Param::Squeezer1VarSqz),
    ("squeezer_1.var_anti", Param::Squeezer1VarAnti),
    ("squeezer_2.var_sqz", Param::Squeezer2VarSqz),
    ("squeezer_2.var_anti", Param::Squeezer2VarAnti),
    ("gains.g", Param::Gain),
    ("gains.g_plus", Param::GainPlus),
    ("gains.g_minus", Param::GainMinus),
    ("input.alpha", Param::Alpha),
    ("input.alpha_plus", Param::AlphaPlus),
    ("input.alpha_minus", Param::AlphaMinus),
    ("losses.victor_loss", Param::VictorLoss),
    ("losses.bob_efficiency", Param::BobEfficiency),
    ("losses.dark_noise", Param::DarkNoise),
    ("eve.fraction", Param::EveFraction),
    ("swap.input_var_sqz", Param::SwapInputVarSqz),
];

impl Param {
    pub fn parse(path: &str) -> Result<Self, CliError> {
        PATHS
            .iter()
            .find(|(p, _)| *p == path)
            .map(|&(_, q)| q)
            .ok_or_else(|| {
                let known: Vec<&str> = PATHS.iter().map(|(p, _)| *p).collect();
                CliError::Usage(format!("unknown parameter path {path:?}; known: {}", known.join(", ")))
            })
    }

    pub fn path(self) -> &'static str {
        PATHS.iter().find(|(_, q)| *q == self).map(|(p, _)| *p).expect("every param has a path")
    }

    pub fn unit(self) -> &'static str {
        use Param::*;
        match self {
            ResourceVarSqz | ResourceVarAnti | Squeezer1VarSqz | Squeezer1VarAnti | Squeezer2VarSqz
            | Squeezer2VarAnti | DarkNoise | SwapInputVarSqz => "snu",
            _ => "1",
        }
    }

    /// Writes `value` into the scenario. Validation happens on evaluation.
    pub fn apply(self, sc: &mut Scenario, value: f64) {
        use Param::*;
        let p = &mut sc.protocol;
        let keep_k = |s: &mut SqueezerSpec| {
            let k = s.mixedness();
            s.var_sqz = value;
            s.var_anti = k / value;
        };
        match self {
            ResourceVarSqz => {
                keep_k(&mut p.squeezer_1);
                keep_k(&mut p.squeezer_2);
            }
            ResourceVarAnti => {
                p.squeezer_1.var_anti = value;
                p.squeezer_2.var_anti = value;
            }
            Squeezer1VarSqz => keep_k(&mut p.squeezer_1),
            Squeezer1VarAnti => p.squeezer_1.var_anti = value,
            Squeezer2VarSqz => keep_k(&mut p.squeezer_2),
            Squeezer2VarAnti => p.squeezer_2.var_anti = value,
            Gain => {
                p.gains.g_plus = value;
                p.gains.g_minus = value;
            }
            GainPlus => p.gains.g_plus = value,
            GainMinus => p.gains.g_minus = value,
            Alpha => p.input_alpha = (value * FRAC_1_SQRT_2, value * FRAC_1_SQRT_2),
            AlphaPlus => p.input_alpha.0 = value,
            AlphaMinus => p.input_alpha.1 = value,
            VictorLoss => p.victor_loss = value,
            BobEfficiency => p.bob_efficiency = value,
            DarkNoise => p.dark_noise = value,
            EveFraction => p.eve_tap_fraction = value,
            SwapInputVarSqz => {
                let mut s = sc.swap_input.unwrap_or_else(SqueezerSpec::vacuum);
                keep_k(&mut s);
                sc.swap_input = Some(s);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub param: Param,
    pub values: Vec<f64>,
}

fn number(s: &str, axis: &str) -> Result<f64, CliError> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::Usage(format!("{axis}: {s:?} is not a finite number")))
}

impl Axis {
    pub fn parse(spec: &str) -> Result<Self, CliError> {
        let (path, range) = spec
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("grid axis {spec:?}: expected path=range")))?;
        let param = Param::parse(path.trim())?;
        let parts: Vec<&str> = range.split(':').collect();
        let values = match parts.as_slice() {
            [list] => list
                .split(',')
                .map(|v| number(v, spec))
                .collect::<Result<Vec<_>, _>>()?,
            [start, stop, count, rest @ ..] => {
                let (a, b) = (number(start, spec)?, number(stop, spec)?);
                let n: usize = count
                    .trim()
                    .parse()
                    .map_err(|_| CliError::Usage(format!("{spec}: count {count:?} is not an integer")))?;
                if n < 2 {
                    return Err(CliError::Usage(format!("{spec}: count must be at least 2")));
                }
                match rest {
                    [] | ["lin"] => linspace(a, b, n),
                    ["log"] => {
                        if !(a > 0.0 && b > 0.0) {
                            return Err(CliError::Usage(format!("{spec}: log range needs positive ends")));
                        }
                        logspace(a, b, n)
                    }
                    _ => return Err(CliError::Usage(format!("{spec}: expected lin or log after count"))),
                }
            }
            _ => return Err(CliError::Usage(format!("grid axis {spec:?}: expected start:stop:count[:log] or a list"))),
        };
        Ok(Self { param, values })
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Grid {
    pub axes: Vec<Axis>,
}

impl Grid {
    pub fn parse(specs: &[String]) -> Result<Self, CliError> {
        let axes = specs.iter().map(|s| Axis::parse(s)).collect::<Result<Vec<_>, _>>()?;
        for (i, a) in axes.iter().enumerate() {
            if axes[..i].iter().any(|b| b.param == a.param) {
                return Err(CliError::Usage(format!("grid axis {} given twice", a.param.path())));
            }
        }
        Ok(Self { axes })
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Axis values of every point, first axis slowest.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::with_capacity(self.axes.len())];
        for axis in &self.axes {
            out = out
                .into_iter()
                .flat_map(|p| {
                    axis.values.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        out
    }

    pub fn scenario_at(&self, base: &Scenario, point: &[f64]) -> Scenario {
        let mut sc = base.clone();
        for (axis, &v) in self.axes.iter().zip(point) {
            axis.param.apply(&mut sc, v);
        }
        sc
    }
}
