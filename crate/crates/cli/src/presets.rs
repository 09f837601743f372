//! Named scenarios with their default grids and columns.

use std::f64::consts::FRAC_1_SQRT_2;

use cvtele_core::feasibility::reference_model;
use cvtele_core::spectra::default_pipeline_config;
use cvtele_core::teleporter::{EveSite, Gains, ProtocolConfig, SqueezerSpec};

use crate::config::{parse_scenario, Scenario};
use crate::eval::{parse_columns, Column};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Kind {
    Teleport,
    Sweep,
    TvMap,
    Swap,
    Pipeline,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Teleport => "teleport",
            Kind::Sweep => "sweep",
            Kind::TvMap => "tvmap",
            Kind::Swap => "swap",
            Kind::Pipeline => "pipeline",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub kind: Kind,
    pub summary: &'static str,
    pub scenario: Scenario,
    pub grid: Vec<String>,
    pub columns: Vec<Column>,
    /// Single-quadrature modulation with the phase gain left unverified.
    pub loophole: bool,
}

pub const NAMES: &[&str] = &[
    "classical-unity",
    "paper-resource",
    "fig3",
    "fig5",
    "fig6",
    "fig7",
    "fig8",
    "eve-bob-50",
    "eve-alice-50",
    "unity-locus",
    "default",
    "drifting-gain",
    "loophole",
];

const TV_VAR_SQZ: &str = "resource.var_sqz=0.01:1:40:log";
const TV_GAIN: &str = "gains.g=0:3:61";

fn pure(s: f64) -> SqueezerSpec {
    SqueezerSpec::pure(s).expect("preset squeezing is valid")
}

fn ideal(s: f64) -> Scenario {
    Scenario::new(ProtocolConfig::ideal(pure(s), Gains::unity()))
}

fn cols(list: &str) -> Vec<Column> {
    parse_columns(list).expect("preset columns are valid")
}

fn grid(axes: &[&str]) -> Vec<String> {
    axes.iter().map(|s| s.to_string()).collect()
}

pub fn bundled_config(name: &str) -> Option<&'static str> {
    match name {
        "classical-unity" => Some(include_str!("../data/classical_unity.cfg")),
        "paper-resource" => Some(include_str!("../data/paper_resource.cfg")),
        _ => None,
    }
}

pub fn preset(name: &str) -> Option<Preset> {
    let tv = cols("t_q,v_q,m,fidelity");
    let p = match name {
        "classical-unity" | "paper-resource" => Preset {
            name: if name == "classical-unity" { "classical-unity" } else { "paper-resource" },
            kind: Kind::Teleport,
            summary: "bundled scenario file",
            scenario: parse_scenario(bundled_config(name)?).expect("bundled config parses"),
            grid: Vec::new(),
            columns: tv,
            loophole: false,
        },
        "fig3" => Preset {
            name: "fig3",
            kind: Kind::Sweep,
            summary: "fidelity against input amplitude for gains around unity, 3 dB pure resource",
            scenario: ideal(0.5),
            grid: grid(&["gains.g=0.9,0.95,0.98,1,1.02,1.05,1.1", "input.alpha=0:30:151"]),
            columns: cols("fidelity"),
            loophole: false,
        },
        "fig5" => Preset {
            name: "fig5",
            kind: Kind::Sweep,
            summary: "M against gain for pure resources of several strengths",
            scenario: ideal(1.0),
            grid: grid(&["resource.var_sqz=0.9,0.5,0.25,0.125", "gains.g=0:3:301"]),
            columns: cols("m,m_min"),
            loophole: false,
        },
        "fig6" => Preset {
            name: "fig6",
            kind: Kind::Sweep,
            summary: "fidelity against gain for several input amplitudes, var_sqz = 0.125",
            scenario: ideal(0.125),
            grid: grid(&["input.alpha=0,1,2,5,10", "gains.g=0:3:301"]),
            columns: cols("fidelity,m"),
            loophole: false,
        },
        "fig7" => Preset {
            name: "fig7",
            kind: Kind::TvMap,
            summary: "T-V map with fidelity at input amplitudes 0, 2, 5 and 15",
            scenario: ideal(1.0),
            grid: grid(&["input.alpha=0,2,5,15", TV_VAR_SQZ, TV_GAIN]),
            columns: tv,
            loophole: false,
        },
        "fig8" => Preset {
            name: "fig8",
            kind: Kind::Swap,
            summary: "swapped inseparability against gain for two input pairs",
            scenario: Scenario {
                swap_input: Some(pure(0.5)),
                ..ideal(0.5)
            },
            grid: grid(&["resource.var_sqz=0.5,0.25,0.125", "swap.input_var_sqz=0.5,0.1", "gains.g=0:3:301"]),
            columns: cols("i_initial,i_final,k_opt"),
            loophole: false,
        },
        "eve-bob-50" | "eve-alice-50" => {
            let site = if name == "eve-bob-50" { EveSite::BobArm } else { EveSite::AliceArm };
            let mut sc = ideal(1.0);
            sc.protocol = sc.protocol.with_tap(site, 0.5);
            Preset {
                name: if site == EveSite::BobArm { "eve-bob-50" } else { "eve-alice-50" },
                kind: Kind::TvMap,
                summary: "T-V map with half of one entangled beam tapped",
                scenario: sc,
                grid: grid(&["resource.var_sqz=0.01:1:50:log", "gains.g=0:3:50"]),
                columns: cols("t_q,v_q,eve_t_q,eve_v_q"),
                loophole: false,
            }
        }
        "unity-locus" => Preset {
            name: "unity-locus",
            kind: Kind::TvMap,
            summary: "(T_q, V_q) at unity gain against squeezing, reference mixedness and detectors",
            scenario: Scenario::new(reference_model()),
            grid: grid(&["resource.var_sqz=0.001:1:61:log", "gains.g=1"]),
            columns: tv,
            loophole: false,
        },
        "default" => Preset {
            name: "default",
            kind: Kind::Pipeline,
            summary: "synthetic runs with the reference resource and detectors",
            scenario: Scenario::new(default_pipeline_config()),
            grid: Vec::new(),
            columns: Vec::new(),
            loophole: false,
        },
        "drifting-gain" => {
            let a = 5.0 * FRAC_1_SQRT_2;
            Preset {
                name: "drifting-gain",
                kind: Kind::Pipeline,
                summary: "runs whose gains drift with standard deviation 0.05",
                scenario: Scenario {
                    gain_drift: 0.05,
                    ..Scenario::new(default_pipeline_config().with_input_alpha(a, a))
                },
                grid: Vec::new(),
                columns: Vec::new(),
                loophole: false,
            }
        }
        "loophole" => Preset {
            name: "loophole",
            kind: Kind::Pipeline,
            summary: "amplitude-only modulation with the phase gain tuned for low noise",
            scenario: Scenario::new(default_pipeline_config().with_input_alpha(5.0, 0.0)),
            grid: Vec::new(),
            columns: Vec::new(),
            loophole: true,
        },
        _ => return None,
    };
    Some(p)
}
