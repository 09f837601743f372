//! Row evaluation for sweeps and maps.

use std::io::Write;

use rayon::prelude::*;

use cvtele_core::measures::{measure, measure_eve, m_min, MeasureReport};
use cvtele_core::swapping::{swap_run, SwapConfig, SwapOutcome};
use cvtele_core::teleporter::{teleport_assembled, teleport_closed_form, EveSite};

use crate::config::Scenario;
use crate::grid::Grid;
use crate::CliError;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Column {
    TPlus,
    TMinus,
    TQ,
    VPlus,
    VMinus,
    VQ,
    M,
    MMin,
    Fidelity,
    VarOutPlus,
    VarOutMinus,
    GainPlus,
    GainMinus,
    EveTQ,
    EveVQ,
    EveM,
    IInitial,
    IFinal,
    KOpt,
    IUnitK,
}

const COLUMNS: &[(&str, Column, &str)] = &[
    ("t_plus", Column::TPlus, "1"),
    ("t_minus", Column::TMinus, "1"),
    ("t_q", Column::TQ, "1"),
    ("v_plus", Column::VPlus, "snu"),
    ("v_minus", Column::VMinus, "snu"),
    ("v_q", Column::VQ, "snu^2"),
    ("m", Column::M, "1"),
    ("m_min", Column::MMin, "1"),
    ("fidelity", Column::Fidelity, "1"),
    ("var_out_plus", Column::VarOutPlus, "snu"),
    ("var_out_minus", Column::VarOutMinus, "snu"),
    ("gain_plus", Column::GainPlus, "1"),
    ("gain_minus", Column::GainMinus, "1"),
    ("eve_t_q", Column::EveTQ, "1"),
    ("eve_v_q", Column::EveVQ, "snu^2"),
    ("eve_m", Column::EveM, "1"),
    ("i_initial", Column::IInitial, "1"),
    ("i_final", Column::IFinal, "1"),
    ("k_opt", Column::KOpt, "1"),
    ("i_unit_k", Column::IUnitK, "1"),
];

impl Column {
    fn entry(self) -> &'static (&'static str, Column, &'static str) {
        COLUMNS.iter().find(|c| c.1 == self).expect("every column is listed")
    }

    pub fn name(self) -> &'static str {
        self.entry().0
    }

    pub fn unit(self) -> &'static str {
        self.entry().2
    }

    fn needs_eve(self) -> bool {
        matches!(self, Column::EveTQ | Column::EveVQ | Column::EveM)
    }

    fn needs_swap(self) -> bool {
        matches!(self, Column::IInitial | Column::IFinal | Column::KOpt | Column::IUnitK)
    }
}

pub fn parse_columns(list: &str) -> Result<Vec<Column>, CliError> {
    list.split(',')
        .map(str::trim)
        .map(|name| {
            COLUMNS.iter().find(|c| c.0 == name).map(|c| c.1).ok_or_else(|| {
                let known: Vec<&str> = COLUMNS.iter().map(|c| c.0).collect();
                CliError::Usage(format!("unknown column {name:?}; known: {}", known.join(", ")))
            })
        })
        .collect()
}

struct Evaluated {
    bob: Option<MeasureReport>,
    eve: Option<MeasureReport>,
    swap: Option<SwapOutcome>,
}

fn model(e: cvtele_core::Error) -> CliError {
    CliError::Model(e.to_string())
}

/// Bob's report: the closed form without a tap, the assembled protocol with one.
pub fn bob_report(sc: &Scenario) -> Result<MeasureReport, CliError> {
    let r = if sc.protocol.eve_tap_site == EveSite::None {
        teleport_closed_form(&sc.protocol)
    } else {
        teleport_assembled(&sc.protocol)
    }
    .map_err(model)?;
    measure(&r).map_err(model)
}

pub fn swap_config(sc: &Scenario) -> Result<SwapConfig, CliError> {
    let p = &sc.protocol;
    let input = sc
        .swap_input
        .ok_or_else(|| CliError::Config("swap columns need a [swap.input] squeezer".into()))?;
    if p.squeezer_1 != p.squeezer_2 || p.gains.g_plus != p.gains.g_minus {
        return Err(CliError::Config(
            "swapping needs a symmetric teleporter resource and symmetric gains".into(),
        ));
    }
    SwapConfig::new(p.squeezer_1, input, p.gains.g_plus).map_err(|e| CliError::Config(e.to_string()))
}

fn evaluate(sc: &Scenario, columns: &[Column]) -> Result<Evaluated, CliError> {
    sc.validate()?;
    let wants_bob = columns.iter().any(|c| !c.needs_eve() && !c.needs_swap());
    let bob = wants_bob.then(|| bob_report(sc)).transpose()?;
    let eve = if columns.iter().any(|c| c.needs_eve()) {
        if sc.protocol.eve_tap_site == EveSite::None {
            return Err(CliError::Config("eve columns need an [eve] tap".into()));
        }
        let r = teleport_assembled(&sc.protocol).map_err(model)?;
        Some(measure_eve(&r).map_err(model)?)
    } else {
        None
    };
    let swap = if columns.iter().any(|c| c.needs_swap()) {
        Some(swap_run(&swap_config(sc)?).map_err(model)?)
    } else {
        None
    };
    Ok(Evaluated { bob, eve, swap })
}

fn value(ev: &Evaluated, c: Column) -> f64 {
    let b = || ev.bob.as_ref().expect("bob evaluated");
    let e = || ev.eve.as_ref().expect("eve evaluated");
    let s = || ev.swap.as_ref().expect("swap evaluated");
    match c {
        Column::TPlus => b().t_plus,
        Column::TMinus => b().t_minus,
        Column::TQ => b().t_q,
        Column::VPlus => b().v_plus,
        Column::VMinus => b().v_minus,
        Column::VQ => b().v_q,
        Column::M => b().m,
        Column::MMin => m_min(b().gains),
        Column::Fidelity => b().fidelity.unwrap_or(f64::NAN),
        Column::VarOutPlus => b().out_variances.0,
        Column::VarOutMinus => b().out_variances.1,
        Column::GainPlus => b().gains.g_plus,
        Column::GainMinus => b().gains.g_minus,
        Column::EveTQ => e().t_q,
        Column::EveVQ => e().v_q,
        Column::EveM => e().m,
        Column::IInitial => s().i_initial,
        Column::IFinal => s().i_final,
        Column::KOpt => s().k_opt,
        Column::IUnitK => s().after.i_unit_k,
    }
}

/// Evaluates every grid point in parallel; rows come back in grid order.
pub fn evaluate_grid(base: &Scenario, grid: &Grid, columns: &[Column]) -> Result<Vec<Vec<f64>>, CliError> {
    grid.points()
        .into_par_iter()
        .map(|point| {
            let sc = grid.scenario_at(base, &point);
            let ev = evaluate(&sc, columns).map_err(|err| {
                let at: Vec<String> = grid
                    .axes
                    .iter()
                    .zip(&point)
                    .map(|(a, v)| format!("{}={v}", a.param.path()))
                    .collect();
                err.with_context(&format!("at {}", at.join(", ")))
            })?;
            let mut row = point;
            row.extend(columns.iter().map(|&c| value(&ev, c)));
            Ok(row)
        })
        .collect()
}

pub fn header(grid: &Grid, columns: &[Column]) -> Vec<String> {
    grid.axes
        .iter()
        .map(|a| format!("{}[{}]", a.param.path(), a.param.unit()))
        .chain(columns.iter().map(|c| format!("{}[{}]", c.name(), c.unit())))
        .collect()
}

/// Plain `f64` display gives the shortest round-tripping text, so output is
/// byte-stable for identical inputs.
pub fn write_table<W: Write>(out: W, header: &[String], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(CliError::io)?;
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(CliError::io)?;
    }
    w.flush().map_err(CliError::io)
}
