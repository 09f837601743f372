//! Subcommands.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use cvtele_core::feasibility::model_point;
use cvtele_core::measures::{m_band_numeric, m_gain_bandwidth, m_min, measure_eve, MeasureReport};
use cvtele_core::optimize::linspace;
use cvtele_core::spectra::{
    drifting_gain_runs, fidelity_histogram, loophole_demo, optimal_symmetric_fidelity, run_batch,
    write_run_records, FidelityHistogram, GainMode, HistogramSpec, LoopholeOutcome, PhaseGainStrategy,
    PipelineOptions, RunRecord, LOOPHOLE_WARNING,
};
use cvtele_core::swapping::swap_bandwidth;
use cvtele_core::teleporter::{teleport_assembled, EveSite, ProtocolConfig};
use cvtele_core::Quadrature;

use crate::config::{load_scenario, Scenario};
use crate::eval::{bob_report, evaluate_grid, header, parse_columns, swap_config, write_table, Column};
use crate::grid::{Grid, Param};
use crate::presets::{self, Kind, Preset};
use crate::{check, CliError};

#[derive(Parser, Debug)]
#[command(name = "cvtele", version, about = "Continuous-variable quadrature teleportation simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate one scenario and print its measures as JSON.
    Teleport(ScenarioArgs),
    /// Evaluate a parameter grid and write a CSV table.
    Sweep(TableArgs),
    /// T-V map over resource strength and gain.
    Tvmap(TableArgs),
    /// Entanglement swapping over a grid.
    Swap(SwapArgs),
    /// Synthetic detection runs, one record per seed, plus a summary.
    Pipeline(PipelineArgs),
    /// Check the bundled reference data and closed-form identities.
    CheckPaper(CheckArgs),
    /// List presets.
    Presets,
}

#[derive(Args, Debug, Clone)]
pub struct ScenarioArgs {
    /// Scenario file.
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Named scenario (see `cvtele presets`).
    #[arg(long)]
    pub preset: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct TableArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Grid axis `path=start:stop:count[:log]` or `path=a,b,c`; repeat for a product.
    #[arg(long)]
    pub grid: Vec<String>,
    /// Comma-separated output columns.
    #[arg(long)]
    pub columns: Option<String>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct SwapArgs {
    #[command(flatten)]
    pub table: TableArgs,
    /// Write the `i_final < 1` gain band per grid point instead (gain axes ignored).
    #[arg(long)]
    pub bands: bool,
}

#[derive(Args, Debug, Clone)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Single seed.
    #[arg(long, conflicts_with = "seeds")]
    pub seed: Option<u64>,
    /// Seed range `a..b` (exclusive end) or list `a,b,c`.
    #[arg(long)]
    pub seeds: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write each run's spectra as CSV.
    #[arg(long)]
    pub spectra: bool,
}

#[derive(Args, Debug, Clone)]
pub struct CheckArgs {
    /// Datapoint CSV to use instead of the bundled one.
    #[arg(long)]
    pub datapoints: Option<PathBuf>,
}

pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Teleport(a) => teleport(&a),
        Command::Sweep(a) => table(&a, Kind::Sweep),
        Command::Tvmap(a) => table(&a, Kind::TvMap),
        Command::Swap(a) if a.bands => swap_bands(&a.table),
        Command::Swap(a) => table(&a.table, Kind::Swap),
        Command::Pipeline(a) => pipeline(&a),
        Command::CheckPaper(a) => check_paper(&a),
        Command::Presets => {
            for &n in presets::NAMES {
                let p = presets::preset(n).expect("listed presets resolve");
                println!("{:<16} {:<9} {}", n, p.kind.name(), p.summary);
            }
            Ok(())
        }
    }
}

fn resolve(args: &ScenarioArgs) -> Result<(Scenario, Option<Preset>), CliError> {
    match (&args.config, &args.preset) {
        (Some(path), _) => Ok((load_scenario(path)?, None)),
        (None, Some(name)) => {
            let p = presets::preset(name).ok_or_else(|| {
                CliError::Usage(format!("unknown preset {name:?}; known: {}", presets::NAMES.join(", ")))
            })?;
            Ok((p.scenario.clone(), Some(p)))
        }
        (None, None) => Err(CliError::Usage("give --config FILE or --preset NAME".into())),
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json<W: Write, T: Serialize>(mut w: W, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut w, value).map_err(CliError::io)?;
    writeln!(w).map_err(CliError::io)?;
    w.flush().map_err(CliError::io)
}

fn model_err(e: cvtele_core::Error) -> CliError {
    CliError::Model(e.to_string())
}

#[derive(Serialize)]
struct Optimum {
    /// Symmetric gain scan of the loss-inferred model, vanishing input amplitude.
    gain_scan: (f64, f64, usize),
    fidelity_max: f64,
    fidelity_gain: f64,
    t_q_max: f64,
    v_q_min: f64,
    m_min_value: f64,
    m_band: Option<(f64, f64)>,
    /// Best symmetric gain for this scenario's input amplitude.
    fidelity_at_alpha: f64,
    gain_at_alpha: f64,
}

#[derive(Serialize)]
struct TeleportReport {
    config: ProtocolConfig,
    measured: MeasureReport,
    m_min: f64,
    /// With the verifier's loss inferred out.
    inferred: MeasureReport,
    eve: Option<MeasureReport>,
    optimum: Option<Optimum>,
}

fn optimum(cfg: &ProtocolConfig) -> Result<Optimum, CliError> {
    let scan = (0.0, 3.0, 3001);
    let points = linspace(scan.0, scan.1, scan.2)
        .into_iter()
        .map(|g| model_point(cfg, g))
        .collect::<Result<Vec<_>, _>>()
        .map_err(model_err)?;
    let best_f = points
        .iter()
        .max_by(|a, b| a.fidelity.total_cmp(&b.fidelity))
        .expect("nonempty scan");
    let alpha = cfg.input_alpha.0.hypot(cfg.input_alpha.1);
    let (fa, ga) = optimal_symmetric_fidelity(cfg, alpha).map_err(model_err)?;
    Ok(Optimum {
        gain_scan: scan,
        fidelity_max: best_f.fidelity,
        fidelity_gain: best_f.g,
        t_q_max: points.iter().map(|p| p.t_q).fold(f64::NEG_INFINITY, f64::max),
        v_q_min: points.iter().map(|p| p.v_q).fold(f64::INFINITY, f64::min),
        m_min_value: points.iter().map(|p| p.m).fold(f64::INFINITY, f64::min),
        m_band: m_band_numeric(cfg).ok(),
        fidelity_at_alpha: fa,
        gain_at_alpha: ga,
    })
}

fn teleport(args: &ScenarioArgs) -> Result<(), CliError> {
    let (sc, _) = resolve(args)?;
    let cfg = sc.protocol;
    let measured = bob_report(&sc)?;
    let mut lossless = sc.clone();
    lossless.protocol.victor_loss = 0.0;
    let inferred = bob_report(&lossless)?;
    let (eve, optimum) = if cfg.eve_tap_site == EveSite::None {
        (None, Some(optimum(&lossless.protocol)?))
    } else {
        let r = teleport_assembled(&cfg).map_err(model_err)?;
        (Some(measure_eve(&r).map_err(model_err)?), None)
    };
    let report = TeleportReport {
        config: cfg,
        m_min: m_min(measured.gains),
        measured,
        inferred,
        eve,
        optimum,
    };
    write_json(io::stdout().lock(), &report)
}

fn default_columns(kind: Kind) -> &'static str {
    match kind {
        Kind::Swap => "i_initial,i_final,k_opt,i_unit_k",
        _ => "t_q,v_q,m,fidelity",
    }
}

fn default_grid(kind: Kind) -> Vec<String> {
    match kind {
        Kind::TvMap => vec!["resource.var_sqz=0.01:1:40:log".into(), "gains.g=0:3:61".into()],
        _ => vec!["gains.g=0:3:301".into()],
    }
}

fn table_setup(args: &TableArgs, kind: Kind) -> Result<(Scenario, Grid, Vec<Column>), CliError> {
    let (sc, preset) = resolve(&args.scenario)?;
    let axes = if !args.grid.is_empty() {
        args.grid.clone()
    } else {
        match &preset {
            Some(p) if !p.grid.is_empty() => p.grid.clone(),
            _ => default_grid(kind),
        }
    };
    let grid = Grid::parse(&axes)?;
    let columns = match (&args.columns, &preset) {
        (Some(list), _) => parse_columns(list)?,
        (None, Some(p)) if p.kind == kind && !p.columns.is_empty() => p.columns.clone(),
        _ => parse_columns(default_columns(kind))?,
    };
    Ok((sc, grid, columns))
}

fn table(args: &TableArgs, kind: Kind) -> Result<(), CliError> {
    let (sc, grid, columns) = table_setup(args, kind)?;
    let rows = evaluate_grid(&sc, &grid, &columns)?;
    write_table(open_out(args.out.as_deref())?, &header(&grid, &columns), &rows)
}

fn swap_bands(args: &TableArgs) -> Result<(), CliError> {
    let (sc, full, _) = table_setup(args, Kind::Swap)?;
    let grid = Grid {
        axes: full
            .axes
            .into_iter()
            .filter(|a| !matches!(a.param, Param::Gain | Param::GainPlus | Param::GainMinus))
            .collect(),
    };
    let rows = grid
        .points()
        .into_iter()
        .map(|point| {
            let at = grid.scenario_at(&sc, &point);
            at.validate()?;
            let cfg = swap_config(&at)?;
            let (lo, hi) = swap_bandwidth(&cfg).map_err(model_err)?;
            let (mlo, mhi) = m_gain_bandwidth(cfg.teleporter_squeezer).map_err(model_err)?;
            let mut row = point;
            row.extend([lo, hi, mlo, mhi]);
            Ok(row)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut head: Vec<String> = grid
        .axes
        .iter()
        .map(|a| format!("{}[{}]", a.param.path(), a.param.unit()))
        .collect();
    head.extend(["swap_g_min[1]", "swap_g_max[1]", "m_g_min[1]", "m_g_max[1]"].map(String::from));
    write_table(open_out(args.out.as_deref())?, &head, &rows)
}

pub fn parse_seeds(args: &PipelineArgs) -> Result<Vec<u64>, CliError> {
    let seeds = match (&args.seed, &args.seeds) {
        (Some(s), _) => vec![*s],
        (None, Some(spec)) => parse_seed_spec(spec)?,
        (None, None) => vec![0],
    };
    if seeds.is_empty() {
        return Err(CliError::Usage("seed list is empty".into()));
    }
    Ok(seeds)
}

pub fn parse_seed_spec(spec: &str) -> Result<Vec<u64>, CliError> {
    let num = |s: &str| {
        s.trim()
            .parse::<u64>()
            .map_err(|_| CliError::Usage(format!("--seeds {spec:?}: {s:?} is not a seed")))
    };
    if let Some((a, b)) = spec.split_once("..") {
        Ok((num(a)?..num(b)?).collect())
    } else {
        spec.split(',').map(num).collect()
    }
}

#[derive(Serialize)]
struct GainStats {
    mean_plus: f64,
    se_plus: f64,
    mean_minus: f64,
    se_minus: f64,
    unverified_runs: usize,
}

#[derive(Serialize)]
struct PipelineSummary {
    schema: &'static str,
    preset: Option<String>,
    runs: usize,
    seeds: Vec<u64>,
    gain_drift: f64,
    verified_gain: FidelityHistogram,
    assume_unity: FidelityHistogram,
    gains: GainStats,
    loophole: Option<LoopholeOutcome>,
    warnings: Vec<String>,
}

fn mean_se(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, f64::NAN);
    }
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn pipeline(args: &PipelineArgs) -> Result<(), CliError> {
    let (sc, preset) = resolve(&args.scenario)?;
    let seeds = parse_seeds(args)?;
    let loophole_preset = preset.as_ref().is_some_and(|p| p.loophole);
    let mut cfg = sc.protocol;
    let mut warnings = Vec::new();
    let loophole = if loophole_preset {
        let out = loophole_demo(&cfg, PhaseGainStrategy::MinimizeNoise).map_err(model_err)?;
        cfg.gains.g_minus = out.g_minus;
        eprintln!("{LOOPHOLE_WARNING}");
        warnings.push(LOOPHOLE_WARNING.to_string());
        Some(out)
    } else {
        None
    };
    let opts = PipelineOptions {
        averages: sc.averages,
        ..PipelineOptions::default()
    };
    let runs: Vec<RunRecord> = if sc.gain_drift > 0.0 {
        drifting_gain_runs(&cfg, sc.gain_drift, &opts, &seeds)
    } else {
        run_batch(&cfg, &opts, &seeds)
    }
    .map_err(model_err)?;

    let unverified = runs.iter().filter(|r| !r.unverified.is_empty()).count();
    if unverified > 0 && !loophole_preset {
        for q in Quadrature::BOTH {
            let n = runs.iter().filter(|r| r.unverified.contains(&q)).count();
            if n > 0 {
                warnings.push(format!(
                    "WARNING: {n} run(s) carry no {} modulation; that gain is unverified and taken as 1",
                    q.label()
                ));
            }
        }
        for w in &warnings {
            eprintln!("{w}");
        }
    }
    let spec = HistogramSpec::default();
    let verified = fidelity_histogram(&runs, GainMode::VerifiedGain, spec).map_err(model_err)?;
    let unity = fidelity_histogram(&runs, GainMode::AssumeUnity, spec).map_err(model_err)?;
    let (mean_plus, se_plus) = mean_se(runs.iter().map(|r| r.estimated_gains.g_plus));
    let (mean_minus, se_minus) = mean_se(runs.iter().map(|r| r.estimated_gains.g_minus));

    fs::create_dir_all(&args.out).map_err(|e| CliError::Io(format!("{}: {e}", args.out.display())))?;
    let path = |name: &str| args.out.join(name);
    let create = |p: PathBuf| {
        File::create(&p)
            .map(BufWriter::new)
            .map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
    };
    let mut records = create(path("runs.jsonl"))?;
    write_run_records(&mut records, &runs).map_err(|e| CliError::Io(e.to_string()))?;
    records.flush().map_err(CliError::io)?;
    if args.spectra {
        for r in &runs {
            let w = create(path(&format!("spectra_{}.csv", r.seed)))?;
            r.spectra.write_csv(w).map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    let summary = PipelineSummary {
        schema: "cvtele-pipeline-summary",
        preset: preset.map(|p| p.name.to_string()),
        runs: runs.len(),
        seeds,
        gain_drift: sc.gain_drift,
        gains: GainStats {
            mean_plus,
            se_plus,
            mean_minus,
            se_minus,
            unverified_runs: unverified,
        },
        verified_gain: verified,
        assume_unity: unity,
        loophole,
        warnings,
    };
    write_json(create(path("summary.json"))?, &summary)?;
    println!(
        "{} run(s); mean fidelity verified {:.4}, assumed unity {:.4}; gains ({:.4}, {:.4})",
        summary.runs, summary.verified_gain.mean, summary.assume_unity.mean, mean_plus, mean_minus
    );
    if let Some(l) = &summary.loophole {
        println!(
            "apparent fidelity {:.4} at phase gain {:.3}; honest symmetric fidelity {:.4}",
            l.f_apparent, l.g_minus, l.honest_fidelity
        );
    }
    Ok(())
}

fn check_paper(args: &CheckArgs) -> Result<(), CliError> {
    let datapoints = match &args.datapoints {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            cvtele_core::feasibility::parse_datapoints(&text).map_err(|e| CliError::Config(e.to_string()))?
        }
        None => cvtele_core::feasibility::bundled_datapoints(),
    };
    let results = check::run_checks(&datapoints, &check::CheckOptions::default());
    let mut out = io::stdout().lock();
    check::write_report(&mut out, &results).map_err(CliError::io)?;
    let failed = results.iter().filter(|r| !r.pass).count();
    if failed > 0 {
        for r in results.iter().filter(|r| !r.pass) {
            eprintln!("failed: {}", r.name);
        }
        return Err(CliError::Checks(failed));
    }
    Ok(())
}
