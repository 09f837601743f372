use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

use cvtele_cli::check::{run_checks, CheckOptions};
use cvtele_core::feasibility::bundled_datapoints;
use cvtele_core::measures::m_gain_bandwidth;
use cvtele_core::spectra::{read_run_records, LOOPHOLE_WARNING};
use cvtele_core::teleporter::SqueezerSpec;

const BIN: &str = env!("CARGO_BIN_EXE_cvtele");

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    fn col(&self, name: &str) -> usize {
        self.header
            .iter()
            .position(|h| h.split('[').next() == Some(name))
            .unwrap_or_else(|| panic!("no column {name} in {:?}", self.header))
    }
}

fn table(args: &[&str]) -> Table {
    let out = run_ok(args);
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|v| v.parse::<f64>().unwrap()).collect())
        .collect();
    Table { header, rows }
}

fn teleport_json(cfg: &Path) -> Value {
    let out = run_ok(&["teleport", "--config", cfg.to_str().unwrap()]);
    serde_json::from_slice(&out.stdout).unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

#[test]
fn malformed_config_exits_2_naming_the_field() {
    let dir = scratch("malformed");
    let bad = dir.join("bad.cfg");
    fs::write(&bad, "[resource]\nvar_sqz = 0.5\n[losses]\nvictor_los = 0.1\n").unwrap();
    let out = run(&["teleport", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("victor_los"), "{err}");

    fs::write(&bad, "[resource]\nvar_sqz = 1.5\n").unwrap();
    let out = run(&["teleport", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("var_sqz"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["teleport", "--preset", "nope"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--preset", "fig5", "--grid", "gains.g=0:3:1"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--preset", "fig5", "--columns", "t_q,bogus"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    let out = Command::new(BIN)
        .args(["check-paper"])
        .env(cvtele_cli::WORKERS_ENV, "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_paper_passes() {
    let out = run(&["check-paper"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(!text.contains("FAIL"), "{text}");
    assert!(text.contains("PASS  datapoint: best_fidelity"), "{text}");
}

#[test]
fn check_paper_flags_infeasible_datapoint() {
    let dir = scratch("datapoints");
    let path = dir.join("points.csv");
    let csv = cvtele_core::feasibility::bundled_datapoints_csv().replacen("0.64,0.02", "0.90,0.02", 1);
    fs::write(&path, csv).unwrap();
    let out = run(&["check-paper", "--datapoints", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("best_fidelity"));
}

fn perturbed_bandwidth(s: SqueezerSpec) -> cvtele_core::Result<(f64, f64)> {
    m_gain_bandwidth(s).map(|(a, b)| (a * 1.001, b))
}

#[test]
fn mutated_bandwidth_is_caught() {
    let clean = run_checks(&bundled_datapoints(), &CheckOptions::default());
    assert!(clean.iter().all(|r| r.pass));
    let mutated = run_checks(
        &bundled_datapoints(),
        &CheckOptions {
            bandwidth: perturbed_bandwidth,
        },
    );
    let failing: Vec<&str> = mutated.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
    assert!(failing.contains(&"identity: M gain bandwidth"), "{failing:?}");
    assert!(failing.iter().all(|n| n.contains("band")), "{failing:?}");
}

#[test]
fn classical_unity_config() {
    let v = teleport_json(&data("classical_unity.cfg"));
    let m = &v["measured"];
    assert!((num(&m["fidelity"]) - 0.5).abs() < 1e-9);
    assert!((num(&m["t_q"]) - 2.0 / 3.0).abs() < 1e-9);
    assert!((num(&m["v_q"]) - 4.0).abs() < 1e-9);
    assert!((num(&m["m"]) - 1.0).abs() < 1e-9);
}

#[test]
fn reference_resource_optimum_dominates_datapoints() {
    let v = teleport_json(&data("paper_resource.cfg"));
    let o = &v["optimum"];
    let band = o["m_band"].as_array().unwrap();
    for d in bundled_datapoints() {
        let ok = match d.name.as_str() {
            "best_fidelity" => d.value - d.uncertainty <= num(&o["fidelity_max"]),
            "best_signal_transfer" => d.value - d.uncertainty <= num(&o["t_q_max"]),
            "lowest_vq" => d.value + d.uncertainty >= num(&o["v_q_min"]),
            "best_m" => d.value + d.uncertainty >= num(&o["m_min_value"]),
            "m_band_low" => num(&band[0]) <= d.value,
            "m_band_high" => num(&band[1]) >= d.value,
            other => panic!("unexpected datapoint {other}"),
        };
        assert!(ok, "{} = {} not dominated by optimum {o}", d.name, d.value);
    }
    // the measured report keeps the verifier's loss, the inferred one removes it
    assert!(num(&v["inferred"]["t_q"]) > num(&v["measured"]["t_q"]));
}

#[test]
fn sweep_output_is_byte_stable_across_workers() {
    let args = ["sweep", "--preset", "fig7"];
    let a = Command::new(BIN).args(args).env(cvtele_cli::WORKERS_ENV, "1").output().unwrap();
    let b = Command::new(BIN).args(args).env(cvtele_cli::WORKERS_ENV, "4").output().unwrap();
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(run_ok(&args).stdout, a.stdout);
}

#[test]
fn out_flag_matches_stdout() {
    let dir = scratch("out_flag");
    let path = dir.join("fig5.csv");
    run_ok(&["sweep", "--preset", "fig5", "--out", path.to_str().unwrap()]);
    assert_eq!(fs::read(&path).unwrap(), run_ok(&["sweep", "--preset", "fig5"]).stdout);
}

fn group_by(t: &Table, key: usize) -> BTreeMap<u64, Vec<&Vec<f64>>> {
    let mut m: BTreeMap<u64, Vec<&Vec<f64>>> = BTreeMap::new();
    for r in &t.rows {
        m.entry(r[key].to_bits()).or_default().push(r);
    }
    m
}

#[test]
fn fig5_minimum_at_unity_gain() {
    let t = table(&["sweep", "--preset", "fig5"]);
    let (s, g, m) = (t.col("resource.var_sqz"), t.col("gains.g"), t.col("m"));
    let curves = group_by(&t, s);
    assert_eq!(curves.len(), 4);
    for rows in curves.values() {
        let best = rows.iter().min_by(|a, b| a[m].total_cmp(&b[m])).unwrap();
        assert!((best[g] - 1.0).abs() <= 0.01 + 1e-12, "minimum at g = {}", best[g]);
    }
}

#[test]
fn fig3_fidelity_falls_with_amplitude_off_unity() {
    let t = table(&["sweep", "--preset", "fig3"]);
    let (g, a, f) = (t.col("gains.g"), t.col("input.alpha"), t.col("fidelity"));
    for rows in group_by(&t, g).values() {
        let gain = rows[0][g];
        assert!(rows.windows(2).all(|w| w[1][a] > w[0][a]));
        if gain == 1.0 {
            assert!(rows.iter().all(|r| (r[f] - rows[0][f]).abs() < 1e-12));
        } else {
            assert!(rows.windows(2).all(|w| w[1][f] < w[0][f]), "g = {gain}");
            let last = rows.last().unwrap()[f];
            let floor = if (gain - 1.0).abs() >= 0.05 { 0.5 } else { 0.95 };
            assert!(last < floor * rows[0][f], "g = {gain}: {last}");
        }
    }
}

#[test]
fn fig8_band_independent_of_input_entanglement() {
    let t = table(&["swap", "--preset", "fig8", "--bands"]);
    let (s, lo, hi) = (t.col("resource.var_sqz"), t.col("swap_g_min"), t.col("swap_g_max"));
    let (mlo, mhi) = (t.col("m_g_min"), t.col("m_g_max"));
    let groups = group_by(&t, s);
    assert_eq!(groups.len(), 3);
    for rows in groups.values() {
        assert_eq!(rows.len(), 2);
        for r in rows {
            assert!((r[lo] - rows[0][lo]).abs() < 1e-9 && (r[hi] - rows[0][hi]).abs() < 1e-9);
            assert!((r[lo] - r[mlo]).abs() < 1e-5 && (r[hi] - r[mhi]).abs() < 1e-5);
        }
    }
    // the gain grid shows the same success region for both input pairs
    let t = table(&["swap", "--preset", "fig8"]);
    let (s, y, i) = (t.col("resource.var_sqz"), t.col("swap.input_var_sqz"), t.col("i_final"));
    for rows in group_by(&t, s).values() {
        // Some(inside) away from the edges, None where I_final sits on 1
        let mask = |yv: f64| -> Vec<Option<bool>> {
            rows.iter()
                .filter(|r| r[y] == yv)
                .map(|r| ((r[i] - 1.0).abs() > 1e-9).then_some(r[i] < 1.0))
                .collect()
        };
        let (a, b) = (mask(0.5), mask(0.1));
        assert!(a.iter().zip(&b).all(|(p, q)| p.is_none() || q.is_none() || p == q));
        assert!(a.contains(&Some(true)));
    }
}

#[test]
fn fig7_fidelity_region_collapses_onto_unity_gain() {
    let t = table(&["tvmap", "--preset", "fig7"]);
    let (a, g, tq, vq, f) = (t.col("input.alpha"), t.col("gains.g"), t.col("t_q"), t.col("v_q"), t.col("fidelity"));
    let mut counts = Vec::new();
    let mut spreads = Vec::new();
    for rows in group_by(&t, a).values() {
        let above: Vec<_> = rows.iter().filter(|r| r[f] > 2.0 / 3.0).collect();
        let half = rows.iter().filter(|r| r[f] > 0.5).count();
        counts.push((above.len(), half));
        spreads.push(above.iter().map(|r| (r[g] - 1.0).abs()).fold(0.0, f64::max));
        if rows[0][a] == 15.0 {
            assert!(above.iter().all(|r| r[tq] > 1.0 && r[vq] < 1.0));
            // above 1/2 in the classical corner only next to unity gain
            let classical_half = rows.iter().filter(|r| r[f] > 0.5 && r[tq] <= 1.0 && r[vq] >= 1.0);
            assert!(classical_half.into_iter().all(|r| (r[g] - 1.0).abs() <= 0.05 + 1e-12));
        }
        if rows[0][a] == 0.0 {
            assert!(above.iter().any(|r| r[tq] <= 1.0 && r[vq] >= 1.0));
        }
    }
    assert_eq!(counts.len(), 4);
    assert!(counts.windows(2).all(|w| w[1].0 < w[0].0 && w[1].1 < w[0].1), "{counts:?}");
    assert!(spreads.windows(2).all(|w| w[1] <= w[0]), "{spreads:?}");
    assert!(spreads[3] < spreads[0]);
}

#[test]
fn eve_bob_arm_half_tap_caps_signal_transfer() {
    let t = table(&["tvmap", "--preset", "eve-bob-50"]);
    let (tq, vq, etq, evq) = (t.col("t_q"), t.col("v_q"), t.col("eve_t_q"), t.col("eve_v_q"));
    let max = t.rows.iter().map(|r| r[tq]).fold(f64::NEG_INFINITY, f64::max);
    assert!((max - 1.0).abs() <= 1e-6, "max T_q = {max}");
    assert!(t.rows.iter().all(|r| (r[tq] - r[etq]).abs() < 1e-10 && (r[vq] - r[evq]).abs() < 1e-9));
}

#[test]
fn eve_alice_arm_half_tap() {
    let t = table(&["tvmap", "--preset", "eve-alice-50"]);
    let (tq, vq, etq, evq) = (t.col("t_q"), t.col("v_q"), t.col("eve_t_q"), t.col("eve_v_q"));
    assert!(t.rows.iter().all(|r| r[vq] >= 1.0 - 1e-9));
    assert!(t.rows.iter().any(|r| r[tq] > 1.0));
    assert!(t.rows.iter().all(|r| r[etq] <= 1.0 + 1e-9 && r[evq] >= 1.0 - 1e-9));
}

#[test]
fn unity_locus_improves_with_squeezing() {
    let t = table(&["tvmap", "--preset", "unity-locus"]);
    let (s, tq, vq) = (t.col("resource.var_sqz"), t.col("t_q"), t.col("v_q"));
    assert_eq!(t.rows.len(), 61);
    // rows run from strong to no squeezing
    assert!(t.rows.windows(2).all(|w| w[1][s] > w[0][s]));
    let (strong, moderate): (Vec<&Vec<f64>>, Vec<&Vec<f64>>) = t.rows.iter().partition(|r| r[s] < 0.02);
    assert!(moderate.windows(2).all(|w| w[1][tq] < w[0][tq] && w[1][vq] > w[0][vq]));
    assert!(moderate.first().unwrap()[tq] > 1.0 && moderate.last().unwrap()[tq] < 1.0);
    assert!(moderate.first().unwrap()[vq] < 1.0 && moderate.last().unwrap()[vq] > 1.0);
    // with a mixed resource and a lossy output coupler the excess
    // anti-squeezing leaks into the output, so the locus turns back
    let peak = t.rows.iter().map(|r| r[tq]).fold(f64::NEG_INFINITY, f64::max);
    assert!(strong[0][tq] < peak);
}

fn summary(dir: &Path) -> Value {
    serde_json::from_slice(&fs::read(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn pipeline_repeated_seed_is_identical() {
    let a = scratch("pipe_a");
    let b = scratch("pipe_b");
    for d in [&a, &b] {
        run_ok(&["pipeline", "--preset", "default", "--seed", "7", "--spectra", "--out", d.to_str().unwrap()]);
    }
    for f in ["runs.jsonl", "summary.json", "spectra_7.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let runs = read_run_records(BufReader::new(fs::File::open(a.join("runs.jsonl")).unwrap())).unwrap();
    assert_eq!(runs.len(), 1);
    assert_eq!(runs[0].seed, 7);
    let head = fs::read_to_string(a.join("spectra_7.csv")).unwrap();
    assert!(head.starts_with("freq_hz,quadrature,port,variance\n"));
}

#[test]
fn drifting_gain_assumed_unity_inflates_fidelity() {
    let dir = scratch("drift");
    run_ok(&["pipeline", "--preset", "drifting-gain", "--seeds", "0..500", "--out", dir.to_str().unwrap()]);
    let s = summary(&dir);
    assert_eq!(s["runs"], 500);
    let verified = num(&s["verified_gain"]["mean"]);
    let unity = num(&s["assume_unity"]["mean"]);
    assert!(unity > verified, "assumed {unity} vs verified {verified}");
    let counts: u64 = s["verified_gain"]["counts"].as_array().unwrap().iter().map(|c| c.as_u64().unwrap()).sum();
    assert_eq!(counts, 500);
}

#[test]
fn loophole_summary_warns_and_reports_inflated_fidelity() {
    let dir = scratch("loophole");
    let out = run_ok(&["pipeline", "--preset", "loophole", "--seeds", "0..20", "--out", dir.to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&out.stderr).contains(LOOPHOLE_WARNING));
    let s = summary(&dir);
    assert!(s["warnings"].as_array().unwrap().iter().any(|w| w == LOOPHOLE_WARNING));
    let l = &s["loophole"];
    assert!(num(&l["f_apparent"]) > num(&l["honest_fidelity"]));
    assert!(num(&l["g_minus"]) < 1.0);
}

#[test]
fn pipeline_needs_nonempty_seeds() {
    let dir = scratch("empty_seeds");
    let out = run(&["pipeline", "--preset", "default", "--seeds", "3..3", "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fig6_fidelity_narrows_while_m_is_amplitude_free() {
    let t = table(&["sweep", "--preset", "fig6"]);
    let (a, g, f, m) = (t.col("input.alpha"), t.col("gains.g"), t.col("fidelity"), t.col("m"));
    let curves: Vec<Vec<&Vec<f64>>> = group_by(&t, a).into_values().collect();
    assert_eq!(curves.len(), 5);
    for c in &curves {
        assert!(c.iter().zip(&curves[0]).all(|(r, r0)| r[g] == r0[g] && r[m] == r0[m]));
    }
    let width = |c: &Vec<&Vec<f64>>| c.iter().filter(|r| r[f] > 0.5).count();
    let peak = |c: &Vec<&Vec<f64>>| c.iter().max_by(|x, y| x[f].total_cmp(&y[f])).unwrap()[g];
    assert!(curves.windows(2).all(|w| width(&w[1]) < width(&w[0])));
    assert!(curves.windows(2).all(|w| (peak(&w[1]) - 1.0).abs() <= (peak(&w[0]) - 1.0).abs()));
    assert!((peak(curves.last().unwrap()) - 1.0).abs() <= 0.01 + 1e-12);
}
