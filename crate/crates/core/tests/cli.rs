//! End-to-end tests of the `rndpricer` binary: exit codes, file outputs, and
//! determinism, driven through the real CLI surface.

use std::path::Path;
use std::process::{Command, Output};

use rndpricer::bs::{self, BsParams};
use rndpricer::chain::{save_chain, synth_chain};
use rndpricer::rnd::MarketContext;

const SPOT: f64 = 445.92;
const RATE: f64 = 0.0016;
const DIV: f64 = 0.0123;
const DTE: f64 = 63.0;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rndpricer"))
}

fn market_args(cmd: &mut Command) -> &mut Command {
    cmd.args([
        "--spot",
        &SPOT.to_string(),
        "--rate",
        &RATE.to_string(),
        "--div-yield",
        &DIV.to_string(),
        "--dte",
        &DTE.to_string(),
    ])
}

fn write_bs_chain(path: &Path, sigma: f64) {
    let ctx = MarketContext::new(SPOT, RATE, DIV, DTE / 365.0).unwrap();
    let strikes: Vec<f64> = (0..21).map(|i| 400.0 + 5.0 * i as f64).collect();
    let chain = synth_chain(
        |k| bs::bs_call(&ctx, k, &BsParams { sigma }),
        &strikes,
        0.0,
        0,
        "TEST",
        DTE as u32,
    )
    .unwrap();
    save_chain(&chain, path).unwrap();
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "command failed with {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn calibrate_bs_recovers_sigma() {
    let dir = tempfile::tempdir().unwrap();
    let chain = dir.path().join("TEST_63.csv");
    let out_json = dir.path().join("fit.json");
    write_bs_chain(&chain, 0.2);

    let mut cmd = bin();
    let out = market_args(cmd.args(["calibrate", "--model", "bs"])
        .args(["--chain", chain.to_str().unwrap()])
        .args(["--out", out_json.to_str().unwrap()]))
        .output()
        .unwrap();
    assert_success(&out);

    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_json).unwrap()).unwrap();
    let sigma = v["fitted_params"]["sigma"].as_f64().unwrap();
    let mse = v["mse"].as_f64().unwrap();
    assert!((sigma - 0.2).abs() < 1e-6, "sigma {sigma}");
    assert!(mse < 1e-10, "mse {mse}");
}

#[test]
fn missing_chain_file_is_usage_error() {
    let mut cmd = bin();
    let out = market_args(cmd.args(["calibrate", "--model", "bs"])
        .args(["--chain", "/nonexistent/chain.csv"])
        .args(["--out", "/tmp/never-written.json"]))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "expected input error exit code");
}

#[test]
fn malformed_chain_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let chain = dir.path().join("BAD_63.csv");
    std::fs::write(
        &chain,
        "strike,call_bid,call_ask,call_mid,quoted_iv,quoted_delta\n445,,,not-a-number,,\n",
    )
    .unwrap();
    let mut cmd = bin();
    let out = market_args(cmd.args(["calibrate", "--model", "bs"])
        .args(["--chain", chain.to_str().unwrap()])
        .args(["--out", "/tmp/never-written.json"]))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("row"), "error should name the offending row, got: {err}");
}

#[test]
fn smile_is_flat_on_bs_chain() {
    let dir = tempfile::tempdir().unwrap();
    let chain = dir.path().join("TEST_63.csv");
    let smile_csv = dir.path().join("smile.csv");
    write_bs_chain(&chain, 0.25);

    let mut cmd = bin();
    let out = market_args(cmd.args(["smile", "--chain", chain.to_str().unwrap()])
        .args(["--out", smile_csv.to_str().unwrap()]))
        .output()
        .unwrap();
    assert_success(&out);

    let body = std::fs::read_to_string(&smile_csv).unwrap();
    for line in body.lines().skip(1) {
        let iv: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((iv - 0.25).abs() < 1e-7, "smile not flat: {line}");
    }
}

#[test]
fn price_and_delta_tabulate_strikes() {
    let dir = tempfile::tempdir().unwrap();
    let prices = dir.path().join("prices.csv");
    let deltas = dir.path().join("deltas.csv");

    let mut cmd = bin();
    let out = market_args(cmd.args(["price", "--model", "bs", "--params", r#"{"sigma":0.137348}"#])
        .args(["--strikes", "430,445,460", "--out", prices.to_str().unwrap()]))
        .output()
        .unwrap();
    assert_success(&out);
    let body = std::fs::read_to_string(&prices).unwrap();
    let rows: Vec<&str> = body.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    let p: Vec<f64> =
        rows.iter().map(|r| r.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(p[0] > p[1] && p[1] > p[2], "prices not decreasing in strike: {p:?}");

    let mut cmd = bin();
    let out = market_args(cmd.args(["delta", "--model", "gg", "--params", r#"{"alpha":0.1554312,"sigma":0.1483843}"#])
        .args(["--strikes", "445", "--out", deltas.to_str().unwrap()]))
        .output()
        .unwrap();
    assert_success(&out);
    let body = std::fs::read_to_string(&deltas).unwrap();
    let row = body.lines().nth(1).unwrap();
    let delta1: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    assert!((delta1 - 0.638).abs() < 0.02, "GG delta1 at 445: {row}");
}

#[test]
fn rnd_grid_must_have_at_least_two_points() {
    let dir = tempfile::tempdir().unwrap();
    let mut cmd = bin();
    let out = market_args(cmd.args(["rnd", "--model", "bs", "--params", r#"{"sigma":0.2}"#])
        .args(["--grid", "0.5:1.5:1"])
        .args(["--out", dir.path().join("rnd.csv").to_str().unwrap()]))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "degenerate grid must be rejected");
}

#[test]
fn rnd_density_integrates_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let out_csv = dir.path().join("rnd.csv");
    let mut cmd = bin();
    let out = market_args(cmd.args(["rnd", "--model", "gg", "--params", r#"{"alpha":0.1554312,"sigma":0.1483843}"#])
        .args(["--grid", "0.2:2.5:2001"])
        .args(["--out", out_csv.to_str().unwrap()]))
        .output()
        .unwrap();
    assert_success(&out);
    let body = std::fs::read_to_string(&out_csv).unwrap();
    let pts: Vec<(f64, f64)> = body
        .lines()
        .skip(1)
        .map(|l| {
            let mut it = l.split(',');
            (it.next().unwrap().parse().unwrap(), it.next().unwrap().parse().unwrap())
        })
        .collect();
    // trapezoid mass
    let mass: f64 = pts
        .windows(2)
        .map(|w| 0.5 * (w[1].1 + w[0].1) * (w[1].0 - w[0].0))
        .sum();
    assert!((mass - 1.0).abs() < 1e-3, "density mass {mass}");
}

#[test]
fn simulate_is_deterministic_and_histogram_normalizes() {
    let dir = tempfile::tempdir().unwrap();
    let params = r#"{"kappa":15.03132587,"theta":0.02793781,"eta":2.0,"rho":-0.77469470,"v0":0.02608225}"#;
    let mut outs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out_csv = dir.path().join(name);
        let hist_csv = dir.path().join(format!("h_{name}"));
        let mut cmd = bin();
        cmd.args(["simulate", "--heston-params", params])
            .args(["--paths", "2000", "--seed", "7"])
            .args(["--out", out_csv.to_str().unwrap()])
            .args(["--hist", hist_csv.to_str().unwrap(), "--bins", "40"]);
        let out = market_args(&mut cmd).output().unwrap();
        assert_success(&out);
        outs.push(std::fs::read_to_string(&out_csv).unwrap());

        let hist = std::fs::read_to_string(&hist_csv).unwrap();
        let rows: Vec<(f64, f64)> = hist
            .lines()
            .skip(1)
            .map(|l| {
                let mut it = l.split(',');
                (it.next().unwrap().parse().unwrap(), it.next().unwrap().parse().unwrap())
            })
            .collect();
        assert_eq!(rows.len(), 40);
        let width = rows[1].0 - rows[0].0;
        let mass: f64 = rows.iter().map(|&(_, d)| d * width).sum();
        assert!((mass - 1.0).abs() < 1e-9, "histogram mass {mass}");
    }
    assert_eq!(outs[0], outs[1], "same seed must give identical samples");
}

#[test]
fn report_writes_artifacts_and_respects_force() {
    let dir = tempfile::tempdir().unwrap();
    let chain = dir.path().join("TEST_63.csv");
    write_bs_chain(&chain, 0.2);
    let out_dir = dir.path().join("report");

    let run = |force: bool| {
        let mut cmd = bin();
        cmd.args(["report", "--chain", chain.to_str().unwrap()])
            .args(["--out", out_dir.to_str().unwrap()])
            .args(["--paths", "2000", "--seed", "1"]);
        if force {
            cmd.arg("--force");
        }
        market_args(&mut cmd);
        cmd.output().unwrap()
    };

    let out = run(false);
    assert_success(&out);
    for f in ["calibration.json", "smile.csv", "moments.json", "simulated_s_star.csv", "histogram.csv"] {
        assert!(out_dir.join(f).exists(), "missing artifact {f}");
    }

    // rerun without --force must refuse, with --force must succeed
    let out = run(false);
    assert_eq!(out.status.code(), Some(2), "non-empty out dir should be refused");
    let out = run(true);
    assert_success(&out);
}
