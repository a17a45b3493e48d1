//! Command-line interface: chain ingestion, calibration, pricing, density
//! extraction, implied-vol smiles, and Monte-Carlo simulation.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 input/usage error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use rndpricer::bs::{self, BsParams, LognormalRnd};
use rndpricer::calibrate::{self, CalibrationResult};
use rndpricer::chain::{load_chain, OptionChain};
use rndpricer::error::Error;
use rndpricer::gg::GgParams;
use rndpricer::heston::{self, HestonParams};
use rndpricer::igg::IggParams;
use rndpricer::mc::{self, SimConfig};
use rndpricer::rnd::{self, DensityCurve, MarketContext, StandardizedRnd};
use rndpricer::QuadratureSpec;

#[derive(Parser)]
#[command(
    name = "rndpricer",
    version,
    about = "European call pricing and risk-neutral density extraction \
             under Black-Scholes, Generalized Gamma, Inverse Generalized \
             Gamma, and Heston models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Bs,
    Gg,
    Igg,
    Heston,
    All,
}

impl ModelArg {
    fn id(self) -> &'static str {
        match self {
            ModelArg::Bs => "bs",
            ModelArg::Gg => "gg",
            ModelArg::Igg => "igg",
            ModelArg::Heston => "heston",
            ModelArg::All => "all",
        }
    }
}

#[derive(Args, Clone)]
struct MarketArgs {
    /// Underlying spot price S
    #[arg(long)]
    spot: f64,
    /// Continuously compounded risk-free rate r (decimal)
    #[arg(long)]
    rate: f64,
    /// Continuous dividend yield l (decimal)
    #[arg(long, default_value_t = 0.0)]
    div_yield: f64,
    /// Days to expiration; time to maturity is dte/365
    #[arg(long)]
    dte: f64,
}

impl MarketArgs {
    fn context(&self) -> Result<MarketContext<f64>, Error> {
        MarketContext::from_dte(self.spot, self.rate, self.div_yield, self.dte)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Fit model parameters to an option chain by minimizing price MSE
    Calibrate {
        #[arg(long, value_enum)]
        model: ModelArg,
        /// Option-chain CSV (strike,call_bid,call_ask,call_mid,quoted_iv,quoted_delta)
        #[arg(long)]
        chain: PathBuf,
        #[command(flatten)]
        market: MarketArgs,
        /// JSON map of initial parameter overrides, e.g. '{"sigma":0.15}'
        #[arg(long)]
        init: Option<String>,
        /// Output JSON path
        #[arg(long)]
        out: PathBuf,
    },
    /// Price European calls at given strikes under a parameterized model
    Price {
        #[arg(long, value_enum)]
        model: ModelArg,
        /// JSON map of model parameters
        #[arg(long)]
        params: String,
        #[command(flatten)]
        market: MarketArgs,
        /// Strikes: comma list "430,445,460" or range "lo:hi:n"
        #[arg(long)]
        strikes: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tabulate the standardized risk-neutral density on a grid
    Rnd {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long)]
        params: String,
        #[command(flatten)]
        market: MarketArgs,
        /// Standardized-price grid "lo:hi:n", e.g. "0.5:1.5:401"
        #[arg(long)]
        grid: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tabulate call deltas at given strikes
    Delta {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long)]
        params: String,
        #[command(flatten)]
        market: MarketArgs,
        #[arg(long)]
        strikes: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Black-Scholes implied-volatility smile from chain mids
    Smile {
        #[arg(long)]
        chain: PathBuf,
        #[command(flatten)]
        market: MarketArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte-Carlo simulation of Heston terminal prices
    Simulate {
        /// JSON map with kappa, theta, eta, rho, v0
        #[arg(long)]
        heston_params: String,
        #[command(flatten)]
        market: MarketArgs,
        #[arg(long, default_value_t = 30_000)]
        paths: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV of standardized terminal prices
        #[arg(long)]
        out: PathBuf,
        /// Optional histogram CSV (bin_center,density)
        #[arg(long)]
        hist: Option<PathBuf>,
        #[arg(long, default_value_t = 50)]
        bins: usize,
    },
    /// End-to-end run: calibrate all models, then emit densities, deltas,
    /// the smile, and a simulation into a directory
    Report {
        #[arg(long)]
        chain: PathBuf,
        #[command(flatten)]
        market: MarketArgs,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
        /// Overwrite a non-empty output directory
        #[arg(long, default_value_t = false)]
        force: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 30_000)]
        paths: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_)
        | Error::Csv(_)
        | Error::Json(_)
        | Error::Chain(_)
        | Error::Domain(_) => 2,
        _ => 1,
    }
}

fn parse_params(json: &str) -> Result<BTreeMap<String, f64>, Error> {
    serde_json::from_str(json).map_err(|e| Error::Json(format!("invalid --params JSON: {e}")))
}

fn require(map: &BTreeMap<String, f64>, key: &str) -> Result<f64, Error> {
    map.get(key)
        .copied()
        .ok_or_else(|| Error::Json(format!("missing parameter '{key}'")))
}

fn parse_grid(spec: &str) -> Result<(f64, f64, usize), Error> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Domain(format!("grid must be lo:hi:n, got '{spec}'")));
    }
    let lo: f64 = parts[0].parse().map_err(|_| Error::Domain(format!("bad grid lo '{}'", parts[0])))?;
    let hi: f64 = parts[1].parse().map_err(|_| Error::Domain(format!("bad grid hi '{}'", parts[1])))?;
    let n: usize = parts[2].parse().map_err(|_| Error::Domain(format!("bad grid n '{}'", parts[2])))?;
    if !(hi > lo) || n < 2 {
        return Err(Error::Domain(format!("grid needs lo < hi and n >= 2, got '{spec}'")));
    }
    Ok((lo, hi, n))
}

fn parse_strikes(spec: &str) -> Result<Vec<f64>, Error> {
    let mut strikes: Vec<f64> = if spec.contains(':') {
        let (lo, hi, n) = parse_grid(spec)?;
        let step = (hi - lo) / (n - 1) as f64;
        (0..n).map(|i| lo + step * i as f64).collect()
    } else {
        spec.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Domain(format!("bad strike '{s}'")))
            })
            .collect::<Result<_, _>>()?
    };
    if strikes.is_empty() {
        return Err(Error::Domain("no strikes given".into()));
    }
    strikes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(strikes)
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<(), Error> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Csv(e.to_string()))?;
    w.write_record(header).map_err(|e| Error::Csv(e.to_string()))?;
    for row in rows {
        w.write_record(row.iter().map(|v| format!("{v}")))
            .map_err(|e| Error::Csv(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// A standardized RND plus the plumbing the CLI needs, or the Heston model
/// which prices through its characteristic function instead.
enum Model {
    Scale(Box<dyn StandardizedRnd<f64>>),
    Heston(HestonParams<f64>),
}

fn build_model(
    model: ModelArg,
    params: &BTreeMap<String, f64>,
    ctx: &MarketContext<f64>,
) -> Result<Model, Error> {
    match model {
        ModelArg::Bs => {
            let sigma = require(params, "sigma")?;
            let p = BsParams::new(sigma)?;
            Ok(Model::Scale(Box::new(LognormalRnd::new(p.nu(ctx))?)))
        }
        ModelArg::Gg => {
            let p = GgParams::solve(require(params, "alpha")?, require(params, "sigma")?, ctx.ttm_years)?;
            Ok(Model::Scale(Box::new(p)))
        }
        ModelArg::Igg => {
            let p = IggParams::solve(require(params, "alpha")?, require(params, "sigma")?, ctx.ttm_years)?;
            Ok(Model::Scale(Box::new(p)))
        }
        ModelArg::Heston => Ok(Model::Heston(HestonParams::new(
            require(params, "kappa")?,
            require(params, "theta")?,
            require(params, "eta")?,
            require(params, "rho")?,
            require(params, "v0")?,
        )?)),
        ModelArg::All => Err(Error::Domain("model 'all' is only valid for calibrate".into())),
    }
}

impl Model {
    fn call(&self, ctx: &MarketContext<f64>, k: f64, quad: &QuadratureSpec) -> Result<f64, Error> {
        match self {
            Model::Scale(m) => rnd::call_price(m.as_ref(), ctx, k),
            Model::Heston(p) => heston::call(ctx, p, k, quad),
        }
    }

    fn delta(&self, ctx: &MarketContext<f64>, k: f64, quad: &QuadratureSpec) -> Result<f64, Error> {
        match self {
            Model::Scale(m) => rnd::delta(m.as_ref(), ctx, k),
            Model::Heston(p) => heston::delta(ctx, p, k, quad),
        }
    }

    fn delta1(&self, ctx: &MarketContext<f64>, k: f64, quad: &QuadratureSpec) -> Result<f64, Error> {
        match self {
            Model::Scale(m) => rnd::delta1_at_strike(m.as_ref(), ctx, k),
            Model::Heston(p) => heston::delta1(ctx, p, k, quad),
        }
    }

    fn standardized_density(
        &self,
        ctx: &MarketContext<f64>,
        lo: f64,
        hi: f64,
        n: usize,
        quad: &QuadratureSpec,
    ) -> Result<DensityCurve<f64>, Error> {
        match self {
            Model::Scale(m) => {
                let step = (hi - lo) / (n - 1) as f64;
                let grid: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
                rnd::standardized_density_curve(m.as_ref(), &grid)
            }
            Model::Heston(p) => heston::standardized_density_curve(ctx, p, lo, hi, n, quad),
        }
    }
}

fn calibrate_one(
    model: ModelArg,
    chain: &OptionChain,
    ctx: &MarketContext<f64>,
    init: &BTreeMap<String, f64>,
) -> Result<CalibrationResult, Error> {
    let iv = chain.rows.iter().filter_map(|q| q.quoted_iv).next().unwrap_or(0.2);
    let get = |k: &str, d: f64| init.get(k).copied().unwrap_or(d);
    match model {
        ModelArg::Bs => calibrate::calibrate_bs(chain, ctx, get("sigma", iv)),
        ModelArg::Gg => calibrate::calibrate_gg(chain, ctx, get("alpha", 0.5), get("sigma", iv)),
        ModelArg::Igg => calibrate::calibrate_igg(chain, ctx, get("alpha", 3.0), get("sigma", iv)),
        ModelArg::Heston => {
            let v0 = get("v0", iv * iv);
            let start = HestonParams::new(
                get("kappa", 5.0),
                get("theta", (iv * iv).max(1e-4)),
                get("eta", 0.5),
                get("rho", -0.5),
                v0,
            )?;
            calibrate::calibrate_heston(chain, ctx, &start)
        }
        ModelArg::All => Err(Error::Domain("internal: 'all' handled by caller".into())),
    }
}

fn cmd_calibrate(
    model: ModelArg,
    chain_path: &Path,
    market: &MarketArgs,
    init: Option<&str>,
    out: &Path,
) -> Result<(), Error> {
    let chain = load_chain(chain_path)?;
    let ctx = market.context()?;
    let init: BTreeMap<String, f64> = match init {
        Some(s) => serde_json::from_str(s).map_err(|e| Error::Json(format!("invalid --init JSON: {e}")))?,
        None => BTreeMap::new(),
    };
    let doc = if model == ModelArg::All {
        let mut results = Vec::new();
        let mut failures = Vec::new();
        let mut mse_table = BTreeMap::new();
        for m in [ModelArg::Bs, ModelArg::Gg, ModelArg::Igg, ModelArg::Heston] {
            match calibrate_one(m, &chain, &ctx, &init) {
                Ok(r) => {
                    mse_table.insert(r.model_id.clone(), r.mse);
                    results.push(r);
                }
                Err(e) => failures.push(json!({"model_id": m.id(), "error": e.to_string()})),
            }
        }
        if results.is_empty() {
            return Err(Error::Calibration("all model calibrations failed".into()));
        }
        json!({"results": results, "failures": failures, "mse_table": mse_table})
    } else {
        serde_json::to_value(calibrate_one(model, &chain, &ctx, &init)?)
            .map_err(|e| Error::Json(e.to_string()))?
    };
    std::fs::write(out, serde_json::to_string_pretty(&doc).map_err(|e| Error::Json(e.to_string()))? + "\n")?;
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_price(
    model: ModelArg,
    params: &str,
    market: &MarketArgs,
    strikes: &str,
    out: &Path,
) -> Result<(), Error> {
    let ctx = market.context()?;
    let m = build_model(model, &parse_params(params)?, &ctx)?;
    let quad = QuadratureSpec::default();
    let rows: Vec<Vec<f64>> = parse_strikes(strikes)?
        .into_iter()
        .map(|k| Ok(vec![k, m.call(&ctx, k, &quad)?]))
        .collect::<Result<_, Error>>()?;
    write_csv(out, &["strike", "call_price"], &rows)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_rnd(
    model: ModelArg,
    params: &str,
    market: &MarketArgs,
    grid: &str,
    out: &Path,
) -> Result<(), Error> {
    let ctx = market.context()?;
    let m = build_model(model, &parse_params(params)?, &ctx)?;
    let (lo, hi, n) = parse_grid(grid)?;
    let quad = QuadratureSpec::default();
    let curve = m.standardized_density(&ctx, lo, hi, n, &quad)?;
    let rows: Vec<Vec<f64>> = curve.points.iter().map(|&(s, q)| vec![s, q]).collect();
    write_csv(out, &["s_star", "density"], &rows)?;
    println!("wrote {} (grid mass {})", out.display(), curve.mass());
    Ok(())
}

fn cmd_delta(
    model: ModelArg,
    params: &str,
    market: &MarketArgs,
    strikes: &str,
    out: &Path,
) -> Result<(), Error> {
    let ctx = market.context()?;
    let m = build_model(model, &parse_params(params)?, &ctx)?;
    let quad = QuadratureSpec::default();
    let rows: Vec<Vec<f64>> = parse_strikes(strikes)?
        .into_iter()
        .map(|k| Ok(vec![k, m.delta(&ctx, k, &quad)?, m.delta1(&ctx, k, &quad)?]))
        .collect::<Result<_, Error>>()?;
    write_csv(out, &["strike", "delta", "delta1"], &rows)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_smile(chain_path: &Path, market: &MarketArgs, out: &Path) -> Result<(), Error> {
    let chain = load_chain(chain_path)?;
    let ctx = market.context()?;
    let mut rows = Vec::new();
    for q in &chain.rows {
        match bs::implied_vol(&ctx, q.strike, q.call_mid) {
            Ok(iv) => rows.push(vec![q.strike, iv]),
            Err(e) => eprintln!("warning: skipping strike {}: {e}", q.strike),
        }
    }
    if rows.is_empty() {
        return Err(Error::PriceOutOfBounds("no strike admits an implied volatility".into()));
    }
    write_csv(out, &["strike", "implied_vol"], &rows)?;
    println!("wrote {}", out.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    heston_params: &str,
    market: &MarketArgs,
    paths: usize,
    seed: u64,
    out: &Path,
    hist: Option<&Path>,
    bins: usize,
) -> Result<(), Error> {
    let ctx = market.context()?;
    let p = parse_params(heston_params)?;
    let params = HestonParams::new(
        require(&p, "kappa")?,
        require(&p, "theta")?,
        require(&p, "eta")?,
        require(&p, "rho")?,
        require(&p, "v0")?,
    )?;
    let cfg = SimConfig { paths, seed, ..Default::default() };
    let sample = mc::simulate(&ctx, &params, &cfg)?;
    let rows: Vec<Vec<f64>> = sample.s_star.iter().map(|&s| vec![s]).collect();
    write_csv(out, &["s_star"], &rows)?;
    if let Some(hist_path) = hist {
        let h = mc::histogram(&sample, bins)?;
        let hrows: Vec<Vec<f64>> = h.into_iter().map(|(c, d)| vec![c, d]).collect();
        write_csv(hist_path, &["bin_center", "density"], &hrows)?;
    }
    let m = mc::sample_moments(&sample)?;
    let stats = json!({
        "mean": m.mean,
        "variance": m.variance,
        "skewness": m.skewness,
        "excess_kurtosis": m.excess_kurtosis,
        "paths": paths,
        "seed": seed,
    });
    println!("{}", serde_json::to_string_pretty(&stats).map_err(|e| Error::Json(e.to_string()))?);
    Ok(())
}

fn cmd_report(
    chain_path: &Path,
    market: &MarketArgs,
    out_dir: &Path,
    force: bool,
    seed: u64,
    paths: usize,
) -> Result<(), Error> {
    if out_dir.exists() {
        let non_empty = std::fs::read_dir(out_dir)?.next().is_some();
        if non_empty && !force {
            return Err(Error::Domain(format!(
                "output directory {} is not empty; pass --force to overwrite",
                out_dir.display()
            )));
        }
    } else {
        std::fs::create_dir_all(out_dir)?;
    }
    let chain = load_chain(chain_path)?;
    let ctx = market.context()?;
    let quad = QuadratureSpec::default();

    // 1. calibrate all models, recording per-model failures
    let mut results: BTreeMap<&'static str, CalibrationResult> = BTreeMap::new();
    let mut failures = Vec::new();
    for m in [ModelArg::Bs, ModelArg::Gg, ModelArg::Igg, ModelArg::Heston] {
        match calibrate_one(m, &chain, &ctx, &BTreeMap::new()) {
            Ok(r) => {
                results.insert(m.id(), r);
            }
            Err(e) => failures.push(json!({"model_id": m.id(), "error": e.to_string()})),
        }
    }
    if results.is_empty() {
        return Err(Error::Calibration("all model calibrations failed".into()));
    }
    let mse_table: BTreeMap<&str, f64> = results.iter().map(|(k, v)| (*k, v.mse)).collect();
    let calib_doc = json!({
        "results": results.values().collect::<Vec<_>>(),
        "failures": failures,
        "mse_table": mse_table,
    });
    std::fs::write(
        out_dir.join("calibration.json"),
        serde_json::to_string_pretty(&calib_doc).map_err(|e| Error::Json(e.to_string()))? + "\n",
    )?;

    // 2. densities, deltas, and moments per calibrated model
    let strikes = chain.strikes();
    let mut moments = BTreeMap::new();
    for (id, r) in &results {
        let arg = match *id {
            "bs" => ModelArg::Bs,
            "gg" => ModelArg::Gg,
            "igg" => ModelArg::Igg,
            _ => ModelArg::Heston,
        };
        let model = match build_model(arg, &r.fitted_params, &ctx) {
            Ok(m) => m,
            Err(e) => {
                failures.push(json!({"model_id": id, "error": e.to_string()}));
                continue;
            }
        };
        let curve = model.standardized_density(&ctx, 0.5, 1.5, 401, &quad)?;
        let rows: Vec<Vec<f64>> = curve.points.iter().map(|&(s, q)| vec![s, q]).collect();
        write_csv(&out_dir.join(format!("rnd_{id}.csv")), &["s_star", "density"], &rows)?;
        if let Ok(m) = curve.moments() {
            moments.insert(id.to_string(), json!({
                "mean": m.mean,
                "variance": m.variance,
                "skewness": m.skewness,
                "excess_kurtosis": m.excess_kurtosis,
            }));
        }
        let drows: Vec<Vec<f64>> = strikes
            .iter()
            .map(|&k| Ok(vec![k, model.delta(&ctx, k, &quad)?, model.delta1(&ctx, k, &quad)?]))
            .collect::<Result<_, Error>>()?;
        write_csv(&out_dir.join(format!("delta_{id}.csv")), &["strike", "delta", "delta1"], &drows)?;
    }
    std::fs::write(
        out_dir.join("moments.json"),
        serde_json::to_string_pretty(&moments).map_err(|e| Error::Json(e.to_string()))? + "\n",
    )?;

    // 3. smile
    let mut smile_rows = Vec::new();
    for q in &chain.rows {
        if let Ok(iv) = bs::implied_vol(&ctx, q.strike, q.call_mid) {
            smile_rows.push(vec![q.strike, iv]);
        }
    }
    write_csv(&out_dir.join("smile.csv"), &["strike", "implied_vol"], &smile_rows)?;

    // 4. simulation under the calibrated Heston parameters
    if let Some(r) = results.get("heston") {
        let params = HestonParams::new(
            r.fitted_params["kappa"],
            r.fitted_params["theta"],
            r.fitted_params["eta"],
            r.fitted_params["rho"],
            r.fitted_params["v0"],
        )?;
        let cfg = SimConfig { paths, seed, ..Default::default() };
        let sample = mc::simulate(&ctx, &params, &cfg)?;
        let rows: Vec<Vec<f64>> = sample.s_star.iter().map(|&s| vec![s]).collect();
        write_csv(&out_dir.join("simulated_s_star.csv"), &["s_star"], &rows)?;
        let h = mc::histogram(&sample, 50)?;
        let hrows: Vec<Vec<f64>> = h.into_iter().map(|(c, d)| vec![c, d]).collect();
        write_csv(&out_dir.join("histogram.csv"), &["bin_center", "density"], &hrows)?;
    }

    println!("wrote report to {}", out_dir.display());
    Ok(())
}

fn run(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::Calibrate { model, chain, market, init, out } => {
            cmd_calibrate(model, &chain, &market, init.as_deref(), &out)
        }
        Command::Price { model, params, market, strikes, out } => {
            cmd_price(model, &params, &market, &strikes, &out)
        }
        Command::Rnd { model, params, market, grid, out } => {
            cmd_rnd(model, &params, &market, &grid, &out)
        }
        Command::Delta { model, params, market, strikes, out } => {
            cmd_delta(model, &params, &market, &strikes, &out)
        }
        Command::Smile { chain, market, out } => cmd_smile(&chain, &market, &out),
        Command::Simulate { heston_params, market, paths, seed, out, hist, bins } => {
            cmd_simulate(&heston_params, &market, paths, seed, &out, hist.as_deref(), bins)
        }
        Command::Report { chain, market, out, force, seed, paths } => {
            cmd_report(&chain, &market, &out, force, seed, paths)
        }
    }
}
