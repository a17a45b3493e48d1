//! MSE calibration of the BS, GG, IGG, and Heston models to an option
//! chain: the objective is the unweighted mean squared error between model
//! and market call prices across strikes.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bs::{bs_call, BsParams};
use crate::chain::OptionChain;
use crate::error::{Error, Result};
use crate::gg::GgParams;
use crate::heston::{self, HestonParams};
use crate::igg::IggParams;
use crate::optim::{golden_minimize, nelder_mead, Transform};
use crate::rnd::MarketContext;
use crate::numerics::QuadratureSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerStrikeFit {
    pub strike: f64,
    pub market_price: f64,
    pub model_price: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub model_id: String,
    pub fitted_params: BTreeMap<String, f64>,
    pub mse: f64,
    pub per_strike_fit: Vec<PerStrikeFit>,
    pub iterations: usize,
    pub converged: bool,
    pub initial_params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone)]
pub struct CalibrationSettings {
    pub f_tol: f64,
    pub x_tol: f64,
    pub max_iter: usize,
    /// Jittered restarts attempted when the optimizer fails to converge.
    pub restarts: usize,
    pub quad: QuadratureSpec<f64>,
}

impl Default for CalibrationSettings {
    fn default() -> Self {
        Self {
            f_tol: 1e-14,
            x_tol: 1e-8,
            max_iter: 2000,
            restarts: 3,
            quad: QuadratureSpec { abs_tol: 1e-8, rel_tol: 1e-7, ..QuadratureSpec::default() },
        }
    }
}

/// Mean squared pricing error of an arbitrary per-strike pricer over the
/// chain. Pricing failures surface as an infinite objective so simplex
/// moves simply back away from bad regions. Strikes price in parallel.
pub fn mse_objective<F>(pricer: F, chain: &OptionChain) -> f64
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if chain.rows.is_empty() {
        return f64::INFINITY;
    }
    let sum: f64 = chain
        .rows
        .par_iter()
        .map(|q| match pricer(q.strike) {
            Ok(p) if p.is_finite() => (p - q.call_mid).powi(2),
            _ => f64::INFINITY,
        })
        .sum();
    sum / chain.rows.len() as f64
}

fn finish<F>(
    model_id: &str,
    pricer: F,
    chain: &OptionChain,
    fitted: BTreeMap<String, f64>,
    initial: BTreeMap<String, f64>,
    iterations: usize,
    converged: bool,
) -> Result<CalibrationResult>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let per_strike_fit: Vec<PerStrikeFit> = chain
        .rows
        .iter()
        .map(|q| {
            Ok(PerStrikeFit {
                strike: q.strike,
                market_price: q.call_mid,
                model_price: pricer(q.strike)?,
            })
        })
        .collect::<Result<_>>()?;
    let mse = per_strike_fit
        .iter()
        .map(|r| (r.model_price - r.market_price).powi(2))
        .sum::<f64>()
        / per_strike_fit.len() as f64;
    Ok(CalibrationResult {
        model_id: model_id.to_string(),
        fitted_params: fitted,
        mse,
        per_strike_fit,
        iterations,
        converged,
        initial_params: initial,
    })
}

pub const BS_SIGMA_LO: f64 = 1e-4;
pub const BS_SIGMA_HI: f64 = 5.0;

/// One-dimensional golden-section fit of the Black-Scholes sigma.
pub fn calibrate_bs(
    chain: &OptionChain,
    ctx: &MarketContext<f64>,
    sigma0: f64,
) -> Result<CalibrationResult> {
    chain.validate_for_calibration()?;
    if !(sigma0 > 0.0) {
        return Err(Error::Calibration(format!("sigma0 must be > 0, got {sigma0}")));
    }
    let obj = |sigma: f64| {
        mse_objective(|k| bs_call(ctx, k, &BsParams { sigma }), chain)
    };
    let (sigma, _) = golden_minimize(obj, BS_SIGMA_LO, BS_SIGMA_HI, 1e-10)?;
    finish(
        "bs",
        |k| bs_call(ctx, k, &BsParams { sigma }),
        chain,
        BTreeMap::from([("sigma".into(), sigma)]),
        BTreeMap::from([("sigma".into(), sigma0)]),
        0,
        true,
    )
}

fn run_simplex<O>(
    objective: O,
    x0_nat: &[f64],
    transforms: &[Transform],
    settings: &CalibrationSettings,
) -> Result<(Vec<f64>, usize, bool)>
where
    O: Fn(&[f64]) -> f64,
{
    use rand::{Rng, SeedableRng};
    let to_nat = |y: &[f64]| -> Vec<f64> {
        y.iter().zip(transforms).map(|(&v, t)| t.inverse(v)).collect()
    };
    let y0: Vec<f64> = x0_nat
        .iter()
        .zip(transforms)
        .map(|(&v, t)| t.forward(v))
        .collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    let mut best: Option<(Vec<f64>, f64, usize, bool)> = None;
    let mut total_iters = 0;
    for attempt in 0..=settings.restarts {
        let start: Vec<f64> = if attempt == 0 {
            y0.clone()
        } else {
            y0.iter().map(|&v| v + rng.gen_range(-0.5..0.5)).collect()
        };
        let r = nelder_mead(
            |y| objective(&to_nat(y)),
            &start,
            0.25,
            settings.f_tol,
            settings.x_tol,
            settings.max_iter,
        )?;
        total_iters += r.iterations;
        let better = best.as_ref().map_or(true, |(_, fx, _, _)| r.fx < *fx);
        if better {
            best = Some((r.x.clone(), r.fx, total_iters, r.converged));
        }
        if r.converged {
            break;
        }
    }
    let (y, _, iters, converged) =
        best.ok_or_else(|| Error::Calibration("optimizer produced no iterate".into()))?;
    Ok((to_nat(&y), iters, converged))
}

/// Two-parameter (alpha, sigma) fit of the Generalized Gamma RND, both
/// parameters kept positive through a log transform.
pub fn calibrate_gg(
    chain: &OptionChain,
    ctx: &MarketContext<f64>,
    alpha0: f64,
    sigma0: f64,
) -> Result<CalibrationResult> {
    chain.validate_for_calibration()?;
    if !(alpha0 > 0.0 && sigma0 > 0.0) {
        return Err(Error::Calibration(format!(
            "initial parameters must be positive, got alpha0={alpha0} sigma0={sigma0}"
        )));
    }
    let price_all = |alpha: f64, sigma: f64| -> Result<GgParams<f64>> {
        GgParams::solve(alpha, sigma, ctx.ttm_years)
    };
    let objective = |x: &[f64]| match price_all(x[0], x[1]) {
        Ok(p) => mse_objective(|k| p.call(ctx, k), chain),
        Err(_) => f64::INFINITY,
    };
    let settings = CalibrationSettings::default();
    let (x, iterations, converged) = run_simplex(
        objective,
        &[alpha0, sigma0],
        &[Transform::LogPositive, Transform::LogPositive],
        &settings,
    )?;
    let fitted_model = price_all(x[0], x[1])?;
    finish(
        "gg",
        |k| fitted_model.call(ctx, k),
        chain,
        BTreeMap::from([("alpha".into(), x[0]), ("sigma".into(), x[1])]),
        BTreeMap::from([("alpha".into(), alpha0), ("sigma".into(), sigma0)]),
        iterations,
        converged,
    )
}

/// Two-parameter (alpha, sigma) fit of the Inverse Generalized Gamma RND.
pub fn calibrate_igg(
    chain: &OptionChain,
    ctx: &MarketContext<f64>,
    alpha0: f64,
    sigma0: f64,
) -> Result<CalibrationResult> {
    chain.validate_for_calibration()?;
    if !(alpha0 > 0.0 && sigma0 > 0.0) {
        return Err(Error::Calibration(format!(
            "initial parameters must be positive, got alpha0={alpha0} sigma0={sigma0}"
        )));
    }
    // the initial point itself must be feasible
    IggParams::solve(alpha0, sigma0, ctx.ttm_years)?;
    let objective = |x: &[f64]| match IggParams::solve(x[0], x[1], ctx.ttm_years) {
        Ok(p) => mse_objective(|k| p.call(ctx, k), chain),
        Err(_) => f64::INFINITY,
    };
    let settings = CalibrationSettings::default();
    let (x, iterations, converged) = run_simplex(
        objective,
        &[alpha0, sigma0],
        &[Transform::LogPositive, Transform::LogPositive],
        &settings,
    )?;
    let fitted_model = IggParams::solve(x[0], x[1], ctx.ttm_years)?;
    finish(
        "igg",
        |k| fitted_model.call(ctx, k),
        chain,
        BTreeMap::from([("alpha".into(), x[0]), ("sigma".into(), x[1])]),
        BTreeMap::from([("alpha".into(), alpha0), ("sigma".into(), sigma0)]),
        iterations,
        converged,
    )
}

pub const HESTON_KAPPA_HI: f64 = 100.0;
pub const HESTON_THETA_HI: f64 = 4.0;
pub const HESTON_ETA_HI: f64 = 2.0;

/// Four-parameter (kappa, theta, eta, rho) fit of the Heston model; the
/// initial variance V0 is held fixed at theta0.v0 (quoted ATM IV squared),
/// mirroring the calibration protocol this follows.
pub fn calibrate_heston(
    chain: &OptionChain,
    ctx: &MarketContext<f64>,
    theta0: &HestonParams<f64>,
) -> Result<CalibrationResult> {
    chain.validate_for_calibration()?;
    theta0.validate()?;
    let v0 = theta0.v0;
    let settings = CalibrationSettings::default();
    let quad = settings.quad;
    let price = |x: &[f64], k: f64| -> Result<f64> {
        let p = HestonParams { kappa: x[0], theta: x[1], eta: x[2], rho: x[3], v0 };
        heston::call(ctx, &p, k, &quad)
    };
    let objective = |x: &[f64]| mse_objective(|k| price(x, k), chain);
    let transforms = [
        Transform::Logistic { lo: 0.0, hi: HESTON_KAPPA_HI },
        Transform::Logistic { lo: 0.0, hi: HESTON_THETA_HI },
        Transform::Logistic { lo: 0.0, hi: HESTON_ETA_HI },
        Transform::Tanh,
    ];
    let x0 = [
        theta0.kappa.min(HESTON_KAPPA_HI * (1.0 - 1e-9)),
        theta0.theta.min(HESTON_THETA_HI * (1.0 - 1e-9)),
        theta0.eta.min(HESTON_ETA_HI * (1.0 - 1e-9)),
        theta0.rho,
    ];
    let (x, iterations, converged) = run_simplex(objective, &x0, &transforms, &settings)?;
    finish(
        "heston",
        |k| price(&x, k),
        chain,
        BTreeMap::from([
            ("kappa".into(), x[0]),
            ("theta".into(), x[1]),
            ("eta".into(), x[2]),
            ("rho".into(), x[3]),
            ("v0".into(), v0),
        ]),
        BTreeMap::from([
            ("kappa".into(), theta0.kappa),
            ("theta".into(), theta0.theta),
            ("eta".into(), theta0.eta),
            ("rho".into(), theta0.rho),
            ("v0".into(), v0),
        ]),
        iterations,
        converged,
    )
}

/// Convenience: calibrate BS with sigma0 from the quoted ATM IV when the
/// chain carries one, else 0.2.
pub fn default_bs_sigma0(chain: &OptionChain) -> f64 {
    chain
        .rows
        .iter()
        .filter_map(|q| q.quoted_iv)
        .next()
        .unwrap_or(0.2)
}
