//! Monte-Carlo simulation of the Heston SDE with a reflective Milstein
//! scheme for the variance process. Paths use independent, deterministic
//! RNG streams keyed by (seed, path index) so parallel and serial runs
//! produce identical samples.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::heston::HestonParams;
use crate::rnd::MarketContext;

/// Variance-process discretization scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Milstein step with absolute-value reflection (default).
    #[default]
    ReflectiveMilstein,
    /// Full-truncation Euler, for convergence comparisons.
    FullTruncationEuler,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub paths: usize,
    pub steps_per_year: usize,
    pub seed: u64,
    pub antithetic: bool,
    pub scheme: Scheme,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            paths: 30_000,
            steps_per_year: 365 * 4,
            seed: 0,
            antithetic: false,
            scheme: Scheme::ReflectiveMilstein,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.paths == 0 {
            return Err(Error::Domain("paths must be >= 1".into()));
        }
        if self.steps_per_year == 0 {
            return Err(Error::Domain("steps_per_year must be >= 1".into()));
        }
        if self.antithetic && self.paths % 2 != 0 {
            return Err(Error::Domain(
                "antithetic sampling requires an even path count".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TerminalSample {
    /// Terminal prices S_T, one per path.
    pub s_t: Vec<f64>,
    /// Terminal variances V_T, one per path.
    pub v_t: Vec<f64>,
    /// Forward-standardized prices s* = S_T / mu.
    pub s_star: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleMoments {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

fn simulate_path(
    ctx: &MarketContext<f64>,
    params: &HestonParams<f64>,
    cfg: &SimConfig,
    n_steps: usize,
    dt: f64,
    path: usize,
) -> (f64, f64) {
    // Antithetic pairs share a stream and flip the sign of every draw.
    let (stream, sign) = if cfg.antithetic {
        ((path / 2) as u64, if path % 2 == 0 { 1.0 } else { -1.0 })
    } else {
        (path as u64, 1.0)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);

    let drift = ctx.rate - ctx.div_yield;
    let rho = params.rho;
    let rho_bar = (1.0 - rho * rho).sqrt();
    let mut log_s = ctx.spot.ln();
    let mut v = params.v0;
    for _ in 0..n_steps {
        let z1: f64 = StandardNormal.sample(&mut rng);
        let z2: f64 = StandardNormal.sample(&mut rng);
        let (z1, z2) = (sign * z1, sign * z2);
        let v_pos = v.max(0.0);
        let sqrt_v_dt = (v_pos * dt).sqrt();
        log_s += (drift - 0.5 * v_pos) * dt + sqrt_v_dt * (rho * z2 + rho_bar * z1);
        v = match cfg.scheme {
            Scheme::ReflectiveMilstein => (v + params.kappa * (params.theta - v) * dt
                + params.eta * sqrt_v_dt * z2
                + 0.25 * params.eta * params.eta * dt * (z2 * z2 - 1.0))
                .abs(),
            Scheme::FullTruncationEuler => {
                v + params.kappa * (params.theta - v_pos) * dt + params.eta * sqrt_v_dt * z2
            }
        };
    }
    (log_s.exp(), v.max(0.0))
}

/// Simulate terminal (S_T, V_T) observations under the Heston dynamics.
pub fn simulate(
    ctx: &MarketContext<f64>,
    params: &HestonParams<f64>,
    cfg: &SimConfig,
) -> Result<TerminalSample> {
    cfg.validate()?;
    params.validate()?;
    let t = ctx.ttm_years;
    let n_steps = ((cfg.steps_per_year as f64 * t).ceil() as usize).max(1);
    let dt = t / n_steps as f64;

    let pairs: Vec<(f64, f64)> = (0..cfg.paths)
        .into_par_iter()
        .map(|path| simulate_path(ctx, params, cfg, n_steps, dt, path))
        .collect();

    let mu = ctx.forward().mu;
    let mut s_t = Vec::with_capacity(cfg.paths);
    let mut v_t = Vec::with_capacity(cfg.paths);
    let mut s_star = Vec::with_capacity(cfg.paths);
    for (s, v) in pairs {
        s_star.push(s / mu);
        s_t.push(s);
        v_t.push(v);
    }
    Ok(TerminalSample { s_t, v_t, s_star })
}

/// Discounted mean of (S_T - K)^+ with its Monte-Carlo standard error.
pub fn discounted_payoff_mean(
    sample: &TerminalSample,
    ctx: &MarketContext<f64>,
    strike: f64,
) -> Result<(f64, f64)> {
    let n = sample.s_t.len();
    if n == 0 {
        return Err(Error::Domain("empty sample".into()));
    }
    let disc = ctx.discount();
    let payoffs: Vec<f64> = sample
        .s_t
        .iter()
        .map(|&s| disc * (s - strike).max(0.0))
        .collect();
    let mean = payoffs.iter().sum::<f64>() / n as f64;
    let var = payoffs.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (n.saturating_sub(1).max(1)) as f64;
    Ok((mean, (var / n as f64).sqrt()))
}

/// Central sample moments of the standardized terminal prices s*.
pub fn sample_moments(sample: &TerminalSample) -> Result<SampleMoments> {
    let xs = &sample.s_star;
    let n = xs.len();
    if n < 2 {
        return Err(Error::Domain("need at least 2 observations".into()));
    }
    let nf = n as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in xs {
        let d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    if m2 <= f64::EPSILON * mean.abs().max(1.0) {
        return Err(Error::Domain(
            "degenerate sample: variance is zero, higher moments undefined".into(),
        ));
    }
    Ok(SampleMoments {
        mean,
        variance: m2 * nf / (nf - 1.0),
        skewness: m3 / m2.powf(1.5),
        excess_kurtosis: m4 / (m2 * m2) - 3.0,
    })
}

/// Density-normalized histogram of the standardized sample: the returned
/// (bin_center, density) values satisfy sum(density) * width = 1.
pub fn histogram(sample: &TerminalSample, bins: usize) -> Result<Vec<(f64, f64)>> {
    let xs = &sample.s_star;
    if xs.is_empty() {
        return Err(Error::Domain("empty sample".into()));
    }
    if bins == 0 {
        return Err(Error::Domain("bins must be >= 1".into()));
    }
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let width = span / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in xs {
        let idx = (((x - lo) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let norm = 1.0 / (xs.len() as f64 * width);
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| (lo + (i as f64 + 0.5) * width, c as f64 * norm))
        .collect())
}

/// Histogram on a caller-supplied [lo, hi] range, for comparing against a
/// density evaluated on matching bin centers. Observations outside the
/// range are dropped but still count toward the normalization.
pub fn histogram_on_range(
    sample: &TerminalSample,
    bins: usize,
    lo: f64,
    hi: f64,
) -> Result<Vec<(f64, f64)>> {
    if sample.s_star.is_empty() {
        return Err(Error::Domain("empty sample".into()));
    }
    if bins == 0 || !(hi > lo) {
        return Err(Error::Domain("need bins >= 1 and lo < hi".into()));
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in &sample.s_star {
        if x >= lo && x < hi {
            counts[(((x - lo) / width) as usize).min(bins - 1)] += 1;
        }
    }
    let norm = 1.0 / (sample.s_star.len() as f64 * width);
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| (lo + (i as f64 + 0.5) * width, c as f64 * norm))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spy_ctx() -> MarketContext<f64> {
        MarketContext::new(445.92, 0.0016, 0.0123, 63.0 / 365.0).unwrap()
    }

    fn spy_params() -> HestonParams<f64> {
        HestonParams::new(15.03132587, 0.02793781, 2.0, -0.77469470, 0.1615 * 0.1615)
            .unwrap()
    }

    #[test]
    fn deterministic_given_seed() {
        let ctx = spy_ctx();
        let p = spy_params();
        let cfg = SimConfig { paths: 64, seed: 7, ..Default::default() };
        let a = simulate(&ctx, &p, &cfg).unwrap();
        let b = simulate(&ctx, &p, &cfg).unwrap();
        assert_eq!(a.s_t, b.s_t);
        assert_eq!(a.v_t, b.v_t);
    }

    #[test]
    fn martingale_within_three_se() {
        let ctx = spy_ctx();
        let p = spy_params();
        let cfg = SimConfig { paths: 20_000, seed: 11, ..Default::default() };
        let sample = simulate(&ctx, &p, &cfg).unwrap();
        let (mean, se) = discounted_payoff_mean(&sample, &ctx, 0.0).unwrap();
        let target = ctx.spot * ctx.carry();
        assert!(
            (mean - target).abs() < 3.0 * se,
            "mean {mean} vs {target} (se {se})"
        );
    }

    #[test]
    fn degenerate_constant_variance_is_lognormal() {
        // eta ~ 0 with v0 = theta: V stays at theta, S_T lognormal.
        let ctx = spy_ctx();
        let theta = 0.1615 * 0.1615;
        let p = HestonParams::new(2.0, theta, 1e-12, 0.0, theta).unwrap();
        let cfg = SimConfig { paths: 20_000, seed: 3, ..Default::default() };
        let sample = simulate(&ctx, &p, &cfg).unwrap();
        // all terminal variances pinned at theta
        for &v in sample.v_t.iter().take(100) {
            assert!((v - theta).abs() < 1e-8);
        }
        let m = sample_moments(&sample).unwrap();
        let nu2 = theta * ctx.ttm_years;
        let exact_var = nu2.exp_m1();
        assert!((m.mean - 1.0).abs() < 3.0 * (exact_var / 20_000.0_f64).sqrt());
        assert!((m.variance - exact_var).abs() < 5e-4, "{} vs {exact_var}", m.variance);
    }

    #[test]
    fn fast_mean_reversion_pins_terminal_variance() {
        let ctx = spy_ctx();
        let p = HestonParams::new(500.0, 0.04, 0.01, -0.3, 0.09).unwrap();
        let cfg = SimConfig { paths: 2_000, seed: 5, ..Default::default() };
        let sample = simulate(&ctx, &p, &cfg).unwrap();
        for &v in &sample.v_t {
            assert!((v - 0.04).abs() < 1e-2, "V_T = {v}");
        }
    }

    #[test]
    fn zero_vol_degenerate_forward() {
        let ctx = spy_ctx();
        let p = HestonParams::new(1.0, 1e-12, 1e-9, 0.0, 1e-12).unwrap();
        let cfg = SimConfig { paths: 50, seed: 1, ..Default::default() };
        let sample = simulate(&ctx, &p, &cfg).unwrap();
        let target = ctx.spot * ((ctx.rate - ctx.div_yield) * ctx.ttm_years).exp();
        for &s in &sample.s_t {
            assert!((s - target).abs() < 1e-5 * target, "{s} vs {target}");
        }
        let mean = sample.s_t.iter().sum::<f64>() / sample.s_t.len() as f64;
        assert!((mean - target).abs() < 1e-6 * target, "{mean} vs {target}");
    }

    #[test]
    fn antithetic_pairs_mirror_draws() {
        let ctx = spy_ctx();
        let p = spy_params();
        let cfg = SimConfig { paths: 8, seed: 9, antithetic: true, ..Default::default() };
        let sample = simulate(&ctx, &p, &cfg).unwrap();
        // antithetic does not change determinism and keeps all prices positive
        let again = simulate(&ctx, &p, &cfg).unwrap();
        assert_eq!(sample.s_t, again.s_t);
        assert!(sample.s_t.iter().all(|&s| s > 0.0));
        assert!(simulate(&ctx, &p, &SimConfig { paths: 7, antithetic: true, ..cfg }).is_err());
    }

    #[test]
    fn constant_sample_moments_flagged() {
        let s = TerminalSample {
            s_t: vec![100.0; 10],
            v_t: vec![0.04; 10],
            s_star: vec![1.0; 10],
        };
        assert!(sample_moments(&s).is_err());
    }

    #[test]
    fn histogram_normalizes() {
        let ctx = spy_ctx();
        let p = spy_params();
        let cfg = SimConfig { paths: 5_000, seed: 2, ..Default::default() };
        let sample = simulate(&ctx, &p, &cfg).unwrap();
        let hist = histogram(&sample, 40).unwrap();
        let width = hist[1].0 - hist[0].0;
        let mass: f64 = hist.iter().map(|&(_, d)| d * width).sum();
        assert!((mass - 1.0).abs() < 1e-9, "mass {mass}");
    }

    #[test]
    fn single_bin_density_is_inverse_width() {
        let s = TerminalSample {
            s_t: vec![90.0, 110.0],
            v_t: vec![0.0, 0.0],
            s_star: vec![0.9, 1.1],
        };
        let hist = histogram(&s, 1).unwrap();
        let width = 1.1 - 0.9;
        assert!((hist[0].1 - 1.0 / width).abs() < 1e-12);
    }

    #[test]
    fn far_otm_payoff_is_zero() {
        let ctx = spy_ctx();
        let p = spy_params();
        let cfg = SimConfig { paths: 500, seed: 13, ..Default::default() };
        let sample = simulate(&ctx, &p, &cfg).unwrap();
        let (mean, se) = discounted_payoff_mean(&sample, &ctx, 10_000.0).unwrap();
        assert_eq!(mean, 0.0);
        assert_eq!(se, 0.0);
    }
}
