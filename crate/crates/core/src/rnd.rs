//! Scale-parameter risk-neutral density abstraction and the generic pricing,
//! delta, and density operations built on it.
//!
//! A standardized RND is a unit-mean distribution Q1 on (0, ∞) with variance
//! ν². The terminal-price density is its scale family q_mu(x) = q1(x/mu)/mu
//! with mu the forward price, and the call price follows the working formula
//! C(K) = S e^{-lt} Δ1(K/mu) - K e^{-rt} (1 - Q1(K/mu)).

use crate::error::{Error, Result};
use crate::numerics::find_root;
use crate::Real;

/// Shared pricing environment: spot, rates and time to expiry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketContext<T> {
    pub spot: T,
    pub rate: T,
    pub div_yield: T,
    pub ttm_years: T,
}

impl<T: Real> MarketContext<T> {
    pub fn new(spot: T, rate: T, div_yield: T, ttm_years: T) -> Result<Self> {
        if !(spot > T::zero()) {
            return Err(Error::Domain(format!("spot must be > 0, got {spot}")));
        }
        if !(ttm_years > T::zero()) {
            return Err(Error::Domain(format!("ttm_years must be > 0, got {ttm_years}")));
        }
        let one = T::one();
        if !(rate > -one && rate < one) || !(div_yield > -one && div_yield < one) {
            return Err(Error::Domain("rate and div_yield must lie in (-1, 1)".into()));
        }
        Ok(Self { spot, rate, div_yield, ttm_years })
    }

    /// Days-to-expiry convenience constructor (t = dte/365).
    pub fn from_dte(spot: T, rate: T, div_yield: T, dte_days: f64) -> Result<Self> {
        Self::new(spot, rate, div_yield, T::of(dte_days) / T::of(365.0))
    }

    /// e^{-rt}
    pub fn discount(&self) -> T {
        (-self.rate * self.ttm_years).exp()
    }

    /// e^{-lt}, the dividend carry factor multiplying the spot.
    pub fn carry(&self) -> T {
        (-self.div_yield * self.ttm_years).exp()
    }

    /// Forward price mu = S e^{(r-l)t}.
    pub fn forward(&self) -> ForwardScale<T> {
        ForwardScale {
            mu: self.spot * ((self.rate - self.div_yield) * self.ttm_years).exp(),
        }
    }
}

/// The forward price acting as the scale parameter of the RND family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForwardScale<T> {
    pub mu: T,
}

/// A standardized (unit-mean) risk-neutral density Q1.
///
/// Implementations must be immutable after construction; all methods are pure.
pub trait StandardizedRnd<T: Real>: Send + Sync {
    /// Q1(u) = Pr(U <= u).
    fn cdf(&self, u: T) -> T;
    /// q1(u).
    fn pdf(&self, u: T) -> T;
    /// Δ1(s) = ∫_s^∞ u q1(u) du.
    fn delta1(&self, s: T) -> T;
    /// Standardized raw moment m_j = E[U^j] (m_1 = 1, m_2 = 1 + ν²).
    fn raw_moment(&self, j: u32) -> Result<T>;
    /// The construction parameter ν (standard deviation of U).
    fn nu(&self) -> T;
}

/// Call price under the working scale-family formula.
pub fn call_price<T: Real>(
    rnd: &dyn StandardizedRnd<T>,
    ctx: &MarketContext<T>,
    strike: T,
) -> Result<T> {
    if !(strike >= T::zero()) {
        return Err(Error::Domain(format!("strike must be >= 0, got {strike}")));
    }
    let mu = ctx.forward().mu;
    if strike == T::zero() {
        return Ok(ctx.spot * ctx.carry());
    }
    let s = strike / mu;
    let c = ctx.spot * ctx.carry() * rnd.delta1(s)
        - strike * ctx.discount() * (T::one() - rnd.cdf(s));
    Ok(c.max(T::zero()))
}

/// European put via parity: put = call - S e^{-lt} + K e^{-rt}.
pub fn put_price<T: Real>(
    rnd: &dyn StandardizedRnd<T>,
    ctx: &MarketContext<T>,
    strike: T,
) -> Result<T> {
    let call = call_price(rnd, ctx, strike)?;
    Ok((call - ctx.spot * ctx.carry() + strike * ctx.discount()).max(T::zero()))
}

/// Dividend-adjusted hedge ratio e^{-lt} Δ1(K/mu).
pub fn delta<T: Real>(
    rnd: &dyn StandardizedRnd<T>,
    ctx: &MarketContext<T>,
    strike: T,
) -> Result<T> {
    Ok(ctx.carry() * delta1_at_strike(rnd, ctx, strike)?)
}

/// The undiscounted Δ1(K/mu), as tabulated in delta comparisons.
pub fn delta1_at_strike<T: Real>(
    rnd: &dyn StandardizedRnd<T>,
    ctx: &MarketContext<T>,
    strike: T,
) -> Result<T> {
    if !(strike >= T::zero()) {
        return Err(Error::Domain(format!("strike must be >= 0, got {strike}")));
    }
    if strike == T::zero() {
        return Ok(T::one());
    }
    Ok(rnd.delta1(strike / ctx.forward().mu))
}

/// Which leg of a strangle a delta target refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptionSide {
    Call,
    Put,
}

/// Invert the (monotone) delta curve: find the strike whose call delta equals
/// `target_delta` (call side) or whose put delta `call_delta - e^{-lt}`
/// equals it (put side, negative targets).
pub fn strike_for_delta<T: Real>(
    rnd: &dyn StandardizedRnd<T>,
    ctx: &MarketContext<T>,
    target_delta: T,
    side: OptionSide,
) -> Result<T> {
    let carry = ctx.carry();
    let call_target = match side {
        OptionSide::Call => target_delta,
        OptionSide::Put => target_delta + carry,
    };
    if !(call_target > T::zero() && call_target < carry) {
        return Err(Error::UnattainableTarget(format!(
            "call-delta target {call_target} outside (0, {carry})"
        )));
    }
    let mu = ctx.forward().mu;
    let f = |k: T| delta(rnd, ctx, k).unwrap_or(T::nan()) - call_target;
    // expand a bracket around the forward
    let mut lo = mu * T::of(1e-6);
    let mut hi = mu * T::of(4.0);
    for _ in 0..60 {
        if f(lo) > T::zero() {
            break;
        }
        lo = lo * T::of(0.5);
    }
    for _ in 0..60 {
        if f(hi) < T::zero() {
            break;
        }
        hi = hi * T::of(2.0);
    }
    if !(f(lo) > T::zero() && f(hi) < T::zero()) {
        return Err(Error::UnattainableTarget(format!(
            "delta target {target_delta} not bracketed"
        )));
    }
    find_root(f, lo, hi, mu * T::of(1e-10))
}

/// Sampled implied density.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityCurve<T> {
    /// (price, density) pairs on a strictly increasing positive grid.
    pub points: Vec<(T, T)>,
}

impl<T: Real> DensityCurve<T> {
    /// Trapezoid integral of the density over the grid.
    pub fn mass(&self) -> T {
        self.integral(|_| T::one())
    }

    /// Trapezoid integral of w(x)·q(x) over the grid.
    pub fn integral<W: Fn(T) -> T>(&self, w: W) -> T {
        let half = T::of(0.5);
        let mut acc = T::zero();
        for pair in self.points.windows(2) {
            let (x0, q0) = pair[0];
            let (x1, q1) = pair[1];
            acc = acc + half * (x1 - x0) * (w(x0) * q0 + w(x1) * q1);
        }
        acc
    }

    /// Mean, variance, skewness and excess kurtosis of the (renormalized)
    /// sampled density.
    pub fn moments(&self) -> Result<CurveMoments<T>> {
        let m0 = self.mass();
        if !(m0 > T::zero()) {
            return Err(Error::Domain("density curve carries no mass".into()));
        }
        let mean = self.integral(|x| x) / m0;
        let var = self.integral(|x| (x - mean) * (x - mean)) / m0;
        if !(var > T::zero()) {
            return Err(Error::MomentNonexistence("zero variance on grid".into()));
        }
        let c3 = self.integral(|x| (x - mean).powi(3)) / m0;
        let c4 = self.integral(|x| (x - mean).powi(4)) / m0;
        Ok(CurveMoments {
            mean,
            variance: var,
            skewness: c3 / var.powf(T::of(1.5)),
            excess_kurtosis: c4 / (var * var) - T::of(3.0),
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CurveMoments<T> {
    pub mean: T,
    pub variance: T,
    pub skewness: T,
    pub excess_kurtosis: T,
}

/// Sample q_mu(x) = q1(x/mu)/mu on the given price grid.
pub fn density_curve<T: Real>(
    rnd: &dyn StandardizedRnd<T>,
    ctx: &MarketContext<T>,
    grid: &[T],
) -> Result<DensityCurve<T>> {
    validate_grid(grid)?;
    let mu = ctx.forward().mu;
    let points = grid
        .iter()
        .map(|&x| (x, rnd.pdf(x / mu) / mu))
        .collect();
    Ok(DensityCurve { points })
}

/// Sample the standardized density q1(u) on a grid of u = x/mu.
pub fn standardized_density_curve<T: Real>(
    rnd: &dyn StandardizedRnd<T>,
    grid: &[T],
) -> Result<DensityCurve<T>> {
    validate_grid(grid)?;
    let points = grid.iter().map(|&u| (u, rnd.pdf(u))).collect();
    Ok(DensityCurve { points })
}

pub(crate) fn validate_grid<T: Real>(grid: &[T]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Domain("empty grid".into()));
    }
    if !(grid[0] > T::zero()) {
        return Err(Error::Domain("grid must be positive".into()));
    }
    for pair in grid.windows(2) {
        if !(pair[1] > pair[0]) {
            return Err(Error::Domain("grid must be strictly increasing".into()));
        }
    }
    Ok(())
}
