//! Black-Scholes pricing, delta, implied-volatility inversion, and the
//! unit-mean log-normal standardized RND it corresponds to.

use crate::error::{Error, Result};
use crate::numerics::{find_root, norm_cdf, norm_pdf};
use crate::rnd::{MarketContext, StandardizedRnd};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsParams<T> {
    pub sigma: T,
}

impl<T: Real> BsParams<T> {
    pub fn new(sigma: T) -> Result<Self> {
        if !(sigma > T::zero()) {
            return Err(Error::Domain(format!("sigma must be > 0, got {sigma}")));
        }
        Ok(Self { sigma })
    }

    pub fn nu(&self, ctx: &MarketContext<T>) -> T {
        self.sigma * ctx.ttm_years.sqrt()
    }
}

fn d1_d2<T: Real>(ctx: &MarketContext<T>, strike: T, sigma: T) -> (T, T) {
    let nu = sigma * ctx.ttm_years.sqrt();
    let half = T::of(0.5);
    let d1 = ((ctx.spot / strike).ln()
        + (ctx.rate - ctx.div_yield + half * sigma * sigma) * ctx.ttm_years)
        / nu;
    (d1, d1 - nu)
}

/// Dividend-adjusted Black-Scholes call.
pub fn bs_call<T: Real>(ctx: &MarketContext<T>, strike: T, params: &BsParams<T>) -> Result<T> {
    if !(strike >= T::zero()) {
        return Err(Error::Domain(format!("strike must be >= 0, got {strike}")));
    }
    if strike == T::zero() {
        return Ok(ctx.spot * ctx.carry());
    }
    let (d1, d2) = d1_d2(ctx, strike, params.sigma);
    Ok(ctx.spot * ctx.carry() * norm_cdf(d1) - strike * ctx.discount() * norm_cdf(d2))
}

/// e^{-lt} Φ(d1).
pub fn bs_delta<T: Real>(ctx: &MarketContext<T>, strike: T, params: &BsParams<T>) -> Result<T> {
    if !(strike > T::zero()) {
        return Err(Error::Domain(format!("strike must be > 0, got {strike}")));
    }
    let (d1, _) = d1_d2(ctx, strike, params.sigma);
    Ok(ctx.carry() * norm_cdf(d1))
}

/// Undiscounted Φ(d1), as quoted in delta-comparison tables.
pub fn bs_delta1<T: Real>(ctx: &MarketContext<T>, strike: T, params: &BsParams<T>) -> Result<T> {
    if !(strike > T::zero()) {
        return Err(Error::Domain(format!("strike must be > 0, got {strike}")));
    }
    let (d1, _) = d1_d2(ctx, strike, params.sigma);
    Ok(norm_cdf(d1))
}

const IV_LO: f64 = 1e-4;
const IV_HI: f64 = 5.0;

/// Invert the BS formula for sigma by safeguarded root finding on [1e-4, 5].
pub fn implied_vol<T: Real>(ctx: &MarketContext<T>, strike: T, price: T) -> Result<T> {
    if !(strike > T::zero()) {
        return Err(Error::Domain(format!("strike must be > 0, got {strike}")));
    }
    let upper = ctx.spot * ctx.carry();
    let lower = (upper - strike * ctx.discount()).max(T::zero());
    if !(price > lower && price < upper) {
        return Err(Error::PriceOutOfBounds(format!(
            "price {price} outside ({lower}, {upper}) at strike {strike}"
        )));
    }
    let f = |sigma: T| {
        bs_call(ctx, strike, &BsParams { sigma }).unwrap_or(T::nan()) - price
    };
    let lo = T::of(IV_LO);
    let hi = T::of(IV_HI);
    if f(lo) > T::zero() {
        // price below the sigma->0 limit by less than the pricing tolerance
        return Ok(lo);
    }
    if f(hi) < T::zero() {
        return Err(Error::PriceOutOfBounds(format!(
            "price {price} above bs_call at sigma={IV_HI}"
        )));
    }
    find_root(f, lo, hi, T::of(1e-12))
}

/// Unit-mean log-normal standardized RND: log U ~ N(-ν²/2, ν²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LognormalRnd<T> {
    pub nu: T,
}

impl<T: Real> LognormalRnd<T> {
    pub fn new(nu: T) -> Result<Self> {
        if !(nu > T::zero()) {
            return Err(Error::Domain(format!("nu must be > 0, got {nu}")));
        }
        Ok(Self { nu })
    }

    /// Closed-form skew and excess kurtosis of the log-normal.
    pub fn skew_kurt(&self) -> (T, T) {
        let e = (self.nu * self.nu).exp();
        let skew = (e + T::of(2.0)) * (e - T::one()).sqrt();
        let kurt = e * e * e * e + T::of(2.0) * e * e * e + T::of(3.0) * e * e - T::of(6.0);
        (skew, kurt)
    }
}

impl<T: Real> StandardizedRnd<T> for LognormalRnd<T> {
    fn cdf(&self, u: T) -> T {
        if u <= T::zero() {
            return T::zero();
        }
        let half = T::of(0.5);
        norm_cdf((u.ln() + half * self.nu * self.nu) / self.nu)
    }

    fn pdf(&self, u: T) -> T {
        if u <= T::zero() {
            return T::zero();
        }
        let half = T::of(0.5);
        let z = (u.ln() + half * self.nu * self.nu) / self.nu;
        norm_pdf(z) / (u * self.nu)
    }

    fn delta1(&self, s: T) -> T {
        if s <= T::zero() {
            return T::one();
        }
        let half = T::of(0.5);
        norm_cdf((-(s.ln()) + half * self.nu * self.nu) / self.nu)
    }

    fn raw_moment(&self, j: u32) -> Result<T> {
        let j_t = T::of(j as f64);
        Ok((j_t * (j_t - T::one()) * self.nu * self.nu * T::of(0.5)).exp())
    }

    fn nu(&self) -> T {
        self.nu
    }
}
