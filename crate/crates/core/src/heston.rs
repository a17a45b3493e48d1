//! Heston (1993) stochastic-volatility pricing via the characteristic
//! function, with the "little trap" branching and a cancellation-free
//! formulation that stays finite in the eta -> 0 degenerate limit.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::numerics::{integrate_semi_infinite, QuadratureSpec};
use crate::rnd::{DensityCurve, MarketContext};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HestonParams<T> {
    /// Mean-reversion speed kappa.
    pub kappa: T,
    /// Long-run variance theta.
    pub theta: T,
    /// Vol-of-vol eta.
    pub eta: T,
    /// Spot/variance correlation rho.
    pub rho: T,
    /// Initial variance V0.
    pub v0: T,
}

impl<T: Real> HestonParams<T> {
    pub fn new(kappa: T, theta: T, eta: T, rho: T, v0: T) -> Result<Self> {
        let p = Self { kappa, theta, eta, rho, v0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > T::zero() && self.kappa.is_finite()) {
            return Err(Error::Domain(format!("kappa must be > 0, got {}", self.kappa)));
        }
        if !(self.theta > T::zero() && self.theta.is_finite()) {
            return Err(Error::Domain(format!("theta must be > 0, got {}", self.theta)));
        }
        if !(self.eta > T::zero() && self.eta.is_finite()) {
            return Err(Error::Domain(format!("eta must be > 0, got {}", self.eta)));
        }
        if !(self.rho > T::of(-1.0) && self.rho < T::one()) {
            return Err(Error::Domain(format!("rho must be in (-1, 1), got {}", self.rho)));
        }
        if !(self.v0 > T::zero() && self.v0.is_finite()) {
            return Err(Error::Domain(format!("v0 must be > 0, got {}", self.v0)));
        }
        Ok(())
    }

    /// True when 2*kappa*theta >= eta^2, so the variance process stays
    /// strictly positive. Diagnostic only; pricing does not require it.
    pub fn feller_satisfied(&self) -> bool {
        T::of(2.0) * self.kappa * self.theta >= self.eta * self.eta
    }
}

/// Complex ln(1 + z) with full relative accuracy for small |z|.
fn ln1p_c<T: Real>(z: Complex<T>) -> Complex<T> {
    if z.norm_sqr() < T::of(1e-8) {
        // ln(1+z) = z - z^2/2 + z^3/3 - z^4/4, remainder O(|z|^5) < 1e-20
        let z2 = z * z;
        z - z2 * T::of(0.5) + z2 * z / T::of(3.0) - z2 * z2 * T::of(0.25)
    } else {
        (Complex::new(T::one(), T::zero()) + z).ln()
    }
}

/// Heston characteristic functions psi_j(omega) = E[e^{i omega ln S_T}]
/// under the measures of Heston's P1 (j = 1) and the risk-neutral P2 (j = 2).
///
/// Written so that every eta^2 in the denominator of Heston's C and D terms
/// cancels analytically:
///   beta - d = eta^2 p / (beta + d),   p = 2 u_j i omega - omega^2,
/// and the log term is expanded as a power series in
///   g = (beta - d)/(beta + d) = eta^2 p / (beta + d)^2
/// whenever |g| is small, dividing out eta^2 term by term.
pub fn char_fn<T: Real>(
    ctx: &MarketContext<T>,
    params: &HestonParams<T>,
    j: u8,
    omega: T,
) -> Complex<T> {
    let zero = T::zero();
    let one = T::one();
    let tau = ctx.ttm_years;
    let iw = Complex::new(zero, omega);
    let (u, b) = if j == 1 {
        (T::of(0.5), params.kappa - params.rho * params.eta)
    } else {
        (T::of(-0.5), params.kappa)
    };
    let a = params.kappa * params.theta;
    let eta2 = params.eta * params.eta;

    // beta = b - rho eta i omega; p = 2 u i omega - omega^2 (so q = eta^2 p)
    let beta = Complex::new(b, -params.rho * params.eta * omega);
    let p = iw * (T::of(2.0) * u) - Complex::new(omega * omega, zero);
    let d = (beta * beta - p * eta2).sqrt(); // principal branch: Re(d) >= 0
    let bpd = beta + d;
    // g = (beta - d)/(beta + d), computed without the catastrophic
    // subtraction beta - d when d ~ beta.
    let g = p * eta2 / (bpd * bpd);
    let emdt = (-d * tau).exp();

    // L / eta^2 where L = ln((1 - g e^{-d tau})/(1 - g)).
    let l_over_eta2 = if g.norm_sqr() < T::of(0.25) {
        // L = sum_{n>=1} g^n (1 - e^{-n d tau}) / n; divide one eta^2 out of g.
        let g_base = p / (bpd * bpd); // = g / eta^2
        let mut sum = Complex::new(zero, zero);
        let mut g_pow = Complex::new(one, zero); // g^{n-1}
        let mut e_pow = Complex::new(one, zero); // e^{-(n-1) d tau}
        for n in 1..=120u32 {
            e_pow = e_pow * emdt;
            let term = g_pow * (Complex::new(one, zero) - e_pow) / T::of(n as f64);
            sum = sum + term;
            if term.norm_sqr() < T::of(1e-64) {
                break;
            }
            g_pow = g_pow * g;
        }
        g_base * sum
    } else {
        (ln1p_c(-g * emdt) - ln1p_c(-g)) / eta2
    };

    // D = ((beta - d)/eta^2) (1 - e^{-d tau}) / (1 - g e^{-d tau})
    let dd = (p / bpd) * (Complex::new(one, zero) - emdt)
        / (Complex::new(one, zero) - g * emdt);

    // C = i omega (r - l) tau + a [ tau p/(beta+d) - 2 L/eta^2 ]
    let cc = iw * ((ctx.rate - ctx.div_yield) * tau)
        + (p / bpd * tau - l_over_eta2 * T::of(2.0)) * a;

    let x = ctx.spot.ln();
    (cc + dd * params.v0 + iw * x).exp()
}

/// Heston in-the-money probabilities P1, P2 at strike K (Heston Eq. 18).
pub fn pj<T: Real>(
    ctx: &MarketContext<T>,
    params: &HestonParams<T>,
    j: u8,
    strike: T,
    spec: &QuadratureSpec<T>,
) -> Result<T> {
    if !(strike > T::zero()) {
        return Err(Error::Domain(format!("strike must be > 0, got {strike}")));
    }
    let k = strike.ln();
    let integral = integrate_semi_infinite(
        |omega| {
            let psi = char_fn(ctx, params, j, omega);
            let phase = Complex::new(T::zero(), -omega * k).exp();
            (phase * psi / Complex::new(T::zero(), omega)).re
        },
        spec,
    )?;
    Ok(T::of(0.5) + integral / T::of(std::f64::consts::PI))
}

/// Call price S e^{-l t} P1 - K e^{-r t} P2, clamped to be non-negative.
pub fn call<T: Real>(
    ctx: &MarketContext<T>,
    params: &HestonParams<T>,
    strike: T,
    spec: &QuadratureSpec<T>,
) -> Result<T> {
    if strike == T::zero() {
        return Ok(ctx.spot * ctx.carry());
    }
    let p1 = pj(ctx, params, 1, strike, spec)?;
    let p2 = pj(ctx, params, 2, strike, spec)?;
    Ok((ctx.spot * ctx.carry() * p1 - strike * ctx.discount() * p2).max(T::zero()))
}

/// Spot delta e^{-l t} P1.
pub fn delta<T: Real>(
    ctx: &MarketContext<T>,
    params: &HestonParams<T>,
    strike: T,
    spec: &QuadratureSpec<T>,
) -> Result<T> {
    Ok(ctx.carry() * pj(ctx, params, 1, strike, spec)?)
}

/// Undiscounted P1, as quoted in delta-comparison tables.
pub fn delta1<T: Real>(
    ctx: &MarketContext<T>,
    params: &HestonParams<T>,
    strike: T,
    spec: &QuadratureSpec<T>,
) -> Result<T> {
    pj(ctx, params, 1, strike, spec)
}

/// Risk-neutral cdf of S_T at K: 1 - P2(K).
pub fn cdf<T: Real>(
    ctx: &MarketContext<T>,
    params: &HestonParams<T>,
    strike: T,
    spec: &QuadratureSpec<T>,
) -> Result<T> {
    Ok((T::one() - pj(ctx, params, 2, strike, spec)?).clamp(T::zero(), T::one()))
}

/// Risk-neutral density of ln S_T by Fourier inversion of psi_2.
pub fn density_log<T: Real>(
    ctx: &MarketContext<T>,
    params: &HestonParams<T>,
    log_price: T,
    spec: &QuadratureSpec<T>,
) -> Result<T> {
    let integral = integrate_semi_infinite(
        |omega| {
            let psi = char_fn(ctx, params, 2, omega);
            let phase = Complex::new(T::zero(), -omega * log_price).exp();
            (phase * psi).re
        },
        spec,
    )?;
    Ok((integral / T::of(std::f64::consts::PI)).max(T::zero()))
}

/// Risk-neutral density of S_T itself at price level K.
pub fn density<T: Real>(
    ctx: &MarketContext<T>,
    params: &HestonParams<T>,
    price: T,
    spec: &QuadratureSpec<T>,
) -> Result<T> {
    if !(price > T::zero()) {
        return Err(Error::Domain(format!("price must be > 0, got {price}")));
    }
    Ok(density_log(ctx, params, price.ln(), spec)? / price)
}

/// Density of S_T sampled on a uniform grid of `n` points over
/// [lo, hi] in price space.
pub fn density_curve<T: Real>(
    ctx: &MarketContext<T>,
    params: &HestonParams<T>,
    lo: T,
    hi: T,
    n: usize,
    spec: &QuadratureSpec<T>,
) -> Result<DensityCurve<T>> {
    if !(lo > T::zero() && hi > lo) || n < 2 {
        return Err(Error::Domain(format!(
            "need 0 < lo < hi and n >= 2, got lo={lo} hi={hi} n={n}"
        )));
    }
    let step = (hi - lo) / T::of((n - 1) as f64);
    let mut points = Vec::with_capacity(n);
    for i in 0..n {
        let x = lo + step * T::of(i as f64);
        points.push((x, density(ctx, params, x, spec)?));
    }
    Ok(DensityCurve { points })
}

/// Density of the forward-standardized terminal price s = S_T / mu where
/// mu = S e^{(r - l) t}, on a uniform grid over [lo, hi].
pub fn standardized_density_curve<T: Real>(
    ctx: &MarketContext<T>,
    params: &HestonParams<T>,
    lo: T,
    hi: T,
    n: usize,
    spec: &QuadratureSpec<T>,
) -> Result<DensityCurve<T>> {
    let mu = ctx.forward().mu;
    let curve = density_curve(ctx, params, lo * mu, hi * mu, n, spec)?;
    Ok(DensityCurve {
        points: curve
            .points
            .into_iter()
            .map(|(x, q)| (x / mu, q * mu))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bs::{bs_call, BsParams};

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn spy_ctx() -> MarketContext<f64> {
        MarketContext::new(445.92, 0.0016, 0.0123, 63.0 / 365.0).unwrap()
    }

    fn spy_params() -> HestonParams<f64> {
        HestonParams::new(15.03132587, 0.02793781, 2.0, -0.77469470, 0.1615 * 0.1615)
            .unwrap()
    }

    #[test]
    fn char_fn_at_zero_is_one() {
        let ctx = spy_ctx();
        let p = spy_params();
        for j in [1u8, 2u8] {
            let v = char_fn(&ctx, &p, j, 0.0);
            close(v.re, 1.0, 1e-14);
            close(v.im, 0.0, 1e-14);
        }
    }

    #[test]
    fn mean_log_price_matches_analytic_value() {
        // (ln psi_2)'(0)/i = E[ln S_T] = ln S + (r-l)t - (1/2) int_0^t E[V_s] ds
        // with int E[V_s] ds = theta t + (v0 - theta)(1 - e^{-kappa t})/kappa.
        let ctx = spy_ctx();
        let p = spy_params();
        let h = 1e-5;
        let d = (char_fn(&ctx, &p, 2, h).ln() - char_fn(&ctx, &p, 2, -h).ln())
            / num_complex::Complex::new(0.0, 2.0 * h);
        let t = ctx.ttm_years;
        let int_v = p.theta * t + (p.v0 - p.theta) * (1.0 - (-p.kappa * t).exp()) / p.kappa;
        let want = ctx.spot.ln() + (ctx.rate - ctx.div_yield) * t - 0.5 * int_v;
        close(d.re, want, 1e-8);
    }

    #[test]
    fn degenerate_limit_matches_black_scholes() {
        // eta -> 0 and v0 = theta makes variance constant: BS with sigma^2 = theta.
        let ctx = spy_ctx();
        let theta: f64 = 0.1615 * 0.1615;
        let p = HestonParams::new(2.0, theta, 1e-7, -0.5, theta).unwrap();
        let spec = QuadratureSpec::default();
        let bs = BsParams { sigma: theta.sqrt() };
        for k in [380.0, 420.0, 446.0, 470.0, 510.0] {
            let hc = call(&ctx, &p, k, &spec).unwrap();
            let bc = bs_call(&ctx, k, &bs).unwrap();
            close(hc, bc, 1e-6);
        }
    }

    #[test]
    fn put_call_parity_from_probabilities() {
        let ctx = spy_ctx();
        let p = spy_params();
        let spec = QuadratureSpec::default();
        let k = 445.0;
        let c = call(&ctx, &p, k, &spec).unwrap();
        let p2 = pj(&ctx, &p, 2, k, &spec).unwrap();
        let put = c - ctx.spot * ctx.carry() + k * ctx.discount();
        // put >= 0 and P2 = Q(S_T > K) in (0, 1)
        assert!(put > 0.0);
        assert!(p2 > 0.0 && p2 < 1.0);
    }

    #[test]
    fn pj_monotone_in_strike() {
        let ctx = spy_ctx();
        let p = spy_params();
        let spec = QuadratureSpec::default();
        for j in [1u8, 2u8] {
            let mut prev = 1.0;
            for k in [350.0, 400.0, 430.0, 450.0, 480.0, 550.0] {
                let v = pj(&ctx, &p, j, k, &spec).unwrap();
                assert!(v < prev + 1e-10, "P{j}({k}) = {v} not decreasing");
                assert!((-1e-8..=1.0 + 1e-8).contains(&v));
                prev = v;
            }
        }
    }

    #[test]
    fn density_integrates_to_one_with_forward_mean() {
        let ctx = spy_ctx();
        let p = spy_params();
        let spec = QuadratureSpec::default();
        let curve = density_curve(&ctx, &p, 150.0, 750.0, 601, &spec).unwrap();
        close(curve.mass(), 1.0, 2e-3);
        let m = curve.moments().unwrap();
        close(m.mean, ctx.forward().mu, 0.5);
    }

    #[test]
    fn density_matches_cdf_derivative() {
        let ctx = spy_ctx();
        let p = spy_params();
        let spec = QuadratureSpec::default();
        for k in [420.0, 446.0, 465.0] {
            let h = 0.05;
            let num = (cdf(&ctx, &p, k + h, &spec).unwrap()
                - cdf(&ctx, &p, k - h, &spec).unwrap())
                / (2.0 * h);
            let q = density(&ctx, &p, k, &spec).unwrap();
            close(num, q, 1e-5);
        }
    }

    #[test]
    fn call_decreasing_and_convex_in_strike() {
        let ctx = spy_ctx();
        let p = spy_params();
        let spec = QuadratureSpec::default();
        let ks: Vec<f64> = (0..24).map(|i| 360.0 + 10.0 * i as f64).collect();
        let cs: Vec<f64> = ks.iter().map(|&k| call(&ctx, &p, k, &spec).unwrap()).collect();
        for w in cs.windows(2) {
            assert!(w[1] < w[0]);
        }
        for w in cs.windows(3) {
            assert!(w[0] - 2.0 * w[1] + w[2] > -1e-8);
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(HestonParams::new(0.0, 0.1, 0.5, -0.5, 0.04).is_err());
        assert!(HestonParams::new(2.0, -0.1, 0.5, -0.5, 0.04).is_err());
        assert!(HestonParams::new(2.0, 0.1, 0.0, -0.5, 0.04).is_err());
        assert!(HestonParams::new(2.0, 0.1, 0.5, -1.0, 0.04).is_err());
        assert!(HestonParams::new(2.0, 0.1, 0.5, -0.5, 0.0).is_err());
    }

    #[test]
    fn feller_diagnostic() {
        assert!(HestonParams::new(2.0_f64, 0.09, 0.5, -0.5, 0.04)
            .unwrap()
            .feller_satisfied());
        assert!(!spy_params().feller_satisfied());
    }
}
