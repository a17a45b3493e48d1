//! Inverse Generalized Gamma standardized RND: (U/λ*)^{-ξ*} ~ Gamma(α, 1),
//! the positively skewed counterpart of the GG family. Variance existence
//! requires ξ* > 2/α.

use crate::error::{Error, Result};
use crate::numerics::{find_root, gamma_pdf, ln_gamma, reg_gamma_p};
use crate::rnd::{MarketContext, StandardizedRnd};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IggParams<T> {
    pub alpha: T,
    pub sigma: T,
    pub nu: T,
    pub xi_star: T,
    pub lambda_star: T,
    pub h1: T,
    pub h2: T,
}

/// ln of h̃_j(ξ) = Γ(α - j/ξ)/Γ(α), defined for ξ > j/α.
fn ln_h<T: Real>(alpha: T, xi: T, j: T) -> Result<T> {
    let arg = alpha - j / xi;
    if !(arg > T::zero()) {
        return Err(Error::MomentNonexistence(format!(
            "alpha - {j}/xi = {arg} <= 0 (requires xi > {j}/alpha)"
        )));
    }
    Ok(ln_gamma(arg)? - ln_gamma(alpha)?)
}

/// Solve h̃2(ξ)/h̃1²(ξ) = 1 + ν² on (2/α, ∞).
///
/// The ratio falls monotonically from +∞ at ξ = 2/α to 1 as ξ → ∞, so a
/// unique root exists for every ν > 0; the error path covers numerical
/// bracket failures.
pub fn solve_shape<T: Real>(alpha: T, nu: T) -> Result<T> {
    if !(alpha > T::zero()) || !(nu > T::zero()) {
        return Err(Error::Domain(format!(
            "solve_shape requires alpha > 0 and nu > 0, got alpha={alpha}, nu={nu}"
        )));
    }
    let target = (T::one() + nu * nu).ln();
    let resid = |xi: T| -> T {
        match (ln_h(alpha, xi, T::of(2.0)), ln_h(alpha, xi, T::one())) {
            (Ok(l2), Ok(l1)) => l2 - T::of(2.0) * l1 - target,
            _ => T::nan(),
        }
    };
    let barrier = T::of(2.0) / alpha;
    let mut lo = barrier * (T::one() + T::of(1e-9));
    if !(resid(lo) > T::zero()) {
        // extremely small alpha can underflow right at the barrier
        lo = barrier * (T::one() + T::of(1e-6));
        if !(resid(lo) > T::zero()) {
            return Err(Error::Infeasible(format!(
                "IGG shape equation has no root above xi = 2/alpha for alpha={alpha}, nu={nu}"
            )));
        }
    }
    let mut hi = (barrier * T::of(8.0)).max(T::of(64.0));
    let cap = barrier.max(T::one()) * T::of(1e9);
    while resid(hi) > T::zero() {
        hi = hi * T::of(2.0);
        if hi > cap {
            return Err(Error::Infeasible(format!(
                "IGG shape equation has no root in (2/alpha, {cap}) for alpha={alpha}, nu={nu}"
            )));
        }
    }
    find_root(resid, lo, hi, T::of(1e-13) * hi)
}

impl<T: Real> IggParams<T> {
    pub fn solve(alpha: T, sigma: T, ttm_years: T) -> Result<Self> {
        if !(sigma > T::zero()) {
            return Err(Error::Domain(format!("sigma must be > 0, got {sigma}")));
        }
        if !(ttm_years > T::zero()) {
            return Err(Error::Domain(format!("ttm must be > 0, got {ttm_years}")));
        }
        let nu = sigma * ttm_years.sqrt();
        let xi_star = solve_shape(alpha, nu)?;
        let h1 = ln_h(alpha, xi_star, T::one())?.exp();
        let h2 = ln_h(alpha, xi_star, T::of(2.0))?.exp();
        Ok(Self {
            alpha,
            sigma,
            nu,
            xi_star,
            lambda_star: T::one() / h1,
            h1,
            h2,
        })
    }

    pub fn shape_residual(&self) -> T {
        self.h2 / (self.h1 * self.h1) - T::one() - self.nu * self.nu
    }

    /// Standardized raw moment m_j = h̃_j / h̃1^j; exists only for ξ* > j/α.
    pub fn moment(&self, j: u32) -> Result<T> {
        let j_t = T::of(j as f64);
        let lh = ln_h(self.alpha, self.xi_star, j_t)?;
        Ok((lh - j_t * self.h1.ln()).exp())
    }

    /// Skewness and excess kurtosis; requires ξ* > 4/α.
    pub fn skew_kurt(&self) -> Result<(T, T)> {
        if !(self.xi_star > T::of(4.0) / self.alpha) {
            return Err(Error::MomentNonexistence(format!(
                "kurtosis requires xi* > 4/alpha, got xi*={}, alpha={}",
                self.xi_star, self.alpha
            )));
        }
        let nu = self.nu;
        let nu2 = nu * nu;
        let m3 = self.moment(3)?;
        let m4 = self.moment(4)?;
        let three = T::of(3.0);
        let skew = (m3 - three * nu2 - T::one()) / (nu2 * nu);
        let kurt_raw = (m4 - T::of(4.0) * nu2 * nu * skew - T::of(6.0) * nu2 - T::one())
            / (nu2 * nu2);
        Ok((skew, kurt_raw - three))
    }

    /// Closed-form call: C = S e^{-lt} G(d; α-1/ξ*) - K e^{-rt} G(d; α)
    /// with d = (K h̃1/μ)^{-ξ*}.
    pub fn call(&self, ctx: &MarketContext<T>, strike: T) -> Result<T> {
        if !(strike >= T::zero()) {
            return Err(Error::Domain(format!("strike must be >= 0, got {strike}")));
        }
        let spot_leg = ctx.spot * ctx.carry();
        if strike == T::zero() {
            return Ok(spot_leg);
        }
        if !(self.alpha - T::one() / self.xi_star > T::zero()) {
            return Err(Error::MomentNonexistence(
                "call pricing requires alpha - 1/xi* > 0".into(),
            ));
        }
        let mu = ctx.forward().mu;
        let d = (strike * self.h1 / mu).powf(-self.xi_star);
        let g_shifted = reg_gamma_p(self.alpha - T::one() / self.xi_star, d)?;
        let g_plain = reg_gamma_p(self.alpha, d)?;
        let c = spot_leg * g_shifted - strike * ctx.discount() * g_plain;
        Ok(c.max(T::zero()))
    }
}

impl<T: Real> StandardizedRnd<T> for IggParams<T> {
    /// Q1(u) = 1 - G((u/λ*)^{-ξ*}; α, 1); nondecreasing since the inner
    /// power is decreasing in u.
    fn cdf(&self, u: T) -> T {
        if u <= T::zero() {
            return T::zero();
        }
        let y = (u / self.lambda_star).powf(-self.xi_star);
        match reg_gamma_p(self.alpha, y) {
            Ok(g) => T::one() - g,
            Err(_) => T::nan(),
        }
    }

    fn pdf(&self, u: T) -> T {
        if u <= T::zero() {
            return T::zero();
        }
        let w = u / self.lambda_star;
        let y = w.powf(-self.xi_star);
        let base = gamma_pdf(y, self.alpha, T::one()).unwrap_or(T::nan());
        self.xi_star / self.lambda_star * w.powf(-self.xi_star - T::one()) * base
    }

    fn delta1(&self, s: T) -> T {
        if s <= T::zero() {
            return T::one();
        }
        let y = (s / self.lambda_star).powf(-self.xi_star);
        reg_gamma_p(self.alpha - T::one() / self.xi_star, y).unwrap_or(T::nan())
    }

    fn raw_moment(&self, j: u32) -> Result<T> {
        self.moment(j)
    }

    fn nu(&self) -> T {
        self.nu
    }
}
