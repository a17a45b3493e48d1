//! Derivative-free minimizers used by the calibration layer: Nelder-Mead
//! simplex in an unconstrained transformed space, and golden-section search
//! for one-dimensional problems.

use crate::error::{Error, Result};

/// Bijections between a constrained parameter and the unconstrained line,
/// so the simplex never proposes infeasible points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transform {
    Identity,
    /// (0, inf) via log/exp.
    LogPositive,
    /// (lo, hi) via the logistic map.
    Logistic { lo: f64, hi: f64 },
    /// (-1, 1) via tanh/atanh.
    Tanh,
}

impl Transform {
    /// Constrained -> unconstrained.
    pub fn forward(&self, x: f64) -> f64 {
        match *self {
            Transform::Identity => x,
            Transform::LogPositive => x.ln(),
            Transform::Logistic { lo, hi } => {
                let u = ((x - lo) / (hi - x)).max(1e-300);
                u.ln()
            }
            Transform::Tanh => x.atanh(),
        }
    }

    /// Unconstrained -> constrained.
    pub fn inverse(&self, y: f64) -> f64 {
        match *self {
            Transform::Identity => y,
            Transform::LogPositive => y.exp(),
            Transform::Logistic { lo, hi } => {
                let s = 1.0 / (1.0 + (-y).exp());
                // keep strictly inside the open interval even when the
                // sigmoid saturates in floating point
                let pad = (hi - lo) * 1e-12;
                (lo + (hi - lo) * s).clamp(lo + pad, hi - pad)
            }
            Transform::Tanh => y.tanh(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Standard Nelder-Mead with adaptive-free coefficients (1, 2, 1/2, 1/2).
/// Stops when the simplex's function spread falls below `f_tol` and its
/// longest edge below `x_tol`, or after `max_iter` iterations.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    initial_step: f64,
    f_tol: f64,
    x_tol: f64,
    max_iter: usize,
) -> Result<NelderMeadResult> {
    let n = x0.len();
    if n == 0 {
        return Err(Error::Calibration("empty parameter vector".into()));
    }
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        let h = if v[i].abs() > 1e-8 { initial_step * v[i].abs() } else { initial_step };
        v[i] += h;
        simplex.push(v);
    }
    let mut fvals: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        // order ascending by f
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| fvals[a].partial_cmp(&fvals[b]).unwrap_or(std::cmp::Ordering::Equal));
        let ordered: Vec<Vec<f64>> = idx.iter().map(|&i| simplex[i].clone()).collect();
        let ordered_f: Vec<f64> = idx.iter().map(|&i| fvals[i]).collect();
        simplex = ordered;
        fvals = ordered_f;

        let f_spread = fvals[n] - fvals[0];
        let x_spread = (0..n)
            .map(|j| {
                simplex
                    .iter()
                    .map(|v| v[j])
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                        (lo.min(x), hi.max(x))
                    })
            })
            .map(|(lo, hi)| hi - lo)
            .fold(0.0_f64, f64::max);
        if f_spread.abs() <= f_tol && x_spread <= x_tol {
            converged = true;
            break;
        }

        // centroid of all but worst
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|v| v[j]).sum::<f64>() / n as f64)
            .collect();
        let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
            a.iter().zip(b).map(|(&x, &y)| x + t * (y - x)).collect()
        };

        let reflected = lerp(&centroid, &simplex[n], -1.0);
        let f_r = f(&reflected);
        if f_r < fvals[0] {
            let expanded = lerp(&centroid, &simplex[n], -2.0);
            let f_e = f(&expanded);
            if f_e < f_r {
                simplex[n] = expanded;
                fvals[n] = f_e;
            } else {
                simplex[n] = reflected;
                fvals[n] = f_r;
            }
        } else if f_r < fvals[n - 1] {
            simplex[n] = reflected;
            fvals[n] = f_r;
        } else {
            let contracted = if f_r < fvals[n] {
                lerp(&centroid, &reflected, 0.5)
            } else {
                lerp(&centroid, &simplex[n], 0.5)
            };
            let f_c = f(&contracted);
            if f_c < fvals[n].min(f_r) {
                simplex[n] = contracted;
                fvals[n] = f_c;
            } else {
                // shrink toward the best vertex
                for i in 1..=n {
                    simplex[i] = lerp(&simplex[0], &simplex[i], 0.5);
                    fvals[i] = f(&simplex[i]);
                }
            }
        }
    }

    let mut best = 0;
    for i in 1..=n {
        if fvals[i] < fvals[best] {
            best = i;
        }
    }
    Ok(NelderMeadResult {
        x: simplex[best].clone(),
        fx: fvals[best],
        iterations,
        converged,
    })
}

/// Golden-section minimization of a unimodal function on [lo, hi].
pub fn golden_minimize<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    x_tol: f64,
) -> Result<(f64, f64)> {
    if !(hi > lo) {
        return Err(Error::Domain(format!("need lo < hi, got [{lo}, {hi}]")));
    }
    let inv_phi = 0.618_033_988_749_894_8_f64;
    let mut a = lo;
    let mut b = hi;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..400 {
        if b - a <= x_tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    Ok((x, fx))
}
