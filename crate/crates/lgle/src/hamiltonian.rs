//! The log-gamma walk and interaction Hamiltonians, their cumulant
//! generating function, and the numeric self-checks on both.
//!
//! The walk increment has density `G_theta(x) = exp(-H_rw(x))` with
//! `H_rw(x) = theta*x + exp(-x) + ln_gamma(theta)`; the interaction penalty
//! on the gap between consecutive curves is `H(x) = exp(x)`.

use crate::error::{Error, Result};
use crate::grid::{log_sum_exp_slice, Grid};
use crate::special::{digamma, ln_gamma, trigamma};
use serde::Serialize;

/// Walk Hamiltonian `theta*x + e^{-x} + ln Gamma(theta)`.
#[inline]
pub fn h_rw(theta: f64, ln_gamma_theta: f64, x: f64) -> f64 {
    theta * x + (-x).exp() + ln_gamma_theta
}

/// Log of the walk increment density.
#[inline]
pub fn ln_g(theta: f64, ln_gamma_theta: f64, x: f64) -> f64 {
    -h_rw(theta, ln_gamma_theta, x)
}

/// Interaction Hamiltonian `e^x`.
#[inline]
pub fn h_int(x: f64) -> f64 {
    x.exp()
}

/// Cumulant generating function of the walk increment,
/// `ln_gamma(theta - t) - ln_gamma(theta)` for t < theta.
pub fn lambda(theta: f64, t: f64) -> Result<f64> {
    if !(t < theta) {
        return Err(Error::domain("lambda", format!("t = {t} >= theta = {theta}")));
    }
    Ok(ln_gamma(theta - t) - ln_gamma(theta))
}

/// First derivative of the cumulant generating function, `-digamma(theta-t)`.
pub fn lambda_prime(theta: f64, t: f64) -> Result<f64> {
    if !(t < theta) {
        return Err(Error::domain("lambda_prime", format!("t = {t}")));
    }
    Ok(-digamma(theta - t)?)
}

/// Second derivative, `trigamma(theta - t)`.
pub fn lambda_second(theta: f64, t: f64) -> Result<f64> {
    if !(t < theta) {
        return Err(Error::domain("lambda_second", format!("t = {t}")));
    }
    trigamma(theta - t)
}

/// Numeric validation report for the two Hamiltonians at a given theta.
#[derive(Debug, Clone, Serialize)]
pub struct HamiltonianReport {
    pub theta: f64,
    /// |trapezoid integral of G_theta - 1|
    pub normalization_residual: f64,
    /// most negative second difference of h_rw on the probe grid (>= 0 means convex)
    pub h_rw_convexity_min: f64,
    /// most negative second difference of the interaction on the probe grid
    pub h_int_convexity_min: f64,
    /// sup over the t-grid of |numeric log-MGF - closed-form cumulant fn|
    pub log_mgf_max_error: f64,
    pub t_grid_lo: f64,
    pub t_grid_hi: f64,
}

/// Quadrature and convexity checks of the walk and interaction Hamiltonians.
///
/// The log-MGF of the increment is integrated numerically over a wide grid
/// and compared with the closed form on a t-grid inside (-2, theta - 0.05).
pub fn validate_hamiltonians(theta: f64) -> Result<HamiltonianReport> {
    if !(theta > 0.0) {
        return Err(Error::domain(
            "validate_hamiltonians",
            format!("theta = {theta}"),
        ));
    }
    let lg = ln_gamma(theta);
    let sigma = trigamma(theta)?.sqrt();
    let mean = -digamma(theta)?;
    // The t-grid ends 0.05 below theta, where the tilted integrand decays
    // only like e^{-0.05 x}; the window must reach ~950 units right of the
    // mean before that tail drops under 1e-20.
    let lo = mean - 30.0 * sigma - 30.0;
    let hi = mean + 30.0 * sigma + 950.0;
    let grid = Grid::new(lo, hi, 1 << 15)?;
    let h = grid.step();

    let ln_gv: Vec<f64> = grid.nodes().map(|x| ln_g(theta, lg, x)).collect();
    let mut mass_terms: Vec<f64> = ln_gv.clone();
    // trapezoid end weights
    let n = mass_terms.len();
    mass_terms[0] += (0.5f64).ln();
    mass_terms[n - 1] += (0.5f64).ln();
    let normalization_residual = ((log_sum_exp_slice(&mass_terms) + h.ln()).exp() - 1.0).abs();

    // convexity by second differences
    let probe = Grid::new(-20.0, 20.0, 4001)?;
    let dh = probe.step();
    let mut min_hrw = f64::INFINITY;
    let mut min_hint = f64::INFINITY;
    for i in 1..probe.len() - 1 {
        let x = probe.node(i);
        let d2_rw = h_rw(theta, lg, x - dh) - 2.0 * h_rw(theta, lg, x) + h_rw(theta, lg, x + dh);
        let d2_int = h_int(x - dh) - 2.0 * h_int(x) + h_int(x + dh);
        min_hrw = min_hrw.min(d2_rw);
        min_hint = min_hint.min(d2_int);
    }

    // log-MGF along a t-grid
    let t_lo = -2.0;
    let t_hi = theta - 0.05;
    let mut max_err: f64 = 0.0;
    let steps = 40;
    for k in 0..=steps {
        let t = t_lo + (t_hi - t_lo) * k as f64 / steps as f64;
        let terms: Vec<f64> = grid
            .nodes()
            .zip(ln_gv.iter())
            .map(|(x, lgx)| t * x + lgx)
            .collect();
        let numeric = log_sum_exp_slice(&terms) + h.ln();
        let exact = lambda(theta, t)?;
        max_err = max_err.max((numeric - exact).abs());
    }

    Ok(HamiltonianReport {
        theta,
        normalization_residual,
        h_rw_convexity_min: min_hrw,
        h_int_convexity_min: min_hint,
        log_mgf_max_error: max_err,
        t_grid_lo: t_lo,
        t_grid_hi: t_hi,
    })
}
