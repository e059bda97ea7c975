//! Random-variate generation: gamma, inverse-gamma (through its logarithm)
//! and the order-0 generalized-inverse-Gaussian law that appears in both the
//! triangle-array initializer and the heat-bath conditionals.

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Standard normal via the polar method.
pub fn standard_normal(rng: &mut RngStream) -> f64 {
    loop {
        let u = 2.0 * rng.uniform() - 1.0;
        let v = 2.0 * rng.uniform() - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return u * ((-2.0 * s.ln()) / s).sqrt();
        }
    }
}

/// Log of a Gamma(shape, 1) variate, exact for all shape > 0.
///
/// Marsaglia-Tsang squeeze for shape >= 1, with the usual boost
/// `ln G(a) = ln G(a+1) + ln(U)/a` below 1; returning the log keeps small
/// shapes from underflowing.
pub fn sample_gamma_ln(shape: f64, rng: &mut RngStream) -> Result<f64> {
    if !(shape > 0.0) {
        return Err(Error::domain(
            "sample_gamma",
            format!("shape = {shape} must be > 0"),
        ));
    }
    let boost = if shape < 1.0 {
        Some(rng.uniform().ln() / shape)
    } else {
        None
    };
    let a = if shape < 1.0 { shape + 1.0 } else { shape };
    let d = a - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = standard_normal(rng);
        let t = 1.0 + c * x;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u = rng.uniform();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            let ln_g = d.ln() + 3.0 * t.ln();
            return Ok(ln_g + boost.unwrap_or(0.0));
        }
    }
}

/// Gamma(shape, 1) variate.
pub fn sample_gamma(shape: f64, rng: &mut RngStream) -> Result<f64> {
    sample_gamma_ln(shape, rng).map(f64::exp)
}

/// Log of an inverse-gamma(theta) variate (reciprocal of a Gamma(theta) draw).
pub fn sample_inverse_gamma_ln(theta: f64, rng: &mut RngStream) -> Result<f64> {
    sample_gamma_ln(theta, rng).map(|ln_g| -ln_g)
}

/// Log of an order-0 generalized-inverse-Gaussian variate, with the
/// parameters also given on log scale.
///
/// In log-coordinates u = ln v the target is proportional to
/// `exp(-beta * cosh(u - u0))` with `u0 = (ln_chi - ln_psi)/2` and
/// `beta = exp((ln_chi + ln_psi)/2)`; we reject from a flat center with
/// double-exponential tails hung at the e^{-1} level.
pub fn sample_gig0_ln_params(ln_chi: f64, ln_psi: f64, rng: &mut RngStream) -> Result<f64> {
    if !ln_chi.is_finite() || !ln_psi.is_finite() {
        return Err(Error::domain(
            "sample_gig0",
            format!("log-parameters must be finite, got ({ln_chi}, {ln_psi})"),
        ));
    }
    let u0 = 0.5 * (ln_chi - ln_psi);
    let ln_beta = 0.5 * (ln_chi + ln_psi);
    if ln_beta > 700.0 {
        return Err(Error::domain(
            "sample_gig0",
            format!("beta overflow (ln beta = {ln_beta})"),
        ));
    }
    let beta = ln_beta.exp();
    // ln f(w) = -beta*(cosh w - 1), normalized to 0 at the mode
    let ln_f = |w: f64| {
        let s = (0.5 * w).sinh();
        -beta * 2.0 * s * s
    };
    let e = 1.0 / beta;
    // f(w1) = e^{-1}; lambda is the tangent slope there, sqrt(2 beta + 1)
    let w1 = (e + (2.0 * e + e * e).sqrt()).ln_1p();
    let lambda = (2.0 * beta + 1.0).sqrt();
    let center_mass = 2.0 * w1;
    let tail_mass = 2.0 * (-1.0f64).exp() / lambda;
    let p_center = center_mass / (center_mass + tail_mass);
    loop {
        let (w, ln_hat) = if rng.uniform() < p_center {
            ((2.0 * rng.uniform() - 1.0) * w1, 0.0)
        } else {
            let excess = -rng.uniform().ln() / lambda;
            let sign = if rng.next_u64() & 1 == 0 { 1.0 } else { -1.0 };
            (sign * (w1 + excess), -1.0 - lambda * excess)
        };
        if rng.uniform().ln() < ln_f(w) - ln_hat {
            return Ok(u0 + w);
        }
    }
}

/// Order-0 GIG variate with density proportional to
/// `v^{-1} exp(-(chi/v + psi*v)/2)` on (0, inf).
pub fn sample_gig0(chi: f64, psi: f64, rng: &mut RngStream) -> Result<f64> {
    if !(chi > 0.0) || !(psi > 0.0) {
        return Err(Error::domain(
            "sample_gig0",
            format!("parameters must be positive, got ({chi}, {psi})"),
        ));
    }
    sample_gig0_ln_params(chi.ln(), psi.ln(), rng).map(f64::exp)
}
