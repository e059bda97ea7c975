//! Closed-form scaling constants of the log-gamma polymer: the shape
//! function `h_theta`, its derivatives, the fluctuation and transversal
//! scales `d_theta` and `kappa_theta`, and the identities tying them all
//! together. Every constant is computed along two independent routes and the
//! residuals are attached to the report.

use crate::error::{Error, Result};
use crate::hamiltonian::{lambda_prime, lambda_second};
use crate::special::{digamma, g_theta_inv, g_theta_prime, trigamma, zeta3};
use serde::Serialize;

fn require_positive(name: &'static str, v: f64) -> Result<()> {
    if !(v > 0.0) {
        return Err(Error::domain(name, format!("argument {v} must be > 0")));
    }
    Ok(())
}

/// Shape function `x * digamma(a) + digamma(theta - a)` at the stationary
/// point `a = g_theta^{-1}(x)`.
pub fn h_theta(theta: f64, x: f64) -> Result<f64> {
    require_positive("h_theta", theta)?;
    require_positive("h_theta", x)?;
    let a = g_theta_inv(theta, x)?;
    Ok(x * digamma(a)? + digamma(theta - a)?)
}

/// First and second derivatives of the shape function.
///
/// `h' = digamma(g^{-1}(x))` and, by the chain rule through the stationary
/// point, `h'' = trigamma(g^{-1}(x)) / g'(g^{-1}(x))`.
pub fn h_theta_derivs(theta: f64, x: f64) -> Result<(f64, f64)> {
    require_positive("h_theta_derivs", theta)?;
    require_positive("h_theta_derivs", x)?;
    let a = g_theta_inv(theta, x)?;
    let h_prime = digamma(a)?;
    let h_second = trigamma(a)? / g_theta_prime(theta, a)?;
    Ok((h_prime, h_second))
}

/// Fluctuation scale via the cubic sums
/// `d^3 = x * sum (n+a)^{-3} + sum (n+theta-a)^{-3}`.
pub fn d_theta_series(theta: f64, x: f64) -> Result<f64> {
    require_positive("d_theta_series", theta)?;
    require_positive("d_theta_series", x)?;
    let a = g_theta_inv(theta, x)?;
    Ok((x * zeta3(a)? + zeta3(theta - a)?).cbrt())
}

/// Diffusion coefficient `trigamma(g^{-1}(r))`, equal to the variance of the
/// stationary slope field.
pub fn diffusion_coefficient(theta: f64, r: f64) -> Result<f64> {
    require_positive("diffusion_coefficient", theta)?;
    require_positive("diffusion_coefficient", r)?;
    trigamma(g_theta_inv(theta, r)?)
}

/// Fluctuation scale via `d = (A^2 / (2 h''))^{1/3}`.
pub fn d_theta(theta: f64, r: f64) -> Result<f64> {
    let a = diffusion_coefficient(theta, r)?;
    let (_, h2) = h_theta_derivs(theta, r)?;
    Ok((a * a / (2.0 * h2)).cbrt())
}

/// Transversal scale `kappa = (2 A / h''^2)^{1/3}`.
pub fn kappa_theta(theta: f64, r: f64) -> Result<f64> {
    let a = diffusion_coefficient(theta, r)?;
    let (_, h2) = h_theta_derivs(theta, r)?;
    Ok((2.0 * a / (h2 * h2)).cbrt())
}

/// Bridge diffusion coefficient for slope `p = -h'(r)`: computed both as
/// `trigamma(g^{-1}(r))` and by root-finding on the cumulant generating
/// function, returning the pair `(direct, via_cgf)`.
pub fn sigma_p_squared_routes(theta: f64, r: f64) -> Result<(f64, f64)> {
    require_positive("sigma_p_squared", theta)?;
    require_positive("sigma_p_squared", r)?;
    let a = g_theta_inv(theta, r)?;
    let direct = trigamma(a)?;
    // second route: solve Lambda'(t*) = -h'(r), return Lambda''(t*)
    let p = -digamma(a)?;
    let mut lo = -1e6;
    let mut hi = theta - 1e-12 * theta.max(1.0);
    // Lambda' is increasing in t; bisection then a few Newton polishes
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if lambda_prime(theta, mid)? < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-9 {
            break;
        }
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..8 {
        let f = lambda_prime(theta, t)? - p;
        let df = lambda_second(theta, t)?;
        let next = t - f / df;
        if next < theta {
            t = next;
        } else {
            break;
        }
    }
    if (lambda_prime(theta, t)? - p).abs() > 1e-8 * p.abs().max(1.0) {
        return Err(Error::NonConvergence {
            context: "sigma_p_squared",
            message: format!("cgf root-find stalled at t = {t}"),
        });
    }
    Ok((direct, lambda_second(theta, t)?))
}

/// `sigma_p^2` with both routes reconciled to 1e-9.
pub fn sigma_p_squared(theta: f64, r: f64) -> Result<f64> {
    let (direct, via_cgf) = sigma_p_squared_routes(theta, r)?;
    if (direct - via_cgf).abs() > 1e-9 * direct.max(1.0) {
        return Err(Error::NonConvergence {
            context: "sigma_p_squared",
            message: format!("routes disagree: {direct} vs {via_cgf}"),
        });
    }
    Ok(direct)
}

/// The full constant record for one `(theta, r)` pair, with the identity
/// residuals used by the acceptance checks attached.
#[derive(Debug, Clone, Serialize)]
pub struct KpzConstants {
    pub theta: f64,
    pub r: f64,
    /// stationary point `g_theta^{-1}(r)` in (0, theta)
    pub alpha_star: f64,
    pub h: f64,
    pub h_prime: f64,
    pub h_second: f64,
    /// diffusion coefficient `trigamma(alpha_star)`
    pub a_coeff: f64,
    /// inverse curvature `1 / h_second`
    pub lambda: f64,
    pub d: f64,
    pub kappa: f64,
    pub sigma_p2: f64,
    /// stationary slope-field density
    pub rho: f64,
    /// instantaneous current at that density
    pub current: f64,
    pub residuals: KpzResiduals,
}

/// Scaled identity residuals; all should sit at the 1e-10 level.
#[derive(Debug, Clone, Serialize)]
pub struct KpzResiduals {
    /// series route vs `(A^2/(2h''))^{1/3}` route for d^3
    pub d_cubed: f64,
    /// `A kappa / (2 d^2) - 1`
    pub a_kappa: f64,
    /// `h'' kappa^2 / (2 d) - 1`
    pub curvature_kappa: f64,
    /// `g^{-1}(1/r) + g^{-1}(r) - theta`, scaled by theta
    pub g_inv_reflection: f64,
    /// two-route disagreement in sigma_p^2
    pub sigma_routes: f64,
    /// grid supremum vs closed form of the shape function
    pub legendre: f64,
    /// stationarity of the variational objective at alpha_star
    pub stationarity: f64,
}

impl KpzResiduals {
    pub fn max_abs(&self) -> f64 {
        [
            self.d_cubed,
            self.a_kappa,
            self.curvature_kappa,
            self.g_inv_reflection,
            self.sigma_routes,
            self.legendre,
            self.stationarity,
        ]
        .iter()
        .map(|v| v.abs())
        .fold(0.0, f64::max)
    }
}

/// Supremum of `r*digamma(a) + digamma(theta - a)` over an alpha-grid with
/// golden-section refinement; independent of the stationary-point formula.
pub fn shape_function_by_grid_sup(theta: f64, r: f64) -> Result<f64> {
    require_positive("shape_function_by_grid_sup", theta)?;
    require_positive("shape_function_by_grid_sup", r)?;
    let objective = |a: f64| -> f64 {
        r * digamma(a).unwrap_or(f64::NEG_INFINITY) + digamma(theta - a).unwrap_or(f64::NEG_INFINITY)
    };
    let n = 2000usize;
    let eps = 1e-7 * theta;
    let mut best_i = 0usize;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=n {
        let a = eps + (theta - 2.0 * eps) * i as f64 / n as f64;
        let v = objective(a);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    // golden-section refinement inside the bracketing cells
    let cell = (theta - 2.0 * eps) / n as f64;
    let mut lo = (eps + cell * (best_i.saturating_sub(1)) as f64).max(eps);
    let mut hi = (eps + cell * (best_i + 1) as f64).min(theta - eps);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = objective(x1);
    let mut f2 = objective(x2);
    for _ in 0..120 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = objective(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = objective(x1);
        }
        if hi - lo < 1e-13 * theta {
            break;
        }
    }
    Ok(f1.max(f2).max(best))
}

/// Assemble the constants and their identity residuals for `(theta, r)`.
pub fn kpz_report(theta: f64, r: f64) -> Result<KpzConstants> {
    require_positive("kpz_report", theta)?;
    require_positive("kpz_report", r)?;
    let alpha_star = g_theta_inv(theta, r)?;
    let h = h_theta(theta, r)?;
    let (h_prime, h_second) = h_theta_derivs(theta, r)?;
    let a_coeff = trigamma(alpha_star)?;
    let lambda = 1.0 / h_second;
    let d = d_theta(theta, r)?;
    let kappa = kappa_theta(theta, r)?;
    let (sigma_direct, sigma_cgf) = sigma_p_squared_routes(theta, r)?;
    let rho = -digamma(alpha_star)?;
    let current = -digamma(theta - alpha_star)?;

    let d_series = d_theta_series(theta, r)?;
    let scale = (d * d * d).abs().max(1.0);
    let residuals = KpzResiduals {
        d_cubed: (d_series.powi(3) - d.powi(3)) / scale,
        a_kappa: a_coeff * kappa / (2.0 * d * d) - 1.0,
        curvature_kappa: h_second * kappa * kappa / (2.0 * d) - 1.0,
        g_inv_reflection: (g_theta_inv(theta, 1.0 / r)? + alpha_star - theta) / theta,
        sigma_routes: (sigma_direct - sigma_cgf) / sigma_direct.max(1.0),
        legendre: (shape_function_by_grid_sup(theta, r)? - h) / h.abs().max(1.0),
        stationarity: (r * trigamma(alpha_star)? - trigamma(theta - alpha_star)?)
            / trigamma(alpha_star)?.max(1.0),
    };

    Ok(KpzConstants {
        theta,
        r,
        alpha_star,
        h,
        h_prime,
        h_second,
        a_coeff,
        lambda,
        d,
        kappa,
        sigma_p2: sigma_direct,
        rho,
        current,
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::EULER_GAMMA;

    #[test]
    fn shape_function_at_unit_slope() {
        // g^{-1}(1) = theta/2, so h(1) = 2 digamma(theta/2)
        for &theta in &[0.5, 1.0, 2.0, 4.0] {
            let want = 2.0 * digamma(theta / 2.0).unwrap();
            assert!((h_theta(theta, 1.0).unwrap() - want).abs() < 1e-10);
        }
        // at theta = 2: h(1) = 2 digamma(1) = -2 gamma_E
        assert!((h_theta(2.0, 1.0).unwrap() + 2.0 * EULER_GAMMA).abs() < 1e-12);
    }

    #[test]
    fn shape_function_rejects_nonpositive() {
        assert!(h_theta(1.0, 0.0).is_err());
        assert!(h_theta(1.0, -2.0).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for &(theta, x) in &[(0.5f64, 0.8f64), (1.0, 1.0), (2.0, 1.5), (3.0, 0.4)] {
            let (h1, h2) = h_theta_derivs(theta, x).unwrap();
            let step = 1e-5 * x;
            let fp = h_theta(theta, x + step).unwrap();
            let fm = h_theta(theta, x - step).unwrap();
            let f0 = h_theta(theta, x).unwrap();
            let fd1 = (fp - fm) / (2.0 * step);
            let fd2 = (fp - 2.0 * f0 + fm) / (step * step);
            assert!(
                (h1 - fd1).abs() < 1e-6 * h1.abs().max(1.0),
                "h' at ({theta},{x}): {h1} vs {fd1}"
            );
            assert!(
                (h2 - fd2).abs() < 1e-4 * h2.abs(),
                "h'' at ({theta},{x}): {h2} vs {fd2}"
            );
        }
    }

    #[test]
    fn h_prime_at_unit_slope() {
        for &theta in &[0.5, 1.7, 3.0] {
            let (h1, _) = h_theta_derivs(theta, 1.0).unwrap();
            assert!((h1 - digamma(theta / 2.0).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn shape_function_is_convex() {
        let theta = 1.3;
        let xs: Vec<f64> = (1..200).map(|i| 0.1 + 0.02 * i as f64).collect();
        for w in xs.windows(3) {
            let f0 = h_theta(theta, w[0]).unwrap();
            let f1 = h_theta(theta, w[1]).unwrap();
            let f2 = h_theta(theta, w[2]).unwrap();
            assert!(f0 - 2.0 * f1 + f2 >= -1e-9);
        }
    }

    #[test]
    fn d_routes_agree() {
        for &theta in &[0.5, 1.0, 2.0] {
            for &r in &[0.5, 1.0, 2.0] {
                let a = d_theta_series(theta, r).unwrap();
                let b = d_theta(theta, r).unwrap();
                assert!((a - b).abs() < 1e-8, "({theta},{r}): {a} vs {b}");
            }
        }
    }

    #[test]
    fn sigma_routes_and_symmetry() {
        let (d1, d2) = sigma_p_squared_routes(2.0, 1.5).unwrap();
        assert!((d1 - d2).abs() < 1e-9);
        for &theta in &[0.5, 1.0, 2.0] {
            let s = sigma_p_squared(theta, 1.0).unwrap();
            assert!((s - trigamma(theta / 2.0).unwrap()).abs() < 1e-9);
            // sigma_p^2 equals the diffusion coefficient
            let a = diffusion_coefficient(theta, 1.0).unwrap();
            assert!((s - a).abs() < 1e-12);
        }
    }

    #[test]
    fn report_identities_on_parameter_grid() {
        // five-by-five grid spanning [0.3, 5] in both parameters
        let axis = [0.3, 0.75, 1.5, 3.0, 5.0];
        for &theta in &axis {
            for &r in &axis {
                let rep = kpz_report(theta, r).unwrap();
                assert!(
                    rep.residuals.max_abs() < 1e-9,
                    "({theta},{r}): residuals {:?}",
                    rep.residuals
                );
                assert!(rep.alpha_star > 0.0 && rep.alpha_star < theta);
                assert!(rep.d > 0.0 && rep.kappa > 0.0 && rep.sigma_p2 > 0.0);
                assert!((rep.lambda * rep.h_second - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn current_and_density_consistent_with_legendre() {
        // inf_rho { r rho + j(rho) } equals -h(r): at the stationary density
        // rho = -digamma(a), j = -digamma(theta - a)
        let (theta, r) = (2.0, 1.3);
        let rep = kpz_report(theta, r).unwrap();
        let inf_val = r * rep.rho + rep.current;
        assert!((inf_val + rep.h).abs() < 1e-8, "{} vs {}", inf_val, -rep.h);
    }
}
