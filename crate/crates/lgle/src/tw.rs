//! Tracy-Widom GUE reference distribution via the Fredholm determinant of
//! the Airy kernel, discretized with Gauss-Legendre quadrature on the
//! truncated half-line.
//!
//! The Airy function itself is self-contained: a power series on [-5, 5],
//! Taylor-stepped integration of y'' = t y from -5 downward (the oscillatory
//! asymptotics would cap the accuracy near -10 well above what the
//! determinant needs), and the standard exponential asymptotics above 5.

use crate::error::{Error, Result};

const AI_ZERO: f64 = 0.355_028_053_887_817_2;
const AIP_ZERO: f64 = -0.258_819_403_792_806_8;

/// Ai and Ai' by the ascending power series, accurate for |t| <= 8.
fn airy_series(t: f64) -> (f64, f64) {
    if t == 0.0 {
        return (AI_ZERO, AIP_ZERO);
    }
    // the two independent solutions f (c0 = 1) and g (c1 = 1)
    let t3 = t * t * t;
    let mut f_term = 1.0;
    let mut fp_term; // derivative terms built alongside
    let mut f = 1.0;
    let mut fp = 0.0;
    // f = sum c_{3k} t^{3k}, c_{3k} = c_{3k-3} / ((3k)(3k-1))
    let mut k = 1;
    loop {
        f_term *= t3 / ((3 * k) as f64 * (3 * k - 1) as f64);
        f += f_term;
        fp_term = f_term * (3 * k) as f64 / t; // d/dt of t^{3k}
        fp += fp_term;
        if f_term.abs() < 1e-18 * f.abs().max(1.0) || k > 200 {
            break;
        }
        k += 1;
    }
    let mut g_term = t;
    let mut g = t;
    let mut gp = 1.0;
    let mut k = 1;
    loop {
        g_term *= t3 / ((3 * k + 1) as f64 * (3 * k) as f64);
        g += g_term;
        gp += g_term * (3 * k + 1) as f64 / t;
        if g_term.abs() < 1e-18 * g.abs().max(1.0) || k > 200 {
            break;
        }
        k += 1;
    }
    (
        AI_ZERO * f + AIP_ZERO * g,
        AI_ZERO * fp + AIP_ZERO * gp,
    )
}

/// Taylor-series steps of the Airy ODE from -5 down to t in [-11, -5).
fn airy_march_down(t: f64) -> (f64, f64) {
    debug_assert!((-11.0..-5.0).contains(&t));
    let (mut y, mut yp) = airy_series(-5.0);
    let mut t0 = -5.0f64;
    loop {
        let step = (t - t0).max(-0.5);
        let (ny, nyp) = taylor_step(t0, y, yp, step);
        y = ny;
        yp = nyp;
        t0 += step;
        if (t0 - t).abs() < 1e-14 {
            return (y, yp);
        }
    }
}

/// One Taylor step of y'' = t y from t0 with increment s.
fn taylor_step(t0: f64, y: f64, yp: f64, s: f64) -> (f64, f64) {
    const TERMS: usize = 34;
    let mut c = [0.0f64; TERMS];
    c[0] = y;
    c[1] = yp;
    c[2] = 0.5 * t0 * c[0];
    for n in 1..TERMS - 2 {
        // (n+2)(n+1) c_{n+2} = t0 c_n + c_{n-1}
        c[n + 2] = (t0 * c[n] + c[n - 1]) / ((n + 2) as f64 * (n + 1) as f64);
    }
    let mut val = 0.0;
    let mut der = 0.0;
    for n in (0..TERMS).rev() {
        val = val * s + c[n];
        if n >= 1 {
            der = der * s + c[n] * n as f64;
        }
    }
    (val, der)
}

/// Exponential asymptotics for t >= 5.
fn airy_asymptotic_pos(t: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * t.powf(1.5);
    let pre = (-zeta).exp() / (2.0 * std::f64::consts::PI.sqrt());
    let mut u = 1.0;
    let mut sum_a = 1.0;
    let mut sum_ap = 1.0;
    let mut sign = -1.0;
    let mut prev = f64::INFINITY;
    for k in 1i32..40 {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / (216.0 * kf * (2.0 * kf - 1.0));
        let term = u / zeta.powi(k);
        if term.abs() > prev {
            break; // asymptotic series started diverging
        }
        prev = term.abs();
        let v = u * (6.0 * kf + 1.0) / (1.0 - 6.0 * kf);
        sum_a += sign * term;
        sum_ap += sign * v / zeta.powi(k);
        sign = -sign;
        if term.abs() < 1e-18 {
            break;
        }
    }
    let ai = pre / t.powf(0.25) * sum_a;
    let aip = -pre * t.powf(0.25) * sum_ap;
    (ai, aip)
}

/// Airy function of the first kind and its derivative on [-11, inf).
pub fn airy_ai(t: f64) -> Result<(f64, f64)> {
    if t < -11.0 {
        return Err(Error::domain(
            "airy_ai",
            format!("t = {t} below the supported range"),
        ));
    }
    if t < -5.0 {
        Ok(airy_march_down(t))
    } else if t <= 8.0 {
        Ok(airy_series(t))
    } else {
        Ok(airy_asymptotic_pos(t))
    }
}

/// Airy kernel `(Ai(x) Ai'(y) - Ai'(x) Ai(y)) / (x - y)` with the diagonal
/// limit `Ai'(x)^2 - x Ai(x)^2`.
pub fn airy_kernel(x: f64, y: f64) -> Result<f64> {
    let (ax, apx) = airy_ai(x)?;
    if (x - y).abs() < 1e-7 {
        let m = 0.5 * (x + y);
        let (am, apm) = airy_ai(m)?;
        return Ok(apm * apm - m * am * am);
    }
    let (ay, apy) = airy_ai(y)?;
    Ok((ax * apy - apx * ay) / (x - y))
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Determinant by LU with partial pivoting; consumes the matrix.
fn determinant(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    det
}

/// GUE Tracy-Widom CDF at s: the Fredholm determinant of the Airy kernel on
/// (s, inf), discretized with `n_nodes` Gauss-Legendre points on the
/// truncated interval (the kernel decays super-exponentially past 16).
pub fn tw_gue_cdf_with_nodes(s: f64, n_nodes: usize) -> Result<f64> {
    if !(-10.5..=8.0).contains(&s) {
        return Err(Error::domain(
            "tw_gue_cdf",
            format!("s = {s} outside the supported range [-10.5, 8]"),
        ));
    }
    let upper = (s + 25.0).max(16.0);
    let (gl_nodes, gl_weights) = gauss_legendre(n_nodes);
    let half = 0.5 * (upper - s);
    let mid = 0.5 * (upper + s);
    let xs: Vec<f64> = gl_nodes.iter().map(|t| mid + half * t).collect();
    let ws: Vec<f64> = gl_weights.iter().map(|w| w * half).collect();
    let airy: Vec<(f64, f64)> = xs
        .iter()
        .map(|&x| airy_ai(x))
        .collect::<Result<Vec<_>>>()?;
    let mut m = vec![vec![0.0; n_nodes]; n_nodes];
    for i in 0..n_nodes {
        for j in 0..n_nodes {
            let k = if i == j {
                let (a, ap) = airy[i];
                ap * ap - xs[i] * a * a
            } else {
                let (ai_, api) = airy[i];
                let (aj, apj) = airy[j];
                (ai_ * apj - api * aj) / (xs[i] - xs[j])
            };
            m[i][j] = (if i == j { 1.0 } else { 0.0 }) - (ws[i] * ws[j]).sqrt() * k;
        }
    }
    Ok(determinant(m).clamp(0.0, 1.0))
}

pub const TW_DEFAULT_NODES: usize = 64;

/// GUE Tracy-Widom CDF at the default quadrature size.
pub fn tw_gue_cdf(s: f64) -> Result<f64> {
    tw_gue_cdf_with_nodes(s, TW_DEFAULT_NODES)
}

/// Tabulated CDF with its first two moments.
#[derive(Debug, Clone)]
pub struct TwTable {
    pub s_grid: Vec<f64>,
    pub cdf: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
}

impl TwTable {
    /// CDF by monotone interpolation of the table; clamps outside the grid.
    pub fn cdf_at(&self, s: f64) -> f64 {
        let n = self.s_grid.len();
        if s <= self.s_grid[0] {
            return 0.0;
        }
        if s >= self.s_grid[n - 1] {
            return 1.0;
        }
        let step = self.s_grid[1] - self.s_grid[0];
        let p = (s - self.s_grid[0]) / step;
        let i = (p as usize).min(n - 2);
        let frac = p - i as f64;
        self.cdf[i] + (self.cdf[i + 1] - self.cdf[i]) * frac
    }
}

/// Build the reference table on [-10, 6] with spacing 0.01 and compute the
/// moments from the numerically differentiated density (fourth-order
/// differences, Simpson integration).
pub fn build_tw_table() -> Result<TwTable> {
    build_tw_table_with_nodes(TW_DEFAULT_NODES)
}

pub fn build_tw_table_with_nodes(n_nodes: usize) -> Result<TwTable> {
    let (lo, hi, step) = (-10.0f64, 6.0f64, 0.01f64);
    let n = ((hi - lo) / step).round() as usize + 1;
    let s_grid: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
    let cdf: Vec<f64> = s_grid
        .iter()
        .map(|&s| tw_gue_cdf_with_nodes(s, n_nodes))
        .collect::<Result<Vec<_>>>()?;
    // density by fourth-order central differences
    let f = |i: usize| cdf[i];
    let mut dens = vec![0.0; n];
    for i in 2..n - 2 {
        dens[i] = (-f(i + 2) + 8.0 * f(i + 1) - 8.0 * f(i - 1) + f(i - 2)) / (12.0 * step);
    }
    dens[0] = 0.0;
    dens[1] = (f(2) - f(0)) / (2.0 * step);
    dens[n - 1] = 0.0;
    dens[n - 2] = (f(n - 1) - f(n - 3)) / (2.0 * step);
    // Simpson moments (n is odd by construction)
    let simpson = |g: &dyn Fn(usize) -> f64| -> f64 {
        let mut acc = g(0) + g(n - 1);
        for i in 1..n - 1 {
            acc += g(i) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * step / 3.0
    };
    let mass = simpson(&|i| dens[i]);
    let mean = simpson(&|i| s_grid[i] * dens[i]) / mass;
    let second = simpson(&|i| s_grid[i] * s_grid[i] * dens[i]) / mass;
    Ok(TwTable {
        s_grid,
        cdf,
        mean,
        variance: second - mean * mean,
    })
}
