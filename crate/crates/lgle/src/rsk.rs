//! Markov dynamics on triangular arrays of positive reals whose top row
//! carries the polymer free energies: the single-site multiplication kernel,
//! the row-coupling kernels, their inductive composition, and the downward
//! initializer that seeds the array from a fixed top row.
//!
//! All state is kept in log coordinates; products and ratios become sums and
//! the additive terms go through log-sum-exp, so entries spanning hundreds of
//! orders of magnitude stay exact.

use crate::error::{Error, Result};
use crate::grid::log_sum_exp;
use crate::rng::RngStream;
use crate::sampling::{sample_gamma_ln, sample_gig0_ln_params};
use std::f64::consts::LN_2;

/// Triangular array z_{k,l}, 1 <= l <= k <= N, stored as log-values.
#[derive(Debug, Clone)]
pub struct ZTriangle {
    ln_rows: Vec<Vec<f64>>,
}

impl ZTriangle {
    pub fn from_ln_rows(ln_rows: Vec<Vec<f64>>) -> Result<Self> {
        for (k, row) in ln_rows.iter().enumerate() {
            if row.len() > k + 1 {
                return Err(Error::domain(
                    "ZTriangle",
                    format!("row {} has {} entries", k + 1, row.len()),
                ));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::domain(
                    "ZTriangle",
                    "entries must be positive and finite",
                ));
            }
        }
        Ok(ZTriangle { ln_rows })
    }

    /// Number of rows N.
    pub fn n(&self) -> usize {
        self.ln_rows.len()
    }

    /// log z_{k,l} with 1-based indices.
    #[inline]
    pub fn ln_entry(&self, k: usize, l: usize) -> f64 {
        self.ln_rows[k - 1][l - 1]
    }

    /// z_{k,l} in linear scale.
    pub fn entry(&self, k: usize, l: usize) -> f64 {
        self.ln_entry(k, l).exp()
    }

    pub fn ln_row(&self, k: usize) -> &[f64] {
        &self.ln_rows[k - 1]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.ln_rows
    }
}

/// Downward initializer: fix the top row to `ln_y` and fill rows
/// N-1, ..., 1, each entry drawn independently given the row above from the
/// density proportional to
/// `exp(-z_{k,l}/z_{k+1,l} - z_{k+1,l+1}/z_{k,l}) dz/z`,
/// an order-0 GIG law with `chi = 2 z_{k+1,l+1}` and `psi = 2 / z_{k+1,l}`.
pub fn sample_kbar_init_ln(ln_y: &[f64], rng: &mut RngStream) -> Result<ZTriangle> {
    if ln_y.is_empty() {
        return Err(Error::EmptyInput("sample_kbar_init"));
    }
    if ln_y.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain(
            "sample_kbar_init",
            "top row must be positive and finite",
        ));
    }
    let n = ln_y.len();
    let mut ln_rows = vec![Vec::new(); n];
    ln_rows[n - 1] = ln_y.to_vec();
    for k in (1..n).rev() {
        let above = ln_rows[k].clone(); // row k+1 (1-based), has k+1 entries
        let mut row = Vec::with_capacity(k);
        for l in 0..k {
            let ln_chi = LN_2 + above[l + 1];
            let ln_psi = LN_2 - above[l];
            row.push(sample_gig0_ln_params(ln_chi, ln_psi, rng)?);
        }
        ln_rows[k - 1] = row;
    }
    ZTriangle::from_ln_rows(ln_rows)
}

/// Linear-scale convenience wrapper around [`sample_kbar_init_ln`].
pub fn sample_kbar_init(y: &[f64], rng: &mut RngStream) -> Result<ZTriangle> {
    if y.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::domain(
            "sample_kbar_init",
            "top row must be strictly positive",
        ));
    }
    let ln_y: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    sample_kbar_init_ln(&ln_y, rng)
}

/// One application of the row-coupling kernel in log coordinates: previous
/// level's old row `x`, this level's old row `y`, previous level's updated
/// row `x_tilde`, and the fresh inverse-gamma variate `d` (all logs).
///
/// The updated row is
/// `y~_1 = d (y_1 + x~_1)`,
/// `y~_l = (y_{l-1} x~_{l-1} / x_{l-1}) (y_l + x~_l)/(y_{l-1} + x~_{l-1})`
/// for 1 < l < k, and
/// `y~_k = y_k y_{k-1} x~_{k-1} / (x_{k-1} (y_{k-1} + x~_{k-1}))`.
pub fn step_l_kernel_ln(x: &[f64], y: &[f64], x_tilde: &[f64], d: f64) -> Vec<f64> {
    let k = y.len();
    debug_assert!(k >= 2);
    debug_assert_eq!(x.len(), k - 1);
    debug_assert_eq!(x_tilde.len(), k - 1);
    let mut out = Vec::with_capacity(k);
    out.push(d + log_sum_exp(y[0], x_tilde[0]));
    for l in 1..k - 1 {
        out.push(
            y[l - 1] + x_tilde[l - 1] - x[l - 1] + log_sum_exp(y[l], x_tilde[l])
                - log_sum_exp(y[l - 1], x_tilde[l - 1]),
        );
    }
    out.push(
        y[k - 1] + y[k - 2] + x_tilde[k - 2] - x[k - 2] - log_sum_exp(y[k - 2], x_tilde[k - 2]),
    );
    out
}

/// Linear-scale variant of [`step_l_kernel_ln`]; rejects nonpositive input.
pub fn step_l_kernel(x: &[f64], y: &[f64], x_tilde: &[f64], d: f64) -> Result<Vec<f64>> {
    if y.len() < 2 || x.len() != y.len() - 1 || x_tilde.len() != y.len() - 1 {
        return Err(Error::domain("step_l_kernel", "dimension mismatch"));
    }
    if !(d > 0.0)
        || x.iter().chain(y.iter()).chain(x_tilde.iter()).any(|v| !(*v > 0.0))
    {
        return Err(Error::domain("step_l_kernel", "inputs must be positive"));
    }
    let ln = |s: &[f64]| s.iter().map(|v| v.ln()).collect::<Vec<f64>>();
    let out = step_l_kernel_ln(&ln(x), &ln(y), &ln(x_tilde), d.ln());
    Ok(out.into_iter().map(f64::exp).collect())
}

/// One transition of the triangle chain: level 1 is multiplied by a fresh
/// inverse-gamma variate, and level k = 2..N is updated by the row-coupling
/// kernel against the already-updated level below. Consumes exactly N
/// inverse-gamma variates.
pub fn step_pi(z: &ZTriangle, theta: f64, rng: &mut RngStream) -> Result<ZTriangle> {
    let n = z.n();
    if n == 0 {
        return Err(Error::EmptyInput("step_pi"));
    }
    let mut new_rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    let d1 = -sample_gamma_ln(theta, rng)?;
    new_rows.push(vec![d1 + z.ln_entry(1, 1)]);
    for k in 2..=n {
        let dk = -sample_gamma_ln(theta, rng)?;
        let row = step_l_kernel_ln(z.ln_row(k - 1), z.ln_row(k), &new_rows[k - 2], dk);
        new_rows.push(row);
    }
    ZTriangle::from_ln_rows(new_rows)
}

/// A realized trajectory of the triangle chain.
#[derive(Debug, Clone)]
pub struct ChainTrace {
    pub theta: f64,
    /// steepness of the initial top row, `y_l = exp(-M (N + 1 - 2l) / 2)`
    pub m_param: f64,
    /// states[t] is the triangle after t transitions
    pub states: Vec<ZTriangle>,
    /// total inverse-gamma variates consumed by the transitions
    pub gamma_draws: u64,
}

impl ChainTrace {
    pub fn n(&self) -> usize {
        self.states[0].n()
    }

    pub fn n_steps(&self) -> usize {
        self.states.len() - 1
    }
}

/// Run the chain from the steep deterministic top row pushed down by the
/// initializer, for `n_steps` transitions.
///
/// The top row is the symmetric geometric profile
/// `y_l = exp(-M (N + 1 - 2l) / 2)`, whose entries telescope to product one.
/// Under the downward initializer this concentrates the bottom entry of the
/// array at one as M grows, which is what makes the law of the evolved top
/// row converge to the multi-path partition-function ratios: the bottom
/// entry is updated purely multiplicatively and any offset in its initial
/// value is carried forever.
pub fn run_chain(
    n: usize,
    theta: f64,
    m_param: f64,
    n_steps: usize,
    rng: &mut RngStream,
) -> Result<ChainTrace> {
    if n == 0 {
        return Err(Error::domain("run_chain", "N must be >= 1"));
    }
    if !(m_param > 0.0) {
        return Err(Error::domain("run_chain", format!("M = {m_param}")));
    }
    if n_steps == 0 {
        return Err(Error::domain("run_chain", "n_steps must be >= 1"));
    }
    let ln_y0: Vec<f64> = (1..=n)
        .map(|l| -m_param * (n as f64 + 1.0 - 2.0 * l as f64) / 2.0)
        .collect();
    let init = sample_kbar_init_ln(&ln_y0, rng)?;
    let mut states = Vec::with_capacity(n_steps + 1);
    states.push(init);
    let mut gamma_draws = 0u64;
    for _ in 0..n_steps {
        let next = step_pi(states.last().unwrap(), theta, rng)?;
        gamma_draws += n as u64;
        states.push(next);
    }
    Ok(ChainTrace {
        theta,
        m_param,
        states,
        gamma_draws,
    })
}

/// Extract the top K log-curves `L_i(j) = log z_{N,i}(j)` over the window
/// [t0, t1] of chain times.
pub fn extract_top_curves(
    trace: &ChainTrace,
    k: usize,
    t0: usize,
    t1: usize,
) -> Result<crate::ensemble::LineEnsemble> {
    let n = trace.n();
    if !(2 <= k && k <= n) {
        return Err(Error::domain("extract_top_curves", format!("K = {k}")));
    }
    if t0 < k || t1 > trace.n_steps() || t0 >= t1 {
        return Err(Error::WindowViolation {
            lo: t0 as i64,
            hi: t1 as i64,
        });
    }
    let curves: Vec<Vec<f64>> = (1..=k)
        .map(|i| {
            (t0..=t1)
                .map(|t| trace.states[t].ln_entry(n, i))
                .collect()
        })
        .collect();
    crate::ensemble::LineEnsemble::new(t0 as i64, t1 as i64, curves)
}
