//! The log-gamma polymer: disorder sampling, partition-function recursions
//! in log space, exhaustive small-size oracles for multi-path partition
//! functions, and the rescaled observables built from them.
//!
//! Entry `(i, j)` of the disorder is the weight at column i, row j (both
//! 1-based); a polymer path runs from (1,1) to (n, N) in up-right steps and
//! `log Z^{n,N}` aggregates path weights by log-sum-exp.

use crate::error::{Error, Result};
use crate::grid::log_sum_exp;
use crate::kpz;
use crate::rng::RngStream;
use crate::rsk::ZTriangle;
use crate::sampling::sample_gamma_ln;
use crate::stats::PiecewiseLinear;

/// I.i.d. log inverse-gamma weights on an n_cols x n_rows window.
#[derive(Debug, Clone)]
pub struct DisorderMatrix {
    n_cols: usize,
    n_rows: usize,
    theta: f64,
    /// row-major by j: entry (i, j) at [(j-1)*n_cols + (i-1)]
    log_weights: Vec<f64>,
}

impl DisorderMatrix {
    /// Sample the environment; entries are generated row by row (j outer,
    /// i inner) so that streaming consumers reproduce the same values.
    pub fn sample(n_cols: usize, n_rows: usize, theta: f64, rng: &mut RngStream) -> Result<Self> {
        if n_cols == 0 || n_rows == 0 {
            return Err(Error::domain("DisorderMatrix", "dimensions must be >= 1"));
        }
        if !(theta > 0.0) {
            return Err(Error::domain("DisorderMatrix", format!("theta = {theta}")));
        }
        let mut log_weights = Vec::with_capacity(n_cols * n_rows);
        for _j in 0..n_rows {
            for _i in 0..n_cols {
                log_weights.push(-sample_gamma_ln(theta, rng)?);
            }
        }
        Ok(DisorderMatrix {
            n_cols,
            n_rows,
            theta,
            log_weights,
        })
    }

    pub fn from_log_weights(
        n_cols: usize,
        n_rows: usize,
        theta: f64,
        log_weights: Vec<f64>,
    ) -> Result<Self> {
        if log_weights.len() != n_cols * n_rows {
            return Err(Error::domain("DisorderMatrix", "size mismatch"));
        }
        if log_weights.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("DisorderMatrix", "weights must be finite"));
        }
        Ok(DisorderMatrix {
            n_cols,
            n_rows,
            theta,
            log_weights,
        })
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// log d_{i,j}, 1-based.
    #[inline]
    pub fn log_weight(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i >= 1 && i <= self.n_cols && j >= 1 && j <= self.n_rows);
        self.log_weights[(j - 1) * self.n_cols + (i - 1)]
    }

    /// Transposed environment (columns and rows exchanged).
    pub fn transposed(&self) -> DisorderMatrix {
        let mut log_weights = Vec::with_capacity(self.log_weights.len());
        for j in 1..=self.n_cols {
            for i in 1..=self.n_rows {
                log_weights.push(self.log_weight(j, i));
            }
        }
        DisorderMatrix {
            n_cols: self.n_rows,
            n_rows: self.n_cols,
            theta: self.theta,
            log_weights,
        }
    }
}

/// Table of log Z^{n,N} over the full disorder window.
#[derive(Debug, Clone)]
pub struct LogPartitionTable {
    n_cols: usize,
    n_rows: usize,
    values: Vec<f64>,
}

impl LogPartitionTable {
    /// log Z^{n,N}, 1-based.
    #[inline]
    pub fn log_z(&self, n: usize, big_n: usize) -> f64 {
        debug_assert!(n >= 1 && n <= self.n_cols && big_n >= 1 && big_n <= self.n_rows);
        self.values[(big_n - 1) * self.n_cols + (n - 1)]
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }
}

/// Dynamic-programming recursion
/// `log Z^{n,N} = lse(log Z^{n-1,N}, log Z^{n,N-1}) + log d_{n,N}`
/// with single-path products along the first row and column.
pub fn log_partition(d: &DisorderMatrix) -> LogPartitionTable {
    let (nc, nr) = (d.n_cols, d.n_rows);
    let mut values = vec![0.0f64; nc * nr];
    for j in 1..=nr {
        for i in 1..=nc {
            let idx = (j - 1) * nc + (i - 1);
            let w = d.log_weight(i, j);
            let v = match (i, j) {
                (1, 1) => w,
                (_, 1) => values[idx - 1] + w,
                (1, _) => values[idx - nc] + w,
                _ => log_sum_exp(values[idx - 1], values[idx - nc]) + w,
            };
            values[idx] = v;
        }
    }
    LogPartitionTable {
        n_cols: nc,
        n_rows: nr,
        values,
    }
}

/// Final-row variant with streaming disorder: returns `log Z^{n, n_rows}`
/// for every n in 1..=n_cols using O(n_cols) memory, consuming the stream in
/// the same order as `DisorderMatrix::sample`.
pub fn log_partition_final_row(
    n_cols: usize,
    n_rows: usize,
    theta: f64,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    if n_cols == 0 || n_rows == 0 {
        return Err(Error::domain("log_partition_final_row", "empty window"));
    }
    let mut row = vec![0.0f64; n_cols];
    for j in 1..=n_rows {
        for i in 1..=n_cols {
            let w = -sample_gamma_ln(theta, rng)?;
            let v = match (i, j) {
                (1, 1) => w,
                (_, 1) => row[i - 2] + w,
                (1, _) => row[0] + w,
                _ => log_sum_exp(row[i - 2], row[i - 1]) + w,
            };
            row[i - 1] = v;
        }
    }
    Ok(row)
}

// -- exhaustive multi-path oracle ------------------------------------------

/// All up-right paths from (x1, y1) to (x2, y2) as (vertex bitmask, log
/// weight) pairs; vertices are numbered (i-1)*n_rows + (j-1) over the
/// disorder window of `d`, which must stay within 64 cells.
fn enumerate_paths(d: &DisorderMatrix, from: (usize, usize), to: (usize, usize)) -> Vec<(u64, f64)> {
    let mut out = Vec::new();
    let nr = d.n_rows;
    let bit = |i: usize, j: usize| 1u64 << ((i - 1) * nr + (j - 1));
    // depth-first over the step sequence
    fn rec(
        d: &DisorderMatrix,
        pos: (usize, usize),
        to: (usize, usize),
        mask: u64,
        lw: f64,
        bit: &dyn Fn(usize, usize) -> u64,
        out: &mut Vec<(u64, f64)>,
    ) {
        if pos == to {
            out.push((mask, lw));
            return;
        }
        if pos.0 < to.0 {
            let np = (pos.0 + 1, pos.1);
            rec(d, np, to, mask | bit(np.0, np.1), lw + d.log_weight(np.0, np.1), bit, out);
        }
        if pos.1 < to.1 {
            let np = (pos.0, pos.1 + 1);
            rec(d, np, to, mask | bit(np.0, np.1), lw + d.log_weight(np.0, np.1), bit, out);
        }
    }
    if from.0 > to.0 || from.1 > to.1 {
        return out;
    }
    rec(
        d,
        from,
        to,
        bit(from.0, from.1),
        d.log_weight(from.0, from.1),
        &bit,
        &mut out,
    );
    out
}

const TUPLE_BOUND: u64 = 10_000_000;

/// Exact log of the sum over `l`-tuples of vertex-disjoint up-right paths,
/// the r-th path running from (1, r) to (n, k + r - l). Returns the log-zero
/// sentinel (negative infinity) when the tuple set is empty.
///
/// Exhaustive; guarded to small windows (the tuple count must stay under
/// 10^7).
pub fn brute_force_log_tau(d: &DisorderMatrix, k: usize, l: usize, n: usize) -> Result<f64> {
    if !(1 <= l && l <= k && k <= d.n_rows) {
        return Err(Error::domain(
            "brute_force_log_tau",
            format!("need 1 <= l <= k <= n_rows, got (k, l) = ({k}, {l})"),
        ));
    }
    if n > d.n_cols {
        return Err(Error::domain(
            "brute_force_log_tau",
            format!("n = {n} exceeds the disorder window"),
        ));
    }
    if d.n_cols * d.n_rows > 64 {
        return Err(Error::SizeGuard { bound: TUPLE_BOUND });
    }
    if n < l {
        return Ok(f64::NEG_INFINITY);
    }
    let path_sets: Vec<Vec<(u64, f64)>> = (1..=l)
        .map(|r| enumerate_paths(d, (1, r), (n, k + r - l)))
        .collect();
    let mut tuple_count: u64 = 1;
    for ps in &path_sets {
        tuple_count = tuple_count.saturating_mul(ps.len() as u64);
        if tuple_count > TUPLE_BOUND {
            return Err(Error::SizeGuard { bound: TUPLE_BOUND });
        }
    }
    // depth-first over tuples with a running occupancy mask
    let mut terms: Vec<f64> = Vec::new();
    fn rec(sets: &[Vec<(u64, f64)>], mask: u64, lw: f64, terms: &mut Vec<f64>) {
        match sets.split_first() {
            None => terms.push(lw),
            Some((first, rest)) => {
                for &(pm, plw) in first {
                    if pm & mask == 0 {
                        rec(rest, mask | pm, lw + plw, terms);
                    }
                }
            }
        }
    }
    rec(&path_sets, 0, 0.0, &mut terms);
    Ok(crate::grid::log_sum_exp_slice(&terms))
}

/// Triangular array z_{k,l} from the multi-path partition functions via
/// `log z_{k,l} = log tau_{k,l} - log tau_{k,l-1}` (brute-force route, small
/// windows only).
pub fn compute_z_triangle(d: &DisorderMatrix, n: usize) -> Result<ZTriangle> {
    let big_n = d.n_rows;
    let mut ln_rows = Vec::with_capacity(big_n);
    for k in 1..=big_n {
        let lmax = k.min(n);
        if lmax == 0 {
            return Err(Error::domain("compute_z_triangle", "n must be >= 1"));
        }
        let mut row = Vec::with_capacity(lmax);
        let mut prev = 0.0; // log tau_{k,0} = 0
        for l in 1..=lmax {
            let cur = brute_force_log_tau(d, k, l, n)?;
            if !cur.is_finite() {
                return Err(Error::domain(
                    "compute_z_triangle",
                    format!("tau_({k},{l}) vanished at n = {n}"),
                ));
            }
            row.push(cur - prev);
            prev = cur;
        }
        ln_rows.push(row);
    }
    ZTriangle::from_ln_rows(ln_rows)
}

// -- rescaled observables ----------------------------------------------------

/// Centered and scaled free energy
/// `(log Z + N h_theta(n/N)) / (N^{1/3} d_theta(n/N))`.
pub fn rescaled_free_energy(log_z: f64, n: usize, big_n: usize, theta: f64) -> Result<f64> {
    if n == 0 || big_n == 0 {
        return Err(Error::domain("rescaled_free_energy", "indices must be >= 1"));
    }
    let ratio = n as f64 / big_n as f64;
    let h = kpz::h_theta(theta, ratio)?;
    let d = kpz::d_theta(theta, ratio)?;
    let nn = big_n as f64;
    Ok((log_z + nn * h) / (nn.cbrt() * d))
}

/// Spatial free-energy profile on [-t_max, t_max]: lattice values
/// `N^{-1/3} (log Z^{n,N} + h(r) N + h'(r) k)` at `n = floor(rN) + k`,
/// linearly interpolated between lattice points `x = k N^{-2/3}`.
///
/// `log_z_row[i]` must hold `log Z^{i+1, N}` and cover the window.
pub fn rescaled_profile(
    log_z_row: &[f64],
    big_n: usize,
    theta: f64,
    r: f64,
    t_max: f64,
) -> Result<PiecewiseLinear> {
    let nn = big_n as f64;
    let n23 = nn.powf(2.0 / 3.0);
    let k_max = (t_max * n23).floor() as i64;
    let center = (r * nn).floor() as i64;
    let lo_n = center - k_max;
    let hi_n = center + k_max;
    if k_max < 1 {
        return Err(Error::domain(
            "rescaled_profile",
            format!("window [-{t_max}, {t_max}] holds no lattice points at N = {big_n}"),
        ));
    }
    if lo_n < 1 || hi_n as usize > log_z_row.len() {
        return Err(Error::WindowViolation { lo: lo_n, hi: hi_n });
    }
    let h = kpz::h_theta(theta, r)?;
    let (h1, _) = kpz::h_theta_derivs(theta, r)?;
    let mut xs = Vec::with_capacity((2 * k_max + 1) as usize);
    let mut ys = Vec::with_capacity((2 * k_max + 1) as usize);
    for k in -k_max..=k_max {
        let n = (center + k) as usize;
        xs.push(k as f64 / n23);
        ys.push((log_z_row[n - 1] + h * nn + h1 * k as f64) / nn.cbrt());
    }
    PiecewiseLinear::new(xs, ys)
}

/// Profile in Airy scaling: space rescaled by `kappa_theta(r)`, values by
/// `2^{-1/2} d_theta(r)^{-1}`, with constant extension outside the window.
#[derive(Debug, Clone)]
pub struct AiryProfile {
    inner: PiecewiseLinear,
    pub a_n: f64,
}

impl AiryProfile {
    pub fn eval(&self, x: f64) -> f64 {
        self.inner.eval(x.clamp(-self.a_n, self.a_n))
    }

    pub fn lattice(&self) -> (&[f64], &[f64]) {
        self.inner.breakpoints()
    }
}

pub fn rescaled_profile_airy(
    log_z_row: &[f64],
    big_n: usize,
    theta: f64,
    r: f64,
) -> Result<AiryProfile> {
    let nn = big_n as f64;
    let n23 = nn.powf(2.0 / 3.0);
    let t_tilde = (n23 * nn.ln()).floor();
    let kappa = kpz::kappa_theta(theta, r)?;
    let d = kpz::d_theta(theta, r)?;
    let a_n = t_tilde / (kappa * n23);
    let center = (r * nn).floor() as i64;
    let k_max = t_tilde as i64;
    let (lo_n, hi_n) = (center - k_max, center + k_max);
    if lo_n < 1 || hi_n as usize > log_z_row.len() {
        return Err(Error::WindowViolation { lo: lo_n, hi: hi_n });
    }
    let h = kpz::h_theta(theta, r)?;
    let (h1, _) = kpz::h_theta_derivs(theta, r)?;
    let scale = 1.0 / (2f64.sqrt() * d);
    let mut xs = Vec::with_capacity((2 * k_max + 1) as usize);
    let mut ys = Vec::with_capacity((2 * k_max + 1) as usize);
    for k in -k_max..=k_max {
        let n = (center + k) as usize;
        xs.push(k as f64 / (kappa * n23));
        ys.push(scale * (log_z_row[n - 1] + h * nn + h1 * k as f64) / nn.cbrt());
    }
    Ok(AiryProfile {
        inner: PiecewiseLinear::new(xs, ys)?,
        a_n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{digamma, trigamma};

    #[test]
    fn one_by_one_partition() {
        let mut rng = RngStream::new(1, 0);
        let d = DisorderMatrix::sample(1, 1, 2.0, &mut rng).unwrap();
        let t = log_partition(&d);
        assert_eq!(t.log_z(1, 1), d.log_weight(1, 1));
    }

    #[test]
    fn two_by_two_partition() {
        // Z^{2,2} = d11 d12 d22 + d11 d21 d22
        let lw = vec![0.1, -0.3, 0.7, 0.2]; // (1,1),(2,1),(1,2),(2,2)
        let d = DisorderMatrix::from_log_weights(2, 2, 1.0, lw.clone()).unwrap();
        let t = log_partition(&d);
        let path_a = lw[0] + lw[2] + lw[3];
        let path_b = lw[0] + lw[1] + lw[3];
        let want = log_sum_exp(path_a, path_b);
        assert!((t.log_z(2, 2) - want).abs() < 1e-14);
    }

    #[test]
    fn disorder_moments_and_determinism() {
        let theta = 1.7;
        let mut rng = RngStream::new(42, 0);
        let d = DisorderMatrix::sample(1000, 1000, theta, &mut rng).unwrap();
        let n = 1_000_000.0;
        let mean: f64 = d.log_weights.iter().sum::<f64>() / n;
        let var: f64 = d
            .log_weights
            .iter()
            .map(|v| (v - mean) * (v - mean))
            .sum::<f64>()
            / (n - 1.0);
        let want_mean = -digamma(theta).unwrap();
        let want_var = trigamma(theta).unwrap();
        let se_mean = (want_var / n).sqrt();
        assert!(
            (mean - want_mean).abs() < 3.0 * se_mean,
            "mean {mean} want {want_mean}"
        );
        assert!((var - want_var).abs() < 0.01 * want_var, "var {var}");

        let mut rng2 = RngStream::new(42, 0);
        let d2 = DisorderMatrix::sample(1000, 1000, theta, &mut rng2).unwrap();
        assert_eq!(d.log_weights, d2.log_weights);
    }

    #[test]
    fn streaming_final_row_matches_table() {
        let mut rng = RngStream::new(5, 1);
        let d = DisorderMatrix::sample(17, 9, 0.8, &mut rng).unwrap();
        let t = log_partition(&d);
        let mut rng2 = RngStream::new(5, 1);
        let row = log_partition_final_row(17, 9, 0.8, &mut rng2).unwrap();
        for n in 1..=17 {
            assert!((row[n - 1] - t.log_z(n, 9)).abs() < 1e-12);
        }
    }

    #[test]
    fn tau_conventions() {
        let mut rng = RngStream::new(7, 7);
        let d = DisorderMatrix::sample(6, 6, 1.0, &mut rng).unwrap();
        // n < l: empty tuple set
        assert_eq!(brute_force_log_tau(&d, 3, 3, 2).unwrap(), f64::NEG_INFINITY);
        // l = k: unique tuple of flat paths
        let lt = brute_force_log_tau(&d, 3, 3, 4).unwrap();
        let mut want = 0.0;
        for r in 1..=3 {
            for i in 1..=4 {
                want += d.log_weight(i, r);
            }
        }
        assert!((lt - want).abs() < 1e-12);
        // l = 1 reduces to the single-path partition function
        let t = log_partition(&d);
        for k in 1..=6 {
            let a = brute_force_log_tau(&d, k, 1, 5).unwrap();
            assert!((a - t.log_z(5, k)).abs() < 1e-11);
        }
    }

    #[test]
    fn size_guard_fires() {
        let mut rng = RngStream::new(1, 2);
        let d = DisorderMatrix::sample(9, 9, 1.0, &mut rng).unwrap();
        assert!(matches!(
            brute_force_log_tau(&d, 3, 2, 9),
            Err(Error::SizeGuard { .. })
        ));
    }

    #[test]
    fn z_triangle_telescopes_and_tops_out() {
        let mut rng = RngStream::new(3, 0);
        let d = DisorderMatrix::sample(5, 4, 1.5, &mut rng).unwrap();
        let n = 5;
        let z = compute_z_triangle(&d, n).unwrap();
        let t = log_partition(&d);
        for k in 1..=4usize {
            // products over l reproduce tau exactly
            let mut acc = 0.0;
            for l in 1..=k.min(n) {
                acc += z.ln_entry(k, l);
                let want = brute_force_log_tau(&d, k, l, n).unwrap();
                assert!((acc - want).abs() < 1e-11, "k {k} l {l}");
            }
            // z_{k,1} = tau_{k,1} = log Z^{n,k}
            assert!((z.ln_entry(k, 1) - t.log_z(n, k)).abs() < 1e-11);
        }
    }

    #[test]
    fn rescaled_free_energy_is_affine() {
        let (theta, n, big_n) = (2.0, 64usize, 64usize);
        let f0 = rescaled_free_energy(0.0, n, big_n, theta).unwrap();
        let f1 = rescaled_free_energy(1.0, n, big_n, theta).unwrap();
        let f2 = rescaled_free_energy(2.0, n, big_n, theta).unwrap();
        let slope = f1 - f0;
        assert!((f2 - f1 - slope).abs() < 1e-12);
        let want_slope =
            1.0 / ((big_n as f64).cbrt() * kpz::d_theta(theta, n as f64 / big_n as f64).unwrap());
        assert!((slope - want_slope).abs() < 1e-12);
        // centering: log Z = -N h gives zero
        let h = kpz::h_theta(theta, 1.0).unwrap();
        let f = rescaled_free_energy(-(big_n as f64) * h, n, big_n, theta).unwrap();
        assert!(f.abs() < 1e-9);
    }

    #[test]
    fn profile_lattice_and_interpolation() {
        let (theta, r, big_n, t_max) = (2.0, 1.0, 64usize, 1.0);
        let nn = big_n as f64;
        let n23 = nn.powf(2.0 / 3.0);
        let mut rng = RngStream::new(11, 0);
        let row = log_partition_final_row(96, big_n, theta, &mut rng).unwrap();
        let f = rescaled_profile(&row, big_n, theta, r, t_max).unwrap();
        let h = kpz::h_theta(theta, r).unwrap();
        let (h1, _) = kpz::h_theta_derivs(theta, r).unwrap();
        // lattice value formula at k = 3
        let k = 3i64;
        let x = k as f64 / n23;
        let n = (r * nn).floor() as usize + k as usize;
        let want = (row[n - 1] + h * nn + h1 * k as f64) / nn.cbrt();
        assert!((f.eval(x) - want).abs() < 1e-12);
        // interpolation midpoint is the average of adjacent lattice values
        let x2 = (k + 1) as f64 / n23;
        let mid = 0.5 * (x + x2);
        let want_mid = 0.5 * (f.eval(x) + f.eval(x2));
        assert!((f.eval(mid) - want_mid).abs() < 1e-12);
        // lattice values unchanged when the window is enlarged
        let g = rescaled_profile(&row, big_n, theta, r, 1.5).unwrap();
        assert!((g.eval(x) - f.eval(x)).abs() < 1e-14);
        // a row that cannot cover the window is rejected
        assert!(matches!(
            rescaled_profile(&row[..big_n], big_n, theta, r, t_max),
            Err(Error::WindowViolation { .. })
        ));
    }

    #[test]
    fn airy_profile_relation() {
        let (theta, r, big_n) = (2.0, 1.0, 256usize);
        let nn = big_n as f64;
        let mut rng = RngStream::new(19, 0);
        let kappa = kpz::kappa_theta(theta, r).unwrap();
        let d_const = kpz::d_theta(theta, r).unwrap();
        let need = (r * nn) as usize + (nn.powf(2.0 / 3.0) * nn.ln()) as usize + 32;
        let row = log_partition_final_row(need, big_n, theta, &mut rng).unwrap();
        let airy = rescaled_profile_airy(&row, big_n, theta, r).unwrap();
        let t_for_plain = kappa * airy.a_n + 0.1;
        let plain = rescaled_profile(&row, big_n, theta, r, t_for_plain).unwrap();
        // f_tilde(x) = 2^{-1/2} d^{-1} f(kappa x) at lattice points
        let (xs, _) = airy.lattice();
        for &x in xs.iter().step_by(37) {
            let want = plain.eval(kappa * x) / (2f64.sqrt() * d_const);
            assert!((airy.eval(x) - want).abs() < 1e-10, "x = {x}");
        }
        // constant extension outside the window
        let edge = airy.eval(airy.a_n);
        assert_eq!(airy.eval(airy.a_n + 5.0), edge);
        // at rN integer the x = 0 value matches the rescaled free energy
        let f_corner = rescaled_free_energy(row[big_n - 1], big_n, big_n, theta).unwrap();
        let want0 = f_corner / 2f64.sqrt();
        assert!((airy.eval(0.0) - want0).abs() < 1e-6);
    }
}
