//! Statistical primitives for the verification suites: Kolmogorov-Smirnov
//! distances, modulus of continuity of piecewise-linear curves, log-log
//! exponent fits, and the pass/fail report record.

use crate::error::{Error, Result};
use serde::Serialize;
use std::collections::BTreeMap;

/// Direction of a pass criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// pass iff statistic <= threshold
    AtMost,
    /// pass iff statistic >= threshold
    AtLeast,
}

/// One named check with its statistic, threshold and verdict.
#[derive(Debug, Clone, Serialize)]
pub struct StatReport {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub direction: Direction,
    pub n_samples: u64,
    pub pass: bool,
    pub metadata: BTreeMap<String, String>,
}

impl StatReport {
    pub fn new(
        name: impl Into<String>,
        statistic: f64,
        threshold: f64,
        direction: Direction,
        n_samples: u64,
    ) -> Self {
        let pass = match direction {
            Direction::AtMost => statistic <= threshold,
            Direction::AtLeast => statistic >= threshold,
        };
        StatReport {
            name: name.into(),
            statistic,
            threshold,
            direction,
            n_samples,
            pass,
            metadata: BTreeMap::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }

    pub fn summary_line(&self) -> String {
        let op = match self.direction {
            Direction::AtMost => "<=",
            Direction::AtLeast => ">=",
        };
        format!(
            "[{}] {}: statistic {:.6} {} {:.6} (n = {})",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.statistic,
            op,
            self.threshold,
            self.n_samples
        )
    }
}

fn sorted_copy(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// One-sample KS distance between an empirical sample and a reference CDF.
/// The sample need not be sorted.
pub fn ks_distance_vs_cdf(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptyInput("ks_distance_vs_cdf"));
    }
    let xs = sorted_copy(sample);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((f - lo).abs()).max((hi - f).abs());
    }
    Ok(d)
}

/// Two-sample KS distance between empirical CDFs. Inputs need not be sorted.
pub fn ks_distance_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("ks_distance_two_sample"));
    }
    let xs = sorted_copy(a);
    let ys = sorted_copy(b);
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let t = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= t {
            i += 1;
        }
        while j < ys.len() && ys[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// A continuous piecewise-linear function given by breakpoints.
#[derive(Debug, Clone)]
pub struct PiecewiseLinear {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::domain(
                "PiecewiseLinear",
                "need at least two matched breakpoints",
            ));
        }
        if xs.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::domain(
                "PiecewiseLinear",
                "breakpoints must be strictly increasing",
            ));
        }
        Ok(PiecewiseLinear { xs, ys })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    pub fn breakpoints(&self) -> (&[f64], &[f64]) {
        (&self.xs, &self.ys)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (a, b) = self.domain();
        let x = x.clamp(a, b);
        let i = match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => return self.ys[i],
            Err(i) => i.clamp(1, self.xs.len() - 1),
        };
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let t = (x - x0) / (x1 - x0);
        self.ys[i - 1] * (1.0 - t) + self.ys[i] * t
    }
}

/// Exact modulus of continuity `sup_{|x-y| <= delta} |f(x) - f(y)|` of a
/// piecewise-linear function.
///
/// The supremum of the linear objective over the feasible polygon is attained
/// at a vertex, and every vertex pairs a breakpoint with either another
/// breakpoint or a point offset by exactly delta; scanning those pairs is
/// exact.
pub fn modulus_of_continuity(f: &PiecewiseLinear, delta: f64) -> Result<f64> {
    let (a, b) = f.domain();
    if !(delta > 0.0 && delta <= b - a) {
        return Err(Error::domain(
            "modulus_of_continuity",
            format!("delta = {delta} outside (0, {}]", b - a),
        ));
    }
    let (xs, _) = f.breakpoints();
    let mut candidates: Vec<f64> = Vec::with_capacity(3 * xs.len());
    for &x in xs {
        candidates.push(x);
        if x - delta >= a {
            candidates.push(x - delta);
        }
        if x + delta <= b {
            candidates.push(x + delta);
        }
    }
    candidates.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let vals: Vec<f64> = candidates.iter().map(|&x| f.eval(x)).collect();
    let mut w: f64 = 0.0;
    for i in 0..candidates.len() {
        for j in i + 1..candidates.len() {
            if candidates[j] - candidates[i] > delta + 1e-12 * delta.max(1.0) {
                break;
            }
            w = w.max((vals[j] - vals[i]).abs());
        }
    }
    Ok(w)
}

/// Least-squares fit of log(value) against log(key); returns
/// (slope, intercept, r_squared).
pub fn exponent_fit(pairs: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    if pairs.len() < 3 {
        return Err(Error::DegenerateFit("need at least 3 points"));
    }
    if pairs.iter().any(|&(n, v)| !(n > 0.0) || !(v > 0.0)) {
        return Err(Error::DegenerateFit("all coordinates must be positive"));
    }
    let pts: Vec<(f64, f64)> = pairs.iter().map(|&(n, v)| (n.ln(), v.ln())).collect();
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 * sxx.abs().max(1.0) {
        return Err(Error::DegenerateFit("x-values are all equal"));
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mean_y = sy / n;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
        .sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok((slope, intercept, r2))
}

pub fn mean_and_variance(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

pub fn median(xs: &[f64]) -> f64 {
    let v = sorted_copy(xs);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn ks_identical_samples() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(ks_distance_two_sample(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn ks_disjoint_supports() {
        let a = [0.0, 1.0];
        let b = [5.0, 6.0];
        assert_eq!(ks_distance_two_sample(&a, &b).unwrap(), 1.0);
    }

    #[test]
    fn ks_hand_enumerated() {
        // step functions of {1,2,3} and {1.5,2.5,3.5} stay exactly 1/3 apart
        let a = [1.0, 2.0, 3.0];
        let b = [1.5, 2.5, 3.5];
        let d = ks_distance_two_sample(&a, &b).unwrap();
        assert!((d - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn ks_empty_is_error() {
        assert!(ks_distance_two_sample(&[], &[1.0]).is_err());
        assert!(ks_distance_vs_cdf(&[], |_| 0.5).is_err());
    }

    #[test]
    fn ks_symmetric_and_transform_invariant() {
        let mut rng = RngStream::new(4, 4);
        let a: Vec<f64> = (0..500).map(|_| rng.uniform_in(-2.0, 2.0)).collect();
        let b: Vec<f64> = (0..700).map(|_| rng.uniform_in(-1.0, 3.0)).collect();
        let d1 = ks_distance_two_sample(&a, &b).unwrap();
        let d2 = ks_distance_two_sample(&b, &a).unwrap();
        assert!((d1 - d2).abs() < 1e-15);
        // common strictly increasing transform
        let ta: Vec<f64> = a.iter().map(|x| x.exp()).collect();
        let tb: Vec<f64> = b.iter().map(|x| x.exp()).collect();
        let d3 = ks_distance_two_sample(&ta, &tb).unwrap();
        assert!((d1 - d3).abs() < 1e-12);
    }

    #[test]
    fn ks_one_sample_against_uniform() {
        let mut rng = RngStream::new(8, 0);
        let xs: Vec<f64> = (0..50_000).map(|_| rng.uniform()).collect();
        let d = ks_distance_vs_cdf(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(d < 0.01, "d = {d}");
    }

    #[test]
    fn moc_linear_and_constant() {
        let f = PiecewiseLinear::new(vec![0.0, 1.0], vec![0.0, 3.0]).unwrap();
        let w = modulus_of_continuity(&f, 0.25).unwrap();
        assert!((w - 0.75).abs() < 1e-12);
        let c = PiecewiseLinear::new(vec![0.0, 2.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(modulus_of_continuity(&c, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn moc_matches_dense_scan() {
        let mut rng = RngStream::new(99, 1);
        let xs: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let ys: Vec<f64> = (0..=10).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let f = PiecewiseLinear::new(xs.clone(), ys).unwrap();
        let delta = 0.17;
        let exact = modulus_of_continuity(&f, delta).unwrap();
        // dense oracle: uniform grid joined with breakpoints and their offsets
        let mut pts: Vec<f64> = (0..=200).map(|i| i as f64 / 200.0).collect();
        for &x in &xs {
            pts.push(x);
            if x - delta >= 0.0 {
                pts.push(x - delta);
            }
            if x + delta <= 1.0 {
                pts.push(x + delta);
            }
        }
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut brute: f64 = 0.0;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                if pts[j] - pts[i] > delta {
                    break;
                }
                brute = brute.max((f.eval(pts[j]) - f.eval(pts[i])).abs());
            }
        }
        assert!((exact - brute).abs() < 1e-9, "{exact} vs {brute}");
    }

    #[test]
    fn moc_monotone_and_subadditive() {
        let mut rng = RngStream::new(3, 3);
        let xs: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
        let ys: Vec<f64> = (0..=20).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let f = PiecewiseLinear::new(xs, ys).unwrap();
        let w1 = modulus_of_continuity(&f, 0.1).unwrap();
        let w2 = modulus_of_continuity(&f, 0.2).unwrap();
        let w3 = modulus_of_continuity(&f, 0.3).unwrap();
        assert!(w2 >= w1 && w3 >= w2);
        assert!(w3 <= w1 + w2 + 1e-12);
    }

    #[test]
    fn exponent_fit_exact_power_law() {
        let pairs: Vec<(f64, f64)> = [64.0, 128.0, 256.0, 512.0]
            .iter()
            .map(|&n: &f64| (n, n.powf(2.0 / 3.0)))
            .collect();
        let (slope, _, r2) = exponent_fit(&pairs).unwrap();
        assert!((slope - 2.0 / 3.0).abs() < 1e-12);
        assert!((r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exponent_fit_constant() {
        let pairs: Vec<(f64, f64)> = [1.0, 2.0, 4.0, 8.0].iter().map(|&n| (n, 5.0)).collect();
        let (slope, _, _) = exponent_fit(&pairs).unwrap();
        assert!(slope.abs() < 1e-12);
    }

    #[test]
    fn exponent_fit_noisy_power_law() {
        // synthetic generator with known slope and lognormal noise
        let mut rng = RngStream::new(21, 0);
        let ns = [32.0, 64.0, 128.0, 256.0, 512.0, 1024.0];
        let sigma = 0.05f64;
        let mut slopes = Vec::new();
        for rep in 0..200 {
            let _ = rep;
            let pairs: Vec<(f64, f64)> = ns
                .iter()
                .map(|&n: &f64| {
                    let noise = sigma * crate::sampling::standard_normal(&mut rng);
                    (n, (0.3 + (2.0 / 3.0) * n.ln() + noise).exp())
                })
                .collect();
            slopes.push(exponent_fit(&pairs).unwrap().0);
        }
        let (mean, var) = mean_and_variance(&slopes);
        // analytic standard error of the OLS slope with this design
        let lx: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
        let mx = lx.iter().sum::<f64>() / lx.len() as f64;
        let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
        let se = sigma / sxx.sqrt();
        assert!((mean - 2.0 / 3.0).abs() < 3.0 * se / (200f64).sqrt() + 1e-3);
        assert!((var.sqrt() - se).abs() < 0.35 * se);
    }

    #[test]
    fn exponent_fit_degenerate() {
        assert!(exponent_fit(&[(1.0, 1.0), (2.0, 2.0)]).is_err());
        assert!(exponent_fit(&[(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)]).is_err());
        assert!(exponent_fit(&[(1.0, -1.0), (2.0, 2.0), (3.0, 3.0)]).is_err());
    }

    #[test]
    fn report_pass_logic() {
        let r = StatReport::new("x", 0.01, 0.02, Direction::AtMost, 10);
        assert!(r.pass);
        let r = StatReport::new("x", 0.03, 0.02, Direction::AtMost, 10);
        assert!(!r.pass);
        let r = StatReport::new("x", 3.0, 1.0, Direction::AtLeast, 10);
        assert!(r.pass);
    }
}
