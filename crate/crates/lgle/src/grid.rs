//! Uniform grids carrying log-density values, and the convolution machinery
//! behind the bridge tables and the conditional-CDF recursion.
//!
//! Densities are stored as log-values; `f64::NEG_INFINITY` is the log-zero
//! sentinel. Convolutions exponentiate against a running offset so the linear
//! pass never overflows.

use crate::error::{Error, Result};
use crate::fft::Fft;

pub const LOG_ZERO: f64 = f64::NEG_INFINITY;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    lo: f64,
    hi: f64,
    n: usize,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::domain("Grid", format!("bad window [{lo}, {hi}]")));
        }
        if n < 2 {
            return Err(Error::domain("Grid", format!("n = {n} must be >= 2")));
        }
        Ok(Grid { lo, hi, n })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        self.lo + self.step() * i as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.node(i))
    }

    /// Fractional index of x; callers clamp as needed.
    #[inline]
    pub fn position(&self, x: f64) -> f64 {
        (x - self.lo) / self.step()
    }
}

/// A log-density tabulated on a grid.
#[derive(Debug, Clone)]
pub struct GridDensity {
    pub grid: Grid,
    pub ln_values: Vec<f64>,
}

impl GridDensity {
    pub fn from_fn(grid: Grid, mut ln_f: impl FnMut(f64) -> f64) -> Self {
        let ln_values = grid.nodes().map(&mut ln_f).collect();
        GridDensity { grid, ln_values }
    }

    /// Linear interpolation of the log-values; log-zero outside the window.
    pub fn ln_at(&self, x: f64) -> f64 {
        let p = self.grid.position(x);
        if p < 0.0 || p > (self.grid.len() - 1) as f64 {
            return LOG_ZERO;
        }
        let i = (p as usize).min(self.grid.len() - 2);
        let frac = p - i as f64;
        let a = self.ln_values[i];
        let b = self.ln_values[i + 1];
        if a == LOG_ZERO || b == LOG_ZERO {
            if frac == 0.0 {
                return a;
            }
            if frac == 1.0 {
                return b;
            }
            return LOG_ZERO;
        }
        a + (b - a) * frac
    }

    /// Trapezoid mass of the stored density (linear scale).
    pub fn total_mass(&self) -> f64 {
        let m = match self
            .ln_values
            .iter()
            .cloned()
            .filter(|v| *v > LOG_ZERO)
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
        {
            Some(m) => m,
            None => return 0.0,
        };
        let h = self.grid.step();
        let mut s = 0.0;
        for (i, &lv) in self.ln_values.iter().enumerate() {
            if lv > LOG_ZERO {
                let w = if i == 0 || i == self.ln_values.len() - 1 {
                    0.5
                } else {
                    1.0
                };
                s += w * (lv - m).exp();
            }
        }
        s * h * m.exp()
    }

    /// Largest edge-node mass fraction, the window-adequacy diagnostic.
    pub fn edge_fraction(&self) -> f64 {
        let total = self.total_mass();
        if total <= 0.0 {
            return 1.0;
        }
        let h = self.grid.step();
        let first = self.ln_values.first().copied().unwrap_or(LOG_ZERO);
        let last = self.ln_values.last().copied().unwrap_or(LOG_ZERO);
        let edge = (exp_or_zero(first) + exp_or_zero(last)) * h;
        edge / total
    }
}

#[inline]
fn exp_or_zero(ln: f64) -> f64 {
    if ln > LOG_ZERO {
        ln.exp()
    } else {
        0.0
    }
}

/// log(exp(a) + exp(b)) without overflow.
#[inline]
pub fn log_sum_exp(a: f64, b: f64) -> f64 {
    if a == LOG_ZERO {
        return b;
    }
    if b == LOG_ZERO {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// log of a sum of exponentials over a slice.
pub fn log_sum_exp_slice(vals: &[f64]) -> f64 {
    let m = vals
        .iter()
        .cloned()
        .filter(|v| *v > LOG_ZERO)
        .fold(LOG_ZERO, f64::max);
    if m == LOG_ZERO {
        return LOG_ZERO;
    }
    let s: f64 = vals
        .iter()
        .filter(|v| **v > LOG_ZERO)
        .map(|v| (v - m).exp())
        .sum();
    m + s.ln()
}

/// Precomputed kernel for repeated trapezoid convolutions against a fixed
/// translation-invariant kernel on a fixed grid.
pub struct ConvKernel {
    fft: Fft,
    spec_re: Vec<f64>,
    spec_im: Vec<f64>,
    ln_scale: f64,
    grid_len: usize,
    step: f64,
}

impl ConvKernel {
    /// Build from the log-kernel evaluated at signed node offsets.
    pub fn new(grid: &Grid, mut ln_kernel: impl FnMut(f64) -> f64) -> Self {
        let n = grid.len();
        let m = (2 * n).next_power_of_two();
        let h = grid.step();
        // sample at offsets -(n-1)..(n-1), find scale
        let mut samples = vec![LOG_ZERO; 2 * n - 1];
        let mut maxv = LOG_ZERO;
        for (idx, s) in samples.iter_mut().enumerate() {
            let off = (idx as isize - (n as isize - 1)) as f64 * h;
            *s = ln_kernel(off);
            if *s > maxv {
                maxv = *s;
            }
        }
        let ln_scale = if maxv > LOG_ZERO { maxv } else { 0.0 };
        // circular embedding: index 0 holds offset 0, wrap negatives at the top
        let mut re = vec![0.0; m];
        let mut im = vec![0.0; m];
        for (idx, s) in samples.iter().enumerate() {
            if *s > LOG_ZERO {
                let off = idx as isize - (n as isize - 1);
                let slot = if off >= 0 { off as usize } else { m - (-off) as usize };
                re[slot] = (s - ln_scale).exp();
            }
        }
        let fft = Fft::new(m);
        fft.forward(&mut re, &mut im);
        ConvKernel {
            fft,
            spec_re: re,
            spec_im: im,
            ln_scale,
            grid_len: n,
            step: h,
        }
    }

    /// Trapezoid convolution `out(y_j) = sum_i w_i f(x_i) K(y_j - x_i) h`
    /// of a log-density against the kernel; returns log-values.
    pub fn convolve_ln(&self, ln_values: &[f64]) -> Vec<f64> {
        assert_eq!(ln_values.len(), self.grid_len);
        let n = self.grid_len;
        let m = self.fft.len();
        let maxv = ln_values
            .iter()
            .cloned()
            .filter(|v| *v > LOG_ZERO)
            .fold(LOG_ZERO, f64::max);
        if maxv == LOG_ZERO {
            return vec![LOG_ZERO; n];
        }
        let mut re = vec![0.0; m];
        let mut im = vec![0.0; m];
        for (i, &lv) in ln_values.iter().enumerate() {
            if lv > LOG_ZERO {
                let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                re[i] = w * (lv - maxv).exp();
            }
        }
        self.fft.forward(&mut re, &mut im);
        for i in 0..m {
            let (ar, ai) = (re[i], im[i]);
            let (br, bi) = (self.spec_re[i], self.spec_im[i]);
            re[i] = ar * br - ai * bi;
            im[i] = ar * bi + ai * br;
        }
        self.fft.inverse(&mut re, &mut im);
        let ln_offset = maxv + self.ln_scale + self.step.ln();
        (0..n)
            .map(|j| {
                let v = re[j];
                if v > 1e-305 {
                    v.ln() + ln_offset
                } else {
                    LOG_ZERO
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_basics() {
        let g = Grid::new(-1.0, 1.0, 5).unwrap();
        assert_eq!(g.step(), 0.5);
        assert_eq!(g.node(0), -1.0);
        assert_eq!(g.node(4), 1.0);
        assert!(Grid::new(1.0, 0.0, 4).is_err());
        assert!(Grid::new(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn log_sum_exp_cases() {
        assert_eq!(log_sum_exp(LOG_ZERO, 1.5), 1.5);
        assert_eq!(log_sum_exp(0.3, LOG_ZERO), 0.3);
        let v = log_sum_exp(700.0, 700.0);
        assert!((v - (700.0 + std::f64::consts::LN_2)).abs() < 1e-12);
    }

    #[test]
    fn gaussian_self_convolution() {
        // N(0,1) * N(0,1) = N(0,2)
        let grid = Grid::new(-20.0, 20.0, 2048).unwrap();
        let ln_norm = |x: f64| -0.5 * x * x - 0.5 * (2.0 * std::f64::consts::PI).ln();
        let f = GridDensity::from_fn(grid.clone(), ln_norm);
        let kernel = ConvKernel::new(&grid, ln_norm);
        let out = kernel.convolve_ln(&f.ln_values);
        for (i, x) in grid.nodes().enumerate() {
            let want = -0.25 * x * x - 0.5 * (4.0 * std::f64::consts::PI).ln();
            // below ~e^-18 of the peak the FFT noise floor degrades the log
            // values; that mass is irrelevant to any CDF built from the table
            if want > -18.0 {
                assert!(
                    (out[i] - want).abs() < 1e-8,
                    "x = {x}: got {} want {want}",
                    out[i]
                );
            } else {
                let lin = if out[i] > LOG_ZERO { out[i].exp() } else { 0.0 };
                assert!((lin - want.exp()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn mass_is_preserved_by_convolution() {
        let grid = Grid::new(-25.0, 25.0, 4096).unwrap();
        let ln_norm = |x: f64| -0.5 * x * x - 0.5 * (2.0 * std::f64::consts::PI).ln();
        let f = GridDensity::from_fn(grid.clone(), ln_norm);
        assert!((f.total_mass() - 1.0).abs() < 1e-12);
        let kernel = ConvKernel::new(&grid, ln_norm);
        let g = GridDensity {
            grid: grid.clone(),
            ln_values: kernel.convolve_ln(&f.ln_values),
        };
        assert!((g.total_mass() - 1.0).abs() < 1e-10);
        assert!(g.edge_fraction() < 1e-14);
    }
}
