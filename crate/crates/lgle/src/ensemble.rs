//! Indexed families of discrete curves on an integer window, evaluated by
//! linear interpolation between integer sites.

use crate::error::{Error, Result};
use crate::stats::PiecewiseLinear;

/// Curves labeled 1..=k over the integer window [index_lo, index_hi].
#[derive(Debug, Clone)]
pub struct LineEnsemble {
    index_lo: i64,
    index_hi: i64,
    curves: Vec<Vec<f64>>,
}

impl LineEnsemble {
    pub fn new(index_lo: i64, index_hi: i64, curves: Vec<Vec<f64>>) -> Result<Self> {
        if index_hi <= index_lo {
            return Err(Error::domain(
                "LineEnsemble",
                format!("window [{index_lo}, {index_hi}] must have positive length"),
            ));
        }
        let len = (index_hi - index_lo + 1) as usize;
        if curves.is_empty() || curves.iter().any(|c| c.len() != len) {
            return Err(Error::domain(
                "LineEnsemble",
                "every curve must cover the full window",
            ));
        }
        if curves.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::domain("LineEnsemble", "curve values must be finite"));
        }
        Ok(LineEnsemble {
            index_lo,
            index_hi,
            curves,
        })
    }

    pub fn window(&self) -> (i64, i64) {
        (self.index_lo, self.index_hi)
    }

    pub fn n_curves(&self) -> usize {
        self.curves.len()
    }

    /// Value of curve `label` (1-based) at integer site j.
    pub fn at(&self, label: usize, j: i64) -> f64 {
        assert!(label >= 1 && label <= self.curves.len());
        assert!(j >= self.index_lo && j <= self.index_hi);
        self.curves[label - 1][(j - self.index_lo) as usize]
    }

    /// Linear interpolation of curve `label` at a real position.
    pub fn eval(&self, label: usize, s: f64) -> f64 {
        let s = s.clamp(self.index_lo as f64, self.index_hi as f64);
        let j = s.floor() as i64;
        let j = j.min(self.index_hi - 1);
        let frac = s - j as f64;
        let a = self.at(label, j);
        let b = self.at(label, j + 1);
        a + (b - a) * frac
    }

    pub fn curve(&self, label: usize) -> &[f64] {
        &self.curves[label - 1]
    }

    pub fn set_value(&mut self, label: usize, j: i64, v: f64) {
        assert!(v.is_finite());
        let idx = (j - self.index_lo) as usize;
        self.curves[label - 1][idx] = v;
    }

    pub fn to_piecewise_linear(&self, label: usize) -> PiecewiseLinear {
        let xs: Vec<f64> = (self.index_lo..=self.index_hi).map(|j| j as f64).collect();
        PiecewiseLinear::new(xs, self.curves[label - 1].clone()).expect("valid window")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_between_sites() {
        let ens = LineEnsemble::new(2, 5, vec![vec![0.0, 1.0, 3.0, 3.0]]).unwrap();
        assert_eq!(ens.at(1, 3), 1.0);
        assert!((ens.eval(1, 3.5) - 2.0).abs() < 1e-15);
        assert_eq!(ens.eval(1, 2.0), 0.0);
        assert_eq!(ens.eval(1, 5.0), 3.0);
    }

    #[test]
    fn rejects_ragged_or_nonfinite() {
        assert!(LineEnsemble::new(0, 2, vec![vec![0.0, 1.0]]).is_err());
        assert!(LineEnsemble::new(0, 1, vec![vec![0.0, f64::NAN]]).is_err());
        assert!(LineEnsemble::new(3, 3, vec![vec![1.0]]).is_err());
    }
}
