//! Single-curve Gibbs measures for the log-gamma walk with exponential
//! interaction penalty: Boltzmann weights, Monte Carlo normalizers, the
//! inverse-CDF grand coupling sampler, a single-site heat-bath sweep, and
//! free random-walk bridges.
//!
//! Sites are 0-based here: a window of length T has entry value at site 0,
//! exit value at site T-1, and interior sites 1..T-2. Conditional on the
//! endpoints and a bottom curve z, the interior density is proportional to
//!
//! ```text
//!   prod_{s=1}^{T-2} G(l[s] - l[s-1]) exp(-H(z[s+1] - l[s]))
//!       * G(l[T-1] - l[T-2]),
//! ```
//!
//! with G the walk density and H(x) = e^x; entries z[0] and z[1] never enter
//! (the site-0 interaction is a constant absorbed by the normalizer). A
//! bottom entry of minus infinity switches its interaction factor off
//! exactly.

use crate::ensemble::LineEnsemble;
use crate::error::{Error, Result};
use crate::grid::{ConvKernel, Grid, GridDensity, LOG_ZERO};
use crate::rng::RngStream;
use crate::sampling::sample_gig0_ln_params;
use crate::special::{digamma_inv, ln_gamma, trigamma};
use std::f64::consts::LN_2;

/// Window length, endpoint values, and the bottom curve with its minus
/// infinity sentinel (`None`).
#[derive(Debug, Clone)]
pub struct BoundaryData {
    pub x: f64,
    pub y: f64,
    pub z: Vec<Option<f64>>,
}

impl BoundaryData {
    pub fn new(x: f64, y: f64, z: Vec<Option<f64>>) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::domain("BoundaryData", "endpoints must be finite"));
        }
        if z.len() < 2 {
            return Err(Error::domain("BoundaryData", "window length must be >= 2"));
        }
        if z.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::domain(
                "BoundaryData",
                "bottom entries must be finite or the minus-infinity sentinel",
            ));
        }
        Ok(BoundaryData { x, y, z })
    }

    /// Window with every bottom entry at minus infinity (free bridge).
    pub fn free(x: f64, y: f64, t_len: usize) -> Result<Self> {
        BoundaryData::new(x, y, vec![None; t_len])
    }

    pub fn t_len(&self) -> usize {
        self.z.len()
    }
}

/// `exp(-sum_m H(z[m+1] - curve[m]))` over m = 0..len-2, the reweighting
/// factor of the free bridge law; lies in (0, 1].
pub fn boltzmann_weight(curve: &[f64], bottom: &[Option<f64>]) -> f64 {
    ln_boltzmann_weight(curve, bottom).exp()
}

/// Log of [`boltzmann_weight`]; minus-infinity bottom entries contribute 0.
pub fn ln_boltzmann_weight(curve: &[f64], bottom: &[Option<f64>]) -> f64 {
    assert_eq!(curve.len(), bottom.len(), "curve and bottom must align");
    let mut acc = 0.0;
    for m in 0..curve.len() - 1 {
        if let Some(zv) = bottom[m + 1] {
            acc -= (zv - curve[m]).exp();
        }
    }
    acc
}

/// Tabulated conditional CDF on a grid, strictly increasing from 0 to 1
/// across the mass-carrying region.
#[derive(Debug, Clone)]
pub struct CdfTable {
    grid: Grid,
    /// normalized cumulative trapezoid values
    cdf: Vec<f64>,
    /// density at the nodes, normalized to unit total mass
    density: Vec<f64>,
}

impl CdfTable {
    fn build(grid: Grid, ln_density: &[f64]) -> Result<Self> {
        let n = grid.len();
        let h = grid.step();
        let maxv = ln_density
            .iter()
            .cloned()
            .filter(|v| *v > LOG_ZERO)
            .fold(LOG_ZERO, f64::max);
        if maxv == LOG_ZERO {
            return Err(Error::DegenerateMass);
        }
        let density: Vec<f64> = ln_density
            .iter()
            .map(|&v| if v > LOG_ZERO { (v - maxv).exp() } else { 0.0 })
            .collect();
        // cumulative trapezoid with the Euler-Maclaurin endpoint-derivative
        // correction, which removes the O(h^2) bias of the partial sums
        let dp = |i: usize| -> f64 {
            if i == 0 {
                (density[1] - density[0]) / h
            } else if i == n - 1 {
                (density[n - 1] - density[n - 2]) / h
            } else {
                (density[i + 1] - density[i - 1]) / (2.0 * h)
            }
        };
        let dp0 = dp(0);
        let mut cdf = vec![0.0; n];
        let mut raw = 0.0;
        for i in 1..n {
            raw += 0.5 * h * (density[i - 1] + density[i]);
            cdf[i] = raw - h * h / 12.0 * (dp(i) - dp0);
        }
        // the correction can dent monotonicity at the noise floor
        for i in 1..n {
            if cdf[i] < cdf[i - 1] {
                cdf[i] = cdf[i - 1];
            }
        }
        let total = cdf[n - 1];
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::DegenerateMass);
        }
        let mut table = CdfTable {
            grid,
            cdf,
            density,
        };
        for v in table.cdf.iter_mut() {
            *v /= total;
        }
        // density scaled by the same total so Newton sees dF/ds
        for v in table.density.iter_mut() {
            *v /= total;
        }
        Ok(table)
    }

    pub fn nodes(&self) -> &Grid {
        &self.grid
    }

    /// CDF value between nodes: the partial trapezoid mass of the cell,
    /// rescaled so both node values are reproduced exactly.
    pub fn value_at(&self, s: f64) -> f64 {
        let p = self.grid.position(s);
        if p <= 0.0 {
            return 0.0;
        }
        if p >= (self.grid.len() - 1) as f64 {
            return 1.0;
        }
        let i = p as usize;
        let t = p - i as f64;
        let (d0, d1) = (self.density[i], self.density[i + 1]);
        let cell = 0.5 * (d0 + d1);
        let w = if cell > 0.0 {
            (t * d0 + 0.5 * t * t * (d1 - d0)) / cell
        } else {
            t
        };
        self.cdf[i] + (self.cdf[i + 1] - self.cdf[i]) * w
    }

    fn density_at(&self, s: f64) -> f64 {
        let p = self.grid.position(s);
        if p <= 0.0 || p >= (self.grid.len() - 1) as f64 {
            return 0.0;
        }
        let i = p as usize;
        let frac = p - i as f64;
        self.density[i] * (1.0 - frac) + self.density[i + 1] * frac
    }

    /// Inverse CDF: monotone interpolation of the table, then two Newton
    /// refinements against the interpolated density.
    pub fn inverse(&self, u: f64) -> f64 {
        debug_assert!(u > 0.0 && u < 1.0);
        // first index with cdf >= u
        let mut lo = 0usize;
        let mut hi = self.grid.len() - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.cdf[mid] >= u {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let (c0, c1) = (self.cdf[lo], self.cdf[hi]);
        let (x0, x1) = (self.grid.node(lo), self.grid.node(hi));
        let mut s = if c1 > c0 {
            x0 + (x1 - x0) * (u - c0) / (c1 - c0)
        } else {
            0.5 * (x0 + x1)
        };
        for _ in 0..2 {
            let f = self.value_at(s) - u;
            let d = self.density_at(s);
            if d > 0.0 {
                s = (s - f / d).clamp(x0, x1);
            }
        }
        s
    }
}

/// Heat-bath site visit order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepOrder {
    /// deterministic left-to-right scan
    Sequential,
    /// uniformly chosen interior site per visit, one visit per interior site
    RandomScan,
}

/// Sampler for the single-curve Gibbs measures at a fixed walk parameter.
#[derive(Debug, Clone)]
pub struct GibbsSampler {
    theta: f64,
    ln_gamma_theta: f64,
    sigma: f64,
    grid_points: usize,
    pad_sigmas: f64,
}

impl GibbsSampler {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta > 0.0) {
            return Err(Error::domain("GibbsSampler", format!("theta = {theta}")));
        }
        Ok(GibbsSampler {
            theta,
            ln_gamma_theta: ln_gamma(theta),
            sigma: trigamma(theta)?.sqrt(),
            grid_points: 1 << 12,
            pad_sigmas: 12.0,
        })
    }

    pub fn with_grid_points(mut self, n: usize) -> Self {
        self.grid_points = n;
        self
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Log walk increment density.
    #[inline]
    pub fn ln_g(&self, w: f64) -> f64 {
        -self.theta * w - (-w).exp() - self.ln_gamma_theta
    }

    /// Default window rule: data range padded by `12 sigma sqrt(T)` on both
    /// sides, sigma being the walk increment scale.
    pub fn default_window(&self, b: &BoundaryData) -> (f64, f64) {
        let mut lo = b.x.min(b.y);
        let mut hi = b.x.max(b.y);
        for v in b.z.iter().flatten() {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
        let pad = self.pad_sigmas * self.sigma * (b.t_len() as f64).sqrt();
        (lo - pad, hi + pad)
    }

    /// The density ladder of the conditional-CDF recursion. Level m (1-based,
    /// m = 1..=interactions.len()) carries the subdensity of a walk started
    /// at c after m steps, each visited site s paying the interaction factor
    /// `exp(-H(interactions[s-1] - value))`; a `None` entry pays nothing.
    pub fn compute_h_grid(
        &self,
        c: f64,
        interactions: &[Option<f64>],
        grid: &Grid,
    ) -> Result<Vec<GridDensity>> {
        if interactions.is_empty() {
            return Err(Error::EmptyInput("compute_h_grid"));
        }
        let interaction_ln = |zv: Option<f64>, v: f64| -> f64 {
            match zv {
                // H(x) = e^x; overflow saturates to the log-zero sentinel
                Some(z) => {
                    let t = (z - v).exp();
                    if t.is_finite() {
                        -t
                    } else {
                        LOG_ZERO
                    }
                }
                None => 0.0,
            }
        };
        let mut levels: Vec<GridDensity> = Vec::with_capacity(interactions.len());
        let first = GridDensity::from_fn(grid.clone(), |v| {
            self.ln_g(v - c) + interaction_ln(interactions[0], v)
        });
        levels.push(first);
        if interactions.len() > 1 {
            let kernel = ConvKernel::new(grid, |w| self.ln_g(w));
            for m in 2..=interactions.len() {
                let conv = kernel.convolve_ln(&levels[m - 2].ln_values);
                let ln_values: Vec<f64> = conv
                    .iter()
                    .zip(grid.nodes())
                    .map(|(&lv, v)| lv + interaction_ln(interactions[m - 1], v))
                    .collect();
                levels.push(GridDensity {
                    grid: grid.clone(),
                    ln_values,
                });
            }
        }
        for lvl in &levels {
            let ef = lvl.edge_fraction();
            if ef > 1e-12 {
                return Err(Error::WindowTooSmall { edge_fraction: ef });
            }
        }
        Ok(levels)
    }

    /// Conditional CDF of the site carried by `h_level`, given exit value
    /// `exit_y` one step to its right: `F(s) ~ int^s h(r) G(exit_y - r) dr`.
    pub fn conditional_cdf(&self, h_level: &GridDensity, exit_y: f64) -> Result<CdfTable> {
        let ln_density: Vec<f64> = h_level
            .ln_values
            .iter()
            .zip(h_level.grid.nodes())
            .map(|(&lv, r)| {
                if lv > LOG_ZERO {
                    lv + self.ln_g(exit_y - r)
                } else {
                    LOG_ZERO
                }
            })
            .collect();
        CdfTable::build(h_level.grid.clone(), &ln_density)
    }

    /// Deterministic map from (boundary data, uniforms) to a Gibbs sample.
    ///
    /// Site T-2 is driven by the last uniform through the inverse marginal
    /// CDF, then the construction recurses on the shortened window with the
    /// drawn value as the new exit. Identical inputs give identical output
    /// bit for bit, and pointwise-ordered boundary data with shared uniforms
    /// give pointwise-ordered output.
    pub fn grand_coupling_sample(&self, b: &BoundaryData, uniforms: &[f64]) -> Result<Vec<f64>> {
        let (lo, hi) = self.default_window(b);
        self.grand_coupling_sample_on_window(b, uniforms, (lo, hi))
    }

    /// As [`Self::grand_coupling_sample`] with an explicit grid window, so
    /// coupled pairs can share one discretization.
    pub fn grand_coupling_sample_on_window(
        &self,
        b: &BoundaryData,
        uniforms: &[f64],
        window: (f64, f64),
    ) -> Result<Vec<f64>> {
        let ctx = self.coupling_context(b, window)?;
        ctx.sample(uniforms)
    }

    /// Precompute the density ladder for repeated draws against one boundary
    /// datum; only the per-site conditional CDFs depend on the uniforms.
    pub fn coupling_context(&self, b: &BoundaryData, window: (f64, f64)) -> Result<CouplingContext> {
        let t_len = b.t_len();
        let ladder = if t_len > 2 {
            let grid = Grid::new(window.0, window.1, self.grid_points)?;
            // interaction at ladder level m is the bottom entry at site m+1
            self.compute_h_grid(b.x, &b.z[2..], &grid)?
        } else {
            Vec::new()
        };
        Ok(CouplingContext {
            sampler: self.clone(),
            x: b.x,
            y: b.y,
            t_len,
            ladder,
        })
    }

    /// One heat-bath sweep: each interior site is redrawn from its full
    /// conditional, which in the exponentiated variable `v = e^u` is an
    /// order-0 GIG law with `chi = 2 (e^{l[m-1]} + e^{z[m+1]})` (the bottom
    /// term dropped at the sentinel) and `psi = 2 e^{-l[m+1]}`.
    pub fn heat_bath_sweep(
        &self,
        curve: &mut [f64],
        b: &BoundaryData,
        order: SweepOrder,
        rng: &mut RngStream,
    ) -> Result<()> {
        let t_len = b.t_len();
        if curve.len() != t_len {
            return Err(Error::domain("heat_bath_sweep", "curve/window mismatch"));
        }
        let n_interior = t_len.saturating_sub(2);
        for visit in 0..n_interior {
            let m = match order {
                SweepOrder::Sequential => visit + 1,
                SweepOrder::RandomScan => 1 + rng.below(n_interior as u64) as usize,
            };
            let left = curve[m - 1];
            let right = curve[m + 1];
            let ln_chi = match b.z[m + 1] {
                Some(zv) => LN_2 + crate::grid::log_sum_exp(left, zv),
                None => LN_2 + left,
            };
            let ln_psi = LN_2 - right;
            curve[m] = sample_gig0_ln_params(ln_chi, ln_psi, rng)?;
        }
        Ok(())
    }

    /// Monte Carlo estimate of the normalizing constant: the mean Boltzmann
    /// weight over free bridges between the endpoints. Returns the estimate
    /// and its standard error.
    pub fn estimate_normalizer(
        &self,
        b: &BoundaryData,
        n_samples: usize,
        rng: &mut RngStream,
    ) -> Result<(f64, f64)> {
        if n_samples == 0 {
            return Err(Error::domain("estimate_normalizer", "n_samples = 0"));
        }
        let cache = self.bridge_cache(b.t_len(), b.x, b.y)?;
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        let mut bridge = vec![0.0; b.t_len()];
        for _ in 0..n_samples {
            cache.sample_into(&mut bridge, rng);
            let w = boltzmann_weight(&bridge, &b.z);
            sum += w;
            sum2 += w * w;
        }
        let n = n_samples as f64;
        let mean = sum / n;
        let var = (sum2 / n - mean * mean).max(0.0);
        Ok((mean, (var / n).sqrt()))
    }

    /// Draw a free random-walk bridge between `(0, x)` and `(t_len-1, y)`.
    pub fn bridge_sample(
        &self,
        t_len: usize,
        x: f64,
        y: f64,
        rng: &mut RngStream,
    ) -> Result<Vec<f64>> {
        let cache = self.bridge_cache(t_len, x, y)?;
        let mut out = vec![0.0; t_len];
        cache.sample_into(&mut out, rng);
        Ok(out)
    }

    /// Precompute the tilted step tables for repeated bridge draws with the
    /// same endpoints.
    ///
    /// The bridge law is invariant under exponential tilting of the step
    /// density, and tilting the log-gamma walk is just a shift of theta; the
    /// sampler tilts so the mean step matches the endpoint slope, which keeps
    /// every conditional density within range of its table no matter how far
    /// the endpoints sit from the untilted drift.
    pub fn bridge_cache(&self, t_len: usize, x: f64, y: f64) -> Result<BridgeCache> {
        if t_len < 2 {
            return Err(Error::domain("bridge_cache", "t_len must be >= 2"));
        }
        let steps = t_len - 1;
        let p_hat = (y - x) / steps as f64;
        let theta_tilt = digamma_inv(-p_hat);
        if !(theta_tilt > 0.0) || !theta_tilt.is_finite() {
            return Err(Error::NonConvergence {
                context: "bridge_cache",
                message: format!("tilt solve failed at slope {p_hat}"),
            });
        }
        let ln_gamma_tilt = ln_gamma(theta_tilt);
        let sigma_tilt = trigamma(theta_tilt)?.sqrt();
        // centered step: ln density of (step - p_hat)
        let ln_step = move |w: f64| {
            let v = w + p_hat;
            -theta_tilt * v - (-v).exp() - ln_gamma_tilt
        };
        if steps == 1 {
            return Ok(BridgeCache {
                t_len,
                x,
                y,
                p_hat,
                sigma_tilt,
                ln_step: Box::new(ln_step),
                tables: Vec::new(),
                table_grid: None,
            });
        }
        // centered m-step densities by spectral powers of the step kernel;
        // the kernel is normalized to a probability vector first so the
        // spectrum has modulus <= 1 and high powers cannot overflow
        let w_max = sigma_tilt * (14.0 * (steps as f64).sqrt() + 6.0)
            + 45.0 / theta_tilt.min(1.0)
            + 45.0;
        let n = (2 * self.grid_points).next_power_of_two();
        let fft = crate::fft::Fft::new(n);
        let dx = 2.0 * w_max / n as f64;
        // wrapped layout: index i holds offset i*dx for i < n/2, (i-n)*dx above
        let offsets: Vec<f64> = (0..n)
            .map(|i| {
                if i < n / 2 {
                    i as f64 * dx
                } else {
                    (i as f64 - n as f64) * dx
                }
            })
            .collect();
        let lnk: Vec<f64> = offsets.iter().map(|&w| ln_step(w)).collect();
        let kmax = lnk.iter().cloned().fold(LOG_ZERO, f64::max);
        let raw: Vec<f64> = lnk
            .iter()
            .map(|&v| if v > LOG_ZERO { (v - kmax).exp() } else { 0.0 })
            .collect();
        let total: f64 = raw.iter().sum();
        // discrete step mass: ln of dx * sum G'(delta_i)
        let ln_mass = kmax + dx.ln() + total.ln();
        let mut kr: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let mut ki = vec![0.0; n];
        fft.forward(&mut kr, &mut ki);
        let mut cr = kr.clone();
        let mut ci = ki.clone();
        let mut tables: Vec<Vec<f64>> = Vec::with_capacity(steps - 1);
        // unwrap helper: table index j corresponds to w = -w_max + j*dx
        let unwrap = |re: &[f64], ln_offset: f64| -> Vec<f64> {
            (0..n)
                .map(|j| {
                    let src = (j + n / 2) % n;
                    let v = re[src];
                    if v > 1e-300 {
                        v.ln() + ln_offset
                    } else {
                        LOG_ZERO
                    }
                })
                .collect()
        };
        // m = 1 table comes straight from the kernel samples
        tables.push(unwrap(
            &raw.iter().map(|v| v / total).collect::<Vec<f64>>(),
            ln_mass - dx.ln(),
        ));
        for m in 2..steps {
            // probability-vector convolution powers in spectra
            for i in 0..n {
                let (ar, ai) = (cr[i], ci[i]);
                let (br, bi) = (kr[i], ki[i]);
                cr[i] = ar * br - ai * bi;
                ci[i] = ar * bi + ai * br;
            }
            let mut re = cr.clone();
            let mut im = ci.clone();
            fft.inverse(&mut re, &mut im);
            // G'_m(w_j) = q^{(m)}(w_j) * mass^m / dx
            let ln_offset = ln_mass * m as f64 - dx.ln();
            tables.push(unwrap(&re, ln_offset));
        }
        let grid = Grid::new(-w_max, -w_max + dx * (n - 1) as f64, n)?;
        Ok(BridgeCache {
            t_len,
            x,
            y,
            p_hat,
            sigma_tilt,
            ln_step: Box::new(ln_step),
            tables,
            table_grid: Some(grid),
        })
    }

    /// Replace curve 1 of the ensemble on the open interval (a, b) by a
    /// conditional draw given its endpoints and curve 2 as the bottom curve;
    /// everything else is untouched. A window with no interior is a no-op.
    pub fn resample_interior(
        &self,
        ens: &mut LineEnsemble,
        a: i64,
        b: i64,
        rng: &mut RngStream,
    ) -> Result<()> {
        let (lo, hi) = ens.window();
        if a < lo || b > hi || a >= b {
            return Err(Error::WindowViolation { lo: a, hi: b });
        }
        if ens.n_curves() < 2 {
            return Err(Error::domain("resample_interior", "need curves 1 and 2"));
        }
        let t_len = (b - a + 1) as usize;
        if t_len == 2 {
            return Ok(());
        }
        let bottom: Vec<Option<f64>> = (a..=b).map(|j| Some(ens.at(2, j))).collect();
        let boundary = BoundaryData::new(ens.at(1, a), ens.at(1, b), bottom)?;
        let uniforms: Vec<f64> = (0..t_len - 2).map(|_| rng.uniform()).collect();
        let curve = self.grand_coupling_sample(&boundary, &uniforms)?;
        for (off, v) in curve.iter().enumerate().take(t_len - 1).skip(1) {
            ens.set_value(1, a + off as i64, *v);
        }
        Ok(())
    }
}

/// Precomputed state for repeated grand-coupling draws against one boundary
/// datum.
pub struct CouplingContext {
    sampler: GibbsSampler,
    x: f64,
    y: f64,
    t_len: usize,
    ladder: Vec<GridDensity>,
}

impl CouplingContext {
    pub fn sample(&self, uniforms: &[f64]) -> Result<Vec<f64>> {
        if uniforms.len() != self.t_len - 2 {
            return Err(Error::domain(
                "grand_coupling_sample",
                format!("need {} uniforms, got {}", self.t_len - 2, uniforms.len()),
            ));
        }
        if uniforms.iter().any(|u| !(*u > 0.0 && *u < 1.0)) {
            return Err(Error::domain(
                "grand_coupling_sample",
                "uniforms must lie strictly inside (0, 1)",
            ));
        }
        let mut out = vec![0.0; self.t_len];
        out[0] = self.x;
        out[self.t_len - 1] = self.y;
        for m in (1..=self.t_len.saturating_sub(2)).rev() {
            let cdf = self
                .sampler
                .conditional_cdf(&self.ladder[m - 1], out[m + 1])?;
            out[m] = cdf.inverse(uniforms[m - 1]);
        }
        Ok(out)
    }
}

/// Cached step tables for bridge sampling with fixed endpoints.
pub struct BridgeCache {
    t_len: usize,
    x: f64,
    y: f64,
    p_hat: f64,
    sigma_tilt: f64,
    ln_step: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    /// tables[m-1] holds the log density of the centered m-step sum
    tables: Vec<Vec<f64>>,
    table_grid: Option<Grid>,
}

impl BridgeCache {
    pub fn t_len(&self) -> usize {
        self.t_len
    }

    /// log density of the centered m-step sum at offset w.
    fn ln_multi_step(&self, m: usize, w: f64) -> f64 {
        let grid = self.table_grid.as_ref().expect("tables exist for steps >= 2");
        let table = &self.tables[m - 1];
        let p = grid.position(w);
        if p < 0.0 || p > (grid.len() - 1) as f64 {
            return LOG_ZERO;
        }
        let i = (p as usize).min(grid.len() - 2);
        let frac = p - i as f64;
        let (a, b) = (table[i], table[i + 1]);
        if a == LOG_ZERO || b == LOG_ZERO {
            return LOG_ZERO;
        }
        a + (b - a) * frac
    }

    /// Draw a bridge into `out` (length t_len), consuming one uniform per
    /// interior site.
    pub fn sample_into(&self, out: &mut [f64], rng: &mut RngStream) {
        assert_eq!(out.len(), self.t_len);
        out[0] = self.x;
        out[self.t_len - 1] = self.y;
        const LOCAL_POINTS: usize = 512;
        let mut dens = vec![0.0f64; LOCAL_POINTS];
        for j in 1..self.t_len - 1 {
            let w = out[j - 1];
            let m_rem = self.t_len - 1 - j;
            // local window around the conditional mean
            let center = w + (self.y - w) / (m_rem + 1) as f64;
            let hw = self.sigma_tilt
                * (16.0 * ((m_rem as f64) / (m_rem as f64 + 1.0)).sqrt() + 4.0);
            let lo = center - hw;
            let dx = 2.0 * hw / (LOCAL_POINTS - 1) as f64;
            let mut lnmax = f64::NEG_INFINITY;
            let mut lnvals = vec![LOG_ZERO; LOCAL_POINTS];
            for (i, lv) in lnvals.iter_mut().enumerate() {
                let s = lo + dx * i as f64;
                let one = (self.ln_step)(s - w - self.p_hat);
                let rest = if m_rem == 0 {
                    0.0
                } else {
                    self.ln_multi_step(m_rem, self.y - s - m_rem as f64 * self.p_hat)
                };
                *lv = one + rest;
                if *lv > lnmax {
                    lnmax = *lv;
                }
            }
            let mut cum = 0.0;
            for i in 0..LOCAL_POINTS {
                let v = if lnvals[i] > LOG_ZERO {
                    (lnvals[i] - lnmax).exp()
                } else {
                    0.0
                };
                // trapezoid accumulation stored at cell granularity
                dens[i] = v;
                if i > 0 {
                    cum += 0.5 * (dens[i - 1] + dens[i]);
                }
            }
            let total = cum;
            let u = rng.uniform() * total;
            // walk the cells to invert
            let mut acc = 0.0;
            let mut s_drawn = center;
            for i in 1..LOCAL_POINTS {
                let cell = 0.5 * (dens[i - 1] + dens[i]);
                if acc + cell >= u || i == LOCAL_POINTS - 1 {
                    let frac = if cell > 0.0 { (u - acc) / cell } else { 0.5 };
                    s_drawn = lo + dx * (i as f64 - 1.0 + frac.clamp(0.0, 1.0));
                    break;
                }
                acc += cell;
            }
            out[j] = s_drawn;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boltzmann_weight_conventions() {
        // all sentinels: weight is exactly 1
        let curve = [0.3, -0.2, 0.5];
        assert_eq!(boltzmann_weight(&curve, &[None, None, None]), 1.0);
        // single active term with gap g contributes exp(-e^g)
        let g = 0.7f64;
        let bottom = [None, Some(curve[0] + g), None];
        let w = boltzmann_weight(&curve, &bottom);
        assert!((w - (-g.exp()).exp()).abs() < 1e-15);
        // always in (0, 1]
        let mut rng = RngStream::new(10, 0);
        for _ in 0..200 {
            let c: Vec<f64> = (0..4).map(|_| rng.uniform_in(-2.0, 2.0)).collect();
            let b: Vec<Option<f64>> = (0..4)
                .map(|_| {
                    if rng.uniform() < 0.5 {
                        None
                    } else {
                        Some(rng.uniform_in(-3.0, 1.0))
                    }
                })
                .collect();
            let w = boltzmann_weight(&c, &b);
            assert!(w > 0.0 && w <= 1.0);
        }
    }

    #[test]
    fn grand_coupling_base_case() {
        let s = GibbsSampler::new(1.0).unwrap();
        let b = BoundaryData::new(0.4, -1.2, vec![Some(0.0), Some(0.0)]).unwrap();
        let out = s.grand_coupling_sample(&b, &[]).unwrap();
        assert_eq!(out, vec![0.4, -1.2]);
    }

    #[test]
    fn grand_coupling_deterministic() {
        let s = GibbsSampler::new(2.0).unwrap();
        let b = BoundaryData::new(0.0, 1.0, vec![None, Some(-1.0), Some(-0.5), None, None])
            .unwrap();
        let u = [0.3, 0.7, 0.51];
        let a1 = s.grand_coupling_sample(&b, &u).unwrap();
        let a2 = s.grand_coupling_sample(&b, &u).unwrap();
        for (p, q) in a1.iter().zip(a2.iter()) {
            assert_eq!(p.to_bits(), q.to_bits());
        }
        assert_eq!(a1[0], 0.0);
        assert_eq!(a1[4], 1.0);
    }

    #[test]
    fn grand_coupling_needs_matching_uniforms() {
        let s = GibbsSampler::new(1.0).unwrap();
        let b = BoundaryData::free(0.0, 0.0, 5).unwrap();
        assert!(s.grand_coupling_sample(&b, &[0.5, 0.5]).is_err());
        assert!(s.grand_coupling_sample(&b, &[0.5, 0.5, 1.0]).is_err());
    }

    #[test]
    fn conditional_cdf_limits_and_oracle() {
        // T = 3, bottom all sentinel: F matches quadrature of G(r-x)G(y-r)
        let s = GibbsSampler::new(1.3).unwrap();
        let (x, y) = (0.2, -0.4);
        let b = BoundaryData::free(x, y, 3).unwrap();
        let (lo, hi) = s.default_window(&b);
        let grid = Grid::new(lo, hi, 1 << 12).unwrap();
        let ladder = s.compute_h_grid(x, &b.z[2..], &grid).unwrap();
        let cdf = s.conditional_cdf(&ladder[0], y).unwrap();
        assert_eq!(cdf.value_at(lo - 1.0), 0.0);
        assert_eq!(cdf.value_at(hi + 1.0), 1.0);
        // direct quadrature oracle, refined 32x between the table nodes
        let refine = 32usize;
        let qh = grid.step() / refine as f64;
        let density = |r: f64| (s.ln_g(r - x) + s.ln_g(y - r)).exp();
        let mut cum = vec![0.0f64; grid.len()];
        let mut acc = 0.0;
        for i in 1..grid.len() {
            let base = grid.node(i - 1);
            for k in 0..refine {
                let a = density(base + qh * k as f64);
                let b = density(base + qh * (k + 1) as f64);
                acc += 0.5 * qh * (a + b);
            }
            cum[i] = acc;
        }
        let total = cum[grid.len() - 1];
        let mut sup: f64 = 0.0;
        for i in 0..grid.len() {
            sup = sup.max((cdf.value_at(grid.node(i)) - cum[i] / total).abs());
        }
        assert!(sup < 1e-8, "sup-norm {sup}");
    }

    #[test]
    fn cdf_monotone_in_boundary_data() {
        // raising (x, y, z) pointwise lowers F pointwise
        let s = GibbsSampler::new(1.0).unwrap();
        let t_len = 5;
        let mk = |shift: f64| {
            BoundaryData::new(
                0.1 + shift,
                -0.3 + shift,
                vec![
                    None,
                    Some(-0.5 + shift),
                    Some(-1.0 + shift),
                    Some(-0.2 + shift),
                    Some(0.0 + shift),
                ],
            )
            .unwrap()
        };
        let b_lo = mk(0.0);
        let b_hi = mk(0.8);
        let window = {
            let (a1, b1) = s.default_window(&b_lo);
            let (a2, b2) = s.default_window(&b_hi);
            (a1.min(a2), b1.max(b2))
        };
        let grid = Grid::new(window.0, window.1, 1 << 12).unwrap();
        let lad_lo = s.compute_h_grid(b_lo.x, &b_lo.z[2..], &grid).unwrap();
        let lad_hi = s.compute_h_grid(b_hi.x, &b_hi.z[2..], &grid).unwrap();
        let m = t_len - 2;
        let cdf_lo = s.conditional_cdf(&lad_lo[m - 1], b_lo.y).unwrap();
        let cdf_hi = s.conditional_cdf(&lad_hi[m - 1], b_hi.y).unwrap();
        for i in 0..grid.len() {
            let node = grid.node(i);
            assert!(cdf_hi.value_at(node) <= cdf_lo.value_at(node) + 1e-12);
        }
    }

    #[test]
    fn h_grid_free_case_matches_double_quadrature() {
        // two sentinel interactions: level 2 is the two-step free density
        let s = GibbsSampler::new(1.0).unwrap();
        let c = 0.3;
        let b = BoundaryData::free(c, c, 4).unwrap();
        let (lo, hi) = s.default_window(&b);
        let grid = Grid::new(lo, hi, 1 << 12).unwrap();
        let ladder = s.compute_h_grid(c, &[None, None], &grid).unwrap();
        // level 1 without interaction is the bare step density
        for (i, v) in grid.nodes().enumerate().step_by(211) {
            assert_eq!(ladder[0].ln_values[i], s.ln_g(v - c));
        }
        // oracle: direct quadrature of int G(u - c) G(v - u) du per node v
        let qgrid = Grid::new(lo, hi, 4001).unwrap();
        let h = qgrid.step();
        let mut sup: f64 = 0.0;
        for (i, v) in grid.nodes().enumerate().step_by(97) {
            let mut acc = 0.0;
            for (qi, u) in qgrid.nodes().enumerate() {
                let w = if qi == 0 || qi == qgrid.len() - 1 { 0.5 } else { 1.0 };
                acc += w * (s.ln_g(u - c) + s.ln_g(v - u)).exp();
            }
            acc *= h;
            let got = if ladder[1].ln_values[i] > LOG_ZERO {
                ladder[1].ln_values[i].exp()
            } else {
                0.0
            };
            sup = sup.max((got - acc).abs());
        }
        assert!(sup < 1e-8, "sup {sup}");
    }

    #[test]
    fn h_grid_mass_decreases_in_bottom_curve() {
        let s = GibbsSampler::new(1.0).unwrap();
        let c = 0.0;
        let b = BoundaryData::free(c, c, 5).unwrap();
        let (lo, hi) = s.default_window(&b);
        let grid = Grid::new(lo, hi, 1 << 12).unwrap();
        let base = s
            .compute_h_grid(c, &[Some(-1.0), Some(-1.0), Some(-1.0)], &grid)
            .unwrap();
        let raised = s
            .compute_h_grid(c, &[Some(-1.0), Some(0.0), Some(-1.0)], &grid)
            .unwrap();
        let m0 = GridDensity {
            grid: grid.clone(),
            ln_values: base[2].ln_values.clone(),
        }
        .total_mass();
        let m1 = GridDensity {
            grid: grid.clone(),
            ln_values: raised[2].ln_values.clone(),
        }
        .total_mass();
        assert!(m1 < m0);
    }

    #[test]
    fn window_too_small_detected() {
        let s = GibbsSampler::new(1.0).unwrap();
        let grid = Grid::new(-0.5, 0.5, 256).unwrap();
        let err = s.compute_h_grid(0.0, &[None, None, None], &grid);
        assert!(matches!(err, Err(Error::WindowTooSmall { .. })));
    }

    #[test]
    fn heat_bath_keeps_endpoints() {
        let s = GibbsSampler::new(1.5).unwrap();
        let b = BoundaryData::new(0.3, -0.8, vec![None, Some(-2.0), Some(-2.0), None]).unwrap();
        let mut curve = vec![0.3, 0.0, 0.0, -0.8];
        let mut rng = RngStream::new(3, 3);
        for _ in 0..50 {
            s.heat_bath_sweep(&mut curve, &b, SweepOrder::Sequential, &mut rng)
                .unwrap();
            assert_eq!(curve[0], 0.3);
            assert_eq!(curve[3], -0.8);
            assert!(curve.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn normalizer_free_case_is_one() {
        let s = GibbsSampler::new(2.0).unwrap();
        let b = BoundaryData::free(0.0, 0.5, 4).unwrap();
        let mut rng = RngStream::new(8, 0);
        let (est, se) = s.estimate_normalizer(&b, 500, &mut rng).unwrap();
        assert_eq!(est, 1.0);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn bridge_endpoints_and_reproducibility() {
        let s = GibbsSampler::new(2.0).unwrap();
        let cache = s.bridge_cache(16, 0.25, -3.0).unwrap();
        let mut rng = RngStream::new(21, 5);
        let mut out = vec![0.0; 16];
        cache.sample_into(&mut out, &mut rng);
        assert_eq!(out[0], 0.25);
        assert_eq!(out[15], -3.0);
        let mut rng2 = RngStream::new(21, 5);
        let mut out2 = vec![0.0; 16];
        cache.sample_into(&mut out2, &mut rng2);
        assert_eq!(out, out2);
    }

    #[test]
    fn resample_interior_degenerate_window() {
        let s = GibbsSampler::new(1.0).unwrap();
        let mut ens = crate::ensemble::LineEnsemble::new(
            0,
            1,
            vec![vec![1.0, 2.0], vec![0.0, 0.0]],
        )
        .unwrap();
        let mut rng = RngStream::new(0, 1);
        s.resample_interior(&mut ens, 0, 1, &mut rng).unwrap();
        assert_eq!(ens.at(1, 0), 1.0);
        assert_eq!(ens.at(1, 1), 2.0);
        assert_eq!(rng.counter(), 0);
    }
}
