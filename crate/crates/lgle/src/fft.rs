//! Minimal iterative radix-2 FFT used for density convolutions on uniform
//! grids. Sizes are always powers of two here, so nothing fancier is needed.

#[derive(Debug, Clone)]
pub struct Fft {
    n: usize,
    // twiddle factors for the forward transform, one table per butterfly size
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl Fft {
    pub fn new(n: usize) -> Self {
        assert!(n.is_power_of_two(), "fft size must be a power of two");
        let mut cos = vec![0.0; n / 2];
        let mut sin = vec![0.0; n / 2];
        for k in 0..n / 2 {
            let ang = -2.0 * std::f64::consts::PI * k as f64 / n as f64;
            cos[k] = ang.cos();
            sin[k] = ang.sin();
        }
        Fft { n, cos, sin }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    fn transform(&self, re: &mut [f64], im: &mut [f64], inverse: bool) {
        let n = self.n;
        assert_eq!(re.len(), n);
        assert_eq!(im.len(), n);
        // bit-reversal permutation
        let mut j = 0usize;
        for i in 0..n {
            if i < j {
                re.swap(i, j);
                im.swap(i, j);
            }
            let mut m = n >> 1;
            while m >= 1 && j & m != 0 {
                j ^= m;
                m >>= 1;
            }
            j |= m;
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let (wr, wi_fwd) = (self.cos[k * stride], self.sin[k * stride]);
                    let wi = if inverse { -wi_fwd } else { wi_fwd };
                    let a = start + k;
                    let b = a + half;
                    let tr = re[b] * wr - im[b] * wi;
                    let ti = re[b] * wi + im[b] * wr;
                    re[b] = re[a] - tr;
                    im[b] = im[a] - ti;
                    re[a] += tr;
                    im[a] += ti;
                }
            }
            len <<= 1;
        }
        if inverse {
            let scale = 1.0 / n as f64;
            for v in re.iter_mut() {
                *v *= scale;
            }
            for v in im.iter_mut() {
                *v *= scale;
            }
        }
    }

    pub fn forward(&self, re: &mut [f64], im: &mut [f64]) {
        self.transform(re, im, false);
    }

    pub fn inverse(&self, re: &mut [f64], im: &mut [f64]) {
        self.transform(re, im, true);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn naive_dft(re: &[f64], im: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = re.len();
        let mut or = vec![0.0; n];
        let mut oi = vec![0.0; n];
        for k in 0..n {
            for t in 0..n {
                let ang = -2.0 * std::f64::consts::PI * (k * t % n) as f64 / n as f64;
                or[k] += re[t] * ang.cos() - im[t] * ang.sin();
                oi[k] += re[t] * ang.sin() + im[t] * ang.cos();
            }
        }
        (or, oi)
    }

    #[test]
    fn matches_naive_dft() {
        let n = 64;
        let mut rng = RngStream::new(1, 1);
        let re0: Vec<f64> = (0..n).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let im0: Vec<f64> = (0..n).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let (want_r, want_i) = naive_dft(&re0, &im0);
        let mut re = re0.clone();
        let mut im = im0.clone();
        Fft::new(n).forward(&mut re, &mut im);
        for k in 0..n {
            assert!((re[k] - want_r[k]).abs() < 1e-10);
            assert!((im[k] - want_i[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn round_trip() {
        let n = 256;
        let mut rng = RngStream::new(2, 0);
        let re0: Vec<f64> = (0..n).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let im0 = vec![0.0; n];
        let mut re = re0.clone();
        let mut im = im0.clone();
        let fft = Fft::new(n);
        fft.forward(&mut re, &mut im);
        fft.inverse(&mut re, &mut im);
        for k in 0..n {
            assert!((re[k] - re0[k]).abs() < 1e-12);
            assert!(im[k].abs() < 1e-12);
        }
    }
}
