use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Samples `phi(x0 + j step)`, `j = 0..N`, of a function treated as periodic
/// with period `N step`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWindow {
    x0: f64,
    step: f64,
    values: Vec<Complex64>,
}

pub(crate) fn fft(values: &mut [Complex64]) {
    FftPlanner::new().plan_fft_forward(values.len()).process(values);
}

/// Inverse transform including the `1/N` factor.
pub(crate) fn ifft(values: &mut [Complex64]) {
    let n = values.len();
    FftPlanner::new().plan_fft_inverse(n).process(values);
    let s = 1.0 / n as f64;
    values.iter_mut().for_each(|v| *v *= s);
}

/// Signed frequency of FFT bin `k` for `n` samples spaced `step` apart.
pub(crate) fn bin_frequency(k: usize, n: usize, step: f64) -> f64 {
    let t = n as f64 * step;
    if 2 * k < n {
        k as f64 / t
    } else if 2 * k > n {
        (k as f64 - n as f64) / t
    } else {
        // Nyquist bin: treated as the symmetric pair, see `nyquist_weight`
        k as f64 / t
    }
}

impl SampledWindow {
    pub fn new(x0: f64, step: f64, values: Vec<Complex64>) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() || !x0.is_finite() {
            return Err(Error::ParameterViolation(format!("grid step must be positive, got {step}")));
        }
        if values.len() < 2 {
            return Err(Error::ParameterViolation("need at least two samples".into()));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::ParameterViolation("samples must be finite".into()));
        }
        Ok(SampledWindow { x0, step, values })
    }

    /// Samples `f` on `x0 + j step`, `j < n`.
    pub fn sample(f: impl Fn(f64) -> Complex64, x0: f64, step: f64, n: usize) -> Result<Self> {
        Self::new(x0, step, (0..n).map(|j| f(x0 + j as f64 * step)).collect())
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn period(&self) -> f64 {
        self.step * self.values.len() as f64
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn grid(&self, j: usize) -> f64 {
        self.x0 + j as f64 * self.step
    }

    pub fn norm_sq(&self) -> f64 {
        self.step * crate::numeric::compensated_sum(self.values.iter().map(|v| v.norm_sqr()))
    }

    /// Samples of `phi(x_j - q)` for the periodized band-limited interpolant.
    pub fn shifted(&self, q: f64) -> Vec<Complex64> {
        let n = self.values.len();
        let s = q / self.step;
        if (s - s.round()).abs() < 1e-9 {
            let s = (s.round() as i64).rem_euclid(n as i64) as usize;
            return (0..n).map(|j| self.values[(j + n - s) % n]).collect();
        }
        let mut spec = self.values.clone();
        fft(&mut spec);
        for (k, v) in spec.iter_mut().enumerate() {
            let xi = bin_frequency(k, n, self.step);
            if 2 * k == n {
                *v *= (2.0 * PI * xi * q).cos();
            } else {
                *v *= Complex64::from_polar(1.0, -2.0 * PI * xi * q);
            }
        }
        ifft(&mut spec);
        spec
    }

    /// `step * sum_j phi_j conj(g_j) e^{-2 pi i p x_j}`.
    pub fn pair_integral(&self, f: &[Complex64], g: &[Complex64], p: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let rot = Complex64::from_polar(1.0, -2.0 * PI * p * self.step);
        let mut phase = Complex64::from_polar(1.0, -2.0 * PI * p * self.x0);
        for (j, (a, b)) in f.iter().zip(g).enumerate() {
            if j % 256 == 0 {
                phase = Complex64::from_polar(1.0, -2.0 * PI * p * self.grid(j));
            }
            acc += a * b.conj() * phase;
            phase *= rot;
        }
        acc * self.step
    }

    pub fn kernel_value(&self, q: f64, p: f64) -> Complex64 {
        let g = self.shifted(q);
        self.pair_integral(&self.values, &g, p)
    }

    /// Band-limited interpolation at `x`.
    pub fn interpolate(&self, x: f64) -> Complex64 {
        let n = self.values.len();
        let t = (x - self.x0) / self.step;
        if (t - t.round()).abs() < 1e-12 {
            return self.values[(t.round() as i64).rem_euclid(n as i64) as usize];
        }
        let mut spec = self.values.clone();
        fft(&mut spec);
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, v) in spec.iter().enumerate() {
            let xi = bin_frequency(k, n, self.step);
            let arg = 2.0 * PI * xi * (x - self.x0);
            if 2 * k == n {
                acc += v * arg.cos();
            } else {
                acc += v * Complex64::from_polar(1.0, arg);
            }
        }
        acc / n as f64
    }

    pub fn effective_support(&self) -> (f64, f64) {
        let max = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let keep = |v: &Complex64| v.norm() > 1e-15 * max;
        let lo = self.values.iter().position(keep).unwrap_or(0);
        let hi = self.values.iter().rposition(keep).unwrap_or(self.values.len() - 1);
        (self.grid(lo), self.grid(hi))
    }

    /// Fraction of energy in the outer tenth of the grid and of the spectrum.
    pub fn edge_energy(&self) -> (f64, f64) {
        let n = self.values.len();
        let total: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        let band = (n / 20).max(1);
        let spatial: f64 = self.values[..band].iter().chain(&self.values[n - band..]).map(|v| v.norm_sqr()).sum();
        let mut spec = self.values.clone();
        fft(&mut spec);
        let spectral: f64 = spec[n / 2 - band..n / 2 + band].iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64;
        (spatial / total, spectral / total)
    }
}
