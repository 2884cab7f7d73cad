use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `coeff * exp(i pi w (x - center)^2 + 2 pi i freq x)` with `Im w > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussAtom {
    pub coeff: Complex64,
    pub w: Complex64,
    pub center: f64,
    pub freq: f64,
}

impl GaussAtom {
    pub fn eval(&self, x: f64) -> Complex64 {
        let d = x - self.center;
        self.coeff * (I * PI * (self.w * d * d) + I * (2.0 * PI * self.freq * x)).exp()
    }

    /// `<self, other> = int self(x) conj(other(x)) dx`, closed form.
    pub fn inner(&self, other: &GaussAtom) -> Complex64 {
        let (w1, w2c) = (self.w, other.w.conj());
        let a = -I * w1 + I * w2c;
        let b = -I * w1 * self.center + I * w2c * other.center + I * (self.freq - other.freq);
        let c = I * PI * w1 * self.center * self.center - I * PI * w2c * other.center * other.center;
        self.coeff * other.coeff.conj() * (PI * b * b / a + c).exp() / a.sqrt()
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self).re
    }

    /// Half-width beyond which `|atom| <= |coeff| * 1e-20`.
    pub fn effective_radius(&self) -> f64 {
        (46.0 / (PI * self.w.im)).sqrt()
    }
}

/// Generalized Gaussian `N exp(i pi w x^2)`, `N > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianWindow {
    pub w: Complex64,
    pub amplitude: f64,
}

impl GaussianWindow {
    pub fn new(w: Complex64, norm_sq: f64) -> Result<Self> {
        if !(w.im > 0.0) || !w.re.is_finite() || !w.im.is_finite() {
            return Err(Error::ParameterViolation(format!("Gaussian width needs Im w > 0, got {w}")));
        }
        if !(norm_sq > 0.0) || !norm_sq.is_finite() {
            return Err(Error::ParameterViolation(format!("norm must be positive, got {norm_sq}")));
        }
        // ||phi||^2 = N^2 / sqrt(2 Im w)
        let amplitude = (norm_sq * (2.0 * w.im).sqrt()).sqrt();
        Ok(GaussianWindow { w, amplitude })
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitude * self.amplitude / (2.0 * self.w.im).sqrt()
    }

    pub fn atom(&self, q: f64, p: f64) -> GaussAtom {
        GaussAtom { coeff: Complex64::new(self.amplitude, 0.0), w: self.w, center: q, freq: p }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.atom(0.0, 0.0).eval(x)
    }

    pub fn kernel_value(&self, q: f64, p: f64) -> Complex64 {
        self.atom(0.0, 0.0).inner(&self.atom(q, p))
    }

    /// `|V(q, p)|^2 = ||phi||^4 exp(-pi |w q - p|^2 / Im w)`.
    pub fn kernel_modulus_sq(&self, q: f64, p: f64) -> f64 {
        let z = self.w * q - p;
        self.norm_sq().powi(2) * (-PI * z.norm_sqr() / self.w.im).exp()
    }

    /// Smallest eigenvalue `kappa` of the quadratic form `|w q - p|^2 / Im w`,
    /// so that `|V|^2 <= ||phi||^4 exp(-pi kappa |lambda|^2)`.
    pub fn decay_rate(&self) -> f64 {
        let (u, v) = (self.w.re, self.w.im);
        let (m11, m12, m22) = ((u * u + v * v) / v, -u / v, 1.0 / v);
        let tr = m11 + m22;
        let det = m11 * m22 - m12 * m12;
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        // stable smaller root
        det / (tr / 2.0 + disc)
    }

    pub fn effective_support(&self) -> (f64, f64) {
        let r = self.atom(0.0, 0.0).effective_radius();
        (-r, r)
    }
}
