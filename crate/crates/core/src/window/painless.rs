use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric::gl20;

/// Cosine-ramp plateau bump scaled by `sqrt(b)`:
/// rises on `[0, ramp]`, is flat on `[ramp, a]` and falls on `[a, a + ramp]`.
/// The ramp profile `theta(u) = sin^2(pi u / 2)` makes the window C^1.
#[derive(Debug, Clone, PartialEq)]
pub struct PainlessWindow {
    pub a: f64,
    pub b: f64,
    /// Upper bound `L` on the support length, `L <= 1/b`.
    pub l: f64,
    pub ramp: f64,
    amplitude: f64,
}

fn theta(u: f64) -> f64 {
    let s = (0.5 * PI * u).sin();
    s * s
}

impl PainlessWindow {
    pub fn new(a: f64, b: f64, l: f64, ramp: f64) -> Result<Self> {
        let slack = 1e-12;
        let bad = |msg: String| Err(Error::ParameterViolation(msg));
        if !(a > 0.0 && b > 0.0 && l.is_finite() && ramp.is_finite()) {
            return bad(format!("need a, b > 0 (a = {a}, b = {b})"));
        }
        if !(a < l) {
            return bad(format!("need a < L (a = {a}, L = {l})"));
        }
        if l > (1.0 + slack) / b {
            return bad(format!("support length L = {l} exceeds 1/b = {}", 1.0 / b));
        }
        if !(ramp > 0.0) || ramp > (l - a) * (1.0 + slack) + slack || ramp > a * (1.0 + slack) {
            return bad(format!("ramp {ramp} must lie in (0, min(L - a, a)] = (0, {}]", (l - a).min(a)));
        }
        let ramp = ramp.min(a);
        Ok(PainlessWindow { a, b, l, ramp, amplitude: b.sqrt() })
    }

    /// Length of the actual support `[0, a + ramp]`.
    pub fn support_len(&self) -> f64 {
        self.a + self.ramp
    }

    /// `||phi||^2 = a b`: one period of `sum_k phi(x - k a)^2 = b` has length `a`.
    pub fn norm_sq(&self) -> f64 {
        self.a * self.b
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (a, r) = (self.a, self.ramp);
        if !(x > 0.0) || x >= a + r {
            0.0
        } else if x < r {
            self.amplitude * (0.5 * PI * theta(x / r)).sin()
        } else if x <= a {
            self.amplitude
        } else {
            self.amplitude * (0.5 * PI * theta((x - a) / r)).cos()
        }
    }

    pub fn breakpoints(&self) -> [f64; 4] {
        [0.0, self.ramp, self.a, self.a + self.ramp]
    }

    /// Pieces of `[lo, hi]` on which `phi(x - q)` is analytic, with extra cuts.
    pub(crate) fn pieces(&self, q: f64, lo: f64, hi: f64, extra: &[f64]) -> Vec<(f64, f64)> {
        let mut cuts: Vec<f64> = self
            .breakpoints()
            .iter()
            .map(|b| b + q)
            .chain(extra.iter().copied())
            .filter(|&c| c > lo && c < hi)
            .collect();
        cuts.push(lo);
        cuts.push(hi);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-15);
        cuts.windows(2).map(|w| (w[0], w[1])).filter(|(a, b)| b > a).collect()
    }

    /// `int f(x) phi(x - q) e^{-2 pi i p x} dx` over `[lo, hi]` intersected with the
    /// support of `phi(. - q)`. `f` must be analytic away from `f_breaks`.
    pub fn integrate(
        &self,
        q: f64,
        p: f64,
        f: &dyn Fn(f64) -> Complex64,
        f_breaks: &[f64],
        range: (f64, f64),
    ) -> Result<Complex64> {
        let lo = range.0.max(q);
        let hi = range.1.min(q + self.support_len());
        if !(hi > lo) {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let pieces = self.pieces(q, lo, hi, f_breaks);
        let integrand = |x: f64| f(x) * self.eval(x - q) * Complex64::from_polar(1.0, -2.0 * PI * p * x);
        let rule = |panels: &[usize]| -> Complex64 {
            let (xs, ws) = gl20();
            let mut acc = Complex64::new(0.0, 0.0);
            for (&(a, b), &n) in pieces.iter().zip(panels) {
                let h = (b - a) / n as f64;
                for k in 0..n {
                    let mid = a + (k as f64 + 0.5) * h;
                    for (x, w) in xs.iter().zip(ws) {
                        acc += integrand(mid + 0.5 * h * x) * (0.5 * h * w);
                    }
                }
            }
            acc
        };
        let mut panels: Vec<usize> =
            pieces.iter().map(|(a, b)| 1 + ((b - a) * (p.abs() + 1.0)).ceil() as usize).collect();
        let mut prev = rule(&panels);
        let mut change = f64::INFINITY;
        for _ in 0..6 {
            panels.iter_mut().for_each(|n| *n *= 2);
            let next = rule(&panels);
            change = (next - prev).norm();
            prev = next;
            if change <= 1e-13 * next.norm().max(1.0) {
                return Ok(next);
            }
        }
        Err(Error::QuadratureNonConvergence { change })
    }

    pub fn kernel_value(&self, q: f64, p: f64) -> Result<Complex64> {
        if q.abs() >= self.support_len() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let f = |x: f64| Complex64::new(self.eval(x), 0.0);
        self.integrate(q, p, &f, &self.breakpoints(), (0.0, self.support_len()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::composite_nodes;

    fn suite() -> PainlessWindow {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        PainlessWindow::new(a, a, 1.0 / a, 1.0 / a - a).unwrap()
    }

    #[test]
    fn parameter_checks() {
        assert!(PainlessWindow::new(0.5, 1.0, 1.0, 0.5).is_ok());
        assert!(matches!(PainlessWindow::new(0.9, 1.2, 1.0, 0.05), Err(Error::ParameterViolation(_))));
        assert!(matches!(PainlessWindow::new(0.5, 1.0, 1.0, 0.6), Err(Error::ParameterViolation(_))));
        assert!(matches!(PainlessWindow::new(0.5, 1.0, 0.4, 0.1), Err(Error::ParameterViolation(_))));
    }

    #[test]
    fn shifted_squares_sum_to_b() {
        for w in [suite(), PainlessWindow::new(0.5, 1.0, 1.0, 0.2).unwrap()] {
            for i in 0..4000 {
                let x = -3.0 + i as f64 * 0.00173;
                let s: f64 = (-20..20).map(|k| w.eval(x - k as f64 * w.a).powi(2)).sum();
                assert!((s - w.b).abs() < 1e-12, "x = {x}: {s}");
            }
        }
    }

    #[test]
    fn norm_law_by_quadrature() {
        let w = suite();
        let (mut xs, mut ws) = (Vec::new(), Vec::new());
        for (a, b) in w.pieces(0.0, 0.0, w.support_len(), &[]) {
            composite_nodes(a, b, 4, &mut xs, &mut ws);
        }
        let n: f64 = xs.iter().zip(&ws).map(|(&x, &wt)| wt * w.eval(x).powi(2)).sum();
        assert!((n - w.norm_sq()).abs() < 1e-14);
        assert!((w.kernel_value(0.0, 0.0).unwrap().re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn disjoint_supports_give_zero() {
        let w = suite();
        assert_eq!(w.kernel_value(w.support_len(), 0.3).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(w.kernel_value(-2.0, 0.0).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn kernel_is_hermitian_even() {
        // V(-q, -p) = conj(V(q, p)) e^{...}; for real phi the modulus is even
        let w = suite();
        for &(q, p) in &[(0.3, 1.7), (0.7, -2.1), (1.2, 5.0)] {
            let v = w.kernel_value(q, p).unwrap();
            let u = w.kernel_value(-q, -p).unwrap();
            assert!((v.norm() - u.norm()).abs() < 1e-14);
        }
    }
}
