//! Metaplectic action `mu(A)` on windows, up to a global phase.
//!
//! Conventions: `A = [[a, b], [c, d]]` acts on columns `(q, p)` and
//! `mu(A) rho(lambda) mu(A)^-1 = rho(A lambda)`. With this,
//!
//! * `L(c) = [[1, 0], [c, 1]]` is multiplication by `e^{i pi c x^2}`,
//! * `U(b) = [[1, b], [0, 1]]` is the Fourier multiplier `e^{-i pi b xi^2}`,
//! * `D(s) = diag(s, 1/s)` is `f -> |s|^{-1/2} f(x / s)`,
//! * `J = [[0, 1], [-1, 0]]` is the Fourier transform with kernel `e^{-2 pi i x xi}`,
//!
//! and a Gaussian `exp(i pi w x^2)` is sent to width `(d w + c) / (b w + a)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{enumerate_in_disk, Lattice2D, LatticePoint, SL2Matrix};
use crate::par;
use crate::window::{
    gaussian_window, sampled_window, GaussianWindow, SampledWindow, Window, WindowKind,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Generator {
    /// `L(c)`.
    Chirp(f64),
    /// `U(b)`.
    FrequencyChirp(f64),
    /// `D(s)`.
    Dilation(f64),
    /// `J`.
    FourierFlip,
}

impl Generator {
    pub fn matrix(&self) -> SL2Matrix {
        match *self {
            Generator::Chirp(c) => SL2Matrix::lower_shear(c),
            Generator::FrequencyChirp(b) => SL2Matrix::shear(b),
            Generator::Dilation(s) => SL2Matrix::diag(s),
            Generator::FourierFlip => SL2Matrix::FLIP,
        }
    }
}

/// Generators whose product, left to right, is the factored matrix.
/// They act on functions right to left.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetaplecticFactorization {
    pub steps: Vec<Generator>,
}

impl MetaplecticFactorization {
    pub fn product(&self) -> SL2Matrix {
        self.steps.iter().fold(SL2Matrix::IDENTITY, |acc, g| acc * g.matrix())
    }
}

/// `A = L(d/b) D(b) J L(a/b)` if `b != 0`, else `A = L(c/a) D(a)`.
pub fn factorize(a: &SL2Matrix) -> MetaplecticFactorization {
    let steps = if a.b != 0.0 {
        vec![
            Generator::Chirp(a.d / a.b),
            Generator::Dilation(a.b),
            Generator::FourierFlip,
            Generator::Chirp(a.a / a.b),
        ]
    } else {
        vec![Generator::Chirp(a.c / a.a), Generator::Dilation(a.a)]
    };
    MetaplecticFactorization { steps }
}

/// Factorization into chirps and frequency chirps only, used by the sampled
/// realization: `A = U(-t) L(alpha) U(beta) L(gamma) U(-s)` where
/// `U(t) A U(s)` has the largest upper-right entry over `s, t in {-1, 0, 1}`.
pub fn shear_factorize(a: &SL2Matrix) -> MetaplecticFactorization {
    let mut best = (0.0, 0.0, *a);
    let mut best_b = a.b.abs();
    if best_b < 0.5 {
        for s in [-1.0, 0.0, 1.0] {
            for t in [-1.0, 0.0, 1.0] {
                let m = SL2Matrix::shear(t) * *a * SL2Matrix::shear(s);
                if m.b.abs() > best_b + 1e-12 {
                    best_b = m.b.abs();
                    best = (s, t, m);
                }
            }
        }
    }
    let (s, t, m) = best;
    let mut steps = Vec::with_capacity(5);
    if t != 0.0 {
        steps.push(Generator::FrequencyChirp(-t));
    }
    steps.push(Generator::Chirp((m.d - 1.0) / m.b));
    steps.push(Generator::FrequencyChirp(m.b));
    steps.push(Generator::Chirp((m.a - 1.0) / m.b));
    if s != 0.0 {
        steps.push(Generator::FrequencyChirp(-s));
    }
    MetaplecticFactorization { steps }
}

/// Image of a generalized Gaussian; the norm is preserved.
pub fn mu_apply_gaussian(a: &SL2Matrix, g: &GaussianWindow) -> Result<Window> {
    let w = (a.d * g.w + a.c) / (a.b * g.w + a.a);
    gaussian_window(w, g.norm_sq())
}

/// Relative energy allowed near the grid edge or the Nyquist band.
const ALIASING_LIMIT: f64 = 1e-9;

fn check_grid(s: &SampledWindow, what: &str) -> Result<()> {
    let (spatial, spectral) = s.edge_energy();
    if spatial > ALIASING_LIMIT || spectral > ALIASING_LIMIT {
        return Err(Error::GridAliasing(format!(
            "{what}: edge energy {spatial:e} in space, {spectral:e} in frequency"
        )));
    }
    Ok(())
}

/// Applies `mu(A)` to a sampled window via chirp multiplications and Fourier
/// multipliers on the periodic grid.
pub fn mu_apply_sampled(a: &SL2Matrix, s: &SampledWindow) -> Result<SampledWindow> {
    check_grid(s, "input")?;
    let plan = shear_factorize(a);
    let n = s.len();
    let mut v = s.values().to_vec();
    for g in plan.steps.iter().rev() {
        match *g {
            Generator::Chirp(c) => {
                for (j, z) in v.iter_mut().enumerate() {
                    let x = s.grid(j);
                    *z *= Complex64::from_polar(1.0, PI * c * x * x);
                }
            }
            Generator::FrequencyChirp(b) => {
                crate::window::fft(&mut v);
                for (k, z) in v.iter_mut().enumerate() {
                    let xi = crate::window::bin_frequency(k, n, s.step());
                    *z *= Complex64::from_polar(1.0, -PI * b * xi * xi);
                }
                crate::window::ifft(&mut v);
            }
            Generator::Dilation(_) | Generator::FourierFlip => unreachable!("shear plans use chirps only"),
        }
        let step = SampledWindow::new(s.x0(), s.step(), v.clone())?;
        check_grid(&step, "intermediate")?;
    }
    SampledWindow::new(s.x0(), s.step(), v)
}

/// Grid used to realize `mu(A)` for windows without a closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingGrid {
    pub step: f64,
    pub len: usize,
}

impl Default for SamplingGrid {
    fn default() -> Self {
        SamplingGrid { step: 1.0 / 128.0, len: 1 << 15 }
    }
}

/// Samples `window` on `grid`, centered on its effective support.
pub fn sample_window(window: &Window, grid: &SamplingGrid) -> Result<SampledWindow> {
    if let WindowKind::Sampled(s) = window.kind() {
        return Ok(s.clone());
    }
    let (lo, hi) = window.effective_support();
    let half = 0.5 * grid.step * grid.len as f64;
    let x0 = ((0.5 * (lo + hi) - half) / grid.step).round() * grid.step;
    SampledWindow::sample(|x| window.eval(x), x0, grid.step, grid.len)
}

/// `mu(A) phi`: closed form for Gaussians, sampled otherwise.
pub fn mu_apply(a: &SL2Matrix, window: &Window, grid: &SamplingGrid) -> Result<Window> {
    match window.kind() {
        WindowKind::Gaussian(g) => mu_apply_gaussian(a, g),
        _ => {
            let s = mu_apply_sampled(a, &sample_window(window, grid)?)?;
            sampled_window(s.x0(), s.step(), s.values().to_vec())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovarianceReport {
    pub max_modulus_deviation: f64,
    pub deviations: Vec<f64>,
}

/// Compares `|<phi, phi_lambda>|` with `|<mu(A) phi, (mu(A) phi)_{A lambda}>|`.
pub fn verify_covariance(
    window: &Window,
    a: &SL2Matrix,
    test_points: &[[f64; 2]],
    grid: &SamplingGrid,
) -> Result<CovarianceReport> {
    let image = mu_apply(a, window, grid)?;
    let pairs: Vec<Result<f64>> = par::map_ordered(test_points, |&lambda| {
        let [q, p] = lambda;
        let [q2, p2] = a.apply(lambda);
        let before = window.kernel_value(q, p)?.norm();
        let after = image.kernel_value(q2, p2)?.norm();
        Ok((before - after).abs())
    });
    let deviations = pairs.into_iter().collect::<Result<Vec<f64>>>()?;
    let max = deviations.iter().copied().fold(0.0, f64::max);
    Ok(CovarianceReport { max_modulus_deviation: max, deviations })
}

/// The `count` lattice points closest to the origin, embedded.
pub fn nearest_points(lattice: &Lattice2D, count: usize) -> Vec<[f64; 2]> {
    let mut r = lattice.cell_diameter();
    loop {
        let mut pts: Vec<LatticePoint> = enumerate_in_disk(lattice, r);
        if pts.len() >= count {
            pts.sort_by(|x, y| lattice.norm(*x).total_cmp(&lattice.norm(*y)).then(x.cmp(y)));
            return pts.into_iter().take(count).map(|p| lattice.embed(p)).collect();
        }
        r *= 1.5;
    }
}
