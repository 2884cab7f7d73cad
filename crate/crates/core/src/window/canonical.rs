use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{sampled_window, Window, WindowKind};
use crate::error::{Error, Result};
use crate::lattice::Lattice2D;
use crate::par;
use crate::window::verify_tightness;

/// Periodic grid for the discrete frame-operator model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridParams {
    pub step: f64,
    pub period: f64,
    /// Accepted tightness residual of the result.
    pub tol: f64,
    /// Number of probe functions used to check the result.
    pub n_tests: usize,
}

impl Default for GridParams {
    fn default() -> Self {
        GridParams { step: 1.0 / 32.0, period: 64.0, tol: 1e-4, n_tests: 8 }
    }
}

fn integer_ratio(x: f64, what: &str) -> Result<usize> {
    let r = x.round();
    if r < 1.0 || (x - r).abs() > 1e-9 * x.max(1.0) {
        return Err(Error::GridIncompatible(format!("{what} = {x} is not a positive integer")));
    }
    Ok(r as usize)
}

/// `S^{-1/2} phi` on a periodized grid, where `S` is the frame operator of the
/// Gabor system of `phi` on `a Z x b Z`.
///
/// On the grid `S f(x) = (1/b) sum_m G_m(x) f(x - m/b)` with
/// `G_m(x) = sum_k phi(x - k a) conj(phi(x - k a - m/b))`, which only couples
/// samples whose indices agree modulo `1/(b h)`. Each such block is Hermitian
/// and is inverted-square-rooted by an eigendecomposition.
pub fn canonical_tight(window: &Window, lattice: &Lattice2D, grid: &GridParams) -> Result<Window> {
    let (a, b) = lattice.as_rectangular().ok_or(Error::UnsupportedLattice)?;
    let h = grid.step;
    let alpha = integer_ratio(a / h, "a / step")?;
    let beta = integer_ratio(1.0 / (b * h), "1 / (b step)")?;
    let n = integer_ratio(grid.period / h, "period / step")?;
    if n % alpha != 0 || n % beta != 0 {
        return Err(Error::GridIncompatible(format!("{n} grid points are not a multiple of {alpha} and {beta}")));
    }
    let (lo, hi) = window.effective_support();
    if 8.0 * (hi - lo) > grid.period * (1.0 + 1e-12) {
        return Err(Error::GridIncompatible(format!(
            "period {} is shorter than 8x the effective support {}",
            grid.period,
            hi - lo
        )));
    }
    let x0 = ((0.5 * (lo + hi) - 0.5 * grid.period) / h).round() * h;
    let phi: Vec<Complex64> = match window.kind() {
        WindowKind::Sampled(s) => {
            if (s.step() - h).abs() > 1e-15 || s.len() != n {
                return Err(Error::GridIncompatible("sampled window must already live on the grid".into()));
            }
            s.values().to_vec()
        }
        _ => (0..n).map(|j| window.eval(x0 + j as f64 * h)).collect(),
    };
    let x0 = match window.kind() {
        WindowKind::Sampled(s) => s.x0(),
        _ => x0,
    };

    let m = n / beta;
    let shifts = n / alpha;
    let blocks: Vec<usize> = (0..beta).collect();
    let solved = par::map_ordered(&blocks, |&r| -> (Vec<Complex64>, f64, f64) {
        let idx = |i: usize| r + i * beta;
        let mut s = DMatrix::<Complex64>::zeros(m, m);
        for k in 0..shifts {
            let v: Vec<Complex64> = (0..m).map(|i| phi[(idx(i) + n - (k * alpha) % n) % n]).collect();
            if v.iter().all(|z| z.norm_sqr() == 0.0) {
                continue;
            }
            for i in 0..m {
                if v[i].norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..m {
                    s[(i, j)] += v[i] * v[j].conj();
                }
            }
        }
        s /= Complex64::new(b, 0.0);
        let eig = s.symmetric_eigen();
        let lmin = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        let lmax = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
        let u = &eig.eigenvectors;
        let x = nalgebra::DVector::from_iterator(m, (0..m).map(|i| phi[idx(i)]));
        let mut coeffs = u.adjoint() * x;
        for (c, &l) in coeffs.iter_mut().zip(eig.eigenvalues.iter()) {
            *c /= l.max(f64::MIN_POSITIVE).sqrt();
        }
        let y = u * coeffs;
        (y.iter().copied().collect(), lmin, lmax)
    });

    let lmin = solved.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let lmax = solved.iter().map(|s| s.2).fold(0.0, f64::max);
    if !(lmin >= 1e-9 * lmax) {
        return Err(Error::NotAFrame { min_eigenvalue: lmin });
    }
    let mut psi = vec![Complex64::new(0.0, 0.0); n];
    for (r, (y, _, _)) in solved.into_iter().enumerate() {
        for (i, v) in y.into_iter().enumerate() {
            psi[r + i * beta] = v;
        }
    }
    let mut out = sampled_window(x0, h, psi)?;
    let report = verify_tightness(&out, lattice, grid.n_tests, 0x5eed)?;
    if report.max_relative_deviation > grid.tol {
        return Err(Error::DiscretizationTooCoarse { deviation: report.max_relative_deviation, tol: grid.tol });
    }
    out.tight_on = Some(lattice.clone());
    Ok(out)
}
