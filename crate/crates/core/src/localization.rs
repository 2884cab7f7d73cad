//! Gabor multipliers of localization type and their projection functional
//! `PF = sum_i t_i (1 - t_i)` over the eigenvalues `t_i`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::LatticeRegion;
use crate::error::{Error, Result};
use crate::lattice::{Lattice2D, LatticePoint};
use crate::numeric::NeumaierSum;
use crate::par;
use crate::window::KernelTable;

/// Default cap on the number of points for dense eigendecompositions.
pub const DEFAULT_MATRIX_CAP: usize = 2500;

/// Fixed batch size of the double sum; partial sums are combined in batch order.
const BATCH: usize = 64;

/// Symbol `b: Lambda -> [0, 1]` with finite support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolMap {
    values: BTreeMap<LatticePoint, f64>,
}

impl SymbolMap {
    pub fn new(values: impl IntoIterator<Item = (LatticePoint, f64)>) -> Result<Self> {
        let values: BTreeMap<LatticePoint, f64> = values.into_iter().collect();
        for (&p, &v) in &values {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidSymbol { point: p, value: v });
            }
        }
        Ok(SymbolMap { values })
    }

    /// Indicator of a set of points.
    pub fn indicator(points: impl IntoIterator<Item = LatticePoint>) -> Self {
        SymbolMap { values: points.into_iter().map(|p| (p, 1.0)).collect() }
    }

    pub fn get(&self, p: LatticePoint) -> f64 {
        self.values.get(&p).copied().unwrap_or(0.0)
    }

    /// Points with `b > 0`, sorted.
    pub fn support(&self) -> Vec<LatticePoint> {
        self.values.iter().filter(|(_, &v)| v > 0.0).map(|(&p, _)| p).collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.values().copied().fold(0.0, f64::max)
    }

    pub fn total(&self) -> f64 {
        self.values.values().copied().collect::<NeumaierSum>().value()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PfMethod {
    DoubleSum,
    Eigen,
}

impl PfMethod {
    pub fn name(self) -> &'static str {
        match self {
            PfMethod::DoubleSum => "double_sum",
            PfMethod::Eigen => "eigen",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PFResult {
    pub value: f64,
    pub method: PfMethod,
    /// Bound on the contribution of kernel entries beyond the table.
    pub truncation_error: f64,
    /// Pairs `(nu1, nu2)` (double sum) or matrix entries (eigen) that were summed.
    pub pair_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenPF {
    pub pf: PFResult,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
}

fn check_inputs(table: &KernelTable, lattice: &Lattice2D) -> Result<()> {
    if !table.is_tight() {
        return Err(Error::NotTight);
    }
    if !table.lattice().approx_eq(lattice, 1e-12) {
        return Err(Error::LatticeMismatch);
    }
    Ok(())
}

/// `sum_{nu2 in Omega, nu1 not in Omega} F(nu1 - nu2)` over the table entries.
///
/// Only `nu2` within the table reach of the boundary can have partners
/// outside, so only those are visited. `tol`, if given, bounds the allowed
/// truncation error.
pub fn pf_double_sum(table: &KernelTable, region: &dyn LatticeRegion, tol: Option<f64>) -> Result<PFResult> {
    check_inputs(table, region.lattice())?;
    let reach = table.reach();
    let inside = region.lattice_points();
    let truncation_error = inside.len() as f64 * table.tail_bound();
    if let Some(tol) = tol {
        if truncation_error > tol {
            return Err(Error::TailTooLarge { error: truncation_error, tol });
        }
    }
    let band: Vec<LatticePoint> =
        inside.into_iter().filter(|&p| region.boundary_distance(p) <= reach * (1.0 + 1e-12) + 1e-12).collect();
    let entries: Vec<(LatticePoint, f64)> = table.entries().filter(|&(d, v)| v != 0.0 && d != LatticePoint::ORIGIN).collect();
    let partials = par::map_batches(&band, BATCH, |chunk| {
        let mut acc = NeumaierSum::new();
        let mut pairs = 0u64;
        for &nu2 in chunk {
            for &(d, v) in &entries {
                if !region.contains(nu2 + d) {
                    acc.add(v);
                    pairs += 1;
                }
            }
        }
        (acc.value(), pairs)
    });
    let mut total = NeumaierSum::new();
    let mut pair_count = 0;
    for (s, n) in partials {
        total.add(s);
        pair_count += n;
    }
    Ok(PFResult { value: total.value(), method: PfMethod::DoubleSum, truncation_error, pair_count })
}

/// Gram matrix `G[i][j] = <phi_{pts[j]}, phi_{pts[i]}>` from the stored kernel phases.
pub fn gram_matrix(table: &KernelTable, pts: &[LatticePoint]) -> Result<DMatrix<Complex64>> {
    if table.phases().is_none() {
        return Err(Error::PhasesUnavailable);
    }
    let l = table.lattice();
    let n = pts.len();
    let mut g = DMatrix::<Complex64>::zeros(n, n);
    for (j, &mu) in pts.iter().enumerate() {
        let [q_mu, p_mu] = l.embed(mu);
        for (i, &lambda) in pts.iter().enumerate() {
            let v = table.get_complex(lambda - mu).unwrap_or_default();
            if v == Complex64::default() {
                continue;
            }
            let p_lambda = l.embed(lambda)[1];
            let phase = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * (p_lambda - p_mu) * q_mu);
            g[(i, j)] = phase * v;
        }
    }
    Ok(g)
}

/// Largest `|G[i][j] - conj(G[j][i])|`.
pub fn hermitian_residual(g: &DMatrix<Complex64>) -> f64 {
    let n = g.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..=i {
            worst = worst.max((g[(i, j)] - g[(j, i)].conj()).norm());
        }
    }
    worst
}

fn sorted_eigenvalues(m: DMatrix<Complex64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// PF from the eigenvalues of the Gram matrix restricted to `Omega`.
pub fn pf_eigen(table: &KernelTable, region: &dyn LatticeRegion, cap: usize) -> Result<EigenPF> {
    check_inputs(table, region.lattice())?;
    let pts = region.lattice_points();
    if pts.len() > cap {
        return Err(Error::MatrixTooLarge { size: pts.len(), cap });
    }
    let g = gram_matrix(table, &pts)?;
    let pair_count = g.iter().filter(|z| **z != Complex64::default()).count() as u64;
    let eigenvalues = sorted_eigenvalues(g);
    let value = eigenvalues.iter().map(|&t| t * (1.0 - t)).collect::<NeumaierSum>().value();
    let pf = PFResult {
        value,
        method: PfMethod::Eigen,
        truncation_error: pts.len() as f64 * table.tail_bound(),
        pair_count,
    };
    Ok(EigenPF { pf, eigenvalues })
}

/// Eigenvalues (ascending) of `sqrt(b(mu)) <phi_lambda, phi_mu> sqrt(b(lambda))` on `supp b`.
pub fn multiplier_spectrum(table: &KernelTable, symbol: &SymbolMap) -> Result<Vec<f64>> {
    if !table.is_tight() {
        return Err(Error::NotTight);
    }
    let pts = symbol.support();
    let mut g = gram_matrix(table, &pts)?;
    let roots: Vec<f64> = pts.iter().map(|&p| symbol.get(p).sqrt()).collect();
    for i in 0..pts.len() {
        for j in 0..pts.len() {
            g[(i, j)] *= roots[i] * roots[j];
        }
    }
    Ok(sorted_eigenvalues(g))
}
