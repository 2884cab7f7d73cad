//! Convergence of `PF(R Omega) / R` to `BF / A_Lambda` and eigenvalue counts.

use serde::Serialize;

use crate::boundary::bf;
use crate::domain::LatticeDomain;
use crate::error::{Error, Result};
use crate::lattice::SL2Matrix;
use crate::localization::{pf_double_sum, pf_eigen, PFResult, PfMethod};
use crate::par;
use crate::window::KernelTable;

pub const DEFAULT_RS: [i64; 7] = [4, 6, 8, 12, 16, 24, 32];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub r: i64,
    pub pf: f64,
    pub pf_over_r: f64,
    pub truncation_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub method: PfMethod,
    pub rows: Vec<ConvergenceRow>,
    /// `BF / A_Lambda`.
    pub reference: f64,
    /// `c0` of the fit `PF/R = c0 + c1/R` over the larger half of the Rs.
    pub extrapolated_limit: Option<f64>,
    /// Root-mean-square residual of that fit.
    pub fit_residual: Option<f64>,
    /// `|c0 - reference| / reference`, or the absolute difference if the reference is 0.
    pub limit_error: Option<f64>,
}

impl ConvergenceReport {
    /// `|PF(R)/R - reference|` for each row.
    pub fn residuals(&self) -> Vec<(i64, f64)> {
        self.rows.iter().map(|row| (row.r, (row.pf_over_r - self.reference).abs())).collect()
    }
}

fn pf_at(table: &KernelTable, domain: &LatticeDomain, r: i64, method: PfMethod, cap: usize) -> Result<PFResult> {
    let d = domain.dilate_integer(r);
    match method {
        PfMethod::DoubleSum => pf_double_sum(table, &d, None),
        PfMethod::Eigen => Ok(pf_eigen(table, &d, cap)?.pf),
    }
}

/// Least-squares line `y = c0 + c1 x`; returns `(c0, c1, rms residual)`.
fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let c1 = sxy / sxx;
    let c0 = my - c1 * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - c0 - c1 * x).powi(2)).sum();
    (c0, c1, (rss / n).sqrt())
}

/// PF at every `R` in `rs`, the boundary-form reference and a `1/R` extrapolation.
pub fn convergence_study(
    table: &KernelTable,
    domain: &LatticeDomain,
    rs: &[i64],
    method: PfMethod,
    matrix_cap: usize,
) -> Result<ConvergenceReport> {
    if rs.is_empty() || rs.iter().any(|&r| r < 1) {
        return Err(Error::ParameterViolation("Rs must be a nonempty list of positive integers".into()));
    }
    let mut rs = rs.to_vec();
    rs.sort_unstable();
    rs.dedup();
    let results = par::map_ordered(&rs, |&r| pf_at(table, domain, r, method, matrix_cap));
    let mut rows = Vec::with_capacity(rs.len());
    for (&r, res) in rs.iter().zip(results) {
        let pf = res?;
        rows.push(ConvergenceRow { r, pf: pf.value, pf_over_r: pf.value / r as f64, truncation_error: pf.truncation_error });
    }
    let reference = bf(table, domain)?.value / table.lattice().area();

    let fit_rows = &rows[rows.len() / 2..];
    let (extrapolated_limit, fit_residual) = if fit_rows.len() >= 2 {
        let xs: Vec<f64> = fit_rows.iter().map(|row| 1.0 / row.r as f64).collect();
        let ys: Vec<f64> = fit_rows.iter().map(|row| row.pf_over_r).collect();
        let (c0, _, res) = fit_line(&xs, &ys);
        (Some(c0), Some(res))
    } else {
        (None, None)
    };
    let limit_error = extrapolated_limit.map(|c0| {
        if reference == 0.0 {
            c0.abs()
        } else {
            (c0 - reference).abs() / reference
        }
    });
    Ok(ConvergenceReport { method, rows, reference, extrapolated_limit, fit_residual, limit_error })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenvalueCount {
    pub r: i64,
    pub delta: f64,
    pub count: usize,
    /// `count / R^2`.
    pub ratio: f64,
    /// `(||phi||^2 / A_Lambda) * area(Omega)`, the limit of the ratio.
    pub predicted_ratio: f64,
}

/// Number of Gram eigenvalues on `R Omega` above `delta`.
pub fn eigenvalue_count(
    table: &KernelTable,
    domain: &LatticeDomain,
    r: i64,
    delta: f64,
    matrix_cap: usize,
) -> Result<EigenvalueCount> {
    let e = pf_eigen(table, &domain.dilate_integer(r), matrix_cap)?;
    Ok(count_above(&e.eigenvalues, r, delta, table, domain))
}

/// Counts for several thresholds from one eigendecomposition.
pub fn eigenvalue_counts(
    table: &KernelTable,
    domain: &LatticeDomain,
    r: i64,
    deltas: &[f64],
    matrix_cap: usize,
) -> Result<Vec<EigenvalueCount>> {
    let e = pf_eigen(table, &domain.dilate_integer(r), matrix_cap)?;
    Ok(deltas.iter().map(|&d| count_above(&e.eigenvalues, r, d, table, domain)).collect())
}

fn count_above(eigenvalues: &[f64], r: i64, delta: f64, table: &KernelTable, domain: &LatticeDomain) -> EigenvalueCount {
    let count = eigenvalues.iter().filter(|&&t| t > delta).count();
    EigenvalueCount {
        r,
        delta,
        count,
        ratio: count as f64 / (r * r) as f64,
        predicted_ratio: table.norm_sq() / table.lattice().area() * domain.area(),
    }
}

/// Kernel and domain carried to `A(Lambda)`.
pub fn transported_pair(table: &KernelTable, domain: &LatticeDomain, a: &SL2Matrix) -> (KernelTable, LatticeDomain) {
    let t = table.transport(a);
    let d = domain.relabel(t.lattice().clone());
    (t, d)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndependenceReport {
    pub max_abs_row_difference: f64,
    pub max_rel_row_difference: f64,
    pub reference_difference: f64,
}

/// Compares two convergence reports row by row.
pub fn compare_reports(x: &ConvergenceReport, y: &ConvergenceReport) -> Result<IndependenceReport> {
    if x.rows.len() != y.rows.len() || x.rows.iter().zip(&y.rows).any(|(a, b)| a.r != b.r) {
        return Err(Error::ParameterViolation("reports cover different R values".into()));
    }
    let mut abs: f64 = 0.0;
    let mut rel: f64 = 0.0;
    for (a, b) in x.rows.iter().zip(&y.rows) {
        let d = (a.pf - b.pf).abs();
        abs = abs.max(d);
        if a.pf != 0.0 {
            rel = rel.max(d / a.pf.abs());
        }
    }
    Ok(IndependenceReport {
        max_abs_row_difference: abs,
        max_rel_row_difference: rel,
        reference_difference: (x.reference - y.reference).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice2D;
    use crate::window::{kernel_table, painless_window};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn suite() -> (KernelTable, LatticeDomain) {
        let a = FRAC_1_SQRT_2;
        let w = painless_window(a, a, 2f64.sqrt(), 2f64.sqrt() - a).unwrap();
        let l = Lattice2D::rectangular(a, a).unwrap();
        let t = kernel_table(&w, &l, 1e-10).unwrap();
        let d = LatticeDomain::square(1, l).unwrap();
        (t, d)
    }

    #[test]
    fn fit_recovers_a_line() {
        let xs = [0.1, 0.2, 0.5];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 3.0 * x).collect();
        let (c0, c1, r) = fit_line(&xs, &ys);
        assert!((c0 - 2.0).abs() < 1e-12 && (c1 + 3.0).abs() < 1e-12 && r < 1e-12);
    }

    #[test]
    fn small_study_and_transport() {
        let (t, d) = suite();
        let rep = convergence_study(&t, &d, &[8, 4, 6], PfMethod::DoubleSum, 100).unwrap();
        assert_eq!(rep.rows.iter().map(|r| r.r).collect::<Vec<_>>(), vec![4, 6, 8]);
        assert!(rep.extrapolated_limit.is_some());
        assert!((rep.reference - 0.33450345315174).abs() < 1e-8, "{}", rep.reference);
        let single = convergence_study(&t, &d, &[4], PfMethod::DoubleSum, 100).unwrap();
        assert!(single.extrapolated_limit.is_none());

        let a = SL2Matrix::new(1.3, 0.4, -0.2, (1.0 - 0.08) / 1.3).unwrap();
        let (t2, d2) = transported_pair(&t, &d, &a);
        let rep2 = convergence_study(&t2, &d2, &[4, 6, 8], PfMethod::DoubleSum, 100).unwrap();
        let cmp = compare_reports(&rep, &rep2).unwrap();
        assert!(cmp.max_abs_row_difference < 1e-8 && cmp.reference_difference < 1e-8, "{cmp:?}");
    }

    #[test]
    fn eigenvalue_counts_are_monotone() {
        let (t, d) = suite();
        let counts = eigenvalue_counts(&t, &d, 6, &[0.1, 0.5, 0.9], 200).unwrap();
        assert!(counts[0].count >= counts[1].count && counts[1].count >= counts[2].count);
        let single = eigenvalue_count(&t, &d, 6, 0.5, 200).unwrap();
        assert_eq!(single, counts[1]);
    }
}
