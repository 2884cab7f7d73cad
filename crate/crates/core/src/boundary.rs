//! Boundary form: for each boundary segment, its length times the
//! distance-weighted kernel energy of the half lattice on its outer side.

use std::collections::HashMap;

use num_rational::Ratio;
use serde::Serialize;

use crate::domain::{BoundarySegment, LatticeDomain, LatticeRegion};
use crate::error::{Error, Result};
use crate::lattice::{Lattice2D, LatticePoint};
use crate::numeric::{compensated_sum, floor_div, gcd, NeumaierSum};
use crate::window::KernelTable;

/// `sum over entries with lambda . n >= 0 of (lambda . n) F(lambda)`.
///
/// Entries beyond the table contribute at most `table.tail_bound()`.
pub fn half_lattice_sum(table: &KernelTable, n_vec: [f64; 2]) -> Result<f64> {
    let len = n_vec[0].hypot(n_vec[1]);
    if (len - 1.0).abs() > 1e-12 {
        return Err(Error::ParameterViolation(format!("normal must have unit length, got {len}")));
    }
    let l = table.lattice();
    Ok(compensated_sum(table.entries().filter_map(|(p, v)| {
        let x = l.embed(p);
        let d = x[0] * n_vec[0] + x[1] * n_vec[1];
        (d >= 0.0).then_some(d * v)
    })))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentContribution {
    pub index: usize,
    pub cycle: usize,
    pub start: LatticePoint,
    pub end: LatticePoint,
    pub length: f64,
    pub outer_normal: [f64; 2],
    pub directional_sum: f64,
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BFResult {
    pub value: f64,
    pub per_segment: Vec<SegmentContribution>,
    /// `boundary length * table tail bound`.
    pub truncation_error: f64,
}

fn primitive_direction(s: &BoundarySegment) -> (i64, i64) {
    let d = s.end - s.start;
    let g = gcd(d.k, d.l).max(1);
    (d.k / g, d.l / g)
}

/// Boundary form of `domain` for the kernel in `table`.
pub fn bf(table: &KernelTable, domain: &LatticeDomain) -> Result<BFResult> {
    if !table.is_certified() {
        return Err(Error::ConditionPhiUncertified);
    }
    if !table.lattice().approx_eq(domain.lattice(), 1e-12) {
        return Err(Error::LatticeMismatch);
    }
    let segments = domain.boundary_segments();
    // the directional sum depends on the direction only
    let mut cache: HashMap<(i64, i64), f64> = HashMap::new();
    let mut per_segment = Vec::with_capacity(segments.len());
    for (index, s) in segments.iter().enumerate() {
        let key = primitive_direction(s);
        let directional_sum = match cache.get(&key) {
            Some(&v) => v,
            None => {
                let v = half_lattice_sum(table, s.outer_normal)?;
                cache.insert(key, v);
                v
            }
        };
        per_segment.push(SegmentContribution {
            index,
            cycle: s.cycle,
            start: s.start,
            end: s.end,
            length: s.length,
            outer_normal: s.outer_normal,
            directional_sum,
            contribution: s.length * directional_sum,
        });
    }
    let value = compensated_sum(per_segment.iter().map(|c| c.contribution));
    let truncation_error = domain.boundary_length() * table.tail_bound();
    Ok(BFResult { value, per_segment, truncation_error })
}

/// Boundary form in integer coordinates: `sum over segments u of
/// sum over nu on the outer side of |u x nu| F(nu)`, which equals `BF / A_Lambda`.
pub fn sf(table: &KernelTable, domain: &LatticeDomain) -> Result<f64> {
    if !table.is_certified() {
        return Err(Error::ConditionPhiUncertified);
    }
    if !table.lattice().approx_eq(domain.lattice(), 1e-12) {
        return Err(Error::LatticeMismatch);
    }
    // outward is the right-hand side in the embedded plane; the sign flips with the basis orientation
    let orientation = table.lattice().det().signum() as i128;
    let mut total = NeumaierSum::new();
    for s in domain.boundary_segments() {
        let u = s.end - s.start;
        let inner = compensated_sum(table.entries().filter_map(|(p, v)| {
            let c = -orientation * (u.k as i128 * p.l as i128 - u.l as i128 * p.k as i128);
            (c > 0).then_some(c as f64 * v)
        }));
        total.add(inner);
    }
    Ok(total.value())
}

/// `length(segment) * dist(lambda, line through the origin parallel to the segment)`.
pub fn geometric_atom(lattice: &Lattice2D, start: LatticePoint, end: LatticePoint, lambda: LatticePoint) -> Result<f64> {
    if start == end {
        return Err(Error::DegenerateSegment { start, end });
    }
    let u = lattice.embed(end - start);
    let x = lattice.embed(lambda);
    let length = u[0].hypot(u[1]);
    let normal = [u[1] / length, -u[0] / length];
    Ok(length * (x[0] * normal[0] + x[1] * normal[1]).abs())
}

/// Values `R_t(s)` for `t, s` in `0..n` of the rational line `y = (m/n) x`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SlopeProfile {
    pub m: i64,
    pub n: i64,
    /// `values[t][s]`.
    pub values: Vec<Vec<i64>>,
}

impl SlopeProfile {
    /// Distinct values of row `t` with their multiplicities, ascending.
    pub fn frequencies(&self, t: usize) -> Vec<(i64, usize)> {
        let mut out: Vec<(i64, usize)> = Vec::new();
        let mut row = self.values[t].clone();
        row.sort_unstable();
        for v in row {
            match out.last_mut() {
                Some((last, c)) if *last == v => *c += 1,
                _ => out.push((v, 1)),
            }
        }
        out
    }

    /// Predicted pair `[(floor(mt/n + 1), n (floor(mt/n + 1) - mt/n)), (floor(mt/n + 1) + 1, rest)]`.
    pub fn predicted(&self, t: usize) -> [(i64, i64); 2] {
        let mt = self.m * t as i64;
        let low = floor_div(mt, self.n) + 1;
        let count = self.n * low - mt;
        [(low, count), (low + 1, self.n - count)]
    }
}

fn check_slope(m: i64, n: i64) -> Result<()> {
    if n <= 0 || m < 0 || m > n {
        return Err(Error::BadRange { m, n });
    }
    if m != 0 && gcd(m, n) != 1 {
        return Err(Error::NotCoprime { m, n });
    }
    Ok(())
}

/// `R_t(s)` from its two-case definition.
pub fn slope_profile(m: i64, n: i64) -> Result<SlopeProfile> {
    check_slope(m, n)?;
    let values = (0..n)
        .map(|t| {
            (0..n)
                .map(|s| {
                    if s < n - t {
                        floor_div(m * (t + s), n) + 1 - floor_div(m * s, n)
                    } else {
                        m + floor_div(m * (s - (n - t)), n) + 1 - floor_div(m * s, n)
                    }
                })
                .collect()
        })
        .collect();
    Ok(SlopeProfile { m, n, values })
}

/// `S_t(s) = U(a (t + s)) - l(a s)` for `a = m/n` in exact rational arithmetic,
/// with `U(x)` the least integer `> x` and `l(x)` the greatest integer `<= x`.
pub fn t_slope(m: i64, n: i64, t: i64, s: i64) -> i64 {
    let a = Ratio::new(m, n);
    let upper = (a * Ratio::from_integer(t + s)).floor().to_integer() + 1;
    let lower = (a * Ratio::from_integer(s)).floor().to_integer();
    upper - lower
}

/// `sum over ny - mx > 0 of (ny - mx) F(x, y)`, i.e. the length of `(0,0) -> (n,m)`
/// times the distance-weighted sum above the line. Table labels are read as `Z^2` points.
pub fn strip_geometric_form(table: &KernelTable, m: i64, n: i64) -> Result<f64> {
    check_slope(m, n)?;
    Ok(compensated_sum(table.entries().filter_map(|(p, v)| {
        let w = n * p.l - m * p.k;
        (w > 0).then_some(w as f64 * v)
    })))
}

/// Per-column cumulative sums answering `W(d) = sum_{j >= d} (j - d + 1) F(dx, j)`.
struct ColumnWeights {
    lo: i64,
    /// `W(lo + i)` for `i` in `0..=hi - lo + 1`.
    w: Vec<f64>,
    m0: f64,
    m1: f64,
}

impl ColumnWeights {
    fn new(mut col: Vec<(i64, f64)>) -> Self {
        col.sort_by_key(|c| c.0);
        let lo = col.first().map_or(0, |c| c.0);
        let hi = col.last().map_or(-1, |c| c.0);
        let len = (hi - lo + 2).max(1) as usize;
        let mut dense = vec![0.0; len];
        for &(j, v) in &col {
            dense[(j - lo) as usize] += v;
        }
        // W(d) = W(d + 1) + sum_{j >= d} F(j)
        let mut w = vec![0.0; len];
        let mut tail = 0.0;
        for i in (0..len.saturating_sub(1)).rev() {
            tail += dense[i];
            w[i] = w[i + 1] + tail;
        }
        let m0 = compensated_sum(col.iter().map(|c| c.1));
        let m1 = compensated_sum(col.iter().map(|c| (c.0 + 1) as f64 * c.1));
        ColumnWeights { lo, w, m0, m1 }
    }

    fn get(&self, d: i64) -> f64 {
        if d < self.lo {
            self.m1 - d as f64 * self.m0
        } else {
            self.w.get((d - self.lo) as usize).copied().unwrap_or(0.0)
        }
    }
}

/// `(1/R) sum over 0 <= x1, x2 < R n, y1 > m x1 / n, y2 <= m x2 / n of F(x1 - x2, y1 - y2)`.
pub fn strip_finite_r_sum(table: &KernelTable, m: i64, n: i64, r: i64) -> Result<f64> {
    check_slope(m, n)?;
    if r < 1 {
        return Err(Error::ParameterViolation(format!("R must be at least 1, got {r}")));
    }
    let mut columns: HashMap<i64, Vec<(i64, f64)>> = HashMap::new();
    for (p, v) in table.entries() {
        columns.entry(p.k).or_default().push((p.l, v));
    }
    let columns: HashMap<i64, ColumnWeights> = columns.into_iter().map(|(k, c)| (k, ColumnWeights::new(c))).collect();
    let width = r * n;
    let mut total = NeumaierSum::new();
    for x1 in 0..width {
        let a1 = floor_div(m * x1, n) + 1;
        for x2 in 0..width {
            if let Some(col) = columns.get(&(x1 - x2)) {
                let d0 = a1 - floor_div(m * x2, n);
                total.add(col.get(d0));
            }
        }
    }
    Ok(total.value() / r as f64)
}
