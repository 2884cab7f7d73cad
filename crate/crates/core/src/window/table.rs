use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;

use num_complex::Complex64;

use super::{Window, WindowKind};
use crate::error::{Error, Result};
use crate::lattice::{enumerate_in_disk, Lattice2D, LatticePoint, SL2Matrix};
use crate::numeric::{compensated_sum, gl20};
use crate::par;

/// Truncated kernel `lambda -> F(lambda) = |<phi, phi_lambda>|^2` on a lattice.
///
/// Entries are sorted by integer coordinates. `tail_bound` bounds
/// `sum over missing lambda of F(lambda) (1 + |lambda|)`.
#[derive(Debug, Clone)]
pub struct KernelTable {
    lattice: Lattice2D,
    radius: f64,
    reach: f64,
    points: Vec<LatticePoint>,
    values: Vec<f64>,
    phases: Option<Vec<Complex64>>,
    tail_bound: f64,
    norm_sq: f64,
    tight: bool,
    index: HashMap<LatticePoint, usize>,
}

impl PartialEq for KernelTable {
    fn eq(&self, o: &Self) -> bool {
        self.lattice == o.lattice
            && self.radius == o.radius
            && self.points == o.points
            && self.values == o.values
            && self.phases == o.phases
            && self.tail_bound == o.tail_bound
            && self.tight == o.tight
    }
}

impl KernelTable {
    fn build(
        lattice: Lattice2D,
        radius: f64,
        entries: Vec<(LatticePoint, Complex64)>,
        tail_bound: f64,
        norm_sq: f64,
        tight: bool,
    ) -> Self {
        let mut entries = entries;
        entries.sort_by_key(|e| e.0);
        let points: Vec<LatticePoint> = entries.iter().map(|e| e.0).collect();
        let values = entries.iter().map(|e| e.1.norm_sqr()).collect();
        let phases = Some(entries.iter().map(|e| e.1).collect());
        Self::assemble(lattice, radius, points, values, phases, tail_bound, norm_sq, tight)
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        lattice: Lattice2D,
        radius: f64,
        points: Vec<LatticePoint>,
        values: Vec<f64>,
        phases: Option<Vec<Complex64>>,
        tail_bound: f64,
        norm_sq: f64,
        tight: bool,
    ) -> Self {
        let index = points.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let reach = points.iter().map(|&p| lattice.norm(p)).fold(0.0, f64::max);
        KernelTable { lattice, radius, reach, points, values, phases, tail_bound, norm_sq, tight, index }
    }

    /// Table from explicit modulus values, without phases and without a
    /// condition-Phi certificate unless `tail_bound` is finite.
    pub fn from_values(
        lattice: Lattice2D,
        entries: impl IntoIterator<Item = (LatticePoint, f64)>,
        norm_sq: f64,
        tail_bound: f64,
    ) -> Self {
        let map: BTreeMap<LatticePoint, f64> = entries.into_iter().collect();
        let radius = map.keys().map(|&p| lattice.norm(p)).fold(0.0, f64::max);
        let (points, values) = map.into_iter().unzip();
        Self::assemble(lattice, radius, points, values, None, tail_bound, norm_sq, false)
    }

    pub fn lattice(&self) -> &Lattice2D {
        &self.lattice
    }

    /// All lattice points with `|lambda| <= radius` not listed have `F = 0`
    /// or are covered by the tail bound.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Largest `|lambda|` among the entries.
    pub fn reach(&self) -> f64 {
        self.reach
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn is_certified(&self) -> bool {
        self.tail_bound.is_finite()
    }

    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    pub fn is_tight(&self) -> bool {
        self.tight
    }

    pub fn with_tight(mut self, tight: bool) -> Self {
        self.tight = tight;
        self
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn phases(&self) -> Option<&[Complex64]> {
        self.phases.as_deref()
    }

    pub fn entries(&self) -> impl Iterator<Item = (LatticePoint, f64)> + '_ {
        self.points.iter().copied().zip(self.values.iter().copied())
    }

    pub fn get(&self, p: LatticePoint) -> f64 {
        self.index.get(&p).map_or(0.0, |&i| self.values[i])
    }

    /// `<phi, phi_lambda>` if phases are stored; `Some(0)` for absent points.
    pub fn get_complex(&self, p: LatticePoint) -> Option<Complex64> {
        let phases = self.phases.as_ref()?;
        Some(self.index.get(&p).map_or(Complex64::new(0.0, 0.0), |&i| phases[i]))
    }

    /// `sum_lambda F(lambda)` over the entries.
    pub fn sum(&self) -> f64 {
        compensated_sum(self.values.iter().copied())
    }

    /// Largest `|F(lambda) - F(-lambda)|` over entries.
    pub fn evenness_defect(&self) -> f64 {
        self.entries().map(|(p, v)| (v - self.get(-p)).abs()).fold(0.0, f64::max)
    }

    /// Same entries viewed on `lattice` with unchanged labels; phases are dropped.
    pub fn relabel(&self, lattice: Lattice2D) -> KernelTable {
        let scale = {
            let [g1, g2] = self.lattice.generators();
            let [h1, h2] = lattice.generators();
            let s = |g: [f64; 2]| g[0].hypot(g[1]);
            (s(h1) / s(g1)).max(s(h2) / s(g2)).max(1.0)
        };
        Self::assemble(
            lattice,
            0.0,
            self.points.clone(),
            self.values.clone(),
            None,
            self.tail_bound * scale * 2.0,
            self.norm_sq,
            self.tight,
        )
        .with_radius_from_reach()
    }

    fn with_radius_from_reach(mut self) -> Self {
        // completeness radius is unknown after relabeling; the reach is an upper bound
        self.radius = self.reach;
        self
    }

    /// Entries moved to `f(lambda)` on the same lattice; phases are dropped.
    /// `f` must be a norm-preserving bijection of the labels (a point-group
    /// element of `Z^2` on the integer lattice, for instance).
    pub fn map_labels(&self, f: impl Fn(LatticePoint) -> LatticePoint) -> KernelTable {
        let mut entries: Vec<(LatticePoint, f64)> = self.entries().map(|(p, v)| (f(p), v)).collect();
        entries.sort_by_key(|e| e.0);
        let (points, values) = entries.into_iter().unzip();
        Self::assemble(self.lattice.clone(), self.radius, points, values, None, self.tail_bound, self.norm_sq, self.tight)
    }

    /// Table on `Z^2` with the same values (`F(S nu)` with `S` the basis).
    pub fn as_z2(&self) -> KernelTable {
        self.relabel(Lattice2D::integer())
    }

    /// Kernel of `mu(A) phi` on `A(Lambda)`: values move with the labels
    /// (`gamma = A lambda`), phases pick up `e^{i pi (p q - p' q')}`.
    pub fn transport(&self, a: &SL2Matrix) -> KernelTable {
        let lattice = self.lattice.transformed(a);
        let phases = self.phases.as_ref().map(|ph| {
            self.points
                .iter()
                .zip(ph)
                .map(|(&pt, &v)| {
                    let [q, p] = self.lattice.embed(pt);
                    let [q2, p2] = lattice.embed(pt);
                    v * Complex64::from_polar(1.0, PI * (p * q - p2 * q2))
                })
                .collect()
        });
        let sigma = a.operator_norm();
        let mut t = Self::assemble(
            lattice,
            self.radius / sigma,
            self.points.clone(),
            self.values.clone(),
            phases,
            self.tail_bound * sigma.max(1.0),
            self.norm_sq,
            self.tight,
        );
        t.radius = t.radius.min(t.reach);
        t
    }

    /// Entries with `|lambda| <= r`; the dropped mass moves into the tail bound.
    pub fn truncated(&self, r: f64) -> KernelTable {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| self.lattice.norm(self.points[i]) <= r).collect();
        let dropped = compensated_sum(
            (0..self.len())
                .filter(|&i| self.lattice.norm(self.points[i]) > r)
                .map(|i| self.values[i] * (1.0 + self.lattice.norm(self.points[i]))),
        );
        Self::assemble(
            self.lattice.clone(),
            r.min(self.radius),
            keep.iter().map(|&i| self.points[i]).collect(),
            keep.iter().map(|&i| self.values[i]).collect(),
            self.phases.as_ref().map(|ph| keep.iter().map(|&i| ph[i]).collect()),
            self.tail_bound + dropped,
            self.norm_sq,
            self.tight,
        )
    }
}

/// `sum_lambda F(lambda) |lambda|` over the entries plus the tail bound.
pub fn condition_phi_sum(table: &KernelTable) -> f64 {
    let l = table.lattice();
    compensated_sum(table.entries().map(|(p, v)| v * l.norm(p))) + table.tail_bound()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableOptions {
    pub tol: f64,
    /// Starting radius; defaults to twice the cell diameter.
    pub initial_radius: Option<f64>,
    pub max_radius: f64,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions { tol: 1e-10, initial_radius: None, max_radius: 400.0 }
    }
}

/// `int_{u0}^inf f(u) du` via `u = u0 + t / (1 - t)`.
fn integrate_to_infinity(f: impl Fn(f64) -> f64, u0: f64) -> f64 {
    let (xs, ws) = gl20();
    let panels = 64;
    let mut acc = 0.0;
    for k in 0..panels {
        let (a, b) = (k as f64 / panels as f64, (k + 1) as f64 / panels as f64);
        for (x, w) in xs.iter().zip(ws) {
            let t = 0.5 * (a + b) + 0.5 * (b - a) * x;
            let s = 1.0 - t;
            acc += 0.5 * (b - a) * w * f(u0 + t / s) / (s * s);
        }
    }
    acc
}

/// Bound on `sum_{|lambda| > r} g(|lambda|) (1 + |lambda|)` for decreasing `g`,
/// by comparing each lattice point with the cell it spans.
fn radial_tail(g: impl Fn(f64) -> f64, r: f64, area: f64, delta: f64) -> f64 {
    let u0 = r - 2.0 * delta;
    let mut total = integrate_to_infinity(|u| g(u) * (1.0 + u + 2.0 * delta) * (u + delta), u0.max(0.0));
    if u0 < 0.0 {
        total += -u0 * g(0.0) * (1.0 + 2.0 * delta) * delta;
    }
    2.0 * PI / area * total
}

/// Bound for kernels supported in `|q| < s` with `|V| <= c / (1 + p^2)`.
fn strip_tail(c: f64, s: f64, r: f64, area: f64, delta: f64) -> f64 {
    let p_min = (r * r - s * s).max(0.0).sqrt();
    let u0 = p_min - 2.0 * delta;
    let g = |u: f64| c * c * (1.0 + s + u + 2.0 * delta) / (1.0 + u * u).powi(2);
    let mut total = integrate_to_infinity(g, u0.max(0.0));
    if u0 < 0.0 {
        total += -u0 * c * c * (1.0 + s + 2.0 * delta);
    }
    4.0 * (s + delta) / area * total
}

enum Envelope {
    Gaussian { peak: f64, kappa: f64 },
    Strip { support: f64 },
    Radial,
}

/// Builds a kernel table whose radius grows geometrically from the initial
/// radius until the certified tail is below `opts.tol`.
pub fn kernel_table_with(window: &Window, lattice: &Lattice2D, opts: &TableOptions) -> Result<KernelTable> {
    if !(opts.tol > 0.0) {
        return Err(Error::ParameterViolation(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let area = lattice.area();
    let delta = lattice.cell_diameter();
    let envelope = match window.kind() {
        WindowKind::Gaussian(g) => Envelope::Gaussian { peak: window.norm_sq().powi(2), kappa: g.decay_rate() },
        WindowKind::Painless(p) => Envelope::Strip { support: p.support_len() },
        WindowKind::Sampled(_) => Envelope::Radial,
    };
    let in_support = |pt: LatticePoint| match envelope {
        Envelope::Strip { support } => lattice.embed(pt)[0].abs() < support,
        _ => true,
    };

    let mut cache: BTreeMap<LatticePoint, Complex64> = BTreeMap::new();
    let mut r = opts.initial_radius.unwrap_or(0.0).max(2.0 * delta);
    loop {
        let fresh: Vec<LatticePoint> = enumerate_in_disk(lattice, r)
            .into_iter()
            .filter(|&p| in_support(p) && !cache.contains_key(&p))
            .collect();
        let computed = par::map_ordered(&fresh, |&p| {
            let [q, pp] = lattice.embed(p);
            window.kernel_value(q, pp)
        });
        for (p, v) in fresh.into_iter().zip(computed) {
            cache.insert(p, v?);
        }

        let shell_max = |weight: &dyn Fn([f64; 2]) -> f64| {
            cache
                .iter()
                .filter(|(&p, _)| {
                    let n = lattice.norm(p);
                    n > r / 2.0 && n <= r
                })
                .map(|(&p, v)| v.norm() * weight(lattice.embed(p)))
                .fold(0.0, f64::max)
        };
        let tail = match envelope {
            Envelope::Gaussian { peak, kappa } => {
                radial_tail(|u| peak * (-PI * kappa * u * u).exp(), r, area, delta)
            }
            Envelope::Strip { support } => {
                let c = shell_max(&|x| 1.0 + x[1] * x[1]);
                strip_tail(c, support, r, area, delta)
            }
            Envelope::Radial => {
                let c = shell_max(&|x| 1.0 + x[0] * x[0] + x[1] * x[1]);
                radial_tail(|u| c * c / (1.0 + u * u).powi(2), r, area, delta)
            }
        };
        if tail <= opts.tol {
            let entries: Vec<(LatticePoint, Complex64)> =
                cache.into_iter().filter(|(p, _)| lattice.norm(*p) <= r * (1.0 + 1e-14)).collect();
            let tight = window.is_tight_on(lattice);
            return Ok(KernelTable::build(lattice.clone(), r, entries, tail, window.norm_sq(), tight));
        }
        let next = r * 1.25;
        if next > opts.max_radius {
            return Err(Error::ConditionPhiDivergence { radius: r, tail, tol: opts.tol });
        }
        r = next;
    }
}

pub fn kernel_table(window: &Window, lattice: &Lattice2D, tol: f64) -> Result<KernelTable> {
    kernel_table_with(window, lattice, &TableOptions { tol, ..TableOptions::default() })
}
