use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{GaussAtom, Window, WindowKind};
use crate::error::Result;
use crate::lattice::{Lattice2D, LatticePoint};
use crate::numeric::{composite_nodes, NeumaierSum};
use crate::par;

/// Finite Gaussian mixture used as a probe function.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub atoms: Vec<GaussAtom>,
}

impl TestFunction {
    pub fn random<R: Rng + ?Sized>(rng: &mut R, center: f64) -> Self {
        let n = rng.random_range(1..=3);
        let atoms = (0..n)
            .map(|_| GaussAtom {
                coeff: Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                w: Complex64::new(rng.random_range(-0.5..0.5), rng.random_range(1.0..3.0)),
                center: center + rng.random_range(-1.5..1.5),
                freq: rng.random_range(-1.5..1.5),
            })
            .collect();
        TestFunction { atoms }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.atoms.iter().map(|a| a.eval(x)).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        let mut acc = NeumaierSum::new();
        for a in &self.atoms {
            for b in &self.atoms {
                acc.add(a.inner(b).re);
            }
        }
        acc.value()
    }

    fn support(&self) -> (f64, f64) {
        let lo = self.atoms.iter().map(|a| a.center - a.effective_radius()).fold(f64::INFINITY, f64::min);
        let hi = self.atoms.iter().map(|a| a.center + a.effective_radius()).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    fn freq_range(&self) -> (f64, f64) {
        let lo = self.atoms.iter().map(|a| a.freq).fold(f64::INFINITY, f64::min);
        let hi = self.atoms.iter().map(|a| a.freq).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TightnessReport {
    /// `max |sum_lambda |<f, phi_lambda>|^2 / ||f||^2 - 1|` over the probes.
    pub max_relative_deviation: f64,
    pub ratios: Vec<f64>,
    /// Largest relative contribution of the last two frequency bands summed.
    pub max_tail_estimate: f64,
}

/// Highest frequency distance from the probe band that is summed.
const MAX_BAND_DISTANCE: f64 = 80.0;
const BAND_WIDTH: f64 = 2.0;

/// Per-column data for computing `<f, phi_{q,p}>` for many `p`.
enum Column {
    /// Quadrature nodes `x_n` with weights `w_n f(x_n) conj(phi(x_n - q))`.
    Nodes(Vec<f64>, Vec<Complex64>),
    /// Grid samples of `phi(x_j - q)`.
    Grid(Vec<Complex64>),
    Closed,
}

struct Probe<'a> {
    window: &'a Window,
    f: &'a TestFunction,
    f_grid: Option<Vec<Complex64>>,
}

impl Probe<'_> {
    fn column(&self, q: f64, p_abs_max: f64) -> Column {
        match self.window.kind() {
            WindowKind::Gaussian(_) => Column::Closed,
            WindowKind::Painless(w) => {
                let (flo, fhi) = self.f.support();
                let lo = flo.max(q);
                let hi = fhi.min(q + w.support_len());
                let (mut xs, mut ws) = (Vec::new(), Vec::new());
                if hi > lo {
                    for (a, b) in w.pieces(q, lo, hi, &[]) {
                        let panels = 1 + ((b - a) * (p_abs_max + 1.0)).ceil() as usize;
                        composite_nodes(a, b, panels, &mut xs, &mut ws);
                    }
                }
                let h = xs.iter().zip(&ws).map(|(&x, &wt)| self.f.eval(x) * (wt * w.eval(x - q))).collect();
                Column::Nodes(xs, h)
            }
            WindowKind::Sampled(s) => Column::Grid(s.shifted(q)),
        }
    }

    fn coefficient(&self, column: &Column, q: f64, p: f64) -> Complex64 {
        match (column, self.window.kind()) {
            (Column::Closed, WindowKind::Gaussian(g)) => {
                let target = g.atom(q, p);
                self.f.atoms.iter().map(|a| a.inner(&target)).sum()
            }
            (Column::Nodes(xs, h), _) => {
                xs.iter().zip(h).map(|(&x, &v)| v * Complex64::from_polar(1.0, -2.0 * PI * p * x)).sum()
            }
            (Column::Grid(g), WindowKind::Sampled(s)) => s.pair_integral(self.f_grid.as_ref().unwrap(), g, p),
            _ => unreachable!("column kind matches window kind"),
        }
    }
}

fn q_range(window: &Window, f: &TestFunction) -> (f64, f64) {
    let (flo, fhi) = f.support();
    let (wlo, whi) = window.effective_support();
    // phi(x - q) overlaps f iff q in [flo - whi, fhi - wlo]
    (flo - whi, fhi - wlo)
}

/// Lattice points with `q` in `[q0, q1]` and `p` in `[p0, p1]`.
fn points_in_box(lattice: &Lattice2D, q0: f64, q1: f64, p0: f64, p1: f64) -> Vec<LatticePoint> {
    let corners = [[q0, p0], [q0, p1], [q1, p0], [q1, p1]].map(|c| lattice.coordinates(c));
    let kmin = corners.iter().map(|c| c[0]).fold(f64::INFINITY, f64::min).floor() as i64 - 1;
    let kmax = corners.iter().map(|c| c[0]).fold(f64::NEG_INFINITY, f64::max).ceil() as i64 + 1;
    let lmin = corners.iter().map(|c| c[1]).fold(f64::INFINITY, f64::min).floor() as i64 - 1;
    let lmax = corners.iter().map(|c| c[1]).fold(f64::NEG_INFINITY, f64::max).ceil() as i64 + 1;
    let mut out = Vec::new();
    for k in kmin..=kmax {
        for l in lmin..=lmax {
            let [q, p] = lattice.embed(LatticePoint::new(k, l));
            if q >= q0 && q <= q1 && p >= p0 && p <= p1 {
                out.push(LatticePoint::new(k, l));
            }
        }
    }
    out
}

/// `sum_lambda |<f, phi_lambda>|^2 / ||f||^2` and a tail estimate.
pub fn frame_ratio(window: &Window, lattice: &Lattice2D, f: &TestFunction) -> Result<(f64, f64)> {
    let f_grid = match window.kind() {
        WindowKind::Sampled(s) => Some((0..s.len()).map(|j| f.eval(s.grid(j))).collect()),
        _ => None,
    };
    let probe = Probe { window, f, f_grid };
    let (q0, q1) = q_range(window, f);
    let (fmin, fmax) = f.freq_range();
    let p_abs_max = fmin.abs().max(fmax.abs()) + MAX_BAND_DISTANCE;
    let pts = match window.kind() {
        // grid sums alias frequencies modulo 1/step: sum exactly one alias period
        WindowKind::Sampled(s) => {
            let half = 0.5 / s.step();
            let pc = 0.5 * (fmin + fmax);
            let mut pts = points_in_box(lattice, q0, q1, pc - half, pc + half);
            pts.retain(|&pt| lattice.embed(pt)[1] < pc + half - 1e-9 * half);
            pts
        }
        _ => points_in_box(lattice, q0, q1, fmin - MAX_BAND_DISTANCE, fmax + MAX_BAND_DISTANCE),
    };

    let n_bands = (MAX_BAND_DISTANCE / BAND_WIDTH).ceil() as usize + 1;
    let mut bands: Vec<Vec<LatticePoint>> = vec![Vec::new(); n_bands];
    for pt in pts {
        let p = lattice.embed(pt)[1];
        let dist = (fmin - p).max(p - fmax).max(0.0);
        let b = ((dist / BAND_WIDTH) as usize).min(n_bands - 1);
        bands[b].push(pt);
    }

    let columns: HashMap<u64, Column> = {
        let mut qs: Vec<f64> =
            bands.iter().flatten().map(|&pt| lattice.embed(pt)[0]).collect();
        qs.sort_by(f64::total_cmp);
        qs.dedup();
        let cols = par::map_ordered(&qs, |&q| probe.column(q, p_abs_max));
        qs.into_iter().map(f64::to_bits).zip(cols).collect()
    };

    let norm = f.norm_sq();
    let mut total = NeumaierSum::new();
    let mut recent = [f64::INFINITY; 2];
    for band in &bands {
        let contributions = par::map_ordered(band, |&pt| {
            let [q, p] = lattice.embed(pt);
            probe.coefficient(&columns[&q.to_bits()], q, p).norm_sqr()
        });
        let s: f64 = crate::numeric::compensated_sum(contributions);
        total.add(s);
        recent = [recent[1], s / norm];
        if recent[0] < 1e-15 && recent[1] < 1e-15 {
            break;
        }
    }
    Ok((total.value() / norm, recent[0] + recent[1]))
}

/// Checks the tight-frame identity `sum |<f, phi_lambda>|^2 = ||f||^2` on
/// `n_tests` random Gaussian mixtures (seeded).
pub fn verify_tightness(window: &Window, lattice: &Lattice2D, n_tests: usize, seed: u64) -> Result<TightnessReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = window.effective_support();
    let center = 0.5 * (lo + hi);
    let probes: Vec<TestFunction> = (0..n_tests.max(1)).map(|_| TestFunction::random(&mut rng, center)).collect();
    let mut ratios = Vec::with_capacity(probes.len());
    let mut max_dev: f64 = 0.0;
    let mut max_tail: f64 = 0.0;
    for f in &probes {
        let (ratio, tail) = frame_ratio(window, lattice, f)?;
        max_dev = max_dev.max((ratio - 1.0).abs());
        max_tail = max_tail.max(tail);
        ratios.push(ratio);
    }
    Ok(TightnessReport { max_relative_deviation: max_dev, ratios, max_tail_estimate: max_tail })
}
