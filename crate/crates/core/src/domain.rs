//! Lattice domains: polygons with vertices in the lattice, possibly with holes.
//!
//! All incidence and membership predicates run on integer lattice coordinates
//! (they are invariant under the linear embedding), so boundary lattice points
//! are classified exactly.

use std::collections::BTreeSet;
use std::path::Path;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Lattice2D, LatticePoint};
use crate::numeric::gcd;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Inside,
    Boundary,
    Outside,
}

/// Closed polygon with lattice vertices; the last vertex connects to the first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeCycle {
    vertices: Vec<LatticePoint>,
}

fn cross_i(o: LatticePoint, a: LatticePoint, b: LatticePoint) -> i128 {
    let (ax, ay) = ((a.k - o.k) as i128, (a.l - o.l) as i128);
    let (bx, by) = ((b.k - o.k) as i128, (b.l - o.l) as i128);
    ax * by - ay * bx
}

fn on_segment_i(p: LatticePoint, u: LatticePoint, v: LatticePoint) -> bool {
    cross_i(u, v, p) == 0
        && p.k >= u.k.min(v.k)
        && p.k <= u.k.max(v.k)
        && p.l >= u.l.min(v.l)
        && p.l <= u.l.max(v.l)
}

/// Closed-segment intersection test, touching included.
fn segments_meet(p1: LatticePoint, p2: LatticePoint, q1: LatticePoint, q2: LatticePoint) -> bool {
    let d1 = cross_i(q1, q2, p1).signum();
    let d2 = cross_i(q1, q2, p2).signum();
    let d3 = cross_i(p1, p2, q1).signum();
    let d4 = cross_i(p1, p2, q2).signum();
    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    on_segment_i(p1, q1, q2) || on_segment_i(p2, q1, q2) || on_segment_i(q1, p1, p2) || on_segment_i(q2, p1, p2)
}

impl LatticeCycle {
    /// Validates a vertex list. A repeated closing vertex is accepted and dropped.
    pub fn new(mut vertices: Vec<LatticePoint>) -> Result<Self> {
        if vertices.len() > 1 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(Error::OpenCycle(format!("{} distinct vertices, need at least 3", vertices.len())));
        }
        let n = vertices.len();
        for i in 0..n {
            let (s, e) = (vertices[i], vertices[(i + 1) % n]);
            if s == e {
                return Err(Error::DegenerateSegment { start: s, end: e });
            }
        }
        let cycle = LatticeCycle { vertices };
        cycle.check_simple()?;
        if cycle.twice_signed_area() == 0 {
            return Err(Error::SelfIntersection);
        }
        Ok(cycle)
    }

    fn check_simple(&self) -> Result<()> {
        let v = &self.vertices;
        let n = v.len();
        for i in 0..n {
            let (a, b) = (v[i], v[(i + 1) % n]);
            // adjacent segment must not fold back over this one
            let c = v[(i + 2) % n];
            if cross_i(a, b, c) == 0 {
                let dot = (b.k - a.k) as i128 * (c.k - b.k) as i128 + (b.l - a.l) as i128 * (c.l - b.l) as i128;
                if dot < 0 {
                    return Err(Error::SelfIntersection);
                }
            }
            for j in (i + 2)..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                if segments_meet(a, b, v[j], v[(j + 1) % n]) {
                    return Err(Error::SelfIntersection);
                }
            }
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[LatticePoint] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (LatticePoint, LatticePoint)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Twice the signed area in lattice coordinates (positive if counterclockwise there).
    pub fn twice_signed_area(&self) -> i128 {
        self.edges().map(|(a, b)| a.k as i128 * b.l as i128 - b.k as i128 * a.l as i128).sum()
    }

    pub fn reversed(&self) -> LatticeCycle {
        let mut v = self.vertices.clone();
        v.reverse();
        LatticeCycle { vertices: v }
    }

    pub fn scaled(&self, s: i64) -> LatticeCycle {
        LatticeCycle { vertices: self.vertices.iter().map(|p| p.scale(s)).collect() }
    }

    /// Subdivides every edge at its interior lattice points.
    pub fn split_at_lattice_points(&self) -> LatticeCycle {
        let mut out = Vec::new();
        for (a, b) in self.edges() {
            let d = b - a;
            let g = gcd(d.k, d.l);
            let step = LatticePoint::new(d.k / g, d.l / g);
            for i in 0..g {
                out.push(a + step.scale(i));
            }
        }
        LatticeCycle { vertices: out }
    }

    fn map(&self, f: impl Fn(LatticePoint) -> LatticePoint) -> LatticeCycle {
        LatticeCycle { vertices: self.vertices.iter().map(|&p| f(p)).collect() }
    }
}

/// Exact closed-polygon classification of `p` against cycles scaled by `num`.
fn classify(cycles: &[&LatticeCycle], num: i64, p: LatticePoint) -> Location {
    let mut crossings = 0u32;
    for cycle in cycles {
        for (u, v) in cycle.edges() {
            let (u, v) = (u.scale(num), v.scale(num));
            if on_segment_i(p, u, v) {
                return Location::Boundary;
            }
            if u.l <= p.l && p.l < v.l {
                if cross_i(u, v, p) > 0 {
                    crossings += 1;
                }
            } else if v.l <= p.l && p.l < u.l && cross_i(u, v, p) < 0 {
                crossings += 1;
            }
        }
    }
    if crossings % 2 == 1 {
        Location::Inside
    } else {
        Location::Outside
    }
}

/// Floating-point parity test on real lattice coordinates. Used for probes
/// that are known to be off the boundary.
fn contains_real(cycles: &[&LatticeCycle], scale: f64, x: [f64; 2]) -> bool {
    let mut inside = false;
    for cycle in cycles {
        for (u, v) in cycle.edges() {
            let (ux, uy) = (u.k as f64 * scale, u.l as f64 * scale);
            let (vx, vy) = (v.k as f64 * scale, v.l as f64 * scale);
            if (uy > x[1]) != (vy > x[1]) {
                let t = (x[1] - uy) / (vy - uy);
                if x[0] < ux + t * (vx - ux) {
                    inside = !inside;
                }
            }
        }
    }
    inside
}

fn point_segment_distance(p: [f64; 2], u: [f64; 2], v: [f64; 2]) -> f64 {
    let d = [v[0] - u[0], v[1] - u[1]];
    let w = [p[0] - u[0], p[1] - u[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = ((w[0] * d[0] + w[1] * d[1]) / len2).clamp(0.0, 1.0);
    (w[0] - t * d[0]).hypot(w[1] - t * d[1])
}

/// One primitive boundary segment with its outward unit normal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundarySegment {
    pub start: LatticePoint,
    pub end: LatticePoint,
    /// Index of the cycle: 0 is the outer cycle, `i >= 1` is hole `i - 1`.
    pub cycle: usize,
    pub length: f64,
    pub outer_normal: [f64; 2],
}

impl BoundarySegment {
    /// Signed distance of `x` from the line through the origin parallel to the segment,
    /// positive on the outward side.
    pub fn directional_distance(&self, x: [f64; 2]) -> f64 {
        x[0] * self.outer_normal[0] + x[1] * self.outer_normal[1]
    }
}

/// Region in which lattice points can be enumerated and classified.
pub trait LatticeRegion: Sync {
    fn lattice(&self) -> &Lattice2D;
    /// Closed-region membership of a lattice point.
    fn contains(&self, p: LatticePoint) -> bool;
    /// All lattice points in the region, sorted by `(k, l)`.
    fn lattice_points(&self) -> Vec<LatticePoint>;
    /// Euclidean distance of the embedded point from the region boundary.
    /// Regions without a geometric boundary return 0.
    fn boundary_distance(&self, p: LatticePoint) -> f64;
}

/// Bounded closed region between an outer cycle (counterclockwise in the
/// embedded plane) and holes (clockwise).
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeDomain {
    lattice: Lattice2D,
    outer: LatticeCycle,
    holes: Vec<LatticeCycle>,
}

impl LatticeDomain {
    pub fn from_cycles(outer: LatticeCycle, holes: Vec<LatticeCycle>, lattice: Lattice2D) -> Result<Self> {
        let orient = lattice.det().signum() as i128;
        let outer = if outer.twice_signed_area() * orient > 0 { outer } else { outer.reversed() };
        let holes: Vec<LatticeCycle> = holes
            .into_iter()
            .map(|h| if h.twice_signed_area() * orient < 0 { h } else { h.reversed() })
            .collect();

        let all: Vec<&LatticeCycle> = std::iter::once(&outer).chain(holes.iter()).collect();
        for i in 0..all.len() {
            for j in (i + 1)..all.len() {
                for (a, b) in all[i].edges() {
                    for (c, d) in all[j].edges() {
                        if segments_meet(a, b, c, d) {
                            return Err(Error::TouchingCycles(i, j));
                        }
                    }
                }
            }
        }
        for (i, h) in holes.iter().enumerate() {
            if classify(&[&outer], 1, h.vertices[0]) != Location::Inside {
                return Err(Error::WrongNesting(format!("hole {i} is not inside the outer cycle")));
            }
            for (j, g) in holes.iter().enumerate() {
                if i != j && classify(&[g], 1, h.vertices[0]) == Location::Inside {
                    return Err(Error::WrongNesting(format!("hole {i} lies inside hole {j}")));
                }
            }
        }
        Ok(LatticeDomain { lattice, outer, holes })
    }

    pub fn from_vertices(outer: &[[i64; 2]], holes: &[Vec<[i64; 2]>], lattice: Lattice2D) -> Result<Self> {
        let to_cycle = |v: &[[i64; 2]]| LatticeCycle::new(v.iter().map(|&p| p.into()).collect());
        let holes = holes.iter().map(|h| to_cycle(h)).collect::<Result<Vec<_>>>()?;
        Self::from_cycles(to_cycle(outer)?, holes, lattice)
    }

    /// Square `[0, side]^2` in lattice coordinates.
    pub fn square(side: i64, lattice: Lattice2D) -> Result<Self> {
        Self::from_vertices(&[[0, 0], [side, 0], [side, side], [0, side]], &[], lattice)
    }

    pub fn outer(&self) -> &LatticeCycle {
        &self.outer
    }

    pub fn holes(&self) -> &[LatticeCycle] {
        &self.holes
    }

    fn cycles(&self) -> Vec<&LatticeCycle> {
        std::iter::once(&self.outer).chain(self.holes.iter()).collect()
    }

    /// Phase-space area: `A_Lambda` times the lattice-coordinate area.
    pub fn area(&self) -> f64 {
        let twice: i128 = self.outer.twice_signed_area().abs()
            - self.holes.iter().map(|h| h.twice_signed_area().abs()).sum::<i128>();
        self.lattice.area() * twice as f64 / 2.0
    }

    /// Boundary segments split at lattice points, in traversal order.
    pub fn boundary_segments(&self) -> Vec<BoundarySegment> {
        let mut out = Vec::new();
        for (idx, cycle) in self.cycles().into_iter().enumerate() {
            for (start, end) in cycle.split_at_lattice_points().edges() {
                let [x0, y0] = self.lattice.embed(start);
                let [x1, y1] = self.lattice.embed(end);
                let (dx, dy) = (x1 - x0, y1 - y0);
                let length = dx.hypot(dy);
                out.push(BoundarySegment {
                    start,
                    end,
                    cycle: idx,
                    length,
                    outer_normal: [dy / length, -dx / length],
                });
            }
        }
        out
    }

    pub fn boundary_length(&self) -> f64 {
        self.boundary_segments().iter().map(|s| s.length).sum()
    }

    pub fn locate(&self, p: LatticePoint) -> Location {
        classify(&self.cycles(), 1, p)
    }

    /// Membership of a real point given in lattice coordinates (not exact on the boundary).
    pub fn contains_coordinates(&self, x: [f64; 2]) -> bool {
        contains_real(&self.cycles(), 1.0, x)
    }

    /// Integer dilation; stays a lattice domain.
    pub fn dilate_integer(&self, r: i64) -> LatticeDomain {
        assert!(r >= 1, "dilation factor must be positive");
        LatticeDomain {
            lattice: self.lattice.clone(),
            outer: self.outer.scaled(r),
            holes: self.holes.iter().map(|h| h.scaled(r)).collect(),
        }
    }

    /// Dilation by a positive real factor.
    pub fn dilate(&self, r: f64) -> Dilated {
        assert!(r > 0.0 && r.is_finite(), "dilation factor must be positive");
        if r.fract() == 0.0 && r <= i32::MAX as f64 {
            Dilated::Lattice(self.dilate_integer(r as i64))
        } else {
            let ratio = Ratio::<i64>::approximate_float(r).expect("representable dilation factor");
            Dilated::Scaled(ScaledRegion::new(self.clone(), *ratio.numer(), *ratio.denom()))
        }
    }

    /// Same integer labels on another lattice.
    pub fn relabel(&self, lattice: Lattice2D) -> LatticeDomain {
        let flip = self.lattice.det().signum() != lattice.det().signum();
        let fix = |c: &LatticeCycle| if flip { c.reversed() } else { c.clone() };
        LatticeDomain {
            lattice,
            outer: fix(&self.outer),
            holes: self.holes.iter().map(fix).collect(),
        }
    }

    /// Image under an integer lattice map `p -> f(p)`.
    pub fn map_points(&self, f: impl Fn(LatticePoint) -> LatticePoint + Copy, lattice: Lattice2D) -> Result<LatticeDomain> {
        Self::from_cycles(self.outer.map(f), self.holes.iter().map(|h| h.map(f)).collect(), lattice)
    }

    pub fn to_file(&self) -> DomainFile {
        let pts = |c: &LatticeCycle| c.vertices.iter().map(|&p| p.into()).collect::<Vec<[i64; 2]>>();
        DomainFile {
            lattice: self.lattice.clone(),
            outer: pts(&self.outer),
            holes: self.holes.iter().map(pts).collect(),
        }
    }

    pub fn load(path: &Path) -> Result<LatticeDomain> {
        let file: DomainFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        file.into_domain()
    }

    fn bounding_box(&self, num: i64, den: i64) -> (i64, i64, i64, i64) {
        let v = &self.outer.vertices;
        let f = |x: i64, up: bool| {
            let n = x * num;
            if up {
                num_integer::Integer::div_ceil(&n, &den)
            } else {
                num_integer::Integer::div_floor(&n, &den)
            }
        };
        let kmin = v.iter().map(|p| f(p.k, false)).min().unwrap();
        let kmax = v.iter().map(|p| f(p.k, true)).max().unwrap();
        let lmin = v.iter().map(|p| f(p.l, false)).min().unwrap();
        let lmax = v.iter().map(|p| f(p.l, true)).max().unwrap();
        (kmin, kmax, lmin, lmax)
    }

    fn distance_scaled(&self, scale: f64, p: LatticePoint) -> f64 {
        let x = self.lattice.embed(p);
        let mut best = f64::INFINITY;
        for cycle in self.cycles() {
            for (u, v) in cycle.edges() {
                let u = self.lattice.embed_f(u.k as f64 * scale, u.l as f64 * scale);
                let v = self.lattice.embed_f(v.k as f64 * scale, v.l as f64 * scale);
                best = best.min(point_segment_distance(x, u, v));
            }
        }
        best
    }
}

impl LatticeRegion for LatticeDomain {
    fn lattice(&self) -> &Lattice2D {
        &self.lattice
    }

    fn contains(&self, p: LatticePoint) -> bool {
        self.locate(p) != Location::Outside
    }

    fn lattice_points(&self) -> Vec<LatticePoint> {
        let (kmin, kmax, lmin, lmax) = self.bounding_box(1, 1);
        let cycles = self.cycles();
        let mut out = Vec::new();
        for k in kmin..=kmax {
            for l in lmin..=lmax {
                let p = LatticePoint::new(k, l);
                if classify(&cycles, 1, p) != Location::Outside {
                    out.push(p);
                }
            }
        }
        out
    }

    fn boundary_distance(&self, p: LatticePoint) -> f64 {
        self.distance_scaled(1.0, p)
    }
}

/// A lattice domain dilated by a rational factor `num / den`; its vertices
/// need not be lattice points, so it supports membership and enumeration only.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledRegion {
    base: LatticeDomain,
    num: i64,
    den: i64,
}

impl ScaledRegion {
    pub fn new(base: LatticeDomain, num: i64, den: i64) -> Self {
        assert!(num > 0 && den > 0);
        let g = gcd(num, den);
        ScaledRegion { base, num: num / g, den: den / g }
    }

    pub fn factor(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn is_lattice_domain(&self) -> bool {
        self.den == 1
    }

    pub fn base(&self) -> &LatticeDomain {
        &self.base
    }

    /// Area `R^2 * area(base)`.
    pub fn area(&self) -> f64 {
        self.factor() * self.factor() * self.base.area()
    }
}

impl LatticeRegion for ScaledRegion {
    fn lattice(&self) -> &Lattice2D {
        &self.base.lattice
    }

    fn contains(&self, p: LatticePoint) -> bool {
        classify(&self.base.cycles(), self.num, p.scale(self.den)) != Location::Outside
    }

    fn lattice_points(&self) -> Vec<LatticePoint> {
        let (kmin, kmax, lmin, lmax) = self.base.bounding_box(self.num, self.den);
        let cycles = self.base.cycles();
        let mut out = Vec::new();
        for k in kmin..=kmax {
            for l in lmin..=lmax {
                let p = LatticePoint::new(k, l);
                if classify(&cycles, self.num, p.scale(self.den)) != Location::Outside {
                    out.push(p);
                }
            }
        }
        out
    }

    fn boundary_distance(&self, p: LatticePoint) -> f64 {
        self.base.distance_scaled(self.factor(), p)
    }
}

/// Outcome of a dilation.
#[derive(Debug, Clone, PartialEq)]
pub enum Dilated {
    Lattice(LatticeDomain),
    Scaled(ScaledRegion),
}

impl Dilated {
    pub fn as_lattice_domain(&self) -> Option<&LatticeDomain> {
        match self {
            Dilated::Lattice(d) => Some(d),
            Dilated::Scaled(_) => None,
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            Dilated::Lattice(d) => d.area(),
            Dilated::Scaled(s) => s.area(),
        }
    }
}

impl LatticeRegion for Dilated {
    fn lattice(&self) -> &Lattice2D {
        match self {
            Dilated::Lattice(d) => d.lattice(),
            Dilated::Scaled(s) => s.lattice(),
        }
    }
    fn contains(&self, p: LatticePoint) -> bool {
        match self {
            Dilated::Lattice(d) => d.contains(p),
            Dilated::Scaled(s) => s.contains(p),
        }
    }
    fn lattice_points(&self) -> Vec<LatticePoint> {
        match self {
            Dilated::Lattice(d) => d.lattice_points(),
            Dilated::Scaled(s) => s.lattice_points(),
        }
    }
    fn boundary_distance(&self, p: LatticePoint) -> f64 {
        match self {
            Dilated::Lattice(d) => d.boundary_distance(p),
            Dilated::Scaled(s) => s.boundary_distance(p),
        }
    }
}

/// Arbitrary finite set of lattice points.
#[derive(Debug, Clone, PartialEq)]
pub struct FinitePointSet {
    lattice: Lattice2D,
    points: BTreeSet<LatticePoint>,
}

impl FinitePointSet {
    pub fn new(lattice: Lattice2D, points: impl IntoIterator<Item = LatticePoint>) -> Self {
        FinitePointSet { lattice, points: points.into_iter().collect() }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl LatticeRegion for FinitePointSet {
    fn lattice(&self) -> &Lattice2D {
        &self.lattice
    }
    fn contains(&self, p: LatticePoint) -> bool {
        self.points.contains(&p)
    }
    fn lattice_points(&self) -> Vec<LatticePoint> {
        self.points.iter().copied().collect()
    }
    fn boundary_distance(&self, _p: LatticePoint) -> f64 {
        0.0
    }
}

/// On-disk domain description with integer vertices in lattice coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainFile {
    pub lattice: Lattice2D,
    pub outer: Vec<[i64; 2]>,
    #[serde(default)]
    pub holes: Vec<Vec<[i64; 2]>>,
}

impl DomainFile {
    pub fn into_domain(self) -> Result<LatticeDomain> {
        LatticeDomain::from_vertices(&self.outer, &self.holes, self.lattice)
    }
}
