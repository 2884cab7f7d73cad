//! Planar lattices, SL(2,R) matrices and the affine automorphisms of Z^2.
//!
//! Lattice points are carried as integer coordinates relative to the basis and
//! embedded into the phase plane only when a metric quantity is needed.

use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::gcd;

/// Integer coordinates `(k, l)` of the point `k*g1 + l*g2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint {
    pub k: i64,
    pub l: i64,
}

impl LatticePoint {
    pub const ORIGIN: LatticePoint = LatticePoint { k: 0, l: 0 };

    pub const fn new(k: i64, l: i64) -> Self {
        Self { k, l }
    }

    pub fn scale(self, s: i64) -> Self {
        Self::new(self.k * s, self.l * s)
    }

    /// Integer cross product `self x other`.
    pub fn cross(self, other: Self) -> i64 {
        self.k * other.l - self.l * other.k
    }
}

impl Add for LatticePoint {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.k + o.k, self.l + o.l)
    }
}

impl Sub for LatticePoint {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.k - o.k, self.l - o.l)
    }
}

impl Neg for LatticePoint {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.k, -self.l)
    }
}

impl From<[i64; 2]> for LatticePoint {
    fn from(v: [i64; 2]) -> Self {
        Self::new(v[0], v[1])
    }
}

impl From<LatticePoint> for [i64; 2] {
    fn from(p: LatticePoint) -> Self {
        [p.k, p.l]
    }
}

/// Rank-2 lattice. Serialized as the list of its two generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[[f64; 2]; 2]", into = "[[f64; 2]; 2]")]
pub struct Lattice2D {
    generators: [[f64; 2]; 2],
    area: f64,
}

impl TryFrom<[[f64; 2]; 2]> for Lattice2D {
    type Error = Error;
    fn try_from(g: [[f64; 2]; 2]) -> Result<Self> {
        Lattice2D::from_generators(g[0], g[1])
    }
}

impl From<Lattice2D> for [[f64; 2]; 2] {
    fn from(l: Lattice2D) -> Self {
        l.generators
    }
}

impl Lattice2D {
    /// Builds a lattice from a 2x2 matrix whose columns are the generators.
    pub fn from_basis(m: [[f64; 2]; 2]) -> Result<Self> {
        Self::from_generators([m[0][0], m[1][0]], [m[0][1], m[1][1]])
    }

    pub fn from_generators(g1: [f64; 2], g2: [f64; 2]) -> Result<Self> {
        let det = g1[0] * g2[1] - g1[1] * g2[0];
        if !(det.abs() > 1e-12) || !det.is_finite() {
            return Err(Error::SingularBasis { det: det.abs() });
        }
        Ok(Self { generators: [g1, g2], area: det.abs() })
    }

    pub fn integer() -> Self {
        Self::rectangular(1.0, 1.0).expect("unit lattice")
    }

    /// `a Z x b Z`.
    pub fn rectangular(a: f64, b: f64) -> Result<Self> {
        Self::from_generators([a, 0.0], [0.0, b])
    }

    /// Basis matrix with generators as columns.
    pub fn basis(&self) -> [[f64; 2]; 2] {
        let [g1, g2] = self.generators;
        [[g1[0], g2[0]], [g1[1], g2[1]]]
    }

    pub fn generators(&self) -> [[f64; 2]; 2] {
        self.generators
    }

    /// Fundamental-domain area `|det basis|`.
    pub fn area(&self) -> f64 {
        self.area
    }

    /// Signed determinant of the basis.
    pub fn det(&self) -> f64 {
        let [g1, g2] = self.generators;
        g1[0] * g2[1] - g1[1] * g2[0]
    }

    /// Returns `Some((a, b))` if the basis is `diag(a, b)` with positive entries.
    pub fn as_rectangular(&self) -> Option<(f64, f64)> {
        let [g1, g2] = self.generators;
        if g1[1] == 0.0 && g2[0] == 0.0 && g1[0] > 0.0 && g2[1] > 0.0 {
            Some((g1[0], g2[1]))
        } else {
            None
        }
    }

    #[inline]
    pub fn embed(&self, p: LatticePoint) -> [f64; 2] {
        self.embed_f(p.k as f64, p.l as f64)
    }

    #[inline]
    pub fn embed_f(&self, k: f64, l: f64) -> [f64; 2] {
        let [g1, g2] = self.generators;
        [k * g1[0] + l * g2[0], k * g1[1] + l * g2[1]]
    }

    /// Real lattice coordinates of a phase-space point.
    pub fn coordinates(&self, x: [f64; 2]) -> [f64; 2] {
        let [g1, g2] = self.generators;
        let det = self.det();
        [(x[0] * g2[1] - x[1] * g2[0]) / det, (g1[0] * x[1] - g1[1] * x[0]) / det]
    }

    pub fn norm(&self, p: LatticePoint) -> f64 {
        let [x, y] = self.embed(p);
        x.hypot(y)
    }

    /// Cell diameter bound: `|g1| + |g2|` of the reduced basis.
    pub fn cell_diameter(&self) -> f64 {
        let (g, _) = gauss_reduce(self.generators);
        g[0][0].hypot(g[0][1]) + g[1][0].hypot(g[1][1])
    }

    /// Same integer labels, embedding changed by `a`.
    pub fn transformed(&self, a: &SL2Matrix) -> Lattice2D {
        let [g1, g2] = self.generators;
        Lattice2D { generators: [a.apply(g1), a.apply(g2)], area: self.area }
            .renormalized()
    }

    fn renormalized(mut self) -> Self {
        self.area = self.det().abs();
        self
    }

    /// True if both bases agree entrywise within `tol`.
    pub fn approx_eq(&self, other: &Lattice2D, tol: f64) -> bool {
        self.generators
            .iter()
            .flatten()
            .zip(other.generators.iter().flatten())
            .all(|(a, b)| (a - b).abs() <= tol)
    }
}

pub fn lattice_from_basis(m: [[f64; 2]; 2]) -> Result<Lattice2D> {
    Lattice2D::from_basis(m)
}

/// All lattice points with `|lambda| <= r`, sorted lexicographically by `(k, l)`.
pub fn enumerate_in_disk(lattice: &Lattice2D, r: f64) -> Vec<LatticePoint> {
    let r = r.max(0.0);
    let [g1, g2] = lattice.generators;
    let det = lattice.det();
    // |k| <= r * |row 1 of basis^-1|, |l| <= r * |row 2 of basis^-1|
    let kmax = (r * g2[0].hypot(g2[1]) / det.abs()).floor() as i64 + 1;
    let lmax = (r * g1[0].hypot(g1[1]) / det.abs()).floor() as i64 + 1;
    let r2 = r * r * (1.0 + 1e-14);
    let mut out = Vec::new();
    for k in -kmax..=kmax {
        for l in -lmax..=lmax {
            let [x, y] = lattice.embed_f(k as f64, l as f64);
            if x * x + y * y <= r2 {
                out.push(LatticePoint::new(k, l));
            }
        }
    }
    out
}

/// Lagrange-Gauss reduction. Returns the reduced generators and the integer
/// matrix `u` with `reduced_i = u[i][0] * g1 + u[i][1] * g2`.
pub fn gauss_reduce(g: [[f64; 2]; 2]) -> ([[f64; 2]; 2], [[i64; 2]; 2]) {
    let norm2 = |v: [f64; 2]| v[0] * v[0] + v[1] * v[1];
    let (mut b1, mut b2) = (g[0], g[1]);
    let (mut u1, mut u2) = ([1i64, 0], [0i64, 1]);
    if norm2(b1) > norm2(b2) {
        std::mem::swap(&mut b1, &mut b2);
        std::mem::swap(&mut u1, &mut u2);
    }
    for _ in 0..200 {
        let mu = ((b1[0] * b2[0] + b1[1] * b2[1]) / norm2(b1)).round();
        if mu != 0.0 {
            b2 = [b2[0] - mu * b1[0], b2[1] - mu * b1[1]];
            let m = mu as i64;
            u2 = [u2[0] - m * u1[0], u2[1] - m * u1[1]];
        }
        if norm2(b2) < norm2(b1) {
            std::mem::swap(&mut b1, &mut b2);
            std::mem::swap(&mut u1, &mut u2);
        } else {
            break;
        }
    }
    ([b1, b2], [u1, u2])
}

/// Element of SL(2,R) acting on column vectors `(q, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[[f64; 2]; 2]", into = "[[f64; 2]; 2]")]
pub struct SL2Matrix {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl TryFrom<[[f64; 2]; 2]> for SL2Matrix {
    type Error = Error;
    fn try_from(m: [[f64; 2]; 2]) -> Result<Self> {
        SL2Matrix::new(m[0][0], m[0][1], m[1][0], m[1][1])
    }
}

impl From<SL2Matrix> for [[f64; 2]; 2] {
    fn from(m: SL2Matrix) -> Self {
        [[m.a, m.b], [m.c, m.d]]
    }
}

impl SL2Matrix {
    pub const IDENTITY: SL2Matrix = SL2Matrix { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };
    /// The Fourier flip `(q, p) -> (p, -q)`.
    pub const FLIP: SL2Matrix = SL2Matrix { a: 0.0, b: 1.0, c: -1.0, d: 0.0 };

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if (det - 1.0).abs() > 1e-12 || !det.is_finite() {
            return Err(Error::NotSpecialLinear { det });
        }
        Ok(Self { a, b, c, d })
    }

    pub(crate) const fn raw(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::raw(c, -s, s, c)
    }

    pub fn diag(s: f64) -> Self {
        Self::raw(s, 0.0, 0.0, 1.0 / s)
    }

    /// `[[1, s], [0, 1]]`.
    pub fn shear(s: f64) -> Self {
        Self::raw(1.0, s, 0.0, 1.0)
    }

    /// `[[1, 0], [c, 1]]`.
    pub fn lower_shear(c: f64) -> Self {
        Self::raw(1.0, 0.0, c, 1.0)
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn inverse(&self) -> Self {
        Self::raw(self.d, -self.b, -self.c, self.a)
    }

    pub fn transpose(&self) -> Self {
        Self::raw(self.a, self.c, self.b, self.d)
    }

    #[inline]
    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    pub fn operator_norm(&self) -> f64 {
        // largest singular value of a 2x2 matrix with det 1
        let s = self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d;
        let det = self.det();
        ((s + (s * s - 4.0 * det * det).max(0.0).sqrt()) / 2.0).sqrt()
    }

    pub fn max_abs_diff(&self, o: &SL2Matrix) -> f64 {
        [self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d]
            .iter()
            .fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// Random matrix `K(t1) diag(s) K(t2)` with `|ln s| <= max_log_stretch`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, max_log_stretch: f64) -> Self {
        let t1 = rng.random_range(0.0..std::f64::consts::TAU);
        let t2 = rng.random_range(0.0..std::f64::consts::TAU);
        let s = rng.random_range(-max_log_stretch..=max_log_stretch).exp();
        SL2Matrix::rotation(t1) * SL2Matrix::diag(s) * SL2Matrix::rotation(t2)
    }

    /// `count` matrices from [`SL2Matrix::random`] with a ChaCha8 generator seeded by `seed`.
    pub fn random_batch(count: usize, seed: u64, max_log_stretch: f64) -> Vec<Self> {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        (0..count).map(|_| SL2Matrix::random(&mut rng, max_log_stretch)).collect()
    }
}

impl Mul for SL2Matrix {
    type Output = SL2Matrix;
    fn mul(self, o: SL2Matrix) -> SL2Matrix {
        SL2Matrix::raw(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

pub fn apply_sl2(a: &SL2Matrix, lattice: &Lattice2D) -> Lattice2D {
    lattice.transformed(a)
}

/// `A = P K` with `P` upper triangular with positive diagonal and `K` a rotation.
pub fn iwasawa_decompose(a: &SL2Matrix) -> (SL2Matrix, SL2Matrix) {
    let r = a.c.hypot(a.d);
    let (s, c) = (a.c / r, a.d / r);
    let k = SL2Matrix::raw(c, -s, s, c);
    let p = *a * k.transpose();
    (SL2Matrix::raw(p.a, p.b, 0.0, r), k)
}

/// Maps a lattice onto `a Z x b Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparatingTransform {
    pub matrix: SL2Matrix,
    pub a: f64,
    pub b: f64,
    /// Rows give the reduced generators in the original integer coordinates.
    pub basis_change: [[i64; 2]; 2],
}

impl SeparatingTransform {
    /// Integer coordinates on `a Z x b Z` of the image of `p`.
    pub fn map_point(&self, p: LatticePoint) -> LatticePoint {
        // p = c1 * r1 + c2 * r2 with r_i the rows of basis_change
        let [r1, r2] = self.basis_change;
        let det = r1[0] * r2[1] - r1[1] * r2[0];
        let c1 = (p.k * r2[1] - p.l * r2[0]) / det;
        let c2 = (r1[0] * p.l - r1[1] * p.k) / det;
        LatticePoint::new(c1, c2)
    }
}

pub fn separating_transform(lattice: &Lattice2D) -> SeparatingTransform {
    let (mut g, mut u) = gauss_reduce(lattice.generators);
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    if det < 0.0 {
        g[1] = [-g[1][0], -g[1][1]];
        u[1] = [-u[1][0], -u[1][1]];
    }
    let a = g[0][0].hypot(g[0][1]);
    let b = lattice.area() / a;
    // A = diag(a, b) * G^-1 where G has the reduced generators as columns
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    let inv = [[g[1][1] / det, -g[1][0] / det], [-g[0][1] / det, g[0][0] / det]];
    let matrix = SL2Matrix::raw(a * inv[0][0], a * inv[0][1], b * inv[1][0], b * inv[1][1]);
    SeparatingTransform { matrix, a, b, basis_change: u }
}

/// Point-group element of Z^2 followed by an integer translation:
/// `x -> signs * swap(x) + translation`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutZ2Transform {
    pub translation: LatticePoint,
    pub signs: [i64; 2],
    pub swap: bool,
}

impl AutZ2Transform {
    pub const IDENTITY: AutZ2Transform =
        AutZ2Transform { translation: LatticePoint::ORIGIN, signs: [1, 1], swap: false };

    /// The eight point-group elements in a fixed order.
    pub fn point_group() -> impl Iterator<Item = AutZ2Transform> {
        [false, true].into_iter().flat_map(|swap| {
            [[1, 1], [-1, 1], [1, -1], [-1, -1]].into_iter().map(move |signs| AutZ2Transform {
                translation: LatticePoint::ORIGIN,
                signs,
                swap,
            })
        })
    }

    pub fn matrix(&self) -> [[i64; 2]; 2] {
        let [s1, s2] = self.signs;
        if self.swap {
            [[0, s1], [s2, 0]]
        } else {
            [[s1, 0], [0, s2]]
        }
    }

    fn from_matrix(m: [[i64; 2]; 2], translation: LatticePoint) -> Self {
        if m[0][0] != 0 {
            AutZ2Transform { translation, signs: [m[0][0], m[1][1]], swap: false }
        } else {
            AutZ2Transform { translation, signs: [m[0][1], m[1][0]], swap: true }
        }
    }

    pub fn linear(&self, p: LatticePoint) -> LatticePoint {
        let m = self.matrix();
        LatticePoint::new(m[0][0] * p.k + m[0][1] * p.l, m[1][0] * p.k + m[1][1] * p.l)
    }

    pub fn apply(&self, p: LatticePoint) -> LatticePoint {
        self.linear(p) + self.translation
    }

    /// `+1` if orientation preserving.
    pub fn orientation(&self) -> i64 {
        let m = self.matrix();
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    /// Group law `(mu1, h1)(mu2, h2) = (h1(mu2) + mu1, h1 h2)`.
    pub fn compose(&self, other: &AutZ2Transform) -> AutZ2Transform {
        let (m1, m2) = (self.matrix(), other.matrix());
        let mut m = [[0i64; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = m1[i][0] * m2[0][j] + m1[i][1] * m2[1][j];
            }
        }
        Self::from_matrix(m, self.linear(other.translation) + self.translation)
    }

    pub fn inverse(&self) -> AutZ2Transform {
        let m = self.matrix();
        let t = [[m[0][0], m[1][0]], [m[0][1], m[1][1]]];
        let lin = Self::from_matrix(t, LatticePoint::ORIGIN);
        AutZ2Transform { translation: -lin.linear(self.translation), ..lin }
    }
}

/// Side of a directed segment on which the domain interior lies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    fn flipped(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// Result of normalizing a primitive segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormalizedSegment {
    pub transform: AutZ2Transform,
    pub m: i64,
    pub n: i64,
    /// True if `transform` sends `end` (not `start`) to the origin.
    pub reversed: bool,
}

/// Finds `tau` sending the segment to `(0,0) -> (n,m)` with `n >= m >= 0`,
/// `n > 0`, and the interior locally below the image line.
pub fn aut_normalize_segment(
    start: LatticePoint,
    end: LatticePoint,
    interior: Side,
) -> Result<NormalizedSegment> {
    let v = end - start;
    if v == LatticePoint::ORIGIN {
        return Err(Error::DegenerateSegment { start, end });
    }
    if gcd(v.k, v.l) != 1 {
        return Err(Error::SegmentHasInteriorLatticePoint { start, end });
    }
    for reversed in [false, true] {
        let (s0, e0) = if reversed { (end, start) } else { (start, end) };
        for h in AutZ2Transform::point_group() {
            let image = h.linear(e0 - s0);
            let (n, m) = (image.k, image.l);
            if !(n > 0 && n >= m && m >= 0) {
                continue;
            }
            let mut side = interior;
            if h.orientation() < 0 {
                side = side.flipped();
            }
            if reversed {
                side = side.flipped();
            }
            // interior below (0,0)->(n,m) means interior on the right
            if side == Side::Right {
                let transform = AutZ2Transform { translation: -h.linear(s0), ..h };
                return Ok(NormalizedSegment { transform, m, n, reversed });
            }
        }
    }
    unreachable!("the point group acts transitively on primitive directions with sides")
}
