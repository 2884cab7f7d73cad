#![allow(dead_code)]

use std::sync::OnceLock;

use gabor_core::domain::LatticeDomain;
use gabor_core::lattice::Lattice2D;
use gabor_core::window::{kernel_table, painless_window, KernelTable};
use rand::Rng;

pub const HALF_SQRT2: f64 = std::f64::consts::FRAC_1_SQRT_2;

pub fn painless_lattice() -> Lattice2D {
    Lattice2D::rectangular(HALF_SQRT2, HALF_SQRT2).unwrap()
}

/// Painless window with `a = b = 1/sqrt 2` on its tight lattice, built once per test binary.
pub fn painless_table() -> &'static KernelTable {
    static TABLE: OnceLock<KernelTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let s = std::f64::consts::SQRT_2;
        let w = painless_window(HALF_SQRT2, HALF_SQRT2, s, s - HALF_SQRT2).unwrap();
        kernel_table(&w, &painless_lattice(), 1e-10).unwrap()
    })
}

/// Vertices of a star-shaped polygon around the origin; rounding may make
/// the cycle invalid, so callers retry.
pub fn star_vertices<R: Rng + ?Sized>(rng: &mut R, max_radius: i64) -> Vec<[i64; 2]> {
    let k = rng.random_range(3..=8);
    let offset = rng.random_range(0.0..std::f64::consts::TAU);
    (0..k)
        .map(|i| {
            let theta = offset + std::f64::consts::TAU * (i as f64 + rng.random_range(-0.3..0.3)) / k as f64;
            let r = rng.random_range(2..=max_radius) as f64;
            [(r * theta.cos()).round() as i64, (r * theta.sin()).round() as i64]
        })
        .collect()
}

pub fn random_star_domain<R: Rng + ?Sized>(rng: &mut R, max_radius: i64, lattice: &Lattice2D) -> LatticeDomain {
    loop {
        if let Ok(d) = LatticeDomain::from_vertices(&star_vertices(rng, max_radius), &[], lattice.clone()) {
            return d;
        }
    }
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
