mod common;

use common::{painless_table, random_star_domain, rel_diff};
use gabor_core::boundary::{bf, geometric_atom, half_lattice_sum, sf, slope_profile, t_slope};
use gabor_core::domain::LatticeDomain;
use gabor_core::lattice::{aut_normalize_segment, iwasawa_decompose, AutZ2Transform, Lattice2D, LatticePoint, SL2Matrix, Side};
use gabor_core::localization::pf_double_sum;
use gabor_core::numeric::gcd;
use gabor_core::window::{gaussian_window, kernel_table};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sl2(seed: u64, stretch: f64) -> SL2Matrix {
    SL2Matrix::random(&mut ChaCha8Rng::seed_from_u64(seed), stretch)
}

fn star(seed: u64, max_radius: i64) -> LatticeDomain {
    random_star_domain(&mut ChaCha8Rng::seed_from_u64(seed), max_radius, &Lattice2D::integer())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn iwasawa_factors(seed in any::<u64>(), stretch in 0.0f64..3.0) {
        let a = sl2(seed, stretch);
        let (p, k) = iwasawa_decompose(&a);
        let scale = a.operator_norm();
        prop_assert!(p.c.abs() < 1e-15);
        prop_assert!(p.a > 0.0 && p.d > 0.0);
        prop_assert!((k * k.transpose()).max_abs_diff(&SL2Matrix::IDENTITY) < 1e-12);
        prop_assert!((k.det() - 1.0).abs() < 1e-12);
        prop_assert!((p * k).max_abs_diff(&a) < 1e-12 * scale);
    }

    #[test]
    fn normalized_segment_lands_on_positive_slope(
        k in -50i64..50, l in -50i64..50, dx in -30i64..30, dy in -30i64..30, left in any::<bool>()
    ) {
        prop_assume!((dx, dy) != (0, 0) && gcd(dx, dy) == 1);
        let start = LatticePoint::new(k, l);
        let end = LatticePoint::new(k + dx, l + dy);
        let side = if left { Side::Left } else { Side::Right };
        let s = aut_normalize_segment(start, end, side).unwrap();
        prop_assert!(s.n > 0 && s.m >= 0 && s.m <= s.n);
        let (first, second) = if s.reversed { (end, start) } else { (start, end) };
        prop_assert_eq!(s.transform.apply(first), LatticePoint::ORIGIN);
        prop_assert_eq!(s.transform.apply(second), LatticePoint::new(s.n, s.m));
        // probe on the interior side, scaled by 2 to stay integral
        let (ux, uy) = (dx, dy);
        let normal = if left { LatticePoint::new(-uy, ux) } else { LatticePoint::new(uy, -ux) };
        let probe = LatticePoint::new(2 * k + dx + normal.k, 2 * l + dy + normal.l);
        let image = s.transform.linear(probe) + s.transform.translation.scale(2);
        prop_assert!(image.l * s.n - image.k * s.m < 0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn area_survives_symplectic_maps(a in 0.2f64..3.0, b in 0.2f64..3.0, seed in any::<u64>()) {
        let l = Lattice2D::rectangular(a, b).unwrap();
        let t = l.transformed(&sl2(seed, 2.0));
        prop_assert!(rel_diff(l.area(), t.area()) < 1e-12);
    }

    #[test]
    fn automorphism_composition_and_inverse(
        g in 0usize..8, h in 0usize..8, t1 in (-20i64..20, -20i64..20), t2 in (-20i64..20, -20i64..20),
        p in (-100i64..100, -100i64..100)
    ) {
        let group: Vec<AutZ2Transform> = AutZ2Transform::point_group().collect();
        let x = AutZ2Transform { translation: LatticePoint::new(t1.0, t1.1), ..group[g] };
        let y = AutZ2Transform { translation: LatticePoint::new(t2.0, t2.1), ..group[h] };
        let p = LatticePoint::new(p.0, p.1);
        prop_assert_eq!(x.compose(&y).apply(p), x.apply(y.apply(p)));
        prop_assert_eq!(x.inverse().apply(x.apply(p)), p);
    }

    #[test]
    fn outward_normals_point_outside(seed in any::<u64>()) {
        let d = star(seed, 9);
        for s in d.boundary_segments() {
            let mid = [0.5 * (s.start.k + s.end.k) as f64, 0.5 * (s.start.l + s.end.l) as f64];
            let eps = 1e-3;
            let out = [mid[0] + eps * s.outer_normal[0], mid[1] + eps * s.outer_normal[1]];
            let inn = [mid[0] - eps * s.outer_normal[0], mid[1] - eps * s.outer_normal[1]];
            prop_assert!(!d.contains_coordinates(out), "{:?} {:?}", s, out);
            prop_assert!(d.contains_coordinates(inn), "{:?} {:?}", s, inn);
        }
    }

    #[test]
    fn slope_profile_matches_brute_force_and_frequencies(n in 1i64..40, m_raw in 0i64..40) {
        let m = m_raw % (n + 1);
        prop_assume!(m == 0 || gcd(m, n) == 1);
        let prof = slope_profile(m, n).unwrap();
        for t in 0..n {
            for s in 0..n {
                prop_assert_eq!(prof.values[t as usize][s as usize], t_slope(m, n, t, s));
            }
            let expected: Vec<(i64, usize)> = prof
                .predicted(t as usize)
                .into_iter()
                .filter(|&(_, c)| c > 0)
                .map(|(v, c)| (v, c as usize))
                .collect();
            prop_assert_eq!(prof.frequencies(t as usize), expected);
        }
    }

    #[test]
    fn geometric_atom_is_area_of_parallelogram(
        a in 0.2f64..3.0, b in 0.2f64..3.0, d in 0.3f64..3.0, e in -3.0f64..3.0,
        n in -20i64..20, m in -20i64..20, k in -20i64..20, l in -20i64..20
    ) {
        prop_assume!((n, m) != (0, 0));
        let lat = Lattice2D::from_generators([d * a, 0.0], [e * b, b / d]).unwrap();
        let atom = geometric_atom(&lat, LatticePoint::ORIGIN, LatticePoint::new(n, m), LatticePoint::new(k, l)).unwrap();
        let expected = a * b * ((n * l - k * m) as f64).abs();
        prop_assert!((atom - expected).abs() <= 1e-10 * expected.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gaussian_kernel_is_even(re in -2.0f64..2.0, im in 0.2f64..3.0, a in 0.3f64..1.5, b in 0.3f64..1.5) {
        let w = gaussian_window(Complex64::new(re, im), 1.0).unwrap();
        let t = kernel_table(&w, &Lattice2D::rectangular(a, b).unwrap(), 1e-10).unwrap();
        prop_assert!(t.evenness_defect() <= 1e-12);
    }

    #[test]
    fn half_lattice_sum_is_even_in_the_normal(theta in 0.0f64..std::f64::consts::TAU) {
        let t = painless_table();
        let n = [theta.cos(), theta.sin()];
        let plus = half_lattice_sum(t, n).unwrap();
        let minus = half_lattice_sum(t, [-n[0], -n[1]]).unwrap();
        prop_assert!(rel_diff(plus, minus) < 1e-12, "{plus} {minus}");
    }

    #[test]
    fn pf_is_invariant_under_lattice_automorphisms(seed in any::<u64>(), g in 0usize..8, tk in -9i64..9, tl in -9i64..9) {
        let t = painless_table().as_z2();
        let d = star(seed, 7);
        let h = AutZ2Transform { translation: LatticePoint::new(tk, tl), ..AutZ2Transform::point_group().nth(g).unwrap() };
        let moved = d.map_points(|p| h.apply(p), Lattice2D::integer()).unwrap();
        let moved_table = t.map_labels(|p| h.linear(p));
        let before = pf_double_sum(&t, &d, None).unwrap().value;
        let after = pf_double_sum(&moved_table, &moved, None).unwrap().value;
        prop_assert!(rel_diff(before, after) < 1e-12, "{before} {after}");
    }

    #[test]
    fn widening_the_kernel_never_loses_mass(seed in any::<u64>(), r1 in 1.0f64..6.0, extra in 0.5f64..6.0) {
        let full = painless_table();
        let d = star(seed, 6).relabel(full.lattice().clone());
        let small = full.truncated(r1);
        let large = full.truncated(r1 + extra);
        let ps = pf_double_sum(&small, &d, None).unwrap();
        let pl = pf_double_sum(&large, &d, None).unwrap();
        let pf = pf_double_sum(full, &d, None).unwrap();
        prop_assert!(pl.value >= ps.value - 1e-12);
        prop_assert!(pf.value - ps.value <= ps.truncation_error + 1e-12);
    }

    #[test]
    fn boundary_form_scales_with_dilation(seed in any::<u64>(), r in 2i64..6) {
        let t = painless_table();
        let d = star(seed, 6).relabel(t.lattice().clone());
        let base = bf(t, &d).unwrap().value;
        let dilated = bf(t, &d.dilate_integer(r)).unwrap().value;
        prop_assert!(rel_diff(dilated, r as f64 * base) < 1e-12);
        let s = sf(t, &d).unwrap();
        prop_assert!(rel_diff(s, base / t.lattice().area()) < 1e-10);
    }
}
