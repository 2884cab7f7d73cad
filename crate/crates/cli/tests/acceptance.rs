//! End-to-end acceptance checks. Runs without the libtest harness so that
//! every check prints exactly one PASS or FAIL line; exits nonzero on any failure.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::path::Path;
use std::time::{Duration, Instant};

use gabor_cli::{run, Command, Invocation, Overrides};
use gabor_core::asymptotics::{convergence_study, eigenvalue_count, transported_pair, DEFAULT_RS};
use gabor_core::boundary::{bf, geometric_atom, slope_profile, strip_finite_r_sum, strip_geometric_form, t_slope};
use gabor_core::domain::{FinitePointSet, LatticeDomain};
use gabor_core::lattice::{Lattice2D, LatticePoint, SL2Matrix};
use gabor_core::localization::{pf_double_sum, pf_eigen, PfMethod, DEFAULT_MATRIX_CAP};
use gabor_core::metaplectic::{mu_apply_gaussian, nearest_points, verify_covariance, SamplingGrid};
use gabor_core::numeric::gcd;
use gabor_core::window::{kernel_table, painless_window, verify_tightness, KernelTable, Window, WindowKind, WindowSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type NamedCheck<'a> = (&'static str, Box<dyn Fn() -> Check + 'a>);

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

struct Suite {
    window: Window,
    lattice: Lattice2D,
    table: KernelTable,
    square: LatticeDomain,
}

impl Suite {
    fn new() -> Self {
        let window = painless_window(FRAC_1_SQRT_2, FRAC_1_SQRT_2, SQRT_2, SQRT_2 - FRAC_1_SQRT_2).unwrap();
        let lattice = Lattice2D::rectangular(FRAC_1_SQRT_2, FRAC_1_SQRT_2).unwrap();
        let table = kernel_table(&window, &lattice, 1e-10).unwrap();
        let square = LatticeDomain::square(1, lattice.clone()).unwrap();
        Suite { window, lattice, table, square }
    }
}

fn gaussian() -> (Window, Lattice2D) {
    let w = WindowSpec::Gaussian { w: [0.0, 1.0], norm_sq: 1.0 }.build().unwrap();
    (w, Lattice2D::rectangular(0.5, 0.5).unwrap())
}

fn tightness(s: &Suite) -> Check {
    let start = Instant::now();
    let r = verify_tightness(&s.window, &s.lattice, 20, 7).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(
        r.max_relative_deviation <= 1e-6 && elapsed < Duration::from_secs(10),
        format!("max deviation {:.2e} over {} probes in {elapsed:.2?}", r.max_relative_deviation, r.ratios.len()),
    )
}

fn norm_law() -> Check {
    // (a, b, support, ramp)
    let windows = [
        (FRAC_1_SQRT_2, FRAC_1_SQRT_2, SQRT_2, SQRT_2 - FRAC_1_SQRT_2),
        (0.5, 1.0, 1.0, 0.25),
        (0.5, 1.0, 1.0, 0.5),
        (0.4, 2.0, 0.5, 0.1),
        (0.6, 0.8, 1.25, 0.4),
    ];
    let mut worst: f64 = 0.0;
    for (a, b, l, ramp) in windows {
        let w = painless_window(a, b, l, ramp).map_err(|e| e.to_string())?;
        worst = worst.max((w.norm_sq() - a * b).abs());
    }
    ensure(worst <= 1e-6, format!("max |norm - A| {worst:.2e} over {} painless windows", windows.len()))
}

fn frame_identity(s: &Suite) -> Check {
    let d = (s.table.sum() - s.window.norm_sq()).abs();
    ensure(d <= 1e-6, format!("|sum F - norm| = {d:.2e} over {} entries", s.table.len()))
}

fn random_domain(rng: &mut ChaCha8Rng, lattice: &Lattice2D) -> LatticeDomain {
    loop {
        let k = rng.random_range(3..=9);
        let offset = rng.random_range(0.0..std::f64::consts::TAU);
        let outer: Vec<[i64; 2]> = (0..k)
            .map(|i| {
                let theta = offset + std::f64::consts::TAU * (i as f64 + rng.random_range(-0.3..0.3)) / k as f64;
                let r = rng.random_range(3.0..11.0);
                [(r * theta.cos()).round() as i64, (r * theta.sin()).round() as i64]
            })
            .collect();
        let holes = if rng.random_bool(0.4) { vec![vec![[0, 0], [1, 0], [0, 1]]] } else { Vec::new() };
        if let Ok(d) = LatticeDomain::from_vertices(&outer, &holes, lattice.clone()) {
            let n = gabor_core::domain::LatticeRegion::lattice_points(&d).len();
            if (20..=400).contains(&n) {
                return d;
            }
        }
    }
}

fn finite_set_oracle(s: &Suite) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst_rel, mut worst_range): (f64, f64) = (0.0, 0.0);
    let mut sizes = Vec::new();
    for _ in 0..10 {
        let d = random_domain(&mut rng, &s.lattice);
        let sum = pf_double_sum(&s.table, &d, None).map_err(|e| e.to_string())?.value;
        let eig = pf_eigen(&s.table, &d, DEFAULT_MATRIX_CAP).map_err(|e| e.to_string())?;
        sizes.push(eig.eigenvalues.len());
        worst_rel = worst_rel.max(rel(sum, eig.pf.value));
        for &x in &eig.eigenvalues {
            worst_range = worst_range.max(-x).max(x - 1.0);
        }
    }
    ensure(
        worst_rel <= 1e-6 && worst_range <= 1e-9,
        format!(
            "max relative difference {worst_rel:.2e}, eigenvalues outside [0,1] by at most {:.2e}, sizes {sizes:?}",
            worst_range.max(0.0)
        ),
    )
}

fn single_point(s: &Suite) -> Check {
    let p = FinitePointSet::new(s.lattice.clone(), [LatticePoint::ORIGIN]);
    let n = s.window.norm_sq();
    let expected = n * (1.0 - n);
    let sum = pf_double_sum(&s.table, &p, None).map_err(|e| e.to_string())?.value;
    let eig = pf_eigen(&s.table, &p, 1).map_err(|e| e.to_string())?.pf.value;
    let d = (sum - expected).abs().max((eig - expected).abs());
    ensure(d <= 1e-8, format!("double sum {sum}, eigen {eig}, expected {expected}"))
}

fn slopes() -> Check {
    let start = Instant::now();
    let (mut pairs, mut cells, mut mismatches) = (0, 0, 0);
    for n in 1..=20i64 {
        for m in 0..=n {
            if gcd(m, n) != 1 {
                continue;
            }
            pairs += 1;
            let prof = slope_profile(m, n).map_err(|e| e.to_string())?;
            for t in 0..n {
                for s in 0..n {
                    cells += 1;
                    if prof.values[t as usize][s as usize] != t_slope(m, n, t, s) {
                        mismatches += 1;
                    }
                }
                let predicted: Vec<(i64, usize)> =
                    prof.predicted(t as usize).into_iter().filter(|p| p.1 > 0).map(|(v, c)| (v, c as usize)).collect();
                if prof.frequencies(t as usize) != predicted {
                    mismatches += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(
        mismatches == 0 && elapsed < Duration::from_secs(5),
        format!("{pairs} pairs, {cells} values, {mismatches} mismatches in {elapsed:.2?}"),
    )
}

fn geometric_atoms() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    while count < 1000 {
        let (a, b) = (rng.random_range(0.1..4.0), rng.random_range(0.1..4.0));
        let (d, e) = (rng.random_range(0.2..5.0), rng.random_range(-5.0..5.0));
        let [n, m, k, l] = [0; 4].map(|_| rng.random_range(-50i64..=50));
        if (n, m) == (0, 0) {
            continue;
        }
        count += 1;
        // generators R (a, 0) and R (0, b) with R = [[d, e], [0, 1/d]]
        let lattice = Lattice2D::from_generators([d * a, 0.0], [e * b, b / d]).map_err(|x| x.to_string())?;
        let atom = geometric_atom(&lattice, LatticePoint::ORIGIN, LatticePoint::new(n, m), LatticePoint::new(k, l))
            .map_err(|x| x.to_string())?;
        let expected = (a * b * (n * l - k * m) as f64).powi(2);
        let err = if expected == 0.0 { atom * atom } else { (atom * atom - expected).abs() / expected };
        worst = worst.max(err);
    }
    ensure(worst <= 1e-10, format!("max relative error {worst:.2e} over {count} instances"))
}

fn invariance(s: &Suite) -> Check {
    let start = Instant::now();
    let matrices = SL2Matrix::random_batch(20, 99, 1.0);
    let rows = [4, 8, 16];
    let base_bf = bf(&s.table, &s.square).map_err(|e| e.to_string())?.value;
    let mut base_pf = Vec::new();
    for r in rows {
        base_pf.push(pf_double_sum(&s.table, &s.square.dilate_integer(r), None).map_err(|e| e.to_string())?.value);
    }
    let (gw, gl) = gaussian();
    let WindowKind::Gaussian(g) = gw.kind() else { unreachable!() };
    let gt = kernel_table(&gw, &gl, 1e-12).map_err(|e| e.to_string())?;
    let gd = LatticeDomain::from_vertices(&[[0, 0], [3, 0], [3, 1], [1, 2], [0, 2]], &[], gl.clone()).unwrap();
    let g_bf = bf(&gt, &gd).map_err(|e| e.to_string())?.value;

    let (mut worst_bf, mut worst_pf, mut worst_independent): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for a in &matrices {
        let (t2, d2) = transported_pair(&s.table, &s.square, a);
        worst_bf = worst_bf.max(rel(base_bf, bf(&t2, &d2).map_err(|e| e.to_string())?.value));
        for (&r, &p) in rows.iter().zip(&base_pf) {
            let q = pf_double_sum(&t2, &d2.dilate_integer(r), None).map_err(|e| e.to_string())?.value;
            worst_pf = worst_pf.max(rel(p, q));
        }
        // independent route: kernel recomputed from the transformed Gaussian
        let moved = mu_apply_gaussian(a, g).map_err(|e| e.to_string())?;
        let lattice = gl.transformed(a);
        let t3 = kernel_table(&moved, &lattice, 1e-12).map_err(|e| e.to_string())?;
        let v = bf(&t3, &gd.relabel(lattice)).map_err(|e| e.to_string())?.value;
        worst_independent = worst_independent.max(rel(g_bf, v));
    }
    let elapsed = start.elapsed();
    ensure(
        worst_bf <= 1e-8 && worst_pf <= 1e-8 && worst_independent <= 1e-8 && elapsed < Duration::from_secs(60),
        format!(
            "{} matrices: BF {worst_bf:.2e}, PF rows {worst_pf:.2e}, recomputed Gaussian BF {worst_independent:.2e} in {elapsed:.2?}",
            matrices.len()
        ),
    )
}

fn convergence(s: &Suite) -> Check {
    let start = Instant::now();
    let report = convergence_study(&s.table, &s.square, &DEFAULT_RS, PfMethod::DoubleSum, DEFAULT_MATRIX_CAP)
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let residual = |r: i64| {
        let row = report.rows.iter().find(|x| x.r == r).unwrap();
        (row.pf_over_r - report.reference).abs()
    };
    let (r8, r32) = (residual(8), residual(32));
    let limit_error = report.limit_error.unwrap_or(f64::INFINITY);
    ensure(
        r32 < r8 && limit_error <= 0.02 && elapsed < Duration::from_secs(300),
        format!(
            "BF/A {:.10}, residual R=8 {r8:.3e}, R=32 {r32:.3e}, limit {:.10} (relative error {limit_error:.2e}) in {elapsed:.2?}",
            report.reference,
            report.extrapolated_limit.unwrap_or(f64::NAN)
        ),
    )
}

fn strip_chain(s: &Suite) -> Check {
    let z2 = s.table.as_z2();
    let mut lines = Vec::new();
    let mut ok = true;
    for (m, n) in [(0i64, 1i64), (1, 2), (1, 1), (2, 3)] {
        let geo = strip_geometric_form(&z2, m, n).map_err(|e| e.to_string())?;
        let r8 = (strip_finite_r_sum(&z2, m, n, 8).map_err(|e| e.to_string())? - geo).abs();
        let r64 = (strip_finite_r_sum(&z2, m, n, 64).map_err(|e| e.to_string())? - geo).abs();
        // triangle whose edge (n, m) -> (0, 0) has the line's upper side outside
        let tri = LatticeDomain::from_vertices(&[[0, 0], [n, m - 1], [n, m]], &[], Lattice2D::integer())
            .map_err(|e| e.to_string())?;
        let seg = bf(&z2, &tri)
            .map_err(|e| e.to_string())?
            .per_segment
            .into_iter()
            .find(|c| c.start == LatticePoint::new(n, m) && c.end == LatticePoint::ORIGIN)
            .ok_or("segment not found")?;
        let d = (seg.contribution - geo).abs();
        ok &= r64 < r8 && d <= 1e-12;
        lines.push(format!("({m},{n}): residual {r8:.2e} -> {r64:.2e}, segment diff {d:.1e}"));
    }
    ensure(ok, lines.join("; "))
}

fn eigenvalue_count_check(s: &Suite) -> Check {
    let c = eigenvalue_count(&s.table, &s.square, 24, 0.5, DEFAULT_MATRIX_CAP).map_err(|e| e.to_string())?;
    let area = s.square.area();
    let err = (c.ratio - area).abs() / area;
    ensure(err <= 0.10, format!("N = {}, N/R^2 = {:.4}, area {area:.4}, relative error {err:.3}", c.count, c.ratio))
}

fn covariance(s: &Suite) -> Check {
    let matrices = SL2Matrix::random_batch(100, 5, 0.5);
    let grid = SamplingGrid::default();
    let (gw, gl) = gaussian();
    let mut out = Vec::new();
    let mut ok = true;
    for (name, window, lattice) in [("Gaussian", &gw, &gl), ("painless", &s.window, &s.lattice)] {
        let pts = nearest_points(lattice, 25);
        let mut worst: f64 = 0.0;
        for a in &matrices {
            let r = verify_covariance(window, a, &pts, &grid).map_err(|e| e.to_string())?;
            worst = worst.max(r.max_modulus_deviation);
        }
        ok &= worst <= 1e-6;
        out.push(format!("{name} {worst:.2e}"));
    }
    ensure(ok, format!("max modulus deviation over {} matrices x 25 points: {}", matrices.len(), out.join(", ")))
}

fn determinism(dir: &Path) -> Check {
    let config = serde_json::json!({
        "window": {"variant": "painless", "a": FRAC_1_SQRT_2, "b": FRAC_1_SQRT_2, "support": SQRT_2, "ramp": SQRT_2 - FRAC_1_SQRT_2},
        "lattice": [[FRAC_1_SQRT_2, 0.0], [0.0, FRAC_1_SQRT_2]],
        "rs": DEFAULT_RS,
    });
    let path = dir.join("suite.json");
    std::fs::write(&path, config.to_string()).map_err(|e| e.to_string())?;
    let mut outputs: Vec<Vec<Vec<u8>>> = Vec::new();
    for threads in [1, 4, 8] {
        let out = dir.join(format!("threads{threads}"));
        let inv = Invocation {
            command: Command::Converge,
            config: Some(path.clone()),
            overrides: Overrides { out: Some(out.clone()), ..Overrides::default() },
        };
        let outcome = run(&inv, Some(threads)).map_err(|e| e.to_string())?;
        if !outcome.passed {
            return Err(format!("converge run with {threads} threads failed its own checks"));
        }
        let files = ["converge.csv", "converge.json", "converge.svg"]
            .iter()
            .map(|f| std::fs::read(out.join(f)).map_err(|e| e.to_string()))
            .collect::<Result<Vec<_>, _>>()?;
        outputs.push(files);
    }
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    ensure(same, format!("converge csv, json and svg at 1, 4 and 8 threads {}", if same { "identical" } else { "differ" }))
}

fn main() {
    let start = Instant::now();
    let suite = Suite::new();
    let dir = tempfile::tempdir().expect("temporary directory");
    let checks: Vec<NamedCheck> = vec![
        ("tightness", Box::new(|| tightness(&suite))),
        ("norm law", Box::new(norm_law)),
        ("frame identity", Box::new(|| frame_identity(&suite))),
        ("finite-set PF oracle", Box::new(|| finite_set_oracle(&suite))),
        ("single-point PF", Box::new(|| single_point(&suite))),
        ("lattice slopes", Box::new(slopes)),
        ("geometric atom", Box::new(geometric_atoms)),
        ("symplectic invariance", Box::new(|| invariance(&suite))),
        ("PF/R convergence", Box::new(|| convergence(&suite))),
        ("strip chain", Box::new(|| strip_chain(&suite))),
        ("eigenvalue count", Box::new(|| eigenvalue_count_check(&suite))),
        ("metaplectic covariance", Box::new(|| covariance(&suite))),
        ("thread determinism", Box::new(|| determinism(dir.path()))),
    ];
    let mut failed = 0;
    for (name, check) in &checks {
        let t = Instant::now();
        let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        let took = t.elapsed();
        match result {
            Ok(detail) => println!("PASS {name}: {detail} [{took:.2?}]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail} [{took:.2?}]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed in {:.2?}", checks.len() - failed, start.elapsed());
    if failed > 0 {
        std::process::exit(1);
    }
}
