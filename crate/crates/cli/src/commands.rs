use std::path::{Path, PathBuf};

use gabor_core::asymptotics::{convergence_study, transported_pair, ConvergenceReport};
use gabor_core::boundary::{bf, half_lattice_sum, slope_profile, BFResult};
use gabor_core::domain::{LatticeDomain, LatticeRegion};
use gabor_core::lattice::{Lattice2D, SL2Matrix};
use gabor_core::localization::{pf_double_sum, pf_eigen, PfMethod};
use gabor_core::metaplectic::{mu_apply_gaussian, nearest_points, verify_covariance};
use gabor_core::numeric::compensated_sum;
use gabor_core::window::{
    canonical_tight, condition_phi_sum, kernel_table_with, verify_tightness, KernelTable, TableOptions,
    TightnessReport, Window, WindowKind,
};
use serde::Serialize;

use crate::config::{LoadedConfig, MethodChoice, Overrides, RunConfig};
use crate::output::{convergence_svg, write_csv, write_json};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    FrameVerify,
    Pf,
    Bf,
    Converge,
    Invariance,
    Slopes { m: i64, n: i64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub command: Command,
    pub config: Option<PathBuf>,
    pub overrides: Overrides,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub files: Vec<PathBuf>,
    /// Human-readable lines for stdout.
    pub messages: Vec<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            crate::EXIT_OK
        } else {
            crate::EXIT_TOLERANCE
        }
    }
}

/// Runs an invocation, inside a rayon pool of `threads` workers if given.
pub fn run(inv: &Invocation, threads: Option<usize>) -> Result<Outcome, CliError> {
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Input(format!("cannot start {n} worker threads: {e}")))?;
            pool.install(|| dispatch(inv))
        }
        None => dispatch(inv),
    }
}

fn dispatch(inv: &Invocation) -> Result<Outcome, CliError> {
    if let Command::Slopes { m, n } = inv.command {
        return slopes(m, n);
    }
    let path = inv.config.as_ref().ok_or_else(|| CliError::Input("--config is required".into()))?;
    let mut loaded = LoadedConfig::load(path)?;
    apply_overrides(&mut loaded.config, &inv.overrides, inv.command);
    loaded.config.validate()?;
    let setup = Setup::new(&loaded)?;
    match inv.command {
        Command::FrameVerify => frame_verify(&setup),
        Command::Pf => pf(&setup),
        Command::Bf => bf_cmd(&setup),
        Command::Converge => converge(&setup),
        Command::Invariance => invariance(&setup),
        Command::Slopes { .. } => unreachable!(),
    }
}

fn apply_overrides(cfg: &mut RunConfig, ov: &Overrides, command: Command) {
    if let Some(out) = &ov.out {
        cfg.out = out.clone();
    }
    if let Some(m) = ov.method {
        cfg.method = m;
    }
    if let Some(r) = ov.radius {
        cfg.max_radius = r;
    }
    if let Some(rs) = &ov.rs {
        cfg.rs = rs.clone();
    }
    if let Some(tol) = ov.tol {
        let t = &mut cfg.tolerances;
        match command {
            Command::FrameVerify => t.tightness = tol,
            Command::Pf => t.method_agreement = tol,
            Command::Bf => t.kernel = tol,
            Command::Converge => t.limit = tol,
            Command::Invariance => t.invariance = tol,
            Command::Slopes { .. } => {}
        }
    }
}

/// Window, lattice, domain and output directory of a run; the kernel table is built on demand.
struct Setup {
    config: RunConfig,
    window: Window,
    lattice: Lattice2D,
    domain: LatticeDomain,
    out: PathBuf,
}

impl Setup {
    fn new(loaded: &LoadedConfig) -> Result<Self, CliError> {
        let config = loaded.config.clone();
        let lattice = config.lattice.clone();
        let mut window = config.window.build()?;
        if let Some(grid) = &config.tighten {
            window = canonical_tight(&window, &lattice, grid)?;
        }
        let domain = match loaded.domain_path() {
            Some(p) => {
                if !p.exists() {
                    return Err(CliError::Input(format!("domain file {} does not exist", p.display())));
                }
                let d = LatticeDomain::load(&p)?;
                if !d.lattice().approx_eq(&lattice, 1e-12) {
                    return Err(CliError::Input("domain lattice differs from the configured lattice".into()));
                }
                d
            }
            None => LatticeDomain::square(1, lattice.clone())?,
        };
        let out = config.out.clone();
        Ok(Setup { config, window, lattice, domain, out })
    }

    fn table_options(&self) -> TableOptions {
        TableOptions { tol: self.config.tolerances.kernel, initial_radius: None, max_radius: self.config.max_radius }
    }

    fn table(&self) -> Result<KernelTable, CliError> {
        Ok(kernel_table_with(&self.window, &self.lattice, &self.table_options())?)
    }

    fn out_dir(&self) -> &Path {
        &self.out
    }
}

#[derive(Serialize)]
struct FrameReport<'a> {
    window: &'a str,
    lattice_area: f64,
    norm_sq: f64,
    norm_law_deviation: f64,
    tightness: TightnessReport,
    kernel_sum: f64,
    frame_identity_deviation: f64,
    condition_phi_sum: f64,
    kernel_radius: f64,
    kernel_entries: usize,
    passed: bool,
}

fn frame_verify(s: &Setup) -> Result<Outcome, CliError> {
    let tol = &s.config.tolerances;
    let tightness = verify_tightness(&s.window, &s.lattice, s.config.tightness_tests, 1)?;
    let table = s.table()?;
    let norm_sq = s.window.norm_sq();
    let norm_law_deviation = (norm_sq - s.lattice.area()).abs();
    let kernel_sum = table.sum();
    let frame_identity_deviation = (kernel_sum - norm_sq).abs();
    let phi = condition_phi_sum(&table);
    let passed = tightness.max_relative_deviation <= tol.tightness
        && norm_law_deviation <= tol.norm
        && frame_identity_deviation <= tol.frame_identity
        && phi.is_finite();
    let messages = vec![
        format!("tightness deviation {:e} (tol {:e})", tightness.max_relative_deviation, tol.tightness),
        format!("norm law deviation {norm_law_deviation:e} (tol {:e})", tol.norm),
        format!("frame identity deviation {frame_identity_deviation:e} (tol {:e})", tol.frame_identity),
        format!("condition Phi sum {phi}"),
    ];
    let report = FrameReport {
        window: s.window.variant_name(),
        lattice_area: s.lattice.area(),
        norm_sq,
        norm_law_deviation,
        tightness,
        kernel_sum,
        frame_identity_deviation,
        condition_phi_sum: phi,
        kernel_radius: table.radius(),
        kernel_entries: table.len(),
        passed,
    };
    let file = write_json(s.out_dir(), "frame_verify.json", &report)?;
    Ok(Outcome { passed, files: vec![file], messages })
}

fn pf(s: &Setup) -> Result<Outcome, CliError> {
    let table = s.table()?;
    let tol = s.config.tolerances.method_agreement;
    let mut rs = s.config.rs.clone();
    rs.sort_unstable();
    rs.dedup();
    let mut rows = Vec::new();
    let mut messages = Vec::new();
    let mut passed = true;
    for &r in &rs {
        let region = s.domain.dilate_integer(r);
        let want_double = s.config.method != MethodChoice::Eigen;
        let want_eigen = match s.config.method {
            MethodChoice::Eigen => true,
            MethodChoice::Both => region.lattice_points().len() <= s.config.matrix_cap,
            MethodChoice::DoubleSum => false,
        };
        let mut values = Vec::new();
        if want_double {
            values.push(pf_double_sum(&table, &region, None)?);
        }
        if want_eigen {
            values.push(pf_eigen(&table, &region, s.config.matrix_cap)?.pf);
        }
        for v in &values {
            rows.push(vec![
                r.to_string(),
                v.method.name().to_string(),
                v.value.to_string(),
                (v.value / r as f64).to_string(),
                v.truncation_error.to_string(),
            ]);
        }
        if let [a, b] = values.as_slice() {
            let diff = (a.value - b.value).abs();
            if diff > tol * a.value.abs().max(1.0) {
                passed = false;
                messages.push(format!("R = {r}: methods differ by {diff:e} (tol {tol:e})"));
            }
        }
    }
    let file = write_csv(s.out_dir(), "pf.csv", &["R", "method", "pf", "pf_over_R", "trunc_err"], &rows)?;
    messages.push(format!("{} rows", rows.len()));
    Ok(Outcome { passed, files: vec![file], messages })
}

#[derive(Serialize)]
struct BfReport<'a> {
    bf: f64,
    lattice_area: f64,
    bf_over_area: f64,
    truncation_error: f64,
    per_segment: &'a [gabor_core::boundary::SegmentContribution],
}

fn bf_cmd(s: &Setup) -> Result<Outcome, CliError> {
    let table = s.table()?;
    let r: BFResult = bf(&table, &s.domain)?;
    let area = s.lattice.area();
    let report = BfReport {
        bf: r.value,
        lattice_area: area,
        bf_over_area: r.value / area,
        truncation_error: r.truncation_error,
        per_segment: &r.per_segment,
    };
    let json = write_json(s.out_dir(), "bf.json", &report)?;
    let rows: Vec<Vec<String>> = r
        .per_segment
        .iter()
        .map(|c| {
            vec![
                c.index.to_string(),
                c.cycle.to_string(),
                c.start.k.to_string(),
                c.start.l.to_string(),
                c.end.k.to_string(),
                c.end.l.to_string(),
                c.length.to_string(),
                c.outer_normal[0].to_string(),
                c.outer_normal[1].to_string(),
                c.directional_sum.to_string(),
                c.contribution.to_string(),
            ]
        })
        .collect();
    let csv = write_csv(
        s.out_dir(),
        "bf.csv",
        &[
            "segment", "cycle", "start_k", "start_l", "end_k", "end_l", "length", "normal_x", "normal_y",
            "directional_sum", "contribution",
        ],
        &rows,
    )?;
    let messages = vec![format!("BF = {}, BF/A = {}", r.value, r.value / area)];
    Ok(Outcome { passed: true, files: vec![json, csv], messages })
}

fn study_method(choice: MethodChoice) -> PfMethod {
    match choice {
        MethodChoice::Eigen => PfMethod::Eigen,
        _ => PfMethod::DoubleSum,
    }
}

fn converge(s: &Setup) -> Result<Outcome, CliError> {
    let table = s.table()?;
    let report: ConvergenceReport =
        convergence_study(&table, &s.domain, &s.config.rs, study_method(s.config.method), s.config.matrix_cap)?;
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| vec![r.r.to_string(), r.pf.to_string(), r.pf_over_r.to_string(), r.truncation_error.to_string()])
        .collect();
    let csv = write_csv(s.out_dir(), "converge.csv", &["R", "pf", "pf_over_R", "trunc_err"], &rows)?;
    let json = write_json(s.out_dir(), "converge.json", &report)?;
    let svg_path = s.out_dir().join("converge.svg");
    std::fs::write(&svg_path, convergence_svg(&report))?;
    let mut messages = vec![format!("reference BF/A = {}", report.reference)];
    let passed = match (report.extrapolated_limit, report.limit_error) {
        (Some(c0), Some(err)) => {
            messages.push(format!("extrapolated limit {c0} (relative error {err:e}, tol {:e})", s.config.tolerances.limit));
            err <= s.config.tolerances.limit
        }
        _ => {
            messages.push("warning: fewer than two R values in the fit, no extrapolation".into());
            true
        }
    };
    Ok(Outcome { passed, files: vec![csv, json, svg_path], messages })
}

#[derive(Debug, Clone, Serialize)]
struct MatrixCheck {
    matrix: SL2Matrix,
    bf: f64,
    bf_relative_difference: f64,
    /// Boundary form from a kernel recomputed for the transformed Gaussian window.
    independent_bf_relative_difference: Option<f64>,
    pf_max_difference: Option<f64>,
    covariance_deviation: f64,
    passed: bool,
}

#[derive(Serialize)]
struct InvarianceReport {
    bf: f64,
    tolerance: f64,
    covariance_tolerance: f64,
    checks: Vec<MatrixCheck>,
    passed: bool,
}

/// `sum_i length_i * half_lattice_sum(normal_i)` with the normals taken from `normals_from`.
fn bf_with_normals(table: &KernelTable, domain: &LatticeDomain, normals_from: &LatticeDomain) -> Result<f64, CliError> {
    let segs = domain.boundary_segments();
    let normals = normals_from.boundary_segments();
    let mut terms = Vec::with_capacity(segs.len());
    for (s, n) in segs.iter().zip(&normals) {
        terms.push(s.length * half_lattice_sum(table, n.outer_normal)?);
    }
    Ok(compensated_sum(terms))
}

fn invariance(s: &Setup) -> Result<Outcome, CliError> {
    let cfg = &s.config.invariance;
    let tol = s.config.tolerances.invariance;
    let cov_tol = s.config.tolerances.covariance;
    let table = s.table()?;
    let base = bf(&table, &s.domain)?.value;
    let base_pf: Option<Vec<f64>> = if table.is_tight() {
        let mut v = Vec::new();
        for &r in &cfg.rs {
            v.push(pf_double_sum(&table, &s.domain.dilate_integer(r), None)?.value);
        }
        Some(v)
    } else {
        None
    };
    let points = nearest_points(&s.lattice, cfg.covariance_points);
    let mut matrices = cfg.matrices.clone();
    matrices.extend(SL2Matrix::random_batch(cfg.random, cfg.seed, cfg.max_log_stretch));

    let mut checks = Vec::with_capacity(matrices.len());
    for a in matrices {
        let (t2, d2) = transported_pair(&table, &s.domain, &a);
        let bf2 = if cfg.inject_fault { bf_with_normals(&t2, &d2, &s.domain)? } else { bf(&t2, &d2)?.value };
        let rel = |x: f64| if base == 0.0 { x.abs() } else { (x - base).abs() / base };
        let bf_relative_difference = rel(bf2);
        let independent_bf_relative_difference = match s.window.kind() {
            WindowKind::Gaussian(g) => {
                let moved = mu_apply_gaussian(&a, g)?;
                let t3 = kernel_table_with(&moved, t2.lattice(), &s.table_options())?;
                Some(rel(bf(&t3, &d2)?.value))
            }
            _ => None,
        };
        let pf_max_difference = match &base_pf {
            Some(base_rows) => {
                let mut worst: f64 = 0.0;
                for (&r, &p) in cfg.rs.iter().zip(base_rows) {
                    let q = pf_double_sum(&t2, &d2.dilate_integer(r), None)?.value;
                    worst = worst.max((p - q).abs() / (1.0 + p.abs()));
                }
                Some(worst)
            }
            None => None,
        };
        let covariance_deviation = verify_covariance(&s.window, &a, &points, &cfg.grid)?.max_modulus_deviation;
        let passed = bf_relative_difference <= tol
            && independent_bf_relative_difference.is_none_or(|d| d <= tol)
            && pf_max_difference.is_none_or(|d| d <= tol)
            && covariance_deviation <= cov_tol;
        checks.push(MatrixCheck {
            matrix: a,
            bf: bf2,
            bf_relative_difference,
            independent_bf_relative_difference,
            pf_max_difference,
            covariance_deviation,
            passed,
        });
    }
    let passed = checks.iter().all(|c| c.passed);
    let failed = checks.iter().filter(|c| !c.passed).count();
    let messages = vec![format!("{} matrices checked, {failed} failed", checks.len())];
    let report = InvarianceReport { bf: base, tolerance: tol, covariance_tolerance: cov_tol, checks, passed };
    let file = write_json(s.out_dir(), "invariance.json", &report)?;
    Ok(Outcome { passed, files: vec![file], messages })
}

fn slopes(m: i64, n: i64) -> Result<Outcome, CliError> {
    let p = slope_profile(m, n)?;
    let mut lines = vec![format!("R_t(s) for m = {m}, n = {n} (rows t, columns s)")];
    let header: Vec<String> = (0..n).map(|s| format!("{s:>4}")).collect();
    lines.push(format!("{:>4} |{}", "t", header.join("")));
    for (t, row) in p.values.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:>4}")).collect();
        lines.push(format!("{t:>4} |{}", cells.join("")));
    }
    for t in 0..n as usize {
        let seen: Vec<String> = p.frequencies(t).iter().map(|(v, c)| format!("{v} x{c}")).collect();
        lines.push(format!("t = {t}: {}", seen.join(", ")));
    }
    Ok(Outcome { passed: true, files: Vec::new(), messages: lines })
}
