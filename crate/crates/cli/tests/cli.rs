use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gabor_cli::{EXIT_INPUT, EXIT_OK, EXIT_TOLERANCE};

const PAINLESS: &str = r#"{
    "window": {"variant": "painless", "a": 0.7071067811865475, "b": 0.7071067811865475,
               "support": 1.4142135623730951, "ramp": 0.7071067811865477},
    "lattice": [[0.7071067811865475, 0.0], [0.0, 0.7071067811865475]],
    "rs": [4, 8]
}"#;

const GAUSSIAN: &str = r#"{
    "window": {"variant": "gaussian", "w": [0.0, 1.0]},
    "lattice": [[0.5, 0.0], [0.0, 0.5]],
    "rs": [2, 4],
    "invariance": {"random": 3, "rs": [2]}
}"#;

fn gabor_bf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gabor-bf")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn run_cmd(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    gabor_bf(&args)
}

#[test]
fn slopes_prints_profile_and_rejects_common_factors() {
    let ok = gabor_bf(&["slopes", "2", "3"]);
    assert_eq!(code(&ok), EXIT_OK);
    let text = String::from_utf8(ok.stdout).unwrap();
    assert!(text.contains("t = 2: 2 x2, 3 x1"), "{text}");
    assert_eq!(code(&gabor_bf(&["slopes", "2", "4"])), EXIT_INPUT);
    assert_eq!(code(&gabor_bf(&["slopes", "5", "3"])), EXIT_INPUT);
}

#[test]
fn bad_inputs_exit_with_input_code() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.json");
    assert_eq!(code(&run_cmd("bf", &missing, dir.path(), &[])), EXIT_INPUT);
    let unknown = write_config(dir.path(), "unknown.json", &PAINLESS.replace("\"rs\"", "\"rz\""));
    assert_eq!(code(&run_cmd("bf", &unknown, dir.path(), &[])), EXIT_INPUT);
    let cfg = write_config(dir.path(), "ok.json", PAINLESS);
    assert_eq!(code(&run_cmd("pf", &cfg, dir.path(), &["--Rs", "0,4"])), EXIT_INPUT);
    assert_eq!(code(&run_cmd("pf", &cfg, dir.path(), &["--method", "magic"])), EXIT_INPUT);
    let threads = Command::new(env!("CARGO_BIN_EXE_gabor-bf"))
        .args(["bf", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()])
        .env("GABOR_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&threads), EXIT_INPUT);
    let no_domain = write_config(
        dir.path(),
        "nodomain.json",
        &PAINLESS.replace("\"rs\"", "\"domain\": \"nowhere.json\", \"rs\""),
    );
    assert_eq!(code(&run_cmd("bf", &no_domain, dir.path(), &[])), EXIT_INPUT);
}

#[test]
fn square_boundary_form_is_symmetric() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", PAINLESS);
    let out = dir.path().join("out");
    let o = run_cmd("bf", &cfg, &out, &[]);
    assert_eq!(code(&o), EXIT_OK, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("bf.json")).unwrap()).unwrap();
    let segs = v["per_segment"].as_array().unwrap();
    assert_eq!(segs.len(), 4);
    // opposite sides agree; the window is not Fourier symmetric, so adjacent sides need not
    let c = |i: usize| segs[i]["contribution"].as_f64().unwrap();
    assert!((c(0) - c(2)).abs() < 1e-14 && (c(1) - c(3)).abs() < 1e-14);
    assert!((v["bf_over_area"].as_f64().unwrap() - 0.33450345315174).abs() < 1e-9);
    let csv = std::fs::read_to_string(out.join("bf.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn pf_writes_one_row_per_r_and_method() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", PAINLESS);
    let o = run_cmd("pf", &cfg, dir.path(), &["--Rs", "2,3"]);
    assert_eq!(code(&o), EXIT_OK);
    let csv = std::fs::read_to_string(dir.path().join("pf.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "R,method,pf,pf_over_R,trunc_err");
    assert_eq!(lines.len(), 5);
}

#[test]
fn gaussian_is_not_tight_on_a_dense_lattice() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "g.json", GAUSSIAN);
    assert_eq!(code(&run_cmd("frame-verify", &cfg, dir.path(), &[])), EXIT_TOLERANCE);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("frame_verify.json")).unwrap()).unwrap();
    assert!(report.is_object());
}

#[test]
fn invariance_checker_catches_untransported_normals() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_config(dir.path(), "good.json", GAUSSIAN);
    let o = run_cmd("invariance", &good, &dir.path().join("good"), &[]);
    assert_eq!(code(&o), EXIT_OK, "{}", String::from_utf8_lossy(&o.stdout));
    let faulty = write_config(
        dir.path(),
        "bad.json",
        &GAUSSIAN.replace("\"random\": 3", "\"random\": 3, \"inject_fault\": true"),
    );
    let o = run_cmd("invariance", &faulty, &dir.path().join("bad"), &[]);
    assert_eq!(code(&o), EXIT_TOLERANCE, "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn converge_writes_table_summary_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", PAINLESS);
    let o = run_cmd("converge", &cfg, dir.path(), &["--Rs", "4,8,16"]);
    assert_eq!(code(&o), EXIT_OK, "{}", String::from_utf8_lossy(&o.stdout));
    for f in ["converge.csv", "converge.json", "converge.svg"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    // an absurdly tight limit tolerance turns the same run into a tolerance failure
    let o = run_cmd("converge", &cfg, dir.path(), &["--Rs", "4,8,16", "--tol", "1e-12"]);
    assert_eq!(code(&o), EXIT_TOLERANCE);
}
