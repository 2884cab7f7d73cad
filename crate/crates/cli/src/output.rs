use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use gabor_core::asymptotics::ConvergenceReport;
use serde::Serialize;

use crate::CliError;

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
    text.push('\n');
    std::fs::write(&path, text)?;
    Ok(path)
}

/// Writes a CSV file with the given header; fields are written with `Display`.
pub fn write_csv(dir: &Path, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::Output(e.to_string()))?;
    w.write_record(header).map_err(|e| CliError::Output(e.to_string()))?;
    for row in rows {
        w.write_record(row).map_err(|e| CliError::Output(e.to_string()))?;
    }
    w.flush()?;
    Ok(path)
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 60.0;

/// Line chart of `PF/R` against `1/R` with the boundary-form reference as a
/// horizontal line and the extrapolated limit marked on the `1/R = 0` axis.
pub fn convergence_svg(report: &ConvergenceReport) -> String {
    let pts: Vec<(f64, f64)> = report.rows.iter().map(|r| (1.0 / r.r as f64, r.pf_over_r)).collect();
    let mut ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    ys.push(report.reference);
    if let Some(c0) = report.extrapolated_limit {
        ys.push(c0);
    }
    let (mut y0, mut y1) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
    if !(y1 > y0) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let pad = 0.05 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let x1 = pts.iter().map(|p| p.0).fold(0.0, f64::max).max(1e-12) * 1.05;
    let sx = |x: f64| MARGIN + x / x1 * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (ax0, ay0, ax1, ay1) = (sx(0.0), sy(y0), sx(x1), sy(y1));
    let _ = writeln!(s, r#"<line x1="{ax0:.2}" y1="{ay0:.2}" x2="{ax1:.2}" y2="{ay0:.2}" stroke="black"/>"#);
    let _ = writeln!(s, r#"<line x1="{ax0:.2}" y1="{ay0:.2}" x2="{ax0:.2}" y2="{ay1:.2}" stroke="black"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="14" text-anchor="middle">1/R</text>"#,
        0.5 * (ax0 + ax1),
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{:.2}" font-size="14" transform="rotate(-90 15 {:.2})" text-anchor="middle">PF/R</text>"#,
        0.5 * (ay0 + ay1),
        0.5 * (ay0 + ay1)
    );
    for (v, anchor) in [(y0, "end"), (y1, "end")] {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="{anchor}">{v:.5}</text>"#,
            ax0 - 4.0,
            sy(v) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{x1:.4}</text>"#,
        ax1,
        ay0 + 16.0
    );
    let yr = sy(report.reference);
    let _ = writeln!(
        s,
        r#"<line x1="{ax0:.2}" y1="{yr:.2}" x2="{ax1:.2}" y2="{yr:.2}" stroke="gray" stroke-dasharray="6 4"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end" fill="gray">BF/A = {:.6}</text>"#,
        ax1,
        yr - 6.0,
        report.reference
    );
    let poly: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
    let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#, poly.join(" "));
    for &(x, y) in &pts {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#, sx(x), sy(y));
    }
    if let Some(c0) = report.extrapolated_limit {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="none" stroke="crimson"/>"#, sx(0.0), sy(c0));
    }
    s.push_str("</svg>\n");
    s
}
