//! CSV tables, a JSON result summary and an SVG convergence plot.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::experiment::Outcome;
use super::CliError;
use crate::optimizer::{AggregatePoint, IterRecord, RunRecord};

pub const RUN_HEADER: &str = "iter,objective,penalty,error,lr";
pub const SUMMARY_HEADER: &str = "iter,median,q1,q3";

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Floats use the shortest representation that parses back to the same value.
pub fn run_csv(rec: &RunRecord) -> String {
    let mut s = String::from(RUN_HEADER);
    s.push('\n');
    for r in &rec.iterations {
        let _ = writeln!(s, "{},{},{},{},{}", r.iter, r.objective, r.penalty, opt(r.error), r.lr);
    }
    s
}

pub fn parse_run_csv(text: &str) -> Result<Vec<IterRecord>, CliError> {
    let mut lines = text.lines();
    if lines.next() != Some(RUN_HEADER) {
        return Err(CliError::Config("unexpected run CSV header".into()));
    }
    let num = |f: &str| f.parse::<f64>().map_err(|e| CliError::Config(format!("bad number {f:?}: {e}")));
    lines
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(CliError::Config(format!("bad row {line:?}")));
            }
            Ok(IterRecord {
                iter: f[0].parse().map_err(|e| CliError::Config(format!("bad iteration {:?}: {e}", f[0])))?,
                objective: num(f[1])?,
                penalty: num(f[2])?,
                error: if f[3].is_empty() { None } else { Some(num(f[3])?) },
                lr: num(f[4])?,
                scalars: Vec::new(),
            })
        })
        .collect()
}

pub fn summary_csv(summary: &[AggregatePoint]) -> String {
    let mut s = String::from(SUMMARY_HEADER);
    s.push('\n');
    for p in summary {
        let _ = writeln!(s, "{},{},{},{}", p.iter, p.median, p.q1, p.q3);
    }
    s
}

/// Median line, interquartile band and a dashed line at the ground truth.
pub fn emit_plot(summary: &[AggregatePoint], oracle: Option<f64>, title: &str) -> Result<String, CliError> {
    if summary.is_empty() {
        return Err(CliError::Config("nothing to plot".into()));
    }
    let (w, h, m) = (720.0, 440.0, 60.0);
    let x_max = summary.last().unwrap().iter.max(1) as f64;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in summary {
        for v in [p.median, p.q1, p.q3] {
            if v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    if let Some(o) = oracle {
        lo = lo.min(o);
        hi = hi.max(o);
    }
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(CliError::Config("no finite values to plot".into()));
    }
    let pad = ((hi - lo) * 0.05).max(1e-6);
    let (lo, hi) = (lo - pad, hi + pad);
    let sx = |x: f64| m + (w - 2.0 * m) * x / x_max;
    let sy = |y: f64| h - m - (h - 2.0 * m) * (y - lo) / (hi - lo);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{m}" y="{m}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * m,
        h - 2.0 * m
    );
    let mut band: Vec<String> = summary.iter().map(|p| format!("{:.2},{:.2}", sx(p.iter as f64), sy(p.q3))).collect();
    band.extend(summary.iter().rev().map(|p| format!("{:.2},{:.2}", sx(p.iter as f64), sy(p.q1))));
    let _ = writeln!(s, r#"<polygon points="{}" fill="steelblue" fill-opacity="0.25" stroke="none"/>"#, band.join(" "));
    let line: Vec<String> = summary.iter().map(|p| format!("{:.2},{:.2}", sx(p.iter as f64), sy(p.median))).collect();
    let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#, line.join(" "));
    if let Some(o) = oracle {
        let _ = writeln!(
            s,
            r#"<line class="oracle" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-dasharray="6,4"/>"#,
            sx(0.0),
            sy(o),
            sx(x_max),
            sy(o)
        );
    }
    let _ = writeln!(s, r#"<text x="{m}" y="{}" font-size="14">{title}</text>"#, m - 15.0);
    let _ = writeln!(s, r#"<text x="{m}" y="{}" font-size="11">0</text>"#, h - m + 16.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{x_max}</text>"#, w - m, h - m + 16.0);
    let _ = writeln!(s, r#"<text x="{}" y="{:.2}" font-size="11" text-anchor="end">{:.4}</text>"#, m - 4.0, sy(hi), hi);
    let _ = writeln!(s, r#"<text x="{}" y="{:.2}" font-size="11" text-anchor="end">{:.4}</text>"#, m - 4.0, sy(lo), lo);
    s.push_str("</svg>\n");
    Ok(s)
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// `run_<k>.csv`, `summary.csv`, `convergence.svg` and `result.json` in `dir`.
pub fn write_outcome(dir: &Path, out: &Outcome) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    for (k, rec) in out.records.iter().enumerate() {
        write(&dir.join(format!("run_{k}.csv")), &run_csv(rec))?;
    }
    write(&dir.join("summary.csv"), &summary_csv(&out.summary))?;
    let title = format!("{} ({})", out.config.problem, out.config.ansatz.kind_name());
    write(&dir.join("convergence.svg"), &emit_plot(&out.summary, Some(out.oracle.value), &title)?)?;
    let result = serde_json::json!({
        "config": out.config,
        "oracle": out.oracle,
        "final_objectives": out.final_objectives(),
        "final_errors": out.final_errors(),
        "median_final_error": out.median_final_error(),
        "aborted": out.records.iter().enumerate()
            .filter_map(|(k, r)| r.aborted.as_ref().map(|m| serde_json::json!({"run": k, "reason": m})))
            .collect::<Vec<_>>(),
    });
    let text = serde_json::to_string_pretty(&result).map_err(|e| CliError::Io(e.to_string()))?;
    write(&dir.join("result.json"), &text)
}
