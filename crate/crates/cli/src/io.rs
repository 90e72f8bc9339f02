//! CSV/JSON serialization of experiment outputs. Floats are written with
//! 17 significant digits so files round-trip exactly and identical
//! (config, seed) pairs produce bit-identical output.

use std::fmt::Write as _;
use std::path::Path;

use vlp_core::CoverageReport;

use crate::experiments::{ConvergenceRow, CoverageRow, LocalizeOutput, PathRow};

pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn path_csv(rows: &[PathRow]) -> String {
    let mut out = String::from(
        "sweep_value,x,y,z,rmse_aoa,rmse_weighted_aoa,rmse_rss_aoa,rmse_rss_rrc,crlb,rss_aoa_flagged_frac,rss_rrc_flagged_frac\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            fmt_f64(r.sweep_value),
            fmt_f64(r.x),
            fmt_f64(r.y),
            fmt_f64(r.z),
            fmt_f64(r.rmse_aoa),
            fmt_f64(r.rmse_weighted_aoa),
            fmt_f64(r.rmse_rss_aoa),
            fmt_f64(r.rmse_rss_rrc),
            fmt_f64(r.crlb),
            fmt_f64(r.rss_aoa_flagged_frac),
            fmt_f64(r.rss_rrc_flagged_frac),
        );
    }
    out
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("clusters,probability\n");
    for r in rows {
        let _ = writeln!(out, "{},{}", r.clusters, fmt_f64(r.probability));
    }
    out
}

pub fn coverage_csv(rows: &[CoverageRow]) -> String {
    let mut out = String::from("angle_deg,threshold,probability\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_f64(r.angle_deg),
            fmt_f64(r.threshold),
            fmt_f64(r.probability)
        );
    }
    out
}

pub fn crlb_grid_csv(report: &CoverageReport) -> String {
    let mut out = String::from("x,y,z,crlb\n");
    for (p, crlb) in &report.points {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(p.x),
            fmt_f64(p.y),
            fmt_f64(p.z),
            fmt_f64(*crlb)
        );
    }
    out
}

pub fn crlb_summary_json(report: &CoverageReport) -> anyhow::Result<String> {
    let summary: Vec<serde_json::Value> = report
        .probabilities
        .iter()
        .map(|(t, p)| serde_json::json!({ "threshold": t, "probability": p }))
        .collect();
    Ok(serde_json::to_string_pretty(&serde_json::json!({
        "grid_spacing": report.spacing,
        "points": report.points.len(),
        "probabilities": summary,
    }))? + "\n")
}

pub fn localize_json(output: &LocalizeOutput) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(output)? + "\n")
}

pub fn write_output(path: Option<&Path>, content: &str) -> anyhow::Result<()> {
    match path {
        Some(path) => {
            std::fs::write(path, content)?;
        }
        None => {
            use std::io::Write as _;
            // A closed pipe (e.g. `vlp ... | head`) is not an error.
            if let Err(err) = std::io::stdout().write_all(content.as_bytes()) {
                if err.kind() != std::io::ErrorKind::BrokenPipe {
                    return Err(err.into());
                }
            }
        }
    }
    Ok(())
}
