//! Report writers: RFC-4180 CSV (UTF-8, '.' decimal, fixed 17-significant-
//! digit floats), matching JSON documents, and the run manifest. Byte-exact
//! output is part of the tool contract, so every float goes through one
//! formatter and no platform-dependent formatting is used.

use std::fmt::Write as _;

use pqdlab_core::conditions::ConditionReport;
use pqdlab_core::regress::{EivDesignDiagnostics, EstimatorTrace};
use pqdlab_core::slln::ConvergenceReport;
use sha2::{Digest, Sha256};

/// Fixed 17-significant-digit scientific form: `d.dddddddddddddddde±x`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        return String::new();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:.16e}")
}

const CRLF: &str = "\r\n";

fn csv_line(fields: &[String]) -> String {
    let mut line = fields.join(",");
    line.push_str(CRLF);
    line
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let digest = h.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        let _ = write!(out, "{b:02x}");
    }
    out
}

/// JSON string escaping for the hand-rolled writers (reports hold no exotic
/// strings, but be correct anyway).
fn json_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn json_f64(x: f64) -> String {
    if x.is_finite() {
        fmt_f64(x)
    } else if x.is_nan() {
        "null".into()
    } else if x > 0.0 {
        "\"inf\"".into()
    } else {
        "\"-inf\"".into()
    }
}

pub fn condition_csv(rep: &ConditionReport) -> String {
    let mut out = csv_line(&[
        "condition_id".into(),
        "K".into(),
        "partial_sum".into(),
        "tail_estimate".into(),
        "verdict".into(),
    ]);
    for (i, &k) in rep.k_levels.iter().enumerate() {
        out.push_str(&csv_line(&[
            rep.condition.as_str().into(),
            k.to_string(),
            fmt_f64(rep.partial_sums[i]),
            fmt_f64(rep.tail_estimate),
            rep.verdict.as_str().into(),
        ]));
    }
    out
}

pub fn condition_json(rep: &ConditionReport) -> String {
    let rows: Vec<String> = rep
        .k_levels
        .iter()
        .zip(&rep.partial_sums)
        .map(|(k, s)| format!("{{\"K\":{k},\"partial_sum\":{}}}", json_f64(*s)))
        .collect();
    format!(
        "{{\"condition_id\":{},\"tail_estimate\":{},\"verdict\":{},\"p\":{},\"c\":{},\"weights\":{},\"weights_valid\":{},\"partial_sums\":[{}]}}\n",
        json_str(rep.condition.as_str()),
        json_f64(rep.tail_estimate),
        json_str(rep.verdict.as_str()),
        rep.p.map_or("null".into(), json_f64),
        rep.c.map_or("null".into(), json_f64),
        json_str(&rep.weights),
        rep.weights_valid,
        rows.join(",")
    )
}

pub fn convergence_csv(rep: &ConvergenceReport) -> String {
    let mut out = csv_line(&[
        "checkpoint_n".into(),
        "median_sup".into(),
        "p95_sup".into(),
        "decay_ratio".into(),
    ]);
    for i in 0..rep.checkpoints.len() {
        out.push_str(&csv_line(&[
            rep.checkpoints[i].to_string(),
            fmt_f64(rep.median_sup[i]),
            fmt_f64(rep.p95_sup[i]),
            fmt_f64(rep.decay_ratio[i]),
        ]));
    }
    out
}

pub fn convergence_json(rep: &ConvergenceReport) -> String {
    let rows: Vec<String> = (0..rep.checkpoints.len())
        .map(|i| {
            format!(
                "{{\"checkpoint_n\":{},\"median_sup\":{},\"p95_sup\":{},\"decay_ratio\":{}}}",
                rep.checkpoints[i],
                json_f64(rep.median_sup[i]),
                json_f64(rep.p95_sup[i]),
                json_f64(rep.decay_ratio[i])
            )
        })
        .collect();
    format!("{{\"checkpoints\":[{}]}}\n", rows.join(","))
}

pub fn trace_csv(trace: &EstimatorTrace) -> String {
    let mut out = csv_line(&[
        "n".into(),
        "median_abs_err".into(),
        "p95_abs_err".into(),
        "estimator".into(),
        "decay_verdict".into(),
    ]);
    for i in 0..trace.n_grid.len() {
        out.push_str(&csv_line(&[
            trace.n_grid[i].to_string(),
            fmt_f64(trace.median_abs_err[i]),
            fmt_f64(trace.p95_abs_err[i]),
            trace.estimator.as_str().into(),
            trace.decay_verdict.to_string(),
        ]));
    }
    out
}

pub fn trace_json(trace: &EstimatorTrace) -> String {
    let rows: Vec<String> = (0..trace.n_grid.len())
        .map(|i| {
            format!(
                "{{\"n\":{},\"median_abs_err\":{},\"p95_abs_err\":{}}}",
                trace.n_grid[i],
                json_f64(trace.median_abs_err[i]),
                json_f64(trace.p95_abs_err[i])
            )
        })
        .collect();
    format!(
        "{{\"estimator\":{},\"decay_verdict\":{},\"rows\":[{}]}}\n",
        json_str(trace.estimator.as_str()),
        trace.decay_verdict,
        rows.join(",")
    )
}

pub fn design_csv(d: &EivDesignDiagnostics) -> String {
    let mut out = csv_line(&[
        "n".into(),
        "ratio_variance".into(),
        "ratio_mean".into(),
        "variance_ok".into(),
        "mean_ok".into(),
        "xbar_bounded".into(),
    ]);
    for i in 0..d.n_grid.len() {
        out.push_str(&csv_line(&[
            d.n_grid[i].to_string(),
            fmt_f64(d.ratio_variance[i]),
            fmt_f64(d.ratio_mean[i]),
            d.variance_ok.to_string(),
            d.mean_ok.to_string(),
            d.xbar_bounded.to_string(),
        ]));
    }
    out
}

pub fn sample_csv(values: &[f64]) -> String {
    let mut out = csv_line(&["k".into(), "value".into()]);
    for (i, v) in values.iter().enumerate() {
        out.push_str(&csv_line(&[(i + 1).to_string(), fmt_f64(*v)]));
    }
    out
}

pub fn sample_json(values: &[f64]) -> String {
    let vals: Vec<String> = values.iter().map(|v| json_f64(*v)).collect();
    format!("{{\"values\":[{}]}}\n", vals.join(","))
}

/// One row of the dependence diagnostic (empirical Δ̂ grid).
pub struct DeltaRow {
    pub k: usize,
    pub j: usize,
    pub x: f64,
    pub y: f64,
    pub delta_hat: f64,
    pub se: f64,
    pub delta_analytic: Option<f64>,
}

pub fn delta_csv(rows: &[DeltaRow]) -> String {
    let mut out = csv_line(&[
        "k".into(),
        "j".into(),
        "x".into(),
        "y".into(),
        "delta_hat".into(),
        "se".into(),
        "delta_analytic".into(),
    ]);
    for r in rows {
        out.push_str(&csv_line(&[
            r.k.to_string(),
            r.j.to_string(),
            fmt_f64(r.x),
            fmt_f64(r.y),
            fmt_f64(r.delta_hat),
            fmt_f64(r.se),
            r.delta_analytic.map(fmt_f64).unwrap_or_default(),
        ]));
    }
    out
}

/// Manifest: config hash, master seed, tool version and every output file
/// with its content hash. Worker count is deliberately absent; outputs are
/// schedule-independent.
pub fn manifest_json(config_sha: &str, master_seed: u64, outputs: &[(String, String)]) -> String {
    let files: Vec<String> = outputs
        .iter()
        .map(|(path, sha)| format!("{{\"path\":{},\"sha256\":{}}}", json_str(path), json_str(sha)))
        .collect();
    format!(
        "{{\"tool\":\"pqdlab\",\"version\":{},\"config_sha256\":{},\"master_seed\":{},\"outputs\":[{}]}}\n",
        json_str(env!("CARGO_PKG_VERSION")),
        json_str(config_sha),
        master_seed,
        files.join(",")
    )
}
