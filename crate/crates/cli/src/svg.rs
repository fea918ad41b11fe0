//! Minimal static SVG plots: a log-log polyline with decade ticks, written
//! by hand so plot output carries no dependency and stays byte-stable.

use std::fmt::Write as _;

const W: f64 = 640.0;
const H: f64 = 440.0;
const ML: f64 = 70.0; // left margin
const MB: f64 = 50.0; // bottom margin
const MT: f64 = 20.0;
const MR: f64 = 20.0;

fn fmt2(x: f64) -> String {
    format!("{x:.2}")
}

/// Log-log polyline of `(x, y)` points (all positive; nonpositive values are
/// clamped to the smallest positive entry).
pub fn loglog_polyline(points: &[(f64, f64)], x_label: &str, y_label: &str) -> String {
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
    );
    let _ = writeln!(svg, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    if points.is_empty() {
        svg.push_str("</svg>\n");
        return svg;
    }
    let floor = points
        .iter()
        .flat_map(|&(x, y)| [x, y])
        .filter(|v| *v > 0.0)
        .fold(f64::INFINITY, f64::min)
        .min(1.0);
    let lx: Vec<f64> = points.iter().map(|&(x, _)| x.max(floor).log10()).collect();
    let ly: Vec<f64> = points.iter().map(|&(_, y)| y.max(floor * 1e-3).log10()).collect();
    let (x0, x1) = bounds(&lx);
    let (y0, y1) = bounds(&ly);
    let px = |v: f64| ML + (v - x0) / (x1 - x0) * (W - ML - MR);
    let py = |v: f64| H - MB - (v - y0) / (y1 - y0) * (H - MB - MT);

    // Decade ticks.
    for d in (x0.floor() as i64)..=(x1.ceil() as i64) {
        let v = d as f64;
        if v < x0 || v > x1 {
            continue;
        }
        let x = px(v);
        let _ = writeln!(
            svg,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#ccc\"/>",
            fmt2(x),
            fmt2(H - MB),
            fmt2(x),
            fmt2(MT)
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">1e{d}</text>",
            fmt2(x),
            fmt2(H - MB + 18.0)
        );
    }
    for d in (y0.floor() as i64)..=(y1.ceil() as i64) {
        let v = d as f64;
        if v < y0 || v > y1 {
            continue;
        }
        let y = py(v);
        let _ = writeln!(
            svg,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#ccc\"/>",
            fmt2(ML),
            fmt2(y),
            fmt2(W - MR),
            fmt2(y)
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"end\">1e{d}</text>",
            fmt2(ML - 6.0),
            fmt2(y + 4.0)
        );
    }
    // Axes.
    let _ = writeln!(
        svg,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        fmt2(ML),
        fmt2(H - MB),
        fmt2(W - MR),
        fmt2(H - MB)
    );
    let _ = writeln!(
        svg,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        fmt2(ML),
        fmt2(H - MB),
        fmt2(ML),
        fmt2(MT)
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\">{x_label}</text>",
        fmt2((ML + W - MR) / 2.0),
        fmt2(H - 12.0)
    );
    let _ = writeln!(
        svg,
        "<text x=\"16\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{y_label}</text>",
        fmt2((MT + H - MB) / 2.0),
        fmt2((MT + H - MB) / 2.0)
    );
    // Polyline.
    let pts: Vec<String> =
        lx.iter().zip(&ly).map(|(&x, &y)| format!("{},{}", fmt2(px(x)), fmt2(py(y)))).collect();
    let _ = writeln!(
        svg,
        "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"{}\"/>",
        pts.join(" ")
    );
    for (x, y) in lx.iter().zip(&ly) {
        let _ = writeln!(
            svg,
            "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"#1f77b4\"/>",
            fmt2(px(*x)),
            fmt2(py(*y))
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn bounds(vals: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in vals {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !(hi > lo) {
        (lo - 0.5, lo + 0.5)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}
