use std::fmt::Write as _;

use super::{MetricsRow, Strategy};
use crate::calib::GeometryEstimate;

pub const CSV_HEADER: &str = "t60_ms,strategy,mpe_m,orient_err_deg,trials,failures";

fn num(v: f64, digits: usize) -> String {
    if v.is_finite() {
        format!("{v:.digits$}")
    } else {
        "nan".to_string()
    }
}

pub fn metrics_csv(rows: &[MetricsRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            num(r.t60_ms, 0),
            r.strategy.name(),
            num(r.mpe_m, 6),
            num(r.orientation_error_deg, 6),
            r.trials,
            r.failures
        )
        .unwrap();
    }
    out
}

/// Estimated acoustic geometry as text, angles in degrees:
/// `acoustic <i> <x> <y> <orientation>` per sensor after a small header.
pub fn geometry_text(strategy: Strategy, estimate: &GeometryEstimate, consensus: usize) -> String {
    let mut out = String::from("# avcal geometry\n");
    writeln!(out, "strategy {}", strategy.name()).unwrap();
    writeln!(out, "objective {:.9}", estimate.objective_value).unwrap();
    writeln!(out, "iterations {}", estimate.iterations).unwrap();
    writeln!(out, "converged {}", estimate.converged).unwrap();
    writeln!(out, "consensus {consensus}").unwrap();
    let v = &estimate.variables;
    for (i, (p, o)) in v.positions.iter().zip(&v.orientations).enumerate() {
        writeln!(out, "acoustic {i} {:.9} {:.9} {:.9}", p.x, p.y, o.degrees()).unwrap();
    }
    out
}

fn color(s: Strategy) -> &'static str {
    match s {
        Strategy::Rbt => "#d62728",
        Strategy::Joint => "#1f77b4",
        Strategy::RbtOracleScale => "#ff7f0e",
    }
}

/// Line plot of MPE over the sweep, one series per strategy.
pub fn mpe_svg(rows: &[MetricsRow]) -> String {
    let (w, h) = (640.0, 420.0);
    let (left, right, top, bottom) = (70.0, 20.0, 20.0, 60.0);
    let (pw, ph) = (w - left - right, h - top - bottom);

    let mut strategies: Vec<Strategy> = Vec::new();
    for r in rows {
        if !strategies.contains(&r.strategy) {
            strategies.push(r.strategy);
        }
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.t60_ms).collect();
    let x_min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let x_max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let x_span = if x_max > x_min { x_max - x_min } else { 1.0 };
    let y_max_data = rows
        .iter()
        .map(|r| r.mpe_m)
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max);
    let y_max = if y_max_data > 0.0 { y_max_data * 1.1 } else { 1.0 };
    let px = |x: f64| left + (x - if x_min.is_finite() { x_min } else { 0.0 }) / x_span * pw;
    let py = |y: f64| top + ph - y / y_max * ph;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    )
    .unwrap();
    for j in 0..=5 {
        let y = y_max * j as f64 / 5.0;
        let yy = py(y);
        writeln!(
            s,
            r##"<line x1="{left}" y1="{yy:.2}" x2="{:.2}" y2="{yy:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{:.3}</text>"##,
            left + pw,
            left - 6.0,
            yy + 4.0,
            y
        )
        .unwrap();
    }
    let mut ticks: Vec<f64> = xs.clone();
    ticks.sort_by(f64::total_cmp);
    ticks.dedup();
    for x in &ticks {
        let xx = px(*x);
        writeln!(
            s,
            r#"<line x1="{xx:.2}" y1="{:.2}" x2="{xx:.2}" y2="{:.2}" stroke="black"/><text x="{xx:.2}" y="{:.2}" text-anchor="middle">{x:.0}</text>"#,
            top + ph,
            top + ph + 5.0,
            top + ph + 20.0
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">T60 proxy [ms]</text>"#,
        left + pw / 2.0,
        h - 15.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">MPE [m]</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    )
    .unwrap();
    for (n, strat) in strategies.iter().enumerate() {
        let pts: Vec<String> = rows
            .iter()
            .filter(|r| r.strategy == *strat && r.mpe_m.is_finite())
            .map(|r| format!("{:.2},{:.2}", px(r.t60_ms), py(r.mpe_m)))
            .collect();
        let c = color(*strat);
        writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{c}" stroke-width="2"/>"#,
            pts.join(" ")
        )
        .unwrap();
        for p in &pts {
            let (x, y) = p.split_once(',').expect("formatted pair");
            writeln!(s, r#"<circle cx="{x}" cy="{y}" r="3" fill="{c}"/>"#).unwrap();
        }
        let ly = top + 15.0 + 16.0 * n as f64;
        writeln!(
            s,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{c}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            left + 10.0,
            left + 30.0,
            left + 35.0,
            ly + 4.0,
            strat.name()
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}
