//! Minimal SVG line charts with standard-error bands.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{LabError, LabResult};
use crate::experiment::{ResultTable, Series};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 120.0;
const MARGIN_TOP: f64 = 32.0;
const MARGIN_BOTTOM: f64 = 48.0;
const COLORS: [&str; 2] = ["#1f77b4", "#d62728"];

struct Line<'a> {
    label: &'a str,
    series: &'a Series,
}

fn y_range(lines: &[Line<'_>]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for l in lines {
        for (m, s) in l.series.mean.iter().zip(&l.series.se) {
            if m.is_finite() {
                lo = lo.min(m - s);
                hi = hi.max(m + s);
            }
        }
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        let pad = (0.1 * lo.abs()).max(0.5);
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Render one chart. Rounds run along the x axis starting at 1.
fn render(title: &str, y_label: &str, lines: &[Line<'_>]) -> String {
    let rounds = lines.iter().map(|l| l.series.mean.len()).max().unwrap_or(0);
    let (x_lo, x_hi) = if rounds <= 1 { (0.5, 1.5) } else { (1.0, rounds as f64) };
    let (y_lo, y_hi) = y_range(lines);
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let px = |x: f64| MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let py = |y: f64| MARGIN_TOP + (y_hi - y) / (y_hi - y_lo) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{title}</text>"#, MARGIN_LEFT + plot_w / 2.0);
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let y = y_lo + (y_hi - y_lo) * f64::from(k) / 4.0;
        let (x_end, y_px, label_x) = (MARGIN_LEFT + plot_w, py(y), MARGIN_LEFT - 6.0);
        let _ = writeln!(
            svg,
            r##"<line x1="{MARGIN_LEFT}" x2="{x_end}" y1="{y_px:.2}" y2="{y_px:.2}" stroke="#ddd"/><text x="{label_x}" y="{:.2}" text-anchor="end">{y:.3}</text>"##,
            y_px + 4.0
        );
    }
    let ticks = rounds.clamp(1, 5);
    for k in 0..ticks {
        let x = if ticks == 1 {
            1.0
        } else {
            (x_lo + (x_hi - x_lo) * k as f64 / (ticks - 1) as f64).round()
        };
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{x}</text>"#,
            px(x),
            MARGIN_TOP + plot_h + 16.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{}" text-anchor="middle">round</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{0:.2}" text-anchor="middle" transform="rotate(-90 16 {0:.2})">{y_label}</text>"#,
        MARGIN_TOP + plot_h / 2.0
    );

    for (i, line) in lines.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let s = line.series;
        let pts: Vec<(f64, f64, f64)> = s
            .mean
            .iter()
            .zip(&s.se)
            .enumerate()
            .map(|(t, (&m, &e))| ((t + 1) as f64, m, e))
            .collect();
        if pts.len() > 1 {
            let mut band: Vec<String> = pts.iter().map(|&(x, m, e)| format!("{:.2},{:.2}", px(x), py(m + e))).collect();
            band.extend(pts.iter().rev().map(|&(x, m, e)| format!("{:.2},{:.2}", px(x), py(m - e))));
            let _ = writeln!(svg, r#"<polygon points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#, band.join(" "));
            let path: Vec<String> = pts.iter().map(|&(x, m, _)| format!("{:.2},{:.2}", px(x), py(m))).collect();
            let _ = writeln!(svg, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, path.join(" "));
        } else if let Some(&(x, m, e)) = pts.first() {
            let _ = writeln!(
                svg,
                r#"<line x1="{0:.2}" x2="{0:.2}" y1="{1:.2}" y2="{2:.2}" stroke="{color}"/><circle cx="{0:.2}" cy="{3:.2}" r="3" fill="{color}"/>"#,
                px(x),
                py(m + e),
                py(m - e),
                py(m)
            );
        }
        let ly = MARGIN_TOP + 12.0 + 18.0 * i as f64;
        let lx = MARGIN_LEFT + plot_w + 10.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" x2="{}" y1="{ly}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            line.label
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Write `error.svg`, plus `snr.svg` and `grade.svg` when the table carries
/// noise diagnostics. Returns the written paths.
pub fn emit_plots(table: &ResultTable, dir: &Path) -> LabResult<Vec<PathBuf>> {
    if table.rounds == 0 || table.train_error.mean.is_empty() {
        return Err(LabError::Config("cannot plot an empty result table".into()));
    }
    fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    let mut charts = Vec::new();
    let mut err_lines = vec![Line {
        label: "train",
        series: &table.train_error,
    }];
    if let Some(test) = &table.test_error {
        err_lines.push(Line { label: "test", series: test });
    }
    charts.push(("error.svg", render(&format!("{} error", table.algorithm), "error", &err_lines)));
    if let Some(snr) = &table.snr {
        charts.push(("snr.svg", render("signal-to-noise ratio", "SNR", &[Line { label: "SNR", series: snr }])));
    }
    if let Some(grade) = &table.noise_grade {
        charts.push(("grade.svg", render("noise grade", "noise grade", &[Line { label: "grade", series: grade }])));
    }
    let mut written = Vec::new();
    for (name, body) in charts {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| LabError::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_series_has_finite_range() {
        let s = Series {
            mean: vec![0.3; 4],
            se: vec![0.0; 4],
        };
        let svg = render("t", "y", &[Line { label: "a", series: &s }]);
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
        assert!(svg.contains("<polyline"));
    }

    #[test]
    fn single_point_renders_marker() {
        let s = Series {
            mean: vec![0.3],
            se: vec![0.1],
        };
        let svg = render("t", "y", &[Line { label: "a", series: &s }]);
        assert!(svg.contains("<circle") && !svg.contains("NaN"));
    }
}
