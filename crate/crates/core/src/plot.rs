//! Log-log SVG plots of experiment curves: error against rank, one polyline per size.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::experiment::{curve_points, ExperimentRow};
use crate::generators::GeneratorKind;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 120.0;
const MARGIN_Y: f64 = 50.0;
const COLORS: &[&str] = &[
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    /// `(r, ε)` pairs with positive coordinates, sorted by `r`.
    pub points: Vec<(f64, f64)>,
}

fn log_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v.log10()), hi.max(v.log10()))
    });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-9 {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

/// SVG document with log axes and a legend entry per series.
pub fn render_svg(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (x0, x1) = log_range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (y0, y1) = log_range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - 2.0 * MARGIN_Y;
    let px = |x: f64| MARGIN_LEFT + (x.log10() - x0) / (x1 - x0) * plot_w;
    let py = |y: f64| HEIGHT - MARGIN_Y - (y.log10() - y0) / (y1 - y0) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="25" text-anchor="middle" font-family="sans-serif" font-size="15">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<g class="axes" stroke="black" fill="none"><line x1="{l}" y1="{b}" x2="{r}" y2="{b}"/><line x1="{l}" y1="{b}" x2="{l}" y2="{t}"/></g>"#,
        l = MARGIN_LEFT,
        r = MARGIN_LEFT + plot_w,
        b = HEIGHT - MARGIN_Y,
        t = MARGIN_Y
    );
    for e in (x0.ceil() as i32)..=(x1.floor() as i32) {
        let x = px(10f64.powi(e));
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{b}" x2="{x:.2}" y2="{b2}" stroke="black"/><text x="{x:.2}" y="{ty}" text-anchor="middle" font-family="sans-serif" font-size="11">1e{e}</text>"#,
            b = HEIGHT - MARGIN_Y,
            b2 = HEIGHT - MARGIN_Y + 5.0,
            ty = HEIGHT - MARGIN_Y + 18.0
        );
    }
    for e in (y0.ceil() as i32)..=(y1.floor() as i32) {
        let y = py(10f64.powi(e));
        let _ = writeln!(
            s,
            r#"<line x1="{l2}" y1="{y:.2}" x2="{l}" y2="{y:.2}" stroke="black"/><text x="{tx}" y="{y:.2}" text-anchor="end" dominant-baseline="middle" font-family="sans-serif" font-size="11">1e{e}</text>"#,
            l = MARGIN_LEFT,
            l2 = MARGIN_LEFT - 5.0,
            tx = MARGIN_LEFT - 8.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{y}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 18 {y})">{}</text>"#,
        escape(y_label),
        y = MARGIN_Y + plot_h / 2.0
    );
    for (k, ser) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = ser
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline class="series" fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            pts.join(" ")
        );
        let ly = MARGIN_Y + 10.0 + 18.0 * k as f64;
        let lx = WIDTH - MARGIN_RIGHT + 12.0;
        let _ = writeln!(
            s,
            r#"<g class="legend"><line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{ly}" dominant-baseline="middle" font-family="sans-serif" font-size="12">{}</text></g>"#,
            lx + 20.0,
            lx + 26.0,
            escape(&ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Curves per `(kind, d)`, one series per size `n` ordered by rank.
pub fn group_series(rows: &[ExperimentRow]) -> BTreeMap<(GeneratorKind, usize), Vec<Series>> {
    let mut curves: BTreeMap<(GeneratorKind, usize), BTreeMap<usize, Vec<(f64, f64)>>> = BTreeMap::new();
    for row in curve_points(rows) {
        let by_n = curves.entry((row.kind, row.d)).or_default();
        let pts = by_n.entry(row.n).or_default();
        if row.epsilon.is_finite() && row.epsilon > 0.0 {
            pts.push((row.r as f64, row.epsilon));
        }
    }
    curves
        .into_iter()
        .map(|(key, by_n)| {
            let series = by_n
                .into_iter()
                .filter(|(_, p)| !p.is_empty())
                .map(|(n, mut points)| {
                    points.sort_by(|a, b| a.0.total_cmp(&b.0));
                    Series {
                        label: format!("n = {n}"),
                        points,
                    }
                })
                .collect();
            (key, series)
        })
        .collect()
}

/// Writes `<kind>_d<d>.svg` per family into `out_dir`; with no rows, a single
/// `empty.svg` holding bare axes.
pub fn emit_plots(rows: &[ExperimentRow], out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let groups = group_series(rows);
    let mut written = Vec::new();
    if groups.is_empty() {
        let path = out_dir.join("empty.svg");
        std::fs::write(&path, render_svg("no data", "rank r", "max-norm error", &[]))?;
        written.push(path);
    }
    for ((kind, d), series) in groups {
        let path = out_dir.join(format!("{kind}_d{d}.svg"));
        let title = format!("{kind} tensors, d = {d}");
        std::fs::write(&path, render_svg(&title, "rank r", "max-norm error", &series))?;
        written.push(path);
    }
    Ok(written)
}
