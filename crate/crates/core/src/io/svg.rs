//! Minimal self-contained SVG line charts.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 64.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    /// A field against x.
    Profile,
    /// A scalar against t.
    TimeSeries,
    /// Both axes in log10. Non-positive points are dropped.
    LogLog,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self { name: name.into(), points }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn transform(kind: PlotKind, (x, y): (f64, f64)) -> Option<(f64, f64)> {
    let p = match kind {
        PlotKind::LogLog if x > 0.0 && y > 0.0 => (x.log10(), y.log10()),
        PlotKind::LogLog => return None,
        _ => (x, y),
    };
    (p.0.is_finite() && p.1.is_finite()).then_some(p)
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        (lo, hi)
    } else {
        let h = if lo == 0.0 { 1.0 } else { 0.5 * lo.abs() };
        (lo - h, hi + h)
    }
}

/// Builds the SVG text. One `<polyline>` per series that has plottable points.
pub fn svg_document(kind: PlotKind, x_label: &str, y_label: &str, series: &[Series]) -> Result<String> {
    let mapped: Vec<(&str, Vec<(f64, f64)>)> = series
        .iter()
        .map(|s| (s.name.as_str(), s.points.iter().filter_map(|&p| transform(kind, p)).collect::<Vec<_>>()))
        .filter(|(_, pts)| !pts.is_empty())
        .collect();
    if mapped.is_empty() {
        return Err(Error::EmptyPlot);
    }
    let all = mapped.iter().flat_map(|(_, p)| p.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let (x0, x1) = padded(x0, x1);
    let (y0, y1) = padded(y0, y1);
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
    let (xl, yl) = match kind {
        PlotKind::LogLog => (format!("log10 {x_label}"), format!("log10 {y_label}")),
        _ => (x_label.to_string(), y_label.to_string()),
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(s, r#"<g stroke="black" stroke-width="1">"#);
    let _ = writeln!(s, r#"<line x1="{l}" y1="{b}" x2="{r}" y2="{b}"/>"#);
    let _ = writeln!(s, r#"<line x1="{l}" y1="{b}" x2="{l}" y2="{t}"/>"#);
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g font-family="sans-serif" font-size="11">"#);
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{xv:.3e}</text>"#, sx(xv), b + 16.0);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{yv:.3e}</text>"#, l - 6.0, sy(yv) + 4.0);
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="13">{}</text>"#,
        0.5 * WIDTH,
        HEIGHT - 16.0,
        escape(&xl)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.1}" text-anchor="middle" font-size="13" transform="rotate(-90 16 {:.1})">{}</text>"#,
        0.5 * HEIGHT,
        0.5 * HEIGHT,
        escape(&yl)
    );
    for (k, (name, _)) in mapped.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" fill="{color}">{}</text>"#, r - 120.0, t + 14.0 * k as f64, escape(name));
    }
    let _ = writeln!(s, "</g>");
    for (k, (_, pts)) in mapped.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, coords.join(" "));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn render_svg(path: &Path, kind: PlotKind, x_label: &str, y_label: &str, series: &[Series]) -> Result<()> {
    let doc = svg_document(kind, x_label, y_label, series)?;
    std::fs::write(path, doc).map_err(|e| Error::io(path, e))
}
