//! Minimal SVG: a scatter of 2-D points with an optional closed hull outline.

use std::fmt::Write;

const SIZE: f64 = 400.0;
const MARGIN: f64 = 20.0;

pub struct Panel<'a> {
    pub title: &'a str,
    pub points: &'a [Vec<f64>],
    pub hull: Option<&'a [[f64; 2]]>,
    /// Fixed data window `[lo, hi]` on both axes; `None` fits the points.
    pub window: Option<(f64, f64)>,
}

/// `timestamp` goes into a leading comment; pass `None` for reproducible output.
pub fn render(panel: &Panel<'_>, timestamp: Option<u64>) -> String {
    let (lo, hi) = panel.window.unwrap_or_else(|| fit(panel.points));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let map = |x: f64, y: f64| {
        let s = (SIZE - 2.0 * MARGIN) / span;
        (MARGIN + (x - lo) * s, SIZE - MARGIN - (y - lo) * s)
    };

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    if let Some(t) = timestamp {
        let _ = writeln!(out, "<!-- generated by sfkit at unix time {t} -->");
    }
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">"
    );
    let _ = writeln!(out, "<title>{}</title>", escape(panel.title));
    let _ = writeln!(out, "<rect width=\"{SIZE}\" height=\"{SIZE}\" fill=\"white\"/>");
    out.push_str("<g fill=\"#1f4e79\">\n");
    for p in panel.points {
        let (x, y) = map(p[0], p[1]);
        let _ = writeln!(out, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"1.2\"/>");
    }
    out.push_str("</g>\n");
    if let Some(h) = panel.hull.filter(|h| !h.is_empty()) {
        let mut pts = String::new();
        for v in h.iter().chain(h.first()) {
            let (x, y) = map(v[0], v[1]);
            let _ = write!(pts, "{x:.2},{y:.2} ");
        }
        let _ = writeln!(
            out,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"#c0392b\" stroke-width=\"1\"/>",
            pts.trim_end()
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{MARGIN}\" y=\"{:.0}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>",
        MARGIN - 6.0,
        escape(panel.title)
    );
    out.push_str("</svg>\n");
    out
}

fn fit(points: &[Vec<f64>]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in points {
        for &v in &p[..2] {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if lo.is_finite() {
        (lo, hi)
    } else {
        (-1.0, 1.0)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
