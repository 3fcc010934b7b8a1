//! Scatter plot of 2-D assertion embeddings as standalone SVG.
//!
//! Viewport: a `SIZE × SIZE` canvas with `MARGIN` on every side. Both axes
//! share the data range `[lo, hi]` where `lo = min(0, all coordinates)` and
//! `hi = max(all coordinates)` (widened to `lo + 1` when degenerate). A point
//! `(x, y)` is drawn at
//! `cx = MARGIN + (x − lo)/(hi − lo)·(SIZE − 2·MARGIN)` and
//! `cy = SIZE − MARGIN − (y − lo)/(hi − lo)·(SIZE − 2·MARGIN)`,
//! both printed with three decimals.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::EvalError;

pub const SIZE: f64 = 480.0;
pub const MARGIN: f64 = 40.0;

const LABEL_COLORS: [&str; 2] = ["#d62728", "#1f77b4"];
const UNLABELED: &str = "#999999";

/// One point to draw.
#[derive(Clone, Debug, PartialEq)]
pub struct ScatterPoint {
    pub x: f64,
    pub y: f64,
    pub label: Option<u8>,
}

/// Data range shared by both axes.
pub fn viewport_range(points: &[ScatterPoint]) -> (f64, f64) {
    let mut lo = 0.0_f64;
    let mut hi = f64::NEG_INFINITY;
    for p in points {
        lo = lo.min(p.x).min(p.y);
        hi = hi.max(p.x).max(p.y);
    }
    if !(hi - lo > 1e-12) {
        hi = lo + 1.0;
    }
    (lo, hi)
}

pub fn to_canvas(x: f64, y: f64, lo: f64, hi: f64) -> (f64, f64) {
    let span = SIZE - 2.0 * MARGIN;
    let cx = MARGIN + (x - lo) / (hi - lo) * span;
    let cy = SIZE - MARGIN - (y - lo) / (hi - lo) * span;
    (cx, cy)
}

pub fn render_svg(points: &[ScatterPoint]) -> String {
    let (lo, hi) = viewport_range(points);
    let (ox, oy) = to_canvas(lo.max(0.0).min(hi), lo.max(0.0).min(hi), lo, hi);
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<line x1="{:.3}" y1="{oy:.3}" x2="{:.3}" y2="{oy:.3}" stroke="black" stroke-width="1"/>"#,
        MARGIN,
        SIZE - MARGIN
    );
    let _ = writeln!(
        s,
        r#"<line x1="{ox:.3}" y1="{:.3}" x2="{ox:.3}" y2="{:.3}" stroke="black" stroke-width="1"/>"#,
        SIZE - MARGIN,
        MARGIN
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.3}" y="{:.3}" font-size="12" text-anchor="end">axis 0</text>"#,
        SIZE - MARGIN,
        SIZE - MARGIN / 3.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.3}" y="{:.3}" font-size="12">axis 1</text>"#,
        MARGIN / 4.0,
        MARGIN / 1.5
    );
    for p in points {
        let (cx, cy) = to_canvas(p.x, p.y, lo, hi);
        let color = p
            .label
            .map_or(UNLABELED, |l| LABEL_COLORS[usize::from(l.min(1))]);
        let _ = writeln!(
            s,
            r#"<circle cx="{cx:.3}" cy="{cy:.3}" r="3" fill="{color}" fill-opacity="0.7"/>"#
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn write_svg(points: &[ScatterPoint], path: &Path) -> Result<(), EvalError> {
    fs::write(path, render_svg(points)).map_err(|source| EvalError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts() -> Vec<ScatterPoint> {
        vec![
            ScatterPoint {
                x: 1.0,
                y: 0.0,
                label: Some(0),
            },
            ScatterPoint {
                x: 0.0,
                y: 2.0,
                label: Some(1),
            },
            ScatterPoint {
                x: 0.5,
                y: 0.5,
                label: None,
            },
        ]
    }

    #[test]
    fn one_circle_per_point() {
        let svg = render_svg(&pts());
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.contains(UNLABELED));
    }

    #[test]
    fn deterministic_output() {
        assert_eq!(render_svg(&pts()), render_svg(&pts()));
    }

    #[test]
    fn centers_follow_viewport() {
        // lo = 0, hi = 2, span = 400
        let svg = render_svg(&pts());
        assert!(svg.contains(r#"cx="240.000" cy="440.000""#), "{svg}");
        assert!(svg.contains(r#"cx="40.000" cy="40.000""#));
        assert!(svg.contains(r#"cx="140.000" cy="340.000""#));
    }
}
