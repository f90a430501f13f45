//! Minimal SVG rendering for ROC curves. The output is a single
//! self-contained file built from text primitives — no drawing library,
//! so the bytes are fully deterministic for a given curve.

use crate::error::{Error, Result};
use crate::verification::RocCurve;
use std::fmt::Write as _;
use std::path::Path;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 55.0;

/// Map unit coordinates (x right, y up) to SVG pixel coordinates.
fn to_pixels(x: f64, y: f64) -> (f64, f64) {
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    (MARGIN_LEFT + x * plot_w, HEIGHT - MARGIN_BOTTOM - y * plot_h)
}

fn fmt_px(v: f64) -> String {
    // One decimal keeps files small and output stable.
    format!("{v:.1}")
}

/// Render an ROC curve (false-alarm rate on x, verification rate on y)
/// as an SVG document string.
pub fn roc_svg(roc: &RocCurve, title: &str) -> String {
    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    );
    let _ = write!(
        svg,
        "  <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    );
    let _ = write!(
        svg,
        "  <text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" \
         text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        xml_escape(title)
    );

    // Axes with ticks and grid lines every 0.2.
    let (x0, y0) = to_pixels(0.0, 0.0);
    let (x1, y1) = to_pixels(1.0, 1.0);
    for step in 0..=5 {
        let v = step as f64 / 5.0;
        let (gx, _) = to_pixels(v, 0.0);
        let (_, gy) = to_pixels(0.0, v);
        let _ = write!(
            svg,
            "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#dddddd\"/>\n",
            fmt_px(gx),
            fmt_px(y0),
            fmt_px(gx),
            fmt_px(y1)
        );
        let _ = write!(
            svg,
            "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#dddddd\"/>\n",
            fmt_px(x0),
            fmt_px(gy),
            fmt_px(x1),
            fmt_px(gy)
        );
        let _ = write!(
            svg,
            "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" \
             text-anchor=\"middle\">{v:.1}</text>\n",
            fmt_px(gx),
            fmt_px(y0 + 18.0)
        );
        let _ = write!(
            svg,
            "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" \
             text-anchor=\"end\">{v:.1}</text>\n",
            fmt_px(x0 - 8.0),
            fmt_px(gy + 4.0)
        );
    }
    let _ = write!(
        svg,
        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        fmt_px(x0),
        fmt_px(y0),
        fmt_px(x1),
        fmt_px(y0)
    );
    let _ = write!(
        svg,
        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        fmt_px(x0),
        fmt_px(y0),
        fmt_px(x0),
        fmt_px(y1)
    );

    // Chance diagonal for reference.
    let _ = write!(
        svg,
        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#999999\" \
         stroke-dasharray=\"6,4\"/>\n",
        fmt_px(x0),
        fmt_px(y0),
        fmt_px(x1),
        fmt_px(y1)
    );

    // The curve itself.
    let mut points = String::new();
    for &(pf, pv) in roc.points() {
        let (px, py) = to_pixels(pf, pv);
        let _ = write!(points, "{},{} ", fmt_px(px), fmt_px(py));
    }
    let _ = write!(
        svg,
        "  <polyline points=\"{}\" fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"2\"/>\n",
        points.trim_end()
    );

    // Axis labels.
    let _ = write!(
        svg,
        "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"14\" \
         text-anchor=\"middle\">false alarm rate</text>\n",
        (x0 + x1) / 2.0,
        HEIGHT - 12.0
    );
    let _ = write!(
        svg,
        "  <text x=\"18\" y=\"{}\" font-family=\"sans-serif\" font-size=\"14\" \
         text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">verification rate</text>\n",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
    svg.push_str("</svg>\n");
    svg
}

/// Write [`roc_svg`] output to a file.
pub fn write_roc_svg(roc: &RocCurve, title: &str, path: &Path) -> Result<()> {
    std::fs::write(path, roc_svg(roc, title)).map_err(|e| Error::io(path, e))
}

fn xml_escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}
