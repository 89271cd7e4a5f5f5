//! Minimal hand-emitted SVG bar chart for fitness histograms: axes, bars,
//! and a marker line at the critical value. No plotting dependency, and the
//! markup is deterministic for byte-identical reruns.

use evoflow_core::Histogram;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_LEFT: f64 = 50.0;
const MARGIN_RIGHT: f64 = 15.0;
const MARGIN_TOP: f64 = 15.0;
const MARGIN_BOTTOM: f64 = 35.0;

/// Render a histogram; `marker` draws a labeled vertical line (the critical
/// value) at the given x position if it falls inside the plotted range.
pub fn histogram_svg(hist: &Histogram, title: &str, marker: Option<f64>) -> String {
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let max_count = hist.counts().iter().copied().max().unwrap_or(0).max(1) as f64;
    let (lo, hi) = (hist.lo(), hist.hi());
    let x_of = |v: f64| MARGIN_LEFT + (v - lo) / (hi - lo) * plot_w;

    let mut out = String::with_capacity(4096);
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    out.push_str(&format!(
        "  <title>{}</title>\n  <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n",
        escape(title)
    ));

    for (i, &count) in hist.counts().iter().enumerate() {
        let (b_lo, b_hi) = hist.bin_edges(i);
        let x = x_of(b_lo);
        let w = (x_of(b_hi) - x).max(0.0);
        let h = count as f64 / max_count * plot_h;
        let y = MARGIN_TOP + plot_h - h;
        out.push_str(&format!(
            "  <rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#4878a8\" stroke=\"white\" stroke-width=\"0.5\"/>\n",
            x, y, w, h
        ));
    }

    // axes
    out.push_str(&format!(
        "  <line x1=\"{MARGIN_LEFT}\" y1=\"{MARGIN_TOP}\" x2=\"{MARGIN_LEFT}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
        MARGIN_TOP + plot_h
    ));
    out.push_str(&format!(
        "  <line x1=\"{MARGIN_LEFT}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
        MARGIN_TOP + plot_h,
        MARGIN_LEFT + plot_w,
        MARGIN_TOP + plot_h
    ));
    out.push_str(&format!(
        "  <text x=\"{MARGIN_LEFT}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
        HEIGHT - 12.0,
        lo
    ));
    out.push_str(&format!(
        "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
        MARGIN_LEFT + plot_w,
        HEIGHT - 12.0,
        hi
    ));
    out.push_str(&format!(
        "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"end\">{}</text>\n",
        MARGIN_LEFT - 5.0,
        MARGIN_TOP + 10.0,
        max_count as u64
    ));

    if let Some(v) = marker {
        if v >= lo && v <= hi {
            let x = x_of(v);
            out.push_str(&format!(
                "  <line x1=\"{x:.2}\" y1=\"{MARGIN_TOP}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#c03030\" stroke-dasharray=\"4,3\"/>\n",
                MARGIN_TOP + plot_h
            ));
            out.push_str(&format!(
                "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" fill=\"#c03030\">{v}</text>\n",
                x + 3.0,
                MARGIN_TOP + 12.0
            ));
        }
    }

    out.push_str(&format!(
        "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        MARGIN_TOP + 2.0,
        escape(title)
    ));
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
