//! Minimal self-contained SVG line charts (axes, ticks, legend, one polyline
//! per series). No plotting dependency.

use std::fmt::Write as _;

pub struct Series<'a> {
    pub label: &'a str,
    pub values: &'a [f64],
    pub color: &'a str,
}

/// Render series sharing an x-axis of `labels` (sparse ticks) to an SVG
/// string. Series may start at different x offsets via `offsets`.
pub fn line_chart(
    title: &str,
    labels: &[String],
    series: &[Series<'_>],
    offsets: &[usize],
) -> String {
    const W: f64 = 900.0;
    const H: f64 = 420.0;
    const ML: f64 = 64.0;
    const MR: f64 = 20.0;
    const MT: f64 = 40.0;
    const MB: f64 = 48.0;
    let plot_w = W - ML - MR;
    let plot_h = H - MT - MB;

    let n = labels.len().max(2);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for s in series {
        for v in s.values {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        lo = -1.0;
        hi = 1.0;
    }
    if (hi - lo).abs() < 1e-12 {
        lo -= 1.0;
        hi += 1.0;
    }
    let pad = 0.06 * (hi - lo);
    lo -= pad;
    hi += pad;

    let x = |i: usize| ML + plot_w * i as f64 / (n - 1) as f64;
    let y = |v: f64| MT + plot_h * (1.0 - (v - lo) / (hi - lo));

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(svg, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>",
        W / 2.0,
        xml_escape(title)
    );

    // y axis with 5 ticks
    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        let yy = y(v);
        let _ = writeln!(
            svg,
            "<line x1=\"{ML}\" y1=\"{yy:.1}\" x2=\"{:.1}\" y2=\"{yy:.1}\" stroke=\"#ddd\"/>",
            W - MR
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{v:.3}</text>",
            ML - 6.0,
            yy + 4.0
        );
    }
    // zero line when in range
    if lo < 0.0 && hi > 0.0 {
        let yy = y(0.0);
        let _ = writeln!(
            svg,
            "<line x1=\"{ML}\" y1=\"{yy:.1}\" x2=\"{:.1}\" y2=\"{yy:.1}\" stroke=\"#888\"/>",
            W - MR
        );
    }
    // sparse x ticks
    let step = (n / 8).max(1);
    for i in (0..n).step_by(step) {
        let xx = x(i);
        let _ = writeln!(
            svg,
            "<text x=\"{xx:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
            H - MB + 18.0,
            xml_escape(labels.get(i).map(String::as_str).unwrap_or(""))
        );
    }
    let _ = writeln!(
        svg,
        "<rect x=\"{ML}\" y=\"{MT}\" width=\"{plot_w}\" height=\"{plot_h}\" \
         fill=\"none\" stroke=\"#444\"/>"
    );

    for (si, s) in series.iter().enumerate() {
        let off = offsets.get(si).copied().unwrap_or(0);
        let mut points = String::new();
        for (i, v) in s.values.iter().enumerate() {
            let _ = write!(points, "{:.1},{:.1} ", x(i + off), y(*v));
        }
        let _ = writeln!(
            svg,
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.6\" points=\"{}\"/>",
            s.color,
            points.trim_end()
        );
        // legend
        let lx = ML + 12.0 + 150.0 * si as f64;
        let _ = writeln!(
            svg,
            "<line x1=\"{lx}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"{}\" stroke-width=\"2\"/>",
            MT + 10.0,
            lx + 22.0,
            MT + 10.0,
            s.color
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\">{}</text>",
            lx + 28.0,
            MT + 14.0,
            xml_escape(s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
