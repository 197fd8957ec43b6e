//! Dependency-free SVG line charts for PR curves and loss curves.
//!
//! Output is deliberately boring: fixed viewBox, numbers formatted to six
//! significant digits, no timestamps. Identical data always renders identical
//! bytes, so chart files can sit behind golden tests.

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

const TRACE_COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// One polyline plus its legend label.
pub struct Trace<'a> {
    pub label: &'a str,
    pub points: &'a [(f64, f64)],
}

/// Renders traces as a fixed-size SVG line chart.
///
/// Axis ranges are data-driven (padded to the origin where sensible is the
/// caller's job: pass the ranges you want via the data). Empty traces render
/// an empty plot area rather than failing.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, traces: &[Trace<'_>]) -> String {
    let all_points = traces.iter().flat_map(|t| t.points.iter());
    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all_points {
        x_min = x_min.min(x);
        x_max = x_max.max(x);
        y_min = y_min.min(y);
        y_max = y_max.max(y);
    }
    if !x_min.is_finite() {
        (x_min, x_max, y_min, y_max) = (0.0, 1.0, 0.0, 1.0);
    }
    if x_max == x_min {
        x_max = x_min + 1.0;
    }
    if y_max == y_min {
        y_max = y_min + 1.0;
    }

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w;
    let sy = |y: f64| MARGIN_TOP + plot_h - (y - y_min) / (y_max - y_min) * plot_h;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"monospace\" font-size=\"12\">\n"
    ));
    svg.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"16\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    ));

    // Axes.
    svg.push_str(&format!(
        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        fmt(MARGIN_LEFT),
        fmt(MARGIN_TOP + plot_h),
        fmt(MARGIN_LEFT + plot_w),
        fmt(MARGIN_TOP + plot_h),
    ));
    svg.push_str(&format!(
        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        fmt(MARGIN_LEFT),
        fmt(MARGIN_TOP),
        fmt(MARGIN_LEFT),
        fmt(MARGIN_TOP + plot_h),
    ));

    // Four ticks per axis.
    for i in 0..=4 {
        let frac = f64::from(i) / 4.0;
        let x_val = x_min + frac * (x_max - x_min);
        let y_val = y_min + frac * (y_max - y_min);
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            fmt(sx(x_val)),
            fmt(MARGIN_TOP + plot_h + 18.0),
            fmt(x_val)
        ));
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
            fmt(MARGIN_LEFT - 6.0),
            fmt(sy(y_val) + 4.0),
            fmt(y_val)
        ));
    }

    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
        fmt(MARGIN_LEFT + plot_w / 2.0),
        fmt(HEIGHT - 10.0),
        escape(x_label)
    ));
    svg.push_str(&format!(
        "  <text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
        fmt(MARGIN_TOP + plot_h / 2.0),
        fmt(MARGIN_TOP + plot_h / 2.0),
        escape(y_label)
    ));

    for (i, trace) in traces.iter().enumerate() {
        let color = TRACE_COLORS[i % TRACE_COLORS.len()];
        if !trace.points.is_empty() {
            let mut path = String::from("  <path d=\"");
            for (j, &(x, y)) in trace.points.iter().enumerate() {
                path.push_str(if j == 0 { "M" } else { " L" });
                path.push_str(&format!("{} {}", fmt(sx(x)), fmt(sy(y))));
            }
            path.push_str(&format!(
                "\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>\n"
            ));
            svg.push_str(&path);
        }
        // Legend swatch.
        let ly = MARGIN_TOP + 16.0 * i as f64;
        svg.push_str(&format!(
            "  <rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{}\"/>\n",
            fmt(MARGIN_LEFT + plot_w - 150.0),
            fmt(ly),
            color
        ));
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\">{}</text>\n",
            fmt(MARGIN_LEFT + plot_w - 135.0),
            fmt(ly + 9.0),
            escape(trace.label)
        ));
    }

    svg.push_str("</svg>\n");
    svg
}

/// Formats a number to at most six significant digits, trimming trailing
/// zeros, so chart bytes stay stable across platforms.
pub fn fmt(value: f64) -> String {
    if value == 0.0 {
        return "0".to_string();
    }
    if !value.is_finite() {
        return "0".to_string();
    }
    let magnitude = value.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).clamp(0, 17) as usize;
    let mut s = format!("{value:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
