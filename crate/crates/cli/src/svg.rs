//! Minimal self-contained SVG line charts. CSV stays the canonical output;
//! these are quick-look renderings with no plotting dependency.

use std::fmt::Write;

pub struct Series<'a> {
    pub label: &'a str,
    pub points: &'a [(f64, f64)],
    pub color: &'a str,
    pub dashed: bool,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 78.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 46.0;
const MARGIN_BOTTOM: f64 = 64.0;

fn tick_label(value: f64) -> String {
    if value == 0.0 {
        return "0".into();
    }
    let magnitude = value.abs();
    if (0.001..1e6).contains(&magnitude) {
        let text = format!("{value:.4}");
        let trimmed = text.trim_end_matches('0').trim_end_matches('.');
        trimmed.to_string()
    } else {
        format!("{value:.3e}")
    }
}

/// Renders one chart with shared axes over every series.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let points = series.iter().flat_map(|s| s.points.iter());
    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points {
        x_min = x_min.min(x);
        x_max = x_max.max(x);
        y_min = y_min.min(y);
        y_max = y_max.max(y);
    }
    if !x_min.is_finite() {
        x_min = 0.0;
        x_max = 1.0;
        y_min = 0.0;
        y_max = 1.0;
    }
    if x_max == x_min {
        x_max = x_min + 1.0;
    }
    let pad = 0.05 * (y_max - y_min).max(1e-12);
    y_min -= pad;
    y_max += pad;

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = move |x: f64| MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w;
    let sy = move |y: f64| MARGIN_TOP + (1.0 - (y - y_min) / (y_max - y_min)) * plot_h;

    let mut svg = String::new();
    let _ = write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">
<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>
<text x="{tx}" y="26" text-anchor="middle" font-family="sans-serif" font-size="17">{title}</text>
"#,
        tx = WIDTH / 2.0,
    );

    // Axes, ticks, grid.
    let _ = writeln!(
        svg,
        r##"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#333" stroke-width="1"/>"##,
    );
    for i in 0..=5 {
        let fraction = i as f64 / 5.0;
        let x_val = x_min + fraction * (x_max - x_min);
        let y_val = y_min + fraction * (y_max - y_min);
        let x_px = sx(x_val);
        let y_px = sy(y_val);
        let _ = writeln!(
            svg,
            r##"<line x1="{x_px:.2}" y1="{y0}" x2="{x_px:.2}" y2="{y1}" stroke="#ddd" stroke-width="1"/>
<text x="{x_px:.2}" y="{ylab}" text-anchor="middle" font-family="sans-serif" font-size="12">{xt}</text>
<line x1="{x0}" y1="{y_px:.2}" x2="{x1}" y2="{y_px:.2}" stroke="#ddd" stroke-width="1"/>
<text x="{xlab}" y="{ytext:.2}" text-anchor="end" font-family="sans-serif" font-size="12">{yt}</text>"##,
            y0 = MARGIN_TOP,
            y1 = MARGIN_TOP + plot_h,
            ylab = MARGIN_TOP + plot_h + 18.0,
            xt = tick_label(x_val),
            x0 = MARGIN_LEFT,
            x1 = MARGIN_LEFT + plot_w,
            xlab = MARGIN_LEFT - 8.0,
            ytext = y_px + 4.0,
            yt = tick_label(y_val),
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{tx}" y="{ty}" text-anchor="middle" font-family="sans-serif" font-size="14">{x_label}</text>
<text x="20" y="{ly}" text-anchor="middle" font-family="sans-serif" font-size="14" transform="rotate(-90 20 {ly})">{y_label}</text>"#,
        tx = MARGIN_LEFT + plot_w / 2.0,
        ty = HEIGHT - 16.0,
        ly = MARGIN_TOP + plot_h / 2.0,
    );

    for s in series {
        if s.points.is_empty() {
            continue;
        }
        let mut path = String::new();
        for &(x, y) in s.points {
            let _ = write!(path, "{:.2},{:.2} ", sx(x), sy(y));
        }
        let dash = if s.dashed {
            r#" stroke-dasharray="7,5""#
        } else {
            ""
        };
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.6"{dash}/>"#,
            path.trim_end(),
            s.color,
        );
    }

    // Legend, top-right corner of the plot area.
    for (i, s) in series.iter().enumerate() {
        let y = MARGIN_TOP + 16.0 + 18.0 * i as f64;
        let x = MARGIN_LEFT + plot_w - 170.0;
        let dash = if s.dashed {
            r#" stroke-dasharray="7,5""#
        } else {
            ""
        };
        let _ = writeln!(
            svg,
            r#"<line x1="{x}" y1="{y}" x2="{x2}" y2="{y}" stroke="{}" stroke-width="1.6"{dash}/>
<text x="{tx}" y="{ty}" font-family="sans-serif" font-size="12">{}</text>"#,
            s.color,
            s.label,
            x2 = x + 26.0,
            tx = x + 32.0,
            ty = y + 4.0,
        );
    }

    svg.push_str("</svg>\n");
    svg
}

pub const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];
pub const THEORY_COLOR: &str = "#777777";
