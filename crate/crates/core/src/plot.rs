//! Minimal SVG rendering for band diagrams, curves and field heatmaps.

use std::fmt::Write;

use crate::geometry::Vec2;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// One polyline series of a line plot.
pub struct Series<'a> {
    pub label: &'a str,
    pub x: &'a [f64],
    pub y: &'a [f64],
    pub dashed: bool,
}

/// A horizontal band drawn behind the data (e.g. a band gap).
pub struct Shade {
    pub y0: f64,
    pub y1: f64,
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Renders line series with axes, optional shaded bands and x tick labels.
pub fn line_plot(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[Series],
    shades: &[Shade],
    x_ticks: &[(f64, String)],
) -> String {
    let (x0, x1) = range(series.iter().flat_map(|s| s.x.iter().copied()));
    let (y0, y1) = range(series.iter().flat_map(|s| s.y.iter().copied()).chain(shades.iter().flat_map(|s| [s.y0, s.y1])));
    let pad = 0.04 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 1.5 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 1.6 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
    for sh in shades {
        let (top, bottom) = (py(sh.y1.max(sh.y0)), py(sh.y0.min(sh.y1)));
        let _ = writeln!(
            s,
            r##"<rect x="{}" y="{top:.2}" width="{}" height="{:.2}" fill="#ffe08a" opacity="0.6"/>"##,
            MARGIN,
            WIDTH - 1.5 * MARGIN,
            bottom - top
        );
    }
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        py(y1),
        WIDTH - 1.5 * MARGIN,
        py(y0) - py(y1)
    );
    for i in 0..=4 {
        let y = y0 + (y1 - y0) * i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            MARGIN - 4.0,
            py(y) + 4.0,
            tick(y)
        );
    }
    if x_ticks.is_empty() {
        for i in 0..=4 {
            let x = x0 + (x1 - x0) * i as f64 / 4.0;
            let _ = writeln!(s, r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#, px(x), HEIGHT - MARGIN + 16.0, tick(x));
        }
    } else {
        for (x, label) in x_ticks {
            let _ = writeln!(
                s,
                r##"<line x1="{0:.2}" x2="{0:.2}" y1="{1:.2}" y2="{2:.2}" stroke="#999" stroke-dasharray="3,3"/>"##,
                px(*x),
                py(y0),
                py(y1)
            );
            let _ = writeln!(s, r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#, px(*x), HEIGHT - MARGIN + 16.0, escape(label));
        }
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 14.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
        HEIGHT / 2.0,
        escape(y_label)
    );
    let mut legend = 0;
    for (n, se) in series.iter().enumerate() {
        let color = PALETTE[n % PALETTE.len()];
        let pts: Vec<String> = se
            .x
            .iter()
            .zip(se.y)
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let dash = if se.dashed { r#" stroke-dasharray="5,4""# } else { "" };
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"/>"#, pts.join(" "));
        if !se.label.is_empty() {
            let y = 40.0 + 16.0 * legend as f64;
            let _ = writeln!(
                s,
                r#"<line x1="{0}" x2="{1}" y1="{y}" y2="{y}" stroke="{color}" stroke-width="2"{dash}/><text x="{2}" y="{3}">{4}</text>"#,
                WIDTH - 2.6 * MARGIN,
                WIDTH - 2.2 * MARGIN,
                WIDTH - 2.1 * MARGIN,
                y + 4.0,
                escape(se.label)
            );
            legend += 1;
        }
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn color(t: f64) -> String {
    // dark blue -> red -> yellow
    let stops = [(0.0, [12.0, 7.0, 60.0]), (0.5, [200.0, 40.0, 50.0]), (1.0, [252.0, 240.0, 120.0])];
    let t = t.clamp(0.0, 1.0);
    let (a, b) = if t < 0.5 { (stops[0], stops[1]) } else { (stops[1], stops[2]) };
    let w = (t - a.0) / (b.0 - a.0);
    let c: Vec<u8> = (0..3).map(|i| (a.1[i] + w * (b.1[i] - a.1[i])).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// Heatmap of a field sampled on an oblique cell grid (`values[i * n2 + j]`
/// at fractional position `(i/n1, j/n2)`), drawn in Cartesian proportions
/// and centred on the origin. Blocks are averaged so at most `max_blocks`
/// cells are drawn along each axis.
pub fn heatmap(values: &[f64], n1: usize, n2: usize, cell: [Vec2; 2], max_blocks: usize) -> String {
    let b1 = n1.div_ceil(max_blocks.max(1)).max(1);
    let b2 = n2.div_ceil(max_blocks.max(1)).max(1);
    let (m1, m2) = (n1.div_ceil(b1), n2.div_ceil(b2));
    let mut blocks = vec![0.0; m1 * m2];
    for i in 0..n1 {
        for j in 0..n2 {
            // centre the cell: shift fractional coordinates by one half
            let ii = (i + n1 / 2) % n1;
            let jj = (j + n2 / 2) % n2;
            blocks[(ii / b1) * m2 + jj / b2] += values[i * n2 + j];
        }
    }
    let peak = blocks.iter().cloned().fold(0.0f64, f64::max).max(f64::MIN_POSITIVE);

    let corners = [
        -0.5 * cell[0] - 0.5 * cell[1],
        0.5 * cell[0] - 0.5 * cell[1],
        0.5 * cell[0] + 0.5 * cell[1],
        -0.5 * cell[0] + 0.5 * cell[1],
    ];
    let (xmin, xmax) = range(corners.iter().map(|c| c.x));
    let (ymin, ymax) = range(corners.iter().map(|c| c.y));
    let scale = 600.0 / (xmax - xmin).max(ymax - ymin);
    let (w, h) = ((xmax - xmin) * scale, (ymax - ymin) * scale);
    // fractional (u, v) in block units -> SVG coordinates, y flipped
    let ax = cell[0].x * scale / m1 as f64;
    let ay = -cell[0].y * scale / m1 as f64;
    let bx = cell[1].x * scale / m2 as f64;
    let by = -cell[1].y * scale / m2 as f64;
    let origin = corners[0];
    let tx = (origin.x - xmin) * scale;
    let ty = (ymax - origin.y) * scale;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.1}" height="{h:.1}" viewBox="0 0 {w:.3} {h:.3}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<g transform="matrix({ax} {ay} {bx} {by} {tx} {ty})" shape-rendering="crispEdges">"#);
    for i in 0..m1 {
        for j in 0..m2 {
            let c = color((blocks[i * m2 + j] / peak).sqrt());
            let _ = writeln!(s, r#"<rect x="{i}" y="{j}" width="1.02" height="1.02" fill="{c}"/>"#);
        }
    }
    s.push_str("</g>\n</svg>\n");
    s
}
