//! Static SVG figures: line plots of time series and complex-plane vector
//! diagrams of mechanism reports.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::decoder::MechanismReport;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn colour(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
}

/// Named series of `(x, y)` points sharing one pair of axes.
pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let points = series.iter().flat_map(|(_, s)| s.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let pad = 0.05 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    header(&mut out, title);
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{:.3}</text>"#, sx(fx), HEIGHT - MARGIN + 16.0, fx);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{:.3}</text>"#, MARGIN - 4.0, sy(fy) + 4.0, fy);
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 12.0, escape(x_label));
    let _ = writeln!(
        out,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    for (i, (name, pts)) in series.iter().enumerate() {
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#, colour(i), path.join(" "));
        let ly = MARGIN + 14.0 + 16.0 * i as f64;
        let lx = WIDTH - MARGIN - 90.0;
        let _ = writeln!(out, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}" stroke-width="2"/>"#, lx + 18.0, colour(i));
        let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, lx + 24.0, ly + 4.0, escape(name));
    }
    out.push_str("</svg>\n");
    out
}

/// One arrow per visible class from a common origin, labelled by frequency,
/// and the coherent sum as a thick dashed arrow. When `parents` maps class
/// strings to a group index the arrows are coloured by group.
pub fn vector_plot(report: &MechanismReport<f64>, parents: Option<&BTreeMap<String, usize>>) -> String {
    let visible: Vec<_> = report.visible().collect();
    let reach = visible
        .iter()
        .map(|c| c.magnitude)
        .chain(std::iter::once(report.coherent_sum.norm()))
        .fold(1e-12, f64::max);
    let cx = WIDTH / 2.0;
    let cy = HEIGHT / 2.0 + 10.0;
    let scale = (HEIGHT / 2.0 - MARGIN) / reach;
    let to_svg = |re: f64, im: f64| (cx + re * scale, cy - im * scale);

    let mut out = String::new();
    header(&mut out, &format!("{} ({})", report.element_label(), report.mode));
    let _ = writeln!(
        out,
        r#"<defs><marker id="head" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="6" markerHeight="6" orient="auto-start-reverse"><path d="M0,0 L10,5 L0,10 z" fill="context-stroke"/></marker></defs>"#
    );
    let _ = writeln!(out, r##"<line x1="{}" y1="{cy}" x2="{}" y2="{cy}" stroke="#bbb"/>"##, MARGIN, WIDTH - MARGIN);
    let _ = writeln!(out, r##"<line x1="{cx}" y1="{}" x2="{cx}" y2="{}" stroke="#bbb"/>"##, MARGIN - 10.0, HEIGHT - MARGIN + 20.0);
    let _ = writeln!(out, r#"<text x="{}" y="{}">Re</text>"#, WIDTH - MARGIN + 4.0, cy + 4.0);
    let _ = writeln!(out, r#"<text x="{}" y="{}">Im</text>"#, cx + 4.0, MARGIN - 12.0);
    for (i, c) in visible.iter().enumerate() {
        let (x, y) = to_svg(c.amplitude.re, c.amplitude.im);
        let label = c.class.display(&report.labels);
        let stroke = match parents {
            Some(map) => colour(map.get(&label).copied().unwrap_or(PALETTE.len() - 1)),
            None => colour(i),
        };
        let _ = writeln!(
            out,
            r#"<line x1="{cx}" y1="{cy}" x2="{x:.2}" y2="{y:.2}" stroke="{stroke}" stroke-width="1.6" marker-end="url(#head)"><title>{}</title></line>"#,
            escape(&label)
        );
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" fill="{stroke}">{}</text>"#, x + 4.0, y - 4.0, c.frequency());
    }
    let (x, y) = to_svg(report.coherent_sum.re, report.coherent_sum.im);
    let _ = writeln!(
        out,
        r#"<line x1="{cx}" y1="{cy}" x2="{x:.2}" y2="{y:.2}" stroke="black" stroke-width="3" stroke-dasharray="6 3" marker-end="url(#head)"><title>Sum</title></line>"#
    );
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" font-weight="bold">Sum</text>"#, x + 4.0, y + 14.0);
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_plot_has_one_polyline_per_series() {
        let series = vec![
            ("a".to_string(), vec![(0.0, 0.0), (1.0, 1.0)]),
            ("b<c".to_string(), vec![(0.0, 1.0), (1.0, 0.0)]),
        ];
        let svg = line_plot("P", "t", "population", &series);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("b&lt;c"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn empty_plot_is_well_formed() {
        let svg = line_plot("empty", "x", "y", &[]);
        assert!(svg.starts_with("<svg"));
    }
}
