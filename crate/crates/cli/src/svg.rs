//! Fixed-layout SVG for ROC curves. Output depends only on the input points.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const TOP: f64 = 40.0;
const SIDE: f64 = 380.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

pub struct Curve {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// Plot coordinates of a `(fpr, tpr)` point.
pub fn to_plot(fpr: f64, tpr: f64) -> (f64, f64) {
    (LEFT + fpr * SIDE, TOP + (1.0 - tpr) * SIDE)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn polyline(points: &[(f64, f64)]) -> String {
    points
        .iter()
        .map(|&(f, t)| {
            let (x, y) = to_plot(f, t);
            format!("{x:.2},{y:.2}")
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn render(curves: &[Curve], title: Option<&str>) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    if let Some(t) = title {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
            LEFT + SIDE / 2.0,
            escape(t)
        );
    }
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{SIDE}" height="{SIDE}" fill="none" stroke="black"/>"#
    );
    for i in 0..=5 {
        let v = i as f64 / 5.0;
        let (x, _) = to_plot(v, 0.0);
        let (_, y) = to_plot(0.0, v);
        let bottom = TOP + SIDE;
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{bottom:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{v:.1}</text>"#,
            bottom + 5.0,
            bottom + 19.0
        );
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{v:.1}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">False positive rate</text>"#,
        LEFT + SIDE / 2.0,
        TOP + SIDE + 38.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">True positive rate</text>"#,
        TOP + SIDE / 2.0,
        TOP + SIDE / 2.0
    );
    let _ = writeln!(
        s,
        r##"<polyline class="diagonal" points="{}" fill="none" stroke="#999999" stroke-dasharray="4 4"/>"##,
        polyline(&[(0.0, 0.0), (1.0, 1.0)])
    );
    for (i, c) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            s,
            r#"<polyline class="roc" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            polyline(&c.points)
        );
    }
    let lx = LEFT + SIDE + 20.0;
    for (i, c) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let y = TOP + 10.0 + 20.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<g class="legend"><line x1="{lx:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text></g>"#,
            lx + 20.0,
            lx + 26.0,
            y + 4.0,
            escape(&c.name)
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_maps_to_plot_corners() {
        let svg = render(
            &[Curve {
                name: "d".into(),
                points: vec![(0.0, 0.0), (1.0, 1.0)],
            }],
            None,
        );
        assert!(svg.contains(r#"class="roc" points="70.00,420.00 450.00,40.00""#));
    }

    #[test]
    fn names_are_escaped() {
        let svg = render(
            &[Curve {
                name: "a<b".into(),
                points: vec![(0.0, 0.0)],
            }],
            Some("x&y"),
        );
        assert!(svg.contains("a&lt;b") && svg.contains("x&amp;y"));
    }
}
