//! Static SVG line chart of a scan: `gamma_hat` against `z_arg`, one curve per
//! (ε, method), with each ε's lower bound as a dashed horizontal line.

use std::fmt::Write as _;

use crate::table::ScanRow;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders the chart; rows are grouped in first-seen order.
pub fn render(rows: &[ScanRow], title: &str) -> String {
    let mut series: Vec<((u64, &'static str), Vec<&ScanRow>)> = Vec::new();
    for r in rows {
        let key = (r.epsilon.to_bits(), r.method.as_str());
        match series.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(r),
            None => series.push((key, vec![r])),
        }
    }
    let mut epsilons: Vec<(f64, f64)> = Vec::new();
    for r in rows {
        if !epsilons.iter().any(|(e, _)| e.to_bits() == r.epsilon.to_bits()) {
            epsilons.push((r.epsilon, r.bound));
        }
    }

    let values = rows.iter().flat_map(|r| [r.gamma_hat, r.bound]).filter(|v| v.is_finite());
    let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    if hi - lo < 1e-9 {
        lo -= 0.5;
        hi += 0.5;
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let x = |t: f64| LEFT + t * plot_w;
    let y = |v: f64| TOP + (hi - v) / (hi - lo) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + plot_w / 2.0,
        escape(title)
    );

    // axes
    let _ = writeln!(
        svg,
        r#"<path d="M{l} {t} L{l} {b} L{r} {b}" fill="none" stroke="black"/>"#,
        l = LEFT,
        t = TOP,
        b = TOP + plot_h,
        r = LEFT + plot_w
    );
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{px:.2}" y1="{b}" x2="{px:.2}" y2="{b2}" stroke="black"/><text x="{px:.2}" y="{ty}" text-anchor="middle">{t}</text>"#,
            px = x(t),
            b = TOP + plot_h,
            b2 = TOP + plot_h + 5.0,
            ty = TOP + plot_h + 18.0
        );
        let v = lo + (hi - lo) * t;
        let _ = writeln!(
            svg,
            r#"<line x1="{l2}" y1="{py:.2}" x2="{l}" y2="{py:.2}" stroke="black"/><text x="{tx}" y="{ty:.2}" text-anchor="end">{v:.3}</text>"#,
            l = LEFT,
            l2 = LEFT - 5.0,
            py = y(v),
            tx = LEFT - 8.0,
            ty = y(v) + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">arg z / 2π</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{cy}" text-anchor="middle" transform="rotate(-90 16 {cy})">Lyapunov exponent</text>"#,
        cy = TOP + plot_h / 2.0
    );

    let color_of = |eps: f64| {
        let idx = epsilons.iter().position(|(e, _)| e.to_bits() == eps.to_bits()).unwrap_or(0);
        PALETTE[idx % PALETTE.len()]
    };

    for &(eps, bound) in &epsilons {
        if bound.is_finite() {
            let _ = writeln!(
                svg,
                r#"<line x1="{x1}" y1="{py:.2}" x2="{x2}" y2="{py:.2}" stroke="{c}" stroke-dasharray="6 4"/>"#,
                x1 = LEFT,
                x2 = LEFT + plot_w,
                py = y(bound),
                c = color_of(eps)
            );
        }
    }

    let mut legend_y = TOP + 10.0;
    for ((bits, method), pts) in &series {
        let eps = f64::from_bits(*bits);
        let mut pts = pts.clone();
        pts.sort_by(|a, b| a.z_arg.total_cmp(&b.z_arg));
        let coords: Vec<String> = pts
            .iter()
            .filter(|r| r.gamma_hat.is_finite())
            .map(|r| format!("{:.2},{:.2}", x(r.z_arg), y(r.gamma_hat)))
            .collect();
        let dash = if *method == "phase" { r#" stroke-dasharray="2 2""# } else { "" };
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"{dash}/>"#,
            coords.join(" "),
            color_of(eps)
        );
        let lx = LEFT + plot_w + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{legend_y}" x2="{}" y2="{legend_y}" stroke="{}" stroke-width="2"{dash}/><text x="{}" y="{}">ε={eps} {method}</text>"#,
            lx + 20.0,
            color_of(eps),
            lx + 26.0,
            legend_y + 4.0
        );
        legend_y += 18.0;
    }
    let lx = LEFT + plot_w + 12.0;
    let _ = writeln!(
        svg,
        r#"<line x1="{lx}" y1="{legend_y}" x2="{}" y2="{legend_y}" stroke="gray" stroke-dasharray="6 4"/><text x="{}" y="{}">lower bound</text>"#,
        lx + 20.0,
        lx + 26.0,
        legend_y + 4.0
    );
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use szego_core::Method;

    #[test]
    fn one_polyline_per_series() {
        let rows: Vec<ScanRow> = [0.3, 0.5]
            .iter()
            .flat_map(|&eps| {
                (0..4).map(move |m| ScanRow::new(m as f64 / 4.0, eps, 0.0, 10, Method::Birkhoff, 1.0 - eps + 0.01 * m as f64, 0.5 - eps))
            })
            .collect();
        let svg = render(&rows, "scan <test>");
        assert!(svg.starts_with("<?xml"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("stroke-dasharray=\"6 4\"").count(), 3);
        assert!(svg.contains("scan &lt;test&gt;"));
    }

    #[test]
    fn empty_scan_still_renders() {
        let svg = render(&[], "empty");
        assert!(svg.contains("</svg>"));
    }
}
