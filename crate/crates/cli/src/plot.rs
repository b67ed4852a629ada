//! Minimal static SVG charts derived from a report.

use std::fmt::Write as _;

use piterbarg::harness::ComparisonReport;

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 50.0;

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        let (x0, x1) = if x1 > x0 { (x0, x1) } else { (x0 - 0.5, x0 + 0.5) };
        let (y0, y1) = if y1 > y0 { (y0, y1) } else { (y0 - 0.5, y0 + 0.5) };
        Self { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        PAD + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * PAD)
    }

    fn py(&self, y: f64) -> f64 {
        H - PAD - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * PAD)
    }
}

fn open(title: &str, xlabel: &str, ylabel: &str, f: &Frame) -> String {
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{title}</text>"#,
        W / 2.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<path d="M{PAD} {} H{} M{PAD} {} V{PAD}" stroke="black" fill="none"/>"#,
        H - PAD,
        W - PAD,
        H - PAD
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{xlabel}</text>"#,
        W / 2.0,
        H - 12.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="14" y="{}" font-size="12" transform="rotate(-90 14 {})" text-anchor="middle">{ylabel}</text>"#,
        H / 2.0,
        H / 2.0
    )
    .unwrap();
    for (v, anchor_x) in [(f.x0, true), (f.x1, true), (f.y0, false), (f.y1, false)] {
        if anchor_x {
            writeln!(
                s,
                r#"<text x="{:.2}" y="{}" text-anchor="middle" font-size="10">{v:.3}</text>"#,
                f.px(v),
                H - PAD + 14.0
            )
            .unwrap();
        } else {
            writeln!(
                s,
                r#"<text x="{}" y="{:.2}" text-anchor="end" font-size="10">{v:.3}</text>"#,
                PAD - 4.0,
                f.py(v) + 3.0
            )
            .unwrap();
        }
    }
    s
}

fn polyline(f: &Frame, pts: &[(f64, f64)], color: &str) -> String {
    let coords: Vec<String> = pts
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(y)))
        .collect();
    format!(
        "<polyline class=\"line\" points=\"{}\" stroke=\"{color}\" fill=\"none\"/>\n",
        coords.join(" ")
    )
}

fn marker(f: &Frame, x: f64, y: f64, color: &str) -> String {
    format!(
        "<circle class=\"marker\" cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>\n",
        f.px(x),
        f.py(y)
    )
}

/// Sup-distance against `ln T`, one marker per horizon.
pub fn distance_plot(report: &ComparisonReport) -> String {
    let pts: Vec<(f64, f64)> = report
        .horizons
        .iter()
        .map(|h| (h.t.ln(), h.sup_distance))
        .collect();
    let xmin = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let xmax = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let ymax = pts.iter().map(|p| p.1).fold(0.0, f64::max);
    let f = Frame::new(xmin, xmax, 0.0, ymax * 1.1);
    let mut s = open("sup distance vs ln T", "ln T", "sup distance", &f);
    if pts.len() > 1 {
        s.push_str(&polyline(&f, &pts, "steelblue"));
    }
    for &(x, y) in &pts {
        s.push_str(&marker(&f, x, y, "steelblue"));
    }
    s.push_str("</svg>\n");
    s
}

/// Empirical (markers) and theoretical (line) CDF against lattice index,
/// one panel per horizon stacked in a single file.
pub fn cdf_plot(report: &ComparisonReport) -> String {
    let mut out = String::new();
    let n = report.horizons.len().max(1);
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{}" viewBox="0 0 {W} {}">"#,
        H * n as f64,
        H * n as f64
    )
    .unwrap();
    for (i, h) in report.horizons.iter().enumerate() {
        let m = h.points.len().max(1) as f64;
        let f = Frame::new(0.0, m - 1.0, 0.0, 1.0);
        let mut panel = open(
            &format!("T = {:.4}: empirical vs theoretical", h.t),
            "lattice point",
            "CDF",
            &f,
        );
        let theory: Vec<(f64, f64)> = h
            .points
            .iter()
            .map(|p| (p.index as f64, p.theoretical))
            .collect();
        panel.push_str(&polyline(&f, &theory, "black"));
        for p in &h.points {
            panel.push_str(&marker(&f, p.index as f64, p.empirical, "crimson"));
        }
        // nest the panel: drop its own closing tag, shift vertically
        writeln!(out, r#"<g transform="translate(0 {})">"#, H * i as f64).unwrap();
        out.push_str(&panel.replacen("<svg ", "<svg y=\"0\" ", 1));
        out.push_str("</svg>\n</g>\n");
    }
    out.push_str("</svg>\n");
    out
}
