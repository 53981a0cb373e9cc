//! Minimal SVG plots. CSVs carry the data; these are for a quick look.

use std::fmt::Write;

use offload_core::HeatmapMatrix;

const CELL_W: f64 = 90.0;
const CELL_H: f64 = 40.0;
const MARGIN_L: f64 = 90.0;
const MARGIN_T: f64 = 40.0;

/// White (0) to dark green (1).
fn shade(v: f64) -> String {
    let v = v.clamp(0.0, 1.0);
    let r = (255.0 - 220.0 * v) as u8;
    let g = (255.0 - 120.0 * v) as u8;
    let b = (255.0 - 200.0 * v) as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Availability grid: one row per delay constraint, one column per camera
/// count labelled with its total rate.
pub fn heatmap(m: &HeatmapMatrix, title: &str) -> String {
    let cols = m.camera_rates_mbps.len();
    let rows = m.d_max_ms.len();
    let w = MARGIN_L + CELL_W * cols as f64 + 20.0;
    let h = MARGIN_T + CELL_H * rows as f64 + 50.0;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="13">"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-weight="bold">{}</text>"#, w / 2.0, escape(title));
    for (r, (d, row)) in m.d_max_ms.iter().zip(&m.cells).enumerate() {
        let y = MARGIN_T + CELL_H * r as f64;
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{d} ms</text>"#, MARGIN_L - 8.0, y + CELL_H / 2.0 + 4.0);
        for (c, v) in row.iter().enumerate() {
            let x = MARGIN_L + CELL_W * c as f64;
            let text = if *v > 0.6 { "white" } else { "black" };
            let _ = writeln!(
                s,
                r#"<rect x="{x}" y="{y}" width="{CELL_W}" height="{CELL_H}" fill="{}" stroke="white"/><text x="{}" y="{}" text-anchor="middle" fill="{text}">{:.1}%</text>"#,
                shade(*v),
                x + CELL_W / 2.0,
                y + CELL_H / 2.0 + 4.0,
                v * 100.0
            );
        }
    }
    let y = MARGIN_T + CELL_H * rows as f64 + 18.0;
    for c in 0..cols {
        let x = MARGIN_L + CELL_W * (c as f64 + 0.5);
        let _ = writeln!(s, r#"<text x="{x}" y="{y}" text-anchor="middle">{} Mbps</text>"#, m.required_mbps(c + 1));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">required uplink rate</text>"#, MARGIN_L + CELL_W * cols as f64 / 2.0, y + 20.0);
    s.push_str("</svg>\n");
    s
}

const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Step CDFs sharing one x axis.
pub fn cdf(curves: &[(&str, &[(f64, f64)])], x_label: &str, title: &str) -> String {
    let (w, h) = (560.0, 360.0);
    let (l, r, t, b) = (60.0, 20.0, 36.0, 50.0);
    let x_max = curves
        .iter()
        .flat_map(|(_, c)| c.iter().map(|p| p.0))
        .fold(0.0f64, f64::max)
        .max(1e-9);
    let px = |x: f64| l + (w - l - r) * x / x_max;
    let py = |y: f64| h - b - (h - t - b) * y;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="13">"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-weight="bold">{}</text>"#, w / 2.0, escape(title));
    let _ = writeln!(s, r#"<path d="M{l} {t} V{} H{}" fill="none" stroke="black"/>"#, h - b, w - r);
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{f}</text>"#, l - 6.0, py(f) + 4.0);
        let xv = x_max * f;
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{xv:.1}</text>"#, px(xv), h - b + 16.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (l + w - r) / 2.0, h - 10.0, escape(x_label));
    for (i, (name, c)) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut d = format!("M{:.2} {:.2}", px(0.0), py(0.0));
        let mut prev = 0.0;
        for (x, f) in c.iter() {
            let _ = write!(d, " H{:.2} V{:.2}", px(*x), py(*f));
            prev = *f;
        }
        let _ = write!(d, " H{:.2} V{:.2}", px(x_max), py(prev));
        let _ = writeln!(s, r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>"#);
        let ly = t + 16.0 * i as f64 + 8.0;
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            w - r - 120.0,
            w - r - 100.0,
            w - r - 94.0,
            ly + 4.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
