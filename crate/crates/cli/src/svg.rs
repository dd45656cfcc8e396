//! Minimal SVG 1.1 line plots: one polyline, a frame and tick labels.

use std::fmt::Write as _;

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD: f64 = 60.0;

pub struct Plot<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    /// Plot `log10 y` (nonpositive values are dropped).
    pub log_y: bool,
}

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-300 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

pub fn line_plot(plot: &Plot, points: &[(f64, f64)]) -> String {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| x.is_finite() && y.is_finite() && (!plot.log_y || *y > 0.0))
        .map(|&(x, y)| (x, if plot.log_y { y.log10() } else { y }))
        .collect();
    let (x0, x1) = range(pts.iter().map(|p| p.0));
    let (y0, y1) = range(pts.iter().map(|p| p.1));
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" viewBox="0 0 {W} {H}">
<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>
<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>
<text x="{}" y="30" text-anchor="middle" font-size="16">{}</text>
<text x="{}" y="{}" text-anchor="middle" font-size="13">{}</text>
<text x="18" y="{}" text-anchor="middle" font-size="13" transform="rotate(-90 18 {})">{}</text>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD,
        W / 2.0,
        escape(plot.title),
        W / 2.0,
        H - 15.0,
        escape(plot.x_label),
        H / 2.0,
        H / 2.0,
        escape(&if plot.log_y { format!("log10 {}", plot.y_label) } else { plot.y_label.to_string() }),
    );
    for j in 0..=4 {
        let fx = x0 + (x1 - x0) * j as f64 / 4.0;
        let fy = y0 + (y1 - y0) * j as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="11">{}</text>
<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="11">{}</text>"#,
            sx(fx),
            H - PAD + 16.0,
            tick(fx),
            PAD - 6.0,
            sy(fy) + 4.0,
            tick(fy)
        );
    }
    let poly: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
    let _ = writeln!(
        s,
        r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#,
        poly.join(" ")
    );
    for &(x, y) in &pts {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="steelblue"/>"#, sx(x), sy(y));
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
