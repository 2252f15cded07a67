//! Dependency-free image writers: binary PGM frames and an SVG line chart.

use std::fmt::Write as _;

use noisemask::spectrum::{SpectrumProfile, LOW_BAND_EDGE, MID_BAND_EDGE};

/// P5 graymap with maxval 255.
pub fn pgm(width: usize, height: usize, pixels: &[u8]) -> Vec<u8> {
    assert_eq!(pixels.len(), width * height);
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

/// Masked cells black, visible cells white.
pub fn mask_pixels(bits: &[bool]) -> Vec<u8> {
    bits.iter().map(|&m| if m { 0 } else { 255 }).collect()
}

/// Min-max scaling to 0..=255; a constant frame comes out mid-gray.
pub fn value_pixels(values: &[f64]) -> Vec<u8> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return vec![128; values.len()];
    }
    values
        .iter()
        .map(|v| ((v - lo) / (hi - lo) * 255.0).round() as u8)
        .collect()
}

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 320.0;
const MARGIN: f64 = 48.0;

/// Radially averaged power (log10) against normalized frequency.
pub fn profile_svg(profile: &SpectrumProfile, title: &str) -> String {
    let points: Vec<(f64, f64)> = profile
        .bins
        .iter()
        .filter(|b| b.coefficients > 0 && b.mean_power > 0.0)
        .map(|b| (b.frequency, b.mean_power.log10()))
        .collect();
    let (mut lo, mut hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.1), hi.max(p.1)));
    if !(hi > lo) {
        lo -= 0.5;
        hi += 0.5;
    }
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let x = |f: f64| MARGIN + f / 0.5 * plot_w;
    let y = |p: f64| HEIGHT - MARGIN - (p - lo) / (hi - lo) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    for edge in [LOW_BAND_EDGE, MID_BAND_EDGE] {
        let _ = writeln!(
            svg,
            r##"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="#bbbbbb" stroke-dasharray="4 3"/>"##,
            x(edge),
            MARGIN,
            HEIGHT - MARGIN
        );
    }
    let _ = writeln!(
        svg,
        r#"<path d="M{m:.2} {t:.2} V{b:.2} H{r:.2}" fill="none" stroke="black"/>"#,
        m = MARGIN,
        t = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    for f in [0.0, 0.1, 0.2, 0.3, 0.4, 0.5] {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{f:.1}</text>"#,
            x(f),
            HEIGHT - MARGIN + 16.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="middle">frequency (cycles/cell)</text>"#,
        WIDTH / 2.0,
        HEIGHT - 10.0
    );
    for (v, label) in [(lo, lo), (hi, hi)] {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{label:.2}</text>"#,
            MARGIN - 4.0,
            y(v) + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 14 {:.1})">log10 power</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    let path: Vec<String> = points
        .iter()
        .map(|&(f, p)| format!("{:.2},{:.2}", x(f), y(p)))
        .collect();
    let _ = writeln!(
        svg,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#,
        path.join(" ")
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="crimson"/>"#,
        x(profile.centroid),
        MARGIN,
        HEIGHT - MARGIN
    );
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
