//! Polar wavecrest plot as a standalone SVG document.

use std::fmt::Write as _;

use lambpolar_core::polar::PolarCurve;
use lambpolar_core::smm::Mode;

const SIZE: f64 = 520.0;
const MARGIN: f64 = 40.0;

fn colour(m: Mode) -> &'static str {
    match m {
        Mode::S0 => "#b03a2e",
        Mode::A0 => "#1f618d",
    }
}

/// Grid step giving four to eight rings.
fn ring_step(rmax: f64) -> f64 {
    let mag = 10f64.powf(rmax.log10().floor());
    [0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0].iter().map(|s| s * mag).find(|s| rmax / s <= 8.0).unwrap_or(10.0 * mag)
}

pub fn polar_plot(curves: &[PolarCurve], title: &str) -> String {
    let c = SIZE / 2.0;
    let rpx = c - MARGIN;
    let max = curves.iter().map(|k| k.max_cg()).fold(0.0, f64::max).max(1e-9);
    let step = ring_step(max);
    let rmax = (max / step).ceil() * step;
    let xy = |ray_deg: f64, v: f64| {
        let t = ray_deg.to_radians();
        (c + v / rmax * rpx * t.cos(), c - v / rmax * rpx * t.sin())
    };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{c}" y="18" text-anchor="middle" font-size="13">{title}</text>"#);
    let _ = writeln!(s, r##"<g stroke="#cccccc" fill="none">"##);
    let rings = (rmax / step).round() as usize;
    for k in 1..=rings {
        let _ = writeln!(s, r#"<circle cx="{c}" cy="{c}" r="{:.2}"/>"#, k as f64 * step / rmax * rpx);
    }
    for a in (0..360).step_by(30) {
        let (x, y) = xy(a as f64, rmax);
        let _ = writeln!(s, r#"<line x1="{c}" y1="{c}" x2="{x:.2}" y2="{y:.2}"/>"#);
    }
    s += "</g>\n";
    for a in (0..360).step_by(30) {
        let (x, y) = xy(a as f64, rmax * 1.07);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{a}°</text>"#, y + 4.0);
    }
    for k in 1..=rings {
        let v = k as f64 * step;
        let (x, y) = xy(80.0, v);
        let _ = writeln!(s, r##"<text x="{x:.2}" y="{y:.2}" fill="#777777">{v}</text>"##);
    }
    for (i, curve) in curves.iter().enumerate() {
        let pts: Vec<String> = curve
            .by_phi()
            .iter()
            .map(|p| {
                let (x, y) = xy(p.ray_deg, p.cg_m_per_ms);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let col = colour(curve.mode);
        let _ = writeln!(s, r#"<polygon points="{}" fill="none" stroke="{col}" stroke-width="1.5"/>"#, pts.join(" "));
        let ly = SIZE - 14.0 * (curves.len() - i) as f64;
        let _ = writeln!(
            s,
            r#"<text x="10" y="{ly}" fill="{col}">{} {} kHz, max {:.3} m/ms</text>"#,
            curve.mode.tag(),
            curve.freq * 1e-3,
            curve.max_cg()
        );
    }
    let _ = writeln!(s, r##"<text x="{}" y="{}" text-anchor="end" fill="#777777">|cg| in m/ms</text>"##, SIZE - 10.0, SIZE - 10.0);
    s += "</svg>\n";
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_steps() {
        assert_eq!(ring_step(9.9), 2.0);
        assert_eq!(ring_step(3.4), 0.5);
        assert_eq!(ring_step(12.0), 2.0);
    }
}
