use std::fmt::Write;

use igam::gam::ShapeView;

const W: f64 = 640.0;
const H: f64 = 360.0;
const PAD: f64 = 40.0;

/// Shape polyline over a density histogram, as a standalone SVG document.
pub fn shape_plot(view: &ShapeView, counts: &[u64]) -> String {
    let (x0, x1) = span(&view.anchors);
    let (y0, y1) = span(&view.values);
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let max = counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    for (j, &c) in counts.iter().enumerate() {
        let (Some(&a), Some(&b)) = (view.anchors.get(j), view.anchors.get(j + 1)) else {
            continue;
        };
        let h = c as f64 / max * (H - 2.0 * PAD) * 0.3;
        let _ = writeln!(
            s,
            r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{h:.2}" fill="#cfd8e3"/>"##,
            sx(a),
            H - PAD - h,
            (sx(b) - sx(a)).max(0.5)
        );
    }
    let pts: Vec<String> = view
        .anchors
        .iter()
        .zip(&view.values)
        .map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y)))
        .collect();
    let _ = writeln!(s, r##"<polyline points="{}" fill="none" stroke="#1f4e79" stroke-width="2"/>"##, pts.join(" "));
    let _ = writeln!(
        s,
        r#"<text x="{PAD}" y="{:.0}" font-family="sans-serif" font-size="14">{}</text>"#,
        PAD * 0.6,
        escape(&view.feature)
    );
    let _ = writeln!(
        s,
        r#"<text x="{PAD}" y="{:.0}" font-family="sans-serif" font-size="11">x [{x0:.4}, {x1:.4}]  y [{y0:.4}, {y1:.4}]</text>"#,
        H - PAD * 0.3
    );
    s.push_str("</svg>\n");
    s
}

fn span(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo.is_finite() && hi.is_finite()) {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
