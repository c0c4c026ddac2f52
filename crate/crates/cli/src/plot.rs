//! Log-log convergence plot written as plain SVG.

use std::fmt::Write;

use polyapprox::experiments::ScalingReport;

const W: f64 = 640.0;
const H: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 56.0;

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (H - TOP - BOTTOM)
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    let pad = 0.06 * (hi - lo).max(1e-6);
    (lo - pad, hi + pad)
}

/// Mean deviation against `N` on log axes, with the least-squares line and a
/// line of the reference slope through the centroid of the data.
pub fn scaling_svg(report: &ScalingReport) -> String {
    let xs: Vec<f64> = report
        .rows
        .iter()
        .map(|r| (r.n_points as f64).log10())
        .collect();
    let ys: Vec<f64> = report.rows.iter().map(|r| r.mean_delta_s.log10()).collect();
    let (xmin, xmax) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
            (a.min(x), b.max(x))
        });
    // The fit was done in natural logs; slope is base-independent.
    let slope = report.slope.slope;
    let intercept = report.slope.intercept / std::f64::consts::LN_10;
    let cx = xs.iter().sum::<f64>() / xs.len() as f64;
    let cy = ys.iter().sum::<f64>() / ys.len() as f64;
    let fit = |x: f64| intercept + slope * x;
    let reference = |x: f64| cy + report.expected_slope * (x - cx);
    let candidates =
        ys.iter()
            .copied()
            .chain([fit(xmin), fit(xmax), reference(xmin), reference(xmax)]);
    let (ymin, ymax) = candidates.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| {
        (a.min(y), b.max(y))
    });
    let (x0, x1) = padded(xmin, xmax);
    let (y0, y1) = padded(ymin, ymax);
    let f = Frame { x0, x1, y0, y1 };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        W - LEFT - RIGHT,
        H - TOP - BOTTOM
    );

    for r in &report.rows {
        let x = f.px((r.n_points as f64).log10());
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#,
            H - BOTTOM,
            H - BOTTOM + 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            H - BOTTOM + 18.0,
            r.n_points
        );
    }
    let mut k = y0.ceil() as i32;
    let mut labelled = 0;
    while (k as f64) <= y1 {
        let y = f.py(k as f64);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/>"#,
            LEFT - 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{k}</text>"#,
            LEFT - 8.0,
            y + 4.0
        );
        labelled += 1;
        k += 1;
    }
    if labelled == 0 {
        for v in [ymin, ymax] {
            let y = f.py(v);
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{:.2e}</text>"#,
                LEFT - 8.0,
                y + 4.0,
                10f64.powf(v)
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">N (log scale)</text>"#,
        LEFT + (W - LEFT - RIGHT) / 2.0,
        H - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">mean surface deviation (log scale)</text>"#,
        TOP + (H - TOP - BOTTOM) / 2.0,
        TOP + (H - TOP - BOTTOM) / 2.0
    );

    let line = |s: &mut String, g: &dyn Fn(f64) -> f64, style: &str| {
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" {style}/>"#,
            f.px(xmin),
            f.py(g(xmin)),
            f.px(xmax),
            f.py(g(xmax))
        );
    };
    line(
        &mut s,
        &reference,
        r##"stroke="#888888" stroke-dasharray="6 4""##,
    );
    line(&mut s, &fit, r##"stroke="#1f5fbf" stroke-width="1.5""##);
    for (x, y) in xs.iter().zip(&ys) {
        let _ = writeln!(
            s,
            r##"<circle cx="{:.2}" cy="{:.2}" r="4" fill="#c0392b"/>"##,
            f.px(*x),
            f.py(*y)
        );
    }

    let _ = writeln!(
        s,
        r##"<text x="{:.2}" y="{:.2}" fill="#1f5fbf">fit slope {:.3} ± {:.3}</text>"##,
        LEFT + 12.0,
        TOP + 18.0,
        report.slope.slope,
        report.slope.half_width
    );
    let _ = writeln!(
        s,
        r##"<text x="{:.2}" y="{:.2}" fill="#888888">reference slope {:.3}</text>"##,
        LEFT + 12.0,
        TOP + 34.0,
        report.expected_slope
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="20" text-anchor="middle">{} / {}</text>"#,
        W / 2.0,
        report.body,
        report.density
    );
    s.push_str("</svg>\n");
    s
}
