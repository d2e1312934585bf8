//! Standalone SVG band diagram: `ζ` on the abscissa, `τ²` on the ordinate.

use std::fmt::Write;

use crate::dispersion::DispersionSample;
use crate::error::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 48.0;

/// Ordinate ceiling: a multiple of the largest mid-band `τ²`.
fn y_ceiling(samples: &[DispersionSample]) -> f64 {
    let bands = samples.iter().map(|s| s.band).max().unwrap_or(0);
    let mut ceiling = 0.0_f64;
    for b in 0..=bands {
        let pts: Vec<&DispersionSample> = samples.iter().filter(|s| s.band == b).collect();
        if let Some(mid) = pts.get(pts.len() / 2) {
            ceiling = ceiling.max(mid.tau_sq);
        }
    }
    let top = samples.iter().map(|s| s.tau_sq).fold(0.0, f64::max);
    if ceiling > 0.0 {
        (4.0 * ceiling).min(top)
    } else if top > 0.0 {
        top
    } else {
        1.0
    }
}

/// Renders the sampled bands as polylines, with dashed vertical asymptotes at
/// `asymptotes` and dots on the abscissa at `dots`. Points above the ordinate
/// ceiling are clipped.
pub fn emit_band_svg(samples: &[DispersionSample], asymptotes: &[f64], dots: &[f64]) -> Result<String> {
    if samples.is_empty() {
        return Err(Error::Empty("dispersion samples"));
    }
    let x_max = samples
        .iter()
        .map(|s| s.zeta0)
        .chain(asymptotes.iter().copied())
        .fold(0.0_f64, f64::max)
        .max(1e-12)
        * 1.02;
    let y_max = y_ceiling(samples) * 1.05;
    let sx = |x: f64| MARGIN + (WIDTH - 2.0 * MARGIN) * x / x_max;
    let sy = |y: f64| HEIGHT - MARGIN - (HEIGHT - 2.0 * MARGIN) * y / y_max;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (x0, y0) = (sx(0.0), sy(0.0));
    let _ = writeln!(
        s,
        r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{:.2}" y2="{y0:.2}" stroke="black"/>"#,
        WIDTH - MARGIN
    );
    let _ = writeln!(
        s,
        r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{MARGIN:.2}" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="14" text-anchor="end">ζ</text>"#,
        WIDTH - MARGIN,
        y0 + 20.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="14">τ²</text>"#,
        x0 - 30.0,
        MARGIN - 8.0
    );
    for &a in asymptotes.iter().filter(|a| **a <= x_max) {
        let x = sx(a);
        let _ = writeln!(
            s,
            r#"<line class="asymptote" x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{MARGIN:.2}" stroke="gray" stroke-dasharray="4 3"/>"#
        );
    }
    let bands = samples.iter().map(|p| p.band).max().unwrap_or(0);
    for b in 0..=bands {
        let pts: Vec<(f64, f64)> = samples
            .iter()
            .filter(|p| p.band == b && p.tau_sq.is_finite() && p.tau_sq <= y_max && p.tau_sq >= 0.0)
            .map(|p| (sx(p.zeta0), sy(p.tau_sq)))
            .collect();
        match pts.len() {
            0 => {}
            1 => {
                let _ = writeln!(
                    s,
                    r#"<circle class="sample" cx="{:.2}" cy="{:.2}" r="3" fill="navy"/>"#,
                    pts[0].0, pts[0].1
                );
            }
            _ => {
                let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                let _ = writeln!(
                    s,
                    r#"<polyline class="band" points="{}" fill="none" stroke="navy" stroke-width="1.5"/>"#,
                    path.join(" ")
                );
            }
        }
    }
    for &d in dots.iter().filter(|d| **d <= x_max) {
        let _ = writeln!(
            s,
            r#"<circle class="zero-mean" cx="{:.2}" cy="{y0:.2}" r="3" fill="crimson"/>"#,
            sx(d)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}
