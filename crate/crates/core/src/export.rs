//! CSV and SVG output for point clouds and radius samples.
//!
//! Floats are written with Rust's shortest round-trip formatting, so equal
//! inputs give byte-identical files.

use std::fmt::Write as _;
use std::io::{self, Write};

use num_complex::Complex64;

use crate::montecarlo::TrialStats;
use crate::spectral::SpectrumResult;

pub const SPECTRUM_HEADER: &str = "re,im,block_index,root_index";

/// Eigenvalues scaled by `scale`, one row per eigenvalue. Structural zeros
/// carry block index `-1`.
pub fn write_spectrum_csv<W: Write>(mut w: W, spectrum: &SpectrumResult, scale: f64) -> io::Result<()> {
    writeln!(w, "{SPECTRUM_HEADER}")?;
    for (z, o) in spectrum.eigenvalues.iter().zip(&spectrum.origins) {
        let p = z * scale;
        writeln!(w, "{},{},{},{}", p.re, p.im, o.block_label(), o.root)?;
    }
    Ok(())
}

/// Rows of `(point, block label, root index)` under the spectrum header.
pub fn write_labelled_points_csv<W: Write>(mut w: W, rows: &[(Complex64, i64, usize)]) -> io::Result<()> {
    writeln!(w, "{SPECTRUM_HEADER}")?;
    for (z, block, root) in rows {
        writeln!(w, "{},{},{},{}", z.re, z.im, block, root)?;
    }
    Ok(())
}

/// Points with a free-form tag column, e.g. law samples next to an ESD.
pub fn write_tagged_points_csv<W: Write>(mut w: W, points: &[Complex64], tag: &str) -> io::Result<()> {
    writeln!(w, "re,im,tag")?;
    for z in points {
        writeln!(w, "{},{},{}", z.re, z.im, tag)?;
    }
    Ok(())
}

/// Per-trial spectral radii from a Gumbel report.
pub fn write_radii_csv<W: Write>(mut w: W, trials: &[TrialStats]) -> io::Result<()> {
    writeln!(w, "trial,seed,spectral_radius,standardized")?;
    for t in trials {
        let sp = t.spectral_radius.map(|v| v.to_string()).unwrap_or_default();
        let z = t.standardized.map(|v| v.to_string()).unwrap_or_default();
        writeln!(w, "{},{},{},{}", t.trial, t.seed, sp, z)?;
    }
    Ok(())
}

const SVG_SIZE: f64 = 600.0;
const SVG_MARGIN: f64 = 40.0;

/// Static scatter of `points` in the square `[-extent, extent]^2` with axes,
/// ticks at every unit, and one circle per point. Points outside the box are
/// dropped.
pub fn svg_scatter(points: &[Complex64], extent: f64, title: &str) -> String {
    let extent = if extent > 0.0 { extent } else { 1.0 };
    let plot = SVG_SIZE - 2.0 * SVG_MARGIN;
    let to_px = |x: f64| SVG_MARGIN + (x + extent) / (2.0 * extent) * plot;
    let to_py = |y: f64| SVG_MARGIN + (extent - y) / (2.0 * extent) * plot;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_SIZE}" height="{SVG_SIZE}" viewBox="0 0 {SVG_SIZE} {SVG_SIZE}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        SVG_SIZE / 2.0,
        escape(title)
    );
    let (x0, y0) = (to_px(0.0), to_py(0.0));
    let (lo, hi) = (SVG_MARGIN, SVG_SIZE - SVG_MARGIN);
    let _ = writeln!(
        s,
        r#"<rect x="{lo}" y="{lo}" width="{plot}" height="{plot}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(s, r#"<line x1="{lo}" y1="{y0}" x2="{hi}" y2="{y0}" stroke="gray"/>"#);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{lo}" x2="{x0}" y2="{hi}" stroke="gray"/>"#);
    let ticks = extent.floor() as i64;
    for t in -ticks..=ticks {
        let (px, py) = (to_px(t as f64), to_py(t as f64));
        let _ = writeln!(
            s,
            r#"<line x1="{px}" y1="{}" x2="{px}" y2="{}" stroke="black"/><text x="{px}" y="{}" font-family="sans-serif" font-size="10" text-anchor="middle">{t}</text>"#,
            hi,
            hi + 5.0,
            hi + 17.0
        );
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{py}" x2="{}" y2="{py}" stroke="black"/><text x="{}" y="{}" font-family="sans-serif" font-size="10" text-anchor="end">{t}</text>"#,
            lo - 5.0,
            lo,
            lo - 8.0,
            py + 3.0
        );
    }
    for z in points {
        if z.re.abs() <= extent && z.im.abs() <= extent {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="1.2" fill="steelblue" fill-opacity="0.5"/>"#,
                to_px(z.re),
                to_py(z.im)
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{formula_spectrum, InputSequence};

    #[test]
    fn spectrum_csv_rows() {
        let a = InputSequence::new(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let s = formula_spectrum(&a, 2, 6).unwrap();
        let mut buf = Vec::new();
        write_spectrum_csv(&mut buf, &s, 1.0).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], SPECTRUM_HEADER);
        assert_eq!(lines.len(), 7);
        assert_eq!(lines.iter().filter(|l| l.contains(",-1,")).count(), 3);
    }

    #[test]
    fn svg_has_one_circle_per_visible_point() {
        let pts = [Complex64::new(0.5, 0.5), Complex64::new(-0.2, 0.9), Complex64::new(3.0, 0.0)];
        let svg = svg_scatter(&pts, 1.5, "a < b");
        assert_eq!(svg.matches("<circle").count(), 2);
        assert!(svg.contains("a &lt; b"));
        assert!(svg.ends_with("</svg>\n"));
    }
}
