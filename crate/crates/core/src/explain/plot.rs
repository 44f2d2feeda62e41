//! Beeswarm summary plot as a standalone SVG, plus its CSV twin.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};

use super::SummaryData;

const JITTER_SEED: u64 = 0x5eed_beef;
const ROW_H: f64 = 30.0;
const LEFT: f64 = 140.0;
const PLOT_W: f64 = 520.0;
const RIGHT: f64 = 110.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 60.0;

const LOW: (f64, f64, f64) = (0.0, 138.0, 255.0);
const HIGH: (f64, f64, f64) = (255.0, 0.0, 82.0);

fn ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let c = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", c(LOW.0, HIGH.0), c(LOW.1, HIGH.1), c(LOW.2, HIGH.2))
}

/// Rows ordered by importance; x = phi, colour from blue (low feature value) to red (high).
pub fn beeswarm_svg(data: &SummaryData) -> String {
    let n_rows = data.features.len();
    let height = TOP + ROW_H * n_rows as f64 + BOTTOM;
    let width = LEFT + PLOT_W + RIGHT;

    let max_abs = data
        .features
        .iter()
        .flat_map(|f| f.points.iter().map(|p| p.phi.abs()))
        .fold(0.0, f64::max);
    let half = if max_abs > 0.0 { max_abs * 1.05 } else { 1.0 };
    let x_of = |phi: f64| LEFT + PLOT_W * (phi + half) / (2.0 * half);

    let (vmin, vmax) = data
        .features
        .iter()
        .flat_map(|f| f.points.iter().map(|p| p.value_std))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let t_of = |v: f64| if vmax > vmin { (v - vmin) / (vmax - vmin) } else { 0.5 };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let zero = x_of(0.0);
    let bottom = TOP + ROW_H * n_rows as f64;
    let _ = writeln!(
        s,
        r##"<line x1="{zero:.2}" y1="{TOP:.2}" x2="{zero:.2}" y2="{bottom:.2}" stroke="#999999" stroke-width="1"/>"##
    );
    for (rank, f) in data.features.iter().enumerate() {
        let cy = TOP + ROW_H * (rank as f64 + 0.5);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT:.2}" y1="{cy:.2}" x2="{:.2}" y2="{cy:.2}" stroke="#eeeeee" stroke-dasharray="2,3"/>"##,
            LEFT + PLOT_W
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 8.0,
            cy + 4.0,
            f.name
        );
        let mut rng = rng_from_seed(derive_seed(JITTER_SEED, rank as u64));
        for p in &f.points {
            let jitter = rng.random_range(-0.35..0.35) * ROW_H;
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{}" fill-opacity="0.85"/>"#,
                x_of(p.phi),
                cy + jitter,
                ramp(t_of(p.value_std))
            );
        }
    }
    // x axis
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT:.2}" y1="{bottom:.2}" x2="{:.2}" y2="{bottom:.2}" stroke="black"/>"#,
        LEFT + PLOT_W
    );
    for k in -2..=2 {
        let v = half * k as f64 / 2.0;
        let x = x_of(v);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{bottom:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#,
            bottom + 4.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{v:.3}</text>"#,
            bottom + 18.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">SHAP value (impact on P(Good))</text>"#,
        LEFT + PLOT_W / 2.0,
        bottom + 40.0
    );
    // colour bar
    let bx = LEFT + PLOT_W + 40.0;
    let steps = 20;
    let step_h = ROW_H * n_rows as f64 / steps as f64;
    for i in 0..steps {
        let y = TOP + step_h * i as f64;
        let t = 1.0 - (i as f64 + 0.5) / steps as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{bx:.2}" y="{y:.2}" width="12" height="{:.2}" fill="{}"/>"#,
            step_h + 0.5,
            ramp(t)
        );
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">High</text>"#, bx + 16.0, TOP + 10.0);
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">Low</text>"#, bx + 16.0, bottom);
    let _ = writeln!(
        s,
        r#"<text transform="translate({:.2},{:.2}) rotate(90)" text-anchor="middle">Feature value</text>"#,
        bx + 50.0,
        (TOP + bottom) / 2.0
    );
    s.push_str("</svg>\n");
    s
}

/// One row per plotted point: `feature,rank,instance_id,phi,feature_value_std`.
pub fn beeswarm_csv(data: &SummaryData) -> String {
    let mut out = String::from("feature,rank,instance_id,phi,feature_value_std\n");
    for (rank, f) in data.features.iter().enumerate() {
        for p in &f.points {
            let _ = writeln!(out, "{},{},{},{},{}", f.name, rank + 1, p.instance_id, p.phi, p.value_std);
        }
    }
    out
}

/// Writes the SVG to `path` and the CSV twin next to it; returns the CSV path.
pub fn render_beeswarm(data: &SummaryData, path: &Path) -> Result<PathBuf> {
    if data.n_instances() == 0 {
        return Err(Error::EmptyEvaluation);
    }
    std::fs::write(path, beeswarm_svg(data)).map_err(|e| Error::io(path, e))?;
    let csv_path = path.with_extension("csv");
    std::fs::write(&csv_path, beeswarm_csv(data)).map_err(|e| Error::io(&csv_path, e))?;
    Ok(csv_path)
}
