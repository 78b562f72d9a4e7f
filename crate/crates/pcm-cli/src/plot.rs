//! Minimal SVG line plots regenerated from the emitted tables. These are
//! conveniences for eyeballing results, never acceptance artifacts.

use std::path::{Path, PathBuf};

use anyhow::Result;

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 48.0;

pub struct Series<'a> {
    pub label: &'a str,
    pub color: &'a str,
    pub points: Vec<(f64, f64)>,
}

/// Writes one SVG with shared axes for all series.
pub fn line_plot(
    path: PathBuf,
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[Series],
) -> Result<PathBuf> {
    let all: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .collect();
    let finite = |v: f64| v.is_finite();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in all.iter().filter(|(x, y)| finite(*x) && finite(*y)) {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x0 < x1) {
        x1 = x0 + 1.0;
    }
    if !(y0 < y1) {
        y1 = y0 + 1.0;
    }
    let pad = 0.05 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
    let sy = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">{}</text>\n",
        W / 2.0,
        title
    ));
    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n<line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n",
        m = MARGIN,
        r = W - MARGIN,
        t = MARGIN,
        b = H - MARGIN
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
        W / 2.0,
        H - 12.0,
        x_label
    ));
    svg.push_str(&format!(
        "<text x=\"14\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 {})\">{}</text>\n",
        H / 2.0,
        H / 2.0,
        y_label
    ));
    for (x, label) in [(x0, format!("{x0:.6}")), (x1, format!("{x1:.6}"))] {
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">{}</text>\n",
            sx(x),
            H - MARGIN + 16.0,
            label
        ));
    }
    for (y, label) in [(y0, format!("{y0:.6}")), (y1, format!("{y1:.6}"))] {
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">{}</text>\n",
            MARGIN - 6.0,
            sy(y) + 4.0,
            label
        ));
    }
    for (i, s) in series.iter().enumerate() {
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            s.color,
            pts.join(" ")
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"{}\">{}</text>\n",
            W - MARGIN - 120.0,
            MARGIN + 16.0 + 14.0 * i as f64,
            s.color,
            s.label
        ));
    }
    svg.push_str("</svg>\n");
    std::fs::write(&path, svg)?;
    Ok(path)
}

pub fn spectrum_plot(
    out_dir: &Path,
    freqs: &[f64],
    mag_xy: &[f64],
    mag_yy: &[f64],
    pcr_y: &[f64],
) -> Result<PathBuf> {
    let zip = |ys: &[f64]| freqs.iter().copied().zip(ys.iter().copied()).collect();
    line_plot(
        out_dir.join("spectrum.svg"),
        "Reflection spectrum",
        "frequency (GHz)",
        "magnitude / ratio",
        &[
            Series {
                label: "|r_xy|",
                color: "#c0392b",
                points: zip(mag_xy),
            },
            Series {
                label: "|r_yy|",
                color: "#2980b9",
                points: zip(mag_yy),
            },
            Series {
                label: "PCR (y)",
                color: "#27ae60",
                points: zip(pcr_y),
            },
        ],
    )
}

pub fn reduction_plot(out_dir: &Path, freqs: &[f64], delta_db: &[f64]) -> Result<PathBuf> {
    line_plot(
        out_dir.join("reduction.svg"),
        "Broadside reduction vs. conducting plate",
        "frequency (GHz)",
        "delta (dB)",
        &[Series {
            label: "delta",
            color: "#8e44ad",
            points: freqs
                .iter()
                .copied()
                .zip(delta_db.iter().copied())
                .collect(),
        }],
    )
}
