//! Minimal SVG plot emitters. Output is deterministic text; numbers are
//! written with fixed precision.

use std::fmt::Write as _;

use ndarray::Array2;

use super::raster::Colormap;
use crate::error::{Result, TerrainError};
use crate::grid::{Extent, GridSpec, Terrain};
use crate::obstacles::Obstacle;

const W: f64 = 480.0;
const H: f64 = 360.0;
const MARGIN: f64 = 48.0;

fn hex(c: [u8; 3]) -> String {
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo <= 0.0 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
    body: String,
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        Frame { x, y, body: String::new() }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (W - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        H - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (H - 2.0 * MARGIN)
    }

    fn finish(self, title: &str, xlabel: &str, ylabel: &str, grid: bool) -> String {
        let mut s = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
        );
        let _ = writeln!(s, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
        let _ = writeln!(s, "<title>{}</title>", escape(title));
        if grid {
            for k in 0..=4 {
                let gx = MARGIN + k as f64 * (W - 2.0 * MARGIN) / 4.0;
                let gy = MARGIN + k as f64 * (H - 2.0 * MARGIN) / 4.0;
                let _ = writeln!(
                    s,
                    "<line class=\"grid\" x1=\"{gx:.3}\" y1=\"{MARGIN}\" x2=\"{gx:.3}\" y2=\"{:.3}\" stroke=\"#dddddd\"/>",
                    H - MARGIN
                );
                let _ = writeln!(
                    s,
                    "<line class=\"grid\" x1=\"{MARGIN}\" y1=\"{gy:.3}\" x2=\"{:.3}\" y2=\"{gy:.3}\" stroke=\"#dddddd\"/>",
                    W - MARGIN
                );
            }
        }
        let _ = writeln!(
            s,
            "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
            W - 2.0 * MARGIN,
            H - 2.0 * MARGIN
        );
        s += &self.body;
        let _ = writeln!(
            s,
            "<text x=\"{MARGIN}\" y=\"{:.3}\" font-size=\"11\">{:.4}</text>",
            H - MARGIN + 14.0,
            self.x.0
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.3}\" y=\"{:.3}\" font-size=\"11\" text-anchor=\"end\">{:.4}</text>",
            W - MARGIN,
            H - MARGIN + 14.0,
            self.x.1
        );
        let _ = writeln!(s, "<text x=\"4\" y=\"{:.3}\" font-size=\"11\">{:.4}</text>", H - MARGIN, self.y.0);
        let _ = writeln!(s, "<text x=\"4\" y=\"{:.3}\" font-size=\"11\">{:.4}</text>", MARGIN, self.y.1);
        let _ = writeln!(
            s,
            "<text x=\"{:.3}\" y=\"{:.3}\" font-size=\"12\" text-anchor=\"middle\">{}</text>",
            W / 2.0,
            H - 8.0,
            escape(xlabel)
        );
        let _ = writeln!(
            s,
            "<text x=\"12\" y=\"{:.3}\" font-size=\"12\" transform=\"rotate(-90 12 {:.3})\" text-anchor=\"middle\">{}</text>",
            H / 2.0,
            H / 2.0,
            escape(ylabel)
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.3}\" y=\"20\" font-size=\"13\" text-anchor=\"middle\">{}</text>",
            W / 2.0,
            escape(title)
        );
        s += "</svg>\n";
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn color_scale(values: &[f64], cmap: Colormap) -> Vec<String> {
    let (lo, hi) = range(values.iter().copied());
    values.iter().map(|v| hex(cmap.color((v - lo) / (hi - lo)))).collect()
}

/// One `<circle class="point">` per (x, y) pair.
pub fn scatter_svg(
    x: &[f64],
    y: &[f64],
    color: Option<&[f64]>,
    cmap: Colormap,
    grid: bool,
    labels: (&str, &str),
) -> Result<String> {
    if x.len() != y.len() {
        return Err(TerrainError::param(
            "scatter",
            format!("x has {} values but y has {}", x.len(), y.len()),
        ));
    }
    let colors = match color {
        Some(c) if c.len() == x.len() => color_scale(c, cmap),
        Some(c) => {
            return Err(TerrainError::param(
                "color",
                format!("{} color values for {} points", c.len(), x.len()),
            ))
        }
        None => vec!["#1f4e9c".to_string(); x.len()],
    };
    let mut f = Frame::new(range(x.iter().copied()), range(y.iter().copied()));
    for ((a, b), c) in x.iter().zip(y).zip(&colors) {
        let _ = writeln!(
            f.body,
            "<circle class=\"point\" cx=\"{:.3}\" cy=\"{:.3}\" r=\"3\" fill=\"{c}\"/>",
            f.px(*a),
            f.py(*b)
        );
    }
    Ok(f.finish(&format!("{} vs {}", labels.1, labels.0), labels.0, labels.1, grid))
}

/// Bin edges and counts; a constant input yields a single occupied bin.
pub fn histogram_counts(values: &[f64], bins: usize) -> (Vec<f64>, Vec<usize>) {
    let bins = bins.max(1);
    let (lo, hi) = range(values.iter().copied());
    let width = (hi - lo) / bins as f64;
    let edges = (0..=bins).map(|k| lo + k as f64 * width).collect();
    let mut counts = vec![0; bins];
    for v in values.iter().filter(|v| v.is_finite()) {
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    (edges, counts)
}

/// One `<rect class="bar">` per bin.
pub fn histogram_svg(values: &[f64], bins: usize, label: &str) -> String {
    let (edges, counts) = histogram_counts(values, bins);
    let top = counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let mut f = Frame::new((edges[0], *edges.last().unwrap()), (0.0, top));
    for (k, c) in counts.iter().enumerate() {
        let (x0, x1) = (f.px(edges[k]), f.px(edges[k + 1]));
        let (y0, y1) = (f.py(*c as f64), f.py(0.0));
        let _ = writeln!(
            f.body,
            "<rect class=\"bar\" x=\"{x0:.3}\" y=\"{y0:.3}\" width=\"{:.3}\" height=\"{:.3}\" fill=\"#4a7fc1\" stroke=\"white\"/>",
            x1 - x0,
            y1 - y0
        );
    }
    f.finish(label, label, "count", false)
}

/// One `<polyline class="series">` per named series, plotted against index.
pub fn lines_svg(series: &[(String, Vec<f64>)], grid: bool) -> String {
    let n = series.iter().map(|(_, v)| v.len()).max().unwrap_or(1).max(1);
    let f_range = range(series.iter().flat_map(|(_, v)| v.iter().copied()));
    let mut f = Frame::new((0.0, (n - 1).max(1) as f64), f_range);
    for (k, (name, values)) in series.iter().enumerate() {
        let color = hex(Colormap::Viridis.color(k as f64 / series.len().max(2).saturating_sub(1) as f64));
        let pts: Vec<String> = values
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{:.3},{:.3}", f.px(i as f64), f.py(*v)))
            .collect();
        let _ = writeln!(
            f.body,
            "<polyline class=\"series\" data-name=\"{}\" points=\"{}\" fill=\"none\" stroke=\"{color}\"/>",
            escape(name),
            pts.join(" ")
        );
    }
    let names: Vec<&str> = series.iter().map(|(n, _)| n.as_str()).collect();
    f.finish(&names.join(", "), "index", "value", grid)
}

/// One `<circle class="obstacle">` per obstacle with diameter `width`,
/// filled by height.
pub fn obstacles_svg(obstacles: &[Obstacle], extent: Extent, cmap: Colormap) -> String {
    let heights: Vec<f64> = obstacles.iter().map(|o| o.height).collect();
    let colors = color_scale(&heights, cmap);
    let mut f = Frame::new((extent.x_min, extent.x_max), (extent.y_min, extent.y_max));
    let scale = (W - 2.0 * MARGIN) / extent.width();
    for (o, c) in obstacles.iter().zip(&colors) {
        let _ = writeln!(
            f.body,
            "<circle class=\"obstacle\" cx=\"{:.3}\" cy=\"{:.3}\" r=\"{:.3}\" fill=\"{c}\" fill-opacity=\"0.7\" stroke=\"black\"/>",
            f.px(o.position.0),
            f.py(o.position.1),
            0.5 * o.width * scale
        );
    }
    f.finish(&format!("{} obstacles", obstacles.len()), "x [m]", "y [m]", false)
}

/// Disk footprints on the grid, each cell holding the tallest covering
/// obstacle height (0 where uncovered).
pub fn rasterize_obstacles(obstacles: &[Obstacle], spec: GridSpec) -> Result<Terrain> {
    let (nx, ny) = spec.shape();
    let e = spec.extent();
    let mut h = Array2::<f64>::zeros((nx, ny));
    // only cells inside each disk's bounding box are visited
    let index_range = |lo: f64, hi: f64, min: f64, d: f64, n: usize| {
        // padded by a cell so rounding never drops a boundary cell
        let a = ((lo - min) / d - 1.5).ceil().max(0.0) as usize;
        let b = ((hi - min) / d + 0.5).floor();
        (a, if b < 0.0 { 0 } else { (b as usize + 1).min(n) })
    };
    for o in obstacles {
        let r = 0.5 * o.width;
        let (i0, i1) = index_range(o.position.0 - r, o.position.0 + r, e.x_min, spec.dx(), nx);
        let (j0, j1) = index_range(o.position.1 - r, o.position.1 + r, e.y_min, spec.dy(), ny);
        for i in i0..i1 {
            for j in j0..j1 {
                let (x, y) = (spec.x_center(i), spec.y_center(j));
                if (x - o.position.0).hypot(y - o.position.1) <= r && o.height > h[[i, j]] {
                    h[[i, j]] = o.height;
                }
            }
        }
    }
    Terrain::new(spec, h)
}
