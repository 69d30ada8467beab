//! Colormaps, hillshading and raster image writers.
//!
//! Image pixel (column i, row j) always corresponds to terrain cell (i, j),
//! so an image is exactly nx pixels wide and ny pixels tall.

use std::io::BufWriter;
use std::path::Path;

use crate::analysis::gradient;
use crate::error::{Result, TerrainError};
use crate::grid::Terrain;

type Rgb = [u8; 3];

const GRAYSCALE: &[Rgb] = &[[0, 0, 0], [255, 255, 255]];
const VIRIDIS: &[Rgb] = &[
    [68, 1, 84],
    [72, 40, 120],
    [62, 74, 137],
    [49, 104, 142],
    [38, 130, 142],
    [31, 158, 137],
    [53, 183, 121],
    [110, 206, 88],
    [181, 222, 43],
    [253, 231, 37],
];
const COOLWARM: &[Rgb] = &[
    [59, 76, 192],
    [124, 159, 249],
    [192, 212, 245],
    [221, 221, 221],
    [242, 203, 183],
    [238, 133, 104],
    [180, 4, 38],
];
const BJY: &[Rgb] = &[
    [0, 48, 245],
    [64, 90, 200],
    [110, 118, 150],
    [128, 128, 128],
    [158, 150, 110],
    [200, 175, 60],
    [235, 205, 0],
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Colormap {
    Grayscale,
    Viridis,
    Coolwarm,
    Bjy,
}

pub const COLORMAP_NAMES: [&str; 4] = ["grayscale", "viridis", "coolwarm", "bjy"];

impl Colormap {
    /// Accepts the built-in names plus common aliases (`gray`, `cet_bjy`, ...).
    pub fn from_name(name: &str) -> Result<Colormap> {
        let lower = name.trim().to_ascii_lowercase();
        let bare = lower.strip_prefix("cet_").unwrap_or(&lower);
        match bare {
            "grayscale" | "gray" | "grey" | "greys" | "greys_r" | "gray_r" => Ok(Colormap::Grayscale),
            "viridis" => Ok(Colormap::Viridis),
            "coolwarm" => Ok(Colormap::Coolwarm),
            "bjy" => Ok(Colormap::Bjy),
            _ => Err(TerrainError::UnknownColormap {
                name: name.to_string(),
                available: COLORMAP_NAMES.join(", "),
            }),
        }
    }

    fn table(self) -> &'static [Rgb] {
        match self {
            Colormap::Grayscale => GRAYSCALE,
            Colormap::Viridis => VIRIDIS,
            Colormap::Coolwarm => COOLWARM,
            Colormap::Bjy => BJY,
        }
    }

    /// Color at `t` in [0, 1], linear between control points.
    pub fn color(self, t: f64) -> Rgb {
        let table = self.table();
        let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
        let pos = t * (table.len() - 1) as f64;
        let k = (pos.floor() as usize).min(table.len() - 2);
        let f = pos - k as f64;
        let mut out = [0u8; 3];
        for c in 0..3 {
            let a = table[k][c] as f64;
            let b = table[k + 1][c] as f64;
            out[c] = (a + (b - a) * f).round() as u8;
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl RgbImage {
    pub fn pixel(&self, col: usize, row: usize) -> Rgb {
        let k = 3 * (row * self.width + col);
        [self.pixels[k], self.pixels[k + 1], self.pixels[k + 2]]
    }
}

/// Heights rescaled to [0, 1]; a flat terrain maps to 0.5 everywhere.
pub fn normalized(t: &Terrain) -> Vec<f64> {
    let (lo, hi) = (t.min(), t.max());
    let span = hi - lo;
    t.heights()
        .iter()
        .map(|v| if span > 0.0 { (v - lo) / span } else { 0.5 })
        .collect()
}

fn to_image(t: &Terrain, value: impl Fn(usize, usize) -> Rgb) -> RgbImage {
    let (nx, ny) = t.spec().shape();
    let mut pixels = Vec::with_capacity(3 * nx * ny);
    for row in 0..ny {
        for col in 0..nx {
            pixels.extend_from_slice(&value(col, row));
        }
    }
    RgbImage { width: nx, height: ny, pixels }
}

pub fn colorize(t: &Terrain, cmap: Colormap) -> RgbImage {
    let norm = normalized(t);
    let ny = t.spec().ny();
    to_image(t, |i, j| cmap.color(norm[i * ny + j]))
}

/// Lambertian intensity per cell for a light at the given azimuth
/// (degrees clockwise from +y) and altitude above the horizon.
pub fn hillshade_intensity(t: &Terrain, azimuth_deg: f64, altitude_deg: f64) -> Vec<f64> {
    let (gx, gy) = gradient(t);
    let (az, alt) = (azimuth_deg.to_radians(), altitude_deg.to_radians());
    let light = [alt.cos() * az.sin(), alt.cos() * az.cos(), alt.sin()];
    gx.iter()
        .zip(gy.iter())
        .map(|(a, b)| {
            let n = (a * a + b * b + 1.0).sqrt();
            ((-a * light[0] - b * light[1] + light[2]) / n).max(0.0)
        })
        .collect()
}

pub fn render_hillshade(
    t: &Terrain,
    cmap: Colormap,
    azimuth_deg: f64,
    altitude_deg: f64,
) -> RgbImage {
    let norm = normalized(t);
    let shade = hillshade_intensity(t, azimuth_deg, altitude_deg);
    let ny = t.spec().ny();
    to_image(t, |i, j| {
        let k = i * ny + j;
        cmap.color(norm[k]).map(|c| (c as f64 * shade[k]).round() as u8)
    })
}

pub fn encode_png(img: &RgbImage) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(BufWriter::new(&mut out), img.width as u32, img.height as u32);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        let fail = |e: png::EncodingError| TerrainError::format("<png>", e.to_string());
        let mut w = enc.write_header().map_err(fail)?;
        w.write_image_data(&img.pixels).map_err(fail)?;
        w.finish().map_err(fail)?;
    }
    Ok(out)
}

pub fn write_png(path: &Path, img: &RgbImage) -> Result<()> {
    let bytes = encode_png(img).map_err(|e| match e {
        TerrainError::Format { reason, .. } => TerrainError::format(path, reason),
        other => other,
    })?;
    super::write_bytes(path, &bytes)
}

/// Binary 8-bit PGM of the normalized heights.
pub fn encode_pgm(t: &Terrain) -> Vec<u8> {
    let (nx, ny) = t.spec().shape();
    let norm = normalized(t);
    let mut out = format!("P5\n{nx} {ny}\n255\n").into_bytes();
    for j in 0..ny {
        for i in 0..nx {
            out.push((norm[i * ny + j] * 255.0).round() as u8);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn colormap_names() {
        assert_eq!(Colormap::from_name("cet_bjy").unwrap(), Colormap::Bjy);
        match Colormap::from_name("jet") {
            Err(TerrainError::UnknownColormap { available, .. }) => assert!(available.contains("viridis")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn grayscale_extremes_and_pixel_mapping() {
        let spec = GridSpec::new(crate::grid::Extent::new(0.0, 3.0, 0.0, 2.0), 3, 2).unwrap();
        let t = Terrain::from_fn(spec, |x, y| x + 10.0 * y).unwrap();
        let img = colorize(&t, Colormap::Grayscale);
        assert_eq!((img.width, img.height), (3, 2));
        assert_eq!(img.pixel(0, 0), [0, 0, 0]);
        assert_eq!(img.pixel(2, 1), [255, 255, 255]);
        let png = encode_png(&img).unwrap();
        assert_eq!(&png[1..4], b"PNG");
    }

    #[test]
    fn flat_shade_is_uniform() {
        let t = Terrain::constant(GridSpec::default(), 2.0);
        let s = hillshade_intensity(&t, 315.0, 45.0);
        assert!(s.iter().all(|v| (v - 45f64.to_radians().sin()).abs() < 1e-12));
    }
}
