//! Terrain algebra: list folds, weighted sums and elementwise modifiers,
//! plus the separable Gaussian filter shared with the roughness metric.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, Axis, Zip};

use crate::error::{Result, TerrainError};
use crate::grid::Terrain;

impl AsRef<Terrain> for Terrain {
    fn as_ref(&self) -> &Terrain {
        self
    }
}

/// Neumaier-compensated sum, accumulated in iteration order.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CombineKind {
    Add,
    Prod,
    Min,
    Max,
}

impl FromStr for CombineKind {
    type Err = TerrainError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "add" | "sum" => Ok(CombineKind::Add),
            "prod" | "product" => Ok(CombineKind::Prod),
            "min" => Ok(CombineKind::Min),
            "max" => Ok(CombineKind::Max),
            _ => Err(TerrainError::param(
                "operation",
                format!("unknown combine operation `{s}` (known: Add, Prod, Min, Max)"),
            )),
        }
    }
}

impl fmt::Display for CombineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CombineKind::Add => "Add",
            CombineKind::Prod => "Prod",
            CombineKind::Min => "Min",
            CombineKind::Max => "Max",
        })
    }
}

fn check_grids<T: AsRef<Terrain>>(terrains: &[T]) -> Result<&Terrain> {
    let first = terrains.first().ok_or(TerrainError::NoTerrains)?.as_ref();
    for t in &terrains[1..] {
        first.ensure_same_grid(t.as_ref())?;
    }
    Ok(first)
}

/// Elementwise fold of a terrain list.
pub fn combine<T: AsRef<Terrain>>(terrains: &[T], kind: CombineKind) -> Result<Terrain> {
    let first = check_grids(terrains)?;
    let (nx, ny) = first.spec().shape();
    let mut out = Array2::zeros((nx, ny));
    for ((i, j), v) in out.indexed_iter_mut() {
        let cells = terrains.iter().map(|t| t.as_ref().get(i, j));
        *v = match kind {
            CombineKind::Add => compensated_sum(cells),
            CombineKind::Prod => cells.product(),
            CombineKind::Min => cells.fold(f64::INFINITY, f64::min),
            CombineKind::Max => cells.fold(f64::NEG_INFINITY, f64::max),
        };
    }
    Terrain::new(*first.spec(), out)
}

/// z = sum_i w_i z_i, compensated per cell.
pub fn weighted_sum<T: AsRef<Terrain>>(terrains: &[T], weights: &[f64]) -> Result<Terrain> {
    let first = check_grids(terrains)?;
    if weights.len() != terrains.len() {
        return Err(TerrainError::param(
            "weights",
            format!("{} weights for {} terrains", weights.len(), terrains.len()),
        ));
    }
    let (nx, ny) = first.spec().shape();
    let mut out = Array2::zeros((nx, ny));
    for ((i, j), v) in out.indexed_iter_mut() {
        *v = compensated_sum(
            terrains
                .iter()
                .zip(weights)
                .map(|(t, w)| w * t.as_ref().get(i, j)),
        );
    }
    Terrain::new(*first.spec(), out)
}

/// Border handling for the Gaussian filter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Padding {
    /// Half-sample symmetric mirror (`d c b a | a b c d`); preserves the mean.
    Reflect,
    /// Point reflection through the border sample (`2a - b`); preserves
    /// affine functions.
    Odd,
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (4.0 * sigma + 0.5) as usize;
    let raw: Vec<f64> = (0..=2 * radius)
        .map(|k| {
            let d = k as f64 - radius as f64;
            (-0.5 * d * d / (sigma * sigma)).exp()
        })
        .collect();
    let total = compensated_sum(raw.iter().copied());
    raw.into_iter().map(|v| v / total).collect()
}

fn padded(line: &[f64], p: isize, padding: Padding) -> f64 {
    let n = line.len() as isize;
    match padding {
        Padding::Reflect => {
            let period = 2 * n;
            let q = p.rem_euclid(period);
            let idx = if q < n { q } else { period - 1 - q };
            line[idx as usize]
        }
        Padding::Odd => {
            // value = offset + sign * line[q], unfolded one mirror at a time
            let (mut offset, mut sign, mut q) = (0.0, 1.0, p);
            loop {
                if q < 0 {
                    offset += sign * 2.0 * line[0];
                    sign = -sign;
                    q = -q;
                } else if q >= n {
                    offset += sign * 2.0 * line[(n - 1) as usize];
                    sign = -sign;
                    q = 2 * (n - 1) - q;
                } else {
                    return offset + sign * line[q as usize];
                }
            }
        }
    }
}

fn filter_axis(data: &mut Array2<f64>, axis: Axis, sigma: f64, padding: Padding) {
    if sigma <= 0.0 {
        return;
    }
    let kernel = gaussian_kernel(sigma);
    let radius = (kernel.len() / 2) as isize;
    if radius == 0 {
        return;
    }
    let mut line = Vec::new();
    for mut lane in data.lanes_mut(axis) {
        line.clear();
        line.extend(lane.iter().copied());
        for (k, out) in lane.iter_mut().enumerate() {
            *out = compensated_sum(kernel.iter().enumerate().map(|(m, w)| {
                w * padded(&line, k as isize + m as isize - radius, padding)
            }));
        }
    }
}

/// Separable Gaussian blur with per-axis sigma given in cells, kernel
/// truncated at 4 sigma.
pub fn gaussian_filter(
    heights: &Array2<f64>,
    sigma_x: f64,
    sigma_y: f64,
    padding: Padding,
) -> Array2<f64> {
    let mut out = heights.clone();
    filter_axis(&mut out, Axis(0), sigma_x, padding);
    filter_axis(&mut out, Axis(1), sigma_y, padding);
    out
}

/// Elementwise terrain modifiers.
#[derive(Clone, Debug, PartialEq)]
pub enum Modifier {
    Negate,
    Add(f64),
    Scale(f64),
    Absolute,
    Clip { lo: f64, hi: f64 },
    /// Gaussian smoothing with sigma in meters, reflect padding.
    Smooth(f64),
    /// Round to the given number of decimals.
    Around(i32),
}

impl Modifier {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Modifier::Clip { lo, hi } if !(lo <= hi) => Err(TerrainError::param(
                "clip",
                format!("lower bound {lo} exceeds upper bound {hi}"),
            )),
            Modifier::Smooth(s) if !(s >= 0.0) => Err(TerrainError::param(
                "sigma_meter",
                format!("must be non-negative, got {s}"),
            )),
            Modifier::Add(v) | Modifier::Scale(v) if !v.is_finite() => {
                Err(TerrainError::param("value", format!("must be finite, got {v}")))
            }
            _ => Ok(()),
        }
    }

    pub fn apply(&self, t: &Terrain) -> Result<Terrain> {
        self.validate()?;
        match *self {
            Modifier::Negate => t.map(|v| -v),
            Modifier::Add(a) => t.map(|v| a + v),
            Modifier::Scale(a) => t.map(|v| a * v),
            Modifier::Absolute => t.map(f64::abs),
            Modifier::Clip { lo, hi } => t.map(|v| v.clamp(lo, hi)),
            Modifier::Smooth(sigma) => smooth(t, sigma, Padding::Reflect),
            Modifier::Around(decimals) => {
                let f = 10f64.powi(decimals);
                t.map(|v| {
                    let r = (v * f).round() / f;
                    if r.is_finite() {
                        r
                    } else {
                        v
                    }
                })
            }
        }
    }
}

/// Gaussian smoothing with sigma in meters, converted to cells per axis.
pub fn smooth(t: &Terrain, sigma_meter: f64, padding: Padding) -> Result<Terrain> {
    if !(sigma_meter >= 0.0) {
        return Err(TerrainError::param(
            "sigma_meter",
            format!("must be non-negative, got {sigma_meter}"),
        ));
    }
    if sigma_meter == 0.0 {
        return Ok(t.clone());
    }
    let spec = t.spec();
    t.with_heights(gaussian_filter(
        t.heights(),
        sigma_meter / spec.dx(),
        sigma_meter / spec.dy(),
        padding,
    ))
}

/// Elementwise product with a position-dependent factor terrain.
pub fn scale_by(t: &Terrain, factor: &Terrain) -> Result<Terrain> {
    t.ensure_same_grid(factor)?;
    let mut out = t.heights().clone();
    Zip::from(&mut out)
        .and(factor.heights())
        .for_each(|v, f| *v *= *f);
    t.with_heights(out)
}
