//! Terrain metrics: mean-gradient slope, relative-surface-area roughness,
//! rock detection by connected-component labeling and the rock census.

use ndarray::Array2;

use crate::combine::{compensated_sum, smooth, Padding};
use crate::error::{Result, TerrainError};
use crate::grid::{GridSpec, Terrain};
use crate::obstacles::Obstacle;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlopeReport {
    pub mean_gradient: (f64, f64),
    pub slope_deg: f64,
}

/// Per-cell gradient: central differences inside, one-sided at the borders.
pub fn gradient(t: &Terrain) -> (Array2<f64>, Array2<f64>) {
    let z = t.heights();
    let (nx, ny) = t.spec().shape();
    let (dx, dy) = (t.spec().dx(), t.spec().dy());
    let mut gx = Array2::zeros((nx, ny));
    let mut gy = Array2::zeros((nx, ny));
    for i in 0..nx {
        for j in 0..ny {
            gx[[i, j]] = if i == 0 {
                (z[[1, j]] - z[[0, j]]) / dx
            } else if i == nx - 1 {
                (z[[i, j]] - z[[i - 1, j]]) / dx
            } else {
                (z[[i + 1, j]] - z[[i - 1, j]]) / (2.0 * dx)
            };
            gy[[i, j]] = if j == 0 {
                (z[[i, 1]] - z[[i, 0]]) / dy
            } else if j == ny - 1 {
                (z[[i, j]] - z[[i, j - 1]]) / dy
            } else {
                (z[[i, j + 1]] - z[[i, j - 1]]) / (2.0 * dy)
            };
        }
    }
    (gx, gy)
}

pub fn mean_gradient(t: &Terrain) -> (f64, f64) {
    let (gx, gy) = gradient(t);
    let n = t.spec().len() as f64;
    (
        compensated_sum(gx.iter().copied()) / n,
        compensated_sum(gy.iter().copied()) / n,
    )
}

pub fn slope_from_gradient(g: (f64, f64)) -> f64 {
    g.0.hypot(g.1).atan().to_degrees()
}

pub fn slope(t: &Terrain) -> SlopeReport {
    let g = mean_gradient(t);
    SlopeReport {
        mean_gradient: g,
        slope_deg: slope_from_gradient(g),
    }
}

/// Triangulated area over cell-center nodes, two triangles per quad split
/// along the lower-left to upper-right diagonal.
pub fn surface_area(t: &Terrain) -> f64 {
    let z = t.heights();
    let (nx, ny) = t.spec().shape();
    let (dx, dy) = (t.spec().dx(), t.spec().dy());
    let tri = |a: [f64; 3], b: [f64; 3]| {
        let c = [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ];
        0.5 * (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()
    };
    let mut areas = Vec::with_capacity(2 * (nx - 1) * (ny - 1));
    for i in 0..nx - 1 {
        for j in 0..ny - 1 {
            let z00 = z[[i, j]];
            let e10 = [dx, 0.0, z[[i + 1, j]] - z00];
            let e11 = [dx, dy, z[[i + 1, j + 1]] - z00];
            let e01 = [0.0, dy, z[[i, j + 1]] - z00];
            areas.push(tri(e10, e11));
            areas.push(tri(e11, e01));
        }
    }
    compensated_sum(areas)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoughnessReport {
    pub roughness: f64,
    pub sigma_meter: f64,
    pub a_orig: f64,
    pub a_smooth: f64,
}

pub const DEFAULT_ROUGHNESS_SIGMA: f64 = 5.0;

/// Ratio of the surface area to that of a Gaussian-smoothed copy. The
/// smoothing reflects through border samples so planes stay planes.
pub fn roughness(t: &Terrain, sigma_meter: f64) -> Result<RoughnessReport> {
    let smoothed = smooth(t, sigma_meter, Padding::Odd)?;
    let a_orig = surface_area(t);
    let a_smooth = surface_area(&smoothed);
    Ok(RoughnessReport {
        roughness: a_orig / a_smooth,
        sigma_meter,
        a_orig,
        a_smooth,
    })
}

/// Labels 4-connected `true` cells. Labels start at 1 in scan order;
/// background cells are 0.
pub fn label_components(mask: &Array2<bool>) -> (Array2<usize>, usize) {
    let (nx, ny) = mask.dim();
    let mut parent: Vec<usize> = Vec::new();
    let mut provisional = Array2::<usize>::zeros((nx, ny));
    fn find(parent: &mut [usize], mut a: usize) -> usize {
        while parent[a] != a {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        a
    }
    for i in 0..nx {
        for j in 0..ny {
            if !mask[[i, j]] {
                continue;
            }
            let up = if i > 0 { provisional[[i - 1, j]] } else { 0 };
            let left = if j > 0 { provisional[[i, j - 1]] } else { 0 };
            let label = match (up, left) {
                (0, 0) => {
                    parent.push(parent.len());
                    parent.len()
                }
                (a, 0) | (0, a) => a,
                (a, b) => {
                    let ra = find(&mut parent, a - 1);
                    let rb = find(&mut parent, b - 1);
                    if ra != rb {
                        let (lo, hi) = (ra.min(rb), ra.max(rb));
                        parent[hi] = lo;
                    }
                    a
                }
            };
            provisional[[i, j]] = label;
        }
    }
    let mut relabel = vec![0usize; parent.len()];
    let mut count = 0;
    let mut labels = Array2::<usize>::zeros((nx, ny));
    for ((i, j), p) in provisional.indexed_iter() {
        if *p == 0 {
            continue;
        }
        let root = find(&mut parent, p - 1);
        if relabel[root] == 0 {
            count += 1;
            relabel[root] = count;
        }
        labels[[i, j]] = relabel[root];
    }
    (labels, count)
}

/// One detected rock before conversion to an obstacle record.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RockComponent {
    pub centroid: (f64, f64),
    pub max_height: f64,
    pub cells: usize,
    pub area: f64,
}

impl RockComponent {
    pub fn to_obstacle(&self) -> Obstacle {
        Obstacle {
            position: self.centroid,
            height: self.max_height,
            width: (4.0 * self.area / std::f64::consts::PI).sqrt(),
            aspect: 1.0,
            yaw_deg: 0.0,
            pitch_deg: 0.0,
        }
    }
}

pub const DEFAULT_MIN_ROCK_HEIGHT: f64 = 0.05;

pub fn rock_components(t: &Terrain, min_height: f64) -> Result<Vec<RockComponent>> {
    if !(min_height > 0.0) {
        return Err(TerrainError::param(
            "min_height",
            format!("must be positive, got {min_height}"),
        ));
    }
    let mask = t.heights().mapv(|v| v > min_height);
    let (labels, count) = label_components(&mask);
    let spec = t.spec();
    let mut sx = vec![Vec::new(); count];
    let mut sy = vec![Vec::new(); count];
    let mut peak = vec![f64::NEG_INFINITY; count];
    for ((i, j), l) in labels.indexed_iter() {
        if *l == 0 {
            continue;
        }
        let k = l - 1;
        sx[k].push(spec.x_center(i));
        sy[k].push(spec.y_center(j));
        peak[k] = peak[k].max(t.get(i, j));
    }
    Ok((0..count)
        .map(|k| {
            let n = sx[k].len();
            RockComponent {
                centroid: (
                    compensated_sum(sx[k].iter().copied()) / n as f64,
                    compensated_sum(sy[k].iter().copied()) / n as f64,
                ),
                max_height: peak[k],
                cells: n,
                area: n as f64 * spec.cell_area(),
            }
        })
        .collect())
}

/// Connected regions above `min_height` as obstacle records.
pub fn find_rocks(t: &Terrain, min_height: f64) -> Result<Vec<Obstacle>> {
    Ok(rock_components(t, min_height)?
        .iter()
        .map(RockComponent::to_obstacle)
        .collect())
}

/// Lower bounds of the four census height bands, meters.
pub const HEIGHT_BANDS: [f64; 4] = [0.1, 0.3, 0.5, 0.7];

/// Mapping from per-hectare rock counts to the class value Y.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassTable {
    /// Y = 1 + number of thresholds the total count reaches.
    pub total_thresholds: Vec<f64>,
    /// Y is raised by one (capped at 5) when h80 exceeds this.
    pub h80_bump: f64,
}

impl Default for ClassTable {
    fn default() -> Self {
        ClassTable {
            total_thresholds: vec![40.0, 100.0, 400.0, 800.0],
            h80_bump: 10.0,
        }
    }
}

impl ClassTable {
    pub fn classify(&self, counts: [f64; 4]) -> f64 {
        let total: f64 = counts.iter().sum();
        let mut y = 1.0 + self.total_thresholds.iter().filter(|t| total >= **t).count() as f64;
        if counts[3] > self.h80_bump {
            y += 1.0;
        }
        y.clamp(1.0, 5.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceStructureReport {
    pub h20: f64,
    pub h40: f64,
    pub h60: f64,
    pub h80: f64,
    pub class_y: f64,
}

/// Bins obstacle heights into the census bands per hectare of extent area.
pub fn surface_structure(
    obstacles: &[Obstacle],
    spec: &GridSpec,
    table: &ClassTable,
) -> SurfaceStructureReport {
    let mut counts = [0usize; 4];
    for o in obstacles {
        if let Some(band) = HEIGHT_BANDS.iter().rposition(|lo| o.height >= *lo) {
            counts[band] += 1;
        }
    }
    let hectares = spec.extent().area() / 10_000.0;
    let per_ha = counts.map(|c| c as f64 / hectares);
    SurfaceStructureReport {
        h20: per_ha[0],
        h40: per_ha[1],
        h60: per_ha[2],
        h80: per_ha[3],
        class_y: table.classify(per_ha),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Extent;

    #[test]
    fn ramp_gradient_and_slope() {
        let t = Terrain::from_fn(GridSpec::default(), |x, _| x).unwrap();
        let s = slope(&t);
        assert!((s.mean_gradient.0 - 1.0).abs() < 1e-12);
        assert!(s.mean_gradient.1.abs() < 1e-12);
        assert!((s.slope_deg - 45.0).abs() < 1e-9);
    }

    #[test]
    fn flat_roughness_is_one() {
        let t = Terrain::constant(GridSpec::default(), 3.7);
        assert_eq!(roughness(&t, 5.0).unwrap().roughness, 1.0);
    }

    #[test]
    fn plane_area_matches_analytic() {
        let spec = GridSpec::default();
        let t = Terrain::from_fn(spec, |x, y| 0.2 * x + 0.1 * y).unwrap();
        let inner = (spec.nx() - 1) as f64 * spec.dx() * (spec.ny() - 1) as f64 * spec.dy();
        let expect = inner * (1.0f64 + 0.04 + 0.01).sqrt();
        assert!((surface_area(&t) - expect).abs() < 1e-9 * expect);
        assert!((roughness(&t, 5.0).unwrap().roughness - 1.0).abs() < 1e-9);
    }

    #[test]
    fn labeling_u_shape_merges() {
        let mask = ndarray::arr2(&[
            [true, false, true],
            [true, false, true],
            [true, true, true],
            [false, false, false],
            [true, false, false],
        ]);
        let (labels, count) = label_components(&mask);
        assert_eq!(count, 2);
        assert_eq!(labels[[0, 0]], 1);
        assert_eq!(labels[[0, 2]], 1);
        assert_eq!(labels[[4, 0]], 2);
    }

    #[test]
    fn single_bump_single_rock() {
        let spec = GridSpec::default();
        let t = Terrain::from_fn(spec, |x, y| (-(x * x + y * y) / 8.0).exp()).unwrap();
        let rocks = find_rocks(&t, DEFAULT_MIN_ROCK_HEIGHT).unwrap();
        assert_eq!(rocks.len(), 1);
        assert!((rocks[0].height - 1.0).abs() < 0.05);
        assert!(rocks[0].position.0.abs() < 1e-9);
        assert!(find_rocks(&Terrain::zeros(spec), 0.05).unwrap().is_empty());
    }

    #[test]
    fn census_bands_and_area() {
        let hectare = GridSpec::new(Extent::new(0.0, 100.0, 0.0, 100.0), 10, 10).unwrap();
        let obs: Vec<Obstacle> = [0.05, 0.2, 0.4, 0.6, 0.8]
            .iter()
            .map(|h| Obstacle { height: *h, ..Obstacle::default() })
            .collect();
        let r = surface_structure(&obs, &hectare, &ClassTable::default());
        assert_eq!((r.h20, r.h40, r.h60, r.h80), (1.0, 1.0, 1.0, 1.0));
        assert_eq!(r.class_y, 1.0);
        let empty = surface_structure(&[], &hectare, &ClassTable::default());
        assert_eq!(empty.class_y, 1.0);
        let small = GridSpec::new(Extent::new(0.0, 50.0, 0.0, 50.0), 10, 10).unwrap();
        let r = surface_structure(&obs[1..2].repeat(5), &small, &ClassTable::default());
        assert!((r.h20 - 20.0).abs() < 1e-12);
    }
}
