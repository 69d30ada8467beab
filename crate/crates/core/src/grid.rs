//! Heightmap data model and the world-coordinate mapping shared by every generator.
//!
//! Grids are cell-registered: an extent of width `W` split into `nx` cells has
//! cell centers at `x_min + (i + 0.5) * W / nx`. Splitting and stacking rely on
//! this convention to stay exact.

use std::collections::BTreeMap;

use ndarray::Array2;

use crate::error::{Result, TerrainError};

/// World-space rectangle in meters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Extent {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Extent {
    pub const fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Extent {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> (f64, f64) {
        (
            0.5 * (self.x_min + self.x_max),
            0.5 * (self.y_min + self.y_max),
        )
    }

    /// Euclidean distance from a point to the rectangle, zero inside.
    pub fn distance_to(&self, x: f64, y: f64) -> f64 {
        let dx = (self.x_min - x).max(0.0).max(x - self.x_max);
        let dy = (self.y_min - y).max(0.0).max(y - self.y_max);
        dx.hypot(dy)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.x_min, self.x_max, self.y_min, self.y_max]
    }
}

impl Default for Extent {
    fn default() -> Self {
        Extent::new(-25.0, 25.0, -25.0, 25.0)
    }
}

/// Extent plus grid size; defines the world <-> index mapping.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    extent: Extent,
    nx: usize,
    ny: usize,
}

impl GridSpec {
    pub fn new(extent: Extent, nx: usize, ny: usize) -> Result<Self> {
        let finite = extent.as_array().iter().all(|v| v.is_finite());
        if !finite {
            return Err(TerrainError::InvalidGrid(format!(
                "extent {:?} is not finite",
                extent.as_array()
            )));
        }
        if !(extent.x_min < extent.x_max && extent.y_min < extent.y_max) {
            return Err(TerrainError::InvalidGrid(format!(
                "extent {:?} must satisfy x_min < x_max and y_min < y_max",
                extent.as_array()
            )));
        }
        if nx < 2 || ny < 2 {
            return Err(TerrainError::InvalidGrid(format!(
                "grid size {nx}x{ny} must be at least 2x2"
            )));
        }
        let spec = GridSpec { extent, nx, ny };
        if !(spec.dx() > 0.0 && spec.dy() > 0.0) {
            return Err(TerrainError::InvalidGrid("cell size underflows".into()));
        }
        Ok(spec)
    }

    pub fn extent(&self) -> Extent {
        self.extent
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.extent.width() / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        self.extent.height() / self.ny as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    pub fn x_center(&self, i: usize) -> f64 {
        self.extent.x_min + (i as f64 + 0.5) * self.dx()
    }

    pub fn y_center(&self, j: usize) -> f64 {
        self.extent.y_min + (j as f64 + 0.5) * self.dy()
    }

    pub fn x_centers(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x_center(i)).collect()
    }

    pub fn y_centers(&self) -> Vec<f64> {
        (0..self.ny).map(|j| self.y_center(j)).collect()
    }

    /// Cell-center coordinate arrays, each of shape `(nx, ny)`.
    pub fn world_coordinates(&self) -> (Array2<f64>, Array2<f64>) {
        let xs = self.x_centers();
        let ys = self.y_centers();
        let x = Array2::from_shape_fn((self.nx, self.ny), |(i, _)| xs[i]);
        let y = Array2::from_shape_fn((self.nx, self.ny), |(_, j)| ys[j]);
        (x, y)
    }

    /// Same extent, grid size chosen to give `per_meter` cells per meter.
    pub fn with_resolution(&self, per_meter: f64) -> Result<Self> {
        if !(per_meter > 0.0) {
            return Err(TerrainError::param("resolution", "must be positive"));
        }
        let nx = (self.extent.width() * per_meter).round() as usize;
        let ny = (self.extent.height() * per_meter).round() as usize;
        GridSpec::new(self.extent, nx, ny)
    }

    fn same_cells(&self, other: &GridSpec) -> bool {
        rel_eq(self.dx(), other.dx()) && rel_eq(self.dy(), other.dy())
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            extent: Extent::default(),
            nx: 100,
            ny: 100,
        }
    }
}

fn rel_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

/// A heightmap over a [`GridSpec`]. Heights are indexed `[i, j]` with `i`
/// along x and `j` along y.
#[derive(Clone, Debug, PartialEq)]
pub struct Terrain {
    spec: GridSpec,
    heights: Array2<f64>,
    tags: BTreeMap<String, String>,
}

impl Terrain {
    pub fn new(spec: GridSpec, heights: Array2<f64>) -> Result<Self> {
        if heights.dim() != spec.shape() {
            return Err(TerrainError::GridMismatch(format!(
                "height array {:?} does not match grid {:?}",
                heights.dim(),
                spec.shape()
            )));
        }
        check_finite(&heights)?;
        Ok(Terrain {
            spec,
            heights,
            tags: BTreeMap::new(),
        })
    }

    pub fn zeros(spec: GridSpec) -> Self {
        Terrain::constant(spec, 0.0)
    }

    pub fn constant(spec: GridSpec, value: f64) -> Self {
        Terrain {
            spec,
            heights: Array2::from_elem(spec.shape(), value),
            tags: BTreeMap::new(),
        }
    }

    /// Evaluates `f(x, y)` at every cell center.
    pub fn from_fn(spec: GridSpec, mut f: impl FnMut(f64, f64) -> f64) -> Result<Self> {
        let xs = spec.x_centers();
        let ys = spec.y_centers();
        let heights = Array2::from_shape_fn(spec.shape(), |(i, j)| f(xs[i], ys[j]));
        Terrain::new(spec, heights)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn heights(&self) -> &Array2<f64> {
        &self.heights
    }

    pub fn into_heights(self) -> Array2<f64> {
        self.heights
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.heights[[i, j]]
    }

    pub fn tags(&self) -> &BTreeMap<String, String> {
        &self.tags
    }

    pub fn set_tag(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.tags.insert(key.into(), value.into());
    }

    pub fn with_tag(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.set_tag(key, value);
        self
    }

    pub fn min(&self) -> f64 {
        self.heights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.heights.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        crate::combine::compensated_sum(self.heights.iter().copied()) / self.spec.len() as f64
    }

    /// Applies `f` elementwise, keeping grid and tags.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Terrain> {
        let heights = self.heights.mapv(f);
        check_finite(&heights)?;
        Ok(Terrain {
            spec: self.spec,
            heights,
            tags: self.tags.clone(),
        })
    }

    /// Replaces heights on the same grid.
    pub fn with_heights(&self, heights: Array2<f64>) -> Result<Terrain> {
        let mut t = Terrain::new(self.spec, heights)?;
        t.tags = self.tags.clone();
        Ok(t)
    }

    pub fn ensure_same_grid(&self, other: &Terrain) -> Result<()> {
        if self.spec != other.spec {
            return Err(TerrainError::GridMismatch(format!(
                "{:?} {}x{} vs {:?} {}x{}",
                self.spec.extent.as_array(),
                self.spec.nx,
                self.spec.ny,
                other.spec.extent.as_array(),
                other.spec.nx,
                other.spec.ny
            )));
        }
        Ok(())
    }

    /// Bilinear interpolation between cell centers. Points outside the
    /// center lattice clamp to the border cells.
    pub fn bilinear_sample(&self, x: f64, y: f64) -> f64 {
        let (i0, tx) = lattice_coord(x, self.spec.extent.x_min, self.spec.dx(), self.spec.nx);
        let (j0, ty) = lattice_coord(y, self.spec.extent.y_min, self.spec.dy(), self.spec.ny);
        let h = &self.heights;
        let a = h[[i0, j0]] * (1.0 - tx) + h[[i0 + 1, j0]] * tx;
        let b = h[[i0, j0 + 1]] * (1.0 - tx) + h[[i0 + 1, j0 + 1]] * tx;
        a * (1.0 - ty) + b * ty
    }

    /// Bilinear resampling onto another grid.
    pub fn resample(&self, spec: GridSpec) -> Terrain {
        let xs = spec.x_centers();
        let ys = spec.y_centers();
        let heights =
            Array2::from_shape_fn(spec.shape(), |(i, j)| self.bilinear_sample(xs[i], ys[j]));
        Terrain {
            spec,
            heights,
            tags: self.tags.clone(),
        }
    }

    /// Extracts the cells covered by `sub`, which must be cell-aligned with
    /// this terrain's grid and lie inside it.
    pub fn crop(&self, sub: &GridSpec) -> Result<Terrain> {
        if !self.spec.same_cells(sub) {
            return Err(TerrainError::GridMismatch(
                "crop region has a different cell size".into(),
            ));
        }
        let oi = cell_offset(sub.extent.x_min, self.spec.extent.x_min, self.spec.dx(), 'x')?;
        let oj = cell_offset(sub.extent.y_min, self.spec.extent.y_min, self.spec.dy(), 'y')?;
        if oi < 0
            || oj < 0
            || oi as usize + sub.nx > self.spec.nx
            || oj as usize + sub.ny > self.spec.ny
        {
            return Err(TerrainError::GridMismatch(
                "crop region lies outside the terrain".into(),
            ));
        }
        let (oi, oj) = (oi as usize, oj as usize);
        let heights = Array2::from_shape_fn(sub.shape(), |(i, j)| self.heights[[oi + i, oj + j]]);
        Ok(Terrain {
            spec: *sub,
            heights,
            tags: self.tags.clone(),
        })
    }
}

fn lattice_coord(v: f64, min: f64, step: f64, n: usize) -> (usize, f64) {
    let f = ((v - min) / step - 0.5).clamp(0.0, (n - 1) as f64);
    let i0 = (f.floor() as usize).min(n - 2);
    (i0, f - i0 as f64)
}

fn cell_offset(value: f64, origin: f64, step: f64, axis: char) -> Result<i64> {
    let f = (value - origin) / step;
    let r = f.round();
    if (f - r).abs() > 1e-6 {
        return Err(TerrainError::InvalidTiling(format!(
            "{axis} offset {value} is not aligned with cells of size {step}"
        )));
    }
    Ok(r as i64)
}

fn check_finite(heights: &Array2<f64>) -> Result<()> {
    if let Some(((i, j), v)) = heights.indexed_iter().find(|(_, v)| !v.is_finite()) {
        return Err(TerrainError::NonFinite { i, j, value: *v });
    }
    Ok(())
}

/// Divides `spec` into `a` pieces along x and `b` along y, ordered with x
/// varying fastest.
pub fn split_extent(spec: &GridSpec, a: usize, b: usize) -> Result<Vec<GridSpec>> {
    if a == 0 || b == 0 {
        return Err(TerrainError::param("split", "piece counts must be at least 1"));
    }
    if spec.nx % a != 0 {
        return Err(TerrainError::NotDivisible {
            axis: 'x',
            size: spec.nx,
            parts: a,
        });
    }
    if spec.ny % b != 0 {
        return Err(TerrainError::NotDivisible {
            axis: 'y',
            size: spec.ny,
            parts: b,
        });
    }
    let e = spec.extent;
    let edge = |min: f64, max: f64, k: usize, n: usize| {
        if k == n {
            max
        } else {
            min + (max - min) * k as f64 / n as f64
        }
    };
    let (mx, my) = (spec.nx / a, spec.ny / b);
    let mut out = Vec::with_capacity(a * b);
    for jb in 0..b {
        for ia in 0..a {
            let sub = Extent::new(
                edge(e.x_min, e.x_max, ia, a),
                edge(e.x_min, e.x_max, ia + 1, a),
                edge(e.y_min, e.y_max, jb, b),
                edge(e.y_min, e.y_max, jb + 1, b),
            );
            out.push(GridSpec::new(sub, mx, my)?);
        }
    }
    Ok(out)
}

/// Merges tiles that partition a rectangle into one terrain.
pub fn stack_tiles(tiles: &[Terrain]) -> Result<Terrain> {
    let first = tiles.first().ok_or(TerrainError::NoTerrains)?;
    if tiles.len() == 1 {
        return Ok(first.clone());
    }
    let (dx, dy) = (first.spec.dx(), first.spec.dy());
    for (k, t) in tiles.iter().enumerate() {
        if !first.spec.same_cells(&t.spec) {
            return Err(TerrainError::InvalidTiling(format!(
                "tile {k} has cell size {}x{}, expected {dx}x{dy}",
                t.spec.dx(),
                t.spec.dy()
            )));
        }
    }
    let x_min = tiles.iter().map(|t| t.spec.extent.x_min).fold(f64::INFINITY, f64::min);
    let x_max = tiles.iter().map(|t| t.spec.extent.x_max).fold(f64::NEG_INFINITY, f64::max);
    let y_min = tiles.iter().map(|t| t.spec.extent.y_min).fold(f64::INFINITY, f64::min);
    let y_max = tiles.iter().map(|t| t.spec.extent.y_max).fold(f64::NEG_INFINITY, f64::max);
    let nx = cell_offset(x_max, x_min, dx, 'x')? as usize;
    let ny = cell_offset(y_max, y_min, dy, 'y')? as usize;
    let spec = GridSpec::new(Extent::new(x_min, x_max, y_min, y_max), nx, ny)?;

    let mut heights = Array2::zeros((nx, ny));
    let mut covered = Array2::from_elem((nx, ny), false);
    for (k, t) in tiles.iter().enumerate() {
        let oi = cell_offset(t.spec.extent.x_min, x_min, dx, 'x')? as usize;
        let oj = cell_offset(t.spec.extent.y_min, y_min, dy, 'y')? as usize;
        for ((i, j), &v) in t.heights.indexed_iter() {
            let (gi, gj) = (oi + i, oj + j);
            if covered[[gi, gj]] {
                return Err(TerrainError::InvalidTiling(format!(
                    "tile {k} overlaps another tile at cell ({gi}, {gj})"
                )));
            }
            covered[[gi, gj]] = true;
            heights[[gi, gj]] = v;
        }
    }
    if let Some(((i, j), _)) = covered.indexed_iter().find(|(_, c)| !**c) {
        return Err(TerrainError::InvalidTiling(format!(
            "gap in tiling at cell ({i}, {j})"
        )));
    }
    let mut out = Terrain::new(spec, heights)?;
    out.tags = first.tags.clone();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(e: [f64; 4], nx: usize, ny: usize) -> GridSpec {
        GridSpec::new(Extent::new(e[0], e[1], e[2], e[3]), nx, ny).unwrap()
    }

    #[test]
    fn unit_square_centers() {
        let s = spec([0.0, 1.0, 0.0, 1.0], 2, 2);
        assert_eq!(s.x_centers(), vec![0.25, 0.75]);
        let (x, y) = s.world_coordinates();
        assert_eq!(x[[1, 0]], 0.75);
        assert_eq!(y[[0, 1]], 0.75);
    }

    #[test]
    fn default_centers_step_half_meter() {
        let xs = GridSpec::default().x_centers();
        assert_eq!(xs.len(), 100);
        assert!((xs[0] + 24.75).abs() < 1e-12);
        assert!((xs[99] - 24.75).abs() < 1e-12);
        for w in xs.windows(2) {
            assert!((w[1] - w[0] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn cell_sizes() {
        let s = spec([-10.0, 10.0, 0.0, 5.0], 4, 5);
        assert_eq!(s.dx(), 5.0);
        assert_eq!(s.dy(), 1.0);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(GridSpec::new(Extent::new(1.0, 0.0, 0.0, 1.0), 4, 4).is_err());
        assert!(GridSpec::new(Extent::new(0.0, 1.0, 0.0, 1.0), 1, 4).is_err());
        assert!(GridSpec::new(Extent::new(0.0, f64::NAN, 0.0, 1.0), 4, 4).is_err());
    }

    #[test]
    fn rejects_non_finite_heights() {
        let s = spec([0.0, 1.0, 0.0, 1.0], 2, 2);
        let mut h = Array2::zeros((2, 2));
        h[[1, 0]] = f64::NAN;
        match Terrain::new(s, h) {
            Err(TerrainError::NonFinite { i: 1, j: 0, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bilinear_exact_at_centers_and_on_planes() {
        let s = spec([-3.0, 7.0, 2.0, 6.0], 10, 8);
        let t = Terrain::from_fn(s, |x, y| 0.3 * x - 1.7 * y + 2.0).unwrap();
        for i in 0..10 {
            for j in 0..8 {
                assert_eq!(t.bilinear_sample(s.x_center(i), s.y_center(j)), t.get(i, j));
            }
        }
        for k in 0..50 {
            let x = -2.5 + 9.0 * (k as f64 / 49.0);
            let y = 2.25 + 3.5 * ((k * 7 % 50) as f64 / 49.0);
            let v = t.bilinear_sample(x, y);
            assert!((v - (0.3 * x - 1.7 * y + 2.0)).abs() < 1e-12);
        }
        let c = Terrain::constant(s, 4.5);
        assert_eq!(c.bilinear_sample(100.0, -100.0), 4.5);
    }

    #[test]
    fn bilinear_clamps_outside() {
        let s = spec([0.0, 2.0, 0.0, 2.0], 2, 2);
        let t = Terrain::from_fn(s, |x, _| x).unwrap();
        assert_eq!(t.bilinear_sample(-5.0, 1.0), 0.5);
        assert_eq!(t.bilinear_sample(5.0, 1.0), 1.5);
    }

    #[test]
    fn split_default_two_by_two() {
        let tiles = split_extent(&GridSpec::default(), 2, 2).unwrap();
        assert_eq!(tiles.len(), 4);
        for t in &tiles {
            assert_eq!(t.shape(), (50, 50));
            assert_eq!(t.extent().width(), 25.0);
            assert_eq!(t.extent().height(), 25.0);
        }
        assert_eq!(tiles[1].extent().x_min, 0.0);
        assert_eq!(tiles[1].extent().y_min, -25.0);
        assert_eq!(tiles[2].extent().y_min, 0.0);
    }

    #[test]
    fn split_identity_and_divisibility() {
        let s = GridSpec::default();
        assert_eq!(split_extent(&s, 1, 1).unwrap(), vec![s]);
        match split_extent(&s, 3, 2) {
            Err(TerrainError::NotDivisible { axis: 'x', .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn stack_rejects_mismatched_cells_and_gaps() {
        let a = Terrain::zeros(spec([0.0, 1.0, 0.0, 1.0], 2, 2));
        let b = Terrain::zeros(spec([1.0, 2.0, 0.0, 1.0], 4, 2));
        assert!(matches!(stack_tiles(&[a.clone(), b]), Err(TerrainError::InvalidTiling(_))));
        let c = Terrain::zeros(spec([1.0, 2.0, 1.0, 2.0], 2, 2));
        assert!(matches!(stack_tiles(&[a.clone(), c]), Err(TerrainError::InvalidTiling(_))));
        assert!(matches!(stack_tiles(&[a.clone(), a]), Err(TerrainError::InvalidTiling(_))));
    }

    #[test]
    fn single_tile_stack_is_identity() {
        let t = Terrain::from_fn(spec([0.0, 1.0, 0.0, 1.0], 3, 3), |x, y| x * y).unwrap();
        assert_eq!(stack_tiles(std::slice::from_ref(&t)).unwrap(), t);
    }

    #[test]
    fn distance_to_rectangle() {
        let e = Extent::new(0.0, 10.0, 0.0, 10.0);
        assert_eq!(e.distance_to(5.0, 5.0), 0.0);
        assert_eq!(e.distance_to(-3.0, 5.0), 3.0);
        assert_eq!(e.distance_to(13.0, 14.0), 5.0);
    }
}
