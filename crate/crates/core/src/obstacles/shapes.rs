use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use super::Obstacle;
use crate::error::{Result, TerrainError};
use crate::grid::{GridSpec, Terrain};

/// Function-based obstacle shapes.
///
/// All shapes work in a local frame centered at the obstacle position:
/// `v` runs along the yaw direction (yaw 0 points to +y, yaw 90 to +x) and
/// `u` across it. Footprints span `width` across and `width / aspect` along.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShapeKind {
    Gaussian,
    Step,
    Donut,
    Plane,
    Sphere,
    Cube,
    SmoothStep,
    Sine,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 8] = [
        ShapeKind::Gaussian,
        ShapeKind::Step,
        ShapeKind::Donut,
        ShapeKind::Plane,
        ShapeKind::Sphere,
        ShapeKind::Cube,
        ShapeKind::SmoothStep,
        ShapeKind::Sine,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ShapeKind::Gaussian => "Gaussian",
            ShapeKind::Step => "Step",
            ShapeKind::Donut => "Donut",
            ShapeKind::Plane => "Plane",
            ShapeKind::Sphere => "Sphere",
            ShapeKind::Cube => "Cube",
            ShapeKind::SmoothStep => "SmoothStep",
            ShapeKind::Sine => "Sine",
        }
    }
}

impl fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ShapeKind {
    type Err = TerrainError;

    fn from_str(s: &str) -> Result<Self> {
        ShapeKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let names: Vec<_> = ShapeKind::ALL.iter().map(|k| k.name()).collect();
                TerrainError::param("shape", format!("unknown shape `{s}` (known: {})", names.join(", ")))
            })
    }
}

/// Local (across, along) coordinates of a world point relative to `o`.
fn local_frame(o: &Obstacle, x: f64, y: f64) -> (f64, f64) {
    let (s, c) = o.yaw_deg.to_radians().sin_cos();
    let ox = x - o.position.0;
    let oy = y - o.position.1;
    (ox * c - oy * s, ox * s + oy * c)
}

/// Value of one obstacle shape at world point (x, y).
pub fn shape_value(kind: ShapeKind, o: &Obstacle, x: f64, y: f64) -> f64 {
    let (u, v) = local_frame(o, x, y);
    let h = o.height;
    let w = o.width;
    let a = o.aspect;
    match kind {
        ShapeKind::Gaussian => {
            let un = u / w;
            let vn = v * a / w;
            h * (-(un * un + vn * vn) / 2.0).exp()
        }
        ShapeKind::Sphere => {
            let un = 2.0 * u / w;
            let vn = 2.0 * v * a / w;
            let rho2 = un * un + vn * vn;
            if rho2 < 1.0 {
                h * (1.0 - rho2).sqrt()
            } else {
                0.0
            }
        }
        ShapeKind::Cube => {
            if u.abs() <= w / 2.0 && v.abs() <= w / (2.0 * a) {
                h
            } else {
                0.0
            }
        }
        ShapeKind::Step => {
            if v >= 0.0 {
                h
            } else {
                0.0
            }
        }
        ShapeKind::SmoothStep => {
            let t = (v / w + 0.5).clamp(0.0, 1.0);
            h * t * t * (3.0 - 2.0 * t)
        }
        ShapeKind::Donut => {
            let rho = (u * u + (v * a) * (v * a)).sqrt();
            let radius = w / 2.0;
            let sigma = w / 10.0;
            h * (-(rho - radius).powi(2) / (2.0 * sigma * sigma)).exp()
        }
        ShapeKind::Sine => h * (2.0 * PI * v / w).sin(),
        ShapeKind::Plane => o.pitch_deg.to_radians().tan() * v,
    }
}

/// One terrain element per obstacle.
pub fn gen_function_shape(
    kind: ShapeKind,
    obstacles: &[Obstacle],
    spec: GridSpec,
) -> Result<Vec<Terrain>> {
    if obstacles.is_empty() {
        return Err(TerrainError::param("obstacles", "empty obstacle list"));
    }
    obstacles
        .iter()
        .map(|o| {
            o.validate()?;
            Ok(Terrain::from_fn(spec, |x, y| shape_value(kind, o, x, y))?
                .with_tag("generator", kind.name()))
        })
        .collect()
}

/// Keeps obstacles whose position lies within `d` of the extent rectangle.
pub fn remove_distant_obstacles(obs: &[Obstacle], spec: &GridSpec, d: f64) -> Result<Vec<Obstacle>> {
    if !(d >= 0.0) {
        return Err(TerrainError::param("distance", format!("must be non-negative, got {d}")));
    }
    let e = spec.extent();
    Ok(obs
        .iter()
        .filter(|o| e.distance_to(o.position.0, o.position.1) <= d)
        .copied()
        .collect())
}
