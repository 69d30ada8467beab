//! Obstacles: six-parameter records describing local scattered structures,
//! the distributions they are sampled from, and the shape functions that turn
//! them into terrain elements.

mod distribution;
mod shapes;

pub use distribution::{
    as_probability, sample_obstacles, DensitySampler, DistributionSet, ParamDistribution,
    OBSTACLE_PARAMS,
};
pub use shapes::{gen_function_shape, remove_distant_obstacles, shape_value, ShapeKind};

use crate::error::{Result, TerrainError};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Obstacle {
    pub position: (f64, f64),
    pub height: f64,
    pub width: f64,
    pub aspect: f64,
    pub yaw_deg: f64,
    pub pitch_deg: f64,
}

impl Obstacle {
    pub fn new(
        position: (f64, f64),
        height: f64,
        width: f64,
        aspect: f64,
        yaw_deg: f64,
        pitch_deg: f64,
    ) -> Result<Self> {
        let o = Obstacle {
            position,
            height,
            width,
            aspect,
            yaw_deg,
            pitch_deg,
        };
        o.validate()?;
        Ok(o)
    }

    pub fn validate(&self) -> Result<()> {
        let values = [
            self.position.0,
            self.position.1,
            self.height,
            self.width,
            self.aspect,
            self.yaw_deg,
            self.pitch_deg,
        ];
        if values.iter().any(|v| !v.is_finite()) {
            return Err(TerrainError::param("obstacle", "all fields must be finite"));
        }
        if !(self.width > 0.0) {
            return Err(TerrainError::param("width", format!("must be positive, got {}", self.width)));
        }
        if !(self.aspect > 0.0) {
            return Err(TerrainError::param(
                "aspect",
                format!("must be positive, got {}", self.aspect),
            ));
        }
        Ok(())
    }
}

impl Default for Obstacle {
    /// Shape used by the function generators when no obstacle list is given.
    fn default() -> Self {
        Obstacle {
            position: (0.0, 0.0),
            height: 5.0,
            width: 10.0,
            aspect: 1.0,
            yaw_deg: 0.0,
            pitch_deg: 10.0,
        }
    }
}
