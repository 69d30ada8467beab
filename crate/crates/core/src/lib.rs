//! Procedural heightmap terrains: grid model, noise and function-based
//! generators, terrain algebra, metrics, weight calibration and file formats.

pub mod analysis;
pub mod combine;
pub mod error;
pub mod expr;
pub mod grid;
pub mod io;
pub mod noise;
pub mod obstacles;
pub mod parameterize;

pub use error::{Result, TerrainError};
pub use grid::{split_extent, stack_tiles, Extent, GridSpec, Terrain};
