//! Elevation inputs: ESRI ASCII grids, XYZ point clouds, and ground extraction.

mod cloud;
mod dem;
mod ground;

pub use cloud::{load_xyz, Point3, PointCloud};
pub use dem::{load_dem, Dem, Rect};
pub use ground::{nearest_rank, rasterize_ground, DEFAULT_GROUND_CELL, DEFAULT_GROUND_PERCENTILE};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TerrainError {
    #[error("format error at line {line}: {message}")]
    Format { line: u32, message: String },
    #[error("query ({x}, {y}) is outside the elevation grid")]
    OutOfBounds { x: f64, y: f64 },
    #[error("no elevation data around ({x}, {y})")]
    NoData { x: f64, y: f64 },
    #[error("{0}")]
    Precondition(String),
}

/// Anything that answers height queries in the local frame.
pub trait HeightField {
    fn height(&self, x: f64, y: f64) -> Result<f64, TerrainError>;
}

impl HeightField for Dem {
    fn height(&self, x: f64, y: f64) -> Result<f64, TerrainError> {
        self.sample_height(x, y)
    }
}
