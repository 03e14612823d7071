//! Rigid 2D alignment of OSM centerlines to LiDAR ground evidence (point-to-point ICP).

mod finetune;
mod icp;
mod neighbors;
mod solve;
mod transform;

pub use finetune::{centerline_samples, fine_tune_graph, ground_band, GROUND_BAND};
pub use icp::{correspondences, icp_align, resample_polyline, IcpIteration, IcpParams, IcpReport};
pub use neighbors::GridIndex;
pub use solve::{pair_rms, solve_rigid_2d};
pub use transform::RigidTransform2D;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RegistrationError {
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("no overlap: iteration {iteration} found only {correspondences} correspondences")]
    NoOverlap { iteration: usize, correspondences: usize },
    #[error("{0}")]
    Precondition(String),
}
