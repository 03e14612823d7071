//! OpenDRIVE 1.4 document model: plan view (line, arc, paramPoly3),
//! elevation profile, lanes with polynomial widths, and road links.
//!
//! Evaluators are pure functions over immutable roads, so a map can be shared
//! between worker threads without locking.

mod eval;
mod model;
mod validate;
mod xml;

pub use eval::{eval_elevation, eval_elevation_slope, eval_plan_view, lane_boundary_t, Pose};
pub use model::*;
pub use validate::{
    has_errors, validate, validate_road, Issue, IssueKind, Severity, C0_TOLERANCE, HEADING_TOLERANCE, LENGTH_TOLERANCE,
    WIDTH_SAMPLE_STEP,
};
pub use xml::{deserialize, deserialize_with_warnings, serialize, Parsed};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OdrError {
    #[error("OpenDRIVE XML error at line {line}: {message}")]
    Xml { line: u32, message: String },
    #[error("unsupported OpenDRIVE record <{element}> at line {line}")]
    UnsupportedRecord { element: String, line: u32 },
    #[error("s={s} is outside road {road} (length {length})")]
    Domain { road: String, s: f64, length: f64 },
    #[error("road {0} has no elevation profile")]
    MissingProfile(String),
    #[error("lane {0} does not exist in the lane section")]
    UnknownLane(i32),
    #[error("{0}")]
    Invalid(String),
}
