use super::model::{cubic, governing, Geometry, GeometryKind, LaneSection, Road};
use super::OdrError;
use crate::geom::Vec2;

/// Slack allowed on the `[0, length]` domain for accumulated rounding.
const S_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub hdg: f64,
}

impl Pose {
    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    /// Point `t` meters to the left of the pose (negative t: right).
    pub fn offset(&self, t: f64) -> Vec2 {
        let (s, c) = self.hdg.sin_cos();
        Vec2::new(self.x - t * s, self.y + t * c)
    }
}

/// `sin(x) / x`, series-expanded near zero.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

impl Geometry {
    /// Pose at `ds` meters from the segment start.
    pub fn pose_at(&self, ds: f64) -> Pose {
        match self.kind {
            GeometryKind::Line => {
                let (s, c) = self.hdg.sin_cos();
                Pose { x: self.x + ds * c, y: self.y + ds * s, hdg: self.hdg }
            }
            GeometryKind::Arc { curvature } => {
                // chord of length ds*sinc(k*ds/2) at the mean heading; stable as k -> 0
                let half = curvature * ds / 2.0;
                let chord = ds * sinc(half);
                let (s, c) = (self.hdg + half).sin_cos();
                Pose { x: self.x + chord * c, y: self.y + chord * s, hdg: self.hdg + curvature * ds }
            }
            GeometryKind::ParamPoly3 { au, bu, cu, du, av, bv, cv, dv } => {
                let u = cubic(au, bu, cu, du, ds);
                let v = cubic(av, bv, cv, dv, ds);
                let du_dp = bu + ds * (2.0 * cu + 3.0 * du * ds);
                let dv_dp = bv + ds * (2.0 * cv + 3.0 * dv * ds);
                let (s, c) = self.hdg.sin_cos();
                Pose { x: self.x + u * c - v * s, y: self.y + u * s + v * c, hdg: self.hdg + dv_dp.atan2(du_dp) }
            }
        }
    }

    pub fn end_pose(&self) -> Pose {
        self.pose_at(self.length)
    }
}

fn check_domain(road: &Road, s: f64) -> Result<f64, OdrError> {
    if !(s >= -S_SLACK && s <= road.length + S_SLACK) {
        return Err(OdrError::Domain { road: road.id.clone(), s, length: road.length });
    }
    Ok(s.clamp(0.0, road.length))
}

/// Reference-line pose at `s`; the governing segment is the last one starting at or before `s`.
pub fn eval_plan_view(road: &Road, s: f64) -> Result<Pose, OdrError> {
    let s = check_domain(road, s)?;
    let idx = governing(road.plan_view.iter().map(|g| g.s), s)
        .ok_or_else(|| OdrError::Invalid(format!("road {} has an empty plan view", road.id)))?;
    let g = &road.plan_view[idx];
    Ok(g.pose_at(s - g.s))
}

pub fn eval_elevation(road: &Road, s: f64) -> Result<f64, OdrError> {
    let s = check_domain(road, s)?;
    let idx = governing(road.elevation_profile.iter().map(|e| e.s), s)
        .ok_or_else(|| OdrError::MissingProfile(road.id.clone()))?;
    Ok(road.elevation_profile[idx].eval(s))
}

/// z' at `s`.
pub fn eval_elevation_slope(road: &Road, s: f64) -> Result<f64, OdrError> {
    let s = check_domain(road, s)?;
    let idx = governing(road.elevation_profile.iter().map(|e| e.s), s)
        .ok_or_else(|| OdrError::MissingProfile(road.id.clone()))?;
    Ok(road.elevation_profile[idx].slope(s))
}

/// Signed lateral offset of the outer boundary of `lane_id` at `ds` into the
/// section: the sum of the widths from the center lane out to `lane_id`,
/// positive to the left.
pub fn lane_boundary_t(section: &LaneSection, lane_id: i32, ds: f64) -> Result<f64, OdrError> {
    if section.lane(lane_id).is_none() {
        return Err(OdrError::UnknownLane(lane_id));
    }
    let t = match lane_id {
        0 => 0.0,
        id if id > 0 => section.left.iter().filter(|l| l.id <= id).map(|l| l.width_at(ds)).sum(),
        id => -section.right.iter().filter(|l| l.id >= id).map(|l| l.width_at(ds)).sum::<f64>(),
    };
    Ok(t)
}
