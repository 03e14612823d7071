use std::collections::HashSet;
use std::fmt;

use super::model::{OdrMap, Road};
use crate::geom::normalize_angle;

pub const LENGTH_TOLERANCE: f64 = 1e-6;
pub const C0_TOLERANCE: f64 = 1e-4;
pub const HEADING_TOLERANCE: f64 = 1e-3;
pub const WIDTH_SAMPLE_STEP: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IssueKind {
    DuplicateRoadId,
    EmptyPlanView,
    NonPositiveLength,
    /// Segment, elevation or lane-section offsets not starting at 0 / not increasing.
    BadOffsets,
    LengthMismatch,
    C0Gap,
    HeadingGap,
    MissingCenterLane,
    NonContiguousLanes,
    NegativeWidth,
    DanglingLink,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Issue {
    pub severity: Severity,
    pub kind: IssueKind,
    pub road_id: String,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}: road {}: {:?}: {}", self.road_id, self.kind, self.message)
    }
}

pub fn has_errors(issues: &[Issue]) -> bool {
    issues.iter().any(|i| i.severity == Severity::Error)
}

/// Structural checks over the whole map. Heading discontinuities are
/// warnings; everything else is an error.
pub fn validate(map: &OdrMap) -> Vec<Issue> {
    let mut issues = Vec::new();
    let ids: HashSet<&str> = map.roads.iter().map(|r| r.id.as_str()).collect();
    let mut seen = HashSet::new();
    for road in &map.roads {
        if !seen.insert(road.id.as_str()) {
            push(&mut issues, Severity::Error, IssueKind::DuplicateRoadId, road, "road id used more than once".into());
        }
        validate_road_into(road, &mut issues);
        for (which, link) in [("predecessor", &road.predecessor), ("successor", &road.successor)] {
            if let Some(l) = link {
                if !ids.contains(l.road_id.as_str()) {
                    push(&mut issues, Severity::Error, IssueKind::DanglingLink, road, format!("{which} references unknown road {}", l.road_id));
                }
            }
        }
    }
    issues
}

/// Checks that only involve one road (no link resolution).
pub fn validate_road(road: &Road) -> Vec<Issue> {
    let mut issues = Vec::new();
    validate_road_into(road, &mut issues);
    issues
}

fn push(issues: &mut Vec<Issue>, severity: Severity, kind: IssueKind, road: &Road, message: String) {
    issues.push(Issue { severity, kind, road_id: road.id.clone(), message });
}

fn check_offsets(issues: &mut Vec<Issue>, road: &Road, what: &str, offsets: impl Iterator<Item = f64>) {
    let mut prev: Option<f64> = None;
    for (i, s) in offsets.enumerate() {
        let ok = match prev {
            None => s.abs() <= LENGTH_TOLERANCE,
            Some(p) => s > p,
        };
        if !ok {
            push(issues, Severity::Error, IssueKind::BadOffsets, road, format!("{what} #{i} has s={s}; offsets must start at 0 and increase"));
        }
        prev = Some(s);
    }
}

fn validate_road_into(road: &Road, issues: &mut Vec<Issue>) {
    if road.plan_view.is_empty() {
        push(issues, Severity::Error, IssueKind::EmptyPlanView, road, "plan view has no geometry".into());
        return;
    }
    if !(road.length > 0.0) {
        push(issues, Severity::Error, IssueKind::NonPositiveLength, road, format!("road length {} is not positive", road.length));
    }
    for (i, g) in road.plan_view.iter().enumerate() {
        if !(g.length > 0.0) {
            push(issues, Severity::Error, IssueKind::NonPositiveLength, road, format!("geometry #{i} has length {}", g.length));
        }
    }
    check_offsets(issues, road, "geometry", road.plan_view.iter().map(|g| g.s));
    check_offsets(issues, road, "elevation", road.elevation_profile.iter().map(|e| e.s));
    check_offsets(issues, road, "lane section", road.lane_sections.iter().map(|l| l.s));

    let total: f64 = road.plan_view.iter().map(|g| g.length).sum();
    if (total - road.length).abs() > LENGTH_TOLERANCE {
        push(issues, Severity::Error, IssueKind::LengthMismatch, road, format!("segment lengths sum to {total}, road length is {}", road.length));
    }
    let mut acc = 0.0;
    for (i, g) in road.plan_view.iter().enumerate() {
        if (g.s - acc).abs() > LENGTH_TOLERANCE {
            push(issues, Severity::Error, IssueKind::LengthMismatch, road, format!("geometry #{i} starts at s={} but preceding lengths sum to {acc}", g.s));
        }
        acc += g.length;
    }

    for (i, w) in road.plan_view.windows(2).enumerate() {
        let end = w[0].end_pose();
        let gap = end.position().distance(crate::geom::Vec2::new(w[1].x, w[1].y));
        if gap > C0_TOLERANCE {
            push(issues, Severity::Error, IssueKind::C0Gap, road, format!("gap of {gap:.6} m between geometry #{i} and #{}", i + 1));
        }
        let dh = normalize_angle(w[1].hdg - end.hdg).abs();
        if dh > HEADING_TOLERANCE {
            push(issues, Severity::Warning, IssueKind::HeadingGap, road, format!("heading jumps {dh:.6} rad between geometry #{i} and #{}", i + 1));
        }
    }

    for (idx, sec) in road.lane_sections.iter().enumerate() {
        if sec.center.id != 0 {
            push(issues, Severity::Error, IssueKind::MissingCenterLane, road, format!("lane section #{idx} center lane has id {}", sec.center.id));
        }
        let mut left: Vec<i32> = sec.left.iter().map(|l| l.id).collect();
        left.sort_unstable();
        let mut right: Vec<i32> = sec.right.iter().map(|l| -l.id).collect();
        right.sort_unstable();
        let contiguous = |ids: &[i32]| ids.iter().enumerate().all(|(k, id)| *id == k as i32 + 1);
        if !contiguous(&left) || !contiguous(&right) {
            push(issues, Severity::Error, IssueKind::NonContiguousLanes, road, format!("lane section #{idx} lane ids are not contiguous"));
        }

        let (start, end) = road.lane_section_span(idx);
        let span = (end - start).max(0.0);
        let steps = (span / WIDTH_SAMPLE_STEP).floor() as usize;
        let samples = (0..=steps).map(|k| k as f64 * WIDTH_SAMPLE_STEP).chain(std::iter::once(span));
        let samples: Vec<f64> = samples.collect();
        for lane in sec.left.iter().chain(&sec.right) {
            if let Some(ds) = samples.iter().copied().find(|ds| lane.width_at(*ds) < -1e-12) {
                push(
                    issues,
                    Severity::Error,
                    IssueKind::NegativeWidth,
                    road,
                    format!("lane {} of section #{idx} has width {} at ds={ds}", lane.id, lane.width_at(ds)),
                );
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::odr::*;

    fn line(s: f64, x: f64, y: f64, hdg: f64, length: f64) -> Geometry {
        Geometry { s, x, y, hdg, length, kind: GeometryKind::Line }
    }

    fn clean_road() -> Road {
        Road::new("a", vec![line(0.0, 0.0, 0.0, 0.0, 10.0)])
            .with_elevation(vec![ElevPoly::constant(0.0, 0.0)])
            .with_lane_section(LaneSection::symmetric(&[(LaneType::Driving, 3.5)], &[(LaneType::Driving, 3.5)]))
    }

    fn kinds(map: &OdrMap) -> Vec<(Severity, IssueKind)> {
        validate(map).into_iter().map(|i| (i.severity, i.kind)).collect()
    }

    fn map_of(road: Road) -> OdrMap {
        let mut m = OdrMap::new("v");
        m.roads.push(road);
        m
    }

    #[test]
    fn clean_single_line() {
        assert!(validate(&map_of(clean_road())).is_empty());
    }

    #[test]
    fn half_meter_gap() {
        let mut r = clean_road();
        r.plan_view = vec![line(0.0, 0.0, 0.0, 0.0, 10.0), line(10.0, 10.5, 0.0, 0.0, 5.0)];
        r.length = 15.0;
        assert_eq!(kinds(&map_of(r)), vec![(Severity::Error, IssueKind::C0Gap)]);
    }

    #[test]
    fn heading_kink_is_warning() {
        let mut r = clean_road();
        r.plan_view = vec![line(0.0, 0.0, 0.0, 0.0, 10.0), line(10.0, 10.0, 0.0, 1.0, 5.0)];
        r.length = 15.0;
        let issues = validate(&map_of(r));
        assert_eq!(issues.len(), 1);
        assert_eq!((issues[0].severity, issues[0].kind), (Severity::Warning, IssueKind::HeadingGap));
        assert!(!has_errors(&issues));
    }

    #[test]
    fn negative_width() {
        let mut r = clean_road();
        r.lane_sections[0].right[0].widths[0].a = -1.0;
        assert_eq!(kinds(&map_of(r)), vec![(Severity::Error, IssueKind::NegativeWidth)]);
    }

    #[test]
    fn width_going_negative_late_is_found() {
        let mut r = clean_road();
        r.lane_sections[0].left[0].widths[0] = LaneWidth { s_offset: 0.0, a: 1.0, b: -0.15, c: 0.0, d: 0.0 };
        assert_eq!(kinds(&map_of(r)), vec![(Severity::Error, IssueKind::NegativeWidth)]);
    }

    #[test]
    fn length_mismatch_and_gapped_ids() {
        let mut r = clean_road();
        r.length = 11.0;
        r.lane_sections[0].left[0].id = 2;
        assert_eq!(
            kinds(&map_of(r)),
            vec![(Severity::Error, IssueKind::LengthMismatch), (Severity::Error, IssueKind::NonContiguousLanes)]
        );
    }

    #[test]
    fn duplicate_ids_and_dangling_links() {
        let mut a = clean_road();
        a.successor = Some(RoadLink { road_id: "zz".into(), contact_point: ContactPoint::Start });
        let mut m = map_of(a);
        m.roads.push(clean_road());
        let k = kinds(&m);
        assert!(k.contains(&(Severity::Error, IssueKind::DanglingLink)));
        assert!(k.contains(&(Severity::Error, IssueKind::DuplicateRoadId)));
    }

    #[test]
    fn offsets_must_increase() {
        let mut r = clean_road();
        r.elevation_profile = vec![ElevPoly::constant(0.0, 1.0), ElevPoly::constant(0.0, 2.0)];
        assert_eq!(kinds(&map_of(r)), vec![(Severity::Error, IssueKind::BadOffsets)]);
    }
}
