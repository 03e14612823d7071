use std::fmt;

/// Curvatures below this magnitude are stored as straight lines.
pub const MIN_ARC_CURVATURE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct OdrMap {
    pub header: Header,
    pub roads: Vec<Road>,
}

impl OdrMap {
    pub fn new(name: impl Into<String>) -> Self {
        OdrMap { header: Header::new(name), roads: Vec::new() }
    }

    pub fn road(&self, id: &str) -> Option<&Road> {
        self.roads.iter().find(|r| r.id == id)
    }

    /// Orders roads by id, the order used on disk.
    pub fn sort_roads(&mut self) {
        self.roads.sort_by(|a, b| a.id.cmp(&b.id));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Header {
    pub name: String,
    pub rev_major: u32,
    pub rev_minor: u32,
    pub geo_reference: Option<String>,
}

impl Header {
    pub fn new(name: impl Into<String>) -> Self {
        Header { name: name.into(), rev_major: 1, rev_minor: 4, geo_reference: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Road {
    pub id: String,
    pub name: String,
    pub length: f64,
    pub predecessor: Option<RoadLink>,
    pub successor: Option<RoadLink>,
    pub plan_view: Vec<Geometry>,
    pub elevation_profile: Vec<ElevPoly>,
    pub lane_sections: Vec<LaneSection>,
}

impl Road {
    /// Road whose length is the sum of its plan-view segment lengths.
    pub fn new(id: impl Into<String>, plan_view: Vec<Geometry>) -> Self {
        let length = plan_view.iter().map(|g| g.length).sum();
        Road {
            id: id.into(),
            name: String::new(),
            length,
            predecessor: None,
            successor: None,
            plan_view,
            elevation_profile: Vec::new(),
            lane_sections: Vec::new(),
        }
    }

    pub fn with_elevation(mut self, profile: Vec<ElevPoly>) -> Self {
        self.elevation_profile = profile;
        self
    }

    pub fn with_lane_section(mut self, section: LaneSection) -> Self {
        self.lane_sections.push(section);
        self
    }

    /// Index of the lane section governing `s`.
    pub fn lane_section_index(&self, s: f64) -> Option<usize> {
        governing(self.lane_sections.iter().map(|l| l.s), s)
    }

    /// `[start, end)` of lane section `idx`.
    pub fn lane_section_span(&self, idx: usize) -> (f64, f64) {
        let start = self.lane_sections[idx].s;
        let end = self.lane_sections.get(idx + 1).map_or(self.length, |n| n.s);
        (start, end)
    }
}

/// Index of the last entry whose start is `<= s`, falling back to the first.
pub(crate) fn governing(starts: impl Iterator<Item = f64>, s: f64) -> Option<usize> {
    let mut found = None;
    for (i, start) in starts.enumerate() {
        if i == 0 || start <= s {
            found = Some(i);
        } else {
            break;
        }
    }
    found
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContactPoint {
    Start,
    End,
}

impl ContactPoint {
    pub fn as_str(self) -> &'static str {
        match self {
            ContactPoint::Start => "start",
            ContactPoint::End => "end",
        }
    }
}

/// Road-to-road link (`elementType="road"`).
#[derive(Debug, Clone, PartialEq)]
pub struct RoadLink {
    pub road_id: String,
    pub contact_point: ContactPoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub s: f64,
    pub x: f64,
    pub y: f64,
    pub hdg: f64,
    pub length: f64,
    pub kind: GeometryKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeometryKind {
    Line,
    Arc { curvature: f64 },
    /// Local cubics `u(p)`, `v(p)` with `p` running over `[0, length]`.
    ParamPoly3 { au: f64, bu: f64, cu: f64, du: f64, av: f64, bv: f64, cv: f64, dv: f64 },
}

impl GeometryKind {
    /// Arc record, or a line when the curvature is numerically zero.
    pub fn arc(curvature: f64) -> GeometryKind {
        if curvature.abs() < MIN_ARC_CURVATURE {
            GeometryKind::Line
        } else {
            GeometryKind::Arc { curvature }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GeometryKind::Line => "line",
            GeometryKind::Arc { .. } => "arc",
            GeometryKind::ParamPoly3 { .. } => "paramPoly3",
        }
    }
}

/// Cubic `a + b*ds + c*ds^2 + d*ds^3` starting at `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElevPoly {
    pub s: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl ElevPoly {
    pub fn constant(s: f64, a: f64) -> Self {
        ElevPoly { s, a, b: 0.0, c: 0.0, d: 0.0 }
    }

    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        cubic(self.a, self.b, self.c, self.d, s - self.s)
    }

    #[inline]
    pub fn slope(&self, s: f64) -> f64 {
        let ds = s - self.s;
        self.b + ds * (2.0 * self.c + 3.0 * self.d * ds)
    }
}

#[inline]
pub(crate) fn cubic(a: f64, b: f64, c: f64, d: f64, t: f64) -> f64 {
    a + t * (b + t * (c + t * d))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LaneType {
    Driving,
    Sidewalk,
    Shoulder,
    None,
    /// Any other OpenDRIVE lane type, kept verbatim.
    Other(String),
}

impl LaneType {
    pub fn as_str(&self) -> &str {
        match self {
            LaneType::Driving => "driving",
            LaneType::Sidewalk => "sidewalk",
            LaneType::Shoulder => "shoulder",
            LaneType::None => "none",
            LaneType::Other(s) => s,
        }
    }

    pub fn parse(s: &str) -> LaneType {
        match s {
            "driving" => LaneType::Driving,
            "sidewalk" => LaneType::Sidewalk,
            "shoulder" => LaneType::Shoulder,
            "none" => LaneType::None,
            other => LaneType::Other(other.to_string()),
        }
    }
}

impl fmt::Display for LaneType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Width cubic over `ds - s_offset`, `ds` measured from the lane section start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaneWidth {
    pub s_offset: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl LaneWidth {
    pub fn constant(width: f64) -> Self {
        LaneWidth { s_offset: 0.0, a: width, b: 0.0, c: 0.0, d: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lane {
    pub id: i32,
    pub lane_type: LaneType,
    pub widths: Vec<LaneWidth>,
}

impl Lane {
    pub fn new(id: i32, lane_type: LaneType, width: f64) -> Self {
        Lane { id, lane_type, widths: vec![LaneWidth::constant(width)] }
    }

    pub fn center() -> Self {
        Lane { id: 0, lane_type: LaneType::None, widths: Vec::new() }
    }

    /// Width at `ds` from the section start; zero when the lane has no width record.
    pub fn width_at(&self, ds: f64) -> f64 {
        match governing(self.widths.iter().map(|w| w.s_offset), ds) {
            Some(i) => {
                let w = &self.widths[i];
                cubic(w.a, w.b, w.c, w.d, ds - w.s_offset)
            }
            None => 0.0,
        }
    }
}

/// Lanes at one s-range. `left` holds ids 1, 2, ... (ascending outward),
/// `right` holds -1, -2, ... (descending outward).
#[derive(Debug, Clone, PartialEq)]
pub struct LaneSection {
    pub s: f64,
    pub left: Vec<Lane>,
    pub center: Lane,
    pub right: Vec<Lane>,
}

impl LaneSection {
    pub fn new(s: f64) -> Self {
        LaneSection { s, left: Vec::new(), center: Lane::center(), right: Vec::new() }
    }

    /// Section with constant-width lanes given from the center outward on each side.
    pub fn symmetric(left: &[(LaneType, f64)], right: &[(LaneType, f64)]) -> Self {
        let mut sec = LaneSection::new(0.0);
        sec.left = left.iter().enumerate().map(|(i, (t, w))| Lane::new(i as i32 + 1, t.clone(), *w)).collect();
        sec.right = right.iter().enumerate().map(|(i, (t, w))| Lane::new(-(i as i32) - 1, t.clone(), *w)).collect();
        sec
    }

    pub fn lane(&self, id: i32) -> Option<&Lane> {
        match id {
            0 => Some(&self.center),
            id if id > 0 => self.left.iter().find(|l| l.id == id),
            id => self.right.iter().find(|l| l.id == id),
        }
    }

    /// Every lane from the outermost left to the outermost right.
    pub fn lanes_left_to_right(&self) -> impl Iterator<Item = &Lane> {
        let mut left: Vec<&Lane> = self.left.iter().collect();
        left.sort_by_key(|l| std::cmp::Reverse(l.id));
        let mut right: Vec<&Lane> = self.right.iter().collect();
        right.sort_by_key(|l| std::cmp::Reverse(l.id));
        left.into_iter().chain(std::iter::once(&self.center)).chain(right)
    }
}
