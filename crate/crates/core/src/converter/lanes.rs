use super::{ConversionConfig, FitError};
use crate::geo::Tags;
use crate::odr::{LaneSection, LaneType};

/// Lanes on each side of the reference line, listed from the center outward.
#[derive(Debug, Clone, PartialEq)]
pub struct LaneSpec {
    pub left: Vec<(LaneType, f64)>,
    pub right: Vec<(LaneType, f64)>,
}

impl LaneSpec {
    pub fn driving_lanes(&self) -> usize {
        self.left.iter().chain(&self.right).filter(|(t, _)| *t == LaneType::Driving).count()
    }

    pub fn to_section(&self) -> LaneSection {
        LaneSection::symmetric(&self.left, &self.right)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Oneway {
    No,
    Forward,
    Backward,
}

fn oneway(tags: &Tags) -> Oneway {
    match tags.get("oneway").map(String::as_str) {
        Some("yes" | "true" | "1") => Oneway::Forward,
        Some("-1" | "reverse") => Oneway::Backward,
        _ => Oneway::No,
    }
}

/// Lane layout from OSM tags. An explicit `lanes` count overrides the class
/// table; one-way roads put every lane on the right (`oneway=-1`: on the left).
/// Two-way roads give the extra lane of an odd count to the right side.
pub fn lanes_from_tags(tags: &Tags, config: &ConversionConfig) -> Result<LaneSpec, FitError> {
    let class = tags.get("highway").ok_or(FitError::MissingHighway)?;
    let rule = config.classes.get(class).ok_or_else(|| FitError::UnmappedClass(class.clone()))?;
    let direction = oneway(tags);

    let explicit = tags.get("lanes").and_then(|raw| match raw.trim().parse::<u32>() {
        Ok(n) if n > 0 => Some(n),
        _ => {
            log::warn!("ignoring lanes={raw:?} on highway={class}; using the class default");
            None
        }
    });
    let (n_left, n_right) = match (explicit, direction) {
        (Some(n), Oneway::Forward) => (0, n),
        (Some(n), Oneway::Backward) => (n, 0),
        (Some(n), Oneway::No) => (n / 2, n - n / 2),
        (None, Oneway::Forward) => (0, rule.lanes_right.max(rule.lanes_left)),
        (None, Oneway::Backward) => (rule.lanes_right.max(rule.lanes_left), 0),
        (None, Oneway::No) => (rule.lanes_left, rule.lanes_right),
    };

    let driving = |n: u32| vec![(LaneType::Driving, rule.width); n as usize];
    let mut spec = LaneSpec { left: driving(n_left), right: driving(n_right) };
    let sidewalk = (LaneType::Sidewalk, config.sidewalk_width);
    match tags.get("sidewalk").map(String::as_str) {
        Some("both") => {
            spec.left.push(sidewalk.clone());
            spec.right.push(sidewalk);
        }
        Some("left") => spec.left.push(sidewalk),
        Some("right") => spec.right.push(sidewalk),
        _ => {}
    }
    Ok(spec)
}
