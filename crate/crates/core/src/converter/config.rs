use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::config::{ConfigError, KeyValues};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMode {
    /// Douglas-Peucker simplification, one line per remaining segment.
    Polyline,
    /// Greedy circle fitting over windows of consecutive vertices.
    ArcFit,
}

impl FromStr for FitMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "polyline" => Ok(FitMode::Polyline),
            "arcfit" => Ok(FitMode::ArcFit),
            other => Err(format!("unknown fit mode `{other}` (expected polyline or arcfit)")),
        }
    }
}

impl fmt::Display for FitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitMode::Polyline => "polyline",
            FitMode::ArcFit => "arcfit",
        })
    }
}

/// Lane counts and width for one `highway` class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassRule {
    pub lanes_left: u32,
    pub lanes_right: u32,
    pub width: f64,
}

impl ClassRule {
    pub const fn new(lanes_left: u32, lanes_right: u32, width: f64) -> Self {
        ClassRule { lanes_left, lanes_right, width }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConversionConfig {
    pub fit_mode: FitMode,
    pub arc_tolerance: f64,
    pub simplify_epsilon: f64,
    pub elevation_sample_step: f64,
    pub default_lane_width: f64,
    pub bridge_clearance_min: f64,
    pub sidewalk_width: f64,
    pub classes: BTreeMap<String, ClassRule>,
}

impl Default for ConversionConfig {
    fn default() -> Self {
        let classes = [
            ("motorway", ClassRule::new(2, 2, 3.7)),
            ("primary", ClassRule::new(1, 1, 3.5)),
            ("secondary", ClassRule::new(1, 1, 3.5)),
            ("residential", ClassRule::new(1, 1, 3.25)),
            ("unclassified", ClassRule::new(1, 1, 3.25)),
            ("service", ClassRule::new(1, 1, 3.0)),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        ConversionConfig {
            fit_mode: FitMode::Polyline,
            arc_tolerance: 0.25,
            simplify_epsilon: 0.10,
            elevation_sample_step: 5.0,
            default_lane_width: 3.5,
            bridge_clearance_min: 4.5,
            sidewalk_width: 1.8,
            classes,
        }
    }
}

const SCALAR_KEYS: [&str; 7] = [
    "fit_mode",
    "arc_tolerance",
    "simplify_epsilon",
    "elevation_sample_step",
    "default_lane_width",
    "bridge_clearance_min",
    "sidewalk_width",
];

impl ConversionConfig {
    /// Whether `key` is read by [`ConversionConfig::apply`].
    pub fn accepts_key(key: &str) -> bool {
        SCALAR_KEYS.contains(&key) || class_key(key).is_some()
    }

    /// Overrides fields from `kv`. Class entries start from the shipped rule for
    /// that class, or from `1 + 1` lanes at `default_lane_width` for a new class.
    pub fn apply(&mut self, kv: &KeyValues) -> Result<(), ConfigError> {
        kv.set("fit_mode", &mut self.fit_mode)?;
        kv.set("arc_tolerance", &mut self.arc_tolerance)?;
        kv.set("simplify_epsilon", &mut self.simplify_epsilon)?;
        kv.set("elevation_sample_step", &mut self.elevation_sample_step)?;
        kv.set("default_lane_width", &mut self.default_lane_width)?;
        kv.set("bridge_clearance_min", &mut self.bridge_clearance_min)?;
        kv.set("sidewalk_width", &mut self.sidewalk_width)?;
        for key in kv.keys() {
            let Some((class, field)) = class_key(key) else { continue };
            let default_width = self.default_lane_width;
            let rule = self.classes.entry(class.to_string()).or_insert(ClassRule::new(1, 1, default_width));
            match field {
                "lanes_left" => kv.set(key, &mut rule.lanes_left)?,
                "lanes_right" => kv.set(key, &mut rule.lanes_right)?,
                _ => kv.set(key, &mut rule.width)?,
            }
        }
        self.validate().map_err(|message| ConfigError::Value { key: "conversion".into(), line: 0, message })
    }

    pub fn validate(&self) -> Result<(), String> {
        let distances = [
            ("arc_tolerance", self.arc_tolerance),
            ("simplify_epsilon", self.simplify_epsilon),
            ("elevation_sample_step", self.elevation_sample_step),
            ("default_lane_width", self.default_lane_width),
            ("bridge_clearance_min", self.bridge_clearance_min),
            ("sidewalk_width", self.sidewalk_width),
        ];
        for (name, v) in distances {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be a positive distance, got {v}"));
            }
        }
        for (class, rule) in &self.classes {
            if rule.lanes_left + rule.lanes_right == 0 {
                return Err(format!("class {class} has no driving lanes"));
            }
            if !(rule.width > 0.0 && rule.width.is_finite()) {
                return Err(format!("class {class} has lane width {}", rule.width));
            }
        }
        Ok(())
    }
}

fn class_key(key: &str) -> Option<(&str, &str)> {
    let rest = key.strip_prefix("class.")?;
    let (class, field) = rest.rsplit_once('.')?;
    (!class.is_empty() && matches!(field, "lanes_left" | "lanes_right" | "width")).then_some((class, field))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_and_new_classes() {
        let kv = KeyValues::parse(
            "fit_mode = arcfit\narc_tolerance = 0.5\nclass.tertiary.width = 3.1\nclass.primary.lanes_right = 2\n",
        )
        .unwrap();
        let mut c = ConversionConfig::default();
        c.apply(&kv).unwrap();
        assert_eq!(c.fit_mode, FitMode::ArcFit);
        assert_eq!(c.arc_tolerance, 0.5);
        assert_eq!(c.classes["tertiary"], ClassRule::new(1, 1, 3.1));
        assert_eq!(c.classes["primary"], ClassRule::new(1, 2, 3.5));
        assert!(ConversionConfig::accepts_key("class.a.b.width"));
        assert!(!ConversionConfig::accepts_key("class.x.speed"));
    }

    #[test]
    fn rejects_non_positive_distances() {
        let kv = KeyValues::parse("simplify_epsilon = 0").unwrap();
        assert!(ConversionConfig::default().apply(&kv).is_err());
        let kv = KeyValues::parse("class.service.lanes_left = 0\nclass.service.lanes_right = 0").unwrap();
        assert!(ConversionConfig::default().apply(&kv).is_err());
        let kv = KeyValues::parse("fit_mode = spline").unwrap();
        assert!(ConversionConfig::default().apply(&kv).is_err());
    }
}
