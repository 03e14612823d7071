use std::fmt::Write;

use super::TerrainError;
use crate::geom::{fmt_g17, Vec2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn xy(self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Point3>,
}

impl PointCloud {
    pub fn new(points: Vec<Point3>) -> Self {
        PointCloud { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn xy(&self) -> Vec<Vec2> {
        self.points.iter().map(|p| p.xy()).collect()
    }

    pub fn to_xyz(&self) -> String {
        let mut out = String::with_capacity(self.points.len() * 48);
        for p in &self.points {
            let _ = writeln!(out, "{} {} {}", fmt_g17(p.x), fmt_g17(p.y), fmt_g17(p.z));
        }
        out
    }
}

/// Parses whitespace-separated `x y z` lines. Blank lines and lines starting
/// with `#` are skipped.
pub fn load_xyz(text: &str) -> Result<PointCloud, TerrainError> {
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |message: String| TerrainError::Format { line: i as u32 + 1, message };
        let coords: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| bad(format!("non-numeric token {t:?}"))))
            .collect::<Result<_, _>>()?;
        if coords.len() != 3 {
            return Err(bad(format!("expected 3 values, found {}", coords.len())));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(bad("non-finite coordinate".into()));
        }
        points.push(Point3::new(coords[0], coords[1], coords[2]));
    }
    Ok(PointCloud { points })
}
