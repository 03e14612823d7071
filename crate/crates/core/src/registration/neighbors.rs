use std::collections::HashMap;

use crate::geom::Vec2;

/// Uniform grid hash over target points for bounded-radius nearest neighbor queries.
#[derive(Debug, Clone)]
pub struct GridIndex {
    cell: f64,
    radius: f64,
    points: Vec<Vec2>,
    buckets: HashMap<(i64, i64), Vec<u32>>,
}

impl GridIndex {
    /// Builds an index for queries of at most `radius`; the cell edge equals the radius.
    pub fn new(points: &[Vec2], radius: f64) -> Self {
        assert!(radius > 0.0, "search radius must be positive");
        let mut buckets: HashMap<(i64, i64), Vec<u32>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            buckets.entry(cell_of(*p, radius)).or_default().push(i as u32);
        }
        GridIndex { cell: radius, radius, points: points.to_vec(), buckets }
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    /// Closest point within the radius as `(index, squared distance)`.
    /// Equidistant candidates resolve to the lowest index.
    pub fn nearest(&self, q: Vec2) -> Option<(usize, f64)> {
        let (cx, cy) = cell_of(q, self.cell);
        let r2 = self.radius * self.radius;
        let mut best: Option<(f64, u32)> = None;
        for dx in -1..=1 {
            for dy in -1..=1 {
                let Some(bucket) = self.buckets.get(&(cx + dx, cy + dy)) else { continue };
                for &i in bucket {
                    let d2 = self.points[i as usize].distance_squared(q);
                    if d2 > r2 {
                        continue;
                    }
                    let better = match best {
                        None => true,
                        Some((bd, bi)) => d2 < bd || (d2 == bd && i < bi),
                    };
                    if better {
                        best = Some((d2, i));
                    }
                }
            }
        }
        best.map(|(d2, i)| (i as usize, d2))
    }
}

fn cell_of(p: Vec2, cell: f64) -> (i64, i64) {
    ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64)
}
