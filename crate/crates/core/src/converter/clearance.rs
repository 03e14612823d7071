use std::collections::BTreeSet;
use std::fmt;

use super::ConversionConfig;
use crate::geo::RoadGraph;
use crate::geom::{segment_intersection, Vec2};
use crate::odr::{eval_elevation, eval_plan_view, OdrMap, Road};

/// Reference lines are intersected as polylines sampled at this step.
const CROSSING_SAMPLE_STEP: f64 = 0.5;
/// Crossings this close to a node shared by both edges are connections, not overpasses.
const SHARED_NODE_RADIUS: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ClearanceIssue {
    pub bridge: String,
    pub road: String,
    pub at: Vec2,
    pub deck_z: f64,
    pub road_z: f64,
}

impl ClearanceIssue {
    pub fn separation(&self) -> f64 {
        self.deck_z - self.road_z
    }
}

impl fmt::Display for ClearanceIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "bridge {} passes {:.2} m above road {} at ({:.2}, {:.2})",
            self.bridge,
            self.separation(),
            self.road,
            self.at.x,
            self.at.y
        )
    }
}

fn sampled(road: &Road) -> Vec<(f64, Vec2)> {
    let n = (road.length / CROSSING_SAMPLE_STEP).ceil().max(1.0) as usize;
    (0..=n)
        .filter_map(|k| {
            let s = road.length * k as f64 / n as f64;
            eval_plan_view(road, s).ok().map(|p| (s, p.position()))
        })
        .collect()
}

/// Crossings of `a` and `b` as `(s_a, s_b, point)`, merged when closer than a sample step.
fn crossings(a: &[(f64, Vec2)], b: &[(f64, Vec2)]) -> Vec<(f64, f64, Vec2)> {
    let mut out: Vec<(f64, f64, Vec2)> = Vec::new();
    for wa in a.windows(2) {
        for wb in b.windows(2) {
            if let Some((t, u)) = segment_intersection(wa[0].1, wa[1].1, wb[0].1, wb[1].1) {
                let p = wa[0].1.lerp(wa[1].1, t);
                if out.iter().any(|(_, _, q)| q.distance(p) < CROSSING_SAMPLE_STEP) {
                    continue;
                }
                let sa = wa[0].0 + t * (wa[1].0 - wa[0].0);
                let sb = wb[0].0 + u * (wb[1].0 - wb[0].0);
                out.push((sa, sb, p));
            }
        }
    }
    out
}

/// Every planimetric crossing of a bridge over a non-bridge road where the
/// deck is less than `bridge_clearance_min` above the road.
pub fn check_clearance(map: &OdrMap, graph: &RoadGraph, config: &ConversionConfig) -> Vec<ClearanceIssue> {
    let mut issues = Vec::new();
    let bridges: Vec<_> = graph.edges.iter().filter(|e| e.is_bridge).collect();
    for bridge in bridges {
        let Some(deck) = map.road(&bridge.id) else { continue };
        let deck_line = sampled(deck);
        for edge in graph.edges.iter().filter(|e| !e.is_bridge) {
            let Some(road) = map.road(&edge.id) else { continue };
            let bridge_nodes: BTreeSet<i64> = bridge.node_ids.iter().copied().collect();
            let shared: Vec<Vec2> =
                edge.node_ids.iter().filter(|n| bridge_nodes.contains(n)).filter_map(|n| graph.nodes.get(n).copied()).collect();
            for (s_deck, s_road, at) in crossings(&deck_line, &sampled(road)) {
                if shared.iter().any(|q| q.distance(at) < SHARED_NODE_RADIUS) {
                    continue;
                }
                let (Ok(deck_z), Ok(road_z)) = (eval_elevation(deck, s_deck), eval_elevation(road, s_road)) else {
                    continue;
                };
                if deck_z - road_z < config.bridge_clearance_min {
                    issues.push(ClearanceIssue { bridge: bridge.id.clone(), road: edge.id.clone(), at, deck_z, road_z });
                }
            }
        }
    }
    issues
}
