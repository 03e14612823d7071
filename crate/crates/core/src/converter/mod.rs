//! Road graph + terrain to OpenDRIVE: plan-view fitting, lanes from tags,
//! terrain-following elevation with linear bridge decks.

mod clearance;
mod config;
mod elevation;
mod lanes;
mod planview;

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;

pub use clearance::{check_clearance, ClearanceIssue};
pub use config::{ClassRule, ConversionConfig, FitMode};
pub use elevation::{fit_elevation, natural_spline, sample_abscissae, station_point};
pub use lanes::{lanes_from_tags, LaneSpec};
pub use planview::{distance_to_segment, douglas_peucker, fit_plan_view, kasa_fit, pinned_arc};

use crate::geo::{LocalFrame, RoadEdge, RoadGraph};
use crate::geom::fmt_g17;
use crate::odr::{eval_plan_view, ContactPoint, OdrMap, Road, RoadLink};
use crate::terrain::{HeightField, TerrainError};

/// Failure of one conversion step on a single edge.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FitError {
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("way has no highway tag")]
    MissingHighway,
    #[error("unmapped highway class `{0}`; add class.{0}.* entries to the configuration")]
    UnmappedClass(String),
    #[error("no terrain height at s={s:.3} ({x:.3}, {y:.3}): {source}")]
    MissingTerrain { s: f64, x: f64, y: f64, source: TerrainError },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFailure {
    pub edge_id: String,
    pub error: FitError,
}

impl fmt::Display for EdgeFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "edge {}: {}", self.edge_id, self.error)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConvertError {
    #[error("road graph is empty")]
    EmptyGraph,
    #[error("invalid conversion config: {0}")]
    Config(String),
    #[error("conversion failed for {} edge(s): {}", .0.len(), .0.iter().map(|f| f.to_string()).collect::<Vec<_>>().join("; "))]
    Edges(Vec<EdgeFailure>),
}

impl ConvertError {
    /// Ids of the edges that failed, in edge order.
    pub fn edge_ids(&self) -> Vec<&str> {
        match self {
            ConvertError::Edges(f) => f.iter().map(|f| f.edge_id.as_str()).collect(),
            _ => Vec::new(),
        }
    }
}

/// PROJ string for the equirectangular local frame.
pub fn geo_reference(frame: &LocalFrame) -> String {
    format!(
        "+proj=eqc +lat_ts={lat} +lat_0={lat} +lon_0={lon} +x_0=0 +y_0=0 +R={r} +units=m +no_defs",
        lat = fmt_g17(frame.origin_lat),
        lon = fmt_g17(frame.origin_lon),
        r = fmt_g17(frame.earth_radius)
    )
}

/// Converts one edge into a road without links.
pub fn convert_edge(edge: &RoadEdge, terrain: &impl HeightField, config: &ConversionConfig) -> Result<Road, FitError> {
    let lanes = lanes_from_tags(&edge.tags, config)?;
    let plan = fit_plan_view(&edge.polyline, config)?;
    let mut road = Road::new(edge.id.clone(), plan);
    if let Some(name) = edge.tags.get("name") {
        road.name = name.clone();
    }
    let stations = sample_abscissae(road.length, config.elevation_sample_step)
        .into_iter()
        .map(|s| eval_plan_view(&road, s).map(|p| (s, p.position())))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| FitError::Degenerate(e.to_string()))?;
    road.elevation_profile = fit_elevation(&stations, terrain, edge.is_bridge, config)?;
    road.lane_sections.push(lanes.to_section());
    Ok(road)
}

/// One road per edge, ordered by id. Edges are converted in parallel on the
/// current rayon pool; ends meeting at a node of degree 2 are linked.
pub fn convert<H: HeightField + Sync>(graph: &RoadGraph, terrain: &H, config: &ConversionConfig) -> Result<OdrMap, ConvertError> {
    config.validate().map_err(ConvertError::Config)?;
    if graph.is_empty() {
        return Err(ConvertError::EmptyGraph);
    }
    let results: Vec<Result<Road, EdgeFailure>> = graph
        .edges
        .par_iter()
        .map(|e| convert_edge(e, terrain, config).map_err(|error| EdgeFailure { edge_id: e.id.clone(), error }))
        .collect();
    let mut roads = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(road) => roads.push(road),
            Err(f) => failures.push(f),
        }
    }
    if !failures.is_empty() {
        return Err(ConvertError::Edges(failures));
    }

    link_roads(graph, &mut roads);
    let mut map = OdrMap::new("twinmap");
    map.header.geo_reference = Some(geo_reference(&graph.frame));
    map.roads = roads;
    map.sort_roads();
    Ok(map)
}

/// Sets predecessor/successor for road ends at nodes touched by exactly two
/// edge ends. `roads[i]` must belong to `graph.edges[i]`.
fn link_roads(graph: &RoadGraph, roads: &mut [Road]) {
    let mut incident: HashMap<i64, Vec<(usize, ContactPoint)>> = HashMap::new();
    for (i, e) in graph.edges.iter().enumerate() {
        incident.entry(e.start_node()).or_default().push((i, ContactPoint::Start));
        incident.entry(e.end_node()).or_default().push((i, ContactPoint::End));
    }
    for (i, e) in graph.edges.iter().enumerate() {
        for (node, end) in [(e.start_node(), ContactPoint::Start), (e.end_node(), ContactPoint::End)] {
            let ends = &incident[&node];
            if ends.len() != 2 {
                continue;
            }
            let Some(&(j, contact)) = ends.iter().find(|(j, _)| *j != i) else { continue };
            let link = Some(RoadLink { road_id: graph.edges[j].id.clone(), contact_point: contact });
            match end {
                ContactPoint::Start => roads[i].predecessor = link,
                ContactPoint::End => roads[i].successor = link,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::Tags;
    use crate::geom::Vec2;
    use crate::odr::{validate, GeometryKind};
    use crate::terrain::Dem;

    fn edge(id: &str, way: i64, pts: &[(i64, f64, f64)], tags: &[(&str, &str)]) -> RoadEdge {
        let tags: Tags = tags.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        RoadEdge {
            id: id.into(),
            way_id: way,
            node_ids: pts.iter().map(|p| p.0).collect(),
            polyline: pts.iter().map(|p| Vec2::new(p.1, p.2)).collect(),
            is_bridge: tags.get("bridge").is_some_and(|b| b == "yes"),
            tags,
        }
    }

    fn graph(edges: Vec<RoadEdge>) -> RoadGraph {
        let nodes = edges.iter().flat_map(|e| e.node_ids.iter().copied().zip(e.polyline.iter().copied())).collect();
        RoadGraph { frame: LocalFrame::new(48.0, 11.0), nodes, edges }
    }

    fn flat() -> Dem {
        Dem::from_fn(60, 60, -60.0, -60.0, 2.0, |_, _| 3.0)
    }

    const RES: &[(&str, &str)] = &[("highway", "residential")];

    #[test]
    fn minimal_pipeline() {
        let g = graph(vec![edge("1_0", 1, &[(1, 0.0, 0.0), (2, 30.0, 0.0)], RES)]);
        let map = convert(&g, &flat(), &ConversionConfig::default()).unwrap();
        assert_eq!(map.roads.len(), 1);
        let r = &map.roads[0];
        assert_eq!(r.id, "1_0");
        assert_eq!(r.plan_view.len(), 1);
        assert_eq!(r.plan_view[0].kind, GeometryKind::Line);
        assert!(r.elevation_profile.iter().all(|p| (p.a, p.b, p.c, p.d) == (3.0, 0.0, 0.0, 0.0)));
        assert_eq!((r.lane_sections[0].left.len(), r.lane_sections[0].right.len()), (1, 1));
        assert!(validate(&map).is_empty());
        assert!(map.header.geo_reference.as_deref().unwrap().starts_with("+proj=eqc +lat_ts=48 "));
    }

    #[test]
    fn degree_two_links() {
        let g = graph(vec![
            edge("1_0", 1, &[(1, 0.0, 0.0), (2, 20.0, 0.0)], RES),
            edge("2_0", 2, &[(3, 40.0, 0.0), (2, 20.0, 0.0)], RES),
        ]);
        let map = convert(&g, &flat(), &ConversionConfig::default()).unwrap();
        let a = map.road("1_0").unwrap();
        let b = map.road("2_0").unwrap();
        assert_eq!(a.successor, Some(RoadLink { road_id: "2_0".into(), contact_point: ContactPoint::End }));
        assert_eq!(b.successor, Some(RoadLink { road_id: "1_0".into(), contact_point: ContactPoint::End }));
        assert_eq!((a.predecessor.as_ref(), b.predecessor.as_ref()), (None, None));
        assert!(validate(&map).is_empty());
    }

    #[test]
    fn four_way_crossing_unlinked() {
        let c = (9, 0.0, 0.0);
        let g = graph(vec![
            edge("1_0", 1, &[(1, -30.0, 0.0), c], RES),
            edge("1_1", 1, &[c, (2, 30.0, 0.0)], RES),
            edge("2_0", 2, &[(3, 0.0, -30.0), c], RES),
            edge("2_1", 2, &[c, (4, 0.0, 30.0)], RES),
        ]);
        let map = convert(&g, &flat(), &ConversionConfig::default()).unwrap();
        assert_eq!(map.roads.len(), 4);
        assert!(map.roads.iter().all(|r| r.predecessor.is_none() && r.successor.is_none()));
    }

    #[test]
    fn failures_carry_edge_ids() {
        let g = graph(vec![
            edge("1_0", 1, &[(1, 0.0, 0.0), (2, 20.0, 0.0)], &[("highway", "tertiary")]),
            edge("2_0", 2, &[(3, 0.0, 5.0), (4, 20.0, 5.0)], RES),
            edge("3_0", 3, &[(5, 0.0, 9.0), (6, 500.0, 9.0)], RES),
        ]);
        let err = convert(&g, &flat(), &ConversionConfig::default()).unwrap_err();
        assert_eq!(err.edge_ids(), vec!["1_0", "3_0"]);
        assert!(err.to_string().contains("tertiary"));
    }

    #[test]
    fn loop_edge_converts_without_self_link() {
        let g = graph(vec![edge("1_0", 1, &[(1, 0.0, 0.0), (2, 20.0, 0.0), (3, 20.0, 20.0), (1, 0.0, 0.0)], RES)]);
        let map = convert(&g, &flat(), &ConversionConfig::default()).unwrap();
        assert!(map.roads[0].predecessor.is_none() && map.roads[0].successor.is_none());
        assert!(!crate::odr::has_errors(&validate(&map)));
    }
}
