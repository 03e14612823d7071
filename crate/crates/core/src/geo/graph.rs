use std::collections::{BTreeMap, HashMap};

use super::{LocalFrame, OsmExtract, Tags};
use crate::geom::Vec2;

/// Consecutive polyline vertices closer than this are merged.
pub const MIN_VERTEX_SEPARATION: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct RoadEdge {
    /// `"<way_id>_<k>"`, k being the 0-based split index within the way.
    pub id: String,
    pub way_id: i64,
    /// OSM node id of every polyline vertex.
    pub node_ids: Vec<i64>,
    pub polyline: Vec<Vec2>,
    pub tags: Tags,
    pub is_bridge: bool,
}

impl RoadEdge {
    pub fn start_node(&self) -> i64 {
        self.node_ids[0]
    }

    pub fn end_node(&self) -> i64 {
        *self.node_ids.last().expect("edge has vertices")
    }

    pub fn length(&self) -> f64 {
        crate::geom::polyline_length(&self.polyline)
    }
}

/// Projected road network, split so that shared nodes only occur at edge ends.
/// Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct RoadGraph {
    pub frame: LocalFrame,
    pub nodes: BTreeMap<i64, Vec2>,
    pub edges: Vec<RoadEdge>,
}

impl RoadGraph {
    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edge(&self, id: &str) -> Option<&RoadEdge> {
        self.edges.iter().find(|e| e.id == id)
    }

    /// Number of edge endpoints incident to each node. A loop edge counts twice.
    pub fn endpoint_degree(&self) -> HashMap<i64, usize> {
        let mut deg = HashMap::new();
        for e in &self.edges {
            *deg.entry(e.start_node()).or_insert(0) += 1;
            *deg.entry(e.end_node()).or_insert(0) += 1;
        }
        deg
    }

    /// Applies `f` to every node position and edge vertex.
    pub fn map_points(&self, f: impl Fn(Vec2) -> Vec2) -> RoadGraph {
        RoadGraph {
            frame: self.frame,
            nodes: self.nodes.iter().map(|(&id, &p)| (id, f(p))).collect(),
            edges: self
                .edges
                .iter()
                .map(|e| RoadEdge { polyline: e.polyline.iter().map(|&p| f(p)).collect(), ..e.clone() })
                .collect(),
        }
    }
}

/// Which ways become road edges.
#[derive(Debug, Clone, PartialEq)]
pub struct RoadFilter {
    /// `highway` values that are never converted.
    pub deny: Vec<String>,
}

impl Default for RoadFilter {
    fn default() -> Self {
        RoadFilter { deny: ["footway", "cycleway", "path", "steps"].map(String::from).to_vec() }
    }
}

impl RoadFilter {
    pub fn accepts(&self, tags: &Tags) -> bool {
        match tags.get("highway") {
            Some(class) => !self.deny.iter().any(|d| d == class),
            None => false,
        }
    }
}

/// Centroid (in lat/lon) of every node referenced by an accepted road way.
pub fn road_centroid_frame(extract: &OsmExtract, filter: &RoadFilter) -> Option<LocalFrame> {
    let mut seen = std::collections::BTreeSet::new();
    for w in extract.ways.iter().filter(|w| filter.accepts(&w.tags)) {
        seen.extend(w.node_refs.iter().copied());
    }
    if seen.is_empty() {
        return None;
    }
    let (mut lat, mut lon) = (0.0, 0.0);
    for id in &seen {
        let n = &extract.nodes[id];
        lat += n.lat;
        lon += n.lon;
    }
    let k = seen.len() as f64;
    Some(LocalFrame::new(lat / k, lon / k))
}

/// Builds the road graph. When `frame` is `None` the centroid of all road
/// nodes is used as origin.
///
/// A way is split at every node that occurs more than once across all road
/// ways (shared with another way, or revisited by the same way).
pub fn build_road_graph(extract: &OsmExtract, frame: Option<LocalFrame>, filter: &RoadFilter) -> RoadGraph {
    let roads: Vec<(i64, Vec<i64>, &Tags)> = extract
        .ways
        .iter()
        .filter(|w| filter.accepts(&w.tags))
        .map(|w| {
            let mut refs = w.node_refs.clone();
            refs.dedup();
            (w.id, refs, &w.tags)
        })
        .collect();

    let frame = frame
        .or_else(|| road_centroid_frame(extract, filter))
        .unwrap_or_else(|| LocalFrame::new(0.0, 0.0));

    if roads.is_empty() {
        log::warn!("no road-candidate ways in extract; road graph is empty");
    }

    let mut occurrences: HashMap<i64, usize> = HashMap::new();
    for (_, refs, _) in &roads {
        for r in refs {
            *occurrences.entry(*r).or_insert(0) += 1;
        }
    }

    let mut nodes = BTreeMap::new();
    let mut edges = Vec::new();
    for (way_id, refs, tags) in roads {
        let points: Vec<Vec2> = refs
            .iter()
            .map(|r| {
                let n = &extract.nodes[r];
                let p = frame.project(n.lat, n.lon);
                nodes.insert(*r, p);
                p
            })
            .collect();

        let is_bridge = tags.get("bridge").is_some_and(|v| v == "yes");
        let mut k = 0usize;
        let mut start = 0usize;
        for i in 1..refs.len() {
            let split_here = i == refs.len() - 1 || occurrences[&refs[i]] >= 2;
            if !split_here {
                continue;
            }
            let mut node_ids = Vec::with_capacity(i - start + 1);
            let mut polyline: Vec<Vec2> = Vec::with_capacity(i - start + 1);
            for j in start..=i {
                if let Some(&last) = polyline.last() {
                    if last.distance(points[j]) <= MIN_VERTEX_SEPARATION {
                        // keep the later id so edge ends stay on split nodes
                        *node_ids.last_mut().unwrap() = refs[j];
                        continue;
                    }
                }
                node_ids.push(refs[j]);
                polyline.push(points[j]);
            }
            if polyline.len() >= 2 {
                edges.push(RoadEdge {
                    id: format!("{way_id}_{k}"),
                    way_id,
                    node_ids,
                    polyline,
                    tags: tags.clone(),
                    is_bridge,
                });
            } else {
                log::warn!("way {way_id} segment {k} collapses to a single point; dropped");
            }
            k += 1;
            start = i;
        }
    }
    RoadGraph { frame, nodes, edges }
}
