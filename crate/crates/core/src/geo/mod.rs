//! OSM ingestion: XML parsing, local projection, and road graph construction.

mod frame;
mod graph;
mod graph_file;
mod osm;

pub use frame::{LocalFrame, EARTH_RADIUS};
pub use graph::{build_road_graph, road_centroid_frame, RoadEdge, RoadFilter, RoadGraph, MIN_VERTEX_SEPARATION};
pub use graph_file::{read_graph, write_graph};
pub use osm::{parse_osm, write_osm, OsmExtract, OsmNode, OsmWay, Tags};

pub(crate) use osm::xml_escape;

#[derive(Debug, thiserror::Error)]
pub enum GeoError {
    #[error("OSM XML error at line {line}: {message}")]
    Xml { line: u32, message: String },
    #[error("way {way} references missing node {node}")]
    DanglingReference { way: i64, node: i64 },
    #[error("way {0} has fewer than 2 node references")]
    ShortWay(i64),
    #[error("node {0} defined twice")]
    DuplicateNode(i64),
    #[error("node {node} has out-of-range coordinates lat={lat} lon={lon}")]
    InvalidCoordinate { node: i64, lat: f64, lon: f64 },
    #[error("road graph file, line {line}: {message}")]
    GraphFormat { line: u32, message: String },
}
