//! Parses an OSM extract, projects it to a local frame and prints the road graph.
//!
//!     cargo run --example osm_graph -- [map.osm]
//!
//! Without an argument the synthetic desk fixture is used.

use twinmap::geo::{build_road_graph, parse_osm, road_centroid_frame, write_osm, RoadFilter};
use twinmap::synth::desk_fixture;

fn main() {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(&path).expect("read OSM file"),
        None => write_osm(&desk_fixture(1).osm),
    };
    let extract = parse_osm(&text).expect("parse OSM");
    let filter = RoadFilter::default();
    let frame = road_centroid_frame(&extract, &filter).expect("no roads");
    let graph = build_road_graph(&extract, Some(frame), &filter);

    println!("{} nodes, {} ways", extract.nodes.len(), extract.ways.len());
    println!("frame origin: {:.7}, {:.7}", frame.origin_lat, frame.origin_lon);
    println!("{} edges over {} graph nodes", graph.edges.len(), graph.nodes.len());
    for e in &graph.edges {
        let class = e.tags.get("highway").map_or("?", String::as_str);
        let bridge = if e.is_bridge { " bridge" } else { "" };
        println!("  {:<8} {:<12} {:>4} vertices {:>8.1} m{bridge}", e.id, class, e.polyline.len(), e.length());
    }
}
