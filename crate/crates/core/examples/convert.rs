//! Converts the desk fixture's road graph to OpenDRIVE with both plan-view
//! fitting modes and reports fidelity and bridge clearance.

use twinmap::converter::{check_clearance, convert, ConversionConfig, FitMode};
use twinmap::geo::{build_road_graph, RoadFilter};
use twinmap::odr::{serialize, validate, GeometryKind, Severity};
use twinmap::synth::desk_fixture;

fn main() {
    let fixture = desk_fixture(2);
    let graph = build_road_graph(&fixture.osm, Some(fixture.frame), &RoadFilter::default());
    for mode in [FitMode::Polyline, FitMode::ArcFit] {
        let cfg = ConversionConfig { fit_mode: mode, ..Default::default() };
        let map = convert(&graph, &fixture.dem, &cfg).expect("convert");
        let (mut lines, mut arcs) = (0, 0);
        for g in map.roads.iter().flat_map(|r| &r.plan_view) {
            match g.kind {
                GeometryKind::Arc { .. } => arcs += 1,
                _ => lines += 1,
            }
        }
        let issues = validate(&map);
        let errors = issues.iter().filter(|i| i.severity == Severity::Error).count();
        let linked = map.roads.iter().filter(|r| r.predecessor.is_some() || r.successor.is_some()).count();
        println!(
            "{mode:>8}: {} roads, {lines} lines, {arcs} arcs, {linked} linked, {errors} errors, {} warnings, {} bytes",
            map.roads.len(),
            issues.len() - errors,
            serialize(&map).len()
        );
        for c in check_clearance(&map, &graph, &cfg) {
            println!("          clearance: {c}");
        }
    }

    let bridge = graph.edges.iter().find(|e| e.is_bridge).unwrap();
    let map = convert(&graph, &fixture.dem, &ConversionConfig::default()).unwrap();
    let deck = map.road(&bridge.id).unwrap();
    println!("bridge {}: deck {:?}", bridge.id, deck.elevation_profile);
}
