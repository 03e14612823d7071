//! Builds a road from line, arc and paramPoly3 segments, evaluates it and
//! round-trips it through OpenDRIVE XML.

use std::f64::consts::FRAC_PI_2;

use twinmap::odr::{
    deserialize, eval_elevation, eval_plan_view, lane_boundary_t, serialize, validate, ElevPoly, Geometry, GeometryKind, LaneSection,
    LaneType, OdrMap, Road,
};

fn main() {
    let r = 20.0;
    let arc_len = FRAC_PI_2 * r;
    let pp3 = GeometryKind::ParamPoly3 { au: 0.0, bu: 1.0, cu: 0.0, du: 0.0, av: 0.0, bv: 0.0, cv: 0.0, dv: 0.0 };
    let road = Road::new(
        "demo",
        vec![
            Geometry { s: 0.0, x: 0.0, y: 0.0, hdg: 0.0, length: 30.0, kind: GeometryKind::Line },
            Geometry { s: 30.0, x: 30.0, y: 0.0, hdg: 0.0, length: arc_len, kind: GeometryKind::Arc { curvature: 1.0 / r } },
            Geometry { s: 30.0 + arc_len, x: 50.0, y: 20.0, hdg: FRAC_PI_2, length: 15.0, kind: pp3 },
        ],
    )
    .with_elevation(vec![ElevPoly { s: 0.0, a: 10.0, b: 0.02, c: 0.0, d: 0.0 }])
    .with_lane_section(LaneSection::symmetric(
        &[(LaneType::Driving, 3.5), (LaneType::Sidewalk, 2.0)],
        &[(LaneType::Driving, 3.5), (LaneType::Shoulder, 1.0)],
    ));

    let mut s = 0.0;
    while s <= road.length {
        let p = eval_plan_view(&road, s).unwrap();
        let z = eval_elevation(&road, s).unwrap();
        let edge = p.offset(lane_boundary_t(&road.lane_sections[0], 2, s).unwrap());
        println!("s {s:>6.2}: ({:>7.3}, {:>7.3}) hdg {:>6.3} z {z:.3}  left edge ({:.3}, {:.3})", p.x, p.y, p.hdg, edge.x, edge.y);
        s += 7.5;
    }

    let mut map = OdrMap::new("demo");
    map.roads.push(road);
    let issues = validate(&map);
    println!("validate: {} issues", issues.len());
    for i in &issues {
        println!("  {i}");
    }

    let xml = serialize(&map);
    let back = deserialize(&xml).expect("parse back");
    println!("{} bytes of XML, structural round trip {}", xml.len(), if back == map { "exact" } else { "CHANGED" });
}
