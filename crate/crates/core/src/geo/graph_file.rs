//! Plain-text hand-off format for (adjusted) road graphs.
//!
//! ```text
//! twinmap-graph 1
//! frame <origin_lat> <origin_lon>
//! edge <id> <way_id> <bridge 0|1>
//! tag <key> <value>
//! v <node_id> <x> <y>
//! end
//! ```
//!
//! Fields are tab-separated; tab, newline and backslash inside tag text are
//! escaped as `\t`, `\n`, `\\`. Numbers use 17 significant digits so a graph
//! survives the round trip bit for bit.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::{GeoError, LocalFrame, RoadEdge, RoadGraph};
use crate::geom::{fmt_g17, Vec2};

const MAGIC: &str = "twinmap-graph\t1";

pub fn write_graph(graph: &RoadGraph) -> String {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    let _ = writeln!(out, "frame\t{}\t{}", fmt_g17(graph.frame.origin_lat), fmt_g17(graph.frame.origin_lon));
    for e in &graph.edges {
        let _ = writeln!(out, "edge\t{}\t{}\t{}", escape(&e.id), e.way_id, u8::from(e.is_bridge));
        for (k, v) in &e.tags {
            let _ = writeln!(out, "tag\t{}\t{}", escape(k), escape(v));
        }
        for (id, p) in e.node_ids.iter().zip(&e.polyline) {
            let _ = writeln!(out, "v\t{id}\t{}\t{}", fmt_g17(p.x), fmt_g17(p.y));
        }
        out.push_str("end\n");
    }
    out
}

pub fn read_graph(text: &str) -> Result<RoadGraph, GeoError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i as u32 + 1, l));
    let bad = |line: u32, message: &str| GeoError::GraphFormat { line, message: message.to_string() };

    match lines.next() {
        Some((_, l)) if l == MAGIC => {}
        _ => return Err(bad(1, "missing `twinmap-graph 1` header")),
    }
    let mut frame = None;
    let mut edges = Vec::new();
    let mut nodes = BTreeMap::new();
    let mut current: Option<RoadEdge> = None;

    for (ln, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        match (fields[0], current.as_mut()) {
            ("frame", None) if fields.len() == 3 => {
                frame = Some(LocalFrame::new(num(fields[1], ln)?, num(fields[2], ln)?));
            }
            ("edge", None) if fields.len() == 4 => {
                current = Some(RoadEdge {
                    id: unescape(fields[1]),
                    way_id: fields[2].parse().map_err(|_| bad(ln, "way id is not an integer"))?,
                    node_ids: Vec::new(),
                    polyline: Vec::new(),
                    tags: Default::default(),
                    is_bridge: fields[3] == "1",
                });
            }
            ("tag", Some(e)) if fields.len() == 3 => {
                e.tags.insert(unescape(fields[1]), unescape(fields[2]));
            }
            ("v", Some(e)) if fields.len() == 4 => {
                let id: i64 = fields[1].parse().map_err(|_| bad(ln, "node id is not an integer"))?;
                let p = Vec2::new(num(fields[2], ln)?, num(fields[3], ln)?);
                e.node_ids.push(id);
                e.polyline.push(p);
                nodes.insert(id, p);
            }
            ("end", Some(_)) => {
                let e = current.take().unwrap();
                if e.polyline.len() < 2 {
                    return Err(bad(ln, &format!("edge {} has fewer than 2 vertices", e.id)));
                }
                edges.push(e);
            }
            _ => return Err(bad(ln, &format!("unexpected record `{}`", fields[0]))),
        }
    }
    if current.is_some() {
        return Err(bad(text.lines().count() as u32, "unterminated edge record"));
    }
    let frame = frame.ok_or_else(|| bad(2, "missing frame record"))?;
    Ok(RoadGraph { frame, nodes, edges })
}

fn num(s: &str, line: u32) -> Result<f64, GeoError> {
    s.parse()
        .map_err(|_| GeoError::GraphFormat { line, message: format!("not a number: {s:?}") })
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('\t', "\\t").replace('\n', "\\n")
}

fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some('t') => out.push('\t'),
                Some('n') => out.push('\n'),
                Some(other) => out.push(other),
                None => out.push('\\'),
            }
        } else {
            out.push(c);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn graph(coords: Vec<(f64, f64)>, tag: String) -> RoadGraph {
        let polyline: Vec<Vec2> = coords.into_iter().map(Vec2::from).collect();
        let node_ids: Vec<i64> = (0..polyline.len() as i64).collect();
        RoadGraph {
            frame: LocalFrame::new(12.5, -3.25),
            nodes: node_ids.iter().copied().zip(polyline.iter().copied()).collect(),
            edges: vec![RoadEdge {
                id: "77_0".into(),
                way_id: 77,
                node_ids,
                polyline,
                tags: [("highway".to_string(), "primary".to_string()), ("name".to_string(), tag)].into(),
                is_bridge: true,
            }],
        }
    }

    proptest! {
        #[test]
        fn round_trip(coords in prop::collection::vec((-1e4f64..1e4, -1e4f64..1e4), 2..20), tag in "[a-z\t\\\\ \n]{0,12}") {
            let g = graph(coords, tag);
            let text = write_graph(&g);
            prop_assert_eq!(read_graph(&text).unwrap(), g);
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_graph("hello").is_err());
        let text = format!("{MAGIC}\nframe\t0\t0\nedge\ta\t1\t0\nv\t1\t0\t0\nend\n");
        assert!(matches!(read_graph(&text), Err(GeoError::GraphFormat { line: 5, .. })));
    }
}
