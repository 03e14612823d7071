use std::collections::BTreeMap;

use super::GeoError;

pub type Tags = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq)]
pub struct OsmNode {
    pub id: i64,
    pub lat: f64,
    pub lon: f64,
    pub tags: Tags,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OsmWay {
    pub id: i64,
    pub node_refs: Vec<i64>,
    pub tags: Tags,
}

impl OsmWay {
    /// A way is a road candidate iff it carries a `highway` tag.
    pub fn is_road_candidate(&self) -> bool {
        self.tags.contains_key("highway")
    }

    pub fn tag(&self, key: &str) -> Option<&str> {
        self.tags.get(key).map(String::as_str)
    }
}

/// Nodes and ways of one OSM XML document. Ways keep document order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OsmExtract {
    pub nodes: BTreeMap<i64, OsmNode>,
    pub ways: Vec<OsmWay>,
}

impl OsmExtract {
    pub fn node(&self, id: i64) -> Option<&OsmNode> {
        self.nodes.get(&id)
    }
}

/// Parses an OSM XML v0.6 document.
///
/// Only `node`, `way`, `nd` and `tag` are read; every other element (relations,
/// bounds, metadata attributes) is skipped. Non-road ways are kept.
pub fn parse_osm(xml_text: &str) -> Result<OsmExtract, GeoError> {
    let doc = roxmltree::Document::parse(xml_text).map_err(|e| GeoError::Xml {
        line: e.pos().row,
        message: e.to_string(),
    })?;
    let root = doc.root_element();
    if root.tag_name().name() != "osm" {
        return Err(GeoError::Xml {
            line: doc.text_pos_at(root.range().start).row,
            message: format!("expected top-level <osm>, found <{}>", root.tag_name().name()),
        });
    }

    let line_of = |n: roxmltree::Node| doc.text_pos_at(n.range().start).row;
    let mut extract = OsmExtract::default();

    for el in root.children().filter(|n| n.is_element()) {
        match el.tag_name().name() {
            "node" => {
                let id = int_attr(el, "id", line_of(el))?;
                let lat = float_attr(el, "lat", line_of(el))?;
                let lon = float_attr(el, "lon", line_of(el))?;
                if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
                    return Err(GeoError::InvalidCoordinate { node: id, lat, lon });
                }
                let node = OsmNode { id, lat, lon, tags: read_tags(el) };
                if extract.nodes.insert(id, node).is_some() {
                    return Err(GeoError::DuplicateNode(id));
                }
            }
            "way" => {
                let id = int_attr(el, "id", line_of(el))?;
                let mut node_refs = Vec::new();
                for nd in el.children().filter(|n| n.has_tag_name("nd")) {
                    node_refs.push(int_attr(nd, "ref", line_of(nd))?);
                }
                extract.ways.push(OsmWay { id, node_refs, tags: read_tags(el) });
            }
            _ => {}
        }
    }

    for way in &extract.ways {
        if let Some(&missing) = way.node_refs.iter().find(|r| !extract.nodes.contains_key(r)) {
            return Err(GeoError::DanglingReference { way: way.id, node: missing });
        }
        if way.node_refs.len() < 2 {
            return Err(GeoError::ShortWay(way.id));
        }
    }
    Ok(extract)
}

fn read_tags(el: roxmltree::Node) -> Tags {
    el.children()
        .filter(|n| n.has_tag_name("tag"))
        .filter_map(|t| Some((t.attribute("k")?.to_string(), t.attribute("v")?.to_string())))
        .collect()
}

fn attr<'a>(el: roxmltree::Node<'a, '_>, name: &str, line: u32) -> Result<&'a str, GeoError> {
    el.attribute(name).ok_or_else(|| GeoError::Xml {
        line,
        message: format!("<{}> is missing attribute `{name}`", el.tag_name().name()),
    })
}

fn int_attr(el: roxmltree::Node, name: &str, line: u32) -> Result<i64, GeoError> {
    let raw = attr(el, name, line)?;
    raw.trim().parse().map_err(|_| GeoError::Xml {
        line,
        message: format!("attribute `{name}` is not an integer: {raw:?}"),
    })
}

fn float_attr(el: roxmltree::Node, name: &str, line: u32) -> Result<f64, GeoError> {
    let raw = attr(el, name, line)?;
    raw.trim().parse().map_err(|_| GeoError::Xml {
        line,
        message: format!("attribute `{name}` is not a number: {raw:?}"),
    })
}

/// Writes an extract back out as OSM XML. Used by fixtures and examples.
pub fn write_osm(extract: &OsmExtract) -> String {
    use crate::geom::fmt_g17;
    use std::fmt::Write;

    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<osm version=\"0.6\" generator=\"twinmap\">\n");
    for n in extract.nodes.values() {
        let _ = write!(out, "  <node id=\"{}\" lat=\"{}\" lon=\"{}\"", n.id, fmt_g17(n.lat), fmt_g17(n.lon));
        if n.tags.is_empty() {
            out.push_str("/>\n");
        } else {
            out.push_str(">\n");
            write_tags(&mut out, &n.tags);
            out.push_str("  </node>\n");
        }
    }
    for w in &extract.ways {
        let _ = writeln!(out, "  <way id=\"{}\">", w.id);
        for r in &w.node_refs {
            let _ = writeln!(out, "    <nd ref=\"{r}\"/>");
        }
        write_tags(&mut out, &w.tags);
        out.push_str("  </way>\n");
    }
    out.push_str("</osm>\n");
    out
}

fn write_tags(out: &mut String, tags: &Tags) {
    for (k, v) in tags {
        out.push_str(&format!("    <tag k=\"{}\" v=\"{}\"/>\n", xml_escape(k), xml_escape(v)));
    }
}

pub(crate) fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_node() {
        let x = parse_osm(r#"<osm version="0.6"><node id="1" lat="10.0" lon="20.0"/></osm>"#).unwrap();
        assert_eq!(x.nodes.len(), 1);
        assert!(x.ways.is_empty());
        let n = x.node(1).unwrap();
        assert_eq!((n.lat, n.lon), (10.0, 20.0));
    }

    #[test]
    fn way_with_refs_and_tags() {
        let xml = r#"<?xml version="1.0"?>
<osm version="0.6">
  <bounds minlat="0" minlon="0" maxlat="1" maxlon="1"/>
  <node id="1" lat="0.0" lon="0.0" version="3"/>
  <node id="2" lat="0.001" lon="0.0"/>
  <way id="7">
    <nd ref="1"/>
    <nd ref="2"/>
    <tag k="highway" v="residential"/>
  </way>
  <relation id="5"><member type="way" ref="7" role=""/></relation>
</osm>"#;
        let x = parse_osm(xml).unwrap();
        assert_eq!(x.nodes.len(), 2);
        assert_eq!(x.ways.len(), 1);
        assert_eq!(x.ways[0].node_refs, vec![1, 2]);
        assert_eq!(x.ways[0].tag("highway"), Some("residential"));
        assert!(x.ways[0].is_road_candidate());
    }

    #[test]
    fn dangling_reference_names_way() {
        let xml = r#"<osm><node id="1" lat="0" lon="0"/><way id="42"><nd ref="1"/><nd ref="99"/></way></osm>"#;
        match parse_osm(xml) {
            Err(GeoError::DanglingReference { way, node }) => assert_eq!((way, node), (42, 99)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_xml_reports_line() {
        let xml = "<osm>\n<node id=\"1\" lat=\"0\" lon=\"0\">\n</osm>";
        match parse_osm(xml) {
            Err(GeoError::Xml { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_out_of_range_latitude() {
        let xml = r#"<osm><node id="1" lat="91" lon="0"/></osm>"#;
        assert!(matches!(parse_osm(xml), Err(GeoError::InvalidCoordinate { node: 1, .. })));
    }

    #[test]
    fn write_then_parse() {
        let xml = r#"<osm><node id="1" lat="0.5" lon="0.25"><tag k="name" v="a &amp; b"/></node><node id="2" lat="0.6" lon="0.25"/>
            <way id="3"><nd ref="1"/><nd ref="2"/><tag k="highway" v="service"/></way></osm>"#;
        let x = parse_osm(xml).unwrap();
        assert_eq!(parse_osm(&write_osm(&x)).unwrap(), x);
    }
}
