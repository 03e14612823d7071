//! OpenDRIVE 1.4 XML reader and writer for the implemented record subset.

use std::fmt::Write;

use roxmltree::Node;

use super::model::*;
use super::OdrError;
use crate::geo::xml_escape;
use crate::geom::fmt_g17;

/// Records outside the implemented subset. Finding one is an error rather
/// than a silent loss of geometry or semantics.
const UNSUPPORTED: &[&str] = &[
    "spiral",
    "poly3",
    "lateralProfile",
    "superelevation",
    "crossfall",
    "shape",
    "laneOffset",
    "border",
    "objects",
    "signals",
    "junction",
    "controller",
    "station",
];

/// Serializes with 17 significant digits; roads are written in ascending id order.
pub fn serialize(map: &OdrMap) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<OpenDRIVE>\n");
    let h = &map.header;
    let _ = write!(out, "  <header revMajor=\"{}\" revMinor=\"{}\" name=\"{}\"", h.rev_major, h.rev_minor, xml_escape(&h.name));
    match &h.geo_reference {
        Some(geo) => {
            let _ = write!(out, ">\n    <geoReference><![CDATA[{}]]></geoReference>\n  </header>\n", geo.replace("]]>", "]]]]><![CDATA[>"));
        }
        None => out.push_str("/>\n"),
    }

    let mut roads: Vec<&Road> = map.roads.iter().collect();
    roads.sort_by(|a, b| a.id.cmp(&b.id));
    for road in roads {
        write_road(&mut out, road);
    }
    out.push_str("</OpenDRIVE>\n");
    out
}

fn write_road(out: &mut String, road: &Road) {
    let _ = writeln!(
        out,
        "  <road name=\"{}\" length=\"{}\" id=\"{}\" junction=\"-1\">",
        xml_escape(&road.name),
        fmt_g17(road.length),
        xml_escape(&road.id)
    );
    if road.predecessor.is_some() || road.successor.is_some() {
        out.push_str("    <link>\n");
        for (tag, link) in [("predecessor", &road.predecessor), ("successor", &road.successor)] {
            if let Some(l) = link {
                let _ = writeln!(
                    out,
                    "      <{tag} elementType=\"road\" elementId=\"{}\" contactPoint=\"{}\"/>",
                    xml_escape(&l.road_id),
                    l.contact_point.as_str()
                );
            }
        }
        out.push_str("    </link>\n");
    }

    out.push_str("    <planView>\n");
    for g in &road.plan_view {
        let _ = writeln!(
            out,
            "      <geometry s=\"{}\" x=\"{}\" y=\"{}\" hdg=\"{}\" length=\"{}\">",
            fmt_g17(g.s),
            fmt_g17(g.x),
            fmt_g17(g.y),
            fmt_g17(g.hdg),
            fmt_g17(g.length)
        );
        match g.kind {
            GeometryKind::Line => out.push_str("        <line/>\n"),
            GeometryKind::Arc { curvature } => {
                let _ = writeln!(out, "        <arc curvature=\"{}\"/>", fmt_g17(curvature));
            }
            GeometryKind::ParamPoly3 { au, bu, cu, du, av, bv, cv, dv } => {
                let _ = writeln!(
                    out,
                    "        <paramPoly3 aU=\"{}\" bU=\"{}\" cU=\"{}\" dU=\"{}\" aV=\"{}\" bV=\"{}\" cV=\"{}\" dV=\"{}\" pRange=\"arcLength\"/>",
                    fmt_g17(au),
                    fmt_g17(bu),
                    fmt_g17(cu),
                    fmt_g17(du),
                    fmt_g17(av),
                    fmt_g17(bv),
                    fmt_g17(cv),
                    fmt_g17(dv)
                );
            }
        }
        out.push_str("      </geometry>\n");
    }
    out.push_str("    </planView>\n");

    out.push_str("    <elevationProfile>\n");
    for e in &road.elevation_profile {
        let _ = writeln!(
            out,
            "      <elevation s=\"{}\" a=\"{}\" b=\"{}\" c=\"{}\" d=\"{}\"/>",
            fmt_g17(e.s),
            fmt_g17(e.a),
            fmt_g17(e.b),
            fmt_g17(e.c),
            fmt_g17(e.d)
        );
    }
    out.push_str("    </elevationProfile>\n");

    out.push_str("    <lanes>\n");
    for sec in &road.lane_sections {
        let _ = writeln!(out, "      <laneSection s=\"{}\">", fmt_g17(sec.s));
        if !sec.left.is_empty() {
            // OpenDRIVE lists left lanes from the outermost inward
            let mut left: Vec<&Lane> = sec.left.iter().collect();
            left.sort_by_key(|l| std::cmp::Reverse(l.id));
            write_lane_group(out, "left", left);
        }
        write_lane_group(out, "center", vec![&sec.center]);
        if !sec.right.is_empty() {
            let mut right: Vec<&Lane> = sec.right.iter().collect();
            right.sort_by_key(|l| std::cmp::Reverse(l.id));
            write_lane_group(out, "right", right);
        }
        out.push_str("      </laneSection>\n");
    }
    out.push_str("    </lanes>\n");
    out.push_str("  </road>\n");
}

fn write_lane_group(out: &mut String, tag: &str, lanes: Vec<&Lane>) {
    let _ = writeln!(out, "        <{tag}>");
    for lane in lanes {
        let open = format!("          <lane id=\"{}\" type=\"{}\" level=\"false\"", lane.id, xml_escape(lane.lane_type.as_str()));
        if lane.widths.is_empty() {
            let _ = writeln!(out, "{open}/>");
            continue;
        }
        let _ = writeln!(out, "{open}>");
        for w in &lane.widths {
            let _ = writeln!(
                out,
                "            <width sOffset=\"{}\" a=\"{}\" b=\"{}\" c=\"{}\" d=\"{}\"/>",
                fmt_g17(w.s_offset),
                fmt_g17(w.a),
                fmt_g17(w.b),
                fmt_g17(w.c),
                fmt_g17(w.d)
            );
        }
        out.push_str("          </lane>\n");
    }
    let _ = writeln!(out, "        </{tag}>");
}

/// Parse result plus non-fatal findings (e.g. a revision other than 1.4).
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed {
    pub map: OdrMap,
    pub warnings: Vec<String>,
}

/// Parses an `.xodr` document; warnings are logged and dropped.
pub fn deserialize(xml_text: &str) -> Result<OdrMap, OdrError> {
    let parsed = deserialize_with_warnings(xml_text)?;
    for w in &parsed.warnings {
        log::warn!("{w}");
    }
    Ok(parsed.map)
}

pub fn deserialize_with_warnings(xml_text: &str) -> Result<Parsed, OdrError> {
    let doc = roxmltree::Document::parse(xml_text).map_err(|e| OdrError::Xml { line: e.pos().row, message: e.to_string() })?;
    let cx = Cx { doc: &doc };
    let root = doc.root_element();
    if root.tag_name().name() != "OpenDRIVE" {
        return Err(cx.err(root, format!("expected <OpenDRIVE>, found <{}>", root.tag_name().name())));
    }

    let mut warnings = Vec::new();
    let mut header = None;
    let mut roads = Vec::new();
    for el in elements(root) {
        match el.tag_name().name() {
            "header" => {
                let rev_major = cx.parse_attr(el, "revMajor")?;
                let rev_minor = cx.parse_attr(el, "revMinor")?;
                if rev_major != 1 || rev_minor != 4 {
                    warnings.push(format!("document declares OpenDRIVE {rev_major}.{rev_minor}; reading as 1.4"));
                }
                let geo_reference = elements(el)
                    .find(|n| n.has_tag_name("geoReference"))
                    .map(|n| n.children().filter_map(|c| c.text()).collect::<String>());
                header = Some(Header {
                    name: el.attribute("name").unwrap_or_default().to_string(),
                    rev_major,
                    rev_minor,
                    geo_reference,
                });
            }
            "road" => roads.push(cx.road(el)?),
            name => cx.check_supported(el, name)?,
        }
    }
    let header = header.ok_or_else(|| cx.err(root, "missing <header>".into()))?;
    let mut map = OdrMap { header, roads };
    map.sort_roads();
    Ok(Parsed { map, warnings })
}

fn elements<'a, 'i>(n: Node<'a, 'i>) -> impl Iterator<Item = Node<'a, 'i>> {
    n.children().filter(|c| c.is_element())
}

struct Cx<'d, 'i> {
    doc: &'d roxmltree::Document<'i>,
}

impl Cx<'_, '_> {
    fn line(&self, n: Node) -> u32 {
        self.doc.text_pos_at(n.range().start).row
    }

    fn err(&self, n: Node, message: String) -> OdrError {
        OdrError::Xml { line: self.line(n), message }
    }

    fn check_supported(&self, n: Node, name: &str) -> Result<(), OdrError> {
        if UNSUPPORTED.contains(&name) {
            return Err(OdrError::UnsupportedRecord { element: name.to_string(), line: self.line(n) });
        }
        Ok(())
    }

    fn parse_attr<T: std::str::FromStr>(&self, n: Node, name: &str) -> Result<T, OdrError> {
        let raw = n
            .attribute(name)
            .ok_or_else(|| self.err(n, format!("<{}> is missing attribute `{name}`", n.tag_name().name())))?;
        raw.trim()
            .parse()
            .map_err(|_| self.err(n, format!("attribute `{name}` has invalid value {raw:?}")))
    }

    fn num(&self, n: Node, name: &str) -> Result<f64, OdrError> {
        self.parse_attr(n, name)
    }

    fn road(&self, el: Node) -> Result<Road, OdrError> {
        let mut road = Road {
            id: el.attribute("id").ok_or_else(|| self.err(el, "<road> without id".into()))?.to_string(),
            name: el.attribute("name").unwrap_or_default().to_string(),
            length: self.num(el, "length")?,
            predecessor: None,
            successor: None,
            plan_view: Vec::new(),
            elevation_profile: Vec::new(),
            lane_sections: Vec::new(),
        };
        if let Some(j) = el.attribute("junction") {
            if j.trim() != "-1" {
                return Err(OdrError::UnsupportedRecord { element: "junction road".into(), line: self.line(el) });
            }
        }
        for child in elements(el) {
            match child.tag_name().name() {
                "link" => {
                    for l in elements(child) {
                        let slot = match l.tag_name().name() {
                            "predecessor" => &mut road.predecessor,
                            "successor" => &mut road.successor,
                            _ => continue,
                        };
                        if l.attribute("elementType") != Some("road") {
                            return Err(OdrError::UnsupportedRecord { element: "junction link".into(), line: self.line(l) });
                        }
                        let contact_point = match l.attribute("contactPoint") {
                            Some("start") => ContactPoint::Start,
                            Some("end") => ContactPoint::End,
                            other => return Err(self.err(l, format!("invalid contactPoint {other:?}"))),
                        };
                        *slot = Some(RoadLink { road_id: self.parse_attr(l, "elementId")?, contact_point });
                    }
                }
                "planView" => {
                    for g in elements(child).filter(|g| g.has_tag_name("geometry")) {
                        road.plan_view.push(self.geometry(g)?);
                    }
                }
                "elevationProfile" => {
                    for e in elements(child).filter(|e| e.has_tag_name("elevation")) {
                        road.elevation_profile.push(ElevPoly {
                            s: self.num(e, "s")?,
                            a: self.num(e, "a")?,
                            b: self.num(e, "b")?,
                            c: self.num(e, "c")?,
                            d: self.num(e, "d")?,
                        });
                    }
                }
                "lanes" => {
                    for sec in elements(child) {
                        match sec.tag_name().name() {
                            "laneSection" => road.lane_sections.push(self.lane_section(sec)?),
                            name => self.check_supported(sec, name)?,
                        }
                    }
                }
                name => self.check_supported(child, name)?,
            }
        }
        Ok(road)
    }

    fn geometry(&self, g: Node) -> Result<Geometry, OdrError> {
        let record = elements(g).next().ok_or_else(|| self.err(g, "<geometry> without a shape record".into()))?;
        let kind = match record.tag_name().name() {
            "line" => GeometryKind::Line,
            "arc" => GeometryKind::arc(self.num(record, "curvature")?),
            "paramPoly3" => {
                if record.attribute("pRange") != Some("arcLength") {
                    return Err(OdrError::UnsupportedRecord {
                        element: "paramPoly3 with normalized pRange".into(),
                        line: self.line(record),
                    });
                }
                GeometryKind::ParamPoly3 {
                    au: self.num(record, "aU")?,
                    bu: self.num(record, "bU")?,
                    cu: self.num(record, "cU")?,
                    du: self.num(record, "dU")?,
                    av: self.num(record, "aV")?,
                    bv: self.num(record, "bV")?,
                    cv: self.num(record, "cV")?,
                    dv: self.num(record, "dV")?,
                }
            }
            other => {
                return Err(OdrError::UnsupportedRecord { element: other.to_string(), line: self.line(record) });
            }
        };
        Ok(Geometry {
            s: self.num(g, "s")?,
            x: self.num(g, "x")?,
            y: self.num(g, "y")?,
            hdg: self.num(g, "hdg")?,
            length: self.num(g, "length")?,
            kind,
        })
    }

    fn lane_section(&self, el: Node) -> Result<LaneSection, OdrError> {
        let mut sec = LaneSection::new(self.num(el, "s")?);
        let mut center = None;
        for group in elements(el) {
            let name = group.tag_name().name();
            if !matches!(name, "left" | "center" | "right") {
                self.check_supported(group, name)?;
                continue;
            }
            for lane_el in elements(group).filter(|l| l.has_tag_name("lane")) {
                let lane = self.lane(lane_el)?;
                match name {
                    "left" => sec.left.push(lane),
                    "right" => sec.right.push(lane),
                    _ => {
                        if center.replace(lane).is_some() {
                            return Err(self.err(lane_el, "more than one center lane".into()));
                        }
                    }
                }
            }
        }
        sec.center = center.ok_or_else(|| self.err(el, "lane section without a center lane".into()))?;
        sec.left.sort_by_key(|l| l.id);
        sec.right.sort_by_key(|l| std::cmp::Reverse(l.id));
        Ok(sec)
    }

    fn lane(&self, el: Node) -> Result<Lane, OdrError> {
        let mut widths = Vec::new();
        for child in elements(el) {
            match child.tag_name().name() {
                "width" => widths.push(LaneWidth {
                    s_offset: self.num(child, "sOffset")?,
                    a: self.num(child, "a")?,
                    b: self.num(child, "b")?,
                    c: self.num(child, "c")?,
                    d: self.num(child, "d")?,
                }),
                name => self.check_supported(child, name)?,
            }
        }
        Ok(Lane {
            id: self.parse_attr(el, "id")?,
            lane_type: LaneType::parse(el.attribute("type").unwrap_or("none")),
            widths,
        })
    }
}
