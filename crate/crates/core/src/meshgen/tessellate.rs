use super::{Material, Mesh, MeshError, TessellationParams};
use crate::odr::{eval_elevation, eval_plan_view, has_errors, lane_boundary_t, validate_road, LaneType, OdrError, Road};
use crate::terrain::{Dem, Rect};

fn material_of(t: &LaneType) -> Material {
    match t {
        LaneType::Sidewalk => Material::Sidewalk,
        LaneType::Shoulder => Material::Shoulder,
        _ => Material::Road,
    }
}

/// `start, start+ds, ...` below `end`, then `end`.
fn slice_positions(start: f64, end: f64, ds: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 0usize;
    loop {
        let s = start + k as f64 * ds;
        if s >= end - 1e-9 {
            break;
        }
        out.push(s);
        k += 1;
    }
    out.push(end);
    out
}

/// Triangle strip across all lanes of `road`, one strip per lane section.
/// Roads without an elevation profile are laid at z = 0.
pub fn tessellate_road(road: &Road, params: &TessellationParams) -> Result<Mesh, MeshError> {
    params.validate().map_err(MeshError::Params)?;
    let issues = validate_road(road);
    if has_errors(&issues) {
        return Err(MeshError::InvalidRoad {
            road: road.id.clone(),
            issues: issues.iter().map(|i| i.to_string()).collect(),
        });
    }
    let odr = |e: OdrError| MeshError::Odr { road: road.id.clone(), source: e };
    let mut mesh = Mesh::default();
    for (idx, section) in road.lane_sections.iter().enumerate() {
        let (start, end) = road.lane_section_span(idx);
        // boundary lane ids from the outermost left to the outermost right
        let mut ids: Vec<i32> = section.left.iter().map(|l| l.id).collect();
        ids.sort_unstable_by(|a, b| b.cmp(a));
        ids.push(0);
        let mut right: Vec<i32> = section.right.iter().map(|l| l.id).collect();
        right.sort_unstable_by(|a, b| b.cmp(a));
        ids.extend(right);
        let materials: Vec<Material> = ids
            .windows(2)
            .map(|w| {
                let lane = if w[0] > 0 { w[0] } else { w[1] };
                material_of(&section.lane(lane).expect("lane listed in its section").lane_type)
            })
            .collect();

        let slices = slice_positions(start, end, params.ds);
        let b = ids.len() as u32;
        let first = mesh.vertices.len() as u32;
        for &s in &slices {
            let pose = eval_plan_view(road, s).map_err(odr)?;
            let z = match eval_elevation(road, s) {
                Ok(z) => z,
                Err(OdrError::MissingProfile(_)) => 0.0,
                Err(e) => return Err(odr(e)),
            };
            for &id in &ids {
                let t = lane_boundary_t(section, id, s - start).map_err(odr)?;
                let p = pose.offset(t);
                mesh.push_vertex([p.x, p.y, z]);
            }
        }
        for i in 0..slices.len() as u32 - 1 {
            for (k, &m) in materials.iter().enumerate() {
                let k = k as u32;
                let a = first + i * b + k;
                let bb = a + 1;
                let c = bb + b;
                let d = a + b;
                mesh.push_triangle([bb, c, d], m);
                mesh.push_triangle([bb, d, a], m);
            }
        }
    }
    Ok(mesh)
}

/// Grid over the DEM cell centers inside `bounds`, two triangles per cell.
/// Cells with a nodata corner are left open.
pub fn tessellate_terrain(dem: &Dem, bounds: &Rect) -> Result<Mesh, MeshError> {
    let cols: Vec<usize> = (0..dem.ncols)
        .filter(|&c| {
            let x = dem.cell_center(0, c).x;
            x >= bounds.min.x && x <= bounds.max.x
        })
        .collect();
    // south to north
    let rows: Vec<usize> = (0..dem.nrows)
        .rev()
        .filter(|&r| {
            let y = dem.cell_center(r, 0).y;
            y >= bounds.min.y && y <= bounds.max.y
        })
        .collect();
    if cols.len() < 2 || rows.len() < 2 {
        return Err(MeshError::EmptyTerrain);
    }
    let mut mesh = Mesh::default();
    let mut index = vec![None; rows.len() * cols.len()];
    for (j, &r) in rows.iter().enumerate() {
        for (i, &c) in cols.iter().enumerate() {
            let z = dem.get(r, c);
            if !dem.is_nodata(z) {
                let p = dem.cell_center(r, c);
                index[j * cols.len() + i] = Some(mesh.push_vertex([p.x, p.y, z]));
            }
        }
    }
    let at = |i: usize, j: usize| index[j * cols.len() + i];
    for j in 0..rows.len() - 1 {
        for i in 0..cols.len() - 1 {
            if let (Some(p00), Some(p10), Some(p11), Some(p01)) = (at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)) {
                mesh.push_triangle([p00, p10, p11], Material::Terrain);
                mesh.push_triangle([p00, p11, p01], Material::Terrain);
            }
        }
    }
    if mesh.triangles.is_empty() {
        return Err(MeshError::EmptyTerrain);
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec2;
    use crate::odr::{ElevPoly, Geometry, GeometryKind, LaneSection};
    use std::collections::HashMap;
    use std::f64::consts::PI;

    fn straight(length: f64) -> Road {
        Road::new("r", vec![Geometry { s: 0.0, x: 0.0, y: 0.0, hdg: 0.0, length, kind: GeometryKind::Line }])
            .with_elevation(vec![ElevPoly { s: 0.0, a: 1.0, b: 0.05, c: 0.0, d: 0.0 }])
            .with_lane_section(LaneSection::symmetric(&[(LaneType::Driving, 3.5)], &[(LaneType::Driving, 3.5)]))
    }

    #[test]
    fn counts_for_whole_and_partial_lengths() {
        let p = TessellationParams::default();
        let m = tessellate_road(&straight(10.0), &p).unwrap();
        assert_eq!((m.vertices.len(), m.triangles.len()), (33, 40));
        let m = tessellate_road(&straight(10.5), &p).unwrap();
        assert_eq!((m.vertices.len(), m.triangles.len()), (36, 44));
        m.check().unwrap();
        for v in &m.vertices {
            assert!((v[2] - (1.0 + 0.05 * v[0])).abs() < 1e-12);
        }
    }

    #[test]
    fn arc_vertices_on_concentric_circles() {
        let road = Road::new("a", vec![Geometry { s: 0.0, x: 0.0, y: 0.0, hdg: 0.0, length: PI / 0.2, kind: GeometryKind::Arc { curvature: 0.1 } }])
            .with_elevation(vec![ElevPoly::constant(0.0, 0.0)])
            .with_lane_section(LaneSection::symmetric(&[(LaneType::Driving, 3.5)], &[(LaneType::Sidewalk, 2.0)]));
        let m = tessellate_road(&road, &TessellationParams::default()).unwrap();
        let center = Vec2::new(0.0, 10.0);
        for (k, v) in m.vertices.iter().enumerate() {
            let t = [3.5, 0.0, -2.0][k % 3];
            assert!((Vec2::new(v[0], v[1]).distance(center) - (10.0 - t)).abs() < 1e-6);
        }
        m.check().unwrap();
        assert!(m.materials.contains(&Material::Sidewalk));
    }

    #[test]
    fn strip_is_manifold() {
        let m = tessellate_road(&straight(7.3), &TessellationParams { ds: 0.7, ..Default::default() }).unwrap();
        let mut count: HashMap<(u32, u32), usize> = HashMap::new();
        for t in &m.triangles {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                *count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        assert!(count.values().all(|&c| c == 1 || c == 2));
        let boundary = count.values().filter(|&&c| c == 1).count();
        // 12 slices: two long sides of 11 edges, two ends of 2 edges
        assert_eq!(boundary, 2 * 11 + 2 * 2);
    }

    #[test]
    fn kinked_plan_view_stays_upward() {
        let l = |s: f64, x: f64, y: f64, hdg: f64| Geometry { s, x, y, hdg, length: 10.0, kind: GeometryKind::Line };
        let end = Vec2::new(10.0, 0.0) + Vec2::from_heading(PI / 4.0) * 10.0;
        let road = Road::new("k", vec![l(0.0, 0.0, 0.0, 0.0), l(10.0, 10.0, 0.0, PI / 4.0), l(20.0, end.x, end.y, -PI / 4.0)])
            .with_elevation(vec![ElevPoly::constant(0.0, 0.0)])
            .with_lane_section(LaneSection::symmetric(&[(LaneType::Driving, 3.5), (LaneType::Sidewalk, 2.0)], &[(LaneType::Driving, 3.5)]));
        let m = tessellate_road(&road, &TessellationParams::default()).unwrap();
        m.check().unwrap();
        // only strips on the inside of the two corners lose triangles
        let full = (31 - 1) * 3 * 2;
        assert!(m.triangles.len() < full && m.triangles.len() > full - 12, "{}", m.triangles.len());
    }

    #[test]
    fn invalid_road_refused() {
        let mut r = straight(10.0);
        r.length = 12.0;
        assert!(matches!(tessellate_road(&r, &TessellationParams::default()), Err(MeshError::InvalidRoad { .. })));
    }

    #[test]
    fn terrain_grid_counts() {
        let dem = Dem::from_fn(5, 5, 0.0, 0.0, 1.0, |_, _| 4.0);
        let m = tessellate_terrain(&dem, &Rect::new(Vec2::new(0.9, 0.9), Vec2::new(3.6, 3.6))).unwrap();
        assert_eq!((m.vertices.len(), m.triangles.len()), (9, 8));
        assert!(m.vertices.iter().all(|v| v[2] == 4.0));
        m.check().unwrap();

        let raised = Dem::from_fn(2, 2, 0.0, 0.0, 1.0, |x, y| if x > 1.0 && y > 1.0 { 3.0 } else { 0.0 });
        let m = tessellate_terrain(&raised, &raised.extent()).unwrap();
        assert_eq!(m.triangles.len(), 2);
        m.check().unwrap();

        assert!(matches!(tessellate_terrain(&dem, &Rect::new(Vec2::new(50.0, 50.0), Vec2::new(60.0, 60.0))), Err(MeshError::EmptyTerrain)));
    }
}
