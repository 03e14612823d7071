use super::{icp_align, resample_polyline, IcpParams, IcpReport, RegistrationError};
use crate::geo::RoadGraph;
use crate::geom::Vec2;
use crate::terrain::{HeightField, PointCloud};

/// Half-height of the near-ground band around the DEM surface (meters).
pub const GROUND_BAND: f64 = 0.3;

/// Planimetric positions of the cloud points lying within [`GROUND_BAND`] of
/// the terrain. Points outside the terrain grid are dropped.
pub fn ground_band(cloud: &PointCloud, terrain: &impl HeightField) -> Vec<Vec2> {
    cloud
        .points
        .iter()
        .filter(|p| matches!(terrain.height(p.x, p.y), Ok(z) if (p.z - z).abs() <= GROUND_BAND))
        .map(|p| p.xy())
        .collect()
}

/// Densified centerline samples used as the ICP source. Bridge decks are left
/// out because their returns sit above the ground band; if every edge is a
/// bridge they are used anyway.
pub fn centerline_samples(graph: &RoadGraph, step: f64) -> Vec<Vec2> {
    let on_ground: Vec<_> = graph.edges.iter().filter(|e| !e.is_bridge).collect();
    let edges = if on_ground.is_empty() { graph.edges.iter().collect() } else { on_ground };
    edges.into_iter().flat_map(|e| resample_polyline(&e.polyline, step)).collect()
}

/// Aligns the whole graph to near-ground LiDAR evidence with one global rigid
/// transform and returns the moved graph together with the ICP report.
pub fn fine_tune_graph(
    graph: &RoadGraph,
    ground: &PointCloud,
    terrain: &impl HeightField,
    params: &IcpParams,
) -> Result<(RoadGraph, IcpReport), RegistrationError> {
    if graph.is_empty() {
        return Err(RegistrationError::Precondition("road graph is empty".into()));
    }
    if ground.is_empty() {
        return Err(RegistrationError::Precondition("ground point cloud is empty".into()));
    }
    params.validate()?;
    let source = centerline_samples(graph, params.resample_step);
    let target = ground_band(ground, terrain);
    log::info!("fine-tune: {} centerline samples against {} ground-band points", source.len(), target.len());
    if target.len() < 2 {
        return Err(RegistrationError::NoOverlap { iteration: 0, correspondences: target.len() });
    }
    let report = icp_align(&source, &target, params)?;
    let t = report.transform;
    Ok((graph.map_points(|p| t.apply(p)), report))
}
