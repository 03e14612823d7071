//! Road and terrain tessellation with OBJ/MTL export.

mod mesh;
mod obj;
mod tessellate;

use std::fmt;
use std::time::{Duration, Instant};

use rayon::prelude::*;

pub use mesh::{Material, Mesh, TessellationParams, MIN_TRIANGLE_AREA};
pub use obj::{export_obj, mtl_string, obj_string, ObjReport, MTL_FILE};
pub use tessellate::{tessellate_road, tessellate_terrain};

use crate::geom::Vec2;
use crate::odr::{OdrError, OdrMap};
use crate::terrain::{Dem, Rect};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeshError {
    #[error("road {road} fails validation: {}", issues.join("; "))]
    InvalidRoad { road: String, issues: Vec<String> },
    #[error("road {road}: {source}")]
    Odr { road: String, source: OdrError },
    #[error("terrain bounds do not cover at least 2x2 DEM samples")]
    EmptyTerrain,
    #[error("invalid tessellation parameters: {0}")]
    Params(String),
    #[error("cannot build worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshFailure {
    pub name: String,
    pub error: MeshError,
}

impl fmt::Display for MeshFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.name, self.error)
    }
}

/// Output of [`generate_all`]: successful meshes in output order, failures,
/// and the time spent on each mesh.
#[derive(Debug, Clone, Default)]
pub struct MeshSet {
    pub meshes: Vec<(String, Mesh)>,
    pub failures: Vec<MeshFailure>,
    pub timings: Vec<(String, Duration)>,
}

/// `road_<id>` for every road (ascending id) then `terrain` over the roads'
/// bounding box grown by `terrain_skirt`. Roads are tessellated on a pool of
/// `workers` threads; the result does not depend on the worker count.
pub fn generate_all(map: &OdrMap, dem: &Dem, params: &TessellationParams, workers: usize) -> Result<MeshSet, MeshError> {
    params.validate().map_err(MeshError::Params)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| MeshError::Pool(e.to_string()))?;
    let mut roads: Vec<_> = map.roads.iter().collect();
    roads.sort_by(|a, b| a.id.cmp(&b.id));

    let results: Vec<(String, Result<Mesh, MeshError>, Duration)> = pool.install(|| {
        roads
            .par_iter()
            .map(|road| {
                let t0 = Instant::now();
                let mesh = tessellate_road(road, params);
                (format!("road_{}", road.id), mesh, t0.elapsed())
            })
            .collect()
    });

    let mut set = MeshSet::default();
    for (name, result, dt) in results {
        set.timings.push((name.clone(), dt));
        match result {
            Ok(mesh) => set.meshes.push((name, mesh)),
            Err(error) => set.failures.push(MeshFailure { name, error }),
        }
    }

    let t0 = Instant::now();
    let corners = set.meshes.iter().flat_map(|(_, m)| m.vertices.iter().map(|v| Vec2::new(v[0], v[1])));
    let terrain = match Rect::bounding(corners) {
        Some(b) => tessellate_terrain(dem, &b.expand(params.terrain_skirt)),
        None => Err(MeshError::EmptyTerrain),
    };
    set.timings.push(("terrain".into(), t0.elapsed()));
    match terrain {
        Ok(mesh) => set.meshes.push(("terrain".into(), mesh)),
        Err(error) => set.failures.push(MeshFailure { name: "terrain".into(), error }),
    }
    Ok(set)
}
