//! Tessellates a converted map and the terrain and writes OBJ/MTL files.
//!
//!     cargo run --example mesh_export -- [out_dir] [workers]

use std::path::PathBuf;

use twinmap::converter::{convert, ConversionConfig};
use twinmap::geo::{build_road_graph, RoadFilter};
use twinmap::meshgen::{export_obj, generate_all, Material, TessellationParams};
use twinmap::synth::desk_fixture;

fn main() {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "twinmap_meshes".into()));
    let workers: usize = args.next().map_or(4, |w| w.parse().expect("workers"));

    let fixture = desk_fixture(6);
    let graph = build_road_graph(&fixture.osm, Some(fixture.frame), &RoadFilter::default());
    let map = convert(&graph, &fixture.dem, &ConversionConfig::default()).expect("convert");
    let set = generate_all(&map, &fixture.dem, &TessellationParams::default(), workers).expect("tessellate");
    for f in &set.failures {
        eprintln!("failed: {f}");
    }

    let mut per_material = [0usize; 4];
    for (_, mesh) in &set.meshes {
        mesh.check().expect("mesh invariants");
        for m in &mesh.materials {
            per_material[Material::ALL.iter().position(|x| x == m).unwrap()] += 1;
        }
    }
    for (m, n) in Material::ALL.iter().zip(per_material) {
        println!("{:>9}: {n} triangles", m.name());
    }

    let reports = export_obj(&set.meshes, &dir).expect("write OBJ");
    let total: usize = reports.iter().map(|r| r.faces).sum();
    println!("{} files, {total} triangles written to {}", reports.len(), dir.display());
}
