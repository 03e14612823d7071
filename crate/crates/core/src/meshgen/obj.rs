use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use super::{Material, Mesh};

/// Material library shared by every exported mesh.
pub const MTL_FILE: &str = "twinmap.mtl";

/// Counts written for one mesh file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjReport {
    pub name: String,
    pub path: PathBuf,
    pub vertices: usize,
    pub faces: usize,
}

/// Wavefront OBJ text for one mesh. Faces are grouped by material in
/// [`Material::ALL`] order, keeping their relative order within a group.
pub fn obj_string(name: &str, mesh: &Mesh) -> String {
    let mut out = String::with_capacity(64 + mesh.vertices.len() * 40 + mesh.triangles.len() * 24);
    let _ = writeln!(out, "mtllib {MTL_FILE}");
    let _ = writeln!(out, "o {name}");
    for v in &mesh.vertices {
        let _ = writeln!(out, "v {:.6} {:.6} {:.6}", v[0], v[1], v[2]);
    }
    for m in Material::ALL {
        let mut faces = mesh.triangles.iter().zip(&mesh.materials).filter(|(_, &mm)| mm == m).peekable();
        if faces.peek().is_none() {
            continue;
        }
        let _ = writeln!(out, "usemtl {}", m.name());
        for (t, _) in faces {
            let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
    }
    out
}

pub fn mtl_string() -> String {
    let mut out = String::new();
    for m in Material::ALL {
        let [r, g, b] = m.color();
        let _ = writeln!(out, "newmtl {}\nKd {r} {g} {b}", m.name());
    }
    out
}

/// Writes `<name>.obj` per mesh plus the shared material library into `dir`,
/// creating it if needed.
pub fn export_obj(meshes: &[(String, Mesh)], dir: &Path) -> io::Result<Vec<ObjReport>> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(MTL_FILE), mtl_string())?;
    meshes
        .iter()
        .map(|(name, mesh)| {
            let path = dir.join(format!("{name}.obj"));
            fs::write(&path, obj_string(name, mesh))?;
            Ok(ObjReport { name: name.clone(), path, vertices: mesh.vertices.len(), faces: mesh.triangles.len() })
        })
        .collect()
}
