use std::fmt;

/// Triangles below this area (m^2) are considered degenerate.
pub const MIN_TRIANGLE_AREA: f64 = 1e-10;

/// Surface label; the declaration order is the order used in OBJ files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Material {
    Road,
    Sidewalk,
    Shoulder,
    Terrain,
}

impl Material {
    pub const ALL: [Material; 4] = [Material::Road, Material::Sidewalk, Material::Shoulder, Material::Terrain];

    pub fn name(self) -> &'static str {
        match self {
            Material::Road => "road",
            Material::Sidewalk => "sidewalk",
            Material::Shoulder => "shoulder",
            Material::Terrain => "terrain",
        }
    }

    /// Placeholder diffuse color.
    pub fn color(self) -> [f64; 3] {
        match self {
            Material::Road => [0.2, 0.2, 0.2],
            Material::Sidewalk => [0.6, 0.6, 0.6],
            Material::Shoulder => [0.4, 0.4, 0.35],
            Material::Terrain => [0.3, 0.5, 0.25],
        }
    }
}

impl fmt::Display for Material {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TessellationParams {
    /// Longitudinal slice spacing along a road.
    pub ds: f64,
    /// Margin added around the road bounding box for the terrain mesh.
    pub terrain_skirt: f64,
}

impl Default for TessellationParams {
    fn default() -> Self {
        TessellationParams { ds: 1.0, terrain_skirt: 50.0 }
    }
}

impl TessellationParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.ds > 0.0 && self.ds.is_finite()) {
            return Err(format!("ds must be positive, got {}", self.ds));
        }
        if !(self.terrain_skirt >= 0.0 && self.terrain_skirt.is_finite()) {
            return Err(format!("terrain_skirt must be non-negative, got {}", self.terrain_skirt));
        }
        Ok(())
    }
}

/// Labeled triangle mesh, z up, counter-clockwise seen from +z.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[u32; 3]>,
    pub materials: Vec<Material>,
}

impl Mesh {
    pub fn push_vertex(&mut self, v: [f64; 3]) -> u32 {
        self.vertices.push(v);
        (self.vertices.len() - 1) as u32
    }

    /// Adds the triangle unless it is degenerate or does not face up (a strip
    /// folded over itself on the inside of a plan-view kink). Returns whether
    /// it was kept.
    pub fn push_triangle(&mut self, tri: [u32; 3], material: Material) -> bool {
        if self.area(tri) <= MIN_TRIANGLE_AREA || self.plan_cross(tri) <= 0.0 {
            return false;
        }
        self.triangles.push(tri);
        self.materials.push(material);
        true
    }

    pub fn area(&self, [a, b, c]: [u32; 3]) -> f64 {
        let (a, b, c) = (self.vertices[a as usize], self.vertices[b as usize], self.vertices[c as usize]);
        let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
        let n = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
        0.5 * (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt()
    }

    /// z component of the (unnormalized) normal of triangle `i`.
    pub fn normal_z(&self, i: usize) -> f64 {
        self.plan_cross(self.triangles[i])
    }

    fn plan_cross(&self, tri: [u32; 3]) -> f64 {
        let [a, b, c] = tri.map(|k| self.vertices[k as usize]);
        (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    }

    /// Checks index range, triangle area and orientation.
    pub fn check(&self) -> Result<(), String> {
        if self.materials.len() != self.triangles.len() {
            return Err(format!("{} materials for {} triangles", self.materials.len(), self.triangles.len()));
        }
        let n = self.vertices.len() as u32;
        for (i, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&k| k >= n) {
                return Err(format!("triangle {i} indexes past {n} vertices"));
            }
            if self.area(*tri) <= MIN_TRIANGLE_AREA {
                return Err(format!("triangle {i} is degenerate"));
            }
            if self.normal_z(i) <= 0.0 {
                return Err(format!("triangle {i} is not counter-clockwise"));
            }
        }
        Ok(())
    }
}
