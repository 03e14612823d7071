use crate::geom::Vec2;

/// WGS84 equatorial radius used by the local projection.
pub const EARTH_RADIUS: f64 = 6378137.0;

/// Equirectangular local tangent frame centred on an origin.
///
/// x points east, y points north, both in meters. Adequate for extracts up to
/// a few tens of kilometres across.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFrame {
    pub origin_lat: f64,
    pub origin_lon: f64,
    pub earth_radius: f64,
}

impl LocalFrame {
    pub fn new(origin_lat: f64, origin_lon: f64) -> Self {
        LocalFrame { origin_lat, origin_lon, earth_radius: EARTH_RADIUS }
    }

    pub fn project(&self, lat: f64, lon: f64) -> Vec2 {
        let k = self.earth_radius * std::f64::consts::PI / 180.0;
        Vec2::new(
            k * (lon - self.origin_lon) * self.origin_lat.to_radians().cos(),
            k * (lat - self.origin_lat),
        )
    }

    /// Inverse of [`project`](Self::project); returns `(lat, lon)`.
    pub fn unproject(&self, p: Vec2) -> (f64, f64) {
        let k = self.earth_radius * std::f64::consts::PI / 180.0;
        let lat = self.origin_lat + p.y / k;
        let lon = self.origin_lon + p.x / (k * self.origin_lat.to_radians().cos());
        (lat, lon)
    }
}
