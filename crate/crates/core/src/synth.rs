//! Seeded desk-scale fixture: a small street grid with curves, a loop and a
//! bridge over a valley road, a 100x100 DEM, and a LiDAR-like point cloud.
//! The OSM extract is displaced from the cloud by a known rigid transform.

use std::collections::HashMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geo::{write_osm, LocalFrame, OsmExtract, OsmNode, OsmWay, Tags};
use crate::geom::{polyline_length, Vec2};
use crate::registration::RigidTransform2D;
use crate::terrain::{Dem, Point3, PointCloud};

pub const ORIGIN_LAT: f64 = 37.8715;
pub const ORIGIN_LON: f64 = -122.2730;
pub const DEM_SIZE: usize = 100;
pub const DEM_CELL: f64 = 2.5;
/// x of the valley floor and of the road running along it.
pub const VALLEY_X: f64 = 40.0;
/// y of the east-west street whose middle part is the bridge.
pub const BRIDGE_Y: f64 = 30.0;

/// The misalignment the desk fixture applies to the OSM geometry:
/// 1 degree about the frame origin, then (2 m, 1 m).
pub fn desk_misalignment() -> RigidTransform2D {
    RigidTransform2D::new(1f64.to_radians(), 2.0, 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureWay {
    pub id: i64,
    pub tags: Tags,
    /// Vertices in the true (LiDAR) frame.
    pub points: Vec<Vec2>,
}

impl FixtureWay {
    pub fn is_road(&self) -> bool {
        !matches!(self.tags.get("highway").map(String::as_str), Some("footway" | "cycleway" | "path" | "steps"))
    }

    pub fn is_bridge(&self) -> bool {
        self.tags.get("bridge").is_some_and(|b| b == "yes")
    }
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub frame: LocalFrame,
    pub ways: Vec<FixtureWay>,
    /// Maps true positions to the positions stored in `osm`.
    pub misalignment: RigidTransform2D,
    pub osm: OsmExtract,
    pub dem: Dem,
    pub cloud: PointCloud,
}

/// Paths written by [`Fixture::write`].
#[derive(Debug, Clone, PartialEq)]
pub struct FixtureFiles {
    pub osm: PathBuf,
    pub dem: PathBuf,
    pub cloud: PathBuf,
    pub config: PathBuf,
}

pub fn terrain_height(x: f64, y: f64) -> f64 {
    let valley = 8.0 * (-(x - VALLEY_X).powi(2) / (2.0 * 12.0 * 12.0)).exp();
    20.0 + 0.01 * x + 0.005 * y - valley
}

fn tags(pairs: &[(&str, &str)]) -> Tags {
    pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

fn pts(xy: &[(f64, f64)]) -> Vec<Vec2> {
    xy.iter().map(|&p| Vec2::from(p)).collect()
}

fn horizontal(y: f64, xs: &[f64]) -> Vec<Vec2> {
    xs.iter().map(|&x| Vec2::new(x, y)).collect()
}

fn vertical(x: f64, ys: &[f64]) -> Vec<Vec2> {
    ys.iter().map(|&y| Vec2::new(x, y)).collect()
}

/// Ways of the desk fixture in the true frame.
pub fn desk_ways() -> Vec<FixtureWay> {
    let mut ways = Vec::new();
    let mut add = |id: i64, t: Tags, points: Vec<Vec2>| ways.push(FixtureWay { id, tags: t, points });

    add(101, tags(&[("highway", "residential"), ("name", "South Street")]), horizontal(-80.0, &[-90.0, -80.0, -30.0, 40.0, 50.0, 90.0]));
    add(102, tags(&[("highway", "primary"), ("lanes", "4"), ("name", "Center Avenue")]), horizontal(-30.0, &[-90.0, -80.0, -30.0, 40.0, 90.0]));
    add(103, tags(&[("highway", "residential"), ("name", "Bridge Road")]), horizontal(BRIDGE_Y, &[-90.0, -80.0, -30.0, 0.0]));
    add(
        104,
        tags(&[("highway", "residential"), ("bridge", "yes"), ("layer", "1"), ("name", "Bridge Road")]),
        horizontal(BRIDGE_Y, &[0.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0]),
    );
    add(105, tags(&[("highway", "residential"), ("name", "Bridge Road")]), horizontal(BRIDGE_Y, &[80.0, 90.0]));
    add(
        106,
        tags(&[("highway", "secondary"), ("sidewalk", "both"), ("name", "North Street")]),
        horizontal(80.0, &[-90.0, -80.0, -30.0, 40.0, 90.0]),
    );
    add(107, tags(&[("highway", "residential"), ("name", "West Lane")]), vertical(-80.0, &[-90.0, -80.0, -30.0, 0.0, 30.0, 55.0, 80.0, 90.0]));
    add(
        108,
        tags(&[("highway", "residential"), ("oneway", "yes"), ("name", "Mid Lane")]),
        vertical(-30.0, &[-90.0, -80.0, -30.0, 30.0, 55.0, 80.0, 90.0]),
    );
    add(109, tags(&[("highway", "unclassified"), ("name", "Valley Road")]), vertical(VALLEY_X, &[-90.0, -80.0, -30.0, 0.0, 60.0, 80.0, 90.0]));
    add(110, tags(&[("highway", "unclassified"), ("name", "East Lane")]), vertical(90.0, &[-90.0, -80.0, -40.0, -30.0, 30.0, 55.0, 80.0, 90.0]));

    let s_curve = (0..=10)
        .map(|i| {
            let x = -80.0 + 5.0 * i as f64;
            Vec2::new(x, 55.0 + 8.0 * (std::f64::consts::PI * (x + 80.0) / 50.0).sin())
        })
        .collect();
    add(111, tags(&[("highway", "residential"), ("name", "Wave Street")]), s_curve);

    let arc = (0..=9)
        .map(|i| {
            let a = std::f64::consts::FRAC_PI_2 * i as f64 / 9.0;
            Vec2::new(90.0 - 40.0 * a.cos(), -80.0 + 40.0 * a.sin())
        })
        .collect();
    add(112, tags(&[("highway", "residential"), ("name", "Crescent")]), arc);

    add(113, tags(&[("highway", "service")]), pts(&[(-80.0, 0.0), (-60.0, 0.0), (-52.0, 4.0), (-50.0, 15.0)]));

    let mut ring: Vec<Vec2> = (0..12)
        .map(|i| {
            let a = std::f64::consts::TAU * i as f64 / 12.0;
            Vec2::new(65.0 + 12.0 * a.cos(), 55.0 + 12.0 * a.sin())
        })
        .collect();
    ring.push(ring[0]);
    add(114, tags(&[("highway", "service"), ("oneway", "yes"), ("junction", "roundabout")]), ring);
    add(115, tags(&[("highway", "residential")]), pts(&[(77.0, 55.0), (90.0, 55.0)]));
    add(116, tags(&[("highway", "residential"), ("name", "Diagonal")]), pts(&[(-30.0, 80.0), (0.0, 60.0), (20.0, 65.0), (40.0, 80.0)]));
    add(117, tags(&[("highway", "service")]), pts(&[(-30.0, -30.0), (-10.0, -45.0), (10.0, -50.0), (40.0, -80.0)]));
    add(118, tags(&[("highway", "residential"), ("lanes", "3")]), pts(&[(90.0, -40.0), (70.0, -20.0), (60.0, 0.0)]));
    add(119, tags(&[("highway", "footway")]), pts(&[(-80.0, -80.0), (-30.0, -30.0)]));
    add(120, tags(&[("highway", "cycleway")]), pts(&[(40.0, -30.0), (90.0, 30.0)]));
    ways
}

/// Desk fixture with the standard misalignment.
pub fn desk_fixture(seed: u64) -> Fixture {
    fixture(desk_ways(), desk_misalignment(), seed, 8500, 1500)
}

/// Builds a fixture from `ways` (true frame). The cloud gets `ground_points`
/// returns along the roads (one per equal-length stratum, placed at random
/// within it) and `clutter_points` returns 1-15 m above the terrain anywhere
/// on the grid.
pub fn fixture(ways: Vec<FixtureWay>, misalignment: RigidTransform2D, seed: u64, ground_points: usize, clutter_points: usize) -> Fixture {
    let frame = LocalFrame::new(ORIGIN_LAT, ORIGIN_LON);
    let half = DEM_SIZE as f64 * DEM_CELL / 2.0;
    let dem = Dem::from_fn(DEM_SIZE, DEM_SIZE, -half, -half, DEM_CELL, terrain_height);
    let ground = |p: Vec2| dem.sample_height(p.x, p.y).unwrap_or_else(|_| terrain_height(p.x, p.y));

    let mut osm = OsmExtract::default();
    let mut ids: HashMap<(i64, i64), i64> = HashMap::new();
    for w in &ways {
        let mut refs = Vec::with_capacity(w.points.len());
        for &p in &w.points {
            let key = ((p.x * 1000.0).round() as i64, (p.y * 1000.0).round() as i64);
            let next = ids.len() as i64 + 1;
            let id = *ids.entry(key).or_insert(next);
            osm.nodes.entry(id).or_insert_with(|| {
                let (lat, lon) = frame.unproject(misalignment.apply(p));
                OsmNode { id, lat, lon, tags: Tags::new() }
            });
            refs.push(id);
        }
        osm.ways.push(OsmWay { id: w.id, node_refs: refs, tags: w.tags.clone() });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let roads: Vec<&FixtureWay> = ways.iter().filter(|w| w.is_road()).collect();
    let lengths: Vec<f64> = roads.iter().map(|w| polyline_length(&w.points)).collect();
    let total: f64 = lengths.iter().sum();
    let mut points = Vec::with_capacity(ground_points + clutter_points);
    let stratum = total / ground_points as f64;
    for i in 0..ground_points {
        // one return per equal-length stratum, jittered within it
        let mut s = (i as f64 + rng.gen_range(0.0..1.0)) * stratum;
        let mut k = 0;
        while k + 1 < lengths.len() && s >= lengths[k] {
            s -= lengths[k];
            k += 1;
        }
        let way = roads[k];
        let p = point_at(&way.points, s);
        let z = if way.is_bridge() {
            let (a, b) = (ground(way.points[0]), ground(*way.points.last().unwrap()));
            a + (b - a) * s / lengths[k]
        } else {
            ground(p)
        };
        points.push(Point3::new(p.x, p.y, z + rng.gen_range(-0.05..0.05)));
    }
    for _ in 0..clutter_points {
        let p = Vec2::new(rng.gen_range(-half..half), rng.gen_range(-half..half));
        points.push(Point3::new(p.x, p.y, ground(p) + rng.gen_range(1.0..15.0)));
    }
    Fixture { frame, ways, misalignment, osm, dem, cloud: PointCloud::new(points) }
}

fn point_at(poly: &[Vec2], mut s: f64) -> Vec2 {
    for w in poly.windows(2) {
        let l = w[0].distance(w[1]);
        if s <= l {
            return w[0].lerp(w[1], s / l);
        }
        s -= l;
    }
    *poly.last().unwrap()
}

impl Fixture {
    /// Configuration matching the files written by [`Fixture::write`]:
    /// input paths, explicit frame origin and ICP settings suited to the
    /// misalignment.
    pub fn config_text(&self) -> String {
        format!(
            "# desk fixture\nosm = map.osm\ndem = dem.asc\ncloud = cloud.xyz\norigin_lat = {}\norigin_lon = {}\nicp.max_iterations = 200\nicp.convergence_tol = 1e-10\n\
             icp.max_correspondence_dist = 8\nicp.resample_step = 0.5\nfit_mode = arcfit\n",
            crate::geom::fmt_g17(self.frame.origin_lat),
            crate::geom::fmt_g17(self.frame.origin_lon)
        )
    }

    /// Writes `map.osm`, `dem.asc`, `cloud.xyz` and `twinmap.cfg` into `dir`.
    pub fn write(&self, dir: &Path) -> io::Result<FixtureFiles> {
        fs::create_dir_all(dir)?;
        let files = FixtureFiles {
            osm: dir.join("map.osm"),
            dem: dir.join("dem.asc"),
            cloud: dir.join("cloud.xyz"),
            config: dir.join("twinmap.cfg"),
        };
        fs::write(&files.osm, write_osm(&self.osm))?;
        fs::write(&files.dem, self.dem.to_asc())?;
        fs::write(&files.cloud, self.cloud.to_xyz())?;
        fs::write(&files.config, self.config_text())?;
        Ok(files)
    }
}
