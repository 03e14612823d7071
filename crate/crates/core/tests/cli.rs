use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use twinmap::geom::Vec2;
use twinmap::odr::{serialize, ElevPoly, Geometry, GeometryKind, LaneSection, LaneType, OdrMap, Road};
use twinmap::registration::RigidTransform2D;
use twinmap::synth::{desk_fixture, fixture, Fixture, FixtureWay};

fn twinmap(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twinmap")).args(args).current_dir(dir).env_remove("TWINMAP_THREADS").output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn way(id: i64, tags: &[(&str, &str)], points: &[(f64, f64)]) -> FixtureWay {
    FixtureWay {
        id,
        tags: tags.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        points: points.iter().map(|&(x, y)| Vec2::new(x, y)).collect(),
    }
}

fn small(ways: Vec<FixtureWay>) -> Fixture {
    fixture(ways, RigidTransform2D::IDENTITY, 3, 3000, 300)
}

fn five_roads() -> Vec<FixtureWay> {
    vec![
        way(1, &[("highway", "primary")], &[(-80.0, -60.0), (0.0, -60.0), (80.0, -60.0)]),
        way(2, &[("highway", "residential")], &[(-80.0, 60.0), (80.0, 60.0)]),
        way(3, &[("highway", "secondary"), ("sidewalk", "both")], &[(-60.0, -90.0), (-60.0, 90.0)]),
        way(4, &[("highway", "service")], &[(20.0, 0.0), (50.0, 10.0), (70.0, 30.0)]),
        way(5, &[("highway", "residential"), ("oneway", "yes")], &[(-20.0, 10.0), (-20.0, 40.0)]),
    ]
}

fn report_value(dir: &Path, key: &str) -> f64 {
    let text = fs::read_to_string(dir.join("out/finetune_report.txt")).unwrap();
    text.lines().find_map(|l| l.strip_prefix(key).map(|v| v.trim().parse().unwrap())).unwrap()
}

fn obj_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect()
}

#[test]
fn help_exits_zero_everywhere() {
    let tmp = tempfile::tempdir().unwrap();
    for sub in [&[][..], &["finetune"], &["convert"], &["mesh"], &["validate"], &["run"]] {
        let mut args = sub.to_vec();
        args.push("--help");
        let o = twinmap(tmp.path(), &args);
        assert_eq!(o.status.code(), Some(0), "{args:?}");
        assert!(stdout(&o).contains("Usage"));
    }
    assert_eq!(twinmap(tmp.path(), &["--version"]).status.code(), Some(0));
    assert_eq!(twinmap(tmp.path(), &[]).status.code(), Some(1));
    assert_eq!(twinmap(tmp.path(), &["convert", "--workers", "many"]).status.code(), Some(1));
}

#[test]
fn finetune_on_aligned_fixture_reports_identity() {
    let tmp = tempfile::tempdir().unwrap();
    let f = fixture(twinmap::synth::desk_ways(), RigidTransform2D::IDENTITY, 11, 8500, 1500);
    f.write(tmp.path()).unwrap();
    let o = twinmap(tmp.path(), &["finetune", "--config", "twinmap.cfg", "--out", "out"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(report_value(tmp.path(), "theta").abs() < 1e-3);
    // translation noise of the synthetic evidence is a few millimeters
    for key in ["tx", "ty"] {
        assert!(report_value(tmp.path(), key).abs() < 1e-2, "{key}");
    }
    let graph = fs::read_to_string(tmp.path().join("out/graph.twg")).unwrap();
    assert!(graph.contains("104_0"));
}

#[test]
fn finetune_input_errors() {
    let tmp = tempfile::tempdir().unwrap();
    desk_fixture(1).write(tmp.path()).unwrap();
    let o = twinmap(tmp.path(), &["finetune", "--config", "twinmap.cfg", "--cloud", "nope.xyz"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nope.xyz"));
    let o = twinmap(tmp.path(), &["finetune", "--osm", "map.osm"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--cloud"));
}

#[test]
fn far_away_cloud_is_no_overlap() {
    let tmp = tempfile::tempdir().unwrap();
    let f = desk_fixture(1);
    f.write(tmp.path()).unwrap();
    let moved: String = f.cloud.points.iter().map(|p| format!("{} {} {}\n", p.x + 5000.0, p.y, p.z)).collect();
    fs::write(tmp.path().join("far.xyz"), moved).unwrap();
    // ground derived from the cloud itself
    let o = twinmap(tmp.path(), &["finetune", "--osm", "map.osm", "--cloud", "far.xyz", "--origin-lat", "37.8715", "--origin-lon", "-122.273"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    // ground from the DEM, which the cloud does not touch
    let o = twinmap(tmp.path(), &["finetune", "--config", "twinmap.cfg", "--cloud", "far.xyz"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn convert_minimal_and_adjusted_graph() {
    let tmp = tempfile::tempdir().unwrap();
    small(five_roads()).write(tmp.path()).unwrap();
    let o = twinmap(tmp.path(), &["convert", "--config", "twinmap.cfg", "--out", "plain"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("0 errors"));
    let xodr = fs::read_to_string(tmp.path().join("plain/map.xodr")).unwrap();
    assert!(xodr.contains("<OpenDRIVE>") && xodr.contains("revMinor=\"4\""));

    assert_eq!(twinmap(tmp.path(), &["finetune", "--config", "twinmap.cfg", "--out", "out"]).status.code(), Some(0));
    let o = twinmap(tmp.path(), &["convert", "--config", "twinmap.cfg", "--out", "out"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("adjusted graph"));
}

#[test]
fn unmapped_class_names_class_and_edge() {
    let tmp = tempfile::tempdir().unwrap();
    let mut ways = five_roads();
    ways.push(way(9, &[("highway", "raceway")], &[(0.0, -20.0), (40.0, -20.0)]));
    small(ways).write(tmp.path()).unwrap();
    let o = twinmap(tmp.path(), &["convert", "--config", "twinmap.cfg", "--out", "out"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("raceway") && err.contains("9_0"), "{err}");
    assert!(!tmp.path().join("out/map.xodr").exists());

    // a class rule in the config maps it
    let cfg = fs::read_to_string(tmp.path().join("twinmap.cfg")).unwrap() + "class.raceway.width = 5\n";
    fs::write(tmp.path().join("race.cfg"), cfg).unwrap();
    assert_eq!(twinmap(tmp.path(), &["convert", "--config", "race.cfg", "--out", "out"]).status.code(), Some(0));
}

#[test]
fn clearance_violation_is_a_warning() {
    let tmp = tempfile::tempdir().unwrap();
    let ways = vec![
        way(1, &[("highway", "residential")], &[(-40.0, -100.0), (-40.0, -40.0)]),
        // a deck at ground level over the road
        way(2, &[("highway", "primary"), ("bridge", "yes")], &[(-70.0, -70.0), (-10.0, -70.0)]),
    ];
    small(ways).write(tmp.path()).unwrap();
    let o = twinmap(tmp.path(), &["convert", "--config", "twinmap.cfg", "--out", "out"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let err = stderr(&o);
    assert!(err.contains("warning: clearance") && err.contains("2_0") && err.contains("1_0"), "{err}");
}

#[test]
fn mesh_counts_determinism_and_errors() {
    let tmp = tempfile::tempdir().unwrap();
    small(five_roads()).write(tmp.path()).unwrap();
    assert_eq!(twinmap(tmp.path(), &["convert", "--config", "twinmap.cfg", "--fit-mode", "polyline", "--out", "m"]).status.code(), Some(0));
    let roads = fs::read_to_string(tmp.path().join("m/map.xodr")).unwrap().matches("<road ").count();
    assert_eq!(roads, 5);

    for w in ["1", "4"] {
        let o = twinmap(tmp.path(), &["mesh", "--config", "twinmap.cfg", "--xodr", "m/map.xodr", "--workers", w, "--out", &format!("w{w}")]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert!(stdout(&o).contains("mesh: 6 files"));
        assert!(stdout(&o).contains("road_1_0:"));
    }
    let one = obj_files(&tmp.path().join("w1/meshes"));
    assert_eq!(one.len(), 7);
    assert_eq!(one.keys().filter(|k| k.ends_with(".obj")).count(), 6);
    assert!(one.contains_key("terrain.obj") && one.contains_key("twinmap.mtl"));
    assert_eq!(one, obj_files(&tmp.path().join("w4/meshes")));

    // TWINMAP_THREADS is honored and a bad value is a usage error
    let env = |v: &str| {
        Command::new(env!("CARGO_BIN_EXE_twinmap"))
            .args(["mesh", "--config", "twinmap.cfg", "--xodr", "m/map.xodr", "--out", "env"])
            .current_dir(tmp.path())
            .env("TWINMAP_THREADS", v)
            .output()
            .unwrap()
    };
    assert!(stdout(&env("3")).contains("with 3 workers"));
    assert_eq!(env("zero").status.code(), Some(1));

    let o = twinmap(tmp.path(), &["mesh", "--xodr", "m/map.xodr"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("DEM"));
    fs::write(tmp.path().join("bad.xodr"), "<OpenDRIVE><road").unwrap();
    assert_eq!(twinmap(tmp.path(), &["mesh", "--config", "twinmap.cfg", "--xodr", "bad.xodr"]).status.code(), Some(1));
}

fn gap_map() -> OdrMap {
    let g = |s: f64, x: f64| Geometry { s, x, y: 0.0, hdg: 0.0, length: 10.0, kind: GeometryKind::Line };
    let mut m = OdrMap::new("gap");
    m.roads.push(
        Road::new("g", vec![g(0.0, 0.0), g(10.0, 12.0)])
            .with_elevation(vec![ElevPoly::constant(0.0, 1.0)])
            .with_lane_section(LaneSection::symmetric(&[(LaneType::Driving, 3.0)], &[(LaneType::Driving, 3.0)])),
    );
    m
}

#[test]
fn validate_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("gap.xodr"), serialize(&gap_map())).unwrap();
    let o = twinmap(tmp.path(), &["validate", "gap.xodr"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("C0Gap"), "{}", stdout(&o));

    let mut clean = gap_map();
    clean.roads[0].plan_view[1].x = 10.0;
    fs::write(tmp.path().join("clean.xodr"), serialize(&clean)).unwrap();
    assert_eq!(twinmap(tmp.path(), &["validate", "--xodr", "clean.xodr"]).status.code(), Some(0));
    assert_eq!(twinmap(tmp.path(), &["validate", "missing.xodr"]).status.code(), Some(1));
    assert_eq!(twinmap(tmp.path(), &["validate"]).status.code(), Some(1));
}

#[test]
fn config_errors_are_usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("a.cfg"), "dem = x.asc\nicp.max_iteratons = 3\n").unwrap();
    let o = twinmap(tmp.path(), &["run", "--config", "a.cfg"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("icp.max_iteratons"));
    fs::write(tmp.path().join("b.cfg"), "arc_tolerance = -1\n").unwrap();
    assert_eq!(twinmap(tmp.path(), &["convert", "--config", "b.cfg"]).status.code(), Some(1));
    assert_eq!(twinmap(tmp.path(), &["convert", "--config", "none.cfg"]).status.code(), Some(1));
}

#[test]
fn run_writes_every_stage() {
    let tmp = tempfile::tempdir().unwrap();
    desk_fixture(4).write(tmp.path()).unwrap();
    let o = twinmap(tmp.path(), &["run", "--config", "twinmap.cfg", "--workers", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["out/graph.twg", "out/finetune_report.txt", "out/map.xodr", "out/meshes/terrain.obj", "out/meshes/road_104_0.obj"] {
        assert!(tmp.path().join(f).is_file(), "{f}");
    }
}
