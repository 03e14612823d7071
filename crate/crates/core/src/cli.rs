//! Pipeline driver behind the `twinmap` binary.
//!
//! Every stage reads its inputs from files and writes its outputs under
//! `--out`, so stages can be run separately or all at once with `run`.
//! Settings come from a flat `key = value` file (`--config`) with command-line
//! flags taking precedence; `TWINMAP_THREADS` sits between the two for the
//! worker count.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::config::{ConfigError, KeyValues};
use crate::converter::{check_clearance, convert, ConversionConfig, FitMode};
use crate::geo::{build_road_graph, parse_osm, read_graph, road_centroid_frame, write_graph, LocalFrame, RoadFilter, RoadGraph};
use crate::geom::fmt_g17;
use crate::meshgen::{export_obj, generate_all, TessellationParams};
use crate::odr::{deserialize_with_warnings, has_errors, serialize, validate, OdrMap, Severity};
use crate::registration::{fine_tune_graph, IcpParams, IcpReport, RegistrationError};
use crate::terrain::{load_dem, load_xyz, rasterize_ground, Dem, PointCloud, DEFAULT_GROUND_CELL, DEFAULT_GROUND_PERCENTILE};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NO_OVERLAP: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;

pub const THREADS_ENV: &str = "TWINMAP_THREADS";
pub const GRAPH_FILE: &str = "graph.twg";
pub const REPORT_FILE: &str = "finetune_report.txt";
pub const XODR_FILE: &str = "map.xodr";
pub const MESH_DIR: &str = "meshes";

#[derive(Debug, Parser)]
#[command(name = "twinmap", version, about = "OSM + LiDAR/DEM to OpenDRIVE 1.4 and OBJ meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Align OSM centerlines to LiDAR ground returns; writes graph.twg and finetune_report.txt
    Finetune(Flags),
    /// Convert a road graph (OSM or graph.twg) plus DEM to map.xodr
    Convert(Flags),
    /// Tessellate an .xodr and the DEM into OBJ meshes under meshes/
    Mesh(Flags),
    /// Check an .xodr file and print the findings
    Validate {
        /// File to check (alternative to --xodr)
        path: Option<PathBuf>,
        #[command(flatten)]
        flags: Flags,
    },
    /// finetune, convert and mesh in sequence
    Run(Flags),
}

#[derive(Debug, Clone, Default, Args)]
struct Flags {
    /// OSM XML extract
    #[arg(long)]
    osm: Option<PathBuf>,
    /// ESRI ASCII elevation grid in the local frame
    #[arg(long)]
    dem: Option<PathBuf>,
    /// XYZ point cloud in the local frame
    #[arg(long)]
    cloud: Option<PathBuf>,
    /// OpenDRIVE file
    #[arg(long)]
    xodr: Option<PathBuf>,
    /// Adjusted road graph written by `finetune`
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// key = value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads
    #[arg(long)]
    workers: Option<usize>,
    /// Local frame origin latitude (default: centroid of road nodes)
    #[arg(long, allow_hyphen_values = true)]
    origin_lat: Option<f64>,
    /// Local frame origin longitude
    #[arg(long, allow_hyphen_values = true)]
    origin_lon: Option<f64>,
    /// Plan-view fitting: polyline or arcfit
    #[arg(long)]
    fit_mode: Option<FitMode>,
}

/// Stage failure with the process exit code it maps to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError { code: EXIT_INPUT, message: message.into() }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::input(e.to_string())
    }
}

/// Everything a pipeline stage needs.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub osm: Option<PathBuf>,
    pub dem: Option<PathBuf>,
    pub cloud: Option<PathBuf>,
    pub xodr: Option<PathBuf>,
    pub graph: Option<PathBuf>,
    pub out: PathBuf,
    pub origin: Option<(f64, f64)>,
    pub icp: IcpParams,
    pub conversion: ConversionConfig,
    pub tessellation: TessellationParams,
    pub workers: usize,
    pub ground_cell: f64,
    pub ground_percentile: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            osm: None,
            dem: None,
            cloud: None,
            xodr: None,
            graph: None,
            out: PathBuf::from("out"),
            origin: None,
            icp: IcpParams::default(),
            conversion: ConversionConfig::default(),
            tessellation: TessellationParams::default(),
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            ground_cell: DEFAULT_GROUND_CELL,
            ground_percentile: DEFAULT_GROUND_PERCENTILE,
        }
    }
}

const PIPELINE_KEYS: [&str; 17] = [
    "osm",
    "dem",
    "cloud",
    "xodr",
    "graph",
    "out",
    "workers",
    "origin_lat",
    "origin_lon",
    "icp.max_iterations",
    "icp.convergence_tol",
    "icp.max_correspondence_dist",
    "icp.resample_step",
    "mesh.ds",
    "mesh.terrain_skirt",
    "ground.cell_size",
    "ground.percentile",
];

impl PipelineConfig {
    /// Applies a configuration file. Relative paths resolve against `base`.
    pub fn apply(&mut self, kv: &KeyValues, base: &Path) -> Result<(), ConfigError> {
        kv.reject_unknown(|k| PIPELINE_KEYS.contains(&k) || ConversionConfig::accepts_key(k))?;
        let path = |key: &str| kv.get(key).map(|v| base.join(v));
        self.osm = path("osm").or(self.osm.take());
        self.dem = path("dem").or(self.dem.take());
        self.cloud = path("cloud").or(self.cloud.take());
        self.xodr = path("xodr").or(self.xodr.take());
        self.graph = path("graph").or(self.graph.take());
        if let Some(out) = path("out") {
            self.out = out;
        }
        kv.set("workers", &mut self.workers)?;
        match (kv.parsed::<f64>("origin_lat")?, kv.parsed::<f64>("origin_lon")?) {
            (Some(lat), Some(lon)) => self.origin = Some((lat, lon)),
            (None, None) => {}
            _ => return Err(kv.value_error("origin_lat", "origin_lat and origin_lon must be given together")),
        }
        kv.set("icp.max_iterations", &mut self.icp.max_iterations)?;
        kv.set("icp.convergence_tol", &mut self.icp.convergence_tol)?;
        kv.set("icp.max_correspondence_dist", &mut self.icp.max_correspondence_dist)?;
        kv.set("icp.resample_step", &mut self.icp.resample_step)?;
        kv.set("mesh.ds", &mut self.tessellation.ds)?;
        kv.set("mesh.terrain_skirt", &mut self.tessellation.terrain_skirt)?;
        kv.set("ground.cell_size", &mut self.ground_cell)?;
        kv.set("ground.percentile", &mut self.ground_percentile)?;
        self.conversion.apply(kv)
    }

    /// Config file, then `TWINMAP_THREADS`, then flags.
    fn resolve(flags: &Flags, threads_env: Option<String>) -> Result<Self, CliError> {
        let mut cfg = PipelineConfig::default();
        if let Some(path) = &flags.config {
            let text = fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read config {}: {e}", path.display())))?;
            let kv = KeyValues::parse(&text)?;
            cfg.apply(&kv, path.parent().unwrap_or(Path::new(".")))?;
        }
        if let Some(raw) = threads_env.filter(|s| !s.trim().is_empty()) {
            cfg.workers = raw
                .trim()
                .parse()
                .map_err(|_| CliError::input(format!("{THREADS_ENV}={raw:?} is not a thread count")))?;
        }
        let f = flags.clone();
        cfg.osm = f.osm.or(cfg.osm);
        cfg.dem = f.dem.or(cfg.dem);
        cfg.cloud = f.cloud.or(cfg.cloud);
        cfg.xodr = f.xodr.or(cfg.xodr);
        cfg.graph = f.graph.or(cfg.graph);
        cfg.out = f.out.unwrap_or(cfg.out);
        cfg.workers = f.workers.unwrap_or(cfg.workers);
        match (f.origin_lat, f.origin_lon) {
            (Some(lat), Some(lon)) => cfg.origin = Some((lat, lon)),
            (None, None) => {}
            _ => return Err(CliError::input("--origin-lat and --origin-lon must be given together")),
        }
        if let Some(mode) = f.fit_mode {
            cfg.conversion.fit_mode = mode;
        }
        if cfg.workers < 1 {
            return Err(CliError::input("worker count must be at least 1"));
        }
        Ok(cfg)
    }

    fn pool(&self) -> Result<rayon::ThreadPool, CliError> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| CliError::input(format!("cannot start {} workers: {e}", self.workers)))
    }
}

fn require<'a>(path: &'a Option<PathBuf>, what: &str, flag: &str) -> Result<&'a Path, CliError> {
    path.as_deref().ok_or_else(|| CliError::input(format!("missing {what}: pass --{flag} or set `{flag}` in the config")))
}

fn read(path: &Path, what: &str) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read {what} {}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::input(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
}

fn load_dem_file(cfg: &PipelineConfig) -> Result<Dem, CliError> {
    let path = require(&cfg.dem, "DEM", "dem")?;
    load_dem(&read(path, "DEM")?).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

/// Road graph from the OSM extract, in the configured or centroid frame.
pub fn load_osm_graph(cfg: &PipelineConfig) -> Result<RoadGraph, CliError> {
    let path = require(&cfg.osm, "OSM extract", "osm")?;
    let extract = parse_osm(&read(path, "OSM extract")?).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let filter = RoadFilter::default();
    let frame = match cfg.origin {
        Some((lat, lon)) => LocalFrame::new(lat, lon),
        None => road_centroid_frame(&extract, &filter).ok_or_else(|| CliError::input("OSM extract has no road ways"))?,
    };
    let graph = build_road_graph(&extract, Some(frame), &filter);
    if graph.is_empty() {
        return Err(CliError::input(format!("{}: no road edges after filtering", path.display())));
    }
    Ok(graph)
}

/// Text report of an ICP run; identical for any worker count.
pub fn finetune_report(report: &IcpReport) -> String {
    let t = report.transform;
    let mut out = String::new();
    let _ = writeln!(out, "converged {}", report.converged);
    let _ = writeln!(out, "iterations {}", report.iterations);
    let _ = writeln!(out, "theta {}", fmt_g17(t.theta));
    let _ = writeln!(out, "tx {}", fmt_g17(t.tx));
    let _ = writeln!(out, "ty {}", fmt_g17(t.ty));
    let _ = writeln!(out, "final_rms {}", fmt_g17(report.final_rms()));
    let _ = writeln!(out, "# iteration correspondences rms_before rms_after");
    for (i, s) in report.steps.iter().enumerate() {
        let _ = writeln!(out, "{} {} {} {}", i + 1, s.correspondences, fmt_g17(s.rms_before), fmt_g17(s.rms_after));
    }
    out
}

/// Fine-tunes the OSM graph against the cloud and writes the graph and report.
pub fn cmd_finetune(cfg: &PipelineConfig) -> Result<(RoadGraph, IcpReport), CliError> {
    let graph = load_osm_graph(cfg)?;
    let cloud_path = require(&cfg.cloud, "point cloud", "cloud")?;
    let cloud: PointCloud =
        load_xyz(&read(cloud_path, "point cloud")?).map_err(|e| CliError::input(format!("{}: {e}", cloud_path.display())))?;
    let terrain = match &cfg.dem {
        Some(_) => load_dem_file(cfg)?,
        None => rasterize_ground(&cloud, cfg.ground_cell, cfg.ground_percentile)
            .map_err(|e| CliError::input(format!("cannot derive ground from the cloud: {e}")))?,
    };
    let pool = cfg.pool()?;
    let (moved, report) = pool.install(|| fine_tune_graph(&graph, &cloud, &terrain, &cfg.icp)).map_err(|e| match e {
        RegistrationError::NoOverlap { .. } => CliError { code: EXIT_NO_OVERLAP, message: e.to_string() },
        other => CliError::input(other.to_string()),
    })?;
    write(&cfg.out.join(GRAPH_FILE), &write_graph(&moved))?;
    write(&cfg.out.join(REPORT_FILE), &finetune_report(&report))?;
    let t = report.transform;
    println!(
        "finetune: {} iterations, rms {:.4} m, theta {:.6} rad, t ({:.4}, {:.4}) m",
        report.iterations,
        report.final_rms(),
        t.theta,
        t.tx,
        t.ty
    );
    if !report.converged {
        eprintln!("warning: ICP did not converge within {} iterations", cfg.icp.max_iterations);
    }
    Ok((moved, report))
}

fn print_issues(map: &OdrMap) -> bool {
    let issues = validate(map);
    for i in &issues {
        println!("{i}");
    }
    let errors = issues.iter().filter(|i| i.severity == Severity::Error).count();
    println!("validate: {} roads, {errors} errors, {} warnings", map.roads.len(), issues.len() - errors);
    has_errors(&issues)
}

/// Converts `graph` and writes map.xodr. Without one, the graph is read from
/// `--graph`, else from `<out>/graph.twg` left by `finetune`, else built from
/// the OSM extract. Returns the map and whether it validated without errors.
pub fn cmd_convert(cfg: &PipelineConfig, graph: Option<RoadGraph>) -> Result<(OdrMap, bool), CliError> {
    let adjusted = cfg.graph.clone().or_else(|| Some(cfg.out.join(GRAPH_FILE)).filter(|p| p.is_file()));
    let graph = match (graph, adjusted) {
        (Some(g), _) => g,
        (None, Some(path)) => {
            println!("convert: using adjusted graph {}", path.display());
            read_graph(&read(&path, "road graph")?).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?
        }
        (None, None) => load_osm_graph(cfg)?,
    };
    let dem = load_dem_file(cfg)?;
    let pool = cfg.pool()?;
    let map = pool.install(|| convert(&graph, &dem, &cfg.conversion)).map_err(|e| {
        let ids = e.edge_ids();
        let mut msg = e.to_string();
        if !ids.is_empty() {
            msg = format!("{msg}\noffending edges: {}", ids.join(", "));
        }
        CliError::input(msg)
    })?;
    write(&cfg.out.join(XODR_FILE), &serialize(&map))?;
    println!("convert: {} roads written to {}", map.roads.len(), cfg.out.join(XODR_FILE).display());
    for c in check_clearance(&map, &graph, &cfg.conversion) {
        eprintln!("warning: clearance: {c} (minimum {} m)", cfg.conversion.bridge_clearance_min);
    }
    let clean = !print_issues(&map);
    Ok((map, clean))
}

fn load_xodr(path: &Path) -> Result<OdrMap, CliError> {
    let parsed = deserialize_with_warnings(&read(path, "OpenDRIVE file")?).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    for w in &parsed.warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    Ok(parsed.map)
}

/// Tessellates the map (given or read from the configured .xodr) into
/// `<out>/meshes`. Returns whether every mesh was produced.
pub fn cmd_mesh(cfg: &PipelineConfig, map: Option<OdrMap>) -> Result<bool, CliError> {
    let map = match map {
        Some(m) => m,
        None => load_xodr(require(&cfg.xodr, "OpenDRIVE file", "xodr")?)?,
    };
    let dem = load_dem_file(cfg)?;
    let t0 = Instant::now();
    let set = generate_all(&map, &dem, &cfg.tessellation, cfg.workers).map_err(|e| CliError::input(e.to_string()))?;
    let dir = cfg.out.join(MESH_DIR);
    let reports = export_obj(&set.meshes, &dir).map_err(|e| CliError::input(format!("cannot write meshes to {}: {e}", dir.display())))?;
    for r in &reports {
        let ms = set.timings.iter().find(|(n, _)| *n == r.name).map_or(0.0, |(_, dt)| dt.as_secs_f64() * 1e3);
        println!("  {}: {} vertices, {} faces, {ms:.3} ms", r.name, r.vertices, r.faces);
    }
    for f in &set.failures {
        eprintln!("error: {f}");
    }
    let faces: usize = reports.iter().map(|r| r.faces).sum();
    println!(
        "mesh: {} files, {faces} triangles in {:.3} s with {} workers",
        reports.len(),
        t0.elapsed().as_secs_f64(),
        cfg.workers
    );
    Ok(set.failures.is_empty())
}

/// Validates an .xodr file; `Ok(true)` when it has no errors.
pub fn cmd_validate(path: &Path) -> Result<bool, CliError> {
    let map = load_xodr(path)?;
    Ok(!print_issues(&map))
}

fn dispatch(command: Command, threads_env: Option<String>) -> Result<i32, CliError> {
    let validation_code = |clean: bool| if clean { EXIT_OK } else { EXIT_VALIDATION };
    match command {
        Command::Finetune(flags) => {
            cmd_finetune(&PipelineConfig::resolve(&flags, threads_env)?)?;
            Ok(EXIT_OK)
        }
        Command::Convert(flags) => {
            let cfg = PipelineConfig::resolve(&flags, threads_env)?;
            Ok(validation_code(cmd_convert(&cfg, None)?.1))
        }
        Command::Mesh(flags) => {
            let cfg = PipelineConfig::resolve(&flags, threads_env)?;
            Ok(validation_code(cmd_mesh(&cfg, None)?))
        }
        Command::Validate { path, flags } => {
            let cfg = PipelineConfig::resolve(&flags, threads_env)?;
            let path = path.or(cfg.xodr).ok_or_else(|| CliError::input("missing OpenDRIVE file to validate"))?;
            Ok(validation_code(cmd_validate(&path)?))
        }
        Command::Run(flags) => {
            let cfg = PipelineConfig::resolve(&flags, threads_env)?;
            let (graph, _) = cmd_finetune(&cfg)?;
            let (map, clean) = cmd_convert(&cfg, Some(graph))?;
            if !clean {
                return Ok(EXIT_VALIDATION);
            }
            Ok(validation_code(cmd_mesh(&cfg, Some(map))?))
        }
    }
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match dispatch(cli.command, std::env::var(THREADS_ENV).ok()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
