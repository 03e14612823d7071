//! Writes the synthetic desk fixture to a directory and runs the full
//! pipeline on it.
//!
//!     cargo run --release --example end_to_end -- [out_dir] [seed]

use std::path::PathBuf;

use twinmap::cli;
use twinmap::synth::desk_fixture;

fn main() {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "twinmap_demo".into()));
    let seed: u64 = args.next().map_or(7, |s| s.parse().expect("seed"));

    let fixture = desk_fixture(seed);
    let files = fixture.write(&dir).expect("write fixture");
    println!("fixture written to {}", dir.display());

    let m = fixture.misalignment;
    println!("planted misalignment: theta {:.6} rad, t ({:.3}, {:.3}) m", m.theta, m.tx, m.ty);

    let code = cli::run([
        "twinmap".into(),
        "run".into(),
        "--config".into(),
        files.config.into_os_string(),
        "--out".into(),
        dir.join("out").into_os_string(),
    ]);
    std::process::exit(code);
}
