//! Derives a ground DEM from a LiDAR-like cloud (ground returns plus
//! vegetation and clutter above them) and compares it with the true terrain.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twinmap::synth::terrain_height;
use twinmap::terrain::{load_dem, rasterize_ground, Point3, PointCloud, DEFAULT_GROUND_PERCENTILE};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut points = Vec::new();
    for _ in 0..60_000 {
        let (x, y) = (rng.gen_range(-100.0..100.0), rng.gen_range(-100.0..100.0));
        let ground = terrain_height(x, y) + rng.gen_range(-0.05..0.05);
        // one return in four comes off something above the ground
        let z = if rng.gen_bool(0.25) { ground + rng.gen_range(0.5..15.0) } else { ground };
        points.push(Point3::new(x, y, z));
    }
    let cloud = PointCloud::new(points);

    for cell in [1.0, 2.0, 4.0] {
        let ground = rasterize_ground(&cloud, cell, DEFAULT_GROUND_PERCENTILE).expect("rasterize");
        let mut dz = Vec::new();
        for row in 0..ground.nrows {
            for col in 0..ground.ncols {
                let z = ground.get(row, col);
                if !ground.is_nodata(z) {
                    let p = ground.cell_center(row, col);
                    dz.push((z - terrain_height(p.x, p.y)).abs());
                }
            }
        }
        dz.sort_by(f64::total_cmp);
        let within = dz.iter().filter(|&&d| d <= 0.25).count();
        println!(
            "cell {cell} m: {}x{} raster, {} filled, median |dz| {:.3} m, {:.1}% within 0.25 m",
            ground.ncols,
            ground.nrows,
            dz.len(),
            dz[dz.len() / 2],
            100.0 * within as f64 / dz.len() as f64
        );
        if cell == 2.0 {
            let text = ground.to_asc();
            println!("  ESRI ASCII round trip: {} bytes, identical = {}", text.len(), load_dem(&text).unwrap() == ground);
        }
    }
}
