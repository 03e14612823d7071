use super::{Dem, PointCloud, TerrainError};

/// Default ground percentile and cell size.
pub const DEFAULT_GROUND_PERCENTILE: f64 = 0.05;
pub const DEFAULT_GROUND_CELL: f64 = 1.0;

const NODATA: f64 = -9999.0;

/// 1-based nearest-rank index `ceil(p * n)`, at least 1.
pub fn nearest_rank(p: f64, n: usize) -> usize {
    // the epsilon absorbs representation error in p (0.3 * 10 = 3.0000000000000004)
    let k = (p * n as f64 - 1e-9).ceil();
    (k.max(1.0) as usize).min(n)
}

/// Rasterizes a cloud into a ground DEM covering its bounding box.
///
/// Each occupied cell takes the nearest-rank `percentile` of its point heights.
/// Empty cells copy the nearest occupied cell (Euclidean distance in cell
/// units; ties go to the smaller row, then the smaller column).
pub fn rasterize_ground(cloud: &PointCloud, cell_size: f64, percentile: f64) -> Result<Dem, TerrainError> {
    if cloud.is_empty() {
        return Err(TerrainError::Precondition("cannot rasterize an empty point cloud".into()));
    }
    if !(cell_size > 0.0) {
        return Err(TerrainError::Precondition(format!("cell size must be > 0, got {cell_size}")));
    }
    if !(0.0..=1.0).contains(&percentile) {
        return Err(TerrainError::Precondition(format!("percentile must lie in [0, 1], got {percentile}")));
    }

    let (mut minx, mut miny, mut maxx, mut maxy) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in &cloud.points {
        minx = minx.min(p.x);
        miny = miny.min(p.y);
        maxx = maxx.max(p.x);
        maxy = maxy.max(p.y);
    }
    let ncols = ((maxx - minx) / cell_size).floor() as usize + 1;
    let nrows = ((maxy - miny) / cell_size).floor() as usize + 1;

    let mut buckets: Vec<Vec<f64>> = vec![Vec::new(); ncols * nrows];
    for p in &cloud.points {
        let col = (((p.x - minx) / cell_size).floor() as usize).min(ncols - 1);
        let from_bottom = (((p.y - miny) / cell_size).floor() as usize).min(nrows - 1);
        buckets[(nrows - 1 - from_bottom) * ncols + col].push(p.z);
    }

    let mut values: Vec<f64> = buckets
        .iter_mut()
        .map(|zs| {
            if zs.is_empty() {
                NODATA
            } else {
                zs.sort_by(f64::total_cmp);
                zs[nearest_rank(percentile, zs.len()) - 1]
            }
        })
        .collect();

    let occupied: Vec<bool> = buckets.iter().map(|b| !b.is_empty()).collect();
    fill_nearest(&mut values, &occupied, ncols, nrows);
    Dem::new(ncols, nrows, minx, miny, cell_size, NODATA, values)
}

/// Ring search outward from each empty cell. A hit at Chebyshev radius r has
/// Euclidean distance >= r, so rings continue until r^2 exceeds the best
/// squared distance found.
fn fill_nearest(values: &mut [f64], occupied: &[bool], ncols: usize, nrows: usize) {
    let source = values.to_vec();
    let max_r = ncols.max(nrows) as i64;
    for row in 0..nrows as i64 {
        for col in 0..ncols as i64 {
            if occupied[(row as usize) * ncols + col as usize] {
                continue;
            }
            let mut best: Option<(i64, i64, i64)> = None; // (d2, row, col)
            for r in 1..=max_r {
                if let Some((d2, _, _)) = best {
                    if r * r > d2 {
                        break;
                    }
                }
                for (rr, cc) in ring(row, col, r) {
                    if rr < 0 || cc < 0 || rr >= nrows as i64 || cc >= ncols as i64 {
                        continue;
                    }
                    if !occupied[(rr as usize) * ncols + cc as usize] {
                        continue;
                    }
                    let cand = ((rr - row).pow(2) + (cc - col).pow(2), rr, cc);
                    if best.is_none_or(|b| cand < b) {
                        best = Some(cand);
                    }
                }
            }
            if let Some((_, rr, cc)) = best {
                values[(row as usize) * ncols + col as usize] = source[(rr as usize) * ncols + cc as usize];
            }
        }
    }
}

fn ring(row: i64, col: i64, r: i64) -> impl Iterator<Item = (i64, i64)> {
    (-r..=r).flat_map(move |dr| {
        let cols: Vec<i64> = if dr.abs() == r { (-r..=r).collect() } else { vec![-r, r] };
        cols.into_iter().map(move |dc| (row + dr, col + dc))
    })
}
