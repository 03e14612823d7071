use std::fmt::Write;

use super::TerrainError;
use crate::geom::{fmt_g17, Vec2};

/// Regular elevation grid in the ESRI ASCII layout: row-major, row 0 is the
/// northernmost row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dem {
    pub ncols: usize,
    pub nrows: usize,
    /// Lower-left corner of the grid (not of the first cell center).
    pub xll: f64,
    pub yll: f64,
    pub cell_size: f64,
    pub nodata: f64,
    pub values: Vec<f64>,
}

/// Axis-aligned rectangle in the local frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: Vec2,
    pub max: Vec2,
}

impl Rect {
    pub fn new(min: Vec2, max: Vec2) -> Self {
        Rect { min, max }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn expand(&self, margin: f64) -> Rect {
        Rect::new(self.min - Vec2::new(margin, margin), self.max + Vec2::new(margin, margin))
    }

    pub fn intersect(&self, other: &Rect) -> Option<Rect> {
        let r = Rect::new(
            Vec2::new(self.min.x.max(other.min.x), self.min.y.max(other.min.y)),
            Vec2::new(self.max.x.min(other.max.x), self.max.y.min(other.max.y)),
        );
        (r.min.x <= r.max.x && r.min.y <= r.max.y).then_some(r)
    }

    pub fn bounding(points: impl IntoIterator<Item = Vec2>) -> Option<Rect> {
        let mut it = points.into_iter();
        let first = it.next()?;
        Some(it.fold(Rect::new(first, first), |r, p| {
            Rect::new(
                Vec2::new(r.min.x.min(p.x), r.min.y.min(p.y)),
                Vec2::new(r.max.x.max(p.x), r.max.y.max(p.y)),
            )
        }))
    }
}

/// Snap distance (in cell units) for treating a query as lying on a cell center line.
const SNAP: f64 = 1e-9;

impl Dem {
    pub fn new(ncols: usize, nrows: usize, xll: f64, yll: f64, cell_size: f64, nodata: f64, values: Vec<f64>) -> Result<Self, TerrainError> {
        if ncols == 0 || nrows == 0 {
            return Err(TerrainError::Format { line: 0, message: "ncols and nrows must be positive".into() });
        }
        if !(cell_size > 0.0) {
            return Err(TerrainError::Format { line: 0, message: format!("cellsize must be > 0, got {cell_size}") });
        }
        if values.len() != ncols * nrows {
            return Err(TerrainError::Format {
                line: 0,
                message: format!("expected {} values, got {}", ncols * nrows, values.len()),
            });
        }
        Ok(Dem { ncols, nrows, xll, yll, cell_size, nodata, values })
    }

    /// Grid filled with the value `f(x, y)` at each cell center.
    pub fn from_fn(ncols: usize, nrows: usize, xll: f64, yll: f64, cell_size: f64, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut dem = Dem { ncols, nrows, xll, yll, cell_size, nodata: -9999.0, values: vec![0.0; ncols * nrows] };
        for row in 0..nrows {
            for col in 0..ncols {
                let c = dem.cell_center(row, col);
                dem.values[row * ncols + col] = f(c.x, c.y);
            }
        }
        dem
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.ncols + col]
    }

    #[inline]
    pub fn is_nodata(&self, v: f64) -> bool {
        v == self.nodata || v.is_nan()
    }

    pub fn cell_center(&self, row: usize, col: usize) -> Vec2 {
        Vec2::new(
            self.xll + (col as f64 + 0.5) * self.cell_size,
            self.yll + ((self.nrows - row) as f64 - 0.5) * self.cell_size,
        )
    }

    /// Rectangle spanned by the outermost cell centers; the domain of [`sample_height`](Self::sample_height).
    pub fn center_bounds(&self) -> Rect {
        Rect::new(self.cell_center(self.nrows - 1, 0), self.cell_center(0, self.ncols - 1))
    }

    /// Full grid extent.
    pub fn extent(&self) -> Rect {
        Rect::new(
            Vec2::new(self.xll, self.yll),
            Vec2::new(self.xll + self.ncols as f64 * self.cell_size, self.yll + self.nrows as f64 * self.cell_size),
        )
    }

    /// Bilinear interpolation over the four surrounding cell centers.
    /// Returns stored values exactly at cell centers.
    pub fn sample_height(&self, x: f64, y: f64) -> Result<f64, TerrainError> {
        let fc = self.fractional_col(x).ok_or(TerrainError::OutOfBounds { x, y })?;
        // row index counted from the bottom so y increases with it
        let fr = self.fractional_row_from_bottom(y).ok_or(TerrainError::OutOfBounds { x, y })?;

        let (c0, c1, tx) = split(fc, self.ncols);
        let (b0, b1, ty) = split(fr, self.nrows);
        let (r0, r1) = (self.nrows - 1 - b0, self.nrows - 1 - b1);

        let fetch = |row: usize, col: usize| -> Result<f64, TerrainError> {
            let v = self.get(row, col);
            if self.is_nodata(v) {
                Err(TerrainError::NoData { x, y })
            } else {
                Ok(v)
            }
        };
        let v00 = fetch(r0, c0)?;
        let bottom = if tx > 0.0 { v00 + tx * (fetch(r0, c1)? - v00) } else { v00 };
        if ty == 0.0 {
            return Ok(bottom);
        }
        let v01 = fetch(r1, c0)?;
        let top = if tx > 0.0 { v01 + tx * (fetch(r1, c1)? - v01) } else { v01 };
        Ok(bottom + ty * (top - bottom))
    }

    fn fractional_col(&self, x: f64) -> Option<f64> {
        snap_index((x - self.xll) / self.cell_size - 0.5, self.ncols)
    }

    fn fractional_row_from_bottom(&self, y: f64) -> Option<f64> {
        snap_index((y - self.yll) / self.cell_size - 0.5, self.nrows)
    }

    /// ESRI ASCII grid text.
    pub fn to_asc(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "ncols {}", self.ncols);
        let _ = writeln!(out, "nrows {}", self.nrows);
        let _ = writeln!(out, "xllcorner {}", fmt_g17(self.xll));
        let _ = writeln!(out, "yllcorner {}", fmt_g17(self.yll));
        let _ = writeln!(out, "cellsize {}", fmt_g17(self.cell_size));
        let _ = writeln!(out, "NODATA_value {}", fmt_g17(self.nodata));
        for row in self.values.chunks(self.ncols) {
            let line: Vec<String> = row.iter().map(|v| fmt_g17(*v)).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

fn snap_index(f: f64, n: usize) -> Option<f64> {
    if !f.is_finite() {
        return None;
    }
    let r = f.round();
    let f = if (f - r).abs() < SNAP { r } else { f };
    (f >= 0.0 && f <= (n - 1) as f64).then_some(f)
}

/// Lower index, upper index and weight of the upper one.
fn split(f: f64, n: usize) -> (usize, usize, f64) {
    let i0 = f.floor() as usize;
    if i0 >= n - 1 {
        (n - 1, n - 1, 0.0)
    } else {
        (i0, i0 + 1, f - i0 as f64)
    }
}

/// Parses an ESRI ASCII grid. `NODATA_value` is optional (default -9999);
/// `xllcenter`/`yllcenter` are accepted and converted to corners.
pub fn load_dem(text: &str) -> Result<Dem, TerrainError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| !l.trim().is_empty()).peekable();

    let (mut ncols, mut nrows, mut xll, mut yll, mut cell, mut nodata) = (None, None, None, None, None, -9999.0);
    let mut centered = (false, false);
    while let Some(&(ln, line)) = lines.peek() {
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap_or_default().to_ascii_lowercase();
        if key.starts_with(|c: char| c.is_ascii_digit() || c == '-' || c == '+' || c == '.') {
            break;
        }
        let value = parts.next().ok_or_else(|| fmt_err(ln, format!("header `{key}` has no value")))?;
        let num = |v: &str| v.parse::<f64>().map_err(|_| fmt_err(ln, format!("header `{key}` is not numeric: {v:?}")));
        let int = |v: &str| v.parse::<usize>().map_err(|_| fmt_err(ln, format!("header `{key}` is not a positive integer: {v:?}")));
        match key.as_str() {
            "ncols" => ncols = Some(int(value)?),
            "nrows" => nrows = Some(int(value)?),
            "xllcorner" => xll = Some(num(value)?),
            "yllcorner" => yll = Some(num(value)?),
            "xllcenter" => {
                xll = Some(num(value)?);
                centered.0 = true;
            }
            "yllcenter" => {
                yll = Some(num(value)?);
                centered.1 = true;
            }
            "cellsize" => cell = Some(num(value)?),
            "nodata_value" => nodata = num(value)?,
            _ => return Err(fmt_err(ln, format!("unknown header key `{key}`"))),
        }
        lines.next();
    }
    let missing = |k: &str| fmt_err(0, format!("missing header `{k}`"));
    let ncols = ncols.ok_or_else(|| missing("ncols"))?;
    let nrows = nrows.ok_or_else(|| missing("nrows"))?;
    let cell = cell.ok_or_else(|| missing("cellsize"))?;
    let mut xll = xll.ok_or_else(|| missing("xllcorner"))?;
    let mut yll = yll.ok_or_else(|| missing("yllcorner"))?;
    if centered.0 {
        xll -= cell / 2.0;
    }
    if centered.1 {
        yll -= cell / 2.0;
    }

    let mut values = Vec::with_capacity(ncols * nrows);
    let mut rows = 0;
    for (ln, line) in lines {
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| fmt_err(ln, format!("non-numeric value {t:?}"))))
            .collect::<Result<_, _>>()?;
        if row.len() != ncols {
            return Err(fmt_err(ln, format!("expected {ncols} values, found {}", row.len())));
        }
        values.extend(row);
        rows += 1;
    }
    if rows != nrows {
        return Err(fmt_err(0, format!("expected {nrows} rows, found {rows}")));
    }
    Dem::new(ncols, nrows, xll, yll, cell, nodata, values)
}

fn fmt_err(line: usize, message: String) -> TerrainError {
    TerrainError::Format { line: line as u32, message }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const HEADER_2X2: &str = "ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\nNODATA_value -9999\n";

    #[test]
    fn single_cell() {
        let dem = load_dem("ncols 1\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\nNODATA_value -9999\n5.0\n").unwrap();
        assert_eq!(dem.values, vec![5.0]);
        assert_eq!(dem.sample_height(0.5, 0.5).unwrap(), 5.0);
    }

    #[test]
    fn row_major_layout() {
        let dem = load_dem(&format!("{HEADER_2X2}1 2\n3 4\n")).unwrap();
        assert_eq!(dem.values, vec![1.0, 2.0, 3.0, 4.0]);
        // row 0 is north
        assert_eq!(dem.sample_height(0.5, 1.5).unwrap(), 1.0);
        assert_eq!(dem.sample_height(1.5, 0.5).unwrap(), 4.0);
    }

    #[test]
    fn short_row_is_format_error() {
        let text = "ncols 3\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\nNODATA_value -9999\n1 2\n";
        assert!(matches!(load_dem(text), Err(TerrainError::Format { line: 7, .. })));
    }

    #[test]
    fn non_numeric_is_format_error() {
        assert!(matches!(load_dem(&format!("{HEADER_2X2}1 x\n3 4\n")), Err(TerrainError::Format { .. })));
    }

    #[test]
    fn center_header_variant() {
        let dem = load_dem("ncols 1\nnrows 1\nxllcenter 10\nyllcenter 20\ncellsize 2\n7\n").unwrap();
        assert_eq!((dem.xll, dem.yll), (9.0, 19.0));
        assert_eq!(dem.nodata, -9999.0);
    }

    #[test]
    fn asc_round_trip() {
        let dem = Dem::from_fn(4, 3, -10.5, 3.25, 0.5, |x, y| x * 0.1 + y * y);
        assert_eq!(load_dem(&dem.to_asc()).unwrap(), dem);
    }

    #[test]
    fn midpoint_between_centers() {
        let dem = Dem::new(2, 1, 0.0, 0.0, 1.0, -9999.0, vec![0.0, 2.0]).unwrap();
        assert_eq!(dem.sample_height(1.0, 0.5).unwrap(), 1.0);
    }

    #[test]
    fn patch_center() {
        // south row (0, 1), north row (1, 2): bilinear at the patch center = mean of the corners
        let dem = Dem::new(2, 2, 0.0, 0.0, 1.0, -9999.0, vec![1.0, 2.0, 0.0, 1.0]).unwrap();
        assert_eq!(dem.sample_height(1.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn out_of_bounds_and_nodata() {
        let dem = Dem::new(2, 2, 0.0, 0.0, 1.0, -9999.0, vec![1.0, -9999.0, 3.0, 4.0]).unwrap();
        assert!(matches!(dem.sample_height(0.4, 1.0), Err(TerrainError::OutOfBounds { .. })));
        assert!(matches!(dem.sample_height(1.0, 1.0), Err(TerrainError::NoData { .. })));
        assert_eq!(dem.sample_height(0.5, 0.5).unwrap(), 3.0);
    }

    #[test]
    fn uniform_grid() {
        let dem = Dem::from_fn(5, 4, 0.0, 0.0, 2.0, |_, _| 3.75);
        for (x, y) in [(1.0, 1.0), (2.3, 4.1), (9.0, 7.0), (5.5, 1.2)] {
            assert_eq!(dem.sample_height(x, y).unwrap(), 3.75);
        }
    }

    fn random_dem() -> impl Strategy<Value = Dem> {
        (1usize..6, 1usize..6, 0.1f64..5.0).prop_flat_map(|(c, r, cs)| {
            prop::collection::vec(-100.0f64..100.0, c * r)
                .prop_map(move |v| Dem::new(c, r, -3.0, 7.0, cs, -9999.0, v).unwrap())
        })
    }

    proptest! {
        #[test]
        fn exact_at_cell_centers(dem in random_dem()) {
            for row in 0..dem.nrows {
                for col in 0..dem.ncols {
                    let c = dem.cell_center(row, col);
                    prop_assert_eq!(dem.sample_height(c.x, c.y).unwrap(), dem.get(row, col));
                }
            }
        }

        #[test]
        fn bilinear_stays_within_corner_range(dem in random_dem(), fx in 0.0f64..1.0, fy in 0.0f64..1.0) {
            let b = dem.center_bounds();
            let x = b.min.x + fx * (b.max.x - b.min.x);
            let y = b.min.y + fy * (b.max.y - b.min.y);
            let z = dem.sample_height(x, y).unwrap();
            // the four contributing centers
            let col = (((x - dem.xll) / dem.cell_size - 0.5).floor() as usize).min(dem.ncols - 1);
            let rb = (((y - dem.yll) / dem.cell_size - 0.5).floor() as usize).min(dem.nrows - 1);
            let mut vals = vec![];
            for c in [col, (col + 1).min(dem.ncols - 1)] {
                for r in [rb, (rb + 1).min(dem.nrows - 1)] {
                    vals.push(dem.get(dem.nrows - 1 - r, c));
                }
            }
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(z >= lo - 1e-9 && z <= hi + 1e-9, "{} not in [{}, {}]", z, lo, hi);
        }
    }
}
