use super::{ConversionConfig, FitError};
use crate::geom::Vec2;
use crate::odr::ElevPoly;
use crate::terrain::HeightField;

/// `0, step, 2*step, ...` below `length`, then `length`.
pub fn sample_abscissae(length: f64, step: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 0usize;
    loop {
        let s = k as f64 * step;
        if s >= length - 1e-9 {
            break;
        }
        out.push(s);
        k += 1;
    }
    out.push(length);
    out
}

/// Natural cubic spline through `(s[i], z[i])`, one polynomial per interval.
/// `s` must be strictly increasing with at least two entries.
pub fn natural_spline(s: &[f64], z: &[f64]) -> Vec<ElevPoly> {
    let n = s.len();
    assert!(n >= 2 && z.len() == n, "spline needs matching abscissae and values");
    let h: Vec<f64> = s.windows(2).map(|w| w[1] - w[0]).collect();
    // second derivatives m[0..n], m[0] = m[n-1] = 0; Thomas algorithm on the interior rows
    let mut m = vec![0.0; n];
    if n > 2 {
        let k = n - 2;
        let mut diag = vec![0.0; k];
        let mut rhs = vec![0.0; k];
        for i in 0..k {
            diag[i] = 2.0 * (h[i] + h[i + 1]);
            rhs[i] = 6.0 * ((z[i + 2] - z[i + 1]) / h[i + 1] - (z[i + 1] - z[i]) / h[i]);
        }
        for i in 1..k {
            let w = h[i] / diag[i - 1];
            diag[i] -= w * h[i];
            rhs[i] -= w * rhs[i - 1];
        }
        m[k] = rhs[k - 1] / diag[k - 1];
        for i in (0..k - 1).rev() {
            m[i + 1] = (rhs[i] - h[i + 1] * m[i + 2]) / diag[i];
        }
    }
    (0..n - 1)
        .map(|i| ElevPoly {
            s: s[i],
            a: z[i],
            b: (z[i + 1] - z[i]) / h[i] - h[i] * (2.0 * m[i] + m[i + 1]) / 6.0,
            c: m[i] / 2.0,
            d: (m[i + 1] - m[i]) / (6.0 * h[i]),
        })
        .collect()
}

/// Point at arc length `s` on a station list `(s, point)`, linear in between.
pub fn station_point(stations: &[(f64, Vec2)], s: f64) -> Vec2 {
    let i = stations.partition_point(|(si, _)| *si <= s);
    if i == 0 {
        return stations[0].1;
    }
    if i == stations.len() {
        return stations[i - 1].1;
    }
    let ((s0, p0), (s1, p1)) = (stations[i - 1], stations[i]);
    if s == s0 {
        return p0;
    }
    p0.lerp(p1, (s - s0) / (s1 - s0))
}

/// Elevation profile along a reference line given as stations `(s, point)`
/// with increasing `s` from 0 to the road length.
///
/// Ordinary roads interpolate terrain samples taken every
/// `elevation_sample_step` with a natural cubic spline. Bridges get a single
/// linear deck between the terrain heights at their two ends.
pub fn fit_elevation(
    stations: &[(f64, Vec2)],
    terrain: &impl HeightField,
    is_bridge: bool,
    config: &ConversionConfig,
) -> Result<Vec<ElevPoly>, FitError> {
    let length = stations.last().map_or(0.0, |st| st.0);
    if stations.len() < 2 || !(length > 0.0) {
        return Err(FitError::Degenerate("elevation path has no length".into()));
    }
    let height = |s: f64| {
        let p = station_point(stations, s);
        terrain.height(p.x, p.y).map_err(|source| FitError::MissingTerrain { s, x: p.x, y: p.y, source })
    };
    if is_bridge {
        let (z0, z1) = (height(0.0)?, height(length)?);
        return Ok(vec![ElevPoly { s: 0.0, a: z0, b: (z1 - z0) / length, c: 0.0, d: 0.0 }]);
    }
    let s = sample_abscissae(length, config.elevation_sample_step);
    let z = s.iter().map(|&si| height(si)).collect::<Result<Vec<_>, _>>()?;
    Ok(natural_spline(&s, &z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terrain::{Dem, TerrainError};
    use std::cell::RefCell;

    fn straight(length: f64) -> Vec<(f64, Vec2)> {
        vec![(0.0, Vec2::new(0.0, 0.0)), (length, Vec2::new(length, 0.0))]
    }

    #[test]
    fn abscissae() {
        assert_eq!(sample_abscissae(10.0, 5.0), vec![0.0, 5.0, 10.0]);
        assert_eq!(sample_abscissae(12.0, 5.0), vec![0.0, 5.0, 10.0, 12.0]);
        assert_eq!(sample_abscissae(3.0, 5.0), vec![0.0, 3.0]);
    }

    #[test]
    fn flat_terrain() {
        let dem = Dem::from_fn(30, 5, -5.0, -5.0, 2.0, |_, _| 5.0);
        let prof = fit_elevation(&straight(40.0), &dem, false, &ConversionConfig::default()).unwrap();
        assert_eq!(prof.len(), 8);
        for p in prof {
            assert_eq!((p.a, p.b, p.c, p.d), (5.0, 0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn ramp_reproduces_grade() {
        let dem = Dem::from_fn(30, 5, -5.0, -5.0, 2.0, |x, _| 0.02 * x);
        let prof = fit_elevation(&straight(42.0), &dem, false, &ConversionConfig::default()).unwrap();
        for p in &prof {
            assert!((p.b - 0.02).abs() < 1e-9, "{p:?}");
            assert!(p.c.abs() < 1e-9 && p.d.abs() < 1e-9, "{p:?}");
        }
    }

    /// Terrain that records where it was queried.
    struct Probe<F> {
        f: F,
        seen: RefCell<Vec<(f64, f64)>>,
    }

    impl<F: Fn(f64, f64) -> f64> HeightField for Probe<F> {
        fn height(&self, x: f64, y: f64) -> Result<f64, TerrainError> {
            self.seen.borrow_mut().push((x, y));
            Ok((self.f)(x, y))
        }
    }

    #[test]
    fn bridge_spans_valley_without_sampling_it() {
        let probe = Probe { f: |x: f64, _y: f64| if (x - 50.0).abs() < 40.0 { 2.0 } else { 10.0 }, seen: RefCell::new(Vec::new()) };
        let prof = fit_elevation(&straight(100.0), &probe, true, &ConversionConfig::default()).unwrap();
        assert_eq!(prof, vec![ElevPoly { s: 0.0, a: 10.0, b: 0.0, c: 0.0, d: 0.0 }]);
        assert_eq!(*probe.seen.borrow(), vec![(0.0, 0.0), (100.0, 0.0)]);
    }

    #[test]
    fn spline_interpolates_and_is_c1() {
        let s = [0.0, 1.0, 2.5, 4.0, 7.0];
        let z = [1.0, -2.0, 0.5, 3.0, 3.0];
        let p = natural_spline(&s, &z);
        for i in 0..4 {
            assert_eq!(p[i].eval(s[i]), z[i]);
            assert!((p[i].eval(s[i + 1]) - z[i + 1]).abs() < 1e-12);
        }
        for i in 0..3 {
            assert!((p[i].slope(s[i + 1]) - p[i + 1].slope(s[i + 1])).abs() < 1e-12);
            // second derivative continuity
            let dd = |e: &ElevPoly, at: f64| 2.0 * e.c + 6.0 * e.d * (at - e.s);
            assert!((dd(&p[i], s[i + 1]) - dd(&p[i + 1], s[i + 1])).abs() < 1e-12);
        }
        assert_eq!(p[0].c, 0.0);
        assert!((2.0 * p[3].c + 6.0 * p[3].d * 3.0).abs() < 1e-12);
    }

    #[test]
    fn station_interpolation() {
        let st = [(0.0, Vec2::new(0.0, 0.0)), (2.0, Vec2::new(2.0, 0.0)), (4.0, Vec2::new(2.0, 2.0))];
        assert_eq!(station_point(&st, 3.0), Vec2::new(2.0, 1.0));
        assert_eq!(station_point(&st, 2.0), Vec2::new(2.0, 0.0));
        assert_eq!(station_point(&st, 4.0), Vec2::new(2.0, 2.0));
    }

    #[test]
    fn missing_terrain_is_reported() {
        let dem = Dem::from_fn(3, 3, 0.0, 0.0, 1.0, |_, _| 0.0);
        let err = fit_elevation(&straight(40.0), &dem, false, &ConversionConfig::default()).unwrap_err();
        assert!(matches!(err, FitError::MissingTerrain { .. }));
    }
}
