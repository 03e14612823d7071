use super::{ConversionConfig, FitError, FitMode};
use crate::geom::{normalize_angle, point_segment_distance, Vec2};
use crate::odr::{Geometry, GeometryKind};

/// Consecutive vertices closer than this are treated as one.
const DUPLICATE_EPS: f64 = 1e-9;

/// Fits a chain of plan-view segments to `polyline`. Every input vertex ends up
/// within `max(arc_tolerance, simplify_epsilon)` of the chain.
pub fn fit_plan_view(polyline: &[Vec2], config: &ConversionConfig) -> Result<Vec<Geometry>, FitError> {
    let mut pts: Vec<Vec2> = Vec::with_capacity(polyline.len());
    for &p in polyline {
        if !p.is_finite() {
            return Err(FitError::Degenerate(format!("non-finite vertex {p:?}")));
        }
        if pts.last().is_none_or(|q: &Vec2| q.distance(p) > DUPLICATE_EPS) {
            pts.push(p);
        }
    }
    if pts.len() < 2 {
        return Err(FitError::Degenerate(format!("{} distinct vertices, need at least 2", pts.len())));
    }
    let pieces = match config.fit_mode {
        FitMode::Polyline => {
            let keep = douglas_peucker(&pts, config.simplify_epsilon);
            keep.windows(2).filter_map(|w| line_between(pts[w[0]], pts[w[1]])).collect()
        }
        FitMode::ArcFit => arc_chain(&pts, config.arc_tolerance),
    };
    Ok(with_offsets(pieces))
}

fn with_offsets(mut pieces: Vec<Geometry>) -> Vec<Geometry> {
    let mut s = 0.0;
    for g in &mut pieces {
        g.s = s;
        s += g.length;
    }
    pieces
}

fn line_between(a: Vec2, b: Vec2) -> Option<Geometry> {
    let length = a.distance(b);
    (length > DUPLICATE_EPS).then(|| Geometry { s: 0.0, x: a.x, y: a.y, hdg: (b - a).heading(), length, kind: GeometryKind::Line })
}

/// Indices of the vertices kept by Douglas-Peucker at tolerance `eps`
/// (distance to the chord segment). First and last are always kept.
pub fn douglas_peucker(pts: &[Vec2], eps: f64) -> Vec<usize> {
    let n = pts.len();
    if n <= 2 {
        return (0..n).collect();
    }
    let mut keep = vec![false; n];
    keep[0] = true;
    keep[n - 1] = true;
    let mut stack = vec![(0, n - 1)];
    while let Some((a, b)) = stack.pop() {
        if b <= a + 1 {
            continue;
        }
        let mut worst = (a, -1.0);
        for i in a + 1..b {
            let d = point_segment_distance(pts[i], pts[a], pts[b]);
            if d > worst.1 {
                worst = (i, d);
            }
        }
        if worst.1 > eps {
            keep[worst.0] = true;
            stack.push((a, worst.0));
            stack.push((worst.0, b));
        }
    }
    (0..n).filter(|&i| keep[i]).collect()
}

/// Least-squares (Kåsa) circle through `pts`: `(center, radius)`, or `None`
/// when the points are collinear to working precision.
pub fn kasa_fit(pts: &[Vec2]) -> Option<(Vec2, f64)> {
    let n = pts.len() as f64;
    let mean = pts.iter().fold(Vec2::ZERO, |acc, &p| acc + p) * (1.0 / n);
    let (mut suu, mut svv, mut suv, mut r1, mut r2, mut szz) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for &p in pts {
        let (u, v) = (p.x - mean.x, p.y - mean.y);
        let z = u * u + v * v;
        suu += u * u;
        svv += v * v;
        suv += u * v;
        r1 += u * z;
        r2 += v * z;
        szz += z;
    }
    let det = suu * svv - suv * suv;
    let scale = (suu + svv) * (suu + svv);
    if !(det > 1e-12 * scale) {
        return None;
    }
    // u^2 + v^2 + D u + E v + F = 0 with centered coordinates
    let d = -(r1 * svv - r2 * suv) / det;
    let e = -(suu * r2 - suv * r1) / det;
    let f = -szz / n;
    let r_sq = (d * d + e * e) / 4.0 - f;
    if !(r_sq > 0.0) {
        return None;
    }
    Some((Vec2::new(mean.x - d / 2.0, mean.y - e / 2.0), r_sq.sqrt()))
}

/// Minor arc from `a` to `b` with the given radius, turning towards `center_hint`.
pub fn pinned_arc(a: Vec2, b: Vec2, radius: f64, center_hint: Vec2) -> Option<Geometry> {
    let chord = b - a;
    let c = chord.norm();
    if c <= DUPLICATE_EPS {
        return None;
    }
    let side = chord.cross(center_hint - a).signum();
    let r = radius.max(c / 2.0);
    let half = (c / (2.0 * r)).clamp(-1.0, 1.0).asin();
    let curvature = side / r;
    let kind = GeometryKind::arc(curvature);
    if kind == GeometryKind::Line {
        return line_between(a, b);
    }
    Some(Geometry { s: 0.0, x: a.x, y: a.y, hdg: chord.heading() - side * half, length: 2.0 * half * r, kind })
}

/// Distance from `p` to the segment `g` (line or arc).
pub fn distance_to_segment(p: Vec2, g: &Geometry) -> f64 {
    let start = Vec2::new(g.x, g.y);
    match g.kind {
        GeometryKind::Arc { curvature } => {
            let r = 1.0 / curvature.abs();
            let center = start + Vec2::from_heading(g.hdg).perp() * (1.0 / curvature);
            let swept = curvature * g.length;
            let a0 = (start - center).heading();
            let ap = (p - center).heading();
            let rel = normalize_angle(ap - a0);
            // measure the angle in the arc's direction of travel, in [0, 2pi)
            let mut along = if swept >= 0.0 { rel } else { -rel };
            if along < 0.0 {
                along += std::f64::consts::TAU;
            }
            if along <= swept.abs() {
                (p.distance(center) - r).abs()
            } else {
                p.distance(start).min(p.distance(g.end_pose().position()))
            }
        }
        _ => {
            let end = g.end_pose().position();
            point_segment_distance(p, start, end)
        }
    }
}

fn arc_chain(pts: &[Vec2], tol: f64) -> Vec<Geometry> {
    let n = pts.len();
    let mut out = Vec::new();
    let mut i = 0;
    while i < n - 1 {
        let mut j = i + 1;
        let mut best = line_between(pts[i], pts[j]);
        let mut k = j + 1;
        while k < n {
            match window_fit(&pts[i..=k], tol) {
                Some(g) => {
                    best = Some(g);
                    j = k;
                    k += 1;
                }
                None => break,
            }
        }
        out.extend(best);
        i = j;
    }
    out
}

/// One segment through the whole window with every vertex within `tol`, if any.
fn window_fit(win: &[Vec2], tol: f64) -> Option<Geometry> {
    let (a, b) = (win[0], win[win.len() - 1]);
    let fits = |g: &Geometry| win[1..win.len() - 1].iter().all(|&p| distance_to_segment(p, g) <= tol);
    if let Some((center, radius)) = kasa_fit(win) {
        if let Some(g) = pinned_arc(a, b, radius, center) {
            if fits(&g) {
                return Some(g);
            }
        }
    }
    line_between(a, b).filter(|g| fits(g))
}
