use rayon::prelude::*;

use super::{solve_rigid_2d, GridIndex, RegistrationError, RigidTransform2D};
use crate::geom::Vec2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcpParams {
    pub max_iterations: usize,
    /// Stop once an iteration improves the rms by less than this (meters).
    pub convergence_tol: f64,
    pub max_correspondence_dist: f64,
    /// Centerline densification step used by graph fine-tuning.
    pub resample_step: f64,
}

impl Default for IcpParams {
    fn default() -> Self {
        IcpParams { max_iterations: 50, convergence_tol: 1e-4, max_correspondence_dist: 5.0, resample_step: 2.0 }
    }
}

impl IcpParams {
    pub fn validate(&self) -> Result<(), RegistrationError> {
        if self.max_iterations < 1
            || !(self.convergence_tol > 0.0)
            || !(self.max_correspondence_dist > 0.0)
            || !(self.resample_step > 0.0)
        {
            return Err(RegistrationError::Precondition(format!("ICP parameters must be strictly positive: {self:?}")));
        }
        Ok(())
    }
}

/// One correspondence/solve round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcpIteration {
    pub correspondences: usize,
    /// rms over the correspondence set before the solve step.
    pub rms_before: f64,
    /// rms over the same correspondence set after the solve step.
    pub rms_after: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IcpReport {
    /// Cumulative transform mapping the source onto the target.
    pub transform: RigidTransform2D,
    /// Post-solve rms of each iteration.
    pub rms_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub steps: Vec<IcpIteration>,
}

impl IcpReport {
    pub fn final_rms(&self) -> f64 {
        self.rms_history.last().copied().unwrap_or(0.0)
    }
}

/// Point-to-point ICP of `source` onto `target`.
///
/// The correspondence search runs on the current rayon pool; its output is
/// collected in source order, so results do not depend on the worker count.
pub fn icp_align(source: &[Vec2], target: &[Vec2], params: &IcpParams) -> Result<IcpReport, RegistrationError> {
    params.validate()?;
    if source.len() < 2 || target.len() < 2 {
        return Err(RegistrationError::Precondition(format!(
            "ICP needs at least 2 source and 2 target points (got {} and {})",
            source.len(),
            target.len()
        )));
    }
    let index = GridIndex::new(target, params.max_correspondence_dist);
    let mut transform = RigidTransform2D::IDENTITY;
    let mut report = IcpReport {
        transform,
        rms_history: Vec::new(),
        iterations: 0,
        converged: false,
        steps: Vec::new(),
    };

    for iteration in 1..=params.max_iterations {
        let moved: Vec<Vec2> = source.par_iter().map(|p| transform.apply(*p)).collect();
        let matches = correspondences(&index, &moved);
        let pairs: Vec<(Vec2, Vec2)> = matches
            .iter()
            .zip(&moved)
            .filter_map(|(m, p)| m.map(|(j, _)| (*p, target[j])))
            .collect();
        if pairs.len() < 2 {
            return Err(RegistrationError::NoOverlap { iteration, correspondences: pairs.len() });
        }

        let rms_before = super::pair_rms(&pairs, &RigidTransform2D::IDENTITY);
        let step = solve_rigid_2d(&pairs)?;
        let rms_after = super::pair_rms(&pairs, &step);
        transform = transform.then(&step);

        report.rms_history.push(rms_after);
        report.steps.push(IcpIteration { correspondences: pairs.len(), rms_before, rms_after });
        report.iterations = iteration;
        report.transform = transform;
        if rms_before - rms_after < params.convergence_tol {
            report.converged = true;
            break;
        }
    }
    Ok(report)
}

/// Nearest target within range for every query point, in query order.
pub fn correspondences(index: &GridIndex, queries: &[Vec2]) -> Vec<Option<(usize, f64)>> {
    queries.par_iter().map(|q| index.nearest(*q)).collect()
}

/// Densifies a polyline at a fixed arc-length step; the final vertex is always kept.
pub fn resample_polyline(polyline: &[Vec2], step: f64) -> Vec<Vec2> {
    assert!(step > 0.0, "resample step must be positive");
    let mut out = Vec::new();
    if polyline.is_empty() {
        return out;
    }
    let total = crate::geom::polyline_length(polyline);
    let n = (total / step).floor() as usize;
    let mut seg = 0usize;
    let mut seg_start = 0.0;
    for k in 0..=n {
        let s = k as f64 * step;
        if k > 0 && total - s < 1e-9 {
            break;
        }
        while seg + 1 < polyline.len() - 1 && seg_start + polyline[seg].distance(polyline[seg + 1]) < s {
            seg_start += polyline[seg].distance(polyline[seg + 1]);
            seg += 1;
        }
        if polyline.len() == 1 {
            out.push(polyline[0]);
            break;
        }
        let (a, b) = (polyline[seg], polyline[seg + 1]);
        let len = a.distance(b);
        let t = if len > 0.0 { ((s - seg_start) / len).clamp(0.0, 1.0) } else { 0.0 };
        out.push(a.lerp(b, t));
    }
    let last = *polyline.last().unwrap();
    if out.last().is_none_or(|p| *p != last) {
        out.push(last);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(x: f64, y: f64) -> Vec2 {
        Vec2::new(x, y)
    }

    #[test]
    fn resample_straight() {
        let pts = resample_polyline(&[v(0.0, 0.0), v(10.0, 0.0)], 2.0);
        let xs: Vec<f64> = pts.iter().map(|p| p.x).collect();
        assert_eq!(xs, vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0]);
    }

    #[test]
    fn resample_step_longer_than_line() {
        assert_eq!(resample_polyline(&[v(0.0, 0.0), v(5.0, 0.0)], 10.0), vec![v(0.0, 0.0), v(5.0, 0.0)]);
    }

    #[test]
    fn resample_l_shape() {
        let pts = resample_polyline(&[v(0.0, 0.0), v(4.0, 0.0), v(4.0, 3.0)], 2.0);
        assert_eq!(pts, vec![v(0.0, 0.0), v(2.0, 0.0), v(4.0, 0.0), v(4.0, 2.0), v(4.0, 3.0)]);
    }

    fn cloud(seed: u64, n: usize) -> Vec<Vec2> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| v(rng.gen_range(-20.0..20.0), rng.gen_range(-10.0..10.0))).collect()
    }

    #[test]
    fn subset_is_identity() {
        let target = cloud(1, 300);
        let source: Vec<Vec2> = target.iter().step_by(3).copied().collect();
        let r = icp_align(&source, &target, &IcpParams::default()).unwrap();
        assert_eq!(r.transform, RigidTransform2D::IDENTITY);
        assert_eq!(r.final_rms(), 0.0);
        assert!(r.converged);
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn recovers_small_translation() {
        let source = cloud(2, 400);
        let target: Vec<Vec2> = source.iter().map(|p| *p + v(0.5, 0.5)).collect();
        let r = icp_align(&source, &target, &IcpParams::default()).unwrap();
        assert!((r.transform.tx - 0.5).abs() < 1e-3, "{:?}", r.transform);
        assert!((r.transform.ty - 0.5).abs() < 1e-3);
        assert!(r.transform.theta.abs() < 1e-3);
    }

    #[test]
    fn recovers_rotation_about_centroid() {
        let source = cloud(3, 400);
        let c = source.iter().fold(Vec2::ZERO, |a, p| a + *p) * (1.0 / source.len() as f64);
        let gen = RigidTransform2D::about(c, 5f64.to_radians(), v(1.0, 0.0));
        let target: Vec<Vec2> = source.iter().map(|p| gen.apply(*p)).collect();
        let r = icp_align(&source, &target, &IcpParams { max_iterations: 100, ..Default::default() }).unwrap();
        assert!((r.transform.theta - gen.theta).abs() < 1e-3, "{:?} vs {:?}", r.transform, gen);
        assert!((r.transform.tx - gen.tx).abs() < 1e-3 && (r.transform.ty - gen.ty).abs() < 1e-3);
    }

    #[test]
    fn no_overlap_is_error() {
        let source = cloud(4, 50);
        let target: Vec<Vec2> = source.iter().map(|p| *p + v(1000.0, 0.0)).collect();
        assert!(matches!(
            icp_align(&source, &target, &IcpParams::default()),
            Err(RegistrationError::NoOverlap { iteration: 1, correspondences: 0 })
        ));
    }

    #[test]
    fn solve_never_increases_rms_on_its_own_pairs() {
        let source = cloud(5, 300);
        let gen = RigidTransform2D::new(0.08, 2.0, -1.5);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let target: Vec<Vec2> =
            source.iter().map(|p| gen.apply(*p) + v(rng.gen_range(-0.05..0.05), rng.gen_range(-0.05..0.05))).collect();
        let r = icp_align(&source, &target, &IcpParams::default()).unwrap();
        for s in &r.steps {
            assert!(s.rms_after <= s.rms_before + 1e-12, "{s:?}");
        }
    }

    #[test]
    fn parallel_search_matches_sequential() {
        let target = cloud(6, 2000);
        let queries = cloud(7, 500);
        let index = GridIndex::new(&target, 1.5);
        let seq: Vec<_> = queries.iter().map(|q| index.nearest(*q)).collect();
        for workers in [1, 2, 8] {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().unwrap();
            let par = pool.install(|| correspondences(&index, &queries));
            assert_eq!(par, seq);
        }
    }

    #[test]
    fn rejects_bad_params() {
        let p = IcpParams { max_correspondence_dist: 0.0, ..Default::default() };
        assert!(matches!(icp_align(&cloud(1, 5), &cloud(2, 5), &p), Err(RegistrationError::Precondition(_))));
    }
}
