use super::{RegistrationError, RigidTransform2D};
use crate::geom::Vec2;

/// Closed-form least-squares rigid transform mapping each source onto its target.
///
/// With both sets centered on their centroids, the optimal rotation is
/// `atan2(sum(src x tgt), sum(src . tgt))`; the translation then carries the
/// rotated source centroid onto the target centroid.
pub fn solve_rigid_2d(pairs: &[(Vec2, Vec2)]) -> Result<RigidTransform2D, RegistrationError> {
    if pairs.len() < 2 {
        return Err(RegistrationError::Degenerate(format!("need at least 2 pairs, got {}", pairs.len())));
    }
    let n = pairs.len() as f64;
    let (mut cs, mut ct) = (Vec2::ZERO, Vec2::ZERO);
    for (s, t) in pairs {
        cs += *s;
        ct += *t;
    }
    cs = cs * (1.0 / n);
    ct = ct * (1.0 / n);

    let (mut cross, mut dot, mut spread) = (0.0, 0.0, 0.0);
    for (s, t) in pairs {
        let (a, b) = (*s - cs, *t - ct);
        cross += a.cross(b);
        dot += a.dot(b);
        spread += a.norm_squared();
    }
    let scale = 1.0 + cs.norm_squared();
    if spread <= 1e-24 * scale * n {
        return Err(RegistrationError::Degenerate("source points are all coincident".into()));
    }

    let theta = cross.atan2(dot);
    let r = RigidTransform2D::new(theta, 0.0, 0.0);
    let t = ct - r.rotate(cs);
    Ok(RigidTransform2D::new(theta, t.x, t.y))
}

/// Root-mean-square distance between `t(source)` and target over the pairs.
pub fn pair_rms(pairs: &[(Vec2, Vec2)], t: &RigidTransform2D) -> f64 {
    if pairs.is_empty() {
        return 0.0;
    }
    let sum: f64 = pairs.iter().map(|(s, g)| t.apply(*s).distance_squared(*g)).sum();
    (sum / pairs.len() as f64).sqrt()
}
