use crate::geom::Vec2;

/// Planar rigid motion `p -> R(theta) p + (tx, ty)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RigidTransform2D {
    pub theta: f64,
    pub tx: f64,
    pub ty: f64,
}

impl RigidTransform2D {
    pub const IDENTITY: RigidTransform2D = RigidTransform2D { theta: 0.0, tx: 0.0, ty: 0.0 };

    pub fn new(theta: f64, tx: f64, ty: f64) -> Self {
        RigidTransform2D { theta, tx, ty }
    }

    pub fn translation(&self) -> Vec2 {
        Vec2::new(self.tx, self.ty)
    }

    #[inline]
    pub fn rotate(&self, p: Vec2) -> Vec2 {
        let (s, c) = self.theta.sin_cos();
        Vec2::new(c * p.x - s * p.y, s * p.x + c * p.y)
    }

    #[inline]
    pub fn apply(&self, p: Vec2) -> Vec2 {
        self.rotate(p) + self.translation()
    }

    /// `self` first, then `next`.
    pub fn then(&self, next: &RigidTransform2D) -> RigidTransform2D {
        let t = next.rotate(self.translation()) + next.translation();
        RigidTransform2D::new(crate::geom::normalize_angle(self.theta + next.theta), t.x, t.y)
    }

    pub fn inverse(&self) -> RigidTransform2D {
        let back = RigidTransform2D::new(-self.theta, 0.0, 0.0);
        let t = -back.rotate(self.translation());
        RigidTransform2D::new(-self.theta, t.x, t.y)
    }

    /// Rotation by `theta` about `center`, followed by a translation.
    pub fn about(center: Vec2, theta: f64, translation: Vec2) -> RigidTransform2D {
        let r = RigidTransform2D::new(theta, 0.0, 0.0);
        let t = center - r.rotate(center) + translation;
        RigidTransform2D::new(theta, t.x, t.y)
    }
}
