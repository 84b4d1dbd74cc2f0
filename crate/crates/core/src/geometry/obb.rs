use super::{Point3, RotationMatrix, Vec3};
use crate::error::{Error, Result};

/// Box with arbitrary position and orientation; extents are full side
/// lengths along the box's local axes.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientedBox3D {
    pub center: Point3,
    pub rotation: RotationMatrix,
    pub extents: Vec3,
}

impl OrientedBox3D {
    pub fn try_new(center: Point3, rotation: RotationMatrix, extents: Vec3) -> Result<Self> {
        if !extents.iter().all(|e| e.is_finite() && *e > 0.0)
            || !center.coords.iter().all(|v| v.is_finite())
        {
            return Err(Error::InvalidExtents);
        }
        Ok(OrientedBox3D { center, rotation, extents })
    }

    pub fn volume(&self) -> f64 {
        self.extents.x * self.extents.y * self.extents.z
    }

    /// The eight corners, in a fixed bit order over (±x, ±y, ±z).
    pub fn corners(&self) -> [Point3; 8] {
        let mut out = [Point3::origin(); 8];
        for (i, corner) in out.iter_mut().enumerate() {
            let local = Vec3::new(
                if i & 1 == 0 { -0.5 } else { 0.5 } * self.extents.x,
                if i & 2 == 0 { -0.5 } else { 0.5 } * self.extents.y,
                if i & 4 == 0 { -0.5 } else { 0.5 } * self.extents.z,
            );
            *corner = Point3::from(self.center.coords + self.rotation.matrix() * local);
        }
        out
    }

    /// The six bounding half-spaces as (unit outward normal n, offset d)
    /// with interior = { x : n·x <= d }.
    pub fn halfspaces(&self) -> [(Vec3, f64); 6] {
        let mut out = [(Vec3::zeros(), 0.0); 6];
        for k in 0..3 {
            let axis = self.rotation.matrix().column(k).into_owned();
            let half = self.extents[k] / 2.0;
            let c = self.center.coords.dot(&axis);
            out[2 * k] = (axis, c + half);
            out[2 * k + 1] = (-axis, -(c - half));
        }
        out
    }

    pub fn contains(&self, p: &Point3) -> bool {
        let local = self.rotation.matrix().transpose() * (p - self.center);
        local.x.abs() <= self.extents.x / 2.0
            && local.y.abs() <= self.extents.y / 2.0
            && local.z.abs() <= self.extents.z / 2.0
    }
}
