use nalgebra::{Rotation3, Unit};
use rand::Rng;

use super::{Mat3, Point3, Vec3};
use crate::error::{Error, Result};
use crate::geometry::PointCloud;

/// Element-wise tolerance for the orthonormality and determinant checks.
/// Loose enough for file round-trips, tight enough to reject reflections.
pub const ROTATION_TOLERANCE: f64 = 1e-6;

/// A proper rotation: orthonormal 3x3 matrix with determinant +1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix(Mat3);

impl RotationMatrix {
    pub fn identity() -> Self {
        RotationMatrix(Mat3::identity())
    }

    /// Validates orthonormality (RᵀR = I within 1e-6 element-wise) and
    /// det(R) = +1 within 1e-6.
    pub fn try_new(m: Mat3) -> Result<Self> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidRotation { reason: "non-finite entries".into() });
        }
        let gram = m.transpose() * m;
        let dev = (gram - Mat3::identity()).abs().max();
        if dev > ROTATION_TOLERANCE {
            return Err(Error::InvalidRotation {
                reason: format!("RᵀR deviates from identity by {dev:.3e}"),
            });
        }
        let det = m.determinant();
        if (det - 1.0).abs() > ROTATION_TOLERANCE {
            return Err(Error::InvalidRotation { reason: format!("det(R) = {det}") });
        }
        Ok(RotationMatrix(m))
    }

    /// Wraps a matrix that is known to be a rotation (e.g. a product of
    /// validated rotations or SVD factors). Debug builds still assert.
    pub fn from_matrix_unchecked(m: Mat3) -> Self {
        debug_assert!((m.determinant() - 1.0).abs() < 1e-4, "not a rotation");
        RotationMatrix(m)
    }

    pub fn from_axis_angle(axis: Vec3, angle_rad: f64) -> Self {
        let r = Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle_rad);
        RotationMatrix(*r.matrix())
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        RotationMatrix(self.0.transpose())
    }

    pub fn apply(&self, p: &Point3) -> Point3 {
        Point3::from(self.0 * p.coords)
    }

    pub fn apply_vec(&self, v: &Vec3) -> Vec3 {
        self.0 * v
    }

    /// Geodesic distance on SO(3): arccos((trace(selfᵀ·other) − 1)/2), radians.
    pub fn angle_to(&self, other: &RotationMatrix) -> f64 {
        let tr = (self.0.transpose() * other.0).trace();
        (((tr - 1.0) / 2.0).clamp(-1.0, 1.0)).acos()
    }
}

impl std::ops::Mul for RotationMatrix {
    type Output = RotationMatrix;
    fn mul(self, rhs: RotationMatrix) -> RotationMatrix {
        RotationMatrix(self.0 * rhs.0)
    }
}

/// Similarity transform p ↦ s·R·p + t: the 6D pose plus size output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityTransform {
    scale: f64,
    rotation: RotationMatrix,
    translation: Vec3,
}

impl SimilarityTransform {
    pub fn identity() -> Self {
        SimilarityTransform {
            scale: 1.0,
            rotation: RotationMatrix::identity(),
            translation: Vec3::zeros(),
        }
    }

    pub fn try_new(scale: f64, rotation: RotationMatrix, translation: Vec3) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidScale { value: scale });
        }
        if translation.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidRotation { reason: "non-finite translation".into() });
        }
        Ok(SimilarityTransform { scale, rotation, translation })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn rotation(&self) -> &RotationMatrix {
        &self.rotation
    }

    pub fn translation(&self) -> &Vec3 {
        &self.translation
    }

    pub fn apply(&self, p: &Point3) -> Point3 {
        Point3::from(self.scale * (self.rotation.matrix() * p.coords) + self.translation)
    }

    /// Transforms every point, preserving order and frame tag.
    pub fn apply_cloud(&self, cloud: &PointCloud) -> PointCloud {
        let points = cloud.points().iter().map(|p| self.apply(p)).collect();
        PointCloud::new_unchecked(points, cloud.frame())
    }

    /// Returns the transform equivalent to applying `other` first, then `self`.
    pub fn compose(&self, other: &SimilarityTransform) -> SimilarityTransform {
        SimilarityTransform {
            scale: self.scale * other.scale,
            rotation: self.rotation * other.rotation,
            translation: self.scale * self.rotation.apply_vec(&other.translation)
                + self.translation,
        }
    }

    pub fn inverse(&self) -> SimilarityTransform {
        let rot_t = self.rotation.transpose();
        let scale = 1.0 / self.scale;
        SimilarityTransform {
            scale,
            rotation: rot_t,
            translation: -scale * rot_t.apply_vec(&self.translation),
        }
    }
}

/// Transforms every point of `cloud` by `transform`; ordering preserved.
pub fn transform_points(transform: &SimilarityTransform, cloud: &PointCloud) -> PointCloud {
    transform.apply_cloud(cloud)
}

/// Uniformly distributed rotation, via a unit quaternion with Gaussian parts.
pub fn random_rotation<R: Rng>(rng: &mut R) -> RotationMatrix {
    let q = nalgebra::Quaternion::new(
        standard_normal(rng),
        standard_normal(rng),
        standard_normal(rng),
        standard_normal(rng),
    );
    let uq = nalgebra::UnitQuaternion::from_quaternion(q);
    RotationMatrix(*uq.to_rotation_matrix().matrix())
}

/// Uniformly distributed direction on the unit sphere.
pub fn random_unit_vector<R: Rng>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::new(standard_normal(rng), standard_normal(rng), standard_normal(rng));
        let n = v.norm();
        if n > 1e-9 {
            return v / n;
        }
    }
}

/// Box-Muller standard normal draw.
pub(crate) fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
