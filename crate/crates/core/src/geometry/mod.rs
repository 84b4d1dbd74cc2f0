//! Fundamental 3D types: point clouds, rotations, similarity transforms,
//! oriented boxes, camera intrinsics and point-cloud metrics.

mod chamfer;
mod cloud;
mod intrinsics;
mod obb;
mod transform;

pub use chamfer::{chamfer_distance, ChamferMode};
pub use cloud::{bbox_center, bbox_diameter, nocs_normalize, resample, Frame, PointCloud};
pub use intrinsics::CameraIntrinsics;
pub use obb::OrientedBox3D;
pub use transform::{
    random_rotation, random_unit_vector, transform_points, RotationMatrix, SimilarityTransform,
};
pub(crate) use transform::standard_normal;

/// 3D point, meters in camera frame or canonical units in NOCS frame.
pub type Point3 = nalgebra::Point3<f64>;
/// 3D vector.
pub type Vec3 = nalgebra::Vector3<f64>;
/// Dense 3x3 matrix.
pub type Mat3 = nalgebra::Matrix3<f64>;
