use super::{DepthImage, InstanceMask};
use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, Frame, Point3, PointCloud};

/// Lifts masked valid-depth pixels to camera-frame points
/// ((u−cx)·z/fx, (v−cy)·z/fy, z), z in meters, in row-major pixel order.
pub fn backproject(
    depth: &DepthImage,
    mask: &InstanceMask,
    k: &CameraIntrinsics,
) -> Result<PointCloud> {
    if !mask.matches_dimensions(depth) {
        return Err(Error::DimensionMismatch {
            detail: format!(
                "depth {}x{} vs mask {}x{}",
                depth.width(),
                depth.height(),
                mask.width(),
                mask.height()
            ),
        });
    }
    let mut points = Vec::new();
    for v in 0..depth.height() {
        for u in 0..depth.width() {
            let d = depth.get(u, v);
            if d == 0 || !mask.get(u, v) {
                continue;
            }
            let z = d as f64 / 1000.0;
            points.push(Point3::new(
                (u as f64 - k.cx) * z / k.fx,
                (v as f64 - k.cy) * z / k.fy,
                z,
            ));
        }
    }
    if points.is_empty() {
        return Err(Error::NoValidPixels);
    }
    Ok(PointCloud::new_unchecked(points, Frame::Camera))
}

/// Splats camera-frame point clouds into a z-buffer depth map (nearest point
/// wins a pixel) and per-cloud ownership masks.
pub fn render_depth(
    clouds: &[PointCloud],
    k: &CameraIntrinsics,
    width: usize,
    height: usize,
) -> Result<(DepthImage, Vec<InstanceMask>)> {
    let mut depth = DepthImage::zeros(width, height)?;
    let mut owner: Vec<Option<usize>> = vec![None; width * height];
    let mut zbuf = vec![f64::INFINITY; width * height];
    for (index, cloud) in clouds.iter().enumerate() {
        for p in cloud.points() {
            if p.z <= 0.0 {
                continue;
            }
            let u = (k.fx * p.x / p.z + k.cx).round();
            let v = (k.fy * p.y / p.z + k.cy).round();
            if u < 0.0 || v < 0.0 || u >= width as f64 || v >= height as f64 {
                continue;
            }
            let (u, v) = (u as usize, v as usize);
            let slot = v * width + u;
            if p.z < zbuf[slot] {
                zbuf[slot] = p.z;
                owner[slot] = Some(index);
                let mm = (p.z * 1000.0).round().clamp(1.0, 65535.0) as u16;
                depth.set(u, v, mm);
            }
        }
    }
    let masks = (0..clouds.len())
        .map(|index| {
            InstanceMask::new(width, height, owner.iter().map(|o| *o == Some(index)).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((depth, masks))
}
