//! JSON record schemas: similarity transforms, correspondence sets, split
//! files of detections/ground truth, and loss-evaluator inputs.

use crate::error::{Error, Result};
use crate::evaluation::{Category, Detection, GroundTruthInstance};
use crate::geometry::{Frame, Mat3, Point3, PointCloud, RotationMatrix, SimilarityTransform, Vec3};
use crate::losses::{CorrespondenceMatrix, DeformationField};
use crate::registration::CorrespondenceSet;

/// {"scale": s, "rotation": [[..],[..],[..]], "translation": [tx,ty,tz]}
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TransformRecord {
    pub scale: f64,
    /// Row-major 3x3.
    pub rotation: [[f64; 3]; 3],
    pub translation: [f64; 3],
}

impl TransformRecord {
    pub fn from_transform(t: &SimilarityTransform) -> Self {
        let m = t.rotation().matrix();
        TransformRecord {
            scale: t.scale(),
            rotation: [
                [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
                [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
                [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
            ],
            translation: [t.translation().x, t.translation().y, t.translation().z],
        }
    }

    pub fn to_transform(&self) -> Result<SimilarityTransform> {
        let rotation = RotationMatrix::try_new(rotation_from_rows(&self.rotation))?;
        SimilarityTransform::try_new(
            self.scale,
            rotation,
            Vec3::new(self.translation[0], self.translation[1], self.translation[2]),
        )
    }
}

fn rotation_from_rows(rows: &[[f64; 3]; 3]) -> Mat3 {
    Mat3::new(
        rows[0][0], rows[0][1], rows[0][2], //
        rows[1][0], rows[1][1], rows[1][2], //
        rows[2][0], rows[2][1], rows[2][2],
    )
}

fn rotation_from_flat(flat: &[f64; 9]) -> Mat3 {
    Mat3::new(
        flat[0], flat[1], flat[2], //
        flat[3], flat[4], flat[5], //
        flat[6], flat[7], flat[8],
    )
}

fn rotation_to_flat(m: &Mat3) -> [f64; 9] {
    [
        m[(0, 0)], m[(0, 1)], m[(0, 2)],
        m[(1, 0)], m[(1, 1)], m[(1, 2)],
        m[(2, 0)], m[(2, 1)], m[(2, 2)],
    ]
}

/// {"src": [[x,y,z],...], "dst": [[x,y,z],...]} with an optional sidecar
/// outlier mask written by the synthetic scene generator.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CorrespondenceRecord {
    pub src: Vec<[f64; 3]>,
    pub dst: Vec<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outlier_mask: Option<Vec<bool>>,
}

impl CorrespondenceRecord {
    pub fn from_set(set: &CorrespondenceSet, outlier_mask: Option<Vec<bool>>) -> Self {
        CorrespondenceRecord {
            src: set.src().points().iter().map(|p| [p.x, p.y, p.z]).collect(),
            dst: set.dst().points().iter().map(|p| [p.x, p.y, p.z]).collect(),
            outlier_mask,
        }
    }

    pub fn to_set(&self) -> Result<CorrespondenceSet> {
        let src = PointCloud::new(
            self.src.iter().map(|p| Point3::new(p[0], p[1], p[2])).collect(),
            Frame::Nocs,
        )?;
        let dst = PointCloud::new(
            self.dst.iter().map(|p| Point3::new(p[0], p[1], p[2])).collect(),
            Frame::Camera,
        )?;
        CorrespondenceSet::new(src, dst)
    }
}

/// One instance inside a split file. Ground truth omits `score`;
/// predictions must carry it. `handle_visible` is mug-only.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct InstanceRecord {
    pub category: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    pub scale: f64,
    /// Row-major 3x3, flattened.
    pub rotation: [f64; 9],
    pub translation: [f64; 3],
    /// Object size in NOCS units.
    pub extents: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub handle_visible: Option<bool>,
}

impl InstanceRecord {
    fn pose(&self, location: &str) -> Result<SimilarityTransform> {
        let rotation =
            RotationMatrix::try_new(rotation_from_flat(&self.rotation)).map_err(|e| {
                Error::InvalidRecord { location: location.into(), reason: e.to_string() }
            })?;
        SimilarityTransform::try_new(
            self.scale,
            rotation,
            Vec3::new(self.translation[0], self.translation[1], self.translation[2]),
        )
        .map_err(|e| Error::InvalidRecord { location: location.into(), reason: e.to_string() })
    }
}

/// {"images": [{"id": .., "instances": [..]}]}
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ImageRecord {
    pub id: String,
    pub instances: Vec<InstanceRecord>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SplitRecord {
    pub images: Vec<ImageRecord>,
}

impl SplitRecord {
    pub fn to_ground_truth(&self) -> Result<Vec<GroundTruthInstance>> {
        let mut out = Vec::new();
        for image in &self.images {
            for (k, inst) in image.instances.iter().enumerate() {
                let location = format!("image '{}', instance {k}", image.id);
                let category: Category = inst.category.parse().map_err(|e: Error| {
                    Error::InvalidRecord { location: location.clone(), reason: e.to_string() }
                })?;
                let pose = inst.pose(&location)?;
                out.push(
                    GroundTruthInstance::try_new(
                        image.id.clone(),
                        category,
                        pose,
                        Vec3::new(inst.extents[0], inst.extents[1], inst.extents[2]),
                        inst.handle_visible,
                    )
                    .map_err(|e| Error::InvalidRecord {
                        location: location.clone(),
                        reason: e.to_string(),
                    })?,
                );
            }
        }
        Ok(out)
    }

    pub fn to_detections(&self) -> Result<Vec<Detection>> {
        let mut out = Vec::new();
        for image in &self.images {
            for (k, inst) in image.instances.iter().enumerate() {
                let location = format!("image '{}', instance {k}", image.id);
                let category: Category = inst.category.parse().map_err(|e: Error| {
                    Error::InvalidRecord { location: location.clone(), reason: e.to_string() }
                })?;
                let score = inst.score.ok_or_else(|| Error::InvalidRecord {
                    location: location.clone(),
                    reason: "prediction is missing its score".into(),
                })?;
                let pose = inst.pose(&location)?;
                out.push(
                    Detection::try_new(
                        image.id.clone(),
                        category,
                        score,
                        pose,
                        Vec3::new(inst.extents[0], inst.extents[1], inst.extents[2]),
                    )
                    .map_err(|e| Error::InvalidRecord {
                        location: location.clone(),
                        reason: e.to_string(),
                    })?,
                );
            }
        }
        Ok(out)
    }

    /// Groups detections by image id in first-seen order.
    pub fn from_detections(dets: &[Detection]) -> Self {
        let mut images: Vec<ImageRecord> = Vec::new();
        for det in dets {
            let record = InstanceRecord {
                category: det.category.as_str().to_string(),
                score: Some(det.score),
                scale: det.pose.scale(),
                rotation: rotation_to_flat(det.pose.rotation().matrix()),
                translation: [
                    det.pose.translation().x,
                    det.pose.translation().y,
                    det.pose.translation().z,
                ],
                extents: [det.nocs_extents.x, det.nocs_extents.y, det.nocs_extents.z],
                handle_visible: None,
            };
            match images.iter_mut().find(|img| img.id == det.image_id) {
                Some(img) => img.instances.push(record),
                None => images
                    .push(ImageRecord { id: det.image_id.clone(), instances: vec![record] }),
            }
        }
        SplitRecord { images }
    }

    pub fn from_ground_truth(gts: &[GroundTruthInstance]) -> Self {
        let mut images: Vec<ImageRecord> = Vec::new();
        for gt in gts {
            let record = InstanceRecord {
                category: gt.category.as_str().to_string(),
                score: None,
                scale: gt.pose.scale(),
                rotation: rotation_to_flat(gt.pose.rotation().matrix()),
                translation: [
                    gt.pose.translation().x,
                    gt.pose.translation().y,
                    gt.pose.translation().z,
                ],
                extents: [gt.nocs_extents.x, gt.nocs_extents.y, gt.nocs_extents.z],
                handle_visible: gt.handle_visible,
            };
            match images.iter_mut().find(|img| img.id == gt.image_id) {
                Some(img) => img.instances.push(record),
                None => {
                    images.push(ImageRecord { id: gt.image_id.clone(), instances: vec![record] })
                }
            }
        }
        SplitRecord { images }
    }
}

/// Correspondence matrix file: {"nv": .., "nc": .., "data": [row-major]}.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MatrixRecord {
    pub nv: usize,
    pub nc: usize,
    pub data: Vec<f64>,
}

impl MatrixRecord {
    pub fn from_matrix(a: &CorrespondenceMatrix) -> Self {
        MatrixRecord { nv: a.nv(), nc: a.nc(), data: a.data().to_vec() }
    }

    pub fn to_matrix(&self) -> Result<CorrespondenceMatrix> {
        CorrespondenceMatrix::new(self.nv, self.nc, self.data.clone())
    }
}

/// Deformation field file: {"nc": .., "data": [row-major nc×3]}.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DeformationRecord {
    pub nc: usize,
    pub data: Vec<f64>,
}

impl DeformationRecord {
    pub fn from_field(d: &DeformationField) -> Self {
        DeformationRecord {
            nc: d.len(),
            data: d.displacements().iter().flat_map(|v| [v.x, v.y, v.z]).collect(),
        }
    }

    pub fn to_field(&self) -> Result<DeformationField> {
        if self.data.len() != self.nc * 3 {
            return Err(Error::DimensionMismatch {
                detail: format!(
                    "deformation field declares nc = {} but has {} values (need {})",
                    self.nc,
                    self.data.len(),
                    self.nc * 3
                ),
            });
        }
        DeformationField::new(
            self.data.chunks_exact(3).map(|c| Vec3::new(c[0], c[1], c[2])).collect(),
        )
    }
}

/// Point list for losses inputs traveling over the wire.
pub fn cloud_to_rows(cloud: &PointCloud) -> Vec<[f64; 3]> {
    cloud.points().iter().map(|p| [p.x, p.y, p.z]).collect()
}

pub fn cloud_from_rows(rows: &[[f64; 3]], frame: Frame) -> Result<PointCloud> {
    PointCloud::new(rows.iter().map(|r| Point3::new(r[0], r[1], r[2])).collect(), frame)
}
