//! Request/response bodies for the HTTP/JSON API. File-shaped payloads reuse
//! the core record schemas so the wire format and the on-disk format stay
//! identical.

use catpose_core::datagen::{PerturbSpec, SynthSceneConfig};
use catpose_core::evaluation::{CurvePoint, EvaluationReport, SweepSpec};
use catpose_core::io::records::{
    CorrespondenceRecord, DeformationRecord, MatrixRecord, SplitRecord, TransformRecord,
};
use catpose_core::losses::LossWeights;
use catpose_core::registration::RansacParams;
use catpose_core::symmetry::SymmetryTableEntry;

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct FitRequest {
    #[serde(flatten)]
    pub correspondences: CorrespondenceRecord,
    #[serde(default = "RansacParams::default")]
    pub params: RansacParams,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FitResponse {
    pub transform: TransformRecord,
    pub inlier_count: usize,
    pub inlier_ratio: f64,
    pub inlier_rms: f64,
    pub iterations_run: usize,
    pub inlier_mask: Vec<bool>,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct MapRotRequest {
    /// Row-major 3x3.
    pub rotation: [f64; 9],
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MapRotResponse {
    pub theta_hat: f64,
    pub s_hat: [f64; 9],
    pub mapped_rotation: [f64; 9],
    pub ambiguous: bool,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct LossesRequest {
    pub m: Vec<[f64; 3]>,
    pub m_gt: Vec<[f64; 3]>,
    pub p: Vec<[f64; 3]>,
    pub p_gt: Vec<[f64; 3]>,
    pub a: MatrixRecord,
    pub d: DeformationRecord,
    #[serde(default = "LossWeights::default")]
    pub weights: LossWeights,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LossesResponse {
    pub cd: f64,
    pub corr: f64,
    pub entropy: f64,
    pub def: f64,
    pub total: f64,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct EvalRequest {
    pub gt: SplitRecord,
    pub predictions: SplitRecord,
    #[serde(default = "SweepSpec::default")]
    pub sweep: SweepSpec,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EvalResponse {
    pub report: EvaluationReport,
    /// Fixed-width text table (category rows, threshold columns).
    pub table: String,
    pub curves: CurvesPayload,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CurvesPayload {
    pub iou: Vec<CurvePoint>,
    pub rotation: Vec<CurvePoint>,
    pub translation: Vec<CurvePoint>,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SynthRequest {
    #[serde(default = "SynthSceneConfig::default")]
    pub config: SynthSceneConfig,
    /// Priors resolved client-side (category → points); the service falls
    /// back to the built-in procedural priors when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub priors: Option<std::collections::BTreeMap<String, Vec<[f64; 3]>>>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SynthResponse {
    /// Content of the split-level gt.json, verbatim.
    pub gt_json: String,
    pub scenes: Vec<ScenePayload>,
    pub summary: SynthSummary,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SynthSummary {
    pub scenes: usize,
    pub instances: usize,
}

/// One scene's files, exactly as they land on disk (PGMs base64-encoded,
/// JSON contents verbatim) so a remote client writes a byte-identical tree.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ScenePayload {
    pub id: String,
    /// 16-bit binary PGM, base64.
    pub depth_pgm: String,
    /// 8-bit binary PGMs, base64, instance order.
    pub mask_pgms: Vec<String>,
    /// Content of the per-scene gt.json.
    pub gt_json: String,
    /// Contents of corr_<k>.json, instance order.
    pub corr_jsons: Vec<String>,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct PerturbRequest {
    pub gt: SplitRecord,
    #[serde(flatten)]
    pub spec: PerturbSpec,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PerturbResponse {
    pub predictions: SplitRecord,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SymmetryTableResponse {
    pub entries: Vec<SymmetryTableEntry>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HealthResponse {
    pub status: String,
}

/// Error body returned by the service for non-2xx statuses.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ErrorBody {
    pub kind: ErrorKind,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    /// Bad request content: schema violations, invalid parameters,
    /// unparseable geometry.
    InvalidInput,
    /// The algorithm ran and failed, e.g. RANSAC found no consensus.
    AlgorithmFailure,
    Internal,
}
