use std::collections::BTreeMap;
use std::sync::Arc;

use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;

use catpose_client::protocol::*;
use catpose_core::datagen::{
    builtin_priors, perturb_predictions, render_scene_files, synth_scenes,
};
use catpose_core::evaluation::{ap_curves, evaluate_report, render_table, Category};
use catpose_core::geometry::{Mat3, RotationMatrix};
use catpose_core::io::records::{cloud_from_rows, SplitRecord, TransformRecord};
use catpose_core::io::to_json_string;
use catpose_core::losses;
use catpose_core::registration::ransac_fit;
use catpose_core::symmetry::map_rotation;
use catpose_core::{Error as CoreError, Result as CoreResult};

use crate::AppState;

pub(crate) struct ApiError {
    kind: ErrorKind,
    message: String,
}

impl From<CoreError> for ApiError {
    fn from(err: CoreError) -> Self {
        let kind = if err.is_invalid_input() {
            ErrorKind::InvalidInput
        } else {
            ErrorKind::AlgorithmFailure
        };
        ApiError { kind, message: err.to_string() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match self.kind {
            ErrorKind::InvalidInput => StatusCode::BAD_REQUEST,
            ErrorKind::AlgorithmFailure => StatusCode::UNPROCESSABLE_ENTITY,
            ErrorKind::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(ErrorBody { kind: self.kind, message: self.message })).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

/// Runs a CPU-bound job on the state's rayon pool without blocking the
/// async runtime thread.
async fn run<T, F>(state: Arc<AppState>, job: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce() -> CoreResult<T> + Send + 'static,
{
    match tokio::task::spawn_blocking(move || state.run(job)).await {
        Ok(result) => result.map(Json).map_err(ApiError::from),
        Err(join_err) => Err(ApiError {
            kind: ErrorKind::Internal,
            message: format!("worker failed: {join_err}"),
        }),
    }
}

pub(crate) async fn health() -> Json<HealthResponse> {
    Json(HealthResponse { status: "ok".into() })
}

pub(crate) async fn symmetry_table() -> Json<SymmetryTableResponse> {
    Json(SymmetryTableResponse { entries: catpose_core::symmetry::symmetry_table() })
}

pub(crate) async fn fit(
    State(state): State<Arc<AppState>>,
    Json(request): Json<FitRequest>,
) -> ApiResult<FitResponse> {
    run(state, move || {
        let corr = request.correspondences.to_set()?;
        let fit = ransac_fit(&corr, &request.params)?;
        let inlier_count = fit.inlier_count();
        Ok(FitResponse {
            transform: TransformRecord::from_transform(&fit.transform),
            inlier_count,
            inlier_ratio: inlier_count as f64 / corr.len() as f64,
            inlier_rms: fit.inlier_rms,
            iterations_run: fit.iterations_run,
            inlier_mask: fit.inlier_mask,
        })
    })
    .await
}

pub(crate) async fn map_rot(
    State(state): State<Arc<AppState>>,
    Json(request): Json<MapRotRequest>,
) -> ApiResult<MapRotResponse> {
    run(state, move || {
        let r = request.rotation;
        let rotation = RotationMatrix::try_new(Mat3::new(
            r[0], r[1], r[2], //
            r[3], r[4], r[5], //
            r[6], r[7], r[8],
        ))?;
        let result = map_rotation(&rotation);
        Ok(MapRotResponse {
            theta_hat: result.theta_hat,
            s_hat: flatten(result.s_hat.matrix()),
            mapped_rotation: flatten(result.mapped_rotation.matrix()),
            ambiguous: result.ambiguous,
        })
    })
    .await
}

fn flatten(m: &Mat3) -> [f64; 9] {
    [
        m[(0, 0)], m[(0, 1)], m[(0, 2)],
        m[(1, 0)], m[(1, 1)], m[(1, 2)],
        m[(2, 0)], m[(2, 1)], m[(2, 2)],
    ]
}

pub(crate) async fn losses(
    State(state): State<Arc<AppState>>,
    Json(request): Json<LossesRequest>,
) -> ApiResult<LossesResponse> {
    run(state, move || {
        use catpose_core::geometry::Frame;
        let m = cloud_from_rows(&request.m, Frame::Nocs)?;
        let m_gt = cloud_from_rows(&request.m_gt, Frame::Nocs)?;
        let p = cloud_from_rows(&request.p, Frame::Nocs)?;
        let p_gt = cloud_from_rows(&request.p_gt, Frame::Nocs)?;
        let a = request.a.to_matrix()?;
        let d = request.d.to_field()?;
        request.weights.validate()?;
        let cd = losses::loss_cd(&m, &m_gt)?;
        let corr = losses::loss_corr(&p, &p_gt)?;
        let entropy = losses::loss_entropy(&a);
        let def = losses::loss_def(&d);
        let w = request.weights;
        Ok(LossesResponse {
            cd,
            corr,
            entropy,
            def,
            total: w.lambda1 * cd + w.lambda2 * corr + w.lambda3 * entropy + w.lambda4 * def,
        })
    })
    .await
}

pub(crate) async fn eval(
    State(state): State<Arc<AppState>>,
    Json(request): Json<EvalRequest>,
) -> ApiResult<EvalResponse> {
    run(state, move || {
        let gts = request.gt.to_ground_truth()?;
        let dets = request.predictions.to_detections()?;
        let report = evaluate_report(&dets, &gts);
        let table = render_table(&report);
        let curves = ap_curves(&dets, &gts, &request.sweep)?;
        Ok(EvalResponse {
            report,
            table,
            curves: CurvesPayload {
                iou: curves.iou,
                rotation: curves.rotation,
                translation: curves.translation,
            },
        })
    })
    .await
}

pub(crate) async fn synth(
    State(state): State<Arc<AppState>>,
    Json(request): Json<SynthRequest>,
) -> ApiResult<SynthResponse> {
    run(state, move || {
        let priors = match &request.priors {
            None => builtin_priors(),
            Some(rows_by_category) => {
                let mut priors = BTreeMap::new();
                for (name, rows) in rows_by_category {
                    let category: Category = name.parse()?;
                    let cloud =
                        cloud_from_rows(rows, catpose_core::geometry::Frame::Nocs).map_err(
                            |e| CoreError::InvalidConfig {
                                reason: format!("prior for '{name}': {e}"),
                            },
                        )?;
                    priors.insert(category, cloud);
                }
                priors
            }
        };
        let output = synth_scenes(&request.config, &priors)?;
        let scenes = output
            .scenes
            .iter()
            .map(|scene| {
                let rendered = render_scene_files(scene)?;
                Ok(ScenePayload {
                    id: rendered.id,
                    depth_pgm: BASE64.encode(&rendered.depth_pgm),
                    mask_pgms: rendered.mask_pgms.iter().map(|m| BASE64.encode(m)).collect(),
                    gt_json: rendered.gt_json,
                    corr_jsons: rendered.corr_jsons,
                })
            })
            .collect::<CoreResult<Vec<_>>>()?;
        Ok(SynthResponse {
            gt_json: to_json_string(&output.ground_truth_record()),
            summary: SynthSummary {
                scenes: output.scenes.len(),
                instances: output.instance_count(),
            },
            scenes,
        })
    })
    .await
}

pub(crate) async fn perturb(
    State(state): State<Arc<AppState>>,
    Json(request): Json<PerturbRequest>,
) -> ApiResult<PerturbResponse> {
    run(state, move || {
        let gts = request.gt.to_ground_truth()?;
        let dets = perturb_predictions(&gts, &request.spec, request.seed)?;
        Ok(PerturbResponse { predictions: SplitRecord::from_detections(&dets) })
    })
    .await
}
