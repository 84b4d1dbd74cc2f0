//! End-to-end exercise of the HTTP surface through the client crate against
//! a server spawned on an ephemeral port.

use approx::assert_abs_diff_eq;
use catpose_client::protocol::*;
use catpose_client::{Client, ClientError};
use catpose_core::datagen::{synth_scenes, SynthSceneConfig};
use catpose_core::io::records::{
    CorrespondenceRecord, DeformationRecord, MatrixRecord, SplitRecord,
};
use catpose_core::losses::LossWeights;
use catpose_core::registration::RansacParams;
use catpose_service::spawn_ephemeral;

fn client() -> (catpose_service::ServerHandle, Client) {
    let handle = spawn_ephemeral(2).expect("spawn service");
    let client = Client::new(handle.base_url());
    (handle, client)
}

fn oracle_split(seed: u64) -> SplitRecord {
    let cfg = SynthSceneConfig {
        num_scenes: 4,
        instances_per_scene: 2,
        points_per_instance: 128,
        seed,
        ..Default::default()
    };
    let output = synth_scenes(&cfg, &catpose_core::datagen::builtin_priors()).unwrap();
    output.ground_truth_record()
}

#[test]
fn health_and_symmetry_table() {
    let (_handle, client) = client();
    assert_eq!(client.health().unwrap().status, "ok");
    let table = client.symmetry_table().unwrap();
    assert_eq!(table.entries.len(), 6);
    assert_eq!(table.entries[0].category, "bottle");
    assert_eq!(table.entries[0].rule, "y_axis_continuous");
}

#[test]
fn fit_round_trip_recovers_synthetic_transform() {
    let (_handle, client) = client();
    let cfg = SynthSceneConfig {
        num_scenes: 1,
        instances_per_scene: 1,
        points_per_instance: 200,
        seed: 9,
        ..Default::default()
    };
    let output = synth_scenes(&cfg, &catpose_core::datagen::builtin_priors()).unwrap();
    let inst = &output.scenes[0].instances[0];
    let set = catpose_core::registration::CorrespondenceSet::new(
        inst.nocs_points.clone(),
        inst.observed.clone(),
    )
    .unwrap();
    let request = FitRequest {
        correspondences: CorrespondenceRecord::from_set(&set, None),
        params: RansacParams::default(),
    };
    let response = client.fit(&request).unwrap();
    assert_eq!(response.inlier_count, 200);
    assert_abs_diff_eq!(response.transform.scale, inst.transform.scale(), epsilon = 1e-9);
    let same = client.fit(&request).unwrap();
    assert_eq!(response, same);
}

#[test]
fn fit_error_mapping() {
    let (_handle, client) = client();
    // 4 correspondences < sample_size: invalid input
    let small = FitRequest {
        correspondences: CorrespondenceRecord {
            src: vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            dst: vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            outlier_mask: None,
        },
        params: RansacParams::default(),
    };
    match client.fit(&small) {
        Err(ClientError::Api { kind: ErrorKind::InvalidInput, .. }) => {}
        other => panic!("expected invalid input, got {other:?}"),
    }

    // random garbage with a sub-resolution threshold: consensus failure
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(3);
    let mut random_rows =
        |n: usize, s: f64| -> Vec<[f64; 3]> {
            (0..n)
                .map(|_| {
                    [
                        rng.random_range(-s..s),
                        rng.random_range(-s..s),
                        rng.random_range(-s..s),
                    ]
                })
                .collect()
        };
    let garbage = FitRequest {
        correspondences: CorrespondenceRecord {
            src: random_rows(40, 0.5),
            dst: random_rows(40, 3.0),
            outlier_mask: None,
        },
        params: RansacParams {
            inlier_fraction_of_diameter: 0.001,
            ..Default::default()
        },
    };
    match client.fit(&garbage) {
        Err(ClientError::Api { kind: ErrorKind::AlgorithmFailure, message }) => {
            assert!(message.contains("consensus"), "{message}");
        }
        other => panic!("expected algorithm failure, got {other:?}"),
    }
}

#[test]
fn map_rot_endpoint() {
    let (_handle, client) = client();
    let theta: f64 = 0.5;
    let (s, c) = theta.sin_cos();
    let response = client
        .map_rot(&MapRotRequest { rotation: [c, 0.0, -s, 0.0, 1.0, 0.0, s, 0.0, c] })
        .unwrap();
    assert_abs_diff_eq!(response.theta_hat, -theta, epsilon = 1e-12);
    for (i, v) in response.mapped_rotation.iter().enumerate() {
        let expect = if i % 4 == 0 { 1.0 } else { 0.0 };
        assert_abs_diff_eq!(*v, expect, epsilon = 1e-12);
    }
    // non-rotation input
    match client.map_rot(&MapRotRequest { rotation: [1.0; 9] }) {
        Err(ClientError::Api { kind: ErrorKind::InvalidInput, .. }) => {}
        other => panic!("expected invalid input, got {other:?}"),
    }
}

#[test]
fn losses_endpoint_matches_library() {
    let (_handle, client) = client();
    let request = LossesRequest {
        m: vec![[0.0, 0.0, 0.0], [0.2, 0.0, 0.0]],
        m_gt: vec![[0.0, 0.0, 0.0], [0.2, 0.0, 0.0]],
        p: vec![[0.1, 0.0, 0.0]],
        p_gt: vec![[0.0, 0.0, 0.0]],
        a: MatrixRecord { nv: 1, nc: 2, data: vec![0.5, 0.5] },
        d: DeformationRecord { nc: 2, data: vec![0.0; 6] },
        weights: LossWeights::default(),
    };
    let response = client.losses(&request).unwrap();
    assert_eq!(response.cd, 0.0);
    assert_abs_diff_eq!(response.corr, 0.05, epsilon = 1e-12);
    assert_abs_diff_eq!(response.entropy, 2f64.ln(), epsilon = 1e-12);
    assert_eq!(response.def, 0.0);
    assert_abs_diff_eq!(
        response.total,
        1.0 * 0.05 + 1e-4 * 2f64.ln(),
        epsilon = 1e-12
    );

    // invariant violation: row does not sum to 1
    let bad = LossesRequest {
        a: MatrixRecord { nv: 1, nc: 2, data: vec![0.9, 0.9] },
        ..request
    };
    match client.losses(&bad) {
        Err(ClientError::Api { kind: ErrorKind::InvalidInput, message }) => {
            assert!(message.contains("row"), "{message}");
        }
        other => panic!("expected invalid input, got {other:?}"),
    }
}

#[test]
fn eval_and_perturb_endpoints() {
    let (_handle, client) = client();
    let gt = oracle_split(21);

    let echo = client
        .perturb(&PerturbRequest {
            gt: gt.clone(),
            spec: Default::default(),
            seed: 5,
        })
        .unwrap();
    let response = client
        .eval(&EvalRequest {
            gt: gt.clone(),
            predictions: echo.predictions,
            sweep: Default::default(),
        })
        .unwrap();
    for metric in &response.report.metrics {
        assert_abs_diff_eq!(metric.mean_ap, 100.0, epsilon = 1e-9);
    }
    assert!(response.table.contains("category"));
    assert!(!response.curves.iou.is_empty());

    // missing score: schema violation names the record
    match client.eval(&EvalRequest { gt: gt.clone(), predictions: gt, sweep: Default::default() })
    {
        Err(ClientError::Api { kind: ErrorKind::InvalidInput, message }) => {
            assert!(message.contains("score"), "{message}");
        }
        other => panic!("expected invalid input, got {other:?}"),
    }
}

#[test]
fn synth_endpoint_is_deterministic_and_decodable() {
    let (_handle, client) = client();
    let request = SynthRequest {
        config: SynthSceneConfig {
            num_scenes: 2,
            instances_per_scene: 2,
            points_per_instance: 64,
            seed: 33,
            ..Default::default()
        },
        priors: None,
    };
    let a = client.synth(&request).unwrap();
    let b = client.synth(&request).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.summary.scenes, 2);
    assert_eq!(a.summary.instances, 4);
    assert_eq!(a.scenes.len(), 2);

    use base64::engine::general_purpose::STANDARD as BASE64;
    use base64::Engine;
    let depth_bytes = BASE64.decode(&a.scenes[0].depth_pgm).unwrap();
    let depth = catpose_core::io::pgm::decode_depth(&depth_bytes).unwrap();
    assert_eq!(depth.width(), catpose_core::datagen::SYNTH_WIDTH);
    let split: SplitRecord = serde_json::from_str(&a.gt_json).unwrap();
    assert_eq!(split.images.len(), 2);
    split.to_ground_truth().unwrap();

    // zero scenes rejected
    let bad = SynthRequest {
        config: SynthSceneConfig { num_scenes: 0, ..Default::default() },
        priors: None,
    };
    match client.synth(&bad) {
        Err(ClientError::Api { kind: ErrorKind::InvalidInput, .. }) => {}
        other => panic!("expected invalid input, got {other:?}"),
    }
}
