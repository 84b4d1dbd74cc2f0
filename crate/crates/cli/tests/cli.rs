//! Black-box tests of the CLI binary: subcommand behavior, exit codes and
//! output determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn catpose(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_catpose"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_exit(output: &Output, code: i32) {
    assert_eq!(
        output.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

fn synth_dataset(dir: &Path, scenes: usize, points: usize, seed: u64) -> PathBuf {
    let cfg = dir.join("cfg.json");
    write(
        &cfg,
        &format!(
            r#"{{"num_scenes": {scenes}, "instances_per_scene": 2, "points_per_instance": {points}, "seed": {seed}}}"#
        ),
    );
    let out = dir.join(format!("ds_{seed}"));
    let result = catpose(&["synth", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_exit(&result, 0);
    out
}

/// Reads every file under a directory into (relative path, bytes), sorted.
fn snapshot_tree(root: &Path) -> Vec<(String, Vec<u8>)> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<(String, Vec<u8>)>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    let mut out = Vec::new();
    walk(root, root, &mut out);
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

#[test]
fn fit_recovers_synthetic_pose_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let ds = synth_dataset(dir.path(), 1, 128, 3);
    let corr = ds.join("scenes/scene_0000/corr_0.json");

    let a = catpose(&["fit", corr.to_str().unwrap(), "--seed", "11"]);
    assert_exit(&a, 0);
    let b = catpose(&["fit", corr.to_str().unwrap(), "--seed", "11"]);
    assert_eq!(a.stdout, b.stdout, "same seed must reproduce identical bytes");

    // recovered transform matches the generator's ground truth
    let fit: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    let gt: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(ds.join("gt.json")).unwrap()).unwrap();
    let inst = &gt["images"][0]["instances"][0];
    let scale = fit["transform"]["scale"].as_f64().unwrap();
    assert!((scale - inst["scale"].as_f64().unwrap()).abs() < 1e-9);
    for (i, row) in fit["transform"]["rotation"].as_array().unwrap().iter().enumerate() {
        for (j, v) in row.as_array().unwrap().iter().enumerate() {
            let expect = inst["rotation"][3 * i + j].as_f64().unwrap();
            assert!((v.as_f64().unwrap() - expect).abs() < 1e-9);
        }
    }
    assert_eq!(fit["inlier_count"].as_u64().unwrap(), 128);
}

#[test]
fn fit_insufficient_correspondences_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let corr = dir.path().join("tiny.json");
    write(&corr, r#"{"src": [[0,0,0],[1,0,0],[0,1,0]], "dst": [[0,0,0],[1,0,0],[0,1,0]]}"#);
    let out = catpose(&["fit", corr.to_str().unwrap()]);
    assert_exit(&out, 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("sample_size"));
}

#[test]
fn fit_no_consensus_is_algorithm_failure() {
    let dir = tempfile::tempdir().unwrap();
    let corr = dir.path().join("garbage.json");
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(8);
    let rows = |rng: &mut rand_chacha::ChaCha12Rng, s: f64| -> String {
        let v: Vec<String> = (0..40)
            .map(|_| {
                format!(
                    "[{},{},{}]",
                    rng.random_range(-s..s),
                    rng.random_range(-s..s),
                    rng.random_range(-s..s)
                )
            })
            .collect();
        v.join(",")
    };
    let src = rows(&mut rng, 0.5);
    let dst = rows(&mut rng, 3.0);
    write(&corr, &format!(r#"{{"src": [{src}], "dst": [{dst}]}}"#));
    let out = catpose(&["fit", corr.to_str().unwrap(), "--inlier-frac", "0.001"]);
    assert_exit(&out, 2);
}

#[test]
fn eval_perfect_predictions_print_100_everywhere() {
    let dir = tempfile::tempdir().unwrap();
    let ds = synth_dataset(dir.path(), 3, 64, 21);
    let gt = ds.join("gt.json");
    let pred = dir.path().join("pred.json");
    let out = catpose(&["perturb", gt.to_str().unwrap(), "--out", pred.to_str().unwrap()]);
    assert_exit(&out, 0);
    let eval = catpose(&["eval", gt.to_str().unwrap(), pred.to_str().unwrap()]);
    assert_exit(&eval, 0);
    let table = String::from_utf8_lossy(&eval.stdout);
    let mean_row = table.lines().last().unwrap();
    assert!(mean_row.starts_with("mean"));
    assert_eq!(mean_row.matches("100.0").count(), 7, "{table}");
}

#[test]
fn eval_empty_predictions_zero_everywhere_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let ds = synth_dataset(dir.path(), 2, 64, 22);
    let pred = dir.path().join("empty.json");
    write(&pred, r#"{"images": []}"#);
    let eval = catpose(&["eval", ds.join("gt.json").to_str().unwrap(), pred.to_str().unwrap()]);
    assert_exit(&eval, 0);
    let table = String::from_utf8_lossy(&eval.stdout);
    let mean_row = table.lines().last().unwrap();
    assert_eq!(mean_row.matches("0.0").count(), 7, "{table}");
}

#[test]
fn eval_schema_violation_names_record() {
    let dir = tempfile::tempdir().unwrap();
    let ds = synth_dataset(dir.path(), 1, 64, 23);
    let bad = dir.path().join("bad.json");
    write(
        &bad,
        r#"{"images": [{"id": "scene_0000", "instances": [{"category": "spoon", "score": 1.0,
            "scale": 0.1, "rotation": [1,0,0,0,1,0,0,0,1], "translation": [0,0,1],
            "extents": [0.5,0.5,0.5]}]}]}"#,
    );
    let eval = catpose(&["eval", ds.join("gt.json").to_str().unwrap(), bad.to_str().unwrap()]);
    assert_exit(&eval, 1);
    let err = String::from_utf8_lossy(&eval.stderr);
    assert!(err.contains("scene_0000") && err.contains("spoon"), "{err}");
}

#[test]
fn synth_zero_scenes_rejected_and_default_config_covers_categories() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("zero.json");
    write(&cfg, r#"{"num_scenes": 0}"#);
    let out = catpose(&["synth", cfg.to_str().unwrap(), "--out", dir.path().join("x").to_str().unwrap()]);
    assert_exit(&out, 1);

    let cfg = dir.path().join("default.json");
    write(&cfg, r#"{"points_per_instance": 32, "num_scenes": 2}"#);
    let ds = dir.path().join("ds");
    let out = catpose(&["synth", cfg.to_str().unwrap(), "--out", ds.to_str().unwrap()]);
    assert_exit(&out, 0);
    let gt = std::fs::read_to_string(ds.join("gt.json")).unwrap();
    for category in ["bottle", "bowl", "camera", "can", "laptop", "mug"] {
        assert!(gt.contains(category), "missing {category}");
    }
}

#[test]
fn synth_with_priors_dir_uses_ply_files() {
    let dir = tempfile::tempdir().unwrap();
    let priors = dir.path().join("priors");
    let out = catpose(&["priors", "--out", priors.to_str().unwrap()]);
    assert_exit(&out, 0);
    for category in ["bottle", "bowl", "camera", "can", "laptop", "mug"] {
        assert!(priors.join(format!("{category}.ply")).is_file());
    }
    let cfg = dir.path().join("cfg.json");
    write(
        &cfg,
        &format!(
            r#"{{"num_scenes": 1, "points_per_instance": 32, "priors_dir": "{}"}}"#,
            priors.display()
        ),
    );
    let ds = dir.path().join("ds");
    let run = catpose(&["synth", cfg.to_str().unwrap(), "--out", ds.to_str().unwrap()]);
    assert_exit(&run, 0);
    assert!(ds.join("gt.json").is_file());
}

#[test]
fn losses_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let ply1 = "ply\nformat ascii 1.0\nelement vertex 1\nproperty double x\nproperty double y\nproperty double z\nend_header\n0 0 0\n";
    // perfect prediction with a soft A: everything zero except entropy
    write(&dir.path().join("m.ply"), ply1);
    write(&dir.path().join("m_gt.ply"), ply1);
    write(&dir.path().join("p.ply"), ply1);
    write(&dir.path().join("p_gt.ply"), ply1);
    write(&dir.path().join("a.json"), r#"{"nv": 1, "nc": 1, "data": [1.0]}"#);
    write(&dir.path().join("d.json"), r#"{"nc": 1, "data": [0, 0, 0]}"#);
    let out = catpose(&["losses", dir.path().to_str().unwrap()]);
    assert_exit(&out, 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["cd"].as_f64().unwrap(), 0.0);
    assert_eq!(v["corr"].as_f64().unwrap(), 0.0);
    assert_eq!(v["entropy"].as_f64().unwrap(), 0.0);
    assert_eq!(v["def"].as_f64().unwrap(), 0.0);
    assert_eq!(v["total"].as_f64().unwrap(), 0.0);

    // known hand-computed values
    let m_gt = "ply\nformat ascii 1.0\nelement vertex 1\nproperty double x\nproperty double y\nproperty double z\nend_header\n0 0 0.1\n";
    let p = "ply\nformat ascii 1.0\nelement vertex 1\nproperty double x\nproperty double y\nproperty double z\nend_header\n0.2 0 0\n";
    write(&dir.path().join("m_gt.ply"), m_gt);
    write(&dir.path().join("p.ply"), p);
    write(&dir.path().join("d.json"), r#"{"nc": 1, "data": [3, 4, 0]}"#);
    let out = catpose(&["losses", dir.path().to_str().unwrap()]);
    assert_exit(&out, 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["cd"].as_f64().unwrap() - 0.02).abs() < 1e-12);
    assert!((v["corr"].as_f64().unwrap() - 0.15).abs() < 1e-12);
    assert_eq!(v["entropy"].as_f64().unwrap(), 0.0);
    assert!((v["def"].as_f64().unwrap() - 5.0).abs() < 1e-12);
    // 5·0.02 + 1·0.15 + 1e-4·0 + 0.01·5
    assert!((v["total"].as_f64().unwrap() - 0.3).abs() < 1e-12);

    // malformed A rows
    write(&dir.path().join("a.json"), r#"{"nv": 1, "nc": 1, "data": [0.4]}"#);
    let out = catpose(&["losses", dir.path().to_str().unwrap()]);
    assert_exit(&out, 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("row"));

    // missing file
    std::fs::remove_file(dir.path().join("d.json")).unwrap();
    let out = catpose(&["losses", dir.path().to_str().unwrap()]);
    assert_exit(&out, 1);
}

#[test]
fn map_rot_subcommand() {
    let id = catpose(&["map-rot", "1", "0", "0", "0", "1", "0", "0", "0", "1"]);
    assert_exit(&id, 0);
    let v: serde_json::Value = serde_json::from_slice(&id.stdout).unwrap();
    assert_eq!(v["theta_hat"].as_f64().unwrap(), 0.0);

    // y-rotation by 30°: mapped rotation collapses to the identity
    let theta = 30f64.to_radians();
    let (s, c) = theta.sin_cos();
    let args: Vec<String> = [c, 0.0, -s, 0.0, 1.0, 0.0, s, 0.0, c]
        .iter()
        .map(|x| x.to_string())
        .collect();
    let mut argv = vec!["map-rot".to_string()];
    argv.extend(args);
    let argv_ref: Vec<&str> = argv.iter().map(String::as_str).collect();
    let out = catpose(&argv_ref);
    assert_exit(&out, 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let mapped = v["mapped_rotation"].as_array().unwrap();
    for (i, entry) in mapped.iter().enumerate() {
        let expect = if i % 4 == 0 { 1.0 } else { 0.0 };
        assert!((entry.as_f64().unwrap() - expect).abs() < 1e-12);
    }

    let bad = catpose(&["map-rot", "1", "1", "1", "1", "1", "1", "1", "1", "1"]);
    assert_exit(&bad, 1);
}

#[test]
fn synth_tree_is_byte_identical_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    write(
        &cfg,
        r#"{"num_scenes": 3, "instances_per_scene": 2, "points_per_instance": 64, "seed": 9,
            "noise_sigma": 0.001, "outlier_fraction": 0.1}"#,
    );
    let mut snapshots = Vec::new();
    for (label, threads) in [("a", "1"), ("b", "2"), ("c", "1")] {
        let out_dir = dir.path().join(label);
        let out = catpose(&[
            "--threads",
            threads,
            "synth",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_exit(&out, 0);
        snapshots.push((snapshot_tree(&out_dir), out.stdout));
    }
    assert_eq!(snapshots[0], snapshots[1], "thread count changed the output");
    assert_eq!(snapshots[0], snapshots[2], "re-run changed the output");
}
