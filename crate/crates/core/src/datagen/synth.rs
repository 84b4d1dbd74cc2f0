//! Seeded synthetic scenes with exact ground truth: deformed priors posed in
//! front of a fixed camera, half-space-cropped to simulate single-view
//! depth, with optional Gaussian noise and gross outliers.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use super::backproject::render_depth;
use super::{DepthImage, InstanceMask};
use crate::error::{Error, Result};
use crate::evaluation::Category;
use crate::geometry::{
    random_rotation, random_unit_vector, resample, standard_normal, CameraIntrinsics, Frame, Mat3,
    Point3, PointCloud, SimilarityTransform, Vec3,
};
use crate::io::records::{
    CorrespondenceRecord, ImageRecord, InstanceRecord, SplitRecord, TransformRecord,
};
use crate::io::{pgm, to_json_string, write_bytes, write_text};
use crate::losses::DeformationField;
use crate::registration::CorrespondenceSet;

pub const SYNTH_WIDTH: usize = 320;
pub const SYNTH_HEIGHT: usize = 240;

/// Fixed camera for synthetic scenes.
pub fn synth_intrinsics() -> CameraIntrinsics {
    CameraIntrinsics::new(280.0, 280.0, 160.0, 120.0).expect("static intrinsics")
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct SynthSceneConfig {
    pub num_scenes: usize,
    pub categories: Vec<String>,
    pub instances_per_scene: usize,
    pub points_per_instance: usize,
    /// Standard deviation of per-coordinate Gaussian noise on observed
    /// points, meters.
    pub noise_sigma: f64,
    /// Fraction of observed points replaced by uniform samples inside the
    /// scene bounds; exactly ⌊fraction·N⌋ per instance.
    pub outlier_fraction: f64,
    /// (lo, hi) object scale (metric size of the unit-diagonal NOCS model).
    pub scale_range: (f64, f64),
    /// (lo, hi) camera-distance range, meters along +z.
    pub translation_range: (f64, f64),
    /// Peak amplitude of the smooth deformation field, NOCS units.
    pub deform_amplitude: f64,
    pub seed: u64,
    /// Directory of <category>.ply priors; built-in procedural priors when
    /// absent. Resolved by the caller, not by scene generation itself.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub priors_dir: Option<String>,
}

impl Default for SynthSceneConfig {
    fn default() -> Self {
        SynthSceneConfig {
            num_scenes: 10,
            categories: Category::ALL.iter().map(|c| c.as_str().to_string()).collect(),
            instances_per_scene: 3,
            points_per_instance: 1024,
            noise_sigma: 0.0,
            outlier_fraction: 0.0,
            scale_range: (0.08, 0.25),
            translation_range: (0.7, 1.4),
            deform_amplitude: 0.02,
            seed: 0,
            priors_dir: None,
        }
    }
}

impl SynthSceneConfig {
    pub fn validate(&self) -> Result<Vec<Category>> {
        let fail = |reason: String| Err(Error::InvalidConfig { reason });
        if self.num_scenes == 0 {
            return fail("num_scenes must be positive".into());
        }
        if self.instances_per_scene == 0 {
            return fail("instances_per_scene must be positive".into());
        }
        if self.points_per_instance < 3 {
            return fail("points_per_instance must be at least 3".into());
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return fail(format!("noise_sigma must be non-negative, got {}", self.noise_sigma));
        }
        if !(self.outlier_fraction.is_finite() && (0.0..1.0).contains(&self.outlier_fraction)) {
            return fail(format!(
                "outlier_fraction must be in [0, 1), got {}",
                self.outlier_fraction
            ));
        }
        for (name, (lo, hi)) in
            [("scale_range", self.scale_range), ("translation_range", self.translation_range)]
        {
            if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
                return fail(format!("{name} must be positive and ordered, got ({lo}, {hi})"));
            }
        }
        if !(self.deform_amplitude.is_finite() && self.deform_amplitude >= 0.0) {
            return fail(format!(
                "deform_amplitude must be non-negative, got {}",
                self.deform_amplitude
            ));
        }
        if self.categories.is_empty() {
            return fail("at least one category is required".into());
        }
        self.categories.iter().map(|c| c.parse()).collect()
    }
}

/// Everything known about one generated instance.
#[derive(Debug, Clone)]
pub struct SceneInstance {
    pub category: Category,
    pub handle_visible: Option<bool>,
    pub transform: SimilarityTransform,
    /// Tight bounding-box extents of the deformed model, NOCS units.
    pub nocs_extents: Vec3,
    /// Deformation applied to the prior (aligned with the prior's points).
    pub deformation: DeformationField,
    /// Exact NOCS coordinates of the observed points.
    pub nocs_points: PointCloud,
    /// Observed camera-frame points (noise and outliers applied).
    pub observed: PointCloud,
    pub outlier_mask: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct SceneData {
    pub id: String,
    pub depth: DepthImage,
    pub masks: Vec<InstanceMask>,
    pub instances: Vec<SceneInstance>,
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub scenes: Vec<SceneData>,
}

impl SynthOutput {
    pub fn instance_count(&self) -> usize {
        self.scenes.iter().map(|s| s.instances.len()).sum()
    }

    /// Split-level ground truth in the evaluation schema.
    pub fn ground_truth_record(&self) -> SplitRecord {
        SplitRecord {
            images: self
                .scenes
                .iter()
                .map(|scene| ImageRecord {
                    id: scene.id.clone(),
                    instances: scene.instances.iter().map(instance_record).collect(),
                })
                .collect(),
        }
    }
}

fn instance_record(inst: &SceneInstance) -> InstanceRecord {
    let t = TransformRecord::from_transform(&inst.transform);
    InstanceRecord {
        category: inst.category.as_str().to_string(),
        score: None,
        scale: t.scale,
        rotation: [
            t.rotation[0][0], t.rotation[0][1], t.rotation[0][2],
            t.rotation[1][0], t.rotation[1][1], t.rotation[1][2],
            t.rotation[2][0], t.rotation[2][1], t.rotation[2][2],
        ],
        translation: t.translation,
        extents: [inst.nocs_extents.x, inst.nocs_extents.y, inst.nocs_extents.z],
        handle_visible: inst.handle_visible,
    }
}

/// Generates all scenes. Parallel over scenes with per-scene seeds
/// (seed XOR scene index), so output is independent of scheduling.
pub fn synth_scenes(
    cfg: &SynthSceneConfig,
    priors: &BTreeMap<Category, PointCloud>,
) -> Result<SynthOutput> {
    let categories = cfg.validate()?;
    for category in &categories {
        if !priors.contains_key(category) {
            return Err(Error::InvalidConfig {
                reason: format!("no prior supplied for category '{category}'"),
            });
        }
    }
    let scenes: Vec<SceneData> = (0..cfg.num_scenes)
        .into_par_iter()
        .map(|scene_index| generate_scene(cfg, &categories, priors, scene_index))
        .collect::<Result<_>>()?;
    Ok(SynthOutput { scenes })
}

fn generate_scene(
    cfg: &SynthSceneConfig,
    categories: &[Category],
    priors: &BTreeMap<Category, PointCloud>,
    scene_index: usize,
) -> Result<SceneData> {
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed ^ scene_index as u64);
    let mut instances = Vec::with_capacity(cfg.instances_per_scene);
    for k in 0..cfg.instances_per_scene {
        let global = scene_index * cfg.instances_per_scene + k;
        let category = categories[global % categories.len()];
        let prior = &priors[&category];
        instances.push(generate_instance(cfg, category, prior, &mut rng)?);
    }
    let observed: Vec<PointCloud> = instances.iter().map(|i| i.observed.clone()).collect();
    let (depth, masks) = render_depth(&observed, &synth_intrinsics(), SYNTH_WIDTH, SYNTH_HEIGHT)?;
    Ok(SceneData { id: format!("scene_{scene_index:04}"), depth, masks, instances })
}

fn generate_instance(
    cfg: &SynthSceneConfig,
    category: Category,
    prior: &PointCloud,
    rng: &mut ChaCha12Rng,
) -> Result<SceneInstance> {
    // Smooth low-frequency deformation: a·sin(W·p + φ), component-wise.
    let amplitude = cfg.deform_amplitude * rng.random_range(0.5..1.0);
    let mut freq = Mat3::zeros();
    for r in 0..3 {
        for c in 0..3 {
            freq[(r, c)] = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        }
    }
    let phase = Vec3::new(
        rng.random_range(0.0..std::f64::consts::TAU),
        rng.random_range(0.0..std::f64::consts::TAU),
        rng.random_range(0.0..std::f64::consts::TAU),
    );
    let deformation = DeformationField::new(
        prior
            .points()
            .iter()
            .map(|p| (freq * p.coords + phase).map(|x| amplitude * x.sin()))
            .collect(),
    )?;
    let model = crate::losses::reconstruct_model(prior, &deformation)?;
    let (lo, hi) = model.bbox();
    let nocs_extents = hi - lo;

    let handle_visible = (category == Category::Mug).then(|| rng.random_bool(0.5));

    let scale = rng.random_range(cfg.scale_range.0..=cfg.scale_range.1);
    let rotation = random_rotation(rng);
    let tz = rng.random_range(cfg.translation_range.0..=cfg.translation_range.1);
    let tx = rng.random_range(-0.22..0.22) * tz;
    let ty = rng.random_range(-0.16..0.16) * tz;
    let transform = SimilarityTransform::try_new(scale, rotation, Vec3::new(tx, ty, tz))?;

    // Partial view: keep the half of the model on one side of a random
    // plane through the median, then resample to the working point count.
    let normal = random_unit_vector(rng);
    let mut dots: Vec<f64> = model.points().iter().map(|p| normal.dot(&p.coords)).collect();
    let mut sorted = dots.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = sorted[sorted.len() / 2];
    let partial: Vec<Point3> = model
        .points()
        .iter()
        .zip(dots.drain(..))
        .filter(|(_, d)| *d >= median)
        .map(|(p, _)| *p)
        .collect();
    let partial_cloud = PointCloud::new_unchecked(partial, Frame::Nocs);
    let nocs_points = resample(&partial_cloud, cfg.points_per_instance, rng.next_u64())?;

    let clean = transform.apply_cloud(&nocs_points).with_frame(Frame::Camera);
    let mut observed: Vec<Point3> = clean.points().to_vec();
    if cfg.noise_sigma > 0.0 {
        for p in &mut observed {
            for k in 0..3 {
                p[k] += cfg.noise_sigma * standard_normal(rng);
            }
        }
    }
    let n = observed.len();
    let n_outliers = (cfg.outlier_fraction * n as f64).floor() as usize;
    let mut outlier_mask = vec![false; n];
    if n_outliers > 0 {
        let z_hi = cfg.translation_range.1 + 0.3;
        for i in rand::seq::index::sample(rng, n, n_outliers) {
            outlier_mask[i] = true;
            observed[i] = Point3::new(
                rng.random_range(-0.4..0.4),
                rng.random_range(-0.3..0.3),
                rng.random_range(0.2..z_hi),
            );
        }
    }

    Ok(SceneInstance {
        category,
        handle_visible,
        transform,
        nocs_extents,
        deformation,
        nocs_points,
        observed: PointCloud::new_unchecked(observed, Frame::Camera),
        outlier_mask,
    })
}

/// Per-scene ground-truth record carrying the scene's full generation state
/// (pose, extents, deformation field) for one image.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SceneGtRecord {
    pub id: String,
    pub instances: Vec<SceneGtInstanceRecord>,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SceneGtInstanceRecord {
    pub category: String,
    pub scale: f64,
    pub rotation: [f64; 9],
    pub translation: [f64; 3],
    pub extents: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub handle_visible: Option<bool>,
    /// Deformation of the category prior, row per prior point.
    pub deformation: Vec<[f64; 3]>,
}

/// The exact bytes of one scene directory's files.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedScene {
    pub id: String,
    pub depth_pgm: Vec<u8>,
    /// Instance order.
    pub mask_pgms: Vec<Vec<u8>>,
    /// Content of the per-scene gt.json.
    pub gt_json: String,
    /// Contents of corr_<k>.json, instance order.
    pub corr_jsons: Vec<String>,
}

/// Serializes one scene into the exact file contents `write_scenes` stores,
/// so remote callers can reproduce an identical tree.
pub fn render_scene_files(scene: &SceneData) -> Result<RenderedScene> {
    let gt = SceneGtRecord {
        id: scene.id.clone(),
        instances: scene
            .instances
            .iter()
            .map(|inst| {
                let base = instance_record(inst);
                SceneGtInstanceRecord {
                    category: base.category,
                    scale: base.scale,
                    rotation: base.rotation,
                    translation: base.translation,
                    extents: base.extents,
                    handle_visible: base.handle_visible,
                    deformation: inst
                        .deformation
                        .displacements()
                        .iter()
                        .map(|d| [d.x, d.y, d.z])
                        .collect(),
                }
            })
            .collect(),
    };
    let corr_jsons = scene
        .instances
        .iter()
        .map(|inst| {
            let set = CorrespondenceSet::new(inst.nocs_points.clone(), inst.observed.clone())?;
            let record = CorrespondenceRecord::from_set(&set, Some(inst.outlier_mask.clone()));
            Ok(to_json_string(&record))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RenderedScene {
        id: scene.id.clone(),
        depth_pgm: pgm::encode_depth(&scene.depth),
        mask_pgms: scene.masks.iter().map(pgm::encode_mask).collect(),
        gt_json: to_json_string(&gt),
        corr_jsons,
    })
}

/// Writes the dataset tree:
/// out/gt.json plus scenes/<id>/{depth.pgm, mask_<k>.pgm, gt.json, corr_<k>.json}.
pub fn write_scenes(out_dir: &Path, output: &SynthOutput) -> Result<()> {
    let rendered = output
        .scenes
        .iter()
        .map(render_scene_files)
        .collect::<Result<Vec<_>>>()?;
    write_rendered_scenes(out_dir, &to_json_string(&output.ground_truth_record()), &rendered)
}

/// Writes an already-serialized dataset; shared by the local path and the
/// service client so both produce byte-identical trees.
pub fn write_rendered_scenes(
    out_dir: &Path,
    gt_json: &str,
    scenes: &[RenderedScene],
) -> Result<()> {
    let mkdir = |p: &Path| {
        std::fs::create_dir_all(p).map_err(|e| Error::io(p.display().to_string(), e))
    };
    mkdir(out_dir)?;
    write_text(&out_dir.join("gt.json"), gt_json)?;
    for scene in scenes {
        let dir = out_dir.join("scenes").join(&scene.id);
        mkdir(&dir)?;
        write_bytes(&dir.join("depth.pgm"), &scene.depth_pgm)?;
        for (k, mask) in scene.mask_pgms.iter().enumerate() {
            write_bytes(&dir.join(format!("mask_{k}.pgm")), mask)?;
        }
        write_text(&dir.join("gt.json"), &scene.gt_json)?;
        for (k, corr) in scene.corr_jsons.iter().enumerate() {
            write_text(&dir.join(format!("corr_{k}.json")), corr)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::builtin_priors;
    use crate::registration::{ransac_fit, RansacParams};
    use approx::assert_abs_diff_eq;

    fn small_cfg() -> SynthSceneConfig {
        SynthSceneConfig {
            num_scenes: 3,
            instances_per_scene: 2,
            points_per_instance: 256,
            seed: 42,
            ..Default::default()
        }
    }

    #[test]
    fn ground_truth_is_self_consistent() {
        let output = synth_scenes(&small_cfg(), &builtin_priors()).unwrap();
        for scene in &output.scenes {
            for inst in &scene.instances {
                // noise-free config: observed == transform(nocs) exactly
                let moved = inst.transform.apply_cloud(&inst.nocs_points);
                for (a, b) in moved.points().iter().zip(inst.observed.points()) {
                    assert_eq!(a, b);
                }
            }
        }
    }

    #[test]
    fn noise_free_correspondences_recover_ground_truth() {
        let output = synth_scenes(&small_cfg(), &builtin_priors()).unwrap();
        let inst = &output.scenes[0].instances[0];
        let corr =
            CorrespondenceSet::new(inst.nocs_points.clone(), inst.observed.clone()).unwrap();
        let fit = ransac_fit(&corr, &RansacParams::default()).unwrap();
        assert_abs_diff_eq!(fit.transform.scale(), inst.transform.scale(), epsilon = 1e-9);
        assert_abs_diff_eq!(
            (fit.transform.rotation().matrix() - inst.transform.rotation().matrix()).abs().max(),
            0.0,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            (fit.transform.translation() - inst.transform.translation()).norm(),
            0.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn same_seed_reproduces_bytes() {
        let cfg = small_cfg();
        let priors = builtin_priors();
        let a = synth_scenes(&cfg, &priors).unwrap();
        let b = synth_scenes(&cfg, &priors).unwrap();
        assert_eq!(a.scenes.len(), b.scenes.len());
        for (x, y) in a.scenes.iter().zip(&b.scenes) {
            assert_eq!(x.depth, y.depth);
            assert_eq!(x.masks, y.masks);
            assert_eq!(
                to_json_string(&a.ground_truth_record()),
                to_json_string(&b.ground_truth_record())
            );
            for (i, j) in x.instances.iter().zip(&y.instances) {
                assert_eq!(i.observed.points(), j.observed.points());
                assert_eq!(i.outlier_mask, j.outlier_mask);
            }
        }
        let c = synth_scenes(&SynthSceneConfig { seed: 43, ..cfg }, &priors).unwrap();
        assert_ne!(
            a.scenes[0].instances[0].observed.points(),
            c.scenes[0].instances[0].observed.points()
        );
    }

    #[test]
    fn outlier_count_is_exact() {
        let cfg = SynthSceneConfig {
            outlier_fraction: 0.3,
            ..small_cfg()
        };
        let output = synth_scenes(&cfg, &builtin_priors()).unwrap();
        for scene in &output.scenes {
            for inst in &scene.instances {
                let flagged = inst.outlier_mask.iter().filter(|&&b| b).count();
                assert_eq!(flagged, (0.3 * cfg.points_per_instance as f64).floor() as usize);
            }
        }
    }

    #[test]
    fn default_config_covers_all_six_categories() {
        let cfg = SynthSceneConfig { num_scenes: 2, seed: 7, ..Default::default() };
        let output = synth_scenes(&cfg, &builtin_priors()).unwrap();
        let mut seen: Vec<Category> = output
            .scenes
            .iter()
            .flat_map(|s| s.instances.iter().map(|i| i.category))
            .collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 6);
    }

    #[test]
    fn zero_scenes_is_rejected() {
        let cfg = SynthSceneConfig { num_scenes: 0, ..Default::default() };
        assert!(matches!(
            synth_scenes(&cfg, &builtin_priors()),
            Err(Error::InvalidConfig { .. })
        ));
    }

    #[test]
    fn missing_prior_is_rejected() {
        let cfg = SynthSceneConfig { categories: vec!["mug".into()], ..small_cfg() };
        let mut priors = builtin_priors();
        priors.remove(&Category::Mug);
        assert!(matches!(synth_scenes(&cfg, &priors), Err(Error::InvalidConfig { .. })));
    }

    #[test]
    fn written_tree_has_expected_layout() {
        let dir = tempfile::tempdir().unwrap();
        let output = synth_scenes(&small_cfg(), &builtin_priors()).unwrap();
        write_scenes(dir.path(), &output).unwrap();
        assert!(dir.path().join("gt.json").is_file());
        for scene in &output.scenes {
            let scene_dir = dir.path().join("scenes").join(&scene.id);
            assert!(scene_dir.join("depth.pgm").is_file());
            assert!(scene_dir.join("gt.json").is_file());
            for k in 0..scene.instances.len() {
                assert!(scene_dir.join(format!("mask_{k}.pgm")).is_file());
                assert!(scene_dir.join(format!("corr_{k}.json")).is_file());
            }
        }
        // split gt parses back through the evaluation schema
        let split: SplitRecord =
            crate::io::read_json(&dir.path().join("gt.json")).unwrap();
        let gts = split.to_ground_truth().unwrap();
        assert_eq!(gts.len(), output.instance_count());
    }
}
