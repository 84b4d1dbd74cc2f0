//! Command-line front end. Every subcommand is a client of the HTTP service:
//! either an external one (`--server`) or an ephemeral in-process instance
//! spawned for the duration of the command.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use clap::{Args, Parser, Subcommand};

use catpose_client::protocol::*;
use catpose_client::{Client, ClientError};
use catpose_core::datagen::{
    builtin_priors, load_prior, write_rendered_scenes, PerturbSpec, RenderedScene,
    SynthSceneConfig,
};
use catpose_core::evaluation::SweepSpec;
use catpose_core::io::records::{CorrespondenceRecord, SplitRecord};
use catpose_core::io::{ply, read_json, to_json_string, write_text};
use catpose_core::losses::LossWeights;
use catpose_core::registration::RansacParams;

const EXIT_INPUT_ERROR: u8 = 1;
const EXIT_ALGORITHM_FAILURE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "catpose",
    about = "Category-level 6D object pose and size estimation: robust pose fitting, loss \
             evaluation, symmetry-aware mAP benchmarking and synthetic ground-truth generation",
    version
)]
struct Cli {
    /// Base URL of a running service; an in-process instance is spawned
    /// when omitted.
    #[arg(long, global = true)]
    server: Option<String>,

    /// Worker threads for the in-process service (0 = automatic).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Robustly fit a similarity transform to a correspondence file.
    Fit(FitArgs),
    /// Score predictions against ground truth and emit the mAP report.
    Eval(EvalArgs),
    /// Generate a synthetic scene dataset with exact ground truth.
    Synth(SynthArgs),
    /// Evaluate all training losses from a directory of input files.
    Losses(LossesArgs),
    /// Canonicalize a rotation against the y-axis symmetry group.
    MapRot(MapRotArgs),
    /// Derive predictions from ground truth with exact, seeded errors.
    Perturb(PerturbArgs),
    /// Print the compiled-in category symmetry table.
    Symmetry,
    /// Write the built-in category priors as PLY files.
    Priors(PriorsArgs),
    /// Run the HTTP service in the foreground.
    Serve(ServeArgs),
}

#[derive(Args)]
struct FitArgs {
    /// Correspondence JSON: {"src": [[x,y,z],...], "dst": [[x,y,z],...]}.
    corr_file: PathBuf,
    /// RANSAC hypothesis size.
    #[arg(long, default_value_t = 5)]
    sample_size: usize,
    /// Maximum RANSAC iterations.
    #[arg(long, default_value_t = 128)]
    ransac_iters: usize,
    /// Inlier threshold as a fraction of the observed bounding-box diagonal.
    #[arg(long, default_value_t = 0.10)]
    inlier_frac: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct EvalArgs {
    gt_file: PathBuf,
    pred_file: PathBuf,
    /// Directory for report.json, report.txt and the curve CSVs.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    iou_step: f64,
    #[arg(long, default_value_t = 5.0)]
    deg_step: f64,
    #[arg(long, default_value_t = 0.5)]
    cm_step: f64,
}

#[derive(Args)]
struct SynthArgs {
    /// Scene generator configuration, JSON.
    config_file: PathBuf,
    /// Output dataset directory.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the seed in the configuration file.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct LossesArgs {
    /// Directory with m.ply, m_gt.ply, p.ply, p_gt.ply, a.json, d.json.
    inputs_dir: PathBuf,
    #[arg(long, default_value_t = 5.0)]
    lambda1: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda2: f64,
    #[arg(long, default_value_t = 1e-4)]
    lambda3: f64,
    #[arg(long, default_value_t = 0.01)]
    lambda4: f64,
}

#[derive(Args)]
struct MapRotArgs {
    /// Nine row-major rotation matrix entries.
    #[arg(num_args = 9, value_names = ["R11", "R12", "R13", "R21", "R22", "R23", "R31", "R32", "R33"])]
    rotation: Vec<f64>,
}

#[derive(Args)]
struct PerturbArgs {
    gt_file: PathBuf,
    /// Output predictions file.
    #[arg(long)]
    out: PathBuf,
    /// Rotation error in degrees about a seeded random axis.
    #[arg(long, default_value_t = 0.0)]
    rot_deg: f64,
    /// Translation error in centimeters along a seeded random direction.
    #[arg(long, default_value_t = 0.0)]
    trans_cm: f64,
    /// Scale multiplier.
    #[arg(long, default_value_t = 1.0)]
    scale_factor: f64,
    /// Rotate symmetric instances about their own y-axis only.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    symmetric_safe: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct PriorsArgs {
    /// Output directory for <category>.ply files.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ServeArgs {
    /// Listen address.
    #[arg(long, default_value = "127.0.0.1:7381")]
    addr: String,
}

struct CliFailure {
    code: u8,
    message: String,
}

impl CliFailure {
    fn input(message: impl Into<String>) -> Self {
        CliFailure { code: EXIT_INPUT_ERROR, message: message.into() }
    }
}

impl From<catpose_core::Error> for CliFailure {
    fn from(err: catpose_core::Error) -> Self {
        CliFailure {
            code: if err.is_invalid_input() { EXIT_INPUT_ERROR } else { EXIT_ALGORITHM_FAILURE },
            message: err.to_string(),
        }
    }
}

impl From<ClientError> for CliFailure {
    fn from(err: ClientError) -> Self {
        let code = match err.kind() {
            Some(ErrorKind::AlgorithmFailure) => EXIT_ALGORITHM_FAILURE,
            _ => EXIT_INPUT_ERROR,
        };
        CliFailure { code, message: err.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind as ClapKind;
            let code = match err.kind() {
                ClapKind::DisplayHelp | ClapKind::DisplayVersion => 0,
                _ => EXIT_INPUT_ERROR,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

/// A client bound to either an external server or an ephemeral in-process
/// one; the handle keeps the latter alive.
struct Endpoint {
    client: Client,
    _server: Option<catpose_service::ServerHandle>,
}

fn endpoint(cli: &Cli) -> Result<Endpoint, CliFailure> {
    match &cli.server {
        Some(url) => Ok(Endpoint { client: Client::new(url.clone()), _server: None }),
        None => {
            let handle = catpose_service::spawn_ephemeral(cli.threads)
                .map_err(|e| CliFailure::input(format!("failed to start service: {e}")))?;
            let client = Client::new(handle.base_url());
            Ok(Endpoint { client, _server: Some(handle) })
        }
    }
}

fn run(cli: Cli) -> Result<(), CliFailure> {
    match &cli.command {
        Command::Serve(args) => {
            let addr: std::net::SocketAddr = args
                .addr
                .parse()
                .map_err(|e| CliFailure::input(format!("invalid --addr '{}': {e}", args.addr)))?;
            let runtime = tokio::runtime::Builder::new_current_thread()
                .enable_all()
                .build()
                .map_err(|e| CliFailure::input(format!("runtime: {e}")))?;
            runtime
                .block_on(catpose_service::serve(addr, cli.threads))
                .map_err(|e| CliFailure::input(format!("serve: {e}")))
        }
        Command::Priors(args) => cmd_priors(args),
        Command::Symmetry => {
            let endpoint = endpoint(&cli)?;
            let table = endpoint.client.symmetry_table()?;
            print!("{}", to_json_string(&table));
            Ok(())
        }
        Command::Fit(args) => cmd_fit(&cli, args),
        Command::Eval(args) => cmd_eval(&cli, args),
        Command::Synth(args) => cmd_synth(&cli, args),
        Command::Losses(args) => cmd_losses(&cli, args),
        Command::MapRot(args) => cmd_map_rot(&cli, args),
        Command::Perturb(args) => cmd_perturb(&cli, args),
    }
}

/// Stdout shape for `fit`: the pose plus inlier statistics.
#[derive(serde::Serialize)]
struct FitStdout {
    transform: catpose_core::io::records::TransformRecord,
    inlier_count: usize,
    inlier_ratio: f64,
    inlier_rms: f64,
    iterations_run: usize,
}

fn cmd_fit(cli: &Cli, args: &FitArgs) -> Result<(), CliFailure> {
    let correspondences: CorrespondenceRecord = read_json(&args.corr_file)?;
    let request = FitRequest {
        correspondences,
        params: RansacParams {
            sample_size: args.sample_size,
            max_iterations: args.ransac_iters,
            inlier_fraction_of_diameter: args.inlier_frac,
            seed: args.seed,
        },
    };
    let endpoint = endpoint(cli)?;
    let response = endpoint.client.fit(&request)?;
    print!(
        "{}",
        to_json_string(&FitStdout {
            transform: response.transform,
            inlier_count: response.inlier_count,
            inlier_ratio: response.inlier_ratio,
            inlier_rms: response.inlier_rms,
            iterations_run: response.iterations_run,
        })
    );
    Ok(())
}

fn cmd_eval(cli: &Cli, args: &EvalArgs) -> Result<(), CliFailure> {
    let gt: SplitRecord = read_json(&args.gt_file)?;
    let predictions: SplitRecord = read_json(&args.pred_file)?;
    let request = EvalRequest {
        gt,
        predictions,
        sweep: SweepSpec {
            iou_step: args.iou_step,
            deg_step: args.deg_step,
            cm_step: args.cm_step,
        },
    };
    let endpoint = endpoint(cli)?;
    let response = endpoint.client.eval(&request)?;
    print!("{}", response.table);
    if let Some(out) = &args.out {
        std::fs::create_dir_all(out)
            .map_err(|e| CliFailure::input(format!("cannot create {}: {e}", out.display())))?;
        write_text(&out.join("report.json"), &to_json_string(&response.report))?;
        write_text(&out.join("report.txt"), &response.table)?;
        use catpose_core::evaluation::CurveTable;
        write_text(&out.join("curves_iou.csv"), &CurveTable::to_csv(&response.curves.iou))?;
        write_text(
            &out.join("curves_rotation.csv"),
            &CurveTable::to_csv(&response.curves.rotation),
        )?;
        write_text(
            &out.join("curves_translation.csv"),
            &CurveTable::to_csv(&response.curves.translation),
        )?;
    }
    Ok(())
}

fn cmd_synth(cli: &Cli, args: &SynthArgs) -> Result<(), CliFailure> {
    let mut config: SynthSceneConfig = read_json(&args.config_file)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let priors = match &config.priors_dir {
        None => None,
        Some(dir) => Some(load_priors_dir(Path::new(dir), &config.categories)?),
    };
    let request = SynthRequest { config, priors };
    let endpoint = endpoint(cli)?;
    let response = endpoint.client.synth(&request)?;
    let scenes = response
        .scenes
        .iter()
        .map(|scene| {
            Ok(RenderedScene {
                id: scene.id.clone(),
                depth_pgm: BASE64
                    .decode(&scene.depth_pgm)
                    .map_err(|e| CliFailure::input(format!("bad depth payload: {e}")))?,
                mask_pgms: scene
                    .mask_pgms
                    .iter()
                    .map(|m| {
                        BASE64
                            .decode(m)
                            .map_err(|e| CliFailure::input(format!("bad mask payload: {e}")))
                    })
                    .collect::<Result<_, _>>()?,
                gt_json: scene.gt_json.clone(),
                corr_jsons: scene.corr_jsons.clone(),
            })
        })
        .collect::<Result<Vec<_>, CliFailure>>()?;
    write_rendered_scenes(&args.out, &response.gt_json, &scenes)?;
    print!("{}", to_json_string(&response.summary));
    Ok(())
}

fn load_priors_dir(
    dir: &Path,
    categories: &[String],
) -> Result<BTreeMap<String, Vec<[f64; 3]>>, CliFailure> {
    let mut priors = BTreeMap::new();
    for category in categories {
        let path = dir.join(format!("{category}.ply"));
        let loaded = load_prior(&path)?;
        for warning in &loaded.warnings {
            eprintln!("warning: {warning}");
        }
        priors.insert(
            category.clone(),
            loaded.cloud.points().iter().map(|p| [p.x, p.y, p.z]).collect(),
        );
    }
    Ok(priors)
}

fn cmd_losses(cli: &Cli, args: &LossesArgs) -> Result<(), CliFailure> {
    let dir = &args.inputs_dir;
    let read_cloud = |name: &str| -> Result<Vec<[f64; 3]>, CliFailure> {
        let cloud = ply::read_ply(&dir.join(name), catpose_core::geometry::Frame::Nocs)?;
        Ok(cloud.points().iter().map(|p| [p.x, p.y, p.z]).collect())
    };
    let request = LossesRequest {
        m: read_cloud("m.ply")?,
        m_gt: read_cloud("m_gt.ply")?,
        p: read_cloud("p.ply")?,
        p_gt: read_cloud("p_gt.ply")?,
        a: read_json(&dir.join("a.json"))?,
        d: read_json(&dir.join("d.json"))?,
        weights: LossWeights {
            lambda1: args.lambda1,
            lambda2: args.lambda2,
            lambda3: args.lambda3,
            lambda4: args.lambda4,
        },
    };
    let endpoint = endpoint(cli)?;
    let response = endpoint.client.losses(&request)?;
    print!("{}", to_json_string(&response));
    Ok(())
}

fn cmd_map_rot(cli: &Cli, args: &MapRotArgs) -> Result<(), CliFailure> {
    let rotation: [f64; 9] = args
        .rotation
        .as_slice()
        .try_into()
        .map_err(|_| CliFailure::input("expected exactly 9 rotation entries"))?;
    let endpoint = endpoint(cli)?;
    let response = endpoint.client.map_rot(&MapRotRequest { rotation })?;
    print!("{}", to_json_string(&response));
    Ok(())
}

fn cmd_perturb(cli: &Cli, args: &PerturbArgs) -> Result<(), CliFailure> {
    let gt: SplitRecord = read_json(&args.gt_file)?;
    let request = PerturbRequest {
        gt,
        spec: PerturbSpec {
            rot_deg: args.rot_deg,
            trans_cm: args.trans_cm,
            scale_factor: args.scale_factor,
            symmetric_safe: args.symmetric_safe,
        },
        seed: args.seed,
    };
    let endpoint = endpoint(cli)?;
    let response = endpoint.client.perturb(&request)?;
    write_text(&args.out, &to_json_string(&response.predictions))?;
    Ok(())
}

fn cmd_priors(args: &PriorsArgs) -> Result<(), CliFailure> {
    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliFailure::input(format!("cannot create {}: {e}", args.out.display())))?;
    for (category, cloud) in builtin_priors() {
        ply::write_ply(&args.out.join(format!("{category}.ply")), &cloud)?;
    }
    Ok(())
}
