//! `qca` — command-line surface over the channel-simulation library:
//! closed-form channel derivation, damping-family channels, region-volume
//! estimation, containment checks, point-cloud export, and the self-check
//! battery. All output is versioned JSON (or CSV for point clouds); every
//! command is deterministic given identical flags including `--seed`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qca_core::channels::{gad, ChannelRecord, GadParams};
use qca_core::envsim::{EnvParams, EnvReport};
use qca_core::geometry::{
    containment_check, export_cloud, gad_cloud, gad_point, gad_volume, single_env_cloud,
    single_env_volume_membership, volume_ratio, CloudFormat, PointCloud, VoxelGrid,
    DEFAULT_MEM_CAP,
};
use qca_core::tolerances::PARAM_PATTERN;
use qca_core::validation;

const SCHEMA_AFFINE: &str = "qca.affine/1";
const SCHEMA_GAD: &str = "qca.gad/1";
const SCHEMA_VOLUME: &str = "qca.volume/1";
const SCHEMA_GRID: &str = "qca.grid/1";
const SCHEMA_RATIO: &str = "qca.ratio/1";
const SCHEMA_CONTAINMENT: &str = "qca.containment/1";
const SCHEMA_CLOUD: &str = "qca.cloud/1";
const SCHEMA_VALIDATE: &str = "qca.validate/1";

#[derive(Parser)]
#[command(
    name = "qca",
    version,
    about = "Qubit-channel simulation: exact channel derivation and Monte Carlo channel geometry"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derive the affine channel for one interaction-parameter point
    Affine(AffineArgs),
    /// Derive the four-parameter damping channel for one parameter set
    Gad(GadArgs),
    /// Estimate a region volume on a voxel grid
    Volume(VolumeArgs),
    /// Ratio of the exact surface-region volume to the sampled image volume
    Ratio(RatioArgs),
    /// Fraction of surface samples landing inside the sampled image
    Containment(ContainmentArgs),
    /// Export sampled region points for plotting
    Cloud(CloudArgs),
    /// Run the library's self-check battery
    Validate(ValidateArgs),
}

/// Region whose geometry a command operates on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Region {
    /// Image of the four-parameter damping family (forward-sampled)
    Gad,
    /// Single-environment surface region (exact membership)
    SingleEnv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct AffineArgs {
    /// First coupling angle (radians unless --degrees)
    #[arg(long, allow_negative_numbers = true)]
    alpha: f64,
    /// Second coupling angle (radians unless --degrees)
    #[arg(long, allow_negative_numbers = true)]
    beta: f64,
    /// Third coupling angle (radians unless --degrees)
    #[arg(long, allow_negative_numbers = true)]
    gamma: f64,
    /// Environment mixedness in [0, 1]
    #[arg(long)]
    lambda: f64,
    /// Environment polar angle (radians unless --degrees)
    #[arg(long, allow_negative_numbers = true)]
    xi: f64,
    /// Environment azimuthal angle (radians unless --degrees)
    #[arg(long, allow_negative_numbers = true)]
    eta: f64,
    /// Interpret all angle flags in degrees
    #[arg(long)]
    degrees: bool,
    /// Require the canonical factorization block (needs alpha = gamma)
    #[arg(long)]
    canonical: bool,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    format: ReportFormat,
    /// Write the report to a file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GadArgs {
    /// Weight of the first decay branch, in [0, 1]
    #[arg(long)]
    eps0: f64,
    /// Weight of the first excitation branch, in [0, 1]
    #[arg(long)]
    eps2: f64,
    /// Damping strength of the first decay branch, in [0, 1]
    #[arg(long)]
    gamma0: f64,
    /// Damping strength of the first excitation branch, in [0, 1]
    #[arg(long)]
    gamma2: f64,
    /// Write the report to a file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VolumeArgs {
    #[arg(value_enum)]
    region: Region,
    /// Accepted forward samples (image sampling; >= 10000)
    #[arg(long)]
    samples: Option<u64>,
    /// Voxel grid resolution per axis, in [50, 1000]
    #[arg(long, default_value_t = 200)]
    grid: usize,
    #[arg(long, env = "QCA_SEED", default_value_t = 7)]
    seed: u64,
    /// Refine membership integration with 2x2x2 subsampling per cell
    #[arg(long)]
    subsample: bool,
    /// Write the estimate to a file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the occupancy grid as JSON
    #[arg(long)]
    grid_out: Option<PathBuf>,
    /// Memory cap in bytes for voxel bitsets
    #[arg(long, default_value_t = DEFAULT_MEM_CAP)]
    mem_cap: u64,
    /// Worker threads (never changes results)
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct RatioArgs {
    /// Accepted forward samples for the image estimate (>= 10000)
    #[arg(long, default_value_t = 10_000_000)]
    samples: u64,
    /// Voxel grid resolution per axis, in [50, 1000]
    #[arg(long, default_value_t = 200)]
    grid: usize,
    #[arg(long, env = "QCA_SEED", default_value_t = 7)]
    seed: u64,
    /// Write the report to a file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Memory cap in bytes for voxel bitsets
    #[arg(long, default_value_t = DEFAULT_MEM_CAP)]
    mem_cap: u64,
    /// Worker threads (never changes results)
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct ContainmentArgs {
    /// Surface sample count to test
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    /// Voxel grid resolution per axis, in [50, 200]
    #[arg(long, default_value_t = 200)]
    grid: usize,
    /// Accepted forward samples filling the image grid (>= 10000000)
    #[arg(long, default_value_t = 10_000_000)]
    gad_samples: u64,
    #[arg(long, env = "QCA_SEED", default_value_t = 7)]
    seed: u64,
    /// Write the report to a file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Memory cap in bytes for voxel bitsets
    #[arg(long, default_value_t = DEFAULT_MEM_CAP)]
    mem_cap: u64,
    /// Worker threads (never changes results)
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct CloudArgs {
    #[arg(value_enum)]
    region: Region,
    /// Number of points to export
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    #[arg(long, env = "QCA_SEED", default_value_t = 7)]
    seed: u64,
    /// Output file for the point cloud
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = ReportFormat::Csv)]
    format: ReportFormat,
    /// Worker threads (never changes results)
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Run the reduced battery (100 draws per check instead of 1000)
    #[arg(long)]
    quick: bool,
    #[arg(long, env = "QCA_SEED", default_value_t = 7)]
    seed: u64,
    /// Write the report to a file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (never changes results)
    #[arg(long)]
    workers: Option<usize>,
}

/// Command failure split by exit code: usage errors (2) are reported before
/// any computation starts; runtime errors (1) happen during it.
enum Failure {
    Usage(String),
    Runtime(String),
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Failure::Usage(msg.into())
    }
}

fn runtime(e: qca_core::Error) -> Failure {
    Failure::Runtime(e.to_string())
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

fn render_json<T: Serialize>(schema: &str, body: &T) -> Result<String, Failure> {
    let mut text = serde_json::to_string_pretty(&Envelope { schema, body })
        .map_err(|e| Failure::Runtime(format!("serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

fn deliver(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display()))),
    }
}

fn emit<T: Serialize>(schema: &str, body: &T, out: Option<&Path>) -> Result<(), Failure> {
    deliver(&render_json(schema, body)?, out)
}

/// Run `f` on a dedicated pool of `workers` threads (or the default pool).
/// All sampling is counter-addressed, so the thread count never changes
/// results.
fn with_workers<T: Send>(
    workers: Option<usize>,
    f: impl FnOnce() -> Result<T, Failure> + Send,
) -> Result<T, Failure> {
    match workers {
        None => f(),
        Some(0) => Err(Failure::usage("--workers must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Failure::Runtime(format!("cannot build worker pool: {e}")))?
            .install(f),
    }
}

fn check_grid(grid: usize, max: usize) -> Result<(), Failure> {
    if !(50..=max).contains(&grid) {
        return Err(Failure::usage(format!(
            "--grid must be in [50, {max}]; got {grid}"
        )));
    }
    Ok(())
}

fn check_samples(samples: u64, floor: u64, flag: &str) -> Result<(), Failure> {
    if samples < floor {
        return Err(Failure::usage(format!(
            "{flag} must be at least {floor}; got {samples}"
        )));
    }
    Ok(())
}

fn cmd_affine(a: AffineArgs) -> Result<(), Failure> {
    let scale = if a.degrees {
        std::f64::consts::PI / 180.0
    } else {
        1.0
    };
    let p = EnvParams::new(
        a.alpha * scale,
        a.beta * scale,
        a.gamma * scale,
        a.lambda,
        a.xi * scale,
        a.eta * scale,
    )
    .map_err(|e| Failure::Usage(e.to_string()))?;
    if a.canonical && (p.alpha - p.gamma).abs() > PARAM_PATTERN {
        return Err(Failure::usage(format!(
            "alpha must equal gamma for --canonical; got alpha = {}, gamma = {}",
            p.alpha, p.gamma
        )));
    }
    let report = EnvReport::for_params(&p).map_err(runtime)?;
    match a.format {
        ReportFormat::Json => emit(SCHEMA_AFFINE, &report, a.out.as_deref()),
        ReportFormat::Csv => {
            let m = &report.m.0;
            let mut text =
                String::from("m11,m12,m13,m21,m22,m23,m31,m32,m33,c1,c2,c3,f1,f2,f3,l1,l2,l3\n");
            let row: Vec<f64> = m
                .iter()
                .flatten()
                .copied()
                .chain([report.c.r1, report.c.r2, report.c.r3])
                .chain([report.f.f1, report.f.f2, report.f.f3])
                .chain(report.eigenvalues)
                .collect();
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            text.push_str(&cells.join(","));
            text.push('\n');
            deliver(&text, a.out.as_deref())
        }
    }
}

#[derive(Serialize)]
struct GadReport {
    params: GadParams,
    #[serde(flatten)]
    channel: ChannelRecord,
    trace_defect: f64,
    choi_min_eigenvalue: f64,
    point: qca_core::envsim::AdPoint,
}

fn cmd_gad(a: GadArgs) -> Result<(), Failure> {
    let p = GadParams::new(a.eps0, a.eps2, a.gamma0, a.gamma2)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let channel = gad(&p).map_err(runtime)?;
    let report = GadReport {
        params: p,
        channel: ChannelRecord::from_kraus(&channel).map_err(runtime)?,
        trace_defect: channel.trace_defect(),
        choi_min_eigenvalue: channel.choi_min_eigenvalue().map_err(runtime)?,
        point: gad_point(&p),
    };
    emit(SCHEMA_GAD, &report, a.out.as_deref())
}

fn write_grid(grid: &VoxelGrid, path: &Path) -> Result<(), Failure> {
    emit(SCHEMA_GRID, &grid.to_record(), Some(path))
}

fn cmd_volume(a: VolumeArgs) -> Result<(), Failure> {
    check_grid(a.grid, 1000)?;
    match a.region {
        Region::Gad => {
            let samples = a.samples.unwrap_or(1_000_000);
            check_samples(samples, 10_000, "--samples")?;
            if a.subsample {
                return Err(Failure::usage(
                    "--subsample applies only to membership-mode single-env volume",
                ));
            }
            let (report, grid) = with_workers(a.workers, || {
                gad_volume(samples, a.grid, a.seed, a.mem_cap).map_err(runtime)
            })?;
            if let Some(path) = &a.grid_out {
                write_grid(&grid, path)?;
            }
            emit(SCHEMA_VOLUME, &report, a.out.as_deref())
        }
        Region::SingleEnv => {
            if a.samples.is_some() {
                return Err(Failure::usage(
                    "--samples does not apply to the membership-mode single-env volume",
                ));
            }
            if a.subsample && a.grid_out.is_some() {
                return Err(Failure::usage(
                    "--grid-out needs whole-cell occupancy; drop --subsample",
                ));
            }
            let (report, grid) = with_workers(a.workers, || {
                single_env_volume_membership(a.grid, a.subsample, a.mem_cap).map_err(runtime)
            })?;
            if let Some(path) = &a.grid_out {
                let grid = grid.as_ref().expect("center-mode membership builds a grid");
                write_grid(grid, path)?;
            }
            emit(SCHEMA_VOLUME, &report, a.out.as_deref())
        }
    }
}

fn cmd_ratio(a: RatioArgs) -> Result<(), Failure> {
    check_grid(a.grid, 1000)?;
    check_samples(a.samples, 10_000, "--samples")?;
    let report = with_workers(a.workers, || {
        volume_ratio(a.samples, a.grid, a.seed, a.mem_cap).map_err(runtime)
    })?;
    emit(SCHEMA_RATIO, &report, a.out.as_deref())
}

fn cmd_containment(a: ContainmentArgs) -> Result<(), Failure> {
    check_grid(a.grid, 200)?;
    check_samples(a.samples, 1, "--samples")?;
    check_samples(a.gad_samples, 10_000_000, "--gad-samples")?;
    let report = with_workers(a.workers, || {
        containment_check(a.samples, a.grid, a.gad_samples, a.seed, a.mem_cap).map_err(runtime)
    })?;
    emit(SCHEMA_CONTAINMENT, &report, a.out.as_deref())
}

#[derive(Serialize)]
struct CloudSummary<'a> {
    region: &'a str,
    samples: u64,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    attempts: Option<u64>,
    out: String,
    format: &'a str,
}

fn cmd_cloud(a: CloudArgs) -> Result<(), Failure> {
    check_samples(a.samples, 1, "--samples")?;
    let cloud: PointCloud = with_workers(a.workers, || {
        Ok(match a.region {
            Region::Gad => gad_cloud(a.samples, a.seed),
            Region::SingleEnv => single_env_cloud(a.samples, a.seed),
        })
    })?;
    match a.format {
        ReportFormat::Csv => export_cloud(&cloud, &a.out, CloudFormat::Csv).map_err(runtime)?,
        ReportFormat::Json => deliver(&render_json(SCHEMA_CLOUD, &cloud)?, Some(&a.out))?,
    }
    let summary = CloudSummary {
        region: &cloud.provenance.region,
        samples: a.samples,
        seed: a.seed,
        attempts: cloud.provenance.attempts,
        out: a.out.display().to_string(),
        format: match a.format {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        },
    };
    emit(SCHEMA_CLOUD, &summary, None)
}

fn cmd_validate(a: ValidateArgs) -> Result<(), Failure> {
    let report = with_workers(a.workers, || {
        validation::run_all(a.seed, a.quick).map_err(runtime)
    })?;
    emit(SCHEMA_VALIDATE, &report, a.out.as_deref())?;
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect();
        Err(Failure::Runtime(format!(
            "{} of {} checks failed: {}",
            failed.len(),
            report.checks.len(),
            failed.join(", ")
        )))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Affine(a) => cmd_affine(a),
        Command::Gad(a) => cmd_gad(a),
        Command::Volume(a) => cmd_volume(a),
        Command::Ratio(a) => cmd_ratio(a),
        Command::Containment(a) => cmd_containment(a),
        Command::Cloud(a) => cmd_cloud(a),
        Command::Validate(a) => cmd_validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
