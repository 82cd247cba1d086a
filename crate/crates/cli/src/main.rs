//! `lanevote`: lane-marking post-processing from the command line.
//!
//! The segmentation network is outside this tool. Input is its binary lane
//! mask, as a P2/P5 graymap or an 8-bit grayscale PNG.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lanevote_core::bench::benchmark;
use lanevote_core::eval::{evaluate_lanes, LATERAL_TOLERANCE};
use lanevote_core::imageio::{load_mask, write_pgm, write_ppm, GrayImage};
use lanevote_core::lanes_io::{format_lanes, lane_records, read_lanes, write_lanes, write_truth};
use lanevote_core::overlay::render_overlay;
use lanevote_core::{
    crop_and_resize, generate_synthetic_scene, BinaryMask, Error, ErrorCategory, Pipeline,
    PipelineConfig, Result, SynthParams, TruthLane,
};

#[derive(Parser)]
#[command(name = "lanevote", version, about = "Lane detection post-processing on binary lane masks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect, group and fit lanes in one mask.
    Run(RunArgs),
    /// Generate a synthetic mask with ground truth.
    Synth(SynthArgs),
    /// Time the post-processing stages over many frames.
    Bench(BenchArgs),
    /// Score a lane file against a truth file.
    Eval(EvalArgs),
    /// Print the default configuration.
    Config,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    mask: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Lane file to write; printed to stdout when omitted.
    #[arg(long)]
    out_lanes: Option<PathBuf>,
    /// P6 pixmap with the lanes drawn over the mask.
    #[arg(long)]
    out_overlay: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    lanes: usize,
    /// P5 graymap (255 = lane).
    #[arg(long)]
    out_mask: PathBuf,
    /// Truth lane file; the per-pixel divider map goes next to it as `<stem>.assign.pgm`.
    #[arg(long)]
    out_truth: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0.0)]
    occlusion: f64,
    #[arg(long)]
    curvature: Option<f64>,
    #[arg(long)]
    dash_length: Option<f64>,
    #[arg(long)]
    gap_length: Option<f64>,
    #[arg(long)]
    phase: Option<f64>,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["frames", "mask_dir"]))]
struct BenchArgs {
    /// Number of synthetic frames.
    #[arg(long)]
    frames: Option<usize>,
    /// Directory of .pgm/.pnm/.png masks.
    #[arg(long)]
    mask_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long)]
    config: Option<PathBuf>,
    /// First seed for synthetic frames.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    result: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    /// Mean lateral error (BEV px) below which a divider counts as found.
    #[arg(long, default_value_t = LATERAL_TOLERANCE)]
    tolerance: f64,
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig> {
    path.map_or_else(|| Ok(PipelineConfig::default()), PipelineConfig::load)
}

fn load_frame(path: &Path, config: &PipelineConfig) -> Result<BinaryMask> {
    let mask = load_mask(path, config.mask_threshold)?;
    crop_and_resize(&mask, config)
}

fn run(args: RunArgs) -> Result<()> {
    let pipeline = Pipeline::new(load_config(args.config.as_deref())?)?;
    let mask = load_frame(&args.mask, pipeline.config())?;
    let result = pipeline.run_frame(&mask)?;
    let records = lane_records(&result.lanes);
    match &args.out_lanes {
        Some(path) => write_lanes(path, &records)?,
        None => print!("{}", format_lanes(&records)),
    }
    if let Some(path) = &args.out_overlay {
        write_ppm(path, &render_overlay(&mask, &result.lanes))?;
    }
    let t = result.timings;
    eprintln!(
        "instances={} clusters={} lanes={} detect={:.3}ms bev={:.3}ms vote={:.3}ms fit={:.3}ms",
        result.num_instances(),
        result.num_clusters(),
        result.lanes.len(),
        t.detect_ms,
        t.bev_ms,
        t.vote_ms,
        t.fit_ms
    );
    Ok(())
}

fn synth(args: SynthArgs) -> Result<()> {
    let pipeline = Pipeline::new(load_config(args.config.as_deref())?)?;
    let d = SynthParams::default();
    let params = SynthParams {
        num_lanes: args.lanes,
        noise_rate: args.noise,
        occlusion_rate: args.occlusion,
        curvature_range: args.curvature.unwrap_or(d.curvature_range),
        dash_length: args.dash_length.unwrap_or(d.dash_length),
        gap_length: args.gap_length.unwrap_or(d.gap_length),
        dash_phase: args.phase.unwrap_or(d.dash_phase),
        ..d
    };
    let scene = generate_synthetic_scene(&params, &pipeline, args.seed)?;
    write_pgm(&args.out_mask, &GrayImage::from_mask(&scene.mask, 255))?;
    if let Some(path) = &args.out_truth {
        write_truth(path, &scene, &pipeline)?;
    }
    eprintln!(
        "lane pixels={} visible dividers={}",
        scene.mask.count_ones(),
        scene.truth.len()
    );
    Ok(())
}

fn mask_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let io = |reason: String| Error::Io {
        path: dir.to_path_buf(),
        reason,
    };
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| io(e.to_string()))?
        .map(|entry| entry.map(|e| e.path()).map_err(|e| io(e.to_string())))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| ["pgm", "pnm", "png"].contains(&e.to_ascii_lowercase().as_str()))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(io("no .pgm, .pnm or .png masks found".into()));
    }
    Ok(files)
}

fn bench(args: BenchArgs) -> Result<()> {
    if args.reps == 0 || args.threads == 0 {
        return Err(Error::Config("--reps and --threads must be >= 1".into()));
    }
    let pipeline = Pipeline::new(load_config(args.config.as_deref())?)?;
    let frames = match (&args.mask_dir, args.frames) {
        (Some(dir), _) => mask_files(dir)?
            .iter()
            .map(|p| load_frame(p, pipeline.config()))
            .collect::<Result<Vec<_>>>()?,
        (None, Some(n)) => {
            let params = SynthParams {
                num_lanes: 4,
                noise_rate: 0.0005,
                occlusion_rate: 0.1,
                ..SynthParams::default()
            };
            (0..n as u64)
                .map(|k| generate_synthetic_scene(&params, &pipeline, args.seed + k).map(|s| s.mask))
                .collect::<Result<Vec<_>>>()?
        }
        (None, None) => unreachable!("clap requires a frame source"),
    };
    println!("{}", benchmark(&pipeline, &frames, args.reps, args.threads)?);
    Ok(())
}

fn eval(args: EvalArgs) -> Result<()> {
    if !(args.tolerance > 0.0) {
        return Err(Error::Config(format!("tolerance must be > 0, got {}", args.tolerance)));
    }
    let fitted: Vec<_> = read_lanes(&args.result)?.iter().map(|r| r.curve()).collect();
    let truth: Vec<TruthLane> = read_lanes(&args.truth)?
        .iter()
        .map(|r| TruthLane {
            divider: r.id,
            curve: r.curve(),
        })
        .collect();
    let m = evaluate_lanes(&fitted, &truth, args.tolerance);
    println!("truth_lanes={}", m.truth_lanes);
    println!("fitted_lanes={}", m.fitted_lanes);
    println!("matched={}", m.matched);
    println!("recall={:.6}", m.recall);
    println!("mean_lateral_error={:.6}", m.mean_lateral_error);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => run(a),
        Command::Synth(a) => synth(a),
        Command::Bench(a) => bench(a),
        Command::Eval(a) => eval(a),
        Command::Config => {
            print!("{}", PipelineConfig::default().to_text());
            Ok(())
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.category() {
                ErrorCategory::Config => 2,
                ErrorCategory::Io => 3,
                ErrorCategory::Processing => 4,
            })
        }
    }
}
