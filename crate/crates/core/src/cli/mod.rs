//! Command-line front end. Exit codes: 0 success, 2 bad arguments, 3 I/O
//! failure, 4 shape or format problems.

mod bench;

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand};

use crate::baseline::{fuse_mertens, mertens_weights, MertensConfig};
use crate::error::{Error, Result};
use crate::imgio::{
    load_image, load_sequence, load_sequence_dir, read_lut, save_image, save_plane, save_sequence_dir, write_lut,
    ExposureStack, YuvImage, MANIFEST_NAME,
};
use crate::lut_engine::{fuse_detailed, FusionConfig, Upsample, WeightMaps};
use crate::metrics::{evaluate, EvalReport};
use crate::network::{read_checkpoint, write_checkpoint, DEFAULT_CHANNELS};
use crate::synth::synthetic_dataset;
use crate::training::{extract_luts_with, train_logged, TrainConfig, DEFAULT_PROBE_SIZE};

pub use bench::{
    bench_table, demo_lut, run_bench, summarize, time_repeated, BenchConfig, BenchPath, BenchResult, MIN_REPEATS,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_FORMAT: i32 = 4;

/// Reference image looked up inside each sequence directory by `eval`.
pub const REFERENCE_NAME: &str = "reference.png";

#[derive(Debug, Parser)]
#[command(name = "meflut", version, about = "Multi-exposure fusion with learned 1D LUTs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fuse one exposure stack.
    Fuse(FuseArgs),
    /// Train the weight network on a directory of sequences.
    Train(TrainArgs),
    /// Collapse a trained network into a LUT file.
    ExtractLut(ExtractArgs),
    /// Score fused results against their stacks.
    Eval(EvalArgs),
    /// Time the LUT, network and baseline paths.
    Bench(BenchArgs),
    /// Write synthetic exposure sequences.
    Synth(SynthArgs),
}

#[derive(Debug, Args, Clone)]
#[command(group(ArgGroup::new("predictor").required(true).args(["lut", "checkpoint", "method"])))]
pub struct MethodArgs {
    #[arg(long)]
    pub lut: Option<PathBuf>,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Classical baseline; only `mertens` is available.
    #[arg(long, value_parser = ["mertens"])]
    pub method: Option<String>,
    #[arg(long, default_value = "gfu")]
    pub upsample: Upsample,
    /// Pyramid depth for the baseline.
    #[arg(long)]
    pub pyramid_levels: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct FuseArgs {
    #[arg(long, num_args = 1.., required = true)]
    pub inputs: Vec<PathBuf>,
    /// Exposure values, comma separated, ascending.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub evs: Vec<f64>,
    #[command(flatten)]
    pub method: MethodArgs,
    #[arg(long)]
    pub out: PathBuf,
    /// Write the full-resolution weight maps as grayscale PNGs here.
    #[arg(long)]
    pub dump_weights: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Directory of sequence subdirectories, each with a manifest.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub lr: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_CHANNELS)]
    pub channels: usize,
    #[arg(long, default_value_t = 1)]
    pub batch: usize,
    #[arg(long, default_value_t = 128)]
    pub target_min: usize,
    #[arg(long)]
    pub out_checkpoint: PathBuf,
    /// Per-epoch `epoch<TAB>mean_loss` log; defaults to the checkpoint path
    /// with `.log.tsv` appended.
    #[arg(long)]
    pub metrics_log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_PROBE_SIZE)]
    pub probe_size: usize,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["fused_dir", "lut", "checkpoint", "method"])))]
pub struct EvalArgs {
    /// Directory of sequence subdirectories.
    #[arg(long)]
    pub data: PathBuf,
    /// Pre-fused images named `<sequence>.png`.
    #[arg(long)]
    pub fused_dir: Option<PathBuf>,
    #[arg(long)]
    pub lut: Option<PathBuf>,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long, value_parser = ["mertens"])]
    pub method: Option<String>,
    /// Report path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "512,1024,2048")]
    pub resolutions: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    pub repeat: usize,
    #[arg(long, value_delimiter = ',', default_value = "lut,network,mertens")]
    pub paths: Vec<BenchPath>,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long, default_value_t = DEFAULT_CHANNELS)]
    pub channels: usize,
    /// Also write the table here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 8)]
    pub count: usize,
    #[arg(long, default_value_t = 256)]
    pub width: usize,
    #[arg(long, default_value_t = 256)]
    pub height: usize,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-2,0,2")]
    pub evs: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Metadata(_) => EXIT_USAGE,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_FORMAT,
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("meflut: {e}");
            exit_code(&e)
        }
    }
}

pub fn execute(command: Command) -> Result<()> {
    match command {
        Command::Fuse(a) => cmd_fuse(a),
        Command::Train(a) => cmd_train(a),
        Command::ExtractLut(a) => cmd_extract_lut(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Synth(a) => cmd_synth(a),
    }
}

enum Fuser {
    Lut(crate::imgio::LutMatrix),
    Network(Box<crate::network::NetworkParams>),
    Mertens(MertensConfig),
}

impl Fuser {
    fn load(lut: &Option<PathBuf>, checkpoint: &Option<PathBuf>, levels: Option<usize>) -> Result<Self> {
        Ok(match (lut, checkpoint) {
            (Some(p), _) => Fuser::Lut(read_lut(p)?),
            (_, Some(p)) => Fuser::Network(Box::new(read_checkpoint(p)?)),
            _ => Fuser::Mertens(MertensConfig { levels, ..Default::default() }),
        })
    }

    fn fuse(&self, stack: &ExposureStack, cfg: &FusionConfig) -> Result<(YuvImage, WeightMaps)> {
        match self {
            Fuser::Lut(l) => fuse_detailed(stack, l, cfg).map(|o| (o.image, o.weights)),
            Fuser::Network(n) => fuse_detailed(stack, n.as_ref(), cfg).map(|o| (o.image, o.weights)),
            Fuser::Mertens(m) => Ok((fuse_mertens(stack, m)?, mertens_weights(stack, m)?)),
        }
    }
}

fn dump_weights(weights: &WeightMaps, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (k, p) in weights.planes().iter().enumerate() {
        save_plane(&p.to_u8(), dir.join(format!("weight_{k:02}.png")))?;
    }
    Ok(())
}

pub fn cmd_fuse(a: FuseArgs) -> Result<()> {
    if a.inputs.len() != a.evs.len() {
        return Err(Error::Metadata(format!("{} inputs but {} exposure values", a.inputs.len(), a.evs.len())));
    }
    let stack = load_sequence(&a.inputs, &a.evs)?;
    let m = &a.method;
    let fuser = Fuser::load(&m.lut, &m.checkpoint, m.pyramid_levels)?;
    let cfg = FusionConfig { upsample: m.upsample, threads: m.threads.max(1), ..Default::default() };
    let (image, weights) = fuser.fuse(&stack, &cfg)?;
    save_image(&image, &a.out)?;
    if let Some(dir) = &a.dump_weights {
        dump_weights(&weights, dir)?;
    }
    Ok(())
}

/// Subdirectories of `dir` holding a manifest, sorted by name.
pub fn sequence_dirs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join(MANIFEST_NAME).is_file())
        .collect();
    out.sort();
    if out.is_empty() {
        return Err(Error::Metadata(format!("no sequence directories with {MANIFEST_NAME} under {}", dir.display())));
    }
    Ok(out)
}

pub fn cmd_train(a: TrainArgs) -> Result<()> {
    let dataset = sequence_dirs(&a.data)?.iter().map(load_sequence_dir).collect::<Result<Vec<_>>>()?;
    let cfg = TrainConfig {
        learning_rate: a.lr,
        epochs: a.epochs,
        seed: a.seed,
        channels: a.channels,
        batch: a.batch,
        target_min: a.target_min,
        ..TrainConfig::default()
    };
    let log_path = a.metrics_log.clone().unwrap_or_else(|| {
        let mut s = a.out_checkpoint.clone().into_os_string();
        s.push(".log.tsv");
        PathBuf::from(s)
    });
    let mut log = fs::File::create(&log_path)?;
    let mut log_err = None;
    let params = train_logged(&dataset, &cfg, |epoch, loss| {
        if let Err(e) = writeln!(log, "{epoch}\t{loss:.8}") {
            log_err.get_or_insert(e);
        }
    })?;
    if let Some(e) = log_err {
        return Err(e.into());
    }
    write_checkpoint(&params, &a.out_checkpoint)
}

pub fn cmd_extract_lut(a: ExtractArgs) -> Result<()> {
    let params = read_checkpoint(&a.checkpoint)?;
    write_lut(&extract_luts_with(&params, a.probe_size, a.threads.max(1))?, &a.out)
}

pub fn cmd_eval(a: EvalArgs) -> Result<()> {
    let fuser = match &a.fused_dir {
        Some(_) => None,
        None => Some(Fuser::load(&a.lut, &a.checkpoint, None)?),
    };
    let cfg = FusionConfig::default();
    let mut report = EvalReport::default();
    for dir in sequence_dirs(&a.data)? {
        let name = dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let stack = load_sequence_dir(&dir)?;
        let fused = match (&fuser, &a.fused_dir) {
            (Some(f), _) => f.fuse(&stack, &cfg)?.0,
            (None, Some(d)) => load_image(d.join(format!("{name}.png")))?,
            (None, None) => unreachable!("clap requires a source"),
        };
        let ref_path = dir.join(REFERENCE_NAME);
        let reference = if ref_path.is_file() { Some(load_image(&ref_path)?) } else { None };
        report.push(evaluate(&name, &fused, reference.as_ref(), &stack)?);
    }
    match &a.out {
        Some(p) => report.write_tsv(p),
        None => {
            print!("{}", report.to_tsv());
            Ok(())
        }
    }
}

pub fn cmd_bench(a: BenchArgs) -> Result<()> {
    let cfg = BenchConfig {
        resolutions: a.resolutions,
        repeat: a.repeat,
        paths: a.paths,
        threads: a.threads.max(1),
        channels: a.channels,
        seed: 0,
    };
    let table = bench_table(&run_bench(&cfg)?);
    print!("{table}");
    if let Some(p) = &a.out {
        fs::write(p, &table)?;
    }
    Ok(())
}

pub fn cmd_synth(a: SynthArgs) -> Result<()> {
    for (i, stack) in synthetic_dataset(a.count, a.width, a.height, &a.evs, a.seed)?.iter().enumerate() {
        save_sequence_dir(stack, a.out.join(format!("seq_{i:03}")))?;
    }
    Ok(())
}
