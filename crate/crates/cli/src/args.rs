use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use msibm::{Levels, SignConvention};

#[derive(Debug, Parser)]
#[command(name = "msibm", version, about = "Stereo disparity by multi-scale hierarchical block matching")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hierarchical disparity for one stereo pair.
    Compute(ComputeArgs),
    /// Single-resolution exhaustive block matching for one stereo pair.
    Baseline(BaselineArgs),
    /// Error metrics of a disparity map against ground truth.
    Eval(EvalArgs),
    /// Compute, baseline and eval over a folder of scenes.
    Bench(BenchArgs),
    /// Re-run the computation recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SignArg {
    /// Right match at column j - d.
    Middlebury,
    /// Right match at column j + d.
    Paper,
}

impl From<SignArg> for SignConvention {
    fn from(s: SignArg) -> Self {
        match s {
            SignArg::Middlebury => SignConvention::MiddleburyMinus,
            SignArg::Paper => SignConvention::PaperPlus,
        }
    }
}

fn parse_levels(s: &str) -> Result<Levels, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(Levels::Auto);
    }
    s.parse::<u32>()
        .map(Levels::Fixed)
        .map_err(|_| format!("expected a level count or `auto`, got `{s}`"))
}

/// Worker count; `None` means one worker per core.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Threads(pub Option<usize>);

fn parse_threads(s: &str) -> Result<Threads, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(Threads(None));
    }
    match s.parse::<usize>() {
        Ok(0) | Err(_) => Err(format!("expected a positive worker count or `auto`, got `{s}`")),
        Ok(n) => Ok(Threads(Some(n))),
    }
}

#[derive(Clone, Debug, Args)]
pub struct Pair {
    /// Left image (PGM/PPM).
    pub left: PathBuf,
    /// Right image (PGM/PPM).
    pub right: PathBuf,
    /// Maximum disparity in pixels.
    #[arg(long)]
    pub dmax: Option<u32>,
    /// Middlebury calib.txt; its ndisp overrides --dmax. Without either,
    /// calib.txt beside the left image is used if present.
    #[arg(long)]
    pub calib: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
pub struct Common {
    /// Block edge length at full resolution (odd).
    #[arg(long, default_value_t = 11)]
    pub block: u32,
    #[arg(long, value_enum, default_value_t = SignArg::Middlebury)]
    pub sign: SignArg,
    /// Worker threads, or `auto`.
    #[arg(long, value_parser = parse_threads, default_value = "auto")]
    pub threads: Threads,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Clone, Debug, Args)]
pub struct Hierarchy {
    /// Pyramid levels above full resolution, or `auto`.
    #[arg(long, value_parser = parse_levels, default_value = "auto")]
    pub levels: Levels,
    /// Cost at or below which pixels are refined and median filtered.
    #[arg(long, default_value_t = 0.9)]
    pub alpha: f64,
    /// Upsampled cost above which the coarse disparity is trusted.
    #[arg(long, default_value_t = 0.9)]
    pub beta: f64,
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    #[command(flatten)]
    pub pair: Pair,
    #[command(flatten)]
    pub hierarchy: Hierarchy,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub pair: Pair,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Disparity map (PFM).
    pub disparity: PathBuf,
    /// Ground truth (PFM, +inf marks unknown pixels).
    pub ground_truth: PathBuf,
    /// Factor applied to the disparity before comparison.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// trace.json of the run that produced the map, to include its counters.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Output directory; defaults to the folder of the disparity map.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Folder of scene folders, each with im0, im1, disp0GT.pfm and calib.txt.
    pub dataset: PathBuf,
    #[command(flatten)]
    pub hierarchy: Hierarchy,
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// manifest.json written by compute or baseline.
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads, or `auto`; defaults to the recorded setting.
    #[arg(long, value_parser = parse_threads)]
    pub threads: Option<Threads>,
}
