use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use noisemask::augment::FlipAxis;
use noisemask::bank::BankColor;
use noisemask::spectrum::SpectralClass;
use noisemask::{GridShape, SigmaPolicy};

#[derive(Debug, Parser)]
#[command(name = "noisemask", version, about = "Generate, sample and verify structured noise mask banks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a bank of noise entries or optim-blue masks.
    Gen(GenArgs),
    /// Draw one mask from a bank at a target grid and ratio.
    Sample(SampleArgs),
    /// Check every bank entry against the spectral classifier.
    Verify(VerifyArgs),
    /// Print ratio, smoothness and uniformity tables.
    Stats(StatsArgs),
    /// Write mask frames as PGM and the radial profile as SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_parser = parse_color)]
    pub color: BankColor,
    /// Entry shape, WxH or WxHxT.
    #[arg(long, value_parser = parse_grid)]
    pub shape: GridShape,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    /// main-text, variant5 or fixed:a[,b].
    #[arg(long, visible_alias = "sigma", value_parser = parse_sigma_policy)]
    pub sigma_policy: Option<SigmaPolicy>,
    /// Masks per optimizer run (optim-blue).
    #[arg(long)]
    pub k: Option<usize>,
    /// Clustering window side (optim-blue).
    #[arg(long)]
    pub window: Option<usize>,
    /// Four comma-separated line weights (optim-blue).
    #[arg(long, value_parser = parse_weights)]
    pub weights: Option<[f64; 4]>,
    /// Visible fraction per mask (optim-blue).
    #[arg(long)]
    pub transmittance: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub bank: PathBuf,
    #[arg(long, value_parser = parse_grid)]
    pub grid: GridShape,
    /// Masking ratio; binary banks default to their own ratio, noise banks to 0.75.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Flip axes drawn with probability 1/2 each, e.g. h,v,t.
    #[arg(long, value_delimiter = ',', value_parser = parse_flip)]
    pub flips: Vec<FlipAxis>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// NPY output; provenance goes next to it with a .json extension.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub bank: PathBuf,
    #[arg(long, value_parser = parse_class)]
    pub expect: SpectralClass,
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long, default_value_t = 0.9)]
    pub min_pass_rate: f64,
    /// Ratio used to binarize noise entries before the mask metrics.
    #[arg(long, default_value_t = 0.75)]
    pub gamma: f64,
}

#[derive(Debug, Args)]
#[group(id = "input", required = true, multiple = false, args = ["bank", "mask"])]
pub struct Input {
    #[arg(long)]
    pub bank: Option<PathBuf>,
    /// Binary mask saved as a uint8 NPY file.
    #[arg(long)]
    pub mask: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub input: Input,
    #[arg(long, default_value_t = 0.75)]
    pub gamma: f64,
    #[arg(long, default_value_t = noisemask::optim_blue::DEFAULT_WINDOW)]
    pub window: usize,
    #[arg(long, value_parser = parse_weights)]
    pub weights: Option<[f64; 4]>,
    /// JSON copy of the tables.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[command(flatten)]
    pub input: Input,
    /// Bank entry to draw.
    #[arg(long, default_value_t = 0)]
    pub entry: usize,
    #[arg(long, default_value_t = 0.75)]
    pub gamma: f64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_color(s: &str) -> Result<BankColor, String> {
    s.parse().map_err(|e: noisemask::Error| e.to_string())
}

fn parse_class(s: &str) -> Result<SpectralClass, String> {
    s.parse().map_err(|e: noisemask::Error| e.to_string())
}

fn parse_grid(s: &str) -> Result<GridShape, String> {
    s.parse().map_err(|e: noisemask::Error| e.to_string())
}

fn parse_numbers(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("'{p}' is not a number")))
        .collect()
}

pub(crate) fn parse_sigma_policy(s: &str) -> Result<SigmaPolicy, String> {
    match s {
        "main-text" => Ok(SigmaPolicy::main_text()),
        "variant5" => Ok(SigmaPolicy::variant5()),
        _ => {
            let body = s.strip_prefix("fixed:").unwrap_or(s);
            match parse_numbers(body)?.as_slice() {
                [a] => Ok(SigmaPolicy::fixed(*a)),
                [a, b] => Ok(SigmaPolicy::fixed_pair(*a, *b)),
                _ => Err(format!(
                    "sigma policy '{s}' is not main-text, variant5 or fixed:a[,b]"
                )),
            }
        }
    }
}

pub(crate) fn parse_weights(s: &str) -> Result<[f64; 4], String> {
    parse_numbers(s)?
        .try_into()
        .map_err(|_| format!("expected four weights, got '{s}'"))
}

fn parse_flip(s: &str) -> Result<FlipAxis, String> {
    s.trim().parse().map_err(|e: noisemask::Error| e.to_string())
}
