//! `noisemask` command line: gen, sample, verify, stats and plot.
//!
//! Exit codes: 0 success, 1 invalid flags or parameters, 2 I/O or file format
//! errors, 3 verification failure.

pub mod args;
pub mod plot;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::Serialize;

use noisemask::bank::{
    build_bank_with, read_bank, sample_mask_with_provenance, write_bank, AugmentSpec, GenConfig,
    MaskBank, OptimBlueParams, DEFAULT_PAIR_RATIO,
};
use noisemask::npy::{read_npy, to_npy_bytes, NpyArray, NpyData};
use noisemask::optim_blue::DEFAULT_WEIGHTS;
use noisemask::verify::{entry_report, mask_report, verify_bank, EntryReport, VerifyOptions};
use noisemask::{radial_profile, GridShape, MaskRatio, MaskTensor, NoiseTensor, Parallelism};

use args::{Cli, Command, GenArgs, Input, PlotArgs, SampleArgs, StatsArgs, VerifyArgs};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "NOISEMASK_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] noisemask::Error),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::Core(e) if e.is_io_or_format() => EXIT_IO,
            CliError::Core(_) => EXIT_INVALID,
            CliError::Write { .. } => EXIT_IO,
            CliError::Verification(_) => EXIT_VERIFY,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Parses `args` (program name first), runs the subcommand and returns the
/// exit code. Normal output goes to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = if code == EXIT_OK {
                write!(out, "{e}")
            } else {
                write!(err, "{e}")
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Reads the thread cap from the environment and sizes the global pool.
pub fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Invalid(format!("{THREADS_ENV} must be a positive integer, got '{raw}'")))?;
    #[cfg(feature = "parallel")]
    {
        // A pool already built by an earlier call in the same process wins.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(())
}

fn dispatch(command: Command, out: &mut dyn Write) -> CliResult<()> {
    match command {
        Command::Gen(a) => gen(a, out),
        Command::Sample(a) => sample(a, out),
        Command::Verify(a) => verify(a, out),
        Command::Stats(a) => stats(a, out),
        Command::Plot(a) => plot_cmd(a, out),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn say(out: &mut dyn Write, line: std::fmt::Arguments<'_>) -> CliResult<()> {
    writeln!(out, "{line}").map_err(|source| CliError::Write {
        path: PathBuf::from("<stdout>"),
        source,
    })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn gen_config(a: &GenArgs) -> CliResult<GenConfig> {
    let optim_flags = [
        ("--k", a.k.is_some()),
        ("--window", a.window.is_some()),
        ("--weights", a.weights.is_some()),
        ("--transmittance", a.transmittance.is_some()),
    ];
    let mut config = GenConfig::new(a.color, a.shape.clone(), a.seed);
    if a.shape.rank() != a.color.rank() {
        let hint = match a.color.rank() {
            2 => " (use green3d for video volumes)",
            _ => "",
        };
        return Err(CliError::Invalid(format!(
            "--color {} is {}D but --shape {} is {}D{hint}",
            a.color,
            a.color.rank(),
            a.shape,
            a.shape.rank()
        )));
    }
    if a.color.is_binary() {
        let mut params = OptimBlueParams::default();
        if let Some(k) = a.k {
            params.masks = k;
        }
        if let Some(w) = a.window {
            params.window = w;
        }
        if let Some(w) = a.weights {
            params.weights = w;
        }
        if let Some(t) = a.transmittance {
            params.transmittance = t;
        }
        config.optim_blue = Some(params);
    } else if let Some((flag, _)) = optim_flags.iter().find(|(_, set)| *set) {
        return Err(CliError::Invalid(format!(
            "{flag} only applies to --color optim-blue, not {}",
            a.color
        )));
    }
    if let Some(policy) = &a.sigma_policy {
        config.sigma_policy = Some(policy.clone());
    }
    if a.count == 0 {
        return Err(CliError::Invalid("--count must be at least 1".into()));
    }
    config.validate()?;
    Ok(config)
}

fn gen(a: GenArgs, out: &mut dyn Write) -> CliResult<()> {
    let config = gen_config(&a)?;
    let bank = build_bank_with(&config, a.count, Parallelism::default())?;
    write_bank(&bank, &a.out)?;
    say(out, format_args!("{}", bank.digest()))
}

fn sample(a: SampleArgs, out: &mut dyn Write) -> CliResult<()> {
    let bank = read_bank(&a.bank)?;
    let gamma = match a.gamma {
        Some(g) => g,
        None => bank.metadata().gamma.unwrap_or(DEFAULT_PAIR_RATIO),
    };
    let gamma = MaskRatio::new(gamma)?;
    let mut aug = AugmentSpec::new(a.grid, a.seed);
    aug.flips = a.flips;
    let (mask, provenance) = sample_mask_with_provenance(&bank, &aug, gamma)?;
    if let Some(path) = &a.out {
        let side = provenance_path(path)?;
        let npy = NpyArray {
            shape: mask.shape.dims().to_vec(),
            data: NpyData::U8(mask.to_u8()),
        };
        write_file(path, &to_npy_bytes(&npy))?;
        write_file(&side, to_json(&provenance).as_bytes())?;
    }
    say(
        out,
        format_args!(
            "{} masked / {} visible (entry {}, flips [{}])",
            mask.popcount(),
            mask.visible_count(),
            provenance.entry_index,
            provenance
                .flips_applied
                .iter()
                .map(|f| f.to_string())
                .collect::<Vec<_>>()
                .join(",")
        ),
    )
}

fn provenance_path(out: &Path) -> CliResult<PathBuf> {
    if out.extension().is_some_and(|e| e == "json") {
        return Err(CliError::Invalid(format!(
            "--out {} would collide with its provenance file",
            out.display()
        )));
    }
    Ok(out.with_extension("json"))
}

fn verify(a: VerifyArgs, out: &mut dyn Write) -> CliResult<()> {
    let bank = read_bank(&a.bank)?;
    let options = VerifyOptions {
        min_pass_rate: a.min_pass_rate,
        gamma: a.gamma,
        ..VerifyOptions::default()
    };
    if !(0.0..=1.0).contains(&options.min_pass_rate) {
        return Err(CliError::Invalid("--min-pass-rate must lie in [0, 1]".into()));
    }
    let report = verify_bank(&bank, a.expect, &options, Parallelism::default())?;
    write_file(&a.report, to_json(&report).as_bytes())?;
    let summary = format!(
        "{}/{} entries classified {} (pass rate {:.3}, need {:.3})",
        report.passed,
        report.entries.len(),
        report.expected,
        report.pass_rate,
        report.options.min_pass_rate
    );
    say(out, format_args!("{summary}"))?;
    if report.ok {
        Ok(())
    } else {
        Err(CliError::Verification(summary))
    }
}

/// A bank or a single mask file given on the command line.
enum Loaded {
    Bank(MaskBank),
    Mask(MaskTensor),
}

fn load_input(input: &Input) -> CliResult<Loaded> {
    match (&input.bank, &input.mask) {
        (Some(dir), _) => Ok(Loaded::Bank(read_bank(dir)?)),
        (None, Some(file)) => Ok(Loaded::Mask(read_mask_file(file)?)),
        (None, None) => Err(CliError::Invalid("one of --bank or --mask is required".into())),
    }
}

/// Loads a uint8 NPY mask written by `sample` (1 = masked).
pub fn read_mask_file(path: &Path) -> Result<MaskTensor, noisemask::Error> {
    let bytes = fs::read(path).map_err(|e| noisemask::Error::io(path, e))?;
    let array = read_npy(&bytes)?;
    let shape = GridShape::new(&array.shape)
        .map_err(|e| noisemask::Error::format("shape", e.to_string()))?;
    let NpyData::U8(cells) = array.data else {
        return Err(noisemask::Error::format("descr", "mask files must be |u1"));
    };
    if cells.iter().any(|&c| c > 1) {
        return Err(noisemask::Error::format("data", "mask cells must be 0 or 1"));
    }
    let bits: Vec<bool> = cells.iter().map(|&c| c == 1).collect();
    let masked = bits.iter().filter(|&&b| b).count();
    Ok(MaskTensor {
        gamma: masked as f64 / bits.len() as f64,
        shape,
        bits,
        // File name only, so reports do not depend on where the file lives.
        source: format!(
            "mask {}",
            path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
        ),
    })
}

#[derive(Serialize)]
struct StatsReport {
    source: String,
    options: VerifyOptions,
    entries: Vec<EntryReport>,
}

fn stats(a: StatsArgs, out: &mut dyn Write) -> CliResult<()> {
    MaskRatio::new(a.gamma)?;
    let options = VerifyOptions {
        gamma: a.gamma,
        window: a.window,
        weights: a.weights.unwrap_or(DEFAULT_WEIGHTS),
        ..VerifyOptions::default()
    };
    let (source, entries) = match load_input(&a.input)? {
        Loaded::Bank(bank) => {
            let entries = Parallelism::default()
                .try_map(bank.len(), |i| entry_report(&bank, i, &options))?;
            (format!("bank {} {}", bank.metadata().color, bank.digest()), entries)
        }
        Loaded::Mask(mask) => {
            let report = mask_report(0, &mask, None, &options);
            (mask.source.clone(), vec![report])
        }
    };
    say(out, format_args!("{source}"))?;
    say(
        out,
        format_args!(
            "{:>5} {:>8} {:>8} {:>7} {:>10} {:>8} {:>10} {:>13}",
            "entry", "masked", "visible", "ratio", "smoothness", "nn_dist", "clustering", "verdict"
        ),
    )?;
    for e in &entries {
        let total = (e.masked + e.visible).max(1) as f64;
        say(
            out,
            format_args!(
                "{:>5} {:>8} {:>8} {:>7.4} {:>10} {:>8} {:>10} {:>13}",
                e.index,
                e.masked,
                e.visible,
                e.masked as f64 / total,
                opt(e.smoothness),
                opt(e.uniformity.as_ref().map(|u| u.mean_nn_distance)),
                opt(e.uniformity.as_ref().map(|u| u.mean_clustering_score)),
                e.verdict.to_string()
            ),
        )?;
    }
    let n = entries.len().max(1) as f64;
    let mean = |f: &dyn Fn(&EntryReport) -> Option<f64>| -> Option<f64> {
        let vals: Vec<f64> = entries.iter().filter_map(f).collect();
        (vals.len() == entries.len() && !vals.is_empty()).then(|| vals.iter().sum::<f64>() / n)
    };
    say(
        out,
        format_args!(
            "{:>5} {:>8} {:>8} {:>7} {:>10} {:>8} {:>10}",
            "mean",
            "",
            "",
            "",
            opt(mean(&|e| e.smoothness)),
            opt(mean(&|e| e.uniformity.as_ref().map(|u| u.mean_nn_distance))),
            opt(mean(&|e| e.uniformity.as_ref().map(|u| u.mean_clustering_score)))
        ),
    )?;
    if let Some(path) = &a.out {
        let report = StatsReport {
            source,
            options,
            entries,
        };
        write_file(path, to_json(&report).as_bytes())?;
    }
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"))
}

/// Frame `t` of a row-major tensor whose last axis is time.
fn frame_values(values: &[f64], frames: usize, t: usize) -> Vec<f64> {
    values.iter().skip(t).step_by(frames).copied().collect()
}

fn plot_cmd(a: PlotArgs, out: &mut dyn Write) -> CliResult<()> {
    let (mask, noise): (MaskTensor, Option<NoiseTensor>) = match load_input(&a.input)? {
        Loaded::Bank(bank) => {
            if a.entry >= bank.len() {
                return Err(CliError::Invalid(format!(
                    "--entry {} out of range for a bank of {}",
                    a.entry,
                    bank.len()
                )));
            }
            match bank.mask_entry(a.entry) {
                Some(mask) => (mask, None),
                None => {
                    let noise = bank.noise_entry(a.entry).expect("entry index checked");
                    (noisemask::eta(&noise, MaskRatio::new(a.gamma)?), Some(noise))
                }
            }
        }
        Loaded::Mask(mask) => (mask, None),
    };
    fs::create_dir_all(&a.out).map_err(|source| CliError::Write {
        path: a.out.clone(),
        source,
    })?;
    let dims = mask.shape.dims();
    let (rows, cols) = (dims[0], dims[1]);
    let frames = mask.shape.frames();
    let mut written = Vec::new();
    for t in 0..frames {
        let suffix = if mask.shape.rank() == 3 {
            format!("_t{t:03}")
        } else {
            String::new()
        };
        let path = a.out.join(format!("mask{suffix}.pgm"));
        write_file(&path, &plot::pgm(cols, rows, &plot::mask_pixels(&mask.frame(t))))?;
        written.push(path);
        if let Some(noise) = &noise {
            let path = a.out.join(format!("noise{suffix}.pgm"));
            let values = frame_values(&noise.values, frames, t);
            write_file(&path, &plot::pgm(cols, rows, &plot::value_pixels(&values)))?;
            written.push(path);
        }
    }
    let spectral = noise.clone().unwrap_or_else(|| mask.to_reals());
    match radial_profile(&spectral) {
        Ok(profile) => {
            let title = match &noise {
                Some(n) => format!("{} noise {}", n.color.as_str(), n.shape),
                None => format!("mask {} gamma {:.3}", mask.shape, mask.gamma),
            };
            let path = a.out.join("profile.svg");
            write_file(&path, plot::profile_svg(&profile, &title).as_bytes())?;
            written.push(path);
        }
        Err(e) => say(out, format_args!("no radial profile: {e}"))?,
    }
    for path in written {
        say(out, format_args!("{}", path.display()))?;
    }
    Ok(())
}
