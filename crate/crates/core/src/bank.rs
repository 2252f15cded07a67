//! Precomputed banks of noise tensors or binary masks, their on-disk format,
//! and ratio-exact sampling with flip/resize augmentation.
//!
//! A bank on disk is a directory holding `entries.npy` (entries stacked along
//! a leading axis) and `bank.json` (metadata). Color banks keep normalized
//! continuous noise as `<f4`; optim-blue banks keep binary masks as `|u1`
//! with 1 = masked.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::augment::{flip, resize, FlipAxis};
use crate::error::{Error, Result};
use crate::exec::Parallelism;
use crate::grid::GridShape;
use crate::masking::{eta, masked_count, MaskRatio, MaskTensor};
use crate::noise::{color_noise, normalize, Color, NoiseTensor, SigmaPolicy};
use crate::npy::{read_npy, to_npy_bytes, NpyArray, NpyData};
use crate::optim_blue::{export_mask, optimize_blue, OptimBlueConfig, DEFAULT_WEIGHTS, DEFAULT_WINDOW};
use crate::rng::{self, Stream};

pub const FORMAT_VERSION: &str = "1.0";
pub const ENTRIES_FILE: &str = "entries.npy";
pub const METADATA_FILE: &str = "bank.json";

/// Masking ratio used for both modalities when pairing audio and video masks.
pub const DEFAULT_PAIR_RATIO: f64 = 0.75;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BankColor {
    White,
    Red,
    Blue,
    Green,
    Green3d,
    OptimBlue,
}

impl BankColor {
    pub const ALL: [BankColor; 6] = [
        BankColor::White,
        BankColor::Red,
        BankColor::Blue,
        BankColor::Green,
        BankColor::Green3d,
        BankColor::OptimBlue,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BankColor::White => "white",
            BankColor::Red => "red",
            BankColor::Blue => "blue",
            BankColor::Green => "green",
            BankColor::Green3d => "green3d",
            BankColor::OptimBlue => "optim-blue",
        }
    }

    /// Grid rank the color is generated on.
    pub fn rank(self) -> usize {
        match self {
            BankColor::Green3d => 3,
            _ => 2,
        }
    }

    pub fn is_binary(self) -> bool {
        self == BankColor::OptimBlue
    }

    fn noise_color(self) -> Option<Color> {
        match self {
            BankColor::White => Some(Color::White),
            BankColor::Red => Some(Color::Red),
            BankColor::Blue => Some(Color::Blue),
            BankColor::Green | BankColor::Green3d => Some(Color::Green),
            BankColor::OptimBlue => None,
        }
    }

    /// σ policy used when none is given.
    pub fn default_sigma_policy(self) -> Option<SigmaPolicy> {
        match self {
            BankColor::White | BankColor::OptimBlue => None,
            BankColor::Red | BankColor::Blue => Some(SigmaPolicy::fixed(2.0)),
            BankColor::Green => Some(SigmaPolicy::fixed_pair(1.0, 2.0)),
            BankColor::Green3d => Some(SigmaPolicy::variant5()),
        }
    }
}

impl fmt::Display for BankColor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BankColor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BankColor::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown bank color '{s}'")))
    }
}

/// Optimizer settings for optim-blue banks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimBlueParams {
    pub masks: usize,
    pub transmittance: f64,
    pub window: usize,
    pub weights: [f64; 4],
}

impl Default for OptimBlueParams {
    fn default() -> Self {
        OptimBlueParams {
            masks: 5,
            transmittance: 0.2,
            window: DEFAULT_WINDOW,
            weights: DEFAULT_WEIGHTS,
        }
    }
}

/// Everything needed to (re)generate a bank.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub color: BankColor,
    pub shape: GridShape,
    pub sigma_policy: Option<SigmaPolicy>,
    pub optim_blue: Option<OptimBlueParams>,
    pub seed: u64,
}

impl GenConfig {
    /// Config with the color's default σ policy / optimizer settings.
    pub fn new(color: BankColor, shape: GridShape, seed: u64) -> Self {
        GenConfig {
            color,
            shape,
            sigma_policy: color.default_sigma_policy(),
            optim_blue: color.is_binary().then(OptimBlueParams::default),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.shape.rank() != self.color.rank() {
            return Err(Error::Config(format!(
                "color {} needs a rank-{} shape, got {}",
                self.color,
                self.color.rank(),
                self.shape
            )));
        }
        match self.color.noise_color() {
            Some(color) => {
                if self.optim_blue.is_some() {
                    return Err(Error::Config(format!(
                        "optimizer settings do not apply to color {}",
                        self.color
                    )));
                }
                match (&self.sigma_policy, color.sigma_count()) {
                    (None, 0) => {}
                    (Some(_), 0) => {
                        return Err(Error::Config("white noise takes no sigma policy".into()))
                    }
                    (None, _) => {
                        return Err(Error::Config(format!(
                            "color {} needs a sigma policy",
                            self.color
                        )))
                    }
                    (Some(policy), _) => policy.validate()?,
                }
                if let Some(SigmaPolicy::Fixed { sigma1, sigma2 }) = &self.sigma_policy {
                    if color == Color::Green {
                        match sigma2 {
                            Some(s2) if sigma1 < s2 => {}
                            _ => {
                                return Err(Error::Config(
                                    "green noise needs fixed sigmas with sigma1 < sigma2".into(),
                                ))
                            }
                        }
                    }
                }
            }
            None => {
                if self.sigma_policy.is_some() {
                    return Err(Error::Config("optim-blue takes no sigma policy".into()));
                }
                let params = self
                    .optim_blue
                    .as_ref()
                    .ok_or_else(|| Error::Config("optim-blue needs optimizer settings".into()))?;
                let probe = self.optimizer_config(params, 0);
                probe.validate()?;
                if params.masks * probe.visible_cap() > self.shape.len() {
                    return Err(Error::Config(format!(
                        "{} masks of {} visible cells do not fit in {} cells",
                        params.masks,
                        probe.visible_cap(),
                        self.shape.len()
                    )));
                }
            }
        }
        Ok(())
    }

    fn optimizer_config(&self, params: &OptimBlueParams, seed: u64) -> OptimBlueConfig {
        OptimBlueConfig {
            masks: params.masks,
            shape: self.shape.clone(),
            transmittance: params.transmittance,
            window: params.window,
            weights: params.weights,
            seed,
        }
    }

    /// Exported masking ratio of optim-blue entries.
    pub fn entry_gamma(&self) -> Option<f64> {
        self.optim_blue.as_ref().map(|p| {
            let cap = self.optimizer_config(p, 0).visible_cap();
            1.0 - cap as f64 / self.shape.len() as f64
        })
    }

    fn entries_per_seed(&self) -> usize {
        self.optim_blue.as_ref().map_or(1, |p| p.masks)
    }
}

/// Sidecar metadata written next to the payload.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BankMetadata {
    pub format_version: String,
    pub rng_id: String,
    pub color: BankColor,
    pub sigma_policy: Option<SigmaPolicy>,
    pub optim_blue: Option<OptimBlueParams>,
    pub root_seed: u64,
    /// One seed per noise entry, or one per optimizer run for optim-blue.
    pub seeds: Vec<u64>,
    /// σ values drawn for each noise entry.
    pub sigmas: Vec<Vec<f64>>,
    pub entry_shape: GridShape,
    pub count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Hex SHA-256 of the concatenated entry payloads.
    pub digest: String,
}

impl BankMetadata {
    pub fn gen_config(&self) -> GenConfig {
        GenConfig {
            color: self.color,
            shape: self.entry_shape.clone(),
            sigma_policy: self.sigma_policy.clone(),
            optim_blue: self.optim_blue.clone(),
            seed: self.root_seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Payload {
    Noise(Vec<f32>),
    Masks(Vec<u8>),
}

/// Immutable collection of equally shaped entries.
#[derive(Clone, Debug, PartialEq)]
pub struct MaskBank {
    metadata: BankMetadata,
    payload: Payload,
}

pub fn payload_digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl MaskBank {
    pub fn metadata(&self) -> &BankMetadata {
        &self.metadata
    }

    pub fn len(&self) -> usize {
        self.metadata.count
    }

    pub fn is_empty(&self) -> bool {
        self.metadata.count == 0
    }

    pub fn entry_shape(&self) -> &GridShape {
        &self.metadata.entry_shape
    }

    pub fn is_binary(&self) -> bool {
        matches!(self.payload, Payload::Masks(_))
    }

    fn cells(&self) -> usize {
        self.metadata.entry_shape.len()
    }

    /// Noise entry as f64 values, or `None` for binary banks.
    pub fn noise_entry(&self, index: usize) -> Option<NoiseTensor> {
        let cells = self.cells();
        match &self.payload {
            Payload::Noise(v) if index < self.len() => {
                let values = v[index * cells..(index + 1) * cells]
                    .iter()
                    .map(|&x| x as f64)
                    .collect();
                let mut n = NoiseTensor::from_values(self.metadata.entry_shape.clone(), values)
                    .ok()?;
                n.color = self.metadata.color.noise_color().unwrap_or(Color::White);
                n.sigma_params = self.metadata.sigmas.get(index).cloned().unwrap_or_default();
                n.seed = self.metadata.seeds.get(index).copied().unwrap_or(0);
                Some(n)
            }
            _ => None,
        }
    }

    /// Binary entry as a mask (1 = masked), or `None` for noise banks.
    pub fn mask_entry(&self, index: usize) -> Option<MaskTensor> {
        let cells = self.cells();
        match &self.payload {
            Payload::Masks(v) if index < self.len() => {
                let bits: Vec<bool> = v[index * cells..(index + 1) * cells]
                    .iter()
                    .map(|&b| b != 0)
                    .collect();
                let masked = bits.iter().filter(|&&b| b).count();
                Some(MaskTensor {
                    shape: self.metadata.entry_shape.clone(),
                    bits,
                    gamma: masked as f64 / cells as f64,
                    source: format!("bank:{}/entry={index}", self.metadata.color),
                })
            }
            _ => None,
        }
    }

    fn npy(&self) -> NpyArray {
        let mut shape = vec![self.len()];
        shape.extend_from_slice(self.metadata.entry_shape.dims());
        let data = match &self.payload {
            Payload::Noise(v) => NpyData::F32(v.clone()),
            Payload::Masks(v) => NpyData::U8(v.clone()),
        };
        NpyArray { shape, data }
    }

    pub fn payload_bytes(&self) -> Vec<u8> {
        match &self.payload {
            Payload::Noise(v) => v.iter().flat_map(|x| x.to_le_bytes()).collect(),
            Payload::Masks(v) => v.clone(),
        }
    }

    pub fn digest(&self) -> &str {
        &self.metadata.digest
    }
}

enum Entry {
    Noise { values: Vec<f32>, sigmas: Vec<f64> },
    Masks(Vec<u8>),
}

fn build_entry(config: &GenConfig, seed: u64) -> Result<Entry> {
    match (config.color.noise_color(), &config.optim_blue) {
        (Some(color), _) => {
            let policy = config
                .sigma_policy
                .clone()
                .unwrap_or_else(|| SigmaPolicy::fixed(1.0));
            let n = color_noise(&config.shape, color, &policy, seed)?;
            Ok(Entry::Noise {
                values: n.values.iter().map(|&v| v as f32).collect(),
                sigmas: n.sigma_params,
            })
        }
        (None, Some(params)) => {
            let set = optimize_blue(&config.optimizer_config(params, seed))?;
            let mut bytes = Vec::with_capacity(set.len() * config.shape.len());
            for i in 0..set.len() {
                bytes.extend(export_mask(&set, i)?.to_u8());
            }
            Ok(Entry::Masks(bytes))
        }
        (None, None) => Err(Error::Config("optim-blue needs optimizer settings".into())),
    }
}

fn assemble(config: &GenConfig, seeds: Vec<u64>, parallelism: Parallelism) -> Result<MaskBank> {
    let entries = parallelism.try_map(seeds.len(), |i| build_entry(config, seeds[i]))?;
    let mut sigmas = Vec::new();
    let payload = if config.color.is_binary() {
        Payload::Masks(
            entries
                .into_iter()
                .flat_map(|e| match e {
                    Entry::Masks(b) => b,
                    Entry::Noise { .. } => unreachable!("binary bank built a noise entry"),
                })
                .collect(),
        )
    } else {
        let mut values = Vec::with_capacity(seeds.len() * config.shape.len());
        for e in entries {
            if let Entry::Noise { values: v, sigmas: s } = e {
                values.extend(v);
                sigmas.push(s);
            }
        }
        Payload::Noise(values)
    };
    let mut bank = MaskBank {
        metadata: BankMetadata {
            format_version: FORMAT_VERSION.to_string(),
            rng_id: rng::RNG_ID.to_string(),
            color: config.color,
            sigma_policy: config.sigma_policy.clone(),
            optim_blue: config.optim_blue.clone(),
            root_seed: config.seed,
            count: seeds.len() * config.entries_per_seed(),
            seeds,
            sigmas,
            entry_shape: config.shape.clone(),
            gamma: config.entry_gamma(),
            digest: String::new(),
        },
        payload,
    };
    bank.metadata.digest = payload_digest(&bank.payload_bytes());
    Ok(bank)
}

/// Builds `count` entries (optimizer runs for optim-blue) with per-entry seeds
/// `split(root, i)`.
pub fn build_bank(config: &GenConfig, count: usize) -> Result<MaskBank> {
    build_bank_with(config, count, Parallelism::default())
}

pub fn build_bank_with(
    config: &GenConfig,
    count: usize,
    parallelism: Parallelism,
) -> Result<MaskBank> {
    config.validate()?;
    let seeds = (0..count as u64).map(|i| rng::split(config.seed, i)).collect();
    assemble(config, seeds, parallelism)
}

/// Rebuilds a bank from its metadata alone (configuration plus recorded seeds).
pub fn regenerate(metadata: &BankMetadata) -> Result<MaskBank> {
    let config = metadata.gen_config();
    config.validate()?;
    assemble(&config, metadata.seeds.clone(), Parallelism::default())
}

/// True when regenerating from metadata reproduces the recorded digest.
pub fn check_regeneration(bank: &MaskBank) -> Result<bool> {
    Ok(regenerate(&bank.metadata)?.metadata.digest == bank.metadata.digest)
}

pub fn metadata_json(metadata: &BankMetadata) -> String {
    let mut text = serde_json::to_string_pretty(metadata).expect("metadata serializes");
    text.push('\n');
    text
}

pub fn write_bank(bank: &MaskBank, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let entries = dir.join(ENTRIES_FILE);
    fs::write(&entries, to_npy_bytes(&bank.npy())).map_err(|e| Error::io(&entries, e))?;
    let sidecar = dir.join(METADATA_FILE);
    fs::write(&sidecar, metadata_json(&bank.metadata)).map_err(|e| Error::io(&sidecar, e))?;
    Ok(())
}

pub fn read_bank(dir: &Path) -> Result<MaskBank> {
    let sidecar = dir.join(METADATA_FILE);
    let text = fs::read(&sidecar).map_err(|e| Error::io(&sidecar, e))?;
    let metadata: BankMetadata = serde_json::from_slice(&text)
        .map_err(|e| Error::format(METADATA_FILE, e.to_string()))?;
    if metadata.format_version != FORMAT_VERSION {
        return Err(Error::format(
            "format_version",
            format!(
                "unsupported version '{}', expected '{FORMAT_VERSION}'",
                metadata.format_version
            ),
        ));
    }
    let entries = dir.join(ENTRIES_FILE);
    let bytes = fs::read(&entries).map_err(|e| Error::io(&entries, e))?;
    let array = read_npy(&bytes)?;

    let mut expected_shape = vec![metadata.count];
    expected_shape.extend_from_slice(metadata.entry_shape.dims());
    if array.shape != expected_shape {
        return Err(Error::format(
            "entry_shape",
            format!(
                "sidecar describes {:?} but {ENTRIES_FILE} holds {:?}",
                expected_shape, array.shape
            ),
        ));
    }
    let payload = match (array.data, metadata.color.is_binary()) {
        (NpyData::F32(v), false) => Payload::Noise(v),
        (NpyData::U8(v), true) => Payload::Masks(v),
        (data, _) => {
            return Err(Error::format(
                "descr",
                format!(
                    "dtype {} does not match color {}",
                    data.descr(),
                    metadata.color
                ),
            ))
        }
    };
    let bank = MaskBank { metadata, payload };
    let digest = payload_digest(&bank.payload_bytes());
    if digest != bank.metadata.digest {
        return Err(Error::format(
            "digest",
            format!("payload hashes to {digest}, sidecar says {}", bank.metadata.digest),
        ));
    }
    Ok(bank)
}

/// How a bank entry is turned into a mask for a token grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AugmentSpec {
    /// Axes that are each flipped with probability 1/2.
    pub flips: Vec<FlipAxis>,
    pub target_grid: GridShape,
    pub seed: u64,
}

impl AugmentSpec {
    pub fn new(target_grid: GridShape, seed: u64) -> Self {
        AugmentSpec {
            flips: Vec::new(),
            target_grid,
            seed,
        }
    }
}

/// Record of the random choices made while sampling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleProvenance {
    pub bank_digest: String,
    pub bank_color: BankColor,
    pub entry_index: usize,
    pub flips_applied: Vec<FlipAxis>,
    pub target_grid: GridShape,
    pub gamma: f64,
    pub seed: u64,
    pub masked: usize,
    pub visible: usize,
}

pub fn sample_mask(bank: &MaskBank, aug: &AugmentSpec, gamma: MaskRatio) -> Result<MaskTensor> {
    sample_mask_with_provenance(bank, aug, gamma).map(|(m, _)| m)
}

pub fn sample_mask_with_provenance(
    bank: &MaskBank,
    aug: &AugmentSpec,
    gamma: MaskRatio,
) -> Result<(MaskTensor, SampleProvenance)> {
    if bank.is_empty() {
        return Err(Error::Sampling("bank has no entries".into()));
    }
    let entry_shape = bank.entry_shape();
    if aug.target_grid.rank() != entry_shape.rank() {
        return Err(Error::Sampling(format!(
            "target grid {} has rank {} but bank entries are {} (rank {})",
            aug.target_grid,
            aug.target_grid.rank(),
            entry_shape,
            entry_shape.rank()
        )));
    }
    let mut axes = aug.flips.clone();
    axes.sort_unstable();
    axes.dedup();
    if let Some(bad) = axes.iter().find(|a| a.axis() >= entry_shape.rank()) {
        return Err(Error::Sampling(format!(
            "cannot flip {bad:?} on a rank-{} bank",
            entry_shape.rank()
        )));
    }

    let mut stream = Stream::new(aug.seed);
    let index = stream.below(bank.len() as u64) as usize;
    let flips: Vec<FlipAxis> = axes.into_iter().filter(|_| stream.coin()).collect();

    let mask = if let Some(entry) = bank.mask_entry(index) {
        if &aug.target_grid != entry_shape {
            return Err(Error::Sampling(format!(
                "binary entries of shape {entry_shape} cannot be resized to {}",
                aug.target_grid
            )));
        }
        let want = masked_count(entry_shape, gamma);
        if want != entry.popcount() {
            return Err(Error::Sampling(format!(
                "ratio {} asks for {want} masked cells but entries hold {}",
                gamma.value(),
                entry.popcount()
            )));
        }
        let mut bits = entry.bits;
        for axis in &flips {
            bits = flip(entry_shape, &bits, axis.axis())?;
        }
        MaskTensor {
            shape: entry_shape.clone(),
            bits,
            gamma: gamma.value(),
            source: String::new(),
        }
    } else {
        let entry = bank
            .noise_entry(index)
            .ok_or_else(|| Error::Sampling(format!("entry {index} unreadable")))?;
        let mut values = entry.values.clone();
        for axis in &flips {
            values = flip(entry_shape, &values, axis.axis())?;
        }
        let resized = resize(entry_shape, &values, &aug.target_grid)?;
        let noise = NoiseTensor {
            shape: aug.target_grid.clone(),
            values: resized,
            ..entry
        };
        eta(&normalize(&noise), gamma)
    };
    let flip_names: Vec<String> = flips.iter().map(|f| f.to_string()).collect();
    let mask = MaskTensor {
        source: format!(
            "bank:{}/entry={index}/flips=[{}]/seed={}",
            bank.metadata.color,
            flip_names.join(","),
            aug.seed
        ),
        ..mask
    };
    let provenance = SampleProvenance {
        bank_digest: bank.metadata.digest.clone(),
        bank_color: bank.metadata.color,
        entry_index: index,
        flips_applied: flips,
        target_grid: aug.target_grid.clone(),
        gamma: gamma.value(),
        seed: aug.seed,
        masked: mask.popcount(),
        visible: mask.visible_count(),
    };
    Ok((mask, provenance))
}

/// Samples a video mask and an audio mask from one root seed. The seeds in
/// the two augment specs are replaced by `split(seed, 0)` and `split(seed, 1)`.
#[allow(clippy::too_many_arguments)]
pub fn pair_sample(
    video_bank: &MaskBank,
    audio_bank: &MaskBank,
    video_aug: &AugmentSpec,
    audio_aug: &AugmentSpec,
    video_gamma: MaskRatio,
    audio_gamma: MaskRatio,
    seed: u64,
) -> Result<(MaskTensor, MaskTensor)> {
    if video_bank.entry_shape().rank() != 3 {
        return Err(Error::Config(format!(
            "video bank must be 3D, got {}",
            video_bank.entry_shape()
        )));
    }
    if audio_bank.entry_shape().rank() != 2 {
        return Err(Error::Config(format!(
            "audio bank must be 2D, got {}",
            audio_bank.entry_shape()
        )));
    }
    let video = AugmentSpec {
        seed: rng::split(seed, 0),
        ..video_aug.clone()
    };
    let audio = AugmentSpec {
        seed: rng::split(seed, 1),
        ..audio_aug.clone()
    };
    Ok((
        sample_mask(video_bank, &video, video_gamma)?,
        sample_mask(audio_bank, &audio, audio_gamma)?,
    ))
}
