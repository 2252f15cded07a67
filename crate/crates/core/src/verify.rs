//! Batch checks of bank entries against the spectral and geometric oracles.

use serde::{Deserialize, Serialize};

use crate::bank::{BankColor, MaskBank};
use crate::error::Result;
use crate::exec::Parallelism;
use crate::masking::{eta, MaskRatio, MaskTensor};
use crate::optim_blue::{DEFAULT_WEIGHTS, DEFAULT_WINDOW};
use crate::spectrum::{
    classify_color, radial_profile, temporal_smoothness, uniformity, SpectralClass,
    UniformityReport,
};

pub const CLASSIFICATION_NOTE: &str =
    "color verdicts come from calibrated band-energy rules on the radially averaged power spectrum";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Fraction of entries that must match the expected class.
    pub min_pass_rate: f64,
    /// Ratio used to binarize noise entries for smoothness and uniformity.
    pub gamma: f64,
    pub window: usize,
    pub weights: [f64; 4],
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            min_pass_rate: 0.9,
            gamma: 0.75,
            window: DEFAULT_WINDOW,
            weights: DEFAULT_WEIGHTS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryReport {
    pub index: usize,
    pub verdict: SpectralClass,
    pub centroid: Option<f64>,
    pub band_energy: Option<[f64; 3]>,
    pub smoothness: Option<f64>,
    pub uniformity: Option<UniformityReport>,
    pub masked: usize,
    pub visible: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub note: String,
    pub bank_color: BankColor,
    pub bank_digest: String,
    pub expected: SpectralClass,
    pub options: VerifyOptions,
    pub entries: Vec<EntryReport>,
    pub passed: usize,
    pub pass_rate: f64,
    pub ok: bool,
}

/// Oracle readings for one mask and, when available, the noise it came from.
pub fn mask_report(
    index: usize,
    mask: &MaskTensor,
    spectral_source: Option<&crate::noise::NoiseTensor>,
    options: &VerifyOptions,
) -> EntryReport {
    let reals = mask.to_reals();
    let profile = radial_profile(spectral_source.unwrap_or(&reals)).ok();
    EntryReport {
        index,
        verdict: profile
            .as_ref()
            .map(classify_color)
            .unwrap_or(SpectralClass::Indeterminate),
        centroid: profile.as_ref().map(|p| p.centroid),
        band_energy: profile.as_ref().map(|p| p.band_energy),
        smoothness: temporal_smoothness(mask).ok(),
        uniformity: uniformity(mask, options.window, &options.weights).ok(),
        masked: mask.popcount(),
        visible: mask.visible_count(),
    }
}

/// Oracle readings for bank entry `index`.
pub fn entry_report(bank: &MaskBank, index: usize, options: &VerifyOptions) -> Result<EntryReport> {
    if let Some(mask) = bank.mask_entry(index) {
        return Ok(mask_report(index, &mask, None, options));
    }
    let noise = bank.noise_entry(index).ok_or_else(|| {
        crate::error::Error::Parameter(format!("entry {index} out of range"))
    })?;
    let mask = eta(&noise, MaskRatio::new(options.gamma)?);
    Ok(mask_report(index, &mask, Some(&noise), options))
}

pub fn verify_bank(
    bank: &MaskBank,
    expected: SpectralClass,
    options: &VerifyOptions,
    parallelism: Parallelism,
) -> Result<VerifyReport> {
    MaskRatio::new(options.gamma)?;
    let entries = parallelism.try_map(bank.len(), |i| entry_report(bank, i, options))?;
    let passed = entries.iter().filter(|e| e.verdict == expected).count();
    let pass_rate = if entries.is_empty() {
        1.0
    } else {
        passed as f64 / entries.len() as f64
    };
    Ok(VerifyReport {
        note: CLASSIFICATION_NOTE.to_string(),
        bank_color: bank.metadata().color,
        bank_digest: bank.digest().to_string(),
        expected,
        options: options.clone(),
        ok: pass_rate >= options.min_pass_rate,
        entries,
        passed,
        pass_rate,
    })
}
