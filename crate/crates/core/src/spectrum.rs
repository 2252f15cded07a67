//! Spectral and geometric oracles: radially averaged power spectra, color
//! classification, temporal smoothness and visible-patch uniformity.
//!
//! Radial frequency of a DFT coefficient is `‖(k_0/n_0, …, k_d/n_d)‖` with
//! signed indices `k_i`, so 0.5 is Nyquist along every axis. Coefficients
//! beyond 0.5 (the corners) and the DC term are left out of every statistic.

use std::fmt;
use std::str::FromStr;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridShape;
use crate::masking::MaskTensor;
use crate::noise::NoiseTensor;
use crate::optim_blue::clustering_score;

pub const RADIAL_BINS: usize = 32;
pub const LOW_BAND_EDGE: f64 = 1.0 / 6.0;
pub const MID_BAND_EDGE: f64 = 1.0 / 3.0;
const NYQUIST: f64 = 0.5;

/// Squared DFT magnitudes in row-major order (unnormalized forward DFT, so
/// `Σ power = N · Σ x²`).
pub fn power_spectrum(n: &NoiseTensor) -> Vec<f64> {
    let shape = &n.shape;
    let strides = shape.strides();
    let mut data: Vec<Complex<f64>> = n.values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    let mut line = Vec::new();
    for (axis, &len) in shape.dims().iter().enumerate() {
        let fft = planner.plan_fft_forward(len);
        let stride = strides[axis];
        for start in 0..data.len() {
            if !(start / stride).is_multiple_of(len) {
                continue;
            }
            line.clear();
            line.extend((0..len).map(|i| data[start + i * stride]));
            fft.process(&mut line);
            for (i, v) in line.iter().enumerate() {
                data[start + i * stride] = *v;
            }
        }
    }
    data.iter().map(|c| c.norm_sqr()).collect()
}

/// Normalized radial frequency of every DFT coefficient, row-major.
pub fn radial_frequencies(shape: &GridShape) -> Vec<f64> {
    (0..shape.len())
        .map(|i| {
            shape
                .coords(i)
                .iter()
                .zip(shape.dims())
                .map(|(&k, &n)| {
                    let signed = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
                    let f = signed / n as f64;
                    f * f
                })
                .sum::<f64>()
                .sqrt()
        })
        .collect()
}

fn band_of(r: f64) -> usize {
    if r < LOW_BAND_EDGE {
        0
    } else if r < MID_BAND_EDGE {
        1
    } else {
        2
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialBin {
    /// Bin center in normalized frequency.
    pub frequency: f64,
    pub mean_power: f64,
    pub coefficients: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumProfile {
    pub bins: Vec<RadialBin>,
    /// `Σ r·p / Σ p` over nonempty bins, with `p` the bin mean power.
    pub centroid: f64,
    /// Fractions of non-DC power in the low, mid and high bands.
    pub band_energy: [f64; 3],
    /// Band fractions a perfectly flat spectrum would give on this grid.
    pub flat_band_energy: [f64; 3],
    /// Sum of all squared DFT magnitudes, DC included.
    pub total_power: f64,
}

impl SpectrumProfile {
    /// Band energy divided by the flat-spectrum share of that band.
    pub fn band_density(&self) -> [f64; 3] {
        let mut out = [0.0; 3];
        for b in 0..3 {
            out[b] = if self.flat_band_energy[b] > 0.0 {
                self.band_energy[b] / self.flat_band_energy[b]
            } else {
                0.0
            };
        }
        out
    }

    /// Index of the highest nonempty bin.
    pub fn peak_bin(&self) -> usize {
        self.bins
            .iter()
            .enumerate()
            .filter(|(_, b)| b.coefficients > 0)
            .max_by(|a, b| a.1.mean_power.total_cmp(&b.1.mean_power))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    /// True when the peak bin is neither the lowest nor the highest nonempty bin.
    pub fn has_interior_peak(&self) -> bool {
        let nonempty: Vec<usize> = self
            .bins
            .iter()
            .enumerate()
            .filter(|(_, b)| b.coefficients > 0)
            .map(|(i, _)| i)
            .collect();
        let peak = self.peak_bin();
        nonempty.len() >= 3 && peak != nonempty[0] && peak != nonempty[nonempty.len() - 1]
    }
}

/// Radially averaged power spectrum in [`RADIAL_BINS`] bins over (0, 0.5].
pub fn radial_profile(n: &NoiseTensor) -> Result<SpectrumProfile> {
    let power = power_spectrum(n);
    profile_from_power(&n.shape, &power)
}

pub(crate) fn profile_from_power(shape: &GridShape, power: &[f64]) -> Result<SpectrumProfile> {
    let radii = radial_frequencies(shape);
    let total_power: f64 = power.iter().sum();
    let mut sums = vec![0.0; RADIAL_BINS];
    let mut counts = vec![0usize; RADIAL_BINS];
    let mut bands = [0.0; 3];
    let mut band_counts = [0usize; 3];
    for (i, (&r, &p)) in radii.iter().zip(power).enumerate() {
        if i == 0 || r > NYQUIST {
            continue;
        }
        let bin = ((r / NYQUIST * RADIAL_BINS as f64) as usize).min(RADIAL_BINS - 1);
        sums[bin] += p;
        counts[bin] += 1;
        bands[band_of(r)] += p;
        band_counts[band_of(r)] += 1;
    }
    let non_dc: f64 = bands.iter().sum();
    if !(non_dc > 1e-24 * total_power.max(f64::MIN_POSITIVE)) {
        return Err(Error::UndefinedProfile(
            "input has no power outside DC".into(),
        ));
    }
    let bins: Vec<RadialBin> = (0..RADIAL_BINS)
        .map(|b| RadialBin {
            frequency: (b as f64 + 0.5) * NYQUIST / RADIAL_BINS as f64,
            mean_power: if counts[b] > 0 {
                sums[b] / counts[b] as f64
            } else {
                0.0
            },
            coefficients: counts[b],
        })
        .collect();
    let (weighted, mass) = bins
        .iter()
        .filter(|b| b.coefficients > 0)
        .fold((0.0, 0.0), |(w, m), b| {
            (w + b.frequency * b.mean_power, m + b.mean_power)
        });
    let counted: usize = band_counts.iter().sum();
    Ok(SpectrumProfile {
        bins,
        centroid: weighted / mass,
        band_energy: bands.map(|e| e / non_dc),
        flat_band_energy: band_counts.map(|c| c as f64 / counted as f64),
        total_power,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectralClass {
    Red,
    Green,
    Blue,
    White,
    Indeterminate,
}

impl fmt::Display for SpectralClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpectralClass::Red => "red",
            SpectralClass::Green => "green",
            SpectralClass::Blue => "blue",
            SpectralClass::White => "white",
            SpectralClass::Indeterminate => "indeterminate",
        })
    }
}

impl FromStr for SpectralClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "red" => Ok(SpectralClass::Red),
            "green" | "green3d" => Ok(SpectralClass::Green),
            "blue" | "optim-blue" => Ok(SpectralClass::Blue),
            "white" => Ok(SpectralClass::White),
            "indeterminate" => Ok(SpectralClass::Indeterminate),
            _ => Err(Error::Parameter(format!("unknown spectral class '{s}'"))),
        }
    }
}

/// Decision thresholds on band-energy fractions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyThresholds {
    /// Red when the low-band fraction exceeds this.
    pub red_low: f64,
    /// Blue when the high-band fraction exceeds this (and the entry is not white).
    pub blue_high: f64,
    /// White when every band fraction is within this of the flat-spectrum share.
    pub white_delta: f64,
}

/// Thresholds fitted by `cargo run --release --example calibrate`; the run's
/// output is kept in `calibration/spectral_calibration.json`.
pub const CALIBRATED: ClassifyThresholds = ClassifyThresholds {
    red_low: 0.55,
    blue_high: 0.565,
    white_delta: 0.035,
};

/// Rule-based color verdict using [`CALIBRATED`] thresholds.
pub fn classify_color(profile: &SpectrumProfile) -> SpectralClass {
    classify_color_with(profile, &CALIBRATED)
}

/// Rules, first match wins: red, white, blue, green (mid band strictly
/// largest with an interior spectral peak), otherwise indeterminate. White is
/// tested before blue because the high-band share of white noise overlaps
/// that of mildly high-passed noise; only the depleted low band tells them
/// apart.
pub fn classify_color_with(profile: &SpectrumProfile, t: &ClassifyThresholds) -> SpectralClass {
    let [low, mid, high] = profile.band_energy;
    let flat = profile.flat_band_energy;
    if low > t.red_low {
        SpectralClass::Red
    } else if profile
        .band_energy
        .iter()
        .zip(&flat)
        .all(|(e, f)| (e - f).abs() <= t.white_delta)
    {
        SpectralClass::White
    } else if high > t.blue_high {
        SpectralClass::Blue
    } else if mid > low && mid > high && profile.has_interior_peak() {
        SpectralClass::Green
    } else {
        SpectralClass::Indeterminate
    }
}

/// Mean fraction of tokens whose bit changes between consecutive frames.
pub fn temporal_smoothness(m: &MaskTensor) -> Result<f64> {
    if m.shape.rank() != 3 {
        return Err(Error::Parameter(format!(
            "temporal smoothness needs a 3D mask with several frames, got {}",
            m.shape
        )));
    }
    let frames = m.shape.frames();
    let plane = m.bits.len() / frames;
    let flips: usize = m
        .bits
        .chunks_exact(frames)
        .map(|tube| tube.windows(2).filter(|w| w[0] != w[1]).count())
        .sum();
    Ok(flips as f64 / (plane * (frames - 1)) as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformityReport {
    pub mean_nn_distance: f64,
    pub mean_clustering_score: f64,
    pub visible_count: usize,
}

/// Brute-force nearest-neighbor statistics of the visible cells of a 2D mask.
pub fn uniformity(m: &MaskTensor, window: usize, weights: &[f64; 4]) -> Result<UniformityReport> {
    if m.shape.rank() != 2 {
        return Err(Error::Parameter(format!(
            "uniformity needs a 2D mask, got {}",
            m.shape
        )));
    }
    let cols = m.shape.dims()[1];
    let visible: Vec<bool> = m.bits.iter().map(|&b| !b).collect();
    let points: Vec<(usize, usize)> = visible
        .iter()
        .enumerate()
        .filter(|(_, &v)| v)
        .map(|(i, _)| (i / cols, i % cols))
        .collect();
    if points.len() < 2 {
        return Err(Error::Parameter(format!(
            "uniformity needs at least 2 visible cells, got {}",
            points.len()
        )));
    }
    let mut nn_total = 0.0;
    let mut score_total = 0.0;
    for (i, &(r, c)) in points.iter().enumerate() {
        let nearest = points
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &(r2, c2))| {
                let dr = r as f64 - r2 as f64;
                let dc = c as f64 - c2 as f64;
                dr * dr + dc * dc
            })
            .fold(f64::INFINITY, f64::min);
        nn_total += nearest.sqrt();
        score_total += clustering_score(&visible, &m.shape, (r, c), window, weights)?;
    }
    let n = points.len() as f64;
    Ok(UniformityReport {
        mean_nn_distance: nn_total / n,
        mean_clustering_score: score_total / n,
        visible_count: points.len(),
    })
}
