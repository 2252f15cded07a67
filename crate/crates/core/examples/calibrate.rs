//! Fits the spectral classification thresholds.
//!
//! Runs 100 seeds of each color at 64x64 (σ = 2; green uses σ1 = 1, σ2 = 2),
//! records band-energy and centroid distributions, and reports the pass
//! rates of the thresholds compiled into the library. Output goes to
//! `calibration/spectral_calibration.json`.

use std::collections::BTreeMap;

use noisemask::augment::resize;
use noisemask::spectrum::{classify_color, radial_profile, SpectralClass, CALIBRATED};
use noisemask::{color_noise, Color, GridShape, NoiseTensor, Parallelism, SigmaPolicy};
use serde_json::json;

const SEEDS: u64 = 100;

fn summary(values: &[f64]) -> serde_json::Value {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    json!({ "mean": mean, "std": std, "min": min, "max": max })
}

fn main() {
    let shape = GridShape::d2(64, 64).unwrap();
    let cases = [
        (Color::White, SigmaPolicy::fixed(2.0), SpectralClass::White),
        (Color::Red, SigmaPolicy::fixed(2.0), SpectralClass::Red),
        (Color::Green, SigmaPolicy::fixed_pair(1.0, 2.0), SpectralClass::Green),
        (Color::Blue, SigmaPolicy::fixed(2.0), SpectralClass::Blue),
    ];
    let mut report = BTreeMap::new();
    for (color, policy, expected) in cases {
        let profiles = Parallelism::default().map(SEEDS as usize, |seed| {
            radial_profile(&color_noise(&shape, color, &policy, seed as u64).unwrap()).unwrap()
        });
        let fractions: Vec<[f64; 3]> = profiles.iter().map(|p| p.band_energy).collect();
        let centroids: Vec<f64> = profiles.iter().map(|p| p.centroid).collect();
        let hits = profiles
            .iter()
            .filter(|p| classify_color(p) == expected)
            .count();
        let mut verdicts = BTreeMap::new();
        for p in &profiles {
            *verdicts.entry(classify_color(p).to_string()).or_insert(0) += 1;
        }
        let entry = json!({
            "sigma_policy": policy,
            "flat_fraction": profiles[0].flat_band_energy,
            "centroid": summary(&centroids),
            "low_fraction": summary(&fractions.iter().map(|d| d[0]).collect::<Vec<_>>()),
            "mid_fraction": summary(&fractions.iter().map(|d| d[1]).collect::<Vec<_>>()),
            "high_fraction": summary(&fractions.iter().map(|d| d[2]).collect::<Vec<_>>()),
            "pass_rate": hits as f64 / SEEDS as f64,
            "verdicts": verdicts,
        });
        println!("{color}: {}", serde_json::to_string(&entry).unwrap());
        report.insert(color.to_string(), entry);
    }
    // Red is the color whose low-band share drops most when banks are
    // downscaled, so its 2x-downscaled distribution also bounds red_low.
    let half = GridShape::d2(32, 32).unwrap();
    let resized_low: Vec<f64> = Parallelism::default().map(SEEDS as usize, |seed| {
        let n = color_noise(&shape, Color::Red, &SigmaPolicy::fixed(2.0), seed as u64).unwrap();
        let small = resize(&shape, &n.values, &half).unwrap();
        radial_profile(&NoiseTensor::from_values(half.clone(), small).unwrap())
            .unwrap()
            .band_energy[0]
    });
    println!("red resized to 32x32, low fraction: {}", summary(&resized_low));

    let out = json!({
        "red_resized_32x32_low_fraction": summary(&resized_low),
        "grid": shape.to_string(),
        "seeds": SEEDS,
        "thresholds": CALIBRATED,
        "colors": report,
    });
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/calibration/spectral_calibration.json");
    std::fs::write(path, serde_json::to_string_pretty(&out).unwrap() + "\n").unwrap();
    println!("wrote {path}");
}
