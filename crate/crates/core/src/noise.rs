//! White noise and its Gaussian-filtered color variants.
//!
//! Red noise is white noise low-passed by a Gaussian, blue noise is the
//! residual `white - red`, and green noise is a difference of two Gaussians
//! (band-pass). All filtering is separable and circular, in 2D or 3D.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridShape;
use crate::rng::{self, Stream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    White,
    Red,
    Blue,
    Green,
}

impl Color {
    pub fn as_str(self) -> &'static str {
        match self {
            Color::White => "white",
            Color::Red => "red",
            Color::Blue => "blue",
            Color::Green => "green",
        }
    }

    /// Number of σ values the color consumes.
    pub fn sigma_count(self) -> usize {
        match self {
            Color::White => 0,
            Color::Red | Color::Blue => 1,
            Color::Green => 2,
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Color {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "white" => Ok(Color::White),
            "red" => Ok(Color::Red),
            "blue" => Ok(Color::Blue),
            "green" => Ok(Color::Green),
            _ => Err(Error::Parameter(format!("unknown color '{s}'"))),
        }
    }
}

/// How σ values are chosen for a colored tensor.
///
/// Single-σ colors (red, blue) use `sigma1` / the first interval only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum SigmaPolicy {
    Fixed {
        sigma1: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sigma2: Option<f64>,
    },
    /// σ1 ~ U(lo1, hi1), σ2 ~ U(lo2, hi2); pairs with σ1 ≥ σ2 are redrawn.
    UniformRange {
        lo1: f64,
        hi1: f64,
        lo2: f64,
        hi2: f64,
    },
}

const MAX_SIGMA_REDRAWS: usize = 10_000;

impl SigmaPolicy {
    pub fn fixed(sigma: f64) -> Self {
        SigmaPolicy::Fixed {
            sigma1: sigma,
            sigma2: None,
        }
    }

    pub fn fixed_pair(sigma1: f64, sigma2: f64) -> Self {
        SigmaPolicy::Fixed {
            sigma1,
            sigma2: Some(sigma2),
        }
    }

    /// Both σ drawn from [0.5, 2].
    pub fn main_text() -> Self {
        SigmaPolicy::UniformRange {
            lo1: 0.5,
            hi1: 2.0,
            lo2: 0.5,
            hi2: 2.0,
        }
    }

    /// σ1 ~ U(0.4, 1.5), σ2 ~ U(1.4, 3); the default for green 3D banks.
    pub fn variant5() -> Self {
        SigmaPolicy::UniformRange {
            lo1: 0.4,
            hi1: 1.5,
            lo2: 1.4,
            hi2: 3.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Parameter(format!("{name} must be positive, got {v}")))
            }
        };
        match *self {
            SigmaPolicy::Fixed { sigma1, sigma2 } => {
                positive("sigma1", sigma1)?;
                if let Some(s2) = sigma2 {
                    positive("sigma2", s2)?;
                }
            }
            SigmaPolicy::UniformRange { lo1, hi1, lo2, hi2 } => {
                for (name, v) in [("lo1", lo1), ("hi1", hi1), ("lo2", lo2), ("hi2", hi2)] {
                    positive(name, v)?;
                }
                if lo1 > hi1 || lo2 > hi2 {
                    return Err(Error::Parameter(format!(
                        "sigma ranges must satisfy lo <= hi: [{lo1}, {hi1}], [{lo2}, {hi2}]"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Resolves the σ values for `color`, drawing from `stream` if needed.
    pub fn resolve(&self, color: Color, stream: &mut Stream) -> Result<Vec<f64>> {
        self.validate()?;
        match (color.sigma_count(), self) {
            (0, _) => Ok(Vec::new()),
            (1, SigmaPolicy::Fixed { sigma1, .. }) => Ok(vec![*sigma1]),
            (1, SigmaPolicy::UniformRange { lo1, hi1, .. }) => {
                Ok(vec![stream.uniform_in(*lo1, *hi1)])
            }
            (_, SigmaPolicy::Fixed { sigma1, sigma2 }) => {
                let sigma2 = sigma2.ok_or_else(|| {
                    Error::Parameter("green noise needs two sigma values".into())
                })?;
                if *sigma1 >= sigma2 {
                    return Err(Error::Parameter(format!(
                        "green noise needs sigma1 < sigma2, got {sigma1} >= {sigma2}"
                    )));
                }
                Ok(vec![*sigma1, sigma2])
            }
            (_, SigmaPolicy::UniformRange { lo1, hi1, lo2, hi2 }) => {
                if lo1 >= hi2 {
                    return Err(Error::Parameter(format!(
                        "no sigma1 < sigma2 possible with sigma1 >= {lo1} and sigma2 < {hi2}"
                    )));
                }
                for _ in 0..MAX_SIGMA_REDRAWS {
                    let s1 = stream.uniform_in(*lo1, *hi1);
                    let s2 = stream.uniform_in(*lo2, *hi2);
                    if s1 < s2 {
                        return Ok(vec![s1, s2]);
                    }
                }
                Err(Error::Parameter(
                    "sigma ranges almost never yield sigma1 < sigma2".into(),
                ))
            }
        }
    }
}

/// Real-valued field on a grid together with how it was generated.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseTensor {
    pub shape: GridShape,
    pub values: Vec<f64>,
    pub color: Color,
    pub sigma_params: Vec<f64>,
    pub seed: u64,
    pub rng_id: String,
}

impl NoiseTensor {
    /// Wraps raw values as an untagged (white) tensor.
    pub fn from_values(shape: GridShape, values: Vec<f64>) -> Result<Self> {
        if values.len() != shape.len() {
            return Err(Error::Shape(format!(
                "{} values do not fill grid {shape}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!("non-finite noise value {v}")));
        }
        Ok(NoiseTensor {
            shape,
            values,
            color: Color::White,
            sigma_params: Vec::new(),
            seed: 0,
            rng_id: rng::RNG_ID.to_string(),
        })
    }

    fn with_values(&self, values: Vec<f64>) -> Self {
        NoiseTensor {
            shape: self.shape.clone(),
            values,
            color: self.color,
            sigma_params: self.sigma_params.clone(),
            seed: self.seed,
            rng_id: self.rng_id.clone(),
        }
    }
}

/// I.i.d. uniform [0, 1) cells in row-major order.
pub fn white_noise(shape: &GridShape, seed: u64) -> NoiseTensor {
    let mut stream = Stream::new(seed);
    let values = (0..shape.len()).map(|_| stream.uniform()).collect();
    NoiseTensor {
        shape: shape.clone(),
        values,
        color: Color::White,
        sigma_params: Vec::new(),
        seed,
        rng_id: rng::RNG_ID.to_string(),
    }
}

/// Normalized 1D Gaussian taps for offsets `-R..=R` with `R = ceil(3σ)`.
///
/// The isotropic d-dimensional kernel is the outer product of these taps, so
/// `rank` does not change the result; it is validated and kept for callers
/// that want to be explicit about the kernel they realize.
pub fn gaussian_kernel(sigma: f64, rank: usize) -> Result<Vec<f64>> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::Parameter(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    if !(2..=3).contains(&rank) {
        return Err(Error::Parameter(format!("kernel rank must be 2 or 3, got {rank}")));
    }
    let radius = (3.0 * sigma).ceil() as i64;
    let denom = 2.0 * sigma * sigma;
    let mut taps: Vec<f64> = (-radius..=radius)
        .map(|k| (-((k * k) as f64) / denom).exp())
        .collect();
    let total: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= total);
    Ok(taps)
}

/// Circular convolution of `values` with `taps` along each axis in turn.
pub(crate) fn convolve_separable(shape: &GridShape, values: &[f64], taps: &[f64]) -> Vec<f64> {
    let radius = (taps.len() / 2) as i64;
    let strides = shape.strides();
    let mut current = values.to_vec();
    let mut line = Vec::new();
    for (axis, &len) in shape.dims().iter().enumerate() {
        let stride = strides[axis];
        let mut next = vec![0.0; current.len()];
        // Each line along `axis` starts at a cell whose coordinate on `axis` is 0.
        for start in 0..current.len() {
            if !(start / stride).is_multiple_of(len) {
                continue;
            }
            line.clear();
            line.extend((0..len).map(|i| current[start + i * stride]));
            for i in 0..len {
                let mut acc = 0.0;
                for (t, &w) in taps.iter().enumerate() {
                    let offset = t as i64 - radius;
                    let src = (i as i64 - offset).rem_euclid(len as i64) as usize;
                    acc += w * line[src];
                }
                next[start + i * stride] = acc;
            }
        }
        current = next;
    }
    current
}

/// Gaussian low-pass with circular boundaries; output shape equals input.
pub fn filter_gaussian(n: &NoiseTensor, sigma: f64) -> Result<NoiseTensor> {
    let taps = gaussian_kernel(sigma, n.shape.rank())?;
    Ok(n.with_values(convolve_separable(&n.shape, &n.values, &taps)))
}

/// Colored noise before z-score normalization.
pub fn raw_color_noise(
    shape: &GridShape,
    color: Color,
    policy: &SigmaPolicy,
    seed: u64,
) -> Result<NoiseTensor> {
    let white = white_noise(shape, seed);
    let mut sigma_stream = Stream::new(rng::split(seed, rng::SIGMA_STREAM));
    let sigmas = policy.resolve(color, &mut sigma_stream)?;
    let values = match color {
        Color::White => white.values.clone(),
        Color::Red => filter_gaussian(&white, sigmas[0])?.values,
        Color::Blue => {
            let low = filter_gaussian(&white, sigmas[0])?;
            white
                .values
                .iter()
                .zip(&low.values)
                .map(|(w, l)| w - l)
                .collect()
        }
        Color::Green => {
            let fine = filter_gaussian(&white, sigmas[0])?;
            let coarse = filter_gaussian(&white, sigmas[1])?;
            fine.values
                .iter()
                .zip(&coarse.values)
                .map(|(f, c)| f - c)
                .collect()
        }
    };
    Ok(NoiseTensor {
        shape: shape.clone(),
        values,
        color,
        sigma_params: sigmas,
        seed,
        rng_id: rng::RNG_ID.to_string(),
    })
}

/// Generates colored noise and z-score normalizes it.
pub fn color_noise(
    shape: &GridShape,
    color: Color,
    policy: &SigmaPolicy,
    seed: u64,
) -> Result<NoiseTensor> {
    Ok(normalize(&raw_color_noise(shape, color, policy, seed)?))
}

/// Subtracts the mean and divides by the (population) standard deviation.
/// Constant input maps to all zeros.
pub fn normalize(n: &NoiseTensor) -> NoiseTensor {
    let count = n.values.len() as f64;
    let mean = n.values.iter().sum::<f64>() / count;
    let var = n.values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / count;
    let std = var.sqrt();
    let values = if std <= 1e-12 * mean.abs().max(1.0) {
        vec![0.0; n.values.len()]
    } else {
        n.values.iter().map(|v| (v - mean) / std).collect()
    };
    n.with_values(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(d: &[usize]) -> GridShape {
        GridShape::new(d).unwrap()
    }

    #[test]
    fn white_noise_is_deterministic() {
        let s = shape(&[4, 4]);
        assert_eq!(white_noise(&s, 7), white_noise(&s, 7));
        assert_ne!(white_noise(&s, 7).values, white_noise(&s, 8).values);
    }

    #[test]
    fn white_noise_mean_near_half() {
        // 4096 cells of U[0,1): std of the mean is 1/sqrt(12*4096) ~ 0.0045.
        let n = white_noise(&shape(&[64, 64]), 0);
        let mean = n.values.iter().sum::<f64>() / n.values.len() as f64;
        assert!((mean - 0.5).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn kernel_shapes() {
        let k = gaussian_kernel(0.5, 2).unwrap();
        assert_eq!(k.len(), 5);
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for i in 0..5 {
            assert_eq!(k[i], k[4 - i]);
        }
        let k = gaussian_kernel(2.0, 3).unwrap();
        assert_eq!(k.len(), 13);
        assert!(k.iter().enumerate().all(|(i, &v)| i == 6 || v < k[6]));
    }

    #[test]
    fn kernel_matches_direct_formula() {
        let k = gaussian_kernel(1.0, 2).unwrap();
        let raw: Vec<f64> = (-3i32..=3).map(|x| (-(x * x) as f64 / 2.0).exp()).collect();
        let z: f64 = raw.iter().sum();
        for (a, b) in k.iter().zip(&raw) {
            assert!((a - b / z).abs() < 1e-15);
        }
    }

    #[test]
    fn kernel_rejects_bad_sigma() {
        assert!(gaussian_kernel(0.0, 2).is_err());
        assert!(gaussian_kernel(-1.0, 2).is_err());
        assert!(gaussian_kernel(f64::NAN, 3).is_err());
    }

    #[test]
    fn constant_is_preserved_by_filter() {
        let n = NoiseTensor::from_values(shape(&[6, 5, 4]), vec![3.25; 120]).unwrap();
        let f = filter_gaussian(&n, 1.3).unwrap();
        assert!(f.values.iter().all(|v| (v - 3.25).abs() < 1e-12));
    }

    #[test]
    fn impulse_response_wraps() {
        let s = shape(&[16, 16]);
        let mut values = vec![0.0; 256];
        values[0] = 1.0;
        let out = filter_gaussian(&NoiseTensor::from_values(s.clone(), values).unwrap(), 1.0)
            .unwrap();
        let g = gaussian_kernel(1.0, 2).unwrap();
        let tap = |k: i64| if k.abs() <= 3 { g[(k + 3) as usize] } else { 0.0 };
        for row in 0..16 {
            // rows past 8 are reached by wrapping around from the impulse.
            let k = if row > 8 { row as i64 - 16 } else { row as i64 };
            let expected = tap(k) * tap(0);
            assert!((out.values[s.index(&[row, 0])] - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn normalize_cases() {
        let c = NoiseTensor::from_values(shape(&[2, 2]), vec![5.0; 4]).unwrap();
        assert!(normalize(&c).values.iter().all(|&v| v == 0.0));

        let n = white_noise(&shape(&[9, 7]), 11);
        let z = normalize(&n);
        let mean = z.values.iter().sum::<f64>() / 63.0;
        let std = (z.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 63.0).sqrt();
        assert!(mean.abs() < 1e-6 && (std - 1.0).abs() < 1e-6);
        let zz = normalize(&z);
        assert!(z.values.iter().zip(&zz.values).all(|(a, b)| (a - b).abs() < 1e-10));
    }

    #[test]
    fn sigma_policy_resolution() {
        let mut s = Stream::new(0);
        assert!(SigmaPolicy::fixed_pair(2.0, 1.0)
            .resolve(Color::Green, &mut s)
            .is_err());
        assert!(SigmaPolicy::fixed(2.0).resolve(Color::Green, &mut s).is_err());
        assert_eq!(
            SigmaPolicy::fixed(2.0).resolve(Color::Red, &mut s).unwrap(),
            vec![2.0]
        );
        for _ in 0..500 {
            let v = SigmaPolicy::main_text().resolve(Color::Green, &mut s).unwrap();
            assert!(v[0] < v[1] && v[0] >= 0.5 && v[1] < 2.0);
            let v = SigmaPolicy::variant5().resolve(Color::Green, &mut s).unwrap();
            assert!(v[0] < v[1] && (0.4..1.5).contains(&v[0]) && (1.4..3.0).contains(&v[1]));
        }
        let bad = SigmaPolicy::UniformRange {
            lo1: 2.0,
            hi1: 1.0,
            lo2: 1.0,
            hi2: 3.0,
        };
        assert!(bad.validate().is_err());
        assert!(SigmaPolicy::fixed(-1.0).validate().is_err());
    }

    #[test]
    fn color_noise_records_sigmas() {
        let s = shape(&[16, 16]);
        let g = color_noise(&s, Color::Green, &SigmaPolicy::variant5(), 4).unwrap();
        assert_eq!(g.sigma_params.len(), 2);
        assert_eq!(g.color, Color::Green);
        let w = color_noise(&s, Color::White, &SigmaPolicy::fixed(2.0), 4).unwrap();
        assert!(w.sigma_params.is_empty());
    }
}
