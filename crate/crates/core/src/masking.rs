//! Rank-based binarization of noise into masks at exact ratios.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridShape;
use crate::noise::{white_noise, NoiseTensor};

/// Slack added before flooring the keep count so that ratios such as 0.9
/// (stored as 0.900000000000000022...) do not lose a visible token to
/// binary rounding of `1 - γ`.
const KEEP_EPSILON: f64 = 1e-9;

/// Masking ratio γ: the fraction of tokens hidden from the encoder.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct MaskRatio(f64);

impl MaskRatio {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::Parameter(format!(
                "masking ratio must lie in [0, 1], got {gamma}"
            )));
        }
        Ok(MaskRatio(gamma))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for MaskRatio {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        MaskRatio::new(v)
    }
}

impl From<MaskRatio> for f64 {
    fn from(r: MaskRatio) -> f64 {
        r.0
    }
}

/// `⌊fraction · total⌋`, tolerant of representation error in `fraction`.
pub(crate) fn floor_count(fraction: f64, total: usize) -> usize {
    let raw = (fraction * total as f64 + KEEP_EPSILON).floor();
    (raw.max(0.0) as usize).min(total)
}

/// Number of masked tokens: `N - ⌊(1 - γ) N⌋`.
pub fn masked_count(shape: &GridShape, gamma: MaskRatio) -> usize {
    masked_count_for(shape.len(), gamma)
}

pub(crate) fn masked_count_for(total: usize, gamma: MaskRatio) -> usize {
    total - floor_count(1.0 - gamma.value(), total)
}

/// Binary mask on a token grid; `true` = masked.
#[derive(Clone, Debug, PartialEq)]
pub struct MaskTensor {
    pub shape: GridShape,
    pub bits: Vec<bool>,
    pub gamma: f64,
    pub source: String,
}

impl MaskTensor {
    pub fn popcount(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn visible_count(&self) -> usize {
        self.bits.len() - self.popcount()
    }

    pub fn to_u8(&self) -> Vec<u8> {
        self.bits.iter().map(|&b| b as u8).collect()
    }

    /// Mask bits as 0.0 / 1.0 reals, for spectral analysis.
    pub fn to_reals(&self) -> NoiseTensor {
        let values = self.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        NoiseTensor::from_values(self.shape.clone(), values).expect("bits fill the shape")
    }

    /// The 2D slice at `frame` of a 3D mask.
    pub fn frame(&self, frame: usize) -> Vec<bool> {
        let frames = self.shape.frames();
        self.bits
            .iter()
            .skip(frame)
            .step_by(frames)
            .copied()
            .collect()
    }
}

/// Marks the `masked_count` highest-valued cells as masked. Ties are broken
/// by ascending row-major index, so only the ordering of values matters.
pub fn eta(n: &NoiseTensor, gamma: MaskRatio) -> MaskTensor {
    let count = masked_count(&n.shape, gamma);
    let mut order: Vec<usize> = (0..n.values.len()).collect();
    order.sort_by(|&a, &b| n.values[b].total_cmp(&n.values[a]).then(a.cmp(&b)));
    let mut bits = vec![false; n.values.len()];
    for &i in &order[..count] {
        bits[i] = true;
    }
    MaskTensor {
        shape: n.shape.clone(),
        bits,
        gamma: gamma.value(),
        source: format!("eta/{}/seed={}", n.color, n.seed),
    }
}

/// Random tube masking: one 2D white-noise mask repeated over every frame.
pub fn tube_mask(
    spatial: &GridShape,
    frames: usize,
    gamma: MaskRatio,
    seed: u64,
) -> Result<MaskTensor> {
    if spatial.rank() != 2 {
        return Err(Error::Shape(format!(
            "tube masks need a 2D spatial shape, got {spatial}"
        )));
    }
    if frames == 0 {
        return Err(Error::Parameter("frame count must be positive".into()));
    }
    let plane = eta(&white_noise(spatial, seed), gamma);
    let source = format!("tube/seed={seed}");
    if frames == 1 {
        return Ok(MaskTensor { source, ..plane });
    }
    let dims = spatial.dims();
    let shape = GridShape::d3(dims[0], dims[1], frames)?;
    let bits = plane
        .bits
        .iter()
        .flat_map(|&b| std::iter::repeat_n(b, frames))
        .collect();
    Ok(MaskTensor {
        shape,
        bits,
        gamma: gamma.value(),
        source,
    })
}

/// Index sets of visible and masked tokens.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub visible: Vec<usize>,
    pub masked: Vec<usize>,
}

/// Splits `tokens` into visible and masked index sets according to `mask`.
pub fn partition<T>(tokens: &[T], mask: &MaskTensor) -> Result<Partition> {
    if tokens.len() != mask.bits.len() {
        return Err(Error::Shape(format!(
            "{} tokens but mask has {} cells",
            tokens.len(),
            mask.bits.len()
        )));
    }
    let (masked, visible): (Vec<usize>, Vec<usize>) =
        (0..tokens.len()).partition(|&i| mask.bits[i]);
    Ok(Partition { visible, masked })
}
