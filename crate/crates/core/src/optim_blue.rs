//! Greedy construction of K mask sets with well-separated visible patches.
//!
//! Positions are visited in a seeded random order. At each position every
//! mask that still has room is scored by how many visible cells it already
//! has along the four lines (horizontal, vertical, both diagonals) through
//! that position inside a Δ×Δ window; the lowest-scoring mask gets the
//! position as visible, every other mask keeps it masked.
//!
//! Internally masks use `true` = visible. [`export_mask`] converts to the
//! exchange convention (`true` = masked).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridShape;
use crate::masking::{floor_count, MaskTensor};
use crate::rng::{self, Stream};

pub const DEFAULT_WINDOW: usize = 7;
pub const DEFAULT_WEIGHTS: [f64; 4] = [1.0, 1.0, 1.0, 1.0];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimBlueConfig {
    /// Number of masks K.
    pub masks: usize,
    pub shape: GridShape,
    /// Visible fraction per mask, in (0, 1].
    pub transmittance: f64,
    /// Odd window side Δ ≥ 3.
    pub window: usize,
    pub weights: [f64; 4],
    pub seed: u64,
}

impl OptimBlueConfig {
    pub fn new(shape: GridShape, masks: usize, transmittance: f64, seed: u64) -> Self {
        OptimBlueConfig {
            masks,
            shape,
            transmittance,
            window: DEFAULT_WINDOW,
            weights: DEFAULT_WEIGHTS,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.shape.rank() != 2 {
            return Err(Error::Config(format!(
                "optim-blue masks are 2D, got shape {}",
                self.shape
            )));
        }
        if self.masks == 0 {
            return Err(Error::Config("number of masks must be positive".into()));
        }
        if !(self.transmittance > 0.0 && self.transmittance <= 1.0) {
            return Err(Error::Config(format!(
                "transmittance must lie in (0, 1], got {}",
                self.transmittance
            )));
        }
        if self.window < 3 || self.window.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "window must be odd and at least 3, got {}",
                self.window
            )));
        }
        if self.weights.iter().any(|w| !(w.is_finite() && *w >= 0.0))
            || self.weights.iter().all(|&w| w == 0.0)
        {
            return Err(Error::Config(format!(
                "weights must be nonnegative with at least one positive, got {:?}",
                self.weights
            )));
        }
        Ok(())
    }

    /// Maximum visible cells per mask, `⌊transmittance · N⌋`.
    pub fn visible_cap(&self) -> usize {
        floor_count(self.transmittance, self.shape.len())
    }
}

/// Result of one optimization run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaskSet {
    pub shape: GridShape,
    /// `visible[i][cell]` is true when `cell` is visible in mask `i`.
    pub visible: Vec<Vec<bool>>,
    pub visible_counts: Vec<usize>,
    pub cap: usize,
    pub traversal_seed: u64,
}

impl MaskSet {
    pub fn len(&self) -> usize {
        self.visible.len()
    }

    pub fn is_empty(&self) -> bool {
        self.visible.is_empty()
    }
}

/// Weighted count of visible cells on the four lines through `position`
/// inside a `window`×`window` neighborhood. The center is not counted and
/// cells beyond the grid border contribute nothing.
pub fn clustering_score(
    visible: &[bool],
    shape: &GridShape,
    position: (usize, usize),
    window: usize,
    weights: &[f64; 4],
) -> Result<f64> {
    let (rows, cols) = match shape.dims() {
        &[r, c] => (r, c),
        _ => return Err(Error::Shape(format!("clustering score needs 2D, got {shape}"))),
    };
    if visible.len() != rows * cols {
        return Err(Error::Shape(format!(
            "{} cells do not fill {shape}",
            visible.len()
        )));
    }
    if position.0 >= rows || position.1 >= cols {
        return Err(Error::Position {
            position,
            rows,
            cols,
        });
    }
    Ok(score_unchecked(visible, rows, cols, position, window / 2, weights))
}

fn score_unchecked(
    visible: &[bool],
    rows: usize,
    cols: usize,
    (r, c): (usize, usize),
    half: usize,
    weights: &[f64; 4],
) -> f64 {
    let at = |dr: isize, dc: isize| -> usize {
        let rr = r as isize + dr;
        let cc = c as isize + dc;
        if rr < 0 || cc < 0 || rr >= rows as isize || cc >= cols as isize {
            0
        } else {
            visible[rr as usize * cols + cc as usize] as usize
        }
    };
    let (mut horizontal, mut vertical, mut diagonal, mut anti) = (0, 0, 0, 0);
    for j in 1..=half as isize {
        horizontal += at(0, -j) + at(0, j);
        vertical += at(-j, 0) + at(j, 0);
        diagonal += at(-j, -j) + at(j, j);
        anti += at(-j, j) + at(j, -j);
    }
    weights[0] * horizontal as f64
        + weights[1] * vertical as f64
        + weights[2] * diagonal as f64
        + weights[3] * anti as f64
}

/// Seeded random visiting order over all cells (row-major indices).
pub fn traversal_order(shape: &GridShape, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..shape.len()).collect();
    Stream::new(rng::split(seed, rng::TRAVERSAL_STREAM)).shuffle(&mut order);
    order
}

/// Runs the greedy optimization with the seeded traversal order.
pub fn optimize_blue(config: &OptimBlueConfig) -> Result<MaskSet> {
    config.validate()?;
    let order = traversal_order(&config.shape, config.seed);
    optimize_blue_with_order(config, &order)
}

/// Runs the greedy optimization over an explicit visiting order.
pub fn optimize_blue_with_order(config: &OptimBlueConfig, order: &[usize]) -> Result<MaskSet> {
    config.validate()?;
    let (rows, cols) = (config.shape.dims()[0], config.shape.dims()[1]);
    let cells = rows * cols;
    if order.iter().any(|&p| p >= cells) {
        return Err(Error::Config("traversal order leaves the grid".into()));
    }
    let cap = config.visible_cap();
    let half = config.window / 2;
    let mut visible = vec![vec![false; cells]; config.masks];
    let mut counts = vec![0usize; config.masks];

    for &cell in order {
        let position = (cell / cols, cell % cols);
        let mut best: Option<(usize, f64)> = None;
        for (i, mask) in visible.iter().enumerate() {
            if counts[i] >= cap {
                continue;
            }
            let score = score_unchecked(mask, rows, cols, position, half, &config.weights);
            if best.is_none_or(|(_, lowest)| score < lowest) {
                best = Some((i, score));
            }
        }
        for (i, mask) in visible.iter_mut().enumerate() {
            let chosen = best.is_some_and(|(b, _)| b == i);
            if chosen && !mask[cell] {
                counts[i] += 1;
            } else if !chosen && mask[cell] {
                counts[i] -= 1;
            }
            mask[cell] = chosen;
        }
    }

    Ok(MaskSet {
        shape: config.shape.clone(),
        visible,
        visible_counts: counts,
        cap,
        traversal_seed: config.seed,
    })
}

/// Mask `index` of the set in the exchange convention (`true` = masked).
pub fn export_mask(set: &MaskSet, index: usize) -> Result<MaskTensor> {
    let visible = set.visible.get(index).ok_or_else(|| {
        Error::Parameter(format!(
            "mask index {index} out of range for a set of {}",
            set.len()
        ))
    })?;
    let total = visible.len();
    let shown = set.visible_counts[index];
    Ok(MaskTensor {
        shape: set.shape.clone(),
        bits: visible.iter().map(|&v| !v).collect(),
        gamma: 1.0 - shown as f64 / total as f64,
        source: format!("optim-blue/seed={}/mask={index}", set.traversal_seed),
    })
}

/// Back to the internal `true` = visible convention.
pub fn import_mask(mask: &MaskTensor) -> Vec<bool> {
    mask.bits.iter().map(|&m| !m).collect()
}
