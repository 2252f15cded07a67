//! Flip and resize of noise and mask tensors.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridShape;

/// Axis a flip acts on. Vertical reverses rows (axis 0), horizontal reverses
/// columns (axis 1), temporal reverses frames (axis 2, 3D only).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlipAxis {
    Vertical,
    Horizontal,
    Temporal,
}

impl FlipAxis {
    pub fn axis(self) -> usize {
        match self {
            FlipAxis::Vertical => 0,
            FlipAxis::Horizontal => 1,
            FlipAxis::Temporal => 2,
        }
    }
}

impl fmt::Display for FlipAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FlipAxis::Vertical => "v",
            FlipAxis::Horizontal => "h",
            FlipAxis::Temporal => "t",
        })
    }
}

impl FromStr for FlipAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "v" | "vertical" => Ok(FlipAxis::Vertical),
            "h" | "horizontal" => Ok(FlipAxis::Horizontal),
            "t" | "temporal" => Ok(FlipAxis::Temporal),
            _ => Err(Error::Parameter(format!("unknown flip axis '{s}'"))),
        }
    }
}

/// Reverses `values` along `axis`.
pub fn flip<T: Copy>(shape: &GridShape, values: &[T], axis: usize) -> Result<Vec<T>> {
    if axis >= shape.rank() {
        return Err(Error::Parameter(format!(
            "cannot flip axis {axis} of a rank-{} grid",
            shape.rank()
        )));
    }
    let len = shape.dims()[axis];
    let stride = shape.strides()[axis];
    Ok((0..values.len())
        .map(|i| {
            let c = (i / stride) % len;
            values[i + (len - 1 - c) * stride - c * stride]
        })
        .collect())
}

/// Multilinear resize with half-cell alignment and clamped borders.
pub fn resize(shape: &GridShape, values: &[f64], target: &GridShape) -> Result<Vec<f64>> {
    if shape.rank() != target.rank() {
        return Err(Error::Shape(format!(
            "cannot resize rank-{} grid {shape} to {target}",
            shape.rank()
        )));
    }
    let mut dims = shape.dims().to_vec();
    let mut current = values.to_vec();
    for axis in 0..dims.len() {
        let (from, to) = (dims[axis], target.dims()[axis]);
        if from == to {
            continue;
        }
        let outer: usize = dims[..axis].iter().product();
        let inner: usize = dims[axis + 1..].iter().product();
        let taps: Vec<(usize, usize, f64)> = (0..to)
            .map(|i| {
                let src = ((i as f64 + 0.5) * from as f64 / to as f64 - 0.5)
                    .clamp(0.0, (from - 1) as f64);
                let lo = src.floor() as usize;
                let hi = (lo + 1).min(from - 1);
                (lo, hi, src - lo as f64)
            })
            .collect();
        let mut next = vec![0.0; outer * to * inner];
        for o in 0..outer {
            for (i, &(lo, hi, t)) in taps.iter().enumerate() {
                for k in 0..inner {
                    let a = current[(o * from + lo) * inner + k];
                    let b = current[(o * from + hi) * inner + k];
                    next[(o * to + i) * inner + k] = a + (b - a) * t;
                }
            }
        }
        dims[axis] = to;
        current = next;
    }
    Ok(current)
}
