use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape of a 2D or 3D grid of cells.
///
/// Cells are stored row-major: the last axis varies fastest. For 3D grids the
/// last axis is the temporal (frame) axis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct GridShape {
    dims: Vec<usize>,
}

impl GridShape {
    pub fn new(dims: &[usize]) -> Result<Self> {
        if !(2..=3).contains(&dims.len()) {
            return Err(Error::Shape(format!(
                "rank must be 2 or 3, got {} ({:?})",
                dims.len(),
                dims
            )));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::Shape(format!(
                "every dimension must be at least 2, got {d} in {dims:?}"
            )));
        }
        dims.iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::Shape(format!("{dims:?} overflows the cell count")))?;
        Ok(GridShape {
            dims: dims.to_vec(),
        })
    }

    pub fn d2(rows: usize, cols: usize) -> Result<Self> {
        Self::new(&[rows, cols])
    }

    pub fn d3(a: usize, b: usize, frames: usize) -> Result<Self> {
        Self::new(&[a, b, frames])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    /// Total number of cells.
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for axis in (0..self.dims.len() - 1).rev() {
            strides[axis] = strides[axis + 1] * self.dims[axis + 1];
        }
        strides
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.dims.len());
        coords
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&c, &d)| acc * d + c)
    }

    pub fn coords(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for axis in (0..self.dims.len()).rev() {
            out[axis] = index % self.dims[axis];
            index /= self.dims[axis];
        }
        out
    }

    /// Number of frames along the temporal axis (1 for 2D grids).
    pub fn frames(&self) -> usize {
        if self.rank() == 3 {
            self.dims[2]
        } else {
            1
        }
    }
}

impl TryFrom<Vec<usize>> for GridShape {
    type Error = Error;

    fn try_from(dims: Vec<usize>) -> Result<Self> {
        GridShape::new(&dims)
    }
}

impl From<GridShape> for Vec<usize> {
    fn from(shape: GridShape) -> Self {
        shape.dims
    }
}

impl fmt::Display for GridShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        f.write_str(&parts.join("x"))
    }
}

/// Parses the `WxH[xT]` shape syntax.
impl FromStr for GridShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let dims = s
            .split(['x', 'X'])
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Shape(format!("cannot parse '{s}' as WxH[xT]")))
            })
            .collect::<Result<Vec<_>>>()?;
        GridShape::new(&dims)
    }
}
