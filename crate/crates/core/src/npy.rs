//! Minimal NPY (version 1.0) reader and writer for the two payload types the
//! bank uses: little-endian `f32` noise and `u8` binary masks, C order only.

use std::io::{self, Write};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 6] = b"\x93NUMPY";
const HEADER_ALIGN: usize = 64;
const PREAMBLE: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub enum NpyData {
    F32(Vec<f32>),
    U8(Vec<u8>),
}

impl NpyData {
    pub fn descr(&self) -> &'static str {
        match self {
            NpyData::F32(_) => "<f4",
            NpyData::U8(_) => "|u1",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            NpyData::F32(v) => v.len(),
            NpyData::U8(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Raw little-endian payload bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        match self {
            NpyData::F32(v) => v.iter().flat_map(|x| x.to_le_bytes()).collect(),
            NpyData::U8(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NpyArray {
    pub shape: Vec<usize>,
    pub data: NpyData,
}

fn header_text(descr: &str, shape: &[usize]) -> String {
    let dims = match shape {
        [one] => format!("({one},)"),
        _ => format!(
            "({})",
            shape
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        ),
    };
    let dict = format!("{{'descr': '{descr}', 'fortran_order': False, 'shape': {dims}, }}");
    let unpadded = PREAMBLE + dict.len() + 1;
    let padding = (HEADER_ALIGN - unpadded % HEADER_ALIGN) % HEADER_ALIGN;
    format!("{dict}{}\n", " ".repeat(padding))
}

pub fn write_npy<W: Write>(writer: &mut W, array: &NpyArray) -> io::Result<()> {
    let expected: usize = array.shape.iter().product();
    if expected != array.data.len() {
        return Err(io::Error::new(
            io::ErrorKind::InvalidInput,
            "npy shape does not match data length",
        ));
    }
    let header = header_text(array.data.descr(), &array.shape);
    let header_len = u16::try_from(header.len())
        .map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "npy header too long"))?;
    writer.write_all(MAGIC)?;
    writer.write_all(&[1, 0])?;
    writer.write_all(&header_len.to_le_bytes())?;
    writer.write_all(header.as_bytes())?;
    writer.write_all(&array.data.to_bytes())
}

pub fn to_npy_bytes(array: &NpyArray) -> Vec<u8> {
    let mut out = Vec::new();
    write_npy(&mut out, array).expect("writing to a Vec cannot fail");
    out
}

fn dict_value<'a>(dict: &'a str, key: &str) -> Result<&'a str> {
    let pattern = format!("'{key}':");
    let start = dict
        .find(&pattern)
        .ok_or_else(|| Error::format(format!("npy header '{key}'"), "missing"))?
        + pattern.len();
    Ok(dict[start..].trim_start())
}

fn parse_shape(dict: &str) -> Result<Vec<usize>> {
    let value = dict_value(dict, "shape")?;
    let field = "npy header 'shape'";
    if !value.starts_with('(') {
        return Err(Error::format(field, "expected a tuple"));
    }
    let end = value
        .find(')')
        .ok_or_else(|| Error::format(field, "unterminated tuple"))?;
    value[1..end]
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse::<usize>()
                .map_err(|_| Error::format(field, format!("bad dimension '{p}'")))
        })
        .collect()
}

fn parse_quoted(dict: &str, key: &str) -> Result<String> {
    let value = dict_value(dict, key)?;
    let field = format!("npy header '{key}'");
    let quote = value
        .chars()
        .next()
        .filter(|c| *c == '\'' || *c == '"')
        .ok_or_else(|| Error::format(&field, "expected a string"))?;
    let rest = &value[1..];
    let end = rest
        .find(quote)
        .ok_or_else(|| Error::format(&field, "unterminated string"))?;
    Ok(rest[..end].to_string())
}

/// Parses a complete NPY file held in memory.
pub fn read_npy(bytes: &[u8]) -> Result<NpyArray> {
    if bytes.len() < PREAMBLE || &bytes[..6] != MAGIC {
        return Err(Error::format("npy magic", "not an NPY file"));
    }
    if bytes[6] != 1 || bytes[7] != 0 {
        return Err(Error::format(
            "npy version",
            format!("unsupported version {}.{}", bytes[6], bytes[7]),
        ));
    }
    let header_len = u16::from_le_bytes([bytes[8], bytes[9]]) as usize;
    let data_start = PREAMBLE + header_len;
    let header = bytes
        .get(PREAMBLE..data_start)
        .ok_or_else(|| Error::format("npy header", "truncated"))?;
    let dict = std::str::from_utf8(header)
        .map_err(|_| Error::format("npy header", "not valid text"))?;

    let descr = parse_quoted(dict, "descr")?;
    let fortran = dict_value(dict, "fortran_order")?;
    if !fortran.starts_with("False") {
        return Err(Error::format(
            "npy header 'fortran_order'",
            "only C order is supported",
        ));
    }
    let shape = parse_shape(dict)?;
    let count = shape
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::format("npy header 'shape'", "element count overflows"))?;
    let payload = &bytes[data_start..];
    let data = match descr.as_str() {
        "<f4" => {
            if count.checked_mul(4) != Some(payload.len()) {
                return Err(Error::format(
                    "npy payload",
                    format!("expected {} bytes, found {}", count * 4, payload.len()),
                ));
            }
            NpyData::F32(
                payload
                    .chunks_exact(4)
                    .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                    .collect(),
            )
        }
        "|u1" | "<u1" => {
            if payload.len() != count {
                return Err(Error::format(
                    "npy payload",
                    format!("expected {count} bytes, found {}", payload.len()),
                ));
            }
            NpyData::U8(payload.to_vec())
        }
        other => {
            return Err(Error::format(
                "npy header 'descr'",
                format!("unsupported dtype '{other}'"),
            ))
        }
    };
    Ok(NpyArray { shape, data })
}
