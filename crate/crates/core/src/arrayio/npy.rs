//! Reader/writer for the `.npy` binary array format, version 1.0, restricted
//! to little-endian u8/u16/f32 payloads in C (row-major) order.
//!
//! Written headers follow the canonical layout (dict padded with spaces to a
//! 64-byte boundary, terminated by a newline), so write∘read round trips are
//! byte-identical and third-party readers accept the files unchanged.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

const MAGIC: &[u8; 6] = b"\x93NUMPY";

/// Supported element types.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dtype {
    U8,
    U16,
    F32,
}

impl Dtype {
    pub fn descr(&self) -> &'static str {
        match self {
            Dtype::U8 => "|u1",
            Dtype::U16 => "<u2",
            Dtype::F32 => "<f4",
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Dtype::U8 => 1,
            Dtype::U16 => 2,
            Dtype::F32 => 4,
        }
    }

    fn from_descr(descr: &str) -> Result<Self> {
        match descr {
            "|u1" | "<u1" | "u1" => Ok(Dtype::U8),
            "<u2" | "|u2" | "u2" => Ok(Dtype::U16),
            "<f4" | "|f4" | "f4" => Ok(Dtype::F32),
            other => Err(Error::NpyUnsupportedDtype {
                descr: other.to_string(),
            }),
        }
    }
}

/// Typed payload, row-major.
#[derive(Clone, Debug, PartialEq)]
pub enum ArrayData {
    U8(Vec<u8>),
    U16(Vec<u16>),
    F32(Vec<f32>),
}

impl ArrayData {
    pub fn len(&self) -> usize {
        match self {
            ArrayData::U8(v) => v.len(),
            ArrayData::U16(v) => v.len(),
            ArrayData::F32(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dtype(&self) -> Dtype {
        match self {
            ArrayData::U8(_) => Dtype::U8,
            ArrayData::U16(_) => Dtype::U16,
            ArrayData::F32(_) => Dtype::F32,
        }
    }
}

/// An n-dimensional array as stored on disk: shape plus row-major payload.
#[derive(Clone, Debug, PartialEq)]
pub struct ArrayFile {
    shape: Vec<usize>,
    data: ArrayData,
}

impl ArrayFile {
    pub fn new(shape: Vec<usize>, data: ArrayData) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if shape.is_empty() || expected != data.len() {
            return Err(Error::NpyBadHeader {
                message: format!(
                    "shape {:?} does not describe a payload of {} elements",
                    shape,
                    data.len()
                ),
            });
        }
        Ok(ArrayFile { shape, data })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn dtype(&self) -> Dtype {
        self.data.dtype()
    }

    pub fn data(&self) -> &ArrayData {
        &self.data
    }

    pub fn into_data(self) -> ArrayData {
        self.data
    }

    /// Element values widened to f64, in row-major order.
    pub fn to_f64(&self) -> Vec<f64> {
        match &self.data {
            ArrayData::U8(v) => v.iter().map(|&x| x as f64).collect(),
            ArrayData::U16(v) => v.iter().map(|&x| x as f64).collect(),
            ArrayData::F32(v) => v.iter().map(|&x| x as f64).collect(),
        }
    }
}

pub fn read_array(path: &Path) -> Result<ArrayFile> {
    let mut reader = BufReader::new(File::open(path)?);
    read_array_from(&mut reader)
}

pub fn write_array(path: &Path, array: &ArrayFile) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    write_array_to(&mut writer, array)?;
    writer.flush()?;
    Ok(())
}

pub fn read_array_from(reader: &mut impl Read) -> Result<ArrayFile> {
    let mut magic = [0u8; 6];
    reader
        .read_exact(&mut magic)
        .map_err(|_| Error::NpyBadMagic)?;
    if &magic != MAGIC {
        return Err(Error::NpyBadMagic);
    }
    let mut version = [0u8; 2];
    reader
        .read_exact(&mut version)
        .map_err(|e| Error::NpyBadHeader {
            message: format!("missing version bytes: {e}"),
        })?;
    if version != [1, 0] {
        return Err(Error::NpyUnsupportedVersion {
            major: version[0],
            minor: version[1],
        });
    }
    let mut len_bytes = [0u8; 2];
    reader
        .read_exact(&mut len_bytes)
        .map_err(|e| Error::NpyBadHeader {
            message: format!("missing header length: {e}"),
        })?;
    let header_len = u16::from_le_bytes(len_bytes) as usize;
    let mut header = vec![0u8; header_len];
    reader
        .read_exact(&mut header)
        .map_err(|e| Error::NpyBadHeader {
            message: format!("truncated header: {e}"),
        })?;
    let header = String::from_utf8(header).map_err(|_| Error::NpyBadHeader {
        message: "header is not valid UTF-8".into(),
    })?;

    let descr = extract_str_value(&header, "descr")?;
    let dtype = Dtype::from_descr(&descr)?;
    let fortran = extract_bool_value(&header, "fortran_order")?;
    if fortran {
        return Err(Error::NpyFortranOrder);
    }
    let shape = extract_shape_value(&header)?;
    if shape.is_empty() {
        return Err(Error::NpyBadHeader {
            message: "zero-dimensional arrays are not supported".into(),
        });
    }

    let count: usize = shape.iter().product();
    let expected = count * dtype.size();
    let mut payload = Vec::with_capacity(expected);
    reader.read_to_end(&mut payload)?;
    if payload.len() != expected {
        return Err(Error::NpyPayloadLength {
            expected,
            actual: payload.len(),
        });
    }

    let data = match dtype {
        Dtype::U8 => ArrayData::U8(payload),
        Dtype::U16 => ArrayData::U16(
            payload
                .chunks_exact(2)
                .map(|c| u16::from_le_bytes([c[0], c[1]]))
                .collect(),
        ),
        Dtype::F32 => ArrayData::F32(
            payload
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect(),
        ),
    };
    ArrayFile::new(shape, data)
}

pub fn write_array_to(writer: &mut impl Write, array: &ArrayFile) -> Result<()> {
    let shape_str = match array.shape.len() {
        1 => format!("({},)", array.shape[0]),
        _ => format!(
            "({})",
            array
                .shape
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        ),
    };
    let dict = format!(
        "{{'descr': '{}', 'fortran_order': False, 'shape': {}, }}",
        array.dtype().descr(),
        shape_str
    );
    // Pad so magic + version + length field + header is a multiple of 64,
    // with a trailing newline.
    let unpadded = 6 + 2 + 2 + dict.len() + 1;
    let padding = (64 - unpadded % 64) % 64;
    let header_len = dict.len() + padding + 1;
    if header_len > u16::MAX as usize {
        return Err(Error::NpyBadHeader {
            message: "header too long for version 1.0".into(),
        });
    }

    writer.write_all(MAGIC)?;
    writer.write_all(&[1, 0])?;
    writer.write_all(&(header_len as u16).to_le_bytes())?;
    writer.write_all(dict.as_bytes())?;
    writer.write_all(&b" ".repeat(padding))?;
    writer.write_all(b"\n")?;

    match &array.data {
        ArrayData::U8(v) => writer.write_all(v)?,
        ArrayData::U16(v) => {
            for x in v {
                writer.write_all(&x.to_le_bytes())?;
            }
        }
        ArrayData::F32(v) => {
            for x in v {
                writer.write_all(&x.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

fn extract_str_value(header: &str, key: &str) -> Result<String> {
    let rest = find_key(header, key)?;
    let rest = rest.trim_start();
    let mut chars = rest.chars();
    let quote = chars.next().ok_or_else(|| bad_key(key))?;
    if quote != '\'' && quote != '"' {
        return Err(bad_key(key));
    }
    let value: String = chars.take_while(|&c| c != quote).collect();
    Ok(value)
}

fn extract_bool_value(header: &str, key: &str) -> Result<bool> {
    let rest = find_key(header, key)?;
    let rest = rest.trim_start();
    if rest.starts_with("True") {
        Ok(true)
    } else if rest.starts_with("False") {
        Ok(false)
    } else {
        Err(bad_key(key))
    }
}

fn extract_shape_value(header: &str) -> Result<Vec<usize>> {
    let rest = find_key(header, "shape")?;
    let rest = rest.trim_start();
    if !rest.starts_with('(') {
        return Err(bad_key("shape"));
    }
    let close = rest.find(')').ok_or_else(|| bad_key("shape"))?;
    rest[1..close]
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<usize>().map_err(|_| Error::NpyBadHeader {
                message: format!("invalid shape entry {s:?}"),
            })
        })
        .collect()
}

fn find_key<'a>(header: &'a str, key: &str) -> Result<&'a str> {
    for quote in ['\'', '"'] {
        let pattern = format!("{quote}{key}{quote}");
        if let Some(pos) = header.find(&pattern) {
            let after = &header[pos + pattern.len()..];
            let after = after.trim_start();
            if let Some(rest) = after.strip_prefix(':') {
                return Ok(rest);
            }
        }
    }
    Err(bad_key(key))
}

fn bad_key(key: &str) -> Error {
    Error::NpyBadHeader {
        message: format!("missing or malformed {key:?} entry"),
    }
}
