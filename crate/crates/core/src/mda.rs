//! Raw array files (`MDA1`) and binary PGM ingestion.
//!
//! MDA1 layout, all integers little-endian:
//!
//! ```text
//! "MDA1" | u8 version = 1 | u8 d | u16 |A| | d × u64 dims | volume × u8 symbols
//! ```

use crate::error::{Error, Result};
use crate::lattice::{Alphabet, NdArray};

pub const MAGIC: &[u8; 4] = b"MDA1";
pub const VERSION: u8 = 1;

pub fn write_mda(x: &NdArray) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + 8 * x.d() + x.volume());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.push(x.d() as u8);
    out.extend_from_slice(&(x.alphabet().size() as u16).to_le_bytes());
    for &n in x.dims() {
        out.extend_from_slice(&(n as u64).to_le_bytes());
    }
    out.extend_from_slice(x.data());
    out
}

pub fn read_mda(bytes: &[u8]) -> Result<NdArray> {
    let mut r = ByteReader::new(bytes);
    if r.take(4)? != MAGIC {
        return Err(Error::format(0, "bad magic, expected MDA1"));
    }
    let version = r.u8()?;
    if version != VERSION {
        return Err(Error::format(4, format!("unsupported version {version}")));
    }
    let d = r.u8()? as usize;
    if !(1..=crate::lattice::MAX_DIM).contains(&d) {
        return Err(Error::format(5, format!("bad dimension {d}")));
    }
    let a_off = r.pos();
    let alphabet =
        Alphabet::new(r.u16()? as usize).map_err(|e| Error::format(a_off, e.to_string()))?;
    let mut dims = Vec::with_capacity(d);
    for _ in 0..d {
        let off = r.pos();
        let n = r.u64()?;
        if n == 0 || n > usize::MAX as u64 {
            return Err(Error::format(off, format!("bad dimension length {n}")));
        }
        dims.push(n as usize);
    }
    let volume = dims
        .iter()
        .try_fold(1usize, |acc, &n| acc.checked_mul(n))
        .ok_or_else(|| Error::format(6, "volume overflows"))?;
    let data_off = r.pos();
    let data = r.take(volume)?.to_vec();
    if !r.is_empty() {
        return Err(Error::format(r.pos(), "trailing bytes after symbol data"));
    }
    NdArray::new(alphabet, dims, data).map_err(|e| Error::format(data_off, e.to_string()))
}

/// Reads a binary graymap (P5) with maxval ≤ 255 as a 2D array over the
/// alphabet `{0, .., maxval}`. Rows map to axis 0.
pub fn read_pgm(bytes: &[u8]) -> Result<NdArray> {
    let mut pos = 0usize;
    let mut fields = Vec::with_capacity(4);
    while fields.len() < 4 {
        // skip whitespace and comments
        while pos < bytes.len() {
            match bytes[pos] {
                b'#' => {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => pos += 1,
                _ => break,
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() && bytes[pos] != b'#' {
            pos += 1;
        }
        if start == pos {
            return Err(Error::format(pos as u64, "truncated PGM header"));
        }
        fields.push((start, &bytes[start..pos]));
    }
    if fields[0].1 != b"P5" {
        return Err(Error::format(0, "not a binary PGM (expected P5)"));
    }
    let num = |i: usize| -> Result<usize> {
        std::str::from_utf8(fields[i].1)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format(fields[i].0 as u64, "bad PGM header number"))
    };
    let (width, height, maxval) = (num(1)?, num(2)?, num(3)?);
    if maxval == 0 || maxval > 255 {
        return Err(Error::format(
            fields[3].0 as u64,
            format!("maxval {maxval} unsupported"),
        ));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let volume = width * height;
    if bytes.len() < pos + volume {
        return Err(Error::format(bytes.len() as u64, "truncated PGM raster"));
    }
    let alphabet = Alphabet::new(maxval + 1)?;
    NdArray::new(
        alphabet,
        vec![height, width],
        bytes[pos..pos + volume].to_vec(),
    )
    .map_err(|e| Error::format(pos as u64, e.to_string()))
}

/// Little-endian cursor that reports the failing offset.
pub(crate) struct ByteReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        ByteReader { bytes, pos: 0 }
    }

    pub fn pos(&self) -> u64 {
        self.pos as u64
    }

    pub fn is_empty(&self) -> bool {
        self.pos == self.bytes.len()
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::format(
                self.pos as u64,
                format!("need {n} bytes, {} left", self.bytes.len() - self.pos),
            ));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}
