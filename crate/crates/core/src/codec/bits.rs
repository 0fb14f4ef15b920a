//! MSB-first bit packing.

use crate::error::{Error, Result};

#[derive(Debug, Default, Clone)]
pub struct BitWriter {
    bytes: Vec<u8>,
    len: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends the low `width` bits of `value`, most significant first.
    pub fn write(&mut self, value: u64, width: u32) {
        for i in (0..width).rev() {
            self.push_bit((value >> i) & 1 == 1);
        }
    }

    pub fn push_bit(&mut self, bit: bool) {
        let off = (self.len % 8) as u32;
        if off == 0 {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().unwrap() |= 0x80 >> off;
        }
        self.len += 1;
    }

    pub fn bit_len(&self) -> u64 {
        self.len
    }

    pub fn finish(self) -> (Vec<u8>, u64) {
        (self.bytes, self.len)
    }
}

pub struct BitReader<'a> {
    bytes: &'a [u8],
    len: u64,
    pos: u64,
}

impl<'a> BitReader<'a> {
    /// Reads at most `len` bits of `bytes`.
    pub fn new(bytes: &'a [u8], len: u64) -> Self {
        debug_assert!(len <= bytes.len() as u64 * 8);
        BitReader { bytes, len, pos: 0 }
    }

    pub fn position(&self) -> u64 {
        self.pos
    }

    pub fn remaining(&self) -> u64 {
        self.len - self.pos
    }

    pub fn read(&mut self, width: u32) -> Result<u64> {
        if self.remaining() < width as u64 {
            return Err(Error::format(
                self.pos / 8,
                format!(
                    "bit stream truncated: need {width} bits, {} left",
                    self.remaining()
                ),
            ));
        }
        let mut v = 0u64;
        for _ in 0..width {
            let byte = self.bytes[(self.pos / 8) as usize];
            let bit = (byte >> (7 - self.pos % 8)) & 1;
            v = (v << 1) | bit as u64;
            self.pos += 1;
        }
        Ok(v)
    }
}

/// Packs symbols at a fixed width.
pub fn pack_symbols(symbols: impl IntoIterator<Item = u8>, width: u32) -> (Vec<u8>, u64) {
    let mut w = BitWriter::new();
    for s in symbols {
        w.write(s as u64, width);
    }
    w.finish()
}

pub fn unpack_symbols(bytes: &[u8], count: usize, width: u32) -> Result<Vec<u8>> {
    let mut r = BitReader::new(bytes, bytes.len() as u64 * 8);
    (0..count).map(|_| r.read(width).map(|v| v as u8)).collect()
}

/// `ceil(log2 v)` for `v ≥ 1`.
pub fn ceil_log2(v: u64) -> u32 {
    debug_assert!(v >= 1);
    64 - (v - 1).leading_zeros()
}
