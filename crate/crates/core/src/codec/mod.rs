//! Lossless universal block codec and the Hilbert-scan LZ78 baseline.
//!
//! A BLOCK stream is a two-part code: the dictionary lists the distinct
//! k-cubes of the unshifted partition in first-occurrence order with
//! their exact counts, the payload range-codes the cube sequence under
//! those counts, and the sites outside the full cubes are stored
//! verbatim. Its payload is within a few bits of `N·H(μ̃^{k,n})`.
//!
//! Container layout ("MDTC"), integers little-endian:
//!
//! ```text
//! "MDTC" | u8 version=1 | u8 mode | u8 d | u16 |A| | d × u64 dims | u32 k
//! u64 dictionary entries | entries × (k^d symbol bytes, u32 count)
//! u64 payload bit length | payload bytes | boundary bytes
//! ```
//!
//! RAW and LZ78-HILBERT streams store `k = 0` and no dictionary; their
//! payload holds the packed symbols or the LZ78 bit stream of the
//! Hilbert scan. The boundary section holds the remaining bytes.

pub mod bits;
pub mod hilbert;
pub mod lz78;
pub mod range;

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::lattice::{advance, Alphabet, NdArray};
use crate::mda::ByteReader;
use crate::stats::{entropy_of_counts, for_each_cube};

use self::bits::{pack_symbols, unpack_symbols};
use self::hilbert::{hilbert_scan, hilbert_unscan};
use self::lz78::{lz78_decode, lz78_encode};
use self::range::{FrequencyTable, RangeDecoder, RangeEncoder};

pub const MAGIC: &[u8; 4] = b"MDTC";
pub const VERSION: u8 = 1;
/// Largest cube volume tried by automatic block-side selection.
pub const AUTO_MAX_BLOCK_VOLUME: usize = 64;
/// Slack allowed between the payload and `N·H(μ̃)`.
pub const PAYLOAD_SLACK_BITS: f64 = 32.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Block = 0,
    Raw = 1,
    Lz78Hilbert = 2,
}

impl Mode {
    fn from_u8(v: u8) -> Option<Mode> {
        match v {
            0 => Some(Mode::Block),
            1 => Some(Mode::Raw),
            2 => Some(Mode::Lz78Hilbert),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Block => "BLOCK",
            Mode::Raw => "RAW",
            Mode::Lz78Hilbert => "LZ78-HILBERT",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockSide {
    /// Smallest estimated stream over `k ≤ min dim`, `k^d ≤ 64`.
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompressedStream {
    pub mode: Mode,
    pub alphabet: Alphabet,
    pub dims: Vec<usize>,
    pub k: usize,
    /// Distinct cubes (row-major symbols) with their counts.
    pub dictionary: Vec<(Vec<u8>, u32)>,
    pub payload: Vec<u8>,
    pub payload_bit_len: u64,
    pub boundary: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    pub total_bits: u64,
    pub bits_per_site: f64,
    pub header_bits: u64,
    pub dictionary_bits: u64,
    pub payload_bits: u64,
    pub boundary_bits: u64,
}

impl CompressedStream {
    fn header_bytes(&self) -> u64 {
        (4 + 1 + 1 + 1 + 2 + 8 * self.dims.len() + 4 + 8 + 8) as u64
    }

    pub fn volume(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn total_blocks(&self) -> u64 {
        if self.k == 0 {
            return 0;
        }
        self.dims.iter().map(|&n| (n / self.k) as u64).product()
    }

    /// Byte-accurate accounting of the serialized stream.
    pub fn rate_report(&self) -> RateReport {
        let block_volume = if self.k == 0 {
            0
        } else {
            self.k.pow(self.dims.len() as u32)
        };
        let header_bits = 8 * self.header_bytes();
        let dictionary_bits = 8 * (self.dictionary.len() * (block_volume + 4)) as u64;
        let payload_bits = 8 * self.payload.len() as u64;
        let boundary_bits = 8 * self.boundary.len() as u64;
        let total_bits = header_bits + dictionary_bits + payload_bits + boundary_bits;
        RateReport {
            total_bits,
            bits_per_site: total_bits as f64 / self.volume() as f64,
            header_bits,
            dictionary_bits,
            payload_bits,
            boundary_bits,
        }
    }

    /// `N·H(μ̃)` in bits for the dictionary counts (0 for non-BLOCK modes).
    pub fn empirical_code_length(&self) -> f64 {
        let total: u64 = self.dictionary.iter().map(|&(_, c)| c as u64).sum();
        if total == 0 {
            return 0.0;
        }
        total as f64 * entropy_of_counts(self.dictionary.iter().map(|&(_, c)| c as u64), total)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity((self.rate_report().total_bits / 8) as usize);
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.push(self.mode as u8);
        out.push(self.dims.len() as u8);
        out.extend_from_slice(&(self.alphabet.size() as u16).to_le_bytes());
        for &n in &self.dims {
            out.extend_from_slice(&(n as u64).to_le_bytes());
        }
        out.extend_from_slice(&(self.k as u32).to_le_bytes());
        out.extend_from_slice(&(self.dictionary.len() as u64).to_le_bytes());
        for (block, count) in &self.dictionary {
            out.extend_from_slice(block);
            out.extend_from_slice(&count.to_le_bytes());
        }
        out.extend_from_slice(&self.payload_bit_len.to_le_bytes());
        out.extend_from_slice(&self.payload);
        out.extend_from_slice(&self.boundary);
        out
    }

    /// Parses and validates a serialized stream.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader::new(bytes);
        if r.take(4)? != MAGIC {
            return Err(Error::format(0, "bad magic, expected MDTC"));
        }
        let version = r.u8()?;
        if version != VERSION {
            return Err(Error::format(4, format!("unsupported version {version}")));
        }
        let mode = Mode::from_u8(r.u8()?).ok_or_else(|| Error::format(5, "unknown mode"))?;
        let d = r.u8()? as usize;
        if !(1..=crate::lattice::MAX_DIM).contains(&d) {
            return Err(Error::format(6, format!("bad dimension {d}")));
        }
        let alphabet =
            Alphabet::new(r.u16()? as usize).map_err(|e| Error::format(7, e.to_string()))?;
        let mut dims = Vec::with_capacity(d);
        for _ in 0..d {
            let off = r.pos();
            let n = r.u64()?;
            if n == 0 || n > u32::MAX as u64 {
                return Err(Error::format(off, format!("bad dimension length {n}")));
            }
            dims.push(n as usize);
        }
        let volume = dims
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .ok_or_else(|| Error::format(9, "volume overflows"))?;
        let k_off = r.pos();
        let k = r.u32()? as usize;
        let min_dim = *dims.iter().min().unwrap();
        match mode {
            Mode::Block if k == 0 || k > min_dim => {
                return Err(Error::format(
                    k_off,
                    format!("block side {k} invalid for dims {dims:?}"),
                ))
            }
            Mode::Raw | Mode::Lz78Hilbert if k != 0 => {
                return Err(Error::format(k_off, "non-block stream must have k = 0"))
            }
            _ => {}
        }
        let block_volume = if k == 0 { 0 } else { k.pow(d as u32) };
        let entries_off = r.pos();
        let entries = r.u64()?;
        if mode != Mode::Block && entries != 0 {
            return Err(Error::format(
                entries_off,
                "non-block stream has a dictionary",
            ));
        }
        let total_blocks: u64 = if k == 0 {
            0
        } else {
            dims.iter().map(|&n| (n / k) as u64).product()
        };
        if entries > total_blocks {
            return Err(Error::format(
                entries_off,
                "more dictionary entries than blocks",
            ));
        }
        let mut dictionary = Vec::with_capacity(entries as usize);
        let mut sum = 0u64;
        for _ in 0..entries {
            let off = r.pos();
            let block = r.take(block_volume)?.to_vec();
            if block.iter().any(|&s| s as usize >= alphabet.size()) {
                return Err(Error::format(off, "dictionary symbol outside alphabet"));
            }
            let count = r.u32()?;
            if count == 0 {
                return Err(Error::format(off, "zero dictionary count"));
            }
            sum += count as u64;
            dictionary.push((block, count));
        }
        if sum != total_blocks {
            return Err(Error::format(
                r.pos(),
                format!("dictionary counts sum to {sum}, expected {total_blocks}"),
            ));
        }
        let len_off = r.pos();
        let payload_bit_len = r.u64()?;
        let sym_bits = alphabet.symbol_bits() as u64;
        if mode == Mode::Raw && payload_bit_len != volume as u64 * sym_bits {
            return Err(Error::format(
                len_off,
                "raw payload length does not match volume",
            ));
        }
        let payload_bytes = payload_bit_len.div_ceil(8);
        if payload_bytes > (bytes.len() as u64).saturating_sub(r.pos()) {
            return Err(Error::format(len_off, "payload length exceeds stream"));
        }
        let payload = r.take(payload_bytes as usize)?.to_vec();
        let boundary_sites = if mode == Mode::Block {
            volume - total_blocks as usize * block_volume
        } else {
            0
        };
        let boundary_len = (boundary_sites as u64 * sym_bits).div_ceil(8) as usize;
        let boundary = r.take(boundary_len)?.to_vec();
        if !r.is_empty() {
            return Err(Error::format(r.pos(), "trailing bytes after stream"));
        }
        Ok(CompressedStream {
            mode,
            alphabet,
            dims,
            k,
            dictionary,
            payload,
            payload_bit_len,
            boundary,
        })
    }
}

/// Whether the site lies inside the full cubes of the unshifted partition.
fn in_full_cube(idx: &[usize], covered: &[usize]) -> bool {
    idx.iter().zip(covered).all(|(&i, &c)| i < c)
}

fn boundary_symbols(x: &NdArray, k: usize) -> Vec<u8> {
    let covered: Vec<usize> = x.dims().iter().map(|&n| n / k * k).collect();
    let mut idx = vec![0usize; x.d()];
    let mut out = Vec::new();
    for &s in x.data() {
        if !in_full_cube(&idx, &covered) {
            out.push(s);
        }
        advance(&mut idx, x.dims());
    }
    out
}

fn full_cube_starts(dims: &[usize], k: usize) -> Vec<Vec<usize>> {
    dims.iter()
        .map(|&n| (0..n / k).map(|j| j * k).collect())
        .collect()
}

/// Dictionary in first-occurrence order plus the index sequence.
fn parse_blocks(x: &NdArray, k: usize) -> (IndexMap<Vec<u8>, u64>, Vec<u32>) {
    let mut dict: IndexMap<Vec<u8>, u64> = IndexMap::new();
    let mut seq = Vec::new();
    for_each_cube(x, k, &full_cube_starts(x.dims(), k), |b| {
        let i = match dict.get_index_of(b) {
            Some(i) => {
                dict[i] += 1;
                i
            }
            None => {
                dict.insert(b.to_vec(), 1);
                dict.len() - 1
            }
        };
        seq.push(i as u32);
    });
    (dict, seq)
}

fn encode_raw(x: &NdArray) -> CompressedStream {
    let (payload, payload_bit_len) =
        pack_symbols(x.data().iter().copied(), x.alphabet().symbol_bits());
    CompressedStream {
        mode: Mode::Raw,
        alphabet: x.alphabet(),
        dims: x.dims().to_vec(),
        k: 0,
        dictionary: Vec::new(),
        payload,
        payload_bit_len,
        boundary: Vec::new(),
    }
}

/// BLOCK stream with side `k`, or `None` if the counts do not fit the
/// container (u32 per entry, 2^32 in total).
fn encode_block(x: &NdArray, k: usize) -> Option<CompressedStream> {
    let (dict, seq) = parse_blocks(x, k);
    let freqs: Vec<u64> = dict.values().copied().collect();
    if freqs.iter().any(|&c| c > u32::MAX as u64) {
        return None;
    }
    let table = FrequencyTable::new(&freqs).ok()?;
    let mut enc = RangeEncoder::new(&table);
    for &i in &seq {
        enc.encode(i as usize);
    }
    let (payload, payload_bit_len) = enc.finish();
    let (boundary, _) = pack_symbols(boundary_symbols(x, k), x.alphabet().symbol_bits());
    let stream = CompressedStream {
        mode: Mode::Block,
        alphabet: x.alphabet(),
        dims: x.dims().to_vec(),
        k,
        dictionary: dict.into_iter().map(|(b, c)| (b, c as u32)).collect(),
        payload,
        payload_bit_len,
        boundary,
    };
    debug_assert!(
        stream.rate_report().payload_bits as f64
            <= stream.empirical_code_length() + PAYLOAD_SLACK_BITS
    );
    Some(stream)
}

/// Predicted BLOCK size in bits without running the range coder.
fn estimated_block_bits(x: &NdArray, k: usize) -> f64 {
    let d = x.d();
    let (dict, seq) = parse_blocks(x, k);
    let n = seq.len() as u64;
    let payload = n as f64 * entropy_of_counts(dict.values().copied(), n);
    let boundary_sites = x.volume() - seq.len() * k.pow(d as u32);
    let header = 8.0 * (4 + 1 + 1 + 1 + 2 + 8 * d + 4 + 8 + 8) as f64;
    header
        + 8.0 * (dict.len() * (k.pow(d as u32) + 4)) as f64
        + 8.0 * ((payload + 2.0) / 8.0).ceil()
        + 8.0 * ((boundary_sites as u64 * x.alphabet().symbol_bits() as u64).div_ceil(8)) as f64
}

fn auto_block_side(x: &NdArray) -> usize {
    let d = x.d() as u32;
    (1..=x.min_dim())
        .take_while(|k| k.pow(d) <= AUTO_MAX_BLOCK_VOLUME)
        .map(|k| (k, estimated_block_bits(x, k)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(k, _)| k)
        .unwrap_or(1)
}

/// Encodes `x`; falls back to RAW whenever BLOCK is not strictly smaller.
pub fn encode(x: &NdArray, side: BlockSide) -> Result<CompressedStream> {
    let k = match side {
        BlockSide::Fixed(k) => {
            if k == 0 || k > x.min_dim() {
                return Err(Error::domain(format!(
                    "block side {k} must lie in [1, {}]",
                    x.min_dim()
                )));
            }
            k
        }
        BlockSide::Auto => auto_block_side(x),
    };
    let raw = encode_raw(x);
    Ok(match encode_block(x, k) {
        Some(block) if block.rate_report().total_bits < raw.rate_report().total_bits => block,
        _ => raw,
    })
}

/// LZ78 over the Hilbert scan, in the MDTC container.
pub fn encode_lz78_hilbert(x: &NdArray) -> Result<CompressedStream> {
    let seq = hilbert_scan(x)?;
    let (payload, payload_bit_len) = lz78_encode(&seq, x.alphabet());
    Ok(CompressedStream {
        mode: Mode::Lz78Hilbert,
        alphabet: x.alphabet(),
        dims: x.dims().to_vec(),
        k: 0,
        dictionary: Vec::new(),
        payload,
        payload_bit_len,
        boundary: Vec::new(),
    })
}

pub fn decode(s: &CompressedStream) -> Result<NdArray> {
    let volume = s.volume();
    let sym_bits = s.alphabet.symbol_bits();
    match s.mode {
        Mode::Raw => {
            let data = unpack_symbols(&s.payload, volume, sym_bits)?;
            NdArray::new(s.alphabet, s.dims.clone(), data)
        }
        Mode::Lz78Hilbert => {
            let seq = lz78_decode(&s.payload, s.payload_bit_len, s.alphabet)?;
            if s.dims.len() != 2 || s.dims[0] != s.dims[1] || seq.len() != volume {
                return Err(Error::format(0, "LZ78 stream does not fill the array"));
            }
            hilbert_unscan(&seq, s.alphabet, s.dims[0])
        }
        Mode::Block => decode_block(s),
    }
}

fn decode_block(s: &CompressedStream) -> Result<NdArray> {
    let d = s.dims.len();
    let k = s.k;
    let freqs: Vec<u64> = s.dictionary.iter().map(|&(_, c)| c as u64).collect();
    let table = FrequencyTable::new(&freqs).map_err(|e| Error::format(0, e.to_string()))?;
    let mut dec = RangeDecoder::new(&table, &s.payload);
    let mut data = vec![0u8; s.volume()];
    let starts = full_cube_starts(&s.dims, k);
    let lens: Vec<usize> = starts.iter().map(Vec::len).collect();
    let mut idx = vec![0usize; d];
    let rows: usize = k.pow(d as u32 - 1);
    for _ in 0..s.total_blocks() {
        let block = &s.dictionary[dec.decode()].0;
        // copy k-runs along the last axis
        let mut inner = vec![0usize; d - 1];
        for row in 0..rows {
            let mut pos = 0;
            for a in 0..d {
                let local = if a + 1 < d { inner[a] } else { 0 };
                pos = pos * s.dims[a] + starts[a][idx[a]] + local;
            }
            data[pos..pos + k].copy_from_slice(&block[row * k..(row + 1) * k]);
            if d > 1 {
                advance(&mut inner, &vec![k; d - 1]);
            }
        }
        advance(&mut idx, &lens);
    }
    let covered: Vec<usize> = s.dims.iter().map(|&n| n / k * k).collect();
    let boundary_sites = s.volume() - s.total_blocks() as usize * k.pow(d as u32);
    let boundary = unpack_symbols(&s.boundary, boundary_sites, s.alphabet.symbol_bits())?;
    let mut it = boundary.into_iter();
    let mut site = vec![0usize; d];
    for v in data.iter_mut() {
        if !in_full_cube(&site, &covered) {
            *v = it.next().expect("boundary length checked");
        }
        advance(&mut site, &s.dims);
    }
    NdArray::new(s.alphabet, s.dims.clone(), data).map_err(|e| Error::format(0, e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateComparison {
    pub block_rate: f64,
    pub block_k: usize,
    pub block_mode: Mode,
    pub lz78_hilbert_rate: f64,
    /// `ceil(log2 |A|)` bits per site, without container overhead.
    pub raw_rate: f64,
}

/// Bits per site of the block codec (automatic k) and of LZ78 on the
/// Hilbert scan, both including their container headers.
pub fn compare_rates(x: &NdArray) -> Result<RateComparison> {
    let lz = encode_lz78_hilbert(x)?;
    let block = encode(x, BlockSide::Auto)?;
    Ok(RateComparison {
        block_rate: block.rate_report().bits_per_site,
        block_k: block.k,
        block_mode: block.mode,
        lz78_hilbert_rate: lz.rate_report().bits_per_site,
        raw_rate: x.alphabet().symbol_bits() as f64,
    })
}
