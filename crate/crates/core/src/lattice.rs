//! Finite windows of the lattice ℤ^d (d ≤ 3): symbol arrays, boxes,
//! partition shifts, projections and regular block partitions.
//!
//! Storage is row-major with the last axis varying fastest. Every file
//! format and the canonical block key depend on this order.

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 3;

/// A finite alphabet `{0, .., size-1}` with `2 <= size <= 256`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Alphabet(u16);

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if !(2..=256).contains(&size) {
            return Err(Error::domain(format!(
                "alphabet size {size} outside [2, 256]"
            )));
        }
        Ok(Alphabet(size as u16))
    }

    pub const fn binary() -> Self {
        Alphabet(2)
    }

    pub fn size(self) -> usize {
        self.0 as usize
    }

    pub fn log2_size(self) -> f64 {
        (self.0 as f64).log2()
    }

    /// Bits needed to store one symbol verbatim, `ceil(log2 |A|)`.
    pub fn symbol_bits(self) -> u32 {
        usize::BITS - (self.size() - 1).leading_zeros()
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 || d > MAX_DIM {
        return Err(Error::domain(format!(
            "dimension {d} outside [1, {MAX_DIM}]"
        )));
    }
    Ok(())
}

/// An axis-aligned box `origin + [0, sides)` in ℤ^d.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatticeBox {
    origin: Vec<i64>,
    sides: Vec<usize>,
}

impl LatticeBox {
    pub fn new(origin: Vec<i64>, sides: Vec<usize>) -> Result<Self> {
        check_dim(sides.len())?;
        if origin.len() != sides.len() {
            return Err(Error::domain("origin and sides differ in dimension"));
        }
        if sides.contains(&0) {
            return Err(Error::domain("box sides must be positive"));
        }
        Ok(LatticeBox { origin, sides })
    }

    /// The box `[0, sides)`.
    pub fn at_origin(sides: &[usize]) -> Result<Self> {
        Self::new(vec![0; sides.len()], sides.to_vec())
    }

    /// The cube Λ_n in dimension d.
    pub fn cube(n: usize, d: usize) -> Result<Self> {
        Self::at_origin(&vec![n; d])
    }

    pub fn d(&self) -> usize {
        self.sides.len()
    }

    pub fn origin(&self) -> &[i64] {
        &self.origin
    }

    pub fn sides(&self) -> &[usize] {
        &self.sides
    }

    pub fn volume(&self) -> usize {
        self.sides.iter().product()
    }

    pub fn contains_point(&self, point: &[i64]) -> bool {
        point
            .iter()
            .zip(&self.origin)
            .zip(&self.sides)
            .all(|((&x, &o), &s)| x >= o && x < o + s as i64)
    }

    pub fn contains_box(&self, other: &LatticeBox) -> bool {
        self.d() == other.d()
            && (0..self.d()).all(|i| {
                other.origin[i] >= self.origin[i]
                    && other.origin[i] + other.sides[i] as i64
                        <= self.origin[i] + self.sides[i] as i64
            })
    }
}

/// A partition shift `p`, one non-negative component per axis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ShiftVector(pub Vec<usize>);

impl ShiftVector {
    pub fn zero(d: usize) -> Self {
        ShiftVector(vec![0; d])
    }

    pub fn d(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[usize] {
        &self.0
    }

    /// Checks that this is a valid shift for an `m`-block partition.
    pub fn check_for_block(&self, m: usize, d: usize) -> Result<()> {
        if self.d() != d {
            return Err(Error::domain(format!(
                "shift has dimension {}, expected {d}",
                self.d()
            )));
        }
        if let Some(&c) = self.0.iter().find(|&&c| c >= m) {
            return Err(Error::domain(format!("shift component {c} not below {m}")));
        }
        Ok(())
    }

    /// All shifts in Λ_m, lexicographically ordered (last axis fastest).
    pub fn all(m: usize, d: usize) -> impl Iterator<Item = ShiftVector> {
        let total = m.pow(d as u32);
        (0..total).map(move |mut idx| {
            let mut p = vec![0; d];
            for c in p.iter_mut().rev() {
                *c = idx % m;
                idx /= m;
            }
            ShiftVector(p)
        })
    }
}

impl std::fmt::Display for ShiftVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// A d-dimensional array of symbols over a finite alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NdArray {
    alphabet: Alphabet,
    dims: Vec<usize>,
    data: Vec<u8>,
}

impl NdArray {
    pub fn new(alphabet: Alphabet, dims: Vec<usize>, data: Vec<u8>) -> Result<Self> {
        check_dim(dims.len())?;
        if dims.contains(&0) {
            return Err(Error::domain("array dimensions must be positive"));
        }
        let volume: usize = dims.iter().product();
        if data.len() != volume {
            return Err(Error::domain(format!(
                "data length {} does not match volume {volume}",
                data.len()
            )));
        }
        if let Some(&s) = data.iter().find(|&&s| s as usize >= alphabet.size()) {
            return Err(Error::domain(format!(
                "symbol {s} outside alphabet of size {}",
                alphabet.size()
            )));
        }
        Ok(NdArray {
            alphabet,
            dims,
            data,
        })
    }

    pub fn filled(alphabet: Alphabet, dims: Vec<usize>, symbol: u8) -> Result<Self> {
        let volume = dims.iter().product();
        Self::new(alphabet, dims, vec![symbol; volume])
    }

    /// Builds an array from a function of the multi-index.
    pub fn from_fn(
        alphabet: Alphabet,
        dims: Vec<usize>,
        mut f: impl FnMut(&[usize]) -> u8,
    ) -> Result<Self> {
        check_dim(dims.len())?;
        let volume: usize = dims.iter().product();
        let mut data = Vec::with_capacity(volume);
        let mut idx = vec![0usize; dims.len()];
        for _ in 0..volume {
            data.push(f(&idx));
            advance(&mut idx, &dims);
        }
        Self::new(alphabet, dims, data)
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn d(&self) -> usize {
        self.dims.len()
    }

    pub fn volume(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    pub fn min_dim(&self) -> usize {
        self.dims.iter().copied().min().unwrap_or(0)
    }

    /// Side length when all dims agree.
    pub fn cube_side(&self) -> Option<usize> {
        let n = self.dims[0];
        self.dims.iter().all(|&s| s == n).then_some(n)
    }

    pub fn full_box(&self) -> LatticeBox {
        LatticeBox {
            origin: vec![0; self.d()],
            sides: self.dims.clone(),
        }
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn get(&self, idx: &[usize]) -> u8 {
        self.data[self.offset(idx)]
    }

    /// Same data reinterpreted over another alphabet; fails if a symbol
    /// does not fit.
    pub fn with_alphabet(&self, alphabet: Alphabet) -> Result<Self> {
        Self::new(alphabet, self.dims.clone(), self.data.clone())
    }

    /// Applies a symbol map to every site.
    pub fn map_symbols(&self, alphabet: Alphabet, f: impl Fn(u8) -> u8) -> Result<Self> {
        Self::new(
            alphabet,
            self.dims.clone(),
            self.data.iter().map(|&s| f(s)).collect(),
        )
    }

    /// Copies the cube of side `k` with lower corner `origin` into `buf`
    /// in row-major order. The cube must lie inside the array.
    pub(crate) fn copy_cube(&self, origin: &[usize], k: usize, buf: &mut Vec<u8>) {
        let sides = vec![k; self.d()];
        self.copy_box(origin, &sides, buf);
    }

    pub(crate) fn copy_box(&self, origin: &[usize], sides: &[usize], buf: &mut Vec<u8>) {
        buf.clear();
        let d = self.d();
        let run = sides[d - 1];
        let rows: usize = sides[..d - 1].iter().product();
        let mut idx = vec![0usize; d];
        for _ in 0..rows {
            let mut pos = 0;
            for a in 0..d {
                pos = pos * self.dims[a] + origin[a] + idx[a];
            }
            buf.extend_from_slice(&self.data[pos..pos + run]);
            // advance over the leading d-1 axes
            for a in (0..d - 1).rev() {
                idx[a] += 1;
                if idx[a] < sides[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
    }
}

/// Odometer increment of a row-major multi-index.
pub(crate) fn advance(idx: &mut [usize], dims: &[usize]) {
    for a in (0..dims.len()).rev() {
        idx[a] += 1;
        if idx[a] < dims[a] {
            return;
        }
        idx[a] = 0;
    }
}

/// Restriction of `x` to `bx`.
pub fn project(x: &NdArray, bx: &LatticeBox) -> Result<NdArray> {
    if bx.d() != x.d() || !x.full_box().contains_box(bx) {
        return Err(Error::domain(format!(
            "box {:?}+{:?} not inside array of dims {:?}",
            bx.origin, bx.sides, x.dims
        )));
    }
    let origin: Vec<usize> = bx.origin.iter().map(|&o| o as usize).collect();
    let mut data = Vec::with_capacity(bx.volume());
    x.copy_box(&origin, &bx.sides, &mut data);
    Ok(NdArray {
        alphabet: x.alphabet,
        dims: bx.sides.clone(),
        data,
    })
}

/// One element of a regular partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionCell {
    pub bx: LatticeBox,
    pub is_full_cube: bool,
}

/// The `p`-shifted regular `k`-block partition of `n_box`: the nonempty
/// intersections `(Λ_k + r + p) ∩ n_box` for `r ∈ kℤ^d`, in lexicographic
/// order of `r`.
pub fn regular_partition(
    n_box: &LatticeBox,
    k: usize,
    p: &ShiftVector,
) -> Result<Vec<PartitionCell>> {
    if k == 0 {
        return Err(Error::domain("block side must be positive"));
    }
    p.check_for_block(k, n_box.d())?;
    let d = n_box.d();
    // per-axis segments (start, len, full)
    let segments: Vec<Vec<(i64, usize, bool)>> = (0..d)
        .map(|a| {
            let lo = n_box.origin[a];
            let hi = lo + n_box.sides[a] as i64;
            let (k_i, p_i) = (k as i64, p.0[a] as i64);
            let first = (lo - p_i).div_euclid(k_i);
            let last = (hi - 1 - p_i).div_euclid(k_i);
            (first..=last)
                .map(|j| {
                    let start = (p_i + j * k_i).max(lo);
                    let end = (p_i + (j + 1) * k_i).min(hi);
                    let len = (end - start) as usize;
                    (start, len, len == k)
                })
                .collect()
        })
        .collect();
    let counts: Vec<usize> = segments.iter().map(Vec::len).collect();
    let total: usize = counts.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        let mut origin = Vec::with_capacity(d);
        let mut sides = Vec::with_capacity(d);
        let mut full = true;
        for a in 0..d {
            let (s, len, f) = segments[a][idx[a]];
            origin.push(s);
            sides.push(len);
            full &= f;
        }
        out.push(PartitionCell {
            bx: LatticeBox { origin, sides },
            is_full_cube: full,
        });
        advance(&mut idx, &counts);
    }
    Ok(out)
}

/// Canonical injective byte encoding of a block: `d` as one byte, each
/// dimension as u32 little-endian, then the symbols in row-major order.
pub fn block_key(b: &NdArray) -> Vec<u8> {
    block_key_from_parts(&b.dims, &b.data)
}

pub(crate) fn block_key_from_parts(dims: &[usize], symbols: &[u8]) -> Vec<u8> {
    let mut key = Vec::with_capacity(1 + 4 * dims.len() + symbols.len());
    key.push(dims.len() as u8);
    for &n in dims {
        key.extend_from_slice(&(n as u32).to_le_bytes());
    }
    key.extend_from_slice(symbols);
    key
}

/// Inverse of [`block_key`].
pub fn decode_block_key(key: &[u8], alphabet: Alphabet) -> Result<NdArray> {
    let d = *key
        .first()
        .ok_or_else(|| Error::format(0, "empty block key"))? as usize;
    check_dim(d).map_err(|_| Error::format(0, format!("bad dimension {d} in block key")))?;
    let header = 1 + 4 * d;
    if key.len() < header {
        return Err(Error::format(key.len() as u64, "truncated block key"));
    }
    let dims: Vec<usize> = key[1..header]
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]) as usize)
        .collect();
    let volume: usize = dims.iter().product();
    if key.len() != header + volume {
        return Err(Error::format(
            header as u64,
            format!(
                "block key holds {} symbols, expected {volume}",
                key.len() - header
            ),
        ));
    }
    NdArray::new(alphabet, dims, key[header..].to_vec())
}
