//! Sets of m-cube contents ("libraries") and their text serialization.
//!
//! Library file:
//!
//! ```text
//! # blockset d=<d> m=<m> alphabet=<|A|>
//! <hex block_key>      (one per line, sorted ascending)
//! ```

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::lattice::{block_key, block_key_from_parts, decode_block_key, Alphabet, NdArray};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Members {
    /// Every block of Σ^m.
    All,
    /// Raw row-major symbols of each member cube.
    Set(BTreeSet<Vec<u8>>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSet {
    m: usize,
    d: usize,
    alphabet: Alphabet,
    members: Members,
}

impl BlockSet {
    pub fn empty(alphabet: Alphabet, d: usize, m: usize) -> Self {
        BlockSet {
            m,
            d,
            alphabet,
            members: Members::Set(BTreeSet::new()),
        }
    }

    /// The whole of Σ^m, held symbolically.
    pub fn all(alphabet: Alphabet, d: usize, m: usize) -> Self {
        BlockSet {
            m,
            d,
            alphabet,
            members: Members::All,
        }
    }

    pub fn from_blocks<'a>(
        alphabet: Alphabet,
        d: usize,
        m: usize,
        blocks: impl IntoIterator<Item = &'a NdArray>,
    ) -> Result<Self> {
        let mut set = Self::empty(alphabet, d, m);
        for b in blocks {
            set.insert(b)?;
        }
        Ok(set)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn block_volume(&self) -> usize {
        self.m.pow(self.d as u32)
    }

    pub fn is_universe(&self) -> bool {
        matches!(self.members, Members::All)
    }

    pub fn insert(&mut self, block: &NdArray) -> Result<()> {
        if block.dims().len() != self.d || block.dims().iter().any(|&n| n != self.m) {
            return Err(Error::domain(format!(
                "block of dims {:?} is not a {}-cube in dimension {}",
                block.dims(),
                self.m,
                self.d
            )));
        }
        if block.alphabet().size() > self.alphabet.size() {
            return Err(Error::domain("block alphabet larger than the set's"));
        }
        self.insert_symbols(block.data().to_vec());
        Ok(())
    }

    pub(crate) fn insert_symbols(&mut self, symbols: Vec<u8>) {
        debug_assert_eq!(symbols.len(), self.block_volume());
        if let Members::Set(s) = &mut self.members {
            s.insert(symbols);
        }
    }

    /// Membership of a raw row-major m-cube.
    pub fn contains_symbols(&self, symbols: &[u8]) -> bool {
        match &self.members {
            Members::All => symbols.len() == self.block_volume(),
            Members::Set(s) => s.contains(symbols),
        }
    }

    pub fn contains(&self, block: &NdArray) -> bool {
        block.d() == self.d
            && block.dims().iter().all(|&n| n == self.m)
            && self.contains_symbols(block.data())
    }

    /// Number of members; `None` when the universe does not fit a u128.
    pub fn len(&self) -> Option<u128> {
        match &self.members {
            Members::All => (self.alphabet.size() as u128).checked_pow(self.block_volume() as u32),
            Members::Set(s) => Some(s.len() as u128),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    pub fn log2_len(&self) -> f64 {
        match &self.members {
            Members::All => self.block_volume() as f64 * self.alphabet.log2_size(),
            Members::Set(s) => (s.len() as f64).log2(),
        }
    }

    /// Relabels every member's symbols.
    pub fn map_symbols(&self, f: impl Fn(u8) -> u8) -> Self {
        let members = match &self.members {
            Members::All => Members::All,
            Members::Set(s) => Members::Set(
                s.iter()
                    .map(|b| b.iter().map(|&v| f(v)).collect())
                    .collect(),
            ),
        };
        BlockSet {
            members,
            ..self.clone()
        }
    }

    /// Explicit members in ascending key order; the universe is
    /// materialized only when it has at most 2^24 elements.
    pub fn blocks(&self) -> Result<Vec<NdArray>> {
        let dims = vec![self.m; self.d];
        let raw: Vec<Vec<u8>> = match &self.members {
            Members::Set(s) => s.iter().cloned().collect(),
            Members::All => {
                let n = self
                    .len()
                    .filter(|&n| n <= 1 << 24)
                    .ok_or_else(|| Error::Resource("universe too large to list".into()))?;
                (0..n as u64)
                    .map(|i| enumerate_block(i, self.alphabet.size(), self.block_volume()))
                    .collect()
            }
        };
        raw.into_iter()
            .map(|b| NdArray::new(self.alphabet, dims.clone(), b))
            .collect()
    }

    pub fn to_library_text(&self) -> Result<String> {
        let mut keys: Vec<String> = self
            .blocks()?
            .iter()
            .map(|b| hex::encode(block_key(b)))
            .collect();
        keys.sort();
        let mut out = format!(
            "# blockset d={} m={} alphabet={}\n",
            self.d,
            self.m,
            self.alphabet.size()
        );
        for k in keys {
            out.push_str(&k);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn from_library_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::format(0, "empty library file"))?;
        let rest = header
            .strip_prefix("# blockset")
            .ok_or_else(|| Error::format(0, "missing '# blockset' header"))?;
        let (mut d, mut m, mut a) = (None, None, None);
        for field in rest.split_whitespace() {
            let (k, v) = field
                .split_once('=')
                .ok_or_else(|| Error::format(0, format!("bad header field {field}")))?;
            let v: usize = v
                .parse()
                .map_err(|_| Error::format(0, format!("bad header value {field}")))?;
            match k {
                "d" => d = Some(v),
                "m" => m = Some(v),
                "alphabet" => a = Some(v),
                _ => return Err(Error::format(0, format!("unknown header field {k}"))),
            }
        }
        let (d, m, a) = match (d, m, a) {
            (Some(d), Some(m), Some(a)) => (d, m, Alphabet::new(a)?),
            _ => return Err(Error::format(0, "header needs d, m and alphabet")),
        };
        let mut set = Self::empty(a, d, m);
        let mut offset = header.len() as u64 + 1;
        for line in lines {
            let t = line.trim();
            if !t.is_empty() {
                let bytes = hex::decode(t)
                    .map_err(|e| Error::format(offset, format!("bad hex key: {e}")))?;
                let block = decode_block_key(&bytes, a)
                    .map_err(|e| Error::format(offset, e.to_string()))?;
                set.insert(&block)
                    .map_err(|e| Error::format(offset, e.to_string()))?;
            }
            offset += line.len() as u64 + 1;
        }
        Ok(set)
    }

    /// Hex block key of a raw member, for diagnostics.
    pub fn key_hex(&self, symbols: &[u8]) -> String {
        hex::encode(block_key_from_parts(&vec![self.m; self.d], symbols))
    }
}

/// The `index`-th block of Σ^m in base-|A| order (last site fastest).
pub(crate) fn enumerate_block(mut index: u64, base: usize, volume: usize) -> Vec<u8> {
    let mut out = vec![0u8; volume];
    for v in out.iter_mut().rev() {
        *v = (index % base as u64) as u8;
        index /= base as u64;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn universe_and_empty() {
        let a = Alphabet::binary();
        let all = BlockSet::all(a, 2, 2);
        assert_eq!(all.len(), Some(16));
        assert_eq!(all.blocks().unwrap().len(), 16);
        assert!(all.contains_symbols(&[0, 1, 1, 1]));
        assert!(BlockSet::empty(a, 2, 2).is_empty());
        assert!(BlockSet::all(a, 2, 5).blocks().is_err());
    }

    #[test]
    fn rejects_wrong_shape() {
        let mut s = BlockSet::empty(Alphabet::binary(), 2, 2);
        let row = NdArray::filled(Alphabet::binary(), vec![4], 0).unwrap();
        assert!(s.insert(&row).is_err());
        let rect = NdArray::filled(Alphabet::binary(), vec![2, 3], 0).unwrap();
        assert!(s.insert(&rect).is_err());
    }

    #[test]
    fn library_text_roundtrip() {
        let a = Alphabet::new(3).unwrap();
        let blocks = [
            NdArray::new(a, vec![2], vec![2, 1]).unwrap(),
            NdArray::new(a, vec![2], vec![0, 1]).unwrap(),
        ];
        let s = BlockSet::from_blocks(a, 1, 2, &blocks).unwrap();
        let text = s.to_library_text().unwrap();
        assert_eq!(
            text,
            "# blockset d=1 m=2 alphabet=3\n01020000000001\n01020000000201\n"
        );
        assert_eq!(BlockSet::from_library_text(&text).unwrap(), s);
        assert!(BlockSet::from_library_text("# blockset d=1 m=2\n").is_err());
        assert!(BlockSet::from_library_text("# blockset d=1 m=2 alphabet=3\nzz\n").is_err());
    }
}
