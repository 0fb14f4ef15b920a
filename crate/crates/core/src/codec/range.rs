//! Static-model range coder with a 64-bit window.
//!
//! State is `low` (u64, carries rippled into already emitted bytes) and
//! `range`, renormalized to stay at or above 2^56 by shifting out whole
//! bytes. Frequency totals are limited to 2^32, so the integer
//! truncation `range / total` costs less than 2^-23 bits per symbol.
//! The last symbol of the table absorbs the truncation remainder.
//!
//! `finish` emits only as many bits of the final window as are needed to
//! name a point inside the last interval, so the stream length stays
//! within two bits of the ideal code length `Σ -log2(freq/total)`. The
//! decoder reads zeros past the end of the stream.

use crate::error::{Error, Result};

use super::bits::BitWriter;

const RENORM: u64 = 1 << 56;
pub const MAX_TOTAL: u64 = 1 << 32;

#[derive(Debug, Clone)]
pub struct FrequencyTable {
    cum: Vec<u64>,
}

impl FrequencyTable {
    pub fn new(freqs: &[u64]) -> Result<Self> {
        if freqs.is_empty() || freqs.contains(&0) {
            return Err(Error::domain("frequencies must be positive"));
        }
        let mut cum = Vec::with_capacity(freqs.len() + 1);
        cum.push(0);
        let mut acc = 0u64;
        for &f in freqs {
            acc = acc
                .checked_add(f)
                .filter(|&t| t <= MAX_TOTAL)
                .ok_or_else(|| Error::domain("frequency total exceeds 2^32"))?;
            cum.push(acc);
        }
        Ok(FrequencyTable { cum })
    }

    pub fn symbols(&self) -> usize {
        self.cum.len() - 1
    }

    pub fn total(&self) -> u64 {
        *self.cum.last().unwrap()
    }

    /// Ideal code length in bits of a sequence with these exact counts.
    pub fn ideal_bits(&self) -> f64 {
        let total = self.total() as f64;
        self.cum
            .windows(2)
            .map(|w| {
                let f = (w[1] - w[0]) as f64;
                -f * (f / total).log2()
            })
            .sum()
    }
}

pub struct RangeEncoder<'t> {
    table: &'t FrequencyTable,
    out: Vec<u8>,
    low: u64,
    range: u64,
}

impl<'t> RangeEncoder<'t> {
    pub fn new(table: &'t FrequencyTable) -> Self {
        RangeEncoder {
            table,
            out: Vec::new(),
            low: 0,
            range: u64::MAX,
        }
    }

    fn carry(&mut self) {
        for b in self.out.iter_mut().rev() {
            let (v, overflow) = b.overflowing_add(1);
            *b = v;
            if !overflow {
                return;
            }
        }
        unreachable!("carry past the start of the stream");
    }

    pub fn encode(&mut self, symbol: usize) {
        let t = self.table;
        let r = self.range / t.total();
        let start = r * t.cum[symbol];
        let (low, overflow) = self.low.overflowing_add(start);
        self.low = low;
        if overflow {
            self.carry();
        }
        self.range = if symbol + 1 == t.symbols() {
            self.range - start
        } else {
            r * (t.cum[symbol + 1] - t.cum[symbol])
        };
        while self.range < RENORM {
            self.out.push((self.low >> 56) as u8);
            self.low <<= 8;
            self.range <<= 8;
        }
    }

    /// Returns the stream bytes and its exact length in bits.
    pub fn finish(mut self) -> (Vec<u8>, u64) {
        let lo = self.low as u128;
        let hi = lo + self.range as u128;
        let (tail_bits, value) = (0..=64u32)
            .find_map(|t| {
                let step = 1u128 << (64 - t);
                let v = lo.div_ceil(step) * step;
                (v < hi).then_some((t, v))
            })
            .expect("a 64-bit point always fits");
        let value = if value >> 64 == 1 {
            self.carry();
            value - (1 << 64)
        } else {
            value
        } as u64;
        let mut w = BitWriter::new();
        for &b in &self.out {
            w.write(b as u64, 8);
        }
        if tail_bits > 0 {
            w.write(value >> (64 - tail_bits), tail_bits);
        }
        w.finish()
    }
}

pub struct RangeDecoder<'a, 't> {
    table: &'t FrequencyTable,
    bytes: &'a [u8],
    next: usize,
    diff: u64,
    range: u64,
}

impl<'a, 't> RangeDecoder<'a, 't> {
    pub fn new(table: &'t FrequencyTable, bytes: &'a [u8]) -> Self {
        let mut d = RangeDecoder {
            table,
            bytes,
            next: 0,
            diff: 0,
            range: u64::MAX,
        };
        for _ in 0..8 {
            d.diff = (d.diff << 8) | d.next_byte() as u64;
        }
        d
    }

    fn next_byte(&mut self) -> u8 {
        let b = self.bytes.get(self.next).copied().unwrap_or(0);
        self.next += 1;
        b
    }

    pub fn decode(&mut self) -> usize {
        let t = self.table;
        let r = self.range / t.total();
        let target = (self.diff / r).min(t.total() - 1);
        let symbol = t.cum.partition_point(|&c| c <= target) - 1;
        let start = r * t.cum[symbol];
        self.diff -= start;
        self.range = if symbol + 1 == t.symbols() {
            self.range - start
        } else {
            r * (t.cum[symbol + 1] - t.cum[symbol])
        };
        while self.range < RENORM {
            self.diff = (self.diff << 8) | self.next_byte() as u64;
            self.range <<= 8;
        }
        symbol
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn roundtrip(freqs: &[u64], seq: &[usize]) -> u64 {
        let table = FrequencyTable::new(freqs).unwrap();
        let mut enc = RangeEncoder::new(&table);
        for &s in seq {
            enc.encode(s);
        }
        let (bytes, bits) = enc.finish();
        assert_eq!(bytes.len() as u64, bits.div_ceil(8));
        let mut dec = RangeDecoder::new(&table, &bytes);
        let back: Vec<usize> = (0..seq.len()).map(|_| dec.decode()).collect();
        assert_eq!(back, seq);
        bits
    }

    #[test]
    fn single_symbol_costs_nothing() {
        assert_eq!(roundtrip(&[5], &[0; 5]), 0);
    }

    #[test]
    fn uniform_pairs() {
        // 2 bits per symbol; trailing zero bits of the final point are dropped
        let seq = [0usize, 3, 1, 2, 2, 1, 3, 0];
        let bits = roundtrip(&[2, 2, 2, 2], &seq);
        assert!(bits <= 18, "{bits}");
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(FrequencyTable::new(&[]).is_err());
        assert!(FrequencyTable::new(&[1, 0]).is_err());
        assert!(FrequencyTable::new(&[1 << 31, 1 << 31, 1]).is_err());
    }

    #[test]
    fn near_ideal_length_on_skewed_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for trial in 0..50 {
            let n_sym = rng.gen_range(1..300);
            let len = rng.gen_range(1..20_000);
            // skewed: symbol i with weight ~ 1/(i+1)^2
            let mut seq: Vec<usize> = (0..len)
                .map(|_| {
                    let u: f64 = rng.gen();
                    ((1.0 / (1.0 - u).sqrt()) as usize - 1).min(n_sym - 1)
                })
                .collect();
            // make every symbol occur at least once
            seq.extend(0..n_sym);
            let mut freqs = vec![0u64; n_sym];
            for &s in &seq {
                freqs[s] += 1;
            }
            let table = FrequencyTable::new(&freqs).unwrap();
            let bits = roundtrip(&freqs, &seq);
            let ideal = table.ideal_bits();
            assert!(
                bits as f64 <= ideal + 2.01,
                "trial {trial}: {bits} vs {ideal}"
            );
        }
    }

    #[test]
    fn carries_propagate() {
        // long runs of the top symbol push low toward the window's end
        let mut seq = vec![1usize; 5000];
        seq.extend([0, 1, 1, 0]);
        seq.extend(vec![1; 5000]);
        let mut freqs = [0u64; 2];
        for &s in &seq {
            freqs[s] += 1;
        }
        roundtrip(&freqs, &seq);
    }
}
