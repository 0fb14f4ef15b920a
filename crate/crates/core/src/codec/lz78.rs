//! LZ78 over a finite alphabet.
//!
//! The dictionary starts empty (index 0 is the empty phrase) and is never
//! reset. Stream layout, MSB-first:
//!
//! ```text
//! flag:1                      1 if the input ends inside a known phrase
//! (index, symbol)*            index: ceil(log2(dict_size + 1)) bits
//!                             symbol: ceil(log2 |A|) bits
//! index                       the trailing partial phrase, if flag = 1
//! ```
//!
//! The empty input encodes to zero bits.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::lattice::Alphabet;

use super::bits::{ceil_log2, BitReader, BitWriter};

/// Parses `seq` into LZ78 phrases; returns `(index, Some(symbol))` per
/// phrase and `(index, None)` for a trailing partial phrase.
pub fn lz78_parse(seq: &[u8]) -> Vec<(u32, Option<u8>)> {
    let mut trie: HashMap<(u32, u8), u32> = HashMap::new();
    let mut tokens = Vec::new();
    let mut node = 0u32;
    for &s in seq {
        match trie.get(&(node, s)) {
            Some(&child) => node = child,
            None => {
                tokens.push((node, Some(s)));
                trie.insert((node, s), tokens.len() as u32);
                node = 0;
            }
        }
    }
    if node != 0 {
        tokens.push((node, None));
    }
    tokens
}

pub fn lz78_encode(seq: &[u8], alphabet: Alphabet) -> (Vec<u8>, u64) {
    if seq.is_empty() {
        return (Vec::new(), 0);
    }
    let tokens = lz78_parse(seq);
    let sym_bits = alphabet.symbol_bits();
    let mut w = BitWriter::new();
    w.push_bit(matches!(tokens.last(), Some((_, None))));
    for (dict_size, &(index, symbol)) in tokens.iter().enumerate() {
        w.write(index as u64, ceil_log2(dict_size as u64 + 1));
        if let Some(s) = symbol {
            w.write(s as u64, sym_bits);
        }
    }
    w.finish()
}

pub fn lz78_decode(bytes: &[u8], bit_len: u64, alphabet: Alphabet) -> Result<Vec<u8>> {
    if bit_len > bytes.len() as u64 * 8 {
        return Err(Error::format(
            bytes.len() as u64,
            "bit length exceeds stream",
        ));
    }
    let mut out = Vec::new();
    if bit_len == 0 {
        return Ok(out);
    }
    let mut r = BitReader::new(bytes, bit_len);
    let has_tail = r.read(1)? == 1;
    let sym_bits = alphabet.symbol_bits();
    // phrase i (1-based) occupies out[start..start+len]
    let mut phrases: Vec<(usize, usize)> = vec![(0, 0)];
    while r.remaining() > 0 {
        let dict_size = phrases.len() - 1;
        let index = r.read(ceil_log2(dict_size as u64 + 1))? as usize;
        if index > dict_size {
            return Err(Error::format(
                r.position() / 8,
                format!("phrase index {index} beyond dictionary of {dict_size}"),
            ));
        }
        let (start, len) = phrases[index];
        if has_tail && r.remaining() == 0 {
            if index == 0 {
                return Err(Error::format(r.position() / 8, "empty trailing phrase"));
            }
            out.extend_from_within(start..start + len);
            return Ok(out);
        }
        let symbol = r.read(sym_bits)? as u8;
        if symbol as usize >= alphabet.size() {
            return Err(Error::format(
                r.position() / 8,
                format!("symbol {symbol} outside alphabet"),
            ));
        }
        let new_start = out.len();
        out.extend_from_within(start..start + len);
        out.push(symbol);
        phrases.push((new_start, len + 1));
    }
    if has_tail {
        return Err(Error::format(bytes.len() as u64, "missing trailing phrase"));
    }
    Ok(out)
}
