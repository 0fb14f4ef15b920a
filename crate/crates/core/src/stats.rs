//! Empirical k-block distributions (non-overlapping, shifted, overlapping),
//! match counts against block libraries, plug-in entropies and the
//! block-entropy estimator of the entropy rate.
//!
//! Only full k-cubes are ever counted; clipped boundary fragments of a
//! partition never enter a distribution. Counts are exact integers and
//! probabilities are formed only when an entropy is evaluated.

use std::fmt::Write as _;

use indexmap::IndexMap;

use crate::blockset::BlockSet;
use crate::error::{Error, Result};
use crate::lattice::{advance, block_key_from_parts, Alphabet, NdArray, ShiftVector};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DistributionKind {
    NonOverlapping,
    Shifted(ShiftVector),
    Overlapping,
}

#[derive(Debug, Clone)]
pub struct EmpiricalDistribution {
    k: usize,
    d: usize,
    alphabet: Alphabet,
    kind: DistributionKind,
    /// raw block symbols → count, in first-occurrence order
    counts: IndexMap<Box<[u8]>, u64>,
    total: u64,
}

impl EmpiricalDistribution {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn kind(&self) -> &DistributionKind {
        &self.kind
    }

    pub fn total_blocks(&self) -> u64 {
        self.total
    }

    pub fn distinct_blocks(&self) -> usize {
        self.counts.len()
    }

    pub fn count_symbols(&self, symbols: &[u8]) -> u64 {
        self.counts.get(symbols).copied().unwrap_or(0)
    }

    pub fn count(&self, block: &NdArray) -> u64 {
        if block.d() != self.d || block.dims().iter().any(|&n| n != self.k) {
            return 0;
        }
        self.count_symbols(block.data())
    }

    pub fn probability(&self, block: &NdArray) -> f64 {
        self.count(block) as f64 / self.total as f64
    }

    /// Blocks with their counts in order of first occurrence.
    pub fn iter(&self) -> impl Iterator<Item = (&[u8], u64)> {
        self.counts.iter().map(|(b, &c)| (&**b, c))
    }

    /// Number of counted blocks whose content lies in `set`.
    pub fn count_in(&self, set: &BlockSet) -> u64 {
        if set.m() != self.k || set.d() != self.d {
            return 0;
        }
        if set.is_universe() {
            return self.total;
        }
        self.iter()
            .filter(|(b, _)| set.contains_symbols(b))
            .map(|(_, c)| c)
            .sum()
    }

    pub fn mass_of(&self, set: &BlockSet) -> f64 {
        self.count_in(set) as f64 / self.total as f64
    }

    /// `key_hex,count` lines sorted by key, with a header row.
    pub fn to_csv(&self) -> String {
        let dims = vec![self.k; self.d];
        let mut rows: Vec<(String, u64)> = self
            .iter()
            .map(|(b, c)| (hex::encode(block_key_from_parts(&dims, b)), c))
            .collect();
        rows.sort();
        let mut out = String::from("key_hex,count\n");
        for (k, c) in rows {
            writeln!(out, "{k},{c}").unwrap();
        }
        out
    }
}

fn check_block_side(x: &NdArray, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::domain("block side must be positive"));
    }
    if k > x.min_dim() {
        return Err(Error::domain(format!(
            "block side {k} exceeds smallest dimension {}",
            x.min_dim()
        )));
    }
    Ok(())
}

/// Lower corners of the full cubes of the `p`-shifted `k`-partition, per axis.
fn shifted_starts(x: &NdArray, k: usize, p: &[usize]) -> Vec<Vec<usize>> {
    x.dims()
        .iter()
        .zip(p)
        .map(|(&n, &pi)| {
            let count = n.saturating_sub(pi) / k;
            (0..count).map(|j| pi + j * k).collect()
        })
        .collect()
}

fn overlapping_starts(x: &NdArray, k: usize) -> Vec<Vec<usize>> {
    x.dims().iter().map(|&n| (0..=n - k).collect()).collect()
}

/// Calls `f` with the contents of every cube whose corner is in the
/// product of `starts`, in lexicographic corner order.
pub(crate) fn for_each_cube(
    x: &NdArray,
    k: usize,
    starts: &[Vec<usize>],
    mut f: impl FnMut(&[u8]),
) {
    let lens: Vec<usize> = starts.iter().map(Vec::len).collect();
    let total: usize = lens.iter().product();
    let mut idx = vec![0usize; starts.len()];
    let mut corner = vec![0usize; starts.len()];
    let mut buf = Vec::with_capacity(k.pow(x.d() as u32));
    for _ in 0..total {
        for a in 0..starts.len() {
            corner[a] = starts[a][idx[a]];
        }
        x.copy_cube(&corner, k, &mut buf);
        f(&buf);
        advance(&mut idx, &lens);
    }
}

fn tally(
    x: &NdArray,
    k: usize,
    starts: &[Vec<usize>],
    kind: DistributionKind,
) -> EmpiricalDistribution {
    let mut counts: IndexMap<Box<[u8]>, u64> = IndexMap::new();
    let mut total = 0u64;
    for_each_cube(x, k, starts, |b| {
        total += 1;
        match counts.get_mut(b) {
            Some(c) => *c += 1,
            None => {
                counts.insert(b.into(), 1);
            }
        }
    });
    EmpiricalDistribution {
        k,
        d: x.d(),
        alphabet: x.alphabet(),
        kind,
        counts,
        total,
    }
}

/// Number of full `m`-cubes of the `p`-shifted regular partition of `x`
/// whose contents lie in `set`.
pub fn z_count(x: &NdArray, p: &ShiftVector, m: usize, set: &BlockSet) -> Result<u64> {
    check_block_side(x, m)?;
    p.check_for_block(m, x.d())?;
    if set.m() != m || set.d() != x.d() {
        return Err(Error::domain("library block shape does not match m"));
    }
    let mut hits = 0u64;
    for_each_cube(x, m, &shifted_starts(x, m, p.components()), |b| {
        hits += set.contains_symbols(b) as u64;
    });
    Ok(hits)
}

/// Number of overlapping positions whose `m`-cube lies in `set`.
pub fn overlapping_match_count(x: &NdArray, m: usize, set: &BlockSet) -> Result<u64> {
    check_block_side(x, m)?;
    let mut hits = 0u64;
    for_each_cube(x, m, &overlapping_starts(x, m), |b| {
        hits += set.contains_symbols(b) as u64;
    });
    Ok(hits)
}

pub fn empirical_nonoverlapping(x: &NdArray, k: usize) -> Result<EmpiricalDistribution> {
    check_block_side(x, k)?;
    let starts = shifted_starts(x, k, &vec![0; x.d()]);
    Ok(tally(x, k, &starts, DistributionKind::NonOverlapping))
}

pub fn empirical_shifted(x: &NdArray, p: &ShiftVector, k: usize) -> Result<EmpiricalDistribution> {
    check_block_side(x, k)?;
    p.check_for_block(k, x.d())?;
    let starts = shifted_starts(x, k, p.components());
    if starts.iter().any(Vec::is_empty) {
        return Err(Error::domain(format!(
            "shift {p} leaves no full {k}-cube inside the array"
        )));
    }
    Ok(tally(x, k, &starts, DistributionKind::Shifted(p.clone())))
}

pub fn empirical_overlapping(x: &NdArray, k: usize) -> Result<EmpiricalDistribution> {
    check_block_side(x, k)?;
    Ok(tally(
        x,
        k,
        &overlapping_starts(x, k),
        DistributionKind::Overlapping,
    ))
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Shannon entropy in bits of a table of counts.
pub fn entropy_of_counts(counts: impl Iterator<Item = u64>, total: u64) -> f64 {
    let n = total as f64;
    let h = compensated_sum(counts.filter(|&c| c > 0).map(|c| {
        let p = c as f64 / n;
        -p * p.log2()
    }));
    h.max(0.0)
}

/// Plug-in Shannon entropy of an empirical distribution, in bits.
pub fn shannon_entropy(dist: &EmpiricalDistribution) -> f64 {
    entropy_of_counts(dist.iter().map(|(_, c)| c), dist.total)
}

/// Largest `k ≥ 1` with `k^d ≤ log2(n^d) / ((1+ε) log2|A|)`.
pub fn k_schedule(n: usize, d: usize, alphabet_size: usize, epsilon: f64) -> usize {
    let limit = d as f64 * (n as f64).log2() / ((1.0 + epsilon) * (alphabet_size as f64).log2());
    let mut k = 1usize;
    while ((k + 1) as f64).powi(d as i32) <= limit {
        k += 1;
    }
    k
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KChoice {
    Explicit(usize),
    /// `k` from [`k_schedule`] on the smallest dimension.
    Auto {
        epsilon: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateOptions {
    pub k: KChoice,
    /// Cap `k` so that `|A|^(k^d) ≤ total_blocks / 16`.
    pub well_sampled_guard: bool,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions {
            k: KChoice::Auto { epsilon: 0.1 },
            well_sampled_guard: true,
        }
    }
}

/// What determined the block side that was used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KBound {
    Explicit,
    Schedule,
    WellSampledGuard,
}

impl KBound {
    pub fn as_str(self) -> &'static str {
        match self {
            KBound::Explicit => "explicit",
            KBound::Schedule => "schedule",
            KBound::WellSampledGuard => "well_sampled_guard",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    /// Bits per site.
    pub estimate: f64,
    pub k_used: usize,
    pub total_blocks: u64,
    pub distinct_blocks: usize,
    pub bound: KBound,
}

fn full_cube_count(x: &NdArray, k: usize) -> u64 {
    x.dims().iter().map(|&n| (n / k) as u64).product()
}

/// `H(μ̃^{k,n}) / k^d` for the non-overlapping distribution.
pub fn estimate_entropy_rate(x: &NdArray, options: &EstimateOptions) -> Result<Estimate> {
    let d = x.d();
    let (mut k, mut bound) = match options.k {
        KChoice::Explicit(k) => {
            check_block_side(x, k)?;
            (k, KBound::Explicit)
        }
        KChoice::Auto { epsilon } => {
            if !(epsilon > 0.0) {
                return Err(Error::domain("epsilon must be positive"));
            }
            let n = x.min_dim().max(2);
            let k = k_schedule(n, d, x.alphabet().size(), epsilon).min(x.min_dim());
            (k, KBound::Schedule)
        }
    };
    if options.well_sampled_guard {
        let log_a = x.alphabet().log2_size();
        while k > 1 {
            let support_bits = (k.pow(d as u32)) as f64 * log_a;
            if support_bits <= (full_cube_count(x, k) as f64 / 16.0).log2() {
                break;
            }
            k -= 1;
            bound = KBound::WellSampledGuard;
        }
    }
    let dist = empirical_nonoverlapping(x, k)?;
    Ok(Estimate {
        estimate: shannon_entropy(&dist) / k.pow(d as u32) as f64,
        k_used: k,
        total_blocks: dist.total_blocks(),
        distinct_blocks: dist.distinct_blocks(),
        bound,
    })
}
