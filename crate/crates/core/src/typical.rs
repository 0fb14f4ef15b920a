//! Typicality predicates: entropy-typical m-blocks of a known source,
//! typical-sampling k-blocks (mostly tiled by a library under some
//! shifted m-partition), and the universal empirical-entropy test on
//! n-cubes. The universal sets are never materialized; their size is
//! available only through [`typical_set_log_cardinality_bound`].

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::blockset::{enumerate_block, BlockSet};
use crate::error::{Error, Result};
use crate::lattice::{Alphabet, NdArray, ShiftVector};
use crate::sources::{block_log2_probability, exact_entropy_rate, SourceModel};
use crate::stats::{empirical_nonoverlapping, k_schedule, shannon_entropy, z_count, KChoice};

/// Largest Σ^m that [`build_entropy_typical_set`] will enumerate.
pub const MAX_ENUMERATION: u64 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypicalityParams {
    pub delta: f64,
    pub alpha: f64,
    pub h0: f64,
}

impl TypicalityParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return Err(Error::domain(format!(
                "delta {} outside (0, 1/2)",
                self.delta
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return Err(Error::domain(format!(
                "alpha {} outside (0, 1/2)",
                self.alpha
            )));
        }
        if !(self.h0 >= 0.0) {
            return Err(Error::domain("h0 must be non-negative"));
        }
        Ok(())
    }

    /// `δ < α / (log2|A| + 1)`, required when δ parametrizes T_k(δ, m).
    pub fn satisfies_sampling_assumption(&self, alphabet: Alphabet) -> bool {
        self.delta < self.alpha / (alphabet.log2_size() + 1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MembershipResult {
    pub member: bool,
    /// Only set by [`typical_sampling_membership`].
    pub witness_shift: Option<ShiftVector>,
    pub statistic: f64,
}

fn model_rate(model: &SourceModel) -> Result<f64> {
    exact_entropy_rate(model)
        .ok_or_else(|| Error::UnsupportedModel(format!("{} has no closed-form rate", model.name())))
}

fn cube_side(x: &NdArray, what: &str) -> Result<usize> {
    x.cube_side()
        .ok_or_else(|| Error::domain(format!("{what} must be a cube")))
}

/// `statistic = -log2 μ(a) / m^d`; member iff `|statistic - h(μ)| ≤ δ`.
pub fn entropy_typical_membership(
    a: &NdArray,
    model: &SourceModel,
    delta: f64,
) -> Result<MembershipResult> {
    cube_side(a, "block")?;
    let h = model_rate(model)?;
    let statistic = -block_log2_probability(model, a)? / a.volume() as f64;
    Ok(MembershipResult {
        member: (statistic - h).abs() <= delta,
        witness_shift: None,
        statistic,
    })
}

/// Member iff some shift `p ∈ Λ_m` has at least `(1-δ)(k/m)^d` full
/// m-cubes with contents in `library`. The witness is the smallest such
/// shift; the statistic is the best count over `(k/m)^d`.
pub fn typical_sampling_membership(
    x: &NdArray,
    library: &BlockSet,
    delta: f64,
) -> Result<MembershipResult> {
    let k = cube_side(x, "sample")?;
    let m = library.m();
    if m == 0 || m > k {
        return Err(Error::domain(format!(
            "library side {m} must lie in [1, {k}]"
        )));
    }
    let d = x.d();
    let scale = (k as f64 / m as f64).powi(d as i32);
    let threshold = (1.0 - delta) * scale;
    let mut best = 0u64;
    let mut witness = None;
    for p in ShiftVector::all(m, d) {
        let c = z_count(x, &p, m, library)?;
        if witness.is_none() && c as f64 >= threshold {
            witness = Some(p);
        }
        best = best.max(c);
    }
    Ok(MembershipResult {
        member: witness.is_some(),
        witness_shift: witness,
        statistic: best as f64 / scale,
    })
}

/// Block side used by the universal test.
pub fn universal_block_side(x: &NdArray, schedule: KChoice) -> Result<usize> {
    match schedule {
        KChoice::Explicit(k) => Ok(k),
        KChoice::Auto { epsilon } => {
            if !(epsilon > 0.0) {
                return Err(Error::domain("epsilon must be positive"));
            }
            let n = x.min_dim().max(2);
            Ok(k_schedule(n, x.d(), x.alphabet().size(), epsilon).min(x.min_dim()))
        }
    }
}

/// Member iff `H(μ̃^{k,n}) ≤ k^d h0`; the statistic is `H / k^d`.
pub fn universal_typical_membership(
    x: &NdArray,
    h0: f64,
    schedule: KChoice,
) -> Result<MembershipResult> {
    if !(h0 >= 0.0) {
        return Err(Error::domain("h0 must be non-negative"));
    }
    let k = universal_block_side(x, schedule)?;
    let h = shannon_entropy(&empirical_nonoverlapping(x, k)?);
    let sites = k.pow(x.d() as u32) as f64;
    // absolute slack only absorbs rounding in the entropy sum
    Ok(MembershipResult {
        member: h <= sites * h0 + 1e-9,
        witness_shift: None,
        statistic: h / sites,
    })
}

/// Upper bound in bits on `log2 |𝒯_n(h0)|`:
/// `n^d h0 + (n^d - (n-k)^d) log2|A| + |A|^(k^d) d log2(n/k)`.
pub fn typical_set_log_cardinality_bound(
    n: usize,
    k: usize,
    h0: f64,
    alphabet_size: usize,
    d: usize,
) -> Result<f64> {
    if k == 0 || k > n {
        return Err(Error::domain(format!(
            "block side {k} must lie in [1, {n}]"
        )));
    }
    let di = d as i32;
    let (nf, kf) = (n as f64, k as f64);
    let a = alphabet_size as f64;
    let boundary = nf.powi(di) - (nf - kf).powi(di);
    let types = a.powf(kf.powi(di)) * d as f64 * (nf / kf).log2();
    Ok(nf.powi(di) * h0 + boundary * a.log2() + types)
}

/// `μ̃^{k,n}_x(library)`.
pub fn library_coverage(x: &NdArray, k: usize, library: &BlockSet) -> Result<f64> {
    if library.m() != k || library.d() != x.d() {
        return Err(Error::domain("library block shape does not match k"));
    }
    Ok(empirical_nonoverlapping(x, k)?.mass_of(library))
}

/// All m-cubes of the model's alphabet that are entropy-typical.
pub fn build_entropy_typical_set(
    model: &SourceModel,
    d: usize,
    m: usize,
    delta: f64,
) -> Result<BlockSet> {
    let h = model_rate(model)?;
    let alphabet = model.alphabet();
    let volume = m.pow(d as u32);
    let size = (alphabet.size() as u64)
        .checked_pow(volume as u32)
        .filter(|&s| s <= MAX_ENUMERATION)
        .ok_or_else(|| {
            Error::Resource(format!(
                "|A|^(m^d) = {}^{volume} exceeds the enumeration limit 2^24",
                alphabet.size()
            ))
        })?;
    let dims = vec![m; d];
    let members: Vec<Vec<u8>> = (0..size)
        .into_par_iter()
        .map(|i| -> Result<Option<Vec<u8>>> {
            let block = NdArray::new(
                alphabet,
                dims.clone(),
                enumerate_block(i, alphabet.size(), volume),
            )?;
            let stat = -block_log2_probability(model, &block)? / volume as f64;
            Ok(((stat - h).abs() <= delta).then(|| block.into_data()))
        })
        .filter_map(|r| r.transpose())
        .collect::<Result<_>>()?;
    let mut set = BlockSet::empty(alphabet, d, m);
    for b in members {
        set.insert_symbols(b);
    }
    Ok(set)
}

/// A library of `size` distinct blocks drawn uniformly from Σ^k.
pub fn random_library(
    alphabet: Alphabet,
    d: usize,
    k: usize,
    size: usize,
    seed: u64,
) -> Result<BlockSet> {
    let volume = k.pow(d as u32);
    let universe = (alphabet.size() as u128).checked_pow(volume as u32);
    if universe.is_some_and(|u| (size as u128) > u) {
        return Err(Error::domain("library larger than Σ^k"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set = BlockSet::empty(alphabet, d, k);
    match universe {
        Some(u) if u <= usize::MAX as u128 => {
            for i in index::sample(&mut rng, u as usize, size) {
                set.insert_symbols(enumerate_block(i as u64, alphabet.size(), volume));
            }
        }
        _ => {
            // Σ^k is huge: collisions are negligible, reject the rare repeat
            while set.len() < Some(size as u128) {
                let b: Vec<u8> = (0..volume)
                    .map(|_| rng.gen_range(0..alphabet.size()) as u8)
                    .collect();
                set.insert_symbols(b);
            }
        }
    }
    Ok(set)
}
