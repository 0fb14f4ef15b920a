//! Slow, direct reference computations.
//!
//! Nothing here shares code with `mdts-core`: blocks are found by
//! scanning every lattice position and testing the grid condition,
//! entropies are summed naively, and closed forms are written out.

use std::collections::BTreeMap;

/// Block contents (row-major) to occurrence count.
pub type Counts = BTreeMap<Vec<u8>, u64>;

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for a in (0..dims.len().saturating_sub(1)).rev() {
        s[a] = s[a + 1] * dims[a + 1];
    }
    s
}

fn unravel(mut i: usize, dims: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; dims.len()];
    for a in (0..dims.len()).rev() {
        idx[a] = i % dims[a];
        i /= dims[a];
    }
    idx
}

/// The k-cube with corner `corner`, or `None` if it leaves the box.
pub fn cube_at(data: &[u8], dims: &[usize], corner: &[usize], k: usize) -> Option<Vec<u8>> {
    if corner.iter().zip(dims).any(|(&c, &n)| c + k > n) {
        return None;
    }
    let s = strides(dims);
    let d = dims.len();
    let mut out = Vec::with_capacity(k.pow(d as u32));
    for j in 0..k.pow(d as u32) {
        let local = unravel(j, &vec![k; d]);
        let off: usize = (0..d).map(|a| (corner[a] + local[a]) * s[a]).sum();
        out.push(data[off]);
    }
    Some(out)
}

/// Counts of the full k-cubes of the partition shifted by `shift`:
/// cube corners are the positions `r` with `r ≡ shift (mod k)` per axis.
pub fn shifted_counts(data: &[u8], dims: &[usize], k: usize, shift: &[usize]) -> Counts {
    let mut counts = Counts::new();
    for i in 0..data.len() {
        let r = unravel(i, dims);
        if r.iter().zip(shift).all(|(&ri, &pi)| ri % k == pi % k) {
            if let Some(b) = cube_at(data, dims, &r, k) {
                *counts.entry(b).or_insert(0) += 1;
            }
        }
    }
    counts
}

/// Counts of every k-cube lying inside the box.
pub fn overlapping_counts(data: &[u8], dims: &[usize], k: usize) -> Counts {
    let mut counts = Counts::new();
    for i in 0..data.len() {
        if let Some(b) = cube_at(data, dims, &unravel(i, dims), k) {
            *counts.entry(b).or_insert(0) += 1;
        }
    }
    counts
}

pub fn plugin_entropy(counts: &Counts) -> f64 {
    let total: u64 = counts.values().sum();
    counts
        .values()
        .map(|&c| {
            let p = c as f64 / total as f64;
            -p * p.log2()
        })
        .sum()
}

pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Per-site entropy of a k-cube when its lines along one axis are
/// independent stationary binary symmetric Markov chains with flip
/// probability `flip`: `(1 + (k-1) h) / k`.
pub fn symmetric_markov_block_rate(flip: f64, k: usize) -> f64 {
    (1.0 + (k as f64 - 1.0) * binary_entropy(flip)) / k as f64
}

/// `P(Binomial(n, p) = j)` via log-gamma-free products.
pub fn binomial_pmf(n: u64, j: u64, p: f64) -> f64 {
    let mut log_c = 0.0;
    for i in 0..j {
        log_c += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
    }
    (log_c + j as f64 * p.ln() + (n - j) as f64 * (1.0 - p).ln()).exp()
}

/// Exact `E[H(counts)]` in bits for a multinomial sample of size `n`.
/// Cells are given as `(probability, multiplicity)`; each cell count is
/// binomial, so the expectation is a sum of one-dimensional binomial sums.
pub fn expected_plugin_entropy(cells: &[(f64, f64)], n: u64) -> f64 {
    let nf = n as f64;
    let mut total = 0.0;
    for &(p, mult) in cells {
        if p <= 0.0 {
            continue;
        }
        if p >= 1.0 {
            return 0.0;
        }
        let step = (p / (1.0 - p)).ln();
        let mut log_pmf = nf * (1.0 - p).ln();
        let mut acc = 0.0;
        for c in 0..n {
            // log P(C = c + 1) from log P(C = c)
            log_pmf += ((nf - c as f64) / (c as f64 + 1.0)).ln() + step;
            if log_pmf > -745.0 {
                let q = (c + 1) as f64 / nf;
                acc += log_pmf.exp() * -q * q.log2();
            }
        }
        total += mult * acc;
    }
    total
}

/// `(probability, multiplicity)` cells of the length-`k` stationary
/// binary symmetric Markov chain, grouped by the number of flips.
pub fn symmetric_markov_chain_cells(flip: f64, k: usize) -> Vec<(f64, f64)> {
    (0..k as u64)
        .map(|f| {
            let p = 0.5 * flip.powi(f as i32) * (1.0 - flip).powi((k as u64 - 1 - f) as i32);
            (
                p,
                2.0 * binomial_pmf(k as u64 - 1, f, 0.5) * 2f64.powi(k as i32 - 1),
            )
        })
        .collect()
}

/// Cells of `volume` i.i.d. Bernoulli(`p`) sites, grouped by the number of ones.
pub fn bernoulli_cells(p: f64, volume: u64) -> Vec<(f64, f64)> {
    (0..=volume)
        .map(|j| {
            let prob = p.powi(j as i32) * (1.0 - p).powi((volume - j) as i32);
            (
                prob,
                binomial_pmf(volume, j, 0.5) * 2f64.powi(volume as i32),
            )
        })
        .collect()
}

/// Cells of `copies` independent blocks, each with the given cells.
pub fn product_cells(cells: &[(f64, f64)], copies: usize) -> Vec<(f64, f64)> {
    let mut out = vec![(1.0, 1.0)];
    for _ in 0..copies {
        out = out
            .iter()
            .flat_map(|&(p, m)| cells.iter().map(move |&(q, n)| (p * q, m * n)))
            .collect();
    }
    out
}
