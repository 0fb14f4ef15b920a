//! Constructive packing: choose a shift `p ∈ Λ_m` whose regular m-block
//! partition of a k-cube sample matches a library as often as possible.
//!
//! Every overlapping position `r` belongs to exactly one residue class
//! `r mod m`, so the per-shift match counts λ(p) sum to the overlapping
//! match count and the best shift is at least their average.

use std::fmt::Write as _;

use crate::blockset::BlockSet;
use crate::error::{Error, Result};
use crate::lattice::{NdArray, ShiftVector};
use crate::stats::{overlapping_match_count, z_count};

#[derive(Debug, Clone, PartialEq)]
pub struct PackingReport {
    pub best_shift: ShiftVector,
    /// λ(p): full m-cubes of the chosen partition whose contents lie in C.
    pub lambda: u64,
    /// λ(p) over the number of full m-cubes of that partition.
    pub shifted_fraction: f64,
    /// Fraction of overlapping m-positions whose contents lie in C.
    pub overlap_fraction: f64,
    pub bound_a_holds: bool,
    pub bound_b_holds: bool,
    pub delta_used: f64,
    /// λ(p) for every shift, in lexicographic shift order.
    pub lambdas: Vec<u64>,
}

impl PackingReport {
    /// Flat `key=value` listing.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "best_shift={}", self.best_shift).unwrap();
        writeln!(s, "lambda={}", self.lambda).unwrap();
        writeln!(s, "shifted_fraction={:.6}", self.shifted_fraction).unwrap();
        writeln!(s, "overlap_fraction={:.6}", self.overlap_fraction).unwrap();
        writeln!(s, "delta_used={:.6}", self.delta_used).unwrap();
        writeln!(s, "bound_a_holds={}", self.bound_a_holds).unwrap();
        writeln!(s, "bound_b_holds={}", self.bound_b_holds).unwrap();
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub applicable: bool,
    pub bound_a_holds: bool,
    pub bound_b_holds: bool,
}

fn check_instance(x: &NdArray, set: &BlockSet, m: usize) -> Result<usize> {
    let k = x
        .cube_side()
        .ok_or_else(|| Error::domain("packing requires a cubic sample"))?;
    if m == 0 || m > k {
        return Err(Error::domain(format!(
            "block side {m} must lie in [1, {k}]"
        )));
    }
    if set.m() != m || set.d() != x.d() {
        return Err(Error::domain("library block shape does not match m"));
    }
    Ok(k)
}

struct Search {
    best: ShiftVector,
    lambda: u64,
    full_cubes: u64,
    overlap_fraction: f64,
    lambdas: Vec<u64>,
}

fn search(x: &NdArray, set: &BlockSet, m: usize, k: usize) -> Result<Search> {
    let d = x.d();
    let mut best: Option<(ShiftVector, u64)> = None;
    let mut lambdas = Vec::with_capacity(m.pow(d as u32));
    for p in ShiftVector::all(m, d) {
        let l = z_count(x, &p, m, set)?;
        lambdas.push(l);
        // strict improvement keeps the lexicographically smallest argmax
        if best.as_ref().is_none_or(|(_, b)| l > *b) {
            best = Some((p, l));
        }
    }
    let (best, lambda) = best.expect("Λ_m is nonempty");
    let full_cubes: u64 = best
        .components()
        .iter()
        .map(|&pi| ((k - pi) / m) as u64)
        .product();
    let positions = ((k - m + 1) as u64).pow(d as u32);
    let overlap_fraction = overlapping_match_count(x, m, set)? as f64 / positions as f64;
    Ok(Search {
        best,
        lambda,
        full_cubes,
        overlap_fraction,
        lambdas,
    })
}

fn bounds(s: &Search, k: usize, m: usize, d: usize, delta: f64) -> (bool, bool) {
    let shifted = s.lambda as f64 / s.full_cubes as f64;
    let a = shifted >= 1.0 - 2.0 * delta;
    let cells = ((k / m + 2) as f64).powi(d as i32);
    let b = s.lambda as f64 >= (1.0 - 4.0 * delta) * cells;
    (a, b)
}

/// Finds the shift maximizing λ(p) (ties → lexicographically smallest)
/// and evaluates both packing bounds at the smallest δ for which the
/// hypotheses hold, `δ = max(1 - overlap_fraction, d·m/k)`.
pub fn find_packing_shift(x: &NdArray, set: &BlockSet, m: usize) -> Result<PackingReport> {
    let k = check_instance(x, set, m)?;
    let d = x.d();
    let s = search(x, set, m, k)?;
    let delta = (1.0 - s.overlap_fraction).max((d * m) as f64 / k as f64);
    let (a, b) = bounds(&s, k, m, d, delta);
    Ok(PackingReport {
        shifted_fraction: s.lambda as f64 / s.full_cubes as f64,
        best_shift: s.best,
        lambda: s.lambda,
        overlap_fraction: s.overlap_fraction,
        bound_a_holds: a,
        bound_b_holds: b,
        delta_used: delta,
        lambdas: s.lambdas,
    })
}

/// Checks the packing conclusions for a given δ. When the hypotheses
/// (`k ≥ d·m/δ` and overlapping coverage ≥ 1−δ) hold, both bounds must
/// come out true.
pub fn verify_packing_bounds(
    x: &NdArray,
    set: &BlockSet,
    m: usize,
    delta: f64,
) -> Result<BoundCheck> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::domain(format!("delta {delta} outside (0, 1]")));
    }
    let k = check_instance(x, set, m)?;
    let d = x.d();
    let s = search(x, set, m, k)?;
    let applicable = k as f64 >= (d * m) as f64 / delta && s.overlap_fraction >= 1.0 - delta;
    let (a, b) = bounds(&s, k, m, d, delta);
    Ok(BoundCheck {
        applicable,
        bound_a_holds: a,
        bound_b_holds: b,
    })
}
