//! Seeded synthetic ergodic sources with known entropy rates.
//!
//! Randomness is drawn from ChaCha8 keyed by the master seed; each
//! independent line of the output uses its own ChaCha stream id (the
//! line's ordinal), so generation is reproducible regardless of how the
//! lines are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{advance, Alphabet, NdArray};

const SUM_TOL: f64 = 1e-12;
pub const DEFAULT_ISING_SWEEPS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub enum SourceModel {
    /// Every site drawn independently from `probs`.
    Iid { probs: Vec<f64> },
    /// Independent Markov chains along `axis`, one per line.
    MarkovRows {
        transition: Vec<Vec<f64>>,
        initial: Vec<f64>,
        axis: usize,
    },
    /// Binary ±1 spins on a 2D torus after `sweeps` Gibbs sweeps.
    Ising2D { beta: f64, sweeps: usize },
    /// A tile repeated from the origin and truncated at the far edges.
    Periodic { tile: NdArray },
}

fn check_distribution(p: &[f64], what: &str) -> Result<()> {
    if p.iter().any(|&v| !(0.0..=1.0).contains(&v) || v.is_nan()) {
        return Err(Error::domain(format!("{what} has entries outside [0,1]")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > SUM_TOL {
        return Err(Error::domain(format!("{what} sums to {sum}, not 1")));
    }
    Ok(())
}

impl SourceModel {
    pub fn iid(probs: Vec<f64>) -> Result<Self> {
        let m = SourceModel::Iid { probs };
        m.validate()?;
        Ok(m)
    }

    pub fn bernoulli(p_one: f64) -> Result<Self> {
        Self::iid(vec![1.0 - p_one, p_one])
    }

    pub fn uniform(size: usize) -> Result<Self> {
        Self::iid(vec![1.0 / size as f64; size])
    }

    /// Markov lines started from the stationary distribution of `transition`.
    pub fn markov_rows(transition: Vec<Vec<f64>>, axis: usize) -> Result<Self> {
        for (i, row) in transition.iter().enumerate() {
            check_distribution(row, &format!("transition row {i}"))?;
        }
        let initial = stationary_distribution(&transition)?;
        Self::markov_rows_with_initial(transition, initial, axis)
    }

    pub fn markov_rows_with_initial(
        transition: Vec<Vec<f64>>,
        initial: Vec<f64>,
        axis: usize,
    ) -> Result<Self> {
        let m = SourceModel::MarkovRows {
            transition,
            initial,
            axis,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn ising(beta: f64, sweeps: usize) -> Result<Self> {
        let m = SourceModel::Ising2D { beta, sweeps };
        m.validate()?;
        Ok(m)
    }

    pub fn periodic(tile: NdArray) -> Self {
        SourceModel::Periodic { tile }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SourceModel::Iid { probs } => {
                Alphabet::new(probs.len())?;
                check_distribution(probs, "symbol distribution")
            }
            SourceModel::MarkovRows {
                transition,
                initial,
                axis,
            } => {
                let s = transition.len();
                Alphabet::new(s)?;
                if transition.iter().any(|r| r.len() != s) || initial.len() != s {
                    return Err(Error::domain("transition matrix must be square"));
                }
                for (i, row) in transition.iter().enumerate() {
                    check_distribution(row, &format!("transition row {i}"))?;
                }
                check_distribution(initial, "initial distribution")?;
                if *axis >= crate::lattice::MAX_DIM {
                    return Err(Error::domain(format!("axis {axis} out of range")));
                }
                Ok(())
            }
            SourceModel::Ising2D { beta, .. } => {
                if !beta.is_finite() {
                    return Err(Error::domain("coupling must be finite"));
                }
                Ok(())
            }
            SourceModel::Periodic { .. } => Ok(()),
        }
    }

    pub fn alphabet(&self) -> Alphabet {
        match self {
            SourceModel::Iid { probs } => Alphabet::new(probs.len()).expect("validated"),
            SourceModel::MarkovRows { transition, .. } => {
                Alphabet::new(transition.len()).expect("validated")
            }
            SourceModel::Ising2D { .. } => Alphabet::binary(),
            SourceModel::Periodic { tile } => tile.alphabet(),
        }
    }

    /// Short human-readable tag used in reports.
    pub fn name(&self) -> &'static str {
        match self {
            SourceModel::Iid { .. } => "iid",
            SourceModel::MarkovRows { .. } => "markov",
            SourceModel::Ising2D { .. } => "ising",
            SourceModel::Periodic { .. } => "periodic",
        }
    }

    fn check_dims(&self, dims: &[usize]) -> Result<()> {
        crate::lattice::LatticeBox::at_origin(dims)?;
        match self {
            SourceModel::MarkovRows { axis, .. } if *axis >= dims.len() => {
                Err(Error::domain(format!(
                    "correlated axis {axis} not present in {}-d output",
                    dims.len()
                )))
            }
            SourceModel::Ising2D { .. } if dims.len() != 2 => {
                Err(Error::domain("the Ising source is two-dimensional"))
            }
            SourceModel::Periodic { tile } if tile.d() != dims.len() => Err(Error::domain(
                format!("tile is {}-d, output is {}-d", tile.d(), dims.len()),
            )),
            _ => Ok(()),
        }
    }
}

/// Solves `π P = π`, `Σ π = 1` by Gaussian elimination with partial pivoting.
pub fn stationary_distribution(transition: &[Vec<f64>]) -> Result<Vec<f64>> {
    let s = transition.len();
    // rows 0..s-1 of (Pᵀ - I), last row replaced by the normalization
    let mut a = vec![vec![0.0; s + 1]; s];
    for i in 0..s {
        for j in 0..s {
            a[i][j] = transition[j][i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..s {
        a[s - 1][j] = 1.0;
    }
    a[s - 1][s] = 1.0;
    for col in 0..s {
        let piv = (col..s)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        if a[piv][col].abs() < 1e-14 {
            return Err(Error::domain(
                "stationary distribution is not unique; supply an initial distribution",
            ));
        }
        a.swap(col, piv);
        for row in 0..s {
            if row != col {
                let f = a[row][col] / a[col][col];
                if f != 0.0 {
                    for c in col..=s {
                        a[row][c] -= f * a[col][c];
                    }
                }
            }
        }
    }
    let mut pi: Vec<f64> = (0..s).map(|i| (a[i][s] / a[i][i]).max(0.0)).collect();
    let sum: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|v| *v /= sum);
    Ok(pi)
}

fn cumulative(p: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    p.iter()
        .map(|&v| {
            acc += v;
            acc
        })
        .collect()
}

fn sample(cdf: &[f64], u: f64) -> u8 {
    // the last symbol absorbs rounding in the cumulative sums
    cdf[..cdf.len() - 1].partition_point(|&c| c <= u) as u8
}

fn line_rng(seed: u64, line: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(line);
    rng
}

/// Draws a realization of `model` on the box `[0, dims)`.
pub fn generate(model: &SourceModel, dims: &[usize], seed: u64) -> Result<NdArray> {
    model.validate()?;
    model.check_dims(dims)?;
    let alphabet = model.alphabet();
    let volume: usize = dims.iter().product();
    let d = dims.len();
    let data = match model {
        SourceModel::Iid { probs } => {
            let cdf = cumulative(probs);
            let run = dims[d - 1];
            let mut data = vec![0u8; volume];
            data.par_chunks_mut(run)
                .enumerate()
                .for_each(|(line, chunk)| {
                    let mut rng = line_rng(seed, line as u64);
                    for v in chunk {
                        *v = sample(&cdf, rng.gen::<f64>());
                    }
                });
            data
        }
        SourceModel::MarkovRows {
            transition,
            initial,
            axis,
        } => {
            let init = cumulative(initial);
            let rows: Vec<Vec<f64>> = transition.iter().map(|r| cumulative(r)).collect();
            let len = dims[*axis];
            let n_lines = volume / len;
            let lines: Vec<Vec<u8>> = (0..n_lines)
                .into_par_iter()
                .map(|line| {
                    let mut rng = line_rng(seed, line as u64);
                    let mut out = Vec::with_capacity(len);
                    let mut state = sample(&init, rng.gen::<f64>());
                    out.push(state);
                    for _ in 1..len {
                        state = sample(&rows[state as usize], rng.gen::<f64>());
                        out.push(state);
                    }
                    out
                })
                .collect();
            // line ordinal enumerates the other axes in row-major order
            let other: Vec<usize> = (0..d).filter(|&a| a != *axis).collect();
            let other_dims: Vec<usize> = other.iter().map(|&a| dims[a]).collect();
            let stride: usize = dims[axis + 1..].iter().product();
            let mut data = vec![0u8; volume];
            let mut idx = vec![0usize; other.len()];
            for line in &lines {
                let mut base = 0;
                let mut o = 0;
                for a in 0..d {
                    let i = if a == *axis { 0 } else { idx[o] };
                    if a != *axis {
                        o += 1;
                    }
                    base = base * dims[a] + i;
                }
                for (t, &s) in line.iter().enumerate() {
                    data[base + t * stride] = s;
                }
                if !other.is_empty() {
                    advance(&mut idx, &other_dims);
                }
            }
            data
        }
        SourceModel::Ising2D { beta, sweeps } => {
            ising_sweeps(dims[0], dims[1], *beta, *sweeps, seed)
        }
        SourceModel::Periodic { tile } => {
            let mut data = Vec::with_capacity(volume);
            let mut idx = vec![0usize; d];
            let mut t = vec![0usize; d];
            for _ in 0..volume {
                for a in 0..d {
                    t[a] = idx[a] % tile.dims()[a];
                }
                data.push(tile.get(&t));
                advance(&mut idx, dims);
            }
            data
        }
    };
    NdArray::new(alphabet, dims.to_vec(), data)
}

fn ising_sweeps(rows: usize, cols: usize, beta: f64, sweeps: usize, seed: u64) -> Vec<u8> {
    let mut rng = line_rng(seed, 0);
    let mut spins: Vec<u8> = (0..rows * cols).map(|_| rng.gen::<bool>() as u8).collect();
    // P(up | neighbor spin sum s), s ∈ {-4, -2, 0, 2, 4}
    let p_up: Vec<f64> = (-4..=4)
        .map(|s| 1.0 / (1.0 + (-2.0 * beta * s as f64).exp()))
        .collect();
    let spin = |v: u8| if v == 1 { 1i32 } else { -1 };
    for _ in 0..sweeps {
        for i in 0..rows {
            let up = (i + rows - 1) % rows;
            let down = (i + 1) % rows;
            for j in 0..cols {
                let left = (j + cols - 1) % cols;
                let right = (j + 1) % cols;
                let s = spin(spins[up * cols + j])
                    + spin(spins[down * cols + j])
                    + spin(spins[i * cols + left])
                    + spin(spins[i * cols + right]);
                let u: f64 = rng.gen();
                spins[i * cols + j] = (u < p_up[(s + 4) as usize]) as u8;
            }
        }
    }
    spins
}

fn entropy_bits(p: &[f64]) -> f64 {
    p.iter().filter(|&&v| v > 0.0).map(|&v| -v * v.log2()).sum()
}

/// Entropy rate in bits per site, when it has a closed form.
pub fn exact_entropy_rate(model: &SourceModel) -> Option<f64> {
    match model {
        SourceModel::Iid { probs } => Some(entropy_bits(probs)),
        SourceModel::MarkovRows {
            transition,
            initial,
            ..
        } => {
            let pi = if is_stationary(transition, initial) {
                initial.clone()
            } else {
                stationary_distribution(transition).ok()?
            };
            Some(
                pi.iter()
                    .zip(transition)
                    .map(|(&w, row)| w * entropy_bits(row))
                    .sum(),
            )
        }
        SourceModel::Periodic { .. } => Some(0.0),
        SourceModel::Ising2D { .. } => None,
    }
}

fn is_stationary(transition: &[Vec<f64>], pi: &[f64]) -> bool {
    (0..pi.len()).all(|j| {
        let v: f64 = (0..pi.len()).map(|i| pi[i] * transition[i][j]).sum();
        (v - pi[j]).abs() <= 1e-12
    })
}

/// `log2 μ(block)` for the finite-dimensional marginal at any position
/// (for Periodic: averaged over the uniform phase of the tiling).
/// Returns `-inf` for impossible blocks.
pub fn block_log2_probability(model: &SourceModel, block: &NdArray) -> Result<f64> {
    let size = model.alphabet().size();
    if block.data().iter().any(|&s| s as usize >= size) {
        return Err(Error::domain(
            "block uses symbols outside the model alphabet",
        ));
    }
    match model {
        SourceModel::Iid { probs } => {
            let logs: Vec<f64> = probs.iter().map(|p| p.log2()).collect();
            Ok(block.data().iter().map(|&s| logs[s as usize]).sum())
        }
        SourceModel::MarkovRows {
            transition,
            initial,
            axis,
        } => {
            let d = block.d();
            let dims = block.dims();
            if *axis >= d {
                return Err(Error::domain("block lacks the correlated axis"));
            }
            let stride: usize = dims[axis + 1..].iter().product();
            let len = dims[*axis];
            let mut total = 0.0;
            for (off, &s) in block.data().iter().enumerate() {
                let pos = (off / stride) % len;
                total += if pos == 0 {
                    initial[s as usize].log2()
                } else {
                    let prev = block.data()[off - stride];
                    transition[prev as usize][s as usize].log2()
                };
            }
            Ok(total)
        }
        SourceModel::Periodic { tile } => {
            if tile.d() != block.d() {
                return Err(Error::domain("block and tile differ in dimension"));
            }
            let d = tile.d();
            let tdims = tile.dims();
            let mut hits = 0usize;
            let mut phase = vec![0usize; d];
            let mut cell = vec![0usize; d];
            let mut t = vec![0usize; d];
            for _ in 0..tile.volume() {
                cell.iter_mut().for_each(|c| *c = 0);
                let matches = block.data().iter().all(|&s| {
                    for a in 0..d {
                        t[a] = (phase[a] + cell[a]) % tdims[a];
                    }
                    let ok = tile.get(&t) == s;
                    advance(&mut cell, block.dims());
                    ok
                });
                hits += matches as usize;
                advance(&mut phase, tdims);
            }
            Ok((hits as f64 / tile.volume() as f64).log2())
        }
        SourceModel::Ising2D { .. } => Err(Error::UnsupportedModel(
            "Ising marginals have no closed form".into(),
        )),
    }
}
