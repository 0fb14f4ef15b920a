//! Seeded parameter sweeps.
//!
//! The grid is the product models × dims × k × delta × alpha × h0 ×
//! metrics, enumerated in that order with the last list varying fastest;
//! each grid point is a cell and gets `replicates` rows. Row `r` of cell
//! `c` draws its sample with seed `master ^ splitmix64(c · replicates + r)`.
//!
//! CSV columns, fixed:
//! `cell,model,n,d,k,delta,alpha,h0,seed,replicate,metric,value,wall_ms`.
//! `n` is the common side length, or `AxB..` when the sides differ; `k` is
//! the block side the metric actually used (empty when none applies).
//! `wall_ms` is 0 unless `--timing` is given, so reruns are byte-identical.
//!
//! Metrics:
//! - `estimate`: plug-in entropy-rate estimate, bits per site
//! - `true_rate`: closed-form entropy rate of the model (`NA` for Ising)
//! - `universal_member`, `universal_statistic`: test against `h0`
//! - `coverage`: mass of a uniform random library of `2^(k^d h0)` k-blocks
//! - `sampling_member`: typical-sampling test with the entropy-typical
//!   m-blocks of the model at `delta`
//! - `packing_bounds`: 1 if both packing bounds hold for that library
//! - `block_rate`, `lz78_rate`: bits per site of the block codec and of
//!   LZ78 on the Hilbert scan

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::Instant;

use clap::Args;
use rayon::prelude::*;

use mdts_core::typical::universal_block_side;
use mdts_core::{
    build_entropy_typical_set, encode, encode_lz78_hilbert, estimate_entropy_rate,
    exact_entropy_rate, find_packing_shift, generate, library_coverage, random_library,
    typical_sampling_membership, universal_typical_membership, BlockSet, BlockSide,
    EstimateOptions, KChoice, NdArray, SourceModel, TypicalityParams,
};

use crate::model::{format_dims, parse_dims, parse_f64_list, parse_model, split_list};
use crate::CliError;

pub const HEADER: [&str; 13] = [
    "cell",
    "model",
    "n",
    "d",
    "k",
    "delta",
    "alpha",
    "h0",
    "seed",
    "replicate",
    "metric",
    "value",
    "wall_ms",
];

pub const METRICS: [&str; 9] = [
    "estimate",
    "true_rate",
    "universal_member",
    "universal_statistic",
    "coverage",
    "sampling_member",
    "packing_bounds",
    "block_rate",
    "lz78_rate",
];

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    /// Source models separated by '|'.
    #[arg(long, default_value = "bernoulli:0.1")]
    pub models: String,
    /// Comma-separated shapes, e.g. 64x64,128x128.
    #[arg(long, default_value = "64x64")]
    pub dims: String,
    /// Comma-separated block sides; 'auto' follows the k schedule.
    #[arg(long, default_value = "auto")]
    pub k: String,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Cap scheduled k so that k-blocks stay well sampled.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub guard: bool,
    #[arg(long, default_value = "0.25")]
    pub delta: String,
    #[arg(long, default_value = "0.4")]
    pub alpha: String,
    #[arg(long, default_value = "0.6")]
    pub h0: String,
    /// Library block side for the sampling and packing metrics.
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    #[arg(long, default_value_t = 1)]
    pub replicates: u64,
    /// Comma-separated metric names.
    #[arg(long, default_value = "estimate")]
    pub metrics: String,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Record wall-clock milliseconds per row.
    #[arg(long)]
    pub timing: bool,
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn row_seed(master: u64, ordinal: u64) -> u64 {
    master ^ splitmix64(ordinal)
}

#[derive(Debug, Clone)]
struct Cell {
    model_text: String,
    model: SourceModel,
    dims: Vec<usize>,
    k: Option<usize>,
    delta: f64,
    alpha: f64,
    h0: f64,
    metric: &'static str,
}

struct Grid {
    cells: Vec<Cell>,
    replicates: u64,
    epsilon: f64,
    guard: bool,
    m: usize,
}

fn nonempty<T>(v: Vec<T>, what: &str) -> Result<Vec<T>, CliError> {
    if v.is_empty() {
        return Err(CliError::Usage(format!("empty {what} list")));
    }
    Ok(v)
}

fn build_grid(a: &ExperimentArgs) -> Result<Grid, CliError> {
    let models = nonempty(split_list(&a.models, '|'), "models")?
        .into_iter()
        .map(|t| parse_model(&t).map(|m| (t, m)))
        .collect::<Result<Vec<_>, _>>()?;
    let dims = nonempty(split_list(&a.dims, ','), "dims")?
        .iter()
        .map(|s| parse_dims(s))
        .collect::<Result<Vec<_>, _>>()?;
    let ks = nonempty(split_list(&a.k, ','), "k")?
        .iter()
        .map(|s| match s.as_str() {
            "auto" => Ok(None),
            s => s
                .parse()
                .ok()
                .filter(|&k: &usize| k > 0)
                .map(Some)
                .ok_or_else(|| CliError::Usage(format!("bad block side '{s}'"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let deltas = nonempty(parse_f64_list(&a.delta, "delta")?, "delta")?;
    let alphas = nonempty(parse_f64_list(&a.alpha, "alpha")?, "alpha")?;
    let h0s = nonempty(parse_f64_list(&a.h0, "h0")?, "h0")?;
    let metrics = nonempty(split_list(&a.metrics, ','), "metrics")?
        .iter()
        .map(|s| {
            METRICS
                .iter()
                .find(|&&m| m == s)
                .copied()
                .ok_or_else(|| CliError::Usage(format!("unknown metric '{s}'")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if a.replicates == 0 {
        return Err(CliError::Usage("replicates must be positive".into()));
    }
    if !(a.epsilon > 0.0) {
        return Err(CliError::Usage("epsilon must be positive".into()));
    }
    let mut cells = Vec::new();
    for (text, model) in &models {
        for dims in &dims {
            for &k in &ks {
                for &delta in &deltas {
                    for &alpha in &alphas {
                        for &h0 in &h0s {
                            for &metric in &metrics {
                                cells.push(Cell {
                                    model_text: text.clone(),
                                    model: model.clone(),
                                    dims: dims.clone(),
                                    k,
                                    delta,
                                    alpha,
                                    h0,
                                    metric,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(Grid {
        cells,
        replicates: a.replicates,
        epsilon: a.epsilon,
        guard: a.guard,
        m: a.m,
    })
}

fn choice(cell: &Cell, epsilon: f64) -> KChoice {
    cell.k.map_or(KChoice::Auto { epsilon }, KChoice::Explicit)
}

fn flag(b: bool) -> String {
    if b { "1" } else { "0" }.to_string()
}

/// Returns `(k used, value)`.
fn measure(
    grid: &Grid,
    cell: &Cell,
    library: &OnceLock<Result<BlockSet, String>>,
    seed: u64,
) -> Result<(Option<usize>, String), CliError> {
    if cell.metric == "true_rate" {
        let v = exact_entropy_rate(&cell.model).map_or("NA".to_string(), |h| format!("{h:.6}"));
        return Ok((None, v));
    }
    let x = generate(&cell.model, &cell.dims, seed)?;
    let k_choice = choice(cell, grid.epsilon);
    let typical_library = |x: &NdArray| -> Result<BlockSet, CliError> {
        library
            .get_or_init(|| {
                build_entropy_typical_set(&cell.model, x.d(), grid.m, cell.delta)
                    .map_err(|e| e.to_string())
            })
            .clone()
            .map_err(CliError::Data)
    };
    Ok(match cell.metric {
        "estimate" => {
            let e = estimate_entropy_rate(
                &x,
                &EstimateOptions {
                    k: k_choice,
                    well_sampled_guard: grid.guard && cell.k.is_none(),
                },
            )?;
            (Some(e.k_used), format!("{:.6}", e.estimate))
        }
        "universal_member" | "universal_statistic" => {
            let k = universal_block_side(&x, k_choice)?;
            let r = universal_typical_membership(&x, cell.h0, KChoice::Explicit(k))?;
            let v = if cell.metric == "universal_member" {
                flag(r.member)
            } else {
                format!("{:.6}", r.statistic)
            };
            (Some(k), v)
        }
        "coverage" => {
            let k = universal_block_side(&x, k_choice)?;
            let volume = k.pow(x.d() as u32) as f64;
            let universe = volume * x.alphabet().log2_size();
            let log_size = (volume * cell.h0).min(universe);
            if log_size > 62.0 {
                return Err(CliError::Data(format!(
                    "library of 2^{log_size:.1} blocks is too large"
                )));
            }
            let size = log_size.exp2().round() as usize;
            let lib = random_library(x.alphabet(), x.d(), k, size, splitmix64(seed))?;
            (Some(k), format!("{:.6}", library_coverage(&x, k, &lib)?))
        }
        "sampling_member" => {
            TypicalityParams {
                delta: cell.delta,
                alpha: cell.alpha,
                h0: cell.h0,
            }
            .validate()?;
            let lib = typical_library(&x)?;
            (
                Some(grid.m),
                flag(typical_sampling_membership(&x, &lib, cell.delta)?.member),
            )
        }
        "packing_bounds" => {
            let lib = typical_library(&x)?;
            let r = find_packing_shift(&x, &lib, grid.m)?;
            (Some(grid.m), flag(r.bound_a_holds && r.bound_b_holds))
        }
        "block_rate" => {
            let s = encode(&x, cell.k.map_or(BlockSide::Auto, BlockSide::Fixed))?;
            (Some(s.k), format!("{:.6}", s.rate_report().bits_per_site))
        }
        "lz78_rate" => {
            let s = encode_lz78_hilbert(&x)?;
            (None, format!("{:.6}", s.rate_report().bits_per_site))
        }
        other => unreachable!("metric {other} validated"),
    })
}

fn fmt_f(v: f64) -> String {
    format!("{v}")
}

fn n_column(dims: &[usize]) -> String {
    if dims.iter().all(|&n| n == dims[0]) {
        dims[0].to_string()
    } else {
        format_dims(dims)
    }
}

pub fn run(a: &ExperimentArgs) -> Result<(), CliError> {
    let grid = build_grid(a)?;
    let sink: Box<dyn Write> = match &a.out {
        Some(path) => Box::new(
            File::create(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?,
        ),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    let csv_err = |e: csv::Error| CliError::Data(e.to_string());
    w.write_record(HEADER).map_err(csv_err)?;
    w.flush()?;

    let libraries: Vec<OnceLock<Result<BlockSet, String>>> =
        grid.cells.iter().map(|_| OnceLock::new()).collect();
    let total = grid.cells.len() as u64 * grid.replicates;
    let chunk = (rayon::current_num_threads() as u64 * 4).max(1);
    let mut start = 0u64;
    while start < total {
        let end = (start + chunk).min(total);
        let rows: Vec<Result<Vec<String>, CliError>> = (start..end)
            .into_par_iter()
            .map(|ordinal| {
                let c = (ordinal / grid.replicates) as usize;
                let r = ordinal % grid.replicates;
                let cell = &grid.cells[c];
                let seed = row_seed(a.seed, ordinal);
                let t0 = Instant::now();
                let (k, value) = measure(&grid, cell, &libraries[c], seed)?;
                let wall_ms = if a.timing {
                    t0.elapsed().as_millis()
                } else {
                    0
                };
                Ok(vec![
                    c.to_string(),
                    cell.model_text.clone(),
                    n_column(&cell.dims),
                    cell.dims.len().to_string(),
                    k.map_or(String::new(), |k| k.to_string()),
                    fmt_f(cell.delta),
                    fmt_f(cell.alpha),
                    fmt_f(cell.h0),
                    seed.to_string(),
                    r.to_string(),
                    cell.metric.to_string(),
                    value,
                    wall_ms.to_string(),
                ])
            })
            .collect();
        for row in rows {
            w.write_record(row?).map_err(csv_err)?;
            w.flush()?;
        }
        start = end;
    }
    Ok(())
}
