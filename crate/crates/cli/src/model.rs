//! Text forms of source models, dimensions and lists.
//!
//! ```text
//! iid:0.9,0.1            bernoulli:0.1          uniform:4
//! markov:0.9,0.1/0.1,0.9[:axis]
//! ising:0.3[:sweeps]
//! periodic:2x2:0,1,1,0
//! ```

use mdts_core::sources::DEFAULT_ISING_SWEEPS;
use mdts_core::{Alphabet, NdArray, SourceModel};

use crate::CliError;

fn num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T, CliError> {
    s.trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("bad {what} '{s}'")))
}

fn floats(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    s.split(',').map(|v| num(v, what)).collect()
}

pub fn parse_dims(s: &str) -> Result<Vec<usize>, CliError> {
    let dims: Vec<usize> = s
        .split('x')
        .map(|v| num(v, "dimension"))
        .collect::<Result<_, _>>()?;
    if dims.is_empty() || dims.len() > mdts_core::MAX_DIM || dims.contains(&0) {
        return Err(CliError::Usage(format!("bad dimensions '{s}'")));
    }
    Ok(dims)
}

pub fn format_dims(dims: &[usize]) -> String {
    dims.iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join("x")
}

pub fn parse_model(spec: &str) -> Result<SourceModel, CliError> {
    let spec = spec.trim();
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let parts: Vec<&str> = rest.split(':').collect();
    let model = match (kind, parts.as_slice()) {
        ("iid", [p]) => SourceModel::iid(floats(p, "probability")?),
        ("bernoulli", [p]) => SourceModel::bernoulli(num(p, "probability")?),
        ("uniform", [a]) => SourceModel::uniform(num(a, "alphabet size")?),
        ("markov", [rows, axis @ ..]) if axis.len() <= 1 => {
            let transition = rows
                .split('/')
                .map(|r| floats(r, "transition probability"))
                .collect::<Result<Vec<_>, _>>()?;
            let axis = match axis {
                [a] => num(a, "axis")?,
                _ => 0,
            };
            SourceModel::markov_rows(transition, axis)
        }
        ("ising", [beta, sweeps @ ..]) if sweeps.len() <= 1 => {
            let sweeps = match sweeps {
                [s] => num(s, "sweep count")?,
                _ => DEFAULT_ISING_SWEEPS,
            };
            SourceModel::ising(num(beta, "beta")?, sweeps)
        }
        ("periodic", [dims, symbols]) => {
            let dims = parse_dims(dims)?;
            let data: Vec<u8> = symbols
                .split(',')
                .map(|v| num(v, "symbol"))
                .collect::<Result<_, _>>()?;
            let size = data
                .iter()
                .map(|&s| s as usize + 1)
                .max()
                .unwrap_or(2)
                .max(2);
            let alphabet = Alphabet::new(size).map_err(|e| CliError::Usage(e.to_string()))?;
            NdArray::new(alphabet, dims, data).map(SourceModel::periodic)
        }
        _ => return Err(CliError::Usage(format!("unrecognized model '{spec}'"))),
    };
    model.map_err(|e| CliError::Usage(format!("model '{spec}': {e}")))
}

/// Splits a list value on `sep`, dropping empty items.
pub fn split_list(s: &str, sep: char) -> Vec<String> {
    s.split(sep)
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(str::to_string)
        .collect()
}

pub fn parse_f64_list(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    split_list(s, ',').iter().map(|v| num(v, what)).collect()
}
