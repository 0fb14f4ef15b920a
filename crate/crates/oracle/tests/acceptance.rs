//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mdts_core::stats::overlapping_match_count;
use mdts_core::{
    compare_rates, decode, empirical_nonoverlapping, empirical_overlapping, empirical_shifted,
    encode, encode_lz78_hilbert, estimate_entropy_rate, find_packing_shift, generate, k_schedule,
    library_coverage, random_library, typical_set_log_cardinality_bound,
    universal_typical_membership, verify_packing_bounds, Alphabet, BlockSet, BlockSide,
    CompressedStream, EmpiricalDistribution, EstimateOptions, KChoice, Mode, NdArray, ShiftVector,
    SourceModel,
};
use mdts_oracle::{
    bernoulli_cells, binary_entropy, expected_plugin_entropy, overlapping_counts, product_cells,
    shifted_counts, symmetric_markov_block_rate, symmetric_markov_chain_cells, Counts,
};

type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Outcome);

fn estimate_at(x: &NdArray, k: usize) -> f64 {
    let options = EstimateOptions {
        k: KChoice::Explicit(k),
        well_sampled_guard: false,
    };
    estimate_entropy_rate(x, &options).unwrap().estimate
}

fn symmetric_markov(flip: f64, axis: usize) -> SourceModel {
    SourceModel::markov_rows(vec![vec![1.0 - flip, flip], vec![flip, 1.0 - flip]], axis).unwrap()
}

fn estimator_iid() -> Outcome {
    let h = 0.46900;
    assert!((binary_entropy(0.1) - h).abs() < 1e-4);
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, model, k, target, p_one, seed) in [
        (
            "uniform",
            SourceModel::uniform(2).unwrap(),
            3,
            1.0,
            0.5,
            101u64,
        ),
        (
            "bernoulli(0.1)",
            SourceModel::bernoulli(0.1).unwrap(),
            4,
            h,
            0.1,
            102,
        ),
    ] {
        let x = generate(&model, &[512, 512], seed).unwrap();
        let t0 = Instant::now();
        let e = estimate_at(&x, k);
        let secs = t0.elapsed().as_secs_f64();
        ok &= (e - target).abs() <= 0.01 && secs < 2.0;
        let blocks = ((512 / k) * (512 / k)) as u64;
        let sites = (k * k) as u64;
        let mean = expected_plugin_entropy(&bernoulli_cells(p_one, sites), blocks) / sites as f64;
        detail.push(format!(
            "{name} k={k} est={e:.5} target={target:.5} expected_plugin={mean:.5} time={secs:.3}s"
        ));
    }
    (ok, detail.join("; "))
}

fn estimator_markov() -> Outcome {
    let flip = 0.1;
    let x = generate(&symmetric_markov(flip, 0), &[512, 512], 201).unwrap();
    let e2d = estimate_at(&x, 4);
    let t2d = 0.60175;
    assert!((symmetric_markov_block_rate(flip, 4) - t2d).abs() < 1e-4);
    let line = generate(&symmetric_markov(flip, 0), &[1 << 20], 202).unwrap();
    let ks = [2, 4, 8, 16, 24];
    let sweep: Vec<f64> = ks.iter().map(|&k| estimate_at(&line, k)).collect();
    let t1d = 0.49113;
    assert!((symmetric_markov_block_rate(flip, 24) - t1d).abs() < 1e-4);
    let decreasing = sweep.windows(2).all(|w| w[1] < w[0]);
    let ok = (e2d - t2d).abs() <= 0.01 && (sweep[4] - t1d).abs() <= 0.01 && decreasing;
    let mean2d = expected_plugin_entropy(
        &product_cells(&symmetric_markov_chain_cells(flip, 4), 4),
        128 * 128,
    ) / 16.0;
    let mean1d =
        expected_plugin_entropy(&symmetric_markov_chain_cells(flip, 24), (1 << 20) / 24) / 24.0;
    let sweep_txt: Vec<String> = ks
        .iter()
        .zip(&sweep)
        .map(|(k, e)| format!("k{k}={e:.5}"))
        .collect();
    (
        ok,
        format!(
            "512x512 k=4 est={e2d:.5} target={t2d:.5} expected_plugin={mean2d:.5}; d=1 n=2^20 {} target(k=24)={t1d:.5} expected_plugin(k=24)={mean1d:.5} strictly_decreasing={decreasing}",
            sweep_txt.join(" ")
        ),
    )
}

fn universal_typicality() -> Outcome {
    let mut freq = Vec::new();
    for (p, base) in [(0.1, 3_000u64), (0.5, 4_000)] {
        let model = SourceModel::bernoulli(p).unwrap();
        let members = (0..100)
            .filter(|i| {
                let x = generate(&model, &[256, 256], base + i).unwrap();
                universal_typical_membership(&x, 0.6, KChoice::Explicit(3))
                    .unwrap()
                    .member
            })
            .count();
        freq.push(members as f64 / 100.0);
    }
    (
        freq[0] >= 0.95 && freq[1] <= 0.05,
        format!(
            "h0=0.6 k=3: bernoulli(0.1) member freq={:.2}; bernoulli(0.5) member freq={:.2}",
            freq[0], freq[1]
        ),
    )
}

fn to_array(alphabet: Alphabet, d: usize, m: usize, symbols: &[u8]) -> NdArray {
    NdArray::new(alphabet, vec![m; d], symbols.to_vec()).unwrap()
}

/// Most frequent overlapping m-blocks, added until they cover 1-δ of positions.
fn greedy_library(x: &NdArray, m: usize, delta: f64) -> (BlockSet, u64) {
    let counts = overlapping_counts(x.data(), x.dims(), m);
    let positions: u64 = counts.values().sum();
    let mut ranked: Vec<(&Vec<u8>, u64)> = counts.iter().map(|(b, &c)| (b, c)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let mut chosen = Vec::new();
    let mut covered = 0u64;
    for (b, c) in ranked {
        if covered as f64 >= (1.0 - delta) * positions as f64 {
            break;
        }
        chosen.push(to_array(x.alphabet(), x.d(), m, b));
        covered += c;
    }
    (
        BlockSet::from_blocks(x.alphabet(), x.d(), m, chosen.iter()).unwrap(),
        covered,
    )
}

fn packing() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut detail = Vec::new();
    let mut ok = true;
    for d in [1usize, 2] {
        let (mut applicable, mut held, mut identity) = (0, 0, 0);
        for _ in 0..1000 {
            let delta = [0.1, 0.25, 0.5][rng.gen_range(0..3)];
            let m = rng.gen_range(1..=3usize);
            let k = ((d * m) as f64 / delta).ceil() as usize
                + rng.gen_range(0..=if d == 1 { 200 } else { 12 });
            let model = match rng.gen_range(0..3) {
                0 => SourceModel::bernoulli(rng.gen_range(0.01..0.5)).unwrap(),
                1 => symmetric_markov(rng.gen_range(0.01..0.3), rng.gen_range(0..d)),
                _ => SourceModel::uniform(rng.gen_range(2..=3)).unwrap(),
            };
            let x = generate(&model, &vec![k; d], rng.gen()).unwrap();
            let (library, covered) = greedy_library(&x, m, delta);
            let check = verify_packing_bounds(&x, &library, m, delta).unwrap();
            if check.applicable {
                applicable += 1;
                held += (check.bound_a_holds && check.bound_b_holds) as usize;
            }
            let report = find_packing_shift(&x, &library, m).unwrap();
            let lambda_sum: u64 = report.lambdas.iter().sum();
            let per_shift_oracle = ShiftVector::all(m, d).all(|p| {
                let l: u64 = shifted_counts(x.data(), x.dims(), m, p.components())
                    .iter()
                    .filter(|(b, _)| library.contains_symbols(b))
                    .map(|(_, c)| c)
                    .sum();
                l == report.lambdas[shift_rank(&p, m)]
            });
            identity += (lambda_sum == covered
                && lambda_sum == overlapping_match_count(&x, m, &library).unwrap()
                && per_shift_oracle) as usize;
        }
        ok &= applicable == 1000 && held == applicable && identity == 1000;
        detail.push(format!(
            "d={d}: applicable={applicable}/1000 bounds_hold={held}/{applicable} shift_sum_identity={identity}/1000"
        ));
    }
    (ok, detail.join("; "))
}

fn shift_rank(p: &ShiftVector, m: usize) -> usize {
    p.components().iter().fold(0, |acc, &c| acc * m + c)
}

fn as_counts(dist: &EmpiricalDistribution) -> Counts {
    dist.iter().map(|(b, c)| (b.to_vec(), c)).collect()
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut compared = 0u64;
    let mut mismatches = 0u64;
    for _ in 0..1000 {
        let data: Vec<u8> = (0..16).map(|_| rng.gen_range(0..2)).collect();
        let x = NdArray::new(Alphabet::binary(), vec![4, 4], data.clone()).unwrap();
        for k in 1..=4 {
            let mut check = |core: Counts, oracle: Counts| {
                compared += 1;
                mismatches += (core != oracle) as u64;
            };
            check(
                as_counts(&empirical_nonoverlapping(&x, k).unwrap()),
                shifted_counts(&data, &[4, 4], k, &[0, 0]),
            );
            check(
                as_counts(&empirical_overlapping(&x, k).unwrap()),
                overlapping_counts(&data, &[4, 4], k),
            );
            for p in ShiftVector::all(k, 2) {
                let oracle = shifted_counts(&data, &[4, 4], k, p.components());
                match empirical_shifted(&x, &p, k) {
                    Ok(dist) => check(as_counts(&dist), oracle),
                    Err(_) => check(BTreeMap::new(), oracle),
                }
            }
        }
    }
    (
        mismatches == 0,
        format!("1000 random 4x4 arrays, k=1..4, all shifts: {compared} distributions compared, {mismatches} mismatches"),
    )
}

fn rate_formula_holds(s: &CompressedStream) -> bool {
    s.mode != Mode::Block || s.rate_report().payload_bits as f64 <= s.empirical_code_length() + 32.0
}

fn random_model(rng: &mut ChaCha8Rng, d: usize) -> SourceModel {
    match rng.gen_range(0..4) {
        0 => {
            let max = if rng.gen_bool(0.1) { 256 } else { 6 };
            let a = rng.gen_range(2..=max);
            let w: Vec<f64> = (0..a).map(|_| rng.gen::<f64>().powi(3) + 1e-3).collect();
            let s: f64 = w.iter().sum();
            SourceModel::iid(w.iter().map(|v| v / s).collect()).unwrap()
        }
        1 => symmetric_markov(rng.gen_range(0.0..0.5), rng.gen_range(0..d)),
        2 => {
            let side = rng.gen_range(1..=3);
            let tile = generate(
                &SourceModel::uniform(rng.gen_range(2..=4)).unwrap(),
                &vec![side; d],
                rng.gen(),
            )
            .unwrap();
            SourceModel::periodic(tile)
        }
        _ => SourceModel::bernoulli(rng.gen_range(0.0..0.3)).unwrap(),
    }
}

fn codec() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let (mut roundtrips, mut formula_ok, mut encodes) = (0, 0, 0);
    for _ in 0..10_000 {
        let d = rng.gen_range(1..=3usize);
        let max_side = [0, 4096, 64, 16][d];
        let dims: Vec<usize> = (0..d).map(|_| rng.gen_range(1..=max_side)).collect();
        let x = generate(&random_model(&mut rng, d), &dims, rng.gen()).unwrap();
        let min = *dims.iter().min().unwrap();
        let side = if rng.gen_bool(0.5) {
            BlockSide::Auto
        } else {
            BlockSide::Fixed(rng.gen_range(1..=min.min(8)))
        };
        let s = encode(&x, side).unwrap();
        encodes += 1;
        formula_ok += rate_formula_holds(&s) as usize;
        let back = decode(&CompressedStream::from_bytes(&s.to_bytes()).unwrap()).unwrap();
        roundtrips += (back == x) as usize;
    }
    let mut ok = roundtrips == 10_000;
    let mut detail = vec![format!("roundtrips={roundtrips}/10000")];
    for (name, model, lo, hi, seed) in [
        (
            "bernoulli(0.1)",
            SourceModel::bernoulli(0.1).unwrap(),
            0.0,
            0.52,
            601u64,
        ),
        ("uniform", SourceModel::uniform(2).unwrap(), 0.99, 1.06, 602),
        (
            "constant",
            SourceModel::bernoulli(0.0).unwrap(),
            0.0,
            0.01,
            603,
        ),
    ] {
        let x = generate(&model, &[512, 512], seed).unwrap();
        let s = encode(&x, BlockSide::Auto).unwrap();
        encodes += 1;
        formula_ok += rate_formula_holds(&s) as usize;
        let rate = s.rate_report().bits_per_site;
        let in_range = rate >= lo && rate <= hi && decode(&s).unwrap() == x;
        let in_range = in_range && (name == "uniform" || s.mode == Mode::Block);
        ok &= in_range;
        detail.push(format!(
            "{name} 512x512 {} k={} rate={rate:.4} in [{lo}, {hi}]",
            s.mode.as_str(),
            s.k
        ));
    }
    ok &= formula_ok == encodes;
    detail.push(format!("payload<=N*H+32 on {formula_ok}/{encodes} encodes"));
    (ok, detail.join("; "))
}

fn baseline_comparison() -> Outcome {
    let x = generate(&symmetric_markov(0.1, 0), &[512, 512], 701).unwrap();
    let r = compare_rates(&x).unwrap();
    let lz = encode_lz78_hilbert(&x).unwrap();
    assert_eq!(decode(&lz).unwrap(), x);
    (
        r.block_rate <= r.lz78_hilbert_rate,
        format!(
            "markov flip=0.1 along axis 0, 512x512: block={:.4} ({} k={}) lz78_hilbert={:.4} raw={:.1}",
            r.block_rate,
            r.block_mode.as_str(),
            r.block_k,
            r.lz78_hilbert_rate,
            r.raw_rate
        ),
    )
}

fn library_insufficiency() -> Outcome {
    let k = 3;
    let volume = 9.0f64;
    let log_size = volume * (1.0 - 0.2);
    let size = log_size.exp2().round() as usize;
    let model = SourceModel::uniform(2).unwrap();
    let mut small = 0;
    let mut mean = 0.0;
    for i in 0..100u64 {
        let x = generate(&model, &[256, 256], 8_000 + i).unwrap();
        let lib = random_library(Alphabet::binary(), 2, k, size, 9_000 + i).unwrap();
        let c = library_coverage(&x, k, &lib).unwrap();
        mean += c / 100.0;
        small += (c <= 0.1) as usize;
    }
    let expected = size as f64 / 512.0;
    (
        small >= 95,
        format!(
            "k=3 library 2^{log_size:.1}={size} of 512 blocks: coverage<=0.1 in {small}/100 trials, mean coverage={mean:.4} (uniform sample expectation {expected:.4})"
        ),
    )
}

fn cardinality_bound() -> Outcome {
    let (h0, epsilon) = (0.5, 0.1);
    let excess: Vec<(usize, usize, f64)> = (8..=16)
        .map(|q| {
            let n = 1usize << q;
            let k = k_schedule(n, 1, 2, epsilon);
            let b = typical_set_log_cardinality_bound(n, k, h0, 2, 1).unwrap();
            (q, k, b / n as f64 - h0)
        })
        .collect();
    let decreasing = excess.windows(2).all(|w| w[1].2 < w[0].2);
    let last = excess.last().unwrap().2;
    let txt: Vec<String> = excess
        .iter()
        .map(|(q, k, e)| format!("2^{q}:k={k},{e:.4}"))
        .collect();
    (
        decreasing && last < 0.05,
        format!(
            "d=1 epsilon={epsilon}: {} decreasing={decreasing}",
            txt.join(" ")
        ),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("estimator_iid", estimator_iid),
        ("estimator_markov", estimator_markov),
        ("universal_typicality", universal_typicality),
        ("packing", packing),
        ("oracle_equivalence", oracle_equivalence),
        ("codec", codec),
        ("baseline_comparison", baseline_comparison),
        ("library_insufficiency", library_insufficiency),
        ("cardinality_bound", cardinality_bound),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let (pass, detail) = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        });
        failed += !pass as usize;
        println!(
            "acceptance {} {name}: {} ({:.1}s) {detail}",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            t0.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
