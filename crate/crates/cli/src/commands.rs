use std::fs;
use std::path::Path;

use mdts_core::mda::{read_mda, read_pgm, write_mda};
use mdts_core::typical::universal_block_side;
use mdts_core::{
    build_entropy_typical_set, decode, encode, encode_lz78_hilbert, entropy_typical_membership,
    estimate_entropy_rate, find_packing_shift, generate, library_coverage, random_library,
    typical_sampling_membership, universal_typical_membership, BlockSet, BlockSide,
    CompressedStream, EstimateOptions, KChoice, MembershipResult, NdArray,
};

use crate::model::{parse_dims, parse_model};
use crate::{
    BlockChoice, CliError, CompressArgs, CoverageArgs, DecompressArgs, EstimateArgs, GenArgs,
    LibraryArgs, PackingArgs, TypicalArgs,
};

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Reads MDA1, or binary PGM when the file starts with `P5`.
pub fn read_array(path: &Path) -> Result<NdArray, CliError> {
    let bytes = read_file(path)?;
    let parsed = if bytes.starts_with(b"P5") {
        read_pgm(&bytes)
    } else {
        read_mda(&bytes)
    };
    parsed.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn k_choice(b: &BlockChoice) -> KChoice {
    match b.k {
        Some(k) => KChoice::Explicit(k),
        None => KChoice::Auto { epsilon: b.epsilon },
    }
}

pub fn gen(a: &GenArgs) -> Result<(), CliError> {
    let model = parse_model(&a.model)?;
    let dims = parse_dims(&a.dims)?;
    let x = generate(&model, &dims, a.seed)?;
    write_file(&a.out, &write_mda(&x))
}

pub fn estimate(a: &EstimateArgs) -> Result<(), CliError> {
    let x = read_array(&a.input)?;
    let options = EstimateOptions {
        k: k_choice(&a.block),
        well_sampled_guard: a.block.k.is_none() && !a.no_guard,
    };
    let e = estimate_entropy_rate(&x, &options)?;
    println!("estimate_bits_per_site={:.6}", e.estimate);
    println!("k_used={}", e.k_used);
    println!("k_bound={}", e.bound.as_str());
    println!("total_blocks={}", e.total_blocks);
    println!("distinct_blocks={}", e.distinct_blocks);
    Ok(())
}

pub fn compress(a: &CompressArgs) -> Result<(), CliError> {
    let x = read_array(&a.input)?;
    let stream = match a.codec.as_str() {
        "block" => encode(&x, a.k.map_or(BlockSide::Auto, BlockSide::Fixed))?,
        "lz78-hilbert" => {
            if a.k.is_some() {
                return Err(CliError::Usage(
                    "--k applies only to the block codec".into(),
                ));
            }
            encode_lz78_hilbert(&x)?
        }
        other => return Err(CliError::Usage(format!("unknown codec '{other}'"))),
    };
    write_file(&a.out, &stream.to_bytes())?;
    let r = stream.rate_report();
    println!("mode={}", stream.mode.as_str());
    println!("k={}", stream.k);
    println!("bits_per_site={:.6}", r.bits_per_site);
    println!("total_bits={}", r.total_bits);
    println!("header_bits={}", r.header_bits);
    println!("dictionary_bits={}", r.dictionary_bits);
    println!("payload_bits={}", r.payload_bits);
    println!("boundary_bits={}", r.boundary_bits);
    Ok(())
}

pub fn decompress(a: &DecompressArgs) -> Result<(), CliError> {
    let bytes = read_file(&a.input)?;
    let stream = CompressedStream::from_bytes(&bytes)
        .map_err(|e| CliError::Data(format!("{}: {e}", a.input.display())))?;
    write_file(&a.out, &write_mda(&decode(&stream)?))
}

fn load_library(a: &LibraryArgs, x: &NdArray) -> Result<BlockSet, CliError> {
    let need_m = || {
        a.m.ok_or_else(|| CliError::Usage("--m is required to build a library".into()))
    };
    let set = match (&a.library, &a.typical_of, a.random_size) {
        (Some(path), None, None) => {
            let text = String::from_utf8(read_file(path)?)
                .map_err(|_| CliError::Data(format!("{}: not UTF-8 text", path.display())))?;
            let set = BlockSet::from_library_text(&text)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            if a.m.is_some_and(|m| m != set.m()) {
                return Err(CliError::Usage(
                    "--m disagrees with the library file".into(),
                ));
            }
            set
        }
        (None, Some(model), None) => {
            let model = parse_model(model)?;
            if model.alphabet() != x.alphabet() {
                return Err(CliError::Usage(
                    "model alphabet differs from the sample's".into(),
                ));
            }
            build_entropy_typical_set(&model, x.d(), need_m()?, a.delta)?
        }
        (None, None, Some(size)) => {
            random_library(x.alphabet(), x.d(), need_m()?, size, a.library_seed)?
        }
        _ => {
            return Err(CliError::Usage(
                "give exactly one of --library, --typical-of, --random-size".into(),
            ))
        }
    };
    if set.d() != x.d() || set.alphabet() != x.alphabet() {
        return Err(CliError::Data(
            "library shape or alphabet does not match the sample".into(),
        ));
    }
    if let Some(path) = &a.save_library {
        write_file(path, set.to_library_text()?.as_bytes())?;
    }
    Ok(set)
}

fn print_membership(r: &MembershipResult) {
    println!("member={}", r.member);
    println!("statistic={:.6}", r.statistic);
    if let Some(p) = &r.witness_shift {
        println!("witness_shift={p}");
    }
}

pub fn typical(a: &TypicalArgs) -> Result<(), CliError> {
    let x = read_array(&a.input)?;
    match a.set.as_str() {
        "universal" => {
            let schedule = k_choice(&a.block);
            let r = universal_typical_membership(&x, a.h0, schedule)?;
            print_membership(&r);
            println!("k_used={}", universal_block_side(&x, schedule)?);
        }
        "sampling" => {
            let library = load_library(&a.library, &x)?;
            print_membership(&typical_sampling_membership(&x, &library, a.library.delta)?);
        }
        "entropy" => {
            let model = a
                .model
                .as_deref()
                .ok_or_else(|| CliError::Usage("--model is required for --set entropy".into()))?;
            let model = parse_model(model)?;
            print_membership(&entropy_typical_membership(&x, &model, a.library.delta)?);
        }
        other => return Err(CliError::Usage(format!("unknown typical set '{other}'"))),
    }
    Ok(())
}

pub fn packing(a: &PackingArgs) -> Result<(), CliError> {
    let x = read_array(&a.input)?;
    let library = load_library(&a.library, &x)?;
    print!(
        "{}",
        find_packing_shift(&x, &library, library.m())?.to_text()
    );
    Ok(())
}

pub fn coverage(a: &CoverageArgs) -> Result<(), CliError> {
    let x = read_array(&a.input)?;
    let library = load_library(&a.library, &x)?;
    println!(
        "coverage={:.6}",
        library_coverage(&x, library.m(), &library)?
    );
    println!("library_log2_size={:.6}", library.log2_len());
    Ok(())
}
