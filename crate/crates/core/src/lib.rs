//! Finite-alphabet random fields on `Z^d` (`d ≤ 3`): empirical block
//! statistics, packing of typical blocks, typical sets and a universal
//! lossless block codec.
//!
//! Arrays are stored row-major with the last axis varying fastest.
//! Logarithms are base 2 throughout.

pub mod blockset;
pub mod codec;
pub mod error;
pub mod lattice;
pub mod mda;
pub mod packing;
pub mod sources;
pub mod stats;
pub mod typical;

pub use blockset::BlockSet;
pub use codec::{
    compare_rates, decode, encode, encode_lz78_hilbert, BlockSide, CompressedStream, Mode,
    RateReport,
};
pub use error::{Error, Result};
pub use lattice::{
    block_key, decode_block_key, project, regular_partition, Alphabet, LatticeBox, NdArray,
    PartitionCell, ShiftVector, MAX_DIM,
};
pub use packing::{find_packing_shift, verify_packing_bounds, BoundCheck, PackingReport};
pub use sources::{exact_entropy_rate, generate, SourceModel};
pub use stats::{
    empirical_nonoverlapping, empirical_overlapping, empirical_shifted, estimate_entropy_rate,
    k_schedule, shannon_entropy, z_count, EmpiricalDistribution, Estimate, EstimateOptions, KBound,
    KChoice,
};
pub use typical::{
    build_entropy_typical_set, entropy_typical_membership, library_coverage, random_library,
    typical_sampling_membership, typical_set_log_cardinality_bound, universal_typical_membership,
    MembershipResult, TypicalityParams,
};
