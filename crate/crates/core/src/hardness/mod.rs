//! Constructions and probes behind the hardness results: huge-cycle sampling,
//! sparse set families, small common remainders and the group-sync instance.

mod groupsync;
mod remainders;
mod sampling;
mod sparse;

pub use groupsync::{
    gen_groupsync, random_probe, random_shifts, subset_gap_probe, worst_private_gap, GapProbe, GroupSync,
};
pub use remainders::{small_remainders, UniqueDivisorSystem};
pub use sampling::{
    gen_sample_complexity, sample_levels, sample_points, sampling_estimate, SampledLevels, SamplingEstimate,
};
pub use sparse::{intersection, sparse_family, SparseFamily};
