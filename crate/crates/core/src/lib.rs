//! Entropy-profile laboratory: epsilon-entropy of finite weighted
//! semimetric spaces, averaged semimetrics along measure-preserving
//! dynamics, profile grids with a comparison order, and constructive
//! subadditive regularization.
//!
//! The pipeline runs space -> semimetric -> distance matrix -> entropy ->
//! profile. `dynamics` supplies the systems and orbit averaging, `cover`
//! the exact and greedy entropy estimators, `profile` the two-variable
//! grids and their diagnostics, and `subadd` the sequence calculus plus
//! the randomized inequality verifiers.

pub mod cover;
pub mod dynamics;
pub mod error;
pub mod matrix;
pub mod point;
pub mod profile;
pub mod rng;
pub mod semimetric;
pub mod space;
pub mod subadd;
pub mod suites;

pub use cover::{
    entropy_curve, exact_entropy, exact_entropy_limited, greedy_entropy, is_valid_cover, Cover,
    EntropyValue, Estimator,
};
pub use dynamics::{
    averaged_matrix_stream, averaged_semimetric, sample_space, shifted_semimetric, OrbitTable,
    System, SystemSpec, Transformation,
};
pub use error::{Error, Result};
pub use matrix::{cache_key, cache_path, eval_matrix, DistanceMatrix};
pub use point::Point;
pub use profile::{
    compute_profile, equivalent, factor_bound_check, preceq_check, product_bound_check,
    profile_from_matrices, stability_diagnostic, ComparisonWitness, GridProvenance, ProfileGrid,
    StabilityReport,
};
pub use semimetric::{
    check_semimetric, cut_semimetric, weighted_sum_semimetric, Labeling, Semimetric,
};
pub use space::{mass_of, Provenance, SampledSpace};
pub use subadd::{
    lower_monotone_envelope, monotone_eps_envelope, subadditive_hull, theta, theta_hat,
    verify_averaging_bounds, verify_block_averages, HullResult, SeqTriple,
};
pub use suites::{
    full_battery, hull_suite, averaging_suite, product_bound_suite, block_average_suite, SuiteRecord,
    SuiteReport,
};
