//! Randomized iterative fragmentation of finite metric spaces.
//!
//! Given a finite metric space of diameter 2 and a distortion `D > 2`, the
//! fragmentation repeatedly partitions the space into clusters of shrinking
//! radius, discarding points that sit close to a cluster boundary. The
//! survivors carry a hierarchical ultrametric that is `D`-equivalent to the
//! original distances, and in expectation at least `n^{1-β(2/D)}` points
//! survive, where `β` solves `β(1-β)^{(1-β)/β} = 2/D`.
//!
//! Modules:
//! - [`metric`], [`tree`]: finite metric spaces and ultrametric trees.
//! - [`exponents`]: the exponent equations and window probabilities.
//! - [`radii`]: radii schedules and the stopping index.
//! - [`fragmentation`]: the fragmentation itself and its expectation bounds.
//! - [`oracle`]: exact subdominant-ultrametric checks and exhaustive search.
//! - [`generators`], [`format`]: input spaces.
//! - [`harness`], [`verify`]: batch experiments and the acceptance suite.

pub mod error;
pub mod exec;
pub mod exponents;
pub mod format;
pub mod fragmentation;
pub mod generators;
pub mod harness;
pub mod metric;
pub mod oracle;
pub mod radii;
pub mod tree;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Execution;
pub use exponents::{beta_for_distortion, interval_sum, solve_beta, solve_theta, sup_interval_sum};
pub use fragmentation::{
    expected_mass_bound, fragment_iterated, fragment_once, jensen_lower_bound, ultrametric_of,
    FragmentationResult,
};
pub use generators::{generate, Family, GeneratorSpec};
pub use metric::{distortion, FiniteMetricSpace};
pub use oracle::{embeddable, max_subset, subdominant_ultrametric};
pub use radii::{custom_schedule, mn07_geometric_schedule, optimal_schedule, stopping_index, RadiiSchedule};
pub use tree::UltrametricTree;
