//! Synchronous weighted-median opinion dynamics with prejudice.
//!
//! Each agent blends its fixed prejudice with the weighted median of its
//! neighbours' opinions. The crate provides the steppers (alongside the
//! Friedkin-Johnsen weighted-average baseline), fixed-point and closed-form
//! limit computation for fully prejudiced groups, and the cohesive-set test
//! that decides consensus when only some agents are prejudiced.

pub mod analysis;
pub mod dynamics;
mod error;
pub mod generate;
pub mod io;
pub mod median;
pub mod network;
pub mod opinion;
pub mod prejudice;
pub mod run;

pub use analysis::{
    complete_graph_selection, consensus_predicate, extract_selection, fixed_point,
    fixed_point_from, is_cohesive, limit_from_selection, max_cohesive_subset, verify_rate,
    CohesiveReport, SelectionMatrix,
};
pub use dynamics::{max_min_envelope, simulate, step_fj, step_wm, Model, SimOptions, StopReason, Trace};
pub use error::{Error, Result};
pub use generate::{generate, GeneratorKind, GeneratorParams};
pub use io::{export_trace, load_network, read_trace_csv};
pub use median::{brute_force_median, median_map, weighted_median, MedianResult, WeightVector};
pub use network::InfluenceNetwork;
pub use opinion::OpinionVector;
pub use prejudice::PrejudiceConfig;
