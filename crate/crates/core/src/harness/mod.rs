//! Replication studies, distribution comparisons, and report output.

pub mod ks;
pub mod named;
pub mod output;
pub mod study;
pub mod truth;

pub use ks::{ks_distance, qq_pairs, Reference};
pub use named::parse_functional;
pub use output::{read_limit_sample, write_limit_sample, write_report, LimitSampleMetadata};
pub use study::{
    run_limit_sample, run_study, run_uniform_study, LimitSampleConfig, ReferenceConfig,
    SimulationReport, StudyConfig, Summary, UniformStudyConfig,
};
pub use truth::{truth_for, Truth};
