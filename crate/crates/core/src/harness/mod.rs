//! Monte Carlo experiments and empirical-versus-analytic comparisons.

pub mod compare;
pub mod experiment;
pub mod output;
pub mod planted;
pub mod rates;
pub mod settings;
pub mod stats;

pub use compare::{compare_histogram, compare_with_histogram, AtomWindow, Comparison, HistRow};
pub use experiment::{default_audit_threshold, run_lip_experiment, ExperimentConfig, LipDataset, RunRecord};
pub use planted::{default_floor, planted_two_jump_sampler, PlantedSample};
pub use output::{OutputFormat, Summary};
pub use rates::{verify_bernstein, verify_rate_j1, BernsteinCheck, RateCheck, RateConfig};
pub use settings::Settings;
pub use stats::{centred_edges, uniform_edges, Estimate, Histogram};
