//! Comparative-advantage power allocation for two-cell downlink NOMA.
//!
//! The reduced method orders users by the ratio of their channel gains to
//! the two base stations and only searches allocations where each BS serves
//! the users it is relatively best at, leaving a single user that may be
//! served by both. For two users this turns the 2D search over `(f11, f12)`
//! into a search along two edges of the unit square.
//!
//! * [`model`]: allocations, SINR expressions and target functions (generic over [`Scalar`]).
//! * [`advantage`]: the comparative-advantage criterion, edge subspace and alpha score.
//! * [`optimize`]: full-square grid oracle, reduced edge search, independent-model brute force.
//! * [`channel`]: random two-cell scenarios.
//! * [`montecarlo`]: the oracle-versus-method experiment and its statistics.
//! * [`report`]: config files, figure CSVs and run manifests.

// `!(x > 0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod advantage;
pub mod channel;
pub mod error;
pub mod model;
pub mod montecarlo;
pub mod optimize;
pub mod report;
pub mod scalar;
pub mod stats;

pub use advantage::{
    edge_subspace_two_user, normalized_advantage, order_users_by_advantage, pairwise_criterion,
    split_search_space, AdvantageScore, Coordinate, Edge, EdgeBranch, EdgeSubspace, SupportPattern,
};
pub use channel::{
    generate_instance, instance_rng, path_gain, place_users, Fading, Geometry, PathLossParams,
    Position, RadioParams, ReferenceGain, ScenarioConfig, ScenarioInstance,
};
pub use error::{Error, Result};
pub use model::{
    best_over_sic_orders, dynamic_branches, independent_sinr, limiting_sinr_general,
    limiting_sinr_two_user, target_dynamic_two_user, target_independent, target_noma,
    DecodingOrder, Objective, RateLog, TargetKind, TwoUserKernel,
};
pub use montecarlo::{
    evaluate_instance, run_experiment, run_experiment_with_workers, run_instance, trend_statistics,
    ExperimentConfig, ExperimentSummary, InstanceRecord, TrendReport, WeightsCase,
};
pub use optimize::{
    brute_force_independent, compare_results, edge_search_two_user, grid_oracle_two_user, GridSpec,
    MatchOutcome,
};
pub use scalar::Scalar;

pub type ChannelGains<T = f64> = model::ChannelGains<T>;
pub type NormalizedPowers<T = f64> = model::NormalizedPowers<T>;
pub type AllocationMatrix<T = f64> = model::AllocationMatrix<T>;
pub type Weights<T = f64> = model::Weights<T>;
pub type SinrVector<T = f64> = model::SinrVector<T>;
pub type OptimizationResult<T = f64> = optimize::OptimizationResult<T>;

/// Double-precision aliases; the Monte Carlo harness runs on these.
pub type Gains64 = model::ChannelGains<f64>;
pub type Powers64 = model::NormalizedPowers<f64>;
pub type Allocation64 = model::AllocationMatrix<f64>;
pub type Weights64 = model::Weights<f64>;
pub type Result64 = optimize::OptimizationResult<f64>;

/// Single-precision aliases.
pub type Gains32 = model::ChannelGains<f32>;
pub type Powers32 = model::NormalizedPowers<f32>;
pub type Allocation32 = model::AllocationMatrix<f32>;
pub type Weights32 = model::Weights<f32>;
pub type Result32 = optimize::OptimizationResult<f32>;
