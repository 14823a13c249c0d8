//! eonsim — a discrete-event simulator for profile-based services in
//! elastic optical networks.
//!
//! Requests ask for a bandwidth profile (minimum, average, and maximum slot
//! counts plus a holding time) instead of a fixed width. The library covers
//! the full pipeline: probabilistic spectrum-interval partitioning and its
//! conventional proportional baseline, profile-aware and least-loaded
//! routing over precomputed k-shortest paths, maximal initial assignment,
//! two reallocation schedulers that steer each request's time-weighted
//! average bin size onto its requested average, and an experiment runner
//! reporting blocking probability, spectrum utilization, and realization
//! factor with confidence intervals.

pub mod cli;
pub mod engine;
pub mod error;
pub mod metrics;
pub mod occupancy;
pub mod partition;
pub mod report;
pub mod rsa;
pub mod scenario;
pub mod spr;
pub mod topology;
pub mod traffic;

pub use engine::{run_experiment, run_trial, ExperimentConfig, Routing, SimContext};
pub use error::{Error, Result};
pub use metrics::TrialStats;
pub use occupancy::{BinRef, OccupancyStore};
pub use partition::{BinSizeSet, LeftoverPolicy, PartitionPlan, PlanScheme};
pub use rsa::{AdmissionResult, ServiceProfile};
pub use scenario::Scenario;
pub use spr::{SchedulerConfig, SprMethod};
pub use topology::{load_network, Network, PathTable};
pub use traffic::{generate_stream, StreamRequest, TrafficConfig};
