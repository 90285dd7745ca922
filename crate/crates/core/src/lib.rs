//! Coalition selection for battery-equipped microgrid communities
//! trading against an energy market.
//!
//! A community of microgrids, each with a storage battery, faces one
//! market snapshot: a deficit to cover by selling stored energy, or a
//! surplus to absorb by charging. The crate searches for the coalition
//! that maximizes the characteristic value (capped trade revenue minus
//! battery-degradation and operating costs, Eq.-style `v(C)`) net of an
//! imbalance penalty, using a memetic algorithm: genetic evolution of
//! activation-flag vectors plus simulated-annealing refinement of the
//! elite. The winning coalition's value is split among members by the
//! Shapley value, exactly for small coalitions and by seeded Monte Carlo
//! permutation sampling beyond that.
//!
//! Supporting pieces: an exhaustive oracle for ground truth on small
//! communities, a scenario pipeline (synthetic generation, prosumer
//! time-series ingestion, a versioned TOML file format), and an
//! experiment harness (parameter sweeps, stability studies, coalition
//! reports) emitting deterministic CSVs.

pub mod config;
pub mod error;
pub mod experiments;
pub mod model;
pub mod optimizer;
pub mod oracle;
pub mod scenario;
pub mod shapley;
pub mod valuation;

pub use config::{ConfigOverlay, CONFIG_FORMAT};
pub use error::{Error, Result};
pub use experiments::{
    coalition_report, pearson, spearman, stability_study, sweep, verify_against_oracle,
    CoalitionReport, RunRow, SeedOutcome, StabilityResult, SweepAxis, SweepCell, SweepResult,
    SweepSpec, VerifyReport,
};
pub use model::{
    buy_capacity, sell_capacity, BatteryState, BatteryStatus, Community, MarketState,
    MarketStatus, Microgrid, ENERGY_EPSILON,
};
pub use optimizer::{
    run, GenerationTrace, Individual, OptimizerConfig, RunResult, DEFAULT_SHAPLEY_PERMUTATIONS,
};
pub use oracle::{solve_exhaustive, OracleResult, RankedCoalition, DEFAULT_ORACLE_LIMIT};
pub use scenario::{
    generate_synthetic, read_scenario, write_scenario, Provenance, Scenario, SyntheticSpec,
};
pub use shapley::{
    allocation_report, exact_shapley, sampled_shapley, Allocation, AllocationMethod,
    AllocationRow, EXACT_SHAPLEY_LIMIT,
};
pub use valuation::{
    characteristic_value, superadditivity_check, CoalitionGame, CoalitionValue, CostModel,
    SuperadditivityReport,
};
