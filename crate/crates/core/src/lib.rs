//! Monte Carlo estimation of project cost-contingency reserves.
//!
//! The crate is organised the way the method flows:
//!
//! * [`schedule`]: activity-on-node network, validation and the CPM forward pass.
//! * [`sampling`]: distribution specifications and seedable per-run random streams.
//! * [`risk`]: the typed risk register (aleatoric, stochastic, epistemic) and semantic scales.
//! * [`engine`]: per-run simulation and the parallel Monte Carlo driver.
//! * [`stats`]: summary statistics, percentiles and contingency reserves.
//!
//! Currency is carried as integer cents ([`Cents`]); durations are `f64` working days.

pub mod engine;
pub mod money;
pub mod risk;
pub mod sampling;
pub mod schedule;
pub mod stats;

pub use engine::{
    run_simulation, scenario_compare, simulate_run, RunOutcome, SimulationConfig, SimulationError, SimulationPlan,
    SimulationSummary,
};
pub use money::Cents;
pub use risk::{ImpactKind, ImpactModel, OccurrenceModel, Polarity, Risk, RiskRegister, RiskTargets, ScaleSet};
pub use sampling::{DistributionSpec, RngStream};
pub use schedule::{cpm_forward, topological_order, Activity, ProjectNetwork, ScheduleResult};
