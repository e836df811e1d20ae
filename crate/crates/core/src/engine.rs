//! Monte Carlo driver.
//!
//! A run is a pure function of `(network, register, master_seed, run_index)`.
//! Its draws come from `RngStream::new(master_seed, run_index)` in this order:
//!
//! 1. one duration draw per activity, activities in ascending id order;
//! 2. per risk, in register order: the occurrence draws, then, if it occurred,
//!    for each targeted activity in ascending id order a duration-impact draw
//!    followed by a cost-impact draw (a project-wide risk makes one of each).
//!
//! Appending an activity with a larger id or a risk at the end of the register
//! therefore leaves every earlier draw untouched.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::money::Cents;
use crate::risk::{
    validate_register, ImpactKind, RegisterViolation, ResolvedImpact, ResolvedOccurrence, RiskRegister, RiskTargets,
};
use crate::sampling::{RngStream, Sampler};
use crate::schedule::{validate_network, NetworkViolation, ProjectNetwork, ScheduleGraph};

pub const DEFAULT_ITERATIONS: u64 = 10_000;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub iterations: u64,
    pub master_seed: u64,
    /// `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            iterations: DEFAULT_ITERATIONS,
            master_seed: DEFAULT_SEED,
            workers: None,
        }
    }
}

impl SimulationConfig {
    pub fn new(iterations: u64, master_seed: u64) -> Self {
        SimulationConfig {
            iterations,
            master_seed,
            workers: None,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }
}

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error("inputs failed validation ({} network, {} register problems)", network.len(), register.len())]
    Invalid {
        network: Vec<NetworkViolation>,
        register: Vec<RegisterViolation>,
    },
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

/// A risk that materialized in a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccurredRisk {
    pub id: String,
    /// Sum of the sampled duration deltas (before clamping).
    pub duration_delta: f64,
    pub cost_delta: Cents,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub run_index: u64,
    pub total_duration: f64,
    pub total_cost: Cents,
    pub occurred_risks: Vec<OccurredRisk>,
    pub per_activity_duration: BTreeMap<String, f64>,
}

impl RunOutcome {
    /// Rebuilds the total cost from realized durations and risk deltas.
    pub fn recompute_cost(&self, network: &ProjectNetwork) -> Cents {
        let activities: Cents = network
            .activities
            .iter()
            .map(|a| a.cost_for(self.per_activity_duration[&a.id]))
            .sum();
        activities + self.occurred_risks.iter().map(|r| r.cost_delta).sum()
    }

    pub fn occurred(&self, risk_id: &str) -> bool {
        self.occurred_risks.iter().any(|r| r.id == risk_id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    /// Ordered by `run_index`.
    pub outcomes: Vec<RunOutcome>,
    pub planned_cost: Cents,
    pub planned_duration: f64,
    pub iterations: u64,
    pub master_seed: u64,
}

impl SimulationSummary {
    pub fn sorted_costs(&self) -> Vec<Cents> {
        let mut v: Vec<Cents> = self.outcomes.iter().map(|o| o.total_cost).collect();
        v.sort_unstable();
        v
    }

    pub fn sorted_durations(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.outcomes.iter().map(|o| o.total_duration).collect();
        v.sort_unstable_by(f64::total_cmp);
        v
    }
}

#[derive(Debug, Clone)]
struct PlannedActivity {
    id: String,
    duration: Sampler,
    fixed_cost: Cents,
    rate: Cents,
}

#[derive(Debug, Clone)]
struct PlannedRisk {
    id: String,
    occurrence: ResolvedOccurrence,
    duration: ResolvedImpact,
    cost: ResolvedImpact,
    /// Graph indices in ascending id order; `None` for the entire project.
    targets: Option<Vec<usize>>,
}

/// Validated network and register compiled for repeated runs.
#[derive(Debug, Clone)]
pub struct SimulationPlan {
    graph: ScheduleGraph,
    /// Indexed like the graph (topological order).
    activities: Vec<PlannedActivity>,
    /// Graph indices in ascending activity id order.
    draw_order: Vec<usize>,
    risks: Vec<PlannedRisk>,
    planned_cost: Cents,
    planned_duration: f64,
}

impl SimulationPlan {
    pub fn compile(network: &ProjectNetwork, register: &RiskRegister) -> Result<Self, SimulationError> {
        let network_report = validate_network(network);
        let register_report = validate_register(register, network);
        if !network_report.is_empty() || !register_report.is_empty() {
            return Err(SimulationError::Invalid {
                network: network_report,
                register: register_report,
            });
        }

        let invalid = || SimulationError::Config("inputs changed during compilation".into());
        let graph = ScheduleGraph::build(network).map_err(|_| invalid())?;
        let activities: Vec<PlannedActivity> = graph
            .ids()
            .iter()
            .map(|id| {
                let a = network.activity(id).expect("graph ids come from the network");
                PlannedActivity {
                    id: id.clone(),
                    duration: a.duration_model.sampler().expect("validated"),
                    fixed_cost: a.fixed_cost,
                    rate: a.variable_cost_rate,
                }
            })
            .collect();
        let mut draw_order: Vec<usize> = (0..activities.len()).collect();
        draw_order.sort_by(|a, b| activities[*a].id.cmp(&activities[*b].id));

        let scales = &register.scales;
        let risks = register
            .risks
            .iter()
            .map(|r| {
                let targets = match &r.targets {
                    RiskTargets::EntireProject => None,
                    RiskTargets::Activities(ids) => {
                        let mut ids: Vec<&String> = ids.iter().collect();
                        ids.sort();
                        ids.dedup();
                        Some(
                            ids.into_iter()
                                .map(|id| graph.position(id).expect("validated"))
                                .collect(),
                        )
                    }
                };
                PlannedRisk {
                    id: r.id.clone(),
                    occurrence: r.occurrence.resolve(scales).expect("validated"),
                    duration: r
                        .duration_impact
                        .resolve(ImpactKind::Duration, scales)
                        .expect("validated"),
                    cost: r.cost_impact.resolve(ImpactKind::Cost, scales).expect("validated"),
                    targets,
                }
            })
            .collect();

        let planned: Vec<f64> = graph
            .ids()
            .iter()
            .map(|id| network.activity(id).unwrap().planned_duration)
            .collect();
        let planned_duration = graph.project_duration(&planned);
        Ok(SimulationPlan {
            graph,
            activities,
            draw_order,
            risks,
            planned_cost: network.planned_cost(),
            planned_duration,
        })
    }

    pub fn planned_cost(&self) -> Cents {
        self.planned_cost
    }

    pub fn planned_duration(&self) -> f64 {
        self.planned_duration
    }

    pub fn run(&self, run_index: u64, master_seed: u64) -> RunOutcome {
        let mut rng = RngStream::new(master_seed, run_index);
        let mut durations = vec![0.0; self.activities.len()];
        for &i in &self.draw_order {
            durations[i] = clamp_nonnegative(self.activities[i].duration.sample(&mut rng));
        }

        let mut project_delta = 0.0;
        let mut occurred_risks = Vec::new();
        for risk in &self.risks {
            if !risk.occurrence.sample(&mut rng) {
                continue;
            }
            let mut duration_delta = 0.0;
            let mut cost_delta = Cents::ZERO;
            match &risk.targets {
                Some(targets) => {
                    for &t in targets {
                        let d = risk.duration.sample(&mut rng);
                        durations[t] = clamp_nonnegative(durations[t] + d);
                        duration_delta += d;
                        cost_delta += risk.cost.sample_cents(&mut rng);
                    }
                }
                None => {
                    let d = risk.duration.sample(&mut rng);
                    project_delta += d;
                    duration_delta += d;
                    cost_delta += risk.cost.sample_cents(&mut rng);
                }
            }
            occurred_risks.push(OccurredRisk {
                id: risk.id.clone(),
                duration_delta,
                cost_delta,
            });
        }

        let total_duration = clamp_nonnegative(self.graph.project_duration(&durations) + project_delta);
        let activity_cost: Cents = self
            .activities
            .iter()
            .zip(&durations)
            .map(|(a, &d)| a.fixed_cost + Cents::variable_cost(a.rate, d))
            .sum();
        let total_cost = activity_cost + occurred_risks.iter().map(|r| r.cost_delta).sum();

        RunOutcome {
            run_index,
            total_duration,
            total_cost,
            occurred_risks,
            per_activity_duration: self.activities.iter().map(|a| a.id.clone()).zip(durations).collect(),
        }
    }

    pub fn run_all(&self, config: &SimulationConfig) -> Result<SimulationSummary, SimulationError> {
        if config.iterations == 0 {
            return Err(SimulationError::Config("iterations must be at least 1".into()));
        }
        let seed = config.master_seed;
        let simulate = || -> Vec<RunOutcome> {
            (0..config.iterations)
                .into_par_iter()
                .map(|i| self.run(i, seed))
                .collect()
        };
        let outcomes = match config.workers {
            Some(0) => return Err(SimulationError::Config("workers must be at least 1".into())),
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| SimulationError::Pool(e.to_string()))?
                .install(simulate),
            None => simulate(),
        };
        Ok(SimulationSummary {
            outcomes,
            planned_cost: self.planned_cost,
            planned_duration: self.planned_duration,
            iterations: config.iterations,
            master_seed: seed,
        })
    }
}

fn clamp_nonnegative(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// A single run, compiling the inputs first.
pub fn simulate_run(
    network: &ProjectNetwork,
    register: &RiskRegister,
    run_index: u64,
    master_seed: u64,
) -> Result<RunOutcome, SimulationError> {
    Ok(SimulationPlan::compile(network, register)?.run(run_index, master_seed))
}

pub fn run_simulation(
    network: &ProjectNetwork,
    register: &RiskRegister,
    config: &SimulationConfig,
) -> Result<SimulationSummary, SimulationError> {
    if config.iterations == 0 {
        return Err(SimulationError::Config("iterations must be at least 1".into()));
    }
    SimulationPlan::compile(network, register)?.run_all(config)
}

/// `(aleatoric-only, full register)` under the same seed.
pub fn scenario_compare(
    network: &ProjectNetwork,
    register: &RiskRegister,
    config: &SimulationConfig,
) -> Result<(SimulationSummary, SimulationSummary), SimulationError> {
    let aleatoric = run_simulation(network, &register.aleatoric_only(), config)?;
    let full = run_simulation(network, register, config)?;
    Ok((aleatoric, full))
}
