#![allow(dead_code)]

use std::collections::HashMap;

use contingo_core::{Activity, Cents, ProjectNetwork};
use proptest::prelude::*;

/// A random DAG: node `k` may depend on any node created before it; ids are
/// shuffled so that id order and topological order disagree.
#[derive(Debug, Clone)]
pub struct RandomDag {
    pub network: ProjectNetwork,
    pub durations: HashMap<String, f64>,
}

pub fn random_dag(min_nodes: usize, max_nodes: usize) -> impl Strategy<Value = RandomDag> {
    (min_nodes..=max_nodes)
        .prop_flat_map(|n| {
            let pairs = n * (n - 1) / 2;
            (
                Just(n),
                proptest::collection::vec(proptest::bool::weighted(0.35), pairs),
                proptest::collection::vec(0.0f64..50.0, n),
                Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
            )
        })
        .prop_map(|(n, edges, durations, labels)| {
            let id = |k: usize| format!("T{:02}", labels[k]);
            let mut edge = edges.into_iter();
            let mut activities = Vec::with_capacity(n);
            for (j, &duration) in durations.iter().enumerate().take(n) {
                let mut preds = Vec::new();
                for i in 0..j {
                    if edge.next().unwrap() {
                        preds.push(id(i));
                    }
                }
                let mut a = Activity::new(id(j), id(j), &[], duration, Cents(100), Cents(10));
                a.predecessors = preds;
                activities.push(a);
            }
            let durations = (0..n).map(|k| (id(k), durations[k])).collect();
            RandomDag {
                network: ProjectNetwork::new(activities),
                durations,
            }
        })
}

/// Longest source-to-sink path by enumerating every path.
pub fn longest_path_by_enumeration(network: &ProjectNetwork, durations: &HashMap<String, f64>) -> f64 {
    let mut successors: HashMap<&str, Vec<&str>> = HashMap::new();
    for a in &network.activities {
        for p in &a.predecessors {
            successors.entry(p.as_str()).or_default().push(a.id.as_str());
        }
    }
    fn walk(node: &str, sum: f64, succ: &HashMap<&str, Vec<&str>>, d: &HashMap<String, f64>, best: &mut f64) {
        let sum = sum + d[node];
        match succ.get(node) {
            Some(next) if !next.is_empty() => {
                for n in next {
                    walk(n, sum, succ, d, best);
                }
            }
            _ => *best = best.max(sum),
        }
    }
    let mut best = 0.0;
    for a in network.activities.iter().filter(|a| a.predecessors.is_empty()) {
        walk(&a.id, 0.0, &successors, durations, &mut best);
    }
    best
}

use contingo_core::risk::Scale;
use contingo_core::ScaleSet;
use contingo_core::{DistributionSpec, ImpactModel, OccurrenceModel, Polarity, Risk, RiskRegister, RiskTargets};

/// Probability and impact levels with the project-specific bounds used
/// throughout the tests (cost levels in cents, open-ended levels closed).
pub fn level_scales() -> ScaleSet {
    ScaleSet {
        probability: Scale::new([
            ("VL", 0.0, 0.05),
            ("L", 0.05, 0.12),
            ("M", 0.12, 0.20),
            ("H", 0.20, 0.35),
            ("VH", 0.35, 1.0),
        ]),
        duration_impact: Scale::new([
            ("VL", 0.0, 5.0),
            ("L", 5.0, 20.0),
            ("M", 20.0, 40.0),
            ("H", 40.0, 65.0),
            ("VH", 65.0, 100.0),
        ]),
        cost_impact: Scale::new([
            ("VL", 0.0, 300_000.0),
            ("L", 300_000.0, 1_000_000.0),
            ("M", 1_000_000.0, 2_500_000.0),
            ("H", 2_500_000.0, 6_000_000.0),
            ("VH", 6_000_000.0, 9_300_000.0),
        ]),
    }
}

pub fn small_network() -> ProjectNetwork {
    ProjectNetwork::new(vec![
        Activity::new(
            "A1",
            "site",
            &[],
            20.0,
            Cents::from_units(50_000),
            Cents::from_units(800),
        ),
        Activity::new(
            "A2",
            "frame",
            &["A1"],
            45.0,
            Cents::from_units(300_000),
            Cents::from_units(1_500),
        ),
        Activity::new(
            "A3",
            "services",
            &["A1"],
            30.0,
            Cents::from_units(120_000),
            Cents::from_units(900),
        ),
        Activity::new(
            "A4",
            "envelope",
            &["A2"],
            25.0,
            Cents::from_units(200_000),
            Cents::from_units(1_100),
        ),
        Activity::new(
            "A5",
            "fit-out",
            &["A3", "A4"],
            35.0,
            Cents::from_units(150_000),
            Cents::from_units(1_000),
        ),
    ])
}

pub fn targets(ids: &[&str]) -> RiskTargets {
    RiskTargets::Activities(ids.iter().map(|s| s.to_string()).collect())
}

pub fn level(level: &str, polarity: Polarity) -> ImpactModel {
    ImpactModel::Level {
        level: level.into(),
        polarity,
    }
}

pub fn explicit(distribution: DistributionSpec, polarity: Polarity) -> ImpactModel {
    ImpactModel::Explicit { distribution, polarity }
}

/// One risk of every occurrence kind, both polarities, a project-wide risk.
pub fn mixed_register() -> RiskRegister {
    use Polarity::*;
    RiskRegister::new(
        vec![
            Risk {
                id: "R1".into(),
                name: "labour".into(),
                occurrence: OccurrenceModel::Always,
                targets: targets(&["A2", "A4"]),
                duration_impact: explicit(DistributionSpec::triangular(-5.0, 2.0, 10.0), Threat),
                cost_impact: ImpactModel::None,
            },
            Risk {
                id: "R2".into(),
                name: "ground".into(),
                occurrence: OccurrenceModel::EpistemicLevel("M".into()),
                targets: targets(&["A1"]),
                duration_impact: level("L", Threat),
                cost_impact: level("M", Threat),
            },
            Risk {
                id: "R3".into(),
                name: "paperwork".into(),
                occurrence: OccurrenceModel::EventProb(0.25),
                targets: targets(&["A3", "A5"]),
                duration_impact: explicit(DistributionSpec::uniform(0.0, 10.0), Threat),
                cost_impact: level("L", Threat),
            },
            Risk {
                id: "R4".into(),
                name: "accident".into(),
                occurrence: OccurrenceModel::EpistemicLevel("VL".into()),
                targets: RiskTargets::EntireProject,
                duration_impact: level("VL", Threat),
                cost_impact: level("H", Threat),
            },
            Risk {
                id: "R5".into(),
                name: "regulation".into(),
                occurrence: OccurrenceModel::EpistemicLevel("H".into()),
                targets: targets(&["A5"]),
                duration_impact: explicit(DistributionSpec::triangular(7.0, 10.0, 20.0), Opportunity),
                cost_impact: level("VL", Opportunity),
            },
        ],
        level_scales(),
    )
}
