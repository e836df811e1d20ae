//! Activity-on-node project networks and the CPM forward pass.
//!
//! Only earliest-start scheduling is modelled: the Monte Carlo driver needs
//! the project duration of every run, nothing from a backward pass.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::money::Cents;
use crate::sampling::DistributionSpec;

/// Default spread of the aleatoric lognormal around an activity's most likely duration.
pub const DEFAULT_DURATION_SIGMA: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Activity {
    pub id: String,
    pub name: String,
    pub predecessors: Vec<String>,
    /// Working days.
    pub planned_duration: f64,
    pub fixed_cost: Cents,
    /// Cost per working day.
    pub variable_cost_rate: Cents,
    /// Aleatoric variability of the realized duration.
    pub duration_model: DistributionSpec,
}

impl Activity {
    /// An activity whose duration model defaults to a lognormal with the
    /// planned duration as its mode.
    pub fn new(
        id: impl Into<String>,
        name: impl Into<String>,
        predecessors: &[&str],
        planned_duration: f64,
        fixed_cost: Cents,
        variable_cost_rate: Cents,
    ) -> Self {
        Activity {
            id: id.into(),
            name: name.into(),
            predecessors: predecessors.iter().map(|p| p.to_string()).collect(),
            planned_duration,
            fixed_cost,
            variable_cost_rate,
            duration_model: default_duration_model(planned_duration),
        }
    }

    pub fn with_duration_model(mut self, model: DistributionSpec) -> Self {
        self.duration_model = model;
        self
    }

    pub fn planned_cost(&self) -> Cents {
        self.cost_for(self.planned_duration)
    }

    /// Fixed cost plus variable cost accrued over `days`.
    pub fn cost_for(&self, days: f64) -> Cents {
        self.fixed_cost + Cents::variable_cost(self.variable_cost_rate, days)
    }
}

/// `LognormalMode(planned, 0.10)`, or a point mass at zero for milestones.
pub fn default_duration_model(planned_duration: f64) -> DistributionSpec {
    if planned_duration > 0.0 {
        DistributionSpec::LognormalMode {
            mode: planned_duration,
            sigma: DEFAULT_DURATION_SIGMA,
        }
    } else {
        DistributionSpec::PointMass { value: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ProjectNetwork {
    pub activities: Vec<Activity>,
}

/// A structural or numeric problem with a [`ProjectNetwork`].
#[derive(Debug, Clone, PartialEq)]
pub enum NetworkViolation {
    NoActivities,
    DuplicateId {
        id: String,
    },
    DanglingPredecessor {
        activity: String,
        predecessor: String,
    },
    /// One simple cycle, listed in traversal order.
    Cycle {
        activities: Vec<String>,
    },
    NegativeDuration {
        activity: String,
        value: f64,
    },
    NegativeCost {
        activity: String,
        field: &'static str,
        value: Cents,
    },
    InvalidDurationModel {
        activity: String,
        reason: String,
    },
}

impl NetworkViolation {
    /// Stable kebab-case code used in diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            NetworkViolation::NoActivities => "no-activities",
            NetworkViolation::DuplicateId { .. } => "duplicate-id",
            NetworkViolation::DanglingPredecessor { .. } => "dangling-reference",
            NetworkViolation::Cycle { .. } => "cycle",
            NetworkViolation::NegativeDuration { .. } => "negative-duration",
            NetworkViolation::NegativeCost { .. } => "negative-cost",
            NetworkViolation::InvalidDurationModel { .. } => "invalid-distribution",
        }
    }
}

impl fmt::Display for NetworkViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetworkViolation::NoActivities => write!(f, "project has no activities"),
            NetworkViolation::DuplicateId { id } => write!(f, "activity id `{id}` is defined more than once"),
            NetworkViolation::DanglingPredecessor { activity, predecessor } => {
                write!(f, "activity `{activity}` lists undefined predecessor `{predecessor}`")
            }
            NetworkViolation::Cycle { activities } => {
                write!(f, "precedence cycle: {} -> {}", activities.join(" -> "), activities[0])
            }
            NetworkViolation::NegativeDuration { activity, value } => {
                write!(f, "activity `{activity}` has invalid planned duration {value}")
            }
            NetworkViolation::NegativeCost { activity, field, value } => {
                write!(f, "activity `{activity}` has negative {field} {value}")
            }
            NetworkViolation::InvalidDurationModel { activity, reason } => {
                write!(f, "activity `{activity}` has an invalid duration model: {reason}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScheduleError {
    #[error("precedence cycle through {}", .0.join(" -> "))]
    Cycle(Vec<String>),
    #[error("activity `{activity}` lists undefined predecessor `{predecessor}`")]
    DanglingPredecessor { activity: String, predecessor: String },
    #[error("activity id `{0}` is defined more than once")]
    DuplicateId(String),
    #[error("no duration given for activity `{0}`")]
    MissingDuration(String),
    #[error("activity `{activity}` has invalid duration {value}")]
    InvalidDuration { activity: String, value: f64 },
}

impl ProjectNetwork {
    pub fn new(activities: Vec<Activity>) -> Self {
        ProjectNetwork { activities }
    }

    pub fn activity(&self, id: &str) -> Option<&Activity> {
        self.activities.iter().find(|a| a.id == id)
    }

    /// Σ fixed cost + Σ variable rate × planned duration, per activity in cents.
    pub fn planned_cost(&self) -> Cents {
        self.activities.iter().map(Activity::planned_cost).sum()
    }

    /// CPM project duration over the planned durations.
    pub fn planned_duration(&self) -> Result<f64, ScheduleError> {
        let durations: HashMap<&str, f64> = self
            .activities
            .iter()
            .map(|a| (a.id.as_str(), a.planned_duration))
            .collect();
        let graph = ScheduleGraph::build(self)?;
        let ordered: Vec<f64> = graph.ids.iter().map(|id| durations[id.as_str()]).collect();
        Ok(graph.project_duration(&ordered))
    }

    /// Every problem with the network; empty when it is valid.
    pub fn validate(&self) -> Vec<NetworkViolation> {
        validate_network(self)
    }
}

pub fn validate_network(network: &ProjectNetwork) -> Vec<NetworkViolation> {
    let mut report = Vec::new();
    if network.activities.is_empty() {
        report.push(NetworkViolation::NoActivities);
        return report;
    }

    let mut seen = BTreeSet::new();
    let mut reported_dup = BTreeSet::new();
    for a in &network.activities {
        if !seen.insert(a.id.as_str()) && reported_dup.insert(a.id.as_str()) {
            report.push(NetworkViolation::DuplicateId { id: a.id.clone() });
        }
    }

    for a in &network.activities {
        for p in &a.predecessors {
            if !seen.contains(p.as_str()) {
                report.push(NetworkViolation::DanglingPredecessor {
                    activity: a.id.clone(),
                    predecessor: p.clone(),
                });
            }
        }
        if !(a.planned_duration.is_finite() && a.planned_duration >= 0.0) {
            report.push(NetworkViolation::NegativeDuration {
                activity: a.id.clone(),
                value: a.planned_duration,
            });
        }
        if a.fixed_cost < Cents::ZERO {
            report.push(NetworkViolation::NegativeCost {
                activity: a.id.clone(),
                field: "fixed cost",
                value: a.fixed_cost,
            });
        }
        if a.variable_cost_rate < Cents::ZERO {
            report.push(NetworkViolation::NegativeCost {
                activity: a.id.clone(),
                field: "variable cost rate",
                value: a.variable_cost_rate,
            });
        }
        if let Err(e) = a.duration_model.validate() {
            report.push(NetworkViolation::InvalidDurationModel {
                activity: a.id.clone(),
                reason: e.to_string(),
            });
        }
    }

    for cycle in find_cycles(network) {
        report.push(NetworkViolation::Cycle { activities: cycle });
    }
    report
}

/// Adjacency over unique ids, ignoring dangling references.
fn predecessor_map(network: &ProjectNetwork) -> BTreeMap<&str, BTreeSet<&str>> {
    let mut preds: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for a in &network.activities {
        preds.entry(a.id.as_str()).or_default();
    }
    for a in &network.activities {
        for p in &a.predecessors {
            if preds.contains_key(p.as_str()) {
                preds.get_mut(a.id.as_str()).unwrap().insert(p.as_str());
            }
        }
    }
    preds
}

/// One simple cycle per strongly connected component that contains a cycle.
fn find_cycles(network: &ProjectNetwork) -> Vec<Vec<String>> {
    let preds = predecessor_map(network);
    let mut succs: BTreeMap<&str, BTreeSet<&str>> = preds.keys().map(|k| (*k, BTreeSet::new())).collect();
    for (node, ps) in &preds {
        for p in ps {
            succs.get_mut(p).unwrap().insert(node);
        }
    }

    let components = strongly_connected(&succs);
    let mut cycles = Vec::new();
    for component in components {
        let members: BTreeSet<&str> = component.iter().copied().collect();
        let start = *members.iter().next().unwrap();
        let self_loop = succs[start].contains(start);
        if members.len() == 1 && !self_loop {
            continue;
        }
        if members.len() == 1 {
            cycles.push(vec![start.to_string()]);
            continue;
        }
        cycles.push(cycle_within(start, &members, &succs));
    }
    cycles.sort();
    cycles
}

/// Walks smallest-id successors inside an SCC until a node repeats.
fn cycle_within(start: &str, members: &BTreeSet<&str>, succs: &BTreeMap<&str, BTreeSet<&str>>) -> Vec<String> {
    let mut path: Vec<&str> = vec![start];
    let mut position: HashMap<&str, usize> = HashMap::from([(start, 0)]);
    let mut current = start;
    loop {
        let next = succs[current]
            .iter()
            .copied()
            .find(|s| members.contains(s))
            .expect("every node of a cyclic SCC has a successor inside it");
        if let Some(&i) = position.get(next) {
            let mut cycle: Vec<String> = path[i..].iter().map(|s| s.to_string()).collect();
            // Rotate so the smallest id leads.
            let min_at = (0..cycle.len()).min_by_key(|&k| &cycle[k]).unwrap();
            cycle.rotate_left(min_at);
            return cycle;
        }
        position.insert(next, path.len());
        path.push(next);
        current = next;
    }
}

/// Tarjan's algorithm, iterative.
fn strongly_connected<'a>(succs: &BTreeMap<&'a str, BTreeSet<&'a str>>) -> Vec<Vec<&'a str>> {
    let nodes: Vec<&str> = succs.keys().copied().collect();
    let index_of: HashMap<&str, usize> = nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let adjacency: Vec<Vec<usize>> = nodes
        .iter()
        .map(|n| succs[n].iter().map(|s| index_of[s]).collect())
        .collect();

    let n = nodes.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut components = Vec::new();

    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut work: Vec<(usize, usize)> = vec![(root, 0)];
        while let Some(&mut (v, ref mut edge)) = work.last_mut() {
            if *edge == 0 && index[v] == usize::MAX {
                index[v] = next_index;
                low[v] = next_index;
                next_index += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if *edge < adjacency[v].len() {
                let w = adjacency[v][*edge];
                *edge += 1;
                if index[w] == usize::MAX {
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            work.pop();
            if let Some(&(parent, _)) = work.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut component = Vec::new();
                loop {
                    let w = stack.pop().unwrap();
                    on_stack[w] = false;
                    component.push(nodes[w]);
                    if w == v {
                        break;
                    }
                }
                components.push(component);
            }
        }
    }
    components
}

/// Kahn's algorithm with ties broken by ascending activity id.
pub fn topological_order(network: &ProjectNetwork) -> Result<Vec<String>, ScheduleError> {
    let mut seen = BTreeSet::new();
    for a in &network.activities {
        if !seen.insert(a.id.as_str()) {
            return Err(ScheduleError::DuplicateId(a.id.clone()));
        }
    }
    for a in &network.activities {
        if let Some(p) = a.predecessors.iter().find(|p| !seen.contains(p.as_str())) {
            return Err(ScheduleError::DanglingPredecessor {
                activity: a.id.clone(),
                predecessor: p.clone(),
            });
        }
    }

    let preds = predecessor_map(network);
    let mut remaining: BTreeMap<&str, usize> = preds.iter().map(|(k, v)| (*k, v.len())).collect();
    let mut succs: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (node, ps) in &preds {
        for p in ps {
            succs.entry(p).or_default().push(node);
        }
    }

    let mut ready: BTreeSet<&str> = remaining.iter().filter(|(_, &d)| d == 0).map(|(k, _)| *k).collect();
    let mut order = Vec::with_capacity(preds.len());
    while let Some(next) = ready.pop_first() {
        order.push(next.to_string());
        for s in succs.get(next).into_iter().flatten() {
            let d = remaining.get_mut(s).unwrap();
            *d -= 1;
            if *d == 0 {
                ready.insert(s);
            }
        }
    }

    if order.len() < preds.len() {
        let cycle = find_cycles(network).into_iter().next().unwrap_or_default();
        return Err(ScheduleError::Cycle(cycle));
    }
    Ok(order)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleResult {
    pub project_duration: f64,
    pub early_start: BTreeMap<String, f64>,
    pub early_finish: BTreeMap<String, f64>,
    pub critical_path: Vec<String>,
}

/// Earliest-start schedule for the given per-activity durations.
pub fn cpm_forward(
    network: &ProjectNetwork,
    durations: &HashMap<String, f64>,
) -> Result<ScheduleResult, ScheduleError> {
    let graph = ScheduleGraph::build(network)?;
    let mut ordered = Vec::with_capacity(graph.len());
    for id in &graph.ids {
        let d = *durations
            .get(id)
            .ok_or_else(|| ScheduleError::MissingDuration(id.clone()))?;
        if !(d.is_finite() && d >= 0.0) {
            return Err(ScheduleError::InvalidDuration {
                activity: id.clone(),
                value: d,
            });
        }
        ordered.push(d);
    }
    Ok(graph.schedule(&ordered))
}

/// A validated network compiled to index form in topological order.
///
/// Index `i` everywhere refers to `ids[i]`; predecessors always have smaller
/// indices than their successors.
#[derive(Debug, Clone)]
pub struct ScheduleGraph {
    ids: Vec<String>,
    predecessors: Vec<Vec<usize>>,
    successors: Vec<Vec<usize>>,
}

impl ScheduleGraph {
    pub fn build(network: &ProjectNetwork) -> Result<Self, ScheduleError> {
        let ids = topological_order(network)?;
        let position: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        let mut predecessors = vec![Vec::new(); ids.len()];
        let mut successors = vec![Vec::new(); ids.len()];
        for a in &network.activities {
            let i = position[a.id.as_str()];
            let mut ps: Vec<usize> = a.predecessors.iter().map(|p| position[p.as_str()]).collect();
            ps.sort_unstable();
            ps.dedup();
            for &p in &ps {
                successors[p].push(i);
            }
            predecessors[i] = ps;
        }
        for s in &mut successors {
            s.sort_unstable_by(|a, b| ids[*a].cmp(&ids[*b]));
        }
        Ok(ScheduleGraph {
            ids,
            predecessors,
            successors,
        })
    }

    /// Activity ids in topological order.
    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    /// Early finish times; `durations` is indexed like [`Self::ids`].
    fn early_finish(&self, durations: &[f64], finish: &mut Vec<f64>) {
        finish.clear();
        for (i, &d) in durations.iter().enumerate() {
            let start = self.predecessors[i].iter().map(|&p| finish[p]).fold(0.0, f64::max);
            finish.push(start + d);
        }
    }

    /// Project duration only; the hot path of the simulation.
    pub fn project_duration(&self, durations: &[f64]) -> f64 {
        let mut finish = Vec::with_capacity(durations.len());
        self.early_finish(durations, &mut finish);
        finish.iter().copied().fold(0.0, f64::max)
    }

    pub fn schedule(&self, durations: &[f64]) -> ScheduleResult {
        assert_eq!(durations.len(), self.ids.len());
        let mut finish = Vec::with_capacity(durations.len());
        self.early_finish(durations, &mut finish);
        let start: Vec<f64> = (0..self.len())
            .map(|i| self.predecessors[i].iter().map(|&p| finish[p]).fold(0.0, f64::max))
            .collect();
        let project_duration = finish.iter().copied().fold(0.0, f64::max);
        let critical_path = self.critical_path(&start, &finish, project_duration);

        ScheduleResult {
            project_duration,
            early_start: self.ids.iter().cloned().zip(start).collect(),
            early_finish: self.ids.iter().cloned().zip(finish).collect(),
            critical_path,
        }
    }

    /// Lexicographically smallest source-to-sink path of maximal length.
    ///
    /// Edge `v -> w` is tight when `early_finish[v] == early_start[w]`; maximal
    /// paths are exactly the tight chains from a source to a sink finishing at
    /// the project duration.
    fn critical_path(&self, start: &[f64], finish: &[f64], project_duration: f64) -> Vec<String> {
        let n = self.len();
        let tight = |v: usize, w: usize| finish[v] == start[w];
        let mut completes = vec![false; n];
        for v in (0..n).rev() {
            completes[v] = if self.successors[v].is_empty() {
                finish[v] == project_duration
            } else {
                self.successors[v].iter().any(|&w| tight(v, w) && completes[w])
            };
        }

        let Some(mut current) = (0..n)
            .filter(|&v| self.predecessors[v].is_empty() && completes[v])
            .min_by(|a, b| self.ids[*a].cmp(&self.ids[*b]))
        else {
            return Vec::new();
        };
        let mut path = vec![self.ids[current].clone()];
        while let Some(&next) = self.successors[current]
            .iter()
            .find(|&&w| tight(current, w) && completes[w])
        {
            path.push(self.ids[next].clone());
            current = next;
        }
        path
    }
}
