//! Summary statistics, contingency reserves and the two report renderings.
//!
//! Both renderings are produced from one list of [`Entry`] values, so the
//! human report and the machine report always carry the same digits.

use std::fmt::Write as _;

use contingo_core::stats::{
    cost_stats, summary_stats, ContingencyReport, ContingencyRequest, SortedSamples, StatsError, PERCENTILE_ESTIMATOR,
    VARIANCE_ESTIMATOR,
};
use contingo_core::{Cents, SimulationSummary};

use crate::output::{Cell, Format, Metadata, Table};

pub const TOOL: &str = concat!("contingo ", env!("CARGO_PKG_VERSION"));

/// Statistics of one simulated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioStats {
    pub costs: SortedSamples<Cents>,
    pub durations: SortedSamples<f64>,
    /// Mean cost rounded to the cent.
    pub cost_mean: Cents,
    /// Population variance in currency units squared.
    pub cost_variance: f64,
    pub duration_mean: f64,
    pub duration_variance: f64,
    pub contingency: ContingencyReport,
}

impl ScenarioStats {
    pub fn new(summary: &SimulationSummary, request: &ContingencyRequest) -> Result<Self, StatsError> {
        let costs = SortedSamples::new(summary.outcomes.iter().map(|o| o.total_cost).collect())?;
        let durations = SortedSamples::new(summary.outcomes.iter().map(|o| o.total_duration).collect())?;
        let (mean_cents, var_cents) = cost_stats(costs.values())?;
        let (duration_mean, duration_variance) = summary_stats(durations.values())?;
        let contingency = contingo_core::stats::contingency_report_from_costs(&costs, summary.planned_cost, request)?;
        Ok(ScenarioStats {
            costs,
            durations,
            cost_mean: Cents::round_from_f64(mean_cents),
            cost_variance: var_cents / 1e4,
            duration_mean,
            duration_variance,
            contingency,
        })
    }

    /// `P95 - P5` of total cost.
    pub fn cost_spread(&self) -> Cents {
        self.costs.percentile(95.0).unwrap() - self.costs.percentile(5.0).unwrap()
    }
}

/// Everything a report needs: the full register and, optionally, the
/// aleatoric-only scenario run under the same seed.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub planned_cost: Cents,
    pub planned_duration: f64,
    pub iterations: u64,
    pub master_seed: u64,
    pub full: ScenarioStats,
    pub aleatoric: Option<ScenarioStats>,
}

impl Analysis {
    pub fn new(
        full: &SimulationSummary,
        aleatoric: Option<&SimulationSummary>,
        request: &ContingencyRequest,
    ) -> Result<Self, StatsError> {
        Ok(Analysis {
            planned_cost: full.planned_cost,
            planned_duration: full.planned_duration,
            iterations: full.iterations,
            master_seed: full.master_seed,
            full: ScenarioStats::new(full, request)?,
            aleatoric: aleatoric.map(|s| ScenarioStats::new(s, request)).transpose()?,
        })
    }

    pub fn metadata(&self) -> Metadata {
        Metadata(vec![
            ("tool".into(), TOOL.into()),
            ("seed".into(), self.master_seed.to_string()),
            ("iterations".into(), self.iterations.to_string()),
            ("percentile_estimator".into(), PERCENTILE_ESTIMATOR.into()),
            ("variance_estimator".into(), VARIANCE_ESTIMATOR.into()),
            ("cost_unit".into(), "currency units with two decimals".into()),
            ("duration_unit".into(), "working days".into()),
        ])
    }
}

/// One reported number.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub section: &'static str,
    pub key: String,
    pub label: String,
    pub value: String,
}

/// Percent values such as `70` or `62.5`, as used in keys and labels.
fn q_text(q: f64) -> String {
    format!("{q}")
}

struct Builder {
    entries: Vec<Entry>,
    section: &'static str,
    prefix: &'static str,
}

impl Builder {
    fn add(&mut self, key: &str, label: impl Into<String>, value: impl ToString) {
        self.entries.push(Entry {
            section: self.section,
            key: format!("{}{key}", self.prefix),
            label: label.into(),
            value: value.to_string(),
        });
    }

    fn scenario(&mut self, s: &ScenarioStats) {
        self.add("cost_mean", "mean cost", s.cost_mean);
        self.add("cost_variance", "cost variance", s.cost_variance);
        self.add("cost_std_dev", "cost standard deviation", s.cost_variance.sqrt());
        self.add("cost_min", "minimum cost", s.costs.min());
        self.add("cost_max", "maximum cost", s.costs.max());
        self.add("cost_spread_p5_p95", "cost spread P5 to P95", s.cost_spread());
        self.add("duration_mean", "mean duration", s.duration_mean);
        self.add("duration_variance", "duration variance", s.duration_variance);
        self.add(
            "duration_std_dev",
            "duration standard deviation",
            s.duration_variance.sqrt(),
        );
        self.add("duration_min", "minimum duration", s.durations.min());
        self.add("duration_max", "maximum duration", s.durations.max());
    }

    fn contingency(&mut self, c: &ContingencyReport) {
        self.add(
            "planned_cost_percentile",
            "percentile of planned cost",
            c.planned_cost_percentile,
        );
        for row in &c.rows {
            let q = q_text(row.percentile);
            self.add(&format!("p{q}_cost"), format!("P{q} cost"), row.cost);
            self.add(&format!("p{q}_reserve"), format!("P{q} reserve"), row.reserve);
        }
        if let Some(b) = &c.benchmark {
            self.add("benchmark_percentage", "benchmark percentage", b.percentage);
            self.add("benchmark_reserve", "benchmark reserve", b.reserve);
            self.add("benchmark_target_cost", "benchmark target cost", b.target_cost);
            self.add(
                "benchmark_percentile",
                "percentile of benchmark target",
                b.resulting_percentile,
            );
        }
    }
}

pub fn entries(analysis: &Analysis) -> Vec<Entry> {
    let mut b = Builder {
        entries: Vec::new(),
        section: "Plan",
        prefix: "",
    };
    b.add("planned_cost", "planned cost", analysis.planned_cost);
    b.add("planned_duration", "planned duration", analysis.planned_duration);

    b.section = "Simulated totals";
    b.scenario(&analysis.full);

    b.section = "Contingency reserves";
    b.contingency(&analysis.full.contingency);

    if let Some(w) = &analysis.full.contingency.whole_unit {
        b.section = "Whole-unit reference";
        b.prefix = "whole_unit_";
        b.add("planned_cost", "planned cost (whole units)", w.planned_cost);
        b.add(
            "planned_cost_percentile",
            "percentile of planned cost",
            w.planned_cost_percentile,
        );
        for row in &w.rows {
            let q = q_text(row.percentile);
            b.add(&format!("p{q}_reserve"), format!("P{q} reserve"), row.reserve);
        }
        if let Some(bm) = &w.benchmark {
            b.add("benchmark_reserve", "benchmark reserve", bm.reserve);
            b.add(
                "benchmark_target_cost",
                "benchmark target cost (whole units)",
                bm.target_cost,
            );
            b.add(
                "benchmark_percentile",
                "percentile of benchmark target",
                bm.resulting_percentile,
            );
        }
    }

    if let Some(a) = &analysis.aleatoric {
        b.section = "Aleatoric-only scenario";
        b.prefix = "aleatoric_";
        b.scenario(a);
        b.contingency(&a.contingency);
    }
    b.entries
}

/// `key,value` rows (or the JSON equivalent).
pub fn machine_report(analysis: &Analysis, format: Format) -> String {
    let mut table = Table::new(&["key", "value"]);
    for e in entries(analysis) {
        table.push(vec![Cell::Text(e.key), Cell::Num(e.value)]);
    }
    table.render(format, &analysis.metadata())
}

pub fn human_report(analysis: &Analysis) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{TOOL} cost contingency report");
    for (k, v) in &analysis.metadata().0[1..] {
        let _ = writeln!(out, "{}: {v}", k.replace('_', " "));
    }
    let entries = entries(analysis);
    let width = entries.iter().map(|e| e.label.len()).max().unwrap_or(0);
    let mut section = "";
    for e in &entries {
        if e.section != section {
            section = e.section;
            let _ = writeln!(out, "\n{section}");
        }
        let _ = writeln!(out, "  {:<width$}  {}", e.label, e.value);
    }
    out
}
