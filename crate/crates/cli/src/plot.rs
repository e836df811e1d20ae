//! Plot data: cost histogram, cost and duration ECDFs, time-cost scatter,
//! percentile grid and the aleatoric/full comparison.

use contingo_core::stats::{percentile_grid, SortedSamples};
use contingo_core::{Cents, SimulationSummary};

use crate::output::{Cell, Table};
use crate::report::ScenarioStats;

/// Sturges' rule: `ceil(log2 n) + 1` bins.
pub fn sturges_bins(n: usize) -> usize {
    if n <= 1 {
        1
    } else {
        (n as f64).log2().ceil() as usize + 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bin {
    pub lo: Cents,
    pub hi: Cents,
    pub count: usize,
}

/// Equal-width bins on whole-cent edges. Bins are half-open except the last,
/// which also holds the maximum. A constant sample gives one bin.
pub fn histogram(costs: &SortedSamples<Cents>, bins: Option<usize>) -> Vec<Bin> {
    let values = costs.values();
    let (min, max) = (costs.min(), costs.max());
    if min == max {
        return vec![Bin {
            lo: min,
            hi: max,
            count: values.len(),
        }];
    }
    let k = bins.unwrap_or_else(|| sturges_bins(values.len())).max(1) as i64;
    let span = max.0 - min.0;
    let width = (span + k - 1) / k;
    let mut out: Vec<Bin> = (0..k)
        .map(|i| Bin {
            lo: Cents(min.0 + i * width),
            hi: Cents(min.0 + (i + 1) * width),
            count: 0,
        })
        .collect();
    for v in values {
        let i = (((v.0 - min.0) / width) as usize).min(out.len() - 1);
        out[i].count += 1;
    }
    out
}

pub fn histogram_table(costs: &SortedSamples<Cents>, bins: Option<usize>) -> Table {
    let mut t = Table::new(&["bin_lo", "bin_hi", "count"]);
    for b in histogram(costs, bins) {
        t.push(vec![Cell::num(b.lo), Cell::num(b.hi), Cell::num(b.count)]);
    }
    t
}

/// `(value, fraction of samples <= value)` at each distinct value.
pub fn ecdf<T: Copy + PartialEq>(sorted: &[T]) -> Vec<(T, f64)> {
    let n = sorted.len() as f64;
    let mut out = Vec::new();
    for (i, v) in sorted.iter().enumerate() {
        if sorted.get(i + 1) != Some(v) {
            out.push((*v, (i + 1) as f64 / n));
        }
    }
    out
}

pub fn ecdf_table(stats: &ScenarioStats) -> Table {
    let mut t = Table::new(&["series", "value", "fraction"]);
    for (v, f) in ecdf(stats.costs.values()) {
        t.push(vec![Cell::Text("cost".into()), Cell::num(v), Cell::num(f)]);
    }
    for (v, f) in ecdf(stats.durations.values()) {
        t.push(vec![Cell::Text("duration".into()), Cell::num(v), Cell::num(f)]);
    }
    t
}

pub fn scatter_table(summary: &SimulationSummary) -> Table {
    let mut t = Table::new(&["run_index", "duration", "cost"]);
    for o in &summary.outcomes {
        t.push(vec![
            Cell::num(o.run_index),
            Cell::num(o.total_duration),
            Cell::num(o.total_cost),
        ]);
    }
    t
}

pub fn percentile_table(stats: &ScenarioStats, requested: &[f64]) -> Table {
    let mut t = Table::new(&["q", "cost"]);
    for q in percentile_grid(requested) {
        t.push(vec![Cell::num(q), Cell::num(stats.costs.percentile(q).unwrap())]);
    }
    t
}

/// Cost percentiles of both scenarios side by side.
pub fn comparison_table(aleatoric: &ScenarioStats, full: &ScenarioStats, requested: &[f64]) -> Table {
    let mut t = Table::new(&["q", "aleatoric_cost", "full_cost"]);
    for q in percentile_grid(requested) {
        t.push(vec![
            Cell::num(q),
            Cell::num(aleatoric.costs.percentile(q).unwrap()),
            Cell::num(full.costs.percentile(q).unwrap()),
        ]);
    }
    t
}
