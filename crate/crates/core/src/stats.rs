//! Output statistics: moments, percentiles and contingency reserves.
//!
//! Percentiles use linear interpolation between order statistics at the
//! fractional rank `r = (q / 100) * (n - 1)`. Cent-valued percentiles round
//! the interpolated offset half-to-even so they stay exact integers.
//! Variance is the population variance (divide by `n`).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::SimulationSummary;
use crate::money::Cents;

pub const PERCENTILE_ESTIMATOR: &str = "linear interpolation at rank (q/100)(n-1)";
pub const VARIANCE_ESTIMATOR: &str = "population variance (divide by n)";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("no samples")]
    Empty,
    #[error("percentile {0} is outside [0, 100]")]
    Percent(f64),
    #[error("samples contain NaN")]
    NotANumber,
}

/// A sample value that percentiles can interpolate.
pub trait SampleValue: Copy + PartialOrd {
    fn to_f64(self) -> f64;
    /// The value a fraction `frac` in [0, 1] of the way from `lo` to `hi`.
    fn interpolate(lo: Self, hi: Self, frac: f64) -> Self;
}

impl SampleValue for f64 {
    fn to_f64(self) -> f64 {
        self
    }

    fn interpolate(lo: f64, hi: f64, frac: f64) -> f64 {
        if frac == 0.0 {
            lo
        } else {
            lo + (hi - lo) * frac
        }
    }
}

impl SampleValue for Cents {
    fn to_f64(self) -> f64 {
        self.as_f64()
    }

    fn interpolate(lo: Cents, hi: Cents, frac: f64) -> Cents {
        lo + Cents::round_from_f64((hi - lo).as_f64() * frac)
    }
}

/// A nonempty, ascending sample vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedSamples<T> {
    values: Vec<T>,
}

impl<T: SampleValue> SortedSamples<T> {
    /// Sorts `values`; fails on an empty vector or NaN.
    pub fn new(mut values: Vec<T>) -> Result<Self, StatsError> {
        if values.is_empty() {
            return Err(StatsError::Empty);
        }
        if values.iter().any(|v| v.partial_cmp(v).is_none()) {
            return Err(StatsError::NotANumber);
        }
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(SortedSamples { values })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min(&self) -> T {
        self.values[0]
    }

    pub fn max(&self) -> T {
        self.values[self.values.len() - 1]
    }

    pub fn percentile(&self, q: f64) -> Result<T, StatsError> {
        percentile(&self.values, q)
    }

    pub fn percentile_of(&self, value: T) -> f64 {
        percentile_of(&self.values, value)
    }
}

/// Arithmetic mean and population variance.
pub fn summary_stats<T: SampleValue>(samples: &[T]) -> Result<(f64, f64), StatsError> {
    if samples.is_empty() {
        return Err(StatsError::Empty);
    }
    let first = samples[0].to_f64();
    if samples.iter().all(|v| v.to_f64() == first) {
        return Ok((first, 0.0));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().map(|v| v.to_f64()).sum::<f64>() / n;
    let variance = samples.iter().map(|v| (v.to_f64() - mean).powi(2)).sum::<f64>() / n;
    Ok((mean, variance))
}

/// Mean and population variance of cent values, with an exact integer mean sum.
pub fn cost_stats(samples: &[Cents]) -> Result<(f64, f64), StatsError> {
    if samples.is_empty() {
        return Err(StatsError::Empty);
    }
    let n = samples.len() as i128;
    let sum: i128 = samples.iter().map(|c| c.0 as i128).sum();
    let mean = sum as f64 / n as f64;
    // Σ(x - x̄)² = (n Σx² - (Σx)²) / n, exact in i128 for realistic budgets.
    let sum_sq: i128 = samples.iter().map(|c| (c.0 as i128).pow(2)).sum();
    let numerator = n * sum_sq - sum * sum;
    let variance = numerator as f64 / (n * n) as f64;
    Ok((mean, variance))
}

/// Interpolated percentile of an ascending sample vector.
pub fn percentile<T: SampleValue>(sorted: &[T], q: f64) -> Result<T, StatsError> {
    if sorted.is_empty() {
        return Err(StatsError::Empty);
    }
    if !(0.0..=100.0).contains(&q) {
        return Err(StatsError::Percent(q));
    }
    let last = sorted.len() - 1;
    let rank = q / 100.0 * last as f64;
    let index = rank.floor() as usize;
    if index >= last {
        return Ok(sorted[last]);
    }
    let frac = rank - index as f64;
    Ok(T::interpolate(sorted[index], sorted[index + 1], frac))
}

/// Largest `q` with `percentile(q) <= value`, by inverting the interpolation.
///
/// Values below the minimum map to 0 and values at or above the maximum to 100.
pub fn percentile_of<T: SampleValue>(sorted: &[T], value: T) -> f64 {
    let n = sorted.len();
    if n == 0 || value < sorted[0] {
        return 0.0;
    }
    if value >= sorted[n - 1] {
        return 100.0;
    }
    // sorted[i] <= value < sorted[i + 1]
    let i = sorted.partition_point(|s| *s <= value) - 1;
    let lo = sorted[i].to_f64();
    let hi = sorted[i + 1].to_f64();
    let rank = i as f64 + (value.to_f64() - lo) / (hi - lo);
    (100.0 * rank / (n - 1) as f64).clamp(0.0, 100.0)
}

/// The 5-point grid `5, 10, ..., 100` merged with extra requested points.
pub fn percentile_grid(extra: &[f64]) -> Vec<f64> {
    let mut grid: Vec<f64> = (1..=20).map(|k| 5.0 * k as f64).collect();
    grid.extend_from_slice(extra);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercentileTable {
    /// `(q, cost)`, q strictly increasing.
    pub entries: Vec<(f64, Cents)>,
}

pub fn percentile_table(costs: &SortedSamples<Cents>, qs: &[f64]) -> Result<PercentileTable, StatsError> {
    let mut qs = qs.to_vec();
    qs.sort_by(f64::total_cmp);
    qs.dedup();
    let entries = qs
        .into_iter()
        .map(|q| Ok((q, costs.percentile(q)?)))
        .collect::<Result<_, StatsError>>()?;
    Ok(PercentileTable { entries })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContingencyRow {
    pub percentile: f64,
    pub cost: Cents,
    pub reserve: Cents,
}

impl ContingencyRow {
    pub fn new(percentile: f64, cost: Cents, planned_cost: Cents) -> Self {
        ContingencyRow {
            percentile,
            cost,
            reserve: cost - planned_cost,
        }
    }
}

/// The "fixed percentage of the planned cost" reserve and where it lands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub percentage: f64,
    pub reserve: Cents,
    pub target_cost: Cents,
    pub resulting_percentile: f64,
}

impl BenchmarkRow {
    /// `reserve = percentage × planned` to the cent, `target = planned + reserve`.
    pub fn exact(planned_cost: Cents, percentage: f64, costs: &SortedSamples<Cents>) -> Self {
        let reserve = planned_cost.percent(percentage);
        let target_cost = planned_cost + reserve;
        BenchmarkRow {
            percentage,
            reserve,
            target_cost,
            resulting_percentile: costs.percentile_of(target_cost),
        }
    }

    /// Same rule with the target rounded to whole currency units.
    pub fn whole_units(planned_cost: Cents, percentage: f64, costs: &SortedSamples<Cents>) -> Self {
        let reserve = planned_cost.percent(percentage);
        let target_cost = (planned_cost + reserve).round_to_units();
        BenchmarkRow {
            percentage,
            reserve,
            target_cost,
            resulting_percentile: costs.percentile_of(target_cost),
        }
    }
}

/// Reserves recomputed against the planned cost truncated to whole units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WholeUnitReference {
    pub planned_cost: Cents,
    pub planned_cost_percentile: f64,
    pub rows: Vec<ContingencyRow>,
    pub benchmark: Option<BenchmarkRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContingencyReport {
    pub planned_cost: Cents,
    pub planned_cost_percentile: f64,
    /// Ordered by percentile.
    pub rows: Vec<ContingencyRow>,
    pub benchmark: Option<BenchmarkRow>,
    pub whole_unit: Option<WholeUnitReference>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ContingencyRequest {
    pub percentiles: Vec<f64>,
    /// e.g. `10.0` for a 10% reserve.
    pub benchmark_percentage: Option<f64>,
    pub whole_unit_reference: bool,
}

pub fn contingency_report(
    summary: &SimulationSummary,
    request: &ContingencyRequest,
) -> Result<ContingencyReport, StatsError> {
    let costs = SortedSamples::new(summary.outcomes.iter().map(|o| o.total_cost).collect())?;
    contingency_report_from_costs(&costs, summary.planned_cost, request)
}

pub fn contingency_report_from_costs(
    costs: &SortedSamples<Cents>,
    planned_cost: Cents,
    request: &ContingencyRequest,
) -> Result<ContingencyReport, StatsError> {
    let mut qs = request.percentiles.clone();
    if let Some(bad) = qs.iter().find(|q| !(0.0..=100.0).contains(*q)) {
        return Err(StatsError::Percent(*bad));
    }
    qs.sort_by(f64::total_cmp);
    qs.dedup();
    let percentile_costs: Vec<(f64, Cents)> = qs
        .iter()
        .map(|&q| Ok((q, costs.percentile(q)?)))
        .collect::<Result<_, StatsError>>()?;

    let rows_against = |planned: Cents| -> Vec<ContingencyRow> {
        percentile_costs
            .iter()
            .map(|&(q, c)| ContingencyRow::new(q, c, planned))
            .collect()
    };

    let whole_unit = request.whole_unit_reference.then(|| {
        let planned = planned_cost.truncate_to_units();
        WholeUnitReference {
            planned_cost: planned,
            planned_cost_percentile: costs.percentile_of(planned),
            rows: rows_against(planned),
            benchmark: request
                .benchmark_percentage
                .map(|p| BenchmarkRow::whole_units(planned, p, costs)),
        }
    });

    Ok(ContingencyReport {
        planned_cost,
        planned_cost_percentile: costs.percentile_of(planned_cost),
        rows: rows_against(planned_cost),
        benchmark: request
            .benchmark_percentage
            .map(|p| BenchmarkRow::exact(planned_cost, p, costs)),
        whole_unit,
    })
}
