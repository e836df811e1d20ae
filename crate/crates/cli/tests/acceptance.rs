//! Acceptance suite: one `[PASS]`/`[FAIL]` line per criterion, each checked
//! against its tolerance and runtime limit. Exits non-zero if any fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod common;

use std::collections::HashMap;
use std::panic;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use contingo_core::risk::{ImpactModel, OccurrenceModel, Polarity, Risk, RiskRegister, RiskTargets, Scale, ScaleSet};
use contingo_core::schedule::{Activity, ProjectNetwork};
use contingo_core::stats::{
    cost_stats, percentile, percentile_of, BenchmarkRow, ContingencyRequest, ContingencyRow, SortedSamples,
};
use contingo_core::{
    cpm_forward, run_simulation, scenario_compare, simulate_run, Cents, DistributionSpec, RngStream, SimulationConfig,
};

type Check = fn() -> Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn main() -> ExitCode {
    let criteria: [(&str, &str, Duration, Check); 10] = [
        (
            "AC1",
            "contingency reserves exact to the cent",
            secs(1),
            ac1_contingency_arithmetic,
        ),
        (
            "AC2",
            "10% benchmark reserve and whole-unit target",
            secs(1),
            ac2_benchmark_row,
        ),
        (
            "AC3",
            "CPM equals path enumeration on 200 random DAGs",
            secs(10),
            ac3_cpm_oracle,
        ),
        (
            "AC4",
            "four-outcome enumeration within 4 standard errors",
            secs(30),
            ac4_enumeration_oracle,
        ),
        ("AC5", "sampler moments", secs(30), ac5_sampler_moments),
        (
            "AC6",
            "two-stage epistemic occurrence frequency",
            secs(30),
            ac6_epistemic_two_stage,
        ),
        ("AC7", "determinism and parallel equivalence", secs(60), ac7_determinism),
        ("AC8", "zero-risk plan collapses to the plan", secs(10), ac8_zero_risk),
        ("AC9", "percentile properties", secs(10), ac9_percentile_properties),
        ("AC10", "case-study distribution shape", secs(60), ac10_case_study_shape),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (id, title, limit, check) in criteria {
        let start = Instant::now();
        let result = panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let elapsed = start.elapsed();
        let result = result.and_then(|()| {
            if elapsed < limit {
                Ok(())
            } else {
                Err(format!("took {elapsed:.2?}, limit {limit:?}"))
            }
        });
        match result {
            Ok(()) => println!("[PASS] {id} {title} ({elapsed:.2?})"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {id} {title} ({elapsed:.2?}): {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn units(s: &str) -> Cents {
    let (u, c) = s.split_once('.').unwrap();
    Cents::new(u.parse().unwrap(), c.parse().unwrap())
}

fn ac1_contingency_arithmetic() -> Result<(), String> {
    let planned = units("3935888.00");
    let cases = [
        ("4118122.44", "182234.44"),
        ("4146100.99", "210212.99"),
        ("4228488.39", "292600.39"),
    ];
    for (cost, reserve) in cases {
        let row = ContingencyRow::new(70.0, units(cost), planned);
        ensure!(
            row.reserve == units(reserve),
            "{cost} - planned gave {}, expected {reserve}",
            row.reserve
        );
    }
    // The same numbers through the report: with 11 samples P70, P80 and P90
    // are exactly the 8th, 9th and 10th order statistics.
    let mut samples: Vec<Cents> = (0..11).map(|i| units("4000000.00") + Cents(i * 100)).collect();
    samples[7] = units(cases[0].0);
    samples[8] = units(cases[1].0);
    samples[9] = units(cases[2].0);
    samples[10] = units("4300000.00");
    let costs = SortedSamples::new(samples).map_err(|e| e.to_string())?;
    let request = ContingencyRequest {
        percentiles: vec![70.0, 80.0, 90.0],
        ..Default::default()
    };
    let report =
        contingo_core::stats::contingency_report_from_costs(&costs, planned, &request).map_err(|e| e.to_string())?;
    for (row, (cost, reserve)) in report.rows.iter().zip(cases) {
        ensure!(
            row.cost == units(cost) && row.reserve == units(reserve),
            "report row {row:?}"
        );
    }
    Ok(())
}

fn ac2_benchmark_row() -> Result<(), String> {
    let planned = units("3935888.65");
    let reserve = planned.percent(10.0);
    ensure!(reserve == units("393588.86"), "10% of planned is {reserve}");
    let costs = SortedSamples::new(vec![units("3900000.00"), units("4400000.00")]).unwrap();
    let whole = BenchmarkRow::whole_units(planned.truncate_to_units(), 10.0, &costs);
    ensure!(
        planned.truncate_to_units() == units("3935888.00"),
        "truncated planned cost"
    );
    ensure!(
        whole.target_cost == units("4329477.00"),
        "whole-unit target {}",
        whole.target_cost
    );
    let exact = BenchmarkRow::exact(planned, 10.0, &costs);
    ensure!(
        exact.reserve == units("393588.86"),
        "exact benchmark reserve {}",
        exact.reserve
    );
    ensure!(
        exact.target_cost == units("4329477.51"),
        "exact benchmark target {}",
        exact.target_cost
    );
    Ok(())
}

/// Small deterministic generator for test data.
struct Gen(RngStream);

impl Gen {
    fn new(stream: u64) -> Self {
        Gen(RngStream::new(0xACCE_97A1, stream))
    }

    fn unit(&mut self) -> f64 {
        self.0.next_open01()
    }

    fn below(&mut self, n: usize) -> usize {
        ((self.unit() * n as f64) as usize).min(n - 1)
    }
}

fn longest_path(ids: &[String], preds: &HashMap<String, Vec<String>>, dur: &HashMap<String, f64>) -> f64 {
    // Enumerate every path backwards from each activity, summing in path order.
    fn paths(id: &str, preds: &HashMap<String, Vec<String>>, out: &mut Vec<Vec<String>>, suffix: &mut Vec<String>) {
        suffix.push(id.to_string());
        let p = &preds[id];
        if p.is_empty() {
            out.push(suffix.iter().rev().cloned().collect());
        }
        for q in p {
            paths(q, preds, out, suffix);
        }
        suffix.pop();
    }
    let mut all = Vec::new();
    for id in ids {
        paths(id, preds, &mut all, &mut Vec::new());
    }
    all.iter()
        .map(|p| p.iter().fold(0.0, |acc, a| acc + dur[a]))
        .fold(0.0, f64::max)
}

fn ac3_cpm_oracle() -> Result<(), String> {
    for case in 0..200u64 {
        let mut g = Gen::new(case);
        let n = 3 + g.below(8);
        let ids: Vec<String> = (0..n).map(|i| format!("T{i:02}")).collect();
        let mut activities = Vec::new();
        let mut preds = HashMap::new();
        let mut dur = HashMap::new();
        for (i, id) in ids.iter().enumerate() {
            let mut p: Vec<String> = (0..i).filter(|_| g.unit() < 0.35).map(|j| ids[j].clone()).collect();
            p.sort();
            let d = if g.unit() < 0.1 {
                0.0
            } else {
                (g.unit() * 50.0 * 4.0).round() / 4.0 + g.unit()
            };
            let refs: Vec<&str> = p.iter().map(String::as_str).collect();
            activities.push(Activity::new(id, id, &refs, d, Cents::ZERO, Cents::ZERO));
            preds.insert(id.clone(), p);
            dur.insert(id.clone(), d);
        }
        // Present activities in a shuffled order so the result cannot lean on input order.
        let mut shuffled = Vec::new();
        while !activities.is_empty() {
            let k = g.below(activities.len());
            shuffled.push(activities.swap_remove(k));
        }
        let network = ProjectNetwork::new(shuffled);
        let cpm = cpm_forward(&network, &dur).map_err(|e| e.to_string())?;
        let oracle = longest_path(&ids, &preds, &dur);
        ensure!(
            cpm.project_duration == oracle,
            "case {case}: cpm {} vs enumeration {oracle}",
            cpm.project_duration
        );
    }
    Ok(())
}

fn point(v: f64) -> DistributionSpec {
    DistributionSpec::point(v)
}

fn event_risk(id: &str, p: f64, cost: f64) -> Risk {
    Risk {
        id: id.into(),
        name: id.into(),
        occurrence: OccurrenceModel::EventProb(p),
        targets: RiskTargets::Activities(vec!["A".into()]),
        duration_impact: ImpactModel::None,
        cost_impact: ImpactModel::Explicit {
            distribution: point(cost),
            polarity: Polarity::Threat,
        },
    }
}

fn ac4_enumeration_oracle() -> Result<(), String> {
    let network = ProjectNetwork::new(vec![
        Activity::new("A", "A", &[], 3.0, Cents(10_000), Cents(100)).with_duration_model(point(3.0)),
        Activity::new("B", "B", &["A"], 4.0, Cents(20_000), Cents(100)).with_duration_model(point(4.0)),
    ]);
    let (p1, p2, c1, c2) = (0.3, 0.6, 1_000.0, 10_000.0);
    let register = RiskRegister::new(
        vec![event_risk("R1", p1, c1), event_risk("R2", p2, c2)],
        ScaleSet::default(),
    );
    let n = 100_000u64;
    let summary = run_simulation(&network, &register, &SimulationConfig::new(n, 2024)).map_err(|e| e.to_string())?;
    let base = network.planned_cost();
    let outcomes = [
        (base + Cents(1_000) + Cents(10_000), p1 * p2),
        (base + Cents(1_000), p1 * (1.0 - p2)),
        (base + Cents(10_000), (1.0 - p1) * p2),
        (base, (1.0 - p1) * (1.0 - p2)),
    ];
    let mut seen = 0;
    for (cost, p) in outcomes {
        let count = summary.outcomes.iter().filter(|o| o.total_cost == cost).count();
        seen += count;
        let freq = count as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        ensure!(
            (freq - p).abs() <= 4.0 * se,
            "cost {cost}: frequency {freq} vs {p} (4se = {})",
            4.0 * se
        );
    }
    ensure!(
        seen as u64 == n,
        "{} runs fell outside the four outcomes",
        n - seen as u64
    );
    Ok(())
}

fn samples(spec: &DistributionSpec, stream: u64, n: usize) -> Vec<f64> {
    let sampler = spec.sampler().unwrap();
    let mut rng = RngStream::new(77, stream);
    (0..n).map(|_| sampler.sample(&mut rng)).collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn ac5_sampler_moments() -> Result<(), String> {
    let n = 100_000;
    let tri = mean(&samples(&DistributionSpec::triangular(0.0, 5.0, 10.0), 1, n));
    ensure!((tri - 5.0).abs() <= 0.05, "triangular mean {tri}");

    let u = samples(&DistributionSpec::uniform(0.20, 0.35), 2, n);
    ensure!(
        u.iter().all(|x| (0.20..=0.35).contains(x)),
        "uniform sample out of range"
    );
    ensure!((mean(&u) - 0.275).abs() <= 0.002, "uniform mean {}", mean(&u));

    let p = 0.275;
    let b = mean(&samples(&DistributionSpec::Bernoulli { p }, 3, n));
    let se = (p * (1.0 - p) / n as f64).sqrt();
    ensure!((b - p).abs() <= 4.0 * se, "bernoulli frequency {b}");

    let (mode, sigma) = (95.0f64, 0.1f64);
    let mu = mode.ln() + sigma * sigma;
    let expected = (mu + sigma * sigma / 2.0).exp();
    let ln = mean(&samples(&DistributionSpec::lognormal_mode(mode, sigma), 4, n));
    ensure!(
        (ln - expected).abs() <= 0.01 * expected,
        "lognormal mean {ln} vs {expected}"
    );
    Ok(())
}

fn probability_scale() -> ScaleSet {
    ScaleSet {
        probability: Scale::new([
            ("VL", 0.0, 0.05),
            ("L", 0.05, 0.12),
            ("M", 0.12, 0.20),
            ("H", 0.20, 0.35),
            ("VH", 0.35, 1.0),
        ]),
        ..Default::default()
    }
}

fn ac6_epistemic_two_stage() -> Result<(), String> {
    let occurrence = OccurrenceModel::EpistemicLevel("H".into())
        .resolve(&probability_scale())
        .map_err(|e| e.to_string())?;
    let n = 100_000u64;
    let hits = (0..n)
        .filter(|&run| occurrence.sample(&mut RngStream::new(6, run)))
        .count();
    let freq = hits as f64 / n as f64;
    ensure!((0.26..=0.29).contains(&freq), "level H occurred with frequency {freq}");
    Ok(())
}

fn ac7_determinism() -> Result<(), String> {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        let r = common::simulate_case_study(
            dir.path(),
            &["--iterations", "10000", "--seed", "42", "--format", "json"],
        );
        ensure!(r.code == 0, "simulate failed: {}", r.stderr);
    }
    for entry in std::fs::read_dir(a.path()).unwrap() {
        let name = entry.unwrap().file_name();
        let left = std::fs::read(a.path().join(&name)).unwrap();
        let right = std::fs::read(b.path().join(&name)).unwrap();
        ensure!(left == right, "{name:?} differs between identical runs");
    }

    let bundle = common::case_study();
    let run = |workers| {
        run_simulation(
            &bundle.network,
            &bundle.register,
            &SimulationConfig::new(10_000, 42).with_workers(workers),
        )
    };
    let one = run(1).map_err(|e| e.to_string())?;
    for workers in [4, 8] {
        ensure!(
            run(workers).map_err(|e| e.to_string())? == one,
            "{workers} workers differ from 1 worker"
        );
    }
    Ok(())
}

fn ac8_zero_risk() -> Result<(), String> {
    let mut network = common::case_study().network;
    for a in &mut network.activities {
        a.duration_model = point(a.planned_duration);
    }
    let register = RiskRegister::default();
    let planned_cost = network.planned_cost();
    let planned_duration = network.planned_duration().map_err(|e| e.to_string())?;
    let summary = run_simulation(&network, &register, &SimulationConfig::new(1_000, 8)).map_err(|e| e.to_string())?;
    for o in &summary.outcomes {
        ensure!(
            o.total_cost == planned_cost,
            "run {} cost {}",
            o.run_index,
            o.total_cost
        );
        ensure!(
            o.total_duration == planned_duration,
            "run {} duration {}",
            o.run_index,
            o.total_duration
        );
    }
    let single = simulate_run(&network, &register, 17, 8).map_err(|e| e.to_string())?;
    ensure!(
        single.total_cost == planned_cost,
        "simulate_run cost {}",
        single.total_cost
    );
    let costs = summary.sorted_costs();
    let (m, var) = cost_stats(&costs).map_err(|e| e.to_string())?;
    ensure!(var == 0.0 && m == planned_cost.as_f64(), "mean {m}, variance {var}");
    ensure!(
        percentile_of(&costs, planned_cost) == 100.0,
        "percentile of planned cost"
    );
    Ok(())
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

fn ac9_percentile_properties() -> Result<(), String> {
    let grid: Vec<f64> = (0..=400).map(|i| i as f64 / 4.0).collect();
    for case in 0..100u64 {
        let mut g = Gen::new(10_000 + case);
        let n = 2 + g.below(200);
        // Distinct values so every sample rank has a unique inverse.
        let mut days: Vec<f64> = Vec::with_capacity(n);
        let mut x = g.unit() * 100.0;
        for _ in 0..n {
            x += 0.5 + g.unit() * 10.0;
            days.push(x);
        }
        let cents: Vec<Cents> = days.iter().map(|d| Cents((d * 1_000.0) as i64)).collect();

        let p = |q| percentile(&days, q).unwrap();
        let pc = |q| percentile(&cents, q).unwrap();
        ensure!(
            grid.windows(2).all(|w| p(w[0]) <= p(w[1]) && pc(w[0]) <= pc(w[1])),
            "case {case}: not monotone"
        );
        ensure!(
            p(0.0) == days[0] && p(100.0) == days[n - 1],
            "case {case}: f64 endpoints"
        );
        ensure!(
            pc(0.0) == cents[0] && pc(100.0) == cents[n - 1],
            "case {case}: cent endpoints"
        );

        for i in 0..n {
            let q = 100.0 * i as f64 / (n - 1) as f64;
            ensure!(
                close(percentile_of(&days, p(q)), q),
                "case {case}: f64 round trip at rank {i}"
            );
            ensure!(
                close(percentile_of(&cents, pc(q)), q),
                "case {case}: cent round trip at rank {i}"
            );
        }
        for &q in &grid {
            let back = percentile_of(&days, p(q));
            ensure!(
                (back - q).abs() <= 1e-9 * 100.0,
                "case {case}: f64 round trip at q={q} gave {back}"
            );
        }

        let shift = g.unit() * 1_000.0 - 500.0;
        let shift_cents = Cents((shift * 100.0) as i64);
        let shifted: Vec<f64> = days.iter().map(|d| d + shift).collect();
        let shifted_cents: Vec<Cents> = cents.iter().map(|&c| c + shift_cents).collect();
        for &q in &grid {
            let (a, b) = (percentile(&shifted, q).unwrap(), p(q) + shift);
            ensure!(close(a, b), "case {case}: f64 shift at q={q}: {a} vs {b}");
            ensure!(
                percentile(&shifted_cents, q).unwrap() == pc(q) + shift_cents,
                "case {case}: cent shift at q={q}"
            );
        }
    }
    Ok(())
}

fn ac10_case_study_shape() -> Result<(), String> {
    let bundle = common::case_study();
    let config = SimulationConfig::new(10_000, 42);
    let (aleatoric, full) = scenario_compare(&bundle.network, &bundle.register, &config).map_err(|e| e.to_string())?;
    let costs = SortedSamples::new(full.sorted_costs()).unwrap();
    let (mean_cents, _) = cost_stats(costs.values()).unwrap();
    ensure!(
        mean_cents > full.planned_cost.as_f64(),
        "mean {mean_cents} not above planned {}",
        full.planned_cost
    );
    let q = |s: &SortedSamples<Cents>, q| s.percentile(q).unwrap();
    let (p5, p50, p95) = (q(&costs, 5.0), q(&costs, 50.0), q(&costs, 95.0));
    ensure!(p95 - p50 > p50 - p5, "not right-skewed: P5 {p5}, P50 {p50}, P95 {p95}");
    let ale = SortedSamples::new(aleatoric.sorted_costs()).unwrap();
    let (spread_ale, spread_full) = (q(&ale, 95.0) - q(&ale, 5.0), p95 - p5);
    ensure!(
        spread_ale < spread_full,
        "aleatoric spread {spread_ale} not below full spread {spread_full}"
    );
    let (_, var_ale) = cost_stats(ale.values()).unwrap();
    let (_, var_full) = cost_stats(costs.values()).unwrap();
    ensure!(
        var_ale < var_full,
        "aleatoric variance {var_ale} not below full variance {var_full}"
    );
    Ok(())
}
