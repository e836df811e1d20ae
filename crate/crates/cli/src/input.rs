//! Reading and validating the three JSON input documents.
//!
//! Project:
//!
//! ```json
//! {"activities": [{"id": "1", "name": "Land preparation", "predecessors": [],
//!   "planned_duration": 25, "fixed_cost_cents": 9000000,
//!   "variable_cost_cents_per_day": 120000,
//!   "duration_model": {"family": "lognormal", "mode": 25, "sigma": 0.1}}]}
//! ```
//!
//! Risks:
//!
//! ```json
//! {"risks": [{"id": "4", "name": "Archaeological remains",
//!   "occurrence": {"type": "epistemic", "level": "L"},
//!   "targets": ["1", "2"],
//!   "duration_impact": {"level": "VL"},
//!   "cost_impact_cents": {"distribution": {"family": "uniform", "min": 0, "max": 500000},
//!                         "polarity": "threat"}}]}
//! ```
//!
//! Scales: `{"probability": {"H": [0.20, 0.35]}, "duration_impact": {...},
//! "cost_impact_cents": {...}}`. Open-ended levels (`">65"`, `[65, null]`)
//! are rejected with `unbounded-interval`.
//!
//! Every problem in every document is reported, each with file, line and
//! field path.

use std::fs;
use std::path::{Path, PathBuf};

use contingo_core::risk::{
    ImpactModel, OccurrenceModel, Polarity, RegisterViolation, Risk, RiskRegister, RiskTargets, Scale, ScaleKind,
    ScaleLevel, ScaleSet, ScaleViolation,
};
use contingo_core::schedule::{default_duration_model, validate_network, Activity, NetworkViolation, ProjectNetwork};
use contingo_core::stats::ContingencyRequest;
use contingo_core::{Cents, DistributionSpec, SimulationConfig};
use serde_json::{Map, Value};

use crate::diagnostics::{codes, Diagnostic};
use crate::locate::{child, index, LineIndex};

pub const DEFAULT_PERCENTILES: [f64; 3] = [70.0, 80.0, 90.0];

/// An input document already read into memory.
#[derive(Debug, Clone)]
pub struct Source {
    pub name: String,
    pub text: String,
}

impl Source {
    pub fn new(name: impl Into<String>, text: impl Into<String>) -> Self {
        Source {
            name: name.into(),
            text: text.into(),
        }
    }

    pub fn read(path: &Path) -> Result<Self, Diagnostic> {
        let name = path.display().to_string();
        match fs::read(path) {
            Ok(bytes) => match String::from_utf8(bytes) {
                Ok(text) => Ok(Source { name, text }),
                Err(_) => Err(file_error(&name, codes::MALFORMED, "file is not valid UTF-8")),
            },
            Err(e) => Err(file_error(&name, codes::IO, &format!("cannot read file: {e}"))),
        }
    }
}

fn file_error(name: &str, code: &'static str, message: &str) -> Diagnostic {
    Diagnostic {
        code,
        file: name.to_string(),
        line: 1,
        field: String::new(),
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, Default)]
pub struct InputPaths {
    pub project: PathBuf,
    pub risks: PathBuf,
    pub scales: PathBuf,
    pub config: Option<PathBuf>,
}

/// Command-line values; each one present replaces the config-file value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub iterations: Option<u64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub percentiles: Option<Vec<f64>>,
    pub benchmark_percentage: Option<f64>,
    pub whole_unit_reference: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub simulation: SimulationConfig,
    pub contingency: ContingencyRequest,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            simulation: SimulationConfig::default(),
            contingency: ContingencyRequest {
                percentiles: DEFAULT_PERCENTILES.to_vec(),
                benchmark_percentage: None,
                whole_unit_reference: false,
            },
        }
    }
}

impl RunSettings {
    fn apply(&mut self, o: &ConfigOverrides) {
        if let Some(v) = o.iterations {
            self.simulation.iterations = v;
        }
        if let Some(v) = o.seed {
            self.simulation.master_seed = v;
        }
        if let Some(v) = o.workers {
            self.simulation.workers = Some(v);
        }
        if let Some(v) = &o.percentiles {
            self.contingency.percentiles = v.clone();
        }
        if let Some(v) = o.benchmark_percentage {
            self.contingency.benchmark_percentage = Some(v);
        }
        if let Some(v) = o.whole_unit_reference {
            self.contingency.whole_unit_reference = v;
        }
    }
}

/// Validated inputs, ready to simulate.
#[derive(Debug, Clone, PartialEq)]
pub struct InputBundle {
    pub network: ProjectNetwork,
    pub register: RiskRegister,
    pub settings: RunSettings,
}

/// Reads, parses and cross-validates every input document.
pub fn parse_inputs(paths: &InputPaths, overrides: &ConfigOverrides) -> Result<InputBundle, Vec<Diagnostic>> {
    let mut diagnostics = Vec::new();
    let mut read = |p: &Path| match Source::read(p) {
        Ok(s) => Some(s),
        Err(d) => {
            diagnostics.push(d);
            None
        }
    };
    let project = read(&paths.project);
    let risks = read(&paths.risks);
    let scales = read(&paths.scales);
    let config = paths.config.as_deref().map(&mut read);

    let mut settings = RunSettings::default();
    if let Some(Some(config)) = &config {
        match parse_config(config) {
            Ok(overrides) => settings.apply(&overrides),
            Err(mut d) => diagnostics.append(&mut d),
        }
    }
    settings.apply(overrides);
    diagnostics.extend(settings_diagnostics(&settings));

    let (project, risks, scales) = match (project, risks, scales) {
        (Some(p), Some(r), Some(s)) => (p, r, s),
        _ => return Err(diagnostics),
    };
    match parse_documents(&project, &risks, &scales) {
        Ok((network, register)) if diagnostics.is_empty() => Ok(InputBundle {
            network,
            register,
            settings,
        }),
        Ok(_) => Err(diagnostics),
        Err(mut d) => {
            diagnostics.append(&mut d);
            Err(diagnostics)
        }
    }
}

fn settings_diagnostics(settings: &RunSettings) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut bad = |message: String| {
        out.push(Diagnostic {
            code: codes::SCHEMA,
            file: "<settings>".into(),
            line: 1,
            field: String::new(),
            message,
        })
    };
    if settings.simulation.iterations == 0 {
        bad("iterations must be at least 1".into());
    }
    if settings.simulation.workers == Some(0) {
        bad("workers must be at least 1".into());
    }
    for q in &settings.contingency.percentiles {
        if !(0.0..=100.0).contains(q) {
            bad(format!("percentile {q} is outside [0, 100]"));
        }
    }
    if let Some(p) = settings.contingency.benchmark_percentage {
        if !(p.is_finite() && p >= 0.0) {
            bad(format!("benchmark percentage {p} must be a nonnegative number"));
        }
    }
    out
}

/// Parses the three documents and validates them against each other.
pub fn parse_documents(
    project: &Source,
    risks: &Source,
    scales: &Source,
) -> Result<(ProjectNetwork, RiskRegister), Vec<Diagnostic>> {
    let (network, mut diagnostics) = parse_project(project);
    let (risk_list, mut risk_doc) = parse_risks(risks);
    let (scale_set, mut scale_doc) = parse_scales(scales);
    // Scales are checked on their own so their problems are listed even
    // when another document failed to parse.
    if let Some(set) = &scale_set {
        for sv in set.violations() {
            scale_violation(&mut scale_doc, &sv);
        }
    }

    let mut register = None;
    if let (Some(network), Some(risk_list), Some(scale_set)) = (&network, risk_list, scale_set) {
        let r = RiskRegister::new(risk_list, scale_set);
        for v in r.validate(network) {
            if !matches!(v, RegisterViolation::Scale(_)) {
                register_violation(&mut risk_doc, &r, &v);
            }
        }
        register = Some(r);
    }
    diagnostics.extend(risk_doc.diagnostics);
    diagnostics.extend(scale_doc.diagnostics);
    let (Some(network), Some(register)) = (network, register) else {
        return Err(diagnostics);
    };
    if diagnostics.is_empty() {
        Ok((network, register))
    } else {
        Err(diagnostics)
    }
}

/// Diagnostics collector for one document.
struct Doc {
    file: String,
    lines: LineIndex,
    diagnostics: Vec<Diagnostic>,
}

impl Doc {
    /// Parses JSON; on a syntax error the returned value is `None`.
    fn open(source: &Source) -> (Doc, Option<Value>) {
        let mut doc = Doc {
            file: source.name.clone(),
            lines: LineIndex::default(),
            diagnostics: Vec::new(),
        };
        match serde_json::from_str::<Value>(&source.text) {
            Ok(v) => {
                doc.lines = LineIndex::build(&source.text);
                (doc, Some(v))
            }
            Err(e) => {
                doc.diagnostics.push(Diagnostic {
                    code: codes::MALFORMED,
                    file: doc.file.clone(),
                    line: e.line().max(1),
                    field: String::new(),
                    message: format!("invalid JSON: {e}"),
                });
                (doc, None)
            }
        }
    }

    fn error(&mut self, code: &'static str, field: &str, message: impl Into<String>) {
        self.diagnostics.push(Diagnostic {
            code,
            file: self.file.clone(),
            line: self.lines.line_of(field),
            field: field.to_string(),
            message: message.into(),
        });
    }

    fn schema(&mut self, field: &str, message: impl Into<String>) {
        self.error(codes::SCHEMA, field, message);
    }

    fn object<'v>(&mut self, v: &'v Value, path: &str) -> Option<&'v Map<String, Value>> {
        let o = v.as_object();
        if o.is_none() {
            self.schema(path, format!("expected an object, found {}", kind(v)));
        }
        o
    }

    fn check_keys(&mut self, map: &Map<String, Value>, path: &str, allowed: &[&str]) {
        for key in map.keys() {
            if !allowed.contains(&key.as_str()) {
                self.schema(
                    &child(path, key),
                    format!("unknown field `{key}` (expected one of: {})", allowed.join(", ")),
                );
            }
        }
    }

    fn required<'v>(&mut self, map: &'v Map<String, Value>, path: &str, key: &str) -> Option<&'v Value> {
        let v = map.get(key);
        if v.is_none() {
            self.schema(path, format!("missing required field `{key}`"));
        }
        v
    }

    fn string(&mut self, v: &Value, path: &str) -> Option<String> {
        let s = v.as_str().map(str::to_string);
        if s.is_none() {
            self.schema(path, format!("expected a string, found {}", kind(v)));
        }
        s
    }

    fn number(&mut self, v: &Value, path: &str) -> Option<f64> {
        let n = v.as_f64().filter(|x| x.is_finite());
        if n.is_none() {
            self.schema(path, format!("expected a number, found {}", kind(v)));
        }
        n
    }

    fn integer(&mut self, v: &Value, path: &str) -> Option<i64> {
        let n = v.as_i64();
        if n.is_none() {
            self.schema(path, format!("expected an integer, found {}", kind(v)));
        }
        n
    }

    fn unsigned(&mut self, v: &Value, path: &str) -> Option<u64> {
        let n = v.as_u64();
        if n.is_none() {
            self.schema(path, format!("expected a nonnegative integer, found {}", kind(v)));
        }
        n
    }

    fn distribution(&mut self, v: &Value, path: &str) -> Option<DistributionSpec> {
        match serde_json::from_value::<DistributionSpec>(v.clone()) {
            Ok(spec) => Some(spec),
            Err(e) => {
                self.schema(path, format!("invalid distribution: {e}"));
                None
            }
        }
    }

    fn has_errors(&self) -> bool {
        !self.diagnostics.is_empty()
    }
}

fn kind(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

const ACTIVITY_FIELDS: [&str; 7] = [
    "id",
    "name",
    "predecessors",
    "planned_duration",
    "fixed_cost_cents",
    "variable_cost_cents_per_day",
    "duration_model",
];

/// Parses and validates a project document on its own.
pub fn parse_project(source: &Source) -> (Option<ProjectNetwork>, Vec<Diagnostic>) {
    if source.text.trim().is_empty() {
        let d = file_error(
            &source.name,
            codes::NO_ACTIVITIES,
            "project document is empty; it must define at least one activity",
        );
        return (None, vec![d]);
    }
    let (mut doc, root) = Doc::open(source);
    let Some(root) = root else {
        return (None, doc.diagnostics);
    };
    let Some(map) = doc.object(&root, "") else {
        return (None, doc.diagnostics);
    };
    doc.check_keys(map, "", &["name", "description", "activities"]);
    if let Some(name) = map.get("name") {
        doc.string(name, "name");
    }
    let Some(list) = doc.required(map, "", "activities") else {
        return (None, doc.diagnostics);
    };
    let Some(items) = list.as_array() else {
        doc.schema("activities", format!("expected an array, found {}", kind(list)));
        return (None, doc.diagnostics);
    };

    let mut activities = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        if let Some(a) = parse_activity(&mut doc, item, &index("activities", i)) {
            activities.push(a);
        }
    }
    if doc.has_errors() {
        return (None, doc.diagnostics);
    }

    let network = ProjectNetwork::new(activities);
    for v in validate_network(&network) {
        network_violation(&mut doc, &network, &v);
    }
    if doc.has_errors() {
        (None, doc.diagnostics)
    } else {
        (Some(network), doc.diagnostics)
    }
}

fn parse_activity(doc: &mut Doc, v: &Value, path: &str) -> Option<Activity> {
    let map = doc.object(v, path)?;
    doc.check_keys(map, path, &ACTIVITY_FIELDS);
    let id = doc
        .required(map, path, "id")
        .and_then(|v| doc.string(v, &child(path, "id")));
    let name = match map.get("name") {
        Some(v) => doc.string(v, &child(path, "name")),
        None => id.clone(),
    };
    let predecessors = match map.get("predecessors") {
        None => Some(Vec::new()),
        Some(Value::Array(items)) => {
            let p = child(path, "predecessors");
            items
                .iter()
                .enumerate()
                .map(|(j, v)| doc.string(v, &index(&p, j)))
                .collect::<Vec<_>>()
                .into_iter()
                .collect()
        }
        Some(other) => {
            doc.schema(
                &child(path, "predecessors"),
                format!("expected an array of ids, found {}", kind(other)),
            );
            None
        }
    };
    let planned = doc
        .required(map, path, "planned_duration")
        .and_then(|v| doc.number(v, &child(path, "planned_duration")));
    let fixed = doc
        .required(map, path, "fixed_cost_cents")
        .and_then(|v| doc.integer(v, &child(path, "fixed_cost_cents")));
    let rate = doc
        .required(map, path, "variable_cost_cents_per_day")
        .and_then(|v| doc.integer(v, &child(path, "variable_cost_cents_per_day")));
    let model = match map.get("duration_model") {
        None => planned.map(default_duration_model),
        Some(v) => doc.distribution(v, &child(path, "duration_model")),
    };

    Some(Activity {
        id: id?,
        name: name?,
        predecessors: predecessors?,
        planned_duration: planned?,
        fixed_cost: Cents(fixed?),
        variable_cost_rate: Cents(rate?),
        duration_model: model?,
    })
}

fn activity_index(network: &ProjectNetwork, id: &str) -> usize {
    network.activities.iter().position(|a| a.id == id).unwrap_or(0)
}

fn network_violation(doc: &mut Doc, network: &ProjectNetwork, v: &NetworkViolation) {
    let at = |id: &str| index("activities", activity_index(network, id));
    let field = match v {
        NetworkViolation::NoActivities => "activities".to_string(),
        NetworkViolation::DuplicateId { id } => {
            let second = network
                .activities
                .iter()
                .enumerate()
                .filter(|(_, a)| &a.id == id)
                .nth(1)
                .map_or(0, |(i, _)| i);
            child(&index("activities", second), "id")
        }
        NetworkViolation::DanglingPredecessor { activity, predecessor } => {
            let i = activity_index(network, activity);
            let j = network.activities[i]
                .predecessors
                .iter()
                .position(|p| p == predecessor)
                .unwrap_or(0);
            index(&child(&index("activities", i), "predecessors"), j)
        }
        NetworkViolation::Cycle { activities } => child(&at(&activities[0]), "predecessors"),
        NetworkViolation::NegativeDuration { activity, .. } => child(&at(activity), "planned_duration"),
        NetworkViolation::NegativeCost { activity, field, .. } => child(
            &at(activity),
            if *field == "fixed cost" {
                "fixed_cost_cents"
            } else {
                "variable_cost_cents_per_day"
            },
        ),
        NetworkViolation::InvalidDurationModel { activity, .. } => child(&at(activity), "duration_model"),
    };
    doc.error(v.code(), &field, v.to_string());
}

const RISK_FIELDS: [&str; 6] = [
    "id",
    "name",
    "occurrence",
    "targets",
    "duration_impact",
    "cost_impact_cents",
];

fn parse_risks(source: &Source) -> (Option<Vec<Risk>>, Doc) {
    let (mut doc, root) = Doc::open(source);
    let Some(root) = root else { return (None, doc) };
    let Some(map) = doc.object(&root, "") else {
        return (None, doc);
    };
    doc.check_keys(map, "", &["name", "description", "risks"]);
    let Some(list) = doc.required(map, "", "risks") else {
        return (None, doc);
    };
    let Some(items) = list.as_array() else {
        doc.schema("risks", format!("expected an array, found {}", kind(list)));
        return (None, doc);
    };
    let risks: Vec<Option<Risk>> = items
        .iter()
        .enumerate()
        .map(|(i, v)| parse_risk(&mut doc, v, &index("risks", i)))
        .collect();
    if doc.has_errors() {
        return (None, doc);
    }
    (risks.into_iter().collect(), doc)
}

fn parse_risk(doc: &mut Doc, v: &Value, path: &str) -> Option<Risk> {
    let map = doc.object(v, path)?;
    doc.check_keys(map, path, &RISK_FIELDS);
    let id = doc
        .required(map, path, "id")
        .and_then(|v| doc.string(v, &child(path, "id")));
    let name = match map.get("name") {
        Some(v) => doc.string(v, &child(path, "name")),
        None => id.clone(),
    };
    let occurrence = doc
        .required(map, path, "occurrence")
        .and_then(|v| parse_occurrence(doc, v, &child(path, "occurrence")));
    let targets = doc
        .required(map, path, "targets")
        .and_then(|v| parse_targets(doc, v, &child(path, "targets")));
    let duration = parse_impact(doc, map.get("duration_impact"), &child(path, "duration_impact"));
    let cost = parse_impact(doc, map.get("cost_impact_cents"), &child(path, "cost_impact_cents"));
    Some(Risk {
        id: id?,
        name: name?,
        occurrence: occurrence?,
        targets: targets?,
        duration_impact: duration?,
        cost_impact: cost?,
    })
}

fn parse_occurrence(doc: &mut Doc, v: &Value, path: &str) -> Option<OccurrenceModel> {
    let map = doc.object(v, path)?;
    let kind = doc
        .required(map, path, "type")
        .and_then(|v| doc.string(v, &child(path, "type")))?;
    match kind.as_str() {
        "aleatoric" => {
            doc.check_keys(map, path, &["type"]);
            Some(OccurrenceModel::Always)
        }
        "stochastic" => {
            doc.check_keys(map, path, &["type", "probability"]);
            let p = doc
                .required(map, path, "probability")
                .and_then(|v| doc.number(v, &child(path, "probability")))?;
            Some(OccurrenceModel::EventProb(p))
        }
        "epistemic" => {
            doc.check_keys(map, path, &["type", "level"]);
            let level = doc
                .required(map, path, "level")
                .and_then(|v| doc.string(v, &child(path, "level")))?;
            Some(OccurrenceModel::EpistemicLevel(level))
        }
        other => {
            doc.schema(
                &child(path, "type"),
                format!("unknown occurrence type `{other}` (expected aleatoric, stochastic or epistemic)"),
            );
            None
        }
    }
}

const ENTIRE_PROJECT: &str = "entire_project";

fn parse_targets(doc: &mut Doc, v: &Value, path: &str) -> Option<RiskTargets> {
    match v {
        Value::String(s) if s == ENTIRE_PROJECT => Some(RiskTargets::EntireProject),
        Value::Array(items) => {
            let ids: Vec<Option<String>> = items
                .iter()
                .enumerate()
                .map(|(j, v)| doc.string(v, &index(path, j)))
                .collect();
            ids.into_iter().collect::<Option<Vec<_>>>().map(RiskTargets::Activities)
        }
        other => {
            doc.schema(
                path,
                format!(
                    "expected an array of activity ids or \"{ENTIRE_PROJECT}\", found {}",
                    kind(other)
                ),
            );
            None
        }
    }
}

fn parse_impact(doc: &mut Doc, v: Option<&Value>, path: &str) -> Option<ImpactModel> {
    let v = match v {
        None | Some(Value::Null) => return Some(ImpactModel::None),
        Some(v) => v,
    };
    let map = doc.object(v, path)?;
    doc.check_keys(map, path, &["level", "distribution", "polarity"]);
    let polarity = match map.get("polarity") {
        None => Some(Polarity::Threat),
        Some(p) => match p.as_str() {
            Some("threat") => Some(Polarity::Threat),
            Some("opportunity") => Some(Polarity::Opportunity),
            _ => {
                doc.schema(&child(path, "polarity"), "expected \"threat\" or \"opportunity\"");
                None
            }
        },
    };
    match (map.get("level"), map.get("distribution")) {
        (Some(l), None) => {
            let level = doc.string(l, &child(path, "level"))?;
            Some(ImpactModel::Level {
                level,
                polarity: polarity?,
            })
        }
        (None, Some(d)) => {
            let distribution = doc.distribution(d, &child(path, "distribution"))?;
            Some(ImpactModel::Explicit {
                distribution,
                polarity: polarity?,
            })
        }
        _ => {
            doc.schema(path, "impact needs exactly one of `level` or `distribution`");
            None
        }
    }
}

const SCALE_FIELDS: [(&str, ScaleKind); 3] = [
    ("probability", ScaleKind::Probability),
    ("duration_impact", ScaleKind::DurationImpact),
    ("cost_impact_cents", ScaleKind::CostImpact),
];

fn scale_key(kind: ScaleKind) -> &'static str {
    SCALE_FIELDS
        .iter()
        .find(|(_, k)| *k == kind)
        .map(|(name, _)| *name)
        .unwrap()
}

fn parse_scales(source: &Source) -> (Option<ScaleSet>, Doc) {
    let (mut doc, root) = Doc::open(source);
    let Some(root) = root else { return (None, doc) };
    let Some(map) = doc.object(&root, "") else {
        return (None, doc);
    };
    doc.check_keys(
        map,
        "",
        &[
            "name",
            "description",
            "probability",
            "duration_impact",
            "cost_impact_cents",
        ],
    );
    let mut set = ScaleSet::default();
    for (key, kind) in SCALE_FIELDS {
        let Some(v) = map.get(key) else { continue };
        let Some(levels) = doc.object(v, key) else { continue };
        let scale = match kind {
            ScaleKind::Probability => &mut set.probability,
            ScaleKind::DurationImpact => &mut set.duration_impact,
            ScaleKind::CostImpact => &mut set.cost_impact,
        };
        for (name, interval) in levels {
            if let Some((lo, hi)) = parse_interval(&mut doc, interval, &child(key, name)) {
                scale.levels.push(ScaleLevel {
                    name: name.clone(),
                    lo,
                    hi,
                });
            }
        }
    }
    if doc.has_errors() {
        (None, doc)
    } else {
        (Some(set), doc)
    }
}

/// `[lo, hi]`; an open end (`null`, `">65"`, `"inf"`) becomes infinite and is
/// reported later as `unbounded-interval`. A bare `">65"` means `[65, open]`.
fn parse_interval(doc: &mut Doc, v: &Value, path: &str) -> Option<(f64, f64)> {
    match v {
        Value::Array(items) if items.len() == 2 => {
            let lo = parse_bound(doc, &items[0], &index(path, 0), f64::NEG_INFINITY);
            let hi = parse_bound(doc, &items[1], &index(path, 1), f64::INFINITY);
            Some((lo?, hi?))
        }
        Value::String(s) if s.trim_start().starts_with('>') => {
            let lo = s.trim_start()[1..]
                .trim()
                .trim_end_matches(['k', 'K', '%'])
                .parse::<f64>()
                .ok();
            match lo {
                Some(lo) => Some((lo, f64::INFINITY)),
                None => {
                    doc.schema(path, format!("cannot read interval `{s}`"));
                    None
                }
            }
        }
        other => {
            doc.schema(path, format!("expected an interval [lo, hi], found {}", kind(other)));
            None
        }
    }
}

fn parse_bound(doc: &mut Doc, v: &Value, path: &str, open: f64) -> Option<f64> {
    match v {
        Value::Null => Some(open),
        Value::String(s) => {
            let t = s.trim().to_ascii_lowercase();
            if t.starts_with('>') || t.starts_with('<') || t == "inf" || t == "infinity" || t == "∞" {
                Some(open)
            } else {
                doc.schema(path, format!("expected a number, found string `{s}`"));
                None
            }
        }
        other => doc.number(other, path),
    }
}

fn scale_violation(doc: &mut Doc, v: &ScaleViolation) {
    let field = match v {
        ScaleViolation::DuplicateLevel { scale, level }
        | ScaleViolation::Unbounded { scale, level }
        | ScaleViolation::Degenerate { scale, level, .. } => child(scale_key(*scale), level),
        ScaleViolation::ProbabilityRange { level, .. } => child("probability", level),
    };
    doc.error(v.code(), &field, v.to_string());
}

fn register_violation(doc: &mut Doc, register: &RiskRegister, v: &RegisterViolation) {
    let risk_id = v.risk().unwrap_or_default();
    let positions: Vec<usize> = register
        .risks
        .iter()
        .enumerate()
        .filter(|(_, r)| r.id == risk_id)
        .map(|(i, _)| i)
        .collect();
    let i = match v {
        RegisterViolation::DuplicateRiskId { .. } => positions.get(1).copied().unwrap_or(0),
        _ => positions.first().copied().unwrap_or(0),
    };
    let base = index("risks", i);
    let impact_field = |field: &str| match field {
        "occurrence" => child(&base, "occurrence"),
        "duration impact" => child(&base, "duration_impact"),
        _ => child(&base, "cost_impact_cents"),
    };
    let field = match v {
        RegisterViolation::DuplicateRiskId { .. } => child(&base, "id"),
        RegisterViolation::DanglingTarget { activity, .. } => {
            let j = match &register.risks[i].targets {
                RiskTargets::Activities(ids) => ids.iter().position(|t| t == activity).unwrap_or(0),
                RiskTargets::EntireProject => 0,
            };
            index(&child(&base, "targets"), j)
        }
        RegisterViolation::NoTargets { .. } => child(&base, "targets"),
        RegisterViolation::UnresolvedLevel { field, .. } => child(&impact_field(field), "level"),
        RegisterViolation::InvalidDistribution { field, .. } => {
            if *field == "occurrence" {
                child(&impact_field(field), "probability")
            } else {
                child(&impact_field(field), "distribution")
            }
        }
        RegisterViolation::NoImpact { .. } => base.clone(),
        RegisterViolation::Scale(_) => String::new(),
    };
    doc.error(v.code(), &field, v.to_string());
}

/// Optional settings document; every field may be overridden by a flag.
pub fn parse_config(source: &Source) -> Result<ConfigOverrides, Vec<Diagnostic>> {
    let (mut doc, root) = Doc::open(source);
    let Some(root) = root else { return Err(doc.diagnostics) };
    let Some(map) = doc.object(&root, "") else {
        return Err(doc.diagnostics);
    };
    doc.check_keys(
        map,
        "",
        &[
            "iterations",
            "seed",
            "workers",
            "percentiles",
            "benchmark_percentage",
            "whole_unit_reference",
        ],
    );
    let mut o = ConfigOverrides::default();
    if let Some(v) = map.get("iterations") {
        o.iterations = doc.unsigned(v, "iterations");
    }
    if let Some(v) = map.get("seed") {
        o.seed = doc.unsigned(v, "seed");
    }
    if let Some(v) = map.get("workers") {
        o.workers = doc.unsigned(v, "workers").map(|w| w as usize);
    }
    if let Some(v) = map.get("percentiles") {
        match v.as_array() {
            Some(items) => {
                o.percentiles = items
                    .iter()
                    .enumerate()
                    .map(|(i, q)| doc.number(q, &index("percentiles", i)))
                    .collect::<Vec<_>>()
                    .into_iter()
                    .collect();
            }
            None => doc.schema("percentiles", "expected an array of numbers"),
        }
    }
    if let Some(v) = map.get("benchmark_percentage") {
        o.benchmark_percentage = doc.number(v, "benchmark_percentage");
    }
    if let Some(v) = map.get("whole_unit_reference") {
        match v.as_bool() {
            Some(b) => o.whole_unit_reference = Some(b),
            None => doc.schema("whole_unit_reference", "expected true or false"),
        }
    }
    if doc.has_errors() {
        Err(doc.diagnostics)
    } else {
        Ok(o)
    }
}

fn distribution_json(spec: &DistributionSpec) -> Value {
    serde_json::to_value(spec).expect("distribution specs serialize")
}

pub fn project_to_json(network: &ProjectNetwork) -> Value {
    let activities: Vec<Value> = network
        .activities
        .iter()
        .map(|a| {
            serde_json::json!({
                "id": a.id,
                "name": a.name,
                "predecessors": a.predecessors,
                "planned_duration": a.planned_duration,
                "fixed_cost_cents": a.fixed_cost.0,
                "variable_cost_cents_per_day": a.variable_cost_rate.0,
                "duration_model": distribution_json(&a.duration_model),
            })
        })
        .collect();
    serde_json::json!({ "activities": activities })
}

fn impact_json(impact: &ImpactModel) -> Value {
    let polarity = |p: &Polarity| match p {
        Polarity::Threat => "threat",
        Polarity::Opportunity => "opportunity",
    };
    match impact {
        ImpactModel::None => Value::Null,
        ImpactModel::Level { level, polarity: p } => serde_json::json!({"level": level, "polarity": polarity(p)}),
        ImpactModel::Explicit {
            distribution,
            polarity: p,
        } => {
            serde_json::json!({"distribution": distribution_json(distribution), "polarity": polarity(p)})
        }
    }
}

pub fn risks_to_json(register: &RiskRegister) -> Value {
    let risks: Vec<Value> = register
        .risks
        .iter()
        .map(|r| {
            let occurrence = match &r.occurrence {
                OccurrenceModel::Always => serde_json::json!({"type": "aleatoric"}),
                OccurrenceModel::EventProb(p) => serde_json::json!({"type": "stochastic", "probability": p}),
                OccurrenceModel::EpistemicLevel(l) => serde_json::json!({"type": "epistemic", "level": l}),
            };
            let targets = match &r.targets {
                RiskTargets::EntireProject => Value::from(ENTIRE_PROJECT),
                RiskTargets::Activities(ids) => Value::from(ids.clone()),
            };
            let mut m = Map::new();
            m.insert("id".into(), r.id.clone().into());
            m.insert("name".into(), r.name.clone().into());
            m.insert("occurrence".into(), occurrence);
            m.insert("targets".into(), targets);
            if !r.duration_impact.is_none() {
                m.insert("duration_impact".into(), impact_json(&r.duration_impact));
            }
            if !r.cost_impact.is_none() {
                m.insert("cost_impact_cents".into(), impact_json(&r.cost_impact));
            }
            Value::Object(m)
        })
        .collect();
    serde_json::json!({ "risks": risks })
}

pub fn scales_to_json(scales: &ScaleSet) -> Value {
    let scale = |s: &Scale| -> Value {
        Value::Object(
            s.levels
                .iter()
                .map(|l| (l.name.clone(), serde_json::json!([l.lo, l.hi])))
                .collect(),
        )
    };
    serde_json::json!({
        "probability": scale(&scales.probability),
        "duration_impact": scale(&scales.duration_impact),
        "cost_impact_cents": scale(&scales.cost_impact),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn src(name: &str, text: &str) -> Source {
        Source::new(name, text)
    }

    const SCALES: &str = r#"{
  "probability": {"VL": [0, 0.05], "H": [0.20, 0.35]},
  "duration_impact": {"VL": [0, 5]},
  "cost_impact_cents": {"M": [1000000, 2500000]}
}"#;

    const PROJECT: &str = r#"{"activities": [
  {"id": "A", "planned_duration": 10, "fixed_cost_cents": 100, "variable_cost_cents_per_day": 5},
  {"id": "B", "name": "second", "predecessors": ["A"], "planned_duration": 2,
   "fixed_cost_cents": 0, "variable_cost_cents_per_day": 0,
   "duration_model": {"family": "triangular", "min": 1, "mode": 2, "max": 4}}
]}"#;

    const RISKS: &str = r#"{"risks": [
  {"id": "R1", "occurrence": {"type": "epistemic", "level": "H"}, "targets": ["A"],
   "duration_impact": {"level": "VL"}},
  {"id": "R2", "occurrence": {"type": "stochastic", "probability": 0.3}, "targets": "entire_project",
   "cost_impact_cents": {"distribution": {"family": "point_mass", "value": 500}, "polarity": "opportunity"}}
]}"#;

    #[test]
    fn parses_valid_documents() {
        let (net, reg) = parse_documents(&src("p", PROJECT), &src("r", RISKS), &src("s", SCALES)).unwrap();
        assert_eq!(net.activities.len(), 2);
        assert_eq!(net.activities[0].name, "A");
        assert_eq!(
            net.activities[0].duration_model,
            DistributionSpec::lognormal_mode(10.0, 0.1)
        );
        assert_eq!(reg.risks[1].targets, RiskTargets::EntireProject);
        assert_eq!(
            reg.risks[1].cost_impact,
            ImpactModel::Explicit {
                distribution: DistributionSpec::point(500.0),
                polarity: Polarity::Opportunity
            }
        );
        assert_eq!(reg.scales.probability.levels[1].name, "H");
    }

    #[test]
    fn unbounded_level_is_named() {
        let scales =
            r#"{"duration_impact": {"H": [40, 65], "VH": ">65"}, "cost_impact_cents": {"VH": [6000000, null]}}"#;
        let risks = r#"{"risks": []}"#;
        let err = parse_documents(&src("p", PROJECT), &src("r", risks), &src("s.json", scales)).unwrap_err();
        let unbounded: Vec<_> = err.iter().filter(|d| d.code == codes::UNBOUNDED).collect();
        assert_eq!(unbounded.len(), 2);
        assert_eq!(unbounded[0].field, "duration_impact.VH");
        assert!(unbounded[0].message.contains("VH"));
        assert_eq!(unbounded[0].file, "s.json");
    }

    #[test]
    fn empty_project_reports_no_activities() {
        let (net, d) = parse_project(&src("p", ""));
        assert!(net.is_none());
        assert_eq!(d[0].code, codes::NO_ACTIVITIES);
        let (_, d) = parse_project(&src("p", r#"{"activities": []}"#));
        assert_eq!(d[0].code, codes::NO_ACTIVITIES);
    }

    #[test]
    fn all_schema_errors_are_collected_with_lines() {
        let text = "{\"activities\": [\n {\"id\": 3, \"planned_duration\": 1, \"fixed_cost_cents\": 1, \"variable_cost_cents_per_day\": 1},\n {\"id\": \"B\", \"planned_duration\": \"x\", \"fixed_cost_cents\": 1.5, \"variable_cost_cents_per_day\": 1, \"colour\": 1}\n]}";
        let (_, d) = parse_project(&src("p", text));
        let fields: Vec<_> = d.iter().map(|d| (d.line, d.field.as_str())).collect();
        assert!(fields.contains(&(2, "activities[0].id")));
        assert!(fields.contains(&(3, "activities[1].planned_duration")));
        assert!(fields.contains(&(3, "activities[1].fixed_cost_cents")));
        assert!(fields.contains(&(3, "activities[1].colour")));
        assert!(d.iter().all(|d| d.code == codes::SCHEMA));
    }

    #[test]
    fn malformed_json_reports_line() {
        let (_, d) = parse_project(&src("p", "{\n\"activities\": [\n,\n]}"));
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, codes::MALFORMED);
        assert_eq!(d[0].line, 3);
    }

    #[test]
    fn semantic_errors_point_at_fields() {
        let project = r#"{"activities": [
  {"id": "A", "predecessors": ["B"], "planned_duration": 1, "fixed_cost_cents": 1, "variable_cost_cents_per_day": 1},
  {"id": "B", "predecessors": ["A", "Q"], "planned_duration": 1, "fixed_cost_cents": -1, "variable_cost_cents_per_day": 1}
]}"#;
        let (_, d) = parse_project(&src("p", project));
        let by_code = |c: &str| d.iter().find(|d| d.code == c).unwrap().clone();
        assert_eq!(by_code("dangling-reference").field, "activities[1].predecessors[1]");
        assert_eq!(by_code("dangling-reference").line, 3);
        assert_eq!(by_code("negative-cost").field, "activities[1].fixed_cost_cents");
        assert_eq!(by_code("cycle").field, "activities[0].predecessors");
    }

    #[test]
    fn register_errors_point_at_fields() {
        let risks = r#"{"risks": [
  {"id": "R1", "occurrence": {"type": "epistemic", "level": "XL"}, "targets": ["A", "Z"],
   "duration_impact": {"level": "VL"}},
  {"id": "R2", "occurrence": {"type": "aleatoric"}, "targets": ["A"]},
  {"id": "R2", "occurrence": {"type": "aleatoric"}, "targets": ["B"], "duration_impact": {"level": "VL"}}
]}"#;
        let err = parse_documents(&src("p", PROJECT), &src("r", risks), &src("s", SCALES)).unwrap_err();
        let find = |c: &str| err.iter().find(|d| d.code == c).unwrap().field.clone();
        assert_eq!(find("unresolved-level"), "risks[0].occurrence.level");
        assert_eq!(find("dangling-target"), "risks[0].targets[1]");
        assert_eq!(find("duplicate-id"), "risks[2].id");
        assert_eq!(find("no-impact"), "risks[1]");
    }

    #[test]
    fn config_file_then_flags() {
        let cfg = parse_config(&src("c", r#"{"iterations": 500, "seed": 9, "percentiles": [50, 95]}"#)).unwrap();
        let mut settings = RunSettings::default();
        settings.apply(&cfg);
        settings.apply(&ConfigOverrides {
            seed: Some(11),
            ..Default::default()
        });
        assert_eq!(settings.simulation.iterations, 500);
        assert_eq!(settings.simulation.master_seed, 11);
        assert_eq!(settings.contingency.percentiles, [50.0, 95.0]);
        assert!(
            parse_config(&src("c", r#"{"iterations": -1, "bogus": 1}"#))
                .unwrap_err()
                .len()
                == 2
        );
    }

    #[test]
    fn documents_round_trip() {
        let (net, reg) = parse_documents(&src("p", PROJECT), &src("r", RISKS), &src("s", SCALES)).unwrap();
        let p = Source::new("p2", project_to_json(&net).to_string());
        let r = Source::new("r2", risks_to_json(&reg).to_string());
        let s = Source::new("s2", scales_to_json(&reg.scales).to_string());
        let (net2, reg2) = parse_documents(&p, &r, &s).unwrap();
        assert_eq!(net, net2);
        assert_eq!(reg, reg2);
    }
}
