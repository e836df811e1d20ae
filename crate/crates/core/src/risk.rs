//! The typed risk register and the semantic scales that quantify it.
//!
//! Each uncertainty kind maps onto an occurrence model:
//!
//! | kind        | occurrence                                   |
//! |-------------|----------------------------------------------|
//! | aleatoric   | [`OccurrenceModel::Always`]                  |
//! | stochastic  | [`OccurrenceModel::EventProb`], Bernoulli(p) |
//! | epistemic   | [`OccurrenceModel::EpistemicLevel`]: p ~ Uniform(level), then Bernoulli(p) |
//!
//! Stream consumption is fixed per variant: `Always` draws nothing,
//! `EventProb` draws once, `EpistemicLevel` draws twice. An impact draws once
//! unless it is [`ImpactModel::None`].

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::money::Cents;
use crate::sampling::{DistributionError, DistributionSpec, RngStream, Sampler};
use crate::schedule::ProjectNetwork;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleKind {
    Probability,
    DurationImpact,
    CostImpact,
}

impl fmt::Display for ScaleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScaleKind::Probability => "probability",
            ScaleKind::DurationImpact => "duration impact",
            ScaleKind::CostImpact => "cost impact",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleLevel {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
}

/// Ordered level-name to interval table.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Scale {
    pub levels: Vec<ScaleLevel>,
}

impl Scale {
    pub fn new<S: Into<String>>(levels: impl IntoIterator<Item = (S, f64, f64)>) -> Self {
        Scale {
            levels: levels
                .into_iter()
                .map(|(name, lo, hi)| ScaleLevel {
                    name: name.into(),
                    lo,
                    hi,
                })
                .collect(),
        }
    }

    pub fn get(&self, level: &str) -> Option<&ScaleLevel> {
        self.levels.iter().find(|l| l.name == level)
    }

    pub fn violations(&self, kind: ScaleKind) -> Vec<ScaleViolation> {
        let mut out = Vec::new();
        let mut names = BTreeSet::new();
        for l in &self.levels {
            if !names.insert(l.name.as_str()) {
                out.push(ScaleViolation::DuplicateLevel {
                    scale: kind,
                    level: l.name.clone(),
                });
            }
            if !l.lo.is_finite() || !l.hi.is_finite() {
                out.push(ScaleViolation::Unbounded {
                    scale: kind,
                    level: l.name.clone(),
                });
                continue;
            }
            if l.lo >= l.hi {
                out.push(ScaleViolation::Degenerate {
                    scale: kind,
                    level: l.name.clone(),
                    lo: l.lo,
                    hi: l.hi,
                });
            }
            if kind == ScaleKind::Probability && (l.lo < 0.0 || l.hi > 1.0) {
                out.push(ScaleViolation::ProbabilityRange {
                    level: l.name.clone(),
                    lo: l.lo,
                    hi: l.hi,
                });
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScaleViolation {
    DuplicateLevel {
        scale: ScaleKind,
        level: String,
    },
    Unbounded {
        scale: ScaleKind,
        level: String,
    },
    Degenerate {
        scale: ScaleKind,
        level: String,
        lo: f64,
        hi: f64,
    },
    ProbabilityRange {
        level: String,
        lo: f64,
        hi: f64,
    },
}

impl ScaleViolation {
    pub fn code(&self) -> &'static str {
        match self {
            ScaleViolation::DuplicateLevel { .. } => "duplicate-level",
            ScaleViolation::Unbounded { .. } => "unbounded-interval",
            ScaleViolation::Degenerate { .. } => "degenerate-interval",
            ScaleViolation::ProbabilityRange { .. } => "probability-range",
        }
    }
}

impl fmt::Display for ScaleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScaleViolation::DuplicateLevel { scale, level } => write!(f, "{scale} scale defines level `{level}` twice"),
            ScaleViolation::Unbounded { scale, level } => {
                write!(
                    f,
                    "{scale} level `{level}` is open-ended; close it with an explicit maximum"
                )
            }
            ScaleViolation::Degenerate { scale, level, lo, hi } => {
                write!(f, "{scale} level `{level}` needs lo < hi (got [{lo}, {hi}])")
            }
            ScaleViolation::ProbabilityRange { level, lo, hi } => {
                write!(f, "probability level `{level}` [{lo}, {hi}] leaves [0, 1]")
            }
        }
    }
}

/// Probability, duration-impact (working days) and cost-impact (cents) scales.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScaleSet {
    pub probability: Scale,
    pub duration_impact: Scale,
    pub cost_impact: Scale,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("level `{level}` is not defined in the {scale} scale")]
pub struct ResolutionError {
    pub level: String,
    pub scale: ScaleKind,
}

impl ScaleSet {
    pub fn scale(&self, kind: ScaleKind) -> &Scale {
        match kind {
            ScaleKind::Probability => &self.probability,
            ScaleKind::DurationImpact => &self.duration_impact,
            ScaleKind::CostImpact => &self.cost_impact,
        }
    }

    pub fn violations(&self) -> Vec<ScaleViolation> {
        [ScaleKind::Probability, ScaleKind::DurationImpact, ScaleKind::CostImpact]
            .into_iter()
            .flat_map(|k| self.scale(k).violations(k))
            .collect()
    }

    pub fn resolve(&self, kind: ScaleKind, level: &str) -> Result<DistributionSpec, ResolutionError> {
        resolve_level(self.scale(kind), kind, level)
    }
}

/// The uniform distribution over a level's interval.
pub fn resolve_level(scale: &Scale, kind: ScaleKind, level: &str) -> Result<DistributionSpec, ResolutionError> {
    scale
        .get(level)
        .map(|l| DistributionSpec::uniform(l.lo, l.hi))
        .ok_or_else(|| ResolutionError {
            level: level.to_string(),
            scale: kind,
        })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum OccurrenceModel {
    /// Aleatoric: always materializes.
    Always,
    /// Stochastic: known probability.
    EventProb(f64),
    /// Epistemic: probability known only as a level of the probability scale.
    EpistemicLevel(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    #[default]
    Threat,
    Opportunity,
}

impl Polarity {
    pub fn sign(self) -> f64 {
        match self {
            Polarity::Threat => 1.0,
            Polarity::Opportunity => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImpactKind {
    Duration,
    Cost,
}

impl ImpactKind {
    fn scale(self) -> ScaleKind {
        match self {
            ImpactKind::Duration => ScaleKind::DurationImpact,
            ImpactKind::Cost => ScaleKind::CostImpact,
        }
    }
}

/// Magnitude model of one impact; the polarity sign is applied after sampling.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub enum ImpactModel {
    #[default]
    None,
    Explicit {
        distribution: DistributionSpec,
        polarity: Polarity,
    },
    Level {
        level: String,
        polarity: Polarity,
    },
}

impl ImpactModel {
    pub fn is_none(&self) -> bool {
        matches!(self, ImpactModel::None)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RiskTargets {
    Activities(Vec<String>),
    EntireProject,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Risk {
    pub id: String,
    pub name: String,
    pub occurrence: OccurrenceModel,
    pub targets: RiskTargets,
    /// Working days.
    pub duration_impact: ImpactModel,
    /// Cents.
    pub cost_impact: ImpactModel,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RiskRegister {
    pub risks: Vec<Risk>,
    pub scales: ScaleSet,
}

/// A [`OccurrenceModel`] with its level resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResolvedOccurrence {
    Always,
    Event(f64),
    Epistemic(Sampler),
}

impl ResolvedOccurrence {
    pub fn sample(&self, rng: &mut RngStream) -> bool {
        match *self {
            ResolvedOccurrence::Always => true,
            ResolvedOccurrence::Event(p) => rng.next_open01() < p,
            ResolvedOccurrence::Epistemic(probability) => {
                let p = probability.sample(rng);
                rng.next_open01() < p
            }
        }
    }

    /// Unconditional probability of occurrence.
    pub fn probability(&self) -> f64 {
        match *self {
            ResolvedOccurrence::Always => 1.0,
            ResolvedOccurrence::Event(p) => p,
            ResolvedOccurrence::Epistemic(s) => s.mean(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Resolution(#[from] ResolutionError),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
}

impl OccurrenceModel {
    pub fn resolve(&self, scales: &ScaleSet) -> Result<ResolvedOccurrence, ModelError> {
        Ok(match self {
            OccurrenceModel::Always => ResolvedOccurrence::Always,
            OccurrenceModel::EventProb(p) => {
                if !(0.0..=1.0).contains(p) {
                    return Err(DistributionError::Probability(*p).into());
                }
                ResolvedOccurrence::Event(*p)
            }
            OccurrenceModel::EpistemicLevel(level) => {
                ResolvedOccurrence::Epistemic(scales.resolve(ScaleKind::Probability, level)?.sampler()?)
            }
        })
    }
}

/// A [`ImpactModel`] with its level resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResolvedImpact {
    None,
    Draw {
        magnitude: Sampler,
        sign: f64,
        kind: ImpactKind,
    },
}

impl ResolvedImpact {
    /// Signed delta; cost deltas are whole cents.
    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        match *self {
            ResolvedImpact::None => 0.0,
            ResolvedImpact::Draw { magnitude, sign, kind } => {
                let delta = sign * magnitude.sample(rng);
                match kind {
                    ImpactKind::Duration => delta,
                    ImpactKind::Cost => delta.round_ties_even(),
                }
            }
        }
    }

    pub fn sample_cents(&self, rng: &mut RngStream) -> Cents {
        Cents(self.sample(rng) as i64)
    }

    pub fn is_none(&self) -> bool {
        matches!(self, ResolvedImpact::None)
    }
}

impl ImpactModel {
    pub fn resolve(&self, kind: ImpactKind, scales: &ScaleSet) -> Result<ResolvedImpact, ModelError> {
        Ok(match self {
            ImpactModel::None => ResolvedImpact::None,
            ImpactModel::Explicit { distribution, polarity } => ResolvedImpact::Draw {
                magnitude: distribution.sampler()?,
                sign: polarity.sign(),
                kind,
            },
            ImpactModel::Level { level, polarity } => ResolvedImpact::Draw {
                magnitude: scales.resolve(kind.scale(), level)?.sampler()?,
                sign: polarity.sign(),
                kind,
            },
        })
    }
}

/// Draws whether a risk occurs in this run.
pub fn sample_occurrence(model: &OccurrenceModel, scales: &ScaleSet, rng: &mut RngStream) -> Result<bool, ModelError> {
    Ok(model.resolve(scales)?.sample(rng))
}

/// Draws a signed impact delta: working days, or whole cents for cost.
pub fn sample_impact(
    model: &ImpactModel,
    kind: ImpactKind,
    scales: &ScaleSet,
    rng: &mut RngStream,
) -> Result<f64, ModelError> {
    Ok(model.resolve(kind, scales)?.sample(rng))
}

#[derive(Debug, Clone, PartialEq)]
pub enum RegisterViolation {
    DuplicateRiskId {
        id: String,
    },
    DanglingTarget {
        risk: String,
        activity: String,
    },
    NoTargets {
        risk: String,
    },
    UnresolvedLevel {
        risk: String,
        field: &'static str,
        level: String,
        scale: ScaleKind,
    },
    InvalidDistribution {
        risk: String,
        field: &'static str,
        reason: String,
    },
    NoImpact {
        risk: String,
    },
    Scale(ScaleViolation),
}

impl RegisterViolation {
    pub fn code(&self) -> &'static str {
        match self {
            RegisterViolation::DuplicateRiskId { .. } => "duplicate-id",
            RegisterViolation::DanglingTarget { .. } => "dangling-target",
            RegisterViolation::NoTargets { .. } => "no-targets",
            RegisterViolation::UnresolvedLevel { .. } => "unresolved-level",
            RegisterViolation::InvalidDistribution { .. } => "invalid-distribution",
            RegisterViolation::NoImpact { .. } => "no-impact",
            RegisterViolation::Scale(v) => v.code(),
        }
    }

    /// Risk the violation belongs to, if any.
    pub fn risk(&self) -> Option<&str> {
        match self {
            RegisterViolation::DuplicateRiskId { id: risk }
            | RegisterViolation::DanglingTarget { risk, .. }
            | RegisterViolation::NoTargets { risk }
            | RegisterViolation::UnresolvedLevel { risk, .. }
            | RegisterViolation::InvalidDistribution { risk, .. }
            | RegisterViolation::NoImpact { risk } => Some(risk),
            RegisterViolation::Scale(_) => None,
        }
    }
}

impl fmt::Display for RegisterViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegisterViolation::DuplicateRiskId { id } => write!(f, "risk id `{id}` is defined more than once"),
            RegisterViolation::DanglingTarget { risk, activity } => {
                write!(f, "risk `{risk}` targets undefined activity `{activity}`")
            }
            RegisterViolation::NoTargets { risk } => write!(f, "risk `{risk}` has no target activities"),
            RegisterViolation::UnresolvedLevel {
                risk,
                field,
                level,
                scale,
            } => {
                write!(
                    f,
                    "risk `{risk}` {field}: level `{level}` is not defined in the {scale} scale"
                )
            }
            RegisterViolation::InvalidDistribution { risk, field, reason } => {
                write!(f, "risk `{risk}` {field}: {reason}")
            }
            RegisterViolation::NoImpact { risk } => write!(f, "risk `{risk}` has neither a duration nor a cost impact"),
            RegisterViolation::Scale(v) => v.fmt(f),
        }
    }
}

impl RiskRegister {
    pub fn new(risks: Vec<Risk>, scales: ScaleSet) -> Self {
        RiskRegister { risks, scales }
    }

    /// Every problem with the register against `network`; empty when valid.
    ///
    /// An empty report guarantees that every occurrence and impact model
    /// resolves, so sampling cannot fail during a simulation.
    pub fn validate(&self, network: &ProjectNetwork) -> Vec<RegisterViolation> {
        validate_register(self, network)
    }

    /// The register with every non-`Always` risk removed.
    pub fn aleatoric_only(&self) -> RiskRegister {
        RiskRegister {
            risks: self
                .risks
                .iter()
                .filter(|r| r.occurrence == OccurrenceModel::Always)
                .cloned()
                .collect(),
            scales: self.scales.clone(),
        }
    }
}

pub fn validate_register(register: &RiskRegister, network: &ProjectNetwork) -> Vec<RegisterViolation> {
    let mut report: Vec<RegisterViolation> = register
        .scales
        .violations()
        .into_iter()
        .map(RegisterViolation::Scale)
        .collect();
    let activity_ids: BTreeSet<&str> = network.activities.iter().map(|a| a.id.as_str()).collect();
    let mut seen = BTreeSet::new();
    let mut reported = BTreeSet::new();

    for risk in &register.risks {
        let id = &risk.id;
        if !seen.insert(id.as_str()) && reported.insert(id.as_str()) {
            report.push(RegisterViolation::DuplicateRiskId { id: id.clone() });
        }

        if let RiskTargets::Activities(targets) = &risk.targets {
            if targets.is_empty() {
                report.push(RegisterViolation::NoTargets { risk: id.clone() });
            }
            for t in targets {
                if !activity_ids.contains(t.as_str()) {
                    report.push(RegisterViolation::DanglingTarget {
                        risk: id.clone(),
                        activity: t.clone(),
                    });
                }
            }
        }

        if let Err(e) = risk.occurrence.resolve(&register.scales) {
            report.push(model_violation(id, "occurrence", e));
        }
        if risk.duration_impact.is_none() && risk.cost_impact.is_none() {
            report.push(RegisterViolation::NoImpact { risk: id.clone() });
        }
        if let Err(e) = risk.duration_impact.resolve(ImpactKind::Duration, &register.scales) {
            report.push(model_violation(id, "duration impact", e));
        }
        if let Err(e) = risk.cost_impact.resolve(ImpactKind::Cost, &register.scales) {
            report.push(model_violation(id, "cost impact", e));
        }
    }
    report
}

fn model_violation(risk: &str, field: &'static str, err: ModelError) -> RegisterViolation {
    match err {
        ModelError::Resolution(ResolutionError { level, scale }) => RegisterViolation::UnresolvedLevel {
            risk: risk.to_string(),
            field,
            level,
            scale,
        },
        ModelError::Distribution(e) => RegisterViolation::InvalidDistribution {
            risk: risk.to_string(),
            field,
            reason: e.to_string(),
        },
    }
}
