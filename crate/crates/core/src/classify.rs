//! Runtime classification of assessment outcomes.
//!
//! A learner asks for a `desired` concept. If the concept has a
//! prerequisite, the learner has been assessed on the prerequisite's leaves;
//! the single matching rule either advances them to the desired concept or
//! recommends material for exactly the failed leaves. The ground concept has
//! nothing underneath, so it is answered by the default rule.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ontology::{ConceptId, OntologyTree};
use crate::outcome::{enumerate_outcomes, OutcomeState};
use crate::plans::{assessment_literal, has_kb, CLASSIFIER, RECEIVER, SENDER};
use crate::rules::{ClassificationRule, RuleKind, RuleSet, Target};

/// Assessment result keyed by leaf.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AssessmentOutcome {
    entries: BTreeMap<ConceptId, OutcomeState>,
}

impl AssessmentOutcome {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, leaf: ConceptId, state: OutcomeState) -> Option<OutcomeState> {
        self.entries.insert(leaf, state)
    }

    pub fn get(&self, leaf: &ConceptId) -> Option<OutcomeState> {
        self.entries.get(leaf).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Parses `leaf=P,leaf=F,...`. A leaf listed twice is an error.
    pub fn parse(text: &str, states: u32) -> Result<Self> {
        let mut outcome = Self::new();
        for pair in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (leaf, state) = pair.split_once('=').ok_or_else(|| {
                Error::InvalidArgument(format!("expected leaf=STATE, got {pair:?}"))
            })?;
            let leaf = ConceptId::new(leaf)?;
            let state = OutcomeState::parse(state, states)?;
            if outcome.insert(leaf.clone(), state).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "leaf `{leaf}` listed twice"
                )));
            }
        }
        Ok(outcome)
    }
}

impl FromIterator<(ConceptId, OutcomeState)> for AssessmentOutcome {
    fn from_iter<I: IntoIterator<Item = (ConceptId, OutcomeState)>>(iter: I) -> Self {
        AssessmentOutcome {
            entries: iter.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Material {
    pub concept: ConceptId,
    /// Absent when the ontology has no material for the concept.
    pub url: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Recommendation {
    pub kind: RuleKind,
    pub targets: Vec<ConceptId>,
    pub materials: Vec<Material>,
    pub matched_rule: String,
}

impl Recommendation {
    pub fn missing_materials(&self) -> impl Iterator<Item = &ConceptId> {
        self.materials
            .iter()
            .filter(|m| m.url.is_none())
            .map(|m| &m.concept)
    }
}

impl fmt::Display for Recommendation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.kind)?;
        for t in &self.targets {
            write!(f, " {t}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Performative {
    Tell,
    Achieve,
}

impl fmt::Display for Performative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Performative::Tell => "tell",
            Performative::Achieve => "achieve",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MessageRecord {
    pub sender: String,
    pub receiver: String,
    pub performative: Performative,
    pub content: String,
}

impl MessageRecord {
    fn new(sender: &str, receiver: &str, performative: Performative, content: String) -> Self {
        MessageRecord {
            sender: sender.to_string(),
            receiver: receiver.to_string(),
            performative,
            content,
        }
    }
}

impl fmt::Display for MessageRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} -> {} : {} {}",
            self.sender, self.receiver, self.performative, self.content
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub recommendation: Recommendation,
    pub trace: Vec<MessageRecord>,
}

fn single_match<'a>(
    rules: impl Iterator<Item = &'a ClassificationRule>,
    what: impl FnOnce() -> String,
) -> Result<&'a ClassificationRule> {
    let matched: Vec<&ClassificationRule> = rules.collect();
    match matched.as_slice() {
        [rule] => Ok(rule),
        [] => Err(Error::Internal(format!("no rule matches {}", what()))),
        many => Err(Error::Internal(format!(
            "{} rules match {}: {}",
            many.len(),
            what(),
            many.iter()
                .map(|r| r.id.as_str())
                .collect::<Vec<_>>()
                .join(", ")
        ))),
    }
}

fn resolve_materials(tree: &OntologyTree, targets: &[ConceptId]) -> Vec<Material> {
    targets
        .iter()
        .map(|t| Material {
            concept: t.clone(),
            url: tree.material(t).map(str::to_string),
        })
        .collect()
}

/// Classifies one learner's outcome for `desired`.
pub fn classify(
    tree: &OntologyTree,
    rule_set: &RuleSet,
    desired: &ConceptId,
    outcome: &AssessmentOutcome,
) -> Result<Classification> {
    if !tree.contains(desired) {
        return Err(Error::UnknownConcept(desired.clone()));
    }
    if tree.parent_classes().is_empty() {
        return Err(Error::NoParentClasses);
    }

    let ground = tree.ground_concept().ok();
    if ground == Some(desired) {
        if !outcome.is_empty() {
            return Err(Error::OutcomeForGround(desired.clone()));
        }
        let rule = single_match(rule_set.default_rules(), || "the default".to_string())?;
        let targets: Vec<ConceptId> = rule
            .recommendations
            .iter()
            .filter_map(Target::concept)
            .cloned()
            .collect();
        let trace = targets
            .iter()
            .map(|t| {
                let literal = has_kb(Some(desired), &Target::Concept(t.clone()));
                MessageRecord::new(CLASSIFIER, RECEIVER, Performative::Achieve, literal)
            })
            .collect();
        return Ok(Classification {
            recommendation: Recommendation {
                kind: RuleKind::Default,
                materials: resolve_materials(tree, &targets),
                targets,
                matched_rule: rule.id.clone(),
            },
            trace,
        });
    }

    let prerequisite = tree
        .prerequisite_of(desired)
        .ok_or_else(|| Error::NoPrerequisite(desired.clone()))?;
    let class = tree
        .parent_class(prerequisite)
        .ok_or_else(|| Error::PrerequisiteWithoutLeaves(prerequisite.clone()))?;

    let missing: Vec<ConceptId> = class
        .leaves
        .iter()
        .filter(|l| outcome.get(l).is_none())
        .cloned()
        .collect();
    let unexpected: Vec<ConceptId> = outcome
        .entries
        .keys()
        .filter(|k| !class.leaves.contains(k))
        .cloned()
        .collect();
    if !missing.is_empty() || !unexpected.is_empty() {
        return Err(Error::OutcomeMismatch {
            parent: prerequisite.clone(),
            missing,
            unexpected,
        });
    }

    let aligned: Vec<OutcomeState> = class.leaves.iter().filter_map(|l| outcome.get(l)).collect();
    if let Some(bad) = aligned.iter().find(|s| s.states() != tree.states()) {
        return Err(Error::InvalidState {
            index: bad.code(),
            states: tree.states(),
        });
    }
    let rule = single_match(
        rule_set
            .rules
            .iter()
            .filter(|r| r.matches(prerequisite, &aligned)),
        || format!("outcome of `{prerequisite}`"),
    )?;

    let mut trace: Vec<MessageRecord> = class
        .leaves
        .iter()
        .zip(&aligned)
        .map(|(leaf, &state)| {
            MessageRecord::new(
                SENDER,
                CLASSIFIER,
                Performative::Tell,
                assessment_literal(leaf, state),
            )
        })
        .collect();

    let targets: Vec<ConceptId> = match rule.kind {
        RuleKind::Advance => vec![desired.clone()],
        RuleKind::Remediate => rule
            .recommendations
            .iter()
            .filter_map(Target::concept)
            .cloned()
            .collect(),
        RuleKind::Default => {
            return Err(Error::Internal(format!(
                "default rule {} matched an outcome",
                rule.id
            )))
        }
    };
    trace.extend(targets.iter().map(|t| {
        let parent = (rule.kind == RuleKind::Remediate).then_some(prerequisite);
        MessageRecord::new(
            CLASSIFIER,
            RECEIVER,
            Performative::Achieve,
            has_kb(parent, &Target::Concept(t.clone())),
        )
    }));

    Ok(Classification {
        recommendation: Recommendation {
            kind: rule.kind,
            materials: resolve_materials(tree, &targets),
            targets,
            matched_rule: rule.id.clone(),
        },
        trace,
    })
}

/// Concepts a learner may ask for, in pre-order, with the ground concept last.
fn drivable_concepts(tree: &OntologyTree) -> Vec<ConceptId> {
    let mut out: Vec<ConceptId> = tree
        .concepts()
        .iter()
        .filter(|c| tree.prerequisite_of(c).is_some())
        .cloned()
        .collect();
    if let Ok(ground) = tree.ground_concept() {
        out.push(ground.clone());
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverageReport {
    /// Rule ids in rule-set order.
    pub fired: Vec<String>,
    pub unfired: Vec<String>,
    /// Rules that fired for more than one distinct outcome vector.
    pub ambiguous: Vec<String>,
    /// Driver inputs that could not be classified.
    pub failures: Vec<String>,
    pub pass: bool,
}

impl fmt::Display for CoverageReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let total = self.fired.len() + self.unfired.len();
        write!(
            f,
            "coverage: {}/{} rules fired {}",
            self.fired.len(),
            total,
            if self.pass { "PASS" } else { "FAIL" }
        )?;
        for id in &self.unfired {
            write!(f, "\n  unfired: {id}")?;
        }
        for id in &self.ambiguous {
            write!(f, "\n  ambiguous: {id}")?;
        }
        for msg in &self.failures {
            write!(f, "\n  failure: {msg}")?;
        }
        Ok(())
    }
}

/// Drives `classify` with every outcome vector of every prerequisite link
/// plus the ground default and checks that each rule fires for exactly one
/// outcome vector.
pub fn exhaustive_coverage(tree: &OntologyTree, rule_set: &RuleSet) -> CoverageReport {
    let mut vectors_by_rule: HashMap<&str, BTreeSet<String>> = HashMap::new();
    let mut failures = Vec::new();
    let mut record = |rule_id: String, vector: String| {
        let id = rule_set
            .rules
            .iter()
            .find(|r| r.id == rule_id)
            .map(|r| r.id.as_str())
            .expect("classify returns ids from the rule set");
        vectors_by_rule.entry(id).or_default().insert(vector);
    };

    for desired in drivable_concepts(tree) {
        match tree.prerequisite_of(&desired) {
            None => match classify(tree, rule_set, &desired, &AssessmentOutcome::new()) {
                Ok(c) => record(c.recommendation.matched_rule, String::new()),
                Err(e) => failures.push(format!("{desired} (default): {e}")),
            },
            Some(prerequisite) => {
                let Some(class) = tree.parent_class(prerequisite) else {
                    continue;
                };
                let vectors = match enumerate_outcomes(class.leaf_count(), tree.states()) {
                    Ok(v) => v,
                    Err(e) => {
                        failures.push(format!("{desired}: {e}"));
                        continue;
                    }
                };
                for vector in vectors {
                    let outcome: AssessmentOutcome = class
                        .leaves
                        .iter()
                        .cloned()
                        .zip(vector.states().iter().copied())
                        .collect();
                    match classify(tree, rule_set, &desired, &outcome) {
                        Ok(c) => record(c.recommendation.matched_rule, vector.to_string()),
                        Err(e) => failures.push(format!("{desired} {vector}: {e}")),
                    }
                }
            }
        }
    }

    let mut fired = Vec::new();
    let mut unfired = Vec::new();
    let mut ambiguous = Vec::new();
    for rule in &rule_set.rules {
        match vectors_by_rule.get(rule.id.as_str()) {
            None => unfired.push(rule.id.clone()),
            Some(v) => {
                fired.push(rule.id.clone());
                if v.len() != 1 {
                    ambiguous.push(rule.id.clone());
                }
            }
        }
    }
    let pass = !rule_set.rules.is_empty()
        && unfired.is_empty()
        && ambiguous.is_empty()
        && failures.is_empty();
    CoverageReport {
        fired,
        unfired,
        ambiguous,
        failures,
        pass,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CohortConfig {
    pub trials: u64,
    /// Probability that a learner passes any single leaf.
    pub pass_probability: f64,
    pub seed: u64,
    /// Ask every learner for this concept; otherwise each learner picks one
    /// of the prerequisite-linked concepts or the ground concept uniformly.
    pub desired: Option<ConceptId>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct KindTotals {
    pub advance: u64,
    pub remediate: u64,
    pub default: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RuleFireCount {
    pub rule: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CohortReport {
    pub trials: u64,
    pub seed: u64,
    /// Every rule of the rule set, in order, with its fire count.
    pub rule_counts: Vec<RuleFireCount>,
    pub kinds: KindTotals,
}

impl CohortReport {
    pub fn count(&self, rule_id: &str) -> Option<u64> {
        self.rule_counts
            .iter()
            .find(|r| r.rule == rule_id)
            .map(|r| r.count)
    }
}

impl fmt::Display for CohortReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "trials: {} (seed {})", self.trials, self.seed)?;
        writeln!(f, "advance: {}", self.kinds.advance)?;
        writeln!(f, "remediate: {}", self.kinds.remediate)?;
        write!(f, "default: {}", self.kinds.default)?;
        for r in self.rule_counts.iter().filter(|r| r.count > 0) {
            write!(f, "\n{}\t{}", r.rule, r.count)?;
        }
        Ok(())
    }
}

/// Classifies `trials` synthetic learners whose leaf outcomes are drawn
/// independently. Deterministic for a given seed.
pub fn simulate_cohort(
    tree: &OntologyTree,
    rule_set: &RuleSet,
    config: &CohortConfig,
) -> Result<CohortReport> {
    let p = config.pass_probability;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    if config.trials == 0 {
        return Err(Error::InvalidArgument(
            "trials must be at least 1".to_string(),
        ));
    }
    tree.ground_concept()?;
    let candidates = match &config.desired {
        Some(d) => vec![d.clone()],
        None => drivable_concepts(tree),
    };

    let states = tree.states();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut kinds = KindTotals::default();
    for _ in 0..config.trials {
        let desired = &candidates[rng.random_range(0..candidates.len())];
        let mut outcome = AssessmentOutcome::new();
        if let Some(class) = tree
            .prerequisite_of(desired)
            .and_then(|p| tree.parent_class(p))
        {
            for leaf in &class.leaves {
                let state = if states == 1 || rng.random_bool(p) {
                    OutcomeState::pass(states)?
                } else {
                    OutcomeState::new(rng.random_range(0..states - 1), states)?
                };
                outcome.insert(leaf.clone(), state);
            }
        }
        let c = classify(tree, rule_set, desired, &outcome)?;
        *counts.entry(c.recommendation.matched_rule).or_default() += 1;
        match c.recommendation.kind {
            RuleKind::Advance => kinds.advance += 1,
            RuleKind::Remediate => kinds.remediate += 1,
            RuleKind::Default => kinds.default += 1,
        }
    }

    Ok(CohortReport {
        trials: config.trials,
        seed: config.seed,
        rule_counts: rule_set
            .rules
            .iter()
            .map(|r| RuleFireCount {
                rule: r.id.clone(),
                count: counts.get(&r.id).copied().unwrap_or(0),
            })
            .collect(),
        kinds,
    })
}
