//! Classified rule sets: one rule per outcome vector per parent class, plus
//! the single default rule for the ground concept.

use std::collections::HashMap;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ontology::{ConceptId, OntologyTree};
use crate::outcome::{enumerate_outcomes, OutcomeState, OutcomeVector, MATERIALIZE_LIMIT};
use crate::predict::{predict_polynomial, Prediction};

pub const DEFAULT_RULE_ID: &str = "default";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    Advance,
    Remediate,
    Default,
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RuleKind::Advance => "advance",
            RuleKind::Remediate => "remediate",
            RuleKind::Default => "default",
        })
    }
}

/// What a rule recommends.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Target {
    Concept(ConceptId),
    /// Symbolic successor of a parent class whose successors are unknown
    /// (no prerequisite map, or nothing lists it as prerequisite).
    Next(ConceptId),
}

impl Target {
    pub fn concept(&self) -> Option<&ConceptId> {
        match self {
            Target::Concept(id) => Some(id),
            Target::Next(_) => None,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Concept(id) => write!(f, "{id}"),
            Target::Next(id) => write!(f, "next({id})"),
        }
    }
}

impl Serialize for Target {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Condition {
    pub leaf: ConceptId,
    pub state: OutcomeState,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassificationRule {
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parent: Option<ConceptId>,
    /// 1-based position of the outcome vector in canonical order.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub combination: Option<usize>,
    pub kind: RuleKind,
    pub conditions: Vec<Condition>,
    pub recommendations: Vec<Target>,
}

impl ClassificationRule {
    pub fn outcome(&self) -> OutcomeVector {
        OutcomeVector(self.conditions.iter().map(|c| c.state).collect())
    }

    /// True when `outcome` (aligned with the rule's leaves) satisfies every condition.
    pub fn matches(&self, parent: &ConceptId, outcome: &[OutcomeState]) -> bool {
        self.parent.as_ref() == Some(parent)
            && self.conditions.len() == outcome.len()
            && self
                .conditions
                .iter()
                .zip(outcome)
                .all(|(c, s)| c.state == *s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RuleSet {
    pub states: u32,
    /// Ground concept of the tree, when it has a prerequisite map.
    pub ground: Option<ConceptId>,
    pub rules: Vec<ClassificationRule>,
    pub prediction: Prediction,
}

impl RuleSet {
    pub fn rule(&self, id: &str) -> Option<&ClassificationRule> {
        self.rules.iter().find(|r| r.id == id)
    }

    pub fn default_rules(&self) -> impl Iterator<Item = &ClassificationRule> {
        self.rules.iter().filter(|r| r.kind == RuleKind::Default)
    }

    /// Machine form: one JSON record per rule.
    pub fn to_json_lines(&self) -> String {
        self.rules
            .iter()
            .map(|r| serde_json::to_string(r).expect("rule serialization cannot fail") + "\n")
            .collect()
    }
}

/// Builds the complete rule set of `tree`.
///
/// Parent classes are visited in pre-order and each gets one rule per
/// outcome vector in canonical order. An all-pass rule advances to every
/// concept that lists the parent as its prerequisite; any other rule
/// remediates exactly the failed leaves. The default rule comes last and
/// recommends the ground concept's leaves.
pub fn generate_rules(tree: &OntologyTree) -> Result<RuleSet> {
    if tree.parent_classes().is_empty() {
        return Err(Error::NoParentClasses);
    }
    let prediction = predict_polynomial(tree)?;
    if prediction.total > MATERIALIZE_LIMIT {
        return Err(Error::Overflow(format!(
            "{} rules exceeds the materialization limit {MATERIALIZE_LIMIT}",
            prediction.total
        )));
    }

    let mut rules = Vec::with_capacity(prediction.total as usize);
    for parent in tree.parent_classes() {
        let successors = tree.successors_of(&parent.id);
        let advance: Vec<Target> = if successors.is_empty() {
            vec![Target::Next(parent.id.clone())]
        } else {
            successors.into_iter().map(Target::Concept).collect()
        };
        for (i, outcome) in enumerate_outcomes(parent.leaf_count(), tree.states())?
            .into_iter()
            .enumerate()
        {
            let conditions: Vec<Condition> = parent
                .leaves
                .iter()
                .zip(outcome.states())
                .map(|(leaf, &state)| Condition {
                    leaf: leaf.clone(),
                    state,
                })
                .collect();
            let (kind, recommendations) = if outcome.all_pass() {
                (RuleKind::Advance, advance.clone())
            } else {
                let failed = conditions
                    .iter()
                    .filter(|c| !c.state.is_pass())
                    .map(|c| Target::Concept(c.leaf.clone()))
                    .collect();
                (RuleKind::Remediate, failed)
            };
            rules.push(ClassificationRule {
                id: format!("{}#{}", parent.id, i + 1),
                parent: Some(parent.id.clone()),
                combination: Some(i + 1),
                kind,
                conditions,
                recommendations,
            });
        }
    }

    let ground = tree.ground_concept().ok().cloned();
    let recommendations = ground
        .as_ref()
        .and_then(|g| tree.parent_class(g))
        .map(|p| p.leaves.iter().cloned().map(Target::Concept).collect())
        .unwrap_or_default();
    rules.push(ClassificationRule {
        id: DEFAULT_RULE_ID.to_string(),
        parent: None,
        combination: None,
        kind: RuleKind::Default,
        conditions: Vec::new(),
        recommendations,
    });

    Ok(RuleSet {
        states: tree.states(),
        ground,
        rules,
        prediction,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParentCount {
    pub parent: ConceptId,
    pub predicted: u64,
    pub generated: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountReport {
    pub predicted: u64,
    pub generated: u64,
    pub per_parent: Vec<ParentCount>,
    pub default_rules: u64,
    pub pass: bool,
}

impl fmt::Display for CountReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "count: {}/{} {}",
            self.generated,
            self.predicted,
            if self.pass { "PASS" } else { "FAIL" }
        )?;
        for p in &self.per_parent {
            writeln!(f, "  {}: {}/{}", p.parent, p.generated, p.predicted)?;
        }
        write!(f, "  default: {}/1", self.default_rules)
    }
}

/// Checks the generated rules against the embedded prediction.
pub fn verify_count(rule_set: &RuleSet) -> CountReport {
    let mut generated_by_parent: HashMap<&ConceptId, u64> = HashMap::new();
    for rule in &rule_set.rules {
        if let Some(parent) = &rule.parent {
            *generated_by_parent.entry(parent).or_default() += 1;
        }
    }
    let per_parent: Vec<ParentCount> = rule_set
        .prediction
        .terms
        .iter()
        .map(|t| ParentCount {
            parent: t.parent.clone(),
            predicted: t.count,
            generated: generated_by_parent.get(&t.parent).copied().unwrap_or(0),
        })
        .collect();
    let default_rules = rule_set.default_rules().count() as u64;
    let generated = rule_set.rules.len() as u64;
    let pass = generated == rule_set.prediction.total
        && default_rules == 1
        && per_parent.iter().all(|p| p.predicted == p.generated)
        && generated_by_parent.len() == per_parent.len();
    CountReport {
        predicted: rule_set.prediction.total,
        generated,
        per_parent,
        default_rules,
        pass,
    }
}
