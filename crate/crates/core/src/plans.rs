//! Compiles a rule set into agent plan text.
//!
//! Each rule becomes one plan:
//!
//! ```text
//! @select_rule8
//! +!value(V)[source(agSupport)] : value("INSERT")
//!   & passed(select_all)
//!   & failed(select_where)
//! <- .send(agMaterial, achieve, hasKB(select, select_where)).
//! ```
//!
//! Plans are separated by one blank line and the document ends with a
//! newline. With more than two states, a non-pass state is rendered as
//! `failed(leaf)[state(k)]`; only the two-state output follows the classic
//! pass/fail form.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::ontology::{ConceptId, OntologyTree};
use crate::rules::{ClassificationRule, RuleKind, RuleSet, Target};

pub const SENDER: &str = "agSupport";
pub const CLASSIFIER: &str = "agClassifier";
pub const RECEIVER: &str = "agMaterial";

/// Literal for a material request, e.g. `hasKB(select, select_where)`.
pub fn has_kb(parent: Option<&ConceptId>, target: &Target) -> String {
    match parent {
        Some(p) => format!("hasKB({p}, {target})"),
        None => format!("hasKB({target})"),
    }
}

/// Literal reporting one assessed leaf, e.g. `passed(select_all)`.
pub fn assessment_literal(leaf: &ConceptId, state: crate::outcome::OutcomeState) -> String {
    if state.is_pass() {
        format!("passed({leaf})")
    } else if state.states() == 2 {
        format!("failed({leaf})")
    } else {
        format!("failed({leaf})[state({})]", state.code())
    }
}

fn desired_goal(targets: &[Target]) -> String {
    let goals: Vec<String> = targets
        .iter()
        .map(|t| format!("value(\"{}\")", t.to_string().to_uppercase()))
        .collect();
    match goals.len() {
        0 => "value(\"GROUND\")".to_string(),
        1 => goals.into_iter().next().unwrap_or_default(),
        _ => format!("({})", goals.join(" | ")),
    }
}

fn check_membership(rule_set: &RuleSet, tree: &OntologyTree) -> Result<()> {
    if rule_set.states != tree.states() {
        return Err(Error::RuleSetMismatch(format!(
            "rule set has {} states, tree has {}",
            rule_set.states,
            tree.states()
        )));
    }
    if rule_set.ground.as_ref() != tree.ground_concept().ok() {
        return Err(Error::RuleSetMismatch("ground concept differs".to_string()));
    }
    for rule in &rule_set.rules {
        let Some(parent) = &rule.parent else { continue };
        let Some(class) = tree.parent_class(parent) else {
            return Err(Error::RuleSetMismatch(format!(
                "rule {} names `{parent}`, which is not a parent class",
                rule.id
            )));
        };
        let leaves_match = class.leaves.len() == rule.conditions.len()
            && class
                .leaves
                .iter()
                .zip(&rule.conditions)
                .all(|(l, c)| *l == c.leaf);
        if !leaves_match {
            return Err(Error::RuleSetMismatch(format!(
                "rule {} conditions do not follow the leaves of `{parent}`",
                rule.id
            )));
        }
    }
    Ok(())
}

fn write_plan(
    out: &mut String,
    rule: &ClassificationRule,
    tree: &OntologyTree,
    ground: Option<&ConceptId>,
) {
    match (&rule.parent, rule.combination) {
        (Some(parent), Some(k)) => {
            let _ = writeln!(out, "@{parent}_rule{k}");
        }
        _ => out.push_str("@default_rule\n"),
    }

    let (goal, sends): (String, Vec<String>) = match rule.kind {
        RuleKind::Default => match ground {
            Some(g) => (
                desired_goal(&[Target::Concept(g.clone())]),
                rule.recommendations
                    .iter()
                    .map(|t| has_kb(Some(g), t))
                    .collect(),
            ),
            None => (desired_goal(&[]), vec!["hasKB(ground)".to_string()]),
        },
        _ => {
            // Every rule of a parent class sits under the same goal: the
            // concepts its all-pass rule unlocks.
            let parent = rule.parent.as_ref().expect("non-default rule has a parent");
            let successors = tree.successors_of(parent);
            let desired: Vec<Target> = if successors.is_empty() {
                vec![Target::Next(parent.clone())]
            } else {
                successors.into_iter().map(Target::Concept).collect()
            };
            let sends = if rule.kind == RuleKind::Advance {
                rule.recommendations
                    .iter()
                    .map(|t| has_kb(None, t))
                    .collect()
            } else {
                rule.recommendations
                    .iter()
                    .map(|t| has_kb(Some(parent), t))
                    .collect()
            };
            (desired_goal(&desired), sends)
        }
    };

    let _ = writeln!(out, "+!value(V)[source({SENDER})] : {goal}");
    for c in &rule.conditions {
        let _ = writeln!(out, "  & {}", assessment_literal(&c.leaf, c.state));
    }
    for (i, literal) in sends.iter().enumerate() {
        let lead = if i == 0 { "<- " } else { "   " };
        let end = if i + 1 == sends.len() { "." } else { ";" };
        let _ = writeln!(out, "{lead}.send({RECEIVER}, achieve, {literal}){end}");
    }
    if sends.is_empty() {
        out.push_str("<- true.\n");
    }
}

/// Renders every rule of `rule_set` as a plan, in rule order.
pub fn compile_plans(rule_set: &RuleSet, tree: &OntologyTree) -> Result<String> {
    check_membership(rule_set, tree)?;
    let ground = rule_set.ground.as_ref();
    let mut out = String::new();
    for (i, rule) in rule_set.rules.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        write_plan(&mut out, rule, tree, ground);
    }
    Ok(out)
}

/// Number of plan blocks in a compiled document.
pub fn count_plans(document: &str) -> usize {
    document.lines().filter(|l| l.starts_with('@')).count()
}
