//! Rule-count prediction, rule generation and classification for
//! prerequisite ontology trees.
//!
//! The pipeline runs parse → predict → generate → compile / classify:
//!
//! - [`ontology`] parses and validates trees and answers structural queries.
//! - [`predict`] computes the closed-form rule count and its term breakdown.
//! - [`outcome`] and [`rules`] enumerate outcome vectors and build the rule set.
//! - [`plans`] renders a rule set as agent plan text.
//! - [`classify`] evaluates outcomes against a rule set.

pub mod classify;
pub mod cli;
pub mod error;
pub mod ontology;
pub mod outcome;
pub mod plans;
pub mod predict;
pub mod rules;

pub use classify::{
    classify, exhaustive_coverage, simulate_cohort, AssessmentOutcome, Classification,
    CohortConfig, CohortReport, CoverageReport, MessageRecord, Performative, Recommendation,
};
pub use error::{Error, Result};
pub use ontology::{parse_tree, ConceptId, ConceptNode, OntologyTree, ParentClass, Regularity};
pub use outcome::{enumerate_outcomes, OutcomeState, OutcomeVector};
pub use plans::compile_plans;
pub use predict::{
    check_regular_equivalence, decompose, plot_points, predict_polynomial, predict_regular,
    PlotPoint, Prediction, RegularEquivalence, Term,
};
pub use rules::{
    generate_rules, verify_count, ClassificationRule, CountReport, RuleKind, RuleSet, Target,
};
