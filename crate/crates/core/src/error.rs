//! Error type shared by every stage of the pipeline.

use crate::ontology::ConceptId;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The ontology document is not valid JSON or does not match the schema.
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(
        "invalid concept identifier {0:?} (expected lowercase letters, digits and underscores)"
    )]
    InvalidConceptId(String),

    #[error("duplicate concept `{0}`")]
    DuplicateConcept(ConceptId),

    #[error("unknown concept `{0}`")]
    UnknownConcept(ConceptId),

    #[error("prerequisite cycle: {}", join_ids(.0, " -> "))]
    PrerequisiteCycle(Vec<ConceptId>),

    #[error("prerequisite link on leaf concept `{0}`")]
    PrerequisiteOnLeaf(ConceptId),

    #[error("prerequisite target `{0}` has no leaf concepts to assess")]
    PrerequisiteWithoutLeaves(ConceptId),

    /// Zero or several parent classes lack a prerequisite.
    #[error("expected exactly one ground concept, found {}: [{}]", .0.len(), join_ids(.0, ", "))]
    GroundConcept(Vec<ConceptId>),

    #[error("the ontology has no prerequisite map")]
    NoPrerequisites,

    #[error("state count must be at least 1, got {0}")]
    InvalidStates(i64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("arithmetic overflow while computing {0}")]
    Overflow(String),

    #[error("the ontology has no parent classes")]
    NoParentClasses,

    #[error("rule set does not belong to this ontology: {0}")]
    RuleSetMismatch(String),

    #[error("concept `{0}` has no prerequisite and is not the ground concept")]
    NoPrerequisite(ConceptId),

    #[error(
        "outcome does not match the leaves of `{parent}`: missing [{}], unexpected [{}]",
        join_ids(.missing, ", "),
        join_ids(.unexpected, ", ")
    )]
    OutcomeMismatch {
        parent: ConceptId,
        missing: Vec<ConceptId>,
        unexpected: Vec<ConceptId>,
    },

    #[error("`{0}` is the ground concept; no outcome may be supplied for it")]
    OutcomeForGround(ConceptId),

    #[error("state index {index} out of range for {states} states")]
    InvalidState { index: u32, states: u32 },

    #[error("pass probability must lie in [0, 1], got {0}")]
    InvalidProbability(f64),

    #[error("internal inconsistency: {0}")]
    Internal(String),
}

impl Error {
    pub fn is_overflow(&self) -> bool {
        matches!(self, Error::Overflow(_))
    }
}

fn join_ids(ids: &[ConceptId], sep: &str) -> String {
    ids.iter()
        .map(ConceptId::as_str)
        .collect::<Vec<_>>()
        .join(sep)
}
