//! Closed-form rule counts.
//!
//! Every parent class contributes one term `1 * T^N` (N = its leaf count,
//! T = states per leaf) and the whole tree adds a single default rule:
//!
//! ```text
//! R = 1 + sum_x T^(N_x)
//! ```
//!
//! For a regular tree (C parents, N leaves each) this collapses to
//! `R = C * T^N + 1`. All arithmetic is checked; an overflow is an error,
//! never a wrapped or saturated count.

use std::fmt::Write as _;

use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::error::{Error, Result};
use crate::ontology::{ConceptId, OntologyTree};

/// Number of default (ground) rules added to every tree.
pub const DEFAULT_RULES: u64 = 1;

/// One polynomial term: a parent class and the rules its leaves require.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    /// 1-based position among parent classes (pre-order).
    pub index: usize,
    pub parent: ConceptId,
    /// Always 1: every parent class stands alone.
    pub coefficient: u64,
    pub leaf_count: usize,
    /// `T^N`.
    pub count: u64,
}

impl Term {
    /// Combinatorial label such as `c1n4r16`.
    pub fn label(&self) -> String {
        format!("c{}n{}r{}", self.coefficient, self.leaf_count, self.count)
    }
}

impl Serialize for Term {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Term", 6)?;
        s.serialize_field("index", &self.index)?;
        s.serialize_field("parent", &self.parent)?;
        s.serialize_field("coefficient", &self.coefficient)?;
        s.serialize_field("n", &self.leaf_count)?;
        s.serialize_field("count", &self.count)?;
        s.serialize_field("label", &self.label())?;
        s.end()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Prediction {
    pub states: u32,
    pub terms: Vec<Term>,
    pub default_rule_count: u64,
    pub total: u64,
}

/// `states^leaves`, exact.
pub fn term_count(states: u32, leaves: usize) -> Result<u64> {
    let exp = u32::try_from(leaves).map_err(|_| overflow(states, leaves))?;
    u64::from(states)
        .checked_pow(exp)
        .ok_or_else(|| overflow(states, leaves))
}

fn overflow(states: u32, leaves: usize) -> Error {
    Error::Overflow(format!("{states}^{leaves}"))
}

/// Rule count of a regular tree: `C * T^N + 1`.
pub fn predict_regular(parent_count: u64, leaf_count: u64, states: u64) -> Result<u64> {
    for (name, value) in [
        ("parent count", parent_count),
        ("leaf count", leaf_count),
        ("states", states),
    ] {
        if value == 0 {
            return Err(Error::InvalidArgument(format!("{name} must be at least 1")));
        }
    }
    let exp =
        u32::try_from(leaf_count).map_err(|_| Error::Overflow(format!("{states}^{leaf_count}")))?;
    states
        .checked_pow(exp)
        .and_then(|p| p.checked_mul(parent_count))
        .and_then(|p| p.checked_add(DEFAULT_RULES))
        .ok_or_else(|| Error::Overflow(format!("{parent_count}*{states}^{leaf_count}+1")))
}

/// One term per parent class, in pre-order.
pub fn decompose(tree: &OntologyTree) -> Result<Vec<Term>> {
    tree.parent_classes()
        .iter()
        .enumerate()
        .map(|(i, parent)| {
            Ok(Term {
                index: i + 1,
                parent: parent.id.clone(),
                coefficient: 1,
                leaf_count: parent.leaf_count(),
                count: term_count(tree.states(), parent.leaf_count())?,
            })
        })
        .collect()
}

/// Rule count of any tree: `1 + sum T^N` over its parent classes.
pub fn predict_polynomial(tree: &OntologyTree) -> Result<Prediction> {
    let terms = decompose(tree)?;
    let total = terms
        .iter()
        .try_fold(DEFAULT_RULES, |acc, t| acc.checked_add(t.count))
        .ok_or_else(|| Error::Overflow("rule total".to_string()))?;
    Ok(Prediction {
        states: tree.states(),
        terms,
        default_rule_count: DEFAULT_RULES,
        total,
    })
}

/// Tab-separated term table; the last term row carries the `+ 1` default
/// marker and a `TOTAL` row closes the table.
pub fn render_table(prediction: &Prediction) -> String {
    let mut out = String::from("x\tparent\tterm\n");
    let last = prediction.terms.len();
    for term in &prediction.terms {
        let marker = if term.index == last { " + 1" } else { "" };
        let _ = writeln!(
            out,
            "{}\t{}\t{}{}",
            term.index,
            term.parent,
            term.label(),
            marker
        );
    }
    let _ = writeln!(out, "TOTAL\t{}", prediction.total);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct RegularEquivalence {
    pub applicable: bool,
    pub polynomial_total: u64,
    pub initialisation_total: Option<u64>,
    pub equal: Option<bool>,
}

/// Compares the polynomial with the regular formula when the tree is regular.
pub fn check_regular_equivalence(tree: &OntologyTree) -> Result<RegularEquivalence> {
    let polynomial_total = predict_polynomial(tree)?.total;
    let regularity = tree.is_regular();
    let initialisation_total = match regularity.leaf_count {
        Some(n) if regularity.regular => Some(predict_regular(
            regularity.parent_count as u64,
            n as u64,
            u64::from(tree.states()),
        )?),
        _ => None,
    };
    Ok(RegularEquivalence {
        applicable: regularity.regular,
        polynomial_total,
        initialisation_total,
        equal: initialisation_total.map(|r| r == polynomial_total),
    })
}

/// Running total of the polynomial, one point per term. `cumulative`
/// includes the default rule, so the last point equals the predicted total.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct PlotPoint {
    pub x: usize,
    pub parent: ConceptId,
    pub leaf_count: usize,
    pub term_count: u64,
    pub cumulative: u64,
}

pub fn plot_points(tree: &OntologyTree) -> Result<Vec<PlotPoint>> {
    let mut cumulative = DEFAULT_RULES;
    decompose(tree)?
        .into_iter()
        .map(|term| {
            cumulative = cumulative
                .checked_add(term.count)
                .ok_or_else(|| Error::Overflow("cumulative rule total".to_string()))?;
            Ok(PlotPoint {
                x: term.index,
                parent: term.parent,
                leaf_count: term.leaf_count,
                term_count: term.count,
                cumulative,
            })
        })
        .collect()
}

pub const PLOT_CSV_HEADER: &str = "x,parent,N,term_count,cumulative_R";

pub fn render_plot_csv(points: &[PlotPoint]) -> String {
    let mut out = format!("{PLOT_CSV_HEADER}\n");
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            p.x, p.parent, p.leaf_count, p.term_count, p.cumulative
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::{ConceptNode, OntologyTree};
    use std::collections::BTreeMap;

    /// Root with one parent per entry of `counts`, each with that many leaves.
    fn flat(counts: &[usize], states: u32) -> OntologyTree {
        let parents = counts
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                let leaves = (0..n)
                    .map(|j| ConceptNode::leaf(format!("p{i}_l{j}").parse().unwrap()))
                    .collect();
                ConceptNode::branch(format!("p{i}").parse().unwrap(), leaves)
            })
            .collect();
        let root = ConceptNode::branch("root".parse().unwrap(), parents);
        OntologyTree::new(root, states, BTreeMap::new(), BTreeMap::new()).unwrap()
    }

    #[test]
    fn regular_formula() {
        assert_eq!(predict_regular(3, 2, 2).unwrap(), 13);
        assert_eq!(predict_regular(1, 1, 1).unwrap(), 2);
        assert_eq!(predict_regular(4, 3, 2).unwrap(), 33);
        assert!(matches!(
            predict_regular(0, 2, 2),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            predict_regular(1, 0, 2),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            predict_regular(1, 2, 0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(predict_regular(2, 64, 2).unwrap_err().is_overflow());
        assert!(predict_regular(1, 64, 2).unwrap_err().is_overflow());
    }

    #[test]
    fn polynomial_totals() {
        assert_eq!(predict_polynomial(&flat(&[4, 1, 3], 2)).unwrap().total, 27);
        assert_eq!(predict_polynomial(&flat(&[2, 2, 2], 2)).unwrap().total, 13);
        assert_eq!(predict_polynomial(&flat(&[], 2)).unwrap().total, 1);
        assert_eq!(predict_polynomial(&flat(&[5, 5], 1)).unwrap().total, 3);
        assert!(predict_polynomial(&flat(&[64], 2))
            .unwrap_err()
            .is_overflow());
        assert_eq!(
            predict_polynomial(&flat(&[63], 2)).unwrap().total,
            (1u64 << 63) + 1
        );
    }

    #[test]
    fn labels_and_table() {
        let prediction = predict_polynomial(&flat(&[4, 1, 3], 2)).unwrap();
        let labels: Vec<String> = prediction.terms.iter().map(Term::label).collect();
        assert_eq!(labels, ["c1n4r16", "c1n1r2", "c1n3r8"]);
        assert_eq!(
            render_table(&prediction),
            "x\tparent\tterm\n1\tp0\tc1n4r16\n2\tp1\tc1n1r2\n3\tp2\tc1n3r8 + 1\nTOTAL\t27\n"
        );
        let empty = predict_polynomial(&flat(&[], 2)).unwrap();
        assert_eq!(render_table(&empty), "x\tparent\tterm\nTOTAL\t1\n");
    }

    #[test]
    fn single_parent_single_leaf() {
        let tree = flat(&[1], 2);
        let terms = decompose(&tree).unwrap();
        assert_eq!(terms.len(), 1);
        assert_eq!(terms[0].label(), "c1n1r2");
        assert_eq!(predict_polynomial(&tree).unwrap().total, 3);
        let eq = check_regular_equivalence(&tree).unwrap();
        assert_eq!(
            eq,
            RegularEquivalence {
                applicable: true,
                polynomial_total: 3,
                initialisation_total: Some(3),
                equal: Some(true)
            }
        );
    }

    #[test]
    fn equivalence_not_applicable_for_irregular() {
        let eq = check_regular_equivalence(&flat(&[4, 1, 3], 2)).unwrap();
        assert!(!eq.applicable);
        assert_eq!(eq.polynomial_total, 27);
        assert_eq!(eq.initialisation_total, None);
        assert_eq!(eq.equal, None);
    }

    #[test]
    fn plot_running_sum() {
        let points = plot_points(&flat(&[4, 1, 3, 3, 2], 2)).unwrap();
        let counts: Vec<u64> = points.iter().map(|p| p.term_count).collect();
        let cumulative: Vec<u64> = points.iter().map(|p| p.cumulative).collect();
        assert_eq!(counts, [16, 2, 8, 8, 4]);
        assert_eq!(cumulative, [17, 19, 27, 35, 39]);
        assert!(plot_points(&flat(&[], 2)).unwrap().is_empty());
        assert_eq!(render_plot_csv(&[]), "x,parent,N,term_count,cumulative_R\n");
        assert!(render_plot_csv(&points).ends_with("5,p4,2,4,39\n"));
    }

    #[test]
    fn term_serializes_label() {
        let terms = decompose(&flat(&[2], 3)).unwrap();
        let json = serde_json::to_string(&terms[0]).unwrap();
        assert_eq!(
            json,
            r#"{"index":1,"parent":"p0","coefficient":1,"n":2,"count":9,"label":"c1n2r9"}"#
        );
    }
}
