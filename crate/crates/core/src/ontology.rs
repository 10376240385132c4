//! Ontology trees: parsing, validation and structural queries.
//!
//! A tree is made of concepts. A concept without children is a *leaf*; a
//! concept with at least one leaf child is a *parent class*, wherever it sits
//! in the tree (the root included). Only leaf children count towards a parent
//! class, so a node that owns one leaf and one internal child is a parent
//! class with a single leaf while its internal child is reported separately.
//!
//! Prerequisite links are explicit: `prerequisites` maps a concept to the
//! parent class that must be mastered before it. When the map is nonempty,
//! exactly one parent class has no prerequisite of its own; that is the
//! ground concept.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Normalized concept identifier: lowercase ASCII letters, digits and `_`.
///
/// Parsing lowercases the input and maps `-` to `_`, so `ORDER-BY`,
/// `order-by` and `order_by` all name the same concept.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ConceptId(String);

impl ConceptId {
    pub fn new(raw: &str) -> Result<Self> {
        let normalized: String = raw
            .trim()
            .chars()
            .map(|c| {
                if c == '-' {
                    '_'
                } else {
                    c.to_ascii_lowercase()
                }
            })
            .collect();
        let valid = !normalized.is_empty()
            && normalized
                .chars()
                .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_');
        if valid {
            Ok(ConceptId(normalized))
        } else {
            Err(Error::InvalidConceptId(raw.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ConceptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for ConceptId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ConceptId::new(s)
    }
}

impl TryFrom<String> for ConceptId {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        ConceptId::new(&value)
    }
}

impl From<ConceptId> for String {
    fn from(id: ConceptId) -> String {
        id.0
    }
}

/// A node of the concept tree. Children keep document order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptNode {
    pub id: ConceptId,
    pub label: Option<String>,
    pub children: Vec<ConceptNode>,
}

impl ConceptNode {
    pub fn leaf(id: ConceptId) -> Self {
        ConceptNode {
            id,
            label: None,
            children: Vec::new(),
        }
    }

    pub fn branch(id: ConceptId, children: Vec<ConceptNode>) -> Self {
        ConceptNode {
            id,
            label: None,
            children,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Pre-order walk: the node itself, then each child subtree in order.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a ConceptNode, u32)) {
        fn go<'a>(node: &'a ConceptNode, level: u32, visit: &mut impl FnMut(&'a ConceptNode, u32)) {
            visit(node, level);
            for child in &node.children {
                go(child, level + 1, visit);
            }
        }
        go(self, 1, visit);
    }
}

/// A parent class together with its leaf children, in document order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParentClass {
    pub id: ConceptId,
    pub leaves: Vec<ConceptId>,
}

impl ParentClass {
    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }
}

/// Outcome of the regularity check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Regularity {
    pub regular: bool,
    /// Number of parent classes.
    pub parent_count: usize,
    /// Shared leaf count, present only for regular trees.
    pub leaf_count: Option<usize>,
}

#[derive(Debug, Clone)]
struct NodeInfo {
    level: u32,
    is_leaf: bool,
    /// Index into `parents` when this node is a parent class.
    parent_class: Option<usize>,
}

/// A validated, immutable ontology tree.
#[derive(Debug, Clone)]
pub struct OntologyTree {
    root: ConceptNode,
    states: u32,
    prerequisites: BTreeMap<ConceptId, ConceptId>,
    materials: BTreeMap<ConceptId, String>,
    order: Vec<ConceptId>,
    info: HashMap<ConceptId, NodeInfo>,
    parents: Vec<ParentClass>,
    ground: Option<ConceptId>,
}

pub const DEFAULT_STATES: u32 = 2;

impl OntologyTree {
    /// Builds a tree and checks every structural and prerequisite invariant.
    pub fn new(
        root: ConceptNode,
        states: u32,
        prerequisites: BTreeMap<ConceptId, ConceptId>,
        materials: BTreeMap<ConceptId, String>,
    ) -> Result<Self> {
        if states == 0 {
            return Err(Error::InvalidStates(0));
        }

        let mut order = Vec::new();
        let mut info = HashMap::new();
        let mut parents = Vec::new();
        let mut duplicate = None;
        root.walk(&mut |node, level| {
            if info.contains_key(&node.id) {
                duplicate.get_or_insert_with(|| node.id.clone());
                return;
            }
            let leaves: Vec<ConceptId> = node
                .children
                .iter()
                .filter(|c| c.is_leaf())
                .map(|c| c.id.clone())
                .collect();
            let parent_class = if leaves.is_empty() {
                None
            } else {
                parents.push(ParentClass {
                    id: node.id.clone(),
                    leaves,
                });
                Some(parents.len() - 1)
            };
            order.push(node.id.clone());
            info.insert(
                node.id.clone(),
                NodeInfo {
                    level,
                    is_leaf: node.is_leaf(),
                    parent_class,
                },
            );
        });
        if let Some(id) = duplicate {
            return Err(Error::DuplicateConcept(id));
        }

        let mut tree = OntologyTree {
            root,
            states,
            prerequisites,
            materials,
            order,
            info,
            parents,
            ground: None,
        };
        tree.ground = tree.validate_prerequisites()?;
        for id in tree.materials.keys() {
            if !tree.info.contains_key(id) {
                return Err(Error::UnknownConcept(id.clone()));
            }
        }
        Ok(tree)
    }

    fn validate_prerequisites(&self) -> Result<Option<ConceptId>> {
        if self.prerequisites.is_empty() {
            return Ok(None);
        }
        for (concept, prerequisite) in &self.prerequisites {
            for id in [concept, prerequisite] {
                match self.info.get(id) {
                    None => return Err(Error::UnknownConcept(id.clone())),
                    Some(node) if node.is_leaf => {
                        return Err(Error::PrerequisiteOnLeaf(id.clone()))
                    }
                    Some(_) => {}
                }
            }
            if self.info[prerequisite].parent_class.is_none() {
                return Err(Error::PrerequisiteWithoutLeaves(prerequisite.clone()));
            }
        }

        // Each concept has at most one prerequisite, so following links from
        // any start either terminates or revisits a concept on the path.
        let mut settled: HashSet<&ConceptId> = HashSet::new();
        for start in self.prerequisites.keys() {
            let mut path: Vec<&ConceptId> = Vec::new();
            let mut current = start;
            loop {
                if settled.contains(current) {
                    break;
                }
                if let Some(pos) = path.iter().position(|id| *id == current) {
                    let mut cycle: Vec<ConceptId> =
                        path[pos..].iter().map(|id| (*id).clone()).collect();
                    cycle.push(current.clone());
                    return Err(Error::PrerequisiteCycle(cycle));
                }
                path.push(current);
                match self.prerequisites.get(current) {
                    Some(next) => current = next,
                    None => break,
                }
            }
            settled.extend(path);
        }

        let roots: Vec<ConceptId> = self
            .parents
            .iter()
            .filter(|p| !self.prerequisites.contains_key(&p.id))
            .map(|p| p.id.clone())
            .collect();
        match roots.as_slice() {
            [ground] => Ok(Some(ground.clone())),
            _ => Err(Error::GroundConcept(roots)),
        }
    }

    pub fn root(&self) -> &ConceptNode {
        &self.root
    }

    /// Number of assessment states per leaf (2 for pass/fail).
    pub fn states(&self) -> u32 {
        self.states
    }

    /// Copy of this tree with a different state count.
    pub fn with_states(&self, states: u32) -> Result<Self> {
        if states == 0 {
            return Err(Error::InvalidStates(0));
        }
        let mut tree = self.clone();
        tree.states = states;
        Ok(tree)
    }

    pub fn prerequisites(&self) -> &BTreeMap<ConceptId, ConceptId> {
        &self.prerequisites
    }

    pub fn has_prerequisites(&self) -> bool {
        !self.prerequisites.is_empty()
    }

    pub fn prerequisite_of(&self, concept: &ConceptId) -> Option<&ConceptId> {
        self.prerequisites.get(concept)
    }

    /// Concepts whose prerequisite is `concept`, in pre-order.
    pub fn successors_of(&self, concept: &ConceptId) -> Vec<ConceptId> {
        self.order
            .iter()
            .filter(|id| self.prerequisites.get(*id) == Some(concept))
            .cloned()
            .collect()
    }

    pub fn materials(&self) -> &BTreeMap<ConceptId, String> {
        &self.materials
    }

    pub fn material(&self, concept: &ConceptId) -> Option<&str> {
        self.materials.get(concept).map(String::as_str)
    }

    pub fn contains(&self, concept: &ConceptId) -> bool {
        self.info.contains_key(concept)
    }

    pub fn is_leaf(&self, concept: &ConceptId) -> Option<bool> {
        self.info.get(concept).map(|n| n.is_leaf)
    }

    /// All concept ids in pre-order.
    pub fn concepts(&self) -> &[ConceptId] {
        &self.order
    }

    pub fn leaf_total(&self) -> usize {
        self.info.values().filter(|n| n.is_leaf).count()
    }

    /// Parent classes in pre-order with their leaf children in document order.
    pub fn parent_classes(&self) -> &[ParentClass] {
        &self.parents
    }

    pub fn parent_class(&self, concept: &ConceptId) -> Option<&ParentClass> {
        self.info
            .get(concept)
            .and_then(|n| n.parent_class)
            .map(|i| &self.parents[i])
    }

    pub fn is_regular(&self) -> Regularity {
        let parent_count = self.parents.len();
        let shared = self.parents.first().map(ParentClass::leaf_count);
        let regular =
            shared.is_some() && self.parents.iter().all(|p| Some(p.leaf_count()) == shared);
        Regularity {
            regular,
            parent_count,
            leaf_count: if regular { shared } else { None },
        }
    }

    /// The unique parent class without a prerequisite.
    pub fn ground_concept(&self) -> Result<&ConceptId> {
        if self.prerequisites.is_empty() {
            return Err(Error::NoPrerequisites);
        }
        // `new` guarantees the ground exists whenever the map is nonempty.
        self.ground
            .as_ref()
            .ok_or_else(|| Error::GroundConcept(Vec::new()))
    }

    pub fn level(&self, concept: &ConceptId) -> Option<u32> {
        self.info.get(concept).map(|n| n.level)
    }

    /// Depth of every concept; the root sits at level 1.
    pub fn levels(&self) -> BTreeMap<ConceptId, u32> {
        self.info
            .iter()
            .map(|(id, n)| (id.clone(), n.level))
            .collect()
    }

    /// Renders the tree back into the JSON document format.
    pub fn to_document(&self) -> String {
        let doc = RawDocument {
            states: i64::from(self.states),
            root: RawNode::from(&self.root),
            prerequisites: self
                .prerequisites
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
            materials: self
                .materials
                .iter()
                .map(|(k, v)| (k.to_string(), v.clone()))
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("document serialization cannot fail")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    #[serde(default = "default_states")]
    states: i64,
    root: RawNode,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    prerequisites: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    materials: BTreeMap<String, String>,
}

fn default_states() -> i64 {
    i64::from(DEFAULT_STATES)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    children: Vec<RawNode>,
}

impl From<&ConceptNode> for RawNode {
    fn from(node: &ConceptNode) -> Self {
        RawNode {
            id: node.id.to_string(),
            label: node.label.clone(),
            children: node.children.iter().map(RawNode::from).collect(),
        }
    }
}

impl RawNode {
    fn into_node(self) -> Result<ConceptNode> {
        Ok(ConceptNode {
            id: ConceptId::new(&self.id)?,
            label: self.label,
            children: self
                .children
                .into_iter()
                .map(RawNode::into_node)
                .collect::<Result<_>>()?,
        })
    }
}

/// Parses and validates an ontology document (JSON).
pub fn parse_tree(source: &str) -> Result<OntologyTree> {
    let raw: RawDocument = serde_json::from_str(source).map_err(|e| Error::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if raw.states < 1 {
        return Err(Error::InvalidStates(raw.states));
    }
    let states = u32::try_from(raw.states).map_err(|_| Error::InvalidStates(raw.states))?;
    let root = raw.root.into_node()?;
    let prerequisites = raw
        .prerequisites
        .iter()
        .map(|(k, v)| Ok((ConceptId::new(k)?, ConceptId::new(v)?)))
        .collect::<Result<_>>()?;
    let materials = raw
        .materials
        .into_iter()
        .map(|(k, v)| Ok((ConceptId::new(&k)?, v)))
        .collect::<Result<_>>()?;
    OntologyTree::new(root, states, prerequisites, materials)
}
