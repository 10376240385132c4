#![allow(dead_code)]

use std::collections::{BTreeMap, HashSet};
use std::path::PathBuf;

use ontorules::{parse_tree, ConceptId, ConceptNode, OntologyTree};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const PAPER_TREES: [&str; 4] = [
    "fig2a_three_levels.json",
    "fig2b_four_levels.json",
    "fig1_regular.json",
    "fig3_sql.json",
];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn fixture(name: &str) -> OntologyTree {
    let source = std::fs::read_to_string(fixture_path(name)).expect("fixture readable");
    parse_tree(&source).expect("fixture valid")
}

pub fn id(s: &str) -> ConceptId {
    s.parse().unwrap()
}

/// Counts outcome vectors by materializing them with an odometer over
/// `0..states` per leaf and collecting them into a set. Shares no code with
/// the library's enumeration or closed form.
pub fn brute_force_vectors(leaves: usize, states: u32) -> usize {
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut digits = vec![0u32; leaves];
    loop {
        seen.insert(digits.clone());
        let mut pos = 0;
        loop {
            if pos == leaves {
                return seen.len();
            }
            digits[pos] += 1;
            if digits[pos] < states {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}

/// Brute-force rule count: materialized vectors per parent class, plus the default rule.
pub fn brute_force_total(tree: &OntologyTree) -> u64 {
    1 + tree
        .parent_classes()
        .iter()
        .map(|p| brute_force_vectors(p.leaves.len(), tree.states()) as u64)
        .sum::<u64>()
}

struct Draft {
    id: String,
    children: Vec<usize>,
}

/// Random tree with the following shape guarantees:
/// - the root has no leaf children and sits at level 1;
/// - 1..=8 parent classes with 1..=6 leaves each, all leaves at level <= 5;
/// - some parent classes hang below other parent classes or below
///   intermediate group nodes;
/// - prerequisites chain every parent class in random order, and the root
///   depends on the last one, so every parent class has a successor.
pub fn random_tree(seed: u64) -> OntologyTree {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states = rng.random_range(1..=3u32);
    let parent_count = rng.random_range(1..=8usize);

    let mut nodes = vec![Draft {
        id: "root".into(),
        children: Vec::new(),
    }];
    let mut level = vec![1u32];
    let mut parents: Vec<usize> = Vec::new();
    let mut groups = 0;

    for p in 0..parent_count {
        // Candidate attachment points: the root, earlier parents and groups
        // shallow enough that this parent's leaves stay within level 5.
        let candidates: Vec<usize> = (0..nodes.len())
            .filter(|&i| !nodes[i].id.contains("_leaf") && level[i] <= 3)
            .collect();
        let mut anchor = *candidates.choose(&mut rng).unwrap();
        if level[anchor] <= 2 && rng.random_bool(0.25) {
            let g = nodes.len();
            nodes.push(Draft {
                id: format!("group{groups}"),
                children: Vec::new(),
            });
            groups += 1;
            level.push(level[anchor] + 1);
            nodes[anchor].children.push(g);
            anchor = g;
        }
        let me = nodes.len();
        nodes.push(Draft {
            id: format!("p{p}"),
            children: Vec::new(),
        });
        level.push(level[anchor] + 1);
        nodes[anchor].children.push(me);
        parents.push(me);
        for l in 0..rng.random_range(1..=6usize) {
            let leaf = nodes.len();
            nodes.push(Draft {
                id: format!("p{p}_leaf{l}"),
                children: Vec::new(),
            });
            level.push(level[me] + 1);
            nodes[me].children.push(leaf);
        }
    }
    for node in &mut nodes {
        node.children.shuffle(&mut rng);
    }

    fn build(nodes: &[Draft], i: usize) -> ConceptNode {
        ConceptNode::branch(
            nodes[i].id.parse().unwrap(),
            nodes[i].children.iter().map(|&c| build(nodes, c)).collect(),
        )
    }
    let root = build(&nodes, 0);

    let mut chain: Vec<ConceptId> = parents
        .iter()
        .map(|&i| nodes[i].id.parse().unwrap())
        .collect();
    chain.shuffle(&mut rng);
    let mut prerequisites = BTreeMap::new();
    for pair in chain.windows(2) {
        prerequisites.insert(pair[1].clone(), pair[0].clone());
    }
    prerequisites.insert(id("root"), chain.last().unwrap().clone());

    OntologyTree::new(root, states, prerequisites, BTreeMap::new())
        .expect("generated tree is valid")
}

pub fn random_suite() -> Vec<OntologyTree> {
    (0..200).map(|s| random_tree(0x5eed_0000 + s)).collect()
}

fn rebuild(
    tree: &OntologyTree,
    root: ConceptNode,
    prerequisites: BTreeMap<ConceptId, ConceptId>,
) -> OntologyTree {
    OntologyTree::new(root, tree.states(), prerequisites, tree.materials().clone())
        .expect("rebuilt tree is valid")
}

/// Same tree with every sibling list shuffled.
pub fn permuted(tree: &OntologyTree, seed: u64) -> OntologyTree {
    fn go(node: &ConceptNode, rng: &mut ChaCha8Rng) -> ConceptNode {
        let mut children: Vec<ConceptNode> = node.children.iter().map(|c| go(c, rng)).collect();
        children.shuffle(rng);
        ConceptNode {
            id: node.id.clone(),
            label: node.label.clone(),
            children,
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rebuild(
        tree,
        go(tree.root(), &mut rng),
        tree.prerequisites().clone(),
    )
}

/// Same tree with one more leaf under `parent`.
pub fn with_extra_leaf(tree: &OntologyTree, parent: &ConceptId) -> OntologyTree {
    fn go(node: &ConceptNode, parent: &ConceptId) -> ConceptNode {
        let mut children: Vec<ConceptNode> = node.children.iter().map(|c| go(c, parent)).collect();
        if &node.id == parent {
            children.push(ConceptNode::leaf(
                format!("{}_extra_leaf", node.id).parse().unwrap(),
            ));
        }
        ConceptNode {
            id: node.id.clone(),
            label: node.label.clone(),
            children,
        }
    }
    rebuild(tree, go(tree.root(), parent), tree.prerequisites().clone())
}

/// Same tree with a new parent class of `leaves` leaves under the root.
/// When the tree has a prerequisite map the new parent depends on the ground.
pub fn with_extra_parent(tree: &OntologyTree, leaves: usize) -> OntologyTree {
    let mut root = tree.root().clone();
    let extra = ConceptNode::branch(
        id("extra_parent"),
        (0..leaves)
            .map(|i| ConceptNode::leaf(format!("extra_parent_leaf{i}").parse().unwrap()))
            .collect(),
    );
    root.children.push(extra);
    let mut prerequisites = tree.prerequisites().clone();
    if let Ok(ground) = tree.ground_concept() {
        prerequisites.insert(id("extra_parent"), ground.clone());
    }
    rebuild(tree, root, prerequisites)
}
