//! Conversion of AMR graphs into constituency trees.
//!
//! Each node keeps only its defining parent edge, every concept becomes a
//! leaf under a pre-terminal `X`, and every role edge becomes an internal
//! node whose label comes from a [`LabelScheme`] and which dominates the
//! subtree of its child. No reordering is applied.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::penman::{AmrGraph, ElementRef, NodeKind};
use crate::preprocess::{linearize, ProvenanceMap, TokenKind};
use crate::treebank::Tree;

pub const ROOT_LABEL: &str = "ROOT";
pub const CONCEPT_PRETERMINAL: &str = "X";
pub const ROLE_PRETERMINAL: &str = "R";

/// Maps a role to its tree label: a class prefix followed by the role name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelScheme {
    pub default_prefix: String,
    /// Lowercased role (with colon) to prefix.
    pub prefixes: HashMap<String, String>,
}

const DEFAULT_LABELS: &str = include_str!("../config/labels.txt");

impl Default for LabelScheme {
    fn default() -> Self {
        LabelScheme::parse(DEFAULT_LABELS).expect("shipped label table is valid")
    }
}

impl LabelScheme {
    /// Reads `role<TAB>prefix` lines; the role `default` sets the fallback.
    pub fn parse(text: &str) -> Result<Self> {
        let mut scheme = LabelScheme {
            default_prefix: "R".into(),
            prefixes: HashMap::new(),
        };
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split_whitespace();
            let (Some(role), Some(prefix), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(Error::Config(format!(
                    "label table line {}: expected 'role<TAB>prefix'",
                    i + 1
                )));
            };
            if role == "default" {
                scheme.default_prefix = prefix.to_string();
            } else {
                scheme
                    .prefixes
                    .insert(role.to_lowercase(), prefix.to_string());
            }
        }
        Ok(scheme)
    }

    pub fn label(&self, role: &str) -> String {
        let prefix = self
            .prefixes
            .get(&role.to_lowercase())
            .unwrap_or(&self.default_prefix);
        format!("{prefix}{}", role.trim_start_matches(':'))
    }
}

/// Converted tree whose leaves are concepts only, renumbered 0..n-1, plus
/// the linearization position of every leaf. Role nodes carry the
/// linearization position of their role token in `origin`.
pub fn amr_to_tree(graph: &AmrGraph, scheme: &LabelScheme) -> (Tree, ProvenanceMap) {
    let concepts: HashSet<usize> = linearize(graph)
        .tokens
        .iter()
        .filter(|t| t.kind == TokenKind::Concept)
        .map(|t| t.origin)
        .collect();
    let mut tree = amr_token_tree(graph, scheme)
        .filter_leaves(&|_, pos| concepts.contains(&pos))
        .expect("the root concept always survives");
    let map = tree.reindex();
    (tree, ProvenanceMap(map))
}

/// Converted tree that also carries every role token: each role node gets a
/// first child `R` over a leaf holding the role label. Leaf indices are
/// linearization positions, so the leaf sequence is the linearization minus
/// the tokens of dropped reentrant edges.
pub fn amr_token_tree(graph: &AmrGraph, scheme: &LabelScheme) -> Tree {
    let stream = linearize(graph);
    let mut position: HashMap<ElementRef, usize> = HashMap::new();
    for t in &stream.tokens {
        if let Some(el) = t.element {
            position.insert(el, t.origin);
        }
    }
    let children = graph.children();
    let items = node_items(graph, &children, &position, scheme, graph.root);
    Tree::node(ROOT_LABEL, items)
}

fn node_items(
    graph: &AmrGraph,
    children: &[Vec<usize>],
    position: &HashMap<ElementRef, usize>,
    scheme: &LabelScheme,
    node: usize,
) -> Vec<Tree> {
    let mut items = vec![Tree::node(
        CONCEPT_PRETERMINAL,
        vec![Tree::leaf(
            graph.nodes[node].label(),
            position[&ElementRef::Concept(node)],
        )],
    )];
    if matches!(graph.nodes[node], NodeKind::Constant { .. }) {
        return items;
    }
    for &ei in &children[node] {
        let edge = &graph.edges[ei];
        if edge.reentrant {
            continue;
        }
        let role_pos = position[&ElementRef::Role(ei)];
        let mut sub = vec![Tree::node(
            ROLE_PRETERMINAL,
            vec![Tree::leaf(edge.role.clone(), role_pos)],
        )];
        sub.extend(node_items(graph, children, position, scheme, edge.child));
        items.push(Tree::Node {
            label: scheme.label(&edge.role),
            children: sub,
            origin: Some(role_pos),
        });
    }
    items
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::penman::parse_penman;

    #[test]
    fn single_concept() {
        let g = parse_penman("(g / go-01)").unwrap();
        let (t, map) = amr_to_tree(&g, &LabelScheme::default());
        assert_eq!(t.to_string(), "(ROOT (X go-01))");
        assert_eq!(map, ProvenanceMap(vec![0]));
    }

    #[test]
    fn role_nodes_dominate_children() {
        let g = parse_penman("(p / price-01 :quant 10 :topic (g / gas))").unwrap();
        let (t, map) = amr_to_tree(&g, &LabelScheme::default());
        assert_eq!(
            t.to_string(),
            "(ROOT (X price-01) (Aquant (X 10)) (Ctopic (X gas)))"
        );
        assert_eq!(map, ProvenanceMap(vec![0, 2, 4]));
        match &t.children()[1] {
            Tree::Node { origin, .. } => assert_eq!(*origin, Some(1)),
            _ => panic!(),
        }
    }

    #[test]
    fn reentrant_edge_dropped() {
        let g = parse_penman("(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-01 :ARG0 b))").unwrap();
        let (t, _) = amr_to_tree(&g, &LabelScheme::default());
        assert_eq!(t.leaf_tokens(), vec!["want-01", "boy", "go-01"]);
        assert_eq!(
            t.to_string(),
            "(ROOT (X want-01) (RARG0 (X boy)) (RARG1 (X go-01)))"
        );
    }

    #[test]
    fn token_tree_has_role_leaves() {
        let g = parse_penman("(g / go-01 :ARG1 (t / thing))").unwrap();
        let t = amr_token_tree(&g, &LabelScheme::default());
        assert_eq!(
            t.to_string(),
            "(ROOT (X go-01) (RARG1 (R :ARG1) (X thing)))"
        );
        assert_eq!(t.leaves(), vec![("go-01", 0), (":ARG1", 1), ("thing", 2)]);
    }

    #[test]
    fn label_table() {
        let s = LabelScheme::parse("default Q\n:mod M\n").unwrap();
        assert_eq!(s.label(":mod"), "Mmod");
        assert_eq!(s.label(":ARG0-of"), "QARG0-of");
        assert!(LabelScheme::parse(":mod\n").is_err());
    }
}
