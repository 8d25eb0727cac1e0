//! Bracketed constituency trees, used for parsed English sentences and for
//! converted AMR graphs alike.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::preprocess::stem;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tree {
    Node {
        label: String,
        children: Vec<Tree>,
        /// Position of the AMR role token this node stands for, if any.
        origin: Option<usize>,
    },
    Leaf {
        token: String,
        index: usize,
    },
}

/// Syntactic context of one leaf: its tag and the phrase label above it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeafSyntax {
    pub tag: String,
    pub phrase: String,
}

pub const TOP_LABEL: &str = "TOP";

impl Tree {
    pub fn node(label: impl Into<String>, children: Vec<Tree>) -> Tree {
        Tree::Node {
            label: label.into(),
            children,
            origin: None,
        }
    }

    pub fn leaf(token: impl Into<String>, index: usize) -> Tree {
        Tree::Leaf {
            token: token.into(),
            index,
        }
    }

    pub fn label(&self) -> Option<&str> {
        match self {
            Tree::Node { label, .. } => Some(label),
            Tree::Leaf { .. } => None,
        }
    }

    pub fn children(&self) -> &[Tree] {
        match self {
            Tree::Node { children, .. } => children,
            Tree::Leaf { .. } => &[],
        }
    }

    pub fn is_preterminal(&self) -> bool {
        matches!(self, Tree::Node { children, .. }
            if children.len() == 1 && matches!(children[0], Tree::Leaf { .. }))
    }

    /// Leaves left to right as `(token, index)`.
    pub fn leaves(&self) -> Vec<(&str, usize)> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<(&'a str, usize)>) {
        match self {
            Tree::Leaf { token, index } => out.push((token, *index)),
            Tree::Node { children, .. } => {
                for c in children {
                    c.collect_leaves(out);
                }
            }
        }
    }

    pub fn leaf_tokens(&self) -> Vec<String> {
        self.leaves()
            .into_iter()
            .map(|(t, _)| t.to_string())
            .collect()
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            Tree::Leaf { .. } => 1,
            Tree::Node { children, .. } => children.iter().map(Tree::leaf_count).sum(),
        }
    }

    /// Number of internal nodes.
    pub fn node_count(&self) -> usize {
        match self {
            Tree::Leaf { .. } => 0,
            Tree::Node { children, .. } => 1 + children.iter().map(Tree::node_count).sum::<usize>(),
        }
    }

    /// Keeps the leaves accepted by `keep`, pruning internal nodes left
    /// without children. Returns `None` when nothing survives. Leaf indices
    /// are left untouched.
    pub fn filter_leaves(&self, keep: &dyn Fn(&str, usize) -> bool) -> Option<Tree> {
        match self {
            Tree::Leaf { token, index } => keep(token, *index).then(|| self.clone()),
            Tree::Node {
                label,
                children,
                origin,
            } => {
                let kept: Vec<Tree> = children
                    .iter()
                    .filter_map(|c| c.filter_leaves(keep))
                    .collect();
                (!kept.is_empty()).then(|| Tree::Node {
                    label: label.clone(),
                    children: kept,
                    origin: *origin,
                })
            }
        }
    }

    /// Renumbers leaves 0..n-1 and returns the old index of each new one.
    pub fn reindex(&mut self) -> Vec<usize> {
        let mut map = Vec::new();
        self.reindex_from(&mut map);
        map
    }

    fn reindex_from(&mut self, map: &mut Vec<usize>) {
        match self {
            Tree::Leaf { index, .. } => {
                map.push(*index);
                *index = map.len() - 1;
            }
            Tree::Node { children, .. } => {
                for c in children {
                    c.reindex_from(map);
                }
            }
        }
    }

    pub fn map_leaves(&mut self, f: &mut dyn FnMut(&str, usize) -> String) {
        match self {
            Tree::Leaf { token, index } => *token = f(token, *index),
            Tree::Node { children, .. } => {
                for c in children {
                    c.map_leaves(f);
                }
            }
        }
    }

    /// For each leaf, the closest ancestor label not in `skip` (the tag) and
    /// the next such label above it (the phrase). Missing labels read `TOP`.
    pub fn leaf_syntax(&self, skip: &[&str]) -> Vec<LeafSyntax> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.walk_syntax(skip, &mut path, &mut out);
        out
    }

    fn walk_syntax<'a>(
        &'a self,
        skip: &[&str],
        path: &mut Vec<&'a str>,
        out: &mut Vec<LeafSyntax>,
    ) {
        match self {
            Tree::Leaf { .. } => {
                let mut labels = path
                    .iter()
                    .rev()
                    .filter(|l| !skip.contains(l) && !l.is_empty());
                let tag = labels.next().copied().unwrap_or(TOP_LABEL).to_string();
                let phrase = labels.next().copied().unwrap_or(TOP_LABEL).to_string();
                out.push(LeafSyntax { tag, phrase });
            }
            Tree::Node {
                label, children, ..
            } => {
                path.push(label);
                for c in children {
                    c.walk_syntax(skip, path, out);
                }
                path.pop();
            }
        }
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tree::Leaf { token, .. } => f.write_str(token),
            Tree::Node {
                label, children, ..
            } => {
                write!(f, "({label}")?;
                for c in children {
                    write!(f, " {c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

pub fn parse_ptb(line: &str) -> Result<Tree> {
    let toks = tokenize(line);
    if toks.is_empty() {
        return Err(Error::Tree {
            column: 1,
            msg: "empty tree".into(),
        });
    }
    let mut pos = 0;
    let mut leaves = 0;
    let tree = parse_node(&toks, &mut pos, &mut leaves)?;
    if let Some(t) = toks.get(pos) {
        return Err(Error::Tree {
            column: t.1,
            msg: "unexpected input after the tree".into(),
        });
    }
    Ok(tree)
}

/// Reads one tree per non-empty line.
pub fn read_tree_file(text: &str) -> Result<Vec<Tree>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(parse_ptb)
        .collect()
}

fn tokenize(line: &str) -> Vec<(&str, usize)> {
    let mut toks = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        if c == '(' || c == ')' || c.is_whitespace() {
            if let Some(s) = start.take() {
                toks.push((&line[s..i], s + 1));
            }
            if !c.is_whitespace() {
                toks.push((&line[i..i + 1], i + 1));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        toks.push((&line[s..], s + 1));
    }
    toks
}

fn parse_node(toks: &[(&str, usize)], pos: &mut usize, leaves: &mut usize) -> Result<Tree> {
    let (open, col) = toks[*pos];
    if open != "(" {
        return Err(Error::Tree {
            column: col,
            msg: format!("expected '(' but found '{open}'"),
        });
    }
    *pos += 1;
    let label = match toks.get(*pos) {
        Some(&(t, _)) if t != "(" && t != ")" => {
            *pos += 1;
            t.to_string()
        }
        Some(_) => String::new(),
        None => {
            return Err(Error::Tree {
                column: col,
                msg: "unbalanced brackets".into(),
            })
        }
    };
    let mut children = Vec::new();
    loop {
        match toks.get(*pos) {
            None => {
                return Err(Error::Tree {
                    column: col,
                    msg: "unbalanced brackets".into(),
                })
            }
            Some(&(")", _)) => {
                *pos += 1;
                break;
            }
            Some(&("(", _)) => children.push(parse_node(toks, pos, leaves)?),
            Some(&(t, _)) => {
                children.push(Tree::leaf(t, *leaves));
                *leaves += 1;
                *pos += 1;
            }
        }
    }
    if children.is_empty() {
        return Err(Error::Tree {
            column: col,
            msg: "node without children".into(),
        });
    }
    Ok(Tree::Node {
        label,
        children,
        origin: None,
    })
}

/// Drops stop-word leaves, prunes emptied constituents, renumbers the
/// survivors and replaces their tokens by lowercased `stem_len` prefixes.
/// Returns the processed tree and the original index of every new leaf.
pub fn preprocess_tree(
    tree: &Tree,
    stoplist: &HashSet<String>,
    stem_len: usize,
) -> Result<(Tree, Vec<usize>)> {
    if stem_len == 0 {
        return Err(Error::InvalidArgument(
            "stem length must be at least 1".into(),
        ));
    }
    let mut out = tree
        .filter_leaves(&|tok, _| !stoplist.contains(&tok.to_lowercase()))
        .ok_or(Error::FullyFiltered)?;
    let map = out.reindex();
    out.map_leaves(&mut |tok, _| stem(tok, stem_len));
    Ok((out, map))
}
