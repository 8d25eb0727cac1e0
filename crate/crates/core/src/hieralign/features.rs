//! Sparse feature vectors and the feature templates of the aligner.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::alignment::AlignmentSet;
use crate::error::{Error, Result};
use crate::treebank::Tree;

use super::AlignmentInstance;

/// Sparse map from feature name to value. Zero entries are never stored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureVector(BTreeMap<String, f64>);

impl FeatureVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str) -> f64 {
        self.0.get(name).copied().unwrap_or(0.0)
    }

    pub fn add(&mut self, name: &str, value: f64) {
        if value == 0.0 {
            return;
        }
        match self.0.get_mut(name) {
            Some(v) => {
                *v += value;
                if *v == 0.0 {
                    self.0.remove(name);
                }
            }
            None => {
                self.0.insert(name.to_string(), value);
            }
        }
    }

    pub fn set(&mut self, name: &str, value: f64) {
        if value == 0.0 {
            self.0.remove(name);
        } else {
            self.0.insert(name.to_string(), value);
        }
    }

    /// `self += scale * other`.
    pub fn add_scaled(&mut self, other: &FeatureVector, scale: f64) {
        for (k, v) in &other.0 {
            self.add(k, scale * v);
        }
    }

    pub fn dot(&self, other: &FeatureVector) -> f64 {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small.0.iter().map(|(k, v)| v * large.get(k)).sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Entries in name order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, &v)| (k.as_str(), v))
    }
}

impl FromIterator<(String, f64)> for FeatureVector {
    fn from_iter<I: IntoIterator<Item = (String, f64)>>(iter: I) -> Self {
        let mut fv = FeatureVector::new();
        for (k, v) in iter {
            fv.add(&k, v);
        }
        fv
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Template {
    /// Source stem paired with target stem.
    Lex,
    SameStem,
    /// Source tag (role label for AMR tree tokens) paired with target
    /// pre-terminal.
    TagPair,
    /// Source phrase label paired with target phrase label.
    JointSyn,
    /// Log translation probabilities in both directions.
    TransProb,
    ThirdParty,
    /// Binned distance between relative positions.
    Distance,
    /// Per-link bias.
    Link,
    /// Target pre-terminal of an unaligned target leaf.
    Null,
    /// Whether the sources linked under a node are contiguous.
    Span,
}

impl Template {
    pub const ALL: [Template; 10] = [
        Template::Lex,
        Template::SameStem,
        Template::TagPair,
        Template::JointSyn,
        Template::TransProb,
        Template::ThirdParty,
        Template::Distance,
        Template::Link,
        Template::Null,
        Template::Span,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Template::Lex => "lex",
            Template::SameStem => "same-stem",
            Template::TagPair => "tag-pair",
            Template::JointSyn => "joint-syn",
            Template::TransProb => "tprob",
            Template::ThirdParty => "third-party",
            Template::Distance => "distance",
            Template::Link => "link",
            Template::Null => "null",
            Template::Span => "span",
        }
    }
}

impl FromStr for Template {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Template::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown feature template '{s}'")))
    }
}

/// The enabled templates. Written as a comma-separated list of names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet(BTreeSet<Template>);

impl Default for TemplateSet {
    fn default() -> Self {
        TemplateSet(Template::ALL.into_iter().collect())
    }
}

impl TemplateSet {
    pub fn only(templates: &[Template]) -> Self {
        TemplateSet(templates.iter().copied().collect())
    }

    pub fn contains(&self, t: Template) -> bool {
        self.0.contains(&t)
    }
}

impl fmt::Display for TemplateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.0.iter().map(|t| t.name()).collect();
        f.write_str(&names.join(","))
    }
}

impl FromStr for TemplateSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(Template::from_str)
            .collect::<Result<BTreeSet<_>>>()
            .map(TemplateSet)
    }
}

pub const DISTANCE_BINS: usize = 5;

/// Rounds to a multiple of 2^-10 so that sums of feature values are exact.
pub fn quantize(x: f64) -> f64 {
    (x * 1024.0).round() / 1024.0
}

impl AlignmentInstance {
    /// Features of a single link.
    pub fn link_features(&self, s: usize, t: usize) -> FeatureVector {
        let on = |t: Template| self.templates.contains(t);
        let src = &self.source[s];
        let tgt = &self.target_tokens[t];
        let mut fv = FeatureVector::new();
        if on(Template::Lex) {
            fv.add(&format!("lex:{}|{}", src.stem, tgt.stem), 1.0);
        }
        if on(Template::SameStem) && src.stem == tgt.stem {
            fv.add("same-stem", 1.0);
        }
        if on(Template::TagPair) {
            fv.add(&format!("tag:{}|{}", src.tag, tgt.tag), 1.0);
        }
        if on(Template::JointSyn) {
            fv.add(&format!("syn:{}|{}", src.phrase, tgt.phrase), 1.0);
        }
        if on(Template::TransProb) {
            let (st, ts) = self.tprob(s, t);
            fv.add("tprob-st", st);
            fv.add("tprob-ts", ts);
        }
        if on(Template::ThirdParty) && self.third_party.contains(s, t) {
            fv.add("third-party", 1.0);
        }
        if on(Template::Distance) {
            let (n, m) = (self.source.len(), self.target_tokens.len());
            let num = ((2 * s + 1) * m).abs_diff((2 * t + 1) * n) * DISTANCE_BINS;
            let bin = (num / (2 * n * m)).min(DISTANCE_BINS - 1);
            fv.add(&format!("dist:{bin}"), 1.0);
        }
        if on(Template::Link) {
            fv.add("link", 1.0);
        }
        fv
    }

    /// Features of target leaf `t` left unaligned.
    pub fn null_features(&self, t: usize) -> FeatureVector {
        let mut fv = FeatureVector::new();
        if self.templates.contains(Template::Null) {
            fv.add(&format!("null:{}", self.target_tokens[t].tag), 1.0);
        }
        fv
    }

    /// Features of an internal node labelled `label` given the distinct
    /// source indices linked below it, in increasing order.
    pub fn span_features(&self, label: &str, sources: &[usize]) -> FeatureVector {
        let mut fv = FeatureVector::new();
        if self.templates.contains(Template::Span) && sources.len() >= 2 {
            let contiguous = sources[sources.len() - 1] - sources[0] + 1 == sources.len();
            let kind = if contiguous {
                "span-contig"
            } else {
                "span-gap"
            };
            fv.add(&format!("{kind}:{label}"), 1.0);
        }
        fv
    }

    /// h(y) summed over links, unaligned target leaves and internal nodes.
    pub fn feature_vector(&self, alignment: &AlignmentSet) -> FeatureVector {
        let mut fv = FeatureVector::new();
        for (s, t) in alignment.pairs() {
            fv.add_scaled(&self.link_features(s, t), 1.0);
        }
        for t in 0..self.target_tokens.len() {
            if !alignment.pairs().any(|(_, tt)| tt == t) {
                fv.add_scaled(&self.null_features(t), 1.0);
            }
        }
        self.add_span_features(&self.target, alignment, &mut fv);
        fv
    }

    fn add_span_features(&self, node: &Tree, alignment: &AlignmentSet, fv: &mut FeatureVector) {
        if let Tree::Node {
            label, children, ..
        } = node
        {
            let covered: BTreeSet<usize> = node.leaves().into_iter().map(|(_, i)| i).collect();
            let sources: BTreeSet<usize> = alignment
                .pairs()
                .filter(|(_, t)| covered.contains(t))
                .map(|(s, _)| s)
                .collect();
            let sources: Vec<usize> = sources.into_iter().collect();
            fv.add_scaled(&self.span_features(label, &sources), 1.0);
            for c in children {
                self.add_span_features(c, alignment, fv);
            }
        }
    }

    /// Per-node shares of h(y) in post-order: a leaf contributes its links or
    /// its null features, an internal node its span features.
    pub fn node_contributions(&self, alignment: &AlignmentSet) -> Vec<FeatureVector> {
        let mut out = Vec::new();
        for node in &self.nodes {
            let mut fv = FeatureVector::new();
            match &node.kind {
                NodeKind::Leaf(t) => {
                    let links: Vec<usize> = alignment
                        .pairs()
                        .filter(|&(_, tt)| tt == *t)
                        .map(|(s, _)| s)
                        .collect();
                    if links.is_empty() {
                        fv = self.null_features(*t);
                    }
                    for s in links {
                        fv.add_scaled(&self.link_features(s, *t), 1.0);
                    }
                }
                NodeKind::Internal { label, .. } => {
                    let sources: BTreeSet<usize> = alignment
                        .pairs()
                        .filter(|&(_, t)| t >= node.lo && t < node.hi)
                        .map(|(s, _)| s)
                        .collect();
                    fv = self.span_features(label, &sources.into_iter().collect::<Vec<_>>());
                }
            }
            out.push(fv);
        }
        out
    }
}

#[derive(Debug, Clone)]
pub(crate) enum NodeKind {
    Leaf(usize),
    Internal { label: String, children: Vec<usize> },
}

/// A target tree node in post-order storage, covering leaves `lo..hi`.
#[derive(Debug, Clone)]
pub(crate) struct FlatNode {
    pub kind: NodeKind,
    pub lo: usize,
    pub hi: usize,
}

/// Post-order flattening; the root is the last node.
pub(crate) fn flatten(tree: &Tree) -> Vec<FlatNode> {
    fn go(tree: &Tree, out: &mut Vec<FlatNode>) -> usize {
        match tree {
            Tree::Leaf { index, .. } => out.push(FlatNode {
                kind: NodeKind::Leaf(*index),
                lo: *index,
                hi: index + 1,
            }),
            Tree::Node {
                label, children, ..
            } => {
                let ids: Vec<usize> = children.iter().map(|c| go(c, out)).collect();
                let lo = out[ids[0]].lo;
                let hi = out[ids[ids.len() - 1]].hi;
                out.push(FlatNode {
                    kind: NodeKind::Internal {
                        label: label.clone(),
                        children: ids,
                    },
                    lo,
                    hi,
                });
            }
        }
        out.len() - 1
    }
    let mut out = Vec::new();
    go(tree, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_entries_are_dropped() {
        let mut fv = FeatureVector::new();
        fv.add("a", 1.0);
        fv.add("a", -1.0);
        fv.add("b", 0.0);
        assert!(fv.is_empty());
        fv.set("c", 2.0);
        fv.set("c", 0.0);
        assert!(fv.is_empty());
    }

    #[test]
    fn dot_and_scaled_add() {
        let a: FeatureVector = [("x".to_string(), 2.0), ("y".to_string(), 1.0)]
            .into_iter()
            .collect();
        let b: FeatureVector = [("x".to_string(), 3.0), ("z".to_string(), 5.0)]
            .into_iter()
            .collect();
        assert_eq!(a.dot(&b), 6.0);
        let mut c = a.clone();
        c.add_scaled(&a, -1.0);
        assert!(c.is_empty());
    }

    #[test]
    fn template_sets_parse() {
        let set: TemplateSet = "lex, same-stem".parse().unwrap();
        assert!(set.contains(Template::Lex) && !set.contains(Template::Null));
        assert_eq!(set.to_string(), "lex,same-stem");
        assert_eq!(
            TemplateSet::default()
                .to_string()
                .parse::<TemplateSet>()
                .unwrap(),
            TemplateSet::default()
        );
        assert!("lex,bogus".parse::<TemplateSet>().is_err());
    }

    #[test]
    fn quantization_is_dyadic() {
        let q = quantize(-16.118_095_650_958_32);
        assert_eq!(q * 1024.0, (q * 1024.0).round());
    }
}
