//! Hierarchical k-best alignment search over a target constituency tree.
//!
//! Each target leaf proposes a small set of columns (no link, one link, or
//! two links to nearby source tokens). Internal nodes combine the beams of
//! their children from left to right and score what is visible at the node.

mod features;

use std::cmp::Ordering;
use std::fmt::Write as _;

use features::{flatten, FlatNode, NodeKind};
pub use features::{quantize, FeatureVector, Template, TemplateSet, DISTANCE_BINS};

use crate::alignment::{AlignmentSet, LinkType};
use crate::error::{Error, Result};
use crate::ibm1::TranslationTable;
use crate::treebank::Tree;

pub const DEFAULT_BEAM: usize = 128;
pub const DEFAULT_WINDOW: usize = 2;
pub const DEFAULT_CAP_FACTOR: usize = 4;

/// A token on either side with the syntax the templates look at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SideToken {
    pub stem: String,
    pub tag: String,
    pub phrase: String,
    pub kind: LinkType,
}

/// One sentence pair ready for decoding. Target leaves are numbered
/// `0..m` left to right.
#[derive(Debug, Clone)]
pub struct AlignmentInstance {
    pub source: Vec<SideToken>,
    pub target: Tree,
    pub target_tokens: Vec<SideToken>,
    pub third_party: AlignmentSet,
    pub templates: TemplateSet,
    /// Whether the AMR side is the source.
    pub amr_is_source: bool,
    tprob: Vec<(f64, f64)>,
    nodes: Vec<FlatNode>,
}

impl AlignmentInstance {
    /// `table_st` gives t(target | source), `table_ts` gives t(source | target).
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        source: Vec<SideToken>,
        target: Tree,
        target_tokens: Vec<SideToken>,
        third_party: AlignmentSet,
        table_st: &TranslationTable,
        table_ts: &TranslationTable,
        templates: TemplateSet,
        amr_is_source: bool,
    ) -> Result<Self> {
        let leaves = target.leaves();
        if leaves.iter().enumerate().any(|(i, &(_, idx))| i != idx) {
            return Err(Error::InvalidArgument(
                "target leaves must be numbered 0..m in order".into(),
            ));
        }
        if leaves.len() != target_tokens.len() {
            return Err(Error::Mismatch(format!(
                "{} target leaves but {} target tokens",
                leaves.len(),
                target_tokens.len()
            )));
        }
        if source.is_empty() {
            return Err(Error::FullyFiltered);
        }
        third_party.check_bounds(source.len(), target_tokens.len())?;
        let clip = |p: f64, floor: f64| quantize(p.max(floor).max(f64::MIN_POSITIVE).ln());
        let mut tprob = Vec::with_capacity(source.len() * target_tokens.len());
        for s in &source {
            for t in &target_tokens {
                tprob.push((
                    clip(table_st.prob(&s.stem, &t.stem), table_st.floor),
                    clip(table_ts.prob(&t.stem, &s.stem), table_ts.floor),
                ));
            }
        }
        let nodes = flatten(&target);
        Ok(AlignmentInstance {
            source,
            target,
            target_tokens,
            third_party,
            templates,
            amr_is_source,
            tprob,
            nodes,
        })
    }

    pub fn source_len(&self) -> usize {
        self.source.len()
    }

    pub fn target_len(&self) -> usize {
        self.target_tokens.len()
    }

    pub(crate) fn tprob(&self, s: usize, t: usize) -> (f64, f64) {
        self.tprob[s * self.target_tokens.len() + t]
    }

    /// Typed by whichever endpoint is an AMR token.
    pub fn link_type(&self, s: usize, t: usize) -> LinkType {
        match self.source[s].kind {
            LinkType::Word => self.target_tokens[t].kind,
            k => k,
        }
    }

    pub fn typed(&self, links: impl IntoIterator<Item = (usize, usize)>) -> AlignmentSet {
        links
            .into_iter()
            .map(|(s, t)| (s, t, self.link_type(s, t)))
            .collect()
    }

    /// Whether the decoder can produce `links` under `params`.
    pub fn in_search_space(&self, links: &AlignmentSet, params: &DecodeParams) -> bool {
        if links
            .check_bounds(self.source_len(), self.target_len())
            .is_err()
        {
            return false;
        }
        let mut columns = vec![Vec::new(); self.target_len()];
        for (s, t) in links.pairs() {
            columns[t].push(s);
        }
        let columns_ok = columns.iter().all(|c| match c[..] {
            [] | [_] => true,
            [a, b] => a.abs_diff(b) <= params.window,
            _ => false,
        });
        let mut used = vec![false; self.source_len()];
        let sources_ok = !params.one_link_per_source(self)
            || links
                .pairs()
                .all(|(s, _)| !std::mem::replace(&mut used[s], true));
        columns_ok && sources_ok
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeParams {
    /// Beam size kept at every internal node.
    pub k: usize,
    /// Largest source gap inside a two-link column.
    pub window: usize,
    /// A leaf keeps at most `cap_factor * k` columns.
    pub cap_factor: usize,
    /// Link every AMR token to at most one English token when AMR is the
    /// source side.
    pub one_link_per_amr_token: bool,
}

impl Default for DecodeParams {
    fn default() -> Self {
        DecodeParams {
            k: DEFAULT_BEAM,
            window: DEFAULT_WINDOW,
            cap_factor: DEFAULT_CAP_FACTOR,
            one_link_per_amr_token: false,
        }
    }
}

impl DecodeParams {
    fn one_link_per_source(&self, inst: &AlignmentInstance) -> bool {
        self.one_link_per_amr_token && inst.amr_is_source
    }
}

/// 1 - F1 over exact link matches, with F1 of two empty sets taken as 1.
pub fn f1_loss(gold: &AlignmentSet, hyp: &AlignmentSet) -> f64 {
    loss_from_counts(hyp.intersection_count(gold), gold.len(), hyp.len())
}

fn loss_from_counts(matched: usize, gold: usize, hyp: usize) -> f64 {
    if gold + hyp == 0 {
        0.0
    } else {
        1.0 - (2 * matched) as f64 / (gold + hyp) as f64
    }
}

#[derive(Debug, Clone)]
struct Hyp {
    links: Vec<(usize, usize)>,
    score: f64,
    matched: usize,
    key: f64,
}

fn rank(a: &Hyp, b: &Hyp) -> Ordering {
    b.key
        .partial_cmp(&a.key)
        .unwrap_or(Ordering::Equal)
        .then(a.links.len().cmp(&b.links.len()))
        .then_with(|| a.links.cmp(&b.links))
}

fn prune(mut beam: Vec<Hyp>, limit: usize) -> Vec<Hyp> {
    beam.sort_by(rank);
    beam.dedup_by(|a, b| a.links == b.links);
    beam.truncate(limit);
    beam
}

fn share_source(a: &[(usize, usize)], b: &[(usize, usize)]) -> bool {
    a.iter().any(|x| b.iter().any(|y| x.0 == y.0))
}

struct Search<'a> {
    inst: &'a AlignmentInstance,
    params: &'a DecodeParams,
    weights: &'a FeatureVector,
    link_score: Vec<f64>,
    gold: Option<&'a AlignmentSet>,
    /// Gold links per target column.
    gold_cols: Vec<usize>,
}

impl Search<'_> {
    fn is_gold(&self, s: usize, t: usize) -> bool {
        self.gold.is_some_and(|g| g.contains(s, t))
    }

    fn gold_in(&self, lo: usize, hi: usize) -> usize {
        self.gold_cols[lo..hi].iter().sum()
    }

    fn keyed(&self, mut h: Hyp, gold_in_span: usize) -> Hyp {
        h.key = match self.gold {
            Some(_) => h.score + loss_from_counts(h.matched, gold_in_span, h.links.len()),
            None => h.score,
        };
        h
    }

    fn leaf(&self, t: usize) -> Vec<Hyp> {
        let n = self.inst.source_len();
        let m = self.inst.target_len();
        let gold = self.gold_cols[t];
        let mut out = vec![self.keyed(
            Hyp {
                links: Vec::new(),
                score: self.weights.dot(&self.inst.null_features(t)),
                matched: 0,
                key: 0.0,
            },
            gold,
        )];
        for s in 0..n {
            let single = Hyp {
                links: vec![(s, t)],
                score: self.link_score[s * m + t],
                matched: usize::from(self.is_gold(s, t)),
                key: 0.0,
            };
            out.push(self.keyed(single, gold));
            for s2 in s + 1..n.min(s + self.params.window + 1) {
                let pair = Hyp {
                    links: vec![(s, t), (s2, t)],
                    score: self.link_score[s * m + t] + self.link_score[s2 * m + t],
                    matched: usize::from(self.is_gold(s, t)) + usize::from(self.is_gold(s2, t)),
                    key: 0.0,
                };
                out.push(self.keyed(pair, gold));
            }
        }
        prune(out, self.params.cap_factor.saturating_mul(self.params.k))
    }

    fn internal(
        &self,
        node: &FlatNode,
        label: &str,
        children: &[usize],
        beams: &mut [Vec<Hyp>],
    ) -> Vec<Hyp> {
        let exclusive = self.params.one_link_per_source(self.inst);
        let first = &self.inst.nodes[children[0]];
        let mut acc = std::mem::take(&mut beams[children[0]]);
        let lo = first.lo;
        for &c in &children[1..] {
            let right = std::mem::take(&mut beams[c]);
            let gold = self.gold_in(lo, self.inst.nodes[c].hi);
            let mut next = Vec::with_capacity(acc.len() * right.len());
            for a in &acc {
                for b in &right {
                    if exclusive && share_source(&a.links, &b.links) {
                        continue;
                    }
                    let mut links = Vec::with_capacity(a.links.len() + b.links.len());
                    links.extend_from_slice(&a.links);
                    links.extend_from_slice(&b.links);
                    links.sort_unstable();
                    let h = Hyp {
                        links,
                        score: a.score + b.score,
                        matched: a.matched + b.matched,
                        key: 0.0,
                    };
                    next.push(self.keyed(h, gold));
                }
            }
            acc = prune(next, self.params.k);
        }
        let gold = self.gold_in(node.lo, node.hi);
        let scored = acc
            .into_iter()
            .map(|mut h| {
                let mut sources: Vec<usize> = h.links.iter().map(|l| l.0).collect();
                sources.sort_unstable();
                sources.dedup();
                h.score += self.weights.dot(&self.inst.span_features(label, &sources));
                self.keyed(h, gold)
            })
            .collect();
        prune(scored, self.params.k)
    }

    fn run(&self) -> Vec<Hyp> {
        let mut beams: Vec<Vec<Hyp>> = vec![Vec::new(); self.inst.nodes.len()];
        for (i, node) in self.inst.nodes.iter().enumerate() {
            beams[i] = match &node.kind {
                NodeKind::Leaf(t) => self.leaf(*t),
                NodeKind::Internal { label, children } => {
                    self.internal(node, label, children, &mut beams)
                }
            };
        }
        beams.pop().unwrap_or_default()
    }
}

fn search(
    weights: &FeatureVector,
    inst: &AlignmentInstance,
    params: &DecodeParams,
    gold: Option<&AlignmentSet>,
) -> Result<Vec<(AlignmentSet, f64)>> {
    if params.k == 0 {
        return Err(Error::InvalidArgument(
            "beam size must be at least 1".into(),
        ));
    }
    let (n, m) = (inst.source_len(), inst.target_len());
    let mut link_score = Vec::with_capacity(n * m);
    for s in 0..n {
        for t in 0..m {
            link_score.push(weights.dot(&inst.link_features(s, t)));
        }
    }
    let mut gold_cols = vec![0; m];
    if let Some(g) = gold {
        g.check_bounds(n, m)?;
        for (_, t) in g.pairs() {
            gold_cols[t] += 1;
        }
    }
    let search = Search {
        inst,
        params,
        weights,
        link_score,
        gold,
        gold_cols,
    };
    Ok(search
        .run()
        .into_iter()
        .map(|h| (inst.typed(h.links), h.key))
        .collect())
}

/// The k best alignments, best first, with their model scores.
pub fn decode_kbest(
    weights: &FeatureVector,
    inst: &AlignmentInstance,
    params: &DecodeParams,
) -> Result<Vec<(AlignmentSet, f64)>> {
    search(weights, inst, params, None)
}

/// The k best alignments under model score plus `1 - F1` against `gold`,
/// with those augmented scores. The loss of a partial alignment is taken
/// against the gold links inside its span.
pub fn loss_augmented_kbest(
    weights: &FeatureVector,
    inst: &AlignmentInstance,
    gold: &AlignmentSet,
    params: &DecodeParams,
) -> Result<Vec<(AlignmentSet, f64)>> {
    search(weights, inst, params, Some(gold))
}

pub fn loss_augmented_decode(
    weights: &FeatureVector,
    inst: &AlignmentInstance,
    gold: &AlignmentSet,
    params: &DecodeParams,
) -> Result<(AlignmentSet, f64)> {
    let mut best = loss_augmented_kbest(weights, inst, gold, params)?;
    Ok(best.swap_remove(0))
}

/// `rank<TAB>score<TAB>links` with typed Pharaoh links, ranks from 1.
pub fn kbest_tsv(kbest: &[(AlignmentSet, f64)]) -> String {
    let mut out = String::new();
    for (i, (links, score)) in kbest.iter().enumerate() {
        let _ = writeln!(out, "{}\t{score}\t{}", i + 1, links.to_pharaoh(true));
    }
    out
}
