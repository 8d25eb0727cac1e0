//! Fixture access and independent oracles shared by the integration and
//! acceptance tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};
use std::path::PathBuf;

use amralign::alignment::{AlignmentSet, LinkType};
use amralign::hieralign::{AlignmentInstance, FeatureVector, SideToken, Template, TemplateSet};
use amralign::ibm1::TranslationTable;
use amralign::metrics::{Prf, TypeFilter};
use amralign::penman::{read_amr_file, AmrGraph, ParseOptions};
use amralign::perceptron::Example;
use amralign::pipeline::{
    build_instances, examples, load_corpus, train_tables, BuiltInstance, Configuration, Ibm1Tables,
    PreparedPair,
};
use amralign::treebank::{read_tree_file, Tree};
use amralign::Settings;
use rand::Rng;

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture_text(name: &str) -> String {
    let path = fixtures_dir().join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// `name.amr` and `name.ptb` read side by side.
pub fn fixture_pairs(name: &str) -> Vec<(AmrGraph, Tree)> {
    let graphs = read_amr_file(
        &fixture_text(&format!("{name}.amr")),
        &ParseOptions::default(),
    )
    .unwrap();
    let trees = read_tree_file(&fixture_text(&format!("{name}.ptb"))).unwrap();
    assert_eq!(graphs.len(), trees.len(), "{name}");
    graphs.into_iter().zip(trees).collect()
}

/// A fixture prepared, with IBM1 tables trained on its own pairs.
pub struct Prepared {
    pub pairs: Vec<PreparedPair>,
    pub tables: Ibm1Tables,
}

impl Prepared {
    pub fn load(names: &[&str], settings: &Settings) -> Prepared {
        let mut pairs = Vec::new();
        for name in names {
            let amr = fixture_text(&format!("{name}.amr"));
            let ptb = fixture_text(&format!("{name}.ptb"));
            pairs.extend(load_corpus(&amr, &ptb, settings).unwrap());
        }
        let tables = train_tables(&pairs, settings).unwrap();
        Prepared { pairs, tables }
    }

    /// Instances and examples for `pairs`, which need not be the pairs the
    /// tables were trained on.
    pub fn build(
        &self,
        pairs: &[PreparedPair],
        c: Configuration,
        settings: &Settings,
    ) -> (Vec<BuiltInstance>, Vec<Example>) {
        let built = build_instances(
            pairs,
            c,
            &self.tables.amr_en.table,
            &self.tables.en_amr.table,
            settings,
        )
        .unwrap();
        let ex = examples(pairs, &built);
        (built, ex)
    }
}

pub const CORPORA: [&str; 7] = [
    "gas_price",
    "corpus/train",
    "corpus/dev",
    "corpus/test",
    "generalization/train",
    "generalization/test",
    "separable/train",
];

/// Random target tree over `m` leaves numbered 0..m, with pre-terminals.
pub fn random_tree<R: Rng>(rng: &mut R, lo: usize, hi: usize) -> Tree {
    const LABELS: [&str; 3] = ["S", "NP", "VP"];
    if hi - lo == 1 {
        let tag = ["NN", "VB"][rng.gen_range(0..2)];
        return Tree::node(tag, vec![Tree::leaf(format!("w{lo}"), lo)]);
    }
    let mut cuts: Vec<usize> = (lo + 1..hi).filter(|_| rng.gen_bool(0.5)).collect();
    if cuts.is_empty() {
        cuts.push(rng.gen_range(lo + 1..hi));
    }
    let mut bounds = vec![lo];
    bounds.extend(cuts);
    bounds.push(hi);
    let children = bounds
        .windows(2)
        .map(|w| random_tree(rng, w[0], w[1]))
        .collect();
    Tree::node(LABELS[rng.gen_range(0..3)], children)
}

fn random_tokens<R: Rng>(rng: &mut R, n: usize, kinds: &[LinkType]) -> Vec<SideToken> {
    (0..n)
        .map(|_| SideToken {
            stem: ["a", "b", "c"][rng.gen_range(0..3)].to_string(),
            tag: ["X", "Y"][rng.gen_range(0..2)].to_string(),
            phrase: ["P", "Q"][rng.gen_range(0..2)].to_string(),
            kind: kinds[rng.gen_range(0..kinds.len())],
        })
        .collect()
}

/// A random instance with an `n`-token source and an `m`-leaf target tree.
pub fn random_instance<R: Rng>(rng: &mut R, n: usize, m: usize) -> AlignmentInstance {
    let source = random_tokens(rng, n, &[LinkType::Concept, LinkType::Role]);
    let tree = random_tree(rng, 0, m);
    let syntax = tree.leaf_syntax(&[]);
    let mut target = random_tokens(rng, m, &[LinkType::Word]);
    for (t, syn) in target.iter_mut().zip(syntax) {
        t.tag = syn.tag;
        t.phrase = syn.phrase;
    }
    let mut st = TranslationTable::new(1e-7);
    let mut ts = TranslationTable::new(1e-7);
    for a in ["a", "b", "c"] {
        for b in ["a", "b", "c"] {
            st.set(a, b, rng.gen_range(0.01..1.0));
            ts.set(a, b, rng.gen_range(0.01..1.0));
        }
    }
    let third: AlignmentSet = (0..n)
        .flat_map(|s| (0..m).map(move |t| (s, t)))
        .filter(|_| rng.gen_bool(0.3))
        .map(|(s, t)| (s, t, LinkType::Word))
        .collect();
    AlignmentInstance::new(
        source,
        tree,
        target,
        third,
        &st,
        &ts,
        TemplateSet::default(),
        true,
    )
    .unwrap()
}

/// Every feature the instance can fire, each with a weight drawn from
/// `{-2, -1.75, ..., 2}`.
pub fn random_weights<R: Rng>(rng: &mut R, inst: &AlignmentInstance) -> FeatureVector {
    let mut names = BTreeSet::new();
    for s in 0..inst.source_len() {
        for t in 0..inst.target_len() {
            names.extend(inst.link_features(s, t).iter().map(|(k, _)| k.to_string()));
        }
    }
    for t in 0..inst.target_len() {
        names.extend(inst.null_features(t).iter().map(|(k, _)| k.to_string()));
    }
    for label in ["S", "NP", "VP", "NN", "VB"] {
        for sources in [&[0, 1][..], &[0, 2][..]] {
            names.extend(
                inst.span_features(label, sources)
                    .iter()
                    .map(|(k, _)| k.to_string()),
            );
        }
    }
    names
        .into_iter()
        .map(|n| (n, rng.gen_range(-8i32..=8) as f64 / 4.0))
        .collect()
}

/// Every alignment the decoder may produce: per target column the empty
/// set, one source, or two sources at most `window` apart, optionally with
/// each source used once.
pub fn enumerate_space(
    n: usize,
    m: usize,
    window: usize,
    one_per_source: bool,
) -> Vec<Vec<(usize, usize)>> {
    let mut columns: Vec<Vec<usize>> = Vec::new();
    for mask in 0u32..(1 << n) {
        let picked: Vec<usize> = (0..n).filter(|&s| mask & (1 << s) != 0).collect();
        let ok = match picked[..] {
            [] | [_] => true,
            [a, b] => b - a <= window,
            _ => false,
        };
        if ok {
            columns.push(picked);
        }
    }
    let mut out = vec![Vec::new()];
    for t in 0..m {
        let mut next = Vec::new();
        for partial in &out {
            for col in &columns {
                let mut links: Vec<(usize, usize)> = partial.clone();
                links.extend(col.iter().map(|&s| (s, t)));
                next.push(links);
            }
        }
        out = next;
    }
    out.into_iter()
        .filter(|links| {
            if !one_per_source {
                return true;
            }
            let mut seen = HashSet::new();
            links.iter().all(|&(s, _)| seen.insert(s))
        })
        .map(|mut links| {
            links.sort_unstable();
            links
        })
        .collect()
}

/// Higher score first, then fewer links, then smaller sorted link list.
pub fn better(a: (&[(usize, usize)], f64), b: (&[(usize, usize)], f64)) -> bool {
    if a.1 != b.1 {
        return a.1 > b.1;
    }
    (a.0.len(), a.0) < (b.0.len(), b.0)
}

/// Exhaustive argmax of `score` over the decoder's search space.
pub fn brute_force_best(
    inst: &AlignmentInstance,
    window: usize,
    one_per_source: bool,
    score: impl Fn(&AlignmentSet) -> f64,
) -> (Vec<(usize, usize)>, f64) {
    let mut best: Option<(Vec<(usize, usize)>, f64)> = None;
    for links in enumerate_space(inst.source_len(), inst.target_len(), window, one_per_source) {
        let s = score(&inst.typed(links.iter().copied()));
        if best
            .as_ref()
            .is_none_or(|b| better((&links, s), (&b.0, b.1)))
        {
            best = Some((links, s));
        }
    }
    best.unwrap()
}

/// Grow-diag-final-and written directly from the textbook pseudocode,
/// over plain sets.
pub fn gdfa_reference(
    e2f: &BTreeSet<(usize, usize)>,
    f2e: &BTreeSet<(usize, usize)>,
    src_len: usize,
    tgt_len: usize,
) -> BTreeSet<(usize, usize)> {
    let union: BTreeSet<_> = e2f.union(f2e).copied().collect();
    let mut alignment: BTreeSet<_> = e2f.intersection(f2e).copied().collect();
    let src_aligned = |a: &BTreeSet<(usize, usize)>, e: usize| a.iter().any(|p| p.0 == e);
    let tgt_aligned = |a: &BTreeSet<(usize, usize)>, f: usize| a.iter().any(|p| p.1 == f);
    let neighboring: [(i64, i64); 8] = [
        (-1, 0),
        (0, -1),
        (1, 0),
        (0, 1),
        (-1, -1),
        (-1, 1),
        (1, -1),
        (1, 1),
    ];
    loop {
        let mut new_points = false;
        for e in 0..src_len {
            for f in 0..tgt_len {
                if !alignment.contains(&(e, f)) {
                    continue;
                }
                for (de, df) in neighboring {
                    let (en, fnew) = (e as i64 + de, f as i64 + df);
                    if en < 0 || fnew < 0 || en >= src_len as i64 || fnew >= tgt_len as i64 {
                        continue;
                    }
                    let (en, fnew) = (en as usize, fnew as usize);
                    if (!src_aligned(&alignment, en) || !tgt_aligned(&alignment, fnew))
                        && union.contains(&(en, fnew))
                        && alignment.insert((en, fnew))
                    {
                        new_points = true;
                    }
                }
            }
        }
        if !new_points {
            break;
        }
    }
    for a in [e2f, f2e] {
        for e in 0..src_len {
            for f in 0..tgt_len {
                if !src_aligned(&alignment, e) && !tgt_aligned(&alignment, f) && a.contains(&(e, f))
                {
                    alignment.insert((e, f));
                }
            }
        }
    }
    alignment
}

/// P/R/F by explicit counting over the link lists.
pub fn brute_prf(gold: &AlignmentSet, pred: &AlignmentSet, filter: TypeFilter) -> Prf {
    let keep = |ty: LinkType| match filter {
        TypeFilter::Concept => ty == LinkType::Concept,
        TypeFilter::Role => ty == LinkType::Role,
        TypeFilter::Both => ty == LinkType::Concept || ty == LinkType::Role,
    };
    let g: Vec<(usize, usize)> = gold
        .iter()
        .filter(|l| keep(l.2))
        .map(|l| (l.0, l.1))
        .collect();
    let p: Vec<(usize, usize)> = pred
        .iter()
        .filter(|l| keep(l.2))
        .map(|l| (l.0, l.1))
        .collect();
    let mut hit = 0;
    for x in &p {
        for y in &g {
            if x == y {
                hit += 1;
            }
        }
    }
    let ratio = |den: usize| match den {
        0 if g.is_empty() && p.is_empty() => 1.0,
        0 => 0.0,
        d => hit as f64 / d as f64,
    };
    let (precision, recall) = (ratio(p.len()), ratio(g.len()));
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Prf {
        precision,
        recall,
        f1,
    }
}

pub fn random_typed_set<R: Rng>(rng: &mut R, n: usize, m: usize, density: f64) -> AlignmentSet {
    let mut set = AlignmentSet::new();
    for s in 0..n {
        for t in 0..m {
            if rng.gen_bool(density) {
                let ty = if s % 3 == 0 {
                    LinkType::Role
                } else {
                    LinkType::Concept
                };
                set.insert(s, t, ty);
            }
        }
    }
    set
}

pub fn only_templates(list: &[Template]) -> TemplateSet {
    TemplateSet::only(list)
}
