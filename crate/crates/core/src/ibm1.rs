//! IBM Model 1 trained with EM, used both as the unsupervised baseline
//! aligner and as the source of lexical translation probabilities.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::alignment::{AlignmentSet, LinkType};
use crate::error::{Error, Result};

pub const NULL_TOKEN: &str = "<NULL>";
pub const DEFAULT_SMOOTHING: f64 = 1e-7;
pub const DEFAULT_ITERATIONS: usize = 5;

/// `t(target | source)` for the pairs seen together in training. Unseen pairs
/// read as `floor`.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslationTable {
    probs: HashMap<String, HashMap<String, f64>>,
    pub floor: f64,
}

impl TranslationTable {
    pub fn new(floor: f64) -> Self {
        TranslationTable {
            probs: HashMap::new(),
            floor,
        }
    }

    pub fn prob(&self, source: &str, target: &str) -> f64 {
        self.probs
            .get(source)
            .and_then(|m| m.get(target))
            .copied()
            .unwrap_or(self.floor)
    }

    pub fn null_prob(&self, target: &str) -> f64 {
        self.prob(NULL_TOKEN, target)
    }

    pub fn set(&mut self, source: &str, target: &str, p: f64) {
        self.probs
            .entry(source.to_string())
            .or_default()
            .insert(target.to_string(), p);
    }

    pub fn len(&self) -> usize {
        self.probs.values().map(HashMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Entries sorted by source, then target.
    pub fn entries(&self) -> Vec<(&str, &str, f64)> {
        let mut out: Vec<_> = self
            .probs
            .iter()
            .flat_map(|(s, m)| m.iter().map(move |(t, &p)| (s.as_str(), t.as_str(), p)))
            .collect();
        out.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        out
    }

    /// Sum of `t(. | source)` over stored targets.
    pub fn source_mass(&self, source: &str) -> f64 {
        self.probs.get(source).map_or(0.0, |m| m.values().sum())
    }

    pub fn sources(&self) -> impl Iterator<Item = &str> {
        self.probs.keys().map(String::as_str)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (s, t, p) in self.entries() {
            let _ = writeln!(out, "{s}\t{t}\t{p}");
        }
        out
    }

    pub fn from_tsv(text: &str, floor: f64) -> Result<Self> {
        let mut table = TranslationTable::new(floor);
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            let [s, t, p] = cols[..] else {
                return Err(Error::Config(format!(
                    "translation table line {}: expected 3 tab-separated columns",
                    i + 1
                )));
            };
            let p: f64 = p.parse().map_err(|_| {
                Error::Config(format!(
                    "translation table line {}: bad probability '{p}'",
                    i + 1
                ))
            })?;
            table.set(s, t, p);
        }
        Ok(table)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ibm1Training {
    pub table: TranslationTable,
    /// Corpus log-likelihood under the parameters entering each iteration.
    pub log_likelihoods: Vec<f64>,
}

/// Runs `iterations` rounds of EM from a uniform start. The E-step runs in
/// parallel; counts are summed in corpus order so results do not depend on
/// the thread count. The returned table is floored at `smoothing` and
/// renormalized per source.
pub fn train_ibm1<S: AsRef<str> + Sync>(
    corpus: &[(Vec<S>, Vec<S>)],
    iterations: usize,
    smoothing: f64,
) -> Result<Ibm1Training> {
    if iterations == 0 {
        return Err(Error::InvalidArgument(
            "IBM1 needs at least one iteration".into(),
        ));
    }
    if corpus.is_empty() {
        return Err(Error::InvalidArgument("IBM1 corpus is empty".into()));
    }
    let mut src_vocab: HashMap<&str, u32> = HashMap::new();
    src_vocab.insert(NULL_TOKEN, 0);
    let mut tgt_vocab: HashMap<&str, u32> = HashMap::new();
    let mut slot_of: HashMap<(u32, u32), usize> = HashMap::new();
    let mut slots: Vec<(u32, u32)> = Vec::new();
    // Per sentence: for each target word its slot list over [NULL, sources...].
    let mut sentences: Vec<Vec<Vec<usize>>> = Vec::with_capacity(corpus.len());
    for (src, tgt) in corpus {
        let mut s_ids = vec![0u32];
        for w in src {
            let next = src_vocab.len() as u32;
            s_ids.push(*src_vocab.entry(w.as_ref()).or_insert(next));
        }
        let mut rows = Vec::with_capacity(tgt.len());
        for w in tgt {
            let next = tgt_vocab.len() as u32;
            let f = *tgt_vocab.entry(w.as_ref()).or_insert(next);
            let row = s_ids
                .iter()
                .map(|&e| {
                    *slot_of.entry((e, f)).or_insert_with(|| {
                        slots.push((e, f));
                        slots.len() - 1
                    })
                })
                .collect();
            rows.push(row);
        }
        sentences.push(rows);
    }

    // Uniform over the targets each source co-occurs with.
    let mut fanout = vec![0usize; src_vocab.len()];
    for &(e, _) in &slots {
        fanout[e as usize] += 1;
    }
    let mut t: Vec<f64> = slots
        .iter()
        .map(|&(e, _)| 1.0 / fanout[e as usize] as f64)
        .collect();

    let mut log_likelihoods = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let partial: Vec<(f64, Vec<f64>)> = sentences
            .par_iter()
            .map(|rows| {
                let mut ll = 0.0;
                let mut post = Vec::with_capacity(rows.iter().map(Vec::len).sum());
                for row in rows {
                    let denom: f64 = row.iter().map(|&k| t[k]).sum();
                    ll += (denom / row.len() as f64).ln();
                    post.extend(row.iter().map(|&k| t[k] / denom));
                }
                (ll, post)
            })
            .collect();
        let mut counts = vec![0.0; slots.len()];
        let mut ll_total = 0.0;
        for (rows, (ll, post)) in sentences.iter().zip(&partial) {
            ll_total += ll;
            for (&k, &p) in rows.iter().flatten().zip(post) {
                counts[k] += p;
            }
        }
        log_likelihoods.push(ll_total);
        let mut totals = vec![0.0; src_vocab.len()];
        for (k, &(e, _)) in slots.iter().enumerate() {
            totals[e as usize] += counts[k];
        }
        for (k, &(e, _)) in slots.iter().enumerate() {
            t[k] = counts[k] / totals[e as usize];
        }
    }

    let src_names = invert(&src_vocab);
    let tgt_names = invert(&tgt_vocab);
    let mut floored = vec![0.0; src_vocab.len()];
    for (k, &(e, _)) in slots.iter().enumerate() {
        t[k] = t[k].max(smoothing);
        floored[e as usize] += t[k];
    }
    let mut table = TranslationTable::new(smoothing);
    for (k, &(e, f)) in slots.iter().enumerate() {
        table.set(
            src_names[e as usize],
            tgt_names[f as usize],
            t[k] / floored[e as usize],
        );
    }
    Ok(Ibm1Training {
        table,
        log_likelihoods,
    })
}

fn invert<'a>(vocab: &HashMap<&'a str, u32>) -> Vec<&'a str> {
    let sorted: BTreeMap<u32, &str> = vocab.iter().map(|(&w, &i)| (i, w)).collect();
    sorted.into_values().collect()
}

/// Links every target word to its most probable source word, unless the
/// NULL word is strictly more probable. Ties go to the smaller source index.
pub fn viterbi_align<S: AsRef<str>>(
    table: &TranslationTable,
    source: &[S],
    target: &[S],
) -> AlignmentSet {
    let mut out = AlignmentSet::new();
    for (j, f) in target.iter().enumerate() {
        let f = f.as_ref();
        let mut best: Option<(usize, f64)> = None;
        for (i, e) in source.iter().enumerate() {
            let p = table.prob(e.as_ref(), f);
            if best.is_none_or(|(_, bp)| p > bp) {
                best = Some((i, p));
            }
        }
        if let Some((i, p)) = best {
            if p >= table.null_prob(f) {
                out.insert(i, j, LinkType::Word);
            }
        }
    }
    out
}
