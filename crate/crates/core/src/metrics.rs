//! Typed precision/recall/F, filtering upper bounds and paired bootstrap
//! significance.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::alignment::{AlignmentSet, LinkType};
use crate::error::{Error, Result};
use crate::preprocess::{filter_tokens, FilterConfig, TokenStream};

pub const SIGNIFICANCE_LEVEL: f64 = 0.01;
pub const DEFAULT_RESAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TypeFilter {
    Concept,
    Role,
    /// Concept and role links. Untyped word links never match.
    Both,
}

impl TypeFilter {
    pub const ALL: [TypeFilter; 3] = [TypeFilter::Concept, TypeFilter::Role, TypeFilter::Both];

    pub fn accepts(self, ty: LinkType) -> bool {
        match self {
            TypeFilter::Concept => ty == LinkType::Concept,
            TypeFilter::Role => ty == LinkType::Role,
            TypeFilter::Both => ty != LinkType::Word,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TypeFilter::Concept => "concept",
            TypeFilter::Role => "role",
            TypeFilter::Both => "both",
        }
    }
}

impl FromStr for TypeFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "concept" => Ok(TypeFilter::Concept),
            "role" => Ok(TypeFilter::Role),
            "both" => Ok(TypeFilter::Both),
            _ => Err(Error::InvalidArgument(format!(
                "unknown link type filter '{s}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Link counts for one pair or pooled over a corpus.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub gold: usize,
    pub pred: usize,
    pub matched: usize,
}

impl Counts {
    pub fn new(gold: &AlignmentSet, pred: &AlignmentSet, filter: TypeFilter) -> Counts {
        let g: HashSet<(usize, usize)> = gold
            .iter()
            .filter(|l| filter.accepts(l.2))
            .map(|l| (l.0, l.1))
            .collect();
        let mut c = Counts {
            gold: g.len(),
            ..Counts::default()
        };
        for (s, t, ty) in pred.iter() {
            if filter.accepts(ty) {
                c.pred += 1;
                c.matched += usize::from(g.contains(&(s, t)));
            }
        }
        c
    }

    pub fn add(&mut self, other: Counts) {
        self.gold += other.gold;
        self.pred += other.pred;
        self.matched += other.matched;
    }

    /// An undefined ratio is 1 when gold and prediction are both empty and 0
    /// otherwise.
    pub fn prf(self) -> Prf {
        let vacuous = self.gold == 0 && self.pred == 0;
        let ratio = |den: usize| {
            if den == 0 {
                if vacuous {
                    1.0
                } else {
                    0.0
                }
            } else {
                self.matched as f64 / den as f64
            }
        };
        let (precision, recall) = (ratio(self.pred), ratio(self.gold));
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Prf {
            precision,
            recall,
            f1,
        }
    }
}

pub fn prf(gold: &AlignmentSet, pred: &AlignmentSet, filter: TypeFilter) -> Prf {
    Counts::new(gold, pred, filter).prf()
}

fn check_lengths(gold: usize, pred: usize) -> Result<()> {
    if gold == pred {
        Ok(())
    } else {
        Err(Error::Mismatch(format!(
            "{gold} gold alignments but {pred} predicted"
        )))
    }
}

/// Micro-averaged scores over pooled link counts.
pub fn corpus_prf(gold: &[AlignmentSet], pred: &[AlignmentSet], filter: TypeFilter) -> Result<Prf> {
    check_lengths(gold.len(), pred.len())?;
    let mut total = Counts::default();
    for (g, p) in gold.iter().zip(pred) {
        total.add(Counts::new(g, p, filter));
    }
    Ok(total.prf())
}

/// Scores for the concept, role and combined rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypedScores {
    pub concept: Prf,
    pub role: Prf,
    pub both: Prf,
}

impl TypedScores {
    pub fn get(&self, filter: TypeFilter) -> Prf {
        match filter {
            TypeFilter::Concept => self.concept,
            TypeFilter::Role => self.role,
            TypeFilter::Both => self.both,
        }
    }

    pub fn evaluate(gold: &[AlignmentSet], pred: &[AlignmentSet]) -> Result<TypedScores> {
        Ok(TypedScores {
            concept: corpus_prf(gold, pred, TypeFilter::Concept)?,
            role: corpus_prf(gold, pred, TypeFilter::Role)?,
            both: corpus_prf(gold, pred, TypeFilter::Both)?,
        })
    }

    /// TSV with a header and one `type precision recall f1` row per type.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("type\tprecision\trecall\tf1\n");
        for f in TypeFilter::ALL {
            let s = self.get(f);
            let _ = writeln!(
                out,
                "{}\t{:.4}\t{:.4}\t{:.4}",
                f.name(),
                s.precision,
                s.recall,
                s.f1
            );
        }
        out
    }
}

/// One gold pair for the upper bound: the unfiltered AMR linearization, the
/// unfiltered English tokens, and gold links between original positions.
#[derive(Debug, Clone)]
pub struct GoldPair {
    pub amr: TokenStream,
    pub english: TokenStream,
    pub gold: AlignmentSet,
}

fn survivors(stream: &TokenStream, cfg: &FilterConfig) -> HashSet<usize> {
    match filter_tokens(stream, cfg) {
        Ok((kept, _)) => kept.tokens.iter().map(|t| t.origin).collect(),
        Err(_) => HashSet::new(),
    }
}

/// Best scores any aligner can reach when it only sees tokens that survive
/// `cfg`: the prediction is every gold link whose two ends survive.
pub fn filtering_upper_bound(corpus: &[GoldPair], cfg: &FilterConfig) -> TypedScores {
    let oracle: Vec<AlignmentSet> = corpus
        .iter()
        .map(|p| {
            let amr = survivors(&p.amr, cfg);
            let en = survivors(&p.english, cfg);
            p.gold
                .iter()
                .filter(|&(s, t, _)| amr.contains(&s) && en.contains(&t))
                .collect()
        })
        .collect();
    let gold: Vec<AlignmentSet> = corpus.iter().map(|p| p.gold.clone()).collect();
    TypedScores::evaluate(&gold, &oracle).expect("lengths agree")
}

/// Paired bootstrap over sentence pairs. Returns the fraction of resamples
/// in which system `a` does not beat system `b` on F. Resample `r` draws from
/// its own stream of the seeded generator, so the result is independent of
/// the thread count.
pub fn bootstrap_significance(
    gold: &[AlignmentSet],
    pred_a: &[AlignmentSet],
    pred_b: &[AlignmentSet],
    filter: TypeFilter,
    resamples: usize,
    seed: u64,
) -> Result<f64> {
    check_lengths(gold.len(), pred_a.len())?;
    check_lengths(gold.len(), pred_b.len())?;
    if resamples == 0 {
        return Err(Error::InvalidArgument(
            "bootstrap needs at least one resample".into(),
        ));
    }
    if gold.is_empty() {
        return Err(Error::InvalidArgument(
            "bootstrap over an empty corpus".into(),
        ));
    }
    let ca: Vec<Counts> = gold
        .iter()
        .zip(pred_a)
        .map(|(g, p)| Counts::new(g, p, filter))
        .collect();
    let cb: Vec<Counts> = gold
        .iter()
        .zip(pred_b)
        .map(|(g, p)| Counts::new(g, p, filter))
        .collect();
    let n = gold.len();
    let not_better = (0..resamples as u64)
        .into_par_iter()
        .filter(|&r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r);
            let (mut ta, mut tb) = (Counts::default(), Counts::default());
            for _ in 0..n {
                let i = rng.gen_range(0..n);
                ta.add(ca[i]);
                tb.add(cb[i]);
            }
            ta.prf().f1 - tb.prf().f1 <= 0.0
        })
        .count();
    Ok(not_better as f64 / resamples as f64)
}

pub fn significance_report(p_value: f64) -> String {
    format!(
        "p-value\t{p_value:.4}\nsignificant@{SIGNIFICANCE_LEVEL}\t{}\n",
        if p_value < SIGNIFICANCE_LEVEL {
            "yes"
        } else {
            "no"
        }
    )
}
