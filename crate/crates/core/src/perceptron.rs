//! Averaged structured perceptron training for the hierarchical aligner,
//! and the model file.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::alignment::AlignmentSet;
use crate::error::{Error, Result};
use crate::hieralign::{
    decode_kbest, loss_augmented_decode, AlignmentInstance, DecodeParams, FeatureVector,
};
use crate::ibm1::TranslationTable;
use crate::metrics::{Counts, Prf, TypeFilter};

pub use crate::hieralign::f1_loss;

pub const DEFAULT_EPOCHS: usize = 10;
const MODEL_MAGIC: &str = "# amralign-model";

/// `w + h_gold - h_hyp`.
pub fn perceptron_update(
    w: &FeatureVector,
    h_gold: &FeatureVector,
    h_hyp: &FeatureVector,
) -> FeatureVector {
    let mut out = w.clone();
    out.add_scaled(h_gold, 1.0);
    out.add_scaled(h_hyp, -1.0);
    out
}

/// Running average of a weight vector over steps, updated lazily so each
/// step costs only the size of its update.
#[derive(Debug, Clone, Default)]
pub struct Averager {
    weights: FeatureVector,
    /// Sum of `(step - 1) * delta` over all updates.
    offsets: FeatureVector,
    steps: usize,
}

impl Averager {
    pub fn new(init: FeatureVector) -> Self {
        Averager {
            weights: init,
            ..Averager::default()
        }
    }

    pub fn weights(&self) -> &FeatureVector {
        &self.weights
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Records one step, applying `delta` if there is an update.
    pub fn step(&mut self, delta: Option<&FeatureVector>) {
        self.steps += 1;
        if let Some(d) = delta {
            self.weights.add_scaled(d, 1.0);
            self.offsets.add_scaled(d, (self.steps - 1) as f64);
        }
    }

    /// Mean of the weights after each step so far; the current weights
    /// before the first step.
    pub fn average(&self) -> FeatureVector {
        let mut avg = self.weights.clone();
        if self.steps > 0 {
            avg.add_scaled(&self.offsets, -1.0 / self.steps as f64);
        }
        avg
    }
}

/// Trained weights, both translation tables and free-form metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignModel {
    pub weights: FeatureVector,
    pub averaged: FeatureVector,
    /// t(english | amr).
    pub amr_en: TranslationTable,
    /// t(amr | english).
    pub en_amr: TranslationTable,
    pub meta: BTreeMap<String, String>,
}

impl AlignModel {
    pub fn new(amr_en: TranslationTable, en_amr: TranslationTable) -> Self {
        AlignModel {
            weights: FeatureVector::new(),
            averaged: FeatureVector::new(),
            amr_en,
            en_amr,
            meta: BTreeMap::new(),
        }
    }

    pub fn to_tsv(&self) -> String {
        let mut out = format!("{MODEL_MAGIC}\t1\n");
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k}\t{v}");
        }
        for (name, fv) in [("averaged", &self.averaged), ("raw", &self.weights)] {
            let _ = writeln!(out, "[{name}]");
            for (f, w) in fv.iter() {
                let _ = writeln!(out, "{f}\t{w}");
            }
        }
        for (name, table) in [("amr-en", &self.amr_en), ("en-amr", &self.en_amr)] {
            let _ = writeln!(out, "[table {name}]");
            out.push_str(&table.to_tsv());
        }
        out
    }

    pub fn from_tsv(text: &str, floor: f64) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, l)) if l.starts_with(MODEL_MAGIC) => {}
            _ => {
                return Err(Error::Model {
                    line: 1,
                    msg: "missing model header".into(),
                })
            }
        }
        let mut meta = BTreeMap::new();
        let mut sections: BTreeMap<String, Vec<&str>> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (i, line) in lines {
            let err = |msg: &str| Error::Model {
                line: i + 1,
                msg: msg.to_string(),
            };
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("# ") {
                let (k, v) = rest
                    .split_once('\t')
                    .ok_or_else(|| err("metadata needs key<TAB>value"))?;
                meta.insert(k.to_string(), v.to_string());
            } else if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                if sections.insert(name.to_string(), Vec::new()).is_some() {
                    return Err(err("duplicate section"));
                }
                current = Some(name.to_string());
            } else {
                let name = current
                    .as_ref()
                    .ok_or_else(|| err("entry outside a section"))?;
                sections.get_mut(name).expect("section exists").push(line);
            }
        }
        let take = |name: &str| -> Result<Vec<&str>> {
            sections.get(name).cloned().ok_or_else(|| Error::Model {
                line: 0,
                msg: format!("missing section [{name}]"),
            })
        };
        let weights_of = |name: &str| -> Result<FeatureVector> {
            let mut fv = FeatureVector::new();
            for l in take(name)? {
                let bad = || Error::Model {
                    line: 0,
                    msg: format!("bad weight line '{l}' in [{name}]"),
                };
                let (f, w) = l.split_once('\t').ok_or_else(bad)?;
                fv.set(f, w.parse().map_err(|_| bad())?);
            }
            Ok(fv)
        };
        let table_of = |name: &str| -> Result<TranslationTable> {
            TranslationTable::from_tsv(&take(name)?.join("\n"), floor)
        };
        Ok(AlignModel {
            averaged: weights_of("averaged")?,
            weights: weights_of("raw")?,
            amr_en: table_of("table amr-en")?,
            en_amr: table_of("table en-amr")?,
            meta,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Example {
    pub instance: AlignmentInstance,
    pub gold: AlignmentSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOptions {
    pub epochs: usize,
    pub seed: u64,
    pub params: DecodeParams,
    /// Update against the loss-augmented 1-best rather than the plain one.
    pub loss_augmented: bool,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            epochs: DEFAULT_EPOCHS,
            seed: 0,
            params: DecodeParams::default(),
            loss_augmented: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochReport {
    pub epoch: usize,
    /// Mean `1 - F1` of the hypotheses used for updates.
    pub train_loss: f64,
    pub updates: usize,
    pub dev: Prf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub epochs: Vec<EpochReport>,
    pub best_epoch: usize,
    /// Training instances whose gold alignment the decoder cannot produce.
    pub skipped: usize,
}

impl TrainReport {
    pub fn to_log(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "skipped\t{}", self.skipped);
        for e in &self.epochs {
            let _ = writeln!(
                out,
                "epoch\t{}\tloss\t{:.6}\tupdates\t{}\tdev-p\t{:.4}\tdev-r\t{:.4}\tdev-f\t{:.4}",
                e.epoch, e.train_loss, e.updates, e.dev.precision, e.dev.recall, e.dev.f1
            );
        }
        let _ = writeln!(out, "best-epoch\t{}", self.best_epoch);
        out
    }
}

/// Concept+role scores of decoding `set` with `weights`.
pub fn evaluate(weights: &FeatureVector, set: &[Example], params: &DecodeParams) -> Result<Prf> {
    let counts: Vec<Counts> = set
        .par_iter()
        .map(|ex| {
            let best = decode_kbest(weights, &ex.instance, params)?;
            Ok(Counts::new(&ex.gold, &best[0].0, TypeFilter::Both))
        })
        .collect::<Result<_>>()?;
    let mut total = Counts::default();
    for c in counts {
        total.add(c);
    }
    Ok(total.prf())
}

/// Trains from `init` and returns the snapshot with the best dev F after
/// an epoch (the earliest on ties). With an empty dev set the training set
/// is scored instead.
pub fn train(
    init: &AlignModel,
    train_set: &[Example],
    dev_set: &[Example],
    opts: &TrainOptions,
) -> Result<(AlignModel, TrainReport)> {
    if opts.epochs == 0 {
        return Err(Error::InvalidArgument(
            "training needs at least one epoch".into(),
        ));
    }
    if train_set.is_empty() {
        return Err(Error::InvalidArgument("training set is empty".into()));
    }
    let usable: Vec<&Example> = train_set
        .iter()
        .filter(|ex| ex.instance.in_search_space(&ex.gold, &opts.params))
        .collect();
    let skipped = train_set.len() - usable.len();
    if skipped > 0 {
        log::warn!(
            "skipping {skipped} training pairs whose gold alignment is outside the search space"
        );
    }
    let gold_features: Vec<FeatureVector> = usable
        .iter()
        .map(|ex| ex.instance.feature_vector(&ex.gold))
        .collect();
    let dev_set = if dev_set.is_empty() {
        train_set
    } else {
        dev_set
    };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut order: Vec<usize> = (0..usable.len()).collect();
    let mut avg = Averager::new(init.weights.clone());
    let mut best: Option<(f64, usize, FeatureVector, FeatureVector)> = None;
    let mut epochs = Vec::with_capacity(opts.epochs);
    for epoch in 1..=opts.epochs {
        order.shuffle(&mut rng);
        let mut loss = 0.0;
        let mut updates = 0;
        for &i in &order {
            let ex = usable[i];
            let hyp = if opts.loss_augmented {
                loss_augmented_decode(avg.weights(), &ex.instance, &ex.gold, &opts.params)?.0
            } else {
                decode_kbest(avg.weights(), &ex.instance, &opts.params)?
                    .swap_remove(0)
                    .0
            };
            loss += f1_loss(&ex.gold, &hyp);
            if hyp.pairs().eq(ex.gold.pairs()) {
                avg.step(None);
            } else {
                let mut delta = gold_features[i].clone();
                delta.add_scaled(&ex.instance.feature_vector(&hyp), -1.0);
                avg.step(Some(&delta));
                updates += 1;
            }
        }
        let averaged = avg.average();
        let dev = evaluate(&averaged, dev_set, &opts.params)?;
        log::info!("epoch {epoch}: {updates} updates, dev F {:.4}", dev.f1);
        epochs.push(EpochReport {
            epoch,
            train_loss: if usable.is_empty() {
                0.0
            } else {
                loss / usable.len() as f64
            },
            updates,
            dev,
        });
        if best.as_ref().is_none_or(|b| dev.f1 > b.0) {
            best = Some((dev.f1, epoch, averaged, avg.weights().clone()));
        }
    }
    let (_, best_epoch, averaged, weights) = best.expect("at least one epoch");
    let mut model = AlignModel {
        weights,
        averaged,
        ..init.clone()
    };
    model.meta.insert("epoch".into(), best_epoch.to_string());
    model.meta.insert("seed".into(), opts.seed.to_string());
    model.meta.insert("beam".into(), opts.params.k.to_string());
    model
        .meta
        .insert("window".into(), opts.params.window.to_string());
    Ok((
        model,
        TrainReport {
            epochs,
            best_epoch,
            skipped,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(entries: &[(&str, f64)]) -> FeatureVector {
        entries.iter().map(|&(k, v)| (k.to_string(), v)).collect()
    }

    #[test]
    fn update_arithmetic() {
        let w = fv(&[("f", 1.0)]);
        assert_eq!(
            perceptron_update(&w, &fv(&[("f", 2.0)]), &fv(&[("g", 1.0)])),
            fv(&[("f", 3.0), ("g", -1.0)])
        );
        let h = fv(&[("x", 1.5)]);
        assert_eq!(perceptron_update(&w, &h, &h), w);
        let e = FeatureVector::new();
        assert!(perceptron_update(&e, &e, &e).is_empty());
    }

    #[test]
    fn averaging_matches_direct_mean() {
        let deltas = [
            Some(fv(&[("a", 1.0)])),
            None,
            Some(fv(&[("a", -2.0), ("b", 3.0)])),
            Some(fv(&[("c", 0.5)])),
            None,
        ];
        let init = fv(&[("a", 0.25)]);
        let mut avg = Averager::new(init.clone());
        let mut w = init;
        let mut sum = FeatureVector::new();
        for d in &deltas {
            avg.step(d.as_ref());
            if let Some(d) = d {
                w.add_scaled(d, 1.0);
            }
            sum.add_scaled(&w, 1.0);
        }
        let got = avg.average();
        for name in ["a", "b", "c"] {
            assert!(
                (got.get(name) - sum.get(name) / 5.0).abs() < 1e-12,
                "{name}"
            );
        }
    }

    #[test]
    fn model_round_trip() {
        let mut t = TranslationTable::new(1e-7);
        t.set("gas", "gas", 0.75);
        let mut m = AlignModel::new(t.clone(), t);
        m.weights = fv(&[("lex:gas|gas", 1.0), ("link", -0.125)]);
        m.averaged = fv(&[("lex:gas|gas", 0.1)]);
        m.meta.insert("config".into(), "amr-tree-en-tree".into());
        let text = m.to_tsv();
        assert_eq!(AlignModel::from_tsv(&text, 1e-7).unwrap(), m);
        assert!(AlignModel::from_tsv("[raw]\n", 1e-7).is_err());
        assert!(AlignModel::from_tsv(&text.replace("[raw]", "[other]"), 1e-7).is_err());
    }
}
