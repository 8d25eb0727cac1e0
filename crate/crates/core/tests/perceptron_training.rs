mod support;

use amralign::hieralign::{decode_kbest, loss_augmented_decode, DecodeParams, Template};
use amralign::ibm1::{TranslationTable, DEFAULT_SMOOTHING};
use amralign::perceptron::{train, AlignModel, Example, TrainOptions};
use amralign::pipeline::Configuration;
use amralign::{FeatureVector, Settings};

fn separable(templates: &[Template]) -> Vec<Example> {
    let settings = Settings {
        templates: support::only_templates(templates),
        ..Settings::default()
    };
    let data = support::Prepared::load(&["separable/train"], &settings);
    data.build(&data.pairs, Configuration::AmrStringEnTree, &settings)
        .1
}

fn init() -> AlignModel {
    AlignModel::new(
        TranslationTable::new(DEFAULT_SMOOTHING),
        TranslationTable::new(DEFAULT_SMOOTHING),
    )
}

#[test]
fn memorizes_separable_fixture() {
    let train_set = separable(&[Template::Lex, Template::SameStem]);
    assert_eq!(train_set.len(), 20);
    for seed in [0, 1, 2] {
        let opts = TrainOptions {
            seed,
            ..TrainOptions::default()
        };
        let (model, report) = train(&init(), &train_set, &[], &opts).unwrap();
        assert_eq!(report.skipped, 0);
        let best = &report.epochs[report.best_epoch - 1];
        assert_eq!(best.dev.f1, 1.0, "seed {seed}:\n{}", report.to_log());
        let (again, again_report) = train(&init(), &train_set, &[], &opts).unwrap();
        assert_eq!(model.to_tsv(), again.to_tsv());
        assert_eq!(report, again_report);
    }
}

#[test]
fn best_epoch_is_the_first_maximum() {
    let set = separable(&[Template::Lex, Template::TagPair, Template::Link]);
    let opts = TrainOptions {
        epochs: 3,
        seed: 5,
        ..TrainOptions::default()
    };
    let (model, report) = train(&init(), &set, &set, &opts).unwrap();
    let max = report
        .epochs
        .iter()
        .map(|e| e.dev.f1)
        .fold(f64::NEG_INFINITY, f64::max);
    let first = report
        .epochs
        .iter()
        .find(|e| e.dev.f1 == max)
        .unwrap()
        .epoch;
    assert_eq!(report.best_epoch, first);
    assert_eq!(model.meta["epoch"], first.to_string());
}

#[test]
fn one_epoch_on_a_solved_instance_keeps_the_weights() {
    let set = separable(&[Template::Lex, Template::SameStem, Template::Link]);
    let ex = &set[0];
    // Each extra link costs more than the loss can pay back.
    let mut w = FeatureVector::new();
    w.set("same-stem", 4.0);
    w.set("link", -2.0);
    let params = DecodeParams::default();
    assert_eq!(
        loss_augmented_decode(&w, &ex.instance, &ex.gold, &params)
            .unwrap()
            .0,
        ex.gold
    );
    let mut start = init();
    start.weights = w.clone();
    let opts = TrainOptions {
        epochs: 1,
        ..TrainOptions::default()
    };
    let (model, report) = train(&start, std::slice::from_ref(ex), &[], &opts).unwrap();
    assert_eq!(report.epochs[0].updates, 0);
    assert_eq!(model.weights, w);
    assert_eq!(model.averaged, w);
}

#[test]
fn an_update_raises_the_gold_score() {
    let set = separable(&[Template::Lex, Template::SameStem, Template::TagPair]);
    let params = DecodeParams::default();
    for ex in &set {
        let w = FeatureVector::new();
        let hyp = decode_kbest(&w, &ex.instance, &params)
            .unwrap()
            .swap_remove(0)
            .0;
        let h_gold = ex.instance.feature_vector(&ex.gold);
        let next =
            amralign::perceptron::perceptron_update(&w, &h_gold, &ex.instance.feature_vector(&hyp));
        assert!(next.dot(&h_gold) >= w.dot(&h_gold));
    }
}

#[test]
fn rejects_degenerate_runs() {
    let set = separable(&[Template::Lex]);
    let zero = TrainOptions {
        epochs: 0,
        ..TrainOptions::default()
    };
    assert!(train(&init(), &set, &[], &zero).is_err());
    assert!(train(&init(), &[], &set, &TrainOptions::default()).is_err());
}
