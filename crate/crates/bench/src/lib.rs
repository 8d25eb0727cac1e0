//! Inputs shared by the benchmarks, built from the shipped fixtures.

use amralign::perceptron::{train, AlignModel, Example, TrainOptions};
use amralign::pipeline::{
    build_instances, examples, load_corpus, train_tables, BuiltInstance, Configuration,
    PreparedPair,
};
use amralign::Settings;

const TRAIN_AMR: &str = include_str!("../../../fixtures/corpus/train.amr");
const TRAIN_PTB: &str = include_str!("../../../fixtures/corpus/train.ptb");

pub fn corpus() -> Vec<PreparedPair> {
    load_corpus(TRAIN_AMR, TRAIN_PTB, &Settings::default()).expect("fixture loads")
}

/// A model trained for a few epochs plus the instances it was trained on.
pub fn trained(configuration: Configuration) -> (AlignModel, Vec<BuiltInstance>, Vec<Example>) {
    let settings = Settings::default();
    let pairs = corpus();
    let tables = train_tables(&pairs, &settings).expect("tables train");
    let built = build_instances(
        &pairs,
        configuration,
        &tables.amr_en.table,
        &tables.en_amr.table,
        &settings,
    )
    .expect("instances build");
    let ex = examples(&pairs, &built);
    let init = AlignModel::new(tables.amr_en.table, tables.en_amr.table);
    let opts = TrainOptions {
        epochs: 3,
        ..TrainOptions::default()
    };
    let (model, _) = train(&init, &ex, &[], &opts).expect("training runs");
    (model, built, ex)
}
