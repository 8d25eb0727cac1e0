mod support;

use amralign::alignment::AlignmentSet;
use amralign::ibm1::{TranslationTable, DEFAULT_SMOOTHING};
use amralign::metrics::{corpus_prf, TypeFilter};
use amralign::perceptron::{train, AlignModel, TrainOptions};
use amralign::pipeline::{align_corpus, ibm1_links, to_original, Configuration, Ibm1Direction};
use amralign::Settings;

#[test]
fn supervised_beats_ibm1_on_unseen_numbers() {
    let settings = Settings::default();
    let data = support::Prepared::load(&["generalization/train", "generalization/test"], &settings);
    let (train_pairs, test_pairs) = data.pairs.split_at(40);
    let gold: Vec<AlignmentSet> = test_pairs.iter().map(|p| p.gold.clone()).collect();

    let ibm1 = [Ibm1Direction::AmrToEn, Ibm1Direction::EnToAmr]
        .into_iter()
        .map(|dir| {
            let pred: Vec<AlignmentSet> = test_pairs
                .iter()
                .map(|p| {
                    let links = ibm1_links(
                        &p.amr_string,
                        &p.english,
                        &data.tables.amr_en.table,
                        &data.tables.en_amr.table,
                        dir,
                    );
                    to_original(&links, &p.amr_string, &p.english)
                })
                .collect();
            corpus_prf(&gold, &pred, TypeFilter::Both).unwrap().f1
        })
        .fold(0.0, f64::max);

    let c = Configuration::AmrTreeEnTree;
    let (_, train_set) = data.build(train_pairs, c, &settings);
    let (built, _) = data.build(test_pairs, c, &settings);
    let init = AlignModel::new(
        TranslationTable::new(DEFAULT_SMOOTHING),
        TranslationTable::new(DEFAULT_SMOOTHING),
    );
    let (model, report) = train(&init, &train_set, &[], &TrainOptions::default()).unwrap();
    let pred = align_corpus(&model.averaged, &built, &settings.decode).unwrap();
    let hier = corpus_prf(&gold, &pred, TypeFilter::Both).unwrap().f1;
    eprintln!("hieralign {hier:.4} ibm1 {ibm1:.4}\n{}", report.to_log());
    assert!(hier > ibm1, "hieralign {hier} ibm1 {ibm1}");
}
