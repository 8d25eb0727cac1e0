mod support;

use amralign::ibm1::{train_ibm1, viterbi_align, TranslationTable};
use amralign::pipeline::{ibm1_corpus, load_corpus};
use amralign::Settings;

#[test]
fn log_likelihood_never_decreases_on_fixtures() {
    let settings = Settings::default();
    for name in support::CORPORA {
        let pairs = load_corpus(
            &support::fixture_text(&format!("{name}.amr")),
            &support::fixture_text(&format!("{name}.ptb")),
            &settings,
        )
        .unwrap();
        let corpus = ibm1_corpus(&pairs);
        let swapped: Vec<_> = corpus.iter().map(|(a, e)| (e.clone(), a.clone())).collect();
        for c in [&corpus, &swapped] {
            let run = train_ibm1(c, 10, 1e-7).unwrap();
            for w in run.log_likelihoods.windows(2) {
                assert!(w[1] >= w[0] - 1e-9, "{name}: {:?}", run.log_likelihoods);
            }
            for s in run.table.sources() {
                assert!((run.table.source_mass(s) - 1.0).abs() < 1e-9, "{name}: {s}");
            }
        }
    }
}

#[test]
fn identity_dictionary_recovers_identity() {
    let words = ["alpha", "beta", "gamma", "delta", "eps"];
    let mut corpus = Vec::new();
    for i in 0..words.len() {
        for j in 0..words.len() {
            if i != j {
                corpus.push((vec![words[i], words[j]], vec![words[i], words[j]]));
            }
        }
    }
    let run = train_ibm1(&corpus, 20, 1e-7).unwrap();
    for (s, t) in &corpus {
        let links: Vec<_> = viterbi_align(&run.table, s, t).pairs().collect();
        assert_eq!(links, [(0, 0), (1, 1)]);
    }
}

#[test]
fn table_file_round_trips() {
    let corpus = vec![(vec!["a", "b"], vec!["x", "y"]), (vec!["a"], vec!["x"])];
    let table = train_ibm1(&corpus, 5, 1e-7).unwrap().table;
    let text = table.to_tsv();
    let again = TranslationTable::from_tsv(&text, 1e-7).unwrap();
    assert_eq!(again.to_tsv(), text);
    let lines: Vec<&str> = text.lines().collect();
    let mut sorted = lines.clone();
    sorted.sort();
    assert_eq!(lines, sorted);
}
