//! Runs the command-line pipeline over the shipped fixtures.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const CONFIGS: [&str; 3] = ["amr-string-en-tree", "amr-tree-en-tree", "en-tree-amr-tree"];

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn amralign(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_amralign"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = amralign(args);
    assert!(
        out.status.success(),
        "amralign {}\n{}",
        args.join(" "),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

/// preprocess, ibm1, train, align, symmetrize, eval, significance and
/// upper-bound on the corpus fixture. Returns every file written, sorted.
pub fn run_pipeline(dir: &Path, seed: u64, jobs: usize) -> Vec<PathBuf> {
    let corpus = fixtures().join("corpus");
    let f = |name: &str| corpus.join(name);
    let o = |name: &str| dir.join(name);
    let seed = seed.to_string();
    let jobs = jobs.to_string();
    let common = ["--jobs", jobs.as_str()];
    let run = |args: &[&str]| {
        let mut all = args.to_vec();
        all.extend(common);
        ok(&all);
    };

    run(&[
        "preprocess",
        "--amr",
        s(&f("test.amr")),
        "--trees",
        s(&f("test.ptb")),
        "--out-dir",
        s(&o("pre")),
    ]);
    run(&[
        "amr2tree",
        "--amr",
        s(&f("test.amr")),
        "--out",
        s(&o("test.amrtree")),
    ]);
    run(&[
        "ibm1-train",
        "--amr",
        s(&f("train.amr")),
        "--trees",
        s(&f("train.ptb")),
        "--amr-en",
        s(&o("amr-en.tsv")),
        "--en-amr",
        s(&o("en-amr.tsv")),
        "--log",
        s(&o("ibm1.log")),
    ]);
    for dir_name in ["amr-en", "en-amr", "gdfa"] {
        run(&[
            "ibm1-align",
            "--amr",
            s(&f("test.amr")),
            "--trees",
            s(&f("test.ptb")),
            "--amr-en",
            s(&o("amr-en.tsv")),
            "--en-amr",
            s(&o("en-amr.tsv")),
            "--direction",
            dir_name,
            "--out",
            s(&o(&format!("ibm1-{dir_name}.align"))),
        ]);
    }
    for c in CONFIGS {
        run(&[
            "train",
            "--config",
            c,
            "--amr",
            s(&f("train.amr")),
            "--trees",
            s(&f("train.ptb")),
            "--dev-amr",
            s(&f("dev.amr")),
            "--dev-trees",
            s(&f("dev.ptb")),
            "--amr-en",
            s(&o("amr-en.tsv")),
            "--en-amr",
            s(&o("en-amr.tsv")),
            "--epochs",
            "5",
            "--seed",
            &seed,
            "--model",
            s(&o(&format!("{c}.model"))),
            "--report",
            s(&o(&format!("{c}.log"))),
        ]);
        run(&[
            "align",
            "--config",
            c,
            "--model",
            s(&o(&format!("{c}.model"))),
            "--amr",
            s(&f("test.amr")),
            "--trees",
            s(&f("test.ptb")),
            "--out",
            s(&o(&format!("{c}.align"))),
            "--kbest-out",
            s(&o(&format!("{c}.kbest"))),
        ]);
    }
    for (name, a, b) in [
        ("gdfa1", "amr-string-en-tree", "en-tree-amr-tree"),
        ("gdfa2", "amr-tree-en-tree", "en-tree-amr-tree"),
    ] {
        run(&[
            "symmetrize",
            "--a",
            s(&o(&format!("{a}.align"))),
            "--b",
            s(&o(&format!("{b}.align"))),
            "--mode",
            "gdfa",
            "--out",
            s(&o(&format!("{name}.align"))),
        ]);
    }
    for p in produced_alignments(dir) {
        let stem = p.file_stem().unwrap().to_str().unwrap().to_string();
        run(&[
            "eval",
            "--gold",
            s(&o("pre/gold.align")),
            "--pred",
            s(&p),
            "--out",
            s(&o(&format!("{stem}.eval"))),
        ]);
    }
    run(&[
        "significance",
        "--gold",
        s(&o("pre/gold.align")),
        "--pred-a",
        s(&o("gdfa2.align")),
        "--pred-b",
        s(&o("ibm1-gdfa.align")),
        "--seed",
        &seed,
        "--out",
        s(&o("significance.tsv")),
    ]);
    run(&[
        "upper-bound",
        "--amr",
        s(&f("test.amr")),
        "--trees",
        s(&f("test.ptb")),
        "--out",
        s(&o("upper-bound.tsv")),
    ]);
    files(dir)
}

/// Alignment files the aligners wrote, excluding gold.
pub fn produced_alignments(dir: &Path) -> Vec<PathBuf> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "align"))
        .collect();
    out.sort();
    out
}

pub fn files(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p);
            }
        }
    }
    out.sort();
    out
}

/// Reads the `both` row of an eval TSV as (precision, recall, f1).
pub fn both_row(path: &Path) -> (f64, f64, f64) {
    let text = std::fs::read_to_string(path).unwrap();
    let line = text
        .lines()
        .find(|l| l.starts_with("both\t"))
        .expect("both row");
    let v: Vec<f64> = line
        .split('\t')
        .skip(1)
        .map(|x| x.parse().unwrap())
        .collect();
    (v[0], v[1], v[2])
}
