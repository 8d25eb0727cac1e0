use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use amralign::alignment::{read_pharaoh, write_pharaoh, AlignmentSet};
use amralign::amr2tree::{amr_to_tree, LabelScheme};
use amralign::hieralign::decode_kbest;
use amralign::ibm1::TranslationTable;
use amralign::metrics::{
    bootstrap_significance, filtering_upper_bound, significance_report, GoldPair, TypeFilter,
    TypedScores, DEFAULT_RESAMPLES,
};
use amralign::penman::read_amr_file;
use amralign::perceptron::{train, AlignModel, TrainOptions, DEFAULT_EPOCHS};
use amralign::pipeline::{
    build_instances, examples, ibm1_links, load_corpus, to_original, train_tables, Configuration,
    Ibm1Direction, PreparedPair,
};
use amralign::symmetrize::{combine, CombineMode};
use amralign::{FilterConfig, Settings};

#[derive(Parser)]
#[command(name = "amralign", version, about = "English-AMR alignment toolkit")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML settings file.
    #[arg(long, global = true, value_name = "FILE")]
    settings: Option<PathBuf>,
    /// Filter lists in the sectioned text format; replaces the settings' lists.
    #[arg(long, global = true, value_name = "FILE")]
    filter: Option<PathBuf>,
    /// Role label table; replaces the settings' table.
    #[arg(long, global = true, value_name = "FILE")]
    labels: Option<PathBuf>,
    /// Base of the `~e.N` indices in AMR files.
    #[arg(long, global = true, value_name = "N")]
    index_base: Option<usize>,
    /// Worker threads; defaults to all cores. Outputs do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
}

#[derive(Args)]
struct Corpus {
    /// AMR file in PENMAN notation.
    #[arg(long, value_name = "FILE")]
    amr: PathBuf,
    /// English trees, one bracketed tree per line.
    #[arg(long, value_name = "FILE")]
    trees: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Filter and stem both sides and write them with their provenance.
    Preprocess {
        #[command(flatten)]
        corpus: Corpus,
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
    },
    /// Convert AMR graphs to bracketed trees over their concepts.
    Amr2tree {
        #[arg(long, value_name = "FILE")]
        amr: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Train IBM Model 1 in both directions.
    Ibm1Train {
        #[command(flatten)]
        corpus: Corpus,
        /// Output table t(english | amr).
        #[arg(long, value_name = "FILE")]
        amr_en: PathBuf,
        /// Output table t(amr | english).
        #[arg(long, value_name = "FILE")]
        en_amr: PathBuf,
        #[arg(long, value_name = "N")]
        iterations: Option<usize>,
        /// Per-iteration log-likelihoods.
        #[arg(long, value_name = "FILE")]
        log: Option<PathBuf>,
    },
    /// Viterbi alignments from IBM1 tables.
    Ibm1Align {
        #[command(flatten)]
        corpus: Corpus,
        #[arg(long, value_name = "FILE")]
        amr_en: PathBuf,
        #[arg(long, value_name = "FILE")]
        en_amr: PathBuf,
        /// amr-en, en-amr or gdfa.
        #[arg(long, default_value = "amr-en")]
        direction: Ibm1Direction,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        #[command(flatten)]
        format: Format,
    },
    /// Train the hierarchical aligner with the averaged perceptron.
    Train {
        #[arg(long)]
        config: Configuration,
        #[command(flatten)]
        corpus: Corpus,
        #[arg(long, value_name = "FILE", requires = "dev_trees")]
        dev_amr: Option<PathBuf>,
        #[arg(long, value_name = "FILE", requires = "dev_amr")]
        dev_trees: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        amr_en: PathBuf,
        #[arg(long, value_name = "FILE")]
        en_amr: PathBuf,
        #[arg(long, default_value_t = DEFAULT_EPOCHS)]
        epochs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Update against the plain 1-best instead of the loss-augmented one.
        #[arg(long)]
        plain_updates: bool,
        #[arg(long, value_name = "FILE")]
        model: PathBuf,
        /// Per-epoch training log.
        #[arg(long, value_name = "FILE")]
        report: Option<PathBuf>,
    },
    /// Align a corpus with a trained model.
    Align {
        #[arg(long)]
        config: Configuration,
        #[arg(long, value_name = "FILE")]
        model: PathBuf,
        #[command(flatten)]
        corpus: Corpus,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        /// Also write the k-best list of every pair.
        #[arg(long, value_name = "FILE")]
        kbest_out: Option<PathBuf>,
        #[command(flatten)]
        format: Format,
    },
    /// Combine two alignment files line by line.
    Symmetrize {
        #[arg(long, value_name = "FILE")]
        a: PathBuf,
        #[arg(long, value_name = "FILE")]
        b: PathBuf,
        /// intersection, union or gdfa.
        #[arg(long, default_value = "gdfa")]
        mode: CombineMode,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        #[command(flatten)]
        format: Format,
    },
    /// Precision, recall and F per link type.
    Eval {
        #[arg(long, value_name = "FILE")]
        gold: PathBuf,
        #[arg(long, value_name = "FILE")]
        pred: PathBuf,
        /// concept, role, both or all.
        #[arg(long, default_value = "all")]
        r#type: String,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Paired bootstrap test of system A against system B.
    Significance {
        #[arg(long, value_name = "FILE")]
        gold: PathBuf,
        #[arg(long, value_name = "FILE")]
        pred_a: PathBuf,
        #[arg(long, value_name = "FILE")]
        pred_b: PathBuf,
        #[arg(long, default_value = "both")]
        r#type: TypeFilter,
        #[arg(long, default_value_t = DEFAULT_RESAMPLES)]
        resamples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Best scores reachable after filtering, per link type.
    UpperBound {
        #[command(flatten)]
        corpus: Corpus,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Format {
    /// Write plain `i-j` links without type codes.
    #[arg(long)]
    untyped: bool,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn settings(common: &Common) -> Result<Settings> {
    let mut s = match &common.settings {
        Some(p) => Settings::from_toml(&read(p)?).with_context(|| p.display().to_string())?,
        None => Settings::default(),
    };
    if let Some(p) = &common.filter {
        s.filter = FilterConfig::parse(&read(p)?).with_context(|| p.display().to_string())?;
    }
    if let Some(p) = &common.labels {
        s.labels = LabelScheme::parse(&read(p)?).with_context(|| p.display().to_string())?;
    }
    if let Some(b) = common.index_base {
        s.parse.index_base = b;
    }
    Ok(s)
}

fn corpus(c: &Corpus, settings: &Settings) -> Result<Vec<PreparedPair>> {
    let pairs = load_corpus(&read(&c.amr)?, &read(&c.trees)?, settings)
        .with_context(|| format!("{} / {}", c.amr.display(), c.trees.display()))?;
    log::info!("{} pairs from {}", pairs.len(), c.amr.display());
    Ok(pairs)
}

fn table(path: &Path, settings: &Settings) -> Result<TranslationTable> {
    TranslationTable::from_tsv(&read(path)?, settings.smoothing)
        .with_context(|| path.display().to_string())
}

fn alignments(path: &Path) -> Result<Vec<AlignmentSet>> {
    read_pharaoh(&read(path)?).with_context(|| path.display().to_string())
}

fn lines<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(|x| f(x) + "\n").collect()
}

fn run(cli: Cli) -> Result<()> {
    let s = settings(&cli.common)?;
    match cli.command {
        Command::Preprocess { corpus: c, out_dir } => {
            let pairs = corpus(&c, &s)?;
            std::fs::create_dir_all(&out_dir).with_context(|| out_dir.display().to_string())?;
            let join = |v: Vec<String>| v.join(" ");
            let positions = |p: &[usize]| {
                p.iter()
                    .map(|i| i.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            write(
                &out_dir.join("amr.txt"),
                &lines(&pairs, |p| join(p.amr_string.stems())),
            )?;
            write(
                &out_dir.join("en.txt"),
                &lines(&pairs, |p| join(p.english.stems())),
            )?;
            write(
                &out_dir.join("amr.pos"),
                &lines(&pairs, |p| positions(&p.amr_string.positions)),
            )?;
            write(
                &out_dir.join("en.pos"),
                &lines(&pairs, |p| positions(&p.english.positions)),
            )?;
            let gold: Vec<AlignmentSet> = pairs.iter().map(|p| p.gold.clone()).collect();
            write(&out_dir.join("gold.align"), &write_pharaoh(&gold, true))?;
        }
        Command::Amr2tree { amr, out } => {
            let graphs =
                read_amr_file(&read(&amr)?, &s.parse).with_context(|| amr.display().to_string())?;
            write(
                &out,
                &lines(&graphs, |g| amr_to_tree(g, &s.labels).0.to_string()),
            )?;
        }
        Command::Ibm1Train {
            corpus: c,
            amr_en,
            en_amr,
            iterations,
            log,
        } => {
            let s = Settings {
                ibm1_iterations: iterations.unwrap_or(s.ibm1_iterations),
                ..s
            };
            let tables = train_tables(&corpus(&c, &s)?, &s)?;
            write(&amr_en, &tables.amr_en.table.to_tsv())?;
            write(&en_amr, &tables.en_amr.table.to_tsv())?;
            if let Some(path) = log {
                let mut text = String::from("iteration\tamr-en\ten-amr\n");
                for (i, (a, b)) in tables
                    .amr_en
                    .log_likelihoods
                    .iter()
                    .zip(&tables.en_amr.log_likelihoods)
                    .enumerate()
                {
                    text.push_str(&format!("{}\t{a}\t{b}\n", i + 1));
                }
                write(&path, &text)?;
            }
        }
        Command::Ibm1Align {
            corpus: c,
            amr_en,
            en_amr,
            direction,
            out,
            format,
        } => {
            let pairs = corpus(&c, &s)?;
            let (t_ae, t_ea) = (table(&amr_en, &s)?, table(&en_amr, &s)?);
            let links: Vec<AlignmentSet> = pairs
                .iter()
                .map(|p| {
                    let l = ibm1_links(&p.amr_string, &p.english, &t_ae, &t_ea, direction);
                    to_original(&l, &p.amr_string, &p.english)
                })
                .collect();
            write(&out, &write_pharaoh(&links, !format.untyped))?;
        }
        Command::Train {
            config,
            corpus: c,
            dev_amr,
            dev_trees,
            amr_en,
            en_amr,
            epochs,
            seed,
            plain_updates,
            model,
            report,
        } => {
            let init = AlignModel::new(table(&amr_en, &s)?, table(&en_amr, &s)?);
            let build = |pairs: &[PreparedPair]| -> Result<_> {
                let built = build_instances(pairs, config, &init.amr_en, &init.en_amr, &s)?;
                Ok(examples(pairs, &built))
            };
            let train_set = build(&corpus(&c, &s)?)?;
            let dev_set = match (dev_amr, dev_trees) {
                (Some(amr), Some(trees)) => build(&corpus(&Corpus { amr, trees }, &s)?)?,
                _ => Vec::new(),
            };
            let opts = TrainOptions {
                epochs,
                seed,
                params: s.decode,
                loss_augmented: !plain_updates,
            };
            let (mut trained, log) = train(&init, &train_set, &dev_set, &opts)?;
            trained.meta.insert("config".into(), config.to_string());
            trained
                .meta
                .insert("templates".into(), s.templates.to_string());
            write(&model, &trained.to_tsv())?;
            emit(report.as_deref(), &log.to_log())?;
        }
        Command::Align {
            config,
            model,
            corpus: c,
            out,
            kbest_out,
            format,
        } => {
            let m = AlignModel::from_tsv(&read(&model)?, s.smoothing)
                .with_context(|| model.display().to_string())?;
            if let Some(trained) = m.meta.get("config") {
                if trained != config.name() {
                    log::warn!("model was trained with --config {trained}");
                }
            }
            let pairs = corpus(&c, &s)?;
            let built = build_instances(&pairs, config, &m.amr_en, &m.en_amr, &s)?;
            let kbest: Vec<Vec<(AlignmentSet, f64)>> = {
                use rayon::prelude::*;
                built
                    .par_iter()
                    .map(|b| {
                        let list = decode_kbest(&m.averaged, &b.instance, &s.decode)?;
                        Ok(list
                            .into_iter()
                            .map(|(y, score)| (b.to_original(&y), score))
                            .collect())
                    })
                    .collect::<amralign::Result<_>>()?
            };
            let best: Vec<AlignmentSet> = kbest.iter().map(|l| l[0].0.clone()).collect();
            write(&out, &write_pharaoh(&best, !format.untyped))?;
            if let Some(path) = kbest_out {
                let mut text = String::from("pair\trank\tscore\tlinks\n");
                for (i, list) in kbest.iter().enumerate() {
                    for (r, (y, score)) in list.iter().enumerate() {
                        text.push_str(&format!(
                            "{i}\t{}\t{score}\t{}\n",
                            r + 1,
                            y.to_pharaoh(!format.untyped)
                        ));
                    }
                }
                write(&path, &text)?;
            }
        }
        Command::Symmetrize {
            a,
            b,
            mode,
            out,
            format,
        } => {
            let (xs, ys) = (alignments(&a)?, alignments(&b)?);
            if xs.len() != ys.len() {
                bail!(amralign::Error::Mismatch(format!(
                    "{} lines against {}",
                    xs.len(),
                    ys.len()
                )));
            }
            let merged = xs
                .iter()
                .zip(&ys)
                .map(|(x, y)| {
                    let dim = |f: fn(&(usize, usize)) -> usize| {
                        x.pairs()
                            .chain(y.pairs())
                            .map(|p| f(&p) + 1)
                            .max()
                            .unwrap_or(0)
                    };
                    combine(x, y, mode, dim(|p| p.0), dim(|p| p.1))
                })
                .collect::<amralign::Result<Vec<_>>>()?;
            write(&out, &write_pharaoh(&merged, !format.untyped))?;
        }
        Command::Eval {
            gold,
            pred,
            r#type,
            out,
        } => {
            let scores = TypedScores::evaluate(&alignments(&gold)?, &alignments(&pred)?)?;
            let text = if r#type == "all" {
                scores.to_tsv()
            } else {
                let f: TypeFilter = r#type.parse()?;
                let p = scores.get(f);
                format!(
                    "type\tprecision\trecall\tf1\n{}\t{:.4}\t{:.4}\t{:.4}\n",
                    f.name(),
                    p.precision,
                    p.recall,
                    p.f1
                )
            };
            emit(out.as_deref(), &text)?;
        }
        Command::Significance {
            gold,
            pred_a,
            pred_b,
            r#type,
            resamples,
            seed,
            out,
        } => {
            let (g, a, b) = (
                alignments(&gold)?,
                alignments(&pred_a)?,
                alignments(&pred_b)?,
            );
            let p = bootstrap_significance(&g, &a, &b, r#type, resamples, seed)?;
            let mut text = TypedScores::evaluate(&g, &a)?
                .to_tsv()
                .replacen("type", "a:type", 1);
            text.push_str(
                &TypedScores::evaluate(&g, &b)?
                    .to_tsv()
                    .replacen("type", "b:type", 1),
            );
            text.push_str(&significance_report(p));
            emit(out.as_deref(), &text)?;
        }
        Command::UpperBound { corpus: c, out } => {
            let pairs = corpus(&c, &s)?;
            let gold: Vec<GoldPair> = pairs
                .iter()
                .map(|p| GoldPair {
                    amr: p.amr_raw.clone(),
                    english: p.english_raw.clone(),
                    gold: p.gold.clone(),
                })
                .collect();
            let text = format!(
                "# filtering-only upper bound\n{}",
                filtering_upper_bound(&gold, &s.filter).to_tsv()
            );
            emit(out.as_deref(), &text)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(n) = cli.common.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
