//! From an AMR graph and an English tree to decoder instances and back to
//! links between original positions.
//!
//! Alignments that leave this module are always oriented
//! `(AMR linearization position, English token index)`.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::alignment::{AlignmentSet, LinkType};
use crate::amr2tree::{amr_token_tree, CONCEPT_PRETERMINAL, ROLE_PRETERMINAL};
use crate::config::Settings;
use crate::error::{Error, Result};
use crate::hieralign::{decode_kbest, AlignmentInstance, DecodeParams, FeatureVector, SideToken};
use crate::ibm1::{train_ibm1, viterbi_align, Ibm1Training, TranslationTable};
use crate::penman::{read_amr_file, AmrGraph};
use crate::perceptron::Example;
use crate::preprocess::{filter_tokens, linearize, normalize, TokenKind, TokenStream};
use crate::symmetrize::grow_diag_final_and;
use crate::treebank::{read_tree_file, Tree};
use rayon::prelude::*;

/// Which structures serve as source and target during search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Configuration {
    /// Linearized AMR tokens as source, English tree as target.
    AmrStringEnTree,
    /// Converted AMR tree as source, English tree as target.
    AmrTreeEnTree,
    /// English tree as source, converted AMR tree as target.
    EnTreeAmrTree,
}

impl Configuration {
    pub const ALL: [Configuration; 3] = [
        Configuration::AmrStringEnTree,
        Configuration::AmrTreeEnTree,
        Configuration::EnTreeAmrTree,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Configuration::AmrStringEnTree => "amr-string-en-tree",
            Configuration::AmrTreeEnTree => "amr-tree-en-tree",
            Configuration::EnTreeAmrTree => "en-tree-amr-tree",
        }
    }

    pub fn amr_is_source(self) -> bool {
        self != Configuration::EnTreeAmrTree
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Configuration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Configuration::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown configuration '{s}'")))
    }
}

impl From<TokenKind> for LinkType {
    fn from(k: TokenKind) -> Self {
        match k {
            TokenKind::Concept => LinkType::Concept,
            TokenKind::Role => LinkType::Role,
            TokenKind::Word => LinkType::Word,
        }
    }
}

/// Tokens of one side together with their original positions.
#[derive(Debug, Clone, PartialEq)]
pub struct SideSeq {
    pub tokens: Vec<SideToken>,
    pub positions: Vec<usize>,
}

impl SideSeq {
    pub fn stems(&self) -> Vec<String> {
        self.tokens.iter().map(|t| t.stem.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// A sentence pair after filtering and stemming.
#[derive(Debug, Clone)]
pub struct PreparedPair {
    pub id: String,
    /// Unfiltered AMR linearization.
    pub amr_raw: TokenStream,
    /// Unfiltered English tokens.
    pub english_raw: TokenStream,
    /// Every surviving AMR token in linearization order.
    pub amr_string: SideSeq,
    /// Converted AMR tree restricted to survivors and renumbered, with its
    /// leaves. `None` when no tree leaf survives.
    pub amr_tree: Option<(Tree, SideSeq)>,
    /// English tree restricted to survivors and renumbered.
    pub en_tree: Tree,
    pub english: SideSeq,
    /// Gold links between original positions, empty without annotation.
    pub gold: AlignmentSet,
}

/// Gold links of the graph as `(linearization position, token index)`.
pub fn gold_alignment(graph: &AmrGraph) -> AlignmentSet {
    let position: HashMap<_, _> = linearize(graph)
        .tokens
        .iter()
        .filter_map(|t| t.element.map(|e| (e, t.origin)))
        .collect();
    graph
        .gold_links
        .iter()
        .filter_map(|&(el, en)| {
            position
                .get(&el)
                .map(|&p| (p, en, LinkType::from(el.kind())))
        })
        .collect()
}

/// English tokens of a pair: `::tok` when present, otherwise the tree leaves.
pub fn english_tokens(graph: &AmrGraph, tree: &Tree) -> Result<Vec<String>> {
    let leaves = tree.leaf_tokens();
    match graph.metadata.tokens() {
        Some(tok) if tok.len() != leaves.len() => Err(Error::Mismatch(format!(
            "{}: ::tok has {} tokens but the tree has {} leaves",
            graph.metadata.id().unwrap_or("pair"),
            tok.len(),
            leaves.len()
        ))),
        Some(tok) => Ok(tok),
        None => Ok(leaves),
    }
}

fn tree_side(
    tree: &Tree,
    skip: &[&str],
    stems: &HashMap<usize, (String, LinkType)>,
) -> (Tree, SideSeq) {
    let mut tree = tree
        .filter_leaves(&|_, pos| stems.contains_key(&pos))
        .expect("caller checked for survivors");
    let positions = tree.reindex();
    let syntax = tree.leaf_syntax(skip);
    let tokens = positions
        .iter()
        .zip(syntax)
        .map(|(p, syn)| {
            let (stem, kind) = stems[p].clone();
            SideToken {
                stem,
                tag: syn.tag,
                phrase: syn.phrase,
                kind,
            }
        })
        .collect();
    let mut i = 0;
    tree.map_leaves(&mut |_, _| {
        let stem = stems[&positions[i]].0.clone();
        i += 1;
        stem
    });
    (tree, SideSeq { tokens, positions })
}

pub fn prepare(graph: &AmrGraph, tree: &Tree, settings: &Settings) -> Result<PreparedPair> {
    let id = graph.metadata.id().unwrap_or("").to_string();
    let words = english_tokens(graph, tree)?;
    let amr_raw = linearize(graph);
    let english_raw = TokenStream::english(&words);

    let (amr_kept, _) = filter_tokens(&amr_raw, &settings.filter)?;
    let amr_norm = normalize(&amr_kept, settings.stem_len)?;
    let amr_stems: HashMap<usize, (String, LinkType)> = amr_norm
        .tokens
        .iter()
        .map(|t| (t.origin, (t.surface.clone(), t.kind.into())))
        .collect();
    let amr_string = SideSeq {
        tokens: amr_norm
            .tokens
            .iter()
            .map(|t| SideToken {
                stem: t.surface.clone(),
                tag: if t.kind == TokenKind::Role { "R" } else { "C" }.into(),
                phrase: "-".into(),
                kind: t.kind.into(),
            })
            .collect(),
        positions: amr_norm.tokens.iter().map(|t| t.origin).collect(),
    };
    let full_tree = amr_token_tree(graph, &settings.labels);
    let amr_tree = full_tree
        .leaves()
        .iter()
        .any(|(_, p)| amr_stems.contains_key(p))
        .then(|| {
            tree_side(
                &full_tree,
                &[CONCEPT_PRETERMINAL, ROLE_PRETERMINAL],
                &amr_stems,
            )
        });

    let (en_kept, _) = filter_tokens(&english_raw, &settings.filter)?;
    let en_norm = normalize(&en_kept, settings.stem_len)?;
    let en_stems: HashMap<usize, (String, LinkType)> = en_norm
        .tokens
        .iter()
        .map(|t| (t.origin, (t.surface.clone(), LinkType::Word)))
        .collect();
    let mut numbered = tree.clone();
    numbered.reindex();
    let (en_tree, english) = tree_side(&numbered, &[], &en_stems);

    Ok(PreparedPair {
        id,
        amr_raw,
        english_raw,
        amr_string,
        amr_tree,
        en_tree,
        english,
        gold: gold_alignment(graph),
    })
}

/// IBM Model 1 training pairs `(AMR stems, English stems)`.
pub fn ibm1_corpus(pairs: &[PreparedPair]) -> Vec<(Vec<String>, Vec<String>)> {
    pairs
        .iter()
        .map(|p| (p.amr_string.stems(), p.english.stems()))
        .collect()
}

/// Which IBM1 alignment to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ibm1Direction {
    /// English generated from AMR: every English token has at most one link.
    AmrToEn,
    /// AMR generated from English: every AMR token has at most one link.
    EnToAmr,
    /// Grow-diag-final-and of both directions.
    Gdfa,
}

impl FromStr for Ibm1Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "amr-en" => Ok(Ibm1Direction::AmrToEn),
            "en-amr" => Ok(Ibm1Direction::EnToAmr),
            "gdfa" => Ok(Ibm1Direction::Gdfa),
            _ => Err(Error::InvalidArgument(format!("unknown direction '{s}'"))),
        }
    }
}

/// IBM1 Viterbi links between two sides, as `(amr index, english index)`.
pub fn ibm1_links(
    amr: &SideSeq,
    english: &SideSeq,
    amr_en: &TranslationTable,
    en_amr: &TranslationTable,
    direction: Ibm1Direction,
) -> AlignmentSet {
    let (a, e) = (amr.stems(), english.stems());
    let typed = |set: AlignmentSet| set.retype(|i, _| amr.tokens[i].kind);
    let forward = || typed(viterbi_align(amr_en, &a, &e));
    let backward = || typed(viterbi_align(en_amr, &e, &a).transpose());
    match direction {
        Ibm1Direction::AmrToEn => forward(),
        Ibm1Direction::EnToAmr => backward(),
        Ibm1Direction::Gdfa => grow_diag_final_and(&forward(), &backward(), a.len(), e.len())
            .expect("viterbi links are within bounds"),
    }
}

/// Projects `(amr index, english index)` links to original positions.
pub fn to_original(links: &AlignmentSet, amr: &SideSeq, english: &SideSeq) -> AlignmentSet {
    links
        .iter()
        .map(|(a, e, ty)| (amr.positions[a], english.positions[e], ty))
        .collect()
}

/// Gold links whose two ends are present on the given sides, as
/// `(amr index, english index)`.
pub fn restrict_gold(gold: &AlignmentSet, amr: &SideSeq, english: &SideSeq) -> AlignmentSet {
    let a: HashMap<usize, usize> = amr
        .positions
        .iter()
        .enumerate()
        .map(|(i, &p)| (p, i))
        .collect();
    let e: HashMap<usize, usize> = english
        .positions
        .iter()
        .enumerate()
        .map(|(i, &p)| (p, i))
        .collect();
    gold.iter()
        .filter_map(|(p, q, ty)| Some((*a.get(&p)?, *e.get(&q)?, ty)))
        .collect()
}

/// An instance plus what is needed to map its links back.
#[derive(Debug, Clone)]
pub struct BuiltInstance {
    pub instance: AlignmentInstance,
    pub configuration: Configuration,
    pub amr: SideSeq,
    pub english: SideSeq,
}

impl BuiltInstance {
    /// Swaps instance links `(source, target)` into `(amr index, english
    /// index)`. The swap is its own inverse.
    pub fn canonical(&self, links: &AlignmentSet) -> AlignmentSet {
        if self.configuration.amr_is_source() {
            links.clone()
        } else {
            links.transpose()
        }
    }

    /// Instance links to original positions.
    pub fn to_original(&self, links: &AlignmentSet) -> AlignmentSet {
        to_original(&self.canonical(links), &self.amr, &self.english)
    }

    /// Gold links in instance orientation, dropping links to tokens the
    /// instance does not contain.
    pub fn gold(&self, gold: &AlignmentSet) -> AlignmentSet {
        self.canonical(&restrict_gold(gold, &self.amr, &self.english))
    }

    /// Distinct AMR positions used by the instance.
    pub fn amr_positions(&self) -> HashSet<usize> {
        self.amr.positions.iter().copied().collect()
    }
}

pub fn build_instance(
    pair: &PreparedPair,
    configuration: Configuration,
    amr_en: &TranslationTable,
    en_amr: &TranslationTable,
    settings: &Settings,
) -> Result<BuiltInstance> {
    let (amr, amr_tree) = match configuration {
        Configuration::AmrStringEnTree => (pair.amr_string.clone(), None),
        Configuration::AmrTreeEnTree | Configuration::EnTreeAmrTree => {
            let (tree, side) = pair.amr_tree.clone().ok_or(Error::FullyFiltered)?;
            (side, Some(tree))
        }
    };
    let english = pair.english.clone();
    let third = ibm1_links(&amr, &english, amr_en, en_amr, Ibm1Direction::Gdfa);
    let instance = match amr_tree {
        Some(tree) if configuration == Configuration::EnTreeAmrTree => AlignmentInstance::new(
            english.tokens.clone(),
            tree,
            amr.tokens.clone(),
            third.transpose(),
            en_amr,
            amr_en,
            settings.templates.clone(),
            false,
        )?,
        _ => AlignmentInstance::new(
            amr.tokens.clone(),
            pair.en_tree.clone(),
            english.tokens.clone(),
            third,
            amr_en,
            en_amr,
            settings.templates.clone(),
            true,
        )?,
    };
    Ok(BuiltInstance {
        instance,
        configuration,
        amr,
        english,
    })
}

/// Reads side-by-side AMR and tree files and prepares every pair.
pub fn load_corpus(
    amr_text: &str,
    ptb_text: &str,
    settings: &Settings,
) -> Result<Vec<PreparedPair>> {
    let graphs = read_amr_file(amr_text, &settings.parse)?;
    let trees = read_tree_file(ptb_text)?;
    if graphs.len() != trees.len() {
        return Err(Error::Mismatch(format!(
            "{} AMR graphs but {} trees",
            graphs.len(),
            trees.len()
        )));
    }
    graphs
        .par_iter()
        .zip(trees.par_iter())
        .map(|(g, t)| prepare(g, t, settings))
        .collect()
}

/// Both IBM1 directions trained on the AMR string side.
#[derive(Debug, Clone)]
pub struct Ibm1Tables {
    pub amr_en: Ibm1Training,
    pub en_amr: Ibm1Training,
}

pub fn train_tables(pairs: &[PreparedPair], settings: &Settings) -> Result<Ibm1Tables> {
    let corpus = ibm1_corpus(pairs);
    let swapped: Vec<(Vec<String>, Vec<String>)> =
        corpus.iter().map(|(a, e)| (e.clone(), a.clone())).collect();
    Ok(Ibm1Tables {
        amr_en: train_ibm1(&corpus, settings.ibm1_iterations, settings.smoothing)?,
        en_amr: train_ibm1(&swapped, settings.ibm1_iterations, settings.smoothing)?,
    })
}

/// Builds one instance per pair, in corpus order.
pub fn build_instances(
    pairs: &[PreparedPair],
    configuration: Configuration,
    amr_en: &TranslationTable,
    en_amr: &TranslationTable,
    settings: &Settings,
) -> Result<Vec<BuiltInstance>> {
    pairs
        .par_iter()
        .map(|p| build_instance(p, configuration, amr_en, en_amr, settings))
        .collect()
}

/// Training examples pairing each instance with its restricted gold.
pub fn examples(pairs: &[PreparedPair], built: &[BuiltInstance]) -> Vec<Example> {
    pairs
        .iter()
        .zip(built)
        .map(|(p, b)| Example {
            instance: b.instance.clone(),
            gold: b.gold(&p.gold),
        })
        .collect()
}

/// 1-best links of every instance between original positions, in input order.
pub fn align_corpus(
    weights: &FeatureVector,
    built: &[BuiltInstance],
    params: &DecodeParams,
) -> Result<Vec<AlignmentSet>> {
    built
        .par_iter()
        .map(|b| {
            let best = decode_kbest(weights, &b.instance, params)?.swap_remove(0).0;
            Ok(b.to_original(&best))
        })
        .collect()
}
