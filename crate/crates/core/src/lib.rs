//! Alignment of English sentences to the concepts and roles of AMR graphs.
//!
//! The pipeline reads PENMAN graphs and bracketed English trees, filters and
//! stems both sides, and aligns them either with IBM Model 1 or with a
//! hierarchical aligner that searches k-best partial alignments bottom-up
//! over a target constituency tree and is trained with an averaged
//! perceptron.

pub mod alignment;
pub mod amr2tree;
pub mod config;
pub mod error;
pub mod hieralign;
pub mod ibm1;
pub mod metrics;
pub mod penman;
pub mod perceptron;
pub mod pipeline;
pub mod preprocess;
pub mod symmetrize;
pub mod treebank;

pub use alignment::{AlignmentSet, LinkType};
pub use config::Settings;
pub use error::{Error, Result};
pub use hieralign::{AlignmentInstance, DecodeParams, FeatureVector, SideToken, TemplateSet};
pub use ibm1::TranslationTable;
pub use penman::{AmrGraph, ElementRef};
pub use perceptron::AlignModel;
pub use pipeline::Configuration;
pub use preprocess::{FilterConfig, ProvenanceMap, TokenStream};
pub use treebank::Tree;
