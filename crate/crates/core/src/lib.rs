//! Language-graph distillation for low-resource translation.
//!
//! Languages are nodes of a directed graph and translation directions are
//! edges weighted by their measured accuracy (BLEU). The crate measures
//! multi-hop pivot-path accuracies, greedily picks the edges whose pivot
//! paths beat the direct translation by the widest margin, generates
//! pseudo-parallel data for them by translating along the best forward and
//! backward paths, retrains, and repeats until the average gain falls under
//! a threshold.
//!
//! Everything runs at desk scale: [`world`] generates synthetic languages
//! with known ground truth and [`translator`] provides a trainable lexical
//! translator (IBM Model 1) standing in for a neural model.
//!
//! ```no_run
//! use graph_distill::{graph::LanguageGraph, orchestrator::{self, RunConfig}};
//! # fn demo(graph: LanguageGraph, data: graph_distill::world::GeneratedData) -> graph_distill::Result<()> {
//! let result = orchestrator::run(&graph, &data.corpora, &data.mono, &data.dev, &RunConfig::default())
//!     .map_err(|aborted| aborted.error)?;
//! for report in &result.reports {
//!     println!("T={} sigma={:.2}", report.iteration, report.sigma);
//! }
//! # Ok(())
//! # }
//! ```

pub mod config;
pub mod distillation;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod orchestrator;
pub mod pathtable;
pub mod remote;
pub mod report;
pub mod seed;
pub mod translator;
pub mod world;

pub use error::{Error, ErrorKind, Result};
pub use graph::{Edge, EdgeWeightMap, LangCode, LanguageGraph};
pub use metrics::{average_improvement, bleu, BleuScore};
pub use pathtable::{AccuracyTable, PathDirection, TranslationPath};
pub use translator::{Lexicon, MultilingualModel, TrainerConfig, TranslationBackend};
pub use world::{ConceptWorld, MonoCorpus, MultiParallelSet, ParallelCorpus, Provenance, WorldConfig};
