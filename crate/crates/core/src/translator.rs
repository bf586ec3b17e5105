//! Translation backends and the desk-scale lexical translator.
//!
//! The shipped model keeps one IBM Model 1 lexicon per translation
//! direction. Direction keys play the role of the target-language tag of a
//! single tagged multilingual model. Decoding substitutes every source token
//! with its most probable target word and copies unknown tokens through.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, LangCode};
use crate::pathtable::TranslationPath;
use crate::world::{ConceptWorld, ParallelCorpus, Provenance};

/// Anything that can translate between language pairs it knows about.
///
/// The orchestrator evaluates paths and generates pseudo data only through
/// this trait, so a remote model can replace the lexical one.
pub trait TranslationBackend: Sync {
    fn has_direction(&self, src: &str, tgt: &str) -> bool;

    fn translate(&self, src: &str, tgt: &str, sentences: &[String]) -> Result<Vec<String>>;
}

/// Runs `sentences` through every hop of `path` in order.
pub fn pipeline_translate<B: TranslationBackend + ?Sized>(
    backend: &B,
    path: &TranslationPath,
    sentences: &[String],
) -> Result<Vec<String>> {
    for (hop, w) in path.langs().windows(2).enumerate() {
        if !backend.has_direction(w[0].as_str(), w[1].as_str()) {
            return Err(Error::UntrainedDirection { src: w[0].to_string(), tgt: w[1].to_string(), hop: Some(hop) });
        }
    }
    let mut current = sentences.to_vec();
    for w in path.langs().windows(2) {
        current = backend.translate(w[0].as_str(), w[1].as_str(), &current)?;
    }
    Ok(current)
}

/// Conditional word translation table `P(target | source)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "BTreeMap<String, Vec<(String, f64)>>", into = "BTreeMap<String, Vec<(String, f64)>>")]
pub struct Lexicon {
    /// Per source word: candidates sorted by target word.
    entries: BTreeMap<String, Vec<(String, f64)>>,
    best: HashMap<String, usize>,
}

impl From<BTreeMap<String, Vec<(String, f64)>>> for Lexicon {
    fn from(mut entries: BTreeMap<String, Vec<(String, f64)>>) -> Self {
        for cands in entries.values_mut() {
            cands.sort_by(|a, b| a.0.cmp(&b.0));
        }
        let best = entries
            .iter()
            .filter(|(_, c)| !c.is_empty())
            .map(|(s, cands)| {
                // strict > keeps the lexicographically smallest word on ties
                let mut arg = 0;
                for (i, (_, p)) in cands.iter().enumerate() {
                    if *p > cands[arg].1 {
                        arg = i;
                    }
                }
                (s.clone(), arg)
            })
            .collect();
        Lexicon { entries, best }
    }
}

impl From<Lexicon> for BTreeMap<String, Vec<(String, f64)>> {
    fn from(lex: Lexicon) -> Self {
        lex.entries
    }
}

impl Lexicon {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn candidates(&self, source: &str) -> Option<&[(String, f64)]> {
        self.entries.get(source).map(Vec::as_slice)
    }

    pub fn probability(&self, source: &str, target: &str) -> f64 {
        self.candidates(source)
            .and_then(|c| c.binary_search_by(|(t, _)| t.as_str().cmp(target)).ok().map(|i| c[i].1))
            .unwrap_or(0.0)
    }

    pub fn argmax(&self, source: &str) -> Option<&str> {
        let i = *self.best.get(source)?;
        Some(self.entries[source][i].0.as_str())
    }

    pub fn source_words(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Word-by-word argmax substitution with unknown-word copy-through.
    pub fn translate_sentence(&self, sentence: &str) -> String {
        sentence.split_whitespace().map(|tok| self.argmax(tok).unwrap_or(tok)).collect::<Vec<_>>().join(" ")
    }

    /// A deterministic one-hot lexicon.
    pub fn from_pairs<I, S, T>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: Into<String>,
    {
        let entries: BTreeMap<String, Vec<(String, f64)>> =
            pairs.into_iter().map(|(s, t)| (s.into(), vec![(t.into(), 1.0)])).collect();
        entries.into()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct WeightedPair<'a> {
    pub source: &'a str,
    pub target: &'a str,
    pub weight: f64,
}

/// IBM Model 1 trained by EM, without a NULL source word.
///
/// Starts from uniform `t(f|e)`, collects expected counts with per-target-word
/// normalization over the source sentence, then renormalizes per source
/// word. Counts are accumulated in input order so results are reproducible
/// bit for bit. Entries below `prune_below` are dropped from the returned
/// table, which is then renormalized.
pub fn ibm1_em(pairs: &[WeightedPair<'_>], iterations: usize, prune_below: f64) -> Result<Lexicon> {
    if iterations == 0 {
        return Err(Error::config("em_iterations", "must be at least 1"));
    }
    if pairs.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let mut src_ids: HashMap<&str, u32> = HashMap::new();
    let mut src_words: Vec<&str> = Vec::new();
    let mut tgt_ids: HashMap<&str, u32> = HashMap::new();
    let mut tgt_words: Vec<&str> = Vec::new();
    let mut cell_ids: HashMap<(u32, u32), u32> = HashMap::new();
    let mut cell_src: Vec<u32> = Vec::new();
    let mut cell_tgt: Vec<u32> = Vec::new();

    struct Sent {
        src: Vec<u32>,
        tgt_len: usize,
        // row-major [target position][source position] -> cell id
        cells: Vec<u32>,
        weight: f64,
    }

    let mut sents = Vec::with_capacity(pairs.len());
    for p in pairs {
        let src: Vec<u32> = p
            .source
            .split_whitespace()
            .map(|w| {
                *src_ids.entry(w).or_insert_with(|| {
                    src_words.push(w);
                    (src_words.len() - 1) as u32
                })
            })
            .collect();
        let tgt: Vec<u32> = p
            .target
            .split_whitespace()
            .map(|w| {
                *tgt_ids.entry(w).or_insert_with(|| {
                    tgt_words.push(w);
                    (tgt_words.len() - 1) as u32
                })
            })
            .collect();
        if src.is_empty() || tgt.is_empty() || p.weight <= 0.0 {
            continue;
        }
        let mut cells = Vec::with_capacity(src.len() * tgt.len());
        for &t in &tgt {
            for &s in &src {
                let id = *cell_ids.entry((s, t)).or_insert_with(|| {
                    cell_src.push(s);
                    cell_tgt.push(t);
                    (cell_src.len() - 1) as u32
                });
                cells.push(id);
            }
        }
        sents.push(Sent { src, tgt_len: tgt.len(), cells, weight: p.weight });
    }
    if sents.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }

    let mut prob = vec![1.0f64; cell_src.len()];
    let mut counts = vec![0.0f64; cell_src.len()];
    let mut totals = vec![0.0f64; src_words.len()];
    for _ in 0..iterations {
        counts.iter_mut().for_each(|c| *c = 0.0);
        totals.iter_mut().for_each(|c| *c = 0.0);
        for s in &sents {
            let n = s.src.len();
            for j in 0..s.tgt_len {
                let row = &s.cells[j * n..(j + 1) * n];
                let z: f64 = row.iter().map(|&c| prob[c as usize]).sum();
                for (i, &c) in row.iter().enumerate() {
                    let delta = s.weight * prob[c as usize] / z;
                    counts[c as usize] += delta;
                    totals[s.src[i] as usize] += delta;
                }
            }
        }
        for (c, p) in prob.iter_mut().enumerate() {
            *p = counts[c] / totals[cell_src[c] as usize];
        }
    }

    let mut grouped: BTreeMap<String, Vec<(String, f64)>> = BTreeMap::new();
    for (c, &p) in prob.iter().enumerate() {
        grouped
            .entry(src_words[cell_src[c] as usize].to_owned())
            .or_default()
            .push((tgt_words[cell_tgt[c] as usize].to_owned(), p));
    }
    for cands in grouped.values_mut() {
        cands.sort_by(|a, b| a.0.cmp(&b.0));
        let max = cands.iter().map(|c| c.1).fold(0.0, f64::max);
        // never prune the argmax away
        cands.retain(|c| c.1 >= prune_below || c.1 == max);
        let sum: f64 = cands.iter().map(|c| c.1).sum();
        for c in cands.iter_mut() {
            c.1 /= sum;
        }
    }
    Ok(grouped.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainerConfig {
    pub em_iterations: usize,
    /// Reweight every direction to the same effective mass.
    pub upsample: bool,
    pub real_weight: f64,
    pub pseudo_weight: f64,
    /// Translation probabilities below this are dropped after training.
    pub prune_below: f64,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig { em_iterations: 5, upsample: true, real_weight: 1.0, pseudo_weight: 1.0, prune_below: 1e-3 }
    }
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.em_iterations == 0 {
            return Err(Error::config("em_iterations", "must be at least 1"));
        }
        for (name, v) in [("real_weight", self.real_weight), ("pseudo_weight", self.pseudo_weight)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(name, "must be a positive number"));
            }
        }
        if !(0.0..1.0).contains(&self.prune_below) {
            return Err(Error::config("prune_below", "must lie in [0, 1)"));
        }
        Ok(())
    }

    fn provenance_weight(&self, p: &Provenance) -> f64 {
        if p.is_real() {
            self.real_weight
        } else {
            self.pseudo_weight
        }
    }

    fn raw_mass(&self, corpus: &ParallelCorpus) -> f64 {
        corpus.pairs.iter().map(|p| self.provenance_weight(&p.provenance)).sum()
    }
}

/// Per-direction lexicons; the desk-scale multilingual model.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MultilingualModel {
    directions: BTreeMap<Edge, Lexicon>,
    /// Effective training mass per direction, after upsampling.
    trained_on: BTreeMap<Edge, f64>,
}

impl TranslationBackend for MultilingualModel {
    fn has_direction(&self, src: &str, tgt: &str) -> bool {
        self.lexicon(src, tgt).is_some()
    }

    fn translate(&self, src: &str, tgt: &str, sentences: &[String]) -> Result<Vec<String>> {
        let lex = self.lexicon(src, tgt).ok_or_else(|| Error::UntrainedDirection {
            src: src.to_owned(),
            tgt: tgt.to_owned(),
            hop: None,
        })?;
        Ok(sentences.iter().map(|s| lex.translate_sentence(s)).collect())
    }
}

/// Trains one lexicon per direction with a non-empty corpus.
pub fn train_multilingual(
    corpora: &BTreeMap<Edge, ParallelCorpus>,
    config: &TrainerConfig,
) -> Result<MultilingualModel> {
    let mut model = MultilingualModel::default();
    let all: Vec<Edge> = corpora.keys().cloned().collect();
    model.retrain(corpora, &all, config)?;
    if model.directions.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    Ok(model)
}

impl MultilingualModel {
    pub fn lexicon(&self, src: &str, tgt: &str) -> Option<&Lexicon> {
        // BTreeMap lookup needs an owned key; codes are short.
        let edge = Edge::parse_pair(src, tgt).ok()?;
        self.directions.get(&edge)
    }

    pub fn directions(&self) -> impl Iterator<Item = (&Edge, &Lexicon)> {
        self.directions.iter()
    }

    pub fn trained_on(&self) -> &BTreeMap<Edge, f64> {
        &self.trained_on
    }

    pub fn insert(&mut self, edge: Edge, lexicon: Lexicon) {
        self.directions.insert(edge, lexicon);
    }

    /// Retrains `which` from scratch on their current corpora; other
    /// directions keep their lexicons.
    ///
    /// With upsampling on, each direction is scaled to the largest raw mass
    /// among all non-empty corpora, so the effective masses are equal.
    pub fn retrain(
        &mut self,
        corpora: &BTreeMap<Edge, ParallelCorpus>,
        which: &[Edge],
        config: &TrainerConfig,
    ) -> Result<()> {
        config.validate()?;
        let target_mass = corpora.values().map(|c| config.raw_mass(c)).fold(0.0, f64::max);
        let jobs: Vec<&ParallelCorpus> =
            which.iter().filter_map(|e| corpora.get(e)).filter(|c| !c.is_empty()).collect();
        let trained = jobs
            .par_iter()
            .map(|corpus| {
                let raw = config.raw_mass(corpus);
                let factor = if config.upsample { target_mass / raw } else { 1.0 };
                let pairs: Vec<WeightedPair<'_>> = corpus
                    .pairs
                    .iter()
                    .map(|p| WeightedPair {
                        source: &p.source,
                        target: &p.target,
                        weight: config.provenance_weight(&p.provenance) * factor,
                    })
                    .collect();
                let mass = pairs.iter().map(|p| p.weight).sum::<f64>();
                let lex = ibm1_em(&pairs, config.em_iterations, config.prune_below)?;
                Ok((corpus.edge(), lex, mass))
            })
            .collect::<Result<Vec<_>>>()?;
        for (edge, lex, mass) in trained {
            self.directions.insert(edge.clone(), lex);
            self.trained_on.insert(edge, mass);
        }
        Ok(())
    }

    /// A model whose lexicons are the world's ground-truth mappings.
    pub fn oracle<'a>(world: &ConceptWorld, edges: impl IntoIterator<Item = &'a Edge>) -> Result<Self> {
        let mut model = MultilingualModel::default();
        for edge in edges {
            let src = world.lexicon(edge.src.as_str())?;
            let tgt = world.lexicon(edge.tgt.as_str())?;
            let lex = Lexicon::from_pairs(src.iter().cloned().zip(tgt.iter().cloned()));
            model.trained_on.insert(edge.clone(), src.len() as f64);
            model.directions.insert(edge.clone(), lex);
        }
        Ok(model)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse("<model>", e))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e))
    }
}

/// Convenience for translating a single direction by codes.
pub fn translate<B: TranslationBackend + ?Sized>(
    backend: &B,
    src: &LangCode,
    tgt: &LangCode,
    sentences: &[String],
) -> Result<Vec<String>> {
    backend.translate(src.as_str(), tgt.as_str(), sentences)
}
