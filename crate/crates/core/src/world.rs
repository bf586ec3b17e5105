//! Synthetic multilingual world with known ground truth.
//!
//! A shared vocabulary of concept ids is rendered into every language by a
//! seeded bijective lexicon, so the reference translation between any two
//! languages is `lexicon_tgt ∘ lexicon_src⁻¹`. Corpora, monolingual text and
//! multi-parallel dev/test sets are sampled from named random streams, which
//! makes every artifact a pure function of `(config, seed)`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, LangCode, LanguageGraph};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldConfig {
    pub concept_count: usize,
    /// Zipf skew of concept frequencies; 0 is uniform.
    pub zipf_exponent: f64,
    /// Inclusive sentence length range, in concepts.
    pub sentence_len: (usize, usize),
    /// When non-zero, every language reverses word order inside blocks of
    /// this many words. Off by default.
    pub reorder_block: usize,
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig { concept_count: 300, zipf_exponent: 1.0, sentence_len: (4, 10), reorder_block: 0 }
    }
}

impl WorldConfig {
    pub fn validate(&self) -> Result<()> {
        if self.concept_count == 0 {
            return Err(Error::config("concept_count", "must be at least 1"));
        }
        if !(self.zipf_exponent.is_finite() && self.zipf_exponent >= 0.0) {
            return Err(Error::config("zipf_exponent", "must be a finite non-negative number"));
        }
        let (lo, hi) = self.sentence_len;
        if lo == 0 || lo > hi {
            return Err(Error::config("sentence_len", format!("invalid range ({lo}, {hi})")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConceptWorld {
    config: WorldConfig,
    seed: u64,
    /// concept id -> surface word, per language.
    lexicons: BTreeMap<LangCode, Vec<String>>,
    inverse: BTreeMap<LangCode, HashMap<String, usize>>,
}

/// Persisted world description; the lexicons are regenerated from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldManifest {
    pub seed: u64,
    pub languages: Vec<LangCode>,
    pub config: WorldConfig,
}

pub fn generate_world(config: &WorldConfig, languages: &[LangCode], seed: u64) -> Result<ConceptWorld> {
    config.validate()?;
    let mut lexicons = BTreeMap::new();
    let mut inverse = BTreeMap::new();
    for lang in languages {
        let mut rng = seed::stream(seed, &format!("lexicon:{lang}"));
        let mut perm: Vec<usize> = (0..config.concept_count).collect();
        perm.shuffle(&mut rng);
        let words: Vec<String> = perm.iter().map(|p| format!("{lang}{p}")).collect();
        let inv = words.iter().enumerate().map(|(c, w)| (w.clone(), c)).collect();
        lexicons.insert(lang.clone(), words);
        inverse.insert(lang.clone(), inv);
    }
    Ok(ConceptWorld { config: config.clone(), seed, lexicons, inverse })
}

impl ConceptWorld {
    pub fn from_manifest(m: &WorldManifest) -> Result<Self> {
        generate_world(&m.config, &m.languages, m.seed)
    }

    pub fn manifest(&self) -> WorldManifest {
        WorldManifest {
            seed: self.seed,
            languages: self.lexicons.keys().cloned().collect(),
            config: self.config.clone(),
        }
    }

    pub fn config(&self) -> &WorldConfig {
        &self.config
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn languages(&self) -> impl Iterator<Item = &LangCode> {
        self.lexicons.keys()
    }

    /// Surface word of `concept` in `lang`.
    pub fn word(&self, lang: &str, concept: usize) -> Result<&str> {
        let lex = self.lexicon(lang)?;
        lex.get(concept)
            .map(String::as_str)
            .ok_or(Error::UnknownConcept { id: concept, count: self.config.concept_count })
    }

    pub fn lexicon(&self, lang: &str) -> Result<&[String]> {
        self.lexicons.get(lang).map(Vec::as_slice).ok_or_else(|| Error::UnknownLanguage(lang.to_owned()))
    }

    pub fn render(&self, concepts: &[usize], lang: &str) -> Result<String> {
        let mut words = concepts.iter().map(|&c| self.word(lang, c)).collect::<Result<Vec<_>>>()?;
        self.reorder(&mut words);
        Ok(words.join(" "))
    }

    /// Maps a rendered sentence back to its concept sequence.
    pub fn invert(&self, sentence: &str, lang: &str) -> Result<Vec<usize>> {
        let inv = self.inverse.get(lang).ok_or_else(|| Error::UnknownLanguage(lang.to_owned()))?;
        let mut concepts = sentence
            .split_whitespace()
            .map(|w| {
                inv.get(w).copied().ok_or_else(|| Error::Alignment(format!("word `{w}` is not in the {lang} lexicon")))
            })
            .collect::<Result<Vec<_>>>()?;
        // block reversal is an involution
        self.reorder(&mut concepts);
        Ok(concepts)
    }

    /// Reference translation of a rendered sentence.
    pub fn translate(&self, sentence: &str, src: &str, tgt: &str) -> Result<String> {
        self.render(&self.invert(sentence, src)?, tgt)
    }

    fn reorder<T>(&self, items: &mut [T]) {
        if self.config.reorder_block > 1 {
            for block in items.chunks_mut(self.config.reorder_block) {
                block.reverse();
            }
        }
    }

    fn sampler(&self) -> ConceptSampler {
        ConceptSampler::new(&self.config)
    }
}

/// Draws concept-id sentences under the configured Zipf law.
#[derive(Debug, Clone)]
pub struct ConceptSampler {
    dist: WeightedIndex<f64>,
    len: (usize, usize),
}

impl ConceptSampler {
    pub fn new(config: &WorldConfig) -> Self {
        let weights = (0..config.concept_count).map(|r| ((r + 1) as f64).powf(-config.zipf_exponent));
        ConceptSampler { dist: WeightedIndex::new(weights).expect("positive weights"), len: config.sentence_len }
    }

    pub fn concept<R: Rng>(&self, rng: &mut R) -> usize {
        self.dist.sample(rng)
    }

    pub fn sentence<R: Rng>(&self, rng: &mut R) -> Vec<usize> {
        let n = rng.gen_range(self.len.0..=self.len.1);
        (0..n).map(|_| self.concept(rng)).collect()
    }
}

/// Where a training pair came from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Provenance {
    Real,
    /// Produced by translating a real source along the named forward path.
    PseudoForward(String),
    /// Produced by translating a real target along the named backward path.
    PseudoBackward(String),
}

impl Provenance {
    pub fn is_real(&self) -> bool {
        matches!(self, Provenance::Real)
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Real => f.write_str("real"),
            Provenance::PseudoForward(p) => write!(f, "pseudo-forward:{p}"),
            Provenance::PseudoBackward(p) => write!(f, "pseudo-backward:{p}"),
        }
    }
}

impl std::str::FromStr for Provenance {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "real" {
            Ok(Provenance::Real)
        } else if let Some(p) = s.strip_prefix("pseudo-forward:") {
            Ok(Provenance::PseudoForward(p.to_owned()))
        } else if let Some(p) = s.strip_prefix("pseudo-backward:") {
            Ok(Provenance::PseudoBackward(p.to_owned()))
        } else {
            Err(Error::Alignment(format!("unknown provenance tag `{s}`")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SentencePair {
    pub source: String,
    pub target: String,
    pub provenance: Provenance,
}

impl SentencePair {
    pub fn real(source: impl Into<String>, target: impl Into<String>) -> Self {
        SentencePair { source: source.into(), target: target.into(), provenance: Provenance::Real }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParallelCorpus {
    pub src: LangCode,
    pub tgt: LangCode,
    pub pairs: Vec<SentencePair>,
}

impl ParallelCorpus {
    pub fn new(src: LangCode, tgt: LangCode) -> Self {
        ParallelCorpus { src, tgt, pairs: Vec::new() }
    }

    pub fn for_edge(edge: &Edge) -> Self {
        Self::new(edge.src.clone(), edge.tgt.clone())
    }

    pub fn edge(&self) -> Edge {
        Edge::new(self.src.clone(), self.tgt.clone())
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn real_pairs(&self) -> impl Iterator<Item = &SentencePair> {
        self.pairs.iter().filter(|p| p.provenance.is_real())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonoCorpus {
    pub lang: LangCode,
    pub sentences: Vec<String>,
}

/// Line-aligned renderings of the same concept sentences in several languages.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MultiParallelSet {
    /// Concept sequences behind each line; empty when loaded from text.
    pub concepts: Vec<Vec<usize>>,
    pub renderings: BTreeMap<LangCode, Vec<String>>,
}

impl MultiParallelSet {
    pub fn len(&self) -> usize {
        self.renderings.values().next().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn lines(&self, lang: &str) -> Result<&[String]> {
        self.renderings
            .get(lang)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Alignment(format!("multi-parallel set has no `{lang}` side")))
    }

    pub fn languages(&self) -> impl Iterator<Item = &LangCode> {
        self.renderings.keys()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        for (lang, lines) in &self.renderings {
            if lines.len() != n {
                return Err(Error::Alignment(format!("`{lang}` side has {} lines, expected {n}", lines.len())));
            }
        }
        Ok(())
    }
}

/// Everything [`generate_corpora`] produces.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedData {
    pub corpora: BTreeMap<Edge, ParallelCorpus>,
    pub mono: BTreeMap<LangCode, MonoCorpus>,
    pub dev: MultiParallelSet,
    pub test: MultiParallelSet,
}

fn sample_multi_parallel(
    world: &ConceptWorld,
    langs: &[LangCode],
    size: usize,
    rng: &mut ChaCha8Rng,
) -> Result<MultiParallelSet> {
    let sampler = world.sampler();
    let concepts: Vec<Vec<usize>> = (0..size).map(|_| sampler.sentence(rng)).collect();
    let mut renderings = BTreeMap::new();
    for lang in langs {
        let lines = concepts.iter().map(|c| world.render(c, lang.as_str())).collect::<Result<Vec<_>>>()?;
        renderings.insert(lang.clone(), lines);
    }
    Ok(MultiParallelSet { concepts, renderings })
}

/// Samples training corpora sized by the graph's counts plus dev/test sets.
///
/// Each edge, node, and the dev and test sets draw from their own stream
/// derived from `seed`, so adding an edge never perturbs the others.
pub fn generate_corpora(
    world: &ConceptWorld,
    graph: &LanguageGraph,
    dev_size: usize,
    test_size: usize,
    seed: u64,
) -> Result<GeneratedData> {
    graph.validate()?;
    if dev_size == 0 {
        return Err(Error::config("dev_size", "must be at least 1"));
    }
    if test_size == 0 {
        return Err(Error::config("test_size", "must be at least 1"));
    }
    for lang in graph.languages() {
        if world.lexicon(lang.as_str()).is_err() {
            return Err(Error::InvalidGraph(format!("language {lang} is not part of the world")));
        }
    }
    let sampler = world.sampler();
    let edges: Vec<(Edge, u64)> = graph.edges().map(|(e, c)| (e.clone(), c)).collect();
    let corpora = edges
        .par_iter()
        .map(|(edge, count)| {
            let mut rng = seed::stream(seed, &format!("edge:{edge}"));
            let mut corpus = ParallelCorpus::for_edge(edge);
            for _ in 0..*count {
                let c = sampler.sentence(&mut rng);
                corpus.pairs.push(SentencePair::real(
                    world.render(&c, edge.src.as_str())?,
                    world.render(&c, edge.tgt.as_str())?,
                ));
            }
            Ok((edge.clone(), corpus))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;

    let langs: Vec<LangCode> = graph.languages().cloned().collect();
    let mono = langs
        .par_iter()
        .map(|lang| {
            let mut rng = seed::stream(seed, &format!("mono:{lang}"));
            let n = graph.mono_count(lang.as_str())?;
            let sentences =
                (0..n).map(|_| world.render(&sampler.sentence(&mut rng), lang.as_str())).collect::<Result<Vec<_>>>()?;
            Ok((lang.clone(), MonoCorpus { lang: lang.clone(), sentences }))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;

    let dev = sample_multi_parallel(world, &langs, dev_size, &mut seed::stream(seed, "dev"))?;
    let test = sample_multi_parallel(world, &langs, test_size, &mut seed::stream(seed, "test"))?;
    Ok(GeneratedData { corpora, mono, dev, test })
}
