//! Multi-hop paths and the per-hop accuracy tables.
//!
//! Every simple path of up to `H` hops between two languages is run through
//! the model over a shared multi-parallel dev set. Its BLEU against the dev
//! references is the path's accuracy. The `h = 1` entries are the edge
//! weights `W(e)`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, EdgeWeightMap, LangCode, LanguageGraph};
use crate::metrics::bleu;
use crate::translator::{pipeline_translate, TranslationBackend};
use crate::world::MultiParallelSet;

/// Hard cap on hop counts; the table grows as O(n^(H+1)).
pub const MAX_SUPPORTED_HOPS: usize = 3;

/// Orientation of a path relative to the edge being improved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathDirection {
    /// `src -> ... -> tgt`
    Forward,
    /// `tgt -> ... -> src`
    Backward,
}

/// A simple chain of translation hops.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TranslationPath {
    langs: Vec<LangCode>,
    direction: PathDirection,
}

impl TranslationPath {
    pub fn new(langs: Vec<LangCode>, direction: PathDirection) -> Result<Self> {
        if langs.len() < 2 {
            return Err(Error::config("path", "needs at least two languages"));
        }
        for (i, l) in langs.iter().enumerate() {
            if langs[..i].contains(l) {
                return Err(Error::config("path", format!("language {l} repeats")));
            }
        }
        Ok(TranslationPath { langs, direction })
    }

    /// Parses `"aa->bb->cc"` as a forward path.
    pub fn parse(s: &str) -> Result<Self> {
        let langs = s.split("->").map(|c| LangCode::new(c.trim())).collect::<Result<Vec<_>>>()?;
        Self::new(langs, PathDirection::Forward)
    }

    pub fn langs(&self) -> &[LangCode] {
        &self.langs
    }

    pub fn hops(&self) -> usize {
        self.langs.len() - 1
    }

    pub fn direction(&self) -> PathDirection {
        self.direction
    }

    pub fn with_direction(mut self, direction: PathDirection) -> Self {
        self.direction = direction;
        self
    }

    pub fn source(&self) -> &LangCode {
        &self.langs[0]
    }

    pub fn target(&self) -> &LangCode {
        &self.langs[self.langs.len() - 1]
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.langs.windows(2).map(|w| Edge::new(w[0].clone(), w[1].clone()))
    }

    pub fn single_hop(edge: &Edge, direction: PathDirection) -> Self {
        TranslationPath { langs: vec![edge.src.clone(), edge.tgt.clone()], direction }
    }
}

impl fmt::Display for TranslationPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.langs.iter().enumerate() {
            if i > 0 {
                f.write_str("->")?;
            }
            f.write_str(l.as_str())?;
        }
        Ok(())
    }
}

impl Serialize for TranslationPath {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TranslationPath {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        TranslationPath::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// All simple directed paths `src -> ... -> tgt` with 1..=`max_hops` hops,
/// ordered by hop count, then by language sequence.
pub fn enumerate_paths(graph: &LanguageGraph, src: &str, tgt: &str, max_hops: usize) -> Result<Vec<TranslationPath>> {
    if max_hops < 1 {
        return Err(Error::config("max_hops", "must be at least 1"));
    }
    for code in [src, tgt] {
        if !graph.contains(code) {
            return Err(Error::UnknownLanguage(code.to_owned()));
        }
    }
    if src == tgt {
        return Err(Error::SelfLoop(src.to_owned()));
    }
    let start = LangCode::new(src)?;
    let goal = LangCode::new(tgt)?;
    let mut out = Vec::new();
    let mut stack = vec![start];
    extend_paths(graph, &goal, max_hops, &mut stack, &mut out);
    out.sort_by(|a, b| a.hops().cmp(&b.hops()).then_with(|| a.langs.cmp(&b.langs)));
    Ok(out)
}

fn extend_paths(
    graph: &LanguageGraph,
    goal: &LangCode,
    max_hops: usize,
    stack: &mut Vec<LangCode>,
    out: &mut Vec<TranslationPath>,
) {
    let last = stack.last().expect("non-empty").clone();
    for next in graph.successors(&last) {
        if stack.contains(next) {
            continue;
        }
        if next == goal {
            let mut langs = stack.clone();
            langs.push(next.clone());
            out.push(TranslationPath { langs, direction: PathDirection::Forward });
        } else if stack.len() < max_hops {
            stack.push(next.clone());
            extend_paths(graph, goal, max_hops, stack, out);
            stack.pop();
        }
    }
}

/// BLEU of pipelining the dev set's source side along `path`.
pub fn evaluate_path<B: TranslationBackend + ?Sized>(
    path: &TranslationPath,
    model: &B,
    devset: &MultiParallelSet,
) -> Result<f64> {
    let sources = devset.lines(path.source().as_str())?;
    let references = devset.lines(path.target().as_str())?;
    let hyps = pipeline_translate(model, path, sources)?;
    Ok(bleu(&hyps, references)?.score)
}

/// Measured accuracies `W_T^h`, stored sparsely by path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyTable {
    pub iteration: usize,
    pub max_hops: usize,
    entries: BTreeMap<Vec<LangCode>, f64>,
}

/// One exported row of an [`AccuracyTable`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub path: TranslationPath,
    pub hops: usize,
    pub score: f64,
    pub iteration: usize,
}

impl AccuracyTable {
    pub fn new(iteration: usize, max_hops: usize) -> Self {
        AccuracyTable { iteration, max_hops, entries: BTreeMap::new() }
    }

    pub fn insert(&mut self, path: &TranslationPath, score: f64) {
        self.entries.insert(path.langs.clone(), score);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, path: &TranslationPath) -> Option<f64> {
        self.entries.get(&path.langs).copied()
    }

    /// `W(e)`: the 1-hop entry for `edge`.
    pub fn direct(&self, edge: &Edge) -> Option<f64> {
        self.entries.get([edge.src.clone(), edge.tgt.clone()].as_slice()).copied()
    }

    /// Entries with exactly `h` hops; the sparse `W^h`.
    pub fn hop_entries(&self, h: usize) -> impl Iterator<Item = (TranslationPath, f64)> + '_ {
        self.iter().filter(move |(p, _)| p.hops() == h)
    }

    pub fn iter(&self) -> impl Iterator<Item = (TranslationPath, f64)> + '_ {
        self.entries
            .iter()
            .map(|(langs, s)| (TranslationPath { langs: langs.clone(), direction: PathDirection::Forward }, *s))
    }

    /// Evaluated paths from `src` to `tgt` with hop counts in `hops`.
    pub fn paths_between(
        &self,
        src: &LangCode,
        tgt: &LangCode,
        hops: std::ops::RangeInclusive<usize>,
    ) -> Vec<(TranslationPath, f64)> {
        self.entries
            .range(vec![src.clone()]..)
            .take_while(|(langs, _)| &langs[0] == src)
            .filter(|(langs, _)| langs.last() == Some(tgt) && hops.contains(&(langs.len() - 1)))
            .map(|(langs, s)| (TranslationPath { langs: langs.clone(), direction: PathDirection::Forward }, *s))
            .collect()
    }

    /// The 1-hop slice as an edge weight map.
    pub fn edge_weights(&self) -> EdgeWeightMap {
        self.hop_entries(1).map(|(p, s)| (Edge::new(p.langs[0].clone(), p.langs[1].clone()), s)).collect()
    }

    pub fn rows(&self) -> Vec<TableRow> {
        let mut rows: Vec<TableRow> = self
            .iter()
            .map(|(path, score)| TableRow { hops: path.hops(), path, score, iteration: self.iteration })
            .collect();
        rows.sort_by(|a, b| a.hops.cmp(&b.hops).then_with(|| a.path.cmp(&b.path)));
        rows
    }

    /// Tab-separated export: `path  hops  score  iteration`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("path\thops\tscore\titeration\n");
        for r in self.rows() {
            out.push_str(&format!("{}\t{}\t{}\t{}\n", r.path, r.hops, r.score, r.iteration));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.rows()).expect("rows serialize")
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let tsv = dir.join(format!("table_{}.tsv", self.iteration));
        std::fs::write(&tsv, self.to_tsv()).map_err(|e| Error::io(&tsv, e))?;
        let json = dir.join(format!("table_{}.json", self.iteration));
        std::fs::write(&json, self.to_json()).map_err(|e| Error::io(&json, e))
    }
}

/// Builds `W_T^h` for every `h` in `1..=max_hops`.
///
/// Paths that cross an untrained direction are left out of the table rather
/// than scored zero. Evaluation runs in parallel; the result is keyed by
/// path so it does not depend on scheduling.
pub fn build_accuracy_table<B: TranslationBackend + ?Sized>(
    graph: &LanguageGraph,
    model: &B,
    devset: &MultiParallelSet,
    max_hops: usize,
    iteration: usize,
) -> Result<AccuracyTable> {
    if max_hops < 1 {
        return Err(Error::config("max_hops", "must be at least 1"));
    }
    let langs: Vec<&LangCode> = graph.languages().collect();
    let mut paths = Vec::new();
    for s in &langs {
        for t in &langs {
            if s != t {
                paths.extend(enumerate_paths(graph, s.as_str(), t.as_str(), max_hops)?);
            }
        }
    }
    let scored = paths
        .par_iter()
        .filter(|p| p.langs.windows(2).all(|w| model.has_direction(w[0].as_str(), w[1].as_str())))
        .map(|p| evaluate_path(p, model, devset).map(|s| (p.langs.clone(), s)))
        .collect::<Result<Vec<_>>>()?;
    let mut table = AccuracyTable::new(iteration, max_hops);
    table.entries.extend(scored);
    Ok(table)
}
