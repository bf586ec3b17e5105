//! Edge selection and pseudo-data generation.
//!
//! An edge's potential is how far its best multi-hop forward path beats the
//! direct translation. The loop greedily picks the edges with the largest
//! positive potential. For each it keeps the top-K forward paths and the
//! top-K backward paths that are at least as good as the direct direction
//! (minus a slack), then translates real and monolingual text along them to
//! build pseudo-parallel pairs.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Edge;
use crate::pathtable::{AccuracyTable, PathDirection, TranslationPath};
use crate::translator::{pipeline_translate, TranslationBackend};
use crate::world::{MonoCorpus, ParallelCorpus, Provenance, SentencePair};

pub const DEFAULT_BUDGET: usize = 2000;

/// How multi-hop path scores are folded into a potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    #[default]
    Max,
    /// Mean of the best `k` multi-hop path scores.
    MeanTopK(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialScore {
    pub edge: Edge,
    pub direct: f64,
    /// `None` when no multi-hop forward path was evaluated.
    pub best_path: Option<TranslationPath>,
    pub best_path_score: f64,
    /// `best_path_score - direct`, or `-inf` without multi-hop paths.
    pub potential: f64,
}

fn by_score_desc(a: &(TranslationPath, f64), b: &(TranslationPath, f64)) -> std::cmp::Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.hops().cmp(&b.0.hops())).then_with(|| a.0.cmp(&b.0))
}

pub fn potential(
    table: &AccuracyTable,
    edge: &Edge,
    max_hops: usize,
    aggregation: Aggregation,
) -> Result<PotentialScore> {
    let direct = table.direct(edge).ok_or_else(|| Error::MissingEntry(edge.to_string()))?;
    let mut paths = if max_hops >= 2 { table.paths_between(&edge.src, &edge.tgt, 2..=max_hops) } else { Vec::new() };
    paths.sort_by(by_score_desc);
    let Some((best, best_score)) = paths.first().cloned() else {
        return Ok(PotentialScore {
            edge: edge.clone(),
            direct,
            best_path: None,
            best_path_score: f64::NEG_INFINITY,
            potential: f64::NEG_INFINITY,
        });
    };
    let aggregate = match aggregation {
        Aggregation::Max => best_score,
        Aggregation::MeanTopK(k) => {
            let k = k.max(1).min(paths.len());
            paths[..k].iter().map(|p| p.1).sum::<f64>() / k as f64
        }
    };
    Ok(PotentialScore {
        edge: edge.clone(),
        direct,
        best_path: Some(best),
        best_path_score: best_score,
        potential: aggregate - direct,
    })
}

/// The `m` edges with the largest strictly positive potential.
///
/// Ties are broken by `(src, tgt)`.
pub fn select_edges(
    table: &AccuracyTable,
    m: usize,
    max_hops: usize,
    aggregation: Aggregation,
) -> Result<Vec<PotentialScore>> {
    let mut scored = Vec::new();
    for edge in table.edge_weights().keys() {
        let p = potential(table, edge, max_hops, aggregation)?;
        if p.potential > 0.0 {
            scored.push(p);
        }
    }
    scored.sort_by(|a, b| b.potential.total_cmp(&a.potential).then_with(|| a.edge.cmp(&b.edge)));
    scored.truncate(m);
    Ok(scored)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPath {
    pub path: TranslationPath,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistillationPlan {
    pub edge: Edge,
    pub forward_paths: Vec<ScoredPath>,
    pub backward_paths: Vec<ScoredPath>,
    /// Maximum number of pseudo pairs generated per path.
    pub budget: usize,
}

/// Which path families a run distills from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathFamilies {
    /// Forward and backward paths.
    Both,
    ForwardOnly,
    /// Only the 1-hop reverse edge: classical back-translation.
    BackTranslation,
}

impl DistillationPlan {
    pub fn restrict(mut self, families: PathFamilies) -> Self {
        match families {
            PathFamilies::Both => {}
            PathFamilies::ForwardOnly => self.backward_paths.clear(),
            PathFamilies::BackTranslation => {
                self.forward_paths.clear();
                self.backward_paths.retain(|p| p.path.hops() == 1);
            }
        }
        self
    }

    pub fn path_count(&self) -> usize {
        self.forward_paths.len() + self.backward_paths.len()
    }
}

/// Chooses forward and backward distillation paths for `edge`.
///
/// Forward candidates are multi-hop `src -> tgt` paths scoring at least
/// `W(edge) - delta`. Backward candidates are `tgt -> src` paths of any hop
/// count scoring at least `W(reverse) - delta` (or `W(edge) - delta` when the
/// reverse direction is not in the table). Each list keeps the best `k`.
/// A trained 1-hop reverse edge is always part of the backward list; when it
/// would fall outside the top `k` it takes the last slot.
pub fn select_paths(
    table: &AccuracyTable,
    edge: &Edge,
    k: usize,
    delta: f64,
    max_hops: usize,
    budget: usize,
) -> Result<DistillationPlan> {
    if k == 0 {
        return Err(Error::config("top_k", "must be at least 1"));
    }
    if delta.is_nan() || delta < 0.0 {
        return Err(Error::config("delta", "must be non-negative"));
    }
    let direct = table.direct(edge).ok_or_else(|| Error::MissingEntry(edge.to_string()))?;
    let reverse = edge.reversed();
    let reverse_score = table.direct(&reverse);

    let mut forward: Vec<(TranslationPath, f64)> =
        if max_hops >= 2 { table.paths_between(&edge.src, &edge.tgt, 2..=max_hops) } else { Vec::new() };
    forward.retain(|(_, s)| *s >= direct - delta);
    forward.sort_by(by_score_desc);
    forward.truncate(k);

    let backward_ref = reverse_score.unwrap_or(direct);
    let mut backward = table.paths_between(&edge.tgt, &edge.src, 1..=max_hops.max(1));
    backward.retain(|(_, s)| *s >= backward_ref - delta);
    backward.sort_by(by_score_desc);
    if let Some(rs) = reverse_score {
        let one_hop = |p: &(TranslationPath, f64)| p.0.hops() == 1;
        if !backward[..backward.len().min(k)].iter().any(one_hop) {
            backward.truncate(k - 1);
            backward.push((TranslationPath::single_hop(&reverse, PathDirection::Backward), rs));
            backward.sort_by(by_score_desc);
        }
    }
    backward.truncate(k);

    let wrap = |v: Vec<(TranslationPath, f64)>, d: PathDirection| {
        v.into_iter().map(|(p, s)| ScoredPath { path: p.with_direction(d), score: s }).collect()
    };
    Ok(DistillationPlan {
        edge: edge.clone(),
        forward_paths: wrap(forward, PathDirection::Forward),
        backward_paths: wrap(backward, PathDirection::Backward),
        budget,
    })
}

/// Monolingual sentences first, then the real source side of `corpus`.
pub fn source_pool(corpus: Option<&ParallelCorpus>, mono: Option<&MonoCorpus>) -> Vec<String> {
    let mut pool: Vec<String> = mono.map(|m| m.sentences.clone()).unwrap_or_default();
    if let Some(c) = corpus {
        pool.extend(c.real_pairs().map(|p| p.source.clone()));
    }
    pool
}

/// Monolingual sentences first, then the real target side of `corpus`.
pub fn target_pool(corpus: Option<&ParallelCorpus>, mono: Option<&MonoCorpus>) -> Vec<String> {
    let mut pool: Vec<String> = mono.map(|m| m.sentences.clone()).unwrap_or_default();
    if let Some(c) = corpus {
        pool.extend(c.real_pairs().map(|p| p.target.clone()));
    }
    pool
}

/// Sequence-level forward distillation: `(source, translated source)` pairs.
pub fn forward_distill<B: TranslationBackend + ?Sized>(
    plan: &DistillationPlan,
    model: &B,
    sources: &[String],
) -> Result<ParallelCorpus> {
    let mut out = ParallelCorpus::for_edge(&plan.edge);
    let mut seen = HashSet::new();
    let take = &sources[..sources.len().min(plan.budget)];
    for sp in &plan.forward_paths {
        let hyps = pipeline_translate(model, &sp.path, take)?;
        let tag = sp.path.to_string();
        for (src, hyp) in take.iter().zip(hyps) {
            if seen.insert((src.clone(), hyp.clone())) {
                out.pairs.push(SentencePair {
                    source: src.clone(),
                    target: hyp,
                    provenance: Provenance::PseudoForward(tag.clone()),
                });
            }
        }
    }
    Ok(out)
}

/// Backward distillation: `(translated target, target)` pairs. With only the
/// 1-hop reverse path this is back-translation.
pub fn backward_distill<B: TranslationBackend + ?Sized>(
    plan: &DistillationPlan,
    model: &B,
    targets: &[String],
) -> Result<ParallelCorpus> {
    let mut out = ParallelCorpus::for_edge(&plan.edge);
    let mut seen = HashSet::new();
    let take = &targets[..targets.len().min(plan.budget)];
    for sp in &plan.backward_paths {
        let hyps = pipeline_translate(model, &sp.path, take)?;
        let tag = sp.path.to_string();
        for (tgt, hyp) in take.iter().zip(hyps) {
            if seen.insert((hyp.clone(), tgt.clone())) {
                out.pairs.push(SentencePair {
                    source: hyp,
                    target: tgt.clone(),
                    provenance: Provenance::PseudoBackward(tag.clone()),
                });
            }
        }
    }
    Ok(out)
}

/// Appends pseudo corpora to `base`, skipping pseudo pairs whose text
/// already occurs in `base`.
pub fn assemble_training_set(base: &ParallelCorpus, pseudo: &[ParallelCorpus]) -> Result<ParallelCorpus> {
    for p in pseudo {
        if p.src != base.src || p.tgt != base.tgt {
            return Err(Error::Alignment(format!("pseudo corpus {} does not match {}", p.edge(), base.edge())));
        }
    }
    let existing: HashSet<(&str, &str)> = base.pairs.iter().map(|p| (p.source.as_str(), p.target.as_str())).collect();
    let mut out = base.clone();
    for p in pseudo {
        out.pairs
            .extend(p.pairs.iter().filter(|q| !existing.contains(&(q.source.as_str(), q.target.as_str()))).cloned());
    }
    Ok(out)
}
