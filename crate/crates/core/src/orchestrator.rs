//! The distillation loop.
//!
//! Train `θ_0` on all real bilingual data, then repeat: measure `W_T^h`,
//! pick the high-potential edges `E_T`, distill pseudo pairs for them along
//! their chosen paths, retrain those directions, and compute the average
//! dev-set gain `σ` over `E_T`. Stop when `σ ≤ τ`, when nothing has positive
//! potential, or at the iteration cap.
//!
//! Baseline modes (back-translation only, forward only) replay the
//! selection schedule of the full run so every mode improves the same edges
//! at the same step.

use std::collections::BTreeMap;
use std::fmt;
use std::time::{Duration, Instant};

use log::{debug, info};
use serde::{Deserialize, Serialize};

use crate::distillation::{
    assemble_training_set, backward_distill, forward_distill, select_edges, select_paths, source_pool, target_pool,
    Aggregation, PathFamilies, PotentialScore, ScoredPath, DEFAULT_BUDGET,
};
use crate::error::{Error, Result};
use crate::graph::{Edge, EdgeWeightMap, LangCode, LanguageGraph};
use crate::metrics::average_improvement;
use crate::pathtable::{build_accuracy_table, evaluate_path, AccuracyTable, PathDirection, TranslationPath};
use crate::translator::{train_multilingual, MultilingualModel, TrainerConfig};
use crate::world::{MonoCorpus, MultiParallelSet, ParallelCorpus};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Convergence threshold on σ, in BLEU points.
    pub tau: f64,
    pub max_hops: usize,
    pub edges_per_iter: usize,
    pub top_k: usize,
    /// Slack for the "comparable or better" path filter.
    pub delta: f64,
    pub max_iterations: usize,
    pub seed: u64,
    /// Pseudo pairs per path.
    pub budget: usize,
    pub aggregation: Aggregation,
    pub trainer: TrainerConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tau: 0.1,
            max_hops: 2,
            edges_per_iter: 3,
            top_k: 2,
            delta: 0.0,
            max_iterations: 10,
            seed: 0,
            budget: DEFAULT_BUDGET,
            aggregation: Aggregation::Max,
            trainer: TrainerConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tau.is_nan() || self.tau < 0.0 {
            return Err(Error::config("tau", "must be non-negative"));
        }
        if !(1..=crate::pathtable::MAX_SUPPORTED_HOPS).contains(&self.max_hops) {
            return Err(Error::config(
                "max_hops",
                format!("must be between 1 and {}", crate::pathtable::MAX_SUPPORTED_HOPS),
            ));
        }
        for (name, v) in [
            ("edges_per_iter", self.edges_per_iter),
            ("top_k", self.top_k),
            ("max_iterations", self.max_iterations),
            ("budget", self.budget),
        ] {
            if v == 0 {
                return Err(Error::config(name, "must be at least 1"));
            }
        }
        if self.delta.is_nan() || self.delta < 0.0 {
            return Err(Error::config("delta", "must be non-negative"));
        }
        if let Aggregation::MeanTopK(0) = self.aggregation {
            return Err(Error::config("aggregation", "mean_top_k needs k >= 1"));
        }
        self.trainer.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    /// `θ_0` only.
    Initial,
    /// One-hop back-translation on the selected edges.
    Bt,
    /// Forward distillation only.
    Forward,
    /// Forward and backward distillation.
    Graph,
}

impl RunMode {
    pub const ALL: [RunMode; 4] = [RunMode::Initial, RunMode::Bt, RunMode::Forward, RunMode::Graph];

    pub fn families(self) -> Option<PathFamilies> {
        match self {
            RunMode::Initial => None,
            RunMode::Bt => Some(PathFamilies::BackTranslation),
            RunMode::Forward => Some(PathFamilies::ForwardOnly),
            RunMode::Graph => Some(PathFamilies::Both),
        }
    }

    pub fn column(self) -> &'static str {
        match self {
            RunMode::Initial => "Initial",
            RunMode::Bt => "+BT",
            RunMode::Forward => "+Forward",
            RunMode::Graph => "+Graph",
        }
    }
}

impl fmt::Display for RunMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunMode::Initial => "initial",
            RunMode::Bt => "bt",
            RunMode::Forward => "forward",
            RunMode::Graph => "graph",
        })
    }
}

impl std::str::FromStr for RunMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "initial" => Ok(RunMode::Initial),
            "bt" => Ok(RunMode::Bt),
            "forward" => Ok(RunMode::Forward),
            "graph" => Ok(RunMode::Graph),
            other => Err(Error::config("mode", format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedEdge {
    pub edge: Edge,
    pub potential: f64,
    pub best_path: Option<TranslationPath>,
    pub forward_paths: Vec<ScoredPath>,
    pub backward_paths: Vec<ScoredPath>,
    pub pseudo_pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub iteration: usize,
    pub selected: Vec<SelectedEdge>,
    /// Dev BLEU of the selected edges before and after retraining.
    pub before: EdgeWeightMap,
    pub after: EdgeWeightMap,
    pub sigma: f64,
    /// 1-hop weights of the table this iteration selected from.
    pub table_snapshot: EdgeWeightMap,
    /// Test BLEU of the selected edges after retraining, when a test set was given.
    pub test_after: EdgeWeightMap,
    #[serde(skip)]
    pub wall_time: Duration,
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    NoPositivePotential,
    MaxIterations,
    ScheduleExhausted,
    NotRun,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub mode: RunMode,
    pub initial_model: MultilingualModel,
    pub model: MultilingualModel,
    pub corpora: BTreeMap<Edge, ParallelCorpus>,
    pub reports: Vec<IterationReport>,
    pub tables: Vec<AccuracyTable>,
    pub stop: StopReason,
    /// Dev BLEU of every trained edge under `θ_0`.
    pub initial_weights: EdgeWeightMap,
    /// Test BLEU of every trained edge under `θ_0` and the final model.
    pub initial_test: EdgeWeightMap,
    pub final_test: EdgeWeightMap,
}

impl RunOutcome {
    /// Edge sets chosen at each iteration, in order.
    pub fn schedule(&self) -> Vec<Vec<Edge>> {
        self.reports
            .iter()
            .filter(|r| !r.selected.is_empty())
            .map(|r| r.selected.iter().map(|s| s.edge.clone()).collect())
            .collect()
    }
}

/// A run that failed mid-way; completed iterations are kept.
#[derive(Debug)]
pub struct AbortedRun {
    pub error: Error,
    pub reports: Vec<IterationReport>,
}

impl fmt::Display for AbortedRun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "run aborted after {} iteration(s): {}", self.reports.len(), self.error)
    }
}

impl std::error::Error for AbortedRun {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl From<Error> for AbortedRun {
    fn from(error: Error) -> Self {
        AbortedRun { error, reports: Vec::new() }
    }
}

/// Mutable state carried between iterations.
pub struct RunState<'a> {
    pub graph: &'a LanguageGraph,
    pub mono: &'a BTreeMap<LangCode, MonoCorpus>,
    pub devset: &'a MultiParallelSet,
    pub testset: Option<&'a MultiParallelSet>,
    pub config: &'a RunConfig,
    pub families: PathFamilies,
    pub model: MultilingualModel,
    pub corpora: BTreeMap<Edge, ParallelCorpus>,
    pub iteration: usize,
    pub tables: Vec<AccuracyTable>,
}

fn one_hop_scores(edges: &[Edge], model: &MultilingualModel, set: &MultiParallelSet) -> Result<EdgeWeightMap> {
    edges
        .iter()
        .map(|e| {
            let p = TranslationPath::single_hop(e, PathDirection::Forward);
            Ok((e.clone(), evaluate_path(&p, model, set)?))
        })
        .collect()
}

fn trained_edges(graph: &LanguageGraph, model: &MultilingualModel) -> Vec<Edge> {
    graph
        .edges()
        .filter(|(e, _)| model.lexicon(e.src.as_str(), e.tgt.as_str()).is_some())
        .map(|(e, _)| e.clone())
        .collect()
}

impl RunState<'_> {
    /// One loop body. `forced` replaces greedy selection with a fixed edge set.
    pub fn iteration_step(&mut self, forced: Option<&[Edge]>) -> Result<IterationReport> {
        let started = Instant::now();
        let cfg = self.config;
        self.iteration += 1;
        let t = self.iteration;
        let table = build_accuracy_table(self.graph, &self.model, self.devset, cfg.max_hops, t)?;
        let chosen: Vec<PotentialScore> = match forced {
            None => select_edges(&table, cfg.edges_per_iter, cfg.max_hops, cfg.aggregation)?,
            Some(edges) => edges
                .iter()
                .map(|e| crate::distillation::potential(&table, e, cfg.max_hops, cfg.aggregation))
                .collect::<Result<_>>()?,
        };
        let mut report = IterationReport {
            iteration: t,
            selected: Vec::new(),
            before: EdgeWeightMap::new(),
            after: EdgeWeightMap::new(),
            sigma: 0.0,
            table_snapshot: table.edge_weights(),
            test_after: EdgeWeightMap::new(),
            wall_time: Duration::ZERO,
        };
        if chosen.is_empty() {
            self.tables.push(table);
            report.wall_time = started.elapsed();
            return Ok(report);
        }

        let mut touched = Vec::new();
        for ps in &chosen {
            let edge = &ps.edge;
            let plan =
                select_paths(&table, edge, cfg.top_k, cfg.delta, cfg.max_hops, cfg.budget)?.restrict(self.families);
            let base = self.corpora.get(edge).cloned().unwrap_or_else(|| ParallelCorpus::for_edge(edge));
            let sources = source_pool(Some(&base), self.mono.get(&edge.src));
            let targets = target_pool(Some(&base), self.mono.get(&edge.tgt));
            let fwd = forward_distill(&plan, &self.model, &sources)?;
            let bwd = backward_distill(&plan, &self.model, &targets)?;
            let assembled = assemble_training_set(&base, &[fwd, bwd])?;
            let added = assembled.len() - base.len();
            debug!("T={t} {edge}: +{added} pseudo pairs from {} path(s)", plan.path_count());
            self.corpora.insert(edge.clone(), assembled);
            touched.push(edge.clone());
            report.selected.push(SelectedEdge {
                edge: edge.clone(),
                potential: ps.potential,
                best_path: ps.best_path.clone(),
                forward_paths: plan.forward_paths,
                backward_paths: plan.backward_paths,
                pseudo_pairs: added,
            });
        }

        self.model.retrain(&self.corpora, &touched, &cfg.trainer)?;
        report.before =
            touched.iter().map(|e| (e.clone(), table.direct(e).expect("selected edges have a direct entry"))).collect();
        report.after = one_hop_scores(&touched, &self.model, self.devset)?;
        report.sigma = average_improvement(&report.before, &report.after)?;
        if let Some(test) = self.testset {
            report.test_after = one_hop_scores(&touched, &self.model, test)?;
        }
        self.tables.push(table);
        report.wall_time = started.elapsed();
        info!(
            "T={t} selected [{}] sigma={:.3} ({:.1?})",
            touched.iter().map(Edge::to_string).collect::<Vec<_>>().join(", "),
            report.sigma,
            report.wall_time
        );
        Ok(report)
    }
}

/// Inputs shared by every mode of an experiment.
#[derive(Clone, Copy)]
pub struct Inputs<'a> {
    pub graph: &'a LanguageGraph,
    pub corpora: &'a BTreeMap<Edge, ParallelCorpus>,
    pub mono: &'a BTreeMap<LangCode, MonoCorpus>,
    pub devset: &'a MultiParallelSet,
    pub testset: Option<&'a MultiParallelSet>,
}

impl Inputs<'_> {
    fn check(&self) -> Result<()> {
        self.graph.validate()?;
        self.devset.validate()?;
        for lang in self.graph.languages() {
            self.devset.lines(lang.as_str())?;
            if let Some(t) = self.testset {
                t.lines(lang.as_str())?;
            }
        }
        if self.corpora.values().all(ParallelCorpus::is_empty) {
            return Err(Error::EmptyTrainingSet);
        }
        Ok(())
    }
}

/// Runs the loop from a given `θ_0`.
///
/// With `schedule`, iteration `T` distills exactly `schedule[T-1]` and the
/// run lasts `schedule.len()` iterations; otherwise selection is greedy and
/// the usual stopping rule applies.
pub fn run_from(
    inputs: Inputs<'_>,
    initial_model: &MultilingualModel,
    config: &RunConfig,
    mode: RunMode,
    schedule: Option<&[Vec<Edge>]>,
) -> std::result::Result<RunOutcome, AbortedRun> {
    config.validate()?;
    inputs.check()?;
    let edges = trained_edges(inputs.graph, initial_model);
    let initial_weights = one_hop_scores(&edges, initial_model, inputs.devset)?;
    let initial_test = match inputs.testset {
        Some(t) => one_hop_scores(&edges, initial_model, t)?,
        None => EdgeWeightMap::new(),
    };

    let mut reports = Vec::new();
    let mut stop = StopReason::NotRun;
    let mut state = RunState {
        graph: inputs.graph,
        mono: inputs.mono,
        devset: inputs.devset,
        testset: inputs.testset,
        config,
        families: mode.families().unwrap_or(PathFamilies::Both),
        model: initial_model.clone(),
        corpora: inputs.corpora.clone(),
        iteration: 0,
        tables: Vec::new(),
    };
    if mode != RunMode::Initial {
        loop {
            let forced = match schedule {
                Some(s) if state.iteration == s.len() => {
                    stop = StopReason::ScheduleExhausted;
                    break;
                }
                Some(s) => Some(s[state.iteration].as_slice()),
                None if state.iteration == config.max_iterations => {
                    stop = StopReason::MaxIterations;
                    break;
                }
                None => None,
            };
            let report = match state.iteration_step(forced) {
                Ok(r) => r,
                Err(error) => return Err(AbortedRun { error, reports }),
            };
            let empty = report.selected.is_empty();
            let sigma = report.sigma;
            reports.push(report);
            if schedule.is_none() {
                if empty {
                    stop = StopReason::NoPositivePotential;
                    break;
                }
                if sigma <= config.tau {
                    stop = StopReason::Converged;
                    break;
                }
            }
        }
    }
    let final_test = match inputs.testset {
        Some(t) => {
            one_hop_scores(&edges, &state.model, t).map_err(|error| AbortedRun { error, reports: reports.clone() })?
        }
        None => EdgeWeightMap::new(),
    };
    Ok(RunOutcome {
        mode,
        initial_model: initial_model.clone(),
        model: state.model,
        corpora: state.corpora,
        reports,
        tables: state.tables,
        stop,
        initial_weights,
        initial_test,
        final_test,
    })
}

/// The full graph-distillation run (forward and backward paths, greedy selection).
pub fn run(
    graph: &LanguageGraph,
    corpora: &BTreeMap<Edge, ParallelCorpus>,
    mono: &BTreeMap<LangCode, MonoCorpus>,
    devset: &MultiParallelSet,
    config: &RunConfig,
) -> std::result::Result<RunOutcome, AbortedRun> {
    let inputs = Inputs { graph, corpora, mono, devset, testset: None };
    run_mode(inputs, config, RunMode::Graph)
}

/// Runs a single mode. Baseline modes replay the graph run's schedule.
pub fn run_mode(inputs: Inputs<'_>, config: &RunConfig, mode: RunMode) -> std::result::Result<RunOutcome, AbortedRun> {
    config.validate()?;
    inputs.check()?;
    let theta0 = train_multilingual(inputs.corpora, &config.trainer)?;
    match mode {
        RunMode::Initial | RunMode::Graph => run_from(inputs, &theta0, config, mode, None),
        RunMode::Bt | RunMode::Forward => {
            let graph_run = run_from(inputs, &theta0, config, RunMode::Graph, None)?;
            run_from(inputs, &theta0, config, mode, Some(&graph_run.schedule()))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub iteration: usize,
    pub edge: Edge,
    pub initial: f64,
    pub bt: f64,
    pub forward: f64,
    pub graph: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    /// Final test BLEU of every edge, per mode.
    pub final_test: BTreeMap<RunMode, EdgeWeightMap>,
    pub graph_sigmas: Vec<f64>,
}

/// All four modes from one `θ_0`.
pub struct Comparison {
    pub report: ComparisonReport,
    pub outcomes: BTreeMap<RunMode, RunOutcome>,
}

/// Runs Initial, +BT, +Forward and +Graph from the same `θ_0`.
///
/// Scores are test-set BLEU when `inputs.testset` is set, dev BLEU otherwise.
pub fn compare_modes(inputs: Inputs<'_>, config: &RunConfig) -> std::result::Result<Comparison, AbortedRun> {
    config.validate()?;
    inputs.check()?;
    let theta0 = train_multilingual(inputs.corpora, &config.trainer)?;
    let graph = run_from(inputs, &theta0, config, RunMode::Graph, None)?;
    let schedule = graph.schedule();
    let bt = run_from(inputs, &theta0, config, RunMode::Bt, Some(&schedule))?;
    let forward = run_from(inputs, &theta0, config, RunMode::Forward, Some(&schedule))?;
    let initial = run_from(inputs, &theta0, config, RunMode::Initial, None)?;

    let use_test = inputs.testset.is_some();
    let after = |o: &RunOutcome, i: usize, e: &Edge| -> f64 {
        let r = &o.reports[i];
        if use_test {
            r.test_after[e]
        } else {
            r.after[e]
        }
    };
    let baseline = if use_test { &graph.initial_test } else { &graph.initial_weights };
    let mut rows = Vec::new();
    for (i, r) in graph.reports.iter().enumerate() {
        for s in &r.selected {
            rows.push(ComparisonRow {
                iteration: r.iteration,
                edge: s.edge.clone(),
                initial: baseline[&s.edge],
                bt: after(&bt, i, &s.edge),
                forward: after(&forward, i, &s.edge),
                graph: after(&graph, i, &s.edge),
            });
        }
    }
    let final_of = |o: &RunOutcome| {
        if use_test {
            o.final_test.clone()
        } else {
            one_hop_scores(&trained_edges(inputs.graph, &o.model), &o.model, inputs.devset)
                .expect("dev covers all languages")
        }
    };
    let mut final_test = BTreeMap::new();
    let graph_sigmas = graph.reports.iter().map(|r| r.sigma).collect();
    let mut outcomes = BTreeMap::new();
    for o in [initial, bt, forward, graph] {
        final_test.insert(o.mode, final_of(&o));
        outcomes.insert(o.mode, o);
    }
    Ok(Comparison { report: ComparisonReport { rows, final_test, graph_sigmas }, outcomes })
}
