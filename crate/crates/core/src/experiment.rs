//! Config-driven entry points shared by the CLI and the C API.

use log::info;

use crate::config::ExperimentConfig;
use crate::graph::Edge;
use crate::io::DataDir;
use crate::orchestrator::{compare_modes, run_mode, AbortedRun, Inputs, RunMode, RunOutcome};
use crate::report::{self, RunManifest};
use crate::translator::MultilingualModel;
use crate::world::{generate_corpora, generate_world};
use crate::{Error, Result};

/// What `run` should execute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plan {
    Single(RunMode),
    /// All four modes from one initial model.
    Compare,
}

impl std::str::FromStr for Plan {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "compare" => Ok(Plan::Compare),
            other => other.parse().map(Plan::Single),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenSummary {
    pub languages: usize,
    pub corpora: usize,
    pub dev_size: usize,
    pub test_size: usize,
}

/// Generates the world and writes `<out>/data`, including an oracle model
/// covering every ordered language pair.
pub fn generate(cfg: &ExperimentConfig) -> Result<GenSummary> {
    let graph = cfg.graph()?;
    let langs: Vec<_> = graph.languages().cloned().collect();
    let world = generate_world(&cfg.world, &langs, cfg.seed)?;
    let data = generate_corpora(&world, &graph, cfg.data.dev_size, cfg.data.test_size, cfg.seed)?;
    let dir = DataDir::new(cfg.data_dir());
    dir.write_generated(&graph, &world, &data)?;
    let all: Vec<Edge> = langs
        .iter()
        .flat_map(|a| langs.iter().filter(move |b| *b != a).map(move |b| Edge { src: a.clone(), tgt: b.clone() }))
        .collect();
    MultilingualModel::oracle(&world, &all)?.save(&dir.oracle_model_path())?;
    Ok(GenSummary {
        languages: langs.len(),
        corpora: data.corpora.len(),
        dev_size: data.dev.len(),
        test_size: data.test.len(),
    })
}

/// Runs `plan` on the generated data, writes reports under
/// `<out>/runs/<mode>` and returns the rendered table.
pub fn run(cfg: &ExperimentConfig, plan: Plan) -> std::result::Result<String, AbortedRun> {
    let dir = DataDir::new(cfg.data_dir());
    if !dir.graph_path().exists() {
        return Err(Error::NoData(dir.root).into());
    }
    let (graph, data) = dir.load()?;
    let inputs = Inputs {
        graph: &graph,
        corpora: &data.corpora,
        mono: &data.mono,
        devset: &data.dev,
        testset: Some(&data.test),
    };
    let manifest = |mode, outcome: &RunOutcome| RunManifest {
        mode,
        config: cfg.run.clone(),
        stop: outcome.stop,
        iterations: outcome.reports.len(),
        dev_policy: report::DEV_POLICY.to_string(),
        dev_size: data.dev.len(),
        test_size: data.test.len(),
    };
    match plan {
        Plan::Compare => {
            let cmp = compare_modes(inputs, &cfg.run)?;
            let out = cfg.run_dir("compare");
            report::write_comparison(&out, &cmp.report)?;
            for (m, o) in &cmp.outcomes {
                report::write_run(&out.join(m.to_string()), o, &manifest(*m, o))?;
            }
            info!("wrote {}", out.display());
            Ok(report::comparison_table(&cmp.report).render_text())
        }
        Plan::Single(mode) => {
            let outcome = run_mode(inputs, &cfg.run, mode)?;
            let out = cfg.run_dir(&mode.to_string());
            report::write_run(&out, &outcome, &manifest(mode, &outcome))?;
            info!("wrote {} ({:?})", out.display(), outcome.stop);
            Ok(report::run_table(&outcome).render_text())
        }
    }
}
