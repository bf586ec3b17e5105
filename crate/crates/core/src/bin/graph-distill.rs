use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use graph_distill::config::ExperimentConfig;
use graph_distill::experiment::{self, Plan};
use graph_distill::io::DataDir;
use graph_distill::orchestrator::{AbortedRun, RunMode};
use graph_distill::pathtable::{PathDirection, TranslationPath};
use graph_distill::remote::{RemoteBackend, RemoteConfig};
use graph_distill::report;
use graph_distill::translator::{pipeline_translate, MultilingualModel, TranslationBackend};
use graph_distill::world::MultiParallelSet;
use graph_distill::{bleu, Error, ErrorKind};

#[derive(Parser)]
#[command(name = "graph-distill", version, about = "Language-graph distillation for low-resource translation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic world and its corpora into <out>/data.
    Gen(Common),
    /// Train and distill; writes reports to <out>/runs/<mode> and prints the table.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Mode::Graph)]
        mode: Mode,
    },
    /// Register a line-aligned parallel corpus as real data for SRC_LANG -> TGT_LANG.
    Ingest {
        src_file: PathBuf,
        tgt_file: PathBuf,
        src_lang: String,
        tgt_lang: String,
        /// Data directory (defaults to <out>/data of --config).
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, env = "GD_CONFIG")]
        config: Option<PathBuf>,
    },
    /// Print corpus BLEU of a model on a multi-parallel set.
    Eval {
        #[arg(long)]
        model: Option<PathBuf>,
        /// Use the remote backend from the config file or GD_REMOTE_* instead of --model.
        #[arg(long, conflicts_with = "model")]
        remote: bool,
        #[arg(long)]
        src: String,
        #[arg(long)]
        tgt: String,
        /// Pivot languages, in order.
        #[arg(long, value_delimiter = ',')]
        via: Vec<String>,
        /// Directory of <lang>.txt files.
        #[arg(long)]
        set: PathBuf,
        #[arg(long, env = "GD_CONFIG")]
        config: Option<PathBuf>,
    },
    /// Re-render the table of a finished run directory.
    Report { dir: PathBuf },
}

#[derive(Args)]
struct Common {
    #[arg(long, env = "GD_CONFIG")]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    max_hops: Option<usize>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    top_k: Option<usize>,
    #[arg(long)]
    edges_per_iter: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Initial,
    Bt,
    Forward,
    Graph,
    Compare,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

fn exit_code(e: &Error) -> u8 {
    match e.kind() {
        ErrorKind::Usage => 1,
        ErrorKind::Data => 2,
        ErrorKind::Runtime => 3,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: exit_code(&e), message: e.to_string() }
    }
}

impl From<AbortedRun> for Failure {
    fn from(a: AbortedRun) -> Self {
        let code = if a.reports.is_empty() { exit_code(&a.error) } else { 3 };
        let message = if a.reports.is_empty() { a.error.to_string() } else { a.to_string() };
        Failure { code, message }
    }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Gen(c) => cmd_gen(&c),
        Command::Run { common, mode } => cmd_run(&common, mode),
        Command::Ingest { src_file, tgt_file, src_lang, tgt_lang, data, config } => {
            cmd_ingest(&src_file, &tgt_file, &src_lang, &tgt_lang, data, config)
        }
        Command::Eval { model, remote, src, tgt, via, set, config } => {
            cmd_eval(model.as_deref(), remote, &src, &tgt, &via, &set, config.as_deref())
        }
        Command::Report { dir } => report::render_dir(&dir).map(|t| print!("{t}")).map_err(Failure::from),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load_config(c: &Common) -> Result<ExperimentConfig, Failure> {
    let mut cfg = ExperimentConfig::load(&c.config).map_err(|e| match e {
        // an unreadable config file is a usage problem, not a runtime one
        Error::Io { .. } => Failure { code: 1, message: e.to_string() },
        e => e.into(),
    })?;
    cfg.apply_env(|k| std::env::var(k).ok())?;
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(o) = &c.out {
        cfg.out = o.clone();
    }
    if let Some(h) = c.max_hops {
        cfg.run.max_hops = h;
    }
    if let Some(t) = c.tau {
        cfg.run.tau = t;
    }
    if let Some(k) = c.top_k {
        cfg.run.top_k = k;
    }
    if let Some(m) = c.edges_per_iter {
        cfg.run.edges_per_iter = m;
    }
    cfg.sync_seed();
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_gen(c: &Common) -> CliResult {
    let cfg = load_config(c)?;
    let sum = experiment::generate(&cfg)?;
    println!(
        "wrote {} languages, {} corpora, dev {} / test {} to {}",
        sum.languages,
        sum.corpora,
        sum.dev_size,
        sum.test_size,
        cfg.data_dir().display()
    );
    Ok(())
}

fn cmd_run(c: &Common, mode: Mode) -> CliResult {
    let cfg = load_config(c)?;
    let plan = match mode {
        Mode::Initial => Plan::Single(RunMode::Initial),
        Mode::Bt => Plan::Single(RunMode::Bt),
        Mode::Forward => Plan::Single(RunMode::Forward),
        Mode::Graph => Plan::Single(RunMode::Graph),
        Mode::Compare => Plan::Compare,
    };
    print!("{}", experiment::run(&cfg, plan)?);
    Ok(())
}

fn cmd_ingest(
    src_file: &Path,
    tgt_file: &Path,
    src_lang: &str,
    tgt_lang: &str,
    data: Option<PathBuf>,
    config: Option<PathBuf>,
) -> CliResult {
    let root = match (data, config) {
        (Some(d), _) => d,
        (None, Some(c)) => ExperimentConfig::load(&c)?.data_dir(),
        (None, None) => {
            return Err(Failure { code: 1, message: "ingest needs --data or --config".into() });
        }
    };
    let corpus = DataDir::new(root).ingest(src_file, tgt_file, src_lang, tgt_lang)?;
    println!("{}: {} pairs", corpus.edge(), corpus.len());
    Ok(())
}

fn cmd_eval(
    model: Option<&Path>,
    remote: bool,
    src: &str,
    tgt: &str,
    via: &[String],
    set: &Path,
    config: Option<&Path>,
) -> CliResult {
    let backend: Box<dyn TranslationBackend> = if remote {
        let base = match config {
            Some(c) => ExperimentConfig::load(c)?.remote,
            None => None,
        };
        let rc = RemoteConfig::from_env(base, |k| std::env::var(k).ok())?
            .ok_or(Failure { code: 1, message: "--remote needs [remote] in --config or GD_REMOTE_ENDPOINT".into() })?;
        Box::new(RemoteBackend::new(rc)?)
    } else {
        let path = model.ok_or(Failure { code: 1, message: "eval needs --model or --remote".into() })?;
        Box::new(MultilingualModel::load(path)?)
    };
    let mut langs = vec![src];
    langs.extend(via.iter().map(String::as_str));
    langs.push(tgt);
    let path = TranslationPath::parse(&langs.join("->"))?.with_direction(PathDirection::Forward);
    let set: MultiParallelSet = graph_distill::io::read_multi_parallel(set)?;
    let sources = set.lines(src)?.to_vec();
    let refs = set.lines(tgt)?;
    let hyps = pipeline_translate(backend.as_ref(), &path, &sources)?;
    let score = bleu(&hyps, refs)?;
    println!("{path}: {score}");
    Ok(())
}
