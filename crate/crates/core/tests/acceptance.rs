//! Acceptance criteria 1-9. Runs without the libtest harness so every
//! criterion prints exactly one PASS/FAIL line:
//!
//! ```text
//! cargo test -p graph-distill --test acceptance
//! ```

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use graph_distill::distillation::{select_edges, target_pool, Aggregation};
use graph_distill::graph::{Edge, LanguageGraph};
use graph_distill::orchestrator::{self, compare_modes, Inputs, RunConfig, RunMode, StopReason};
use graph_distill::pathtable::{enumerate_paths, AccuracyTable, TranslationPath};
use graph_distill::report::{self, RunManifest};
use graph_distill::translator::{train_multilingual, Lexicon, TrainerConfig};
use graph_distill::world::{generate_corpora, generate_world, GeneratedData, Provenance, WorldConfig};
use graph_distill::{average_improvement, bleu};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:.2?}, limit {limit:?}"))
}

fn code(i: usize) -> String {
    format!("l{i}")
}

// 1 -------------------------------------------------------------------------

fn brute_force_paths(adj: &[Vec<bool>], s: usize, t: usize, max_hops: usize) -> BTreeSet<Vec<String>> {
    fn dfs(adj: &[Vec<bool>], path: &mut Vec<usize>, t: usize, left: usize, out: &mut BTreeSet<Vec<String>>) {
        let u = *path.last().unwrap();
        for v in 0..adj.len() {
            if !adj[u][v] || path.contains(&v) {
                continue;
            }
            path.push(v);
            if v == t {
                out.insert(path.iter().map(|&i| code(i)).collect());
            } else if left > 1 {
                dfs(adj, path, t, left - 1, out);
            }
            path.pop();
        }
    }
    let mut out = BTreeSet::new();
    dfs(adj, &mut vec![s], t, max_hops, &mut out);
    out
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut compared = 0;
    for _ in 0..100 {
        let n = rng.gen_range(2..=6);
        let adj: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i != j && rng.gen_bool(0.5)).collect()).collect();
        let mut g = LanguageGraph::new();
        for i in 0..n {
            g.add_language(&code(i)).unwrap();
        }
        for (i, row) in adj.iter().enumerate() {
            for (j, &on) in row.iter().enumerate() {
                if on {
                    g.add_edge(&code(i), &code(j), 1).unwrap();
                }
            }
        }
        for s in 0..n {
            for t in (0..n).filter(|&t| t != s) {
                for h in 1..=3 {
                    let got: BTreeSet<Vec<String>> = enumerate_paths(&g, &code(s), &code(t), h)
                        .map_err(|e| e.to_string())?
                        .iter()
                        .map(|p| p.langs().iter().map(|l| l.to_string()).collect())
                        .collect();
                    let want = brute_force_paths(&adj, s, t, h);
                    ensure(got == want, || format!("{}->{} H={h}: {got:?} != {want:?}", code(s), code(t)))?;
                    compared += 1;
                }
            }
        }
    }
    within(start.elapsed(), Duration::from_secs(5))?;
    Ok(format!("{compared} (pair, H) cases equal the brute-force DFS"))
}

// 2 -------------------------------------------------------------------------

fn criterion_2() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut selected_total = 0;
    for case in 0..50 {
        let n = rng.gen_range(3..=6);
        let mut table = AccuracyTable::new(0, 2);
        let mut scores: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        // coarse scores so ties actually happen
        let score = |rng: &mut ChaCha8Rng| f64::from(rng.gen_range(0..40u32)) / 2.0;
        for s in 0..n {
            for t in 0..n {
                if s == t || !rng.gen_bool(0.6) {
                    continue;
                }
                scores.insert(vec![s, t], score(&mut rng));
                for p in 0..n {
                    if p != s && p != t && rng.gen_bool(0.5) {
                        scores.insert(vec![s, p, t], score(&mut rng));
                    }
                }
            }
        }
        for (p, s) in &scores {
            let langs: Vec<String> = p.iter().map(|&i| code(i)).collect();
            table.insert(&TranslationPath::parse(&langs.join("->")).unwrap(), *s);
        }
        let m = rng.gen_range(1..=5);

        // brute force: potential of every direct edge, sort, cut
        let mut expected: Vec<(Edge, f64)> = Vec::new();
        for (p, direct) in scores.iter().filter(|(p, _)| p.len() == 2) {
            let best = scores
                .iter()
                .filter(|(q, _)| q.len() == 3 && q[0] == p[0] && q[2] == p[1])
                .map(|(_, s)| *s)
                .fold(f64::NEG_INFINITY, f64::max);
            let pot = best - direct;
            if pot > 0.0 {
                expected.push((Edge::parse_pair(&code(p[0]), &code(p[1])).unwrap(), pot));
            }
        }
        expected.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        expected.truncate(m);

        let got: Vec<(Edge, f64)> = select_edges(&table, m, 2, Aggregation::Max)
            .map_err(|e| e.to_string())?
            .into_iter()
            .map(|p| (p.edge, p.potential))
            .collect();
        ensure(got.iter().all(|(_, p)| *p > 0.0), || format!("case {case}: non-positive potential selected"))?;
        ensure(got == expected, || format!("case {case}: {got:?} != {expected:?}"))?;
        selected_total += got.len();
    }
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("50 tables, {selected_total} selections match (potential desc, then edge asc)"))
}

// 3 -------------------------------------------------------------------------

fn criterion_3() -> Check {
    let start = Instant::now();
    let refs: Vec<String> = (0..12)
        .map(|i| (0..(4 + i % 5)).map(|j| format!("w{}", (i * 7 + j * 3) % 11)).collect::<Vec<_>>().join(" "))
        .collect();
    let ident = bleu(&refs, &refs).map_err(|e| e.to_string())?;
    ensure(ident.score == 100.0, || format!("identity scored {}", ident.score))?;

    let brev = bleu(&["a b c d e"], &["a b c d e f"]).map_err(|e| e.to_string())?;
    let want = 100.0 * (1.0f64 - 6.0 / 5.0).exp();
    ensure((brev.score - want).abs() < 1e-6, || format!("brevity case {} != {want}", brev.score))?;
    ensure(brev.precisions == [1.0; 4], || format!("brevity precisions {:?}", brev.precisions))?;
    let zero = bleu(&["a b c d"], &["a b c e"]).map_err(|e| e.to_string())?;
    ensure(zero.precisions[3] == 0.0 && zero.score == 0.0, || format!("p4 case {zero:?}"))?;

    // a lossy system so the score is strictly between 0 and 100
    let hyps: Vec<String> = refs
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut w: Vec<&str> = r.split(' ').collect();
            if i % 3 == 0 {
                w[1] = "zz";
            }
            w.join(" ")
        })
        .collect();
    let base = bleu(&hyps, &refs).map_err(|e| e.to_string())?.score;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut idx: Vec<usize> = (0..refs.len()).collect();
    for _ in 0..20 {
        idx.shuffle(&mut rng);
        let h: Vec<&String> = idx.iter().map(|&i| &hyps[i]).collect();
        let r: Vec<&String> = idx.iter().map(|&i| &refs[i]).collect();
        let s = bleu(&h, &r).map_err(|e| e.to_string())?.score;
        ensure(s == base, || format!("shuffled score {s} != {base}"))?;
    }
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("identity 100.0, brevity {:.6}, p4=0 -> 0, 20 shuffles = {base:.4}", brev.score))
}

// 4 -------------------------------------------------------------------------

fn criterion_4() -> Check {
    let map = |v: [f64; 3]| -> BTreeMap<usize, f64> { v.into_iter().enumerate().collect() };
    let t1 =
        average_improvement(&map([10.90, 14.11, 13.14]), &map([13.92, 17.64, 16.00])).map_err(|e| e.to_string())?;
    ensure((t1 - 3.137).abs() < 5e-4, || format!("T=1 average {t1}"))?;
    ensure((t1 - 3.13).abs() <= 0.01, || format!("T=1 average {t1} not within 0.01 of 3.13"))?;
    // the printed T=0 average is +1.57; the rows give 1.53
    let t0 = average_improvement(&map([5.70, 7.42, 8.58]), &map([7.58, 9.04, 9.67])).map_err(|e| e.to_string())?;
    ensure((t0 - 1.53).abs() < 1e-9, || format!("T=0 average {t0}"))?;
    Ok(format!("T=1 {t1:.4} (printed 3.13), T=0 {t0:.4} (printed 1.57)"))
}

// 5 -------------------------------------------------------------------------

fn criterion_5() -> Check {
    let start = Instant::now();
    let mut g = LanguageGraph::new();
    g.add_language("aa").unwrap();
    g.add_language("bb").unwrap();
    g.add_edge("aa", "bb", 3000).unwrap();
    let cfg = WorldConfig { concept_count: 100, zipf_exponent: 0.0, ..WorldConfig::default() };
    let langs: Vec<_> = g.languages().cloned().collect();
    let world = generate_world(&cfg, &langs, 5).map_err(|e| e.to_string())?;
    let data = generate_corpora(&world, &g, 1, 1, 5).map_err(|e| e.to_string())?;
    let corpus = &data.corpora[&Edge::parse_pair("aa", "bb").unwrap()];

    let mut occurrences: BTreeMap<&str, usize> = BTreeMap::new();
    for p in &corpus.pairs {
        for w in p.source.split_whitespace() {
            *occurrences.entry(w).or_default() += 1;
        }
    }
    let rarest = occurrences.values().copied().min().unwrap_or(0);
    ensure(rarest >= 50, || format!("precondition: rarest concept occurs {rarest} times"))?;

    let model = train_multilingual(&data.corpora, &TrainerConfig::default()).map_err(|e| e.to_string())?;
    let lex = model.lexicon("aa", "bb").ok_or("no aa->bb lexicon")?;
    let mut correct = 0;
    for w in occurrences.keys() {
        let concept = world.invert(w, "aa").map_err(|e| e.to_string())?[0];
        if lex.argmax(w) == Some(world.word("bb", concept).map_err(|e| e.to_string())?) {
            correct += 1;
        }
    }
    let rate = correct as f64 / occurrences.len() as f64;
    ensure(rate >= 0.99, || format!("recovered {correct}/{}", occurrences.len()))?;
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("{correct}/{} source words recovered (min {rarest} occurrences)", occurrences.len()))
}

// 6 -------------------------------------------------------------------------

/// Back-translation written out longhand: argmax word substitution through
/// the reverse lexicon over the first `budget` target-side sentences.
fn back_translation_oracle(
    reverse: &Lexicon,
    targets: &[String],
    budget: usize,
    tag: &str,
    existing: &HashSet<(String, String)>,
) -> Vec<(String, String, String)> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for t in targets.iter().take(budget) {
        let words: Vec<String> = t
            .split_whitespace()
            .map(|w| match reverse.candidates(w) {
                Some(c) => {
                    let mut best = &c[0];
                    for cand in c {
                        if cand.1 > best.1 || (cand.1 == best.1 && cand.0 < best.0) {
                            best = cand;
                        }
                    }
                    best.0.clone()
                }
                None => w.to_string(),
            })
            .collect();
        let pair = (words.join(" "), t.clone());
        if seen.insert(pair.clone()) && !existing.contains(&pair) {
            out.push((pair.0, pair.1, format!("pseudo-backward:{tag}")));
        }
    }
    out
}

fn criterion_6() -> Check {
    let mut g = LanguageGraph::new();
    for c in ["aa", "bb", "cc"] {
        g.add_language(c).unwrap();
        g.set_mono(c, 300).unwrap();
    }
    for (a, b, n) in [("aa", "bb", 60), ("bb", "aa", 400), ("aa", "cc", 400), ("cc", "bb", 400)] {
        g.add_edge(a, b, n).unwrap();
    }
    let langs: Vec<_> = g.languages().cloned().collect();
    let world = generate_world(&WorldConfig { concept_count: 80, ..WorldConfig::default() }, &langs, 6)
        .map_err(|e| e.to_string())?;
    let data = generate_corpora(&world, &g, 50, 50, 6).map_err(|e| e.to_string())?;
    let edge = Edge::parse_pair("aa", "bb").unwrap();
    let config = RunConfig { max_hops: 1, top_k: 1, budget: 250, ..RunConfig::default() };
    let inputs = Inputs { graph: &g, corpora: &data.corpora, mono: &data.mono, devset: &data.dev, testset: None };
    let theta0 = train_multilingual(&data.corpora, &config.trainer).map_err(|e| e.to_string())?;
    let outcome = orchestrator::run_from(inputs, &theta0, &config, RunMode::Bt, Some(&[vec![edge.clone()]]))
        .map_err(|e| e.to_string())?;

    let got: Vec<(String, String, String)> = outcome.corpora[&edge]
        .pairs
        .iter()
        .filter(|p| !p.provenance.is_real())
        .map(|p| (p.source.clone(), p.target.clone(), p.provenance.to_string()))
        .collect();
    let base = &data.corpora[&edge];
    let existing: HashSet<(String, String)> = base.pairs.iter().map(|p| (p.source.clone(), p.target.clone())).collect();
    let targets = target_pool(Some(base), data.mono.get(&edge.tgt));
    let reverse = theta0.lexicon("bb", "aa").ok_or("no bb->aa lexicon")?;
    let want = back_translation_oracle(reverse, &targets, config.budget, "bb->aa", &existing);
    ensure(!want.is_empty(), || "oracle produced nothing".into())?;
    ensure(got == want, || {
        let first = got.iter().zip(&want).position(|(a, b)| a != b);
        format!("{} vs {} pairs, first difference at {first:?}", got.len(), want.len())
    })?;
    ensure(got.iter().all(|p| p.2 == Provenance::PseudoBackward("bb->aa".into()).to_string()), || {
        "unexpected provenance".into()
    })?;
    Ok(format!("{} pseudo pairs identical to the standalone oracle", got.len()))
}

// 7 -------------------------------------------------------------------------

/// Five languages; `aa <-> ee` is starved, every other pair is rich.
fn engineered_world(seed: u64) -> (LanguageGraph, GeneratedData) {
    let mut g = LanguageGraph::new();
    for c in ["aa", "bb", "cc", "dd", "ee"] {
        g.add_language(c).unwrap();
        g.set_mono(c, 1000).unwrap();
    }
    let rich = [("aa", "bb"), ("bb", "ee"), ("aa", "cc"), ("cc", "ee"), ("bb", "dd")];
    for (a, b) in rich {
        g.add_edge(a, b, 3000).unwrap();
        g.add_edge(b, a, 3000).unwrap();
    }
    g.add_edge("aa", "ee", 40).unwrap();
    g.add_edge("ee", "aa", 40).unwrap();
    let langs: Vec<_> = g.languages().cloned().collect();
    let world = generate_world(&WorldConfig::default(), &langs, seed).unwrap();
    let data = generate_corpora(&world, &g, 300, 300, seed).unwrap();
    (g, data)
}

/// Test BLEU on `aa->ee` from the committed reference run (seed 7).
const PINNED_INITIAL: f64 = 40.3187;
const PINNED_BT: f64 = 56.1586;
const PINNED_GRAPH: f64 = 98.8330;

fn criterion_7() -> Check {
    let start = Instant::now();
    let (g, data) = engineered_world(7);
    let config = RunConfig { max_iterations: 2, seed: 7, ..RunConfig::default() };
    let inputs =
        Inputs { graph: &g, corpora: &data.corpora, mono: &data.mono, devset: &data.dev, testset: Some(&data.test) };
    let cmp = compare_modes(inputs, &config).map_err(|e| e.to_string())?;
    let starved = Edge::parse_pair("aa", "ee").unwrap();
    let score = |m: RunMode| cmp.report.final_test[&m][&starved];
    let (initial, bt, graph) = (score(RunMode::Initial), score(RunMode::Bt), score(RunMode::Graph));
    let summary = format!(
        "aa->ee test BLEU: Initial {initial:.4}, +BT {bt:.4}, +Forward {:.4}, +Graph {graph:.4}, {} iteration(s)",
        score(RunMode::Forward),
        cmp.outcomes[&RunMode::Graph].reports.len()
    );
    ensure(graph - initial >= 3.0, || format!("gain under 3.0: {summary}"))?;
    ensure(graph >= bt, || format!("+Graph below +BT: {summary}"))?;
    for (name, got, pinned) in
        [("Initial", initial, PINNED_INITIAL), ("+BT", bt, PINNED_BT), ("+Graph", graph, PINNED_GRAPH)]
    {
        ensure((got - pinned).abs() <= 0.5, || format!("{name} {got:.4} drifted from pinned {pinned:.4}: {summary}"))?;
    }
    within(start.elapsed(), Duration::from_secs(120))?;
    Ok(summary)
}

// 8 -------------------------------------------------------------------------

fn small_scenarios() -> Vec<(&'static str, LanguageGraph, GeneratedData)> {
    let mut out = Vec::new();

    let mut two = LanguageGraph::new();
    for c in ["aa", "bb"] {
        two.add_language(c).unwrap();
        two.set_mono(c, 100).unwrap();
    }
    two.add_edge("aa", "bb", 200).unwrap();
    two.add_edge("bb", "aa", 200).unwrap();

    let mut tri = LanguageGraph::new();
    for c in ["aa", "bb", "cc"] {
        tri.add_language(c).unwrap();
        tri.set_mono(c, 200).unwrap();
    }
    for (a, b, n) in [("aa", "bb", 800), ("bb", "cc", 800), ("aa", "cc", 30)] {
        tri.add_edge(a, b, n).unwrap();
        tri.add_edge(b, a, n).unwrap();
    }

    let nine = graph_distill::graph::nine_language_topology(400, 60, 150);

    for (name, g) in [("two-language", two), ("triangle", tri), ("nine-language", nine)] {
        let langs: Vec<_> = g.languages().cloned().collect();
        let cfg = WorldConfig { concept_count: 60, ..WorldConfig::default() };
        let world = generate_world(&cfg, &langs, 8).unwrap();
        let data = generate_corpora(&world, &g, 60, 60, 8).unwrap();
        out.push((name, g, data));
    }
    out
}

fn write_reports(dir: &Path, g: &LanguageGraph, data: &GeneratedData, config: &RunConfig) -> Result<usize, String> {
    let inputs =
        Inputs { graph: g, corpora: &data.corpora, mono: &data.mono, devset: &data.dev, testset: Some(&data.test) };
    let cmp = compare_modes(inputs, config).map_err(|e| e.to_string())?;
    report::write_comparison(dir, &cmp.report).map_err(|e| e.to_string())?;
    for (m, o) in &cmp.outcomes {
        let manifest = RunManifest {
            mode: *m,
            config: config.clone(),
            stop: o.stop,
            iterations: o.reports.len(),
            dev_policy: report::DEV_POLICY.into(),
            dev_size: data.dev.len(),
            test_size: data.test.len(),
        };
        report::write_run(&dir.join(m.to_string()), o, &manifest).map_err(|e| e.to_string())?;
    }
    let graph = &cmp.outcomes[&RunMode::Graph];
    ensure(graph.reports.len() <= config.max_iterations, || "ran past max_iterations".into())?;
    ensure(graph.stop != StopReason::NotRun, || "graph mode did not run".into())?;
    Ok(graph.reports.len())
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn criterion_8() -> Check {
    let config = RunConfig { tau: 0.1, max_iterations: 10, seed: 8, budget: 300, ..RunConfig::default() };
    let mut lines = Vec::new();
    for (name, g, data) in small_scenarios() {
        let a = tempfile::tempdir().map_err(|e| e.to_string())?;
        let b = tempfile::tempdir().map_err(|e| e.to_string())?;
        let iters = write_reports(a.path(), &g, &data, &config)?;
        write_reports(b.path(), &g, &data, &config)?;
        let (fa, fb) = (files(a.path()), files(b.path()));
        ensure(!fa.is_empty(), || format!("{name}: no report files"))?;
        ensure(fa.keys().eq(fb.keys()), || format!("{name}: file sets differ"))?;
        for (k, v) in &fa {
            ensure(fb[k] == *v, || format!("{name}: {k} differs between runs"))?;
        }
        lines.push(format!("{name} halted after {iters}, {} identical files", fa.len()));
    }
    Ok(lines.join("; "))
}

// 9 -------------------------------------------------------------------------

fn criterion_9() -> Check {
    let scenarios = small_scenarios();
    let (_, tri, tri_data) = &scenarios[1];
    let inputs =
        Inputs { graph: tri, corpora: &tri_data.corpora, mono: &tri_data.mono, devset: &tri_data.dev, testset: None };
    let config = RunConfig { tau: 1e9, budget: 300, ..RunConfig::default() };
    let out = orchestrator::run_mode(inputs, &config, RunMode::Graph).map_err(|e| e.to_string())?;
    ensure(out.reports.len() == 1, || format!("tau=1e9 ran {} iterations", out.reports.len()))?;
    ensure(!out.reports[0].selected.is_empty(), || "tau=1e9 scenario selected nothing".into())?;
    ensure(out.stop == StopReason::Converged, || format!("stop {:?}", out.stop))?;

    let (_, two, two_data) = &scenarios[0];
    let inputs =
        Inputs { graph: two, corpora: &two_data.corpora, mono: &two_data.mono, devset: &two_data.dev, testset: None };
    let out = orchestrator::run_mode(inputs, &RunConfig::default(), RunMode::Graph).map_err(|e| e.to_string())?;
    let distilled = out.reports.iter().filter(|r| !r.selected.is_empty()).count();
    ensure(distilled == 0, || format!("no-potential graph distilled {distilled} times"))?;
    ensure(out.stop == StopReason::NoPositivePotential, || format!("stop {:?}", out.stop))?;
    ensure(out.model == out.initial_model, || "model changed without distillation".into())?;
    Ok("huge tau -> 1 iteration; no positive potential -> 0 distillation iterations".into())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("path enumeration matches brute force", criterion_1),
        ("greedy selection matches brute force", criterion_2),
        ("BLEU correctness", criterion_3),
        ("comparison averages", criterion_4),
        ("IBM-1 dictionary recovery", criterion_5),
        ("back-translation reduction", criterion_6),
        ("end-to-end gain on a starved edge", criterion_7),
        ("termination and reproducibility", criterion_8),
        ("convergence semantics", criterion_9),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let label = format!("criterion {}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|p| label.ends_with(p.as_str()) || name.contains(p.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let took = start.elapsed();
        match result {
            Ok(detail) => println!("{label} PASS [{name}] {detail} ({took:.2?})"),
            Err(why) => {
                failed += 1;
                println!("{label} FAIL [{name}] {why} ({took:.2?})");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion/criteria failed");
        std::process::exit(1);
    }
}
