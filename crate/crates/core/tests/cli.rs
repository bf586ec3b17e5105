use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use graph_distill::io::{read_multi_parallel, DataDir};
use graph_distill::translator::{translate, MultilingualModel};
use graph_distill::{bleu, Edge};

const CONFIG: &str = r#"
seed = 5
out = "exp"

[world]
concept_count = 40

[data]
dev_size = 40
test_size = 40

[run]
budget = 150

[[graph.language]]
code = "aa"
mono = 100
[[graph.language]]
code = "bb"
mono = 100
[[graph.language]]
code = "cc"
mono = 100

[[graph.pair]]
src = "aa"
tgt = "bb"
count = 400
[[graph.pair]]
src = "bb"
tgt = "aa"
count = 400
[[graph.pair]]
src = "bb"
tgt = "cc"
count = 400
[[graph.pair]]
src = "cc"
tgt = "bb"
count = 400
[[graph.pair]]
src = "aa"
tgt = "cc"
count = 20
"#;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_graph-distill"));
    for (k, _) in std::env::vars() {
        if k.starts_with("GD_") {
            c.env_remove(k);
        }
    }
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

struct Fixture {
    _dir: tempfile::TempDir,
    config: PathBuf,
    out: PathBuf,
}

impl Fixture {
    fn new(text: &str) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let config = dir.path().join("exp.toml");
        std::fs::write(&config, text).unwrap();
        let out = dir.path().join("exp");
        Fixture { _dir: dir, config, out }
    }

    fn cfg(&self) -> &str {
        self.config.to_str().unwrap()
    }

    fn data(&self) -> PathBuf {
        self.out.join("data")
    }

    fn gen(&self) {
        let o = run(&["gen", "--config", self.cfg()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().display().to_string(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

#[test]
fn gen_is_deterministic() {
    let f = Fixture::new(CONFIG);
    f.gen();
    let other = f.out.with_file_name("exp2");
    let o = run(&["gen", "--config", f.cfg(), "--out", other.to_str().unwrap()]);
    assert!(o.status.success());
    let a = snapshot(&f.data());
    assert_eq!(a, snapshot(&other.join("data")));
    assert!(a.contains_key("corpora/aa-cc.aa"));
    assert!(a.contains_key("dev/cc.txt"));
    assert!(a.contains_key("oracle_model.json"));
    // a different seed changes the data
    let third = f.out.with_file_name("exp3");
    let o = run(&["gen", "--config", f.cfg(), "--seed", "6", "--out", third.to_str().unwrap()]);
    assert!(o.status.success());
    assert_ne!(a, snapshot(&third.join("data")));
}

#[test]
fn invalid_config_names_the_field() {
    let f = Fixture::new(&CONFIG.replace("concept_count = 40", "concept_count = 0"));
    let o = run(&["gen", "--config", f.cfg()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("concept_count"), "{}", stderr(&o));

    let f = Fixture::new(&CONFIG.replace("budget = 150", "budget = 150\nbudjet = 3"));
    let o = run(&["gen", "--config", f.cfg()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("budjet"), "{}", stderr(&o));

    let f2 = Fixture::new(CONFIG);
    let o = bin().args(["gen", "--config", f2.cfg()]).env("GD_TAU", "lots").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("GD_TAU"), "{}", stderr(&o));

    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["run", "--config", f2.cfg(), "--mode", "sideways"]).status.code(), Some(1));
}

#[test]
fn run_needs_data() {
    let f = Fixture::new(CONFIG);
    let o = run(&["run", "--config", f.cfg(), "--mode", "initial"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("gen"), "{}", stderr(&o));
}

#[test]
fn ingest_and_export() {
    let f = Fixture::new(CONFIG);
    f.gen();
    let dir = f.out.parent().unwrap();
    let src = dir.join("in.cc");
    let tgt = dir.join("in.aa");
    std::fs::write(&src, "x y\nz\nw w w\n").unwrap();
    std::fs::write(&tgt, "p\nq r\ns\n").unwrap();
    let data = f.data();
    let o =
        run(&["ingest", src.to_str().unwrap(), tgt.to_str().unwrap(), "cc", "aa", "--data", data.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("cc->aa: 3 pairs"));
    let dd = DataDir::new(&data);
    let edge: Edge = "cc->aa".parse().unwrap();
    assert_eq!(dd.load_graph().unwrap().pair_count(&edge), Some(3));
    let (es, et) = (dir.join("out.cc"), dir.join("out.aa"));
    dd.export(&edge, &es, &et).unwrap();
    assert_eq!(std::fs::read(&src).unwrap(), std::fs::read(&es).unwrap());
    assert_eq!(std::fs::read(&tgt).unwrap(), std::fs::read(&et).unwrap());
    // the data directory still loads with the new edge
    assert_eq!(dd.load().unwrap().1.corpora[&edge].len(), 3);

    let ten: String = (0..10).map(|i| format!("s{i}\n")).collect();
    let nine: String = (0..9).map(|i| format!("t{i}\n")).collect();
    std::fs::write(&src, ten).unwrap();
    std::fs::write(&tgt, nine).unwrap();
    let o = run(&["ingest", src.to_str().unwrap(), tgt.to_str().unwrap(), "cc", "aa", "--config", f.cfg()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("10 vs 9"), "{}", stderr(&o));

    let o = run(&["ingest", src.to_str().unwrap(), src.to_str().unwrap(), "cc", "zz", "--config", f.cfg()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown language `zz`"), "{}", stderr(&o));
}

#[test]
fn eval_oracle_and_untrained() {
    let f = Fixture::new(CONFIG);
    f.gen();
    let oracle = f.data().join("oracle_model.json");
    let test = f.data().join("test");
    let args = |model: &Path, src: &'static str, tgt: &'static str| -> Vec<String> {
        ["eval", "--model", model.to_str().unwrap(), "--src", src, "--tgt", tgt, "--set", test.to_str().unwrap()]
            .iter()
            .map(|s| s.to_string())
            .collect()
    };
    let o = bin().args(args(&oracle, "aa", "cc")).output().unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("BLEU = 100.00"), "{}", stdout(&o));

    // the initial model has no cc->aa direction
    let o = run(&["run", "--config", f.cfg(), "--mode", "initial"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let initial = f.out.join("runs/initial/initial_model.json");
    let o = bin().args(args(&initial, "cc", "aa")).output().unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("cc->aa is not trained"), "{}", stderr(&o));

    // printed score matches the library
    let o = bin().args(args(&initial, "aa", "cc")).output().unwrap();
    assert!(o.status.success());
    let model = MultilingualModel::load(&initial).unwrap();
    let set = read_multi_parallel(&test).unwrap();
    let (aa, cc) = ("aa".parse().unwrap(), "cc".parse().unwrap());
    let hyps = translate(&model, &aa, &cc, set.lines("aa").unwrap()).unwrap();
    let want = bleu(&hyps, set.lines("cc").unwrap()).unwrap();
    assert_eq!(stdout(&o).trim(), format!("aa->cc: {want}"));

    // pivoting through bb
    let mut via = args(&initial, "aa", "cc");
    via.extend(["--via".to_string(), "bb".to_string()]);
    let o = bin().args(via).output().unwrap();
    assert!(stdout(&o).starts_with("aa->bb->cc: BLEU = "), "{}", stdout(&o));
}

#[test]
fn run_modes() {
    let f = Fixture::new(CONFIG);
    f.gen();
    let o = run(&["run", "--config", f.cfg(), "--mode", "initial"]);
    let text = stdout(&o);
    assert!(text.lines().next().unwrap().contains("Initial"));
    assert!(!text.contains("+Graph"));
    assert!(!f.out.join("runs/initial/iterations/iter_1.json").exists());

    let o = run(&["run", "--config", f.cfg(), "--mode", "compare"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let header = stdout(&o).lines().next().unwrap().to_string();
    for col in ["Initial", "+BT", "+Forward", "+Graph"] {
        assert!(header.contains(col), "{header}");
    }
    assert!(stdout(&o).contains("aa->cc"), "{}", stdout(&o));

    // mode=bt reproduces the comparison's +BT column
    let o = run(&["run", "--config", f.cfg(), "--mode", "bt"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let cmp: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(f.out.join("runs/compare/comparison.json")).unwrap()).unwrap();
    let bt_tsv = std::fs::read_to_string(f.out.join("runs/bt/report.tsv")).unwrap();
    let rows = cmp["rows"].as_array().unwrap();
    assert!(!rows.is_empty());
    for (row, line) in rows.iter().zip(bt_tsv.lines().skip(1)) {
        let cells: Vec<&str> = line.split('\t').collect();
        assert_eq!(cells[1], row["edge"].as_str().unwrap());
        assert_eq!(cells[3].parse::<f64>().unwrap(), row["bt"].as_f64().unwrap());
    }
    assert_eq!(rows.len(), bt_tsv.lines().count() - 1);
    assert_eq!(
        std::fs::read(f.out.join("runs/bt/final_model.json")).unwrap(),
        std::fs::read(f.out.join("runs/compare/bt/final_model.json")).unwrap()
    );

    // report re-renders the same table
    let o = run(&["report", f.out.join("runs/compare").to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), std::fs::read_to_string(f.out.join("runs/compare/report.txt")).unwrap());
}

#[test]
fn tau_above_any_gain_runs_once() {
    let f = Fixture::new(CONFIG);
    f.gen();
    let o = run(&["run", "--config", f.cfg(), "--mode", "graph", "--tau", "1000", "--max-hops", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let iters = f.out.join("runs/graph/iterations");
    assert_eq!(std::fs::read_dir(&iters).unwrap().count(), 1);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(f.out.join("runs/graph/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["stop"], "converged");
    assert_eq!(manifest["config"]["tau"], 1000.0);
}
