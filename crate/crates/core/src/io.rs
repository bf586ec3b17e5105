//! Line-aligned corpus files and the data directory layout.
//!
//! Corpora are plain UTF-8 text, one sentence per line, newline-terminated,
//! with parallel files aligned by line number:
//!
//! ```text
//! <data>/graph.toml                     languages, directed pairs, counts
//! <data>/world.toml                     synthetic world manifest (optional)
//! <data>/corpora/<src>-<tgt>.<src>      source side
//! <data>/corpora/<src>-<tgt>.<tgt>      target side
//! <data>/corpora/<src>-<tgt>.prov       provenance per line (optional)
//! <data>/mono/<lang>.txt
//! <data>/dev/<lang>.txt   <data>/test/<lang>.txt
//! ```
//!
//! A provenance sidecar line is `real`, `pseudo-forward:<path>` or
//! `pseudo-backward:<path>`. A missing sidecar means every line is real.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::graph::{Edge, LangCode, LanguageGraph};
use crate::world::{
    ConceptWorld, GeneratedData, MonoCorpus, MultiParallelSet, ParallelCorpus, Provenance, SentencePair, WorldManifest,
};

pub fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn read_lines(path: &Path) -> Result<Vec<String>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8(bytes).map_err(|e| Error::parse(path, format!("invalid UTF-8: {e}")))?;
    Ok(text.lines().map(str::to_owned).collect())
}

pub fn write_lines<S: AsRef<str>>(path: &Path, lines: &[S]) -> Result<()> {
    let mut text = String::with_capacity(lines.iter().map(|l| l.as_ref().len() + 1).sum());
    for l in lines {
        text.push_str(l.as_ref());
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn corpus_stem(dir: &Path, edge: &Edge) -> PathBuf {
    dir.join(format!("{}-{}", edge.src, edge.tgt))
}

pub fn corpus_paths(dir: &Path, edge: &Edge) -> (PathBuf, PathBuf, PathBuf) {
    let stem = corpus_stem(dir, edge);
    let with = |ext: &str| {
        let mut p = stem.clone().into_os_string();
        p.push(".");
        p.push(ext);
        PathBuf::from(p)
    };
    (with(edge.src.as_str()), with(edge.tgt.as_str()), with("prov"))
}

pub fn write_corpus(dir: &Path, corpus: &ParallelCorpus) -> Result<()> {
    let (src, tgt, prov) = corpus_paths(dir, &corpus.edge());
    let s: Vec<&str> = corpus.pairs.iter().map(|p| p.source.as_str()).collect();
    let t: Vec<&str> = corpus.pairs.iter().map(|p| p.target.as_str()).collect();
    let tags: Vec<String> = corpus.pairs.iter().map(|p| p.provenance.to_string()).collect();
    write_lines(&src, &s)?;
    write_lines(&tgt, &t)?;
    write_lines(&prov, &tags)
}

pub fn read_corpus(dir: &Path, edge: &Edge) -> Result<ParallelCorpus> {
    let (src, tgt, prov) = corpus_paths(dir, edge);
    let s = read_lines(&src)?;
    let t = read_lines(&tgt)?;
    if s.len() != t.len() {
        return Err(Error::LineCountMismatch { left: s.len(), right: t.len() });
    }
    let tags = if prov.exists() {
        let tags = read_lines(&prov)?;
        if tags.len() != s.len() {
            return Err(Error::Alignment(format!(
                "{}: {} provenance tags for {} pairs",
                prov.display(),
                tags.len(),
                s.len()
            )));
        }
        tags.iter().map(|t| t.parse()).collect::<Result<Vec<Provenance>>>()?
    } else {
        vec![Provenance::Real; s.len()]
    };
    let pairs = s
        .into_iter()
        .zip(t)
        .zip(tags)
        .map(|((source, target), provenance)| SentencePair { source, target, provenance })
        .collect();
    Ok(ParallelCorpus { src: edge.src.clone(), tgt: edge.tgt.clone(), pairs })
}

/// `<dir>/<lang>.txt` for every language, line-aligned.
pub fn write_multi_parallel(dir: &Path, set: &MultiParallelSet) -> Result<()> {
    create_dir(dir)?;
    for (lang, lines) in &set.renderings {
        write_lines(&dir.join(format!("{lang}.txt")), lines)?;
    }
    Ok(())
}

pub fn read_multi_parallel(dir: &Path) -> Result<MultiParallelSet> {
    let mut renderings = BTreeMap::new();
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("txt") {
            continue;
        }
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        let lang = LangCode::new(stem)?;
        renderings.insert(lang, read_lines(&path)?);
    }
    let set = MultiParallelSet { concepts: Vec::new(), renderings };
    set.validate()?;
    Ok(set)
}

/// A data directory on disk.
#[derive(Debug, Clone)]
pub struct DataDir {
    pub root: PathBuf,
}

impl DataDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        DataDir { root: root.into() }
    }

    pub fn graph_path(&self) -> PathBuf {
        self.root.join("graph.toml")
    }

    pub fn world_path(&self) -> PathBuf {
        self.root.join("world.toml")
    }

    pub fn corpora_dir(&self) -> PathBuf {
        self.root.join("corpora")
    }

    pub fn mono_dir(&self) -> PathBuf {
        self.root.join("mono")
    }

    pub fn oracle_model_path(&self) -> PathBuf {
        self.root.join("oracle_model.json")
    }

    pub fn write_generated(&self, graph: &LanguageGraph, world: &ConceptWorld, data: &GeneratedData) -> Result<()> {
        create_dir(&self.root)?;
        graph.save(&self.graph_path())?;
        let manifest = toml::to_string(&world.manifest()).expect("manifest serializes");
        std::fs::write(self.world_path(), manifest).map_err(|e| Error::io(self.world_path(), e))?;
        create_dir(&self.corpora_dir())?;
        for c in data.corpora.values() {
            write_corpus(&self.corpora_dir(), c)?;
        }
        create_dir(&self.mono_dir())?;
        for m in data.mono.values() {
            write_lines(&self.mono_dir().join(format!("{}.txt", m.lang)), &m.sentences)?;
        }
        write_multi_parallel(&self.root.join("dev"), &data.dev)?;
        write_multi_parallel(&self.root.join("test"), &data.test)
    }

    pub fn load_graph(&self) -> Result<LanguageGraph> {
        let path = self.graph_path();
        if !path.exists() {
            return Err(Error::io(
                &path,
                std::io::Error::new(std::io::ErrorKind::NotFound, "data directory has no graph.toml"),
            ));
        }
        LanguageGraph::load(&path)
    }

    pub fn load_world(&self) -> Result<ConceptWorld> {
        let path = self.world_path();
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let m: WorldManifest = toml::from_str(&text).map_err(|e| Error::parse(&path, e))?;
        ConceptWorld::from_manifest(&m)
    }

    /// Loads graph, corpora, monolingual text and dev/test sets.
    pub fn load(&self) -> Result<(LanguageGraph, GeneratedData)> {
        let graph = self.load_graph()?;
        let mut corpora = BTreeMap::new();
        for (edge, count) in graph.edges() {
            let (src, _, _) = corpus_paths(&self.corpora_dir(), edge);
            let corpus =
                if src.exists() { read_corpus(&self.corpora_dir(), edge)? } else { ParallelCorpus::for_edge(edge) };
            let real = corpus.real_pairs().count() as u64;
            if real != count {
                return Err(Error::Alignment(format!(
                    "graph.toml declares {count} pairs for {edge} but the corpus has {real}"
                )));
            }
            corpora.insert(edge.clone(), corpus);
        }
        let mut mono = BTreeMap::new();
        for lang in graph.languages() {
            let path = self.mono_dir().join(format!("{lang}.txt"));
            let sentences = if path.exists() { read_lines(&path)? } else { Vec::new() };
            mono.insert(lang.clone(), MonoCorpus { lang: lang.clone(), sentences });
        }
        let dev = read_multi_parallel(&self.root.join("dev"))?;
        let test = read_multi_parallel(&self.root.join("test"))?;
        Ok((graph, GeneratedData { corpora, mono, dev, test }))
    }

    /// Registers an external line-aligned corpus as real data for `src -> tgt`.
    ///
    /// The files are copied verbatim and `D(e)` in `graph.toml` is set to the
    /// line count. Both languages must already be declared.
    pub fn ingest(&self, src_file: &Path, tgt_file: &Path, src_lang: &str, tgt_lang: &str) -> Result<ParallelCorpus> {
        let mut graph = self.load_graph()?;
        for l in [src_lang, tgt_lang] {
            if !graph.contains(l) {
                return Err(Error::UnknownLanguage(l.to_owned()));
            }
        }
        let s = read_lines(src_file)?;
        let t = read_lines(tgt_file)?;
        if s.len() != t.len() {
            return Err(Error::LineCountMismatch { left: s.len(), right: t.len() });
        }
        for (path, lines) in [(src_file, &s), (tgt_file, &t)] {
            if let Some(i) = lines.iter().position(|l| l.trim().is_empty()) {
                return Err(Error::parse(path, format!("line {} is empty", i + 1)));
            }
        }
        let edge = graph.add_edge(src_lang, tgt_lang, s.len() as u64)?;
        let corpus = ParallelCorpus {
            src: edge.src.clone(),
            tgt: edge.tgt.clone(),
            pairs: s.into_iter().zip(t).map(|(a, b)| SentencePair::real(a, b)).collect(),
        };
        create_dir(&self.corpora_dir())?;
        write_corpus(&self.corpora_dir(), &corpus)?;
        graph.save(&self.graph_path())?;
        Ok(corpus)
    }

    /// Writes the two sides of a stored corpus to `src_out` and `tgt_out`.
    pub fn export(&self, edge: &Edge, src_out: &Path, tgt_out: &Path) -> Result<()> {
        let c = read_corpus(&self.corpora_dir(), edge)?;
        let s: Vec<&str> = c.pairs.iter().map(|p| p.source.as_str()).collect();
        let t: Vec<&str> = c.pairs.iter().map(|p| p.target.as_str()).collect();
        write_lines(src_out, &s)?;
        write_lines(tgt_out, &t)
    }
}
