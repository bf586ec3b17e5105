//! The language graph: languages as nodes, translation directions as edges.
//!
//! Edges are directed. `(u, v)` and `(v, u)` carry independent bilingual
//! counts and independent accuracy weights. Node and edge maps are ordered
//! so every traversal of a graph is deterministic.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A case-sensitive language code of 2-8 ASCII alphanumerics or `_`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LangCode(String);

impl LangCode {
    pub fn new(code: &str) -> Result<Self> {
        let ok = (2..=8).contains(&code.len()) && code.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_');
        if ok {
            Ok(LangCode(code.to_owned()))
        } else {
            Err(Error::InvalidCode(code.to_owned()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for LangCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for LangCode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        LangCode::new(s)
    }
}

impl std::borrow::Borrow<str> for LangCode {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl AsRef<str> for LangCode {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl Serialize for LangCode {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for LangCode {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        LangCode::new(&s).map_err(serde::de::Error::custom)
    }
}

/// A directed translation pair `src -> tgt`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub src: LangCode,
    pub tgt: LangCode,
}

impl Edge {
    pub fn new(src: LangCode, tgt: LangCode) -> Self {
        Edge { src, tgt }
    }

    pub fn parse_pair(src: &str, tgt: &str) -> Result<Self> {
        Ok(Edge::new(LangCode::new(src)?, LangCode::new(tgt)?))
    }

    pub fn reversed(&self) -> Edge {
        Edge::new(self.tgt.clone(), self.src.clone())
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.src, self.tgt)
    }
}

impl FromStr for Edge {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (src, tgt) = s.split_once("->").ok_or_else(|| Error::InvalidCode(s.to_owned()))?;
        Edge::parse_pair(src.trim(), tgt.trim())
    }
}

impl Serialize for Edge {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Edge {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Accuracy (BLEU points) per edge.
pub type EdgeWeightMap = BTreeMap<Edge, f64>;

/// Sum of all edge weights, the quantity the distillation loop pushes up.
pub fn objective(weights: &EdgeWeightMap) -> f64 {
    weights.values().sum()
}

/// Checks that `weights` covers exactly the graph's edges with scores in [0, 100].
pub fn validate_weights(graph: &LanguageGraph, weights: &EdgeWeightMap) -> Result<()> {
    if weights.len() != graph.edge_count() || weights.keys().any(|e| !graph.has_edge(e)) {
        return Err(Error::InvalidGraph("weight map does not match the graph's edge set".into()));
    }
    if let Some((e, w)) = weights.iter().find(|(_, w)| !(0.0..=100.0).contains(*w)) {
        return Err(Error::InvalidGraph(format!("weight {w} for {e} outside [0, 100]")));
    }
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LanguageGraph {
    mono: BTreeMap<LangCode, u64>,
    edges: BTreeMap<Edge, u64>,
}

impl LanguageGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_language(&mut self, code: &str) -> Result<LangCode> {
        if code.is_empty() {
            return Err(Error::InvalidCode(String::new()));
        }
        let code = LangCode::new(code)?;
        if self.mono.contains_key(&code) {
            return Err(Error::DuplicateLanguage(code.0));
        }
        self.mono.insert(code.clone(), 0);
        Ok(code)
    }

    pub fn set_mono(&mut self, code: &str, count: u64) -> Result<()> {
        let slot = self.mono.get_mut(code).ok_or_else(|| Error::UnknownLanguage(code.to_owned()))?;
        *slot = count;
        Ok(())
    }

    /// Inserts (or overwrites) the directed edge `src -> tgt` with `count` pairs.
    pub fn add_edge(&mut self, src: &str, tgt: &str, count: u64) -> Result<Edge> {
        let s = self.lang(src)?;
        let t = self.lang(tgt)?;
        if s == t {
            return Err(Error::SelfLoop(src.to_owned()));
        }
        let edge = Edge::new(s, t);
        self.edges.insert(edge.clone(), count);
        Ok(edge)
    }

    pub fn remove_edge(&mut self, src: &str, tgt: &str) -> Result<u64> {
        let edge = Edge::parse_pair(src, tgt)?;
        self.edges.remove(&edge).ok_or_else(|| Error::UnknownEdge(src.to_owned(), tgt.to_owned()))
    }

    fn lang(&self, code: &str) -> Result<LangCode> {
        self.mono.get_key_value(code).map(|(k, _)| k.clone()).ok_or_else(|| Error::UnknownLanguage(code.to_owned()))
    }

    pub fn contains(&self, code: &str) -> bool {
        self.mono.contains_key(code)
    }

    pub fn languages(&self) -> impl Iterator<Item = &LangCode> {
        self.mono.keys()
    }

    pub fn language_count(&self) -> usize {
        self.mono.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&Edge, u64)> {
        self.edges.iter().map(|(e, c)| (e, *c))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, edge: &Edge) -> bool {
        self.edges.contains_key(edge)
    }

    /// Bilingual pair count D(e).
    pub fn pair_count(&self, edge: &Edge) -> Option<u64> {
        self.edges.get(edge).copied()
    }

    /// Monolingual sentence count D_m(v).
    pub fn mono_count(&self, code: &str) -> Result<u64> {
        self.mono.get(code).copied().ok_or_else(|| Error::UnknownLanguage(code.to_owned()))
    }

    /// D_b(v): sum of D(e) over every directed edge touching `v`, each counted once.
    pub fn bilingual_volume(&self, code: &str) -> Result<u64> {
        if !self.contains(code) {
            return Err(Error::UnknownLanguage(code.to_owned()));
        }
        Ok(self.edges.iter().filter(|(e, _)| e.src.as_str() == code || e.tgt.as_str() == code).map(|(_, c)| *c).sum())
    }

    /// Out-neighbours of `code` in edge order.
    pub fn successors<'a>(&'a self, code: &'a LangCode) -> impl Iterator<Item = &'a LangCode> + 'a {
        self.edges
            .range(Edge::new(code.clone(), LangCode(String::new()))..)
            .take_while(move |(e, _)| &e.src == code)
            .map(|(e, _)| &e.tgt)
    }

    pub fn validate(&self) -> Result<()> {
        for edge in self.edges.keys() {
            if !self.mono.contains_key(&edge.src) || !self.mono.contains_key(&edge.tgt) {
                return Err(Error::InvalidGraph(format!("edge {edge} has an undeclared endpoint")));
            }
            if edge.src == edge.tgt {
                return Err(Error::InvalidGraph(format!("self-loop on {}", edge.src)));
            }
        }
        Ok(())
    }

    pub fn to_spec(&self) -> GraphSpec {
        GraphSpec {
            language: self.mono.iter().map(|(code, mono)| LanguageEntry { code: code.clone(), mono: *mono }).collect(),
            pair: self
                .edges
                .iter()
                .map(|(e, count)| PairEntry { src: e.src.clone(), tgt: e.tgt.clone(), count: *count })
                .collect(),
        }
    }

    pub fn from_spec(spec: &GraphSpec) -> Result<Self> {
        let mut g = LanguageGraph::new();
        for l in &spec.language {
            g.add_language(l.code.as_str())?;
            g.set_mono(l.code.as_str(), l.mono)?;
        }
        for p in &spec.pair {
            if g.has_edge(&Edge::new(p.src.clone(), p.tgt.clone())) {
                return Err(Error::InvalidGraph(format!("pair {}->{} listed twice", p.src, p.tgt)));
            }
            g.add_edge(p.src.as_str(), p.tgt.as_str(), p.count)?;
        }
        Ok(g)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_spec()).expect("graph spec serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: GraphSpec = toml::from_str(text).map_err(|e| Error::parse("<graph>", e))?;
        Self::from_spec(&spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let spec: GraphSpec = toml::from_str(&text).map_err(|e| Error::parse(path, e))?;
        Self::from_spec(&spec)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()).map_err(|e| Error::io(path, e))
    }
}

/// On-disk graph description.
///
/// ```toml
/// [[language]]
/// code = "en"
/// mono = 1000
///
/// [[pair]]
/// src = "en"
/// tgt = "fr"
/// count = 3000
/// ```
///
/// Pairs are directed; a bidirectional pair is listed twice.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    #[serde(default)]
    pub language: Vec<LanguageEntry>,
    #[serde(default)]
    pub pair: Vec<PairEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LanguageEntry {
    pub code: LangCode,
    #[serde(default)]
    pub mono: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairEntry {
    pub src: LangCode,
    pub tgt: LangCode,
    pub count: u64,
}

/// Hubs of the nine-language topology; every hub pair has bilingual data.
pub const NINE_LANGUAGE_HUBS: [&str; 4] = ["Ar", "En", "Fr", "Ru"];
/// Low-resource languages of the nine-language topology.
pub const NINE_LANGUAGE_LEAVES: [&str; 5] = ["Fi", "He", "Nb", "Sk", "Sl"];

/// Hub-to-leaf pairs with bilingual data in the nine-language topology.
pub const NINE_LANGUAGE_HUB_LEAF: [(&str, &str); 10] = [
    ("Ar", "He"),
    ("Ar", "Sk"),
    ("En", "Fi"),
    ("En", "He"),
    ("En", "Nb"),
    ("En", "Sl"),
    ("Fr", "Fi"),
    ("Fr", "Nb"),
    ("Ru", "Sk"),
    ("Ru", "Sl"),
];

/// Builds the nine-language topology with every undirected pair expanded
/// into both directions.
pub fn nine_language_topology(hub_pairs: u64, leaf_pairs: u64, mono: u64) -> LanguageGraph {
    let mut g = LanguageGraph::new();
    for code in NINE_LANGUAGE_HUBS.iter().chain(NINE_LANGUAGE_LEAVES.iter()) {
        g.add_language(code).expect("static code");
        g.set_mono(code, mono).expect("declared");
    }
    for (i, a) in NINE_LANGUAGE_HUBS.iter().enumerate() {
        for b in &NINE_LANGUAGE_HUBS[i + 1..] {
            g.add_edge(a, b, hub_pairs).expect("static edge");
            g.add_edge(b, a, hub_pairs).expect("static edge");
        }
    }
    for (a, b) in NINE_LANGUAGE_HUB_LEAF {
        g.add_edge(a, b, leaf_pairs).expect("static edge");
        g.add_edge(b, a, leaf_pairs).expect("static edge");
    }
    g
}
