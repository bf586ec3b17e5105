//! Report rendering and run-directory layout.
//!
//! A run directory holds machine-readable JSON (manifest, one file per
//! iteration, accuracy tables) plus a rendered plain-text table and a TSV
//! copy of it. Nothing time-dependent is written, so identical runs produce
//! identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Edge;
use crate::io;
use crate::orchestrator::{
    ComparisonReport, ComparisonRow, IterationReport, RunConfig, RunMode, RunOutcome, StopReason,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub mode: RunMode,
    pub config: RunConfig,
    pub stop: StopReason,
    pub iterations: usize,
    /// Path accuracies are measured on one multi-parallel dev set shared by all pairs.
    pub dev_policy: String,
    pub dev_size: usize,
    pub test_size: usize,
}

pub const DEV_POLICY: &str = "shared multi-parallel dev set";

/// One table row per `(iteration, edge)`; the mode column holds that mode's score.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub groups: Vec<TableGroup>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableGroup {
    pub iteration: Option<usize>,
    pub rows: Vec<(Edge, Vec<f64>)>,
}

impl Table {
    /// Aligned plain text. Each group ends with an `Av.` row holding the mean
    /// first column and the mean gain of every other column over the first.
    pub fn render_text(&self) -> String {
        let mut lines: Vec<Vec<String>> = Vec::new();
        let mut header = vec!["T".to_string(), "Pair".to_string()];
        header.extend(self.columns.iter().cloned());
        lines.push(header);
        let mut separators = Vec::new();
        for g in &self.groups {
            separators.push(lines.len());
            for (edge, vals) in &g.rows {
                let mut row = vec![g.iteration.map(|t| t.to_string()).unwrap_or_default(), edge.to_string()];
                row.extend(vals.iter().map(|v| format!("{v:.2}")));
                lines.push(row);
            }
            if let Some(av) = self.average_row(g) {
                separators.push(lines.len());
                lines.push(av);
            }
        }
        let ncol = lines[0].len();
        let widths: Vec<usize> =
            (0..ncol).map(|c| lines.iter().map(|l| l.get(c).map_or(0, String::len)).max().unwrap_or(0)).collect();
        let rule = widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  ");
        let mut out = String::new();
        for (i, l) in lines.iter().enumerate() {
            if separators.contains(&i) {
                out.push_str(&rule);
                out.push('\n');
            }
            let cells: Vec<String> = l
                .iter()
                .enumerate()
                .map(|(c, s)| if c < 2 { format!("{s:<w$}", w = widths[c]) } else { format!("{s:>w$}", w = widths[c]) })
                .collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
        }
        out
    }

    fn average_row(&self, g: &TableGroup) -> Option<Vec<String>> {
        if g.rows.is_empty() {
            return None;
        }
        let n = g.rows.len() as f64;
        let mut row = vec!["Av.".to_string(), String::new()];
        let base = g.rows.iter().map(|r| r.1[0]).sum::<f64>() / n;
        row.push(format!("{base:.2}"));
        for c in 1..self.columns.len() {
            let gain = g.rows.iter().map(|r| r.1[c] - r.1[0]).sum::<f64>() / n;
            row.push(format!("{gain:+.2}"));
        }
        Some(row)
    }

    /// Tab-separated values with full precision.
    pub fn render_tsv(&self) -> String {
        let mut out = format!("T\tPair\t{}\n", self.columns.join("\t"));
        for g in &self.groups {
            for (edge, vals) in &g.rows {
                let t = g.iteration.map(|t| t.to_string()).unwrap_or_default();
                let vals: Vec<String> = vals.iter().map(|v| v.to_string()).collect();
                let _ = writeln!(out, "{t}\t{edge}\t{}", vals.join("\t"));
            }
        }
        out
    }
}

fn group_rows(rows: &[ComparisonRow], pick: impl Fn(&ComparisonRow) -> Vec<f64>) -> Vec<TableGroup> {
    let mut groups: BTreeMap<usize, Vec<(Edge, Vec<f64>)>> = BTreeMap::new();
    for r in rows {
        groups.entry(r.iteration).or_default().push((r.edge.clone(), pick(r)));
    }
    groups.into_iter().map(|(t, rows)| TableGroup { iteration: Some(t), rows }).collect()
}

/// Initial / +BT / +Forward / +Graph, grouped by iteration.
pub fn comparison_table(report: &ComparisonReport) -> Table {
    Table {
        columns: RunMode::ALL.iter().map(|m| m.column().to_string()).collect(),
        groups: group_rows(&report.rows, |r| vec![r.initial, r.bt, r.forward, r.graph]),
    }
}

/// Initial plus this mode's column for each selected edge. For
/// [`RunMode::Initial`], one ungrouped row per trained edge.
pub fn run_table(outcome: &RunOutcome) -> Table {
    let use_test = !outcome.initial_test.is_empty();
    let initial = if use_test { &outcome.initial_test } else { &outcome.initial_weights };
    if outcome.mode == RunMode::Initial {
        return Table {
            columns: vec![RunMode::Initial.column().to_string()],
            groups: vec![TableGroup {
                iteration: None,
                rows: initial.iter().map(|(e, s)| (e.clone(), vec![*s])).collect(),
            }],
        };
    }
    let groups = outcome
        .reports
        .iter()
        .filter(|r| !r.selected.is_empty())
        .map(|r| TableGroup {
            iteration: Some(r.iteration),
            rows: r
                .selected
                .iter()
                .map(|s| {
                    let after = if use_test { r.test_after[&s.edge] } else { r.after[&s.edge] };
                    (s.edge.clone(), vec![initial[&s.edge], after])
                })
                .collect(),
        })
        .collect();
    Table { columns: vec![RunMode::Initial.column().to_string(), outcome.mode.column().to_string()], groups }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::parse(path, e))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_iteration(path: &Path) -> Result<IterationReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e))
}

/// Writes one run into `dir`:
///
/// ```text
/// manifest.json
/// iterations/iter_<T>.json
/// tables/table_<T>.{tsv,json}
/// initial_model.json  final_model.json
/// corpora/<src>-<tgt>.{<src>,<tgt>,prov}
/// report.txt  report.tsv
/// ```
pub fn write_run(dir: &Path, outcome: &RunOutcome, manifest: &RunManifest) -> Result<()> {
    io::create_dir(dir)?;
    write_json(&dir.join("manifest.json"), manifest)?;
    let iters = dir.join("iterations");
    io::create_dir(&iters)?;
    for r in &outcome.reports {
        write_json(&iters.join(format!("iter_{}.json", r.iteration)), r)?;
    }
    let tables = dir.join("tables");
    io::create_dir(&tables)?;
    for t in &outcome.tables {
        t.write(&tables)?;
    }
    outcome.initial_model.save(&dir.join("initial_model.json"))?;
    outcome.model.save(&dir.join("final_model.json"))?;
    let corpora = dir.join("corpora");
    io::create_dir(&corpora)?;
    for c in outcome.corpora.values() {
        io::write_corpus(&corpora, c)?;
    }
    let table = run_table(outcome);
    write_text(&dir.join("report.txt"), &table.render_text())?;
    write_text(&dir.join("report.tsv"), &table.render_tsv())
}

pub fn write_comparison(dir: &Path, report: &ComparisonReport) -> Result<()> {
    io::create_dir(dir)?;
    write_json(&dir.join("comparison.json"), report)?;
    let table = comparison_table(report);
    write_text(&dir.join("report.txt"), &table.render_text())?;
    write_text(&dir.join("report.tsv"), &table.render_tsv())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Re-renders the table of a finished run or comparison directory.
pub fn render_dir(dir: &Path) -> Result<String> {
    let cmp = dir.join("comparison.json");
    if cmp.exists() {
        let text = std::fs::read_to_string(&cmp).map_err(|e| Error::io(&cmp, e))?;
        let report: ComparisonReport = serde_json::from_str(&text).map_err(|e| Error::parse(&cmp, e))?;
        return Ok(comparison_table(&report).render_text());
    }
    let txt = dir.join("report.txt");
    std::fs::read_to_string(&txt).map_err(|e| Error::io(&txt, e))
}
