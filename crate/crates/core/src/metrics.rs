//! Corpus BLEU with `multi-bleu.perl` semantics and improvement arithmetic.
//!
//! Tokenization is a whitespace split, matching is case-sensitive, there is
//! one reference per hypothesis and no smoothing: any zero n-gram precision
//! zeroes the score.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BleuScore {
    pub score: f64,
    pub precisions: [f64; MAX_ORDER],
    pub brevity_penalty: f64,
    pub hyp_len: usize,
    pub ref_len: usize,
}

impl std::fmt::Display for BleuScore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let p = self.precisions.map(|p| p * 100.0);
        write!(
            f,
            "BLEU = {:.2}, {:.1}/{:.1}/{:.1}/{:.1} (BP={:.3}, ratio={:.3}, hyp_len={}, ref_len={})",
            self.score,
            p[0],
            p[1],
            p[2],
            p[3],
            self.brevity_penalty,
            if self.ref_len == 0 { 0.0 } else { self.hyp_len as f64 / self.ref_len as f64 },
            self.hyp_len,
            self.ref_len
        )
    }
}

fn ngram_counts<'t, 'a>(tokens: &'t [&'a str], n: usize) -> HashMap<&'t [&'a str], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

/// Corpus-level BLEU over aligned hypothesis/reference lists.
pub fn bleu<H: AsRef<str>, R: AsRef<str>>(hypotheses: &[H], references: &[R]) -> Result<BleuScore> {
    if hypotheses.len() != references.len() {
        return Err(Error::Alignment(format!("{} hypotheses vs {} references", hypotheses.len(), references.len())));
    }
    if hypotheses.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut correct = [0usize; MAX_ORDER];
    let mut total = [0usize; MAX_ORDER];
    let mut hyp_len = 0;
    let mut ref_len = 0;
    for (h, r) in hypotheses.iter().zip(references) {
        let ht: Vec<&str> = h.as_ref().split_whitespace().collect();
        let rt: Vec<&str> = r.as_ref().split_whitespace().collect();
        hyp_len += ht.len();
        ref_len += rt.len();
        for n in 1..=MAX_ORDER {
            let rc = ngram_counts(&rt, n);
            let hc = ngram_counts(&ht, n);
            total[n - 1] += ht.len().saturating_sub(n - 1);
            correct[n - 1] += hc.iter().map(|(g, c)| (*c).min(rc.get(g).copied().unwrap_or(0))).sum::<usize>();
        }
    }
    let mut precisions = [0.0; MAX_ORDER];
    for n in 0..MAX_ORDER {
        if total[n] > 0 {
            precisions[n] = correct[n] as f64 / total[n] as f64;
        }
    }
    let brevity_penalty = if hyp_len > ref_len {
        1.0
    } else if hyp_len == 0 {
        0.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    };
    let score = if precisions.contains(&0.0) {
        0.0
    } else {
        let mean_log = precisions.iter().map(|p| p.ln()).sum::<f64>() / MAX_ORDER as f64;
        100.0 * brevity_penalty * mean_log.exp()
    };
    Ok(BleuScore {
        // exp(ln) round-off can push a perfect score a hair past or under 100
        score: if precisions.iter().all(|&p| p == 1.0) && brevity_penalty == 1.0 { 100.0 } else { score.min(100.0) },
        precisions,
        brevity_penalty,
        hyp_len,
        ref_len,
    })
}

/// Mean of `after - before` over the shared keys; the per-iteration σ.
pub fn average_improvement<K: Ord + std::fmt::Debug>(
    before: &BTreeMap<K, f64>,
    after: &BTreeMap<K, f64>,
) -> Result<f64> {
    if before.len() != after.len() || before.keys().zip(after.keys()).any(|(a, b)| a != b) {
        return Err(Error::Alignment(format!(
            "before/after key sets differ: {:?} vs {:?}",
            before.keys().collect::<Vec<_>>(),
            after.keys().collect::<Vec<_>>()
        )));
    }
    if before.is_empty() {
        return Err(Error::EmptyInput);
    }
    let sum: f64 = before.iter().map(|(k, b)| after[k] - b).sum();
    Ok(sum / before.len() as f64)
}
