//! External benchmark score tables and correlation against them.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{HarnessError, ModelReport};
use crate::metrics::{pearson, predictive_power, MetricError};

/// Rows of (model, benchmark, score) read from a CSV file with the header
/// `model,benchmark,score`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreTable {
    /// benchmark → model → score.
    pub scores: BTreeMap<String, BTreeMap<String, f64>>,
}

#[derive(Debug, Deserialize)]
struct Row {
    model: String,
    benchmark: String,
    score: String,
}

impl ScoreTable {
    pub fn from_path(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_csv(&text).map_err(|message| HarnessError::Format { path: path.into(), message })
    }

    pub fn from_csv(text: &str) -> Result<Self, String> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(text.as_bytes());
        let headers = rdr.headers().map_err(|e| e.to_string())?.clone();
        for h in ["model", "benchmark", "score"] {
            if !headers.iter().any(|x| x == h) {
                return Err(format!("missing column `{h}`"));
            }
        }
        let mut table = ScoreTable::default();
        for (i, row) in rdr.deserialize::<Row>().enumerate() {
            let line = i + 2;
            let row = row.map_err(|e| format!("line {line}: {e}"))?;
            let score: f64 = row.score.parse().map_err(|_| format!("line {line}: score `{}` is not a number", row.score))?;
            if !score.is_finite() {
                return Err(format!("line {line}: score must be finite"));
            }
            let per = table.scores.entry(row.benchmark.clone()).or_default();
            if per.insert(row.model.clone(), score).is_some() {
                return Err(format!("line {line}: duplicate entry for ({}, {})", row.model, row.benchmark));
            }
        }
        Ok(table)
    }
}

/// Per-model score: mean first-round accuracy over buckets whose value is
/// at most `cutoff` (all buckets when unset).
pub fn model_scores(reports: &[ModelReport], cutoff: Option<f64>) -> BTreeMap<String, f64> {
    reports
        .iter()
        .filter_map(|r| {
            let accs: Vec<f64> =
                r.buckets.iter().filter(|b| cutoff.is_none_or(|c| b.value <= c)).map(|b| b.accuracy).collect();
            (!accs.is_empty()).then(|| (r.model.clone(), accs.iter().sum::<f64>() / accs.len() as f64))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub benchmark: String,
    pub models: usize,
    pub rho: Option<f64>,
    pub p_value: Option<f64>,
    pub p_permutation: Option<f64>,
    /// Probability that the benchmark orders two models as our scores do.
    pub power: f64,
    pub power_exact: String,
    pub note: Option<String>,
}

/// Correlates our per-model scores with each benchmark of the table.
/// Benchmarks sharing fewer than two models are skipped; when none is
/// left the overlap is insufficient.
pub fn correlate(ours: &BTreeMap<String, f64>, table: &ScoreTable, strict: bool) -> Result<Vec<CorrelationRow>, HarnessError> {
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for (bench, scores) in &table.scores {
        let shared: BTreeSet<&String> = scores.keys().filter(|m| ours.contains_key(*m)).collect();
        if shared.len() < 2 {
            skipped.push(format!("{bench} shares {} model(s)", shared.len()));
            continue;
        }
        let xs: Vec<f64> = shared.iter().map(|m| scores[*m]).collect();
        let ys: Vec<f64> = shared.iter().map(|m| ours[*m]).collect();
        let mut note = None;
        let (rho, p_value, p_permutation) = match pearson(&ys, &xs) {
            Ok(c) => (Some(c.rho), Some(c.p_value), c.p_permutation),
            Err(e) => {
                note = Some(e.to_string());
                (None, None, None)
            }
        };
        let (power, power_exact) = match predictive_power(&xs, &ys, strict) {
            Ok(p) => (p.value(), p.exact().to_string()),
            Err(MetricError::NoQualifyingPairs) => {
                note = Some("no qualifying pairs for predictive power".into());
                (f64::NAN, "undefined".into())
            }
            Err(e) => return Err(e.into()),
        };
        rows.push(CorrelationRow { benchmark: bench.clone(), models: shared.len(), rho, p_value, p_permutation, power, power_exact, note });
    }
    if rows.is_empty() {
        return Err(HarnessError::InsufficientOverlap(if skipped.is_empty() {
            "the score table is empty".into()
        } else {
            skipped.join("; ")
        }));
    }
    Ok(rows)
}

pub fn correlation_csv(rows: &[CorrelationRow]) -> String {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut out = String::from("benchmark,models,rho,p_value,p_permutation,power,power_exact\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.benchmark,
            r.models,
            opt(r.rho),
            opt(r.p_value),
            opt(r.p_permutation),
            r.power,
            r.power_exact
        ));
    }
    out
}
