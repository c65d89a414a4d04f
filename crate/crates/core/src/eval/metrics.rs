//! Regression and ranking metrics for importance predictions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check(pred: &[f64], truth: &[f64]) -> Result<()> {
    if pred.len() != truth.len() {
        return Err(Error::Contract(format!(
            "prediction length {} differs from truth length {}",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::Contract("metrics need at least one item".into()));
    }
    if pred.iter().chain(truth).any(|v| !v.is_finite()) {
        return Err(Error::Numeric("metric inputs must be finite".into()));
    }
    Ok(())
}

pub fn rmse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check(pred, truth)?;
    let sse: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok((sse / pred.len() as f64).sqrt())
}

pub fn median_ae(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check(pred, truth)?;
    let mut errs: Vec<f64> = pred.iter().zip(truth).map(|(p, t)| (p - t).abs()).collect();
    errs.sort_by(f64::total_cmp);
    let n = errs.len();
    Ok(if n % 2 == 1 {
        errs[n / 2]
    } else {
        (errs[n / 2 - 1] + errs[n / 2]) / 2.0
    })
}

/// Indices sorted by value descending; equal values keep ascending index.
fn rank_desc(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx
}

/// NDCG@k with linear gain `truth` and `log2(i + 1)` discount.
pub fn ndcg_at_k(pred: &[f64], truth: &[f64], k: usize) -> Result<f64> {
    check(pred, truth)?;
    if k == 0 {
        return Err(Error::Config("NDCG cutoff k must be at least 1".into()));
    }
    if truth.iter().any(|&t| t < 0.0) {
        return Err(Error::Domain("NDCG needs non-negative relevance values".into()));
    }
    let dcg = |order: &[usize]| -> f64 {
        order
            .iter()
            .take(k)
            .enumerate()
            .map(|(i, &j)| truth[j] / ((i + 2) as f64).log2())
            .sum()
    };
    let idcg = dcg(&rank_desc(truth));
    if idcg == 0.0 {
        return Ok(1.0);
    }
    Ok(dcg(&rank_desc(pred)) / idcg)
}

/// 1-based ranks with ties sharing the mean of their rank range.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && values[idx[end]] == values[idx[start]] {
            end += 1;
        }
        let avg = (start + end + 1) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va == 0.0 || vb == 0.0 {
        return None;
    }
    Some((cov / (va.sqrt() * vb.sqrt())).clamp(-1.0, 1.0))
}

pub fn spearman_corr(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check(pred, truth)?;
    if pred.len() < 2 {
        return Err(Error::Contract("Spearman correlation needs at least 2 items".into()));
    }
    pearson(&average_ranks(pred), &average_ranks(truth)).ok_or_else(|| {
        Error::Numeric("Spearman correlation is undefined for constant rankings".into())
    })
}

/// `|top-k(pred) ∩ top-k(truth)| / min(k, n)`.
pub fn overlap_at_k(pred: &[f64], truth: &[f64], k: usize) -> Result<f64> {
    check(pred, truth)?;
    if k == 0 {
        return Err(Error::Config("overlap cutoff k must be at least 1".into()));
    }
    let m = k.min(pred.len());
    let mut top_truth = vec![false; truth.len()];
    for &i in rank_desc(truth).iter().take(m) {
        top_truth[i] = true;
    }
    let hits = rank_desc(pred).iter().take(m).filter(|&&i| top_truth[i]).count();
    Ok(hits as f64 / m as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub rmse: f64,
    pub median_ae: f64,
    pub ndcg_at_k: f64,
    pub spearman: f64,
    pub overlap_at_k: f64,
    pub k: usize,
}

impl MetricReport {
    pub const NAMES: [&'static str; 5] = ["rmse", "median_ae", "ndcg_at_k", "spearman", "overlap_at_k"];

    /// All five metrics. An undefined Spearman correlation (constant
    /// predictions) is reported as 0 with a warning.
    pub fn compute(pred: &[f64], truth: &[f64], k: usize) -> Result<(Self, Vec<String>)> {
        let mut warnings = Vec::new();
        let spearman = match spearman_corr(pred, truth) {
            Ok(v) => v,
            Err(Error::Numeric(msg)) => {
                warnings.push(format!("{msg}; reported as 0"));
                0.0
            }
            Err(e) => return Err(e),
        };
        Ok((
            Self {
                rmse: rmse(pred, truth)?,
                median_ae: median_ae(pred, truth)?,
                ndcg_at_k: ndcg_at_k(pred, truth, k)?,
                spearman,
                overlap_at_k: overlap_at_k(pred, truth, k)?,
                k,
            },
            warnings,
        ))
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        Some(match name {
            "rmse" => self.rmse,
            "median_ae" => self.median_ae,
            "ndcg_at_k" => self.ndcg_at_k,
            "spearman" => self.spearman,
            "overlap_at_k" => self.overlap_at_k,
            _ => return None,
        })
    }
}
