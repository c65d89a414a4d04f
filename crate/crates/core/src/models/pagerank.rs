//! Power-iteration PageRank over the directed head→tail triplet edges.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::kg::{EntityId, KnowledgeGraph};

#[derive(Debug, Clone, PartialEq)]
pub struct PageRankResult {
    pub scores: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Global PageRank: uniform teleport.
pub fn pagerank(kg: &KnowledgeGraph, damping: f64, tol: f64, max_iters: usize) -> Result<PageRankResult> {
    let n = kg.num_entities();
    if n == 0 {
        return Err(Error::Config("PageRank needs a non-empty graph".into()));
    }
    power_iteration(kg, &vec![1.0 / n as f64; n], damping, tol, max_iters)
}

/// PageRank with teleport (and dangling mass) spread uniformly over `restart`.
pub fn personalized_pagerank(
    kg: &KnowledgeGraph,
    restart: &BTreeSet<EntityId>,
    damping: f64,
    tol: f64,
    max_iters: usize,
) -> Result<PageRankResult> {
    if restart.is_empty() {
        return Err(Error::Config("personalized PageRank needs a non-empty restart set".into()));
    }
    let n = kg.num_entities();
    let mut teleport = vec![0.0; n];
    for &v in restart {
        if v >= n {
            return Err(Error::Lookup { what: "entity", id: v });
        }
        teleport[v] = 1.0 / restart.len() as f64;
    }
    power_iteration(kg, &teleport, damping, tol, max_iters)
}

fn power_iteration(
    kg: &KnowledgeGraph,
    teleport: &[f64],
    damping: f64,
    tol: f64,
    max_iters: usize,
) -> Result<PageRankResult> {
    if !(damping > 0.0 && damping < 1.0) {
        return Err(Error::Config(format!("damping must lie in (0, 1), got {damping}")));
    }
    let n = teleport.len();
    // Each triplet is one directed edge; parallel edges add weight.
    let mut out_degree = vec![0usize; n];
    for t in kg.triplets() {
        out_degree[t.head] += 1;
    }
    let mut x = teleport.to_vec();
    let mut next = vec![0.0; n];
    for it in 1..=max_iters {
        let dangling: f64 = (0..n).filter(|&v| out_degree[v] == 0).map(|v| x[v]).sum();
        for (v, nx) in next.iter_mut().enumerate() {
            *nx = (1.0 - damping + damping * dangling) * teleport[v];
        }
        for t in kg.triplets() {
            next[t.tail] += damping * x[t.head] / out_degree[t.head] as f64;
        }
        let delta: f64 = x.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut x, &mut next);
        if delta < tol {
            return Ok(PageRankResult {
                scores: x,
                iterations: it,
                converged: true,
            });
        }
    }
    log::warn!("PageRank did not converge within {max_iters} iterations");
    Ok(PageRankResult {
        scores: x,
        iterations: max_iters,
        converged: false,
    })
}
