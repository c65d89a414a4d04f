//! Lloyd's k-means with k-means++ seeding over squared Euclidean distance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterResult {
    pub dim: usize,
    /// `k` centers, row-major.
    pub centers: Vec<f64>,
    pub assignments: Vec<usize>,
    pub inertia: f64,
    /// Inertia after every assignment step, final assignment last.
    pub inertia_trace: Vec<f64>,
    pub iterations: usize,
}

impl ClusterResult {
    pub fn k(&self) -> usize {
        self.centers.len() / self.dim.max(1)
    }

    pub fn center(&self, j: usize) -> &[f64] {
        &self.centers[j * self.dim..(j + 1) * self.dim]
    }
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest center for every point (ties go to the lower center index),
/// with the squared distance to it.
fn assign(points: &[f64], dim: usize, centers: &[f64]) -> Vec<(usize, f64)> {
    points
        .par_chunks(dim)
        .map(|p| {
            let mut best = (0, f64::INFINITY);
            for (j, c) in centers.chunks_exact(dim).enumerate() {
                let d = sq_dist(p, c);
                if d < best.1 {
                    best = (j, d);
                }
            }
            best
        })
        .collect()
}

fn seed_centers(points: &[f64], dim: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = points.len() / dim;
    let row = |i: usize| &points[i * dim..(i + 1) * dim];
    let first = rng.gen_range(0..n);
    let mut centers = row(first).to_vec();
    let mut nearest: Vec<f64> = (0..n).map(|i| sq_dist(row(i), row(first))).collect();
    for _ in 1..k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for (i, &w) in nearest.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    chosen = Some(i);
                    break;
                }
            }
            // Rounding can leave `target` past the final partial sum.
            chosen.unwrap_or_else(|| nearest.iter().rposition(|&w| w > 0.0).unwrap())
        } else {
            rng.gen_range(0..n)
        };
        centers.extend_from_slice(row(pick));
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(sq_dist(row(i), row(pick)));
        }
    }
    centers
}

/// Fits `k` clusters to the row-major `points` (each row `dim` wide).
pub fn kmeans_fit(
    points: &[f64],
    dim: usize,
    k: usize,
    seed: u64,
    max_iters: usize,
    tol: f64,
) -> Result<ClusterResult> {
    if dim == 0 || points.is_empty() || points.len() % dim != 0 {
        return Err(Error::Config(format!(
            "{} values do not form rows of width {dim}",
            points.len()
        )));
    }
    let n = points.len() / dim;
    if k == 0 || k > n {
        return Err(Error::Config(format!("k must be in 1..={n}, got {k}")));
    }
    if max_iters == 0 {
        return Err(Error::Config("kmeans_max_iters must be positive".into()));
    }
    if let Some(bad) = points.iter().position(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("point {} is not finite", bad / dim)));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = seed_centers(points, dim, k, &mut rng);
    let mut trace = Vec::new();
    let mut iterations = 0;

    for _ in 0..max_iters {
        iterations += 1;
        let mut nearest = assign(points, dim, &centers);
        trace.push(nearest.iter().map(|&(_, d)| d).sum());

        repair_empty(points, dim, k, &mut centers, &mut nearest);

        let mut sums = vec![0.0; k * dim];
        let mut counts = vec![0usize; k];
        for (i, &(j, _)) in nearest.iter().enumerate() {
            counts[j] += 1;
            for (s, p) in sums[j * dim..(j + 1) * dim]
                .iter_mut()
                .zip(&points[i * dim..(i + 1) * dim])
            {
                *s += p;
            }
        }
        let mut shift = 0.0f64;
        for j in 0..k {
            let c = &mut centers[j * dim..(j + 1) * dim];
            let mean: Vec<f64> = sums[j * dim..(j + 1) * dim]
                .iter()
                .map(|s| s / counts[j] as f64)
                .collect();
            shift = shift.max(sq_dist(c, &mean).sqrt());
            c.copy_from_slice(&mean);
        }
        if shift < tol {
            break;
        }
    }

    let nearest = assign(points, dim, &centers);
    let inertia: f64 = nearest.iter().map(|&(_, d)| d).sum();
    trace.push(inertia);
    Ok(ClusterResult {
        dim,
        centers,
        assignments: nearest.into_iter().map(|(j, _)| j).collect(),
        inertia,
        inertia_trace: trace,
        iterations,
    })
}

/// Moves every empty cluster's center onto the point farthest from its own
/// center, then assigns that point to it.
fn repair_empty(
    points: &[f64],
    dim: usize,
    k: usize,
    centers: &mut [f64],
    nearest: &mut [(usize, f64)],
) {
    loop {
        let mut counts = vec![0usize; k];
        for &(j, _) in nearest.iter() {
            counts[j] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        // Only donors with at least two points, so no new empty cluster appears.
        let far = nearest
            .iter()
            .enumerate()
            .filter(|(_, (j, _))| counts[*j] > 1)
            .fold(None::<(usize, f64)>, |best, (i, &(_, d))| match best {
                Some((_, bd)) if bd >= d => best,
                _ => Some((i, d)),
            });
        let Some((i, _)) = far else { return };
        centers[empty * dim..(empty + 1) * dim].copy_from_slice(&points[i * dim..(i + 1) * dim]);
        nearest[i] = (empty, 0.0);
    }
}
