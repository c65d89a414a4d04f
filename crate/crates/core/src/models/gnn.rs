//! Relation-aware message passing.
//!
//! Layer update: `H' = ReLU(H W_self + Σ_r (A_r H) W_r + b)`, where row `i` of
//! `A_r H` is the mean of `H` over the neighbours joined to `i` by relation
//! `r` in either direction (zero when there are none). The score is
//! `H_L w_out + b_out`.
//!
//! Parameter layout: for each layer `[W_self, W_0 .. W_{R-1}, b]`, then
//! `[w_out, b_out]`.

use ndarray::{Array1, Array2, Axis};

use super::{diverged, glorot, seeded_rng, ModelConfig, ModelKind, NodeFeatureTable, TrainedModel};
use crate::error::{Error, Result};
use crate::kg::{ImportanceLabel, KnowledgeGraph};

/// Row-normalised, symmetrised adjacency per relation.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationalAdjacency {
    n: usize,
    /// `rows[r][i]` = `(neighbour, 1 / |N_r(i)|)` with distinct neighbours.
    rows: Vec<Vec<Vec<(usize, f64)>>>,
    ignored_edges: usize,
}

impl RelationalAdjacency {
    /// Builds adjacency for relations `0..num_relations`; edges of any other
    /// relation are dropped and counted.
    pub fn new(kg: &KnowledgeGraph, num_relations: usize) -> Self {
        let n = kg.num_entities();
        let mut sets = vec![vec![Vec::<usize>::new(); n]; num_relations];
        let mut ignored_edges = 0;
        for t in kg.triplets() {
            if t.relation >= num_relations {
                ignored_edges += 1;
                continue;
            }
            sets[t.relation][t.head].push(t.tail);
            if t.head != t.tail {
                sets[t.relation][t.tail].push(t.head);
            }
        }
        let rows = sets
            .into_iter()
            .map(|per_node| {
                per_node
                    .into_iter()
                    .map(|mut nb| {
                        nb.sort_unstable();
                        nb.dedup();
                        let w = 1.0 / nb.len().max(1) as f64;
                        nb.into_iter().map(|j| (j, w)).collect()
                    })
                    .collect()
            })
            .collect();
        Self {
            n,
            rows,
            ignored_edges,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.n
    }

    pub fn num_relations(&self) -> usize {
        self.rows.len()
    }

    pub fn ignored_edges(&self) -> usize {
        self.ignored_edges
    }

    /// `A_r h`.
    fn aggregate(&self, r: usize, h: &Array2<f64>) -> Array2<f64> {
        let mut out = Array2::zeros(h.raw_dim());
        for (i, nb) in self.rows[r].iter().enumerate() {
            let mut row = out.row_mut(i);
            for &(j, w) in nb {
                row.scaled_add(w, &h.row(j));
            }
        }
        out
    }

    /// `A_rᵀ d`.
    fn scatter(&self, r: usize, d: &Array2<f64>, out: &mut Array2<f64>) {
        for (i, nb) in self.rows[r].iter().enumerate() {
            let src = d.row(i);
            for &(j, w) in nb {
                out.row_mut(j).scaled_add(w, &src);
            }
        }
    }
}

struct Forward {
    /// `H_0 .. H_L`.
    hs: Vec<Array2<f64>>,
    /// Pre-activations per layer.
    zs: Vec<Array2<f64>>,
    /// Aggregated inputs per layer and relation.
    ms: Vec<Vec<Array2<f64>>>,
    scores: Array1<f64>,
}

fn layer_params(params: &[Array2<f64>], layer: usize, num_rel: usize) -> &[Array2<f64>] {
    let stride = num_rel + 2;
    &params[layer * stride..(layer + 1) * stride]
}

fn forward(
    params: &[Array2<f64>],
    adj: &RelationalAdjacency,
    x: &Array2<f64>,
    m0: Option<&[Array2<f64>]>,
    layers: usize,
) -> Forward {
    let num_rel = adj.num_relations();
    let mut hs = vec![x.clone()];
    let mut zs = Vec::with_capacity(layers);
    let mut ms = Vec::with_capacity(layers);
    for l in 0..layers {
        let p = layer_params(params, l, num_rel);
        let h = &hs[l];
        let m: Vec<Array2<f64>> = match (l, m0) {
            (0, Some(pre)) => pre.to_vec(),
            _ => (0..num_rel).map(|r| adj.aggregate(r, h)).collect(),
        };
        let mut z = h.dot(&p[0]);
        for (r, mr) in m.iter().enumerate() {
            z += &mr.dot(&p[1 + r]);
        }
        z += &p[num_rel + 1];
        hs.push(z.mapv(|v| v.max(0.0)));
        zs.push(z);
        ms.push(m);
    }
    let head = layers * (num_rel + 2);
    let scores = hs[layers].dot(&params[head]).column(0).to_owned() + params[head + 1][[0, 0]];
    Forward { hs, zs, ms, scores }
}

fn loss_and_grad_inner(
    params: &[Array2<f64>],
    adj: &RelationalAdjacency,
    x: &Array2<f64>,
    m0: Option<&[Array2<f64>]>,
    layers: usize,
    train: &[usize],
    y: &Array1<f64>,
    l2: f64,
) -> (f64, Vec<Array2<f64>>) {
    let num_rel = adj.num_relations();
    let stride = num_rel + 2;
    let f = forward(params, adj, x, m0, layers);
    let m = train.len() as f64;

    let mut ds = Array1::zeros(adj.num_nodes());
    let mut loss = 0.0;
    for (&i, &yi) in train.iter().zip(y) {
        let r = f.scores[i] - yi;
        loss += r * r;
        ds[i] += 2.0 * r / m;
    }
    loss /= m;
    let is_weight = |idx: usize| idx == layers * stride || (idx < layers * stride && idx % stride != stride - 1);
    loss += l2 * params
        .iter()
        .enumerate()
        .filter(|(i, _)| is_weight(*i))
        .map(|(_, p)| p.mapv(|v| v * v).sum())
        .sum::<f64>();

    let mut grads: Vec<Array2<f64>> = params.iter().map(|p| Array2::zeros(p.raw_dim())).collect();
    let head = layers * stride;
    let ds = ds.insert_axis(Axis(1));
    grads[head] = f.hs[layers].t().dot(&ds);
    grads[head + 1][[0, 0]] = ds.sum();
    let mut dh = ds.dot(&params[head].t());

    for l in (0..layers).rev() {
        let p = layer_params(params, l, num_rel);
        let mut dz = dh;
        dz.zip_mut_with(&f.zs[l], |d, &z| {
            if z <= 0.0 {
                *d = 0.0;
            }
        });
        let base = l * stride;
        grads[base] = f.hs[l].t().dot(&dz);
        for r in 0..num_rel {
            grads[base + 1 + r] = f.ms[l][r].t().dot(&dz);
        }
        grads[base + num_rel + 1] = dz.sum_axis(Axis(0)).insert_axis(Axis(0));
        if l == 0 {
            break;
        }
        let mut prev = dz.dot(&p[0].t());
        for r in 0..num_rel {
            let dm = dz.dot(&p[1 + r].t());
            adj.scatter(r, &dm, &mut prev);
        }
        dh = prev;
    }
    for (i, g) in grads.iter_mut().enumerate() {
        if is_weight(i) {
            g.scaled_add(2.0 * l2, &params[i]);
        }
    }
    (loss, grads)
}

/// MSE over the `train` node indices (with targets `y`) plus `l2` times the
/// squared norm of every weight matrix, and the gradient of each tensor.
pub fn gnn_loss_and_grad(
    params: &[Array2<f64>],
    adj: &RelationalAdjacency,
    x: &Array2<f64>,
    layers: usize,
    train: &[usize],
    y: &Array1<f64>,
    l2: f64,
) -> (f64, Vec<Array2<f64>>) {
    loss_and_grad_inner(params, adj, x, None, layers, train, y, l2)
}

pub(crate) fn init_params(
    in_dim: usize,
    hidden: usize,
    layers: usize,
    num_rel: usize,
    seed: u64,
) -> Vec<Array2<f64>> {
    let mut rng = seeded_rng(seed);
    let mut params = Vec::new();
    for l in 0..layers {
        let fan_in = if l == 0 { in_dim } else { hidden };
        for _ in 0..=num_rel {
            params.push(glorot(fan_in, hidden, &mut rng));
        }
        params.push(Array2::zeros((1, hidden)));
    }
    params.push(glorot(hidden, 1, &mut rng));
    params.push(Array2::zeros((1, 1)));
    params
}

pub(crate) fn train_hetero_gnn(
    kg: &KnowledgeGraph,
    features: &NodeFeatureTable,
    labels: &[ImportanceLabel],
    config: &ModelConfig,
) -> Result<TrainedModel> {
    super::check_training_set(labels, features)?;
    let n = kg.num_entities();
    if let Some(l) = labels.iter().find(|l| l.node >= n) {
        return Err(Error::Lookup { what: "entity", id: l.node });
    }
    let num_rel = kg.num_relations();
    let adj = RelationalAdjacency::new(kg, num_rel);
    let x = features.dense(n);
    let m0: Vec<Array2<f64>> = (0..num_rel).map(|r| adj.aggregate(r, &x)).collect();
    let train: Vec<usize> = labels.iter().map(|l| l.node).collect();
    let y: Array1<f64> = labels.iter().map(|l| l.value).collect();

    let mut params = init_params(x.ncols(), config.hidden_dim, config.layers, num_rel, config.seed);
    let mut model = TrainedModel::new(ModelKind::Gnn, config);
    model.layers = config.layers;
    model.num_relations = num_rel;
    for epoch in 0..=config.epochs {
        let (loss, grads) =
            loss_and_grad_inner(&params, &adj, &x, Some(&m0), config.layers, &train, &y, config.l2);
        if !loss.is_finite() {
            return Err(diverged(epoch, config.learning_rate));
        }
        model.loss_trace.push(loss);
        if epoch == config.epochs {
            break;
        }
        for (p, g) in params.iter_mut().zip(&grads) {
            p.scaled_add(-config.learning_rate, g);
        }
    }
    model.params = params;
    Ok(model)
}

/// Scores for every entity of `kg`, plus warnings.
pub(crate) fn predict_all(
    model: &TrainedModel,
    kg: &KnowledgeGraph,
    features: &NodeFeatureTable,
) -> Result<(Vec<f64>, Vec<String>)> {
    let adj = RelationalAdjacency::new(kg, model.num_relations);
    let mut warnings = Vec::new();
    if adj.ignored_edges() > 0 {
        let msg = format!(
            "{} edges use relations unseen in training and were ignored",
            adj.ignored_edges()
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let in_dim = model.params[0].nrows();
    if features.dim() != in_dim {
        return Err(Error::Contract(format!(
            "model expects {in_dim}-dimensional features, got {}",
            features.dim()
        )));
    }
    let x = features.dense(kg.num_entities());
    let f = forward(&model.params, &adj, &x, None, model.layers);
    Ok((f.scores.to_vec(), warnings))
}
