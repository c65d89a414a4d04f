//! Node-importance estimators: topology baselines, feature regressors and a
//! relation-aware message-passing network, all trained by full-batch
//! gradient descent with hand-derived gradients.

mod checkpoint;
mod gnn;
mod linreg;
mod mlp;
mod pagerank;

use std::collections::{BTreeSet, HashMap};

use ndarray::Array2;
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::kg::{EntityId, ImportanceLabel, KnowledgeGraph};

pub use checkpoint::{read_checkpoint, write_checkpoint};
pub use gnn::{gnn_loss_and_grad, RelationalAdjacency};
pub use linreg::linreg_loss_and_grad;
pub use mlp::mlp_loss_and_grad;
pub use pagerank::{pagerank, personalized_pagerank, PageRankResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Pagerank,
    Ppr,
    Linreg,
    Mlp,
    Gnn,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Pagerank => "pagerank",
            ModelKind::Ppr => "ppr",
            ModelKind::Linreg => "linreg",
            ModelKind::Mlp => "mlp",
            ModelKind::Gnn => "gnn",
        }
    }

    /// PageRank variants ignore features and learning rates.
    pub fn is_topological(self) -> bool {
        matches!(self, ModelKind::Pagerank | ModelKind::Ppr)
    }

    fn code(self) -> u8 {
        match self {
            ModelKind::Pagerank => 0,
            ModelKind::Ppr => 1,
            ModelKind::Linreg => 2,
            ModelKind::Mlp => 3,
            ModelKind::Gnn => 4,
        }
    }

    fn from_code(c: u8) -> Option<Self> {
        Some(match c {
            0 => ModelKind::Pagerank,
            1 => ModelKind::Ppr,
            2 => ModelKind::Linreg,
            3 => ModelKind::Mlp,
            4 => ModelKind::Gnn,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    #[serde(default = "d_hidden")]
    pub hidden_dim: usize,
    #[serde(default = "d_layers")]
    pub layers: usize,
    #[serde(default = "d_lr")]
    pub learning_rate: f64,
    #[serde(default = "d_epochs")]
    pub epochs: usize,
    #[serde(default = "d_l2")]
    pub l2: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "d_damping")]
    pub damping: f64,
    #[serde(default = "d_pr_tol")]
    pub pr_tol: f64,
    #[serde(default = "d_pr_iters")]
    pub pr_max_iters: usize,
}

fn d_hidden() -> usize {
    64
}
fn d_layers() -> usize {
    2
}
fn d_lr() -> f64 {
    0.01
}
fn d_epochs() -> usize {
    200
}
fn d_l2() -> f64 {
    1e-5
}
fn d_damping() -> f64 {
    0.85
}
fn d_pr_tol() -> f64 {
    1e-9
}
fn d_pr_iters() -> usize {
    200
}

impl ModelConfig {
    pub fn new(kind: ModelKind) -> Self {
        Self {
            kind,
            hidden_dim: d_hidden(),
            layers: d_layers(),
            learning_rate: d_lr(),
            epochs: d_epochs(),
            l2: d_l2(),
            seed: 0,
            damping: d_damping(),
            pr_tol: d_pr_tol(),
            pr_max_iters: d_pr_iters(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("hidden_dim", self.hidden_dim),
            ("layers", self.layers),
            ("epochs", self.epochs),
            ("pr_max_iters", self.pr_max_iters),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(Error::Config("l2 must be non-negative".into()));
        }
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(Error::Config("damping must lie in (0, 1)".into()));
        }
        if !(self.pr_tol > 0.0) {
            return Err(Error::Config("pr_tol must be positive".into()));
        }
        Ok(())
    }
}

/// Initial node features `h^(0)`: one row per node id.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeFeatureTable {
    nodes: Vec<EntityId>,
    features: Array2<f64>,
    index: HashMap<EntityId, usize>,
}

impl NodeFeatureTable {
    pub fn new(nodes: Vec<EntityId>, features: Array2<f64>) -> Result<Self> {
        if nodes.len() != features.nrows() {
            return Err(Error::Contract(format!(
                "{} node ids for {} feature rows",
                nodes.len(),
                features.nrows()
            )));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite feature value".into()));
        }
        let mut index = HashMap::with_capacity(nodes.len());
        for (row, &v) in nodes.iter().enumerate() {
            if index.insert(v, row).is_some() {
                return Err(Error::Contract(format!("node {v} has two feature rows")));
            }
        }
        Ok(Self {
            nodes,
            features,
            index,
        })
    }

    pub fn from_embeddings(nodes: Vec<EntityId>, emb: &EmbeddingMatrix) -> Result<Self> {
        let features = Array2::from_shape_vec((emb.rows(), emb.dim()), emb.to_f64())
            .map_err(|e| Error::Contract(e.to_string()))?;
        Self::new(nodes, features)
    }

    pub fn nodes(&self) -> &[EntityId] {
        &self.nodes
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn row_of(&self, node: EntityId) -> Option<usize> {
        self.index.get(&node).copied()
    }

    /// Feature rows for `nodes`, in order.
    pub fn gather(&self, nodes: &[EntityId]) -> Result<Array2<f64>> {
        let mut out = Array2::zeros((nodes.len(), self.dim()));
        for (i, &v) in nodes.iter().enumerate() {
            let r = self.row_of(v).ok_or(Error::Lookup {
                what: "feature row for node",
                id: v,
            })?;
            out.row_mut(i).assign(&self.features.row(r));
        }
        Ok(out)
    }

    /// A dense `n × dim` matrix with zero rows for nodes lacking features.
    pub fn dense(&self, n: usize) -> Array2<f64> {
        let mut out = Array2::zeros((n, self.dim()));
        for (r, &v) in self.nodes.iter().enumerate() {
            if v < n {
                out.row_mut(v).assign(&self.features.row(r));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub kind: ModelKind,
    /// Parameter tensors in the per-kind layout documented on each trainer.
    pub params: Vec<Array2<f64>>,
    pub loss_trace: Vec<f64>,
    /// GNN shape: message-passing layers and relation count.
    pub layers: usize,
    pub num_relations: usize,
    /// PageRank settings for the topological kinds.
    pub damping: f64,
    pub pr_tol: f64,
    pub pr_max_iters: usize,
    pub restart: Vec<EntityId>,
    /// Warnings raised while training (e.g. constant labels).
    pub notes: Vec<String>,
}

impl TrainedModel {
    fn new(kind: ModelKind, config: &ModelConfig) -> Self {
        Self {
            kind,
            params: Vec::new(),
            loss_trace: Vec::new(),
            layers: 0,
            num_relations: 0,
            damping: config.damping,
            pr_tol: config.pr_tol,
            pr_max_iters: config.pr_max_iters,
            restart: Vec::new(),
            notes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub nodes: Vec<EntityId>,
    pub scores: Vec<f64>,
    pub warnings: Vec<String>,
}

impl Prediction {
    pub fn score_of(&self, node: EntityId) -> Option<f64> {
        self.nodes.iter().position(|&v| v == node).map(|i| self.scores[i])
    }
}

/// Glorot-uniform matrix: `U(-a, a)` with `a = sqrt(6 / (fan_in + fan_out))`.
pub(crate) fn glorot(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let a = (6.0 / (rows + cols) as f64).sqrt();
    let dist = Uniform::new_inclusive(-a, a);
    Array2::from_shape_simple_fn((rows, cols), || dist.sample(rng))
}

pub(crate) fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn diverged(epoch: usize, lr: f64) -> Error {
    Error::Training(format!(
        "loss became non-finite at epoch {epoch} with learning rate {lr}; try a smaller learning rate"
    ))
}

fn split_labels(labels: &[ImportanceLabel]) -> (Vec<EntityId>, Vec<f64>) {
    labels.iter().map(|l| (l.node, l.value)).unzip()
}

fn check_training_set(labels: &[ImportanceLabel], features: &NodeFeatureTable) -> Result<()> {
    if features.dim() == 0 {
        return Err(Error::Config("features have zero dimensions".into()));
    }
    if labels.len() < 2 {
        return Err(Error::Config(format!(
            "need at least 2 training examples, got {}",
            labels.len()
        )));
    }
    if labels.iter().any(|l| !l.value.is_finite()) {
        return Err(Error::Numeric("non-finite label".into()));
    }
    Ok(())
}

/// Trains the model described by `config` on the labeled training nodes.
///
/// `kg` supplies the topology for PageRank variants and the GNN; `features`
/// are ignored by the topological kinds.
pub fn train(
    config: &ModelConfig,
    kg: &KnowledgeGraph,
    features: &NodeFeatureTable,
    labels: &[ImportanceLabel],
) -> Result<TrainedModel> {
    config.validate()?;
    match config.kind {
        ModelKind::Pagerank => Ok(TrainedModel::new(ModelKind::Pagerank, config)),
        ModelKind::Ppr => {
            let mut m = TrainedModel::new(ModelKind::Ppr, config);
            m.restart = labels
                .iter()
                .map(|l| l.node)
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            if m.restart.is_empty() {
                return Err(Error::Config("PPR restart set (labeled nodes) is empty".into()));
            }
            Ok(m)
        }
        ModelKind::Linreg => linreg::train_linear_regression(features, labels, config),
        ModelKind::Mlp => mlp::train_mlp(features, labels, config),
        ModelKind::Gnn => gnn::train_hetero_gnn(kg, features, labels, config),
    }
}

/// Scores `nodes` with a trained model. Pure: repeated calls agree exactly.
pub fn predict_scores(
    model: &TrainedModel,
    kg: &KnowledgeGraph,
    features: &NodeFeatureTable,
    nodes: &[EntityId],
) -> Result<Prediction> {
    let mut warnings = Vec::new();
    let scores = match model.kind {
        ModelKind::Pagerank | ModelKind::Ppr => {
            let r = if model.kind == ModelKind::Pagerank {
                pagerank(kg, model.damping, model.pr_tol, model.pr_max_iters)?
            } else {
                let restart = model.restart.iter().copied().collect();
                personalized_pagerank(kg, &restart, model.damping, model.pr_tol, model.pr_max_iters)?
            };
            if !r.converged {
                warnings.push(format!("PageRank did not converge in {} iterations", r.iterations));
            }
            nodes
                .iter()
                .map(|&v| {
                    r.scores.get(v).copied().ok_or(Error::Lookup { what: "entity", id: v })
                })
                .collect::<Result<Vec<_>>>()?
        }
        ModelKind::Linreg => linreg::predict(model, &features.gather(nodes)?),
        ModelKind::Mlp => mlp::predict(model, &features.gather(nodes)?),
        ModelKind::Gnn => {
            for &v in nodes {
                if v >= kg.num_entities() {
                    return Err(Error::Lookup { what: "entity", id: v });
                }
            }
            let (all, w) = gnn::predict_all(model, kg, features)?;
            warnings.extend(w);
            nodes.iter().map(|&v| all[v]).collect()
        }
    };
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::Numeric("model produced a non-finite score".into()));
    }
    Ok(Prediction {
        nodes: nodes.to_vec(),
        scores,
        warnings,
    })
}
