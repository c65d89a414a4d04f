//! One-hidden-layer perceptron; parameters `[W1 (d×h), b1 (1×h), w2 (h×1), b2 (1×1)]`.

use ndarray::{Array1, Array2, Axis};

use super::{check_training_set, diverged, glorot, seeded_rng, split_labels, ModelConfig, ModelKind, NodeFeatureTable, TrainedModel};
use crate::error::Result;
use crate::kg::ImportanceLabel;

fn forward(params: &[Array2<f64>], x: &Array2<f64>) -> (Array2<f64>, Array2<f64>, Array1<f64>) {
    let z = x.dot(&params[0]) + &params[1];
    let h = z.mapv(|v| v.max(0.0));
    let s = h.dot(&params[2]).column(0).to_owned() + params[3][[0, 0]];
    (z, h, s)
}

/// Mean squared error plus `l2` times the squared norms of both weight
/// matrices, with gradients for all four tensors.
pub fn mlp_loss_and_grad(
    params: &[Array2<f64>],
    x: &Array2<f64>,
    y: &Array1<f64>,
    l2: f64,
) -> (f64, Vec<Array2<f64>>) {
    let m = x.nrows() as f64;
    let (z, h, s) = forward(params, x);
    let resid = s - y;
    let loss = resid.mapv(|r| r * r).sum() / m
        + l2 * (params[0].mapv(|v| v * v).sum() + params[2].mapv(|v| v * v).sum());

    let ds = (resid * (2.0 / m)).insert_axis(Axis(1));
    let gw2 = h.t().dot(&ds) + &params[2] * (2.0 * l2);
    let gb2 = Array2::from_elem((1, 1), ds.sum());
    let mut dz = ds.dot(&params[2].t());
    dz.zip_mut_with(&z, |d, &zv| {
        if zv <= 0.0 {
            *d = 0.0;
        }
    });
    let gw1 = x.t().dot(&dz) + &params[0] * (2.0 * l2);
    let gb1 = dz.sum_axis(Axis(0)).insert_axis(Axis(0));
    (loss, vec![gw1, gb1, gw2, gb2])
}

pub(crate) fn init_params(d: usize, h: usize, seed: u64) -> Vec<Array2<f64>> {
    let mut rng = seeded_rng(seed);
    vec![
        glorot(d, h, &mut rng),
        Array2::zeros((1, h)),
        glorot(h, 1, &mut rng),
        Array2::zeros((1, 1)),
    ]
}

pub(crate) fn train_mlp(
    features: &NodeFeatureTable,
    labels: &[ImportanceLabel],
    config: &ModelConfig,
) -> Result<TrainedModel> {
    check_training_set(labels, features)?;
    let (nodes, y) = split_labels(labels);
    let x = features.gather(&nodes)?;
    let y = Array1::from(y);
    let mut params = init_params(x.ncols(), config.hidden_dim, config.seed);
    let mut model = TrainedModel::new(ModelKind::Mlp, config);
    for epoch in 0..config.epochs {
        let (loss, grads) = mlp_loss_and_grad(&params, &x, &y, config.l2);
        if !loss.is_finite() {
            return Err(diverged(epoch, config.learning_rate));
        }
        model.loss_trace.push(loss);
        for (p, g) in params.iter_mut().zip(&grads) {
            p.scaled_add(-config.learning_rate, g);
        }
    }
    let (loss, _) = mlp_loss_and_grad(&params, &x, &y, config.l2);
    if !loss.is_finite() {
        return Err(diverged(config.epochs, config.learning_rate));
    }
    model.loss_trace.push(loss);
    model.params = params;
    Ok(model)
}

pub(crate) fn predict(model: &TrainedModel, x: &Array2<f64>) -> Vec<f64> {
    forward(&model.params, x).2.to_vec()
}
