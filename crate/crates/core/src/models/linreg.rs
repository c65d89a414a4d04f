//! Linear regression; parameters `[w (d×1), b (1×1)]`.

use ndarray::{Array1, Array2, Axis};

use super::{check_training_set, diverged, split_labels, ModelConfig, ModelKind, NodeFeatureTable, TrainedModel};
use crate::error::Result;
use crate::kg::ImportanceLabel;

/// `mean((Xw + b - y)^2) + l2 * |w|^2` and its gradient.
pub fn linreg_loss_and_grad(
    params: &[Array2<f64>],
    x: &Array2<f64>,
    y: &Array1<f64>,
    l2: f64,
) -> (f64, Vec<Array2<f64>>) {
    let (w, b) = (&params[0], params[1][[0, 0]]);
    let m = x.nrows() as f64;
    let resid = x.dot(w).column(0).to_owned() + b - y;
    let loss = resid.mapv(|r| r * r).sum() / m + l2 * w.mapv(|v| v * v).sum();
    let r = resid.insert_axis(Axis(1));
    let gw = x.t().dot(&r) * (2.0 / m) + w * (2.0 * l2);
    let gb = Array2::from_elem((1, 1), 2.0 * r.sum() / m);
    (loss, vec![gw, gb])
}

pub(crate) fn train_linear_regression(
    features: &NodeFeatureTable,
    labels: &[ImportanceLabel],
    config: &ModelConfig,
) -> Result<TrainedModel> {
    check_training_set(labels, features)?;
    let (nodes, y) = split_labels(labels);
    let x = features.gather(&nodes)?;
    let y = Array1::from(y);
    let mut model = TrainedModel::new(ModelKind::Linreg, config);

    if y.iter().all(|&v| v == y[0]) {
        model.params = vec![Array2::zeros((x.ncols(), 1)), Array2::from_elem((1, 1), y[0])];
        model.loss_trace = vec![0.0];
        model.notes.push("labels are all equal; fitted a constant predictor".into());
        return Ok(model);
    }

    let mut params = vec![Array2::zeros((x.ncols(), 1)), Array2::zeros((1, 1))];
    for epoch in 0..config.epochs {
        let (loss, grads) = linreg_loss_and_grad(&params, &x, &y, config.l2);
        if !loss.is_finite() {
            return Err(diverged(epoch, config.learning_rate));
        }
        model.loss_trace.push(loss);
        for (p, g) in params.iter_mut().zip(&grads) {
            p.scaled_add(-config.learning_rate, g);
        }
    }
    let (loss, _) = linreg_loss_and_grad(&params, &x, &y, config.l2);
    if !loss.is_finite() {
        return Err(diverged(config.epochs, config.learning_rate));
    }
    model.loss_trace.push(loss);
    model.params = params;
    Ok(model)
}

pub(crate) fn predict(model: &TrainedModel, x: &Array2<f64>) -> Vec<f64> {
    let b = model.params[1][[0, 0]];
    x.dot(&model.params[0]).column(0).iter().map(|v| v + b).collect()
}
