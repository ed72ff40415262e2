use alloc::vec;

use super::layers::Activation;
use super::tensor::Tensor;

/// Probabilities are clamped to `[PROB_CLAMP, 1 − PROB_CLAMP]` before the
/// logarithm.
pub const PROB_CLAMP: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LossKind {
    CategoricalCrossEntropy,
    MeanSquaredError,
}

impl LossKind {
    pub fn tag(self) -> &'static str {
        match self {
            LossKind::CategoricalCrossEntropy => "cce",
            LossKind::MeanSquaredError => "mse",
        }
    }
}

/// Batch mean of `−Σ y log p` for cross-entropy; mean over all entries of
/// the squared error for MSE.
pub fn loss(outputs: &Tensor, targets: &Tensor, kind: LossKind) -> f64 {
    assert_eq!(outputs.shape, targets.shape, "loss operands differ in shape");
    let m = outputs.batch().max(1) as f64;
    match kind {
        LossKind::CategoricalCrossEntropy => {
            -outputs
                .data
                .iter()
                .zip(&targets.data)
                .map(|(p, y)| y * p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP).ln())
                .sum::<f64>()
                / m
        }
        LossKind::MeanSquaredError => {
            outputs.data.iter().zip(&targets.data).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
                / outputs.len().max(1) as f64
        }
    }
}

/// Loss and its gradient. For cross-entropy on a softmax output the
/// gradient is taken at the logits, `(p − y)/m`, and the flag is set.
pub fn loss_and_grad(outputs: &Tensor, targets: &Tensor, kind: LossKind, out_act: Activation) -> (f64, Tensor, bool) {
    let j = loss(outputs, targets, kind);
    let m = outputs.batch().max(1) as f64;
    let mut g = vec![0.0; outputs.len()];
    let at_logits = match kind {
        LossKind::CategoricalCrossEntropy if out_act == Activation::Softmax => {
            for ((g, p), y) in g.iter_mut().zip(&outputs.data).zip(&targets.data) {
                *g = (p - y) / m;
            }
            true
        }
        LossKind::CategoricalCrossEntropy => {
            for ((g, p), y) in g.iter_mut().zip(&outputs.data).zip(&targets.data) {
                let inside = *p > PROB_CLAMP && *p < 1.0 - PROB_CLAMP;
                *g = if inside { -y / (p * m) } else { 0.0 };
            }
            false
        }
        LossKind::MeanSquaredError => {
            let n = outputs.len().max(1) as f64;
            for ((g, a), b) in g.iter_mut().zip(&outputs.data).zip(&targets.data) {
                *g = 2.0 * (a - b) / n;
            }
            false
        }
    };
    (j, Tensor { shape: outputs.shape.clone(), data: g }, at_logits)
}
