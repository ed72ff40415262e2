//! Central finite-difference check of the backward pass.

use super::loss::{loss, loss_and_grad, LossKind};
use super::network::Network;
use super::tensor::Tensor;
use crate::error::Result;

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheck {
    pub max_rel_error: f64,
    pub worst_layer: alloc::string::String,
    pub n_checked: usize,
}

/// Compare every trainable parameter's analytic gradient with
/// `(J(θ + h) − J(θ − h)) / 2h`. Relative error is
/// `|a − n| / max(|a|, |n|, floor)`.
pub fn gradient_check(net: &mut Network, inputs: &[&Tensor], y: &Tensor, kind: LossKind, h: f64, floor: f64) -> Result<GradCheck> {
    net.zero_grad();
    let out = net.forward(inputs, true)?;
    let (_, g, at_logits) = loss_and_grad(&out, y, kind, net.output_activation());
    net.backward(&g, at_logits)?;
    let analytic: alloc::vec::Vec<(alloc::string::String, alloc::vec::Vec<f64>)> = net
        .params_mut()
        .into_iter()
        .map(|p| (p.layer.into(), p.grad.map(|g| g.clone()).unwrap_or_default()))
        .collect();
    let mut worst = GradCheck { max_rel_error: 0.0, worst_layer: "".into(), n_checked: 0 };
    for (slot, (layer, grad)) in analytic.iter().enumerate() {
        for (i, &a) in grad.iter().enumerate() {
            let mut eval = |delta: f64| -> Result<f64> {
                let orig = {
                    let mut v = net.params_mut();
                    let x = v[slot].values[i];
                    v[slot].values[i] = x + delta;
                    x
                };
                let o = net.forward(inputs, true)?;
                net.params_mut()[slot].values[i] = orig;
                Ok(loss(&o, y, kind))
            };
            let num = (eval(h)? - eval(-h)?) / (2.0 * h);
            let rel = (a - num).abs() / a.abs().max(num.abs()).max(floor);
            worst.n_checked += 1;
            if rel > worst.max_rel_error {
                worst.max_rel_error = rel;
                worst.worst_layer.clone_from(layer);
            }
        }
    }
    Ok(worst)
}
