//! Multi-branch network: one convolutional stack per input image, feature
//! concatenation, and a dense head.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::layers::{Activation, BatchNorm, Conv, Dense, Dropout, MaxPool};
use super::tensor::Tensor;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LayerSpec {
    /// 3×3 convolution with "same" padding.
    Conv { filters: usize, activation: Activation },
    BatchNorm,
    /// 2×2, stride 2.
    MaxPool,
    Flatten,
    Dense { units: usize, activation: Activation },
    Dropout { rate: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkSpec {
    /// (channels, height, width) of every branch input.
    pub input: [usize; 3],
    pub branches: Vec<Vec<LayerSpec>>,
    pub head: Vec<LayerSpec>,
    pub seed: u64,
}

fn conv_block(filters: usize) -> [LayerSpec; 3] {
    [LayerSpec::Conv { filters, activation: Activation::Relu }, LayerSpec::BatchNorm, LayerSpec::MaxPool]
}

fn branch(filters: &[usize]) -> Vec<LayerSpec> {
    let mut b: Vec<LayerSpec> = filters.iter().flat_map(|&f| conv_block(f)).collect();
    b.push(LayerSpec::Flatten);
    b
}

impl NetworkSpec {
    /// Layup classifier: conv 16/32/64 per branch, dense 16, softmax 3.
    pub fn classifier(resolution: usize, seed: u64) -> Self {
        let b = branch(&[16, 32, 64]);
        NetworkSpec {
            input: [1, resolution, resolution],
            branches: vec![b.clone(), b],
            head: vec![
                LayerSpec::Dense { units: 16, activation: Activation::Relu },
                LayerSpec::Dense { units: 3, activation: Activation::Softmax },
            ],
            seed,
        }
    }

    /// Property regressor: conv 16/32/64/128 per branch, dense 256 with
    /// dropout 0.13, linear 6.
    pub fn regressor(resolution: usize, seed: u64) -> Self {
        let b = branch(&[16, 32, 64, 128]);
        NetworkSpec {
            input: [1, resolution, resolution],
            branches: vec![b.clone(), b],
            head: vec![
                LayerSpec::Dense { units: 256, activation: Activation::Relu },
                LayerSpec::Dropout { rate: 0.13 },
                LayerSpec::Dense { units: 6, activation: Activation::Linear },
            ],
            seed,
        }
    }

    /// Small two-branch network for gradient checks.
    pub fn tiny(resolution: usize, outputs: usize, activation: Activation, seed: u64) -> Self {
        let b = branch(&[2]);
        NetworkSpec {
            input: [1, resolution, resolution],
            branches: vec![b.clone(), b],
            head: vec![
                LayerSpec::Dense { units: 4, activation: Activation::Relu },
                LayerSpec::Dense { units: outputs, activation },
            ],
            seed,
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) enum Layer {
    Conv(Conv),
    BatchNorm(BatchNorm),
    MaxPool(MaxPool),
    Flatten,
    Dense(Dense),
    Dropout(Dropout),
}

impl Layer {
    fn kind(&self) -> &'static str {
        match self {
            Layer::Conv(_) => "conv2d",
            Layer::BatchNorm(_) => "batch_norm",
            Layer::MaxPool(_) => "max_pool",
            Layer::Flatten => "flatten",
            Layer::Dense(_) => "dense",
            Layer::Dropout(_) => "dropout",
        }
    }
}

/// One row of the parameter table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamRow {
    pub name: String,
    pub kind: &'static str,
    /// Output shape without the batch dimension.
    pub output: Vec<usize>,
    pub trainable: usize,
    pub non_trainable: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParamCounts {
    pub trainable: usize,
    pub non_trainable: usize,
    pub total: usize,
}

/// A named parameter array. `grad` is `None` for non-trainable state.
pub struct ParamView<'a> {
    pub layer: &'a str,
    pub values: &'a mut Vec<f64>,
    pub grad: Option<&'a mut Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct Network {
    pub spec: NetworkSpec,
    pub(crate) branches: Vec<Vec<Layer>>,
    pub(crate) head: Vec<Layer>,
    branch_names: Vec<Vec<String>>,
    head_names: Vec<String>,
    branch_widths: Vec<usize>,
    table: Vec<ParamRow>,
    rng: ChaCha8Rng,
}

fn mismatch(layer: &str, detail: String) -> Error {
    Error::ShapeMismatch { layer: layer.to_string(), detail }
}

/// Instantiate one chain, returning its layers, names and the output shape.
fn build_chain(
    specs: &[LayerSpec],
    mut shape: Vec<usize>,
    prefix: &str,
    rng: &mut ChaCha8Rng,
    table: &mut Vec<ParamRow>,
) -> Result<(Vec<Layer>, Vec<String>, Vec<usize>)> {
    let mut layers = Vec::new();
    let mut names = Vec::new();
    let mut counters = [0usize; 6];
    for s in specs {
        let (layer, idx) = match *s {
            LayerSpec::Conv { filters, activation } => {
                let name = format!("{prefix}conv2d_{}", counters[0]);
                let [c, h, w] = shape[..] else {
                    return Err(mismatch(&name, format!("convolution needs a (c, h, w) input, got {shape:?}")));
                };
                if activation == Activation::Softmax || filters == 0 {
                    return Err(mismatch(&name, "unsupported convolution settings".into()));
                }
                shape = vec![filters, h, w];
                (Layer::Conv(Conv::new(c, filters, h, w, activation, rng)), 0)
            }
            LayerSpec::BatchNorm => {
                let (c, sp) = match shape[..] {
                    [c, h, w] => (c, h * w),
                    [f] => (f, 1),
                    _ => return Err(mismatch(&format!("{prefix}batch_norm_{}", counters[1]), format!("{shape:?}"))),
                };
                (Layer::BatchNorm(BatchNorm::new(c, sp)), 1)
            }
            LayerSpec::MaxPool => {
                let name = format!("{prefix}max_pool_{}", counters[2]);
                let [c, h, w] = shape[..] else {
                    return Err(mismatch(&name, format!("pooling needs a (c, h, w) input, got {shape:?}")));
                };
                if h < 2 || w < 2 {
                    return Err(mismatch(&name, format!("input {h}x{w} too small to pool")));
                }
                let p = MaxPool::new(c, h, w);
                let (oh, ow) = p.out_dims();
                shape = vec![c, oh, ow];
                (Layer::MaxPool(p), 2)
            }
            LayerSpec::Flatten => {
                shape = vec![shape.iter().product()];
                (Layer::Flatten, 3)
            }
            LayerSpec::Dense { units, activation } => {
                let name = format!("{prefix}dense_{}", counters[4]);
                let [f] = shape[..] else {
                    return Err(mismatch(&name, format!("dense needs a flat input, got {shape:?}")));
                };
                if units == 0 {
                    return Err(mismatch(&name, "zero units".into()));
                }
                shape = vec![units];
                (Layer::Dense(Dense::new(f, units, activation, rng)), 4)
            }
            LayerSpec::Dropout { rate } => {
                if !(0.0..1.0).contains(&rate) {
                    return Err(mismatch(&format!("{prefix}dropout_{}", counters[5]), format!("rate {rate}")));
                }
                (Layer::Dropout(Dropout::new(rate)), 5)
            }
        };
        let name = format!("{prefix}{}_{}", layer.kind(), counters[idx]);
        counters[idx] += 1;
        let (trainable, non_trainable) = match &layer {
            Layer::Conv(c) => (c.weight.len() + c.bias.len(), 0),
            Layer::BatchNorm(b) => (2 * b.channels, 2 * b.channels),
            Layer::Dense(d) => (d.weight.len() + d.bias.len(), 0),
            _ => (0, 0),
        };
        table.push(ParamRow { name: name.clone(), kind: layer.kind(), output: shape.clone(), trainable, non_trainable });
        names.push(name);
        layers.push(layer);
    }
    Ok((layers, names, shape))
}

impl Network {
    pub fn build(spec: &NetworkSpec) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut table = Vec::new();
        if spec.branches.is_empty() {
            return Err(mismatch("input", "no branches".into()));
        }
        let mut branches = Vec::new();
        let mut branch_names = Vec::new();
        let mut widths = Vec::new();
        for (i, b) in spec.branches.iter().enumerate() {
            let prefix = format!("branch{}/", i + 1);
            let (layers, names, out) = build_chain(b, spec.input.to_vec(), &prefix, &mut rng, &mut table)?;
            let [w] = out[..] else {
                return Err(mismatch(&format!("{prefix}output"), format!("branch must end flat, got {out:?}")));
            };
            branches.push(layers);
            branch_names.push(names);
            widths.push(w);
        }
        let fused: usize = widths.iter().sum();
        table.push(ParamRow { name: "fusion".into(), kind: "concatenate", output: vec![fused], trainable: 0, non_trainable: 0 });
        let (head, head_names, out) = build_chain(&spec.head, vec![fused], "head/", &mut rng, &mut table)?;
        if out.len() != 1 {
            return Err(mismatch("head/output", format!("{out:?}")));
        }
        for (k, l) in head.iter().enumerate() {
            if let Layer::Dense(d) = l {
                if d.act == Activation::Softmax && k + 1 != head.len() {
                    return Err(mismatch(&head_names[k], "softmax is only supported as the output layer".into()));
                }
            }
        }
        Ok(Network {
            spec: spec.clone(),
            branches,
            head,
            branch_names,
            head_names,
            branch_widths: widths,
            table,
            rng: ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5eed_d80b),
        })
    }

    pub fn param_table(&self) -> &[ParamRow] {
        &self.table
    }

    pub fn counts(&self) -> ParamCounts {
        let trainable = self.table.iter().map(|r| r.trainable).sum();
        let non_trainable = self.table.iter().map(|r| r.non_trainable).sum();
        ParamCounts { trainable, non_trainable, total: trainable + non_trainable }
    }

    pub fn fusion_width(&self) -> usize {
        self.branch_widths.iter().sum()
    }

    pub fn outputs(&self) -> usize {
        match self.head.iter().rev().find_map(|l| if let Layer::Dense(d) = l { Some(d.units) } else { None }) {
            Some(u) => u,
            None => self.fusion_width(),
        }
    }

    pub fn output_activation(&self) -> Activation {
        match self.head.last() {
            Some(Layer::Dense(d)) => d.act,
            _ => Activation::Linear,
        }
    }

    /// Reseed the dropout stream.
    pub fn reseed(&mut self, seed: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
    }

    fn run_chain(layers: &mut [Layer], mut x: Vec<f64>, n: usize, train: bool, rng: &mut ChaCha8Rng) -> Vec<f64> {
        for l in layers.iter_mut() {
            x = match l {
                Layer::Conv(c) => c.forward(&x, n),
                Layer::BatchNorm(b) => b.forward(&x, n, train),
                Layer::MaxPool(p) => p.forward(&x, n),
                Layer::Flatten => x,
                Layer::Dense(d) => d.forward(&x, n),
                Layer::Dropout(d) => d.forward(&x, train, rng),
            };
        }
        x
    }

    fn back_chain(layers: &mut [Layer], mut d: Vec<f64>, n: usize) -> Vec<f64> {
        for l in layers.iter_mut().rev() {
            d = match l {
                Layer::Conv(c) => c.backward(&d, n),
                Layer::BatchNorm(b) => b.backward(&d, n),
                Layer::MaxPool(p) => p.backward(&d, n),
                Layer::Flatten => d,
                Layer::Dense(x) => x.backward(&d, n),
                Layer::Dropout(x) => x.backward(&d),
            };
        }
        d
    }

    /// One input tensor (N, C, H, W) per branch, in branch order.
    pub fn forward(&mut self, inputs: &[&Tensor], train: bool) -> Result<Tensor> {
        if inputs.len() != self.branches.len() {
            return Err(mismatch("input", format!("{} inputs for {} branches", inputs.len(), self.branches.len())));
        }
        let n = inputs[0].batch();
        for (i, t) in inputs.iter().enumerate() {
            if t.shape.len() != 4 || t.shape[1..] != self.spec.input[..] || t.batch() != n {
                return Err(mismatch(
                    &format!("branch{}/input", i + 1),
                    format!("expected (n={n}, {:?}), got {:?}", self.spec.input, t.shape),
                ));
            }
        }
        let fused_w = self.fusion_width();
        let mut fused = vec![0.0; n * fused_w];
        let mut off = 0;
        for (b, t) in self.branches.iter_mut().zip(inputs) {
            let out = Self::run_chain(b, t.data.clone(), n, train, &mut self.rng);
            let w = out.len() / n.max(1);
            for s in 0..n {
                fused[s * fused_w + off..s * fused_w + off + w].copy_from_slice(&out[s * w..(s + 1) * w]);
            }
            off += w;
        }
        let out = Self::run_chain(&mut self.head, fused, n, train, &mut self.rng);
        let k = out.len() / n.max(1);
        Tensor::new(vec![n, k], out)
    }

    /// Back-propagate `grad` (with respect to the outputs, or to the output
    /// logits when `at_logits` is set) and accumulate parameter gradients.
    pub fn backward(&mut self, grad: &Tensor, at_logits: bool) -> Result<()> {
        let n = grad.batch();
        let mut d = grad.data.clone();
        let mut head_end = self.head.len();
        if at_logits {
            match self.head.last_mut() {
                Some(Layer::Dense(last)) => {
                    d = last.backward_pre(&d, n);
                    head_end -= 1;
                }
                _ => return Err(mismatch("head/output", "logit gradient needs a dense output layer".into())),
            }
        }
        let d = Self::back_chain(&mut self.head[..head_end], d, n);
        let fused_w = self.fusion_width();
        let mut off = 0;
        for (b, &w) in self.branches.iter_mut().zip(&self.branch_widths) {
            let mut part = vec![0.0; n * w];
            for s in 0..n {
                part[s * w..(s + 1) * w].copy_from_slice(&d[s * fused_w + off..s * fused_w + off + w]);
            }
            Self::back_chain(b, part, n);
            off += w;
        }
        Ok(())
    }

    /// Every parameter array in declaration order: per layer, weights then
    /// biases (or scale, shift, running mean, running variance).
    pub fn params_mut(&mut self) -> Vec<ParamView<'_>> {
        let mut v = Vec::new();
        let chains = self.branches.iter_mut().zip(self.branch_names.iter()).chain(core::iter::once((&mut self.head, &self.head_names)));
        for (layers, names) in chains {
            for (l, name) in layers.iter_mut().zip(names.iter()) {
                match l {
                    Layer::Conv(c) => {
                        v.push(ParamView { layer: name, values: &mut c.weight, grad: Some(&mut c.gw) });
                        v.push(ParamView { layer: name, values: &mut c.bias, grad: Some(&mut c.gb) });
                    }
                    Layer::Dense(d) => {
                        v.push(ParamView { layer: name, values: &mut d.weight, grad: Some(&mut d.gw) });
                        v.push(ParamView { layer: name, values: &mut d.bias, grad: Some(&mut d.gb) });
                    }
                    Layer::BatchNorm(b) => {
                        v.push(ParamView { layer: name, values: &mut b.gamma, grad: Some(&mut b.g_gamma) });
                        v.push(ParamView { layer: name, values: &mut b.beta, grad: Some(&mut b.g_beta) });
                        v.push(ParamView { layer: name, values: &mut b.running_mean, grad: None });
                        v.push(ParamView { layer: name, values: &mut b.running_var, grad: None });
                    }
                    _ => {}
                }
            }
        }
        v
    }

    pub fn zero_grad(&mut self) {
        for p in self.params_mut() {
            if let Some(g) = p.grad {
                g.fill(0.0);
            }
        }
    }

    /// Copy of all parameter arrays, in [`Network::params_mut`] order.
    pub fn export(&mut self) -> Vec<Vec<f64>> {
        self.params_mut().into_iter().map(|p| p.values.clone()).collect()
    }

    pub fn import(&mut self, arrays: &[Vec<f64>]) -> Result<()> {
        let mut views = self.params_mut();
        if views.len() != arrays.len() {
            return Err(mismatch("checkpoint", format!("{} arrays for {} parameter slots", arrays.len(), views.len())));
        }
        for (v, a) in views.iter_mut().zip(arrays) {
            if v.values.len() != a.len() {
                return Err(mismatch(v.layer, format!("{} values for {}", a.len(), v.values.len())));
            }
        }
        for (v, a) in views.into_iter().zip(arrays) {
            v.values.copy_from_slice(a);
        }
        Ok(())
    }

    /// Same function with branches 1 and 2 exchanged: the caller feeds the
    /// inputs in swapped order. The first head layer's input blocks are
    /// permuted to match.
    pub fn swapped_branches(&self) -> Result<Network> {
        if self.branches.len() != 2 || self.branch_widths[0] != self.branch_widths[1] {
            return Err(mismatch("fusion", "branch swap needs two branches of equal width".into()));
        }
        let mut n = self.clone();
        n.branches.swap(0, 1);
        let w = self.branch_widths[0];
        if let Some(Layer::Dense(d)) = n.head.first_mut() {
            let u = d.units;
            let (a, b) = d.weight.split_at_mut(w * u);
            a.swap_with_slice(b);
        } else {
            return Err(mismatch("head", "branch swap needs a dense first head layer".into()));
        }
        Ok(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_audit() {
        let c = Network::build(&NetworkSpec::classifier(128, 0)).unwrap();
        assert_eq!(c.counts(), ParamCounts { trainable: 571_395, non_trainable: 448, total: 571_843 });
        assert_eq!(c.fusion_width(), 32768);
        let dense: Vec<_> = c.param_table().iter().filter(|r| r.kind == "dense").map(|r| r.trainable).collect();
        assert_eq!(dense, vec![524_304, 51]);
        let r = Network::build(&NetworkSpec::regressor(128, 0)).unwrap();
        assert_eq!(r.counts(), ParamCounts { trainable: 4_391_366, non_trainable: 960, total: 4_392_326 });
        let blocks: Vec<usize> = r
            .param_table()
            .iter()
            .filter(|x| x.name.starts_with("branch1/") && x.trainable > 0)
            .map(|x| x.trainable + x.non_trainable)
            .collect();
        assert_eq!(blocks, vec![160, 64, 4640, 128, 18496, 256, 73856, 512]);
    }

    #[test]
    fn single_dense_layer_count() {
        let spec = NetworkSpec {
            input: [3, 1, 1],
            branches: vec![vec![LayerSpec::Flatten]],
            head: vec![LayerSpec::Dense { units: 2, activation: Activation::Linear }],
            seed: 0,
        };
        assert_eq!(Network::build(&spec).unwrap().counts().total, 8);
    }

    #[test]
    fn shape_errors_name_the_layer() {
        let spec = NetworkSpec {
            input: [1, 8, 8],
            branches: vec![vec![LayerSpec::Dense { units: 2, activation: Activation::Linear }]],
            head: vec![],
            seed: 0,
        };
        match Network::build(&spec) {
            Err(Error::ShapeMismatch { layer, .. }) => assert_eq!(layer, "branch1/dense_0"),
            other => panic!("{other:?}"),
        }
        let mut net = Network::build(&NetworkSpec::tiny(8, 3, Activation::Softmax, 0)).unwrap();
        let bad = Tensor::zeros(vec![1, 1, 4, 4]);
        assert!(matches!(net.forward(&[&bad, &bad], false), Err(Error::ShapeMismatch { .. })));
    }

    fn batch(n: usize, res: usize, seed: f64) -> Tensor {
        let d = (0..n * res * res).map(|i| (((i as f64) * 0.377 + seed).sin() > 0.3) as u8 as f64).collect();
        Tensor::new(vec![n, 1, res, res], d).unwrap()
    }

    #[test]
    fn zero_network_is_uniform() {
        let mut net = Network::build(&NetworkSpec::classifier(16, 1)).unwrap();
        for p in net.params_mut() {
            if p.grad.is_some() && !p.layer.contains("batch_norm") {
                p.values.fill(0.0);
            }
        }
        let (a, b) = (batch(3, 16, 0.0), batch(3, 16, 1.0));
        for train in [false, true] {
            let o = net.forward(&[&a, &b], train).unwrap();
            assert!(o.data.iter().all(|p| (p - 1.0 / 3.0).abs() < 1e-15));
        }
    }

    #[test]
    fn softmax_rows_are_normalised() {
        let mut net = Network::build(&NetworkSpec::classifier(16, 2)).unwrap();
        let o = net.forward(&[&batch(5, 16, 0.3), &batch(5, 16, 2.0)], true).unwrap();
        for i in 0..5 {
            assert!((o.row(i).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn softmax_cross_entropy_gradient_is_p_minus_y() {
        use crate::nn::layers::Dense;
        use crate::nn::loss::PROB_CLAMP;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut d = Dense::new(5, 3, Activation::Softmax, &mut rng);
        let x: Vec<f64> = (0..10).map(|i| (i as f64).cos()).collect();
        let p = d.forward(&x, 2);
        let y = [0.0, 1.0, 0.0, 1.0, 0.0, 0.0];
        // dJ/dp of the batch-mean cross-entropy, pushed through the generic
        // softmax Jacobian.
        let dp: Vec<f64> = p.iter().zip(&y).map(|(p, y)| -y / (p.max(PROB_CLAMP) * 2.0)).collect();
        let dz = d.preactivation_grad(&dp);
        for k in 0..6 {
            assert!((dz[k] - (p[k] - y[k]) / 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_gradient_step_keeps_parameters() {
        let mut net = Network::build(&NetworkSpec::tiny(8, 3, Activation::Softmax, 1)).unwrap();
        let before = net.export();
        net.zero_grad();
        let mut adam = crate::nn::Adam::new(1e-3);
        adam.step(&mut net).unwrap();
        assert_eq!(net.export(), before);
    }

    #[test]
    fn non_finite_gradient_names_layer() {
        let mut net = Network::build(&NetworkSpec::tiny(8, 3, Activation::Softmax, 1)).unwrap();
        net.zero_grad();
        if let Some(g) = net.params_mut().into_iter().find(|p| p.layer == "head/dense_1").and_then(|p| p.grad) {
            g[0] = f64::NAN;
        }
        let before = net.export();
        match crate::nn::Adam::new(1e-3).step(&mut net) {
            Err(Error::NonFiniteGradient { layer }) => assert_eq!(layer, "head/dense_1"),
            other => panic!("{other:?}"),
        }
        assert_eq!(net.export(), before);
    }

    #[test]
    fn swapping_branches_and_inputs_is_invisible() {
        let mut net = Network::build(&NetworkSpec::regressor(16, 6)).unwrap();
        let mut sw = net.swapped_branches().unwrap();
        let (a, b) = (batch(4, 16, 0.0), batch(4, 16, 0.7));
        let x = net.forward(&[&a, &b], false).unwrap();
        let y = sw.forward(&[&b, &a], false).unwrap();
        for (p, q) in x.data.iter().zip(&y.data) {
            assert!((p - q).abs() <= 1e-12 * p.abs().max(1.0));
        }
    }

    #[test]
    fn smoke_training_reduces_loss() {
        use crate::nn::loss::LossKind;
        use crate::nn::train::train_step;
        let mut net = Network::build(&NetworkSpec::classifier(32, 0)).unwrap();
        let mut adam = crate::nn::Adam::new(1e-3);
        let (a, b) = (batch(4, 32, 0.0), batch(4, 32, 0.9));
        let y = Tensor::new(vec![4, 3], vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0]).unwrap();
        let first = train_step(&mut net, &mut adam, &a, &b, &y, LossKind::CategoricalCrossEntropy).unwrap();
        let mut last = first;
        for _ in 0..49 {
            last = train_step(&mut net, &mut adam, &a, &b, &y, LossKind::CategoricalCrossEntropy).unwrap();
        }
        assert!(last < 0.5 * first, "{first} -> {last}");
    }
}
