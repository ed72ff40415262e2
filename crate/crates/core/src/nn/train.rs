//! Mini-batch training with per-epoch shuffling, min-max label scaling and
//! early stopping.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::loss::{loss, loss_and_grad, LossKind};
use super::metrics;
use super::network::Network;
use super::optim::Adam;
use super::tensor::Tensor;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Targets {
    Classes { labels: Vec<usize>, n_classes: usize },
    /// Row-major, `width` values per sample.
    Values { values: Vec<f64>, width: usize },
}

/// Image pairs (one per branch) with their targets. Images are stored as
/// flat `res × res` planes with values in [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct PairDataset {
    pub res: usize,
    pub s0: Vec<f64>,
    pub a0: Vec<f64>,
    pub targets: Targets,
}

impl PairDataset {
    pub fn len(&self) -> usize {
        self.s0.len() / (self.res * self.res).max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn images(&self, idx: &[usize]) -> (Tensor, Tensor) {
        let p = self.res * self.res;
        let pick = |src: &[f64]| {
            let mut d = Vec::with_capacity(idx.len() * p);
            for &i in idx {
                d.extend_from_slice(&src[i * p..(i + 1) * p]);
            }
            Tensor { shape: vec![idx.len(), 1, self.res, self.res], data: d }
        };
        (pick(&self.s0), pick(&self.a0))
    }

    /// Targets as network outputs: one-hot rows, or (scaled) values.
    pub fn target_tensor(&self, idx: &[usize], scale: Option<&MinMax>) -> Tensor {
        match &self.targets {
            Targets::Classes { labels, n_classes } => {
                let mut d = vec![0.0; idx.len() * n_classes];
                for (r, &i) in idx.iter().enumerate() {
                    d[r * n_classes + labels[i]] = 1.0;
                }
                Tensor { shape: vec![idx.len(), *n_classes], data: d }
            }
            Targets::Values { values, width } => {
                let mut d = Vec::with_capacity(idx.len() * width);
                for &i in idx {
                    let row = &values[i * width..(i + 1) * width];
                    match scale {
                        Some(s) => d.extend(s.apply(row)),
                        None => d.extend_from_slice(row),
                    }
                }
                Tensor { shape: vec![idx.len(), *width], data: d }
            }
        }
    }
}

/// Per-column min-max scaling to [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct MinMax {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl MinMax {
    pub fn fit(values: &[f64], width: usize, idx: &[usize]) -> Self {
        let mut lo = vec![f64::INFINITY; width];
        let mut hi = vec![f64::NEG_INFINITY; width];
        for &i in idx {
            for k in 0..width {
                lo[k] = lo[k].min(values[i * width + k]);
                hi[k] = hi[k].max(values[i * width + k]);
            }
        }
        MinMax { lo, hi }
    }

    fn span(&self, k: usize) -> f64 {
        let s = self.hi[k] - self.lo[k];
        if s > 0.0 {
            s
        } else {
            1.0
        }
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter().enumerate().map(|(k, v)| (v - self.lo[k]) / self.span(k)).collect()
    }

    pub fn invert(&self, row: &[f64]) -> Vec<f64> {
        row.iter().enumerate().map(|(k, v)| self.lo[k] + v * self.span(k)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainerConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub loss: LossKind,
    pub seed: u64,
    /// Epochs without improvement before stopping.
    pub patience: usize,
    pub min_delta: f64,
}

impl TrainerConfig {
    pub fn classification() -> Self {
        TrainerConfig {
            learning_rate: 1e-3,
            batch_size: 4,
            epochs: 250,
            loss: LossKind::CategoricalCrossEntropy,
            seed: 0,
            patience: 50,
            min_delta: 1e-6,
        }
    }

    pub fn regression() -> Self {
        TrainerConfig {
            learning_rate: 1e-5,
            batch_size: 16,
            epochs: 5000,
            loss: LossKind::MeanSquaredError,
            seed: 0,
            patience: 50,
            min_delta: 1e-6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || self.batch_size == 0 {
            return Err(Error::InvalidInput(alloc::format!("learning rate {} / batch size {}", self.learning_rate, self.batch_size)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub loss: f64,
    pub val_loss: f64,
    /// Accuracy for classification, mean MAPE (%) for regression.
    pub metric: f64,
    pub val_metric: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct History {
    pub epochs: Vec<EpochLog>,
    /// Epoch whose parameters were kept.
    pub best_epoch: usize,
    pub stopped_early: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome {
    pub history: History,
    /// Label scaling fitted on the training split (regression only).
    pub normalizer: Option<MinMax>,
}

/// Seeded shuffle split into (train, validation).
pub fn split_indices(n: usize, val_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_val = (n as f64 * val_fraction).round() as usize;
    let val = idx.split_off(n - n_val.min(n));
    (idx, val)
}

/// One optimisation step on a batch. Returns the batch loss.
pub fn train_step(net: &mut Network, adam: &mut Adam, s0: &Tensor, a0: &Tensor, y: &Tensor, kind: LossKind) -> Result<f64> {
    net.zero_grad();
    let out = net.forward(&[s0, a0], true)?;
    let (j, g, at_logits) = loss_and_grad(&out, y, kind, net.output_activation());
    net.backward(&g, at_logits)?;
    adam.step(net)?;
    Ok(j)
}

/// Network outputs (evaluation mode) for `idx`, de-scaled when a
/// normaliser is given.
pub fn predict(net: &mut Network, data: &PairDataset, idx: &[usize], scale: Option<&MinMax>) -> Result<Tensor> {
    let k = net.outputs();
    let mut out = Vec::with_capacity(idx.len() * k);
    for chunk in idx.chunks(32) {
        let (s0, a0) = data.images(chunk);
        let o = net.forward(&[&s0, &a0], false)?;
        match scale {
            Some(s) => o.data.chunks(k).for_each(|r| out.extend(s.invert(r))),
            None => out.extend_from_slice(&o.data),
        }
    }
    Tensor::new(vec![idx.len(), k], out)
}

fn metric(pred: &Tensor, data: &PairDataset, idx: &[usize]) -> f64 {
    match &data.targets {
        Targets::Classes { labels, .. } => {
            let truth: Vec<usize> = idx.iter().map(|&i| labels[i]).collect();
            metrics::accuracy(&pred.argmax_rows(), &truth)
        }
        Targets::Values { .. } => {
            let truth = data.target_tensor(idx, None);
            match metrics::mape(&pred.data, &truth.data, truth.shape[1]) {
                Ok(m) => m.iter().sum::<f64>() / m.len() as f64,
                Err(_) => f64::NAN,
            }
        }
    }
}

/// Loss (on scaled targets) and metric (on original units) of a split.
fn assess(net: &mut Network, data: &PairDataset, idx: &[usize], cfg: &TrainerConfig, scale: Option<&MinMax>) -> Result<(f64, f64)> {
    let raw = predict(net, data, idx, None)?;
    let y = data.target_tensor(idx, scale);
    let j = loss(&raw, &y, cfg.loss);
    let shown = match scale {
        Some(s) => {
            let k = raw.shape[1];
            let d: Vec<f64> = raw.data.chunks(k).flat_map(|r| s.invert(r)).collect();
            Tensor { shape: raw.shape.clone(), data: d }
        }
        None => raw,
    };
    Ok((j, metric(&shown, data, idx)))
}

/// Train on `train_idx`, validating on `val_idx` after every epoch. Stops
/// after `patience` epochs without a validation-loss improvement larger
/// than `min_delta` and restores the best parameters.
pub fn train(
    net: &mut Network,
    data: &PairDataset,
    train_idx: &[usize],
    val_idx: &[usize],
    cfg: &TrainerConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if train_idx.is_empty() {
        return Err(Error::DatasetTooSmall("training split is empty"));
    }
    if val_idx.is_empty() {
        return Err(Error::DatasetTooSmall("validation split is empty"));
    }
    let normalizer = match &data.targets {
        Targets::Values { values, width } => Some(MinMax::fit(values, *width, train_idx)),
        Targets::Classes { .. } => None,
    };
    let scale = normalizer.as_ref();
    let mut adam = Adam::new(cfg.learning_rate);
    let mut order = train_idx.to_vec();
    let mut history = History { epochs: Vec::new(), best_epoch: 0, stopped_early: false };
    let mut best = (f64::INFINITY, net.export());
    let mut stale = 0;
    for epoch in 1..=cfg.epochs {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(epoch as u64);
        order.shuffle(&mut rng);
        net.reseed(cfg.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ epoch as u64);
        let mut sum = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let (s0, a0) = data.images(chunk);
            let y = data.target_tensor(chunk, scale);
            sum += train_step(net, &mut adam, &s0, &a0, &y, cfg.loss)? * chunk.len() as f64;
        }
        let train_loss = sum / order.len() as f64;
        let (_, train_metric) = assess(net, data, train_idx, cfg, scale)?;
        let (val_loss, val_metric) = assess(net, data, val_idx, cfg, scale)?;
        history.epochs.push(EpochLog { epoch, loss: train_loss, val_loss, metric: train_metric, val_metric });
        if best.0 - val_loss > cfg.min_delta {
            best = (val_loss, net.export());
            history.best_epoch = epoch;
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                history.stopped_early = true;
                break;
            }
        }
    }
    if history.best_epoch > 0 {
        net.import(&best.1)?;
    }
    Ok(TrainOutcome { history, normalizer })
}
