//! Training, evaluation and prediction on dataset manifests, and the ridge
//! baseline on shape features.

use std::collections::BTreeMap;

use lambpolar_core::elastic::LayupClass;
use lambpolar_core::features::FeatureVector;
use lambpolar_core::nn::metrics::{accuracy, mape, r2};
use lambpolar_core::nn::ridge::ridge_fit;
use lambpolar_core::nn::train::{predict, train, History, PairDataset, Targets, TrainerConfig};
use lambpolar_core::nn::{Network, NetworkSpec, Tensor};
use lambpolar_core::smm::Mode;
use rayon::prelude::*;

use crate::dataset::{DatasetManifest, ManifestRow, Split};
use crate::error::{AppError, Result};
use crate::io::checkpoint::Checkpoint;
use crate::io::pgm;
use crate::io::tables::FeatureRow;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Task {
    /// Layup class (UD, CP, QI) from an image pair.
    Classify,
    /// The six engineering constants from an image pair.
    Regress,
}

impl Task {
    pub fn tag(self) -> &'static str {
        match self {
            Task::Classify => "classify",
            Task::Regress => "regress",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "classify" => Some(Task::Classify),
            "regress" => Some(Task::Regress),
            _ => None,
        }
    }

    /// Desk-scale defaults. Regression departs from the published
    /// 1e-5 / 5000 epochs, which barely moves within a few hundred epochs.
    /// 150 epochs keeps a 200 x 10 sample run under 4 h on one core.
    pub fn trainer(self) -> TrainerConfig {
        match self {
            Task::Classify => TrainerConfig::classification(),
            Task::Regress => TrainerConfig { learning_rate: 1e-4, epochs: 150, ..TrainerConfig::regression() },
        }
    }

    pub fn network(self, resolution: usize, seed: u64) -> NetworkSpec {
        match self {
            Task::Classify => NetworkSpec::classifier(resolution, seed),
            Task::Regress => NetworkSpec::regressor(resolution, seed),
        }
    }

    /// Classification when the manifest spans several layup classes.
    pub fn infer(m: &DatasetManifest) -> Self {
        if m.classes().len() > 1 {
            Task::Classify
        } else {
            Task::Regress
        }
    }
}

pub const PROPERTY_COLUMNS: [&str; 6] = ["rho", "E1_GPa", "E2_GPa", "G12_GPa", "nu12", "nu23"];

/// Rows of a split (`None` = every usable row).
pub fn rows_of<'a>(m: &'a DatasetManifest, split: Option<Split>) -> Vec<&'a ManifestRow> {
    m.usable().filter(|r| split.is_none_or(|s| r.split == s)).collect()
}

/// Images and targets of `rows`, in order.
pub fn load_pairs(m: &DatasetManifest, rows: &[&ManifestRow], task: Task) -> Result<PairDataset> {
    let res = m.meta.resolution;
    let planes: Vec<(Vec<f64>, Vec<f64>)> = rows
        .par_iter()
        .map(|r| {
            let load = |rel: &str| -> Result<Vec<f64>> {
                let p = m.image_path(rel);
                let img = pgm::read(&p)?;
                if img.width != res || img.height != res {
                    return Err(AppError::format(p, format!("{}x{} image in a {res}px dataset", img.width, img.height)));
                }
                Ok(img.to_unit())
            };
            Ok((load(&r.img_s0)?, load(&r.img_a0)?))
        })
        .collect::<Result<_>>()?;
    let mut s0 = Vec::with_capacity(rows.len() * res * res);
    let mut a0 = Vec::with_capacity(rows.len() * res * res);
    for (a, b) in planes {
        s0.extend(a);
        a0.extend(b);
    }
    let targets = match task {
        Task::Classify => Targets::Classes { labels: rows.iter().map(|r| r.layup_class.index()).collect(), n_classes: 3 },
        Task::Regress => Targets::Values { values: rows.iter().flat_map(|r| r.props).collect(), width: 6 },
    };
    Ok(PairDataset { res, s0, a0, targets })
}

/// Train a fresh network on the manifest's train split, validating on its
/// val split.
pub fn train_on_manifest(m: &DatasetManifest, task: Task, cfg: &TrainerConfig) -> Result<(Checkpoint, History)> {
    let train_rows = rows_of(m, Some(Split::Train));
    let val_rows = rows_of(m, Some(Split::Val));
    let all: Vec<&ManifestRow> = train_rows.iter().chain(&val_rows).copied().collect();
    let data = load_pairs(m, &all, task)?;
    let train_idx: Vec<usize> = (0..train_rows.len()).collect();
    let val_idx: Vec<usize> = (train_rows.len()..all.len()).collect();
    let mut net = Network::build(&task.network(m.meta.resolution, cfg.seed))?;
    log::info!(
        "training {} network ({} parameters) on {} samples, validating on {}",
        task.tag(),
        net.counts().total,
        train_idx.len(),
        val_idx.len()
    );
    let out = train(&mut net, &data, &train_idx, &val_idx, cfg)?;
    Ok((Checkpoint { task, net, normalizer: out.normalizer }, out.history))
}

#[derive(Clone, Debug, PartialEq)]
pub enum Metrics {
    Classification {
        n: usize,
        accuracy: f64,
        /// `confusion[truth][predicted]`.
        confusion: [[usize; 3]; 3],
    },
    Regression {
        n: usize,
        /// Percent, per property.
        mape: Vec<f64>,
        r2: Vec<f64>,
    },
}

/// Network outputs for every sample of `data` (class probabilities, or
/// properties in table units).
pub fn predict_all(ck: &mut Checkpoint, data: &PairDataset) -> Result<Tensor> {
    let idx: Vec<usize> = (0..data.len()).collect();
    Ok(predict(&mut ck.net, data, &idx, ck.normalizer.as_ref())?)
}

pub fn evaluate(ck: &mut Checkpoint, data: &PairDataset) -> Result<Metrics> {
    if data.is_empty() {
        return Err(lambpolar_core::Error::DatasetTooSmall("evaluation split is empty").into());
    }
    let out = predict_all(ck, data)?;
    Ok(match (&data.targets, ck.task) {
        (Targets::Classes { labels, .. }, Task::Classify) => {
            let pred = out.argmax_rows();
            let mut confusion = [[0; 3]; 3];
            for (&t, &p) in labels.iter().zip(&pred) {
                confusion[t][p] += 1;
            }
            Metrics::Classification { n: labels.len(), accuracy: accuracy(&pred, labels), confusion }
        }
        (Targets::Values { values, width }, Task::Regress) => Metrics::Regression {
            n: values.len() / width,
            mape: mape(&out.data, values, *width)?,
            r2: r2(&out.data, values, *width),
        },
        _ => return Err(AppError::Usage(format!("a {} checkpoint cannot score these targets", ck.task.tag()))),
    })
}

/// Twelve inputs per sample: the S0 features followed by the A0 features.
pub fn feature_table(rows: &[FeatureRow]) -> BTreeMap<u64, [f64; 12]> {
    let mut by_id: BTreeMap<u64, [Option<FeatureVector>; 2]> = BTreeMap::new();
    for r in rows {
        let slot = if r.mode == Mode::S0 { 0 } else { 1 };
        by_id.entry(r.sample_id).or_default()[slot] = Some(r.features);
    }
    by_id
        .into_iter()
        .filter_map(|(id, [s, a])| {
            let (s, a) = (s?.to_array(), a?.to_array());
            let mut x = [0.0; 12];
            x[..6].copy_from_slice(&s);
            x[6..].copy_from_slice(&a);
            Some((id, x))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RidgeReport {
    pub alpha: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub mape: Vec<f64>,
    pub r2: Vec<f64>,
}

/// Fit on the train split and score on the val split of the manifest.
pub fn ridge_baseline(m: &DatasetManifest, features: &[FeatureRow], alpha: f64) -> Result<RidgeReport> {
    let table = feature_table(features);
    let gather = |split: Split| -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        rows_of(m, Some(split))
            .iter()
            .filter_map(|r| table.get(&r.sample_id).map(|x| (x.to_vec(), r.props.to_vec())))
            .unzip()
    };
    let (xt, yt) = gather(Split::Train);
    let (xv, yv) = gather(Split::Val);
    if xv.is_empty() {
        return Err(lambpolar_core::Error::DatasetTooSmall("ridge test split is empty").into());
    }
    let model = ridge_fit(&xt, &yt, alpha)?;
    let pred: Vec<f64> = xv.iter().flat_map(|x| model.predict(x)).collect();
    let truth: Vec<f64> = yv.concat();
    Ok(RidgeReport { alpha, n_train: xt.len(), n_test: xv.len(), mape: mape(&pred, &truth, 6)?, r2: r2(&pred, &truth, 6) })
}

/// Class name of a predicted index.
pub fn class_tag(i: usize) -> &'static str {
    LayupClass::from_index(i).map_or("?", LayupClass::tag)
}
