//! Shape features of every sample in a dataset, measured on a fine raster
//! of the stored polar curves.

use lambpolar_core::features::{extract_features, histogram, FEATURE_NAMES};
use lambpolar_core::polar::rasterize;
use lambpolar_core::smm::Mode;
use log::warn;
use rayon::prelude::*;

use crate::dataset::DatasetManifest;
use crate::error::{AppError, Result};
use crate::io::pgm;
use crate::io::tables::{read_polar, FeatureRow};

/// Where the feature images come from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Source {
    /// Re-rasterise the saved curves at this size, with the dataset scales.
    Curves { resolution: usize },
    /// Use the dataset images as they are.
    Images,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Skipped {
    pub sample_id: u64,
    pub mode: Mode,
    pub reason: String,
}

pub fn featurize_manifest(m: &DatasetManifest, source: Source) -> Result<(Vec<FeatureRow>, Vec<Skipped>)> {
    let per_sample: Vec<Vec<std::result::Result<FeatureRow, Skipped>>> = m
        .usable()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|r| -> Result<Vec<std::result::Result<FeatureRow, Skipped>>> {
            let images = match source {
                Source::Curves { resolution } => {
                    let curves = read_polar(&m.curve_path(r.sample_id))?;
                    let mut out = Vec::new();
                    for mode in Mode::BOTH {
                        let c = curves.iter().find(|c| c.mode == mode).ok_or_else(|| {
                            AppError::format(m.curve_path(r.sample_id), format!("no {} curve", mode.tag()))
                        })?;
                        let scale = if mode == Mode::S0 { m.meta.scale_s0 } else { m.meta.scale_a0 };
                        out.push((mode, rasterize(c, resolution, scale)));
                    }
                    out
                }
                Source::Images => vec![
                    (Mode::S0, Ok(pgm::read(&m.image_path(&r.img_s0))?)),
                    (Mode::A0, Ok(pgm::read(&m.image_path(&r.img_a0))?)),
                ],
            };
            Ok(images
                .into_iter()
                .map(|(mode, img)| {
                    img.and_then(|i| extract_features(&i))
                        .map(|features| FeatureRow { sample_id: r.sample_id, mode, features })
                        .map_err(|e| Skipped { sample_id: r.sample_id, mode, reason: e.to_string() })
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let (mut rows, mut skipped) = (Vec::new(), Vec::new());
    for x in per_sample.into_iter().flatten() {
        match x {
            Ok(f) => rows.push(f),
            Err(s) => {
                warn!("sample {} {}: {}", s.sample_id, s.mode.tag(), s.reason);
                skipped.push(s);
            }
        }
    }
    Ok((rows, skipped))
}

/// One histogram per (feature, mode).
pub fn histograms(rows: &[FeatureRow], bin_width: f64) -> Result<Vec<(usize, Mode, Vec<(f64, usize)>)>> {
    let mut out = Vec::new();
    for f in 0..FEATURE_NAMES.len() {
        for mode in Mode::BOTH {
            let v: Vec<f64> = rows.iter().filter(|r| r.mode == mode).map(|r| r.features.to_array()[f]).collect();
            out.push((f, mode, histogram(&v, bin_width)?));
        }
    }
    Ok(out)
}
