use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Fraction of matching labels.
pub fn accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    if truth.is_empty() {
        return f64::NAN;
    }
    pred.iter().zip(truth).filter(|(a, b)| a == b).count() as f64 / truth.len() as f64
}

/// Mean absolute percentage error per column, in percent.
pub fn mape(pred: &[f64], truth: &[f64], width: usize) -> Result<Vec<f64>> {
    if truth.contains(&0.0) {
        return Err(Error::ZeroTruth);
    }
    let n = truth.len() / width;
    let mut m = vec![0.0; width];
    for (p, t) in pred.chunks(width).zip(truth.chunks(width)) {
        for k in 0..width {
            m[k] += ((t[k] - p[k]) / t[k]).abs();
        }
    }
    Ok(m.into_iter().map(|s| 100.0 * s / n as f64).collect())
}

/// Coefficient of determination per column.
pub fn r2(pred: &[f64], truth: &[f64], width: usize) -> Vec<f64> {
    let n = (truth.len() / width) as f64;
    (0..width)
        .map(|k| {
            let mean = truth.iter().skip(k).step_by(width).sum::<f64>() / n;
            let (mut ss_res, mut ss_tot) = (0.0, 0.0);
            for (p, t) in pred.chunks(width).zip(truth.chunks(width)) {
                ss_res += (t[k] - p[k]) * (t[k] - p[k]);
                ss_tot += (t[k] - mean) * (t[k] - mean);
            }
            1.0 - ss_res / ss_tot
        })
        .collect()
}
