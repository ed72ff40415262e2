//! Closed-form linear and ridge regression on standardised features.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::solve_dense;

#[derive(Clone, Debug, PartialEq)]
pub struct RidgeModel {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    /// One coefficient row per output, on standardised features.
    pub coef: Vec<Vec<f64>>,
    pub intercept: Vec<f64>,
}

/// Solve `(XᵀX + αI) w = Xᵀ(y − ȳ)` per output on standardised, centred
/// features. `alpha = 0` is ordinary least squares.
pub fn ridge_fit(x: &[Vec<f64>], y: &[Vec<f64>], alpha: f64) -> Result<RidgeModel> {
    let n = x.len();
    let p = x.first().map_or(0, |r| r.len());
    let k = y.first().map_or(0, |r| r.len());
    if n < p + 1 || n != y.len() {
        return Err(Error::DatasetTooSmall("ridge regression needs more rows than features"));
    }
    if !(alpha >= 0.0) {
        return Err(Error::InvalidInput(alloc::format!("alpha {alpha}")));
    }
    let mut mean = vec![0.0; p];
    for r in x {
        mean.iter_mut().zip(r).for_each(|(m, v)| *m += v / n as f64);
    }
    let mut scale = vec![0.0; p];
    for r in x {
        for j in 0..p {
            scale[j] += (r[j] - mean[j]).powi(2) / n as f64;
        }
    }
    let scale: Vec<f64> = scale.into_iter().map(|v| if v > 0.0 { v.sqrt() } else { 1.0 }).collect();
    let z: Vec<Vec<f64>> = x.iter().map(|r| (0..p).map(|j| (r[j] - mean[j]) / scale[j]).collect()).collect();
    let mut ybar = vec![0.0; k];
    for r in y {
        ybar.iter_mut().zip(r).for_each(|(m, v)| *m += v / n as f64);
    }
    let mut gram = vec![0.0; p * p];
    for r in &z {
        for i in 0..p {
            for j in 0..p {
                gram[i * p + j] += r[i] * r[j];
            }
        }
    }
    for i in 0..p {
        gram[i * p + i] += alpha;
    }
    let mut coef = Vec::with_capacity(k);
    for o in 0..k {
        let mut rhs = vec![0.0; p];
        for (r, t) in z.iter().zip(y) {
            for j in 0..p {
                rhs[j] += r[j] * (t[o] - ybar[o]);
            }
        }
        let mut a = gram.clone();
        solve_dense(&mut a, p, &mut rhs, 1e-12).ok_or(Error::SingularNormalEquations)?;
        coef.push(rhs);
    }
    Ok(RidgeModel { mean, scale, coef, intercept: ybar })
}

impl RidgeModel {
    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        self.coef
            .iter()
            .zip(&self.intercept)
            .map(|(w, b)| b + w.iter().enumerate().map(|(j, w)| w * (x[j] - self.mean[j]) / self.scale[j]).sum::<f64>())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::metrics::mape;

    fn data(n: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let x: Vec<Vec<f64>> =
            (0..n).map(|i| (0..3).map(|j| (i as f64 * (0.37 + 0.23 * j as f64) + j as f64).sin()).collect()).collect();
        let y = x.iter().map(|r| vec![5.0 + 2.0 * r[0] - r[1] + 0.5 * r[2], 10.0 + r[2]]).collect();
        (x, y)
    }

    #[test]
    fn exact_recovery_without_regularisation() {
        let (x, y) = data(20);
        let m = ridge_fit(&x, &y, 0.0).unwrap();
        let pred: Vec<f64> = x.iter().flat_map(|r| m.predict(r)).collect();
        let truth: Vec<f64> = y.iter().flatten().copied().collect();
        assert!(mape(&pred, &truth, 2).unwrap().iter().all(|&e| e <= 1e-6));
    }

    #[test]
    fn heavy_regularisation_predicts_the_mean() {
        let (x, y) = data(20);
        let m = ridge_fit(&x, &y, 1e14).unwrap();
        let p = m.predict(&x[3]);
        for o in 0..2 {
            assert!((p[o] - m.intercept[o]).abs() < 1e-9);
        }
    }

    #[test]
    fn collinear_features_are_singular_for_ols() {
        let (mut x, y) = data(20);
        for r in &mut x {
            r.push(2.0 * r[0]);
        }
        assert!(matches!(ridge_fit(&x, &y, 0.0), Err(Error::SingularNormalEquations)));
        assert!(ridge_fit(&x, &y, 1.0).is_ok());
    }
}
