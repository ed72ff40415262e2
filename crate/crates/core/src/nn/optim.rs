use alloc::vec::Vec;

use super::network::Network;
use crate::error::{Error, Result};

/// Adam with bias correction.
#[derive(Clone, Debug)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub t: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(learning_rate: f64) -> Self {
        Adam { learning_rate, beta1: 0.9, beta2: 0.999, epsilon: 1e-8, t: 0, m: Vec::new(), v: Vec::new() }
    }

    /// Apply the accumulated gradients. Nothing is modified if any gradient
    /// is non-finite.
    pub fn step(&mut self, net: &mut Network) -> Result<()> {
        let mut views = net.params_mut();
        for p in &views {
            if let Some(g) = &p.grad {
                if g.iter().any(|x| !x.is_finite()) {
                    return Err(Error::NonFiniteGradient { layer: p.layer.into() });
                }
            }
        }
        let trainable: Vec<_> = views.iter_mut().filter_map(|p| p.grad.as_ref().map(|g| g.len())).collect();
        if self.m.len() != trainable.len() {
            self.m = trainable.iter().map(|&n| alloc::vec![0.0; n]).collect();
            self.v = self.m.clone();
        }
        self.t += 1;
        let b1t = 1.0 - self.beta1.powi(self.t as i32);
        let b2t = 1.0 - self.beta2.powi(self.t as i32);
        let mut k = 0;
        for p in views {
            let Some(g) = p.grad else { continue };
            let (m, v) = (&mut self.m[k], &mut self.v[k]);
            for i in 0..g.len() {
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g[i];
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g[i] * g[i];
                p.values[i] -= self.learning_rate * (m[i] / b1t) / ((v[i] / b2t).sqrt() + self.epsilon);
            }
            k += 1;
        }
        Ok(())
    }
}
