//! Layer kernels with hand-written backward passes. Each layer caches what
//! its backward pass needs during `forward` and accumulates parameter
//! gradients in `backward`.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::gemm::gemm;

pub const BN_EPSILON: f64 = 1e-3;
pub const BN_MOMENTUM: f64 = 0.99;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Linear,
    Relu,
    Softmax,
}

impl Activation {
    pub fn tag(self) -> &'static str {
        match self {
            Activation::Linear => "linear",
            Activation::Relu => "relu",
            Activation::Softmax => "softmax",
        }
    }
}

fn he_normal(rng: &mut ChaCha8Rng, fan_in: usize, n: usize) -> Vec<f64> {
    let s = (2.0 / fan_in as f64).sqrt();
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            s * z
        })
        .collect()
}

/// 3×3 convolution, stride 1, zero "same" padding. The whole batch is
/// unfolded into one column matrix so each pass is a single product.
#[derive(Clone, Debug)]
pub struct Conv {
    pub c_in: usize,
    pub filters: usize,
    pub h: usize,
    pub w: usize,
    pub act: Activation,
    /// filters × (c_in · 9).
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
    pub gw: Vec<f64>,
    pub gb: Vec<f64>,
    output: Vec<f64>,
    /// (c_in · 9) × (n · h · w).
    col: Vec<f64>,
}

impl Conv {
    pub fn new(c_in: usize, filters: usize, h: usize, w: usize, act: Activation, rng: &mut ChaCha8Rng) -> Self {
        let k = c_in * 9;
        Conv {
            c_in,
            filters,
            h,
            w,
            act,
            weight: he_normal(rng, k, filters * k),
            bias: vec![0.0; filters],
            gw: vec![0.0; filters * k],
            gb: vec![0.0; filters],
            output: Vec::new(),
            col: Vec::new(),
        }
    }

    fn im2col(&mut self, x: &[f64], n: usize) {
        let (h, w) = (self.h, self.w);
        let hw = h * w;
        let stride = n * hw;
        self.col.resize(self.c_in * 9 * stride, 0.0);
        for s in 0..n {
            for c in 0..self.c_in {
                let plane = &x[(s * self.c_in + c) * hw..(s * self.c_in + c + 1) * hw];
                for ky in 0..3 {
                    for kx in 0..3 {
                        let r = (c * 9 + ky * 3 + kx) * stride + s * hw;
                        let row = &mut self.col[r..r + hw];
                        for y in 0..h {
                            let sy = y as isize + ky as isize - 1;
                            let dst = &mut row[y * w..(y + 1) * w];
                            if sy < 0 || sy >= h as isize {
                                dst.fill(0.0);
                                continue;
                            }
                            let src = &plane[sy as usize * w..(sy as usize + 1) * w];
                            match kx {
                                0 => {
                                    dst[0] = 0.0;
                                    dst[1..].copy_from_slice(&src[..w - 1]);
                                }
                                1 => dst.copy_from_slice(src),
                                _ => {
                                    dst[..w - 1].copy_from_slice(&src[1..]);
                                    dst[w - 1] = 0.0;
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    fn col2im(&self, dcol: &[f64], n: usize) -> Vec<f64> {
        let (h, w) = (self.h, self.w);
        let hw = h * w;
        let stride = n * hw;
        let mut dx = vec![0.0; n * self.c_in * hw];
        for s in 0..n {
            for c in 0..self.c_in {
                let plane = &mut dx[(s * self.c_in + c) * hw..(s * self.c_in + c + 1) * hw];
                for ky in 0..3 {
                    for kx in 0..3 {
                        let r = (c * 9 + ky * 3 + kx) * stride + s * hw;
                        let row = &dcol[r..r + hw];
                        for y in 0..h {
                            let sy = y as isize + ky as isize - 1;
                            if sy < 0 || sy >= h as isize {
                                continue;
                            }
                            let src = &row[y * w..(y + 1) * w];
                            let dst = &mut plane[sy as usize * w..(sy as usize + 1) * w];
                            match kx {
                                0 => dst[..w - 1].iter_mut().zip(&src[1..]).for_each(|(d, s)| *d += s),
                                1 => dst.iter_mut().zip(src).for_each(|(d, s)| *d += s),
                                _ => dst[1..].iter_mut().zip(&src[..w - 1]).for_each(|(d, s)| *d += s),
                            }
                        }
                    }
                }
            }
        }
        dx
    }

    pub fn forward(&mut self, x: &[f64], n: usize) -> Vec<f64> {
        let (hw, k, f) = (self.h * self.w, self.c_in * 9, self.filters);
        self.im2col(x, n);
        // filters × (n · hw), then reordered to (n, filters, hw).
        let mut fm = vec![0.0; f * n * hw];
        gemm(false, false, f, n * hw, k, 1.0, &self.weight, &self.col, 0.0, &mut fm);
        let mut out = vec![0.0; n * f * hw];
        for fi in 0..f {
            let b = self.bias[fi];
            for s in 0..n {
                let src = &fm[(fi * n + s) * hw..(fi * n + s + 1) * hw];
                let dst = &mut out[(s * f + fi) * hw..(s * f + fi + 1) * hw];
                match self.act {
                    Activation::Relu => dst.iter_mut().zip(src).for_each(|(d, v)| *d = (v + b).max(0.0)),
                    _ => dst.iter_mut().zip(src).for_each(|(d, v)| *d = v + b),
                }
            }
        }
        self.output.clone_from(&out);
        out
    }

    pub fn backward(&mut self, dy: &[f64], n: usize) -> Vec<f64> {
        let (hw, k, f) = (self.h * self.w, self.c_in * 9, self.filters);
        let relu = self.act == Activation::Relu;
        let mut dz = vec![0.0; f * n * hw];
        for fi in 0..f {
            let mut sb = 0.0;
            for s in 0..n {
                let o = (s * f + fi) * hw;
                let dst = &mut dz[(fi * n + s) * hw..(fi * n + s + 1) * hw];
                for j in 0..hw {
                    let d = if relu && self.output[o + j] <= 0.0 { 0.0 } else { dy[o + j] };
                    dst[j] = d;
                    sb += d;
                }
            }
            self.gb[fi] += sb;
        }
        gemm(false, true, f, k, n * hw, 1.0, &dz, &self.col, 1.0, &mut self.gw);
        let mut dcol = vec![0.0; k * n * hw];
        gemm(true, false, k, n * hw, f, 1.0, &self.weight, &dz, 0.0, &mut dcol);
        self.col2im(&dcol, n)
    }
}

/// Per-channel batch normalisation over (N, H, W), or per feature for flat
/// inputs (`spatial` = 1).
#[derive(Clone, Debug)]
pub struct BatchNorm {
    pub channels: usize,
    pub spatial: usize,
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
    pub g_gamma: Vec<f64>,
    pub g_beta: Vec<f64>,
    xhat: Vec<f64>,
    inv_std: Vec<f64>,
    trained: bool,
}

impl BatchNorm {
    pub fn new(channels: usize, spatial: usize) -> Self {
        BatchNorm {
            channels,
            spatial,
            gamma: vec![1.0; channels],
            beta: vec![0.0; channels],
            running_mean: vec![0.0; channels],
            running_var: vec![1.0; channels],
            g_gamma: vec![0.0; channels],
            g_beta: vec![0.0; channels],
            xhat: Vec::new(),
            inv_std: vec![0.0; channels],
            trained: false,
        }
    }

    /// Offsets of the contiguous runs of channel `c`.
    fn runs(&self, n: usize, c: usize) -> impl Iterator<Item = usize> {
        let (cs, s) = (self.channels, self.spatial);
        (0..n).map(move |i| (i * cs + c) * s)
    }

    pub fn forward(&mut self, x: &[f64], n: usize, train: bool) -> Vec<f64> {
        let sp = self.spatial;
        let m = (n * sp) as f64;
        let mut out = vec![0.0; x.len()];
        self.xhat.resize(x.len(), 0.0);
        self.trained = train;
        for c in 0..self.channels {
            let (mean, var) = if train {
                let mean = self.runs(n, c).map(|o| x[o..o + sp].iter().sum::<f64>()).sum::<f64>() / m;
                let var = self
                    .runs(n, c)
                    .map(|o| x[o..o + sp].iter().map(|v| (v - mean) * (v - mean)).sum::<f64>())
                    .sum::<f64>()
                    / m;
                self.running_mean[c] = BN_MOMENTUM * self.running_mean[c] + (1.0 - BN_MOMENTUM) * mean;
                self.running_var[c] = BN_MOMENTUM * self.running_var[c] + (1.0 - BN_MOMENTUM) * var;
                (mean, var)
            } else {
                (self.running_mean[c], self.running_var[c])
            };
            let inv = 1.0 / (var + BN_EPSILON).sqrt();
            self.inv_std[c] = inv;
            let (g, b) = (self.gamma[c], self.beta[c]);
            for o in self.runs(n, c) {
                let xs = &x[o..o + sp];
                let xh = &mut self.xhat[o..o + sp];
                let ys = &mut out[o..o + sp];
                for j in 0..sp {
                    xh[j] = (xs[j] - mean) * inv;
                    ys[j] = g * xh[j] + b;
                }
            }
        }
        out
    }

    pub fn backward(&mut self, dy: &[f64], n: usize) -> Vec<f64> {
        let sp = self.spatial;
        let m = (n * sp) as f64;
        let mut dx = vec![0.0; dy.len()];
        for c in 0..self.channels {
            let (mut sd, mut sdx) = (0.0, 0.0);
            for o in self.runs(n, c) {
                for (d, xh) in dy[o..o + sp].iter().zip(&self.xhat[o..o + sp]) {
                    sd += d;
                    sdx += d * xh;
                }
            }
            self.g_gamma[c] += sdx;
            self.g_beta[c] += sd;
            let k = self.gamma[c] * self.inv_std[c];
            let (a, b) = if self.trained { (sd / m, sdx / m) } else { (0.0, 0.0) };
            for o in self.runs(n, c) {
                let xs = &mut dx[o..o + sp];
                for ((v, d), xh) in xs.iter_mut().zip(&dy[o..o + sp]).zip(&self.xhat[o..o + sp]) {
                    *v = k * (d - a - xh * b);
                }
            }
        }
        dx
    }
}

/// 2×2 max pooling, stride 2; odd trailing rows/columns are dropped.
#[derive(Clone, Debug)]
pub struct MaxPool {
    pub c: usize,
    pub h: usize,
    pub w: usize,
    argmax: Vec<usize>,
}

impl MaxPool {
    pub fn new(c: usize, h: usize, w: usize) -> Self {
        MaxPool { c, h, w, argmax: Vec::new() }
    }

    pub fn out_dims(&self) -> (usize, usize) {
        (self.h / 2, self.w / 2)
    }

    pub fn forward(&mut self, x: &[f64], n: usize) -> Vec<f64> {
        let (oh, ow) = self.out_dims();
        let mut out = vec![0.0; n * self.c * oh * ow];
        self.argmax = vec![0; out.len()];
        for p in 0..n * self.c {
            let base = p * self.h * self.w;
            for y in 0..oh {
                for xo in 0..ow {
                    let mut best = base + 2 * y * self.w + 2 * xo;
                    for (dy, dx) in [(0, 1), (1, 0), (1, 1)] {
                        let j = base + (2 * y + dy) * self.w + 2 * xo + dx;
                        if x[j] > x[best] {
                            best = j;
                        }
                    }
                    let o = (p * oh + y) * ow + xo;
                    out[o] = x[best];
                    self.argmax[o] = best;
                }
            }
        }
        out
    }

    pub fn backward(&mut self, dy: &[f64], n: usize) -> Vec<f64> {
        let mut dx = vec![0.0; n * self.c * self.h * self.w];
        for (o, &j) in self.argmax.iter().enumerate() {
            dx[j] += dy[o];
        }
        dx
    }
}

/// Fully connected layer, weight stored inputs × units.
#[derive(Clone, Debug)]
pub struct Dense {
    pub inputs: usize,
    pub units: usize,
    pub act: Activation,
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
    pub gw: Vec<f64>,
    pub gb: Vec<f64>,
    input: Vec<f64>,
    output: Vec<f64>,
}

impl Dense {
    pub fn new(inputs: usize, units: usize, act: Activation, rng: &mut ChaCha8Rng) -> Self {
        Dense {
            inputs,
            units,
            act,
            weight: he_normal(rng, inputs, inputs * units),
            bias: vec![0.0; units],
            gw: vec![0.0; inputs * units],
            gb: vec![0.0; units],
            input: Vec::new(),
            output: Vec::new(),
        }
    }

    pub fn forward(&mut self, x: &[f64], n: usize) -> Vec<f64> {
        let u = self.units;
        let mut out = vec![0.0; n * u];
        for row in out.chunks_mut(u) {
            row.copy_from_slice(&self.bias);
        }
        gemm(false, false, n, u, self.inputs, 1.0, x, &self.weight, 1.0, &mut out);
        match self.act {
            Activation::Linear => {}
            Activation::Relu => out.iter_mut().for_each(|v| *v = v.max(0.0)),
            Activation::Softmax => out.chunks_mut(u).for_each(softmax_in_place),
        }
        self.input = x.to_vec();
        self.output.clone_from(&out);
        out
    }

    /// Gradient with respect to the pre-activation values.
    pub fn preactivation_grad(&self, dy: &[f64]) -> Vec<f64> {
        let u = self.units;
        match self.act {
            Activation::Linear => dy.to_vec(),
            Activation::Relu => dy.iter().zip(&self.output).map(|(d, &o)| if o > 0.0 { *d } else { 0.0 }).collect(),
            Activation::Softmax => {
                let mut dz = vec![0.0; dy.len()];
                for ((z, d), p) in dz.chunks_mut(u).zip(dy.chunks(u)).zip(self.output.chunks(u)) {
                    let dot: f64 = d.iter().zip(p).map(|(a, b)| a * b).sum();
                    for j in 0..u {
                        z[j] = p[j] * (d[j] - dot);
                    }
                }
                dz
            }
        }
    }

    /// Backward pass from the pre-activation gradient.
    pub fn backward_pre(&mut self, dz: &[f64], n: usize) -> Vec<f64> {
        let u = self.units;
        for row in dz.chunks(u) {
            self.gb.iter_mut().zip(row).for_each(|(g, d)| *g += d);
        }
        gemm(true, false, self.inputs, u, n, 1.0, &self.input, dz, 1.0, &mut self.gw);
        let mut dx = vec![0.0; n * self.inputs];
        gemm(false, true, n, self.inputs, u, 1.0, dz, &self.weight, 0.0, &mut dx);
        dx
    }

    pub fn backward(&mut self, dy: &[f64], n: usize) -> Vec<f64> {
        let dz = self.preactivation_grad(dy);
        self.backward_pre(&dz, n)
    }
}

pub fn softmax_in_place(row: &mut [f64]) {
    let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut s = 0.0;
    for v in row.iter_mut() {
        *v = (*v - m).exp();
        s += *v;
    }
    row.iter_mut().for_each(|v| *v /= s);
}

/// Inverted dropout: kept units are scaled by 1/(1 − rate) during training,
/// evaluation is the identity.
#[derive(Clone, Debug)]
pub struct Dropout {
    pub rate: f64,
    mask: Vec<f64>,
}

impl Dropout {
    pub fn new(rate: f64) -> Self {
        Dropout { rate, mask: Vec::new() }
    }

    pub fn forward(&mut self, x: &[f64], train: bool, rng: &mut ChaCha8Rng) -> Vec<f64> {
        if !train || self.rate == 0.0 {
            self.mask = vec![1.0; x.len()];
            return x.to_vec();
        }
        let keep = 1.0 - self.rate;
        self.mask = (0..x.len()).map(|_| if rng.random::<f64>() < keep { 1.0 / keep } else { 0.0 }).collect();
        x.iter().zip(&self.mask).map(|(a, m)| a * m).collect()
    }

    pub fn backward(&mut self, dy: &[f64]) -> Vec<f64> {
        dy.iter().zip(&self.mask).map(|(a, m)| a * m).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn conv_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (c, f, h, w) = (2, 3, 5, 4);
        let mut conv = Conv::new(c, f, h, w, Activation::Linear, &mut rng);
        conv.bias = vec![0.1, -0.2, 0.3];
        let x: Vec<f64> = (0..c * h * w).map(|i| (i as f64 * 0.7).sin()).collect();
        let y = conv.forward(&x, 1);
        for fi in 0..f {
            for yy in 0..h {
                for xx in 0..w {
                    let mut s = conv.bias[fi];
                    for ci in 0..c {
                        for ky in 0..3 {
                            for kx in 0..3 {
                                let (sy, sx) = (yy as isize + ky - 1, xx as isize + kx - 1);
                                if sy >= 0 && sx >= 0 && (sy as usize) < h && (sx as usize) < w {
                                    s += conv.weight[fi * c * 9 + ci * 9 + (ky * 3 + kx) as usize]
                                        * x[ci * h * w + sy as usize * w + sx as usize];
                                }
                            }
                        }
                    }
                    assert!((y[fi * h * w + yy * w + xx] - s).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn dropout_zero_rate_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut d = Dropout::new(0.0);
        let x = [1.0, -2.0, 3.0];
        assert_eq!(d.forward(&x, true, &mut rng), x.to_vec());
        let mut d = Dropout::new(0.5);
        assert_eq!(d.forward(&x, false, &mut rng), x.to_vec());
    }

    #[test]
    fn eval_batchnorm_is_affine() {
        let mut bn = BatchNorm::new(2, 3);
        bn.running_mean = vec![0.5, -1.0];
        bn.running_var = vec![2.0, 0.25];
        bn.gamma = vec![1.5, -0.5];
        bn.beta = vec![0.1, 0.2];
        let x: Vec<f64> = (0..12).map(|i| i as f64 * 0.3 - 1.0).collect();
        let y = bn.forward(&x, 2, false);
        let x2: Vec<f64> = x.iter().map(|v| 3.0 * v + 1.0).collect();
        let y2 = bn.forward(&x2, 2, false);
        let z: Vec<f64> = vec![0.0; 12];
        let y0 = bn.forward(&z, 2, false);
        for j in 0..12 {
            // f(3x + 1) = 3 f(x) + f(1) - 3 f(0) for an affine f
            let ones = bn.forward(&[1.0; 12], 2, false)[j];
            assert!((y2[j] - (3.0 * y[j] + ones - 3.0 * y0[j])).abs() < 1e-12);
        }
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let mut r = [1000.0, -5.0, 3.0, 0.0];
        softmax_in_place(&mut r);
        assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(r.iter().all(|v| v.is_finite()));
    }
}
