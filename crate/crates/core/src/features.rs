//! Shape features of a rasterised wavecrest: axis lengths, aspect ratio,
//! area, perimeter and circularity.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::polar::BinaryImage;

/// Correction for the bias of 8-chain length on curved boundaries
/// (Kulpa): `π(1 + √2)/8`.
pub const CHAIN_CORRECTION: f64 = 0.948_059_448_969_035;

pub const FEATURE_NAMES: [&str; 6] = ["a", "b", "r", "area", "perim", "circ"];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeatureVector {
    /// Longest chord through the centroid, px.
    pub a: f64,
    /// Shortest chord through the centroid, px.
    pub b: f64,
    pub r: f64,
    /// px².
    pub area: f64,
    /// px.
    pub perim: f64,
    pub circ: f64,
}

impl FeatureVector {
    pub fn to_array(&self) -> [f64; 6] {
        [self.a, self.b, self.r, self.area, self.perim, self.circ]
    }
}

/// Region enclosed by the curve, including the curve pixels. Fails if a
/// 4-connected fill from the image centre reaches the border.
pub fn enclosed_region(img: &BinaryImage) -> Result<Vec<bool>> {
    let (w, h) = (img.width, img.height);
    let mut inside = vec![false; w * h];
    let start = (h / 2) * w + w / 2;
    if img.bits[start] == 0 {
        let mut stack = vec![start];
        inside[start] = true;
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            if x == 0 || y == 0 || x == w - 1 || y == h - 1 {
                return Err(Error::OpenContour);
            }
            for j in [i - 1, i + 1, i - w, i + w] {
                if !inside[j] && img.bits[j] == 0 {
                    inside[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    for (m, &b) in inside.iter_mut().zip(&img.bits) {
        *m |= b != 0;
    }
    Ok(inside)
}

const DIRS: [(i64, i64); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];

/// Length of the outer 8-connected boundary of `mask`, diagonal steps
/// counting √2 (uncorrected).
pub fn chain_length(mask: &[bool], w: usize, h: usize) -> f64 {
    let at = |x: i64, y: i64| x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h && mask[y as usize * w + x as usize];
    let Some(s) = mask.iter().position(|&m| m) else {
        return 0.0;
    };
    let start = ((s % w) as i64, (s / w) as i64);
    let next = |c: (i64, i64), from: usize| -> Option<(usize, (i64, i64))> {
        (0..8).map(|k| (from + k) % 8).find_map(|d| {
            let p = (c.0 + DIRS[d].0, c.1 + DIRS[d].1);
            at(p.0, p.1).then_some((d, p))
        })
    };
    // The start pixel is the first in raster order, so everything above and
    // to its left is background; searching from N clockwise is valid.
    let Some((d0, p0)) = next(start, 6) else {
        return 0.0;
    };
    let step = |d: usize| if d % 2 == 0 { 1.0 } else { core::f64::consts::SQRT_2 };
    let mut len = step(d0);
    let (mut c, mut d) = (p0, d0);
    for _ in 0..4 * w * h {
        let (nd, np) = next(c, (d + 6) % 8).expect("a traced pixel has a neighbour");
        if c == start && nd == d0 {
            break;
        }
        len += step(nd);
        c = np;
        d = nd;
    }
    len
}

/// Chord length through `(cx, cy)` along `theta`, walking outwards in both
/// directions until the first pixel outside the region.
fn chord(mask: &[bool], w: usize, h: usize, cx: f64, cy: f64, theta: f64) -> f64 {
    let (dx, dy) = (theta.cos(), -theta.sin());
    let dt = 0.05;
    let reach = |sgn: f64| -> f64 {
        let mut t = 0.0;
        loop {
            let (x, y) = ((cx + sgn * t * dx).round(), (cy + sgn * t * dy).round());
            if x < 0.0 || y < 0.0 || x >= w as f64 || y >= h as f64 || !mask[y as usize * w + x as usize] {
                return t;
            }
            t += dt;
        }
    };
    reach(1.0) + reach(-1.0)
}

pub fn features_of_region(mask: &[bool], w: usize, h: usize) -> FeatureVector {
    let mut n = 0usize;
    let (mut sx, mut sy) = (0.0, 0.0);
    for (i, _) in mask.iter().enumerate().filter(|(_, &m)| m) {
        n += 1;
        sx += (i % w) as f64;
        sy += (i / w) as f64;
    }
    let area = n as f64;
    if n == 0 {
        return FeatureVector { a: 0.0, b: 0.0, r: 0.0, area, perim: 0.0, circ: 0.0 };
    }
    let (cx, cy) = (sx / area, sy / area);
    let (mut a, mut b) = (0.0f64, f64::INFINITY);
    for k in 0..180 {
        let l = chord(mask, w, h, cx, cy, (k as f64).to_radians());
        a = a.max(l);
        b = b.min(l);
    }
    let perim = CHAIN_CORRECTION * chain_length(mask, w, h);
    let circ = if perim > 0.0 { 4.0 * core::f64::consts::PI * area / (perim * perim) } else { 0.0 };
    FeatureVector { a, b, r: if b > 0.0 { a / b } else { 0.0 }, area, perim, circ }
}

pub fn extract_features(img: &BinaryImage) -> Result<FeatureVector> {
    let mask = enclosed_region(img)?;
    let f = features_of_region(&mask, img.width, img.height);
    if !(f.b > 0.0) {
        return Err(Error::OpenContour);
    }
    Ok(f)
}

/// Counts per half-open bin `[k·w, (k+1)·w)`, non-empty bins only, in
/// ascending order.
pub fn histogram(values: &[f64], bin_width: f64) -> Result<Vec<(f64, usize)>> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::InvalidInput(alloc::format!("bin width {bin_width}")));
    }
    let mut bins: BTreeMap<i64, usize> = BTreeMap::new();
    for &v in values {
        if !v.is_finite() {
            return Err(Error::InvalidInput(alloc::format!("non-finite value {v}")));
        }
        *bins.entry((v / bin_width).floor() as i64).or_default() += 1;
    }
    Ok(bins.into_iter().map(|(k, c)| (k as f64 * bin_width, c)).collect())
}
