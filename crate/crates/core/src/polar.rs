//! Polar wavecrest curves, their binary rasterisation, and material sampling
//! for synthetic datasets.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::elastic::{stiffness_from_engineering, EngineeringConstants, Laminate, LayupClass};
use crate::error::{Error, Result};
use crate::smm::{trace_branch, Mode, ScanOptions, Sweep};
use crate::wavefield::group_velocity;

/// One point of a wavecrest curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolarSample {
    /// Ray (energy) direction, degrees in [0, 360).
    pub ray_deg: f64,
    /// Group velocity magnitude, m/ms.
    pub cg_m_per_ms: f64,
    /// Propagation (wave-normal) angle this sample came from, degrees in
    /// [0, 360).
    pub phi_deg: f64,
    /// Phase velocity, m/s.
    pub cp_m_per_s: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolarCurve {
    pub mode: Mode,
    /// Hz.
    pub freq: f64,
    /// Sorted by ray angle.
    pub samples: Vec<PolarSample>,
    pub material_id: String,
    pub layup_class: Option<LayupClass>,
}

impl PolarSample {
    /// Ray minus propagation angle, in (-180, 180].
    pub fn skew_deg(&self) -> f64 {
        let d = (self.ray_deg - self.phi_deg).rem_euclid(360.0);
        if d > 180.0 {
            d - 360.0
        } else {
            d
        }
    }
}

impl PolarCurve {
    pub fn max_cg(&self) -> f64 {
        self.samples.iter().map(|s| s.cg_m_per_ms).fold(0.0, f64::max)
    }

    pub fn min_cg(&self) -> f64 {
        self.samples.iter().map(|s| s.cg_m_per_ms).fold(f64::INFINITY, f64::min)
    }

    /// Samples in propagation-angle order, which is the order the wavecrest
    /// is traversed in (ray angle can fold back near cusps).
    pub fn by_phi(&self) -> Vec<PolarSample> {
        let mut v = self.samples.clone();
        v.sort_by(|a, b| a.phi_deg.total_cmp(&b.phi_deg));
        v
    }
}

fn wrap360(a: f64) -> f64 {
    let r = a.rem_euclid(360.0);
    if r >= 360.0 - 1e-9 {
        0.0
    } else {
        r
    }
}

/// True when every ply is at 0 or 90 degrees (mod 180), so the stack is
/// invariant under the reflection x2 -> -x2.
fn mirror_invariant(lam: &Laminate) -> bool {
    lam.layers.iter().all(|l| {
        let r = l.orientation_deg.rem_euclid(90.0);
        r < 1e-9 || 90.0 - r < 1e-9
    })
}

/// Check that `dphi` divides 360 and return the number of samples.
pub fn sample_count(dphi_deg: f64) -> Result<usize> {
    if !(dphi_deg.is_finite() && dphi_deg > 0.0 && dphi_deg <= 360.0) {
        return Err(Error::InvalidInput(alloc::format!("angle increment {dphi_deg} out of range")));
    }
    let n = (360.0 / dphi_deg).round();
    if (n * dphi_deg - 360.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(alloc::format!("angle increment {dphi_deg} does not divide 360")));
    }
    Ok(n as usize)
}

/// Group velocity of one mode for propagation angles `k·dphi`,
/// k = 0..360/dphi, as a wavecrest curve.
///
/// Only angles in [0, 180) are solved (or [0, 90] for stacks of 0/90
/// plies); the rest follow from cp(φ + 180) = cp(φ) and the mirror
/// symmetry.
pub fn polar_sweep(
    lam: &Laminate,
    material_id: &str,
    freq: f64,
    mode: Mode,
    dphi_deg: f64,
    opts: &ScanOptions,
) -> Result<PolarCurve> {
    let n = sample_count(dphi_deg)?;
    let mirror = mirror_invariant(lam);
    // (base angle, mirrored, half-turn) per target angle.
    let plan: Vec<(f64, bool, bool)> = (0..n)
        .map(|k| {
            let phi = k as f64 * dphi_deg;
            let half = phi >= 180.0 - 1e-9;
            let s = if half { phi - 180.0 } else { phi };
            if mirror && s > 90.0 + 1e-9 {
                (180.0 - s, true, half)
            } else {
                (s, false, half)
            }
        })
        .collect();
    let mut base: Vec<f64> = plan.iter().map(|p| p.0).collect();
    base.sort_by(f64::total_cmp);
    base.dedup_by(|a, b| (*a - *b).abs() < 1e-9);

    let sols = trace_branch(lam, mode, &Sweep::Angle { frequency: freq, angles_deg: base.clone() }, opts)?;
    let mut solved = Vec::with_capacity(sols.len());
    for s in &sols {
        let b = group_velocity(lam, s)?;
        solved.push((b.ray_deg, b.cg_mag * 1e-3, s.cp));
    }

    let mut samples: Vec<PolarSample> = plan
        .iter()
        .enumerate()
        .map(|(k, &(b, mirrored, half))| {
            let i = base.iter().position(|x| (x - b).abs() < 1e-9).expect("base angle present");
            let (mut ray, cg, cp) = solved[i];
            if mirrored {
                ray = 180.0 - ray;
            }
            if half {
                ray += 180.0;
            }
            PolarSample { ray_deg: wrap360(ray), cg_m_per_ms: cg, phi_deg: k as f64 * dphi_deg, cp_m_per_s: cp }
        })
        .collect();
    samples.sort_by(|a, b| a.ray_deg.total_cmp(&b.ray_deg));
    Ok(PolarCurve { mode, freq, samples, material_id: material_id.into(), layup_class: lam.layup_class })
}

/// A square black image with a white 1-pixel curve.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryImage {
    pub width: usize,
    pub height: usize,
    /// Row-major, values 0 or 255.
    pub bits: Vec<u8>,
    pub mode: Option<Mode>,
    pub freq: f64,
    /// m/ms at the half-width.
    pub scale: f64,
}

impl BinaryImage {
    pub fn blank(width: usize, height: usize) -> Self {
        BinaryImage { width, height, bits: vec![0; width * height], mode: None, freq: 0.0, scale: 0.0 }
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x] != 0
    }

    pub fn set(&mut self, x: i64, y: i64) {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            self.bits[y as usize * self.width + x as usize] = 255;
        }
    }

    pub fn count_on(&self) -> usize {
        self.bits.iter().filter(|&&b| b != 0).count()
    }

    pub fn line(&mut self, (x0, y0): (i64, i64), (x1, y1): (i64, i64)) {
        let dx = (x1 - x0).abs();
        let dy = -(y1 - y0).abs();
        let sx = if x0 < x1 { 1 } else { -1 };
        let sy = if y0 < y1 { 1 } else { -1 };
        let (mut x, mut y, mut err) = (x0, y0, dx + dy);
        loop {
            self.set(x, y);
            if x == x1 && y == y1 {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x += sx;
            }
            if e2 <= dx {
                err += dx;
                y += sy;
            }
        }
    }

    /// Closed polyline through `pts`.
    pub fn polygon(&mut self, pts: &[(i64, i64)]) {
        for k in 0..pts.len() {
            self.line(pts[k], pts[(k + 1) % pts.len()]);
        }
    }

    /// Values as 0.0 / 1.0.
    pub fn to_unit(&self) -> Vec<f64> {
        self.bits.iter().map(|&b| if b != 0 { 1.0 } else { 0.0 }).collect()
    }
}

/// Pixel position of a polar point: 0° points right, 90° up, `scale` maps to
/// the largest radius that stays inside the image.
pub fn to_pixel(resolution: usize, scale: f64, ray_deg: f64, cg: f64) -> (i64, i64) {
    let c = (resolution as f64 - 1.0) / 2.0;
    let r = cg / scale * c;
    let t = ray_deg.to_radians();
    ((c + r * t.cos()).round() as i64, (c - r * t.sin()).round() as i64)
}

pub fn rasterize(curve: &PolarCurve, resolution: usize, scale: f64) -> Result<BinaryImage> {
    if resolution < 8 || !(scale > 0.0) {
        return Err(Error::InvalidInput(alloc::format!("resolution {resolution} / scale {scale}")));
    }
    let max = curve.max_cg();
    if max > scale {
        return Err(Error::CurveClipped { cg: max, scale });
    }
    let pts: Vec<(i64, i64)> =
        curve.by_phi().iter().map(|s| to_pixel(resolution, scale, s.ray_deg, s.cg_m_per_ms)).collect();
    let mut img = BinaryImage::blank(resolution, resolution);
    img.polygon(&pts);
    img.mode = Some(curve.mode);
    img.freq = curve.freq;
    img.scale = scale;
    Ok(img)
}

/// Uniform sampling box for the synthetic material set, table units
/// (kg/m³, GPa), order (ρ, E1, E2, G12, ν12, ν23).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaterialBounds {
    pub lo: [f64; 6],
    pub hi: [f64; 6],
}

impl Default for MaterialBounds {
    fn default() -> Self {
        MaterialBounds { lo: [1304.0, 115.0, 6.0, 3.0, 0.2, 0.23], hi: [1760.0, 184.0, 14.0, 9.0, 0.52, 0.59] }
    }
}

impl MaterialBounds {
    pub fn midpoint(&self) -> EngineeringConstants {
        let mut v = [0.0; 6];
        for (k, x) in v.iter_mut().enumerate() {
            *x = 0.5 * (self.lo[k] + self.hi[k]);
        }
        EngineeringConstants::from_vector_gpa(v)
    }

    pub fn contains(&self, p: &EngineeringConstants) -> bool {
        let v = p.to_vector_gpa();
        (0..6).all(|k| v[k] >= self.lo[k] * (1.0 - 1e-12) && v[k] <= self.hi[k] * (1.0 + 1e-12))
    }
}

pub const MAX_SAMPLING_TRIES: usize = 100;

/// Draw one material. Each `sample_id` has its own ChaCha stream under
/// `seed`, so samples can be drawn in any order or in parallel.
pub fn sample_matset2(seed: u64, sample_id: u64, bounds: &MaterialBounds) -> Result<EngineeringConstants> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample_id);
    for _ in 0..MAX_SAMPLING_TRIES {
        let mut v = [0.0; 6];
        for (k, x) in v.iter_mut().enumerate() {
            let u: f64 = rng.random();
            *x = bounds.lo[k] + u * (bounds.hi[k] - bounds.lo[k]);
        }
        let p = EngineeringConstants::from_vector_gpa(v);
        if stiffness_from_engineering(&p).is_ok() {
            return Ok(p);
        }
    }
    Err(Error::SamplingExhausted(MAX_SAMPLING_TRIES))
}
