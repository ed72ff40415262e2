//! One-at-a-time property sweeps of the group velocity and their secant
//! slopes.

use alloc::vec::Vec;

use crate::elastic::{EngineeringConstants, Laminate, Layer, PROPERTY_NAMES};
use crate::error::{Error, Result};
use crate::polar::MaterialBounds;
use crate::smm::{find_modes, Mode, ScanOptions};
use crate::wavefield::group_velocity;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Property {
    Rho,
    E1,
    E2,
    G12,
    Nu12,
    Nu23,
}

impl Property {
    pub const ALL: [Property; 6] = [Property::Rho, Property::E1, Property::E2, Property::G12, Property::Nu12, Property::Nu23];

    /// Position in the (ρ, E1, E2, G12, ν12, ν23) vector.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        PROPERTY_NAMES[self.index()]
    }

    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        Property::ALL.into_iter().find(|p| p.name().eq_ignore_ascii_case(s))
    }

    /// Table unit of the swept value.
    pub fn unit(self) -> &'static str {
        match self {
            Property::Rho => "kg/m3",
            Property::E1 | Property::E2 | Property::G12 => "GPa",
            Property::Nu12 | Property::Nu23 => "-",
        }
    }

    pub fn get(self, p: &EngineeringConstants) -> f64 {
        p.to_vector_gpa()[self.index()]
    }

    pub fn set(self, p: &EngineeringConstants, value: f64) -> EngineeringConstants {
        let mut v = p.to_vector_gpa();
        v[self.index()] = value;
        EngineeringConstants::from_vector_gpa(v)
    }

    pub fn bounds(self, b: &MaterialBounds) -> (f64, f64) {
        (b.lo[self.index()], b.hi[self.index()])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub property: Property,
    /// Swept values in table units.
    pub values: Vec<f64>,
    pub mode: Mode,
    pub phi_deg: f64,
    /// Hz.
    pub freq: f64,
    /// Group velocity magnitude, m/s.
    pub cg: Vec<f64>,
    /// (m/s) per table unit.
    pub delta: f64,
}

impl SweepResult {
    /// Change of cg over the sweep relative to its mean.
    pub fn relative_change(&self) -> f64 {
        let mean = self.cg.iter().sum::<f64>() / self.cg.len() as f64;
        (self.cg[self.cg.len() - 1] - self.cg[0]) / mean
    }
}

/// `(C_e − C_s) / (P_e − P_s)` from the first and last points.
pub fn secant_sensitivity(s: &SweepResult) -> Result<f64> {
    secant(&s.values, &s.cg)
}

fn secant(p: &[f64], c: &[f64]) -> Result<f64> {
    if p.len() < 2 || p.len() != c.len() {
        return Err(Error::InvalidInput(alloc::format!("sweep of {} values and {} velocities", p.len(), c.len())));
    }
    let span = p[p.len() - 1] - p[0];
    if span == 0.0 {
        return Err(Error::ZeroSpan);
    }
    Ok((c[c.len() - 1] - c[0]) / span)
}

/// Same stacking with every ply made of `material`.
pub fn with_material(lam: &Laminate, material: EngineeringConstants) -> Result<Laminate> {
    let layers = lam.layers.iter().map(|l| Layer { material, ..*l }).collect();
    Laminate::new(layers, lam.layup_class)
}

/// Group velocity magnitude (m/s) of one mode.
pub fn group_speed(lam: &Laminate, freq: f64, phi_deg: f64, mode: Mode, opts: &ScanOptions) -> Result<f64> {
    let sol = find_modes(lam, freq, phi_deg, opts)?.into_iter().find(|s| s.mode == mode).ok_or(
        Error::NoModesFound { cp_min: opts.cp_min, cp_max: opts.cp_max },
    )?;
    Ok(group_velocity(lam, &sol)?.cg_mag)
}

/// `n_points` equispaced values of one property over `bounds`, all other
/// properties held at `baseline`. `lam` supplies the stacking only.
#[allow(clippy::too_many_arguments)]
pub fn oat_sweep(
    baseline: &EngineeringConstants,
    property: Property,
    bounds: (f64, f64),
    n_points: usize,
    lam: &Laminate,
    freq: f64,
    phi_deg: f64,
    mode: Mode,
    opts: &ScanOptions,
) -> Result<SweepResult> {
    if n_points < 2 {
        return Err(Error::InvalidInput(alloc::format!("sweep needs at least 2 points, got {n_points}")));
    }
    let values: Vec<f64> = (0..n_points)
        .map(|k| bounds.0 + (bounds.1 - bounds.0) * k as f64 / (n_points - 1) as f64)
        .collect();
    let mut cg = Vec::with_capacity(n_points);
    for &v in &values {
        let l = with_material(lam, property.set(baseline, v))?;
        cg.push(group_speed(&l, freq, phi_deg, mode, opts)?);
    }
    let delta = secant(&values, &cg)?;
    Ok(SweepResult { property, values, mode, phi_deg, freq, cg, delta })
}

/// (mode, φ in degrees, frequency in Hz) cases of the default comparison.
pub fn default_grid() -> Vec<(Mode, f64, f64)> {
    let mut g = Vec::new();
    for mode in Mode::BOTH {
        for phi in [0.0, 90.0] {
            for f in [20e3, 200e3] {
                g.push((mode, phi, f));
            }
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use crate::elastic::{build_layup, LayupClass};

    fn synthetic(values: Vec<f64>, cg: Vec<f64>) -> SweepResult {
        SweepResult { property: Property::E1, values, mode: Mode::S0, phi_deg: 0.0, freq: 1.0, cg, delta: 0.0 }
    }

    #[test]
    fn secant_of_simple_curves() {
        assert_eq!(secant_sensitivity(&synthetic(vec![1.0, 2.0, 3.0], vec![5.0; 3])).unwrap(), 0.0);
        let p = [115.0, 130.0, 150.0, 184.0];
        let s = synthetic(p.to_vec(), p.iter().map(|v| 2.5 * v).collect());
        assert!((secant_sensitivity(&s).unwrap() - 2.5).abs() < 1e-12);
        assert!(matches!(secant_sensitivity(&synthetic(vec![2.0, 2.0], vec![1.0, 3.0])), Err(Error::ZeroSpan)));
    }

    #[test]
    fn property_round_trip() {
        let b = MaterialBounds::default().midpoint();
        for p in Property::ALL {
            assert_eq!(Property::parse(p.name()), Some(p));
            assert!((p.get(&p.set(&b, 0.3)) - 0.3).abs() < 1e-12);
        }
    }

    #[test]
    fn density_lowers_s0_group_velocity() {
        let bounds = MaterialBounds::default();
        let base = bounds.midpoint();
        let lam = build_layup(LayupClass::Unidirectional, 16, 2e-3, base).unwrap();
        let opts = ScanOptions::default();
        let s = oat_sweep(&base, Property::Rho, Property::Rho.bounds(&bounds), 5, &lam, 20e3, 0.0, Mode::S0, &opts).unwrap();
        assert!(s.cg.windows(2).all(|w| w[1] < w[0]), "{:?}", s.cg);
        assert!(s.delta < 0.0);
        let two = oat_sweep(&base, Property::Rho, Property::Rho.bounds(&bounds), 2, &lam, 20e3, 0.0, Mode::S0, &opts).unwrap();
        assert!((two.delta - s.delta).abs() < 1e-9 * s.delta.abs());
        // Nearly non-dispersive at this fd, so close to cg ∝ ρ^(-1/2).
        let ratio = s.cg[4] / s.cg[0];
        assert!((ratio - (1304.0f64 / 1760.0).sqrt()).abs() < 1e-2 * ratio);
    }
}
