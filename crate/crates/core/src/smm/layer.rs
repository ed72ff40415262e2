//! Layer stiffness matrices and their recursive assembly into the global
//! stiffness of a stack.

use alloc::vec::Vec;

use super::bulk::{bulk_waves, is_decoupled, BulkWaveSet};
use crate::elastic::{rotate_stiffness, stiffness_from_engineering, Laminate, Voigt};
use crate::error::{Error, Result};
use crate::linalg::{SMat, C64};

/// Which displacement and stress components take part.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum System {
    /// Displacements (u1, u2, u3), stresses (σ33, σ13, σ23).
    Full,
    /// Displacements (u1, u3), stresses (σ33, σ13). Valid when every layer
    /// is decoupled; shear-horizontal waves are dropped.
    Sagittal,
}

impl System {
    pub fn dim(self) -> usize {
        match self {
            System::Full => 3,
            System::Sagittal => 2,
        }
    }

    /// Positions of the retained displacements in (u1, u2, u3).
    pub fn disp_components(self) -> &'static [usize] {
        match self {
            System::Full => &[0, 1, 2],
            System::Sagittal => &[0, 2],
        }
    }

    /// Positions of the retained stresses in (σ33, σ13, σ23).
    pub fn stress_components(self) -> &'static [usize] {
        match self {
            System::Full => &[0, 1, 2],
            System::Sagittal => &[0, 1],
        }
    }
}

const COND_LIMIT: f64 = 1e12;

/// Layer stiffness `K` together with what is needed to recover partial-wave
/// amplitudes from interface displacements.
#[derive(Clone, Copy, Debug)]
pub struct LayerMatrices {
    pub k: SMat<C64>,
    /// Inverse of the displacement matrix: amplitudes `[a⁻; a⁺] = PM⁻¹ [u_top; u_bot]`.
    pub pm_inv: SMat<C64>,
    /// `exp(-i ξ α_q d)` for the downward waves.
    pub h: [C64; 3],
}

/// Stiffness matrix of one layer of thickness `d` at wavenumber `xi`,
/// mapping `[u_top; u_bot]` to `[σ_top; σ_bot] / iξ`.
pub fn layer_stiffness(w: &BulkWaveSet, xi: f64, d: f64, system: System) -> Result<LayerMatrices> {
    let n = system.dim();
    let disp = system.disp_components();
    let stress = system.stress_components();
    let mut h = [C64::new(0.0, 0.0); 3];
    for (k, hk) in h.iter_mut().enumerate() {
        *hk = (C64::new(0.0, -xi * d) * w.alpha[2 * k]).exp();
    }
    let dsign = [1.0, 1.0, -1.0];
    let ssign = [1.0, -1.0, -1.0];
    let mut pm = SMat::<C64>::zeros(2 * n);
    let mut dm = SMat::<C64>::zeros(2 * n);
    for q in 0..n {
        let p = w.polarization[q];
        let t = w.traction[q];
        for (r, &i) in disp.iter().enumerate() {
            let down = p[i];
            let up = p[i] * dsign[i];
            pm[(r, q)] = down;
            pm[(r, n + q)] = up * h[q];
            pm[(n + r, q)] = down * h[q];
            pm[(n + r, n + q)] = up;
        }
        for (r, &i) in stress.iter().enumerate() {
            let down = t[i];
            let up = t[i] * ssign[i];
            dm[(r, q)] = down;
            dm[(r, n + q)] = up * h[q];
            dm[(n + r, q)] = down * h[q];
            dm[(n + r, n + q)] = up;
        }
    }
    let pm_inv = pm.inverse().ok_or(Error::SingularDisplacementMatrix { cond: f64::INFINITY })?;
    let cond = pm.norm_inf() * pm_inv.norm_inf();
    if !(cond <= COND_LIMIT) {
        return Err(Error::SingularDisplacementMatrix { cond });
    }
    Ok(LayerMatrices { k: dm.mul(&pm_inv), pm_inv, h })
}

/// Intermediate quantities of one recursion step, kept for recovering the
/// displacement of the interface that was eliminated.
#[derive(Clone, Copy, Debug)]
pub struct FoldStep {
    /// `(K^B_11 − K^A_22)⁻¹`
    pub z: SMat<C64>,
    /// `K^A_21` of the stack above the interface.
    pub a21: SMat<C64>,
    /// `K^B_12` of the layer below the interface.
    pub b12: SMat<C64>,
}

/// Combine the stack above (`ka`) with the layer below (`kb`).
pub fn fold(ka: &SMat<C64>, kb: &SMat<C64>) -> Result<(SMat<C64>, FoldStep)> {
    let n = ka.n() / 2;
    let (a11, a12, a21, a22) = (ka.block(0, 0, n), ka.block(0, n, n), ka.block(n, 0, n), ka.block(n, n, n));
    let (b11, b12, b21, b22) = (kb.block(0, 0, n), kb.block(0, n, n), kb.block(n, 0, n), kb.block(n, n, n));
    let pivot = b11.sub(&a22);
    let z = pivot.inverse().ok_or(Error::SingularRecursionPivot { cond: f64::INFINITY })?;
    let cond = pivot.norm_inf() * z.norm_inf();
    if !(cond <= COND_LIMIT) {
        return Err(Error::SingularRecursionPivot { cond });
    }
    let a12z = a12.mul(&z);
    let b21z = b21.mul(&z);
    let k = SMat::from_blocks(
        &a11.add(&a12z.mul(&a21)),
        &a12z.mul(&b12).neg(),
        &b21z.mul(&a21),
        &b22.sub(&b21z.mul(&b12)),
    );
    Ok((k, FoldStep { z, a21, b12 }))
}

/// Global stiffness of a stack of layer matrices (top to bottom).
pub fn assemble_global(layers: &[SMat<C64>]) -> Result<SMat<C64>> {
    let (first, rest) = layers.split_first().ok_or_else(|| Error::InvalidInput("empty stack".into()))?;
    let mut k = *first;
    for kb in rest {
        k = fold(&k, kb)?.0;
    }
    Ok(k)
}

/// Layer of a stack already expressed in the wave frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PreparedLayer {
    /// Stiffness divided by the stack's reference modulus.
    pub c: Voigt,
    /// Density divided by the reference modulus (s²/m²).
    pub rho: f64,
    pub thickness: f64,
    pub decoupled: bool,
}

/// A laminate rotated into the frame of a propagation direction, with
/// identical neighbouring layers merged.
#[derive(Clone, Debug)]
pub struct PreparedStack {
    pub layers: Vec<PreparedLayer>,
    /// Upper half when the laminate is mirror symmetric.
    pub half: Option<Vec<PreparedLayer>>,
    pub system: System,
    /// Reference modulus (Pa) all stiffnesses and densities are divided by.
    pub c_ref: f64,
    pub phi_deg: f64,
    pub total_thickness: f64,
}

impl PreparedStack {
    pub fn new(lam: &Laminate, phi_deg: f64) -> Result<Self> {
        let mut raw = Vec::with_capacity(lam.layers.len());
        for l in &lam.layers {
            let c0 = stiffness_from_engineering(&l.material)?;
            let c = rotate_stiffness(&c0, l.orientation_deg - phi_deg).c;
            raw.push((c, l.material.rho, l.thickness));
        }
        let c_ref = raw.iter().flat_map(|(c, _, _)| c.iter().flatten()).fold(0.0f64, |m, x| m.max(x.abs()));
        let scaled: Vec<PreparedLayer> = raw
            .iter()
            .map(|(c, rho, t)| {
                let mut cs = c.map(|row| row.map(|x| x / c_ref));
                let decoupled = is_decoupled(&cs);
                if decoupled {
                    for (i, j) in [(0, 5), (2, 5), (3, 4), (1, 5), (3, 5), (4, 5), (0, 3), (0, 4), (1, 3), (1, 4), (2, 3), (2, 4)]
                    {
                        cs[i][j] = 0.0;
                        cs[j][i] = 0.0;
                    }
                }
                PreparedLayer { c: cs, rho: rho / c_ref, thickness: *t, decoupled }
            })
            .collect();
        let total_thickness = lam.total_thickness();
        let half = lam.is_symmetric().then(|| merge(&cut_top(&scaled, total_thickness / 2.0)));
        let system = if scaled.iter().all(|l| l.decoupled) { System::Sagittal } else { System::Full };
        Ok(PreparedStack { layers: merge(&scaled), half, system, c_ref, phi_deg, total_thickness })
    }
}

fn merge(layers: &[PreparedLayer]) -> Vec<PreparedLayer> {
    let mut out: Vec<PreparedLayer> = Vec::with_capacity(layers.len());
    for l in layers {
        match out.last_mut() {
            Some(prev) if prev.c == l.c && prev.rho == l.rho => prev.thickness += l.thickness,
            _ => out.push(*l),
        }
    }
    out
}

fn cut_top(layers: &[PreparedLayer], depth: f64) -> Vec<PreparedLayer> {
    let mut out = Vec::new();
    let mut acc = 0.0;
    for l in layers {
        let remaining = depth - acc;
        if remaining <= 1e-12 * depth {
            break;
        }
        let mut l = *l;
        l.thickness = l.thickness.min(remaining);
        acc += l.thickness;
        out.push(l);
    }
    out
}

/// Layer matrices of every layer of `layers` at phase velocity `cp` and
/// angular frequency `omega`.
pub fn stack_matrices(
    layers: &[PreparedLayer],
    cp: f64,
    omega: f64,
    system: System,
) -> Result<(Vec<LayerMatrices>, Vec<BulkWaveSet>)> {
    let xi = omega / cp;
    let mut mats = Vec::with_capacity(layers.len());
    let mut waves = Vec::with_capacity(layers.len());
    for l in layers {
        let w = bulk_waves(&l.c, l.rho, cp)?;
        mats.push(layer_stiffness(&w, xi, l.thickness, system)?);
        waves.push(w);
    }
    Ok((mats, waves))
}

/// Global stiffness with the per-interface recursion history.
pub fn assemble_with_history(mats: &[LayerMatrices]) -> Result<(SMat<C64>, Vec<FoldStep>)> {
    let mut k = mats[0].k;
    let mut steps = Vec::with_capacity(mats.len().saturating_sub(1));
    for m in &mats[1..] {
        let (nk, step) = fold(&k, &m.k)?;
        k = nk;
        steps.push(step);
    }
    Ok((k, steps))
}

/// Displacements at every interface (top surface first, bottom surface
/// last) given the two outer ones.
pub fn interface_displacements(steps: &[FoldStep], u_top: &[C64], u_bot: &[C64]) -> Vec<[C64; 3]> {
    let n = u_top.len();
    let zero = C64::new(0.0, 0.0);
    let mut out = alloc::vec![[zero; 3]; steps.len() + 2];
    out[0][..n].copy_from_slice(u_top);
    out[steps.len() + 1][..n].copy_from_slice(u_bot);
    // Interface j+1 sits between the stack above (layers 0..=j) and layer
    // j+1; its displacement follows from stress continuity once the one
    // below it is known.
    for j in (0..steps.len()).rev() {
        let s = &steps[j];
        let below = out[j + 2];
        let r1 = s.a21.mul_vec(u_top);
        let r2 = s.b12.mul_vec(&below[..n]);
        let rhs: [C64; 3] = core::array::from_fn(|i| if i < n { r1[i] - r2[i] } else { zero });
        let u = s.z.mul_vec(&rhs[..n]);
        out[j + 1][..n].copy_from_slice(&u[..n]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elastic::{build_layup, find_material, LayupClass};

    fn stack(class: LayupClass, phi: f64) -> PreparedStack {
        let m = find_material("T700M21").unwrap().props;
        PreparedStack::new(&build_layup(class, 16, 2e-3, m).unwrap(), phi).unwrap()
    }

    #[test]
    fn merging_and_halving() {
        let ud = stack(LayupClass::Unidirectional, 0.0);
        assert_eq!(ud.layers.len(), 1);
        assert_eq!(ud.system, System::Sagittal);
        let half = ud.half.as_ref().unwrap();
        assert_eq!(half.len(), 1);
        assert!((half[0].thickness - 1e-3).abs() < 1e-15);
        let qi = stack(LayupClass::QuasiIsotropic, 0.0);
        assert_eq!(qi.layers.len(), 15);
        assert_eq!(qi.half.as_ref().unwrap().len(), 8);
        assert_eq!(qi.system, System::Full);
        let cp = stack(LayupClass::CrossPly, 0.0);
        assert_eq!(cp.system, System::Sagittal);
    }

    #[test]
    fn subdivided_layer_has_same_stiffness() {
        let s = stack(LayupClass::Unidirectional, 30.0);
        let l = s.layers[0];
        let (omega, cp) = (2.0 * core::f64::consts::PI * 150e3, 1500.0);
        let whole = stack_matrices(&[l], cp, omega, s.system).unwrap().0[0].k;
        for parts in [2usize, 3, 7] {
            let mut piece = l;
            piece.thickness /= parts as f64;
            let layers = alloc::vec![piece; parts];
            let (mats, _) = stack_matrices(&layers, cp, omega, s.system).unwrap();
            let ks: Vec<_> = mats.iter().map(|m| m.k).collect();
            let k = assemble_global(&ks).unwrap();
            assert!(k.sub(&whole).max_abs() <= 1e-6 * whole.max_abs(), "{parts} parts");
        }
    }

    #[test]
    fn interface_recovery_reproduces_direct_propagation() {
        // Split one layer in three: the interior displacements must match
        // the partial-wave field of the undivided layer.
        let s = stack(LayupClass::Unidirectional, 45.0);
        let l = s.layers[0];
        let (omega, cp) = (2.0 * core::f64::consts::PI * 120e3, 2100.0);
        let mut third = l;
        third.thickness /= 3.0;
        let (mats, _) = stack_matrices(&[third; 3], cp, omega, s.system).unwrap();
        let (_, steps) = assemble_with_history(&mats).unwrap();
        let u_top = [C64::new(0.3, 0.1), C64::new(-0.2, 0.4), C64::new(1.0, 0.0)];
        let u_bot = [C64::new(0.1, -0.5), C64::new(0.7, 0.0), C64::new(-0.3, 0.2)];
        let u = interface_displacements(&steps, &u_top, &u_bot);
        let (whole, waves) = stack_matrices(&[l], cp, omega, s.system).unwrap();
        let mut rhs = [C64::new(0.0, 0.0); 6];
        rhs[..3].copy_from_slice(&u_top);
        rhs[3..].copy_from_slice(&u_bot);
        let amp = whole[0].pm_inv.mul_vec(&rhs);
        let xi = omega / cp;
        for (j, depth) in [(1usize, third.thickness), (2, 2.0 * third.thickness)] {
            let mut exp = [C64::new(0.0, 0.0); 3];
            for q in 0..3 {
                let a = waves[0].alpha[2 * q];
                let down = (C64::new(0.0, -xi * depth) * a).exp();
                let up = (C64::new(0.0, -xi * (l.thickness - depth)) * a).exp();
                let p = waves[0].polarization[q];
                for i in 0..3 {
                    let s = if i == 2 { -1.0 } else { 1.0 };
                    exp[i] += p[i] * amp[q] * down + p[i] * s * amp[3 + q] * up;
                }
            }
            for i in 0..3 {
                assert!((u[j][i] - exp[i]).norm() < 1e-8, "interface {j} component {i}");
            }
        }
    }
}
