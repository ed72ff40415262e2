//! Root search of the dispersion relation and mode labelling.

use alloc::vec::Vec;

use super::bulk::{bulk_waves, BulkWaveSet};
use super::layer::{assemble_with_history, stack_matrices, PreparedLayer, PreparedStack, System};
use super::{ModalSolution, Mode, ModeFamily, ScanOptions, Sweep};
use crate::elastic::Laminate;
use crate::error::{Error, Result};
use crate::linalg::{null_vector, ScaledDet, SMat, C64, MAX_DIM};

/// The matrix whose determinant is the dispersion function.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    /// Global stiffness of the whole stack with all three displacements.
    Full,
    /// Global stiffness of the whole stack in the stack's own system
    /// (sagittal only when every layer is decoupled).
    Stack,
    /// Half-laminate matrix restricted to one mirror-symmetry family.
    Family(ModeFamily),
}

/// A laminate at one frequency and propagation direction.
#[derive(Clone, Debug)]
pub struct DispersionProblem {
    pub stack: PreparedStack,
    pub frequency: f64,
    pub omega: f64,
}

const PERTURBATIONS: [f64; 5] = [0.0, 1e-9, -1e-9, 3e-9, -3e-9];
/// Largest accepted `|F(root)| / |F(bracket end)|`.
const RESIDUAL_LIMIT: f64 = 1e-6;

/// Row and column selections that reduce the half-laminate stiffness to
/// one symmetry family: all top-surface equations plus the mid-plane
/// stresses that must vanish, against all top displacements plus the
/// mid-plane displacements left free.
fn family_selection(family: ModeFamily, system: System) -> (&'static [usize], &'static [usize]) {
    match (system, family) {
        (System::Full, ModeFamily::Symmetric) => (&[0, 1, 2, 4, 5], &[0, 1, 2, 3, 4]),
        (System::Full, ModeFamily::Antisymmetric) => (&[0, 1, 2, 3], &[0, 1, 2, 5]),
        (System::Sagittal, ModeFamily::Symmetric) => (&[0, 1, 3], &[0, 1, 2]),
        (System::Sagittal, ModeFamily::Antisymmetric) => (&[0, 1, 2], &[0, 1, 3]),
    }
}

impl DispersionProblem {
    pub fn new(lam: &Laminate, frequency: f64, phi_deg: f64) -> Result<Self> {
        if !(frequency.is_finite() && frequency > 0.0) {
            return Err(Error::InvalidInput(alloc::format!("frequency {frequency} must be positive")));
        }
        Ok(DispersionProblem {
            stack: PreparedStack::new(lam, phi_deg)?,
            frequency,
            omega: 2.0 * core::f64::consts::PI * frequency,
        })
    }

    pub fn is_symmetric(&self) -> bool {
        self.stack.half.is_some()
    }

    /// Target used for labelling `mode`.
    pub fn target_for(&self, mode: Mode) -> Target {
        if self.is_symmetric() {
            Target::Family(mode.family())
        } else {
            Target::Stack
        }
    }

    fn layers_and_system(&self, target: Target) -> (&[PreparedLayer], System) {
        match target {
            Target::Full => (&self.stack.layers, System::Full),
            Target::Stack => (&self.stack.layers, self.stack.system),
            Target::Family(_) => (self.stack.half.as_deref().expect("family target needs a symmetric stack"), self.stack.system),
        }
    }

    /// The dispersion matrix at exactly `cp`.
    pub fn matrix(&self, cp: f64, target: Target) -> Result<SMat<C64>> {
        let (layers, system) = self.layers_and_system(target);
        let (mats, _) = stack_matrices(layers, cp, self.omega, system)?;
        let (k, _) = assemble_with_history(&mats)?;
        Ok(match target {
            Target::Family(f) => {
                let (rows, cols) = family_selection(f, system);
                k.select(rows, cols)
            }
            _ => k,
        })
    }

    /// Determinant at `cp`, nudging `cp` by a few parts per billion when
    /// the layer algebra degenerates. Returns the phase velocity actually
    /// used.
    pub fn det(&self, cp: f64, target: Target) -> Result<(f64, ScaledDet<C64>)> {
        let mut last = Error::InvalidInput("unreachable".into());
        for d in PERTURBATIONS {
            let c = cp * (1.0 + d);
            match self.matrix(c, target) {
                Ok(m) => return Ok((c, m.lu().det())),
                Err(e) if e.is_perturbable() => last = e,
                Err(e) => return Err(e),
            }
        }
        Err(last)
    }

    /// Null vector of the dispersion matrix at a root, with the singular
    /// values of that matrix (descending).
    pub fn null_space(&self, cp: f64, target: Target) -> Result<(f64, [f64; MAX_DIM], [C64; MAX_DIM], usize)> {
        let mut last = Error::InvalidInput("unreachable".into());
        for d in PERTURBATIONS {
            let c = cp * (1.0 + d);
            match self.matrix(c, target) {
                Ok(m) => {
                    let (sv, x) = null_vector(&m);
                    return Ok((c, sv, x, m.n()));
                }
                Err(e) if e.is_perturbable() => last = e,
                Err(e) => return Err(e),
            }
        }
        Err(last)
    }

    /// Bulk waves of every merged layer at `cp`.
    pub fn bulk_waves(&self, cp: f64) -> Result<Vec<BulkWaveSet>> {
        self.stack.layers.iter().map(|l| bulk_waves(&l.c, l.rho, cp)).collect()
    }
}

/// Unit vector along which the determinant's values line up in the complex
/// plane; the dispersion function is real up to a constant phase.
fn projection_axis(values: &[ScaledDet<C64>]) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for v in values {
        let m = v.mantissa;
        let n = m.norm();
        if n > 0.0 && n.is_finite() {
            let u = m / n;
            s += u * u;
        }
    }
    if s.norm() == 0.0 {
        return C64::new(1.0, 0.0);
    }
    let half = s.arg() / 2.0;
    C64::new(half.cos(), half.sin())
}

fn projected_sign(d: &ScaledDet<C64>, axis: C64) -> f64 {
    let r = (d.mantissa * axis.conj()).re;
    if r > 0.0 {
        1.0
    } else if r < 0.0 {
        -1.0
    } else {
        0.0
    }
}

struct Bracket {
    lo: (f64, ScaledDet<C64>),
    hi: (f64, ScaledDet<C64>),
}

/// Bisect a sign change of the projected determinant and check that the
/// result is a zero rather than a pole.
fn refine(p: &DispersionProblem, target: Target, b: Bracket, axis: C64, opts: &ScanOptions) -> Result<Option<(f64, f64)>> {
    let mut a = b.lo.0;
    let mut c = b.hi.0;
    let ref_log2 = b.lo.1.log2_abs().max(b.hi.1.log2_abs());
    let sa = projected_sign(&b.lo.1, axis);
    let mut iter = 0;
    while (c - a) > opts.rel_tol * a && iter < 200 {
        let m = 0.5 * (a + c);
        let (_, fm) = p.det(m, target)?;
        let sm = projected_sign(&fm, axis);
        if sm == 0.0 {
            a = m;
            c = m;
            break;
        }
        if sm == sa {
            a = m;
        } else {
            c = m;
        }
        iter += 1;
    }
    let root = 0.5 * (a + c);
    let (_, froot) = p.det(root, target)?;
    let ratio = libm::exp2(froot.log2_abs() - ref_log2);
    if ratio <= RESIDUAL_LIMIT {
        Ok(Some((root, ratio)))
    } else {
        log::debug!("rejected pole-like sign change near cp = {root:.3} (ratio {ratio:.2e})");
        Ok(None)
    }
}

/// All roots of the dispersion function of `target` in the scan range,
/// ascending, with their residual ratios.
pub(crate) fn scan_roots(p: &DispersionProblem, target: Target, opts: &ScanOptions) -> Result<Vec<(f64, f64)>> {
    let n = ((opts.cp_max - opts.cp_min) / opts.cp_step).round() as usize;
    let mut samples: Vec<Option<(f64, ScaledDet<C64>)>> = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let cp = opts.cp_min + i as f64 * opts.cp_step;
        samples.push(match p.det(cp, target) {
            Ok(v) => Some(v),
            Err(e) if e.is_perturbable() => None,
            Err(e) => return Err(e),
        });
    }
    let dets: Vec<ScaledDet<C64>> = samples.iter().flatten().map(|s| s.1).collect();
    let axis = projection_axis(&dets);
    let mut roots = Vec::new();
    for w in samples.windows(2) {
        let (Some(lo), Some(hi)) = (w[0], w[1]) else { continue };
        let (sl, sh) = (projected_sign(&lo.1, axis), projected_sign(&hi.1, axis));
        if sl == 0.0 {
            roots.push((lo.0, 0.0));
            continue;
        }
        if sl != sh && sh != 0.0 {
            if let Some(r) = refine(p, target, Bracket { lo, hi }, axis, opts)? {
                roots.push(r);
            }
        }
    }
    Ok(roots)
}

/// Roots of one symmetry family of a symmetric laminate (or of the whole
/// stack when `family` is `None`), in m/s, ascending.
pub fn family_roots(
    lam: &Laminate,
    frequency: f64,
    phi_deg: f64,
    family: Option<ModeFamily>,
    opts: &ScanOptions,
) -> Result<Vec<f64>> {
    let p = DispersionProblem::new(lam, frequency, phi_deg)?;
    let target = match family {
        Some(f) if p.is_symmetric() => Target::Family(f),
        Some(_) => return Err(Error::InvalidInput("laminate is not mirror symmetric".into())),
        None => Target::Stack,
    };
    Ok(scan_roots(&p, target, opts)?.into_iter().map(|r| r.0).collect())
}

/// Determinant of the full global stiffness matrix at one phase velocity.
pub fn characteristic(lam: &Laminate, frequency: f64, phi_deg: f64, cp: f64) -> Result<ScaledDet<C64>> {
    let p = DispersionProblem::new(lam, frequency, phi_deg)?;
    Ok(p.matrix(cp, Target::Full)?.lu().det())
}

/// Top-surface displacement of the mode at a root, as (u1, u2, u3) moduli.
fn surface_polarisation(p: &DispersionProblem, cp: f64, target: Target) -> Result<[f64; 3]> {
    let (_, _, x, _) = p.null_space(cp, target)?;
    let system = p.stack.system;
    let mut u = [0.0; 3];
    for (k, &i) in system.disp_components().iter().enumerate() {
        u[i] = x[k].norm();
    }
    Ok(u)
}

fn solution(p: &DispersionProblem, mode: Mode, target: Target, cp: f64, residual: f64) -> Result<ModalSolution> {
    Ok(ModalSolution {
        mode,
        family: match target {
            Target::Family(f) => Some(f),
            _ => None,
        },
        frequency: p.frequency,
        phi_deg: p.stack.phi_deg,
        cp,
        xi: p.omega / cp,
        residual,
        per_layer: p.bulk_waves(cp)?,
    })
}

fn label_roots(p: &DispersionProblem, opts: &ScanOptions) -> Result<Vec<ModalSolution>> {
    let no_modes = || Error::NoModesFound { cp_min: opts.cp_min, cp_max: opts.cp_max };
    let mut out = Vec::with_capacity(2);
    if p.is_symmetric() {
        let anti = Target::Family(ModeFamily::Antisymmetric);
        let sym = Target::Family(ModeFamily::Symmetric);
        let a = scan_roots(p, anti, opts)?;
        let &(cpa, ra) = a.first().ok_or_else(no_modes)?;
        out.push(solution(p, Mode::A0, anti, cpa, ra)?);
        let s = scan_roots(p, sym, opts)?;
        let mut chosen = None;
        for &(cp, r) in &s {
            // The symmetric family also holds the shear-horizontal mode;
            // S0 is the slowest member dominated by in-plane axial motion.
            let u = if p.stack.system == System::Sagittal { [1.0, 0.0, 0.0] } else { surface_polarisation(p, cp, sym)? };
            if u[0] >= u[1] {
                chosen = Some((cp, r));
                break;
            }
        }
        let (cps, rs) = match chosen {
            Some(c) => c,
            None => {
                let last = *s.last().ok_or_else(no_modes)?;
                log::warn!("ModeLabelAmbiguous: no axial-dominated symmetric root, using cp = {:.1}", last.0);
                last
            }
        };
        out.push(solution(p, Mode::S0, sym, cps, rs)?);
    } else {
        let all = scan_roots(p, Target::Stack, opts)?;
        let &(cpa, ra) = all.first().ok_or_else(no_modes)?;
        out.push(solution(p, Mode::A0, Target::Stack, cpa, ra)?);
        let mut chosen = None;
        for &(cp, r) in &all[1..] {
            let u = surface_polarisation(p, cp, Target::Stack)?;
            if u[0] >= u[1] && u[0] >= u[2] {
                chosen = Some((cp, r));
                break;
            }
        }
        let (cps, rs) = match chosen {
            Some(c) => c,
            None => {
                let &(cp, r) = all.get(1).ok_or_else(no_modes)?;
                (cp, r)
            }
        };
        log::warn!("ModeLabelAmbiguous: non-symmetric laminate, S0 picked by surface polarisation");
        out.push(solution(p, Mode::S0, Target::Stack, cps, rs)?);
    }
    Ok(out)
}

/// Fundamental antisymmetric and symmetric roots (A0 first) at one
/// frequency and angle.
pub fn find_modes(lam: &Laminate, frequency: f64, phi_deg: f64, opts: &ScanOptions) -> Result<Vec<ModalSolution>> {
    let p = DispersionProblem::new(lam, frequency, phi_deg)?;
    label_roots(&p, opts)
}

/// Nearest root to `pred` found by stepping outward on both sides.
fn local_root(p: &DispersionProblem, target: Target, pred: f64, opts: &ScanOptions) -> Result<Option<(f64, f64)>> {
    let step = opts.trace_step * pred;
    let kmax = (opts.trace_window / opts.trace_step).ceil() as usize;
    let center = p.det(pred, target)?;
    let axis = projection_axis(&[center.1]);
    let mut left = center;
    let mut right = center;
    let mut left_open = true;
    let mut right_open = true;
    for k in 1..=kmax {
        for side in [1.0, -1.0] {
            let open = if side > 0.0 { right_open } else { left_open };
            if !open {
                continue;
            }
            let cp = pred + side * step * k as f64;
            if cp < opts.cp_min * 0.5 || cp > opts.cp_max * 1.05 {
                if side > 0.0 {
                    right_open = false;
                } else {
                    left_open = false;
                }
                continue;
            }
            let v = match p.det(cp, target) {
                Ok(v) => v,
                Err(e) if e.is_perturbable() => continue,
                Err(e) => return Err(e),
            };
            let prev = if side > 0.0 { right } else { left };
            if projected_sign(&v.1, axis) != projected_sign(&prev.1, axis) {
                let br = if side > 0.0 { Bracket { lo: prev, hi: v } } else { Bracket { lo: v, hi: prev } };
                if let Some(r) = refine(p, target, br, axis, opts)? {
                    return Ok(Some(r));
                }
            }
            if side > 0.0 {
                right = v;
            } else {
                left = v;
            }
        }
    }
    Ok(None)
}

/// Follow one mode across a sweep, seeding from a full scan at the first
/// point and continuing each later point from the previous roots.
pub fn trace_branch(lam: &Laminate, mode: Mode, sweep: &Sweep, opts: &ScanOptions) -> Result<Vec<ModalSolution>> {
    let points: Vec<(f64, f64)> = match sweep {
        Sweep::Frequency { phi_deg, frequencies } => frequencies.iter().map(|&f| (f, *phi_deg)).collect(),
        Sweep::Angle { frequency, angles_deg } => angles_deg.iter().map(|&a| (*frequency, a)).collect(),
    };
    let mut out: Vec<ModalSolution> = Vec::with_capacity(points.len());
    let mut cached: Option<DispersionProblem> = None;
    for &(f, phi) in &points {
        let p = match cached.take() {
            Some(mut p) if p.stack.phi_deg == phi => {
                p.frequency = f;
                p.omega = 2.0 * core::f64::consts::PI * f;
                p
            }
            _ => DispersionProblem::new(lam, f, phi)?,
        };
        let target = p.target_for(mode);
        let pred = match out.len() {
            0 => None,
            1 => Some(out[0].cp),
            n => {
                let (a, b) = (&out[n - 2], &out[n - 1]);
                let lin = 2.0 * b.cp - a.cp;
                Some(if (lin - b.cp).abs() < 0.1 * b.cp { lin } else { b.cp })
            }
        };
        let found = match pred {
            Some(pred) => local_root(&p, target, pred.clamp(opts.cp_min, opts.cp_max), opts)?,
            None => None,
        };
        let sol = match found {
            Some((cp, r)) => solution(&p, mode, target, cp, r)?,
            None => {
                if pred.is_some() {
                    log::debug!("{} local search failed at f = {f}, phi = {phi}; rescanning", mode.tag());
                }
                let labelled = label_roots(&p, opts).map_err(|e| match e {
                    Error::NoModesFound { .. } => Error::BranchLost { mode: mode.tag(), frequency: f, phi_deg: phi },
                    e => e,
                })?;
                labelled
                    .into_iter()
                    .find(|s| s.mode == mode)
                    .ok_or(Error::BranchLost { mode: mode.tag(), frequency: f, phi_deg: phi })?
            }
        };
        out.push(sol);
        cached = Some(p);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elastic::{build_layup, find_material, EngineeringConstants, LayupClass};

    fn ud() -> Laminate {
        build_layup(LayupClass::Unidirectional, 16, 2e-3, find_material("T700M21").unwrap().props).unwrap()
    }

    #[test]
    fn ud_fundamental_modes_at_200khz() {
        let m = find_modes(&ud(), 200e3, 0.0, &ScanOptions::default()).unwrap();
        assert_eq!(m[0].mode, Mode::A0);
        assert_eq!(m[1].mode, Mode::S0);
        // S0 along the fibres sits just under the plate velocity
        // sqrt(Q11 / rho) at low fd.
        let q11 = 125.5e9 / (1.0 - 0.37 * 0.37 * 8.7 / 125.5);
        let plate = (q11 / 1571.0f64).sqrt();
        assert!(m[1].cp < plate && m[1].cp > 0.99 * plate, "S0 {}", m[1].cp);
        assert!(m[0].cp > 1000.0 && m[0].cp < 2000.0, "A0 {}", m[0].cp);
        for s in &m {
            assert!(s.residual < 1e-6);
        }
    }

    #[test]
    fn family_roots_agree_with_full_determinant() {
        let lam = ud();
        let opts = ScanOptions::default();
        let full = family_roots(&lam, 150e3, 30.0, None, &opts).unwrap();
        let anti = family_roots(&lam, 150e3, 30.0, Some(ModeFamily::Antisymmetric), &opts).unwrap();
        let sym = family_roots(&lam, 150e3, 30.0, Some(ModeFamily::Symmetric), &opts).unwrap();
        assert_eq!(full.len(), anti.len() + sym.len());
        for r in anti.iter().chain(sym.iter()) {
            assert!(full.iter().any(|f| (f - r).abs() < 1e-4 * r), "root {r} missing from {full:?}");
        }
    }

    #[test]
    fn isotropic_plate_has_no_angle_dependence() {
        let al = EngineeringConstants::isotropic(2700.0, 70e9, 0.33);
        let lam = Laminate::single(al, 1e-3, 0.0).unwrap();
        let opts = ScanOptions::default();
        let a = find_modes(&lam, 300e3, 0.0, &opts).unwrap();
        let b = find_modes(&lam, 300e3, 37.0, &opts).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x.cp - y.cp).abs() < 1e-6 * x.cp);
        }
    }

    #[test]
    fn trace_follows_fresh_scans() {
        let lam = build_layup(LayupClass::QuasiIsotropic, 16, 2e-3, find_material("T800M924").unwrap().props).unwrap();
        let opts = ScanOptions::default();
        let angles: Vec<f64> = (0..=6).map(|k| k as f64 * 7.5).collect();
        for mode in Mode::BOTH {
            let tr = trace_branch(&lam, mode, &Sweep::Angle { frequency: 150e3, angles_deg: angles.clone() }, &opts).unwrap();
            for (s, &a) in tr.iter().zip(&angles) {
                let fresh = find_modes(&lam, 150e3, a, &opts).unwrap();
                let f = fresh.iter().find(|m| m.mode == mode).unwrap();
                assert!((s.cp - f.cp).abs() < 1e-5 * f.cp, "{mode:?} at {a}: {} vs {}", s.cp, f.cp);
            }
        }
    }
}
