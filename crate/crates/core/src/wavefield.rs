//! Modal fields through the thickness, energies and power flow.
//!
//! Time averages use `⟨Re(a e^{-iωt}) Re(b e^{-iωt})⟩ = ½ Re(a b̄)`, so the
//! strain and kinetic energy densities carry a factor ¼ and the power flow
//! a factor ½. With this convention the energy velocity equals dω/dξ.

use alloc::vec::Vec;

use crate::elastic::Laminate;
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::quadrature::gauss_legendre_on;
use crate::smm::bulk::strain_amplitudes;
use crate::smm::layer::{assemble_with_history, interface_displacements, stack_matrices, PreparedLayer, System};
use crate::smm::{find_modes, DispersionProblem, ModalSolution, Mode, ModeFamily, ScanOptions, Target};

pub const DEFAULT_STATIONS_PER_LAYER: usize = 16;

/// Field sample at one quadrature point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Station {
    /// Depth below the top surface, m.
    pub z: f64,
    /// Quadrature weight, m.
    pub weight: f64,
    pub rho: f64,
    /// Displacement (u1, u2, u3) in the wave frame.
    pub u: [C64; 3],
    /// Engineering strain, Voigt order.
    pub strain: [C64; 6],
    /// Stress, Voigt order, Pa per unit displacement.
    pub stress: [C64; 6],
}

/// Tractions `(σ33, σ13, σ23)` on a horizontal plane evaluated from the
/// layer above and from the layer below (`None` at the free surfaces).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterfaceTraction {
    pub z: f64,
    pub above: Option<[C64; 3]>,
    pub below: Option<[C64; 3]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WaveField {
    pub frequency: f64,
    pub omega: f64,
    pub xi: f64,
    pub phi_deg: f64,
    pub stations: Vec<Station>,
    pub interfaces: Vec<InterfaceTraction>,
    /// Largest stress magnitude in the field, for relative checks.
    pub stress_scale: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Energies {
    pub strain: f64,
    pub kinetic: f64,
}

impl Energies {
    pub fn total(&self) -> f64 {
        self.strain + self.kinetic
    }
}

/// Energy, power flow and group velocity of one mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyBundle {
    pub energies: Energies,
    /// Thickness-integrated power flow (P1, P2, P3) in the wave frame.
    pub power: [f64; 3],
    /// Group velocity components in the wave frame, m/s.
    pub cg: [f64; 2],
    /// m/s.
    pub cg_mag: f64,
    /// Angle from the wave normal to the energy direction, measured
    /// clockwise, degrees.
    pub skew_deg: f64,
    /// Direction of energy transport in the laminate frame, degrees.
    pub ray_deg: f64,
}

struct Segment {
    layer: PreparedLayer,
    z0: f64,
    u_top: [C64; 3],
    u_bot: [C64; 3],
}

fn flip_u(u: [C64; 3], family: ModeFamily) -> [C64; 3] {
    match family {
        ModeFamily::Symmetric => [u[0], u[1], -u[2]],
        ModeFamily::Antisymmetric => [-u[0], -u[1], u[2]],
    }
}

fn flip_voigt(s: [C64; 6], family: ModeFamily) -> [C64; 6] {
    let sign = match family {
        ModeFamily::Symmetric => [1.0, 1.0, 1.0, -1.0, -1.0, 1.0],
        ModeFamily::Antisymmetric => [-1.0, -1.0, -1.0, 1.0, 1.0, -1.0],
    };
    core::array::from_fn(|i| s[i] * sign[i])
}

/// Reconstruct displacement, strain and stress through the thickness for a
/// dispersion root, normalised so the largest displacement magnitude is 1.
pub fn reconstruct_field(lam: &Laminate, sol: &ModalSolution, stations_per_layer: usize) -> Result<WaveField> {
    let p = DispersionProblem::new(lam, sol.frequency, sol.phi_deg)?;
    let target = match sol.family {
        Some(f) if p.is_symmetric() => Target::Family(f),
        _ => Target::Stack,
    };
    let (cp, sv, x, n) = p.null_space(sol.cp, target)?;
    if n >= 2 {
        let ratio = sv[n - 2] / sv[0];
        if ratio <= 1e-6 {
            return Err(Error::NullSpaceAmbiguous { ratio });
        }
    }
    let system = p.stack.system;
    let nd = system.dim();
    let xi = p.omega / cp;
    let (layers, u_last): (&[PreparedLayer], Vec<C64>) = match target {
        Target::Family(f) => {
            let cols: &[usize] = match (system, f) {
                (System::Full, ModeFamily::Symmetric) => &[3, 4],
                (System::Full, ModeFamily::Antisymmetric) => &[5],
                (System::Sagittal, ModeFamily::Symmetric) => &[2],
                (System::Sagittal, ModeFamily::Antisymmetric) => &[3],
            };
            let mut mid = alloc::vec![C64::new(0.0, 0.0); nd];
            for (k, &c) in cols.iter().enumerate() {
                mid[c - nd] = x[nd + k];
            }
            (p.stack.half.as_deref().unwrap(), mid)
        }
        _ => (&p.stack.layers[..], x[nd..2 * nd].to_vec()),
    };
    let (mats, waves) = stack_matrices(layers, cp, p.omega, system)?;
    let (_, steps) = assemble_with_history(&mats)?;
    let iface = interface_displacements(&steps, &x[..nd], &u_last);

    let mut segments = Vec::with_capacity(layers.len());
    let mut z0 = 0.0;
    for (m, l) in layers.iter().enumerate() {
        segments.push(Segment { layer: *l, z0, u_top: iface[m], u_bot: iface[m + 1] });
        z0 += l.thickness;
    }

    let c_ref = p.stack.c_ref;
    let mut stations = Vec::with_capacity(segments.len() * stations_per_layer * 2);
    let mut interfaces = Vec::with_capacity(segments.len() + 1);
    let ixi = C64::new(0.0, xi);
    for (m, seg) in segments.iter().enumerate() {
        let w = &waves[m];
        let d = seg.layer.thickness;
        let mut rhs = [C64::new(0.0, 0.0); 6];
        for k in 0..nd {
            rhs[k] = seg.u_top[k];
            rhs[nd + k] = seg.u_bot[k];
        }
        let amp = mats[m].pm_inv.mul_vec(&rhs);
        let c = seg.layer.c;
        let sample = |s: f64| -> ([C64; 3], [C64; 6], [C64; 6]) {
            let mut u = [C64::new(0.0, 0.0); 3];
            let mut e = [C64::new(0.0, 0.0); 6];
            for q in 0..nd {
                let a = w.alpha[2 * q];
                let pd = w.polarization[q];
                let pu = [pd[0], pd[1], -pd[2]];
                let down = amp[q] * (C64::new(0.0, -xi * s) * a).exp();
                let up = amp[nd + q] * (C64::new(0.0, -xi * (d - s)) * a).exp();
                let ed = strain_amplitudes(a, pd);
                let eu = strain_amplitudes(-a, pu);
                for i in 0..3 {
                    u[i] += pd[i] * down + pu[i] * up;
                }
                for i in 0..6 {
                    e[i] += (ed[i] * down + eu[i] * up) * ixi;
                }
            }
            let sig: [C64; 6] = core::array::from_fn(|i| (0..6).map(|j| e[j] * (c[i][j] * c_ref)).sum());
            (u, e, sig)
        };
        let traction = |sig: &[C64; 6]| [sig[2], sig[4], sig[3]];
        let (_, _, top) = sample(0.0);
        let (_, _, bot) = sample(d);
        if m == 0 {
            interfaces.push(InterfaceTraction { z: 0.0, above: None, below: Some(traction(&top)) });
        } else {
            interfaces[m].below = Some(traction(&top));
        }
        interfaces.push(InterfaceTraction { z: seg.z0 + d, above: Some(traction(&bot)), below: None });
        let (zs, ws) = gauss_legendre_on(stations_per_layer, 0.0, d);
        for (s, wt) in zs.iter().zip(&ws) {
            let (u, strain, stress) = sample(*s);
            stations.push(Station { z: seg.z0 + s, weight: *wt, rho: seg.layer.rho * c_ref, u, strain, stress });
        }
    }

    if let Target::Family(f) = target {
        let total = p.stack.total_thickness;
        let upper = stations.clone();
        for s in upper.iter().rev() {
            stations.push(Station {
                z: total - s.z,
                weight: s.weight,
                rho: s.rho,
                u: flip_u(s.u, f),
                strain: flip_voigt(s.strain, f),
                stress: flip_voigt(s.stress, f),
            });
        }
        let flip_t = |t: [C64; 3]| match f {
            ModeFamily::Symmetric => [t[0], -t[1], -t[2]],
            ModeFamily::Antisymmetric => [-t[0], t[1], t[2]],
        };
        let upper_if = interfaces.clone();
        let mid = interfaces.len() - 1;
        interfaces[mid].below = upper_if[mid].above.map(flip_t);
        for t in upper_if[..mid].iter().rev() {
            interfaces.push(InterfaceTraction { z: total - t.z, above: t.below.map(flip_t), below: t.above.map(flip_t) });
        }
    }

    // Normalise: largest |u| becomes 1 with a real dominant component.
    let (imax, _) = stations
        .iter()
        .enumerate()
        .map(|(i, s)| (i, s.u.iter().map(|z| z.norm_sqr()).sum::<f64>()))
        .fold((0, -1.0), |a, b| if b.1 > a.1 { b } else { a });
    let su = stations[imax].u;
    let umag = su.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let dom = su.iter().fold(C64::new(0.0, 0.0), |a, &z| if z.norm() > a.norm() { z } else { a });
    if !(umag > 0.0 && umag.is_finite()) {
        return Err(Error::ZeroEnergy);
    }
    let factor = dom.conj() / (dom.norm() * umag);
    for s in stations.iter_mut() {
        s.u = s.u.map(|z| z * factor);
        s.strain = s.strain.map(|z| z * factor);
        s.stress = s.stress.map(|z| z * factor);
    }
    for t in interfaces.iter_mut() {
        t.above = t.above.map(|v| v.map(|z| z * factor));
        t.below = t.below.map(|v| v.map(|z| z * factor));
    }
    let stress_scale = stations.iter().flat_map(|s| s.stress.iter()).fold(0.0f64, |m, z| m.max(z.norm()));
    Ok(WaveField { frequency: p.frequency, omega: p.omega, xi, phi_deg: p.stack.phi_deg, stations, interfaces, stress_scale })
}

/// Time-averaged strain and kinetic energy per unit plate area.
pub fn energies(f: &WaveField) -> Energies {
    let mut es = 0.0;
    let mut ek = 0.0;
    for s in &f.stations {
        let se: f64 = (0..6).map(|i| (s.stress[i] * s.strain[i].conj()).re).sum();
        es += 0.25 * se * s.weight;
        let u2: f64 = s.u.iter().map(|z| z.norm_sqr()).sum();
        ek += 0.25 * s.rho * f.omega * f.omega * u2 * s.weight;
    }
    Energies { strain: es, kinetic: ek }
}

/// Time-averaged power flow through a unit width, wave frame.
pub fn power_flow(f: &WaveField) -> [f64; 3] {
    let mut p = [0.0; 3];
    for s in &f.stations {
        let v = s.u.map(|z| z * C64::new(0.0, -f.omega));
        let t = &s.stress;
        // σ_ij as a full tensor from Voigt.
        let sig = [[t[0], t[5], t[4]], [t[5], t[1], t[3]], [t[4], t[3], t[2]]];
        for (j, pj) in p.iter_mut().enumerate() {
            let flux: f64 = (0..3).map(|i| (sig[i][j] * v[i].conj()).re).sum();
            *pj += -0.5 * flux * s.weight;
        }
    }
    p
}

/// Group (energy) velocity of a mode from its power flow and energy.
pub fn group_velocity(lam: &Laminate, sol: &ModalSolution) -> Result<EnergyBundle> {
    group_velocity_with(lam, sol, DEFAULT_STATIONS_PER_LAYER)
}

pub fn group_velocity_with(lam: &Laminate, sol: &ModalSolution, stations_per_layer: usize) -> Result<EnergyBundle> {
    let field = reconstruct_field(lam, sol, stations_per_layer)?;
    Ok(bundle_from_field(&field))
        .and_then(|b| if b.energies.total() > 0.0 && b.energies.total().is_finite() { Ok(b) } else { Err(Error::ZeroEnergy) })
}

pub fn bundle_from_field(field: &WaveField) -> EnergyBundle {
    let energies = energies(field);
    let power = power_flow(field);
    let e = energies.total();
    let cg = [power[0] / e, power[1] / e];
    let skew_deg = -cg[1].atan2(cg[0]).to_degrees();
    EnergyBundle {
        energies,
        power,
        cg,
        cg_mag: (cg[0] * cg[0] + cg[1] * cg[1]).sqrt(),
        skew_deg,
        ray_deg: field.phi_deg - skew_deg,
    }
}

/// `dω/dξ` at fixed angle by a central difference of two dispersion roots
/// `±rel_step · f` around `frequency`.
pub fn group_velocity_fd(
    lam: &Laminate,
    mode: Mode,
    frequency: f64,
    phi_deg: f64,
    rel_step: f64,
    opts: &ScanOptions,
) -> Result<f64> {
    let pick = |f: f64| -> Result<f64> {
        let m = find_modes(lam, f, phi_deg, opts)?;
        Ok(m.into_iter().find(|s| s.mode == mode).expect("both modes are returned").cp)
    };
    let (f1, f2) = (frequency * (1.0 - rel_step), frequency * (1.0 + rel_step));
    let (c1, c2) = (pick(f1)?, pick(f2)?);
    let tau = 2.0 * core::f64::consts::PI;
    Ok(tau * (f2 - f1) / (tau * f2 / c2 - tau * f1 / c1))
}
