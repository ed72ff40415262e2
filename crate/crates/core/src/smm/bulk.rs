//! Partial (bulk) waves of a single monoclinic layer at a given phase
//! velocity.
//!
//! Fields of one partial wave go as `exp(i ξ (x1 + α x3) - i ω t)` with x3
//! pointing up. Each layer carries six waves in ± pairs; the "downward"
//! member of a pair decays (or, when propagating, travels) towards −x3.

use crate::elastic::Voigt;
use crate::error::{Error, Result};
use crate::linalg::{cubic_roots, C64};

const C11: (usize, usize) = (0, 0);
const C13: (usize, usize) = (0, 2);
const C16: (usize, usize) = (0, 5);
const C33: (usize, usize) = (2, 2);
const C36: (usize, usize) = (2, 5);
const C44: (usize, usize) = (3, 3);
const C45: (usize, usize) = (3, 4);
const C55: (usize, usize) = (4, 4);
const C66: (usize, usize) = (5, 5);

#[inline]
fn g(c: &Voigt, ij: (usize, usize)) -> f64 {
    c[ij.0][ij.1]
}

/// Relative size below which C16, C36 and C45 count as zero.
pub const DECOUPLING_TOL: f64 = 1e-12;

/// True when the in-plane coupling terms vanish, so the sagittal (u1, u3)
/// and shear-horizontal (u2) motions separate.
pub fn is_decoupled(c: &Voigt) -> bool {
    let s = c.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    [C16, C36, C45].iter().all(|&ij| g(c, ij).abs() <= DECOUPLING_TOL * s)
}

/// Christoffel matrix of a layer for the wavenumber ratio `alpha`.
pub fn christoffel_matrix(c: &Voigt, rho: f64, cp: f64, alpha: C64) -> [[C64; 3]; 3] {
    let rc2 = rho * cp * cp;
    let a2 = alpha * alpha;
    let m11 = a2 * g(c, C55) + (g(c, C11) - rc2);
    let m12 = a2 * g(c, C45) + g(c, C16);
    let m13 = alpha * (g(c, C13) + g(c, C55));
    let m22 = a2 * g(c, C44) + (g(c, C66) - rc2);
    let m23 = alpha * (g(c, C36) + g(c, C45));
    let m33 = a2 * g(c, C33) + (g(c, C55) - rc2);
    [[m11, m12, m13], [m12, m22, m23], [m13, m23, m33]]
}

/// Coefficients `[c3, c2, c1, c0]` of `det M = c3 a³ + c2 a² + c1 a + c0`
/// with `a = α²`. `crates/core/scripts/sextic_coefficients.py` derives them
/// symbolically.
pub fn sextic_coefficients(c: &Voigt, rho: f64, cp: f64) -> [f64; 4] {
    let rc2 = rho * cp * cp;
    let a = g(c, C11) - rc2;
    let b = g(c, C66) - rc2;
    let e = g(c, C55) - rc2;
    let p = g(c, C36) + g(c, C45);
    let q = g(c, C13) + g(c, C55);
    let f = g(c, C16);
    let gg = g(c, C45);
    let (c33, c44, c55) = (g(c, C33), g(c, C44), g(c, C55));
    let k3 = c55 * c44 * c33 - gg * gg * c33;
    let k2 = a * c44 * c33 + b * c55 * c33 + e * c55 * c44 - p * p * c55 - (2.0 * f * gg * c33 + gg * gg * e)
        + 2.0 * gg * p * q
        - q * q * c44;
    let k1 = a * b * c33 + a * e * c44 + b * e * c55 - p * p * a - (f * f * c33 + 2.0 * f * gg * e) + 2.0 * f * p * q
        - q * q * b;
    let k0 = a * b * e - f * f * e;
    [k3, k2, k1, k0]
}

/// Normalised coefficients `(A1, A2, A3)` of `α⁶ + A1 α⁴ + A2 α² + A3`.
pub fn sextic_normalised(c: &Voigt, rho: f64, cp: f64) -> [f64; 3] {
    let [k3, k2, k1, k0] = sextic_coefficients(c, rho, cp);
    [k2 / k3, k1 / k3, k0 / k3]
}

/// Square root of `a2` on the downward branch: `Im α < 0`, or `Re α ≤ 0`
/// when α is real.
pub fn downward_root(a2: C64) -> C64 {
    let r = a2.sqrt();
    let tiny = 1e-12 * r.norm();
    if r.im > tiny || (r.im.abs() <= tiny && r.re > 0.0) {
        -r
    } else {
        r
    }
}

fn nearly_equal(a: C64, b: C64) -> bool {
    (a - b).norm() <= 1e-10 * a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
}

/// All six α of a layer: `alpha[2k]` is the downward root of pair k and
/// `alpha[2k+1] = -alpha[2k]`. Pairs are ordered by ascending `Re α²`
/// (quasi-longitudinal first for subsonic phase velocities).
pub fn solve_alpha(c: &Voigt, rho: f64, cp: f64) -> Result<[C64; 6]> {
    let [k3, k2, k1, k0] = sextic_coefficients(c, rho, cp);
    let mut a2 = cubic_roots(k3, k2, k1, k0);
    a2.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    if nearly_equal(a2[0], a2[1]) || nearly_equal(a2[1], a2[2]) || nearly_equal(a2[0], a2[2]) {
        return Err(Error::DegenerateRoots { cp });
    }
    Ok(pairs_from_squares(a2))
}

fn pairs_from_squares(a2: [C64; 3]) -> [C64; 6] {
    let mut out = [C64::new(0.0, 0.0); 6];
    for k in 0..3 {
        let d = downward_root(a2[k]);
        out[2 * k] = d;
        out[2 * k + 1] = -d;
    }
    out
}

/// Displacement polarisation `(U1, U2, U3)` of a coupled-layer wave, as a
/// unit vector spanning the null space of the Christoffel matrix.
pub fn polarisation(m: &[[C64; 3]; 3], cp: f64) -> Result<[C64; 3]> {
    let mut best = [C64::new(0.0, 0.0); 3];
    let mut best_n = 0.0;
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let (r, s) = (m[i], m[j]);
        let v = [r[1] * s[2] - r[2] * s[1], r[2] * s[0] - r[0] * s[2], r[0] * s[1] - r[1] * s[0]];
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > best_n {
            best_n = n;
            best = v;
        }
    }
    let scale = m.iter().flatten().fold(0.0f64, |a, z| a.max(z.norm()));
    if !(best_n > 1e-10 * scale * scale) {
        return Err(Error::DecoupledMotion { cp });
    }
    Ok(best.map(|z| z / best_n))
}

/// Amplitude ratios `V = U2/U1` and `W = U3/U1` of a coupled-layer wave.
pub fn amplitude_ratios(c: &Voigt, rho: f64, cp: f64, alpha: C64) -> Result<(C64, C64)> {
    let p = polarisation(&christoffel_matrix(c, rho, cp, alpha), cp)?;
    if p[0].norm() <= 1e-12 {
        return Err(Error::DecoupledMotion { cp });
    }
    Ok((p[1] / p[0], p[2] / p[0]))
}

/// Stress amplitudes `(σ33, σ13, σ23) / iξ` produced by a wave with
/// displacement polarisation `p`.
pub fn stress_amplitudes(c: &Voigt, alpha: C64, p: [C64; 3]) -> [C64; 3] {
    let shear13 = alpha * p[0] + p[2];
    [
        p[0] * g(c, C13) + p[1] * g(c, C36) + alpha * p[2] * g(c, C33),
        shear13 * g(c, C55) + alpha * p[1] * g(c, C45),
        shear13 * g(c, C45) + alpha * p[1] * g(c, C44),
    ]
}

/// Engineering strain (Voigt order) divided by `iξ` for a wave with ratio
/// `alpha` and polarisation `p`.
pub fn strain_amplitudes(alpha: C64, p: [C64; 3]) -> [C64; 6] {
    [p[0], C64::new(0.0, 0.0), alpha * p[2], alpha * p[1], alpha * p[0] + p[2], p[1]]
}

/// The partial-wave basis of one layer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BulkWaveSet {
    /// `alpha[2k]` downward, `alpha[2k+1] = -alpha[2k]`.
    pub alpha: [C64; 6],
    /// Unit displacement polarisation of each downward wave. The upward
    /// partner has the sign of its third component flipped.
    pub polarization: [[C64; 3]; 3],
    /// `(σ33, σ13, σ23) / iξ` of each downward wave. The upward partner has
    /// the signs of σ13 and σ23 flipped.
    pub traction: [[C64; 3]; 3],
    /// Sagittal waves first, the shear-horizontal wave last.
    pub decoupled: bool,
}

impl BulkWaveSet {
    /// `V_q = U2/U1` for the downward wave of pair `k`.
    pub fn v_ratio(&self, k: usize) -> Option<C64> {
        let p = self.polarization[k];
        (p[0].norm() > 1e-14).then(|| p[1] / p[0])
    }

    /// `W_q = U3/U1` for the downward wave of pair `k`.
    pub fn w_ratio(&self, k: usize) -> Option<C64> {
        let p = self.polarization[k];
        (p[0].norm() > 1e-14).then(|| p[2] / p[0])
    }

    /// Stress amplitudes `D_iq` for the normalisation `U1 = 1`.
    pub fn d_amp(&self, k: usize) -> Option<[C64; 3]> {
        let p = self.polarization[k];
        (p[0].norm() > 1e-14).then(|| self.traction[k].map(|d| d / p[0]))
    }
}

/// Build the partial waves of a layer with stiffness `c` (in the wave
/// frame) at phase velocity `cp`.
pub fn bulk_waves(c: &Voigt, rho: f64, cp: f64) -> Result<BulkWaveSet> {
    if is_decoupled(c) {
        return decoupled_waves(c, rho, cp);
    }
    let alpha = solve_alpha(c, rho, cp)?;
    let mut polarization = [[C64::new(0.0, 0.0); 3]; 3];
    let mut traction = polarization;
    for k in 0..3 {
        let a = alpha[2 * k];
        let p = polarisation(&christoffel_matrix(c, rho, cp, a), cp)?;
        polarization[k] = p;
        traction[k] = stress_amplitudes(c, a, p);
    }
    Ok(BulkWaveSet { alpha, polarization, traction, decoupled: false })
}

fn decoupled_waves(c: &Voigt, rho: f64, cp: f64) -> Result<BulkWaveSet> {
    let rc2 = rho * cp * cp;
    let a = g(c, C11) - rc2;
    let e = g(c, C55) - rc2;
    let q = g(c, C13) + g(c, C55);
    // C55 C33 a² + (A C33 + E C55 − q²) a + A E = 0
    let qa = g(c, C55) * g(c, C33);
    let qb = a * g(c, C33) + e * g(c, C55) - q * q;
    let qc = a * e;
    let disc = C64::new(qb * qb - 4.0 * qa * qc, 0.0).sqrt();
    // Cancellation-free pair of roots.
    let t = if qb >= 0.0 { -(C64::new(qb, 0.0) + disc) * 0.5 } else { -(C64::new(qb, 0.0) - disc) * 0.5 };
    let (r1, r2) = if t.norm() == 0.0 {
        (C64::new(0.0, 0.0), C64::new(-qb / qa, 0.0))
    } else {
        (t / qa, C64::new(qc, 0.0) / t)
    };
    let mut sag = [r1, r2];
    sag.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    if nearly_equal(sag[0], sag[1]) {
        return Err(Error::DegenerateRoots { cp });
    }
    let sh = C64::new((rc2 - g(c, C66)) / g(c, C44), 0.0);
    let alpha = pairs_from_squares([sag[0], sag[1], sh]);
    let zero = C64::new(0.0, 0.0);
    let mut polarization = [[zero; 3]; 3];
    let mut traction = polarization;
    for k in 0..2 {
        let al = alpha[2 * k];
        let m = christoffel_matrix(c, rho, cp, al);
        let v0 = [m[0][2], -m[0][0]];
        let v1 = [m[2][2], -m[2][0]];
        let n0 = (v0[0].norm_sqr() + v0[1].norm_sqr()).sqrt();
        let n1 = (v1[0].norm_sqr() + v1[1].norm_sqr()).sqrt();
        let (v, n) = if n0 >= n1 { (v0, n0) } else { (v1, n1) };
        let scale = m.iter().flatten().fold(0.0f64, |s, z| s.max(z.norm()));
        if !(n > 1e-12 * scale) {
            return Err(Error::DegenerateRoots { cp });
        }
        let p = [v[0] / n, zero, v[1] / n];
        polarization[k] = p;
        traction[k] = stress_amplitudes(c, al, p);
    }
    let p_sh = [zero, C64::new(1.0, 0.0), zero];
    polarization[2] = p_sh;
    traction[2] = stress_amplitudes(c, alpha[4], p_sh);
    Ok(BulkWaveSet { alpha, polarization, traction, decoupled: true })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elastic::{find_material, rotate_stiffness, stiffness_from_engineering, EngineeringConstants};
    use proptest::prelude::*;

    fn det3(m: &[[C64; 3]; 3]) -> C64 {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    fn layer(angle: f64) -> (Voigt, f64) {
        let m = find_material("T700M21").unwrap().props;
        (rotate_stiffness(&stiffness_from_engineering(&m).unwrap(), angle).c, m.rho)
    }

    // Equations of motion for a single partial wave, written out directly
    // from Newton's law with the full 6×6 stiffness (no Christoffel algebra).
    fn momentum_residual(c: &Voigt, rho: f64, cp: f64, alpha: C64, p: [C64; 3]) -> f64 {
        // ∂/∂x1 → 1, ∂/∂x3 → α (common iξ factors dropped), ∂/∂x2 → 0.
        let grad = [C64::new(1.0, 0.0), C64::new(0.0, 0.0), alpha];
        let voigt = |i: usize, j: usize| match (i.min(j), i.max(j)) {
            (0, 0) => 0,
            (1, 1) => 1,
            (2, 2) => 2,
            (1, 2) => 3,
            (0, 2) => 4,
            _ => 5,
        };
        let mut r = [C64::new(0.0, 0.0); 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        r[i] += grad[j] * grad[l] * p[k] * c[voigt(i, j)][voigt(k, l)];
                    }
                }
            }
            r[i] -= p[i] * (rho * cp * cp);
        }
        let s = c[0][0];
        r.iter().map(|z| z.norm()).fold(0.0, f64::max) / s
    }

    #[test]
    fn coefficients_match_determinant_expansion() {
        let (c, rho) = layer(30.0);
        for cp in [500.0, 1500.0, 3000.0, 9000.0] {
            let k = sextic_coefficients(&c, rho, cp);
            for a in [C64::new(0.3, 0.1), C64::new(-1.2, 0.4), C64::new(2.0, 0.0)] {
                let a2 = a * a;
                let poly = ((a2 * k[0] + k[1]) * a2 + k[2]) * a2 + k[3];
                let det = det3(&christoffel_matrix(&c, rho, cp, a));
                assert!((poly - det).norm() <= 1e-10 * det.norm().max(k[0].abs()), "cp {cp}");
            }
        }
    }

    #[test]
    fn vieta_relations() {
        let (c, rho) = layer(45.0);
        let cp = 2000.0;
        let [a1, a2, a3] = sextic_normalised(&c, rho, cp);
        let al = solve_alpha(&c, rho, cp).unwrap();
        let sq: [C64; 3] = [al[0] * al[0], al[2] * al[2], al[4] * al[4]];
        let sum = sq[0] + sq[1] + sq[2];
        let pair = sq[0] * sq[1] + sq[0] * sq[2] + sq[1] * sq[2];
        let prod = sq[0] * sq[1] * sq[2];
        assert!((sum + a1).norm() <= 1e-9 * a1.abs().max(1.0));
        assert!((pair - a2).norm() <= 1e-9 * a2.abs().max(1.0));
        assert!((prod + a3).norm() <= 1e-9 * a3.abs().max(1.0));
    }

    #[test]
    fn isotropic_alphas_are_analytic() {
        let p = EngineeringConstants::isotropic(2700.0, 70e9, 0.33);
        let c = stiffness_from_engineering(&p).unwrap().c;
        let cl = (c[0][0] / p.rho).sqrt();
        let ct = (c[5][5] / p.rho).sqrt();
        let cp = 2000.0;
        let w = bulk_waves(&c, p.rho, cp).unwrap();
        assert!(w.decoupled);
        let al = C64::new(cp * cp / (cl * cl) - 1.0, 0.0).sqrt();
        let at = C64::new(cp * cp / (ct * ct) - 1.0, 0.0).sqrt();
        assert!((w.alpha[0] * w.alpha[0] - al * al).norm() < 1e-12);
        assert!((w.alpha[2] * w.alpha[2] - at * at).norm() < 1e-12);
        assert!((w.alpha[4] * w.alpha[4] - at * at).norm() < 1e-12);
        assert!(w.alpha[0].im < 0.0 && w.alpha[2].im < 0.0);
    }

    #[test]
    fn coupled_waves_satisfy_equations_of_motion() {
        for ang in [15.0, 30.0, 45.0, 60.0, -45.0] {
            let (c, rho) = layer(ang);
            for cp in [300.0, 1200.0, 2500.0, 6000.0, 11000.0] {
                let w = bulk_waves(&c, rho, cp).unwrap();
                assert!(!w.decoupled);
                for k in 0..3 {
                    for (al, flip) in [(w.alpha[2 * k], 1.0), (w.alpha[2 * k + 1], -1.0)] {
                        let mut p = w.polarization[k];
                        p[2] *= flip;
                        assert!(momentum_residual(&c, rho, cp, al, p) < 1e-9, "angle {ang} cp {cp}");
                    }
                }
            }
        }
    }

    #[test]
    fn decoupled_waves_satisfy_equations_of_motion() {
        for ang in [0.0, 90.0] {
            let (c, rho) = layer(ang);
            for cp in [300.0, 1700.0, 4000.0, 11000.0] {
                let w = bulk_waves(&c, rho, cp).unwrap();
                assert!(w.decoupled);
                assert_eq!(w.polarization[2][1], C64::new(1.0, 0.0));
                for k in 0..3 {
                    assert!(momentum_residual(&c, rho, cp, w.alpha[2 * k], w.polarization[k]) < 1e-9);
                }
            }
        }
    }

    #[test]
    fn stress_amplitudes_match_constitutive_law() {
        let (c, rho) = layer(30.0);
        let w = bulk_waves(&c, rho, 1800.0).unwrap();
        for k in 0..3 {
            let eps = strain_amplitudes(w.alpha[2 * k], w.polarization[k]);
            let sig: [C64; 6] = core::array::from_fn(|i| (0..6).map(|j| eps[j] * c[i][j]).sum());
            let t = w.traction[k];
            assert!((sig[2] - t[0]).norm() < 1e-6 * c[0][0]);
            assert!((sig[4] - t[1]).norm() < 1e-6 * c[0][0]);
            assert!((sig[3] - t[2]).norm() < 1e-6 * c[0][0]);
        }
        let (v, wr) = amplitude_ratios(&c, rho, 1800.0, w.alpha[0]).unwrap();
        assert_eq!(v, w.v_ratio(0).unwrap());
        assert!((wr - w.w_ratio(0).unwrap()).norm() < 1e-14);
        let d = w.d_amp(0).unwrap();
        let ratio = w.traction[0][0] / w.polarization[0][0];
        assert!((d[0] - ratio).norm() < 1e-9 * ratio.norm());
    }

    proptest! {
        #[test]
        fn roots_pair_and_satisfy_christoffel(ang in -90.0..90.0f64, cp in 100.0..12000.0f64) {
            let (c, rho) = layer(ang);
            let al = match solve_alpha(&c, rho, cp) { Ok(a) => a, Err(_) => return Ok(()) };
            let scale = c[0][0].powi(3);
            for k in 0..3 {
                prop_assert_eq!(al[2 * k + 1], -al[2 * k]);
                prop_assert!(al[2 * k].im <= 1e-12 * al[2 * k].norm());
            }
            for a in al {
                let d = det3(&christoffel_matrix(&c, rho, cp, a));
                prop_assert!(d.norm() <= 1e-8 * scale * (1.0 + a.norm_sqr()).powi(3));
            }
        }
    }
}
