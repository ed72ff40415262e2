//! Transversely isotropic lamina properties, stiffness matrices and layups.
//!
//! Voigt order throughout is (11, 22, 33, 23, 13, 12). The fibre direction
//! of a lamina is its local 1-axis and the lamina is isotropic in the 2-3
//! plane.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::{format, vec};

use crate::error::{Error, Result};
use crate::linalg::{is_positive_definite, SMat};

pub type Voigt = [[f64; 6]; 6];

/// Engineering constants in SI units (kg/m³, Pa).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EngineeringConstants {
    pub rho: f64,
    pub e1: f64,
    pub e2: f64,
    pub g12: f64,
    pub nu12: f64,
    pub nu23: f64,
}

pub const PROPERTY_NAMES: [&str; 6] = ["rho", "E1", "E2", "G12", "nu12", "nu23"];

impl EngineeringConstants {
    /// Build from the table units used in data files: density in kg/m³ and
    /// moduli in GPa.
    pub fn from_gpa(rho: f64, e1_gpa: f64, e2_gpa: f64, g12_gpa: f64, nu12: f64, nu23: f64) -> Self {
        EngineeringConstants { rho, e1: e1_gpa * 1e9, e2: e2_gpa * 1e9, g12: g12_gpa * 1e9, nu12, nu23 }
    }

    /// Isotropic material: `E1 = E2`, `ν12 = ν23`, `G12 = E / 2(1+ν)`.
    pub fn isotropic(rho: f64, e: f64, nu: f64) -> Self {
        EngineeringConstants { rho, e1: e, e2: e, g12: e / (2.0 * (1.0 + nu)), nu12: nu, nu23: nu }
    }

    /// Properties in the fixed order (ρ, E1, E2, G12, ν12, ν23), moduli in
    /// GPa. This is the order of regression targets.
    pub fn to_vector_gpa(&self) -> [f64; 6] {
        [self.rho, self.e1 * 1e-9, self.e2 * 1e-9, self.g12 * 1e-9, self.nu12, self.nu23]
    }

    pub fn from_vector_gpa(v: [f64; 6]) -> Self {
        Self::from_gpa(v[0], v[1], v[2], v[3], v[4], v[5])
    }

    pub fn validate(&self) -> Result<()> {
        let vals = [self.rho, self.e1, self.e2, self.g12];
        if vals.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidInput(format!("non-positive density or modulus in {self:?}")));
        }
        if !(self.nu12.is_finite() && self.nu23.is_finite()) || self.nu23 <= -1.0 {
            return Err(Error::InvalidInput(format!("invalid Poisson ratio in {self:?}")));
        }
        Ok(())
    }

    pub fn compliance(&self) -> Voigt {
        let mut s = [[0.0; 6]; 6];
        s[0][0] = 1.0 / self.e1;
        s[1][1] = 1.0 / self.e2;
        s[2][2] = 1.0 / self.e2;
        s[0][1] = -self.nu12 / self.e1;
        s[0][2] = -self.nu12 / self.e1;
        s[1][2] = -self.nu23 / self.e2;
        s[1][0] = s[0][1];
        s[2][0] = s[0][2];
        s[2][1] = s[1][2];
        s[3][3] = 2.0 * (1.0 + self.nu23) / self.e2;
        s[4][4] = 1.0 / self.g12;
        s[5][5] = 1.0 / self.g12;
        s
    }
}

/// Coordinate frame a stiffness matrix is expressed in.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Frame {
    /// Lamina axes, fibre along x1.
    Material,
    /// Rotated about x3 so the fibre sits at `angle_deg` counterclockwise
    /// from x1.
    Rotated { angle_deg: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StiffnessMatrix {
    pub c: Voigt,
    pub frame: Frame,
}

impl StiffnessMatrix {
    pub fn max_abs(&self) -> f64 {
        self.c.iter().flatten().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let s = self.max_abs();
        (0..6).all(|i| (0..6).all(|j| (self.c[i][j] - self.c[j][i]).abs() <= tol * s))
    }
}

/// Invert the compliance matrix of a transversely isotropic lamina.
pub fn stiffness_from_engineering(p: &EngineeringConstants) -> Result<StiffnessMatrix> {
    p.validate()?;
    let s = p.compliance();
    let sm = SMat::<f64>::from_fn(6, |i, j| s[i][j]);
    if !is_positive_definite(&sm) {
        return Err(Error::NonPositiveDefinite(format!(
            "compliance of E1={:e}, E2={:e}, G12={:e}, nu12={}, nu23={}",
            p.e1, p.e2, p.g12, p.nu12, p.nu23
        )));
    }
    let inv = sm.inverse().ok_or_else(|| Error::NonPositiveDefinite("singular compliance".to_string()))?;
    let mut c = [[0.0; 6]; 6];
    for (i, row) in c.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = 0.5 * (inv[(i, j)] + inv[(j, i)]);
        }
    }
    Ok(StiffnessMatrix { c, frame: Frame::Material })
}

/// Bond matrix for a rotation of `angle_deg` about x3.
pub fn bond_matrix(angle_deg: f64) -> Voigt {
    let t = angle_deg.to_radians();
    let (s, c) = t.sin_cos();
    let a = [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]];
    const PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)];
    let mut m = [[0.0; 6]; 6];
    for (i, &(p, q)) in PAIRS.iter().enumerate() {
        for (j, &(k, l)) in PAIRS.iter().enumerate() {
            m[i][j] = if j < 3 { a[p][k] * a[q][l] } else { a[p][k] * a[q][l] + a[p][l] * a[q][k] };
        }
    }
    m
}

/// Express `c` in axes where its fibre appears at `angle_deg`
/// counterclockwise from x1 (relative to its current frame).
pub fn rotate_stiffness(c: &StiffnessMatrix, angle_deg: f64) -> StiffnessMatrix {
    let m = bond_matrix(angle_deg);
    let mut tmp = [[0.0; 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            tmp[i][j] = (0..6).map(|k| m[i][k] * c.c[k][j]).sum();
        }
    }
    let mut out = [[0.0; 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            out[i][j] = (0..6).map(|k| tmp[i][k] * m[j][k]).sum();
        }
    }
    for i in 0..6 {
        for j in 0..i {
            let v = 0.5 * (out[i][j] + out[j][i]);
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    let base = match c.frame {
        Frame::Material => 0.0,
        Frame::Rotated { angle_deg } => angle_deg,
    };
    StiffnessMatrix { c: out, frame: Frame::Rotated { angle_deg: base + angle_deg } }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    /// Fibre angle in the laminate frame, degrees.
    pub orientation_deg: f64,
    /// Metres.
    pub thickness: f64,
    pub material: EngineeringConstants,
}

/// Layup families used as classification labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LayupClass {
    Unidirectional,
    CrossPly,
    QuasiIsotropic,
}

impl LayupClass {
    pub const ALL: [LayupClass; 3] = [LayupClass::Unidirectional, LayupClass::CrossPly, LayupClass::QuasiIsotropic];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn tag(self) -> &'static str {
        match self {
            LayupClass::Unidirectional => "UD",
            LayupClass::CrossPly => "CP",
            LayupClass::QuasiIsotropic => "QI",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "UD" | "UNIDIRECTIONAL" => Some(LayupClass::Unidirectional),
            "CP" | "CROSSPLY" | "CROSS-PLY" => Some(LayupClass::CrossPly),
            "QI" | "QUASIISOTROPIC" | "QUASI-ISOTROPIC" => Some(LayupClass::QuasiIsotropic),
            _ => None,
        }
    }

    /// Half-laminate repeat unit; the full stack is this unit repeated and
    /// then mirrored.
    pub fn default_unit(self) -> &'static [f64] {
        match self {
            LayupClass::Unidirectional => &[0.0],
            LayupClass::CrossPly => &[0.0, 90.0],
            LayupClass::QuasiIsotropic => &[0.0, 45.0, -45.0, 90.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Laminate {
    /// Top to bottom.
    pub layers: Vec<Layer>,
    pub layup_class: Option<LayupClass>,
}

impl Laminate {
    pub fn new(layers: Vec<Layer>, layup_class: Option<LayupClass>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidInput("laminate has no layers".to_string()));
        }
        for l in &layers {
            if !(l.thickness.is_finite() && l.thickness > 0.0) {
                return Err(Error::InvalidInput(format!("layer thickness {} must be positive", l.thickness)));
            }
            if !l.orientation_deg.is_finite() {
                return Err(Error::InvalidInput("non-finite layer orientation".to_string()));
            }
            stiffness_from_engineering(&l.material)?;
        }
        Ok(Laminate { layers, layup_class })
    }

    /// Single homogeneous layer.
    pub fn single(material: EngineeringConstants, thickness: f64, orientation_deg: f64) -> Result<Self> {
        Self::new(vec![Layer { orientation_deg, thickness, material }], None)
    }

    pub fn total_thickness(&self) -> f64 {
        self.layers.iter().map(|l| l.thickness).sum()
    }

    /// Mirror symmetry about the mid-plane.
    pub fn is_symmetric(&self) -> bool {
        let n = self.layers.len();
        let d = self.total_thickness();
        (0..n / 2).all(|i| {
            let (a, b) = (&self.layers[i], &self.layers[n - 1 - i]);
            a.material == b.material
                && a.orientation_deg == b.orientation_deg
                && (a.thickness - b.thickness).abs() <= 1e-12 * d
        })
    }

    pub fn stacking_string(&self) -> String {
        let parts: Vec<String> = self.layers.iter().map(|l| format!("{}", l.orientation_deg)).collect();
        format!("[{}]", parts.join("/"))
    }
}

/// Symmetric layup from a half-laminate repeat unit, e.g. `[0, 45, -45, 90]`
/// with 16 layers gives `[0/45/-45/90]_2s`.
pub fn build_layup_from_unit(
    unit: &[f64],
    class: Option<LayupClass>,
    n_layers: usize,
    total_thickness: f64,
    material: EngineeringConstants,
) -> Result<Laminate> {
    let tag = class.map(LayupClass::tag).unwrap_or("custom");
    if unit.is_empty() || n_layers == 0 || n_layers % 2 != 0 || (n_layers / 2) % unit.len() != 0 {
        return Err(Error::IncompatibleCount { class: tag, n_layers });
    }
    let t = total_thickness / n_layers as f64;
    let half: Vec<f64> = unit.iter().copied().cycle().take(n_layers / 2).collect();
    let layers = half
        .iter()
        .chain(half.iter().rev())
        .map(|&o| Layer { orientation_deg: o, thickness: t, material })
        .collect();
    Laminate::new(layers, class)
}

pub fn build_layup(
    class: LayupClass,
    n_layers: usize,
    total_thickness: f64,
    material: EngineeringConstants,
) -> Result<Laminate> {
    build_layup_from_unit(class.default_unit(), Some(class), n_layers, total_thickness, material)
}

#[derive(Clone, Debug, PartialEq)]
pub struct NamedMaterial {
    pub name: String,
    pub props: EngineeringConstants,
}

const LIBRARY_CSV: &str = include_str!("../data/materials.csv");

/// Parse `name,rho,E1_GPa,E2_GPa,G12_GPa,nu12,nu23` rows (header first).
pub fn parse_material_table(text: &str) -> Result<Vec<NamedMaterial>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::InvalidInput("empty material table".to_string()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols != ["name", "rho", "E1_GPa", "E2_GPa", "G12_GPa", "nu12", "nu23"] {
        return Err(Error::InvalidInput(format!("unexpected material header {header:?}")));
    }
    let mut out = Vec::new();
    for line in lines {
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 7 {
            return Err(Error::InvalidInput(format!("bad material row {line:?}")));
        }
        let mut v = [0.0; 6];
        for (k, x) in v.iter_mut().enumerate() {
            *x = f[k + 1].parse().map_err(|_| Error::InvalidInput(format!("bad number {:?}", f[k + 1])))?;
        }
        let props = EngineeringConstants::from_vector_gpa(v);
        props.validate()?;
        out.push(NamedMaterial { name: f[0].to_string(), props });
    }
    Ok(out)
}

/// The ten reference carbon/epoxy materials shipped with the crate.
pub fn material_library() -> Vec<NamedMaterial> {
    parse_material_table(LIBRARY_CSV).expect("bundled material table is valid")
}

pub fn find_material(name: &str) -> Option<NamedMaterial> {
    material_library().into_iter().find(|m| m.name.eq_ignore_ascii_case(name))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Closed-form inverse of the compliance: the normal block is a 3×3
    // cofactor inverse and the shear block is diagonal.
    fn oracle_stiffness(p: &EngineeringConstants) -> Voigt {
        let s = p.compliance();
        let m = [[s[0][0], s[0][1], s[0][2]], [s[1][0], s[1][1], s[1][2]], [s[2][0], s[2][1], s[2][2]]];
        let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        let mut c = [[0.0; 6]; 6];
        for i in 0..3 {
            for j in 0..3 {
                let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
                let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
                c[i][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / det;
            }
        }
        for k in 3..6 {
            c[k][k] = 1.0 / s[k][k];
        }
        c
    }

    // Rotate the full fourth-order tensor and read the Voigt entries back.
    fn oracle_rotate(c: &Voigt, angle_deg: f64) -> Voigt {
        let voigt = |i: usize, j: usize| -> usize {
            match (i.min(j), i.max(j)) {
                (0, 0) => 0,
                (1, 1) => 1,
                (2, 2) => 2,
                (1, 2) => 3,
                (0, 2) => 4,
                _ => 5,
            }
        };
        let t = angle_deg.to_radians();
        let a = [[t.cos(), -t.sin(), 0.0], [t.sin(), t.cos(), 0.0], [0.0, 0.0, 1.0]];
        let mut out = [[0.0; 6]; 6];
        let pairs = [(0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)];
        for (ii, &(i, j)) in pairs.iter().enumerate() {
            for (jj, &(k, l)) in pairs.iter().enumerate() {
                let mut s = 0.0;
                for p in 0..3 {
                    for q in 0..3 {
                        for r in 0..3 {
                            for u in 0..3 {
                                s += a[i][p] * a[j][q] * a[k][r] * a[l][u] * c[voigt(p, q)][voigt(r, u)];
                            }
                        }
                    }
                }
                out[ii][jj] = s;
            }
        }
        out
    }

    fn t700m21() -> EngineeringConstants {
        find_material("T700M21").unwrap().props
    }

    #[test]
    fn library_matches_reference_table() {
        let lib = material_library();
        assert_eq!(lib.len(), 10);
        let t = &lib[5];
        assert_eq!(t.name, "T700M21");
        assert_eq!(t.props, EngineeringConstants::from_gpa(1571.0, 125.5, 8.7, 4.1, 0.37, 0.45));
        let m = &lib[7];
        assert_eq!(m.name, "T800M913");
        assert_eq!(m.props.g12, 20e9);
    }

    #[test]
    fn stiffness_matches_block_inverse() {
        for m in material_library() {
            let c = stiffness_from_engineering(&m.props).unwrap();
            let o = oracle_stiffness(&m.props);
            for i in 0..6 {
                for j in 0..6 {
                    assert!((c.c[i][j] - o[i][j]).abs() <= 1e-9 * c.max_abs(), "{} C{}{}", m.name, i + 1, j + 1);
                }
            }
        }
    }

    #[test]
    fn stiffness_frozen_t700m21() {
        // numpy.linalg.inv of the compliance, GPa.
        let c = stiffness_from_engineering(&t700m21()).unwrap().c;
        let g = |i: usize, j: usize| c[i][j] * 1e-9;
        assert!((g(0, 0) - 129.98582445492352).abs() < 1e-9);
        assert!((g(0, 1) - 6.061924939085821).abs() < 1e-9);
        assert!((g(1, 1) - 11.191790458224082).abs() < 1e-9);
        assert!((g(1, 2) - 5.191790458224082).abs() < 1e-9);
        assert!((g(3, 3) - 8.7 / 2.9).abs() < 1e-12);
        assert!((g(4, 4) - 4.1).abs() < 1e-12);
    }

    #[test]
    fn isotropic_lame_constants() {
        let (e, nu) = (70e9, 0.33);
        let c = stiffness_from_engineering(&EngineeringConstants::isotropic(2700.0, e, nu)).unwrap().c;
        let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
        let mu = e / (2.0 * (1.0 + nu));
        assert!((c[0][0] - (lambda + 2.0 * mu)).abs() < 1e-6 * e);
        assert!((c[0][1] - lambda).abs() < 1e-6 * e);
        assert!((c[5][5] - mu).abs() < 1e-6 * e);
    }

    #[test]
    fn non_positive_definite_rejected() {
        let bad = EngineeringConstants::from_gpa(1500.0, 10.0, 10.0, 5.0, 0.9, 0.3);
        assert!(matches!(stiffness_from_engineering(&bad), Err(Error::NonPositiveDefinite(_))));
        let neg = EngineeringConstants::from_gpa(1500.0, -10.0, 10.0, 5.0, 0.3, 0.3);
        assert!(matches!(stiffness_from_engineering(&neg), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn rotation_matches_tensor_oracle() {
        let c = stiffness_from_engineering(&t700m21()).unwrap();
        for ang in [0.0, 17.0, 30.0, 45.0, -45.0, 90.0, 133.0] {
            let r = rotate_stiffness(&c, ang);
            let o = oracle_rotate(&c.c, ang);
            for i in 0..6 {
                for j in 0..6 {
                    assert!((r.c[i][j] - o[i][j]).abs() <= 1e-10 * c.max_abs(), "angle {ang} C{}{}", i + 1, j + 1);
                }
            }
        }
    }

    #[test]
    fn rotation_by_ninety_swaps_axes() {
        let c = stiffness_from_engineering(&t700m21()).unwrap();
        let r = rotate_stiffness(&c, 90.0);
        assert!((r.c[1][1] - c.c[0][0]).abs() < 1e-6);
        assert!((r.c[0][0] - c.c[1][1]).abs() < 1e-6);
        assert!((r.c[3][3] - c.c[4][4]).abs() < 1e-6);
        assert!(r.c[0][5].abs() < 1e-12 * c.max_abs());
        assert_eq!(r.frame, Frame::Rotated { angle_deg: 90.0 });
    }

    #[test]
    fn layups_have_expected_stacking() {
        let m = t700m21();
        let qi = build_layup(LayupClass::QuasiIsotropic, 16, 2e-3, m).unwrap();
        let o: Vec<f64> = qi.layers.iter().map(|l| l.orientation_deg).collect();
        assert_eq!(o, [0., 45., -45., 90., 0., 45., -45., 90., 90., -45., 45., 0., 90., -45., 45., 0.]);
        assert!(qi.is_symmetric());
        assert!((qi.total_thickness() - 2e-3).abs() < 1e-15);
        let cp = build_layup(LayupClass::CrossPly, 16, 2e-3, m).unwrap();
        assert_eq!(cp.layers.iter().filter(|l| l.orientation_deg == 90.0).count(), 8);
        assert!(matches!(build_layup(LayupClass::QuasiIsotropic, 12, 2e-3, m), Err(Error::IncompatibleCount { .. })));
        assert!(matches!(build_layup(LayupClass::Unidirectional, 3, 2e-3, m), Err(Error::IncompatibleCount { .. })));
    }

    // Mandel form (shear rows/cols scaled by √2) makes the Bond rotation
    // orthogonal, so its spectrum is rotation invariant.
    fn mandel_eigenvalues(c: &Voigt) -> [f64; 6] {
        let w = |i: usize| if i < 3 { 1.0 } else { core::f64::consts::SQRT_2 };
        let m = SMat::<f64>::from_fn(6, |i, j| c[i][j] * w(i) * w(j));
        crate::linalg::hermitian_eigen(&m).0
    }

    proptest! {
        #[test]
        fn rotation_preserves_invariants(
            e1 in 115.0..184.0f64, e2 in 6.0..14.0f64, g12 in 3.0..9.0f64,
            nu12 in 0.2..0.52f64, nu23 in 0.23..0.59f64, ang in -180.0..180.0f64,
        ) {
            let p = EngineeringConstants::from_gpa(1500.0, e1, e2, g12, nu12, nu23);
            let c = match stiffness_from_engineering(&p) { Ok(c) => c, Err(_) => return Ok(()) };
            let r = rotate_stiffness(&c, ang);
            prop_assert!(r.is_symmetric(1e-12));
            let scale = c.max_abs();
            let ev0 = mandel_eigenvalues(&c.c);
            let ev1 = mandel_eigenvalues(&r.c);
            for k in 0..6 {
                prop_assert!((ev0[k] - ev1[k]).abs() <= 1e-9 * scale);
            }
            let d0 = SMat::<f64>::from_fn(6, |i, j| c.c[i][j] / scale).lu().det().value();
            let d1 = SMat::<f64>::from_fn(6, |i, j| r.c[i][j] / scale).lu().det().value();
            prop_assert!((d0 - d1).abs() <= 1e-9 * d0.abs());
            let back = rotate_stiffness(&r, -ang);
            for i in 0..6 { for j in 0..6 {
                prop_assert!((back.c[i][j] - c.c[i][j]).abs() <= 1e-10 * scale);
            }}
        }

        #[test]
        fn stiffness_positive_definite_over_matset(
            e1 in 115.0..184.0f64, e2 in 6.0..14.0f64, g12 in 3.0..9.0f64,
            nu12 in 0.2..0.52f64, nu23 in 0.23..0.59f64,
        ) {
            let p = EngineeringConstants::from_gpa(1500.0, e1, e2, g12, nu12, nu23);
            if let Ok(c) = stiffness_from_engineering(&p) {
                prop_assert!(is_positive_definite(&SMat::<f64>::from_fn(6, |i, j| c.c[i][j])));
                prop_assert!(c.is_symmetric(1e-15));
            }
        }
    }
}
