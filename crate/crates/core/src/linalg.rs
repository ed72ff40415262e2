//! Small dense matrices (n ≤ 6) over `f64` and `Complex64`, plus a few
//! helpers for larger real systems.

use core::ops::{Add, Div, Index, IndexMut, Mul, Neg, Sub};

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

pub type C64 = Complex64;

pub const MAX_DIM: usize = 6;

pub trait Scalar:
    Copy
    + PartialEq
    + core::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const ZERO: Self;
    const ONE: Self;
    fn modulus(self) -> f64;
    fn conj(self) -> Self;
    fn from_f64(x: f64) -> Self;
    fn scale(self, s: f64) -> Self;
    /// Unit-modulus factor `x / |x|` (one for zero).
    fn phase(self) -> Self;
    fn is_finite(self) -> bool;
    fn re(self) -> f64;
}

impl Scalar for f64 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn conj(self) -> Self {
        self
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn phase(self) -> Self {
        if self < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn re(self) -> f64 {
        self
    }
}

impl Scalar for C64 {
    const ZERO: Self = C64::new(0.0, 0.0);
    const ONE: Self = C64::new(1.0, 0.0);
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn conj(self) -> Self {
        C64::conj(&self)
    }
    fn from_f64(x: f64) -> Self {
        C64::new(x, 0.0)
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn phase(self) -> Self {
        let m = self.norm();
        if m == 0.0 {
            C64::ONE
        } else {
            self / m
        }
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn re(self) -> f64 {
        self.re
    }
}

/// Square matrix of runtime size `n ≤ MAX_DIM`, stored inline.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SMat<T> {
    n: usize,
    a: [[T; MAX_DIM]; MAX_DIM],
}

impl<T: Scalar> Index<(usize, usize)> for SMat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.n && j < self.n);
        &self.a[i][j]
    }
}

impl<T: Scalar> IndexMut<(usize, usize)> for SMat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.n && j < self.n);
        &mut self.a[i][j]
    }
}

impl<T: Scalar> SMat<T> {
    pub fn zeros(n: usize) -> Self {
        assert!(n <= MAX_DIM, "matrix dimension {n} exceeds {MAX_DIM}");
        SMat { n, a: [[T::ZERO; MAX_DIM]; MAX_DIM] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i][i] = T::ONE;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.a[i][j] = f(i, j);
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.n, o.n);
        let n = self.n;
        let mut r = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.a[i][k];
                for j in 0..n {
                    r.a[i][j] = r.a[i][j] + aik * o.a[k][j];
                }
            }
        }
        r
    }

    pub fn mul_vec(&self, v: &[T]) -> [T; MAX_DIM] {
        let mut r = [T::ZERO; MAX_DIM];
        for i in 0..self.n {
            let mut s = T::ZERO;
            for j in 0..self.n {
                s = s + self.a[i][j] * v[j];
            }
            r[i] = s;
        }
        r
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::from_fn(self.n, |i, j| self.a[i][j] + o.a[i][j])
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::from_fn(self.n, |i, j| self.a[i][j] - o.a[i][j])
    }

    pub fn neg(&self) -> Self {
        Self::from_fn(self.n, |i, j| -self.a[i][j])
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::from_fn(self.n, |i, j| self.a[i][j].scale(s))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.a[j][i])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.a[j][i].conj())
    }

    /// `m × m` block whose top-left corner is `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, m: usize) -> Self {
        Self::from_fn(m, |i, j| self.a[r0 + i][c0 + j])
    }

    pub fn from_blocks(b11: &Self, b12: &Self, b21: &Self, b22: &Self) -> Self {
        let m = b11.n;
        Self::from_fn(2 * m, |i, j| match (i < m, j < m) {
            (true, true) => b11.a[i][j],
            (true, false) => b12.a[i][j - m],
            (false, true) => b21.a[i - m][j],
            (false, false) => b22.a[i - m][j - m],
        })
    }

    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        assert_eq!(rows.len(), cols.len());
        Self::from_fn(rows.len(), |i, j| self.a[rows[i]][cols[j]])
    }

    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.n {
            for j in 0..self.n {
                m = m.max(self.a[i][j].modulus());
            }
        }
        m
    }

    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.a[i][j].modulus()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self.a[i][j].is_finite()))
    }

    pub fn lu(&self) -> Lu<T> {
        Lu::new(self)
    }

    pub fn inverse(&self) -> Option<Self> {
        self.lu().inverse()
    }

    /// `‖A‖∞ · ‖A⁻¹‖∞`, infinite when the factorisation breaks down.
    pub fn cond_inf(&self) -> f64 {
        match self.inverse() {
            Some(inv) => self.norm_inf() * inv.norm_inf(),
            None => f64::INFINITY,
        }
    }
}

/// Determinant held as `mantissa · 2^exp2` so long products neither
/// overflow nor underflow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledDet<T> {
    pub mantissa: T,
    pub exp2: i32,
}

impl<T: Scalar> ScaledDet<T> {
    pub fn one() -> Self {
        ScaledDet { mantissa: T::ONE, exp2: 0 }
    }

    pub fn mul_by(&mut self, x: T) {
        self.mantissa = self.mantissa * x;
        let m = self.mantissa.modulus();
        if m == 0.0 || !m.is_finite() {
            return;
        }
        let (_, e) = libm::frexp(m);
        self.mantissa = self.mantissa.scale(libm::ldexp(1.0, -e));
        self.exp2 += e;
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.modulus() == 0.0
    }

    /// log2 of the modulus (−∞ for a zero determinant).
    pub fn log2_abs(&self) -> f64 {
        let m = self.mantissa.modulus();
        if m == 0.0 {
            f64::NEG_INFINITY
        } else {
            m.log2() + self.exp2 as f64
        }
    }

    /// The plain value; may overflow to infinity.
    pub fn value(&self) -> T {
        self.mantissa.scale(libm::ldexp(1.0, self.exp2))
    }

    /// The value multiplied by `2^-exp2_ref`, for comparing determinants on
    /// a common scale.
    pub fn value_rescaled(&self, exp2_ref: i32) -> T {
        let d = self.exp2 - exp2_ref;
        if d < -1000 {
            T::ZERO
        } else {
            self.mantissa.scale(libm::ldexp(1.0, d))
        }
    }
}

/// LU factorisation with partial pivoting.
#[derive(Clone, Copy, Debug)]
pub struct Lu<T> {
    lu: SMat<T>,
    perm: [usize; MAX_DIM],
    odd: bool,
    singular: bool,
}

impl<T: Scalar> Lu<T> {
    pub fn new(m: &SMat<T>) -> Self {
        let n = m.n;
        let mut a = *m;
        let mut perm = [0usize; MAX_DIM];
        for (i, p) in perm.iter_mut().enumerate() {
            *p = i;
        }
        let mut odd = false;
        let mut singular = false;
        for k in 0..n {
            let mut piv = k;
            let mut best = a.a[k][k].modulus();
            for i in k + 1..n {
                let v = a.a[i][k].modulus();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                singular = true;
                continue;
            }
            if piv != k {
                a.a.swap(piv, k);
                perm.swap(piv, k);
                odd = !odd;
            }
            let d = a.a[k][k];
            for i in k + 1..n {
                let f = a.a[i][k] / d;
                a.a[i][k] = f;
                for j in k + 1..n {
                    a.a[i][j] = a.a[i][j] - f * a.a[k][j];
                }
            }
        }
        Lu { lu: a, perm, odd, singular }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn det(&self) -> ScaledDet<T> {
        let mut d = ScaledDet::one();
        if self.singular {
            d.mantissa = T::ZERO;
            return d;
        }
        for i in 0..self.lu.n {
            d.mul_by(self.lu.a[i][i]);
        }
        if self.odd {
            d.mantissa = -d.mantissa;
        }
        d
    }

    pub fn solve(&self, b: &[T]) -> Option<[T; MAX_DIM]> {
        if self.singular {
            return None;
        }
        let n = self.lu.n;
        let mut x = [T::ZERO; MAX_DIM];
        for i in 0..n {
            let mut s = b[self.perm[i]];
            for j in 0..i {
                s = s - self.lu.a[i][j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s = s - self.lu.a[i][j] * x[j];
            }
            x[i] = s / self.lu.a[i][i];
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<SMat<T>> {
        if self.singular {
            return None;
        }
        let n = self.lu.n;
        let mut inv = SMat::zeros(n);
        let mut e = [T::ZERO; MAX_DIM];
        for j in 0..n {
            e[j] = T::ONE;
            let x = self.solve(&e)?;
            e[j] = T::ZERO;
            for i in 0..n {
                inv.a[i][j] = x[i];
            }
        }
        if inv.is_finite() {
            Some(inv)
        } else {
            None
        }
    }
}

/// Eigen-decomposition of a Hermitian (or real symmetric) matrix by cyclic
/// Jacobi rotations. Eigenvalues ascend; column `k` of the returned matrix
/// is the eigenvector for eigenvalue `k`.
pub fn hermitian_eigen<T: Scalar>(m: &SMat<T>) -> ([f64; MAX_DIM], SMat<T>) {
    let n = m.n;
    let mut a = *m;
    let mut v = SMat::<T>::identity(n);
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    for _sweep in 0..60 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a.a[p][q].modulus();
            }
        }
        if off <= 1e-17 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.a[p][q];
                let g = apq.modulus();
                if g <= 1e-300 {
                    continue;
                }
                let u = apq.phase().conj();
                let app = a.a[p][p].re();
                let aqq = a.a[q][q].re();
                let tau = (aqq - app) / (2.0 * g);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // U = diag(1, ū) · real rotation, restricted to (p, q).
                let upp = T::from_f64(c);
                let upq = T::from_f64(s);
                let uqp = u.scale(-s);
                let uqq = u.scale(c);
                for k in 0..n {
                    let akp = a.a[k][p];
                    let akq = a.a[k][q];
                    a.a[k][p] = akp * upp + akq * uqp;
                    a.a[k][q] = akp * upq + akq * uqq;
                }
                for k in 0..n {
                    let apk = a.a[p][k];
                    let aqk = a.a[q][k];
                    a.a[p][k] = upp.conj() * apk + uqp.conj() * aqk;
                    a.a[q][k] = upq.conj() * apk + uqq.conj() * aqk;
                }
                for k in 0..n {
                    let vkp = v.a[k][p];
                    let vkq = v.a[k][q];
                    v.a[k][p] = vkp * upp + vkq * uqp;
                    v.a[k][q] = vkp * upq + vkq * uqq;
                }
            }
        }
    }
    let mut idx = [0usize; MAX_DIM];
    for (i, x) in idx.iter_mut().enumerate() {
        *x = i;
    }
    let diag: Vec<f64> = (0..n).map(|i| a.a[i][i].re()).collect();
    idx[..n].sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let mut vals = [0.0; MAX_DIM];
    let mut vecs = SMat::zeros(n);
    for (k, &i) in idx[..n].iter().enumerate() {
        vals[k] = diag[i];
        for r in 0..n {
            vecs.a[r][k] = v.a[r][i];
        }
    }
    (vals, vecs)
}

/// Singular values (descending) and the right singular vector belonging to
/// the smallest one.
pub fn smallest_singular<T: Scalar>(m: &SMat<T>) -> ([f64; MAX_DIM], [T; MAX_DIM]) {
    let n = m.n;
    let scale = m.max_abs();
    let ms = if scale > 0.0 { m.scaled(1.0 / scale) } else { *m };
    let g = ms.adjoint().mul(&ms);
    let (vals, vecs) = hermitian_eigen(&g);
    let mut sv = [0.0; MAX_DIM];
    for k in 0..n {
        sv[k] = vals[n - 1 - k].max(0.0).sqrt() * scale;
    }
    let mut x = [T::ZERO; MAX_DIM];
    for i in 0..n {
        x[i] = vecs.a[i][0];
    }
    (sv, x)
}

/// Null vector of a nearly singular matrix: Gram-matrix eigenvector polished
/// by inverse iteration on a slightly shifted LU.
pub fn null_vector<T: Scalar>(m: &SMat<T>) -> ([f64; MAX_DIM], [T; MAX_DIM]) {
    let n = m.n;
    let (sv, mut x) = smallest_singular(m);
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    let lu = m.lu();
    let lu = if lu.is_singular() {
        let mut shifted = *m;
        for i in 0..n {
            shifted.a[i][i] = shifted.a[i][i] + T::from_f64(1e-14 * scale);
        }
        shifted.lu()
    } else {
        lu
    };
    for _ in 0..2 {
        let Some(y) = lu.solve(&x) else { break };
        let nrm = (0..n).map(|i| y[i].modulus().powi(2)).sum::<f64>().sqrt();
        if !(nrm.is_finite() && nrm > 0.0) {
            break;
        }
        let before = residual_norm(m, &x);
        let mut cand = [T::ZERO; MAX_DIM];
        for i in 0..n {
            cand[i] = y[i].scale(1.0 / nrm);
        }
        if residual_norm(m, &cand) <= before {
            x = cand;
        } else {
            break;
        }
    }
    (sv, x)
}

fn residual_norm<T: Scalar>(m: &SMat<T>, x: &[T]) -> f64 {
    let r = m.mul_vec(x);
    (0..m.n).map(|i| r[i].modulus().powi(2)).sum::<f64>().sqrt()
}

/// All three roots of `c3 a³ + c2 a² + c1 a + c0`, closed form followed by
/// Newton polishing on the original polynomial.
pub fn cubic_roots(c3: f64, c2: f64, c1: f64, c0: f64) -> [C64; 3] {
    let a = c2 / c3;
    let b = c1 / c3;
    let c = c0 / c3;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = (q / 2.0) * (q / 2.0) + (p / 3.0) * (p / 3.0) * (p / 3.0);
    let shift = -a / 3.0;
    let mut roots = if disc >= 0.0 {
        let sd = disc.sqrt();
        let u = libm::cbrt(-q / 2.0 + sd);
        let v = libm::cbrt(-q / 2.0 - sd);
        let h = 3f64.sqrt() / 2.0 * (u - v);
        [
            C64::new(u + v + shift, 0.0),
            C64::new(-(u + v) / 2.0 + shift, h),
            C64::new(-(u + v) / 2.0 + shift, -h),
        ]
    } else {
        let r = (-p / 3.0).sqrt();
        let cosarg = (-q / 2.0 / (r * r * r)).clamp(-1.0, 1.0);
        let phi = cosarg.acos();
        let tau = 2.0 * core::f64::consts::PI;
        [0.0, 1.0, 2.0].map(|k| C64::new(2.0 * r * ((phi + tau * k) / 3.0).cos() + shift, 0.0))
    };
    for z in roots.iter_mut() {
        for _ in 0..3 {
            let f = ((*z + a) * *z + b) * *z + c;
            let df = (*z * 3.0 + 2.0 * a) * *z + b;
            if df.norm() == 0.0 {
                break;
            }
            let step = f / df;
            let nz = *z - step;
            let nf = ((nz + a) * nz + b) * nz + c;
            if nf.norm() < f.norm() {
                *z = nz;
            } else {
                break;
            }
        }
    }
    roots
}

/// Solve the dense real system `a x = b` (row-major `n × n`) in place by
/// partial-pivot Gaussian elimination. Returns `None` when a pivot falls
/// below `tol · max|a|`.
pub fn solve_dense(a: &mut [f64], n: usize, b: &mut [f64], tol: f64) -> Option<()> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);
    let amax = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if amax == 0.0 {
        return None;
    }
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (piv, best) = (k..n)
            .map(|i| (i, a[perm[i] * n + k].abs()))
            .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best <= tol * amax {
            return None;
        }
        perm.swap(k, piv);
        let pk = perm[k];
        for i in k + 1..n {
            let pi = perm[i];
            let f = a[pi * n + k] / a[pk * n + k];
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                a[pi * n + j] -= f * a[pk * n + j];
            }
            b[pi] -= f * b[pk];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let pk = perm[k];
        let mut s = b[pk];
        for j in k + 1..n {
            s -= a[pk * n + j] * x[j];
        }
        x[k] = s / a[pk * n + k];
    }
    b.copy_from_slice(&x);
    Some(())
}

/// Cholesky test for positive definiteness of a real symmetric matrix.
pub fn is_positive_definite(m: &SMat<f64>) -> bool {
    let n = m.n;
    let mut l = SMat::<f64>::zeros(n);
    for j in 0..n {
        let mut d = m.a[j][j];
        for k in 0..j {
            d -= l.a[j][k] * l.a[j][k];
        }
        if !(d > 0.0) {
            return false;
        }
        let d = d.sqrt();
        l.a[j][j] = d;
        for i in j + 1..n {
            let mut s = m.a[i][j];
            for k in 0..j {
                s -= l.a[i][k] * l.a[j][k];
            }
            l.a[i][j] = s / d;
        }
    }
    true
}
