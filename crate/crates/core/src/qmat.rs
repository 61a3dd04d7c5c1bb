//! Dense complex matrices for one- and two-qubit operators.
//!
//! Everything here works on 2×2 or 4×4 matrices stored inline, so a [`CMat`]
//! is `Copy` and cheap to pass around by value inside integration loops.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Unit-norm tolerance for rotation axes.
pub const AXIS_TOL: f64 = 1e-12;
/// Hermiticity tolerance accepted by [`expm_hermitian`].
pub const HERMITIAN_TOL: f64 = 1e-10;
/// A matrix is treated as unitary when `max|U†U − I| < UNITARY_TOL`.
pub const UNITARY_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Row-major complex matrix of dimension 2 or 4.
#[derive(Clone, Copy, PartialEq)]
pub struct CMat {
    dim: usize,
    data: [Complex64; 16],
}

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMat({}x{})", self.dim, self.dim)?;
        for r in 0..self.dim {
            write!(f, "  [")?;
            for c in 0..self.dim {
                let z = self.get(r, c);
                write!(f, " {:+.6}{:+.6}i", z.re, z.im)?;
            }
            writeln!(f, " ]")?;
        }
        Ok(())
    }
}

impl serde::Serialize for CMat {
    /// Serialised as `{"re": [[..]], "im": [[..]]}`, row-major.
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let rows = |part: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..self.dim).map(|r| (0..self.dim).map(|c| part(&self.get(r, c))).collect()).collect()
        };
        let mut st = s.serialize_struct("CMat", 2)?;
        st.serialize_field("re", &rows(|z| z.re))?;
        st.serialize_field("im", &rows(|z| z.im))?;
        st.end()
    }
}

impl CMat {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim == 2 || dim == 4, "CMat supports dimension 2 or 4, got {dim}");
        CMat { dim, data: [ZERO; 16] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries; the entry count fixes the dimension.
    pub fn from_rows(entries: &[Complex64]) -> Result<Self> {
        let dim = match entries.len() {
            4 => 2,
            16 => 4,
            n => return Err(Error::DimMismatch { left: n, right: 4 }),
        };
        let mut m = Self::zeros(dim);
        m.data[..entries.len()].copy_from_slice(entries);
        Ok(m)
    }

    pub fn from_real(entries: &[f64]) -> Result<Self> {
        let v: Vec<Complex64> = entries.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_rows(&v)
    }

    pub fn diag(values: &[Complex64]) -> Result<Self> {
        let mut m = match values.len() {
            2 | 4 => Self::zeros(values.len()),
            n => return Err(Error::DimMismatch { left: n, right: 4 }),
        };
        for (i, &v) in values.iter().enumerate() {
            m.set(i, i, v);
        }
        Ok(m)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.dim + c] = v;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data[..self.dim * self.dim]
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                m.set(r, c, self.get(c, r).conj());
            }
        }
        m
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut m = *self;
        m.data.iter_mut().for_each(|z| *z *= s);
        m
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    /// `self · rhs − rhs · self`.
    pub fn commutator(&self, rhs: &CMat) -> Self {
        *self * *rhs - *rhs * *self
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CMat) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        self.entries()
            .iter()
            .zip(other.entries())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max|U†U − I|`.
    pub fn unitarity_defect(&self) -> f64 {
        (self.adjoint() * *self).max_abs_diff(&CMat::identity(self.dim))
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_defect() < UNITARY_TOL
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// Unit phase `e^{iφ}` maximising `Re Tr(self† · e^{iφ} other)`, i.e. the
    /// phase to remove from `other` so that it lines up with `self`.
    pub fn phase_to(&self, other: &CMat) -> Complex64 {
        let tr = (self.adjoint() * *other).trace();
        if tr.norm() == 0.0 {
            ONE
        } else {
            (tr / tr.norm()).conj()
        }
    }

    /// Max-entry distance after removing the best global phase from `other`.
    pub fn phase_aligned_distance(&self, other: &CMat) -> f64 {
        let p = self.phase_to(other);
        self.max_abs_diff(&other.scale(p))
    }

    /// Frobenius distance after removing the best global phase from `other`.
    ///
    /// Computed entrywise rather than through `|Tr|`, so it stays accurate
    /// (linear in the error) all the way down to rounding level.
    pub fn phase_aligned_frobenius(&self, other: &CMat) -> f64 {
        let p = self.phase_to(other);
        self.entries()
            .iter()
            .zip(other.entries())
            .map(|(a, b)| (a - b * p).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Coefficients `(a0, ax, ay, az)` of a 2×2 matrix in the basis
    /// `{I, σx, σy, σz}`.
    pub fn pauli_components(&self) -> [Complex64; 4] {
        assert_eq!(self.dim, 2);
        let (a, b, c, d) = (self.get(0, 0), self.get(0, 1), self.get(1, 0), self.get(1, 1));
        [(a + d) * 0.5, (b + c) * 0.5, (b - c) * I * 0.5, (a - d) * 0.5]
    }
}

impl Mul for CMat {
    type Output = CMat;

    #[inline]
    fn mul(self, rhs: CMat) -> CMat {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in product");
        let n = self.dim;
        let mut out = CMat::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += a * rhs.data[k * n + c];
                }
            }
        }
        out
    }
}

impl Add for CMat {
    type Output = CMat;

    fn add(self, rhs: CMat) -> CMat {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in sum");
        let mut out = self;
        out.data.iter_mut().zip(rhs.data.iter()).for_each(|(a, b)| *a += b);
        out
    }
}

impl Sub for CMat {
    type Output = CMat;

    fn sub(self, rhs: CMat) -> CMat {
        self + (-rhs)
    }
}

impl Neg for CMat {
    type Output = CMat;

    fn neg(self) -> CMat {
        self.scale_re(-1.0)
    }
}

pub fn pauli(axis: Axis) -> CMat {
    let (a, b, c, d) = match axis {
        Axis::X => (ZERO, ONE, ONE, ZERO),
        Axis::Y => (ZERO, -I, I, ZERO),
        Axis::Z => (ONE, ZERO, ZERO, -ONE),
    };
    let mut m = CMat::zeros(2);
    m.data[..4].copy_from_slice(&[a, b, c, d]);
    m
}

/// `n·σ` for a real 3-vector (not necessarily normalised).
pub fn pauli_vector(nx: f64, ny: f64, nz: f64) -> CMat {
    let mut m = CMat::zeros(2);
    m.data[..4].copy_from_slice(&[
        Complex64::new(nz, 0.0),
        Complex64::new(nx, -ny),
        Complex64::new(nx, ny),
        Complex64::new(-nz, 0.0),
    ]);
    m
}

/// `cos φ · I − i sin φ · (n·σ)` for a unit axis `n`.
pub fn exp_su2(nx: f64, ny: f64, nz: f64, phi: f64) -> Result<CMat> {
    let norm = (nx * nx + ny * ny + nz * nz).sqrt();
    if (norm - 1.0).abs() > AXIS_TOL {
        return Err(Error::NonUnitAxis { norm });
    }
    Ok(exp_su2_unchecked(nx, ny, nz, phi))
}

#[inline]
pub(crate) fn exp_su2_unchecked(nx: f64, ny: f64, nz: f64, phi: f64) -> CMat {
    let (s, c) = phi.sin_cos();
    let mut m = CMat::zeros(2);
    m.data[0] = Complex64::new(c, -s * nz);
    m.data[1] = Complex64::new(-s * ny, -s * nx);
    m.data[2] = Complex64::new(s * ny, -s * nx);
    m.data[3] = Complex64::new(c, s * nz);
    m
}

/// `exp(−i t h)` for a Hermitian `h` whose rotation vector is `(hx, hy, hz)`
/// (trace part dropped), i.e. `exp(−i t (hx σx + hy σy + hz σz))`.
#[inline]
pub(crate) fn exp_pauli_vector(hx: f64, hy: f64, hz: f64, t: f64) -> CMat {
    let r = (hx * hx + hy * hy + hz * hz).sqrt();
    if r == 0.0 {
        return CMat::identity(2);
    }
    exp_su2_unchecked(hx / r, hy / r, hz / r, r * t)
}

pub fn kron(a: &CMat, b: &CMat) -> Result<CMat> {
    if a.dim != 2 || b.dim != 2 {
        return Err(Error::DimMismatch { left: a.dim, right: b.dim });
    }
    let mut out = CMat::zeros(4);
    for ar in 0..2 {
        for ac in 0..2 {
            let x = a.get(ar, ac);
            for br in 0..2 {
                for bc in 0..2 {
                    out.set(2 * ar + br, 2 * ac + bc, x * b.get(br, bc));
                }
            }
        }
    }
    Ok(out)
}

/// `|Tr(target† · actual)| / dim`.
pub fn trace_fidelity(u_target: &CMat, u_actual: &CMat) -> Result<f64> {
    if u_target.dim != u_actual.dim {
        return Err(Error::DimMismatch { left: u_target.dim, right: u_actual.dim });
    }
    for m in [u_target, u_actual] {
        let defect = m.unitarity_defect();
        if defect >= UNITARY_TOL {
            return Err(Error::NonUnitary { defect });
        }
    }
    Ok(fidelity_unchecked(u_target, u_actual))
}

#[inline]
pub(crate) fn fidelity_unchecked(u_target: &CMat, u_actual: &CMat) -> f64 {
    let f = (u_target.adjoint() * *u_actual).trace().norm() / u_target.dim as f64;
    f.min(1.0)
}

/// `exp(−i t h)` for a Hermitian `h`.
///
/// 2×2 generators go through the closed-form axis-angle formula; 4×4 ones
/// through a Hermitian eigendecomposition.
pub fn expm_hermitian(h: &CMat, t: f64) -> Result<CMat> {
    let defect = h.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian { defect });
    }
    Ok(expm_hermitian_unchecked(h, t))
}

pub(crate) fn expm_hermitian_unchecked(h: &CMat, t: f64) -> CMat {
    match h.dim {
        2 => {
            let [a0, ax, ay, az] = h.pauli_components();
            let phase = Complex64::from_polar(1.0, -a0.re * t);
            exp_pauli_vector(ax.re, ay.re, az.re, t).scale(phase)
        }
        _ => {
            let (values, vectors) = hermitian_eigen(h);
            let n = h.dim;
            let mut out = CMat::zeros(n);
            for (k, &lambda) in values.iter().enumerate().take(n) {
                let w = Complex64::from_polar(1.0, -lambda * t);
                for r in 0..n {
                    let vr = w * vectors.get(r, k);
                    for c in 0..n {
                        out.data[r * n + c] += vr * vectors.get(c, k).conj();
                    }
                }
            }
            out
        }
    }
}

/// Eigenvalues and eigenvectors (as columns) of a Hermitian matrix by
/// cyclic Jacobi rotations. Converges for any spectrum, including the
/// nearly degenerate ones that weak drives produce.
fn hermitian_eigen(h: &CMat) -> ([f64; 4], CMat) {
    let n = h.dim;
    let mut a = *h;
    let mut v = CMat::identity(n);
    let scale = h.max_abs().max(f64::MIN_POSITIVE);
    for _sweep in 0..64 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                off = off.max(a.get(p, q).norm());
            }
        }
        if off <= 1e-17 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                let b = apq.norm();
                if b <= 1e-300 {
                    continue;
                }
                // G = diag(1, e^{-iφ}) · [[c, s], [−s, c]] zeroes the (p, q) entry
                let phase = apq / b;
                let tau = (a.get(q, q).re - a.get(p, p).re) / (2.0 * b);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let gpp = Complex64::new(c, 0.0);
                let gpq = Complex64::new(s, 0.0);
                let gqp = -phase.conj() * s;
                let gqq = phase.conj() * c;
                // A ← A G
                for r in 0..n {
                    let (xp, xq) = (a.get(r, p), a.get(r, q));
                    a.set(r, p, xp * gpp + xq * gqp);
                    a.set(r, q, xp * gpq + xq * gqq);
                    let (yp, yq) = (v.get(r, p), v.get(r, q));
                    v.set(r, p, yp * gpp + yq * gqp);
                    v.set(r, q, yp * gpq + yq * gqq);
                }
                // A ← G† A
                for col in 0..n {
                    let (xp, xq) = (a.get(p, col), a.get(q, col));
                    a.set(p, col, gpp.conj() * xp + gqp.conj() * xq);
                    a.set(q, col, gpq.conj() * xp + gqq.conj() * xq);
                }
                a.set(p, q, ZERO);
                a.set(q, p, ZERO);
            }
        }
    }
    let mut values = [0.0; 4];
    for (i, x) in values.iter_mut().enumerate().take(n) {
        *x = a.get(i, i).re;
    }
    (values, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pauli_definitions() {
        assert_eq!(pauli(Axis::X), CMat::from_real(&[0.0, 1.0, 1.0, 0.0]).unwrap());
        assert_eq!(pauli(Axis::Z), CMat::from_real(&[1.0, 0.0, 0.0, -1.0]).unwrap());
        let y = pauli(Axis::Y);
        assert!((y * y).max_abs_diff(&CMat::identity(2)) < 1e-15);
        for a in [Axis::X, Axis::Y, Axis::Z] {
            let p = pauli(a);
            assert_eq!(p.trace(), ZERO);
            assert!(p.hermiticity_defect() < 1e-15);
        }
    }

    #[test]
    fn exp_su2_examples() {
        let u = exp_su2(1.0, 0.0, 0.0, FRAC_PI_2).unwrap();
        assert!(u.max_abs_diff(&pauli(Axis::X).scale(c(0.0, -1.0))) < 1e-15);
        let id = exp_su2(0.0, 0.0, 1.0, 0.0).unwrap();
        assert_eq!(id, CMat::identity(2));
        let q = exp_su2(0.0, 0.0, 1.0, FRAC_PI_4).unwrap();
        let h = exp_su2(0.0, 0.0, 1.0, FRAC_PI_2).unwrap();
        assert!((q * q).max_abs_diff(&h) < 1e-15);
    }

    #[test]
    fn exp_su2_rejects_non_unit_axis() {
        assert!(matches!(exp_su2(1.0, 1.0, 0.0, 0.3), Err(Error::NonUnitAxis { .. })));
    }

    #[test]
    fn kron_examples() {
        let zz = kron(&pauli(Axis::Z), &pauli(Axis::Z)).unwrap();
        assert_eq!(zz, CMat::diag(&[ONE, -ONE, -ONE, ONE]).unwrap());
        assert_eq!(kron(&CMat::identity(2), &CMat::identity(2)).unwrap(), CMat::identity(4));
        // |00> = e0 maps to |10> = e2
        let xi = kron(&pauli(Axis::X), &CMat::identity(2)).unwrap();
        assert_eq!(xi.get(2, 0), ONE);
        assert_eq!(xi.get(0, 0), ZERO);
        assert!(matches!(kron(&zz, &zz), Err(Error::DimMismatch { .. })));
    }

    #[test]
    fn fidelity_examples() {
        let x = pauli(Axis::X);
        assert!((trace_fidelity(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        assert!(trace_fidelity(&x, &pauli(Axis::Y)).unwrap().abs() < 1e-15);
        let phased = x.scale(Complex64::from_polar(1.0, 0.7));
        assert!((trace_fidelity(&x, &phased).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            trace_fidelity(&x, &CMat::identity(4)),
            Err(Error::DimMismatch { .. })
        ));
        assert!(matches!(
            trace_fidelity(&x, &x.scale_re(2.0)),
            Err(Error::NonUnitary { .. })
        ));
    }

    #[test]
    fn hermitian_exponential_matches_closed_form() {
        let zz = kron(&pauli(Axis::Z), &pauli(Axis::Z)).unwrap();
        let u = expm_hermitian(&zz.scale_re(0.5), PI / 2.0).unwrap();
        // exp(-i π/4 ZZ) is diagonal with phases e^{∓iπ/4}
        let e = Complex64::from_polar(1.0, -FRAC_PI_4);
        let expected = CMat::diag(&[e, e.conj(), e.conj(), e]).unwrap();
        assert!(u.max_abs_diff(&expected) < 1e-12);

        let h2 = pauli_vector(0.3, -0.2, 0.9) + CMat::identity(2).scale_re(0.4);
        let u2 = expm_hermitian(&h2, 1.3).unwrap();
        let u4 = expm_hermitian(&kron(&h2, &CMat::identity(2)).unwrap(), 1.3).unwrap();
        let expected4 = kron(&u2, &CMat::identity(2)).unwrap();
        assert!(u4.max_abs_diff(&expected4) < 1e-12);
        assert!(matches!(
            expm_hermitian(&pauli(Axis::X).scale(I), 1.0),
            Err(Error::NotHermitian { .. })
        ));
    }

    /// `exp(−iHt)` by scaling and squaring a Taylor series.
    fn taylor_exp(h: &CMat, t: f64) -> CMat {
        let halvings = (40.0 * h.max_abs() * t).max(1.0).log2().ceil() as i32;
        let a = h.scale(c(0.0, -t / 2f64.powi(halvings)));
        let mut term = CMat::identity(h.dim());
        let mut sum = term;
        for k in 1..30 {
            term = (term * a).scale_re(1.0 / k as f64);
            sum = sum + term;
        }
        (0..halvings).fold(sum, |m, _| m * m)
    }

    fn hermitian4(re: &[f64], im: &[f64]) -> CMat {
        let mut h = CMat::zeros(4);
        let mut idx = 0;
        for r in 0..4 {
            h.set(r, r, c(re[idx], 0.0));
            idx += 1;
            for col in r + 1..4 {
                let z = c(re[idx], im[idx]);
                h.set(r, col, z);
                h.set(col, r, z.conj());
                idx += 1;
            }
        }
        h
    }

    #[test]
    fn nearly_degenerate_exponential() {
        // collective drive of 3e-4 on top of ZZ/2: eigenvalues ±½ split by ~1e-6
        let a = c(-2.9259165611493076e-4, -3.4382761298908457e-4);
        let zz = kron(&pauli(Axis::Z), &pauli(Axis::Z)).unwrap().scale_re(0.5);
        let mut h = zz;
        for (r, col) in [(0, 1), (0, 2), (1, 3), (2, 3)] {
            h.set(r, col, a);
            h.set(col, r, a.conj());
        }
        let u = expm_hermitian(&h, 1e-3).unwrap();
        let d = u.max_abs_diff(&taylor_exp(&h, 1e-3));
        assert!(d < 1e-13, "{d:e}");
        assert!(u.unitarity_defect() < 1e-14);
    }

    fn unit_axis() -> impl Strategy<Value = (f64, f64, f64)> {
        (0.0..PI, 0.0..2.0 * PI).prop_map(|(pol, az)| {
            (pol.sin() * az.cos(), pol.sin() * az.sin(), pol.cos())
        })
    }

    fn random_su2() -> impl Strategy<Value = CMat> {
        (unit_axis(), 0.0..4.0 * PI).prop_map(|((x, y, z), phi)| exp_su2(x, y, z, phi).unwrap())
    }

    proptest! {
        #[test]
        fn exp_su2_is_unitary((x, y, z) in unit_axis(), phi in 0.0..4.0 * PI) {
            let u = exp_su2(x, y, z, phi).unwrap();
            prop_assert!((u.adjoint() * u).max_abs_diff(&CMat::identity(2)) < 1e-12);
        }

        #[test]
        fn fidelity_is_phase_invariant(a in random_su2(), b in random_su2(), alpha in -PI..PI, beta in -PI..PI) {
            let f0 = trace_fidelity(&a, &b).unwrap();
            let f1 = trace_fidelity(&a.scale(Complex64::from_polar(1.0, alpha)),
                                    &b.scale(Complex64::from_polar(1.0, beta))).unwrap();
            prop_assert!((f0 - f1).abs() < 1e-14);
        }

        #[test]
        fn exponential_matches_taylor(
            re in prop::collection::vec(-2.0f64..2.0, 10),
            im in prop::collection::vec(-2.0f64..2.0, 10),
            degenerate in any::<bool>(),
            t in 0.0f64..2.0,
        ) {
            let mut h = hermitian4(&re, &im);
            if degenerate {
                // shrink the couplings so the diagonal pairs nearly coincide
                h = kron(&pauli(Axis::Z), &pauli(Axis::Z)).unwrap() + h.scale_re(1e-5);
            }
            let u = expm_hermitian(&h, t).unwrap();
            prop_assert!(u.max_abs_diff(&taylor_exp(&h, t)) < 1e-11);
            prop_assert!(u.unitarity_defect() < 1e-13);
        }

        #[test]
        fn kron_is_multiplicative(a in random_su2(), b in random_su2(), c in random_su2(), d in random_su2()) {
            let lhs = kron(&a, &b).unwrap() * kron(&c, &d).unwrap();
            let rhs = kron(&(a * c), &(b * d)).unwrap();
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }
    }
}
