//! Structure groups and their Lie algebras.
//!
//! Two compact groups are supported:
//!
//! * `U1`: unit complex numbers, algebra basis `e1 = i`, inner product
//!   `<X,Y> = -tr(XY)`.
//! * `Su2`: unit quaternions acting as 2x2 special unitary matrices via
//!   `q = (q0, q1, q2, q3)  ->  q0 I - i (q1 s1 + q2 s2 + q3 s3)` with the
//!   Pauli matrices `s_a`.  Algebra basis `e_a = -(i/2) s_a`, inner product
//!   `<X,Y> = -2 tr(XY)`, under which the basis is orthonormal and
//!   `[e1, e2] = e3`: the bracket in coefficients is the cross product.
//!
//! Algebra elements are stored as coefficient vectors in the orthonormal
//! basis; group elements as `(re, im)` pairs (U1) or quaternions (Su2).
//! Matrices appear only when materialized for diagnostics.

use crate::error::{Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupKind {
    U1,
    Su2,
}

impl GroupKind {
    #[must_use]
    pub fn matrix_dim(self) -> usize {
        match self {
            GroupKind::U1 => 1,
            GroupKind::Su2 => 2,
        }
    }

    /// Dimension of the Lie algebra (real coefficients per node).
    #[must_use]
    pub fn algebra_dim(self) -> usize {
        match self {
            GroupKind::U1 => 1,
            GroupKind::Su2 => 3,
        }
    }

    /// Stored floats per group element: (re, im) for U1, a quaternion for Su2.
    #[must_use]
    pub fn group_comps(self) -> usize {
        match self {
            GroupKind::U1 => 2,
            GroupKind::Su2 => 4,
        }
    }

    #[must_use]
    pub fn name(self) -> &'static str {
        match self {
            GroupKind::U1 => "u1",
            GroupKind::Su2 => "su2",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "u1" => Ok(GroupKind::U1),
            "su2" => Ok(GroupKind::Su2),
            other => Err(Error::invalid(format!("unknown group '{other}'"))),
        }
    }

    #[must_use]
    pub fn identity_data(self) -> [f64; 4] {
        [1.0, 0.0, 0.0, 0.0]
    }
}

/// Group descriptor as it appears in headers and configs.  The basis is
/// fixed by `kind`; `matrix_dim`/`algebra_dim` are carried redundantly so a
/// reader can sanity-check a file without this crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupSpec {
    pub kind: GroupKind,
}

impl GroupSpec {
    #[must_use]
    pub fn new(kind: GroupKind) -> Self {
        GroupSpec { kind }
    }

    /// Orthonormal algebra basis as row-major complex matrices, entries
    /// `(re, im)`.
    #[must_use]
    pub fn basis(&self) -> Vec<Vec<(f64, f64)>> {
        match self.kind {
            GroupKind::U1 => vec![vec![(0.0, 1.0)]],
            GroupKind::Su2 => vec![
                // e1 = -(i/2) s1
                vec![(0.0, 0.0), (0.0, -0.5), (0.0, -0.5), (0.0, 0.0)],
                // e2 = -(i/2) s2
                vec![(0.0, 0.0), (-0.5, 0.0), (0.5, 0.0), (0.0, 0.0)],
                // e3 = -(i/2) s3
                vec![(0.0, -0.5), (0.0, 0.0), (0.0, 0.0), (0.0, 0.5)],
            ],
        }
    }
}

/// Lie algebra element: coefficients in the orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    pub kind: GroupKind,
    pub coeffs: Vec<f64>,
}

impl AlgebraElement {
    #[must_use]
    pub fn zero(kind: GroupKind) -> Self {
        AlgebraElement {
            kind,
            coeffs: vec![0.0; kind.algebra_dim()],
        }
    }

    pub fn from_coeffs(kind: GroupKind, coeffs: &[f64]) -> Result<Self> {
        if coeffs.len() != kind.algebra_dim() {
            return Err(Error::structural(format!(
                "algebra element for {} needs {} coefficients, got {}",
                kind.name(),
                kind.algebra_dim(),
                coeffs.len()
            )));
        }
        Ok(AlgebraElement {
            kind,
            coeffs: coeffs.to_vec(),
        })
    }

    #[must_use]
    pub fn basis_vector(kind: GroupKind, a: usize) -> Self {
        let mut e = Self::zero(kind);
        e.coeffs[a] = 1.0;
        e
    }

    #[must_use]
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Row-major complex matrix representation, entries `(re, im)`.
    #[must_use]
    pub fn to_matrix(&self) -> Vec<(f64, f64)> {
        let basis = GroupSpec::new(self.kind).basis();
        let d = self.kind.matrix_dim();
        let mut m = vec![(0.0, 0.0); d * d];
        for (c, b) in self.coeffs.iter().zip(basis.iter()) {
            for (mij, bij) in m.iter_mut().zip(b.iter()) {
                mij.0 += c * bij.0;
                mij.1 += c * bij.1;
            }
        }
        m
    }
}

fn check_pair(x: &AlgebraElement, y: &AlgebraElement) -> Result<()> {
    if x.kind != y.kind {
        return Err(Error::structural(format!(
            "mixed groups {} and {}",
            x.kind.name(),
            y.kind.name()
        )));
    }
    Ok(())
}

/// `[X, Y]`; the cross product of coefficient vectors for Su2, zero for U1.
pub fn bracket(x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement> {
    check_pair(x, y)?;
    let mut out = AlgebraElement::zero(x.kind);
    match x.kind {
        GroupKind::U1 => {}
        GroupKind::Su2 => su2::bracket(
            x.coeffs.as_slice().try_into().unwrap(),
            y.coeffs.as_slice().try_into().unwrap(),
            (&mut out.coeffs[..]).try_into().unwrap(),
        ),
    }
    Ok(out)
}

/// Ad-invariant inner product; the Euclidean dot product of coefficients.
pub fn inner(x: &AlgebraElement, y: &AlgebraElement) -> Result<f64> {
    check_pair(x, y)?;
    Ok(x.coeffs.iter().zip(&y.coeffs).map(|(a, b)| a * b).sum())
}

/// Group element; `data` holds `(re, im)` (U1, remaining slots zero) or a
/// unit quaternion (Su2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupElement {
    pub kind: GroupKind,
    pub data: [f64; 4],
}

impl GroupElement {
    #[must_use]
    pub fn identity(kind: GroupKind) -> Self {
        GroupElement {
            kind,
            data: kind.identity_data(),
        }
    }

    pub fn mul(&self, other: &GroupElement) -> Result<GroupElement> {
        if self.kind != other.kind {
            return Err(Error::structural("mixed groups in product"));
        }
        let data = match self.kind {
            GroupKind::U1 => {
                let mut d = [0.0; 4];
                let p = u1::mul([self.data[0], self.data[1]], [other.data[0], other.data[1]]);
                d[0] = p[0];
                d[1] = p[1];
                d
            }
            GroupKind::Su2 => su2::mul(self.data, other.data),
        };
        Ok(GroupElement {
            kind: self.kind,
            data,
        })
    }

    #[must_use]
    pub fn inverse(&self) -> GroupElement {
        let data = match self.kind {
            GroupKind::U1 => [self.data[0], -self.data[1], 0.0, 0.0],
            GroupKind::Su2 => su2::conj(self.data),
        };
        GroupElement {
            kind: self.kind,
            data,
        }
    }

    /// Complex trace of the matrix representation, `(re, im)`.
    #[must_use]
    pub fn trace(&self) -> (f64, f64) {
        match self.kind {
            GroupKind::U1 => (self.data[0], self.data[1]),
            GroupKind::Su2 => (2.0 * self.data[0], 0.0),
        }
    }

    /// `|| M* M - I ||_F`; zero for exactly unitary data.
    #[must_use]
    pub fn unitarity_residual(&self) -> f64 {
        match self.kind {
            GroupKind::U1 => {
                let n2 = self.data[0] * self.data[0] + self.data[1] * self.data[1];
                (n2 - 1.0).abs()
            }
            GroupKind::Su2 => {
                let n2: f64 = self.data.iter().map(|q| q * q).sum();
                // M*M = |q|^2 I, so the residual is sqrt(2) |  |q|^2 - 1 |.
                2.0f64.sqrt() * (n2 - 1.0).abs()
            }
        }
    }

    /// Row-major complex matrix, entries `(re, im)`.
    #[must_use]
    pub fn to_matrix(&self) -> Vec<(f64, f64)> {
        match self.kind {
            GroupKind::U1 => vec![(self.data[0], self.data[1])],
            GroupKind::Su2 => {
                let [q0, q1, q2, q3] = self.data;
                // q0 I - i q.s
                vec![
                    (q0, -q3),
                    (-q2, -q1),
                    (q2, -q1),
                    (q0, q3),
                ]
            }
        }
    }

    #[must_use]
    pub fn frobenius_distance(&self, other: &GroupElement) -> f64 {
        let a = self.to_matrix();
        let b = other.to_matrix();
        a.iter()
            .zip(&b)
            .map(|(x, y)| {
                let dr = x.0 - y.0;
                let di = x.1 - y.1;
                dr * dr + di * di
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Exact exponential: Euler for U1, the Rodrigues closed form for Su2.
#[must_use]
pub fn expm(x: &AlgebraElement) -> GroupElement {
    let data = match x.kind {
        GroupKind::U1 => {
            let z = u1::exp(x.coeffs[0]);
            [z[0], z[1], 0.0, 0.0]
        }
        GroupKind::Su2 => su2::exp(x.coeffs.as_slice().try_into().unwrap()),
    };
    GroupElement { kind: x.kind, data }
}

/// `g^-1 X g` in coefficients.  For Su2 this is the rotation `R(q)^T x`.
pub fn adjoint_action(g: &GroupElement, x: &AlgebraElement) -> Result<AlgebraElement> {
    if g.kind != x.kind {
        return Err(Error::structural("mixed groups in adjoint action"));
    }
    let mut out = AlgebraElement::zero(x.kind);
    match x.kind {
        GroupKind::U1 => out.coeffs[0] = x.coeffs[0],
        GroupKind::Su2 => su2::rotate_inv(
            g.data,
            x.coeffs.as_slice().try_into().unwrap(),
            (&mut out.coeffs[..]).try_into().unwrap(),
        ),
    }
    Ok(out)
}

/// Nearest group element: phase normalization for U1, quaternion
/// normalization for Su2 (the polar factor within the quaternionic
/// subspace).  Idempotent.
pub fn project_to_group(g: &GroupElement) -> Result<GroupElement> {
    let data = match g.kind {
        GroupKind::U1 => {
            let n = (g.data[0] * g.data[0] + g.data[1] * g.data[1]).sqrt();
            if n == 0.0 {
                return Err(Error::invalid("cannot project zero element to U(1)"));
            }
            [g.data[0] / n, g.data[1] / n, 0.0, 0.0]
        }
        GroupKind::Su2 => {
            let n = g.data.iter().map(|q| q * q).sum::<f64>().sqrt();
            if n == 0.0 {
                return Err(Error::invalid("cannot project zero element to SU(2)"));
            }
            let mut d = g.data;
            for q in &mut d {
                *q /= n;
            }
            d
        }
    };
    Ok(GroupElement { kind: g.kind, data })
}

/// I.i.d. `N(0, scale^2)` coefficients from the caller's generator.
pub fn random_algebra<R: Rng>(kind: GroupKind, scale: f64, rng: &mut R) -> AlgebraElement {
    let mut e = AlgebraElement::zero(kind);
    for c in &mut e.coeffs {
        let z: f64 = rng.sample(StandardNormal);
        *c = scale * z;
    }
    e
}

/// U(1) kernels on `(re, im)` pairs.
pub mod u1 {
    #[inline]
    #[must_use]
    pub fn mul(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
        [a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0]]
    }

    #[inline]
    #[must_use]
    pub fn conj(a: [f64; 2]) -> [f64; 2] {
        [a[0], -a[1]]
    }

    #[inline]
    #[must_use]
    pub fn exp(theta: f64) -> [f64; 2] {
        [theta.cos(), theta.sin()]
    }

    /// Algebra coefficient of the anti-Hermitian part of `a`, basis `i`.
    #[inline]
    #[must_use]
    pub fn project_algebra(a: [f64; 2]) -> f64 {
        a[1]
    }
}

/// SU(2) kernels on quaternions `(q0, q1, q2, q3)`.
pub mod su2 {
    #[inline]
    pub fn bracket(x: &[f64; 3], y: &[f64; 3], out: &mut [f64; 3]) {
        out[0] = x[1] * y[2] - x[2] * y[1];
        out[1] = x[2] * y[0] - x[0] * y[2];
        out[2] = x[0] * y[1] - x[1] * y[0];
    }

    #[inline]
    #[must_use]
    pub fn mul(a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
        [
            a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
            a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
            a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
            a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
        ]
    }

    #[inline]
    #[must_use]
    pub fn conj(a: [f64; 4]) -> [f64; 4] {
        [a[0], -a[1], -a[2], -a[3]]
    }

    /// `exp` of the algebra element with coefficients `x`:
    /// `(cos(|x|/2), sin(|x|/2) x/|x|)`.
    #[inline]
    #[must_use]
    pub fn exp(x: &[f64; 3]) -> [f64; 4] {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let half = 0.5 * r;
        // sin(half)/r, stable near zero.
        let s = if r < 1e-8 {
            0.5 * (1.0 - half * half / 6.0)
        } else {
            half.sin() / r
        };
        [half.cos(), s * x[0], s * x[1], s * x[2]]
    }

    /// Algebra coefficients of the anti-Hermitian part of the (possibly
    /// non-unit) quaternion `a`: twice its vector part.
    #[inline]
    pub fn project_algebra(a: [f64; 4], out: &mut [f64; 3]) {
        out[0] = 2.0 * a[1];
        out[1] = 2.0 * a[2];
        out[2] = 2.0 * a[3];
    }

    /// `R(q)^T x`: coefficients of `g^-1 X g` for unit `q`.
    #[inline]
    pub fn rotate_inv(q: [f64; 4], x: &[f64; 3], out: &mut [f64; 3]) {
        // conj(q) * (0, x) * q, vector part.
        let p = mul(conj(q), [0.0, x[0], x[1], x[2]]);
        let r = mul(p, q);
        out[0] = r[1];
        out[1] = r[2];
        out[2] = r[3];
    }

    /// `R(q) x`: coefficients of `g X g^-1` for unit `q`.
    #[inline]
    pub fn rotate(q: [f64; 4], x: &[f64; 3], out: &mut [f64; 3]) {
        let p = mul(q, [0.0, x[0], x[1], x[2]]);
        let r = mul(p, conj(q));
        out[0] = r[1];
        out[1] = r[2];
        out[2] = r[3];
    }
}
