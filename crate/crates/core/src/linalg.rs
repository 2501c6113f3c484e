//! Dense complex linear algebra on Hermitian operators.
//!
//! Everything in the crate that represents a state, a measurement operator or
//! a dual certificate is a [`HermitianOperator`]: a square `DMatrix<Complex64>`
//! whose Hermiticity was checked on construction. Products of Hermitian
//! operators are not Hermitian in general, so those are returned as plain
//! [`CMatrix`] values.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Hermiticity tolerance, relative to the largest entry magnitude.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Relative tolerance on eigendecomposition residuals.
pub const EIGEN_TOL: f64 = 1e-9;

const MAX_EIGEN_SWEEPS: usize = 10_000;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    m: CMatrix,
}

#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    /// Ascending.
    pub values: Vec<f64>,
    /// Unitary matrix whose columns are the eigenvectors.
    pub vectors: CMatrix,
}

impl EigenDecomposition {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// Rebuilds `V f(Λ) V†`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> HermitianOperator {
        let d = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let s = f(lambda);
            for i in 0..d {
                scaled[(i, j)] *= s;
            }
        }
        HermitianOperator::symmetrized(&(scaled * self.vectors.adjoint()))
    }

    /// Projector onto the span of the eigenvectors whose eigenvalue satisfies `keep`.
    pub fn spectral_projector(&self, keep: impl Fn(f64) -> bool) -> HermitianOperator {
        self.map_values(|l| if keep(l) { 1.0 } else { 0.0 })
    }
}

impl HermitianOperator {
    /// Validates squareness, finiteness and Hermiticity, then stores the
    /// exactly symmetrized matrix.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidArgument("empty matrix".into()));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let deviation = hermiticity_deviation(&m);
        if deviation > HERMITICITY_TOL * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::NonHermitianInput { deviation });
        }
        Ok(Self::symmetrized(&m))
    }

    /// `(m + m†) / 2` without any tolerance check. Intended for matrices that
    /// are Hermitian up to roundoff by construction.
    pub fn symmetrized(m: &CMatrix) -> Self {
        Self {
            m: (m + m.adjoint()) * c(0.5, 0.0),
        }
    }

    pub fn identity(d: usize) -> Self {
        Self {
            m: CMatrix::identity(d, d),
        }
    }

    pub fn zeros(d: usize) -> Self {
        Self {
            m: CMatrix::zeros(d, d),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        let mut m = CMatrix::zeros(d, d);
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = c(v, 0.0);
        }
        Self { m }
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) vector.
    pub fn projector_onto(psi: &[C64]) -> Self {
        let d = psi.len();
        let m = CMatrix::from_fn(d, d, |i, j| psi[i] * psi[j].conj());
        Self { m }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            m: &self.m * c(s, 0.0),
        }
    }

    /// Entrywise complex conjugate, which for a Hermitian matrix is its transpose.
    pub fn conjugate(&self) -> Self {
        Self { m: self.m.conjugate() }
    }

    pub fn eig(&self) -> Result<EigenDecomposition> {
        eig(self)
    }

    pub fn is_psd(&self, tol: f64) -> Result<bool> {
        Ok(self.eig()?.min() >= -tol)
    }

    pub fn lambda_min(&self) -> Result<f64> {
        Ok(self.eig()?.min())
    }

    pub fn lambda_max(&self) -> Result<f64> {
        Ok(self.eig()?.max())
    }

    pub fn frac_power(&self, p: f64, tol: f64) -> Result<Self> {
        frac_power(self, p, tol)
    }

    pub fn hs_inner(&self, other: &Self) -> Result<f64> {
        hs_inner(self, other)
    }

    /// Frobenius distance to another operator of the same dimension.
    pub fn distance(&self, other: &Self) -> f64 {
        self.m
            .iter()
            .zip(other.m.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Frobenius norm of the commutator `[self, other]`.
    pub fn commutator_norm(&self, other: &Self) -> f64 {
        let comm = &self.m * &other.m - &other.m * &self.m;
        comm.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        Self {
            m: self.m.kronecker(&other.m),
        }
    }

    /// Pseudo-inverse square root; eigenvalues at or below `cutoff` map to 0.
    pub fn pinv_sqrt(&self, cutoff: f64) -> Result<Self> {
        let e = self.eig()?;
        Ok(e.map_values(|l| if l > cutoff { l.powf(-0.5) } else { 0.0 }))
    }

    /// `A X A` for Hermitian `A = self`, symmetrized.
    pub fn sandwich(&self, x: &Self) -> Self {
        Self::symmetrized(&(&self.m * &x.m * &self.m))
    }
}

fn hermiticity_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Frobenius norm of `m - m†`.
pub fn antihermitian_residual(m: &CMatrix) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `tr(A B)` for general square matrices.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = c(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Eigendecomposition of a Hermitian operator with ascending eigenvalues.
///
/// Householder tridiagonalization followed by implicit-shift QR sweeps
/// (nalgebra's `SymmetricEigen`). The reconstruction residual is checked.
pub fn eig(a: &HermitianOperator) -> Result<EigenDecomposition> {
    let d = a.dim();
    let raw = a
        .m
        .clone()
        .try_symmetric_eigen(f64::EPSILON, MAX_EIGEN_SWEEPS)
        .ok_or(Error::ConvergenceFailure)?;

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| raw.eigenvalues[i].total_cmp(&raw.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| raw.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(d, d, |r, k| raw.eigenvectors[(r, order[k])]);
    let decomposition = EigenDecomposition { values, vectors };

    let norm = a.frobenius_norm();
    let rebuilt = decomposition.map_values(|l| l);
    if rebuilt.distance(a) > EIGEN_TOL * norm.max(1.0) {
        return Err(Error::ConvergenceFailure);
    }
    Ok(decomposition)
}

pub fn is_psd(a: &HermitianOperator, tol: f64) -> Result<bool> {
    a.is_psd(tol)
}

/// `V diag(max(λ,0)^p) V†`. Eigenvalues in `[-tol, 0)` are clamped; anything
/// more negative is rejected.
pub fn frac_power(a: &HermitianOperator, p: f64, tol: f64) -> Result<HermitianOperator> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::InvalidArgument(format!("power must be positive, got {p}")));
    }
    let e = a.eig()?;
    if e.min() < -tol {
        return Err(Error::NotPsd {
            min_eigenvalue: e.min(),
        });
    }
    Ok(e.map_values(|l| l.max(0.0).powf(p)))
}

/// Hilbert–Schmidt inner product `tr(A B)`.
pub fn hs_inner(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let t = trace_product(&a.m, &b.m);
    let scale = a.frobenius_norm() * b.frobenius_norm();
    debug_assert!(t.im.abs() <= HERMITICITY_TOL * scale.max(1.0));
    Ok(t.re)
}

impl Add for &HermitianOperator {
    type Output = HermitianOperator;
    fn add(self, rhs: Self) -> HermitianOperator {
        HermitianOperator { m: &self.m + &rhs.m }
    }
}

impl Sub for &HermitianOperator {
    type Output = HermitianOperator;
    fn sub(self, rhs: Self) -> HermitianOperator {
        HermitianOperator { m: &self.m - &rhs.m }
    }
}

impl Neg for &HermitianOperator {
    type Output = HermitianOperator;
    fn neg(self) -> HermitianOperator {
        HermitianOperator { m: -&self.m }
    }
}

impl Mul<f64> for &HermitianOperator {
    type Output = HermitianOperator;
    fn mul(self, s: f64) -> HermitianOperator {
        self.scale(s)
    }
}

/// JSON encoding of a complex matrix: rows of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixRepr(pub Vec<Vec<[f64; 2]>>);

impl MatrixRepr {
    pub fn from_matrix(m: &CMatrix) -> Self {
        Self(
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
        )
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let rows = self.0.len();
        if rows == 0 {
            return Err(Error::Parse("matrix has no rows".into()));
        }
        if let Some(bad) = self.0.iter().find(|r| r.len() != rows) {
            return Err(Error::NotSquare {
                rows,
                cols: bad.len(),
            });
        }
        Ok(CMatrix::from_fn(rows, rows, |i, j| {
            let [re, im] = self.0[i][j];
            c(re, im)
        }))
    }

    pub fn to_hermitian(&self) -> Result<HermitianOperator> {
        HermitianOperator::new(self.to_matrix()?)
    }
}

impl From<&HermitianOperator> for MatrixRepr {
    fn from(h: &HermitianOperator) -> Self {
        Self::from_matrix(h.matrix())
    }
}

pub mod paulis {
    //! Single-qubit Pauli matrices.
    use super::*;

    pub fn x() -> HermitianOperator {
        HermitianOperator::symmetrized(&CMatrix::from_row_slice(
            2,
            2,
            &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)],
        ))
    }

    pub fn y() -> HermitianOperator {
        HermitianOperator::symmetrized(&CMatrix::from_row_slice(
            2,
            2,
            &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)],
        ))
    }

    pub fn z() -> HermitianOperator {
        HermitianOperator::from_real_diagonal(&[1.0, -1.0])
    }

    /// `(I + r·σ)/2` for a Bloch vector `r = (x, y, z)`.
    pub fn bloch_state(r: [f64; 3]) -> HermitianOperator {
        let id = HermitianOperator::identity(2);
        let s = &(&(&id + &x().scale(r[0])) + &y().scale(r[1])) + &z().scale(r[2]);
        s.scale(0.5)
    }
}

#[cfg(test)]
mod tests {
    use super::paulis::*;
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn eig_identity_and_diagonal() {
        let e = HermitianOperator::identity(2).eig().unwrap();
        assert_eq!(e.values, vec![1.0, 1.0]);
        let e = z().eig().unwrap();
        assert_abs_diff_eq!(e.values[0], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.values[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn eig_z_plus_x_over_root_two() {
        // characteristic polynomial λ² − 1
        let h = (&z() + &x()).scale(std::f64::consts::FRAC_1_SQRT_2);
        let e = h.eig().unwrap();
        assert_abs_diff_eq!(e.values[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.values[1], 1.0, epsilon = 1e-14);
        let vv = e.vectors.adjoint() * &e.vectors;
        assert!((vv - CMatrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(1., 0.), c(0., 0.), c(1., 0.)]);
        assert!(matches!(
            HermitianOperator::new(m),
            Err(Error::NonHermitianInput { .. })
        ));
        let m = CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(f64::NAN, 0.), c(0., 0.), c(1., 0.)]);
        assert_eq!(HermitianOperator::new(m), Err(Error::NonFinite));
    }

    #[test]
    fn psd_checks() {
        assert!(HermitianOperator::identity(2).is_psd(1e-9).unwrap());
        assert!(!HermitianOperator::from_real_diagonal(&[1.0, -0.5])
            .is_psd(1e-9)
            .unwrap());
        let rho = (&HermitianOperator::identity(2) + &z().scale(0.999)).scale(0.5);
        assert!(rho.is_psd(1e-9).unwrap());
        let e = rho.eig().unwrap();
        assert_abs_diff_eq!(e.values[0], 0.001 / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.values[1], 1.999 / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn fractional_powers() {
        let id = HermitianOperator::identity(2);
        assert!(frac_power(&id, 0.5, 1e-9).unwrap().distance(&id) < 1e-14);
        let d = HermitianOperator::from_real_diagonal(&[4.0, 9.0]);
        let r = frac_power(&d, 0.5, 1e-9).unwrap();
        assert!(r.distance(&HermitianOperator::from_real_diagonal(&[2.0, 3.0])) < 1e-14);
        let proj = (&id + &z()).scale(0.5);
        for alpha in [0.3, 2.0, 7.5] {
            assert!(frac_power(&proj, alpha, 1e-9).unwrap().distance(&proj) < 1e-14);
        }
    }

    #[test]
    fn frac_power_clamps_roundoff_but_rejects_indefinite() {
        let a = HermitianOperator::from_real_diagonal(&[1.0, -1e-12]);
        let r = frac_power(&a, 2.0, 1e-9).unwrap();
        assert_abs_diff_eq!(r.matrix()[(1, 1)].re, 0.0);
        let b = HermitianOperator::from_real_diagonal(&[1.0, -1e-3]);
        assert!(matches!(frac_power(&b, 2.0, 1e-9), Err(Error::NotPsd { .. })));
        assert!(frac_power(&a, -1.0, 1e-9).is_err());
    }

    #[test]
    fn hilbert_schmidt() {
        assert_eq!(hs_inner(&z(), &x()).unwrap(), 0.0);
        assert_eq!(
            hs_inner(&HermitianOperator::identity(2), &HermitianOperator::identity(2)).unwrap(),
            2.0
        );
        let plus = bloch_state([1.0, 0.0, 0.0]);
        assert_abs_diff_eq!(hs_inner(&plus, &plus).unwrap(), 1.0, epsilon = 1e-15);
        assert!(matches!(
            hs_inner(&plus, &HermitianOperator::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn matrix_json_encoding() {
        let json = serde_json::to_string(&MatrixRepr::from(&y())).unwrap();
        assert_eq!(json, "[[[0.0,0.0],[0.0,-1.0]],[[0.0,1.0],[0.0,0.0]]]");
        let back: MatrixRepr = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_hermitian().unwrap(), y());
    }
}
