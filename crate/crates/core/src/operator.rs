//! Hermitian operators, clustered spectral decompositions and density operators.
//!
//! All matrices are dense `DMatrix<C64>`. Validation happens once, at construction;
//! every other routine assumes the invariants of its inputs.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Seed;

pub type C64 = nalgebra::Complex<f64>;

/// Hermiticity tolerance on entries, relative to `max(1, ||H||_2)`.
pub const TAU_HERM: f64 = 1e-10;
/// Generic numerical tolerance on entries, relative to `max(1, ||.||_2)`.
pub const TAU_NUM: f64 = 1e-10;
/// Adjacent eigenvalues closer than `TAU_CLUSTER * max(1, ||H||_2)` are one eigenvalue.
pub const TAU_CLUSTER: f64 = 1e-9;
/// Relative tolerance for recognising a two-point spectrum `{-l, +l}`.
pub const TAU_PM: f64 = 1e-8;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `Tr[A B]` without forming the product.
pub fn trace_product(a: &DMatrix<C64>, b: &DMatrix<C64>) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Largest singular value.
pub fn operator_norm(m: &DMatrix<C64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// Operator norm of a Hermitian matrix (largest absolute eigenvalue).
pub fn hermitian_norm(m: &DMatrix<C64>) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

fn max_asymmetry(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn check_square(m: &DMatrix<C64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    if m.nrows() == 0 {
        return Err(Error::EmptyMatrix);
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

fn check_hermitian(m: &DMatrix<C64>) -> Result<()> {
    let asym = max_asymmetry(m);
    if asym > TAU_HERM * operator_norm(m).max(1.0) {
        return Err(Error::NotHermitian { max_asymmetry: asym });
    }
    Ok(())
}

fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()).scale(0.5)
}

/// An observable: a complex Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: DMatrix<C64>,
}

impl HermitianOperator {
    /// Validates `matrix` and stores its exact Hermitian part.
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        check_square(&matrix)?;
        check_hermitian(&matrix)?;
        Ok(Self { matrix: hermitian_part(&matrix) })
    }

    /// Builds from real entries in row-major order.
    pub fn from_real_rows(dim: usize, rows: &[f64]) -> Result<Self> {
        if rows.len() != dim * dim {
            return Err(Error::InvalidParameter(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                rows.len()
            )));
        }
        Self::new(DMatrix::from_row_iterator(dim, dim, rows.iter().map(|&x| c(x, 0.0))))
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let d = DVector::from_iterator(values.len(), values.iter().map(|&x| c(x, 0.0)));
        Self::new(DMatrix::from_diagonal(&d))
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: DMatrix::identity(dim, dim) }
    }

    pub fn zero(dim: usize) -> Self {
        Self { matrix: DMatrix::zeros(dim, dim) }
    }

    pub fn pauli_x() -> Self {
        Self { matrix: DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]) }
    }

    pub fn pauli_y() -> Self {
        Self { matrix: DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]) }
    }

    pub fn pauli_z() -> Self {
        Self { matrix: DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]) }
    }

    /// `r . sigma = r_x sigma_x + r_y sigma_y + r_z sigma_z`.
    pub fn bloch(r: [f64; 3]) -> Self {
        let m = Self::pauli_x().matrix.scale(r[0])
            + Self::pauli_y().matrix.scale(r[1])
            + Self::pauli_z().matrix.scale(r[2]);
        Self { matrix: m }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn scale(&self, a: f64) -> Self {
        Self { matrix: self.matrix.scale(a) }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        ensure_same_dim(self.dim(), other.dim())?;
        Ok(Self { matrix: &self.matrix + &other.matrix })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        ensure_same_dim(self.dim(), other.dim())?;
        Ok(Self { matrix: &self.matrix - &other.matrix })
    }

    /// `sum_k coeffs[k] * ops[k]`.
    pub fn linear_combination(coeffs: &[f64], ops: &[HermitianOperator]) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty linear combination".into()))?;
        if coeffs.len() != ops.len() {
            return Err(Error::InvalidParameter(format!(
                "{} coefficients for {} operators",
                coeffs.len(),
                ops.len()
            )));
        }
        let mut acc = DMatrix::zeros(first.dim(), first.dim());
        for (a, op) in coeffs.iter().zip(ops) {
            ensure_same_dim(first.dim(), op.dim())?;
            acc += op.matrix.scale(*a);
        }
        Ok(Self { matrix: acc })
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        Self { matrix: self.matrix.kronecker(&other.matrix) }
    }

    /// `{A, B} = AB + BA`, Hermitian whenever both factors are.
    pub fn anticommutator(&self, other: &Self) -> Result<Self> {
        ensure_same_dim(self.dim(), other.dim())?;
        let ab = &self.matrix * &other.matrix;
        let m = &ab + ab.adjoint();
        Ok(Self { matrix: m })
    }

    pub fn square(&self) -> Self {
        Self { matrix: hermitian_part(&(&self.matrix * &self.matrix)) }
    }

    /// `U^dagger A U` for a unitary `U`.
    pub fn conjugate_by(&self, unitary: &DMatrix<C64>) -> Result<Self> {
        ensure_same_dim(self.dim(), unitary.nrows())?;
        let m = unitary.adjoint() * &self.matrix * unitary;
        Ok(Self { matrix: hermitian_part(&m) })
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Largest absolute eigenvalue.
    pub fn norm(&self) -> f64 {
        hermitian_norm(&self.matrix)
    }

    /// Vectorisation over the reals: `d^2` real coordinates of the Hermitian matrix.
    pub fn real_coordinates(&self) -> Vec<f64> {
        let n = self.dim();
        let mut v = Vec::with_capacity(n * n);
        for i in 0..n {
            v.push(self.matrix[(i, i)].re);
            for j in (i + 1)..n {
                let z = self.matrix[(i, j)];
                v.push(z.re * std::f64::consts::SQRT_2);
                v.push(z.im * std::f64::consts::SQRT_2);
            }
        }
        v
    }

    pub fn spectral_decompose(&self) -> SpectralDecomposition {
        spectral_decompose(self)
    }
}

pub(crate) fn ensure_same_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Distinct eigenvalues (strictly increasing) with their orthogonal eigenprojectors.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    dim: usize,
    eigenvalues: Vec<f64>,
    multiplicities: Vec<usize>,
    projectors: Vec<DMatrix<C64>>,
}

/// Clustered spectral decomposition.
///
/// Eigenvalues are sorted and adjacent values closer than
/// `TAU_CLUSTER * max(1, ||H||_2)` are merged (single linkage). Each cluster is represented
/// by the mean of its raw eigenvalues and projects onto the span of their eigenvectors.
pub fn spectral_decompose(h: &HermitianOperator) -> SpectralDecomposition {
    let n = h.dim();
    let eig = SymmetricEigen::new(h.matrix.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let scale = eig.eigenvalues.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
    let gap = TAU_CLUSTER * scale;

    let mut eigenvalues = Vec::new();
    let mut multiplicities = Vec::new();
    let mut projectors: Vec<DMatrix<C64>> = Vec::new();
    let mut prev: Option<f64> = None;
    let mut sum = 0.0;
    for &k in &order {
        let value = eig.eigenvalues[k];
        let v = eig.eigenvectors.column(k);
        let outer = v * v.adjoint();
        match prev {
            Some(p) if value - p < gap => {
                let last = projectors.len() - 1;
                projectors[last] += outer;
                multiplicities[last] += 1;
                sum += value;
                eigenvalues[last] = sum / multiplicities[last] as f64;
            }
            _ => {
                projectors.push(outer);
                multiplicities.push(1);
                eigenvalues.push(value);
                sum = value;
            }
        }
        prev = Some(value);
    }
    SpectralDecomposition { dim: n, eigenvalues, multiplicities, projectors }
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn projectors(&self) -> &[DMatrix<C64>] {
        &self.projectors
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `sum_i lambda_i P_i`.
    pub fn reconstruct(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (l, p) in self.eigenvalues.iter().zip(&self.projectors) {
            m += p.scale(*l);
        }
        m
    }

    /// Largest entry of `P_i P_j - delta_ij P_i` and `sum_i P_i - 1`.
    pub fn projector_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (i, pi) in self.projectors.iter().enumerate() {
            for (j, pj) in self.projectors.iter().enumerate() {
                let mut r = pi * pj;
                if i == j {
                    r -= pi;
                }
                worst = worst.max(r.camax());
            }
        }
        let mut total = DMatrix::<C64>::identity(self.dim, self.dim);
        for p in &self.projectors {
            total -= p;
        }
        worst.max(total.camax())
    }

    /// `Some(l)` when the spectrum is `{-l, +l}` with `l > 0`.
    pub fn plus_minus_magnitude(&self) -> Option<f64> {
        if self.eigenvalues.len() != 2 {
            return None;
        }
        let (lo, hi) = (self.eigenvalues[0], self.eigenvalues[1]);
        let lambda = 0.5 * (hi - lo);
        if lambda > 0.0 && (hi + lo).abs() <= TAU_PM * lambda.max(1.0) {
            Some(lambda)
        } else {
            None
        }
    }
}

/// Eigenprojectors of an observable with spectrum `{-l, +l}`.
#[derive(Debug, Clone)]
pub struct PlusMinusProjectors {
    pub lambda: f64,
    pub plus: DMatrix<C64>,
    pub minus: DMatrix<C64>,
}

/// `Pi± = (1 ± O / l) / 2` for an observable whose distinct eigenvalues are `±l`.
pub fn projectors_pm(o: &HermitianOperator) -> Result<PlusMinusProjectors> {
    let spec = spectral_decompose(o);
    let lambda = spec
        .plus_minus_magnitude()
        .ok_or_else(|| Error::NotPlusMinusSpectrum { eigenvalues: spec.eigenvalues.clone() })?;
    let id = DMatrix::<C64>::identity(o.dim(), o.dim());
    let scaled = o.matrix.scale(1.0 / lambda);
    Ok(PlusMinusProjectors {
        lambda,
        plus: (&id + &scaled).scale(0.5),
        minus: (&id - &scaled).scale(0.5),
    })
}

/// A quantum state: positive semi-definite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: DMatrix<C64>,
}

impl DensityOperator {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        check_square(&matrix)?;
        check_hermitian(&matrix)?;
        let matrix = hermitian_part(&matrix);
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > TAU_NUM {
            return Err(Error::InvalidTrace { trace });
        }
        let min_eigenvalue = SymmetricEigen::new(matrix.clone()).eigenvalues.min();
        if min_eigenvalue < -TAU_NUM {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(Self { matrix })
    }

    /// Skips validation; callers guarantee the invariants (e.g. Lüders post-states).
    pub(crate) fn from_trusted(matrix: DMatrix<C64>) -> Self {
        Self { matrix }
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyMatrix);
        }
        Ok(Self { matrix: DMatrix::identity(dim, dim).scale(1.0 / dim as f64) })
    }

    /// `|k><k|` in the computational basis.
    pub fn basis_state(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::InvalidParameter(format!(
                "basis index {k} out of range for dimension {dim}"
            )));
        }
        let mut m = DMatrix::zeros(dim, dim);
        m[(k, k)] = c(1.0, 0.0);
        Ok(Self { matrix: m })
    }

    /// `|psi><psi| / <psi|psi>`.
    pub fn from_pure(psi: &DVector<C64>) -> Result<Self> {
        let norm = psi.norm();
        if psi.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        if !norm.is_finite() || norm <= 0.0 {
            return Err(Error::Domain("state vector must be nonzero and finite".into()));
        }
        let v = psi.unscale(norm);
        Ok(Self { matrix: &v * v.adjoint() })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `Tr[rho^2]`.
    pub fn purity(&self) -> f64 {
        trace_product(&self.matrix, &self.matrix).re
    }

    /// `Tr[rho A]`.
    pub fn expectation(&self, a: &HermitianOperator) -> Result<f64> {
        ensure_same_dim(self.dim(), a.dim())?;
        Ok(trace_product(&self.matrix, a.matrix()).re)
    }
}

/// Matrix with i.i.d. standard complex Gaussian entries (`E|z|^2 = 1`).
pub fn complex_gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re * s, im * s)
    })
}

/// Hilbert–Schmidt random state `G G^dagger / Tr(G G^dagger)`.
pub fn random_density(dim: usize, seed: Seed) -> Result<DensityOperator> {
    if dim == 0 {
        return Err(Error::EmptyMatrix);
    }
    let mut rng = seed.rng();
    let g = complex_gaussian_matrix(dim, dim, &mut rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    Ok(DensityOperator::from_trusted(hermitian_part(&m.unscale(tr))))
}

/// Haar-random pure state.
pub fn random_pure_density(dim: usize, seed: Seed) -> Result<DensityOperator> {
    if dim == 0 {
        return Err(Error::EmptyMatrix);
    }
    let mut rng = seed.rng();
    let g = complex_gaussian_matrix(dim, 1, &mut rng);
    DensityOperator::from_pure(&g.column(0).into_owned())
}

/// Haar-random unitary from the phase-corrected QR decomposition of a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<C64> {
    let g = complex_gaussian_matrix(dim, dim, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random Hermitian matrix `(G + G^dagger) / 2` with Gaussian `G`.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianOperator {
    let g = complex_gaussian_matrix(dim, dim, rng);
    HermitianOperator { matrix: hermitian_part(&g) }
}

/// `U diag(values) U^dagger` with a Haar-random `U`.
pub fn random_with_spectrum<R: Rng + ?Sized>(values: &[f64], rng: &mut R) -> HermitianOperator {
    let n = values.len();
    let u = random_unitary(n, rng);
    let d = DMatrix::from_diagonal(&DVector::from_iterator(n, values.iter().map(|&x| c(x, 0.0))));
    HermitianOperator { matrix: hermitian_part(&(&u * d * u.adjoint())) }
}

impl Serialize for HermitianOperator {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixRepr::from(&self.matrix).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for HermitianOperator {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = MatrixRepr::deserialize(deserializer)?;
        let m = repr.into_matrix().map_err(serde::de::Error::custom)?;
        HermitianOperator::new(m).map_err(serde::de::Error::custom)
    }
}

/// Row-major real and imaginary parts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixRepr {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&DMatrix<C64>> for MatrixRepr {
    fn from(m: &DMatrix<C64>) -> Self {
        let rows = |f: fn(&C64) -> f64| {
            (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect()
        };
        MatrixRepr { re: rows(|z| z.re), im: rows(|z| z.im) }
    }
}

impl MatrixRepr {
    pub fn into_matrix(self) -> std::result::Result<DMatrix<C64>, String> {
        let n = self.re.len();
        if self.im.len() != n || self.re.iter().chain(&self.im).any(|r| r.len() != n) {
            return Err("real and imaginary parts must be square and of equal size".into());
        }
        Ok(DMatrix::from_fn(n, n, |i, j| c(self.re[i][j], self.im[i][j])))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: &DMatrix<C64>, b: &DMatrix<C64>, tol: f64) -> bool {
        (a - b).camax() <= tol
    }

    fn diag(v: &[f64]) -> DMatrix<C64> {
        DMatrix::from_diagonal(&DVector::from_iterator(v.len(), v.iter().map(|&x| c(x, 0.0))))
    }

    #[test]
    fn sigma_z_decomposition() {
        let s = HermitianOperator::pauli_z().spectral_decompose();
        assert_eq!(s.eigenvalues(), &[-1.0, 1.0]);
        assert!(close(&s.projectors()[0], &diag(&[0.0, 1.0]), 1e-12));
        assert!(close(&s.projectors()[1], &diag(&[1.0, 0.0]), 1e-12));
    }

    #[test]
    fn identity_has_single_cluster() {
        let s = HermitianOperator::identity(2).spectral_decompose();
        assert_eq!(s.len(), 1);
        assert!((s.eigenvalues()[0] - 1.0).abs() < 1e-12);
        assert_eq!(s.multiplicities(), &[2]);
        assert!(close(&s.projectors()[0], &DMatrix::identity(2, 2), 1e-12));
    }

    #[test]
    fn bloch_345_has_spectrum_pm5() {
        let s = HermitianOperator::bloch([3.0, 4.0, 0.0]).spectral_decompose();
        assert_eq!(s.len(), 2);
        assert!((s.eigenvalues()[0] + 5.0).abs() < 1e-12);
        assert!((s.eigenvalues()[1] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn near_degenerate_eigenvalues_merge_to_mean() {
        let h = HermitianOperator::diagonal(&[1.0, 1.0 + 1e-12, 3.0]).unwrap();
        let s = h.spectral_decompose();
        assert_eq!(s.len(), 2);
        assert_eq!(s.multiplicities(), &[2, 1]);
        assert!((s.eigenvalues()[0] - (1.0 + 0.5e-12)).abs() < 1e-15);
        // gaps above the threshold stay separate
        let h = HermitianOperator::diagonal(&[1.0, 1.0 + 1e-6]).unwrap();
        assert_eq!(h.spectral_decompose().len(), 2);
    }

    #[test]
    fn non_hermitian_rejected_with_asymmetry() {
        let m = DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(2., 0.), c(0., 0.), c(1., 0.)]);
        match HermitianOperator::new(m) {
            Err(Error::NotHermitian { max_asymmetry }) => assert!((max_asymmetry - 2.0).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
        let m = DMatrix::from_row_slice(1, 2, &[c(1., 0.), c(2., 0.)]);
        assert!(matches!(HermitianOperator::new(m), Err(Error::NotSquare { .. })));
        assert!(matches!(HermitianOperator::new(DMatrix::zeros(0, 0)), Err(Error::EmptyMatrix)));
    }

    #[test]
    fn projectors_pm_examples() {
        let p = projectors_pm(&HermitianOperator::pauli_z()).unwrap();
        assert!(close(&p.plus, &diag(&[1.0, 0.0]), 1e-12));
        assert!(close(&p.minus, &diag(&[0.0, 1.0]), 1e-12));

        let x = HermitianOperator::pauli_x();
        let p = projectors_pm(&x).unwrap();
        let id = DMatrix::<C64>::identity(2, 2);
        assert!(close(&p.plus, &(&id + x.matrix()).scale(0.5), 1e-12));
        assert!(close(&p.minus, &(&id - x.matrix()).scale(0.5), 1e-12));

        let y2 = HermitianOperator::pauli_y().scale(2.0);
        let p = projectors_pm(&y2).unwrap();
        assert!((p.lambda - 2.0).abs() < 1e-12);
        let s = y2.spectral_decompose();
        assert!(close(&p.minus, &s.projectors()[0], 1e-10));
        assert!(close(&p.plus, &s.projectors()[1], 1e-10));
        assert!(close(&(&p.plus * &p.plus), &p.plus, 1e-10));
        assert!(close(&(&p.plus + &p.minus), &id, 1e-12));
    }

    #[test]
    fn projectors_pm_rejects_other_spectra() {
        assert!(projectors_pm(&HermitianOperator::identity(2)).is_err());
        assert!(projectors_pm(&HermitianOperator::diagonal(&[1.0, 0.0]).unwrap()).is_err());
        assert!(projectors_pm(&HermitianOperator::diagonal(&[1.0, 0.0, -1.0]).unwrap()).is_err());
    }

    #[test]
    fn random_density_examples() {
        let one = random_density(1, Seed(3)).unwrap();
        assert!((one.matrix()[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        let a = random_density(2, Seed(42)).unwrap();
        let b = random_density(2, Seed(42)).unwrap();
        assert_eq!(a, b);
        assert!(DensityOperator::new(a.matrix().clone()).is_ok());
    }

    #[test]
    fn random_pure_density_is_pure() {
        let r = random_pure_density(2, Seed(5)).unwrap();
        assert!(close(&(r.matrix() * r.matrix()), r.matrix(), 1e-10));
        let r4 = random_pure_density(4, Seed(6)).unwrap();
        assert!((r4.trace() - 1.0).abs() < 1e-12);
        assert_eq!(random_pure_density(4, Seed(6)).unwrap(), r4);
    }

    #[test]
    fn random_density_fuzz_validates() {
        for k in 0..1000u64 {
            let dim = 1 + (k % 6) as usize;
            let rho = random_density(dim, Seed(k)).unwrap();
            DensityOperator::new(rho.matrix().clone()).unwrap();
        }
    }

    #[test]
    fn density_validation_errors() {
        assert!(matches!(DensityOperator::new(diag(&[0.5, 0.4])), Err(Error::InvalidTrace { .. })));
        assert!(matches!(DensityOperator::new(diag(&[1.5, -0.5])), Err(Error::NotPositive { .. })));
        assert!(DensityOperator::basis_state(2, 2).is_err());
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = Seed(9).rng();
        let u = random_unitary(4, &mut rng);
        assert!(close(&(u.adjoint() * &u), &DMatrix::identity(4, 4), 1e-12));
    }

    proptest! {
        #[test]
        fn decomposition_reconstructs(seed in any::<u64>(), dim in 2usize..=8) {
            let mut rng = Seed(seed).rng();
            let h = random_hermitian(dim, &mut rng);
            let s = h.spectral_decompose();
            let tol = TAU_NUM * h.norm().max(1.0);
            prop_assert!((s.reconstruct() - h.matrix()).camax() <= tol);
            prop_assert!(s.projector_residual() <= TAU_NUM * 10.0);
            prop_assert!(s.eigenvalues().windows(2).all(|w| w[1] - w[0] >= TAU_CLUSTER));
        }

        #[test]
        fn degenerate_spectra_reconstruct(seed in any::<u64>(), dim in 2usize..=8, k in 1usize..=7) {
            let k = k.min(dim - 1);
            let mut values = vec![-1.5; k];
            values.extend(std::iter::repeat_n(2.0, dim - k));
            let mut rng = Seed(seed).rng();
            let h = random_with_spectrum(&values, &mut rng);
            let s = h.spectral_decompose();
            prop_assert_eq!(s.multiplicities(), &[k, dim - k][..]);
            prop_assert!((s.reconstruct() - h.matrix()).camax() <= TAU_NUM * 2.0);
            prop_assert!(s.projector_residual() <= TAU_NUM);
        }

        #[test]
        fn projectors_pm_agree_with_decomposition(seed in any::<u64>(), dim in 2usize..=6, lambda in 0.1f64..5.0) {
            let mut rng = Seed(seed).rng();
            let plus = 1 + (seed as usize % (dim - 1));
            let values: Vec<f64> = (0..dim).map(|i| if i < plus { lambda } else { -lambda }).collect();
            let o = random_with_spectrum(&values, &mut rng);
            let p = projectors_pm(&o).unwrap();
            let s = o.spectral_decompose();
            prop_assert!((&p.minus - &s.projectors()[0]).camax() <= TAU_NUM * 10.0);
            prop_assert!((&p.plus - &s.projectors()[1]).camax() <= TAU_NUM * 10.0);
        }
    }
}
