//! Gamma-bases, gamma-spaces and the decision procedure between them.
//!
//! A real subspace of observables is a gamma-space when it has a basis with
//! `O_i O_j + O_j O_i = 2 delta_ij 1`. Exactly these subspaces carry a two-time
//! correlation that is an inner product independent of the initial state.
//! [`decide_gamma_space`] runs the constructive direction: it samples states to refute
//! state-independent bilinearity, orthonormalises the basis under the sampled inner
//! product, and certifies the result with an explicit anticommutator check.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::correlation::{inner_product_report, InnerProductReport};
use crate::error::{Error, Result};
use crate::operator::{ensure_same_dim, hermitian_norm, HermitianOperator};
use crate::rng::Seed;

/// Operator-norm tolerance on anticommutator residuals, state dependence and dichotomy.
pub const TAU_GAMMA: f64 = 1e-8;
/// Linear independence and positive-definiteness threshold.
pub const TAU_RANK: f64 = 1e-8;

/// A real linear subspace of observables, given by an ordered basis.
#[derive(Debug, Clone)]
pub struct ObservableSubspace {
    basis: Vec<HermitianOperator>,
    labels: Option<Vec<String>>,
}

impl ObservableSubspace {
    pub fn new(basis: Vec<HermitianOperator>) -> Result<Self> {
        let first = basis
            .first()
            .ok_or_else(|| Error::InvalidParameter("a subspace needs at least one basis element".into()))?;
        let n = first.dim();
        for op in &basis {
            ensure_same_dim(n, op.dim())?;
        }
        if basis.len() > n * n {
            return Err(Error::InvalidParameter(format!(
                "{} elements exceed the real dimension {} of {n}x{n} Hermitian matrices",
                basis.len(),
                n * n
            )));
        }
        let coords: Vec<Vec<f64>> = basis.iter().map(HermitianOperator::real_coordinates).collect();
        let m = DMatrix::from_fn(n * n, basis.len(), |i, j| coords[j][i]);
        let smallest = m.singular_values().min();
        if smallest <= TAU_RANK {
            return Err(Error::LinearlyDependent { smallest_singular_value: smallest });
        }
        Ok(Self { basis, labels: None })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.basis.len() {
            return Err(Error::InvalidParameter(format!(
                "{} labels for {} basis elements",
                labels.len(),
                self.basis.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn basis(&self) -> &[HermitianOperator] {
        &self.basis
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Dimension of the subspace.
    pub fn dim_space(&self) -> usize {
        self.basis.len()
    }

    /// Size of the matrices.
    pub fn matrix_dim(&self) -> usize {
        self.basis[0].dim()
    }

    /// Conjugates every element by the same unitary.
    pub fn conjugate_by(&self, unitary: &DMatrix<crate::C64>) -> Result<Self> {
        let basis = self.basis.iter().map(|o| o.conjugate_by(unitary)).collect::<Result<Vec<_>>>()?;
        Ok(Self { basis, labels: self.labels.clone() })
    }
}

/// `{sigma_x, sigma_y, sigma_z}`.
pub fn pauli_basis() -> ObservableSubspace {
    ObservableSubspace {
        basis: vec![
            HermitianOperator::pauli_x(),
            HermitianOperator::pauli_y(),
            HermitianOperator::pauli_z(),
        ],
        labels: Some(vec!["X".into(), "Y".into(), "Z".into()]),
    }
}

/// `d` mutually anticommuting involutions: Paulis on one qubit for `d <= 3`,
/// `{XX, XY, XZ, ZI, YI}` (first `d`) on two qubits for `d` in `{4, 5}`.
pub fn standard_gamma_basis(d: usize) -> Result<ObservableSubspace> {
    let x = HermitianOperator::pauli_x();
    let y = HermitianOperator::pauli_y();
    let z = HermitianOperator::pauli_z();
    let id = HermitianOperator::identity(2);
    let (basis, labels): (Vec<_>, Vec<&str>) = match d {
        1..=3 => {
            let all = pauli_basis();
            (all.basis[..d].to_vec(), ["X", "Y", "Z"][..d].to_vec())
        }
        4 | 5 => {
            let all = [x.kron(&x), x.kron(&y), x.kron(&z), z.kron(&id), y.kron(&id)];
            (all[..d].to_vec(), ["XX", "XY", "XZ", "ZI", "YI"][..d].to_vec())
        }
        _ => {
            return Err(Error::InvalidParameter(format!(
                "standard gamma bases exist for d in 1..=5, got {d}"
            )))
        }
    };
    Ok(ObservableSubspace { basis, labels: Some(labels.into_iter().map(String::from).collect()) })
}

/// `max_ij || {O_i, O_j} - 2 delta_ij 1 ||_2` over an operator list.
pub fn anticommutator_residual(ops: &[HermitianOperator]) -> f64 {
    let mut worst = 0.0_f64;
    for (i, a) in ops.iter().enumerate() {
        for (j, b) in ops.iter().enumerate().skip(i) {
            let Ok(anti) = a.anticommutator(b) else {
                return f64::INFINITY;
            };
            let mut m = anti.into_matrix();
            if i == j {
                for k in 0..m.nrows() {
                    m[(k, k)] -= 2.0;
                }
            }
            worst = worst.max(hermitian_norm(&m));
        }
    }
    worst
}

/// Whether the basis itself is a gamma-basis, with the worst anticommutator residual.
pub fn is_gamma_basis(space: &ObservableSubspace) -> (bool, f64) {
    let r = anticommutator_residual(space.basis());
    (r <= TAU_GAMMA, r)
}

/// Whether the distinct eigenvalues are exactly `{-1, +1}`.
pub fn is_dichotomic(o: &HermitianOperator) -> bool {
    let spec = o.spectral_decompose();
    let ev = spec.eigenvalues();
    ev.len() == 2 && (ev[0] + 1.0).abs() <= TAU_GAMMA && (ev[1] - 1.0).abs() <= TAU_GAMMA
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureReason {
    NotInnerProduct,
    StateDependent,
    BasisNotDichotomic,
    AnticommutatorViolation,
    None,
}

impl FailureReason {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureReason::NotInnerProduct => "not-inner-product",
            FailureReason::StateDependent => "state-dependent",
            FailureReason::BasisNotDichotomic => "basis-not-dichotomic",
            FailureReason::AnticommutatorViolation => "anticommutator-violation",
            FailureReason::None => "none",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GammaVerdict {
    pub is_gamma: bool,
    pub failure_reason: FailureReason,
    /// Worst anticommutator residual: of the orthonormalised basis once it exists,
    /// otherwise of the input basis.
    pub residuals: f64,
    /// The certified gamma-basis when `is_gamma`.
    pub witness_basis: Option<Vec<HermitianOperator>>,
    pub statistics: InnerProductReport,
}

impl GammaVerdict {
    fn fail(reason: FailureReason, residuals: f64, statistics: InnerProductReport) -> Self {
        Self { is_gamma: false, failure_reason: reason, residuals, witness_basis: None, statistics }
    }
}

/// Orthonormalises the basis under the symmetric form `G` (modified Gram–Schmidt on
/// coefficient vectors). Row `i` of the result holds the coordinates of the `i`-th
/// orthonormal element in the original basis.
fn gram_schmidt(g: &DMatrix<f64>) -> Option<Vec<DVector<f64>>> {
    let d = g.nrows();
    let inner = |a: &DVector<f64>, b: &DVector<f64>| (a.transpose() * g * b)[(0, 0)];
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(d);
    for i in 0..d {
        let mut v = DVector::from_fn(d, |k, _| if k == i { 1.0 } else { 0.0 });
        for u in &out {
            let p = inner(&v, u);
            v -= u * p;
        }
        let n2 = inner(&v, &v);
        if n2.is_nan() || n2 <= TAU_RANK {
            return None;
        }
        out.push(v / n2.sqrt());
    }
    Some(out)
}

/// Decides whether `space` is a gamma-space by following the constructive proof.
///
/// 1. `trials` sampled states (alternating mixed and pure) must give the same, symmetric,
///    bilinear, positive-definite Gram matrix, else `state-dependent` or `not-inner-product`.
/// 2. The basis is orthonormalised under the Gram form of the first state.
/// 3. Every orthonormal element and every `(O_i + O_j)/sqrt 2` must be dichotomic.
/// 4. `{O_i, O_j} = 2 delta_ij 1` is checked directly, and also through
///    `{O_i, O_j} = (O_i + O_j)^2 - 2` for `i != j`; the larger residual is reported.
///
/// A positive verdict is certified by the witness basis, independently of sampling.
pub fn decide_gamma_space(space: &ObservableSubspace, trials: usize, seed: Seed) -> Result<GammaVerdict> {
    if trials < 2 {
        return Err(Error::InvalidParameter(format!(
            "at least 2 trials are needed to test state independence, got {trials}"
        )));
    }
    let stats = inner_product_report(space, trials, seed)?;
    let input_residual = anticommutator_residual(space.basis());

    if stats.max_state_dependence > TAU_GAMMA {
        return Ok(GammaVerdict::fail(FailureReason::StateDependent, input_residual, stats));
    }
    if stats.max_asymmetry > TAU_GAMMA
        || stats.bilinearity_residual > TAU_GAMMA
        || stats.min_gram_eigenvalue <= TAU_RANK
    {
        return Ok(GammaVerdict::fail(FailureReason::NotInnerProduct, input_residual, stats));
    }

    let g = stats.grams[0].symmetric_part();
    let Some(coeffs) = gram_schmidt(&g) else {
        return Ok(GammaVerdict::fail(FailureReason::NotInnerProduct, input_residual, stats));
    };
    let witness = coeffs
        .iter()
        .map(|c| HermitianOperator::linear_combination(c.as_slice(), space.basis()))
        .collect::<Result<Vec<_>>>()?;
    let witness_residual = anticommutator_residual(&witness);

    if !witness.iter().all(is_dichotomic) {
        return Ok(GammaVerdict::fail(FailureReason::BasisNotDichotomic, witness_residual, stats));
    }
    let mut sum_route = 0.0_f64;
    let id = HermitianOperator::identity(space.matrix_dim());
    for i in 0..witness.len() {
        for j in (i + 1)..witness.len() {
            let sum = witness[i].add(&witness[j])?;
            if !is_dichotomic(&sum.scale(std::f64::consts::FRAC_1_SQRT_2)) {
                return Ok(GammaVerdict::fail(FailureReason::BasisNotDichotomic, witness_residual, stats));
            }
            let via_square = sum.square().sub(&id.scale(2.0))?;
            sum_route = sum_route.max(hermitian_norm(via_square.matrix()));
        }
    }
    let residuals = witness_residual.max(sum_route);
    if residuals > TAU_GAMMA {
        return Ok(GammaVerdict::fail(FailureReason::AnticommutatorViolation, residuals, stats));
    }
    Ok(GammaVerdict {
        is_gamma: true,
        failure_reason: FailureReason::None,
        residuals,
        witness_basis: Some(witness),
        statistics: stats,
    })
}
