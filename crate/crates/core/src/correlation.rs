//! The two-time correlation function of sequential projective measurements.
//!
//! `E_rho(A, B)` is the expected product of outcomes when `A` is measured on `rho`,
//! the system is left in the Lüders post-state, and `B` is measured next:
//!
//! ```text
//! E_rho(A, B) = sum_i lambda_i Tr[P_i rho P_i B],     A = sum_i lambda_i P_i
//! ```
//!
//! with the sum over the distinct eigenvalues of `A`. The first argument is always the
//! observable measured first. `E_rho` is linear in `B` but in general neither linear in `A`
//! nor symmetric; the report types here measure exactly how far a subspace departs from
//! a state-independent inner product.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gamma::ObservableSubspace;
use crate::operator::{
    ensure_same_dim, random_density, random_pure_density, trace_product, DensityOperator,
    HermitianOperator, SpectralDecomposition, TAU_NUM,
};
use crate::rng::Seed;

/// Random linear combinations probed per state when testing linearity in the first argument.
pub const BILINEARITY_PROBES: usize = 4;

/// `E_rho(o1, o2)`, decomposing `o1` on the fly.
pub fn two_time_correlation(
    o1: &HermitianOperator,
    o2: &HermitianOperator,
    rho: &DensityOperator,
) -> Result<f64> {
    ensure_same_dim(o1.dim(), o2.dim())?;
    ensure_same_dim(o1.dim(), rho.dim())?;
    correlation_from_decomposition(&o1.spectral_decompose(), o2, rho)
}

/// `E_rho` with the first observable already decomposed.
pub fn correlation_from_decomposition(
    first: &SpectralDecomposition,
    o2: &HermitianOperator,
    rho: &DensityOperator,
) -> Result<f64> {
    ensure_same_dim(first.dim(), o2.dim())?;
    ensure_same_dim(first.dim(), rho.dim())?;
    let mut total = nalgebra::Complex::new(0.0, 0.0);
    for (lambda, p) in first.eigenvalues().iter().zip(first.projectors()) {
        // Tr[P rho P B] = Tr[rho (P B P)]
        let pbp = p * o2.matrix() * p;
        total += trace_product(rho.matrix(), &pbp) * *lambda;
    }
    let scale = first
        .eigenvalues()
        .iter()
        .fold(1.0_f64, |a, l| a.max(l.abs()))
        * o2.norm().max(1.0);
    debug_assert!(
        total.im.abs() <= TAU_NUM * scale,
        "imaginary part {} of a real correlation",
        total.im
    );
    Ok(total.re)
}

/// `(1/2) Tr[rho {o, p}]`, valid as `E_rho(o, p)` only when `o` has spectrum `{-l, +l}`.
pub fn anticommutator_correlation(
    o: &HermitianOperator,
    p: &HermitianOperator,
    rho: &DensityOperator,
) -> Result<f64> {
    ensure_same_dim(o.dim(), p.dim())?;
    ensure_same_dim(o.dim(), rho.dim())?;
    let spec = o.spectral_decompose();
    if spec.plus_minus_magnitude().is_none() {
        return Err(Error::NotPlusMinusSpectrum { eigenvalues: spec.eigenvalues().to_vec() });
    }
    let anti = o.anticommutator(p)?;
    Ok(0.5 * trace_product(rho.matrix(), anti.matrix()).re)
}

/// `Tr[rho o^2]`, which equals `E_rho(o, o)` for every observable.
pub fn self_correlation_identity(o: &HermitianOperator, rho: &DensityOperator) -> Result<f64> {
    ensure_same_dim(o.dim(), rho.dim())?;
    let sq = o.matrix() * o.matrix();
    Ok(trace_product(rho.matrix(), &sq).re)
}

/// Pairwise correlations over a basis. Row index is the first-measured observable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GramMatrix {
    pub dim_space: usize,
    pub entries: Vec<Vec<f64>>,
    pub state_tag: String,
}

impl GramMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i][j]
    }

    /// `max_ij |G_ij - G_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        let n = self.dim_space;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max((self.entries[i][j] - self.entries[j][i]).abs());
            }
        }
        worst
    }

    /// Entrywise max difference to another Gram matrix of the same size.
    pub fn max_abs_diff(&self, other: &GramMatrix) -> f64 {
        self.entries
            .iter()
            .flatten()
            .zip(other.entries.iter().flatten())
            .fold(0.0_f64, |a, (x, y)| a.max((x - y).abs()))
    }

    /// Entrywise max distance to the identity matrix.
    pub fn identity_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (i, row) in self.entries.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        worst
    }

    /// `(G + G^T) / 2` as a dense real matrix.
    pub fn symmetric_part(&self) -> DMatrix<f64> {
        let n = self.dim_space;
        DMatrix::from_fn(n, n, |i, j| 0.5 * (self.entries[i][j] + self.entries[j][i]))
    }

    /// Smallest eigenvalue of the symmetric part.
    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.symmetric_part()).eigenvalues.min()
    }
}

pub fn gram_matrix(space: &ObservableSubspace, rho: &DensityOperator) -> Result<GramMatrix> {
    gram_matrix_tagged(space, rho, "custom".to_string())
}

pub(crate) fn gram_matrix_tagged(
    space: &ObservableSubspace,
    rho: &DensityOperator,
    state_tag: String,
) -> Result<GramMatrix> {
    let basis = space.basis();
    let mut entries = vec![vec![0.0; basis.len()]; basis.len()];
    for (i, oi) in basis.iter().enumerate() {
        let spec = oi.spectral_decompose();
        for (j, oj) in basis.iter().enumerate() {
            entries[i][j] = correlation_from_decomposition(&spec, oj, rho)?;
        }
    }
    Ok(GramMatrix { dim_space: basis.len(), entries, state_tag })
}

/// Test state number `k` of a sampling run: even `k` Hilbert–Schmidt mixed, odd `k` Haar pure,
/// both drawn from sub-stream `k` of `seed`.
pub fn sample_state(dim: usize, seed: Seed, k: u64) -> Result<(DensityOperator, String)> {
    let sub = seed.split(k).split(0);
    if k.is_multiple_of(2) {
        Ok((random_density(dim, sub)?, format!("hilbert-schmidt:{}", sub.value())))
    } else {
        Ok((random_pure_density(dim, sub)?, format!("haar-pure:{}", sub.value())))
    }
}

/// Statistics testing whether `E_rho` is a state-independent inner product on a subspace.
#[derive(Debug, Clone, Serialize)]
pub struct InnerProductReport {
    pub trials: usize,
    /// `max_ij |G_ij - G_ji|` over all sampled states.
    pub max_asymmetry: f64,
    /// `max_ij |G(rho_a)_ij - G(rho_b)_ij|` over all pairs of sampled states.
    pub max_state_dependence: f64,
    /// Smallest eigenvalue of the symmetrised Gram matrix over all sampled states.
    pub min_gram_eigenvalue: f64,
    /// `max |E(sum_i a_i O_i, O_j) - sum_i a_i E(O_i, O_j)|` over random `a`.
    pub bilinearity_residual: f64,
    #[serde(skip)]
    pub grams: Vec<GramMatrix>,
}

pub fn inner_product_report(
    space: &ObservableSubspace,
    trials: usize,
    seed: Seed,
) -> Result<InnerProductReport> {
    if trials < 2 {
        return Err(Error::InvalidParameter(format!(
            "at least 2 trials are needed to test state independence, got {trials}"
        )));
    }
    let basis = space.basis();
    let mut grams = Vec::with_capacity(trials);
    let mut max_asymmetry = 0.0_f64;
    let mut min_gram_eigenvalue = f64::INFINITY;
    let mut bilinearity_residual = 0.0_f64;
    for k in 0..trials as u64 {
        let (rho, tag) = sample_state(space.matrix_dim(), seed, k)?;
        let g = gram_matrix_tagged(space, &rho, tag)?;
        max_asymmetry = max_asymmetry.max(g.max_asymmetry());
        min_gram_eigenvalue = min_gram_eigenvalue.min(g.min_eigenvalue());

        let mut rng = seed.split(k).split(1).rng();
        for _ in 0..BILINEARITY_PROBES {
            let coeffs: Vec<f64> = (0..basis.len()).map(|_| rng.sample(StandardNormal)).collect();
            let combo = HermitianOperator::linear_combination(&coeffs, basis)?;
            let spec = combo.spectral_decompose();
            for (j, oj) in basis.iter().enumerate() {
                let direct = correlation_from_decomposition(&spec, oj, &rho)?;
                let linear: f64 = coeffs.iter().enumerate().map(|(i, a)| a * g.get(i, j)).sum();
                bilinearity_residual = bilinearity_residual.max((direct - linear).abs());
            }
        }
        grams.push(g);
    }
    let mut max_state_dependence = 0.0_f64;
    for a in 0..grams.len() {
        for b in (a + 1)..grams.len() {
            max_state_dependence = max_state_dependence.max(grams[a].max_abs_diff(&grams[b]));
        }
    }
    Ok(InnerProductReport {
        trials,
        max_asymmetry,
        max_state_dependence,
        min_gram_eigenvalue,
        bilinearity_residual,
        grams,
    })
}
