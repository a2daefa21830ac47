//! Sequential projective measurements on a single system, and the geometry estimators.
//!
//! A [`Schedule`] cycles through a list of observables; [`run_sequence`] measures them one
//! after the other, sampling each outcome with the Born rule over the clustered spectrum and
//! replacing the state by its Lüders post-state `P rho P / Tr[P rho]`. The state is never
//! re-prepared, so every consecutive pair `(x_i, x_{i+1})` is one run of a two-time
//! experiment started from whatever state the previous measurement left behind.
//!
//! For Bloch observables `r . sigma` and `s . sigma` the two-time correlation is `r . s`
//! for every state, so `sum_i x_i x_{i+1} / (N - 1)` estimates the dot product and
//! dividing by `|x_1 x_2| = |r| |s|` gives the cosine of the angle between them.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::{ensure_same_dim, trace_product, DensityOperator, HermitianOperator, SpectralDecomposition, TAU_NUM};
use crate::rng::Seed;

/// Observables measured cyclically: step `i` (0-based) uses `observables[i % len]`.
#[derive(Debug, Clone)]
pub struct Schedule {
    observables: Vec<HermitianOperator>,
    labels: Vec<String>,
    decompositions: Vec<SpectralDecomposition>,
    steps: usize,
}

impl Schedule {
    pub fn new(observables: Vec<HermitianOperator>, labels: Vec<String>, steps: usize) -> Result<Self> {
        let first = observables
            .first()
            .ok_or_else(|| Error::InvalidParameter("a schedule needs at least one observable".into()))?;
        if labels.len() != observables.len() {
            return Err(Error::InvalidParameter(format!(
                "{} labels for {} observables",
                labels.len(),
                observables.len()
            )));
        }
        if steps < 2 {
            return Err(Error::InvalidParameter(format!("a schedule needs at least 2 steps, got {steps}")));
        }
        let dim = first.dim();
        let mut decompositions = Vec::with_capacity(observables.len());
        for (op, label) in observables.iter().zip(&labels) {
            ensure_same_dim(dim, op.dim())?;
            let spec = op.spectral_decompose();
            if spec.len() == 1 && spec.eigenvalues()[0].abs() <= TAU_NUM {
                return Err(Error::Domain(format!("observable '{label}' is zero")));
            }
            decompositions.push(spec);
        }
        Ok(Self { observables, labels, decompositions, steps })
    }

    /// `r . sigma` at odd times and `s . sigma` at even times, labelled `r` and `s`.
    pub fn alternating(r: [f64; 3], s: [f64; 3], steps: usize) -> Result<Self> {
        Self::new(
            vec![bloch_nonzero(r, "r")?, bloch_nonzero(s, "s")?],
            vec!["r".into(), "s".into()],
            steps,
        )
    }

    /// `r . sigma` at every step.
    pub fn repeated(r: [f64; 3], steps: usize) -> Result<Self> {
        Self::new(vec![bloch_nonzero(r, "r")?], vec!["r".into()], steps)
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn len(&self) -> usize {
        self.observables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observables.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.observables[0].dim()
    }

    pub fn observables(&self) -> &[HermitianOperator] {
        &self.observables
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Index into `observables` of 0-based step `i`.
    pub fn index_at(&self, i: usize) -> usize {
        i % self.observables.len()
    }

    pub fn label_at(&self, i: usize) -> &str {
        &self.labels[self.index_at(i)]
    }

    pub fn decomposition_at(&self, i: usize) -> &SpectralDecomposition {
        &self.decompositions[self.index_at(i)]
    }
}

fn bloch_nonzero(v: [f64; 3], name: &str) -> Result<HermitianOperator> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain(format!("vector {name} has non-finite components")));
    }
    if v.iter().all(|x| *x == 0.0) {
        return Err(Error::Domain(format!("vector {name} is zero")));
    }
    Ok(HermitianOperator::bloch(v))
}

/// Samples one outcome of `spec` on `rho` and returns it with the Lüders post-state.
pub fn measure_decomposed<R: Rng + ?Sized>(
    rho: &DensityOperator,
    spec: &SpectralDecomposition,
    rng: &mut R,
) -> Result<(f64, DensityOperator)> {
    ensure_same_dim(spec.dim(), rho.dim())?;
    let mut probs: Vec<f64> = spec
        .projectors()
        .iter()
        .map(|p| trace_product(p, rho.matrix()).re)
        .collect();
    for p in &mut probs {
        if *p < -TAU_NUM {
            return Err(Error::Numerical(format!("negative branch probability {p:.3e}")));
        }
        *p = p.max(0.0);
    }
    let total: f64 = probs.iter().sum();
    if total < TAU_NUM {
        return Err(Error::Numerical(format!("branch probabilities sum to {total:.3e}")));
    }
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut branch = probs.len() - 1;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc && *p > 0.0 {
            branch = i;
            break;
        }
    }
    // guard against landing on a zero-probability tail through rounding
    while probs[branch] == 0.0 {
        branch -= 1;
    }
    let proj = &spec.projectors()[branch];
    let post = (proj * rho.matrix() * proj).unscale(probs[branch]);
    let post = (&post + post.adjoint()).scale(0.5);
    Ok((spec.eigenvalues()[branch], DensityOperator::from_trusted(post)))
}

/// One projective measurement of `o` on `rho`.
pub fn measure_once<R: Rng + ?Sized>(
    rho: &DensityOperator,
    o: &HermitianOperator,
    rng: &mut R,
) -> Result<(f64, DensityOperator)> {
    measure_decomposed(rho, &o.spectral_decompose(), rng)
}

/// The outcomes of one run of a schedule.
#[derive(Debug, Clone)]
pub struct OutcomeTrace {
    pub outcomes: Vec<f64>,
    pub schedule: Schedule,
    pub seed: Seed,
    pub initial_state_tag: String,
    pub final_state: DensityOperator,
}

/// Measures `schedule.steps()` times starting from `rho0`, threading the post-state.
pub fn run_sequence(rho0: &DensityOperator, schedule: &Schedule, seed: Seed) -> Result<OutcomeTrace> {
    ensure_same_dim(schedule.dim(), rho0.dim())?;
    let mut rng = seed.rng();
    let mut state = rho0.clone();
    let mut outcomes = Vec::with_capacity(schedule.steps());
    for i in 0..schedule.steps() {
        let (x, post) = measure_decomposed(&state, schedule.decomposition_at(i), &mut rng)?;
        outcomes.push(x);
        state = post;
    }
    Ok(OutcomeTrace {
        outcomes,
        schedule: schedule.clone(),
        seed,
        initial_state_tag: "custom".into(),
        final_state: state,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeometryEstimate {
    pub inner_product_hat: f64,
    /// Radians in `[0, pi]`; `None` when an outcome magnitude is zero.
    pub angle_hat: Option<f64>,
    /// Of `inner_product_hat`: sample standard deviation of the pair products over `sqrt(n_pairs)`.
    pub standard_error: f64,
    pub n_pairs: usize,
    pub seed: Seed,
}

/// `sum x_i x_{i+1} / (N - 1)` for a schedule of one or two observables.
pub fn estimate_inner_product(trace: &OutcomeTrace) -> Result<GeometryEstimate> {
    if !(1..=2).contains(&trace.schedule.len()) {
        return Err(Error::InvalidParameter(format!(
            "pair estimators need a schedule of 1 or 2 observables, got {}",
            trace.schedule.len()
        )));
    }
    let x = &trace.outcomes;
    if x.len() < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 outcomes, got {}", x.len())));
    }
    let n_pairs = x.len() - 1;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for w in x.windows(2) {
        let p = w[0] * w[1];
        sum += p;
        sum_sq += p * p;
    }
    let mean = sum / n_pairs as f64;
    let standard_error = if n_pairs > 1 {
        let var = ((sum_sq - n_pairs as f64 * mean * mean) / (n_pairs as f64 - 1.0)).max(0.0);
        (var / n_pairs as f64).sqrt()
    } else {
        0.0
    };
    let scale = (x[0] * x[1]).abs();
    let angle_hat = (scale > 0.0).then(|| (mean / scale).clamp(-1.0, 1.0).acos());
    Ok(GeometryEstimate { inner_product_hat: mean, angle_hat, standard_error, n_pairs, seed: trace.seed })
}

/// Like [`estimate_inner_product`], but the angle is required.
pub fn estimate_angle(trace: &OutcomeTrace) -> Result<GeometryEstimate> {
    let est = estimate_inner_product(trace)?;
    if est.angle_hat.is_none() {
        return Err(Error::Domain("angle undefined: an outcome magnitude is zero".into()));
    }
    Ok(est)
}

/// Estimated Gram matrix of a list of 3-vectors.
#[derive(Debug, Clone)]
pub struct GramEstimate {
    pub entries: Vec<Vec<f64>>,
    pub standard_errors: Vec<Vec<f64>>,
    pub final_state: DensityOperator,
}

/// Runs one schedule per unordered pair `i <= j` (alternating for `i < j`, repeated for
/// `i == j`), in row-major order, each starting from the final state of the previous run.
/// Run `k` uses `seed.split(k)`.
pub fn reconstruct_gram(
    vectors: &[[f64; 3]],
    rho0: &DensityOperator,
    steps_per_pair: usize,
    seed: Seed,
) -> Result<GramEstimate> {
    let m = vectors.len();
    let mut entries = vec![vec![0.0; m]; m];
    let mut standard_errors = vec![vec![0.0; m]; m];
    let mut state = rho0.clone();
    let mut k = 0u64;
    for i in 0..m {
        for j in i..m {
            let schedule = if i == j {
                Schedule::repeated(vectors[i], steps_per_pair)?
            } else {
                Schedule::alternating(vectors[i], vectors[j], steps_per_pair)?
            };
            let trace = run_sequence(&state, &schedule, seed.split(k))?;
            let est = estimate_inner_product(&trace)?;
            entries[i][j] = est.inner_product_hat;
            entries[j][i] = est.inner_product_hat;
            standard_errors[i][j] = est.standard_error;
            standard_errors[j][i] = est.standard_error;
            state = trace.final_state;
            k += 1;
        }
    }
    Ok(GramEstimate { entries, standard_errors, final_state: state })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::two_time_correlation;
    use crate::operator::{random_density, C64};
    use nalgebra::DMatrix;

    fn zero() -> DensityOperator {
        DensityOperator::basis_state(2, 0).unwrap()
    }

    #[test]
    fn eigenstate_measurement_is_deterministic() {
        let mut rng = Seed(1).rng();
        for _ in 0..20 {
            let (x, post) = measure_once(&zero(), &HermitianOperator::pauli_z(), &mut rng).unwrap();
            assert_eq!(x, 1.0);
            assert!((post.matrix() - zero().matrix()).camax() < 1e-15);
        }
    }

    #[test]
    fn x_on_zero_is_unbiased() {
        let mut rng = Seed(2).rng();
        let x = HermitianOperator::pauli_x();
        let id = DMatrix::<C64>::identity(2, 2);
        let mut plus = 0;
        for _ in 0..4000 {
            let (v, post) = measure_once(&zero(), &x, &mut rng).unwrap();
            let expected = (&id + x.matrix().scale(v)).scale(0.5);
            assert!((post.matrix() - expected).camax() < 1e-12);
            if v > 0.0 {
                plus += 1;
            }
        }
        assert!((plus as f64 / 4000.0 - 0.5).abs() < 0.04);
    }

    #[test]
    fn scaled_observable_outcomes() {
        let mut rng = Seed(3).rng();
        let mixed = DensityOperator::maximally_mixed(2).unwrap();
        let z2 = HermitianOperator::pauli_z().scale(2.0);
        let mut plus = 0;
        for _ in 0..4000 {
            let (v, _) = measure_once(&mixed, &z2, &mut rng).unwrap();
            assert!((v.abs() - 2.0).abs() < 1e-12);
            if v > 0.0 {
                plus += 1;
            }
        }
        assert!((plus as f64 / 4000.0 - 0.5).abs() < 0.04);
    }

    #[test]
    fn repeated_measurement_repeats() {
        let sched = Schedule::repeated([1.0, 0.0, 0.0], 100).unwrap();
        let rho = random_density(2, Seed(4)).unwrap();
        let trace = run_sequence(&rho, &sched, Seed(5)).unwrap();
        assert!(trace.outcomes[1..].iter().all(|&x| x == trace.outcomes[1]));
        assert_eq!(trace.outcomes[0], trace.outcomes[1]);
    }

    #[test]
    fn z_after_x_is_fair() {
        let sched = Schedule::alternating([1.0, 0.0, 0.0], [0.0, 0.0, 1.0], 10_000).unwrap();
        let trace = run_sequence(&zero(), &sched, Seed(6)).unwrap();
        let z: Vec<f64> = trace.outcomes.iter().skip(1).step_by(2).copied().collect();
        let freq = z.iter().filter(|&&x| x > 0.0).count() as f64 / z.len() as f64;
        assert!((freq - 0.5).abs() <= 0.02, "{freq}");
    }

    #[test]
    fn same_seed_same_trace() {
        let sched = Schedule::alternating([0.3, 0.4, 0.5], [1.0, -1.0, 0.0], 500).unwrap();
        let a = run_sequence(&zero(), &sched, Seed(7)).unwrap();
        let b = run_sequence(&zero(), &sched, Seed(7)).unwrap();
        assert_eq!(a.outcomes, b.outcomes);
        let c = run_sequence(&zero(), &sched, Seed(8)).unwrap();
        assert_ne!(a.outcomes, c.outcomes);
    }

    #[test]
    fn parallel_vectors_estimate_exactly() {
        for n in [2, 3, 57] {
            let sched = Schedule::alternating([1.0, 0.0, 0.0], [1.0, 0.0, 0.0], n).unwrap();
            let rho = random_density(2, Seed(n as u64)).unwrap();
            let est = estimate_angle(&run_sequence(&rho, &sched, Seed(9)).unwrap()).unwrap();
            assert_eq!(est.inner_product_hat, 1.0);
            assert_eq!(est.angle_hat, Some(0.0));
            assert_eq!(est.n_pairs, n - 1);
        }
    }

    #[test]
    fn outcome_magnitudes_match_vector_norms() {
        let r = [0.3, -1.2, 0.4];
        let s = [2.0, 0.0, -0.5];
        let sched = Schedule::alternating(r, s, 1000).unwrap();
        let trace = run_sequence(&zero(), &sched, Seed(10)).unwrap();
        let nr = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        let ns = s.iter().map(|x| x * x).sum::<f64>().sqrt();
        for (i, x) in trace.outcomes.iter().enumerate() {
            let norm = if i % 2 == 0 { nr } else { ns };
            assert!((x.abs() - norm).abs() <= 1e-10);
        }
    }

    #[test]
    fn zero_vectors_are_rejected() {
        assert!(matches!(Schedule::alternating([0.0; 3], [1.0, 0.0, 0.0], 10), Err(Error::Domain(_))));
        assert!(Schedule::repeated([0.0; 3], 10).is_err());
        assert!(Schedule::alternating([1.0, 0.0, 0.0], [0.0, 1.0, 0.0], 1).is_err());
        let zero_op = Schedule::new(vec![HermitianOperator::zero(2)], vec!["0".into()], 5);
        assert!(zero_op.is_err());
    }

    #[test]
    fn estimators_need_pair_schedules() {
        let ops = vec![HermitianOperator::pauli_x(), HermitianOperator::pauli_y(), HermitianOperator::pauli_z()];
        let sched = Schedule::new(ops, vec!["x".into(), "y".into(), "z".into()], 10).unwrap();
        let trace = run_sequence(&zero(), &sched, Seed(1)).unwrap();
        assert!(estimate_inner_product(&trace).is_err());
    }

    #[test]
    fn angle_requires_nonzero_outcomes() {
        // diag(1, 0) measured on |1><1| always yields 0.
        let p = HermitianOperator::diagonal(&[1.0, 0.0]).unwrap();
        let sched = Schedule::new(vec![p], vec!["p".into()], 5).unwrap();
        let one = DensityOperator::basis_state(2, 1).unwrap();
        let trace = run_sequence(&one, &sched, Seed(1)).unwrap();
        assert!(trace.outcomes.iter().all(|&x| x == 0.0));
        assert_eq!(estimate_inner_product(&trace).unwrap().angle_hat, None);
        assert!(matches!(estimate_angle(&trace), Err(Error::Domain(_))));
    }

    #[test]
    fn estimator_mean_is_consistent_with_exact_correlation() {
        // 50 seeds at N = 10^4: the seed-average lies within 4 standard errors of E(r, s).
        let r = [0.6, 0.0, 0.8];
        let s = [0.0, 1.0, 0.0];
        let cases = [([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]), (r, s), ([0.0, 0.0, 1.0], [0.6, 0.8, 0.0])];
        for (r, s) in cases {
            let rho0 = random_density(2, Seed(11)).unwrap();
            let exact = two_time_correlation(&HermitianOperator::bloch(r), &HermitianOperator::bloch(s), &rho0).unwrap();
            let sched = Schedule::alternating(r, s, 10_000).unwrap();
            let ests: Vec<f64> = (0..50)
                .map(|k| estimate_inner_product(&run_sequence(&rho0, &sched, Seed(500 + k)).unwrap()).unwrap().inner_product_hat)
                .collect();
            let mean = ests.iter().sum::<f64>() / 50.0;
            let var = ests.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / 49.0;
            let se = (var / 50.0).sqrt();
            assert!((mean - exact).abs() <= 4.0 * se, "mean {mean} exact {exact} se {se}");
        }
    }

    #[test]
    fn swapping_roles_keeps_the_estimate() {
        let r = [1.0, 0.0, 0.0];
        let s = [0.5, 0.0, 3f64.sqrt() / 2.0];
        let a = estimate_inner_product(&run_sequence(&zero(), &Schedule::alternating(r, s, 100_000).unwrap(), Seed(1)).unwrap()).unwrap();
        let b = estimate_inner_product(&run_sequence(&zero(), &Schedule::alternating(s, r, 100_000).unwrap(), Seed(2)).unwrap()).unwrap();
        let combined = (a.standard_error.powi(2) + b.standard_error.powi(2)).sqrt();
        assert!((a.inner_product_hat - b.inner_product_hat).abs() <= 4.0 * combined);
    }

    #[test]
    fn gram_reconstruction_small_cases() {
        let mixed = DensityOperator::maximally_mixed(2).unwrap();
        let g = reconstruct_gram(&[[1.0, 0.0, 0.0], [1.0, 0.0, 0.0]], &mixed, 1000, Seed(1)).unwrap();
        assert_eq!(g.entries[0][1], 1.0);
        assert_eq!(g.entries[1][0], 1.0);

        let g = reconstruct_gram(&[[2.0, 0.0, 0.0], [0.0, 1.0, 0.0]], &mixed, 100_000, Seed(2)).unwrap();
        assert_eq!(g.entries[0][0], 4.0);
        assert_eq!(g.entries[1][1], 1.0);
        assert!(g.entries[0][1].abs() <= 5.0 * 2.0 / (100_000f64).sqrt());
    }
}
