use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context};
use qgeom::correlation::{self_correlation_identity, two_time_correlation};
use qgeom::gamma::{decide_gamma_space, standard_gamma_basis, FailureReason, GammaVerdict, ObservableSubspace};
use qgeom::operator::{random_hermitian, random_with_spectrum, MatrixRepr};
use qgeom::pauli::{parse_observable, parse_vector3};
use qgeom::simulate::{estimate_inner_product, run_sequence, GeometryEstimate, OutcomeTrace, Schedule};
use qgeom::{HermitianOperator, Seed};
use rand::Rng;
use serde::Serialize;

use crate::output::{format_f64, to_json_string};
use crate::state::StateSpec;

pub const TRACE_FILE: &str = "trace.csv";
pub const ESTIMATE_FILE: &str = "estimate.json";

#[derive(Debug, Clone)]
pub struct CorrelateArgs {
    pub o1: String,
    pub o2: String,
    pub state: StateSpec,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelfCheck {
    pub trace_rho_o_squared: f64,
    pub abs_difference: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrelateReport {
    pub o1: String,
    pub o2: String,
    pub state: String,
    pub matrix_dim: usize,
    pub value: f64,
    /// Present when both observables are the same expression.
    pub self_check: Option<SelfCheck>,
}

/// Exact `E_rho(o1, o2)`.
pub fn cmd_correlate(args: &CorrelateArgs) -> anyhow::Result<CorrelateReport> {
    let e1 = parse_observable(&args.o1).with_context(|| format!("--o1 '{}'", args.o1))?;
    let e2 = parse_observable(&args.o2).with_context(|| format!("--o2 '{}'", args.o2))?;
    let (a, b) = (e1.to_operator(), e2.to_operator());
    ensure!(
        a.dim() == b.dim(),
        "observables act on different numbers of qubits ({} vs {})",
        e1.n_qubits(),
        e2.n_qubits()
    );
    let rho = args.state.build(a.dim())?;
    let value = two_time_correlation(&a, &b, &rho)?;
    let self_check = if e1 == e2 {
        let t = self_correlation_identity(&a, &rho)?;
        Some(SelfCheck { trace_rho_o_squared: t, abs_difference: (t - value).abs() })
    } else {
        None
    };
    Ok(CorrelateReport {
        o1: e1.to_string(),
        o2: e2.to_string(),
        state: args.state.to_string(),
        matrix_dim: a.dim(),
        value,
        self_check,
    })
}

#[derive(Debug, Clone)]
pub struct GammaCheckArgs {
    pub basis: Vec<String>,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerdictStatistics {
    pub max_asymmetry: f64,
    pub max_state_dependence: f64,
    pub min_gram_eigenvalue: f64,
    pub bilinearity_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GammaCheckReport {
    pub basis: Vec<String>,
    pub trials: usize,
    pub seed: u64,
    pub is_gamma: bool,
    pub failure_reason: FailureReason,
    pub residuals: f64,
    pub statistics: VerdictStatistics,
    pub witness_basis: Option<Vec<MatrixRepr>>,
}

impl GammaCheckReport {
    fn from_verdict(basis: Vec<String>, trials: usize, seed: u64, v: GammaVerdict) -> Self {
        Self {
            basis,
            trials,
            seed,
            is_gamma: v.is_gamma,
            failure_reason: v.failure_reason,
            residuals: v.residuals,
            statistics: VerdictStatistics {
                max_asymmetry: v.statistics.max_asymmetry,
                max_state_dependence: v.statistics.max_state_dependence,
                min_gram_eigenvalue: v.statistics.min_gram_eigenvalue,
                bilinearity_residual: v.statistics.bilinearity_residual,
            },
            witness_basis: v
                .witness_basis
                .map(|w| w.iter().map(|o| MatrixRepr::from(o.matrix())).collect()),
        }
    }
}

pub fn cmd_gamma_check(args: &GammaCheckArgs) -> anyhow::Result<GammaCheckReport> {
    ensure!(!args.basis.is_empty(), "at least one --basis element is required");
    let mut exprs = Vec::with_capacity(args.basis.len());
    for text in &args.basis {
        exprs.push(parse_observable(text).with_context(|| format!("--basis '{text}'"))?);
    }
    let labels: Vec<String> = exprs.iter().map(ToString::to_string).collect();
    let ops: Vec<HermitianOperator> = exprs.iter().map(|e| e.to_operator()).collect();
    let space = ObservableSubspace::new(ops)?.with_labels(labels.clone())?;
    let verdict = decide_gamma_space(&space, args.trials, Seed(args.seed))?;
    Ok(GammaCheckReport::from_verdict(labels, args.trials, args.seed, verdict))
}

#[derive(Debug, Clone)]
pub struct SimulateArgs {
    pub r: String,
    pub s: String,
    pub steps: usize,
    pub seed: u64,
    pub init: StateSpec,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateFile {
    pub inner_product_hat: f64,
    pub angle_hat: Option<f64>,
    pub standard_error: f64,
    pub n_pairs: usize,
    pub seed: u64,
}

impl From<&GeometryEstimate> for EstimateFile {
    fn from(e: &GeometryEstimate) -> Self {
        Self {
            inner_product_hat: e.inner_product_hat,
            angle_hat: e.angle_hat,
            standard_error: e.standard_error,
            n_pairs: e.n_pairs,
            seed: e.seed.value(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateReport {
    pub r: [f64; 3],
    pub s: [f64; 3],
    pub steps: usize,
    pub seed: u64,
    pub init: String,
    pub exact_inner_product: f64,
    pub exact_angle: f64,
    pub estimate: EstimateFile,
    pub trace_path: Option<String>,
    pub estimate_path: Option<String>,
}

/// Trace CSV: `step,observable_label,outcome`, steps counted from 1.
pub fn trace_csv(trace: &OutcomeTrace) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::with_capacity(trace.outcomes.len() * 24));
    w.write_record(["step", "observable_label", "outcome"])?;
    for (i, x) in trace.outcomes.iter().enumerate() {
        w.write_record([(i + 1).to_string().as_str(), trace.schedule.label_at(i), &format_f64(*x)])?;
    }
    Ok(w.into_inner()?)
}

fn write_file(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))
}

/// Runs the alternating `r . sigma`, `s . sigma` schedule and estimates `r . s` and the angle.
/// With `out`, writes `trace.csv` and `estimate.json` into that directory.
pub fn cmd_simulate(args: &SimulateArgs) -> anyhow::Result<SimulateReport> {
    let r = parse_vector3(&args.r).with_context(|| format!("--r '{}'", args.r))?;
    let s = parse_vector3(&args.s).with_context(|| format!("--s '{}'", args.s))?;
    let schedule = Schedule::alternating(r, s, args.steps)?;
    let rho0 = args.init.build(2)?;
    let mut trace = run_sequence(&rho0, &schedule, Seed(args.seed))?;
    trace.initial_state_tag = args.init.to_string();
    let estimate = estimate_inner_product(&trace)?;

    let dot: f64 = r.iter().zip(&s).map(|(a, b)| a * b).sum();
    let norm = |v: &[f64; 3]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let exact_angle = (dot / (norm(&r) * norm(&s))).clamp(-1.0, 1.0).acos();

    let est_file = EstimateFile::from(&estimate);
    let (mut trace_path, mut estimate_path) = (None, None);
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        let tp = dir.join(TRACE_FILE);
        let ep = dir.join(ESTIMATE_FILE);
        write_file(&tp, &trace_csv(&trace)?)?;
        write_file(&ep, to_json_string(&est_file)?.as_bytes())?;
        trace_path = Some(tp.display().to_string());
        estimate_path = Some(ep.display().to_string());
    }
    Ok(SimulateReport {
        r,
        s,
        steps: args.steps,
        seed: args.seed,
        init: args.init.to_string(),
        exact_inner_product: dot,
        exact_angle,
        estimate: est_file,
        trace_path,
        estimate_path,
    })
}

#[derive(Debug, Clone)]
pub struct SweepArgs {
    pub dim_space: usize,
    pub matrix_dim: usize,
    pub trials: usize,
    pub subspaces: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepEntry {
    pub index: usize,
    pub is_gamma: bool,
    pub failure_reason: Option<FailureReason>,
    pub residuals: Option<f64>,
    /// Set for `dim_space = 1`, where each subspace is spanned by a random involution:
    /// whether its spectrum contains both `+1` and `-1`.
    pub involution_has_both_signs: Option<bool>,
    /// Why no verdict was produced (degenerate random basis).
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PositiveControl {
    pub basis: Vec<String>,
    pub is_gamma: bool,
    pub failure_reason: FailureReason,
    pub residuals: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub dim_space: usize,
    pub matrix_dim: usize,
    pub trials: usize,
    pub subspaces: usize,
    pub seed: u64,
    /// The standard gamma-basis of this dimension, tensored with an identity up to
    /// `matrix_dim`; absent when no such embedding exists.
    pub positive_control: Option<PositiveControl>,
    pub gamma_count: usize,
    pub results: Vec<SweepEntry>,
}

fn positive_control(d: usize, n: usize, trials: usize, seed: Seed) -> anyhow::Result<Option<PositiveControl>> {
    let Ok(std) = standard_gamma_basis(d) else {
        return Ok(None);
    };
    let m = std.matrix_dim();
    if !n.is_multiple_of(m) {
        return Ok(None);
    }
    let pad = HermitianOperator::identity(n / m);
    let ops: Vec<HermitianOperator> = std.basis().iter().map(|o| o.kron(&pad)).collect();
    let pad_label = "I".repeat((n / m).trailing_zeros() as usize);
    let labels: Vec<String> = std
        .labels()
        .unwrap_or_default()
        .iter()
        .map(|l| if (n / m).is_power_of_two() { format!("{l}{pad_label}") } else { format!("{l}(x)1_{}", n / m) })
        .collect();
    let v = decide_gamma_space(&ObservableSubspace::new(ops)?, trials, seed)?;
    Ok(Some(PositiveControl { basis: labels, is_gamma: v.is_gamma, failure_reason: v.failure_reason, residuals: v.residuals }))
}

/// Random `dim_space`-dimensional subspaces of `matrix_dim x matrix_dim` Hermitian matrices,
/// plus a known gamma-space as positive control. For `dim_space = 1` each subspace is spanned
/// by a random involution `U diag(+-1) U^dagger` with independent random signs; otherwise
/// the basis elements are Gaussian random Hermitian matrices.
pub fn cmd_theorem_sweep(args: &SweepArgs) -> anyhow::Result<SweepReport> {
    let (d, n) = (args.dim_space, args.matrix_dim);
    ensure!(n >= 1, "--matrix-dim must be at least 1");
    ensure!(d >= 1, "--dim-space must be at least 1");
    if d > n * n {
        bail!("--dim-space {d} exceeds the real dimension {} of {n}x{n} Hermitian matrices", n * n);
    }
    ensure!(args.trials >= 2, "--trials must be at least 2");
    let seed = Seed(args.seed);
    let control = positive_control(d, n, args.trials, seed.split(u64::MAX))?;

    let mut results = Vec::with_capacity(args.subspaces);
    for k in 0..args.subspaces {
        let sub = seed.split(k as u64);
        let mut rng = sub.split(0).rng();
        let (ops, both_signs) = if d == 1 {
            let signs: Vec<f64> = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
            let both = signs.iter().any(|&x| x > 0.0) && signs.iter().any(|&x| x < 0.0);
            (vec![random_with_spectrum(&signs, &mut rng)], Some(both))
        } else {
            ((0..d).map(|_| random_hermitian(n, &mut rng)).collect(), None)
        };
        let entry = match ObservableSubspace::new(ops) {
            Ok(space) => {
                let v = decide_gamma_space(&space, args.trials, sub.split(1))?;
                SweepEntry {
                    index: k,
                    is_gamma: v.is_gamma,
                    failure_reason: Some(v.failure_reason),
                    residuals: Some(v.residuals),
                    involution_has_both_signs: both_signs,
                    error: None,
                }
            }
            Err(e) => SweepEntry {
                index: k,
                is_gamma: false,
                failure_reason: None,
                residuals: None,
                involution_has_both_signs: both_signs,
                error: Some(e.to_string()),
            },
        };
        results.push(entry);
    }
    Ok(SweepReport {
        dim_space: d,
        matrix_dim: n,
        trials: args.trials,
        subspaces: args.subspaces,
        seed: args.seed,
        positive_control: control,
        gamma_count: results.iter().filter(|e| e.is_gamma).count(),
        results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn correlate_examples() {
        let run = |o1: &str, o2: &str, state: &str| {
            cmd_correlate(&CorrelateArgs { o1: o1.into(), o2: o2.into(), state: state.parse().unwrap() }).unwrap()
        };
        let r = run("X", "X", "maximally-mixed");
        assert!((r.value - 1.0).abs() < 1e-12);
        let sc = r.self_check.unwrap();
        assert!(sc.abs_difference < 1e-12);
        assert!(run("X", "Z", "random:7").value.abs() < 1e-12);
        assert!((run("I", "Z", "pure:0").value - 1.0).abs() < 1e-12);
        assert!(run("X", "Z", "pure:0").self_check.is_none());

        let bad = CorrelateArgs { o1: "X".into(), o2: "XX".into(), state: StateSpec::MaximallyMixed };
        assert!(cmd_correlate(&bad).is_err());
        let bad = CorrelateArgs { o1: "X +".into(), o2: "X".into(), state: StateSpec::MaximallyMixed };
        assert!(format!("{:#}", cmd_correlate(&bad).unwrap_err()).contains("position 4"));
    }

    #[test]
    fn gamma_check_examples() {
        let run = |b: &[&str]| {
            cmd_gamma_check(&GammaCheckArgs { basis: b.iter().map(|s| s.to_string()).collect(), trials: 8, seed: 1 })
                .unwrap()
        };
        assert!(run(&["X", "Y", "Z"]).is_gamma);
        let r = run(&["I", "Z"]);
        assert!(!r.is_gamma);
        assert_eq!(r.failure_reason, FailureReason::StateDependent);
        assert!(r.witness_basis.is_none());
        let r = run(&["XX", "XY", "XZ", "ZI", "YI"]);
        assert!(r.is_gamma);
        assert_eq!(r.witness_basis.unwrap().len(), 5);
    }

    #[test]
    fn sweep_examples() {
        let r = cmd_theorem_sweep(&SweepArgs { dim_space: 3, matrix_dim: 2, trials: 4, subspaces: 50, seed: 1 }).unwrap();
        assert!(r.positive_control.as_ref().unwrap().is_gamma);
        assert_eq!(r.gamma_count, 0);

        let r = cmd_theorem_sweep(&SweepArgs { dim_space: 1, matrix_dim: 2, trials: 4, subspaces: 10, seed: 2 }).unwrap();
        for e in &r.results {
            assert_eq!(Some(e.is_gamma), e.involution_has_both_signs);
        }

        let r = cmd_theorem_sweep(&SweepArgs { dim_space: 4, matrix_dim: 4, trials: 4, subspaces: 2, seed: 3 }).unwrap();
        let pc = r.positive_control.unwrap();
        assert!(pc.is_gamma);
        assert_eq!(pc.basis, vec!["XX", "XY", "XZ", "ZI"]);

        let r = cmd_theorem_sweep(&SweepArgs { dim_space: 2, matrix_dim: 8, trials: 3, subspaces: 1, seed: 3 }).unwrap();
        assert_eq!(r.positive_control.unwrap().basis, vec!["XII", "YII"]);

        assert!(cmd_theorem_sweep(&SweepArgs { dim_space: 5, matrix_dim: 2, trials: 4, subspaces: 1, seed: 0 }).is_err());
    }
}
