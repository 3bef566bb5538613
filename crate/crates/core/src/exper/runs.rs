//! Seeded Monte-Carlo sweeps over θ, circuit depth and subsystem size.
//!
//! Every realization draws a fresh circuit from its own seed,
//! `derive_seed(master, [θ index, depth, realization])`, and realizations
//! are reduced in ascending index order, so the output does not depend on
//! the number of threads.

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind};
use super::fit::{fit_exponential, fit_line, FitResult, FitStatus, LineFit};
use crate::clifford::{sample_circuit_with, PhaseConvention};
use crate::ensemble::{design_distance, projected_ensemble, NormKind};
use crate::error::{Error, Result};
use crate::magic::product_phase_magic;
use crate::parallel::{map_indexed, mean_and_std_err, sample_variance, Execution};
use crate::qstate::StateVector;
use crate::rng::derive_seed;
use crate::theory::{coefficients, error_estimate, no_measurement_distance, theorem1_prediction, Theorem1Coefficients};
use crate::NumericPolicy;

/// One CSV row: a (θ, depth) cell averaged over `reps` realizations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub experiment_id: String,
    pub seed: u64,
    pub n_a: usize,
    pub n_b: usize,
    pub theta: f64,
    pub magic: f64,
    pub depth: usize,
    pub t: usize,
    pub norm_kind: NormKind,
    pub mean: f64,
    pub std_err: f64,
    pub reps: usize,
}

fn phase(cfg: &ExperimentConfig) -> PhaseConvention {
    if cfg.literal_paper_s {
        PhaseConvention::LiteralT
    } else {
        PhaseConvention::Clifford
    }
}

fn experiment_id(kind: ExperimentKind, n_a: usize, n_b: usize, t: usize, norm: NormKind, theta_index: usize) -> String {
    format!("{kind}-a{n_a}b{n_b}-t{t}-{norm}-th{theta_index}")
}

/// Distance of one sampled realization.
fn realization(
    psi: &StateVector,
    n_a: usize,
    n_b: usize,
    depth: usize,
    seed: u64,
    cfg: &ExperimentConfig,
) -> Result<f64> {
    let circuit = sample_circuit_with(seed, n_a + n_b, depth, phase(cfg))?;
    let mut state = psi.clone();
    circuit.apply_in_place(&mut state)?;
    let ens = projected_ensemble(&state, n_a, n_b, cfg.prob_floor)?;
    design_distance(&ens, cfg.t, cfg.norm_kind)
}

/// Raw per-realization distances for every (θ, depth) cell, θ-major.
fn sweep(cfg: &ExperimentConfig, n_a: usize, thetas: &[f64], exec: Execution) -> Result<Vec<Vec<f64>>> {
    let n_b = cfg.n_b;
    let states = thetas
        .iter()
        .map(|&th| StateVector::product_phase_state(n_a + n_b, th))
        .collect::<Result<Vec<_>>>()?;
    let (nd, reps) = (cfg.depths.len(), cfg.reps);
    let per_theta = nd * reps;
    let flat = map_indexed(exec, thetas.len() * per_theta, |k| {
        let (ti, rest) = (k / per_theta, k % per_theta);
        let (di, r) = (rest / reps, rest % reps);
        let depth = cfg.depths[di];
        let seed = derive_seed(cfg.master_seed, &[ti as u64, depth as u64, r as u64]);
        realization(&states[ti], n_a, n_b, depth, seed, cfg)
    });
    let flat = flat.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(flat.chunks(reps).map(<[f64]>::to_vec).collect())
}

fn records_for(cfg: &ExperimentConfig, kind: ExperimentKind, n_a: usize, thetas: &[f64], cells: &[Vec<f64>]) -> Vec<ExperimentRecord> {
    let n = n_a + cfg.n_b;
    let mut out = Vec::with_capacity(cells.len());
    for (ti, &theta) in thetas.iter().enumerate() {
        for (di, &depth) in cfg.depths.iter().enumerate() {
            let (mean, std_err) = mean_and_std_err(&cells[ti * cfg.depths.len() + di]);
            out.push(ExperimentRecord {
                experiment_id: experiment_id(kind, n_a, cfg.n_b, cfg.t, cfg.norm_kind, ti),
                seed: cfg.master_seed,
                n_a,
                n_b: cfg.n_b,
                theta,
                magic: product_phase_magic(n, theta),
                depth,
                t: cfg.t,
                norm_kind: cfg.norm_kind,
                mean,
                std_err,
                reps: cfg.reps,
            });
        }
    }
    out
}

/// Mean design distance versus depth for each θ.
pub fn run_decay(cfg: &ExperimentConfig, exec: Execution, policy: &NumericPolicy) -> Result<Vec<ExperimentRecord>> {
    cfg.validate(policy)?;
    let thetas = cfg.thetas()?;
    let cells = sweep(cfg, cfg.n_a, &thetas, exec)?;
    Ok(records_for(cfg, ExperimentKind::Decay, cfg.n_a, &thetas, &cells))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveFit {
    pub theta: f64,
    pub magic: f64,
    pub fit: FitResult,
    /// Present when the fit could not be attempted.
    pub diagnostic: Option<String>,
}

/// Fit each θ's decay curve in `records` (as produced by [`run_decay`]).
pub fn fit_curves(records: &[ExperimentRecord]) -> Vec<CurveFit> {
    let mut out: Vec<CurveFit> = Vec::new();
    let mut start = 0;
    while start < records.len() {
        let id = &records[start].experiment_id;
        let end = start + records[start..].iter().take_while(|r| &r.experiment_id == id).count();
        let group = &records[start..end];
        let x: Vec<f64> = group.iter().map(|r| r.depth as f64).collect();
        let y: Vec<f64> = group.iter().map(|r| r.mean).collect();
        let se: Vec<f64> = group.iter().map(|r| r.std_err).collect();
        let (fit, diagnostic) = match fit_exponential(&x, &y, Some(&se)) {
            Ok(f) => (f, None),
            Err(e) => (
                FitResult {
                    offset_c: f64::NAN,
                    amplitude_a: f64::NAN,
                    rate_lambda: None,
                    residual_rms: f64::NAN,
                    offset_std_err: f64::NAN,
                    status: FitStatus::Failed,
                },
                Some(e.to_string()),
            ),
        };
        out.push(CurveFit { theta: group[0].theta, magic: group[0].magic, fit, diagnostic });
        start = end;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearPoint {
    pub theta: f64,
    pub magic: f64,
    /// Infinite-depth extrapolation of the decay curve.
    pub extrapolated: f64,
    pub std_err: f64,
    /// α − βM and the ε estimate; only defined for t = 2 under `hs2`.
    pub prediction: Option<f64>,
    pub error_estimate: Option<f64>,
    pub fit: FitResult,
    pub diagnostic: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearOutput {
    pub records: Vec<ExperimentRecord>,
    pub points: Vec<LinearPoint>,
    /// Line through the successfully fitted points; `None` with fewer than two.
    pub line: Option<LineFit>,
    pub coefficients: Theorem1Coefficients,
}

/// Extrapolated distance versus magic, with the closed-form prediction and
/// ε estimate alongside each point.
pub fn run_linear(cfg: &ExperimentConfig, exec: Execution, policy: &NumericPolicy) -> Result<LinearOutput> {
    cfg.validate(policy)?;
    let thetas = cfg.thetas()?;
    let cells = sweep(cfg, cfg.n_a, &thetas, exec)?;
    let records = records_for(cfg, ExperimentKind::Linear, cfg.n_a, &thetas, &cells);
    let (d_a, d_b) = (1usize << cfg.n_a, 1usize << cfg.n_b);
    let closed_form = cfg.t == 2 && cfg.norm_kind == NormKind::HsSquared;
    let mut points = Vec::new();
    for curve in fit_curves(&records) {
        let m = curve.magic.clamp(0.0, 1.0 - 1e-15);
        points.push(LinearPoint {
            theta: curve.theta,
            magic: curve.magic,
            extrapolated: curve.fit.offset_c,
            std_err: curve.fit.offset_std_err,
            prediction: closed_form.then(|| theorem1_prediction(d_a, d_b, m)).transpose()?,
            error_estimate: closed_form.then(|| error_estimate(d_a, d_b, m)).transpose()?,
            fit: curve.fit,
            diagnostic: curve.diagnostic,
        });
    }
    let ok: Vec<&LinearPoint> = points.iter().filter(|p| p.extrapolated.is_finite()).collect();
    let line = fit_line(
        &ok.iter().map(|p| p.magic).collect::<Vec<_>>(),
        &ok.iter().map(|p| p.extrapolated).collect::<Vec<_>>(),
    )
    .ok();
    Ok(LinearOutput { records, points, line, coefficients: coefficients(d_a, d_b)? })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariancePoint {
    pub n_a: usize,
    pub mean: f64,
    pub variance: f64,
    pub reps: usize,
    pub warning: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceOutput {
    pub records: Vec<ExperimentRecord>,
    pub points: Vec<VariancePoint>,
}

/// Sample variance of the distance at a fixed depth, for each subsystem
/// size in the sweep. Uses the first θ (or magic target) and first depth.
pub fn run_variance(cfg: &ExperimentConfig, exec: Execution, policy: &NumericPolicy) -> Result<VarianceOutput> {
    cfg.validate(policy)?;
    let single = ExperimentConfig { depths: cfg.depths[..1].to_vec(), ..cfg.clone() };
    let mut records = Vec::new();
    let mut points = Vec::new();
    for n_a in cfg.variance_sweep() {
        let theta = single.thetas_for(n_a + cfg.n_b)?[0];
        let cells = sweep(&single, n_a, &[theta], exec)?;
        let values = &cells[0];
        let warning = (values.len() < 2).then(|| "a single realization has no spread; variance reported as 0".to_string());
        records.extend(records_for(&single, ExperimentKind::Variance, n_a, &[theta], &cells));
        points.push(VariancePoint {
            n_a,
            mean: mean_and_std_err(values).0,
            variance: sample_variance(values),
            reps: values.len(),
            warning,
        });
    }
    Ok(VarianceOutput { records, points })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryEntry {
    pub theta: f64,
    pub magic: f64,
    pub prediction: f64,
    pub epsilon: f64,
    /// Unmeasured distance at the full dimension, `(exact, leading)`.
    pub no_measurement: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub d_a: usize,
    pub d_b: usize,
    pub alpha: f64,
    pub beta: f64,
    pub x: f64,
    pub y: f64,
    pub entries: Vec<TheoryEntry>,
}

pub fn run_theory(cfg: &ExperimentConfig, policy: &NumericPolicy) -> Result<TheoryReport> {
    cfg.validate(policy)?;
    let (d_a, d_b) = (1usize << cfg.n_a, 1usize << cfg.n_b);
    let c = coefficients(d_a, d_b).map_err(|e| Error::Config(e.to_string()))?;
    let n = cfg.num_qubits();
    let entries = cfg
        .thetas()?
        .into_iter()
        .map(|theta| {
            let magic = product_phase_magic(n, theta).clamp(0.0, 1.0 - 1e-15);
            Ok(TheoryEntry {
                theta,
                magic,
                prediction: theorem1_prediction(d_a, d_b, magic)?,
                epsilon: error_estimate(d_a, d_b, magic)?,
                no_measurement: no_measurement_distance(d_a * d_b, magic)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TheoryReport { d_a, d_b, alpha: c.alpha, beta: c.beta, x: c.x, y: c.y, entries })
}
