//! Oracle and invariant checks bundled into one report.

use std::f64::consts::{FRAC_PI_4, PI};

use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::clifford::{
    apply_circuit, enumerate_clifford_group, group_average_moment, sample_circuit_with, PhaseConvention,
};
use crate::ensemble::{design_distance, design_distance_dense, haar_moment, projected_ensemble, sym_projector, NormKind};
use crate::error::Result;
use crate::linalg;
use crate::magic::{product_phase_magic, stabilizer_linear_entropy_with};
use crate::parallel::Execution;
use crate::qstate::StateVector;
use crate::theory::{coefficients, fourth_moment_model, no_measurement_distance, q_operator, term_breakdown, theorem1_prediction};
use crate::NumericPolicy;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckOutcome {
    Pass,
    Fail,
    /// Failed, as it must under the active settings.
    ExpectedFail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub outcome: CheckOutcome,
    pub max_deviation: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    /// No check failed unexpectedly.
    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.outcome != CheckOutcome::Fail)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let tag = match c.outcome {
                CheckOutcome::Pass => "PASS",
                CheckOutcome::Fail => "FAIL",
                CheckOutcome::ExpectedFail => "XFAIL",
            };
            s += &format!("{tag:<5} {:<40} max deviation {:.3e} (tol {:.0e})\n", c.name, c.max_deviation, c.tolerance);
        }
        s
    }
}

struct Collector {
    checks: Vec<CheckResult>,
}

impl Collector {
    fn push(&mut self, name: &str, max_deviation: f64, tolerance: f64, expect_fail: bool) {
        let passed = max_deviation <= tolerance;
        let outcome = match (passed, expect_fail) {
            (true, _) => CheckOutcome::Pass,
            (false, true) => CheckOutcome::ExpectedFail,
            (false, false) => CheckOutcome::Fail,
        };
        self.checks.push(CheckResult { name: name.into(), outcome, max_deviation, tolerance });
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Run every oracle check. With `literal_paper_s` the circuit phase gate is
/// diag(1, e^{iπ/4}) and the magic-invariance check is expected to fail.
pub fn run_verify(literal_paper_s: bool, exec: Execution, policy: &NumericPolicy) -> Result<VerifyReport> {
    let mut c = Collector { checks: Vec::new() };
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);

    let g1 = enumerate_clifford_group(1)?;
    let g2 = enumerate_clifford_group(2)?;
    let size_dev = (g1.len() as f64 - 24.0).abs().max((g2.len() as f64 - 11520.0).abs());
    c.push("clifford group sizes 24 / 11520", size_dev, 0.0, false);

    let mut dev = 0.0f64;
    for (g, n) in [(&g1, 1), (&g2, 2)] {
        let psi = StateVector::haar_random(n, &mut rng)?;
        for t in 1..=3 {
            let m = group_average_moment(g, &psi, t, exec, policy)?;
            let h = haar_moment(1 << n, t, policy)?;
            dev = dev.max(linalg::max_abs_diff(m.matrix(), h.matrix()));
        }
    }
    c.push("clifford 1-, 2-, 3-design", dev, 1e-10, false);

    let mut dev = 0.0f64;
    let mut states = vec![StateVector::product_phase_state(1, FRAC_PI_4)?];
    for _ in 0..10 {
        states.push(StateVector::haar_random(1, &mut rng)?);
    }
    for psi in &states {
        let exact = group_average_moment(&g1, psi, 4, exec, policy)?;
        let model = fourth_moment_model(psi, policy)?.materialize(policy)?;
        dev = dev.max(linalg::frobenius_norm(&(exact.matrix() - &model)));
    }
    c.push("fourth moment aQP + bP", dev, 1e-10, false);

    let q1 = q_operator(1, policy)?;
    let pi = sym_projector(2, 4, policy)?;
    let dev = linalg::max_abs_diff(&(&q1 * &q1), &q1)
        .max((linalg::trace(&(&q1 * &pi)).re - 48.0).abs())
        .max(linalg::frobenius_norm(&(&q1 * &pi - &pi * &q1)));
    c.push("Q projector, trace, commutation", dev, 1e-12, false);

    let mut dev = 0.0f64;
    for n in 1..=6 {
        for k in 0..17 {
            let theta = PI * k as f64 / 16.0;
            let psi = StateVector::product_phase_state(n, theta)?;
            let m = stabilizer_linear_entropy_with(&psi, exec, policy)?;
            dev = dev.max((m - product_phase_magic(n, theta)).abs());
        }
    }
    c.push("magic closed form", dev, 1e-9, false);

    let mut dev = 0.0f64;
    for (i, da) in [2usize, 4, 8, 16, 32].into_iter().enumerate() {
        for (j, db) in [2usize, 4, 8, 16, 32].into_iter().enumerate() {
            let m = ((i * 5 + j) as f64 * 0.037) % 0.95;
            let k = coefficients(da, db)?;
            let d = (da * db) as f64;
            let t = term_breakdown(da, db, m)?;
            dev = dev
                .max(rel(k.alpha, k.x + k.y / d))
                .max(rel(k.beta, k.y / d))
                .max(rel(t.term_i - 2.0 * t.term_ii + t.term_iii, theorem1_prediction(da, db, m)?));
        }
    }
    c.push("coefficient identities", dev, 1e-12, false);

    let haar4 = haar_moment(2, 4, policy)?;
    let mut dev = 0.0f64;
    for psi in &states[1..] {
        let m = stabilizer_linear_entropy_with(psi, exec, policy)?;
        let avg = group_average_moment(&g1, psi, 4, exec, policy)?;
        let brute = linalg::frobenius_norm(&(avg.matrix() - haar4.matrix())).powi(2);
        dev = dev.max((no_measurement_distance(2, m)?.0 - brute).abs());
    }
    c.push("no-measurement distance at d=2", dev, 1e-10, false);

    let mut dev = 0.0f64;
    for (n_a, n_b, t) in [(1, 3, 2), (2, 2, 3), (2, 3, 2), (1, 2, 4)] {
        let psi = StateVector::haar_random(n_a + n_b, &mut rng)?;
        let ens = projected_ensemble(&psi, n_a, n_b, 0.0)?;
        for kind in [NormKind::TraceNormalized, NormKind::Hs, NormKind::HsSquared] {
            let fast = design_distance(&ens, t, kind)?;
            dev = dev.max((fast - design_distance_dense(&ens, t, kind, policy)?).abs());
        }
    }
    c.push("gram vs dense design distance", dev, 1e-10, false);

    let phase = if literal_paper_s { PhaseConvention::LiteralT } else { PhaseConvention::Clifford };
    let psi = StateVector::product_phase_state(3, FRAC_PI_4)?;
    let m0 = stabilizer_linear_entropy_with(&psi, exec, policy)?;
    let mut dev = 0.0f64;
    for seed in 0..20 {
        let out = apply_circuit(&sample_circuit_with(seed, 3, 50, phase)?, &psi)?;
        dev = dev.max((stabilizer_linear_entropy_with(&out, exec, policy)? - m0).abs());
    }
    c.push("magic invariance under circuits", dev, 1e-10, literal_paper_s);

    Ok(VerifyReport { checks: c.checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_passes() {
        let r = run_verify(false, Execution::Parallel, &NumericPolicy::default()).unwrap();
        assert!(r.ok(), "{}", r.render());
        assert!(r.checks.iter().all(|c| c.outcome == CheckOutcome::Pass));
        assert!(r.checks.len() >= 9);
    }

    #[test]
    fn literal_s_is_an_expected_failure() {
        let r = run_verify(true, Execution::Parallel, &NumericPolicy::default()).unwrap();
        assert!(r.ok());
        let inv = r.checks.iter().find(|c| c.name.starts_with("magic invariance")).unwrap();
        assert_eq!(inv.outcome, CheckOutcome::ExpectedFail);
        assert!(r.render().contains("XFAIL"));
    }
}
