//! Closed forms for the Clifford-averaged Hilbert–Schmidt distance between
//! the second moment of a projected ensemble and the Haar value.
//!
//! For `d = d_A d_B` and a state with stabilizer linear entropy `M`, the
//! average is `α − β M + ε` where α and β depend on the dimensions only and
//! ε is a small, negative correction from replacing the average of a
//! quotient by the quotient of averages. Coefficients are evaluated in exact
//! rationals and rounded once at the end.
//!
//! The Clifford fourth moment of `|ψ⟩` is `aQΠ₄ + bΠ₄` with
//! `Q = d^{-2} Σ_P P^{⊗4}`, `Π₄` the unnormalized symmetric projector, and
//!
//! ```text
//! b = (1 − X) / ((d²−1)(d+2)(d+4)),    a = X / (4(d+1)(d+2)) − b,
//! ```
//!
//! where `X = ‖Ξ‖² = (1 − M)/d`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::ensemble::sym_projector;
use crate::error::{arg_err, Error, Result};
use crate::linalg::{self, CMatrix};
use crate::magic::{stabilizer_linear_entropy_with, PauliString};
use crate::parallel::Execution;
use crate::qstate::StateVector;
use crate::{NumericPolicy, C64};

type Q = BigRational;

fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

fn frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn exact_magic(m: f64) -> Result<Q> {
    if !(0.0..1.0).contains(&m) {
        return Err(arg_err!("magic {m} outside [0, 1)"));
    }
    Q::from_f64(m).ok_or_else(|| arg_err!("magic {m} is not finite"))
}

fn check_dims(d_a: usize, d_b: usize) -> Result<(i64, i64)> {
    for (name, v) in [("d_a", d_a), ("d_b", d_b)] {
        if v < 2 || !v.is_power_of_two() {
            return Err(arg_err!("{name} = {v} must be a power of two >= 2"));
        }
    }
    if d_a.checked_mul(d_b).is_none_or(|d| d > 1 << 24) {
        return Err(arg_err!("dimension {d_a}x{d_b} is too large"));
    }
    Ok((d_a as i64, d_b as i64))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Coefficients {
    pub d_a: usize,
    pub d_b: usize,
    pub x: f64,
    pub y: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// Exact x and y, with the distance equal to `x + y‖Ξ‖²` before the ε
/// correction.
pub fn exact_xy(d_a: usize, d_b: usize) -> Result<(Q, Q)> {
    let (da, db) = check_dims(d_a, d_b)?;
    let d = da * db;
    let den = (d - 1) * (d + 2) * (d + 4);
    let neq = frac(2 * db * (db - 1) * (db - 2) * (da + 1), den);
    let eq = frac(db * (da + 2) * (d * (da + 3) - 4), den);
    let x = &neq + &eq - frac(4 * db * db, d * (d + 1)) + frac(2, da * (da + 1));
    let y = -neq - eq + frac(db * ((db - 1) * (da + 1) + da + 2), d + 2);
    Ok((x, y))
}

/// α = x + y/d and β = y/d.
pub fn coefficients(d_a: usize, d_b: usize) -> Result<Theorem1Coefficients> {
    let (x, y) = exact_xy(d_a, d_b)?;
    let d = q((d_a * d_b) as i64);
    let beta = &y / &d;
    let alpha = &x + &beta;
    Ok(Theorem1Coefficients {
        d_a,
        d_b,
        x: to_f64(&x),
        y: to_f64(&y),
        alpha: to_f64(&alpha),
        beta: to_f64(&beta),
    })
}

/// α − β·m, rounded once from the exact value.
pub fn theorem1_prediction(d_a: usize, d_b: usize, m_lin: f64) -> Result<f64> {
    let m = exact_magic(m_lin)?;
    let (x, y) = exact_xy(d_a, d_b)?;
    let d = q((d_a * d_b) as i64);
    Ok(to_f64(&(x + y * (Q::one() - m) / d)))
}

/// Exact `(a, b)` for dimension `d` and `X = ‖Ξ‖²`.
fn exact_ab(d: i64, xi_sq: &Q) -> (Q, Q) {
    let b = (Q::one() - xi_sq) / q((d * d - 1) * (d + 2) * (d + 4));
    let a = xi_sq / q(4 * (d + 1) * (d + 2)) - &b;
    (a, b)
}

/// Clifford fourth moment `aQΠ₄ + bΠ₄` of a state, in coefficient form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourthMomentModel {
    pub a: f64,
    pub b: f64,
    pub dim: usize,
}

impl FourthMomentModel {
    /// Model for any state of dimension `dim` with magic `m_lin`.
    pub fn from_magic(dim: usize, m_lin: f64) -> Result<Self> {
        if dim < 2 || !dim.is_power_of_two() {
            return Err(arg_err!("dimension {dim} must be a power of two >= 2"));
        }
        let m = Q::from_f64(m_lin).filter(|_| (0.0..=1.0).contains(&m_lin)).ok_or_else(|| arg_err!("magic {m_lin} outside [0, 1]"))?;
        let d = dim as i64;
        let (a, b) = exact_ab(d, &((Q::one() - m) / q(d)));
        Ok(Self { a: to_f64(&a), b: to_f64(&b), dim })
    }

    /// q_dimension = d².
    pub fn q_dimension(&self) -> usize {
        self.dim * self.dim
    }

    /// a·Tr[QΠ₄] + b·Tr[Π₄]; one for a valid model.
    pub fn trace(&self) -> f64 {
        let d = self.dim as f64;
        self.a * 4.0 * (d + 1.0) * (d + 2.0) + self.b * d * (d + 1.0) * (d + 2.0) * (d + 3.0)
    }

    /// The operator itself, for dimension ≤ 4.
    pub fn materialize(&self, policy: &NumericPolicy) -> Result<CMatrix> {
        let n = self.dim.trailing_zeros() as usize;
        let qop = q_operator(n, policy)?;
        let pi = sym_projector(self.dim, 4, policy)?;
        Ok((&qop * &pi) * C64::new(self.a, 0.0) + pi * C64::new(self.b, 0.0))
    }
}

pub fn fourth_moment_model(psi: &StateVector, policy: &NumericPolicy) -> Result<FourthMomentModel> {
    let m = stabilizer_linear_entropy_with(psi, Execution::Parallel, policy)?;
    FourthMomentModel::from_magic(psi.dim(), m.clamp(0.0, 1.0))
}

/// Q = d^{-2} Σ_P P^{⊗4} on n ≤ 2 qubits.
pub fn q_operator(n: usize, policy: &NumericPolicy) -> Result<CMatrix> {
    if n == 0 {
        return Err(arg_err!("qubit count must be at least 1"));
    }
    if n > 2 || (1usize << (4 * n)) > policy.max_moment_dim {
        return Err(Error::Resource(format!("Q operator on {n} qubits needs a 2^{} square matrix", 4 * n)));
    }
    let d = 1usize << n;
    let dim = d.pow(4);
    let mut m = linalg::zeros(dim);
    let w = C64::new(((d * d) as f64).recip(), 0.0);
    for k in 0..d * d {
        let p = PauliString::from_index(n, k)?;
        for col in 0..dim {
            let mut row = 0;
            let mut amp = w;
            for slot in 0..4 {
                let j = (col / d.pow(3 - slot)) % d;
                let (j2, ph) = p.apply_to_basis(j);
                row = row * d + j2;
                amp *= ph;
            }
            m[(row, col)] += amp;
        }
    }
    Ok(m)
}

/// Unmeasured terms of the distance, before the ε correction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermBreakdown {
    /// Σ_ij Tr[ρ_ij²]-type term (cross terms i≠j plus diagonal i=j).
    pub term_i: f64,
    /// overlap with the Haar moment
    pub term_ii: f64,
    /// Tr[ρ_Haar²] = 2/(d_A(d_A+1))
    pub term_iii: f64,
}

struct ExactTerms {
    a: Q,
    b: Q,
    /// I restricted to i≠j and i=j outcome pairs.
    i_neq: Q,
    i_eq: Q,
    ii: Q,
    iii: Q,
}

fn exact_terms(d_a: usize, d_b: usize, m: &Q) -> Result<ExactTerms> {
    let (da, db) = check_dims(d_a, d_b)?;
    let d = da * db;
    let (a, b) = exact_ab(d, &((Q::one() - m) / q(d)));
    let i_neq = q(db * db * (db - 1) * (d + 1) * (da + 1)) * (&a * frac(4, db) + &b * q(2));
    let i_eq = q(db * db * (d + 1) * (da + 2)) * (&a * frac(4, db) + &b * q(da * (da + 3)));
    Ok(ExactTerms {
        a,
        b,
        i_neq,
        i_eq,
        ii: frac(2 * db, da * (d + 1)),
        iii: frac(2, da * (da + 1)),
    })
}

pub fn term_breakdown(d_a: usize, d_b: usize, m_lin: f64) -> Result<TermBreakdown> {
    let t = exact_terms(d_a, d_b, &exact_magic(m_lin)?)?;
    Ok(TermBreakdown {
        term_i: to_f64(&(&t.i_neq + &t.i_eq)),
        term_ii: to_f64(&t.ii),
        term_iii: to_f64(&t.iii),
    })
}

/// Per-class pieces of the ε estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    /// −r·I over outcome pairs i≠j
    pub cross: f64,
    /// −r·I over outcome pairs i=j
    pub diagonal: f64,
    /// +2r·II
    pub overlap: f64,
    pub total: f64,
}

/// Mean-quotient estimate of ε: each quotient ⟨x/y⟩ is corrected by
/// `−(⟨x⟩/⟨y⟩)·Var(y)/⟨y⟩²`, where y is the outcome probability factor.
pub fn error_estimate_breakdown(d_a: usize, d_b: usize, m_lin: f64) -> Result<ErrorEstimate> {
    let t = exact_terms(d_a, d_b, &exact_magic(m_lin)?)?;
    let (da, db) = (d_a as i64, d_b as i64);
    let d = da * db;
    let rel = |mean: Q, second: Q| (&second - &mean * &mean) / (&mean * &mean);
    // y_i y_j for i≠j: ⟨y⟩ = d_A/(d_B(d+1))
    let r_neq = rel(
        frac(da, db * (d + 1)),
        &t.a * frac(4 * da * (da + 1), db) + &t.b * q(da * da * (da + 1) * (da + 1)),
    );
    // y_i² for i=j: ⟨y⟩ = (d_A+1)/(d_B(d+1))
    let r_eq = rel(
        frac(da + 1, db * (d + 1)),
        &t.a * frac(4 * (da + 1) * (da + 2), db) + &t.b * q(da * (da + 1) * (da + 2) * (da + 3)),
    );
    // single-probability weight in term II
    let r_ii = frac(db - 1, d + 1);
    let cross = -(r_neq * &t.i_neq);
    let diagonal = -(r_eq * &t.i_eq);
    let overlap = q(2) * r_ii * &t.ii;
    let total = &cross + &diagonal + &overlap;
    Ok(ErrorEstimate {
        cross: to_f64(&cross),
        diagonal: to_f64(&diagonal),
        overlap: to_f64(&overlap),
        total: to_f64(&total),
    })
}

pub fn error_estimate(d_a: usize, d_b: usize, m_lin: f64) -> Result<f64> {
    Ok(error_estimate_breakdown(d_a, d_b, m_lin)?.total)
}

/// Squared HS distance between the Clifford-averaged fourth moment of an
/// unmeasured d-dimensional state and the Haar fourth moment:
/// `(exact, leading)` with leading = 6(1 − m)²/d⁴.
pub fn no_measurement_distance(d: usize, m_lin: f64) -> Result<(f64, f64)> {
    if !(2..=1 << 24).contains(&d) {
        return Err(arg_err!("dimension {d} outside 2..=2^24"));
    }
    let m = exact_magic(m_lin)?;
    let di = d as i64;
    let (a, b) = exact_ab(di, &((Q::one() - &m) / q(di)));
    let tr_q = q(4 * (di + 1) * (di + 2));
    let tr_pi = q(di * (di + 1) * (di + 2) * (di + 3));
    let i = q(24) * ((&a * &a + q(2) * &a * &b) * tr_q + &b * &b * &tr_pi);
    let ii = q(96) * &a / q(di * (di + 3)) + q(24) * &b;
    let iii = q(24) / tr_pi;
    let exact = i - q(2) * ii + iii;
    let one_minus = Q::one() - m;
    let leading = q(6) * &one_minus * &one_minus / q(di).pow(4);
    debug_assert!(!exact.is_zero() || m_lin == 0.0 || d > 0);
    Ok((to_f64(&exact), to_f64(&leading)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{enumerate_clifford_group, group_average, group_average_moment};
    use crate::ensemble::{design_distance, haar_moment, projected_ensemble, NormKind};
    use crate::magic::stabilizer_linear_entropy;
    use rand::SeedableRng;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

    fn p() -> NumericPolicy {
        NumericPolicy::default()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    /// Five-term α and three-term β, written out independently.
    fn oracle_alpha_beta(da: i64, db: i64) -> (Q, Q) {
        let d = da * db;
        let alpha = frac(2 * db * (db - 1) * (db - 2) * (da + 1), d * (d + 2) * (d + 4))
            + frac(db * (da + 2) * (d * (da + 3) - 4), d * (d + 2) * (d + 4))
            + frac(db * (d + db + 1), d * (d + 2))
            - frac(4 * db * db, d * (d + 1))
            + frac(2, da * (da + 1));
        let beta = frac(db * (d + db + 1), d * (d + 2))
            - frac(2 * db * (db - 1) * (db - 2) * (da + 1), d * (d - 1) * (d + 2) * (d + 4))
            - frac(db * (da + 2) * (d * (da + 3) - 4), d * (d - 1) * (d + 2) * (d + 4));
        (alpha, beta)
    }

    #[test]
    fn coefficients_match_oracle() {
        for (da, db) in [(2, 2), (4, 16), (32, 16), (8, 64), (64, 4)] {
            let c = coefficients(da, db).unwrap();
            let (x, y) = exact_xy(da, db).unwrap();
            let d = q((da * db) as i64);
            let (oa, ob) = oracle_alpha_beta(da as i64, db as i64);
            assert_eq!(&x + &y / &d, oa);
            assert_eq!(&y / &d, ob);
            assert_eq!(c.alpha, to_f64(&oa));
            assert_eq!(c.beta, to_f64(&ob));
        }
        // frozen exact values
        let (a, b) = oracle_alpha_beta(32, 16);
        assert_eq!(a, frac(103_332_007, 997_772_688));
        assert_eq!(b, frac(1_446_475, 45_176_488));
        let c = coefficients(32, 16).unwrap();
        assert!(rel(c.alpha, 0.1035626733851829) < 1e-15);
        assert!(rel(c.beta, 0.032018314482524624) < 1e-15);
        let c = coefficients(4, 16).unwrap();
        assert!(rel(c.alpha - c.beta, c.x) < 1e-14);
        assert!(rel(c.alpha, 10357.0 / 24310.0) < 1e-15);
    }

    #[test]
    fn coefficient_identities_and_positivity() {
        for da in [2, 4, 8, 16, 32, 64] {
            for db in [2, 4, 8, 16, 32, 64] {
                let c = coefficients(da, db).unwrap();
                let d = (da * db) as f64;
                assert!(rel(c.alpha, c.x + c.y / d) < 1e-14);
                assert!(rel(c.beta, c.y / d) < 1e-14);
                assert!(c.beta > 0.0);
            }
        }
        assert!(coefficients(3, 4).is_err());
        assert!(coefficients(1, 4).is_err());
    }

    #[test]
    fn beta_scales_inversely_with_subsystem() {
        let s8 = coefficients(8, 16).unwrap().beta * 8.0;
        for da in [16, 32, 64] {
            let s = coefficients(da, 16).unwrap().beta * da as f64;
            assert!((s / s8 - 1.0).abs() <= 0.25, "{da}: {s} vs {s8}");
        }
    }

    #[test]
    fn prediction_examples() {
        let c = coefficients(32, 16).unwrap();
        assert_eq!(theorem1_prediction(32, 16, 0.0).unwrap(), c.alpha);
        assert!(rel(theorem1_prediction(32, 16, 0.75).unwrap(), 0.07954893752328943) < 1e-15);
        let (a, b) = oracle_alpha_beta(32, 16);
        assert_eq!(theorem1_prediction(32, 16, 0.75).unwrap(), to_f64(&(a - b * frac(3, 4))));
        let diff = theorem1_prediction(8, 8, 0.2).unwrap() - theorem1_prediction(8, 8, 0.6).unwrap();
        assert!((diff - 0.4 * coefficients(8, 8).unwrap().beta).abs() < 1e-15);
        assert!(theorem1_prediction(4, 4, 1.0).is_err());
        assert!(theorem1_prediction(4, 4, -0.1).is_err());
    }

    #[test]
    fn terms_recombine() {
        assert!((term_breakdown(2, 2, 0.0).unwrap().term_iii - 1.0 / 3.0).abs() < 1e-16);
        assert!((term_breakdown(2, 2, 0.0).unwrap().term_ii - 0.4).abs() < 1e-16);
        for da in [2, 4, 8, 16, 64] {
            for db in [2, 8, 32, 64, 128] {
                let m = (da * 7 + db) as f64 % 10.0 / 10.0;
                let t = term_breakdown(da, db, m).unwrap();
                let want = theorem1_prediction(da, db, m).unwrap();
                assert!(rel(t.term_i - 2.0 * t.term_ii + t.term_iii, want) < 1e-12);
            }
        }
    }

    #[test]
    fn q_operator_properties() {
        let q1 = q_operator(1, &p()).unwrap();
        assert!(linalg::max_abs_diff(&(&q1 * &q1), &q1) < 1e-12);
        assert!(linalg::hermiticity_defect(&q1) < 1e-15);
        let pi = sym_projector(2, 4, &p()).unwrap();
        assert!((linalg::trace(&(&q1 * &pi)).re - 48.0).abs() < 1e-12);
        assert!(linalg::frobenius_norm(&(&q1 * &pi - &pi * &q1)) < 1e-12);
        let q2 = q_operator(2, &p()).unwrap();
        let pi2 = sym_projector(4, 4, &p()).unwrap();
        assert!((linalg::trace(&(&q2 * &pi2)).re - 4.0 * 5.0 * 6.0).abs() < 1e-9);
        assert!(matches!(q_operator(3, &p()), Err(Error::Resource(_))));
    }

    #[test]
    fn fourth_moment_model_examples() {
        // stabilizer state at d = 2: b(d²−1)(d+2)(d+4) = 1 − 1/d
        let m = fourth_moment_model(&StateVector::basis_state(1, "0").unwrap(), &p()).unwrap();
        assert!((m.b * 3.0 * 4.0 * 6.0 - 0.5).abs() < 1e-15);
        assert!((m.b - 1.0 / 144.0).abs() < 1e-16);
        assert_eq!(m.q_dimension(), 4);

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let psi = StateVector::haar_random(1, &mut rng).unwrap();
            assert!((fourth_moment_model(&psi, &p()).unwrap().trace() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fourth_moment_model_matches_group_average() {
        let g = enumerate_clifford_group(1).unwrap();
        let mut states = vec![StateVector::product_phase_state(1, FRAC_PI_4).unwrap()];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        states.extend((0..5).map(|_| StateVector::haar_random(1, &mut rng).unwrap()));
        for psi in &states {
            let model = fourth_moment_model(psi, &p()).unwrap().materialize(&p()).unwrap();
            let exact = group_average_moment(&g, psi, 4, Execution::Sequential, &p()).unwrap();
            assert!(linalg::frobenius_norm(&(exact.matrix() - &model)) < 1e-10);
        }
    }

    #[test]
    fn no_measurement_matches_brute_force() {
        let g = enumerate_clifford_group(1).unwrap();
        let haar = haar_moment(2, 4, &p()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let psi = StateVector::haar_random(1, &mut rng).unwrap();
            let m = stabilizer_linear_entropy(&psi).unwrap();
            let avg = group_average_moment(&g, &psi, 4, Execution::Sequential, &p()).unwrap();
            let brute = linalg::frobenius_norm(&(avg.matrix() - haar.matrix())).powi(2);
            let (exact, _) = no_measurement_distance(2, m).unwrap();
            assert!((exact - brute).abs() < 1e-10);
        }
    }

    #[test]
    fn no_measurement_converges_to_leading_term() {
        let mut prev = f64::INFINITY;
        for d in [16usize, 32, 64, 128] {
            let (exact, leading) = no_measurement_distance(d, 0.5).unwrap();
            let dev = (exact / leading - 1.0).abs();
            assert!(dev <= 20.0 / d as f64, "d={d}: {dev}");
            assert!(dev < prev);
            prev = dev;
        }
        assert!(no_measurement_distance(8, 0.999_999_999).unwrap().1 < 1e-20);
    }

    #[test]
    fn error_estimate_sign_and_scaling() {
        for da in [4, 8, 16, 32, 64] {
            for db in [4, 8, 16, 32, 64] {
                for m in [0.0, 0.5, 0.9] {
                    assert!(error_estimate(da, db, m).unwrap() < 0.0, "{da} {db} {m}");
                }
            }
        }
        for db in [4, 16, 64] {
            for m in [0.0, 0.5, 0.9] {
                let ratio = |da| error_estimate(da, db, m).unwrap().abs() / theorem1_prediction(da, db, m).unwrap();
                let s = ratio(64) / ratio(32);
                assert!((0.25..=0.75).contains(&s), "{db} {m}: {s}");
            }
        }
        let b = error_estimate_breakdown(8, 8, 0.3).unwrap();
        assert!((b.cross + b.diagonal + b.overlap - b.total).abs() < 1e-15);
    }

    #[test]
    fn error_estimate_improves_two_qubit_prediction() {
        let g = enumerate_clifford_group(2).unwrap();
        for theta in [0.0, FRAC_PI_8, FRAC_PI_4] {
            let psi = StateVector::product_phase_state(2, theta).unwrap();
            let m = stabilizer_linear_entropy(&psi).unwrap().max(0.0);
            let exact = group_average(&g, &psi, Execution::Parallel, |s| {
                design_distance(&projected_ensemble(s, 1, 1, 0.0)?, 2, NormKind::HsSquared)
            })
            .unwrap();
            let pred = theorem1_prediction(2, 2, m).unwrap();
            let corrected = pred + error_estimate(2, 2, m).unwrap();
            assert!((corrected - exact).abs() < (pred - exact).abs(), "θ={theta}");
        }
    }
}
