//! Projected ensembles, their moment operators, Haar moments and the
//! distances between them.
//!
//! Subsystem A is qubits `0..n_a` (the high bits of an amplitude index), B is
//! the remaining `n_b` qubits, measured in the computational basis.
//!
//! Distances to the Haar moment come in two routes. The dense route builds
//! `ρ^{(t)} = Σ p_i |ψ_i⟩⟨ψ_i|^{⊗t}` and `Π_t^sym / Tr Π_t^sym` explicitly.
//! The Gram route works with the weighted overlap matrix
//! `G_ij = √(p_i p_j) ⟨ψ_i|ψ_j⟩^t`, whose nonzero spectrum equals that of
//! `ρ^{(t)}`. Since `ρ^{(t)}` lives in the symmetric subspace, where the Haar
//! moment is `1/D_sym` times the identity, both norms follow from `G` alone:
//!
//! - `‖ρ − ρ_H‖₂² = Σ_k (λ_k(G) − 1/D_sym)² + (D_sym − K)/D_sym²`
//! - `‖ρ − ρ_H‖₁ = Σ_k |λ_k(G) − 1/D_sym| + (D_sym − K)/D_sym`
//!
//! with `K = min(m, D_sym)` leading eigenvalues kept.
//!
//! which costs O(m² d_A + m³) for `m` outcomes instead of O(d_A^{3t}).

use serde::{Deserialize, Serialize};

use crate::error::{arg_err, Error, Result};
use crate::linalg::{self, CMatrix};
use crate::parallel::CompensatedSum;
use crate::qstate::StateVector;
use crate::{NumericPolicy, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct Member {
    /// Measured B bitstring, as an integer (B qubit 0 most significant).
    pub outcome: usize,
    pub probability: f64,
    pub state: StateVector,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectedEnsemble {
    n_a: usize,
    members: Vec<Member>,
}

impl ProjectedEnsemble {
    /// Build from explicit `(p, ψ)` pairs; probabilities must sum to one and
    /// states must be normalized (both within 1e-9).
    pub fn from_members(n_a: usize, members: Vec<(f64, StateVector)>) -> Result<Self> {
        let mut total = CompensatedSum::new();
        let mut out = Vec::with_capacity(members.len());
        for (k, (p, s)) in members.into_iter().enumerate() {
            if s.num_qubits() != n_a {
                return Err(arg_err!("member {k} has {} qubits, expected {n_a}", s.num_qubits()));
            }
            if !(0.0..=1.0 + 1e-12).contains(&p) {
                return Err(arg_err!("member {k} has probability {p}"));
            }
            if (s.norm() - 1.0).abs() > 1e-9 {
                return Err(arg_err!("member {k} is not normalized"));
            }
            total.add(p);
            out.push(Member { outcome: k, probability: p, state: s });
        }
        if (total.value() - 1.0).abs() > 1e-9 {
            return Err(arg_err!("probabilities sum to {}", total.value()));
        }
        Ok(Self { n_a, members: out })
    }

    pub fn n_a(&self) -> usize {
        self.n_a
    }

    pub fn local_dim(&self) -> usize {
        1 << self.n_a
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn total_probability(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        self.members.iter().for_each(|m| acc.add(m.probability));
        acc.value()
    }
}

/// Measure the last `n_b` qubits of `state` in the computational basis.
///
/// Outcomes with zero probability are skipped. With `prob_floor > 0`,
/// outcomes below the floor are dropped as well, but only if the dropped
/// mass stays below 1e-12; nothing is ever renormalized.
pub fn projected_ensemble(
    state: &StateVector,
    n_a: usize,
    n_b: usize,
    prob_floor: f64,
) -> Result<ProjectedEnsemble> {
    if n_a == 0 || n_a + n_b != state.num_qubits() {
        return Err(arg_err!(
            "partition {n_a}+{n_b} does not match a {}-qubit state (n_a must be >= 1)",
            state.num_qubits()
        ));
    }
    if prob_floor.is_nan() || prob_floor < 0.0 {
        return Err(arg_err!("prob_floor must be nonnegative, got {prob_floor}"));
    }
    let (d_a, d_b) = (1usize << n_a, 1usize << n_b);
    let amps = state.amplitudes();
    let mut members = Vec::with_capacity(d_b);
    let mut dropped = 0.0;
    for i in 0..d_b {
        let column = (0..d_a).map(|a| amps[a * d_b + i]);
        let p: f64 = column.clone().map(|z| z.norm_sqr()).sum();
        if p == 0.0 {
            continue;
        }
        if p < prob_floor {
            dropped += p;
            continue;
        }
        let scale = p.sqrt().recip();
        let psi = StateVector::from_amplitudes_unchecked(column.map(|z| z * scale).collect());
        members.push(Member { outcome: i, probability: p, state: psi });
    }
    if dropped > 1e-12 {
        return Err(Error::NumericPolicy(format!(
            "prob_floor {prob_floor} drops probability mass {dropped:e} (> 1e-12)"
        )));
    }
    Ok(ProjectedEnsemble { n_a, members })
}

/// Hermitian PSD operator on the t-fold tensor power of a `local_dim`
/// dimensional system.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentOperator {
    t: usize,
    local_dim: usize,
    matrix: CMatrix,
}

impl MomentOperator {
    pub fn new(t: usize, local_dim: usize, matrix: CMatrix) -> Result<Self> {
        let n = local_dim.checked_pow(t as u32).ok_or_else(|| arg_err!("dimension overflow"))?;
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(arg_err!(
                "matrix is {}x{}, expected {n}x{n}",
                matrix.nrows(),
                matrix.ncols()
            ));
        }
        Ok(Self { t, local_dim, matrix })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.matrix).re
    }

    /// Check Hermiticity (1e-10), unit trace (1e-9) and PSD (−1e-9).
    pub fn validate(&self) -> Result<()> {
        let herm = linalg::hermiticity_defect(&self.matrix);
        if herm > 1e-10 {
            return Err(Error::NumericPolicy(format!("not Hermitian (defect {herm:e})")));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > 1e-9 {
            return Err(Error::NumericPolicy(format!("trace {tr} != 1")));
        }
        let min = linalg::hermitian_eigenvalues(&self.matrix)[0];
        if min < -1e-9 {
            return Err(Error::NumericPolicy(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.t != other.t || self.local_dim != other.local_dim {
            return Err(arg_err!(
                "moment shapes differ: (t={}, d={}) vs (t={}, d={})",
                self.t,
                self.local_dim,
                other.t,
                other.local_dim
            ));
        }
        Ok(())
    }
}

fn moment_dim_guard(d: usize, t: usize, policy: &NumericPolicy) -> Result<usize> {
    match d.checked_pow(t as u32) {
        Some(n) if n <= policy.max_moment_dim => Ok(n),
        _ => Err(Error::Resource(format!(
            "moment operator of dimension {d}^{t} exceeds the cap of {} rows",
            policy.max_moment_dim
        ))),
    }
}

/// ρ^{(t)} = Σ_i p_i |ψ_i⟩⟨ψ_i|^{⊗t}, accumulated in ascending outcome order.
pub fn moment(ens: &ProjectedEnsemble, t: usize, policy: &NumericPolicy) -> Result<MomentOperator> {
    if t == 0 {
        return Err(arg_err!("moment order must be >= 1"));
    }
    let d = ens.local_dim();
    let n = moment_dim_guard(d, t, policy)?;
    let mut m = linalg::zeros(n);
    for member in &ens.members {
        let v = linalg::tensor_power(member.state.amplitudes(), t);
        linalg::add_weighted_projector(&mut m, &v, member.probability);
    }
    MomentOperator::new(t, d, m)
}

pub const MAX_SYM_ORDER: usize = 4;

/// d(d+1)…(d+t−1) = Tr Π_t^sym.
pub fn sym_trace(d: usize, t: usize) -> f64 {
    (0..t).map(|k| (d + k) as f64).product()
}

/// Dimension of the symmetric subspace, C(d+t−1, t).
pub fn sym_dimension(d: usize, t: usize) -> f64 {
    let fact: f64 = (1..=t).map(|k| k as f64).product();
    sym_trace(d, t) / fact
}

/// Π_t^sym = Σ_{ρ∈S_t} T_ρ (unnormalized).
pub fn sym_projector(d: usize, t: usize, policy: &NumericPolicy) -> Result<CMatrix> {
    if t == 0 || t > MAX_SYM_ORDER {
        return Err(Error::Unsupported(format!("symmetric projector for t={t} (1..=4 supported)")));
    }
    let n = moment_dim_guard(d, t, policy)?;
    let mut m = linalg::zeros(n);
    for perm in linalg::permutations(t) {
        for (i, j) in linalg::permuted_indices(d, t, &perm).into_iter().enumerate() {
            m[(j, i)] += C64::new(1.0, 0.0);
        }
    }
    Ok(m)
}

/// ρ_Haar^{(t)} = Π_t^sym / Tr Π_t^sym.
pub fn haar_moment(d: usize, t: usize, policy: &NumericPolicy) -> Result<MomentOperator> {
    let pi = sym_projector(d, t, policy)?;
    let m = pi * C64::new(sym_trace(d, t).recip(), 0.0);
    MomentOperator::new(t, d, m)
}

/// ‖a − b‖₂
pub fn hs_distance(a: &MomentOperator, b: &MomentOperator) -> Result<f64> {
    a.check_compatible(b)?;
    Ok(linalg::frobenius_norm(&(&a.matrix - &b.matrix)))
}

/// ‖a − b‖₁ from the eigenvalues of the Hermitian difference; halved when
/// `normalized`.
pub fn trace_distance(a: &MomentOperator, b: &MomentOperator, normalized: bool) -> Result<f64> {
    a.check_compatible(b)?;
    let diff = &a.matrix - &b.matrix;
    let norm: f64 = linalg::hermitian_eigenvalues(&diff).iter().map(|x| x.abs()).sum();
    Ok(if normalized { 0.5 * norm } else { norm })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NormKind {
    /// ½‖·‖₁, in [0, 1].
    #[serde(rename = "trace", alias = "trace_normalized")]
    TraceNormalized,
    #[serde(rename = "hs")]
    Hs,
    /// ‖·‖₂²
    #[serde(rename = "hs2", alias = "hs_squared")]
    HsSquared,
}

impl NormKind {
    pub fn tag(self) -> &'static str {
        match self {
            NormKind::TraceNormalized => "trace",
            NormKind::Hs => "hs",
            NormKind::HsSquared => "hs2",
        }
    }
}

impl std::str::FromStr for NormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trace" | "trace_normalized" => Ok(NormKind::TraceNormalized),
            "hs" => Ok(NormKind::Hs),
            "hs2" | "hs_squared" => Ok(NormKind::HsSquared),
            other => Err(arg_err!("unknown norm {other:?} (expected trace, hs or hs2)")),
        }
    }
}

impl std::fmt::Display for NormKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// Distance between the ensemble's t-th moment and the Haar moment, via the
/// Gram route. No d_A^t-sized matrix is formed, so there is no dimension
/// guard.
pub fn design_distance(ens: &ProjectedEnsemble, t: usize, kind: NormKind) -> Result<f64> {
    if t == 0 {
        return Err(arg_err!("moment order must be >= 1"));
    }
    let d = ens.local_dim();
    let d_sym = sym_dimension(d, t);
    let c = d_sym.recip();
    let members = &ens.members;
    let m = members.len();
    // w_ij = √(p_i p_j) ⟨ψ_i|ψ_j⟩^t
    let mut gram = CMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let ov = members[i].state.inner_product_unchecked(&members[j].state);
            let w = (members[i].probability * members[j].probability).sqrt();
            let g = ov.powu(t as u32) * w;
            gram[(i, j)] = g;
            gram[(j, i)] = g.conj();
        }
    }
    // Spectrum of ρ^{(t)} restricted to the symmetric subspace: the top
    // min(m, D_sym) eigenvalues of G, padded with zeros.
    let mut ev = linalg::hermitian_eigenvalues(&gram);
    ev.reverse();
    let keep = if (m as f64) > d_sym { d_sym as usize } else { m };
    let padding = d_sym - keep as f64;
    let mut acc = CompensatedSum::new();
    match kind {
        NormKind::Hs | NormKind::HsSquared => {
            for &l in &ev[..keep] {
                acc.add((l - c) * (l - c));
            }
            acc.add(padding * c * c);
            let sq = acc.value();
            Ok(if kind == NormKind::Hs { sq.sqrt() } else { sq })
        }
        NormKind::TraceNormalized => {
            for &l in &ev[..keep] {
                acc.add((l - c).abs());
            }
            acc.add(padding * c);
            Ok(0.5 * acc.value())
        }
    }
}

/// Same quantity as [`design_distance`], through the dense moment operators.
pub fn design_distance_dense(
    ens: &ProjectedEnsemble,
    t: usize,
    kind: NormKind,
    policy: &NumericPolicy,
) -> Result<f64> {
    let rho = moment(ens, t, policy)?;
    let haar = haar_moment(ens.local_dim(), t, policy)?;
    match kind {
        NormKind::TraceNormalized => trace_distance(&rho, &haar, true),
        NormKind::Hs => hs_distance(&rho, &haar),
        NormKind::HsSquared => hs_distance(&rho, &haar).map(|x| x * x),
    }
}

/// Tr_B |Ψ⟩⟨Ψ| for the A = first `n_a` qubits split.
pub fn reduced_state(state: &StateVector, n_a: usize) -> Result<CMatrix> {
    if n_a == 0 || n_a > state.num_qubits() {
        return Err(arg_err!("cannot keep {n_a} of {} qubits", state.num_qubits()));
    }
    let d_a = 1usize << n_a;
    let d_b = state.dim() / d_a;
    let amps = state.amplitudes();
    let mut rho = linalg::zeros(d_a);
    for r in 0..d_a {
        for c in 0..d_a {
            rho[(r, c)] = (0..d_b).map(|i| amps[r * d_b + i] * amps[c * d_b + i].conj()).sum();
        }
    }
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::GateMatrix;
    use rand::SeedableRng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn p() -> NumericPolicy {
        NumericPolicy::default()
    }

    fn bell() -> StateVector {
        let mut s = StateVector::basis_state(2, "00").unwrap();
        s.apply_h(0).unwrap();
        s.apply_cnot(0, 1).unwrap();
        s
    }

    fn basis_projector(d: usize, k: usize) -> CMatrix {
        let mut m = linalg::zeros(d);
        m[(k, k)] = C64::new(1.0, 0.0);
        m
    }

    fn mat_close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        linalg::max_abs_diff(a, b) <= tol
    }

    /// The six single-qubit stabilizer states, uniformly weighted.
    fn stabilizer_ensemble() -> ProjectedEnsemble {
        let h = FRAC_1_SQRT_2;
        let vecs = [
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            [C64::new(h, 0.0), C64::new(h, 0.0)],
            [C64::new(h, 0.0), C64::new(-h, 0.0)],
            [C64::new(h, 0.0), C64::new(0.0, h)],
            [C64::new(h, 0.0), C64::new(0.0, -h)],
        ];
        let members = vecs
            .iter()
            .map(|v| (1.0 / 6.0, StateVector::from_amplitudes(v.to_vec(), 1e-12).unwrap()))
            .collect();
        ProjectedEnsemble::from_members(1, members).unwrap()
    }

    #[test]
    fn bell_state_ensemble() {
        let ens = projected_ensemble(&bell(), 1, 1, 0.0).unwrap();
        assert_eq!(ens.members().len(), 2);
        for (k, m) in ens.members().iter().enumerate() {
            assert!((m.probability - 0.5).abs() < 1e-15);
            assert_eq!(m.state, StateVector::basis_index(1, k).unwrap());
        }
    }

    #[test]
    fn product_state_ensemble_has_one_member() {
        let mut s = StateVector::basis_state(2, "00").unwrap();
        s.apply_h(0).unwrap();
        let ens = projected_ensemble(&s, 1, 1, 0.0).unwrap();
        assert_eq!(ens.members().len(), 1);
        assert!((ens.members()[0].probability - 1.0).abs() < 1e-15);
        assert!((ens.members()[0].state.amplitudes()[1].re - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn partition_and_floor_errors() {
        let s = bell();
        assert!(matches!(projected_ensemble(&s, 1, 2, 0.0), Err(Error::Argument(_))));
        assert!(matches!(projected_ensemble(&s, 0, 2, 0.0), Err(Error::Argument(_))));
        assert!(matches!(projected_ensemble(&s, 1, 1, 0.9), Err(Error::NumericPolicy(_))));
        // a floor below every outcome drops nothing
        assert_eq!(projected_ensemble(&s, 1, 1, 0.1).unwrap().members().len(), 2);
    }

    #[test]
    fn probabilities_complete() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let s = StateVector::haar_random(5, &mut rng).unwrap();
            let ens = projected_ensemble(&s, 2, 3, 0.0).unwrap();
            assert!((ens.total_probability() - 1.0).abs() < 1e-9);
            assert!(ens.members().iter().all(|m| (m.state.norm() - 1.0).abs() < 1e-9));
        }
    }

    #[test]
    fn moment_examples() {
        let zero = StateVector::basis_state(1, "0").unwrap();
        let single = ProjectedEnsemble::from_members(1, vec![(1.0, zero)]).unwrap();
        let m = moment(&single, 2, &p()).unwrap();
        assert!(mat_close(m.matrix(), &basis_projector(4, 0), 1e-15));

        let ens = projected_ensemble(&bell(), 1, 1, 0.0).unwrap();
        let m1 = moment(&ens, 1, &p()).unwrap();
        assert!(mat_close(m1.matrix(), &(linalg::zeros(2).map(|_| C64::new(0.0, 0.0)) + CMatrix::identity(2, 2) * C64::new(0.5, 0.0)), 1e-15));
        let m2 = moment(&ens, 2, &p()).unwrap();
        let want = (basis_projector(4, 0) + basis_projector(4, 3)) * C64::new(0.5, 0.0);
        assert!(mat_close(m2.matrix(), &want, 1e-15));
        m2.validate().unwrap();
    }

    #[test]
    fn moment_dimension_guard() {
        let ens = projected_ensemble(&StateVector::basis_state(4, "0000").unwrap(), 3, 1, 0.0).unwrap();
        let tight = NumericPolicy { max_moment_dim: 64, ..Default::default() };
        assert!(moment(&ens, 2, &tight).is_ok());
        assert!(matches!(moment(&ens, 3, &tight), Err(Error::Resource(_))));
    }

    #[test]
    fn sym_projector_examples() {
        let pi = sym_projector(2, 2, &p()).unwrap();
        let swap = linalg::permutation_operator(2, 2, &[1, 0]);
        assert!(mat_close(&pi, &(CMatrix::identity(4, 4) + swap), 0.0));
        assert_eq!(linalg::trace(&pi).re, 6.0);
        for d in 2..5 {
            let pi = sym_projector(d, 1, &p()).unwrap();
            assert!(mat_close(&pi, &CMatrix::identity(d, d), 0.0));
        }
        let pi4 = sym_projector(2, 4, &p()).unwrap();
        let sq = &pi4 * &pi4;
        assert!(mat_close(&sq, &(&pi4 * C64::new(24.0, 0.0)), 1e-10));
        for (d, t) in [(2, 3), (3, 3), (2, 4), (3, 2)] {
            let pi = sym_projector(d, t, &p()).unwrap();
            assert_eq!(linalg::trace(&pi).re, sym_trace(d, t));
        }
        assert!(matches!(sym_projector(2, 5, &p()), Err(Error::Unsupported(_))));
    }

    #[test]
    fn haar_moment_examples() {
        let h1 = haar_moment(2, 1, &p()).unwrap();
        assert!(mat_close(h1.matrix(), &(CMatrix::identity(2, 2) * C64::new(0.5, 0.0)), 1e-15));
        let h2 = haar_moment(2, 2, &p()).unwrap();
        let purity = linalg::trace(&(h2.matrix() * h2.matrix())).re;
        assert!((purity - 1.0 / 3.0).abs() < 1e-15);
        assert!((haar_moment(4, 2, &p()).unwrap().trace() - 1.0).abs() < 1e-12);
        h2.validate().unwrap();
    }

    #[test]
    fn haar_moment_commutes_with_permutations() {
        for (d, t) in [(2, 3), (3, 3), (2, 4)] {
            let h = haar_moment(d, t, &p()).unwrap();
            for perm in linalg::permutations(t) {
                let tp = linalg::permutation_operator(d, t, &perm);
                let comm = h.matrix() * &tp - &tp * h.matrix();
                assert!(linalg::frobenius_norm(&comm) < 1e-10);
            }
        }
    }

    #[test]
    fn distance_examples() {
        let z = MomentOperator::new(1, 2, basis_projector(2, 0)).unwrap();
        let o = MomentOperator::new(1, 2, basis_projector(2, 1)).unwrap();
        let mixed = haar_moment(2, 1, &p()).unwrap();
        assert_eq!(hs_distance(&z, &z).unwrap(), 0.0);
        assert!((hs_distance(&z, &mixed).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(hs_distance(&z, &mixed).unwrap(), hs_distance(&mixed, &z).unwrap());
        assert!((trace_distance(&z, &o, true).unwrap() - 1.0).abs() < 1e-14);
        assert!(trace_distance(&z, &z, false).unwrap().abs() < 1e-15);
        let h2 = haar_moment(2, 2, &p()).unwrap();
        assert!(hs_distance(&z, &h2).is_err());
        assert!(trace_distance(&z, &h2, true).is_err());
    }

    #[test]
    fn trace_norm_dominates_hs_norm() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            // random PSD unit-trace states as small mixtures
            let mk = |rng: &mut rand_chacha::ChaCha8Rng| {
                let mut m = linalg::zeros(4);
                for _ in 0..3 {
                    let v = StateVector::haar_random(2, rng).unwrap();
                    linalg::add_weighted_projector(&mut m, v.amplitudes(), 1.0 / 3.0);
                }
                MomentOperator::new(1, 4, m).unwrap()
            };
            let (a, b) = (mk(&mut rng), mk(&mut rng));
            assert!(trace_distance(&a, &b, false).unwrap() >= hs_distance(&a, &b).unwrap() - 1e-14);
        }
    }

    #[test]
    fn design_distance_examples() {
        let zero = StateVector::basis_state(1, "0").unwrap();
        let single = ProjectedEnsemble::from_members(1, vec![(1.0, zero)]).unwrap();
        let d = design_distance(&single, 1, NormKind::Hs).unwrap();
        assert!((d - 0.5f64.sqrt()).abs() < 1e-15);

        // the single-qubit stabilizer states form a 2-design (but not a 4-design)
        let stab = stabilizer_ensemble();
        let direct = design_distance_dense(&stab, 2, NormKind::Hs, &p()).unwrap();
        assert!(direct < 1e-10);
        for kind in [NormKind::Hs, NormKind::HsSquared, NormKind::TraceNormalized] {
            assert!(design_distance(&stab, 2, kind).unwrap() < 1e-10, "{kind} {}", design_distance(&stab, 2, kind).unwrap());
            assert!(design_distance(&stab, 3, kind).unwrap() < 1e-10);
        }
        assert!(design_distance(&stab, 4, NormKind::Hs).unwrap() > 1e-3);
    }

    #[test]
    fn gram_route_matches_dense_route() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        for (n_a, n_b, t) in [(1, 1, 1), (1, 2, 2), (2, 3, 2), (2, 2, 3), (1, 3, 4), (3, 1, 2), (2, 4, 4)] {
            let s = StateVector::haar_random(n_a + n_b, &mut rng).unwrap();
            let ens = projected_ensemble(&s, n_a, n_b, 0.0).unwrap();
            for kind in [NormKind::Hs, NormKind::HsSquared, NormKind::TraceNormalized] {
                let fast = design_distance(&ens, t, kind).unwrap();
                let dense = design_distance_dense(&ens, t, kind, &p()).unwrap();
                assert!((fast - dense).abs() < 1e-10, "{n_a} {n_b} {t} {kind}: {fast} vs {dense}");
            }
        }
        // rank-deficient: more outcomes than the symmetric subspace dimension
        let mut s = StateVector::basis_state(5, "00000").unwrap();
        for q in 0..5 {
            s.apply_one_qubit(&GateMatrix::hadamard(), q).unwrap();
        }
        s.apply_cnot(0, 3).unwrap();
        s.apply_diag_phase(1, C64::new(0.0, 1.0)).unwrap();
        let ens = projected_ensemble(&s, 1, 4, 0.0).unwrap();
        for t in 1..=3 {
            let fast = design_distance(&ens, t, NormKind::TraceNormalized).unwrap();
            let dense = design_distance_dense(&ens, t, NormKind::TraceNormalized, &p()).unwrap();
            assert!((fast - dense).abs() < 1e-10);
        }
    }

    #[test]
    fn first_moment_is_reduced_state() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for (n_a, n_b) in [(1, 2), (2, 2), (3, 1)] {
            let s = StateVector::haar_random(n_a + n_b, &mut rng).unwrap();
            let ens = projected_ensemble(&s, n_a, n_b, 0.0).unwrap();
            let m = moment(&ens, 1, &p()).unwrap();
            assert!(mat_close(m.matrix(), &reduced_state(&s, n_a).unwrap(), 1e-10));
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]
            #[test]
            fn moments_are_states_and_trace_distance_is_bounded(seed in any::<u64>(), n_a in 1usize..3, n_b in 0usize..3, t in 1usize..4) {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                let s = StateVector::haar_random(n_a + n_b, &mut rng).unwrap();
                let ens = projected_ensemble(&s, n_a, n_b, 0.0).unwrap();
                moment(&ens, t, &p()).unwrap().validate().unwrap();
                let d = design_distance(&ens, t, NormKind::TraceNormalized).unwrap();
                prop_assert!((0.0..=1.0 + 1e-12).contains(&d));
                prop_assert!(design_distance(&ens, t, NormKind::HsSquared).unwrap() >= 0.0);
            }
        }
    }
}
