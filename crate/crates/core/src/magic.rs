//! Pauli strings, the Ξ vector and the stabilizer linear entropy
//! `M_lin(ψ) = 1 − 2^n ‖Ξ(ψ)‖²` with `Ξ_P = 2^{-n} ⟨ψ|P|ψ⟩²`.

use std::fmt;
use std::str::FromStr;

use crate::error::{arg_err, Error, Result};
use crate::parallel::{map_chunks, CompensatedSum, Execution};
use crate::qstate::StateVector;
use crate::{NumericPolicy, C64};

/// Pauli string as X/Z bit masks, using the statevector bit convention
/// (qubit `q` at bit `n - 1 - q`). Y on a qubit sets both bits; the
/// operator is `i^{|x∧z|} X^x Z^z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    num_qubits: usize,
    x: u64,
    z: u64,
}

const LETTERS: [char; 4] = ['I', 'X', 'Y', 'Z'];

impl PauliString {
    pub fn new(num_qubits: usize, x: u64, z: u64) -> Result<Self> {
        if num_qubits == 0 || num_qubits > 32 {
            return Err(arg_err!("unsupported Pauli length {num_qubits}"));
        }
        let full = (1u64 << num_qubits) - 1;
        if x & !full != 0 || z & !full != 0 {
            return Err(arg_err!("mask bits beyond qubit count {num_qubits}"));
        }
        Ok(Self { num_qubits, x, z })
    }

    pub fn identity(num_qubits: usize) -> Result<Self> {
        Self::new(num_qubits, 0, 0)
    }

    /// Index in `0..4^n`: base-4 word over (I, X, Y, Z) = (0, 1, 2, 3) with
    /// qubit 0 as the most significant digit.
    pub fn from_index(num_qubits: usize, index: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > 32 {
            return Err(arg_err!("unsupported Pauli length {num_qubits}"));
        }
        if (index as u128) >= 1u128 << (2 * num_qubits) {
            return Err(arg_err!("Pauli index {index} out of range"));
        }
        let (mut x, mut z) = (0u64, 0u64);
        for q in 0..num_qubits {
            let bit = 1u64 << (num_qubits - 1 - q);
            match (index >> (2 * (num_qubits - 1 - q))) & 3 {
                1 => x |= bit,
                2 => {
                    x |= bit;
                    z |= bit
                }
                3 => z |= bit,
                _ => {}
            }
        }
        Ok(Self { num_qubits, x, z })
    }

    pub fn index(&self) -> usize {
        (0..self.num_qubits).fold(0, |acc, q| (acc << 2) | self.digit(q))
    }

    fn digit(&self, q: usize) -> usize {
        let s = self.num_qubits - 1 - q;
        match ((self.x >> s) & 1, (self.z >> s) & 1) {
            (0, 0) => 0,
            (1, 0) => 1,
            (1, 1) => 2,
            _ => 3,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    /// i^{|x∧z|}
    fn global_phase(&self) -> C64 {
        match (self.x & self.z).count_ones() % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    }

    /// `P|b⟩ = phase · |b'⟩`; returns `(b', phase)`.
    #[inline]
    pub fn apply_to_basis(&self, b: usize) -> (usize, C64) {
        let sign = if (b as u64 & self.z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        (b ^ self.x as usize, self.global_phase() * sign)
    }

    /// Trace of the operator: `2^n` for the identity, zero otherwise.
    pub fn trace(&self) -> f64 {
        if self.x == 0 && self.z == 0 {
            (1u64 << self.num_qubits) as f64
        } else {
            0.0
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.num_qubits {
            write!(f, "{}", LETTERS[self.digit(q)])?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let n = s.chars().count();
        let index = s.chars().try_fold(0usize, |acc, ch| {
            let d = LETTERS
                .iter()
                .position(|&l| l == ch.to_ascii_uppercase())
                .ok_or_else(|| arg_err!("invalid Pauli letter {ch:?}"))?;
            Ok::<_, Error>((acc << 2) | d)
        })?;
        Self::from_index(n, index)
    }
}

/// ⟨ψ|P|ψ⟩ in O(2^n) via bit masks.
pub fn pauli_expectation(state: &StateVector, p: &PauliString) -> Result<f64> {
    if state.num_qubits() != p.num_qubits() {
        return Err(arg_err!(
            "Pauli on {} qubits applied to a {}-qubit state",
            p.num_qubits(),
            state.num_qubits()
        ));
    }
    Ok(expectation_unchecked(state.amplitudes(), p.x as usize, p.z as usize, p.global_phase()))
}

#[inline]
fn expectation_unchecked(amps: &[C64], x: usize, z: usize, phase: C64) -> f64 {
    // Σ_b conj(ψ_{b⊕x}) (−1)^{|b∧z|} ψ_b
    let mut acc = C64::new(0.0, 0.0);
    for (b, &a) in amps.iter().enumerate() {
        let term = amps[b ^ x].conj() * a;
        if (b & z).count_ones() & 1 == 1 {
            acc -= term;
        } else {
            acc += term;
        }
    }
    // P is Hermitian; the imaginary residue is rounding noise
    (phase * acc).re
}

/// Ξ(ψ): one entry per Pauli string, indexed by [`PauliString::index`].
#[derive(Clone, Debug, PartialEq)]
pub struct XiVector {
    num_qubits: usize,
    entries: Vec<f64>,
}

impl XiVector {
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, p: &PauliString) -> f64 {
        self.entries[p.index()]
    }

    /// Σ_P Ξ_P, compensated, ascending Pauli index.
    pub fn sum(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        self.entries.iter().for_each(|&e| acc.add(e));
        acc.value()
    }

    /// ‖Ξ‖₂², compensated, ascending Pauli index.
    pub fn norm_sq(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        self.entries.iter().for_each(|&e| acc.add(e * e));
        acc.value()
    }
}

const XI_CHUNK: usize = 256;

pub fn xi_vector(state: &StateVector) -> Result<XiVector> {
    xi_vector_with(state, Execution::Parallel, &NumericPolicy::default())
}

/// Full Ξ sweep, O(8^n). Chunks of Pauli indices may run on different
/// threads; every entry is computed independently so the output does not
/// depend on the schedule.
pub fn xi_vector_with(state: &StateVector, exec: Execution, policy: &NumericPolicy) -> Result<XiVector> {
    let n = state.num_qubits();
    if n > policy.max_xi_qubits {
        return Err(Error::Resource(format!(
            "Xi sweep over {n} qubits exceeds the cap of {}",
            policy.max_xi_qubits
        )));
    }
    let count = 1usize << (2 * n);
    let inv_dim = 1.0 / (1usize << n) as f64;
    let amps = state.amplitudes();
    let chunks = map_chunks(exec, count, XI_CHUNK, |range| {
        range
            .map(|idx| {
                let p = PauliString::from_index(n, idx).expect("index in range");
                let e = expectation_unchecked(amps, p.x as usize, p.z as usize, p.global_phase());
                inv_dim * e * e
            })
            .collect::<Vec<_>>()
    });
    Ok(XiVector { num_qubits: n, entries: chunks.concat() })
}

/// M_lin(ψ) = 1 − 2^n ‖Ξ(ψ)‖².
pub fn stabilizer_linear_entropy(state: &StateVector) -> Result<f64> {
    stabilizer_linear_entropy_with(state, Execution::Parallel, &NumericPolicy::default())
}

pub fn stabilizer_linear_entropy_with(
    state: &StateVector,
    exec: Execution,
    policy: &NumericPolicy,
) -> Result<f64> {
    let xi = xi_vector_with(state, exec, policy)?;
    Ok(1.0 - (1usize << state.num_qubits()) as f64 * xi.norm_sq())
}

/// Closed form for the product state 2^{-n/2}(|0⟩ + e^{iθ}|1⟩)^{⊗n}:
/// `1 − ((1 + cos⁴θ + sin⁴θ)/2)^n`.
pub fn product_phase_magic(n: usize, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let per_qubit = (1.0 + c.powi(4) + s.powi(4)) / 2.0;
    1.0 - per_qubit.powi(n as i32)
}

/// Smallest θ in [0, π/4] with `product_phase_magic(n, θ) = target`.
pub fn theta_for_magic(n: usize, target: f64) -> Result<f64> {
    let max = product_phase_magic(n, std::f64::consts::FRAC_PI_4);
    if !(0.0..=max).contains(&target) {
        return Err(arg_err!(
            "magic {target} unreachable by an {n}-qubit product phase state (max {max})"
        ));
    }
    if target == 0.0 {
        return Ok(0.0);
    }
    // monotone increasing on [0, π/4]
    let (mut lo, mut hi) = (0.0f64, std::f64::consts::FRAC_PI_4);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if product_phase_magic(n, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
