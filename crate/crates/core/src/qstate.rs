//! Dense statevectors over N qubits.
//!
//! Qubit 0 is the most significant bit of the amplitude index, so qubit `q`
//! of an `n`-qubit register lives at bit `n - 1 - q`. Gates are applied in
//! place over strided index pairs; no 2^N × 2^N matrix is ever built.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::Rng;

use crate::error::{arg_err, Result};
use crate::C64;

/// Dense unitary on one (2×2) or two (4×4) qubits, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct GateMatrix {
    dim: usize,
    entries: Vec<C64>,
}

impl GateMatrix {
    /// Build from row-major entries; rejects non-unitary input.
    pub fn new(dim: usize, entries: Vec<C64>, tol: f64) -> Result<Self> {
        if dim != 2 && dim != 4 {
            return Err(arg_err!("gate dimension must be 2 or 4, got {dim}"));
        }
        if entries.len() != dim * dim {
            return Err(arg_err!("expected {} entries, got {}", dim * dim, entries.len()));
        }
        let g = Self { dim, entries };
        let dev = g.unitarity_defect();
        if dev > tol {
            return Err(arg_err!("gate is not unitary (max |U†U - I| = {dev:e})"));
        }
        Ok(g)
    }

    fn raw(dim: usize, entries: Vec<C64>) -> Self {
        Self { dim, entries }
    }

    pub fn hadamard() -> Self {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        Self::raw(2, vec![h, h, h, -h])
    }

    /// The Clifford phase gate diag(1, i).
    pub fn phase_s() -> Self {
        Self::diag_phase(std::f64::consts::FRAC_PI_2)
    }

    /// diag(1, e^{iπ/4}); not a Clifford gate.
    pub fn phase_t() -> Self {
        Self::diag_phase(std::f64::consts::FRAC_PI_4)
    }

    pub fn diag_phase(phi: f64) -> Self {
        let z = C64::new(0.0, 0.0);
        Self::raw(2, vec![C64::new(1.0, 0.0), z, z, C64::from_polar(1.0, phi)])
    }

    pub fn pauli_x() -> Self {
        let (z, o) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        Self::raw(2, vec![z, o, o, z])
    }

    /// CNOT with the first qubit of the pair as control.
    pub fn cnot() -> Self {
        let mut m = vec![C64::new(0.0, 0.0); 16];
        for (r, c) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
            m[r * 4 + c] = C64::new(1.0, 0.0);
        }
        Self::raw(4, m)
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = vec![C64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            m[i * dim + i] = C64::new(1.0, 0.0);
        }
        Self::raw(dim, m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> C64 {
        self.entries[r * self.dim + c]
    }

    pub fn dagger(&self) -> Self {
        let d = self.dim;
        let mut m = vec![C64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for c in 0..d {
                m[c * d + r] = self.entries[r * d + c].conj();
            }
        }
        Self::raw(d, m)
    }

    /// Kronecker product of two single-qubit gates (`self` on the first qubit).
    pub fn kron(&self, other: &Self) -> Result<Self> {
        if self.dim != 2 || other.dim != 2 {
            return Err(arg_err!("kron is only defined here for 2x2 factors"));
        }
        let mut m = vec![C64::new(0.0, 0.0); 16];
        for r in 0..4 {
            for c in 0..4 {
                m[r * 4 + c] = self.at(r / 2, c / 2) * other.at(r % 2, c % 2);
            }
        }
        Ok(Self::raw(4, m))
    }

    /// max |(U†U − I)_{rc}|
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for r in 0..d {
            for c in 0..d {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..d {
                    acc += self.at(k, r).conj() * self.at(k, c);
                }
                if r == c {
                    acc -= 1.0;
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// Computational basis state from a bitstring such as `"010"`
    /// (leftmost character is qubit 0).
    pub fn basis_state(n: usize, bits: &str) -> Result<Self> {
        if n == 0 {
            return Err(arg_err!("qubit count must be at least 1"));
        }
        if bits.chars().count() != n {
            return Err(arg_err!("bitstring {bits:?} has length {}, expected {n}", bits.len()));
        }
        let mut index = 0usize;
        for ch in bits.chars() {
            index <<= 1;
            match ch {
                '0' => {}
                '1' => index |= 1,
                other => return Err(arg_err!("invalid bit character {other:?}")),
            }
        }
        Self::basis_index(n, index)
    }

    pub fn basis_index(n: usize, index: usize) -> Result<Self> {
        if n == 0 || n >= usize::BITS as usize {
            return Err(arg_err!("unsupported qubit count {n}"));
        }
        let dim = 1usize << n;
        if index >= dim {
            return Err(arg_err!("basis index {index} out of range for {n} qubits"));
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Self { num_qubits: n, amplitudes })
    }

    /// 2^{-n/2} (|0⟩ + e^{iθ}|1⟩)^{⊗n}; amplitude at `b` is
    /// 2^{-n/2} e^{iθ·popcount(b)}.
    pub fn product_phase_state(n: usize, theta: f64) -> Result<Self> {
        if n == 0 || n >= usize::BITS as usize {
            return Err(arg_err!("unsupported qubit count {n}"));
        }
        let dim = 1usize << n;
        let scale = (dim as f64).sqrt().recip();
        let phases: Vec<C64> = (0..=n)
            .map(|k| C64::from_polar(scale, theta * k as f64))
            .collect();
        let amplitudes = (0..dim).map(|b| phases[b.count_ones() as usize]).collect();
        Ok(Self { num_qubits: n, amplitudes })
    }

    /// Wrap raw amplitudes; the length must be a power of two ≥ 2 and the
    /// norm must be one within `norm_tol`.
    pub fn from_amplitudes(amplitudes: Vec<C64>, norm_tol: f64) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(arg_err!("amplitude count {dim} is not a power of two >= 2"));
        }
        let s = Self { num_qubits: dim.trailing_zeros() as usize, amplitudes };
        let norm = s.norm();
        if (norm - 1.0).abs() > norm_tol {
            return Err(arg_err!("state norm {norm} deviates from 1"));
        }
        Ok(s)
    }

    /// Rescale arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(arg_err!("amplitude count {dim} is not a power of two >= 2"));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(arg_err!("cannot normalize a zero or non-finite vector"));
        }
        let amplitudes = amplitudes.into_iter().map(|a| a / norm).collect();
        Ok(Self { num_qubits: dim.trailing_zeros() as usize, amplitudes })
    }

    /// Haar-random pure state (normalized complex Gaussian vector).
    pub fn haar_random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        if n == 0 || n >= usize::BITS as usize {
            return Err(arg_err!("unsupported qubit count {n}"));
        }
        let amps = (0..1usize << n)
            .map(|_| {
                // Box–Muller
                let u1: f64 = 1.0 - rng.random::<f64>();
                let u2: f64 = rng.random::<f64>();
                C64::from_polar((-2.0 * u1.ln()).sqrt(), std::f64::consts::TAU * u2)
            })
            .collect();
        Self::normalized(amps)
    }

    /// Caller guarantees a power-of-two length ≥ 2 and unit norm.
    pub(crate) fn from_amplitudes_unchecked(amplitudes: Vec<C64>) -> Self {
        debug_assert!(amplitudes.len() >= 2 && amplitudes.len().is_power_of_two());
        Self { num_qubits: amplitudes.len().trailing_zeros() as usize, amplitudes }
    }

    #[inline]
    pub(crate) fn inner_product_unchecked(&self, other: &Self) -> C64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ⟨self|other⟩, conjugating `self`.
    pub fn inner_product(&self, other: &Self) -> Result<C64> {
        if self.num_qubits != other.num_qubits {
            return Err(arg_err!(
                "qubit count mismatch: {} vs {}",
                self.num_qubits,
                other.num_qubits
            ));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Bit mask of qubit `q` in the amplitude index.
    #[inline]
    pub fn qubit_mask(&self, q: usize) -> usize {
        1usize << (self.num_qubits - 1 - q)
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.num_qubits {
            return Err(arg_err!("qubit {q} out of range for {} qubits", self.num_qubits));
        }
        Ok(())
    }

    pub fn apply_one_qubit(&mut self, gate: &GateMatrix, target: usize) -> Result<()> {
        if gate.dim() != 2 {
            return Err(arg_err!("expected a 2x2 gate, got {0}x{0}", gate.dim()));
        }
        self.check_qubit(target)?;
        let (u00, u01, u10, u11) = (gate.at(0, 0), gate.at(0, 1), gate.at(1, 0), gate.at(1, 1));
        let m = self.qubit_mask(target);
        let dim = self.dim();
        for block in (0..dim).step_by(2 * m) {
            for i in block..block + m {
                let a = self.amplitudes[i];
                let b = self.amplitudes[i | m];
                self.amplitudes[i] = u00 * a + u01 * b;
                self.amplitudes[i | m] = u10 * a + u11 * b;
            }
        }
        Ok(())
    }

    /// Apply a 4×4 gate to the ordered pair `(q1, q2)`; `q1` indexes the
    /// more significant bit of the gate's basis.
    pub fn apply_two_qubit(&mut self, gate: &GateMatrix, q1: usize, q2: usize) -> Result<()> {
        if gate.dim() != 4 {
            return Err(arg_err!("expected a 4x4 gate, got {0}x{0}", gate.dim()));
        }
        self.check_qubit(q1)?;
        self.check_qubit(q2)?;
        if q1 == q2 {
            return Err(arg_err!("two-qubit gate needs distinct qubits, got {q1} twice"));
        }
        let (m1, m2) = (self.qubit_mask(q1), self.qubit_mask(q2));
        let u = gate.entries();
        for i in 0..self.dim() {
            if i & (m1 | m2) != 0 {
                continue;
            }
            let idx = [i, i | m2, i | m1, i | m1 | m2];
            let v = idx.map(|k| self.amplitudes[k]);
            for (r, &k) in idx.iter().enumerate() {
                self.amplitudes[k] =
                    u[r * 4] * v[0] + u[r * 4 + 1] * v[1] + u[r * 4 + 2] * v[2] + u[r * 4 + 3] * v[3];
            }
        }
        Ok(())
    }

    pub fn apply_h(&mut self, target: usize) -> Result<()> {
        self.check_qubit(target)?;
        let m = self.qubit_mask(target);
        for block in (0..self.dim()).step_by(2 * m) {
            for i in block..block + m {
                let a = self.amplitudes[i];
                let b = self.amplitudes[i | m];
                self.amplitudes[i] = (a + b) * FRAC_1_SQRT_2;
                self.amplitudes[i | m] = (a - b) * FRAC_1_SQRT_2;
            }
        }
        Ok(())
    }

    /// Multiply the |1⟩ component of `target` by `phase`.
    pub fn apply_diag_phase(&mut self, target: usize, phase: C64) -> Result<()> {
        self.check_qubit(target)?;
        let m = self.qubit_mask(target);
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if i & m != 0 {
                *a *= phase;
            }
        }
        Ok(())
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(arg_err!("CNOT needs distinct qubits, got {control} twice"));
        }
        let (mc, mt) = (self.qubit_mask(control), self.qubit_mask(target));
        for i in 0..self.dim() {
            if i & mc != 0 && i & mt == 0 {
                self.amplitudes.swap(i, i | mt);
            }
        }
        Ok(())
    }
}
