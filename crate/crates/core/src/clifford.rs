//! Random two-qubit Clifford circuits and brute-force Clifford groups.
//!
//! A circuit layer picks an ordered pair `(q1, q2)` of distinct qubits and
//! one gate from {CNOT, H⊗I, S⊗I, I⊗H, I⊗S}; "first" gates act on `q1`,
//! "second" gates on `q2`, and CNOT uses `q1` as control.

use std::collections::hash_map::Entry;
use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ensemble::MomentOperator;
use crate::error::{arg_err, Error, Result};
use crate::linalg::{self, CMatrix};
use crate::parallel::{map_chunks, CompensatedSum, Execution};
use crate::qstate::StateVector;
use crate::rng::rng_from_seed;
use crate::{NumericPolicy, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GateId {
    Cnot,
    HFirst,
    SFirst,
    HSecond,
    SSecond,
}

impl GateId {
    pub const ALL: [GateId; 5] =
        [GateId::Cnot, GateId::HFirst, GateId::SFirst, GateId::HSecond, GateId::SSecond];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GateInstruction {
    pub gate: GateId,
    pub pair: (usize, usize),
}

/// Which diagonal gate plays the role of "S".
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseConvention {
    /// diag(1, i)
    #[default]
    Clifford,
    /// diag(1, e^{iπ/4}). Not Clifford; only for comparison runs.
    LiteralT,
}

impl PhaseConvention {
    pub fn phase(self) -> C64 {
        match self {
            PhaseConvention::Clifford => C64::new(0.0, 1.0),
            PhaseConvention::LiteralT => C64::from_polar(1.0, std::f64::consts::FRAC_PI_4),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CliffordCircuit {
    num_qubits: usize,
    phase: PhaseConvention,
    layers: Vec<GateInstruction>,
}

impl CliffordCircuit {
    pub fn new(num_qubits: usize, phase: PhaseConvention, layers: Vec<GateInstruction>) -> Result<Self> {
        for (k, ins) in layers.iter().enumerate() {
            let (a, b) = ins.pair;
            if a == b || a >= num_qubits || b >= num_qubits {
                return Err(arg_err!("layer {k}: invalid pair ({a}, {b}) for {num_qubits} qubits"));
            }
        }
        Ok(Self { num_qubits, phase, layers })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[GateInstruction] {
        &self.layers
    }

    pub fn phase_convention(&self) -> PhaseConvention {
        self.phase
    }

    /// Apply all layers in order, in place.
    pub fn apply_in_place(&self, state: &mut StateVector) -> Result<()> {
        if state.num_qubits() != self.num_qubits {
            return Err(arg_err!(
                "circuit acts on {} qubits, state has {}",
                self.num_qubits,
                state.num_qubits()
            ));
        }
        let s = self.phase.phase();
        for ins in &self.layers {
            let (a, b) = ins.pair;
            match ins.gate {
                GateId::Cnot => state.apply_cnot(a, b)?,
                GateId::HFirst => state.apply_h(a)?,
                GateId::HSecond => state.apply_h(b)?,
                GateId::SFirst => state.apply_diag_phase(a, s)?,
                GateId::SSecond => state.apply_diag_phase(b, s)?,
            }
        }
        Ok(())
    }
}

/// Sample `depth` layers with the Clifford phase gate.
pub fn sample_circuit(seed: u64, n: usize, depth: usize) -> Result<CliffordCircuit> {
    sample_circuit_with(seed, n, depth, PhaseConvention::Clifford)
}

pub fn sample_circuit_with(
    seed: u64,
    n: usize,
    depth: usize,
    phase: PhaseConvention,
) -> Result<CliffordCircuit> {
    if n < 2 {
        return Err(arg_err!("circuits need at least 2 qubits, got {n}"));
    }
    let mut rng = rng_from_seed(seed);
    let layers = (0..depth)
        .map(|_| {
            let k = rng.random_range(0..n * (n - 1));
            let first = k / (n - 1);
            let mut second = k % (n - 1);
            if second >= first {
                second += 1;
            }
            let gate = GateId::ALL[rng.random_range(0..GateId::ALL.len())];
            GateInstruction { gate, pair: (first, second) }
        })
        .collect();
    Ok(CliffordCircuit { num_qubits: n, phase, layers })
}

pub fn apply_circuit(circuit: &CliffordCircuit, state: &StateVector) -> Result<StateVector> {
    let mut out = state.clone();
    circuit.apply_in_place(&mut out)?;
    Ok(out)
}

/// One representative per Clifford element modulo global phase.
#[derive(Clone, Debug)]
pub struct CliffordGroupTable {
    num_qubits: usize,
    unitaries: Vec<CMatrix>,
    index: HashMap<Vec<i64>, usize>,
}

type Key = Vec<i64>;

fn canonicalize(m: &CMatrix) -> (CMatrix, Key) {
    // entries are 0 or have modulus >= 1/2, so 1e-6 cleanly separates zeros
    let first = m.transpose().iter().copied().find(|z| z.norm() > 1e-6).unwrap_or(C64::new(1.0, 0.0));
    let rot = first.conj() / first.norm();
    let c = m * rot;
    let key = c
        .transpose()
        .iter()
        .flat_map(|z| [(z.re * 1e9).round() as i64, (z.im * 1e9).round() as i64])
        .collect();
    (c, key)
}

impl CliffordGroupTable {
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn len(&self) -> usize {
        self.unitaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unitaries.is_empty()
    }

    pub fn unitaries(&self) -> &[CMatrix] {
        &self.unitaries
    }

    /// Index of `u` in the table, up to global phase.
    pub fn position(&self, u: &CMatrix) -> Option<usize> {
        self.index.get(&canonicalize(u).1).copied()
    }

    pub fn contains(&self, u: &CMatrix) -> bool {
        self.position(u).is_some()
    }

    /// U|ψ⟩ for the `k`-th element.
    pub fn apply(&self, k: usize, psi: &StateVector) -> Result<StateVector> {
        if psi.num_qubits() != self.num_qubits {
            return Err(arg_err!("table is for {} qubits, state has {}", self.num_qubits, psi.num_qubits()));
        }
        Ok(self.apply_unchecked(k, psi))
    }

    fn apply_unchecked(&self, k: usize, psi: &StateVector) -> StateVector {
        let u = &self.unitaries[k];
        let v = psi.amplitudes();
        let out = (0..v.len()).map(|r| (0..v.len()).map(|c| u[(r, c)] * v[c]).sum()).collect();
        StateVector::from_amplitudes_unchecked(out)
    }
}

fn generators(n: usize) -> Vec<CMatrix> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let (o, z, i) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 1.0));
    let hm = CMatrix::from_row_slice(2, 2, &[o * h, o * h, o * h, -o * h]);
    let sm = CMatrix::from_row_slice(2, 2, &[o, z, z, i]);
    if n == 1 {
        return vec![hm, sm];
    }
    let id = CMatrix::identity(2, 2);
    let mut cnot01 = linalg::zeros(4);
    let mut cnot10 = linalg::zeros(4);
    for (r, c) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
        cnot01[(r, c)] = o;
    }
    for (r, c) in [(0, 0), (3, 1), (2, 2), (1, 3)] {
        cnot10[(r, c)] = o;
    }
    vec![hm.kronecker(&id), id.kronecker(&hm), sm.kronecker(&id), id.kronecker(&sm), cnot01, cnot10]
}

/// Breadth-first closure of {H_q, S_q, CNOT_{q1 q2}} for n ∈ {1, 2}.
pub fn enumerate_clifford_group(n: usize) -> Result<CliffordGroupTable> {
    if n == 0 {
        return Err(arg_err!("qubit count must be at least 1"));
    }
    if n > 2 {
        return Err(Error::Unsupported(format!("Clifford group enumeration for {n} qubits")));
    }
    let gens = generators(n);
    let (id, key) = canonicalize(&CMatrix::identity(1 << n, 1 << n));
    let mut unitaries = vec![id];
    let mut index = HashMap::from([(key, 0)]);
    let mut head = 0;
    while head < unitaries.len() {
        let u = unitaries[head].clone();
        for g in &gens {
            let (c, key) = canonicalize(&(g * &u));
            if let Entry::Vacant(slot) = index.entry(key) {
                slot.insert(unitaries.len());
                unitaries.push(c);
            }
        }
        head += 1;
    }
    Ok(CliffordGroupTable { num_qubits: n, unitaries, index })
}

const GROUP_CHUNK: usize = 256;

/// (1/|G|) Σ_C (C|ψ⟩⟨ψ|C†)^{⊗t}.
pub fn group_average_moment(
    table: &CliffordGroupTable,
    psi: &StateVector,
    t: usize,
    exec: Execution,
    policy: &NumericPolicy,
) -> Result<MomentOperator> {
    if !(1..=4).contains(&t) {
        return Err(arg_err!("moment order {t} outside 1..=4"));
    }
    if psi.num_qubits() != table.num_qubits {
        return Err(arg_err!("table is for {} qubits, state has {}", table.num_qubits, psi.num_qubits()));
    }
    let d = psi.dim();
    let dim = d.pow(t as u32);
    if dim > policy.max_moment_dim {
        return Err(Error::Resource(format!(
            "group moment of dimension {dim} exceeds the cap of {}",
            policy.max_moment_dim
        )));
    }
    let w = (table.len() as f64).recip();
    let partials = map_chunks(exec, table.len(), GROUP_CHUNK, |range| {
        let mut m = linalg::zeros(dim);
        for k in range {
            let phi = table.apply_unchecked(k, psi);
            linalg::add_weighted_projector(&mut m, &linalg::tensor_power(phi.amplitudes(), t), w);
        }
        m
    });
    let mut total = linalg::zeros(dim);
    for p in partials {
        total += p;
    }
    MomentOperator::new(t, d, total)
}

/// (1/|G|) Σ_C f(C|ψ⟩), summed in table order.
pub fn group_average<F>(table: &CliffordGroupTable, psi: &StateVector, exec: Execution, f: F) -> Result<f64>
where
    F: Fn(&StateVector) -> Result<f64> + Sync + Send,
{
    if psi.num_qubits() != table.num_qubits {
        return Err(arg_err!("table is for {} qubits, state has {}", table.num_qubits, psi.num_qubits()));
    }
    let partials = map_chunks(exec, table.len(), GROUP_CHUNK, |range| {
        range.map(|k| f(&table.apply_unchecked(k, psi))).collect::<Result<Vec<f64>>>()
    });
    let mut acc = CompensatedSum::new();
    for chunk in partials {
        chunk?.into_iter().for_each(|x| acc.add(x));
    }
    Ok(acc.value() / table.len() as f64)
}
