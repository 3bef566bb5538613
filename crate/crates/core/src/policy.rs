use serde::{Deserialize, Serialize};

/// Every tolerance and size guard used across the crate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericPolicy {
    /// Allowed deviation of a state norm from one.
    pub norm_tol: f64,
    /// Tolerance for algebraic identities (unitarity, involutions).
    pub identity_tol: f64,
    /// Largest row count of a dense moment operator.
    pub max_moment_dim: usize,
    /// Largest qubit count for the full Ξ sweep (cost grows as 8^n).
    pub max_xi_qubits: usize,
    /// Largest total qubit count an experiment may request.
    pub max_total_qubits: usize,
}

impl Default for NumericPolicy {
    fn default() -> Self {
        Self {
            norm_tol: 1e-10,
            identity_tol: 1e-12,
            max_moment_dim: 4096,
            max_xi_qubits: 10,
            max_total_qubits: 12,
        }
    }
}
