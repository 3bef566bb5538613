//! Dense complex-matrix helpers on top of nalgebra: tensor powers,
//! permutation operators on `(C^d)^{⊗t}` and Hermitian spectra.
//!
//! Tensor factor 0 is the most significant digit of a composite index, the
//! same convention `kron` uses.

use nalgebra::DMatrix;

use crate::C64;

pub type CMatrix = DMatrix<C64>;

pub fn zeros(n: usize) -> CMatrix {
    CMatrix::zeros(n, n)
}

/// |v⟩^{⊗t} as a flat vector of length len(v)^t.
pub fn tensor_power(v: &[C64], t: usize) -> Vec<C64> {
    let mut out = vec![C64::new(1.0, 0.0)];
    for _ in 0..t {
        let mut next = Vec::with_capacity(out.len() * v.len());
        for a in &out {
            for b in v {
                next.push(a * b);
            }
        }
        out = next;
    }
    out
}

/// m += w · |v⟩⟨v|
pub fn add_weighted_projector(m: &mut CMatrix, v: &[C64], w: f64) {
    let n = v.len();
    debug_assert_eq!(m.nrows(), n);
    for c in 0..n {
        let vc = v[c].conj() * w;
        if vc == C64::new(0.0, 0.0) {
            continue;
        }
        let col = m.column_mut(c);
        for (r, entry) in col.into_iter().enumerate() {
            *entry += v[r] * vc;
        }
    }
}

/// All permutations of `0..t` in lexicographic order.
pub fn permutations(t: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for k in 0..used.len() {
            if !used[k] {
                used[k] = true;
                prefix.push(k);
                rec(prefix, used, out);
                prefix.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(t), &mut vec![false; t], &mut out);
    out
}

/// For each composite index `i` of `(C^d)^{⊗t}`, the index `T_ρ` maps it to:
/// the tensor factor in slot `k` moves to slot `perm[k]`.
pub fn permuted_indices(d: usize, t: usize, perm: &[usize]) -> Vec<usize> {
    assert_eq!(perm.len(), t);
    let n = d.pow(t as u32);
    let mut digits = vec![0usize; t];
    let mut out_digits = vec![0usize; t];
    (0..n)
        .map(|mut i| {
            for k in (0..t).rev() {
                digits[k] = i % d;
                i /= d;
            }
            for k in 0..t {
                out_digits[perm[k]] = digits[k];
            }
            out_digits.iter().fold(0, |acc, &x| acc * d + x)
        })
        .collect()
}

/// Dense permutation operator T_ρ on `(C^d)^{⊗t}`.
pub fn permutation_operator(d: usize, t: usize, perm: &[usize]) -> CMatrix {
    let map = permuted_indices(d, t, perm);
    let mut m = zeros(map.len());
    for (i, &j) in map.iter().enumerate() {
        m[(j, i)] = C64::new(1.0, 0.0);
    }
    m
}

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// max |M − M†|
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for r in 0..n {
        for c in r..n {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

pub fn trace(m: &CMatrix) -> C64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

/// Eigenvalues of a Hermitian matrix, ascending. Only the lower triangle is
/// trusted, so the input is symmetrized first.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}
