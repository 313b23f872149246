//! Small dense Hermitian helpers shared by the SDP solver and the phase
//! optimizer.

use crate::{CMatrix, CVector, C64};
use nalgebra::SymmetricEigen;

/// `Tr(A B)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    debug_assert_eq!(a.nrows(), b.ncols());
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// `b b^H`.
pub fn outer(b: &CVector) -> CMatrix {
    b * b.adjoint()
}

/// `(M + M^H) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Largest deviation from Hermitian symmetry.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    (m - m.adjoint())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Eigenvalues (descending) and matching unit eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, Vec<CVector>) {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    // Stable sort keeps the solver's ordering among exact ties.
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = idx
        .iter()
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .collect();
    (values, vectors)
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = hermitian_part(m)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Rotates `u` so its largest-magnitude entry (first on ties) is real and positive.
pub fn normalize_global_phase(u: &CVector) -> CVector {
    let peak = u.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return u.clone();
    }
    let pivot = u
        .iter()
        .position(|z| z.norm() >= peak * (1.0 - 1e-12))
        .unwrap_or(0);
    let rot = u[pivot].conj() / u[pivot].norm();
    u * rot
}

/// Largest eigenvalue and a deterministic unit eigenvector for it.
///
/// Among numerically tied top eigenvalues, each candidate is phase
/// normalized and the one with the lexicographically largest real part wins.
pub fn principal_eigenpair(m: &CMatrix) -> (f64, CVector) {
    let (values, vectors) = hermitian_eigen(m);
    let top = values[0];
    let tol = 1e-10 * top.abs().max(f64::MIN_POSITIVE);
    let mut best = normalize_global_phase(&vectors[0]);
    for (value, vector) in values.iter().zip(vectors.iter()).skip(1) {
        if top - value > tol {
            break;
        }
        let cand = normalize_global_phase(vector);
        if lexicographic_re_gt(&cand, &best) {
            best = cand;
        }
    }
    (top, best)
}

fn lexicographic_re_gt(a: &CVector, b: &CVector) -> bool {
    for (x, y) in a.iter().zip(b.iter()) {
        let d = x.re - y.re;
        if d.abs() > 1e-12 {
            return d > 0.0;
        }
    }
    false
}
