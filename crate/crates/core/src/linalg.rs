//! Small dense helpers on top of `nalgebra`.

use nalgebra::DMatrix;

use crate::C64;

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Trace norm of a Hermitian matrix, `Σ |λ_i|`.
pub fn hermitian_trace_norm(m: &DMatrix<C64>) -> f64 {
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .map(|l| l.abs())
        .sum()
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermiticity_defect(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn trace(m: &DMatrix<C64>) -> C64 {
    m.diagonal().iter().sum()
}

/// `Tr(m²)` for Hermitian `m`, i.e. the squared Frobenius norm.
pub fn trace_of_square(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// `‖a − b‖_max`.
pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Kronecker product of two vectors, `a ⊗ b` with `a` the most significant factor.
pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        out.extend(b.iter().map(|y| x * y));
    }
    out
}

/// `v^{⊗k}`.
pub fn tensor_power(v: &[C64], k: usize) -> Vec<C64> {
    let mut out = Vec::new();
    tensor_power_into(v, k, &mut out);
    out
}

/// [`tensor_power`] into a reusable buffer.
pub fn tensor_power_into(v: &[C64], k: usize, out: &mut Vec<C64>) {
    let d = v.len();
    out.clear();
    out.push(C64::new(1.0, 0.0));
    for _ in 0..k {
        let len = out.len();
        out.resize(len * d, C64::new(0.0, 0.0));
        for i in (0..len).rev() {
            let x = out[i];
            for (j, y) in v.iter().enumerate().rev() {
                out[i * d + j] = x * y;
            }
        }
    }
}
