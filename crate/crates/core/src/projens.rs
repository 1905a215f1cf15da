//! Measurement bases on B, projected ensembles on A, and their moment operators.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::qstate::{integer_count, Bipartition, StateVector};
use crate::C64;

/// Largest moment-operator dimension `d_A^k` accepted by default.
pub const DEFAULT_MOMENT_CAP: usize = 4096;

/// Born weights below this are treated as numerically zero.
pub const DEFAULT_P_FLOOR: f64 = 1e-14;

/// Largest `k` for which [`haar_moment`] sums over `S_k` explicitly.
pub const MAX_HAAR_ORDER: usize = 4;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Single-qubit measurement axis. Outcome bit 0 is the eigenstate along `+n̂`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Axis {
    Z,
    X,
    Bloch { theta: f64, phi: f64 },
}

impl Axis {
    /// Columns `|n₊⟩, |n₋⟩` of the frame unitary, row-major.
    pub fn frame(&self) -> [[C64; 2]; 2] {
        match *self {
            Axis::Z => [[ONE, ZERO], [ZERO, ONE]],
            Axis::X => {
                let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                [[h, h], [h, -h]]
            }
            Axis::Bloch { theta, phi } => {
                let (s, c) = (theta / 2.0).sin_cos();
                let e = C64::from_polar(1.0, phi);
                [[C64::new(c, 0.0), C64::new(s, 0.0)], [e * s, -e * c]]
            }
        }
    }

    /// Single-qubit IPR of the `+n̂` eigenstate, `cos⁴(θ/2) + sin⁴(θ/2)`.
    pub fn ipr(&self) -> f64 {
        let f = self.frame();
        f[0][0].norm_sqr().powi(2) + f[1][0].norm_sqr().powi(2)
    }
}

/// Per-qubit measurement axes over subsystem B, in qubit order.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementBasis {
    axes: Vec<Axis>,
}

impl MeasurementBasis {
    pub fn from_axes(axes: Vec<Axis>) -> Self {
        Self { axes }
    }

    /// Every B qubit measured along `(θ_m, φ_m)`.
    pub fn uniform(n_b: usize, theta: f64, phi: f64) -> Self {
        Self {
            axes: vec![Axis::Bloch { theta, phi }; n_b],
        }
    }

    pub fn all_z(n_b: usize) -> Self {
        Self {
            axes: vec![Axis::Z; n_b],
        }
    }

    pub fn all_x(n_b: usize) -> Self {
        Self {
            axes: vec![Axis::X; n_b],
        }
    }

    /// Z on the first `(1−α_m)N_B` qubits of B and X on the trailing `α_m N_B`.
    pub fn mixed(n_b: usize, alpha_m: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha_m) {
            return invalid(format!("alpha_m={alpha_m} outside [0, 1]"));
        }
        let n_x = integer_count(alpha_m, n_b).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "alpha_m*N_B = {} is not an integer",
                alpha_m * n_b as f64
            ))
        })?;
        Ok(Self::with_x_count(n_b, n_x))
    }

    /// Mixed tags with exactly `n_x` trailing X qubits.
    pub fn with_x_count(n_b: usize, n_x: usize) -> Self {
        let n_x = n_x.min(n_b);
        let mut axes = vec![Axis::Z; n_b - n_x];
        axes.extend(std::iter::repeat_n(Axis::X, n_x));
        Self { axes }
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn len(&self) -> usize {
        self.axes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axes.is_empty()
    }

    /// `IPR(|Φ_ν⟩)` of the all-`+` outcome, a product over qubits.
    pub fn ipr(&self) -> f64 {
        self.axes.iter().map(Axis::ipr).product()
    }
}

/// Rotates qubit `qubit` (0-based, most significant first) into the frame of `axis`,
/// i.e. applies `V†` so that amplitude at bit 0 is `⟨n₊|·⟩`.
pub fn rotate_qubit(amps: &mut [C64], num_qubits: usize, qubit: usize, axis: &Axis) {
    if matches!(axis, Axis::Z) {
        return;
    }
    let v = axis.frame();
    let (u00, u01, u10, u11) = (
        v[0][0].conj(),
        v[1][0].conj(),
        v[0][1].conj(),
        v[1][1].conj(),
    );
    let stride = 1usize << (num_qubits - 1 - qubit);
    for block in amps.chunks_exact_mut(2 * stride) {
        let (lo, hi) = block.split_at_mut(stride);
        for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x0, x1) = (*a0, *a1);
            *a0 = u00 * x0 + u01 * x1;
            *a1 = u10 * x0 + u11 * x1;
        }
    }
}

/// Born-weighted collection of normalized states on A, one per retained outcome on B.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectedEnsemble {
    d_a: usize,
    outcomes: Vec<u64>,
    probs: Vec<f64>,
    states: Vec<C64>,
}

impl ProjectedEnsemble {
    /// Assembles an ensemble from explicit entries, checking norms and total weight.
    pub fn from_entries(d_a: usize, entries: Vec<(u64, f64, Vec<C64>)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        let mut pe = Self {
            d_a,
            outcomes: Vec::with_capacity(entries.len()),
            probs: Vec::with_capacity(entries.len()),
            states: Vec::with_capacity(entries.len() * d_a),
        };
        for (nu, p, psi) in entries {
            if psi.len() != d_a {
                return Err(Error::DimensionMismatch {
                    expected: d_a,
                    got: psi.len(),
                });
            }
            if p < 0.0 {
                return invalid("negative probability");
            }
            let n2: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
            if (n2 - 1.0).abs() > 1e-10 {
                return Err(Error::NotNormalized(n2));
            }
            pe.outcomes.push(nu);
            pe.probs.push(p);
            pe.states.extend(psi);
        }
        let total: f64 = pe.probs.iter().sum();
        if (total - 1.0).abs() > 1e-8 {
            return invalid(format!("probabilities sum to {total}"));
        }
        Ok(pe)
    }

    /// Reads outcomes off a state already rotated into the measurement frame.
    pub fn from_rotated(rotated: &[C64], part: Bipartition, p_floor: f64) -> Result<Self> {
        let (d_a, d_b) = (part.d_a(), part.d_b());
        if rotated.len() != d_a * d_b {
            return Err(Error::DimensionMismatch {
                expected: d_a * d_b,
                got: rotated.len(),
            });
        }
        let mut weights = vec![0.0f64; d_b];
        for row in rotated.chunks_exact(d_b) {
            for (w, a) in weights.iter_mut().zip(row) {
                *w += a.norm_sqr();
            }
        }
        let retained: Vec<usize> = (0..d_b).filter(|&nu| weights[nu] >= p_floor).collect();
        if retained.is_empty() {
            return Err(Error::DegenerateEnsemble);
        }
        let total: f64 = retained.iter().map(|&nu| weights[nu]).sum();
        let mut states = Vec::with_capacity(retained.len() * d_a);
        for &nu in &retained {
            let scale = 1.0 / weights[nu].sqrt();
            states.extend((0..d_a).map(|i| rotated[i * d_b + nu] * scale));
        }
        Ok(Self {
            d_a,
            outcomes: retained.iter().map(|&nu| nu as u64).collect(),
            probs: retained.iter().map(|&nu| weights[nu] / total).collect(),
            states,
        })
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn outcomes(&self) -> &[u64] {
        &self.outcomes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn state(&self, i: usize) -> &[C64] {
        &self.states[i * self.d_a..(i + 1) * self.d_a]
    }

    /// `(outcome, p, ψ)` in ascending outcome order.
    pub fn entries(&self) -> impl Iterator<Item = (u64, f64, &[C64])> + '_ {
        self.outcomes
            .iter()
            .zip(&self.probs)
            .zip(self.states.chunks_exact(self.d_a))
            .map(|((&nu, &p), psi)| (nu, p, psi))
    }
}

/// Enumerates every outcome on B with the default probability floor.
pub fn build_projected_ensemble(
    state: &StateVector,
    part: Bipartition,
    basis: &MeasurementBasis,
) -> Result<ProjectedEnsemble> {
    build_projected_ensemble_with_floor(state, part, basis, DEFAULT_P_FLOOR)
}

pub fn build_projected_ensemble_with_floor(
    state: &StateVector,
    part: Bipartition,
    basis: &MeasurementBasis,
    p_floor: f64,
) -> Result<ProjectedEnsemble> {
    part.check(state)?;
    if basis.len() != part.n_b() {
        return Err(Error::DimensionMismatch {
            expected: part.n_b(),
            got: basis.len(),
        });
    }
    let n = state.num_qubits();
    let mut amps = state.amplitudes().to_vec();
    for (j, axis) in basis.axes().iter().enumerate() {
        rotate_qubit(&mut amps, n, part.n_a() + j, axis);
    }
    ProjectedEnsemble::from_rotated(&amps, part, p_floor)
}

/// Hermitian operator on `(ℂ^{d_A})^{⊗k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentOperator {
    d_a: usize,
    k: usize,
    matrix: DMatrix<C64>,
}

impl MomentOperator {
    /// Checks dimension, Hermiticity, unit trace and positivity.
    pub fn new(d_a: usize, k: usize, matrix: DMatrix<C64>) -> Result<Self> {
        let dim = checked_dim(d_a, k, usize::MAX)?;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: matrix.nrows(),
            });
        }
        if linalg::hermiticity_defect(&matrix) > 1e-10 {
            return invalid("moment operator is not Hermitian");
        }
        let tr = linalg::trace(&matrix);
        if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
            return invalid(format!("moment operator trace is {tr}"));
        }
        if linalg::hermitian_eigenvalues(&matrix)[0] < -1e-9 {
            return invalid("moment operator is not positive semidefinite");
        }
        Ok(Self { d_a, k, matrix })
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }
}

fn checked_dim(d_a: usize, k: usize, cap: usize) -> Result<usize> {
    if d_a == 0 || k == 0 {
        return invalid("moment needs d_A ≥ 1 and k ≥ 1");
    }
    let dim = u32::try_from(k)
        .ok()
        .and_then(|k| d_a.checked_pow(k))
        .filter(|&d| d <= cap)
        .ok_or(Error::TooLarge {
            what: "moment dimension d_A^k",
            value: d_a.saturating_pow(k.min(64) as u32),
            max: cap,
        })?;
    Ok(dim)
}

/// `ρ^(k) = Σ_ν p(ν) (|ψ_ν⟩⟨ψ_ν|)^{⊗k}` with the default dimension cap.
pub fn pe_moment(pe: &ProjectedEnsemble, k: usize) -> Result<MomentOperator> {
    pe_moment_with_cap(pe, k, DEFAULT_MOMENT_CAP)
}

pub fn pe_moment_with_cap(pe: &ProjectedEnsemble, k: usize, cap: usize) -> Result<MomentOperator> {
    let dim = checked_dim(pe.d_a(), k, cap)?;
    // Column-major upper triangle, mirrored at the end.
    let mut acc = vec![ZERO; dim * dim];
    let mut v = Vec::with_capacity(dim);
    for (_, p, psi) in pe.entries() {
        linalg::tensor_power_into(psi, k, &mut v);
        for j in 0..dim {
            let w = v[j].conj() * p;
            if w == ZERO {
                continue;
            }
            for (c, x) in acc[j * dim..=j * dim + j].iter_mut().zip(&v) {
                *c += x * w;
            }
        }
    }
    let mut matrix = DMatrix::from_vec(dim, dim, acc);
    for j in 0..dim {
        for i in 0..j {
            matrix[(j, i)] = matrix[(i, j)].conj();
        }
    }
    Ok(MomentOperator {
        d_a: pe.d_a(),
        k,
        matrix,
    })
}

/// Digits of `idx` in base `d`, most significant first.
fn digits(mut idx: usize, d: usize, k: usize) -> Vec<usize> {
    let mut out = vec![0; k];
    for slot in out.iter_mut().rev() {
        *slot = idx % d;
        idx /= d;
    }
    out
}

fn undigits(ds: &[usize], d: usize) -> usize {
    ds.iter().fold(0, |acc, &x| acc * d + x)
}

fn all_permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        // Lexicographic successor.
        let Some(i) = (1..k).rev().find(|&i| cur[i - 1] < cur[i]) else {
            break;
        };
        let j = (i..k).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

/// `Σ_{τ∈S_k} P_τ / (d_A(d_A+1)⋯(d_A+k−1))`, the normalized symmetric-subspace projector.
pub fn haar_moment(d_a: usize, k: usize) -> Result<MomentOperator> {
    if k > MAX_HAAR_ORDER {
        return Err(Error::TooLarge {
            what: "Haar moment order k",
            value: k,
            max: MAX_HAAR_ORDER,
        });
    }
    let dim = checked_dim(d_a, k, DEFAULT_MOMENT_CAP)?;
    let rising: f64 = (0..k).map(|j| (d_a + j) as f64).product();
    let perms = all_permutations(k);
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    let w = C64::new(1.0 / rising, 0.0);
    for col in 0..dim {
        let ds = digits(col, d_a, k);
        for tau in &perms {
            let permuted: Vec<usize> = tau.iter().map(|&t| ds[t]).collect();
            m[(undigits(&permuted, d_a), col)] += w;
        }
    }
    Ok(MomentOperator { d_a, k, matrix: m })
}

/// `(1/d_A) Σ_z (|z⟩⟨z|)^{⊗k}`.
pub fn classical_moment(d_a: usize, k: usize) -> Result<MomentOperator> {
    let dim = checked_dim(d_a, k, DEFAULT_MOMENT_CAP)?;
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    let w = C64::new(1.0 / d_a as f64, 0.0);
    for z in 0..d_a {
        let idx = undigits(&vec![z; k], d_a);
        m[(idx, idx)] = w;
    }
    Ok(MomentOperator { d_a, k, matrix: m })
}

/// Moments of uniformly random real unit vectors, closed form for `k ≤ 2`.
pub fn orthogonal_haar_moment(d_a: usize, k: usize) -> Result<MomentOperator> {
    match k {
        1 => {
            let m = DMatrix::identity(d_a, d_a) * C64::new(1.0 / d_a as f64, 0.0);
            Ok(MomentOperator { d_a, k, matrix: m })
        }
        2 => {
            let dim = checked_dim(d_a, 2, DEFAULT_MOMENT_CAP)?;
            let w = C64::new(1.0 / (d_a * (d_a + 2)) as f64, 0.0);
            let mut m = DMatrix::<C64>::zeros(dim, dim);
            for i in 0..d_a {
                for j in 0..d_a {
                    m[(i * d_a + j, i * d_a + j)] += w;
                    m[(j * d_a + i, i * d_a + j)] += w;
                    m[(i * d_a + i, j * d_a + j)] += w;
                }
            }
            Ok(MomentOperator { d_a, k, matrix: m })
        }
        _ => invalid(format!(
            "closed-form orthogonal Haar moment needs k in {{1, 2}}, got {k}"
        )),
    }
}

/// Reference distributions of pure states on A.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReferenceKind {
    ComplexHaar,
    RealHaar,
    Classical,
}

/// `n` equal-weight states drawn from `kind`; outcome labels are sample indices.
pub fn sample_reference_ensemble<R: Rng + ?Sized>(
    kind: ReferenceKind,
    d_a: usize,
    n: usize,
    rng: &mut R,
) -> Result<ProjectedEnsemble> {
    if n == 0 || d_a == 0 {
        return Err(Error::EmptyEnsemble);
    }
    let mut states = Vec::with_capacity(n * d_a);
    for _ in 0..n {
        match kind {
            ReferenceKind::Classical => {
                let z = rng.random_range(0..d_a as u64) as usize;
                states.extend((0..d_a).map(|i| if i == z { ONE } else { ZERO }));
            }
            ReferenceKind::ComplexHaar | ReferenceKind::RealHaar => {
                let v: Vec<C64> = (0..d_a)
                    .map(|_| {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = if kind == ReferenceKind::ComplexHaar {
                            rng.sample(StandardNormal)
                        } else {
                            0.0
                        };
                        C64::new(re, im)
                    })
                    .collect();
                let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                states.extend(v.into_iter().map(|c| c / norm));
            }
        }
    }
    Ok(ProjectedEnsemble {
        d_a,
        outcomes: (0..n as u64).collect(),
        probs: vec![1.0 / n as f64; n],
        states,
    })
}

/// `½‖a − b‖₁`.
pub fn trace_distance(a: &MomentOperator, b: &MomentOperator) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(0.5 * linalg::hermitian_trace_norm(&(a.matrix() - b.matrix())))
}
