//! Dense state vectors, the two model initial states, and reduced density matrices.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::C64;

/// Constructors refuse anything larger than this many qubits (2^26 amplitudes ≈ 1 GiB).
pub const MAX_QUBITS: usize = 26;

const NORM_TOL: f64 = 1e-10;

/// Pure state on `num_qubits` qubits, amplitudes in the computational basis.
///
/// Index `z` reads as the bit-string `z_1 … z_N` with qubit 1 the most significant bit.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// Wraps an amplitude vector, checking length `2^N` and unit norm.
    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        let len = amplitudes.len();
        if len == 0 || !len.is_power_of_two() {
            return invalid(format!(
                "amplitude vector length {len} is not a power of two"
            ));
        }
        let num_qubits = len.trailing_zeros() as usize;
        check_qubits(num_qubits)?;
        let state = Self {
            num_qubits,
            amplitudes,
        };
        let n2 = state.norm_sqr();
        if (n2 - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n2));
        }
        Ok(state)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        check_qubits(num_qubits)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return invalid(format!(
                "basis index {index} out of range for {num_qubits} qubits"
            ));
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Skips validation; callers guarantee length and norm.
    pub(crate) fn from_raw(num_qubits: usize, amplitudes: Vec<C64>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1 << num_qubits);
        Self {
            num_qubits,
            amplitudes,
        }
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

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 {
        return invalid("a state needs at least one qubit");
    }
    if n > MAX_QUBITS {
        return Err(Error::TooLarge {
            what: "number of qubits",
            value: n,
            max: MAX_QUBITS,
        });
    }
    Ok(())
}

/// Split of `N` qubits into A (the leading `n_a` qubits) and B (the rest).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bipartition {
    n_a: usize,
    n_b: usize,
}

impl Bipartition {
    pub fn new(n_a: usize, n_b: usize) -> Result<Self> {
        if n_a == 0 || n_b == 0 {
            return invalid(format!(
                "both subsystems need qubits (n_a={n_a}, n_b={n_b})"
            ));
        }
        if n_a + n_b > 63 {
            return invalid("bipartition larger than 63 qubits");
        }
        Ok(Self { n_a, n_b })
    }

    /// `A` = first `n_a` of `n` qubits.
    pub fn split(n: usize, n_a: usize) -> Result<Self> {
        if n_a >= n {
            return invalid(format!("n_a={n_a} leaves no qubits in B for N={n}"));
        }
        Self::new(n_a, n - n_a)
    }

    pub fn n_a(&self) -> usize {
        self.n_a
    }

    pub fn n_b(&self) -> usize {
        self.n_b
    }

    pub fn num_qubits(&self) -> usize {
        self.n_a + self.n_b
    }

    pub fn d_a(&self) -> usize {
        1 << self.n_a
    }

    pub fn d_b(&self) -> usize {
        1 << self.n_b
    }

    pub(crate) fn check(&self, state: &StateVector) -> Result<()> {
        if self.num_qubits() != state.num_qubits() {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits(),
                got: state.num_qubits(),
            });
        }
        Ok(())
    }
}

/// Bloch angles of the uniform product input `(cos(θ₀/2)|0⟩ + e^{iφ₀} sin(θ₀/2)|1⟩)^{⊗N}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TiltedParams {
    pub theta0: f64,
    pub phi0: f64,
}

impl TiltedParams {
    pub fn new(theta0: f64, phi0: f64) -> Self {
        Self { theta0, phi0 }
    }

    /// Angles given in units of π.
    pub fn from_pi_units(theta0_over_pi: f64, phi0_over_pi: f64) -> Self {
        Self::new(theta0_over_pi * PI, phi0_over_pi * PI)
    }

    /// Single-qubit amplitudes `(cos(θ₀/2), e^{iφ₀} sin(θ₀/2))`.
    pub fn qubit_amplitudes(&self) -> [C64; 2] {
        let (s, c) = (self.theta0 / 2.0).sin_cos();
        [C64::new(c, 0.0), C64::from_polar(s, self.phi0)]
    }

    /// Per-qubit IPR `g = sin⁴(θ₀/2) + cos⁴(θ₀/2)`.
    pub fn g(&self) -> f64 {
        let (s, c) = (self.theta0 / 2.0).sin_cos();
        s.powi(4) + c.powi(4)
    }

    /// `f = 1 + sin θ₀ cos φ₀`, so that `|Σ_z Ψ₀(z)|² = f^N`.
    pub fn f(&self) -> f64 {
        1.0 + self.theta0.sin() * self.phi0.cos()
    }

    /// `α₀ = −log₂ g`.
    pub fn alpha0_exponent(&self) -> f64 {
        -self.g().log2()
    }

    /// `β₀ = 1 − log₂ f`.
    pub fn beta0_exponent(&self) -> f64 {
        1.0 - self.f().log2()
    }

    /// Inputs for which a global permutation cannot thermalize A: basis states
    /// (θ₀ ∈ {0, π}) and the permutation-invariant `|+⟩^{⊗N}` (θ₀ = π/2, φ₀ = 0).
    pub fn is_excluded(&self) -> bool {
        const TOL: f64 = 1e-12;
        let t = self.theta0.rem_euclid(2.0 * PI);
        let pole = t.abs() < TOL || (t - PI).abs() < TOL || (t - 2.0 * PI).abs() < TOL;
        let plus = (t - PI / 2.0).abs() < TOL
            && self
                .phi0
                .rem_euclid(2.0 * PI)
                .min(2.0 * PI - self.phi0.rem_euclid(2.0 * PI))
                < TOL;
        pole || plus
    }
}

/// `|0⟩^{⊗(N−m)} ⊗ |Y₊⟩^{⊗m}` with `m = α₀N` coherent qubits at the end of the chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MixedParams {
    num_qubits: usize,
    coherent_qubits: usize,
}

impl MixedParams {
    /// Rejects fractions for which `α₀N` is not an integer.
    pub fn new(num_qubits: usize, alpha0: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha0) {
            return invalid(format!("alpha0={alpha0} outside [0, 1]"));
        }
        let m = integer_count(alpha0, num_qubits).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "alpha0*N = {} is not an integer",
                alpha0 * num_qubits as f64
            ))
        })?;
        Ok(Self {
            num_qubits,
            coherent_qubits: m,
        })
    }

    pub fn with_count(num_qubits: usize, coherent_qubits: usize) -> Result<Self> {
        if coherent_qubits > num_qubits {
            return invalid("more coherent qubits than qubits");
        }
        Ok(Self {
            num_qubits,
            coherent_qubits,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn coherent_qubits(&self) -> usize {
        self.coherent_qubits
    }

    pub fn alpha0(&self) -> f64 {
        self.coherent_qubits as f64 / self.num_qubits as f64
    }
}

/// `round(fraction · n)` when that product is an integer to within 1e-9.
pub fn integer_count(fraction: f64, n: usize) -> Option<usize> {
    let x = fraction * n as f64;
    let r = x.round();
    ((x - r).abs() < 1e-9 && r >= 0.0).then_some(r as usize)
}

/// Density operator, Hermitian with unit trace.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: DMatrix<C64>,
}

impl DensityOperator {
    /// Validates Hermiticity, trace and positivity to 1e−10.
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() {
            return invalid("density matrix must be square");
        }
        if linalg::hermiticity_defect(&matrix) > NORM_TOL {
            return invalid("density matrix is not Hermitian");
        }
        let tr = linalg::trace(&matrix);
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return invalid(format!("density matrix trace is {tr}"));
        }
        let min_ev = linalg::hermitian_eigenvalues(&matrix)[0];
        if min_ev < -NORM_TOL {
            return invalid(format!("density matrix has eigenvalue {min_ev}"));
        }
        Ok(Self { matrix })
    }

    pub(crate) fn from_raw(matrix: DMatrix<C64>) -> Self {
        Self { matrix }
    }

    /// `I/d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self::from_raw(DMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0))
    }

    /// `|ψ⟩⟨ψ|` for a normalized vector.
    pub fn pure(psi: &[C64]) -> Self {
        let v = nalgebra::DVector::from_column_slice(psi);
        Self::from_raw(&v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }
}

/// `(cos(θ₀/2)|0⟩ + e^{iφ₀} sin(θ₀/2)|1⟩)^{⊗N}`.
pub fn make_tilted_state(n: usize, params: &TiltedParams) -> Result<StateVector> {
    check_qubits(n)?;
    let u = params.qubit_amplitudes();
    Ok(StateVector::from_raw(n, product_amplitudes(&vec![u; n])))
}

/// `|0⟩^{⊗(1−α₀)N} ⊗ |Y₊⟩^{⊗α₀N}`: amplitude `2^{−m/2} i^{popcount(z)}` on strings with a zero prefix.
pub fn make_mixed_state(params: &MixedParams) -> Result<StateVector> {
    let n = params.num_qubits();
    check_qubits(n)?;
    let m = params.coherent_qubits();
    let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
    let scale = 0.5f64.powf(m as f64 / 2.0);
    const PHASES: [C64; 4] = [
        C64::new(1.0, 0.0),
        C64::new(0.0, 1.0),
        C64::new(-1.0, 0.0),
        C64::new(0.0, -1.0),
    ];
    for (z, a) in amps.iter_mut().take(1 << m).enumerate() {
        *a = PHASES[(z.count_ones() % 4) as usize] * scale;
    }
    Ok(StateVector::from_raw(n, amps))
}

/// Amplitudes of `u_1 ⊗ u_2 ⊗ … ⊗ u_N` (qubit 1 most significant).
pub fn product_amplitudes(qubits: &[[C64; 2]]) -> Vec<C64> {
    let mut amps = Vec::with_capacity(1 << qubits.len());
    amps.push(C64::new(1.0, 0.0));
    for u in qubits {
        let prev = std::mem::take(&mut amps);
        amps.reserve(prev.len() * 2);
        for a in &prev {
            amps.push(a * u[0]);
            amps.push(a * u[1]);
        }
    }
    amps
}

/// `ρ_A = Tr_B |Ψ⟩⟨Ψ|`, the row Gram matrix of the `d_A × d_B` matricization.
pub fn reduced_density_matrix(state: &StateVector, part: Bipartition) -> Result<DensityOperator> {
    part.check(state)?;
    let (da, db) = (part.d_a(), part.d_b());
    let amps = state.amplitudes();
    let mut rho = DMatrix::zeros(da, da);
    for i in 0..da {
        let ri = &amps[i * db..(i + 1) * db];
        for j in i..da {
            let rj = &amps[j * db..(j + 1) * db];
            let v: C64 = ri.iter().zip(rj).map(|(x, y)| x * y.conj()).sum();
            rho[(i, j)] = v;
            rho[(j, i)] = v.conj();
        }
    }
    Ok(DensityOperator::from_raw(rho))
}

/// `Tr ρ²`.
pub fn purity(rho: &DensityOperator) -> f64 {
    linalg::trace_of_square(rho.matrix())
}

/// Full trace norm `‖ρ − I/d‖₁` (no ½).
pub fn distance_to_maximally_mixed(rho: &DensityOperator) -> f64 {
    let d = rho.dim();
    let diff = rho.matrix() - DMatrix::identity(d, d) / C64::new(d as f64, 0.0);
    linalg::hermitian_trace_norm(&diff)
}
