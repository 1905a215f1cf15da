//! Weingarten calculus for uniformly random permutation matrices, and the closed-form
//! quantities of the two models that follow from it.
//!
//! For a uniform `π ∈ S_d` with permutation matrix `U`,
//! `E[U^{⊗n}] = Σ_{σ,τ} Wg(σ,τ; d) |σ⟩⟨τ|`, where `|σ⟩` is the indicator of index strings
//! that are constant on every block of the set partition `σ` of the `n` tensor slots.

pub mod partition;

use std::f64::consts::PI;

use nalgebra::DMatrix;

pub use partition::{
    common_coarsening, common_refinement, enumerate_partitions, mobius, refines, SetPartition,
};

use crate::error::{invalid, Error, Result};
use crate::qstate::{MixedParams, TiltedParams};
use crate::C64;

/// Weingarten matrix on all partitions of `order` slots, with the Gram matrix it inverts.
#[derive(Clone, Debug, PartialEq)]
pub struct WeingartenTable {
    pub order: usize,
    pub dimension: usize,
    pub partitions: Vec<SetPartition>,
    pub wg: DMatrix<f64>,
    pub gram: DMatrix<f64>,
}

impl WeingartenTable {
    /// `‖wg·gram·wg − wg‖_max`.
    pub fn pseudo_inverse_defect(&self) -> f64 {
        (&self.wg * &self.gram * &self.wg - &self.wg).amax()
    }
}

/// `⟨σ|τ⟩ = d^{#(σ ∨ τ)}`.
pub fn gram_matrix(partitions: &[SetPartition], d: f64) -> DMatrix<f64> {
    let m = partitions.len();
    DMatrix::from_fn(m, m, |i, j| {
        let join = common_coarsening(&partitions[i], &partitions[j]).expect("same ground size");
        d.powi(join.num_blocks() as i32)
    })
}

fn partitions_for(order: usize) -> Result<Vec<SetPartition>> {
    enumerate_partitions(order)
}

/// Wg as the pseudo-inverse of the Gram matrix. Requires `d ≥ order` so the
/// partition vectors are linearly independent.
pub fn weingarten_exact(order: usize, d: usize) -> Result<WeingartenTable> {
    let partitions = partitions_for(order)?;
    if d < order {
        return invalid(format!("exact Weingarten needs d ≥ {order}, got d = {d}"));
    }
    let gram = gram_matrix(&partitions, d as f64);
    // Symmetric diagonal scaling keeps the SVD well conditioned across the d^k spread.
    let m = partitions.len();
    let s: Vec<f64> = (0..m).map(|i| gram[(i, i)].sqrt().recip()).collect();
    let scaled = DMatrix::from_fn(m, m, |i, j| gram[(i, j)] * s[i] * s[j]);
    let pinv = scaled
        .pseudo_inverse(1e-13)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut wg = DMatrix::from_fn(m, m, |i, j| pinv[(i, j)] * s[i] * s[j]);
    // One step of iterative refinement: W ← W + W(I − G W).
    let resid = DMatrix::identity(m, m) - &gram * &wg;
    wg += &wg * resid;
    let wg = (&wg + wg.transpose()) * 0.5;
    Ok(WeingartenTable {
        order,
        dimension: d,
        partitions,
        wg,
        gram,
    })
}

/// `d(d−1)⋯(d−k+1)`, the squared norm of an exact-pattern vector with `k` blocks.
pub fn falling_factorial(d: f64, k: usize) -> f64 {
    (0..k).map(|i| d - i as f64).product()
}

/// Wg from the orthogonal exact-pattern basis:
/// `Wg(σ,σ') = Σ_{τ ≤ σ∧σ'} μ(τ,σ) μ(τ,σ') / (d)_{#τ}`, skipping `#τ > d`.
/// Valid for every `d ≥ 1`; below `d = order` it is one of several valid solutions.
pub fn weingarten_mobius(order: usize, d: usize) -> Result<WeingartenTable> {
    let partitions = partitions_for(order)?;
    let wg = mobius_wg(&partitions, d as f64)?;
    let gram = gram_matrix(&partitions, d as f64);
    Ok(WeingartenTable {
        order,
        dimension: d,
        partitions,
        wg,
        gram,
    })
}

fn mobius_wg(partitions: &[SetPartition], d: f64) -> Result<DMatrix<f64>> {
    let m = partitions.len();
    // mu[t][i] = μ(τ_t, σ_i) when τ_t refines σ_i.
    let mut mu = vec![vec![0i64; m]; m];
    for (t, tau) in partitions.iter().enumerate() {
        for (i, sigma) in partitions.iter().enumerate() {
            if refines(tau, sigma) {
                mu[t][i] = mobius(tau, sigma)?;
            }
        }
    }
    let weights: Vec<f64> = partitions
        .iter()
        .map(|tau| {
            let k = tau.num_blocks();
            if (k as f64) > d {
                0.0
            } else {
                falling_factorial(d, k).recip()
            }
        })
        .collect();
    Ok(DMatrix::from_fn(m, m, |i, j| {
        (0..m)
            .filter(|&t| mu[t][i] != 0 && mu[t][j] != 0)
            .map(|t| (mu[t][i] * mu[t][j]) as f64 * weights[t])
            .sum()
    }))
}

/// Leading-order Wg: `μ(a∧b, a) μ(a∧b, b) d^{−#(a∧b)}` with `a∧b` the common refinement.
pub fn weingarten_asymptotic(a: &SetPartition, b: &SetPartition, d: usize) -> Result<f64> {
    let meet = common_refinement(a, b)?;
    let coeff = mobius(&meet, a)? * mobius(&meet, b)?;
    Ok(coeff as f64 * (d as f64).powi(-(meet.num_blocks() as i32)))
}

/// Initial state of either model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ModelParams {
    Tilted(TiltedParams),
    Mixed(MixedParams),
}

/// Largest `N` accepted by the scalar formulas.
pub const MAX_FORMULA_QUBITS: usize = 60;

fn check_sizes(n: usize, n_a: usize) -> Result<()> {
    if n > MAX_FORMULA_QUBITS {
        return Err(Error::TooLarge {
            what: "number of qubits",
            value: n,
            max: MAX_FORMULA_QUBITS,
        });
    }
    if n_a == 0 || n_a >= n {
        return invalid(format!("need 1 ≤ N_A < N, got N_A={n_a}, N={n}"));
    }
    Ok(())
}

/// `Σ_a u_a^{k} conj(u_a)^{b}` for each block of a 4-slot partition whose slots 0, 2 are
/// kets and 1, 3 are bras, multiplied over blocks.
fn qubit_overlap(sigma: &SetPartition, u: &[C64; 2]) -> C64 {
    sigma
        .blocks()
        .iter()
        .map(|block| {
            let kets = block.iter().filter(|&&s| s % 2 == 0).count() as i32;
            let bras = block.len() as i32 - kets;
            u.iter()
                .map(|a| a.powi(kets) * a.conj().powi(bras))
                .sum::<C64>()
        })
        .product()
}

/// `E_π[Tr ρ_A²]` from the 15×15 fourth-order Weingarten sum.
///
/// Parameters in the excluded set (basis-state or `|+⟩^{⊗N}` inputs) are evaluated like any
/// other; check [`TiltedParams::is_excluded`] to flag them.
pub fn expected_purity_exact(n: usize, n_a: usize, params: &ModelParams) -> Result<f64> {
    check_sizes(n, n_a)?;
    let parts = enumerate_partitions(4)?;
    let d = (n as f64).exp2();
    let (d_a, d_b) = ((n_a as f64).exp2(), ((n - n_a) as f64).exp2());
    let wg = mobius_wg(&parts, d)?;
    let swap = SetPartition::from_labels(&[0, 1, 1, 0]);
    let id = SetPartition::from_labels(&[0, 0, 1, 1]);
    let observable: Vec<f64> = parts
        .iter()
        .map(|s| {
            let ja = common_coarsening(s, &swap).expect("ground 4").num_blocks();
            let jb = common_coarsening(s, &id).expect("ground 4").num_blocks();
            d_a.powi(ja as i32) * d_b.powi(jb as i32)
        })
        .collect();
    let overlap: Vec<C64> = match params {
        ModelParams::Tilted(t) => {
            let u = t.qubit_amplitudes();
            parts
                .iter()
                .map(|s| qubit_overlap(s, &u).powi(n as i32))
                .collect()
        }
        ModelParams::Mixed(m) => {
            if m.num_qubits() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: m.num_qubits(),
                });
            }
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let y = [C64::new(h, 0.0), C64::new(0.0, h)];
            parts
                .iter()
                .map(|s| qubit_overlap(s, &y).powi(m.coherent_qubits() as i32))
                .collect()
        }
    };
    let mut total = C64::new(0.0, 0.0);
    for i in 0..parts.len() {
        for j in 0..parts.len() {
            total += overlap[j] * (wg[(i, j)] * observable[i]);
        }
    }
    Ok(total.re)
}

/// Large-`N` expansion `1/d_A + g^N(1−1/d_A) + (1−g^N)(d_A−2+1/d_A)/d + (1−1/d_A)f^{2N}/d²`.
pub fn expected_purity_expansion(n: usize, n_a: usize, t: &TiltedParams) -> f64 {
    let d = (n as f64).exp2();
    let d_a = (n_a as f64).exp2();
    let g_n = t.g().powi(n as i32);
    let f_2n = t.f().powi(2 * n as i32);
    1.0 / d_a
        + g_n * (1.0 - 1.0 / d_a)
        + (1.0 - g_n) * (d_a - 2.0 + 1.0 / d_a) / d
        + (1.0 - 1.0 / d_a) * f_2n / (d * d)
}

/// Chebyshev-type bound on `P(‖ρ_A − I/d_A‖₁ ≥ ε)`:
/// `(d^{−α₀}(d_A−1) + d^{−2β₀}(d_A−1) + d^{−1}(d_A²−d_A+1)) / ε²`.
pub fn theorem1_bound(n: usize, n_a: usize, t: &TiltedParams, eps: f64) -> Result<f64> {
    check_sizes(n, n_a)?;
    if !(eps > 0.0) {
        return invalid("epsilon must be positive");
    }
    if t.is_excluded() {
        return Err(Error::ExcludedParameters(format!(
            "theta0={}, phi0={}",
            t.theta0, t.phi0
        )));
    }
    let log2d = n as f64;
    let d_a = (n_a as f64).exp2();
    let term_a = (-t.alpha0_exponent() * log2d).exp2() * (d_a - 1.0);
    let term_b = (-2.0 * t.beta0_exponent() * log2d).exp2() * (d_a - 1.0);
    let term_c = (-log2d).exp2() * (d_a * d_a - d_a + 1.0);
    Ok((term_a + term_b + term_c) / (eps * eps))
}

/// Permutation-averaged state `ρ̄ = a·I + b·M` (M the all-ones matrix), returned as `(a, b)`.
pub fn mean_state_coeffs(n: usize, t: &TiltedParams) -> Result<(f64, f64)> {
    if n == 0 || n > MAX_FORMULA_QUBITS {
        return invalid(format!("N={n} outside 1..={MAX_FORMULA_QUBITS}"));
    }
    let d = (n as f64).exp2();
    let f_n = t.f().powi(n as i32);
    let a = (1.0 - (t.f() / 2.0).powi(n as i32)) / (d - 1.0);
    let b = (f_n - 1.0) / (d * (d - 1.0));
    Ok((a, b))
}

/// Averaged post-measurement state of the outcome class with `ν₊` aligned qubits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassState {
    pub nu_plus: usize,
    /// `a` in `ρ_[ν] = a·I_A + b·M_A`.
    pub identity_coeff: f64,
    /// `b` in `ρ_[ν] = a·I_A + b·M_A`.
    pub flat_coeff: f64,
    /// Born probability of a single outcome in the class.
    pub born_p: f64,
    /// `binom(N_B, ν₊) · born_p`.
    pub class_p: f64,
    /// `c([ν]) = b/a`.
    pub ratio_c: f64,
}

/// `x^k` evaluated as `exp(k ln x)`, with `0^0 = 1`.
fn pow_log(x: f64, k: usize) -> f64 {
    if k == 0 {
        1.0
    } else {
        (k as f64 * x.ln()).exp()
    }
}

/// Class states for measurement along `(θ_m, φ_m)`, indexed by `ν₊ = 0..=N_B`.
pub fn class_states(
    n: usize,
    n_a: usize,
    t: &TiltedParams,
    theta_m: f64,
    phi_m: f64,
) -> Result<Vec<ClassState>> {
    check_sizes(n, n_a)?;
    let f = t.f();
    if (f - 2.0).abs() < 1e-15 {
        return Err(Error::ExcludedParameters(
            "f = 2: the input is permutation invariant".into(),
        ));
    }
    let n_b = n - n_a;
    let d = (n as f64).exp2();
    let d_a = (n_a as f64).exp2();
    let f_n = f.powi(n as i32);
    let s = theta_m.sin() * phi_m.cos();
    let (g_plus, g_minus) = (1.0 + s, 1.0 - s);
    let mut binom = 1.0f64;
    let mut out = Vec::with_capacity(n_b + 1);
    for nu in 0..=n_b {
        if nu > 0 {
            binom = binom * (n_b + 1 - nu) as f64 / nu as f64;
        }
        let g = pow_log(g_plus, nu) * pow_log(g_minus, n_b - nu);
        let born_p = d_a * ((d - f_n) + (f_n - 1.0) * g) / (d * (d - 1.0));
        let a_raw = (1.0 - (f / 2.0).powi(n as i32)) / (d - 1.0);
        let b_raw = (f_n - 1.0) * g / (d * (d - 1.0));
        out.push(ClassState {
            nu_plus: nu,
            identity_coeff: a_raw / born_p,
            flat_coeff: b_raw / born_p,
            born_p,
            class_p: binom * born_p,
            ratio_c: (f_n - 1.0) * g / (d - f_n),
        });
    }
    Ok(out)
}

/// Phase predicted by the annealed IPR ratio.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Ergodic,
    NonErgodic,
    Marginal,
}

/// Value of `(d_B/d_A)·IPR(Ψ₀)·IPR(Φ_ν)` and its phase.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnnealedPrediction {
    pub value: f64,
    pub phase: Phase,
}

/// Annealed IPR predictor: `> 1` non-ergodic, `< 1` ergodic, `|ln value| < 1e−9` marginal.
pub fn annealed_ipr_prediction(
    ipr0: f64,
    ipr_basis: f64,
    d_a: f64,
    d_b: f64,
) -> Result<AnnealedPrediction> {
    for (name, x) in [("ipr0", ipr0), ("ipr_basis", ipr_basis)] {
        if !(x > 0.0 && x <= 1.0 + 1e-12) {
            return invalid(format!("{name}={x} outside (0, 1]"));
        }
    }
    if !(d_a >= 1.0 && d_b >= 1.0) {
        return invalid("dimensions must be at least 1");
    }
    let log_value = d_b.ln() - d_a.ln() + ipr0.ln() + ipr_basis.ln();
    let phase = if log_value.abs() < 1e-9 {
        Phase::Marginal
    } else if log_value > 0.0 {
        Phase::NonErgodic
    } else {
        Phase::Ergodic
    };
    Ok(AnnealedPrediction {
        value: log_value.exp(),
        phase,
    })
}

/// Growth rate per qubit of `log₂` of the annealed predictor for the tilted model,
/// `1 + log₂ g(θ₀) + log₂ g(θ_m)`, whose zero is the predicted boundary.
pub fn annealed_rate_tilted(theta0: f64, theta_m: f64) -> f64 {
    let g = |t: f64| 1.0 - 0.5 * t.sin().powi(2);
    1.0 + g(theta0).log2() + g(theta_m).log2()
}

/// `θ_m ∈ [0, π/2]` on the annealed boundary, `sin²θ_m = 2(1 − 1/(2g₀))`.
pub fn annealed_boundary_angle(theta0: f64) -> Result<f64> {
    let g0 = 1.0 - 0.5 * theta0.sin().powi(2);
    let s2 = 2.0 * (1.0 - 1.0 / (2.0 * g0));
    if !(0.0..=1.0).contains(&s2) {
        return Err(Error::NoCrossing(format!(
            "no annealed boundary for theta0={theta0}"
        )));
    }
    Ok(s2.sqrt().asin().clamp(0.0, PI / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn second_order_closed_form() {
        for d in [2usize, 3, 8, 13] {
            let t = weingarten_exact(2, d).unwrap();
            let df = d as f64;
            let e = [
                [1.0 / (df - 1.0), -1.0 / (df * (df - 1.0))],
                [-1.0 / (df * (df - 1.0)), 1.0 / (df * (df - 1.0))],
            ];
            for (i, row) in e.iter().enumerate() {
                for (j, x) in row.iter().enumerate() {
                    assert_relative_eq!(t.wg[(i, j)], *x, max_relative = 1e-14);
                }
            }
        }
        let t = weingarten_exact(2, 8).unwrap();
        assert_eq!(t.wg[(0, 0)], 1.0 / 7.0);
        assert!(weingarten_exact(4, 3).is_err());
    }

    #[test]
    fn pseudo_inverse_identity_and_symmetry() {
        for (order, d) in [(2, 4), (4, 4), (4, 16), (6, 8)] {
            let t = weingarten_exact(order, d).unwrap();
            let scale = t.wg.amax();
            assert!(
                t.pseudo_inverse_defect() < 1e-10 * scale.max(1.0),
                "{order} {d}"
            );
            assert_eq!(t.wg, t.wg.transpose());
        }
    }

    #[test]
    fn routes_agree() {
        for d in [4usize, 5, 16, 32] {
            let a = weingarten_exact(4, d).unwrap();
            let b = weingarten_mobius(4, d).unwrap();
            assert!((&a.wg - &b.wg).amax() < 1e-10, "d={d}");
        }
    }

    #[test]
    fn asymptotic_examples() {
        let parts = enumerate_partitions(4).unwrap();
        assert_eq!(
            weingarten_asymptotic(&parts[0], &parts[0], 1000).unwrap(),
            1e-3
        );
        for p in &parts {
            let expect = 1000f64.powi(-(p.num_blocks() as i32));
            assert_relative_eq!(
                weingarten_asymptotic(p, p, 1000).unwrap(),
                expect,
                max_relative = 1e-15
            );
        }
    }

    #[test]
    fn asymptotic_relative_error_within_ten_over_d() {
        let parts = enumerate_partitions(4).unwrap();
        for d in [256usize, 1024] {
            let exact = weingarten_mobius(4, d).unwrap();
            for (i, a) in parts.iter().enumerate() {
                for (j, b) in parts.iter().enumerate() {
                    let asy = weingarten_asymptotic(a, b, d).unwrap();
                    let rel = ((asy - exact.wg[(i, j)]) / exact.wg[(i, j)]).abs();
                    assert!(rel < 10.0 / d as f64, "{a} {b} rel={rel}");
                }
            }
        }
    }

    #[test]
    fn projector_matches_exhaustive_average_order_two() {
        // d = 4: E[U ⊗ U] over all 24 permutation matrices.
        let d = 4usize;
        let mut avg = DMatrix::<f64>::zeros(d * d, d * d);
        let mut perm: Vec<usize> = (0..d).collect();
        let mut count = 0;
        loop {
            for x in 0..d {
                for y in 0..d {
                    avg[(perm[x] * d + perm[y], x * d + y)] += 1.0;
                }
            }
            count += 1;
            let Some(i) = (1..d).rev().find(|&i| perm[i - 1] < perm[i]) else {
                break;
            };
            let j = (i..d).rev().find(|&j| perm[j] > perm[i - 1]).unwrap();
            perm.swap(i - 1, j);
            perm[i..].reverse();
        }
        avg /= count as f64;
        let t = weingarten_exact(2, d).unwrap();
        let vecs: Vec<Vec<f64>> = t
            .partitions
            .iter()
            .map(|p| {
                (0..d * d)
                    .map(|z| {
                        let (a, b) = (z / d, z % d);
                        let same = a == b;
                        f64::from(p.num_blocks() == 2 || same)
                    })
                    .collect()
            })
            .collect();
        let mut proj = DMatrix::<f64>::zeros(d * d, d * d);
        for i in 0..2 {
            for j in 0..2 {
                for r in 0..d * d {
                    for c in 0..d * d {
                        proj[(r, c)] += t.wg[(i, j)] * vecs[i][r] * vecs[j][c];
                    }
                }
            }
        }
        assert!((&proj - &avg).amax() < 1e-12);
    }

    #[test]
    fn purity_of_basis_state_is_one() {
        for n in [2usize, 5, 20, 60] {
            let p = expected_purity_exact(n, 1, &ModelParams::Tilted(TiltedParams::new(0.0, 0.0)))
                .unwrap();
            assert_abs_diff_eq!(p, 1.0, epsilon = 1e-10);
        }
        let m = MixedParams::new(8, 0.0).unwrap();
        assert_abs_diff_eq!(
            expected_purity_exact(8, 2, &ModelParams::Mixed(m)).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn purity_approaches_expansion() {
        let t = TiltedParams::new(FRAC_PI_4, FRAC_PI_4);
        // d·|exact − expansion| shrinks with N until it reaches rounding level.
        let mut prev = f64::INFINITY;
        for n in [8usize, 12, 16, 20, 24] {
            let exact = expected_purity_exact(n, 2, &ModelParams::Tilted(t)).unwrap();
            let approx = expected_purity_expansion(n, 2, &t);
            let scaled = (exact - approx).abs() * (n as f64).exp2();
            assert!(scaled < prev, "N={n}: {scaled}");
            prev = scaled;
        }
        assert!(prev < 0.05, "{prev}");
        for n in [40usize, 60] {
            let exact = expected_purity_exact(n, 2, &ModelParams::Tilted(t)).unwrap();
            assert_abs_diff_eq!(exact, expected_purity_expansion(n, 2, &t), epsilon = 1e-13);
        }
    }

    #[test]
    fn purity_at_least_inverse_d_a() {
        for n in 3..12 {
            for na in 1..n.min(4) {
                let p =
                    expected_purity_exact(n, na, &ModelParams::Tilted(TiltedParams::new(1.1, 0.4)))
                        .unwrap();
                assert!(p >= 1.0 / (1 << na) as f64 - 1e-12);
            }
        }
    }

    #[test]
    fn theorem1_bound_examples() {
        let t = TiltedParams::new(PI / 2.0, PI / 2.0);
        let (n, na, eps) = (10usize, 2usize, 0.1);
        let d = 1024.0;
        // α₀ = β₀ = 1, so the middle term carries d^{−2}.
        let expect = (3.0 / d + 3.0 / (d * d) + 13.0 / d) / (eps * eps);
        assert_relative_eq!(
            theorem1_bound(n, na, &t, eps).unwrap(),
            expect,
            max_relative = 1e-12
        );
        let t = TiltedParams::new(FRAC_PI_4, FRAC_PI_4);
        let mut prev = f64::INFINITY;
        for n in 4..40 {
            let b = theorem1_bound(n, 2, &t, 0.1).unwrap();
            assert!(b < prev);
            prev = b;
        }
        assert!(matches!(
            theorem1_bound(10, 2, &TiltedParams::new(PI / 2.0, 0.0), 0.1),
            Err(Error::ExcludedParameters(_))
        ));
        assert!(theorem1_bound(10, 2, &TiltedParams::new(0.0, 0.3), 0.1).is_err());
    }

    #[test]
    fn mean_state_examples() {
        for n in [1usize, 3, 10] {
            let (a, b) = mean_state_coeffs(n, &TiltedParams::new(FRAC_PI_4, FRAC_PI_4)).unwrap();
            let d = (1usize << n) as f64;
            assert_abs_diff_eq!(d * (a + b), 1.0, epsilon = 1e-14);
        }
        let (a, b) = mean_state_coeffs(4, &TiltedParams::new(PI / 2.0, PI / 2.0)).unwrap();
        assert_eq!(b, 0.0);
        assert_abs_diff_eq!(a, 1.0 / 16.0, epsilon = 1e-16);
    }

    #[test]
    fn class_state_invariants() {
        let t = TiltedParams::new(FRAC_PI_4, FRAC_PI_4);
        for (n, na, tm, pm) in [
            (20usize, 2usize, 0.3 * PI, 0.0),
            (9, 3, 1.0, 0.5),
            (12, 2, PI / 2.0, 0.0),
        ] {
            let cs = class_states(n, na, &t, tm, pm).unwrap();
            assert_eq!(cs.len(), n - na + 1);
            let total: f64 = cs.iter().map(|c| c.class_p).sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
            let da = (1usize << na) as f64;
            for c in &cs {
                assert_abs_diff_eq!(da * (c.identity_coeff + c.flat_coeff), 1.0, epsilon = 1e-12);
                assert_relative_eq!(
                    c.ratio_c,
                    c.flat_coeff / c.identity_coeff,
                    max_relative = 1e-10
                );
            }
        }
        assert!(class_states(10, 2, &TiltedParams::new(PI / 2.0, 0.0), 0.3, 0.0).is_err());
    }

    #[test]
    fn class_states_reverse_under_reflection() {
        let t = TiltedParams::new(FRAC_PI_4, FRAC_PI_4);
        let a = class_states(14, 2, &t, 0.3 * PI, 0.0).unwrap();
        let b = class_states(14, 2, &t, 0.3 * PI, PI).unwrap();
        for (x, y) in a.iter().zip(b.iter().rev()) {
            assert_relative_eq!(x.born_p, y.born_p, max_relative = 1e-10);
            assert_relative_eq!(x.ratio_c, y.ratio_c, max_relative = 1e-10);
        }
    }

    #[test]
    fn annealed_predictor_examples() {
        let p = annealed_ipr_prediction(1.0, 1.0, 1.0, 16.0).unwrap();
        assert_eq!(p.phase, Phase::NonErgodic);
        assert_abs_diff_eq!(p.value, 16.0, epsilon = 1e-12);
        let p = annealed_ipr_prediction(0.5, 0.5, 1.0, 4.0).unwrap();
        assert_eq!(p.phase, Phase::Marginal);
        let p = annealed_ipr_prediction(0.25, 0.5, 2.0, 4.0).unwrap();
        assert_eq!(p.phase, Phase::Ergodic);
        assert!(annealed_ipr_prediction(0.0, 0.5, 2.0, 4.0).is_err());
    }

    #[test]
    fn annealed_boundary_matches_rate_root() {
        for theta0 in [0.3, FRAC_PI_4, 1.0] {
            let b = annealed_boundary_angle(theta0).unwrap();
            assert!(annealed_rate_tilted(theta0, b).abs() < 1e-12);
        }
        let b = annealed_boundary_angle(FRAC_PI_4).unwrap() / PI;
        assert!((b - 0.304).abs() < 0.001, "{b}");
        assert_abs_diff_eq!(
            annealed_boundary_angle(PI / 2.0).unwrap(),
            0.0,
            epsilon = 1e-7
        );
    }
}
