//! Ground truth by exhaustive enumeration or plain Monte Carlo over permutations.

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::analysis::{lemma1_bound, mean_se};
use crate::error::{invalid, Error, Result};
use crate::permdyn::{apply_global_permutation, sample_permutation, Permutation, SeedSpec};
use crate::qstate::StateVector;
use crate::C64;

/// Largest `N` for which every permutation of `S_{2^N}` is enumerated (8! = 40320).
pub const MAX_EXHAUSTIVE_QUBITS: usize = 3;

/// Values that can be averaged by the oracles.
pub trait OracleValue: Clone {
    fn add_assign(&mut self, other: &Self);
    fn scaled(self, s: f64) -> Self;
}

impl OracleValue for f64 {
    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }

    fn scaled(self, s: f64) -> Self {
        self * s
    }
}

impl OracleValue for DMatrix<C64> {
    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }

    fn scaled(self, s: f64) -> Self {
        self * C64::new(s, 0.0)
    }
}

/// Exact value or Monte Carlo estimate.
#[derive(Clone, Debug, PartialEq)]
pub enum Estimate<T> {
    Exact(T),
    MonteCarlo { mean: f64, se: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleReport<T> {
    pub estimate: Estimate<T>,
    pub n_evaluations: usize,
    pub elapsed: Duration,
}

impl<T> OracleReport<T> {
    /// The exact value, if this report came from enumeration.
    pub fn exact(&self) -> Option<&T> {
        match &self.estimate {
            Estimate::Exact(v) => Some(v),
            Estimate::MonteCarlo { .. } => None,
        }
    }
}

impl OracleReport<f64> {
    /// `(mean, se)` of a Monte Carlo report.
    pub fn mean_se(&self) -> Option<(f64, f64)> {
        match self.estimate {
            Estimate::MonteCarlo { mean, se } => Some((mean, se)),
            Estimate::Exact(_) => None,
        }
    }
}

/// Steps `p` to its lexicographic successor; `false` after the last permutation.
fn next_permutation(p: &mut [u32]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len())
        .rev()
        .find(|&j| p[j] > p[i - 1])
        .expect("successor exists");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Uniform average of `functional(U_π|Ψ₀⟩)` over every `π ∈ S_{2^N}`, in lexicographic order.
pub fn brute_force_permutation_average<T, F>(
    initial: &StateVector,
    mut functional: F,
) -> Result<OracleReport<T>>
where
    T: OracleValue,
    F: FnMut(&StateVector) -> T,
{
    let n = initial.num_qubits();
    if n > MAX_EXHAUSTIVE_QUBITS {
        return Err(Error::TooLarge {
            what: "qubits for exhaustive enumeration",
            value: n,
            max: MAX_EXHAUSTIVE_QUBITS,
        });
    }
    let start = Instant::now();
    let d = initial.dim();
    let mut images: Vec<u32> = (0..d as u32).collect();
    let mut acc: Option<T> = None;
    let mut count = 0usize;
    loop {
        let perm = Permutation::from_images(images.clone())?;
        let value = functional(&apply_global_permutation(initial, &perm)?);
        match acc.as_mut() {
            Some(a) => a.add_assign(&value),
            None => acc = Some(value),
        }
        count += 1;
        if !next_permutation(&mut images) {
            break;
        }
    }
    let total = acc.expect("at least one permutation");
    Ok(OracleReport {
        estimate: Estimate::Exact(total.scaled(1.0 / count as f64)),
        n_evaluations: count,
        elapsed: start.elapsed(),
    })
}

/// Mean and standard error of `functional(U_π|Ψ₀⟩)` over `n` sampled permutations;
/// sample `i` draws from the stream `seed.stream(&[i])`.
pub fn monte_carlo_permutation_average<F>(
    initial: &StateVector,
    mut functional: F,
    n: usize,
    seed: SeedSpec,
) -> Result<OracleReport<f64>>
where
    F: FnMut(&StateVector) -> f64,
{
    let start = Instant::now();
    let d = initial.dim();
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let perm = sample_permutation(d, &mut seed.stream(&[i as u64]))?;
        values.push(functional(&apply_global_permutation(initial, &perm)?));
    }
    let (mean, se) = mean_se(&values)?;
    Ok(OracleReport {
        estimate: Estimate::MonteCarlo { mean, se },
        n_evaluations: n,
        elapsed: start.elapsed(),
    })
}

/// Estimated probability that the two largest of `m` Binomial(N, ½) draws differ by at most `N^α`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TopGapReport {
    pub probability: f64,
    pub standard_error: f64,
    /// `m(m−1)(2[N^α]+3)/(2√(πN))`.
    pub bound: f64,
}

fn top_gap_hit(draws: &[u64], window: f64) -> bool {
    let (mut first, mut second) = (0u64, 0u64);
    for (i, &x) in draws.iter().enumerate() {
        if i == 0 || x > first {
            second = if i == 0 { 0 } else { first };
            first = x;
        } else if i == 1 || x > second {
            second = x;
        }
    }
    ((first - second) as f64) <= window
}

pub fn binomial_top_gap_simulator<R: Rng + ?Sized>(
    m: usize,
    n: u64,
    alpha: f64,
    n_trials: usize,
    rng: &mut R,
) -> Result<TopGapReport> {
    if m < 2 {
        return invalid("need at least two binomial variables");
    }
    if n_trials < 2 {
        return Err(Error::InsufficientData("need at least two trials".into()));
    }
    let dist = Binomial::new(n, 0.5).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let window = (n as f64).powf(alpha);
    let mut draws = vec![0u64; m];
    let mut hits = 0usize;
    for _ in 0..n_trials {
        draws.iter_mut().for_each(|x| *x = dist.sample(rng));
        hits += usize::from(top_gap_hit(&draws, window));
    }
    let p = hits as f64 / n_trials as f64;
    Ok(TopGapReport {
        probability: p,
        standard_error: (p * (1.0 - p) / (n_trials as f64 - 1.0)).sqrt(),
        bound: lemma1_bound(m, n as usize, alpha),
    })
}

/// Exact version of the top-gap probability by enumerating all `(N+1)^m` outcomes.
pub fn binomial_top_gap_exact(m: usize, n: u64, alpha: f64) -> Result<f64> {
    if m < 2 {
        return invalid("need at least two binomial variables");
    }
    let states = (n + 1) as usize;
    let total = u32::try_from(m)
        .ok()
        .and_then(|e| states.checked_pow(e))
        .filter(|&t| t <= 10_000_000)
        .ok_or(Error::TooLarge {
            what: "enumeration size (N+1)^m",
            value: usize::MAX,
            max: 10_000_000,
        })?;
    let mut pmf = vec![0.0f64; states];
    let mut c = 1.0f64;
    for (k, slot) in pmf.iter_mut().enumerate() {
        if k > 0 {
            c = c * (n + 1 - k as u64) as f64 / k as f64;
        }
        *slot = c * 0.5f64.powi(n as i32);
    }
    let window = (n as f64).powf(alpha);
    let mut draws = vec![0u64; m];
    let mut prob = 0.0;
    for idx in 0..total {
        let mut r = idx;
        let mut w = 1.0;
        for x in draws.iter_mut() {
            *x = (r % states) as u64;
            r /= states;
            w *= pmf[*x as usize];
        }
        if top_gap_hit(&draws, window) {
            prob += w;
        }
    }
    Ok(prob)
}
