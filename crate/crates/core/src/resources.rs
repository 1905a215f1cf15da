//! Coherence and IPR of pure states on A, and their Born-weighted ensemble statistics.

use crate::error::{invalid, Error, Result};
use crate::projens::ProjectedEnsemble;
use crate::C64;

/// Default number of histogram bins.
pub const DEFAULT_BINS: usize = 50;

const NORM_TOL: f64 = 1e-6;

fn check_norm(state: &[C64]) -> Result<()> {
    let n2: f64 = state.iter().map(|c| c.norm_sqr()).sum();
    if (n2 - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(n2));
    }
    Ok(())
}

/// Relative entropy of coherence of a pure state: Shannon entropy (nats) of `|c_z|²`.
pub fn relative_entropy_of_coherence(state: &[C64]) -> Result<f64> {
    check_norm(state)?;
    Ok(shannon_entropy(state))
}

fn shannon_entropy(state: &[C64]) -> f64 {
    state
        .iter()
        .map(|c| c.norm_sqr())
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum()
}

/// Mean coherence of Haar-random states in dimension `d`: `Σ_{k=2}^{d} 1/k`.
pub fn haar_average_coherence(d: usize) -> f64 {
    (2..=d).map(|k| 1.0 / k as f64).sum()
}

/// `Σ_z |c_z|⁴`.
pub fn ipr(state: &[C64]) -> f64 {
    state.iter().map(|c| c.norm_sqr().powi(2)).sum()
}

/// Largest Born weight `max_z |c_z|²`.
pub fn leading_weight(state: &[C64]) -> f64 {
    state.iter().map(|c| c.norm_sqr()).fold(0.0, f64::max)
}

/// `|c₍₁₎|² / |c₍₂₎|²`; `f64::INFINITY` once the runner-up weight is below 1e−28.
pub fn dominance_ratio(state: &[C64]) -> Result<f64> {
    if state.len() < 2 {
        return invalid("dominance ratio needs dimension at least 2");
    }
    check_norm(state)?;
    let (mut first, mut second) = (0.0f64, 0.0f64);
    for p in state.iter().map(|c| c.norm_sqr()) {
        if p > first {
            second = first;
            first = p;
        } else if p > second {
            second = p;
        }
    }
    Ok(if second < 1e-28 {
        f64::INFINITY
    } else {
        first / second
    })
}

/// Born-weighted share of projected states whose leading weight exceeds `threshold`.
pub fn dominant_fraction(pe: &ProjectedEnsemble, threshold: f64) -> f64 {
    pe.entries()
        .filter(|(_, _, psi)| leading_weight(psi) > threshold)
        .map(|(_, p, _)| p)
        .sum()
}

/// Per-state functionals that can be averaged over an ensemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Functional {
    Coherence,
    Ipr,
}

impl Functional {
    pub fn eval(&self, state: &[C64]) -> f64 {
        match self {
            Functional::Coherence => shannon_entropy(state),
            Functional::Ipr => ipr(state),
        }
    }

    /// Natural histogram range in dimension `d`.
    pub fn range(&self, d: usize) -> (f64, f64) {
        match self {
            Functional::Coherence => (0.0, (d as f64).ln()),
            Functional::Ipr => (1.0 / d as f64, 1.0),
        }
    }
}

/// Equal-width histogram with probability weights.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Histogram {
    /// Weighted histogram on `[lo, hi]`; values outside are clamped into the end bins.
    pub fn new(
        values: impl IntoIterator<Item = (f64, f64)>,
        lo: f64,
        hi: f64,
        bins: usize,
    ) -> Result<Self> {
        if bins == 0 || !(hi > lo) {
            return invalid(format!("bad histogram range [{lo}, {hi}] with {bins} bins"));
        }
        let width = (hi - lo) / bins as f64;
        let edges = (0..=bins).map(|i| lo + width * i as f64).collect();
        let mut weights = vec![0.0; bins];
        let mut total = 0.0;
        for (x, w) in values {
            let b = (((x - lo) / width).floor().max(0.0) as usize).min(bins - 1);
            weights[b] += w;
            total += w;
        }
        if total > 0.0 {
            weights.iter_mut().for_each(|w| *w /= total);
        }
        Ok(Self { edges, weights })
    }
}

/// Mean, standard error and optional distribution of a functional over an ensemble.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleStatistic {
    pub mean: f64,
    pub standard_error: f64,
    pub n_samples: usize,
    pub histogram: Option<Histogram>,
}

/// Born-weighted mean of `functional` over `pe`.
///
/// The standard error uses the weighted variance with effective sample size
/// `1/Σp²`, reducing to `s/√M` for equal weights and to 0 for a single entry.
pub fn ensemble_average(
    pe: &ProjectedEnsemble,
    functional: Functional,
    bins: Option<usize>,
) -> Result<EnsembleStatistic> {
    if pe.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let values: Vec<(f64, f64)> = pe
        .entries()
        .map(|(_, p, psi)| (functional.eval(psi), p))
        .collect();
    let (mean, standard_error) = weighted_mean_se(&values);
    let histogram = match bins {
        Some(b) => {
            let (lo, hi) = functional.range(pe.d_a());
            Some(Histogram::new(
                values.iter().copied(),
                lo,
                hi.max(lo + f64::EPSILON),
                b,
            )?)
        }
        None => None,
    };
    Ok(EnsembleStatistic {
        mean,
        standard_error,
        n_samples: pe.len(),
        histogram,
    })
}

/// `(Σ p x, SE)` for `(x, p)` pairs with `Σ p = 1`.
pub fn weighted_mean_se(values: &[(f64, f64)]) -> (f64, f64) {
    let mean: f64 = values.iter().map(|(x, p)| x * p).sum();
    let var: f64 = values.iter().map(|(x, p)| p * (x - mean).powi(2)).sum();
    let sum_p2: f64 = values.iter().map(|(_, p)| p * p).sum();
    let se = if 1.0 - sum_p2 > 1e-15 {
        (var * sum_p2 / (1.0 - sum_p2)).sqrt()
    } else {
        0.0
    };
    (mean, se)
}
