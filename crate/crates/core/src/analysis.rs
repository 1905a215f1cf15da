//! Sample statistics, crossing points, scaling collapse and threshold solvers.

use std::f64::consts::{LN_2, PI};

use crate::error::{invalid, Error, Result};
use crate::qstate::TiltedParams;

/// Mean and standard error (sample deviation with `M−1`, divided by `√M`).
pub fn mean_se(samples: &[f64]) -> Result<(f64, f64)> {
    let m = samples.len();
    if m < 2 {
        return Err(Error::InsufficientData(format!(
            "mean_se needs at least 2 samples, got {m}"
        )));
    }
    let mf = m as f64;
    let mean = samples.iter().sum::<f64>() / mf;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (mf - 1.0);
    Ok((mean, (var / mf).sqrt()))
}

/// One measured point of a curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub x: f64,
    pub y: f64,
    pub y_err: f64,
}

impl CurvePoint {
    pub fn new(x: f64, y: f64, y_err: f64) -> Self {
        Self { x, y, y_err }
    }
}

/// Measurements at one system size, `x` strictly increasing.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    pub size: usize,
    pub points: Vec<CurvePoint>,
}

impl Curve {
    pub fn new(size: usize, points: Vec<CurvePoint>) -> Result<Self> {
        if points.windows(2).any(|w| !(w[1].x > w[0].x)) {
            return invalid(format!(
                "x values for size {size} are not strictly increasing"
            ));
        }
        if points.iter().any(|p| !(p.y_err >= 0.0)) {
            return invalid("negative or missing y error");
        }
        Ok(Self { size, points })
    }

    /// Piecewise-linear value at `x` inside the sampled range.
    fn interpolate(&self, xs: &[f64], x: f64) -> f64 {
        let i = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1);
        let (x0, x1) = (xs[i - 1], xs[i]);
        let (y0, y1) = (self.points[i - 1].y, self.points[i].y);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

/// Crossing of two sizes' curves with its propagated error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossingEstimate {
    pub x_star: f64,
    pub x_star_err: f64,
    pub method: &'static str,
}

/// Intersection of the straight lines through two points of each size.
///
/// Both sizes must share the two `x` values and `y_a − y_b` must change sign between them.
/// The error is first-order propagation through all four `y` values.
pub fn crossing_point(a: [CurvePoint; 2], b: [CurvePoint; 2]) -> Result<CrossingEstimate> {
    let (x1, x2) = (a[0].x, a[1].x);
    let tol = 1e-12 * (x1.abs() + x2.abs()).max(1.0);
    if (b[0].x - x1).abs() > tol || (b[1].x - x2).abs() > tol {
        return invalid("both sizes must be sampled at the same two x values");
    }
    if !(x2 > x1) {
        return invalid("x values must be increasing");
    }
    let d1 = a[0].y - b[0].y;
    let d2 = a[1].y - b[1].y;
    if d1 == d2 {
        return Err(Error::NoCrossing("the two lines are parallel".into()));
    }
    if d1 * d2 > 0.0 {
        return Err(Error::NoCrossing(
            "no sign change between the two x values".into(),
        ));
    }
    let denom = d1 - d2;
    let t = d1 / denom;
    let dx = x2 - x1;
    let var = dx
        * dx
        * (d2 * d2 * (a[0].y_err.powi(2) + b[0].y_err.powi(2))
            + d1 * d1 * (a[1].y_err.powi(2) + b[1].y_err.powi(2)))
        / denom.powi(4);
    Ok(CrossingEstimate {
        x_star: x1 + t * dx,
        x_star_err: var.sqrt(),
        method: "two-size-linear",
    })
}

/// Crossing between two curves on a shared grid, using the first adjacent pair of
/// grid points that brackets a sign change.
pub fn crossing_scan(a: &Curve, b: &Curve) -> Result<CrossingEstimate> {
    let shared: Vec<(CurvePoint, CurvePoint)> = a
        .points
        .iter()
        .filter_map(|p| {
            b.points
                .iter()
                .find(|q| (q.x - p.x).abs() <= 1e-12 * p.x.abs().max(1.0))
                .map(|q| (*p, *q))
        })
        .collect();
    if shared.len() < 2 {
        return Err(Error::InsufficientData(
            "curves share fewer than two x values".into(),
        ));
    }
    for w in shared.windows(2) {
        let (d1, d2) = (w[0].0.y - w[0].1.y, w[1].0.y - w[1].1.y);
        if d1 * d2 <= 0.0 && d1 != d2 {
            return crossing_point([w[0].0, w[1].0], [w[0].1, w[1].1]);
        }
    }
    Err(Error::NoCrossing(format!(
        "sizes {} and {} do not cross on the shared grid",
        a.size, b.size
    )))
}

/// Best critical exponent of a scaling collapse.
#[derive(Clone, Debug, PartialEq)]
pub struct CollapseResult {
    pub nu: f64,
    pub nu_err: f64,
    pub objective: f64,
    pub grid: Vec<f64>,
}

/// `0.5, 0.55, …, 2.5`.
pub fn default_nu_grid() -> Vec<f64> {
    (0..=40).map(|i| 0.5 + 0.05 * i as f64).collect()
}

const COLLAPSE_POINTS: usize = 100;

/// Mean across-size variance of the rescaled curves on their common window, or `None`
/// when the window is empty.
pub fn collapse_objective(curves: &[Curve], x_star: f64, nu: f64) -> Option<f64> {
    let scaled: Vec<Vec<f64>> = curves
        .iter()
        .map(|c| {
            let s = (c.size as f64).powf(1.0 / nu);
            c.points.iter().map(|p| (p.x - x_star) * s).collect()
        })
        .collect();
    let lo = scaled
        .iter()
        .map(|u| u[0])
        .fold(f64::NEG_INFINITY, f64::max);
    let hi = scaled
        .iter()
        .map(|u| *u.last().unwrap())
        .fold(f64::INFINITY, f64::min);
    if !(hi > lo) {
        return None;
    }
    let k = curves.len() as f64;
    let mut total = 0.0;
    for g in 0..COLLAPSE_POINTS {
        let u = lo + (hi - lo) * g as f64 / (COLLAPSE_POINTS - 1) as f64;
        let ys: Vec<f64> = curves
            .iter()
            .zip(&scaled)
            .map(|(c, us)| c.interpolate(us, u))
            .collect();
        let mean = ys.iter().sum::<f64>() / k;
        total += ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / k;
    }
    Some(total / COLLAPSE_POINTS as f64)
}

fn argmin_nu(curves: &[Curve], x_star: f64, nu_grid: &[f64]) -> Option<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for &nu in nu_grid {
        if let Some(obj) = collapse_objective(curves, x_star, nu) {
            // Ties go to the smaller ν.
            if best.is_none_or(|(bn, bo)| obj < bo || (obj == bo && nu < bn)) {
                best = Some((nu, obj));
            }
        }
    }
    best
}

/// Scans `nu_grid` for the ν minimizing the collapse objective of `y` against
/// `(x − x*) N^{1/ν}`; `nu_err` is half the spread of leave-one-size-out argmins.
pub fn fss_collapse(curves: &[Curve], x_star: f64, nu_grid: &[f64]) -> Result<CollapseResult> {
    if curves.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "collapse needs at least 3 sizes, got {}",
            curves.len()
        )));
    }
    if let Some(c) = curves.iter().find(|c| c.points.len() < 4) {
        return Err(Error::InsufficientData(format!(
            "size {} has {} points, need at least 4",
            c.size,
            c.points.len()
        )));
    }
    let (nu, objective) = argmin_nu(curves, x_star, nu_grid)
        .ok_or_else(|| Error::InsufficientData("no ν gives an overlapping window".into()))?;
    let jack: Vec<f64> = (0..curves.len())
        .filter_map(|skip| {
            let rest: Vec<Curve> = curves
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, c)| c.clone())
                .collect();
            argmin_nu(&rest, x_star, nu_grid).map(|(n, _)| n)
        })
        .collect();
    let spread = jack.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - jack.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(CollapseResult {
        nu,
        nu_err: if jack.is_empty() { 0.0 } else { spread / 2.0 },
        objective,
        grid: nu_grid.to_vec(),
    })
}

/// `H₂(p) = −p ln p − (1−p) ln(1−p)`, in nats.
pub fn binary_entropy(p: f64) -> f64 {
    let h = |q: f64| if q > 0.0 { -q * q.ln() } else { 0.0 };
    h(p) + h(1.0 - p)
}

/// `θ_m ∈ [0, π/2]` solving `H₂(cos²(θ₀/2)) + H₂(cos²(θ_m/2)) = ln 2`, by bisection.
pub fn coherence_matched_threshold(theta0: f64) -> Result<f64> {
    if !(theta0 > 0.0 && theta0 < PI) {
        return invalid(format!("theta0={theta0} outside (0, π)"));
    }
    let h = |t: f64| binary_entropy((t / 2.0).cos().powi(2));
    let target = LN_2 - h(theta0);
    let (mut lo, mut hi) = (0.0f64, PI / 2.0);
    if target <= 0.0 {
        return Ok(0.0);
    }
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if h(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `m(m−1)(2[N^α]+3) / (2√(πN))`.
pub fn lemma1_bound(m: usize, n: usize, alpha: f64) -> f64 {
    let floor = (n as f64).powf(alpha).floor();
    (m * (m - 1)) as f64 * (2.0 * floor + 3.0) / (2.0 * (PI * n as f64).sqrt())
}

/// Empirical probability of a large top-coefficient gap and the corresponding lower bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Theorem2Check {
    pub empirical_prob: f64,
    pub bound: f64,
    /// `ω^{N^α}`.
    pub threshold: f64,
}

/// Compares weighted dominance-ratio samples `(ratio, weight)` against `ω^{N^α}` with
/// `ω = max(cot²(θ₀/2), tan²(θ₀/2))`, and evaluates
/// `1 − (d_A(d_A−1)/2 · (2[N^α]+3)/√(πN) + d_A(d_A−1)/2^{N+1})`.
pub fn theorem2_suite(
    samples: &[(f64, f64)],
    n: usize,
    n_a: usize,
    alpha: f64,
    t: &TiltedParams,
) -> Result<Theorem2Check> {
    let half = t.theta0 / 2.0;
    let (c, s) = (half.cos().powi(2), half.sin().powi(2));
    let omega = (c / s).max(s / c);
    if !(omega > 1.0 + 1e-12) || !omega.is_finite() {
        return Err(Error::ExcludedParameters(format!(
            "theta0={} gives omega={omega}",
            t.theta0
        )));
    }
    let total: f64 = samples.iter().map(|(_, w)| w).sum();
    if samples.is_empty() || !(total > 0.0) {
        return Err(Error::EmptyEnsemble);
    }
    let n_alpha = (n as f64).powf(alpha);
    let threshold = omega.powf(n_alpha);
    let hit: f64 = samples
        .iter()
        .filter(|(r, _)| *r >= threshold)
        .map(|(_, w)| w)
        .sum();
    let d_a = (n_a as f64).exp2();
    let pairs = d_a * (d_a - 1.0);
    let bound = 1.0
        - (pairs / 2.0 * (2.0 * n_alpha.floor() + 3.0) / (PI * n as f64).sqrt()
            + pairs / (n as f64 + 1.0).exp2());
    Ok(Theorem2Check {
        empirical_prob: hit / total,
        bound,
        threshold,
    })
}
