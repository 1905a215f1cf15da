//! Post-processing of sweep records: crossings, scaling collapse, distributions and
//! the exact-oracle validation suite.

use std::f64::consts::FRAC_PI_4;
use std::path::PathBuf;

use nalgebra::DMatrix;
use rpd_core::analysis::{crossing_scan, default_nu_grid, fss_collapse, Curve, CurvePoint};
use rpd_core::linalg::max_abs_diff;
use rpd_core::oracle::{
    binomial_top_gap_exact, binomial_top_gap_simulator, brute_force_permutation_average,
    monte_carlo_permutation_average,
};
use rpd_core::permdyn::SeedSpec;
use rpd_core::qstate::{
    make_mixed_state, make_tilted_state, purity, reduced_density_matrix, Bipartition, MixedParams,
    StateVector, TiltedParams,
};
use rpd_core::weingarten::{
    expected_purity_exact, mean_state_coeffs, weingarten_exact, weingarten_mobius, ModelParams,
};
use rpd_core::C64;
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::records::{curves_for, fmt_float, read_histograms, read_records, SweepRecord};

pub fn load_records(paths: &[PathBuf]) -> Result<Vec<SweepRecord>> {
    let mut out = Vec::new();
    for p in paths {
        out.extend(read_records(p)?.records);
    }
    Ok(out)
}

fn build_curves(records: &[SweepRecord], observable: &str, k: Option<usize>) -> Result<Vec<Curve>> {
    curves_for(records, observable, k)
        .into_iter()
        .map(|(n, pts)| {
            let points = pts
                .into_iter()
                .map(|(x, y, e)| CurvePoint::new(x, y, e))
                .collect();
            Curve::new(n, points).map_err(CliError::from)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairCrossing {
    pub sizes: [usize; 2],
    pub x_star: Option<f64>,
    pub x_star_err: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossingReport {
    pub observable: String,
    pub k: Option<usize>,
    pub sizes: [usize; 2],
    pub x_star: f64,
    pub x_star_err: f64,
    pub method: String,
    /// Crossings of every adjacent pair of sizes.
    pub adjacent: Vec<PairCrossing>,
}

/// Crossing of the curves for `sizes`, or of the two largest sizes when `sizes` is `None`.
pub fn crossing(
    records: &[SweepRecord],
    observable: &str,
    k: Option<usize>,
    sizes: Option<[usize; 2]>,
) -> Result<CrossingReport> {
    let curves = build_curves(records, observable, k)?;
    if curves.len() < 2 {
        return Err(CliError::InsufficientData(format!(
            "crossing needs two sizes of {observable}, found {}",
            curves.len()
        )));
    }
    let pick = |n: usize| {
        curves
            .iter()
            .find(|c| c.size == n)
            .ok_or_else(|| CliError::InsufficientData(format!("no {observable} curve at N={n}")))
    };
    let [na, nb] = sizes.unwrap_or([curves[curves.len() - 2].size, curves[curves.len() - 1].size]);
    let est = aligned_crossing(pick(na)?, pick(nb)?)?;
    let adjacent = curves
        .windows(2)
        .map(|w| match aligned_crossing(&w[0], &w[1]) {
            Ok(e) => PairCrossing {
                sizes: [w[0].size, w[1].size],
                x_star: Some(e.x_star),
                x_star_err: Some(e.x_star_err),
                error: None,
            },
            Err(e) => PairCrossing {
                sizes: [w[0].size, w[1].size],
                x_star: None,
                x_star_err: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    Ok(CrossingReport {
        observable: observable.to_string(),
        k,
        sizes: [na, nb],
        x_star: est.x_star,
        x_star_err: est.x_star_err,
        method: est.method.to_string(),
        adjacent,
    })
}

/// Linear interpolation of `c` at `x` with independent point errors propagated.
fn interpolate(c: &Curve, x: f64) -> CurvePoint {
    let pts = &c.points;
    let j = pts.partition_point(|p| p.x < x).clamp(1, pts.len() - 1);
    let (p, q) = (pts[j - 1], pts[j]);
    let t = (x - p.x) / (q.x - p.x);
    CurvePoint::new(
        x,
        (1.0 - t) * p.y + t * q.y,
        ((1.0 - t).powi(2) * p.y_err.powi(2) + t * t * q.y_err.powi(2)).sqrt(),
    )
}

/// Resamples both curves onto the union of their `x` values inside the shared range.
/// Curves that already share a grid are returned unchanged.
pub fn align_curves(a: &Curve, b: &Curve) -> Result<(Curve, Curve)> {
    let lo = a.points[0].x.max(b.points[0].x);
    let hi = a.points[a.points.len() - 1]
        .x
        .min(b.points[b.points.len() - 1].x);
    let tol = 1e-12;
    let mut xs: Vec<f64> = a
        .points
        .iter()
        .chain(&b.points)
        .map(|p| p.x)
        .filter(|&x| x >= lo - tol && x <= hi + tol)
        .collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|x, y| (*x - *y).abs() <= tol);
    let resample = |c: &Curve| {
        let points = xs
            .iter()
            .map(
                |&x| match c.points.iter().find(|p| (p.x - x).abs() <= tol) {
                    Some(p) => *p,
                    None => interpolate(c, x),
                },
            )
            .collect();
        Curve::new(c.size, points)
    };
    Ok((resample(a)?, resample(b)?))
}

fn aligned_crossing(a: &Curve, b: &Curve) -> Result<rpd_core::analysis::CrossingEstimate> {
    let (a, b) = align_curves(a, b)?;
    Ok(crossing_scan(&a, &b)?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FssReport {
    pub observable: String,
    pub k: Option<usize>,
    pub sizes: Vec<usize>,
    pub x_star: f64,
    pub nu: f64,
    pub nu_err: f64,
    pub objective: f64,
    pub nu_grid: Vec<f64>,
}

pub fn fss(
    records: &[SweepRecord],
    observable: &str,
    k: Option<usize>,
    x_star: f64,
    nu_grid: Option<Vec<f64>>,
) -> Result<FssReport> {
    let curves = build_curves(records, observable, k)?;
    let grid = nu_grid.unwrap_or_else(default_nu_grid);
    let r = fss_collapse(&curves, x_star, &grid)?;
    Ok(FssReport {
        observable: observable.to_string(),
        k,
        sizes: curves.iter().map(|c| c.size).collect(),
        x_star,
        nu: r.nu,
        nu_err: r.nu_err,
        objective: r.objective,
        nu_grid: r.grid,
    })
}

/// Parses `start:stop:step` into an inclusive grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || CliError::Config(format!("bad grid '{spec}', expected start:stop:step"));
    let parts: Vec<f64> = spec
        .split(':')
        .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let [start, stop, step] = parts[..] else {
        return Err(bad());
    };
    if !(step > 0.0) || stop < start {
        return Err(bad());
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| start + step * i as f64).collect())
}

/// Flattens histogram sidecars into CSV rows
/// `model,N,n_a,axis_value,observable,bin_lo,bin_hi,weight`.
pub fn distributions(paths: &[PathBuf]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record([
            "model",
            "N",
            "n_a",
            "axis_value",
            "observable",
            "bin_lo",
            "bin_hi",
            "weight",
        ])?;
        for p in paths {
            for h in read_histograms(p)?.histograms {
                for (i, weight) in h.weights.iter().enumerate() {
                    w.write_record([
                        h.model.clone(),
                        h.n.to_string(),
                        h.n_a.to_string(),
                        fmt_float(h.axis_value),
                        h.observable.clone(),
                        fmt_float(h.edges[i]),
                        fmt_float(h.edges[i + 1]),
                        fmt_float(*weight),
                    ])?;
                }
            }
        }
        w.flush().map_err(|e| CliError::io("<buffer>", e))?;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
}

impl Check {
    fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            passed: value <= tolerance,
            value,
            tolerance,
        }
    }
}

fn purity_functional(part: Bipartition) -> impl Fn(&StateVector) -> f64 + Copy {
    move |psi: &StateVector| purity(&reduced_density_matrix(psi, part).expect("matching sizes"))
}

/// Exact-oracle suite at `n ≤ 3` qubits with `N_A = 1`.
pub fn validate(n: usize, seed: u64) -> Result<Vec<Check>> {
    if !(2..=3).contains(&n) {
        return Err(CliError::Config(format!(
            "validate supports N in 2..=3, got {n}"
        )));
    }
    let part = Bipartition::split(n, 1)?;
    let f = purity_functional(part);
    let tilted = TiltedParams::new(FRAC_PI_4, FRAC_PI_4);
    let psi = make_tilted_state(n, &tilted)?;
    let mut checks = Vec::new();

    let exact = *brute_force_permutation_average(&psi, f)?
        .exact()
        .expect("exact");
    let formula = expected_purity_exact(n, 1, &ModelParams::Tilted(tilted))?;
    checks.push(Check::at_most(
        "tilted purity: formula vs enumeration",
        (exact - formula).abs(),
        1e-10,
    ));

    let mixed = MixedParams::with_count(n, 1)?;
    let psi_m = make_mixed_state(&mixed)?;
    let exact_m = *brute_force_permutation_average(&psi_m, f)?
        .exact()
        .expect("exact");
    let formula_m = expected_purity_exact(n, 1, &ModelParams::Mixed(mixed))?;
    checks.push(Check::at_most(
        "mixed purity: formula vs enumeration",
        (exact_m - formula_m).abs(),
        1e-10,
    ));

    let outer = |s: &StateVector| {
        let v = nalgebra::DVector::from_column_slice(s.amplitudes());
        &v * v.adjoint()
    };
    let mean = brute_force_permutation_average(&psi, outer)?
        .exact()
        .expect("exact")
        .clone();
    let (a, b) = mean_state_coeffs(n, &tilted)?;
    let d = psi.dim();
    let model = DMatrix::from_fn(d, d, |i, j| C64::new(if i == j { a + b } else { b }, 0.0));
    checks.push(Check::at_most(
        "mean state: coefficients vs enumeration",
        max_abs_diff(&mean, &model),
        1e-12,
    ));

    let wg = weingarten_exact(2, 8)?;
    let target = [[1.0 / 7.0, -1.0 / 56.0], [-1.0 / 56.0, 1.0 / 56.0]];
    let dev = (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .map(|(i, j)| (wg.wg[(i, j)] - target[i][j]).abs())
        .fold(0.0, f64::max);
    checks.push(Check::at_most(
        "weingarten closed form, order 2, d=8",
        dev,
        1e-15,
    ));

    for dim in [16, 32] {
        let gram = weingarten_exact(4, dim)?;
        let mob = weingarten_mobius(4, dim)?;
        let dev = (&gram.wg - &mob.wg).amax();
        checks.push(Check::at_most(
            &format!("weingarten routes agree, order 4, d={dim}"),
            dev,
            1e-10,
        ));
    }

    let mc = monte_carlo_permutation_average(&psi, f, 1000, SeedSpec::new(seed))?;
    let (m, se) = mc.mean_se().expect("monte carlo");
    checks.push(Check::at_most(
        "monte carlo vs enumeration, in SE",
        (m - exact).abs() / se,
        4.0,
    ));

    let p = binomial_top_gap_exact(2, 2, 0.3)?;
    let sim =
        binomial_top_gap_simulator(2, 2, 0.3, 100_000, &mut SeedSpec::new(seed).stream(&[1]))?;
    checks.push(Check::at_most(
        "top-gap simulator vs enumeration, in SE",
        (sim.probability - p).abs() / sim.standard_error,
        4.0,
    ));
    Ok(checks)
}
