//! Browser bindings for three small demos on the tilted model: the Haar distance curve
//! across measurement angles, the coherence distribution of one projected ensemble, and the
//! analytic threshold predictions.

use std::f64::consts::PI;

use rpd_core::analysis::{coherence_matched_threshold, mean_se};
use rpd_core::permdyn::{apply_global_permutation, sample_permutation, SeedSpec};
use rpd_core::projens::{
    build_projected_ensemble, haar_moment, pe_moment, trace_distance, MeasurementBasis,
};
use rpd_core::qstate::{make_tilted_state, Bipartition, StateVector, TiltedParams};
use rpd_core::resources::{ensemble_average, haar_average_coherence, Functional};
use rpd_core::weingarten::annealed_boundary_angle;
use wasm_bindgen::prelude::*;

/// Largest system the page accepts; keeps a click under a few seconds.
pub const MAX_DEMO_QUBITS: usize = 14;

fn check(n: usize, n_a: usize, samples: usize) -> rpd_core::Result<()> {
    if n > MAX_DEMO_QUBITS {
        return Err(rpd_core::Error::TooLarge {
            what: "demo qubits",
            value: n,
            max: MAX_DEMO_QUBITS,
        });
    }
    if n_a == 0 || n_a >= n || n_a > 3 {
        return Err(rpd_core::Error::InvalidParameter(format!(
            "need 1 ≤ N_A ≤ 3 and N_A < N, got {n_a}"
        )));
    }
    if samples < 2 {
        return Err(rpd_core::Error::InvalidParameter(
            "need at least 2 samples".into(),
        ));
    }
    Ok(())
}

fn sampled_states(
    theta0_over_pi: f64,
    phi0_over_pi: f64,
    n: usize,
    samples: usize,
    seed: u64,
) -> rpd_core::Result<Vec<StateVector>> {
    let psi = make_tilted_state(
        n,
        &TiltedParams::from_pi_units(theta0_over_pi, phi0_over_pi),
    )?;
    let spec = SeedSpec::new(seed);
    (0..samples)
        .map(|s| {
            let perm = sample_permutation(psi.dim(), &mut spec.stream(&[s as u64]))?;
            apply_global_permutation(&psi, &perm)
        })
        .collect()
}

/// `[mean₀, se₀, mean₁, se₁, …]` of `Δ⁽²⁾_Haar` at each `θ_m/π`, with `φ_m = 0`.
pub fn haar_distance_curve(
    theta0_over_pi: f64,
    phi0_over_pi: f64,
    n: usize,
    n_a: usize,
    theta_m_over_pi: &[f64],
    samples: usize,
    seed: u64,
) -> rpd_core::Result<Vec<f64>> {
    check(n, n_a, samples)?;
    let part = Bipartition::split(n, n_a)?;
    let haar = haar_moment(part.d_a(), 2)?;
    let states = sampled_states(theta0_over_pi, phi0_over_pi, n, samples, seed)?;
    let mut out = Vec::with_capacity(2 * theta_m_over_pi.len());
    for &t in theta_m_over_pi {
        let basis = MeasurementBasis::uniform(part.n_b(), t * PI, 0.0);
        let mut values = Vec::with_capacity(samples);
        for psi in &states {
            let pe = build_projected_ensemble(psi, part, &basis)?;
            values.push(trace_distance(&pe_moment(&pe, 2)?, &haar)?);
        }
        let (m, se) = mean_se(&values)?;
        out.extend([m, se]);
    }
    Ok(out)
}

/// Born-weighted coherence histogram on `[0, ln d_A]` pooled over samples, followed by the
/// ensemble mean and the Haar value: `[w₀, …, w_{bins−1}, mean, haar]`.
#[allow(clippy::too_many_arguments)]
pub fn coherence_distribution(
    theta0_over_pi: f64,
    phi0_over_pi: f64,
    n: usize,
    n_a: usize,
    theta_m_over_pi: f64,
    samples: usize,
    bins: usize,
    seed: u64,
) -> rpd_core::Result<Vec<f64>> {
    check(n, n_a, samples)?;
    let part = Bipartition::split(n, n_a)?;
    let basis = MeasurementBasis::uniform(part.n_b(), theta_m_over_pi * PI, 0.0);
    let mut weights = vec![0.0; bins];
    let mut mean = 0.0;
    for psi in sampled_states(theta0_over_pi, phi0_over_pi, n, samples, seed)? {
        let pe = build_projected_ensemble(&psi, part, &basis)?;
        let stat = ensemble_average(&pe, Functional::Coherence, Some(bins))?;
        mean += stat.mean / samples as f64;
        for (w, x) in weights
            .iter_mut()
            .zip(stat.histogram.expect("bins requested").weights)
        {
            *w += x / samples as f64;
        }
    }
    weights.extend([mean, haar_average_coherence(part.d_a())]);
    Ok(weights)
}

/// `[coherence-matched θ_m/π, annealed-IPR boundary θ_m/π]` for a given `θ₀/π`.
pub fn threshold_predictions(theta0_over_pi: f64) -> rpd_core::Result<Vec<f64>> {
    let theta0 = theta0_over_pi * PI;
    Ok(vec![
        coherence_matched_threshold(theta0)? / PI,
        annealed_boundary_angle(theta0)? / PI,
    ])
}

fn js(e: rpd_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = haarDistanceCurve)]
pub fn haar_distance_curve_js(
    theta0_over_pi: f64,
    phi0_over_pi: f64,
    n: usize,
    n_a: usize,
    theta_m_over_pi: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Vec<f64>, JsError> {
    haar_distance_curve(
        theta0_over_pi,
        phi0_over_pi,
        n,
        n_a,
        theta_m_over_pi,
        samples,
        seed,
    )
    .map_err(js)
}

#[wasm_bindgen(js_name = coherenceDistribution)]
#[allow(clippy::too_many_arguments)]
pub fn coherence_distribution_js(
    theta0_over_pi: f64,
    phi0_over_pi: f64,
    n: usize,
    n_a: usize,
    theta_m_over_pi: f64,
    samples: usize,
    bins: usize,
    seed: u64,
) -> Result<Vec<f64>, JsError> {
    coherence_distribution(
        theta0_over_pi,
        phi0_over_pi,
        n,
        n_a,
        theta_m_over_pi,
        samples,
        bins,
        seed,
    )
    .map_err(js)
}

#[wasm_bindgen(js_name = thresholdPredictions)]
pub fn threshold_predictions_js(theta0_over_pi: f64) -> Result<Vec<f64>, JsError> {
    threshold_predictions(theta0_over_pi).map_err(js)
}
