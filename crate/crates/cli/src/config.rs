//! Experiment configuration: TOML schema, validation and grid expansion.
//!
//! ```toml
//! sizes = [12, 16, 20]
//! n_a = 2
//! samples = 200            # omit for the default ladder
//! master_seed = 7
//! moments = [2]
//! observables = ["trace_dist_haar", "coherence"]
//! histogram_bins = 50      # optional, enables the .hist.json sidecar
//! output = "sweep.csv"
//!
//! [model]
//! kind = "mixed"           # or "tilted" with theta0_over_pi, phi0_over_pi
//! alpha0 = 0.5
//!
//! [dynamics]
//! kind = "global"          # or "brickwork" with gate_width, depth or depth_per_qubit
//!
//! [sweep]
//! alpha_m = [0.3, 0.4, 0.5, 0.6, 0.7]
//! rounding = "nearest"     # or "exact"
//! # tilted: theta_m_over_pi = [...], phi_m_over_pi = 0.0
//! ```

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use rpd_core::permdyn::BrickworkConfig;
use rpd_core::projens::{MeasurementBasis, DEFAULT_MOMENT_CAP, MAX_HAAR_ORDER};
use rpd_core::qstate::{integer_count, MixedParams, TiltedParams, MAX_QUBITS};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    TraceDistHaar,
    TraceDistCl,
    TraceDistOhaar,
    Coherence,
    Ipr,
    Dominance,
    Purity,
}

impl Observable {
    pub const ALL: [Observable; 7] = [
        Self::TraceDistHaar,
        Self::TraceDistCl,
        Self::TraceDistOhaar,
        Self::Coherence,
        Self::Ipr,
        Self::Dominance,
        Self::Purity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::TraceDistHaar => "trace_dist_haar",
            Self::TraceDistCl => "trace_dist_cl",
            Self::TraceDistOhaar => "trace_dist_ohaar",
            Self::Coherence => "coherence",
            Self::Ipr => "ipr",
            Self::Dominance => "dominance",
            Self::Purity => "purity",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|o| o.name() == name)
    }

    /// Whether the observable is indexed by a moment order `k`.
    pub fn is_moment(self) -> bool {
        matches!(
            self,
            Self::TraceDistHaar | Self::TraceDistCl | Self::TraceDistOhaar
        )
    }

    pub fn has_histogram(self) -> bool {
        matches!(self, Self::Coherence | Self::Ipr)
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelConfig {
    Tilted {
        theta0_over_pi: f64,
        phi0_over_pi: f64,
    },
    Mixed {
        alpha0: f64,
    },
}

impl ModelConfig {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Tilted { .. } => "tilted",
            Self::Mixed { .. } => "mixed",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DynamicsConfig {
    #[default]
    Global,
    Brickwork {
        #[serde(default = "default_gate_width")]
        gate_width: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        depth: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        depth_per_qubit: Option<usize>,
    },
}

fn default_gate_width() -> usize {
    3
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rounding {
    /// Reject fractions that do not give an integer qubit count.
    #[default]
    Exact,
    /// Snap to the nearest admissible fraction `n_x / N_B`.
    Nearest,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_m_over_pi: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_m_over_pi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_m: Option<Vec<f64>>,
    #[serde(default)]
    pub rounding: Rounding,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub sizes: Vec<usize>,
    pub n_a: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    pub master_seed: u64,
    #[serde(default = "default_moments")]
    pub moments: Vec<usize>,
    pub observables: Vec<Observable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub histogram_bins: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub model: ModelConfig,
    #[serde(default)]
    pub dynamics: DynamicsConfig,
    pub sweep: SweepConfig,
}

fn default_moments() -> Vec<usize> {
    vec![2]
}

/// Default samples per point: 10⁴ at N ≤ 12 falling log-linearly to 10² at N = 24.
pub fn default_samples(n: usize) -> usize {
    let n = n.clamp(12, 24) as f64;
    10f64.powf(4.0 - (n - 12.0) / 6.0).round() as usize
}

/// One `(N, axis value)` point of the sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct GridPoint {
    pub n: usize,
    /// Position of `n` in `sizes`; samples at equal `size_index` share random streams.
    pub size_index: usize,
    /// `θ_m/π` for tilted sweeps or the realized `α_m` for mixed sweeps.
    pub axis_value: f64,
    pub basis: MeasurementBasis,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// The config as echoed into output files, without the output path.
    pub fn echo(&self) -> Result<String> {
        let mut c = self.clone();
        c.output = None;
        Ok(serde_json::to_string(&c)?)
    }

    pub fn samples_for(&self, n: usize) -> usize {
        self.samples.unwrap_or_else(|| default_samples(n))
    }

    pub fn brickwork(&self, n: usize) -> Option<BrickworkConfig> {
        match self.dynamics {
            DynamicsConfig::Global => None,
            DynamicsConfig::Brickwork {
                gate_width,
                depth,
                depth_per_qubit,
            } => Some(BrickworkConfig::new(
                gate_width,
                depth.unwrap_or_else(|| depth_per_qubit.unwrap_or(4) * n),
            )),
        }
    }

    pub fn tilted_params(&self) -> Option<TiltedParams> {
        match self.model {
            ModelConfig::Tilted {
                theta0_over_pi,
                phi0_over_pi,
            } => Some(TiltedParams::from_pi_units(theta0_over_pi, phi0_over_pi)),
            ModelConfig::Mixed { .. } => None,
        }
    }

    pub fn mixed_params(&self, n: usize) -> Result<Option<MixedParams>> {
        match self.model {
            ModelConfig::Mixed { alpha0 } => Ok(Some(MixedParams::new(n, alpha0)?)),
            ModelConfig::Tilted { .. } => Ok(None),
        }
    }

    /// `(observable, k)` pairs in output order; `k` is `None` for non-moment observables.
    pub fn observable_slots(&self) -> Vec<(Observable, Option<usize>)> {
        let mut out = Vec::new();
        for &o in &self.observables {
            if o.is_moment() {
                out.extend(self.moments.iter().map(|&k| (o, Some(k))));
            } else {
                out.push((o, None));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.sizes.is_empty() {
            return bad("sizes is empty".into());
        }
        let min_n = *self.sizes.iter().min().expect("non-empty");
        if let Some(&n) = self.sizes.iter().find(|&&n| n > MAX_QUBITS) {
            return bad(format!("N={n} exceeds {MAX_QUBITS}"));
        }
        if self.n_a == 0 || self.n_a >= min_n {
            return bad(format!(
                "need 0 < n_a < min(sizes), got n_a={} and min N={min_n}",
                self.n_a
            ));
        }
        let mut seen = self.sizes.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.sizes.len() {
            return bad("sizes contains duplicates".into());
        }
        if self.samples.is_some_and(|s| s < 2) {
            return bad("samples must be at least 2".into());
        }
        if self.observables.is_empty() {
            return bad("observables is empty".into());
        }
        let d_a = 1usize << self.n_a;
        for &k in &self.moments {
            if k == 0 || k > MAX_HAAR_ORDER {
                return bad(format!("moment order k={k} outside 1..={MAX_HAAR_ORDER}"));
            }
            if d_a
                .checked_pow(k as u32)
                .is_none_or(|dim| dim > DEFAULT_MOMENT_CAP)
            {
                return bad(format!("d_A^k = {d_a}^{k} exceeds {DEFAULT_MOMENT_CAP}"));
            }
            if k > 2 && self.observables.contains(&Observable::TraceDistOhaar) {
                return bad(format!("trace_dist_ohaar supports k <= 2, got k={k}"));
            }
        }
        if self.histogram_bins == Some(0) {
            return bad("histogram_bins must be positive".into());
        }
        match (
            &self.model,
            &self.sweep.theta_m_over_pi,
            &self.sweep.alpha_m,
        ) {
            (ModelConfig::Tilted { .. }, Some(t), None) if !t.is_empty() => {}
            (ModelConfig::Mixed { .. }, None, Some(a)) if !a.is_empty() => {}
            (ModelConfig::Tilted { .. }, _, _) => {
                return bad(
                    "tilted model needs a non-empty sweep.theta_m_over_pi and no alpha_m".into(),
                )
            }
            (ModelConfig::Mixed { .. }, _, _) => {
                return bad(
                    "mixed model needs a non-empty sweep.alpha_m and no theta_m_over_pi".into(),
                )
            }
        }
        if let ModelConfig::Mixed { alpha0 } = self.model {
            for &n in &self.sizes {
                if integer_count(alpha0, n).is_none() {
                    return bad(format!(
                        "alpha0={alpha0} gives a non-integer qubit count at N={n}"
                    ));
                }
            }
        }
        if let Some(bw) = self.brickwork(min_n) {
            if bw.gate_width < 2 || bw.gate_width > min_n {
                return bad(format!(
                    "gate_width={} must lie in 2..=min(sizes)",
                    bw.gate_width
                ));
            }
        }
        self.grid().map(|_| ())
    }

    /// All grid points in output order: sizes outermost, axis values in listed order.
    pub fn grid(&self) -> Result<Vec<GridPoint>> {
        let mut out = Vec::new();
        for (size_index, &n) in self.sizes.iter().enumerate() {
            let n_b = n - self.n_a;
            if let Some(thetas) = &self.sweep.theta_m_over_pi {
                let phi = self.sweep.phi_m_over_pi.unwrap_or(0.0) * PI;
                for &t in thetas {
                    out.push(GridPoint {
                        n,
                        size_index,
                        axis_value: t,
                        basis: MeasurementBasis::uniform(n_b, t * PI, phi),
                    });
                }
            }
            if let Some(alphas) = &self.sweep.alpha_m {
                let mut used = Vec::new();
                for &a in alphas {
                    if !(0.0..=1.0).contains(&a) {
                        return Err(CliError::Config(format!("alpha_m={a} outside [0, 1]")));
                    }
                    let n_x = match self.sweep.rounding {
                        Rounding::Exact => integer_count(a, n_b).ok_or_else(|| {
                            CliError::Config(format!(
                                "alpha_m={a} gives a non-integer qubit count at N_B={n_b}; \
                                 set sweep.rounding = \"nearest\" to snap"
                            ))
                        })?,
                        Rounding::Nearest => (a * n_b as f64).round() as usize,
                    };
                    if used.contains(&n_x) {
                        continue;
                    }
                    used.push(n_x);
                    out.push(GridPoint {
                        n,
                        size_index,
                        axis_value: n_x as f64 / n_b as f64,
                        basis: MeasurementBasis::with_x_count(n_b, n_x),
                    });
                }
            }
        }
        Ok(out)
    }
}
