//! Parallel, deterministic, resumable sweep execution.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use rpd_core::analysis::mean_se;
use rpd_core::permdyn::{
    apply_global_permutation, evolve_brickwork, sample_permutation, BrickworkConfig, SeedSpec,
    Snapshots,
};
use rpd_core::projens::{
    classical_moment, haar_moment, orthogonal_haar_moment, pe_moment, rotate_qubit, trace_distance,
    Axis, MomentOperator, ProjectedEnsemble, DEFAULT_P_FLOOR,
};
use rpd_core::qstate::{
    make_mixed_state, make_tilted_state, purity, reduced_density_matrix, Bipartition, StateVector,
};
use rpd_core::resources::{dominant_fraction, ensemble_average, Functional};
use rpd_core::C64;

use crate::config::{ExperimentConfig, GridPoint, Observable};
use crate::error::{CliError, Result};
use crate::records::{
    fmt_float, read_histograms, read_records, render_histograms, render_records, sidecar_path,
    write_atomic, HistogramFile, HistogramRecord, PointKey, SweepRecord,
};

/// Leading-weight threshold for the `dominance` observable.
pub const DOMINANCE_THRESHOLD: f64 = 0.99;

/// Environment variable that overrides the worker count when `--threads` is absent.
pub const THREADS_ENV: &str = "RPD_THREADS";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepSummary {
    pub output: PathBuf,
    pub computed_points: usize,
    pub skipped_points: usize,
}

pub fn resolve_threads(flag: Option<usize>) -> Option<usize> {
    flag.or_else(|| std::env::var(THREADS_ENV).ok()?.trim().parse().ok())
        .filter(|&t| t > 0)
}

/// Everything shared by the samples of one system size.
struct SizeTask<'a> {
    cfg: &'a ExperimentConfig,
    part: Bipartition,
    initial: StateVector,
    points: Vec<&'a GridPoint>,
    slots: Vec<(Observable, Option<usize>)>,
    references: Vec<Option<MomentOperator>>,
    hist_observables: Vec<Observable>,
    brickwork: Option<BrickworkConfig>,
    seed: SeedSpec,
    size_index: u64,
}

/// Per-sample output: `values[point][slot]` and `hists[point][h]`.
struct SampleOutput {
    values: Vec<Vec<f64>>,
    hists: Vec<Vec<Vec<f64>>>,
}

impl SizeTask<'_> {
    fn evolve(&self, sample: usize) -> Result<StateVector> {
        let mut rng = self.seed.stream(&[self.size_index, sample as u64]);
        Ok(match &self.brickwork {
            None => {
                let perm = sample_permutation(self.initial.dim(), &mut rng)?;
                apply_global_permutation(&self.initial, &perm)?
            }
            Some(bw) => evolve_brickwork(&self.initial, bw, &mut rng, Snapshots::FinalOnly)?
                .pop()
                .expect("final snapshot"),
        })
    }

    fn run_sample(&self, sample: usize) -> Result<SampleOutput> {
        let state = self.evolve(sample)?;
        let n = self.part.num_qubits();
        let n_a = self.part.n_a();
        let rho_purity = if self.slots.iter().any(|(o, _)| *o == Observable::Purity) {
            purity(&reduced_density_matrix(&state, self.part)?)
        } else {
            f64::NAN
        };
        let bins = self.cfg.histogram_bins;
        let mut out = SampleOutput {
            values: Vec::with_capacity(self.points.len()),
            hists: Vec::with_capacity(self.points.len()),
        };
        let mut rotated: Vec<C64> = Vec::new();
        let mut previous: Option<&[Axis]> = None;
        for point in &self.points {
            let axes = point.basis.axes();
            let start = match previous.and_then(|p| chain_start(p, axes)) {
                Some(j) => j,
                None => {
                    rotated.clear();
                    rotated.extend_from_slice(state.amplitudes());
                    axes.len()
                }
            };
            for q in (0..start).rev() {
                rotate_qubit(&mut rotated, n, n_a + q, &axes[q]);
            }
            previous = Some(axes);
            let pe = ProjectedEnsemble::from_rotated(&rotated, self.part, DEFAULT_P_FLOOR)?;
            let mut moments: BTreeMap<usize, MomentOperator> = BTreeMap::new();
            let mut row = Vec::with_capacity(self.slots.len());
            for (slot, reference) in self.slots.iter().zip(&self.references) {
                let v = match *slot {
                    (_, Some(k)) => {
                        let moment = match moments.entry(k) {
                            Entry::Occupied(o) => o.into_mut(),
                            Entry::Vacant(v) => v.insert(pe_moment(&pe, k)?),
                        };
                        trace_distance(moment, reference.as_ref().expect("reference moment"))?
                    }
                    (Observable::Coherence, None) => {
                        ensemble_average(&pe, Functional::Coherence, None)?.mean
                    }
                    (Observable::Ipr, None) => ensemble_average(&pe, Functional::Ipr, None)?.mean,
                    (Observable::Dominance, None) => dominant_fraction(&pe, DOMINANCE_THRESHOLD),
                    (Observable::Purity, None) => rho_purity,
                    (o, None) => unreachable!("{o} is a moment observable"),
                };
                row.push(v);
            }
            let mut hist_row = Vec::new();
            if let Some(b) = bins {
                for &o in &self.hist_observables {
                    let f = if o == Observable::Coherence {
                        Functional::Coherence
                    } else {
                        Functional::Ipr
                    };
                    let h = ensemble_average(&pe, f, Some(b))?
                        .histogram
                        .expect("histogram requested");
                    hist_row.push(h.weights);
                }
            }
            out.values.push(row);
            out.hists.push(hist_row);
        }
        Ok(out)
    }
}

/// B qubits are rotated from the last to the first. When `next` agrees with `previous` on
/// qubits `j..` and `previous` is Z on `..j`, a buffer rotated for `previous` only needs
/// qubits `..j` rotated to match a fresh rotation for `next` bit for bit.
fn chain_start(previous: &[Axis], next: &[Axis]) -> Option<usize> {
    let j = (0..next.len())
        .rev()
        .find(|&q| previous[q] != next[q])
        .map_or(0, |q| q + 1);
    previous[..j].iter().all(|a| *a == Axis::Z).then_some(j)
}

fn reference_moment(o: Observable, d_a: usize, k: usize) -> Result<MomentOperator> {
    Ok(match o {
        Observable::TraceDistHaar => haar_moment(d_a, k)?,
        Observable::TraceDistCl => classical_moment(d_a, k)?,
        Observable::TraceDistOhaar => orthogonal_haar_moment(d_a, k)?,
        _ => unreachable!("{o} has no reference moment"),
    })
}

fn initial_state(cfg: &ExperimentConfig, n: usize) -> Result<StateVector> {
    if let Some(t) = cfg.tilted_params() {
        return Ok(make_tilted_state(n, &t)?);
    }
    let m = cfg.mixed_params(n)?.expect("mixed model");
    Ok(make_mixed_state(&m)?)
}

fn build_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = resolve_threads(threads) {
        b = b.num_threads(t);
    }
    b.build().map_err(|e| CliError::ThreadPool(e.to_string()))
}

/// Runs every grid point not already present in `output`, rewriting the file after each size.
pub fn run_sweep(
    cfg: &ExperimentConfig,
    output: &Path,
    threads: Option<usize>,
) -> Result<SweepSummary> {
    cfg.validate()?;
    let echo = cfg.echo()?;
    let grid = cfg.grid()?;
    let slots = cfg.observable_slots();
    let hist_observables: Vec<Observable> = match cfg.histogram_bins {
        Some(_) => cfg
            .observables
            .iter()
            .copied()
            .filter(|o| o.has_histogram())
            .collect(),
        None => Vec::new(),
    };
    let hist_path = sidecar_path(output);

    let mut done: BTreeMap<PointKey, Vec<SweepRecord>> = BTreeMap::new();
    let mut hist_done: BTreeMap<PointKey, Vec<HistogramRecord>> = BTreeMap::new();
    if output.exists() {
        let existing = read_records(output)?;
        if existing.config_echo != echo {
            return Err(CliError::ConfigMismatch {
                path: output.to_path_buf(),
            });
        }
        for r in existing.records {
            done.entry(r.point_key()).or_default().push(r);
        }
        done.retain(|_, v| v.len() == slots.len());
        if !hist_observables.is_empty() && hist_path.exists() {
            for h in read_histograms(&hist_path)?.histograms {
                hist_done.entry(h.point_key()).or_default().push(h);
            }
        }
        done.retain(|k, _| {
            hist_observables.is_empty()
                || hist_done.get(k).map(Vec::len) == Some(hist_observables.len())
        });
    }
    let key_of = |p: &GridPoint| PointKey {
        n: p.n,
        axis_value: fmt_float(p.axis_value),
    };

    let pool = build_pool(threads)?;
    let seed = SeedSpec::new(cfg.master_seed);
    let model = cfg.model.name().to_string();
    let mut summary = SweepSummary {
        output: output.to_path_buf(),
        computed_points: 0,
        skipped_points: 0,
    };

    for (size_index, &n) in cfg.sizes.iter().enumerate() {
        let points: Vec<&GridPoint> = grid
            .iter()
            .filter(|p| p.size_index == size_index && !done.contains_key(&key_of(p)))
            .collect();
        summary.skipped_points +=
            grid.iter().filter(|p| p.size_index == size_index).count() - points.len();
        if points.is_empty() {
            continue;
        }
        let part = Bipartition::split(n, cfg.n_a)?;
        let references = slots
            .iter()
            .map(|&(o, k)| k.map(|k| reference_moment(o, part.d_a(), k)).transpose())
            .collect::<Result<Vec<_>>>()?;
        let task = SizeTask {
            cfg,
            part,
            initial: initial_state(cfg, n)?,
            points,
            slots: slots.clone(),
            references,
            hist_observables: hist_observables.clone(),
            brickwork: cfg.brickwork(n),
            seed,
            size_index: size_index as u64,
        };
        let samples = cfg.samples_for(n);
        let outputs: Vec<SampleOutput> = pool.install(|| {
            (0..samples)
                .into_par_iter()
                .map(|s| task.run_sample(s))
                .collect::<Result<_>>()
        })?;

        for (pi, point) in task.points.iter().enumerate() {
            let mut recs = Vec::with_capacity(slots.len());
            for (si, &(o, k)) in slots.iter().enumerate() {
                let xs: Vec<f64> = outputs.iter().map(|s| s.values[pi][si]).collect();
                let (mean, se) = mean_se(&xs)?;
                recs.push(SweepRecord {
                    model: model.clone(),
                    n,
                    n_a: cfg.n_a,
                    axis_value: point.axis_value,
                    k,
                    observable: o.name().to_string(),
                    mean,
                    se,
                    n_samples: samples,
                });
            }
            done.insert(key_of(point), recs);
            if let Some(b) = cfg.histogram_bins {
                let mut hs = Vec::new();
                for (hi, &o) in hist_observables.iter().enumerate() {
                    let mut weights = vec![0.0; b];
                    for s in &outputs {
                        for (w, x) in weights.iter_mut().zip(&s.hists[pi][hi]) {
                            *w += x / samples as f64;
                        }
                    }
                    let (lo, hi_edge) = if o == Observable::Coherence {
                        Functional::Coherence.range(part.d_a())
                    } else {
                        Functional::Ipr.range(part.d_a())
                    };
                    let width = (hi_edge - lo) / b as f64;
                    hs.push(HistogramRecord {
                        model: model.clone(),
                        n,
                        n_a: cfg.n_a,
                        axis_value: point.axis_value,
                        observable: o.name().to_string(),
                        edges: (0..=b).map(|i| lo + width * i as f64).collect(),
                        weights,
                    });
                }
                hist_done.insert(key_of(point), hs);
            }
            summary.computed_points += 1;
        }
        write_outputs(cfg, &grid, &echo, output, &done, &hist_done, &hist_path)?;
    }
    write_outputs(cfg, &grid, &echo, output, &done, &hist_done, &hist_path)?;
    Ok(summary)
}

fn write_outputs(
    cfg: &ExperimentConfig,
    grid: &[GridPoint],
    echo: &str,
    output: &Path,
    done: &BTreeMap<PointKey, Vec<SweepRecord>>,
    hist_done: &BTreeMap<PointKey, Vec<HistogramRecord>>,
    hist_path: &Path,
) -> Result<()> {
    let keys: Vec<PointKey> = grid
        .iter()
        .map(|p| PointKey {
            n: p.n,
            axis_value: fmt_float(p.axis_value),
        })
        .collect();
    let records: Vec<SweepRecord> = keys
        .iter()
        .filter_map(|k| done.get(k))
        .flatten()
        .cloned()
        .collect();
    write_atomic(output, &render_records(echo, &records)?)?;
    if cfg.histogram_bins.is_some() {
        let file = HistogramFile {
            config: serde_json::from_str(echo)?,
            histograms: keys
                .iter()
                .filter_map(|k| hist_done.get(k))
                .flatten()
                .cloned()
                .collect(),
        };
        write_atomic(hist_path, &render_histograms(&file)?)?;
    }
    Ok(())
}
