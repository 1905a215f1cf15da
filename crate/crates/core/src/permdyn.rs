//! Seeded random permutations of the computational basis, applied globally or as a
//! brickwork of local gates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::qstate::{StateVector, MAX_QUBITS};
use crate::C64;

/// Random stream type used everywhere in the crate.
pub type Stream = ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a task path into a 64-bit seed: `h₀ = mix(master)`, `hᵢ₊₁ = mix(hᵢ ⊕ mix(idxᵢ))`.
pub fn derive_seed(master_seed: u64, task_path: &[u64]) -> u64 {
    task_path.iter().fold(splitmix64(master_seed), |h, &i| {
        splitmix64(h ^ splitmix64(i))
    })
}

/// Master seed from which per-task ChaCha8 streams are derived.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub master_seed: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    /// Independent stream for the task identified by `task_path`.
    pub fn stream(&self, task_path: &[u64]) -> Stream {
        Stream::seed_from_u64(derive_seed(self.master_seed, task_path))
    }
}

/// Bijection on `{0, …, d−1}`; `images[z] = π(z)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<u32>,
}

impl Permutation {
    pub fn identity(d: usize) -> Self {
        Self {
            images: (0..d as u32).collect(),
        }
    }

    /// Validates that `images` is a bijection.
    pub fn from_images(images: Vec<u32>) -> Result<Self> {
        let d = images.len();
        if d == 0 {
            return invalid("empty permutation");
        }
        let mut seen = vec![false; d];
        for &i in &images {
            let i = i as usize;
            if i >= d || seen[i] {
                return invalid("images do not form a bijection");
            }
            seen[i] = true;
        }
        Ok(Self { images })
    }

    pub fn size(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[u32] {
        &self.images
    }

    pub fn apply(&self, z: usize) -> usize {
        self.images[z] as usize
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0u32; self.size()];
        for (z, &p) in self.images.iter().enumerate() {
            inv[p as usize] = z as u32;
        }
        Self { images: inv }
    }

    /// `outer ∘ inner`: first `inner`, then `outer`.
    pub fn compose(outer: &Self, inner: &Self) -> Result<Self> {
        if outer.size() != inner.size() {
            return Err(Error::DimensionMismatch {
                expected: outer.size(),
                got: inner.size(),
            });
        }
        Ok(Self {
            images: inner
                .images
                .iter()
                .map(|&z| outer.images[z as usize])
                .collect(),
        })
    }
}

/// Uniform element of `S_d` by Fisher–Yates.
pub fn sample_permutation<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<Permutation> {
    if d == 0 {
        return invalid("cannot sample a permutation of an empty set");
    }
    if d > (1usize << MAX_QUBITS) {
        return Err(Error::TooLarge {
            what: "permutation size",
            value: d,
            max: 1 << MAX_QUBITS,
        });
    }
    let mut images: Vec<u32> = (0..d as u32).collect();
    shuffle(&mut images, rng);
    Ok(Permutation { images })
}

fn shuffle<R: Rng + ?Sized>(v: &mut [u32], rng: &mut R) {
    for i in (1..v.len()).rev() {
        let j = rng.random_range(0..=i as u32) as usize;
        v.swap(i, j);
    }
}

/// `U_π|Ψ⟩`: the amplitude at `z` moves to `π(z)`.
pub fn apply_global_permutation(state: &StateVector, perm: &Permutation) -> Result<StateVector> {
    if perm.size() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: state.dim(),
            got: perm.size(),
        });
    }
    let mut out = vec![C64::new(0.0, 0.0); state.dim()];
    for (a, &p) in state.amplitudes().iter().zip(&perm.images) {
        out[p as usize] = *a;
    }
    Ok(StateVector::from_raw(state.num_qubits(), out))
}

/// Layered circuit of local permutation gates on `gate_width` contiguous qubits.
///
/// Even layers start their windows at qubit 0, odd layers at `⌊r/2⌋`; windows that would
/// run past the end of the open chain are omitted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BrickworkConfig {
    pub gate_width: usize,
    pub depth: usize,
}

impl Default for BrickworkConfig {
    fn default() -> Self {
        Self {
            gate_width: 3,
            depth: 0,
        }
    }
}

impl BrickworkConfig {
    pub fn new(gate_width: usize, depth: usize) -> Self {
        Self { gate_width, depth }
    }

    /// Leading qubit (0-based) of every gate window in layer `layer`.
    pub fn windows(&self, num_qubits: usize, layer: usize) -> Vec<usize> {
        let r = self.gate_width;
        let offset = if layer.is_multiple_of(2) { 0 } else { r / 2 };
        (offset..)
            .step_by(r.max(1))
            .take_while(|s| s + r <= num_qubits)
            .collect()
    }

    fn validate(&self, num_qubits: usize) -> Result<()> {
        if self.gate_width < 1 {
            return invalid("gate width must be at least 1");
        }
        if self.gate_width > num_qubits {
            return invalid(format!(
                "gate width {} exceeds chain length {num_qubits}",
                self.gate_width
            ));
        }
        Ok(())
    }
}

/// Which intermediate states [`evolve_brickwork`] keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Snapshots {
    /// Input followed by the state after each layer (`depth + 1` entries).
    EveryLayer,
    FinalOnly,
}

/// One layer of gates as a global relabeling of basis indices.
fn layer_relabeling<R: Rng + ?Sized>(
    num_qubits: usize,
    cfg: &BrickworkConfig,
    layer: usize,
    rng: &mut R,
) -> Result<Vec<u32>> {
    let r = cfg.gate_width;
    let mask = (1usize << r) - 1;
    let mut map: Vec<u32> = (0..1u32 << num_qubits).collect();
    for start in cfg.windows(num_qubits, layer) {
        let gate = sample_permutation(1 << r, rng)?;
        let shift = num_qubits - start - r;
        for z in map.iter_mut() {
            let zu = *z as usize;
            let w = (zu >> shift) & mask;
            *z = ((zu & !(mask << shift)) | (gate.apply(w) << shift)) as u32;
        }
    }
    Ok(map)
}

/// Applies `cfg.depth` brickwork layers with gates drawn from `rng`.
pub fn evolve_brickwork<R: Rng + ?Sized>(
    state: &StateVector,
    cfg: &BrickworkConfig,
    rng: &mut R,
    keep: Snapshots,
) -> Result<Vec<StateVector>> {
    let n = state.num_qubits();
    cfg.validate(n)?;
    let mut snaps = Vec::new();
    if keep == Snapshots::EveryLayer {
        snaps.push(state.clone());
    }
    let mut current = state.clone();
    for layer in 0..cfg.depth {
        let perm = Permutation {
            images: layer_relabeling(n, cfg, layer, rng)?,
        };
        current = apply_global_permutation(&current, &perm)?;
        if keep == Snapshots::EveryLayer {
            snaps.push(current.clone());
        }
    }
    if keep == Snapshots::FinalOnly {
        snaps.push(current);
    }
    Ok(snaps)
}
