// Copyright 2026 The qpoisson Developers
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except
// in compliance with the License. You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software distributed under the License
// is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
// or implied. See the License for the specific language governing permissions and limitations under
// the License.

//! The two execution engines plus shot sampling and post-selection.
//!
//! [`run_ideal`] evolves an exact statevector; measurement ops are stripped
//! (amplitudes are read directly). [`run_noisy`] evolves an exact density
//! matrix under a [`NoiseModel`]: the channel mapped to a gate's kind is
//! applied to each of the gate's qubits *before* the gate itself, and the
//! readout channel is applied at each `Measure`.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::gates::{Circuit, GateError, GateKind, unitary_of};
use crate::noise::{KrausChannel, NoiseError};
use crate::state::{DensityMatrix, StateError, StateVector};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("circuit acts on {circuit} qubit(s) but the state has {state}")]
    DimensionMismatch { circuit: usize, state: usize },
    #[error("shots must be at least 1")]
    ZeroShots,
    #[error("post-selection conditions repeat qubit {0}")]
    DuplicateCondition(usize),
    #[error("qubit {qubit} out of range for {num_qubits}-qubit state")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error(transparent)]
    Gate(#[from] GateError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

/// Per-gate-kind noise assignment: each mapped kind receives one copy of its
/// single-qubit channel on every qubit the gate acts on (the tensored channel),
/// and `readout` is applied at each `Measure`.
#[derive(Debug, Clone, Default)]
pub struct NoiseModel {
    per_gate: BTreeMap<GateKind, KrausChannel>,
    readout: Option<KrausChannel>,
}

impl NoiseModel {
    /// A model with no noise anywhere; `run_noisy` then matches `run_ideal`.
    pub fn ideal() -> Self {
        Self::default()
    }

    /// Attach `channel` to every unitary gate kind and to readout.
    pub fn uniform(channel: KrausChannel) -> Self {
        let mut model = Self::default();
        for kind in [
            GateKind::H,
            GateKind::X,
            GateKind::Rx,
            GateKind::Ry,
            GateKind::Rz,
            GateKind::P,
            GateKind::Swap,
            GateKind::Cx,
            GateKind::Ch,
            GateKind::Cry,
            GateKind::Crz,
            GateKind::Cp,
            GateKind::Ccx,
        ] {
            model.per_gate.insert(kind, channel.clone());
        }
        model.readout = Some(channel);
        model
    }

    pub fn set_gate_channel(&mut self, kind: GateKind, channel: KrausChannel) -> &mut Self {
        self.per_gate.insert(kind, channel);
        self
    }

    pub fn set_readout(&mut self, channel: Option<KrausChannel>) -> &mut Self {
        self.readout = channel;
        self
    }

    pub fn gate_channel(&self, kind: GateKind) -> Option<&KrausChannel> {
        self.per_gate.get(&kind)
    }

    pub fn readout(&self) -> Option<&KrausChannel> {
        self.readout.as_ref()
    }

    pub fn is_ideal(&self) -> bool {
        self.per_gate.is_empty() && self.readout.is_none()
    }
}

/// Run the circuit exactly on a statevector. `Barrier` is ignored and
/// `Measure` ops are stripped with a warning, since exact amplitudes are read
/// directly from the final state.
pub fn run_ideal(circuit: &Circuit, initial: StateVector) -> Result<StateVector, SimError> {
    if circuit.num_qubits != initial.num_qubits() {
        return Err(SimError::DimensionMismatch {
            circuit: circuit.num_qubits,
            state: initial.num_qubits(),
        });
    }
    let mut state = initial;
    let mut stripped = 0usize;
    for op in circuit.ops() {
        match op.kind {
            GateKind::Barrier => {}
            GateKind::Measure => stripped += 1,
            kind => {
                let u = unitary_of(kind, op.angle)?;
                state.apply_unitary(&u, &op.qubits)?;
            }
        }
    }
    if stripped > 0 {
        log::warn!("ideal run stripped {stripped} measure op(s); amplitudes are read exactly");
    }
    Ok(state)
}

/// Run the circuit as an exact density-matrix evolution under `noise`.
///
/// For each unitary gate the mapped channel is applied qubit-by-qubit before
/// the gate; `Measure` applies the readout channel to the measured qubit.
pub fn run_noisy(
    circuit: &Circuit,
    initial: DensityMatrix,
    noise: &NoiseModel,
) -> Result<DensityMatrix, SimError> {
    if circuit.num_qubits != initial.num_qubits() {
        return Err(SimError::DimensionMismatch {
            circuit: circuit.num_qubits,
            state: initial.num_qubits(),
        });
    }
    let mut rho = initial;
    for op in circuit.ops() {
        match op.kind {
            GateKind::Barrier => {}
            GateKind::Measure => {
                if let Some(channel) = noise.readout() {
                    rho.apply_kraus_operators(channel.operators(), &op.qubits)?;
                }
            }
            kind => {
                if let Some(channel) = noise.gate_channel(kind) {
                    for &q in &op.qubits {
                        rho.apply_kraus_operators(channel.operators(), &[q])?;
                    }
                }
                let u = unitary_of(kind, op.angle)?;
                rho.apply_unitary(&u, &op.qubits)?;
            }
        }
    }
    Ok(rho)
}

/// Empirical histogram of basis-state outcomes over repeated shots.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub num_qubits: usize,
    pub shots: u64,
    counts: BTreeMap<usize, u64>,
}

/// One row of a histogram rendered for output.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome {
    pub bitstring: String,
    pub probability: f64,
}

impl Histogram {
    pub fn counts(&self) -> &BTreeMap<usize, u64> {
        &self.counts
    }

    pub fn frequency(&self, index: usize) -> f64 {
        *self.counts.get(&index).unwrap_or(&0) as f64 / self.shots as f64
    }

    /// Render as bitstring outcomes, most significant qubit first.
    pub fn outcomes(&self) -> Vec<MeasurementOutcome> {
        self.counts
            .iter()
            .map(|(&index, &count)| MeasurementOutcome {
                bitstring: bitstring(index, self.num_qubits),
                probability: count as f64 / self.shots as f64,
            })
            .collect()
    }
}

/// Render a basis index as a bitstring, qubit `n-1` first.
pub fn bitstring(index: usize, num_qubits: usize) -> String {
    (0..num_qubits)
        .rev()
        .map(|q| if index >> q & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Draw multinomial samples from an explicit Born distribution.
/// Deterministic for a fixed seed.
pub fn sample_distribution(
    probabilities: &[f64],
    num_qubits: usize,
    shots: u64,
    seed: u64,
) -> Result<Histogram, SimError> {
    if shots == 0 {
        return Err(SimError::ZeroShots);
    }
    let mut cdf = Vec::with_capacity(probabilities.len());
    let mut acc = 0.0f64;
    for &p in probabilities {
        acc += p.max(0.0);
        cdf.push(acc);
    }
    let total = acc;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    for _ in 0..shots {
        let u: f64 = rng.gen::<f64>() * total;
        let idx = cdf.partition_point(|&c| c < u).min(probabilities.len() - 1);
        *counts.entry(idx).or_insert(0) += 1;
    }
    Ok(Histogram {
        num_qubits,
        shots,
        counts,
    })
}

/// Sample measurement outcomes of a pure state.
pub fn sample_statevector(
    state: &StateVector,
    shots: u64,
    seed: u64,
) -> Result<Histogram, SimError> {
    sample_distribution(&state.probabilities(), state.num_qubits(), shots, seed)
}

/// Sample measurement outcomes of a density matrix.
pub fn sample_density_matrix(
    rho: &DensityMatrix,
    shots: u64,
    seed: u64,
) -> Result<Histogram, SimError> {
    sample_distribution(&rho.diagonal_probabilities(), rho.num_qubits(), shots, seed)
}

/// Result of conditioning on measurement outcomes of selected qubits.
///
/// `probabilities` maps each basis state of the *remaining* qubits (ascending
/// qubit order, compacted) to its joint probability with the condition, so the
/// values sum to `success_probability`, not 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PostSelection {
    pub remaining_qubits: Vec<usize>,
    pub probabilities: BTreeMap<usize, f64>,
    pub success_probability: f64,
}

fn post_select_probs(
    probs: &[f64],
    num_qubits: usize,
    conditions: &[(usize, bool)],
) -> Result<PostSelection, SimError> {
    let mut cond_mask = 0usize;
    let mut cond_value = 0usize;
    for &(q, bit) in conditions {
        if q >= num_qubits {
            return Err(SimError::QubitOutOfRange {
                qubit: q,
                num_qubits,
            });
        }
        if cond_mask >> q & 1 == 1 {
            return Err(SimError::DuplicateCondition(q));
        }
        cond_mask |= 1 << q;
        if bit {
            cond_value |= 1 << q;
        }
    }
    let remaining_qubits: Vec<usize> =
        (0..num_qubits).filter(|q| cond_mask >> q & 1 == 0).collect();
    let mut probabilities: BTreeMap<usize, f64> = BTreeMap::new();
    let mut success = 0.0f64;
    for (index, &p) in probs.iter().enumerate() {
        if index & cond_mask != cond_value {
            continue;
        }
        success += p;
        let mut compact = 0usize;
        for (pos, &q) in remaining_qubits.iter().enumerate() {
            if index >> q & 1 == 1 {
                compact |= 1 << pos;
            }
        }
        *probabilities.entry(compact).or_insert(0.0) += p;
    }
    Ok(PostSelection {
        remaining_qubits,
        probabilities,
        success_probability: success,
    })
}

/// Condition a pure state's outcome distribution on `(qubit, required bit)` pairs.
pub fn post_select(
    state: &StateVector,
    conditions: &[(usize, bool)],
) -> Result<PostSelection, SimError> {
    post_select_probs(&state.probabilities(), state.num_qubits(), conditions)
}

/// Density-matrix variant of [`post_select`].
pub fn post_select_dm(
    rho: &DensityMatrix,
    conditions: &[(usize, bool)],
) -> Result<PostSelection, SimError> {
    post_select_probs(&rho.diagonal_probabilities(), rho.num_qubits(), conditions)
}

/// Outcome distribution of measuring only `qubits` (ascending significance in
/// the returned index), tracing out everything else.
pub fn measured_probabilities(
    probs: &[f64],
    num_qubits: usize,
    qubits: &[usize],
) -> Result<Vec<f64>, SimError> {
    let mut seen = 0usize;
    for &q in qubits {
        if q >= num_qubits {
            return Err(SimError::QubitOutOfRange {
                qubit: q,
                num_qubits,
            });
        }
        if seen >> q & 1 == 1 {
            return Err(SimError::DuplicateCondition(q));
        }
        seen |= 1 << q;
    }
    let mut out = vec![0.0f64; 1 << qubits.len()];
    for (index, &p) in probs.iter().enumerate() {
        let mut compact = 0usize;
        for (pos, &q) in qubits.iter().enumerate() {
            if index >> q & 1 == 1 {
                compact |= 1 << pos;
            }
        }
        out[compact] += p;
    }
    Ok(out)
}
