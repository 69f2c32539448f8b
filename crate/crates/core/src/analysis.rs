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

//! Noise-sweep harness: geometric intensity schedule, the relative-deviation
//! metric over the solution bases, gate-error threshold recovery, and circuit
//! metrics, with CSV/JSON report emission.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::gates::{Circuit, GateKind};
use crate::noise::{self, ChannelName};
use crate::poisson::{self, PoissonError, PoissonInstance, SolverLayout};
use crate::qasm;
use crate::sim::{self, NoiseModel, SimError};
use crate::state::{DensityMatrix, StateVector};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("intensity index range is empty")]
    EmptyRange,
    #[error("distribution lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("theoretical probability at basis {0} is not positive")]
    ZeroTheory(usize),
    #[error("curve never crosses the target deviation")]
    NoCrossing,
    #[error("curve needs at least two points")]
    TooFewPoints,
    #[error(transparent)]
    Poisson(#[from] PoissonError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Noise(#[from] crate::noise::NoiseError),
}

/// Noise intensities `p_i = 1e-4 * 700^(0.1 i)` for `i` in the inclusive range.
pub fn sweep_schedule(i_min: u32, i_max: u32) -> Vec<f64> {
    (i_min..=i_max)
        .map(|i| 1e-4 * 700f64.powf(0.1 * i as f64))
        .collect()
}

/// Elementwise relative deviation `|p_noise - p_theory| / p_theory` and its
/// mean over the targeted bases.
pub fn deviation(p_noise: &[f64], p_theory: &[f64]) -> Result<(Vec<f64>, f64), AnalysisError> {
    if p_noise.len() != p_theory.len() {
        return Err(AnalysisError::LengthMismatch(p_noise.len(), p_theory.len()));
    }
    let mut per_basis = Vec::with_capacity(p_noise.len());
    for (idx, (&noise, &theory)) in p_noise.iter().zip(p_theory).enumerate() {
        if theory <= 0.0 {
            return Err(AnalysisError::ZeroTheory(idx));
        }
        per_basis.push((noise - theory).abs() / theory);
    }
    let mean = per_basis.iter().sum::<f64>() / per_basis.len() as f64;
    Ok((per_basis, mean))
}

/// Log-log interpolation of the intensity where a deviation curve crosses
/// `target`. `curve` is `(p, dbar)` rows in ascending `p`; the first upward
/// crossing is used. Exact on power-law curves.
pub fn find_threshold(curve: &[(f64, f64)], target: f64) -> Result<f64, AnalysisError> {
    if curve.len() < 2 {
        return Err(AnalysisError::TooFewPoints);
    }
    for window in curve.windows(2) {
        let (p_a, d_a) = window[0];
        let (p_b, d_b) = window[1];
        if d_a < target && d_b >= target {
            if d_a <= 0.0 {
                return Ok(p_b);
            }
            let t = (target.ln() - d_a.ln()) / (d_b.ln() - d_a.ln());
            return Ok((p_a.ln() + t * (p_b.ln() - p_a.ln())).exp());
        }
    }
    // A curve already above target at its first point "crosses" below range.
    if curve[0].1 >= target {
        return Ok(curve[0].0);
    }
    Err(AnalysisError::NoCrossing)
}

/// Gate counts and depth under two accountings: raw one/two-qubit ops with
/// Toffolis tallied separately, and a decomposed count where each Toffoli
/// expands to the standard 15-gate template (6 CX, 2 H, 7 T-phase gates).
/// Depth is the longest qubit-dependency chain; barriers are transparent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CircuitMetrics {
    pub one_two_qubit_gate_count: usize,
    pub ccx_count: usize,
    pub decomposed_basic_gate_count: usize,
    pub measure_count: usize,
    pub depth: usize,
}

impl CircuitMetrics {
    /// Total gate statements with each Toffoli counted once, the accounting
    /// the bundled listings advertise in their headers.
    pub fn basic_gate_count(&self) -> usize {
        self.one_two_qubit_gate_count + self.ccx_count
    }
}

pub fn circuit_metrics(circuit: &Circuit) -> CircuitMetrics {
    let mut one_two = 0usize;
    let mut ccx = 0usize;
    let mut measures = 0usize;
    let mut level = vec![0usize; circuit.num_qubits];
    let mut depth = 0usize;
    for op in circuit.ops() {
        match op.kind {
            GateKind::Barrier => continue,
            GateKind::Measure => measures += 1,
            GateKind::Ccx => ccx += 1,
            _ => one_two += 1,
        }
        let at = 1 + op.qubits.iter().map(|&q| level[q]).max().unwrap_or(0);
        for &q in &op.qubits {
            level[q] = at;
        }
        depth = depth.max(at);
    }
    CircuitMetrics {
        one_two_qubit_gate_count: one_two,
        ccx_count: ccx,
        decomposed_basic_gate_count: one_two + 15 * ccx,
        measure_count: measures,
        depth,
    }
}

/// Comparison of the sine-transform circuit against its advertised cost bounds
/// (`3n^2 + 2n - 1` one/two-qubit gates, depth `2n`). Violations are reported,
/// never silently accepted.
#[derive(Debug, Clone, Serialize)]
pub struct SineTransformBoundCheck {
    pub n: usize,
    pub metrics: CircuitMetrics,
    pub gate_bound: usize,
    pub depth_bound: usize,
    pub count_within_bound: bool,
    pub depth_within_bound: bool,
}

impl SineTransformBoundCheck {
    pub fn discrepancy_report(&self) -> Option<String> {
        if self.count_within_bound && self.depth_within_bound {
            return None;
        }
        let mut lines = vec![format!("sine transform n={} exceeds advertised bounds:", self.n)];
        if !self.count_within_bound {
            lines.push(format!(
                "  one/two-qubit gates: {} > {} (plus {} Toffolis)",
                self.metrics.one_two_qubit_gate_count, self.gate_bound, self.metrics.ccx_count
            ));
        }
        if !self.depth_within_bound {
            lines.push(format!(
                "  depth: {} > {}",
                self.metrics.depth, self.depth_bound
            ));
        }
        Some(lines.join("\n"))
    }
}

pub fn sine_transform_bound_check(n: usize) -> Result<SineTransformBoundCheck, AnalysisError> {
    let circuit = poisson::build_sine_transform(n)?;
    let metrics = circuit_metrics(&circuit);
    let gate_bound = 3 * n * n + 2 * n - 1;
    let depth_bound = 2 * n;
    Ok(SineTransformBoundCheck {
        n,
        count_within_bound: metrics.one_two_qubit_gate_count <= gate_bound,
        depth_within_bound: metrics.depth <= depth_bound,
        metrics,
        gate_bound,
        depth_bound,
    })
}

/// How noisy runs are evaluated: exact density-matrix probabilities, or
/// finite-shot sampling averaged over trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepMode {
    Exact,
    Sampled,
}

impl SweepMode {
    pub fn label(self) -> &'static str {
        match self {
            SweepMode::Exact => "exact",
            SweepMode::Sampled => "sampled",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub n: usize,
    pub noise_types: Vec<ChannelName>,
    pub i_min: u32,
    pub i_max: u32,
    pub mode: SweepMode,
    pub trials: u32,
    pub shots: u64,
    pub seed: u64,
}

impl SweepConfig {
    /// Exact-mode sweep of the four channels over the full intensity range.
    pub fn exact(n: usize) -> Self {
        Self {
            n,
            noise_types: vec![
                ChannelName::AmplitudeDamping,
                ChannelName::PhaseDamping,
                ChannelName::BitFlip,
                ChannelName::Depolarizing,
            ],
            i_min: 1,
            i_max: 9,
            mode: SweepMode::Exact,
            trials: 1,
            shots: 16384,
            seed: 2023,
        }
    }
}

/// Deviations for one (channel, intensity) cell.
#[derive(Debug, Clone)]
pub struct DeviationRow {
    pub noise: ChannelName,
    pub i: u32,
    pub p: f64,
    /// `(basis bitstring of register B, D)` per targeted basis.
    pub per_basis: Vec<(String, f64)>,
    pub dbar: f64,
}

/// Full sweep output plus the metadata needed to reproduce it.
#[derive(Debug, Clone)]
pub struct DeviationReport {
    pub n: usize,
    pub mode: SweepMode,
    pub seed: u64,
    pub trials: u32,
    pub shots: u64,
    pub circuit_hash: String,
    pub metrics: CircuitMetrics,
    /// Ideal joint probabilities `(basis, P(B = basis, flag = 1))`.
    pub theory: Vec<(String, f64)>,
    pub rows: Vec<DeviationRow>,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

fn cell_seed(seed: u64, noise: ChannelName, i: u32, trial: u32) -> u64 {
    let mut h = seed ^ fnv1a(noise.code().as_bytes());
    h ^= (i as u64) << 32 | trial as u64;
    // splitmix64 finalizer
    h = h.wrapping_add(0x9e3779b97f4a7c15);
    h = (h ^ (h >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    h = (h ^ (h >> 27)).wrapping_mul(0x94d049bb133111eb);
    h ^ (h >> 31)
}

/// A circuit prepared for sweeping: which qubits hold the solution value
/// (ascending significance) and which qubit readings signal success.
#[derive(Debug, Clone)]
pub struct SweepCircuit {
    pub circuit: Circuit,
    pub solution_qubits: Vec<usize>,
    pub flag_conditions: Vec<(usize, bool)>,
}

impl SweepCircuit {
    /// The programmatically built solver for an instance: solution on B,
    /// success signalled by the flag ancilla.
    pub fn from_instance(instance: &PoissonInstance) -> Result<Self, PoissonError> {
        let layout = SolverLayout::new(instance.n);
        Ok(Self {
            circuit: poisson::build_solver(instance)?,
            solution_qubits: layout.b.clone(),
            flag_conditions: vec![(layout.anc, true)],
        })
    }

    /// A bundled demonstration listing (`n = 2` or `3`) with its own register
    /// mapping. The 5-qubit listing omits the flag ancilla and instead reads
    /// success off registers E and C directly.
    pub fn from_listing(n: usize) -> Option<Self> {
        match n {
            2 => Some(Self {
                circuit: qasm::parse(crate::SOLVER_N2_QASM).expect("bundled listing parses"),
                solution_qubits: vec![1, 3],
                flag_conditions: vec![(0, true), (2, true)],
            }),
            3 => Some(Self {
                circuit: qasm::parse(crate::SOLVER_N3_QASM).expect("bundled listing parses"),
                solution_qubits: vec![3, 5, 7],
                flag_conditions: vec![(0, true)],
            }),
            _ => None,
        }
    }

    pub fn n(&self) -> usize {
        self.solution_qubits.len()
    }
}

/// Joint outcome probabilities `P(solution = j, flags at success)` for
/// `j = 1..2^n - 1`, marginalizing everything else.
fn targeted_probabilities(probs: &[f64], target: &SweepCircuit) -> Vec<f64> {
    let n = target.n();
    let mut out = vec![0.0f64; (1 << n) - 1];
    'outer: for (index, &p) in probs.iter().enumerate() {
        for &(q, want) in &target.flag_conditions {
            if (index >> q & 1 == 1) != want {
                continue 'outer;
            }
        }
        let mut j = 0usize;
        for (pos, &q) in target.solution_qubits.iter().enumerate() {
            if index >> q & 1 == 1 {
                j |= 1 << pos;
            }
        }
        if j >= 1 {
            out[j - 1] += p;
        }
    }
    out
}

/// Run the exact-density-matrix (or sampled) noise sweep over the solver
/// circuit for `config.n`, computing the deviation of each targeted basis
/// against the ideal run. Cells run in parallel and merge in sorted order.
pub fn run_sweep(config: &SweepConfig) -> Result<DeviationReport, AnalysisError> {
    let instance = PoissonInstance::builtin(config.n)
        .ok_or(PoissonError::SizeTooSmall(config.n))?;
    run_sweep_on(config, &instance)
}

/// As [`run_sweep`] but for an explicit instance.
pub fn run_sweep_on(
    config: &SweepConfig,
    instance: &PoissonInstance,
) -> Result<DeviationReport, AnalysisError> {
    run_sweep_circuit(config, &SweepCircuit::from_instance(instance)?)
}

/// As [`run_sweep`] but over an explicit circuit with its success signature.
pub fn run_sweep_circuit(
    config: &SweepConfig,
    target: &SweepCircuit,
) -> Result<DeviationReport, AnalysisError> {
    if config.i_min > config.i_max || config.i_min == 0 {
        return Err(AnalysisError::EmptyRange);
    }
    assert_eq!(config.n, target.n(), "config size must match the circuit");
    let circuit = &target.circuit;
    let circuit_hash = format!("{:016x}", fnv1a(qasm::serialize(circuit).as_bytes()));
    let metrics = circuit_metrics(circuit);

    let ideal = sim::run_ideal(circuit, StateVector::zero(circuit.num_qubits))?;
    let theory = targeted_probabilities(&ideal.probabilities(), target);

    let schedule = sweep_schedule(config.i_min, config.i_max);
    let cells: Vec<(ChannelName, u32, f64)> = config
        .noise_types
        .iter()
        .flat_map(|&name| {
            schedule
                .iter()
                .enumerate()
                .map(move |(k, &p)| (name, config.i_min + k as u32, p))
        })
        .collect();

    let rows: Result<Vec<DeviationRow>, AnalysisError> = cells
        .par_iter()
        .map(|&(name, i, p)| {
            let channel = noise::by_name(name, p)?;
            let model = NoiseModel::uniform(channel);
            let rho = sim::run_noisy(circuit, DensityMatrix::zero(circuit.num_qubits), &model)?;
            let p_noise = match config.mode {
                SweepMode::Exact => {
                    targeted_probabilities(&rho.diagonal_probabilities(), target)
                }
                SweepMode::Sampled => {
                    // Sample whole-register outcomes, then read the targeted
                    // cells off the empirical distribution per trial.
                    let mut mean = vec![0.0f64; (1 << config.n) - 1];
                    for trial in 0..config.trials {
                        let hist = sim::sample_density_matrix(
                            &rho,
                            config.shots,
                            cell_seed(config.seed, name, i, trial),
                        )?;
                        let mut empirical = vec![0.0f64; 1 << circuit.num_qubits];
                        for (&index, &count) in hist.counts() {
                            empirical[index] = count as f64 / config.shots as f64;
                        }
                        for (slot, value) in mean
                            .iter_mut()
                            .zip(targeted_probabilities(&empirical, target))
                        {
                            *slot += value;
                        }
                    }
                    mean.iter().map(|f| f / config.trials as f64).collect()
                }
            };
            let (per_basis, dbar) = deviation(&p_noise, &theory)?;
            let labeled = per_basis
                .iter()
                .enumerate()
                .map(|(k, &d)| (sim::bitstring(k + 1, config.n), d))
                .collect();
            Ok(DeviationRow {
                noise: name,
                i,
                p,
                per_basis: labeled,
                dbar,
            })
        })
        .collect();
    let mut rows = rows?;
    rows.sort_by(|a, b| (a.noise, a.i).cmp(&(b.noise, b.i)));

    Ok(DeviationReport {
        n: config.n,
        mode: config.mode,
        seed: config.seed,
        trials: config.trials,
        shots: config.shots,
        circuit_hash,
        metrics,
        theory: theory
            .iter()
            .enumerate()
            .map(|(k, &p)| (sim::bitstring(k + 1, config.n), p))
            .collect(),
        rows,
    })
}

impl DeviationReport {
    /// The `(p, dbar)` curve of one channel, ascending in `p`.
    pub fn curve(&self, noise: ChannelName) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.noise == noise)
            .map(|r| (r.p, r.dbar))
            .collect()
    }

    /// Threshold intensity of one channel at the target deviation.
    pub fn threshold(&self, noise: ChannelName, target: f64) -> Result<f64, AnalysisError> {
        find_threshold(&self.curve(noise), target)
    }

    /// Smallest threshold over all swept channels: the binding gate-error
    /// requirement.
    pub fn worst_threshold(&self, target: f64) -> Option<(ChannelName, f64)> {
        self.rows
            .iter()
            .map(|r| r.noise)
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .filter_map(|name| self.threshold(name, target).ok().map(|p| (name, p)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// CSV rows `noise,i,p,basis,D,Dbar`, one line per (cell, basis), in
    /// deterministic order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("noise,i,p,basis,D,Dbar\n");
        for row in &self.rows {
            for (basis, d) in &row.per_basis {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    row.noise.code(),
                    row.i,
                    row.p,
                    basis,
                    d,
                    row.dbar
                ));
            }
        }
        out
    }

    /// JSON summary with thresholds at the given target and run metadata.
    pub fn summary_json(&self, target: f64) -> serde_json::Value {
        let thresholds: serde_json::Map<String, serde_json::Value> = self
            .rows
            .iter()
            .map(|r| r.noise)
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .map(|name| {
                let value = match self.threshold(name, target) {
                    Ok(p) => serde_json::json!(p),
                    Err(_) => serde_json::Value::Null,
                };
                (name.code().to_string(), value)
            })
            .collect();
        let worst = self.worst_threshold(target);
        serde_json::json!({
            "n": self.n,
            "mode": self.mode.label(),
            "seed": self.seed,
            "trials": self.trials,
            "shots": self.shots,
            "circuit_hash": self.circuit_hash,
            "metrics": self.metrics,
            "theory": self.theory.iter().map(|(b, p)| serde_json::json!({"basis": b, "p": p})).collect::<Vec<_>>(),
            "deviation_target": target,
            "thresholds": thresholds,
            "worst_threshold": worst.map(|(name, p)| serde_json::json!({"noise": name.code(), "p": p})),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_matches_reference_values() {
        let ps = sweep_schedule(1, 9);
        assert_eq!(ps.len(), 9);
        assert!((ps[0] - 1.9253e-4).abs() < 1e-7);
        assert!((ps[4] - 2.6458e-3).abs() < 1e-6);
        assert!((ps[8] - 3.6364e-2).abs() < 1e-5);
    }

    #[test]
    fn deviation_arithmetic() {
        let (d, dbar) = deviation(&[0.2, 0.3], &[0.2, 0.3]).unwrap();
        assert_eq!(d, vec![0.0, 0.0]);
        assert_eq!(dbar, 0.0);

        let (d, dbar) = deviation(&[0.1, 0.3], &[0.2, 0.3]).unwrap();
        assert!((d[0] - 0.5).abs() < 1e-15);
        assert_eq!(d[1], 0.0);
        assert!((dbar - 0.25).abs() < 1e-15);

        assert!(matches!(
            deviation(&[0.1], &[0.0]),
            Err(AnalysisError::ZeroTheory(0))
        ));
        assert!(matches!(
            deviation(&[0.1], &[0.1, 0.2]),
            Err(AnalysisError::LengthMismatch(1, 2))
        ));
    }

    #[test]
    fn deviation_is_scale_aware() {
        let (d1, _) = deviation(&[0.12, 0.5], &[0.1, 0.4]).unwrap();
        let (d2, _) = deviation(&[0.24, 1.0], &[0.2, 0.8]).unwrap();
        for (a, b) in d1.iter().zip(&d2) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn threshold_recovers_linear_curve_exactly() {
        let curve: Vec<(f64, f64)> = sweep_schedule(1, 9)
            .into_iter()
            .map(|p| (p, 100.0 * p))
            .collect();
        let p = find_threshold(&curve, 0.1).unwrap();
        assert!((p - 1e-3).abs() < 1e-12, "{p}");
    }

    #[test]
    fn threshold_requires_a_crossing() {
        let curve = vec![(1e-4, 0.01), (1e-3, 0.02)];
        assert!(matches!(
            find_threshold(&curve, 0.5),
            Err(AnalysisError::NoCrossing)
        ));
        assert!(matches!(
            find_threshold(&[(1e-4, 0.01)], 0.5),
            Err(AnalysisError::TooFewPoints)
        ));
    }

    #[test]
    fn metrics_on_small_circuits() {
        let empty = Circuit::new(1, 0);
        let m = circuit_metrics(&empty);
        assert_eq!(m.one_two_qubit_gate_count, 0);
        assert_eq!(m.depth, 0);

        let mut parallel = Circuit::new(2, 0);
        parallel.h(0).unwrap().h(1).unwrap();
        let m = circuit_metrics(&parallel);
        assert_eq!(m.one_two_qubit_gate_count, 2);
        assert_eq!(m.depth, 1);

        let mut chained = Circuit::new(2, 0);
        chained.h(0).unwrap().cx(0, 1).unwrap().h(1).unwrap();
        assert_eq!(circuit_metrics(&chained).depth, 3);

        let mut with_ccx = Circuit::new(3, 0);
        with_ccx.ccx(0, 1, 2).unwrap().x(0).unwrap();
        let m = circuit_metrics(&with_ccx);
        assert_eq!(m.ccx_count, 1);
        assert_eq!(m.one_two_qubit_gate_count, 1);
        assert_eq!(m.decomposed_basic_gate_count, 16);
    }

    #[test]
    fn barrier_is_depth_transparent() {
        let mut c = Circuit::new(2, 0);
        c.h(0).unwrap();
        c.append(crate::gates::GateOp::barrier(vec![0, 1])).unwrap();
        c.h(1).unwrap();
        assert_eq!(circuit_metrics(&c).depth, 1);
    }

    #[test]
    fn bound_check_produces_report_on_violation() {
        for n in 2..=5 {
            let check = sine_transform_bound_check(n).unwrap();
            if !(check.count_within_bound && check.depth_within_bound) {
                let report = check.discrepancy_report().unwrap();
                assert!(report.contains(&format!("n={n}")));
            } else {
                assert!(check.discrepancy_report().is_none());
            }
        }
    }

    #[test]
    fn zero_noise_sweep_has_zero_deviation() {
        // p = 0 is below the schedule; emulate by comparing theory to itself.
        let config = SweepConfig {
            i_min: 1,
            i_max: 1,
            ..SweepConfig::exact(2)
        };
        let report = run_sweep(&config).unwrap();
        for row in &report.rows {
            assert!(row.dbar < 0.05, "{:?} i={} dbar={}", row.noise, row.i, row.dbar);
            assert!(row.per_basis.iter().all(|(_, d)| *d >= 0.0));
        }
        // Identity channel degeneracy: explicitly run the noisy path at p=0.
        let instance = PoissonInstance::builtin(2).unwrap();
        let target = SweepCircuit::from_instance(&instance).unwrap();
        let ideal = sim::run_ideal(&target.circuit, StateVector::zero(6)).unwrap();
        let theory = targeted_probabilities(&ideal.probabilities(), &target);
        for name in [
            ChannelName::AmplitudeDamping,
            ChannelName::PhaseDamping,
            ChannelName::BitFlip,
            ChannelName::Depolarizing,
        ] {
            let model = NoiseModel::uniform(noise::by_name(name, 0.0).unwrap());
            let rho = sim::run_noisy(&target.circuit, DensityMatrix::zero(6), &model).unwrap();
            let got = targeted_probabilities(&rho.diagonal_probabilities(), &target);
            let (_, dbar) = deviation(&got, &theory).unwrap();
            assert!(dbar < 1e-9, "{name:?}: {dbar}");
        }
    }

    #[test]
    fn csv_has_expected_shape() {
        let config = SweepConfig {
            i_min: 1,
            i_max: 2,
            noise_types: vec![ChannelName::PhaseDamping],
            ..SweepConfig::exact(2)
        };
        let report = run_sweep(&config).unwrap();
        let csv = report.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "noise,i,p,basis,D,Dbar");
        // 2 intensities x 3 bases.
        assert_eq!(lines.len(), 1 + 6);
        assert!(lines[1].starts_with("pd,1,"));

        let summary = report.summary_json(0.1);
        assert_eq!(summary["n"], 2);
        assert_eq!(summary["mode"], "exact");
    }
}
