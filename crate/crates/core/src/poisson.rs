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

//! The 1D Poisson solver: classical oracle and quantum circuit builders.
//!
//! The discretized problem is `A v = b` with `A = N^2 tridiag(-1, 2, -1)` of
//! size `N-1`, `N = 2^n`. Its eigenvectors are `u_j(k) = sqrt(2/N) sin(j pi k / N)`
//! with eigenvalues `lambda_j = 4 N^2 sin^2(j pi / 2N)`, so the sine transform
//! `ST[i][j] = sqrt(2/N) sin(pi i j / N)` diagonalizes it.
//!
//! The solver circuit prepares `|b>` on register B, rotates into the eigenbasis
//! with a sine transform built from a ripple-carry increment conjugating a
//! Fourier transform, rotates registers E and C so the all-ones configuration
//! carries amplitude `8/lambda_j`, flags success on an ancilla, and undoes the
//! sine transform. Post-selecting the flag leaves B holding the normalized
//! solution state.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::gates::{Circuit, GateError, GateOp};
use crate::sim::{self, SimError};
use crate::state::StateVector;

#[derive(Debug, Error)]
pub enum PoissonError {
    #[error("instance size n must be at least 2, got {0}")]
    SizeTooSmall(usize),
    #[error("right-hand side has length {got}, expected {expected}")]
    BadRhsLength { expected: usize, got: usize },
    #[error("right-hand side must be finite and not all zero")]
    DegenerateRhs,
    #[error("eigenvalue index {j} out of range for n={n}")]
    EigenIndexOutOfRange { j: usize, n: usize },
    #[error("state amplitude on basis 0 must be zero")]
    NonzeroGroundAmplitude,
    #[error("amplitude vector has length {got}, expected {expected}")]
    BadAmplitudeLength { expected: usize, got: usize },
    #[error("add-one circuit needs at least one data qubit")]
    EmptyAddOne,
    #[error(transparent)]
    Gate(#[from] GateError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// One discretized Poisson problem: `N = 2^n` intervals, mesh `h = 1/N`, and
/// the right-hand side `b` of length `N-1` (also the state-prep amplitudes
/// after normalization).
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PoissonInstance {
    pub n: usize,
    pub b: Vec<f64>,
}

impl PoissonInstance {
    pub fn new(n: usize, b: Vec<f64>) -> Result<Self, PoissonError> {
        if n < 2 {
            return Err(PoissonError::SizeTooSmall(n));
        }
        let expected = (1usize << n) - 1;
        if b.len() != expected {
            return Err(PoissonError::BadRhsLength {
                expected,
                got: b.len(),
            });
        }
        if b.iter().any(|x| !x.is_finite()) || b.iter().all(|&x| x == 0.0) {
            return Err(PoissonError::DegenerateRhs);
        }
        Ok(Self { n, b })
    }

    /// Number of discrete intervals.
    pub fn num_intervals(&self) -> usize {
        1 << self.n
    }

    /// The two demonstration instances shipped with the toolkit.
    pub fn builtin(n: usize) -> Option<PoissonInstance> {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        match n {
            2 => Some(PoissonInstance {
                n: 2,
                b: vec![r, 0.5, 0.5],
            }),
            3 => Some(PoissonInstance {
                n: 3,
                b: vec![0.5, r / 2.0, r / 2.0, r / 2.0, r / 2.0, r / 2.0, r / 2.0],
            }),
            _ => None,
        }
    }

    /// `b` normalized to unit Euclidean norm.
    pub fn normalized_rhs(&self) -> Vec<f64> {
        let norm: f64 = self.b.iter().map(|x| x * x).sum::<f64>().sqrt();
        self.b.iter().map(|x| x / norm).collect()
    }

    /// Full `2^n` amplitude vector for state preparation: zero on basis 0,
    /// the normalized right-hand side on bases `1..N-1`.
    pub fn state_amplitudes(&self) -> Vec<f64> {
        let mut amps = vec![0.0];
        amps.extend(self.normalized_rhs());
        amps
    }
}

/// Eigenpairs of the discretized operator.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    n: usize,
}

impl EigenSystem {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn num_intervals(&self) -> usize {
        1 << self.n
    }

    /// `lambda_j = 4 N^2 sin^2(j pi / 2N)`, `j = 1..N-1`.
    pub fn eigenvalue(&self, j: usize) -> Result<f64, PoissonError> {
        let n_pts = self.num_intervals() as f64;
        if j == 0 || j >= self.num_intervals() {
            return Err(PoissonError::EigenIndexOutOfRange { j, n: self.n });
        }
        let s = (j as f64 * std::f64::consts::PI / (2.0 * n_pts)).sin();
        Ok(4.0 * n_pts * n_pts * s * s)
    }

    /// Component `k` of the orthonormal eigenvector `u_j`, both 1-based.
    pub fn eigenvector(&self, j: usize, k: usize) -> f64 {
        let n_pts = self.num_intervals() as f64;
        (2.0 / n_pts).sqrt() * (j as f64 * std::f64::consts::PI * k as f64 / n_pts).sin()
    }
}

/// The sine-transform matrix `ST[i][j] = sqrt(2/N) sin(pi i j / N)` for
/// `i, j = 1..N-1`, returned row-major as an `(N-1) x (N-1)` table.
pub fn sine_transform_matrix(n: usize) -> Vec<Vec<f64>> {
    let n_pts = 1usize << n;
    let scale = (2.0 / n_pts as f64).sqrt();
    (1..n_pts)
        .map(|i| {
            (1..n_pts)
                .map(|j| scale * (std::f64::consts::PI * (i * j) as f64 / n_pts as f64).sin())
                .collect()
        })
        .collect()
}

/// Solve `A v = b` by tridiagonal elimination, `A = N^2 tridiag(-1, 2, -1)`.
pub fn solve_classical(instance: &PoissonInstance) -> Vec<f64> {
    let n_pts = instance.num_intervals() as f64;
    let scale = n_pts * n_pts;
    let size = instance.b.len();
    let diag = 2.0 * scale;
    let off = -scale;

    // Thomas algorithm.
    let mut c_prime = vec![0.0f64; size];
    let mut d_prime = vec![0.0f64; size];
    c_prime[0] = off / diag;
    d_prime[0] = instance.b[0] / diag;
    for i in 1..size {
        let denom = diag - off * c_prime[i - 1];
        if i < size - 1 {
            c_prime[i] = off / denom;
        }
        d_prime[i] = (instance.b[i] - off * d_prime[i - 1]) / denom;
    }
    let mut v = vec![0.0f64; size];
    v[size - 1] = d_prime[size - 1];
    for i in (0..size - 1).rev() {
        v[i] = d_prime[i] - c_prime[i] * v[i + 1];
    }
    v
}

/// Residual `||A v - b||_inf / ||b||_inf` of a candidate solution.
pub fn residual(instance: &PoissonInstance, v: &[f64]) -> f64 {
    let n_pts = instance.num_intervals() as f64;
    let scale = n_pts * n_pts;
    let size = instance.b.len();
    let mut worst = 0.0f64;
    let mut b_max = 0.0f64;
    for i in 0..size {
        let left = if i > 0 { v[i - 1] } else { 0.0 };
        let right = if i + 1 < size { v[i + 1] } else { 0.0 };
        let av = scale * (2.0 * v[i] - left - right);
        worst = worst.max((av - instance.b[i]).abs());
        b_max = b_max.max(instance.b[i].abs());
    }
    worst / b_max
}

/// The `i`-th sine factor (1-based, `i = 1..n-1`) of the reciprocal-eigenvalue
/// product for basis `j`. The product of all `n-1` factors squares to
/// `8/lambda_j`; `m` is the 2-adic valuation of `j`.
fn reciprocal_factor(n: usize, j: usize, i: usize) -> f64 {
    debug_assert!(j >= 1 && i >= 1 && i <= n - 1);
    let m = j.trailing_zeros() as usize;
    if i <= m {
        return 0.5;
    }
    let k = i - m + 1;
    let j_odd = (j >> m) as i64;
    let modulus = 1i64 << (k + 1);
    let residue = ((1i64 << k) - j_odd).rem_euclid(modulus);
    (residue as f64 * std::f64::consts::PI / modulus as f64).sin()
}

/// The product-formula value of `8/lambda_j` used by the rotation ladder.
pub fn eigen_recip(j: usize, n: usize) -> Result<f64, PoissonError> {
    if n < 2 {
        return Err(PoissonError::SizeTooSmall(n));
    }
    if j == 0 || j >= (1usize << n) {
        return Err(PoissonError::EigenIndexOutOfRange { j, n });
    }
    let product: f64 = (1..n).map(|i| reciprocal_factor(n, j, i)).product();
    Ok(product * product)
}

/// Register assignment of the solver circuit on `3n` qubits.
///
/// B (solution) sits on the low qubits, the sine-transform extraction ancilla
/// directly above it, then the carry register C, the rotation register E, and
/// the success flag on the top qubit. Keeping B, Anc2 and C contiguous lets
/// the standalone sine-transform circuit embed without remapping.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverLayout {
    pub n: usize,
    pub b: Vec<usize>,
    pub c: Vec<usize>,
    pub e: Vec<usize>,
    pub anc: usize,
    pub anc2: usize,
}

impl SolverLayout {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            b: (0..n).collect(),
            anc2: n,
            c: (n + 1..2 * n).collect(),
            e: (2 * n..3 * n - 1).collect(),
            anc: 3 * n - 1,
        }
    }

    pub fn total_qubits(&self) -> usize {
        3 * self.n
    }
}

/// Emit a ripple increment of `data` (low bit first) by one, optionally
/// controlled, using `carries` as scratch that always returns to its input
/// value. `carries` must hold `data.len() - 1` qubits.
fn increment_ops(
    circuit: &mut Circuit,
    data: &[usize],
    carries: &[usize],
    control: Option<usize>,
) -> Result<(), GateError> {
    let m = data.len();
    debug_assert_eq!(carries.len(), m.saturating_sub(1));
    if m == 1 {
        match control {
            Some(a) => circuit.cx(a, data[0])?,
            None => circuit.x(data[0])?,
        };
        return Ok(());
    }
    // Carry chain up: carries[0] = (control AND) data[0], then ANDs upward.
    match control {
        Some(a) => circuit.ccx(a, data[0], carries[0])?,
        None => circuit.cx(data[0], carries[0])?,
    };
    for i in 1..m - 1 {
        circuit.ccx(carries[i - 1], data[i], carries[i])?;
    }
    circuit.cx(carries[m - 2], data[m - 1])?;
    // Unwind, flipping each data bit by the carry below it.
    for i in (1..m - 1).rev() {
        circuit.ccx(carries[i - 1], data[i], carries[i])?;
        circuit.cx(carries[i - 1], data[i])?;
    }
    match control {
        Some(a) => {
            circuit.ccx(a, data[0], carries[0])?;
            circuit.cx(a, data[0])?;
        }
        None => {
            circuit.cx(data[0], carries[0])?;
            circuit.x(data[0])?;
        }
    };
    Ok(())
}

/// Ripple-carry add-one on `data_qubits` data qubits (low bit = qubit 0) with
/// `data_qubits - 1` carry qubits above them: `|j>|0...0> -> |j+1 mod 2^m>|0...0>`.
pub fn build_add_one(data_qubits: usize) -> Result<Circuit, PoissonError> {
    if data_qubits < 1 {
        return Err(PoissonError::EmptyAddOne);
    }
    let carries: Vec<usize> = (data_qubits..2 * data_qubits - 1).collect();
    let data: Vec<usize> = (0..data_qubits).collect();
    let total = if data_qubits == 1 { 1 } else { 2 * data_qubits - 1 };
    let mut circuit = Circuit::new(total, 0);
    increment_ops(&mut circuit, &data, &carries, None)?;
    Ok(circuit)
}

/// Fourier transform ops on `qubits` listed most significant first, with
/// terminal swaps. `angle_sign` selects the phase convention.
fn fourier_ops(circuit: &mut Circuit, qubits: &[usize], angle_sign: f64) -> Result<(), GateError> {
    let len = qubits.len();
    for i in 0..len {
        circuit.h(qubits[i])?;
        for k in i + 1..len {
            let theta = angle_sign * std::f64::consts::PI / (1u64 << (k - i)) as f64;
            circuit.cp(theta, qubits[k], qubits[i])?;
        }
    }
    for i in 0..len / 2 {
        circuit.swap(qubits[i], qubits[len - 1 - i])?;
    }
    Ok(())
}

/// The folding permutation that, conditioned on the ancilla, maps
/// `|j> -> |N-j mod N>` on the data register: a CX fan-out followed by a
/// controlled ripple increment.
fn fold_ops(
    circuit: &mut Circuit,
    data: &[usize],
    anc: usize,
    carries: &[usize],
) -> Result<(), GateError> {
    for &q in data.iter().rev() {
        circuit.cx(anc, q)?;
    }
    increment_ops(circuit, data, carries, Some(anc))
}

/// Sine-transform block on `2n` qubits: data `0..n-1`, extraction ancilla `n`,
/// carries `n+1..2n-1`.
///
/// With the ancilla at `|1>` and the carries at `|0>`, the induced map on the
/// data register restricted to `|j>`, `j = 1..N-1`, equals `-i * ST` with
/// `ST[i][j] = sqrt(2/N) sin(pi i j / N)`; the carries return to `|0>`. The
/// global `-i` is tracked, not corrected: the transform followed by its
/// inverse cancels it.
pub fn build_sine_transform(n: usize) -> Result<Circuit, PoissonError> {
    if n < 2 {
        return Err(PoissonError::SizeTooSmall(n));
    }
    let data: Vec<usize> = (0..n).collect();
    let anc = n;
    let carries: Vec<usize> = (n + 1..2 * n).collect();
    let mut circuit = Circuit::new(2 * n, 0);

    circuit.h(anc)?;
    let fold_start = circuit.len();
    fold_ops(&mut circuit, &data, anc, &carries)?;
    let fold_ops_list: Vec<GateOp> = circuit.ops()[fold_start..].to_vec();

    // Fourier core over (ancilla, data) with the ancilla as the most
    // significant bit; the negative phase convention fixes the extracted
    // block's global phase at -i.
    let mut ft_qubits = vec![anc];
    ft_qubits.extend(data.iter().rev());
    fourier_ops(&mut circuit, &ft_qubits, -1.0)?;

    for op in fold_ops_list.iter().rev() {
        circuit.append(op.clone())?;
    }
    circuit.h(anc)?;
    Ok(circuit)
}

/// Multiplexed Y-rotation: applies `RY(angles[v])` to `target`, where `v` is
/// the value read from `controls` (most significant listed first). Decomposes
/// recursively into CX conjugations of half-length multiplexors.
fn multiplexed_ry(
    circuit: &mut Circuit,
    controls: &[usize],
    target: usize,
    angles: &[f64],
) -> Result<(), GateError> {
    debug_assert_eq!(angles.len(), 1 << controls.len());
    if angles.iter().all(|&a| a == 0.0) {
        return Ok(());
    }
    if controls.is_empty() {
        circuit.ry(angles[0], target)?;
        return Ok(());
    }
    let half = angles.len() / 2;
    let plus: Vec<f64> = (0..half)
        .map(|i| (angles[i] + angles[half + i]) / 2.0)
        .collect();
    let minus: Vec<f64> = (0..half)
        .map(|i| (angles[i] - angles[half + i]) / 2.0)
        .collect();
    circuit.cx(controls[0], target)?;
    multiplexed_ry(circuit, &controls[1..], target, &minus)?;
    circuit.cx(controls[0], target)?;
    multiplexed_ry(circuit, &controls[1..], target, &plus)?;
    Ok(())
}

/// Multi-controlled X using borrowed workspace qubits that are restored to
/// their input state. Falls back to a split recursion when fewer than
/// `controls - 2` borrows are available.
fn mcx_ops(
    circuit: &mut Circuit,
    controls: &[usize],
    target: usize,
    pool: &[usize],
) -> Result<(), GateError> {
    match controls.len() {
        0 => {
            circuit.x(target)?;
        }
        1 => {
            circuit.cx(controls[0], target)?;
        }
        2 => {
            circuit.ccx(controls[0], controls[1], target)?;
        }
        k if pool.len() >= k - 2 => {
            let borrows = &pool[..k - 2];
            for _ in 0..2 {
                circuit.ccx(controls[k - 1], borrows[k - 3], target)?;
                for i in (3..=k - 1).rev() {
                    circuit.ccx(controls[i - 1], borrows[i - 3], borrows[i - 2])?;
                }
                circuit.ccx(controls[0], controls[1], borrows[0])?;
                for i in 3..=k - 1 {
                    circuit.ccx(controls[i - 1], borrows[i - 3], borrows[i - 2])?;
                }
            }
        }
        k => {
            assert!(!pool.is_empty(), "multi-controlled X needs one spare qubit");
            let bridge = pool[0];
            let m = (k + 1) / 2;
            let (low, high) = controls.split_at(m);
            let mut upper = vec![bridge];
            upper.extend_from_slice(high);
            for _ in 0..2 {
                mcx_ops(circuit, low, bridge, high)?;
                mcx_ops(circuit, &upper, target, low)?;
            }
        }
    }
    Ok(())
}

/// Emit a real-amplitude state preparation on `qubits` (low bit first) via a
/// binary tree of multiplexed Y-rotations.
fn state_prep_ops(
    circuit: &mut Circuit,
    qubits: &[usize],
    amplitudes: &[f64],
) -> Result<(), GateError> {
    let n = qubits.len();
    debug_assert_eq!(amplitudes.len(), 1 << n);
    for level in 0..n {
        let prefixes = 1usize << level;
        let seg_len = 1usize << (n - level);
        let mut angles = Vec::with_capacity(prefixes);
        for p in 0..prefixes {
            let seg = &amplitudes[p * seg_len..(p + 1) * seg_len];
            let (lo, hi) = seg.split_at(seg_len / 2);
            let theta = if level == n - 1 {
                // Leaf pairs carry the amplitude signs.
                2.0 * hi[0].atan2(lo[0])
            } else {
                let norm_lo = lo.iter().map(|x| x * x).sum::<f64>().sqrt();
                let norm_hi = hi.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm_lo == 0.0 && norm_hi == 0.0 {
                    0.0
                } else {
                    2.0 * norm_hi.atan2(norm_lo)
                }
            };
            angles.push(theta);
        }
        let controls: Vec<usize> = (0..level).map(|l| qubits[n - 1 - l]).collect();
        multiplexed_ry(circuit, &controls, qubits[n - 1 - level], &angles)?;
    }
    Ok(())
}

/// State-preparation circuit mapping `|0...0>` to the given real amplitude
/// vector (length `2^n`), which must vanish on basis 0 and is normalized
/// internally.
pub fn prepare_b_state(n: usize, amplitudes: &[f64]) -> Result<Circuit, PoissonError> {
    let dim = 1usize << n;
    if amplitudes.len() != dim {
        return Err(PoissonError::BadAmplitudeLength {
            expected: dim,
            got: amplitudes.len(),
        });
    }
    if amplitudes[0] != 0.0 {
        return Err(PoissonError::NonzeroGroundAmplitude);
    }
    let norm: f64 = amplitudes.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(PoissonError::DegenerateRhs);
    }
    let normalized: Vec<f64> = amplitudes.iter().map(|x| x / norm).collect();
    let qubits: Vec<usize> = (0..n).collect();
    let mut circuit = Circuit::new(n, 0);
    state_prep_ops(&mut circuit, &qubits, &normalized)?;
    Ok(circuit)
}

/// The rotation-ladder angle for register qubit `i` (1-based) when B holds `j`.
fn ladder_angle(n: usize, j: usize, i: usize) -> f64 {
    if j == 0 {
        // Basis 0 never carries amplitude; leave it unrotated.
        return 0.0;
    }
    2.0 * reciprocal_factor(n, j, i).asin()
}

/// Controlled rotation cascade on registers E and C.
///
/// Conditioned on register B holding `|j>`, each of the `n-1` qubits of E and
/// of C rotates so that its `|1>` amplitude is one sine factor of the
/// reciprocal-eigenvalue product; jointly the all-ones configuration of E and C
/// carries amplitude `8/lambda_j`. Built on the full solver layout.
pub fn build_ry_ladder(n: usize) -> Result<Circuit, PoissonError> {
    if n < 2 {
        return Err(PoissonError::SizeTooSmall(n));
    }
    let layout = SolverLayout::new(n);
    let mut circuit = Circuit::new(layout.total_qubits(), 0);
    ladder_ops(&mut circuit, &layout)?;
    Ok(circuit)
}

fn ladder_ops(circuit: &mut Circuit, layout: &SolverLayout) -> Result<(), GateError> {
    let n = layout.n;
    let controls: Vec<usize> = layout.b.iter().rev().copied().collect();
    for i in 1..n {
        let angles: Vec<f64> = (0..1usize << n).map(|j| ladder_angle(n, j, i)).collect();
        multiplexed_ry(circuit, &controls, layout.e[i - 1], &angles)?;
        multiplexed_ry(circuit, &controls, layout.c[i - 1], &angles)?;
    }
    Ok(())
}

/// The full optimized solver circuit on `3n` qubits with `n+1` classical bits:
/// state preparation, sine transform, rotation ladder, success-flag flip,
/// X module on the carry register, inverse sine transform, and measurement of
/// B and the flag.
pub fn build_solver(instance: &PoissonInstance) -> Result<Circuit, PoissonError> {
    let n = instance.n;
    let layout = SolverLayout::new(n);
    let mut circuit = Circuit::new(layout.total_qubits(), n + 1);

    state_prep_ops(&mut circuit, &layout.b, &instance.state_amplitudes())?;

    circuit.x(layout.anc2)?;
    let st = build_sine_transform(n)?;
    for op in st.ops() {
        circuit.append(op.clone())?;
    }

    ladder_ops(&mut circuit, &layout)?;

    let mut flag_controls = layout.e.clone();
    flag_controls.extend(&layout.c);
    let mut pool = layout.b.clone();
    pool.push(layout.anc2);
    mcx_ops(&mut circuit, &flag_controls, layout.anc, &pool)?;

    for &q in &layout.c {
        circuit.x(q)?;
    }

    let st_inv = st.inverse()?;
    for op in st_inv.ops() {
        circuit.append(op.clone())?;
    }
    circuit.x(layout.anc2)?;

    for (i, &q) in layout.b.iter().enumerate() {
        circuit.measure(q, i)?;
    }
    circuit.measure(layout.anc, n)?;
    Ok(circuit)
}

/// Output of an ideal solver run compared against the classical oracle.
#[derive(Debug, Clone)]
pub struct SolverResult {
    /// Joint probability of (B = j, flag = 1) for each solution basis j;
    /// sums to `success_probability`, not 1.
    pub post_selected_probs: BTreeMap<usize, f64>,
    pub success_probability: f64,
    /// `sqrt(p_j) / 8`: the solver's estimate of `|v_j|` for the normalized
    /// right-hand side.
    pub solution_estimate: Vec<f64>,
    /// `A^{-1} b_hat` from tridiagonal elimination on the normalized rhs.
    pub oracle_solution: Vec<f64>,
}

/// Build, run, and post-select the solver on an instance, returning the
/// probabilities along with the classical oracle solution.
pub fn solve_ideal(instance: &PoissonInstance) -> Result<SolverResult, PoissonError> {
    let circuit = build_solver(instance)?;
    let layout = SolverLayout::new(instance.n);
    // Drop the terminal measurements up front; the exact run reads amplitudes.
    let mut unitary_part = Circuit::new(circuit.num_qubits, 0);
    for op in circuit.ops() {
        if op.kind != crate::gates::GateKind::Measure {
            unitary_part.append(op.clone())?;
        }
    }
    let state = sim::run_ideal(&unitary_part, StateVector::zero(circuit.num_qubits))?;
    let selection = sim::post_select(&state, &solver_success_conditions(&layout))?;

    let dim = instance.num_intervals();
    let mut post_selected_probs = BTreeMap::new();
    for j in 1..dim {
        post_selected_probs.insert(j, selection.probabilities.get(&j).copied().unwrap_or(0.0));
    }
    let solution_estimate: Vec<f64> = (1..dim)
        .map(|j| post_selected_probs[&j].sqrt() / 8.0)
        .collect();
    let normalized = PoissonInstance::new(instance.n, instance.normalized_rhs())?;
    let oracle_solution = solve_classical(&normalized);
    Ok(SolverResult {
        post_selected_probs,
        success_probability: selection.success_probability,
        solution_estimate,
        oracle_solution,
    })
}

/// The success signature of the solver circuit: flag up, rotation register all
/// ones, carries and both ancillas back to zero. Conditioning on all of them
/// leaves exactly register B.
pub fn solver_success_conditions(layout: &SolverLayout) -> Vec<(usize, bool)> {
    let mut conditions = vec![(layout.anc, true), (layout.anc2, false)];
    for &q in &layout.e {
        conditions.push((q, true));
    }
    for &q in &layout.c {
        conditions.push((q, false));
    }
    conditions
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::run_ideal;

    /// Independent eigen-expansion solve: `v = sum_j (<u_j, b> / lambda_j) u_j`.
    fn solve_by_eigen_expansion(instance: &PoissonInstance) -> Vec<f64> {
        let eigen = EigenSystem::new(instance.n);
        let size = instance.b.len();
        let mut v = vec![0.0f64; size];
        for j in 1..=size {
            let coeff: f64 = (1..=size)
                .map(|k| eigen.eigenvector(j, k) * instance.b[k - 1])
                .sum();
            let lambda = eigen.eigenvalue(j).unwrap();
            for k in 1..=size {
                v[k - 1] += coeff / lambda * eigen.eigenvector(j, k);
            }
        }
        v
    }

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (*seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    }

    #[test]
    fn single_unknown_system() {
        // N=2: A = [2 * 4] = [8], b = [1] -> v = 1/8.
        let instance = PoissonInstance {
            n: 1,
            b: vec![1.0],
        };
        let v = solve_classical(&instance);
        assert!((v[0] - 0.125).abs() < 1e-15);
    }

    #[test]
    fn middle_unit_vector_gives_symmetric_solution() {
        let instance = PoissonInstance::new(2, vec![0.0, 1.0, 0.0]).unwrap();
        let v = solve_classical(&instance);
        assert!((v[0] - v[2]).abs() < 1e-14);
        assert!(v[1] > v[0]);
        assert!(residual(&instance, &v) < 1e-10);
    }

    #[test]
    fn elimination_matches_eigen_expansion_on_random_rhs() {
        let mut seed = 41u64;
        for _ in 0..20 {
            let b: Vec<f64> = (0..7).map(|_| lcg(&mut seed)).collect();
            let instance = PoissonInstance::new(3, b).unwrap();
            let direct = solve_classical(&instance);
            let expanded = solve_by_eigen_expansion(&instance);
            for (a, b) in direct.iter().zip(&expanded) {
                assert!((a - b).abs() < 1e-10);
            }
            assert!(residual(&instance, &direct) < 1e-10);
        }
    }

    #[test]
    fn eigenvalues_increase_and_eigenvectors_are_orthonormal() {
        let eigen = EigenSystem::new(3);
        let mut prev = 0.0;
        for j in 1..8 {
            let lambda = eigen.eigenvalue(j).unwrap();
            assert!(lambda > prev);
            prev = lambda;
        }
        for j1 in 1..8 {
            for j2 in 1..8 {
                let dot: f64 = (1..8)
                    .map(|k| eigen.eigenvector(j1, k) * eigen.eigenvector(j2, k))
                    .sum();
                let expect = if j1 == j2 { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn eigen_recip_examples() {
        // 8/lambda_2 at n=2: 8 / (64 * 1/2).
        assert!((eigen_recip(2, 2).unwrap() - 0.25).abs() < 1e-15);
        // 8/lambda_1 at n=2 equals sin^2(3 pi / 8).
        let expect = (3.0 * std::f64::consts::PI / 8.0).sin().powi(2);
        assert!((eigen_recip(1, 2).unwrap() - expect).abs() < 1e-15);
        // n=3, j=2: 8 / (256 sin^2(pi/8)).
        let expect = 8.0 / (256.0 * (std::f64::consts::PI / 8.0).sin().powi(2));
        assert!((eigen_recip(2, 3).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn eigen_recip_matches_eigenvalue_formula_up_to_n10() {
        for n in 2..=10 {
            let eigen = EigenSystem::new(n);
            for j in 1..(1usize << n) {
                let formula = eigen_recip(j, n).unwrap();
                let reference = 8.0 / eigen.eigenvalue(j).unwrap();
                assert!(
                    (formula - reference).abs() < 1e-12,
                    "n={n} j={j}: {formula} vs {reference}"
                );
            }
        }
        assert!(matches!(
            eigen_recip(0, 3),
            Err(PoissonError::EigenIndexOutOfRange { .. })
        ));
        assert!(matches!(
            eigen_recip(8, 3),
            Err(PoissonError::EigenIndexOutOfRange { .. })
        ));
    }

    #[test]
    fn add_one_increments_every_basis_state() {
        for m in 1..=4usize {
            let circuit = build_add_one(m).unwrap();
            let dim = 1usize << m;
            for j in 0..dim {
                let input = StateVector::basis(circuit.num_qubits, j).unwrap();
                let out = run_ideal(&circuit, input).unwrap();
                let expect = (j + 1) % dim;
                assert!(
                    (out.basis_probability(expect).unwrap() - 1.0).abs() < 1e-12,
                    "m={m} j={j}"
                );
            }
        }
    }

    #[test]
    fn add_one_wraps_and_restores_carries() {
        let circuit = build_add_one(3).unwrap();
        // 2N-1 = 7 -> 0 with carries back at zero: output basis exactly |00 000>.
        let input = StateVector::basis(5, 7).unwrap();
        let out = run_ideal(&circuit, input).unwrap();
        assert!((out.basis_probability(0).unwrap() - 1.0).abs() < 1e-12);
    }

    /// Extract the data-register block of the sine-transform circuit with the
    /// ancilla at |1> and carries at |0>.
    fn extract_st_block(n: usize) -> Vec<Vec<num_complex::Complex64>> {
        let circuit = build_sine_transform(n).unwrap();
        let dim = 1usize << n;
        let anc_bit = 1usize << n;
        let mut block = vec![vec![num_complex::Complex64::new(0.0, 0.0); dim - 1]; dim - 1];
        for j in 1..dim {
            let input = StateVector::basis(circuit.num_qubits, anc_bit | j).unwrap();
            let out = run_ideal(&circuit, input).unwrap();
            let mut captured = 0.0;
            for (index, amp) in out.amplitudes().iter().enumerate() {
                let p = amp.norm_sqr();
                if index & anc_bit == anc_bit && index & !(anc_bit | (dim - 1)) == 0 {
                    let i = index & (dim - 1);
                    if i >= 1 {
                        block[i - 1][j - 1] = *amp;
                        captured += p;
                    }
                } else {
                    assert!(p < 1e-18, "n={n} j={j}: leakage at index {index}: {p}");
                }
            }
            assert!((captured - 1.0).abs() < 1e-10);
        }
        block
    }

    #[test]
    fn sine_transform_block_is_minus_i_times_st() {
        for n in [2usize, 3] {
            let block = extract_st_block(n);
            let st = sine_transform_matrix(n);
            let dim = (1usize << n) - 1;
            for i in 0..dim {
                for j in 0..dim {
                    let expect = num_complex::Complex64::new(0.0, -st[i][j]);
                    assert!(
                        (block[i][j] - expect).norm() < 1e-9,
                        "n={n} [{i}][{j}]: {} vs {expect}",
                        block[i][j]
                    );
                }
            }
        }
    }

    #[test]
    fn sine_transform_applied_twice_is_identity_up_to_global_phase() {
        let circuit = build_sine_transform(2).unwrap();
        let mut doubled = Circuit::new(circuit.num_qubits, 0);
        doubled.extend(&circuit).unwrap();
        doubled.extend(&circuit).unwrap();
        for j in 1..4usize {
            let input = StateVector::basis(4, 4 | j).unwrap();
            let out = run_ideal(&doubled, input).unwrap();
            // (-i ST)^2 = -I on the data subspace.
            let amp = out.amplitudes()[4 | j];
            assert!((amp - num_complex::Complex64::new(-1.0, 0.0)).norm() < 1e-9);
        }
    }

    #[test]
    fn ladder_places_reciprocal_amplitude_on_all_ones() {
        for n in [2usize, 3] {
            let layout = SolverLayout::new(n);
            let circuit = build_ry_ladder(n).unwrap();
            for j in 1..(1usize << n) {
                let input = StateVector::basis(circuit.num_qubits, j).unwrap();
                let out = run_ideal(&circuit, input).unwrap();
                let mut all_ones = j;
                for &q in layout.e.iter().chain(&layout.c) {
                    all_ones |= 1 << q;
                }
                let amp = out.amplitudes()[all_ones];
                let expect = eigen_recip(j, n).unwrap();
                assert!(
                    (amp.re - expect).abs() < 1e-9 && amp.im.abs() < 1e-12,
                    "n={n} j={j}: {amp} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn ladder_amplitude_is_largest_for_smallest_eigenvalue() {
        let n = 3;
        let r1 = eigen_recip(1, n).unwrap();
        for j in 2..8 {
            assert!(eigen_recip(j, n).unwrap() < r1);
        }
    }

    #[test]
    fn prepare_b_reproduces_paper_amplitudes() {
        let instance = PoissonInstance::builtin(2).unwrap();
        let circuit = prepare_b_state(2, &instance.state_amplitudes()).unwrap();
        let out = run_ideal(&circuit, StateVector::zero(2)).unwrap();
        let expect = [0.0, std::f64::consts::FRAC_1_SQRT_2, 0.5, 0.5];
        for (amp, want) in out.amplitudes().iter().zip(expect) {
            assert!((amp.re - want).abs() < 1e-12 && amp.im.abs() < 1e-15);
        }

        let instance = PoissonInstance::builtin(3).unwrap();
        let circuit = prepare_b_state(3, &instance.state_amplitudes()).unwrap();
        let out = run_ideal(&circuit, StateVector::zero(3)).unwrap();
        let amps = instance.state_amplitudes();
        for (amp, want) in out.amplitudes().iter().zip(&amps) {
            assert!((amp.re - want).abs() < 1e-12);
        }
    }

    #[test]
    fn prepare_b_handles_uniform_and_signed_vectors() {
        let uniform = vec![0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0];
        let circuit = prepare_b_state(3, &uniform).unwrap();
        let out = run_ideal(&circuit, StateVector::zero(3)).unwrap();
        let expect = 1.0 / 7.0f64.sqrt();
        for k in 1..8 {
            assert!((out.amplitudes()[k].re - expect).abs() < 1e-12);
        }

        let mut seed = 99u64;
        for _ in 0..10 {
            let mut amps: Vec<f64> = (0..8).map(|_| lcg(&mut seed)).collect();
            amps[0] = 0.0;
            let norm: f64 = amps.iter().map(|x| x * x).sum::<f64>().sqrt();
            let normalized: Vec<f64> = amps.iter().map(|x| x / norm).collect();
            let circuit = prepare_b_state(3, &normalized).unwrap();
            let out = run_ideal(&circuit, StateVector::zero(3)).unwrap();
            for (amp, want) in out.amplitudes().iter().zip(&normalized) {
                assert!((amp.re - want).abs() < 1e-10 && amp.im.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn prepare_b_rejects_ground_amplitude() {
        assert!(matches!(
            prepare_b_state(2, &[0.1, 0.9, 0.0, 0.0]),
            Err(PoissonError::NonzeroGroundAmplitude)
        ));
    }

    #[test]
    fn multi_controlled_x_flips_exactly_on_all_ones() {
        // 4 controls, 2 borrows, 1 target on 7 qubits.
        for k in 3..=5usize {
            let total = k + 3;
            let controls: Vec<usize> = (0..k).collect();
            let pool: Vec<usize> = (k..k + 2).collect();
            let target = k + 2;
            let mut circuit = Circuit::new(total, 0);
            mcx_ops(&mut circuit, &controls, target, &pool).unwrap();
            for pattern in 0..(1usize << (k + 2)) {
                let input = StateVector::basis(total, pattern).unwrap();
                let out = run_ideal(&circuit, input).unwrap();
                let controls_on = (0..k).all(|q| pattern >> q & 1 == 1);
                let expect = if controls_on {
                    pattern | 1 << target
                } else {
                    pattern
                };
                assert!(
                    (out.basis_probability(expect).unwrap() - 1.0).abs() < 1e-9,
                    "k={k} pattern={pattern:b}"
                );
            }
        }
    }

    #[test]
    fn solver_reproduces_demonstration_probabilities() {
        let result = solve_ideal(&PoissonInstance::builtin(2).unwrap()).unwrap();
        let expect = [0.205, 0.304, 0.161];
        for (j, want) in (1..4).zip(expect) {
            assert!(
                (result.post_selected_probs[&j] - want).abs() < 5e-3,
                "j={j}: {} vs {want}",
                result.post_selected_probs[&j]
            );
        }
        let total: f64 = result.post_selected_probs.values().sum();
        assert!((total - result.success_probability).abs() < 1e-9);
    }

    #[test]
    fn solver_matches_oracle_on_random_instances() {
        let mut seed = 4242u64;
        for n in [2usize, 3] {
            for _ in 0..5 {
                let b: Vec<f64> = (0..(1 << n) - 1).map(|_| lcg(&mut seed)).collect();
                let instance = PoissonInstance::new(n, b).unwrap();
                let result = solve_ideal(&instance).unwrap();
                let v = &result.oracle_solution;
                for (j, &vj) in v.iter().enumerate() {
                    let expect = 64.0 * vj * vj;
                    let got = result.post_selected_probs[&(j + 1)];
                    assert!(
                        (got - expect).abs() < 1e-6,
                        "n={n} j={}: {got} vs {expect}",
                        j + 1
                    );
                }
            }
        }
    }

    #[test]
    fn eigenvector_input_passes_through() {
        let n = 2;
        let eigen = EigenSystem::new(n);
        let b: Vec<f64> = (1..4).map(|k| eigen.eigenvector(1, k)).collect();
        let instance = PoissonInstance::new(n, b).unwrap();
        let result = solve_ideal(&instance).unwrap();
        // Post-selected distribution must be |u_1|^2 scaled by (8/lambda_1)^2.
        let scale = eigen_recip(1, n).unwrap().powi(2);
        for j in 1..4 {
            let expect = scale * eigen.eigenvector(1, j).powi(2);
            assert!((result.post_selected_probs[&j] - expect).abs() < 1e-9);
        }
        assert!((result.success_probability - scale).abs() < 1e-9);
    }

    #[test]
    fn success_branch_keeps_carries_clean() {
        let instance = PoissonInstance::builtin(2).unwrap();
        let circuit = build_solver(&instance).unwrap();
        let layout = SolverLayout::new(2);
        let state = run_ideal(&circuit, StateVector::zero(circuit.num_qubits)).unwrap();
        for (index, amp) in state.amplitudes().iter().enumerate() {
            let flag_up = index >> layout.anc & 1 == 1;
            let carries_dirty = layout.c.iter().any(|&q| index >> q & 1 == 1);
            if flag_up && carries_dirty {
                assert!(amp.norm() < 1e-9, "index {index}: {amp}");
            }
        }
    }
}
