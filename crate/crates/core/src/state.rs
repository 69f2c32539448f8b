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

//! Quantum state representations and dense complex linear algebra.
//!
//! Two state types are provided: [`StateVector`] for exact pure-state simulation and
//! [`DensityMatrix`] for exact mixed-state (noisy) simulation. Both use the convention
//! that qubit 0 is the least significant bit of the computational basis index.
//!
//! Gate application works by direct index arithmetic on the target-qubit strides
//! rather than by building full `2^q x 2^q` operators.

use num_complex::Complex64;
use thiserror::Error;

/// Errors from state construction and operator application.
#[derive(Debug, Error, PartialEq)]
pub enum StateError {
    #[error("operator acts on {expected} qubit(s) but {got} target(s) were given")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("duplicate target qubit {0}")]
    DuplicateTarget(usize),
    #[error("target qubit {qubit} out of range for {num_qubits}-qubit state")]
    TargetOutOfRange { qubit: usize, num_qubits: usize },
    #[error("basis index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("amplitude vector of length {0} is not a power of two")]
    BadDimension(usize),
    #[error("state contains a non-finite amplitude")]
    NonFinite,
    #[error("matrix of dimension {0} is not unitary")]
    NotUnitary(usize),
    #[error("Kraus channel arity {channel} does not match {targets} target(s)")]
    ArityMismatch { channel: usize, targets: usize },
}

/// A square complex matrix with power-of-two dimension, validated unitary on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl UnitaryMatrix {
    /// Build from row-major entries, checking `U U^dagger = I` to 1e-10.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self, StateError> {
        if !dim.is_power_of_two() || entries.len() != dim * dim {
            return Err(StateError::BadDimension(entries.len()));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(StateError::NonFinite);
        }
        let u = Self { dim, entries };
        if u.unitarity_defect() > 1e-10 {
            return Err(StateError::NotUnitary(dim));
        }
        Ok(u)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_qubits(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    /// Max-norm of `U U^dagger - I`.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..d {
                    acc += self.entry(i, k) * self.entry(j, k).conj();
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((acc - expect).norm());
            }
        }
        worst
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> UnitaryMatrix {
        let d = self.dim;
        let mut entries = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for j in 0..d {
                entries[j * d + i] = self.entry(i, j).conj();
            }
        }
        UnitaryMatrix { dim: d, entries }
    }
}

/// Precomputed index offsets for a k-qubit operator acting on `targets`.
///
/// The first listed target is the most significant bit of the operator's
/// row/column index, so controlled gates written as block matrices
/// `[[I, 0], [0, U]]` take their controls first.
pub(crate) struct TargetFrame {
    pub mask: usize,
    pub offsets: Vec<usize>,
}

pub(crate) fn target_frame(
    num_qubits: usize,
    op_qubits: usize,
    targets: &[usize],
) -> Result<TargetFrame, StateError> {
    if targets.len() != op_qubits {
        return Err(StateError::DimensionMismatch {
            expected: op_qubits,
            got: targets.len(),
        });
    }
    let mut mask = 0usize;
    for &q in targets {
        if q >= num_qubits {
            return Err(StateError::TargetOutOfRange {
                qubit: q,
                num_qubits,
            });
        }
        if mask & (1 << q) != 0 {
            return Err(StateError::DuplicateTarget(q));
        }
        mask |= 1 << q;
    }
    let k = targets.len();
    let offsets = (0..1usize << k)
        .map(|m| {
            let mut off = 0usize;
            for (pos, &q) in targets.iter().enumerate() {
                if (m >> (k - 1 - pos)) & 1 == 1 {
                    off |= 1 << q;
                }
            }
            off
        })
        .collect();
    Ok(TargetFrame { mask, offsets })
}

/// Apply a `2^k x 2^k` matrix (row-major) to the target subspace of a dense vector.
///
/// Shared by the statevector path and the row/column passes of the density-matrix path.
fn apply_matrix_vec(amps: &mut [Complex64], mat: &[Complex64], frame: &TargetFrame) {
    let sub = frame.offsets.len();
    let dim = amps.len();
    let mut scratch = [Complex64::new(0.0, 0.0); 8];
    debug_assert!(sub <= scratch.len());
    for base in 0..dim {
        if base & frame.mask != 0 {
            continue;
        }
        for m in 0..sub {
            scratch[m] = amps[base | frame.offsets[m]];
        }
        for row in 0..sub {
            let mut acc = Complex64::new(0.0, 0.0);
            for col in 0..sub {
                acc += mat[row * sub + col] * scratch[col];
            }
            amps[base | frame.offsets[row]] = acc;
        }
    }
}

/// Complex amplitude vector over all `2^n` computational basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// The all-zeros basis state `|0...0>`.
    pub fn zero(num_qubits: usize) -> Self {
        assert!(num_qubits >= 1, "state needs at least one qubit");
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Self {
            num_qubits,
            amplitudes,
        }
    }

    /// A single computational basis state.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self, StateError> {
        let mut s = Self::zero(num_qubits);
        if index >= s.dim() {
            return Err(StateError::IndexOutOfRange {
                index,
                dim: s.dim(),
            });
        }
        s.amplitudes[0] = Complex64::new(0.0, 0.0);
        s.amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    /// Build from raw amplitudes; must be a power-of-two length, finite, and normalized to 1e-9.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self, StateError> {
        let dim = amplitudes.len();
        if !dim.is_power_of_two() || dim < 2 {
            return Err(StateError::BadDimension(dim));
        }
        if amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(StateError::NonFinite);
        }
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(StateError::NonFinite);
        }
        Ok(Self {
            num_qubits: dim.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// `|<index|psi>|^2`.
    pub fn basis_probability(&self, index: usize) -> Result<f64, StateError> {
        self.amplitudes
            .get(index)
            .map(|z| z.norm_sqr())
            .ok_or(StateError::IndexOutOfRange {
                index,
                dim: self.dim(),
            })
    }

    /// Born-rule probabilities of every basis state.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Apply a unitary to the listed target qubits, first target = most significant.
    pub fn apply_unitary(&mut self, u: &UnitaryMatrix, targets: &[usize]) -> Result<(), StateError> {
        let frame = target_frame(self.num_qubits, u.num_qubits(), targets)?;
        apply_matrix_vec(&mut self.amplitudes, u.entries(), &frame);
        Ok(())
    }

    /// Inner product `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Dense Hermitian trace-one matrix over `2^n` basis states, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    /// The pure `|0...0><0...0|` state.
    pub fn zero(num_qubits: usize) -> Self {
        assert!(num_qubits >= 1, "state needs at least one qubit");
        let dim = 1usize << num_qubits;
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        entries[0] = Complex64::new(1.0, 0.0);
        Self {
            num_qubits,
            entries,
        }
    }

    /// Outer product `|psi><psi|` of a pure state.
    pub fn from_statevector(psi: &StateVector) -> Self {
        let dim = psi.dim();
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for (i, a) in psi.amplitudes().iter().enumerate() {
            for (j, b) in psi.amplitudes().iter().enumerate() {
                entries[i * dim + j] = a * b.conj();
            }
        }
        Self {
            num_qubits: psi.num_qubits(),
            entries,
        }
    }

    /// The maximally mixed state `I / 2^n`.
    pub fn maximally_mixed(num_qubits: usize) -> Self {
        let dim = 1usize << num_qubits;
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Complex64::new(1.0 / dim as f64, 0.0);
        }
        Self {
            num_qubits,
            entries,
        }
    }

    pub fn from_entries(num_qubits: usize, entries: Vec<Complex64>) -> Result<Self, StateError> {
        let dim = 1usize << num_qubits;
        if entries.len() != dim * dim {
            return Err(StateError::BadDimension(entries.len()));
        }
        if entries
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(StateError::NonFinite);
        }
        Ok(Self {
            num_qubits,
            entries,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1usize << self.num_qubits
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim() + col]
    }

    pub fn trace(&self) -> Complex64 {
        let dim = self.dim();
        (0..dim).map(|i| self.entries[i * dim + i]).sum()
    }

    /// Diagonal as real probabilities.
    pub fn diagonal_probabilities(&self) -> Vec<f64> {
        let dim = self.dim();
        (0..dim).map(|i| self.entries[i * dim + i].re).collect()
    }

    /// Max-norm of `rho - rho^dagger`.
    pub fn hermiticity_defect(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for i in 0..dim {
            for j in i..dim {
                worst = worst.max((self.entry(i, j) - self.entry(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Whether `rho + tol*I` admits a Cholesky factorization, i.e. the minimum
    /// eigenvalue is at least `-tol`.
    pub fn is_positive_semidefinite(&self, tol: f64) -> bool {
        let dim = self.dim();
        let mut m = self.entries.clone();
        for i in 0..dim {
            m[i * dim + i] += tol;
        }
        // In-place complex Cholesky; fails on a non-positive pivot.
        for j in 0..dim {
            let mut pivot = m[j * dim + j].re;
            for k in 0..j {
                pivot -= m[j * dim + k].norm_sqr();
            }
            if pivot < 0.0 || !pivot.is_finite() {
                return false;
            }
            let pivot = pivot.sqrt();
            m[j * dim + j] = Complex64::new(pivot, 0.0);
            if pivot == 0.0 {
                // Zero pivot: the remaining column must also vanish for PSD.
                for i in j + 1..dim {
                    let mut acc = m[i * dim + j];
                    for k in 0..j {
                        acc -= m[i * dim + k] * m[j * dim + k].conj();
                    }
                    if acc.norm() > tol.sqrt().max(1e-12) {
                        return false;
                    }
                    m[i * dim + j] = Complex64::new(0.0, 0.0);
                }
                continue;
            }
            for i in j + 1..dim {
                let mut acc = m[i * dim + j];
                for k in 0..j {
                    acc -= m[i * dim + k] * m[j * dim + k].conj();
                }
                m[i * dim + j] = acc / pivot;
            }
        }
        true
    }

    fn left_mul(&mut self, mat: &[Complex64], frame: &TargetFrame) {
        let dim = self.dim();
        let sub = frame.offsets.len();
        let mut scratch = [Complex64::new(0.0, 0.0); 8];
        for base in 0..dim {
            if base & frame.mask != 0 {
                continue;
            }
            for col in 0..dim {
                for m in 0..sub {
                    scratch[m] = self.entries[(base | frame.offsets[m]) * dim + col];
                }
                for row in 0..sub {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for m in 0..sub {
                        acc += mat[row * sub + m] * scratch[m];
                    }
                    self.entries[(base | frame.offsets[row]) * dim + col] = acc;
                }
            }
        }
    }

    fn right_mul_dagger(&mut self, mat: &[Complex64], frame: &TargetFrame) {
        let dim = self.dim();
        let sub = frame.offsets.len();
        let mut scratch = [Complex64::new(0.0, 0.0); 8];
        for row in 0..dim {
            let row_off = row * dim;
            for base in 0..dim {
                if base & frame.mask != 0 {
                    continue;
                }
                for m in 0..sub {
                    scratch[m] = self.entries[row_off + (base | frame.offsets[m])];
                }
                for q in 0..sub {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for m in 0..sub {
                        acc += mat[q * sub + m].conj() * scratch[m];
                    }
                    self.entries[row_off + (base | frame.offsets[q])] = acc;
                }
            }
        }
    }

    /// Conjugation `rho -> U rho U^dagger` on the target qubits.
    pub fn apply_unitary(&mut self, u: &UnitaryMatrix, targets: &[usize]) -> Result<(), StateError> {
        let frame = target_frame(self.num_qubits, u.num_qubits(), targets)?;
        self.left_mul(u.entries(), &frame);
        self.right_mul_dagger(u.entries(), &frame);
        Ok(())
    }

    /// Operator-sum application `rho -> sum_k E_k rho E_k^dagger`.
    ///
    /// `operators` are row-major `2^k x 2^k` matrices acting on `targets`.
    pub fn apply_kraus_operators(
        &mut self,
        operators: &[Vec<Complex64>],
        targets: &[usize],
    ) -> Result<(), StateError> {
        let sub = 1usize << targets.len();
        for op in operators {
            if op.len() != sub * sub {
                return Err(StateError::ArityMismatch {
                    channel: (op.len() as f64).sqrt() as usize,
                    targets: targets.len(),
                });
            }
        }
        let frame = target_frame(self.num_qubits, targets.len(), targets)?;
        let mut acc = vec![Complex64::new(0.0, 0.0); self.entries.len()];
        let original = self.entries.clone();
        for op in operators {
            self.entries.copy_from_slice(&original);
            self.left_mul(op, &frame);
            self.right_mul_dagger(op, &frame);
            for (a, v) in acc.iter_mut().zip(&self.entries) {
                *a += v;
            }
        }
        self.entries = acc;
        Ok(())
    }
}
