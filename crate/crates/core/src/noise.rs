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

//! Single-qubit Kraus noise channels.
//!
//! The four standard channels are provided, each parameterized by the error
//! probability `p` in `[0, 1]`:
//!
//! * amplitude damping: `E0 = diag(1, sqrt(1-p))`, `E1 = sqrt(p) |0><1|`
//! * phase damping: `E0 = diag(1, sqrt(1-p))`, `E1 = diag(0, sqrt(p))`
//! * bit flip: flips the qubit with probability `p` (`E0 = sqrt(1-p) I`, `E1 = sqrt(p) X`)
//! * depolarizing: `E0 = sqrt(1-3p/4) I`, `E1..3 = sqrt(p)/2 {X, Y, Z}`,
//!   equivalent to `rho -> (1-p) rho + p I/2`
//!
//! A `Composite` channel chains all four at a shared `p`. Every constructor
//! validates the completeness relation `sum E_k^dagger E_k = I` to 1e-12.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NoiseError {
    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("Kraus operators violate completeness by {0:e}")]
    NotComplete(f64),
    #[error("empty operator list")]
    Empty,
    #[error("operators have inconsistent dimensions")]
    MixedDimensions,
}

/// Which channel a [`KrausChannel`] was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ChannelName {
    AmplitudeDamping,
    PhaseDamping,
    BitFlip,
    Depolarizing,
    Composite,
    Custom,
}

impl ChannelName {
    pub fn label(self) -> &'static str {
        match self {
            ChannelName::AmplitudeDamping => "amplitude_damping",
            ChannelName::PhaseDamping => "phase_damping",
            ChannelName::BitFlip => "bit_flip",
            ChannelName::Depolarizing => "depolarizing",
            ChannelName::Composite => "composite",
            ChannelName::Custom => "custom",
        }
    }

    /// Short code used by the command line and report columns.
    pub fn code(self) -> &'static str {
        match self {
            ChannelName::AmplitudeDamping => "ad",
            ChannelName::PhaseDamping => "pd",
            ChannelName::BitFlip => "bf",
            ChannelName::Depolarizing => "dp",
            ChannelName::Composite => "composite",
            ChannelName::Custom => "custom",
        }
    }
}

/// A completely positive trace-preserving map in operator-sum form.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    pub name: ChannelName,
    pub p: f64,
    operators: Vec<Vec<Complex64>>,
    dim: usize,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn check_probability(p: f64) -> Result<(), NoiseError> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(NoiseError::ProbabilityOutOfRange(p));
    }
    Ok(())
}

impl KrausChannel {
    /// Build from explicit operators, validating completeness to 1e-12.
    pub fn new(
        name: ChannelName,
        p: f64,
        operators: Vec<Vec<Complex64>>,
    ) -> Result<Self, NoiseError> {
        if operators.is_empty() {
            return Err(NoiseError::Empty);
        }
        let len = operators[0].len();
        if operators.iter().any(|op| op.len() != len) {
            return Err(NoiseError::MixedDimensions);
        }
        let dim = (len as f64).sqrt().round() as usize;
        if dim * dim != len || !dim.is_power_of_two() {
            return Err(NoiseError::MixedDimensions);
        }
        let channel = Self {
            name,
            p,
            operators,
            dim,
        };
        let defect = channel.completeness_defect();
        if defect > 1e-12 {
            return Err(NoiseError::NotComplete(defect));
        }
        Ok(channel)
    }

    pub fn operators(&self) -> &[Vec<Complex64>] {
        &self.operators
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_qubits(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    /// Max-norm of `sum E_k^dagger E_k - I`.
    pub fn completeness_defect(&self) -> f64 {
        let d = self.dim;
        let mut sum = vec![c(0.0, 0.0); d * d];
        for op in &self.operators {
            for i in 0..d {
                for j in 0..d {
                    let mut acc = c(0.0, 0.0);
                    for k in 0..d {
                        acc += op[k * d + i].conj() * op[k * d + j];
                    }
                    sum[i * d + j] += acc;
                }
            }
        }
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((sum[i * d + j] - expect).norm());
            }
        }
        worst
    }

    /// Sequential composition: `other` after `self`, operators multiplied pairwise.
    pub fn compose(&self, other: &KrausChannel) -> Result<KrausChannel, NoiseError> {
        if self.dim != other.dim {
            return Err(NoiseError::MixedDimensions);
        }
        let d = self.dim;
        let mut ops = Vec::with_capacity(self.operators.len() * other.operators.len());
        for b in &other.operators {
            for a in &self.operators {
                let mut prod = vec![c(0.0, 0.0); d * d];
                for i in 0..d {
                    for j in 0..d {
                        let mut acc = c(0.0, 0.0);
                        for k in 0..d {
                            acc += b[i * d + k] * a[k * d + j];
                        }
                        prod[i * d + j] = acc;
                    }
                }
                ops.push(prod);
            }
        }
        KrausChannel::new(ChannelName::Composite, self.p, ops)
    }

    /// Kronecker product with `other`; `self` occupies the high-order factor.
    pub fn tensor(&self, other: &KrausChannel) -> Result<KrausChannel, NoiseError> {
        let da = self.dim;
        let db = other.dim;
        let d = da * db;
        let mut ops = Vec::with_capacity(self.operators.len() * other.operators.len());
        for a in &self.operators {
            for b in &other.operators {
                let mut prod = vec![c(0.0, 0.0); d * d];
                for i1 in 0..da {
                    for j1 in 0..da {
                        for i2 in 0..db {
                            for j2 in 0..db {
                                prod[(i1 * db + i2) * d + (j1 * db + j2)] =
                                    a[i1 * da + j1] * b[i2 * db + j2];
                            }
                        }
                    }
                }
                ops.push(prod);
            }
        }
        KrausChannel::new(self.name, self.p, ops)
    }
}

/// Energy loss to the environment; `E0` leaves `|0>` unchanged and `E1` decays
/// `|1>` into `|0>` with probability `p`.
pub fn amplitude_damping(p: f64) -> Result<KrausChannel, NoiseError> {
    check_probability(p)?;
    let e0 = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c((1.0 - p).sqrt(), 0.0)];
    let e1 = vec![c(0.0, 0.0), c(p.sqrt(), 0.0), c(0.0, 0.0), c(0.0, 0.0)];
    KrausChannel::new(ChannelName::AmplitudeDamping, p, vec![e0, e1])
}

/// Loss of coherence without loss of energy; diagonal entries are preserved,
/// off-diagonals shrink by `sqrt(1-p)`.
pub fn phase_damping(p: f64) -> Result<KrausChannel, NoiseError> {
    check_probability(p)?;
    let e0 = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c((1.0 - p).sqrt(), 0.0)];
    let e1 = vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(p.sqrt(), 0.0)];
    KrausChannel::new(ChannelName::PhaseDamping, p, vec![e0, e1])
}

/// Flips the qubit with probability `p`, leaves it unchanged with `1-p`.
pub fn bit_flip(p: f64) -> Result<KrausChannel, NoiseError> {
    check_probability(p)?;
    let stay = (1.0 - p).sqrt();
    let flip = p.sqrt();
    let e0 = vec![c(stay, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(stay, 0.0)];
    let e1 = vec![c(0.0, 0.0), c(flip, 0.0), c(flip, 0.0), c(0.0, 0.0)];
    KrausChannel::new(ChannelName::BitFlip, p, vec![e0, e1])
}

/// Replaces the state with the maximally mixed state with probability `p`:
/// `rho -> (1-p) rho + p I/2`.
pub fn depolarizing(p: f64) -> Result<KrausChannel, NoiseError> {
    check_probability(p)?;
    let wi = (1.0 - 0.75 * p).sqrt();
    let wp = p.sqrt() / 2.0;
    let e0 = vec![c(wi, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(wi, 0.0)];
    let ex = vec![c(0.0, 0.0), c(wp, 0.0), c(wp, 0.0), c(0.0, 0.0)];
    let ey = vec![c(0.0, 0.0), c(0.0, -wp), c(0.0, wp), c(0.0, 0.0)];
    let ez = vec![c(wp, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-wp, 0.0)];
    KrausChannel::new(ChannelName::Depolarizing, p, vec![e0, ex, ey, ez])
}

/// All four channels applied in sequence at a shared `p`, approximating the
/// combined noise of a real device.
pub fn composite(p: f64) -> Result<KrausChannel, NoiseError> {
    let chained = amplitude_damping(p)?
        .compose(&phase_damping(p)?)?
        .compose(&bit_flip(p)?)?
        .compose(&depolarizing(p)?)?;
    KrausChannel::new(ChannelName::Composite, p, chained.operators.clone())
}

/// Construct a channel by name code (`ad`, `pd`, `bf`, `dp`, `composite`).
pub fn by_name(name: ChannelName, p: f64) -> Result<KrausChannel, NoiseError> {
    match name {
        ChannelName::AmplitudeDamping => amplitude_damping(p),
        ChannelName::PhaseDamping => phase_damping(p),
        ChannelName::BitFlip => bit_flip(p),
        ChannelName::Depolarizing => depolarizing(p),
        ChannelName::Composite => composite(p),
        ChannelName::Custom => Err(NoiseError::Empty),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::DensityMatrix;

    const P_GRID: [f64; 5] = [0.0, 1e-4, 1e-2, 0.5, 1.0];

    fn random_density_matrix(num_qubits: usize, seed: &mut u64) -> DensityMatrix {
        // Random pure-state mixture keeps the matrix PSD and trace-one.
        let dim = 1usize << num_qubits;
        let next = move |s: &mut u64| {
            *s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (*s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut entries = vec![c(0.0, 0.0); dim * dim];
        let mixtures = 3;
        for _ in 0..mixtures {
            let mut amps: Vec<Complex64> =
                (0..dim).map(|_| c(next(seed), next(seed))).collect();
            let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for a in &mut amps {
                *a /= norm;
            }
            for i in 0..dim {
                for j in 0..dim {
                    entries[i * dim + j] += amps[i] * amps[j].conj() / mixtures as f64;
                }
            }
        }
        DensityMatrix::from_entries(num_qubits, entries).unwrap()
    }

    #[test]
    fn completeness_holds_for_all_channels_across_p() {
        for p in P_GRID {
            for ch in [
                amplitude_damping(p).unwrap(),
                phase_damping(p).unwrap(),
                bit_flip(p).unwrap(),
                depolarizing(p).unwrap(),
                composite(p).unwrap(),
            ] {
                assert!(
                    ch.completeness_defect() < 1e-12,
                    "{:?} p={p}",
                    ch.name
                );
            }
        }
    }

    #[test]
    fn p_zero_is_the_identity_channel() {
        let mut seed = 3u64;
        let rho = random_density_matrix(1, &mut seed);
        for ch in [
            amplitude_damping(0.0).unwrap(),
            phase_damping(0.0).unwrap(),
            bit_flip(0.0).unwrap(),
            depolarizing(0.0).unwrap(),
        ] {
            let mut out = rho.clone();
            out.apply_kraus_operators(ch.operators(), &[0]).unwrap();
            for (a, b) in out.entries().iter().zip(rho.entries()) {
                assert!((a - b).norm() < 1e-12, "{:?}", ch.name);
            }
        }
    }

    #[test]
    fn amplitude_damping_decays_excited_state() {
        // p=1 fully decays |1><1| to |0><0|.
        let mut rho = DensityMatrix::zero(1);
        let x = crate::gates::unitary_of(crate::gates::GateKind::X, None).unwrap();
        rho.apply_unitary(&x, &[0]).unwrap();
        rho.apply_kraus_operators(amplitude_damping(1.0).unwrap().operators(), &[0])
            .unwrap();
        assert!((rho.entry(0, 0).re - 1.0).abs() < 1e-12);
        assert!(rho.entry(1, 1).norm() < 1e-12);

        // Intermediate p mixes the populations.
        let p = 0.3;
        let mut rho = DensityMatrix::zero(1);
        rho.apply_unitary(&x, &[0]).unwrap();
        rho.apply_kraus_operators(amplitude_damping(p).unwrap().operators(), &[0])
            .unwrap();
        assert!((rho.entry(0, 0).re - p).abs() < 1e-12);
        assert!((rho.entry(1, 1).re - (1.0 - p)).abs() < 1e-12);
    }

    #[test]
    fn phase_damping_scales_off_diagonals_and_keeps_populations() {
        let h = crate::gates::unitary_of(crate::gates::GateKind::H, None).unwrap();
        for p in [0.2, 1.0] {
            let mut rho = DensityMatrix::zero(1);
            rho.apply_unitary(&h, &[0]).unwrap();
            rho.apply_kraus_operators(phase_damping(p).unwrap().operators(), &[0])
                .unwrap();
            assert!((rho.entry(0, 0).re - 0.5).abs() < 1e-12);
            assert!((rho.entry(1, 1).re - 0.5).abs() < 1e-12);
            assert!((rho.entry(0, 1).re - 0.5 * (1.0 - p).sqrt()).abs() < 1e-12);
        }

        // Any diagonal state is a fixed point.
        let mut seed = 11u64;
        let diag = {
            let rho = random_density_matrix(1, &mut seed);
            let mut entries = vec![c(0.0, 0.0); 4];
            entries[0] = c(rho.entry(0, 0).re, 0.0);
            entries[3] = c(rho.entry(1, 1).re, 0.0);
            DensityMatrix::from_entries(1, entries).unwrap()
        };
        let mut out = diag.clone();
        out.apply_kraus_operators(phase_damping(0.77).unwrap().operators(), &[0])
            .unwrap();
        for (a, b) in out.entries().iter().zip(diag.entries()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn bit_flip_examples() {
        let mut rho = DensityMatrix::zero(1);
        rho.apply_kraus_operators(bit_flip(1.0).unwrap().operators(), &[0])
            .unwrap();
        assert!((rho.entry(1, 1).re - 1.0).abs() < 1e-12);

        let mut rho = DensityMatrix::zero(1);
        rho.apply_kraus_operators(bit_flip(0.5).unwrap().operators(), &[0])
            .unwrap();
        assert!((rho.entry(0, 0).re - 0.5).abs() < 1e-12);
        assert!((rho.entry(1, 1).re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn depolarizing_examples_and_closed_form() {
        // p=1 sends any pure state to I/2.
        let h = crate::gates::unitary_of(crate::gates::GateKind::H, None).unwrap();
        let mut rho = DensityMatrix::zero(1);
        rho.apply_unitary(&h, &[0]).unwrap();
        rho.apply_kraus_operators(depolarizing(1.0).unwrap().operators(), &[0])
            .unwrap();
        assert!((rho.entry(0, 0).re - 0.5).abs() < 1e-12);
        assert!(rho.entry(0, 1).norm() < 1e-12);

        // I/2 is a fixed point at any p.
        let mixed = DensityMatrix::maximally_mixed(1);
        let mut out = mixed.clone();
        out.apply_kraus_operators(depolarizing(0.37).unwrap().operators(), &[0])
            .unwrap();
        for (a, b) in out.entries().iter().zip(mixed.entries()) {
            assert!((a - b).norm() < 1e-12);
        }

        // Operator-sum route equals (1-p) rho + p I/2 on random inputs.
        let mut seed = 5u64;
        for p in [0.0, 0.1, 0.5, 0.9, 1.0] {
            let rho = random_density_matrix(1, &mut seed);
            let mut out = rho.clone();
            out.apply_kraus_operators(depolarizing(p).unwrap().operators(), &[0])
                .unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    let eye = if i == j { 0.5 } else { 0.0 };
                    let expect = rho.entry(i, j) * (1.0 - p) + eye * p;
                    assert!((out.entry(i, j) - expect).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn channels_preserve_trace_and_hermiticity_on_random_states() {
        let mut seed = 17u64;
        for trial in 0..100 {
            let p = (trial as f64 / 99.0).clamp(0.0, 1.0);
            let rho = random_density_matrix(2, &mut seed);
            for ch in [
                amplitude_damping(p).unwrap(),
                phase_damping(p).unwrap(),
                bit_flip(p).unwrap(),
                depolarizing(p).unwrap(),
            ] {
                let mut out = rho.clone();
                out.apply_kraus_operators(ch.operators(), &[trial % 2]).unwrap();
                assert!(
                    (out.trace() - c(1.0, 0.0)).norm() < 1e-12,
                    "{:?} p={p}",
                    ch.name
                );
                assert!(out.hermiticity_defect() < 1e-12);
            }
        }
    }

    #[test]
    fn tensored_pair_matches_sequential_single_qubit_application() {
        let mut seed = 23u64;
        let rho = random_density_matrix(2, &mut seed);
        let ch = amplitude_damping(0.25).unwrap();
        let pair = ch.tensor(&ch).unwrap();

        let mut joint = rho.clone();
        joint.apply_kraus_operators(pair.operators(), &[1, 0]).unwrap();

        let mut sequential = rho.clone();
        sequential.apply_kraus_operators(ch.operators(), &[1]).unwrap();
        sequential.apply_kraus_operators(ch.operators(), &[0]).unwrap();

        for (a, b) in joint.entries().iter().zip(sequential.entries()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn probability_out_of_range_is_rejected() {
        assert!(matches!(
            amplitude_damping(-0.1),
            Err(NoiseError::ProbabilityOutOfRange(_))
        ));
        assert!(matches!(
            depolarizing(1.5),
            Err(NoiseError::ProbabilityOutOfRange(_))
        ));
    }

    #[test]
    fn fig8_intensity_is_complete_to_1e15() {
        let ch = amplitude_damping(0.018).unwrap();
        assert!(ch.completeness_defect() < 1e-15);
    }
}
