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

//! The concrete gate set and the circuit intermediate representation.
//!
//! Gate operands are ordered controls-before-targets, matching the block
//! structure of the controlled unitaries (control = most significant bit of
//! the gate matrix index). `cu1` and `cp` are the same controlled-phase gate;
//! `Barrier` is a retained no-op; `Measure` records a qubit into a classical bit.

use num_complex::Complex64;
use thiserror::Error;

use crate::state::{StateError, UnitaryMatrix};

#[derive(Debug, Error, PartialEq)]
pub enum GateError {
    #[error("{kind:?} expects {expected} qubit(s), got {got}")]
    BadArity {
        kind: GateKind,
        expected: usize,
        got: usize,
    },
    #[error("duplicate qubit {0} in gate operands")]
    DuplicateQubit(usize),
    #[error("qubit {qubit} out of range for {num_qubits}-qubit circuit")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("classical bit {bit} out of range for {num_clbits} classical bit(s)")]
    ClbitOutOfRange { bit: usize, num_clbits: usize },
    #[error("{kind:?} {reason} an angle")]
    AngleMismatch { kind: GateKind, reason: &'static str },
    #[error("angle is not finite")]
    NonFiniteAngle,
    #[error("{0:?} has no unitary matrix")]
    NotUnitaryKind(GateKind),
    #[error("cannot invert a circuit containing Measure")]
    MeasureInInverse,
    #[error("measure requires a classical bit")]
    MissingClbit,
    #[error(transparent)]
    State(#[from] StateError),
}

/// Every gate appearing in the solver circuits and the assembly dialect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GateKind {
    H,
    X,
    Rx,
    Ry,
    Rz,
    /// Single-qubit phase gate `diag(1, e^{i theta})`.
    P,
    Swap,
    Cx,
    Ch,
    Cry,
    Crz,
    /// Controlled phase, written `cp` or `cu1` in the dialect.
    Cp,
    Ccx,
    Barrier,
    Measure,
}

impl GateKind {
    /// Number of qubit operands; `None` for the variadic `Barrier`.
    pub fn arity(self) -> Option<usize> {
        match self {
            GateKind::H | GateKind::X | GateKind::Rx | GateKind::Ry | GateKind::Rz
            | GateKind::P | GateKind::Measure => Some(1),
            GateKind::Swap | GateKind::Cx | GateKind::Ch | GateKind::Cry | GateKind::Crz
            | GateKind::Cp => Some(2),
            GateKind::Ccx => Some(3),
            GateKind::Barrier => None,
        }
    }

    pub fn is_parameterized(self) -> bool {
        matches!(
            self,
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::P | GateKind::Cry
                | GateKind::Crz | GateKind::Cp
        )
    }

    /// Gates that act unitarily on the state (everything but Barrier/Measure).
    pub fn is_unitary(self) -> bool {
        !matches!(self, GateKind::Barrier | GateKind::Measure)
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Rx => "rx",
            GateKind::Ry => "ry",
            GateKind::Rz => "rz",
            GateKind::P => "p",
            GateKind::Swap => "swap",
            GateKind::Cx => "cx",
            GateKind::Ch => "ch",
            GateKind::Cry => "cry",
            GateKind::Crz => "crz",
            GateKind::Cp => "cp",
            GateKind::Ccx => "ccx",
            GateKind::Barrier => "barrier",
            GateKind::Measure => "measure",
        }
    }
}

/// One gate application: kind, operand qubits (controls first), optional angle,
/// and the classical destination for `Measure`.
#[derive(Debug, Clone, PartialEq)]
pub struct GateOp {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub angle: Option<f64>,
    pub clbit: Option<usize>,
}

impl GateOp {
    pub fn gate(kind: GateKind, qubits: Vec<usize>, angle: Option<f64>) -> Self {
        Self {
            kind,
            qubits,
            angle,
            clbit: None,
        }
    }

    pub fn measure(qubit: usize, clbit: usize) -> Self {
        Self {
            kind: GateKind::Measure,
            qubits: vec![qubit],
            angle: None,
            clbit: Some(clbit),
        }
    }

    pub fn barrier(qubits: Vec<usize>) -> Self {
        Self {
            kind: GateKind::Barrier,
            qubits,
            angle: None,
            clbit: None,
        }
    }

    fn validate(&self) -> Result<(), GateError> {
        if let Some(expected) = self.kind.arity() {
            if self.qubits.len() != expected {
                return Err(GateError::BadArity {
                    kind: self.kind,
                    expected,
                    got: self.qubits.len(),
                });
            }
        } else if self.qubits.is_empty() {
            return Err(GateError::BadArity {
                kind: self.kind,
                expected: 1,
                got: 0,
            });
        }
        for (i, &q) in self.qubits.iter().enumerate() {
            if self.qubits[..i].contains(&q) {
                return Err(GateError::DuplicateQubit(q));
            }
        }
        match (self.kind.is_parameterized(), self.angle) {
            (true, None) => {
                return Err(GateError::AngleMismatch {
                    kind: self.kind,
                    reason: "requires",
                })
            }
            (false, Some(_)) => {
                return Err(GateError::AngleMismatch {
                    kind: self.kind,
                    reason: "does not take",
                })
            }
            (true, Some(a)) if !a.is_finite() => return Err(GateError::NonFiniteAngle),
            _ => {}
        }
        if self.kind == GateKind::Measure && self.clbit.is_none() {
            return Err(GateError::MissingClbit);
        }
        Ok(())
    }

    /// The adjoint of a unitary op: parameterized gates negate the angle,
    /// the remaining gates in this set are self-inverse.
    pub fn adjoint(&self) -> Self {
        let mut op = self.clone();
        if let Some(a) = op.angle {
            op.angle = Some(-a);
        }
        op
    }
}

/// Ordered gate list over indexed qubits and classical bits.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub num_qubits: usize,
    pub num_clbits: usize,
    ops: Vec<GateOp>,
}

impl Circuit {
    pub fn new(num_qubits: usize, num_clbits: usize) -> Self {
        assert!(num_qubits >= 1, "circuit needs at least one qubit");
        Self {
            num_qubits,
            num_clbits,
            ops: Vec::new(),
        }
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Validate an op against this circuit's dimensions and append it.
    pub fn append(&mut self, op: GateOp) -> Result<&mut Self, GateError> {
        op.validate()?;
        for &q in &op.qubits {
            if q >= self.num_qubits {
                return Err(GateError::QubitOutOfRange {
                    qubit: q,
                    num_qubits: self.num_qubits,
                });
            }
        }
        if let Some(bit) = op.clbit {
            if bit >= self.num_clbits {
                return Err(GateError::ClbitOutOfRange {
                    bit,
                    num_clbits: self.num_clbits,
                });
            }
        }
        self.ops.push(op);
        Ok(self)
    }

    /// Append every op of `other` (same dimensions assumed).
    pub fn extend(&mut self, other: &Circuit) -> Result<&mut Self, GateError> {
        for op in other.ops() {
            self.append(op.clone())?;
        }
        Ok(self)
    }

    pub fn h(&mut self, q: usize) -> Result<&mut Self, GateError> {
        self.append(GateOp::gate(GateKind::H, vec![q], None))
    }

    pub fn x(&mut self, q: usize) -> Result<&mut Self, GateError> {
        self.append(GateOp::gate(GateKind::X, vec![q], None))
    }

    pub fn ry(&mut self, theta: f64, q: usize) -> Result<&mut Self, GateError> {
        self.append(GateOp::gate(GateKind::Ry, vec![q], Some(theta)))
    }

    pub fn cx(&mut self, control: usize, target: usize) -> Result<&mut Self, GateError> {
        self.append(GateOp::gate(GateKind::Cx, vec![control, target], None))
    }

    pub fn ccx(&mut self, c1: usize, c2: usize, target: usize) -> Result<&mut Self, GateError> {
        self.append(GateOp::gate(GateKind::Ccx, vec![c1, c2, target], None))
    }

    pub fn cp(&mut self, theta: f64, a: usize, b: usize) -> Result<&mut Self, GateError> {
        self.append(GateOp::gate(GateKind::Cp, vec![a, b], Some(theta)))
    }

    pub fn swap(&mut self, a: usize, b: usize) -> Result<&mut Self, GateError> {
        self.append(GateOp::gate(GateKind::Swap, vec![a, b], None))
    }

    pub fn measure(&mut self, qubit: usize, clbit: usize) -> Result<&mut Self, GateError> {
        self.append(GateOp::measure(qubit, clbit))
    }

    /// The adjoint circuit: ops reversed, each replaced by its adjoint.
    /// Barriers are kept in place; measurements cannot be inverted.
    pub fn inverse(&self) -> Result<Circuit, GateError> {
        if self.ops.iter().any(|op| op.kind == GateKind::Measure) {
            return Err(GateError::MeasureInInverse);
        }
        let mut inv = Circuit::new(self.num_qubits, self.num_clbits);
        for op in self.ops.iter().rev() {
            inv.append(op.adjoint())?;
        }
        Ok(inv)
    }

    /// Structural equality with angles compared to `tol`.
    pub fn approx_eq(&self, other: &Circuit, tol: f64) -> bool {
        self.num_qubits == other.num_qubits
            && self.num_clbits == other.num_clbits
            && self.ops.len() == other.ops.len()
            && self.ops.iter().zip(&other.ops).all(|(a, b)| {
                a.kind == b.kind
                    && a.qubits == b.qubits
                    && a.clbit == b.clbit
                    && match (a.angle, b.angle) {
                        (None, None) => true,
                        (Some(x), Some(y)) => (x - y).abs() <= tol,
                        _ => false,
                    }
            })
    }
}

/// The exact unitary matrix of a gate kind.
///
/// Controlled kinds return the block matrix that acts as the identity when the
/// control is `|0>`; `Ry(theta)` is the real rotation
/// `[[cos t/2, -sin t/2], [sin t/2, cos t/2]]`.
pub fn unitary_of(kind: GateKind, angle: Option<f64>) -> Result<UnitaryMatrix, GateError> {
    match (kind.is_parameterized(), angle) {
        (true, None) => {
            return Err(GateError::AngleMismatch {
                kind,
                reason: "requires",
            })
        }
        (false, Some(_)) => {
            return Err(GateError::AngleMismatch {
                kind,
                reason: "does not take",
            })
        }
        (true, Some(a)) if !a.is_finite() => return Err(GateError::NonFiniteAngle),
        _ => {}
    }

    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let single = |m: [Complex64; 4]| m.to_vec();

    let mat1 = |kind: GateKind| -> Option<Vec<Complex64>> {
        let a = angle.unwrap_or(0.0);
        let half = a / 2.0;
        match kind {
            GateKind::H => {
                let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                Some(single([r, r, r, -r]))
            }
            GateKind::X => Some(single([z, one, one, z])),
            GateKind::Rx => Some(single([
                Complex64::new(half.cos(), 0.0),
                Complex64::new(0.0, -half.sin()),
                Complex64::new(0.0, -half.sin()),
                Complex64::new(half.cos(), 0.0),
            ])),
            GateKind::Ry => Some(single([
                Complex64::new(half.cos(), 0.0),
                Complex64::new(-half.sin(), 0.0),
                Complex64::new(half.sin(), 0.0),
                Complex64::new(half.cos(), 0.0),
            ])),
            GateKind::Rz => Some(single([
                Complex64::from_polar(1.0, -half),
                z,
                z,
                Complex64::from_polar(1.0, half),
            ])),
            GateKind::P => Some(single([one, z, z, Complex64::from_polar(1.0, a)])),
            _ => None,
        }
    };

    let entries: Vec<Complex64> = match kind {
        GateKind::H | GateKind::X | GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::P => {
            mat1(kind).unwrap()
        }
        GateKind::Swap => {
            let mut m = vec![z; 16];
            m[0] = one;
            m[1 * 4 + 2] = one;
            m[2 * 4 + 1] = one;
            m[3 * 4 + 3] = one;
            m
        }
        GateKind::Cx | GateKind::Ch | GateKind::Cry | GateKind::Crz | GateKind::Cp => {
            let base = match kind {
                GateKind::Cx => mat1(GateKind::X).unwrap(),
                GateKind::Ch => mat1(GateKind::H).unwrap(),
                GateKind::Cry => mat1(GateKind::Ry).unwrap(),
                GateKind::Crz => mat1(GateKind::Rz).unwrap(),
                GateKind::Cp => mat1(GateKind::P).unwrap(),
                _ => unreachable!(),
            };
            let mut m = vec![z; 16];
            m[0] = one;
            m[4 + 1] = one;
            for r in 0..2 {
                for c in 0..2 {
                    m[(2 + r) * 4 + (2 + c)] = base[r * 2 + c];
                }
            }
            m
        }
        GateKind::Ccx => {
            let mut m = vec![z; 64];
            for i in 0..6 {
                m[i * 8 + i] = one;
            }
            m[6 * 8 + 7] = one;
            m[7 * 8 + 6] = one;
            m
        }
        GateKind::Barrier | GateKind::Measure => return Err(GateError::NotUnitaryKind(kind)),
    };

    let dim = (entries.len() as f64).sqrt() as usize;
    Ok(UnitaryMatrix::new(dim, entries)?)
}
