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

//! Quantum-circuit toolkit for the optimized 1D Poisson solver.
//!
//! The crate provides exact statevector and density-matrix simulation of the
//! solver circuits, the four standard Kraus noise channels, a parser and
//! serializer for the circuit-listing assembly dialect, circuit builders for
//! every stage of the solver, and the noise-sweep harness that measures how
//! gate errors distort the solution distribution.
//!
//! ```
//! use qpoisson::poisson::{PoissonInstance, solve_ideal};
//!
//! let result = solve_ideal(&PoissonInstance::builtin(2).unwrap()).unwrap();
//! assert!((result.post_selected_probs[&2] - 0.304).abs() < 5e-3);
//! ```

pub mod analysis;
pub mod gates;
pub mod noise;
pub mod poisson;
pub mod qasm;
pub mod sim;
pub mod state;

/// Circuit listing for the 5-point demonstration solver (5 qubits).
pub const SOLVER_N2_QASM: &str = include_str!("../assets/solver_n2.qasm");

/// Circuit listing for the 9-point demonstration solver (9 qubits).
pub const SOLVER_N3_QASM: &str = include_str!("../assets/solver_n3.qasm");

/// Look up a bundled circuit listing by short name (`n2`, `n3`).
pub fn builtin_listing(name: &str) -> Option<&'static str> {
    match name {
        "n2" | "appendix-n2" | "solver-n2" => Some(SOLVER_N2_QASM),
        "n3" | "appendix-n3" | "solver-n3" => Some(SOLVER_N3_QASM),
        _ => None,
    }
}
