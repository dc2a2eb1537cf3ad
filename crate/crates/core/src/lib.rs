//! Edge-change identification in weighted networks from noisy node
//! measurements.
//!
//! A network Laplacian `L0` is known; measurements `(U, F)` of the changed
//! network are noisy. The change `ΔL = L1 - L0` is estimated as a sparse
//! regression on the half-vectorized Laplacian, by LASSO or by a
//! total-least-squares variant that accounts for noise in both `U` and `F`.
//!
//! # Features
//!
//! * `parallel` (default): [`par::Execution::Parallel`] fans independent
//!   runs out over the rayon pool. Without it every run is sequential and
//!   results are identical.

pub mod builtin;
pub mod error;
pub mod graph;
pub mod matpower;
pub mod metrics;
pub mod par;
pub mod simulate;
pub mod solvers;
pub mod vectorize;

pub use error::{Error, Result};
pub use graph::{Edge, EdgeChangeSet, Laplacian, Network, NodePair, SymMatrix};
pub use metrics::{lambda_sweep, Scenario, SolverChoice, SweepConfig, SweepRow};
pub use par::Execution;
pub use simulate::{simulate, MeasurementSet};
pub use solvers::{Estimate, LambdaScale, LassoConfig, SolverKind, TlsConfig};
pub use vectorize::{build_design, DesignMatrix, DesignMode, DesignSystem};
