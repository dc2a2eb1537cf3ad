//! Sparse estimators for the change vector `β = Vech(ΔL)`.

mod lasso;
mod tls;

pub use lasso::{lambda_max, lasso, lasso_from, lasso_kkt_violation, lasso_objective, lasso_path, LassoConfig};
pub use tls::{
    least_norm_errors, tls_objective, tls_proximal_gradient, tls_smooth_gradient, tls_smooth_term, LeastNormErrors,
    StepRule, TlsConfig, TlsInit,
};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::vectorize::DesignSystem;

/// `sign(z) · max(|z| − t, 0)`, the proximal map of `t·|·|`.
#[inline]
pub fn soft_threshold(z: f64, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// How the user-facing λ maps onto the implemented objective.
///
/// `Raw` is `½‖r − Xβ‖² + λ‖β‖₁` exactly. `PerSample` divides the loss by the
/// number of rows `N`, i.e. `(1/2N)‖r − Xβ‖² + λ‖β‖₁`, the convention of
/// common statistics packages; internally that is `λ·N` on the raw scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaScale {
    #[default]
    Raw,
    PerSample,
}

impl LambdaScale {
    pub fn factor(self, nrows: usize) -> f64 {
        match self {
            LambdaScale::Raw => 1.0,
            LambdaScale::PerSample => nrows as f64,
        }
    }

    pub fn describe(self, standardize: bool) -> String {
        let loss = match self {
            LambdaScale::Raw => "0.5*||r - X b||^2",
            LambdaScale::PerSample => "(1/(2N))*||r - X b||^2",
        };
        if standardize {
            format!("{loss} + lambda*sum_j (||x_j||/sqrt(N))*|b_j|")
        } else {
            format!("{loss} + lambda*||b||_1")
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Lasso,
    Tls,
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolverKind::Lasso => "lasso",
            SolverKind::Tls => "tls",
        })
    }
}

/// Solver output. `beta` lives in the design's column space; use
/// [`DesignSystem::expand`] for the full Vech vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub solver: SolverKind,
    pub lambda: f64,
    pub beta: DVector<f64>,
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl Estimate {
    pub fn objective(&self) -> f64 {
        self.objective_trace.last().copied().unwrap_or(f64::NAN)
    }

    pub fn report(&self, ds: &DesignSystem) -> EstimateReport {
        let beta = self
            .beta
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(k, &value)| {
                let (i, j) = ds.column_pair(k);
                SparseEntry {
                    index: ds.vech_index(k),
                    row: i + 1,
                    col: j + 1,
                    value,
                }
            })
            .collect();
        EstimateReport {
            solver: self.solver,
            lambda: self.lambda,
            iterations: self.iterations,
            converged: self.converged,
            objective: self.objective(),
            beta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseEntry {
    /// 0-based Vech position.
    pub index: usize,
    /// 1-based node pair, `row ≥ col`.
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

/// JSON form of an [`Estimate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub solver: SolverKind,
    pub lambda: f64,
    pub iterations: usize,
    pub converged: bool,
    pub objective: f64,
    pub beta: Vec<SparseEntry>,
}
