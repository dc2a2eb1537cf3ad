//! Sparse total least squares through its one-variable reformulation.
//!
//! For fixed `β`, the smallest errors `[ΔX Δy]` that make
//! `y + Δy = (X + ΔX)(β₀ + β)` hold are rank one, and their squared norm is
//! `‖X b − y‖² / (1 + ‖b‖²)` with `b = β₀ + β`. Minimizing that plus
//! `λ‖β‖₁` is non-convex; the proximal-gradient loop here only guarantees
//! monotone descent.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{lasso_from, soft_threshold, Estimate, LambdaScale, LassoConfig, SolverKind};
use crate::error::{Error, Result};
use crate::vectorize::DesignSystem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepRule {
    Fixed(f64),
    /// Start from `initial`, multiply by `shrink` until sufficient decrease.
    Backtracking { initial: f64, shrink: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum TlsInit {
    Zero,
    /// Start from the LASSO estimate with this configuration.
    Lasso(LassoConfig),
    Given(DVector<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TlsConfig {
    pub lambda: f64,
    pub step: StepRule,
    pub init: TlsInit,
    /// Stop once `‖β⁺ − β‖₂` falls to this value.
    pub tol: f64,
    pub max_iters: usize,
    pub scale: LambdaScale,
}

impl Default for TlsConfig {
    fn default() -> Self {
        TlsConfig {
            lambda: 0.0,
            step: StepRule::Backtracking {
                initial: 1.0,
                shrink: 0.5,
            },
            init: TlsInit::Zero,
            tol: 1e-6,
            max_iters: 10_000,
            scale: LambdaScale::Raw,
        }
    }
}

impl TlsConfig {
    fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidArgument("tol must be > 0".into()));
        }
        match self.step {
            StepRule::Fixed(s) if s.is_nan() || s <= 0.0 => Err(Error::InvalidArgument("step must be > 0".into())),
            StepRule::Backtracking { initial, shrink } if !(initial > 0.0 && shrink > 0.0 && shrink < 1.0) => Err(
                Error::InvalidArgument("backtracking needs initial > 0 and shrink in (0, 1)".into()),
            ),
            _ => Ok(()),
        }
    }
}

fn check_len(ds: &DesignSystem, beta: &DVector<f64>) -> Result<()> {
    if beta.len() != ds.ncols() {
        return Err(Error::dim("coefficient vector", ds.ncols(), beta.len()));
    }
    Ok(())
}

/// `‖X(β₀+β) − y‖² / (1 + ‖β₀+β‖²)`.
pub fn tls_smooth_term(beta: &DVector<f64>, ds: &DesignSystem) -> Result<f64> {
    check_len(ds, beta)?;
    let b = &ds.beta0 + beta;
    let r = ds.x.matvec(b.as_slice()) - &ds.y;
    Ok(r.norm_squared() / (1.0 + b.norm_squared()))
}

pub fn tls_objective(beta: &DVector<f64>, ds: &DesignSystem, lambda: f64) -> Result<f64> {
    Ok(tls_smooth_term(beta, ds)? + lambda * beta.lp_norm(1))
}

/// Gradient of the smooth term: `2Xᵀr/d − 2‖r‖² b/d²` with `r = Xb − y`,
/// `d = 1 + ‖b‖²`.
pub fn tls_smooth_gradient(beta: &DVector<f64>, ds: &DesignSystem) -> Result<DVector<f64>> {
    check_len(ds, beta)?;
    Ok(smooth_and_gradient(beta, ds).1)
}

fn smooth_and_gradient(beta: &DVector<f64>, ds: &DesignSystem) -> (f64, DVector<f64>) {
    let b = &ds.beta0 + beta;
    let r = ds.x.matvec(b.as_slice()) - &ds.y;
    let d = 1.0 + b.norm_squared();
    let rr = r.norm_squared();
    let g = ds.x.rmatvec(r.as_slice()) * (2.0 / d) - b * (2.0 * rr / (d * d));
    (rr / d, g)
}

/// Closed-form least-norm data errors for a fixed `β`.
///
/// With `b = β₀ + β`, `res = y − X b` and `d = 1 + ‖b‖²`, the solution of
/// `min ‖v‖` subject to `res = G(β) v`, `G(β) = [bᵀ, −1] ⊗ I`, is
/// `v = Gᵀ res / d`: `ΔX = res bᵀ / d` and `Δy = −res / d`.
#[derive(Debug, Clone)]
pub struct LeastNormErrors {
    pub residual: DVector<f64>,
    pub b: DVector<f64>,
    pub denom: f64,
}

impl LeastNormErrors {
    pub fn delta_x(&self) -> DMatrix<f64> {
        &self.residual * self.b.transpose() / self.denom
    }

    pub fn delta_y(&self) -> DVector<f64> {
        -&self.residual / self.denom
    }

    /// `Vec([ΔX Δy])`.
    pub fn v(&self) -> DVector<f64> {
        let n = self.residual.len();
        let p = self.b.len();
        let mut v = DVector::zeros(n * (p + 1));
        for k in 0..p {
            v.rows_mut(k * n, n).copy_from(&(&self.residual * (self.b[k] / self.denom)));
        }
        v.rows_mut(p * n, n).copy_from(&self.delta_y());
        v
    }

    /// `‖v‖²` without materializing `v`.
    pub fn v_norm_sq(&self) -> f64 {
        self.residual.norm_squared() * (1.0 + self.b.norm_squared()) / (self.denom * self.denom)
    }

    /// Dense `G(β)`, for verification on small problems.
    pub fn g_matrix(&self) -> DMatrix<f64> {
        let n = self.residual.len();
        let row = self.b.transpose().insert_column(self.b.len(), -1.0);
        row.kronecker(&DMatrix::<f64>::identity(n, n))
    }
}

pub fn least_norm_errors(beta: &DVector<f64>, ds: &DesignSystem) -> Result<LeastNormErrors> {
    check_len(ds, beta)?;
    let b = &ds.beta0 + beta;
    let residual = &ds.y - ds.x.matvec(b.as_slice());
    let denom = 1.0 + b.norm_squared();
    Ok(LeastNormErrors { residual, b, denom })
}

/// Proximal gradient (ISTA) on the reformulated objective.
pub fn tls_proximal_gradient(ds: &DesignSystem, cfg: &TlsConfig) -> Result<Estimate> {
    cfg.validate()?;
    let p = ds.ncols();
    let lambda = cfg.lambda * cfg.scale.factor(ds.nrows());
    let mut beta = match &cfg.init {
        TlsInit::Zero => DVector::zeros(p),
        TlsInit::Lasso(lc) => lasso_from(ds, lc, None)?.beta,
        TlsInit::Given(b) => {
            check_len(ds, b)?;
            b.clone()
        }
    };
    let penalty = |b: &DVector<f64>| lambda * b.lp_norm(1);

    let (mut f, mut grad) = smooth_and_gradient(&beta, ds);
    let mut trace = vec![f + penalty(&beta)];
    let (mut step, shrink, max_step) = match cfg.step {
        StepRule::Fixed(s) => (s, None, s),
        StepRule::Backtracking { initial, shrink } => (initial, Some(shrink), initial),
    };
    let mut iterations = 0;
    let mut converged = false;

    'outer: while iterations < cfg.max_iters {
        iterations += 1;
        let (candidate, diff, f_new) = loop {
            let candidate = (&beta - &grad * step).map(|z| soft_threshold(z, step * lambda));
            let diff = &candidate - &beta;
            let b_new = &ds.beta0 + &candidate;
            let r_new = ds.x.matvec(b_new.as_slice()) - &ds.y;
            let f_new = r_new.norm_squared() / (1.0 + b_new.norm_squared());
            let Some(shrink) = shrink else {
                break (candidate, diff, f_new);
            };
            let model = f + grad.dot(&diff) + diff.norm_squared() / (2.0 * step);
            if f_new <= model + 1e-12 * f.abs().max(1.0) {
                break (candidate, diff, f_new);
            }
            step *= shrink;
            if step < 1e-300 {
                break 'outer;
            }
        };
        beta = candidate;
        let step_norm = diff.norm();
        if step_norm <= cfg.tol {
            trace.push(f_new + penalty(&beta));
            converged = true;
            break;
        }
        let (f_next, g_next) = smooth_and_gradient(&beta, ds);
        f = f_next;
        grad = g_next;
        trace.push(f + penalty(&beta));
        if let Some(shrink) = shrink {
            step = (step / shrink).min(max_step);
        }
    }

    Ok(Estimate {
        solver: SolverKind::Tls,
        lambda: cfg.lambda,
        beta,
        objective_trace: trace,
        iterations,
        converged,
    })
}
