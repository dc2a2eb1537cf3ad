use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{soft_threshold, Estimate, LambdaScale, SolverKind};
use crate::error::{Error, Result};
use crate::vectorize::DesignSystem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LassoConfig {
    pub lambda: f64,
    /// Dimensionless KKT tolerance, see [`lasso_kkt_violation`].
    pub tol: f64,
    pub max_iters: usize,
    /// Penalize `|β_j|` by the RMS norm of column `j`, which is the same as
    /// fitting on unit-RMS columns and scaling back.
    pub standardize: bool,
    pub scale: LambdaScale,
}

impl Default for LassoConfig {
    fn default() -> Self {
        LassoConfig {
            lambda: 0.0,
            tol: 1e-8,
            max_iters: 100_000,
            standardize: false,
            scale: LambdaScale::Raw,
        }
    }
}

impl LassoConfig {
    pub fn with_lambda(lambda: f64) -> Self {
        LassoConfig {
            lambda,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidArgument(format!("tol must be > 0, got {}", self.tol)));
        }
        Ok(())
    }
}

/// Per-column quantities shared by the solver and the diagnostics.
struct Columns {
    norm_sq: Vec<f64>,
    norm: Vec<f64>,
    /// Raw-scale penalty on `|β_j|` per unit λ.
    weight: Vec<f64>,
}

impl Columns {
    fn new(ds: &DesignSystem, cfg: &LassoConfig) -> Self {
        let nrows = ds.nrows();
        let factor = cfg.scale.factor(nrows);
        let norm_sq: Vec<f64> = (0..ds.ncols()).map(|k| ds.x.col_norm_sq(k)).collect();
        let norm: Vec<f64> = norm_sq.iter().map(|s| s.sqrt()).collect();
        let weight = norm
            .iter()
            .map(|&nk| {
                if cfg.standardize {
                    factor * nk / (nrows as f64).sqrt()
                } else {
                    factor
                }
            })
            .collect();
        Columns { norm_sq, norm, weight }
    }
}

/// Smallest λ (in `cfg`'s convention) for which `β̂ = 0`. With the raw
/// convention this is `‖Xᵀ(y − Xβ₀)‖_∞`.
pub fn lambda_max(ds: &DesignSystem, cfg: &LassoConfig) -> f64 {
    let cols = Columns::new(ds, cfg);
    let r = ds.base_residual();
    (0..ds.ncols())
        .filter(|&k| cols.norm_sq[k] > 0.0)
        .map(|k| ds.x.col_dot(k, r.as_slice()).abs() / cols.weight[k])
        .fold(0.0, f64::max)
}

pub fn lasso_objective(ds: &DesignSystem, cfg: &LassoConfig, beta: &DVector<f64>) -> f64 {
    let cols = Columns::new(ds, cfg);
    let res = ds.base_residual() - ds.x.matvec(beta.as_slice());
    0.5 * res.norm_squared()
        + cfg.lambda
            * beta
                .iter()
                .zip(&cols.weight)
                .map(|(b, w)| w * b.abs())
                .sum::<f64>()
}

/// Largest KKT violation of `beta`, divided by `‖x_j‖ · max(1, ‖y − Xβ₀‖)`.
///
/// For `β_j ≠ 0` the violation is `|x_jᵀ res − λ_j sign β_j|`, otherwise
/// `max(0, |x_jᵀ res| − λ_j)`. Zero columns never violate.
pub fn lasso_kkt_violation(ds: &DesignSystem, cfg: &LassoConfig, beta: &DVector<f64>) -> f64 {
    let cols = Columns::new(ds, cfg);
    let r0 = ds.base_residual();
    let res = &r0 - ds.x.matvec(beta.as_slice());
    kkt_violation(ds, cfg, &cols, beta.as_slice(), res.as_slice(), r0.norm().max(1.0))
}

fn kkt_violation(ds: &DesignSystem, cfg: &LassoConfig, cols: &Columns, beta: &[f64], res: &[f64], scale: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for (k, &b) in beta.iter().enumerate() {
        if cols.norm_sq[k] == 0.0 {
            continue;
        }
        let g = ds.x.col_dot(k, res);
        let pen = cfg.lambda * cols.weight[k];
        let v = if b != 0.0 {
            (g - pen * b.signum()).abs()
        } else {
            (g.abs() - pen).max(0.0)
        };
        worst = worst.max(v / (cols.norm[k] * scale));
    }
    worst
}

/// Cyclic coordinate descent for `½‖r − Xβ‖² + λ Σ w_j |β_j|` with
/// `r = y − Xβ₀`, started from zero.
pub fn lasso(ds: &DesignSystem, cfg: &LassoConfig) -> Result<Estimate> {
    lasso_from(ds, cfg, None)
}

/// [`lasso`] from a warm start.
pub fn lasso_from(ds: &DesignSystem, cfg: &LassoConfig, init: Option<&DVector<f64>>) -> Result<Estimate> {
    cfg.validate()?;
    let p = ds.ncols();
    if let Some(b) = init {
        if b.len() != p {
            return Err(Error::dim("warm start", p, b.len()));
        }
    }
    let cols = Columns::new(ds, cfg);
    if cols.norm_sq.iter().all(|&s| s == 0.0) {
        return Err(Error::InvalidArgument("design matrix is identically zero".into()));
    }
    let pen: Vec<f64> = cols.weight.iter().map(|w| cfg.lambda * w).collect();
    let r0 = ds.base_residual();
    let scale = r0.norm().max(1.0);
    let step_tol = cfg.tol * scale;

    let mut beta: Vec<f64> = match init {
        Some(b) => b.iter().zip(&cols.norm_sq).map(|(&v, &s)| if s == 0.0 { 0.0 } else { v }).collect(),
        None => vec![0.0; p],
    };
    let mut res: Vec<f64> = (&r0 - ds.x.matvec(&beta)).as_slice().to_vec();

    let objective = |beta: &[f64], res: &[f64]| -> f64 {
        0.5 * res.iter().map(|r| r * r).sum::<f64>() + beta.iter().zip(&pen).map(|(b, w)| w * b.abs()).sum::<f64>()
    };

    let mut trace = vec![objective(&beta, &res)];
    let mut iterations = 0;
    let mut converged = false;
    let all: Vec<usize> = (0..p).filter(|&k| cols.norm_sq[k] > 0.0).collect();

    // One sweep over `set`; returns the largest change in fitted values.
    let sweep = |set: &[usize], beta: &mut [f64], res: &mut [f64]| -> f64 {
        let mut biggest: f64 = 0.0;
        for &k in set {
            let old = beta[k];
            let g = ds.x.col_dot(k, res) + cols.norm_sq[k] * old;
            let new = soft_threshold(g, pen[k]) / cols.norm_sq[k];
            let delta = new - old;
            if delta != 0.0 {
                ds.x.col_axpy(k, -delta, res);
                beta[k] = new;
                biggest = biggest.max(delta.abs() * cols.norm[k]);
            }
        }
        biggest
    };

    'outer: while iterations < cfg.max_iters {
        let change = sweep(&all, &mut beta, &mut res);
        iterations += 1;
        trace.push(objective(&beta, &res));
        if change <= step_tol {
            // Refresh the residual so accumulated rounding cannot mask a
            // violation.
            res = (&r0 - ds.x.matvec(&beta)).as_slice().to_vec();
            if kkt_violation(ds, cfg, &cols, &beta, &res, scale) <= cfg.tol {
                converged = true;
                break;
            }
        }
        loop {
            if iterations >= cfg.max_iters {
                break 'outer;
            }
            let active: Vec<usize> = all.iter().copied().filter(|&k| beta[k] != 0.0).collect();
            if active.is_empty() {
                break;
            }
            let change = sweep(&active, &mut beta, &mut res);
            iterations += 1;
            trace.push(objective(&beta, &res));
            if change <= step_tol {
                break;
            }
        }
    }

    Ok(Estimate {
        solver: SolverKind::Lasso,
        lambda: cfg.lambda,
        beta: DVector::from_vec(beta),
        objective_trace: trace,
        iterations,
        converged,
    })
}

/// Solves for every λ in `lambdas`, largest first, warm-starting each solve
/// from the previous one. Results come back in input order.
pub fn lasso_path(ds: &DesignSystem, cfg: &LassoConfig, lambdas: &[f64]) -> Result<Vec<Estimate>> {
    let mut order: Vec<usize> = (0..lambdas.len()).collect();
    order.sort_by(|&a, &b| lambdas[b].total_cmp(&lambdas[a]));
    let mut out: Vec<Option<Estimate>> = vec![None; lambdas.len()];
    let mut warm: Option<DVector<f64>> = None;
    for idx in order {
        let c = LassoConfig {
            lambda: lambdas[idx],
            ..*cfg
        };
        let est = lasso_from(ds, &c, warm.as_ref())?;
        warm = Some(est.beta.clone());
        out[idx] = Some(est);
    }
    Ok(out.into_iter().map(|e| e.expect("every lambda solved")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, EdgeChangeSet, Network, NodePair};
    use crate::simulate::simulate;
    use crate::vectorize::{build_design, build_design_with, support_reduce, vech_sym, DesignMode};

    fn scenario(noise: f64, seed: u64) -> (DesignSystem, DVector<f64>, Network) {
        let net = Network::new(
            6,
            vec![
                Edge::new(0, 1, 1.0),
                Edge::new(1, 2, 2.0),
                Edge::new(2, 3, 1.5),
                Edge::new(3, 4, 1.0),
                Edge::new(4, 5, 0.7),
                Edge::new(5, 0, 1.2),
                Edge::new(0, 3, 0.9),
            ],
        )
        .unwrap();
        let changes = EdgeChangeSet::removals([NodePair::new(1, 2), NodePair::new(0, 3)]);
        let (_, l1, delta) = net.apply_changes(&changes).unwrap();
        let ms = simulate(&l1, 12, noise, seed).unwrap();
        let ds = build_design(&ms, &net.laplacian()).unwrap();
        (ds, vech_sym(&delta), net)
    }

    /// Least squares on the true support via SVD, independent of the solver.
    fn support_least_squares(ds: &DesignSystem, truth: &DVector<f64>) -> DVector<f64> {
        let support: Vec<usize> = (0..truth.len()).filter(|&k| truth[k] != 0.0).collect();
        let x = ds.x.to_dense().select_columns(&support);
        let r = ds.base_residual();
        let sol = x.svd(true, true).solve(&r, 1e-14).unwrap();
        let mut full = DVector::zeros(truth.len());
        for (k, &s) in support.iter().enumerate() {
            full[s] = sol[k];
        }
        full
    }

    #[test]
    fn large_lambda_gives_zero() {
        let (ds, _, _) = scenario(0.1, 1);
        let cfg = LassoConfig::default();
        let lmax = lambda_max(&ds, &cfg);
        let direct = ds.x.rmatvec(ds.base_residual().as_slice()).amax();
        assert!((lmax - direct).abs() <= 1e-12 * direct);
        let est = lasso(&ds, &LassoConfig::with_lambda(lmax)).unwrap();
        assert!(est.converged);
        assert!(est.beta.iter().all(|&b| b == 0.0));
        let est = lasso(&ds, &LassoConfig::with_lambda(0.9 * lmax)).unwrap();
        assert!(est.beta.iter().any(|&b| b != 0.0));
    }

    #[test]
    fn noiseless_recovery_matches_support_oracle() {
        for seed in 0..5 {
            let (ds, truth, _) = scenario(0.0, seed);
            let oracle = support_least_squares(&ds, &truth);
            assert!((&oracle - &truth).amax() < 1e-9);
            let est = lasso(&ds, &LassoConfig::with_lambda(1e-8)).unwrap();
            assert!(est.converged);
            assert!((&est.beta - &truth).amax() < 1e-4);
            let eps = 1e-6 * est.beta.amax().max(1.0);
            for k in 0..truth.len() {
                assert_eq!(est.beta[k].abs() > eps, truth[k] != 0.0, "coordinate {k}");
            }
        }
    }

    #[test]
    fn kkt_holds_at_exit() {
        let (ds, _, _) = scenario(0.1, 2);
        for lambda in [0.01, 0.5, 3.0, 20.0] {
            for standardize in [false, true] {
                let cfg = LassoConfig {
                    lambda,
                    standardize,
                    ..Default::default()
                };
                let est = lasso(&ds, &cfg).unwrap();
                assert!(est.converged, "lambda {lambda}");
                assert!(lasso_kkt_violation(&ds, &cfg, &est.beta) <= cfg.tol);
            }
        }
    }

    #[test]
    fn trace_is_non_increasing() {
        let (ds, _, _) = scenario(0.1, 3);
        let est = lasso(&ds, &LassoConfig::with_lambda(0.3)).unwrap();
        for w in est.objective_trace.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-12);
        }
        let obj = lasso_objective(&ds, &LassoConfig::with_lambda(0.3), &est.beta);
        assert!((obj - est.objective()).abs() < 1e-8 * obj.max(1.0));
    }

    #[test]
    fn l1_norm_shrinks_with_lambda() {
        let (ds, _, _) = scenario(0.1, 4);
        let grid = [0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 30.0];
        let norms: Vec<f64> = grid
            .iter()
            .map(|&l| lasso(&ds, &LassoConfig::with_lambda(l)).unwrap().beta.lp_norm(1))
            .collect();
        for w in norms.windows(2) {
            assert!(w[0] + 1e-6 >= w[1], "{norms:?}");
        }
    }

    #[test]
    fn zero_columns_stay_zero() {
        let (ds, _, _) = scenario(0.1, 5);
        let keep: Vec<usize> = (0..ds.ncols()).filter(|k| k % 3 != 0).collect();
        let masked = ds.with_columns_zeroed_except(&keep);
        let est = lasso(&masked, &LassoConfig::with_lambda(0.01)).unwrap();
        for k in (0..ds.ncols()).filter(|k| k % 3 == 0) {
            assert_eq!(est.beta[k], 0.0);
        }
    }

    #[test]
    fn standardized_fit_matches_explicit_rescaling() {
        let (ds, _, _) = scenario(0.1, 6);
        let n = ds.nrows() as f64;
        let cfg = LassoConfig {
            lambda: 0.05,
            standardize: true,
            scale: LambdaScale::PerSample,
            tol: 1e-12,
            ..Default::default()
        };
        let est = lasso(&ds, &cfg).unwrap();

        // Fit on unit-RMS columns with the per-sample loss, then unscale.
        let x = ds.x.to_dense();
        let scales: Vec<f64> = (0..x.ncols()).map(|k| x.column(k).norm() / n.sqrt()).collect();
        let mut xs = x.clone();
        for (k, s) in scales.iter().enumerate() {
            xs.column_mut(k).scale_mut(1.0 / s);
        }
        let mut scaled = ds.clone();
        scaled.x = crate::vectorize::DesignMatrix::Dense(xs);
        scaled.beta0 = DVector::zeros(ds.ncols());
        scaled.y = ds.base_residual();
        let plain = lasso(
            &scaled,
            &LassoConfig {
                lambda: 0.05 * n,
                tol: 1e-12,
                ..Default::default()
            },
        )
        .unwrap();
        let back = DVector::from_iterator(x.ncols(), plain.beta.iter().zip(&scales).map(|(g, s)| g / s));
        assert!((back - &est.beta).amax() < 1e-8);
    }

    #[test]
    fn non_convergence_is_reported() {
        let (ds, _, _) = scenario(0.1, 7);
        let est = lasso(
            &ds,
            &LassoConfig {
                lambda: 0.01,
                max_iters: 1,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(!est.converged);
        assert_eq!(est.iterations, 1);
    }

    #[test]
    fn rejects_bad_config_and_zero_design() {
        let (ds, _, _) = scenario(0.1, 8);
        assert!(lasso(&ds, &LassoConfig::with_lambda(-1.0)).is_err());
        let zero = ds.with_columns_zeroed_except(&[]);
        assert!(lasso(&zero, &LassoConfig::with_lambda(1.0)).is_err());
    }

    #[test]
    fn path_matches_cold_starts() {
        let (ds, _, _) = scenario(0.1, 9);
        let grid = [0.1, 1.0, 0.5, 5.0];
        let path = lasso_path(&ds, &LassoConfig::default(), &grid).unwrap();
        for (l, est) in grid.iter().zip(&path) {
            assert_eq!(est.lambda, *l);
            let cold = lasso(&ds, &LassoConfig::with_lambda(*l)).unwrap();
            assert!((&cold.beta - &est.beta).amax() < 1e-6);
        }
    }

    #[test]
    fn dense_and_operator_designs_agree() {
        let (_, _, net) = scenario(0.1, 10);
        let changes = EdgeChangeSet::removals([NodePair::new(4, 5)]);
        let (_, l1, _) = net.apply_changes(&changes).unwrap();
        let ms = simulate(&l1, 10, 0.1, 10).unwrap();
        let l0 = net.laplacian();
        let cfg = LassoConfig {
            lambda: 0.2,
            tol: 1e-12,
            ..Default::default()
        };
        let a = lasso(&build_design_with(&ms, &l0, DesignMode::Dense).unwrap(), &cfg).unwrap();
        let b = lasso(&build_design_with(&ms, &l0, DesignMode::Operator).unwrap(), &cfg).unwrap();
        assert!((a.beta - b.beta).amax() < 1e-9);
    }

    #[test]
    fn reduced_equals_masked_full() {
        let (ds, _, net) = scenario(0.1, 11);
        let l0 = net.laplacian();
        let red = support_reduce(&ds, &l0).unwrap();
        let masked = ds.with_columns_zeroed_except(red.support().unwrap());
        let cfg = LassoConfig {
            lambda: 0.4,
            tol: 1e-12,
            ..Default::default()
        };
        let a = red.expand(&lasso(&red, &cfg).unwrap().beta);
        let b = lasso(&masked, &cfg).unwrap().beta;
        assert!((a - b).amax() < 1e-8);
    }
}
