//! Support-recovery scoring and λ sweeps averaged over noise realizations.
//!
//! Counts are proportions over all coordinates of `β`, so
//! `tp + tn + fp + fn = 1`. A false positive is a spurious nonzero in `β̂`
//! and a false negative a missed true nonzero.

use std::io::Write;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeChangeSet, Laplacian, Network};
use crate::par::{map_indexed, Execution};
use crate::simulate::simulate;
use crate::solvers::{lasso_path, tls_proximal_gradient, Estimate, LambdaScale, LassoConfig, SolverKind, TlsConfig, TlsInit};
use crate::vectorize::{build_design_with, support_reduce, vech_sym, DesignMode, DesignSystem};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: f64,
    pub tn: f64,
    pub fp: f64,
    #[serde(rename = "fn")]
    pub fn_: f64,
}

impl ConfusionCounts {
    pub fn accuracy(&self) -> f64 {
        accuracy(self)
    }

    /// Share of true nonzeros that were found; 1 when there are none.
    pub fn tpr(&self) -> f64 {
        let pos = self.tp + self.fn_;
        if pos == 0.0 {
            1.0
        } else {
            self.tp / pos
        }
    }

    /// Share of true zeros left at zero; 1 when there are none.
    pub fn tnr(&self) -> f64 {
        let neg = self.tn + self.fp;
        if neg == 0.0 {
            1.0
        } else {
            self.tn / neg
        }
    }
}

pub fn accuracy(c: &ConfusionCounts) -> f64 {
    let total = c.tp + c.tn + c.fp + c.fn_;
    if total == 0.0 {
        return 0.0;
    }
    (c.tp + c.tn) / total
}

/// `1e-6 · max(1, ‖β̂‖_∞)`.
pub fn zero_threshold(beta_hat: &DVector<f64>) -> f64 {
    1e-6 * beta_hat.amax().max(1.0)
}

pub fn classify_support(beta_hat: &DVector<f64>, beta_true: &DVector<f64>, eps: f64) -> Result<ConfusionCounts> {
    if beta_hat.len() != beta_true.len() {
        return Err(Error::dim("estimate length", beta_true.len(), beta_hat.len()));
    }
    let len = beta_true.len();
    if len == 0 {
        return Ok(ConfusionCounts::default());
    }
    let (mut tp, mut tn, mut fp, mut fn_) = (0usize, 0usize, 0usize, 0usize);
    for (h, t) in beta_hat.iter().zip(beta_true.iter()) {
        match (h.abs() > eps, *t != 0.0) {
            (true, true) => tp += 1,
            (false, false) => tn += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
        }
    }
    let total = len as f64;
    Ok(ConfusionCounts {
        tp: tp as f64 / total,
        tn: tn as f64 / total,
        fp: fp as f64 / total,
        fn_: fn_ as f64 / total,
    })
}

/// A fixed network change and measurement protocol; noise varies by seed.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub network: Network,
    pub changes: EdgeChangeSet,
    pub horizon: usize,
    pub noise_variance: f64,
    /// Estimate over the reference support only (removal scenarios).
    pub reduced: bool,
    pub design_mode: DesignMode,
}

/// Ground truth derived from a [`Scenario`].
#[derive(Debug, Clone)]
pub struct Truth {
    pub l0: Laplacian,
    pub l1: Laplacian,
    /// Full-length `Vech(ΔL)`.
    pub beta: DVector<f64>,
}

impl Scenario {
    pub fn truth(&self) -> Result<Truth> {
        let (_, l1, delta) = self.network.apply_changes(&self.changes)?;
        Ok(Truth {
            l0: self.network.laplacian(),
            l1,
            beta: vech_sym(&delta),
        })
    }

    /// Simulates one noise realization and assembles its design system.
    pub fn design(&self, truth: &Truth, seed: u64) -> Result<DesignSystem> {
        let ms = simulate(&truth.l1, self.horizon, self.noise_variance, seed)?;
        let ds = build_design_with(&ms, &truth.l0, self.design_mode)?;
        if self.reduced {
            support_reduce(&ds, &truth.l0)
        } else {
            Ok(ds)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolverChoice {
    Lasso(LassoConfig),
    Tls(TlsConfig),
}

impl SolverChoice {
    pub fn kind(&self) -> SolverKind {
        match self {
            SolverChoice::Lasso(_) => SolverKind::Lasso,
            SolverChoice::Tls(_) => SolverKind::Tls,
        }
    }

    pub fn scale(&self) -> LambdaScale {
        match self {
            SolverChoice::Lasso(c) => c.scale,
            SolverChoice::Tls(c) => c.scale,
        }
    }

    /// Estimates for every λ, in `lambdas` order.
    pub fn solve_all(&self, ds: &DesignSystem, lambdas: &[f64]) -> Result<Vec<Estimate>> {
        match self {
            SolverChoice::Lasso(cfg) => lasso_path(ds, cfg, lambdas),
            SolverChoice::Tls(cfg) => lambdas
                .iter()
                .map(|&lambda| {
                    let mut cfg = TlsConfig { lambda, ..cfg.clone() };
                    // A LASSO warm start follows the same λ.
                    if let TlsInit::Lasso(lc) = &mut cfg.init {
                        lc.lambda = lambda;
                    }
                    tls_proximal_gradient(ds, &cfg)
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub lambdas: Vec<f64>,
    pub runs: usize,
    pub seed0: u64,
    pub solver: SolverChoice,
    pub execution: Execution,
}

/// Mean scores over runs at one λ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub tp: f64,
    pub tn: f64,
    pub fp: f64,
    #[serde(rename = "fn")]
    pub fn_: f64,
    pub acc: f64,
    pub tpr: f64,
    pub tnr: f64,
    pub acc_std: f64,
    pub runs: usize,
    pub nonconverged: usize,
    pub solver: SolverKind,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    counts: ConfusionCounts,
    converged: bool,
}

pub fn lambda_sweep(scenario: &Scenario, cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    if cfg.lambdas.is_empty() {
        return Err(Error::InvalidArgument("lambda grid is empty".into()));
    }
    if cfg.runs == 0 {
        return Err(Error::InvalidArgument("runs must be at least 1".into()));
    }
    let mut lambdas = cfg.lambdas.clone();
    lambdas.sort_by(f64::total_cmp);
    let truth = scenario.truth()?;
    let seeds: Vec<u64> = (0..cfg.runs as u64).map(|r| cfg.seed0.wrapping_add(r)).collect();

    let cells: Vec<Vec<Cell>> = map_indexed(cfg.runs, cfg.execution, |run| {
        let seed = seeds[run];
        let ds = scenario.design(&truth, seed)?;
        let beta_true = ds.restrict(&truth.beta);
        let estimates = cfg.solver.solve_all(&ds, &lambdas)?;
        let row = estimates
            .iter()
            .map(|est| {
                if !est.converged {
                    log::warn!("seed {seed} lambda {}: solver did not converge", est.lambda);
                }
                let counts = classify_support(&est.beta, &beta_true, zero_threshold(&est.beta))?;
                Ok(Cell {
                    counts,
                    converged: est.converged,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        log::info!("run {}/{} (seed {seed}) done", run + 1, cfg.runs);
        Ok::<_, Error>(row)
    })?;

    let runs = cfg.runs as f64;
    Ok(lambdas
        .iter()
        .enumerate()
        .map(|(li, &lambda)| {
            let column: Vec<Cell> = cells.iter().map(|r| r[li]).collect();
            let mean = |f: &dyn Fn(&Cell) -> f64| column.iter().map(f).sum::<f64>() / runs;
            let acc = mean(&|c| c.counts.accuracy());
            let acc_var = column
                .iter()
                .map(|c| (c.counts.accuracy() - acc).powi(2))
                .sum::<f64>()
                / (runs - 1.0).max(1.0);
            SweepRow {
                lambda,
                tp: mean(&|c| c.counts.tp),
                tn: mean(&|c| c.counts.tn),
                fp: mean(&|c| c.counts.fp),
                fn_: mean(&|c| c.counts.fn_),
                acc,
                tpr: mean(&|c| c.counts.tpr()),
                tnr: mean(&|c| c.counts.tnr()),
                acc_std: acc_var.sqrt(),
                runs: cfg.runs,
                nonconverged: column.iter().filter(|c| !c.converged).count(),
                solver: cfg.solver.kind(),
                seeds: seeds.clone(),
            }
        })
        .collect())
}

/// Maximal runs of consecutive rows satisfying `keep`, as `(λ_first, λ_last)`.
pub fn contiguous_regions(rows: &[SweepRow], keep: impl Fn(&SweepRow) -> bool) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut start: Option<f64> = None;
    let mut last = 0.0;
    for r in rows {
        if keep(r) {
            start.get_or_insert(r.lambda);
            last = r.lambda;
        } else if let Some(s) = start.take() {
            out.push((s, last));
        }
    }
    if let Some(s) = start {
        out.push((s, last));
    }
    out
}

/// CSV with header `lambda,tp,tn,fp,fn,acc,runs,solver`.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lambda", "tp", "tn", "fp", "fn", "acc", "runs", "solver"])?;
    for r in rows {
        w.write_record([
            r.lambda.to_string(),
            r.tp.to_string(),
            r.tn.to_string(),
            r.fp.to_string(),
            r.fn_.to_string(),
            r.acc.to_string(),
            r.runs.to_string(),
            r.solver.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
