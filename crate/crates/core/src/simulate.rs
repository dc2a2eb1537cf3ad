//! Equilibrium-consistent measurement generation.
//!
//! Potentials are drawn i.i.d. standard normal and injections are derived as
//! `f = L₁ u`, which keeps the clean data exactly on the equilibrium manifold
//! without inverting the singular Laplacian. Both measurement channels are
//! then corrupted with i.i.d. `N(0, σ²)` errors, subtracted from the truth.
//!
//! Randomness comes from ChaCha8 seeded with the caller's `u64`; draws are
//! taken in the fixed order `U_true`, `ΔU`, `ΔF`, each column-major.

use std::io::Write;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{EdgeChangeSet, Laplacian, Network};

/// Clean and noisy node potentials and injections over a horizon of `T`
/// samples, each stored n×T.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    pub u_true: DMatrix<f64>,
    pub f_true: DMatrix<f64>,
    pub u_noisy: DMatrix<f64>,
    pub f_noisy: DMatrix<f64>,
    pub noise_variance: f64,
    pub seed: u64,
}

impl MeasurementSet {
    pub fn nodes(&self) -> usize {
        self.u_true.nrows()
    }

    pub fn horizon(&self) -> usize {
        self.u_true.ncols()
    }

    /// Errors in the convention `noisy = true − error`.
    pub fn delta_u(&self) -> DMatrix<f64> {
        &self.u_true - &self.u_noisy
    }

    pub fn delta_f(&self) -> DMatrix<f64> {
        &self.f_true - &self.f_noisy
    }

    /// `‖F − L U‖_∞` for either the clean or the noisy pair.
    pub fn equilibrium_residual(&self, l: &Laplacian, noisy: bool) -> f64 {
        let (u, f) = if noisy {
            (&self.u_noisy, &self.f_noisy)
        } else {
            (&self.u_true, &self.f_true)
        };
        let lu = l.to_dense() * u;
        (f - lu).amax()
    }

    /// CSV with header `t,node,u_true,u_noisy,f_true,f_noisy`, 1-based indices.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        #[derive(Serialize)]
        struct Row {
            t: usize,
            node: usize,
            u_true: f64,
            u_noisy: f64,
            f_true: f64,
            f_noisy: f64,
        }
        let mut w = csv::Writer::from_writer(out);
        for t in 0..self.horizon() {
            for i in 0..self.nodes() {
                w.serialize(Row {
                    t: t + 1,
                    node: i + 1,
                    u_true: self.u_true[(i, t)],
                    u_noisy: self.u_noisy[(i, t)],
                    f_true: self.f_true[(i, t)],
                    f_noisy: self.f_noisy[(i, t)],
                })?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

pub fn simulate(l1: &Laplacian, horizon: usize, noise_variance: f64, seed: u64) -> Result<MeasurementSet> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon T must be at least 1".into()));
    }
    if !(noise_variance >= 0.0 && noise_variance.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "noise variance must be finite and non-negative, got {noise_variance}"
        )));
    }
    let n = l1.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u_true = DMatrix::from_fn(n, horizon, |_, _| StandardNormal.sample(&mut rng));
    let f_true = l1.to_dense() * &u_true;

    let (u_noisy, f_noisy) = if noise_variance == 0.0 {
        (u_true.clone(), f_true.clone())
    } else {
        let noise = Normal::new(0.0, noise_variance.sqrt())
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let du = DMatrix::from_fn(n, horizon, |_, _| noise.sample(&mut rng));
        let df = DMatrix::from_fn(n, horizon, |_, _| noise.sample(&mut rng));
        (&u_true - du, &f_true - df)
    };

    Ok(MeasurementSet {
        u_true,
        f_true,
        u_noisy,
        f_noisy,
        noise_variance,
        seed,
    })
}

/// Picks `k` distinct edges uniformly without replacement.
pub fn random_removal_scenario(net: &Network, k: usize, seed: u64) -> Result<EdgeChangeSet> {
    let m = net.edge_count();
    if k > m {
        return Err(Error::InvalidArgument(format!(
            "cannot remove {k} edges from a network with {m}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked = rand::seq::index::sample(&mut rng, m, k);
    Ok(EdgeChangeSet::removals(
        picked.into_iter().map(|i| net.edges()[i].pair()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    fn path(n: usize) -> Network {
        Network::new(n, (1..n).map(|k| Edge::new(k - 1, k, k as f64)).collect()).unwrap()
    }

    #[test]
    fn zero_noise_copies_truth() {
        let l = path(5).laplacian();
        let ms = simulate(&l, 10, 0.0, 1).unwrap();
        assert_eq!(ms.u_noisy, ms.u_true);
        assert_eq!(ms.f_noisy, ms.f_true);
    }

    #[test]
    fn truth_is_in_equilibrium() {
        let l = path(8).laplacian();
        let ms = simulate(&l, 30, 0.1, 2).unwrap();
        assert!(ms.equilibrium_residual(&l, false) < 1e-12);
        assert!(ms.equilibrium_residual(&l, true) > 1e-3);
    }

    #[test]
    fn noise_variance_matches_request() {
        let l = path(40).laplacian();
        let ms = simulate(&l, 30, 0.1, 3).unwrap();
        for d in [ms.delta_f(), ms.delta_u()] {
            let count = d.len() as f64;
            let mean = d.sum() / count;
            let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1.0);
            assert!((0.07..=0.13).contains(&var), "sample variance {var}");
        }
    }

    #[test]
    fn seeded_determinism() {
        let l = path(6).laplacian();
        let a = simulate(&l, 12, 0.1, 99).unwrap();
        let b = simulate(&l, 12, 0.1, 99).unwrap();
        let c = simulate(&l, 12, 0.1, 100).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.delta_u(), c.delta_u());
    }

    #[test]
    fn rejects_empty_horizon() {
        let l = path(3).laplacian();
        assert!(simulate(&l, 0, 0.1, 0).is_err());
        assert!(simulate(&l, 1, -1.0, 0).is_err());
    }

    #[test]
    fn csv_layout() {
        let l = path(2).laplacian();
        let ms = simulate(&l, 2, 0.0, 0).unwrap();
        let mut buf = Vec::new();
        ms.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,node,u_true,u_noisy,f_true,f_noisy");
        assert_eq!(lines.len(), 5);
        assert!(lines[2].starts_with("1,2,"));
    }

    #[test]
    fn removal_scenarios() {
        let net = path(10);
        assert!(random_removal_scenario(&net, 0, 1).unwrap().is_empty());
        let all = random_removal_scenario(&net, 9, 1).unwrap();
        assert_eq!(all.removed.len(), 9);
        assert!(random_removal_scenario(&net, 10, 1).is_err());
        let a = random_removal_scenario(&net, 4, 5).unwrap();
        let b = random_removal_scenario(&net, 4, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.removed.len(), 4);
        assert!(a.validate_against(&net).is_ok());
    }
}
