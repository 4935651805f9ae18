//! Randomized quasi-Monte Carlo over the mapped orthant.
//!
//! Independent Owen-scrambled Sobol replicates; the estimate is their mean
//! and the reported error their standard error.

use rayon::prelude::*;

use super::cubature::Axis;
use super::{IntegrationConfig, TailEstimate, TailIntegrand, MAX_DIM};
use crate::error::{Error, Result};

/// Longest sequence the Sobol generator supports.
const MAX_SEQUENCE: usize = 1 << 16;
const MIN_REPLICATES: usize = 8;

pub(super) fn integrate(integrand: &TailIntegrand, axes: &[Axis], cfg: &IntegrationConfig) -> Result<TailEstimate> {
    let d = axes.len();
    let replicates = (cfg.qmc_points / MAX_SEQUENCE).max(MIN_REPLICATES);
    let per = (cfg.qmc_points / replicates).max(1);
    let results: Vec<std::result::Result<(f64, f64), Vec<f64>>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let seed = replicate_seed(cfg.qmc_seed, r as u64);
            let mut z = [0.0; MAX_DIM];
            let (mut sum, mut sum_abs) = (0.0, 0.0);
            for i in 0..per {
                let mut jac = 1.0;
                let mut half_sq = 0.0;
                for (k, axis) in axes.iter().enumerate() {
                    let x = sobol_burley::sample(i as u32, k as u32, seed) as f64 + 0.5f64.powi(25);
                    let u = axis.u0 + (1.0 - axis.u0) * x;
                    let (zk, dz) = axis.map(u);
                    z[k] = zk;
                    half_sq += 0.5 * zk * zk;
                    jac *= dz * (1.0 - axis.u0);
                }
                let k = integrand.density.eval_sq(half_sq);
                if k == 0.0 {
                    continue;
                }
                let v = k * integrand.weight.eval(&z[..d]) * jac;
                if !v.is_finite() {
                    return Err(z[..d].to_vec());
                }
                sum += v;
                sum_abs += v.abs();
            }
            Ok((sum / per as f64, sum_abs / per as f64))
        })
        .collect();
    let mut means = Vec::with_capacity(replicates);
    let mut l1 = 0.0;
    for r in results {
        match r {
            Ok((m, a)) => {
                means.push(m);
                l1 += a;
            }
            Err(point) => return Err(Error::NonFinite { point }),
        }
    }
    let rf = replicates as f64;
    l1 /= rf;
    let mean = means.iter().sum::<f64>() / rf;
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (rf - 1.0);
    let se = (var / rf).sqrt();
    Ok(TailEstimate {
        value: mean,
        error: se,
        converged: se <= (cfg.abs_tol * l1).max(cfg.rel_tol * mean.abs()),
        evaluations: (replicates * per) as u64,
    })
}

fn replicate_seed(seed: u64, r: u64) -> u32 {
    // splitmix64 finalizer
    let mut x = seed ^ r.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    (x ^ (x >> 31)) as u32
}
