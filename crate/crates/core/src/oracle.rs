//! Brute-force tail moments from exact samples.
//!
//! Rows are filtered by the tail event, and the kept rows' mean and
//! covariance (denominator `kept − 1`) are reported with batch-means
//! standard errors over 32 consecutive batches.

use serde::{Deserialize, Serialize};

use crate::distributions::{sample_chunks, GseDistribution, SampleMatrix, SAMPLE_CHUNK};
use crate::error::{Error, Result};

pub const MIN_SAMPLES: usize = 10_000;
pub const MIN_KEPT: usize = 200;
pub const BATCHES: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalTailMoments {
    pub sample_count: usize,
    pub kept_count: usize,
    pub tail_prob_hat: f64,
    pub se_tail_prob: f64,
    pub mtce_hat: Vec<f64>,
    pub mtcov_hat: Vec<Vec<f64>>,
    pub se_mtce: Vec<f64>,
    pub se_mtcov: Vec<Vec<f64>>,
}

/// Which rows count as tail rows.
#[derive(Debug, Clone, PartialEq)]
pub enum TailEvent {
    /// `Y > var` componentwise.
    Data(Vec<f64>),
    /// `R⁻¹(Y − μ) > λ` componentwise.
    Standardized(Vec<f64>),
}

/// Running count, mean and centred cross-products.
#[derive(Debug, Clone)]
struct Moments {
    rows: usize,
    kept: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    fn new(n: usize) -> Self {
        Moments { rows: 0, kept: 0, mean: vec![0.0; n], m2: vec![0.0; n * n] }
    }

    fn push(&mut self, y: &[f64]) {
        let n = self.mean.len();
        self.kept += 1;
        let k = self.kept as f64;
        let mut delta = [0.0; 10];
        for i in 0..n {
            delta[i] = y[i] - self.mean[i];
        }
        for (m, d) in self.mean.iter_mut().zip(&delta) {
            *m += d / k;
        }
        for i in 0..n {
            let di = y[i] - self.mean[i];
            for j in 0..n {
                self.m2[i * n + j] += delta[j] * di;
            }
        }
    }

    fn merge(&mut self, o: &Moments) {
        self.rows += o.rows;
        if o.kept == 0 {
            return;
        }
        if self.kept == 0 {
            let rows = self.rows;
            *self = o.clone();
            self.rows = rows;
            return;
        }
        let n = self.mean.len();
        let (na, nb) = (self.kept as f64, o.kept as f64);
        let tot = na + nb;
        let delta: Vec<f64> = o.mean.iter().zip(&self.mean).map(|(b, a)| b - a).collect();
        for i in 0..n {
            for j in 0..n {
                self.m2[i * n + j] += o.m2[i * n + j] + delta[i] * delta[j] * na * nb / tot;
            }
        }
        for (m, d) in self.mean.iter_mut().zip(&delta) {
            *m += d * nb / tot;
        }
        self.kept += o.kept;
    }

    fn cov(&self, i: usize, j: usize) -> f64 {
        let n = self.mean.len();
        self.m2[i * n + j] / (self.kept as f64 - 1.0)
    }
}

struct Filter<'a> {
    event: &'a TailEvent,
    dist: Option<&'a GseDistribution>,
}

impl Filter<'_> {
    fn keep(&self, y: &[f64]) -> bool {
        match self.event {
            TailEvent::Data(v) => y.iter().zip(v).all(|(a, b)| a > b),
            TailEvent::Standardized(l) => {
                let d = self.dist.expect("standardized events need the distribution");
                let z = d.standardize(y).expect("row dimension");
                z.iter().zip(l).all(|(a, b)| a > b)
            }
        }
    }
}

fn batch_of(row: usize, count: usize) -> usize {
    ((row as u128 * BATCHES as u128) / count as u128) as usize
}

/// Accumulates rows `offset..offset + rows.len()/n` into per-batch moments.
fn accumulate(rows: &[f64], n: usize, offset: usize, count: usize, filter: &Filter) -> Vec<(usize, Moments)> {
    let mut out: Vec<(usize, Moments)> = Vec::new();
    for (r, y) in rows.chunks_exact(n).enumerate() {
        let b = batch_of(offset + r, count);
        if out.last().map(|(lb, _)| *lb) != Some(b) {
            out.push((b, Moments::new(n)));
        }
        let acc = &mut out.last_mut().expect("batch pushed").1;
        acc.rows += 1;
        if filter.keep(y) {
            acc.push(y);
        }
    }
    out
}

fn finish(n: usize, count: usize, parts: Vec<Vec<(usize, Moments)>>) -> Result<EmpiricalTailMoments> {
    let mut batches: Vec<Moments> = (0..BATCHES).map(|_| Moments::new(n)).collect();
    for part in parts {
        for (b, m) in part {
            batches[b].merge(&m);
        }
    }
    let mut total = Moments::new(n);
    for b in &batches {
        total.merge(b);
    }
    if total.kept < MIN_KEPT {
        return Err(Error::InsufficientTailMass { kept: total.kept, required: MIN_KEPT });
    }
    let bf = BATCHES as f64;
    let se = |f: &dyn Fn(&Moments) -> f64| -> f64 {
        let vals: Vec<f64> = batches.iter().map(f).collect();
        let m = vals.iter().sum::<f64>() / bf;
        (vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (bf - 1.0) / bf).sqrt()
    };
    // Batches with fewer than two tail rows make the standard errors
    // meaningless; report them as infinite rather than guess.
    let thin = batches.iter().any(|b| b.kept < 2);
    let guard = |v: f64| if thin { f64::INFINITY } else { v };
    Ok(EmpiricalTailMoments {
        sample_count: count,
        kept_count: total.kept,
        tail_prob_hat: total.kept as f64 / count as f64,
        se_tail_prob: se(&|b| b.kept as f64 / b.rows as f64),
        mtce_hat: total.mean.clone(),
        mtcov_hat: (0..n).map(|i| (0..n).map(|j| total.cov(i, j)).collect()).collect(),
        se_mtce: (0..n).map(|i| guard(se(&|b| b.mean[i]))).collect(),
        se_mtcov: (0..n).map(|i| (0..n).map(|j| guard(se(&|b| b.cov(i, j)))).collect()).collect(),
    })
}

/// Tail moments of the rows of `samples` exceeding `var` componentwise.
pub fn empirical_tail_moments(samples: &SampleMatrix, var: &[f64]) -> Result<EmpiricalTailMoments> {
    tail_moments_of(samples, &TailEvent::Data(var.to_vec()), None)
}

/// As [`empirical_tail_moments`] for an arbitrary event; standardized
/// events need the distribution that generated the rows.
pub fn tail_moments_of(samples: &SampleMatrix, event: &TailEvent, dist: Option<&GseDistribution>) -> Result<EmpiricalTailMoments> {
    let n = samples.n;
    check_event(n, event)?;
    if samples.rows < MIN_SAMPLES {
        return Err(Error::Domain(format!("the oracle needs at least {MIN_SAMPLES} samples, got {}", samples.rows)));
    }
    if matches!(event, TailEvent::Standardized(_)) && dist.is_none() {
        return Err(Error::Domain("a standardized tail event needs the distribution".into()));
    }
    let filter = Filter { event, dist };
    let parts = vec![accumulate(&samples.data, n, 0, samples.rows, &filter)];
    finish(n, samples.rows, parts)
}

/// Draws `count` rows from `dist` and reduces them on the fly, without
/// holding the sample matrix in memory. Equal to sampling with
/// [`sample_gse`](crate::distributions::sample_gse) and then filtering.
pub fn simulate_tail_moments(dist: &GseDistribution, count: usize, seed: u64, event: &TailEvent) -> Result<EmpiricalTailMoments> {
    let n = dist.dim();
    check_event(n, event)?;
    if count < MIN_SAMPLES {
        return Err(Error::Domain(format!("the oracle needs at least {MIN_SAMPLES} samples, got {count}")));
    }
    let filter = Filter { event, dist: Some(dist) };
    let parts = sample_chunks(dist, count, seed, |c, rows| accumulate(rows, n, c * SAMPLE_CHUNK, count, &filter));
    finish(n, count, parts)
}

fn check_event(n: usize, event: &TailEvent) -> Result<()> {
    let v = match event {
        TailEvent::Data(v) | TailEvent::Standardized(v) => v,
    };
    if v.len() != n {
        return Err(Error::Dimension { expected: n, found: v.len() });
    }
    if v.iter().any(|x| x.is_nan()) {
        return Err(Error::Domain("tail thresholds must not be NaN".into()));
    }
    Ok(())
}
