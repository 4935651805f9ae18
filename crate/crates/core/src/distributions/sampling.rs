//! Exact sampling.
//!
//! An elliptical proposal X is accepted with probability H(γᵀX); the
//! accepted draws have density 2·f_X·H. Rows are generated in fixed-size
//! chunks, chunk `i` on ChaCha stream `i`, so output depends only on the
//! seed and never on the thread count.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, Gamma, StandardNormal};
use rayon::prelude::*;

use super::GseDistribution;
use crate::generators::{GeneratorFamily, GeneratorKind};
use crate::quadrature::{integrate, Tolerance};

/// Rows per RNG stream.
pub const SAMPLE_CHUNK: usize = 1 << 15;

/// Row-major `rows × n` sample matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    pub n: usize,
    pub rows: usize,
    pub data: Vec<f64>,
}

impl SampleMatrix {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n)
    }
}

/// `count` draws from `dist`, deterministic in `seed`.
pub fn sample_gse(dist: &GseDistribution, count: usize, seed: u64) -> SampleMatrix {
    let n = dist.dim();
    let chunks = sample_chunks(dist, count, seed, |_, rows| rows.to_vec());
    let mut data = Vec::with_capacity(count * n);
    for c in chunks {
        data.extend_from_slice(&c);
    }
    SampleMatrix { n, rows: count, data }
}

/// Generates `count` rows chunk by chunk in parallel and maps each chunk
/// (`chunk index`, row-major rows) through `f`. Results come back in chunk
/// order and are identical to slicing [`sample_gse`].
pub fn sample_chunks<T, F>(dist: &GseDistribution, count: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &[f64]) -> T + Sync,
{
    let sampler = Sampler::new(dist);
    let n_chunks = count.div_ceil(SAMPLE_CHUNK);
    (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let rows = SAMPLE_CHUNK.min(count - c * SAMPLE_CHUNK);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let mut buf = Vec::with_capacity(rows * sampler.n);
            let mut z = vec![0.0; sampler.n];
            for _ in 0..rows {
                sampler.draw_standard(&mut rng, &mut z);
                let y = &dist.mu + &dist.root * DVector::from_column_slice(&z);
                buf.extend(y.iter());
            }
            f(c, &buf)
        })
        .collect()
}

struct Sampler<'a> {
    dist: &'a GseDistribution,
    n: usize,
    radial: Option<Arc<RadialTable>>,
}

impl<'a> Sampler<'a> {
    fn new(dist: &'a GseDistribution) -> Self {
        let n = dist.dim();
        let radial = matches!(dist.generator, GeneratorFamily::Logistic).then(|| logistic_table(n));
        Sampler { dist, n, radial }
    }

    /// One draw of the standardized vector Z.
    fn draw_standard<R: Rng>(&self, rng: &mut R, z: &mut [f64]) {
        loop {
            self.draw_spherical(rng, z);
            let h = self.dist.skew.eval_linear(0, z);
            let u: f64 = rng.gen();
            if u < h {
                return;
            }
        }
    }

    fn draw_spherical<R: Rng>(&self, rng: &mut R, z: &mut [f64]) {
        for v in z.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        match self.dist.generator {
            GeneratorFamily::Normal => {}
            GeneratorFamily::StudentT { dof } => {
                let w: f64 = ChiSquared::new(dof).expect("positive dof").sample(rng);
                let s = (dof / w).sqrt();
                z.iter_mut().for_each(|v| *v *= s);
            }
            GeneratorFamily::Laplace => {
                let r: f64 = Gamma::new(self.n as f64, 1.0).expect("positive shape").sample(rng);
                rescale(z, r);
            }
            GeneratorFamily::Logistic => {
                let u: f64 = rng.gen();
                let r = self.radial.as_ref().expect("logistic table").inverse(u);
                rescale(z, r);
            }
        }
    }
}

fn rescale(z: &mut [f64], r: f64) {
    let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    z.iter_mut().for_each(|v| *v *= r / norm);
}

const TABLE_NODES: usize = 4096;
const TABLE_RMAX: f64 = 14.0;

/// Radial inverse cdf for the logistic generator, tabulated on Chebyshev
/// nodes with monotone cubic Hermite interpolation.
#[derive(Debug)]
pub(crate) struct RadialTable {
    r: Vec<f64>,
    cdf: Vec<f64>,
    slope: Vec<f64>,
}

fn logistic_table(n: usize) -> Arc<RadialTable> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<RadialTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("radial table cache poisoned");
    map.entry(n).or_insert_with(|| Arc::new(RadialTable::build(n))).clone()
}

impl RadialTable {
    pub(crate) fn build(n: usize) -> Self {
        let fam = GeneratorFamily::Logistic;
        let dens = |r: f64| r.powi(n as i32 - 1) * fam.eval_unchecked(GeneratorKind::G, n, 0.5 * r * r);
        let r: Vec<f64> = (0..TABLE_NODES)
            .map(|j| 0.5 * TABLE_RMAX * (1.0 - (std::f64::consts::PI * j as f64 / (TABLE_NODES - 1) as f64).cos()))
            .collect();
        let tol = Tolerance::new(1e-15, 1e-14, 50);
        let mut cdf = vec![0.0; TABLE_NODES];
        for j in 1..TABLE_NODES {
            cdf[j] = cdf[j - 1] + integrate(dens, r[j - 1], r[j], 1, &tol).value;
        }
        let total = cdf[TABLE_NODES - 1];
        cdf.iter_mut().for_each(|c| *c /= total);
        let mut slope: Vec<f64> = r.iter().map(|&x| dens(x) / total).collect();
        // Fritsch–Carlson limiter keeps each cubic piece monotone.
        for j in 0..TABLE_NODES - 1 {
            let h = r[j + 1] - r[j];
            let delta = (cdf[j + 1] - cdf[j]) / h;
            if delta <= 0.0 {
                slope[j] = 0.0;
                slope[j + 1] = 0.0;
                continue;
            }
            let a = slope[j] / delta;
            let b = slope[j + 1] / delta;
            let s = a * a + b * b;
            if s > 9.0 {
                let t = 3.0 / s.sqrt();
                slope[j] = t * a * delta;
                slope[j + 1] = t * b * delta;
            }
        }
        RadialTable { r, cdf, slope }
    }

    fn hermite(&self, j: usize, x: f64) -> (f64, f64) {
        let h = self.r[j + 1] - self.r[j];
        let t = (x - self.r[j]) / h;
        let (y0, y1, m0, m1) = (self.cdf[j], self.cdf[j + 1], self.slope[j] * h, self.slope[j + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * m1;
        let dv = ((6.0 * t2 - 6.0 * t) * y0 + (3.0 * t2 - 4.0 * t + 1.0) * m0 + (-6.0 * t2 + 6.0 * t) * y1 + (3.0 * t2 - 2.0 * t) * m1) / h;
        (v, dv)
    }

    /// Radius with cdf `u`.
    pub(crate) fn inverse(&self, u: f64) -> f64 {
        let j = match self.cdf.partition_point(|&c| c <= u) {
            0 => 0,
            p if p >= TABLE_NODES => TABLE_NODES - 2,
            p => p - 1,
        };
        let (mut lo, mut hi) = (self.r[j], self.r[j + 1]);
        let span = self.cdf[j + 1] - self.cdf[j];
        let mut x = if span > 0.0 { lo + (hi - lo) * (u - self.cdf[j]) / span } else { lo };
        for _ in 0..60 {
            let (v, dv) = self.hermite(j, x);
            let g = v - u;
            if g < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let mut next = if dv > 0.0 { x - g / dv } else { f64::NAN };
            if !(next >= lo && next <= hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() <= 1e-15 * x.max(1e-300) {
                return next;
            }
            x = next;
        }
        x
    }
}

/// Quantile `u` of the radius `|X|` under the spherical logistic law in `n`
/// dimensions, read from the cached table.
pub fn logistic_radius_quantile(n: usize, u: f64) -> f64 {
    logistic_table(n).inverse(u)
}
