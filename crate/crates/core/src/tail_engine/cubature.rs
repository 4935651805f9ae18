//! Nested adaptive quadrature over the mapped orthant.

use std::cell::{Cell, RefCell};

use super::{DensitySpec, IntegrationConfig, TailEstimate, TailIntegrand, Weight, MAX_DIM};
use crate::skewing::SkewKind;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_pair, QuadResult, Tolerance};

/// Initial equal pieces per axis; enough that a narrow peak anywhere in
/// `[u₀, 1)` lands near some Kronrod node.
const INITIAL_PIECES: usize = 8;
/// Each inner level is integrated this much more tightly than its parent.
const INNER_TIGHTENING: f64 = 0.1;
const INNER_MAX_INTERVALS: usize = 400;

/// One mapped axis: `z = c + s·u/(1 − |u|)` for `u ∈ [u0, 1)`.
#[derive(Debug, Clone, Copy)]
pub(super) struct Axis {
    pub u0: f64,
    pub c: f64,
    pub s: f64,
}

impl Axis {
    fn new(t: f64, s: f64) -> Self {
        if t >= 0.0 {
            Axis { u0: 0.0, c: t, s }
        } else if t == f64::NEG_INFINITY {
            Axis { u0: -1.0, c: 0.0, s }
        } else {
            Axis { u0: t / (s - t), c: 0.0, s }
        }
    }

    /// Inverse of [`Axis::map`].
    fn unmap(&self, z: f64) -> f64 {
        let v = (z - self.c) / self.s;
        v / (1.0 + v.abs())
    }

    /// (z, dz/du); `u` must lie in `(-1, 1)`.
    #[inline]
    pub fn map(&self, u: f64) -> (f64, f64) {
        let om = 1.0 - u.abs();
        (self.c + self.s * u / om, self.s / (om * om))
    }
}

/// Per-axis maps. The scale follows the kernel's decay rate at the lower
/// bound, so deep tails are not squeezed against `u = 0`.
pub(super) fn axes(density: &DensitySpec, lower: &[f64]) -> Vec<Axis> {
    let base: f64 = 0.5 * lower.iter().map(|t| if *t > 0.0 { t * t } else { 0.0 }).sum::<f64>();
    let x = base + density.shift;
    let lnk = |v: f64| density.family.eval_unchecked(density.kind, density.n, v).ln();
    let h = 1e-4 * x.max(1.0);
    let dlog = (lnk(x + h) - lnk((x - h).max(0.0))) / (x + h - (x - h).max(0.0));
    lower
        .iter()
        .map(|&t| {
            let s = if t > 1.0 && dlog.is_finite() && dlog < 0.0 {
                (1.0 / (t * -dlog)).clamp(1e-6, t)
            } else if t > 1.0 {
                1.0 / t
            } else {
                1.0
            };
            Axis::new(t, s)
        })
        .collect()
}

struct Nested<'a> {
    integrand: &'a TailIntegrand,
    axes: &'a [Axis],
    outer: Tolerance,
    /// Plane `offset + coeffsᵀz = 0` across which the weight is not smooth.
    kink: Option<(f64, &'a [f64])>,
    converged: Cell<bool>,
    evaluations: Cell<u64>,
    bad_point: RefCell<Option<Vec<f64>>>,
}

impl<'a> Nested<'a> {
    fn level(&self, level: usize, z: &mut [f64; MAX_DIM], half_sq: f64) -> QuadResult {
        let d = self.axes.len();
        let axis = self.axes[level];
        let tighten = INNER_TIGHTENING.powi(level as i32);
        let tol = if level == 0 {
            self.outer
        } else {
            Tolerance::new(self.outer.abs_tol * tighten, self.outer.rel_tol * tighten, INNER_MAX_INTERVALS)
        };
        let mut points: Vec<f64> = (0..=INITIAL_PIECES)
            .map(|i| axis.u0 + (1.0 - axis.u0) * i as f64 / INITIAL_PIECES as f64)
            .collect();
        // The map's Jacobian has a kink at u = 0.
        insert_point(&mut points, 0.0);
        if level + 1 == d {
            if let Some((offset, coeffs)) = self.kink {
                let c = coeffs[level];
                if c != 0.0 {
                    let partial: f64 = offset + coeffs[..level].iter().zip(&z[..level]).map(|(a, b)| a * b).sum::<f64>();
                    insert_point(&mut points, axis.unmap(-partial / c));
                }
            }
        }
        let r = integrate_pair(
            |u| {
                if u >= 1.0 || u <= -1.0 {
                    return (0.0, 0.0);
                }
                let (x, jac) = axis.map(u);
                z[level] = x;
                let hs = half_sq + 0.5 * x * x;
                if level + 1 == d {
                    self.evaluations.set(self.evaluations.get() + 1);
                    let k = self.integrand.density.eval_sq(hs);
                    if k == 0.0 {
                        return (0.0, 0.0);
                    }
                    let v = k * self.integrand.weight.eval(&z[..d]) * jac;
                    if !v.is_finite() {
                        self.bad_point.borrow_mut().get_or_insert_with(|| z[..d].to_vec());
                        return (0.0, 0.0);
                    }
                    (v, 0.0)
                } else {
                    let inner = self.level(level + 1, z, hs);
                    if inner.value == 0.0 && inner.error == 0.0 {
                        return (0.0, 0.0);
                    }
                    (inner.value * jac, inner.error * jac)
                }
            },
            &points,
            &tol,
        );
        if !r.converged {
            self.converged.set(false);
        }
        r
    }
}

/// Adds `u` to the sorted breakpoints when it lies strictly inside.
fn insert_point(points: &mut Vec<f64>, u: f64) {
    let (first, last) = (points[0], points[points.len() - 1]);
    if u > first && u < last {
        let at = points.partition_point(|p| *p < u);
        if points[at] != u {
            points.insert(at, u);
        }
    }
}

/// The Laplace cdf has a kink at 0 and its derivatives jump there.
fn kink_of(w: &Weight) -> Option<(f64, &[f64])> {
    match w {
        Weight::Skew { kind: SkewKind::LaplaceCdf, offset, coeffs, .. } => Some((*offset, coeffs.as_slice())),
        Weight::Scaled(_, w) => kink_of(w),
        Weight::Sum(a, b) => kink_of(a).or_else(|| kink_of(b)),
        _ => None,
    }
}

pub(super) fn integrate(integrand: &TailIntegrand, axes: &[Axis], cfg: &IntegrationConfig) -> Result<TailEstimate> {
    let nested = Nested {
        integrand,
        axes,
        outer: Tolerance::new(cfg.abs_tol, cfg.rel_tol, cfg.max_subdivisions),
        kink: kink_of(&integrand.weight),
        converged: Cell::new(true),
        evaluations: Cell::new(0),
        bad_point: RefCell::new(None),
    };
    let mut z = [0.0; MAX_DIM];
    let r = nested.level(0, &mut z, 0.0);
    if let Some(point) = nested.bad_point.into_inner() {
        return Err(Error::NonFinite { point });
    }
    if !r.value.is_finite() {
        return Err(Error::Integration("tail integral is not finite".into()));
    }
    Ok(TailEstimate {
        value: r.value,
        error: r.error,
        converged: nested.converged.get(),
        evaluations: nested.evaluations.get(),
    })
}
