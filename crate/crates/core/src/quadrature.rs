//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite intervals,
//! plus semi-infinite and whole-line wrappers.
//!
//! The integrand may return a pair `(value, inner_error)`; the inner error is
//! integrated with the Kronrod weights and added to the reported error. This
//! is what lets the tail engine nest one-dimensional rules.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Stopping rule: the error must fall below `max(abs_tol * L1, rel_tol * |I|)`
/// where `L1` is the integral of `|f|`. Both tolerances are therefore
/// relative to the size of the integrand, which keeps the rule meaningful
/// for tail integrals of order 1e-200.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs_tol: 1e-12, rel_tol: 1e-11, max_intervals: 2000 }
    }
}

impl Tolerance {
    pub fn new(abs_tol: f64, rel_tol: f64, max_intervals: usize) -> Self {
        Tolerance { abs_tol, rel_tol, max_intervals }
    }

    fn target(&self, value: f64, l1: f64) -> f64 {
        (self.abs_tol * l1).max(self.rel_tol * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub l1: f64,
    pub evals: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    l1: f64,
}

impl PartialEq for Segment {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Segment {
    fn cmp(&self, o: &Self) -> Ordering {
        // Ties broken on position so the refinement order is reproducible.
        self.error
            .total_cmp(&o.error)
            .then_with(|| o.a.total_cmp(&self.a))
    }
}

fn gk15<F: FnMut(f64) -> (f64, f64)>(f: &mut F, a: f64, b: f64) -> Segment {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let (fc, ec) = f(c);
    let mut resk = WGK[7] * fc;
    let mut resg = WG[3] * fc;
    let mut resabs = WGK[7] * fc.abs();
    let mut inner = WGK[7] * ec;
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let (f1, e1) = f(c - dx);
        let (f2, e2) = f(c + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        inner += WGK[j] * (e1 + e2);
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let hw = h.abs();
    resasc *= hw;
    let mut err = ((resk - resg) * h).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let resabs = resabs * hw;
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    Segment { a, b, value: resk * h, error: err + inner * hw, l1: resabs }
}

/// Adaptive integration over consecutive intervals delimited by `points`
/// (at least two, increasing). The integrand returns `(value, inner_error)`.
pub fn integrate_pair<F>(mut f: F, points: &[f64], tol: &Tolerance) -> QuadResult
where
    F: FnMut(f64) -> (f64, f64),
{
    assert!(points.len() >= 2, "need at least one interval");
    let mut evals = 0usize;
    let mut heap = BinaryHeap::new();
    let (mut value, mut error, mut l1) = (0.0, 0.0, 0.0);
    for w in points.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let s = gk15(&mut f, w[0], w[1]);
        evals += 15;
        value += s.value;
        error += s.error;
        l1 += s.l1;
        heap.push(s);
    }
    let mut converged = true;
    // Re-summing from the heap now and then limits drift in the running sums.
    let mut since_resum = 0;
    while error > tol.target(value, l1) {
        if heap.len() >= tol.max_intervals {
            converged = false;
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Interval cannot be split further in floating point.
            heap.push(worst);
            converged = false;
            break;
        }
        let left = gk15(&mut f, worst.a, mid);
        let right = gk15(&mut f, mid, worst.b);
        evals += 30;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        l1 += left.l1 + right.l1 - worst.l1;
        heap.push(left);
        heap.push(right);
        since_resum += 1;
        if since_resum == 64 {
            since_resum = 0;
            value = heap.iter().map(|s| s.value).sum();
            error = heap.iter().map(|s| s.error).sum();
            l1 = heap.iter().map(|s| s.l1).sum();
        }
    }
    let mut segs: Vec<Segment> = heap.into_vec();
    segs.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = segs.iter().map(|s| s.value).sum();
    let error = segs.iter().map(|s| s.error).sum();
    let l1 = segs.iter().map(|s| s.l1).sum();
    QuadResult { value, error, l1, evals, converged }
}

/// Adaptive integration of a scalar function on `[a, b]`, pre-split into
/// `pieces` equal intervals.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, pieces: usize, tol: &Tolerance) -> QuadResult {
    let pieces = pieces.max(1);
    let points: Vec<f64> = (0..=pieces).map(|i| a + (b - a) * i as f64 / pieces as f64).collect();
    integrate_pair(|x| (f(x), 0.0), &points, tol)
}

/// Integral of `f` over `[a, ∞)` using `x = a + s·u/(1−u)`.
pub fn integrate_upper<F: FnMut(f64) -> f64>(mut f: F, a: f64, scale: f64, tol: &Tolerance) -> QuadResult {
    integrate(
        |u| {
            if u >= 1.0 {
                return 0.0;
            }
            let om = 1.0 - u;
            let v = f(a + scale * u / om);
            if v == 0.0 { 0.0 } else { v * scale / (om * om) }
        },
        0.0,
        1.0,
        8,
        tol,
    )
}

/// Integral of `f` over the whole real line, split at `centre`.
pub fn integrate_line<F: FnMut(f64) -> f64>(mut f: F, centre: f64, scale: f64, tol: &Tolerance) -> QuadResult {
    integrate(
        |u| {
            let om = 1.0 - u.abs();
            if om <= 0.0 {
                return 0.0;
            }
            let v = f(centre + scale * u / om);
            if v == 0.0 { 0.0 } else { v * scale / (om * om) }
        },
        -1.0,
        1.0,
        16,
        tol,
    )
}
