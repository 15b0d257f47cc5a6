//! Numerical integration: Gauss–Legendre rules and adaptive Gauss–Kronrod
//! (7/15) subdivision over vector-valued integrands.

use std::collections::BinaryHeap;

use crate::error::{Result, StocError};

/// Gauss–Legendre nodes and weights on [−1, 1], via Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Fixed composite Gauss–Legendre rule on [a, b] with `panels` equal panels.
#[derive(Debug, Clone)]
pub struct CompositeRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CompositeRule {
    pub fn new(a: f64, b: f64, panels: usize, order: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        let h = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let lo = a + h * p as f64;
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(lo + 0.5 * h * (xi + 1.0));
                weights.push(0.5 * h * wi);
            }
        }
        CompositeRule { nodes, weights }
    }
}

// Kronrod 15-point abscissae and weights, with the embedded Gauss 7-point weights.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerance for [`integrate_adaptive`]: a component is converged when its
/// error estimate is below `max(rel * |I|, abs)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rel: 1e-10,
            abs: 1e-14,
            max_intervals: 20_000,
        }
    }
}

struct Interval<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: [f64; N],
    // largest error-to-budget ratio, used as heap priority
    badness: f64,
}

impl<const N: usize> PartialEq for Interval<N> {
    fn eq(&self, other: &Self) -> bool {
        self.badness == other.badness
    }
}
impl<const N: usize> Eq for Interval<N> {}
impl<const N: usize> PartialOrd for Interval<N> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Interval<N> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.badness.total_cmp(&other.badness)
    }
}

fn kronrod<const N: usize, F>(f: &F, a: f64, b: f64) -> ([f64; N], [f64; N])
where
    F: Fn(f64) -> [f64; N],
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut k = [0.0; N];
    let mut g = [0.0; N];
    for c in 0..N {
        k[c] = WGK[7] * fc[c];
        g[c] = WG[3] * fc[c];
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(centre - dx);
        let f2 = f(centre + dx);
        for c in 0..N {
            let s = f1[c] + f2[c];
            k[c] += WGK[j] * s;
            if j % 2 == 1 {
                g[c] += WG[j / 2] * s;
            }
        }
    }
    let mut err = [0.0; N];
    for c in 0..N {
        k[c] *= half;
        err[c] = (k[c] - g[c] * half).abs();
    }
    (k, err)
}

/// Adaptive Gauss–Kronrod integration of a vector-valued function over
/// [a, b], starting from `initial_panels` equal subintervals and bisecting
/// the worst interval until every component meets `tol`.
pub fn integrate_adaptive<const N: usize, F>(
    f: F,
    a: f64,
    b: f64,
    initial_panels: usize,
    tol: Tolerance,
) -> Result<[f64; N]>
where
    F: Fn(f64) -> [f64; N],
{
    let panels = initial_panels.max(1);
    let h = (b - a) / panels as f64;
    let mut heap = BinaryHeap::with_capacity(2 * panels);
    let mut total;
    let mut total_err;

    let push = |heap: &mut BinaryHeap<Interval<N>>, lo: f64, hi: f64| {
        let (value, error) = kronrod(&f, lo, hi);
        heap.push(Interval {
            a: lo,
            b: hi,
            value,
            error,
            badness: 0.0,
        });
    };
    for p in 0..panels {
        let lo = a + h * p as f64;
        let hi = if p + 1 == panels { b } else { lo + h };
        push(&mut heap, lo, hi);
    }

    loop {
        total = [0.0; N];
        total_err = [0.0; N];
        for iv in heap.iter() {
            for c in 0..N {
                total[c] += iv.value[c];
                total_err[c] += iv.error[c];
            }
        }
        let budget: [f64; N] = std::array::from_fn(|c| (tol.rel * total[c].abs()).max(tol.abs));
        if (0..N).all(|c| total_err[c] <= budget[c]) {
            return Ok(total);
        }
        if heap.len() >= tol.max_intervals {
            break;
        }
        // Re-prioritise against the current budget and split the worst interval.
        let intervals: Vec<Interval<N>> = heap
            .drain()
            .map(|mut iv| {
                iv.badness = (0..N)
                    .map(|c| iv.error[c] / budget[c])
                    .fold(0.0, f64::max);
                iv
            })
            .collect();
        heap.extend(intervals);
        // Split a batch of the worst intervals per pass to keep the rescans cheap.
        let batch = (heap.len() / 8).max(1);
        for _ in 0..batch {
            let worst = match heap.pop() {
                Some(iv) => iv,
                None => break,
            };
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                heap.push(worst);
                break;
            }
            push(&mut heap, worst.a, mid);
            push(&mut heap, mid, worst.b);
        }
    }

    let achieved = (0..N)
        .map(|c| total_err[c] / total[c].abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    Err(StocError::NonConvergence {
        achieved,
        requested: tol.rel,
    })
}

/// Scalar convenience wrapper around [`integrate_adaptive`].
pub fn integrate<F>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    integrate_adaptive(|x| [f(x)], a, b, 1, tol).map(|v| v[0])
}
