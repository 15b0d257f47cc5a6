//! Bessel functions of the first kind J₀, J₁, J₂ for real arguments.
//!
//! Three regimes: the ascending power series for |x| < 4, Miller's downward
//! recurrence normalised by J₀ + 2ΣJ₂ₖ = 1 for 4 ≤ |x| < 25, and Hankel's
//! asymptotic expansion beyond. All three agree at the branch points to a few ulps.

use std::f64::consts::{FRAC_PI_4, PI};

use crate::error::{Result, StocError};

const SERIES_LIMIT: f64 = 4.0;
const ASYMPTOTIC_LIMIT: f64 = 25.0;

/// J_order(x) for order ∈ {0, 1, 2}.
pub fn bessel_j(order: u32, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(StocError::domain(
            "x",
            format!("Bessel argument must be finite, got {x}"),
        ));
    }
    if order > 2 {
        return Err(StocError::domain(
            "order",
            format!("only orders 0, 1, 2 are supported, got {order}"),
        ));
    }
    Ok(bessel_j012(x)[order as usize])
}

/// [J₀(x), J₁(x), J₂(x)] in one evaluation. `x` must be finite.
pub fn bessel_j012(x: f64) -> [f64; 3] {
    let ax = x.abs();
    let [j0, j1, j2] = if ax < SERIES_LIMIT {
        series(ax)
    } else if ax < ASYMPTOTIC_LIMIT {
        miller(ax)
    } else {
        asymptotic(ax)
    };
    // J_n(−x) = (−1)ⁿ J_n(x)
    if x < 0.0 {
        [j0, -j1, j2]
    } else {
        [j0, j1, j2]
    }
}

fn series(x: f64) -> [f64; 3] {
    let h = 0.5 * x;
    let h2 = h * h;
    let mut out = [0.0; 3];
    for (n, slot) in out.iter_mut().enumerate() {
        // first term (x/2)^n / n!
        let mut term = match n {
            0 => 1.0,
            1 => h,
            _ => 0.5 * h2,
        };
        let mut sum = term;
        let mut k = 1.0;
        while term.abs() > 1e-17 * sum.abs().max(1e-300) {
            term *= -h2 / (k * (k + n as f64));
            sum += term;
            k += 1.0;
            if k > 200.0 {
                break;
            }
        }
        *slot = sum;
    }
    out
}

fn miller(x: f64) -> [f64; 3] {
    let start = {
        let m = (x + 20.0 + 10.0 * x.cbrt()) as usize;
        m + (m % 2)
    };
    let mut next = 0.0; // J_{m+1}
    let mut cur = 1e-30; // J_m, arbitrary seed
    let mut norm = 0.0;
    let mut low = [0.0; 3];
    let mut m = start;
    loop {
        if m % 2 == 0 {
            norm += if m == 0 { cur } else { 2.0 * cur };
        }
        if m <= 2 {
            low[m] = cur;
        }
        if m == 0 {
            break;
        }
        let prev = 2.0 * m as f64 / x * cur - next;
        next = cur;
        cur = prev;
        m -= 1;
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            for v in low.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    [low[0] / norm, low[1] / norm, low[2] / norm]
}

/// Hankel expansion J_n(x) = √(2/πx) (P cos χ − Q sin χ), χ = x − (n/2 + 1/4)π.
fn asymptotic(x: f64) -> [f64; 3] {
    let amp = (2.0 / (PI * x)).sqrt();
    let (sx, cx) = x.sin_cos();
    let mut out = [0.0; 2];
    for (n, slot) in out.iter_mut().enumerate() {
        let mu = 4.0 * (n * n) as f64;
        let (p, q) = hankel_pq(mu, x);
        // cos/sin of χ via angle addition keeps full precision at large x
        let shift = (0.5 * n as f64) * PI + FRAC_PI_4;
        let (ss, cs) = shift.sin_cos();
        let cos_chi = cx * cs + sx * ss;
        let sin_chi = sx * cs - cx * ss;
        *slot = amp * (p * cos_chi - q * sin_chi);
    }
    let [j0, j1] = out;
    [j0, j1, 2.0 * j1 / x - j0]
}

fn hankel_pq(mu: f64, x: f64) -> (f64, f64) {
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut k = 1usize;
    let mut last = f64::INFINITY;
    loop {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        let mag = term.abs();
        if mag > last || mag < 1e-17 {
            break;
        }
        last = mag;
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        k += 1;
    }
    (p, q)
}
