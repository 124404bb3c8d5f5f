//! Adaptive Gauss-Kronrod quadrature for complex-valued integrands.
//!
//! G7-K15 pairs on a worst-first segment queue. Used for the continuum
//! bath correlation functions, whose integrands are smooth but oscillatory
//! over a wide truncated frequency window.

use num_complex::Complex64;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// Kronrod-15 abscissae (positive half) and weights; Gauss-7 weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One G7-K15 evaluation on [a, b]; returns (kronrod value, error estimate).
fn gk15<F>(f: &F, a: f64, b: f64) -> (Complex64, f64)
where
    F: Fn(f64) -> Complex64,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let flo = f(center - dx);
        let fhi = f(center + dx);
        kronrod += (flo + fhi) * WGK[j];
        if j % 2 == 1 {
            gauss += (flo + fhi) * WG[j / 2];
        }
    }
    kronrod *= half;
    gauss *= half;
    (kronrod, (kronrod - gauss).norm())
}

struct Segment {
    err: f64,
    a: f64,
    b: f64,
    value: Complex64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.partial_cmp(&other.err).unwrap_or(std::cmp::Ordering::Equal)
    }
}

/// Integrate `f` over [a, b] until `abs_tol + rel_tol * |I|` is met.
///
/// Returns the integral and the achieved error estimate; fails with the
/// estimate attached if the segment budget is exhausted first.
pub fn integrate<F>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_segments: usize,
) -> Result<(Complex64, f64)>
where
    F: Fn(f64) -> Complex64,
{
    // seed with a handful of panels so oscillations are seen early
    let n0 = 16usize;
    let mut heap = BinaryHeap::new();
    let mut total = Complex64::default();
    let mut total_err = 0.0;
    for i in 0..n0 {
        let lo = a + (b - a) * i as f64 / n0 as f64;
        let hi = a + (b - a) * (i + 1) as f64 / n0 as f64;
        let (v, e) = gk15(&f, lo, hi);
        total += v;
        total_err += e;
        heap.push(Segment { err: e, a: lo, b: hi, value: v });
    }

    let mut segments = n0;
    loop {
        let tol = abs_tol + rel_tol * total.norm();
        if total_err <= tol {
            return Ok((total, total_err));
        }
        if segments >= max_segments {
            return Err(Error::QuadratureNoConvergence { estimate: total_err, tolerance: tol });
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval no longer splittable in f64
            return Err(Error::QuadratureNoConvergence { estimate: total_err, tolerance: tol });
        }
        total -= worst.value;
        total_err -= worst.err;
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (v, e) = gk15(&f, lo, hi);
            total += v;
            total_err += e;
            heap.push(Segment { err: e, a: lo, b: hi, value: v });
        }
        segments += 1;
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n(x) and P_n'(x)
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}
