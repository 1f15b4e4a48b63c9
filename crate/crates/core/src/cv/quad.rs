//! Adaptive Gauss–Kronrod (7/15) quadrature on finite and infinite intervals.

use std::collections::BinaryHeap;
use std::cmp::Ordering;

const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_SEGMENTS: usize = 4000;
const INITIAL_SEGMENTS: usize = 16;

/// Integral estimate with its error bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

#[derive(Clone, Copy, Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = KRONROD_WEIGHTS[7] * fc;
    let mut gauss = GAUSS_WEIGHTS[3] * fc;
    for i in 0..7 {
        let dx = half * KRONROD_NODES[i];
        let pair = f(center - dx) + f(center + dx);
        kronrod += KRONROD_WEIGHTS[i] * pair;
        if i % 2 == 1 {
            gauss += GAUSS_WEIGHTS[i / 2] * pair;
        }
    }
    Segment { a, b, value: kronrod * half, error: ((kronrod - gauss) * half).abs() }
}

/// Integrates `f` over `[a, b]` to `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Quadrature {
    let width = (b - a) / INITIAL_SEGMENTS as f64;
    let mut heap: BinaryHeap<Segment> =
        (0..INITIAL_SEGMENTS).map(|i| kronrod(&f, a + i as f64 * width, a + (i + 1) as f64 * width)).collect();
    loop {
        let value: f64 = heap.iter().map(|s| s.value).sum();
        let error: f64 = heap.iter().map(|s| s.error).sum();
        if error <= abs_tol.max(rel_tol * value.abs()) || heap.len() >= MAX_SEGMENTS {
            return Quadrature { value, error };
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        heap.push(kronrod(&f, worst.a, mid));
        heap.push(kronrod(&f, mid, worst.b));
    }
}

/// Integrates `f` over the real line via `x = center + scale·t/(1-t²)`.
pub fn integrate_line<F: Fn(f64) -> f64>(f: F, center: f64, scale: f64, abs_tol: f64, rel_tol: f64) -> Quadrature {
    let mapped = |t: f64| {
        let d = 1.0 - t * t;
        let x = center + scale * t / d;
        let jacobian = scale * (1.0 + t * t) / (d * d);
        let v = f(x) * jacobian;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate(mapped, -1.0, 1.0, abs_tol, rel_tol)
}

/// Integrates `f` piecewise over sorted breakpoints, summing the pieces.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, breaks: &[f64], abs_tol: f64, rel_tol: f64) -> Quadrature {
    let mut points: Vec<f64> = breaks.iter().copied().filter(|v| v.is_finite()).collect();
    points.sort_by(f64::total_cmp);
    points.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let pieces = points.len().saturating_sub(1).max(1) as f64;
    let mut total = Quadrature { value: 0.0, error: 0.0 };
    for w in points.windows(2) {
        let q = integrate(&f, w[0], w[1], abs_tol / pieces, rel_tol);
        total.value += q.value;
        total.error += q.error;
    }
    total
}

/// Plain trapezoid rule on `nodes` equally spaced points spanning `[a, b]`.
pub fn trapezoid<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, nodes: usize) -> f64 {
    assert!(nodes >= 2);
    let h = (b - a) / (nodes - 1) as f64;
    let interior: f64 = (1..nodes - 1).map(|i| f(a + i as f64 * h)).sum();
    h * (interior + 0.5 * (f(a) + f(b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_exact() {
        let q = integrate(|x| 3.0 * x * x - x, 0.0, 2.0, 1e-14, 1e-14);
        assert!((q.value - 6.0).abs() < 1e-13);
    }

    #[test]
    fn gaussian_on_line() {
        for (center, scale) in [(0.0, 1.0), (3.0, 0.2), (-1.0, 5.0)] {
            let q = integrate_line(|x| (-(x - 0.4f64).powi(2) / 0.02).exp(), center, scale, 1e-13, 1e-12);
            assert!((q.value - (0.02 * PI).sqrt()).abs() < 1e-10, "{center} {scale}: {}", q.value);
        }
    }

    #[test]
    fn oscillatory_integrand() {
        let q = integrate(|x| (5.0 * x).cos(), 0.0, PI, 1e-12, 1e-12);
        assert!(q.value.abs() < 1e-11);
    }

    #[test]
    fn narrow_peaks_between_breaks() {
        let f = |x: f64| (-(x - 3.0f64).powi(2) / 1e-4).exp() + (-(x + 2.0f64).powi(2)).exp();
        let q = integrate_pieces(f, &[-40.0, -2.0, 2.99, 3.0, 3.01, 40.0], 1e-13, 1e-12);
        assert!((q.value - (PI.sqrt() * (1.0 + 1e-2))).abs() < 1e-10, "{}", q.value);
    }

    #[test]
    fn trapezoid_gaussian() {
        let v = trapezoid(|x| (-x * x).exp(), -10.0, 10.0, 101);
        assert!((v - PI.sqrt()).abs() < 1e-12);
    }
}
