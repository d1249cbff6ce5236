//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite and
//! half-infinite intervals.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

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
// Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { abs_tol: 1e-10, rel_tol: 1e-10, max_intervals: 4000 }
    }
}

impl QuadOptions {
    pub fn abs(tol: f64) -> Self {
        QuadOptions { abs_tol: tol, rel_tol: 0.0, ..Default::default() }
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 15-point Kronrod panel with its embedded 7-point Gauss estimate.
pub fn kronrod15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive integral of `f` over the finite interval `[a, b]`.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult { value: 0.0, error: 0.0, evals: 0 });
    }
    let (v, e) = kronrod15(&mut f, a, b);
    let mut heap = BinaryHeap::from([Panel { a, b, value: v, error: e }]);
    let (mut value, mut error, mut evals) = (v, e, 15);
    loop {
        let tol = opts.abs_tol.max(opts.rel_tol * value.abs());
        if error <= tol {
            return Ok(QuadResult { value, error, evals });
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::Tolerance { tol, estimate: value, error });
        }
        let p = heap.pop().expect("non-empty");
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            // panel below floating-point resolution; keep what we have
            return Err(Error::Tolerance { tol, estimate: value, error });
        }
        let (v1, e1) = kronrod15(&mut f, p.a, m);
        let (v2, e2) = kronrod15(&mut f, m, p.b);
        evals += 30;
        value += v1 + v2 - p.value;
        error += e1 + e2 - p.error;
        heap.push(Panel { a: p.a, b: m, value: v1, error: e1 });
        heap.push(Panel { a: m, b: p.b, value: v2, error: e2 });
        if error < 0.0 {
            error = heap.iter().map(|p| p.error).sum();
        }
    }
}

/// Adaptive integral over `[a, inf)` via `x = a + t / (1 - t)`.
pub fn integrate_to_infinity(mut f: impl FnMut(f64) -> f64, a: f64, opts: QuadOptions) -> Result<QuadResult> {
    integrate(
        |t| {
            let s = 1.0 - t;
            let x = a + t / s;
            let v = f(x);
            if v == 0.0 {
                0.0
            } else {
                v / (s * s)
            }
        },
        0.0,
        1.0,
        opts,
    )
}

/// Integral over `[a, b]` split at the interior `breaks` (kinks of the integrand).
pub fn integrate_with_breaks(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    breaks: &[f64],
    opts: QuadOptions,
) -> Result<QuadResult> {
    let mut pts = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    inner.sort_by(f64::total_cmp);
    pts.extend(inner);
    pts.push(b);
    let share = QuadOptions { abs_tol: opts.abs_tol / (pts.len() - 1) as f64, ..opts };
    let mut total = QuadResult { value: 0.0, error: 0.0, evals: 0 };
    for w in pts.windows(2) {
        let r = integrate(&mut f, w[0], w[1], share)?;
        total.value += r.value;
        total.error += r.error;
        total.evals += r.evals;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let r = integrate(|x| x.powi(20), 0.0, 1.0, QuadOptions::default()).unwrap();
        assert!((r.value - 1.0 / 21.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_tail() {
        let r = integrate_to_infinity(|x| (-x * x).exp(), 0.0, QuadOptions::abs(1e-12)).unwrap();
        assert!((r.value - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-11);
    }

    #[test]
    fn endpoint_singularity() {
        let r = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, QuadOptions::abs(1e-9)).unwrap();
        assert!((r.value - 2.0).abs() < 1e-8);
    }

    #[test]
    fn kink_is_handled_by_breaks() {
        let r = integrate_with_breaks(|x: f64| (x - 0.3).abs(), 0.0, 1.0, &[0.3], QuadOptions::default()).unwrap();
        assert!((r.value - (0.045 + 0.245)).abs() < 1e-14);
    }

    #[test]
    fn reports_failure() {
        let opts = QuadOptions { abs_tol: 1e-15, rel_tol: 0.0, max_intervals: 3 };
        assert!(integrate(|x: f64| (1.0 / x).sin(), 1e-3, 1.0, opts).is_err());
    }
}
