//! Quadrature: globally adaptive Gauss–Kronrod (7/15) and tanh-sinh for
//! integrable endpoint singularities.
//!
//! The adaptive driver always bisects the interval with the largest error
//! estimate, ties broken by position, so results do not depend on scheduling.

use crate::C64;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

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
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Values that can be integrated: reals and complex numbers.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn size(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn size(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn size(&self) -> f64 {
        self.norm()
    }
}

/// One 15-point Kronrod panel: `(integral, error estimate)`.
pub fn gk15<T: QuadValue>(f: &mut impl FnMut(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron = kron + s * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + s * WG[j / 2];
        }
    }
    let kron = kron * h;
    let gauss = gauss * h;
    let err = (kron - gauss).size();
    (kron, err)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOutcome<T> {
    pub value: T,
    pub error: f64,
    pub panels: usize,
    pub converged: bool,
}

struct Panel<T> {
    a: f64,
    b: f64,
    val: T,
    err: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err).then_with(|| o.a.total_cmp(&self.a))
    }
}

/// Globally adaptive integration over `[a, b]` split first at `breaks`.
///
/// Stops when the summed error estimate is below `max(abs_tol, rel_tol * |I|)`
/// or after `max_panels` panels.
pub fn integrate<T: QuadValue>(
    mut f: impl FnMut(f64) -> T,
    a: f64,
    b: f64,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> QuadOutcome<T> {
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|x| *x > a && *x < b).collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|x, y| (*x - *y).abs() <= 1e-15 * (1.0 + y.abs()));
    let mut heap = BinaryHeap::new();
    let mut total = T::zero();
    let mut err = 0.0;
    for w in pts.windows(2) {
        let (v, e) = gk15(&mut f, w[0], w[1]);
        total = total + v;
        err += e;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            val: v,
            err: e,
        });
    }
    let mut panels = heap.len();
    while err > abs_tol.max(rel_tol * total.size()) && panels < max_panels {
        let p = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            heap.push(p);
            break;
        }
        let (v1, e1) = gk15(&mut f, p.a, m);
        let (v2, e2) = gk15(&mut f, m, p.b);
        total = total - p.val + v1 + v2;
        err += e1 + e2 - p.err;
        heap.push(Panel {
            a: p.a,
            b: m,
            val: v1,
            err: e1,
        });
        heap.push(Panel {
            a: m,
            b: p.b,
            val: v2,
            err: e2,
        });
        panels += 1;
    }
    // Re-sum in position order so the value does not depend on update history.
    let mut all: Vec<Panel<T>> = heap.into_vec();
    all.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = all.iter().fold(T::zero(), |s, p| s + p.val);
    let error: f64 = all.iter().map(|p| p.err).sum();
    QuadOutcome {
        value,
        error,
        panels,
        converged: error <= abs_tol.max(rel_tol * value.size()),
    }
}

/// tanh-sinh integration of `f(x, x - a, b - x)` over `[a, b]`.
///
/// The endpoint distances are passed separately and computed without
/// cancellation, so integrands like `(x - a)^{-1/2}` stay accurate at the ends.
pub fn tanh_sinh(f: impl Fn(f64, f64, f64) -> f64, a: f64, b: f64, rel_tol: f64) -> QuadOutcome<f64> {
    let half = 0.5 * (b - a);
    let hp = std::f64::consts::FRAC_PI_2;
    let t_max = 4.0;
    let node = |t: f64| -> Option<f64> {
        let u = hp * t.sinh();
        let e = (-2.0 * u.abs()).exp();
        // 1 - tanh|u| = 2e/(1+e); weight = hp cosh t / cosh^2 u.
        let near = half * 2.0 * e / (1.0 + e);
        if near <= 0.0 {
            return None;
        }
        let w = half * hp * t.cosh() * 4.0 * e / ((1.0 + e) * (1.0 + e));
        let far = 2.0 * half - near;
        let (x, dl, dr) = if u >= 0.0 {
            (b - near, far, near)
        } else {
            (a + near, near, far)
        };
        let v = f(x.clamp(a, b), dl, dr);
        Some(if v.is_finite() { w * v } else { 0.0 })
    };
    let mut h = 1.0;
    let mut sum = node(0.0).unwrap_or(0.0);
    let mut k = 1;
    while (k as f64) * h <= t_max {
        let t = k as f64 * h;
        sum += node(t).unwrap_or(0.0) + node(-t).unwrap_or(0.0);
        k += 1;
    }
    let mut est = sum * h;
    let mut err = f64::INFINITY;
    let mut levels = 0;
    for _ in 0..12 {
        levels += 1;
        h *= 0.5;
        let mut add = 0.0;
        let mut k = 1;
        while (k as f64) * h <= t_max {
            let t = k as f64 * h;
            add += node(t).unwrap_or(0.0) + node(-t).unwrap_or(0.0);
            k += 2;
        }
        sum += add;
        let next = sum * h;
        err = (next - est).abs();
        est = next;
        if err <= rel_tol * est.abs().max(1e-300) && levels >= 3 {
            break;
        }
    }
    QuadOutcome {
        value: est,
        error: err,
        panels: levels,
        converged: err <= rel_tol * est.abs().max(1e-300),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x: f64| x.powi(5) - 3.0 * x, 0.0, 2.0, &[], 1e-14, 0.0, 10);
        assert!((r.value - (64.0 / 6.0 - 6.0)).abs() < 1e-13);
    }

    #[test]
    fn kink_converges() {
        let r = integrate(|t: f64| t.cos().max(0.0), 0.0, 2.0 * PI, &[], 1e-12, 0.0, 500);
        assert!((r.value - 2.0).abs() < 1e-11);
        assert!(r.converged);
    }

    #[test]
    fn complex_integrand() {
        let r = integrate(|t: f64| C64::from_polar(1.0, t), 0.0, PI, &[], 1e-13, 0.0, 50);
        assert!((r.value - C64::new(0.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn log_singularity_with_tanh_sinh() {
        let r = tanh_sinh(|_, dl, _| -dl.ln(), 0.0, 1.0, 1e-13);
        assert!((r.value - 1.0).abs() < 1e-12);
        let r = tanh_sinh(|_, _, dr| dr.powf(-0.45), 0.0, 2.0, 1e-12);
        assert!((r.value - 2f64.powf(0.55) / 0.55).abs() < 1e-10);
    }
}
