//! Period lattices and the Weierstrass `℘` function.
//!
//! Evaluation reduces `z` into the centred fundamental cell of a Lagrange-reduced
//! basis `(b1, b2)` and sums rows of the lattice in closed form:
//! `Σ_n (h - n b1 - m b2)^-2 = k² csc²(k(h - m b2))` with `k = π/b1`. Rows decay
//! like `exp(-2π|m| Im τ)`, so a handful of rows reach double precision.

use crate::error::{NevError, Result};
use crate::tolerances::LATTICE_SNAP;
use crate::C64;
use std::f64::consts::PI;

/// Number of `q`-series terms for the Eisenstein series; `|q| <= e^{-π√3}`.
const Q_TERMS: u32 = 24;
/// Number of Laurent coefficients of `℘` kept at a lattice point.
const LAURENT_TERMS: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    w1: C64,
    w2: C64,
    b1: C64,
    b2: C64,
    tau: C64,
    k: C64,
    rows: i32,
    row_const: C64,
    g2: C64,
    g3: C64,
    /// `laurent[j]` is the coefficient of `h^{2j+2}` in `℘(h) - h^{-2}`.
    laurent: Vec<C64>,
}

impl Lattice {
    /// Lattice generated by `w1`, `w2`; `w2` is negated if needed so `Im(w2/w1) > 0`.
    pub fn new(w1: C64, w2: C64) -> Result<Self> {
        if !(w1.norm() > 0.0 && w2.norm() > 0.0) || !w1.is_finite() || !w2.is_finite() {
            return Err(NevError::InvalidParameter("lattice periods must be nonzero".into()));
        }
        let ratio = w2 / w1;
        if ratio.im.abs() <= 1e-12 * ratio.norm() {
            return Err(NevError::InvalidParameter(
                "lattice periods are linearly dependent over the reals".into(),
            ));
        }
        let w2 = if ratio.im < 0.0 { -w2 } else { w2 };
        let (b1, b2) = reduce_basis(w1, w2);
        let tau = b2 / b1;
        let k = C64::new(PI, 0.0) / b1;
        let rows = ((4e17f64).ln() / (2.0 * PI * tau.im) + 0.5).ceil().max(1.0) as i32;

        let mut row_const = k * k / 3.0;
        for m in 1..=200 {
            let t = csc2(C64::new(PI, 0.0) * tau * m as f64);
            row_const += 2.0 * k * k * t;
            if t.norm() < 1e-20 {
                break;
            }
        }

        let q = (C64::new(0.0, 2.0 * PI) * tau).exp();
        let mut e4 = C64::new(1.0, 0.0);
        let mut e6 = C64::new(1.0, 0.0);
        let mut qn = C64::new(1.0, 0.0);
        for n in 1..=Q_TERMS {
            qn *= q;
            e4 += 240.0 * sigma(n, 3) * qn;
            e6 -= 504.0 * sigma(n, 5) * qn;
        }
        let g4 = PI.powi(4) / 45.0 * e4 / b1.powi(4);
        let g6 = 2.0 * PI.powi(6) / 945.0 * e6 / b1.powi(6);
        let g2 = 60.0 * g4;
        let g3 = 140.0 * g6;
        let laurent = laurent_coefficients(g2, g3, LAURENT_TERMS);
        Ok(Lattice {
            w1,
            w2,
            b1,
            b2,
            tau,
            k,
            rows,
            row_const,
            g2,
            g3,
            laurent,
        })
    }

    /// The lattice `⟨c, ic⟩`, which contains `c` as a period.
    pub fn square(c: C64) -> Result<Self> {
        Lattice::new(c, C64::i() * c)
    }

    pub fn periods(&self) -> (C64, C64) {
        (self.w1, self.w2)
    }

    pub fn reduced_basis(&self) -> (C64, C64) {
        (self.b1, self.b2)
    }

    pub fn g2(&self) -> C64 {
        self.g2
    }

    pub fn g3(&self) -> C64 {
        self.g3
    }

    /// Real coordinates `(s, t)` with `z = s b1 + t b2`.
    fn coords(&self, z: C64) -> (f64, f64) {
        let u = z / self.b1;
        let t = u.im / self.tau.im;
        (u.re - t * self.tau.re, t)
    }

    /// Splits `z = h + ω` with `ω` the lattice point nearest in reduced coordinates.
    pub fn reduce(&self, z: C64) -> (C64, C64) {
        let (s, t) = self.coords(z);
        let (m, n) = (s.round(), t.round());
        let omega = self.b1 * m + self.b2 * n;
        let mut h = z - omega;
        let mut best = omega;
        // Rounding in skew coordinates can miss the nearest point by one step.
        for dm in -1..=1 {
            for dn in -1..=1 {
                let w = omega + self.b1 * dm as f64 + self.b2 * dn as f64;
                if (z - w).norm() < h.norm() {
                    h = z - w;
                    best = w;
                }
            }
        }
        (h, best)
    }

    /// Nearest lattice point to `z`.
    pub fn nearest_point(&self, z: C64) -> C64 {
        self.reduce(z).1
    }

    /// True when `z` lies within `tol * max(1, |z|)` of a lattice point.
    pub fn contains(&self, z: C64, tol: f64) -> bool {
        self.reduce(z).0.norm() <= tol * z.norm().max(1.0)
    }

    /// Lattice points with `|ω| <= radius`, sorted lexicographically by `(re, im)`.
    pub fn points_in_disk(&self, radius: f64) -> Vec<C64> {
        let row_gap = self.b1.norm() * self.tau.im;
        let nmax = (radius / row_gap).ceil() as i64 + 1;
        let mmax = (radius / self.b1.norm()).ceil() as i64 + 1;
        let mut out = Vec::new();
        for n in -nmax..=nmax {
            let shift = (self.tau.re * n as f64).round() as i64;
            for m in (-mmax - shift - 1)..=(mmax - shift + 1) {
                let w = self.b1 * m as f64 + self.b2 * n as f64;
                if w.norm() <= radius {
                    out.push(w);
                }
            }
        }
        out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        out
    }

    /// `(℘(z), ℘′(z))`, or `None` when `z` reduces exactly onto a lattice point.
    pub fn wp_pair(&self, z: C64) -> Option<(C64, C64)> {
        let (h, _) = self.reduce(z);
        if h.norm() == 0.0 {
            return None;
        }
        let k = self.k;
        let k2 = k * k;
        let k3 = k2 * k;
        let mut p = C64::new(0.0, 0.0);
        let mut dp = C64::new(0.0, 0.0);
        for m in -self.rows..=self.rows {
            let u = k * (h - self.b2 * m as f64);
            let (c2, cot) = csc2_cot(u);
            p += k2 * c2;
            dp += -2.0 * k3 * cot * c2;
        }
        Some((p - self.row_const, dp))
    }

    /// Distance from `z` to the nearest lattice point.
    pub fn distance_to_lattice(&self, z: C64) -> f64 {
        self.reduce(z).0.norm()
    }

    /// Snaps `z` onto the lattice when it lies within the snap tolerance.
    pub fn snap(&self, z: C64) -> Option<C64> {
        let (h, w) = self.reduce(z);
        (h.norm() <= LATTICE_SNAP * z.norm().max(1.0)).then_some(w)
    }

    /// Coefficients `c_j` of `h^{2j+2}` in `℘(h) - h^{-2}`, `j = 0, 1, ...`.
    pub fn laurent(&self) -> &[C64] {
        &self.laurent
    }
}

/// Lagrange reduction: `|b1| <= |b2|` and `|Re(b2/b1)| <= 1/2`, orientation kept.
fn reduce_basis(w1: C64, w2: C64) -> (C64, C64) {
    let (mut a, mut b) = (w1, w2);
    for _ in 0..200 {
        if b.norm() < a.norm() {
            // Swapping flips orientation; negate to keep Im(b/a) > 0.
            std::mem::swap(&mut a, &mut b);
            b = -b;
        }
        let m = (b / a).re.round();
        if m == 0.0 {
            break;
        }
        b -= a * m;
    }
    if (b / a).im < 0.0 {
        b = -b;
    }
    (a, b)
}

fn sigma(n: u32, p: i32) -> f64 {
    (1..=n).filter(|d| n % d == 0).map(|d| (d as f64).powi(p)).sum()
}

/// `exp(w) - 1` without cancellation near `w = 0`.
fn expm1(w: C64) -> C64 {
    let (s, c) = w.im.sin_cos();
    let half = (0.5 * w.im).sin();
    C64::new(w.re.exp_m1() * c - 2.0 * half * half, w.re.exp() * s)
}

/// `(csc² u, cot u)` via `q = exp(±2iu)` so large `|Im u|` neither overflows nor cancels.
fn csc2_cot(u: C64) -> (C64, C64) {
    let (v, sign) = if u.im >= 0.0 { (u, 1.0) } else { (-u, -1.0) };
    let two_iv = C64::new(0.0, 2.0) * v;
    let q = two_iv.exp();
    let one_minus_q = -expm1(two_iv);
    let csc2 = -4.0 * q / (one_minus_q * one_minus_q);
    let cot = C64::new(0.0, 1.0) * (q + 1.0) / (-one_minus_q);
    (csc2, cot * sign)
}

fn csc2(u: C64) -> C64 {
    csc2_cot(u).0
}

/// Laurent coefficients of `℘` at the origin from `g2`, `g3`.
fn laurent_coefficients(g2: C64, g3: C64, n: usize) -> Vec<C64> {
    // Classical indexing: ℘ = h^-2 + Σ_{k>=2} a_k h^{2k-2}.
    let mut a = vec![C64::new(0.0, 0.0); n + 2];
    a[2] = g2 / 20.0;
    if n + 2 > 3 {
        a[3] = g3 / 28.0;
    }
    for k in 4..n + 2 {
        let mut s = C64::new(0.0, 0.0);
        for m in 2..=k - 2 {
            s += a[m] * a[k - m];
        }
        a[k] = s * 3.0 / (((2 * k + 1) * (k - 3)) as f64);
    }
    a[2..].to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Square-lattice G4 = Γ(1/4)^8 / (960 π²).
    fn g4_square() -> f64 {
        let gamma_quarter: f64 = 3.625_609_908_221_908_3;
        gamma_quarter.powi(8) / (960.0 * PI * PI)
    }

    /// Direct lattice sum over |ω| <= 200 with the |ω|^-4 and |ω|^-6 tails restored.
    fn wp_oracle(z: C64) -> C64 {
        let r = 200i64;
        let mut sum = z.powi(-2);
        let mut s4 = C64::new(0.0, 0.0);
        let mut s6 = C64::new(0.0, 0.0);
        for m in -r..=r {
            for n in -r..=r {
                if (m, n) == (0, 0) || m * m + n * n > r * r {
                    continue;
                }
                let w = c(m as f64, n as f64);
                sum += (z - w).powi(-2) - w.powi(-2);
                s4 += w.powi(-4);
                s6 += w.powi(-6);
            }
        }
        let t4 = C64::new(g4_square(), 0.0) - s4;
        let t6 = -s6;
        sum + 3.0 * z * z * t4 + 5.0 * z.powi(4) * t6
    }

    #[test]
    fn square_lattice_invariants() {
        let lat = Lattice::square(c(1.0, 0.0)).unwrap();
        assert!((lat.g2().re - 60.0 * g4_square()).abs() < 1e-10);
        assert!((lat.g2().re - 189.072_720_129_234_03).abs() < 1e-9);
        assert!(lat.g3().norm() < 1e-10);
    }

    #[test]
    fn wp_matches_direct_sum() {
        let lat = Lattice::square(c(1.0, 0.0)).unwrap();
        for z in [c(0.3, 0.4), c(0.45, -0.1), c(0.05, 0.02), c(2.3, -1.6)] {
            let (p, _) = lat.wp_pair(z).unwrap();
            let o = wp_oracle(z - lat.nearest_point(z));
            assert!((p - o).norm() / o.norm() < 1e-10, "{z}: {p} vs {o}");
        }
    }

    #[test]
    fn wp_prime_matches_difference_quotient() {
        let lat = Lattice::new(c(1.3, 0.2), c(0.4, 1.1)).unwrap();
        let z = c(0.31, 0.27);
        let h = 1e-5;
        let f = |z: C64| lat.wp_pair(z).unwrap().0;
        let fd = (f(z + h) - f(z - h)) / (2.0 * h);
        let (_, dp) = lat.wp_pair(z).unwrap();
        assert!((fd - dp).norm() / dp.norm() < 1e-8);
    }

    #[test]
    fn differential_equation_holds() {
        let lat = Lattice::new(c(1.0, 0.3), c(-0.2, 0.9)).unwrap();
        for z in [c(0.1, 0.2), c(0.33, -0.41), c(1.7, 2.2)] {
            let (p, dp) = lat.wp_pair(z).unwrap();
            let lhs = dp * dp;
            let rhs = 4.0 * p * p * p - lat.g2() * p - lat.g3();
            assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + lhs.norm()));
        }
    }

    #[test]
    fn lattice_point_is_pole() {
        let lat = Lattice::square(c(1.0, 0.0)).unwrap();
        assert!(lat.wp_pair(c(0.0, 0.0)).is_none());
        assert!(lat.wp_pair(c(2.0, -3.0)).is_none());
    }

    #[test]
    fn disk_enumeration_counts() {
        let lat = Lattice::square(c(1.0, 0.0)).unwrap();
        assert_eq!(lat.points_in_disk(2.5).len(), 21);
        let skew = Lattice::new(c(1.0, 0.0), c(3.5, 0.8)).unwrap();
        let brute = {
            let mut n = 0;
            for m in -60i64..=60 {
                for k in -60i64..=60 {
                    if (c(1.0, 0.0) * m as f64 + c(3.5, 0.8) * k as f64).norm() <= 6.0 {
                        n += 1;
                    }
                }
            }
            n
        };
        assert_eq!(skew.points_in_disk(6.0).len(), brute);
    }

    #[test]
    fn laurent_recursion_matches_invariants() {
        let lat = Lattice::new(c(1.0, 0.1), c(0.3, 1.2)).unwrap();
        let l = lat.laurent();
        assert!((l[0] - lat.g2() / 20.0).norm() < 1e-12 * lat.g2().norm());
        assert!((l[2] - lat.g2() * lat.g2() / 1200.0).norm() < 1e-10 * l[2].norm().max(1.0));
        let h = c(0.02, 0.01);
        let series: C64 = h.powi(-2)
            + l.iter()
                .enumerate()
                .map(|(j, a)| a * h.powi(2 * j as i32 + 2))
                .sum::<C64>();
        let (p, _) = lat.wp_pair(h).unwrap();
        assert!((p - series).norm() / p.norm() < 1e-12);
    }

    #[test]
    fn rejects_degenerate_periods() {
        assert!(Lattice::new(c(1.0, 0.0), c(2.0, 0.0)).is_err());
        assert!(Lattice::new(c(0.0, 0.0), c(0.0, 1.0)).is_err());
    }
}
