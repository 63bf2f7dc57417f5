//! Truncated Laurent arithmetic with running magnitude bounds.
//!
//! A series lives in the scaled variable `t = h / rho`, `h = z - z0`, which keeps
//! coefficients inside `f64` range near clustered singularities. Each coefficient
//! carries a magnitude `mag_k` that bounds the sizes of the terms that produced it;
//! a coefficient is treated as zero when `|c_k| <= SERIES_ZERO_REL * mag_k`.
//! Leading zeros are stripped, so `low` is the numerical valuation.

use super::{Expr, Node};
use crate::error::{NevError, Result};
use crate::tolerances::{SERIES_TERMS, SERIES_ZERO_REL};
use crate::C64;

#[derive(Debug, Clone)]
pub(crate) struct Laurent {
    /// Exponent of `coef[0]`.
    pub low: i32,
    pub coef: Vec<C64>,
    pub mag: Vec<f64>,
    pub rho: f64,
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

impl Laurent {
    fn dense(low: i32, coef: Vec<C64>, mag: Vec<f64>, rho: f64) -> Laurent {
        Laurent { low, coef, mag, rho }.normalized()
    }

    fn constant(c: C64, rho: f64) -> Laurent {
        let mut coef = vec![zero(); SERIES_TERMS];
        let mut mag = vec![0.0; SERIES_TERMS];
        coef[0] = c;
        mag[0] = c.norm();
        Laurent::dense(0, coef, mag, rho)
    }

    fn var(z0: C64, rho: f64) -> Laurent {
        let mut coef = vec![zero(); SERIES_TERMS];
        let mut mag = vec![0.0; SERIES_TERMS];
        coef[0] = z0;
        // Absolute floor: a located point is only known to ~1e-16 of unit scale.
        mag[0] = z0.norm() + 1.0;
        coef[1] = C64::new(rho, 0.0);
        mag[1] = rho;
        Laurent::dense(0, coef, mag, rho)
    }

    /// Known coefficients cover exponents `low .. end()`.
    pub fn end(&self) -> i32 {
        self.low + self.coef.len() as i32
    }

    /// True when every known coefficient vanished numerically.
    pub fn is_zero(&self) -> bool {
        self.coef.is_empty()
    }

    /// Numerical valuation, `None` for a numerically vanishing series.
    pub fn valuation(&self) -> Option<i32> {
        (!self.coef.is_empty()).then_some(self.low)
    }

    /// Coefficient of `h^k` in the unscaled variable.
    pub fn coeff_h(&self, k: i32) -> C64 {
        if k < self.low || k >= self.end() {
            return zero();
        }
        self.coef[(k - self.low) as usize] * self.rho.powi(-k)
    }

    fn normalized(mut self) -> Laurent {
        let strip = self
            .coef
            .iter()
            .zip(&self.mag)
            .take_while(|(c, m)| c.norm() <= SERIES_ZERO_REL * **m)
            .count();
        if strip > 0 {
            self.coef.drain(..strip);
            self.mag.drain(..strip);
            self.low += strip as i32;
        }
        self
    }

    fn at(&self, k: i32) -> (C64, f64) {
        if k < self.low {
            return (zero(), 0.0);
        }
        let i = (k - self.low) as usize;
        (self.coef[i], self.mag[i])
    }

    pub fn add(&self, o: &Laurent) -> Laurent {
        let low = self.low.min(o.low);
        let end = self.end().min(o.end());
        if end <= low {
            return Laurent::dense(end, vec![], vec![], self.rho);
        }
        let (coef, mag) = (low..end)
            .map(|k| {
                let (a, ma) = self.at(k);
                let (b, mb) = o.at(k);
                (a + b, ma + mb)
            })
            .unzip();
        Laurent::dense(low, coef, mag, self.rho)
    }

    pub fn mul(&self, o: &Laurent) -> Laurent {
        let n = self.coef.len().min(o.coef.len());
        let mut coef = vec![zero(); n];
        let mut mag = vec![0.0; n];
        for k in 0..n {
            for i in 0..=k {
                coef[k] += self.coef[i] * o.coef[k - i];
                mag[k] += self.mag[i] * o.mag[k - i];
            }
        }
        if n == 0 {
            return Laurent::dense(self.end().min(o.end()).max(self.low + o.low), coef, mag, self.rho);
        }
        Laurent::dense(self.low + o.low, coef, mag, self.rho)
    }

    pub fn inv(&self) -> Result<Laurent> {
        if self.is_zero() {
            return Err(NevError::ExpansionFailure(
                "reciprocal of a numerically vanishing series".into(),
            ));
        }
        let n = self.coef.len();
        let a0 = self.coef[0];
        let a0n = a0.norm();
        let mut b = vec![zero(); n];
        let mut mb = vec![0.0; n];
        b[0] = C64::new(1.0, 0.0) / a0;
        mb[0] = self.mag[0] / (a0n * a0n);
        for k in 1..n {
            let mut s = zero();
            let mut ms = 0.0;
            for j in 1..=k {
                s += self.coef[j] * b[k - j];
                ms += self.mag[j] * mb[k - j];
            }
            b[k] = -s / a0;
            mb[k] = (ms + self.mag[0] * b[k].norm()) / a0n;
        }
        Ok(Laurent::dense(-self.low, b, mb, self.rho))
    }

    pub fn powi(&self, k: i32) -> Result<Laurent> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = Laurent::constant(C64::new(1.0, 0.0), self.rho);
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul(&sq);
            }
        }
        Ok(acc)
    }

    /// Dense Taylor coefficients from exponent 0, for compositions with entire functions.
    fn taylor(&self) -> Result<(Vec<C64>, Vec<f64>)> {
        if !self.is_zero() && self.low < 0 {
            return Err(NevError::ExpansionFailure(
                "essential singularity: entire function of a pole".into(),
            ));
        }
        let n = (self.end().max(0) as usize).min(SERIES_TERMS);
        let mut c = vec![zero(); n];
        let mut m = vec![0.0; n];
        for k in self.low.max(0)..n as i32 {
            let (a, ma) = self.at(k);
            c[k as usize] = a;
            m[k as usize] = ma;
        }
        Ok((c, m))
    }

    pub fn exp(&self) -> Result<Laurent> {
        let (u, mu) = self.taylor()?;
        let n = u.len();
        if n == 0 {
            return Ok(Laurent::dense(0, vec![], vec![], self.rho));
        }
        let mut b = vec![zero(); n];
        let mut mb = vec![0.0; n];
        b[0] = u[0].exp();
        mb[0] = b[0].norm() * (1.0 + mu[0]);
        for k in 1..n {
            let mut s = zero();
            let mut ms = 0.0;
            for j in 1..=k {
                s += u[j] * b[k - j] * j as f64;
                ms += mu[j] * mb[k - j] * j as f64;
            }
            b[k] = s / k as f64;
            mb[k] = ms / k as f64;
        }
        Ok(Laurent::dense(0, b, mb, self.rho))
    }

    /// `(sin u, cos u)`.
    pub fn sin_cos(&self) -> Result<(Laurent, Laurent)> {
        let (u, mu) = self.taylor()?;
        let n = u.len();
        if n == 0 {
            let e = Laurent::dense(0, vec![], vec![], self.rho);
            return Ok((e.clone(), e));
        }
        let mut s = vec![zero(); n];
        let mut c = vec![zero(); n];
        let mut ms = vec![0.0; n];
        let mut mc = vec![0.0; n];
        s[0] = u[0].sin();
        c[0] = u[0].cos();
        ms[0] = s[0].norm() + c[0].norm() * mu[0];
        mc[0] = c[0].norm() + s[0].norm() * mu[0];
        for k in 1..n {
            let (mut a, mut b, mut ma, mut mbv) = (zero(), zero(), 0.0, 0.0);
            for j in 1..=k {
                let w = j as f64;
                a += u[j] * c[k - j] * w;
                b += u[j] * s[k - j] * w;
                ma += mu[j] * mc[k - j] * w;
                mbv += mu[j] * ms[k - j] * w;
            }
            s[k] = a / k as f64;
            c[k] = -b / k as f64;
            ms[k] = ma / k as f64;
            mc[k] = mbv / k as f64;
        }
        Ok((Laurent::dense(0, s, ms, self.rho), Laurent::dense(0, c, mc, self.rho)))
    }

    /// Derivative with respect to `h`.
    pub fn derivative(&self) -> Laurent {
        let rho = self.rho;
        let mut coef = Vec::new();
        let mut mag = Vec::new();
        for (i, (c, m)) in self.coef.iter().zip(&self.mag).enumerate() {
            let k = self.low + i as i32;
            if k == 0 {
                if i == 0 {
                    continue;
                }
                coef.push(zero());
                mag.push(0.0);
                continue;
            }
            coef.push(c * k as f64 / rho);
            mag.push(m * (k as f64).abs() / rho);
        }
        let low = if self.low == 0 { 0 } else { self.low - 1 };
        Laurent::dense(low, coef, mag, rho)
    }
}

fn wp_series(lat: &super::Lattice, z0: C64, rho: f64, n: usize) -> Laurent {
    if lat.snap(z0).is_some() {
        let laurent = lat.laurent();
        let mut coef = vec![zero(); n];
        let mut mag = vec![0.0; n];
        coef[0] = C64::new(rho.powi(-2), 0.0);
        mag[0] = rho.powi(-2);
        for (j, a) in laurent.iter().enumerate() {
            let idx = 2 * j + 4;
            if idx >= n {
                break;
            }
            coef[idx] = a * rho.powi(2 * j as i32 + 2);
            mag[idx] = coef[idx].norm();
        }
        return Laurent {
            low: -2,
            coef,
            mag,
            rho,
        }
        .normalized();
    }
    let (p0, p1) = lat.wp_pair(z0).expect("regular point");
    let g2 = lat.g2();
    let p2 = 6.0 * p0 * p0 - g2 / 2.0;
    let spread = 1.0 + z0.norm();
    let mut q = vec![zero(); n];
    let mut mq = vec![0.0; n];
    q[0] = p0;
    mq[0] = p0.norm() + p1.norm() * spread;
    if n > 1 {
        q[1] = p1 * rho;
        mq[1] = (p1.norm() + p2.norm() * spread) * rho;
    }
    for k in 0..n.saturating_sub(2) {
        let mut s = zero();
        let mut ms = 0.0;
        for i in 0..=k {
            s += q[i] * q[k - i];
            ms += mq[i] * mq[k - i];
        }
        s *= 6.0;
        ms *= 6.0;
        if k == 0 {
            s -= g2 / 2.0;
            ms += g2.norm() / 2.0;
        }
        let d = ((k + 2) * (k + 1)) as f64;
        q[k + 2] = s * rho * rho / d;
        mq[k + 2] = ms * rho * rho / d;
    }
    Laurent {
        low: 0,
        coef: q,
        mag: mq,
        rho,
    }
    .normalized()
}

/// Laurent series of `e` at `z0` in the variable `t = (z - z0) / rho`.
pub(crate) fn series(e: &Expr, z0: C64, rho: f64) -> Result<Laurent> {
    match e.node() {
        Node::Const(c) => Ok(Laurent::constant(*c, rho)),
        Node::Var => Ok(Laurent::var(z0, rho)),
        Node::Add(a, b) => Ok(series(a, z0, rho)?.add(&series(b, z0, rho)?)),
        Node::Mul(a, b) => Ok(series(a, z0, rho)?.mul(&series(b, z0, rho)?)),
        Node::Div(a, b) => Ok(series(a, z0, rho)?.mul(&series(b, z0, rho)?.inv()?)),
        Node::IntPow(a, k) => series(a, z0, rho)?.powi(*k),
        Node::Exp(a) => series(a, z0, rho)?.exp(),
        Node::Sin(a) => Ok(series(a, z0, rho)?.sin_cos()?.0),
        Node::Cos(a) => Ok(series(a, z0, rho)?.sin_cos()?.1),
        Node::WeierstrassP(l) => Ok(wp_series(l, z0, rho, SERIES_TERMS)),
        Node::WeierstrassPPrime(l) => Ok(wp_series(l, z0, rho, SERIES_TERMS + 1).derivative()),
        Node::Shift(a, s) => series(a, z0 + s, rho),
    }
}
