//! Point evaluation in a scaled representation `m · e^s`.
//!
//! Values of `exp(exp(z))` overflow `f64` long before their logarithm does, so
//! every node carries its magnitude exponent separately. Poles surface as
//! non-finite mantissas.

use super::{EvalResult, Expr, Lattice, Node};
use crate::tolerances::{NEAR_SINGULAR, OVERFLOW_GUARD};
use crate::C64;
use std::sync::Arc;

/// Mantissas are renormalised when their modulus leaves `[1/BIG, BIG]`.
const BIG: f64 = 1e150;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Sc {
    pub m: C64,
    pub s: f64,
}

impl Sc {
    fn plain(v: C64) -> Sc {
        Sc { m: v, s: 0.0 }
    }

    fn infinite() -> Sc {
        Sc {
            m: C64::new(f64::INFINITY, 0.0),
            s: 0.0,
        }
    }

    fn is_finite(&self) -> bool {
        self.m.is_finite() && self.s.is_finite()
    }

    fn normalized(self) -> Sc {
        let a = self.m.norm();
        if a == 0.0 || !a.is_finite() || (a < BIG && a > 1.0 / BIG) {
            return self;
        }
        Sc {
            m: self.m / a,
            s: self.s + a.ln(),
        }
    }

    pub fn to_c64(self) -> C64 {
        if !self.is_finite() {
            return Sc::infinite().m;
        }
        if self.s == 0.0 {
            return self.m;
        }
        self.m * self.s.exp()
    }

    pub fn log_abs(self) -> f64 {
        if !self.m.is_finite() {
            return f64::INFINITY;
        }
        self.m.norm().ln() + self.s
    }

    fn add(self, o: Sc) -> Sc {
        if !self.is_finite() || !o.is_finite() {
            return Sc::infinite();
        }
        if self.s == o.s {
            return Sc {
                m: self.m + o.m,
                s: self.s,
            }
            .normalized();
        }
        let (big, small) = if self.s > o.s { (self, o) } else { (o, self) };
        let d = small.s - big.s;
        if d < -1400.0 {
            return big;
        }
        Sc {
            m: big.m + small.m * d.exp(),
            s: big.s,
        }
        .normalized()
    }

    fn mul(self, o: Sc) -> Sc {
        if !self.is_finite() || !o.is_finite() {
            return Sc::infinite();
        }
        Sc {
            m: self.m * o.m,
            s: self.s + o.s,
        }
        .normalized()
    }

    fn div(self, o: Sc) -> Sc {
        if !o.is_finite() {
            return if self.is_finite() {
                Sc::plain(C64::new(0.0, 0.0))
            } else {
                Sc::infinite()
            };
        }
        if !self.is_finite() || o.m.norm() == 0.0 {
            return Sc::infinite();
        }
        Sc {
            m: self.m / o.m,
            s: self.s - o.s,
        }
        .normalized()
    }

    fn powi(self, k: i32) -> Sc {
        if !self.is_finite() {
            return if k < 0 {
                Sc::plain(C64::new(0.0, 0.0))
            } else {
                Sc::infinite()
            };
        }
        let a = self.m.norm();
        if a == 0.0 {
            return if k < 0 { Sc::infinite() } else { self };
        }
        let unit = self.m / a;
        Sc {
            m: unit.powi(k),
            s: (self.s + a.ln()) * k as f64,
        }
        .normalized()
    }

    fn exp(self) -> Sc {
        let u = self.to_c64();
        if !u.is_finite() {
            return Sc::infinite();
        }
        Sc {
            m: C64::from_polar(1.0, u.im),
            s: u.re,
        }
    }

    /// `sin` when `cos = false`, `cos` otherwise, with exponential asymptotics for large `|Im u|`.
    fn trig(self, cos: bool) -> Sc {
        let u = self.to_c64();
        if !u.is_finite() {
            return Sc::infinite();
        }
        if u.im.abs() < 600.0 {
            return Sc::plain(if cos { u.cos() } else { u.sin() });
        }
        // One exponential dominates: e^{-iu} when Im u > 0, e^{iu} otherwise.
        let (phase, s) = if u.im > 0.0 { (-u.re, u.im) } else { (u.re, -u.im) };
        let unit = C64::from_polar(0.5, phase);
        let m = if cos {
            unit
        } else if u.im > 0.0 {
            C64::new(0.0, 1.0) * unit
        } else {
            C64::new(0.0, -1.0) * unit
        };
        Sc { m, s }
    }
}

/// Memo for `(℘, ℘′)` at one point per lattice.
struct Ctx {
    near: bool,
    cache: Vec<(*const Lattice, C64, Option<(C64, C64)>)>,
}

impl Ctx {
    fn new() -> Ctx {
        Ctx {
            near: false,
            cache: Vec::new(),
        }
    }

    fn wp(&mut self, lat: &Arc<Lattice>, z: C64) -> Option<(C64, C64)> {
        let key = Arc::as_ptr(lat);
        if let Some(hit) = self.cache.iter().find(|(p, w, _)| *p == key && *w == z) {
            return hit.2;
        }
        let d = lat.distance_to_lattice(z);
        if d > 0.0 && d < NEAR_SINGULAR {
            self.near = true;
        }
        let v = lat.wp_pair(z);
        self.cache.push((key, z, v));
        v
    }
}

fn go(e: &Expr, z: C64, ctx: &mut Ctx) -> Sc {
    match e.node() {
        Node::Const(c) => Sc::plain(*c),
        Node::Var => Sc::plain(z),
        Node::Add(a, b) => go(a, z, ctx).add(go(b, z, ctx)),
        Node::Mul(a, b) => go(a, z, ctx).mul(go(b, z, ctx)),
        Node::Div(a, b) => go(a, z, ctx).div(go(b, z, ctx)),
        Node::IntPow(a, k) => go(a, z, ctx).powi(*k),
        Node::Exp(a) => go(a, z, ctx).exp(),
        Node::Sin(a) => go(a, z, ctx).trig(false),
        Node::Cos(a) => go(a, z, ctx).trig(true),
        Node::WeierstrassP(l) => ctx.wp(l, z).map_or(Sc::infinite(), |v| Sc::plain(v.0)),
        Node::WeierstrassPPrime(l) => ctx.wp(l, z).map_or(Sc::infinite(), |v| Sc::plain(v.1)),
        Node::Shift(a, c) => go(a, z + c, ctx),
    }
}

pub(crate) fn eval_scaled(e: &Expr, z: C64) -> Sc {
    go(e, z, &mut Ctx::new())
}

pub(crate) fn evaluate(e: &Expr, z: C64) -> EvalResult {
    let mut ctx = Ctx::new();
    let v = go(e, z, &mut ctx);
    if !v.is_finite() || v.m.re.is_nan() || v.m.im.is_nan() {
        return EvalResult::PoleLike;
    }
    if v.log_abs() > OVERFLOW_GUARD.ln() {
        return EvalResult::PoleLike;
    }
    if ctx.near {
        return EvalResult::NearSingular;
    }
    EvalResult::Finite(v.to_c64())
}

pub(crate) fn eval_raw(e: &Expr, z: C64) -> C64 {
    eval_scaled(e, z).to_c64()
}

pub(crate) fn quotient(num: &Expr, den: &Expr, z: C64) -> C64 {
    let mut ctx = Ctx::new();
    let a = go(num, z, &mut ctx);
    let b = go(den, z, &mut ctx);
    a.div(b).to_c64()
}

pub(crate) fn log_abs(e: &Expr, z: C64) -> f64 {
    let v = eval_scaled(e, z);
    if v.m.re.is_nan() || v.m.im.is_nan() {
        return f64::INFINITY;
    }
    v.log_abs()
}
