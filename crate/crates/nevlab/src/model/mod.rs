//! Expression trees for closed-form meromorphic functions.
//!
//! An [`Expr`] is an immutable, reference-counted tree. Constructors fold
//! constants (`0 + x`, `1 * x`, `const ∘ const`) and compose shifts; nothing
//! else is simplified, so equality of functions is always judged numerically.

mod calculus;
mod eval;
mod expansion;
mod lattice;
mod parse;
pub(crate) mod series;

pub use expansion::{cauchy_coefficients, local_expansion, LocalExpansion};
pub use lattice::Lattice;
pub use parse::{parse, parse_with, ParseContext};

use crate::error::{NevError, Result};
use crate::tolerances::{DIV_PROBES, DIV_ZERO_PROBE, PROBE_SEED};
use crate::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::sync::Arc;

#[derive(Debug)]
pub enum Node {
    Const(C64),
    Var,
    Add(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    /// Exponent is never zero.
    IntPow(Expr, i32),
    Exp(Expr),
    Sin(Expr),
    Cos(Expr),
    WeierstrassP(Arc<Lattice>),
    WeierstrassPPrime(Arc<Lattice>),
    /// `f(z + offset)`; never nested, offset never zero.
    Shift(Expr, C64),
}

#[derive(Clone)]
pub struct Expr(Arc<Node>);

/// Outcome of a point evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvalResult {
    Finite(C64),
    PoleLike,
    NearSingular,
}

impl EvalResult {
    pub fn finite(self) -> Option<C64> {
        match self {
            EvalResult::Finite(v) => Some(v),
            _ => None,
        }
    }
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

impl Expr {
    fn wrap(node: Node) -> Expr {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    /// The independent variable `z`.
    pub fn z() -> Expr {
        Expr::wrap(Node::Var)
    }

    pub fn constant(c: impl Into<C64>) -> Expr {
        Expr::wrap(Node::Const(c.into()))
    }

    pub fn real(x: f64) -> Expr {
        Expr::constant(C64::new(x, 0.0))
    }

    pub fn wp(lattice: &Arc<Lattice>) -> Expr {
        Expr::wrap(Node::WeierstrassP(lattice.clone()))
    }

    pub fn wpp(lattice: &Arc<Lattice>) -> Expr {
        Expr::wrap(Node::WeierstrassPPrime(lattice.clone()))
    }

    pub fn as_const(&self) -> Option<C64> {
        match self.node() {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(zero())
    }

    pub fn add(&self, other: &Expr) -> Expr {
        match (self.as_const(), other.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a + b),
            (Some(a), _) if a == zero() => other.clone(),
            (_, Some(b)) if b == zero() => self.clone(),
            _ => Expr::wrap(Node::Add(self.clone(), other.clone())),
        }
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Expr {
        Expr::real(-1.0).mul(self)
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        match (self.as_const(), other.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a * b),
            (Some(a), _) if a == zero() => Expr::constant(zero()),
            (_, Some(b)) if b == zero() => Expr::constant(zero()),
            (Some(a), _) if a == one() => other.clone(),
            (_, Some(b)) if b == one() => self.clone(),
            (None, Some(_)) => other.mul(self),
            (Some(a), None) => match other.node() {
                Node::Mul(l, r) if l.as_const().is_some() => Expr::constant(a * l.as_const().unwrap()).mul(r),
                _ => Expr::wrap(Node::Mul(self.clone(), other.clone())),
            },
            _ => Expr::wrap(Node::Mul(self.clone(), other.clone())),
        }
    }

    pub fn scale(&self, c: C64) -> Expr {
        Expr::constant(c).mul(self)
    }

    /// Quotient; fails when the denominator vanishes at every probe point.
    pub fn div(&self, den: &Expr) -> Result<Expr> {
        if den.is_zero() || den.vanishes_at_probes() {
            return Err(NevError::InvalidInput("denominator is identically zero".into()));
        }
        Ok(self.div_unchecked(den))
    }

    /// Quotient without the identically-zero probe; callers guarantee `den ≢ 0`.
    pub(crate) fn div_unchecked(&self, den: &Expr) -> Expr {
        match (self.as_const(), den.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a / b),
            (Some(a), _) if a == zero() => Expr::constant(zero()),
            (_, Some(b)) if b == one() => self.clone(),
            (_, Some(b)) => self.scale(one() / b),
            _ => Expr::wrap(Node::Div(self.clone(), den.clone())),
        }
    }

    /// Integer power; `k = 0` yields the constant 1.
    pub fn powi(&self, k: i32) -> Expr {
        if k == 0 {
            return Expr::constant(one());
        }
        if k == 1 {
            return self.clone();
        }
        if let Some(c) = self.as_const() {
            return Expr::constant(c.powi(k));
        }
        match self.node() {
            Node::IntPow(u, j) => u.powi(j * k),
            _ => Expr::wrap(Node::IntPow(self.clone(), k)),
        }
    }

    pub fn exp(&self) -> Expr {
        match self.as_const() {
            Some(c) => Expr::constant(c.exp()),
            None => Expr::wrap(Node::Exp(self.clone())),
        }
    }

    pub fn sin(&self) -> Expr {
        match self.as_const() {
            Some(c) => Expr::constant(c.sin()),
            None => Expr::wrap(Node::Sin(self.clone())),
        }
    }

    pub fn cos(&self) -> Expr {
        match self.as_const() {
            Some(c) => Expr::constant(c.cos()),
            None => Expr::wrap(Node::Cos(self.clone())),
        }
    }

    /// `f(z + c)` with shift composition and removal of trivial shifts.
    pub fn shift(&self, c: C64) -> Expr {
        calculus::shift(self, c)
    }

    pub fn differentiate(&self) -> Expr {
        calculus::differentiate(self)
    }

    /// `n`-th derivative.
    pub fn derivative(&self, n: usize) -> Expr {
        (0..n).fold(self.clone(), |f, _| f.differentiate())
    }

    /// `Δ_c^n f`; `c = 0` with `n >= 1` is rejected.
    pub fn difference(&self, c: C64, n: usize) -> Result<Expr> {
        calculus::difference(self, c, n)
    }

    /// Evaluation with pole and near-singularity reporting.
    pub fn evaluate(&self, z: C64) -> EvalResult {
        eval::evaluate(self, z)
    }

    /// Raw value; poles give non-finite numbers.
    pub fn eval(&self, z: C64) -> C64 {
        eval::eval_raw(self, z)
    }

    /// `log |f(z)|` computed without overflow; `-inf` at zeros, `+inf` at poles.
    pub fn log_abs(&self, z: C64) -> f64 {
        eval::log_abs(self, z)
    }

    /// `self(z) / den(z)` evaluated in scaled form, so both may overflow separately.
    pub fn eval_quotient(&self, den: &Expr, z: C64) -> C64 {
        eval::quotient(self, den, z)
    }

    /// All lattices referenced by the tree, deduplicated by pointer.
    pub fn lattices(&self) -> Vec<Arc<Lattice>> {
        let mut out: Vec<Arc<Lattice>> = Vec::new();
        self.visit(&mut |n| {
            if let Node::WeierstrassP(l) | Node::WeierstrassPPrime(l) = n {
                if !out.iter().any(|o| Arc::ptr_eq(o, l)) {
                    out.push(l.clone());
                }
            }
        });
        out
    }

    /// True when `z` does not occur in the tree.
    pub fn is_constant_expr(&self) -> bool {
        let mut found = false;
        self.visit(&mut |n| {
            if matches!(n, Node::Var | Node::WeierstrassP(_) | Node::WeierstrassPPrime(_)) {
                found = true;
            }
        });
        !found
    }

    /// Number of nodes, counting shared subtrees each time they occur.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    fn visit(&self, f: &mut dyn FnMut(&Node)) {
        f(self.node());
        match self.node() {
            Node::Add(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Node::IntPow(a, _) | Node::Exp(a) | Node::Sin(a) | Node::Cos(a) | Node::Shift(a, _) => a.visit(f),
            _ => {}
        }
    }

    fn vanishes_at_probes(&self) -> bool {
        probe_points(DIV_PROBES, 3.0, PROBE_SEED)
            .into_iter()
            .all(|z| self.log_abs(z) <= DIV_ZERO_PROBE.ln())
    }
}

/// Deterministic pseudorandom points in the disk of the given radius.
pub fn probe_points(n: usize, radius: f64, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let rho = radius * rng.gen::<f64>().sqrt();
            let phi = std::f64::consts::TAU * rng.gen::<f64>();
            C64::from_polar(rho, phi)
        })
        .collect()
}

impl std::ops::Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        Expr::add(self, rhs)
    }
}

impl std::ops::Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        Expr::sub(self, rhs)
    }
}

impl std::ops::Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        Expr::mul(self, rhs)
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

fn fmt_const(c: C64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if c.im == 0.0 {
        write!(f, "({})", c.re)
    } else if c.re == 0.0 {
        write!(f, "({}*i)", c.im)
    } else {
        write!(f, "({}+{}*i)", c.re, c.im)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) => fmt_const(*c, f),
            Node::Var => write!(f, "z"),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Mul(a, b) => write!(f, "({a} * {b})"),
            Node::Div(a, b) => write!(f, "({a} / {b})"),
            Node::IntPow(a, k) => write!(f, "{a}^({k})"),
            Node::Exp(a) => write!(f, "exp({a})"),
            Node::Sin(a) => write!(f, "sin({a})"),
            Node::Cos(a) => write!(f, "cos({a})"),
            Node::WeierstrassP(_) => write!(f, "wp(z)"),
            Node::WeierstrassPPrime(_) => write!(f, "wpp(z)"),
            Node::Shift(a, c) => {
                write!(f, "shift({a}, ")?;
                fmt_const(*c, f)?;
                write!(f, ")")
            }
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
