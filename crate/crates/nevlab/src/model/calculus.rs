//! Symbolic derivative, shift and forward difference.
//!
//! The difference is built structurally rather than as `S f - f`: each rule
//! rewrites `f(z+c) - f(z)` so that cancellations happen symbolically. Periodic
//! factors drop out exactly (`Δ_ω ℘ = 0`) and `Δ_c e^z` becomes `(e^c - 1) e^z`,
//! which keeps series valuations and quadrature free of catastrophic cancellation.

use super::{Expr, Node};
use crate::error::{NevError, Result};
use crate::C64;

const PERIOD_TOL: f64 = 1e-12;

/// True when `e(z + c) = e(z)` follows from lattice periods alone.
fn invariant_under(e: &Expr, c: C64) -> bool {
    match e.node() {
        Node::Const(_) => true,
        Node::Var => false,
        Node::WeierstrassP(l) | Node::WeierstrassPPrime(l) => l.contains(c, PERIOD_TOL),
        Node::Add(a, b) | Node::Mul(a, b) | Node::Div(a, b) => invariant_under(a, c) && invariant_under(b, c),
        Node::IntPow(a, _) | Node::Exp(a) | Node::Sin(a) | Node::Cos(a) | Node::Shift(a, _) => invariant_under(a, c),
    }
}

pub(super) fn shift(e: &Expr, c: C64) -> Expr {
    if c == C64::new(0.0, 0.0) || invariant_under(e, c) {
        return e.clone();
    }
    match e.node() {
        Node::Shift(inner, s) => shift(inner, s + c),
        _ => Expr::wrap(Node::Shift(e.clone(), c)),
    }
}

pub(super) fn differentiate(e: &Expr) -> Expr {
    match e.node() {
        Node::Const(_) => Expr::real(0.0),
        Node::Var => Expr::real(1.0),
        Node::Add(a, b) => differentiate(a).add(&differentiate(b)),
        Node::Mul(a, b) => differentiate(a).mul(b).add(&a.mul(&differentiate(b))),
        Node::Div(a, b) => {
            let num = differentiate(a).mul(b).sub(&a.mul(&differentiate(b)));
            num.div_unchecked(&b.powi(2))
        }
        Node::IntPow(u, k) => u.powi(k - 1).scale(C64::new(*k as f64, 0.0)).mul(&differentiate(u)),
        Node::Exp(u) => e.mul(&differentiate(u)),
        Node::Sin(u) => u.cos().mul(&differentiate(u)),
        Node::Cos(u) => u.sin().neg().mul(&differentiate(u)),
        Node::WeierstrassP(l) => Expr::wpp(l),
        Node::WeierstrassPPrime(l) => Expr::wp(l)
            .powi(2)
            .scale(C64::new(6.0, 0.0))
            .sub(&Expr::constant(l.g2() / 2.0)),
        Node::Shift(f, s) => shift(&differentiate(f), *s),
    }
}

/// One structural forward difference `f(z+c) - f(z)`.
fn delta(e: &Expr, c: C64) -> Expr {
    if invariant_under(e, c) {
        return Expr::real(0.0);
    }
    let half = C64::new(0.5, 0.0);
    match e.node() {
        Node::Const(_) => Expr::real(0.0),
        Node::Var => Expr::constant(c),
        Node::Add(a, b) => delta(a, c).add(&delta(b, c)),
        Node::Mul(a, b) => delta(a, c).mul(&shift(b, c)).add(&a.mul(&delta(b, c))),
        Node::Div(a, b) => {
            let sb = shift(b, c);
            let first = delta(a, c).div_unchecked(&sb);
            let second = a.mul(&delta(b, c)).div_unchecked(&b.mul(&sb));
            first.sub(&second)
        }
        Node::IntPow(u, k) if *k > 0 => {
            let su = shift(u, c);
            let mut sum = Expr::real(0.0);
            for j in 0..*k {
                sum = sum.add(&su.powi(j).mul(&u.powi(k - 1 - j)));
            }
            delta(u, c).mul(&sum)
        }
        Node::IntPow(u, k) => {
            let w = u.powi(-k);
            delta(&w, c).div_unchecked(&w.mul(&shift(&w, c))).neg()
        }
        Node::Exp(u) => {
            let du = delta(u, c);
            match du.as_const() {
                Some(d) => e.scale(d.exp() - 1.0),
                None => e.mul(&du.exp().sub(&Expr::real(1.0))),
            }
        }
        Node::Sin(u) => {
            let mid = shift(u, c).add(u).scale(half);
            let s = delta(u, c).scale(half).sin();
            mid.cos().mul(&s).scale(C64::new(2.0, 0.0))
        }
        Node::Cos(u) => {
            let mid = shift(u, c).add(u).scale(half);
            let s = delta(u, c).scale(half).sin();
            mid.sin().mul(&s).scale(C64::new(-2.0, 0.0))
        }
        Node::WeierstrassP(_) | Node::WeierstrassPPrime(_) => shift(e, c).sub(e),
        Node::Shift(f, s) => shift(&delta(f, c), *s),
    }
}

pub(super) fn difference(e: &Expr, c: C64, n: usize) -> Result<Expr> {
    if n >= 1 && c == C64::new(0.0, 0.0) {
        return Err(NevError::InvalidParameter("difference step c must be nonzero".into()));
    }
    Ok((0..n).fold(e.clone(), |f, _| delta(&f, c)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{probe_points, Lattice};
    use std::sync::Arc;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Richardson-extrapolated central difference with step 1e-5.
    fn fd_derivative(f: &Expr, z: C64) -> C64 {
        let d = |h: f64| (f.eval(z + h) - f.eval(z - h)) / (2.0 * h);
        (4.0 * d(5e-6) - d(1e-5)) / 3.0
    }

    #[test]
    fn elementary_derivatives() {
        let z = Expr::z();
        let p = c(0.3, -0.7);
        assert!((z.powi(2).differentiate().eval(p) - 2.0 * p).norm() < 1e-15);
        assert!((z.exp().differentiate().eval(p) - p.exp()).norm() < 1e-15);
    }

    #[test]
    fn shifted_derivative_matches_finite_difference() {
        let z = Expr::z();
        let f = z.sin().mul(&z.exp()).shift(c(0.4, 0.1));
        let df = f.differentiate();
        for p in probe_points(10, 2.0, 11) {
            let fd = fd_derivative(&f, p);
            assert!((df.eval(p) - fd).norm() <= 1e-8 * (1.0 + fd.norm()), "{p}");
        }
    }

    #[test]
    fn wp_second_derivative() {
        let lat = Arc::new(Lattice::square(c(1.0, 0.0)).unwrap());
        let f = Expr::wpp(&lat);
        let df = f.differentiate();
        let p = c(0.31, 0.22);
        let fd = fd_derivative(&f, p);
        assert!((df.eval(p) - fd).norm() <= 1e-7 * fd.norm());
    }

    #[test]
    fn quadratic_difference() {
        let z = Expr::z();
        let step = c(0.7, -0.3);
        let d = z.powi(2).difference(step, 1).unwrap();
        for p in probe_points(5, 3.0, 3) {
            let want = 2.0 * step * p + step * step;
            assert!((d.eval(p) - want).norm() < 1e-13);
        }
    }

    #[test]
    fn exponential_difference_is_structural() {
        let z = Expr::z();
        let d = z.exp().difference(c(1.0, 0.0), 2).unwrap();
        let p = c(-40.0, 3.0);
        let want = (c(1.0, 0.0).exp() - 1.0).powi(2) * p.exp();
        assert!((d.eval(p) - want).norm() <= 1e-14 * want.norm());
    }

    #[test]
    fn periodic_part_cancels() {
        let lat = Arc::new(Lattice::square(c(1.0, 0.0)).unwrap());
        let z = Expr::z();
        let f = z.exp().add(&z.mul(&Expr::wp(&lat)));
        let d2 = f.difference(c(1.0, 0.0), 2).unwrap();
        let e2 = z.exp().difference(c(1.0, 0.0), 2).unwrap();
        for p in probe_points(10, 3.0, 5) {
            assert!((d2.eval(p) - e2.eval(p)).norm() <= 1e-12 * e2.eval(p).norm());
        }
        assert!(matches!(d2.node(), Node::Mul(_, _)));
    }

    #[test]
    fn shift_composition_and_zero_step() {
        let z = Expr::z();
        let f = z.sin().shift(c(0.5, 0.0)).shift(c(0.25, 1.0));
        match f.node() {
            Node::Shift(_, s) => assert_eq!(*s, c(0.75, 1.0)),
            _ => panic!("expected a shift node"),
        }
        assert!(matches!(z.sin().shift(c(0.0, 0.0)).node(), Node::Sin(_)));
        assert!(z.difference(c(0.0, 0.0), 1).is_err());
        assert!(matches!(z.difference(c(0.0, 0.0), 0).unwrap().node(), Node::Var));
    }
}
