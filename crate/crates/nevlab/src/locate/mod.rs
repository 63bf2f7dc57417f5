//! Zeros, poles and `a`-points inside a disk.
//!
//! Poles come from structure ([`structural_singularities`]). Zeros of `f - a` come
//! from a quadtree driven by the argument principle: a cell holds
//! `W + P` zeros, where `W` is the boundary winding of `g'/g` and `P` the known
//! pole count inside. Polynomials short-circuit to companion-matrix roots.

mod structural;
mod winding;

pub use structural::{as_polynomial, pole_order, polynomial_roots, structural_singularities, StructuralPoles};
pub use winding::{argument_principle_count, Rect};

use crate::error::{NevError, Result};
use crate::model::series::series;
use crate::model::{Expr, Node};
use crate::tolerances::{MERGE_TOL, SERIES_RHO};
use crate::C64;
use serde::Serialize;

/// What is being located.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Target {
    /// Points with `f(z) = a`.
    Value(C64),
    Pole,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Kind {
    ZeroOf(C64),
    Pole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Provenance {
    Structural,
    Numeric,
}

/// A located point with multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingularRecord {
    pub location: C64,
    pub order: u32,
    pub kind: Kind,
    pub provenance: Provenance,
}

/// Closed disk `|z - center| <= radius`; the center is always 0 here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiskSpec {
    pub center: C64,
    pub radius: f64,
}

impl DiskSpec {
    pub fn new(radius: f64) -> Result<DiskSpec> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(NevError::InvalidParameter("disk radius must be positive".into()));
        }
        Ok(DiskSpec {
            center: C64::new(0.0, 0.0),
            radius,
        })
    }
}

/// True when `e` cannot vanish: products and powers of `exp` and nonzero constants.
pub(crate) fn zero_free(e: &Expr) -> bool {
    match e.node() {
        Node::Const(c) => c.norm() > 0.0,
        Node::Exp(_) => true,
        Node::Mul(a, b) => zero_free(a) && zero_free(b),
        Node::IntPow(a, _) => zero_free(a),
        Node::Shift(a, _) => zero_free(a),
        Node::Div(a, _) => zero_free(a),
        _ => false,
    }
}

fn sort_records(v: &mut [SingularRecord]) {
    v.sort_by(|a, b| {
        a.location
            .re
            .total_cmp(&b.location.re)
            .then(a.location.im.total_cmp(&b.location.im))
    });
}

/// Merges records closer than the merge tolerance, summing orders.
fn merge(mut v: Vec<SingularRecord>) -> Vec<SingularRecord> {
    sort_records(&mut v);
    let mut out: Vec<SingularRecord> = Vec::new();
    for r in v {
        if let Some(prev) = out
            .iter_mut()
            .rev()
            .take(16)
            .find(|p| (p.location - r.location).norm() <= MERGE_TOL * (1.0 + r.location.norm()))
        {
            prev.order += r.order;
        } else {
            out.push(r);
        }
    }
    out
}

/// Zero order of `g` at `z0` from the series valuation.
pub fn zero_order(g: &Expr, z0: C64) -> Result<u32> {
    let s = series(g, z0, SERIES_RHO)?;
    Ok(match s.valuation() {
        Some(v) if v > 0 => v as u32,
        _ => 0,
    })
}

fn zeros_of(g: &Expr, radius: f64, kind: Kind) -> Result<Vec<SingularRecord>> {
    if let Some(c) = g.as_const() {
        if c.norm() == 0.0 {
            return Err(NevError::InvalidInput(
                "function is identically equal to the target".into(),
            ));
        }
        return Ok(vec![]);
    }
    if zero_free(g) {
        return Ok(vec![]);
    }
    if let Some(p) = as_polynomial(g) {
        let mut out = Vec::new();
        for (r, _) in polynomial_roots(&p) {
            if r.norm() <= radius {
                let ord = zero_order(g, r)?.max(1);
                out.push(SingularRecord {
                    location: r,
                    order: ord,
                    kind,
                    provenance: Provenance::Structural,
                });
            }
        }
        return Ok(merge(out));
    }
    let poles = structural_singularities(g, radius * 1.5 + 1.0)?;
    if !poles.complete {
        return Err(NevError::InvalidInput(
            "pole set is not structurally enumerable; zero counting needs it".into(),
        ));
    }
    let found = winding::quadtree_zeros(g, radius, &poles.records, kind)?;
    Ok(merge(
        found.into_iter().filter(|r| r.location.norm() <= radius).collect(),
    ))
}

/// Zeros of an expression known to have no poles.
pub(crate) fn locate_zeros_entire(g: &Expr, radius: f64) -> Result<Vec<SingularRecord>> {
    if zero_free(g) {
        return Ok(vec![]);
    }
    if let Some(p) = as_polynomial(g) {
        return Ok(polynomial_roots(&p)
            .into_iter()
            .filter(|(r, _)| r.norm() <= radius)
            .map(|(r, m)| SingularRecord {
                location: r,
                order: m as u32,
                kind: Kind::ZeroOf(C64::new(0.0, 0.0)),
                provenance: Provenance::Structural,
            })
            .collect());
    }
    winding::quadtree_zeros(g, radius, &[], Kind::ZeroOf(C64::new(0.0, 0.0)))
}

/// All points of `f` matching `target` in the closed disk, with multiplicities.
pub fn locate_points(f: &Expr, target: Target, disk: DiskSpec) -> Result<Vec<SingularRecord>> {
    let radius = disk.radius;
    match target {
        Target::Pole => {
            let s = structural_singularities(f, radius)?;
            if !s.complete {
                return Err(NevError::InvalidInput("pole set is not structurally enumerable".into()));
            }
            let mut v = s.records;
            sort_records(&mut v);
            Ok(v)
        }
        Target::Value(a) => {
            let g = f.sub(&Expr::constant(a));
            zeros_of(&g, radius, Kind::ZeroOf(a))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{parse, Lattice};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn disk(r: f64) -> DiskSpec {
        DiskSpec::new(r).unwrap()
    }

    #[test]
    fn exp_minus_one_zeros() {
        let f = parse("exp(z) - 1").unwrap();
        let z = locate_points(&f, Target::Value(c(0.0, 0.0)), disk(7.0)).unwrap();
        assert_eq!(z.len(), 3);
        let want = [c(0.0, -2.0 * PI), c(0.0, 0.0), c(0.0, 2.0 * PI)];
        let mut got: Vec<C64> = z.iter().map(|r| r.location).collect();
        got.sort_by(|a, b| a.im.total_cmp(&b.im));
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).norm() < 1e-10, "{g} vs {w}");
        }
        assert!(z.iter().all(|r| r.order == 1));
    }

    #[test]
    fn sine_zeros() {
        let f = parse("sin(pi*z)").unwrap();
        let z = locate_points(&f, Target::Value(c(0.0, 0.0)), disk(3.5)).unwrap();
        assert_eq!(z.len(), 7);
        for (k, r) in z.iter().enumerate() {
            assert!((r.location - c(k as f64 - 3.0, 0.0)).norm() < 1e-10);
            assert_eq!(r.order, 1);
        }
    }

    #[test]
    fn wp_squared_poles() {
        let lat = Arc::new(Lattice::square(c(1.0, 0.0)).unwrap());
        let f = Expr::wp(&lat).powi(2);
        let p = locate_points(&f, Target::Pole, disk(1.4)).unwrap();
        assert_eq!(p.len(), 5);
        assert!(p.iter().all(|r| r.order == 4));
    }

    #[test]
    fn wp_value_points_balance_poles() {
        let lat = Arc::new(Lattice::square(c(1.0, 0.0)).unwrap());
        let f = Expr::wp(&lat);
        let z = locate_points(&f, Target::Value(c(2.0, 1.0)), disk(3.0)).unwrap();
        for r in &z {
            let v = f.eval(r.location);
            assert!((v - c(2.0, 1.0)).norm() < 1e-8);
        }
        // Two a-points per period cell.
        assert!(z.len() >= 40 && z.len() <= 70, "{}", z.len());
    }

    #[test]
    fn multiple_zero_order() {
        let f = parse("(z - 0.5)^3 * exp(z)").unwrap();
        let z = locate_points(&f, Target::Value(c(0.0, 0.0)), disk(2.0)).unwrap();
        assert_eq!(z.len(), 1);
        assert_eq!(z[0].order, 3);
        let f = parse("z^3").unwrap();
        let z = locate_points(&f, Target::Value(c(0.0, 0.0)), disk(1.0)).unwrap();
        assert_eq!((z.len(), z[0].order), (1, 3));
    }
}
