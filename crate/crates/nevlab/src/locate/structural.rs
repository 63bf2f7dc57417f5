//! Pole candidates read off the expression tree.
//!
//! Lattice points of every `℘` factor, roots of polynomial denominators and
//! zeros of entire denominators are candidates; the pole order at each
//! candidate is the negated series valuation, so removable cancellations drop
//! out. `exp`, `sin` and `cos` of an argument with poles make the list incomplete.

use super::{locate_points, locate_zeros_entire, DiskSpec, Kind, Provenance, SingularRecord, Target};
use crate::error::Result;
use crate::model::series::series;
use crate::model::{Expr, Node};
use crate::tolerances::{MERGE_TOL, POLY_CLUSTER_TOL, SERIES_RHO};
use crate::C64;
use nalgebra::DMatrix;

/// Structural pole list inside a disk.
#[derive(Debug, Clone)]
pub struct StructuralPoles {
    pub records: Vec<SingularRecord>,
    /// False when some pole set could not be derived from structure.
    pub complete: bool,
}

const MAX_POLY_DEGREE: usize = 64;

/// Coefficients (ascending) when `e` is a polynomial in `z`.
pub fn as_polynomial(e: &Expr) -> Option<Vec<C64>> {
    let p = match e.node() {
        Node::Const(c) => vec![*c],
        Node::Var => vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        Node::Add(a, b) => {
            let (pa, pb) = (as_polynomial(a)?, as_polynomial(b)?);
            let n = pa.len().max(pb.len());
            (0..n)
                .map(|k| pa.get(k).copied().unwrap_or_default() + pb.get(k).copied().unwrap_or_default())
                .collect()
        }
        Node::Mul(a, b) => poly_mul(&as_polynomial(a)?, &as_polynomial(b)?),
        Node::Div(a, b) => {
            let c = b.as_const()?;
            as_polynomial(a)?.into_iter().map(|x| x / c).collect()
        }
        Node::IntPow(a, k) if *k > 0 => {
            let pa = as_polynomial(a)?;
            if (pa.len() - 1) * (*k as usize) > MAX_POLY_DEGREE {
                return None;
            }
            (0..*k).fold(vec![C64::new(1.0, 0.0)], |acc, _| poly_mul(&acc, &pa))
        }
        Node::Shift(a, s) => taylor_shift(&as_polynomial(a)?, *s),
        _ => return None,
    };
    (p.len() <= MAX_POLY_DEGREE + 1).then_some(p)
}

fn poly_mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Coefficients of `p(z + s)`.
fn taylor_shift(p: &[C64], s: C64) -> Vec<C64> {
    let mut c = p.to_vec();
    let n = c.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            let t = c[j + 1] * s;
            c[j] += t;
        }
    }
    c
}

/// Roots of a polynomial, clustered: `(centroid, multiplicity)`.
pub fn polynomial_roots(coeffs: &[C64]) -> Vec<(C64, usize)> {
    let mut p: Vec<C64> = coeffs.to_vec();
    let scale = p.iter().map(|c| c.norm()).fold(0.0, f64::max);
    while p.len() > 1 && p.last().unwrap().norm() <= 1e-14 * scale {
        p.pop();
    }
    let deg = p.len() - 1;
    if deg == 0 {
        return vec![];
    }
    let lead = p[deg];
    let mut m = DMatrix::<C64>::zeros(deg, deg);
    for j in 0..deg {
        m[(0, j)] = -p[deg - 1 - j] / lead;
    }
    for i in 1..deg {
        m[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    let mut roots: Vec<C64> = match m.clone().try_schur(1e-15, 10_000) {
        Some(s) => s.eigenvalues().map(|v| v.iter().copied().collect()).unwrap_or_default(),
        None => vec![],
    };
    if roots.len() != deg {
        roots = aberth(&p);
    }
    let horner = |z: C64| p.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * z + c);
    let dp: Vec<C64> = (1..=deg).map(|k| p[k] * k as f64).collect();
    let dhorner = |z: C64| dp.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * z + c);
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let d = dhorner(*r);
            if d.norm() == 0.0 {
                break;
            }
            let step = horner(*r) / d;
            if !step.is_finite() || step.norm() > 1e-6 * (1.0 + r.norm()) {
                break;
            }
            *r -= step;
        }
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut clusters: Vec<(C64, usize)> = Vec::new();
    'outer: for r in roots {
        for c in clusters.iter_mut() {
            let centroid = c.0 / c.1 as f64;
            if (centroid - r).norm() <= POLY_CLUSTER_TOL * (1.0 + r.norm()) {
                c.0 += r;
                c.1 += 1;
                continue 'outer;
            }
        }
        clusters.push((r, 1));
    }
    // An m-fold root is a simple root of p^(m-1); Newton there recovers the digits the split lost.
    clusters
        .into_iter()
        .map(|(s, n)| {
            let mut z = s / n as f64;
            if n > 1 {
                let q = derivative_coeffs(&p, n - 1);
                let dq = derivative_coeffs(&p, n);
                let ev = |c: &[C64], x: C64| c.iter().rev().fold(C64::new(0.0, 0.0), |a, k| a * x + k);
                for _ in 0..8 {
                    let step = ev(&q, z) / ev(&dq, z);
                    if !step.is_finite() || step.norm() > POLY_CLUSTER_TOL * (1.0 + z.norm()) {
                        break;
                    }
                    z -= step;
                    if step.norm() <= f64::EPSILON * (1.0 + z.norm()) {
                        break;
                    }
                }
            }
            (z, n)
        })
        .collect()
}

/// Coefficients of the `k`-th derivative, lowest degree first.
fn derivative_coeffs(p: &[C64], k: usize) -> Vec<C64> {
    (k..p.len())
        .map(|j| p[j] * ((j + 1 - k)..=j).map(|v| v as f64).product::<f64>())
        .collect()
}

/// Aberth–Ehrlich iteration, used when the Schur solver does not converge.
fn aberth(p: &[C64]) -> Vec<C64> {
    let deg = p.len() - 1;
    let bound = 1.0 + p[..deg].iter().map(|c| (c / p[deg]).norm()).fold(0.0, f64::max);
    let mut z: Vec<C64> = (0..deg)
        .map(|k| C64::from_polar(0.5 * bound, 0.4 + std::f64::consts::TAU * k as f64 / deg as f64))
        .collect();
    let dp: Vec<C64> = (1..=deg).map(|k| p[k] * k as f64).collect();
    let ev = |c: &[C64], x: C64| c.iter().rev().fold(C64::new(0.0, 0.0), |a, k| a * x + k);
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..deg {
            let ratio = ev(p, z[i]) / ev(&dp, z[i]);
            let s: C64 = (0..deg).filter(|j| *j != i).map(|j| 1.0 / (z[i] - z[j])).sum();
            let w = ratio / (1.0 - ratio * s);
            if w.is_finite() {
                z[i] -= w;
                moved = moved.max(w.norm());
            }
        }
        if moved < 1e-15 * bound {
            break;
        }
    }
    z
}

/// Candidate pole positions of `e` with `|z| <= radius`.
fn candidates(e: &Expr, radius: f64, out: &mut Vec<C64>) -> Result<bool> {
    Ok(match e.node() {
        Node::Const(_) | Node::Var => true,
        Node::Add(a, b) | Node::Mul(a, b) => {
            let ca = candidates(a, radius, out)?;
            candidates(b, radius, out)? && ca
        }
        Node::Div(a, b) => {
            let ca = candidates(a, radius, out)?;
            candidates(b, radius, out)? && zero_candidates(b, radius, out)? && ca
        }
        Node::IntPow(a, k) => {
            let ca = candidates(a, radius, out)?;
            if *k < 0 {
                zero_candidates(a, radius, out)? && ca
            } else {
                ca
            }
        }
        Node::Exp(a) | Node::Sin(a) | Node::Cos(a) => {
            let mut inner = Vec::new();
            let ok = candidates(a, radius, &mut inner)?;
            ok && inner.is_empty()
        }
        Node::WeierstrassP(l) | Node::WeierstrassPPrime(l) => {
            out.extend(l.points_in_disk(radius));
            true
        }
        Node::Shift(a, s) => {
            let mut inner = Vec::new();
            let ok = candidates(a, radius + s.norm(), &mut inner)?;
            out.extend(inner.into_iter().map(|p| p - s).filter(|p| p.norm() <= radius));
            ok
        }
    })
}

/// Candidate zeros of a denominator; `false` when they cannot be enumerated.
fn zero_candidates(b: &Expr, radius: f64, out: &mut Vec<C64>) -> Result<bool> {
    if let Some(p) = as_polynomial(b) {
        out.extend(
            polynomial_roots(&p)
                .into_iter()
                .map(|(r, _)| r)
                .filter(|r| r.norm() <= radius * (1.0 + 1e-12)),
        );
        return Ok(true);
    }
    if let Node::IntPow(u, k) = b.node() {
        if *k > 0 {
            return zero_candidates(u, radius, out);
        }
    }
    if let Node::Mul(u, v) = b.node() {
        let cu = zero_candidates(u, radius, out)?;
        return Ok(zero_candidates(v, radius, out)? && cu);
    }
    if let Node::Exp(_) = b.node() {
        // exp never vanishes; poles of its argument are handled elsewhere.
        return Ok(true);
    }
    // A denominator with enumerable poles of its own has zeros the general locator can find.
    let mut inner = Vec::new();
    if candidates(b, radius, &mut inner)? {
        let zs = if inner.is_empty() {
            locate_zeros_entire(b, radius)
        } else {
            locate_points(
                b,
                Target::Value(C64::new(0.0, 0.0)),
                DiskSpec::new(radius.max(f64::MIN_POSITIVE))?,
            )
        };
        if let Ok(zs) = zs {
            out.extend(zs.into_iter().map(|r| r.location));
            return Ok(true);
        }
    }
    Ok(false)
}

/// Pole order at `z0`: negated series valuation, 0 at regular points.
pub fn pole_order(e: &Expr, z0: C64) -> Result<u32> {
    let s = series(e, z0, SERIES_RHO)?;
    Ok(match s.valuation() {
        Some(v) if v < 0 => v.unsigned_abs(),
        _ => 0,
    })
}

/// Exact poles from structure inside `|z| <= radius`.
pub fn structural_singularities(e: &Expr, radius: f64) -> Result<StructuralPoles> {
    let mut cand = Vec::new();
    let complete = candidates(e, radius, &mut cand)?;
    cand.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut merged: Vec<C64> = Vec::new();
    for c in cand {
        if !merged
            .iter()
            .rev()
            .take(64)
            .any(|m| (m - c).norm() <= MERGE_TOL * (1.0 + c.norm()))
        {
            merged.push(c);
        }
    }
    let mut records = Vec::new();
    for p in merged {
        let ord = pole_order(e, p)?;
        if ord > 0 {
            records.push(SingularRecord {
                location: p,
                order: ord,
                kind: Kind::Pole,
                provenance: Provenance::Structural,
            });
        }
    }
    Ok(StructuralPoles { records, complete })
}
