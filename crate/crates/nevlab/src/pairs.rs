//! `c`-separated pairs and the counting functions built on them.
//!
//! The multiplicity of a pair is the number of equal leading Taylor terms of `f`
//! at `z0` and `z0 + c`. It equals the order of vanishing of `Δ_c f` at `z0`
//! (for `a`-pairs) or of `Δ_c(1/f)` (for pole pairs). The difference is built
//! structurally, so common factors such as `e^{z0}` never cancel numerically.

use crate::error::{NevError, Result};
use crate::functionals::{counting, located, Counting};
use crate::locate::{pole_order, zero_free, SingularRecord, Target};
use crate::model::series::series;
use crate::model::{probe_points, Expr};
use crate::tolerances::{K_MAX, PAIR_MATCH, PAIR_RESIDUAL, PERIODIC_PROBES, PERIODIC_REL, PROBE_SEED, SERIES_RHO};
use crate::C64;
use serde::Serialize;

/// What a [`PairRecord`] counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PairKind {
    APair(#[serde(serialize_with = "crate::ser_complex")] C64),
    PolePair,
    Var,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairRecord {
    #[serde(serialize_with = "crate::ser_complex")]
    pub z0: C64,
    #[serde(serialize_with = "crate::ser_complex")]
    pub c: C64,
    pub kind: PairKind,
    /// Multiplicity (`>= 1`) for pairs, signed contribution for `Var`.
    pub value: i64,
    pub saturated: bool,
}

/// Pair multiplicity with the saturation flag set at `K_MAX`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Multiplicity {
    pub value: u32,
    pub saturated: bool,
}

/// True when `|Δ_c f| <= 1e-10 |f|` at every probe.
pub fn is_c_periodic(f: &Expr, c: C64) -> bool {
    let scale = 4.0 + 2.0 * c.norm();
    probe_points(PERIODIC_PROBES, scale, PROBE_SEED).iter().all(|z| {
        let a = f.eval(*z);
        let b = f.eval(z + c);
        a.is_finite() && b.is_finite() && (b - a).norm() <= PERIODIC_REL * a.norm()
    })
}

fn check_shift(f: &Expr, c: C64) -> Result<()> {
    if c.norm() == 0.0 {
        return Err(NevError::InvalidParameter("shift must be nonzero".into()));
    }
    if is_c_periodic(f, c) {
        return Err(NevError::InvalidInput(format!(
            "function is {}-periodic",
            crate::fmt_complex(c)
        )));
    }
    Ok(())
}

fn valuation_multiplicity(d: &Expr, z0: C64) -> Result<Multiplicity> {
    let s = series(d, z0, SERIES_RHO)?;
    Ok(match s.valuation() {
        Some(v) if v < K_MAX as i32 => Multiplicity {
            value: v.max(0) as u32,
            saturated: false,
        },
        _ => Multiplicity {
            value: K_MAX,
            saturated: true,
        },
    })
}

/// Precomputed differences of one function for one shift.
#[derive(Debug, Clone)]
pub struct PairContext {
    f: Expr,
    c: C64,
    delta: Expr,
    delta_inv: Expr,
}

impl PairContext {
    pub fn new(f: &Expr, c: C64) -> Result<PairContext> {
        check_shift(f, c)?;
        let inv = Expr::real(1.0).div(f)?;
        Ok(PairContext {
            f: f.clone(),
            c,
            delta: f.difference(c, 1)?,
            delta_inv: inv.difference(c, 1)?,
        })
    }

    /// Multiplicity of the pair `(z0, z0 + c)` for `target`, after checking both ends.
    pub fn multiplicity(&self, z0: C64, target: Target) -> Result<Multiplicity> {
        let z1 = z0 + self.c;
        match target {
            Target::Value(a) => {
                let tol = PAIR_RESIDUAL * (1.0 + a.norm());
                let ok = |z: C64| {
                    let v = self.f.eval(z);
                    v.is_finite() && (v - a).norm() <= tol
                };
                if !(ok(z0) && ok(z1)) {
                    return Err(NevError::NotAPair(format!(
                        "{} and {} are not both {}-points",
                        crate::fmt_complex(z0),
                        crate::fmt_complex(z1),
                        crate::fmt_complex(a)
                    )));
                }
                let m = valuation_multiplicity(&self.delta, z0)?;
                Ok(Multiplicity {
                    value: m.value.max(1),
                    ..m
                })
            }
            Target::Pole => {
                if pole_order(&self.f, z0)? == 0 || pole_order(&self.f, z1)? == 0 {
                    return Err(NevError::NotAPair(format!(
                        "{} and {} are not both poles",
                        crate::fmt_complex(z0),
                        crate::fmt_complex(z1)
                    )));
                }
                let m = valuation_multiplicity(&self.delta_inv, z0)?;
                Ok(Multiplicity {
                    value: m.value.max(1),
                    ..m
                })
            }
        }
    }

    /// All pairs with base point `|z0| <= r_max`.
    ///
    /// Pairs of `a`-points are zeros of `Δ_c f`, so a zero-free difference short-circuits.
    pub fn pairs(&self, target: Target, r_max: f64) -> Result<Vec<PairRecord>> {
        if let Target::Value(_) = target {
            if self.delta.as_const().is_some_and(|v| v.norm() > 0.0) || zero_free(&self.delta) {
                return Ok(vec![]);
            }
        }
        let pts = located(&self.f, target, r_max + self.c.norm())?;
        let kind = match target {
            Target::Value(a) => PairKind::APair(a),
            Target::Pole => PairKind::PolePair,
        };
        let mut out = Vec::new();
        for p in pts.iter().filter(|p| p.location.norm() <= r_max) {
            let want = p.location + self.c;
            let tol = PAIR_MATCH * (1.0 + want.norm());
            if !pts.iter().any(|q| (q.location - want).norm() <= tol) {
                continue;
            }
            let m = self.multiplicity(p.location, target)?;
            out.push(PairRecord {
                z0: p.location,
                c: self.c,
                kind,
                value: m.value as i64,
                saturated: m.saturated,
            });
        }
        Ok(out)
    }
}

/// Pair multiplicity of `f` at `z0` for the value `a`.
pub fn pair_multiplicity(f: &Expr, z0: C64, a: C64, c: C64) -> Result<Multiplicity> {
    PairContext::new(f, c)?.multiplicity(z0, Target::Value(a))
}

fn as_points(records: &[PairRecord]) -> Vec<SingularRecord> {
    records
        .iter()
        .map(|p| SingularRecord {
            location: p.z0,
            order: p.value.max(0) as u32,
            kind: crate::locate::Kind::Pole,
            provenance: crate::locate::Provenance::Numeric,
        })
        .collect()
}

/// `n_c` and `N_c` of pair records on the disk of radius `r`.
pub fn pair_count(records: &[PairRecord], r: f64) -> Counting {
    counting(&as_points(records), r)
}

/// `(N_c, n_c)` for `target` at radius `r`.
pub fn pair_counting(f: &Expr, r: f64, target: Target, c: C64) -> Result<(f64, u64)> {
    let recs = PairContext::new(f, c)?.pairs(target, r)?;
    let k = pair_count(&recs, r);
    Ok((k.N, k.n))
}

/// Signed `N_var` contributions of every pole position `z0` with `|z0| <= r_max`.
///
/// The shared principal-part length is `m = clamp(v + p, 0, p)`, with `v` the
/// valuation of `Δ_c F` at `z0` and `p` the larger of the two pole orders.
pub fn n_var_records(big_f: &Expr, c: C64, r_max: f64) -> Result<Vec<PairRecord>> {
    check_shift(big_f, c)?;
    let delta = big_f.difference(c, 1)?;
    let poles = located(big_f, Target::Pole, r_max + c.norm())?;
    let mut bases: Vec<C64> = Vec::new();
    for p in &poles {
        for z0 in [p.location, p.location - c] {
            let tol = PAIR_MATCH * (1.0 + z0.norm());
            if z0.norm() <= r_max && !bases.iter().any(|b| (b - z0).norm() <= tol) {
                bases.push(z0);
            }
        }
    }
    bases.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let order_at = |z: C64| -> i64 {
        let tol = PAIR_MATCH * (1.0 + z.norm());
        poles
            .iter()
            .find(|p| (p.location - z).norm() <= tol)
            .map_or(0, |p| p.order as i64)
    };
    let mut out = Vec::new();
    for z0 in bases {
        let p1 = order_at(z0);
        let p2 = order_at(z0 + c);
        let p = p1.max(p2);
        let v = series(&delta, z0, SERIES_RHO)?.valuation().map_or(p, |v| v as i64);
        let m = (v + p).clamp(0, p);
        out.push(PairRecord {
            z0,
            c,
            kind: PairKind::Var,
            value: (p1 - p2).abs() - 2 * m,
            saturated: false,
        });
    }
    Ok(out)
}

/// Signed integrated count of `N_var` records on radius `r`.
pub fn n_var_count(records: &[PairRecord], r: f64) -> f64 {
    records
        .iter()
        .filter(|p| p.z0.norm() <= r)
        .map(|p| {
            let s = p.z0.norm();
            let w = if s <= 1e-12 { r.ln() } else { (r / s).ln() };
            p.value as f64 * w
        })
        .sum()
}

/// `(N_var(r, F), contributions)`.
pub fn n_var_counting(big_f: &Expr, r: f64, c: C64) -> Result<(f64, Vec<PairRecord>)> {
    let recs = n_var_records(big_f, c, r)?;
    Ok((n_var_count(&recs, r), recs))
}

/// Both ingredients of the hatted count `N̂_c(r, a, F′)`, located up to a fixed radius.
#[derive(Debug, Clone)]
pub struct HattedProfile {
    /// Points of `F′ - a` (zeros) or of `F′` (poles).
    pub derivative_points: Vec<SingularRecord>,
    /// Pairs of `Δ_c F` at the value `a c`, or its pole pairs.
    pub pairs: Vec<PairRecord>,
}

impl HattedProfile {
    /// `a = None` stands for `∞`.
    pub fn new(big_f: &Expr, a: Option<C64>, c: C64, r_max: f64) -> Result<HattedProfile> {
        let d = big_f.differentiate();
        let delta = big_f.difference(c, 1)?;
        let ctx = PairContext::new(&delta, c)?;
        let (derivative_points, pairs) = match a {
            Some(a) => (
                located(&d, Target::Value(a), r_max)?,
                ctx.pairs(Target::Value(a * c), r_max)?,
            ),
            None => (located(&d, Target::Pole, r_max)?, ctx.pairs(Target::Pole, r_max)?),
        };
        Ok(HattedProfile {
            derivative_points,
            pairs,
        })
    }

    pub fn at(&self, r: f64) -> f64 {
        counting(&self.derivative_points, r).N - pair_count(&self.pairs, r).N
    }

    /// True when some pair multiplicity hit the cap.
    pub fn saturated(&self) -> bool {
        self.pairs.iter().any(|p| p.saturated)
    }
}

/// `N̂_c(r, a, F′)`; `a = None` is the value `∞`.
pub fn hatted_counting(big_f: &Expr, r: f64, a: Option<C64>, c: C64) -> Result<f64> {
    Ok(HattedProfile::new(big_f, a, c, r)?.at(r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{parse, Lattice};
    use std::sync::Arc;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn multiplicity_examples() {
        let s = parse("sin(pi*z)").unwrap();
        let m = pair_multiplicity(&s, c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        assert_eq!(
            m,
            Multiplicity {
                value: 1,
                saturated: false
            }
        );
        let q = parse("z*(z-0.7-0.2*i)").unwrap();
        let m = pair_multiplicity(&q, c(0.0, 0.0), c(0.0, 0.0), c(0.7, 0.2)).unwrap();
        assert_eq!(m.value, 1);
        let e = parse("exp(z)").unwrap();
        let z0 = c(0.3, 0.1);
        let err = pair_multiplicity(&e, z0, z0.exp(), c(1.0, 0.0)).unwrap_err();
        assert!(matches!(err, NevError::NotAPair(_)));
    }

    #[test]
    fn higher_multiplicity_from_shared_terms() {
        // f(z) = sin(πz)^2 (z - 4): at z0 = 1 both ends vanish to second order.
        let f = parse("sin(pi*z)^2 * (z - 4)").unwrap();
        let m = pair_multiplicity(&f, c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        assert_eq!(m.value, 2);
    }

    #[test]
    fn counting_examples() {
        let s = parse("sin(pi*z)").unwrap();
        let (_, n) = pair_counting(&s, 3.5, Target::Value(c(0.0, 0.0)), c(1.0, 0.0)).unwrap();
        assert_eq!(n, 7);
        let e = parse("exp(z)").unwrap();
        assert_eq!(
            pair_counting(&e, 10.0, Target::Value(c(2.0, 0.0)), c(1.0, 0.0)).unwrap(),
            (0.0, 0)
        );
    }

    #[test]
    fn periodic_functions_are_rejected() {
        let lat = Arc::new(Lattice::square(c(1.0, 0.0)).unwrap());
        let wp = Expr::wp(&lat);
        assert!(is_c_periodic(&wp, c(1.0, 0.0)));
        assert!(matches!(
            pair_counting(&wp, 1.5, Target::Pole, c(1.0, 0.0)),
            Err(NevError::InvalidInput(_))
        ));
        assert!(!is_c_periodic(&wp, c(0.5, 0.0)));
    }

    #[test]
    fn weierstrass_pole_pairs_cover_disk() {
        // ℘ + z: every lattice point pairs with its right neighbour; 1/f differs first at h^4.
        let lat = Arc::new(Lattice::square(c(1.0, 0.0)).unwrap());
        let f = Expr::wp(&lat).add(&Expr::z());
        let recs = PairContext::new(&f, c(1.0, 0.0))
            .unwrap()
            .pairs(Target::Pole, 1.5)
            .unwrap();
        let mut base: Vec<C64> = recs.iter().map(|p| p.z0).collect();
        base.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        let want: Vec<C64> = (-1..=1)
            .flat_map(|x| (-1..=1).map(move |y| c(x as f64, y as f64)))
            .collect();
        assert_eq!(base, want);
        assert!(recs.iter().all(|p| p.value == 4 && !p.saturated));
    }

    #[test]
    fn weierstrass_family_pair_multiplicity() {
        let lat = Arc::new(Lattice::square(c(1.0, 0.0)).unwrap());
        for n in [1, 2] {
            let big_f = Expr::z().exp().add(&Expr::z().mul(&Expr::wp(&lat).powi(n)));
            let delta = big_f.difference(c(1.0, 0.0), 1).unwrap();
            let ctx = PairContext::new(&delta, c(1.0, 0.0)).unwrap();
            for z0 in [c(0.0, 0.0), c(-6.0, 2.0), c(5.0, -3.0)] {
                let m = ctx.multiplicity(z0, Target::Pole).unwrap();
                assert_eq!(m.value, 4 * n as u32, "n = {n}, z0 = {z0}");
            }
        }
    }

    #[test]
    fn n_var_examples() {
        let f = parse("1/(z^2*(z-1))").unwrap();
        let recs = n_var_records(&f, c(1.0, 0.0), 3.0).unwrap();
        let get = |z: C64| recs.iter().find(|p| (p.z0 - z).norm() < 1e-9).unwrap().value;
        assert_eq!(get(c(0.0, 0.0)), 1);
        assert_eq!(get(c(-1.0, 0.0)), 2);
        assert_eq!(get(c(1.0, 0.0)), 1);
        let r = 3.0f64;
        let want = r.ln() + 2.0 * r.ln() + r.ln();
        assert!((n_var_count(&recs, r) - want).abs() < 1e-12);
    }

    #[test]
    fn hatted_for_exponential() {
        let e = parse("exp(z)").unwrap();
        assert_eq!(hatted_counting(&e, 8.0, Some(c(0.0, 0.0)), c(1.0, 0.0)).unwrap(), 0.0);
    }
}
