//! Circle functionals: proximity `m`, counting `n` and `N`, characteristic `T`,
//! the Jensen residual and the sector-restricted count.
//!
//! Point sets are located once per function up to the largest radius of interest
//! and then reused for every circle. A circle passing within `1e-8 r` of a located
//! point is pushed outward by the first nudge factor that clears all points; the
//! radius actually used is reported as `r_effective`.

use crate::error::{NevError, Result};
use crate::locate::{locate_points, DiskSpec, SingularRecord, Target};
use crate::model::series::series;
use crate::model::Expr;
use crate::quad::integrate;
use crate::tolerances::{BREAKPOINT_BAND, NUDGE_FACTORS, NUDGE_TRIGGER, QUAD_REL_TOL, SERIES_RHO};
use crate::{fmt_complex, C64};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::TAU;

/// Panel budget for one circle mean.
const MAX_PANELS: usize = 20_000;
/// Points with modulus below this are treated as sitting at the origin.
const ORIGIN: f64 = 1e-12;
/// Location disks reach this far past the requested radius so nudged circles stay covered.
pub const REACH: f64 = 1.0 + 2e-4;

/// Which part of `log|g|` is averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    /// `log⁺|g|`.
    Positive,
    /// `log⁺(1/|g|)`.
    Negative,
    /// `log|g|`.
    Full,
}

/// A circle mean with the radius it was taken on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Proximity {
    pub value: f64,
    pub r_effective: f64,
    pub error: f64,
}

/// Unintegrated and integrated counts of a point set on one disk.
#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Counting {
    pub n: u64,
    pub N: f64,
    /// Distinct points, each counted once.
    pub n_distinct: u64,
    pub N_distinct: f64,
}

/// Per-target columns of a [`RadialSample`].
#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TargetEntry {
    #[serde(serialize_with = "crate::ser_complex")]
    pub a: C64,
    pub m_inv: f64,
    pub n_count: u64,
    pub N_count: f64,
    pub N_distinct: f64,
}

/// All functionals of one function on one circle.
#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialSample {
    pub r: f64,
    pub r_effective: f64,
    pub m: f64,
    pub n_pole: u64,
    pub N_pole: f64,
    pub N_pole_distinct: f64,
    pub T: f64,
    pub targets: Vec<TargetEntry>,
    pub quad_error: f64,
}

impl RadialSample {
    /// True when the circle had to be moved off the requested radius.
    pub fn nudged(&self) -> bool {
        self.r_effective != self.r
    }

    pub fn target(&self, a: C64) -> Option<&TargetEntry> {
        self.targets.iter().find(|t| t.a == a)
    }
}

/// Sector-restricted count of located points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectorCount {
    pub epsilon: f64,
    #[serde(serialize_with = "crate::ser_complex")]
    pub c: C64,
    pub n_sector: u64,
    pub n_total: u64,
    pub ratio: f64,
}

/// Smallest admissible radius `>= r` keeping every point off the circle.
pub fn nudge_radius(r: f64, points: &[SingularRecord]) -> Result<f64> {
    let clear = |rr: f64| {
        points
            .iter()
            .all(|p| (p.location.norm() - rr).abs() > NUDGE_TRIGGER * rr)
    };
    if clear(r) {
        return Ok(r);
    }
    NUDGE_FACTORS
        .iter()
        .map(|f| r * f)
        .find(|rr| clear(*rr))
        .ok_or(NevError::CircleCollision(r))
}

fn breakpoints(r: f64, points: &[SingularRecord]) -> Vec<f64> {
    let mut out = Vec::new();
    for p in points {
        let d = (p.location.norm() - r).abs();
        if d > BREAKPOINT_BAND || p.location.norm() <= ORIGIN {
            continue;
        }
        let th = p.location.arg().rem_euclid(TAU);
        out.push(th);
        let w = d / r;
        if w < 0.1 {
            for s in [-4.0, 4.0] {
                out.push((th + s * w).rem_euclid(TAU));
            }
        }
    }
    out
}

/// `(1/2π) ∫ part(log|g(re^{iθ})|) dθ` with breakpoints at the angles of nearby `singular` points.
///
/// The absolute error target is `tol · (1 + |value|)`.
pub fn log_mean(g: &Expr, r: f64, part: Part, singular: &[SingularRecord], tol: f64) -> Result<(f64, f64)> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(NevError::InvalidParameter("radius must be positive".into()));
    }
    let breaks = breakpoints(r, singular);
    let f = |t: f64| {
        let l = g.log_abs(C64::from_polar(r, t));
        match part {
            Part::Positive => l.max(0.0),
            Part::Negative => (-l).max(0.0),
            Part::Full => l,
        }
    };
    let out = integrate(f, 0.0, TAU, &breaks, TAU * tol, tol, MAX_PANELS);
    let value = out.value / TAU;
    let error = out.error / TAU;
    if !value.is_finite() || !out.converged {
        return Err(NevError::PrecisionFailure(format!(
            "circle mean at r = {r} did not converge (estimate {value}, error {error})"
        )));
    }
    Ok((value, error))
}

/// `n` and `N` of a located point set on the disk of radius `r`; points at the origin enter as `n(0) log r`.
pub fn counting(points: &[SingularRecord], r: f64) -> Counting {
    let mut c = Counting::default();
    for p in points {
        let s = p.location.norm();
        if s > r {
            continue;
        }
        let w = if s <= ORIGIN { r.ln() } else { (r / s).ln() };
        c.n += p.order as u64;
        c.N += p.order as f64 * w;
        c.n_distinct += 1;
        c.N_distinct += w;
    }
    c
}

/// Points of `f` matching `target` up to radius `r` (plus the nudge reach).
pub fn located(f: &Expr, target: Target, r: f64) -> Result<Vec<SingularRecord>> {
    locate_points(f, target, DiskSpec::new(r * REACH)?)
}

/// `m(r, f)` for `Target::Pole`, `m(r, 1/(f - a))` for `Target::Value(a)`.
pub fn proximity(f: &Expr, r: f64, target: Target, tol: f64) -> Result<Proximity> {
    let pts = located(f, target, r)?;
    let r_eff = nudge_radius(r, &pts)?;
    let (value, error) = match target {
        Target::Pole => log_mean(f, r_eff, Part::Positive, &pts, tol)?,
        Target::Value(a) => log_mean(&f.sub(&Expr::constant(a)), r_eff, Part::Negative, &pts, tol)?,
    };
    Ok(Proximity {
        value,
        r_effective: r_eff,
        error,
    })
}

/// `(N, n)` for the points of `f` matching `target`, on the nudged circle.
pub fn counting_integrated(f: &Expr, r: f64, target: Target) -> Result<(f64, u64)> {
    let pts = located(f, target, r)?;
    let r_eff = nudge_radius(r, &pts)?;
    let c = counting(&pts, r_eff);
    Ok((c.N, c.n))
}

/// `T(r, f) = m(r, f) + N(r, f)`.
pub fn characteristic(f: &Expr, r: f64) -> Result<RadialSample> {
    Profile::new(f, &[], r)?.sample(r, QUAD_REL_TOL)
}

/// Leading Laurent coefficient of `f` at the origin.
pub fn leading_coefficient(f: &Expr) -> Result<C64> {
    let s = series(f, C64::new(0.0, 0.0), SERIES_RHO)?;
    match s.valuation() {
        Some(v) => Ok(s.coeff_h(v)),
        None => Err(NevError::InvalidInput(
            "function vanishes identically at the origin".into(),
        )),
    }
}

/// `|mean log|f| - N(r, 1/f) + N(r, f) - log|c_f||`.
pub fn jensen_residual(f: &Expr, r: f64) -> Result<f64> {
    let zeros = located(f, Target::Value(C64::new(0.0, 0.0)), r)?;
    let poles = located(f, Target::Pole, r)?;
    let all: Vec<SingularRecord> = zeros.iter().chain(poles.iter()).copied().collect();
    let r_eff = nudge_radius(r, &all)?;
    let (mean, _) = log_mean(f, r_eff, Part::Full, &all, QUAD_REL_TOL)?;
    let cf = leading_coefficient(f)?;
    Ok((mean - counting(&zeros, r_eff).N + counting(&poles, r_eff).N - cf.norm().ln()).abs())
}

/// True when `z0` lies in the double sector `|sin arg(z0/c)| >= 1 - sqrt(eps)`; the origin never does.
pub fn in_sector(z0: C64, eps: f64, c: C64) -> bool {
    if z0.norm() <= ORIGIN {
        return false;
    }
    (z0 / c).arg().sin().abs() >= 1.0 - eps.sqrt()
}

/// Sector count over already located points, on the open disk `|z0| < r`.
pub fn sector_count_points(points: &[SingularRecord], r: f64, eps: f64, c: C64) -> Result<SectorCount> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(NevError::InvalidParameter("epsilon must lie in (0, 1)".into()));
    }
    if c.norm() == 0.0 {
        return Err(NevError::InvalidParameter("shift must be nonzero".into()));
    }
    let mut n_total = 0u64;
    let mut n_sector = 0u64;
    for p in points.iter().filter(|p| p.location.norm() < r) {
        n_total += p.order as u64;
        if in_sector(p.location, eps, c) {
            n_sector += p.order as u64;
        }
    }
    let ratio = if n_total == 0 {
        0.0
    } else {
        n_sector as f64 / n_total as f64
    };
    Ok(SectorCount {
        epsilon: eps,
        c,
        n_sector,
        n_total,
        ratio,
    })
}

/// `n_{∠ε,c}`, the total count and their ratio for the points of `f` matching `target`.
pub fn sector_count(f: &Expr, r: f64, eps: f64, c: C64, target: Target) -> Result<SectorCount> {
    let pts = located(f, target, r)?;
    sector_count_points(&pts, r, eps, c)
}

/// A function with its poles and target points located once, up to a fixed radius.
#[derive(Debug, Clone)]
pub struct Profile {
    f: Expr,
    reach: f64,
    poles: Vec<SingularRecord>,
    values: Vec<(C64, Vec<SingularRecord>)>,
}

impl Profile {
    pub fn new(f: &Expr, targets: &[C64], r_max: f64) -> Result<Profile> {
        let poles = located(f, Target::Pole, r_max)?;
        let values = targets
            .iter()
            .map(|a| Ok((*a, located(f, Target::Value(*a), r_max)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Profile {
            f: f.clone(),
            reach: r_max * REACH,
            poles,
            values,
        })
    }

    pub fn function(&self) -> &Expr {
        &self.f
    }

    pub fn poles(&self) -> &[SingularRecord] {
        &self.poles
    }

    pub fn points(&self, a: C64) -> Option<&[SingularRecord]> {
        self.values.iter().find(|v| v.0 == a).map(|v| v.1.as_slice())
    }

    /// Every located point, poles first.
    pub fn all_points(&self) -> Vec<SingularRecord> {
        let mut v = self.poles.clone();
        for (_, p) in &self.values {
            v.extend_from_slice(p);
        }
        v
    }

    pub fn sample(&self, r: f64, tol: f64) -> Result<RadialSample> {
        let all = self.all_points();
        let r_eff = nudge_radius(r, &all)?;
        if r_eff > self.reach {
            return Err(NevError::InvalidParameter(format!(
                "radius {r} lies beyond the located range"
            )));
        }
        let (m, mut quad_error) = log_mean(&self.f, r_eff, Part::Positive, &self.poles, tol)?;
        let pc = counting(&self.poles, r_eff);
        let mut targets = Vec::with_capacity(self.values.len());
        for (a, pts) in &self.values {
            let g = self.f.sub(&Expr::constant(*a));
            let (m_inv, e) = log_mean(&g, r_eff, Part::Negative, pts, tol)?;
            quad_error = quad_error.max(e);
            let c = counting(pts, r_eff);
            targets.push(TargetEntry {
                a: *a,
                m_inv,
                n_count: c.n,
                N_count: c.N,
                N_distinct: c.N_distinct,
            });
        }
        Ok(RadialSample {
            r,
            r_effective: r_eff,
            m,
            n_pole: pc.n,
            N_pole: pc.N,
            N_pole_distinct: pc.N_distinct,
            T: m + pc.N,
            targets,
            quad_error,
        })
    }

    /// Samples on every radius of `grid`, in grid order.
    pub fn sample_grid(&self, grid: &[f64], tol: f64) -> Result<Vec<RadialSample>> {
        grid.par_iter().map(|r| self.sample(*r, tol)).collect()
    }
}

/// Geometric grid `r_min · ratio^k`, `k = 0..count`.
pub fn geometric_grid(r_min: f64, ratio: f64, count: usize) -> Result<Vec<f64>> {
    if !(r_min > 0.0 && ratio > 1.0 && count >= 2) {
        return Err(NevError::InvalidParameter(
            "grid needs r_min > 0, ratio > 1 and count >= 2".into(),
        ));
    }
    Ok((0..count).map(|k| r_min * ratio.powi(k as i32)).collect())
}

/// CSV with columns `r, r_effective, m, n_pole, N_pole, T` and a `m_inv, n, N` triple per target.
pub fn samples_csv(samples: &[RadialSample]) -> String {
    let mut out = String::from("r,r_effective,m,n_pole,N_pole,T");
    if let Some(first) = samples.first() {
        for t in &first.targets {
            let a = fmt_complex(t.a);
            out.push_str(&format!(",m_inv[{a}],n[{a}],N[{a}]"));
        }
    }
    out.push('\n');
    for s in samples {
        out.push_str(&format!(
            "{},{},{},{},{},{}",
            s.r, s.r_effective, s.m, s.n_pole, s.N_pole, s.T
        ));
        for t in &s.targets {
            out.push_str(&format!(",{},{},{}", t.m_inv, t.n_count, t.N_count));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse;
    use crate::quad::tanh_sinh;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn exp_proximity_matches_oracle() {
        let f = parse("exp(z)").unwrap();
        for r in [1.0, 5.0, 20.0] {
            let p = proximity(&f, r, Target::Pole, 1e-10).unwrap();
            // Oracle: tanh-sinh of r·cos on [-π/2, π/2], independent of the panel driver.
            let o = tanh_sinh(|t, _, _| r * t.cos(), -PI / 2.0, PI / 2.0, 1e-14).value / TAU;
            assert!((p.value - o).abs() <= 1e-6 * o, "{r}: {} vs {o}", p.value);
            assert_eq!(p.r_effective, r);
        }
    }

    #[test]
    fn proximity_simple_values() {
        let f = parse("1/(z-1)").unwrap();
        assert!(proximity(&f, 5.0, Target::Pole, 1e-10).unwrap().value.abs() < 1e-12);
        let q = parse("(shift(exp(z), 1) - exp(z))/exp(z)").unwrap();
        let want = (1f64.exp() - 1.0).ln();
        for r in [0.5, 3.0, 12.0] {
            let p = proximity(&q, r, Target::Pole, 1e-10).unwrap();
            assert!((p.value - want).abs() < 1e-10);
        }
    }

    #[test]
    fn counting_examples() {
        let f = parse("1/(z-0.5)").unwrap();
        let (n_big, n) = counting_integrated(&f, 0.5 * 1f64.exp(), Target::Pole).unwrap();
        assert_eq!(n, 1);
        assert!((n_big - 1.0).abs() < 1e-12);
        let s = parse("sin(pi*z)").unwrap();
        let r = 2.5f64;
        let (n_big, n) = counting_integrated(&s, r, Target::Value(c(0.0, 0.0))).unwrap();
        assert_eq!(n, 5);
        let want = r.ln() + 2.0 * (r / 1.0).ln() + 2.0 * (r / 2.0).ln();
        assert!((n_big - want).abs() < 1e-9);
        let e = parse("exp(z)").unwrap();
        assert_eq!(counting_integrated(&e, 3.0, Target::Pole).unwrap(), (0.0, 0));
    }

    #[test]
    fn characteristic_identities() {
        let p = parse("z^3 - 2*z + 1").unwrap();
        let s = characteristic(&p, 1e4).unwrap();
        let ratio = s.T / (3.0 * 1e4f64.ln());
        assert!((0.98..=1.02).contains(&ratio), "{ratio}");
        let f = parse("(z-1)/(z+2)").unwrap();
        let g = parse("(z+2)/(z-1)").unwrap();
        let d: Vec<f64> = [3.0, 7.0, 20.0, 60.0]
            .iter()
            .map(|r| characteristic(&f, *r).unwrap().T - characteristic(&g, *r).unwrap().T)
            .collect();
        for x in &d {
            assert!((x - d[0]).abs() < 1e-6, "{d:?}");
        }
    }

    #[test]
    fn jensen_examples() {
        assert!(jensen_residual(&parse("z").unwrap(), 3.0).unwrap() < 1e-10);
        assert!(jensen_residual(&parse("exp(z)").unwrap(), 4.0).unwrap() < 1e-8);
        let f = parse("(z-0.5)*(z+2)/(z-3)").unwrap();
        assert!(jensen_residual(&f, 10.0).unwrap() < 1e-8);
    }

    #[test]
    fn sector_examples() {
        let f = parse("exp(z) - 2").unwrap();
        let s = sector_count(&f, 20.0, 0.04, c(1.0, 0.0), Target::Value(c(0.0, 0.0))).unwrap();
        assert_eq!((s.n_total, s.n_sector), (7, 6));
        assert!((s.ratio - 6.0 / 7.0).abs() < 1e-15);
        assert!(in_sector(c(0.0, 2.0) * c(1.0, 1.0), 0.01, c(1.0, 1.0)));
        assert!(!in_sector(c(3.0, 0.0) * c(1.0, 1.0), 0.99, c(1.0, 1.0)));
        assert!(!in_sector(c(0.0, 0.0), 0.5, c(1.0, 0.0)));
        let none = sector_count_points(&[], 5.0, 0.5, c(1.0, 0.0)).unwrap();
        assert_eq!(none.ratio, 0.0);
    }

    #[test]
    fn nudging_moves_off_points() {
        let f = parse("1/(z-2)").unwrap();
        let p = proximity(&f, 2.0, Target::Pole, 1e-9).unwrap();
        assert_eq!(p.r_effective, 2.0 * NUDGE_FACTORS[0]);
        let s = characteristic(&f, 2.0).unwrap();
        assert!((s.T - s.m - s.N_pole).abs() <= 1e-12);
    }
}
