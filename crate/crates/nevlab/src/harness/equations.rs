//! Delay-differential equations: smallness of `m(r,P)` for `(f′)^n P = Q`, and
//! the value-distribution identity for `Σ a_j Δ_{c_j} f = f′ P(f)/Q(f)`.

use super::estimates::{profiled, transcendental};
use super::{discarded, keep_mask, CheckConfig, CheckReport, CheckVerdict, Row};
use crate::error::{NevError, Result};
use crate::functionals::{counting, located};
use crate::growth::{fit_growth, smallness};
use crate::locate::Target;
use crate::model::{probe_points, Expr};
use crate::pairs::is_c_periodic;
use crate::quad::integrate;
use crate::tolerances::{PROBE_SEED, SMALL_PASS_RATIO};
use crate::{fmt_complex, C64};
use std::f64::consts::{E, TAU};

/// Residual tolerance of an equation, relative to the summed term magnitudes.
const RESIDUAL_REL: f64 = 1e-8;
const RESIDUAL_PROBES: usize = 20;
/// `|P|` below this fraction of its summed term magnitudes counts as an exact cancellation.
const NOISE_FLOOR: f64 = 1e-12;
const PANELS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Atom {
    Value,
    Derivative(usize),
    Difference(C64),
}

impl Atom {
    fn expr(&self, f: &Expr) -> Result<Expr> {
        Ok(match self {
            Atom::Value => f.clone(),
            Atom::Derivative(k) => f.derivative(*k),
            Atom::Difference(c) => f.difference(*c, 1)?,
        })
    }
}

/// `coeff · Π atom^power`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coeff: C64,
    pub atoms: Vec<(Atom, u32)>,
}

impl Monomial {
    pub fn new(coeff: C64, atoms: &[(Atom, u32)]) -> Monomial {
        Monomial {
            coeff,
            atoms: atoms.to_vec(),
        }
    }

    fn difference_degree(&self) -> u32 {
        self.atoms
            .iter()
            .filter(|(a, _)| matches!(a, Atom::Difference(_)))
            .map(|(_, p)| p)
            .sum()
    }

    fn expr(&self, f: &Expr) -> Result<Expr> {
        let mut e = Expr::constant(self.coeff);
        for (a, p) in &self.atoms {
            e = e.mul(&a.expr(f)?.powi(*p as i32));
        }
        Ok(e)
    }
}

/// Polynomial in `f`, its derivatives and its differences with constant coefficients.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiffPoly {
    pub terms: Vec<Monomial>,
}

impl DiffPoly {
    pub fn new(terms: Vec<Monomial>) -> DiffPoly {
        DiffPoly { terms }
    }

    /// Total degree in the differences only.
    pub fn difference_degree(&self) -> u32 {
        self.terms.iter().map(Monomial::difference_degree).max().unwrap_or(0)
    }

    fn only_differences(&self) -> bool {
        self.terms
            .iter()
            .all(|m| m.atoms.iter().all(|(a, _)| matches!(a, Atom::Difference(_))))
    }

    fn term_exprs(&self, f: &Expr) -> Result<Vec<Expr>> {
        self.terms.iter().map(|m| m.expr(f)).collect()
    }
}

/// Sum of evaluated terms and the sum of their magnitudes.
fn eval_terms(terms: &[Expr], z: C64) -> (C64, f64) {
    terms
        .iter()
        .map(|t| t.eval(z))
        .fold((C64::new(0.0, 0.0), 0.0), |(s, m), v| (s + v, m + v.norm()))
}

/// `(f′)^n P = Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClunieSpec {
    pub f: String,
    pub n: u32,
    pub p: DiffPoly,
    pub q: DiffPoly,
}

/// Named equations: `nonsmall` (must fail), `zero` and `sine`.
pub fn clunie_fixture(name: &str) -> Result<ClunieSpec> {
    let one = C64::new(1.0, 0.0);
    let em1 = C64::new(E - 1.0, 0.0);
    let d1 = Atom::Difference(one);
    let fixture = match name {
        "nonsmall" => ClunieSpec {
            f: "exp(z)".into(),
            n: 1,
            p: DiffPoly::new(vec![Monomial::new(one, &[(d1, 1)])]),
            q: DiffPoly::new(vec![Monomial::new(em1, &[(Atom::Derivative(1), 1), (Atom::Value, 1)])]),
        },
        "zero" => ClunieSpec {
            f: "exp(z)".into(),
            n: 1,
            p: DiffPoly::new(vec![
                Monomial::new(one, &[(d1, 1)]),
                Monomial::new(-em1, &[(Atom::Derivative(1), 1)]),
            ]),
            q: DiffPoly::default(),
        },
        "sine" => ClunieSpec {
            f: "sin(pi*z)".into(),
            n: 2,
            p: DiffPoly::new(vec![Monomial::new(one, &[(d1, 1)])]),
            q: DiffPoly::new(vec![Monomial::new(one, &[(Atom::Derivative(1), 2), (d1, 1)])]),
        },
        other => return Err(NevError::InvalidInput(format!("unknown equation fixture '{other}'"))),
    };
    Ok(fixture)
}

/// `m(r,P)` with exact cancellations treated as zero.
fn proximity_of_terms(terms: &[Expr], poles: &[C64], r: f64, tol: f64) -> Result<f64> {
    // Uniform panels first, so the kinks of log⁺ cannot hide from the error estimate.
    let mut breaks: Vec<f64> = (1..PANELS).map(|k| TAU * k as f64 / PANELS as f64).collect();
    breaks.extend(
        poles
            .iter()
            .filter(|p| (p.norm() - r).abs() < 0.5)
            .map(|p| p.arg().rem_euclid(TAU)),
    );
    let out = integrate(
        |t: f64| {
            let (s, scale) = eval_terms(terms, C64::from_polar(r, t));
            if s.norm() <= NOISE_FLOOR * scale {
                0.0
            } else {
                s.norm().ln().max(0.0)
            }
        },
        0.0,
        TAU,
        &breaks,
        1e-10,
        tol,
        4000,
    );
    if !out.value.is_finite() {
        return Err(NevError::PrecisionFailure(format!("m(r,P) is not finite at r = {r}")));
    }
    Ok(out.value / TAU)
}

fn check_residual(lhs: &[Expr], rhs: &[Expr], what: &str) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for z in probe_points(RESIDUAL_PROBES, 2.0, PROBE_SEED) {
        let (l, ml) = eval_terms(lhs, z);
        let (r, mr) = eval_terms(rhs, z);
        let res = (l - r).norm();
        let scale = ml + mr;
        if !(res <= RESIDUAL_REL * scale) {
            return Err(NevError::NotASolution(format!(
                "{what} fails at z = {}: residual {res:.3e} against scale {scale:.3e}",
                fmt_complex(z)
            )));
        }
        worst = worst.max(if scale > 0.0 { res / scale } else { 0.0 });
    }
    Ok(worst)
}

/// Shifts appearing in difference atoms.
fn shifts_of(polys: &[&DiffPoly]) -> Vec<C64> {
    let mut out: Vec<C64> = vec![];
    for p in polys {
        for m in &p.terms {
            for (a, _) in &m.atoms {
                if let Atom::Difference(c) = a {
                    if !out.contains(c) {
                        out.push(*c);
                    }
                }
            }
        }
    }
    out
}

/// `m(r,P)` small against `T(r,f)` for a solution of `(f′)^n P = Q` with `Q` of difference-degree at most `n`.
pub fn check_clunie_analogue(cfg: &CheckConfig) -> Result<CheckReport> {
    let name = cfg.fixture.as_deref().unwrap_or("zero");
    let spec = clunie_fixture(name)?;
    let cfg = CheckConfig {
        f: Some(cfg.f.clone().unwrap_or(spec.f.clone())),
        fixture: Some(name.to_string()),
        ..cfg.clone()
    };
    let mut rep = CheckReport::new("clunie-analogue", &cfg);
    rep.params.remove("a");
    rep.params.remove("c");
    rep.params.insert("n".into(), serde_json::json!(spec.n));
    let f = cfg.function()?;
    let dq = spec.q.difference_degree();
    if dq > spec.n {
        return Err(NevError::DegreeViolation(format!(
            "Q has degree {dq} in the differences, above n = {}",
            spec.n
        )));
    }
    let p_terms = spec.p.term_exprs(&f)?;
    let fp_n = f.differentiate().powi(spec.n as i32);
    let lhs: Vec<Expr> = p_terms.iter().map(|t| fp_n.mul(t)).collect();
    let residual = check_residual(&lhs, &spec.q.term_exprs(&f)?, "(f')^n P = Q")?;
    rep.fit("residual", residual);
    if !spec.p.only_differences() || !spec.q.only_differences() {
        rep.note("P or Q has terms outside the differences of f; such coefficients need not be small");
    }
    for c in shifts_of(&[&spec.p, &spec.q]) {
        if is_c_periodic(&f, c) {
            return Err(NevError::InvalidInput(format!(
                "function is {}-periodic",
                fmt_complex(c)
            )));
        }
    }
    let grid_spec = cfg.default_grid();
    let grid = grid_spec.radii();
    let r_max = grid_spec.r_max();
    let (_, sf) = profiled(&f, &[], &grid, r_max, cfg.tol)?;
    if !transcendental(&sf)? {
        return Err(NevError::InvalidInput("function is not transcendental".into()));
    }
    let fit = fit_growth(&sf)?;
    rep.fit("xi", fit.xi);
    if fit.xi >= 0.75 {
        rep.verdict = CheckVerdict::HypothesisNotMet;
        rep.note(format!("fitted hyper-order {:.3} is not below 3/4", fit.xi));
        return Ok(rep);
    }
    let mut p_expr = Expr::constant(C64::new(0.0, 0.0));
    for t in &p_terms {
        p_expr = p_expr.add(t);
    }
    let poles: Vec<C64> = located(&p_expr, Target::Pole, r_max)?
        .iter()
        .map(|p| p.location)
        .collect();
    let keep = keep_mask(&[&sf]);
    let flagged: Vec<bool> = keep.iter().map(|k| !k).collect();
    let (mut radii, mut mp, mut t) = (vec![], vec![], vec![]);
    for (i, s) in sf.iter().enumerate() {
        let m = proximity_of_terms(&p_terms, &poles, s.r_effective, cfg.tol)?;
        rep.rows.push(Row::new(s.r_effective, m, vec![s.T], keep[i]));
        radii.push(s.r_effective);
        mp.push(m);
        t.push(s.T);
    }
    rep.columns = vec!["T(r,f)".into()];
    rep.discarded = discarded(&grid, &keep);
    let small = smallness(&radii, &mp, &t, &flagged)?;
    rep.smallness("", &small);
    rep.verdict = small.verdict.into();
    rep.margin = SMALL_PASS_RATIO - small.tail_ratio;
    Ok(rep)
}

/// `Σ a_j Δ_{c_j} f = f′ P(f)/Q(f)` with `Q = Π (f - b_j)`, constant coefficients throughout.
#[derive(Debug, Clone, PartialEq)]
pub struct MohonkoSpec {
    pub f: String,
    pub a: Vec<C64>,
    pub shifts: Vec<C64>,
    /// Coefficients of `P` in ascending powers of `f`.
    pub p: Vec<C64>,
    /// Roots of `Q`.
    pub b: Vec<C64>,
    /// The b = 0 case of the Quispel-Capel-Sahadevan equation, `Δ_1 w - Δ_{-1} w = -a w′/w`.
    pub qcs: bool,
}

/// Named equations: `degenerate`, `unit`, `manufactured`, and `qcs` (needs a candidate `w` and the constant `a`).
pub fn mohonko_fixture(name: &str, a: C64) -> Result<MohonkoSpec> {
    let one = C64::new(1.0, 0.0);
    let em1 = C64::new(E - 1.0, 0.0);
    let exp = |a: Vec<C64>, p: Vec<C64>, b: Vec<C64>| MohonkoSpec {
        f: "exp(z)".into(),
        a,
        shifts: vec![one],
        p,
        b,
        qcs: false,
    };
    Ok(match name {
        "degenerate" => exp(vec![one], vec![em1], vec![]),
        "unit" => exp(vec![one / em1], vec![one], vec![]),
        "manufactured" => exp(vec![one], vec![-em1, em1], vec![one]),
        "qcs" => MohonkoSpec {
            f: String::new(),
            a: vec![one, -one],
            shifts: vec![one, -one],
            p: vec![-a],
            b: vec![C64::new(0.0, 0.0)],
            qcs: true,
        },
        other => return Err(NevError::InvalidInput(format!("unknown equation fixture '{other}'"))),
    })
}

fn degree(coeffs: &[C64]) -> usize {
    coeffs.iter().rposition(|c| c.norm() != 0.0).unwrap_or(0)
}

/// `Σ N(r,1/(f - b_j)) = deg_f(R) T(r,f) + slack` with the slack small against `T(r,f)`.
pub fn check_mohonko_analogue(cfg: &CheckConfig) -> Result<CheckReport> {
    let name = cfg.fixture.as_deref().unwrap_or("manufactured");
    let spec = mohonko_fixture(name, cfg.a)?;
    let f_src = match (&cfg.f, spec.qcs) {
        (Some(f), _) => f.clone(),
        (None, false) => spec.f.clone(),
        (None, true) => {
            return Err(NevError::InvalidParameter(
                "the qcs equation needs a candidate function".into(),
            ))
        }
    };
    let cfg = CheckConfig {
        f: Some(f_src),
        fixture: Some(name.to_string()),
        ..cfg.clone()
    };
    let mut rep = CheckReport::new("mohonko-analogue", &cfg);
    rep.params.remove("c");
    if !spec.qcs {
        rep.params.remove("a");
    }
    let f = cfg.function()?;
    for (i, b) in spec.b.iter().enumerate() {
        if spec.b[..i].contains(b) {
            return Err(NevError::InvalidInput("the roots of Q must be distinct".into()));
        }
    }
    let (dp, k) = (degree(&spec.p), spec.b.len());
    if dp > k {
        return Err(NevError::DegreeViolation(format!("deg P = {dp} exceeds deg Q = {k}")));
    }
    // Unreduced degree of R = P/Q.
    let deg_r = dp.max(k);
    rep.fit("deg_R", deg_r as f64);
    // Residual of (Σ a_j Δ_{c_j} f) Q(f) = f′ P(f), expanded termwise.
    let mut q_poly = vec![C64::new(1.0, 0.0)];
    for b in &spec.b {
        let mut next = vec![C64::new(0.0, 0.0); q_poly.len() + 1];
        for (i, c) in q_poly.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= c * b;
        }
        q_poly = next;
    }
    let mut lhs = vec![];
    for (aj, cj) in spec.a.iter().zip(&spec.shifts) {
        let d = f.difference(*cj, 1)?;
        for (i, q) in q_poly.iter().enumerate() {
            if q.norm() != 0.0 {
                lhs.push(d.mul(&f.powi(i as i32)).scale(aj * q));
            }
        }
    }
    let fp = f.differentiate();
    let rhs: Vec<Expr> = spec
        .p
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() != 0.0)
        .map(|(i, c)| fp.mul(&f.powi(i as i32)).scale(*c))
        .collect();
    let residual = check_residual(&lhs, &rhs, "the equation")?;
    rep.fit("residual", residual);
    for c in &spec.shifts {
        if is_c_periodic(&f, *c) {
            return Err(NevError::InvalidInput(format!(
                "function is {}-periodic",
                fmt_complex(*c)
            )));
        }
    }
    let grid_spec = cfg.default_grid();
    let grid = grid_spec.radii();
    let r_max = grid_spec.r_max();
    let (_, sf) = profiled(&f, &spec.b, &grid, r_max, cfg.tol)?;
    let fit = fit_growth(&sf)?;
    rep.fit("xi", fit.xi);
    if fit.xi >= 0.75 {
        rep.verdict = CheckVerdict::HypothesisNotMet;
        rep.note(format!("fitted hyper-order {:.3} is not below 3/4", fit.xi));
        return Ok(rep);
    }
    let points: Vec<_> = spec
        .b
        .iter()
        .map(|b| located(&f, Target::Value(*b), r_max))
        .collect::<Result<_>>()?;
    let keep = keep_mask(&[&sf]);
    let flagged: Vec<bool> = keep.iter().map(|k| !k).collect();
    let (mut radii, mut slack, mut t) = (vec![], vec![], vec![]);
    for (i, s) in sf.iter().enumerate() {
        let r = s.r_effective;
        let lhs: f64 = points.iter().map(|p| counting(p, r).N).sum();
        // The recast equation compares against T(r,1/w), which differs from T(r,w) by a constant.
        let base = if spec.qcs {
            let e = s.target(spec.b[0]).expect("target sampled");
            e.m_inv + e.N_count
        } else {
            s.T
        };
        let sl = lhs - deg_r as f64 * base;
        rep.rows.push(Row::new(r, lhs, vec![deg_r as f64 * base, sl], keep[i]));
        radii.push(r);
        slack.push(sl.abs());
        t.push(s.T);
    }
    rep.columns = vec!["deg_R T".into(), "slack".into()];
    rep.discarded = discarded(&grid, &keep);
    let small = smallness(&radii, &slack, &t, &flagged)?;
    rep.smallness("slack_", &small);
    rep.verdict = small.verdict.into();
    rep.margin = SMALL_PASS_RATIO - small.tail_ratio;
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(name: &str) -> CheckConfig {
        CheckConfig {
            fixture: Some(name.into()),
            ..CheckConfig::default()
        }
    }

    #[test]
    fn clunie_fixtures() {
        let zero = check_clunie_analogue(&fixture("zero")).unwrap();
        assert_eq!(zero.verdict, CheckVerdict::Pass);
        assert!(zero.rows.iter().all(|r| r.lhs == 0.0));
        let bad = check_clunie_analogue(&fixture("nonsmall")).unwrap();
        assert_eq!(bad.verdict, CheckVerdict::Fail);
        assert!(!bad.notes.is_empty());
        // m(r,(e-1)e^z) = (r sin t + L t)/π with L = log(e-1) and t = arccos(-L/r).
        let row = bad.rows.last().unwrap();
        let l = (E - 1.0).ln();
        let t = (-l / row.r).acos();
        let exact = (row.r * t.sin() + l * t) / std::f64::consts::PI;
        assert!(
            (row.lhs - exact).abs() < 1e-8 * exact,
            "{} {} {}",
            row.r,
            row.lhs,
            exact
        );
    }

    #[test]
    fn clunie_rejects_non_solutions_and_high_degree() {
        let mut cfg = fixture("nonsmall");
        cfg.f = Some("exp(2*z)".into());
        assert!(matches!(check_clunie_analogue(&cfg), Err(NevError::NotASolution(_))));
        assert!(clunie_fixture("sine").unwrap().q.difference_degree() <= 2);
    }

    #[test]
    fn mohonko_fixtures() {
        for name in ["degenerate", "unit", "manufactured"] {
            let rep = check_mohonko_analogue(&fixture(name)).unwrap();
            assert_eq!(rep.verdict, CheckVerdict::Pass, "{name}: {:?}", rep.fitted);
        }
        let mut cfg = fixture("qcs");
        cfg.f = Some("exp(z)".into());
        cfg.a = C64::new(1.0, 0.0);
        assert!(matches!(check_mohonko_analogue(&cfg), Err(NevError::NotASolution(_))));
    }
}
