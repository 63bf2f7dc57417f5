//! Proximity estimates for the quotient `(Δ_c^n f - a c^n)/(f^{(n)} - a)` and the
//! growth lemmas behind them.

use super::{
    discarded, fit_constant, k_margin, k_ok, keep_mask, AlphaMode, CheckConfig, CheckReport, CheckVerdict, Row, Sector,
};
use crate::error::{NevError, Result};
use crate::functionals::{counting, located, sector_count_points, Profile, RadialSample};
use crate::growth::{fit_growth, smallness, GrowthFit};
use crate::locate::{SingularRecord, Target};
use crate::model::Expr;
use crate::pairs::is_c_periodic;
use crate::tolerances::SMALL_PASS_RATIO;
use crate::{fmt_complex, C64};
use std::f64::consts::PI;

/// `(Δ_c^n f - a c^n) / (f^{(n)} - a)`.
pub fn quotient(f: &Expr, a: C64, c: C64, n: usize) -> Result<Expr> {
    let num = f.difference(c, n)?.sub(&Expr::constant(a * c.powi(n as i32)));
    let den = f.derivative(n).sub(&Expr::constant(a));
    num.div(&den)
}

/// Worst of several verdicts: any fail fails, then any inconclusive.
pub(super) fn combine(parts: &[CheckVerdict]) -> CheckVerdict {
    if parts.contains(&CheckVerdict::Fail) {
        CheckVerdict::Fail
    } else if parts.iter().any(|v| *v != CheckVerdict::Pass) {
        CheckVerdict::Inconclusive
    } else {
        CheckVerdict::Pass
    }
}

/// Profile and samples of `f` on `grid`, located up to `r_max`.
pub(super) fn profiled(
    f: &Expr,
    targets: &[C64],
    grid: &[f64],
    r_max: f64,
    tol: f64,
) -> Result<(Profile, Vec<RadialSample>)> {
    let p = Profile::new(f, targets, r_max)?;
    let s = p.sample_grid(grid, tol)?;
    Ok((p, s))
}

/// Empirical transcendence: `T / log r` at the top radius is at least twice its value a decade lower.
pub(super) fn transcendental(samples: &[RadialSample]) -> Result<bool> {
    let top = samples
        .last()
        .ok_or_else(|| NevError::InsufficientData("no samples".into()))?;
    let target = top.r_effective / 10.0;
    let mid = samples
        .iter()
        .min_by(|a, b| {
            (a.r_effective - target)
                .abs()
                .total_cmp(&(b.r_effective - target).abs())
        })
        .expect("non-empty");
    if mid.r_effective <= 1.05 || mid.r_effective >= top.r_effective {
        return Err(NevError::InsufficientData(
            "transcendence test needs radii above 1.05 spanning a decade".into(),
        ));
    }
    let top_ratio = top.T / top.r_effective.ln();
    let mid_ratio = mid.T / mid.r_effective.ln();
    Ok(top_ratio > 0.0 && top_ratio >= 2.0 * mid_ratio)
}

/// Samples of `f′` on the grid, the growth fit, and the transcendence and periodicity preconditions.
struct DerivativeData {
    profile: Profile,
    samples: Vec<RadialSample>,
    fit: GrowthFit,
}

fn derivative_data(f: &Expr, c: C64, grid: &[f64], r_max: f64, tol: f64) -> Result<DerivativeData> {
    if is_c_periodic(f, c) {
        return Err(NevError::InvalidInput(format!(
            "function is {}-periodic",
            fmt_complex(c)
        )));
    }
    let fp = f.differentiate();
    let (profile, samples) = profiled(&fp, &[], grid, r_max, tol)?;
    if !transcendental(&samples)? {
        return Err(NevError::InvalidInput(
            "function is not transcendental: T(r, f') / log r does not grow".into(),
        ));
    }
    let fit = fit_growth(&samples)?;
    Ok(DerivativeData { profile, samples, fit })
}

fn record_growth(rep: &mut CheckReport, fit: &GrowthFit) {
    rep.fit("rho", fit.rho);
    rep.fit("mu", fit.mu);
    rep.fit("xi", fit.xi.max(0.0));
}

fn hypothesis_not_met(mut rep: CheckReport, why: String) -> CheckReport {
    rep.verdict = CheckVerdict::HypothesisNotMet;
    rep.note(why);
    rep
}

/// `R_{ε,c}(r, ·)`: share of the points in the double sector around `±ic`.
fn sector_ratio(points: &[SingularRecord], r: f64, eps: f64, c: C64) -> Result<f64> {
    Ok(sector_count_points(points, r, eps, c)?.ratio)
}

/// `m(r, (Δ_cf - ac)/(f′ - a))` against `T(r,f′)/r^{1-ξ-ε}` and the two sector terms.
pub fn check_main_estimate(cfg: &CheckConfig) -> Result<CheckReport> {
    let mut rep = CheckReport::new("main-estimate", cfg);
    let f = cfg.function()?;
    let (a, c, eps) = (cfg.a, cfg.shift()?, cfg.epsilon()?);
    let spec = cfg.default_grid();
    let grid = spec.radii();
    let r_max = spec.r_max();
    let d = derivative_data(&f, c, &grid, r_max, cfg.tol)?;
    record_growth(&mut rep, &d.fit);
    let xi = d.fit.xi.max(0.0);
    if xi >= 1.0 {
        return Ok(hypothesis_not_met(
            rep,
            format!("fitted hyper-order {xi:.3} is not below 1"),
        ));
    }
    let apts = located(&d.profile.function().clone(), Target::Value(a), r_max)?;
    let q = quotient(&f, a, c, 1)?;
    let (_, sq) = profiled(&q, &[], &grid, r_max, cfg.tol)?;
    let keep = keep_mask(&[&d.samples, &sq]);
    let e1 = 1.0 - xi - eps;
    let e2 = 1.5 - 2.0 * xi - eps;
    let (mut radii, mut lhs, mut rhs, mut t) = (vec![], vec![], vec![], vec![]);
    for (i, s) in d.samples.iter().enumerate() {
        let r = s.r_effective;
        let s1 = s.T / r.powf(e1);
        let s2 = sector_ratio(&apts, r, eps, c)? * counting(&apts, r).N / r.powf(e2);
        let s3 = sector_ratio(d.profile.poles(), r, eps, c)? * s.N_pole / r.powf(e2);
        rep.rows.push(Row::new(r, sq[i].m, vec![s1, s2, s3], keep[i]));
        radii.push(r);
        lhs.push(sq[i].m);
        rhs.push(s1 + s2 + s3);
        t.push(s.T);
    }
    rep.columns = vec![
        "T(r,f')/r^(1-xi-eps)".into(),
        "R(r,1/(f'-a)) N(r,1/(f'-a))/r^(3/2-2xi-eps)".into(),
        "R(r,f') N(r,f')/r^(3/2-2xi-eps)".into(),
    ];
    rep.discarded = discarded(&grid, &keep);
    let kf = fit_constant(&radii, &lhs, &rhs, &keep)?;
    rep.record_k(&kf);
    let flagged: Vec<bool> = keep.iter().map(|k| !k).collect();
    let small = smallness(&radii, &lhs, &t, &flagged)?;
    rep.smallness("small_", &small);
    let k_verdict = if k_ok(&kf) {
        CheckVerdict::Pass
    } else {
        CheckVerdict::Fail
    };
    let mut parts = vec![k_verdict];
    let mut margin = k_margin(&kf);
    if xi < 0.75 {
        parts.push(small.verdict.into());
        margin = margin.min(SMALL_PASS_RATIO - small.tail_ratio);
    } else {
        rep.note("fitted hyper-order is not below 3/4; smallness against T(r,f') is not asserted");
    }
    rep.verdict = combine(&parts);
    rep.margin = margin;
    Ok(rep)
}

/// Corollary form: no poles or `a`-points of `f′` in `S ∪ (-S)`, so `LHS <= K T(r,f′)/r^{1-ξ-ε}`.
pub fn check_sector_corollary(cfg: &CheckConfig) -> Result<CheckReport> {
    let mut rep = CheckReport::new("sector-corollary", cfg);
    let f = cfg.function()?;
    let (a, c, eps) = (cfg.a, cfg.shift()?, cfg.epsilon()?);
    let sector = cfg.sector.unwrap_or(Sector {
        direction: 0.0,
        half_angle: PI / 8.0,
    });
    if !(sector.half_angle > 0.0 && sector.half_angle < PI / 2.0) {
        return Err(NevError::InvalidParameter(
            "sector half-angle must lie in (0, pi/2)".into(),
        ));
    }
    rep.params.insert(
        "sector".into(),
        serde_json::json!({"direction": sector.direction, "half_angle": sector.half_angle}),
    );
    let spec = cfg.default_grid();
    let grid = spec.radii();
    let r_max = spec.r_max();
    let d = derivative_data(&f, c, &grid, r_max, cfg.tol)?;
    record_growth(&mut rep, &d.fit);
    let apts = located(d.profile.function(), Target::Value(a), r_max)?;
    let inside: Vec<C64> = apts
        .iter()
        .chain(d.profile.poles())
        .filter(|p| p.location.norm() <= r_max && sector.contains(p.location))
        .map(|p| p.location)
        .collect();
    rep.fit("points_in_sector", inside.len() as f64);
    if !inside.is_empty() {
        rep.verdict = CheckVerdict::PreconditionViolated;
        let shown: Vec<String> = inside.iter().take(5).map(|z| fmt_complex(*z)).collect();
        rep.note(format!(
            "S and -S contain {} pole(s) or a-point(s) of f', e.g. {}",
            inside.len(),
            shown.join(", ")
        ));
        return Ok(rep);
    }
    let xi = d.fit.xi.max(0.0);
    if xi >= 1.0 {
        return Ok(hypothesis_not_met(
            rep,
            format!("fitted hyper-order {xi:.3} is not below 1"),
        ));
    }
    let q = quotient(&f, a, c, 1)?;
    let (_, sq) = profiled(&q, &[], &grid, r_max, cfg.tol)?;
    let keep = keep_mask(&[&d.samples, &sq]);
    let (mut radii, mut lhs, mut rhs) = (vec![], vec![], vec![]);
    for (i, s) in d.samples.iter().enumerate() {
        let r = s.r_effective;
        let s1 = s.T / r.powf(1.0 - xi - eps);
        rep.rows.push(Row::new(r, sq[i].m, vec![s1], keep[i]));
        radii.push(r);
        lhs.push(sq[i].m);
        rhs.push(s1);
    }
    rep.columns = vec!["T(r,f')/r^(1-xi-eps)".into()];
    rep.discarded = discarded(&grid, &keep);
    let kf = fit_constant(&radii, &lhs, &rhs, &keep)?;
    rep.record_k(&kf);
    rep.verdict = if k_ok(&kf) {
        CheckVerdict::Pass
    } else {
        CheckVerdict::Fail
    };
    rep.margin = k_margin(&kf);
    Ok(rep)
}

/// Smallness of `m(r, (Δ_c^n f - a c^n)/(f^{(n)} - a))` and, for `k > 0`, of `m(r, Δ_c^{n+k} f / f^{(n)})`.
pub fn check_higher_order(cfg: &CheckConfig) -> Result<CheckReport> {
    let mut rep = CheckReport::new("higher-order", cfg);
    let f = cfg.function()?;
    let (a, c, n, k) = (cfg.a, cfg.shift()?, cfg.n, cfg.k);
    if n == 0 {
        return Err(NevError::InvalidParameter("order n must be at least 1".into()));
    }
    rep.params.insert("k".into(), serde_json::json!(k));
    let base = f.difference(c, n - 1)?;
    if is_c_periodic(&base, c) {
        return Err(NevError::InvalidInput(format!(
            "difference of order {} is {}-periodic",
            n - 1,
            fmt_complex(c)
        )));
    }
    if k > 0 && is_c_periodic(&f.difference(c, n + k - 1)?, c) {
        return Err(NevError::InvalidInput(format!(
            "difference of order {} is {}-periodic",
            n + k - 1,
            fmt_complex(c)
        )));
    }
    let spec = cfg.default_grid();
    let grid = spec.radii();
    let r_max = spec.r_max();
    let d = derivative_data(&f, c, &grid, r_max, cfg.tol)?;
    record_growth(&mut rep, &d.fit);
    let xi = d.fit.xi.max(0.0);
    if xi >= 0.75 {
        return Ok(hypothesis_not_met(
            rep,
            format!("fitted hyper-order {xi:.3} is not below 3/4"),
        ));
    }
    let q = quotient(&f, a, c, n)?;
    let (_, sq) = profiled(&q, &[], &grid, r_max, cfg.tol)?;
    let sk = if k > 0 {
        let q2 = f.difference(c, n + k)?.div(&f.derivative(n))?;
        Some(profiled(&q2, &[], &grid, r_max, cfg.tol)?.1)
    } else {
        None
    };
    let mut series: Vec<&[RadialSample]> = vec![&d.samples, &sq];
    if let Some(s) = &sk {
        series.push(s);
    }
    let keep = keep_mask(&series);
    let flagged: Vec<bool> = keep.iter().map(|k| !k).collect();
    let radii: Vec<f64> = d.samples.iter().map(|s| s.r_effective).collect();
    let t: Vec<f64> = d.samples.iter().map(|s| s.T).collect();
    let lhs: Vec<f64> = sq.iter().map(|s| s.m).collect();
    for i in 0..grid.len() {
        let mut terms = vec![t[i]];
        if let Some(s) = &sk {
            terms.push(s[i].m);
        }
        rep.rows.push(Row::new(radii[i], lhs[i], terms, keep[i]));
    }
    rep.columns = vec!["T(r,f')".into()];
    rep.discarded = discarded(&grid, &keep);
    let small = smallness(&radii, &lhs, &t, &flagged)?;
    rep.smallness("small_", &small);
    let mut parts = vec![CheckVerdict::from(small.verdict)];
    let mut margin = SMALL_PASS_RATIO - small.tail_ratio;
    if let Some(s) = &sk {
        rep.columns.push(format!("m(r, D^{}f / f^({n}))", n + k));
        let m2: Vec<f64> = s.iter().map(|x| x.m).collect();
        let small2 = smallness(&radii, &m2, &t, &flagged)?;
        rep.smallness("small_k_", &small2);
        parts.push(small2.verdict.into());
        margin = margin.min(SMALL_PASS_RATIO - small2.tail_ratio);
    }
    rep.verdict = combine(&parts);
    rep.margin = margin;
    Ok(rep)
}

/// The lemma without exceptional sets: `LHS <= K (α+1)/(α-1) [T(α(r+|c|),f′)/r^δ + (R_∞ + R_a) T(α(r+|c|),f′)/r^{δ/2}]`.
pub fn check_intermediate_lemma(cfg: &CheckConfig) -> Result<CheckReport> {
    let mut rep = CheckReport::new("intermediate-lemma", cfg);
    let f = cfg.function()?;
    let (a, c, eps) = (cfg.a, cfg.shift()?, cfg.epsilon()?);
    let delta = cfg.delta.unwrap_or(0.5);
    match cfg.alpha {
        AlphaMode::Constant(al) if !(al > 1.0 && al.is_finite()) => {
            return Err(NevError::InvalidInput(format!("alpha = {al} must exceed 1")));
        }
        AlphaMode::Constant(al) => {
            rep.params.insert("alpha".into(), serde_json::json!(al));
        }
        AlphaMode::Eq => {
            rep.params.insert("alpha".into(), serde_json::json!("eq"));
        }
    }
    rep.params.insert("delta".into(), serde_json::json!(delta));
    let spec = cfg.default_grid();
    let grid = spec.radii();
    let r_max = spec.r_max();
    let d = derivative_data(&f, c, &grid, r_max, cfg.tol)?;
    record_growth(&mut rep, &d.fit);
    let xi = d.fit.xi.max(0.0);
    if xi >= 1.0 {
        return Ok(hypothesis_not_met(
            rep,
            format!("fitted hyper-order {xi:.3} is not below 1"),
        ));
    }
    if !(delta > 0.0 && delta < 1.0 - xi) {
        return Err(NevError::InvalidParameter(format!(
            "delta must lie in (0, 1 - xi) = (0, {:.3})",
            1.0 - xi
        )));
    }
    let cn = c.norm();
    let fp = d.profile.function().clone();
    // α per radius; `None` where log T(r+|c|, f′) <= 1 leaves the choice undefined.
    let alphas: Vec<Option<f64>> = match cfg.alpha {
        AlphaMode::Constant(al) => vec![Some(al); grid.len()],
        AlphaMode::Eq => {
            let shifted: Vec<f64> = grid.iter().map(|r| r + cn).collect();
            let (_, st) = profiled(&fp, &[], &shifted, r_max + cn, cfg.tol)?;
            let lambda = eps / 3.0;
            st.iter()
                .map(|s| {
                    let l = s.T.ln();
                    (l > 1.0).then(|| 1.0 + 1.0 / l.powf(1.0 + lambda))
                })
                .collect()
        }
    };
    let outer: Vec<f64> = grid
        .iter()
        .zip(&alphas)
        .map(|(r, al)| al.unwrap_or(1.0) * (r + cn))
        .collect();
    let outer_max = outer.iter().cloned().fold(0.0, f64::max);
    let (po, so) = profiled(&fp, &[], &outer, outer_max, cfg.tol)?;
    let apts = located(&fp, Target::Value(a), outer_max)?;
    let q = quotient(&f, a, c, 1)?;
    let (_, sq) = profiled(&q, &[], &grid, r_max, cfg.tol)?;
    let keep_base = keep_mask(&[&d.samples, &sq, &so]);
    let keep: Vec<bool> = keep_base
        .iter()
        .zip(&alphas)
        .map(|(k, al)| *k && al.is_some())
        .collect();
    let undefined = alphas.iter().filter(|a| a.is_none()).count();
    if undefined > 0 {
        rep.note(format!(
            "{undefined} radius/radii skipped: log T(r+|c|, f') <= 1 leaves alpha undefined"
        ));
    }
    let (mut radii, mut lhs, mut rhs) = (vec![], vec![], vec![]);
    for i in 0..grid.len() {
        let r = sq[i].r_effective;
        let ro = so[i].r_effective;
        let al = alphas[i].unwrap_or(f64::NAN);
        let fac = (al + 1.0) / (al - 1.0);
        let rsum = sector_ratio(po.poles(), ro, eps, c)? + sector_ratio(&apts, ro, eps, c)?;
        let t1 = fac * so[i].T / r.powf(delta);
        let t2 = fac * rsum * so[i].T / r.powf(delta / 2.0);
        let row = Row::new(r, sq[i].m, vec![t1, t2], keep[i]).labelled(format!("alpha={al}"));
        rep.rows.push(row);
        radii.push(r);
        lhs.push(sq[i].m);
        rhs.push(if al.is_finite() { t1 + t2 } else { 0.0 });
    }
    rep.columns = vec![
        "(a+1)/(a-1) T(a(r+|c|),f')/r^d".into(),
        "(a+1)/(a-1) R T(a(r+|c|),f')/r^(d/2)".into(),
    ];
    rep.discarded = discarded(&grid, &keep_base);
    let kf = fit_constant(&radii, &lhs, &rhs, &keep)?;
    rep.record_k(&kf);
    rep.verdict = if k_ok(&kf) {
        CheckVerdict::Pass
    } else {
        CheckVerdict::Fail
    };
    rep.margin = k_margin(&kf);
    Ok(rep)
}

/// `T(r+u) - T(r) = o(T(r)/r^δ)`: smallness of `(T(r+u) - T(r)) r^δ` against `T(r)`.
pub fn check_shift_lemma(cfg: &CheckConfig) -> Result<CheckReport> {
    let mut rep = CheckReport::new("shift-lemma", cfg);
    let f = cfg.function()?;
    let u = cfg.u;
    if !(u > 0.0 && u.is_finite()) {
        return Err(NevError::InvalidParameter("shift length u must be positive".into()));
    }
    let delta = cfg.delta.unwrap_or(0.5);
    rep.params.insert("u".into(), serde_json::json!(u));
    rep.params.insert("delta".into(), serde_json::json!(delta));
    // An r^-1/2 decay needs a top decade above r = 100 to clear the pass ratio.
    let spec = cfg.grid_or(2.0, 1.25, 32);
    let grid = spec.radii();
    let r_max = spec.r_max() + u;
    let shifted: Vec<f64> = grid.iter().map(|r| r + u).collect();
    let p = Profile::new(&f, &[], r_max)?;
    let s0 = p.sample_grid(&grid, cfg.tol)?;
    let fit = fit_growth(&s0)?;
    record_growth(&mut rep, &fit);
    let xi = fit.xi.max(0.0);
    if xi >= 1.0 {
        return Ok(hypothesis_not_met(
            rep,
            format!("fitted hyper-order {xi:.3} is not below 1"),
        ));
    }
    if !(delta > 0.0 && delta < 1.0 - xi - 0.05) {
        return Err(NevError::InvalidParameter(format!(
            "delta must lie in (0, 1 - xi - 0.05) = (0, {:.3})",
            1.0 - xi - 0.05
        )));
    }
    let s1 = p.sample_grid(&shifted, cfg.tol)?;
    let keep = keep_mask(&[&s0, &s1]);
    let flagged: Vec<bool> = keep.iter().map(|k| !k).collect();
    let radii: Vec<f64> = s0.iter().map(|s| s.r_effective).collect();
    let t: Vec<f64> = s0.iter().map(|s| s.T).collect();
    let numer: Vec<f64> = (0..grid.len())
        .map(|i| (s1[i].T - s0[i].T) * radii[i].powf(delta))
        .collect();
    for i in 0..grid.len() {
        rep.rows.push(Row::new(radii[i], numer[i], vec![t[i]], keep[i]));
    }
    rep.columns = vec!["T(r)".into()];
    rep.discarded = discarded(&grid, &keep);
    let small = smallness(&radii, &numer, &t, &flagged)?;
    rep.smallness("small_", &small);
    rep.verdict = small.verdict.into();
    rep.margin = SMALL_PASS_RATIO - small.tail_ratio;
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::GridSpec;
    use crate::NevError;

    fn cfg(f: &str, a: C64, c: C64) -> CheckConfig {
        CheckConfig {
            a,
            c,
            ..CheckConfig::with_f(f)
        }
    }

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn exp_main_estimate_constant_lhs() {
        let rep = check_main_estimate(&cfg("exp(z)", re(0.0), re(1.0))).unwrap();
        let want = (std::f64::consts::E - 1.0).ln();
        for row in &rep.rows {
            assert!((row.lhs - want).abs() < 1e-9, "{} {}", row.r, row.lhs);
        }
        assert_eq!(rep.verdict, CheckVerdict::Pass, "{:?}", rep.fitted);
    }

    #[test]
    fn polynomial_is_rejected() {
        assert!(matches!(
            check_main_estimate(&cfg("z", re(0.0), re(1.0))),
            Err(NevError::InvalidInput(_))
        ));
        assert!(matches!(
            check_main_estimate(&cfg("exp(2*pi*i*z)", re(0.0), re(1.0))),
            Err(NevError::InvalidInput(_))
        ));
    }

    #[test]
    fn higher_order_agrees_with_main_estimate_for_n1() {
        let c = cfg("exp(z)", re(2.0), re(1.0));
        let a = check_main_estimate(&c).unwrap();
        let b = check_higher_order(&c).unwrap();
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert!((x.lhs - y.lhs).abs() <= 1e-10, "{} {}", x.lhs, y.lhs);
        }
    }

    #[test]
    fn sector_precondition() {
        let mut c = cfg("exp(z)", re(2.0), re(1.0));
        c.sector = Some(Sector {
            direction: 0.0,
            half_angle: PI / 6.0,
        });
        let rep = check_sector_corollary(&c).unwrap();
        assert_eq!(rep.verdict, CheckVerdict::PreconditionViolated);
        c.sector = Some(Sector {
            direction: PI / 4.0,
            half_angle: PI / 16.0,
        });
        let rep = check_sector_corollary(&c).unwrap();
        assert_eq!(rep.verdict, CheckVerdict::Pass, "{:?}", rep.fitted);
    }

    #[test]
    fn intermediate_alpha_modes() {
        let mut c = cfg("exp(z)", re(0.0), re(1.0));
        assert_eq!(check_intermediate_lemma(&c).unwrap().verdict, CheckVerdict::Pass);
        c.alpha = AlphaMode::Constant(1.0);
        assert!(matches!(check_intermediate_lemma(&c), Err(NevError::InvalidInput(_))));
        let mut c = cfg("exp(z)", re(2.0), re(1.0));
        c.alpha = AlphaMode::Eq;
        let rep = check_intermediate_lemma(&c).unwrap();
        assert_eq!(rep.verdict, CheckVerdict::Pass, "{:?}", rep.fitted);
    }

    #[test]
    fn shift_lemma_exp_and_polynomial() {
        let rep = check_shift_lemma(&CheckConfig::with_f("exp(z)")).unwrap();
        assert_eq!(rep.verdict, CheckVerdict::Pass, "{:?}", rep.fitted);
        let mut c = CheckConfig::with_f("z^3 - 2*z + 1");
        c.grid = Some(GridSpec::new(2.0, 1.25, 30).unwrap());
        let rep = check_shift_lemma(&c).unwrap();
        assert_eq!(rep.verdict, CheckVerdict::Pass, "{:?}", rep.fitted);
    }
}
