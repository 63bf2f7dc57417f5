//! Counting-function inequalities: the Jensen consequence, deficiencies, pair
//! indices and the truncated defect relation.

use super::estimates::{combine, profiled, transcendental};
use super::{discarded, keep_mask, CheckConfig, CheckReport, CheckVerdict, Row};
use crate::error::{NevError, Result};
use crate::functionals::{counting, located, RadialSample, REACH};
use crate::growth::{deficiency, fit_growth, pair_index, pi_hat, robust_limsup, smallness, GrowthFit};
use crate::locate::Target;
use crate::model::{Expr, Lattice};
use crate::pairs::{is_c_periodic, n_var_count, n_var_records, pair_count, HattedProfile, PairContext};
use crate::tolerances::{DEFECT_SLACK, ORDER_GUARD, SMALL_PASS_RATIO};
use crate::{fmt_complex, C64};
use std::sync::Arc;

fn not_periodic(f: &Expr, c: C64) -> Result<()> {
    if is_c_periodic(f, c) {
        return Err(NevError::InvalidInput(format!(
            "function is {}-periodic",
            fmt_complex(c)
        )));
    }
    Ok(())
}

fn ratio_to(values: &[f64], samples: &[RadialSample]) -> Vec<f64> {
    values
        .iter()
        .zip(samples)
        .map(|(v, s)| if s.T > 0.0 { v / s.T } else { 0.0 })
        .collect()
}

/// `N(r,1/(Δ_c^n f - ac^n)) - N(r,Δ_c^n f) <= N(r,1/(f^{(n)} - a)) - N(r,f^{(n)}) + slack`, slack small against `T(r,f)`.
pub fn check_counting_inequality(cfg: &CheckConfig) -> Result<CheckReport> {
    let mut rep = CheckReport::new("counting-inequality", cfg);
    let f = cfg.function()?;
    let (a, c, n) = (cfg.a, cfg.shift()?, cfg.n);
    if n == 0 {
        return Err(NevError::InvalidParameter("order n must be at least 1".into()));
    }
    not_periodic(&f.difference(c, n - 1)?, c)?;
    let spec = cfg.default_grid();
    let grid = spec.radii();
    let r_max = spec.r_max();
    let (_, sf) = profiled(&f, &[], &grid, r_max, cfg.tol)?;
    if !transcendental(&sf)? {
        return Err(NevError::InvalidInput("function is not transcendental".into()));
    }
    let fit = fit_growth(&sf)?;
    rep.fit("rho", fit.rho);
    rep.fit("xi", fit.xi);
    if fit.xi >= 0.75 {
        rep.verdict = CheckVerdict::HypothesisNotMet;
        rep.note(format!("fitted hyper-order {:.3} is not below 3/4", fit.xi));
        return Ok(rep);
    }
    let g = f.difference(c, n)?;
    let h = f.derivative(n);
    let g_zeros = located(&g, Target::Value(a * c.powi(n as i32)), r_max)?;
    let g_poles = located(&g, Target::Pole, r_max)?;
    let h_zeros = located(&h, Target::Value(a), r_max)?;
    let h_poles = located(&h, Target::Pole, r_max)?;
    let keep = keep_mask(&[&sf]);
    let flagged: Vec<bool> = keep.iter().map(|k| !k).collect();
    let (mut radii, mut slack, mut t) = (vec![], vec![], vec![]);
    for (i, s) in sf.iter().enumerate() {
        let r = s.r_effective;
        let lhs = counting(&g_zeros, r).N - counting(&g_poles, r).N;
        let rhs = counting(&h_zeros, r).N - counting(&h_poles, r).N;
        let sl = (lhs - rhs).max(0.0);
        rep.rows.push(Row::new(r, lhs, vec![rhs, sl], keep[i]));
        radii.push(r);
        slack.push(sl);
        t.push(s.T);
    }
    rep.columns = vec!["N(r,1/(f^(n)-a)) - N(r,f^(n))".into(), "slack".into()];
    rep.discarded = discarded(&grid, &keep);
    let small = smallness(&radii, &slack, &t, &flagged)?;
    rep.smallness("slack_", &small);
    rep.verdict = small.verdict.into();
    rep.margin = SMALL_PASS_RATIO - small.tail_ratio;
    Ok(rep)
}

/// Finite-order and lower-order hypotheses: `ξ = 0` and `μ(f′) > ρ(f) - 1/2 + guard`.
fn order_hypothesis(rep: &mut CheckReport, fit_f: &GrowthFit, fit_fp: Option<&GrowthFit>) -> bool {
    rep.fit("rho_f", fit_f.rho);
    rep.fit("xi_f", fit_f.xi);
    if fit_f.xi > 0.0 {
        rep.verdict = CheckVerdict::HypothesisNotMet;
        rep.note(format!(
            "order is not finite: local order accelerates (fitted rho {:.3}, hyper-order {:.3})",
            fit_f.rho, fit_f.xi
        ));
        return false;
    }
    if let Some(fp) = fit_fp {
        rep.fit("mu_fprime", fp.mu);
        if fp.mu <= fit_f.rho - 0.5 + ORDER_GUARD {
            rep.verdict = CheckVerdict::HypothesisNotMet;
            rep.note(format!(
                "lower order of f' {:.3} does not exceed rho(f) - 1/2 + {ORDER_GUARD} = {:.3}",
                fp.mu,
                fit_f.rho - 0.5 + ORDER_GUARD
            ));
            return false;
        }
    }
    true
}

/// `δ(a,f′) <= (1 + limsup N(r,f)/T(r,f′)) δ(ac, Δ_c f)` up to the estimator slack.
pub fn check_defect_inequality(cfg: &CheckConfig) -> Result<CheckReport> {
    let mut rep = CheckReport::new("defect-inequality", cfg);
    let f = cfg.function()?;
    let (a, c) = (cfg.a, cfg.shift()?);
    not_periodic(&f, c)?;
    let spec = cfg.default_grid();
    let grid = spec.radii();
    let r_max = spec.r_max();
    let (_, sf) = profiled(&f, &[], &grid, r_max, cfg.tol)?;
    let fit_f = fit_growth(&sf)?;
    if !order_hypothesis(&mut rep, &fit_f, None) {
        return Ok(rep);
    }
    let (_, sfp) = profiled(&f.differentiate(), &[a], &grid, r_max, cfg.tol)?;
    let fit_fp = fit_growth(&sfp)?;
    if !order_hypothesis(&mut rep, &fit_f, Some(&fit_fp)) {
        return Ok(rep);
    }
    let (_, sd) = profiled(&f.difference(c, 1)?, &[a * c], &grid, r_max, cfg.tol)?;
    let keep = keep_mask(&[&sf, &sfp, &sd]);
    let d_fp = deficiency(&sfp, Some(a))?.delta;
    let d_delta = deficiency(&sd, Some(a * c))?.delta;
    let n_over_t: Vec<f64> = sf
        .iter()
        .zip(&sfp)
        .map(|(s, p)| if p.T > 0.0 { s.N_pole / p.T } else { 0.0 })
        .collect();
    let pole_ratio = robust_limsup(&n_over_t, &keep);
    for i in 0..grid.len() {
        let m_fp = sfp[i].target(a).expect("target sampled").m_inv;
        let m_d = sd[i].target(a * c).expect("target sampled").m_inv;
        let lhs = if sfp[i].T > 0.0 { m_fp / sfp[i].T } else { 0.0 };
        let rd = if sd[i].T > 0.0 { m_d / sd[i].T } else { 0.0 };
        rep.rows
            .push(Row::new(sfp[i].r_effective, lhs, vec![n_over_t[i], rd], keep[i]));
    }
    rep.columns = vec!["N(r,f)/T(r,f')".into(), "m(r,1/(D_c f-ac))/T(r,D_c f)".into()];
    rep.discarded = discarded(&grid, &keep);
    let rhs = (1.0 + pole_ratio) * d_delta;
    rep.fit("delta_a_fprime", d_fp);
    rep.fit("delta_ac_difference", d_delta);
    rep.fit("limsup_N_f_over_T_fprime", pole_ratio);
    rep.fit("rhs", rhs);
    rep.margin = rhs + DEFECT_SLACK - d_fp;
    rep.verdict = if rep.margin >= 0.0 {
        CheckVerdict::Pass
    } else {
        CheckVerdict::Fail
    };
    Ok(rep)
}

/// `Σ_a π_c(a,f) <= 1 - δ(0,f′)` over the supplied values, up to the estimator slack.
pub fn check_pair_index_inequality(cfg: &CheckConfig) -> Result<CheckReport> {
    let mut rep = CheckReport::new("pair-index-inequality", cfg);
    let f = cfg.function()?;
    let c = cfg.shift()?;
    not_periodic(&f, c)?;
    let spec = cfg.default_grid();
    let grid = spec.radii();
    let r_max = spec.r_max();
    let (pf, sf) = profiled(&f, &[], &grid, r_max, cfg.tol)?;
    if !pf.poles().is_empty() {
        rep.verdict = CheckVerdict::PreconditionViolated;
        rep.note("function has poles; the pair-index inequality is stated for entire functions");
        return Ok(rep);
    }
    let fit_f = fit_growth(&sf)?;
    if !order_hypothesis(&mut rep, &fit_f, None) {
        return Ok(rep);
    }
    let zero = C64::new(0.0, 0.0);
    let (_, sfp) = profiled(&f.differentiate(), &[zero], &grid, r_max, cfg.tol)?;
    let fit_fp = fit_growth(&sfp)?;
    if !order_hypothesis(&mut rep, &fit_f, Some(&fit_fp)) {
        return Ok(rep);
    }
    let keep = keep_mask(&[&sf, &sfp]);
    let ctx = PairContext::new(&f, c)?;
    let mut total = 0.0;
    let mut sums = vec![0.0; grid.len()];
    for a in &cfg.targets {
        let recs = ctx.pairs(Target::Value(*a), r_max * REACH)?;
        let n_c: Vec<f64> = sf.iter().map(|s| pair_count(&recs, s.r_effective).N).collect();
        let pi = pair_index(&sf, &n_c)?;
        rep.fit(&format!("pi_c[{}]", fmt_complex(*a)), pi);
        total += pi;
        for (s, v) in sums.iter_mut().zip(ratio_to(&n_c, &sf)) {
            *s += v;
        }
    }
    let d0 = deficiency(&sfp, Some(zero))?.delta;
    for i in 0..grid.len() {
        let m = sfp[i].target(zero).expect("target sampled").m_inv;
        let rd = if sfp[i].T > 0.0 { m / sfp[i].T } else { 0.0 };
        rep.rows.push(Row::new(sf[i].r_effective, sums[i], vec![rd], keep[i]));
    }
    rep.columns = vec!["m(r,1/f')/T(r,f')".into()];
    rep.discarded = discarded(&grid, &keep);
    rep.fit("sum_pi_c", total);
    rep.fit("delta_0_fprime", d0);
    rep.fit("rhs", 1.0 - d0);
    rep.margin = 1.0 - d0 + DEFECT_SLACK - total;
    rep.verdict = if rep.margin >= 0.0 {
        CheckVerdict::Pass
    } else {
        CheckVerdict::Fail
    };
    Ok(rep)
}

/// `Σ Π̂_c` over `targets ∪ {∞}` against `2Θ(∞,f) + limsup N_var(r,F)/T(r,f)`.
struct DefectRelation {
    lhs: f64,
    rhs: f64,
    theta: f64,
    pi_inf: f64,
    n_var_ratio: f64,
    saturated: bool,
    rows: Vec<Row>,
}

fn defect_relation(
    big_f: &Expr,
    c: C64,
    targets: &[C64],
    sf: &[RadialSample],
    keep: &[bool],
    r_max: f64,
) -> Result<DefectRelation> {
    let reach = r_max * REACH;
    let rs: Vec<f64> = sf.iter().map(|s| s.r_effective).collect();
    let inf = HattedProfile::new(big_f, None, c, reach)?;
    let hat_inf: Vec<f64> = rs.iter().map(|r| inf.at(*r)).collect();
    let pi_inf = pi_hat(sf, &hat_inf)?;
    let mut saturated = inf.saturated();
    let mut lhs = pi_inf;
    let mut lhs_rows: Vec<f64> = ratio_to(&hat_inf, sf).iter().map(|v| 1.0 - v).collect();
    for a in targets {
        let h = HattedProfile::new(big_f, Some(*a), c, reach)?;
        saturated |= h.saturated();
        let hat: Vec<f64> = rs.iter().map(|r| h.at(*r)).collect();
        lhs += pi_hat(sf, &hat)?;
        for (row, v) in lhs_rows.iter_mut().zip(ratio_to(&hat, sf)) {
            *row += 1.0 - v;
        }
    }
    let theta = deficiency(sf, None)?.Theta;
    let nv = n_var_records(big_f, c, reach)?;
    let nv_series: Vec<f64> = rs.iter().map(|r| n_var_count(&nv, *r)).collect();
    let nv_ratio = ratio_to(&nv_series, sf);
    let n_var_ratio = robust_limsup(&nv_ratio, keep);
    let rows = (0..sf.len())
        .map(|i| {
            let big_theta = 1.0
                - if sf[i].T > 0.0 {
                    sf[i].N_pole_distinct / sf[i].T
                } else {
                    0.0
                };
            Row::new(rs[i], lhs_rows[i], vec![2.0 * big_theta, nv_ratio[i]], keep[i])
        })
        .collect();
    Ok(DefectRelation {
        lhs,
        rhs: 2.0 * theta + n_var_ratio,
        theta,
        pi_inf,
        n_var_ratio,
        saturated,
        rows,
    })
}

fn record_relation(rep: &mut CheckReport, d: &DefectRelation) {
    rep.fit("sum_Pi_hat", d.lhs);
    rep.fit("Pi_hat_inf", d.pi_inf);
    rep.fit("Theta_inf", d.theta);
    rep.fit("limsup_N_var_over_T", d.n_var_ratio);
    rep.fit("bound", d.rhs);
    if d.saturated {
        rep.note("some pair multiplicity reached the cap; pair counts are lower bounds");
    }
}

/// Second-main-theorem analogues of order 1 or 2, plus the truncated defect relation.
///
/// `F` is supplied by the user and `f = F′` is its derivative. For order 1 the
/// targets are the values `a_i′`; for order 2 they are the constants `C_i` of `b_i = C_i z`.
pub fn check_smt_analogue(cfg: &CheckConfig) -> Result<CheckReport> {
    let mut rep = CheckReport::new("smt-analogue", cfg);
    let big_f = cfg.function()?;
    let c = cfg.shift()?;
    let order = cfg.order;
    if order != 1 && order != 2 {
        return Err(NevError::InvalidParameter("order must be 1 or 2".into()));
    }
    rep.params.insert("order".into(), serde_json::json!(order));
    not_periodic(&big_f, c)?;
    let f = big_f.differentiate();
    let spec = cfg.default_grid();
    let grid = spec.radii();
    let r_max = spec.r_max();
    let (_, sf) = profiled(&f, &cfg.targets, &grid, r_max, cfg.tol)?;
    let g = big_f.difference(c, order as usize)?;
    let g_poles = located(&g, Target::Pole, r_max)?;
    let g_zeros = located(&g, Target::Value(C64::new(0.0, 0.0)), r_max)?;
    let keep = keep_mask(&[&sf]);
    let flagged: Vec<bool> = keep.iter().map(|k| !k).collect();
    let (mut radii, mut slack, mut t) = (vec![], vec![], vec![]);
    for (i, s) in sf.iter().enumerate() {
        let r = s.r_effective;
        let m_sum: f64 = cfg
            .targets
            .iter()
            .map(|a| s.target(*a).expect("target sampled").m_inv)
            .sum();
        let ng = counting(&g_poles, r).N - counting(&g_zeros, r).N;
        let (lhs, rhs) = if order == 1 {
            (m_sum, s.m + ng)
        } else {
            (s.m + m_sum, 2.0 * s.T + ng - 2.0 * s.N_pole)
        };
        let sl = (lhs - rhs).max(0.0);
        rep.rows.push(Row::new(r, lhs, vec![rhs, sl], keep[i]));
        radii.push(r);
        slack.push(sl);
        t.push(s.T);
    }
    rep.columns = vec!["rhs".into(), "slack".into()];
    rep.discarded = discarded(&grid, &keep);
    let small = smallness(&radii, &slack, &t, &flagged)?;
    rep.smallness("slack_", &small);
    let rel = defect_relation(&big_f, c, &cfg.targets, &sf, &keep, r_max)?;
    record_relation(&mut rep, &rel);
    let rel_margin = rel.rhs + DEFECT_SLACK - rel.lhs;
    let rel_verdict = if rel_margin >= 0.0 {
        CheckVerdict::Pass
    } else {
        CheckVerdict::Fail
    };
    rep.verdict = combine(&[small.verdict.into(), rel_verdict]);
    rep.margin = (SMALL_PASS_RATIO - small.tail_ratio).min(rel_margin);
    Ok(rep)
}

/// `F = e^z + z ℘^n` on the lattice `⟨c, ic⟩`: both sides of the truncated defect relation against `4n/(2n+1)`.
pub fn check_weierstrass_example(cfg: &CheckConfig) -> Result<CheckReport> {
    let mut rep = CheckReport::new("weierstrass-example", cfg);
    let (c, n) = (cfg.shift()?, cfg.n);
    if n == 0 {
        return Err(NevError::InvalidParameter("n must be at least 1".into()));
    }
    let lattice = Arc::new(Lattice::square(c)?);
    let z = Expr::z();
    let big_f = z.exp().add(&z.mul(&Expr::wp(&lattice).powi(n as i32)));
    rep.params.insert("F".into(), serde_json::json!(big_f.to_string()));
    rep.params.remove("f");
    let spec = cfg.grid_or(1.4, 1.15, 24);
    let grid = spec.radii();
    let r_max = spec.r_max();
    let f = big_f.differentiate();
    let (_, sf) = profiled(&f, &cfg.targets, &grid, r_max, cfg.tol)?;
    let keep = keep_mask(&[&sf]);
    let rel = defect_relation(&big_f, c, &cfg.targets, &sf, &keep, r_max)?;
    record_relation(&mut rep, &rel);
    rep.rows = rel.rows.clone();
    rep.columns = vec!["2 Theta(r)".into(), "N_var(r,F)/T(r,f)".into()];
    rep.discarded = discarded(&grid, &keep);
    let nn = n as f64;
    let expected = 4.0 * nn / (2.0 * nn + 1.0);
    rep.fit("expected", expected);
    rep.fit("expected_Theta", 2.0 * nn / (2.0 * nn + 1.0));
    if cfg.targets.is_empty() {
        rep.note("finite values omitted; their hatted indices are nonnegative, so the sum is a lower bound");
    }
    let tol = 0.05;
    let relation = rel.rhs + DEFECT_SLACK - rel.lhs;
    let near = tol - (rel.lhs - expected).abs().max((rel.rhs - expected).abs());
    rep.margin = relation.min(near);
    rep.verdict = if rep.margin >= 0.0 {
        CheckVerdict::Pass
    } else {
        CheckVerdict::Fail
    };
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(f: &str, a: f64, c: C64) -> CheckConfig {
        CheckConfig {
            a: C64::new(a, 0.0),
            c,
            ..CheckConfig::with_f(f)
        }
    }

    #[test]
    fn counting_exp_zero_slack() {
        let rep = check_counting_inequality(&cfg("exp(z)", 0.0, C64::new(1.0, 0.0))).unwrap();
        assert!(rep.rows.iter().all(|r| r.lhs == 0.0 && r.rhs_terms[1] == 0.0));
        assert_eq!(rep.verdict, CheckVerdict::Pass);
    }

    #[test]
    fn defect_exp() {
        let rep = check_defect_inequality(&cfg("exp(z)", 0.0, C64::new(1.0, 0.0))).unwrap();
        assert_eq!(rep.verdict, CheckVerdict::Pass, "{:?}", rep.fitted);
        assert!((rep.fitted["delta_a_fprime"] - 1.0).abs() < 0.02);
    }

    #[test]
    fn pair_index_empty_values() {
        let rep = check_pair_index_inequality(&cfg("exp(z)", 0.0, C64::new(1.0, 0.0))).unwrap();
        assert_eq!(rep.verdict, CheckVerdict::Pass, "{:?}", rep.fitted);
        assert_eq!(rep.fitted["sum_pi_c"], 0.0);
    }

    #[test]
    fn smt_order_two_exp() {
        let mut c = cfg("exp(z)", 0.0, C64::new(1.0, 0.0));
        c.order = 2;
        c.targets = vec![C64::new(1.0, 0.0)];
        let rep = check_smt_analogue(&c).unwrap();
        assert_eq!(rep.verdict, CheckVerdict::Pass, "{:?}", rep.fitted);
        assert!(rep.rows.iter().all(|r| r.lhs.is_finite() && r.rhs_terms[0].is_finite()));
    }
}
