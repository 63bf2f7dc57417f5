//! Elementary lower bounds for `|cos θ - β|`, the reciprocal circle integral
//! and the projection estimate for `max_t 1/|re^{iθ} + tc - c_k|`.

use super::{CheckConfig, CheckReport, CheckVerdict, Row};
use crate::error::{NevError, Result};
use crate::quad::integrate;
use crate::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

const ABS_TOL: f64 = 1e-13;
const REL_TOL: f64 = 1e-11;
const MAX_PANELS: usize = 4000;

/// Integral of `g(d) d^{-p}` over `d ∈ [0, len]` for a regular `g`, via `d = v^{1/(1-p)}`.
fn endpoint_integral(g: impl Fn(f64) -> f64, p: f64, len: f64) -> (f64, bool) {
    let q = 1.0 / (1.0 - p);
    let top = len.powf(1.0 - p);
    let out = integrate(|v: f64| q * g(v.powf(q)), 0.0, top, &[], ABS_TOL, REL_TOL, MAX_PANELS);
    (out.value, out.converged)
}

/// `(1/2π) ∫ |sin ψ - β|^{-δ'} dψ` over a period.
///
/// With `x = sin ψ` this is `(1/π) ∫_{-1}^{1} |x - β|^{-δ'} (1 - x²)^{-1/2} dx`; every
/// singular point anchors a half-panel whose power singularity is removed exactly.
pub fn projection_integral(beta: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) || !beta.is_finite() {
        return Err(NevError::InvalidParameter(
            "need delta in (0, 1) and finite beta".into(),
        ));
    }
    // (location, exponent) of each factor |x - s|^{-e}.
    let factors = [(beta, delta), (1.0, 0.5), (-1.0, 0.5)];
    let mut nodes: Vec<f64> = vec![-1.0, 1.0];
    if beta.abs() < 1.0 {
        nodes.insert(1, beta);
    }
    let mut total = 0.0;
    let mut ok = true;
    for w in nodes.windows(2) {
        let half = 0.5 * (w[1] - w[0]);
        for (anchor, sign) in [(w[0], 1.0), (w[1], -1.0)] {
            let p: f64 = factors.iter().filter(|(s, _)| *s == anchor).map(|(_, e)| e).sum();
            if p >= 1.0 {
                return Err(NevError::InvalidParameter("integral diverges at a double root".into()));
            }
            let regular = |d: f64| -> f64 {
                factors
                    .iter()
                    .filter(|(s, _)| *s != anchor)
                    .map(|(s, e)| ((anchor - s) + sign * d).abs().powf(-e))
                    .product()
            };
            let (v, conv) = endpoint_integral(regular, p, half);
            total += v;
            ok &= conv;
        }
    }
    if !ok {
        return Err(NevError::PrecisionFailure(
            "projection integral did not converge".into(),
        ));
    }
    Ok(total / PI)
}

/// `(1/2π) ∫ |e^{iθ} - s|^{-δ} dθ` for `s = |a|/r >= 0`; the circle integral equals `r^{-δ}` times this.
pub fn reciprocal_integral(s: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) || !(s >= 0.0) || !s.is_finite() {
        return Err(NevError::InvalidParameter(
            "need delta in (0, 1) and finite s >= 0".into(),
        ));
    }
    // |e^{iθ} - s|² = (1 - s)² + 4 s sin²(θ/2); the integrand is even in θ.
    let (v, conv) = if s == 1.0 {
        endpoint_integral(
            |t: f64| {
                if t == 0.0 {
                    1.0
                } else {
                    (2.0 * (0.5 * t).sin() / t).powf(-delta)
                }
            },
            delta,
            PI,
        )
    } else {
        let out = integrate(
            |t: f64| {
                let h = (0.5 * t).sin();
                ((1.0 - s).powi(2) + 4.0 * s * h * h).powf(-0.5 * delta)
            },
            0.0,
            PI,
            &[],
            ABS_TOL,
            REL_TOL,
            MAX_PANELS,
        );
        (out.value, out.converged)
    };
    if !conv {
        return Err(NevError::PrecisionFailure(
            "reciprocal integral did not converge".into(),
        ));
    }
    Ok(v / PI)
}

/// Projected offset `β = |c_k| sin(arg c_k - arg c) / r`; the exact maximum over the line is `1/(r|sin ψ - β|)`.
fn projected_beta(r: f64, c: C64, ck: C64) -> f64 {
    (ck * c.conj() / c.norm()).im / r
}

/// Whether `c_k` meets the sharpened-bound conditions `|sin arg(c_k/c)| < 1 - √ε` and `|c_k|/r < 1 + √ε`.
fn sharpened_applies(r: f64, c: C64, ck: C64, eps: f64) -> bool {
    if ck.norm() == 0.0 {
        return true;
    }
    let s = (ck / c).arg().sin().abs();
    s < 1.0 - eps.sqrt() && ck.norm() / r < 1.0 + eps.sqrt()
}

/// Random `(r, c, c_k, δ, ε)` with `r >= 50`; half the draws satisfy the sharpened-bound conditions.
fn projection_samples(cfg: &CheckConfig) -> Vec<(f64, C64, C64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.samples)
        .map(|i| {
            let r = (rng.gen_range(50f64.ln()..500f64.ln())).exp();
            let c = C64::from_polar(rng.gen_range(0.1f64.ln()..10f64.ln()).exp(), rng.gen_range(-PI..PI));
            let delta = rng.gen_range(0.05..0.95);
            let eps: f64 = rng.gen_range(0.05..0.95);
            let ck = if i % 2 == 0 {
                let phi_max = (1.0 - eps.sqrt()).asin();
                let phi = rng.gen_range(-phi_max..phi_max) + if rng.gen_bool(0.5) { PI } else { 0.0 };
                let rho = rng.gen_range(0.0..(1.0 + eps.sqrt())) * r;
                c / c.norm() * C64::from_polar(rho, phi)
            } else {
                C64::from_polar(rng.gen_range(0.0..3.0) * r, rng.gen_range(-PI..PI))
            };
            (r, c, ck, delta, eps)
        })
        .collect()
}

/// Both projection bounds on seeded random samples; pure inequalities, so any violation fails.
pub fn check_projection_lemma(cfg: &CheckConfig) -> Result<CheckReport> {
    let mut rep = CheckReport::new("projection-lemma", cfg);
    rep.params.remove("a");
    rep.params.insert("samples".into(), serde_json::json!(cfg.samples));
    rep.params.insert("seed".into(), serde_json::json!(cfg.seed));
    let (mut v1, mut v2, mut n2) = (0usize, 0usize, 0usize);
    let mut margin = f64::INFINITY;
    for (r, c, ck, delta, eps) in projection_samples(cfg) {
        let beta = projected_beta(r, c, ck);
        let tag = format!(
            "c={} ck={} delta={delta:.4} eps={eps:.4}",
            crate::fmt_complex(c),
            crate::fmt_complex(ck)
        );
        let lhs = r.powf(-0.5 * delta) * projection_integral(beta, 0.5 * delta)?;
        let rhs = r.powf(-0.5 * delta) / (1.0 - delta);
        if lhs > rhs {
            v1 += 1;
        }
        margin = margin.min(1.0 - lhs / rhs);
        rep.rows
            .push(Row::new(r, lhs, vec![rhs], true).labelled(format!("universal {tag}")));
        if sharpened_applies(r, c, ck, eps) {
            n2 += 1;
            let lhs = r.powf(-delta) * projection_integral(beta, delta)?;
            let rhs = (2.0 / (eps * (2.0 - eps)).sqrt()).powf(delta) * r.powf(-delta) / (1.0 - delta);
            if lhs > rhs {
                v2 += 1;
            }
            margin = margin.min(1.0 - lhs / rhs);
            rep.rows
                .push(Row::new(r, lhs, vec![rhs], true).labelled(format!("sharpened {tag}")));
        }
    }
    rep.columns = vec!["bound".into()];
    rep.fit("violations_universal", v1 as f64);
    rep.fit("violations_sharpened", v2 as f64);
    rep.fit("sharpened_cases", n2 as f64);
    rep.margin = margin;
    rep.verdict = if v1 + v2 == 0 {
        CheckVerdict::Pass
    } else {
        CheckVerdict::Fail
    };
    Ok(rep)
}

/// Piecewise quadratic minorant of `|cos θ - β|` around `θ0 = arccos β̂`.
fn quadratic_minorant(beta: f64, theta: f64) -> f64 {
    let b = beta.clamp(-1.0, 1.0);
    let t0 = b.acos();
    let (num, den) = if theta <= t0 {
        ((1.0 - b).abs(), t0 * t0)
    } else {
        ((1.0 + b).abs(), (PI - t0).powi(2))
    };
    if den == 0.0 {
        0.0
    } else {
        num / den * (theta - t0).powi(2)
    }
}

const QUAD_SLACK: f64 = 1e-12;

/// Quadratic and linear minorants on the full `(β, θ)` grids, plus the reciprocal integral grid.
pub fn check_elementary_bounds(cfg: &CheckConfig) -> Result<CheckReport> {
    let mut rep = CheckReport::new("elementary-bounds", cfg);
    rep.params.remove("a");
    rep.params.remove("c");
    let mut thetas: Vec<f64> = (0..=3141).map(|k| k as f64 * 1e-3).collect();
    thetas.push(PI);
    let betas: Vec<f64> = (-200..=200).map(|k| k as f64 * 0.01).collect();
    let (mut vq, mut vl, mut vr) = (0usize, 0usize, 0usize);
    for &beta in &betas {
        let mut worst = f64::INFINITY;
        let mut bad = 0usize;
        for &t in &thetas {
            let gap = (t.cos() - beta).abs() - quadratic_minorant(beta, t);
            worst = worst.min(gap);
            if gap < -QUAD_SLACK {
                bad += 1;
            }
        }
        vq += bad;
        rep.rows
            .push(Row::new(beta, worst, vec![0.0, bad as f64], true).labelled("quadratic"));
    }
    for &beta in betas.iter().filter(|b| b.abs() < 1.0) {
        let t0 = beta.acos();
        let slope = (1.0 - beta * beta).sqrt() / 2.0;
        let mut worst = f64::INFINITY;
        let mut bad = 0usize;
        for &t in &thetas {
            if (t - t0).abs() < 1e-12 {
                continue;
            }
            let gap = (t.cos() - beta).abs() - slope * (t - t0).abs();
            worst = worst.min(gap);
            if gap <= 0.0 {
                bad += 1;
            }
        }
        vl += bad;
        rep.rows
            .push(Row::new(beta, worst, vec![0.0, bad as f64], true).labelled("linear"));
    }
    for s in [0.0, 0.5, 1.0, 2.0] {
        for delta in [0.25, 0.5, 0.9] {
            let j = reciprocal_integral(s, delta)?;
            for r in [1.0f64, 10.0, 100.0] {
                let lhs = r.powf(-delta) * j;
                let rhs = r.powf(-delta) / (1.0 - delta);
                let bad = usize::from(lhs > rhs);
                vr += bad;
                rep.rows.push(
                    Row::new(r, rhs - lhs, vec![0.0, bad as f64], true)
                        .labelled(format!("reciprocal s={s} delta={delta}")),
                );
            }
        }
    }
    rep.columns = vec!["floor".into(), "violations".into()];
    rep.fit("violations_quadratic", vq as f64);
    rep.fit("violations_linear", vl as f64);
    rep.fit("violations_reciprocal", vr as f64);
    // Every row holds a gap that is non-negative when its bound holds.
    rep.margin = rep.rows.iter().map(|r| r.lhs).fold(f64::INFINITY, f64::min) + QUAD_SLACK;
    rep.verdict = if vq + vl + vr == 0 {
        CheckVerdict::Pass
    } else {
        CheckVerdict::Fail
    };
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plain(beta: f64, d: f64) -> f64 {
        // Midpoint rule on a fine grid, for cases without singularities.
        let n = 200_000;
        let h = 2.0 * PI / n as f64;
        (0..n)
            .map(|k| ((k as f64 + 0.5) * h).sin() - beta)
            .map(|x| x.abs().powf(-d))
            .sum::<f64>()
            * h
            / (2.0 * PI)
    }

    #[test]
    fn projection_integral_closed_forms() {
        // δ' -> 0 limit is 1; β = 0 is a Beta-function value.
        assert!((projection_integral(0.0, 1e-9).unwrap() - 1.0).abs() < 1e-8);
        let d: f64 = 0.5;
        // (1/π) ∫ |x|^{-d} (1-x²)^{-1/2} dx = B((1-d)/2, 1/2)/π.
        let g = statrs::function::gamma::gamma;
        let exact = g((1.0 - d) / 2.0) * g(0.5) / g(1.0 - d / 2.0) / PI;
        assert!((projection_integral(0.0, d).unwrap() - exact).abs() < 1e-9);
        assert!((projection_integral(3.0, 0.7).unwrap() - plain(3.0, 0.7)).abs() < 1e-7);
    }

    #[test]
    fn reciprocal_integral_values() {
        assert!((reciprocal_integral(0.0, 0.5).unwrap() - 1.0).abs() < 1e-12);
        // s = 1: (1/π)∫_0^π (2 sin(t/2))^{-δ} dt = Γ(1-δ)/Γ(1-δ/2)².
        let d = 0.5;
        let g = statrs::function::gamma::gamma;
        let exact = g(1.0 - d) / g(1.0 - d / 2.0).powi(2);
        assert!((reciprocal_integral(1.0, d).unwrap() - exact).abs() < 1e-9);
    }

    #[test]
    fn projection_beta_is_the_line_distance() {
        let (r, c, ck) = (7.0, C64::new(1.0, 2.0), C64::new(-3.0, 0.5));
        let beta = projected_beta(r, c, ck);
        for k in 0..16 {
            let th = k as f64 * 0.39;
            let p = C64::from_polar(r, th);
            // Brute-force distance from c_k to the line p + t c.
            let t = ((ck - p) * c.conj()).re / c.norm_sqr();
            let dist = (p + c * t - ck).norm();
            let psi = th - c.arg();
            assert!((dist - r * (psi.sin() - beta).abs()).abs() < 1e-9);
        }
    }

    #[test]
    fn elementary_bounds_hold() {
        let rep = check_elementary_bounds(&CheckConfig::default()).unwrap();
        assert_eq!(rep.verdict, CheckVerdict::Pass, "{:?}", rep.fitted);
    }

    #[test]
    fn projection_bounds_hold_on_a_small_sample() {
        let cfg = CheckConfig {
            samples: 60,
            ..CheckConfig::default()
        };
        let rep = check_projection_lemma(&cfg).unwrap();
        assert_eq!(rep.verdict, CheckVerdict::Pass, "{:?}", rep.fitted);
        assert!(rep.fitted["sharpened_cases"] >= 30.0);
    }
}
