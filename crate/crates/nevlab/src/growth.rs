//! Growth indicators and robust limits from finite radial samples.
//!
//! `limsup` and `liminf` become the 90th and 10th percentiles over the tail,
//! the top decile of retained radii (at least three). Nudged radii are discarded
//! first, never more than a fifth of the grid.

use crate::error::{NevError, Result};
use crate::functionals::RadialSample;
use crate::tolerances::{
    MAX_DISCARD, MIN_DECADES, MIN_SAMPLES, SLOPE_WINDOW, SMALL_FAIL_RATIO, SMALL_FAIL_SLOPE, SMALL_PASS_RATIO,
    SMALL_PASS_SLOPE, TAIL_FRACTION, TAIL_MIN, TREND_FLOOR,
};
use crate::C64;
use serde::{Serialize, Serializer};

/// Slope of one sliding window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowSlope {
    pub r_lo: f64,
    pub r_hi: f64,
    pub slope: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthFit {
    pub rho: f64,
    pub mu: f64,
    pub xi: f64,
    pub lambda: f64,
    /// Local orders: slopes of `log(dT/dlog r)` against `log r`.
    pub windows: Vec<WindowSlope>,
    pub lambda_residual: f64,
}

/// A point value `a`, or `∞` when `None`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Value(pub Option<C64>);

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0 {
            Some(a) => crate::ser_complex(&a, s),
            None => s.serialize_str("inf"),
        }
    }
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeficiencyRecord {
    pub a: Value,
    pub delta: f64,
    pub Theta: f64,
    pub theta: f64,
    pub pi_c: Option<f64>,
    pub Pi_hat: Option<f64>,
    pub retained: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmallnessVerdict {
    pub verdict: Verdict,
    pub tail_ratio: f64,
    pub trend_slope: f64,
    pub discarded_fraction: f64,
}

/// Least-squares slope and RMS residual of `y` against `x`.
pub fn regression(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return (0.0, 0.0);
    }
    let k = sxy / sxx;
    let res = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - my - k * (a - mx)).powi(2))
        .sum::<f64>()
        / n;
    (k, res.sqrt())
}

/// Linear-interpolation percentile, `q` in `[0, 1]`.
pub fn percentile(values: &[f64], q: f64) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        return f64::NAN;
    }
    let pos = q * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

fn check_grid(radii: &[f64]) -> Result<()> {
    if radii.len() < MIN_SAMPLES {
        return Err(NevError::InsufficientData(format!(
            "{} samples, at least {MIN_SAMPLES} needed",
            radii.len()
        )));
    }
    let span = (radii[radii.len() - 1] / radii[0]).log10();
    if radii.windows(2).any(|w| w[1] <= w[0]) || span < MIN_DECADES - 1e-9 {
        return Err(NevError::InsufficientData(format!(
            "grid must increase and span {MIN_DECADES} decade(s); it spans {span:.3}"
        )));
    }
    Ok(())
}

/// Keep-mask: flagged radii are dropped, largest index first, up to the discard cap.
pub fn retained_mask(flagged: &[bool]) -> Vec<bool> {
    let cap = (MAX_DISCARD * flagged.len() as f64).floor() as usize;
    let mut keep = vec![true; flagged.len()];
    let mut dropped = 0;
    for i in (0..flagged.len()).rev() {
        if flagged[i] && dropped < cap {
            keep[i] = false;
            dropped += 1;
        }
    }
    keep
}

/// Indices of the tail: top decile of retained radii, at least three.
pub fn tail_indices(keep: &[bool]) -> Vec<usize> {
    let kept: Vec<usize> = (0..keep.len()).filter(|i| keep[*i]).collect();
    let n = ((TAIL_FRACTION * kept.len() as f64).ceil() as usize)
        .max(TAIL_MIN)
        .min(kept.len());
    kept[kept.len() - n..].to_vec()
}

/// 90th percentile of `values` over the tail.
pub fn robust_limsup(values: &[f64], keep: &[bool]) -> f64 {
    let t: Vec<f64> = tail_indices(keep).iter().map(|i| values[*i]).collect();
    percentile(&t, 0.9)
}

/// 10th percentile of `values` over the tail.
pub fn robust_liminf(values: &[f64], keep: &[bool]) -> f64 {
    let t: Vec<f64> = tail_indices(keep).iter().map(|i| values[*i]).collect();
    percentile(&t, 0.1)
}

fn sample_mask(samples: &[RadialSample]) -> Vec<bool> {
    retained_mask(&samples.iter().map(|s| s.nudged()).collect::<Vec<_>>())
}

fn window_slopes(x: &[f64], y: &[f64], r: &[f64], from: usize) -> Vec<WindowSlope> {
    let w = SLOPE_WINDOW.min(x.len());
    let mut out = Vec::new();
    let start = from.min(x.len().saturating_sub(w));
    for i in start..=x.len() - w {
        let (k, res) = regression(&x[i..i + w], &y[i..i + w]);
        out.push(WindowSlope {
            r_lo: r[i],
            r_hi: r[i + w - 1],
            slope: k,
            residual: res,
        });
    }
    out
}

/// `ρ`, `μ`, `ξ`, `λ` from a geometric grid of samples.
///
/// Local orders are window slopes of `log D` against `log r`, where
/// `D = dT/dlog r` by central differences; this removes the additive constant in
/// `T` that makes `log T / log r` creep for polynomials. `ξ` is zero when the local
/// order does not accelerate between the middle and the top of the grid.
pub fn fit_growth(samples: &[RadialSample]) -> Result<GrowthFit> {
    let r: Vec<f64> = samples.iter().map(|s| s.r_effective).collect();
    check_grid(&r)?;
    let t: Vec<f64> = samples.iter().map(|s| s.T).collect();
    let lr: Vec<f64> = r.iter().map(|v| v.ln()).collect();
    let n = r.len();
    let mut dlog = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b) = if i == 0 {
            (0, 1)
        } else if i == n - 1 {
            (n - 2, n - 1)
        } else {
            (i - 1, i + 1)
        };
        dlog.push((t[b] - t[a]) / (lr[b] - lr[a]));
    }
    let tmax = t.iter().cloned().fold(0.0f64, f64::max);
    let floor = 1e-12 * (1.0 + tmax);
    let ld: Vec<f64> = dlog.iter().map(|d| d.max(floor).ln()).collect();
    let windows = window_slopes(&lr, &ld, &r, n / 2);
    let all = window_slopes(&lr, &ld, &r, 0);
    let rho = windows
        .iter()
        .map(|w| w.slope)
        .fold(f64::NEG_INFINITY, f64::max)
        .max(0.0);
    let mu = windows.iter().map(|w| w.slope).fold(f64::INFINITY, f64::min).max(0.0);
    let top = windows.last().map_or(0.0, |w| w.slope);
    let mid = all.get(all.len() / 2).map_or(0.0, |w| w.slope);
    let xi = if top <= 1.5 * mid.max(0.0) + 0.5 {
        0.0
    } else {
        let llt: Vec<f64> = t.iter().map(|v| v.max(1.0 + 1e-12).ln().ln()).collect();
        window_slopes(&lr, &llt, &r, n / 2)
            .iter()
            .map(|w| w.slope)
            .fold(0.0, f64::max)
    };
    let idx: Vec<usize> = (n / 2..n).filter(|i| samples[*i].n_pole > 0).collect();
    let (lambda, lambda_residual) = if idx.len() >= 2 {
        let x: Vec<f64> = idx.iter().map(|i| lr[*i]).collect();
        let y: Vec<f64> = idx.iter().map(|i| (samples[*i].n_pole as f64).ln()).collect();
        let (k, res) = regression(&x, &y);
        (k.max(0.0), res)
    } else {
        (0.0, 0.0)
    };
    Ok(GrowthFit {
        rho,
        mu,
        xi,
        lambda,
        windows,
        lambda_residual,
    })
}

fn ratio_series(samples: &[RadialSample], values: &[f64]) -> Vec<f64> {
    samples
        .iter()
        .zip(values)
        .map(|(s, v)| if s.T > 0.0 { v / s.T } else { 0.0 })
        .collect()
}

/// `δ`, `Θ`, `θ` for the value `a` (`None` is `∞`) from samples carrying that target.
pub fn deficiency(samples: &[RadialSample], a: Option<C64>) -> Result<DeficiencyRecord> {
    let r: Vec<f64> = samples.iter().map(|s| s.r_effective).collect();
    check_grid(&r)?;
    let pick = |s: &RadialSample| -> Result<(f64, f64, f64)> {
        match a {
            None => Ok((s.m, s.N_pole, s.N_pole_distinct)),
            Some(a) => s
                .target(a)
                .map(|t| (t.m_inv, t.N_count, t.N_distinct))
                .ok_or_else(|| NevError::InvalidInput(format!("samples lack target {}", crate::fmt_complex(a)))),
        }
    };
    let vals = samples.iter().map(pick).collect::<Result<Vec<_>>>()?;
    let keep = sample_mask(samples);
    let t: Vec<f64> = samples.iter().map(|s| s.T).collect();
    let ratio = |k: &dyn Fn(&(f64, f64, f64)) -> f64| -> Vec<f64> {
        vals.iter()
            .zip(&t)
            .map(|(v, t)| if *t > 0.0 { k(v) / t } else { 0.0 })
            .collect()
    };
    let delta = robust_liminf(&ratio(&|v| v.0), &keep);
    let theta_big = 1.0 - robust_limsup(&ratio(&|v| v.2), &keep);
    let theta = robust_liminf(&ratio(&|v| v.1 - v.2), &keep);
    Ok(DeficiencyRecord {
        a: Value(a),
        delta,
        Theta: theta_big,
        theta,
        pi_c: None,
        Pi_hat: None,
        retained: keep.iter().filter(|k| **k).count(),
    })
}

/// `π_c = liminf N_c / T` with `N_c` aligned to `samples`.
pub fn pair_index(samples: &[RadialSample], n_c: &[f64]) -> Result<f64> {
    if n_c.len() != samples.len() {
        return Err(NevError::GridMismatch(
            "pair counts and samples differ in length".into(),
        ));
    }
    let keep = sample_mask(samples);
    let ratio = ratio_series(samples, n_c);
    Ok(robust_liminf(&ratio, &keep))
}

/// `Π̂_c = 1 - limsup N̂_c / T` with `N̂_c` aligned to `samples`.
pub fn pi_hat(samples: &[RadialSample], hatted: &[f64]) -> Result<f64> {
    if hatted.len() != samples.len() {
        return Err(NevError::GridMismatch(
            "hatted counts and samples differ in length".into(),
        ));
    }
    let keep = sample_mask(samples);
    let ratio = ratio_series(samples, hatted);
    Ok(1.0 - robust_limsup(&ratio, &keep))
}

/// Smallness of `numer` against `denom` on aligned radii.
///
/// The tail ratio is the 90th percentile of `numer / denom` over the retained
/// radii of the top decade `[r_top/10, r_top]`; the trend is the slope of `log(numer / denom)` against `log r` over the upper half
/// of retained radii.
pub fn smallness(radii: &[f64], numer: &[f64], denom: &[f64], flagged: &[bool]) -> Result<SmallnessVerdict> {
    if numer.len() != radii.len() || denom.len() != radii.len() || flagged.len() != radii.len() {
        return Err(NevError::GridMismatch(format!(
            "lengths {} / {} / {} / {}",
            radii.len(),
            numer.len(),
            denom.len(),
            flagged.len()
        )));
    }
    check_grid(radii)?;
    let keep = retained_mask(flagged);
    let discarded = keep.iter().filter(|k| !**k).count();
    let ratio: Vec<f64> = numer
        .iter()
        .zip(denom)
        .map(|(a, b)| if *b > 0.0 { (a / b).max(0.0) } else { f64::INFINITY })
        .collect();
    let kept: Vec<usize> = (0..radii.len()).filter(|i| keep[*i]).collect();
    let r_top = kept.last().map_or(f64::NAN, |i| radii[*i]);
    let decade: Vec<f64> = kept
        .iter()
        .filter(|i| radii[**i] >= r_top / 10.0)
        .map(|i| ratio[*i])
        .collect();
    let tail_ratio = percentile(&decade, 0.9);
    let upper = &kept[kept.len() / 2..];
    let x: Vec<f64> = upper.iter().map(|i| radii[*i].ln()).collect();
    let y: Vec<f64> = upper.iter().map(|i| (ratio[*i] + TREND_FLOOR).ln()).collect();
    let trend_slope = if y.iter().all(|v| v.is_finite()) {
        regression(&x, &y).0
    } else {
        f64::INFINITY
    };
    let verdict = if tail_ratio < SMALL_PASS_RATIO && trend_slope < SMALL_PASS_SLOPE {
        Verdict::Pass
    } else if tail_ratio >= SMALL_FAIL_RATIO && trend_slope >= SMALL_FAIL_SLOPE {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    };
    Ok(SmallnessVerdict {
        verdict,
        tail_ratio,
        trend_slope,
        discarded_fraction: discarded as f64 / radii.len() as f64,
    })
}

/// Smallness of a functional against `T` of the same samples.
pub fn smallness_vs_t(samples: &[RadialSample], numer: &[f64]) -> Result<SmallnessVerdict> {
    let r: Vec<f64> = samples.iter().map(|s| s.r_effective).collect();
    let t: Vec<f64> = samples.iter().map(|s| s.T).collect();
    let f: Vec<bool> = samples.iter().map(|s| s.nudged()).collect();
    smallness(&r, numer, &t, &f)
}

/// Growth and deficiency report for one function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub function: String,
    pub grid: Vec<f64>,
    pub rho: f64,
    pub mu: f64,
    pub xi: f64,
    pub lambda: f64,
    pub records: Vec<DeficiencyRecord>,
    pub verdicts: Vec<(String, Verdict)>,
}

/// Fits growth, deficiencies for `∞` and every target, and the estimator consistency verdicts.
pub fn growth_report(function: &str, samples: &[RadialSample], targets: &[C64]) -> Result<GrowthReport> {
    let fit = fit_growth(samples)?;
    let mut records = vec![deficiency(samples, None)?];
    for a in targets {
        records.push(deficiency(samples, Some(*a))?);
    }
    let ok = |b: bool| if b { Verdict::Pass } else { Verdict::Fail };
    let mut verdicts = vec![
        ("mu-le-rho".to_string(), ok(fit.mu <= fit.rho)),
        ("lambda-le-rho".to_string(), ok(fit.lambda <= fit.rho + 0.05)),
    ];
    for rec in &records {
        let label = match rec.a.0 {
            Some(a) => crate::fmt_complex(a),
            None => "inf".into(),
        };
        verdicts.push((format!("delta-le-Theta[{label}]"), ok(rec.delta <= rec.Theta + 0.02)));
    }
    Ok(GrowthReport {
        function: function.to_string(),
        grid: samples.iter().map(|s| s.r).collect(),
        rho: fit.rho,
        mu: fit.mu,
        xi: fit.xi,
        lambda: fit.lambda,
        records,
        verdicts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{geometric_grid, Profile};
    use crate::model::parse;
    use crate::tolerances::QUAD_REL_TOL;

    fn grid_samples(src: &str, targets: &[C64], r0: f64, ratio: f64, count: usize) -> Vec<RadialSample> {
        let f = parse(src).unwrap();
        let grid = geometric_grid(r0, ratio, count).unwrap();
        Profile::new(&f, targets, *grid.last().unwrap())
            .unwrap()
            .sample_grid(&grid, QUAD_REL_TOL)
            .unwrap()
    }

    #[test]
    fn orders_of_reference_functions() {
        let e = fit_growth(&grid_samples("exp(z)", &[], 2.0, 1.15, 30)).unwrap();
        assert!((0.95..=1.05).contains(&e.rho), "{e:?}");
        assert!(e.xi <= 0.05);
        let p = fit_growth(&grid_samples("z^3 + 2*z - 1", &[], 2.0, 1.2, 40)).unwrap();
        assert!(p.rho <= 0.05, "{}", p.rho);
        let w = fit_growth(&grid_samples("wp(z)", &[], 1.4, 1.15, 24)).unwrap();
        assert!((1.9..=2.1).contains(&w.rho), "{}", w.rho);
        assert!((1.9..=2.1).contains(&w.lambda), "{}", w.lambda);
    }

    #[test]
    fn hyper_order_of_double_exponential() {
        let s = grid_samples("exp(exp(z))", &[], 1.0, 1.15, 25);
        let f = fit_growth(&s).unwrap();
        assert!(f.rho > 3.0, "{f:?}");
        assert!(f.xi > 0.75, "{f:?}");
    }

    #[test]
    fn exponential_deficiencies() {
        let s = grid_samples("exp(z)", &[C64::new(0.0, 0.0), C64::new(2.0, 0.0)], 2.0, 1.15, 30);
        let d0 = deficiency(&s, Some(C64::new(0.0, 0.0))).unwrap();
        assert!((d0.delta - 1.0).abs() < 1e-6 && (d0.Theta - 1.0).abs() < 1e-12);
        let d2 = deficiency(&s, Some(C64::new(2.0, 0.0))).unwrap();
        assert!((-0.02..=0.05).contains(&d2.delta), "{d2:?}");
        assert!(d2.delta <= d2.Theta + 0.02);
    }

    #[test]
    fn smallness_examples() {
        // A constant against T = r/π needs the top decade well above r = 10 before it reads as small.
        let s = grid_samples("exp(z)", &[], 2.0, 1.15, 41);
        let t: Vec<f64> = s.iter().map(|x| x.T).collect();
        let constant = vec![(1f64.exp() - 1.0).ln(); s.len()];
        assert_eq!(smallness_vs_t(&s, &constant).unwrap().verdict, Verdict::Pass);
        let half: Vec<f64> = t.iter().map(|v| v / 2.0).collect();
        let v = smallness_vs_t(&s, &half).unwrap();
        assert_eq!(v.verdict, Verdict::Fail);
        assert!((v.tail_ratio - 0.5).abs() < 1e-12);
    }

    #[test]
    fn grid_requirements() {
        let r: Vec<f64> = (0..10).map(|k| 1.0 + k as f64).collect();
        let v = vec![1.0; 10];
        assert!(matches!(
            smallness(&r, &v, &v, &[false; 10]),
            Err(NevError::InsufficientData(_))
        ));
        assert!(matches!(
            smallness(&r, &v[..9], &v, &[false; 10]),
            Err(NevError::GridMismatch(_))
        ));
    }

    #[test]
    fn discard_cap() {
        let mut f = vec![false; 30];
        for i in 0..10 {
            f[i * 3] = true;
        }
        let keep = retained_mask(&f);
        assert_eq!(keep.iter().filter(|k| !**k).count(), 6);
    }
}
