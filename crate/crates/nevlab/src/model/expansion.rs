use super::series::series;
use super::{EvalResult, Expr};
use crate::error::{NevError, Result};
use crate::tolerances::{SERIES_RHO, SERIES_ZERO_REL};
use crate::C64;
use serde::Serialize;

/// Laurent data of a function at a point.
#[derive(Debug, Clone, Serialize)]
pub struct LocalExpansion {
    pub center: C64,
    /// `(index < 0, coefficient)`, ascending; numerically zero terms are omitted
    /// except the leading one.
    pub principal: Vec<(i32, C64)>,
    /// `(index, coefficient)` for `index = 0 .. truncation_order`.
    pub analytic: Vec<(i32, C64)>,
    pub truncation_order: usize,
}

impl LocalExpansion {
    /// Pole order; 0 at regular points.
    pub fn pole_order(&self) -> u32 {
        self.principal.first().map_or(0, |(k, _)| k.unsigned_abs())
    }
}

/// Principal part and the first `k` Taylor coefficients of `f` at `z0`.
///
/// Coefficients come from truncated Laurent arithmetic on the expression tree;
/// at regular points the constant term is cross-checked against direct evaluation.
pub fn local_expansion(f: &Expr, z0: C64, k: usize) -> Result<LocalExpansion> {
    if k == 0 {
        return Err(NevError::InvalidParameter("k must be positive".into()));
    }
    let s = series(f, z0, SERIES_RHO)?;
    if s.end() < k as i32 {
        return Err(NevError::ExpansionFailure(format!(
            "series known only to order {} < {k}",
            s.end()
        )));
    }
    let mut principal = Vec::new();
    if let Some(v) = s.valuation() {
        for idx in v..0 {
            let i = (idx - s.low) as usize;
            if idx == v || s.coef[i].norm() > SERIES_ZERO_REL * s.mag[i] {
                principal.push((idx, s.coeff_h(idx)));
            }
        }
    }
    let analytic: Vec<(i32, C64)> = (0..k as i32).map(|j| (j, s.coeff_h(j))).collect();
    if principal.is_empty() {
        if let EvalResult::Finite(v) = f.evaluate(z0) {
            let a0 = analytic[0].1;
            if (a0 - v).norm() > 1e-8 * (1.0 + v.norm()) {
                return Err(NevError::ExpansionFailure(format!(
                    "series constant {a0} disagrees with value {v}"
                )));
            }
        }
    }
    Ok(LocalExpansion {
        center: z0,
        principal,
        analytic,
        truncation_order: k,
    })
}

/// Laurent coefficients `a_j`, `j in lo..hi`, by the trapezoidal rule on `|z - z0| = radius`.
pub fn cauchy_coefficients(f: &Expr, z0: C64, radius: f64, lo: i32, hi: i32, nodes: usize) -> Vec<C64> {
    let vals: Vec<(f64, C64)> = (0..nodes)
        .map(|j| {
            let th = std::f64::consts::TAU * j as f64 / nodes as f64;
            (th, f.eval(z0 + C64::from_polar(radius, th)))
        })
        .collect();
    (lo..hi)
        .map(|k| {
            let s: C64 = vals
                .iter()
                .map(|(th, v)| v * C64::from_polar(1.0, -(k as f64) * th))
                .sum();
            s / (nodes as f64) / radius.powi(k)
        })
        .collect()
}
