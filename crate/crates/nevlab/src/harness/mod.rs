//! Registry of executable inequality checks.
//!
//! Every check returns a [`CheckReport`] with per-radius rows. Big-O claims are
//! tested as a finite fitted constant `K` whose top-decade value does not exceed
//! twice its value one decade lower; `o(·)` claims use the smallness verdict.
//! Checks never panic on bad input; they return a [`NevError`] instead.

mod basics;
mod bounds;
mod counting;
mod equations;
mod estimates;
mod suite;

pub use basics::{check_characteristic, check_jensen, check_operators, check_roots, JENSEN_CORPUS};
pub use bounds::{check_elementary_bounds, check_projection_lemma, projection_integral, reciprocal_integral};
pub use counting::{
    check_counting_inequality, check_defect_inequality, check_pair_index_inequality, check_smt_analogue,
    check_weierstrass_example,
};
pub use equations::{
    check_clunie_analogue, check_mohonko_analogue, clunie_fixture, mohonko_fixture, Atom, ClunieSpec, DiffPoly,
    MohonkoSpec, Monomial,
};
pub use estimates::{
    check_higher_order, check_intermediate_lemma, check_main_estimate, check_sector_corollary, check_shift_lemma,
    quotient,
};
pub use suite::{default_suite, run_suite, IndexRow, SuiteEntry, SuiteIndex, SuiteOutcome, SUITE_TAGS};

use crate::error::{NevError, Result};
use crate::functionals::{geometric_grid, RadialSample};
use crate::growth::{retained_mask, SmallnessVerdict, Verdict};
use crate::model::{parse_with, ParseContext};
use crate::model::{Expr, Lattice};
use crate::tolerances::{HOLD_FRACTION, K_STABILITY, QUAD_REL_TOL};
use crate::{fmt_complex, C64};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

/// Outcome of one check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckVerdict {
    Pass,
    Fail,
    Inconclusive,
    /// A hypothesis of the statement fails on the fitted data.
    HypothesisNotMet,
    /// A structural precondition of the check fails.
    PreconditionViolated,
}

impl CheckVerdict {
    /// Process exit code: 0 pass, 1 fail, 2 anything undecided.
    pub fn exit_code(self) -> i32 {
        match self {
            CheckVerdict::Pass => 0,
            CheckVerdict::Fail => 1,
            _ => 2,
        }
    }
}

impl From<Verdict> for CheckVerdict {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Pass => CheckVerdict::Pass,
            Verdict::Fail => CheckVerdict::Fail,
            Verdict::Inconclusive => CheckVerdict::Inconclusive,
        }
    }
}

/// Non-finite floats serialize as `null` and read back as NaN.
mod num {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::collections::BTreeMap;

    fn opt(x: f64) -> Option<f64> {
        x.is_finite().then_some(x)
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_some(&opt(*x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }

    pub mod vec {
        use super::*;
        pub fn serialize<S: Serializer>(x: &[f64], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(x.iter().map(|v| opt(*v)))
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
            Ok(Vec::<Option<f64>>::deserialize(d)?
                .into_iter()
                .map(|v| v.unwrap_or(f64::NAN))
                .collect())
        }
    }

    pub mod map {
        use super::*;
        pub fn serialize<S: Serializer>(x: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
            s.collect_map(x.iter().map(|(k, v)| (k, opt(*v))))
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
            Ok(BTreeMap::<String, Option<f64>>::deserialize(d)?
                .into_iter()
                .map(|(k, v)| (k, v.unwrap_or(f64::NAN)))
                .collect())
        }
    }
}

/// One radius (or grid point) of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    #[serde(with = "num")]
    pub r: f64,
    #[serde(with = "num")]
    pub lhs: f64,
    #[serde(with = "num::vec")]
    pub rhs_terms: Vec<f64>,
    pub retained: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl Row {
    pub fn new(r: f64, lhs: f64, rhs_terms: Vec<f64>, retained: bool) -> Row {
        Row {
            r,
            lhs,
            rhs_terms,
            retained,
            label: None,
        }
    }

    pub fn labelled(mut self, label: impl Into<String>) -> Row {
        self.label = Some(label.into());
        self
    }
}

/// Structured result of one check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub params: BTreeMap<String, serde_json::Value>,
    /// Names of the `rhs_terms` columns.
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
    #[serde(with = "num::map")]
    pub fitted: BTreeMap<String, f64>,
    pub verdict: CheckVerdict,
    /// Positive when the verdict criterion holds with room to spare.
    #[serde(with = "num")]
    pub margin: f64,
    #[serde(with = "num::vec")]
    pub discarded: Vec<f64>,
    pub notes: Vec<String>,
}

impl CheckReport {
    fn new(check: &str, cfg: &CheckConfig) -> CheckReport {
        CheckReport {
            check: check.to_string(),
            params: cfg.params(),
            columns: vec![],
            rows: vec![],
            fitted: BTreeMap::new(),
            verdict: CheckVerdict::Inconclusive,
            margin: f64::NAN,
            discarded: vec![],
            notes: vec![],
        }
    }

    fn fit(&mut self, key: &str, v: f64) {
        self.fitted.insert(key.to_string(), v);
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    fn smallness(&mut self, prefix: &str, s: &SmallnessVerdict) {
        self.fit(&format!("{prefix}tail_ratio"), s.tail_ratio);
        self.fit(&format!("{prefix}trend_slope"), s.trend_slope);
        self.fit(&format!("{prefix}discarded_fraction"), s.discarded_fraction);
    }

    /// Pretty JSON; identical inputs give identical bytes.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    /// Parses and validates a report produced by [`CheckReport::to_json`].
    pub fn from_json(s: &str) -> Result<CheckReport> {
        let r: CheckReport =
            serde_json::from_str(s).map_err(|e| NevError::InvalidInput(format!("report does not parse: {e}")))?;
        if r.rows.iter().any(|row| row.rhs_terms.len() != r.columns.len()) {
            return Err(NevError::InvalidInput("row width differs from the column list".into()));
        }
        Ok(r)
    }

    /// Tab-separated `r, lhs, <columns>` for external plotting.
    pub fn plot_tsv(&self) -> String {
        let labels = self.rows.iter().any(|r| r.label.is_some());
        let mut out = String::from("r\tlhs");
        for c in &self.columns {
            out.push('\t');
            out.push_str(c);
        }
        out.push_str(if labels { "\tretained\tlabel\n" } else { "\tretained\n" });
        for row in &self.rows {
            out.push_str(&format!("{}\t{}", row.r, row.lhs));
            for v in &row.rhs_terms {
                out.push_str(&format!("\t{v}"));
            }
            out.push_str(&format!("\t{}", row.retained as u8));
            if labels {
                out.push_str(&format!("\t{}", row.label.as_deref().unwrap_or("")));
            }
            out.push('\n');
        }
        out
    }
}

/// Geometric radius grid `r_min · ratio^k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub r_min: f64,
    pub ratio: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn new(r_min: f64, ratio: f64, count: usize) -> Result<GridSpec> {
        geometric_grid(r_min, ratio, count)?;
        Ok(GridSpec { r_min, ratio, count })
    }

    /// Parses `r_min:ratio:count`.
    pub fn parse(s: &str) -> Result<GridSpec> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let bad = || NevError::InvalidParameter(format!("grid '{s}' is not r_min:ratio:count"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let r_min: f64 = parts[0].parse().map_err(|_| bad())?;
        let ratio: f64 = parts[1].parse().map_err(|_| bad())?;
        let count: usize = parts[2].parse().map_err(|_| bad())?;
        GridSpec::new(r_min, ratio, count)
    }

    pub fn radii(&self) -> Vec<f64> {
        geometric_grid(self.r_min, self.ratio, self.count).expect("validated grid")
    }

    pub fn r_max(&self) -> f64 {
        *self.radii().last().expect("count >= 2")
    }

    pub fn label(&self) -> String {
        format!("{}:{}:{}", self.r_min, self.ratio, self.count)
    }
}

/// How `α` in the intermediate lemma is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AlphaMode {
    Constant(f64),
    /// `α = 1 + 1/(log T(r+|c|, f′))^{1+λ}` with `λ = ε/3`.
    Eq,
}

/// Open double sector `S ∪ (-S)` with `S = {arg z ∈ (φ - h, φ + h)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sector {
    pub direction: f64,
    pub half_angle: f64,
}

impl Sector {
    pub fn contains(&self, z: C64) -> bool {
        if z.norm() <= 1e-12 {
            return false;
        }
        [0.0, std::f64::consts::PI].iter().any(|s| {
            let d = (z.arg() - self.direction - s).rem_euclid(std::f64::consts::TAU);
            d.min(std::f64::consts::TAU - d) < self.half_angle
        })
    }
}

/// Parameters shared by all checks; unused fields are ignored by a given check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckConfig {
    /// Function in the DSL.
    pub f: Option<String>,
    /// Periods of the lattice behind `wp`; the unit square lattice when absent.
    pub lattice: Option<(C64, C64)>,
    pub a: C64,
    pub c: C64,
    pub eps: f64,
    pub delta: Option<f64>,
    pub n: usize,
    pub k: usize,
    pub u: f64,
    pub grid: Option<GridSpec>,
    pub targets: Vec<C64>,
    pub alpha: AlphaMode,
    pub sector: Option<Sector>,
    pub fixture: Option<String>,
    pub order: u8,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            f: None,
            lattice: None,
            a: C64::new(0.0, 0.0),
            c: C64::new(1.0, 0.0),
            eps: 0.04,
            delta: None,
            n: 1,
            k: 0,
            u: 1.0,
            grid: None,
            targets: vec![],
            alpha: AlphaMode::Constant(2.0),
            sector: None,
            fixture: None,
            order: 1,
            samples: 1000,
            seed: crate::tolerances::PROBE_SEED,
            tol: QUAD_REL_TOL,
        }
    }
}

impl CheckConfig {
    pub fn with_f(f: &str) -> CheckConfig {
        CheckConfig {
            f: Some(f.to_string()),
            ..CheckConfig::default()
        }
    }

    fn context(&self) -> Result<ParseContext> {
        let lattice = match self.lattice {
            Some((w1, w2)) => Lattice::new(w1, w2)?,
            None => Lattice::square(C64::new(1.0, 0.0))?,
        };
        Ok(ParseContext {
            lattice: Arc::new(lattice),
        })
    }

    /// The configured function, parsed.
    pub fn function(&self) -> Result<Expr> {
        let src = self
            .f
            .as_deref()
            .ok_or_else(|| NevError::InvalidParameter("this check needs a function".into()))?;
        parse_with(src, &self.context()?)
    }

    fn grid_or(&self, r_min: f64, ratio: f64, count: usize) -> GridSpec {
        self.grid.unwrap_or(GridSpec { r_min, ratio, count })
    }

    /// The configured grid, else `r_k = 2·1.15^k` for `k = 0..40` (about 2 to 540).
    fn default_grid(&self) -> GridSpec {
        self.grid_or(2.0, 1.15, 41)
    }

    fn shift(&self) -> Result<C64> {
        if self.c.norm() == 0.0 || !self.c.is_finite() {
            return Err(NevError::InvalidParameter("shift must be nonzero".into()));
        }
        Ok(self.c)
    }

    fn epsilon(&self) -> Result<f64> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(NevError::InvalidParameter("epsilon must lie in (0, 1)".into()));
        }
        Ok(self.eps)
    }

    /// Parameter map recorded in reports.
    pub fn params(&self) -> BTreeMap<String, serde_json::Value> {
        use serde_json::json;
        let mut m = BTreeMap::new();
        if let Some(f) = &self.f {
            m.insert("f".into(), json!(f));
        }
        if let Some((w1, w2)) = self.lattice {
            m.insert("lattice".into(), json!([fmt_complex(w1), fmt_complex(w2)]));
        }
        m.insert("a".into(), json!(fmt_complex(self.a)));
        m.insert("c".into(), json!(fmt_complex(self.c)));
        m.insert("eps".into(), json!(self.eps));
        if let Some(d) = self.delta {
            m.insert("delta".into(), json!(d));
        }
        m.insert("n".into(), json!(self.n));
        if let Some(g) = self.grid {
            m.insert("grid".into(), json!(g.label()));
        }
        if !self.targets.is_empty() {
            let t: Vec<String> = self.targets.iter().map(|a| fmt_complex(*a)).collect();
            m.insert("targets".into(), json!(t));
        }
        if let Some(fx) = &self.fixture {
            m.insert("fixture".into(), json!(fx));
        }
        m
    }
}

/// Parses a complex literal such as `2`, `-1.5i`, `0.5+0.5i` or `i`.
pub fn parse_complex(s: &str) -> Result<C64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || NevError::InvalidParameter(format!("'{s}' is not a complex number"));
    let imag = |p: &str| -> Result<f64> {
        match p {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => p.parse().map_err(|_| bad()),
        }
    };
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i') else {
        return Ok(C64::new(t.parse().map_err(|_| bad())?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => Ok(C64::new(body[..k].parse().map_err(|_| bad())?, imag(&body[k..])?)),
        None => Ok(C64::new(0.0, imag(body)?)),
    }
}

/// Constant `K` fitted to `lhs <= K · rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct KFit {
    pub k: f64,
    pub k_top: f64,
    pub k_mid: f64,
    pub stable: bool,
    pub hold: f64,
}

/// Fits `K` over the top two decades of retained radii.
///
/// `K` is stable when the top-decade maximum does not exceed `K_STABILITY`
/// times the previous decade's maximum; a decaying ratio is stable.
pub(crate) fn fit_constant(r: &[f64], lhs: &[f64], rhs: &[f64], keep: &[bool]) -> Result<KFit> {
    let ratio: Vec<f64> = lhs
        .iter()
        .zip(rhs)
        .map(|(l, h)| {
            if *h > 0.0 {
                (l / h).max(0.0)
            } else if *l <= 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let kept: Vec<usize> = (0..r.len()).filter(|i| keep[*i]).collect();
    let top_r = kept
        .last()
        .map(|i| r[*i])
        .ok_or_else(|| NevError::InsufficientData("no retained radii".into()))?;
    let max_over = |lo: f64, hi: f64| -> Option<f64> {
        let v: Vec<f64> = kept
            .iter()
            .filter(|i| r[**i] >= lo && r[**i] < hi)
            .map(|i| ratio[*i])
            .collect();
        (!v.is_empty()).then(|| v.iter().cloned().fold(0.0, f64::max))
    };
    let k_top = max_over(top_r / 10.0, f64::INFINITY).unwrap_or(0.0);
    let k_mid = max_over(top_r / 100.0, top_r / 10.0)
        .ok_or_else(|| NevError::InsufficientData("the grid must reach one decade below its top decade".into()))?;
    let k = k_top.max(k_mid);
    let stable = k.is_finite()
        && if k_mid > 0.0 {
            k_top <= K_STABILITY * k_mid
        } else {
            k_top == 0.0
        };
    let holds = kept
        .iter()
        .filter(|i| lhs[**i] <= k * rhs[**i] * (1.0 + 1e-12) || lhs[**i] <= 0.0)
        .count();
    Ok(KFit {
        k,
        k_top,
        k_mid,
        stable,
        hold: holds as f64 / kept.len() as f64,
    })
}

impl CheckReport {
    fn record_k(&mut self, fit: &KFit) {
        self.fit("K", fit.k);
        self.fit("K_top", fit.k_top);
        self.fit("K_mid", fit.k_mid);
        self.fit("hold_fraction", fit.hold);
    }
}

fn k_ok(fit: &KFit) -> bool {
    fit.stable && fit.hold >= HOLD_FRACTION
}

fn k_margin(fit: &KFit) -> f64 {
    if fit.k_mid > 0.0 {
        1.0 - fit.k_top / (K_STABILITY * fit.k_mid)
    } else if fit.k_top == 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Keep-mask over radii flagged in any of the sample series.
fn keep_mask(series: &[&[RadialSample]]) -> Vec<bool> {
    let n = series[0].len();
    let flagged: Vec<bool> = (0..n).map(|i| series.iter().any(|s| s[i].nudged())).collect();
    retained_mask(&flagged)
}

fn discarded(grid: &[f64], keep: &[bool]) -> Vec<f64> {
    grid.iter().zip(keep).filter(|(_, k)| !**k).map(|(r, _)| *r).collect()
}

/// A named check runner.
pub type CheckFn = fn(&CheckConfig) -> Result<CheckReport>;

/// Every registered check, by name.
pub const CHECKS: &[(&str, CheckFn)] = &[
    ("characteristic", check_characteristic),
    ("jensen", check_jensen),
    ("roots", check_roots),
    ("operators", check_operators),
    ("main-estimate", check_main_estimate),
    ("sector-corollary", check_sector_corollary),
    ("higher-order", check_higher_order),
    ("counting-inequality", check_counting_inequality),
    ("defect-inequality", check_defect_inequality),
    ("pair-index-inequality", check_pair_index_inequality),
    ("smt-analogue", check_smt_analogue),
    ("weierstrass-example", check_weierstrass_example),
    ("clunie-analogue", check_clunie_analogue),
    ("mohonko-analogue", check_mohonko_analogue),
    ("projection-lemma", check_projection_lemma),
    ("elementary-bounds", check_elementary_bounds),
    ("shift-lemma", check_shift_lemma),
    ("intermediate-lemma", check_intermediate_lemma),
];

/// Runs the check registered under `name`.
pub fn run_check(name: &str, cfg: &CheckConfig) -> Result<CheckReport> {
    let run = CHECKS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, f)| *f)
        .ok_or_else(|| NevError::UnknownCheck(name.to_string()))?;
    run(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        let c = |re, im| C64::new(re, im);
        assert_eq!(parse_complex("2").unwrap(), c(2.0, 0.0));
        assert_eq!(parse_complex("-1.5i").unwrap(), c(0.0, -1.5));
        assert_eq!(parse_complex("0.5+0.5i").unwrap(), c(0.5, 0.5));
        assert_eq!(parse_complex("0.5-0.5i").unwrap(), c(0.5, -0.5));
        assert_eq!(parse_complex("i").unwrap(), c(0.0, 1.0));
        assert_eq!(parse_complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_complex("1e-3+2e+1i").unwrap(), c(1e-3, 20.0));
        assert!(parse_complex("1+").is_err());
        assert!(parse_complex("").is_err());
        for z in [c(2.0, 0.0), c(0.0, -1.5), c(0.5, 0.5), c(-3.25, -0.125)] {
            assert_eq!(parse_complex(&fmt_complex(z)).unwrap(), z);
        }
    }

    #[test]
    fn grid_specs() {
        let g = GridSpec::parse("2:1.15:40").unwrap();
        assert_eq!(g.radii().len(), 40);
        assert!(GridSpec::parse("2:1:40").is_err());
        assert!(GridSpec::parse("2:1.1").is_err());
        assert!(GridSpec::parse("2:1.1:1").is_err());
    }

    #[test]
    fn sector_membership() {
        let s = Sector {
            direction: 0.0,
            half_angle: 0.3,
        };
        assert!(s.contains(C64::new(1.0, 0.1)));
        assert!(s.contains(C64::new(-1.0, 0.1)));
        assert!(!s.contains(C64::new(0.0, 1.0)));
        assert!(!s.contains(C64::new(0.0, 0.0)));
    }

    #[test]
    fn constant_fit_stability() {
        let r: Vec<f64> = (0..31).map(|k| 10f64.powf(k as f64 / 10.0)).collect();
        let keep = vec![true; r.len()];
        let rhs = vec![1.0; r.len()];
        let flat = fit_constant(&r, &vec![0.5; r.len()], &rhs, &keep).unwrap();
        assert!(flat.stable && (flat.k - 0.5).abs() < 1e-15 && flat.hold == 1.0);
        let growing: Vec<f64> = r.iter().map(|x| x.ln()).collect();
        let g = fit_constant(&r, &growing, &rhs, &keep).unwrap();
        assert!(g.stable, "log growth over one decade stays within 2x: {g:?}");
        let linear: Vec<f64> = r.clone();
        assert!(!fit_constant(&r, &linear, &rhs, &keep).unwrap().stable);
        let short = [1.0, 2.0, 3.0];
        assert!(fit_constant(&short, &[1.0; 3], &[1.0; 3], &[true; 3]).is_err());
    }

    #[test]
    fn unknown_check_is_reported() {
        assert!(matches!(
            run_check("no-such-check", &CheckConfig::default()),
            Err(NevError::UnknownCheck(_))
        ));
    }
}
