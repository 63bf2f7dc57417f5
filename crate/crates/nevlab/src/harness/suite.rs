//! The acceptance suite: named check runs with expected verdicts, grouped by tag.

use super::{run_check, CheckConfig, CheckReport, CheckVerdict, GridSpec, Row};
use crate::error::{NevError, Result};
use crate::{worker_pool, C64};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const SUITE_TAGS: &[&str] = &[
    "weierstrass",
    "characteristic",
    "jensen",
    "roots",
    "elementary",
    "main-smallness",
    "counting",
    "defect",
    "operators",
    "lemmas",
    "equations",
    "determinism",
];

/// One run: a check, its configuration and the verdict it must produce.
#[derive(Debug, Clone)]
pub struct SuiteEntry {
    pub id: String,
    pub tag: &'static str,
    pub check: &'static str,
    pub cfg: CheckConfig,
    pub expected: CheckVerdict,
}

fn entry(id: &str, tag: &'static str, check: &'static str, cfg: CheckConfig, expected: CheckVerdict) -> SuiteEntry {
    SuiteEntry {
        id: id.to_string(),
        tag,
        check,
        cfg,
        expected,
    }
}

fn cplx(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn with(f: Option<&str>, edit: impl FnOnce(&mut CheckConfig)) -> CheckConfig {
    let mut c = CheckConfig {
        f: f.map(str::to_string),
        ..CheckConfig::default()
    };
    edit(&mut c);
    c
}

/// Entries in dependency order: closed forms first, then estimates, then the defect relation.
pub fn default_suite() -> Vec<SuiteEntry> {
    use CheckVerdict::*;
    let exp = Some("exp(z)");
    let mut s = vec![
        entry(
            "characteristic",
            "characteristic",
            "characteristic",
            CheckConfig::default(),
            Pass,
        ),
        entry("jensen", "jensen", "jensen", CheckConfig::default(), Pass),
        entry("roots", "roots", "roots", CheckConfig::default(), Pass),
        entry("operators", "operators", "operators", CheckConfig::default(), Pass),
        entry(
            "elementary-bounds",
            "elementary",
            "elementary-bounds",
            CheckConfig::default(),
            Pass,
        ),
        entry(
            "projection-lemma",
            "elementary",
            "projection-lemma",
            CheckConfig::default(),
            Pass,
        ),
    ];
    for (id, a, c) in [
        ("main-estimate-a0-c1", cplx(0.0, 0.0), cplx(1.0, 0.0)),
        ("main-estimate-a2-c1", cplx(2.0, 0.0), cplx(1.0, 0.0)),
        ("main-estimate-a2-c0.5+0.5i", cplx(2.0, 0.0), cplx(0.5, 0.5)),
    ] {
        let cfg = with(exp, |k| {
            k.a = a;
            k.c = c;
        });
        s.push(entry(id, "main-smallness", "main-estimate", cfg, Pass));
    }
    s.push(entry(
        "counting-exp-a0",
        "counting",
        "counting-inequality",
        with(exp, |_| {}),
        Pass,
    ));
    s.push(entry(
        "counting-exp-a2",
        "counting",
        "counting-inequality",
        with(exp, |k| k.a = cplx(2.0, 0.0)),
        Pass,
    ));
    s.push(entry(
        "counting-sine-c0.5",
        "counting",
        "counting-inequality",
        with(Some("sin(pi*z)"), |k| k.c = cplx(0.5, 0.0)),
        Pass,
    ));
    s.push(entry(
        "defect-exp-a0",
        "defect",
        "defect-inequality",
        with(exp, |_| {}),
        Pass,
    ));
    s.push(entry(
        "defect-exp-a2",
        "defect",
        "defect-inequality",
        with(exp, |k| k.a = cplx(2.0, 0.0)),
        Pass,
    ));
    s.push(entry(
        "defect-exp-exp",
        "defect",
        "defect-inequality",
        with(Some("exp(exp(z))"), |k| {
            k.grid = Some(GridSpec {
                r_min: 1.0,
                ratio: 1.15,
                count: 25,
            })
        }),
        HypothesisNotMet,
    ));
    s.push(entry(
        "pair-index-exp",
        "defect",
        "pair-index-inequality",
        with(exp, |k| {
            k.targets = vec![cplx(0.0, 0.0), cplx(1.0, 0.0), cplx(2.0, 0.0)]
        }),
        Pass,
    ));
    s.push(entry(
        "pair-index-sine",
        "defect",
        "pair-index-inequality",
        with(Some("sin(pi*z)"), |k| k.targets = vec![cplx(0.0, 0.0)]),
        Pass,
    ));
    s.push(entry(
        "pair-index-empty",
        "defect",
        "pair-index-inequality",
        with(exp, |_| {}),
        Pass,
    ));
    s.push(entry(
        "sector-corollary-exp",
        "lemmas",
        "sector-corollary",
        with(exp, |_| {}),
        Pass,
    ));
    s.push(entry(
        "higher-order-exp-n2",
        "lemmas",
        "higher-order",
        with(exp, |k| k.n = 2),
        Pass,
    ));
    s.push(entry(
        "intermediate-exp-a0",
        "lemmas",
        "intermediate-lemma",
        with(exp, |k| k.alpha = super::AlphaMode::Constant(2.0)),
        Pass,
    ));
    s.push(entry(
        "intermediate-exp-a2-eq",
        "lemmas",
        "intermediate-lemma",
        with(exp, |k| {
            k.a = cplx(2.0, 0.0);
            k.alpha = super::AlphaMode::Eq;
        }),
        Pass,
    ));
    s.push(entry(
        "shift-lemma-exp",
        "lemmas",
        "shift-lemma",
        with(exp, |_| {}),
        Pass,
    ));
    s.push(entry(
        "smt-exp-order2",
        "lemmas",
        "smt-analogue",
        with(exp, |k| {
            k.order = 2;
            k.targets = vec![cplx(1.0, 0.0)];
        }),
        Pass,
    ));
    for (id, fx, v) in [("clunie-zero", "zero", Pass), ("clunie-nonsmall", "nonsmall", Fail)] {
        s.push(entry(
            id,
            "equations",
            "clunie-analogue",
            with(None, |k| k.fixture = Some(fx.into())),
            v,
        ));
    }
    for fx in ["degenerate", "unit", "manufactured"] {
        s.push(entry(
            &format!("mohonko-{fx}"),
            "equations",
            "mohonko-analogue",
            with(None, |k| k.fixture = Some(fx.into())),
            Pass,
        ));
    }
    for n in [1usize, 2] {
        s.push(entry(
            &format!("weierstrass-n{n}"),
            "weierstrass",
            "weierstrass-example",
            with(None, |k| k.n = n),
            Pass,
        ));
    }
    s.push(entry(
        "determinism",
        "determinism",
        "determinism",
        CheckConfig::default(),
        Pass,
    ));
    s
}

/// Result of one entry; `report` is absent when the check raised an error.
#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub id: String,
    pub tag: String,
    pub check: String,
    pub expected: CheckVerdict,
    pub report: Option<CheckReport>,
    pub error: Option<String>,
}

impl SuiteOutcome {
    pub fn verdict(&self) -> Option<CheckVerdict> {
        self.report.as_ref().map(|r| r.verdict)
    }

    pub fn matched(&self) -> bool {
        self.verdict() == Some(self.expected)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexRow {
    pub id: String,
    pub tag: String,
    pub check: String,
    pub expected: CheckVerdict,
    /// Absent when the check raised an error.
    pub verdict: Option<CheckVerdict>,
    pub matched: bool,
    pub report: Option<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteIndex {
    pub runs: Vec<IndexRow>,
    pub counts: BTreeMap<String, usize>,
    pub all_matched: bool,
}

impl SuiteIndex {
    pub fn new(outcomes: &[SuiteOutcome]) -> SuiteIndex {
        let mut counts = BTreeMap::new();
        let runs: Vec<IndexRow> = outcomes
            .iter()
            .map(|o| {
                let key = match o.verdict() {
                    Some(v) => serde_json::to_value(v)
                        .ok()
                        .and_then(|j| j.as_str().map(String::from))
                        .unwrap_or_default(),
                    None => "error".to_string(),
                };
                *counts.entry(key).or_insert(0) += 1;
                IndexRow {
                    id: o.id.clone(),
                    tag: o.tag.clone(),
                    check: o.check.clone(),
                    expected: o.expected,
                    verdict: o.verdict(),
                    matched: o.matched(),
                    report: o.report.as_ref().map(|_| format!("{}.json", o.id)),
                    error: o.error.clone(),
                }
            })
            .collect();
        let all_matched = runs.iter().all(|r| r.matched);
        SuiteIndex {
            runs,
            counts,
            all_matched,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("index serializes")
    }

    pub fn from_json(s: &str) -> Result<SuiteIndex> {
        serde_json::from_str(s).map_err(|e| NevError::InvalidInput(format!("index: {e}")))
    }
}

/// Entries whose JSON reports are compared across worker counts.
const DETERMINISM_PROBES: [&str; 2] = ["main-estimate-a2-c1", "jensen"];

fn run_determinism(cfg: &CheckConfig, suite: &[SuiteEntry]) -> Result<CheckReport> {
    let mut rep = CheckReport::new("determinism", cfg);
    rep.params.clear();
    let mut bad = 0usize;
    for (i, id) in DETERMINISM_PROBES.iter().enumerate() {
        let e = suite.iter().find(|e| e.id == *id).expect("probe entry exists");
        let one = worker_pool(1)?.install(|| run_check(e.check, &e.cfg))?.to_json();
        let eight = worker_pool(8)?.install(|| run_check(e.check, &e.cfg))?.to_json();
        let same = one == eight;
        bad += usize::from(!same);
        rep.rows
            .push(Row::new(i as f64, f64::from(u8::from(same)), vec![one.len() as f64], true).labelled(*id));
    }
    rep.columns = vec!["report bytes".into()];
    rep.fit("mismatches", bad as f64);
    rep.margin = 0.0 - bad as f64;
    rep.verdict = if bad == 0 {
        CheckVerdict::Pass
    } else {
        CheckVerdict::Fail
    };
    Ok(rep)
}

/// Runs the entries whose tag is in `only` (all when empty) on a pool of `workers` threads.
pub fn run_suite(only: &[String], workers: usize) -> Result<Vec<SuiteOutcome>> {
    for t in only {
        if !SUITE_TAGS.contains(&t.as_str()) {
            return Err(NevError::UnknownCheck(format!("unknown suite tag '{t}'")));
        }
    }
    let suite = default_suite();
    let pool = worker_pool(workers)?;
    let mut out = vec![];
    for e in suite
        .iter()
        .filter(|e| only.is_empty() || only.iter().any(|t| t == e.tag))
    {
        let res = if e.check == "determinism" {
            run_determinism(&e.cfg, &suite)
        } else {
            pool.install(|| run_check(e.check, &e.cfg))
        };
        let (report, error) = match res {
            Ok(r) => (Some(r), None),
            Err(err) => (None, Some(err.to_string())),
        };
        out.push(SuiteOutcome {
            id: e.id.clone(),
            tag: e.tag.to_string(),
            check: e.check.to_string(),
            expected: e.expected,
            report,
            error,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_ids_are_unique_and_tagged() {
        let s = default_suite();
        let mut ids: Vec<&str> = s.iter().map(|e| e.id.as_str()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), s.len());
        for t in SUITE_TAGS {
            assert!(s.iter().any(|e| e.tag == *t), "tag {t} has no entries");
        }
        for id in DETERMINISM_PROBES {
            assert!(s.iter().any(|e| e.id == id));
        }
    }

    #[test]
    fn unknown_tag_is_rejected() {
        assert!(matches!(run_suite(&["nope".into()], 1), Err(NevError::UnknownCheck(_))));
    }

    #[test]
    fn single_tag_run_and_index_round_trip() {
        let out = run_suite(&["jensen".into()], 2).unwrap();
        assert_eq!(out.len(), 1);
        let idx = SuiteIndex::new(&out);
        assert!(idx.all_matched);
        assert_eq!(SuiteIndex::from_json(&idx.to_json()).unwrap(), idx);
    }
}
