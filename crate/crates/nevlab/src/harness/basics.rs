//! Sanity checks against closed forms: the characteristic of `e^z`, Jensen's
//! formula, analytic zero and pole lists, and operator identities.

use super::{CheckConfig, CheckReport, CheckVerdict, Row};
use crate::error::Result;
use crate::functionals::{characteristic, jensen_residual};
use crate::locate::{argument_principle_count, locate_points, DiskSpec, Kind, Rect, SingularRecord, Target};
use crate::model::{probe_points, Expr};
use crate::{fmt_complex, C64};
use std::f64::consts::PI;

const CHARACTERISTIC_REL: f64 = 1e-6;
const JENSEN_TOL: f64 = 1e-7;
const OPERATOR_REL: f64 = 1e-10;
const ROOT_MATCH: f64 = 1e-7;

/// Rational times exponential functions, some with zeros or poles at the origin or on the test circles.
pub const JENSEN_CORPUS: [&str; 10] = [
    "exp(z)",
    "(z-1)*exp(z)",
    "exp(z)/(z-3)",
    "(z^2+1)*exp(2*z)",
    "(z-0.5)/(z+4)*exp(-z)",
    "z*exp(z)",
    "exp(z)/z^2",
    "(z-1.5*i)^2*exp(i*z)",
    "(z^3-8)/(z^2+9)*exp(0.5*z)",
    "(z+7)/((z-6)*(z-2*i))*exp(0.3*z)",
];

/// `T(r, e^z) = r/π`.
pub fn check_characteristic(cfg: &CheckConfig) -> Result<CheckReport> {
    let cfg = CheckConfig {
        f: Some("exp(z)".into()),
        ..cfg.clone()
    };
    let mut rep = CheckReport::new("characteristic", &cfg);
    rep.params.remove("a");
    rep.params.remove("c");
    let f = cfg.function()?;
    let mut worst: f64 = 0.0;
    for r in [1.0, 5.0, 20.0, 50.0] {
        let t = characteristic(&f, r)?.T;
        let exact = r / PI;
        let rel = (t - exact).abs() / exact;
        worst = worst.max(rel);
        rep.rows.push(Row::new(r, t, vec![exact, rel], true));
    }
    rep.columns = vec!["r/pi".into(), "relative error".into()];
    rep.fit("max_relative_error", worst);
    rep.margin = CHARACTERISTIC_REL - worst;
    rep.verdict = if worst <= CHARACTERISTIC_REL {
        CheckVerdict::Pass
    } else {
        CheckVerdict::Fail
    };
    Ok(rep)
}

/// `|mean log|f| - N(r,1/f) + N(r,f) - log|c_f||` on the corpus, or on the configured function.
pub fn check_jensen(cfg: &CheckConfig) -> Result<CheckReport> {
    let mut rep = CheckReport::new("jensen", cfg);
    rep.params.remove("a");
    rep.params.remove("c");
    let corpus: Vec<String> = match &cfg.f {
        Some(f) => vec![f.clone()],
        None => JENSEN_CORPUS.iter().map(|s| s.to_string()).collect(),
    };
    let mut worst: f64 = 0.0;
    for src in &corpus {
        let f = cfg.with_source(src).function()?;
        for r in [2.0, 5.0, 10.0] {
            let res = jensen_residual(&f, r)?;
            worst = worst.max(res);
            rep.rows
                .push(Row::new(r, res, vec![JENSEN_TOL], true).labelled(src.clone()));
        }
    }
    rep.columns = vec!["tolerance".into()];
    rep.fit("max_residual", worst);
    rep.margin = JENSEN_TOL - worst;
    rep.verdict = if worst <= JENSEN_TOL {
        CheckVerdict::Pass
    } else {
        CheckVerdict::Fail
    };
    Ok(rep)
}

/// A function with its analytic zeros and poles in a square `|Re|, |Im| < half`.
struct RootFixture {
    src: &'static str,
    half: f64,
    /// `(location, multiplicity, is_pole)`.
    points: Vec<(C64, u32, bool)>,
}

fn lattice_points(half: f64, offset: C64, mult: u32, pole: bool) -> Vec<(C64, u32, bool)> {
    let k = half.ceil() as i32 + 1;
    let mut out = vec![];
    for m in -k..=k {
        for n in -k..=k {
            let z = C64::new(m as f64, n as f64) + offset;
            if z.re.abs() < half && z.im.abs() < half {
                out.push((z, mult, pole));
            }
        }
    }
    out
}

fn root_fixtures() -> Vec<RootFixture> {
    let zero = C64::new(0.0, 0.0);
    let centre = C64::new(0.5, 0.5);
    let mut wp = lattice_points(2.3, zero, 2, true);
    wp.extend(lattice_points(2.3, centre, 2, false));
    let mut wp2 = lattice_points(2.3, zero, 4, true);
    wp2.extend(lattice_points(2.3, centre, 4, false));
    vec![
        RootFixture {
            src: "exp(z)-1",
            half: 10.1,
            points: (-1..=1)
                .map(|k| (C64::new(0.0, 2.0 * PI * k as f64), 1, false))
                .collect(),
        },
        RootFixture {
            src: "sin(pi*z)",
            half: 5.5,
            points: (-5..=5).map(|k| (C64::new(k as f64, 0.0), 1, false)).collect(),
        },
        RootFixture {
            src: "wp(z)",
            half: 2.3,
            points: wp,
        },
        RootFixture {
            src: "wp(z)^2",
            half: 2.3,
            points: wp2,
        },
        RootFixture {
            src: "(z-1)^2*(z+2*i)/((z-3)*(z-0.5*i)^3)",
            half: 3.5,
            points: vec![
                (C64::new(1.0, 0.0), 2, false),
                (C64::new(0.0, -2.0), 1, false),
                (C64::new(3.0, 0.0), 1, true),
                (C64::new(0.0, 0.5), 3, true),
            ],
        },
        RootFixture {
            src: "z^3/(z^2+1)^2",
            half: 2.0,
            points: vec![
                (zero, 3, false),
                (C64::new(0.0, 1.0), 2, true),
                (C64::new(0.0, -1.0), 2, true),
            ],
        },
    ]
}

fn in_square(z: C64, half: f64) -> bool {
    z.re.abs() < half && z.im.abs() < half
}

/// Number of expected points without an exact located counterpart, plus located points left over.
fn mismatches(expected: &[(C64, u32, bool)], located: &[SingularRecord]) -> usize {
    let mut used = vec![false; located.len()];
    let mut bad = 0;
    for (z, m, pole) in expected {
        let hit = located.iter().enumerate().position(|(i, rec)| {
            !used[i]
                && (rec.location - z).norm() < ROOT_MATCH
                && rec.order == *m
                && matches!(rec.kind, Kind::Pole) == *pole
        });
        match hit {
            Some(i) => used[i] = true,
            None => bad += 1,
        }
    }
    bad + used.iter().filter(|u| !**u).count()
}

/// Located zeros and poles equal the analytic multisets, and the argument principle agrees.
pub fn check_roots(cfg: &CheckConfig) -> Result<CheckReport> {
    let mut rep = CheckReport::new("roots", cfg);
    rep.params.remove("a");
    rep.params.remove("c");
    let mut total_bad = 0usize;
    for fx in root_fixtures() {
        let f = cfg.with_source(fx.src).function()?;
        let disk = DiskSpec::new(fx.half * std::f64::consts::SQRT_2 + 0.5)?;
        let mut located: Vec<SingularRecord> = locate_points(&f, Target::Value(C64::new(0.0, 0.0)), disk)?;
        located.extend(locate_points(&f, Target::Pole, disk)?);
        located.retain(|p| in_square(p.location, fx.half));
        let bad = mismatches(&fx.points, &located);
        let expected_total: i64 = fx
            .points
            .iter()
            .map(|(_, m, pole)| if *pole { -(*m as i64) } else { *m as i64 })
            .sum();
        let winding = argument_principle_count(&f, Rect::new(-fx.half, fx.half, -fx.half, fx.half)?)?;
        let bad_total = usize::from(winding != expected_total);
        total_bad += bad + bad_total;
        rep.rows.push(
            Row::new(
                fx.half,
                bad as f64,
                vec![
                    fx.points.len() as f64,
                    located.len() as f64,
                    expected_total as f64,
                    winding as f64,
                ],
                true,
            )
            .labelled(fx.src),
        );
    }
    rep.columns = vec![
        "expected points".into(),
        "located points".into(),
        "expected zeros minus poles".into(),
        "argument principle".into(),
    ];
    rep.fit("mismatches", total_bad as f64);
    rep.margin = 0.0 - total_bad as f64;
    rep.verdict = if total_bad == 0 {
        CheckVerdict::Pass
    } else {
        CheckVerdict::Fail
    };
    Ok(rep)
}

/// Corpus for operator identities: the Jensen functions with two elliptic and trigonometric entries swapped in.
fn operator_corpus() -> Vec<&'static str> {
    let mut c: Vec<&str> = JENSEN_CORPUS[..8].to_vec();
    c.push("wp(z)+sin(pi*z)");
    c.push("exp(z^2)/(z-2)");
    c
}

/// Worst relative defect of the identities at one probe.
fn operator_defect(f: &Expr, z: C64, c1: C64, c2: C64) -> Result<f64> {
    let fp = f.differentiate();
    let rel = |a: C64, b: C64, scale: f64| (a - b).norm() / scale.max(f64::MIN_POSITIVE);
    let ev = |g: &Expr, w: C64| g.eval(w);
    let (f0, f1, f2, f12, f11) = (
        ev(f, z),
        ev(f, z + c1),
        ev(f, z + c2),
        ev(f, z + c1 + c2),
        ev(f, z + c1 + c1),
    );
    let (p0, p1) = (ev(&fp, z), ev(&fp, z + c1));
    let mut worst: f64 = 0.0;
    // Δ_c commutes with differentiation.
    let direct = p1 - p0;
    let s = p1.norm() + p0.norm();
    worst = worst.max(rel(ev(&f.difference(c1, 1)?.differentiate(), z), direct, s));
    worst = worst.max(rel(ev(&fp.difference(c1, 1)?, z), direct, s));
    // Second difference.
    let s2 = f11.norm() + 2.0 * f1.norm() + f0.norm();
    worst = worst.max(rel(ev(&f.difference(c1, 2)?, z), f11 - f1 * 2.0 + f0, s2));
    // Differences with distinct shifts commute.
    let mixed = f12 - f1 - f2 + f0;
    let s3 = f12.norm() + f1.norm() + f2.norm() + f0.norm();
    worst = worst.max(rel(ev(&f.difference(c1, 1)?.difference(c2, 1)?, z), mixed, s3));
    worst = worst.max(rel(ev(&f.difference(c2, 1)?.difference(c1, 1)?, z), mixed, s3));
    // Shifts compose additively.
    worst = worst.max(rel(ev(&f.shift(c1).shift(c2), z), f12, f12.norm()));
    Ok(worst)
}

/// Commutation of `Δ_c` with `d/dz`, second differences and shift composition on seeded probes.
pub fn check_operators(cfg: &CheckConfig) -> Result<CheckReport> {
    let mut rep = CheckReport::new("operators", cfg);
    rep.params.remove("a");
    let c1 = cfg.c;
    let c2 = C64::new(0.5, 0.5);
    rep.params.insert("c2".into(), serde_json::json!(fmt_complex(c2)));
    let probes = probe_points(10, 3.0, cfg.seed);
    let mut worst: f64 = 0.0;
    for src in operator_corpus() {
        let f = cfg.with_source(src).function()?;
        let mut w: f64 = 0.0;
        for z in &probes {
            w = w.max(operator_defect(&f, *z, c1, c2)?);
        }
        worst = worst.max(w);
        rep.rows
            .push(Row::new(probes.len() as f64, w, vec![OPERATOR_REL], true).labelled(src));
    }
    rep.columns = vec!["tolerance".into()];
    rep.fit("max_relative_defect", worst);
    rep.margin = OPERATOR_REL - worst;
    rep.verdict = if worst <= OPERATOR_REL {
        CheckVerdict::Pass
    } else {
        CheckVerdict::Fail
    };
    Ok(rep)
}

impl CheckConfig {
    /// The same configuration with another function source.
    fn with_source(&self, src: &str) -> CheckConfig {
        CheckConfig {
            f: Some(src.to_string()),
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_checks_pass() {
        let cfg = CheckConfig::default();
        for check in [check_characteristic, check_jensen, check_roots, check_operators] {
            let rep = check(&cfg).unwrap();
            assert_eq!(rep.verdict, CheckVerdict::Pass, "{}: {:?}", rep.check, rep.rows);
        }
    }

    #[test]
    fn mismatch_counts_both_directions() {
        let rec = |z: C64, order: u32| SingularRecord {
            location: z,
            order,
            kind: Kind::ZeroOf(C64::new(0.0, 0.0)),
            provenance: crate::locate::Provenance::Numeric,
        };
        let one = C64::new(1.0, 0.0);
        assert_eq!(mismatches(&[(one, 2, false)], &[rec(one, 2)]), 0);
        assert_eq!(mismatches(&[(one, 2, false)], &[rec(one, 1)]), 2);
        assert_eq!(mismatches(&[], &[rec(one, 1)]), 1);
    }
}
