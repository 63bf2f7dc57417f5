//! `nevlab`: tables of Nevanlinna functionals, located singularities, growth
//! fits, single checks and the acceptance suite.
//!
//! Exit codes: 0 pass, 1 fail, 2 inconclusive, 3 input error, 4 numeric failure.

mod config;

use clap::{Args, Parser, Subcommand};
use config::RunConfig;
use nevlab::functionals::{samples_csv, Profile};
use nevlab::growth::growth_report;
use nevlab::harness::{parse_complex, run_check, run_suite, CheckReport, GridSpec, SuiteIndex};
use nevlab::locate::{locate_points, DiskSpec, Kind, Target};
use nevlab::{fmt_complex, worker_pool, NevError};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_FAIL: u8 = 1;
const EXIT_USER: u8 = 3;
const EXIT_NUMERIC: u8 = 4;
const DEFAULT_GRID: &str = "2:1.15:40";

#[derive(Parser, Debug)]
#[command(
    name = "nevlab",
    version,
    about = "Numerical checks of value-distribution estimates for closed-form meromorphic functions"
)]
struct Cli {
    /// Flat `key = value` config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads; defaults to NEV_LAB_WORKERS, then the number of cores.
    #[arg(long, global = true)]
    workers: Option<String>,
    /// Output file (tables) or directory (reports).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One CSV row of m, N, T and target functionals per radius.
    Functionals(Params),
    /// Zeros, a-points or poles inside a disk, as CSV.
    Singularities(Params),
    /// Growth indicators and deficiencies as JSON.
    Growth(Params),
    /// Runs one named check and writes its JSON report and plot data.
    Verify {
        name: String,
        #[command(flatten)]
        params: Params,
    },
    /// Runs the acceptance suite, optionally restricted to tags.
    Suite {
        #[arg(long)]
        only: Vec<String>,
    },
}

#[derive(Args, Debug, Default)]
struct Params {
    /// Function in the expression language, e.g. "exp(z) + z*wp(z)^2".
    #[arg(long)]
    f: Option<String>,
    /// Radial grid `r_min:ratio:count`.
    #[arg(long)]
    grid: Option<String>,
    /// Target value (repeatable); `pole` selects poles for `singularities`.
    #[arg(long)]
    target: Vec<String>,
    #[arg(long)]
    a: Option<String>,
    #[arg(long)]
    c: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    u: Option<String>,
    /// A constant above 1, or `eq` for the growth-adapted choice.
    #[arg(long)]
    alpha: Option<String>,
    /// `direction:half_angle` in radians.
    #[arg(long)]
    sector: Option<String>,
    #[arg(long)]
    fixture: Option<String>,
    /// Lattice periods `w1,w2`.
    #[arg(long)]
    lattice: Option<String>,
    #[arg(long)]
    order: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    /// Disk radius for `singularities`.
    #[arg(long)]
    radius: Option<String>,
}

impl Params {
    fn apply(&self, cfg: &mut RunConfig) {
        for (key, v) in [
            ("f", &self.f),
            ("grid", &self.grid),
            ("a", &self.a),
            ("c", &self.c),
            ("eps", &self.eps),
            ("delta", &self.delta),
            ("n", &self.n),
            ("k", &self.k),
            ("u", &self.u),
            ("alpha", &self.alpha),
            ("sector", &self.sector),
            ("fixture", &self.fixture),
            ("lattice", &self.lattice),
            ("order", &self.order),
            ("samples", &self.samples),
            ("seed", &self.seed),
            ("tol", &self.tol),
            ("radius", &self.radius),
        ] {
            cfg.set(key, v);
        }
        cfg.set_list("target", &self.target);
    }
}

/// Failure of a command, mapped to an exit code.
enum Failure {
    Nev(NevError),
    Io(String),
}

impl From<NevError> for Failure {
    fn from(e: NevError) -> Self {
        Failure::Nev(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(p, text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn write_report(dir: &Path, stem: &str, rep: &CheckReport) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(format!("{stem}.json")), rep.to_json())?;
    std::fs::write(dir.join(format!("{stem}.tsv")), rep.plot_tsv())?;
    Ok(())
}

fn grid_or_default(cfg: &RunConfig) -> Result<GridSpec, NevError> {
    Ok(cfg.grid()?.unwrap_or(GridSpec::parse(DEFAULT_GRID)?))
}

fn singularities_csv(cfg: &RunConfig) -> Result<String, NevError> {
    // `pole` is not a complex value, so the target is read here and not by `check_config`.
    let mut rest = cfg.clone();
    rest.clear("target");
    let f = rest.check_config()?.function()?;
    let target = match cfg.list("target") {
        [] => Target::Value(nevlab::C64::new(0.0, 0.0)),
        [t] if t.eq_ignore_ascii_case("pole") => Target::Pole,
        [t] => Target::Value(parse_complex(t)?),
        _ => return Err(NevError::InvalidParameter("singularities takes one target".into())),
    };
    let radius = cfg.radius()?.unwrap_or(10.0);
    let points = locate_points(&f, target, DiskSpec::new(radius)?)?;
    let mut out = String::from("kind,re,im,modulus,order,provenance\n");
    for p in points {
        let kind = match p.kind {
            Kind::Pole => "pole".to_string(),
            Kind::ZeroOf(a) => format!("value {}", fmt_complex(a)),
        };
        out.push_str(&format!(
            "{kind},{:.15e},{:.15e},{:.15e},{},{:?}\n",
            p.location.re,
            p.location.im,
            p.location.norm(),
            p.order,
            p.provenance
        ));
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::parse(
            &std::fs::read_to_string(p)
                .map_err(|e| NevError::InvalidParameter(format!("cannot read config {}: {e}", p.display())))?,
        )?,
        None => RunConfig::default(),
    };
    cfg.set("workers", &cli.workers);
    let workers = match cfg.workers()? {
        Some(w) => w,
        None => match std::env::var("NEV_LAB_WORKERS") {
            Ok(s) => s
                .trim()
                .parse()
                .map_err(|_| NevError::InvalidParameter(format!("NEV_LAB_WORKERS: '{s}' is not a count")))?,
            Err(_) => 0,
        },
    };
    let out: Option<PathBuf> = cli.out.clone().or_else(|| cfg.get("out").map(PathBuf::from));
    let pool = worker_pool(workers)?;
    match &cli.command {
        Command::Functionals(p) => {
            p.apply(&mut cfg);
            let check = cfg.check_config()?;
            let f = check.function()?;
            let grid = grid_or_default(&cfg)?;
            let samples =
                pool.install(|| Profile::new(&f, &check.targets, grid.r_max())?.sample_grid(&grid.radii(), check.tol))?;
            write_or_print(out.as_deref(), &samples_csv(&samples))?;
            Ok(0)
        }
        Command::Singularities(p) => {
            p.apply(&mut cfg);
            let csv = pool.install(|| singularities_csv(&cfg))?;
            write_or_print(out.as_deref(), &csv)?;
            Ok(0)
        }
        Command::Growth(p) => {
            p.apply(&mut cfg);
            let check = cfg.check_config()?;
            let f = check.function()?;
            let grid = grid_or_default(&cfg)?;
            let rep = pool.install(|| -> Result<_, NevError> {
                let samples = Profile::new(&f, &check.targets, grid.r_max())?.sample_grid(&grid.radii(), check.tol)?;
                growth_report(check.f.as_deref().unwrap_or_default(), &samples, &check.targets)
            })?;
            let json = serde_json::to_string_pretty(&rep).map_err(|e| Failure::Io(e.to_string()))?;
            write_or_print(out.as_deref(), &(json + "\n"))?;
            Ok(0)
        }
        Command::Verify { name, params } => {
            params.apply(&mut cfg);
            let check = cfg.check_config()?;
            let rep = pool.install(|| run_check(name, &check))?;
            let dir = out.unwrap_or_else(|| PathBuf::from("."));
            write_report(&dir, name, &rep)?;
            println!(
                "{name}: {} (margin {:.6})",
                serde_json::to_value(rep.verdict)
                    .map(|v| v.to_string())
                    .unwrap_or_default()
                    .trim_matches('"'),
                rep.margin
            );
            for n in &rep.notes {
                println!("  note: {n}");
            }
            Ok(rep.verdict.exit_code() as u8)
        }
        Command::Suite { only } => {
            cfg.set_list("only", only);
            let tags: Vec<String> = cfg.list("only").to_vec();
            let outcomes = run_suite(&tags, workers)?;
            let dir = out.unwrap_or_else(|| PathBuf::from("suite-out"));
            std::fs::create_dir_all(&dir)?;
            for o in &outcomes {
                if let Some(rep) = &o.report {
                    write_report(&dir, &o.id, rep)?;
                }
                let verdict = match o.verdict() {
                    Some(v) => serde_json::to_value(v).map(|v| v.to_string()).unwrap_or_default(),
                    None => format!("error: {}", o.error.clone().unwrap_or_default()),
                };
                println!(
                    "{:<8} {:<30} {}",
                    if o.matched() { "ok" } else { "MISMATCH" },
                    o.id,
                    verdict.trim_matches('"')
                );
            }
            let index = SuiteIndex::new(&outcomes);
            std::fs::write(dir.join("index.json"), index.to_json())?;
            Ok(if index.all_matched { 0 } else { EXIT_FAIL })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USER } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Nev(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_user_error() { EXIT_USER } else { EXIT_NUMERIC })
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_NUMERIC)
        }
    }
}
