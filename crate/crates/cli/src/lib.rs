//! The `carnot` command-line front end.
//!
//! Subcommands: `verify`, `flow`, `integrate`, `capacity`, `emit-group`
//! and `kaplan`. Exit codes: 0 on success, 1 when a verification fails or
//! a computation errors, 2 on usage or configuration errors.

pub mod config;
pub mod plot;

use std::io::Write;
use std::path::{Path, PathBuf};

use carnot_polar::capacity::{ring_capacity, CapacityMethod, RingSpec};
use carnot_polar::field::ScalarField;
use carnot_polar::flow::closed_tangent;
use carnot_polar::group::{resolve, GroupFile, GroupSpec};
use carnot_polar::integrate::{catalog_integrand, IntegrationJob, Method, PolarSystem};
use carnot_polar::norms::{derive_kaplan_constant, HomNorm, KAPLAN_SEED, KAPLAN_TOL};
use carnot_polar::verify::{sample_cloud, verify, Condition, SamplingConfig, Tolerances};
use clap::{Args, Parser, Subcommand};

use crate::config::{materialize_seed, RunConfig};
use crate::plot::{curves_csv, curves_svg, Curve, Projection};

#[derive(Debug, Parser)]
#[command(name = "carnot", version, about = "Polar coordinates and p-Laplacians on Carnot groups")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, env = config::CONFIG_ENV)]
    pub config: Option<PathBuf>,
    /// More log output on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GroupArg {
    /// Built-in group name or path to a group file.
    #[arg(long)]
    pub group: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Residual checks of conditions (i), (ii), (iii).
    Verify {
        #[command(flatten)]
        group: GroupArg,
        #[arg(long, default_value = "i,ii,iii")]
        conditions: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1000)]
        points: usize,
        /// Curves used by the flow checks.
        #[arg(long, default_value_t = 100)]
        curves: usize,
        /// Sets every pass tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Overrides one tolerance, as `key=value`.
        #[arg(long = "tol-key", value_name = "KEY=VALUE")]
        tol_key: Vec<String>,
        /// Adds wall-clock seconds per condition (breaks byte-identity).
        #[arg(long)]
        timing: bool,
        /// Also write the report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Samples horizontal polar curves. CSV columns:
    /// `curve, a_1..a_n, s, g_1..g_n, N, speed`.
    Flow {
        #[command(flatten)]
        group: GroupArg,
        #[arg(long, default_value_t = 8)]
        curves: usize,
        #[arg(long, default_value_t = 0.1)]
        s_min: f64,
        #[arg(long, default_value_t = 10.0)]
        s_max: f64,
        /// Samples per curve, log-spaced in s.
        #[arg(long, default_value_t = 64)]
        steps: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// CSV output path; without it CSV goes to stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        /// `x1x2` or `rt`.
        #[arg(long, default_value = "x1x2")]
        projection: String,
    },
    /// Integrates a catalog integrand. CSV columns:
    /// `group, integrand, method, value, error_estimate, seed, evaluations`.
    Integrate {
        #[command(flatten)]
        group: GroupArg,
        /// polar-horizontal, polar-dilation, polar-arclength, ambient-tensor, ambient-mc.
        #[arg(long, default_value = "polar-horizontal")]
        method: String,
        #[arg(long, default_value = "gauss-quartic")]
        integrand: String,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// p-capacity of the ring `{a < N < b}`.
    Capacity {
        #[command(flatten)]
        group: GroupArg,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long, default_value_t = 2.0)]
        b: f64,
        /// `polar` or `closed`.
        #[arg(long, default_value = "polar")]
        method: String,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Prints a group as a TOML group file.
    EmitGroup {
        #[command(flatten)]
        group: GroupArg,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Derives the constant `c` of `(|x|⁴ + c|z|²)^{1/4}`.
    Kaplan {
        #[command(flatten)]
        group: GroupArg,
        #[arg(long)]
        seed: Option<u64>,
    },
}

/// Exit code and message.
#[derive(Debug)]
struct Failure(i32, String);

fn usage(msg: impl Into<String>) -> Failure {
    Failure(2, msg.into())
}

fn failed(msg: impl ToString) -> Failure {
    Failure(1, msg.to_string())
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure(1, format!("cannot write {}: {e}", path.display()))
}

fn init_logging(verbose: u8, config: &RunConfig) {
    let level = match (verbose, config.verbosity.as_deref()) {
        (0, Some(v)) => v.to_string(),
        (0, None) => "warn".into(),
        (1, _) => "info".into(),
        _ => "debug".into(),
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .try_init();
}

fn group_spec(arg: &GroupArg, config: &RunConfig) -> Result<GroupSpec, Failure> {
    let selector = arg.group.clone().or_else(|| config.group.clone()).unwrap_or_else(|| "heis1".into());
    resolve(&selector).map_err(|e| usage(e.to_string()))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| io_failure(path, e))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes()).map_err(|e| failed(format!("stdout: {e}")))
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the exit code. Regular output goes to `out`, diagnostics to
/// stderr.
pub fn run<I, T>(argv: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    eprint!("{e}");
                    2
                }
            };
        }
    };
    let config = match RunConfig::discover(cli.config.as_deref()) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 2;
        }
    };
    init_logging(cli.verbose, &config);
    match dispatch(cli.command, &config, out) {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            code
        }
    }
}

fn dispatch(command: Command, config: &RunConfig, out: &mut dyn Write) -> Result<i32, Failure> {
    match command {
        Command::Verify { group, conditions, seed, points, curves, tol, tol_key, timing, report } => {
            let spec = group_spec(&group, config)?;
            let conditions = Condition::parse_list(&conditions).map_err(|e| usage(e.to_string()))?;
            let mut tolerances = Tolerances::default();
            if let Some(t) = tol {
                tolerances.set_all(t).map_err(|e| usage(e.to_string()))?;
            }
            for (k, v) in &config.tolerances {
                tolerances.set(k, *v).map_err(|e| usage(e.to_string()))?;
            }
            for kv in &tol_key {
                let (k, v) = kv.split_once('=').ok_or_else(|| usage(format!("--tol-key expects KEY=VALUE, got `{kv}`")))?;
                let v: f64 = v.trim().parse().map_err(|_| usage(format!("bad tolerance value in `{kv}`")))?;
                tolerances.set(k.trim(), v).map_err(|e| usage(e.to_string()))?;
            }
            let seed = materialize_seed(seed, config);
            let cfg = SamplingConfig { points, seed, curves, ..Default::default() };
            log::info!("verifying {} with {} points, seed {seed}", spec.name(), points);
            let r = verify(&spec, &conditions, &cfg, &tolerances, timing).map_err(failed)?;
            let text = r.render();
            emit(out, &text)?;
            if let Some(p) = report.as_ref().or(config.output.report.as_ref()) {
                write_file(p, &text)?;
            }
            Ok(if r.passed() { 0 } else { 1 })
        }
        Command::Flow { group, curves, s_min, s_max, steps, seed, csv, svg, projection } => {
            let spec = group_spec(&group, config)?;
            let projection = Projection::parse(&projection).map_err(usage)?;
            if !(s_min > 0.0 && s_max > s_min) || steps < 2 || curves == 0 {
                return Err(usage("need 0 < s-min < s-max, steps >= 2 and curves >= 1"));
            }
            let seed = materialize_seed(seed, config);
            let norm = HomNorm::folland(&spec).map_err(|e| usage(e.to_string()))?;
            let system = PolarSystem::new(&norm).map_err(failed)?;
            let lines = sample_curves(&system, curves, seed, s_min, s_max, steps).map_err(failed)?;
            if let Some(p) = svg.as_ref().or(config.output.svg.as_ref()) {
                write_file(p, &curves_svg(&lines, spec.horizontal_dim(), projection))?;
            }
            let csv_text = curves_csv(&lines);
            match csv.as_ref().or(config.output.csv.as_ref()) {
                Some(p) => write_file(p, &csv_text)?,
                None => emit(out, &csv_text)?,
            }
            Ok(0)
        }
        Command::Integrate { group, method, integrand, samples, seed, tol, csv } => {
            let spec = group_spec(&group, config)?;
            let norm = HomNorm::folland(&spec).map_err(|e| usage(e.to_string()))?;
            let seed = if matches!(method.as_str(), "ambient-mc" | "mc") { Some(materialize_seed(seed, config)) } else { seed };
            let method = Method::parse(&method, samples, seed.unwrap_or(0)).map_err(|e| usage(e.to_string()))?;
            let ig = catalog_integrand(&integrand, &norm).map_err(|e| usage(e.to_string()))?;
            let system = PolarSystem::new(&norm).map_err(failed)?;
            let r = system.integrate(&IntegrationJob::new(ig, method).with_tol(tol)).map_err(failed)?;
            let seed_text = r.seed.map_or("none".to_string(), |s| s.to_string());
            let text = format!(
                "[integrate]\ngroup = {}\nintegrand = {integrand}\nmethod = {}\nvalue = {:.12e}\nerror_estimate = {:.6e}\ntol = {tol:.6e}\nseed = {seed_text}\nevaluations = {}\n",
                spec.name(),
                r.method,
                r.value,
                r.error_estimate,
                r.evaluations
            );
            emit(out, &text)?;
            if let Some(p) = csv.as_ref().or(config.output.csv.as_ref()) {
                let row = format!(
                    "group,integrand,method,value,error_estimate,seed,evaluations\n{},{integrand},{},{:.12e},{:.6e},{seed_text},{}\n",
                    spec.name(),
                    r.method,
                    r.value,
                    r.error_estimate,
                    r.evaluations
                );
                write_file(p, &row)?;
            }
            Ok(0)
        }
        Command::Capacity { group, p, a, b, method, tol } => {
            let spec = group_spec(&group, config)?;
            let ring = RingSpec::new(a, b, p).map_err(|e| usage(e.to_string()))?;
            let m = match method.as_str() {
                "polar" => CapacityMethod::Polar,
                "closed" => CapacityMethod::Closed,
                other => return Err(usage(format!("unknown capacity method `{other}`; expected polar or closed"))),
            };
            let norm = HomNorm::folland(&spec).map_err(|e| usage(e.to_string()))?;
            let system = PolarSystem::new(&norm).map_err(failed)?;
            let c = ring_capacity(&system, &ring, m, tol).map_err(failed)?;
            emit(
                out,
                &format!(
                    "[capacity]\ngroup = {}\np = {p}\na = {a}\nb = {b}\nmethod = {method}\nvalue = {c:.12e}\ntol = {tol:.6e}\n",
                    spec.name()
                ),
            )?;
            Ok(0)
        }
        Command::EmitGroup { group, output } => {
            let spec = group_spec(&group, config)?;
            let text = GroupFile::from_spec(&spec).to_toml();
            match output {
                Some(p) => write_file(&p, &text)?,
                None => emit(out, &text)?,
            }
            Ok(0)
        }
        Command::Kaplan { group, seed } => {
            let spec = group_spec(&group, config)?;
            let seed = seed.or(config.seed).unwrap_or(KAPLAN_SEED);
            let fit = derive_kaplan_constant(&spec, seed).map_err(failed)?;
            emit(
                out,
                &format!(
                    "[kaplan]\ngroup = {}\nc = {:.15e}\nmax_residual = {:.6e}\ntol = {KAPLAN_TOL:.6e}\nsamples = {}\nseed = {}\n",
                    spec.name(),
                    fit.c,
                    fit.max_residual,
                    fit.samples,
                    fit.seed
                ),
            )?;
            Ok(0)
        }
    }
}

/// Curves from the first `count` points of the seeded sphere sample.
fn sample_curves(
    system: &PolarSystem,
    count: usize,
    seed: u64,
    s_min: f64,
    s_max: f64,
    steps: usize,
) -> carnot_polar::Result<Vec<Curve>> {
    let cloud = sample_cloud(system, &SamplingConfig { points: count, seed, ..Default::default() })?;
    let s: Vec<f64> =
        (0..steps).map(|i| (s_min.ln() + (s_max / s_min).ln() * i as f64 / (steps - 1) as f64).exp()).collect();
    let flow = system.flow();
    let m = system.spec().horizontal_dim();
    cloud
        .samples
        .iter()
        .map(|smp| {
            let traj = flow.trajectory(&smp.a, &s)?;
            let rows = traj
                .into_iter()
                .zip(&s)
                .map(|(g, &si)| {
                    let t = match closed_tangent(flow, &smp.a, si) {
                        Some(t) => t,
                        None => flow.tangent(&g, si)?,
                    };
                    let speed = t[..m].iter().map(|v| v * v).sum::<f64>().sqrt();
                    let n = system.norm().value(&g)?;
                    Ok((si, g.0, n, speed))
                })
                .collect::<carnot_polar::Result<_>>()?;
            Ok(Curve { a: smp.a.clone(), rows })
        })
        .collect()
}

