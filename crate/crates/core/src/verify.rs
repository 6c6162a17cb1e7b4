//! Residual suites for the three descriptions of polarizable groups.
//!
//! * (i) `L_∞N = 0` off the identity;
//! * (ii) `L_p u_p = 0` for the whole family `u_p`;
//! * (iii) horizontal polar coordinates: flow invariants, the identities
//!   behind the integration formula, and agreement between integration
//!   formulas.
//!
//! Points are drawn from a shifted Halton sequence in (chart × radius) and
//! dilated onto `{N ∈ [n_lo, n_hi]}`. All reductions keep a fixed order, so
//! a report is reproducible from (group, seed, tolerances).

use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{GenericField, ScalarField};
use crate::flow::{closed_tangent, heisenberg_flow_closed, horizontality_defect, FlowEngine};
use crate::group::{dilate_generic, GroupSpec, Point};
use crate::horizontal::HorizontalJet;
use crate::integrate::{catalog_integrand, IntegrationJob, Method, PolarSystem};
use crate::jet::Dual;
use crate::norms::{HomNorm, SingularSolution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Condition {
    I,
    II,
    III,
}

impl Condition {
    pub fn name(&self) -> &'static str {
        match self {
            Condition::I => "i",
            Condition::II => "ii",
            Condition::III => "iii",
        }
    }

    /// Parses a comma-separated list such as `i,ii,iii`.
    pub fn parse_list(text: &str) -> Result<Vec<Condition>> {
        let mut out = Vec::new();
        for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let c = match part {
                "i" | "1" => Condition::I,
                "ii" | "2" => Condition::II,
                "iii" | "3" => Condition::III,
                other => return Err(Error::Parse(format!("unknown condition `{other}`"))),
            };
            if !out.contains(&c) {
                out.push(c);
            }
        }
        if out.is_empty() {
            return Err(Error::Parse("no conditions given".into()));
        }
        out.sort();
        Ok(out)
    }
}

/// Pass thresholds, keyed as in the report.
#[derive(Clone, Debug, PartialEq)]
pub struct Tolerances {
    entries: Vec<(&'static str, f64)>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            entries: vec![
                ("i", 1e-8),
                ("ii", 1e-7),
                ("ii.p2", 1e-9),
                ("iii.ode_closed", 1e-8),
                ("iii.on_sphere", 1e-9),
                ("iii.collinearity", 1e-9),
                ("iii.horizontality", 1e-9),
                ("iii.speed", 1e-9),
                ("iii.semigroup", 1e-8),
                ("iii.arclength", 1e-9),
                ("iii.div_identity", 1e-7),
                ("iii.sublaplacian_identity", 1e-9),
                ("iii.jacobian", 1e-6),
                ("iii.density_spread", 1e-6),
                ("iii.quadrature", 1e-6),
            ],
        }
    }
}

impl Tolerances {
    pub fn get(&self, key: &str) -> f64 {
        self.entries.iter().find(|(k, _)| *k == key).map(|(_, v)| *v).expect("known tolerance key")
    }

    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        if !(value > 0.0) {
            return Err(Error::OutOfRange(format!("tolerance {key} = {value} must be positive")));
        }
        match self.entries.iter_mut().find(|(k, _)| *k == key) {
            Some(e) => {
                e.1 = value;
                Ok(())
            }
            None => Err(Error::Parse(format!("unknown tolerance key `{key}`"))),
        }
    }

    /// Sets every tolerance to `value`.
    pub fn set_all(&mut self, value: f64) -> Result<()> {
        let keys: Vec<&'static str> = self.entries.iter().map(|e| e.0).collect();
        keys.into_iter().try_for_each(|k| self.set(k, value))
    }

    pub fn entries(&self) -> &[(&'static str, f64)] {
        &self.entries
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SamplingConfig {
    pub points: usize,
    pub seed: u64,
    pub n_range: (f64, f64),
    pub min_grad: f64,
    /// Curves used by the flow checks of condition (iii).
    pub curves: usize,
    /// Exponents for condition (ii); `None` means `{1.5, 2, 3, Q, 10, ∞}`.
    pub p_values: Option<Vec<f64>>,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig { points: 1000, seed: 0, n_range: (0.5, 2.0), min_grad: 0.1, curves: 100, p_values: None }
    }
}

/// One sampled point: chart parameter, sphere point, radius and the point
/// `δ_s(a)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub xi: Vec<f64>,
    pub a: Vec<f64>,
    pub s: f64,
    pub g: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cloud {
    pub samples: Vec<Sample>,
    pub attempted: usize,
    pub excluded: usize,
}

impl Cloud {
    pub fn excluded_fraction(&self) -> f64 {
        if self.attempted == 0 {
            0.0
        } else {
            self.excluded as f64 / self.attempted as f64
        }
    }
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

fn hgrad_norm(spec: &GroupSpec, f: &dyn ScalarField, g: &[f64]) -> Result<f64> {
    let d = f.dual_at(g)?;
    Ok(crate::group::frame_generic(spec, g)
        .iter()
        .map(|c| c.iter().zip(&d.grad).map(|(a, b)| a * b).sum::<f64>().powi(2))
        .sum::<f64>()
        .sqrt())
}

/// Shifted Halton points in (chart × radius), keeping those with
/// `|∇_0N| ≥ min_grad`.
pub fn sample_cloud(system: &PolarSystem, cfg: &SamplingConfig) -> Result<Cloud> {
    let chart = system.chart();
    let dims = chart.param_dim() + 1;
    if dims > PRIMES.len() {
        return Err(Error::Unsupported(format!("sampling in {dims} dimensions")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let shift: Vec<f64> = (0..dims).map(|_| rng.gen::<f64>()).collect();
    let spec = system.spec();
    let (lo, hi) = cfg.n_range;
    let mut samples = Vec::with_capacity(cfg.points);
    let mut attempted = 0;
    let mut excluded = 0;
    let mut i = 0u64;
    while samples.len() < cfg.points {
        if attempted >= 50 * cfg.points.max(1) {
            return Err(Error::InvalidSpec(format!(
                "only {} of {} points satisfy |grad N| >= {}",
                samples.len(),
                cfg.points,
                cfg.min_grad
            )));
        }
        i += 1;
        attempted += 1;
        let u: Vec<f64> = (0..dims).map(|j| (radical_inverse(i, PRIMES[j]) + shift[j]).fract()).collect();
        let xi: Vec<f64> =
            chart.domain().iter().zip(&u).map(|((a, b), t)| a + t * (b - a)).collect();
        let s = lo + u[dims - 1] * (hi - lo);
        let a = chart.point(&xi)?;
        let g = dilate_generic(spec, s, &a);
        if hgrad_norm(spec, system.norm(), &g)? < cfg.min_grad {
            excluded += 1;
            continue;
        }
        samples.push(Sample { xi, a, s, g });
    }
    Ok(Cloud { samples, attempted, excluded })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidualStats {
    pub max: f64,
    pub median: f64,
    pub samples: usize,
}

impl ResidualStats {
    /// NaN residuals propagate to `max`, which then fails every threshold.
    pub fn from_values(values: &[f64]) -> Self {
        if values.is_empty() {
            return ResidualStats { max: f64::NAN, median: f64::NAN, samples: 0 };
        }
        let mut v = values.to_vec();
        let max = if v.iter().any(|x| x.is_nan()) { f64::NAN } else { v.iter().copied().fold(0.0, f64::max) };
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) };
        ResidualStats { max, median, samples: n }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Status {
    Pass,
    Fail,
    Skipped(String),
}

impl Status {
    fn label(&self) -> &str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped(_) => "skipped",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub key: String,
    /// Module that computed the residuals.
    pub module: &'static str,
    pub statistic: String,
    pub stats: Option<ResidualStats>,
    pub tol: f64,
    pub status: Status,
}

impl CheckResult {
    fn evaluated(key: &str, module: &'static str, statistic: &str, values: &[f64], tol: f64) -> Self {
        let stats = ResidualStats::from_values(values);
        let status = if stats.max <= tol { Status::Pass } else { Status::Fail };
        CheckResult { key: key.into(), module, statistic: statistic.into(), stats: Some(stats), tol, status }
    }

    fn skipped(key: &str, module: &'static str, statistic: &str, tol: f64, reason: &str) -> Self {
        CheckResult {
            key: key.into(),
            module,
            statistic: statistic.into(),
            stats: None,
            tol,
            status: Status::Skipped(reason.into()),
        }
    }

    fn failed(key: &str, module: &'static str, statistic: &str, tol: f64, err: &Error) -> Self {
        CheckResult {
            key: key.into(),
            module,
            statistic: format!("{statistic} (error: {err})"),
            stats: None,
            tol,
            status: Status::Fail,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionReport {
    pub condition: Condition,
    pub checks: Vec<CheckResult>,
    pub seconds: Option<f64>,
}

impl ConditionReport {
    pub fn passed(&self) -> bool {
        let mut any = false;
        for c in &self.checks {
            match c.status {
                Status::Fail => return false,
                Status::Pass => any = true,
                Status::Skipped(_) => {}
            }
        }
        any
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub group: String,
    pub dim: usize,
    pub hom_dimension: usize,
    pub norm: String,
    pub engine: String,
    pub seed: u64,
    pub config: SamplingConfig,
    pub points: usize,
    pub attempted: usize,
    pub excluded: usize,
    pub tolerances: Tolerances,
    pub conditions: Vec<ConditionReport>,
}

fn num(v: f64) -> String {
    format!("{v:.6e}")
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.conditions.iter().all(ConditionReport::passed)
    }

    pub fn check(&self, key: &str) -> Option<&CheckResult> {
        self.conditions.iter().flat_map(|c| &c.checks).find(|c| c.key == key)
    }

    /// Flat key/value text with section headers. Timing lines appear only
    /// if the report was built with timing enabled.
    pub fn render(&self) -> String {
        let mut o = String::new();
        let _ = writeln!(o, "# carnot verification report");
        let _ = writeln!(o, "[run]");
        let _ = writeln!(o, "group = {}", self.group);
        let _ = writeln!(o, "dimension = {}", self.dim);
        let _ = writeln!(o, "hom_dimension = {}", self.hom_dimension);
        let _ = writeln!(o, "norm = {}", self.norm);
        let _ = writeln!(o, "flow_engine = {}", self.engine);
        let _ = writeln!(o, "seed = {}", self.seed);
        let _ = writeln!(o, "sampling = shifted-halton");
        let _ = writeln!(o, "sampling.n_min = {}", num(self.config.n_range.0));
        let _ = writeln!(o, "sampling.n_max = {}", num(self.config.n_range.1));
        let _ = writeln!(o, "sampling.min_grad = {}", num(self.config.min_grad));
        let _ = writeln!(o, "sampling.points = {}", self.points);
        let _ = writeln!(o, "sampling.attempted = {}", self.attempted);
        let _ = writeln!(o, "sampling.excluded = {}", self.excluded);
        let frac = if self.attempted == 0 { 0.0 } else { self.excluded as f64 / self.attempted as f64 };
        let _ = writeln!(o, "sampling.excluded_fraction = {}", num(frac));
        let _ = writeln!(o, "sampling.curves = {}", self.config.curves);
        for c in &self.conditions {
            let _ = writeln!(o);
            let _ = writeln!(o, "[condition.{}]", c.condition.name());
            for ch in &c.checks {
                let k = &ch.key;
                let _ = writeln!(o, "{k}.module = {}", ch.module);
                let _ = writeln!(o, "{k}.statistic = {}", ch.statistic);
                if let Some(s) = &ch.stats {
                    let _ = writeln!(o, "{k}.max = {}", num(s.max));
                    let _ = writeln!(o, "{k}.median = {}", num(s.median));
                    let _ = writeln!(o, "{k}.samples = {}", s.samples);
                }
                let _ = writeln!(o, "{k}.tol = {}", num(ch.tol));
                let _ = writeln!(o, "{k}.verdict = {}", ch.status.label());
                if let Status::Skipped(reason) = &ch.status {
                    let _ = writeln!(o, "{k}.reason = {reason}");
                }
            }
            if let Some(t) = c.seconds {
                let _ = writeln!(o, "timing.seconds = {t:.3}");
            }
            let _ = writeln!(o, "verdict = {}", if c.passed() { "pass" } else { "fail" });
        }
        let _ = writeln!(o);
        let _ = writeln!(o, "[verdict]");
        for c in &self.conditions {
            let _ = writeln!(o, "{} = {}", c.condition.name(), if c.passed() { "pass" } else { "fail" });
        }
        let _ = writeln!(o, "overall = {}", if self.passed() { "pass" } else { "fail" });
        o
    }
}

/// Scaled `∞`-Laplacian residual `N |L_∞N| / |∇_0N|⁴` at each point.
pub fn condition_i_residuals(norm: &HomNorm, points: &[Vec<f64>]) -> Result<Vec<f64>> {
    let spec = norm.spec();
    points
        .par_iter()
        .map(|g| {
            let hj = HorizontalJet::new(spec, norm, g)?;
            let h = hj.hgrad_norm_sq().value;
            Ok(hj.jet.value * hj.infty_laplacian().abs() / (h * h))
        })
        .collect()
}

/// Scaled residual `N |L_p u_p| / |∇_0u_p|^{p−1}` at each point.
pub fn condition_ii_residuals(norm: &HomNorm, p: f64, points: &[Vec<f64>]) -> Result<Vec<f64>> {
    if p.is_infinite() {
        return condition_i_residuals(norm, points);
    }
    let spec = norm.spec();
    let u = SingularSolution::new(norm, p)?;
    points
        .par_iter()
        .map(|g| {
            let hj = HorizontalJet::new(spec, &u, g)?;
            let lp = hj.p_laplacian(p)?;
            Ok(norm.value(g)? * lp.abs() / hj.hgrad_norm().powf(p - 1.0))
        })
        .collect()
}

/// `|div_0(N ∇_0N / |∇_0N|²) − Q| / Q`.
pub fn div_identity_residuals(norm: &HomNorm, points: &[Vec<f64>]) -> Result<Vec<f64>> {
    let spec = norm.spec();
    let q = spec.hom_dimension() as f64;
    points
        .par_iter()
        .map(|g| {
            let hj = HorizontalJet::new(spec, norm, g)?;
            let n = hj.jet.to_dual();
            let h = hj.hgrad_norm_sq();
            let comps: Vec<Dual> = hj.xgrad.iter().map(|a| n.clone() * a.clone() / h.clone()).collect();
            Ok((hj.div(&comps) - q).abs() / q)
        })
        .collect()
}

/// `N |LN − (Q−1)|∇_0N|²/N| / |∇_0N|²`.
pub fn sublaplacian_identity_residuals(norm: &HomNorm, points: &[Vec<f64>]) -> Result<Vec<f64>> {
    let spec = norm.spec();
    let q = spec.hom_dimension() as f64;
    points
        .par_iter()
        .map(|g| {
            let hj = HorizontalJet::new(spec, norm, g)?;
            let n = hj.jet.value;
            let h = hj.hgrad_norm_sq().value;
            Ok(n * (hj.sublaplacian() - (q - 1.0) * h / n).abs() / h)
        })
        .collect()
}

/// Default exponents for condition (ii), deduplicated.
pub fn default_p_values(q: f64) -> Vec<f64> {
    let mut v: Vec<f64> = Vec::new();
    for p in [1.5, 2.0, 3.0, q, 10.0, f64::INFINITY] {
        if !v.iter().any(|x| *x == p) {
            v.push(p);
        }
    }
    v
}

fn p_key(p: f64) -> String {
    if p.is_infinite() {
        "ii.p=inf".into()
    } else {
        format!("ii.p={p}")
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| (lo.ln() + (hi / lo).ln() * i as f64 / (n - 1) as f64).exp()).collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Gathers per-curve residual vectors, turning an error into a failed check.
fn run_check<F>(key: &str, module: &'static str, statistic: &str, tol: f64, f: F) -> CheckResult
where
    F: FnOnce() -> Result<Vec<f64>>,
{
    match f() {
        Ok(v) => CheckResult::evaluated(key, module, statistic, &v, tol),
        Err(e) => CheckResult::failed(key, module, statistic, tol, &e),
    }
}

fn flatten(v: Result<Vec<Vec<f64>>>) -> Result<Vec<f64>> {
    Ok(v?.into_iter().flatten().collect())
}

fn condition_iii(system: &PolarSystem, cloud: &Cloud, cfg: &SamplingConfig, tol: &Tolerances) -> Vec<CheckResult> {
    let norm = system.norm();
    let spec = system.spec();
    let flow = system.flow();
    let m = spec.horizontal_dim();
    let q = spec.hom_dimension() as f64;
    let closed = flow.engine().has_closed_form();
    let n_curves = cfg.curves.min(cloud.samples.len());
    // ODE-only engines get a smaller share of the cloud for the costlier checks
    let n_light = if closed { n_curves } else { n_curves.min(20) };
    let starts: Vec<&Sample> = cloud.samples.iter().take(n_curves).collect();
    let light: Vec<&Sample> = starts.iter().take(n_light).copied().collect();
    let heavy: Vec<&Sample> = starts.iter().take(n_curves.min(10)).copied().collect();
    let mut out = Vec::new();

    let key = "iii.ode_closed";
    let stat = "sup_s |phi_ode(s,a) - phi_closed(s,a)|, s in [0.1,10]";
    out.push(match flow.engine() {
        FlowEngine::Ode => CheckResult::skipped(key, "flow", stat, tol.get(key), "no closed-form flow for this group"),
        engine => {
            let ode = flow.clone().with_engine(FlowEngine::Ode);
            let s = log_grid(0.1, 10.0, 21);
            run_check(key, "flow", stat, tol.get(key), || {
                flatten(
                    starts
                        .par_iter()
                        .map(|smp| {
                            let traj = ode.trajectory(&smp.a, &s)?;
                            traj.iter()
                                .zip(&s)
                                .map(|(p, &si)| {
                                    let c = match engine {
                                        FlowEngine::HeisenbergClosed { n } => {
                                            heisenberg_flow_closed(n, &Point(smp.a.clone()), si)?.0
                                        }
                                        _ => flow.flow(&smp.a, si)?.0,
                                    };
                                    Ok(dist(p, &c))
                                })
                                .collect()
                        })
                        .collect(),
                )
            })
        }
    });

    let s_on = [0.1, 0.5, 2.0, 10.0];
    let key = "iii.on_sphere";
    out.push(run_check(key, "flow", "|N(gamma_a(s)) - s|/s", tol.get(key), || {
        flatten(
            light
                .par_iter()
                .map(|smp| {
                    let traj = flow.trajectory(&smp.a, &s_on)?;
                    traj.iter().zip(&s_on).map(|(p, s)| Ok((norm.value(p)? - s).abs() / s)).collect()
                })
                .collect(),
        )
    }));

    let s_mid = [0.5, 1.0, 2.0];
    let tangents = |smp: &Sample| -> Result<Vec<(Vec<f64>, Vec<f64>, f64)>> {
        let traj = flow.trajectory(&smp.a, &s_mid)?;
        traj.into_iter()
            .zip(s_mid)
            .map(|(p, s)| {
                let t = match closed_tangent(flow, &smp.a, s) {
                    Some(t) => t,
                    None => flow.tangent(&p, s)?,
                };
                Ok((p.0, t, s))
            })
            .collect()
    };
    let key = "iii.collinearity";
    out.push(run_check(key, "flow", "sin angle(horizontal dgamma/ds, grad_0 N)", tol.get(key), || {
        flatten(
            light
                .par_iter()
                .map(|smp| {
                    tangents(smp)?
                        .into_iter()
                        .map(|(p, t, _)| {
                            let d = norm.dual_at(&p)?;
                            let gn: Vec<f64> = crate::group::frame_generic(spec, &p)
                                .iter()
                                .map(|c| c.iter().zip(&d.grad).map(|(a, b)| a * b).sum())
                                .collect();
                            let nv = t[..m].iter().map(|v| v * v).sum::<f64>().sqrt();
                            let ng = gn.iter().map(|v| v * v).sum::<f64>().sqrt();
                            let cos: f64 = t[..m].iter().zip(&gn).map(|(a, b)| a * b).sum::<f64>() / (nv * ng);
                            let sin = t[..m]
                                .iter()
                                .zip(&gn)
                                .map(|(a, b)| (a / nv - cos * b / ng).powi(2))
                                .sum::<f64>()
                                .sqrt();
                            Ok(sin)
                        })
                        .collect()
                })
                .collect(),
        )
    }));
    let key = "iii.horizontality";
    out.push(run_check(key, "flow", "|dgamma/ds - sum_i (dgamma/ds)_i X_i| / |dgamma/ds|", tol.get(key), || {
        flatten(
            light
                .par_iter()
                .map(|smp| {
                    tangents(smp)?
                        .into_iter()
                        .map(|(p, t, _)| {
                            let n = t.iter().map(|v| v * v).sum::<f64>().sqrt();
                            Ok(horizontality_defect(spec, &p, &t) / n)
                        })
                        .collect()
                })
                .collect(),
        )
    }));
    let key = "iii.speed";
    out.push(run_check(key, "flow", "| |dgamma/ds|_0 |grad_0 N(a)| - 1 |, s in {0.5,1,2}", tol.get(key), || {
        flatten(
            light
                .par_iter()
                .map(|smp| {
                    let lam = hgrad_norm(spec, norm, &smp.a)?;
                    tangents(smp)?
                        .into_iter()
                        .map(|(_, t, _)| Ok((t[..m].iter().map(|v| v * v).sum::<f64>().sqrt() * lam - 1.0).abs()))
                        .collect()
                })
                .collect(),
        )
    }));
    let key = "iii.semigroup";
    out.push(run_check(key, "flow", "|phi(2, phi(3, g)) - phi(6, g)|, g = delta_0.8(a)", tol.get(key), || {
        light
            .par_iter()
            .map(|smp| {
                let g = dilate_generic(spec, 0.8, &smp.a);
                let inner = flow.flow(&g, 3.0)?;
                let lhs = flow.flow(&inner, 2.0)?;
                let rhs = flow.flow(&g, 6.0)?;
                Ok(dist(&lhs, &rhs))
            })
            .collect()
    }));
    let key = "iii.arclength";
    out.push(run_check(
        key,
        "flow",
        "max(| |dbeta/ds|_0 - 1 |, |N(beta_a(s)) - s lambda_a|/(s lambda_a)), s in {0.5,1,2}",
        tol.get(key),
        || {
            flatten(
                light
                    .par_iter()
                    .map(|smp| {
                        let lam = hgrad_norm(spec, norm, &smp.a)?;
                        s_mid
                            .iter()
                            .map(|&s| {
                                let p = flow.flow(&smp.a, lam * s)?;
                                let t = match closed_tangent(flow, &smp.a, lam * s) {
                                    Some(t) => t,
                                    None => flow.tangent(&p, lam * s)?,
                                };
                                let speed = lam * t[..m].iter().map(|v| v * v).sum::<f64>().sqrt();
                                let nb = norm.value(&p)?;
                                Ok((speed - 1.0).abs().max((nb - s * lam).abs() / (s * lam)))
                            })
                            .collect()
                    })
                    .collect(),
            )
        },
    ));

    let pts: Vec<Vec<f64>> = cloud.samples.iter().map(|s| s.g.clone()).collect();
    let key = "iii.div_identity";
    out.push(run_check(key, "horizontal", "|div_0(N grad_0 N/|grad_0 N|^2) - Q|/Q", tol.get(key), || {
        div_identity_residuals(norm, &pts)
    }));
    let key = "iii.sublaplacian_identity";
    out.push(run_check(key, "horizontal", "N |L N - (Q-1)|grad_0 N|^2/N| / |grad_0 N|^2", tol.get(key), || {
        sublaplacian_identity_residuals(norm, &pts)
    }));
    let key = "iii.jacobian";
    out.push(run_check(key, "flow", "|det D_g phi(t, a) / t^Q - 1|, t in {0.5,2}, variational ODE", tol.get(key), || {
        flatten(
            heavy
                .par_iter()
                .map(|smp| {
                    [0.5, 2.0]
                        .iter()
                        .map(|&t| {
                            let (_, j) = flow.flow_with_jacobian(&smp.a, t)?;
                            Ok((j.determinant() / t.powf(q) - 1.0).abs())
                        })
                        .collect()
                })
                .collect(),
        )
    }));
    let key = "iii.density_spread";
    out.push(run_check(
        key,
        "integrate",
        "(max - min)/mean of |det D Phi(s,xi)|/s^(Q-1) over s in {0.5,1,2}",
        tol.get(key),
        || {
            heavy
                .par_iter()
                .map(|smp| {
                    let v: Vec<f64> =
                        s_mid.iter().map(|&s| system.sigma_density_at(&smp.xi, s)).collect::<Result<_>>()?;
                    let mx = v.iter().copied().fold(f64::MIN, f64::max);
                    let mn = v.iter().copied().fold(f64::MAX, f64::min);
                    Ok((mx - mn) / (v.iter().sum::<f64>() / 3.0))
                })
                .collect()
        },
    ));
    let key = "iii.quadrature";
    let stat = "relative spread of polar-horizontal, polar-dilation, polar-arclength on exp(-N^4)";
    out.push(if closed && system.chart().param_dim() <= 2 {
        run_check(key, "integrate", stat, tol.get(key), || {
            let ig = catalog_integrand("gauss-quartic", norm)?;
            let vals: Vec<f64> = [Method::PolarHorizontal, Method::PolarDilation, Method::PolarArcLength]
                .iter()
                .map(|m| Ok(system.integrate(&IntegrationJob::new(ig.clone(), *m).with_tol(1e-9))?.value))
                .collect::<Result<_>>()?;
            Ok(vals.iter().map(|v| (v - vals[0]).abs() / vals[0].abs()).collect())
        })
    } else {
        CheckResult::skipped(key, "integrate", stat, tol.get(key), "chart dimension above 2 or no closed-form flow")
    });
    out
}

/// Runs the requested conditions on one group with its Folland norm.
pub fn verify(
    spec: &GroupSpec,
    conditions: &[Condition],
    cfg: &SamplingConfig,
    tol: &Tolerances,
    timing: bool,
) -> Result<VerificationReport> {
    spec.require_q_above_two()?;
    let norm = HomNorm::folland(spec)?;
    verify_with_norm(&norm, conditions, cfg, tol, timing)
}

pub fn verify_with_norm(
    norm: &HomNorm,
    conditions: &[Condition],
    cfg: &SamplingConfig,
    tol: &Tolerances,
    timing: bool,
) -> Result<VerificationReport> {
    let spec = norm.spec();
    let system = PolarSystem::new(norm)?;
    let cloud = sample_cloud(&system, cfg)?;
    let pts: Vec<Vec<f64>> = cloud.samples.iter().map(|s| s.g.clone()).collect();
    let q = spec.hom_dimension() as f64;
    let mut reports = Vec::new();
    for &c in conditions {
        let start = Instant::now();
        let checks = match c {
            Condition::I => vec![run_check("i.linf", "horizontal", "N |L_inf N| / |grad_0 N|^4", tol.get("i"), || {
                condition_i_residuals(norm, &pts)
            })],
            Condition::II => {
                let ps = cfg.p_values.clone().unwrap_or_else(|| default_p_values(q));
                ps.iter()
                    .map(|&p| {
                        let t = if p == 2.0 {
                            tol.get("ii.p2")
                        } else if p.is_infinite() {
                            tol.get("i")
                        } else {
                            tol.get("ii")
                        };
                        let stat = if p.is_infinite() {
                            "N |L_inf N| / |grad_0 N|^4".to_string()
                        } else if (p - q).abs() < 1e-12 {
                            "N |L_p u| / |grad_0 u|^(p-1), u = log(1/N)".to_string()
                        } else {
                            "N |L_p u| / |grad_0 u|^(p-1), u = N^((p-Q)/(p-1))".to_string()
                        };
                        run_check(&p_key(p), "horizontal", &stat, t, || condition_ii_residuals(norm, p, &pts))
                    })
                    .collect()
            }
            Condition::III => condition_iii(&system, &cloud, cfg, tol),
        };
        reports.push(ConditionReport {
            condition: c,
            checks,
            seconds: timing.then(|| start.elapsed().as_secs_f64()),
        });
    }
    let engine = match system.flow().engine() {
        FlowEngine::HeisenbergClosed { .. } => "closed-form",
        FlowEngine::Rays => "rays",
        FlowEngine::Ode => "ode",
    };
    Ok(VerificationReport {
        group: spec.name().to_string(),
        dim: spec.dim(),
        hom_dimension: spec.hom_dimension(),
        norm: norm.label(),
        engine: engine.into(),
        seed: cfg.seed,
        config: cfg.clone(),
        points: cloud.samples.len(),
        attempted: cloud.attempted,
        excluded: cloud.excluded,
        tolerances: tol.clone(),
        conditions: reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::builtin;

    #[test]
    fn radical_inverse_values() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert!((radical_inverse(5, 3) - (2.0 / 3.0 + 1.0 / 9.0)).abs() < 1e-15);
    }

    #[test]
    fn condition_list_parsing() {
        assert_eq!(Condition::parse_list("iii,i").unwrap(), vec![Condition::I, Condition::III]);
        assert!(Condition::parse_list("iv").is_err());
        assert!(Condition::parse_list("").is_err());
    }

    #[test]
    fn stats_from_values() {
        let s = ResidualStats::from_values(&[3.0, 1.0, 2.0, 10.0]);
        assert_eq!((s.max, s.median, s.samples), (10.0, 2.5, 4));
        assert!(ResidualStats::from_values(&[1.0, f64::NAN]).max.is_nan());
    }

    #[test]
    fn tolerance_overrides() {
        let mut t = Tolerances::default();
        t.set("i", 1e-6).unwrap();
        assert_eq!(t.get("i"), 1e-6);
        assert!(t.set("nope", 1.0).is_err());
        assert!(t.set("i", -1.0).is_err());
    }

    #[test]
    fn cloud_respects_sampling_box() {
        let sys = PolarSystem::new(&HomNorm::folland(&builtin("heis1").unwrap()).unwrap()).unwrap();
        let cfg = SamplingConfig { points: 50, seed: 3, ..Default::default() };
        let cloud = sample_cloud(&sys, &cfg).unwrap();
        assert_eq!(cloud.samples.len(), 50);
        for s in &cloud.samples {
            let n = sys.norm().value(&s.g).unwrap();
            assert!((0.5..=2.0).contains(&n));
            assert!((n - s.s).abs() < 1e-12);
        }
        assert_eq!(cloud, sample_cloud(&sys, &cfg).unwrap());
    }

    #[test]
    fn small_heisenberg_run_passes() {
        let cfg = SamplingConfig { points: 40, seed: 1, curves: 5, ..Default::default() };
        let r = verify(&builtin("heis1").unwrap(), &[Condition::I, Condition::II], &cfg, &Tolerances::default(), false)
            .unwrap();
        assert!(r.passed(), "{}", r.render());
    }
}
