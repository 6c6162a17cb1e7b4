//! Integration in polar coordinates and in ambient coordinates.
//!
//! Three polar formulas are available, all of the form
//! `∫_G f dμ = ∫_S ∫_0^∞ f(c_a(s)) s^{Q−1} ds dm(a)`:
//!
//! * horizontal: `c_a = γ_a` (the radial flow) and `m = σ`;
//! * dilation: `c_a(s) = δ_s(a)` and `m = σ̃_dil`;
//! * arc-length: `c_a = β_a` (unit-speed flow curves) and
//!   `m = |∇_0N|^Q σ`.
//!
//! Each density is obtained on a [`SphereChart`] as
//! `|det D_{(s,ξ)} Φ(s, ξ)| / s^{Q−1}` with `Φ(s, ξ) = c_{a(ξ)}(s)`, using
//! jets through closed forms and the variational equation otherwise.
//! Haar measure in exponential coordinates is Lebesgue measure, so ambient
//! tensor quadrature and Monte Carlo serve as references.

use std::cell::RefCell;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chart::SphereChart;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::flow::{gradient_scale, PolarFlow};
use crate::group::{dilate_generic, GroupSpec};
use crate::jet::Dual;
use crate::norms::{HomNorm, NormKind};
use crate::quadrature::{neumaier_sum, Adaptive, GaussRule};

/// Which curves sweep out the group.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Curves {
    Horizontal,
    Dilation,
    ArcLength,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    PolarHorizontal,
    PolarDilation,
    PolarArcLength,
    AmbientTensor,
    AmbientMonteCarlo { samples: usize, seed: u64 },
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::PolarHorizontal => write!(f, "polar-horizontal"),
            Method::PolarDilation => write!(f, "polar-dilation"),
            Method::PolarArcLength => write!(f, "polar-arclength"),
            Method::AmbientTensor => write!(f, "ambient-tensor"),
            Method::AmbientMonteCarlo { .. } => write!(f, "ambient-mc"),
        }
    }
}

impl Method {
    /// Parses a CLI method name; Monte Carlo takes its sample count and
    /// seed from the arguments.
    pub fn parse(name: &str, samples: usize, seed: u64) -> Result<Self> {
        Ok(match name {
            "polar-horizontal" | "polar" => Method::PolarHorizontal,
            "polar-dilation" => Method::PolarDilation,
            "polar-arclength" => Method::PolarArcLength,
            "ambient-tensor" | "tensor" => Method::AmbientTensor,
            "ambient-mc" | "mc" => Method::AmbientMonteCarlo { samples, seed },
            other => return Err(Error::Parse(format!("unknown integration method `{other}`"))),
        })
    }
}

type Func = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A function on the group with the support data quadrature needs.
#[derive(Clone)]
pub struct Integrand {
    name: String,
    f: Func,
    /// Values of `N` where the integrand is not smooth.
    breaks: Vec<f64>,
    /// `N ≤ extent` contains the support, or the region outside which the
    /// integrand is negligible.
    extent: f64,
    compact: bool,
    tail: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
}

impl fmt::Debug for Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Integrand").field("name", &self.name).field("extent", &self.extent).finish()
    }
}

impl Integrand {
    /// Supported in `{N ≤ radius}`.
    pub fn compact<F>(name: &str, radius: f64, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Integrand { name: name.into(), f: Arc::new(f), breaks: Vec::new(), extent: radius, compact: true, tail: None }
    }

    /// Not compactly supported; jobs need a tail bound, declared here with
    /// [`with_tail`](Self::with_tail) or on the job.
    pub fn decaying<F>(name: &str, extent: f64, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Integrand { name: name.into(), f: Arc::new(f), breaks: Vec::new(), extent, compact: false, tail: None }
    }

    /// `tail(R)` bounds `∫_{N > R} |f| dμ`.
    pub fn with_tail<T: Fn(f64) -> f64 + Send + Sync + 'static>(mut self, tail: T) -> Self {
        self.tail = Some(Arc::new(tail));
        self
    }

    pub fn with_breaks(mut self, breaks: Vec<f64>) -> Self {
        self.breaks = breaks;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn is_compact(&self) -> bool {
        self.compact
    }

    pub fn eval(&self, g: &[f64]) -> f64 {
        (self.f)(g)
    }
}

/// Names accepted by [`catalog_integrand`].
pub const INTEGRANDS: &[&str] = &["gauss-quartic", "ball", "shell", "nonradial", "gaussian"];

/// Built-in integrands, defined in terms of `norm`.
pub fn catalog_integrand(name: &str, norm: &HomNorm) -> Result<Integrand> {
    let n = norm.clone();
    let q = norm.spec().hom_dimension() as i32;
    let nv = move |g: &[f64]| n.value(g).unwrap_or(0.0);
    Ok(match name {
        "gauss-quartic" => Integrand::decaying(name, 2.6, move |g| (-nv(g).powi(4)).exp())
            .with_tail(move |r| 1e3 * (1.0 + r.powi(q)) * (-r.powi(4)).exp()),
        "ball" => Integrand::compact(name, 1.0, move |g| if nv(g) <= 1.0 { 1.0 } else { 0.0 }).with_breaks(vec![1.0]),
        "shell" => {
            Integrand::compact(name, 2.0, move |g| {
                let v = nv(g);
                if (1.0..=2.0).contains(&v) {
                    1.0
                } else {
                    0.0
                }
            })
            .with_breaks(vec![1.0, 2.0])
        }
        "nonradial" => Integrand::decaying(name, 2.6, move |g| {
            let v = nv(g);
            (-v.powi(4)).exp() * (1.0 + g[0] / (1.0 + v))
        })
        .with_tail(move |r| 2e3 * (1.0 + r.powi(q)) * (-r.powi(4)).exp()),
        "gaussian" => {
            let c = norm.center_weight();
            // outside N ≤ R either |x|² ≥ R²/√2 or |z|² ≥ R⁴/(2c)
            let extent = if c == 0.0 { 7.0 } else { 8.0 };
            Integrand::decaying(name, extent, |g| (-g.iter().map(|v| v * v).sum::<f64>()).exp()).with_tail(move |r| {
                let e = if c == 0.0 { r * r } else { (r * r / 2f64.sqrt()).min(r.powi(4) / (2.0 * c)) };
                1e3 * (1.0 + r.powi(2 * q)) * (-e).exp()
            })
        }
        other => return Err(Error::Parse(format!("unknown integrand `{other}`; known: {}", INTEGRANDS.join(", ")))),
    })
}

/// Tensor Gauss rule over the chart box: `order` nodes on each of `panels`
/// panels per axis, refined by doubling the panels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OuterRule {
    pub order: usize,
    pub panels: usize,
    pub refinements: usize,
}

impl OuterRule {
    pub fn for_dim(d: usize) -> Self {
        match d {
            0..=2 => OuterRule { order: 8, panels: 4, refinements: 2 },
            3 => OuterRule { order: 8, panels: 2, refinements: 1 },
            4 => OuterRule { order: 6, panels: 2, refinements: 1 },
            _ => OuterRule { order: 4, panels: 1, refinements: 1 },
        }
    }
}

#[derive(Clone, Debug)]
pub struct IntegrationJob {
    pub integrand: Integrand,
    pub method: Method,
    pub s_min: f64,
    pub s_max: f64,
    /// Relative tolerance.
    pub tol: f64,
    /// Bound on the integral outside the radial range; required for
    /// integrands without compact support.
    pub tail_bound: Option<f64>,
    pub outer: Option<OuterRule>,
}

pub const DEFAULT_RADIAL_RANGE: (f64, f64) = (1e-3, 20.0);

impl IntegrationJob {
    pub fn new(integrand: Integrand, method: Method) -> Self {
        let (s_min, mut s_max) = DEFAULT_RADIAL_RANGE;
        if integrand.compact {
            s_max = integrand.extent;
        }
        let tail_bound = integrand.tail.as_ref().map(|t| t(s_max));
        IntegrationJob { integrand, method, s_min, s_max, tol: 1e-8, tail_bound, outer: None }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_radial_range(mut self, s_min: f64, s_max: f64) -> Self {
        self.s_min = s_min;
        self.s_max = s_max;
        self.tail_bound = self.integrand.tail.as_ref().map(|t| t(s_max));
        self
    }

    pub fn with_outer(mut self, outer: OuterRule) -> Self {
        self.outer = Some(outer);
        self
    }

    fn validate(&self) -> Result<f64> {
        if !(self.s_min >= 0.0 && self.s_max > self.s_min) {
            return Err(Error::InvalidSpec(format!("radial range [{}, {}] is empty", self.s_min, self.s_max)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidSpec("tolerance must be positive".into()));
        }
        if self.integrand.compact {
            if self.s_max < self.integrand.extent {
                return Err(Error::InvalidSpec(format!(
                    "radial range ends at {} inside the support radius {}",
                    self.s_max, self.integrand.extent
                )));
            }
            return Ok(0.0);
        }
        self.tail_bound.ok_or_else(|| {
            Error::InvalidSpec(format!("integrand `{}` has no compact support; declare a tail bound", self.integrand.name))
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrationResult {
    pub value: f64,
    /// Quadrature error estimate plus the declared tail bound, or the
    /// standard error for Monte Carlo.
    pub error_estimate: f64,
    pub method: Method,
    pub seed: Option<u64>,
    pub evaluations: usize,
}

/// Polar coordinates for one norm: its flow and a chart of its sphere.
#[derive(Clone, Debug)]
pub struct PolarSystem {
    flow: PolarFlow,
    chart: SphereChart,
}

impl PolarSystem {
    pub fn new(norm: &HomNorm) -> Result<Self> {
        Ok(PolarSystem { flow: PolarFlow::new(norm), chart: SphereChart::new(norm)? })
    }

    pub fn from_parts(flow: PolarFlow, chart: SphereChart) -> Self {
        PolarSystem { flow, chart }
    }

    pub fn with_chart(mut self, chart: SphereChart) -> Self {
        self.chart = chart;
        self
    }

    pub fn with_flow(mut self, flow: PolarFlow) -> Self {
        self.flow = flow;
        self
    }

    pub fn flow(&self) -> &PolarFlow {
        &self.flow
    }

    pub fn chart(&self) -> &SphereChart {
        &self.chart
    }

    pub fn norm(&self) -> &HomNorm {
        self.flow.norm()
    }

    pub fn spec(&self) -> &GroupSpec {
        self.flow.spec()
    }

    fn q(&self) -> f64 {
        self.spec().hom_dimension() as f64
    }

    /// `|det D_{(s,ξ)} Φ(s, ξ)| / s^{Q−1}` for the horizontal flow
    /// `Φ(s, ξ) = γ_{a(ξ)}(s)`.
    pub fn sigma_density_at(&self, xi: &[f64], s: f64) -> Result<f64> {
        let a = self.chart.point(xi)?;
        let d = a.len();
        let jac = if self.flow.engine().has_closed_form() {
            let vars: Vec<Dual> = xi.iter().enumerate().map(|(j, v)| Dual::variable(*v, j + 1, d)).collect();
            let ad = self.chart.point_generic(&vars);
            let phi = self.flow.closed_generic(&ad, Dual::variable(s, 0, d)).expect("closed-form engine");
            DMatrix::from_fn(d, d, |i, j| phi[i].partial(j))
        } else {
            let (_, da) = self.chart.point_with_derivative(xi)?;
            let (phi, jg) = self.flow.flow_with_jacobian(&a, s)?;
            let ts = self.flow.tangent(&phi, s)?;
            let cols = jg * da;
            DMatrix::from_fn(d, d, |i, j| if j == 0 { ts[i] } else { cols[(i, j - 1)] })
        };
        Ok(jac.determinant().abs() / s.powf(self.q() - 1.0))
    }

    /// Density of `σ` on the chart.
    pub fn sigma_density(&self, xi: &[f64]) -> Result<f64> {
        self.sigma_density_at(xi, 1.0)
    }

    /// Density of the dilation sphere measure `σ̃_dil` on the chart.
    pub fn dilation_density(&self, xi: &[f64]) -> Result<f64> {
        self.chart.point(xi)?;
        let d = xi.len() + 1;
        let vars: Vec<Dual> = xi.iter().enumerate().map(|(j, v)| Dual::variable(*v, j + 1, d)).collect();
        let ad = self.chart.point_generic(&vars);
        let psi = dilate_generic(self.spec(), Dual::variable(1.0, 0, d), &ad);
        Ok(DMatrix::from_fn(d, d, |i, j| psi[i].partial(j)).determinant().abs())
    }

    /// `|∇_0N(a(ξ))|`.
    pub fn gradient_weight(&self, xi: &[f64]) -> Result<f64> {
        let a = self.chart.point(xi)?;
        gradient_scale(self.norm(), &crate::group::Point(a), self.flow.options().exclusion.eps)
    }

    /// Tensor Gauss integration of `h` over the chart box. Returns the value
    /// at the finest level and the change from the previous level.
    pub fn outer_integrate<H>(&self, rule: OuterRule, rel_tol: f64, h: H) -> Result<(f64, f64, usize)>
    where
        H: Fn(&[f64]) -> Result<f64> + Sync,
    {
        let gauss = GaussRule::new(rule.order);
        let mut prev: Option<f64> = None;
        let mut evals = 0;
        let mut last = (0.0, f64::INFINITY);
        for level in 0..=rule.refinements {
            let panels = rule.panels << level;
            let axes: Vec<Vec<(f64, f64)>> =
                self.chart.domain().iter().map(|(lo, hi)| gauss.composite_nodes(*lo, *hi, panels)).collect();
            let value = tensor_sum(&axes, &h)?;
            evals += axes.iter().map(Vec::len).product::<usize>();
            let diff = prev.map_or(f64::INFINITY, |p| (value - p).abs());
            last = (value, diff);
            if diff <= rel_tol * value.abs() {
                break;
            }
            prev = Some(value);
        }
        Ok((last.0, last.1, evals))
    }

    fn outer_rule(&self, job: &IntegrationJob) -> OuterRule {
        job.outer.unwrap_or_else(|| OuterRule::for_dim(self.chart.param_dim()))
    }

    /// `∫_S |∇_0N|^p dσ`; `p = 0` gives `σ(S)`.
    pub fn sigma_moment(&self, p: f64, rel_tol: f64) -> Result<f64> {
        let rule = OuterRule::for_dim(self.chart.param_dim());
        let (v, _, _) = self.outer_integrate(rule, rel_tol, |xi| {
            let w = if p == 0.0 { 1.0 } else { self.gradient_weight(xi)?.powf(p) };
            Ok(self.sigma_density(xi)? * w)
        })?;
        Ok(v)
    }

    /// `σ̃_dil(S)`.
    pub fn dilation_mass(&self, rel_tol: f64) -> Result<f64> {
        let rule = OuterRule::for_dim(self.chart.param_dim());
        Ok(self.outer_integrate(rule, rel_tol, |xi| self.dilation_density(xi))?.0)
    }

    /// Point on the curve of the given family through `a` at parameter `s`.
    pub fn curve_point(&self, curves: Curves, a: &[f64], lambda: f64, s: f64) -> Result<Vec<f64>> {
        match curves {
            Curves::Horizontal => Ok(self.flow.flow(a, s)?.0),
            Curves::ArcLength => Ok(self.flow.flow(a, lambda * s)?.0),
            Curves::Dilation => Ok(dilate_generic(self.spec(), s, a)),
        }
    }

    /// `∫_S ∫_{s_min}^{s_max} F(ξ, c_a(s)) s^{Q−1} ds dm(a)` where the inner
    /// integrand sees the chart parameter and the curve point.
    pub fn polar_integral<F>(
        &self,
        curves: Curves,
        range: (f64, f64),
        breaks: &[f64],
        outer: OuterRule,
        tol: f64,
        f: F,
    ) -> Result<(f64, f64, usize)>
    where
        F: Fn(&[f64], &[f64]) -> Result<f64> + Sync,
    {
        let q = self.q();
        let radial = Adaptive::new(10, 1e-15, 0.05 * tol);
        let (value, diff, evals) = self.outer_integrate(outer, tol, |xi| {
            let a = self.chart.point(xi)?;
            let (rho, lambda) = match curves {
                Curves::Horizontal => (self.sigma_density(xi)?, 1.0),
                Curves::Dilation => (self.dilation_density(xi)?, 1.0),
                Curves::ArcLength => {
                    let l = self.gradient_weight(xi)?;
                    (self.sigma_density(xi)? * l.powf(q), l)
                }
            };
            let scaled: Vec<f64> = breaks.iter().map(|b| b / lambda).collect();
            let failure = RefCell::new(None);
            let est = radial.integrate(
                |s| {
                    if failure.borrow().is_some() {
                        return 0.0;
                    }
                    match self.curve_point(curves, &a, lambda, s).and_then(|p| f(xi, &p)) {
                        Ok(v) => v * s.powf(q - 1.0),
                        Err(e) => {
                            *failure.borrow_mut() = Some(e);
                            0.0
                        }
                    }
                },
                range.0 / lambda,
                range.1 / lambda,
                &scaled,
            )?;
            if let Some(e) = failure.into_inner() {
                return Err(e);
            }
            Ok(rho * est.value)
        })?;
        Ok((value, diff, evals))
    }

    /// Integrates a job with one of the polar methods.
    pub fn integrate(&self, job: &IntegrationJob) -> Result<IntegrationResult> {
        let curves = match job.method {
            Method::PolarHorizontal => Curves::Horizontal,
            Method::PolarDilation => Curves::Dilation,
            Method::PolarArcLength => Curves::ArcLength,
            _ => return ambient_integrate(self.norm(), job),
        };
        let tail = job.validate()?;
        let integrand = &job.integrand;
        let (value, diff, evals) = self.polar_integral(
            curves,
            (job.s_min, job.s_max),
            &integrand.breaks,
            self.outer_rule(job),
            job.tol,
            |_, p| Ok(integrand.eval(p)),
        )?;
        if diff > job.tol * value.abs() + tail {
            return Err(Error::ToleranceNotMet { estimate: diff, tol: job.tol * value.abs() });
        }
        Ok(IntegrationResult { value, error_estimate: diff + tail, method: job.method, seed: None, evaluations: evals })
    }
}

fn tensor_sum<H>(axes: &[Vec<(f64, f64)>], h: &H) -> Result<f64>
where
    H: Fn(&[f64]) -> Result<f64> + Sync,
{
    let sizes: Vec<usize> = axes.iter().map(Vec::len).collect();
    let total: usize = sizes.iter().product();
    let terms: Vec<Result<f64>> = (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let mut x = Vec::with_capacity(axes.len());
            let mut w = 1.0;
            for (axis, n) in axes.iter().zip(&sizes).rev() {
                let (xv, wv) = axis[idx % n];
                idx /= n;
                x.push(xv);
                w *= wv;
            }
            x.reverse();
            Ok(w * h(&x)?)
        })
        .collect();
    let mut vals = Vec::with_capacity(total);
    for t in terms {
        vals.push(t?);
    }
    Ok(neumaier_sum(vals))
}

/// `∫ f dμ` with a horizontal polar job.
pub fn polar_integrate(system: &PolarSystem, job: &IntegrationJob) -> Result<IntegrationResult> {
    if job.method != Method::PolarHorizontal && job.method != Method::PolarArcLength {
        return Err(Error::InvalidSpec(format!("polar_integrate needs a horizontal method, got {}", job.method)));
    }
    system.integrate(job)
}

/// `∫ f dμ` with the dilation polar formula.
pub fn dilation_polar_integrate(system: &PolarSystem, job: &IntegrationJob) -> Result<IntegrationResult> {
    if job.method != Method::PolarDilation {
        return Err(Error::InvalidSpec(format!("dilation_polar_integrate needs polar-dilation, got {}", job.method)));
    }
    system.integrate(job)
}

/// Half-widths of a coordinate box containing the ball `{N ≤ r}`.
pub fn ball_box(norm: &HomNorm, r: f64) -> Vec<f64> {
    let spec = norm.spec();
    let m = spec.horizontal_dim();
    match norm.kind() {
        NormKind::EuclideanAbs => vec![r; spec.dim()],
        NormKind::Koranyi | NormKind::Kaplan(_) => {
            let zc = r * r / norm.center_weight().sqrt();
            (0..spec.dim()).map(|i| if i < m { r } else { zc }).collect()
        }
    }
}

const TENSOR_MAX_DIM: usize = 4;

/// Reference integration in ambient coordinates over the box containing
/// `{N ≤ extent}`.
pub fn ambient_integrate(norm: &HomNorm, job: &IntegrationJob) -> Result<IntegrationResult> {
    let tail = job.validate()?;
    let half = ball_box(norm, job.integrand.extent);
    let f = &job.integrand;
    match job.method {
        Method::AmbientTensor => {
            let d = half.len();
            if d > TENSOR_MAX_DIM {
                return Err(Error::Unsupported(format!("tensor quadrature in dimension {d}; use Monte Carlo")));
            }
            let gauss = GaussRule::new(12);
            let mut prev: Option<f64> = None;
            let mut evals = 0;
            let mut out = (0.0, f64::INFINITY);
            let levels = if d <= 3 { 3 } else { 2 };
            for level in 0..levels {
                let panels = 4usize << level;
                let axes: Vec<Vec<(f64, f64)>> = half.iter().map(|h| gauss.composite_nodes(-h, *h, panels)).collect();
                let v = tensor_sum(&axes, &|x: &[f64]| Ok(f.eval(x)))?;
                evals += axes.iter().map(Vec::len).product::<usize>();
                let diff = prev.map_or(f64::INFINITY, |p| (v - p).abs());
                out = (v, diff);
                if diff <= job.tol * v.abs() {
                    break;
                }
                prev = Some(v);
            }
            Ok(IntegrationResult {
                value: out.0,
                error_estimate: out.1 + tail,
                method: job.method,
                seed: None,
                evaluations: evals,
            })
        }
        Method::AmbientMonteCarlo { samples, seed } => {
            let (value, se) = stratified_monte_carlo(&half, samples, seed, |x| f.eval(x));
            Ok(IntegrationResult { value, error_estimate: se, method: job.method, seed: Some(seed), evaluations: samples })
        }
        other => Err(Error::InvalidSpec(format!("ambient_integrate needs an ambient method, got {other}"))),
    }
}

const MAX_STRATA: usize = 4096;

/// Stratified Monte Carlo over the box `∏[−h_i, h_i]`: a regular grid of
/// sub-boxes, each with its own ChaCha stream. Returns the estimate and its
/// standard error; deterministic for a fixed seed.
pub fn stratified_monte_carlo<F>(half: &[f64], samples: usize, seed: u64, f: F) -> (f64, f64)
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let d = half.len();
    let mut k = 1usize;
    while (k + 1).pow(d as u32) <= MAX_STRATA.min(samples / 2).max(1) && k < 16 {
        k += 1;
    }
    let strata = k.pow(d as u32);
    let base = samples / strata;
    let extra = samples % strata;
    let widths: Vec<f64> = half.iter().map(|h| 2.0 * h / k as f64).collect();
    let vol: f64 = widths.iter().product();
    let parts: Vec<(f64, f64)> = (0..strata)
        .into_par_iter()
        .map(|j| {
            let n = base + usize::from(j < extra);
            if n == 0 {
                return (0.0, 0.0);
            }
            let mut lo = vec![0.0; d];
            let mut rem = j;
            for i in (0..d).rev() {
                lo[i] = -half[i] + (rem % k) as f64 * widths[i];
                rem /= k;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(j as u64);
            let mut x = vec![0.0; d];
            let (mut mean, mut m2) = (0.0, 0.0);
            for i in 0..n {
                for (t, (l, w)) in x.iter_mut().zip(lo.iter().zip(&widths)) {
                    *t = l + w * rng.gen::<f64>();
                }
                let v = f(&x);
                let delta = v - mean;
                mean += delta / (i + 1) as f64;
                m2 += delta * (v - mean);
            }
            let var = if n > 1 { m2 / (n - 1) as f64 } else { 0.0 };
            (vol * mean, vol * vol * var / n as f64)
        })
        .collect();
    let value = neumaier_sum(parts.iter().map(|p| p.0));
    let var = neumaier_sum(parts.iter().map(|p| p.1));
    (value, var.sqrt())
}
