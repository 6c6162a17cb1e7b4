//! Horizontal radial flow `φ(s, g)` and the polar curves `γ_a(s) = φ(s, a)`.
//!
//! The flow solves
//!
//! ```text
//! ∂φ/∂s = N(φ)/s · ∇_0N(φ) / |∇_0N(φ)|²
//! ```
//!
//! lifted to ambient coordinates through the frame. It is integrated in
//! `τ = log s`, where the field is autonomous. On Heisenberg groups with the
//! Korányi norm the curves are also available in closed form, and on
//! Euclidean space they are straight rays.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::group::{frame_generic, GroupSpec, HorizontalVector, Point, Structure};
use crate::horizontal::HorizontalJet;
use crate::jet::{Dual, Scalar};
use crate::norms::{HomNorm, NormKind};
use crate::ode::DormandPrince;

pub const DEFAULT_EPS_Z: f64 = 1e-6;
/// Relative and absolute tolerance of the flow ODE.
pub const FLOW_ODE_TOL: f64 = 1e-13;

/// Thickened null set excluded from the foliation: the vertical set
/// `{x = 0}` on step-two groups, the origin on Euclidean space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExclusionPredicate {
    pub eps: f64,
}

impl Default for ExclusionPredicate {
    fn default() -> Self {
        ExclusionPredicate { eps: DEFAULT_EPS_Z }
    }
}

impl ExclusionPredicate {
    pub fn excludes(&self, spec: &GroupSpec, g: &[f64]) -> bool {
        let m = spec.horizontal_dim();
        let r: f64 = g[..m].iter().map(|v| v * v).sum::<f64>().sqrt();
        r < self.eps
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FlowOptions {
    pub ode: DormandPrince,
    pub exclusion: ExclusionPredicate,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions { ode: DormandPrince::with_tol(FLOW_ODE_TOL), exclusion: ExclusionPredicate::default() }
    }
}

/// How `φ` is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowEngine {
    /// Closed form on `H^n` with the Korányi norm.
    HeisenbergClosed { n: usize },
    /// Straight rays `s·g` on Euclidean space.
    Rays,
    /// Numerical integration of the flow ODE.
    Ode,
}

impl FlowEngine {
    pub fn for_norm(norm: &HomNorm) -> Self {
        match (norm.spec().structure(), norm.kind()) {
            (Structure::Heisenberg { n }, NormKind::Koranyi) => FlowEngine::HeisenbergClosed { n: *n },
            (Structure::Euclidean { .. }, NormKind::EuclideanAbs) => FlowEngine::Rays,
            _ => FlowEngine::Ode,
        }
    }

    pub fn has_closed_form(&self) -> bool {
        !matches!(self, FlowEngine::Ode)
    }
}

/// `(s z e^{−iα log s}, s² t)` with `α = t/|z|²`; the rotation pairs `x_j`
/// with `x_{n+j}`.
pub fn heisenberg_closed_generic<S: Scalar>(n: usize, a: &[S], s: S) -> Vec<S> {
    let r2 = crate::jet::sum_sq(&a[..2 * n]);
    let t = a[2 * n].clone();
    let alpha = t.clone() / r2;
    let angle = -(alpha * s.ln());
    let (c, sn) = (angle.cos(), angle.sin());
    let mut out = a.to_vec();
    for j in 0..n {
        let (x, y) = (a[j].clone(), a[n + j].clone());
        out[j] = (x.clone() * c.clone() - y.clone() * sn.clone()) * s.clone();
        out[n + j] = (x * sn.clone() + y * c.clone()) * s.clone();
    }
    out[2 * n] = t * s.clone() * s;
    out
}

/// Closed-form Heisenberg polar flow `φ(s, a)`.
pub fn heisenberg_flow_closed(n: usize, a: &Point, s: f64) -> Result<Point> {
    if a.len() != 2 * n + 1 {
        return Err(Error::DimensionMismatch { expected: 2 * n + 1, actual: a.len() });
    }
    if !(s > 0.0) {
        return Err(Error::OutOfRange(format!("flow parameter s = {s} must be positive")));
    }
    let r: f64 = a[..2 * n].iter().map(|v| v * v).sum::<f64>().sqrt();
    if r < DEFAULT_EPS_Z {
        return Err(Error::OnVerticalAxis(r));
    }
    Ok(Point(heisenberg_closed_generic(n, a, s)))
}

/// The radial field in `τ = log s`: `G(x) = N ∇_0N / |∇_0N|²` in ambient
/// coordinates. Fails on the characteristic set.
pub fn radial_field(norm: &HomNorm, x: &[f64], char_eps: f64) -> Result<Vec<f64>> {
    let spec = norm.spec();
    let d = norm.dual_at(x)?;
    let frame = frame_generic(spec, x);
    let xg: Vec<f64> = frame.iter().map(|c| c.iter().zip(&d.grad).map(|(a, b)| a * b).sum()).collect();
    let h: f64 = xg.iter().map(|v| v * v).sum();
    if h.sqrt() < char_eps {
        return Err(Error::OnCharacteristicSet(h.sqrt()));
    }
    let scale = d.value / h;
    let n = x.len();
    let mut out = vec![0.0; n];
    for (c, a) in frame.iter().zip(&xg) {
        for k in 0..n {
            out[k] += scale * a * c[k];
        }
    }
    Ok(out)
}

/// `G(x)` and its ambient Jacobian `DG(x)` (row-major).
pub fn radial_field_jacobian(norm: &HomNorm, x: &[f64], char_eps: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let hj = HorizontalJet::new(norm.spec(), norm, x)?;
    let h = hj.hgrad_norm_sq();
    if h.value.sqrt() < char_eps {
        return Err(Error::OnCharacteristicSet(h.value.sqrt()));
    }
    let scale = hj.jet.to_dual() / h;
    let n = x.len();
    let mut g = vec![0.0; n];
    let mut dg = vec![0.0; n * n];
    for k in 0..n {
        let mut acc = Dual::constant(0.0);
        for (c, a) in hj.frame.iter().zip(&hj.xgrad) {
            acc = acc + a.clone() * c[k].clone();
        }
        let gk = scale.clone() * acc;
        g[k] = gk.value;
        for l in 0..n {
            dg[k * n + l] = gk.partial(l);
        }
    }
    Ok((g, dg))
}

/// Horizontal polar flow for one norm.
#[derive(Clone, Debug)]
pub struct PolarFlow {
    norm: HomNorm,
    engine: FlowEngine,
    opts: FlowOptions,
}

impl PolarFlow {
    pub fn new(norm: &HomNorm) -> Self {
        PolarFlow { norm: norm.clone(), engine: FlowEngine::for_norm(norm), opts: FlowOptions::default() }
    }

    pub fn with_engine(mut self, engine: FlowEngine) -> Self {
        self.engine = engine;
        self
    }

    pub fn with_options(mut self, opts: FlowOptions) -> Self {
        self.opts = opts;
        self
    }

    pub fn norm(&self) -> &HomNorm {
        &self.norm
    }

    pub fn spec(&self) -> &GroupSpec {
        self.norm.spec()
    }

    pub fn engine(&self) -> FlowEngine {
        self.engine
    }

    pub fn options(&self) -> &FlowOptions {
        &self.opts
    }

    fn check_start(&self, g: &[f64]) -> Result<()> {
        self.spec().check_point(g)?;
        if self.opts.exclusion.excludes(self.spec(), g) {
            let m = self.spec().horizontal_dim();
            let r = g[..m].iter().map(|v| v * v).sum::<f64>().sqrt();
            return Err(Error::OnVerticalAxis(r));
        }
        Ok(())
    }

    /// `φ(s, g)` for the closed-form engines, generic so it can be
    /// differentiated. `None` for the ODE engine.
    pub fn closed_generic<S: Scalar>(&self, g: &[S], s: S) -> Option<Vec<S>> {
        match self.engine {
            FlowEngine::HeisenbergClosed { n } => Some(heisenberg_closed_generic(n, g, s)),
            FlowEngine::Rays => Some(g.iter().map(|v| v.clone() * s.clone()).collect()),
            FlowEngine::Ode => None,
        }
    }

    fn ode_rhs(&self) -> impl Fn(f64, &[f64], &mut [f64]) -> Result<()> + '_ {
        move |tau, y, dy| {
            let g = radial_field(&self.norm, y, self.opts.exclusion.eps)
                .map_err(|_| Error::EnteredExclusionZone { s: tau.exp() })?;
            dy.copy_from_slice(&g);
            Ok(())
        }
    }

    /// `φ(s, g)` by integrating the flow ODE, regardless of engine.
    pub fn integrate(&self, g: &[f64], s: f64) -> Result<Point> {
        self.check_start(g)?;
        if !(s > 0.0) {
            return Err(Error::OutOfRange(format!("flow parameter s = {s} must be positive")));
        }
        Ok(Point(self.opts.ode.integrate(self.ode_rhs(), 0.0, g, s.ln())?))
    }

    /// `φ(s, g)`.
    pub fn flow(&self, g: &[f64], s: f64) -> Result<Point> {
        self.check_start(g)?;
        if !(s > 0.0) {
            return Err(Error::OutOfRange(format!("flow parameter s = {s} must be positive")));
        }
        match self.closed_generic(g, s) {
            Some(p) => Ok(Point(p)),
            None => self.integrate(g, s),
        }
    }

    /// `φ(s_i, g)` for every `s_i`; the ODE engine continues one trajectory
    /// outward from `s = 1` in both directions.
    pub fn trajectory(&self, g: &[f64], s_values: &[f64]) -> Result<Vec<Point>> {
        self.check_start(g)?;
        if s_values.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::OutOfRange("flow parameters must be positive".into()));
        }
        if self.engine.has_closed_form() {
            return s_values.iter().map(|&s| Ok(Point(self.closed_generic(g, s).unwrap()))).collect();
        }
        let mut order: Vec<usize> = (0..s_values.len()).collect();
        order.sort_by(|&a, &b| s_values[a].total_cmp(&s_values[b]));
        let mut out = vec![Point(Vec::new()); s_values.len()];
        let split = order.partition_point(|&i| s_values[i] < 1.0);
        let rhs = self.ode_rhs();
        for (range, rev) in [(split..order.len(), false), (0..split, true)] {
            let idx: Vec<usize> =
                if rev { order[range].iter().rev().copied().collect() } else { order[range].to_vec() };
            let (mut tau, mut y) = (0.0, g.to_vec());
            for i in idx {
                let target = s_values[i].ln();
                y = self.opts.ode.integrate(&rhs, tau, &y, target)?;
                tau = target;
                out[i] = Point(y.clone());
            }
        }
        Ok(out)
    }

    /// `φ(s, g)` together with `D_g φ(s, g)`, from the variational equation
    /// `J' = DG(φ) J`, `J(0) = I` in `τ = log s`.
    pub fn flow_with_jacobian(&self, g: &[f64], s: f64) -> Result<(Point, DMatrix<f64>)> {
        self.check_start(g)?;
        if !(s > 0.0) {
            return Err(Error::OutOfRange(format!("flow parameter s = {s} must be positive")));
        }
        let n = g.len();
        let mut y0 = g.to_vec();
        for i in 0..n {
            for j in 0..n {
                y0.push(if i == j { 1.0 } else { 0.0 });
            }
        }
        let eps = self.opts.exclusion.eps;
        let rhs = |tau: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
            let (gv, dg) = radial_field_jacobian(&self.norm, &y[..n], eps)
                .map_err(|_| Error::EnteredExclusionZone { s: tau.exp() })?;
            dy[..n].copy_from_slice(&gv);
            let jm = &y[n..];
            for i in 0..n {
                for j in 0..n {
                    dy[n + i * n + j] = (0..n).map(|k| dg[i * n + k] * jm[k * n + j]).sum();
                }
            }
            Ok(())
        };
        let y = self.opts.ode.integrate(rhs, 0.0, &y0, s.ln())?;
        Ok((Point(y[..n].to_vec()), DMatrix::from_row_slice(n, n, &y[n..])))
    }

    /// Ambient tangent `∂φ/∂s` at a point `x = φ(s, g)`.
    pub fn tangent(&self, x: &[f64], s: f64) -> Result<Vec<f64>> {
        let g = radial_field(&self.norm, x, self.opts.exclusion.eps)?;
        Ok(g.into_iter().map(|v| v / s).collect())
    }

    /// Horizontal components of `∂φ/∂s` at `x = φ(s, g)`:
    /// `N(x)/s · ∇_0N(x)/|∇_0N(x)|²`.
    pub fn horizontal_tangent(&self, x: &[f64], s: f64) -> Result<HorizontalVector> {
        let t = self.tangent(x, s)?;
        Ok(HorizontalVector(t[..self.spec().horizontal_dim()].to_vec()))
    }
}

/// `φ(s_target, g)` by adaptive integration of the flow ODE from `s = 1`.
pub fn integrate_flow(norm: &HomNorm, g: &Point, s_target: f64, opts: FlowOptions) -> Result<Point> {
    PolarFlow::new(norm).with_options(opts).integrate(g, s_target)
}

const SPHERE_TOL: f64 = 1e-10;

fn check_on_sphere(norm: &HomNorm, a: &[f64]) -> Result<()> {
    let v = norm.value(a)?;
    if (v - 1.0).abs() > SPHERE_TOL {
        return Err(Error::OutOfRange(format!("point has N = {v}, expected a point of the unit sphere")));
    }
    Ok(())
}

/// `|∇_0N(a)|` for `a` on the unit sphere, rejecting the characteristic set.
pub fn gradient_scale(norm: &HomNorm, a: &Point, eps: f64) -> Result<f64> {
    check_on_sphere(norm, a)?;
    let d = norm.dual_at(a)?;
    let frame = frame_generic(norm.spec(), &a.0);
    let g: f64 = frame
        .iter()
        .map(|c| c.iter().zip(&d.grad).map(|(u, v)| u * v).sum::<f64>().powi(2))
        .sum::<f64>()
        .sqrt();
    if g < eps {
        return Err(Error::OnCharacteristicSet(g));
    }
    Ok(g)
}

/// Speed of the polar curve through `a ∈ S`: `1/|∇_0N(a)|`.
pub fn curve_speed(norm: &HomNorm, a: &Point) -> Result<f64> {
    Ok(1.0 / gradient_scale(norm, a, DEFAULT_EPS_Z)?)
}

/// Unit-speed reparametrization `β_a(s) = γ_a(λ_a s)`, `λ_a = |∇_0N(a)|`.
pub fn arclength_curve(flow: &PolarFlow, a: &Point, s: f64) -> Result<Point> {
    let lambda = gradient_scale(flow.norm(), a, flow.options().exclusion.eps)?;
    flow.flow(a, lambda * s)
}

/// `dγ_a/ds` for the closed-form engines, by differentiating in `s`.
pub fn closed_tangent(flow: &PolarFlow, a: &[f64], s: f64) -> Option<Vec<f64>> {
    let seeds: Vec<Dual> = a.iter().map(|&v| Dual::constant(v)).collect();
    flow.closed_generic(&seeds, Dual::variable(s, 0, 1)).map(|p| p.iter().map(|d| d.partial(0)).collect())
}

/// Max-norm gap between an ambient vector `v` at `x` and the horizontal
/// vector `Σ v_i X_i(x)` built from its first `m` entries; zero iff `v` is
/// horizontal.
pub fn horizontality_defect(spec: &GroupSpec, x: &[f64], v: &[f64]) -> f64 {
    let m = spec.horizontal_dim();
    let frame = frame_generic(spec, x);
    let mut lifted = vec![0.0; x.len()];
    for (c, a) in frame.iter().zip(&v[..m]) {
        for (l, ck) in lifted.iter_mut().zip(c) {
            *l += a * ck;
        }
    }
    lifted.iter().zip(v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::builtin;

    fn heis_flow() -> PolarFlow {
        PolarFlow::new(&HomNorm::folland(&builtin("heis1").unwrap()).unwrap())
    }

    #[test]
    fn horizontal_ray_when_alpha_vanishes() {
        for s in [0.1, 0.5, 2.0, 7.0] {
            let p = heisenberg_flow_closed(1, &Point(vec![1.0, 0.0, 0.0]), s).unwrap();
            assert!(p.distance(&Point(vec![s, 0.0, 0.0])) < 1e-15);
        }
    }

    #[test]
    fn full_rotation_example() {
        let r = (0.5f64).sqrt().sqrt(); // |z|² = 2^{-1/2}
        let t = (0.5f64).sqrt();
        let a = Point(vec![r, 0.0, t]);
        let s = (2.0 * std::f64::consts::PI).exp();
        let p = heisenberg_flow_closed(1, &a, s).unwrap();
        let expected = Point(vec![s * r, 0.0, s * s * t]);
        assert!(p.distance(&expected) < 1e-9 * s * s);
    }

    #[test]
    fn vertical_axis_rejected() {
        assert!(matches!(heisenberg_flow_closed(1, &Point(vec![0.0, 0.0, 1.0]), 2.0), Err(Error::OnVerticalAxis(_))));
        assert!(heis_flow().integrate(&[0.0, 0.0, 1.0], 2.0).is_err());
    }

    #[test]
    fn euclidean_flow_is_scaling() {
        let f = PolarFlow::new(&HomNorm::folland(&builtin("euclid3").unwrap()).unwrap());
        let g = [0.3, -0.4, 1.2];
        let p = f.integrate(&g, 2.0).unwrap();
        assert!(p.distance(&Point(vec![0.6, -0.8, 2.4])) < 1e-9);
    }

    #[test]
    fn curve_speed_examples() {
        let f = heis_flow();
        assert!((curve_speed(f.norm(), &Point(vec![1.0, 0.0, 0.0])).unwrap() - 1.0).abs() < 1e-14);
        let e = HomNorm::folland(&builtin("euclid3").unwrap()).unwrap();
        assert!((curve_speed(&e, &Point(vec![0.0, 0.6, 0.8])).unwrap() - 1.0).abs() < 1e-14);
        assert!(curve_speed(f.norm(), &Point(vec![2.0, 0.0, 0.0])).is_err());
        assert!(matches!(curve_speed(f.norm(), &Point(vec![0.0, 0.0, 1.0])), Err(Error::OnCharacteristicSet(_))));
    }

    #[test]
    fn closed_form_curves_are_horizontal() {
        let f = heis_flow();
        let a = [0.6, 0.5, 0.62];
        for s in [0.3, 1.0, 4.0] {
            let x = f.flow(&a, s).unwrap();
            let v = closed_tangent(&f, &a, s).unwrap();
            assert!(horizontality_defect(f.spec(), &x, &v) < 1e-12);
        }
    }

    #[test]
    fn ode_trajectory_matches_pointwise_flow() {
        let f = heis_flow().with_engine(FlowEngine::Ode);
        let a = [0.7, -0.3, 0.5];
        let s = [0.3, 2.0, 0.9, 1.0, 5.0];
        let traj = f.trajectory(&a, &s).unwrap();
        for (p, &si) in traj.iter().zip(&s) {
            let q = heisenberg_flow_closed(1, &Point(a.to_vec()), si).unwrap();
            assert!(p.distance(&q) < 1e-8 * si * si, "s = {si}");
        }
    }
}
