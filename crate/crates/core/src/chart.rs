//! Parametrizations of the unit sphere `S = {N = 1}`.
//!
//! On a step-two group with `N⁴ = |x|⁴ + c|z|²` the chart is
//! `x = (cos θ)^{1/2} ω`, `z = c^{−1/2} sin θ ζ` with `ω`, `ζ` on round unit
//! spheres written in hyperspherical angles. When the center is a line `ζ`
//! is a sign and `θ` runs over `(−π/2, π/2)`; otherwise `θ ∈ (0, π/2)`.
//! The first parameter is `v` with `θ = (π/2) sin v`, which makes
//! `(cos θ)^{1/2}` smooth at the poles. The ends where `x` vanishes are
//! trimmed so that `|x| ≥ ε_Z` and the chart stays outside the exclusion
//! tube. On Euclidean space the chart is the round sphere.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::flow::DEFAULT_EPS_Z;
use crate::jet::{Dual, Scalar};
use crate::norms::{HomNorm, NormKind};

const ON_SPHERE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Layout {
    StepTwo { m: usize, k: usize, c: f64 },
    Round { n: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SphereChart {
    layout: Layout,
    domain: Vec<(f64, f64)>,
    /// Rotation by this angle in the `(x_1, x_m)` plane, applied after the
    /// angle map. Gives a second chart overlapping the first.
    tilt: f64,
    norm: HomNorm,
}

/// Unit vector on `S^{d−1}` from `d−1` hyperspherical angles.
fn round_sphere<S: Scalar>(angles: &[S], d: usize) -> Vec<S> {
    if d == 1 {
        return vec![S::from(1.0)];
    }
    let mut out = Vec::with_capacity(d);
    let mut prod = S::from(1.0);
    for a in angles {
        out.push(prod.clone() * a.cos());
        prod = prod * a.sin();
    }
    out.push(prod);
    out
}

fn round_domain(d: usize) -> Vec<(f64, f64)> {
    if d < 2 {
        return Vec::new();
    }
    let mut v = vec![(0.0, PI); d - 2];
    v.push((0.0, 2.0 * PI));
    v
}

impl SphereChart {
    /// The chart for the sphere of `norm`, trimmed for the default
    /// exclusion radius.
    pub fn new(norm: &HomNorm) -> Result<Self> {
        Self::with_exclusion(norm, DEFAULT_EPS_Z)
    }

    pub fn with_exclusion(norm: &HomNorm, eps_z: f64) -> Result<Self> {
        let spec = norm.spec();
        let (layout, domain) = match norm.kind() {
            NormKind::EuclideanAbs => {
                let n = spec.dim();
                if n < 2 {
                    return Err(Error::Unsupported("sphere chart needs dimension at least 2".into()));
                }
                (Layout::Round { n }, round_domain(n))
            }
            NormKind::Koranyi | NormKind::Kaplan(_) => {
                let (m, k, c) = (spec.horizontal_dim(), spec.center_dim(), norm.center_weight());
                // |x|² = cos θ ≥ ε² where π/2 − θ = (π/2)(1 − sin v) ≥ ε²
                let vmax = (1.0 - 2.0 * eps_z * eps_z / PI).asin();
                let theta = if k == 1 { (-vmax, vmax) } else { (0.0, vmax) };
                let mut domain = vec![theta];
                domain.extend(round_domain(m));
                domain.extend(round_domain(k));
                (Layout::StepTwo { m, k, c }, domain)
            }
        };
        Ok(SphereChart { layout, domain, tilt: 0.0, norm: norm.clone() })
    }

    /// The same chart composed with a rotation of the horizontal layer.
    pub fn tilted(mut self, angle: f64) -> Self {
        self.tilt = angle;
        self
    }

    pub fn norm(&self) -> &HomNorm {
        &self.norm
    }

    /// Number of parameters, `dim G − 1`.
    pub fn param_dim(&self) -> usize {
        self.domain.len()
    }

    /// Parameter box.
    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn contains(&self, xi: &[f64]) -> bool {
        xi.len() == self.domain.len() && xi.iter().zip(&self.domain).all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }

    /// `a(ξ)`, generic so the chart can be differentiated.
    pub fn point_generic<S: Scalar>(&self, xi: &[S]) -> Vec<S> {
        let mut out = match self.layout {
            Layout::Round { n } => round_sphere(xi, n),
            Layout::StepTwo { m, k, c } => {
                let theta = xi[0].sin() * (PI / 2.0);
                let r = theta.cos().sqrt();
                let h = theta.sin() * (1.0 / c.sqrt());
                let mut out: Vec<S> = round_sphere(&xi[1..m], m).into_iter().map(|w| w * r.clone()).collect();
                out.extend(round_sphere(&xi[m..m + k - 1], k).into_iter().map(|z| z * h.clone()));
                out
            }
        };
        if self.tilt != 0.0 {
            let last = match self.layout {
                Layout::Round { n } => n - 1,
                Layout::StepTwo { m, .. } => m - 1,
            };
            let (c, s) = (self.tilt.cos(), self.tilt.sin());
            let (a, b) = (out[0].clone(), out[last].clone());
            out[0] = a.clone() * c - b.clone() * s;
            out[last] = a * s + b * c;
        }
        out
    }

    /// `a(ξ)`, checked to lie on `S` and outside the exclusion tube.
    pub fn point(&self, xi: &[f64]) -> Result<Vec<f64>> {
        if xi.len() != self.param_dim() {
            return Err(Error::DimensionMismatch { expected: self.param_dim(), actual: xi.len() });
        }
        if !self.contains(xi) {
            return Err(Error::OutOfRange(format!("chart parameter {xi:?} is outside the domain")));
        }
        let a = self.point_generic(xi);
        let v = self.norm.value(&a)?;
        if (v - 1.0).abs() > ON_SPHERE_TOL {
            return Err(Error::OutOfRange(format!("chart point has N = {v}")));
        }
        Ok(a)
    }

    /// `a(ξ)` with its derivative in `ξ`: a `dim × (dim−1)` matrix.
    pub fn point_with_derivative(&self, xi: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let a = self.point(xi)?;
        let d = self.point_generic(&Dual::seed(xi));
        let n = a.len();
        let k = xi.len();
        Ok((a, DMatrix::from_fn(n, k, |i, j| d[i].partial(j))))
    }

    /// Euclidean surface element `sqrt(det(DaᵀDa))` of the chart.
    pub fn surface_element(&self, xi: &[f64]) -> Result<f64> {
        let (_, da) = self.point_with_derivative(xi)?;
        Ok((da.transpose() * &da).determinant().max(0.0).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::builtin;

    fn chart(name: &str) -> SphereChart {
        SphereChart::new(&HomNorm::folland(&builtin(name).unwrap()).unwrap()).unwrap()
    }

    #[test]
    fn chart_points_lie_on_the_sphere() {
        for name in ["heis1", "heis2", "euclid3", "quaternionic", "htype-heis1-j2"] {
            let ch = chart(name);
            let xi: Vec<f64> = ch.domain().iter().map(|(lo, hi)| lo + 0.37 * (hi - lo)).collect();
            let a = ch.point(&xi).unwrap();
            assert!((ch.norm().value(&a).unwrap() - 1.0).abs() < 1e-14, "{name}");
            assert_eq!(a.len(), ch.norm().spec().dim());
            let tilted = ch.clone().tilted(0.4).point(&xi).unwrap();
            assert!((ch.norm().value(&tilted).unwrap() - 1.0).abs() < 1e-14, "{name}");
        }
    }

    #[test]
    fn euclidean_surface_element_is_sin_theta() {
        let ch = chart("euclid3");
        for (t, p) in [(0.3, 1.0), (1.2, 4.0), (2.9, 0.1)] {
            let e = ch.surface_element(&[t, p]).unwrap();
            assert!((e - f64::sin(t)).abs() < 1e-14);
        }
    }

    #[test]
    fn heisenberg_chart_shape() {
        let ch = chart("heis1");
        assert_eq!(ch.param_dim(), 2);
        let a = ch.point(&[0.0, 0.0]).unwrap();
        assert_eq!(a, vec![1.0, 0.0, 0.0]);
        assert!(ch.point(&[2.0, 0.0]).is_err());
        let top = ch.point(&[ch.domain()[0].1, 0.0]).unwrap();
        assert!((top[0] - DEFAULT_EPS_Z).abs() < 1e-9);
        let q = chart("quaternionic");
        assert_eq!(q.param_dim(), 6);
        assert!(q.domain()[0].0 == 0.0);
    }
}
