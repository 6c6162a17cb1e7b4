//! p-capacity of ring domains `{a < N < b}`.
//!
//! The competitor is the radial function `v = (U(N) − U(b)) / (U(a) − U(b))`
//! where `U` is the profile of `u_p`, so `v = 1` on the inner sphere and
//! `v = 0` on the outer one.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::group::frame_generic;
use crate::integrate::{Curves, OuterRule, PolarSystem};
use crate::norms::{Branch, SingularSolution};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RingSpec {
    pub a: f64,
    pub b: f64,
    pub p: f64,
}

impl RingSpec {
    pub fn new(a: f64, b: f64, p: f64) -> Result<Self> {
        if !(a > 0.0 && b > a) {
            return Err(Error::InvalidSpec(format!("ring needs 0 < a < b, got a = {a}, b = {b}")));
        }
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::OutOfRange(format!("p = {p} must lie in (1, ∞)")));
        }
        Ok(RingSpec { a, b, p })
    }

    /// The ring scaled by `λ`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        RingSpec::new(lambda * self.a, lambda * self.b, self.p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CapacityMethod {
    /// `∫_ring |∇_0 v|^p dμ` by horizontal polar quadrature.
    Polar,
    /// The radial reduction `|U(a) − U(b)|^{−p} ∫_S |∇_0N|^p dσ ∫_a^b |U'(s)|^p s^{Q−1} ds`.
    Closed,
}

fn profile(branch: Branch, r: f64) -> f64 {
    match branch {
        Branch::Power(k) => r.powf(k),
        Branch::Log => -r.ln(),
        Branch::Infinity => r,
    }
}

pub fn ring_capacity(system: &PolarSystem, ring: &RingSpec, method: CapacityMethod, tol: f64) -> Result<f64> {
    let norm = system.norm();
    let spec = system.spec();
    spec.require_q_above_two()?;
    let u = SingularSolution::new(norm, ring.p)?;
    let branch = u.branch();
    let jump = (profile(branch, ring.a) - profile(branch, ring.b)).abs();
    let p = ring.p;
    let q = spec.hom_dimension() as f64;
    match method {
        CapacityMethod::Polar => {
            let outer = OuterRule::for_dim(system.chart().param_dim());
            let (v, _, _) = system.polar_integral(Curves::Horizontal, (ring.a, ring.b), &[], outer, tol, |_, g| {
                let d = u.dual_at(g)?;
                let n2: f64 = frame_generic(spec, g)
                    .iter()
                    .map(|c| c.iter().zip(&d.grad).map(|(a, b)| a * b).sum::<f64>().powi(2))
                    .sum();
                Ok((n2.sqrt() / jump).powf(p))
            })?;
            Ok(v)
        }
        CapacityMethod::Closed => {
            let moment = system.sigma_moment(p, tol)?;
            let radial = match branch {
                Branch::Power(k) => {
                    let e = (k - 1.0) * p + q;
                    k.abs().powf(p) * (ring.b.powf(e) - ring.a.powf(e)) / e
                }
                Branch::Log => (ring.b / ring.a).ln(),
                Branch::Infinity => unreachable!("finite p checked by RingSpec"),
            };
            Ok(moment * radial / jump.powf(p))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::builtin;
    use crate::norms::HomNorm;
    use std::f64::consts::PI;

    #[test]
    fn ring_validation() {
        assert!(RingSpec::new(2.0, 1.0, 2.0).is_err());
        assert!(RingSpec::new(1.0, 2.0, 1.0).is_err());
        assert!(RingSpec::new(1.0, 2.0, 3.0).is_ok());
    }

    #[test]
    fn newtonian_capacity() {
        let sys = PolarSystem::new(&HomNorm::folland(&builtin("euclid3").unwrap()).unwrap()).unwrap();
        let ring = RingSpec::new(1.0, 2.0, 2.0).unwrap();
        for m in [CapacityMethod::Polar, CapacityMethod::Closed] {
            let c = ring_capacity(&sys, &ring, m, 1e-10).unwrap();
            assert!((c - 8.0 * PI).abs() < 1e-6 * 8.0 * PI, "{m:?}: {c}");
        }
    }

    #[test]
    fn heisenberg_methods_agree() {
        let sys = PolarSystem::new(&HomNorm::folland(&builtin("heis1").unwrap()).unwrap()).unwrap();
        for p in [2.0, 4.0, 6.0] {
            let ring = RingSpec::new(1.0, 3.0, p).unwrap();
            let a = ring_capacity(&sys, &ring, CapacityMethod::Polar, 1e-10).unwrap();
            let b = ring_capacity(&sys, &ring, CapacityMethod::Closed, 1e-10).unwrap();
            assert!((a - b).abs() < 1e-8 * b, "p = {p}: {a} {b}");
        }
    }
}
