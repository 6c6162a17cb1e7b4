//! The weak form of `−L_p u_p = c δ_e`: for a test function `φ`,
//! `∫ |∇_0u_p|^{p−2} ⟨∇_0u_p, ∇_0φ⟩ dμ` is a constant multiple of `φ(e)`.

use crate::error::{Error, Result};
use crate::field::{GenericField, ScalarField};
use crate::group::{dilate_generic, frame_generic, GroupSpec};
use crate::integrate::{Curves, OuterRule, PolarSystem};
use crate::jet::Scalar;
use crate::norms::{Branch, HomNorm, NormKind, SingularSolution};

/// Smallest eigenvalue of the quadratic form used by [`BumpProfile::Skewed`].
fn skew_lambda_min() -> f64 {
    1.5 - 0.34f64.sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BumpProfile {
    /// `exp(1 − 1/(1 − |g|²/R²))`.
    Round { radius: f64 },
    /// `(1 + 0.5 g_1g_2) exp(1 − 1/(1 − q(g)/R²))` with the non-diagonal
    /// form `q = g_1² + 0.6 g_1g_2 + 2g_2² + Σ_{i>2} g_i²`.
    ///
    /// Not invariant under rotations of the horizontal layer, so along the
    /// spiralling Heisenberg polar curves the radial integrand oscillates
    /// like `cos(2α log s)`; quadrature near the poles is expensive.
    Skewed { radius: f64 },
    /// `(1 + 0.5 z_1) exp(1 − 1/(1 − q(g)))` with
    /// `q = (|x|² + 2|z|² + 0.6 R z_1)/R²`: depends on `|x|` and `z` only,
    /// but is neither a function of `N` nor even in `z`. On Euclidean space
    /// it reduces to [`Round`](Self::Round).
    Layered { radius: f64 },
}

impl BumpProfile {
    /// Profiles used for cross-profile comparisons.
    pub fn catalog() -> [BumpProfile; 3] {
        [BumpProfile::Round { radius: 1.0 }, BumpProfile::Round { radius: 1.7 }, BumpProfile::Layered { radius: 1.2 }]
    }

    /// Radius of a Euclidean ball containing the support.
    pub fn ambient_radius(&self) -> f64 {
        match *self {
            BumpProfile::Round { radius } => radius,
            BumpProfile::Skewed { radius } => radius / skew_lambda_min().sqrt(),
            // |x|² < 1.045 R² and |z| < 0.873 R on the support
            BumpProfile::Layered { radius } => 1.35 * radius,
        }
    }
}

/// A compactly supported smooth test function, optionally precomposed
/// with a dilation.
#[derive(Clone, Debug, PartialEq)]
pub struct Bump {
    pub profile: BumpProfile,
    pub lambda: f64,
    spec: GroupSpec,
}

impl Bump {
    pub fn new(spec: &GroupSpec, profile: BumpProfile) -> Self {
        Bump { profile, lambda: 1.0, spec: spec.clone() }
    }

    /// `φ ∘ δ_λ`.
    pub fn dilated(mut self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidDilation(lambda));
        }
        self.lambda *= lambda;
        Ok(self)
    }

    /// `N ≤` this value on the support.
    pub fn norm_radius(&self, norm: &HomNorm) -> f64 {
        let r = self.profile.ambient_radius();
        let base = match norm.kind() {
            NormKind::EuclideanAbs => r,
            NormKind::Koranyi | NormKind::Kaplan(_) => (r.powi(4) + norm.center_weight() * r * r).powf(0.25),
        };
        base / self.lambda
    }
}

impl GenericField for Bump {
    fn label(&self) -> String {
        format!("bump({:?}, lambda={})", self.profile, self.lambda)
    }

    fn eval<S: Scalar>(&self, x: &[S]) -> Result<S> {
        let y = if self.lambda == 1.0 { x.to_vec() } else { dilate_generic(&self.spec, S::from(self.lambda), x) };
        let (q, pre) = match self.profile {
            BumpProfile::Round { radius } => (crate::jet::sum_sq(&y) * (1.0 / (radius * radius)), S::from(1.0)),
            BumpProfile::Skewed { radius } => {
                let mut q = y[0].clone() * y[0].clone()
                    + y[0].clone() * y[1].clone() * 0.6
                    + y[1].clone() * y[1].clone() * 2.0;
                for v in &y[2..] {
                    q = q + v.clone() * v.clone();
                }
                (q * (1.0 / (radius * radius)), y[0].clone() * y[1].clone() * 0.5 + 1.0)
            }
            BumpProfile::Layered { radius } => {
                let m = self.spec.horizontal_dim();
                let r2 = radius * radius;
                if m == y.len() {
                    (crate::jet::sum_sq(&y) * (1.0 / r2), S::from(1.0))
                } else {
                    let z1 = y[m].clone();
                    let q = crate::jet::sum_sq(&y[..m]) + crate::jet::sum_sq(&y[m..]) * 2.0 + z1.clone() * (0.6 * radius);
                    (q * (1.0 / r2), z1 * 0.5 + 1.0)
                }
            }
        };
        if q.value() >= 1.0 {
            return Ok(S::from(0.0));
        }
        let e = (S::from(1.0) - (S::from(1.0) - q).recip()).exp();
        Ok(pre * e)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeakCheck {
    pub integral: f64,
    pub phi_at_identity: f64,
    pub ratio: f64,
}

fn horizontal_gradient(spec: &GroupSpec, f: &dyn ScalarField, g: &[f64]) -> Result<Vec<f64>> {
    let d = f.dual_at(g)?;
    Ok(frame_generic(spec, g).iter().map(|c| c.iter().zip(&d.grad).map(|(a, b)| a * b).sum()).collect())
}

/// `∫ |∇_0u_p|^{p−2} ⟨∇_0u_p, ∇_0φ⟩ dμ` by horizontal polar quadrature
/// over `0 < N < N_max(φ)`, and its ratio to `φ(e)`.
pub fn weak_fundamental_check(system: &PolarSystem, p: f64, bump: &Bump, tol: f64) -> Result<WeakCheck> {
    let norm = system.norm();
    let spec = system.spec();
    let u = SingularSolution::new(norm, p)?;
    if matches!(u.branch(), Branch::Infinity) {
        return Err(Error::OutOfRange("the weak check needs a finite p".into()));
    }
    let phi_e = bump.value(&vec![0.0; spec.dim()])?;
    if phi_e == 0.0 {
        return Err(Error::InvalidSpec("test function vanishes at the identity".into()));
    }
    let outer = OuterRule::for_dim(system.chart().param_dim());
    let (integral, _, _) =
        system.polar_integral(Curves::Horizontal, (0.0, bump.norm_radius(norm)), &[], outer, tol, |_, g| {
            let gu = horizontal_gradient(spec, &u, g)?;
            let gp = horizontal_gradient(spec, bump, g)?;
            let n2: f64 = gu.iter().map(|v| v * v).sum();
            let dot: f64 = gu.iter().zip(&gp).map(|(a, b)| a * b).sum();
            Ok(n2.powf(0.5 * p - 1.0) * dot)
        })?;
    Ok(WeakCheck { integral, phi_at_identity: phi_e, ratio: integral / phi_e })
}

/// The value the ratio should take: `−|k|^{p−2} k ∫_S |∇_0N|^p dσ` with
/// `k = (p−Q)/(p−1)`, and `k = −1` on the logarithmic branch.
pub fn predicted_weak_ratio(system: &PolarSystem, p: f64, tol: f64) -> Result<f64> {
    let u = SingularSolution::new(system.norm(), p)?;
    let k = match u.branch() {
        Branch::Power(k) => k,
        Branch::Log => -1.0,
        Branch::Infinity => return Err(Error::OutOfRange("the weak check needs a finite p".into())),
    };
    Ok(-k.abs().powf(p - 2.0) * k * system.sigma_moment(p, tol)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::builtin;
    use std::f64::consts::PI;

    #[test]
    fn bump_values() {
        let h = builtin("heis1").unwrap();
        let b = Bump::new(&h, BumpProfile::Round { radius: 1.0 });
        assert_eq!(b.value(&[0.0, 0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(b.value(&[1.0, 0.0, 0.0]).unwrap(), 0.0);
        let s = Bump::new(&h, BumpProfile::Skewed { radius: 1.2 });
        assert_eq!(s.value(&[0.0, 0.0, 0.0]).unwrap(), 1.0);
        let l = Bump::new(&h, BumpProfile::Layered { radius: 1.2 });
        assert_eq!(l.value(&[0.0, 0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(l.value(&[0.0, 0.0, 1.1]).unwrap(), 0.0);
        assert!(l.value(&[0.0, 0.0, -0.5]).unwrap() != l.value(&[0.0, 0.0, 0.5]).unwrap());
        let d = b.clone().dilated(2.0).unwrap();
        assert_eq!(d.value(&[0.3, 0.1, 0.05]).unwrap(), b.value(&[0.6, 0.2, 0.2]).unwrap());
    }

    #[test]
    fn skew_form_eigenvalue() {
        // det([[1, 0.3], [0.3, 2]] − λI) = 0
        let lam = skew_lambda_min();
        assert!(((1.0 - lam) * (2.0 - lam) - 0.09).abs() < 1e-14);
    }

    #[test]
    fn newtonian_ratio_on_r3() {
        let norm = HomNorm::folland(&builtin("euclid3").unwrap()).unwrap();
        let sys = PolarSystem::new(&norm).unwrap();
        let b = Bump::new(norm.spec(), BumpProfile::Round { radius: 1.0 });
        let w = weak_fundamental_check(&sys, 2.0, &b, 1e-10).unwrap();
        assert!((w.ratio - 4.0 * PI).abs() < 1e-6 * 4.0 * PI, "{}", w.ratio);
    }
}
