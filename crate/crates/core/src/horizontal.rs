//! Horizontal calculus: `∇_0`, `div_0`, the sub-Laplacian and the
//! horizontal p- and ∞-Laplacians, all from exact jets.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::group::{frame_generic, GroupSpec, HorizontalVector, Point};
use crate::jet::{Dual, Jet2};

/// Gradient norms below this make `L_p` singular for `p ≠ 2`.
pub const VANISHING_GRADIENT: f64 = 1e-12;

/// Second-order local data of a field at one point, with the horizontal
/// derivatives `X_i f` kept as first-order jets.
#[derive(Clone, Debug)]
pub struct HorizontalJet {
    pub point: Vec<f64>,
    pub jet: Jet2,
    /// Frame coefficients as first-order jets (value and ambient gradient).
    pub frame: Vec<Vec<Dual>>,
    /// `X_i f` as first-order jets.
    pub xgrad: Vec<Dual>,
}

impl HorizontalJet {
    pub fn new(spec: &GroupSpec, f: &dyn ScalarField, g: &[f64]) -> Result<Self> {
        spec.check_point(g)?;
        let jet = f.jet_at(g)?;
        Ok(Self::from_jet(spec, g, jet))
    }

    pub fn from_jet(spec: &GroupSpec, g: &[f64], jet: Jet2) -> Self {
        let frame = frame_generic(spec, &Dual::seed(g));
        let n = g.len();
        let xgrad = frame
            .iter()
            .map(|c| {
                let value = (0..n).map(|k| c[k].value * jet.partial(k)).sum();
                let grad = (0..n)
                    .map(|l| (0..n).map(|k| c[k].partial(l) * jet.partial(k) + c[k].value * jet.hess_at(k, l)).sum())
                    .collect();
                Dual { value, grad }
            })
            .collect();
        HorizontalJet { point: g.to_vec(), jet, frame, xgrad }
    }

    /// Applies every `X_i` to a first-order jet.
    pub fn apply(&self, d: &Dual) -> Vec<f64> {
        self.frame.iter().map(|c| c.iter().enumerate().map(|(k, ck)| ck.value * d.partial(k)).sum()).collect()
    }

    pub fn hgrad(&self) -> HorizontalVector {
        HorizontalVector(self.xgrad.iter().map(|d| d.value).collect())
    }

    pub fn hgrad_norm(&self) -> f64 {
        self.hgrad().norm()
    }

    /// `|∇_0 f|²` as a first-order jet.
    pub fn hgrad_norm_sq(&self) -> Dual {
        self.xgrad.iter().fold(Dual::constant(0.0), |acc, d| acc + d.clone() * d.clone())
    }

    /// Horizontal divergence of a horizontal field given by first-order jets.
    pub fn div(&self, comps: &[Dual]) -> f64 {
        self.frame
            .iter()
            .zip(comps)
            .map(|(c, a)| c.iter().enumerate().map(|(k, ck)| ck.value * a.partial(k)).sum::<f64>())
            .sum()
    }

    /// `L f = Σ X_i X_i f`.
    pub fn sublaplacian(&self) -> f64 {
        self.div(&self.xgrad)
    }

    /// `L f = div(A ∇f)` with `A = Σ c_i c_iᵀ`; agrees with
    /// [`sublaplacian`](Self::sublaplacian) because each `X_i` is
    /// divergence-free.
    pub fn sublaplacian_divergence_form(&self) -> f64 {
        let n = self.point.len();
        let mut total = 0.0;
        for k in 0..n {
            for l in 0..n {
                let mut a = 0.0;
                let mut da_k = 0.0;
                for c in &self.frame {
                    a += c[k].value * c[l].value;
                    da_k += c[k].partial(k) * c[l].value + c[k].value * c[l].partial(k);
                }
                total += a * self.jet.hess_at(k, l) + da_k * self.jet.partial(l);
            }
        }
        total
    }

    /// `L_∞ f = ½ ⟨∇_0 |∇_0 f|², ∇_0 f⟩`.
    pub fn infty_laplacian(&self) -> f64 {
        let h = self.hgrad_norm_sq();
        let xh = self.apply(&h);
        0.5 * xh.iter().zip(&self.xgrad).map(|(a, b)| a * b.value).sum::<f64>()
    }

    /// `L_p f = |∇_0 f|^{p−2} L f + (p−2)|∇_0 f|^{p−4} L_∞ f`.
    pub fn p_laplacian(&self, p: f64) -> Result<f64> {
        if p == 2.0 {
            return Ok(self.sublaplacian());
        }
        let g = self.hgrad_norm();
        if g < VANISHING_GRADIENT {
            return Err(Error::VanishingGradient { norm: g, p });
        }
        Ok(g.powf(p - 2.0) * self.sublaplacian() + (p - 2.0) * g.powf(p - 4.0) * self.infty_laplacian())
    }

    /// `div_0(|∇_0 f|^{p−2} ∇_0 f)` assembled directly from the weighted
    /// components' first-order jets.
    pub fn p_laplacian_literal(&self, p: f64) -> Result<f64> {
        let h = self.hgrad_norm_sq();
        if p != 2.0 && h.value.sqrt() < VANISHING_GRADIENT {
            return Err(Error::VanishingGradient { norm: h.value.sqrt(), p });
        }
        let w = Dual {
            value: h.value.powf(0.5 * p - 1.0),
            grad: h.grad.iter().map(|d| (0.5 * p - 1.0) * h.value.powf(0.5 * p - 2.0) * d).collect(),
        };
        let comps: Vec<Dual> = self.xgrad.iter().map(|a| w.clone() * a.clone()).collect();
        Ok(self.div(&comps))
    }
}

/// `∇_0 f(g) = (X_1 f, …, X_m f)`.
pub fn hgrad(spec: &GroupSpec, f: &dyn ScalarField, g: &Point) -> Result<HorizontalVector> {
    spec.check_point(g)?;
    let d = f.dual_at(g)?;
    let frame = frame_generic(spec, &g.0);
    Ok(HorizontalVector(frame.iter().map(|c| c.iter().zip(&d.grad).map(|(a, b)| a * b).sum()).collect()))
}

/// `div_0 V = Σ X_i(a_i)` for `V = Σ a_i X_i`.
pub fn hdiv(spec: &GroupSpec, components: &[&dyn ScalarField], g: &Point) -> Result<f64> {
    spec.check_point(g)?;
    if components.len() != spec.horizontal_dim() {
        return Err(Error::DimensionMismatch { expected: spec.horizontal_dim(), actual: components.len() });
    }
    let frame = frame_generic(spec, &g.0);
    let mut total = 0.0;
    for (c, a) in frame.iter().zip(components) {
        let d = a.dual_at(g)?;
        total += c.iter().zip(&d.grad).map(|(u, v)| u * v).sum::<f64>();
    }
    Ok(total)
}

pub fn sublaplacian(spec: &GroupSpec, f: &dyn ScalarField, g: &Point) -> Result<f64> {
    Ok(HorizontalJet::new(spec, f, g)?.sublaplacian())
}

pub fn infty_laplacian(spec: &GroupSpec, f: &dyn ScalarField, g: &Point) -> Result<f64> {
    Ok(HorizontalJet::new(spec, f, g)?.infty_laplacian())
}

pub fn p_laplacian(spec: &GroupSpec, f: &dyn ScalarField, g: &Point, p: f64) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::OutOfRange(format!("p = {p} must lie in (1, ∞)")));
    }
    HorizontalJet::new(spec, f, g)?.p_laplacian(p)
}
