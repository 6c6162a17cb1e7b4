//! Forward-mode jets.
//!
//! Every evaluable map in this crate is written once, generically over
//! [`Scalar`], and evaluated with one of three carriers:
//!
//! * `f64` for plain values,
//! * [`Dual`] for value and gradient,
//! * [`Jet2`] for value, gradient and Hessian.
//!
//! Derivative vectors may be empty, which stands for "all zero". This lets
//! constants built with `From<f64>` mix freely with seeded variables of any
//! dimension.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// A number type the generic evaluators can run on.
pub trait Scalar:
    Clone
    + fmt::Debug
    + Send
    + Sync
    + From<f64>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn value(&self) -> f64;

    /// Applies a unary map `h` given `h(v)`, `h'(v)` and `h''(v)` at `v = self.value()`.
    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self;

    fn sqrt(&self) -> Self {
        let v = self.value().sqrt();
        self.chain(v, 0.5 / v, -0.25 / (v * v * v))
    }

    fn exp(&self) -> Self {
        let e = self.value().exp();
        self.chain(e, e, e)
    }

    fn ln(&self) -> Self {
        let v = self.value();
        self.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
    }

    fn powf(&self, e: f64) -> Self {
        let v = self.value();
        self.chain(v.powf(e), e * v.powf(e - 1.0), e * (e - 1.0) * v.powf(e - 2.0))
    }

    fn powi(&self, n: i32) -> Self {
        let v = self.value();
        let nf = f64::from(n);
        let d1 = if n == 0 { 0.0 } else { nf * v.powi(n - 1) };
        let d2 = if n == 0 || n == 1 { 0.0 } else { nf * (nf - 1.0) * v.powi(n - 2) };
        self.chain(v.powi(n), d1, d2)
    }

    fn sin(&self) -> Self {
        let v = self.value();
        self.chain(v.sin(), v.cos(), -v.sin())
    }

    fn cos(&self) -> Self {
        let v = self.value();
        self.chain(v.cos(), -v.sin(), -v.cos())
    }

    fn recip(&self) -> Self {
        let v = self.value();
        self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }

    fn square(&self) -> Self {
        self.clone() * self.clone()
    }
}

impl Scalar for f64 {
    fn value(&self) -> f64 {
        *self
    }

    fn chain(&self, f0: f64, _f1: f64, _f2: f64) -> Self {
        f0
    }
}

// a*x + b*y with empty slices standing for zero vectors.
fn axpby(a: f64, x: &[f64], b: f64, y: &[f64]) -> Vec<f64> {
    match (x.is_empty(), y.is_empty()) {
        (true, true) => Vec::new(),
        (false, true) => x.iter().map(|v| a * v).collect(),
        (true, false) => y.iter().map(|v| b * v).collect(),
        (false, false) => {
            debug_assert_eq!(x.len(), y.len(), "jet dimension mismatch");
            x.iter().zip(y).map(|(u, v)| a * u + b * v).collect()
        }
    }
}

fn scaled(a: f64, x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| a * v).collect()
}

/// First-order jet: value and ambient gradient.
#[derive(Clone, Debug, PartialEq)]
pub struct Dual {
    pub value: f64,
    pub grad: Vec<f64>,
}

impl Dual {
    pub fn constant(value: f64) -> Self {
        Dual { value, grad: Vec::new() }
    }

    pub fn variable(value: f64, index: usize, dim: usize) -> Self {
        let mut grad = vec![0.0; dim];
        grad[index] = 1.0;
        Dual { value, grad }
    }

    /// Seeds every coordinate of `x` as an independent variable.
    pub fn seed(x: &[f64]) -> Vec<Dual> {
        let n = x.len();
        x.iter().enumerate().map(|(i, &v)| Dual::variable(v, i, n)).collect()
    }

    /// Partial derivative in direction `i` (zero for constants).
    pub fn partial(&self, i: usize) -> f64 {
        self.grad.get(i).copied().unwrap_or(0.0)
    }
}

impl From<f64> for Dual {
    fn from(v: f64) -> Self {
        Dual::constant(v)
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual { value: self.value + o.value, grad: axpby(1.0, &self.grad, 1.0, &o.grad) }
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual { value: self.value - o.value, grad: axpby(1.0, &self.grad, -1.0, &o.grad) }
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual { value: self.value * o.value, grad: axpby(o.value, &self.grad, self.value, &o.grad) }
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        self * o.recip()
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual { value: -self.value, grad: scaled(-1.0, &self.grad) }
    }
}

impl Add<f64> for Dual {
    type Output = Dual;
    fn add(mut self, c: f64) -> Dual {
        self.value += c;
        self
    }
}

impl Sub<f64> for Dual {
    type Output = Dual;
    fn sub(mut self, c: f64) -> Dual {
        self.value -= c;
        self
    }
}

impl Mul<f64> for Dual {
    type Output = Dual;
    fn mul(self, c: f64) -> Dual {
        Dual { value: self.value * c, grad: scaled(c, &self.grad) }
    }
}

impl Div<f64> for Dual {
    type Output = Dual;
    fn div(self, c: f64) -> Dual {
        self * (1.0 / c)
    }
}

impl Scalar for Dual {
    fn value(&self) -> f64 {
        self.value
    }

    fn chain(&self, f0: f64, f1: f64, _f2: f64) -> Self {
        Dual { value: f0, grad: scaled(f1, &self.grad) }
    }
}

/// Second-order jet: value, ambient gradient and ambient Hessian.
///
/// The Hessian is stored row-major; every update below is a symmetric rank
/// update of symmetric inputs, so it stays symmetric by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
}

impl Jet2 {
    pub fn constant(value: f64) -> Self {
        Jet2 { value, grad: Vec::new(), hess: Vec::new() }
    }

    pub fn variable(value: f64, index: usize, dim: usize) -> Self {
        let mut grad = vec![0.0; dim];
        grad[index] = 1.0;
        Jet2 { value, grad, hess: Vec::new() }
    }

    pub fn seed(x: &[f64]) -> Vec<Jet2> {
        let n = x.len();
        x.iter().enumerate().map(|(i, &v)| Jet2::variable(v, i, n)).collect()
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn partial(&self, i: usize) -> f64 {
        self.grad.get(i).copied().unwrap_or(0.0)
    }

    pub fn hess_at(&self, i: usize, j: usize) -> f64 {
        if self.hess.is_empty() {
            0.0
        } else {
            self.hess[i * self.dim() + j]
        }
    }

    /// Drops the second-order part.
    pub fn to_dual(&self) -> Dual {
        Dual { value: self.value, grad: self.grad.clone() }
    }
}

// Hessian of a product: a*Hy + b*Hx + gx gy^T + gy gx^T.
fn product_hessian(a: &Jet2, b: &Jet2) -> Vec<f64> {
    let mut h = axpby(b.value, &a.hess, a.value, &b.hess);
    if a.grad.is_empty() || b.grad.is_empty() {
        return h;
    }
    let n = a.grad.len();
    if h.is_empty() {
        h = vec![0.0; n * n];
    }
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += a.grad[i] * b.grad[j] + b.grad[i] * a.grad[j];
        }
    }
    h
}

impl From<f64> for Jet2 {
    fn from(v: f64) -> Self {
        Jet2::constant(v)
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        Jet2 {
            value: self.value + o.value,
            grad: axpby(1.0, &self.grad, 1.0, &o.grad),
            hess: axpby(1.0, &self.hess, 1.0, &o.hess),
        }
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        Jet2 {
            value: self.value - o.value,
            grad: axpby(1.0, &self.grad, -1.0, &o.grad),
            hess: axpby(1.0, &self.hess, -1.0, &o.hess),
        }
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        let hess = product_hessian(&self, &o);
        Jet2 { value: self.value * o.value, grad: axpby(o.value, &self.grad, self.value, &o.grad), hess }
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    fn div(self, o: Jet2) -> Jet2 {
        self * o.recip()
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        Jet2 { value: -self.value, grad: scaled(-1.0, &self.grad), hess: scaled(-1.0, &self.hess) }
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(mut self, c: f64) -> Jet2 {
        self.value += c;
        self
    }
}

impl Sub<f64> for Jet2 {
    type Output = Jet2;
    fn sub(mut self, c: f64) -> Jet2 {
        self.value -= c;
        self
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, c: f64) -> Jet2 {
        Jet2 { value: self.value * c, grad: scaled(c, &self.grad), hess: scaled(c, &self.hess) }
    }
}

impl Div<f64> for Jet2 {
    type Output = Jet2;
    fn div(self, c: f64) -> Jet2 {
        self * (1.0 / c)
    }
}

impl Scalar for Jet2 {
    fn value(&self) -> f64 {
        self.value
    }

    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self {
        let n = self.grad.len();
        let mut hess = scaled(f1, &self.hess);
        if n > 0 && f2 != 0.0 {
            if hess.is_empty() {
                hess = vec![0.0; n * n];
            }
            for i in 0..n {
                for j in 0..n {
                    hess[i * n + j] += f2 * self.grad[i] * self.grad[j];
                }
            }
        }
        Jet2 { value: f0, grad: scaled(f1, &self.grad), hess }
    }
}

/// Sum of squares, generic.
pub fn sum_sq<S: Scalar>(xs: &[S]) -> S {
    xs.iter().fold(S::from(0.0), |acc, x| acc + x.clone() * x.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f<S: Scalar>(x: &[S]) -> S {
        // x0^2 * sin(x1) + exp(x0 * x1) / (1 + x1^2)
        x[0].square() * x[1].sin() + (x[0].clone() * x[1].clone()).exp() / (x[1].square() + 1.0)
    }

    #[test]
    fn constants_have_zero_derivatives() {
        let c = Jet2::from(3.0);
        let x = Jet2::variable(2.0, 0, 2);
        let y = c * x;
        assert_eq!(y.value, 6.0);
        assert_eq!(y.grad, vec![3.0, 0.0]);
        assert_eq!(y.hess_at(0, 0), 0.0);
    }

    #[test]
    fn jet_matches_central_differences() {
        let x = [0.7, -0.4];
        let j = f(&Jet2::seed(&x));
        let h = 1e-5;
        for i in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[i] += h;
            xm[i] -= h;
            let fd = (f(&xp) - f(&xm)) / (2.0 * h);
            assert!((fd - j.grad[i]).abs() < 1e-8, "grad {i}");
            let dp = f(&Dual::seed(&xp));
            let dm = f(&Dual::seed(&xm));
            for k in 0..2 {
                let fd2 = (dp.grad[k] - dm.grad[k]) / (2.0 * h);
                assert!((fd2 - j.hess_at(i, k)).abs() < 1e-6, "hess {i}{k}");
            }
        }
        assert!((j.hess_at(0, 1) - j.hess_at(1, 0)).abs() < 1e-14);
    }

    #[test]
    fn powi_edge_orders() {
        let x = Jet2::variable(2.0, 0, 1);
        assert_eq!(x.powi(0).value, 1.0);
        assert_eq!(x.powi(0).partial(0), 0.0);
        let p3 = x.powi(3);
        assert_eq!(p3.value, 8.0);
        assert_eq!(p3.partial(0), 12.0);
        assert_eq!(p3.hess_at(0, 0), 12.0);
    }
}
