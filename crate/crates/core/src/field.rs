//! Scalar fields on a group, evaluable as values, first-order and
//! second-order jets.

use crate::error::Result;
use crate::jet::{Dual, Jet2, Scalar};

/// A field written once over any [`Scalar`] carrier.
pub trait GenericField: Send + Sync {
    fn label(&self) -> String;

    /// Declared homogeneity order under dilations, if known.
    fn order(&self) -> Option<f64> {
        None
    }

    fn eval<S: Scalar>(&self, x: &[S]) -> Result<S>;
}

/// Object-safe view of a field; every [`GenericField`] is one.
pub trait ScalarField: Send + Sync {
    fn name(&self) -> String;
    fn homogeneity(&self) -> Option<f64>;
    fn value(&self, x: &[f64]) -> Result<f64>;
    fn dual(&self, x: &[Dual]) -> Result<Dual>;
    fn jet(&self, x: &[Jet2]) -> Result<Jet2>;

    /// Value and ambient gradient at `x`.
    fn dual_at(&self, x: &[f64]) -> Result<Dual> {
        self.dual(&Dual::seed(x))
    }

    /// Value, ambient gradient and ambient Hessian at `x`.
    fn jet_at(&self, x: &[f64]) -> Result<Jet2> {
        self.jet(&Jet2::seed(x))
    }
}

impl<T: GenericField> ScalarField for T {
    fn name(&self) -> String {
        self.label()
    }
    fn homogeneity(&self) -> Option<f64> {
        self.order()
    }
    fn value(&self, x: &[f64]) -> Result<f64> {
        self.eval(x)
    }
    fn dual(&self, x: &[Dual]) -> Result<Dual> {
        self.eval(x)
    }
    fn jet(&self, x: &[Jet2]) -> Result<Jet2> {
        self.eval(x)
    }
}

/// The coordinate function `g ↦ g_i`.
#[derive(Clone, Copy, Debug)]
pub struct Coordinate(pub usize);

impl GenericField for Coordinate {
    fn label(&self) -> String {
        format!("coord{}", self.0)
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<S> {
        Ok(x[self.0].clone())
    }
}

/// `c · g_i^k`, a monomial in one coordinate.
#[derive(Clone, Copy, Debug)]
pub struct Monomial {
    pub coeff: f64,
    pub index: usize,
    pub power: i32,
}

impl GenericField for Monomial {
    fn label(&self) -> String {
        format!("{}*x{}^{}", self.coeff, self.index, self.power)
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<S> {
        Ok(x[self.index].powi(self.power) * self.coeff)
    }
}

/// The constant field.
#[derive(Clone, Copy, Debug)]
pub struct Constant(pub f64);

impl GenericField for Constant {
    fn label(&self) -> String {
        format!("const{}", self.0)
    }
    fn order(&self) -> Option<f64> {
        Some(0.0)
    }
    fn eval<S: Scalar>(&self, _x: &[S]) -> Result<S> {
        Ok(S::from(self.0))
    }
}
