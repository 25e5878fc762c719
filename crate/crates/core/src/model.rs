//! The black-box cost function seen by the estimators.

use crate::error::Result;

/// A scalar function of a standard-normal germ, e.g. the optimal dispatch
/// cost for the wind scenario that germ encodes.
///
/// Implementations must be deterministic: the estimators evaluate the same
/// germ on different threads and expect identical results.
pub trait GermModel: Sync {
    fn dims(&self) -> usize;

    fn eval(&self, germ: &[f64]) -> Result<f64>;
}

/// Adapts a closure.
pub struct FnModel<F> {
    dims: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnModel<F> {
    pub fn new(dims: usize, f: F) -> Self {
        FnModel { dims, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> GermModel for FnModel<F> {
    fn dims(&self) -> usize {
        self.dims
    }

    fn eval(&self, germ: &[f64]) -> Result<f64> {
        Ok((self.f)(germ))
    }
}

impl<M: GermModel + ?Sized> GermModel for &M {
    fn dims(&self) -> usize {
        (**self).dims()
    }

    fn eval(&self, germ: &[f64]) -> Result<f64> {
        (**self).eval(germ)
    }
}
