//! Defining functions and their derivative evaluators.
//!
//! A closed form is written once against [`Scalar`] and can then be
//! differentiated two ways: exactly with [`Dual2`] (the default) or with
//! central finite differences (the independent cross-check).

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::dual::{Dual2, Scalar};
use crate::error::{check_dimension, Error, Result};

/// A scalar closed form on `R^{2n+1}`.
pub trait Expr: Send + Sync {
    fn eval<S: Scalar>(&self, c: &[S]) -> S;
}

/// Object-safe view of an [`Expr`].
pub trait DynExpr: Send + Sync {
    fn eval_f64(&self, c: &[f64]) -> f64;
    fn eval_dual(&self, c: &[Dual2]) -> Dual2;
}

impl<E: Expr> DynExpr for E {
    fn eval_f64(&self, c: &[f64]) -> f64 {
        self.eval(c)
    }
    fn eval_dual(&self, c: &[Dual2]) -> Dual2 {
        self.eval(c)
    }
}

/// How first and second derivatives of the defining function are obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Derivatives {
    /// Forward-mode second-order dual numbers.
    Dual,
    /// Central differences; steps are `cbrt(eps)·scale` for the gradient and
    /// `eps^{1/4}·scale` for the Hessian, with `scale = max(1, |x_i|)`.
    FiniteDifference,
}

/// A hypersurface `Σ = {u = 0}` given by a defining function.
#[derive(Clone)]
pub struct SurfaceDef {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    n: usize,
    expr: Arc<dyn DynExpr>,
    mode: Derivatives,
}

impl fmt::Debug for SurfaceDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SurfaceDef")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("n", &self.n)
            .field("mode", &self.mode)
            .finish()
    }
}

impl SurfaceDef {
    pub fn new<E: Expr + 'static>(name: impl Into<String>, n: usize, expr: E) -> Result<Self> {
        check_dimension(n)?;
        Ok(Self {
            name: name.into(),
            params: BTreeMap::new(),
            n,
            expr: Arc::new(expr),
            mode: Derivatives::Dual,
        })
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn with_derivatives(mut self, mode: Derivatives) -> Self {
        self.mode = mode;
        self
    }

    pub fn derivatives(&self) -> Derivatives {
        self.mode
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    pub fn value(&self, c: &[f64]) -> f64 {
        self.expr.eval_f64(c)
    }

    /// Value, coordinate gradient and coordinate Hessian of `u` at `c`.
    pub fn jet(&self, c: &[f64]) -> Result<Dual2> {
        if c.len() != self.dim() {
            return Err(Error::Length {
                expected: self.dim(),
                got: c.len(),
            });
        }
        let d = match self.mode {
            Derivatives::Dual => self.expr.eval_dual(&Dual2::seed(c)),
            Derivatives::FiniteDifference => finite_difference_jet(&*self.expr, c),
        };
        if !d.value.is_finite()
            || d.grad.iter().any(|g| !g.is_finite())
            || d.hess.iter().any(|g| !g.is_finite())
        {
            return Err(Error::Domain(format!(
                "{} is not twice differentiable at {c:?}",
                self.name
            )));
        }
        Ok(d)
    }
}

fn finite_difference_jet(e: &dyn DynExpr, c: &[f64]) -> Dual2 {
    let dim = c.len();
    let f = |x: &[f64]| e.eval_f64(x);
    let f0 = f(c);
    let eps = f64::EPSILON;
    let mut out = Dual2::constant(f0, dim);
    let mut x = c.to_vec();
    for i in 0..dim {
        let h = eps.cbrt() * c[i].abs().max(1.0);
        x[i] = c[i] + h;
        let fp = f(&x);
        x[i] = c[i] - h;
        let fm = f(&x);
        x[i] = c[i];
        out.grad[i] = (fp - fm) / (2.0 * h);
    }
    let hs: Vec<f64> = c
        .iter()
        .map(|v| eps.powf(0.25) * v.abs().max(1.0))
        .collect();
    for i in 0..dim {
        x[i] = c[i] + hs[i];
        let fp = f(&x);
        x[i] = c[i] - hs[i];
        let fm = f(&x);
        x[i] = c[i];
        out.hess[i * dim + i] = (fp - 2.0 * f0 + fm) / (hs[i] * hs[i]);
        for j in 0..i {
            let mut g = |si: f64, sj: f64| {
                x[i] = c[i] + si * hs[i];
                x[j] = c[j] + sj * hs[j];
                let v = f(&x);
                x[i] = c[i];
                x[j] = c[j];
                v
            };
            let v =
                (g(1.0, 1.0) - g(1.0, -1.0) - g(-1.0, 1.0) + g(-1.0, -1.0)) / (4.0 * hs[i] * hs[j]);
            out.hess[i * dim + j] = v;
            out.hess[j * dim + i] = v;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::sum_squares;

    struct Quartic;
    impl Expr for Quartic {
        fn eval<S: Scalar>(&self, c: &[S]) -> S {
            let r2 = sum_squares(&c[..4]);
            -(r2.square() + c[4].square() * 4.0) + 1.0
        }
    }

    #[test]
    fn dual_and_fd_agree() {
        let s = SurfaceDef::new("q", 2, Quartic).unwrap();
        let fd = s.clone().with_derivatives(Derivatives::FiniteDifference);
        let c = [0.3, -0.2, 0.5, 0.1, 0.4];
        let a = s.jet(&c).unwrap();
        let b = fd.jet(&c).unwrap();
        for (x, y) in a.grad.iter().zip(&b.grad) {
            assert!((x - y).abs() < 1e-9);
        }
        for (x, y) in a.hess.iter().zip(&b.hess) {
            assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn wrong_length_is_rejected() {
        let s = SurfaceDef::new("q", 2, Quartic).unwrap();
        assert!(matches!(s.jet(&[0.0; 3]), Err(Error::Length { .. })));
        assert!(matches!(
            SurfaceDef::new("q", 1, Quartic),
            Err(Error::Dimension(1))
        ));
    }
}
