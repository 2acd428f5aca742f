//! Forward-mode second-order dual numbers.
//!
//! A [`Dual2`] carries a value together with its full gradient and Hessian
//! with respect to a fixed set of independent variables. Evaluating a closed
//! form on seeded variables yields exact first and second derivatives (up to
//! rounding), which is what the shape-operator computations consume.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Value, gradient and row-major Hessian of a scalar function.
#[derive(Debug, Clone, PartialEq)]
pub struct Dual2 {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
}

impl Dual2 {
    pub fn constant(value: f64, dim: usize) -> Self {
        Self {
            value,
            grad: vec![0.0; dim],
            hess: vec![0.0; dim * dim],
        }
    }

    /// The independent variable `index` at `value`.
    pub fn variable(value: f64, index: usize, dim: usize) -> Self {
        let mut d = Self::constant(value, dim);
        d.grad[index] = 1.0;
        d
    }

    /// Seeds every coordinate of `x` as an independent variable.
    pub fn seed(x: &[f64]) -> Vec<Self> {
        let dim = x.len();
        x.iter()
            .enumerate()
            .map(|(i, &v)| Self::variable(v, i, dim))
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn hess_at(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.dim() + j]
    }

    /// Applies a scalar function given its value and first two derivatives
    /// at `self.value` (chain rule).
    pub fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self {
        let n = self.dim();
        let grad = self.grad.iter().map(|g| f1 * g).collect();
        let mut hess = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                hess[i * n + j] = f1 * self.hess[i * n + j] + f2 * self.grad[i] * self.grad[j];
            }
        }
        Self {
            value: f0,
            grad,
            hess,
        }
    }

    pub fn recip(&self) -> Self {
        let v = self.value;
        self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }
}

/// Arithmetic needed by closed-form defining functions, implemented for
/// plain `f64` and for [`Dual2`].
pub trait Scalar:
    Clone
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
    /// A constant living in the same variable space as `self`.
    fn lift(&self, c: f64) -> Self;
    fn sqrt(&self) -> Self;
    fn acos(&self) -> Self;
    fn powf(&self, p: f64) -> Self;
    fn square(&self) -> Self {
        self.clone() * self.clone()
    }
}

impl Scalar for f64 {
    fn value(&self) -> f64 {
        *self
    }
    fn lift(&self, c: f64) -> Self {
        c
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn acos(&self) -> Self {
        f64::acos(*self)
    }
    fn powf(&self, p: f64) -> Self {
        f64::powf(*self, p)
    }
}

impl Scalar for Dual2 {
    fn value(&self) -> f64 {
        self.value
    }
    fn lift(&self, c: f64) -> Self {
        Dual2::constant(c, self.dim())
    }
    fn sqrt(&self) -> Self {
        let s = self.value.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.value))
    }
    fn acos(&self) -> Self {
        let v = self.value;
        let w = 1.0 - v * v;
        let sw = w.sqrt();
        self.chain(v.acos(), -1.0 / sw, -v / (w * sw))
    }
    fn powf(&self, p: f64) -> Self {
        let v = self.value;
        self.chain(
            v.powf(p),
            p * v.powf(p - 1.0),
            p * (p - 1.0) * v.powf(p - 2.0),
        )
    }
}

impl Add for Dual2 {
    type Output = Dual2;
    fn add(mut self, rhs: Dual2) -> Dual2 {
        self.value += rhs.value;
        self.grad
            .iter_mut()
            .zip(&rhs.grad)
            .for_each(|(a, b)| *a += b);
        self.hess
            .iter_mut()
            .zip(&rhs.hess)
            .for_each(|(a, b)| *a += b);
        self
    }
}

impl Sub for Dual2 {
    type Output = Dual2;
    fn sub(self, rhs: Dual2) -> Dual2 {
        self + (-rhs)
    }
}

impl Neg for Dual2 {
    type Output = Dual2;
    fn neg(mut self) -> Dual2 {
        self.value = -self.value;
        self.grad.iter_mut().for_each(|a| *a = -*a);
        self.hess.iter_mut().for_each(|a| *a = -*a);
        self
    }
}

impl Mul for Dual2 {
    type Output = Dual2;
    fn mul(self, rhs: Dual2) -> Dual2 {
        let n = self.dim();
        let (a, b) = (self.value, rhs.value);
        let grad = (0..n).map(|i| a * rhs.grad[i] + b * self.grad[i]).collect();
        let mut hess = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let k = i * n + j;
                hess[k] = a * rhs.hess[k]
                    + b * self.hess[k]
                    + self.grad[i] * rhs.grad[j]
                    + rhs.grad[i] * self.grad[j];
            }
        }
        Dual2 {
            value: a * b,
            grad,
            hess,
        }
    }
}

impl Div for Dual2 {
    type Output = Dual2;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Dual2) -> Dual2 {
        self * rhs.recip()
    }
}

impl Add<f64> for Dual2 {
    type Output = Dual2;
    fn add(mut self, rhs: f64) -> Dual2 {
        self.value += rhs;
        self
    }
}

impl Sub<f64> for Dual2 {
    type Output = Dual2;
    fn sub(mut self, rhs: f64) -> Dual2 {
        self.value -= rhs;
        self
    }
}

impl Mul<f64> for Dual2 {
    type Output = Dual2;
    fn mul(mut self, rhs: f64) -> Dual2 {
        self.value *= rhs;
        self.grad.iter_mut().for_each(|a| *a *= rhs);
        self.hess.iter_mut().for_each(|a| *a *= rhs);
        self
    }
}

impl Div<f64> for Dual2 {
    type Output = Dual2;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: f64) -> Dual2 {
        self * (1.0 / rhs)
    }
}

/// Sum of `x_i^2` over the slice.
pub fn sum_squares<S: Scalar>(xs: &[S]) -> S {
    let mut acc = xs[0].square();
    for x in &xs[1..] {
        acc = acc + x.square();
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_grad_hess(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = x.len();
        let h = 1e-4;
        let mut g = vec![0.0; n];
        let mut hs = vec![0.0; n * n];
        for i in 0..n {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += h;
            xm[i] -= h;
            g[i] = (f(&xp) - f(&xm)) / (2.0 * h);
            for j in 0..n {
                let mut pp = x.to_vec();
                let mut pm = x.to_vec();
                let mut mp = x.to_vec();
                let mut mm = x.to_vec();
                pp[i] += h;
                pp[j] += h;
                pm[i] += h;
                pm[j] -= h;
                mp[i] -= h;
                mp[j] += h;
                mm[i] -= h;
                mm[j] -= h;
                hs[i * n + j] = (f(&pp) - f(&pm) - f(&mp) + f(&mm)) / (4.0 * h * h);
            }
        }
        (g, hs)
    }

    fn expr<S: Scalar>(x: &[S]) -> S {
        // exercises every primitive
        let r = sum_squares(x);
        let a = (x[0].clone() * 0.3).acos();
        let q = (r.clone() + 1.0).powf(-1.5);
        (r.sqrt() * a + q / (x[1].clone() + 3.0)) - x[2].clone() * x[0].clone()
    }

    #[test]
    fn matches_finite_differences() {
        let x = [0.4, -0.7, 1.1];
        let d = expr(&Dual2::seed(&x));
        assert!((d.value - expr(&x)).abs() < 1e-15);
        let (g, h) = fd_grad_hess(expr, &x);
        for i in 0..3 {
            assert!((d.grad[i] - g[i]).abs() < 1e-7, "grad {i}");
        }
        for k in 0..9 {
            assert!((d.hess[k] - h[k]).abs() < 1e-5, "hess {k}");
        }
    }

    #[test]
    fn hessian_is_symmetric() {
        let x = [0.2, 0.5, -0.3];
        let d = expr(&Dual2::seed(&x));
        for i in 0..3 {
            for j in 0..3 {
                assert!((d.hess_at(i, j) - d.hess_at(j, i)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn division_by_self_is_one() {
        let x = Dual2::seed(&[1.7, 0.2]);
        let q = (x[0].clone() * x[1].clone() + 2.0) / (x[0].clone() * x[1].clone() + 2.0);
        assert!((q.value - 1.0).abs() < 1e-15);
        assert!(q.grad.iter().all(|g| g.abs() < 1e-15));
        assert!(q.hess.iter().all(|g| g.abs() < 1e-14));
    }
}
