//! The Heisenberg group `H_n`: points, group law, the left-invariant frame
//! `ė_1..ė_2n, T`, the contact form, the Levi metric, the complex structure
//! `J` and the flat pseudohermitian connection.
//!
//! Coordinates are always ordered `(x_1..x_n, y_1..y_n, t)`. Horizontal
//! vectors are stored as their `2n` coefficients in the frame `ė_a`, which
//! is orthonormal for the Levi metric and parallel for the connection.

use crate::error::{check_dimension, Error, Result};

/// A point of `H_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    n: usize,
    coords: Vec<f64>,
}

impl Point {
    pub fn new(x: &[f64], y: &[f64], t: f64) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Length {
                expected: x.len(),
                got: y.len(),
            });
        }
        let mut coords = Vec::with_capacity(2 * x.len() + 1);
        coords.extend_from_slice(x);
        coords.extend_from_slice(y);
        coords.push(t);
        Self::from_coords(&coords)
    }

    /// Builds a point from `(x_1..x_n, y_1..y_n, t)`; the length must be odd.
    pub fn from_coords(coords: &[f64]) -> Result<Self> {
        if coords.len().is_multiple_of(2) {
            return Err(Error::Length {
                expected: coords.len() + 1,
                got: coords.len(),
            });
        }
        let n = coords.len() / 2;
        check_dimension(n)?;
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            n,
            coords: coords.to_vec(),
        })
    }

    pub fn origin(n: usize) -> Result<Self> {
        Self::from_coords(&vec![0.0; 2 * n + 1])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn x(&self) -> &[f64] {
        &self.coords[..self.n]
    }

    pub fn y(&self) -> &[f64] {
        &self.coords[self.n..2 * self.n]
    }

    pub fn t(&self) -> f64 {
        self.coords[2 * self.n]
    }

    /// `|z| = (Σ x_j² + y_j²)^{1/2}`.
    pub fn z_norm(&self) -> f64 {
        self.coords[..2 * self.n]
            .iter()
            .map(|c| c * c)
            .sum::<f64>()
            .sqrt()
    }

    pub fn inverse(&self) -> Self {
        Self {
            n: self.n,
            coords: self.coords.iter().map(|c| -c).collect(),
        }
    }

    /// Left translation `L_self(q) = self ∘ q`.
    pub fn left_translate(&self, q: &Point) -> Result<Point> {
        group_mul(self, q)
    }
}

/// The group law: `t`-component is `t + t̃ + Σ (y_j x̃_j − x_j ỹ_j)`.
pub fn group_mul(p: &Point, q: &Point) -> Result<Point> {
    if p.n != q.n {
        return Err(Error::Length {
            expected: p.coords.len(),
            got: q.coords.len(),
        });
    }
    let n = p.n;
    let mut coords: Vec<f64> = p.coords.iter().zip(&q.coords).map(|(a, b)| a + b).collect();
    let twist: f64 = (0..n)
        .map(|j| p.y()[j] * q.x()[j] - p.x()[j] * q.y()[j])
        .sum();
    coords[2 * n] += twist;
    Ok(Point { n, coords })
}

/// Coefficients of a vector of `ξ` in the frame `ė_1..ė_2n`.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizontalVector(pub Vec<f64>);

impl HorizontalVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; 2 * n])
    }

    /// The frame vector `ė_a` (1-based index).
    pub fn basis(n: usize, a: usize) -> Result<Self> {
        if a == 0 || a > 2 * n {
            return Err(Error::IndexOutOfRange {
                index: a,
                max: 2 * n,
            });
        }
        let mut v = Self::zeros(n);
        v.0[a - 1] = 1.0;
        Ok(v)
    }

    pub fn n(&self) -> usize {
        self.0.len() / 2
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.0
    }

    /// Levi inner product.
    pub fn dot(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.iter().map(|a| a * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// `self + s * other`
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        Self(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + s * b)
                .collect(),
        )
    }

    pub fn normalized(&self) -> Self {
        self.scale(1.0 / self.norm())
    }

    pub fn apply_j(&self) -> Self {
        apply_j(self)
    }

    /// Coordinate components of `Σ v^a ė_a(p)`.
    pub fn lift(&self, p: &Point) -> Vec<f64> {
        horizontal_lift(p, self)
    }
}

/// A tangent vector `h + τ T` of `H_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub h: HorizontalVector,
    pub tau: f64,
}

impl TangentVector {
    pub fn horizontal(h: HorizontalVector) -> Self {
        Self { h, tau: 0.0 }
    }

    /// Coordinate components `(∂x.., ∂y.., ∂t)` at `p`.
    pub fn to_coords(&self, p: &Point) -> Vec<f64> {
        let mut w = horizontal_lift(p, &self.h);
        w[2 * p.n()] += self.tau;
        w
    }

    /// Inverse of [`TangentVector::to_coords`]: the horizontal part is read off
    /// the `x, y` components and `τ = Θ(w)`.
    pub fn from_coords(p: &Point, w: &[f64]) -> Self {
        let n = p.n();
        Self {
            h: HorizontalVector(w[..2 * n].to_vec()),
            tau: contact_form(p, w),
        }
    }
}

/// Coordinate components of `ė_a` at `p` (1-based `a`):
/// `ė_j = ∂x_j + y_j ∂t`, `ė_{n+j} = ∂y_j − x_j ∂t`.
pub fn frame_vector(a: usize, p: &Point) -> Result<Vec<f64>> {
    let n = p.n();
    let e = HorizontalVector::basis(n, a)?;
    Ok(horizontal_lift(p, &e))
}

/// The `∂t` coefficient of `ė_a` at `p` (0-based `a`).
pub(crate) fn frame_t_coeff(p: &[f64], n: usize, a: usize) -> f64 {
    if a < n {
        p[n + a]
    } else {
        -p[a - n]
    }
}

pub fn horizontal_lift(p: &Point, v: &HorizontalVector) -> Vec<f64> {
    let n = p.n();
    let mut w = Vec::with_capacity(2 * n + 1);
    w.extend_from_slice(&v.0);
    let tc: f64 = (0..2 * n)
        .map(|a| v.0[a] * frame_t_coeff(p.coords(), n, a))
        .sum();
    w.push(tc);
    w
}

/// `Θ = dt + Σ (x_j dy_j − y_j dx_j)` applied to a coordinate vector.
pub fn contact_form(p: &Point, w: &[f64]) -> f64 {
    let n = p.n();
    let mut s = w[2 * n];
    for j in 0..n {
        s += p.x()[j] * w[n + j] - p.y()[j] * w[j];
    }
    s
}

/// `dΘ(v, w) = 2 Σ (v^j w^{n+j} − v^{n+j} w^j)` on horizontal vectors.
pub fn d_theta(v: &HorizontalVector, w: &HorizontalVector) -> f64 {
    let n = v.n();
    2.0 * (0..n)
        .map(|j| v.0[j] * w.0[n + j] - v.0[n + j] * w.0[j])
        .sum::<f64>()
}

/// `J ė_j = ė_{n+j}`, `J ė_{n+j} = −ė_j`.
pub fn apply_j(v: &HorizontalVector) -> HorizontalVector {
    let n = v.n();
    let mut out = vec![0.0; 2 * n];
    for j in 0..n {
        out[j] = -v.0[n + j];
        out[n + j] = v.0[j];
    }
    HorizontalVector(out)
}

/// Levi metric `G = ½ dΘ(·, J·)`.
pub fn levi_metric(v: &HorizontalVector, w: &HorizontalVector) -> f64 {
    0.5 * d_theta(v, &apply_j(w))
}

/// A horizontal vector field with coordinate derivatives.
pub trait HorizontalField {
    /// Frame coefficients at `p` and their Jacobian with respect to the
    /// coordinates (`2n` rows, `2n+1` columns).
    fn jacobian(&self, p: &Point) -> Result<(HorizontalVector, Vec<Vec<f64>>)>;
}

/// `∇_w F` for the flat connection: since `∇ė_a = 0` this is the directional
/// derivative of the frame coefficients of `F` along `w`.
pub fn covariant_derivative(
    field: &dyn HorizontalField,
    direction: &TangentVector,
    p: &Point,
) -> Result<HorizontalVector> {
    let w = direction.to_coords(p);
    let (_, jac) = field.jacobian(p)?;
    Ok(HorizontalVector(
        jac.iter()
            .map(|row| row.iter().zip(&w).map(|(a, b)| a * b).sum())
            .collect(),
    ))
}
