//! Pointwise extrinsic geometry of a hypersurface `Σ = {u = 0}` in `H_n`.
//!
//! Conventions: the horizontal normal is `e_2n = ∇_b u / |∇_b u|` with
//! `(∇_b u)^a = ė_a u`, the characteristic direction is `e_n = −J e_2n` and
//! `α = −(T u)/|∇_b u|`, so that `α e_2n + T` is tangent to `Σ`.
//!
//! The `ξ′` basis is J-adapted: `e_{n+β} = J e_β`. The second fundamental
//! form `h_ab = −⟨∇_{e_b} e_2n, e_a⟩` is expressed in the ordered basis
//! `e_1..e_{n−1}, e_n, e_{n+1}..e_{2n−1}` of `ξ ∩ TΣ`; index `n−1`
//! (0-based) is the characteristic direction.

use std::sync::Arc;

use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::dual::Dual2;
use crate::error::{Error, Result};
use crate::field::{Expr, SurfaceDef};
use crate::heisenberg::{
    covariant_derivative, frame_t_coeff, HorizontalField, HorizontalVector, Point, TangentVector,
};
use crate::linalg::{determinant, symmetric_eigenvalues, Mat};

/// Numerical thresholds used by [`build_frame`] and [`shape_matrix`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Singular if `|∇_b u| ≤ singular_eps · (1 + |∇u|)`.
    pub singular_eps: f64,
    /// Off-surface if `|u| > on_surface · (1 + |∇u| (1 + |p|))`.
    pub on_surface: f64,
    /// Umbilic if `|X_n|` and the eigenvalue spread are both below
    /// `umbilic · (1 + max |h_ab|)`.
    pub umbilic: f64,
    /// Maximum asymmetry of the shape operator on `ξ′`, relative to its size.
    pub symmetry: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            singular_eps: 1e-9,
            on_surface: 1e-9,
            umbilic: 1e-7,
            symmetry: 1e-8,
        }
    }
}

impl Tolerances {
    /// Looser thresholds for finite-difference derivatives.
    pub fn finite_difference() -> Self {
        Self {
            umbilic: 1e-4,
            symmetry: 1e-4,
            ..Self::default()
        }
    }
}

/// First-order data of `u` at a point: horizontal gradient and its
/// coordinate derivatives, from which `e_2n`, `α` and their derivatives follow.
#[derive(Debug, Clone)]
pub struct LocalGeometry {
    pub p: Point,
    pub u: f64,
    pub grad: Vec<f64>,
    /// `G^a = ė_a u`
    pub grad_b: Vec<f64>,
    pub grad_b_norm: f64,
    /// `∂_i G^a`, `2n` rows by `2n+1` columns.
    d_grad_b: Vec<Vec<f64>>,
    /// `∂_i (T u)`
    d_ut: Vec<f64>,
}

impl LocalGeometry {
    pub fn new(s: &SurfaceDef, p: &Point) -> Result<Self> {
        let jet = s.jet(p.coords())?;
        Ok(Self::from_jet(p, &jet))
    }

    pub fn from_jet(p: &Point, jet: &Dual2) -> Self {
        let n = p.n();
        let dim = 2 * n + 1;
        let c = p.coords();
        let ut = jet.grad[2 * n];
        let grad_b: Vec<f64> = (0..2 * n)
            .map(|a| jet.grad[a] + frame_t_coeff(c, n, a) * ut)
            .collect();
        let d_grad_b = (0..2 * n)
            .map(|a| {
                (0..dim)
                    .map(|i| {
                        let dk = if a < n && i == n + a {
                            1.0
                        } else if a >= n && i == a - n {
                            -1.0
                        } else {
                            0.0
                        };
                        jet.hess_at(a, i) + dk * ut + frame_t_coeff(c, n, a) * jet.hess_at(2 * n, i)
                    })
                    .collect()
            })
            .collect();
        let d_ut = (0..dim).map(|i| jet.hess_at(2 * n, i)).collect();
        let grad_b_norm = grad_b.iter().map(|g| g * g).sum::<f64>().sqrt();
        Self {
            p: p.clone(),
            u: jet.value,
            grad: jet.grad.clone(),
            grad_b,
            grad_b_norm,
            d_grad_b,
            d_ut,
        }
    }

    pub fn n(&self) -> usize {
        self.p.n()
    }

    pub fn ut(&self) -> f64 {
        self.grad[2 * self.n()]
    }

    pub fn e2n(&self) -> HorizontalVector {
        HorizontalVector(self.grad_b.iter().map(|g| g / self.grad_b_norm).collect())
    }

    pub fn alpha(&self) -> f64 {
        -self.ut() / self.grad_b_norm
    }

    fn d_grad_b_along(&self, w: &[f64]) -> Vec<f64> {
        self.d_grad_b
            .iter()
            .map(|row| row.iter().zip(w).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Directional derivative of the frame coefficients of `e_2n` along the
    /// coordinate vector `w`.
    pub fn d_e2n(&self, w: &[f64]) -> HorizontalVector {
        let dg = self.d_grad_b_along(w);
        let e = self.e2n();
        let radial: f64 = e.0.iter().zip(&dg).map(|(a, b)| a * b).sum();
        HorizontalVector(
            dg.iter()
                .zip(&e.0)
                .map(|(d, ei)| (d - ei * radial) / self.grad_b_norm)
                .collect(),
        )
    }

    /// Directional derivative of `α` along the coordinate vector `w`.
    pub fn d_alpha(&self, w: &[f64]) -> f64 {
        let dg = self.d_grad_b_along(w);
        let dut: f64 = self.d_ut.iter().zip(w).map(|(a, b)| a * b).sum();
        let gdg: f64 = self.grad_b.iter().zip(&dg).map(|(a, b)| a * b).sum();
        let g = self.grad_b_norm;
        -dut / g + self.ut() * gdg / (g * g * g)
    }

    fn coord_norm_grad(&self) -> f64 {
        self.grad.iter().map(|g| g * g).sum::<f64>().sqrt()
    }
}

/// The unit horizontal normal as a vector field (differentiable through the
/// defining function's second derivatives).
pub struct NormalField<'a>(pub &'a SurfaceDef);

impl HorizontalField for NormalField<'_> {
    fn jacobian(&self, p: &Point) -> Result<(HorizontalVector, Vec<Vec<f64>>)> {
        let g = LocalGeometry::new(self.0, p)?;
        let dim = p.coords().len();
        let mut cols = Vec::with_capacity(dim);
        for i in 0..dim {
            let mut w = vec![0.0; dim];
            w[i] = 1.0;
            cols.push(g.d_e2n(&w).0);
        }
        let rows = (0..2 * p.n())
            .map(|a| (0..dim).map(|i| cols[i][a]).collect())
            .collect();
        Ok((g.e2n(), rows))
    }
}

/// Orthonormal frame adapted to `Σ` at a regular point.
#[derive(Debug, Clone)]
pub struct FrameBundle {
    pub p: Point,
    pub e2n: HorizontalVector,
    pub en: HorizontalVector,
    /// `e_1..e_{n−1}` followed by `e_{n+1} = J e_1, .., e_{2n−1} = J e_{n−1}`.
    pub xi_prime: Vec<HorizontalVector>,
    pub alpha: f64,
    pub grad_b_norm: f64,
    /// Frame indices chosen by the pivoted Gram–Schmidt, one per `J`-pair.
    pub pivots: Vec<usize>,
}

impl FrameBundle {
    pub fn n(&self) -> usize {
        self.p.n()
    }

    /// Basis of `ξ ∩ TΣ` in report order: `e_1..e_{n−1}, e_n, e_{n+1}..e_{2n−1}`.
    pub fn basis(&self) -> Vec<HorizontalVector> {
        let n = self.n();
        let mut b = Vec::with_capacity(2 * n - 1);
        b.extend_from_slice(&self.xi_prime[..n - 1]);
        b.push(self.en.clone());
        b.extend_from_slice(&self.xi_prime[n - 1..]);
        b
    }

    /// `ê_2n = (α e_2n + T)/√(1+α²)` in coordinates.
    pub fn e2n_hat_coords(&self) -> Vec<f64> {
        let mut w = self.e2n.scale(self.alpha).lift(&self.p);
        w[2 * self.n()] += 1.0;
        let s = (1.0 + self.alpha * self.alpha).sqrt();
        w.iter().map(|x| x / s).collect()
    }
}

/// Builds the adapted frame at an on-surface regular point.
pub fn build_frame(s: &SurfaceDef, p: &Point) -> Result<FrameBundle> {
    build_frame_with(s, p, &Tolerances::default())
}

pub fn build_frame_with(s: &SurfaceDef, p: &Point, tol: &Tolerances) -> Result<FrameBundle> {
    let g = LocalGeometry::new(s, p)?;
    check_on_surface(&g, tol)?;
    frame_from_geometry(&g, tol)
}

pub(crate) fn check_on_surface(g: &LocalGeometry, tol: &Tolerances) -> Result<()> {
    let pn = g.p.coords().iter().map(|c| c * c).sum::<f64>().sqrt();
    let bound = tol.on_surface * (1.0 + g.coord_norm_grad() * (1.0 + pn));
    if g.u.abs() > bound {
        return Err(Error::OffSurface {
            residual: g.u.abs(),
            tol: bound,
        });
    }
    Ok(())
}

/// Frame of the level set of `u` through `p` (no on-surface requirement).
pub fn frame_from_geometry(g: &LocalGeometry, tol: &Tolerances) -> Result<FrameBundle> {
    let eps = tol.singular_eps * (1.0 + g.coord_norm_grad());
    if g.grad_b_norm <= eps || !g.grad_b_norm.is_finite() {
        return Err(Error::SingularPoint {
            norm: g.grad_b_norm,
            eps,
        });
    }
    let n = g.n();
    let e2n = g.e2n();
    let en = e2n.apply_j().scale(-1.0);
    let (firsts, seconds, pivots) = j_adapted_complement(n, &[en.clone(), e2n.clone()]);
    let mut xi_prime = firsts;
    xi_prime.extend(seconds);
    Ok(FrameBundle {
        p: g.p.clone(),
        e2n,
        en,
        xi_prime,
        alpha: g.alpha(),
        grad_b_norm: g.grad_b_norm,
        pivots,
    })
}

/// Pivoted Gram–Schmidt over `ė_1..ė_2n` completing a `J`-invariant
/// orthonormal set to a basis; each chosen vector `e` is paired with `J e`.
fn j_adapted_complement(
    n: usize,
    fixed: &[HorizontalVector],
) -> (Vec<HorizontalVector>, Vec<HorizontalVector>, Vec<usize>) {
    let mut span: Vec<HorizontalVector> = fixed.to_vec();
    let pairs = n - fixed.len() / 2;
    let mut firsts = Vec::with_capacity(pairs);
    let mut seconds = Vec::with_capacity(pairs);
    let mut pivots = Vec::with_capacity(pairs);
    for _ in 0..pairs {
        let mut best: Option<(usize, HorizontalVector, f64)> = None;
        // `ė_a` and `J ė_a` leave residuals of equal length, so only the
        // first half competes.
        for a in 0..n {
            let mut r = HorizontalVector::basis(n, a + 1).expect("index in range");
            for q in &span {
                r = r.axpy(-r.dot(q), q);
            }
            let nr = r.norm();
            if best.as_ref().is_none_or(|b| nr > b.2) {
                best = Some((a, r, nr));
            }
        }
        let (a, r, nr) = best.expect("non-empty candidate set");
        let e = r.scale(1.0 / nr);
        let je = e.apply_j();
        span.push(e.clone());
        span.push(je.clone());
        firsts.push(e);
        seconds.push(je);
        pivots.push(a);
    }
    (firsts, seconds, pivots)
}

/// Per-point curvature state of `Σ`.
#[derive(Debug, Clone)]
pub struct SurfaceReport {
    pub frame: FrameBundle,
    /// `h_ab` in the basis of [`FrameBundle::basis`].
    pub h: Mat,
    /// Matrix of the shape operator `𝔖 = −∇e_2n + αJ′` on `ξ ∩ TΣ`,
    /// `shape[(a, b)] = ⟨𝔖 e_b, e_a⟩`.
    pub shape: Mat,
    pub k: f64,
    pub l: f64,
    pub mean_curvature: f64,
    /// Eigenvalues of `𝔖` restricted to `ξ′`, ascending.
    pub eigenvalues: Vec<f64>,
    pub xn_residual: f64,
    pub spread: f64,
    pub umbilic: bool,
}

/// Serializes as `{point, alpha, k, l, H, eigenvalues, xn_residual, spread,
/// umbilic}`.
impl Serialize for SurfaceReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_struct("SurfaceReport", 9)?;
        m.serialize_field("point", self.frame.p.coords())?;
        m.serialize_field("alpha", &self.frame.alpha)?;
        m.serialize_field("k", &self.k)?;
        m.serialize_field("l", &self.l)?;
        m.serialize_field("H", &self.mean_curvature)?;
        m.serialize_field("eigenvalues", &self.eigenvalues)?;
        m.serialize_field("xn_residual", &self.xn_residual)?;
        m.serialize_field("spread", &self.spread)?;
        m.serialize_field("umbilic", &self.umbilic)?;
        m.end()
    }
}

impl SurfaceReport {
    pub fn alpha(&self) -> f64 {
        self.frame.alpha
    }

    /// Indices of the `ξ′` rows/columns in `h` and `shape`.
    pub fn xi_prime_indices(&self) -> Vec<usize> {
        let n = self.frame.n();
        (0..2 * n - 1).filter(|&i| i != n - 1).collect()
    }
}

/// Second fundamental form, shape operator and umbilicity at the frame's point.
pub fn shape_matrix(s: &SurfaceDef, f: &FrameBundle) -> Result<SurfaceReport> {
    let tol = match s.derivatives() {
        crate::field::Derivatives::Dual => Tolerances::default(),
        crate::field::Derivatives::FiniteDifference => Tolerances::finite_difference(),
    };
    shape_matrix_with(s, f, &tol)
}

pub fn shape_matrix_with(
    s: &SurfaceDef,
    f: &FrameBundle,
    tol: &Tolerances,
) -> Result<SurfaceReport> {
    let normal = NormalField(s);
    let n = f.n();
    let basis = f.basis();
    let m = basis.len();
    let derivs: Vec<HorizontalVector> = basis
        .iter()
        .map(|e| covariant_derivative(&normal, &TangentVector::horizontal(e.clone()), &f.p))
        .collect::<Result<_>>()?;
    let h = Mat::from_fn(m, |a, b| -derivs[b].dot(&basis[a]));
    let jprime: Vec<HorizontalVector> = basis
        .iter()
        .enumerate()
        .map(|(b, e)| {
            if b == n - 1 {
                HorizontalVector::zeros(n)
            } else {
                e.apply_j()
            }
        })
        .collect();
    let shape = Mat::from_fn(m, |a, b| h[(a, b)] + f.alpha * jprime[b].dot(&basis[a]));
    finish_report(f.clone(), h, shape, &derivs[n - 1], tol)
}

fn finish_report(
    frame: FrameBundle,
    h: Mat,
    shape: Mat,
    d_en_e2n: &HorizontalVector,
    tol: &Tolerances,
) -> Result<SurfaceReport> {
    let n = frame.n();
    let keep: Vec<usize> = (0..2 * n - 1).filter(|&i| i != n - 1).collect();
    let s_xi = shape.select(&keep);
    let size = 1.0 + h.max_abs();
    let asym = s_xi.asymmetry();
    if asym > tol.symmetry * size {
        return Err(Error::NonSymmetric(asym));
    }
    let eigenvalues = symmetric_eigenvalues(&s_xi.symmetrized());
    let k = eigenvalues.iter().sum::<f64>() / eigenvalues.len() as f64;
    let spread = eigenvalues.last().unwrap_or(&0.0) - eigenvalues.first().unwrap_or(&0.0);
    let l = h[(n - 1, n - 1)];
    let xn_residual = d_en_e2n.axpy(l, &frame.en).norm();
    let umbilic = xn_residual <= tol.umbilic * size && spread <= tol.umbilic * size;
    Ok(SurfaceReport {
        frame,
        mean_curvature: h.trace(),
        h,
        shape,
        k,
        l,
        eigenvalues,
        xn_residual,
        spread,
        umbilic,
    })
}

/// [`build_frame`] followed by [`shape_matrix`].
pub fn report(s: &SurfaceDef, p: &Point) -> Result<SurfaceReport> {
    let tol = match s.derivatives() {
        crate::field::Derivatives::Dual => Tolerances::default(),
        crate::field::Derivatives::FiniteDifference => Tolerances::finite_difference(),
    };
    let f = build_frame_with(s, p, &tol)?;
    shape_matrix_with(s, &f, &tol)
}

/// A rotationally symmetric profile `t² = F(r)`, `r = |z|²`, evaluated with
/// its first two derivatives.
#[derive(Clone)]
pub struct RadialProfile {
    pub name: String,
    f: Arc<dyn Fn(&Dual2) -> Dual2 + Send + Sync>,
}

impl RadialProfile {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(&Dual2) -> Dual2 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    /// `(F, F′, F″)` at `r`.
    pub fn eval(&self, r: f64) -> (f64, f64, f64) {
        let d = (self.f)(&Dual2::variable(r, 0, 1));
        (d.value, d.grad[0], d.hess[0])
    }
}

/// Closed-form report for a rotationally symmetric surface `t² = F(|z|²)`
/// oriented by `u = F − t²`.
pub fn rotsym_report(profile: &RadialProfile, p: &Point) -> Result<SurfaceReport> {
    let n = p.n();
    let z = p.z_norm();
    let t = p.t();
    let r = z * z;
    let (f, f1, f2) = profile.eval(r);
    let d = f1 * f1 + f;
    if z == 0.0 {
        return Err(Error::DegenerateProfile("|z| = 0".into()));
    }
    if !(d > 0.0) {
        return Err(Error::DegenerateProfile(format!("(F′)² + F = {d:e} <= 0")));
    }
    let off = (t * t - f).abs();
    let off_tol = 1e-9 * (1.0 + f.abs() + t * t);
    if off > off_tol {
        return Err(Error::OffSurface {
            residual: off,
            tol: off_tol,
        });
    }
    let sq = d.sqrt();
    let k = -f1 / (z * sq);
    let alpha = t / (z * sq);
    let l = (r - f1) / (z * sq) - (1.0 + 2.0 * f2) * f * z / (d * sq);

    let mut e2n = HorizontalVector::zeros(n);
    for b in 0..n {
        let (x, y) = (p.x()[b], p.y()[b]);
        e2n.0[b] = (f1 * x - t * y) / (z * sq);
        e2n.0[n + b] = (f1 * y + t * x) / (z * sq);
    }
    let en = e2n.apply_j().scale(-1.0);
    let (firsts, seconds, pivots) = j_adapted_complement(n, &[en.clone(), e2n.clone()]);
    let mut xi_prime = firsts;
    xi_prime.extend(seconds);
    let frame = FrameBundle {
        p: p.clone(),
        e2n,
        en,
        xi_prime,
        alpha,
        grad_b_norm: 2.0 * z * sq,
        pivots,
    };
    let m = 2 * n - 1;
    let mut h = Mat::zeros(m);
    for i in 0..m {
        h[(i, i)] = k;
    }
    h[(n - 1, n - 1)] = l;
    for b in 0..n - 1 {
        h[(b, n + b)] = alpha;
        h[(n + b, b)] = -alpha;
    }
    let mut shape = Mat::zeros(m);
    for i in 0..m {
        shape[(i, i)] = k;
    }
    shape[(n - 1, n - 1)] = l;
    Ok(SurfaceReport {
        frame,
        mean_curvature: h.trace(),
        h,
        shape,
        k,
        l,
        eigenvalues: vec![k; 2 * n - 2],
        xn_residual: 0.0,
        spread: 0.0,
        umbilic: true,
    })
}

/// Second-order germ of a graph `t = g(x, y)` at the origin of `R^{2n}`.
#[derive(Debug, Clone)]
pub struct GraphGerm {
    pub n: usize,
    pub grad: Vec<f64>,
    pub hess: Mat,
}

impl GraphGerm {
    /// Exact germ of a closed form in the `2n` variables `(x, y)`.
    pub fn from_expr<E: Expr>(n: usize, g: &E) -> Result<Self> {
        crate::error::check_dimension(n)?;
        let d: Dual2 = g.eval(&Dual2::seed(&vec![0.0; 2 * n]));
        Ok(Self {
            n,
            grad: d.grad.clone(),
            hess: Mat::from_fn(2 * n, |i, j| d.hess_at(i, j)),
        })
    }

    /// Quadratic fit by central differences with step `h`.
    pub fn fit(n: usize, g: impl Fn(&[f64]) -> f64, h: f64) -> Result<Self> {
        crate::error::check_dimension(n)?;
        let m = 2 * n;
        let mut x = vec![0.0; m];
        let g0 = g(&x);
        let mut grad = vec![0.0; m];
        let mut hess = Mat::zeros(m);
        for i in 0..m {
            x[i] = h;
            let gp = g(&x);
            x[i] = -h;
            let gm = g(&x);
            x[i] = 0.0;
            grad[i] = (gp - gm) / (2.0 * h);
            hess[(i, i)] = (gp - 2.0 * g0 + gm) / (h * h);
            for j in 0..i {
                let mut at = |si: f64, sj: f64| {
                    x[i] = si * h;
                    x[j] = sj * h;
                    let v = g(&x);
                    x[i] = 0.0;
                    x[j] = 0.0;
                    v
                };
                let v =
                    (at(1.0, 1.0) - at(1.0, -1.0) - at(-1.0, 1.0) + at(-1.0, -1.0)) / (4.0 * h * h);
                hess[(i, j)] = v;
                hess[(j, i)] = v;
            }
        }
        Ok(Self { n, grad, hess })
    }

    /// `t = B |(x, y)|²`.
    pub fn quadratic(n: usize, b: f64) -> Result<Self> {
        crate::error::check_dimension(n)?;
        Ok(Self {
            n,
            grad: vec![0.0; 2 * n],
            hess: Mat::from_fn(2 * n, |i, j| if i == j { 2.0 * b } else { 0.0 }),
        })
    }
}

#[derive(Debug, Clone)]
pub struct SingularJacobian {
    pub u: Mat,
    pub det: f64,
}

/// `U = Hess g(0) + [[0, −I], [I, 0]]` and its determinant.
pub fn singular_jacobian(germ: &GraphGerm) -> Result<SingularJacobian> {
    let gn = germ.grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    if gn > 1e-8 {
        return Err(Error::NotSingularCandidate(gn));
    }
    let n = germ.n;
    let mut u = germ.hess.clone();
    for j in 0..n {
        u[(j, n + j)] -= 1.0;
        u[(n + j, j)] += 1.0;
    }
    let det = determinant(&u);
    Ok(SingularJacobian { u, det })
}
