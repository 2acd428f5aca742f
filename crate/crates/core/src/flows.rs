//! Curves on `H_n`: geodesics of curvature `λ`, the radial profile equation of
//! rotationally symmetric umbilic surfaces, and finite-difference checks of
//! the structure identities along surface-tangent flows.

use serde::Serialize;

use crate::catalog::pansu_height;
use crate::error::{Error, Result};
use crate::field::SurfaceDef;
use crate::heisenberg::{contact_form, HorizontalVector, Point};
use crate::linalg::{dot, rank_and_basis};
use crate::ode::{self, Control};
use crate::surface::{self, frame_from_geometry, FrameBundle, LocalGeometry, Tolerances};

/// A point with a unit horizontal direction.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveState {
    pub p: Point,
    pub v: HorizontalVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveSample {
    pub s: f64,
    pub p: Point,
    pub v: HorizontalVector,
}

fn geodesic_rhs(n: usize, lambda: f64) -> impl Fn(f64, &[f64]) -> Vec<f64> {
    move |_s, y| {
        let (c, v) = y.split_at(2 * n + 1);
        let mut out = Vec::with_capacity(y.len());
        out.extend_from_slice(v);
        let mut tdot = 0.0;
        for j in 0..n {
            tdot += c[n + j] * v[j] - c[j] * v[n + j];
        }
        out.push(tdot);
        for j in 0..n {
            out.push(-2.0 * lambda * v[n + j]);
        }
        for j in 0..n {
            out.push(2.0 * lambda * v[j]);
        }
        out
    }
}

/// Integrates `∇_γ̇ γ̇ = 2λ J γ̇` in frame coefficients: `v′ = 2λ J v`, with
/// horizontal velocity `γ̇ = v`.
pub fn geodesic_flow(start: &CurveState, lambda: f64, s_max: f64) -> Result<Vec<CurveSample>> {
    geodesic_flow_with(start, lambda, s_max, &GEODESIC_OPTIONS)
}

/// At `1e-10` the norm of `v` drifts by several `1e-9` over ten turns at
/// `λ = 4`.
pub const GEODESIC_OPTIONS: ode::Options = ode::Options {
    rtol: 1e-12,
    atol: 1e-12,
    max_step: 0.05,
    fixed_step: None,
    max_steps: 10_000_000,
};

pub fn geodesic_flow_with(
    start: &CurveState,
    lambda: f64,
    s_max: f64,
    opts: &ode::Options,
) -> Result<Vec<CurveSample>> {
    let n = start.p.n();
    if start.v.n() != n {
        return Err(Error::Length {
            expected: 2 * n,
            got: start.v.0.len(),
        });
    }
    if !lambda.is_finite() || !s_max.is_finite() {
        return Err(Error::NonFinite);
    }
    if (start.v.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidArgument(format!(
            "initial direction must be unit, |v| = {}",
            start.v.norm()
        )));
    }
    let mut y0 = start.p.coords().to_vec();
    y0.extend_from_slice(&start.v.0);
    let split = |s: f64, y: &[f64]| -> CurveSample {
        CurveSample {
            s,
            p: Point::from_coords(&y[..2 * n + 1]).expect("finite state"),
            v: HorizontalVector(y[2 * n + 1..].to_vec()),
        }
    };
    let mut out = vec![split(0.0, &y0)];
    ode::integrate(&geodesic_rhs(n, lambda), 0.0, &y0, s_max, opts, |st| {
        out.push(split(st.s1, &st.y1));
        Control::Continue
    })?;
    Ok(out)
}

/// Centre of the circle traced by the horizontal projection of a geodesic
/// with `λ ≠ 0`; the radius is `1/(2|λ|)`.
pub fn circle_center(start: &CurveState, lambda: f64) -> Option<Vec<f64>> {
    if lambda == 0.0 {
        return None;
    }
    let jv = start.v.apply_j();
    Some(
        start.p.coords()[..2 * start.p.n()]
            .iter()
            .zip(&jv.0)
            .map(|(w, j)| w + j / (2.0 * lambda))
            .collect(),
    )
}

/// First parameter at which `|z|` stops decreasing along the samples (the
/// curve reaches the `t`-axis, where a characteristic curve of `S_λ` meets a
/// pole).
pub fn first_pole_arrival(samples: &[CurveSample]) -> Option<f64> {
    let radial = |c: &CurveSample| -> f64 {
        let n = c.p.n();
        c.p.coords()[..2 * n]
            .iter()
            .zip(&c.v.0)
            .map(|(a, b)| a * b)
            .sum()
    };
    let mut prev: Option<(f64, f64)> = None;
    for c in samples {
        let r = radial(c);
        if let Some((s0, r0)) = prev {
            if r0 < 0.0 && r >= 0.0 {
                return Some(s0 + (c.s - s0) * r0 / (r0 - r));
            }
        }
        prev = Some((c.s, r));
    }
    None
}

/// The profile `f(r)` of `t² = f(|z|²)` sampled on a grid.
#[derive(Debug, Clone, Serialize)]
pub struct ProfileTable {
    pub lambda: f64,
    pub r: Vec<f64>,
    pub f: Vec<f64>,
    pub fprime: Vec<f64>,
}

impl ProfileTable {
    /// Largest `|f(r) − P(√r)²|` over the grid.
    pub fn closed_form_error(&self) -> f64 {
        self.r
            .iter()
            .zip(&self.f)
            .map(|(r, f)| {
                let p = pansu_height(self.lambda, r.sqrt());
                (f - p * p).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Largest `|−f′/(√r √(f′² + f)) − λ|` over the grid.
    pub fn curvature_residual(&self) -> f64 {
        self.r
            .iter()
            .zip(self.f.iter().zip(&self.fprime))
            .map(|(r, (f, fp))| (-fp / (r.sqrt() * (fp * fp + f).sqrt()) - self.lambda).abs())
            .fold(0.0, f64::max)
    }
}

/// Offset from the equator `r = 1/λ²` at which integration starts.
pub const PROFILE_EQUATOR_GAP: f64 = 1e-6;

/// `m` equally spaced radii in `(0, (1 − gap)/λ²]`.
pub fn profile_grid(lambda: f64, m: usize) -> Vec<f64> {
    let re = (1.0 - PROFILE_EQUATOR_GAP) / (lambda * lambda);
    (1..=m).map(|i| re * i as f64 / m as f64).collect()
}

/// Integrates `f′ = −√(λ² r f / (1 − λ² r))` backwards from the equator,
/// starting from `f ≈ (s − s²/3)/λ⁴`, `s = 1 − λ²r`, and reports `f` on `grid`.
pub fn profile_ode(lambda: f64, grid: &[f64]) -> Result<ProfileTable> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let l2 = lambda * lambda;
    let re = (1.0 - PROFILE_EQUATOR_GAP) / l2;
    if let Some(bad) = grid.iter().find(|&&r| !(r > 0.0 && r <= re)) {
        return Err(Error::Domain(format!(
            "radius {bad} outside (0, {re}] for lambda = {lambda}"
        )));
    }
    let rhs = move |r: f64, y: &[f64]| vec![-(l2 * r * y[0].max(0.0) / (1.0 - l2 * r)).sqrt()];
    let s0 = PROFILE_EQUATOR_GAP;
    let f0 = (s0 - s0 * s0 / 3.0) / (l2 * l2);
    let opts = ode::Options {
        rtol: 1e-12,
        atol: 1e-14,
        max_step: 0.01 / l2,
        ..ode::Options::default()
    };
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| grid[b].total_cmp(&grid[a]));
    let mut f = vec![0.0; grid.len()];
    let (mut r, mut y) = (re, vec![f0]);
    for i in order {
        if grid[i] < r {
            let (r1, y1) = ode::integrate(&rhs, r, &y, grid[i], &opts, |_| Control::Continue)?;
            r = r1;
            y = y1;
        }
        f[i] = y[0];
    }
    let fprime = grid
        .iter()
        .zip(&f)
        .map(|(&r, &fv)| rhs(r, &[fv])[0])
        .collect();
    Ok(ProfileTable {
        lambda,
        r: grid.to_vec(),
        f,
        fprime,
    })
}

/// A surface-tangent direction field along which finite differences are taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Direction {
    /// The characteristic direction `e_n`.
    En,
    /// `ê_2n = (α e_2n + T)/√(1+α²)`.
    E2nHat,
    /// The `i`-th `ξ′` basis vector.
    XiPrime(usize),
}

/// Finite-difference probe of a surface around a base point.
struct Probe<'a> {
    s: &'a SurfaceDef,
    tol: Tolerances,
    pivots: Vec<usize>,
}

#[derive(Debug, Clone, Copy)]
struct Scalars {
    k: f64,
    l: f64,
    alpha: f64,
    en_alpha: f64,
}

impl<'a> Probe<'a> {
    fn new(s: &'a SurfaceDef, base: &FrameBundle) -> Self {
        Self {
            s,
            tol: Tolerances::default(),
            pivots: base.pivots.clone(),
        }
    }

    fn level_frame(&self, q: &Point) -> Result<(LocalGeometry, FrameBundle)> {
        let g = LocalGeometry::new(self.s, q)?;
        let f = frame_from_geometry(&g, &self.tol)?;
        Ok((g, f))
    }

    /// The direction field in coordinates, from the frame of the level set
    /// through `q`.
    fn field(&self, q: &Point, d: Direction) -> Result<Vec<f64>> {
        let (_, f) = self.level_frame(q)?;
        Ok(match d {
            Direction::En => f.en.lift(q),
            Direction::E2nHat => f.e2n_hat_coords(),
            Direction::XiPrime(i) => {
                if f.pivots != self.pivots {
                    return Err(Error::PivotSwitch);
                }
                f.xi_prime[i].lift(q)
            }
        })
    }

    /// Moves a parameter distance `h` along the field (RK4, four substeps),
    /// then projects back onto `{u = 0}`.
    fn flow(&self, p: &Point, d: Direction, h: f64) -> Result<Point> {
        const SUB: usize = 4;
        let dt = h / SUB as f64;
        let mut q = p.clone();
        let shift = |q: &Point, k: &[f64], a: f64| -> Result<Point> {
            let c: Vec<f64> = q.coords().iter().zip(k).map(|(x, v)| x + a * v).collect();
            Point::from_coords(&c)
        };
        for _ in 0..SUB {
            let k1 = self.field(&q, d)?;
            let k2 = self.field(&shift(&q, &k1, 0.5 * dt)?, d)?;
            let k3 = self.field(&shift(&q, &k2, 0.5 * dt)?, d)?;
            let k4 = self.field(&shift(&q, &k3, dt)?, d)?;
            let inc: Vec<f64> = (0..k1.len())
                .map(|i| (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0)
                .collect();
            q = shift(&q, &inc, dt)?;
        }
        project(self.s, &q)
    }

    fn scalars(&self, q: &Point) -> Result<Scalars> {
        let (g, f) = self.level_frame(q)?;
        let r = surface::shape_matrix_with(self.s, &f, &self.tol)?;
        Ok(Scalars {
            k: r.k,
            l: r.l,
            alpha: r.alpha(),
            en_alpha: g.d_alpha(&f.en.lift(q)),
        })
    }

    fn pair(&self, p: &Point, d: Direction, h: f64) -> Result<(Scalars, Scalars)> {
        let plus = self.scalars(&self.flow(p, d, h)?)?;
        let minus = self.scalars(&self.flow(p, d, -h)?)?;
        Ok((plus, minus))
    }
}

/// Newton projection onto `{u = 0}` along the coordinate gradient.
pub fn project(s: &SurfaceDef, q: &Point) -> Result<Point> {
    let mut c = q.coords().to_vec();
    let mut last = f64::INFINITY;
    for _ in 0..10 {
        let jet = s.jet(&c)?;
        let g2: f64 = jet.grad.iter().map(|g| g * g).sum();
        let scale = 1.0 + g2.sqrt() * (1.0 + c.iter().map(|x| x * x).sum::<f64>().sqrt());
        last = jet.value.abs();
        if last <= 1e-14 * scale {
            return Point::from_coords(&c);
        }
        if g2 == 0.0 {
            break;
        }
        let step = jet.value / g2;
        for (ci, gi) in c.iter_mut().zip(&jet.grad) {
            *ci -= step * gi;
        }
        let moved = step.abs() * g2.sqrt();
        if moved <= 1e-16 * (1.0 + c.iter().map(|x| x.abs()).fold(0.0, f64::max)) {
            return Point::from_coords(&c);
        }
    }
    Err(Error::ProjectionFailure(last))
}

/// Labels of the six residuals returned by [`identity_check`].
pub const IDENTITY_NAMES: [&str; 6] = [
    "xi-prime",
    "en-k",
    "en-alpha",
    "e2n-k",
    "e2n-alpha",
    "e2n-l",
];

/// Residuals of the structure identities of an umbilic hypersurface:
///
/// ```text
/// e k = e l = e α = e(e_n α) = 0      for e ∈ ξ′
/// e_n k = (l − 2k) α
/// e_n α = k² − α² − kl
/// ê_2n k = α (k² + e_n α + α²) / √(1+α²)
/// ê_2n α = −k e_n α / √(1+α²)
/// ê_2n l = (e_n e_n α + 6α e_n α + 4α³ + α l²) / √(1+α²)
/// ```
#[derive(Debug, Clone, Serialize)]
pub struct IdentityResiduals {
    pub h: f64,
    pub residuals: [f64; 6],
    pub k: f64,
    pub l: f64,
    pub alpha: f64,
    pub en_alpha: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }
}

/// Evaluates the identity residuals at `p` with central differences of step
/// `h` along surface-tangent flows. `e_n α` is exact from the jet of `u`;
/// `e_n e_n α` is its central difference along `e_n`.
pub fn identity_check(s: &SurfaceDef, p: &Point, h: f64) -> Result<IdentityResiduals> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "step must be positive, got {h}"
        )));
    }
    let base = surface::build_frame(s, p)?;
    let rep = surface::shape_matrix(s, &base)?;
    if !rep.umbilic {
        return Err(Error::Domain(format!(
            "identity system needs an umbilic point (spread {:e}, |X_n| {:e})",
            rep.spread, rep.xn_residual
        )));
    }
    let probe = Probe::new(s, &base);
    let g = LocalGeometry::new(s, p)?;
    let (k, l, a) = (rep.k, rep.l, rep.alpha());
    let ena = g.d_alpha(&base.en.lift(p));
    let d = |plus: f64, minus: f64| (plus - minus) / (2.0 * h);

    let mut xi: f64 = 0.0;
    for i in 0..base.xi_prime.len() {
        let (pl, mi) = probe.pair(p, Direction::XiPrime(i), h)?;
        for v in [
            d(pl.k, mi.k),
            d(pl.l, mi.l),
            d(pl.alpha, mi.alpha),
            d(pl.en_alpha, mi.en_alpha),
        ] {
            xi = xi.max(v.abs());
        }
    }
    let (ep, em) = probe.pair(p, Direction::En, h)?;
    let (hp, hm) = probe.pair(p, Direction::E2nHat, h)?;
    let sq = (1.0 + a * a).sqrt();
    let en_k = d(ep.k, em.k);
    let en_a = d(ep.alpha, em.alpha);
    let en_en_a = d(ep.en_alpha, em.en_alpha);
    let h_k = d(hp.k, hm.k);
    let h_a = d(hp.alpha, hm.alpha);
    let h_l = d(hp.l, hm.l);
    let residuals = [
        xi,
        (en_k - (l - 2.0 * k) * a).abs(),
        (en_a - (k * k - a * a - k * l)).abs(),
        (h_k - a * (k * k + ena + a * a) / sq).abs(),
        (h_a + k * ena / sq).abs(),
        (h_l - (en_en_a + 6.0 * a * ena + 4.0 * a.powi(3) + a * l * l) / sq).abs(),
    ];
    Ok(IdentityResiduals {
        h,
        residuals,
        k,
        l,
        alpha: a,
        en_alpha: ena,
    })
}

/// Largest change of `k`, `l`, `α` over steps of length `h` along each
/// `ξ′` direction.
pub fn leaf_variation(s: &SurfaceDef, p: &Point, h: f64) -> Result<f64> {
    let base = surface::build_frame(s, p)?;
    let probe = Probe::new(s, &base);
    let c = probe.scalars(p)?;
    let mut worst: f64 = 0.0;
    for i in 0..base.xi_prime.len() {
        let (pl, mi) = probe.pair(p, Direction::XiPrime(i), h)?;
        for q in [pl, mi] {
            worst = worst
                .max((q.k - c.k).abs())
                .max((q.l - c.l).abs())
                .max((q.alpha - c.alpha).abs());
        }
    }
    Ok(worst)
}

/// Dimension of the span of the `ξ′` fields and their pairwise brackets, and
/// how much of `e_n` that span captures.
#[derive(Debug, Clone, Serialize)]
pub struct FoliationRank {
    pub rank: usize,
    /// Norm of the orthogonal projection of `e_n` onto the span, in the
    /// metric `Θ² + G`.
    pub en_projection: f64,
}

/// Brackets `[v_i, v_j] = D_{v_i} v_j − D_{v_j} v_i` by central differences
/// of step `h` in the ambient coordinates, with the fields extended by the
/// frames of the level sets of `u`; rank threshold `rel_tol`.
pub fn foliation_rank(s: &SurfaceDef, p: &Point, h: f64, rel_tol: f64) -> Result<FoliationRank> {
    let base = surface::build_frame(s, p)?;
    let probe = Probe::new(s, &base);
    let m = base.xi_prime.len();
    let fields: Vec<Vec<f64>> = (0..m)
        .map(|i| probe.field(p, Direction::XiPrime(i)))
        .collect::<Result<_>>()?;
    let along = |x: &[f64], j: usize| -> Result<Vec<f64>> {
        let at = |a: f64| -> Result<Vec<f64>> {
            let c: Vec<f64> = p
                .coords()
                .iter()
                .zip(x)
                .map(|(pi, xi)| pi + a * xi)
                .collect();
            probe.field(&Point::from_coords(&c)?, Direction::XiPrime(j))
        };
        let (yp, ym) = (at(h)?, at(-h)?);
        Ok(yp
            .iter()
            .zip(&ym)
            .map(|(a, b)| (a - b) / (2.0 * h))
            .collect())
    };
    let metric = |w: &[f64]| -> Vec<f64> {
        let n = p.n();
        let mut out = w[..2 * n].to_vec();
        out.push(contact_form(p, w));
        out
    };
    let mut vecs: Vec<Vec<f64>> = fields.iter().map(|w| metric(w)).collect();
    for i in 0..m {
        for j in (i + 1)..m {
            let dij = along(&fields[i], j)?;
            let dji = along(&fields[j], i)?;
            let br: Vec<f64> = dij.iter().zip(&dji).map(|(a, b)| a - b).collect();
            vecs.push(metric(&br));
        }
    }
    let (rank, basis) = rank_and_basis(&vecs, rel_tol);
    let mut en = base.en.0.clone();
    en.push(0.0);
    let en_projection = basis
        .iter()
        .map(|b| dot(b, &en).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(FoliationRank {
        rank,
        en_projection,
    })
}
