//! Closed-form umbilic hypersurfaces with their expected invariants.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::dual::{sum_squares, Dual2, Scalar};
use crate::error::{check_dimension, Error, Result};
use crate::field::{Expr, SurfaceDef};
use crate::heisenberg::Point;
use crate::surface::{self, GraphGerm, RadialProfile, SurfaceReport};

/// `P(ρ) = (λρ√(1−λ²ρ²) + arccos(λρ)) / (2λ²)`, the height of the Pansu
/// sphere `S_λ` over `|z| = ρ`.
pub fn pansu_height(lambda: f64, rho: f64) -> f64 {
    let lr = lambda * rho;
    (lr * (1.0 - lr * lr).sqrt() + lr.acos()) / (2.0 * lambda * lambda)
}

fn pansu_height_s<S: Scalar>(lambda: f64, rho: &S) -> S {
    let lr = rho.clone() * lambda;
    let root = (-(lr.square()) + 1.0).sqrt();
    (lr.clone() * root + lr.acos()) / (2.0 * lambda * lambda)
}

/// `asin(√s)/√s`, analytic in `s` on `(−1, 1)`.
fn asin_sqrt_ratio<S: Scalar>(s: &S) -> S {
    let v = s.value();
    if v.abs() <= 0.25 {
        // Σ C(2k,k) s^k / (4^k (2k+1))
        let mut coef = Vec::with_capacity(48);
        let mut c = 1.0;
        for k in 0..48 {
            coef.push(c / (2 * k + 1) as f64);
            c *= (2 * k + 1) as f64 / (2 * k + 2) as f64;
        }
        let mut acc = s.lift(coef[47]);
        for &ck in coef[..47].iter().rev() {
            acc = acc * s.clone() + ck;
        }
        acc
    } else {
        let r = s.sqrt();
        (-(s.clone()) + 1.0).sqrt().acos() / r
    }
}

/// `F(r) = P(√r)²` written in `s = 1 − λ²r`, smooth across the equator.
fn pansu_profile_s<S: Scalar>(lambda: f64, r: &S) -> S {
    let s = -(r.clone() * (lambda * lambda)) + 1.0;
    let g = (-(s.clone()) + 1.0).sqrt() + asin_sqrt_ratio(&s);
    s * g.square() / (4.0 * lambda.powi(4))
}

#[derive(Debug, Clone, Copy)]
struct PansuChart {
    lambda: f64,
    /// `+1` for the upper graph `t = P`, `−1` for the lower `t = −P`.
    side: f64,
}

impl Expr for PansuChart {
    fn eval<S: Scalar>(&self, c: &[S]) -> S {
        let m = c.len() - 1;
        let rho = sum_squares(&c[..m]).sqrt();
        pansu_height_s(self.lambda, &rho) - c[m].clone() * self.side
    }
}

#[derive(Debug, Clone, Copy)]
struct PansuEquator {
    lambda: f64,
}

impl Expr for PansuEquator {
    fn eval<S: Scalar>(&self, c: &[S]) -> S {
        let m = c.len() - 1;
        pansu_profile_s(self.lambda, &sum_squares(&c[..m])) - c[m].square()
    }
}

#[derive(Debug, Clone, Copy)]
struct HeisenbergSphere {
    rho: f64,
}

impl Expr for HeisenbergSphere {
    fn eval<S: Scalar>(&self, c: &[S]) -> S {
        let m = c.len() - 1;
        let r2 = sum_squares(&c[..m]);
        -(r2.square() + c[m].square() * 4.0) + self.rho.powi(4)
    }
}

#[derive(Debug, Clone, Copy)]
struct ShiftedSphere {
    lambda: f64,
    rho0: f64,
}

impl Expr for ShiftedSphere {
    fn eval<S: Scalar>(&self, c: &[S]) -> S {
        let m = c.len() - 1;
        let w = sum_squares(&c[..m]) + self.lambda;
        -(c[m].square() * 4.0 + w.square()) + self.rho0.powi(4)
    }
}

#[derive(Debug, Clone, Copy)]
struct Cylinder {
    c: f64,
}

impl Expr for Cylinder {
    fn eval<S: Scalar>(&self, c: &[S]) -> S {
        let m = c.len() - 1;
        -sum_squares(&c[..m]) + self.c * self.c
    }
}

#[derive(Debug, Clone)]
struct Hyperplane {
    a: Vec<f64>,
}

impl Expr for Hyperplane {
    fn eval<S: Scalar>(&self, c: &[S]) -> S {
        let mut acc = c[0].clone() * self.a[0];
        for (ci, ai) in c.iter().zip(&self.a).skip(1) {
            acc = acc + ci.clone() * *ai;
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Kind {
    Pansu { lambda: f64 },
    HeisenbergSphere { rho: f64 },
    ShiftedSphere { lambda: f64, rho0: f64 },
    Cylinder { c: f64 },
    Hyperplane { a: Vec<f64> },
}

/// Expected values of `α, k, l` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Expected {
    pub alpha: f64,
    pub k: f64,
    pub l: f64,
}

/// A catalog surface: defining charts, expected invariants and a sampler.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub n: usize,
    pub kind: Kind,
    pub params: BTreeMap<String, f64>,
    charts: Vec<SurfaceDef>,
}

/// Names accepted by [`by_name`].
pub const NAMES: [&str; 5] = [
    "pansu",
    "heisenberg-sphere",
    "shifted-sphere",
    "cylinder",
    "hyperplane",
];

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

/// Pansu sphere `S_λ`: upper and lower graphs `t = ±P(|z|)` plus a smooth
/// chart `P(|z|)² = t²` used in the band `λ²|z|² > 3/4`.
pub fn pansu(lambda: f64, n: usize) -> Result<CatalogEntry> {
    check_dimension(n)?;
    positive("lambda", lambda)?;
    let mk = |name: &str, def: SurfaceDef| def.with_param("lambda", lambda).tap_name(name);
    let charts = vec![
        mk(
            "pansu-upper",
            SurfaceDef::new("", n, PansuChart { lambda, side: 1.0 })?,
        ),
        mk(
            "pansu-lower",
            SurfaceDef::new("", n, PansuChart { lambda, side: -1.0 })?,
        ),
        mk(
            "pansu-equator",
            SurfaceDef::new("", n, PansuEquator { lambda })?,
        ),
    ];
    Ok(CatalogEntry {
        name: "pansu".into(),
        n,
        kind: Kind::Pansu { lambda },
        params: [("lambda".to_string(), lambda)].into(),
        charts,
    })
}

pub fn heisenberg_sphere(rho: f64, n: usize) -> Result<CatalogEntry> {
    check_dimension(n)?;
    positive("rho", rho)?;
    let def =
        SurfaceDef::new("heisenberg-sphere", n, HeisenbergSphere { rho })?.with_param("rho", rho);
    Ok(CatalogEntry {
        name: "heisenberg-sphere".into(),
        n,
        kind: Kind::HeisenbergSphere { rho },
        params: [("rho".to_string(), rho)].into(),
        charts: vec![def],
    })
}

/// `4t² + (|z|² + λ)² = ρ0⁴`.
pub fn shifted_sphere(lambda: f64, rho0: f64, n: usize) -> Result<CatalogEntry> {
    check_dimension(n)?;
    positive("rho0", rho0)?;
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "lambda must be >= 0, got {lambda}"
        )));
    }
    if rho0 * rho0 <= lambda {
        return Err(Error::Domain(format!(
            "shifted sphere is empty or degenerate: rho0^2 = {} <= lambda = {lambda}",
            rho0 * rho0
        )));
    }
    let def = SurfaceDef::new("shifted-sphere", n, ShiftedSphere { lambda, rho0 })?
        .with_param("lambda", lambda)
        .with_param("rho0", rho0);
    Ok(CatalogEntry {
        name: "shifted-sphere".into(),
        n,
        kind: Kind::ShiftedSphere { lambda, rho0 },
        params: [("lambda".to_string(), lambda), ("rho0".to_string(), rho0)].into(),
        charts: vec![def],
    })
}

/// `|z| = c`.
pub fn cylinder(c: f64, n: usize) -> Result<CatalogEntry> {
    check_dimension(n)?;
    positive("c", c)?;
    let def = SurfaceDef::new("cylinder", n, Cylinder { c })?.with_param("c", c);
    Ok(CatalogEntry {
        name: "cylinder".into(),
        n,
        kind: Kind::Cylinder { c },
        params: [("c".to_string(), c)].into(),
        charts: vec![def],
    })
}

/// `Σ A^a w_a = 0` in the horizontal coordinates `w = (x, y)`.
pub fn hyperplane(a: &[f64], n: usize) -> Result<CatalogEntry> {
    check_dimension(n)?;
    if a.len() != 2 * n {
        return Err(Error::Length {
            expected: 2 * n,
            got: a.len(),
        });
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    if a.iter().all(|&v| v == 0.0) {
        return Err(Error::InvalidArgument(
            "hyperplane normal must be nonzero".into(),
        ));
    }
    let mut full = a.to_vec();
    full.push(0.0);
    let mut def = SurfaceDef::new("hyperplane", n, Hyperplane { a: full })?;
    let mut params = BTreeMap::new();
    for (i, v) in a.iter().enumerate() {
        params.insert(format!("a{}", i + 1), *v);
        def = def.with_param(&format!("a{}", i + 1), *v);
    }
    Ok(CatalogEntry {
        name: "hyperplane".into(),
        n,
        kind: Kind::Hyperplane { a: a.to_vec() },
        params,
        charts: vec![def],
    })
}

/// Builds an entry from its CLI name; missing parameters take the defaults
/// `λ = 1, ρ = 1, ρ0 = 1.2, c = 1, A = ė_1`.
pub fn by_name(name: &str, n: usize, params: &BTreeMap<String, f64>) -> Result<CatalogEntry> {
    let get = |k: &str, d: f64| params.get(k).copied().unwrap_or(d);
    match name {
        "pansu" => pansu(get("lambda", 1.0), n),
        "heisenberg-sphere" => heisenberg_sphere(get("rho", 1.0), n),
        "shifted-sphere" => shifted_sphere(get("lambda", 0.5), get("rho0", 1.2), n),
        "cylinder" => cylinder(get("c", 1.0), n),
        "hyperplane" => {
            let mut a = vec![0.0; 2 * n];
            a[0] = 1.0;
            for (i, v) in a.iter_mut().enumerate() {
                if let Some(x) = params.get(&format!("a{}", i + 1)) {
                    *v = *x;
                }
            }
            hyperplane(&a, n)
        }
        other => Err(Error::InvalidArgument(format!(
            "unknown surface '{other}' (expected one of {})",
            NAMES.join(", ")
        ))),
    }
}

trait TapName {
    fn tap_name(self, name: &str) -> Self;
}

impl TapName for SurfaceDef {
    fn tap_name(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }
}

impl CatalogEntry {
    pub fn charts(&self) -> &[SurfaceDef] {
        &self.charts
    }

    /// The chart used to evaluate geometry at `p`.
    pub fn surface_for(&self, p: &Point) -> &SurfaceDef {
        match self.kind {
            Kind::Pansu { lambda } => {
                let lz = lambda * p.z_norm();
                if lz * lz > 0.75 {
                    &self.charts[2]
                } else if p.t() >= 0.0 {
                    &self.charts[0]
                } else {
                    &self.charts[1]
                }
            }
            _ => &self.charts[0],
        }
    }

    /// Primary defining function (the upper graph for the Pansu sphere).
    pub fn surface(&self) -> &SurfaceDef {
        &self.charts[0]
    }

    pub fn report(&self, p: &Point) -> Result<SurfaceReport> {
        surface::report(self.surface_for(p), p)
    }

    /// First-order distance `|u|/|∇u|` of `p` from the surface, in the chart
    /// used at `p`.
    pub fn residual(&self, p: &Point) -> f64 {
        let s = self.surface_for(p);
        match s.jet(p.coords()) {
            Ok(j) => {
                let g = j.grad.iter().map(|v| v * v).sum::<f64>().sqrt();
                if g > 0.0 {
                    j.value.abs() / g
                } else {
                    j.value.abs()
                }
            }
            Err(_) => f64::INFINITY,
        }
    }

    /// Radius of the horizontal projection: points have `|z|` in `(0, R]`.
    pub fn radial_extent(&self) -> Option<f64> {
        match self.kind {
            Kind::Pansu { lambda } => Some(1.0 / lambda),
            Kind::HeisenbergSphere { rho } => Some(rho),
            Kind::ShiftedSphere { lambda, rho0 } => Some((rho0 * rho0 - lambda).sqrt()),
            _ => None,
        }
    }

    pub fn expected(&self, p: &Point) -> Expected {
        let z = p.z_norm();
        let t = p.t();
        match &self.kind {
            Kind::Pansu { lambda } => {
                let a = (1.0 - lambda * lambda * z * z).max(0.0).sqrt() / z;
                Expected {
                    alpha: if t >= 0.0 { a } else { -a },
                    k: *lambda,
                    l: 2.0 * lambda,
                }
            }
            Kind::HeisenbergSphere { rho } => {
                let r2 = rho * rho;
                Expected {
                    alpha: 2.0 * t / (r2 * z),
                    k: z / r2,
                    l: 3.0 * z / r2,
                }
            }
            Kind::ShiftedSphere { lambda, rho0 } => {
                let r2 = rho0 * rho0;
                let w = z * z + lambda;
                Expected {
                    alpha: 2.0 * t / (r2 * z),
                    k: w / (r2 * z),
                    l: (2.0 * z * z + w) / (r2 * z),
                }
            }
            Kind::Cylinder { c } => Expected {
                alpha: 0.0,
                k: 1.0 / c,
                l: 1.0 / c,
            },
            Kind::Hyperplane { .. } => Expected {
                alpha: 0.0,
                k: 0.0,
                l: 0.0,
            },
        }
    }

    /// Human-readable expected formulas.
    pub fn formulas(&self) -> BTreeMap<&'static str, &'static str> {
        let f: [(&str, &str); 4] = match self.kind {
            Kind::Pansu { .. } => [
                ("alpha", "sign(t) sqrt(1 - lambda^2 |z|^2) / |z|"),
                ("k", "lambda"),
                ("l", "2 lambda"),
                ("H", "2 n lambda"),
            ],
            Kind::HeisenbergSphere { .. } => [
                ("alpha", "2 t / (rho^2 |z|)"),
                ("k", "|z| / rho^2"),
                ("l", "3 |z| / rho^2"),
                ("H", "(2n + 1) |z| / rho^2"),
            ],
            Kind::ShiftedSphere { .. } => [
                ("alpha", "2 t / (rho0^2 |z|)"),
                ("k", "(|z|^2 + lambda) / (rho0^2 |z|)"),
                ("l", "(3 |z|^2 + lambda) / (rho0^2 |z|)"),
                ("H", "l + (2n - 2) k"),
            ],
            Kind::Cylinder { .. } => [
                ("alpha", "0"),
                ("k", "1 / c"),
                ("l", "1 / c"),
                ("H", "(2n - 1) / c"),
            ],
            Kind::Hyperplane { .. } => [("alpha", "0"), ("k", "0"), ("l", "0"), ("H", "0")],
        };
        f.into_iter().collect()
    }

    /// The profile `t² = F(|z|²)` of a rotationally symmetric entry.
    pub fn profile(&self) -> Option<RadialProfile> {
        match self.kind {
            Kind::Pansu { lambda } => Some(pansu_profile(lambda)),
            Kind::HeisenbergSphere { rho } => {
                let r4 = rho.powi(4);
                Some(RadialProfile::new("heisenberg-sphere", move |r: &Dual2| {
                    (-(r.square()) + r4) / 4.0
                }))
            }
            Kind::ShiftedSphere { lambda, rho0 } => {
                let r4 = rho0.powi(4);
                Some(RadialProfile::new("shifted-sphere", move |r: &Dual2| {
                    (-((r.clone() + lambda).square()) + r4) / 4.0
                }))
            }
            _ => None,
        }
    }

    /// A regular on-surface point with `|z|` log-uniform in
    /// `[lo·R, hi·R]` (see [`CatalogEntry::radial_extent`]).
    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, lo: f64, hi: f64) -> Point {
        let n = self.n;
        let dir = random_direction(rng, 2 * n);
        let log_radius = |rng: &mut R, big: f64| {
            let (a, b) = ((lo * big).ln(), (hi * big).ln());
            (a + (b - a) * rng.random::<f64>()).exp()
        };
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let (w, t): (Vec<f64>, f64) = match &self.kind {
            Kind::Pansu { lambda } => {
                let z = log_radius(rng, 1.0 / lambda);
                (scaled(&dir, z), sign * pansu_height(*lambda, z))
            }
            Kind::HeisenbergSphere { rho } => {
                let z = log_radius(rng, *rho);
                let t2 = (rho.powi(4) - z.powi(4)).max(0.0) / 4.0;
                (scaled(&dir, z), sign * t2.sqrt())
            }
            Kind::ShiftedSphere { lambda, rho0 } => {
                let z = log_radius(rng, (rho0 * rho0 - lambda).sqrt());
                let t2 = (rho0.powi(4) - (z * z + lambda).powi(2)).max(0.0) / 4.0;
                (scaled(&dir, z), sign * t2.sqrt())
            }
            Kind::Cylinder { c } => (scaled(&dir, *c), c * (4.0 * rng.random::<f64>() - 2.0)),
            Kind::Hyperplane { a } => {
                let w: Vec<f64> = (0..2 * n)
                    .map(|_| 2.0 * rng.random::<f64>() - 1.0)
                    .collect();
                let aa: f64 = a.iter().map(|v| v * v).sum();
                let aw: f64 = a.iter().zip(&w).map(|(x, y)| x * y).sum();
                let w = w.iter().zip(a).map(|(wi, ai)| wi - aw / aa * ai).collect();
                (w, 2.0 * rng.random::<f64>() - 1.0)
            }
        };
        let mut c = w;
        c.push(t);
        Point::from_coords(&c).expect("sampled point is finite")
    }

    /// [`CatalogEntry::sample_with`] bounded away from the singular radius and
    /// the rim by `1e-3` of the radial extent.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        self.sample_with(rng, 1e-3, 1.0 - 1e-3)
    }

    pub fn samples<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<Point> {
        (0..count).map(|_| self.sample(rng)).collect()
    }
}

fn scaled(v: &[f64], s: f64) -> Vec<f64> {
    v.iter().map(|x| x * s).collect()
}

pub(crate) fn random_direction<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nv > 1e-6 {
            return scaled(&v, 1.0 / nv);
        }
    }
}

/// `F(r) = P(√r)²` as a radial profile.
pub fn pansu_profile(lambda: f64) -> RadialProfile {
    RadialProfile::new("pansu", move |r: &Dual2| pansu_profile_s(lambda, r))
}

/// Second-order germ of `S_λ` at its north pole after left translation of
/// the pole to the origin, fitted by central differences with step `h`.
pub fn pansu_pole_germ(lambda: f64, n: usize, h: f64) -> Result<GraphGerm> {
    check_dimension(n)?;
    positive("lambda", lambda)?;
    let zeros = vec![0.0; n];
    let pole = Point::new(&zeros, &zeros, pansu_height(lambda, 0.0))?;
    let inv = pole.inverse();
    GraphGerm::fit(
        n,
        |w: &[f64]| {
            let rho = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            let p = Point::new(&w[..n], &w[n..], pansu_height(lambda, rho)).expect("finite");
            let q = inv.left_translate(&p).expect("same dimension");
            q.t()
        },
        h,
    )
}
