//! Sobolev-extremal level sets: the CR Yamabe family and the p-mean curvature
//! equation on Pansu spheres.

use rand::Rng;
use serde::Serialize;

use crate::catalog;
use crate::dual::{sum_squares, Scalar};
use crate::error::{Error, Result};
use crate::field::{Expr, SurfaceDef};
use crate::heisenberg::{frame_t_coeff, group_mul, Point};

/// `u = (4t² + (|z|² + λ)²)^(−n/2)`.
#[derive(Debug, Clone, Copy)]
pub struct YamabeSolution {
    pub lambda: f64,
    pub n: usize,
}

impl Expr for YamabeSolution {
    fn eval<S: Scalar>(&self, c: &[S]) -> S {
        let m = c.len() - 1;
        let w = sum_squares(&c[..m]) + self.lambda;
        (c[m].square() * 4.0 + w.square()).powf(-(self.n as f64) / 2.0)
    }
}

impl YamabeSolution {
    pub fn surface(&self) -> Result<SurfaceDef> {
        Ok(SurfaceDef::new("yamabe", self.n, *self)?.with_param("lambda", self.lambda))
    }
}

/// `Δ_b u = Σ_a ė_a ė_a u` from exact second derivatives:
/// `Σ_a (u_aa + 2 c_a u_at + c_a² u_tt)`, `ė_a = ∂_a + c_a ∂_t`.
pub fn sub_laplacian(s: &SurfaceDef, p: &Point) -> Result<f64> {
    let n = s.n();
    let jet = s.jet(p.coords())?;
    let t = 2 * n;
    Ok((0..2 * n)
        .map(|a| {
            let c = frame_t_coeff(p.coords(), n, a);
            jet.hess_at(a, a) + 2.0 * c * jet.hess_at(a, t) + c * c * jet.hess_at(t, t)
        })
        .sum())
}

/// `Δ_b u` by second differences along the integral curves `h ↦ p·exp(h ė_a)`
/// of the frame fields.
pub fn sub_laplacian_fd(s: &SurfaceDef, p: &Point, h: f64) -> Result<f64> {
    let n = s.n();
    let u0 = s.value(p.coords());
    let mut acc = 0.0;
    for a in 0..2 * n {
        let shifted = |sign: f64| -> Result<f64> {
            let mut c = vec![0.0; 2 * n + 1];
            c[a] = sign * h;
            Ok(s.value(group_mul(p, &Point::from_coords(&c)?)?.coords()))
        };
        acc += (shifted(1.0)? - 2.0 * u0 + shifted(-1.0)?) / (h * h);
    }
    Ok(acc)
}

/// Constancy of `σ = Δ_b u / u^(1+2/n)` over sample points.
#[derive(Debug, Clone, Serialize)]
pub struct YamabeEstimate {
    pub n: usize,
    pub lambda: f64,
    /// Mean of `σ` over the samples.
    pub sigma: f64,
    /// Standard deviation of `σ` relative to `|σ̂|`.
    pub relative_std: f64,
    pub samples: usize,
}

pub fn sigma_at(y: &YamabeSolution, s: &SurfaceDef, p: &Point) -> Result<f64> {
    let u = s.value(p.coords());
    Ok(sub_laplacian(s, p)? / u.powf(1.0 + 2.0 / y.n as f64))
}

pub fn yamabe_check(lambda: f64, n: usize, points: &[Point]) -> Result<YamabeEstimate> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    if points.is_empty() {
        return Err(Error::InvalidArgument("no sample points".into()));
    }
    let y = YamabeSolution { lambda, n };
    let s = y.surface()?;
    let sig: Vec<f64> = points
        .iter()
        .map(|p| sigma_at(&y, &s, p))
        .collect::<Result<_>>()?;
    let m = sig.len() as f64;
    let mean = sig.iter().sum::<f64>() / m;
    let var = sig.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m;
    Ok(YamabeEstimate {
        n,
        lambda,
        sigma: mean,
        relative_std: var.sqrt() / mean.abs(),
        samples: sig.len(),
    })
}

/// Points with coordinates uniform in `[−r, r]`, including the centre axis.
pub fn yamabe_points<R: Rng + ?Sized>(rng: &mut R, n: usize, r: f64, count: usize) -> Vec<Point> {
    (0..count)
        .map(|i| {
            let mut c: Vec<f64> = (0..=2 * n)
                .map(|_| r * (2.0 * rng.random::<f64>() - 1.0))
                .collect();
            if i % 10 == 0 {
                c[..2 * n].iter_mut().for_each(|x| *x = 0.0);
            }
            Point::from_coords(&c).expect("finite sample")
        })
        .collect()
}

/// `H = σ u^(1/(2n+1))` on `S_λ` with `u = (2nλ/σ)^(2n+1)`.
#[derive(Debug, Clone, Serialize)]
pub struct PmcCheck {
    pub n: usize,
    pub sigma: f64,
    /// Largest `|H − σ u^(1/(2n+1))| / (2nλ)`.
    pub max_relative_error: f64,
    pub samples: usize,
}

/// Level value of the p-mean curvature extremal on `S_λ`.
pub fn pmc_level(n: usize, lambda: f64, sigma: f64) -> f64 {
    (2.0 * n as f64 * lambda / sigma).powi(2 * n as i32 + 1)
}

pub fn pmc_level_set_check<R: Rng + ?Sized>(
    lambdas: &[f64],
    sigma: f64,
    n: usize,
    points_per_level: usize,
    rng: &mut R,
) -> Result<PmcCheck> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    let mut worst: f64 = 0.0;
    let mut samples = 0;
    for &lambda in lambdas {
        let e = catalog::pansu(lambda, n)?;
        let u = pmc_level(n, lambda, sigma);
        let target = sigma * u.powf(1.0 / (2 * n + 1) as f64);
        for p in e.samples(rng, points_per_level) {
            let h = e.report(&p)?.mean_curvature;
            worst = worst.max((h - target).abs() / (2.0 * n as f64 * lambda));
            samples += 1;
        }
    }
    Ok(PmcCheck {
        n,
        sigma,
        max_relative_error: worst,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sigma_is_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts = yamabe_points(&mut rng, 2, 1.5, 50);
        let est = yamabe_check(1.0, 2, &pts).unwrap();
        assert!(est.relative_std < 1e-10, "{est:?}");
        assert!((est.sigma + 16.0).abs() < 1e-9);
    }

    #[test]
    fn difference_oracle_agrees() {
        let y = YamabeSolution { lambda: 0.5, n: 3 };
        let s = y.surface().unwrap();
        let p = Point::new(&[0.2, -0.3, 0.1], &[0.4, 0.0, -0.2], 0.3).unwrap();
        let a = sub_laplacian(&s, &p).unwrap();
        let b = sub_laplacian_fd(&s, &p, 1e-3).unwrap();
        assert!((a - b).abs() < 1e-5 * a.abs(), "{a} {b}");
    }

    #[test]
    fn pmc_holds_on_pansu() {
        assert_eq!(pmc_level(2, 1.0, 1.0), 1024.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = pmc_level_set_check(&[0.5, 1.0], 1.0, 2, 10, &mut rng).unwrap();
        assert!(c.max_relative_error < 1e-9);
    }
}
