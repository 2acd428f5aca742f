use proptest::prelude::*;

use umbilic::dual::{sum_squares, Scalar};
use umbilic::heisenberg::{apply_j, group_mul, levi_metric};
use umbilic::output::{fmt_f64, DEFAULT_DIGITS};
use umbilic::phaseplane::{stationary_points, vector_field, PhaseParams, PhasePoint};
use umbilic::verify::sobolev::pmc_level;
use umbilic::{report, Expr, HorizontalVector, Point, SurfaceDef};

/// Heisenberg sphere of radius 1 moved by the left translation `L_g`.
struct TranslatedSphere {
    g: Vec<f64>,
}

impl Expr for TranslatedSphere {
    fn eval<S: Scalar>(&self, c: &[S]) -> S {
        // `g⁻¹ · c`
        let m = c.len() - 1;
        let n = m / 2;
        let z: Vec<S> = (0..m).map(|a| c[a].clone() - self.g[a]).collect();
        let mut t = c[m].clone() - self.g[m];
        for j in 0..n {
            t = t - c[j].clone() * self.g[n + j] + c[n + j].clone() * self.g[j];
        }
        -(sum_squares(&z).square() + t.square() * 4.0) + 1.0
    }
}

fn coords(n: usize, r: f64) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-r..r, 2 * n + 1)
}

fn point_on_sphere(n: usize) -> impl Strategy<Value = Vec<f64>> {
    let dir = proptest::collection::vec(-1.0f64..1.0, 2 * n).prop_filter("away from zero", |d| {
        d.iter().map(|x| x * x).sum::<f64>() > 1e-2
    });
    (dir, 0.1f64..0.95, any::<bool>()).prop_map(move |(dir, r, upper)| {
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut c: Vec<f64> = dir.iter().map(|x| x * r / norm).collect();
        let t = (1.0 - r.powi(4)).sqrt() / if upper { 2.0 } else { -2.0 };
        c.push(t);
        c
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_law_is_associative(a in coords(2, 2.0), b in coords(2, 2.0), c in coords(2, 2.0)) {
        let (a, b, c) = (
            Point::from_coords(&a).unwrap(),
            Point::from_coords(&b).unwrap(),
            Point::from_coords(&c).unwrap(),
        );
        let l = group_mul(&group_mul(&a, &b).unwrap(), &c).unwrap();
        let r = group_mul(&a, &group_mul(&b, &c).unwrap()).unwrap();
        for (x, y) in l.coords().iter().zip(r.coords()) {
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
        }
        let e = group_mul(&a, &a.inverse()).unwrap();
        prop_assert!(e.coords().iter().all(|x| x.abs() <= 1e-15));
    }

    #[test]
    fn j_is_an_isometry_squaring_to_minus_one(v in proptest::collection::vec(-3.0f64..3.0, 6),
                                               w in proptest::collection::vec(-3.0f64..3.0, 6)) {
        let (v, w) = (HorizontalVector(v), HorizontalVector(w));
        let jj = apply_j(&apply_j(&v));
        for (a, b) in jj.0.iter().zip(&v.0) {
            prop_assert_eq!(*a, -*b);
        }
        prop_assert!((levi_metric(&v, &w) - v.dot(&w)).abs() <= 1e-12);
        prop_assert!((levi_metric(&apply_j(&v), &apply_j(&w)) - v.dot(&w)).abs() <= 1e-12);
    }

    #[test]
    fn curvatures_are_left_invariant(c in point_on_sphere(2), g in coords(2, 1.5)) {
        let base = SurfaceDef::new("sphere", 2, TranslatedSphere { g: vec![0.0; 5] }).unwrap();
        let moved = SurfaceDef::new("moved", 2, TranslatedSphere { g: g.clone() }).unwrap();
        let p = Point::from_coords(&c).unwrap();
        let q = group_mul(&Point::from_coords(&g).unwrap(), &p).unwrap();
        let (a, b) = (report(&base, &p).unwrap(), report(&moved, &q).unwrap());
        let scale = 1.0 + a.h.max_abs();
        prop_assert!((a.k - b.k).abs() <= 1e-9 * scale);
        prop_assert!((a.l - b.l).abs() <= 1e-9 * scale);
        prop_assert!((a.alpha() - b.alpha()).abs() <= 1e-9 * scale);
        prop_assert!((a.mean_curvature - b.mean_curvature).abs() <= 1e-9 * scale);
        prop_assert!(b.umbilic);
    }

    #[test]
    fn phase_field_is_reflection_symmetric(a in -5.0f64..5.0, b in -5.0f64..5.0, n in 2usize..5, c in 0.1f64..3.0) {
        let pp = PhaseParams::new(n, c).unwrap();
        let (da, db) = vector_field(&pp, &PhasePoint::new(a, b));
        let (ma, mb) = vector_field(&pp, &PhasePoint::new(-a, b));
        prop_assert_eq!(ma, da);
        prop_assert_eq!(mb, -db);
    }

    #[test]
    fn field_vanishes_only_at_stationary_points(a in -5.0f64..5.0, b in -5.0f64..5.0, n in 2usize..5, c in 0.1f64..3.0) {
        let pp = PhaseParams::new(n, c).unwrap();
        for s in stationary_points(&pp) {
            prop_assert_eq!(vector_field(&pp, &s), (0.0, 0.0));
        }
        let q = PhasePoint::new(a, b);
        let near = stationary_points(&pp).iter().any(|s| s.dist(&q) < 1e-9);
        if b != 0.0 && !near {
            let (da, db) = vector_field(&pp, &q);
            prop_assert!(da != 0.0 || db != 0.0);
        }
    }

    #[test]
    fn seventeen_digits_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(fmt_f64(x, DEFAULT_DIGITS).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn pmc_level_increases_with_lambda(l in 0.01f64..5.0, d in 0.01f64..1.0, sigma in 0.1f64..10.0, n in 2usize..5) {
        prop_assert!(pmc_level(n, l + d, sigma) > pmc_level(n, l, sigma));
    }
}
