use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use umbilic::catalog;
use umbilic::flows::{self, CurveState};
use umbilic::ode;
use umbilic::phaseplane::{self, PhaseOptions, PhaseParams, PhasePoint};
use umbilic::verify;
use umbilic::{HorizontalVector, Point};

fn fixed(h: f64) -> PhaseOptions {
    PhaseOptions {
        ode: ode::Options {
            fixed_step: Some(h),
            ..ode::Options::default()
        },
        ..PhaseOptions::default()
    }
}

#[test]
fn phase_closure_converges_at_fourth_order_or_better() {
    let pp = PhaseParams::new(2, 1.0).unwrap();
    let q = PhasePoint::new(0.0, 2.0);
    let coarse = phaseplane::closed_trace(&pp, &q, &fixed(0.1)).unwrap();
    let fine = phaseplane::closed_trace(&pp, &q, &fixed(0.05)).unwrap();
    let (a, b) = (coarse.closure_error.unwrap(), fine.closure_error.unwrap());
    assert!(a / b >= 16.0, "closure {a:e} -> {b:e}, ratio {}", a / b);
}

#[test]
fn golden_period_is_reproduced() {
    let g = verify::golden();
    let gp = g.periods[0];
    let pp = PhaseParams::new(gp.n, gp.c).unwrap();
    let o = phaseplane::periodic_orbit(&pp, &PhasePoint::new(gp.alpha, gp.beta)).unwrap();
    assert!((o.period.unwrap() - gp.period).abs() <= g.orbit_tol * gp.period);
}

#[test]
fn orbits_stay_in_their_half_plane() {
    let pp = PhaseParams::new(3, 2.0).unwrap();
    for q in [PhasePoint::new(0.7, 3.0), PhasePoint::new(-0.4, -0.3)] {
        let o = phaseplane::periodic_orbit(&pp, &q).unwrap();
        assert!(o.samples.iter().all(|(_, p)| p.beta * q.beta > 0.0));
    }
}

#[test]
fn beta_derivative_matches_the_field() {
    let pp = PhaseParams::new(2, 1.0).unwrap();
    let t = phaseplane::integrate(&pp, &PhasePoint::new(0.5, 2.0), 2.0, &fixed(2.5e-4)).unwrap();
    let fwd: Vec<_> = t.samples.iter().filter(|(s, _)| *s >= 0.0).collect();
    assert!(fwd.len() > 1000);
    for w in fwd.windows(3) {
        let (s0, q0) = w[0];
        let (s2, q2) = w[2];
        let q1 = w[1].1;
        let fd = (q2.beta - q0.beta) / (s2 - s0);
        let exact = -2.0 * 2.0 * q1.beta * q1.alpha;
        assert!((fd - exact).abs() <= 1e-6, "{fd} {exact}");
    }
}

#[test]
fn straight_line_at_zero_curvature() {
    let p = Point::from_coords(&[0.1, 0.2, -0.3, 0.4, 0.5]).unwrap();
    let v = HorizontalVector(vec![0.6, 0.0, 0.0, 0.8]);
    let c = flows::geodesic_flow(
        &CurveState {
            p: p.clone(),
            v: v.clone(),
        },
        0.0,
        2.0,
    )
    .unwrap();
    let last = c.last().unwrap();
    for a in 0..4 {
        assert!((last.p.coords()[a] - p.coords()[a] - last.s * v.0[a]).abs() < 1e-12);
    }
}

#[test]
fn geodesic_projection_is_a_circle() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for lambda in [0.5, 1.0, 3.0] {
        let e = catalog::pansu(lambda, 3).unwrap();
        let (curve, _) = verify::equatorial_geodesic(&e, &mut rng, 5.0).unwrap();
        let centre = flows::circle_center(
            &CurveState {
                p: curve[0].p.clone(),
                v: curve[0].v.clone(),
            },
            lambda,
        )
        .unwrap();
        let r = 1.0 / (2.0 * lambda);
        for c in &curve {
            let d: f64 = (0..6)
                .map(|a| (c.p.coords()[a] - centre[a]).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!((d - r).abs() <= 1e-7);
        }
    }
}

#[test]
fn equatorial_geodesic_reaches_the_pole_at_a_quarter_turn() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for lambda in [0.5, 1.0, 2.0] {
        let e = catalog::pansu(lambda, 2).unwrap();
        let (_, pole) = verify::equatorial_geodesic(&e, &mut rng, 4.0 / lambda).unwrap();
        assert!((pole.unwrap() - PI / (2.0 * lambda)).abs() < 1e-6);
    }
}

/// The stated confinement over `s ∈ [0, 3]` at `λ = 1`: the curve passes the
/// pole at `s = π/2` and continues off the sphere.
#[test]
#[ignore = "unattainable as stated: the λ = 1 geodesic leaves S_1 after the pole at s = π/2 < 3"]
fn geodesic_stays_on_unit_pansu_sphere_over_length_three() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let e = catalog::pansu(1.0, 2).unwrap();
    for _ in 0..20 {
        let (curve, _) = verify::equatorial_geodesic(&e, &mut rng, 3.0).unwrap();
        for c in &curve {
            assert!(
                e.residual(&c.p) <= 1e-7,
                "s = {}: {:e}",
                c.s,
                e.residual(&c.p)
            );
        }
    }
}
