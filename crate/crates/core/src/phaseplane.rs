//! The planar system for `(α, β)`, `β = l − 2k`, along characteristic curves
//! of a hypersurface with constant p-mean curvature `c`:
//!
//! ```text
//! α′ = −α² + (β − c)((2n−1)β + c) / (4n²)
//! β′ = −2nβα
//! ```

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_dimension, Error, Result};
use crate::ode::{self, Control, Step};

/// Below this `|β|` an `α` sign change is attributed to the `α`-axis and
/// not counted as a crossing of the `β`-axis.
pub const AXIS_EPS: f64 = 1e-12;
/// Crossings are refined until `|α| ≤ EVENT_TOL`.
pub const EVENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseParams {
    pub n: usize,
    pub c: f64,
}

impl PhaseParams {
    pub fn new(n: usize, c: f64) -> Result<Self> {
        check_dimension(n)?;
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "c must be positive, got {c}"
            )));
        }
        Ok(Self { n, c })
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhasePoint {
    pub alpha: f64,
    pub beta: f64,
}

impl PhasePoint {
    pub fn new(alpha: f64, beta: f64) -> Self {
        Self { alpha, beta }
    }

    pub fn mirrored(&self) -> Self {
        Self::new(-self.alpha, self.beta)
    }

    pub fn dist(&self, o: &Self) -> f64 {
        (self.alpha - o.alpha).hypot(self.beta - o.beta)
    }

    pub fn norm(&self) -> f64 {
        self.alpha.hypot(self.beta)
    }

    /// `(k, l)` recovered from `H = (2n−2)k + l = c` and `β = l − 2k`.
    pub fn curvatures(&self, pp: &PhaseParams) -> (f64, f64) {
        let k = (pp.c - self.beta) / (2.0 * pp.nf());
        (k, self.beta + 2.0 * k)
    }
}

/// `(α′, β′)`.
pub fn vector_field(pp: &PhaseParams, q: &PhasePoint) -> (f64, f64) {
    (
        -q.alpha * q.alpha + radicand(pp, q.beta),
        -2.0 * pp.nf() * q.beta * q.alpha,
    )
}

/// `(β − c)((2n−1)β + c)/(4n²)`, factored so that it vanishes exactly at
/// both stationary values of `β`.
fn radicand(pp: &PhaseParams, beta: f64) -> f64 {
    let n = pp.nf();
    let m = 2.0 * n - 1.0;
    (beta - pp.c) * (beta + pp.c / m) * m / (4.0 * n * n)
}

fn rhs(pp: PhaseParams) -> impl Fn(f64, &[f64]) -> Vec<f64> {
    move |_s, y| {
        let (a, b) = vector_field(&pp, &PhasePoint::new(y[0], y[1]));
        vec![a, b]
    }
}

/// The `α` values on the curve `Υ = {α′ = 0}` at height `β`, ascending.
pub fn upsilon_beta(pp: &PhaseParams, beta: f64) -> Vec<f64> {
    let r = radicand(pp, beta);
    if r > 0.0 {
        let a = r.sqrt();
        vec![-a, a]
    } else if r == 0.0 {
        vec![0.0]
    } else {
        Vec::new()
    }
}

/// `(0, c)` and `(0, −c/(2n−1))`.
pub fn stationary_points(pp: &PhaseParams) -> [PhasePoint; 2] {
    [
        PhasePoint::new(0.0, pp.c),
        PhasePoint::new(0.0, -pp.c / (2.0 * pp.nf() - 1.0)),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    pub s: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitTrace {
    pub params: PhaseParams,
    pub samples: Vec<(f64, PhasePoint)>,
    pub events: Vec<Crossing>,
    pub period: Option<f64>,
    pub closure_error: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseOptions {
    pub ode: ode::Options,
    /// Stop a direction after this many `β`-axis crossings.
    pub max_crossings: usize,
    /// Parameter range searched for a crossing by [`periodic_orbit`].
    pub search_limit: f64,
    /// Tightened re-runs allowed before [`Error::NotPeriodic`].
    pub refinements: usize,
}

impl Default for PhaseOptions {
    fn default() -> Self {
        Self {
            ode: ode::Options::default(),
            max_crossings: 2,
            search_limit: 1e4,
            refinements: 2,
        }
    }
}

impl PhaseOptions {
    pub fn tightened(&self) -> Self {
        let mut o = *self;
        o.ode.rtol = (o.ode.rtol * 1e-2).max(1e-14);
        o.ode.atol = (o.ode.atol * 1e-2).max(1e-14);
        o.ode.max_step *= 0.5;
        if let Some(h) = o.ode.fixed_step.as_mut() {
            *h *= 0.5;
        }
        o
    }
}

fn crossed(step: &Step) -> bool {
    let (a0, a1) = (step.y0[0], step.y1[0]);
    step.y1[1].abs() > AXIS_EPS && (a0 * a1 < 0.0 || (a1 == 0.0 && a0 != 0.0))
}

/// Locates `α = 0` inside an accepted step: Hermite bisection for a bracket
/// estimate, then Newton on true single steps from the step start.
fn locate(pp: &PhaseParams, step: &Step) -> Crossing {
    let f = rhs(*pp);
    let (mut lo, mut hi) = (step.s0, step.s1);
    let a_lo = step.y0[0];
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if step.interp(mid)[0] * a_lo > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (lo_b, hi_b) = if step.s1 > step.s0 {
        (step.s0, step.s1)
    } else {
        (step.s1, step.s0)
    };
    let eval = |s: f64| ode::dopri_step(&f, step.s0, &step.y0, &step.f0, s - step.s0).0;
    let mut s = 0.5 * (lo + hi);
    let mut y = eval(s);
    let mut best = (s, y.clone());
    for _ in 0..30 {
        if y[0].abs() <= EVENT_TOL {
            best = (s, y.clone());
            break;
        }
        if y[0].abs() < best.1[0].abs() {
            best = (s, y.clone());
        }
        let da = vector_field(pp, &PhasePoint::new(y[0], y[1])).0;
        let next = s - y[0] / da;
        s = if next.is_finite() && next >= lo_b && next <= hi_b {
            next
        } else {
            0.5 * (s + if next > s { hi_b } else { lo_b })
        };
        y = eval(s);
    }
    if y[0].abs() < best.1[0].abs() {
        best = (s, y);
    }
    Crossing {
        s: best.0,
        beta: best.1[1],
    }
}

struct DirectionRun {
    samples: Vec<(f64, PhasePoint)>,
    events: Vec<Crossing>,
}

fn run_direction(
    pp: &PhaseParams,
    q0: &PhasePoint,
    s_end: f64,
    opts: &PhaseOptions,
    max_events: usize,
) -> Result<DirectionRun> {
    let f = rhs(*pp);
    let mut run = DirectionRun {
        samples: Vec::new(),
        events: Vec::new(),
    };
    ode::integrate(&f, 0.0, &[q0.alpha, q0.beta], s_end, &opts.ode, |st| {
        run.samples
            .push((st.s1, PhasePoint::new(st.y1[0], st.y1[1])));
        if crossed(st) {
            run.events.push(locate(pp, st));
            if run.events.len() >= max_events {
                return Control::Stop;
            }
        }
        Control::Continue
    })?;
    Ok(run)
}

/// Trajectory through `q0` in both directions up to `|s| = s_max`, each
/// direction stopping after `opts.max_crossings` crossings of the `β`-axis.
pub fn integrate(
    pp: &PhaseParams,
    q0: &PhasePoint,
    s_max: f64,
    opts: &PhaseOptions,
) -> Result<OrbitTrace> {
    if !(s_max > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "s_max must be positive, got {s_max}"
        )));
    }
    if !(q0.alpha.is_finite() && q0.beta.is_finite()) {
        return Err(Error::NonFinite);
    }
    let fwd = run_direction(pp, q0, s_max, opts, opts.max_crossings)?;
    let bwd = run_direction(pp, q0, -s_max, opts, opts.max_crossings)?;
    let mut samples: Vec<(f64, PhasePoint)> = bwd.samples.into_iter().rev().collect();
    samples.push((0.0, *q0));
    samples.extend(fwd.samples);
    let mut events: Vec<Crossing> = bwd.events.into_iter().rev().collect();
    events.extend(fwd.events);
    Ok(OrbitTrace {
        params: *pp,
        samples,
        events,
        period: None,
        closure_error: None,
    })
}

fn check_seed(pp: &PhaseParams, q0: &PhasePoint) -> Result<PhasePoint> {
    if !(q0.alpha.is_finite() && q0.beta.is_finite()) {
        return Err(Error::NonFinite);
    }
    if q0.beta == 0.0 || stationary_points(pp).contains(q0) {
        return Err(Error::OnSeparatrix);
    }
    let mut q = *q0;
    if q.alpha.abs() <= EVENT_TOL {
        q.alpha = 0.0;
    }
    Ok(q)
}

/// Half-period crossings `(s⁻, s⁺)` around `q0`.
fn half_orbit(
    pp: &PhaseParams,
    q: &PhasePoint,
    opts: &PhaseOptions,
) -> Result<(Crossing, Crossing)> {
    let fwd = run_direction(pp, q, opts.search_limit, opts, 1)?;
    let plus = *fwd
        .events
        .first()
        .ok_or(Error::NoCrossing(opts.search_limit))?;
    let minus = if q.alpha == 0.0 {
        Crossing {
            s: 0.0,
            beta: q.beta,
        }
    } else {
        let bwd = run_direction(pp, q, -opts.search_limit, opts, 1)?;
        *bwd.events
            .first()
            .ok_or(Error::NoCrossing(opts.search_limit))?
    };
    Ok((minus, plus))
}

/// The closed orbit through `q0`, with period `2(s⁺ − s⁻)` from the two
/// `β`-axis crossings and closure certified by a full-period re-integration.
pub fn periodic_orbit(pp: &PhaseParams, q0: &PhasePoint) -> Result<OrbitTrace> {
    periodic_orbit_with(pp, q0, &PhaseOptions::default())
}

pub fn periodic_orbit_with(
    pp: &PhaseParams,
    q0: &PhasePoint,
    opts: &PhaseOptions,
) -> Result<OrbitTrace> {
    let q = check_seed(pp, q0)?;
    let tol = orbit_tol(&q);
    let mut o = *opts;
    let mut best: Option<OrbitTrace> = None;
    for attempt in 0..=opts.refinements {
        if attempt > 0 {
            o = o.tightened();
        }
        let trace = closed_trace(pp, &q, &o)?;
        let err = trace.closure_error.unwrap_or(f64::INFINITY);
        let better = best
            .as_ref()
            .is_none_or(|b| err < b.closure_error.unwrap_or(f64::INFINITY));
        if better {
            best = Some(trace);
        }
        // Refine towards the unscaled target even when the scaled one is met.
        if err <= REFINE_TARGET {
            break;
        }
    }
    let best = best.expect("at least one attempt");
    let err = best.closure_error.unwrap_or(f64::INFINITY);
    if err <= tol {
        Ok(best)
    } else {
        Err(Error::NotPeriodic { closure: err, tol })
    }
}

const REFINE_TARGET: f64 = 1e-8;

/// `1e-8 (1 + |q0|)`.
pub fn orbit_tol(q0: &PhasePoint) -> f64 {
    1e-8 * (1.0 + q0.norm())
}

/// One attempt at the closed orbit without the refinement loop; exposed for
/// convergence studies in fixed-step mode.
pub fn closed_trace(pp: &PhaseParams, q0: &PhasePoint, opts: &PhaseOptions) -> Result<OrbitTrace> {
    let q = check_seed(pp, q0)?;
    let (minus, plus) = half_orbit(pp, &q, opts)?;
    let period = 2.0 * (plus.s - minus.s);
    let run = run_direction(pp, &q, period, opts, usize::MAX)?;
    let end = run.samples.last().map(|s| s.1).unwrap_or(q);
    let mut samples = vec![(0.0, q)];
    samples.extend(run.samples);
    Ok(OrbitTrace {
        params: *pp,
        samples,
        events: run.events,
        period: Some(period),
        closure_error: Some(end.dist(&q)),
    })
}

/// Grid, curve and seed description of a phase portrait.
#[derive(Debug, Clone, PartialEq)]
pub struct PortraitSpec {
    pub alpha_range: (f64, f64),
    pub beta_range: (f64, f64),
    pub grid: (usize, usize),
    /// Polyline vertices per branch of `Υ`.
    pub upsilon_points: usize,
    pub seeds: Vec<PhasePoint>,
}

impl PortraitSpec {
    /// A window around both stationary points with five nested orbits in
    /// each half-plane, seeded on the `β`-axis.
    pub fn standard(pp: &PhaseParams) -> Self {
        let c = pp.c;
        let low = c / (2.0 * pp.nf() - 1.0);
        let mut seeds: Vec<PhasePoint> = [1.2, 1.5, 2.0, 2.5, 3.0]
            .iter()
            .map(|f| PhasePoint::new(0.0, f * c))
            .collect();
        seeds.extend(
            [1.5, 2.0, 3.0, 4.0, 5.0]
                .iter()
                .map(|f| PhasePoint::new(0.0, -f * low)),
        );
        Self {
            alpha_range: (-2.0 * c, 2.0 * c),
            beta_range: (-2.0 * c, 3.5 * c),
            grid: (21, 21),
            upsilon_points: 200,
            seeds,
        }
    }
}

/// One CSV row `kind,s,alpha,beta`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PortraitRow {
    pub kind: String,
    pub s: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl PortraitRow {
    fn new(kind: impl Into<String>, s: f64, alpha: f64, beta: f64) -> Self {
        Self {
            kind: kind.into(),
            s,
            alpha,
            beta,
        }
    }
}

/// Portrait data: `field` rows come in pairs, the grid point at `s = 0` and
/// the point displaced by the raw field vector at `s = 1`; each `upsilon`
/// component is a polyline with `s` its running arclength (restarting at 0);
/// `orbit:<id>` rows sample one period; `stationary` rows have `s = 0`.
pub fn portrait(pp: &PhaseParams, layout: &PortraitSpec) -> Result<Vec<PortraitRow>> {
    let mut rows = Vec::new();
    let (na, nb) = layout.grid;
    let lerp = |(a, b): (f64, f64), i: usize, m: usize| {
        if m <= 1 {
            a
        } else {
            a + (b - a) * i as f64 / (m - 1) as f64
        }
    };
    for j in 0..nb {
        for i in 0..na {
            let q = PhasePoint::new(
                lerp(layout.alpha_range, i, na),
                lerp(layout.beta_range, j, nb),
            );
            let (da, db) = vector_field(pp, &q);
            rows.push(PortraitRow::new("field", 0.0, q.alpha, q.beta));
            rows.push(PortraitRow::new("field", 1.0, q.alpha + da, q.beta + db));
        }
    }
    for poly in upsilon_polylines(pp, layout) {
        let mut s = 0.0;
        let mut prev: Option<PhasePoint> = None;
        for q in poly {
            if let Some(p) = prev {
                s += p.dist(&q);
            }
            rows.push(PortraitRow::new("upsilon", s, q.alpha, q.beta));
            prev = Some(q);
        }
    }
    let orbits: Vec<Result<OrbitTrace>> = layout
        .seeds
        .par_iter()
        .map(|q| periodic_orbit(pp, q))
        .collect();
    for (id, o) in orbits.into_iter().enumerate() {
        let o = o?;
        for (s, q) in &o.samples {
            rows.push(PortraitRow::new(format!("orbit:{id}"), *s, q.alpha, q.beta));
        }
    }
    for q in stationary_points(pp) {
        rows.push(PortraitRow::new("stationary", 0.0, q.alpha, q.beta));
    }
    Ok(rows)
}

/// Each component of `Υ` inside the window, traversed from its lower-`α`
/// branch through the vertex on the `β`-axis to the upper branch.
fn upsilon_polylines(pp: &PhaseParams, layout: &PortraitSpec) -> Vec<Vec<PhasePoint>> {
    let (s0, s1) = stationary_points(pp).map(|q| q.beta).into();
    let (blo, bhi) = layout.beta_range;
    let m = layout.upsilon_points.max(2);
    let mut out = Vec::new();
    for (vertex, far) in [(s0, bhi), (s1, blo)] {
        if (far - vertex) * (if vertex > 0.0 { 1.0 } else { -1.0 }) <= 0.0 {
            continue;
        }
        let betas: Vec<f64> = (0..m)
            .map(|i| far + (vertex - far) * i as f64 / (m - 1) as f64)
            .collect();
        let mut poly: Vec<PhasePoint> = betas
            .iter()
            .map(|&b| PhasePoint::new(-radicand(pp, b).max(0.0).sqrt(), b))
            .collect();
        poly.extend(
            betas
                .iter()
                .rev()
                .skip(1)
                .map(|&b| PhasePoint::new(radicand(pp, b).max(0.0).sqrt(), b)),
        );
        out.push(poly);
    }
    out
}
