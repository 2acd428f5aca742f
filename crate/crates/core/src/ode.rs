//! Dormand–Prince 5(4) with step-size control and cubic Hermite dense output.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    /// Take steps of exactly this size without error control.
    pub fixed_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-10,
            max_step: 0.05,
            fixed_step: None,
            max_steps: 10_000_000,
        }
    }
}

/// One accepted step, with enough data for Hermite interpolation.
#[derive(Debug, Clone)]
pub struct Step {
    pub s0: f64,
    pub y0: Vec<f64>,
    pub f0: Vec<f64>,
    pub s1: f64,
    pub y1: Vec<f64>,
    pub f1: Vec<f64>,
}

impl Step {
    pub fn h(&self) -> f64 {
        self.s1 - self.s0
    }

    /// Cubic Hermite interpolant at `s` in `[s0, s1]`.
    pub fn interp(&self, s: f64) -> Vec<f64> {
        let h = self.h();
        let th = (s - self.s0) / h;
        let h00 = (1.0 + 2.0 * th) * (1.0 - th) * (1.0 - th);
        let h10 = th * (1.0 - th) * (1.0 - th);
        let h01 = th * th * (3.0 - 2.0 * th);
        let h11 = th * th * (th - 1.0);
        (0..self.y0.len())
            .map(|i| {
                h00 * self.y0[i] + h10 * h * self.f0[i] + h01 * self.y1[i] + h11 * h * self.f1[i]
            })
            .collect()
    }
}

pub enum Control {
    Continue,
    Stop,
}

/// A single Dormand–Prince step of size `h`: the fifth-order solution, the
/// embedded error estimate and the derivative at the new point.
pub fn dopri_step<F>(f: &F, s: f64, y: &[f64], f0: &[f64], h: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>)
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    let m = y.len();
    let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
    k.push(f0.to_vec());
    for (st, row) in A.iter().enumerate().skip(1) {
        let yi: Vec<f64> = (0..m)
            .map(|i| y[i] + h * (0..st).map(|j| row[j] * k[j][i]).sum::<f64>())
            .collect();
        k.push(f(s + C[st] * h, &yi));
    }
    // The last stage is evaluated at the fifth-order solution (FSAL).
    let y5: Vec<f64> = (0..m)
        .map(|i| y[i] + h * (0..6).map(|j| A[6][j] * k[j][i]).sum::<f64>())
        .collect();
    let err: Vec<f64> = (0..m)
        .map(|i| {
            h * (0..7)
                .map(|j| {
                    let b5 = if j < 6 { A[6][j] } else { 0.0 };
                    (b5 - B4[j]) * k[j][i]
                })
                .sum::<f64>()
        })
        .collect();
    (y5, err, k.pop().expect("seven stages"))
}

/// Integrates `y′ = f(s, y)` from `s0` towards `s_end` (either direction),
/// calling `on_step` after every accepted step. Returns the final `(s, y)`.
pub fn integrate<F, G>(
    f: &F,
    s0: f64,
    y0: &[f64],
    s_end: f64,
    opts: &Options,
    mut on_step: G,
) -> Result<(f64, Vec<f64>)>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
    G: FnMut(&Step) -> Control,
{
    let dir = if s_end >= s0 { 1.0 } else { -1.0 };
    let mut s = s0;
    let mut y = y0.to_vec();
    let mut fy = f(s, &y);
    if y.iter().chain(&fy).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut h = match opts.fixed_step {
        Some(hf) => hf.abs(),
        None => initial_step(&y, &fy, opts),
    };
    for _ in 0..opts.max_steps {
        let remaining = (s_end - s) * dir;
        if remaining <= 0.0 {
            break;
        }
        let last = h >= remaining;
        let hs = if last { remaining } else { h };
        let (y1, err, f1) = dopri_step(f, s, &y, &fy, dir * hs);
        let finite = y1.iter().chain(&f1).all(|v| v.is_finite());
        let e = if !finite {
            f64::INFINITY
        } else if opts.fixed_step.is_some() {
            0.0
        } else {
            error_norm(&y, &y1, &err, opts)
        };
        if e <= 1.0 {
            let s1 = if last { s_end } else { s + dir * hs };
            let step = Step {
                s0: s,
                y0: std::mem::take(&mut y),
                f0: std::mem::take(&mut fy),
                s1,
                y1,
                f1,
            };
            let ctl = on_step(&step);
            s = step.s1;
            y = step.y1;
            fy = step.f1;
            if matches!(ctl, Control::Stop) {
                return Ok((s, y));
            }
            if opts.fixed_step.is_none() {
                h = grow(hs, e).min(opts.max_step);
            }
        } else {
            if opts.fixed_step.is_some() {
                return Err(Error::NonFinite);
            }
            h = hs * (0.9 * e.powf(-0.2)).clamp(0.1, 1.0);
            if !h.is_finite() || h < 1e-14 * s.abs().max(1.0) {
                return Err(Error::StepUnderflow { s, h });
            }
        }
    }
    if (s_end - s) * dir > 0.0 {
        return Err(Error::StepUnderflow { s, h });
    }
    Ok((s, y))
}

fn grow(h: f64, e: f64) -> f64 {
    let fac = if e == 0.0 {
        5.0
    } else {
        (0.9 * e.powf(-0.2)).clamp(0.2, 5.0)
    };
    h * fac
}

fn error_norm(y0: &[f64], y1: &[f64], err: &[f64], o: &Options) -> f64 {
    let m = y0.len() as f64;
    let s: f64 = (0..y0.len())
        .map(|i| {
            let sc = o.atol + o.rtol * y0[i].abs().max(y1[i].abs());
            (err[i] / sc).powi(2)
        })
        .sum();
    (s / m).sqrt()
}

fn initial_step(y: &[f64], fy: &[f64], o: &Options) -> f64 {
    let d0 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let d1 = fy.iter().map(|v| v * v).sum::<f64>().sqrt();
    let h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-4
    } else {
        0.01 * d0 / d1
    };
    h.min(o.max_step).max(1e-8)
}

/// Integrates and returns every accepted `(s, y)` including the start.
pub fn trajectory<F>(
    f: &F,
    s0: f64,
    y0: &[f64],
    s_end: f64,
    opts: &Options,
) -> Result<Vec<(f64, Vec<f64>)>>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    let mut out = vec![(s0, y0.to_vec())];
    integrate(f, s0, y0, s_end, opts, |st| {
        out.push((st.s1, st.y1.clone()));
        Control::Continue
    })?;
    Ok(out)
}
