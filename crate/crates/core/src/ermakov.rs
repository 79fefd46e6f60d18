//! Scale factors `b(t)` solving `b'' + lambda(t) b = lambda(0) / b^3` with
//! `b(0) = 1`, `b'(0) = 0`.
//!
//! Sudden quenches have closed forms. General protocols are integrated with a
//! classical RK4 stepper whose resolution is doubled until the Ermakov-Lewis
//! invariant balance and a refinement comparison both meet the tolerance.

use crate::error::{Error, Result};
use crate::grid::TimeGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolation {
    /// `lambda` holds `values[k]` on `[times[k], times[k+1])`.
    PiecewiseConstant,
    /// `lambda` is linear between samples and constant after the last one.
    Linear,
}

/// Sampled post-quench frequency-squared `lambda(t)` for `t >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    times: Vec<f64>,
    values: Vec<f64>,
    interpolation: Interpolation,
}

impl Schedule {
    pub fn new(times: Vec<f64>, values: Vec<f64>, interpolation: Interpolation) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::InvalidProtocol(
                "schedule needs matching, non-empty time and value tables".into(),
            ));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidProtocol(
                "schedule must start at t = 0".into(),
            ));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidProtocol(
                "schedule times must be strictly increasing".into(),
            ));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidProtocol(format!(
                "frequency-squared must be finite and non-negative, got {v}"
            )));
        }
        Ok(Self {
            times,
            values,
            interpolation,
        })
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::new(vec![0.0], vec![value], Interpolation::PiecewiseConstant)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    /// Index of the segment containing `t` (right-continuous).
    pub fn segment(&self, t: f64) -> usize {
        self.times.partition_point(|&s| s <= t).saturating_sub(1)
    }

    /// `lambda` on segment `seg`, continuous up to the segment's closing
    /// breakpoint.
    pub fn value_in(&self, seg: usize, t: f64) -> f64 {
        match self.interpolation {
            Interpolation::PiecewiseConstant => self.values[seg],
            Interpolation::Linear => match self.times.get(seg + 1) {
                Some(&t1) => {
                    let t0 = self.times[seg];
                    let w = (t - t0) / (t1 - t0);
                    self.values[seg] * (1.0 - w) + self.values[seg + 1] * w
                }
                None => self.values[seg],
            },
        }
    }

    /// Slope of `lambda` on segment `seg`.
    pub fn slope_in(&self, seg: usize) -> f64 {
        match (self.interpolation, self.times.get(seg + 1)) {
            (Interpolation::Linear, Some(&t1)) => {
                (self.values[seg + 1] - self.values[seg]) / (t1 - self.times[seg])
            }
            _ => 0.0,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.value_in(self.segment(t), t)
    }

    fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }
}

/// Time dependence of one normal mode's frequency-squared.
#[derive(Debug, Clone, PartialEq)]
pub enum QuenchProtocol {
    /// `lambda` jumps from `initial` to `final_value` at `t = 0`.
    Sudden { initial: f64, final_value: f64 },
    /// The system starts in the ground state of `initial`, then follows
    /// `schedule` for `t >= 0`.
    General { initial: f64, schedule: Schedule },
}

impl QuenchProtocol {
    pub fn initial(&self) -> f64 {
        match self {
            Self::Sudden { initial, .. } | Self::General { initial, .. } => *initial,
        }
    }

    /// The protocol as a post-quench schedule.
    pub fn schedule(&self) -> Result<Schedule> {
        match self {
            Self::Sudden { final_value, .. } => Schedule::constant(*final_value),
            Self::General { schedule, .. } => Ok(schedule.clone()),
        }
    }

    fn validate(&self) -> Result<()> {
        let initial = self.initial();
        if !(initial > 0.0 && initial.is_finite()) {
            return Err(Error::NoInitialGroundState(initial));
        }
        if let Self::Sudden { final_value, .. } = self {
            if !(*final_value >= 0.0 && final_value.is_finite()) {
                return Err(Error::InvalidProtocol(format!(
                    "post-quench frequency-squared must be non-negative, got {final_value}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    /// `b^2 = 1 + c sin^2(w t)`, `c = (lambda_i - lambda_f) / lambda_f`.
    Oscillating {
        freq: f64,
        c: f64,
    },
    /// `lambda_f = 0`: `b^2 = 1 + lambda_i t^2`.
    Free,
    Sampled(Sampled),
}

#[derive(Debug, Clone, PartialEq)]
struct Sampled {
    grid: TimeGrid,
    b: Vec<f64>,
    bdot: Vec<f64>,
}

/// Scale factor of one normal mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSolution {
    lambda_i: f64,
    lambda_f: f64,
    kind: Kind,
}

impl ModeSolution {
    pub fn lambda_i(&self) -> f64 {
        self.lambda_i
    }

    /// Final (for sampled solutions: last scheduled) frequency-squared.
    pub fn lambda_f(&self) -> f64 {
        self.lambda_f
    }

    pub fn is_closed_form(&self) -> bool {
        !matches!(self.kind, Kind::Sampled(_))
    }

    /// `(n, m)` with `b^2 = n cos(2 sqrt(lambda_f) t) + m`, for oscillating
    /// closed forms.
    pub fn coefficients(&self) -> Option<(f64, f64)> {
        match self.kind {
            Kind::Oscillating { .. } => {
                let (li, lf) = (self.lambda_i, self.lambda_f);
                Some(((lf - li) / (2.0 * lf), (lf + li) / (2.0 * lf)))
            }
            _ => None,
        }
    }

    /// `(b(t), b'(t))`.
    ///
    /// Sampled solutions are exact on their grid and cubic-Hermite in between;
    /// outside the integration window they return NaN.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        match &self.kind {
            Kind::Oscillating { freq, c } => {
                let (s, co) = (freq * t).sin_cos();
                let b = (1.0 + c * s * s).sqrt();
                (b, c * freq * s * co / b)
            }
            Kind::Free => {
                let b = (1.0 + self.lambda_i * t * t).sqrt();
                (b, self.lambda_i * t / b)
            }
            Kind::Sampled(s) => s.eval(t),
        }
    }

    /// Analytic `b''(t)` for closed forms.
    pub fn second_derivative(&self, t: f64) -> Option<f64> {
        let (b, bdot) = self.eval(t);
        match self.kind {
            Kind::Oscillating { freq, c } => {
                Some((c * freq * freq * (2.0 * freq * t).cos() - bdot * bdot) / b)
            }
            Kind::Free => Some((self.lambda_i - bdot * bdot) / b),
            Kind::Sampled(_) => None,
        }
    }

    /// `|b'' + lambda_f b - lambda_i / b^3|` for closed forms.
    pub fn residual(&self, t: f64) -> Option<f64> {
        let b = self.eval(t).0;
        self.second_derivative(t)
            .map(|acc| (acc + self.lambda_f * b - self.lambda_i / b.powi(3)).abs())
    }

    /// `b'^2 + lambda_f b^2 + lambda_i / b^2`, conserved for constant
    /// post-quench frequency and equal to `lambda_i + lambda_f` at `t = 0`.
    pub fn invariant(&self, t: f64) -> f64 {
        let (b, bdot) = self.eval(t);
        bdot * bdot + self.lambda_f * b * b + self.lambda_i / (b * b)
    }

    /// Period of `b(t)` for oscillating closed forms.
    pub fn period(&self) -> Option<f64> {
        match self.kind {
            Kind::Oscillating { freq, .. } => Some(std::f64::consts::PI / freq),
            _ => None,
        }
    }
}

impl Sampled {
    fn eval(&self, t: f64) -> (f64, f64) {
        let dt = self.grid.dt();
        let last = self.grid.len() - 1;
        if !(t >= 0.0) || t > self.grid.t_max() * (1.0 + 1e-12) {
            return (f64::NAN, f64::NAN);
        }
        let x = t / dt;
        let k = (x.floor() as usize).min(last);
        let frac = x - k as f64;
        if k == last || frac.abs() < 1e-12 {
            return (self.b[k], self.bdot[k]);
        }
        let (b0, b1) = (self.b[k], self.b[k + 1]);
        let (d0, d1) = (self.bdot[k] * dt, self.bdot[k + 1] * dt);
        let s = frac;
        let (s2, s3) = (s * s, s * s * s);
        let b = (2.0 * s3 - 3.0 * s2 + 1.0) * b0
            + (s3 - 2.0 * s2 + s) * d0
            + (-2.0 * s3 + 3.0 * s2) * b1
            + (s3 - s2) * d1;
        let db = (6.0 * s2 - 6.0 * s) * b0
            + (3.0 * s2 - 4.0 * s + 1.0) * d0
            + (-6.0 * s2 + 6.0 * s) * b1
            + (3.0 * s2 - 2.0 * s) * d1;
        (b, db / dt)
    }
}

/// Closed-form scale factor for a sudden quench `lambda_i -> lambda_f`.
pub fn solve_sudden(lambda_i: f64, lambda_f: f64) -> Result<ModeSolution> {
    QuenchProtocol::Sudden {
        initial: lambda_i,
        final_value: lambda_f,
    }
    .validate()?;
    let kind = if lambda_f == 0.0 {
        Kind::Free
    } else {
        Kind::Oscillating {
            freq: lambda_f.sqrt(),
            c: (lambda_i - lambda_f) / lambda_f,
        }
    };
    Ok(ModeSolution {
        lambda_i,
        lambda_f,
        kind,
    })
}

const MAX_REFINEMENTS: u32 = 16;

/// Numerically integrates the Ermakov equation on `grid`.
///
/// Each grid interval is split at schedule breakpoints and then into equal
/// RK4 steps. The step count doubles until, on every grid sample, the
/// invariant balance `I(t) - I(0) - int lambda'(s) b(s)^2 ds` (relative to
/// `I(0)`) and the change of `(b, b')` under refinement both stay below
/// `tolerance`.
pub fn integrate_general(
    protocol: &QuenchProtocol,
    grid: &TimeGrid,
    tolerance: f64,
) -> Result<ModeSolution> {
    protocol.validate()?;
    if !(tolerance > 0.0) {
        return Err(Error::InvalidProtocol(format!(
            "tolerance must be positive, got {tolerance}"
        )));
    }
    let schedule = protocol.schedule()?;
    let initial = protocol.initial();
    let stiffness = initial.max(schedule.max_value()).sqrt();
    let mut substeps = ((grid.dt() * stiffness / 0.1).ceil() as usize).max(1);

    let mut coarse = sweep(initial, &schedule, grid, substeps);
    for _ in 0..MAX_REFINEMENTS {
        substeps *= 2;
        let fine = sweep(initial, &schedule, grid, substeps);
        let failing = (0..grid.len()).find(|&k| {
            let change = (coarse.b[k] - fine.b[k])
                .abs()
                .max((coarse.bdot[k] - fine.bdot[k]).abs());
            !(change <= tolerance && fine.drift[k] <= tolerance)
        });
        match failing {
            None => {
                return Ok(ModeSolution {
                    lambda_i: initial,
                    lambda_f: *schedule.values().last().unwrap(),
                    kind: Kind::Sampled(Sampled {
                        grid: *grid,
                        b: fine.b,
                        bdot: fine.bdot,
                    }),
                })
            }
            Some(k) if substeps >= 1 << 24 => {
                return Err(Error::StepUnderflow { time: grid.time(k) })
            }
            Some(_) => coarse = fine,
        }
    }
    let k = (0..grid.len())
        .find(|&k| coarse.drift[k] > tolerance)
        .unwrap_or(grid.len() - 1);
    Err(Error::StepUnderflow { time: grid.time(k) })
}

struct Sweep {
    b: Vec<f64>,
    bdot: Vec<f64>,
    drift: Vec<f64>,
}

fn sweep(initial: f64, schedule: &Schedule, grid: &TimeGrid, substeps: usize) -> Sweep {
    let n = grid.len();
    let mut out = Sweep {
        b: Vec::with_capacity(n),
        bdot: Vec::with_capacity(n),
        drift: Vec::with_capacity(n),
    };
    let (mut b, mut v) = (1.0_f64, 0.0_f64);
    let invariant = |b: f64, v: f64, lam: f64| v * v + lam * b * b + initial / (b * b);
    let scale = invariant(1.0, 0.0, schedule.value(0.0));
    let mut balance = 0.0_f64;
    out.b.push(b);
    out.bdot.push(v);
    out.drift.push(0.0);

    let h_target = grid.dt() / substeps as f64;
    let breaks = schedule.times();
    for k in 0..n - 1 {
        let (t0, t1) = (grid.time(k), grid.time(k + 1));
        let mut edges = vec![t0];
        edges.extend(breaks.iter().copied().filter(|&s| s > t0 && s < t1));
        edges.push(t1);
        for w in edges.windows(2) {
            let (a, z) = (w[0], w[1]);
            let seg = schedule.segment(0.5 * (a + z));
            let lam = |t: f64| schedule.value_in(seg, t);
            let slope = schedule.slope_in(seg);
            let steps = ((z - a) / h_target).ceil().max(1.0) as usize;
            let h = (z - a) / steps as f64;
            for i in 0..steps {
                let t = a + i as f64 * h;
                let i0 = invariant(b, v, lam(t));
                let (b0, v0) = (b, v);
                let accel = |t: f64, b: f64| initial / (b * b * b) - lam(t) * b;
                let k1 = (v, accel(t, b));
                let k2 = (v + 0.5 * h * k1.1, accel(t + 0.5 * h, b + 0.5 * h * k1.0));
                let k3 = (v + 0.5 * h * k2.1, accel(t + 0.5 * h, b + 0.5 * h * k2.0));
                let k4 = (v + h * k3.1, accel(t + h, b + h * k3.0));
                b += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
                v += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
                let i1 = invariant(b, v, lam(t + h));
                let source = if slope == 0.0 {
                    0.0
                } else {
                    // Simpson on b^2 with a Hermite midpoint
                    let mid = 0.5 * (b0 + b) + h * (v0 - v) / 8.0;
                    slope * h / 6.0 * (b0 * b0 + 4.0 * mid * mid + b * b)
                };
                balance += i1 - i0 - source;
            }
        }
        out.b.push(b);
        out.bdot.push(v);
        out.drift.push((balance / scale).abs());
    }
    out
}

/// Scaled time `tau(t) = int_0^t ds / b(s)^2` by adaptive Simpson quadrature.
pub fn compute_tau(mode: &ModeSolution, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let f = |s: f64| {
        let b = mode.eval(s).0;
        1.0 / (b * b)
    };
    // chunks shorter than a quarter period keep the integrand unimodal
    let chunk = match mode.period() {
        Some(p) => (0.25 * p).min(1.0),
        None => 1.0,
    };
    let pieces = (t / chunk).ceil().max(1.0) as usize;
    let width = t / pieces as f64;
    let tol = 1e-12 / pieces as f64;
    (0..pieces)
        .map(|i| {
            let a = i as f64 * width;
            let b = if i + 1 == pieces { t } else { a + width };
            adaptive_simpson(&f, a, b, tol)
        })
        .sum()
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}
