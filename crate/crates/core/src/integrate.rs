//! Explicit Runge-Kutta integration of the forced model.
//!
//! Two schemes are available: classical RK4 on a fixed step and the
//! Dormand-Prince 5(4) pair with adaptive steps. Samples are produced by
//! interpolating inside accepted steps, so the sampling cadence never
//! constrains the step-size controller.
//!
//! Populations must stay nonnegative. A trial step that takes any
//! component below `-abs_tol` is rejected and retried with half the step;
//! smaller excursions below zero are clamped.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, ModelParameters, StateVector, DIM};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "rk4-fixed")]
    Rk4Fixed,
    #[default]
    #[serde(rename = "dormand-prince-5(4)")]
    DormandPrince54,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Rk4Fixed => "rk4-fixed",
            Method::DormandPrince54 => "dormand-prince-5(4)",
        }
    }

    pub fn from_name(s: &str) -> Option<Method> {
        match s {
            "rk4-fixed" | "rk4" => Some(Method::Rk4Fixed),
            "dormand-prince-5(4)" | "dp54" | "dopri5" => Some(Method::DormandPrince54),
            _ => None,
        }
    }
}

/// Solver configuration. For `rk4-fixed`, `h_init` is the step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegrationSettings {
    pub method: Method,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub sample_every: f64,
    /// Value given to components clamped from `(-abs_tol, 0)`.
    pub nonneg_floor: f64,
}

impl Default for IntegrationSettings {
    fn default() -> Self {
        IntegrationSettings {
            method: Method::DormandPrince54,
            h_init: 0.1,
            h_min: 1e-6,
            h_max: 1.0,
            abs_tol: 1e-8,
            rel_tol: 1e-8,
            t_start: 0.0,
            t_end: 3650.0,
            sample_every: 0.5,
            nonneg_floor: 0.0,
        }
    }
}

impl IntegrationSettings {
    pub fn rk4(h: f64) -> Self {
        IntegrationSettings {
            method: Method::Rk4Fixed,
            h_init: h,
            h_min: h.min(1e-6),
            h_max: h.max(1.0),
            ..Default::default()
        }
    }

    pub fn with_span(mut self, t_start: f64, t_end: f64) -> Self {
        self.t_start = t_start;
        self.t_end = t_end;
        self
    }

    pub fn with_tolerances(mut self, abs_tol: f64, rel_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        self
    }

    /// Checks everything except the time span.
    pub fn validate_solver(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSettings(m.to_string()));
        let all = [
            self.h_init,
            self.h_min,
            self.h_max,
            self.abs_tol,
            self.rel_tol,
            self.sample_every,
            self.nonneg_floor,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return bad("settings must be finite");
        }
        if !(self.h_min > 0.0 && self.h_min <= self.h_init && self.h_init <= self.h_max) {
            return bad("require 0 < h_min <= h_init <= h_max");
        }
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.sample_every <= 0.0 {
            return bad("sample_every must be positive");
        }
        if self.nonneg_floor < 0.0 {
            return bad("nonneg_floor must be >= 0");
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_solver()?;
        if !(self.t_start.is_finite() && self.t_end.is_finite() && self.t_end > self.t_start) {
            return Err(Error::InvalidSettings("require t_end > t_start".into()));
        }
        Ok(())
    }
}

/// Default initial condition.
pub const DEFAULT_X0: StateVector = StateVector([1000.0, 100.0, 100.0, 100.0, 100.0, 100.0]);

/// Sampled solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub settings: IntegrationSettings,
    pub params: ModelParameters,
    pub initial: StateVector,
    /// Absolute model time corresponding to `times = 0`. Nonzero when the
    /// trajectory was re-based after a discarded transient.
    pub time_origin: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, &StateVector)> {
        Some((*self.times.last()?, self.states.last()?))
    }

    /// Absolute model time of sample `i`.
    pub fn absolute_time(&self, i: usize) -> f64 {
        self.times[i] + self.time_origin
    }

    /// Series of component `i`.
    pub fn component(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[i]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum StepFailure {
    Underflow { t: f64, h: f64 },
    NonFinite { t: f64 },
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Continuous extension (Hairer, Norsett & Wanner).
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn axpy<const N: usize>(y: &[f64; N], terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += c * k[i];
        }
    }
    out
}

/// Interpolant over one accepted step.
#[derive(Clone, Debug)]
pub(crate) enum Dense<const N: usize> {
    Hermite {
        t0: f64,
        h: f64,
        y0: [f64; N],
        f0: [f64; N],
        y1: [f64; N],
        f1: [f64; N],
    },
    Dopri {
        t0: f64,
        h: f64,
        r: [[f64; N]; 5],
    },
}

impl<const N: usize> Dense<N> {
    pub fn t1(&self) -> f64 {
        match self {
            Dense::Hermite { t0, h, .. } | Dense::Dopri { t0, h, .. } => t0 + h,
        }
    }

    pub fn eval(&self, t: f64) -> [f64; N] {
        match self {
            Dense::Hermite {
                t0,
                h,
                y0,
                f0,
                y1,
                f1,
            } => {
                let s = (t - t0) / h;
                let s2 = s * s;
                let s3 = s2 * s;
                let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
                let h10 = s3 - 2.0 * s2 + s;
                let h01 = -2.0 * s3 + 3.0 * s2;
                let h11 = s3 - s2;
                let mut out = [0.0; N];
                for i in 0..N {
                    out[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
                }
                out
            }
            Dense::Dopri { t0, h, r } => {
                let th = (t - t0) / h;
                let th1 = 1.0 - th;
                let mut out = [0.0; N];
                for i in 0..N {
                    out[i] = r[0][i]
                        + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
                }
                out
            }
        }
    }
}

/// Single-trajectory stepping engine for an `N`-dimensional system.
pub(crate) struct Stepper<const N: usize, F> {
    f: F,
    s: IntegrationSettings,
    pub t: f64,
    pub y: [f64; N],
    dy: [f64; N],
    /// Proposed size of the next step.
    h: f64,
}

impl<const N: usize, F> Stepper<N, F>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    pub fn new(f: F, t: f64, y: [f64; N], s: IntegrationSettings) -> Self {
        let dy = f(t, &y);
        Stepper {
            f,
            s,
            t,
            y,
            dy,
            h: s.h_init,
        }
    }

    /// Replace the current state (the time is kept).
    pub fn reset_state(&mut self, y: [f64; N]) {
        self.y = y;
        self.dy = (self.f)(self.t, &y);
    }

    fn clamp(&self, y: &mut [f64; N]) -> bool {
        let mut changed = false;
        for v in y.iter_mut() {
            if *v < 0.0 {
                *v = self.s.nonneg_floor;
                changed = true;
            }
        }
        changed
    }

    fn too_negative(&self, y: &[f64; N]) -> bool {
        y.iter().any(|&v| v < -self.s.abs_tol)
    }

    /// Take one accepted step without passing `t_limit`.
    pub fn step(&mut self, t_limit: f64) -> std::result::Result<Dense<N>, StepFailure> {
        let mut h = match self.s.method {
            Method::Rk4Fixed => self.s.h_init,
            Method::DormandPrince54 => self.h,
        };
        loop {
            let remaining = t_limit - self.t;
            let last = remaining <= h * (1.0 + 1e-9);
            let h_try = if last { remaining } else { h };
            let attempt = match self.s.method {
                Method::Rk4Fixed => self.try_rk4(h_try),
                Method::DormandPrince54 => self.try_dopri(h_try),
            };
            match attempt {
                Attempt::NonFinite => return Err(StepFailure::NonFinite { t: self.t }),
                Attempt::Reject { h_next } => {
                    h = h_next;
                    if h < self.s.h_min {
                        return Err(StepFailure::Underflow { t: self.t, h });
                    }
                }
                Attempt::Accept {
                    mut y1,
                    f1,
                    dense,
                    h_next,
                } => {
                    let t1 = if last { t_limit } else { self.t + h_try };
                    let clamped = self.clamp(&mut y1);
                    self.dy = if clamped { (self.f)(t1, &y1) } else { f1 };
                    self.t = t1;
                    self.y = y1;
                    if self.s.method == Method::DormandPrince54 {
                        // A truncated final step says nothing about the scale.
                        self.h = if last { self.h.max(h_next) } else { h_next };
                        self.h = self.h.clamp(self.s.h_min, self.s.h_max);
                    }
                    return Ok(dense);
                }
            }
        }
    }

    /// Step until `t_target`, handing every accepted interpolant to `sink`.
    pub fn advance_to(
        &mut self,
        t_target: f64,
        mut sink: impl FnMut(&Dense<N>),
    ) -> std::result::Result<(), StepFailure> {
        while self.t < t_target {
            let d = self.step(t_target)?;
            sink(&d);
        }
        Ok(())
    }

    fn try_rk4(&self, h: f64) -> Attempt<N> {
        let (t, y, k1) = (self.t, &self.y, &self.dy);
        let k2 = (self.f)(t + 0.5 * h, &axpy(y, &[(0.5 * h, k1)]));
        let k3 = (self.f)(t + 0.5 * h, &axpy(y, &[(0.5 * h, &k2)]));
        let k4 = (self.f)(t + h, &axpy(y, &[(h, &k3)]));
        let y1 = axpy(
            y,
            &[
                (h / 6.0, k1),
                (h / 3.0, &k2),
                (h / 3.0, &k3),
                (h / 6.0, &k4),
            ],
        );
        if y1.iter().any(|v| !v.is_finite()) {
            return Attempt::NonFinite;
        }
        if self.too_negative(&y1) {
            return Attempt::Reject { h_next: 0.5 * h };
        }
        let f1 = (self.f)(t + h, &y1);
        Attempt::Accept {
            y1,
            f1,
            dense: Dense::Hermite {
                t0: t,
                h,
                y0: *y,
                f0: *k1,
                y1,
                f1,
            },
            h_next: self.s.h_init,
        }
    }

    fn try_dopri(&self, h: f64) -> Attempt<N> {
        let (t, y, k1) = (self.t, &self.y, &self.dy);
        let f = &self.f;
        let k2 = f(t + C2 * h, &axpy(y, &[(h * A21, k1)]));
        let k3 = f(t + C3 * h, &axpy(y, &[(h * A31, k1), (h * A32, &k2)]));
        let k4 = f(
            t + C4 * h,
            &axpy(y, &[(h * A41, k1), (h * A42, &k2), (h * A43, &k3)]),
        );
        let k5 = f(
            t + C5 * h,
            &axpy(
                y,
                &[(h * A51, k1), (h * A52, &k2), (h * A53, &k3), (h * A54, &k4)],
            ),
        );
        let k6 = f(
            t + h,
            &axpy(
                y,
                &[
                    (h * A61, k1),
                    (h * A62, &k2),
                    (h * A63, &k3),
                    (h * A64, &k4),
                    (h * A65, &k5),
                ],
            ),
        );
        let y1 = axpy(
            y,
            &[
                (h * A71, k1),
                (h * A73, &k3),
                (h * A74, &k4),
                (h * A75, &k5),
                (h * A76, &k6),
            ],
        );
        if y1.iter().any(|v| !v.is_finite()) {
            return Attempt::NonFinite;
        }
        let k7 = f(t + h, &y1);

        let mut err = 0.0_f64;
        for i in 0..N {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = self.s.abs_tol + self.s.rel_tol * y[i].abs().max(y1[i].abs());
            err = err.max((e / sc).abs());
        }
        if !err.is_finite() {
            return Attempt::NonFinite;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        let h_next = (h * factor).min(self.s.h_max);
        if err > 1.0 {
            return Attempt::Reject { h_next };
        }
        if self.too_negative(&y1) {
            return Attempt::Reject { h_next: 0.5 * h };
        }

        let mut r = [[0.0; N]; 5];
        for i in 0..N {
            let dy = y1[i] - y[i];
            let bspl = h * k1[i] - dy;
            r[0][i] = y[i];
            r[1][i] = dy;
            r[2][i] = bspl;
            r[3][i] = dy - h * k7[i] - bspl;
            r[4][i] = h
                * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
        Attempt::Accept {
            y1,
            f1: k7,
            dense: Dense::Dopri { t0: t, h, r },
            h_next,
        }
    }
}

enum Attempt<const N: usize> {
    Accept {
        y1: [f64; N],
        f1: [f64; N],
        dense: Dense<N>,
        h_next: f64,
    },
    Reject {
        h_next: f64,
    },
    NonFinite,
}

pub(crate) fn model_field(
    params: &ModelParameters,
) -> impl Fn(f64, &[f64; DIM]) -> [f64; DIM] + '_ {
    move |t, y| model::rhs(t, &StateVector(*y), params).0
}

pub(crate) fn check_inputs(
    params: &ModelParameters,
    x0: &StateVector,
    settings: &IntegrationSettings,
) -> Result<()> {
    let v = model::validate(params);
    if !v.is_empty() {
        return Err(Error::InvalidParameters(v));
    }
    settings.validate_solver()?;
    if !x0.is_finite() || !x0.is_nonnegative() {
        return Err(Error::InvalidSettings(
            "initial state must be finite and nonnegative".into(),
        ));
    }
    Ok(())
}

/// Integrate on `[t_begin, t_end]`, sampling from `t_sample` onwards.
/// Stored times are offset by `-origin`.
fn drive(
    params: &ModelParameters,
    x0: &StateVector,
    settings: &IntegrationSettings,
    t_begin: f64,
    t_sample: f64,
    t_end: f64,
    origin: f64,
) -> Result<Trajectory> {
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        settings: *settings,
        params: *params,
        initial: *x0,
        time_origin: origin,
    };
    let field = model_field(params);
    let mut st = Stepper::new(field, t_begin, x0.0, *settings);
    let fail = |e: StepFailure, traj: Trajectory| match e {
        StepFailure::Underflow { t, h } => Error::StepSizeUnderflow {
            t,
            h,
            partial: Box::new(traj),
        },
        StepFailure::NonFinite { t } => Error::NonFiniteState {
            t,
            partial: Box::new(traj),
        },
    };
    if t_sample > t_begin {
        if let Err(e) = st.advance_to(t_sample, |_| {}) {
            return Err(fail(e, traj));
        }
    }

    let dt = settings.sample_every;
    let span = t_end - t_sample;
    let n_regular = ((span / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let floor = |v: [f64; DIM]| StateVector(v.map(|x| x.max(0.0)));
    let push = |traj: &mut Trajectory, t: f64, y: [f64; DIM]| {
        traj.times.push(t - origin);
        traj.states.push(floor(y));
    };

    push(&mut traj, t_sample, st.y);
    let mut k = 1;
    let mut result = Ok(());
    while st.t < t_end {
        let mut pending = Vec::new();
        match st.step(t_end) {
            Ok(d) => {
                while k < n_regular {
                    let ts = t_sample + k as f64 * dt;
                    if ts > d.t1() {
                        break;
                    }
                    pending.push((ts, d.eval(ts)));
                    k += 1;
                }
            }
            Err(e) => {
                result = Err(e);
            }
        }
        for (ts, y) in pending {
            push(&mut traj, ts, y);
        }
        if result.is_err() {
            break;
        }
    }
    if let Err(e) = result {
        return Err(fail(e, traj));
    }
    push(&mut traj, t_end, st.y);
    Ok(traj)
}

/// Solve the initial-value problem on `[t_start, t_end]`.
pub fn integrate(
    params: &ModelParameters,
    x0: &StateVector,
    settings: &IntegrationSettings,
) -> Result<Trajectory> {
    check_inputs(params, x0, settings)?;
    settings.validate()?;
    drive(
        params,
        x0,
        settings,
        settings.t_start,
        settings.t_start,
        settings.t_end,
        0.0,
    )
}

/// Integrate `transient_days` from `settings.t_start` without sampling,
/// then sample a window of `window_days`. Times are re-based to zero at
/// the window start; `time_origin` keeps the absolute time so the forcing
/// phase is not lost. `settings.t_end` is ignored.
pub fn integrate_discard_transient(
    params: &ModelParameters,
    x0: &StateVector,
    transient_days: f64,
    window_days: f64,
    settings: &IntegrationSettings,
) -> Result<Trajectory> {
    check_inputs(params, x0, settings)?;
    if !(transient_days >= 0.0 && transient_days.is_finite()) {
        return Err(Error::InvalidSettings("transient_days must be >= 0".into()));
    }
    if !(window_days > 0.0 && window_days.is_finite()) {
        return Err(Error::InvalidSettings("window_days must be positive".into()));
    }
    let t0 = settings.t_start;
    let ts = t0 + transient_days;
    let mut s = *settings;
    s.t_end = ts + window_days;
    drive(params, x0, &s, t0, ts, ts + window_days, ts)
}

/// State at `t1` starting from `x0` at `t0`, without sampling.
pub fn advance(
    params: &ModelParameters,
    x0: &StateVector,
    t0: f64,
    t1: f64,
    settings: &IntegrationSettings,
) -> Result<StateVector> {
    check_inputs(params, x0, settings)?;
    let mut st = Stepper::new(model_field(params), t0, x0.0, *settings);
    st.advance_to(t1, |_| {}).map_err(|e| {
        let partial = Box::new(Trajectory {
            times: Vec::new(),
            states: Vec::new(),
            settings: *settings,
            params: *params,
            initial: *x0,
            time_origin: 0.0,
        });
        match e {
            StepFailure::Underflow { t, h } => Error::StepSizeUnderflow { t, h, partial },
            StepFailure::NonFinite { t } => Error::NonFiniteState { t, partial },
        }
    })?;
    Ok(StateVector(st.y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::{coordinates, EquilibriumLabel};
    use proptest::prelude::*;

    fn decay_params() -> ModelParameters {
        let mut p = ModelParameters::default();
        p.r0 = 0.0;
        p.m1 = 1.0;
        p.n1 = 0.0;
        p
    }

    #[test]
    fn scalar_decay_accuracy() {
        let x0 = StateVector([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let s = IntegrationSettings::default().with_span(0.0, 10.0);
        let tr = integrate(&decay_params(), &x0, &s).unwrap();
        let (t, x) = tr.last().unwrap();
        assert_eq!(t, 10.0);
        assert!((x[0] - (-10.0f64).exp()).abs() < 1e-7);
        // dense output along the way
        for (t, x) in tr.times.iter().zip(&tr.states) {
            assert!((x[0] - (-t).exp()).abs() < 1e-7, "t={t}");
        }
    }

    #[test]
    fn sample_grid() {
        let s = IntegrationSettings::default().with_span(0.0, 10.2);
        let tr = integrate(&ModelParameters::default(), &DEFAULT_X0, &s).unwrap();
        assert_eq!(tr.times[0], 0.0);
        assert_eq!(*tr.times.last().unwrap(), 10.2);
        assert_eq!(tr.len(), 22);
        assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(tr.states[0], DEFAULT_X0);
    }

    #[test]
    fn zero_stays_zero() {
        let s = IntegrationSettings::default().with_span(0.0, 100.0);
        let tr = integrate(&ModelParameters::default().with_r1(0.3), &StateVector::ZERO, &s)
            .unwrap();
        assert!(tr.states.iter().all(|x| *x == StateVector::ZERO));
    }

    #[test]
    fn converges_to_coexistence() {
        let p = ModelParameters::default();
        let e5 = coordinates(EquilibriumLabel::E5, &p, p.r0).unwrap();
        let s = IntegrationSettings::default();
        let tr = integrate(&p, &e5.scaled(1.1), &s).unwrap();
        let (_, x) = tr.last().unwrap();
        for i in 0..6 {
            assert!((x[i] - e5[i]).abs() < 1e-3 * e5[i], "x{}", i + 1);
        }
    }

    #[test]
    fn rk4_order() {
        let p = ModelParameters::default();
        let span = IntegrationSettings::default().with_span(0.0, 100.0);
        let reference = *integrate(&p, &DEFAULT_X0, &span.with_tolerances(1e-12, 1e-12))
            .unwrap()
            .states
            .last()
            .unwrap();
        let err = |h: f64| {
            let s = IntegrationSettings::rk4(h).with_span(0.0, 100.0);
            let x = *integrate(&p, &DEFAULT_X0, &s).unwrap().states.last().unwrap();
            (0..6).map(|i| (x[i] - reference[i]).abs()).fold(0.0, f64::max)
        };
        let ratio = err(1.0) / err(0.5);
        assert!((12.0..=20.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn adaptive_and_fixed_agree_short_horizon() {
        let p = ModelParameters::default().with_r1(0.35);
        let s = IntegrationSettings::default()
            .with_span(0.0, 365.0)
            .with_tolerances(1e-10, 1e-10);
        let a = integrate(&p, &DEFAULT_X0, &s).unwrap();
        let b = integrate(&p, &DEFAULT_X0, &IntegrationSettings::rk4(0.01).with_span(0.0, 365.0))
            .unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.states.iter().zip(&b.states) {
            for i in 0..6 {
                let scale = x[i].abs().max(1.0);
                assert!((x[i] - y[i]).abs() / scale < 1e-5);
            }
        }
    }

    #[test]
    fn deterministic() {
        let p = ModelParameters::default().with_r1(0.3);
        let s = IntegrationSettings::default().with_span(0.0, 730.0);
        let a = integrate(&p, &DEFAULT_X0, &s).unwrap();
        let b = integrate(&p, &DEFAULT_X0, &s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn discard_zero_matches_plain() {
        let p = ModelParameters::default().with_r1(0.2);
        let s = IntegrationSettings::default().with_span(0.0, 400.0);
        let a = integrate(&p, &DEFAULT_X0, &s).unwrap();
        let b = integrate_discard_transient(&p, &DEFAULT_X0, 0.0, 400.0, &s).unwrap();
        assert_eq!(a.times, b.times);
        assert_eq!(a.states, b.states);
    }

    #[test]
    fn discard_rebases_time() {
        let p = ModelParameters::default().with_r1(0.2);
        let s = IntegrationSettings::default();
        let tr = integrate_discard_transient(&p, &DEFAULT_X0, 500.0, 100.0, &s).unwrap();
        assert_eq!(tr.times[0], 0.0);
        assert_eq!(*tr.times.last().unwrap(), 100.0);
        assert_eq!(tr.time_origin, 500.0);
        assert_eq!(tr.absolute_time(2), 501.0);
        let x = advance(&p, &DEFAULT_X0, 0.0, 500.0, &s).unwrap();
        assert_eq!(tr.states[0], x);
    }

    #[test]
    fn bad_settings() {
        let mut s = IntegrationSettings::default();
        s.h_min = 1.0;
        s.h_init = 0.1;
        assert!(matches!(
            integrate(&ModelParameters::default(), &DEFAULT_X0, &s),
            Err(Error::InvalidSettings(_))
        ));
        let s = IntegrationSettings::default().with_span(5.0, 5.0);
        assert!(integrate(&ModelParameters::default(), &DEFAULT_X0, &s).is_err());
        let neg = StateVector([-1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(integrate(&ModelParameters::default(), &neg, &Default::default()).is_err());
    }

    #[test]
    fn underflow_carries_partial() {
        let mut s = IntegrationSettings::default().with_span(0.0, 50.0);
        s.h_min = 0.05;
        s.h_init = 0.05;
        s.abs_tol = 1e-14;
        s.rel_tol = 1e-14;
        match integrate(&ModelParameters::default(), &DEFAULT_X0, &s) {
            Err(Error::StepSizeUnderflow { partial, .. }) => assert!(!partial.is_empty()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn blow_up_is_reported() {
        let mut p = ModelParameters::default().with_alpha(0.0).with_beta(0.0);
        p.k = 1e300;
        p.r0 = 50.0;
        let s = IntegrationSettings::rk4(1.0).with_span(0.0, 100.0);
        let e = integrate(&p, &DEFAULT_X0, &s).unwrap_err();
        assert!(e.is_numeric(), "{e}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn samples_nonnegative(
            x in prop::array::uniform6(0.0..5000.0f64),
            r1 in 0.0..1.0f64,
            alpha in 1e-6..2e-4f64,
        ) {
            let p = ModelParameters::default().with_r1(r1).with_alpha(alpha);
            let s = IntegrationSettings::default().with_span(0.0, 730.0);
            let tr = integrate(&p, &StateVector(x), &s).unwrap();
            prop_assert!(tr.states.iter().all(|v| v.is_nonnegative() && v.is_finite()));
        }
    }
}
