//! Attractor characterisation: extrema, stroboscopic sampling, the largest
//! Lyapunov exponent and parameter sweeps.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{
    self, check_inputs, integrate_discard_transient, IntegrationSettings, Stepper, Trajectory,
};
use crate::model::{self, ModelParameters, StateVector, DIM, YEAR};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub t: f64,
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExtremaSet {
    pub var_index: usize,
    pub maxima: Vec<Extremum>,
    pub minima: Vec<Extremum>,
}

/// Vertex of the parabola through three points.
fn parabola_vertex(t: [f64; 3], y: [f64; 3]) -> Option<(f64, f64)> {
    let (a, b) = (t[1] - t[0], t[1] - t[2]);
    let (fa, fb) = (y[1] - y[0], y[1] - y[2]);
    let den = a * fb - b * fa;
    if den == 0.0 {
        return None;
    }
    let tv = t[1] - 0.5 * (a * a * fb - b * b * fa) / den;
    if !(tv > t[0] && tv < t[2]) {
        return None;
    }
    // Lagrange form evaluated at the vertex.
    let l0 = (tv - t[1]) * (tv - t[2]) / ((t[0] - t[1]) * (t[0] - t[2]));
    let l1 = (tv - t[0]) * (tv - t[2]) / ((t[1] - t[0]) * (t[1] - t[2]));
    let l2 = (tv - t[0]) * (tv - t[1]) / ((t[2] - t[0]) * (t[2] - t[1]));
    Some((tv, l0 * y[0] + l1 * y[1] + l2 * y[2]))
}

/// Local extrema of a sampled series. Runs of equal values are treated as
/// one sample located at the run's midpoint; endpoints never count.
pub fn extrema_of(times: &[f64], values: &[f64]) -> (Vec<Extremum>, Vec<Extremum>) {
    let mut maxima = Vec::new();
    let mut minima = Vec::new();
    // (first index, last index) of each run of equal values
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for (i, v) in values.iter().enumerate() {
        match runs.last_mut() {
            Some(r) if values[r.1] == *v => r.1 = i,
            _ => runs.push((i, i)),
        }
    }
    for w in runs.windows(3) {
        let (prev, cur, next) = (values[w[0].1], values[w[1].0], values[w[2].0]);
        let is_max = cur > prev && cur > next;
        let is_min = cur < prev && cur < next;
        if !(is_max || is_min) {
            continue;
        }
        let e = if w[1].0 != w[1].1 {
            Extremum {
                t: 0.5 * (times[w[1].0] + times[w[1].1]),
                value: cur,
            }
        } else {
            let (i0, i1, i2) = (w[0].1, w[1].0, w[2].0);
            let refined = parabola_vertex(
                [times[i0], times[i1], times[i2]],
                [values[i0], values[i1], values[i2]],
            );
            let (t, value) = refined.unwrap_or((times[i1], cur));
            Extremum { t, value }
        };
        if is_max {
            maxima.push(e);
        } else {
            minima.push(e);
        }
    }
    (maxima, minima)
}

/// Extrema of component `var_index` of a trajectory (times as stored).
pub fn extrema(traj: &Trajectory, var_index: usize) -> ExtremaSet {
    let values = traj.component(var_index);
    let (maxima, minima) = extrema_of(&traj.times, &values);
    ExtremaSet {
        var_index,
        maxima,
        minima,
    }
}

/// States at whole forcing periods after the first sample, interpolated
/// linearly between samples when the grid does not hit them exactly.
pub fn strobe(traj: &Trajectory) -> Vec<StateVector> {
    let mut out = Vec::new();
    let Some(&t0) = traj.times.first() else {
        return out;
    };
    let t_end = *traj.times.last().unwrap();
    let mut j = 0;
    let mut k = 0;
    loop {
        let ts = t0 + k as f64 * YEAR;
        if ts > t_end * (1.0 + 1e-12) {
            break;
        }
        while j + 1 < traj.times.len() && traj.times[j + 1] <= ts {
            j += 1;
        }
        let x = if traj.times[j] == ts || j + 1 == traj.times.len() {
            traj.states[j]
        } else {
            let (ta, tb) = (traj.times[j], traj.times[j + 1]);
            let w = (ts - ta) / (tb - ta);
            let (a, b) = (&traj.states[j], &traj.states[j + 1]);
            StateVector(std::array::from_fn(|i| a[i] + w * (b[i] - a[i])))
        };
        out.push(x);
        k += 1;
    }
    out
}

/// Assign each value to a level cluster: sorted values are split wherever
/// consecutive values differ by more than `tol`. Ids ascend with level.
pub fn cluster_levels(values: &[f64], tol: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ids = vec![0; values.len()];
    let mut id = 0;
    for w in 0..order.len() {
        if w > 0 && values[order[w]] - values[order[w - 1]] > tol {
            id += 1;
        }
        ids[order[w]] = id;
    }
    ids
}

/// Smallest `k` such that `v[i]` and `v[i + k]` agree within `tol` for
/// all `i`, requiring at least `min_repeats` full periods.
pub fn recurrence_period(v: &[f64], tol: f64, max_k: usize, min_repeats: usize) -> Option<usize> {
    (1..=max_k)
        .take_while(|&k| v.len() >= min_repeats * k)
        .find(|&k| (0..v.len() - k).all(|i| (v[i] - v[i + k]).abs() <= tol))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LyapunovSpec {
    pub renorm_interval: f64,
    pub horizon: f64,
    pub discard: f64,
    pub blocks: usize,
    /// Initial separation relative to the component scales.
    pub delta0: f64,
}

impl Default for LyapunovSpec {
    fn default() -> Self {
        LyapunovSpec {
            renorm_interval: 1.0,
            horizon: 36500.0,
            discard: 7300.0,
            blocks: 10,
            delta0: 1e-6,
        }
    }
}

impl LyapunovSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = self.renorm_interval > 0.0
            && self.horizon.is_finite()
            && self.horizon >= self.renorm_interval
            && self.discard >= 0.0
            && self.discard.is_finite()
            && self.blocks >= 1
            && self.delta0 > 0.0
            && self.delta0 < 1.0;
        if !ok {
            return Err(Error::InvalidSettings("invalid Lyapunov settings".into()));
        }
        let n = (self.horizon / self.renorm_interval).round() as usize;
        if n < self.blocks {
            return Err(Error::InvalidSettings(
                "horizon too short for the number of blocks".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    /// Per day.
    pub lle: f64,
    pub stderr: f64,
}

/// Largest Lyapunov exponent by the two-trajectory (Benettin) method.
///
/// Both trajectories are advanced together as one 12-dimensional system so
/// they share steps. Distances are measured after dividing each component
/// by `max(|x0_i|, 1)`. Integration starts at `settings.t_start`.
pub fn largest_lyapunov(
    params: &ModelParameters,
    x0: &StateVector,
    settings: &IntegrationSettings,
    spec: &LyapunovSpec,
) -> Result<LyapunovEstimate> {
    check_inputs(params, x0, settings)?;
    spec.validate()?;

    let scale: [f64; DIM] = x0.0.map(|v| v.abs().max(1.0));
    let dir0 = [1.0 / (DIM as f64).sqrt(); DIM];
    let companion = |x: &[f64; DIM], dir: &[f64; DIM]| -> [f64; DIM] {
        std::array::from_fn(|i| (x[i] + spec.delta0 * scale[i] * dir[i]).max(0.0))
    };
    let join = |a: &[f64; DIM], b: &[f64; DIM]| -> [f64; 2 * DIM] {
        std::array::from_fn(|i| if i < DIM { a[i] } else { b[i - DIM] })
    };
    let split = |y: &[f64; 2 * DIM]| -> ([f64; DIM], [f64; DIM]) {
        (
            std::array::from_fn(|i| y[i]),
            std::array::from_fn(|i| y[i + DIM]),
        )
    };
    let field = |t: f64, y: &[f64; 2 * DIM]| -> [f64; 2 * DIM] {
        let (a, b) = split(y);
        let fa = model::rhs(t, &StateVector(a), params).0;
        let fb = model::rhs(t, &StateVector(b), params).0;
        join(&fa, &fb)
    };

    let t0 = settings.t_start;
    let mut st = Stepper::new(field, t0, join(&x0.0, &companion(&x0.0, &dir0)), *settings);
    let n_discard = (spec.discard / spec.renorm_interval).round() as usize;
    let n_measure = (spec.horizon / spec.renorm_interval).round() as usize;
    let per_block = n_measure / spec.blocks;
    let mut block_sums = vec![0.0; spec.blocks];

    for k in 1..=(n_discard + n_measure) {
        let tk = t0 + k as f64 * spec.renorm_interval;
        st.advance_to(tk, |_| {}).map_err(|e| lle_failure(e, params, x0, settings))?;
        let (a, b) = split(&st.y);
        let sep: [f64; DIM] = std::array::from_fn(|i| (b[i] - a[i]) / scale[i]);
        let d = sep.iter().map(|v| v * v).sum::<f64>().sqrt();
        let dir = if d > 0.0 && d.is_finite() {
            sep.map(|v| v / d)
        } else {
            dir0
        };
        if k > n_discard {
            let m = k - n_discard - 1;
            let block = (m / per_block.max(1)).min(spec.blocks - 1);
            block_sums[block] += (d.max(f64::MIN_POSITIVE) / spec.delta0).ln();
        }
        st.reset_state(join(&a, &companion(&a, &dir)));
    }

    let total: f64 = block_sums.iter().sum();
    let lle = total / (n_measure as f64 * spec.renorm_interval);
    let means: Vec<f64> = (0..spec.blocks)
        .map(|b| {
            let len = if b + 1 == spec.blocks {
                n_measure - per_block * (spec.blocks - 1)
            } else {
                per_block
            };
            block_sums[b] / (len as f64 * spec.renorm_interval)
        })
        .collect();
    let stderr = if spec.blocks > 1 {
        let mean = means.iter().sum::<f64>() / spec.blocks as f64;
        let var =
            means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (spec.blocks - 1) as f64;
        (var / spec.blocks as f64).sqrt()
    } else {
        f64::NAN
    };
    Ok(LyapunovEstimate { lle, stderr })
}

fn lle_failure(
    e: integrate::StepFailure,
    params: &ModelParameters,
    x0: &StateVector,
    settings: &IntegrationSettings,
) -> Error {
    let partial = Box::new(Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        settings: *settings,
        params: *params,
        initial: *x0,
        time_origin: 0.0,
    });
    match e {
        integrate::StepFailure::Underflow { t, h } => Error::StepSizeUnderflow { t, h, partial },
        integrate::StepFailure::NonFinite { t } => Error::NonFiniteState { t, partial },
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    FixedPoint,
    /// Number of maxima of the tracked variable per period.
    Periodic(usize),
    Chaotic,
    Undetermined,
}

impl Classification {
    pub fn label(&self) -> &'static str {
        match self {
            Classification::FixedPoint => "fixed-point",
            Classification::Periodic(_) => "periodic",
            Classification::Chaotic => "chaotic",
            Classification::Undetermined => "undetermined",
        }
    }

    pub fn period(&self) -> Option<usize> {
        match self {
            Classification::Periodic(n) => Some(*n),
            _ => None,
        }
    }

    pub fn is_chaotic(&self) -> bool {
        matches!(self, Classification::Chaotic)
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::Periodic(n) => write!(f, "periodic({n})"),
            c => f.write_str(c.label()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AttractorSpec {
    pub var_index: usize,
    pub transient: f64,
    pub window: f64,
    /// Fixed point if the window range of the variable is below this
    /// fraction of its mean.
    pub fp_tol: f64,
    /// Maxima levels closer than this fraction of the window range are
    /// the same level.
    pub cluster_tol: f64,
    pub lle_threshold: f64,
    pub max_period: usize,
    pub lyapunov: LyapunovSpec,
}

impl Default for AttractorSpec {
    fn default() -> Self {
        AttractorSpec {
            var_index: 0,
            transient: 7300.0,
            window: 18250.0,
            fp_tol: 1e-3,
            cluster_tol: 0.005,
            lle_threshold: 1e-4,
            max_period: 64,
            lyapunov: LyapunovSpec::default(),
        }
    }
}

impl AttractorSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = self.var_index < DIM
            && self.transient >= 0.0
            && self.window > 0.0
            && self.fp_tol > 0.0
            && self.cluster_tol > 0.0
            && self.lle_threshold.is_finite()
            && self.max_period >= 1;
        if !ok {
            return Err(Error::InvalidSettings("invalid attractor settings".into()));
        }
        self.lyapunov.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttractorSummary {
    pub classification: Classification,
    /// Distinct maxima levels in the window.
    pub distinct_extrema_count: usize,
    pub lle: f64,
    pub lle_stderr: f64,
    /// One state per forcing period, starting at the window start.
    pub strobe_points: Vec<StateVector>,
    /// Recurrence period of the stroboscopic sequence, in years.
    pub strobe_period: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttractorAnalysis {
    pub summary: AttractorSummary,
    pub extrema: ExtremaSet,
    /// Absolute time of the window start.
    pub window_origin: f64,
    pub final_state: StateVector,
    /// Absolute time of `final_state`.
    pub final_time: f64,
}

/// Characterise the attractor reached from `x0` (starting at the absolute
/// time `settings.t_start`).
pub fn classify_attractor(
    params: &ModelParameters,
    x0: &StateVector,
    settings: &IntegrationSettings,
    spec: &AttractorSpec,
) -> Result<AttractorAnalysis> {
    spec.validate()?;
    let traj = integrate_discard_transient(params, x0, spec.transient, spec.window, settings)?;
    let v = traj.component(spec.var_index);
    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let range = hi - lo;
    let tol = spec.cluster_tol * range;

    let ext = extrema(&traj, spec.var_index);
    let strobe_points = strobe(&traj);

    let mut lle_settings = *settings;
    lle_settings.t_start = traj.time_origin;
    let est = largest_lyapunov(params, &traj.states[0], &lle_settings, &spec.lyapunov)?;

    let fixed = range <= spec.fp_tol * mean.abs();
    let levels: Vec<f64> = ext.maxima.iter().map(|e| e.value).collect();
    let strobe_v: Vec<f64> = strobe_points.iter().map(|s| s[spec.var_index]).collect();
    let strobe_period = if fixed {
        Some(1)
    } else {
        recurrence_period(&strobe_v, tol, spec.max_period, 3)
    };
    let classification = if fixed {
        Classification::FixedPoint
    } else if let Some(k) = recurrence_period(&levels, tol, spec.max_period, 3) {
        Classification::Periodic(k)
    } else if est.lle > spec.lle_threshold {
        Classification::Chaotic
    } else {
        Classification::Undetermined
    };
    let distinct_extrema_count = cluster_levels(&levels, tol)
        .into_iter()
        .max()
        .map_or(0, |m| m + 1);

    let (t_last, x_last) = traj.last().expect("window has samples");
    Ok(AttractorAnalysis {
        summary: AttractorSummary {
            classification,
            distinct_extrema_count,
            lle: est.lle,
            lle_stderr: est.stderr,
            strobe_points,
            strobe_period,
        },
        extrema: ext,
        window_origin: traj.time_origin,
        final_state: *x_last,
        final_time: t_last + traj.time_origin,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    R1,
    Alpha,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::R1 => "r1",
            SweepParam::Alpha => "alpha",
        }
    }

    pub fn from_name(s: &str) -> Option<SweepParam> {
        match s {
            "r1" => Some(SweepParam::R1),
            "alpha" => Some(SweepParam::Alpha),
            _ => None,
        }
    }

    pub fn apply(self, p: &ModelParameters, v: f64) -> ModelParameters {
        match self {
            SweepParam::R1 => p.with_r1(v),
            SweepParam::Alpha => p.with_alpha(v),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
    pub continuation: bool,
}

impl Default for SweepSpec {
    /// The seasonality sweep `0 <= r1 <= 0.35` on 141 points.
    fn default() -> Self {
        SweepSpec::new(SweepParam::R1, 0.0, 0.35, 141)
    }
}

impl SweepSpec {
    pub fn new(param: SweepParam, lo: f64, hi: f64, steps: usize) -> Self {
        SweepSpec {
            param,
            lo,
            hi,
            steps,
            continuation: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::InvalidSettings("sweep requires lo < hi".into()));
        }
        if self.steps < 2 {
            return Err(Error::InvalidSettings("sweep requires steps >= 2".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = self.steps - 1;
        (0..self.steps)
            .map(|i| {
                if i == n {
                    self.hi
                } else {
                    self.lo + (self.hi - self.lo) * i as f64 / n as f64
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub param_value: f64,
    pub analysis: Option<AttractorAnalysis>,
    /// Set when this point failed; the sweep carries on.
    pub error: Option<String>,
}

impl SweepPoint {
    pub fn classification(&self) -> Option<Classification> {
        self.analysis.as_ref().map(|a| a.summary.classification)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub param: SweepParam,
    pub grid: Vec<f64>,
    pub points: Vec<SweepPoint>,
    pub continuation: bool,
}

impl SweepResult {
    /// First grid value classified chaotic.
    pub fn first_chaotic(&self) -> Option<f64> {
        self.points
            .iter()
            .find(|p| p.classification().is_some_and(|c| c.is_chaotic()))
            .map(|p| p.param_value)
    }

    pub fn point_at(&self, value: f64) -> Option<&SweepPoint> {
        self.points
            .iter()
            .min_by(|a, b| {
                (a.param_value - value)
                    .abs()
                    .total_cmp(&(b.param_value - value).abs())
            })
    }
}

fn run_point(
    params: &ModelParameters,
    x0: &StateVector,
    settings: &IntegrationSettings,
    attractor: &AttractorSpec,
    sp: &SweepSpec,
    v: f64,
) -> SweepPoint {
    let p = sp.param.apply(params, v);
    let violations = model::validate(&p);
    let res = if violations.is_empty() {
        classify_attractor(&p, x0, settings, attractor)
    } else {
        Err(Error::InvalidParameters(violations))
    };
    match res {
        Ok(a) => SweepPoint {
            param_value: v,
            analysis: Some(a),
            error: None,
        },
        Err(e) => SweepPoint {
            param_value: v,
            analysis: None,
            error: Some(e.to_string()),
        },
    }
}

/// Bifurcation sweep over `r1` or `alpha`.
///
/// With continuation on, each point starts from the previous point's final
/// state at the same forcing phase and points run in order. Otherwise every
/// point starts from `x0` and points run in parallel on the current rayon
/// pool. Results are ordered by grid index either way.
pub fn sweep(
    params: &ModelParameters,
    x0: &StateVector,
    settings: &IntegrationSettings,
    sp: &SweepSpec,
    attractor: &AttractorSpec,
) -> Result<SweepResult> {
    sp.validate()?;
    attractor.validate()?;
    check_inputs(params, x0, settings)?;
    let grid = sp.grid();
    let points = if sp.continuation {
        let mut out = Vec::with_capacity(grid.len());
        let mut seed = (*x0, settings.t_start);
        for &v in &grid {
            let mut s = *settings;
            s.t_start = seed.1;
            let pt = run_point(params, &seed.0, &s, attractor, sp, v);
            if let Some(a) = &pt.analysis {
                // Only the phase matters for the forcing.
                seed = (a.final_state, a.final_time.rem_euclid(YEAR));
            }
            out.push(pt);
        }
        out
    } else {
        grid.par_iter()
            .map(|&v| run_point(params, x0, settings, attractor, sp, v))
            .collect()
    };
    Ok(SweepResult {
        param: sp.param,
        grid,
        points,
        continuation: sp.continuation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::DEFAULT_X0;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn sine_traj(days: f64) -> Trajectory {
        let n = (days / 0.5) as usize + 1;
        let times: Vec<f64> = (0..n).map(|i| i as f64 * 0.5).collect();
        let states = times
            .iter()
            .map(|t| StateVector([(2.0 * PI * t / 365.0).sin(), 0.0, 0.0, 0.0, 0.0, 0.0]))
            .collect();
        Trajectory {
            times,
            states,
            settings: IntegrationSettings::default(),
            params: ModelParameters::default(),
            initial: StateVector::ZERO,
            time_origin: 0.0,
        }
    }

    #[test]
    fn sine_extrema() {
        let e = extrema(&sine_traj(3650.0), 0);
        assert_eq!(e.maxima.len(), 10);
        assert_eq!(e.minima.len(), 10);
        for (k, m) in e.maxima.iter().enumerate() {
            assert!((m.t - (91.25 + 365.0 * k as f64)).abs() < 0.01, "{}", m.t);
            assert!((m.value - 1.0).abs() < 1e-4);
        }
        for m in &e.minima {
            assert!((m.value + 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn constant_has_no_extrema() {
        let (mx, mn) = extrema_of(&[0.0, 1.0, 2.0, 3.0], &[5.0; 4]);
        assert!(mx.is_empty() && mn.is_empty());
    }

    #[test]
    fn plateau_midpoint() {
        let t = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let v = [0.0, 1.0, 2.0, 2.0, 2.0, 0.0];
        let (mx, mn) = extrema_of(&t, &v);
        assert_eq!(mx, vec![Extremum { t: 3.0, value: 2.0 }]);
        assert!(mn.is_empty());
    }

    #[test]
    fn strobe_hits_grid() {
        let s = strobe(&sine_traj(3650.0));
        assert_eq!(s.len(), 11);
        assert!(s.iter().all(|x| x[0].abs() < 1e-9));
    }

    #[test]
    fn clusters_and_recurrence() {
        let v = [1.0, 5.0, 1.001, 5.002, 0.999, 5.0, 1.0, 5.001];
        assert_eq!(cluster_levels(&v, 0.01), vec![0, 1, 0, 1, 0, 1, 0, 1]);
        assert_eq!(recurrence_period(&v, 0.01, 8, 3), Some(2));
        assert_eq!(recurrence_period(&v, 0.0001, 8, 3), None);
    }

    #[test]
    fn grid_endpoints() {
        let g = SweepSpec::new(SweepParam::R1, 0.0, 0.35, 141).grid();
        assert_eq!(g.len(), 141);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[140], 0.35);
        assert!((g[1] - 0.0025).abs() < 1e-15);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!(SweepSpec::new(SweepParam::R1, 0.3, 0.3, 5).validate().is_err());
        assert!(SweepSpec::new(SweepParam::R1, 0.0, 0.3, 1).validate().is_err());
    }

    fn short() -> AttractorSpec {
        AttractorSpec {
            transient: 3650.0,
            window: 3650.0,
            lyapunov: LyapunovSpec {
                discard: 365.0,
                horizon: 3650.0,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    #[test]
    fn fixed_point_at_reference() {
        let a = classify_attractor(
            &ModelParameters::default(),
            &DEFAULT_X0,
            &IntegrationSettings::default(),
            &short(),
        )
        .unwrap();
        assert_eq!(a.summary.classification, Classification::FixedPoint);
        assert!(a.summary.lle < 0.0);
        assert_eq!(a.summary.strobe_period, Some(1));
    }

    #[test]
    fn seasonal_cycle_is_periodic() {
        let p = ModelParameters::default().with_r1(0.05);
        let a = classify_attractor(&p, &DEFAULT_X0, &IntegrationSettings::default(), &short())
            .unwrap();
        assert!(matches!(a.summary.classification, Classification::Periodic(_)));
        assert!(a.summary.lle < 0.0);
    }

    #[test]
    fn small_sweep_deterministic_and_ordered() {
        let sp = SweepSpec {
            continuation: false,
            ..SweepSpec::new(SweepParam::R1, 0.0, 0.1, 3)
        };
        let s = IntegrationSettings::default();
        let a = sweep(&ModelParameters::default(), &DEFAULT_X0, &s, &sp, &short()).unwrap();
        let b = sweep(&ModelParameters::default(), &DEFAULT_X0, &s, &sp, &short()).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            a.points.iter().map(|p| p.param_value).collect::<Vec<_>>(),
            a.grid
        );
    }

    #[test]
    fn sweep_records_point_failures() {
        let sp = SweepSpec::new(SweepParam::R1, 0.5, 1.5, 3);
        let r = sweep(
            &ModelParameters::default(),
            &DEFAULT_X0,
            &IntegrationSettings::default(),
            &sp,
            &short(),
        )
        .unwrap();
        assert!(r.points[0].error.is_none());
        assert!(r.points[2].error.is_some());
    }

    proptest! {
        #[test]
        fn maxima_dominate_neighbours(v in prop::collection::vec(-10.0..10.0f64, 3..200)) {
            let t: Vec<f64> = (0..v.len()).map(|i| i as f64).collect();
            let (mx, mn) = extrema_of(&t, &v);
            for m in &mx {
                let i = m.t.round() as usize;
                let lo = i.saturating_sub(1);
                let hi = (i + 1).min(v.len() - 1);
                prop_assert!((lo..=hi).all(|j| m.value >= v[j] - 1e-12));
            }
            for m in &mn {
                let i = m.t.round() as usize;
                let lo = i.saturating_sub(1);
                let hi = (i + 1).min(v.len() - 1);
                prop_assert!((lo..=hi).all(|j| m.value <= v[j] + 1e-12));
            }
            prop_assert!(mx.windows(2).all(|w| w[1].t > w[0].t));
        }
    }
}
