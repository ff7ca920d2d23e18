//! Dynamics on screens: the equation `q̈ = f + λq`, its numerical
//! integration with constraint projection, and the extended central
//! projection between screens.

mod force;
pub mod ode;
mod screen;

pub use force::{
    homogenize_force, radial_reaction, restrict_force, CentralSpec, ForceField, ForceKind, ForceSpec,
};
pub use screen::{CustomScreen, FnScreen, QuarticScreen, Screen, ScreenKind, ScreenSpec};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use ode::{dopri5, DenseSegment, OdeOptions, OdeStop};
use screen::dot;

#[derive(Debug, Clone, Error)]
pub enum ScreenError {
    #[error("domain violation: {0}")]
    Domain(String),
    #[error("state is not on the screen (residual {residual:.3e})")]
    NotOnScreen { residual: f64 },
    #[error("point is not visible from the target screen")]
    NotVisible,
    #[error("invalid screen: {0}")]
    InvalidScreen(String),
    #[error("invalid force field: {0}")]
    InvalidForce(String),
    #[error("trajectory left the domain at t = {t}")]
    DomainExit { t: f64, partial: Box<TrajectorySample> },
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64, partial: Box<TrajectorySample> },
    #[error("{0}")]
    Input(String),
}

/// Relative tolerance used when checking that a state lies on `TH`.
pub const ON_SCREEN_TOL: f64 = 1e-8;

pub(crate) fn require_on_screen(h: &Screen, q: &[f64]) -> Result<(), ScreenError> {
    let r = (h.value(q)? - 1.0).abs();
    if r > ON_SCREEN_TOL {
        return Err(ScreenError::NotOnScreen { residual: r });
    }
    Ok(())
}

fn require_tangent(h: &Screen, q: &[f64], v: &[f64]) -> Result<(), ScreenError> {
    require_on_screen(h, q)?;
    let scale = 1.0 + v.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let r = h.dh(q, v).abs() / scale;
    if r > ON_SCREEN_TOL {
        return Err(ScreenError::NotOnScreen { residual: r });
    }
    Ok(())
}

/// Samples of a motion on a screen; states are `(q, q̇)`.
#[derive(Clone, Debug)]
pub struct TrajectorySample {
    pub screen: Screen,
    pub times: Vec<f64>,
    pub states: Vec<(Vec<f64>, Vec<f64>)>,
    /// Continuous extension between consecutive samples, when available.
    pub segments: Vec<DenseSegment>,
}

impl TrajectorySample {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest `|h(q)−1|` and `|dh(q̇)|` over the samples.
    pub fn max_constraint_drift(&self) -> f64 {
        self.states
            .iter()
            .map(|(q, v)| match self.screen.constraint_residual(q, v) {
                Ok((a, b)) => a.max(b),
                Err(_) => f64::INFINITY,
            })
            .fold(0.0, f64::max)
    }

    /// Position at time `t` from the continuous extension.
    pub fn position_at(&self, t: f64) -> Option<Vec<f64>> {
        let d = self.screen.dim();
        let seg = self.segments.iter().find(|s| t >= s.t0 && t <= s.t1())?;
        Some(seg.eval(t)[..d].to_vec())
    }
}

fn split_state(y: &[f64], d: usize) -> (Vec<f64>, Vec<f64>) {
    (y[..d].to_vec(), y[d..].to_vec())
}

/// Integrates `q̈ = f(q) + λ(q,q̇)q` on the screen `h` with adaptive
/// Dormand–Prince steps, re-imposing `h(q) = 1`, `dh(q̇) = 0` after each
/// accepted step.
pub fn integrate(
    h: &Screen,
    f: &ForceField,
    q0: &[f64],
    v0: &[f64],
    t_span: (f64, f64),
    tol: f64,
) -> Result<TrajectorySample, ScreenError> {
    let d = h.dim();
    if q0.len() != d || v0.len() != d || f.dim() != d {
        return Err(ScreenError::Input(format!(
            "dimension mismatch: screen {d}, force {}, q0 {}, v0 {}",
            f.dim(),
            q0.len(),
            v0.len()
        )));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(ScreenError::Input(format!("tolerance must be positive, got {tol}")));
    }
    if !(t_span.0.is_finite() && t_span.1.is_finite() && t_span.1 >= t_span.0) {
        return Err(ScreenError::Input(format!("invalid time span {t_span:?}")));
    }
    require_tangent(h, q0, v0)?;
    let mut y0 = q0.to_vec();
    y0.extend_from_slice(v0);
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| -> bool {
        let (q, v) = y.split_at(d);
        if !h.in_domain(q) {
            return false;
        }
        let fv = f.eval(q);
        let lambda = force::radial_reaction_unchecked(h, q, v, &fv);
        if !lambda.is_finite() || fv.iter().any(|x| !x.is_finite()) {
            return false;
        }
        dy[..d].copy_from_slice(v);
        for i in 0..d {
            dy[d + i] = fv[i] + lambda * q[i];
        }
        true
    };
    let post = |_t: f64, y: &mut [f64]| -> bool {
        let (q, v) = y.split_at_mut(d);
        h.project_state(q, v).is_ok()
    };
    let opts = OdeOptions::with_tol(tol);
    let (sol, stop) = dopri5(rhs, &y0, t_span.0, t_span.1, &opts, post);
    let sample = TrajectorySample {
        screen: h.clone(),
        times: sol.times,
        states: sol.states.iter().map(|y| split_state(y, d)).collect(),
        segments: sol.segments,
    };
    match stop {
        None => Ok(sample),
        Some(OdeStop::StepUnderflow(t)) => Err(ScreenError::StepUnderflow { t, partial: Box::new(sample) }),
        Some(OdeStop::Rejected(t)) | Some(OdeStop::TooManySteps(t)) => {
            Err(ScreenError::DomainExit { t, partial: Box::new(sample) })
        }
    }
}

/// The projective impulsion `q∧q̇`, components `i<j` in lexicographic order.
pub fn impulsion(q: &[f64], v: &[f64]) -> Vec<f64> {
    let d = q.len();
    let mut out = Vec::with_capacity(d * (d - 1) / 2);
    for i in 0..d {
        for j in i + 1..d {
            out.push(q[i] * v[j] - q[j] * v[i]);
        }
    }
    out
}

/// Extended central projection of `(q, q̇) ∈ TH` to the screen `k`:
/// `Q = q/k(q)`, `Q′ = k(q)q̇ − dk|_q(q̇)q`, so that `Q∧Q′ = q∧q̇`.
pub fn central_project_state(
    from: &Screen,
    to: &Screen,
    q: &[f64],
    qdot: &[f64],
) -> Result<(Vec<f64>, Vec<f64>), ScreenError> {
    require_tangent(from, q, qdot)?;
    if !to.in_domain(q) {
        return Err(ScreenError::NotVisible);
    }
    let kq = to.value_unchecked(q);
    if kq <= 0.0 {
        return Err(ScreenError::NotVisible);
    }
    let dk = to.dh(q, qdot);
    let big_q = q.iter().map(|x| x / kq).collect();
    let big_v = qdot.iter().zip(q).map(|(v, x)| kq * v - dk * x).collect();
    Ok((big_q, big_v))
}

/// `a = b²`, the factor relating time parameters when a screen is rescaled
/// by `b`.
pub fn change_time_factor(b: f64) -> Result<f64, ScreenError> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(ScreenError::Domain(format!("time factor needs b > 0, got {b}")));
    }
    Ok(b * b)
}

/// Samples projected onto another screen, with the time parameter of the
/// target screen (`ds/dt = k(q)⁻²`).
#[derive(Clone, Debug)]
pub struct ProjectedTrajectory {
    pub sample: TrajectorySample,
    /// Source time at which the motion left the visible region, if it did.
    pub visibility_lost_at: Option<f64>,
}

pub fn project_trajectory(traj: &TrajectorySample, to: &Screen) -> Result<ProjectedTrajectory, ScreenError> {
    let from = &traj.screen;
    if from.dim() != to.dim() {
        return Err(ScreenError::Input("screens have different dimensions".into()));
    }
    let d = from.dim();
    let inv_k2 = |q: &[f64]| {
        let k = to.value_unchecked(q);
        1.0 / (k * k)
    };
    let mut out = TrajectorySample { screen: to.clone(), times: Vec::new(), states: Vec::new(), segments: Vec::new() };
    let mut lost = None;
    let mut s = 0.0;
    for (i, (t, (q, v))) in traj.times.iter().zip(&traj.states).enumerate() {
        match central_project_state(from, to, q, v) {
            Ok(st) => {
                if i > 0 {
                    let t0 = traj.times[i - 1];
                    let q0 = &traj.states[i - 1].0;
                    // Simpson on the continuous extension when present
                    let mid = traj.segments.get(i - 1).filter(|sg| (sg.t0 - t0).abs() <= 1e-12 * t0.abs().max(1.0));
                    s += match mid {
                        Some(sg) => {
                            let qm = sg.eval(t0 + 0.5 * sg.h)[..d].to_vec();
                            (t - t0) / 6.0 * (inv_k2(q0) + 4.0 * inv_k2(&qm) + inv_k2(q))
                        }
                        None => 0.5 * (t - t0) * (inv_k2(q0) + inv_k2(q)),
                    };
                }
                out.times.push(s);
                out.states.push(st);
            }
            Err(ScreenError::NotVisible) => {
                lost = Some(*t);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(ProjectedTrajectory { sample: out, visibility_lost_at: lost })
}

/// Outcome of comparing a projected trajectory with a re-integration on the
/// target screen.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ProjectionReport {
    pub passed: bool,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub samples_compared: usize,
    pub visibility_lost_at: Option<f64>,
    pub reintegration_stopped_at: Option<f64>,
}

/// Projects every sample to `to`, re-integrates on `to` from the projected
/// initial state and measures the largest distance from a projected sample
/// to the re-integrated curve, independently of time parametrization.
pub fn verify_projection(
    traj: &TrajectorySample,
    to: &Screen,
    f: &ForceField,
    tol: f64,
) -> Result<ProjectionReport, ScreenError> {
    let proj = project_trajectory(traj, to)?;
    let p = &proj.sample;
    let mut report = ProjectionReport {
        passed: true,
        max_deviation: 0.0,
        tolerance: tol,
        samples_compared: p.len(),
        visibility_lost_at: proj.visibility_lost_at,
        reintegration_stopped_at: None,
    };
    if p.len() < 2 {
        return Ok(report);
    }
    let s_end = *p.times.last().expect("nonempty");
    let int_tol = (tol * 1e-3).clamp(1e-13, 1e-8);
    let (q0, v0) = &p.states[0];
    let curve = match integrate(to, f, q0, v0, (0.0, s_end * 1.05 + 1e-9), int_tol) {
        Ok(c) => c,
        Err(ScreenError::DomainExit { t, partial }) | Err(ScreenError::StepUnderflow { t, partial }) => {
            report.reintegration_stopped_at = Some(t);
            *partial
        }
        Err(e) => return Err(e),
    };
    let d = to.dim();
    let mut worst: f64 = 0.0;
    for (s, (q, _)) in p.times.iter().zip(&p.states) {
        worst = worst.max(distance_to_curve(&curve, q, *s, d));
    }
    report.max_deviation = worst;
    report.passed = worst <= tol;
    Ok(report)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Distance from `point` to the curve, searching near the parameter `hint`.
fn distance_to_curve(curve: &TrajectorySample, point: &[f64], hint: f64, d: usize) -> f64 {
    let segs = &curve.segments;
    if segs.is_empty() {
        return curve.states.iter().map(|(q, _)| dist(q, point)).fold(f64::INFINITY, f64::min);
    }
    let idx = segs.partition_point(|s| s.t1() < hint).min(segs.len() - 1);
    // nearest sampled node overall guards against a poor hint
    let node = curve
        .states
        .iter()
        .enumerate()
        .min_by(|a, b| dist(&a.1 .0, point).total_cmp(&dist(&b.1 .0, point)))
        .map(|(i, _)| i.min(segs.len() - 1))
        .unwrap_or(idx);
    let mut cands: Vec<usize> = Vec::new();
    for c in [idx, node] {
        for j in c.saturating_sub(2)..=(c + 2).min(segs.len() - 1) {
            if !cands.contains(&j) {
                cands.push(j);
            }
        }
    }
    let mut best = f64::INFINITY;
    for j in cands {
        let seg = &segs[j];
        let g = |t: f64| dist(&seg.eval(t)[..d], point);
        let n = 8;
        let mut bt = seg.t0;
        let mut bv = f64::INFINITY;
        for k in 0..=n {
            let t = seg.t0 + seg.h * k as f64 / n as f64;
            let v = g(t);
            if v < bv {
                bv = v;
                bt = t;
            }
        }
        let step = seg.h / n as f64;
        let (mut a, mut b) = ((bt - step).max(seg.t0), (bt + step).min(seg.t1()));
        let r = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = b - r * (b - a);
        let mut x2 = a + r * (b - a);
        let (mut f1, mut f2) = (g(x1), g(x2));
        for _ in 0..60 {
            if f1 < f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - r * (b - a);
                f1 = g(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + r * (b - a);
                f2 = g(x2);
            }
        }
        best = best.min(bv).min(f1).min(f2);
    }
    best
}

/// Trajectory CSV: a `# screen:` line with the screen spec as JSON, a column
/// header, then one row per sample.
pub fn trajectory_to_csv(traj: &TrajectorySample) -> String {
    let d = traj.screen.dim();
    let spec = match traj.screen.to_spec() {
        Some(s) => serde_json::to_string(&s).expect("spec serializes"),
        None => serde_json::to_string(&traj.screen.describe()).expect("string serializes"),
    };
    let mut out = format!("# screen: {spec}\n");
    let mut cols = vec!["t".to_string()];
    cols.extend((0..d).map(|i| format!("q_{i}")));
    cols.extend((0..d).map(|i| format!("v_{i}")));
    out.push_str(&cols.join(","));
    out.push('\n');
    for (t, (q, v)) in traj.times.iter().zip(&traj.states) {
        let mut row = vec![format!("{t:.16e}")];
        row.extend(q.iter().chain(v).map(|x| format!("{x:.16e}")));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn trajectory_from_csv(text: &str) -> Result<TrajectorySample, ScreenError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines.next().ok_or_else(|| ScreenError::Input("line 1: empty trajectory file".into()))?;
    let spec_text = first
        .strip_prefix("# screen:")
        .ok_or_else(|| ScreenError::Input("line 1: expected '# screen: <spec>' header".into()))?;
    let spec: ScreenSpec = serde_json::from_str(spec_text.trim())
        .map_err(|e| ScreenError::Input(format!("line 1: unreadable screen spec: {e}")))?;
    let screen = Screen::from_spec(&spec).map_err(|e| ScreenError::Input(format!("line 1: {e}")))?;
    let d = screen.dim();
    let (hn, header) = lines.next().ok_or_else(|| ScreenError::Input("line 2: missing column header".into()))?;
    let ncols = header.split(',').count();
    if ncols != 1 + 2 * d {
        return Err(ScreenError::Input(format!("line {}: expected {} columns, found {ncols}", hn + 1, 1 + 2 * d)));
    }
    let mut traj = TrajectorySample { screen, times: Vec::new(), states: Vec::new(), segments: Vec::new() };
    for (n, line) in lines {
        let vals: Result<Vec<f64>, _> = line.split(',').map(|c| c.trim().parse::<f64>()).collect();
        let vals = vals.map_err(|e| ScreenError::Input(format!("line {}: {e}", n + 1)))?;
        if vals.len() != 1 + 2 * d {
            return Err(ScreenError::Input(format!("line {}: expected {} values, found {}", n + 1, 1 + 2 * d, vals.len())));
        }
        traj.times.push(vals[0]);
        traj.states.push((vals[1..=d].to_vec(), vals[d + 1..].to_vec()));
    }
    Ok(traj)
}

/// Scenario file: a screen, a builtin force, an initial state on the screen,
/// a time span and a tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub screen: ScreenSpec,
    pub force: ForceSpec,
    pub q0: Vec<f64>,
    pub v0: Vec<f64>,
    pub t_span: [f64; 2],
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_tol() -> f64 {
    1e-10
}

impl Scenario {
    pub fn run(&self) -> Result<TrajectorySample, ScreenError> {
        let h = Screen::from_spec(&self.screen)?;
        let f = ForceField::from_spec(&self.force)?;
        integrate(&h, &f, &self.q0, &self.v0, (self.t_span[0], self.t_span[1]), self.tol)
    }
}

/// Euclidean norm helper shared by tests and reports.
pub fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}
