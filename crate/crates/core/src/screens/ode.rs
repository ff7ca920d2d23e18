//! Dormand–Prince 5(4) with step rejection and Hairer's continuous extension.

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Continuous extension of one accepted step.
#[derive(Clone, Debug)]
pub struct DenseSegment {
    pub t0: f64,
    pub h: f64,
    r: [Vec<f64>; 5],
}

impl DenseSegment {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        (0..self.r[0].len())
            .map(|i| {
                self.r[0][i]
                    + th * (self.r[1][i] + th1 * (self.r[2][i] + th * (self.r[3][i] + th1 * self.r[4][i])))
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub initial_step: Option<f64>,
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        OdeOptions { rtol: tol, atol: tol, max_steps: 2_000_000, initial_step: None }
    }
}

#[derive(Clone, Debug)]
pub struct OdeSolution {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub segments: Vec<DenseSegment>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum OdeStop {
    /// The step size fell below the floating-point resolution at `t`.
    StepUnderflow(f64),
    /// The right-hand side or the post-step hook rejected the state at `t`.
    Rejected(f64),
    TooManySteps(f64),
}

/// Integrates `y' = rhs(t, y)` from `t0` to `t1 > t0`.
///
/// `post_step` runs after every accepted step and may modify the state (for
/// projection onto a constraint manifold); returning `false` stops the
/// integration. The partial solution is returned alongside any stop reason.
pub fn dopri5<F, P>(
    mut rhs: F,
    y0: &[f64],
    t0: f64,
    t1: f64,
    opts: &OdeOptions,
    mut post_step: P,
) -> (OdeSolution, Option<OdeStop>)
where
    F: FnMut(f64, &[f64], &mut [f64]) -> bool,
    P: FnMut(f64, &mut [f64]) -> bool,
{
    let n = y0.len();
    let mut sol = OdeSolution { times: vec![t0], states: vec![y0.to_vec()], segments: Vec::new() };
    if t1 <= t0 {
        return (sol, None);
    }
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k = vec![vec![0.0; n]; 7];
    if !rhs(t, &y, &mut k[0]) {
        return (sol, Some(OdeStop::Rejected(t)));
    }
    let span = t1 - t0;
    let mut h = opts.initial_step.unwrap_or_else(|| {
        let sc: f64 = y.iter().map(|v| opts.atol + opts.rtol * v.abs()).fold(f64::INFINITY, f64::min);
        let fnorm = k[0].iter().map(|v| v.abs()).fold(0.0, f64::max);
        let guess = if fnorm > 0.0 { 0.01 * (y.iter().map(|v| v.abs()).fold(0.0, f64::max) + sc) / fnorm } else { 1e-3 };
        guess.clamp(1e-8 * span, 0.1 * span)
    });
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut steps = 0usize;
    let mut last_rejected = false;
    while t < t1 {
        if steps >= opts.max_steps {
            return (sol, Some(OdeStop::TooManySteps(t)));
        }
        steps += 1;
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            return (sol, Some(OdeStop::StepUnderflow(t)));
        }
        let mut ok = true;
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += h * A[s][j] * kj[i];
                }
                ytmp[i] = acc;
            }
            let (_, tail) = k.split_at_mut(s);
            if !rhs(t + C[s] * h, &ytmp, &mut tail[0]) {
                ok = false;
                break;
            }
            if s == 6 {
                ynew.copy_from_slice(&ytmp);
            }
        }
        let err = if ok {
            let mut acc = 0.0;
            for i in 0..n {
                let mut e = 0.0;
                for (j, kj) in k.iter().enumerate() {
                    e += E[j] * kj[i];
                }
                let sc = opts.atol + opts.rtol * y[i].abs().max(ynew[i].abs());
                acc += (h * e / sc).powi(2);
            }
            (acc / n as f64).sqrt()
        } else {
            f64::INFINITY
        };
        if !err.is_finite() || err > 1.0 {
            let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).max(0.2) } else { 0.25 };
            h *= fac;
            last_rejected = true;
            continue;
        }
        // dense output from the unprojected step
        let mut r = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for i in 0..n {
            let ydiff = ynew[i] - y[i];
            let bspl = h * k[0][i] - ydiff;
            r[0][i] = y[i];
            r[1][i] = ydiff;
            r[2][i] = bspl;
            r[3][i] = ydiff - h * k[6][i] - bspl;
            r[4][i] = h * (0..7).map(|j| D[j] * k[j][i]).sum::<f64>();
        }
        sol.segments.push(DenseSegment { t0: t, h, r });
        t = if last { t1 } else { t + h };
        y.copy_from_slice(&ynew);
        let keep_going = post_step(t, &mut y);
        sol.times.push(t);
        sol.states.push(y.clone());
        if !keep_going {
            return (sol, Some(OdeStop::Rejected(t)));
        }
        // FSAL is invalidated by the hook, so re-evaluate
        if !rhs(t, &y, &mut k[0]) {
            return (sol, Some(OdeStop::Rejected(t)));
        }
        let mut fac = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 5.0 };
        fac = fac.clamp(0.2, 5.0);
        if last_rejected {
            fac = fac.min(1.0);
        }
        last_rejected = false;
        h *= fac;
    }
    (sol, None)
}
