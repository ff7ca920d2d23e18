//! Pre-Lagrangians of second-order systems, compatibility of a curvature
//! form with a screen, and the screen finder deciding whether a quadratic
//! first integral is the Hamiltonian for some screen.

mod finder;

pub use finder::{
    compatibility_check, find_compatible_screen, hamiltonian_test, kernel_orthogonality_defect,
    parallel_transport_drift, quotient_form, sample_screen_points, CheckMethod, CheckRecord, CompatibilityReport,
    IncompatibleReason, QuotientForm, ScreenReport, ScreenVerdict, DEFAULT_SAMPLES, SAMPLE_TOL,
};

use thiserror::Error;

use crate::curvclass::CurvError;
use crate::exactlin::{LinError, Rational};
use crate::polyintegrals::{IntegralError, ScreenIntegral};
use crate::screens::ode::{dopri5, OdeOptions};
use crate::screens::ScreenError;
use crate::symbolic::{Poly, RadExpr};

#[derive(Debug, Clone, Error)]
pub enum CompatError {
    #[error("Lagrange equation {0} has a nonzero residual: not a pre-Lagrangian")]
    NotPreLagrangian(usize),
    #[error("T must be quadratic in the velocities and U must depend on position only")]
    NotQuadratic,
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("sample point is off the screen (residual {0:.3e})")]
    OffScreen(f64),
    #[error("the form vanishes identically")]
    ZeroForm,
    #[error("form has a nontrivial kernel of dimension {}", .0.len())]
    NontrivialKernel(Vec<Vec<Rational>>),
    #[error("integration failed: {0}")]
    Integration(String),
    #[error(transparent)]
    Integral(#[from] IntegralError),
    #[error(transparent)]
    Curv(#[from] CurvError),
    #[error(transparent)]
    Screen(#[from] ScreenError),
    #[error(transparent)]
    Lin(#[from] LinError),
}

/// Index of the chart coordinate `x_i` among `(x, y)`.
pub fn xvar(i: usize) -> usize {
    i
}

/// Index of the velocity `y_i = ẋ_i` among the `2n` chart variables.
pub fn yvar(n: usize, i: usize) -> usize {
    n + i
}

/// A second-order system `ẍ = F(x, ẋ)` in a chart with `n` coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChartSystem {
    n: usize,
    accel: Vec<RadExpr>,
}

impl ChartSystem {
    pub fn new(n: usize, accel: Vec<RadExpr>) -> Result<Self, CompatError> {
        if accel.len() != n {
            return Err(LinError::DimMismatch { expected: n, got: accel.len() }.into());
        }
        if let Some(a) = accel.iter().find(|a| a.nvars() != 2 * n) {
            return Err(LinError::DimMismatch { expected: 2 * n, got: a.nvars() }.into());
        }
        Ok(ChartSystem { n, accel })
    }

    pub fn free(n: usize) -> Self {
        ChartSystem { n, accel: vec![RadExpr::zero(2 * n); n] }
    }

    /// `ẍ_i = −x_i`.
    pub fn oscillator(n: usize) -> Self {
        let accel = (0..n).map(|i| RadExpr::from_poly(Poly::var(2 * n, xvar(i)).scale(&Rational::from_int(-1)))).collect();
        ChartSystem { n, accel }
    }

    /// `ẍ = −μx/|x|³`.
    pub fn kepler(n: usize, mu: Rational) -> Self {
        let m = 2 * n;
        let r2 = (0..n).fold(Poly::zero(m), |acc, i| &acc + &Poly::var(m, xvar(i)).pow(2));
        let accel = (0..n)
            .map(|i| RadExpr::power(Poly::var(m, xvar(i)).scale(&-&mu), r2.clone(), Rational::new(-3, 2)))
            .collect();
        ChartSystem { n, accel }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn accel(&self) -> &[RadExpr] {
        &self.accel
    }

    /// `Σ y_i ∂f/∂x_i + Σ F_i ∂f/∂y_i`.
    pub fn total_derivative(&self, f: &RadExpr) -> RadExpr {
        let n = self.n;
        let mut out = RadExpr::zero(2 * n);
        for i in 0..n {
            out = out.add(&f.derivative(xvar(i)).mul_poly(&Poly::var(2 * n, yvar(n, i))));
            out = out.add(&f.derivative(yvar(n, i)).mul(&self.accel[i]));
        }
        out.normalize()
    }

    fn rhs(&self, z: &[f64], out: &mut [f64]) -> bool {
        let n = self.n;
        out[..n].copy_from_slice(&z[n..]);
        for i in 0..n {
            out[n + i] = self.accel[i].eval_f64(z);
        }
        out.iter().all(|x| x.is_finite())
    }
}

/// `Σ y_i ∂L/∂y_i − L`, after checking that `L` is a pre-Lagrangian for the
/// system and that the result is conserved, both exactly.
pub fn energy_integral(l: &RadExpr, sys: &ChartSystem) -> Result<RadExpr, CompatError> {
    let n = sys.n;
    if l.nvars() != 2 * n {
        return Err(LinError::DimMismatch { expected: 2 * n, got: l.nvars() }.into());
    }
    for i in 0..n {
        let p = l.derivative(yvar(n, i));
        let residual = sys.total_derivative(&p).sub(&l.derivative(xvar(i)));
        if !residual.is_zero() {
            return Err(CompatError::NotPreLagrangian(i));
        }
    }
    let mut e = l.scale(&Rational::from_int(-1));
    for i in 0..n {
        e = e.add(&l.derivative(yvar(n, i)).mul_poly(&Poly::var(2 * n, yvar(n, i))));
    }
    let e = e.normalize();
    if !sys.total_derivative(&e).is_zero() {
        return Err(CompatError::Verification("energy is not conserved".into()));
    }
    Ok(e)
}

/// Largest relative change of `f` along the trajectory from `(x0, y0)` over
/// `[0, t1]`, sampled at every accepted step. Relative to `|f(0)|` unless
/// that is below `1e-12`, in which case the change is absolute.
pub fn conservation_drift(
    sys: &ChartSystem,
    f: &RadExpr,
    x0: &[f64],
    y0: &[f64],
    t1: f64,
    tol: f64,
) -> Result<f64, CompatError> {
    let n = sys.n;
    if x0.len() != n || y0.len() != n {
        return Err(LinError::DimMismatch { expected: n, got: x0.len().min(y0.len()) }.into());
    }
    let mut z0 = x0.to_vec();
    z0.extend_from_slice(y0);
    let f0 = f.eval_f64(&z0);
    let denom = if f0.abs() < 1e-12 { 1.0 } else { f0.abs() };
    let mut worst: f64 = 0.0;
    let (_, stop) = dopri5(
        |_, z, out| sys.rhs(z, out),
        &z0,
        0.0,
        t1,
        &OdeOptions::with_tol(tol),
        |_, z| {
            worst = worst.max((f.eval_f64(z) - f0).abs() / denom);
            true
        },
    );
    if let Some(s) = stop {
        return Err(CompatError::Integration(format!("{s:?}")));
    }
    Ok(worst)
}

/// A first integral `G = T − U` with `T` quadratic in the velocities and `U`
/// a function of position, in chart coordinates `(x, y)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticIntegral {
    n: usize,
    t: RadExpr,
    u: RadExpr,
}

impl QuadraticIntegral {
    pub fn new(n: usize, t: RadExpr, u: RadExpr) -> Result<Self, CompatError> {
        for e in [&t, &u] {
            if e.nvars() != 2 * n {
                return Err(LinError::DimMismatch { expected: 2 * n, got: e.nvars() }.into());
            }
        }
        let vel = n..2 * n;
        let base_has_vel = |e: &RadExpr| e.bases().iter().any(|b| b.degrees_in(vel.clone()).iter().any(|&d| d > 0));
        let t = t.normalize();
        let u = u.normalize();
        let t_ok = t.is_zero() || t.degrees_in(vel.clone()) == [2];
        let u_ok = u.is_zero() || u.degrees_in(vel.clone()) == [0];
        if !t_ok || !u_ok || base_has_vel(&t) || base_has_vel(&u) {
            return Err(CompatError::NotQuadratic);
        }
        Ok(QuadraticIntegral { n, t, u })
    }

    /// The oscillator integral `ẋ_i ẋ_j + x_i x_j`.
    pub fn oscillator(n: usize, i: usize, j: usize) -> Self {
        let m = 2 * n;
        let t = &Poly::var(m, yvar(n, i)) * &Poly::var(m, yvar(n, j));
        let u = (&Poly::var(m, xvar(i)) * &Poly::var(m, xvar(j))).scale(&Rational::from_int(-1));
        QuadraticIntegral { n, t: RadExpr::from_poly(t), u: RadExpr::from_poly(u) }
    }

    /// Kepler energy `½|ẋ|² − μ/|x|`.
    pub fn kepler_energy(n: usize, mu: Rational) -> Self {
        let m = 2 * n;
        let half = Rational::new(1, 2);
        let t = (0..n).fold(Poly::zero(m), |acc, i| &acc + &Poly::var(m, yvar(n, i)).pow(2).scale(&half));
        let r2 = (0..n).fold(Poly::zero(m), |acc, i| &acc + &Poly::var(m, xvar(i)).pow(2));
        let u = RadExpr::power(Poly::constant(m, mu), r2, Rational::new(-1, 2));
        QuadraticIntegral { n, t: RadExpr::from_poly(t), u }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> &RadExpr {
        &self.t
    }

    pub fn u(&self) -> &RadExpr {
        &self.u
    }

    pub fn g(&self) -> RadExpr {
        self.t.sub(&self.u).normalize()
    }

    pub fn lagrangian(&self) -> RadExpr {
        self.t.add(&self.u).normalize()
    }

    /// `p_i = ∂L/∂y_i`.
    pub fn momenta(&self) -> Vec<RadExpr> {
        let l = self.lagrangian();
        (0..self.n).map(|i| l.derivative(yvar(self.n, i)).normalize()).collect()
    }

    pub fn is_first_integral(&self, sys: &ChartSystem) -> bool {
        sys.n == self.n && sys.total_derivative(&self.g()).is_zero()
    }

    pub fn energy(&self, sys: &ChartSystem) -> Result<RadExpr, CompatError> {
        energy_integral(&self.lagrangian(), sys)
    }

    /// `T` on the flat screen `x_n = 1` of an `(n+1)`-dimensional space, in
    /// the ambient coordinates `(q, v)`.
    pub fn leading_term_flat(&self) -> Result<ScreenIntegral, CompatError> {
        let n = self.n;
        let dim = n + 1;
        let map: Vec<usize> = (0..n).chain(dim..dim + n).collect();
        Ok(ScreenIntegral::new(dim, self.t.remap(2 * dim, &map))?)
    }
}

/// Outcome of the presymplectic test for `G`: the one-form
/// `σ = Σ(ṗ_i − ∂G/∂x_i)dx_i` with `p_i = ∂G/∂y_i`.
#[derive(Clone, Debug)]
pub struct PresymplecticResult {
    pub sigma: Vec<RadExpr>,
    pub velocity_independent: bool,
    pub closed: bool,
    /// `U` with `dU = σ`, so that `ṗ_i = ∂(G+U)/∂x_i`.
    pub potential: Option<RadExpr>,
}

impl PresymplecticResult {
    pub fn preserved(&self) -> bool {
        self.velocity_independent && self.closed
    }
}

pub fn presymplectic_check(g: &RadExpr, sys: &ChartSystem) -> Result<PresymplecticResult, CompatError> {
    let n = sys.n;
    if g.nvars() != 2 * n {
        return Err(LinError::DimMismatch { expected: 2 * n, got: g.nvars() }.into());
    }
    let sigma: Vec<RadExpr> = (0..n)
        .map(|i| sys.total_derivative(&g.derivative(yvar(n, i))).sub(&g.derivative(xvar(i))).normalize())
        .collect();
    let vel = n..2 * n;
    let velocity_independent = sigma.iter().all(|s| {
        s.degrees_in(vel.clone()).iter().all(|&d| d == 0)
            && s.bases().iter().all(|b| b.degrees_in(vel.clone()).iter().all(|&d| d == 0))
    });
    let mut closed = velocity_independent;
    if closed {
        'outer: for i in 0..n {
            for j in i + 1..n {
                if !sigma[i].derivative(xvar(j)).sub(&sigma[j].derivative(xvar(i))).is_zero() {
                    closed = false;
                    break 'outer;
                }
            }
        }
    }
    let potential = if closed { Some(potential_of(&sigma, n)?) } else { None };
    Ok(PresymplecticResult { sigma, velocity_independent, closed, potential })
}

/// Integrates a closed form with homogeneous pieces: each piece of degree
/// `k ≠ −1` contributes `Σ x_i σ_i / (k+1)`. The result is checked exactly.
fn potential_of(sigma: &[RadExpr], n: usize) -> Result<RadExpr, CompatError> {
    let m = 2 * n;
    let pos = 0..n;
    let mut u = RadExpr::zero(m);
    for (i, s) in sigma.iter().enumerate() {
        let base_deg: Vec<Rational> = s
            .bases()
            .iter()
            .map(|b| {
                b.homogeneous_degree_in(pos.clone())
                    .map(|d| Rational::from_int(d as i64))
                    .ok_or_else(|| CompatError::Unsupported("non-homogeneous radical base".into()))
            })
            .collect::<Result<_, _>>()?;
        for (e, p) in s.terms() {
            let mut factor = RadExpr::constant(m, Rational::one());
            let mut shift = Rational::zero();
            for (k, ex) in e.iter().enumerate() {
                if ex.is_zero() {
                    continue;
                }
                factor = factor.mul(&RadExpr::power(Poly::one(m), s.bases()[k].clone(), ex.clone()));
                shift += ex * &base_deg[k];
            }
            for d in p.degrees_in(pos.clone()) {
                let k = &Rational::from_int(d as i64) + &shift;
                let k1 = &k + &Rational::one();
                let inv = k1
                    .recip()
                    .ok_or_else(|| CompatError::Unsupported("component of degree -1 has a logarithmic potential".into()))?;
                let piece = &p.part_of_degree_in(pos.clone(), d) * &Poly::var(m, xvar(i));
                u = u.add(&factor.mul_poly(&piece).scale(&inv));
            }
        }
    }
    let u = u.normalize();
    for (i, s) in sigma.iter().enumerate() {
        if !u.derivative(xvar(i)).sub(s).is_zero() {
            return Err(CompatError::Verification("recovered potential does not integrate σ".into()));
        }
    }
    Ok(u)
}

#[cfg(test)]
mod tests;
