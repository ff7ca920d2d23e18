use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::ScreenError;
use crate::exactlin::{Matrix, Rational};
use crate::symbolic::Poly;

/// A screen function given by callables; used for screens that are neither
/// hyperplanes nor quadrics.
pub trait CustomScreen: Send + Sync {
    fn name(&self) -> String;
    fn dim(&self) -> usize;
    fn value(&self, q: &[f64]) -> f64;
    fn gradient(&self, q: &[f64]) -> Vec<f64>;
    fn hessian(&self, q: &[f64]) -> Vec<Vec<f64>>;
    /// Membership in the semi-conic domain; by default `h` finite and positive.
    fn in_domain(&self, q: &[f64]) -> bool {
        let h = self.value(q);
        h.is_finite() && h > 0.0
    }
}

impl fmt::Debug for dyn CustomScreen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CustomScreen({})", self.name())
    }
}

/// `h(q) = (Σ q_i⁴)^{1/4}`, a convex screen that is not a quadric.
#[derive(Clone, Debug)]
pub struct QuarticScreen {
    pub dim: usize,
}

impl CustomScreen for QuarticScreen {
    fn name(&self) -> String {
        "quartic".into()
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, q: &[f64]) -> f64 {
        q.iter().map(|x| x.powi(4)).sum::<f64>().powf(0.25)
    }
    fn gradient(&self, q: &[f64]) -> Vec<f64> {
        let h3 = self.value(q).powi(3);
        q.iter().map(|x| x.powi(3) / h3).collect()
    }
    fn hessian(&self, q: &[f64]) -> Vec<Vec<f64>> {
        let h = self.value(q);
        let h3 = h.powi(3);
        let h7 = h.powi(7);
        (0..q.len())
            .map(|i| {
                (0..q.len())
                    .map(|j| {
                        let d = if i == j { 3.0 * q[i] * q[i] / h3 } else { 0.0 };
                        d - 3.0 * q[i].powi(3) * q[j].powi(3) / h7
                    })
                    .collect()
            })
            .collect()
    }
}

type ScalarFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type VectorFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type MatrixFn = dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync;

/// A custom screen assembled from closures.
#[derive(Clone)]
pub struct FnScreen {
    pub name: String,
    pub dim: usize,
    pub h: Arc<ScalarFn>,
    pub dh: Arc<VectorFn>,
    pub d2h: Arc<MatrixFn>,
}

impl CustomScreen for FnScreen {
    fn name(&self) -> String {
        self.name.clone()
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, q: &[f64]) -> f64 {
        (self.h)(q)
    }
    fn gradient(&self, q: &[f64]) -> Vec<f64> {
        (self.dh)(q)
    }
    fn hessian(&self, q: &[f64]) -> Vec<Vec<f64>> {
        (self.d2h)(q)
    }
}

#[derive(Clone, Debug)]
pub enum ScreenKind {
    /// `h(q) = ⟨φ,q⟩` on the half-space `⟨φ,q⟩ > 0`.
    Linear(Vec<Rational>),
    /// `h(q) = √(qᵀGq)` on the cone `qᵀGq > 0`.
    QuadraticRoot(Matrix),
    Custom(Arc<dyn CustomScreen>),
}

/// A positively homogeneous degree-one function `h` whose level set `h = 1`
/// is the screen.
#[derive(Clone, Debug)]
pub struct Screen {
    kind: ScreenKind,
    dim: usize,
    phi: Vec<f64>,
    g: Vec<Vec<f64>>,
}

/// Serializable description of a screen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScreenSpec {
    Linear { phi: Vec<Rational> },
    Quadratic { g: Vec<Vec<Rational>> },
    Flat { dim: usize },
    Sphere { dim: usize },
    Hyperboloid { dim: usize },
    Quartic { dim: usize },
}

impl Screen {
    pub fn linear(phi: Vec<Rational>) -> Result<Self, ScreenError> {
        if phi.iter().all(Rational::is_zero) {
            return Err(ScreenError::InvalidScreen("zero linear form".into()));
        }
        let dim = phi.len();
        let pf = phi.iter().map(Rational::to_f64).collect();
        Ok(Screen { kind: ScreenKind::Linear(phi), dim, phi: pf, g: Vec::new() })
    }

    pub fn quadratic(g: Matrix) -> Result<Self, ScreenError> {
        if !g.is_square() || !g.is_symmetric() {
            return Err(ScreenError::InvalidScreen("quadratic screen needs a symmetric matrix".into()));
        }
        if g.is_zero() {
            return Err(ScreenError::InvalidScreen("zero quadratic form".into()));
        }
        let dim = g.rows();
        let gf = g.to_rows().iter().map(|r| r.iter().map(Rational::to_f64).collect()).collect();
        Ok(Screen { kind: ScreenKind::QuadraticRoot(g), dim, phi: Vec::new(), g: gf })
    }

    pub fn custom(c: Arc<dyn CustomScreen>) -> Self {
        let dim = c.dim();
        Screen { kind: ScreenKind::Custom(c), dim, phi: Vec::new(), g: Vec::new() }
    }

    /// The hyperplane `q_{d-1} = 1`.
    pub fn flat(dim: usize) -> Self {
        Screen::linear(crate::exactlin::unit(dim, dim - 1)).expect("nonzero form")
    }

    pub fn unit_sphere(dim: usize) -> Self {
        Screen::quadratic(Matrix::identity(dim)).expect("identity is symmetric")
    }

    /// `q_{d-1}² − Σ_{i<d-1} q_i² = 1`.
    pub fn hyperboloid(dim: usize) -> Self {
        let d: Vec<Rational> = (0..dim).map(|i| Rational::from_int(if i + 1 == dim { 1 } else { -1 })).collect();
        Screen::quadratic(Matrix::diag(&d)).expect("diagonal is symmetric")
    }

    pub fn from_spec(spec: &ScreenSpec) -> Result<Self, ScreenError> {
        let check = |d: usize| {
            if d < 2 {
                Err(ScreenError::InvalidScreen(format!("dimension {d} is too small")))
            } else {
                Ok(d)
            }
        };
        match spec {
            ScreenSpec::Linear { phi } => Screen::linear(phi.clone()),
            ScreenSpec::Quadratic { g } => {
                let m = Matrix::from_rows(g, g.len()).map_err(|e| ScreenError::InvalidScreen(e.to_string()))?;
                Screen::quadratic(m)
            }
            ScreenSpec::Flat { dim } => Ok(Screen::flat(check(*dim)?)),
            ScreenSpec::Sphere { dim } => Ok(Screen::unit_sphere(check(*dim)?)),
            ScreenSpec::Hyperboloid { dim } => Ok(Screen::hyperboloid(check(*dim)?)),
            ScreenSpec::Quartic { dim } => Ok(Screen::custom(Arc::new(QuarticScreen { dim: check(*dim)? }))),
        }
    }

    /// Inverse of [`Screen::from_spec`]; only builtin custom screens have a spec.
    pub fn to_spec(&self) -> Option<ScreenSpec> {
        match &self.kind {
            ScreenKind::Linear(phi) => Some(ScreenSpec::Linear { phi: phi.clone() }),
            ScreenKind::QuadraticRoot(g) => Some(ScreenSpec::Quadratic { g: g.to_rows() }),
            ScreenKind::Custom(c) if c.name() == "quartic" => Some(ScreenSpec::Quartic { dim: self.dim }),
            ScreenKind::Custom(_) => None,
        }
    }

    pub fn kind(&self) -> &ScreenKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            ScreenKind::Linear(phi) => {
                let s: Vec<String> = phi.iter().map(|x| x.to_string()).collect();
                format!("linear phi=[{}]", s.join(" "))
            }
            ScreenKind::QuadraticRoot(g) => {
                let rows: Vec<String> = g
                    .to_rows()
                    .iter()
                    .map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "))
                    .collect();
                format!("quadratic g=[{}]", rows.join("; "))
            }
            ScreenKind::Custom(c) => format!("custom {}", c.name()),
        }
    }

    fn quad(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut s = 0.0;
        for (i, row) in self.g.iter().enumerate() {
            for (j, gij) in row.iter().enumerate() {
                s += a[i] * gij * b[j];
            }
        }
        s
    }

    pub fn in_domain(&self, q: &[f64]) -> bool {
        if q.len() != self.dim || q.iter().any(|x| !x.is_finite()) {
            return false;
        }
        match &self.kind {
            ScreenKind::Linear(_) => dot(&self.phi, q) > 0.0,
            ScreenKind::QuadraticRoot(_) => self.quad(q, q) > 0.0,
            ScreenKind::Custom(c) => c.in_domain(q),
        }
    }

    /// `h(q)`, or an error outside the domain.
    pub fn value(&self, q: &[f64]) -> Result<f64, ScreenError> {
        if !self.in_domain(q) {
            return Err(ScreenError::Domain(format!("point {q:?} is outside the screen domain")));
        }
        Ok(self.value_unchecked(q))
    }

    pub(crate) fn value_unchecked(&self, q: &[f64]) -> f64 {
        match &self.kind {
            ScreenKind::Linear(_) => dot(&self.phi, q),
            ScreenKind::QuadraticRoot(_) => self.quad(q, q).sqrt(),
            ScreenKind::Custom(c) => c.value(q),
        }
    }

    pub fn gradient(&self, q: &[f64]) -> Vec<f64> {
        match &self.kind {
            ScreenKind::Linear(_) => self.phi.clone(),
            ScreenKind::QuadraticRoot(_) => {
                let h = self.quad(q, q).sqrt();
                self.g.iter().map(|row| dot(row, q) / h).collect()
            }
            ScreenKind::Custom(c) => c.gradient(q),
        }
    }

    pub fn hessian(&self, q: &[f64]) -> Vec<Vec<f64>> {
        let n = self.dim;
        match &self.kind {
            ScreenKind::Linear(_) => vec![vec![0.0; n]; n],
            ScreenKind::QuadraticRoot(_) => {
                let gq2 = self.quad(q, q);
                let h = gq2.sqrt();
                let gq: Vec<f64> = self.g.iter().map(|row| dot(row, q)).collect();
                (0..n)
                    .map(|i| (0..n).map(|j| self.g[i][j] / h - gq[i] * gq[j] / (gq2 * h)).collect())
                    .collect()
            }
            ScreenKind::Custom(c) => c.hessian(q),
        }
    }

    /// `∂²h|_q(a, b)`.
    pub fn hessian_form(&self, q: &[f64], a: &[f64], b: &[f64]) -> f64 {
        match &self.kind {
            ScreenKind::Linear(_) => 0.0,
            ScreenKind::QuadraticRoot(_) => {
                let gq2 = self.quad(q, q);
                let h = gq2.sqrt();
                (self.quad(a, b) - self.quad(q, a) * self.quad(q, b) / gq2) / h
            }
            ScreenKind::Custom(c) => {
                let hs = c.hessian(q);
                hs.iter().enumerate().map(|(i, row)| a[i] * dot(row, b)).sum()
            }
        }
    }

    /// `⟨dh|_q, w⟩`.
    pub fn dh(&self, q: &[f64], w: &[f64]) -> f64 {
        match &self.kind {
            ScreenKind::Linear(_) => dot(&self.phi, w),
            ScreenKind::QuadraticRoot(_) => self.quad(q, w) / self.quad(q, q).sqrt(),
            ScreenKind::Custom(c) => dot(&c.gradient(q), w),
        }
    }

    /// Pulls `(q, v)` back onto `TH`: rescales `q` to `h = 1` and removes the
    /// component of `v` along `q` that breaks `dh(v) = 0`.
    pub fn project_state(&self, q: &mut [f64], v: &mut [f64]) -> Result<(), ScreenError> {
        let h = self.value(q)?;
        for x in q.iter_mut() {
            *x /= h;
        }
        let c = self.dh(q, v) / self.dh(q, q);
        for (vi, qi) in v.iter_mut().zip(q.iter()) {
            *vi -= c * qi;
        }
        Ok(())
    }

    /// Residuals `(|h(q) − 1|, |dh(v)|)`.
    pub fn constraint_residual(&self, q: &[f64], v: &[f64]) -> Result<(f64, f64), ScreenError> {
        Ok(((self.value(q)? - 1.0).abs(), self.dh(q, v).abs()))
    }

    /// Exact `h` for linear screens and exact `h²` for quadratic ones.
    pub fn exact_value_or_square(&self, q: &[Rational]) -> Option<Rational> {
        match &self.kind {
            ScreenKind::Linear(phi) => Some(crate::exactlin::dot(phi, q)),
            ScreenKind::QuadraticRoot(g) => {
                let gq = g.mul_vec(q).ok()?;
                Some(crate::exactlin::dot(q, &gq))
            }
            ScreenKind::Custom(_) => None,
        }
    }

    /// Polynomial covector field proportional (by a positive factor) to
    /// `dh|_q`, over `nvars` variables whose first `dim` are `q`.
    pub fn differential_direction(&self, nvars: usize) -> Option<Vec<Poly>> {
        match &self.kind {
            ScreenKind::Linear(phi) => Some(phi.iter().map(|c| Poly::constant(nvars, c.clone())).collect()),
            ScreenKind::QuadraticRoot(g) => Some(
                (0..self.dim)
                    .map(|i| {
                        let mut row = vec![Rational::zero(); nvars];
                        row[..self.dim].clone_from_slice(g.row(i));
                        Poly::linear(nvars, 0, &row[..self.dim])
                    })
                    .collect(),
            ),
            ScreenKind::Custom(_) => None,
        }
    }

    /// Spot-checks positive homogeneity and the Euler relation `dh(q)·q = h(q)`
    /// at the given points; returns the largest relative violation.
    pub fn homogeneity_defect(&self, points: &[Vec<f64>]) -> f64 {
        let mut worst: f64 = 0.0;
        for q in points {
            if !self.in_domain(q) {
                continue;
            }
            let h = self.value_unchecked(q);
            for lambda in [0.5, 2.0, 3.7] {
                let lq: Vec<f64> = q.iter().map(|x| lambda * x).collect();
                let hl = self.value_unchecked(&lq);
                worst = worst.max((hl - lambda * h).abs() / (lambda * h.abs()).max(1e-300));
            }
            let euler = dot(&self.gradient(q), q);
            worst = worst.max((euler - h).abs() / h.abs().max(1e-300));
        }
        worst
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
