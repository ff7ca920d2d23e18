use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::screen::dot;
use super::{Screen, ScreenError};
use crate::exactlin::{Rational, check_dim};
use crate::symbolic::{Poly, RadExpr};

type ForceFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// Central force attached to a point `c` of a reference hyperplane
/// `⟨φ,x⟩ = 1`: on that hyperplane the field is `−k(x−c)|x−c|^{-p}` for the
/// exponent fixed by the variant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CentralSpec {
    pub phi: Vec<Rational>,
    pub center: Vec<Rational>,
    pub strength: Rational,
}

#[derive(Clone)]
pub enum ForceKind {
    Zero,
    /// `−μ(x−c)/|x−c|³` on the reference hyperplane.
    Kepler(CentralSpec),
    /// `−k(x−c)/|x−c|⁴` on the reference hyperplane.
    InverseCube(CentralSpec),
    /// `−k(x−c)` on the reference hyperplane.
    Harmonic(CentralSpec),
    Custom { name: String, f: Arc<ForceFn> },
}

impl fmt::Debug for ForceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ForceKind::Zero => write!(f, "Zero"),
            ForceKind::Kepler(s) => write!(f, "Kepler({s:?})"),
            ForceKind::InverseCube(s) => write!(f, "InverseCube({s:?})"),
            ForceKind::Harmonic(s) => write!(f, "Harmonic({s:?})"),
            ForceKind::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// Serializable description of a builtin force field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ForceSpec {
    Zero { dim: usize },
    Kepler(CentralSpec),
    InverseCube(CentralSpec),
    Harmonic(CentralSpec),
}

/// A projective force field: positively homogeneous of degree −3 on a
/// semi-conic domain, defined up to radial terms.
#[derive(Clone, Debug)]
pub struct ForceField {
    dim: usize,
    kind: ForceKind,
    // float copies of the central parameters: φ, c, k
    cache: Option<(Vec<f64>, Vec<f64>, f64)>,
}

impl ForceField {
    pub fn zero(dim: usize) -> Self {
        ForceField { dim, kind: ForceKind::Zero, cache: None }
    }

    fn central(spec: CentralSpec, wrap: fn(CentralSpec) -> ForceKind) -> Result<Self, ScreenError> {
        let dim = spec.phi.len();
        check_dim(dim, spec.center.len()).map_err(|e| ScreenError::InvalidForce(e.to_string()))?;
        if !crate::exactlin::dot(&spec.phi, &spec.center).is_one() {
            return Err(ScreenError::InvalidForce("center must lie on the reference hyperplane <phi,c> = 1".into()));
        }
        let cache = (
            spec.phi.iter().map(Rational::to_f64).collect(),
            spec.center.iter().map(Rational::to_f64).collect(),
            spec.strength.to_f64(),
        );
        Ok(ForceField { dim, kind: wrap(spec), cache: Some(cache) })
    }

    pub fn kepler(spec: CentralSpec) -> Result<Self, ScreenError> {
        Self::central(spec, ForceKind::Kepler)
    }

    pub fn inverse_cube(spec: CentralSpec) -> Result<Self, ScreenError> {
        Self::central(spec, ForceKind::InverseCube)
    }

    pub fn harmonic(spec: CentralSpec) -> Result<Self, ScreenError> {
        Self::central(spec, ForceKind::Harmonic)
    }

    /// Planar-style Kepler field with center `e_{d-1}` on the flat screen.
    pub fn kepler_flat(dim: usize, mu: Rational) -> Self {
        let e = crate::exactlin::unit(dim, dim - 1);
        Self::kepler(CentralSpec { phi: e.clone(), center: e, strength: mu }).expect("valid center")
    }

    pub fn harmonic_flat(dim: usize, k: Rational) -> Self {
        let e = crate::exactlin::unit(dim, dim - 1);
        Self::harmonic(CentralSpec { phi: e.clone(), center: e, strength: k }).expect("valid center")
    }

    pub fn custom(dim: usize, name: &str, f: Arc<ForceFn>) -> Self {
        ForceField { dim, kind: ForceKind::Custom { name: name.into(), f }, cache: None }
    }

    pub fn from_spec(spec: &ForceSpec) -> Result<Self, ScreenError> {
        match spec {
            ForceSpec::Zero { dim } => Ok(Self::zero(*dim)),
            ForceSpec::Kepler(s) => Self::kepler(s.clone()),
            ForceSpec::InverseCube(s) => Self::inverse_cube(s.clone()),
            ForceSpec::Harmonic(s) => Self::harmonic(s.clone()),
        }
    }

    pub fn to_spec(&self) -> Option<ForceSpec> {
        match &self.kind {
            ForceKind::Zero => Some(ForceSpec::Zero { dim: self.dim }),
            ForceKind::Kepler(s) => Some(ForceSpec::Kepler(s.clone())),
            ForceKind::InverseCube(s) => Some(ForceSpec::InverseCube(s.clone())),
            ForceKind::Harmonic(s) => Some(ForceSpec::Harmonic(s.clone())),
            ForceKind::Custom { .. } => None,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &ForceKind {
        &self.kind
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, ForceKind::Zero)
    }

    /// `f(q)` in floating point.
    pub fn eval(&self, q: &[f64]) -> Vec<f64> {
        match &self.kind {
            ForceKind::Zero => vec![0.0; self.dim],
            ForceKind::Custom { f, .. } => f(q),
            _ => {
                let (phi, c, k) = self.cache.as_ref().expect("central cache");
                let l = dot(phi, q);
                let r: Vec<f64> = q.iter().zip(c).map(|(qi, ci)| qi - ci * l).collect();
                let d = dot(&r, &r);
                let factor = match self.kind {
                    ForceKind::Kepler(_) => -k / (l * d * d.sqrt()),
                    ForceKind::InverseCube(_) => -k / (d * d),
                    ForceKind::Harmonic(_) => -k / (l * l * l * l),
                    _ => unreachable!(),
                };
                r.iter().map(|x| factor * x).collect()
            }
        }
    }

    /// Exact components as radical expressions in the `dim` position
    /// variables, when the field is a builtin.
    pub fn exact(&self) -> Option<Vec<RadExpr>> {
        let d = self.dim;
        let central = |s: &CentralSpec| {
            let l = Poly::linear(d, 0, &s.phi);
            let r: Vec<Poly> = (0..d).map(|i| &Poly::var(d, i) - &l.scale(&s.center[i])).collect();
            let dd = r.iter().fold(Poly::zero(d), |acc, x| &acc + &(x * x));
            (l, r, dd)
        };
        match &self.kind {
            ForceKind::Zero => Some(vec![RadExpr::zero(d); d]),
            ForceKind::Custom { .. } => None,
            ForceKind::Kepler(s) => {
                let (l, r, dd) = central(s);
                let lf = RadExpr::power(Poly::one(d), l, Rational::from_int(-1));
                let df = RadExpr::power(Poly::one(d), dd, Rational::new(-3, 2));
                let base = lf.mul(&df);
                Some(r.iter().map(|ri| base.mul_poly(&ri.scale(&-&s.strength))).collect())
            }
            ForceKind::InverseCube(s) => {
                let (_, r, dd) = central(s);
                let base = RadExpr::power(Poly::one(d), dd, Rational::from_int(-2));
                Some(r.iter().map(|ri| base.mul_poly(&ri.scale(&-&s.strength))).collect())
            }
            ForceKind::Harmonic(s) => {
                let (l, r, _) = central(s);
                let base = RadExpr::power(Poly::one(d), l, Rational::from_int(-4));
                Some(r.iter().map(|ri| base.mul_poly(&ri.scale(&-&s.strength))).collect())
            }
        }
    }

    /// Largest relative violation of `f(λq) = λ⁻³f(q)` at the given points.
    pub fn homogeneity_defect(&self, points: &[Vec<f64>]) -> f64 {
        let mut worst: f64 = 0.0;
        for q in points {
            let f = self.eval(q);
            let scale = f.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1e-300);
            for lambda in [0.5, 2.0, 3.7] {
                let lq: Vec<f64> = q.iter().map(|x| lambda * x).collect();
                let fl = self.eval(&lq);
                for (a, b) in fl.iter().zip(&f) {
                    worst = worst.max((a * lambda.powi(3) - b).abs() / scale);
                }
            }
        }
        worst
    }
}

/// `f(q) = h(q)⁻³ f_H(q/h(q))`: the projective field of a force given on a screen.
pub fn homogenize_force(f_h: Arc<ForceFn>, h: &Screen) -> ForceField {
    let screen = h.clone();
    let dim = h.dim();
    let f = move |q: &[f64]| -> Vec<f64> {
        if !screen.in_domain(q) {
            return vec![f64::NAN; q.len()];
        }
        let hv = screen.value_unchecked(q);
        let x: Vec<f64> = q.iter().map(|v| v / hv).collect();
        f_h(&x).into_iter().map(|v| v / (hv * hv * hv)).collect()
    };
    ForceField::custom(dim, "homogenized", Arc::new(f))
}

/// `f_h = f − dh(f)q`, the tangent representative of `f` at `q ∈ H`.
pub fn restrict_force(f: &ForceField, h: &Screen, q: &[f64]) -> Result<Vec<f64>, ScreenError> {
    super::require_on_screen(h, q)?;
    let fv = f.eval(q);
    let c = h.dh(q, &fv) / h.dh(q, q);
    Ok(fv.iter().zip(q).map(|(a, b)| a - c * b).collect())
}

/// `λ = −∂²h|_q(q̇,q̇) − dh|_q(f)`, the multiplier of the radial reaction.
pub fn radial_reaction(h: &Screen, q: &[f64], qdot: &[f64], fval: &[f64]) -> Result<f64, ScreenError> {
    super::require_on_screen(h, q)?;
    Ok(radial_reaction_unchecked(h, q, qdot, fval))
}

pub(crate) fn radial_reaction_unchecked(h: &Screen, q: &[f64], qdot: &[f64], fval: &[f64]) -> f64 {
    (-h.hessian_form(q, qdot, qdot) - h.dh(q, fval)) / h.dh(q, q)
}
