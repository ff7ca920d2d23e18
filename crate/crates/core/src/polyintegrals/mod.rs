//! First integrals polynomial in the velocities: homogenization, the
//! time-derivative operator, parity splitting, and the space `P^{b,b}` of
//! integrals of free motion with its polar and antisymmetric forms.

mod bihom;
mod reconstruct;

pub use bihom::{
    dim_pbb, exchange_identities_hold, exchange_value, pbb_basis, pbb_rank_polynomial, pbb_rank_tensor,
    polar_form, shear_identities_hold, wedge_matrix, AntisymmetricForm, BiHomogeneousPoly,
};
pub use reconstruct::{reconstruct_polynomial, SampleBox};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactlin::{LinError, Rational};
use crate::screens::{ForceField, Screen, ScreenKind};
use crate::symbolic::{Poly, RadExpr};
use crate::young::YoungError;

#[derive(Debug, Clone, Error)]
pub enum IntegralError {
    #[error("not invariant under v -> v + γq")]
    NotShearInvariant,
    #[error("not invariant under (q, v) -> (λq, v/λ)")]
    NotScaleInvariant,
    #[error("force field is not positively homogeneous of degree -3")]
    ForceNotHomogeneous,
    #[error("force field has no exact representation")]
    ForceNotExact,
    #[error("not bi-homogeneous of equal degrees: {0}")]
    NotBiHomogeneous(String),
    #[error("polar form does not vanish when symmetrized over the first b+1 slots")]
    NotFreeMotionIntegral,
    #[error("time derivative does not vanish: not a first integral")]
    NotFirstIntegral,
    #[error("outside the domain: {0}")]
    Domain(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("sample points not in general position after {0} attempts")]
    GeneralPosition(usize),
    #[error("oracle disagrees with its interpolant: not polynomial of the stated degrees")]
    NotPolynomial,
    #[error("verification failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Lin(#[from] LinError),
    #[error(transparent)]
    Young(#[from] YoungError),
}

/// Index of `q_i` among the `2·dim` phase variables `(q, v)`.
pub fn qvar(i: usize) -> usize {
    i
}

/// Index of `v_i` among the `2·dim` phase variables `(q, v)`.
pub fn vvar(dim: usize, i: usize) -> usize {
    dim + i
}

/// A function on the tangent bundle of a screen, written in ambient
/// coordinates `(x, v)` (`2·dim` variables, `x` first).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScreenIntegral {
    pub dim: usize,
    pub expr: RadExpr,
}

impl ScreenIntegral {
    pub fn new(dim: usize, expr: RadExpr) -> Result<Self, IntegralError> {
        if expr.nvars() != 2 * dim {
            return Err(LinError::DimMismatch { expected: 2 * dim, got: expr.nvars() }.into());
        }
        Ok(ScreenIntegral { dim, expr })
    }

    pub fn from_poly(dim: usize, p: Poly) -> Result<Self, IntegralError> {
        Self::new(dim, RadExpr::from_poly(p))
    }

    pub fn eval_f64(&self, x: &[f64], v: &[f64]) -> f64 {
        let mut z = x.to_vec();
        z.extend_from_slice(v);
        self.expr.eval_f64(&z)
    }

    /// `½Σ_{i<dim-1} v_i² − μ/|x − e_{dim-1}|` on the flat screen `x_{dim-1} = 1`.
    pub fn kepler_energy_flat(dim: usize, mu: Rational) -> Self {
        let n = 2 * dim;
        let mut kin = Poly::zero(n);
        let mut r2 = Poly::zero(n);
        for i in 0..dim - 1 {
            kin = &kin + &Poly::var(n, vvar(dim, i)).pow(2).scale(&Rational::new(1, 2));
            r2 = &r2 + &Poly::var(n, qvar(i)).pow(2);
        }
        let pot = RadExpr::power(Poly::constant(n, -mu), r2, Rational::new(-1, 2));
        ScreenIntegral { dim, expr: RadExpr::from_poly(kin).add(&pot) }
    }

    /// `x_i v_j − x_j v_i`.
    pub fn angular_momentum(dim: usize, i: usize, j: usize) -> Self {
        let n = 2 * dim;
        let p = &(&Poly::var(n, qvar(i)) * &Poly::var(n, vvar(dim, j))) - &(&Poly::var(n, qvar(j)) * &Poly::var(n, vvar(dim, i)));
        ScreenIntegral { dim, expr: RadExpr::from_poly(p) }
    }
}

/// A homogenized integral: exact for hyperplane and quadric screens, numeric
/// otherwise.
#[derive(Clone, Debug)]
pub struct HomogenizedIntegral {
    source: ScreenIntegral,
    screen: Screen,
    exact: Option<RadExpr>,
}

impl HomogenizedIntegral {
    pub fn exact(&self) -> Option<&RadExpr> {
        self.exact.as_ref()
    }

    pub fn screen(&self) -> &Screen {
        &self.screen
    }

    /// `G(q, v) = G_H(q/h(q), ⟨dh,q⟩v − ⟨dh,v⟩q)`.
    pub fn eval_f64(&self, q: &[f64], v: &[f64]) -> Result<f64, IntegralError> {
        let h = self.screen.value(q).map_err(|e| IntegralError::Domain(e.to_string()))?;
        if h <= 0.0 {
            return Err(IntegralError::Domain("h(q) <= 0".into()));
        }
        let x: Vec<f64> = q.iter().map(|a| a / h).collect();
        let dq = self.screen.dh(q, q);
        let dv = self.screen.dh(q, v);
        let w: Vec<f64> = v.iter().zip(q).map(|(a, b)| dq * a - dv * b).collect();
        Ok(self.source.eval_f64(&x, &w))
    }
}

/// Homogenization of `b` with respect to a degree-one factor: returns
/// `Σ c_α x^α · f^{(d−|α|)/k}` where `f = base^k`, for `b` of degree `d`.
fn homogenize_base(b: &Poly, dim: usize, factor: &Poly, root: u32) -> Result<(Poly, u32), IntegralError> {
    let range = 0..dim;
    if b.degrees_in(dim..2 * dim).iter().any(|&d| d > 0) {
        return Err(IntegralError::Unsupported("radical bases may depend on position only".into()));
    }
    let d = b.degrees_in(range.clone()).last().copied().unwrap_or(0);
    let mut out = Poly::zero(b.nvars());
    for k in b.degrees_in(range.clone()) {
        let gap = d - k;
        if gap % root != 0 {
            return Err(IntegralError::Unsupported("base has mixed-parity degrees on a quadric screen".into()));
        }
        out = &out + &(&b.part_of_degree_in(range.clone(), k) * &factor.pow(gap / root));
    }
    Ok((out, d))
}

/// Homogenizes an integral given on the screen `h`.
pub fn homogenize_integral(g: &ScreenIntegral, h: &Screen) -> Result<HomogenizedIntegral, IntegralError> {
    let dim = g.dim;
    if h.dim() != dim {
        return Err(LinError::DimMismatch { expected: dim, got: h.dim() }.into());
    }
    let n = 2 * dim;
    let exact = match h.kind() {
        ScreenKind::Linear(phi) => {
            let l = Poly::linear(n, 0, phi);
            let lv = Poly::linear(n, dim, phi);
            // x_i → q_i / L and v_j → L v_j − ⟨φ,v⟩ q_j
            let mut subst: Vec<Poly> = (0..dim).map(|i| Poly::var(n, qvar(i))).collect();
            subst.extend((0..dim).map(|j| &(&l * &Poly::var(n, vvar(dim, j))) - &(&lv * &Poly::var(n, qvar(j)))));
            let coeff_map = |p: &Poly| {
                let mut acc = RadExpr::zero(n);
                for k in p.degrees_in(0..dim) {
                    let part = p.part_of_degree_in(0..dim, k).compose(&subst);
                    acc = acc.add(&RadExpr::power(part, l.clone(), Rational::from_int(-(k as i64))));
                }
                acc
            };
            let mut new_bases = Vec::new();
            let mut shift = Vec::new();
            for b in g.expr.bases() {
                let (bh, d) = homogenize_base(b, dim, &l, 1)?;
                new_bases.push(bh);
                shift.push(vec![Rational::from_int(-(d as i64))]);
            }
            Some(g.expr.rebase(coeff_map, &new_bases, std::slice::from_ref(&l), &shift).normalize())
        }
        ScreenKind::QuadraticRoot(gm) => {
            let gq = Poly::bilinear(n, gm, 0, 0);
            let gqv = Poly::bilinear(n, gm, 0, dim);
            // x_i → q_i g^{-1/2} and v_j → (g v_j − ⟨Gq,v⟩ q_j) g^{-1/2}
            let mut subst: Vec<Poly> = (0..dim).map(|i| Poly::var(n, qvar(i))).collect();
            subst.extend((0..dim).map(|j| &(&gq * &Poly::var(n, vvar(dim, j))) - &(&gqv * &Poly::var(n, qvar(j)))));
            let coeff_map = |p: &Poly| {
                let mut acc = RadExpr::zero(n);
                for (e, c) in p.terms() {
                    let k: u32 = e.iter().sum();
                    let mono = Poly::monomial(n, e.clone(), c.clone()).compose(&subst);
                    acc = acc.add(&RadExpr::power(mono, gq.clone(), Rational::new(-(k as i64), 2)));
                }
                acc
            };
            let mut new_bases = Vec::new();
            let mut shift = Vec::new();
            for b in g.expr.bases() {
                let (bh, d) = homogenize_base(b, dim, &gq, 2)?;
                new_bases.push(bh);
                shift.push(vec![Rational::new(-(d as i64), 2)]);
            }
            Some(g.expr.rebase(coeff_map, &new_bases, std::slice::from_ref(&gq), &shift).normalize())
        }
        ScreenKind::Custom(_) => None,
    };
    Ok(HomogenizedIntegral { source: g.clone(), screen: h.clone(), exact })
}

/// Checks invariance under `v → v + γq` and `(q,v) → (λq, v/λ)`, exactly.
pub fn check_projective_invariance(g: &RadExpr, dim: usize) -> Result<(), IntegralError> {
    if g.nvars() != 2 * dim {
        return Err(LinError::DimMismatch { expected: 2 * dim, got: g.nvars() }.into());
    }
    let n = 2 * dim;
    let qs: Vec<Poly> = (0..dim).map(|i| Poly::var(n, qvar(i))).collect();
    let vs: Vec<Poly> = (0..dim).map(|i| Poly::var(n, vvar(dim, i))).collect();
    if !g.directional_poly(dim, &qs).is_zero() {
        return Err(IntegralError::NotShearInvariant);
    }
    let euler = g.directional_poly(0, &qs).sub(&g.directional_poly(dim, &vs));
    if !euler.is_zero() {
        return Err(IntegralError::NotScaleInvariant);
    }
    Ok(())
}

/// Checks that every component is positively homogeneous of degree −3.
pub fn check_force_homogeneity(f: &[RadExpr]) -> Result<(), IntegralError> {
    for fj in f {
        let d = fj.nvars();
        let qs: Vec<Poly> = (0..d).map(|i| Poly::var(d, i)).collect();
        let e = fj.directional_poly(0, &qs).add(&fj.scale(&Rational::from_int(3)));
        if !e.is_zero() {
            return Err(IntegralError::ForceNotHomogeneous);
        }
    }
    Ok(())
}

/// `Ġ = ⟨∂G/∂q, v⟩ + ⟨∂G/∂v, f⟩` for a projectively invariant `G` in the
/// `2·dim` phase variables and a degree −3 field `f` in the `dim` position
/// variables (an empty slice means free motion).
pub fn gdot(g: &RadExpr, dim: usize, f: &[RadExpr]) -> Result<RadExpr, IntegralError> {
    check_projective_invariance(g, dim)?;
    if !f.is_empty() && f.len() != dim {
        return Err(LinError::DimMismatch { expected: dim, got: f.len() }.into());
    }
    check_force_homogeneity(f)?;
    Ok(gdot_unchecked(g, dim, f))
}

fn gdot_unchecked(g: &RadExpr, dim: usize, f: &[RadExpr]) -> RadExpr {
    let n = 2 * dim;
    let vs: Vec<Poly> = (0..dim).map(|i| Poly::var(n, vvar(dim, i))).collect();
    let mut out = g.directional_poly(0, &vs);
    if !f.is_empty() {
        let map: Vec<usize> = (0..dim).collect();
        let lifted: Vec<RadExpr> = f.iter().map(|fj| fj.remap(n, &map)).collect();
        out = out.add(&g.directional(dim, &lifted));
    }
    out.normalize()
}

/// Same as [`gdot`] with the exact components of a builtin field.
pub fn gdot_field(g: &RadExpr, dim: usize, f: &ForceField) -> Result<RadExpr, IntegralError> {
    let comps = f.exact().ok_or(IntegralError::ForceNotExact)?;
    if f.is_zero() {
        return gdot(g, dim, &[]);
    }
    gdot(g, dim, &comps)
}

/// A first integral split into parts homogeneous in the velocities.
#[derive(Clone, Debug)]
pub struct ParityDecomposition {
    /// `(degree in v, part)`, by increasing degree.
    pub components: Vec<(u32, RadExpr)>,
    /// `G_b + G_{b−2} + …` where `b` is the top degree.
    pub leading_parity: RadExpr,
    /// The remaining parts `G_{b−1} + G_{b−3} + …`.
    pub other_parity: RadExpr,
}

impl ParityDecomposition {
    pub fn leading(&self) -> Option<&(u32, RadExpr)> {
        self.components.last()
    }
}

/// Splits a first integral by degree in `v`; each parity class is again a
/// first integral and the top-degree part is an integral of free motion.
pub fn decompose_by_parity(g: &RadExpr, dim: usize, f: &[RadExpr]) -> Result<ParityDecomposition, IntegralError> {
    if !gdot(g, dim, f)?.is_zero() {
        return Err(IntegralError::NotFirstIntegral);
    }
    let vr = dim..2 * dim;
    let degs = g.normalize().degrees_in(vr.clone());
    let components: Vec<(u32, RadExpr)> =
        degs.iter().map(|&d| (d, g.part_of_degree_in(vr.clone(), d).normalize())).collect();
    let top = degs.last().copied().unwrap_or(0);
    let mut lead = RadExpr::zero(2 * dim);
    let mut other = RadExpr::zero(2 * dim);
    for (d, c) in &components {
        if (top - d) % 2 == 0 {
            lead = lead.add(c);
        } else {
            other = other.add(c);
        }
    }
    for part in [&lead, &other] {
        if !gdot_unchecked(part, dim, f).is_zero() {
            return Err(IntegralError::Verification("parity class is not a first integral".into()));
        }
    }
    if let Some((_, gb)) = components.last() {
        if !gdot_unchecked(gb, dim, &[]).is_zero() {
            return Err(IntegralError::Verification("leading term is not an integral of free motion".into()));
        }
    }
    Ok(ParityDecomposition { components, leading_parity: lead.normalize(), other_parity: other.normalize() })
}

/// Polynomial JSON: variable names and sparse terms with `"p/q"` coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolynomialJson {
    pub vars: Vec<String>,
    pub terms: Vec<PolyTermJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyTermJson {
    pub exps: Vec<u32>,
    pub coef: Rational,
}

impl PolynomialJson {
    /// Phase-space naming `q0.., v0..` for `2·dim` variables.
    pub fn phase_vars(dim: usize) -> Vec<String> {
        (0..dim).map(|i| format!("q{i}")).chain((0..dim).map(|i| format!("v{i}"))).collect()
    }

    pub fn from_poly(p: &Poly, vars: Vec<String>) -> Self {
        PolynomialJson {
            vars,
            terms: p.terms().map(|(e, c)| PolyTermJson { exps: e.clone(), coef: c.clone() }).collect(),
        }
    }

    pub fn to_poly(&self) -> Result<Poly, IntegralError> {
        let n = self.vars.len();
        let mut seen = std::collections::BTreeSet::new();
        let mut p = Poly::zero(n);
        for (k, t) in self.terms.iter().enumerate() {
            if t.exps.len() != n {
                return Err(LinError::Parse(format!("term {k}: expected {n} exponents, found {}", t.exps.len())).into());
            }
            if !seen.insert(t.exps.clone()) {
                return Err(LinError::Parse(format!("term {k}: duplicate exponent vector {:?}", t.exps)).into());
            }
            p.add_term(t.exps.clone(), &t.coef);
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests;
