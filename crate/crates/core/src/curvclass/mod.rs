//! Linear maps of bivectors that send decomposable bivectors to decomposable
//! ones, their classification, and curvature-type quadrilinear forms.

mod form;

pub use form::{classify_9_2, kernel_of_form, make_r_from_g, CurvatureForm};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactlin::{combinations, span_rank, unit, LinError, Matrix, Multivector, Rational};
use crate::symbolic::Poly;
use crate::young::YoungError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurvError {
    #[error("map does not preserve decomposable bivectors")]
    NotDecomposablePreserving,
    #[error("the product formula is not well defined on {0}-vectors")]
    NotWellDefined(usize),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("form violates R(u∧v)∧R(u∧v) = 0")]
    ImageNotDecomposable,
    #[error("form has a nontrivial kernel of dimension {}", .0.len())]
    NontrivialKernel(Vec<Vec<Rational>>),
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("not a curvature form: {0}")]
    NotCurvatureForm(String),
    #[error("no case could be verified: {0}")]
    NoCase(String),
    #[error(transparent)]
    Lin(#[from] LinError),
    #[error(transparent)]
    Young(#[from] YoungError),
}

/// A linear map `Λ²V → Λ²W`, as a matrix in the lexicographic bivector
/// bases (`C(dst,2)` rows, `C(src,2)` columns).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BivectorMap {
    src: usize,
    dst: usize,
    matrix: Matrix,
}

fn pairs(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

impl BivectorMap {
    pub fn new(src: usize, dst: usize, matrix: Matrix) -> Result<Self, CurvError> {
        if matrix.rows() != pairs(dst) || matrix.cols() != pairs(src) {
            return Err(CurvError::Precondition(format!(
                "expected a {}x{} matrix, got {}x{}",
                pairs(dst),
                pairs(src),
                matrix.rows(),
                matrix.cols()
            )));
        }
        Ok(BivectorMap { src, dst, matrix })
    }

    /// From the images of the basis bivectors `e_i∧e_j`, `i < j`, in order.
    pub fn from_images(src: usize, images: &[Multivector]) -> Result<Self, CurvError> {
        if images.len() != pairs(src) {
            return Err(LinError::DimMismatch { expected: pairs(src), got: images.len() }.into());
        }
        let dst = images.first().map_or(src, |m| m.dim());
        if images.iter().any(|m| m.grade() != 2 || m.dim() != dst) {
            return Err(CurvError::Precondition("images must be bivectors of one space".into()));
        }
        let cols: Vec<Vec<Rational>> = images.iter().map(|m| m.to_dense()).collect();
        Self::new(src, dst, Matrix::from_cols(&cols, pairs(dst))?)
    }

    pub fn identity(n: usize) -> Self {
        BivectorMap { src: n, dst: n, matrix: Matrix::identity(pairs(n)) }
    }

    /// `B^{∧2}` for `B: V → W` given as a `dst × src` matrix.
    pub fn wedge_square(b: &Matrix) -> Self {
        BivectorMap { src: b.cols(), dst: b.rows(), matrix: b.exterior_power(2) }
    }

    pub fn src(&self) -> usize {
        self.src
    }

    pub fn dst(&self) -> usize {
        self.dst
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// Image of the `k`-th basis bivector.
    pub fn image(&self, k: usize) -> Multivector {
        Multivector::from_dense(self.dst, 2, &self.matrix.col(k)).expect("shape checked")
    }

    fn image_of_pair(&self, i: usize, j: usize) -> Multivector {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        // position of (a, b) in the lexicographic list of pairs
        let k = a * (2 * self.src - a - 1) / 2 + (b - a - 1);
        let img = self.image(k);
        if i < j {
            img
        } else {
            img.scale(&Rational::from_int(-1))
        }
    }

    pub fn apply(&self, pi: &Multivector) -> Result<Multivector, CurvError> {
        if pi.grade() != 2 || pi.dim() != self.src {
            return Err(LinError::DimMismatch { expected: self.src, got: pi.dim() }.into());
        }
        let v = self.matrix.mul_vec(&pi.to_dense())?;
        Ok(Multivector::from_dense(self.dst, 2, &v)?)
    }

    pub fn inverse(&self) -> Option<BivectorMap> {
        let inv = self.matrix.inverse()?;
        Some(BivectorMap { src: self.dst, dst: self.src, matrix: inv })
    }

    fn images(&self) -> Vec<Multivector> {
        (0..pairs(self.src)).map(|k| self.image(k)).collect()
    }

    /// `{"src": n, "dst": m, "matrix": [[...]]}` with `"p/q"` entries; column
    /// `k` is the image of the `k`-th basis bivector.
    pub fn to_json(&self) -> String {
        let js = BivectorMapJson { src: self.src, dst: self.dst, matrix: self.matrix.to_rows() };
        serde_json::to_string_pretty(&js).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, CurvError> {
        let js: BivectorMapJson = serde_json::from_str(text)
            .map_err(|e| LinError::Parse(format!("line {}: {e}", e.line())))?;
        let m = Matrix::from_rows(&js.matrix, pairs(js.src))?;
        BivectorMap::new(js.src, js.dst, m)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BivectorMapJson {
    src: usize,
    dst: usize,
    matrix: Vec<Vec<Rational>>,
}

/// Whether `R(x∧y)∧R(x∧y)` vanishes identically, decided by expanding the
/// 4-form-valued biquadratic polynomial in `(x, y)`.
pub fn preserves_decomposables(r: &BivectorMap) -> bool {
    let (n, m) = (r.src, r.dst);
    if m < 4 || n < 2 {
        return true;
    }
    let nv = 2 * n;
    let pi: Vec<Poly> = combinations(n, 2)
        .iter()
        .map(|p| {
            let (a, b) = (p[0], p[1]);
            &(&Poly::var(nv, a) * &Poly::var(nv, n + b)) - &(&Poly::var(nv, b) * &Poly::var(nv, n + a))
        })
        .collect();
    let dst_pairs = combinations(m, 2);
    let omega: Vec<Poly> = (0..dst_pairs.len())
        .map(|k| {
            pi.iter()
                .enumerate()
                .filter(|(j, _)| !r.matrix[(k, *j)].is_zero())
                .fold(Poly::zero(nv), |acc, (j, p)| &acc + &p.scale(&r.matrix[(k, j)]))
        })
        .collect();
    let idx = |a: usize, b: usize| dst_pairs.iter().position(|p| p[0] == a && p[1] == b).expect("pair");
    for s in combinations(m, 4) {
        let (a, b, c, d) = (s[0], s[1], s[2], s[3]);
        let w = |x: usize, y: usize| &omega[idx(x, y)];
        let e = &(&(w(a, b) * w(c, d)) - &(w(a, c) * w(b, d))) + &(w(a, d) * w(b, c));
        if !e.is_zero() {
            return false;
        }
    }
    true
}

fn wedge_all(items: &[Multivector], dim: usize) -> Result<Multivector, CurvError> {
    let mut acc = Multivector::scalar(dim, Rational::one());
    for m in items {
        acc = acc.wedge(m)?;
    }
    Ok(acc)
}

/// `R^{(p)}: Λ^{2p}V → Λ^{2p}W` with `R^{(p)}(π_1∧…∧π_p) = R(π_1)∧…∧R(π_p)`,
/// defined on basis `2p`-vectors and checked against the product formula
/// on every multiset of `p` basis bivectors.
pub fn wedge_power_map(r: &BivectorMap, p: usize) -> Result<Matrix, CurvError> {
    let (n, m) = (r.src, r.dst);
    if 2 * p > n.min(m) {
        return Err(CurvError::Precondition(format!("2p = {} exceeds the dimensions", 2 * p)));
    }
    let src_basis = combinations(n, 2 * p);
    let cols: Vec<Vec<Rational>> = src_basis
        .iter()
        .map(|set| {
            let imgs: Vec<Multivector> = set.chunks(2).map(|c| r.image_of_pair(c[0], c[1])).collect();
            wedge_all(&imgs, m).map(|w| w.to_dense())
        })
        .collect::<Result<_, _>>()?;
    let rp = Matrix::from_cols(&cols, combinations(m, 2 * p).len())?;
    let images = r.images();
    let basis2 = combinations(n, 2);
    let mut choice = vec![0usize; p];
    loop {
        let imgs: Vec<Multivector> = choice.iter().map(|&k| images[k].clone()).collect();
        let lhs = wedge_all(&imgs, m)?;
        let pis: Vec<Multivector> = choice.iter().map(|&k| Multivector::basis(n, &basis2[k])).collect();
        let prod = wedge_all(&pis, n)?;
        let rhs = Multivector::from_dense(m, 2 * p, &rp.mul_vec(&prod.to_dense())?)?;
        if lhs != rhs {
            return Err(CurvError::NotWellDefined(2 * p));
        }
        // next non-decreasing choice
        let mut i = p;
        loop {
            if i == 0 {
                return Ok(rp);
            }
            i -= 1;
            if choice[i] + 1 < basis2.len() {
                choice[i] += 1;
                for j in i + 1..p {
                    choice[j] = choice[i];
                }
                break;
            }
        }
    }
}

fn rows_of(m: &Matrix) -> Vec<Vec<Rational>> {
    m.to_rows()
}

/// Outcome of a classification, with exact witnesses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum ClassificationReport {
    /// `R(π)∧φ = 0` for every bivector `π`.
    PhiDegenerate { phi: Vec<Rational> },
    /// `ζ⌟R(π) = 0` for every bivector `π`.
    ZetaDegenerate { zeta: Vec<Rational> },
    /// `R = ε·scale·B^{∧2}`, with the first nonzero entry of `B` equal to 1.
    WedgeSquare { b: Vec<Vec<Rational>>, epsilon: i8, scale: Rational },
    /// `R(π) = μ·⋆(C^{∧2}π)` where `⋆ω = (e_0∧e_1∧e_2∧e_3)⌟ω`; `C` maps into
    /// the dual and has first nonzero entry 1.
    StarWedgeSquare { c: Vec<Vec<Rational>>, mu: Rational },
    /// `R_A(u,v;w,x) = ε·scale·(b(u,w)b(v,x) − b(u,x)b(v,w))`.
    MetricCase { b: Vec<Vec<Rational>>, epsilon: i8, scale: Rational },
    /// `R_A(u,v;w,x) = g̃(φ⌟(u∧v), φ⌟(w∧x))` with `g` written in the listed
    /// basis of `ker φ`.
    FlatCase { phi: Vec<Rational>, kernel_basis: Vec<Vec<Rational>>, g: Vec<Vec<Rational>> },
    Dim2,
}

impl ClassificationReport {
    pub fn tag(&self) -> &'static str {
        match self {
            ClassificationReport::PhiDegenerate { .. } => "phi_degenerate",
            ClassificationReport::ZetaDegenerate { .. } => "zeta_degenerate",
            ClassificationReport::WedgeSquare { .. } => "wedge_square",
            ClassificationReport::StarWedgeSquare { .. } => "star_wedge_square",
            ClassificationReport::MetricCase { .. } => "metric_case",
            ClassificationReport::FlatCase { .. } => "flat_case",
            ClassificationReport::Dim2 => "dim2",
        }
    }

    /// Re-checks the witness of a bivector-map case against `r`.
    pub fn verify_map(&self, r: &BivectorMap) -> Result<bool, CurvError> {
        let n = r.src;
        Ok(match self {
            ClassificationReport::PhiDegenerate { phi } => {
                let f = Multivector::from_vector(phi);
                !f.is_zero() && r.images().iter().map(|im| im.wedge(&f)).collect::<Result<Vec<_>, _>>()?.iter().all(|x| x.is_zero())
            }
            ClassificationReport::ZetaDegenerate { zeta } => {
                zeta.iter().any(|z| !z.is_zero())
                    && r.images().iter().map(|im| im.contract(zeta)).collect::<Result<Vec<_>, _>>()?.iter().all(|x| x.is_zero())
            }
            ClassificationReport::WedgeSquare { b, epsilon, scale } => {
                let bm = Matrix::from_rows(b, n)?;
                let c = scale * &Rational::from_int(*epsilon as i64);
                bm.det() != Rational::zero() && bm.exterior_power(2).scale(&c) == r.matrix
            }
            ClassificationReport::StarWedgeSquare { c, mu } => {
                let cm = Matrix::from_rows(c, n)?;
                n == 4 && cm.det() != Rational::zero() && star_wedge_square(&cm, mu)?.matrix == r.matrix
            }
            _ => false,
        })
    }
}

/// `π ↦ μ·⋆(C^{∧2}π)` in dimension 4.
pub fn star_wedge_square(c: &Matrix, mu: &Rational) -> Result<BivectorMap, CurvError> {
    if c.rows() != 4 || c.cols() != 4 {
        return Err(CurvError::Precondition("the star construction needs dimension 4".into()));
    }
    let vol = Multivector::basis(4, &[0, 1, 2, 3]);
    let c2 = c.exterior_power(2);
    let cols: Vec<Vec<Rational>> = (0..6)
        .map(|k| {
            let form = Multivector::from_dense(4, 2, &c2.col(k))?;
            Ok(vol.interior(&form)?.scale(mu).to_dense())
        })
        .collect::<Result<_, CurvError>>()?;
    BivectorMap::new(4, 4, Matrix::from_cols(&cols, 6)?)
}

/// Covectors `φ` (as vectors of the target) with `R(π)∧φ = 0` for all `π`.
fn phi_kernel(r: &BivectorMap) -> Result<Vec<Vec<Rational>>, CurvError> {
    let m = r.dst;
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for im in r.images() {
        let blocks: Vec<Vec<Rational>> =
            (0..m).map(|k| im.wedge(&Multivector::from_vector(&unit(m, k))).map(|w| w.to_dense())).collect::<Result<_, _>>()?;
        for t in 0..blocks[0].len() {
            rows.push(blocks.iter().map(|b| b[t].clone()).collect());
        }
    }
    Ok(Matrix::from_rows(&rows, m)?.kernel())
}

/// `ζ` with `ζ⌟R(π) = 0` for all `π`.
fn zeta_kernel(r: &BivectorMap) -> Result<Vec<Vec<Rational>>, CurvError> {
    let m = r.dst;
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for im in r.images() {
        let blocks: Vec<Vec<Rational>> =
            (0..m).map(|k| im.contract(&unit(m, k)).map(|w| w.to_dense())).collect::<Result<_, _>>()?;
        for t in 0..m {
            rows.push(blocks.iter().map(|b| b[t].clone()).collect());
        }
    }
    Ok(Matrix::from_rows(&rows, m)?.kernel())
}

fn first_nonzero(v: &[Rational]) -> Option<&Rational> {
    v.iter().find(|x| !x.is_zero())
}

/// Normalizes so the first nonzero entry is 1.
fn normalize_vec(v: &[Rational]) -> Vec<Rational> {
    match first_nonzero(v) {
        Some(t) => {
            let t = t.clone();
            v.iter().map(|x| x / &t).collect()
        }
        None => v.to_vec(),
    }
}

/// `c` with `a = c·b`, if it exists and `b ≠ 0`.
fn ratio(a: &Multivector, b: &Multivector) -> Option<Rational> {
    let (k, bv) = b.terms().next()?;
    let c = &a.get(k) / bv;
    (b.scale(&c) == *a).then_some(c)
}

/// Intersection of subspaces given by spanning lists.
fn intersect(spaces: &[Vec<Vec<Rational>>], dim: usize) -> Result<Vec<Vec<Rational>>, CurvError> {
    let mut ann: Vec<Vec<Rational>> = Vec::new();
    for s in spaces {
        ann.extend(Matrix::from_rows(s, dim)?.kernel());
    }
    Ok(Matrix::from_rows(&ann, dim)?.kernel())
}

/// Recovers columns `w_i = a_i β_i` and `s` with `R(e_i∧e_j) = s·pair(w_i, w_j)`,
/// given the lines `β_i` and the pairing.
fn recover_product(
    r: &BivectorMap,
    atoms: &[Vec<Rational>],
    pair: impl Fn(&[Rational], &[Rational]) -> Result<Multivector, CurvError>,
) -> Result<Option<(Vec<Vec<Rational>>, Rational)>, CurvError> {
    let n = r.src;
    if n < 3 {
        return Ok(None);
    }
    let coef = |i: usize, j: usize| -> Result<Option<Rational>, CurvError> {
        Ok(ratio(&r.image_of_pair(i, j), &pair(&atoms[i], &atoms[j])?).filter(|c| !c.is_zero()))
    };
    let (Some(c01), Some(c02), Some(c12)) = (coef(0, 1)?, coef(0, 2)?, coef(1, 2)?) else {
        return Ok(None);
    };
    let s = &(&c01 * &c02) / &c12;
    let mut cols = vec![atoms[0].clone()];
    for j in 1..n {
        let Some(c0j) = coef(0, j)? else {
            return Ok(None);
        };
        let a = &c0j / &s;
        cols.push(atoms[j].iter().map(|x| x * &a).collect());
    }
    for i in 0..n {
        for j in i + 1..n {
            if r.image_of_pair(i, j) != pair(&cols[i], &cols[j])?.scale(&s) {
                return Ok(None);
            }
        }
    }
    Ok(Some((cols, s)))
}

/// First nonzero entry of a matrix read row by row.
fn first_entry(m: &Matrix) -> Option<Rational> {
    m.to_rows().into_iter().flatten().find(|x| !x.is_zero())
}

fn sign_and_abs(s: &Rational) -> (i8, Rational) {
    if s.is_negative() {
        (-1, -s.clone())
    } else {
        (1, s.clone())
    }
}

/// Case (iii): lines `β_i = ∩_j supp R(e_i∧e_j)` and `R = εB^{∧2}`.
fn try_wedge_square(r: &BivectorMap) -> Result<Option<(Matrix, i8, Rational)>, CurvError> {
    let n = r.src;
    let mut atoms = Vec::with_capacity(n);
    for i in 0..n {
        let mut supports = Vec::new();
        for j in (0..n).filter(|&j| j != i) {
            let im = r.image_of_pair(i, j);
            if im.is_zero() {
                return Ok(None);
            }
            supports.push(im.support()?);
        }
        let line = intersect(&supports, r.dst)?;
        if line.len() != 1 {
            return Ok(None);
        }
        atoms.push(line.into_iter().next().expect("one vector"));
    }
    let Some((cols, s)) = recover_product(r, &atoms, |a, b| {
        Ok(Multivector::from_vector(a).wedge(&Multivector::from_vector(b))?)
    })?
    else {
        return Ok(None);
    };
    let raw = Matrix::from_cols(&cols, r.dst)?;
    let t = first_entry(&raw).expect("nonzero columns");
    let b = raw.scale(&t.recip().expect("nonzero"));
    let (eps, abs) = sign_and_abs(&s);
    let scale = &abs * &(&t * &t);
    if b.exterior_power(2).scale(&(&scale * &Rational::from_int(eps as i64))) != r.matrix || b.det().is_zero() {
        return Ok(None);
    }
    Ok(Some((b, eps, scale)))
}

/// Case (iv), dimension 4: `F_a = Σ_j supp R(e_a∧e_j)` is a hyperplane whose
/// annihilator is the line of `C e_a`.
fn try_star_wedge_square(r: &BivectorMap) -> Result<Option<(Matrix, Rational)>, CurvError> {
    if r.src != 4 || r.dst != 4 {
        return Ok(None);
    }
    let mut atoms = Vec::with_capacity(4);
    for a in 0..4 {
        let mut span = Vec::new();
        for j in (0..4).filter(|&j| j != a) {
            let im = r.image_of_pair(a, j);
            if im.is_zero() {
                return Ok(None);
            }
            span.extend(im.support()?);
        }
        if span_rank(&span, 4) != 3 {
            return Ok(None);
        }
        let ann = Matrix::from_rows(&span, 4)?.kernel();
        atoms.push(ann.into_iter().next().expect("hyperplane annihilator"));
    }
    let vol = Multivector::basis(4, &[0, 1, 2, 3]);
    let Some((cols, s)) = recover_product(r, &atoms, |a, b| {
        let form = Multivector::from_vector(a).wedge(&Multivector::from_vector(b))?;
        Ok(vol.interior(&form)?)
    })?
    else {
        return Ok(None);
    };
    let raw = Matrix::from_cols(&cols, 4)?;
    let t = first_entry(&raw).expect("nonzero columns");
    let c = raw.scale(&t.recip().expect("nonzero"));
    let mu = &s * &(&t * &t);
    if star_wedge_square(&c, &mu)?.matrix != r.matrix || c.det().is_zero() {
        return Ok(None);
    }
    Ok(Some((c, mu)))
}

/// Classifies a decomposability-preserving map between spaces of equal
/// dimension, taking the first case that holds among: a common factor `φ`,
/// a common annihilator `ζ`, `R = εB^{∧2}`, and (dimension 4) `R = μ⋆C^{∧2}`.
pub fn classify_8_1(r: &BivectorMap) -> Result<ClassificationReport, CurvError> {
    if r.src != r.dst {
        return Err(CurvError::Precondition("source and target dimensions differ".into()));
    }
    if !preserves_decomposables(r) {
        return Err(CurvError::NotDecomposablePreserving);
    }
    if let Some(phi) = phi_kernel(r)?.first() {
        return Ok(ClassificationReport::PhiDegenerate { phi: normalize_vec(phi) });
    }
    if let Some(zeta) = zeta_kernel(r)?.first() {
        return Ok(ClassificationReport::ZetaDegenerate { zeta: normalize_vec(zeta) });
    }
    if let Some((b, epsilon, scale)) = try_wedge_square(r)? {
        return Ok(ClassificationReport::WedgeSquare { b: rows_of(&b), epsilon, scale });
    }
    if let Some((c, mu)) = try_star_wedge_square(r)? {
        return Ok(ClassificationReport::StarWedgeSquare { c: rows_of(&c), mu });
    }
    Err(CurvError::NoCase(format!("dimension {}", r.src)))
}

#[cfg(test)]
mod tests;
