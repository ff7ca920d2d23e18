use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::One;

use super::{vvar, IntegralError};
use crate::exactlin::{all_words, LinError, Matrix, Rational, Tensor};
use crate::symbolic::Poly;
use crate::young::{antisymmetrize_a, check_im_as, diagonal_polynomial, tensor_rank, YoungTableau};

/// `n(n+1)²(n+2)²⋯(n+b−1)²(n+b) / (b!(b+1)!)`, for a space of dimension `n+1`.
pub fn dim_pbb(n: u64, b: u64) -> BigUint {
    let mut num = BigUint::from(n) * BigUint::from(n + b);
    for k in 1..b {
        let f = BigUint::from(n + k);
        num *= &f * &f;
    }
    let mut den = BigUint::one();
    for k in 1..=b {
        den *= BigUint::from(k) * BigUint::from(k + 1);
    }
    num / den
}

/// Exponent vectors of degree `b` in `d` variables, in lexicographic order.
pub(super) fn monomials(d: usize, b: u32) -> Vec<Vec<u32>> {
    fn rec(d: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() + 1 == d {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in (0..=left).rev() {
            cur.push(k);
            rec(d, left - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if d > 0 {
        rec(d, b, &mut Vec::new(), &mut out);
    }
    out
}

fn factorial(k: u32) -> Rational {
    (1..=k as i64).map(Rational::from_int).product()
}

fn multinomial(alpha: &[u32]) -> Rational {
    let total: u32 = alpha.iter().sum();
    let mut m = factorial(total);
    for &a in alpha {
        m = &m / &factorial(a);
    }
    m
}

fn counts(word: &[usize], dim: usize) -> Vec<u32> {
    let mut c = vec![0u32; dim];
    for &i in word {
        c[i] += 1;
    }
    c
}

/// Degree `b` of a polynomial in `(q, v)` homogeneous of degree `b` in each.
fn bidegree(r: &Poly, dim: usize) -> Result<u32, IntegralError> {
    if r.nvars() != 2 * dim {
        return Err(LinError::DimMismatch { expected: 2 * dim, got: r.nvars() }.into());
    }
    if r.is_zero() {
        return Err(IntegralError::NotBiHomogeneous("zero polynomial has no degree".into()));
    }
    let bq = r.homogeneous_degree_in(0..dim);
    let bv = r.homogeneous_degree_in(dim..2 * dim);
    match (bq, bv) {
        (Some(a), Some(b)) if a == b => Ok(a),
        (Some(a), Some(b)) => Err(IntegralError::NotBiHomogeneous(format!("degrees ({a},{b}) differ"))),
        _ => Err(IntegralError::NotBiHomogeneous("not homogeneous in q or in v".into())),
    }
}

/// The polar form `R_S`: symmetric in the first `b` and in the last `b`
/// slots, with `R(q,v) = R_S(q,…,q; v,…,v)`.
pub fn polar_form(r: &Poly, dim: usize) -> Result<Tensor, IntegralError> {
    let b = bidegree(r, dim)?;
    let mut words: BTreeMap<Vec<u32>, Vec<Vec<usize>>> = BTreeMap::new();
    for w in all_words(dim, b as usize) {
        words.entry(counts(&w, dim)).or_default().push(w);
    }
    let mut t = Tensor::zero(dim, 2 * b as usize);
    for (e, c) in r.terms() {
        let (alpha, beta) = e.split_at(dim);
        let val = c / &(&multinomial(alpha) * &multinomial(beta));
        for wa in &words[alpha] {
            for wb in &words[beta] {
                let mut idx = wa.clone();
                idx.extend_from_slice(wb);
                t.add_entry(idx, &val);
            }
        }
    }
    Ok(t)
}

/// An element of `P^{b,b}` stored through its polar form.
#[derive(Clone, Debug, PartialEq)]
pub struct BiHomogeneousPoly {
    dim: usize,
    degree: usize,
    polar: Tensor,
}

impl BiHomogeneousPoly {
    /// Validates bi-homogeneity and the shear condition, by both routes.
    pub fn from_poly(r: &Poly, dim: usize) -> Result<Self, IntegralError> {
        let polar = polar_form(r, dim)?;
        let degree = polar.order() / 2;
        let out = BiHomogeneousPoly { dim, degree, polar };
        let by_tensor = out.shear_condition_tensor()?;
        let by_poly = shear_poly(r, dim).is_zero();
        if by_tensor != by_poly {
            return Err(IntegralError::Verification("polar and polynomial shear tests disagree".into()));
        }
        if !by_tensor {
            return Err(IntegralError::NotFreeMotionIntegral);
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn polar(&self) -> &Tensor {
        &self.polar
    }

    /// `R(q,v) = R_S(q,…,q; v,…,v)` as a polynomial in the `2·dim` variables.
    pub fn to_poly(&self) -> Poly {
        let n = 2 * self.dim;
        let mut p = Poly::zero(n);
        for (idx, c) in self.polar.entries() {
            let mut e = vec![0u32; n];
            for (slot, &i) in idx.iter().enumerate() {
                let var = if slot < self.degree { i } else { vvar(self.dim, i) };
                e[var] += 1;
            }
            p.add_term(e, c);
        }
        p
    }

    pub fn eval(&self, q: &[Rational], v: &[Rational]) -> Result<Rational, IntegralError> {
        let b = self.degree;
        let mut args: Vec<&[Rational]> = vec![q; b];
        args.extend(std::iter::repeat_n(v, b));
        Ok(self.polar.eval(&args)?)
    }

    /// Symmetrization of `R_S` over the first `b+1` slots vanishes.
    fn shear_condition_tensor(&self) -> Result<bool, IntegralError> {
        let b = self.degree;
        if b == 0 {
            return Ok(true);
        }
        // R_S is symmetric in the first b slots, so the full symmetrization
        // over the first b+1 is proportional to the sum over the coset
        // representatives: the identity and the transpositions (k, b)
        let mut sym = self.polar.clone();
        for k in 0..b {
            sym = sym.add(&self.polar.swap_slots(k, b))?;
        }
        Ok(sym.is_zero())
    }
}

/// `Σ q_i ∂R/∂v_i`.
fn shear_poly(r: &Poly, dim: usize) -> Poly {
    let n = 2 * dim;
    let qs: Vec<Poly> = (0..dim).map(|i| Poly::var(n, i)).collect();
    r.directional(dim, &qs)
}

/// `Σ v_i ∂R/∂q_i`.
fn free_derivative(r: &Poly, dim: usize) -> Poly {
    let n = 2 * dim;
    let vs: Vec<Poly> = (0..dim).map(|i| Poly::var(n, vvar(dim, i))).collect();
    r.directional(0, &vs)
}

/// `R(q, v+γq) = R(q+γv, v) = R(q,v)`, as the vanishing of both
/// infinitesimal generators.
pub fn shear_identities_hold(r: &Poly, dim: usize) -> bool {
    shear_poly(r, dim).is_zero() && free_derivative(r, dim).is_zero()
}

fn swapped(r: &Poly, dim: usize, negate_q: bool) -> Poly {
    let n = 2 * dim;
    let sign = if negate_q { Rational::from_int(-1) } else { Rational::one() };
    let mut subst: Vec<Poly> = (0..dim).map(|i| Poly::var(n, vvar(dim, i))).collect();
    subst.extend((0..dim).map(|i| Poly::var(n, i).scale(&sign)));
    r.compose(&subst)
}

/// `R(q,v) = (−1)^b R(v,q)` and `R(q,v) = R(v,−q)`, as polynomial identities.
pub fn exchange_identities_hold(r: &Poly, dim: usize) -> Result<bool, IntegralError> {
    let b = bidegree(r, dim)?;
    let sign = if b % 2 == 0 { Rational::one() } else { Rational::from_int(-1) };
    let flipped = swapped(r, dim, false).scale(&sign);
    Ok(&flipped == r && &swapped(r, dim, true) == r)
}

/// `(R(q,v), R(v,q))`.
pub fn exchange_value(r: &Poly, q: &[Rational], v: &[Rational]) -> (Rational, Rational) {
    let mut x = q.to_vec();
    x.extend_from_slice(v);
    let mut y = v.to_vec();
    y.extend_from_slice(q);
    (r.eval(&x), r.eval(&y))
}

/// `T(a_0,b_0,a_1,b_1,…) = R_S(a_0,…,a_{b−1}; b_0,…,b_{b−1})`.
fn interleave(polar: &Tensor, b: usize) -> Tensor {
    let mut t = Tensor::zero(polar.dim(), 2 * b);
    for (idx, c) in polar.entries() {
        let mut w = vec![0; 2 * b];
        for k in 0..b {
            w[2 * k] = idx[k];
            w[2 * k + 1] = idx[b + k];
        }
        t.add_entry(w, c);
    }
    t
}

fn pair_tableau(b: usize) -> Result<YoungTableau, IntegralError> {
    Ok(YoungTableau::vertical(&vec![2; b])?)
}

/// The antisymmetric form `R_A`: a tensor of order `2b` in `Im AS` for `b`
/// columns of length two, with `R(q,v) = R_A(q,v; …; q,v)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AntisymmetricForm {
    dim: usize,
    degree: usize,
    tensor: Tensor,
}

impl AntisymmetricForm {
    pub fn from_tensor(tensor: Tensor) -> Result<Self, IntegralError> {
        if !tensor.order().is_multiple_of(2) || tensor.order() == 0 {
            return Err(IntegralError::Verification("order must be positive and even".into()));
        }
        let degree = tensor.order() / 2;
        if !check_im_as(&pair_tableau(degree)?, &tensor)? {
            return Err(IntegralError::Verification("tensor is not in Im AS".into()));
        }
        Ok(AntisymmetricForm { dim: tensor.dim(), degree, tensor })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn tensor(&self) -> &Tensor {
        &self.tensor
    }

    /// `R_A(q,v;…;q,v)` as a polynomial in `(q, v)`.
    pub fn diagonal(&self) -> Result<Poly, IntegralError> {
        let y = pair_tableau(self.degree)?;
        let coeffs = diagonal_polynomial(&y, &self.tensor)?;
        Ok(Poly::from_terms(
            2 * self.dim,
            coeffs.into_iter().map(|(e, c)| (e.into_iter().map(u32::from).collect(), c)),
        ))
    }

    /// `R_B(π_1,…,π_b)` on bivectors given as dense antisymmetric matrices
    /// (`π[i][j] = −π[j][i]`).
    pub fn eval_bivectors(&self, pis: &[Matrix]) -> Result<Rational, IntegralError> {
        if pis.len() != self.degree {
            return Err(LinError::DimMismatch { expected: self.degree, got: pis.len() }.into());
        }
        let mut acc = Rational::zero();
        'outer: for (idx, c) in self.tensor.entries() {
            let mut term = c.clone();
            for (k, pi) in pis.iter().enumerate() {
                let (i, j) = (idx[2 * k], idx[2 * k + 1]);
                if i >= j {
                    continue 'outer;
                }
                let x = &pi[(i, j)];
                if x.is_zero() {
                    continue 'outer;
                }
                term *= x;
            }
            acc += term;
        }
        Ok(acc)
    }
}

/// `q∧v` as a dense antisymmetric matrix.
pub fn wedge_matrix(q: &[Rational], v: &[Rational]) -> Matrix {
    let d = q.len();
    Matrix::from_fn(d, d, |i, j| &(&q[i] * &v[j]) - &(&q[j] * &v[i]))
}

impl BiHomogeneousPoly {
    /// The unique `R_A` with `R_A(q,v;…;q,v) = R(q,v)`: the column
    /// antisymmetrization of the interleaved polar form, normalized by
    /// comparing one coefficient of the diagonal with `R`.
    pub fn to_antisymmetric(&self) -> Result<AntisymmetricForm, IntegralError> {
        let b = self.degree;
        let y = pair_tableau(b)?;
        let raw = antisymmetrize_a(&y, &interleave(&self.polar, b))?;
        let form = AntisymmetricForm { dim: self.dim, degree: b, tensor: raw };
        let r = self.to_poly();
        let diag = form.diagonal()?;
        let (e, c) = r.terms().next().expect("elements of P^{b,b} are nonzero");
        let d = diag.coeff(e);
        if d.is_zero() {
            return Err(IntegralError::NotFreeMotionIntegral);
        }
        let kappa = c / &d;
        let tensor = form.tensor.scale(&kappa);
        let out = AntisymmetricForm { dim: self.dim, degree: b, tensor };
        if out.diagonal()? != r {
            return Err(IntegralError::Verification("diagonal of R_A differs from R".into()));
        }
        if !check_im_as(&y, &out.tensor)? {
            return Err(IntegralError::Verification("R_A is not in Im AS".into()));
        }
        Ok(out)
    }
}

/// A basis of `P^{b,b}` in dimension `dim`: the kernel of `R ↦ Σ q_i ∂R/∂v_i`
/// on bi-homogeneous polynomials of degree `(b,b)`.
pub fn pbb_basis(dim: usize, b: u32) -> Vec<Poly> {
    let n = 2 * dim;
    let mq = monomials(dim, b);
    let source: Vec<Vec<u32>> =
        mq.iter().flat_map(|a| mq.iter().map(move |c| a.iter().chain(c).copied().collect())).collect();
    let mut rows: BTreeMap<Vec<u32>, BTreeMap<usize, Rational>> = BTreeMap::new();
    for (col, e) in source.iter().enumerate() {
        let img = shear_poly(&Poly::monomial(n, e.clone(), Rational::one()), dim);
        for (f, c) in img.terms() {
            rows.entry(f.clone()).or_default().insert(col, c.clone());
        }
    }
    let mut m = Matrix::zeros(rows.len(), source.len());
    for (r, (_, row)) in rows.iter().enumerate() {
        for (c, v) in row {
            m[(r, *c)] = v.clone();
        }
    }
    m.kernel()
        .into_iter()
        .map(|k| Poly::from_terms(n, source.iter().cloned().zip(k)))
        .collect()
}

/// Rank of the constraint system defining `P^{b,b}` on polynomials.
pub fn pbb_rank_polynomial(dim: usize, b: u32) -> usize {
    pbb_basis(dim, b).len()
}

/// Rank of `{A·T}` where `T` runs over the interleaved polar forms of all
/// bi-homogeneous monomials; this spans `Im AS` for `b` columns of length 2.
pub fn pbb_rank_tensor(dim: usize, b: u32) -> Result<usize, IntegralError> {
    let n = 2 * dim;
    let y = pair_tableau(b as usize)?;
    let mq = monomials(dim, b);
    let mut images = Vec::new();
    for a in &mq {
        for c in &mq {
            let e: Vec<u32> = a.iter().chain(c).copied().collect();
            let polar = polar_form(&Poly::monomial(n, e, Rational::one()), dim)?;
            let img = antisymmetrize_a(&y, &interleave(&polar, b as usize))?;
            if !img.is_zero() {
                images.push(img);
            }
        }
    }
    Ok(tensor_rank(&images))
}
