//! Young tableaux, the row symmetrizer `S` and column antisymmetrizer `A`,
//! and the Bianchi-type characterizations of `Im SA` and `Im AS`.
//!
//! Slots are 0-based. With horizontal numbering the boxes are numbered row by
//! row; with vertical numbering column by column.

mod group;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactlin::{all_words, LinError, Rational, SparseEchelon, Tensor};
pub use group::GroupElement;
use group::{block_permutations, sign};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum YoungError {
    #[error("invalid tableau shape: {0}")]
    InvalidShape(String),
    #[error("tensor order {got} does not match the {expected} boxes of the tableau")]
    OrderMismatch { expected: usize, got: usize },
    #[error("operation requires {0} numbering")]
    WrongNumbering(Numbering),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("ratio ASAS/AS is not constant across basis tensors")]
    InconsistentScalar,
    #[error(transparent)]
    Lin(#[from] LinError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Numbering {
    Horizontal,
    Vertical,
}

impl std::fmt::Display for Numbering {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Numbering::Horizontal => "horizontal",
            Numbering::Vertical => "vertical",
        })
    }
}

/// A Young diagram together with a numbering convention. `rows` always holds
/// the row lengths, whatever the numbering.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "TableauRepr", into = "TableauRepr")]
pub struct YoungTableau {
    rows: Vec<usize>,
    numbering: Numbering,
}

#[derive(Serialize, Deserialize)]
struct TableauRepr {
    rows: Vec<usize>,
    numbering: Numbering,
}

impl TryFrom<TableauRepr> for YoungTableau {
    type Error = YoungError;
    fn try_from(r: TableauRepr) -> Result<Self, YoungError> {
        YoungTableau::new(r.rows, r.numbering)
    }
}

impl From<YoungTableau> for TableauRepr {
    fn from(t: YoungTableau) -> Self {
        TableauRepr { rows: t.rows, numbering: t.numbering }
    }
}

fn conjugate(lengths: &[usize]) -> Vec<usize> {
    let top = lengths.first().copied().unwrap_or(0);
    (0..top).map(|c| lengths.iter().filter(|&&l| l > c).count()).collect()
}

impl YoungTableau {
    pub fn new(rows: Vec<usize>, numbering: Numbering) -> Result<Self, YoungError> {
        if rows.is_empty() {
            return Err(YoungError::InvalidShape("no rows".into()));
        }
        if rows.contains(&0) {
            return Err(YoungError::InvalidShape("row lengths must be positive".into()));
        }
        if rows.windows(2).any(|w| w[0] < w[1]) {
            return Err(YoungError::InvalidShape("row lengths must be weakly decreasing".into()));
        }
        Ok(YoungTableau { rows, numbering })
    }

    /// `(i_1,…,i_r)`, numbered horizontally.
    pub fn horizontal(rows: &[usize]) -> Result<Self, YoungError> {
        YoungTableau::new(rows.to_vec(), Numbering::Horizontal)
    }

    /// `[j_1,…,j_c]`, given by column lengths and numbered vertically.
    pub fn vertical(columns: &[usize]) -> Result<Self, YoungError> {
        if columns.is_empty() || columns.contains(&0) {
            return Err(YoungError::InvalidShape("column lengths must be positive".into()));
        }
        if columns.windows(2).any(|w| w[0] < w[1]) {
            return Err(YoungError::InvalidShape("column lengths must be weakly decreasing".into()));
        }
        YoungTableau::new(conjugate(columns), Numbering::Vertical)
    }

    pub fn with_numbering(&self, numbering: Numbering) -> Self {
        YoungTableau { rows: self.rows.clone(), numbering }
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn columns(&self) -> Vec<usize> {
        conjugate(&self.rows)
    }

    pub fn numbering(&self) -> Numbering {
        self.numbering
    }

    pub fn boxes(&self) -> usize {
        self.rows.iter().sum()
    }

    /// Slot number of box `(r, c)`.
    pub fn slot(&self, r: usize, c: usize) -> usize {
        match self.numbering {
            Numbering::Horizontal => self.rows[..r].iter().sum::<usize>() + c,
            Numbering::Vertical => self.columns()[..c].iter().sum::<usize>() + r,
        }
    }

    pub fn row_slots(&self) -> Vec<Vec<usize>> {
        (0..self.rows.len())
            .map(|r| (0..self.rows[r]).map(|c| self.slot(r, c)).collect())
            .collect()
    }

    pub fn column_slots(&self) -> Vec<Vec<usize>> {
        let cols = self.columns();
        (0..cols.len()).map(|c| (0..cols[c]).map(|r| self.slot(r, c)).collect()).collect()
    }

    /// `S` as an element of the group algebra.
    pub fn s_element(&self) -> GroupElement {
        let perms = block_permutations(self.boxes(), &self.row_slots());
        GroupElement::from_terms(self.boxes(), perms.into_iter().map(|p| (p, 1)))
    }

    /// `A` as an element of the group algebra.
    pub fn a_element(&self) -> GroupElement {
        let perms = block_permutations(self.boxes(), &self.column_slots());
        GroupElement::from_terms(
            self.boxes(),
            perms.into_iter().map(|p| {
                let s = sign(&p);
                (p, s)
            }),
        )
    }

    fn check_order(&self, t: &Tensor) -> Result<(), YoungError> {
        if t.order() != self.boxes() {
            return Err(YoungError::OrderMismatch { expected: self.boxes(), got: t.order() });
        }
        Ok(())
    }

    fn require(&self, n: Numbering) -> Result<(), YoungError> {
        if self.numbering != n {
            return Err(YoungError::WrongNumbering(n));
        }
        Ok(())
    }
}

/// Applies a group-algebra element to a tensor.
pub fn apply(element: &GroupElement, t: &Tensor) -> Result<Tensor, YoungError> {
    if t.order() != element.n {
        return Err(YoungError::OrderMismatch { expected: element.n, got: t.order() });
    }
    let mut out = Tensor::zero(t.dim(), t.order());
    for (p, c) in &element.terms {
        let perm: Vec<usize> = p.iter().map(|&x| x as usize).collect();
        out.axpy(&Rational::from_int(*c), &t.act(&perm)?)?;
    }
    Ok(out)
}

/// Row symmetrization (no normalization factor).
pub fn symmetrize_s(y: &YoungTableau, t: &Tensor) -> Result<Tensor, YoungError> {
    y.check_order(t)?;
    apply(&y.s_element(), t)
}

/// Signed column antisymmetrization (no normalization factor).
pub fn antisymmetrize_a(y: &YoungTableau, t: &Tensor) -> Result<Tensor, YoungError> {
    y.check_order(t)?;
    apply(&y.a_element(), t)
}

/// `A(S(t))`.
pub fn apply_as(y: &YoungTableau, t: &Tensor) -> Result<Tensor, YoungError> {
    antisymmetrize_a(y, &symmetrize_s(y, t)?)
}

/// `S(A(t))`.
pub fn apply_sa(y: &YoungTableau, t: &Tensor) -> Result<Tensor, YoungError> {
    symmetrize_s(y, &antisymmetrize_a(y, t)?)
}

fn word_map(scratch: &[(u64, i64)]) -> BTreeMap<u64, i64> {
    scratch.iter().copied().collect()
}

/// The positive integer `λ` with `ASAS = λ·AS` and `SASA = λ·SA`.
///
/// `λ` is read off as the ratio of `ASAS·δ_u` to `AS·δ_u` for the first basis
/// tensor `δ_u` not killed by `AS`; both identities are then checked on every
/// basis tensor of order `N` over a `dim`-dimensional space.
pub fn young_scalar(y: &YoungTableau, dim: usize) -> Result<u64, YoungError> {
    if dim < y.rows.len() {
        return Err(YoungError::Precondition(format!(
            "dimension {dim} is smaller than the {} rows, so AS = 0",
            y.rows.len()
        )));
    }
    let a = y.a_element();
    let s = y.s_element();
    let as_ = a.mul(&s);
    let sa = s.mul(&a);
    let asas = as_.mul(&as_);
    let sasa = sa.mul(&sa);

    let n = y.boxes();
    let mut lambda: Option<i64> = None;
    let mut sc1 = Vec::new();
    let mut sc2 = Vec::new();
    for u in all_words(dim, n) {
        as_.act_on_word(&u, dim, &mut sc1);
        if sc1.is_empty() {
            continue;
        }
        asas.act_on_word(&u, dim, &mut sc2);
        let lhs = word_map(&sc2);
        let rhs = word_map(&sc1);
        if lhs.len() != rhs.len() {
            return Err(YoungError::InconsistentScalar);
        }
        let (k0, v0) = rhs.iter().next().expect("nonempty");
        let num = *lhs.get(k0).ok_or(YoungError::InconsistentScalar)?;
        if num % v0 != 0 {
            return Err(YoungError::InconsistentScalar);
        }
        let l = num / v0;
        if rhs.iter().any(|(k, v)| lhs.get(k) != Some(&(v * l))) {
            return Err(YoungError::InconsistentScalar);
        }
        lambda = Some(l);
        break;
    }
    let lambda = lambda.ok_or_else(|| YoungError::Precondition("AS vanishes identically".into()))?;
    if lambda <= 0 {
        return Err(YoungError::InconsistentScalar);
    }
    if !asas.sub(&as_.scale(lambda)).annihilates_all_words(dim)
        || !sasa.sub(&sa.scale(lambda)).annihilates_all_words(dim)
    {
        return Err(YoungError::InconsistentScalar);
    }
    Ok(lambda as u64)
}

/// `φ − Σ_{j<len} T_{start+j}^{target} φ`, or with `+` when `plus` is set.
fn bianchi_sum(t: &Tensor, start: usize, len: usize, target: usize, plus: bool) -> Tensor {
    let sign = Rational::from_int(if plus { 1 } else { -1 });
    let mut acc = t.clone();
    for j in 0..len {
        acc.axpy(&sign, &t.swap_slots(start + j, target)).expect("same shape");
    }
    acc
}

fn symmetric_within(t: &Tensor, blocks: &[Vec<usize>], antisym: bool) -> bool {
    let neg = t.scale(&Rational::from_int(-1));
    blocks.iter().all(|b| {
        b.windows(2).all(|w| {
            let swapped = t.swap_slots(w[0], w[1]);
            if antisym {
                swapped == neg
            } else {
                swapped == *t
            }
        })
    })
}

/// Membership in `Im SA` for a horizontally numbered tableau: row symmetry
/// plus `t + Σ_{j<i_k} T_{s_k+j}^{s_{k+1}} t = 0` for consecutive rows.
pub fn check_im_sa(y: &YoungTableau, t: &Tensor) -> Result<bool, YoungError> {
    y.require(Numbering::Horizontal)?;
    y.check_order(t)?;
    // adjacent transpositions generate each row group
    if !symmetric_within(t, &y.row_slots(), false) {
        return Ok(false);
    }
    let starts: Vec<usize> = (0..y.rows.len()).map(|r| y.slot(r, 0)).collect();
    for k in 0..y.rows.len().saturating_sub(1) {
        if !bianchi_sum(t, starts[k], y.rows[k], starts[k + 1], true).is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

fn column_antisymmetric(y: &YoungTableau, t: &Tensor) -> bool {
    symmetric_within(t, &y.column_slots(), true)
}

/// Membership in `Im AS` for a vertically numbered tableau: column
/// antisymmetry plus `t − Σ_{j<j_k} T_{s_k+j}^{s_{k+1}} t = 0` for consecutive
/// columns.
pub fn check_im_as(y: &YoungTableau, t: &Tensor) -> Result<bool, YoungError> {
    y.require(Numbering::Vertical)?;
    y.check_order(t)?;
    if !column_antisymmetric(y, t) {
        return Ok(false);
    }
    let cols = y.columns();
    let starts: Vec<usize> = (0..cols.len()).map(|c| y.slot(0, c)).collect();
    for k in 0..cols.len().saturating_sub(1) {
        if !bianchi_sum(t, starts[k], cols[k], starts[k + 1], false).is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The Bianchi identities between every pair of columns `k < j`, which
/// follow from the consecutive ones.
pub fn check_column_pair_identities(y: &YoungTableau, t: &Tensor) -> Result<bool, YoungError> {
    y.require(Numbering::Vertical)?;
    y.check_order(t)?;
    let cols = y.columns();
    let starts: Vec<usize> = (0..cols.len()).map(|c| y.slot(0, c)).collect();
    for k in 0..cols.len() {
        for j in k + 1..cols.len() {
            if !bianchi_sum(t, starts[k], cols[k], starts[j], false).is_zero() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Contracts `p` into the top box of each of the last `l` columns. Returns
/// the contracted form and the reduced (vertical) tableau.
pub fn contract_top_boxes(
    y: &YoungTableau,
    t: &Tensor,
    p: &[Rational],
    l: usize,
) -> Result<(Tensor, YoungTableau), YoungError> {
    y.require(Numbering::Vertical)?;
    y.check_order(t)?;
    let mut cols = y.columns();
    let c = cols.len();
    if l == 0 || l > c {
        return Err(YoungError::Precondition(format!("need 1 ≤ l ≤ {c}")));
    }
    if l == c && cols.iter().all(|&x| x == 1) {
        return Err(YoungError::Precondition("contraction would leave no boxes".into()));
    }
    let slots: Vec<usize> = (c - l..c).map(|k| y.slot(0, k)).collect();
    let out = t.contract_slots(&slots, p)?;
    for x in cols.iter_mut().skip(c - l) {
        *x -= 1;
    }
    cols.retain(|&x| x > 0);
    Ok((out, YoungTableau::vertical(&cols)?))
}

/// Words weakly increasing along every row: one representative per
/// `S`-orbit of basis tensors.
fn row_sorted_words(y: &YoungTableau, dim: usize) -> Vec<Vec<usize>> {
    let rows = y.row_slots();
    all_words(dim, y.boxes())
        .filter(|w| rows.iter().all(|r| r.windows(2).all(|p| w[p[0]] <= w[p[1]])))
        .collect()
}

/// Words strictly increasing down every column.
fn column_strict_words(y: &YoungTableau, dim: usize) -> Vec<Vec<usize>> {
    let cols = y.column_slots();
    all_words(dim, y.boxes())
        .filter(|w| cols.iter().all(|c| c.windows(2).all(|p| w[p[0]] < w[p[1]])))
        .collect()
}

fn tensor_to_sparse(t: &Tensor) -> BTreeMap<Vec<usize>, Rational> {
    t.entries().map(|(k, v)| (k.clone(), v.clone())).collect()
}

/// A basis of `Im AS`, obtained by applying `AS` to basis tensors and keeping
/// an independent subset.
pub fn im_as_basis(y: &YoungTableau, dim: usize) -> Result<Vec<Tensor>, YoungError> {
    y.require(Numbering::Vertical)?;
    let n = y.boxes();
    if dim < y.rows.len() {
        return Ok(Vec::new());
    }
    let as_ = y.a_element().mul(&y.s_element());
    let mut ech = SparseEchelon::new();
    let mut out = Vec::new();
    // S·δ_u only depends on the row-sorted representative of u
    for u in row_sorted_words(y, dim) {
        let img = apply(&as_, &Tensor::basis(dim, &u))?;
        if img.is_zero() {
            continue;
        }
        if ech.insert(tensor_to_sparse(&img)) {
            out.push(img);
        }
    }
    debug_assert!(out.iter().all(|t| t.order() == n));
    Ok(out)
}

/// Dimension of `Im AS` (equivalently of `Im SA`) for the shape of `y`.
pub fn young_dim(y: &YoungTableau, dim: usize) -> Result<usize, YoungError> {
    Ok(im_as_basis(&y.with_numbering(Numbering::Vertical), dim)?.len())
}

/// A basis of the solution space of the `Im AS` conditions (column
/// antisymmetry plus the consecutive-column identities), computed directly
/// from the linear constraints without using `AS`.
pub fn im_as_constraint_space(y: &YoungTableau, dim: usize) -> Result<Vec<Tensor>, YoungError> {
    y.require(Numbering::Vertical)?;
    let n = y.boxes();
    let a = y.a_element();
    // column-antisymmetric tensors, one per column-strict word
    let params: Vec<Tensor> = column_strict_words(y, dim)
        .iter()
        .map(|u| apply(&a, &Tensor::basis(dim, u)))
        .collect::<Result<_, _>>()?;
    let cols = y.columns();
    let starts: Vec<usize> = (0..cols.len()).map(|c| y.slot(0, c)).collect();
    let mut rows: BTreeMap<(usize, Vec<usize>), BTreeMap<usize, Rational>> = BTreeMap::new();
    for (p, t) in params.iter().enumerate() {
        for k in 0..cols.len().saturating_sub(1) {
            let b = bianchi_sum(t, starts[k], cols[k], starts[k + 1], false);
            for (w, c) in b.entries() {
                let e = rows.entry((k, w.clone())).or_default().entry(p).or_insert_with(Rational::zero);
                *e += c;
            }
        }
    }
    let mut ech = SparseEchelon::new();
    for (_, mut row) in rows {
        row.retain(|_, v| !v.is_zero());
        if !row.is_empty() {
            ech.insert(row);
        }
    }
    let kernel = ech.kernel(params.len());
    let mut out = Vec::with_capacity(kernel.len());
    for coeffs in kernel {
        let mut t = Tensor::zero(dim, n);
        for (c, p) in coeffs.iter().zip(&params) {
            t.axpy(c, p)?;
        }
        out.push(t);
    }
    Ok(out)
}

/// Rank of a list of tensors of the same shape.
pub fn tensor_rank(ts: &[Tensor]) -> usize {
    let mut ech = SparseEchelon::new();
    ts.iter().filter(|t| ech.insert(tensor_to_sparse(t))).count()
}

/// Coefficients of the diagonal polynomial
/// `φ(x_1,…,x_{j_1}; x_1,…,x_{j_2}; …)` in the variables `x_{r,a}`,
/// keyed by exponent vectors of length `rows·dim`.
pub fn diagonal_polynomial(y: &YoungTableau, t: &Tensor) -> Result<BTreeMap<Vec<u8>, Rational>, YoungError> {
    y.check_order(t)?;
    let dim = t.dim();
    let nrows = y.rows.len();
    let mut row_of = vec![0; y.boxes()];
    for (r, slots) in y.row_slots().iter().enumerate() {
        for &s in slots {
            row_of[s] = r;
        }
    }
    let mut poly: BTreeMap<Vec<u8>, Rational> = BTreeMap::new();
    for (w, c) in t.entries() {
        let mut e = vec![0u8; nrows * dim];
        for (slot, &a) in w.iter().enumerate() {
            e[row_of[slot] * dim + a] += 1;
        }
        let entry = poly.entry(e.clone()).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            poly.remove(&e);
        }
    }
    Ok(poly)
}

/// For `t ∈ Im AS`: whether the diagonal evaluation vanishes identically,
/// decided coefficient-wise. A `true` answer forces `t = 0`.
pub fn vanishing_diagonal_test(y: &YoungTableau, t: &Tensor) -> Result<bool, YoungError> {
    if !check_im_as(y, t)? {
        return Err(YoungError::Precondition("tensor is not in Im AS".into()));
    }
    Ok(diagonal_polynomial(y, t)?.is_empty())
}

/// Whether an order-4 form has the pair-exchange symmetry and antisymmetry
/// in each pair.
pub fn is_pair_symmetric(phi: &Tensor) -> bool {
    if phi.order() != 4 {
        return false;
    }
    let neg = phi.scale(&Rational::from_int(-1));
    phi.swap_slots(0, 1) == neg
        && phi.swap_slots(2, 3) == neg
        && phi.act(&[2, 3, 0, 1]).expect("order 4") == *phi
}

/// Splits a pair-symmetric order-4 form as `φ = φ_Y + ψ/3` with
/// `ψ(x,y,z,t) = φ(x,y,z,t) + φ(y,z,x,t) + φ(z,x,y,t)` fully antisymmetric
/// and `φ_Y ∈ Im AS` for `[2,2]`. Returns `(φ_Y, ψ)`.
pub fn example_5_10_decompose(phi: &Tensor) -> Result<(Tensor, Tensor), YoungError> {
    if !is_pair_symmetric(phi) {
        return Err(YoungError::Precondition(
            "form must be antisymmetric in each pair and symmetric under pair exchange".into(),
        ));
    }
    let mut psi = phi.clone();
    psi.axpy(&Rational::one(), &phi.act(&[1, 2, 0, 3])?)?;
    psi.axpy(&Rational::one(), &phi.act(&[2, 0, 1, 3])?)?;
    let mut phi_y = phi.clone();
    phi_y.axpy(&Rational::new(-1, 3), &psi)?;
    Ok((phi_y, psi))
}

/// Whether an order-`N` form is antisymmetric under every transposition.
pub fn is_fully_antisymmetric(t: &Tensor) -> bool {
    let neg = t.scale(&Rational::from_int(-1));
    (0..t.order().saturating_sub(1)).all(|i| t.swap_slots(i, i + 1) == neg)
}
