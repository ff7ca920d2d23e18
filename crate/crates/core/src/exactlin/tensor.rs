use std::collections::BTreeMap;

use super::{check_dim, LinError, Rational};

/// A multilinear form of order `order` on a `dim`-dimensional space, stored
/// sparsely by index word. Absent entries are zero; zeros are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Tensor {
    dim: usize,
    order: usize,
    entries: BTreeMap<Vec<usize>, Rational>,
}

impl Tensor {
    pub fn zero(dim: usize, order: usize) -> Self {
        Tensor { dim, order, entries: BTreeMap::new() }
    }

    /// The dual basis product `e*_{i1} ⊗ … ⊗ e*_{iN}`.
    pub fn basis(dim: usize, idx: &[usize]) -> Self {
        let mut t = Tensor::zero(dim, idx.len());
        t.entries.insert(idx.to_vec(), Rational::one());
        t
    }

    /// Builds a tensor from (index, value) pairs; repeated indices accumulate.
    pub fn from_entries<I>(dim: usize, order: usize, entries: I) -> Result<Self, LinError>
    where
        I: IntoIterator<Item = (Vec<usize>, Rational)>,
    {
        let mut t = Tensor::zero(dim, order);
        for (idx, val) in entries {
            check_dim(order, idx.len())?;
            if let Some(&bad) = idx.iter().find(|&&i| i >= dim) {
                return Err(LinError::IndexOutOfRange { index: bad, dim });
            }
            t.add_entry(idx, &val);
        }
        Ok(t)
    }

    /// Product of covectors `ξ1 ⊗ ξ2 ⊗ …`.
    pub fn from_covectors(covs: &[Vec<Rational>]) -> Self {
        let dim = covs.first().map_or(0, |c| c.len());
        let mut t = Tensor::zero(dim, 0);
        t.entries.insert(Vec::new(), Rational::one());
        for c in covs {
            let mut next = Tensor::zero(dim, t.order + 1);
            for (idx, val) in &t.entries {
                for (i, ci) in c.iter().enumerate() {
                    if ci.is_zero() {
                        continue;
                    }
                    let mut w = idx.clone();
                    w.push(i);
                    next.entries.insert(w, val * ci);
                }
            }
            t = next;
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, idx: &[usize]) -> Rational {
        self.entries.get(idx).cloned().unwrap_or_default()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<usize>, &Rational)> {
        self.entries.iter()
    }

    pub fn add_entry(&mut self, idx: Vec<usize>, val: &Rational) {
        if val.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.entries.entry(idx) {
            Entry::Vacant(e) => {
                e.insert(val.clone());
            }
            Entry::Occupied(mut e) => {
                let s = e.get() + val;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    fn same_shape(&self, other: &Tensor) -> Result<(), LinError> {
        check_dim(self.dim, other.dim)?;
        check_dim(self.order, other.order)
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor, LinError> {
        self.same_shape(other)?;
        let mut out = self.clone();
        for (k, v) in &other.entries {
            out.add_entry(k.clone(), v);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor, LinError> {
        self.add(&other.scale(&Rational::from_int(-1)))
    }

    /// `self + c·other`, in place.
    pub fn axpy(&mut self, c: &Rational, other: &Tensor) -> Result<(), LinError> {
        self.same_shape(other)?;
        if c.is_zero() {
            return Ok(());
        }
        for (k, v) in &other.entries {
            self.add_entry(k.clone(), &(c * v));
        }
        Ok(())
    }

    pub fn scale(&self, c: &Rational) -> Tensor {
        if c.is_zero() {
            return Tensor::zero(self.dim, self.order);
        }
        Tensor {
            dim: self.dim,
            order: self.order,
            entries: self.entries.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    /// Permutation action `(σ·φ)(x_0,…) = φ(x_{σ(0)},…)`.
    ///
    /// On coefficients this reads `(σ·φ)_w = φ_{w∘σ}`.
    pub fn act(&self, sigma: &[usize]) -> Result<Tensor, LinError> {
        check_dim(self.order, sigma.len())?;
        let mut out = Tensor::zero(self.dim, self.order);
        for (u, val) in &self.entries {
            let mut w = vec![0; self.order];
            for (i, &s) in sigma.iter().enumerate() {
                w[s] = u[i];
            }
            out.entries.insert(w, val.clone());
        }
        Ok(out)
    }

    /// Exchange of slots `m` and `n`.
    pub fn swap_slots(&self, m: usize, n: usize) -> Tensor {
        let mut out = Tensor::zero(self.dim, self.order);
        for (u, val) in &self.entries {
            let mut w = u.clone();
            w.swap(m, n);
            out.entries.insert(w, val.clone());
        }
        out
    }

    /// Outer product.
    pub fn outer(&self, other: &Tensor) -> Result<Tensor, LinError> {
        check_dim(self.dim, other.dim)?;
        let mut out = Tensor::zero(self.dim, self.order + other.order);
        for (a, x) in &self.entries {
            for (b, y) in &other.entries {
                let mut w = a.clone();
                w.extend_from_slice(b);
                out.entries.insert(w, x * y);
            }
        }
        Ok(out)
    }

    /// Full evaluation on `order` vectors.
    pub fn eval(&self, args: &[&[Rational]]) -> Result<Rational, LinError> {
        check_dim(self.order, args.len())?;
        for a in args {
            check_dim(self.dim, a.len())?;
        }
        let mut acc = Rational::zero();
        'outer: for (idx, val) in &self.entries {
            let mut term = val.clone();
            for (slot, &i) in idx.iter().enumerate() {
                let x = &args[slot][i];
                if x.is_zero() {
                    continue 'outer;
                }
                term *= x;
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Inserts `v` into slot `slot`, lowering the order by one.
    pub fn contract_slot(&self, slot: usize, v: &[Rational]) -> Result<Tensor, LinError> {
        check_dim(self.dim, v.len())?;
        if slot >= self.order {
            return Err(LinError::IndexOutOfRange { index: slot, dim: self.order });
        }
        let mut out = Tensor::zero(self.dim, self.order - 1);
        for (idx, val) in &self.entries {
            let c = &v[idx[slot]];
            if c.is_zero() {
                continue;
            }
            let mut w = idx.clone();
            w.remove(slot);
            out.add_entry(w, &(val * c));
        }
        Ok(out)
    }

    /// Inserts `v` into each listed slot (original slot numbering).
    pub fn contract_slots(&self, slots: &[usize], v: &[Rational]) -> Result<Tensor, LinError> {
        let mut sorted = slots.to_vec();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        let mut t = self.clone();
        for s in sorted {
            t = t.contract_slot(s, v)?;
        }
        Ok(t)
    }

    /// Dense coefficient vector in lexicographic order of index words.
    pub fn to_dense(&self) -> Vec<Rational> {
        let total = self.dim.pow(self.order as u32);
        let mut out = vec![Rational::zero(); total];
        for (idx, val) in &self.entries {
            let pos = idx.iter().fold(0, |acc, &i| acc * self.dim + i);
            out[pos] = val.clone();
        }
        out
    }
}

/// All index words of the given order over `0..dim`, lexicographically.
pub fn all_words(dim: usize, order: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = dim.pow(order as u32);
    (0..total).map(move |mut k| {
        let mut w = vec![0; order];
        for slot in (0..order).rev() {
            w[slot] = k % dim;
            k /= dim;
        }
        w
    })
}
