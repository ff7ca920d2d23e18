//! Integer group algebra of the symmetric group, acting on index words.

use std::collections::{BTreeMap, HashMap};

/// A permutation of `0..n` given by its images.
pub type Perm = Vec<u8>;

/// `(s∘t)(i) = s(t(i))`.
pub fn compose(s: &[u8], t: &[u8]) -> Perm {
    t.iter().map(|&i| s[i as usize]).collect()
}

pub fn identity(n: usize) -> Perm {
    (0..n as u8).collect()
}

pub fn sign(p: &[u8]) -> i64 {
    let mut seen = vec![false; p.len()];
    let mut s = 1;
    for start in 0..p.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut j = start;
        while !seen[j] {
            seen[j] = true;
            j = p[j] as usize;
            len += 1;
        }
        if len % 2 == 0 {
            s = -s;
        }
    }
    s
}

/// All permutations of `0..n` that only move points inside each block.
pub fn block_permutations(n: usize, blocks: &[Vec<usize>]) -> Vec<Perm> {
    let mut out = vec![identity(n)];
    for block in blocks {
        let local = all_permutations(block.len());
        let mut next = Vec::with_capacity(out.len() * local.len());
        for p in &out {
            for l in &local {
                let mut q = p.clone();
                for (a, &b) in l.iter().enumerate() {
                    q[block[a]] = block[b as usize] as u8;
                }
                next.push(q);
            }
        }
        out = next;
    }
    out
}

fn all_permutations(k: usize) -> Vec<Perm> {
    let mut out = Vec::new();
    let mut cur = identity(k);
    heap(k, &mut cur, &mut out);
    out.sort();
    out
}

fn heap(k: usize, a: &mut Perm, out: &mut Vec<Perm>) {
    if k <= 1 {
        out.push(a.clone());
        return;
    }
    for i in 0..k - 1 {
        heap(k - 1, a, out);
        if k.is_multiple_of(2) {
            a.swap(i, k - 1);
        } else {
            a.swap(0, k - 1);
        }
    }
    heap(k - 1, a, out);
}

/// Element `Σ c_σ σ` of `ℤ[S_n]` with `(στ)` acting as operator composition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupElement {
    pub n: usize,
    pub terms: BTreeMap<Perm, i64>,
}

impl GroupElement {
    pub fn from_terms(n: usize, it: impl IntoIterator<Item = (Perm, i64)>) -> Self {
        let mut terms = BTreeMap::new();
        for (p, c) in it {
            *terms.entry(p).or_insert(0) += c;
        }
        terms.retain(|_, c| *c != 0);
        GroupElement { n, terms }
    }

    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        let mut acc: HashMap<Perm, i64> = HashMap::new();
        for (s, a) in &self.terms {
            for (t, b) in &other.terms {
                *acc.entry(compose(s, t)).or_insert(0) += a * b;
            }
        }
        GroupElement::from_terms(self.n, acc)
    }

    pub fn scale(&self, c: i64) -> GroupElement {
        GroupElement::from_terms(self.n, self.terms.iter().map(|(p, x)| (p.clone(), x * c)))
    }

    pub fn sub(&self, other: &GroupElement) -> GroupElement {
        let it = self.terms.iter().map(|(p, c)| (p.clone(), *c));
        let jt = other.terms.iter().map(|(p, c)| (p.clone(), -c));
        GroupElement::from_terms(self.n, it.chain(jt))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Applies the element to the basis tensor `δ_u`, returning word codes
    /// (base `dim`, first slot most significant) with nonzero coefficients.
    /// Uses `σ·δ_u = δ_{u∘σ⁻¹}`.
    pub fn act_on_word(&self, u: &[usize], dim: usize, scratch: &mut Vec<(u64, i64)>) {
        scratch.clear();
        let n = self.n;
        let mut w = vec![0usize; n];
        for (s, c) in &self.terms {
            for i in 0..n {
                w[s[i] as usize] = u[i];
            }
            let code = w.iter().fold(0u64, |acc, &x| acc * dim as u64 + x as u64);
            scratch.push((code, *c));
        }
        scratch.sort_unstable_by_key(|x| x.0);
        let mut out = 0;
        let mut i = 0;
        while i < scratch.len() {
            let code = scratch[i].0;
            let mut sum = 0;
            while i < scratch.len() && scratch[i].0 == code {
                sum += scratch[i].1;
                i += 1;
            }
            if sum != 0 {
                scratch[out] = (code, sum);
                out += 1;
            }
        }
        scratch.truncate(out);
    }

    /// True iff the element kills every basis tensor of order `n` on a
    /// `dim`-dimensional space.
    pub fn annihilates_all_words(&self, dim: usize) -> bool {
        let mut scratch = Vec::new();
        let mut u = vec![0usize; self.n];
        loop {
            self.act_on_word(&u, dim, &mut scratch);
            if !scratch.is_empty() {
                return false;
            }
            // next word, last slot fastest
            let mut i = self.n;
            loop {
                if i == 0 {
                    return true;
                }
                i -= 1;
                u[i] += 1;
                if u[i] < dim {
                    break;
                }
                u[i] = 0;
            }
        }
    }
}
