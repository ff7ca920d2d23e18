use std::collections::BTreeMap;

use super::{Matrix, Rational};

/// Incremental row echelon basis for sparse vectors keyed by an ordered type.
///
/// Each stored row has a pivot equal to its smallest key and contains only
/// keys at or after that pivot, so reduction in ascending key order never
/// reintroduces an eliminated pivot.
#[derive(Clone, Debug, Default)]
pub struct SparseEchelon<K: Ord + Clone> {
    rows: BTreeMap<K, BTreeMap<K, Rational>>,
}

impl<K: Ord + Clone> SparseEchelon<K> {
    pub fn new() -> Self {
        SparseEchelon { rows: BTreeMap::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` against the stored rows; the remainder is zero iff `v` is
    /// in their span.
    pub fn reduce(&self, mut v: BTreeMap<K, Rational>) -> BTreeMap<K, Rational> {
        let mut cursor: Option<K> = None;
        loop {
            let next = match &cursor {
                None => v.keys().find(|k| self.rows.contains_key(*k)).cloned(),
                Some(c) => v
                    .range((std::ops::Bound::Excluded(c.clone()), std::ops::Bound::Unbounded))
                    .map(|(k, _)| k)
                    .find(|k| self.rows.contains_key(*k))
                    .cloned(),
            };
            let Some(p) = next else { break };
            let row = &self.rows[&p];
            let f = v[&p].clone();
            for (k, x) in row {
                let entry = v.entry(k.clone()).or_insert_with(Rational::zero);
                *entry -= &f * x;
                if entry.is_zero() {
                    v.remove(k);
                }
            }
            cursor = Some(p);
        }
        v
    }

    /// Adds `v`; returns `true` if it was independent of the stored rows.
    pub fn insert(&mut self, v: BTreeMap<K, Rational>) -> bool {
        let r = self.reduce(v);
        let Some((p, lead)) = r.iter().next() else {
            return false;
        };
        let inv = lead.recip().expect("nonzero lead");
        let p = p.clone();
        let row = r.into_iter().map(|(k, x)| (k, x * &inv)).collect();
        self.rows.insert(p, row);
        true
    }

    pub fn contains(&self, v: BTreeMap<K, Rational>) -> bool {
        self.reduce(v).is_empty()
    }

    pub fn pivots(&self) -> impl Iterator<Item = &K> {
        self.rows.keys()
    }
}

impl SparseEchelon<usize> {
    /// Null space of the stored rows viewed as linear equations in `ncols` unknowns.
    pub fn kernel(&self, ncols: usize) -> Vec<Vec<Rational>> {
        let dense: Vec<Vec<Rational>> = self
            .rows
            .values()
            .map(|r| {
                let mut d = vec![Rational::zero(); ncols];
                for (k, x) in r {
                    d[*k] = x.clone();
                }
                d
            })
            .collect();
        Matrix::from_rows(&dense, ncols).expect("uniform rows").kernel()
    }
}
