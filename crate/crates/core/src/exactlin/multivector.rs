use std::collections::BTreeMap;

use super::{check_dim, LinError, Matrix, Rational};

/// All strictly increasing `k`-subsets of `0..n`, lexicographically.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n - k + i {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Sorts `idx` in place and returns the permutation sign, or `None` on a repeat.
fn sort_sign(idx: &mut [usize]) -> Option<i32> {
    let mut sign = 1;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

/// An element of `Λ^k` of a `dim`-dimensional space, keyed by increasing index sets.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Multivector {
    dim: usize,
    grade: usize,
    coords: BTreeMap<Vec<usize>, Rational>,
}

impl Multivector {
    pub fn zero(dim: usize, grade: usize) -> Self {
        Multivector { dim, grade, coords: BTreeMap::new() }
    }

    pub fn scalar(dim: usize, c: Rational) -> Self {
        let mut m = Multivector::zero(dim, 0);
        m.add_term(Vec::new(), c);
        m
    }

    /// `e_{i1} ∧ … ∧ e_{ik}` for arbitrary (not necessarily sorted) indices.
    pub fn basis(dim: usize, idx: &[usize]) -> Self {
        let mut m = Multivector::zero(dim, idx.len());
        m.add_term(idx.to_vec(), Rational::one());
        m
    }

    pub fn from_vector(v: &[Rational]) -> Self {
        let mut m = Multivector::zero(v.len(), 1);
        for (i, x) in v.iter().enumerate() {
            m.add_term(vec![i], x.clone());
        }
        m
    }

    /// Coordinates in the lexicographic basis of `combinations(dim, grade)`.
    pub fn from_dense(dim: usize, grade: usize, v: &[Rational]) -> Result<Self, LinError> {
        let basis = combinations(dim, grade);
        check_dim(basis.len(), v.len())?;
        let mut m = Multivector::zero(dim, grade);
        for (b, x) in basis.into_iter().zip(v) {
            m.add_term(b, x.clone());
        }
        Ok(m)
    }

    pub fn to_dense(&self) -> Vec<Rational> {
        combinations(self.dim, self.grade).iter().map(|b| self.get(b)).collect()
    }

    /// Adds `c·e_idx`, normalizing the order of `idx` with its sign.
    pub fn add_term(&mut self, mut idx: Vec<usize>, c: Rational) {
        assert_eq!(idx.len(), self.grade, "grade mismatch");
        assert!(idx.iter().all(|&i| i < self.dim), "index out of range");
        if c.is_zero() {
            return;
        }
        let Some(sign) = sort_sign(&mut idx) else { return };
        let c = if sign < 0 { -c } else { c };
        let e = self.coords.entry(idx.clone()).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.coords.remove(&idx);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn get(&self, sorted_idx: &[usize]) -> Rational {
        self.coords.get(sorted_idx).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &Rational)> {
        self.coords.iter()
    }

    pub fn add(&self, other: &Multivector) -> Result<Multivector, LinError> {
        check_dim(self.dim, other.dim)?;
        check_dim(self.grade, other.grade)?;
        let mut out = self.clone();
        for (k, v) in &other.coords {
            out.add_term(k.clone(), v.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Multivector) -> Result<Multivector, LinError> {
        self.add(&other.scale(&Rational::from_int(-1)))
    }

    pub fn scale(&self, c: &Rational) -> Multivector {
        if c.is_zero() {
            return Multivector::zero(self.dim, self.grade);
        }
        Multivector {
            dim: self.dim,
            grade: self.grade,
            coords: self.coords.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    /// Exterior product. Grades summing past the dimension give zero.
    pub fn wedge(&self, other: &Multivector) -> Result<Multivector, LinError> {
        check_dim(self.dim, other.dim)?;
        let mut out = Multivector::zero(self.dim, self.grade + other.grade);
        if self.grade + other.grade > self.dim {
            return Ok(out);
        }
        for (a, x) in &self.coords {
            for (b, y) in &other.coords {
                if a.iter().any(|i| b.contains(i)) {
                    continue;
                }
                let mut w = a.clone();
                w.extend_from_slice(b);
                out.add_term(w, x * y);
            }
        }
        Ok(out)
    }

    /// Interior product `ξ⌟m` of a covector, removing one slot from the front:
    /// `ξ⌟(x∧y) = ξ(x) y − ξ(y) x`.
    pub fn contract(&self, xi: &[Rational]) -> Result<Multivector, LinError> {
        check_dim(self.dim, xi.len())?;
        if self.grade == 0 {
            return Err(LinError::Degenerate("contraction of a scalar".into()));
        }
        let mut out = Multivector::zero(self.dim, self.grade - 1);
        for (idx, v) in &self.coords {
            for (pos, &i) in idx.iter().enumerate() {
                if xi[i].is_zero() {
                    continue;
                }
                let mut rest = idx.clone();
                rest.remove(pos);
                let c = v * &xi[i];
                out.add_term(rest, if pos % 2 == 0 { c } else { -c });
            }
        }
        Ok(out)
    }

    /// Interior product of a `j`-form (given in the dual basis as a
    /// multivector of grade `j`) into `self`: `ε^J⌟e_I = s·e_{I∖J}` where
    /// `e_I = s·e_J∧e_{I∖J}`. Yields grade `k − j`.
    pub fn interior(&self, form: &Multivector) -> Result<Multivector, LinError> {
        check_dim(self.dim, form.dim)?;
        if form.grade > self.grade {
            return Err(LinError::DimMismatch { expected: self.grade, got: form.grade });
        }
        let mut out = Multivector::zero(self.dim, self.grade - form.grade);
        for (i_set, v) in &self.coords {
            for (j_set, a) in &form.coords {
                if !j_set.iter().all(|j| i_set.contains(j)) {
                    continue;
                }
                let mut order = j_set.clone();
                let rest: Vec<usize> = i_set.iter().copied().filter(|i| !j_set.contains(i)).collect();
                order.extend_from_slice(&rest);
                let sign = sort_sign(&mut order).expect("distinct indices");
                let c = v * a;
                out.add_term(rest, if sign > 0 { c } else { -c });
            }
        }
        Ok(out)
    }

    pub fn wedge_power(&self, m: usize) -> Result<Multivector, LinError> {
        let mut acc = Multivector::scalar(self.dim, Rational::one());
        for _ in 0..m {
            acc = acc.wedge(self)?;
            if acc.is_zero() {
                break;
            }
        }
        if acc.is_zero() {
            return Ok(Multivector::zero(self.dim, self.grade * m));
        }
        Ok(acc)
    }

    /// `π∧π = 0` for a bivector.
    pub fn is_decomposable(&self) -> Result<bool, LinError> {
        if self.grade != 2 {
            return Err(LinError::DimMismatch { expected: 2, got: self.grade });
        }
        Ok(self.wedge(self)?.is_zero())
    }

    /// Rank of a bivector: twice the largest nonvanishing wedge power.
    pub fn bivector_rank(&self) -> Result<usize, LinError> {
        if self.grade != 2 {
            return Err(LinError::DimMismatch { expected: 2, got: self.grade });
        }
        let mut p = 0;
        let mut acc = Multivector::scalar(self.dim, Rational::one());
        loop {
            let next = acc.wedge(self)?;
            if next.is_zero() {
                return Ok(2 * p);
            }
            acc = next;
            p += 1;
        }
    }

    /// The smallest subspace `S` with `self ∈ Λ^k S`: the common kernel of
    /// all covectors `ξ` with `ξ⌟self = 0`.
    pub fn support(&self) -> Result<Vec<Vec<Rational>>, LinError> {
        if self.is_zero() {
            return Err(LinError::Degenerate("support of the zero multivector".into()));
        }
        if self.grade == 0 {
            return Ok(Vec::new());
        }
        let target = combinations(self.dim, self.grade - 1);
        // column i: coordinates of e_i*⌟self
        let cols: Vec<Vec<Rational>> = (0..self.dim)
            .map(|i| {
                let c = self.contract(&super::unit(self.dim, i)).expect("dims agree");
                target.iter().map(|b| c.get(b)).collect()
            })
            .collect();
        let map = Matrix::from_cols(&cols, target.len())?;
        let annihilator = map.kernel();
        let ann = Matrix::from_rows(&annihilator, self.dim)?;
        Ok(ann.kernel())
    }
}

/// Dimension of the span of a list of vectors.
pub(crate) fn span_rank(vs: &[Vec<Rational>], dim: usize) -> usize {
    Matrix::from_rows(vs, dim).expect("uniform lengths").rank()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlin::{qi, qvec};
    use proptest::prelude::*;

    fn e(dim: usize, i: usize) -> Multivector {
        Multivector::basis(dim, &[i])
    }

    #[test]
    fn combinations_lex() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(4, 2)[0], vec![0, 1]);
        assert_eq!(combinations(4, 2)[5], vec![2, 3]);
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
        assert!(combinations(2, 3).is_empty());
    }

    #[test]
    fn wedge_examples() {
        let w = e(4, 1).wedge(&e(4, 2)).unwrap();
        assert_eq!(w, Multivector::basis(4, &[1, 2]));
        let x = Multivector::from_vector(&qvec(&[1, -2, 3]));
        assert!(x.wedge(&x).unwrap().is_zero());
        let s = e(4, 1).add(&e(4, 2)).unwrap();
        assert_eq!(s.wedge(&e(4, 2)).unwrap(), Multivector::basis(4, &[1, 2]));
        assert_eq!(Multivector::basis(3, &[2, 1]), Multivector::basis(3, &[1, 2]).scale(&qi(-1)));
        // grade overflow
        let big = Multivector::basis(2, &[0, 1]).wedge(&e(2, 0)).unwrap();
        assert!(big.is_zero());
    }

    #[test]
    fn contract_examples() {
        let b = Multivector::basis(4, &[1, 2]);
        assert_eq!(b.contract(&crate::exactlin::unit(4, 1)).unwrap(), e(4, 2));
        assert!(b.contract(&crate::exactlin::unit(4, 3)).unwrap().is_zero());
        let phi = qvec(&[0, 1, 1, 0]);
        let got = b.contract(&phi).unwrap();
        assert_eq!(got, e(4, 2).sub(&e(4, 1)).unwrap());
    }

    #[test]
    fn decomposability_examples() {
        assert!(Multivector::basis(4, &[0, 1]).is_decomposable().unwrap());
        let p = Multivector::basis(4, &[0, 1]).add(&Multivector::basis(4, &[2, 3])).unwrap();
        assert!(!p.is_decomposable().unwrap());
        assert_eq!(p.wedge(&p).unwrap(), Multivector::basis(4, &[0, 1, 2, 3]).scale(&qi(2)));
        assert_eq!(p.wedge_power(2).unwrap(), Multivector::basis(4, &[0, 1, 2, 3]).scale(&qi(2)));
        assert!(Multivector::basis(4, &[0, 1]).wedge_power(2).unwrap().is_zero());
        assert_eq!(p.bivector_rank().unwrap(), 4);
        let any3 = Multivector::from_dense(3, 2, &qvec(&[1, -4, 7])).unwrap();
        assert!(any3.is_decomposable().unwrap());
    }

    #[test]
    fn support_examples() {
        let s = Multivector::basis(5, &[0, 1]).support().unwrap();
        assert_eq!(span_rank(&s, 5), 2);
        let p = Multivector::basis(5, &[0, 1]).add(&Multivector::basis(5, &[2, 3])).unwrap();
        let s = p.support().unwrap();
        assert_eq!(s.len(), 4);
        assert!(s.iter().all(|v| v[4].is_zero()));
        let f = Multivector::basis(4, &[0, 1]).add(&Multivector::basis(4, &[0, 2])).unwrap();
        let s = f.support().unwrap();
        assert_eq!(s.len(), 2);
        let mut with = s.clone();
        with.push(qvec(&[1, 0, 0, 0]));
        with.push(qvec(&[0, 1, 1, 0]));
        assert_eq!(span_rank(&with, 4), 2);
        assert!(Multivector::zero(3, 2).support().is_err());
    }

    #[test]
    fn interior_of_volume_is_hodge_like() {
        let vol = Multivector::basis(3, &[0, 1, 2]);
        let a = Multivector::basis(3, &[0, 1]);
        assert_eq!(vol.interior(&a).unwrap(), e(3, 2));
        let b = Multivector::basis(3, &[0, 2]);
        assert_eq!(vol.interior(&b).unwrap(), e(3, 1).scale(&qi(-1)));
        // grade-1 interior agrees with contract
        let xi = qvec(&[2, -1, 3]);
        let xi_m = Multivector::from_vector(&xi);
        assert_eq!(vol.interior(&xi_m).unwrap(), vol.contract(&xi).unwrap());
    }

    fn arb_mv(dim: usize, grade: usize) -> impl Strategy<Value = Multivector> {
        let n = combinations(dim, grade).len();
        proptest::collection::vec(-3i64..4, n)
            .prop_map(move |v| Multivector::from_dense(dim, grade, &qvec(&v)).unwrap())
    }

    fn arb_vec(dim: usize) -> impl Strategy<Value = Vec<Rational>> {
        proptest::collection::vec(-3i64..4, dim).prop_map(|v| qvec(&v))
    }

    proptest! {
        #[test]
        fn graded_anticommutativity(a in arb_mv(5, 2), b in arb_mv(5, 1), c in arb_mv(5, 3)) {
            prop_assert_eq!(a.wedge(&b).unwrap(), b.wedge(&a).unwrap());
            let bc = b.wedge(&c).unwrap();
            let cb = c.wedge(&b).unwrap();
            prop_assert_eq!(bc, cb.scale(&qi(-1)));
            let bb = b.wedge(&b.clone()).unwrap();
            prop_assert!(bb.is_zero());
            let ac = a.wedge(&c).unwrap();
            prop_assert!(ac.is_zero() || ac.grade() == 5);
        }

        #[test]
        fn wedge_associative(a in arb_mv(5, 1), b in arb_mv(5, 2), c in arb_mv(5, 1)) {
            let l = a.wedge(&b).unwrap().wedge(&c).unwrap();
            let r = a.wedge(&b.wedge(&c).unwrap()).unwrap();
            prop_assert_eq!(l, r);
        }

        #[test]
        fn sign_rule_odd(a in arb_mv(5, 1), b in arb_mv(5, 1)) {
            prop_assert_eq!(a.wedge(&b).unwrap(), b.wedge(&a).unwrap().scale(&qi(-1)));
        }

        #[test]
        fn contract_is_derivation(xi in arb_vec(4), x in arb_vec(4), y in arb_vec(4)) {
            let xv = Multivector::from_vector(&x);
            let yv = Multivector::from_vector(&y);
            let lhs = xv.wedge(&yv).unwrap().contract(&xi).unwrap();
            let rhs = yv.scale(&crate::exactlin::dot(&xi, &x))
                .sub(&xv.scale(&crate::exactlin::dot(&xi, &y))).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn supports_nest_under_powers(p in arb_mv(6, 2)) {
            prop_assume!(!p.is_zero());
            let rank = p.bivector_rank().unwrap();
            let m = rank / 2;
            let s1 = p.support().unwrap();
            prop_assert_eq!(s1.len(), rank);
            for k in 1..=m {
                let pk = p.wedge_power(k).unwrap();
                let sk = pk.support().unwrap();
                // full-rank case: all supports coincide
                let mut joint = s1.clone();
                joint.extend(sk.iter().cloned());
                prop_assert_eq!(span_rank(&joint, 6), s1.len());
                prop_assert_eq!(sk.len(), s1.len());
            }
        }

        #[test]
        fn support_of_wedge_with_vector(mu in arb_mv(5, 2), phi in arb_vec(5)) {
            prop_assume!(!mu.is_zero());
            let fm = Multivector::from_vector(&phi).wedge(&mu).unwrap();
            prop_assume!(!fm.is_zero());
            let smu = mu.support().unwrap();
            let sfm = fm.support().unwrap();
            let mut with_phi = smu.clone();
            with_phi.push(phi.clone());
            let inside = span_rank(&with_phi, 5) == smu.len();
            let mut joint = with_phi.clone();
            joint.extend(sfm.iter().cloned());
            if inside {
                prop_assert_eq!(span_rank(&joint, 5), smu.len());
            } else {
                prop_assert_eq!(sfm.len(), smu.len() + 1);
                prop_assert_eq!(span_rank(&joint, 5), smu.len() + 1);
            }
        }
    }
}
