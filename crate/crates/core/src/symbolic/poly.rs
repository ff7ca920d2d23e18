use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::exactlin::{Matrix, Rational};

/// Exponent vector of a monomial.
pub type Exps = Vec<u32>;

/// Multivariate polynomial with exact rational coefficients.
///
/// Monomials are ordered lexicographically on exponent vectors (`x0 > x1 > …`),
/// which is also the order used for exact division.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Exps, Rational>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        Poly::monomial(nvars, vec![0; nvars], c)
    }

    pub fn one(nvars: usize) -> Self {
        Poly::constant(nvars, Rational::one())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Poly::monomial(nvars, e, Rational::one())
    }

    pub fn monomial(nvars: usize, exps: Exps, c: Rational) -> Self {
        assert_eq!(exps.len(), nvars, "exponent vector length");
        let mut p = Poly::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Exps, Rational)>) -> Self {
        let mut p = Poly::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent vector length");
            p.add_term(e, &c);
        }
        p
    }

    /// `Σ c_i x_{offset+i}`.
    pub fn linear(nvars: usize, offset: usize, coeffs: &[Rational]) -> Self {
        let mut p = Poly::zero(nvars);
        for (i, c) in coeffs.iter().enumerate() {
            p = &p + &Poly::var(nvars, offset + i).scale(c);
        }
        p
    }

    /// `Σ M_ij x_{a+i} x_{b+j}`.
    pub fn bilinear(nvars: usize, m: &Matrix, a: usize, b: usize) -> Self {
        let mut p = Poly::zero(nvars);
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                if m[(i, j)].is_zero() {
                    continue;
                }
                let mut e = vec![0; nvars];
                e[a + i] += 1;
                e[b + j] += 1;
                p.add_term(e, &m[(i, j)]);
            }
        }
        p
    }

    pub fn add_term(&mut self, e: Exps, c: &Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            Entry::Occupied(mut o) => {
                let s = o.get() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exps, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, e: &[u32]) -> Rational {
        self.terms.get(e).cloned().unwrap_or_default()
    }

    /// The constant value, if the polynomial is constant.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (e, c) = self.terms.iter().next().expect("one term");
                e.iter().all(|&x| x == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|(e, x)| (e.clone(), x * c)).collect() }
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut acc = Poly::one(self.nvars);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Degree in the variables `range`, if every term has the same one.
    pub fn homogeneous_degree_in(&self, range: std::ops::Range<usize>) -> Option<u32> {
        let mut it = self.terms.keys().map(|e| e[range.clone()].iter().sum::<u32>());
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    /// The part of degree `d` in the variables `range`.
    pub fn part_of_degree_in(&self, range: std::ops::Range<usize>, d: u32) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e[range.clone()].iter().sum::<u32>() == d)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    /// Distinct degrees occurring in the variables `range`, ascending.
    pub fn degrees_in(&self, range: std::ops::Range<usize>) -> Vec<u32> {
        let mut ds: Vec<u32> = self.terms.keys().map(|e| e[range.clone()].iter().sum()).collect();
        ds.sort_unstable();
        ds.dedup();
        ds
    }

    pub fn derivative(&self, i: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[i] -= 1;
            out.add_term(e2, &(c * Rational::from_int(e[i] as i64)));
        }
        out
    }

    /// `Σ w_i ∂p/∂x_{offset+i}` with polynomial weights.
    pub fn directional(&self, offset: usize, w: &[Poly]) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (i, wi) in w.iter().enumerate() {
            if wi.is_zero() {
                continue;
            }
            out = &out + &(wi * &self.derivative(offset + i));
        }
        out
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        assert_eq!(x.len(), self.nvars, "argument length");
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    t *= xi.pow(k as i32);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.nvars, "argument length");
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut t = c.to_f64();
                for (xi, &k) in x.iter().zip(e) {
                    if k > 0 {
                        t *= xi.powi(k as i32);
                    }
                }
                t
            })
            .sum()
    }

    /// Substitutes `args[i]` for variable `i`; all arguments share a variable count.
    pub fn compose(&self, args: &[Poly]) -> Poly {
        assert_eq!(args.len(), self.nvars, "argument count");
        let n = args.first().map_or(0, |a| a.nvars);
        let mut cache: Vec<Vec<Poly>> = args.iter().map(|a| vec![Poly::one(n), a.clone()]).collect();
        let mut out = Poly::zero(n);
        for (e, c) in &self.terms {
            let mut t = Poly::constant(n, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                while cache[i].len() <= k as usize {
                    let next = &cache[i][cache[i].len() - 1] * &args[i];
                    cache[i].push(next);
                }
                t = &t * &cache[i][k as usize];
            }
            out = &out + &t;
        }
        out
    }

    /// Re-embeds into `nvars` variables, sending variable `i` to `map[i]`.
    pub fn remap(&self, nvars: usize, map: &[usize]) -> Poly {
        let mut out = Poly::zero(nvars);
        for (e, c) in &self.terms {
            let mut e2 = vec![0; nvars];
            for (i, &k) in e.iter().enumerate() {
                e2[map[i]] += k;
            }
            out.add_term(e2, c);
        }
        out
    }

    /// Exact quotient by `d`, or `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        let (lead_e, lead_c) = d.terms.iter().next_back()?;
        let mut r = self.clone();
        let mut quo = Poly::zero(self.nvars);
        while let Some((e, c)) = r.terms.iter().next_back() {
            if e.iter().zip(lead_e).any(|(a, b)| a < b) {
                return None;
            }
            let te: Exps = e.iter().zip(lead_e).map(|(a, b)| a - b).collect();
            let tc = c / lead_c;
            let t = Poly::monomial(self.nvars, te, tc);
            r = &r - &(&t * d);
            quo = &quo + &t;
        }
        Some(quo)
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*x{i}")?,
                    _ => write!(f, "*x{i}^{k}")?,
                }
            }
        }
        Ok(())
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars, "variable count");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c);
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars, "variable count");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), &-c);
        }
        out
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars, "variable count");
        let mut out = Poly::zero(self.nvars);
        for (a, x) in &self.terms {
            for (b, y) in &rhs.terms {
                let e: Exps = a.iter().zip(b).map(|(p, q)| p + q).collect();
                out.add_term(e, &(x * y));
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&Rational::from_int(-1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlin::{q, qi};
    use proptest::prelude::*;

    fn x(i: usize) -> Poly {
        Poly::var(3, i)
    }

    #[test]
    fn arithmetic_and_eval() {
        let p = &(&x(0) + &x(1)) * &(&x(0) - &x(1));
        let want = &x(0).pow(2) - &x(1).pow(2);
        assert_eq!(p, want);
        assert_eq!(p.eval(&[qi(3), qi(1), qi(0)]), qi(8));
        assert!((p.eval_f64(&[0.5, 0.25, 9.0]) - 0.1875).abs() < 1e-15);
        assert_eq!(p.degree(), Some(2));
        assert_eq!(Poly::zero(3).degree(), None);
    }

    #[test]
    fn derivative_and_composition() {
        let p = &x(0).pow(3) + &(&x(0) * &x(2)).scale(&q(1, 2));
        assert_eq!(p.derivative(0), &x(0).pow(2).scale(&qi(3)) + &x(2).scale(&q(1, 2)));
        let c = p.compose(&[&x(1) + &x(2), x(1), Poly::one(3)]);
        let s = &x(1) + &x(2);
        assert_eq!(c, &s.pow(3) + &s.scale(&q(1, 2)));
    }

    #[test]
    fn exact_division() {
        let a = &x(0) + &x(1).scale(&qi(2));
        let b = &(&x(0) * &x(2)) - &Poly::one(3);
        let prod = &a * &b;
        assert_eq!(prod.div_exact(&a), Some(b.clone()));
        assert_eq!(prod.div_exact(&b), Some(a.clone()));
        assert_eq!(prod.div_exact(&x(1)), None);
        assert_eq!((&prod + &Poly::one(3)).div_exact(&a), None);
    }

    #[test]
    fn degree_parts() {
        let p = &(&x(0) * &x(1)) + &x(2);
        assert_eq!(p.homogeneous_degree_in(0..2), None);
        assert_eq!(p.part_of_degree_in(0..2, 2), &x(0) * &x(1));
        assert_eq!(p.degrees_in(0..2), vec![0, 2]);
    }

    fn arb_poly() -> impl Strategy<Value = Poly> {
        proptest::collection::vec(((0u32..3, 0u32..3, 0u32..2), -4i64..5), 0..6).prop_map(|ts| {
            Poly::from_terms(3, ts.into_iter().map(|((a, b, c), k)| (vec![a, b, c], qi(k))))
        })
    }

    proptest! {
        #[test]
        fn ring_laws_and_division(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            if !b.is_zero() {
                prop_assert_eq!((&a * &b).div_exact(&b), Some(a.clone()));
            }
            // Leibniz rule
            prop_assert_eq!((&a * &b).derivative(1), &(&a.derivative(1) * &b) + &(&a * &b.derivative(1)));
        }
    }
}
