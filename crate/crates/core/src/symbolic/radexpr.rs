use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::ToPrimitive;

use super::Poly;
use crate::exactlin::Rational;

/// A finite sum `Σ P_e · Π_k D_k^{e_k}` of polynomials times rational powers
/// of fixed base polynomials `D_k`.
///
/// Bases are assumed positive on the domain of interest, pairwise coprime and
/// squarefree, and not perfect powers. Under these assumptions terms whose
/// exponent vectors differ by a non-integer amount are linearly independent
/// over polynomials, which makes the normal form below a decision procedure
/// for zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RadExpr {
    nvars: usize,
    bases: Vec<Poly>,
    terms: BTreeMap<Vec<Rational>, Poly>,
}

fn floor(r: &Rational) -> i64 {
    let n = r.numer();
    let d = r.denom();
    n.div_floor(&d).to_i64().expect("exponent fits in i64")
}

impl RadExpr {
    pub fn zero(nvars: usize) -> Self {
        RadExpr { nvars, bases: Vec::new(), terms: BTreeMap::new() }
    }

    pub fn from_poly(p: Poly) -> Self {
        let nvars = p.nvars();
        let mut r = RadExpr::zero(nvars);
        if !p.is_zero() {
            r.terms.insert(Vec::new(), p);
        }
        r
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        RadExpr::from_poly(Poly::constant(nvars, c))
    }

    /// `coeff · base^exp`.
    pub fn power(coeff: Poly, base: Poly, exp: Rational) -> Self {
        let nvars = coeff.nvars();
        let mut r = RadExpr { nvars, bases: vec![base], terms: BTreeMap::new() };
        if !coeff.is_zero() {
            r.terms.insert(vec![exp], coeff);
        }
        r.normalize()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn bases(&self) -> &[Poly] {
        &self.bases
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<Rational>, &Poly)> {
        self.terms.iter()
    }

    fn exps_of(&self, e: &[Rational]) -> Vec<Rational> {
        let mut v = e.to_vec();
        v.resize(self.bases.len(), Rational::zero());
        v
    }

    /// Rewrites both operands over the union of their bases.
    fn aligned(&self, other: &RadExpr) -> (RadExpr, RadExpr) {
        assert_eq!(self.nvars, other.nvars, "variable count");
        let mut bases = self.bases.clone();
        let mut map = Vec::with_capacity(other.bases.len());
        for b in &other.bases {
            match bases.iter().position(|x| x == b) {
                Some(i) => map.push(i),
                None => {
                    bases.push(b.clone());
                    map.push(bases.len() - 1);
                }
            }
        }
        let k = bases.len();
        let lift_self = self
            .terms
            .iter()
            .map(|(e, p)| {
                let mut v = e.clone();
                v.resize(k, Rational::zero());
                (v, p.clone())
            })
            .collect();
        let lift_other = other
            .terms
            .iter()
            .map(|(e, p)| {
                let mut v = vec![Rational::zero(); k];
                for (i, x) in e.iter().enumerate() {
                    v[map[i]] = x.clone();
                }
                (v, p.clone())
            })
            .collect();
        (
            RadExpr { nvars: self.nvars, bases: bases.clone(), terms: lift_self },
            RadExpr { nvars: self.nvars, bases, terms: lift_other },
        )
    }

    fn push(&mut self, e: Vec<Rational>, p: Poly) {
        if p.is_zero() {
            return;
        }
        let e = self.exps_of(&e);
        match self.terms.get_mut(&e) {
            Some(q) => {
                *q = &*q + &p;
                if q.is_zero() {
                    self.terms.remove(&e);
                }
            }
            None => {
                self.terms.insert(e, p);
            }
        }
    }

    /// Normal form: one term per class of exponents modulo integers, with
    /// every base factor that divides the coefficient absorbed into the power.
    pub fn normalize(&self) -> RadExpr {
        let k = self.bases.len();
        let mut classes: BTreeMap<Vec<Rational>, Vec<(Vec<i64>, &Poly)>> = BTreeMap::new();
        for (e, p) in &self.terms {
            let e = self.exps_of(e);
            let fl: Vec<i64> = e.iter().map(floor).collect();
            let frac: Vec<Rational> = e.iter().zip(&fl).map(|(x, f)| x - Rational::from_int(*f)).collect();
            classes.entry(frac).or_default().push((fl, p));
        }
        let mut out = RadExpr { nvars: self.nvars, bases: self.bases.clone(), terms: BTreeMap::new() };
        for (frac, members) in classes {
            let m0: Vec<i64> = (0..k).map(|i| members.iter().map(|m| m.0[i]).min().expect("nonempty")).collect();
            let mut sum = Poly::zero(self.nvars);
            for (fl, p) in members {
                let mut t = p.clone();
                for i in 0..k {
                    let d = (fl[i] - m0[i]) as u32;
                    if d > 0 {
                        t = &t * &self.bases[i].pow(d);
                    }
                }
                sum = &sum + &t;
            }
            if sum.is_zero() {
                continue;
            }
            let mut exps: Vec<Rational> = frac.iter().zip(&m0).map(|(f, m)| f + Rational::from_int(*m)).collect();
            // absorb base factors
            loop {
                let mut changed = false;
                for i in 0..k {
                    if self.bases[i].as_constant().is_some() {
                        continue;
                    }
                    if let Some(qt) = sum.div_exact(&self.bases[i]) {
                        sum = qt;
                        exps[i] += Rational::one();
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
            out.terms.insert(exps, sum);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.normalize().terms.is_empty()
    }

    /// The polynomial this expression equals, if it is one.
    pub fn to_poly(&self) -> Option<Poly> {
        let n = self.normalize();
        let mut acc = Poly::zero(self.nvars);
        for (e, p) in &n.terms {
            let mut t = p.clone();
            for (i, x) in e.iter().enumerate() {
                if x.is_zero() {
                    continue;
                }
                if !x.is_integer() || x.is_negative() {
                    return None;
                }
                t = &t * &n.bases[i].pow(x.to_f64() as u32);
            }
            acc = &acc + &t;
        }
        Some(acc)
    }

    pub fn add(&self, other: &RadExpr) -> RadExpr {
        let (mut a, b) = self.aligned(other);
        for (e, p) in b.terms {
            a.push(e, p);
        }
        a
    }

    pub fn sub(&self, other: &RadExpr) -> RadExpr {
        self.add(&other.scale(&Rational::from_int(-1)))
    }

    pub fn scale(&self, c: &Rational) -> RadExpr {
        let mut out = RadExpr { nvars: self.nvars, bases: self.bases.clone(), terms: BTreeMap::new() };
        for (e, p) in &self.terms {
            out.push(e.clone(), p.scale(c));
        }
        out
    }

    pub fn mul(&self, other: &RadExpr) -> RadExpr {
        let (a, b) = self.aligned(other);
        let mut out = RadExpr { nvars: self.nvars, bases: a.bases.clone(), terms: BTreeMap::new() };
        for (e1, p1) in &a.terms {
            for (e2, p2) in &b.terms {
                let e: Vec<Rational> = e1.iter().zip(e2).map(|(x, y)| x + y).collect();
                out.push(e, p1 * p2);
            }
        }
        out
    }

    pub fn mul_poly(&self, p: &Poly) -> RadExpr {
        let mut out = RadExpr { nvars: self.nvars, bases: self.bases.clone(), terms: BTreeMap::new() };
        for (e, q) in &self.terms {
            out.push(e.clone(), q * p);
        }
        out
    }

    pub fn derivative(&self, i: usize) -> RadExpr {
        let mut out = RadExpr { nvars: self.nvars, bases: self.bases.clone(), terms: BTreeMap::new() };
        let dbases: Vec<Poly> = self.bases.iter().map(|b| b.derivative(i)).collect();
        for (e, p) in &self.terms {
            let e = self.exps_of(e);
            out.push(e.clone(), p.derivative(i));
            for k in 0..self.bases.len() {
                if e[k].is_zero() || dbases[k].is_zero() {
                    continue;
                }
                let mut e2 = e.clone();
                e2[k] -= Rational::one();
                out.push(e2, &p.scale(&e[k]) * &dbases[k]);
            }
        }
        out
    }

    /// `Σ w_i ∂/∂x_{offset+i}` with expression weights.
    pub fn directional(&self, offset: usize, w: &[RadExpr]) -> RadExpr {
        let mut out = RadExpr::zero(self.nvars);
        for (i, wi) in w.iter().enumerate() {
            if wi.terms.is_empty() {
                continue;
            }
            out = out.add(&wi.mul(&self.derivative(offset + i)));
        }
        out
    }

    /// Same, with polynomial weights.
    pub fn directional_poly(&self, offset: usize, w: &[Poly]) -> RadExpr {
        let mut out = RadExpr { nvars: self.nvars, bases: self.bases.clone(), terms: BTreeMap::new() };
        for (i, wi) in w.iter().enumerate() {
            if wi.is_zero() {
                continue;
            }
            out = out.add(&self.derivative(offset + i).mul_poly(wi));
        }
        out
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        let bvals: Vec<f64> = self.bases.iter().map(|b| b.eval_f64(x)).collect();
        self.terms
            .iter()
            .map(|(e, p)| {
                let mut t = p.eval_f64(x);
                for (i, ex) in e.iter().enumerate() {
                    if ex.is_zero() {
                        continue;
                    }
                    t *= if ex.is_integer() {
                        bvals[i].powi(ex.to_f64() as i32)
                    } else {
                        bvals[i].powf(ex.to_f64())
                    };
                }
                t
            })
            .sum()
    }

    /// Exact evaluation when every occurring exponent is an integer.
    pub fn eval(&self, x: &[Rational]) -> Option<Rational> {
        let mut acc = Rational::zero();
        for (e, p) in &self.terms {
            let mut t = p.eval(x);
            for (i, ex) in e.iter().enumerate() {
                if ex.is_zero() {
                    continue;
                }
                if !ex.is_integer() {
                    return None;
                }
                let b = self.bases[i].eval(x);
                if b.is_zero() && ex.is_negative() {
                    return None;
                }
                t *= b.pow(ex.to_f64() as i32);
            }
            acc += t;
        }
        Some(acc)
    }

    /// Splits each coefficient polynomial by degree in the variables `range`.
    pub fn part_of_degree_in(&self, range: std::ops::Range<usize>, d: u32) -> RadExpr {
        let mut out = RadExpr { nvars: self.nvars, bases: self.bases.clone(), terms: BTreeMap::new() };
        for (e, p) in &self.terms {
            out.push(e.clone(), p.part_of_degree_in(range.clone(), d));
        }
        out
    }

    pub fn degrees_in(&self, range: std::ops::Range<usize>) -> Vec<u32> {
        let mut ds: Vec<u32> = self.terms.values().flat_map(|p| p.degrees_in(range.clone())).collect();
        ds.sort_unstable();
        ds.dedup();
        ds
    }

    /// Re-embeds the variables (see [`Poly::remap`]).
    pub fn remap(&self, nvars: usize, map: &[usize]) -> RadExpr {
        RadExpr {
            nvars,
            bases: self.bases.iter().map(|b| b.remap(nvars, map)).collect(),
            terms: self.terms.iter().map(|(e, p)| (e.clone(), p.remap(nvars, map))).collect(),
        }
    }

    /// Replaces every base `D_k` by `D'_k · Π_j E_j^{c_kj}`: `new_bases[k]`
    /// is `D'_k`, `extra` lists the new factors `E_j` and `shift[k][j]` the
    /// exponents `c_kj`. Bases and extras must be over `nvars` variables.
    pub(crate) fn rebase(
        &self,
        coeff_map: impl Fn(&Poly) -> RadExpr,
        new_bases: &[Poly],
        extra: &[Poly],
        shift: &[Vec<Rational>],
    ) -> RadExpr {
        let k = self.bases.len();
        let mut bases: Vec<Poly> = new_bases.to_vec();
        bases.extend(extra.iter().cloned());
        let nvars = bases.first().map_or(self.nvars, |b| b.nvars());
        let mut out = RadExpr { nvars, bases: bases.clone(), terms: BTreeMap::new() };
        for (e, p) in &self.terms {
            let e = self.exps_of(e);
            let mut exps = vec![Rational::zero(); bases.len()];
            for i in 0..k {
                exps[i] = e[i].clone();
                for (j, c) in shift[i].iter().enumerate() {
                    exps[k + j] += &e[i] * c;
                }
            }
            let factor = RadExpr { nvars, bases: bases.clone(), terms: [(exps, Poly::one(nvars))].into() };
            out = out.add(&coeff_map(p).mul(&factor));
        }
        out
    }
}
