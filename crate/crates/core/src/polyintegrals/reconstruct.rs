use super::bihom::monomials;
use super::IntegralError;
use crate::exactlin::{LinError, Matrix, Rational};
use crate::symbolic::Poly;

/// An open axis-aligned box `lo < x < hi`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBox {
    pub lo: Vec<Rational>,
    pub hi: Vec<Rational>,
}

impl SampleBox {
    pub fn new(lo: Vec<Rational>, hi: Vec<Rational>) -> Result<Self, IntegralError> {
        if lo.len() != hi.len() {
            return Err(LinError::DimMismatch { expected: lo.len(), got: hi.len() }.into());
        }
        if lo.iter().zip(&hi).any(|(a, b)| a >= b) {
            return Err(IntegralError::Domain("empty sample box".into()));
        }
        Ok(SampleBox { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// `lo + (hi − lo)·t` componentwise.
    fn at(&self, t: &[Rational]) -> Vec<Rational> {
        (0..self.dim()).map(|i| &self.lo[i] + &(&(&self.hi[i] - &self.lo[i]) * &t[i])).collect()
    }
}

/// Exponents of total degree `≤ k` in `m` variables.
fn low_degree_monomials(m: usize, k: u32) -> Vec<Vec<u32>> {
    monomials(m + 1, k)
        .into_iter()
        .map(|mut e| {
            e.pop();
            e
        })
        .collect()
}

fn mono_value(x: &[Rational], e: &[u32]) -> Rational {
    x.iter().zip(e).map(|(xi, &k)| xi.pow(k as i32)).product()
}

/// Principal lattice `(α + ½ + δ)/(k+1)` with `|α| ≤ k`, mapped into the
/// box; `δ` is a small deterministic shift used when resampling.
fn lattice(bx: &SampleBox, k: u32, attempt: usize) -> Vec<Vec<Rational>> {
    let m = bx.dim();
    low_degree_monomials(m, k)
        .iter()
        .map(|alpha| {
            let t: Vec<Rational> = (0..m)
                .map(|i| {
                    let delta = Rational::new((attempt * (i + 1)) as i64, 17 * (m as i64 + 1));
                    &(&Rational::from_int(alpha[i] as i64) + &Rational::new(1, 2)) + &delta
                })
                .map(|a| &a / &Rational::from_int(k as i64 + 1))
                .collect();
            bx.at(&t)
        })
        .collect()
}

fn vandermonde(points: &[Vec<Rational>], monos: &[Vec<u32>]) -> Matrix {
    Matrix::from_fn(points.len(), monos.len(), |p, c| mono_value(&points[p], &monos[c]))
}

/// Deterministic test points strictly inside the box.
fn fresh_points(bx: &SampleBox, count: usize, seed: u64) -> Vec<Vec<Rational>> {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (0..count)
        .map(|_| {
            let t: Vec<Rational> = (0..bx.dim())
                .map(|_| {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    Rational::new(1 + ((state >> 33) % 95) as i64, 97)
                })
                .collect();
            bx.at(&t)
        })
        .collect()
}

const ATTEMPTS: usize = 4;

/// Recovers a polynomial `F(x, y)` of degree `≤ k` in `x` and `≤ l` in `y`
/// from its values on the product of two boxes, by tensor-product
/// interpolation `C = Vx⁻¹ F Vy⁻ᵀ`. Variables are `x` first, then `y`.
///
/// The oracle returns `None` outside its domain.
pub fn reconstruct_polynomial<F>(
    mut oracle: F,
    k: u32,
    l: u32,
    xbox: &SampleBox,
    ybox: &SampleBox,
) -> Result<Poly, IntegralError>
where
    F: FnMut(&[Rational], &[Rational]) -> Option<Rational>,
{
    let (m, n) = (xbox.dim(), ybox.dim());
    let xm = low_degree_monomials(m, k);
    let ym = low_degree_monomials(n, l);
    let mut call = |x: &[Rational], y: &[Rational]| {
        oracle(x, y).ok_or_else(|| IntegralError::Domain("oracle undefined at a sample point".into()))
    };
    for attempt in 0..ATTEMPTS {
        let xs = lattice(xbox, k, attempt);
        let ys = lattice(ybox, l, attempt);
        let (Some(vx_inv), Some(vy_inv)) = (vandermonde(&xs, &xm).inverse(), vandermonde(&ys, &ym).inverse())
        else {
            continue;
        };
        let mut f = Matrix::zeros(xs.len(), ys.len());
        for (i, x) in xs.iter().enumerate() {
            for (j, y) in ys.iter().enumerate() {
                f[(i, j)] = call(x, y)?;
            }
        }
        let c = vx_inv.mul(&f)?.mul(&vy_inv.transpose())?;
        let mut p = Poly::zero(m + n);
        for (a, ea) in xm.iter().enumerate() {
            for (b, eb) in ym.iter().enumerate() {
                let mut e = ea.clone();
                e.extend_from_slice(eb);
                p.add_term(e, &c[(a, b)]);
            }
        }
        let tx = fresh_points(xbox, 6, 11 + attempt as u64);
        let ty = fresh_points(ybox, 6, 23 + attempt as u64);
        for x in &tx {
            for y in &ty {
                let mut z = x.clone();
                z.extend_from_slice(y);
                if p.eval(&z) != call(x, y)? {
                    return Err(IntegralError::NotPolynomial);
                }
            }
        }
        return Ok(p);
    }
    Err(IntegralError::GeneralPosition(ATTEMPTS))
}
