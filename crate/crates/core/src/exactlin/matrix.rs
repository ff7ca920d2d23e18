use std::fmt;

use super::{check_dim, combinations, LinError, Rational};

/// Dense row-major matrix of exact rationals.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Rows must all have the same length; with no rows the column count is `cols_if_empty`.
    pub fn from_rows(rows: &[Vec<Rational>], cols_if_empty: usize) -> Result<Self, LinError> {
        let cols = rows.first().map_or(cols_if_empty, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            check_dim(cols, r.len())?;
            data.extend(r.iter().cloned());
        }
        Ok(Matrix { rows: rows.len(), cols, data })
    }

    pub fn from_cols(cols: &[Vec<Rational>], rows_if_empty: usize) -> Result<Self, LinError> {
        Ok(Matrix::from_rows(cols, rows_if_empty)?.transpose())
    }

    pub fn diag(d: &[Rational]) -> Self {
        let mut m = Matrix::zeros(d.len(), d.len());
        for (i, x) in d.iter().enumerate() {
            m[(i, i)] = x.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Rational::is_zero)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn scale(&self, c: &Rational) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * c).collect() }
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix, LinError> {
        check_dim(self.rows, other.rows)?;
        check_dim(self.cols, other.cols)?;
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix, LinError> {
        self.add(&other.scale(&Rational::from_int(-1)))
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix, LinError> {
        check_dim(self.cols, other.rows)?;
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Result<Vec<Rational>, LinError> {
        check_dim(self.cols, v.len())?;
        Ok((0..self.rows).map(|i| super::dot(self.row(i), v)).collect())
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = m[(r, c)].recip().expect("nonzero pivot");
            for j in c..m.cols {
                let v = &m[(r, j)] * &inv;
                m[(r, j)] = v;
            }
            for i in 0..m.rows {
                if i == r || m[(i, c)].is_zero() {
                    continue;
                }
                let f = m[(i, c)].clone();
                for j in c..m.cols {
                    if m[(r, j)].is_zero() {
                        continue;
                    }
                    let v = &m[(i, j)] - &(&f * &m[(r, j)]);
                    m[(i, j)] = v;
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the null space, one vector per free column.
    pub fn kernel(&self) -> Vec<Vec<Rational>> {
        let (r, pivots) = self.rref();
        let mut out = Vec::new();
        for free in (0..self.cols).filter(|c| !pivots.contains(c)) {
            let mut v = vec![Rational::zero(); self.cols];
            v[free] = Rational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -&r[(row, free)];
            }
            out.push(v);
        }
        out
    }

    /// Some solution of `self · x = b`, if one exists.
    pub fn solve(&self, b: &[Rational]) -> Result<Option<Vec<Rational>>, LinError> {
        check_dim(self.rows, b.len())?;
        let aug = Matrix::from_fn(self.rows, self.cols + 1, |i, j| {
            if j < self.cols {
                self[(i, j)].clone()
            } else {
                b[i].clone()
            }
        });
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return Ok(None);
        }
        let mut x = vec![Rational::zero(); self.cols];
        for (row, &pc) in pivots.iter().enumerate() {
            x[pc] = r[(row, self.cols)].clone();
        }
        Ok(Some(x))
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let aug = Matrix::from_fn(n, 2 * n, |i, j| {
            if j < n {
                self[(i, j)].clone()
            } else if j - n == i {
                Rational::one()
            } else {
                Rational::zero()
            }
        });
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        Some(Matrix::from_fn(n, n, |i, j| r[(i, j + n)].clone()))
    }

    pub fn det(&self) -> Rational {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let mut m = self.clone();
        let n = self.rows;
        let mut det = Rational::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !m[(i, c)].is_zero()) else {
                return Rational::zero();
            };
            if p != c {
                m.swap_rows(p, c);
                det = -det;
            }
            let piv = m[(c, c)].clone();
            det *= &piv;
            let inv = piv.recip().expect("nonzero pivot");
            for i in c + 1..n {
                if m[(i, c)].is_zero() {
                    continue;
                }
                let f = &m[(i, c)] * &inv;
                for j in c..n {
                    let v = &m[(i, j)] - &(&f * &m[(c, j)]);
                    m[(i, j)] = v;
                }
            }
        }
        det
    }

    /// Matrix of `Λ^k` in the lexicographic bases of `k`-subsets:
    /// entry `(I, J)` is the minor on rows `I`, columns `J`.
    pub fn exterior_power(&self, k: usize) -> Matrix {
        let rsets = combinations(self.rows, k);
        let csets = combinations(self.cols, k);
        Matrix::from_fn(rsets.len(), csets.len(), |a, b| {
            let sub = Matrix::from_fn(k, k, |i, j| self[(rsets[a][i], csets[b][j])].clone());
            sub.det()
        })
    }

    /// A basis of the column space, as columns of the input.
    pub fn column_basis(&self) -> Vec<Vec<Rational>> {
        let (_, pivots) = self.rref();
        pivots.iter().map(|&c| self.col(c)).collect()
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlin::{q, qi, qvec};
    use proptest::prelude::*;

    fn m(rows: &[&[i64]]) -> Matrix {
        let r: Vec<Vec<Rational>> = rows.iter().map(|r| qvec(r)).collect();
        Matrix::from_rows(&r, 0).unwrap()
    }

    #[test]
    fn kernel_examples() {
        assert!(Matrix::identity(3).kernel().is_empty());
        assert_eq!(Matrix::zeros(3, 3).kernel().len(), 3);
        let k = Matrix::diag(&qvec(&[1, 0, 0])).kernel();
        assert_eq!(k, vec![qvec(&[0, 1, 0]), qvec(&[0, 0, 1])]);
    }

    #[test]
    fn inverse_and_det() {
        let a = m(&[&[2, 1], &[7, 4]]);
        assert_eq!(a.det(), qi(1));
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv).unwrap(), Matrix::identity(2));
        assert!(m(&[&[1, 2], &[2, 4]]).inverse().is_none());
        assert_eq!(m(&[&[0, 1], &[1, 0]]).det(), qi(-1));
    }

    #[test]
    fn solve_consistent_and_not() {
        let a = m(&[&[1, 1], &[2, 2]]);
        let x = a.solve(&qvec(&[3, 6])).unwrap().unwrap();
        assert_eq!(a.mul_vec(&x).unwrap(), qvec(&[3, 6]));
        assert!(a.solve(&qvec(&[3, 5])).unwrap().is_none());
    }

    #[test]
    fn exterior_power_is_multiplicative() {
        let a = m(&[&[1, 2, 0], &[0, 1, 3], &[4, 0, 1]]);
        let b = m(&[&[2, 0, 1], &[1, 1, 0], &[0, 5, 1]]);
        let ab = a.mul(&b).unwrap();
        assert_eq!(
            ab.exterior_power(2),
            a.exterior_power(2).mul(&b.exterior_power(2)).unwrap()
        );
        assert_eq!(a.exterior_power(3)[(0, 0)], a.det());
        let _ = q(1, 2);
    }

    fn arb_matrix() -> impl Strategy<Value = Matrix> {
        (1usize..5, 1usize..6).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-3i64..4, r * c).prop_map(move |v| {
                Matrix::from_fn(r, c, |i, j| qi(v[i * c + j]))
            })
        })
    }

    proptest! {
        #[test]
        fn rank_nullity(a in arb_matrix()) {
            let k = a.kernel();
            prop_assert_eq!(a.rank() + k.len(), a.cols());
            for v in &k {
                prop_assert!(a.mul_vec(v).unwrap().iter().all(Rational::is_zero));
            }
            let km = Matrix::from_rows(&k, a.cols()).unwrap();
            prop_assert_eq!(km.rank(), k.len());
        }
    }
}
