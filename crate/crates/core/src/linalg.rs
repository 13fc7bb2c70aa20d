//! Dense row-major matrices and LU factorization with partial pivoting.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[S] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [S] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Largest absolute entry; zero for an empty matrix.
    pub fn max_abs(&self) -> S {
        self.data.iter().fold(S::zero(), |m, &v| m.max(v.abs()))
    }
}

impl<S: Scalar> Index<(usize, usize)> for Matrix<S> {
    type Output = S;

    fn index(&self, (r, c): (usize, usize)) -> &S {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl<S: Scalar> IndexMut<(usize, usize)> for Matrix<S> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut S {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

/// LU decomposition `P·A = L·U` of a square matrix.
#[derive(Debug, Clone)]
pub struct LuFactors<S> {
    lu: Matrix<S>,
    perm: Vec<usize>,
}

impl<S: Scalar> LuFactors<S> {
    /// Factorizes with row partial pivoting; a pivot collapsing below the
    /// scaled machine tolerance reports the matrix as singular.
    pub fn factorize(a: Matrix<S>) -> Result<Self> {
        assert_eq!(a.rows(), a.cols(), "LU needs a square matrix");
        let n = a.rows();
        let tol = S::epsilon() * a.max_abs().max(S::one()) * crate::scalar::s::<S>(n as f64);
        let mut lu = a;
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (pivot_row, pivot_abs) =
                (k..n)
                    .map(|r| (r, lu[(r, k)].abs()))
                    .fold(
                        (k, S::zero()),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            if pivot_abs <= tol {
                return Err(Error::Singular(format!("pivot {pivot_abs} at column {k}")));
            }
            if pivot_row != k {
                perm.swap(k, pivot_row);
                for c in 0..n {
                    let tmp = lu[(k, c)];
                    lu[(k, c)] = lu[(pivot_row, c)];
                    lu[(pivot_row, c)] = tmp;
                }
            }
            let pivot = lu[(k, k)];
            for r in k + 1..n {
                let factor = lu[(r, k)] / pivot;
                lu[(r, k)] = factor;
                for c in k + 1..n {
                    let delta = factor * lu[(k, c)];
                    lu[(r, c)] -= delta;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    /// Solves `A·x = b`.
    pub fn solve(&self, b: &[S]) -> Vec<S> {
        let n = self.dim();
        assert_eq!(b.len(), n, "rhs length mismatch");
        let mut x: Vec<S> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 1..n {
            let (solved, rest) = x.split_at_mut(r);
            let mut acc = rest[0];
            for (c, &xc) in solved.iter().enumerate() {
                acc -= self.lu[(r, c)] * xc;
            }
            rest[0] = acc;
        }
        for r in (0..n).rev() {
            let mut acc = x[r];
            for (k, &xc) in x[r + 1..].iter().enumerate() {
                acc -= self.lu[(r, r + 1 + k)] * xc;
            }
            x[r] = acc / self.lu[(r, r)];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn solves_identity() {
        let eye = Matrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let lu = LuFactors::factorize(eye).unwrap();
        assert_eq!(lu.solve(&[3.0, -4.0]), vec![3.0, -4.0]);
    }

    #[test]
    fn solves_known_system() {
        let a = Matrix::from_rows(vec![
            vec![2.0, 1.0, -1.0],
            vec![-3.0, -1.0, 2.0],
            vec![-2.0, 1.0, 2.0],
        ]);
        let lu = LuFactors::factorize(a).unwrap();
        let x = lu.solve(&[8.0, -11.0, -3.0]);
        for (got, want) in x.iter().zip([2.0, 3.0, -1.0]) {
            assert_relative_eq!(*got, want, max_relative = 1e-12);
        }
    }

    #[test]
    fn pivots_through_zero_leading_entry() {
        let a = Matrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let lu = LuFactors::factorize(a).unwrap();
        assert_eq!(lu.solve(&[5.0, 7.0]), vec![7.0, 5.0]);
    }

    #[test]
    fn rejects_singular_matrix() {
        let a = Matrix::from_rows(vec![vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(matches!(LuFactors::factorize(a), Err(Error::Singular(_))));
    }

    #[test]
    fn works_in_single_precision() {
        let a = Matrix::from_rows(vec![vec![4.0f32, 1.0], vec![1.0, 3.0]]);
        let lu = LuFactors::factorize(a).unwrap();
        let x = lu.solve(&[1.0, 2.0]);
        assert_relative_eq!(4.0 * x[0] + x[1], 1.0f32, epsilon = 1e-5);
        assert_relative_eq!(x[0] + 3.0 * x[1], 2.0f32, epsilon = 1e-5);
    }

    #[test]
    fn symmetric_solve_matches_transposed_use() {
        let a = Matrix::from_rows(vec![
            vec![3.0, -1.0, 0.0],
            vec![-1.0, 2.0, -1.0],
            vec![0.0, -1.0, 3.0],
        ]);
        let lu = LuFactors::factorize(a.clone()).unwrap();
        let x = lu.solve(&[1.0, 0.0, 0.0]);
        let y = lu.solve(&[0.0, 0.0, 1.0]);
        assert_relative_eq!(x[2], y[0], max_relative = 1e-12);
    }
}
