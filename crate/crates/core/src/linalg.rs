//! Dense Gaussian elimination with partial pivoting.
//!
//! The SHS systems here have at most a few dozen unknowns, so a direct dense
//! solve is all that is needed.

use crate::scalar::Scalar;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    size: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(size: usize) -> Self {
        Self {
            size,
            data: vec![T::zero(); size * size],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, row: usize, col: usize) -> &T {
        &self.data[row * self.size + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: T) {
        self.data[row * self.size + col] = value;
    }

    pub fn add_to(&mut self, row: usize, col: usize, value: T) {
        let idx = row * self.size + col;
        let cur = std::mem::replace(&mut self.data[idx], T::zero());
        self.data[idx] = cur + value;
    }

    pub fn row(&self, row: usize) -> &[T] {
        &self.data[row * self.size..(row + 1) * self.size]
    }

    /// `A x` for a column vector `x`.
    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.size)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(x)
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| {
            let a = v.abs();
            if a > m {
                a
            } else {
                m
            }
        })
    }
}

/// Elimination failed: no acceptable pivot in `column`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Singular {
    pub column: usize,
}

/// Solves `A x = rhs`.
pub fn solve<T: Scalar>(matrix: &DenseMatrix<T>, rhs: &[T]) -> Result<Vec<T>, Singular> {
    let n = matrix.size();
    assert_eq!(rhs.len(), n, "right-hand side length");
    let threshold = matrix.max_abs() * T::singular_tolerance();

    let mut a: Vec<Vec<T>> = (0..n).map(|r| matrix.row(r).to_vec()).collect();
    let mut b = rhs.to_vec();

    for col in 0..n {
        let mut pivot_row = col;
        let mut best = a[col][col].abs();
        for (r, row) in a.iter().enumerate().skip(col + 1) {
            let cand = row[col].abs();
            if cand > best {
                best = cand;
                pivot_row = r;
            }
        }
        if best.is_zero() || best <= threshold {
            return Err(Singular { column: col });
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);

        let pivot = a[col][col].clone();
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone() / pivot.clone();
            for c in col..n {
                let delta = factor.clone() * a[col][c].clone();
                a[r][c] = a[r][c].clone() - delta;
            }
            let delta = factor * b[col].clone();
            b[r] = b[r].clone() - delta;
        }
    }

    let mut x = vec![T::zero(); n];
    for r in (0..n).rev() {
        let mut acc = b[r].clone();
        for c in r + 1..n {
            acc = acc - a[r][c].clone() * x[c].clone();
        }
        x[r] = acc / a[r][r].clone();
    }
    Ok(x)
}
