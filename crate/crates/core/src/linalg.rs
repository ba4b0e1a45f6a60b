//! Dense square matrices and a cyclic Jacobi eigensolver for real symmetric
//! matrices.
//!
//! Correlation matrices in this toolkit are small (tens of indices), so the
//! Jacobi method is accurate and fast enough; it also yields eigenvectors
//! that are orthonormal to working precision, which the reconstruction
//! checks rely on.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Square matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Matrix { n, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().position(|r| r.len() != n) {
            return Err(Error::InvalidParameter(format!(
                "row {bad} has {} entries, expected {n}",
                rows[bad].len()
            )));
        }
        Ok(Matrix {
            n,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| (i + 1..self.n).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }

    /// Largest absolute elementwise difference.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.n, other.n, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn off_diagonal_norm(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    acc += self[(i, j)] * self[(i, j)];
                }
            }
        }
        acc.sqrt()
    }

    /// Returns the matrix with rows and columns reordered so that entry
    /// `(i, j)` of the result is entry `(perm[i], perm[j])` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Matrix {
        assert_eq!(perm.len(), self.n);
        Matrix::from_fn(self.n, |i, j| self[(perm[i], perm[j])])
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Eigensystem of a real symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Column `k` is the unit eigenvector for `values[k]`.
    pub vectors: Matrix,
    /// Number of plane rotations applied.
    pub rotations: usize,
    /// Off-diagonal Frobenius norm left after the last sweep.
    pub residual: f64,
}

impl SymmetricEigen {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }

    /// `U Λ Uᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let n = self.values.len();
        let u = &self.vectors;
        Matrix::from_fn(n, |i, j| {
            (0..n).map(|k| u[(i, k)] * self.values[k] * u[(j, k)]).sum()
        })
    }
}

/// Relative off-diagonal tolerance at which the sweeps stop.
pub const JACOBI_TOLERANCE: f64 = 1e-12;

/// Diagonalizes a symmetric matrix with cyclic Jacobi rotations.
///
/// Stops once the off-diagonal norm falls below `JACOBI_TOLERANCE` times the
/// Frobenius norm of the input, or after `100·n²` rotations. Hitting the cap
/// without meeting the tolerance is an error carrying the residual.
///
/// Eigenvalues come back ascending. Each eigenvector is signed so that its
/// largest-magnitude component (first one on ties) is non-negative.
pub fn symmetric_eigen(a: &Matrix) -> Result<SymmetricEigen> {
    let n = a.dim();
    if a.as_slice().iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("matrix passed to eigensolver".into()));
    }
    if !a.is_symmetric(1e-12 * a.frobenius_norm().max(1.0)) {
        return Err(Error::InvalidParameter(
            "eigensolver input is not symmetric".into(),
        ));
    }

    let mut w = a.clone();
    let mut v = Matrix::identity(n);
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let cap = 100 * n * n;
    let mut rotations = 0usize;
    let mut sweep = 0usize;

    let residual = loop {
        let off = w.off_diagonal_norm();
        if off <= JACOBI_TOLERANCE * scale {
            break off;
        }
        if rotations >= cap {
            return Err(Error::NoConvergence {
                rotations,
                residual: off,
            });
        }
        sweep += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = w[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = w[(p, p)];
                let aqq = w[(q, q)];
                // Late sweeps: an element negligible against both diagonal
                // entries is flushed instead of rotated.
                let g = 100.0 * apq.abs();
                if sweep > 4 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    w[(p, q)] = 0.0;
                    w[(q, p)] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = w[(k, p)];
                    let akq = w[(k, q)];
                    let np = c * akp - s * akq;
                    let nq = s * akp + c * akq;
                    w[(k, p)] = np;
                    w[(p, k)] = np;
                    w[(k, q)] = nq;
                    w[(q, k)] = nq;
                }
                w[(p, p)] = app - t * apq;
                w[(q, q)] = aqq + t * apq;
                w[(p, q)] = 0.0;
                w[(q, p)] = 0.0;

                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
                rotations += 1;
            }
        }
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w[(i, i)].total_cmp(&w[(j, j)]).then(i.cmp(&j)));
    let values: Vec<f64> = order.iter().map(|&k| w[(k, k)]).collect();
    let mut vectors = Matrix::zeros(n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src);
        orient(&mut col);
        for (i, x) in col.into_iter().enumerate() {
            vectors[(i, dst)] = x;
        }
    }

    Ok(SymmetricEigen {
        values,
        vectors,
        rotations,
        residual,
    })
}

/// Flips the sign of `v` so that its largest-magnitude entry is non-negative.
fn orient(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_closed_form() {
        let rho = 0.3;
        let a = Matrix::from_rows(&[vec![1.0, rho], vec![rho, 1.0]]).unwrap();
        let eig = symmetric_eigen(&a).unwrap();
        assert!((eig.values[0] - (1.0 - rho)).abs() < 1e-14);
        assert!((eig.values[1] - (1.0 + rho)).abs() < 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let u0 = eig.vector(0);
        let u1 = eig.vector(1);
        // (1, -1)/√2 oriented so the first (tied-largest) entry is positive.
        assert!((u0[0] - h).abs() < 1e-14 && (u0[1] + h).abs() < 1e-14);
        assert!((u1[0] - h).abs() < 1e-14 && (u1[1] - h).abs() < 1e-14);
    }

    #[test]
    fn diagonal_input_needs_no_rotation() {
        let a = Matrix::from_fn(4, |i, j| if i == j { (4 - i) as f64 } else { 0.0 });
        let eig = symmetric_eigen(&a).unwrap();
        assert_eq!(eig.rotations, 0);
        assert_eq!(eig.values, vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn rejects_asymmetric_and_non_finite() {
        let a = Matrix::from_rows(&[vec![1.0, 0.5], vec![0.4, 1.0]]).unwrap();
        assert!(matches!(
            symmetric_eigen(&a),
            Err(Error::InvalidParameter(_))
        ));
        let b = Matrix::from_rows(&[vec![1.0, f64::NAN], vec![f64::NAN, 1.0]]).unwrap();
        assert!(matches!(symmetric_eigen(&b), Err(Error::NonFinite(_))));
    }

    #[test]
    fn empty_matrix() {
        let eig = symmetric_eigen(&Matrix::zeros(0)).unwrap();
        assert!(eig.values.is_empty());
    }

    #[test]
    fn reconstruction_of_dense_matrix() {
        let a = Matrix::from_fn(6, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
        let eig = symmetric_eigen(&a).unwrap();
        assert!(eig.reconstruct().max_abs_diff(&a) < 1e-13);
        for k in 0..6 {
            let u = eig.vector(k);
            let norm: f64 = u.iter().map(|x| x * x).sum();
            assert!((norm - 1.0).abs() < 1e-13);
        }
    }
}
