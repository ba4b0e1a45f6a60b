//! Equal-time correlation matrices and their spectra.
//!
//! Returns inside any window are re-normalized with that window's own mean
//! and standard deviation, so every correlation matrix has an exact unit
//! diagonal and trace `N`.

mod mp;
mod window;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, Matrix};
use crate::panel::returns_moments;
use crate::panel::{DateRange, ReturnPanel};

pub use mp::{mp_bounds, mp_compare, mp_density, MpComparison, MpLaw};
pub use window::{sliding_spectra, SkippedWindow, SlidingSpectra, WindowTrace};

/// The calendar span a correlation matrix was estimated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorrWindow {
    pub start: NaiveDate,
    pub end: NaiveDate,
    /// Number of returns used.
    pub len: usize,
}

/// Symmetric correlation matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrMatrix {
    labels: Vec<String>,
    matrix: Matrix,
    window: Option<CorrWindow>,
}

impl CorrMatrix {
    /// Wraps a user-supplied matrix after checking the correlation
    /// invariants (unit diagonal, symmetry, entries in `[-1, 1]`).
    pub fn new(labels: Vec<String>, matrix: Matrix) -> Result<Self> {
        let n = matrix.dim();
        if labels.len() != n {
            return Err(Error::InvalidParameter(format!(
                "{} labels for a {n}x{n} matrix",
                labels.len()
            )));
        }
        for i in 0..n {
            if matrix[(i, i)] != 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "diagonal entry {i} is {} (must be 1)",
                    matrix[(i, i)]
                )));
            }
            for j in 0..n {
                let c = matrix[(i, j)];
                if !(-1.0..=1.0).contains(&c) || c != matrix[(j, i)] {
                    return Err(Error::InvalidParameter(format!(
                        "entry ({i}, {j}) = {c} breaks symmetry or bounds"
                    )));
                }
            }
        }
        Ok(CorrMatrix {
            labels,
            matrix,
            window: None,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn window(&self) -> Option<CorrWindow> {
        self.window
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    /// Upper-triangle entries `C_ij`, `i < j`, row by row.
    pub fn off_diagonal(&self) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| self.matrix[(i, j)])
            .collect()
    }

    pub fn mean_off_diagonal(&self) -> f64 {
        let off = self.off_diagonal();
        off.iter().sum::<f64>() / off.len() as f64
    }

    /// `<|C|>_m = Σ_{k≠m} |C_mk| / (N - 1)` for every index `m`.
    pub fn mean_abs_correlation(&self) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|m| {
                (0..n)
                    .filter(|&k| k != m)
                    .map(|k| self.matrix[(m, k)].abs())
                    .sum::<f64>()
                    / (n - 1) as f64
            })
            .collect()
    }

    /// Same matrix with indices reordered: entry `(i, j)` becomes
    /// `(perm[i], perm[j])` of the original.
    pub fn permuted(&self, perm: &[usize]) -> CorrMatrix {
        CorrMatrix {
            labels: perm.iter().map(|&p| self.labels[p].clone()).collect(),
            matrix: self.matrix.permuted(perm),
            window: self.window,
        }
    }
}

/// Correlation matrix of the returns, optionally restricted to the return
/// dates inside `window`.
pub fn correlation(returns: &ReturnPanel, window: Option<&DateRange>) -> Result<CorrMatrix> {
    let cols = match window {
        Some(w) => w.select(returns.dates()),
        None => 0..returns.len(),
    };
    correlation_columns(returns, cols)
}

/// Correlation over return columns `cols`.
pub fn correlation_columns(
    returns: &ReturnPanel,
    cols: std::ops::Range<usize>,
) -> Result<CorrMatrix> {
    let len = cols.len();
    if len < 2 {
        return Err(Error::TooShort {
            what: "correlation window",
            needed: 2,
            got: len,
        });
    }
    let n = returns.n_indices();
    let mut normalized = Vec::with_capacity(n);
    for (label, row) in returns.labels().iter().zip(returns.returns()) {
        let slice = &row[cols.clone()];
        let (mean, sigma) = returns_moments(slice);
        if crate::panel::is_degenerate_sigma(mean, sigma) {
            return Err(Error::Degenerate {
                label: label.clone(),
            });
        }
        normalized.push(slice.iter().map(|r| (r - mean) / sigma).collect::<Vec<_>>());
    }

    let mut matrix = Matrix::identity(n);
    for i in 0..n {
        for j in i + 1..n {
            let c = normalized[i]
                .iter()
                .zip(&normalized[j])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / len as f64;
            let c = c.clamp(-1.0, 1.0);
            matrix[(i, j)] = c;
            matrix[(j, i)] = c;
        }
    }
    Ok(CorrMatrix {
        labels: returns.labels().to_vec(),
        matrix,
        window: Some(CorrWindow {
            start: returns.dates()[cols.start],
            end: returns.dates()[cols.end - 1],
            len,
        }),
    })
}

/// Eigensystem of a correlation matrix with the inverse participation ratio
/// of every eigenvector.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `k` pairs with `eigenvalues[k]`.
    pub eigenvectors: Matrix,
    pub ipr: Vec<f64>,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        self.eigenvectors.column(k)
    }

    pub fn largest(&self) -> f64 {
        *self.eigenvalues.last().expect("empty spectrum")
    }

    pub fn smallest(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// The `k` largest eigenvalues, descending.
    pub fn top(&self, k: usize) -> Vec<f64> {
        self.eigenvalues.iter().rev().take(k).copied().collect()
    }

    pub fn reconstruct(&self) -> Matrix {
        let n = self.dim();
        let u = &self.eigenvectors;
        Matrix::from_fn(n, |i, j| {
            (0..n)
                .map(|k| u[(i, k)] * self.eigenvalues[k] * u[(j, k)])
                .sum()
        })
    }
}

pub fn eigendecompose(c: &CorrMatrix) -> Result<Spectrum> {
    let eig = symmetric_eigen(c.matrix())?;
    let n = eig.values.len();
    let ipr = (0..n).map(|k| ipr_of(&eig.vector(k))).collect();
    Ok(Spectrum {
        eigenvalues: eig.values,
        eigenvectors: eig.vectors,
        ipr,
    })
}

/// `I = Σ u_l⁴` of a unit vector.
pub fn ipr_of(u: &[f64]) -> f64 {
    u.iter().map(|x| x.powi(4)).sum()
}

/// Inverse participation ratio of every eigenvector.
pub fn ipr(spectrum: &Spectrum) -> Vec<f64> {
    (0..spectrum.dim())
        .map(|k| ipr_of(&spectrum.eigenvector(k)))
        .collect()
}
