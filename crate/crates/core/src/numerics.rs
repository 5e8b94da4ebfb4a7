//! Dense small-matrix linear algebra: SPD matrices with a maintained Cholesky
//! factor, triangular solves, and the two ellipsoid norms used throughout.
//!
//! Matrices are stored row-major in a flat `Vec<f64>`. Dimensions are small
//! (tens), so everything here is straightforward `O(d^3)` / `O(d^2)` code.

use thiserror::Error;

/// Relative tolerance for the symmetry check in [`SpdMatrix::from_rows`].
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is not square ({rows} rows, row {row} has {len} entries)")]
    NotSquare { rows: usize, row: usize, len: usize },
    #[error("matrix is not symmetric: |a[{i}][{j}] - a[{j}][{i}]| = {diff:e}")]
    NotSymmetric { i: usize, j: usize, diff: f64 },
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite entry at position {0}")]
    NonFinite(usize),
}

pub type Result<T> = std::result::Result<T, LinalgError>;

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(LinalgError::DimensionMismatch { expected, got })
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Scales `v` in place onto the Euclidean ball of the given radius.
pub fn project_to_ball(v: &mut [f64], radius: f64) {
    let n = norm2(v);
    if n > radius {
        let s = radius / n;
        v.iter_mut().for_each(|x| *x *= s);
    }
}

/// Symmetric positive definite matrix together with its lower Cholesky factor.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix {
    dim: usize,
    entries: Vec<f64>,
    chol: Vec<f64>,
}

impl SpdMatrix {
    /// Builds from nested rows, symmetrizing before factorization.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut flat = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(LinalgError::NotSquare { rows: n, row: i, len: row.len() });
            }
            flat.extend_from_slice(row);
        }
        Self::from_flat(n, flat)
    }

    pub fn from_flat(dim: usize, mut entries: Vec<f64>) -> Result<Self> {
        check_dim(dim * dim, entries.len())?;
        if let Some(p) = entries.iter().position(|x| !x.is_finite()) {
            return Err(LinalgError::NonFinite(p));
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                let (a, b) = (entries[i * dim + j], entries[j * dim + i]);
                let scale = a.abs().max(b.abs()).max(1.0);
                let diff = (a - b).abs();
                if diff > SYMMETRY_TOL * scale {
                    return Err(LinalgError::NotSymmetric { i, j, diff });
                }
                let m = 0.5 * (a + b);
                entries[i * dim + j] = m;
                entries[j * dim + i] = m;
            }
        }
        let chol = cholesky(dim, &entries)?;
        Ok(Self { dim, entries, chol })
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }

    /// `lambda * I`; panics if `lambda` is not strictly positive.
    pub fn scaled_identity(dim: usize, lambda: f64) -> Self {
        assert!(lambda > 0.0 && lambda.is_finite(), "lambda must be positive");
        let mut entries = vec![0.0; dim * dim];
        let mut chol = vec![0.0; dim * dim];
        let root = lambda.sqrt();
        for i in 0..dim {
            entries[i * dim + i] = lambda;
            chol[i * dim + i] = root;
        }
        Self { dim, entries, chol }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Row-major lower-triangular factor `L` with `L L^T = M`.
    pub fn chol(&self) -> &[f64] {
        &self.chol
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    /// Returns `M + v v^T`.
    pub fn rank1_update(&self, v: &[f64]) -> Result<Self> {
        let mut out = self.clone();
        out.add_outer(v)?;
        Ok(out)
    }

    /// In-place `M <- M + v v^T`, refactoring from scratch.
    pub fn add_outer(&mut self, v: &[f64]) -> Result<()> {
        check_dim(self.dim, v.len())?;
        let n = self.dim;
        for i in 0..n {
            for j in 0..n {
                self.entries[i * n + j] += v[i] * v[j];
            }
        }
        self.chol = cholesky(n, &self.entries)?;
        Ok(())
    }

    /// Solves `L y = b`.
    pub fn solve_lower(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, b.len())?;
        let mut y = b.to_vec();
        forward_sub(self.dim, &self.chol, &mut y);
        Ok(y)
    }

    /// Solves `L^T x = b`.
    pub fn solve_upper(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, b.len())?;
        let mut x = b.to_vec();
        backward_sub(self.dim, &self.chol, &mut x);
        Ok(x)
    }

    /// Solves `M x = b` with two triangular solves.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, b.len())?;
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        Ok(x)
    }

    /// Unchecked variant of [`solve`](Self::solve) for hot loops.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        forward_sub(self.dim, &self.chol, x);
        backward_sub(self.dim, &self.chol, x);
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, v.len())?;
        Ok(self.entries.chunks(self.dim).map(|row| dot(row, v)).collect())
    }

    /// `sqrt(v^T M v)`.
    pub fn maha_norm(&self, v: &[f64]) -> Result<f64> {
        let mv = self.mul_vec(v)?;
        Ok(dot(v, &mv).max(0.0).sqrt())
    }

    /// `sqrt(v^T M^{-1} v)`, computed as `|L^{-1} v|`.
    pub fn inv_maha_norm(&self, v: &[f64]) -> Result<f64> {
        Ok(norm2(&self.solve_lower(v)?))
    }
}

fn cholesky(n: usize, a: &[f64]) -> Result<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut diag = a[j * n + j];
        for k in 0..j {
            diag -= l[j * n + k] * l[j * n + k];
        }
        if diag <= 0.0 || !diag.is_finite() {
            return Err(LinalgError::NotPositiveDefinite { pivot: j, value: diag });
        }
        let ljj = diag.sqrt();
        l[j * n + j] = ljj;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / ljj;
        }
    }
    Ok(l)
}

fn forward_sub(n: usize, l: &[f64], y: &mut [f64]) {
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
}

fn backward_sub(n: usize, l: &[f64], x: &mut [f64]) {
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
}
