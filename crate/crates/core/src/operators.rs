//! Finite-difference Laplacians on the unit cube with homogeneous Dirichlet
//! data, and their exact spectral calculus.
//!
//! Vectors are indexed row-major by dimension: the multi-index
//! `(i_1, ..., i_d)` (0-based) maps to `((i_1 n + i_2) n + ...) + i_d`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{BuraError, Result};

/// Largest operator assembled by [`assemble_fdm_laplacian`].
pub const MAX_UNKNOWNS: usize = 1 << 24;
/// Largest grid accepted by the dense spectral oracle.
pub const MAX_ORACLE_UNKNOWNS: usize = 1 << 21;

/// Rows per task in parallel kernels; fixed so results do not depend on
/// the thread count.
pub(crate) const CHUNK: usize = 4096;

/// `n^dim` interior points of the uniform grid with mesh size `1 / (n + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UniformGrid {
    dim: usize,
    n: usize,
}

impl UniformGrid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(BuraError::InvalidInput(format!("dimension must be 1, 2 or 3, got {dim}")));
        }
        if n == 0 {
            return Err(BuraError::InvalidInput("need at least one interior point".into()));
        }
        n.checked_pow(dim as u32)
            .ok_or_else(|| BuraError::Resource(format!("{n}^{dim} unknowns overflow")))?;
        Ok(UniformGrid { dim, n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Interior points per dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        1.0 / (self.n + 1) as f64
    }

    /// Total unknowns `n^dim`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Square sparse matrix in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    symmetric: bool,
    bounds: Option<(f64, f64)>,
}

impl SparseOperator {
    /// Builds from CSR arrays; column indices must be sorted within rows.
    pub fn from_csr(n: usize, row_ptr: Vec<usize>, col_idx: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if row_ptr.len() != n + 1 || row_ptr[0] != 0 || row_ptr[n] != col_idx.len() || col_idx.len() != values.len() {
            return Err(BuraError::InvalidInput("inconsistent CSR arrays".into()));
        }
        for i in 0..n {
            let cols = &col_idx[row_ptr[i]..row_ptr[i + 1]];
            if row_ptr[i] > row_ptr[i + 1] || cols.windows(2).any(|w| w[0] >= w[1]) || cols.iter().any(|&j| j >= n) {
                return Err(BuraError::InvalidInput(format!("row {i} has unsorted or out-of-range columns")));
            }
        }
        let mut op = SparseOperator { n, row_ptr, col_idx, values, symmetric: false, bounds: None };
        op.symmetric = op.check_symmetry();
        Ok(op)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Known `(lambda_min, lambda_max)`, when assembled from a grid.
    pub fn spectral_bounds(&self) -> Option<(f64, f64)> {
        self.bounds
    }

    /// Entry `(i, j)`, zero outside the pattern.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let cols = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        cols.binary_search(&j).map(|p| self.values[self.row_ptr[i] + p]).unwrap_or(0.0)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`, parallel over row blocks.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        y.par_chunks_mut(CHUNK).enumerate().for_each(|(b, ys)| {
            let base = b * CHUNK;
            for (o, yi) in ys.iter_mut().enumerate() {
                let i = base + o;
                let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
                *yi = self.col_idx[s..e].iter().zip(&self.values[s..e]).map(|(&j, &v)| v * x[j]).sum();
            }
        });
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec(x, &mut y);
        y
    }

    fn check_symmetry(&self) -> bool {
        (0..self.n).all(|i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).all(|p| self.get(self.col_idx[p], i) == self.values[p])
        })
    }

    /// Strict diagonal dominance in at least one row and weak dominance with
    /// positive diagonal elsewhere; for the connected stencil pattern this
    /// implies positive definiteness.
    fn gershgorin_positive(&self) -> bool {
        let mut strict = false;
        for i in 0..self.n {
            let mut diag = 0.0;
            let mut off = 0.0;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.col_idx[p] == i {
                    diag = self.values[p];
                } else {
                    off += self.values[p].abs();
                }
            }
            if !(diag > 0.0) || diag < off {
                return false;
            }
            strict |= diag > off;
        }
        strict
    }
}

/// The `(2 dim + 1)`-point Laplacian: diagonal `2 dim / h^2`, `-1 / h^2` to
/// each interior neighbour.
pub fn assemble_fdm_laplacian(grid: &UniformGrid) -> Result<SparseOperator> {
    let total = grid.len();
    if total > MAX_UNKNOWNS {
        return Err(BuraError::Resource(format!("{total} unknowns exceed the limit of {MAX_UNKNOWNS}")));
    }
    let (d, n) = (grid.dim(), grid.n());
    let inv_h2 = 1.0 / (grid.h() * grid.h());
    let strides: Vec<usize> = (0..d).map(|m| n.pow((d - 1 - m) as u32)).collect();
    let mut row_ptr = Vec::with_capacity(total + 1);
    let mut col_idx = Vec::with_capacity(total * (2 * d + 1));
    let mut values = Vec::with_capacity(total * (2 * d + 1));
    row_ptr.push(0);
    for i in 0..total {
        // Neighbours in increasing column order: lower ones from the slowest
        // axis inward, the diagonal, then upper ones from the fastest axis out.
        for &stride in &strides[..d] {
            if (i / stride) % n > 0 {
                col_idx.push(i - stride);
                values.push(-inv_h2);
            }
        }
        col_idx.push(i);
        values.push(2.0 * d as f64 * inv_h2);
        for &stride in strides[..d].iter().rev() {
            if (i / stride) % n + 1 < n {
                col_idx.push(i + stride);
                values.push(-inv_h2);
            }
        }
        row_ptr.push(col_idx.len());
    }
    let mut op = SparseOperator { n: total, row_ptr, col_idx, values, symmetric: false, bounds: None };
    op.symmetric = op.check_symmetry();
    if !op.symmetric || !op.gershgorin_positive() {
        return Err(BuraError::InvalidInput("assembled stencil is not symmetric positive definite".into()));
    }
    let ext = extreme_eigenvalues(grid);
    op.bounds = Some((ext.lambda1, ext.lambda_n));
    Ok(op)
}

/// `(4 / h^2) sin^2(j pi h / 2)` for a 1-based mode index.
fn eigenvalue_1d(n: usize, j: usize) -> f64 {
    let h = 1.0 / (n + 1) as f64;
    let s = (j as f64 * PI * h / 2.0).sin();
    4.0 / (h * h) * s * s
}

/// `sin(i j pi / (n + 1))` for 1-based `i, j`, reducing `i j` modulo the
/// period so large products keep full accuracy.
fn sine(n: usize, i: usize, j: usize) -> f64 {
    let m = 2 * (n + 1);
    let r = (i * j) % m;
    (PI * r as f64 / (n + 1) as f64).sin()
}

fn check_index(grid: &UniformGrid, j: &[usize]) -> Result<()> {
    if j.len() != grid.dim() || j.iter().any(|&jm| jm == 0 || jm > grid.n()) {
        return Err(BuraError::InvalidInput(format!("mode index {j:?} outside 1..={} per axis", grid.n())));
    }
    Ok(())
}

/// Eigenvalue for the 1-based multi-index `j`.
pub fn eigenvalue(grid: &UniformGrid, j: &[usize]) -> Result<f64> {
    check_index(grid, j)?;
    Ok(j.iter().map(|&jm| eigenvalue_1d(grid.n(), jm)).sum())
}

/// Eigenvalue and Euclidean-normalized eigenvector for the 1-based
/// multi-index `j`.
pub fn eigenpair(grid: &UniformGrid, j: &[usize]) -> Result<(f64, Vec<f64>)> {
    let lambda = eigenvalue(grid, j)?;
    let n = grid.n();
    let norm = (2.0 / (n + 1) as f64).sqrt();
    let factors: Vec<Vec<f64>> = j.iter().map(|&jm| (1..=n).map(|i| norm * sine(n, i, jm)).collect()).collect();
    let mut psi = vec![1.0; grid.len()];
    for (idx, v) in psi.iter_mut().enumerate() {
        let mut rest = idx;
        for m in (0..grid.dim()).rev() {
            *v *= factors[m][rest % n];
            rest /= n;
        }
    }
    Ok((lambda, psi))
}

/// Extreme eigenvalues and the normalization used by the solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremeEigenvalues {
    pub lambda1: f64,
    pub lambda_n: f64,
    /// Factor `1 / lambda1` that maps the spectrum to `[1, 1 / delta]`.
    pub normalization: f64,
    /// `lambda1 / lambda_n`, the reciprocal of the normalized top eigenvalue.
    pub delta: f64,
}

impl ExtremeEigenvalues {
    /// Smallest eigenvalue after normalization; one by construction.
    pub fn normalized_lambda1(&self) -> f64 {
        1.0
    }

    pub fn normalized_lambda_n(&self) -> f64 {
        self.lambda_n / self.lambda1
    }
}

pub fn extreme_eigenvalues(grid: &UniformGrid) -> ExtremeEigenvalues {
    let d = grid.dim() as f64;
    let lambda1 = d * eigenvalue_1d(grid.n(), 1);
    let lambda_n = d * eigenvalue_1d(grid.n(), grid.n());
    ExtremeEigenvalues { lambda1, lambda_n, normalization: 1.0 / lambda1, delta: lambda1 / lambda_n }
}

/// `sum_j lambda_j^exponent (f, psi_j) psi_j`, exactly up to roundoff.
///
/// The sine eigenbasis is separable, so the expansion is applied one axis
/// at a time with the dense orthonormal `n x n` sine matrix: `O(N n dim)`
/// work instead of `O(N^2)`.
pub fn spectral_fractional_apply(grid: &UniformGrid, exponent: f64, f: &[f64]) -> Result<Vec<f64>> {
    if f.len() != grid.len() {
        return Err(BuraError::InvalidInput(format!("vector has length {}, grid has {}", f.len(), grid.len())));
    }
    if grid.len() > MAX_ORACLE_UNKNOWNS {
        return Err(BuraError::Resource(format!(
            "{} unknowns exceed the spectral oracle limit of {MAX_ORACLE_UNKNOWNS}",
            grid.len()
        )));
    }
    let n = grid.n();
    let s = sine_matrix(n);
    let mut coef = f.to_vec();
    for axis in 0..grid.dim() {
        coef = transform_axis(grid, &s, &coef, axis);
    }
    let lam: Vec<f64> = (1..=n).map(|j| eigenvalue_1d(n, j)).collect();
    coef.par_chunks_mut(CHUNK).enumerate().for_each(|(b, cs)| {
        for (o, c) in cs.iter_mut().enumerate() {
            let mut rest = b * CHUNK + o;
            let mut total = 0.0;
            for _ in 0..grid.dim() {
                total += lam[rest % n];
                rest /= n;
            }
            *c *= total.powf(exponent);
        }
    });
    for axis in 0..grid.dim() {
        coef = transform_axis(grid, &s, &coef, axis);
    }
    Ok(coef)
}

/// Orthonormal, symmetric, involutory sine matrix, row-major.
fn sine_matrix(n: usize) -> Vec<f64> {
    let norm = (2.0 / (n + 1) as f64).sqrt();
    let mut s = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            s[i * n + j] = norm * sine(n, i + 1, j + 1);
        }
    }
    s
}

/// Applies the sine matrix along one axis of a row-major tensor.
fn transform_axis(grid: &UniformGrid, s: &[f64], x: &[f64], axis: usize) -> Vec<f64> {
    let n = grid.n();
    let stride = n.pow((grid.dim() - 1 - axis) as u32);
    let mut y = vec![0.0; x.len()];
    y.par_chunks_mut(CHUNK).enumerate().for_each(|(b, ys)| {
        for (o, yi) in ys.iter_mut().enumerate() {
            let idx = b * CHUNK + o;
            let pos = (idx / stride) % n;
            let base = idx - pos * stride;
            let row = &s[pos * n..(pos + 1) * n];
            *yi = row.iter().enumerate().map(|(q, &sv)| sv * x[base + q * stride]).sum();
        }
    });
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_stencil() {
        let op = assemble_fdm_laplacian(&UniformGrid::new(1, 3).unwrap()).unwrap();
        assert_eq!(op.diagonal(), vec![32.0; 3]);
        assert_eq!(op.get(0, 1), -16.0);
        assert_eq!(op.get(2, 1), -16.0);
        assert_eq!(op.get(0, 2), 0.0);
        assert!(op.is_symmetric());
    }

    #[test]
    fn two_dimensional_stencil() {
        let op = assemble_fdm_laplacian(&UniformGrid::new(2, 2).unwrap()).unwrap();
        assert_eq!(op.dim(), 4);
        assert_eq!(op.nnz(), 4 * 3);
        let ones = op.apply(&[1.0; 4]);
        assert!(ones.iter().all(|&r| r > 0.0));
        assert!(op.nnz() <= 5 * op.dim());
    }

    #[test]
    fn grid_validation() {
        assert!(UniformGrid::new(0, 3).is_err());
        assert!(UniformGrid::new(4, 3).is_err());
        assert!(UniformGrid::new(2, 0).is_err());
        assert!(assemble_fdm_laplacian(&UniformGrid::new(3, 300).unwrap()).is_err());
    }

    #[test]
    fn closed_form_spectrum() {
        let g = UniformGrid::new(1, 3).unwrap();
        assert!((eigenvalue(&g, &[2]).unwrap() - 32.0).abs() < 1e-12);
        let e = extreme_eigenvalues(&g);
        assert!((e.lambda1 - 64.0 * (PI / 8.0).sin().powi(2)).abs() < 1e-12);
        assert!((e.lambda_n - 64.0 * (3.0 * PI / 8.0).sin().powi(2)).abs() < 1e-12);
        assert!((e.lambda1 - 9.3726).abs() < 1e-4 && (e.lambda_n - 54.6274).abs() < 1e-4);
        assert_eq!(e.normalized_lambda1(), 1.0);
        assert!(eigenvalue(&g, &[0]).is_err() && eigenvalue(&g, &[4]).is_err());
    }

    #[test]
    fn sine_basis_is_orthonormal() {
        let g = UniformGrid::new(1, 15).unwrap();
        let vs: Vec<Vec<f64>> = (1..=15).map(|j| eigenpair(&g, &[j]).unwrap().1).collect();
        for (a, va) in vs.iter().enumerate() {
            for (b, vb) in vs.iter().enumerate() {
                let dot: f64 = va.iter().zip(vb).map(|(x, y)| x * y).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn oracle_on_eigenvector() {
        let g = UniformGrid::new(2, 7).unwrap();
        let (lam, psi) = eigenpair(&g, &[2, 5]).unwrap();
        let out = spectral_fractional_apply(&g, -0.3, &psi).unwrap();
        for (o, p) in out.iter().zip(&psi) {
            assert!((o - lam.powf(-0.3) * p).abs() < 1e-13);
        }
    }
}
