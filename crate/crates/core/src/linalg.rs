//! Discrete Laplacian, tridiagonal and dense SPD solvers, grid norms.

use crate::error::{check_len, invalid, Error, Result};

/// Interior nodal values `v_1..v_{N-1}`; the Dirichlet boundary values are implicit zeros.
pub type StateVector = Vec<f64>;

/// Tridiagonal matrix stored by diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalMatrix {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
}

impl TridiagonalMatrix {
    pub fn new(lower: Vec<f64>, diag: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(invalid("empty tridiagonal matrix"));
        }
        check_len(n - 1, lower.len())?;
        check_len(n - 1, upper.len())?;
        Ok(Self { lower, diag, upper })
    }

    /// Symmetric Toeplitz matrix with constant diagonal and off-diagonal.
    pub fn symmetric_constant(n: usize, diag: f64, off: f64) -> Result<Self> {
        if n == 0 {
            return Err(invalid("empty tridiagonal matrix"));
        }
        Self::new(vec![off; n - 1], vec![diag; n], vec![off; n - 1])
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        check_len(n, x.len())?;
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.lower[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += self.upper[i] * x[i + 1];
            }
            y[i] = s;
        }
        Ok(y)
    }

    /// Max absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.dim())
            .map(|i| self.row_scale(i))
            .fold(0.0, f64::max)
    }

    fn row_scale(&self, i: usize) -> f64 {
        let mut s = self.diag[i].abs();
        if i > 0 {
            s += self.lower[i - 1].abs();
        }
        if i + 1 < self.dim() {
            s += self.upper[i].abs();
        }
        s
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.dim();
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            if i > 0 {
                m[(i, i - 1)] = self.lower[i - 1];
            }
            if i + 1 < n {
                m[(i, i + 1)] = self.upper[i];
            }
        }
        m
    }
}

/// Thomas algorithm, no pivoting.
pub fn solve_tridiagonal(m: &TridiagonalMatrix, rhs: &[f64]) -> Result<StateVector> {
    let n = m.dim();
    check_len(n, rhs.len())?;
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];

    let pivot_ok = |row: usize, pivot: f64| -> Result<()> {
        if pivot.abs() <= 1e-14 * m.row_scale(row) || !pivot.is_finite() {
            return Err(Error::SingularPivot { row, pivot });
        }
        Ok(())
    };

    let mut piv = m.diag[0];
    pivot_ok(0, piv)?;
    if n > 1 {
        c[0] = m.upper[0] / piv;
    }
    x[0] = rhs[0] / piv;
    for i in 1..n {
        piv = m.diag[i] - m.lower[i - 1] * c[i - 1];
        pivot_ok(i, piv)?;
        if i + 1 < n {
            c[i] = m.upper[i] / piv;
        }
        x[i] = (rhs[i] - m.lower[i - 1] * x[i - 1]) / piv;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

/// `(L_h v)_i = (v_{i-1} - 2 v_i + v_{i+1}) / h^2` with `v_0 = v_N = 0`.
pub fn apply_discrete_laplacian(v: &[f64], h: f64) -> StateVector {
    let mut out = vec![0.0; v.len()];
    laplacian_into(v, h, &mut out);
    out
}

pub(crate) fn laplacian_into(v: &[f64], h: f64, out: &mut [f64]) {
    let n = v.len();
    let s = 1.0 / (h * h);
    for i in 0..n {
        let left = if i > 0 { v[i - 1] } else { 0.0 };
        let right = if i + 1 < n { v[i + 1] } else { 0.0 };
        out[i] = (left - 2.0 * v[i] + right) * s;
    }
}

/// Assembled `L_h` for `n` interior nodes.
pub fn laplacian_matrix(n: usize, h: f64) -> Result<TridiagonalMatrix> {
    let s = 1.0 / (h * h);
    TridiagonalMatrix::symmetric_constant(n, -2.0 * s, s)
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_len(rows * cols, data.len())?;
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from its columns.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows, cols);
        for (j, col) in columns.iter().enumerate() {
            check_len(rows, col.len())?;
            for (i, &v) in col.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.cols, x.len())?;
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    /// `Aᵀ x`.
    pub fn tr_matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.rows, x.len())?;
        let mut y = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            for (yj, &a) in y.iter_mut().zip(self.row(i)) {
                *yj += a * xi;
            }
        }
        Ok(y)
    }

    /// `AᵀA + shift·I`.
    pub fn gram_shifted(&self, shift: f64) -> DenseMatrix {
        let n = self.cols;
        let mut g = DenseMatrix::zeros(n, n);
        for i in 0..self.rows {
            let r = self.row(i);
            for p in 0..n {
                let rp = r[p];
                if rp == 0.0 {
                    continue;
                }
                let gp = &mut g.data[p * n..(p + 1) * n];
                for q in p..n {
                    gp[q] += rp * r[q];
                }
            }
        }
        for p in 0..n {
            g.data[p * n + p] += shift;
            for q in 0..p {
                g.data[p * n + q] = g.data[q * n + p];
            }
        }
        g
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `A x = b` for symmetric positive definite `A` by Cholesky factorisation.
pub fn solve_spd_dense(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: a.cols(),
        });
    }
    check_len(n, b.len())?;
    let scale = (0..n).map(|i| a[(i, i)].abs()).fold(0.0, f64::max);
    for i in 0..n {
        for j in 0..i {
            let (x, y) = (a[(i, j)], a[(j, i)]);
            if (x - y).abs() > 1e-12 * scale.max(x.abs()) {
                return Err(invalid(format!("matrix not symmetric at ({i},{j})")));
            }
        }
    }

    // lower factor, row-major
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let lj = &l.data[j * n..j * n + j];
        let pivot = a[(j, j)] - dot(lj, lj);
        if !(pivot > 0.0) {
            return Err(Error::NotPositiveDefinite { row: j, pivot });
        }
        let ljj = pivot.sqrt();
        l[(j, j)] = ljj;
        for i in j + 1..n {
            let s = a[(i, j)] - dot(&l.data[i * n..i * n + j], &l.data[j * n..j * n + j]);
            l[(i, j)] = s / ljj;
        }
    }

    let mut y = vec![0.0; n];
    for i in 0..n {
        y[i] = (b[i] - dot(&l.data[i * n..i * n + i], &y[..i])) / l[(i, i)];
    }
    let mut x = y;
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in i + 1..n {
            s -= l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    Ok(x)
}

/// Discrete norms of a grid function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteNorms {
    pub inf: f64,
    pub l2h: f64,
    pub grad_l2h: f64,
}

pub fn discrete_norms(v: &[f64], h: f64) -> DiscreteNorms {
    DiscreteNorms {
        inf: inf_norm(v),
        l2h: l2h_norm(v, h),
        grad_l2h: grad_l2h_norm(v, h),
    }
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `(h Σ v_i²)^{1/2}`.
pub fn l2h_norm(v: &[f64], h: f64) -> f64 {
    inner_h(v, v, h).sqrt()
}

/// `(u, v)_h = h Σ u_i v_i`.
pub fn inner_h(u: &[f64], v: &[f64], h: f64) -> f64 {
    h * dot(u, v)
}

/// `(h Σ_{i=0}^{N-1} ((v_{i+1} - v_i)/h)²)^{1/2}` with zero boundary values.
pub fn grad_l2h_norm(v: &[f64], h: f64) -> f64 {
    let n = v.len();
    let mut s = 0.0;
    let mut prev = 0.0;
    for &x in v {
        s += (x - prev) * (x - prev);
        prev = x;
    }
    if n > 0 {
        s += prev * prev;
    }
    (s / h).sqrt()
}
