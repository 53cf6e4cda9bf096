//! Small dense linear algebra for systems of dimension at most a handful.
//!
//! ```
//! use smom::linalg::{solve, Matrix};
//!
//! let a = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, -1.0]]).unwrap();
//! let x = solve(&a, &[3.0, 1.0]).unwrap();
//! assert!((x[0] - 2.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Result, SmomError};

/// Relative pivot threshold below which a matrix is declared singular.
pub const SINGULAR_PIVOT_REL: f64 = 1e-12;

/// Dense row-major matrix with finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Matrix of zeros.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Identity matrix of size `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Diagonal matrix with the given entries.
    pub fn diag(values: &[f64]) -> Self {
        let mut m = Matrix::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    /// Builds a matrix from row-major data, validating shape and finiteness.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(SmomError::Dimension(
                "matrix must have at least one row and column".into(),
            ));
        }
        if data.len() != rows * cols {
            return Err(SmomError::Dimension(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(SmomError::domain(
                "Matrix::from_row_major",
                "non-finite entry",
            ));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from a slice of equally long rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(SmomError::Dimension("rows have unequal lengths".into()));
        }
        Matrix::from_row_major(r, c, rows.concat())
    }

    /// Number of rows.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Copy of row `i`.
    pub fn row(&self, i: usize) -> Vec<f64> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    /// Rows as nested vectors.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    /// Whether every entry is finite.
    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Transpose.
    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// Matrix product.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(SmomError::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if self.cols != v.len() {
            return Err(SmomError::Dimension(format!(
                "cannot multiply {}x{} matrix by vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect())
    }

    /// Entrywise scaling.
    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// Entrywise sum.
    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(SmomError::Dimension(
                "cannot add matrices of different shapes".into(),
            ));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Column block `[start, end)` as a new matrix.
    pub fn columns(&self, start: usize, end: usize) -> Matrix {
        let mut out = Matrix::zeros(self.rows, end - start);
        for i in 0..self.rows {
            for j in start..end {
                out[(i, j - start)] = self[(i, j)];
            }
        }
        out
    }

    /// Whether the matrix is symmetric within an absolute tolerance.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }

    /// Average of the matrix and its transpose.
    pub fn symmetrize(&self) -> Matrix {
        let t = self.transpose();
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&t.data)
                .map(|(a, b)| 0.5 * (a + b))
                .collect(),
        }
    }

    /// Main diagonal.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .collect()
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

struct Lu {
    n: usize,
    lu: Matrix,
    perm: Vec<usize>,
}

fn lu_decompose(a: &Matrix) -> Result<Lu> {
    if a.rows != a.cols {
        return Err(SmomError::Dimension(format!(
            "expected a square matrix, got {}x{}",
            a.rows, a.cols
        )));
    }
    if !a.is_finite() {
        return Err(SmomError::domain("lu_decompose", "non-finite entry"));
    }
    let n = a.rows;
    let threshold = SINGULAR_PIVOT_REL * a.max_abs();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (p, pivot) = (k..n)
            .map(|i| (i, lu[(i, k)].abs()))
            .fold(
                (k, -1.0),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
        if pivot <= threshold || pivot == 0.0 {
            return Err(SmomError::Singular);
        }
        if p != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(p, j)];
                lu[(p, j)] = tmp;
            }
            perm.swap(k, p);
        }
        for i in k + 1..n {
            let factor = lu[(i, k)] / lu[(k, k)];
            lu[(i, k)] = factor;
            for j in k + 1..n {
                let v = lu[(k, j)];
                lu[(i, j)] -= factor * v;
            }
        }
    }
    Ok(Lu { n, lu, perm })
}

impl Lu {
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] -= self.lu[(i, j)] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= self.lu[(i, j)] * x[j];
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }
}

/// Solves `A x = b` by partial-pivoting elimination.
///
/// Returns [`SmomError::Singular`] when a pivot falls below
/// `1e-12 · max|A|`.
pub fn solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.rows {
        return Err(SmomError::Dimension(format!(
            "right-hand side has length {} for a {}x{} system",
            b.len(),
            a.rows,
            a.cols
        )));
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(SmomError::domain("solve", "non-finite right-hand side"));
    }
    let lu = lu_decompose(a)?;
    Ok(lu.solve(b))
}

/// Inverse of a square matrix.
pub fn inverse(a: &Matrix) -> Result<Matrix> {
    let lu = lu_decompose(a)?;
    let n = lu.n;
    let mut inv = Matrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        let col = lu.solve(&e);
        for i in 0..n {
            inv[(i, j)] = col[i];
        }
    }
    Ok(inv)
}

/// Determinant of a square matrix (zero when elimination declares it singular).
pub fn determinant(a: &Matrix) -> Result<f64> {
    match lu_decompose(a) {
        Ok(lu) => {
            let mut det: f64 = (0..lu.n).map(|i| lu.lu[(i, i)]).product();
            let mut seen = vec![false; lu.n];
            for start in 0..lu.n {
                if seen[start] {
                    continue;
                }
                let mut len = 0;
                let mut j = start;
                while !seen[j] {
                    seen[j] = true;
                    j = lu.perm[j];
                    len += 1;
                }
                if len % 2 == 0 {
                    det = -det;
                }
            }
            Ok(det)
        }
        Err(SmomError::Singular) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// Eigen-decomposition of a symmetric 2×2 matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymEig2 {
    /// Eigenvalues in descending order.
    pub values: [f64; 2],
    /// Unit eigenvectors matching `values`.
    pub vectors: [[f64; 2]; 2],
}

/// Eigenvalues and orthonormal eigenvectors of a symmetric 2×2 matrix.
pub fn sym_eig2(s: &Matrix) -> Result<SymEig2> {
    if s.rows != 2 || s.cols != 2 {
        return Err(SmomError::Dimension(format!(
            "expected 2x2 matrix, got {}x{}",
            s.rows, s.cols
        )));
    }
    let scale = s.max_abs().max(1.0);
    if !s.is_symmetric(1e-12 * scale) {
        return Err(SmomError::domain("sym_eig2", "matrix is not symmetric"));
    }
    let a = s[(0, 0)];
    let d = s[(1, 1)];
    let b = 0.5 * (s[(0, 1)] + s[(1, 0)]);
    let mean = 0.5 * (a + d);
    let half_diff = 0.5 * (a - d);
    let radius = half_diff.hypot(b);
    let l1 = mean + radius;
    let l2 = mean - radius;
    let v1 = if radius == 0.0 {
        [1.0, 0.0]
    } else if half_diff >= 0.0 {
        let (x, y) = (half_diff + radius, b);
        let norm = x.hypot(y);
        [x / norm, y / norm]
    } else {
        let (x, y) = (b, radius - half_diff);
        let norm = x.hypot(y);
        [x / norm, y / norm]
    };
    let v2 = [-v1[1], v1[0]];
    Ok(SymEig2 {
        values: [l1, l2],
        vectors: [v1, v2],
    })
}

/// Spectral norm: square root of the largest eigenvalue of `AᵀA`.
pub fn spectral_norm(a: &Matrix) -> f64 {
    let ata = match a.transpose().matmul(a) {
        Ok(m) => m,
        Err(_) => return f64::NAN,
    };
    let n = ata.rows;
    if n == 1 {
        return ata[(0, 0)].max(0.0).sqrt();
    }
    if n == 2 {
        return sym_eig2(&ata.symmetrize()).map_or(f64::NAN, |e| e.values[0].max(0.0).sqrt());
    }
    sym_eigenvalues(&ata.symmetrize())
        .into_iter()
        .fold(0.0, f64::max)
        .sqrt()
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
fn sym_eigenvalues(s: &Matrix) -> Vec<f64> {
    let n = s.rows;
    let mut a = s.clone();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off <= f64::MIN_POSITIVE || off.sqrt() <= 1e-17 * a.frobenius() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / t.hypot(1.0);
                let sn = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - sn * akq;
                    a[(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - sn * aqk;
                    a[(q, k)] = sn * apk + c * aqk;
                }
            }
        }
    }
    a.diagonal()
}

/// Euclidean norm of a vector.
pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[Vec<f64>]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn solve_examples() {
        assert_eq!(
            solve(&Matrix::identity(2), &[1.0, 2.0]).unwrap(),
            vec![1.0, 2.0]
        );
        assert_eq!(
            solve(&Matrix::diag(&[2.0, 4.0]), &[2.0, 4.0]).unwrap(),
            vec![1.0, 1.0]
        );
        let x = solve(&m(&[vec![1.0, 1.0], vec![1.0, -1.0]]), &[3.0, 1.0]).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
        assert_eq!(
            solve(&m(&[vec![1.0, 2.0], vec![2.0, 4.0]]), &[1.0, 1.0]),
            Err(SmomError::Singular)
        );
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(inverse(&Matrix::identity(3)).unwrap(), Matrix::identity(3));
        assert_eq!(
            inverse(&Matrix::diag(&[2.0, 4.0])).unwrap(),
            Matrix::diag(&[0.5, 0.25])
        );
        let inv = inverse(&m(&[vec![4.0, 2.0], vec![2.0, 3.0]])).unwrap();
        let want = [3.0 / 8.0, -2.0 / 8.0, -2.0 / 8.0, 4.0 / 8.0];
        for (g, w) in inv.as_slice().iter().zip(want) {
            assert!((g - w).abs() < 1e-15);
        }
    }

    #[test]
    fn eig_examples() {
        let e = sym_eig2(&Matrix::identity(2)).unwrap();
        assert_eq!(e.values, [1.0, 1.0]);
        let e = sym_eig2(&Matrix::diag(&[4.0, 1.0])).unwrap();
        assert_eq!(e.values, [4.0, 1.0]);
        assert!((e.vectors[0][0].abs() - 1.0).abs() < 1e-15);
        let e = sym_eig2(&m(&[vec![2.0, 1.0], vec![1.0, 2.0]])).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-15 && (e.values[1] - 1.0).abs() < 1e-15);
        assert!((e.vectors[0][0] - e.vectors[0][1]).abs() < 1e-15);
    }

    #[test]
    fn spectral_norm_examples() {
        assert_eq!(spectral_norm(&Matrix::zeros(2, 2)), 0.0);
        assert!((spectral_norm(&Matrix::diag(&[3.0, -5.0])) - 5.0).abs() < 1e-15);
        assert!((spectral_norm(&m(&[vec![0.0, 1.0], vec![0.0, 0.0]])) - 1.0).abs() < 1e-15);
        assert!((spectral_norm(&Matrix::diag(&[1.0, -7.0, 2.0])) - 7.0).abs() < 1e-12);
    }

    #[test]
    fn determinant_sign() {
        let a = m(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!((determinant(&a).unwrap() + 1.0).abs() < 1e-15);
        let b = m(&[vec![2.0, 1.0], vec![1.0, 3.0]]);
        assert!((determinant(&b).unwrap() - 5.0).abs() < 1e-14);
    }
}
