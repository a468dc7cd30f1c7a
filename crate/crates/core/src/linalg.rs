//! Dense real linear algebra: products, Gram matrices, Cholesky solves and
//! least-squares projections onto a column subset.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vectors are plain `Vec<f64>`; borrowed as `&[f64]` everywhere.
pub type DenseVector = Vec<f64>;

/// Row-major dense matrix with finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("matrix has non-finite entries".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

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
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> DenseVector {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// `M x`. Zero entries of `x` are skipped, which makes products with
    /// sparse iterates proportionally cheaper.
    pub fn matvec(&self, x: &[f64]) -> DenseVector {
        assert_eq!(x.len(), self.cols, "matvec dimension");
        let nz: Vec<usize> = (0..self.cols).filter(|&j| x[j] != 0.0).collect();
        if nz.len() * 2 < self.cols {
            (0..self.rows)
                .map(|i| {
                    let row = self.row(i);
                    nz.iter().map(|&j| row[j] * x[j]).sum()
                })
                .collect()
        } else {
            (0..self.rows).map(|i| dot(self.row(i), x)).collect()
        }
    }

    /// `Mᵀ r`.
    pub fn matvec_t(&self, r: &[f64]) -> DenseVector {
        assert_eq!(r.len(), self.rows, "matvec_t dimension");
        let mut out = vec![0.0; self.cols];
        for (i, &ri) in r.iter().enumerate() {
            if ri == 0.0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += ri * a;
            }
        }
        out
    }

    /// Inner product of column `j` with `v`.
    pub fn column_dot(&self, j: usize, v: &[f64]) -> f64 {
        debug_assert_eq!(v.len(), self.rows);
        v.iter()
            .enumerate()
            .map(|(i, &vi)| self.data[i * self.cols + j] * vi)
            .sum()
    }

    /// Columns `idx` in order. `idx` must be strictly increasing and in range.
    pub fn column_submatrix(&self, idx: &[usize]) -> Result<Self> {
        if let Some(&bad) = idx.iter().find(|&&j| j >= self.cols) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: self.cols,
            });
        }
        if idx.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::UnsortedIndices);
        }
        let k = idx.len();
        let mut data = Vec::with_capacity(self.rows * k);
        for i in 0..self.rows {
            let row = self.row(i);
            data.extend(idx.iter().map(|&j| row[j]));
        }
        Ok(Self {
            rows: self.rows,
            cols: k,
            data,
        })
    }

    /// `Mᵀ M`.
    pub fn gram(&self) -> Self {
        let k = self.cols;
        let mut g = Self::zeros(k, k);
        for i in 0..self.rows {
            let row = self.row(i);
            for a in 0..k {
                let ra = row[a];
                if ra == 0.0 {
                    continue;
                }
                for (gb, rb) in g.data[a * k + a..(a + 1) * k].iter_mut().zip(&row[a..]) {
                    *gb += ra * rb;
                }
            }
        }
        for a in 0..k {
            for b in 0..a {
                g.data[a * k + b] = g.data[b * k + a];
            }
        }
        g
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }
}

/// Lower-triangular Cholesky factor `G = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    lower: Vec<f64>,
}

/// Relative pivot floor below which a Gram matrix is declared rank deficient.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

impl Cholesky {
    pub fn factor(g: &DenseMatrix) -> Result<Self> {
        if g.rows != g.cols {
            return Err(Error::DimensionMismatch(format!(
                "Cholesky of a {}x{} matrix",
                g.rows, g.cols
            )));
        }
        let n = g.rows;
        let max_diag = (0..n).map(|i| g.get(i, i)).fold(0.0_f64, f64::max);
        let floor = PIVOT_TOLERANCE * max_diag;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = g.get(j, j);
            for p in 0..j {
                d -= l[j * n + p] * l[j * n + p];
            }
            if !(d > floor) {
                return Err(Error::Singular {
                    column: j,
                    pivot: d,
                });
            }
            let d = d.sqrt();
            l[j * n + j] = d;
            for i in j + 1..n {
                let mut s = g.get(i, j);
                for p in 0..j {
                    s -= l[i * n + p] * l[j * n + p];
                }
                l[i * n + j] = s / d;
            }
        }
        Ok(Self { n, lower: l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Result<DenseVector> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "rhs of length {} for a {n}x{n} system",
                b.len()
            )));
        }
        let l = &self.lower;
        let mut z = b.to_vec();
        for i in 0..n {
            let mut s = z[i];
            for p in 0..i {
                s -= l[i * n + p] * z[p];
            }
            z[i] = s / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for p in i + 1..n {
                s -= l[p * n + i] * z[p];
            }
            z[i] = s / l[i * n + i];
        }
        Ok(z)
    }
}

/// Solve `G z = b` for symmetric positive definite `G`.
pub fn solve_spd(g: &DenseMatrix, b: &[f64]) -> Result<DenseVector> {
    Cholesky::factor(g)?.solve(b)
}

/// `(A_Sᵀ A_S)⁻¹ A_Sᵀ v` for full-column-rank `A_S`.
pub fn pseudoinverse_apply(a_s: &DenseMatrix, v: &[f64]) -> Result<DenseVector> {
    if v.len() != a_s.rows() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} against {} rows",
            v.len(),
            a_s.rows()
        )));
    }
    solve_spd(&a_s.gram(), &a_s.matvec_t(v))
}

/// `(I − A_S A_S⁺) v`: the component of `v` orthogonal to the columns of `A_S`.
pub fn residual_projection(a_s: &DenseMatrix, v: &[f64]) -> Result<DenseVector> {
    let coef = pseudoinverse_apply(a_s, v)?;
    let fitted = a_s.matvec(&coef);
    Ok(v.iter().zip(&fitted).map(|(a, b)| a - b).collect())
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

pub fn sub(a: &[f64], b: &[f64]) -> DenseVector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `max |a_i − b_i|`.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}
