//! Orthonormal 2D transforms over `r x c` RO arrays.
//!
//! DCT, DWHT and DHT are applied separably (rows, then columns) with
//! orthonormal scaling, so white measurement noise keeps its variance in
//! every coefficient. The KLT multiplies the row-major vectorized array by a
//! stored orthogonal basis.

use crate::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use std::f64::consts::PI;

/// Which transform to apply.
#[derive(Debug, Clone, PartialEq)]
pub enum TransformKind {
    Dct,
    Dwht,
    Dht,
    /// Columns of the basis are the KLT basis vectors; coefficient `j` is
    /// the projection onto column `j`.
    Klt(DMatrix<f64>),
}

impl TransformKind {
    pub fn name(&self) -> &'static str {
        match self {
            TransformKind::Dct => "dct",
            TransformKind::Dwht => "dwht",
            TransformKind::Dht => "dht",
            TransformKind::Klt(_) => "klt",
        }
    }

    /// Parses `dct`, `dwht` or `dht`. The KLT needs a basis and is built with
    /// [`klt_fit`] instead.
    pub fn parse_fixed(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "dct" => Ok(TransformKind::Dct),
            "dwht" | "wht" | "hadamard" => Ok(TransformKind::Dwht),
            "dht" | "haar" => Ok(TransformKind::Dht),
            other => Err(Error::invalid(format!("unknown transform `{other}`"))),
        }
    }

    fn check_dims(&self, rows: usize, cols: usize) -> Result<()> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("empty array"));
        }
        match self {
            TransformKind::Klt(basis) => {
                let l = rows * cols;
                if basis.nrows() != l || basis.ncols() != l {
                    return Err(Error::DimensionMismatch {
                        expected: format!("{l}x{l} basis"),
                        actual: format!("{}x{}", basis.nrows(), basis.ncols()),
                    });
                }
            }
            _ => {
                if !rows.is_power_of_two() || !cols.is_power_of_two() {
                    return Err(Error::DimensionMismatch {
                        expected: "power-of-two rows and cols".into(),
                        actual: format!("{rows}x{cols}"),
                    });
                }
            }
        }
        Ok(())
    }

    fn matrix_1d(&self, n: usize) -> DMatrix<f64> {
        match self {
            TransformKind::Dct => dct_matrix(n),
            TransformKind::Dwht => hadamard_matrix(n),
            TransformKind::Dht => haar_matrix(n),
            TransformKind::Klt(_) => unreachable!("KLT is not separable"),
        }
    }

    /// The `L x L` matrix `A` with `vec(forward(x)) = A vec(x)` in row-major
    /// vectorization.
    pub fn full_matrix(&self, rows: usize, cols: usize) -> Result<DMatrix<f64>> {
        self.check_dims(rows, cols)?;
        Ok(match self {
            TransformKind::Klt(basis) => basis.transpose(),
            _ => self.matrix_1d(rows).kronecker(&self.matrix_1d(cols)),
        })
    }
}

/// Orthonormal DCT-II matrix; row `k` is the `k`-th basis function.
pub fn dct_matrix(n: usize) -> DMatrix<f64> {
    let nf = n as f64;
    DMatrix::from_fn(n, n, |k, i| {
        let alpha = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
        alpha * (PI * (2.0 * i as f64 + 1.0) * k as f64 / (2.0 * nf)).cos()
    })
}

/// Orthonormal Walsh-Hadamard matrix in natural (Sylvester) order.
pub fn hadamard_matrix(n: usize) -> DMatrix<f64> {
    let scale = 1.0 / (n as f64).sqrt();
    DMatrix::from_fn(n, n, |k, i| if (k & i).count_ones() % 2 == 0 { scale } else { -scale })
}

/// Orthonormal full-depth Haar matrix: row 0 is the scaling function, then
/// wavelets from coarsest to finest.
pub fn haar_matrix(n: usize) -> DMatrix<f64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut total = DMatrix::<f64>::identity(n, n);
    let mut m = n;
    while m > 1 {
        let mut stage = DMatrix::<f64>::identity(n, n);
        for r in 0..m {
            for c in 0..m {
                stage[(r, c)] = 0.0;
            }
        }
        for k in 0..m / 2 {
            stage[(k, 2 * k)] = s;
            stage[(k, 2 * k + 1)] = s;
            stage[(m / 2 + k, 2 * k)] = s;
            stage[(m / 2 + k, 2 * k + 1)] = -s;
        }
        total = stage * total;
        m /= 2;
    }
    total
}

/// Transform coefficients of one `r x c` array, row-major.
///
/// Coefficient indices are 1-based and run along each row first: index 1 is
/// row 0 / column 0, index `c + 1` starts the second row.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientArray {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl CoefficientArray {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: format!("{} values", rows * cols),
                actual: values.len().to_string(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite coefficient"));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    /// 1-based coefficient index of `(row, col)`.
    pub fn index_of(&self, row: usize, col: usize) -> usize {
        row * self.cols + col + 1
    }

    /// `(row, col)` of the 1-based coefficient index.
    pub fn position(&self, index: usize) -> (usize, usize) {
        ((index - 1) / self.cols, (index - 1) % self.cols)
    }

    /// Coefficient by 1-based index.
    pub fn at(&self, index: usize) -> f64 {
        self.values[index - 1]
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

fn check_len(rows: usize, cols: usize, len: usize) -> Result<()> {
    if len != rows * cols {
        return Err(Error::DimensionMismatch {
            expected: format!("{rows}x{cols} = {} values", rows * cols),
            actual: len.to_string(),
        });
    }
    Ok(())
}

/// Applies the transform to a row-major `rows x cols` array.
pub fn forward(kind: &TransformKind, rows: usize, cols: usize, array: &[f64]) -> Result<CoefficientArray> {
    kind.check_dims(rows, cols)?;
    check_len(rows, cols, array.len())?;
    let values = match kind {
        TransformKind::Klt(basis) => {
            let x = nalgebra::DVector::from_column_slice(array);
            (basis.transpose() * x).as_slice().to_vec()
        }
        _ => {
            let x = DMatrix::from_row_slice(rows, cols, array);
            let y = kind.matrix_1d(rows) * x * kind.matrix_1d(cols).transpose();
            row_major(&y)
        }
    };
    CoefficientArray::new(rows, cols, values)
}

/// Inverse transform back to a row-major array.
pub fn inverse(kind: &TransformKind, coeffs: &CoefficientArray) -> Result<Vec<f64>> {
    let (rows, cols) = (coeffs.rows, coeffs.cols);
    kind.check_dims(rows, cols)?;
    Ok(match kind {
        TransformKind::Klt(basis) => {
            let t = nalgebra::DVector::from_column_slice(&coeffs.values);
            (basis * t).as_slice().to_vec()
        }
        _ => {
            let y = DMatrix::from_row_slice(rows, cols, &coeffs.values);
            let x = kind.matrix_1d(rows).transpose() * y * kind.matrix_1d(cols);
            row_major(&x)
        }
    })
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

/// Fits the KLT basis of a covariance matrix.
///
/// Basis vectors are sorted by descending eigenvalue. Eigenvalues equal to
/// within `1e-12` of the largest are ordered by the index of the basis
/// vector's largest-magnitude component, and that component is made
/// positive.
pub fn klt_fit(cov: &DMatrix<f64>) -> Result<TransformKind> {
    let n = cov.nrows();
    if n == 0 || cov.ncols() != n {
        return Err(Error::invalid("covariance must be a non-empty square matrix"));
    }
    let scale = cov.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    for i in 0..n {
        for j in 0..i {
            if (cov[(i, j)] - cov[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::invalid(format!("covariance not symmetric at ({i}, {j})")));
            }
        }
    }
    let eig = SymmetricEigen::new(cov.clone());
    let mut cols: Vec<(f64, usize, Vec<f64>)> = (0..n)
        .map(|j| {
            let mut v: Vec<f64> = eig.eigenvectors.column(j).iter().copied().collect();
            let lead = dominant_index(&v);
            if v[lead] < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            (eig.eigenvalues[j], lead, v)
        })
        .collect();
    cols.sort_by(|a, b| b.0.total_cmp(&a.0));
    let tie = 1e-12 * cols.first().map_or(0.0, |c| c.0.abs()).max(f64::MIN_POSITIVE);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (cols[start].0 - cols[end].0).abs() <= tie {
            end += 1;
        }
        cols[start..end].sort_by_key(|c| c.1);
        start = end;
    }
    let basis = DMatrix::from_fn(n, n, |i, j| cols[j].2[i]);
    Ok(TransformKind::Klt(basis))
}

fn dominant_index(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() * (1.0 + 1e-12) {
            best = i;
        }
    }
    best
}

/// `C_TT = A C_XX Aᵀ` for the transform's full matrix `A`.
pub fn transform_covariance(
    kind: &TransformKind,
    rows: usize,
    cols: usize,
    cov: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let a = kind.full_matrix(rows, cols)?;
    if cov.nrows() != a.ncols() || cov.ncols() != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: format!("{0}x{0}", a.ncols()),
            actual: format!("{}x{}", cov.nrows(), cov.ncols()),
        });
    }
    Ok(&a * cov * a.transpose())
}

fn off_diagonal_mass(m: &DMatrix<f64>) -> f64 {
    let mut s = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j {
                s += m[(i, j)].abs();
            }
        }
    }
    s
}

/// Decorrelation efficiency `η_c = 1 - Σ_{a≠b}|C_TT| / Σ_{a≠b}|C_XX|`.
pub fn decorrelation_efficiency(c_tt: &DMatrix<f64>, c_xx: &DMatrix<f64>) -> Result<f64> {
    if c_tt.shape() != c_xx.shape() {
        return Err(Error::DimensionMismatch {
            expected: format!("{:?}", c_xx.shape()),
            actual: format!("{:?}", c_tt.shape()),
        });
    }
    let denom = off_diagonal_mass(c_xx);
    if denom == 0.0 {
        return Err(Error::invalid("source covariance has no off-diagonal mass"));
    }
    Ok(1.0 - off_diagonal_mass(c_tt) / denom)
}
