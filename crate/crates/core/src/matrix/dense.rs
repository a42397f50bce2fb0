use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{LabError, Result};

pub type C64 = Complex64;

/// Dense complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix(Mat<C64>);

/// Singular value decomposition `W diag(s) V*` with `s` sorted descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub w: Mat<C64>,
    pub s: Vec<f64>,
    pub v: Mat<C64>,
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Mat<C64>,
}

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix(Mat::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        DenseMatrix(Mat::identity(n, n))
    }

    /// Build from row-major entries, rejecting NaN and infinities.
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(LabError::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Self::from_inner(Mat::from_fn(rows, cols, |i, j| data[i * cols + j]))
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        DenseMatrix(Mat::from_fn(rows, cols, f))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(
            n,
            n,
            |i, j| if i == j { C64::new(diag[i], 0.0) } else { ZERO },
        )
    }

    /// Matrix with `M e_s = e_{perm[s]}`.
    pub fn from_permutation(perm: &[usize]) -> Self {
        let n = perm.len();
        let mut m = Mat::zeros(n, n);
        for (s, &t) in perm.iter().enumerate() {
            m[(t, s)] = ONE;
        }
        DenseMatrix(m)
    }

    /// Outer product `a b^T` (no conjugation).
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        Self::from_fn(a.len(), b.len(), |i, j| a[i] * b[j])
    }

    pub fn from_inner(m: Mat<C64>) -> Result<Self> {
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let z = m[(i, j)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(LabError::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(DenseMatrix(m))
    }

    pub(crate) fn wrap(m: Mat<C64>) -> Self {
        DenseMatrix(m)
    }

    pub fn inner(&self) -> &Mat<C64> {
        &self.0
    }

    pub fn into_inner(self) -> Mat<C64> {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.rows() == 0 || self.cols() == 0
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, z: C64) {
        self.0[(i, j)] = z;
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows()).map(|i| self.0[(i, j)]).collect()
    }

    pub fn row(&self, i: usize) -> Vec<C64> {
        (0..self.cols()).map(|j| self.0[(i, j)]).collect()
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols() != other.rows() {
            return Err(LabError::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        Ok(DenseMatrix(&self.0 * &other.0))
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.0[(i, j)] * v[j]).sum())
            .collect()
    }

    fn same_shape(&self, other: &DenseMatrix) -> Result<()> {
        if self.rows() != other.rows() || self.cols() != other.cols() {
            return Err(LabError::Shape(format!(
                "{}x{} vs {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.same_shape(other)?;
        Ok(DenseMatrix(&self.0 + &other.0))
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.same_shape(other)?;
        Ok(DenseMatrix(&self.0 - &other.0))
    }

    pub fn scale(&self, c: C64) -> DenseMatrix {
        Self::from_fn(self.rows(), self.cols(), |i, j| self.0[(i, j)] * c)
    }

    pub fn scale_real(&self, c: f64) -> DenseMatrix {
        self.scale(C64::new(c, 0.0))
    }

    pub fn adjoint(&self) -> DenseMatrix {
        DenseMatrix(self.0.adjoint().to_owned())
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix(self.0.transpose().to_owned())
    }

    pub fn conj(&self) -> DenseMatrix {
        Self::from_fn(self.rows(), self.cols(), |i, j| self.0[(i, j)].conj())
    }

    /// Entrywise modulus `|x| = (|x_ij|)`.
    pub fn abs(&self) -> DenseMatrix {
        Self::from_fn(self.rows(), self.cols(), |i, j| {
            C64::new(self.0[(i, j)].norm(), 0.0)
        })
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows().min(self.cols()))
            .map(|i| self.0[(i, i)])
            .sum()
    }

    fn entries(&self) -> impl Iterator<Item = C64> + '_ {
        (0..self.cols()).flat_map(move |j| (0..self.rows()).map(move |i| self.0[(i, j)]))
    }

    pub fn frobenius(&self) -> f64 {
        self.entries().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Hilbert-Schmidt pairing `Tr(A* B)`.
    pub fn hs_inner(&self, other: &DenseMatrix) -> Result<C64> {
        self.same_shape(other)?;
        Ok(self
            .entries()
            .zip(other.entries())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!(self.rows(), other.rows());
        assert_eq!(self.cols(), other.cols());
        self.entries()
            .zip(other.entries())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_real_nonnegative(&self) -> bool {
        self.entries().all(|z| z.im == 0.0 && z.re >= 0.0)
    }

    pub fn is_real(&self) -> bool {
        self.entries().all(|z| z.im == 0.0)
    }

    /// `||U* U - I||_F`, zero for unitary matrices.
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let g = self.0.adjoint() * &self.0;
        DenseMatrix(g)
            .sub(&DenseMatrix::identity(self.rows()))
            .map(|d| d.frobenius())
            .unwrap_or(f64::INFINITY)
    }

    /// Kronecker product `A (x) B`.
    pub fn kron(&self, other: &DenseMatrix) -> DenseMatrix {
        let (r, c) = (other.rows(), other.cols());
        Self::from_fn(self.rows() * r, self.cols() * c, |i, j| {
            self.0[(i / r, j / c)] * other.0[(i % r, j % c)]
        })
    }

    /// Square block `[offset, offset + size)` in both indices.
    pub fn block(&self, offset: usize, size: usize) -> DenseMatrix {
        DenseMatrix(self.0.submatrix(offset, offset, size, size).to_owned())
    }

    pub fn svd(&self) -> Result<Svd> {
        if self.is_empty() {
            return Err(LabError::EmptyMatrix);
        }
        let svd = self.0.svd().map_err(|_| LabError::SvdFailure)?;
        let s: Vec<f64> = svd.S().column_vector().iter().map(|z| z.re).collect();
        Ok(Svd {
            w: svd.U().to_owned(),
            s,
            v: svd.V().to_owned(),
        })
    }

    /// Inverse by LU with partial pivoting; fails when the matrix is numerically singular.
    pub fn inverse(&self) -> Result<DenseMatrix> {
        if !self.is_square() || self.is_empty() {
            return Err(LabError::Shape(format!(
                "{}x{} is not a nonempty square matrix",
                self.rows(),
                self.cols()
            )));
        }
        let s = self.singular_values()?;
        let smallest = s[s.len() - 1];
        if smallest <= 1e-12 * s[0] {
            return Err(LabError::Precondition(format!(
                "matrix is singular (condition number {:e})",
                s[0] / smallest
            )));
        }
        use faer::linalg::solvers::DenseSolveCore;
        Ok(DenseMatrix(self.0.partial_piv_lu().inverse()))
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        if self.is_empty() {
            return Err(LabError::EmptyMatrix);
        }
        let mut s = self.0.singular_values().map_err(|_| LabError::SvdFailure)?;
        s.sort_by(|a, b| b.total_cmp(a));
        Ok(s)
    }

    /// Numerical rank: singular values above `tol * s_max`.
    pub fn rank(&self, tol: f64) -> Result<usize> {
        let s = self.singular_values()?;
        let top = s.first().copied().unwrap_or(0.0);
        if top == 0.0 {
            return Ok(0);
        }
        Ok(s.iter().filter(|&&x| x > tol * top).count())
    }

    /// Eigen-decomposition of the Hermitian part `(A + A*)/2`.
    pub fn hermitian_eigen(&self) -> Result<HermitianEigen> {
        if !self.is_square() || self.is_empty() {
            return Err(LabError::Shape(format!(
                "{}x{} is not a nonempty square matrix",
                self.rows(),
                self.cols()
            )));
        }
        let h = Mat::from_fn(self.rows(), self.cols(), |i, j| {
            (self.0[(i, j)] + self.0[(j, i)].conj()) * 0.5
        });
        let eig = h
            .self_adjoint_eigen(faer::Side::Lower)
            .map_err(|_| LabError::EigenFailure)?;
        Ok(HermitianEigen {
            values: eig.S().column_vector().iter().map(|z| z.re).collect(),
            vectors: eig.U().to_owned(),
        })
    }
}

impl Svd {
    /// `W diag(f(s)) V*`.
    pub fn recompose(&self, f: impl Fn(f64) -> f64) -> DenseMatrix {
        let k = self.s.len();
        let fs: Vec<f64> = self.s.iter().map(|&s| f(s)).collect();
        let scaled = Mat::from_fn(self.w.nrows(), k, |i, j| self.w[(i, j)] * fs[j]);
        DenseMatrix(scaled * self.v.get(.., 0..k).adjoint())
    }

    pub fn v_adjoint(&self) -> DenseMatrix {
        DenseMatrix(self.v.adjoint().to_owned())
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixWire {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl Serialize for DenseMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut data = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                let z = self.0[(i, j)];
                data.push([z.re, z.im]);
            }
        }
        MatrixWire {
            rows: self.rows(),
            cols: self.cols(),
            data,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DenseMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = MatrixWire::deserialize(deserializer)?;
        let data = wire
            .data
            .iter()
            .map(|[re, im]| C64::new(*re, *im))
            .collect();
        DenseMatrix::new(wire.rows, wire.cols, data).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        let err = DenseMatrix::from_real(1, 2, &[1.0, f64::NAN]).unwrap_err();
        assert_eq!(err, LabError::NonFinite { row: 0, col: 1 });
        assert!(DenseMatrix::from_real(2, 2, &[1.0]).is_err());
    }

    #[test]
    fn json_is_row_major_pairs() {
        let m = DenseMatrix::new(1, 2, vec![C64::new(1.0, 2.0), C64::new(3.0, -4.0)]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"rows":1,"cols":2,"data":[[1.0,2.0],[3.0,-4.0]]}"#);
        let back: DenseMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(
            serde_json::from_str::<DenseMatrix>(r#"{"rows":2,"cols":2,"data":[[1,0]]}"#).is_err()
        );
    }

    #[test]
    fn permutation_convention() {
        let p = DenseMatrix::from_permutation(&[1, 2, 0]);
        let e0 = [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
        let img = p.apply(&e0);
        assert_eq!(img[1], C64::new(1.0, 0.0));
        assert_eq!(p.unitarity_defect(), 0.0);
    }

    #[test]
    fn svd_recomposes() {
        let m = DenseMatrix::from_fn(3, 3, |i, j| {
            C64::new((i * 3 + j) as f64, (i as f64) - (j as f64))
        });
        let svd = m.svd().unwrap();
        assert!(svd.s.windows(2).all(|w| w[0] >= w[1]));
        assert!(svd.recompose(|s| s).max_abs_diff(&m) < 1e-12);
    }
}
