use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use faer::{Mat, Scale};
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use super::C64;
use crate::error::{Error, Result};

/// Largest Hilbert-space dimension any builder will allocate.
pub const MAX_DIM: usize = 4096;

/// Dense square complex matrix.
///
/// Every operator in the crate (Hamiltonians, perturbations, density
/// matrices, propagators) is stored this way. Storage is column-major and
/// owned; values are immutable once handed out except through the explicit
/// `set`/`AddAssign` builders.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    inner: Mat<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            inner: Mat::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            inner: Mat::identity(dim, dim),
        }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self {
            inner: Mat::from_fn(dim, dim, f),
        }
    }

    /// Builds a matrix from row-major nested rows; fails unless square,
    /// non-empty and finite.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::invalid("matrix must have dimension >= 1"));
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != dim) {
            return Err(Error::invalid(format!(
                "matrix is not square: row {bad} has {} entries, expected {dim}",
                rows[bad].len()
            )));
        }
        let m = Self::from_fn(dim, |i, j| rows[i][j]);
        m.ensure_finite()?;
        Ok(m)
    }

    /// Real-valued convenience constructor (row-major).
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_diagonal(values: &[C64]) -> Self {
        let n = values.len();
        Self::from_fn(n, |i, j| {
            if i == j {
                values[i]
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn from_real_diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, |i, j| {
            if i == j {
                C64::new(values[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub(crate) fn from_faer(inner: Mat<C64>) -> Self {
        debug_assert_eq!(inner.nrows(), inner.ncols());
        Self { inner }
    }

    pub fn as_faer(&self) -> &Mat<C64> {
        &self.inner
    }

    pub fn into_faer(self) -> Mat<C64> {
        self.inner
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.inner[(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        self.inner[(i, j)] = value;
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim()).map(|i| self.get(i, i)).collect()
    }

    pub fn is_finite(&self) -> bool {
        let n = self.dim();
        (0..n).all(|j| {
            (0..n).all(|i| {
                let z = self.get(i, j);
                z.re.is_finite() && z.im.is_finite()
            })
        })
    }

    pub(crate) fn ensure_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::invalid("matrix has non-finite entries"))
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint().to_owned(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            inner: self.inner.transpose().to_owned(),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            inner: self.inner.conjugate().to_owned(),
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            inner: Scale(factor) * &self.inner,
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(C64::new(factor, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.norm_l2()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.inner.norm_max()
    }

    /// Induced 1-norm (maximum absolute column sum).
    pub fn one_norm(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|j| (0..n).map(|i| self.get(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Matrix product. Left factors with few nonzeros (fermion ladder
    /// operators, parity strings) take an `O(nnz * n)` path.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in matmul");
        let n = self.dim();
        let entries = self.nonzero_entries(n * n / 16 + 1);
        match entries {
            Some(entries) => {
                let mut out = Mat::<C64>::zeros(n, n);
                for j in 0..n {
                    for &(i, k, v) in &entries {
                        out[(i, j)] += v * rhs.inner[(k, j)];
                    }
                }
                Self { inner: out }
            }
            None => Self {
                inner: &self.inner * &rhs.inner,
            },
        }
    }

    /// Collects the nonzero entries if there are at most `limit` of them.
    fn nonzero_entries(&self, limit: usize) -> Option<Vec<(usize, usize, C64)>> {
        let n = self.dim();
        let mut out = Vec::new();
        for k in 0..n {
            for i in 0..n {
                let v = self.inner[(i, k)];
                if v.re != 0.0 || v.im != 0.0 {
                    if out.len() == limit {
                        return None;
                    }
                    out.push((i, k, v));
                }
            }
        }
        Some(out)
    }

    pub fn powi(&self, exponent: u32) -> Self {
        let mut result = Self::identity(self.dim());
        for _ in 0..exponent {
            result = result.matmul(self);
        }
        result
    }

    /// `[A, B] = AB - BA`
    pub fn commutator(&self, other: &Self) -> Self {
        &self.matmul(other) - &other.matmul(self)
    }

    /// `{A, B} = AB + BA`
    pub fn anticommutator(&self, other: &Self) -> Self {
        &self.matmul(other) + &other.matmul(self)
    }

    /// `(A + A†)/2`
    pub fn hermitian_part(&self) -> Self {
        let mut out = self.clone();
        let n = self.dim();
        for j in 0..n {
            for i in 0..n {
                out.inner[(i, j)] = (self.inner[(i, j)] + self.inner[(j, i)].conj()) * 0.5;
            }
        }
        out
    }

    /// `‖A − A†‖_F`
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for j in 0..n {
            for i in 0..n {
                acc += (self.inner[(i, j)] - self.inner[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// Hermitian within `rel_tol · max(‖A‖_F, 1)`.
    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.hermiticity_defect() <= rel_tol * self.frobenius_norm().max(1.0)
    }

    /// Frobenius distance relative to the larger of the two norms (or 1).
    pub fn relative_distance(&self, other: &Self) -> f64 {
        let scale = self.frobenius_norm().max(other.frobenius_norm()).max(1.0);
        (self - other).frobenius_norm() / scale
    }

    /// Largest entrywise modulus of `A − B`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self - other).max_abs()
    }

    /// `P† A P` for a (generally rectangular) column basis `basis` given as
    /// columns of an `n × k` faer matrix.
    pub fn project(&self, basis: &Mat<C64>) -> Mat<C64> {
        basis.adjoint() * (&self.inner * basis)
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.get(i, j)).collect())
            .collect()
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.dim();
        writeln!(f, "ComplexMatrix({n}x{n}) [")?;
        for i in 0..n.min(8) {
            write!(f, "  ")?;
            for j in 0..n.min(8) {
                let z = self.get(i, j);
                write!(f, "{:>9.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f, "{}", if n > 8 { "..." } else { "" })?;
        }
        write!(f, "]")
    }
}

/// Row-major list of `[re, im]` pairs.
impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.dim();
        let mut seq = serializer.serialize_seq(Some(n))?;
        for i in 0..n {
            let row: Vec<[f64; 2]> = (0..n)
                .map(|j| {
                    let z = self.get(i, j);
                    [z.re, z.im]
                })
                .collect();
            seq.serialize_element(&row)?;
        }
        seq.end()
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner + &rhs.inner,
        }
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner - &rhs.inner,
        }
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        self.inner += &rhs.inner;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn sparse_and_dense_products_agree() {
        let n = 16;
        let sparse = ComplexMatrix::from_fn(n, |i, j| {
            if j == (i + 3) % n {
                c(1.0, -2.0)
            } else {
                c(0.0, 0.0)
            }
        });
        let dense = ComplexMatrix::from_fn(n, |i, j| c((i * j) as f64 * 0.1, i as f64 - j as f64));
        let fast = sparse.matmul(&dense);
        let slow = ComplexMatrix {
            inner: sparse.as_faer() * dense.as_faer(),
        };
        assert!(fast.max_abs_diff(&slow) < 1e-12);
    }

    #[test]
    fn rejects_ragged_and_nonfinite_rows() {
        assert!(ComplexMatrix::from_rows(&[vec![c(1.0, 0.0)], vec![]]).is_err());
        assert!(ComplexMatrix::from_rows(&[vec![c(f64::NAN, 0.0)]]).is_err());
        assert!(ComplexMatrix::from_rows(&[]).is_err());
    }

    #[test]
    fn commutator_of_pauli_matrices() {
        let sx = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let sy = ComplexMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(0.0, -1.0)],
            vec![c(0.0, 1.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let sz = ComplexMatrix::from_real_diagonal(&[1.0, -1.0]);
        let comm = sx.commutator(&sy);
        assert!(comm.max_abs_diff(&sz.scale(c(0.0, 2.0))) < 1e-15);
        assert!(sx.anticommutator(&sy).max_abs() < 1e-15);
    }
}
