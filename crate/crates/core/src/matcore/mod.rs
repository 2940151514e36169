//! Dense complex matrices, block-diagonal direct sums and the two base norms.
//!
//! Every element handled by the toolkit ends up as a [`CMatrix`] or a
//! [`BlockMatrix`]. Storage is row-major; all operations are pure.

mod eig;
mod literal;
mod svd;

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{OscatError, Result};

pub use eig::{herm_eig, herm_eigvals, sym_eig, HermEig};
pub use literal::{format_complex, format_matrix, parse_complex, parse_matrix};
pub use svd::{svd, Svd};

pub type C64 = Complex64;

/// Default cap on any single matrix dimension produced by `kron`/amplification.
pub const DEFAULT_DIM_CAP: usize = 4096;

/// Default absolute tolerance used by predicates.
pub const DEFAULT_TOL: f64 = 1e-9;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Matrix unit `e_ij` in an `rows x cols` matrix.
    pub fn unit(rows: usize, cols: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        m[(i, j)] = ONE;
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(OscatError::InvalidInput(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(CMatrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    pub fn from_real(rows: usize, cols: usize, vals: &[f64]) -> Self {
        assert_eq!(vals.len(), rows * cols);
        CMatrix {
            rows,
            cols,
            data: vals.iter().map(|&v| c(v, 0.0)).collect(),
        }
    }

    pub fn diag(vals: &[C64]) -> Self {
        let mut m = Self::zeros(vals.len(), vals.len());
        for (i, v) in vals.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn scalar(z: C64) -> Self {
        CMatrix {
            rows: 1,
            cols: 1,
            data: vec![z],
        }
    }

    pub fn column(v: &[C64]) -> Self {
        CMatrix {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }
    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }
    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }
    #[inline]
    pub fn data(&self) -> &[C64] {
        &self.data
    }
    #[inline]
    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }
    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub(crate) fn ensure_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(OscatError::InvalidInput("non-finite matrix entry".into()))
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(c(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn matmul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul shape mismatch {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let brow = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Kronecker product with row index `(i,k)` and column index `(j,l)`.
    /// Infallible variant for internal use; see [`kron`] for the capped entry point.
    pub fn kron(&self, rhs: &CMatrix) -> CMatrix {
        let (r, c_) = (self.rows * rhs.rows, self.cols * rhs.cols);
        let mut out = CMatrix::zeros(r, c_);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == ZERO {
                    continue;
                }
                for k in 0..rhs.rows {
                    for l in 0..rhs.cols {
                        out[(i * rhs.rows + k, j * rhs.cols + l)] = a * rhs[(k, l)];
                    }
                }
            }
        }
        out
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry of `|a - a*|`; zero for Hermitian matrices.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut d: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                d = d.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        d
    }

    /// `(a + a*) / 2`
    pub fn hermitian_part(&self) -> CMatrix {
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
            }
        }
        out
    }

    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> CMatrix {
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_submatrix(&mut self, r0: usize, c0: usize, m: &CMatrix) {
        for i in 0..m.rows {
            for j in 0..m.cols {
                self[(r0 + i, c0 + j)] = m[(i, j)];
            }
        }
    }

    /// Block-diagonal direct sum `a ⊕ b`.
    pub fn direct_sum(&self, other: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.rows + other.rows, self.cols + other.cols);
        out.set_submatrix(0, 0, self);
        out.set_submatrix(self.rows, self.cols, other);
        out
    }

    pub fn col(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Row-major vectorisation.
    pub fn vec(&self) -> Vec<C64> {
        self.data.clone()
    }

    /// Inverse of [`CMatrix::vec`].
    pub fn unvec(rows: usize, cols: usize, v: &[C64]) -> CMatrix {
        assert_eq!(v.len(), rows * cols);
        CMatrix {
            rows,
            cols,
            data: v.to_vec(),
        }
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CMatrix{}x{} {}", self.rows, self.cols, format_matrix(self))
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.scale_re(-1.0)
    }
}

/// Kronecker product, refusing results with a dimension above [`DEFAULT_DIM_CAP`].
pub fn kron(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    kron_capped(a, b, DEFAULT_DIM_CAP)
}

pub fn kron_capped(a: &CMatrix, b: &CMatrix, cap: usize) -> Result<CMatrix> {
    let r = a.rows.saturating_mul(b.rows);
    let c_ = a.cols.saturating_mul(b.cols);
    let big = r.max(c_);
    if big > cap {
        return Err(OscatError::SizeLimit {
            what: "kron dimension",
            requested: big,
            cap,
        });
    }
    Ok(a.kron(b))
}

/// Largest singular value.
pub fn op_norm(a: &CMatrix) -> Result<f64> {
    a.ensure_finite()?;
    if a.rows == 0 || a.cols == 0 {
        return Ok(0.0);
    }
    Ok(svd(a).s.first().copied().unwrap_or(0.0))
}

/// Sum of singular values.
pub fn tr_norm(a: &CMatrix) -> Result<f64> {
    a.ensure_finite()?;
    if a.rows == 0 || a.cols == 0 {
        return Ok(0.0);
    }
    Ok(svd(a).s.iter().sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PsdVerdict {
    Psd,
    NotPsd { min_eig: f64 },
    NotHermitian { defect: f64 },
}

impl PsdVerdict {
    pub fn is_psd(&self) -> bool {
        matches!(self, PsdVerdict::Psd)
    }
}

pub fn psd_check(a: &CMatrix, tol: f64) -> Result<PsdVerdict> {
    a.ensure_finite()?;
    if !a.is_square() {
        return Err(OscatError::InvalidInput("psd_check needs a square matrix".into()));
    }
    let defect = a.hermitian_defect();
    if defect > tol {
        return Ok(PsdVerdict::NotHermitian { defect });
    }
    if a.rows == 0 {
        return Ok(PsdVerdict::Psd);
    }
    let eig = herm_eig(&a.hermitian_part())?;
    let min_eig = eig.values[0];
    if min_eig >= -tol {
        Ok(PsdVerdict::Psd)
    } else {
        Ok(PsdVerdict::NotPsd { min_eig })
    }
}

/// Applies `f` to the spectrum of a Hermitian matrix.
pub fn spectral_map(a: &CMatrix, f: impl Fn(f64) -> f64) -> Result<CMatrix> {
    let HermEig { values, vectors } = herm_eig(&a.hermitian_part())?;
    let n = a.rows;
    let mut out = CMatrix::zeros(n, n);
    for (k, lam) in values.iter().enumerate() {
        let w = f(*lam);
        if w == 0.0 {
            continue;
        }
        for i in 0..n {
            let vi = vectors[(i, k)] * w;
            for j in 0..n {
                out[(i, j)] += vi * vectors[(j, k)].conj();
            }
        }
    }
    Ok(out)
}

/// Square root of a positive semidefinite matrix, with eigenvalues clamped at zero.
pub fn psd_sqrt(a: &CMatrix) -> Result<CMatrix> {
    spectral_map(a, |l| l.max(0.0).sqrt())
}

/// Unitary-like factor `V U*` of `g = U Σ V*`, the maximiser of `Re tr(g x)` over the
/// operator-norm unit ball.
pub fn norming_contraction(g: &CMatrix) -> CMatrix {
    let Svd { u, s, v } = svd(g);
    let mut out = CMatrix::zeros(g.cols, g.rows);
    for (k, sk) in s.iter().enumerate() {
        if *sk <= 0.0 {
            continue;
        }
        for i in 0..g.cols {
            for j in 0..g.rows {
                out[(i, j)] += v[(i, k)] * u[(j, k)].conj();
            }
        }
    }
    out
}

/// Ordered list of square blocks, the carrier of `⊕ M_{k_i}` and `⊕ T_{k_i}` elements.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockMatrix {
    blocks: Vec<CMatrix>,
}

impl fmt::Debug for BlockMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.blocks.iter()).finish()
    }
}

impl BlockMatrix {
    pub fn new(blocks: Vec<CMatrix>) -> Result<Self> {
        if let Some(b) = blocks.iter().find(|b| !b.is_square()) {
            return Err(OscatError::InvalidInput(format!(
                "block of shape {}x{} is not square",
                b.rows(),
                b.cols()
            )));
        }
        Ok(BlockMatrix { blocks })
    }

    pub fn single(m: CMatrix) -> Result<Self> {
        Self::new(vec![m])
    }

    pub fn zeros(shape: &[usize]) -> Self {
        BlockMatrix {
            blocks: shape.iter().map(|&k| CMatrix::zeros(k, k)).collect(),
        }
    }

    pub fn identity(shape: &[usize]) -> Self {
        BlockMatrix {
            blocks: shape.iter().map(|&k| CMatrix::identity(k)).collect(),
        }
    }

    pub fn shape(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.rows()).collect()
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn blocks_mut(&mut self) -> &mut [CMatrix] {
        &mut self.blocks
    }

    pub fn into_blocks(self) -> Vec<CMatrix> {
        self.blocks
    }

    /// Dimension of the underlying vector space, `Σ k_i²`.
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.rows() * b.rows()).sum()
    }

    pub fn map_blocks(&self, f: impl Fn(&CMatrix) -> CMatrix) -> BlockMatrix {
        BlockMatrix {
            blocks: self.blocks.iter().map(f).collect(),
        }
    }

    pub fn zip_with(&self, other: &BlockMatrix, f: impl Fn(&CMatrix, &CMatrix) -> CMatrix) -> Result<BlockMatrix> {
        if self.shape() != other.shape() {
            return Err(OscatError::ShapeMismatch(format!(
                "block shapes {:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(BlockMatrix {
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect(),
        })
    }

    /// Embeds the blocks on the diagonal of one `Σk_i x Σk_i` matrix.
    pub fn to_dense(&self) -> CMatrix {
        let n: usize = self.shape().iter().sum();
        let mut out = CMatrix::zeros(n, n);
        let mut off = 0;
        for b in &self.blocks {
            out.set_submatrix(off, off, b);
            off += b.rows();
        }
        out
    }

    /// Coordinates in the lexicographic `e_ij` basis, block by block.
    pub fn coords(&self) -> Vec<C64> {
        self.blocks.iter().flat_map(|b| b.data().iter().copied()).collect()
    }

    pub fn from_coords(shape: &[usize], coords: &[C64]) -> Result<BlockMatrix> {
        let need: usize = shape.iter().map(|k| k * k).sum();
        if coords.len() != need {
            return Err(OscatError::ShapeMismatch(format!(
                "{} coordinates for block shape {shape:?}",
                coords.len()
            )));
        }
        let mut off = 0;
        let mut blocks = Vec::with_capacity(shape.len());
        for &k in shape {
            blocks.push(CMatrix::unvec(k, k, &coords[off..off + k * k]));
            off += k * k;
        }
        Ok(BlockMatrix { blocks })
    }

    /// Basis element number `t` of the block space with the given shape.
    pub fn basis(shape: &[usize], t: usize) -> BlockMatrix {
        let mut m = BlockMatrix::zeros(shape);
        let mut off = 0;
        for b in m.blocks.iter_mut() {
            let k2 = b.rows() * b.rows();
            if t < off + k2 {
                b.data_mut()[t - off] = ONE;
                return m;
            }
            off += k2;
        }
        panic!("basis index {t} out of range for shape {shape:?}");
    }

    pub fn adjoint(&self) -> BlockMatrix {
        self.map_blocks(CMatrix::adjoint)
    }

    pub fn mul(&self, other: &BlockMatrix) -> Result<BlockMatrix> {
        self.zip_with(other, |a, b| a.matmul(b))
    }

    pub fn add(&self, other: &BlockMatrix) -> Result<BlockMatrix> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &BlockMatrix) -> Result<BlockMatrix> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: C64) -> BlockMatrix {
        self.map_blocks(|b| b.scale(s))
    }

    pub fn trace(&self) -> C64 {
        self.blocks.iter().map(|b| b.trace()).sum()
    }

    /// Operator norm of the direct sum: the maximum over blocks.
    pub fn op_norm(&self) -> Result<f64> {
        let mut m: f64 = 0.0;
        for b in &self.blocks {
            m = m.max(op_norm(b)?);
        }
        Ok(m)
    }

    /// Trace norm of the direct sum: the sum over blocks.
    pub fn tr_norm(&self) -> Result<f64> {
        let mut s = 0.0;
        for b in &self.blocks {
            s += tr_norm(b)?;
        }
        Ok(s)
    }

    pub fn max_abs_diff(&self, other: &BlockMatrix) -> f64 {
        if self.shape() != other.shape() {
            return f64::INFINITY;
        }
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    pub fn psd_check(&self, tol: f64) -> Result<PsdVerdict> {
        let mut worst = PsdVerdict::Psd;
        for b in &self.blocks {
            match psd_check(b, tol)? {
                PsdVerdict::Psd => {}
                v @ PsdVerdict::NotHermitian { .. } => return Ok(v),
                PsdVerdict::NotPsd { min_eig } => {
                    worst = match worst {
                        PsdVerdict::NotPsd { min_eig: m } => PsdVerdict::NotPsd {
                            min_eig: m.min(min_eig),
                        },
                        _ => PsdVerdict::NotPsd { min_eig },
                    }
                }
            }
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_matrix, random_unitary, rng};

    #[test]
    fn op_norm_examples() {
        assert!((op_norm(&CMatrix::identity(2)).unwrap() - 1.0).abs() < 1e-15);
        let d = CMatrix::diag(&[c(3.0, 0.0), c(0.0, -4.0)]);
        assert!((op_norm(&d).unwrap() - 4.0).abs() < 1e-12);
        let mut r = rng(7);
        for n in 1..6 {
            let u = random_unitary(&mut r, n);
            assert!((op_norm(&u).unwrap() - 1.0).abs() < 1e-12);
            assert!((tr_norm(&u).unwrap() - n as f64).abs() < 1e-11);
        }
    }

    #[test]
    fn tr_norm_examples() {
        assert_eq!(tr_norm(&CMatrix::zeros(3, 3)).unwrap(), 0.0);
        assert!((tr_norm(&CMatrix::unit(2, 2, 0, 1)).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_finite_rejected() {
        let mut a = CMatrix::identity(2);
        a[(0, 1)] = c(f64::NAN, 0.0);
        assert!(matches!(op_norm(&a), Err(OscatError::InvalidInput(_))));
        assert!(matches!(tr_norm(&a), Err(OscatError::InvalidInput(_))));
        assert!(psd_check(&a, 1e-9).is_err());
    }

    #[test]
    fn psd_examples() {
        assert_eq!(psd_check(&CMatrix::identity(3), 1e-9).unwrap(), PsdVerdict::Psd);
        let d = CMatrix::diag(&[ONE, c(-1.0, 0.0)]);
        match psd_check(&d, 1e-9).unwrap() {
            PsdVerdict::NotPsd { min_eig } => assert!((min_eig + 1.0).abs() < 1e-12),
            v => panic!("{v:?}"),
        }
        let mut r = rng(3);
        let a = random_matrix(&mut r, 4, 4);
        assert!(psd_check(&a.adjoint().matmul(&a), 1e-9).unwrap().is_psd());
        assert!(matches!(
            psd_check(&CMatrix::unit(2, 2, 0, 1), 1e-9).unwrap(),
            PsdVerdict::NotHermitian { .. }
        ));
    }

    #[test]
    fn kron_examples() {
        let b = CMatrix::from_real(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(kron(&CMatrix::scalar(ONE), &b).unwrap(), b);
        let e = kron(&CMatrix::unit(2, 2, 0, 0), &CMatrix::unit(2, 2, 1, 1)).unwrap();
        assert_eq!(e, CMatrix::unit(4, 4, 1, 1));
        let mut r = rng(11);
        let (u, v) = (random_unitary(&mut r, 2), random_unitary(&mut r, 3));
        assert!((op_norm(&kron(&u, &v).unwrap()).unwrap() - 1.0).abs() < 1e-12);
        let big = CMatrix::zeros(100, 1);
        assert!(matches!(
            kron_capped(&big, &big, 4096),
            Err(OscatError::SizeLimit { .. })
        ));
    }

    #[test]
    fn block_basics() {
        let z = BlockMatrix::zeros(&[0, 2]);
        assert_eq!(z.dim(), 4);
        assert_eq!(z.shape(), vec![0, 2]);
        let id = BlockMatrix::identity(&[2, 3]);
        assert_eq!(id.to_dense(), CMatrix::identity(5));
        assert!(BlockMatrix::new(vec![CMatrix::zeros(1, 2)]).is_err());
        let e = BlockMatrix::basis(&[2, 1], 4);
        assert_eq!(e.blocks()[1][(0, 0)], ONE);
        let round = BlockMatrix::from_coords(&[2, 1], &e.coords()).unwrap();
        assert_eq!(round, e);
    }

    #[test]
    fn norming_contraction_attains_trace_norm() {
        let mut r = rng(5);
        let g = random_matrix(&mut r, 3, 3);
        let x = norming_contraction(&g);
        assert!(op_norm(&x).unwrap() <= 1.0 + 1e-12);
        let val = g.matmul(&x).trace().re;
        assert!((val - tr_norm(&g).unwrap()).abs() < 1e-10);
    }
}
