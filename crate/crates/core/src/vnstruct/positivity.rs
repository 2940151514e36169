use serde::{Deserialize, Serialize};

use super::{VnAlgebra, VnCoalgebra};
use crate::error::{OscatError, Result};
use crate::matcore::{psd_check, psd_sqrt, BlockMatrix, PsdVerdict, C64};

/// Tolerance the witness has to reproduce its target to.
const WITNESS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositivityWitness {
    /// `a` with `p = a*a`; for functionals, the representing matrix of `g` with
    /// `f = (g* ⊗ g)∘δ`.
    pub witness: BlockMatrix,
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Positivity {
    Positive(PositivityWitness),
    NotPositive { diagnostic: String },
}

impl Positivity {
    pub fn is_positive(&self) -> bool {
        matches!(self, Positivity::Positive(_))
    }
}

fn require_shape(shape: &Option<Vec<usize>>, p: &BlockMatrix) -> Result<()> {
    match shape {
        Some(s) if *s == p.shape() => Ok(()),
        Some(s) => Err(OscatError::ShapeMismatch(format!(
            "element of shape {:?} for a structure of shape {s:?}",
            p.shape()
        ))),
        None => Err(OscatError::Unsupported(
            "positivity needs a block-basis structure".into(),
        )),
    }
}

fn concrete(p: &BlockMatrix, tol: f64) -> Result<Option<String>> {
    for (b, blk) in p.blocks().iter().enumerate() {
        match psd_check(blk, tol)? {
            PsdVerdict::Psd => {}
            PsdVerdict::NotPsd { min_eig } => {
                return Ok(Some(format!("block {b} has eigenvalue {min_eig:.3e}")));
            }
            PsdVerdict::NotHermitian { defect } => {
                return Ok(Some(format!("block {b} is not Hermitian (defect {defect:.3e})")));
            }
        }
    }
    Ok(None)
}

fn hermitian_root(p: &BlockMatrix) -> Result<BlockMatrix> {
    let blocks = p
        .blocks()
        .iter()
        .map(|b| psd_sqrt(&b.hermitian_part()))
        .collect::<Result<Vec<_>>>()?;
    BlockMatrix::new(blocks)
}

fn scale(p: &BlockMatrix) -> f64 {
    p.coords().iter().map(|z| z.norm()).fold(1.0, f64::max)
}

/// Values `f(e_t)` of the functional `x ↦ tr(F x)` on the block basis.
pub(crate) fn functional_values(f: &BlockMatrix) -> Vec<C64> {
    f.map_blocks(|b| b.transpose()).coords()
}

impl VnAlgebra {
    /// `p ≥ 0` checked blockwise; the witness `a = p^{1/2}` is verified through `μ` and `i`.
    pub fn positivity(&self, p: &BlockMatrix, tol: f64) -> Result<Positivity> {
        require_shape(&self.shape, p)?;
        if let Some(diagnostic) = concrete(p, tol)? {
            return Ok(Positivity::NotPositive { diagnostic });
        }
        let a = hermitian_root(p)?;
        let ac = a.coords();
        let sq = self.product(&self.star(&ac), &ac);
        let defect = sq
            .iter()
            .zip(p.coords())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        if defect > WITNESS_TOL * scale(p) {
            return Ok(Positivity::NotPositive {
                diagnostic: format!("square-root witness misses by {defect:.3e}"),
            });
        }
        Ok(Positivity::Positive(PositivityWitness { witness: a, defect }))
    }
}

impl VnCoalgebra {
    /// Positivity of the functional `x ↦ tr(F x)`, given by its representing matrix `F`.
    pub fn positivity(&self, f: &BlockMatrix, tol: f64) -> Result<Positivity> {
        require_shape(&self.shape, f)?;
        if let Some(diagnostic) = concrete(f, tol)? {
            return Ok(Positivity::NotPositive { diagnostic });
        }
        match self.convolution_witness(f)? {
            (a, defect) if defect <= WITNESS_TOL * scale(f) => {
                Ok(Positivity::Positive(PositivityWitness { witness: a, defect }))
            }
            (_, defect) => Ok(Positivity::NotPositive {
                diagnostic: format!("convolution witness misses by {defect:.3e}"),
            }),
        }
    }

    /// Abstract positivity: whether `f = (g* ⊗ g)∘δ` for the spectral candidate `g`,
    /// decided only through `δ` and the involution.
    pub fn abstract_positive(&self, f: &BlockMatrix) -> Result<bool> {
        require_shape(&self.shape, f)?;
        let (_, defect) = self.convolution_witness(f)?;
        Ok(defect <= WITNESS_TOL * scale(f))
    }

    fn convolution_witness(&self, f: &BlockMatrix) -> Result<(BlockMatrix, f64)> {
        let a = hermitian_root(f)?;
        let g = functional_values(&a);
        let got = self.convolve(&self.functional_star(&g), &g);
        let want = functional_values(f);
        let defect = got.iter().zip(&want).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        Ok((a, defect))
    }
}
