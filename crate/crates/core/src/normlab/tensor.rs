//! Injective, Haagerup and projective norms on `M_k(X ⊗ Y)` for rectangular matrix
//! spaces `X = M_{a,b}`, `Y = M_{c,e}`.
//!
//! A level-`k` element is stored as the `(k·a·c) x (k·b·e)` matrix with index
//! `[(p,i,r),(q,j,s)]`, so `M_k(X) ⊗ Y` terms combine by `kron`. Spaces that embed
//! completely isometrically into a matrix space (ℓ∞ sums as block diagonals) are handled
//! by embedding first: all three norms are injective for such inclusions.
//!
//! The Haagerup norm reshapes `v` to `V[(p,i,j),(q,s,r)]`; factorizations `v = x ⊙ y`
//! are exactly `V = XY` with `‖x‖² = ‖Tr_j XX*‖` and `‖y‖² = ‖Tr_r Y*Y‖`.

use serde::{Deserialize, Serialize};

use super::ascent::map_ascent;
use super::twoblock::{partial_trace_last, two_block_sdp, Dims};
use super::{NormBracket, NormConfig, Witness};
use crate::error::{OscatError, Result};
use crate::matcore::{herm_eigvals, op_norm, psd_sqrt, spectral_map, svd, CMatrix, C64};
use crate::random::{random_density, rng, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorShape {
    /// `X = M_{x.0, x.1}`
    pub x: (usize, usize),
    /// `Y = M_{y.0, y.1}`
    pub y: (usize, usize),
}

impl TensorShape {
    pub fn new(x: (usize, usize), y: (usize, usize)) -> Self {
        TensorShape { x, y }
    }

    pub fn square(n: usize, m: usize) -> Self {
        Self::new((n, n), (m, m))
    }

    pub fn swap(&self) -> TensorShape {
        TensorShape { x: self.y, y: self.x }
    }

    /// Size of the level-`k` matrix.
    pub fn level_dims(&self, k: usize) -> (usize, usize) {
        (k * self.x.0 * self.y.0, k * self.x.1 * self.y.1)
    }

    /// Level implied by a matrix of this shape.
    pub fn level_of(&self, v: &CMatrix) -> Result<usize> {
        let (r0, c0) = self.level_dims(1);
        if r0 == 0 || c0 == 0 {
            return Err(OscatError::InvalidInput("empty tensor factor".into()));
        }
        let k = v.rows() / r0;
        if k == 0 || v.rows() != k * r0 || v.cols() != k * c0 {
            return Err(OscatError::ShapeMismatch(format!(
                "{}x{} is not a level matrix for X = M_{}x{}, Y = M_{}x{}",
                v.rows(),
                v.cols(),
                self.x.0,
                self.x.1,
                self.y.0,
                self.y.1
            )));
        }
        Ok(k)
    }

    /// `γ: M_k(X ⊗ Y) → M_k(Y ⊗ X)`.
    pub fn flip(&self, v: &CMatrix) -> Result<CMatrix> {
        let k = self.level_of(v)?;
        let ((a, b), (c_, e)) = (self.x, self.y);
        Ok(CMatrix::from_fn(k * c_ * a, k * e * b, |row, col| {
            let (p, rest) = (row / (c_ * a), row % (c_ * a));
            let (r, i) = (rest / a, rest % a);
            let (q, rest) = (col / (e * b), col % (e * b));
            let (s, j) = (rest / b, rest % b);
            v[((p * a + i) * c_ + r, (q * b + j) * e + s)]
        }))
    }

    fn haagerup_dims(&self, k: usize) -> Dims {
        Dims {
            n1: k * self.x.0,
            m1: self.x.1,
            n2: k * self.y.1,
            m2: self.y.0,
        }
    }

    /// `V[(p,i,j),(q,s,r)] = v[(p,i,r),(q,j,s)]`.
    fn haagerup_reshape(&self, v: &CMatrix, k: usize) -> CMatrix {
        let ((a, b), (c_, e)) = (self.x, self.y);
        let mut out = CMatrix::zeros(k * a * b, k * e * c_);
        for p in 0..k {
            for i in 0..a {
                for r in 0..c_ {
                    for q in 0..k {
                        for j in 0..b {
                            for s in 0..e {
                                out[((p * a + i) * b + j, (q * e + s) * c_ + r)] =
                                    v[((p * a + i) * c_ + r, (q * b + j) * e + s)];
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// `Σ_l a_l ⊗ b_l` with `a_l ∈ M_k(X)` and `b_l ∈ Y`, as a level-`k` matrix.
pub fn tensor_level_matrix(shape: TensorShape, k: usize, terms: &[(CMatrix, CMatrix)]) -> Result<CMatrix> {
    let (rows, cols) = shape.level_dims(k);
    let mut out = CMatrix::zeros(rows, cols);
    for (a, b) in terms {
        if (a.rows(), a.cols()) != (k * shape.x.0, k * shape.x.1) || (b.rows(), b.cols()) != shape.y {
            return Err(OscatError::ShapeMismatch("tensor term does not match the shape".into()));
        }
        out = &out + &a.kron(b);
    }
    Ok(out)
}

/// `v = x ⊙ y` with `x ∈ M_{k,r}(X)` stored as `(k·a) x (r·b)` and `y ∈ M_{r,k}(Y)` as
/// `(r·c) x (k·e)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factorization {
    pub shape: TensorShape,
    pub level: usize,
    pub inner: usize,
    pub x: CMatrix,
    pub y: CMatrix,
}

impl Factorization {
    fn from_reshaped(shape: TensorShape, k: usize, xm: &CMatrix, ym: &CMatrix) -> Self {
        let ((a, b), (c_, e)) = (shape.x, shape.y);
        let r = xm.cols();
        let x = CMatrix::from_fn(k * a, r * b, |pi, lj| xm[(pi * b + lj % b, lj / b)]);
        let y = CMatrix::from_fn(r * c_, k * e, |lr, qs| ym[(lr / c_, qs * c_ + lr % c_)]);
        Factorization {
            shape,
            level: k,
            inner: r,
            x,
            y,
        }
    }

    /// `(x ⊙ y)[(p,i,r),(q,j,s)] = Σ_l x[(p,i),(l,j)] y[(l,r),(q,s)]`.
    pub fn product(&self) -> CMatrix {
        let ((a, b), (c_, e)) = (self.shape.x, self.shape.y);
        let k = self.level;
        let (rows, cols) = self.shape.level_dims(k);
        let mut out = CMatrix::zeros(rows, cols);
        for p in 0..k {
            for i in 0..a {
                for r in 0..c_ {
                    for q in 0..k {
                        for j in 0..b {
                            for s in 0..e {
                                let mut acc = C64::new(0.0, 0.0);
                                for l in 0..self.inner {
                                    acc += self.x[(p * a + i, l * b + j)] * self.y[(l * c_ + r, q * e + s)];
                                }
                                out[((p * a + i) * c_ + r, (q * b + j) * e + s)] = acc;
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// `‖x‖ · ‖y‖`.
    pub fn cost(&self) -> Result<f64> {
        Ok(op_norm(&self.x)? * op_norm(&self.y)?)
    }
}

/// Exact: `M_a ⊗_min M_c = M_{ac}`.
pub fn inj_norm(v: &CMatrix, shape: TensorShape) -> Result<NormBracket> {
    shape.level_of(v)?;
    Ok(NormBracket::exact(op_norm(v)?))
}

fn top_eig(g: &CMatrix) -> Result<f64> {
    Ok(*herm_eigvals(g)?.last().unwrap_or(&0.0))
}

fn pad_rows(a: &CMatrix, k: usize) -> CMatrix {
    let mut out = CMatrix::zeros(k, a.cols());
    out.set_submatrix(0, 0, a);
    out
}

struct AltMin {
    value: f64,
    x: CMatrix,
    y: CMatrix,
    rho: CMatrix,
    sigma: CMatrix,
}

/// Geometric mean `A⁻¹ # B`, the minimizer of `tr(PA) + tr(P⁻¹B)`.
fn gauge(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let ah = psd_sqrt(a)?;
    let aih = spectral_map(a, |t| if t > 0.0 { t.sqrt().recip() } else { 0.0 })?;
    let mid = psd_sqrt(&ah.matmul(b).matmul(&ah).hermitian_part())?;
    Ok(aih.matmul(&mid).matmul(&aih).hermitian_part())
}

/// Alternates between the gauge of an exact factorization `V = (X0 T)(T⁻¹ Y0)` and the
/// weights `ρ, σ` it is optimal for.
fn alt_min(vh: &CMatrix, dims: Dims, rank_cap: usize, restarts: usize, r: &mut Rng) -> Result<Option<AltMin>> {
    let Dims { n1, m1, n2, m2 } = dims;
    let d = svd(vh);
    let smax = d.s.first().copied().unwrap_or(0.0);
    let rank = d.s.iter().filter(|&&s| s > 1e-13 * smax).count();
    if rank == 0 || rank > rank_cap {
        return Ok(None);
    }
    let x0 = CMatrix::from_fn(vh.rows(), rank, |i, l| d.u[(i, l)] * d.s[l].sqrt());
    let y0 = CMatrix::from_fn(rank, vh.cols(), |l, j| d.s[l].sqrt() * d.v[(j, l)].conj());
    let weigh = |w: &CMatrix, m: usize| w.kron(&CMatrix::identity(m));
    let tol = 1e-9 * smax.max(1.0);

    let mut best: Option<AltMin> = None;
    for start in 0..restarts.max(1) {
        let (mut rho, mut sigma) = if start == 0 {
            (
                CMatrix::identity(n1).scale_re(1.0 / n1 as f64),
                CMatrix::identity(n2).scale_re(1.0 / n2 as f64),
            )
        } else {
            (random_density(r, n1), random_density(r, n2))
        };
        for it in 0..60 {
            let eps = 1e-3 / (1.0 + it as f64);
            let reg = |w: &CMatrix, n: usize| &w.scale_re(1.0 - eps) + &CMatrix::identity(n).scale_re(eps / n as f64);
            let a = x0
                .adjoint()
                .matmul(&weigh(&reg(&rho, n1), m1))
                .matmul(&x0)
                .hermitian_part();
            let b = y0
                .matmul(&weigh(&reg(&sigma, n2), m2))
                .matmul(&y0.adjoint())
                .hermitian_part();
            let p = gauge(&a, &b)?;
            let t = psd_sqrt(&p)?;
            let tinv = spectral_map(&p, |z| if z > 0.0 { z.sqrt().recip() } else { 0.0 })?;
            let x = x0.matmul(&t);
            let y = tinv.matmul(&y0);
            if x.matmul(&y).max_abs_diff(vh) > tol {
                break;
            }
            let gx = partial_trace_last(&x.matmul(&x.adjoint()).hermitian_part(), n1, m1);
            let gy = partial_trace_last(&y.adjoint().matmul(&y).hermitian_part(), n2, m2);
            let (lx, ly) = (top_eig(&gx)?, top_eig(&gy)?);
            let value = (lx * ly).sqrt();
            if best.as_ref().is_none_or(|b| value < b.value) {
                best = Some(AltMin {
                    value,
                    x: x.clone(),
                    y: y.clone(),
                    rho: rho.clone(),
                    sigma: sigma.clone(),
                });
            }
            // sharpen toward the top eigenspaces
            let sharpen = |g: &CMatrix, top: f64| -> Result<CMatrix> {
                let w = spectral_map(g, |z| (z.max(0.0) / top).powi(8))?;
                let tr = w.trace().re;
                Ok(w.scale_re(1.0 / tr))
            };
            let (nr, ns) = (sharpen(&gx, lx)?, sharpen(&gy, ly)?);
            rho = &rho.scale_re(0.5) + &nr.scale_re(0.5);
            sigma = &sigma.scale_re(0.5) + &ns.scale_re(0.5);
        }
    }
    Ok(best)
}

fn rank_cap(shape: TensorShape, k: usize, cfg: &NormConfig) -> usize {
    let dim_x = shape.x.0 * shape.x.1;
    let dim_y = shape.y.0 * shape.y.1;
    cfg.rank_cap.unwrap_or(k * dim_x.min(dim_y))
}

/// SDP upper bound with an ascent lower bound; `None` when the SDP is over the size caps.
pub fn haagerup_sdp(v: &CMatrix, shape: TensorShape, cfg: &NormConfig) -> Result<Option<NormBracket>> {
    let k = shape.level_of(v)?;
    let scale = op_norm(v)?;
    if scale == 0.0 {
        return Ok(Some(NormBracket::exact(0.0)));
    }
    let vh = shape.haagerup_reshape(v, k).scale_re(1.0 / scale);
    let dims = shape.haagerup_dims(k);
    let Some(res) = two_block_sdp(&vh, dims)? else {
        return Ok(None);
    };
    let mut r = rng(cfg.seed);
    let anc = dims.n1.max(dims.n2);
    let asc = map_ascent(&vh, dims, anc, &res.seeds, cfg.witness_starts.min(2), &mut r)?;
    let (xm, ym) = &res.factor;
    let f = Factorization::from_reshaped(shape, k, &xm.scale_re(scale), ym);
    Ok(Some(
        NormBracket::new(asc.value * scale, res.upper * scale).with_witness(Witness::Factorization { x: f.x, y: f.y }),
    ))
}

/// `‖v‖_{M_k(X ⊗_h Y)}`: alternating minimization over exact factorizations, tightened by
/// the SDP when it fits, with a witness-ascent lower bound.
pub fn haagerup_bracket(v: &CMatrix, shape: TensorShape, cfg: &NormConfig) -> Result<NormBracket> {
    let k = shape.level_of(v)?;
    let scale = op_norm(v)?;
    if scale == 0.0 {
        return Ok(NormBracket::exact(0.0));
    }
    let vh = shape.haagerup_reshape(v, k).scale_re(1.0 / scale);
    let dims = shape.haagerup_dims(k);
    let mut r = rng(cfg.seed);
    let alt = alt_min(&vh, dims, rank_cap(shape, k, cfg), cfg.restarts, &mut r)?;

    let anc = dims.n1.max(dims.n2);
    let mut seeds = vec![];
    let mut upper = f64::INFINITY;
    let mut factor = None;
    if let Some(am) = &alt {
        let (a, b) = (psd_sqrt(&am.rho)?, psd_sqrt(&am.sigma)?);
        seeds.push((pad_rows(&a, anc), pad_rows(&b, anc)));
        seeds.push((pad_rows(&a.conj(), anc), pad_rows(&b.conj(), anc)));
        upper = am.value;
        factor = Some((am.x.clone(), am.y.clone()));
    }
    if cfg.use_sdp {
        if let Some(res) = two_block_sdp(&vh, dims)? {
            seeds.extend(res.seeds);
            if res.upper < upper {
                upper = res.upper;
                factor = Some(res.factor);
            }
        }
    }
    let asc = map_ascent(&vh, dims, anc, &seeds, cfg.witness_starts.min(2), &mut r)?;
    let lower = asc.value * scale;
    if !upper.is_finite() {
        return Ok(NormBracket::upper_only(f64::INFINITY, lower)
            .with_witness(Witness::Note("no exact factorization within the rank cap".into())));
    }
    let mut b = NormBracket::new(lower, upper * scale);
    if let Some((xm, ym)) = factor {
        let f = Factorization::from_reshaped(shape, k, &xm.scale_re(scale), &ym);
        b = b.with_witness(Witness::Factorization { x: f.x, y: f.y });
    }
    Ok(b)
}

/// Sum of `‖a_l‖ ‖b_l‖` over an operator-Schmidt split `v = Σ a_l ⊗ b_l` with
/// `a_l ∈ M_k(X)`, `b_l ∈ Y`.
fn schmidt_upper(v: &CMatrix, shape: TensorShape, k: usize) -> Result<f64> {
    let ((a, b), (c_, e)) = (shape.x, shape.y);
    let (ar, ac) = (k * a, k * b);
    let mut rmat = CMatrix::zeros(ar * ac, c_ * e);
    for pi in 0..ar {
        for r in 0..c_ {
            for qj in 0..ac {
                for s in 0..e {
                    rmat[(pi * ac + qj, r * e + s)] = v[(pi * c_ + r, qj * e + s)];
                }
            }
        }
    }
    let d = svd(&rmat);
    let mut total = 0.0;
    for (l, &sv) in d.s.iter().enumerate() {
        if sv == 0.0 {
            continue;
        }
        let al = CMatrix::from_fn(ar, ac, |i, j| d.u[(i * ac + j, l)]);
        let bl = CMatrix::from_fn(c_, e, |i, j| d.v[(i * e + j, l)].conj());
        total += sv * op_norm(&al)? * op_norm(&bl)?;
    }
    Ok(total)
}

/// Certified upper bound on `‖v‖_{M_k(X ⊗^ Y)}` from Schmidt splits on both sides.
pub fn proj_upper(v: &CMatrix, shape: TensorShape) -> Result<f64> {
    let k = shape.level_of(v)?;
    let flipped = shape.flip(v)?;
    Ok(schmidt_upper(v, shape, k)?.min(schmidt_upper(&flipped, shape.swap(), k)?))
}

/// `‖v‖_{M_k(X ⊗^ Y)}`: Schmidt-split upper bounds on both sides; lower bound from the
/// Haagerup norms of `v` and of its flip, both of which the projective norm dominates.
pub fn proj_bracket(v: &CMatrix, shape: TensorShape, cfg: &NormConfig) -> Result<NormBracket> {
    let upper = proj_upper(v, shape)?;
    let flipped = shape.flip(v)?;
    let h = haagerup_bracket(v, shape, cfg)?;
    let hf = haagerup_bracket(&flipped, shape.swap(), cfg)?;
    let lower = h.lower.max(hf.lower).max(op_norm(v)?);
    Ok(NormBracket::new(lower, upper))
}
