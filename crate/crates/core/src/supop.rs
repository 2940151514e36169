//! Linear maps between block-matrix spaces `⊕M_{k_a} → ⊕M_{l_b}`, stored as one Choi matrix
//! per (domain block, codomain block) pair.
//!
//! Choi convention, input factor first: `J = Σ_ij e_ij ⊗ φ(e_ij)`, so
//! `J[(i·l + c), (j·l + d)] = φ(e_ij)[c, d]`.

use serde::{Deserialize, Serialize};

use crate::error::{OscatError, Result};
use crate::matcore::{
    format_matrix, herm_eig, herm_eigvals, parse_matrix, BlockMatrix, CMatrix, C64, DEFAULT_DIM_CAP, ONE, ZERO,
};
use crate::random::{random_isometry, Rng};

#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperOp {
    dom: Vec<usize>,
    cod: Vec<usize>,
    /// `chois[a][b]` is the Choi matrix of the component `M_{dom[a]} → M_{cod[b]}`.
    chois: Vec<Vec<CMatrix>>,
}

impl std::fmt::Debug for SuperOp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SuperOp({:?} -> {:?})", self.dom, self.cod)
    }
}

pub fn shape_dim(shape: &[usize]) -> usize {
    shape.iter().map(|k| k * k).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelFlags {
    pub cp: bool,
    pub tp: bool,
    pub unital: bool,
    pub herm_preserving: bool,
    pub min_choi_eig: f64,
    pub trace_defect: f64,
    pub unit_defect: f64,
    pub herm_defect: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CombineMode {
    /// `combine(s, t, Compose)` is `s ∘ t`: apply `t` first.
    Compose,
    Tensor,
    DirectSum,
}

impl SuperOp {
    pub fn from_block_chois(dom: Vec<usize>, cod: Vec<usize>, chois: Vec<Vec<CMatrix>>) -> Result<Self> {
        if chois.len() != dom.len() {
            return Err(OscatError::ShapeMismatch(format!(
                "{} Choi rows for {} domain blocks",
                chois.len(),
                dom.len()
            )));
        }
        for (a, row) in chois.iter().enumerate() {
            if row.len() != cod.len() {
                return Err(OscatError::ShapeMismatch("Choi grid does not match codomain".into()));
            }
            for (b, j) in row.iter().enumerate() {
                let n = dom[a] * cod[b];
                if j.rows() != n || j.cols() != n {
                    return Err(OscatError::ShapeMismatch(format!(
                        "Choi block ({a},{b}) is {}x{}, expected {n}x{n}",
                        j.rows(),
                        j.cols()
                    )));
                }
                j.ensure_finite()?;
            }
        }
        Ok(SuperOp { dom, cod, chois })
    }

    /// Single-block map `M_n → M_m` from its Choi matrix.
    pub fn from_choi(n: usize, m: usize, choi: CMatrix) -> Result<Self> {
        Self::from_block_chois(vec![n], vec![m], vec![vec![choi]])
    }

    /// Builds the map from its action on the basis `e_ij` of each domain block.
    pub fn from_action(dom: &[usize], cod: &[usize], f: impl Fn(&BlockMatrix) -> BlockMatrix) -> Result<Self> {
        check_cap(dom, cod)?;
        let mut chois: Vec<Vec<CMatrix>> = dom
            .iter()
            .map(|&ka| cod.iter().map(|&lb| CMatrix::zeros(ka * lb, ka * lb)).collect())
            .collect();
        for (a, &ka) in dom.iter().enumerate() {
            for i in 0..ka {
                for j in 0..ka {
                    let mut e = BlockMatrix::zeros(dom);
                    e.blocks_mut()[a][(i, j)] = ONE;
                    let out = f(&e);
                    if out.shape() != cod {
                        return Err(OscatError::ShapeMismatch(format!(
                            "action produced shape {:?}, expected {cod:?}",
                            out.shape()
                        )));
                    }
                    for (b, &lb) in cod.iter().enumerate() {
                        let y = &out.blocks()[b];
                        let jm = &mut chois[a][b];
                        for c_ in 0..lb {
                            for d in 0..lb {
                                jm[(i * lb + c_, j * lb + d)] = y[(c_, d)];
                            }
                        }
                    }
                }
            }
        }
        Self::from_block_chois(dom.to_vec(), cod.to_vec(), chois)
    }

    /// Builds the map from a coordinate matrix (`dim cod x dim dom`, lexicographic bases).
    pub fn from_coord_matrix(dom: &[usize], cod: &[usize], m: &CMatrix) -> Result<Self> {
        if m.rows() != shape_dim(cod) || m.cols() != shape_dim(dom) {
            return Err(OscatError::ShapeMismatch("coordinate matrix size".into()));
        }
        Self::from_action(dom, cod, |x| {
            let v = m.mul_vec(&x.coords());
            BlockMatrix::from_coords(cod, &v).expect("sized")
        })
    }

    pub fn dom(&self) -> &[usize] {
        &self.dom
    }
    pub fn cod(&self) -> &[usize] {
        &self.cod
    }
    pub fn block_choi(&self, a: usize, b: usize) -> &CMatrix {
        &self.chois[a][b]
    }
    pub fn block_chois(&self) -> &[Vec<CMatrix>] {
        &self.chois
    }

    pub fn is_single_block(&self) -> bool {
        self.dom.len() == 1 && self.cod.len() == 1
    }

    /// Choi matrix of the same map viewed on the full matrix algebras `M_{Σk} → M_{Σl}`,
    /// precomposed with the pinching onto the diagonal blocks.
    pub fn full_choi(&self) -> CMatrix {
        let n: usize = self.dom.iter().sum();
        let m: usize = self.cod.iter().sum();
        let mut out = CMatrix::zeros(n * m, n * m);
        let doff = offsets(&self.dom);
        let coff = offsets(&self.cod);
        for (a, &ka) in self.dom.iter().enumerate() {
            for (b, &lb) in self.cod.iter().enumerate() {
                let j = &self.chois[a][b];
                for i in 0..ka {
                    for jj in 0..ka {
                        for c_ in 0..lb {
                            for d in 0..lb {
                                let v = j[(i * lb + c_, jj * lb + d)];
                                if v != ZERO {
                                    out[((doff[a] + i) * m + coff[b] + c_, (doff[a] + jj) * m + coff[b] + d)] = v;
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Inverse of [`SuperOp::full_choi`]; entries outside the block pattern must vanish.
    pub fn from_full_choi(dom: &[usize], cod: &[usize], full: &CMatrix) -> Result<Self> {
        let n: usize = dom.iter().sum();
        let m: usize = cod.iter().sum();
        if full.rows() != n * m || full.cols() != n * m {
            return Err(OscatError::ShapeMismatch(format!(
                "Choi is {}x{}, expected {}x{}",
                full.rows(),
                full.cols(),
                n * m,
                n * m
            )));
        }
        let candidate = SuperOp {
            dom: dom.to_vec(),
            cod: cod.to_vec(),
            chois: dom
                .iter()
                .enumerate()
                .map(|(a, &ka)| {
                    cod.iter()
                        .enumerate()
                        .map(|(b, &lb)| {
                            let doff = offsets(dom)[a];
                            let coff = offsets(cod)[b];
                            CMatrix::from_fn(ka * lb, ka * lb, |r, s| {
                                let (i, c_) = (r / lb, r % lb);
                                let (j, d) = (s / lb, s % lb);
                                full[((doff + i) * m + coff + c_, (doff + j) * m + coff + d)]
                            })
                        })
                        .collect()
                })
                .collect(),
        };
        if candidate.full_choi().max_abs_diff(full) != 0.0 {
            return Err(OscatError::ShapeMismatch(
                "Choi has entries outside the block-diagonal pattern".into(),
            ));
        }
        Ok(candidate)
    }

    pub fn apply(&self, x: &BlockMatrix) -> Result<BlockMatrix> {
        if x.shape() != self.dom {
            return Err(OscatError::ShapeMismatch(format!(
                "input shape {:?}, map domain {:?}",
                x.shape(),
                self.dom
            )));
        }
        let mut out = BlockMatrix::zeros(&self.cod);
        for (a, &ka) in self.dom.iter().enumerate() {
            let xa = &x.blocks()[a];
            for (b, &lb) in self.cod.iter().enumerate() {
                let j = &self.chois[a][b];
                let y = &mut out.blocks_mut()[b];
                for i in 0..ka {
                    for jj in 0..ka {
                        let w = xa[(i, jj)];
                        if w == ZERO {
                            continue;
                        }
                        for c_ in 0..lb {
                            for d in 0..lb {
                                y[(c_, d)] += w * j[(i * lb + c_, jj * lb + d)];
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Convenience for single-block maps.
    pub fn apply_matrix(&self, x: &CMatrix) -> Result<CMatrix> {
        let out = self.apply(&BlockMatrix::single(x.clone())?)?;
        Ok(out.into_blocks().remove(0))
    }

    /// Coordinate matrix `dim cod x dim dom` in the lexicographic bases.
    pub fn coord_matrix(&self) -> CMatrix {
        let (nd, nc) = (shape_dim(&self.dom), shape_dim(&self.cod));
        let mut m = CMatrix::zeros(nc, nd);
        for t in 0..nd {
            let y = self
                .apply(&BlockMatrix::basis(&self.dom, t))
                .expect("basis has domain shape");
            for (r, v) in y.coords().into_iter().enumerate() {
                m[(r, t)] = v;
            }
        }
        m
    }

    pub fn add(&self, other: &SuperOp) -> Result<SuperOp> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SuperOp) -> Result<SuperOp> {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, s: C64) -> SuperOp {
        SuperOp {
            dom: self.dom.clone(),
            cod: self.cod.clone(),
            chois: self
                .chois
                .iter()
                .map(|row| row.iter().map(|j| j.scale(s)).collect())
                .collect(),
        }
    }

    fn zip(&self, other: &SuperOp, f: impl Fn(&CMatrix, &CMatrix) -> CMatrix) -> Result<SuperOp> {
        if self.dom != other.dom || self.cod != other.cod {
            return Err(OscatError::ShapeMismatch("maps have different shapes".into()));
        }
        Ok(SuperOp {
            dom: self.dom.clone(),
            cod: self.cod.clone(),
            chois: self
                .chois
                .iter()
                .zip(&other.chois)
                .map(|(r1, r2)| r1.iter().zip(r2).map(|(a, b)| f(a, b)).collect())
                .collect(),
        })
    }

    pub fn max_abs_diff(&self, other: &SuperOp) -> f64 {
        if self.dom != other.dom || self.cod != other.cod {
            return f64::INFINITY;
        }
        self.chois
            .iter()
            .flatten()
            .zip(other.chois.iter().flatten())
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    /// Kraus operators `K_l: C^{dom} → C^{cod}` of a single-block CP map, from the Choi
    /// spectrum. Diagnostic only; eigenvalues below `tol` are dropped.
    pub fn kraus(&self, tol: f64) -> Result<Vec<CMatrix>> {
        if !self.is_single_block() {
            return Err(OscatError::Unsupported("Kraus extraction for block maps".into()));
        }
        let (n, m) = (self.dom[0], self.cod[0]);
        let eig = herm_eig(&self.chois[0][0].hermitian_part())?;
        let mut out = Vec::new();
        for (k, &lam) in eig.values.iter().enumerate() {
            if lam < -tol {
                return Err(OscatError::InvalidInput("map is not completely positive".into()));
            }
            if lam <= tol {
                continue;
            }
            let s = lam.sqrt();
            out.push(CMatrix::from_fn(m, n, |c_, i| eig.vectors[(i * m + c_, k)] * s));
        }
        Ok(out)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "dom": self.dom,
            "cod": self.cod,
            "choi": format_matrix(&self.full_choi()),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<SuperOp> {
        let shape = |key: &str| -> Result<Vec<usize>> {
            v.get(key)
                .and_then(|s| s.as_array())
                .ok_or_else(|| OscatError::InvalidInput(format!("missing `{key}`")))?
                .iter()
                .map(|k| {
                    k.as_u64()
                        .map(|k| k as usize)
                        .ok_or_else(|| OscatError::InvalidInput(format!("bad block size in `{key}`")))
                })
                .collect()
        };
        let dom = shape("dom")?;
        let cod = shape("cod")?;
        let text = v
            .get("choi")
            .and_then(|s| s.as_str())
            .ok_or_else(|| OscatError::InvalidInput("missing `choi`".into()))?;
        Self::from_full_choi(&dom, &cod, &parse_matrix(text)?)
    }
}

fn offsets(shape: &[usize]) -> Vec<usize> {
    let mut acc = 0;
    shape
        .iter()
        .map(|&k| {
            let o = acc;
            acc += k;
            o
        })
        .collect()
}

fn check_cap(dom: &[usize], cod: &[usize]) -> Result<()> {
    for &k in dom {
        for &l in cod {
            if k * l > DEFAULT_DIM_CAP {
                return Err(OscatError::SizeLimit {
                    what: "Choi dimension",
                    requested: k * l,
                    cap: DEFAULT_DIM_CAP,
                });
            }
        }
    }
    Ok(())
}

/// Trace-pairing adjoint: `tr(s(x)·y) = tr(x·s†(y))`.
pub fn adjoint_map(s: &SuperOp) -> SuperOp {
    let chois = (0..s.cod.len())
        .map(|b| {
            (0..s.dom.len())
                .map(|a| {
                    let (ka, lb) = (s.dom[a], s.cod[b]);
                    let j = &s.chois[a][b];
                    // J†[(p,r),(q,t)] = J[(t,q),(r,p)]
                    CMatrix::from_fn(lb * ka, lb * ka, |row, col| {
                        let (p, r) = (row / ka, row % ka);
                        let (q, t) = (col / ka, col % ka);
                        j[(t * lb + q, r * lb + p)]
                    })
                })
                .collect()
        })
        .collect();
    SuperOp {
        dom: s.cod.clone(),
        cod: s.dom.clone(),
        chois,
    }
}

/// `id_{M_k} ⊗ s`, acting blockwise on `M_k(⊕M_{k_a}) = ⊕M_{k·k_a}`.
pub fn amplify(s: &SuperOp, k: usize) -> Result<SuperOp> {
    if k == 0 {
        return Err(OscatError::InvalidInput("amplification level must be ≥ 1".into()));
    }
    let dom: Vec<usize> = s.dom.iter().map(|&a| a * k).collect();
    let cod: Vec<usize> = s.cod.iter().map(|&b| b * k).collect();
    check_cap(&dom, &cod)?;
    let chois = s
        .dom
        .iter()
        .enumerate()
        .map(|(a, &ka)| {
            s.cod
                .iter()
                .enumerate()
                .map(|(b, &lb)| {
                    let j = &s.chois[a][b];
                    let (kd, kc) = (k * ka, k * lb);
                    let mut out = CMatrix::zeros(kd * kc, kd * kc);
                    for p in 0..k {
                        for q in 0..k {
                            for i in 0..ka {
                                for jj in 0..ka {
                                    for c_ in 0..lb {
                                        for d in 0..lb {
                                            let v = j[(i * lb + c_, jj * lb + d)];
                                            if v == ZERO {
                                                continue;
                                            }
                                            let row = (p * ka + i) * kc + p * lb + c_;
                                            let col = (q * ka + jj) * kc + q * lb + d;
                                            out[(row, col)] = v;
                                        }
                                    }
                                }
                            }
                        }
                    }
                    out
                })
                .collect()
        })
        .collect();
    Ok(SuperOp { dom, cod, chois })
}

pub fn classify(s: &SuperOp, tol: f64) -> Result<ChannelFlags> {
    let mut min_eig = f64::INFINITY;
    let mut herm_defect: f64 = 0.0;
    for j in s.chois.iter().flatten() {
        herm_defect = herm_defect.max(j.hermitian_defect());
        if j.rows() > 0 {
            min_eig = min_eig.min(herm_eigvals(&j.hermitian_part())?[0]);
        }
    }
    if !min_eig.is_finite() {
        min_eig = 0.0;
    }
    let herm_preserving = herm_defect <= tol;

    // Σ_b Tr_cod J_ab should be I_{k_a}
    let mut trace_defect: f64 = 0.0;
    for (a, &ka) in s.dom.iter().enumerate() {
        let mut acc = CMatrix::zeros(ka, ka);
        for (b, &lb) in s.cod.iter().enumerate() {
            let j = &s.chois[a][b];
            for i in 0..ka {
                for jj in 0..ka {
                    for c_ in 0..lb {
                        acc[(i, jj)] += j[(i * lb + c_, jj * lb + c_)];
                    }
                }
            }
        }
        trace_defect = trace_defect.max(acc.max_abs_diff(&CMatrix::identity(ka)));
    }

    let one = s.apply(&BlockMatrix::identity(&s.dom))?;
    let unit_defect = one.max_abs_diff(&BlockMatrix::identity(&s.cod));

    Ok(ChannelFlags {
        cp: herm_preserving && min_eig >= -tol,
        tp: trace_defect <= tol,
        unital: unit_defect <= tol,
        herm_preserving,
        min_choi_eig: min_eig,
        trace_defect,
        unit_defect,
        herm_defect,
    })
}

pub fn combine(s: &SuperOp, t: &SuperOp, mode: CombineMode) -> Result<SuperOp> {
    match mode {
        CombineMode::Compose => {
            if t.cod != s.dom {
                return Err(OscatError::ShapeMismatch(format!(
                    "cannot compose {:?}->{:?} after {:?}->{:?}",
                    s.dom, s.cod, t.dom, t.cod
                )));
            }
            SuperOp::from_action(&t.dom, &s.cod, |x| {
                s.apply(&t.apply(x).expect("shape checked")).expect("shape checked")
            })
        }
        CombineMode::Tensor => {
            let dom = tensor_shape(&s.dom, &t.dom);
            let cod = tensor_shape(&s.cod, &t.cod);
            check_cap(&dom, &cod)?;
            let mut chois = Vec::with_capacity(dom.len());
            for (a1, &k1) in s.dom.iter().enumerate() {
                for (a2, &k2) in t.dom.iter().enumerate() {
                    let mut row = Vec::with_capacity(cod.len());
                    for (b1, &l1) in s.cod.iter().enumerate() {
                        for (b2, &l2) in t.cod.iter().enumerate() {
                            row.push(tensor_choi(&s.chois[a1][b1], &t.chois[a2][b2], k1, l1, k2, l2));
                        }
                    }
                    chois.push(row);
                }
            }
            Ok(SuperOp { dom, cod, chois })
        }
        CombineMode::DirectSum => {
            let dom: Vec<usize> = s.dom.iter().chain(&t.dom).copied().collect();
            let cod: Vec<usize> = s.cod.iter().chain(&t.cod).copied().collect();
            let mut chois = Vec::with_capacity(dom.len());
            for (a, &ka) in dom.iter().enumerate() {
                let mut row = Vec::with_capacity(cod.len());
                for (b, &lb) in cod.iter().enumerate() {
                    let (ns, cs) = (s.dom.len(), s.cod.len());
                    let j = if a < ns && b < cs {
                        s.chois[a][b].clone()
                    } else if a >= ns && b >= cs {
                        t.chois[a - ns][b - cs].clone()
                    } else {
                        CMatrix::zeros(ka * lb, ka * lb)
                    };
                    row.push(j);
                }
                chois.push(row);
            }
            Ok(SuperOp { dom, cod, chois })
        }
    }
}

/// Block shape of `⊕M_{k_a} ⊗ ⊕M_{l_b}`, ordered `(a, b)` with `a` major.
pub fn tensor_shape(x: &[usize], y: &[usize]) -> Vec<usize> {
    x.iter().flat_map(|&a| y.iter().map(move |&b| a * b)).collect()
}

/// Choi of `φ ⊗ ψ` where `φ: M_k1 → M_l1`, `ψ: M_k2 → M_l2`.
fn tensor_choi(j1: &CMatrix, j2: &CMatrix, k1: usize, l1: usize, k2: usize, l2: usize) -> CMatrix {
    let (kd, lc) = (k1 * k2, l1 * l2);
    let mut out = CMatrix::zeros(kd * lc, kd * lc);
    for i1 in 0..k1 {
        for j1i in 0..k1 {
            for c1 in 0..l1 {
                for d1 in 0..l1 {
                    let v1 = j1[(i1 * l1 + c1, j1i * l1 + d1)];
                    if v1 == ZERO {
                        continue;
                    }
                    for i2 in 0..k2 {
                        for j2i in 0..k2 {
                            for c2 in 0..l2 {
                                for d2 in 0..l2 {
                                    let v2 = j2[(i2 * l2 + c2, j2i * l2 + d2)];
                                    let row = (i1 * k2 + i2) * lc + c1 * l2 + c2;
                                    let col = (j1i * k2 + j2i) * lc + d1 * l2 + d2;
                                    out[(row, col)] = v1 * v2;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

pub fn identity_map(shape: &[usize]) -> SuperOp {
    SuperOp::from_action(shape, shape, |x| x.clone()).expect("identity is well-shaped")
}

/// Blockwise transpose.
pub fn transpose_map(shape: &[usize]) -> SuperOp {
    SuperOp::from_action(shape, shape, |x| x.map_blocks(CMatrix::transpose)).expect("well-shaped")
}

pub fn negate_map(shape: &[usize]) -> SuperOp {
    identity_map(shape).scale(C64::new(-1.0, 0.0))
}

/// `ρ ↦ tr(ρ)·1/n` on a single block.
pub fn depolarizing(n: usize) -> SuperOp {
    SuperOp::from_action(&[n], &[n], |x| {
        let t = x.trace();
        BlockMatrix::single(CMatrix::identity(n).scale(t / n as f64)).expect("square")
    })
    .expect("well-shaped")
}

/// `x ↦ u x u*`.
pub fn unitary_conjugation(u: &CMatrix) -> Result<SuperOp> {
    if !u.is_square() {
        return Err(OscatError::InvalidInput("conjugating matrix must be square".into()));
    }
    from_kraus(std::slice::from_ref(u))
}

/// `x ↦ Σ K x K*` for `K: C^n → C^m`.
pub fn from_kraus(kraus: &[CMatrix]) -> Result<SuperOp> {
    let first = kraus
        .first()
        .ok_or_else(|| OscatError::InvalidInput("empty Kraus family".into()))?;
    let (m, n) = (first.rows(), first.cols());
    if kraus.iter().any(|k| k.rows() != m || k.cols() != n) {
        return Err(OscatError::ShapeMismatch("Kraus operators differ in shape".into()));
    }
    check_cap(&[n], &[m])?;
    let mut j = CMatrix::zeros(n * m, n * m);
    for k in kraus {
        for i in 0..n {
            for jj in 0..n {
                for c_ in 0..m {
                    for d in 0..m {
                        j[(i * m + c_, jj * m + d)] += k[(c_, i)] * k[(d, jj)].conj();
                    }
                }
            }
        }
    }
    SuperOp::from_choi(n, m, j)
}

/// The functional `x ↦ tr(f x)` from a block space to `C` (shape `[1]`).
pub fn functional(f: &BlockMatrix) -> SuperOp {
    let shape = f.shape();
    SuperOp::from_action(&shape, &[1], |x| {
        let v: C64 = f
            .blocks()
            .iter()
            .zip(x.blocks())
            .map(|(fb, xb)| fb.matmul(xb).trace())
            .sum();
        BlockMatrix::single(CMatrix::scalar(v)).expect("square")
    })
    .expect("well-shaped")
}

/// Trace functional on a block space.
pub fn trace_map(shape: &[usize]) -> SuperOp {
    functional(&BlockMatrix::identity(shape))
}

/// The map `C → ⊕M_k`, `z ↦ z·a`.
pub fn point_map(a: &BlockMatrix) -> SuperOp {
    let shape = a.shape();
    SuperOp::from_action(&[1], &shape, |x| a.scale(x.blocks()[0][(0, 0)])).expect("well-shaped")
}

/// Random channel `T_n → T_m` from a Haar isometry, with `r` Kraus operators raised to at
/// least `⌈n/m⌉` so the isometry exists.
pub fn random_cptp(rng: &mut Rng, n: usize, m: usize, r: usize) -> SuperOp {
    let r = r.max(n.div_ceil(m));
    let v = random_isometry(rng, m * r, n);
    let kraus: Vec<CMatrix> = (0..r).map(|l| v.submatrix(l * m, 0, m, n)).collect();
    from_kraus(&kraus).expect("consistent Kraus family")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{c, kron, psd_check};
    use crate::random::{random_matrix, random_unitary, rng};
    use proptest::prelude::*;

    fn swap(n: usize) -> CMatrix {
        CMatrix::from_fn(n * n, n * n, |r, s| if r == (s % n) * n + s / n { ONE } else { ZERO })
    }

    #[test]
    fn identity_choi_is_unnormalised_max_entangled() {
        let id = identity_map(&[2]);
        let mut want = CMatrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                want = &want + &kron(&CMatrix::unit(2, 2, i, j), &CMatrix::unit(2, 2, i, j)).unwrap();
            }
        }
        assert_eq!(id.block_choi(0, 0), &want);
    }

    #[test]
    fn transpose_choi_is_swap() {
        assert_eq!(transpose_map(&[2]).block_choi(0, 0), &swap(2));
        let zero = SuperOp::from_choi(2, 2, CMatrix::zeros(4, 4)).unwrap();
        assert_eq!(zero.block_choi(0, 0).max_abs(), 0.0);
    }

    #[test]
    fn action_round_trip() {
        let mut r = rng(4);
        let j = random_matrix(&mut r, 6, 6);
        let s = SuperOp::from_choi(2, 3, j).unwrap();
        let back = SuperOp::from_action(&[2], &[3], |x| s.apply(x).unwrap()).unwrap();
        assert_eq!(back, s);
        let bad = SuperOp::from_choi(2, 3, CMatrix::zeros(5, 5));
        assert!(matches!(bad, Err(OscatError::ShapeMismatch(_))));
    }

    #[test]
    fn json_round_trip_block_map() {
        let mut r = rng(9);
        let s = combine(&random_cptp(&mut r, 2, 1, 2), &depolarizing(2), CombineMode::DirectSum).unwrap();
        let back = SuperOp::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn adjoint_of_unitary_conjugation() {
        let mut r = rng(5);
        let u = random_unitary(&mut r, 3);
        let s = unitary_conjugation(&u).unwrap();
        let adj = adjoint_map(&s);
        let want = unitary_conjugation(&u.adjoint()).unwrap();
        assert!(adj.max_abs_diff(&want) < 1e-14);
        assert_eq!(adjoint_map(&identity_map(&[3])), identity_map(&[3]));
    }

    #[test]
    fn adjoint_pairing() {
        let mut r = rng(6);
        let s = SuperOp::from_choi(2, 3, random_matrix(&mut r, 6, 6)).unwrap();
        let adj = adjoint_map(&s);
        let x = random_matrix(&mut r, 2, 2);
        let y = random_matrix(&mut r, 3, 3);
        let lhs = s.apply_matrix(&x).unwrap().matmul(&y).trace();
        let rhs = x.matmul(&adj.apply_matrix(&y).unwrap()).trace();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn amplify_transpose_is_partial_transpose() {
        let pt = amplify(&transpose_map(&[2]), 2).unwrap();
        let mut r = rng(8);
        let x = random_matrix(&mut r, 4, 4);
        let y = pt.apply_matrix(&x).unwrap();
        for p in 0..2 {
            for q in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        assert_eq!(y[(p * 2 + i, q * 2 + j)], x[(p * 2 + j, q * 2 + i)]);
                    }
                }
            }
        }
        assert_eq!(amplify(&identity_map(&[2]), 3).unwrap(), identity_map(&[6]));
    }

    #[test]
    fn classify_examples() {
        let f = classify(&depolarizing(3), 1e-9).unwrap();
        assert!(f.cp && f.tp && f.unital);
        let t = classify(&transpose_map(&[2]), 1e-9).unwrap();
        assert!(!t.cp && t.tp && t.unital && t.herm_preserving);
        assert!((t.min_choi_eig + 1.0).abs() < 1e-12);
        let mut r = rng(1);
        let u = random_unitary(&mut r, 2);
        let h = classify(&unitary_conjugation(&u.adjoint()).unwrap(), 1e-9).unwrap();
        assert!(h.cp && h.unital);
        let neg = classify(&negate_map(&[2]), 1e-9).unwrap();
        assert!(!neg.cp && !neg.unital);
    }

    #[test]
    fn combine_examples() {
        let mut r = rng(2);
        let s = random_cptp(&mut r, 2, 3, 2);
        assert!(
            combine(&identity_map(&[3]), &s, CombineMode::Compose)
                .unwrap()
                .max_abs_diff(&s)
                < 1e-15
        );
        assert!(
            combine(&s, &identity_map(&[2]), CombineMode::Compose)
                .unwrap()
                .max_abs_diff(&s)
                < 1e-15
        );
        for _ in 0..50 {
            let a = random_cptp(&mut r, 2, 2, 2);
            let b = random_cptp(&mut r, 2, 3, 3);
            let f = classify(&combine(&a, &b, CombineMode::Tensor).unwrap(), 1e-9).unwrap();
            assert!(f.cp && f.tp);
        }
        let u1 = unitary_conjugation(&random_unitary(&mut r, 2)).unwrap();
        let u2 = unitary_conjugation(&random_unitary(&mut r, 3)).unwrap();
        let ds = combine(&u1, &u2, CombineMode::DirectSum).unwrap();
        assert_eq!(ds.dom(), &[2, 3]);
        assert!(classify(&ds, 1e-9).unwrap().unital);
        assert!(combine(&u1, &u2, CombineMode::Compose).is_err());
    }

    #[test]
    fn tensor_action_is_kronecker() {
        let mut r = rng(12);
        let a = SuperOp::from_choi(2, 2, random_matrix(&mut r, 4, 4)).unwrap();
        let b = SuperOp::from_choi(2, 3, random_matrix(&mut r, 6, 6)).unwrap();
        let ab = combine(&a, &b, CombineMode::Tensor).unwrap();
        let (x, y) = (random_matrix(&mut r, 2, 2), random_matrix(&mut r, 2, 2));
        let lhs = ab.apply_matrix(&x.kron(&y)).unwrap();
        let rhs = a.apply_matrix(&x).unwrap().kron(&b.apply_matrix(&y).unwrap());
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn kraus_reconstructs() {
        let mut r = rng(3);
        let s = random_cptp(&mut r, 3, 2, 2);
        let k = s.kraus(1e-12).unwrap();
        assert_eq!(k.len(), 2);
        assert!(from_kraus(&k).unwrap().max_abs_diff(&s) < 1e-12);
    }

    #[test]
    fn functional_and_point_maps() {
        let f = trace_map(&[2, 1]);
        let x = BlockMatrix::new(vec![CMatrix::identity(2), CMatrix::scalar(c(3.0, 0.0))]).unwrap();
        assert_eq!(f.apply(&x).unwrap().blocks()[0][(0, 0)], c(5.0, 0.0));
        let a = BlockMatrix::single(CMatrix::unit(2, 2, 0, 1)).unwrap();
        let p = point_map(&a);
        let y = p
            .apply(&BlockMatrix::single(CMatrix::scalar(c(0.0, 2.0))).unwrap())
            .unwrap();
        assert_eq!(y.blocks()[0][(0, 1)], c(0.0, 2.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn adjoint_is_involution(seed in any::<u64>(), n in 1usize..4, m in 1usize..4) {
            let mut r = rng(seed);
            let s = SuperOp::from_choi(n, m, random_matrix(&mut r, n * m, n * m)).unwrap();
            prop_assert_eq!(adjoint_map(&adjoint_map(&s)), s);
        }

        #[test]
        fn tp_iff_adjoint_unital(seed in any::<u64>(), n in 1usize..4, m in 1usize..4) {
            let mut r = rng(seed);
            let s = random_cptp(&mut r, n, m, 2);
            let noisy = s.add(&SuperOp::from_choi(n, m, random_matrix(&mut r, n * m, n * m)).unwrap().scale(c(1e-3, 0.0))).unwrap();
            for t in [s, noisy] {
                prop_assert_eq!(classify(&t, 1e-9).unwrap().tp, classify(&adjoint_map(&t), 1e-9).unwrap().unital);
            }
        }

        #[test]
        fn cp_preserved(seed in any::<u64>(), k in 1usize..4) {
            let mut r = rng(seed);
            let a = random_cptp(&mut r, 2, 2, 1);
            let b = random_cptp(&mut r, 2, 2, 3);
            prop_assert!(classify(&amplify(&a, k).unwrap(), 1e-9).unwrap().cp);
            prop_assert!(classify(&combine(&a, &b, CombineMode::Compose).unwrap(), 1e-9).unwrap().cp);
            prop_assert!(classify(&combine(&a, &b, CombineMode::Tensor).unwrap(), 1e-9).unwrap().cp);
            prop_assert!(psd_check(&a.full_choi(), 1e-9).unwrap().is_psd());
        }
    }
}
