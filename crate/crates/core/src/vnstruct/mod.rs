//! Finite-dimensional von Neumann algebras `⊕ M_k` and their preduals `⊕ T_k` as
//! (co)monoids, with law suites, positivity and morphism certification.
//!
//! Every structure is held as dense coordinate data over a basis of size `d`:
//! the multiplication is a `d x d²` matrix whose column `s·d + t` is `e_s e_t`, the
//! comultiplication a `d² x d` matrix whose column `t` is `δ(e_t)`, and the
//! involution a `d x d` matrix whose column `t` is `e_t*` (extended antilinearly).
//! Standard structures use the lexicographic block basis of [`BlockMatrix`].

mod laws;
mod morphism;
mod positivity;

pub use laws::{check_laws, check_laws_seeded, LawReport, LawResult};
pub use morphism::{certify_morphism, Check, MorphismClaim, MorphismMode, Verdict};
pub use positivity::{Positivity, PositivityWitness};

use serde::{Deserialize, Serialize};

use crate::error::{OscatError, Result};
use crate::matcore::{CMatrix, C64, ONE, ZERO};
use crate::osx::SpaceExpr;
use crate::supop::shape_dim;

#[derive(Debug, Clone, PartialEq)]
pub struct VnAlgebra {
    /// Operator space the coordinates live in; used for norms.
    pub space: SpaceExpr,
    /// Block shape when the basis is the standard block basis.
    pub shape: Option<Vec<usize>>,
    pub unit: Vec<C64>,
    pub mult: CMatrix,
    pub invol: CMatrix,
    /// Trace-pairing transport: basis index `t` pairs with the dual basis index `pairing[t]`.
    pub pairing: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VnCoalgebra {
    pub space: SpaceExpr,
    pub shape: Option<Vec<usize>>,
    pub counit: Vec<C64>,
    pub comult: CMatrix,
    pub invol: CMatrix,
    pub pairing: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Structure {
    Algebra(VnAlgebra),
    Coalgebra(VnCoalgebra),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureKind {
    Algebra,
    Coalgebra,
}

/// Wire form of a standard structure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureSpec {
    pub kind: StructureKind,
    pub shape: Vec<usize>,
}

/// `(block, row, col)` for each coordinate of a block shape, plus the transpose permutation.
fn block_index(shape: &[usize]) -> (Vec<(usize, usize, usize)>, Vec<usize>) {
    let mut idx = Vec::with_capacity(shape_dim(shape));
    let mut transpose = Vec::with_capacity(shape_dim(shape));
    let mut off = 0;
    for (b, &k) in shape.iter().enumerate() {
        for i in 0..k {
            for j in 0..k {
                idx.push((b, i, j));
                transpose.push(off + j * k + i);
            }
        }
        off += k * k;
    }
    (idx, transpose)
}

/// `X*`, with `X** = X` collapsed so double dualization returns the original space.
fn dual_space(x: &SpaceExpr) -> SpaceExpr {
    match x {
        SpaceExpr::Dual(inner) => (**inner).clone(),
        other => SpaceExpr::dual(other.clone()),
    }
}

fn offsets(shape: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(shape.len());
    let mut off = 0;
    for &k in shape {
        out.push(off);
        off += k * k;
    }
    out
}

fn standard_space(
    shape: &[usize],
    leaf: fn(usize) -> SpaceExpr,
    join: fn(SpaceExpr, SpaceExpr) -> SpaceExpr,
) -> SpaceExpr {
    shape
        .iter()
        .filter(|&&k| k > 0)
        .map(|&k| leaf(k))
        .reduce(join)
        .unwrap_or_else(|| SpaceExpr::m(0, 0))
}

fn adjoint_permutation(shape: &[usize]) -> CMatrix {
    let (_, tr) = block_index(shape);
    let d = tr.len();
    let mut inv = CMatrix::zeros(d, d);
    for (t, &s) in tr.iter().enumerate() {
        inv[(s, t)] = ONE;
    }
    inv
}

pub fn make_algebra(shape: &[usize]) -> VnAlgebra {
    let d = shape_dim(shape);
    let off = offsets(shape);
    let (idx, transpose) = block_index(shape);
    let mut mult = CMatrix::zeros(d, d * d);
    let mut unit = vec![ZERO; d];
    for (t, &(b, i, j)) in idx.iter().enumerate() {
        let k = shape[b];
        if i == j {
            unit[t] = ONE;
        }
        // e_ij e_jl = e_il
        for l in 0..k {
            let u = off[b] + j * k + l;
            mult[(off[b] + i * k + l, t * d + u)] = ONE;
        }
    }
    VnAlgebra {
        space: standard_space(shape, |k| SpaceExpr::m(k, k), SpaceExpr::sum_inf),
        shape: Some(shape.to_vec()),
        unit,
        mult,
        invol: adjoint_permutation(shape),
        pairing: transpose,
    }
}

pub fn make_coalgebra(shape: &[usize]) -> VnCoalgebra {
    let d = shape_dim(shape);
    let off = offsets(shape);
    let (idx, transpose) = block_index(shape);
    let mut comult = CMatrix::zeros(d * d, d);
    let mut counit = vec![ZERO; d];
    for (t, &(b, i, j)) in idx.iter().enumerate() {
        let k = shape[b];
        if i == j {
            counit[t] = ONE;
        }
        // δ(e_ij) = Σ_k e_kj ⊗ e_ik
        for m in 0..k {
            let left = off[b] + m * k + j;
            let right = off[b] + i * k + m;
            comult[(left * d + right, t)] = ONE;
        }
    }
    VnCoalgebra {
        space: standard_space(shape, SpaceExpr::t, SpaceExpr::sum1),
        shape: Some(shape.to_vec()),
        counit,
        comult,
        invol: adjoint_permutation(shape),
        pairing: transpose,
    }
}

/// Antilinear extension of an involution given on the basis.
pub(crate) fn apply_antilinear(invol: &CMatrix, x: &[C64]) -> Vec<C64> {
    let conj: Vec<C64> = x.iter().map(|z| z.conj()).collect();
    invol.mul_vec(&conj)
}

fn nonzero(x: &[C64]) -> impl Iterator<Item = (usize, C64)> + '_ {
    x.iter().copied().enumerate().filter(|(_, z)| *z != ZERO)
}

fn basis_vec(d: usize, t: usize) -> Vec<C64> {
    let mut v = vec![ZERO; d];
    v[t] = ONE;
    v
}

fn kron_perm(p: &[usize], q: &[usize]) -> Vec<usize> {
    let n = q.len();
    p.iter().flat_map(|&a| q.iter().map(move |&b| a * n + b)).collect()
}

fn concat_perm(p: &[usize], q: &[usize]) -> Vec<usize> {
    let n = p.len();
    p.iter().copied().chain(q.iter().map(|&b| b + n)).collect()
}

fn concat_shape(a: &Option<Vec<usize>>, b: &Option<Vec<usize>>) -> Option<Vec<usize>> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.iter().chain(y).copied().collect()),
        _ => None,
    }
}

impl VnAlgebra {
    pub fn dim(&self) -> usize {
        self.unit.len()
    }

    /// `μ(x ⊗ y)`.
    pub fn product(&self, x: &[C64], y: &[C64]) -> Vec<C64> {
        let d = self.dim();
        let mut out = vec![ZERO; d];
        let ys: Vec<(usize, C64)> = nonzero(y).collect();
        for (s, xs) in nonzero(x) {
            for &(t, yt) in &ys {
                let col = s * d + t;
                let z = xs * yt;
                for (r, o) in out.iter_mut().enumerate() {
                    *o += z * self.mult[(r, col)];
                }
            }
        }
        out
    }

    pub fn star(&self, x: &[C64]) -> Vec<C64> {
        apply_antilinear(&self.invol, x)
    }

    /// Spatial tensor product; the multiplication pairs factors through the interchange
    /// `(a⊗b)(a'⊗b') = aa' ⊗ bb'`.
    pub fn tensor(&self, other: &VnAlgebra) -> VnAlgebra {
        let (da, db) = (self.dim(), other.dim());
        let d = da * db;
        let mut mult = CMatrix::zeros(d, d * d);
        for sa in 0..da {
            for ta in 0..da {
                let ca = sa * da + ta;
                for ua in 0..da {
                    let za = self.mult[(ua, ca)];
                    if za == ZERO {
                        continue;
                    }
                    for sb in 0..db {
                        for tb in 0..db {
                            let cb = sb * db + tb;
                            for ub in 0..db {
                                let zb = other.mult[(ub, cb)];
                                if zb != ZERO {
                                    mult[(ua * db + ub, (sa * db + sb) * d + ta * db + tb)] += za * zb;
                                }
                            }
                        }
                    }
                }
            }
        }
        VnAlgebra {
            space: SpaceExpr::tens_min(self.space.clone(), other.space.clone()),
            shape: None,
            unit: CMatrix::column(&self.unit)
                .kron(&CMatrix::column(&other.unit))
                .into_data(),
            mult,
            invol: self.invol.kron(&other.invol),
            pairing: kron_perm(&self.pairing, &other.pairing),
        }
    }

    /// `ℓ∞` direct sum with componentwise operations.
    pub fn direct_sum(&self, other: &VnAlgebra) -> VnAlgebra {
        let (da, db) = (self.dim(), other.dim());
        let d = da + db;
        let mut mult = CMatrix::zeros(d, d * d);
        for s in 0..da {
            for t in 0..da {
                for u in 0..da {
                    mult[(u, s * d + t)] = self.mult[(u, s * da + t)];
                }
            }
        }
        for s in 0..db {
            for t in 0..db {
                for u in 0..db {
                    mult[(da + u, (da + s) * d + da + t)] = other.mult[(u, s * db + t)];
                }
            }
        }
        VnAlgebra {
            space: SpaceExpr::sum_inf(self.space.clone(), other.space.clone()),
            shape: concat_shape(&self.shape, &other.shape),
            unit: self.unit.iter().chain(&other.unit).copied().collect(),
            mult,
            invol: self.invol.direct_sum(&other.invol),
            pairing: concat_perm(&self.pairing, &other.pairing),
        }
    }

    /// Predual coalgebra: counit `η*` and comultiplication `μ*`, transported along the
    /// trace pairing.
    pub fn dualize(&self) -> VnCoalgebra {
        let d = self.dim();
        let p = &self.pairing;
        let mut comult = CMatrix::zeros(d * d, d);
        let mut counit = vec![ZERO; d];
        let mut invol = CMatrix::zeros(d, d);
        for t in 0..d {
            counit[p[t]] = self.unit[t];
            for s in 0..d {
                invol[(p[s], p[t])] = self.invol[(t, s)].conj();
                for u in 0..d {
                    comult[(p[s] * d + p[u], p[t])] = self.mult[(t, s * d + u)];
                }
            }
        }
        VnCoalgebra {
            space: match &self.shape {
                Some(shape) => standard_space(shape, SpaceExpr::t, SpaceExpr::sum1),
                None => dual_space(&self.space),
            },
            shape: self.shape.clone(),
            counit,
            comult,
            invol,
            pairing: self.pairing.clone(),
        }
    }
}

impl VnCoalgebra {
    pub fn dim(&self) -> usize {
        self.counit.len()
    }

    /// `δ(x)` as coordinates on `C ⊗ C`.
    pub fn coproduct(&self, x: &[C64]) -> Vec<C64> {
        self.comult.mul_vec(x)
    }

    pub fn star(&self, x: &[C64]) -> Vec<C64> {
        apply_antilinear(&self.invol, x)
    }

    /// Convolution `(f ⊗ g) ∘ δ` of two functionals given by their values on the basis.
    pub fn convolve(&self, f: &[C64], g: &[C64]) -> Vec<C64> {
        let d = self.dim();
        let mut out = vec![ZERO; d];
        for (t, o) in out.iter_mut().enumerate() {
            for (s, fs) in nonzero(f) {
                for (u, gu) in nonzero(g) {
                    *o += self.comult[(s * d + u, t)] * fs * gu;
                }
            }
        }
        out
    }

    /// `f*(x) = conj f(x*)` for a functional given by its values on the basis.
    pub fn functional_star(&self, f: &[C64]) -> Vec<C64> {
        let d = self.dim();
        (0..d)
            .map(|t| (0..d).map(|w| self.invol[(w, t)] * f[w]).sum::<C64>().conj())
            .collect()
    }

    /// Projective tensor product; `δ` is followed by the interchange of the middle factors.
    pub fn tensor(&self, other: &VnCoalgebra) -> VnCoalgebra {
        let (da, db) = (self.dim(), other.dim());
        let d = da * db;
        let mut comult = CMatrix::zeros(d * d, d);
        for ua in 0..da {
            for ub in 0..db {
                let col = ua * db + ub;
                for ra in 0..da * da {
                    let za = self.comult[(ra, ua)];
                    if za == ZERO {
                        continue;
                    }
                    let (sa, ta) = (ra / da, ra % da);
                    for rb in 0..db * db {
                        let zb = other.comult[(rb, ub)];
                        if zb != ZERO {
                            let (sb, tb) = (rb / db, rb % db);
                            comult[((sa * db + sb) * d + ta * db + tb, col)] += za * zb;
                        }
                    }
                }
            }
        }
        VnCoalgebra {
            space: SpaceExpr::tens_proj(self.space.clone(), other.space.clone()),
            shape: None,
            counit: CMatrix::column(&self.counit)
                .kron(&CMatrix::column(&other.counit))
                .into_data(),
            comult,
            invol: self.invol.kron(&other.invol),
            pairing: kron_perm(&self.pairing, &other.pairing),
        }
    }

    /// `ℓ¹` direct sum with componentwise operations.
    pub fn direct_sum(&self, other: &VnCoalgebra) -> VnCoalgebra {
        let (da, db) = (self.dim(), other.dim());
        let d = da + db;
        let mut comult = CMatrix::zeros(d * d, d);
        for u in 0..da {
            for r in 0..da * da {
                comult[((r / da) * d + r % da, u)] = self.comult[(r, u)];
            }
        }
        for u in 0..db {
            for r in 0..db * db {
                comult[((da + r / db) * d + da + r % db, da + u)] = other.comult[(r, u)];
            }
        }
        VnCoalgebra {
            space: SpaceExpr::sum1(self.space.clone(), other.space.clone()),
            shape: concat_shape(&self.shape, &other.shape),
            counit: self.counit.iter().chain(&other.counit).copied().collect(),
            comult,
            invol: self.invol.direct_sum(&other.invol),
            pairing: concat_perm(&self.pairing, &other.pairing),
        }
    }

    /// Dual algebra; inverse of [`VnAlgebra::dualize`].
    pub fn dualize(&self) -> VnAlgebra {
        let d = self.dim();
        let p = &self.pairing;
        let mut mult = CMatrix::zeros(d, d * d);
        let mut unit = vec![ZERO; d];
        let mut invol = CMatrix::zeros(d, d);
        for t in 0..d {
            unit[t] = self.counit[p[t]];
            for s in 0..d {
                invol[(t, s)] = self.invol[(p[s], p[t])].conj();
                for u in 0..d {
                    mult[(t, s * d + u)] = self.comult[(p[s] * d + p[u], p[t])];
                }
            }
        }
        VnAlgebra {
            space: match &self.shape {
                Some(shape) => standard_space(shape, |k| SpaceExpr::m(k, k), SpaceExpr::sum_inf),
                None => dual_space(&self.space),
            },
            shape: self.shape.clone(),
            unit,
            mult,
            invol,
            pairing: self.pairing.clone(),
        }
    }
}

impl Structure {
    pub fn kind(&self) -> StructureKind {
        match self {
            Structure::Algebra(_) => StructureKind::Algebra,
            Structure::Coalgebra(_) => StructureKind::Coalgebra,
        }
    }

    pub fn shape(&self) -> Option<&[usize]> {
        match self {
            Structure::Algebra(a) => a.shape.as_deref(),
            Structure::Coalgebra(c) => c.shape.as_deref(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Structure::Algebra(a) => a.dim(),
            Structure::Coalgebra(c) => c.dim(),
        }
    }

    pub fn dualize(&self) -> Structure {
        match self {
            Structure::Algebra(a) => Structure::Coalgebra(a.dualize()),
            Structure::Coalgebra(c) => Structure::Algebra(c.dualize()),
        }
    }

    /// Wire form; composites without a block basis have none.
    pub fn spec(&self) -> Option<StructureSpec> {
        self.shape().map(|shape| StructureSpec {
            kind: self.kind(),
            shape: shape.to_vec(),
        })
    }

    pub fn from_spec(spec: &StructureSpec) -> Structure {
        match spec.kind {
            StructureKind::Algebra => Structure::Algebra(make_algebra(&spec.shape)),
            StructureKind::Coalgebra => Structure::Coalgebra(make_coalgebra(&spec.shape)),
        }
    }

    pub fn to_json(&self) -> Result<serde_json::Value> {
        let spec = self
            .spec()
            .ok_or_else(|| OscatError::Unsupported("composite structure has no {kind, shape} form".into()))?;
        serde_json::to_value(spec).map_err(|e| OscatError::InvalidInput(e.to_string()))
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Structure> {
        let spec: StructureSpec =
            serde_json::from_value(v.clone()).map_err(|e| OscatError::InvalidInput(e.to_string()))?;
        Ok(Structure::from_spec(&spec))
    }
}

impl From<VnAlgebra> for Structure {
    fn from(a: VnAlgebra) -> Self {
        Structure::Algebra(a)
    }
}

impl From<VnCoalgebra> for Structure {
    fn from(c: VnCoalgebra) -> Self {
        Structure::Coalgebra(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::BlockMatrix;

    fn e(d: usize, t: usize) -> Vec<C64> {
        basis_vec(d, t)
    }

    #[test]
    fn coalgebra_example_coproduct() {
        let c = make_coalgebra(&[2]);
        let v = c.coproduct(&e(4, 0));
        // e_00⊗e_00 + e_10⊗e_01
        let mut want = vec![ZERO; 16];
        want[0] = ONE;
        want[2 * 4 + 1] = ONE;
        assert_eq!(v, want);
    }

    #[test]
    fn scalar_algebra() {
        let a = make_algebra(&[1]);
        assert_eq!(a.unit, vec![ONE]);
        assert_eq!(
            a.product(&[C64::new(2.0, 1.0)], &[C64::new(0.0, 3.0)]),
            vec![C64::new(-3.0, 6.0)]
        );
    }

    #[test]
    fn unit_is_blockwise_identity() {
        let a = make_algebra(&[2, 3]);
        assert_eq!(a.unit, BlockMatrix::identity(&[2, 3]).coords());
    }

    #[test]
    fn product_matches_block_multiplication() {
        let mut r = crate::random::rng(3);
        let shape = [2, 1, 3];
        let a = make_algebra(&shape);
        let x = BlockMatrix::from_coords(&shape, &crate::random::random_matrix(&mut r, 14, 1).into_data()).unwrap();
        let y = BlockMatrix::from_coords(&shape, &crate::random::random_matrix(&mut r, 14, 1).into_data()).unwrap();
        let got = BlockMatrix::from_coords(&shape, &a.product(&x.coords(), &y.coords())).unwrap();
        assert!(got.max_abs_diff(&x.mul(&y).unwrap()) < 1e-12);
        let star = BlockMatrix::from_coords(&shape, &a.star(&x.coords())).unwrap();
        assert!(star.max_abs_diff(&x.adjoint()) == 0.0);
    }

    #[test]
    fn dual_of_matrix_algebra_is_trace_class_coalgebra() {
        for shape in [vec![1], vec![2], vec![3], vec![2, 3]] {
            assert_eq!(make_algebra(&shape).dualize(), make_coalgebra(&shape));
            assert_eq!(make_coalgebra(&shape).dualize(), make_algebra(&shape));
        }
        let c = make_coalgebra(&[2, 3]);
        assert_eq!(c.space.to_string(), "T(2) (+1) T(3)");
    }

    #[test]
    fn double_dual_round_trip_on_composites() {
        let c = make_coalgebra(&[2]).tensor(&make_coalgebra(&[1, 2]));
        assert_eq!(c.dualize().dualize().comult, c.comult);
        assert_eq!(c.dualize().dualize().invol, c.invol);
        let a = make_algebra(&[2]).direct_sum(&make_algebra(&[1]));
        assert_eq!(a.dualize().dualize(), a);
    }

    #[test]
    fn convolution_is_representing_product() {
        // f ↔ F with f(x) = tr(F x); (f ⊗ g)δ ↔ FG
        let mut r = crate::random::rng(8);
        let c = make_coalgebra(&[3]);
        let f = crate::random::random_matrix(&mut r, 3, 3);
        let g = crate::random::random_matrix(&mut r, 3, 3);
        let vals = |m: &CMatrix| m.transpose().into_data();
        let got = c.convolve(&vals(&f), &vals(&g));
        let want = vals(&f.matmul(&g));
        assert!(got.iter().zip(&want).all(|(a, b)| (a - b).norm() < 1e-12));
        let fs = c.functional_star(&vals(&f));
        assert!(fs.iter().zip(&vals(&f.adjoint())).all(|(a, b)| (a - b).norm() < 1e-12));
    }

    #[test]
    fn spec_round_trip() {
        let s = Structure::Coalgebra(make_coalgebra(&[2, 1]));
        let j = s.to_json().unwrap();
        assert_eq!(j, serde_json::json!({"kind": "coalgebra", "shape": [2, 1]}));
        assert_eq!(Structure::from_json(&j).unwrap(), s);
        let comp = Structure::Algebra(make_algebra(&[2]).tensor(&make_algebra(&[2])));
        assert!(comp.to_json().is_err());
    }
}
