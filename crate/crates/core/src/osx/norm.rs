//! Normal forms and the levelled norm oracle.
//!
//! [`normalize`] drops `Conj` (entrywise conjugation preserves every norm here), absorbs
//! `Opp` into the leaves (`M(n,m)_o ≅ M(m,n)` by transposing entries, `γ` under `⊗_h`) and
//! pushes `Dual` down (`(X ⊕∞ Y)* = X* ⊕1 Y*`, `(X ⊗̌ Y)* = X* ⊗̂ Y*`, `(X ⊗_h Y)* = X* ⊗_h Y*`).
//! What remains is built from `M(n,m)` and `T(n,m) = M(n,m)*` leaves.
//!
//! Exact cases: spaces realizable inside a block-diagonal matrix algebra (`M`, `⊕∞`, `⊗̌`)
//! and their duals, where a level-`k` element is a map into `M_k` and its norm is the
//! cb-norm. Tensors of realizable spaces get the `normlab` brackets; anything else is
//! reported as unknown.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use super::{SpaceElement, SpaceExpr, SpaceExpr::*};
use crate::error::Result;
use crate::matcore::{op_norm, BlockMatrix, CMatrix, C64};
use crate::normlab::{
    cb_norm_with, haagerup_bracket, proj_bracket, NormBracket, NormConfig, NormStatus, Picture, TensorShape, Witness,
};
use crate::supop::SuperOp;

/// Rectangular blocks plus, per coordinate, its `(block, row, col)` position.
#[derive(Debug, Clone, PartialEq)]
struct Realization {
    blocks: Vec<(usize, usize)>,
    pos: Vec<(usize, usize, usize)>,
}

impl Realization {
    fn base(n: usize, m: usize) -> Self {
        Realization {
            blocks: vec![(n, m)],
            pos: (0..n * m).map(|t| (0, t / m, t % m)).collect(),
        }
    }

    fn sum(a: Realization, b: Realization) -> Self {
        let off = a.blocks.len();
        let mut pos = a.pos;
        pos.extend(b.pos.iter().map(|&(bl, i, j)| (bl + off, i, j)));
        let mut blocks = a.blocks;
        blocks.extend(b.blocks);
        Realization { blocks, pos }
    }

    fn tensor(a: &Realization, b: &Realization) -> Self {
        let nb = b.blocks.len();
        let blocks = a
            .blocks
            .iter()
            .flat_map(|&(r1, c1)| b.blocks.iter().map(move |&(r2, c2)| (r1 * r2, c1 * c2)))
            .collect();
        let mut pos = Vec::with_capacity(a.pos.len() * b.pos.len());
        for &(b1, i1, j1) in &a.pos {
            for &(b2, i2, j2) in &b.pos {
                let (r2, c2) = b.blocks[b2];
                pos.push((b1 * nb + b2, i1 * r2 + i2, j1 * c2 + j2));
            }
        }
        Realization { blocks, pos }
    }

    /// Block-diagonal embedding into one rectangular matrix space.
    fn single_rect(&self) -> ((usize, usize), Vec<(usize, usize)>) {
        let mut offs = Vec::with_capacity(self.blocks.len());
        let (mut r, mut c) = (0, 0);
        for &(br, bc) in &self.blocks {
            offs.push((r, c));
            r += br;
            c += bc;
        }
        let pos = self
            .pos
            .iter()
            .map(|&(b, i, j)| (offs[b].0 + i, offs[b].1 + j))
            .collect();
        ((r, c), pos)
    }
}

fn realize(e: &SpaceExpr) -> Option<Realization> {
    match e {
        BaseM(n, m) => Some(Realization::base(*n, *m)),
        SumInf(a, b) => Some(Realization::sum(realize(a)?, realize(b)?)),
        TensMin(a, b) => Some(Realization::tensor(&realize(a)?, &realize(b)?)),
        _ => None,
    }
}

/// Realization of `Z` when `e = Z*`.
fn dual_realize(e: &SpaceExpr) -> Option<Realization> {
    match e {
        Dual(x) => match **x {
            BaseM(n, m) => Some(Realization::base(n, m)),
            _ => None,
        },
        Sum1(a, b) => Some(Realization::sum(dual_realize(a)?, dual_realize(b)?)),
        TensProj(a, b) => Some(Realization::tensor(&dual_realize(a)?, &dual_realize(b)?)),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy)]
pub(super) struct Flags {
    conj: bool,
    opp: bool,
    dual: bool,
}

/// Pushes the involutions down. With `absorb`, `Opp`/`Conj` vanish into the leaves and
/// `Dual` is pushed to them as well; otherwise they are kept as wrappers on the leaves
/// (order `conj(opp(·))`) and `Dual` nodes stay put.
pub(super) fn push(e: &SpaceExpr, f: Flags, absorb: bool) -> (SpaceExpr, Vec<usize>) {
    match e {
        Conj(x) => push(x, Flags { conj: !f.conj, ..f }, absorb),
        Opp(x) => push(x, Flags { opp: !f.opp, ..f }, absorb),
        Dual(x) if absorb => push(x, Flags { dual: !f.dual, ..f }, absorb),
        Dual(x) => {
            let (inner, map) = push(x, f, absorb);
            (SpaceExpr::dual(inner), map)
        }
        BaseM(n, m) => {
            let (n, m) = (*n, *m);
            if absorb {
                let (leaf, map) = if f.opp {
                    (BaseM(m, n), (0..n * m).map(|t| (t % n) * m + t / n).collect())
                } else {
                    (BaseM(n, m), (0..n * m).collect())
                };
                (if f.dual { SpaceExpr::dual(leaf) } else { leaf }, map)
            } else {
                let mut leaf = BaseM(n, m);
                if f.opp {
                    leaf = SpaceExpr::opp(leaf);
                }
                if f.conj {
                    leaf = SpaceExpr::conj(leaf);
                }
                (leaf, (0..n * m).collect())
            }
        }
        SumInf(a, b) | Sum1(a, b) => {
            let (na, ma) = push(a, f, absorb);
            let (nb, mb) = push(b, f, absorb);
            let da = a.dim();
            let map = ma.into_iter().chain(mb.into_iter().map(|t| t + da)).collect();
            let is_inf = matches!(e, SumInf(..)) != (absorb && f.dual);
            (
                if is_inf {
                    SpaceExpr::sum_inf(na, nb)
                } else {
                    SpaceExpr::sum1(na, nb)
                },
                map,
            )
        }
        TensMin(a, b) | TensProj(a, b) | TensH(a, b) => {
            let (na, ma) = push(a, f, absorb);
            let (nb, mb) = push(b, f, absorb);
            let db = b.dim();
            let swap = f.opp && matches!(e, TensH(..));
            let node = match (e, absorb && f.dual) {
                (TensMin(..), false) | (TensProj(..), true) => SpaceExpr::tens_min,
                (TensMin(..), true) | (TensProj(..), false) => SpaceExpr::tens_proj,
                _ => SpaceExpr::tens_h,
            };
            if swap {
                let dna = ma.len();
                let map = (0..ma.len() * mb.len())
                    .map(|t| ma[t % dna] * db + mb[t / dna])
                    .collect();
                (node(nb, na), map)
            } else {
                let dnb = mb.len();
                let map = (0..ma.len() * mb.len())
                    .map(|t| ma[t / dnb] * db + mb[t % dnb])
                    .collect();
                (node(na, nb), map)
            }
        }
    }
}

pub(super) const NO_FLAGS: Flags = Flags {
    conj: false,
    opp: false,
    dual: false,
};

/// Normal form over `M`/`T` leaves and the coordinate map (new index → old index) of the
/// complete isometry onto it.
pub fn normalize(e: &SpaceExpr) -> (SpaceExpr, Vec<usize>) {
    push(e, NO_FLAGS, true)
}

#[derive(Debug, Clone)]
enum Strategy {
    Realized(Realization),
    DualRealized(Realization),
    SumInf(Box<Strategy>, Box<Strategy>, usize),
    Sum1(Box<Strategy>, Box<Strategy>, usize),
    Haagerup(Realization, Realization),
    Proj(Realization, Realization),
    Unknown(String),
}

fn plan(e: &SpaceExpr) -> Strategy {
    if let Some(r) = realize(e) {
        return Strategy::Realized(r);
    }
    if let Some(r) = dual_realize(e) {
        return Strategy::DualRealized(r);
    }
    match e {
        SumInf(a, b) => Strategy::SumInf(Box::new(plan(a)), Box::new(plan(b)), a.dim()),
        Sum1(a, b) => Strategy::Sum1(Box::new(plan(a)), Box::new(plan(b)), a.dim()),
        TensH(a, b) => match (realize(a), realize(b)) {
            (Some(ra), Some(rb)) => Strategy::Haagerup(ra, rb),
            _ => Strategy::Unknown(format!("no Haagerup strategy for {e}")),
        },
        TensProj(a, b) => match (realize(a), realize(b)) {
            (Some(ra), Some(rb)) if ra.blocks.len() == 1 && rb.blocks.len() == 1 => Strategy::Proj(ra, rb),
            _ => Strategy::Unknown(format!("no projective strategy for {e}")),
        },
        _ => Strategy::Unknown(format!("nesting beyond the supported frontier: {e}")),
    }
}

/// Level-`k` coordinates, flat in `(p, q, t)` order.
struct Coords<'a> {
    k: usize,
    d: usize,
    data: &'a [C64],
}

impl Coords<'_> {
    fn at(&self, p: usize, q: usize, t: usize) -> C64 {
        self.data[(p * self.k + q) * self.d + t]
    }

    fn slice(&self, lo: usize, hi: usize) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.k * self.k * (hi - lo));
        for p in 0..self.k {
            for q in 0..self.k {
                for t in lo..hi {
                    out.push(self.at(p, q, t));
                }
            }
        }
        out
    }
}

fn bracket_from(lower: f64, upper: f64, parts: &[&NormBracket]) -> NormBracket {
    let mut b = NormBracket::new(lower, upper);
    if !upper.is_finite() {
        b.status = NormStatus::Unknown;
    }
    b.witnesses = parts.iter().flat_map(|p| p.witnesses.iter().cloned()).collect();
    b
}

fn level_matrix(c: &Coords, rows: usize, cols: usize, pos: impl Fn(usize) -> Option<(usize, usize)>) -> CMatrix {
    let k = c.k;
    let mut m = CMatrix::zeros(k * rows, k * cols);
    for t in 0..c.d {
        if let Some((i, j)) = pos(t) {
            for p in 0..k {
                for q in 0..k {
                    m[(p * rows + i, q * cols + j)] = c.at(p, q, t);
                }
            }
        }
    }
    m
}

fn tensor_matrix(c: &Coords, ra: &Realization, rb: &Realization) -> (CMatrix, TensorShape) {
    let ((ar, ac), pa) = ra.single_rect();
    let ((br, bc), pb) = rb.single_rect();
    let db = pb.len();
    let v = level_matrix(c, ar * br, ac * bc, |t| {
        let ((i1, j1), (i2, j2)) = (pa[t / db], pb[t % db]);
        Some((i1 * br + i2, j1 * bc + j2))
    });
    (v, TensorShape::new((ar, ac), (br, bc)))
}

fn eval(st: &Strategy, c: &Coords, cfg: &NormConfig) -> Result<NormBracket> {
    let k = c.k;
    match st {
        Strategy::Realized(r) => {
            let mut best = 0.0f64;
            for (b, &(rows, cols)) in r.blocks.iter().enumerate() {
                let m = level_matrix(c, rows, cols, |t| {
                    let (bl, i, j) = r.pos[t];
                    (bl == b).then_some((i, j))
                });
                best = best.max(op_norm(&m)?);
            }
            Ok(NormBracket::exact(best))
        }
        Strategy::DualRealized(r) => {
            // corner-embed rectangular blocks; compressing onto a corner is a complete quotient
            let dom: Vec<usize> = r.blocks.iter().map(|&(a, b)| a.max(b)).collect();
            let s = SuperOp::from_action(&dom, &[k], |x: &BlockMatrix| {
                let mut out = CMatrix::zeros(k, k);
                for (t, &(bl, i, j)) in r.pos.iter().enumerate() {
                    let z = x.blocks()[bl][(i, j)];
                    if z != C64::new(0.0, 0.0) {
                        for p in 0..k {
                            for q in 0..k {
                                out[(p, q)] += c.at(p, q, t) * z;
                            }
                        }
                    }
                }
                BlockMatrix::single(out).expect("square output")
            })?;
            cb_norm_with(&s, Picture::Operator, cfg)
        }
        Strategy::SumInf(a, b, da) | Strategy::Sum1(a, b, da) => {
            let (ca, cb) = (c.slice(0, *da), c.slice(*da, c.d));
            let ba = eval(a, &Coords { k, d: *da, data: &ca }, cfg)?;
            let bb = eval(
                b,
                &Coords {
                    k,
                    d: c.d - da,
                    data: &cb,
                },
                cfg,
            )?;
            let (lower, upper) = match st {
                Strategy::SumInf(..) => (ba.lower.max(bb.lower), ba.upper.max(bb.upper)),
                // ‖(x, y)‖₁ = ‖x‖ + ‖y‖ at level 1; above it only the triangle bounds are certain
                _ if k == 1 => (ba.lower + bb.lower, ba.upper + bb.upper),
                _ => (ba.lower.max(bb.lower), ba.upper + bb.upper),
            };
            Ok(bracket_from(lower, upper, &[&ba, &bb]))
        }
        Strategy::Haagerup(ra, rb) => {
            let (v, shape) = tensor_matrix(c, ra, rb);
            haagerup_bracket(&v, shape, cfg)
        }
        Strategy::Proj(ra, rb) => {
            let (v, shape) = tensor_matrix(c, ra, rb);
            proj_bracket(&v, shape, cfg)
        }
        Strategy::Unknown(why) => Ok(NormBracket::unknown().with_witness(Witness::Note(why.clone()))),
    }
}

struct Plan {
    map: Vec<usize>,
    strategy: Strategy,
}

/// Norm oracle with a plan cache keyed by `(expression, level)`. Plans are pure functions
/// of the key, so racing writers store identical values.
pub struct NormOracle {
    cfg: NormConfig,
    cache: RwLock<HashMap<(SpaceExpr, usize), Arc<Plan>>>,
}

impl NormOracle {
    pub fn new(cfg: NormConfig) -> Self {
        NormOracle {
            cfg,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn config(&self) -> &NormConfig {
        &self.cfg
    }

    pub fn cached_plans(&self) -> usize {
        self.cache.read().map(|c| c.len()).unwrap_or(0)
    }

    fn plan_for(&self, e: &SpaceExpr, level: usize) -> Arc<Plan> {
        let key = (e.clone(), level);
        if let Some(p) = self.cache.read().ok().and_then(|c| c.get(&key).cloned()) {
            return p;
        }
        let (normal, map) = normalize(e);
        let p = Arc::new(Plan {
            strategy: plan(&normal),
            map,
        });
        if let Ok(mut c) = self.cache.write() {
            c.entry(key).or_insert_with(|| p.clone());
        }
        p
    }

    pub fn norm_at(&self, e: &SpaceElement) -> Result<NormBracket> {
        let p = self.plan_for(&e.space, e.level);
        let (k, d) = (e.level, p.map.len());
        let mut data = Vec::with_capacity(k * k * d);
        for pp in 0..k {
            for q in 0..k {
                let entry = e.entry(pp, q);
                data.extend(p.map.iter().map(|&old| entry[old]));
            }
        }
        eval(&p.strategy, &Coords { k, d, data: &data }, &self.cfg)
    }
}

/// `‖e‖_{M_k(X)}` with the default configuration.
pub fn norm_at(e: &SpaceElement) -> Result<NormBracket> {
    static ORACLE: OnceLock<NormOracle> = OnceLock::new();
    ORACLE.get_or_init(|| NormOracle::new(NormConfig::default())).norm_at(e)
}
