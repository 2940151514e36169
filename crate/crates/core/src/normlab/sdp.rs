//! Primal-dual interior-point method for small dense block SDPs.
//!
//! Primal: `min ⟨C,X⟩  s.t. ⟨A_i,X⟩ = b_i, X ⪰ 0`.
//! Dual:   `max bᵀy    s.t. S = C − Σ y_i A_i ⪰ 0`.
//!
//! HKM search direction with Mehrotra predictor-corrector and an infeasible start. The `A_i`
//! are sparse symmetric; the Schur complement `M_ij = tr(A_i X A_j S⁻¹)` is assembled from
//! their entries directly.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{OscatError, Result};
use crate::matcore::{sym_eig, C64};

/// Cap on the total PSD dimension `Σ n_b`.
pub const MAX_PSD_DIM: usize = 512;

/// One symmetric pair of entries `(row,col)` and `(col,row)` of a constraint matrix, with
/// `row <= col`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparseEntry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub val: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SdpProblem {
    /// Sizes of the real symmetric diagonal blocks.
    pub blocks: Vec<usize>,
    /// Dense row-major `C`, one entry per block.
    pub c: Vec<Vec<f64>>,
    pub a: Vec<Vec<SparseEntry>>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SdpSolution {
    /// `bᵀy`, the dual objective.
    pub value: f64,
    pub primal_value: f64,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub s: Vec<Vec<f64>>,
    pub rel_gap: f64,
    pub primal_infeas: f64,
    pub dual_infeas: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub enum SdpOutcome {
    Optimal(SdpSolution),
    Infeasible,
    NumericalFailure(String),
}

impl SdpOutcome {
    pub fn into_result(self) -> Result<SdpSolution> {
        match self {
            SdpOutcome::Optimal(s) => Ok(s),
            SdpOutcome::Infeasible => Err(OscatError::Infeasible),
            SdpOutcome::NumericalFailure(m) => Err(OscatError::NumericalFailure(m)),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SdpSettings {
    pub max_iter: usize,
    pub gap_tol: f64,
    pub feas_tol: f64,
}

impl Default for SdpSettings {
    fn default() -> Self {
        SdpSettings {
            max_iter: 100,
            gap_tol: 1e-10,
            feas_tol: 1e-10,
        }
    }
}

/// Builds dual-form problems `max bᵀy s.t. F0 + Σ y_i F_i ⪰ 0` with Hermitian `F` blocks,
/// real-embedding each complex block as `[[Re, −Im], [Im, Re]]`.
#[derive(Debug, Clone)]
pub struct SdpBuilder {
    herm_sizes: Vec<usize>,
    f0: Vec<BTreeMap<(usize, usize), C64>>,
    fi: Vec<BTreeMap<(usize, usize, usize), C64>>,
    b: Vec<f64>,
}

impl SdpBuilder {
    pub fn new(num_vars: usize) -> Self {
        SdpBuilder {
            herm_sizes: vec![],
            f0: vec![],
            fi: vec![BTreeMap::new(); num_vars],
            b: vec![0.0; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.b.len()
    }

    /// Adds a Hermitian block of complex size `n`; returns its index.
    pub fn add_block(&mut self, n: usize) -> usize {
        self.herm_sizes.push(n);
        self.f0.push(BTreeMap::new());
        self.herm_sizes.len() - 1
    }

    /// Adds `z` at `(i,j)` and `conj z` at `(j,i)` of `F0` (once if `i == j`, where `z` must be real).
    pub fn add_const(&mut self, blk: usize, i: usize, j: usize, z: C64) {
        let (key, val) = orient(i, j, z);
        *self.f0[blk].entry(key).or_default() += val;
    }

    /// Adds `z` at `(i,j)` and `conj z` at `(j,i)` of `F_var`.
    pub fn add_coef(&mut self, var: usize, blk: usize, i: usize, j: usize, z: C64) {
        let ((r, c), val) = orient(i, j, z);
        *self.fi[var].entry((blk, r, c)).or_default() += val;
    }

    pub fn set_objective(&mut self, var: usize, coef: f64) {
        self.b[var] = coef;
    }

    pub fn build(&self) -> SdpProblem {
        let blocks: Vec<usize> = self.herm_sizes.iter().map(|n| 2 * n).collect();
        let mut c: Vec<Vec<f64>> = blocks.iter().map(|&n| vec![0.0; n * n]).collect();
        for (blk, entries) in self.f0.iter().enumerate() {
            let n = self.herm_sizes[blk];
            for (&(i, j), &z) in entries {
                for (r, col, v) in embed(n, i, j, z) {
                    let nb = 2 * n;
                    c[blk][r * nb + col] += v;
                    if r != col {
                        c[blk][col * nb + r] += v;
                    }
                }
            }
        }
        let a = self
            .fi
            .iter()
            .map(|entries| {
                let mut acc: BTreeMap<(usize, usize, usize), f64> = BTreeMap::new();
                for (&(blk, i, j), &z) in entries {
                    for (r, col, v) in embed(self.herm_sizes[blk], i, j, z) {
                        *acc.entry((blk, r, col)).or_default() -= v;
                    }
                }
                acc.into_iter()
                    .filter(|(_, v)| *v != 0.0)
                    .map(|((block, row, col), val)| SparseEntry { block, row, col, val })
                    .collect()
            })
            .collect();
        SdpProblem {
            blocks,
            c,
            a,
            b: self.b.clone(),
        }
    }
}

fn orient(i: usize, j: usize, z: C64) -> ((usize, usize), C64) {
    if i <= j {
        ((i, j), z)
    } else {
        ((j, i), z.conj())
    }
}

/// Real-embedding entries (upper-triangle convention) of the Hermitian pair at `(i,j)`, `i <= j`.
fn embed(n: usize, i: usize, j: usize, z: C64) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::with_capacity(4);
    let (a, b) = (z.re, z.im);
    if i == j {
        out.push((i, i, a));
        out.push((n + i, n + i, a));
        return out;
    }
    if a != 0.0 {
        out.push((i, j, a));
        out.push((n + i, n + j, a));
    }
    if b != 0.0 {
        // lower-left block holds Im H, upper-right holds −Im H
        out.push((j, n + i, b));
        out.push((i, n + j, -b));
    }
    out
}

/// Reads the Hermitian matrix of complex block `blk` (size `n`) from a real-embedded block.
pub fn unembed(n: usize, real: &[f64]) -> crate::matcore::CMatrix {
    let nb = 2 * n;
    crate::matcore::CMatrix::from_fn(n, n, |i, j| {
        let re = 0.5 * (real[i * nb + j] + real[(n + i) * nb + n + j]);
        let im = 0.5 * (real[(n + i) * nb + j] - real[i * nb + n + j]);
        C64::new(re, im)
    })
}

pub fn sdp_solve(p: &SdpProblem) -> Result<SdpOutcome> {
    sdp_solve_with(p, &SdpSettings::default())
}

pub fn sdp_solve_with(p: &SdpProblem, settings: &SdpSettings) -> Result<SdpOutcome> {
    validate(p)?;
    Ok(Ipm::new(p).run(settings))
}

fn validate(p: &SdpProblem) -> Result<()> {
    let total: usize = p.blocks.iter().sum();
    if total > MAX_PSD_DIM {
        return Err(OscatError::SizeLimit {
            what: "SDP PSD dimension",
            requested: total,
            cap: MAX_PSD_DIM,
        });
    }
    if p.c.len() != p.blocks.len() || p.a.len() != p.b.len() {
        return Err(OscatError::ShapeMismatch("SDP data lengths".into()));
    }
    for (cb, &n) in p.c.iter().zip(&p.blocks) {
        if cb.len() != n * n {
            return Err(OscatError::ShapeMismatch("SDP cost block size".into()));
        }
    }
    for ai in &p.a {
        for e in ai {
            if e.block >= p.blocks.len() || e.row > e.col || e.col >= p.blocks[e.block] {
                return Err(OscatError::ShapeMismatch("SDP constraint entry out of range".into()));
            }
            if !e.val.is_finite() {
                return Err(OscatError::InvalidInput("non-finite SDP data".into()));
            }
        }
    }
    if p.b.iter().chain(p.c.iter().flatten()).any(|v| !v.is_finite()) {
        return Err(OscatError::InvalidInput("non-finite SDP data".into()));
    }
    Ok(())
}

type Blocks = Vec<Vec<f64>>;

struct Ipm<'a> {
    p: &'a SdpProblem,
    n_total: usize,
}

impl<'a> Ipm<'a> {
    fn new(p: &'a SdpProblem) -> Self {
        Ipm {
            p,
            n_total: p.blocks.iter().sum(),
        }
    }

    fn identity(&self, scale: f64) -> Blocks {
        self.p
            .blocks
            .iter()
            .map(|&n| {
                let mut m = vec![0.0; n * n];
                for i in 0..n {
                    m[i * n + i] = scale;
                }
                m
            })
            .collect()
    }

    /// `⟨A_i, X⟩` for every constraint.
    fn a_op(&self, x: &Blocks) -> Vec<f64> {
        self.p
            .a
            .iter()
            .map(|ai| {
                ai.iter()
                    .map(|e| {
                        let n = self.p.blocks[e.block];
                        let xb = &x[e.block];
                        if e.row == e.col {
                            e.val * xb[e.row * n + e.col]
                        } else {
                            e.val * (xb[e.row * n + e.col] + xb[e.col * n + e.row])
                        }
                    })
                    .sum()
            })
            .collect()
    }

    /// `Σ y_i A_i`.
    fn a_adj(&self, y: &[f64]) -> Blocks {
        let mut out: Blocks = self.p.blocks.iter().map(|&n| vec![0.0; n * n]).collect();
        for (ai, &yi) in self.p.a.iter().zip(y) {
            if yi == 0.0 {
                continue;
            }
            for e in ai {
                let n = self.p.blocks[e.block];
                out[e.block][e.row * n + e.col] += yi * e.val;
                if e.row != e.col {
                    out[e.block][e.col * n + e.row] += yi * e.val;
                }
            }
        }
        out
    }

    fn schur(&self, x: &Blocks, sinv: &Blocks) -> Vec<f64> {
        let m = self.p.a.len();
        let blocks = &self.p.blocks;
        let cols: Vec<Vec<f64>> = (0..m)
            .into_par_iter()
            .map(|j| {
                // P = X A_j S⁻¹, only on blocks A_j touches
                let mut pj: Vec<Option<Vec<f64>>> = vec![None; blocks.len()];
                for e in &self.p.a[j] {
                    let n = blocks[e.block];
                    let xb = &x[e.block];
                    let sb = &sinv[e.block];
                    let pb = pj[e.block].get_or_insert_with(|| vec![0.0; n * n]);
                    rank1(pb, n, xb, sb, e.row, e.col, e.val);
                    if e.row != e.col {
                        rank1(pb, n, xb, sb, e.col, e.row, e.val);
                    }
                }
                (0..m)
                    .map(|i| {
                        self.p.a[i]
                            .iter()
                            .map(|e| {
                                let Some(pb) = &pj[e.block] else { return 0.0 };
                                let n = blocks[e.block];
                                if e.row == e.col {
                                    e.val * pb[e.row * n + e.row]
                                } else {
                                    e.val * (pb[e.col * n + e.row] + pb[e.row * n + e.col])
                                }
                            })
                            .sum()
                    })
                    .collect()
            })
            .collect();
        let mut out = vec![0.0; m * m];
        for (j, col) in cols.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                out[i * m + j] = *v;
            }
        }
        // symmetrise away rounding
        for i in 0..m {
            for j in (i + 1)..m {
                let a = 0.5 * (out[i * m + j] + out[j * m + i]);
                out[i * m + j] = a;
                out[j * m + i] = a;
            }
        }
        out
    }

    fn run(&self, st: &SdpSettings) -> SdpOutcome {
        let p = self.p;
        let m = p.b.len();
        let nt = self.n_total.max(1) as f64;
        let a_norms: Vec<f64> =
            p.a.iter()
                .map(|ai| {
                    ai.iter()
                        .map(|e| {
                            if e.row == e.col {
                                e.val * e.val
                            } else {
                                2.0 * e.val * e.val
                            }
                        })
                        .sum::<f64>()
                        .sqrt()
                })
                .collect();
        let c_norm = frob(&p.c);
        let b_norm = norm2(&p.b);
        let mut xi: f64 = 10.0f64.max(nt.sqrt());
        for (bi, an) in p.b.iter().zip(&a_norms) {
            xi = xi.max(nt.sqrt() * (1.0 + bi.abs()) / (1.0 + an));
        }
        let eta = 10.0f64
            .max(nt.sqrt())
            .max(c_norm)
            .max(a_norms.iter().cloned().fold(0.0, f64::max));

        let mut x = self.identity(xi);
        let mut s = self.identity(eta);
        let mut y = vec![0.0; m];
        let mut last = None;

        for iter in 0..st.max_iter {
            let ax = self.a_op(&x);
            let rp: Vec<f64> = p.b.iter().zip(&ax).map(|(b, a)| b - a).collect();
            let aty = self.a_adj(&y);
            let rd: Blocks = sub3(&p.c, &s, &aty);
            let mu = dot(&x, &s) / nt;
            let pobj = dot(&p.c, &x);
            let dobj: f64 = p.b.iter().zip(&y).map(|(b, y)| b * y).sum();
            let rel_gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
            let pinf = norm2(&rp) / (1.0 + b_norm);
            let dinf = frob(&rd) / (1.0 + c_norm);

            let sol = SdpSolution {
                value: dobj,
                primal_value: pobj,
                x: x.clone(),
                y: y.clone(),
                s: s.clone(),
                rel_gap,
                primal_infeas: pinf,
                dual_infeas: dinf,
                iterations: iter,
            };
            if rel_gap < st.gap_tol && pinf < st.feas_tol && dinf < st.feas_tol {
                return SdpOutcome::Optimal(sol);
            }
            if frob(&x) > 1e12 * (1.0 + b_norm) || norm2(&y) > 1e12 * (1.0 + c_norm) {
                return SdpOutcome::Infeasible;
            }
            last = Some(sol);

            let Some(sinv) = blocks_inv(&p.blocks, &s) else {
                break;
            };
            let schur = self.schur(&x, &sinv);
            let Some(lm) = chol(m, &schur) else {
                break;
            };

            // predictor
            let xrd = blocks_mul(&p.blocks, &x, &rd);
            let xrds = blocks_mul(&p.blocks, &xrd, &sinv);
            let g_aff: Blocks = x
                .iter()
                .zip(&xrds)
                .map(|(xb, wb)| xb.iter().zip(wb).map(|(a, b)| -a - b).collect())
                .collect();
            let (dx_a, _, ds_a) = self.direction(&g_aff, &rp, &rd, &x, &sinv, &lm);
            let (Some(ap), Some(ad)) = (max_step(&p.blocks, &x, &dx_a), max_step(&p.blocks, &s, &ds_a)) else {
                break;
            };
            let (ap, ad) = (ap.min(1.0), ad.min(1.0));
            let x_aff = axpy(&x, ap, &dx_a);
            let s_aff = axpy(&s, ad, &ds_a);
            let mu_aff = dot(&x_aff, &s_aff) / nt;
            let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

            // corrector
            let dxds = blocks_mul(&p.blocks, &dx_a, &ds_a);
            let dxdss = blocks_mul(&p.blocks, &dxds, &sinv);
            let g: Blocks = (0..p.blocks.len())
                .map(|k| {
                    (0..x[k].len())
                        .map(|t| sigma * mu * sinv[k][t] - x[k][t] - xrds[k][t] - dxdss[k][t])
                        .collect()
                })
                .collect();
            let (dx, dy, ds) = self.direction(&g, &rp, &rd, &x, &sinv, &lm);
            let (Some(ap), Some(ad)) = (max_step(&p.blocks, &x, &dx), max_step(&p.blocks, &s, &ds)) else {
                break;
            };
            let gamma = 0.98;
            let ap = (gamma * ap).min(1.0);
            let ad = (gamma * ad).min(1.0);
            if ap < 1e-12 && ad < 1e-12 {
                break;
            }
            x = axpy(&x, ap, &dx);
            s = axpy(&s, ad, &ds);
            for (yi, di) in y.iter_mut().zip(&dy) {
                *yi += ad * di;
            }
        }

        match last {
            Some(sol) if sol.rel_gap < 1e-7 && sol.primal_infeas < 1e-8 && sol.dual_infeas < 1e-8 => {
                SdpOutcome::Optimal(sol)
            }
            Some(sol) => SdpOutcome::NumericalFailure(format!(
                "stalled after {} iterations: gap {:.2e}, primal infeasibility {:.2e}, dual infeasibility {:.2e}",
                sol.iterations, sol.rel_gap, sol.primal_infeas, sol.dual_infeas
            )),
            None => SdpOutcome::NumericalFailure("no iterations performed".into()),
        }
    }

    /// Solves for `(ΔX, Δy, ΔS)` given `G` with `ΔX = sym(G + X (AᵀΔy) S⁻¹)`.
    fn direction(
        &self,
        g: &Blocks,
        rp: &[f64],
        rd: &Blocks,
        x: &Blocks,
        sinv: &Blocks,
        lm: &[f64],
    ) -> (Blocks, Vec<f64>, Blocks) {
        let p = self.p;
        let m = p.b.len();
        let ag = self.a_op(g);
        let rhs: Vec<f64> = rp.iter().zip(&ag).map(|(r, a)| r - a).collect();
        let dy = chol_solve(m, lm, &rhs);
        let atdy = self.a_adj(&dy);
        let ds: Blocks = rd
            .iter()
            .zip(&atdy)
            .map(|(r, a)| r.iter().zip(a).map(|(r, a)| r - a).collect())
            .collect();
        let t1 = blocks_mul(&p.blocks, x, &atdy);
        let t2 = blocks_mul(&p.blocks, &t1, sinv);
        let dx: Blocks = p
            .blocks
            .iter()
            .enumerate()
            .map(|(k, &n)| {
                let mut d = vec![0.0; n * n];
                for i in 0..n {
                    for j in 0..n {
                        let a = g[k][i * n + j] + t2[k][i * n + j];
                        let b = g[k][j * n + i] + t2[k][j * n + i];
                        d[i * n + j] = 0.5 * (a + b);
                    }
                }
                d
            })
            .collect();
        (dx, dy, ds)
    }
}

/// `P += v · X[:,r] S⁻¹[c,:]`
fn rank1(pb: &mut [f64], n: usize, x: &[f64], sinv: &[f64], r: usize, c: usize, v: f64) {
    for i in 0..n {
        let xv = v * x[i * n + r];
        if xv == 0.0 {
            continue;
        }
        let row = &mut pb[i * n..(i + 1) * n];
        let srow = &sinv[c * n..(c + 1) * n];
        for (o, s) in row.iter_mut().zip(srow) {
            *o += xv * s;
        }
    }
}

fn dot(a: &Blocks, b: &Blocks) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
        .sum()
}

fn frob(a: &Blocks) -> f64 {
    a.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn sub3(c: &Blocks, s: &Blocks, a: &Blocks) -> Blocks {
    (0..c.len())
        .map(|k| (0..c[k].len()).map(|t| c[k][t] - s[k][t] - a[k][t]).collect())
        .collect()
}

fn axpy(x: &Blocks, a: f64, d: &Blocks) -> Blocks {
    x.iter()
        .zip(d)
        .map(|(xb, db)| xb.iter().zip(db).map(|(p, q)| p + a * q).collect())
        .collect()
}

fn matmul(n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            let brow = &b[k * n..(k + 1) * n];
            let orow = &mut out[i * n..(i + 1) * n];
            for (o, bv) in orow.iter_mut().zip(brow) {
                *o += aik * bv;
            }
        }
    }
    out
}

fn blocks_mul(sizes: &[usize], a: &Blocks, b: &Blocks) -> Blocks {
    sizes
        .iter()
        .enumerate()
        .map(|(k, &n)| matmul(n, &a[k], &b[k]))
        .collect()
}

/// Lower Cholesky factor, `None` if not positive definite.
fn chol(n: usize, a: &[f64]) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if d <= 0.0 || !d.is_finite() {
            return None;
        }
        let dj = d.sqrt();
        l[j * n + j] = dj;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / dj;
        }
    }
    Some(l)
}

fn chol_solve(n: usize, l: &[f64], b: &[f64]) -> Vec<f64> {
    let mut z = b.to_vec();
    for i in 0..n {
        let mut s = z[i];
        for k in 0..i {
            s -= l[i * n + k] * z[k];
        }
        z[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = z[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * z[k];
        }
        z[i] = s / l[i * n + i];
    }
    z
}

fn inv_spd(n: usize, a: &[f64]) -> Option<Vec<f64>> {
    let l = chol(n, a)?;
    let mut out = vec![0.0; n * n];
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        let col = chol_solve(n, &l, &e);
        for i in 0..n {
            out[i * n + j] = col[i];
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let a = 0.5 * (out[i * n + j] + out[j * n + i]);
            out[i * n + j] = a;
            out[j * n + i] = a;
        }
    }
    Some(out)
}

fn blocks_inv(sizes: &[usize], a: &Blocks) -> Option<Blocks> {
    sizes.iter().enumerate().map(|(k, &n)| inv_spd(n, &a[k])).collect()
}

/// Largest `α` with `X + αΔX ⪰ 0` (infinite if every block stays PSD).
fn max_step(sizes: &[usize], x: &Blocks, dx: &Blocks) -> Option<f64> {
    let mut alpha = f64::INFINITY;
    for (k, &n) in sizes.iter().enumerate() {
        if n == 0 {
            continue;
        }
        let l = chol(n, &x[k])?;
        // Z = L⁻¹ ΔX L⁻ᵀ
        let mut w = vec![0.0; n * n];
        for j in 0..n {
            let col: Vec<f64> = (0..n).map(|i| dx[k][i * n + j]).collect();
            let s = forward(n, &l, &col);
            for i in 0..n {
                w[i * n + j] = s[i];
            }
        }
        let mut z = vec![0.0; n * n];
        for i in 0..n {
            let row: Vec<f64> = w[i * n..(i + 1) * n].to_vec();
            let s = forward(n, &l, &row);
            for j in 0..n {
                z[i * n + j] = s[j];
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let a = 0.5 * (z[i * n + j] + z[j * n + i]);
                z[i * n + j] = a;
                z[j * n + i] = a;
            }
        }
        let (vals, _) = sym_eig(n, &z, false).ok()?;
        let lmin = vals[0];
        if lmin < 0.0 {
            alpha = alpha.min(-1.0 / lmin);
        }
    }
    Some(alpha)
}

fn forward(n: usize, l: &[f64], b: &[f64]) -> Vec<f64> {
    let mut z = b.to_vec();
    for i in 0..n {
        let mut s = z[i];
        for k in 0..i {
            s -= l[i * n + k] * z[k];
        }
        z[i] = s / l[i * n + i];
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{c, op_norm, CMatrix};
    use crate::random::{random_matrix, rng};

    fn real(v: f64) -> C64 {
        c(v, 0.0)
    }

    #[test]
    fn eigenvalue_lp() {
        // max −t s.t. t·I − diag(1,2) ⪰ 0
        let mut b = SdpBuilder::new(1);
        let blk = b.add_block(2);
        b.add_const(blk, 0, 0, real(-1.0));
        b.add_const(blk, 1, 1, real(-2.0));
        b.add_coef(0, blk, 0, 0, real(1.0));
        b.add_coef(0, blk, 1, 1, real(1.0));
        b.set_objective(0, -1.0);
        let sol = sdp_solve(&b.build()).unwrap().into_result().unwrap();
        assert!((sol.value + 2.0).abs() < 1e-8, "{}", sol.value);
        assert!(sol.rel_gap <= 1e-7 * (1.0 + sol.value.abs()));
    }

    #[test]
    fn unit_trace_primal() {
        // primal: min −tr X s.t. tr X = 1 ; value −1
        let n = 3;
        let p = SdpProblem {
            blocks: vec![n],
            c: vec![(0..n * n).map(|t| if t % (n + 1) == 0 { -1.0 } else { 0.0 }).collect()],
            a: vec![(0..n)
                .map(|i| SparseEntry {
                    block: 0,
                    row: i,
                    col: i,
                    val: 1.0,
                })
                .collect()],
            b: vec![1.0],
        };
        let sol = sdp_solve(&p).unwrap().into_result().unwrap();
        assert!((sol.primal_value + 1.0).abs() < 1e-8);
        let tr: f64 = (0..n).map(|i| sol.x[0][i * n + i]).sum();
        assert!((tr - 1.0).abs() < 1e-8);
    }

    #[test]
    fn op_norm_via_sdp_matches_svd() {
        let mut r = rng(21);
        for _ in 0..20 {
            let a = random_matrix(&mut r, 3, 3);
            // max −t s.t. [[tI, A], [A*, tI]] ⪰ 0
            let mut b = SdpBuilder::new(1);
            let blk = b.add_block(6);
            for i in 0..3 {
                b.add_coef(0, blk, i, i, real(1.0));
                b.add_coef(0, blk, 3 + i, 3 + i, real(1.0));
                for j in 0..3 {
                    b.add_const(blk, i, 3 + j, a[(i, j)]);
                }
            }
            b.set_objective(0, -1.0);
            let sol = sdp_solve(&b.build()).unwrap().into_result().unwrap();
            let want = op_norm(&a).unwrap();
            assert!((-sol.value - want).abs() < 1e-7, "{} vs {want}", -sol.value);
        }
    }

    #[test]
    fn embedding_round_trip() {
        let mut r = rng(1);
        let h = random_matrix(&mut r, 3, 3).hermitian_part();
        let mut b = SdpBuilder::new(0);
        let blk = b.add_block(3);
        for i in 0..3 {
            for j in i..3 {
                b.add_const(blk, i, j, h[(i, j)]);
            }
        }
        let p = b.build();
        let back: CMatrix = unembed(3, &p.c[0]);
        assert!(back.max_abs_diff(&h) < 1e-15);
    }

    #[test]
    fn infeasible_detected() {
        // y ≥ 1 and y ≤ 0
        let mut b = SdpBuilder::new(1);
        let b1 = b.add_block(1);
        let b2 = b.add_block(1);
        b.add_const(b1, 0, 0, real(-1.0));
        b.add_coef(0, b1, 0, 0, real(1.0));
        b.add_coef(0, b2, 0, 0, real(-1.0));
        b.set_objective(0, 1.0);
        assert!(matches!(sdp_solve(&b.build()).unwrap(), SdpOutcome::Infeasible));
    }

    #[test]
    fn size_cap() {
        let p = SdpProblem {
            blocks: vec![600],
            c: vec![vec![0.0; 360000]],
            a: vec![],
            b: vec![],
        };
        assert!(matches!(sdp_solve(&p), Err(OscatError::SizeLimit { .. })));
    }
}
