//! The factorization SDP shared by the diamond and Haagerup norms.
//!
//! For `V` of size `(n1·m1) x (n2·m2)`:
//!
//! `min (t0 + t1)/2  s.t. [[G1, −V], [−V*, G2]] ⪰ 0,  Tr_{m1} G1 ⪯ t0·1,  Tr_{m2} G2 ⪯ t1·1`
//!
//! where the traced factor is the trailing one. The value is
//! `inf { ‖Tr(XX*)‖^{1/2} ‖Tr(Y*Y)‖^{1/2} : V = XY }`.

use super::sdp::{sdp_solve, unembed, SdpBuilder, SdpOutcome, MAX_PSD_DIM};
use crate::error::Result;
use crate::matcore::{c, herm_eig, herm_eigvals, psd_sqrt, CMatrix, C64, ONE, ZERO};

/// Cap on SDP variables; the Schur complement is dense in them.
pub const MAX_SDP_VARS: usize = 1400;

#[derive(Debug, Clone, Copy)]
pub struct Dims {
    pub n1: usize,
    pub m1: usize,
    pub n2: usize,
    pub m2: usize,
}

impl Dims {
    pub fn d1(&self) -> usize {
        self.n1 * self.m1
    }
    pub fn d2(&self) -> usize {
        self.n2 * self.m2
    }
    pub fn fits(&self) -> bool {
        let psd = 2 * (self.d1() + self.d2()) + 2 * (self.n1 + self.n2);
        let vars = self.d1() * self.d1() + self.d2() * self.d2() + 2;
        psd <= MAX_PSD_DIM && vars <= MAX_SDP_VARS
    }
}

#[derive(Debug, Clone)]
pub struct TwoBlockResult {
    /// Certified upper bound (after a PSD repair shift).
    pub upper: f64,
    /// Dual-side states as ascent seeds `(A, B)` with `A*A ≈ ρ0`, `B*B ≈ ρ1`.
    pub seeds: Vec<(CMatrix, CMatrix)>,
    /// `(X, Y)` with `V ≈ X Y`, read off a square root of the repaired block matrix.
    pub factor: (CMatrix, CMatrix),
}

fn hermitian_params(d: usize, o: usize) -> Vec<(usize, usize, usize, C64)> {
    let mut out = Vec::with_capacity(d * d);
    for k in 0..d {
        out.push((o + k, k, k, ONE));
    }
    let mut idx = 0;
    for k in 0..d {
        for l in (k + 1)..d {
            out.push((o + d + 2 * idx, k, l, ONE));
            out.push((o + d + 2 * idx + 1, k, l, c(0.0, 1.0)));
            idx += 1;
        }
    }
    out
}

fn read_hermitian(d: usize, o: usize, y: &[f64]) -> CMatrix {
    let mut out = CMatrix::zeros(d, d);
    for (var, k, l, z) in hermitian_params(d, o) {
        out[(k, l)] += z * y[var];
        if k != l {
            out[(l, k)] += z.conj() * y[var];
        }
    }
    out
}

/// Traces out the trailing factor of size `m`.
pub fn partial_trace_last(g: &CMatrix, n: usize, m: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| (0..m).map(|c_| g[(i * m + c_, j * m + c_)]).sum())
}

/// Solves the factorization SDP; `None` when it does not fit under the caps or the solver
/// cannot certify a solution.
pub fn two_block_sdp(v: &CMatrix, dims: Dims) -> Result<Option<TwoBlockResult>> {
    let Dims { n1, m1, n2, m2 } = dims;
    let (d1, d2) = (dims.d1(), dims.d2());
    assert_eq!((v.rows(), v.cols()), (d1, d2));
    if !dims.fits() {
        return Ok(None);
    }
    let (p1, p2) = (d1 * d1, d2 * d2);
    let (t0, t1) = (p1 + p2, p1 + p2 + 1);
    let mut b = SdpBuilder::new(p1 + p2 + 2);
    let big = b.add_block(d1 + d2);
    let b0 = b.add_block(n1);
    let b1 = b.add_block(n2);
    for r in 0..d1 {
        for col in 0..d2 {
            let z = v[(r, col)];
            if z != ZERO {
                b.add_const(big, r, d1 + col, -z);
            }
        }
    }
    for (d, m, off, shift, blk) in [(d1, m1, 0, 0, b0), (d2, m2, p1, d1, b1)] {
        for (var, k, l, z) in hermitian_params(d, off) {
            b.add_coef(var, big, shift + k, shift + l, z);
            if k % m == l % m {
                b.add_coef(var, blk, k / m, l / m, -z);
            }
        }
    }
    for i in 0..n1 {
        b.add_coef(t0, b0, i, i, ONE);
    }
    for i in 0..n2 {
        b.add_coef(t1, b1, i, i, ONE);
    }
    b.set_objective(t0, -0.5);
    b.set_objective(t1, -0.5);

    let sol = match sdp_solve(&b.build())? {
        SdpOutcome::Optimal(sol) => sol,
        SdpOutcome::Infeasible | SdpOutcome::NumericalFailure(_) => return Ok(None),
    };
    let g1 = read_hermitian(d1, 0, &sol.y);
    let g2 = read_hermitian(d2, p1, &sol.y);
    let mut k = CMatrix::zeros(d1 + d2, d1 + d2);
    k.set_submatrix(0, 0, &g1);
    k.set_submatrix(d1, d1, &g2);
    k.set_submatrix(0, d1, &(-v));
    k.set_submatrix(d1, 0, &(-&v.adjoint()));
    let lmin = herm_eigvals(&k)?[0];
    let delta = (-lmin).max(0.0) + 64.0 * f64::EPSILON * k.frobenius();
    let g1 = &g1 + &CMatrix::identity(d1).scale_re(delta);
    let g2 = &g2 + &CMatrix::identity(d2).scale_re(delta);
    let top = |g: &CMatrix, n: usize, m: usize| -> Result<f64> {
        Ok(*herm_eigvals(&partial_trace_last(g, n, m))?.last().unwrap_or(&0.0))
    };
    let upper = 0.5 * (top(&g1, n1, m1)? + top(&g2, n2, m2)?);

    let kk = n1.max(n2);
    let pad = |a: CMatrix| {
        let mut out = CMatrix::zeros(kk, a.cols());
        out.set_submatrix(0, 0, &a);
        out
    };
    let mut seeds = Vec::new();
    let rho0 = unembed(n1, &sol.x[1]).scale_re(2.0);
    let rho1 = unembed(n2, &sol.x[2]).scale_re(2.0);
    if let (Ok(a), Ok(bm)) = (psd_sqrt(&rho0), psd_sqrt(&rho1)) {
        seeds.push((pad(a.clone()), pad(bm.clone())));
        seeds.push((pad(a.transpose()), pad(bm.transpose())));
        seeds.push((pad(a.conj()), pad(bm.conj())));
    }

    // K + δ = L L*, L = [L1; L2]  ⇒  V = −L1 L2*
    let mut kr = k.clone();
    for i in 0..d1 + d2 {
        kr[(i, i)] += C64::new(delta, 0.0);
    }
    let eig = herm_eig(&kr)?;
    let keep: Vec<usize> = (0..d1 + d2).filter(|&t| eig.values[t] > 0.0).collect();
    let l = CMatrix::from_fn(d1 + d2, keep.len(), |i, t| {
        eig.vectors[(i, keep[t])] * eig.values[keep[t]].sqrt()
    });
    let x = l.submatrix(0, 0, d1, keep.len());
    let y = l.submatrix(d1, 0, d2, keep.len()).adjoint().scale_re(-1.0);
    Ok(Some(TwoBlockResult {
        upper,
        seeds,
        factor: (x, y),
    }))
}
