//! Witness ascent for lower bounds on amplified trace-picture norms.
//!
//! For a map with Choi matrix `J` (`N → M`) and ancilla size `k`, maximizes
//! `‖(Ψ⊗1) J (Φ⊗1)*‖_tr` over `k x N` matrices with `‖Ψ‖_F = ‖Φ‖_F = 1`; this equals
//! `‖(id_k ⊗ s)(ψφ*)‖_tr`, and rank-one inputs exhaust the trace-norm unit ball.
//!
//! The same objective with rectangular `J` lower-bounds the factorization SDP: for
//! `V = XY`, Hölder gives `‖(Ψ⊗1)XY(Φ⊗1)*‖_tr ≤ ‖Tr XX*‖^{1/2} ‖Tr Y*Y‖^{1/2}`.

use super::twoblock::Dims;
use crate::error::Result;
use crate::matcore::{norming_contraction, svd, tr_norm, CMatrix, C64, ZERO};
use crate::random::{random_matrix, Rng};
use crate::supop::SuperOp;

#[derive(Debug, Clone)]
pub struct AscentResult {
    pub value: f64,
    pub psi: CMatrix,
    pub phi: CMatrix,
}

fn apply_pair(j: &CMatrix, dims: Dims, psi: &CMatrix, phi: &CMatrix) -> CMatrix {
    let Dims { n1, m1, n2, m2 } = dims;
    let k = psi.rows();
    // T[(a,c),(jj,d)] = Σ_i Ψ[a,i] J[(i,c),(jj,d)]
    let mut t = CMatrix::zeros(k * m1, n2 * m2);
    for a in 0..k {
        for i in 0..n1 {
            let w = psi[(a, i)];
            if w == ZERO {
                continue;
            }
            for c_ in 0..m1 {
                for col in 0..n2 * m2 {
                    t[(a * m1 + c_, col)] += w * j[(i * m1 + c_, col)];
                }
            }
        }
    }
    // out[(a,c),(b,d)] = Σ_jj T[(a,c),(jj,d)] conj Φ[b,jj]
    let mut out = CMatrix::zeros(k * m1, k * m2);
    for row in 0..k * m1 {
        for b in 0..k {
            for jj in 0..n2 {
                let w = phi[(b, jj)].conj();
                if w == ZERO {
                    continue;
                }
                for d in 0..m2 {
                    out[(row, b * m2 + d)] += t[(row, jj * m2 + d)] * w;
                }
            }
        }
    }
    out
}

/// `G[(b,j),(a,i)] = Σ_{c,d} W[(b,d),(a,c)] J[(i,c),(j,d)]`, so `Re tr(W out) = Re φ* G ψ`.
fn gradient(j: &CMatrix, dims: Dims, k: usize, w: &CMatrix) -> CMatrix {
    let Dims { n1, m1, n2, m2 } = dims;
    let mut g = CMatrix::zeros(k * n2, k * n1);
    for b in 0..k {
        for a in 0..k {
            for i in 0..n1 {
                for jj in 0..n2 {
                    let mut s = ZERO;
                    for c_ in 0..m1 {
                        for d in 0..m2 {
                            s += w[(b * m2 + d, a * m1 + c_)] * j[(i * m1 + c_, jj * m2 + d)];
                        }
                    }
                    g[(b * n2 + jj, a * n1 + i)] = s;
                }
            }
        }
    }
    g
}

fn normalize(x: &CMatrix) -> CMatrix {
    let f = x.frobenius();
    if f > 0.0 {
        x.scale_re(1.0 / f)
    } else {
        x.clone()
    }
}

fn reshape(v: &[C64], k: usize, n: usize) -> CMatrix {
    CMatrix::from_fn(k, n, |a, i| v[a * n + i])
}

fn ascend(j: &CMatrix, dims: Dims, psi0: &CMatrix, phi0: &CMatrix) -> Result<AscentResult> {
    let k = psi0.rows();
    let mut psi = normalize(psi0);
    let mut phi = normalize(phi0);
    let mut out = apply_pair(j, dims, &psi, &phi);
    let mut value = tr_norm(&out)?;
    for _ in 0..300 {
        let w = norming_contraction(&out);
        let g = gradient(j, dims, k, &w);
        let d = svd(&g);
        if d.s.is_empty() || d.s[0] == 0.0 {
            break;
        }
        let new_psi = reshape(&d.v.col(0), k, dims.n1);
        let new_phi = reshape(&d.u.col(0), k, dims.n2);
        let new_out = apply_pair(j, dims, &new_psi, &new_phi);
        let new_value = tr_norm(&new_out)?;
        if new_value <= value {
            break;
        }
        let improved = new_value - value;
        (psi, phi, out, value) = (new_psi, new_phi, new_out, new_value);
        if improved <= 1e-14 * value.max(1.0) {
            break;
        }
    }
    Ok(AscentResult { value, psi, phi })
}

/// Best value over the given seeds plus `random_starts` random ones. `J` is
/// `(n1·m1) x (n2·m2)`; ancilla matrices are `k x n1` and `k x n2`.
pub fn map_ascent(
    j: &CMatrix,
    dims: Dims,
    k: usize,
    seeds: &[(CMatrix, CMatrix)],
    random_starts: usize,
    rng: &mut Rng,
) -> Result<AscentResult> {
    let (n1, n2) = (dims.n1, dims.n2);
    let mut best: Option<AscentResult> = None;
    let mut starts: Vec<(CMatrix, CMatrix)> = seeds
        .iter()
        .filter(|(p, q)| p.rows() == k && p.cols() == n1 && q.rows() == k && q.cols() == n2)
        .cloned()
        .collect();
    // maximally entangled input on the leading coordinates
    let me = |n: usize| CMatrix::from_fn(k, n, |a, i| if a == i { C64::new(1.0, 0.0) } else { ZERO });
    starts.push((me(n1), me(n2)));
    for _ in 0..random_starts {
        if n1 == n2 {
            let p = random_matrix(rng, k, n1);
            starts.push((p.clone(), p));
        }
        starts.push((random_matrix(rng, k, n1), random_matrix(rng, k, n2)));
    }
    for (p, q) in &starts {
        if p.frobenius() == 0.0 || q.frobenius() == 0.0 {
            continue;
        }
        let r = ascend(j, dims, p, q)?;
        if best.as_ref().is_none_or(|b| r.value > b.value) {
            best = Some(r);
        }
    }
    Ok(best.unwrap_or(AscentResult {
        value: 0.0,
        psi: CMatrix::zeros(k, n1),
        phi: CMatrix::zeros(k, n2),
    }))
}

/// Lower bound on `‖id_k ⊗ s‖` for `s` in the trace picture (trace-norm unit ball inputs).
pub fn amplified_trace_lower(s: &SuperOp, k: usize, random_starts: usize, rng: &mut Rng) -> Result<AscentResult> {
    let n: usize = s.dom().iter().sum();
    let m: usize = s.cod().iter().sum();
    map_ascent(
        &s.full_choi(),
        Dims {
            n1: n,
            m1: m,
            n2: n,
            m2: m,
        },
        k,
        &[],
        random_starts,
        rng,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::rng;
    use crate::supop::{amplify, identity_map, random_cptp, transpose_map};

    #[test]
    fn pair_action_matches_amplified_map() {
        let mut r = rng(3);
        let s = random_cptp(&mut r, 2, 3, 2);
        let psi = random_matrix(&mut r, 2, 2);
        let phi = random_matrix(&mut r, 2, 2);
        let out = apply_pair(
            &s.full_choi(),
            Dims {
                n1: 2,
                m1: 3,
                n2: 2,
                m2: 3,
            },
            &psi,
            &phi,
        );
        let amp = amplify(&s, 2).unwrap();
        let pv = CMatrix::column(&psi.vec());
        let fv = CMatrix::column(&phi.vec());
        let want = amp.apply_matrix(&pv.matmul(&fv.adjoint())).unwrap();
        assert!(out.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn transpose_reaches_n() {
        let mut r = rng(1);
        for n in 2..=3 {
            let res = amplified_trace_lower(&transpose_map(&[n]), n, 2, &mut r).unwrap();
            assert!((res.value - n as f64).abs() < 1e-9);
            let res1 = amplified_trace_lower(&transpose_map(&[n]), 1, 4, &mut r).unwrap();
            assert!((res1.value - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn identity_is_one() {
        let mut r = rng(2);
        let res = amplified_trace_lower(&identity_map(&[2]), 2, 3, &mut r).unwrap();
        assert!((res.value - 1.0).abs() < 1e-12);
    }
}
