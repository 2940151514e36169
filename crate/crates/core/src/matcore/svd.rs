//! Thin SVD by one-sided complex Jacobi rotations.

use super::{CMatrix, C64, ZERO};

#[derive(Debug, Clone)]
pub struct Svd {
    /// `m x k`; columns belonging to zero singular values are zero.
    pub u: CMatrix,
    /// Descending, length `k = min(m, n)`.
    pub s: Vec<f64>,
    /// `n x k`.
    pub v: CMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> CMatrix {
        let mut us = self.u.clone();
        for i in 0..us.rows() {
            for (k, sk) in self.s.iter().enumerate() {
                us[(i, k)] *= *sk;
            }
        }
        us.matmul(&self.v.adjoint())
    }
}

pub fn svd(a: &CMatrix) -> Svd {
    if a.rows() < a.cols() {
        let Svd { u, s, v } = jacobi(&a.adjoint());
        return Svd { u: v, s, v: u };
    }
    jacobi(a)
}

fn jacobi(a: &CMatrix) -> Svd {
    let (m, n) = (a.rows(), a.cols());
    // columns stored contiguously
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| a.col(j)).collect();
    let mut vc: Vec<Vec<C64>> = (0..n)
        .map(|j| {
            let mut e = vec![ZERO; n];
            e[j] = C64::new(1.0, 0.0);
            e
        })
        .collect();
    let eps = 1e-15;
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: C64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g == 0.0 || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let ph = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                rotate(&mut cols, p, q, ph, cs, sn);
                rotate(&mut vc, p, q, ph, cs, sn);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut s: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
    let mut u = CMatrix::zeros(m, n);
    let mut v = CMatrix::zeros(n, n);
    for (k, &j) in order.iter().enumerate() {
        let sj = s[j];
        if sj > 0.0 {
            for i in 0..m {
                u[(i, k)] = cols[j][i] / sj;
            }
        }
        for i in 0..n {
            v[(i, k)] = vc[j][i];
        }
    }
    s = order.iter().map(|&j| s[j]).collect();
    Svd { u, s, v }
}

fn rotate(cols: &mut [Vec<C64>], p: usize, q: usize, ph: C64, cs: f64, sn: f64) {
    let (lo, hi) = cols.split_at_mut(q);
    let cp = &mut lo[p];
    let cq = &mut hi[0];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let yq = *y * ph;
        let xp = *x;
        *x = xp * cs - yq * sn;
        *y = xp * sn + yq * cs;
    }
}
