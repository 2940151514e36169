//! Hermitian eigensolver: complex Householder reduction, a diagonal phase change to a
//! real symmetric tridiagonal, then implicit QL (`tql2`).

use super::{c, CMatrix, C64, ONE, ZERO};
use crate::error::{OscatError, Result};

#[derive(Debug, Clone)]
pub struct HermEig {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: CMatrix,
}

pub fn herm_eig(a: &CMatrix) -> Result<HermEig> {
    let (values, vectors) = eig_impl(a, true)?;
    Ok(HermEig {
        values,
        vectors: vectors.expect("vectors requested"),
    })
}

/// Eigenvalues only, ascending.
pub fn herm_eigvals(a: &CMatrix) -> Result<Vec<f64>> {
    Ok(eig_impl(a, false)?.0)
}

/// Real symmetric eigenproblem on a row-major `n x n` slice; returns ascending values and
/// column eigenvectors (row-major, real).
pub fn sym_eig(n: usize, a: &[f64], want_vectors: bool) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    assert_eq!(a.len(), n * n);
    let m = CMatrix::from_real(n, n, a);
    let (vals, vecs) = eig_impl(&m, want_vectors)?;
    Ok((vals, vecs.map(|v| v.data().iter().map(|z| z.re).collect())))
}

fn eig_impl(a: &CMatrix, want_vectors: bool) -> Result<(Vec<f64>, Option<CMatrix>)> {
    a.ensure_finite()?;
    if !a.is_square() {
        return Err(OscatError::InvalidInput("eigensolver needs a square matrix".into()));
    }
    let n = a.rows();
    if n == 0 {
        return Ok((vec![], want_vectors.then(|| CMatrix::zeros(0, 0))));
    }
    let scale = a.max_abs().max(1.0);
    if a.hermitian_defect() > 1e-8 * scale {
        return Err(OscatError::InvalidInput("matrix is not Hermitian".into()));
    }

    let mut t = a.hermitian_part();
    let mut q = want_vectors.then(|| CMatrix::identity(n));

    for k in 0..n.saturating_sub(2) {
        let norm: f64 = ((k + 1)..n).map(|i| t[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = t[(k + 1, k)];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        let alpha = -phase * norm;
        let mut w = vec![ZERO; n];
        w[k + 1] = x0 - alpha;
        for i in (k + 2)..n {
            w[i] = t[(i, k)];
        }
        let wn: f64 = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if wn == 0.0 {
            continue;
        }
        for z in w.iter_mut() {
            *z /= wn;
        }
        reflect_both(&mut t, &w, k + 1);
        if let Some(q) = q.as_mut() {
            // Q <- Q H
            for i in 0..n {
                let s: C64 = ((k + 1)..n).map(|j| q[(i, j)] * w[j]).sum();
                for j in (k + 1)..n {
                    q[(i, j)] -= s * w[j].conj() * 2.0;
                }
            }
        }
    }

    let d: Vec<f64> = (0..n).map(|i| t[(i, i)].re).collect();
    let mut e = vec![0.0; n];
    let mut phases = vec![ONE; n];
    for k in 0..n - 1 {
        let s = t[(k + 1, k)];
        let m = s.norm();
        e[k] = m;
        phases[k + 1] = if m > 0.0 { phases[k] * (s / m) } else { phases[k] };
    }

    let mut z = want_vectors.then(|| vec![0.0; n * n]);
    if let Some(z) = z.as_mut() {
        for i in 0..n {
            z[i * n + i] = 1.0;
        }
    }
    let mut d = d;
    tql2(n, &mut d, &mut e, z.as_deref_mut())?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();

    let vectors = match (q, z) {
        (Some(q), Some(z)) => {
            // W = Q D Z
            let mut qd = q;
            for i in 0..n {
                for j in 0..n {
                    qd[(i, j)] *= phases[j];
                }
            }
            let zm = CMatrix::from_fn(n, n, |i, j| c(z[i * n + order[j]], 0.0));
            Some(qd.matmul(&zm))
        }
        _ => None,
    };
    Ok((values, vectors))
}

/// `T <- H T H` with `H = I - 2 w w*` supported on indices `from..`.
fn reflect_both(t: &mut CMatrix, w: &[C64], from: usize) {
    let n = t.rows();
    // T <- T H : T - 2 (T w) w*
    let tw: Vec<C64> = (0..n).map(|i| (from..n).map(|j| t[(i, j)] * w[j]).sum()).collect();
    for i in 0..n {
        for j in from..n {
            t[(i, j)] -= tw[i] * w[j].conj() * 2.0;
        }
    }
    // T <- H T : T - 2 w (w* T)
    let wt: Vec<C64> = (0..n)
        .map(|j| (from..n).map(|i| w[i].conj() * t[(i, j)]).sum())
        .collect();
    for i in from..n {
        for j in 0..n {
            t[(i, j)] -= w[i] * wt[j] * 2.0;
        }
    }
}

/// Symmetric tridiagonal QL with implicit shifts. `e[i]` couples `i` and `i+1`.
/// `z`, when present, is accumulated in place (row-major `n x n`).
fn tql2(n: usize, d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>) -> Result<()> {
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let max_iter = 60 * n.max(4);
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > max_iter {
                    return Err(OscatError::NumericalFailure("eigensolver did not converge".into()));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut cc = 1.0;
                let mut c2 = cc;
                let mut c3 = cc;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = cc;
                    s2 = s;
                    g = cc * e[i];
                    h = cc * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    cc = p / r;
                    p = cc * d[i] - s * g;
                    d[i + 1] = h + s * (cc * g + s * d[i]);
                    if let Some(z) = z.as_deref_mut() {
                        for k in 0..n {
                            let hk = z[k * n + i + 1];
                            z[k * n + i + 1] = s * z[k * n + i] + cc * hk;
                            z[k * n + i] = cc * z[k * n + i] - s * hk;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = cc * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_hermitian, rng};

    fn check(a: &CMatrix, tol: f64) {
        let HermEig { values, vectors } = herm_eig(a).unwrap();
        let n = a.rows();
        for w in values.windows(2) {
            assert!(w[0] <= w[1]);
        }
        let lam = CMatrix::diag(&values.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>());
        let rec = vectors.matmul(&lam).matmul(&vectors.adjoint());
        assert!(rec.max_abs_diff(a) < tol, "reconstruction {}", rec.max_abs_diff(a));
        let gram = vectors.adjoint().matmul(&vectors);
        assert!(gram.max_abs_diff(&CMatrix::identity(n)) < tol);
    }

    #[test]
    fn random_hermitian_reconstructs() {
        let mut r = rng(1);
        for n in 1..=12 {
            for _ in 0..5 {
                check(&random_hermitian(&mut r, n), 1e-10);
            }
        }
    }

    #[test]
    fn degenerate_and_diagonal() {
        check(&CMatrix::identity(5), 1e-12);
        check(&CMatrix::zeros(4, 4), 1e-12);
        let d = CMatrix::diag(&[c(3.0, 0.0), c(-1.0, 0.0), c(3.0, 0.0)]);
        let v = herm_eigvals(&d).unwrap();
        assert_eq!(v.len(), 3);
        assert!((v[0] + 1.0).abs() < 1e-14 && (v[2] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn pauli_y() {
        let y = CMatrix::from_vec(2, 2, vec![ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO]).unwrap();
        let v = herm_eigvals(&y).unwrap();
        assert!((v[0] + 1.0).abs() < 1e-14 && (v[1] - 1.0).abs() < 1e-14);
        check(&y, 1e-13);
    }

    #[test]
    fn real_symmetric_path() {
        let a = [2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0];
        let (vals, vecs) = sym_eig(3, &a, true).unwrap();
        let s2 = 2f64.sqrt();
        for (got, want) in vals.iter().zip([2.0 - s2, 2.0, 2.0 + s2]) {
            assert!((got - want).abs() < 1e-13);
        }
        let v = vecs.unwrap();
        for k in 0..3 {
            let col: Vec<f64> = (0..3).map(|i| v[i * 3 + k]).collect();
            for i in 0..3 {
                let av: f64 = (0..3).map(|j| a[i * 3 + j] * col[j]).sum();
                assert!((av - vals[k] * col[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        assert!(herm_eig(&CMatrix::unit(2, 2, 0, 1)).is_err());
    }
}
