//! Seeded random matrices. Every sampler takes the generator explicitly so results are
//! reproducible from a single `u64` seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::matcore::{c, CMatrix, C64};

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream, used to split work across threads deterministically.
pub fn split(seed: u64, stream: u64) -> Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn gaussian(r: &mut Rng) -> f64 {
    StandardNormal.sample(r)
}

/// Standard complex Gaussian, `E|z|² = 1`.
pub fn complex_gaussian(r: &mut Rng) -> C64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    c(gaussian(r) * s, gaussian(r) * s)
}

pub fn random_matrix(r: &mut Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(r))
}

pub fn random_real_matrix(r: &mut Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| c(gaussian(r), 0.0))
}

pub fn random_hermitian(r: &mut Rng, n: usize) -> CMatrix {
    random_matrix(r, n, n).hermitian_part()
}

/// Columns orthonormalised by modified Gram-Schmidt; `rows >= cols`.
pub fn random_isometry(r: &mut Rng, rows: usize, cols: usize) -> CMatrix {
    assert!(rows >= cols);
    loop {
        let mut a = random_matrix(r, rows, cols);
        let mut ok = true;
        for j in 0..cols {
            for k in 0..j {
                let dot: C64 = (0..rows).map(|i| a[(i, k)].conj() * a[(i, j)]).sum();
                for i in 0..rows {
                    let v = a[(i, k)];
                    a[(i, j)] -= dot * v;
                }
            }
            let nrm: f64 = (0..rows).map(|i| a[(i, j)].norm_sqr()).sum::<f64>().sqrt();
            if nrm < 1e-8 {
                ok = false;
                break;
            }
            for i in 0..rows {
                a[(i, j)] /= nrm;
            }
        }
        if ok {
            return a;
        }
    }
}

/// Haar-distributed unitary.
pub fn random_unitary(r: &mut Rng, n: usize) -> CMatrix {
    random_isometry(r, n, n)
}

/// Random density matrix `g g* / tr(g g*)`.
pub fn random_density(r: &mut Rng, n: usize) -> CMatrix {
    let g = random_matrix(r, n, n);
    let p = g.matmul(&g.adjoint());
    let t = p.trace().re;
    p.scale_re(1.0 / t)
}

/// Uniform in `[lo, hi)`.
pub fn uniform(r: &mut Rng, lo: f64, hi: f64) -> f64 {
    use rand::Rng as _;
    r.random_range(lo..hi)
}

pub fn below(r: &mut Rng, n: usize) -> usize {
    use rand::Rng as _;
    r.random_range(0..n)
}
