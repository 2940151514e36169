use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{basis_vec, nonzero, Structure, VnAlgebra, VnCoalgebra};
use crate::error::Result;
use crate::matcore::{c, C64, ONE, ZERO};
use crate::normlab::NormBracket;
use crate::osx::{norm_at, SpaceElement, SpaceExpr};
use crate::random::{complex_gaussian, split};

const DEFAULT_SEED: u64 = 0x05ca7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawResult {
    pub name: String,
    pub passed: bool,
    pub max_defect: f64,
    /// Number of sampled elements for the sampled laws; `None` for exact basis checks.
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawReport {
    pub structure: String,
    pub laws: Vec<LawResult>,
    /// What the sampled laws actually covered.
    pub sampling: String,
}

impl LawReport {
    pub fn all_passed(&self) -> bool {
        self.laws.iter().all(|l| l.passed)
    }

    pub fn failed(&self) -> Vec<&str> {
        self.laws
            .iter()
            .filter(|l| !l.passed)
            .map(|l| l.name.as_str())
            .collect()
    }

    pub fn law(&self, name: &str) -> Option<&LawResult> {
        self.laws.iter().find(|l| l.name == name)
    }
}

fn diff(x: &[C64], y: &[C64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
}

fn exact(name: &str, max_defect: f64, tol: f64) -> LawResult {
    LawResult {
        name: name.into(),
        passed: max_defect <= tol,
        max_defect,
        samples: None,
    }
}

/// Runs the full law suite with the default sampling seed.
pub fn check_laws(s: &Structure, sample_count: usize, tol: f64) -> LawReport {
    check_laws_seeded(s, sample_count, tol, DEFAULT_SEED)
}

pub fn check_laws_seeded(s: &Structure, sample_count: usize, tol: f64, seed: u64) -> LawReport {
    match s {
        Structure::Algebra(a) => algebra_laws(a, sample_count, tol, seed),
        Structure::Coalgebra(co) => coalgebra_laws(co, sample_count, tol, seed),
    }
}

fn max_over(d: usize, f: impl Fn(usize) -> f64 + Sync + Send) -> f64 {
    (0..d).into_par_iter().map(f).reduce(|| 0.0, f64::max)
}

fn algebra_laws(a: &VnAlgebra, samples: usize, tol: f64, seed: u64) -> LawReport {
    let d = a.dim();
    let e = |t| basis_vec(d, t);
    let assoc = max_over(d, |s| {
        let mut m: f64 = 0.0;
        for t in 0..d {
            let st = a.product(&e(s), &e(t));
            for u in 0..d {
                let lhs = a.product(&st, &e(u));
                let rhs = a.product(&e(s), &a.product(&e(t), &e(u)));
                m = m.max(diff(&lhs, &rhs));
            }
        }
        m
    });
    let left_unit = max_over(d, |t| diff(&a.product(&a.unit, &e(t)), &e(t)));
    let right_unit = max_over(d, |t| diff(&a.product(&e(t), &a.unit), &e(t)));
    let inv2 = max_over(d, |t| diff(&a.star(&a.star(&e(t))), &e(t)));
    let reverse = max_over(d, |s| {
        (0..d)
            .map(|t| {
                let lhs = a.star(&a.product(&e(s), &e(t)));
                let rhs = a.product(&a.star(&e(t)), &a.star(&e(s)));
                diff(&lhs, &rhs)
            })
            .fold(0.0, f64::max)
    });
    let unit_sa = diff(&a.star(&a.unit), &a.unit);

    let mut elements = canonical_unitaries(a);
    let n_canon = elements.len();
    elements.extend((0..samples as u64).map(|i| {
        let mut r = split(seed, i);
        (0..d).map(|_| complex_gaussian(&mut r)).collect::<Vec<_>>()
    }));
    let cstar = sampled(&a.space, &elements, |x| a.product(&a.star(x), x), tol);

    LawReport {
        structure: format!("algebra on {}", a.space),
        laws: vec![
            exact("associativity", assoc, tol),
            exact("left_unit", left_unit, tol),
            exact("right_unit", right_unit, tol),
            exact("involution_squared", inv2, tol),
            exact("reverse_multiplicativity", reverse, tol),
            exact("unit_self_adjoint", unit_sa, tol),
            cstar_result("c_star_identity", cstar, elements.len(), tol),
        ],
        sampling: format!(
            "{} canonical unitaries and {samples} random elements normalized to unit norm",
            n_canon
        ),
    }
}

fn coalgebra_laws(co: &VnCoalgebra, samples: usize, tol: f64, seed: u64) -> LawReport {
    let d = co.dim();
    let e = |t| basis_vec(d, t);
    // (δ⊗id)δ and (id⊗δ)δ, both indexed (a·d + b)·d + c
    let coassoc = max_over(d, |t| {
        let v = co.coproduct(&e(t));
        let mut lhs = vec![ZERO; d * d * d];
        let mut rhs = vec![ZERO; d * d * d];
        for (r, z) in nonzero(&v) {
            let (s, u) = (r / d, r % d);
            for (ab, w) in nonzero(&co.coproduct(&e(s))) {
                lhs[ab * d + u] += z * w;
            }
            for (bc, w) in nonzero(&co.coproduct(&e(u))) {
                rhs[s * d * d + bc] += z * w;
            }
        }
        diff(&lhs, &rhs)
    });
    let counit_side = |left: bool| {
        max_over(d, |t| {
            let v = co.coproduct(&e(t));
            let mut out = vec![ZERO; d];
            for (r, z) in nonzero(&v) {
                let (s, u) = (r / d, r % d);
                if left {
                    out[u] += co.counit[s] * z;
                } else {
                    out[s] += co.counit[u] * z;
                }
            }
            diff(&out, &e(t))
        })
    };
    let (left_counit, right_counit) = (counit_side(true), counit_side(false));
    let inv2 = max_over(d, |t| diff(&co.star(&co.star(&e(t))), &e(t)));
    // δ∘j = (j⊗j)∘γ∘δ
    let reverse = max_over(d, |t| {
        let lhs = co.coproduct(&co.star(&e(t)));
        let v = co.coproduct(&e(t));
        let mut rhs = vec![ZERO; d * d];
        for (r, z) in nonzero(&v) {
            let (s, u) = (r / d, r % d);
            let ju = co.star(&e(u));
            let js = co.star(&e(s));
            for (a_, x) in nonzero(&ju) {
                for (b_, y) in nonzero(&js) {
                    rhs[a_ * d + b_] += z.conj() * x * y;
                }
            }
        }
        diff(&lhs, &rhs)
    });
    let counit_inv = max_over(d, |t| {
        let jt = co.star(&e(t));
        let lhs: C64 = jt.iter().zip(&co.counit).map(|(x, y)| x * y).sum();
        (lhs - co.counit[t].conj()).norm()
    });

    let dual_space = SpaceExpr::dual(co.space.clone());
    let mut functionals = vec![co.counit.clone()];
    let n_canon = functionals.len();
    functionals.extend((0..samples as u64).map(|i| {
        let mut r = split(seed, i);
        (0..d).map(|_| complex_gaussian(&mut r)).collect::<Vec<_>>()
    }));
    let cstar = sampled(
        &dual_space,
        &functionals,
        |f| co.convolve(&co.functional_star(f), f),
        tol,
    );

    LawReport {
        structure: format!("coalgebra on {}", co.space),
        laws: vec![
            exact("coassociativity", coassoc, tol),
            exact("left_counit", left_counit, tol),
            exact("right_counit", right_counit, tol),
            exact("involution_squared", inv2, tol),
            exact("reverse_comultiplicativity", reverse, tol),
            exact("counit_involutive", counit_inv, tol),
            cstar_result("co_c_star_identity", cstar, functionals.len(), tol),
        ],
        sampling: format!(
            "counit and {samples} random functionals normalized to unit dual norm ({} canonical)",
            n_canon
        ),
    }
}

/// Blockwise shift and clock unitaries plus phases of the unit.
fn canonical_unitaries(a: &VnAlgebra) -> Vec<Vec<C64>> {
    let d = a.dim();
    if d == 0 {
        return Vec::new();
    }
    let mut out = vec![a.unit.clone(), a.unit.iter().map(|z| z * c(0.0, 1.0)).collect()];
    if let Some(shape) = &a.shape {
        let mut shift = vec![ZERO; d];
        let mut clock = vec![ZERO; d];
        let mut off = 0;
        for &k in shape {
            for i in 0..k {
                shift[off + ((i + 1) % k) * k + i] = ONE;
                let ang = 2.0 * std::f64::consts::PI * i as f64 / k as f64;
                clock[off + i * k + i] = C64::from_polar(1.0, ang);
            }
            off += k * k;
        }
        out.push(shift);
        out.push(clock);
    }
    out
}

/// `max |‖x*x‖ − ‖x‖²|` over normalized samples; `None` when some norm is not certified.
fn sampled(
    space: &SpaceExpr,
    xs: &[Vec<C64>],
    square: impl Fn(&[C64]) -> Vec<C64> + Sync + Send,
    tol: f64,
) -> Result<(f64, usize)> {
    if space.dim() == 0 {
        return Ok((0.0, 0));
    }
    let norm = |x: &[C64]| -> Result<NormBracket> { norm_at(&SpaceElement::vector(space.clone(), x)?) };
    let results: Vec<Result<Option<f64>>> = xs
        .par_iter()
        .map(|x| {
            let n = norm(x)?;
            let Some(nx) = n.value().filter(|_| n.upper - n.lower <= tol) else {
                return Ok(None);
            };
            if nx == 0.0 {
                return Ok(Some(0.0));
            }
            let unit: Vec<C64> = x.iter().map(|z| z / nx).collect();
            let sq = norm(&square(&unit))?;
            Ok(sq
                .value()
                .filter(|_| sq.upper - sq.lower <= tol)
                .map(|v| (v - 1.0).abs()))
        })
        .collect();
    let mut worst: f64 = 0.0;
    let mut uncertified = 0;
    for r in results {
        match r? {
            Some(v) => worst = worst.max(v),
            None => uncertified += 1,
        }
    }
    Ok((worst, uncertified))
}

fn cstar_result(name: &str, r: Result<(f64, usize)>, count: usize, tol: f64) -> LawResult {
    match r {
        Ok((defect, 0)) => LawResult {
            name: name.into(),
            passed: defect <= tol,
            max_defect: defect,
            samples: Some(count),
        },
        _ => LawResult {
            name: name.into(),
            passed: false,
            max_defect: f64::INFINITY,
            samples: Some(count),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::super::{make_algebra, make_coalgebra};
    use super::*;
    use crate::matcore::CMatrix;

    fn alg(shape: &[usize]) -> Structure {
        Structure::Algebra(make_algebra(shape))
    }

    fn coalg(shape: &[usize]) -> Structure {
        Structure::Coalgebra(make_coalgebra(shape))
    }

    #[test]
    fn trace_class_comonoid_laws_are_exact() {
        let r = check_laws(&coalg(&[2]), 10, 0.0);
        let exact: Vec<_> = r.laws.iter().filter(|l| l.samples.is_none()).collect();
        assert!(exact.iter().all(|l| l.passed && l.max_defect == 0.0), "{r:?}");
        assert!(check_laws(&coalg(&[2]), 10, 1e-9).all_passed());
    }

    #[test]
    fn double_coproduct_matches_symbolic_expansion() {
        // (δ⊗id)δ(e_ij) = Σ_{a,b} e_aj ⊗ e_ba ⊗ e_ib
        let n = 3;
        let co = make_coalgebra(&[n]);
        let d = n * n;
        for i in 0..n {
            for j in 0..n {
                let v = co.coproduct(&basis_vec(d, i * n + j));
                let mut got = vec![ZERO; d * d * d];
                for (r, z) in nonzero(&v) {
                    for (ab, w) in nonzero(&co.coproduct(&basis_vec(d, r / d))) {
                        got[ab * d + r % d] += z * w;
                    }
                }
                let mut want = vec![ZERO; d * d * d];
                for a in 0..n {
                    for b in 0..n {
                        want[((a * n + j) * d + b * n + a) * d + i * n + b] += ONE;
                    }
                }
                assert_eq!(got, want);
            }
        }
    }

    #[test]
    fn c_star_identity_on_matrix_algebra() {
        let r = check_laws(&alg(&[2]), 100, 1e-9);
        let cs = r.law("c_star_identity").unwrap();
        assert!(cs.passed && cs.samples == Some(104), "{cs:?}");
        assert!(r.all_passed());
    }

    #[test]
    fn standard_structures_pass() {
        for shape in [vec![1], vec![3], vec![2, 1], vec![2, 2], vec![1, 1, 1]] {
            for s in [alg(&shape), coalg(&shape)] {
                let r = check_laws(&s, 20, 1e-9);
                assert!(r.all_passed(), "{shape:?}: {:?}", r.failed());
            }
        }
    }

    #[test]
    fn composites_pass() {
        let a = make_algebra(&[2]).tensor(&make_algebra(&[1, 1]));
        let b = make_algebra(&[2]).direct_sum(&make_algebra(&[2]).tensor(&make_algebra(&[1])));
        let c = make_coalgebra(&[2]).tensor(&make_coalgebra(&[2]));
        let e = make_coalgebra(&[1]).direct_sum(&make_coalgebra(&[2]));
        for s in [a.into(), b.into(), c.into(), e.into()] {
            let r = check_laws(&s, 10, 1e-9);
            assert!(r.all_passed(), "{}: {:?}", r.structure, r.failed());
        }
    }

    #[test]
    fn tensor_of_algebras_is_kron_product() {
        let a = make_algebra(&[2]).tensor(&make_algebra(&[3]));
        let mut r = crate::random::rng(4);
        let x = crate::random::random_matrix(&mut r, 2, 2);
        let y = crate::random::random_matrix(&mut r, 3, 3);
        let (x2, y2) = (
            crate::random::random_matrix(&mut r, 2, 2),
            crate::random::random_matrix(&mut r, 3, 3),
        );
        let t = |p: &CMatrix, q: &CMatrix| CMatrix::column(&p.vec()).kron(&CMatrix::column(&q.vec())).into_data();
        let got = a.product(&t(&x, &y), &t(&x2, &y2));
        let want = t(&x.matmul(&x2), &y.matmul(&y2));
        assert!(got.iter().zip(&want).all(|(p, q)| (p - q).norm() < 1e-12));
    }

    fn mutants(m: &CMatrix) -> impl Iterator<Item = CMatrix> + '_ {
        (0..m.rows() * m.cols()).map(move |k| {
            let mut out = m.clone();
            out.data_mut()[k] += ONE;
            out
        })
    }

    #[test]
    fn every_single_entry_mutation_is_detected() {
        for shape in [vec![1], vec![2], vec![2, 1]] {
            let a = make_algebra(&shape);
            for mult in mutants(&a.mult) {
                let s = Structure::Algebra(VnAlgebra { mult, ..a.clone() });
                assert!(!check_laws(&s, 0, 1e-12).all_passed());
            }
            let c = make_coalgebra(&shape);
            for comult in mutants(&c.comult) {
                let s = Structure::Coalgebra(VnCoalgebra { comult, ..c.clone() });
                assert!(!check_laws(&s, 0, 1e-12).all_passed());
            }
        }
    }

    #[test]
    fn sign_flip_flags_coassociativity() {
        let mut c = make_coalgebra(&[2]);
        let k = c.comult.data().iter().position(|z| *z != ZERO).unwrap();
        c.comult.data_mut()[k] = -c.comult.data()[k];
        let r = check_laws(&Structure::Coalgebra(c), 0, 1e-12);
        assert!(r.failed().contains(&"coassociativity"), "{:?}", r.failed());
    }
}
