use oscat_core::matcore::{c, BlockMatrix, CMatrix, C64};
use oscat_core::normlab::{cb_norm, Picture};
use oscat_core::random::{below, random_hermitian, random_matrix, split, uniform, Rng};
use oscat_core::supop::{adjoint_map, classify, random_cptp, transpose_map};
use oscat_core::vnstruct::{certify_morphism, make_algebra, make_coalgebra, MorphismMode, Structure};
use oscat_core::SuperOp;

const CC_TOL: f64 = 1e-6;

/// A map together with a label for failure messages.
fn sample_map(r: &mut Rng, unital_side: bool) -> (SuperOp, &'static str) {
    let n = 2 + below(r, 2);
    let rank = 1 + below(r, n * n);
    let base = random_cptp(r, n, n, rank);
    let base = if unital_side { adjoint_map(&base) } else { base };
    match below(r, 4) {
        0 => (base, "channel"),
        1 => {
            let lam = uniform(r, 0.3, 1.0);
            let t = transpose_map(&[n]);
            (
                base.scale(c(1.0 - lam, 0.0)).add(&t.scale(c(lam, 0.0))).unwrap(),
                "transpose mix",
            )
        }
        2 => (base.scale(c(uniform(r, 1.05, 1.5), 0.0)), "scaled up"),
        _ => (base.scale(c(uniform(r, 0.3, 0.9), 0.0)), "scaled down"),
    }
}

fn equivalence(unital_side: bool, seed: u64) {
    let picture = if unital_side { Picture::Operator } else { Picture::Trace };
    let mut disagreements = Vec::new();
    for i in 0..200 {
        let mut r = split(seed, i);
        let (f, label) = sample_map(&mut r, unital_side);
        let flags = classify(&f, 1e-9).unwrap();
        let normal = if unital_side { flags.unital } else { flags.tp };
        let cb = cb_norm(&f, picture).unwrap();
        let cc = if cb.upper <= 1.0 + CC_TOL {
            Some(true)
        } else if cb.lower > 1.0 + CC_TOL {
            Some(false)
        } else {
            None
        };
        let structural = cc.map(|cc| normal && cc);
        if structural != Some(flags.cp && normal) {
            disagreements.push((i, label, cb, flags.min_choi_eig));
        }
    }
    assert!(disagreements.is_empty(), "{disagreements:?}");
}

#[test]
fn unital_complete_contractions_are_cpu() {
    equivalence(true, 0xa1);
}

#[test]
fn counital_complete_contractions_are_cptp() {
    equivalence(false, 0xc1);
}

#[test]
fn abstract_and_concrete_positivity_agree() {
    let shapes = [vec![2], vec![3], vec![2, 1]];
    let mut positives = 0;
    for i in 0..200u64 {
        let mut r = split(0xabc, i);
        let shape = &shapes[i as usize % 3];
        let co = make_coalgebra(shape);
        let kind = below(&mut r, 4);
        let blocks = shape
            .iter()
            .map(|&k| match kind {
                0 => {
                    let t = random_matrix(&mut r, k, k);
                    t.adjoint().matmul(&t)
                }
                1 => random_hermitian(&mut r, k),
                2 => random_matrix(&mut r, k, k),
                _ => {
                    let t = random_matrix(&mut r, k, 1);
                    t.matmul(&t.adjoint()).scale_re(-1.0)
                }
            })
            .collect();
        let f = BlockMatrix::new(blocks).unwrap();
        let concrete = f.psd_check(1e-10).unwrap().is_psd();
        let abstract_ = co.abstract_positive(&f).unwrap();
        assert_eq!(concrete, abstract_, "sample {i} of kind {kind}");
        positives += concrete as usize;
    }
    assert!(positives >= 40);
}

#[test]
fn comultiplication_is_adjoint_of_multiplication_under_trace_pairing() {
    // ⟨δ(x), a ⊗ b⟩ = ⟨x, ab⟩ with ⟨x, a⟩ = tr(x a), from block products alone
    for shape in [vec![2], vec![2, 1], vec![3]] {
        let co = make_coalgebra(&shape);
        let d = co.dim();
        let pair = |x: &BlockMatrix, a: &BlockMatrix| x.mul(a).unwrap().trace();
        for t in 0..d {
            let x = BlockMatrix::basis(&shape, t);
            let mut unit = vec![C64::new(0.0, 0.0); d];
            unit[t] = C64::new(1.0, 0.0);
            let dx = co.coproduct(&unit);
            for s in 0..d {
                let a = BlockMatrix::basis(&shape, s);
                for u in 0..d {
                    let b = BlockMatrix::basis(&shape, u);
                    let lhs: C64 = (0..d * d)
                        .filter(|&k| dx[k] != C64::new(0.0, 0.0))
                        .map(|k| {
                            dx[k]
                                * pair(&BlockMatrix::basis(&shape, k / d), &a)
                                * pair(&BlockMatrix::basis(&shape, k % d), &b)
                        })
                        .sum();
                    assert_eq!(lhs, pair(&x, &a.mul(&b).unwrap()), "{shape:?} t={t} s={s} u={u}");
                }
            }
        }
    }
}

#[test]
fn trace_preservation_is_counitality() {
    for i in 0..60u64 {
        let mut r = split(0x7e, i);
        let (f, _) = sample_map(&mut r, false);
        let shape = f.dom().to_vec();
        let co = Structure::Coalgebra(make_coalgebra(&shape));
        let v = certify_morphism(&f, &co, &co, MorphismMode::CoalgHom, 1e-9).unwrap();
        let counital = v.checks.iter().find(|c| c.name == "counital").unwrap().passed;
        assert_eq!(classify(&f, 1e-9).unwrap().tp, counital, "sample {i}");
    }
}

#[test]
fn unitary_conjugation_is_algebra_and_structure_preserving() {
    let mut r = split(5, 0);
    let u = oscat_core::random::random_unitary(&mut r, 3);
    let f = oscat_core::supop::unitary_conjugation(&u).unwrap();
    let a = Structure::Algebra(make_algebra(&[3]));
    assert!(certify_morphism(&f, &a, &a, MorphismMode::AlgHom, 1e-9).unwrap().holds);
    let d = CMatrix::identity(3);
    assert!(f.apply_matrix(&d).unwrap().max_abs_diff(&d) < 1e-12);
}
