use super::member::norm;
use super::*;
use crate::matcore::{c, norming_contraction, op_norm, tr_norm, BlockMatrix, CMatrix};
use crate::random::{below, random_density, random_hermitian, random_matrix, random_unitary, rng, split, uniform};
use crate::supop::{adjoint_map, identity_map, negate_map, random_cptp, transpose_map, unitary_conjugation};
use crate::vnstruct::{make_algebra, make_coalgebra};

const TOL: f64 = 1e-9;

fn single(m: CMatrix) -> BlockMatrix {
    BlockMatrix::single(m).unwrap()
}

fn h(shape: &[usize]) -> QObject {
    embed_h(&make_algebra(shape))
}

fn s(shape: &[usize]) -> QObject {
    embed_s(&make_coalgebra(shape)).unwrap()
}

#[test]
fn density_membership() {
    let p = s(&[2]);
    let half = CMatrix::identity(2).scale_re(0.5);
    assert_eq!(p.contains(&half.vec(), TOL).unwrap(), Membership::Yes);
    let eps = 1e-3;
    let bad = CMatrix::diag(&[c(1.0 + eps, 0.0), c(-eps, 0.0)]);
    assert_eq!(p.contains(&bad.vec(), TOL).unwrap(), Membership::No);
    assert_eq!(p.decidability(), Decidability::Decidable);
}

#[test]
fn unit_membership_is_the_singleton() {
    let a = h(&[2]);
    assert_eq!(a.contains(&CMatrix::identity(2).vec(), TOL).unwrap(), Membership::Yes);
    let mut r = rng(3);
    for _ in 0..20 {
        let u = random_unitary(&mut r, 2);
        assert_eq!(a.contains(&u.vec(), TOL).unwrap(), Membership::No);
    }
    assert!(a.contains(&[c(1.0, 0.0)], TOL).is_err());
}

#[test]
fn dual_of_h_is_s_of_dual() {
    for shape in [vec![2], vec![3], vec![2, 1]] {
        let alg = make_algebra(&shape);
        let lhs = connective(Connective::Dual, &embed_h(&alg), None).unwrap();
        let rhs = embed_s(&alg.dualize()).unwrap();
        let mut r = rng(7);
        let mut yes = 0;
        for i in 0..60 {
            let blocks: Vec<CMatrix> = shape
                .iter()
                .map(|&k| match i % 3 {
                    0 => random_density(&mut r, k).scale_re(1.0 / shape.len() as f64),
                    1 => random_hermitian(&mut r, k),
                    _ => random_matrix(&mut r, k, k),
                })
                .collect();
            let f = BlockMatrix::new(blocks).unwrap();
            // a functional's coordinates against its representing block matrix
            let rep = f.map_blocks(CMatrix::transpose);
            let a = lhs.contains(&f.coords(), 1e-8).unwrap();
            let b = rhs.contains(&rep.coords(), 1e-8).unwrap();
            assert_eq!(a, b, "{shape:?} sample {i}");
            yes += (a == Membership::Yes) as usize;
        }
        assert!(yes >= 20);
    }
}

#[test]
fn normalized_trace_against_unitary_is_in_its_polar() {
    let mut r = rng(11);
    for n in [1, 2, 3, 4] {
        let u = random_unitary(&mut r, n);
        let obj = QObject::unitary(&single(u.clone())).unwrap();
        let p = connective(Connective::Dual, &obj, None).unwrap();
        let f = u.conj().scale_re(1.0 / n as f64);
        assert_eq!(p.contains(&f.vec(), TOL).unwrap(), Membership::Yes);
        // right pairing, too large a norm: add a multiple of the pairing-null direction
        if n > 1 {
            let sign = |j: usize| c([1.0, -1.0].get(j).copied().unwrap_or(0.0), 0.0);
            let null = CMatrix::from_fn(n, n, |i, j| u.conj()[(i, j)] * sign(j));
            let g = &f + &null;
            assert_eq!(p.contains(&g.vec(), TOL).unwrap(), Membership::No);
        }
        // wrong pairing
        let h = f.scale_re(0.5);
        assert_eq!(p.contains(&h.vec(), TOL).unwrap(), Membership::No);
    }
}

#[test]
fn polar_of_densities_is_the_counit() {
    let p = connective(Connective::Dual, &s(&[2]), None).unwrap();
    assert_eq!(p.contains(&CMatrix::identity(2).vec(), TOL).unwrap(), Membership::Yes);
    assert_eq!(
        p.contains(&CMatrix::diag(&[c(1.0, 0.0), c(0.5, 0.0)]).vec(), TOL)
            .unwrap(),
        Membership::No
    );
}

#[test]
fn polar_of_empty_set_is_the_ball() {
    let empty = QObject::new(SpaceExpr::m(2, 2), SetSpec::empty());
    let ball = connective(Connective::Dual, &empty, None).unwrap();
    assert_eq!(ball.decidability(), Decidability::Semi);
    let mut r = rng(5);
    for _ in 0..40 {
        let f = random_matrix(&mut r, 2, 2);
        let t = tr_norm(&f).unwrap();
        let inside = f.scale_re(0.9 / t);
        let outside = f.scale_re(1.1 / t);
        assert_eq!(ball.contains(&inside.vec(), TOL).unwrap(), Membership::Yes);
        assert_eq!(ball.contains(&outside.vec(), TOL).unwrap(), Membership::No);
    }
    let bipolar = connective(Connective::Dual, &ball, None).unwrap();
    assert_eq!(bipolar.decidability(), Decidability::Unknown);
    assert_eq!(
        bipolar.contains(&CMatrix::identity(2).vec(), TOL).unwrap(),
        Membership::Unknown
    );
}

#[test]
fn with_of_units_is_the_unit_pair() {
    let w = connective(Connective::With, &h(&[2]), Some(&h(&[3]))).unwrap();
    assert_eq!(w.space, SpaceExpr::sum_inf(SpaceExpr::m(2, 2), SpaceExpr::m(3, 3)));
    assert_eq!(w.set, SetSpec::UnitSet { shape: vec![2, 3] });
    let one = BlockMatrix::identity(&[2, 3]).coords();
    assert_eq!(w.contains(&one, TOL).unwrap(), Membership::Yes);
    let mut other = one.clone();
    other[0] = c(-1.0, 0.0);
    assert_eq!(w.contains(&other, TOL).unwrap(), Membership::No);
}

#[test]
fn plus_of_densities_is_a_convex_split() {
    let mut r = rng(9);
    let p = connective(Connective::Plus, &s(&[2]), Some(&s(&[1]))).unwrap();
    let rho = random_density(&mut r, 2);
    let lam = 0.3;
    let x = BlockMatrix::new(vec![rho.scale_re(lam), CMatrix::scalar(c(1.0 - lam, 0.0))]).unwrap();
    assert_eq!(p.contains(&x.coords(), TOL).unwrap(), Membership::Yes);
    let y = BlockMatrix::new(vec![rho.scale_re(lam), CMatrix::scalar(c(0.5, 0.0))]).unwrap();
    assert_eq!(p.contains(&y.coords(), TOL).unwrap(), Membership::No);

    // generic sets take the symbolic route
    let g = QObject::new(
        SpaceExpr::m(1, 1),
        SetSpec::FiniteSet {
            elements: vec![vec![c(1.0, 0.0)]],
            closure: Closure::Bipolar,
        },
    );
    let q = connective(Connective::Plus, &g, Some(&g)).unwrap();
    assert!(matches!(q.set, SetSpec::SumPolarSet(..)));
    assert_eq!(q.contains(&[c(0.25, 0.0), c(0.75, 0.0)], TOL).unwrap(), Membership::Yes);
    assert_eq!(q.contains(&[c(0.25, 0.0), c(0.25, 0.0)], TOL).unwrap(), Membership::No);
}

/// Tensor coordinates of a matrix on `C^a ⊗ C^b` in Kronecker layout.
fn tensor_coords(rho: &CMatrix, a: usize, b: usize) -> Vec<crate::matcore::C64> {
    let mut x = vec![c(0.0, 0.0); a * a * b * b];
    for i1 in 0..a {
        for j1 in 0..a {
            for i2 in 0..b {
                for j2 in 0..b {
                    x[(i1 * a + j1) * b * b + i2 * b + j2] = rho[(i1 * b + i2, j1 * b + j2)];
                }
            }
        }
    }
    x
}

#[test]
fn tensor_of_qubit_densities_is_four_level_densities() {
    let t = connective(Connective::Tensor, &s(&[2]), Some(&s(&[2]))).unwrap();
    assert_eq!(t.decidability(), Decidability::Decidable);
    let d4 = s(&[4]);
    let mut r = rng(13);
    for i in 0..60 {
        let rho = if i % 2 == 0 {
            random_density(&mut r, 4)
        } else {
            let hm = random_hermitian(&mut r, 4);
            let tr = hm.trace().re;
            hm.scale_re(1.0 / tr)
        };
        let a = t.contains(&tensor_coords(&rho, 2, 2), TOL).unwrap();
        let b = d4.contains(&rho.vec(), TOL).unwrap();
        assert_eq!(a, b, "sample {i}");
    }
}

#[test]
fn tensor_and_par_of_unitary_singletons_collapse() {
    let mut r = rng(17);
    let (u, v) = (random_unitary(&mut r, 2), random_unitary(&mut r, 3));
    let a = QObject::unitary(&single(u.clone())).unwrap();
    let b = QObject::unitary(&single(v.clone())).unwrap();
    for kind in [Connective::Tensor, Connective::Par] {
        let t = connective(kind, &a, Some(&b)).unwrap();
        let uv = kron_coords(&u.vec(), &v.vec());
        assert_eq!(t.contains(&uv, TOL).unwrap(), Membership::Yes);
        let mut off = uv.clone();
        off[3] += c(0.1, 0.0);
        assert_eq!(t.contains(&off, TOL).unwrap(), Membership::No);
    }
    let one = connective(Connective::Tensor, &QObject::unit(), Some(&a)).unwrap();
    assert_eq!(one.contains(&u.vec(), TOL).unwrap(), Membership::Yes);
}

#[test]
fn double_dual_agrees_on_samples() {
    let mut r = rng(19);
    let elements: Vec<_> = (0..3).map(|_| random_unitary(&mut r, 2).vec()).collect();
    for obj in [
        s(&[2]),
        h(&[2]),
        QObject::new(
            SpaceExpr::m(2, 2),
            SetSpec::FiniteSet {
                elements: elements.clone(),
                closure: Closure::Bipolar,
            },
        ),
    ] {
        let dd = connective(
            Connective::Dual,
            &connective(Connective::Dual, &obj, None).unwrap(),
            None,
        )
        .unwrap();
        assert_eq!(dd.set, obj.set);
        for i in 0..30 {
            let x = match i % 3 {
                0 => random_density(&mut r, 2).vec(),
                1 => elements[i % elements.len()].clone(),
                _ => random_matrix(&mut r, 2, 2).vec(),
            };
            assert_eq!(dd.contains(&x, TOL).unwrap(), obj.contains(&x, TOL).unwrap());
        }
    }
}

#[test]
fn objects_round_trip_through_json() {
    let t = connective(Connective::Par, &s(&[2]), Some(&h(&[1]))).unwrap();
    let back: QObject = serde_json::from_value(t.to_json()).unwrap();
    assert_eq!(back, t);
}

#[test]
fn morphism_examples() {
    let mut r = rng(23);
    let u = random_unitary(&mut r, 4);
    let conj = unitary_conjugation(&u).unwrap();
    let d4 = s(&[4]);
    let m = check_morphism(&conj, &d4, &d4, TOL).unwrap();
    assert_eq!(m.status, MorphismStatus::Valid, "{m:?}");
    assert_eq!(m.cross_check, Some(true));

    let m2 = h(&[2]);
    let neg = check_morphism(&negate_map(&[2]), &m2, &m2, TOL).unwrap();
    assert_eq!(neg.status, MorphismStatus::Invalid);
    assert_eq!(neg.reason, "unit not preserved");
    assert_eq!(neg.cross_check, Some(true));

    for obj in [
        h(&[2, 1]),
        s(&[3]),
        QObject::unitary(&single(random_unitary(&mut r, 2))).unwrap(),
    ] {
        let shape = match &obj.set {
            SetSpec::UnitSet { shape } | SetSpec::DensityOps { shape } => shape.clone(),
            SetSpec::SingletonUnitary { u } => u.shape(),
            _ => unreachable!(),
        };
        let id = check_morphism(&identity_map(&shape), &obj, &obj, TOL).unwrap();
        assert_eq!(id.status, MorphismStatus::Valid, "{obj:?}");
    }

    assert!(check_morphism(&identity_map(&[3]), &m2, &m2, TOL).is_err());
}

#[test]
fn transpose_is_not_a_morphism_of_densities() {
    // cb-norm n on the trace side
    let d2 = s(&[2]);
    let t = check_morphism(&transpose_map(&[2]), &d2, &d2, TOL).unwrap();
    assert_eq!(t.status, MorphismStatus::Invalid);
    assert!(t.cb_norm.unwrap().lower > 1.5);
}

/// Elements `P + Q y Q` with `‖y‖ ≤ 1` all pair to one with `σ^T` for `σ` supported on `P`.
fn supported_family(r: &mut crate::random::Rng, n: usize, count: usize) -> (Vec<Vec<crate::matcore::C64>>, CMatrix) {
    let w = random_unitary(r, n);
    let k = 1 + below(r, n - 1);
    let proj = |lo: usize, hi: usize| {
        let d: Vec<_> = (0..n)
            .map(|i| c(if (lo..hi).contains(&i) { 1.0 } else { 0.0 }, 0.0))
            .collect();
        w.matmul(&CMatrix::diag(&d)).matmul(&w.adjoint())
    };
    let (p, q) = (proj(0, k), proj(k, n));
    let elements = (0..count)
        .map(|_| {
            let y = random_matrix(r, n, n);
            let y = y.scale_re(uniform(r, 0.0, 1.0) / op_norm(&y).unwrap());
            (&p + &q.matmul(&y).matmul(&q)).vec()
        })
        .collect();
    let sigma = {
        let g = random_matrix(r, n, k);
        let basis = w.submatrix(0, 0, n, k);
        let m = basis.matmul(&g.submatrix(0, 0, k, k)).matmul(&basis.adjoint());
        let m = m.matmul(&m.adjoint());
        m.scale_re(1.0 / m.trace().re)
    };
    (elements, sigma.transpose())
}

#[test]
fn galois_connection_on_finite_sets() {
    for i in 0..30u64 {
        let mut r = split(0x6a, i);
        let n = 2 + below(&mut r, 2);
        let (elements, f) = supported_family(&mut r, n, 4);
        let space = SpaceExpr::m(n, n);
        let set = SetSpec::FiniteSet {
            elements: elements.clone(),
            closure: Closure::Unknown,
        };
        let sub = SetSpec::FiniteSet {
            elements: elements[..2].to_vec(),
            closure: Closure::Unknown,
        };
        let dual = SpaceExpr::dual(space.clone());
        let (ps, pr) = (polar(&set), polar(&sub));
        assert_eq!(
            member::member(&ps, &dual, &f.vec(), 1e-8).unwrap(),
            Membership::Yes,
            "sample {i}"
        );
        assert_eq!(member::member(&pr, &dual, &f.vec(), 1e-8).unwrap(), Membership::Yes);
        // S ⊆ S°°
        let bip = polar(&ps);
        for e in &elements {
            assert_eq!(member::member(&bip, &space, e, 1e-8).unwrap(), Membership::Yes);
        }
        // S°°° = S°
        assert_eq!(polar(&bip), ps);
        // R ⊆ S ⇒ S° ⊆ R°, and the pairing with the norming contraction of a dropped element
        let e = CMatrix::unvec(n, n, &elements[3]);
        let g = norming_contraction(&e).scale_re(1.0 / n as f64).transpose();
        if member::member(&ps, &dual, &g.vec(), 1e-8).unwrap() == Membership::Yes {
            assert_eq!(member::member(&pr, &dual, &g.vec(), 1e-8).unwrap(), Membership::Yes);
        }
    }
}

#[test]
fn nontrivial_polars_live_on_the_sphere() {
    for i in 0..30u64 {
        let mut r = split(0x5f, i);
        let n = 2 + below(&mut r, 2);
        let (elements, f) = supported_family(&mut r, n, 3);
        let space = SpaceExpr::m(n, n);
        let dual = SpaceExpr::dual(space.clone());
        let nf = norm(&dual, &f.vec()).unwrap();
        assert!(
            (nf.upper - 1.0).abs() <= 1e-9 && (nf.lower - 1.0).abs() <= 1e-9,
            "{nf:?}"
        );
        for e in &elements {
            let ns = norm(&space, e).unwrap();
            assert!((ns.upper - 1.0).abs() <= 1e-9, "{ns:?}");
        }
    }
}

#[test]
fn unitary_rigidity() {
    let mut checked = 0;
    for n in [2usize, 3] {
        for i in 0..500u64 {
            let mut r = split(0xa0 + n as u64, i);
            let u = random_unitary(&mut r, n);
            let g = match i % 3 {
                0 => {
                    // near-extremal: shrink a unitary close to u
                    let h = random_hermitian(&mut r, n);
                    let h = h.scale_re(uniform(&mut r, 0.0, 3e-5) / op_norm(&h).unwrap());
                    let w = exp_i(&h);
                    u.matmul(&w).scale_re(1.0 - uniform(&mut r, 0.0, 1e-10))
                }
                1 => {
                    let y = random_matrix(&mut r, n, n);
                    y.scale_re(uniform(&mut r, 0.5, 1.0) / op_norm(&y).unwrap())
                }
                _ => {
                    let y = random_matrix(&mut r, n, n);
                    let v = &u + &y.scale_re(1e-3);
                    v.scale_re(1.0 / op_norm(&v).unwrap())
                }
            };
            assert!(op_norm(&g).unwrap() <= 1.0 + 1e-12);
            let score = u.adjoint().matmul(&g).trace().re;
            if score >= n as f64 - 1e-9 {
                checked += 1;
                assert!(
                    (&g - &u).max_abs() <= 1e-4 && op_norm(&(&g - &u)).unwrap() <= 1e-4,
                    "n={n} sample {i}"
                );
            }
        }
    }
    assert!(checked >= 300);
}

fn exp_i(h: &CMatrix) -> CMatrix {
    // e^{ih} for Hermitian h through its spectral decomposition
    let re = crate::matcore::spectral_map(h, f64::cos).unwrap();
    let im = crate::matcore::spectral_map(h, f64::sin).unwrap();
    &re + &im.scale(c(0.0, 1.0))
}

#[test]
fn density_bipolarity() {
    let p = s(&[3]);
    let mut agree_yes = 0;
    for i in 0..500u64 {
        let mut r = split(0xde, i);
        let hm = match i % 4 {
            0 => random_density(&mut r, 3),
            1 => {
                let d = random_density(&mut r, 3);
                let e = random_hermitian(&mut r, 3).scale_re(uniform(&mut r, 0.0, 0.05));
                &d + &e
            }
            _ => random_hermitian(&mut r, 3),
        };
        let tr = hm.trace().re;
        let rho = if tr.abs() > 1e-3 { hm.scale_re(1.0 / tr) } else { hm };
        let positive = p.contains(&rho.vec(), 1e-9).unwrap() == Membership::Yes;
        let normed = (tr_norm(&rho).unwrap() - 1.0).abs() <= 1e-9 && (rho.trace() - c(1.0, 0.0)).norm() <= 1e-9;
        assert_eq!(positive, normed, "sample {i}");
        agree_yes += positive as usize;
    }
    assert!(agree_yes >= 125);
}

#[test]
fn h_and_s_morphisms_are_dual() {
    for i in 0..40u64 {
        let mut r = split(0x45, i);
        let n = 2 + below(&mut r, 2);
        let rank = 1 + below(&mut r, 3);
        let base = random_cptp(&mut r, n, n, rank);
        let f = match i % 4 {
            0 | 1 => base,
            2 => base.scale(c(uniform(&mut r, 0.5, 0.95), 0.0)),
            _ => {
                let lam = uniform(&mut r, 0.3, 1.0);
                base.scale(c(1.0 - lam, 0.0))
                    .add(&transpose_map(&[n]).scale(c(lam, 0.0)))
                    .unwrap()
            }
        };
        let co = make_coalgebra(&[n]);
        let src = embed_s(&co).unwrap();
        let hdual = embed_h(&co.dualize());
        let a = check_morphism(&f, &src, &src, TOL).unwrap();
        let b = check_morphism(&adjoint_map(&f), &hdual, &hdual, TOL).unwrap();
        assert_eq!(
            a.status == MorphismStatus::Valid,
            b.status == MorphismStatus::Valid,
            "sample {i}: {a:?} {b:?}"
        );
        assert_ne!(a.status, MorphismStatus::Unknown);
    }
}
