use serde::{Deserialize, Serialize};

use super::{kron_coords, unitary_generator, SetSpec};
use crate::error::{OscatError, Result};
use crate::matcore::{BlockMatrix, CMatrix, C64};
use crate::normlab::NormBracket;
use crate::osx::{norm_at, SpaceElement, SpaceExpr};
use crate::supop::tensor_shape;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Yes,
    No,
    Unknown,
}

impl Membership {
    fn and(self, other: Membership) -> Membership {
        use Membership::*;
        match (self, other) {
            (No, _) | (_, No) => No,
            (Yes, Yes) => Yes,
            _ => Unknown,
        }
    }

    fn from_bool(b: bool) -> Membership {
        if b {
            Membership::Yes
        } else {
            Membership::No
        }
    }
}

pub(crate) fn norm(space: &SpaceExpr, x: &[C64]) -> Result<NormBracket> {
    norm_at(&SpaceElement::vector(space.clone(), x)?)
}

/// `Some(‖x‖ ≤ 1)` when the bracket decides it.
pub(crate) fn in_ball(b: &NormBracket, tol: f64) -> Option<bool> {
    if b.upper <= 1.0 + tol {
        Some(true)
    } else if b.lower > 1.0 + tol {
        Some(false)
    } else {
        None
    }
}

fn close(x: &[C64], y: &[C64], tol: f64) -> bool {
    x.len() == y.len() && x.iter().zip(y).all(|(a, b)| (a - b).norm() <= tol)
}

fn bilinear(f: &[C64], x: &[C64]) -> C64 {
    f.iter().zip(x).map(|(a, b)| a * b).sum()
}

/// The space whose dual is `y`.
fn predual(y: &SpaceExpr) -> SpaceExpr {
    match y {
        SpaceExpr::Dual(x) => (**x).clone(),
        other => SpaceExpr::dual(other.clone()),
    }
}

/// Factors of a binary construction, seen through duals (coordinates are unchanged).
fn split(space: &SpaceExpr) -> Option<(SpaceExpr, SpaceExpr)> {
    use SpaceExpr::*;
    match space {
        SumInf(x, y) | Sum1(x, y) | TensMin(x, y) | TensProj(x, y) | TensH(x, y) => {
            Some(((**x).clone(), (**y).clone()))
        }
        Dual(inner) => match inner.as_ref() {
            Dual(z) => split(z),
            other => split(other).map(|(x, y)| (SpaceExpr::dual(x), SpaceExpr::dual(y))),
        },
        _ => None,
    }
}

fn split_coords<'a>(space: &SpaceExpr, x: &'a [C64]) -> Result<(SpaceExpr, SpaceExpr, &'a [C64], &'a [C64])> {
    let (a, b) =
        split(space).ok_or_else(|| OscatError::ShapeMismatch(format!("{space} is not a binary construction")))?;
    let (xs, ys) = x.split_at(a.dim());
    Ok((a, b, xs, ys))
}

fn density(shape: &[usize], x: &[C64], tol: f64) -> Result<Membership> {
    let rho = BlockMatrix::from_coords(shape, x)?;
    let trace_ok = (rho.trace() - C64::new(1.0, 0.0)).norm() <= tol;
    Ok(Membership::from_bool(trace_ok && rho.psd_check(tol)?.is_psd()))
}

/// Tensor coordinates over `shape_a ⊗ shape_b` as a block matrix of the product shape.
fn tensor_block(sa: &[usize], sb: &[usize], x: &[C64]) -> Result<BlockMatrix> {
    let db: usize = sb.iter().map(|k| k * k).sum();
    let mut blocks = Vec::new();
    let mut oa = 0;
    for &ka in sa {
        let mut ob = 0;
        for &kb in sb {
            let m = CMatrix::from_fn(ka * kb, ka * kb, |r, c| {
                let (i1, i2, j1, j2) = (r / kb, r % kb, c / kb, c % kb);
                x[(oa + i1 * ka + j1) * db + ob + i2 * kb + j2]
            });
            blocks.push(m);
            ob += kb * kb;
        }
        oa += ka * ka;
    }
    let out = BlockMatrix::new(blocks)?;
    debug_assert_eq!(out.shape(), tensor_shape(sa, sb));
    Ok(out)
}

pub(crate) fn member(set: &SetSpec, space: &SpaceExpr, x: &[C64], tol: f64) -> Result<Membership> {
    if x.len() != space.dim() {
        return Err(OscatError::ShapeMismatch(format!(
            "{} coordinates for {space} of dimension {}",
            x.len(),
            space.dim()
        )));
    }
    match set {
        SetSpec::UnitSet { .. } | SetSpec::SingletonUnitary { .. } => {
            let g = unitary_generator(set).expect("unitary family");
            if g.len() != x.len() {
                return Err(OscatError::ShapeMismatch("set and space dimensions differ".into()));
            }
            Ok(Membership::from_bool(close(x, &g, tol)))
        }
        SetSpec::DensityOps { shape } => density(shape, x, tol),
        SetSpec::FiniteSet { elements, .. } => Ok(Membership::from_bool(elements.iter().any(|e| close(x, e, tol)))),
        SetSpec::PolarOf(inner) => polar_member(inner, space, x, tol),
        SetSpec::ProductSet(a, b) => {
            let (sx, sy, xs, ys) = split_coords(space, x)?;
            Ok(member(a, &sx, xs, tol)?.and(member(b, &sy, ys, tol)?))
        }
        SetSpec::SumPolarSet(a, b) => convex_split(a, b, space, x, tol),
        SetSpec::TensorBipolar(a, b) => tensor_member(a, b, space, x, tol),
        SetSpec::ParPolar(a, b) => match (unitary_generator(a), unitary_generator(b)) {
            (Some(u), Some(v)) => Ok(Membership::from_bool(close(x, &kron_coords(&u, &v), tol))),
            _ => match in_ball(&norm(space, x)?, tol) {
                Some(false) => Ok(Membership::No),
                _ => Ok(Membership::Unknown),
            },
        },
    }
}

/// `f ∈ S°` for `f` in the dual space `y`.
fn polar_member(inner: &SetSpec, y: &SpaceExpr, f: &[C64], tol: f64) -> Result<Membership> {
    match inner {
        // f = 1 on every density operator forces f = ε
        SetSpec::DensityOps { shape } => Ok(Membership::from_bool(close(
            f,
            &BlockMatrix::identity(shape).coords(),
            tol,
        ))),
        SetSpec::PolarOf(s) => match s.as_ref() {
            SetSpec::FiniteSet { elements, .. } if elements.is_empty() => Ok(Membership::Unknown),
            SetSpec::PolarOf(t) => polar_member(t, y, f, tol),
            t if t.known_bipolar() => member(t, y, f, tol),
            t => match t.generators() {
                Some(g) if g.iter().any(|e| close(f, e, tol)) => Ok(Membership::Yes),
                _ => Ok(Membership::Unknown),
            },
        },
        SetSpec::SumPolarSet(a, b) => {
            let prod = SetSpec::ProductSet(
                Box::new(SetSpec::PolarOf(a.clone())),
                Box::new(SetSpec::PolarOf(b.clone())),
            );
            member(&prod, y, f, tol)
        }
        SetSpec::ProductSet(a, b) => {
            let sum = SetSpec::SumPolarSet(
                Box::new(SetSpec::PolarOf(a.clone())),
                Box::new(SetSpec::PolarOf(b.clone())),
            );
            member(&sum, y, f, tol)
        }
        SetSpec::ParPolar(a, b) => {
            let t = SetSpec::TensorBipolar(
                Box::new(SetSpec::PolarOf(a.clone())),
                Box::new(SetSpec::PolarOf(b.clone())),
            );
            member(&t, y, f, tol)
        }
        other => match other.generators() {
            Some(gens) => {
                let x = predual(y);
                if gens.iter().any(|g| g.len() != x.dim()) {
                    return Err(OscatError::ShapeMismatch(
                        "generators do not live in the predual".into(),
                    ));
                }
                let pairs_ok = gens.iter().all(|g| (bilinear(f, g) - C64::new(1.0, 0.0)).norm() <= tol);
                if !pairs_ok {
                    return Ok(Membership::No);
                }
                Ok(match in_ball(&norm(y, f)?, tol) {
                    Some(b) => Membership::from_bool(b),
                    None => Membership::Unknown,
                })
            }
            None => Ok(Membership::Unknown),
        },
    }
}

/// `(S° + R°)° = { (λs, (1−λ)r) : s ∈ S, r ∈ R, λ ∈ [0,1] }` for bipolar `S`, `R`.
fn convex_split(a: &SetSpec, b: &SetSpec, space: &SpaceExpr, x: &[C64], tol: f64) -> Result<Membership> {
    let (sx, sy, xs, ys) = split_coords(space, x)?;
    let (nx, ny) = (norm(&sx, xs)?, norm(&sy, ys)?);
    if nx.lower + ny.lower > 1.0 + tol {
        return Ok(Membership::No);
    }
    if nx.upper - nx.lower > tol || ny.upper - ny.lower > tol {
        return Ok(Membership::Unknown);
    }
    let (lx, ly) = (nx.upper, ny.upper);
    if (lx + ly - 1.0).abs() > tol {
        return Ok(Membership::No);
    }
    let part = |s: &SetSpec, sp: &SpaceExpr, v: &[C64], l: f64| -> Result<Membership> {
        if l <= tol {
            return Ok(Membership::Yes);
        }
        let scaled: Vec<C64> = v.iter().map(|z| z / l).collect();
        member(s, sp, &scaled, tol / l)
    };
    Ok(part(a, &sx, xs, lx)?.and(part(b, &sy, ys, ly)?))
}

fn tensor_member(a: &SetSpec, b: &SetSpec, space: &SpaceExpr, x: &[C64], tol: f64) -> Result<Membership> {
    if let (Some(u), Some(v)) = (unitary_generator(a), unitary_generator(b)) {
        return Ok(Membership::from_bool(close(x, &kron_coords(&u, &v), tol)));
    }
    if let (SetSpec::DensityOps { shape: sa }, SetSpec::DensityOps { shape: sb }) = (a, b) {
        let rho = tensor_block(sa, sb, x)?;
        return density(&rho.shape(), &rho.coords(), tol);
    }
    let t = SetSpec::TensorBipolar(Box::new(a.clone()), Box::new(b.clone()));
    match t.generators() {
        Some(g) if g.iter().any(|e| close(x, e, tol)) => Ok(Membership::Yes),
        _ => match in_ball(&norm(space, x)?, tol) {
            Some(false) => Ok(Membership::No),
            _ => Ok(Membership::Unknown),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tensor_block_matches_kron() {
        let mut r = crate::random::rng(1);
        let a = crate::random::random_matrix(&mut r, 2, 2);
        let b = crate::random::random_matrix(&mut r, 3, 3);
        let x = kron_coords(&a.vec(), &b.vec());
        let blk = tensor_block(&[2], &[3], &x).unwrap();
        assert!(blk.blocks()[0].max_abs_diff(&a.kron(&b)) < 1e-15);
    }

    #[test]
    fn split_sees_through_duals() {
        let s = SpaceExpr::dual(SpaceExpr::sum_inf(SpaceExpr::m(2, 2), SpaceExpr::t(3)));
        let (x, y) = split(&s).unwrap();
        assert_eq!(x, SpaceExpr::dual(SpaceExpr::m(2, 2)));
        assert_eq!(y.dim(), 9);
        assert!(split(&SpaceExpr::dual(SpaceExpr::dual(s.clone()))).is_some());
    }
}
