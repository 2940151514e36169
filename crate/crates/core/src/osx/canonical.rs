//! Canonical maps between constructions, as coordinate matrices, and the pushing of
//! conjugate/opposite through constructors.

use serde::{Deserialize, Serialize};

use super::norm::{push, NO_FLAGS};
use super::{SpaceElement, SpaceExpr};
use crate::error::{OscatError, Result};
use crate::matcore::{CMatrix, C64, ONE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TensorKind {
    Min,
    Proj,
    H,
}

impl TensorKind {
    pub fn build(self, x: SpaceExpr, y: SpaceExpr) -> SpaceExpr {
        match self {
            TensorKind::Min => SpaceExpr::tens_min(x, y),
            TensorKind::Proj => SpaceExpr::tens_proj(x, y),
            TensorKind::H => SpaceExpr::tens_h(x, y),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CanonicalKind {
    /// `d: X → X**`, `a ↦ (f ↦ f(a))`.
    DoubleDual,
    /// `γ: X ⊗ Y → Y ⊗ X`.
    Swap(TensorKind),
    /// `θ: X* ⊗_h Y* → (X ⊗_h Y)*`, `f ⊗ g ↦ (x ⊗ y ↦ f(x) g(y))`.
    HaagerupSelfDual,
    /// `(A ⊗_h B) ⊗̂ (C ⊗_h D) → (A ⊗̂ C) ⊗_h (B ⊗̂ D)`.
    ShuffleW,
    /// `(A ⊗̌ B) ⊗_h (C ⊗̌ D) → (A ⊗_h C) ⊗̌ (B ⊗_h D)`.
    ShuffleV,
}

/// Coordinate action `matrix` (`dim to x dim from`) of a canonical map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalMap {
    pub kind: CanonicalKind,
    pub from: SpaceExpr,
    pub to: SpaceExpr,
    pub matrix: CMatrix,
}

impl CanonicalMap {
    /// Applies the map entrywise at every matrix level.
    pub fn apply(&self, e: &SpaceElement) -> Result<SpaceElement> {
        if e.space != self.from {
            return Err(OscatError::ShapeMismatch(format!(
                "element of {} given to a map from {}",
                e.space, self.from
            )));
        }
        let (k, d) = (e.level, self.to.dim());
        let mut coords = CMatrix::zeros(k, k * d);
        for p in 0..k {
            for q in 0..k {
                for (t, z) in self.matrix.mul_vec(e.entry(p, q)).into_iter().enumerate() {
                    coords[(p, q * d + t)] = z;
                }
            }
        }
        SpaceElement::new(self.to.clone(), k, coords)
    }

    /// Inverse of the map; every canonical map here is a coordinate permutation.
    pub fn inverse(&self) -> CanonicalMap {
        CanonicalMap {
            kind: self.kind,
            from: self.to.clone(),
            to: self.from.clone(),
            matrix: self.matrix.transpose(),
        }
    }
}

fn permutation(d: usize, f: impl Fn(usize) -> usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    for t in 0..d {
        m[(f(t), t)] = ONE;
    }
    m
}

/// Builds the named map; `spaces` holds `[X]` for `d`, `[X, Y]` for `γ` and `θ`, and
/// `[A, B, C, D]` for the shuffles.
pub fn canonical_map(kind: CanonicalKind, spaces: &[SpaceExpr]) -> Result<CanonicalMap> {
    let want = match kind {
        CanonicalKind::DoubleDual => 1,
        CanonicalKind::Swap(_) | CanonicalKind::HaagerupSelfDual => 2,
        CanonicalKind::ShuffleW | CanonicalKind::ShuffleV => 4,
    };
    if spaces.len() != want {
        return Err(OscatError::ShapeMismatch(format!(
            "{kind:?} takes {want} spaces, got {}",
            spaces.len()
        )));
    }
    let s = |i: usize| spaces[i].clone();
    let (from, to, matrix) = match kind {
        CanonicalKind::DoubleDual => {
            let d = spaces[0].dim();
            (s(0), SpaceExpr::dual(SpaceExpr::dual(s(0))), CMatrix::identity(d))
        }
        CanonicalKind::Swap(tk) => {
            let (dx, dy) = (spaces[0].dim(), spaces[1].dim());
            let m = permutation(dx * dy, |t| (t % dy) * dx + t / dy);
            (tk.build(s(0), s(1)), tk.build(s(1), s(0)), m)
        }
        CanonicalKind::HaagerupSelfDual => {
            let d = spaces[0].dim() * spaces[1].dim();
            (
                SpaceExpr::tens_h(SpaceExpr::dual(s(0)), SpaceExpr::dual(s(1))),
                SpaceExpr::dual(SpaceExpr::tens_h(s(0), s(1))),
                CMatrix::identity(d),
            )
        }
        CanonicalKind::ShuffleW | CanonicalKind::ShuffleV => {
            let [da, db, dc, dd] = [0, 1, 2, 3].map(|i| spaces[i].dim());
            let m = permutation(da * db * dc * dd, |t| {
                let (ab, cd) = (t / (dc * dd), t % (dc * dd));
                let (a, b, c, d) = (ab / db, ab % db, cd / dd, cd % dd);
                (a * dc + c) * (db * dd) + (b * dd + d)
            });
            let (outer, inner) = if kind == CanonicalKind::ShuffleW {
                (TensorKind::Proj, TensorKind::H)
            } else {
                (TensorKind::H, TensorKind::Min)
            };
            (
                outer.build(inner.build(s(0), s(1)), inner.build(s(2), s(3))),
                inner.build(outer.build(s(0), s(2)), outer.build(s(1), s(3))),
                m,
            )
        }
    };
    Ok(CanonicalMap { kind, from, to, matrix })
}

/// Bilinear pairing `f(x)` of level-1 elements of `X*` and `X`.
pub fn pair(f: &SpaceElement, x: &SpaceElement) -> Result<C64> {
    if f.level != 1 || x.level != 1 {
        return Err(OscatError::ShapeMismatch(
            "pairing is defined on level-1 elements".into(),
        ));
    }
    if f.space != SpaceExpr::dual(x.space.clone()) {
        return Err(OscatError::ShapeMismatch(format!(
            "{} does not pair with {}",
            f.space, x.space
        )));
    }
    Ok(f.coords.data().iter().zip(x.coords.data()).map(|(a, b)| a * b).sum())
}

/// Pushes `conj`/`opp` down to the base spaces: `(X ⊗ Y)_c = X_c ⊗ Y_c` for every tensor,
/// `(X ⊗̌ Y)_o = X_o ⊗̌ Y_o`, `(X ⊗̂ Y)_o = X_o ⊗̂ Y_o`, `(X ⊗_h Y)_o ≅ Y_o ⊗_h X_o` via `γ`,
/// and both commute with sums and duals.
pub fn conj_opp_push(e: &SpaceElement) -> SpaceElement {
    let (space, map) = push(&e.space, NO_FLAGS, false);
    e.remap(space, &map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{c, ZERO};
    use crate::osx::{norm_at, parse_space, SpaceExpr::*};
    use crate::random::{random_matrix, rng};

    fn unit_vec(d: usize, t: usize) -> Vec<C64> {
        (0..d).map(|s| if s == t { ONE } else { ZERO }).collect()
    }

    #[test]
    fn double_dual_round_trip() {
        let mut r = rng(1);
        let x = parse_space("M(2) (*h) T(2)").unwrap();
        let d = canonical_map(CanonicalKind::DoubleDual, std::slice::from_ref(&x)).unwrap();
        let coords = random_matrix(&mut r, 2, 32);
        let e = SpaceElement::new(x, 2, coords).unwrap();
        let back = d.inverse().apply(&d.apply(&e).unwrap()).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn swap_on_units() {
        let g = canonical_map(CanonicalKind::Swap(TensorKind::H), &[BaseM(2, 2), BaseM(2, 2)]).unwrap();
        // e_01 ⊗ e_10 has coordinate 1·4 + 2
        let e = SpaceElement::vector(g.from.clone(), &unit_vec(16, 6)).unwrap();
        let out = g.apply(&e).unwrap();
        assert_eq!(out.coords.data(), &unit_vec(16, 2 * 4 + 1)[..]);
    }

    #[test]
    fn shuffle_permutes_basis() {
        let sp = [BaseM(1, 2), BaseM(2, 1), BaseM(1, 1), BaseM(2, 2)];
        for kind in [CanonicalKind::ShuffleW, CanonicalKind::ShuffleV] {
            let u = canonical_map(kind, &sp).unwrap();
            let d = u.from.dim();
            assert_eq!(d, 16);
            for t in 0..d {
                let (ab, cd) = (t / 4, t % 4);
                let (a, b, cc, dd) = (ab / 2, ab % 2, cd / 4, cd % 4);
                let want = (a + cc) * 8 + b * 4 + dd;
                let out = u.matrix.mul_vec(&unit_vec(d, t));
                assert_eq!(out, unit_vec(d, want));
            }
            assert_eq!(u.matrix.matmul(&u.inverse().matrix), CMatrix::identity(d));
        }
    }

    #[test]
    fn haagerup_self_duality_pairing() {
        let (x, y) = (BaseM(2, 1), BaseM(2, 2));
        let th = canonical_map(CanonicalKind::HaagerupSelfDual, &[x.clone(), y.clone()]).unwrap();
        for tf in 0..2 {
            for tg in 0..4 {
                let fg: Vec<C64> = (0..8).map(|t| if t == tf * 4 + tg { ONE } else { ZERO }).collect();
                let theta = th.apply(&SpaceElement::vector(th.from.clone(), &fg).unwrap()).unwrap();
                for tx in 0..2 {
                    for ty in 0..4 {
                        let xy =
                            SpaceElement::vector(SpaceExpr::tens_h(x.clone(), y.clone()), &unit_vec(8, tx * 4 + ty))
                                .unwrap();
                        let lhs = pair(&theta, &xy).unwrap();
                        let rhs = if tf == tx && tg == ty { ONE } else { ZERO };
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn conj_conj_is_identity() {
        let x = parse_space("M(2) (*h) T(2)").unwrap();
        let e = SpaceElement::vector(SpaceExpr::conj(SpaceExpr::conj(x.clone())), &[c(1.0, 2.0); 16]).unwrap();
        assert_eq!(e.space, x);
        assert_eq!(conj_opp_push(&e).coords, e.coords);
    }

    #[test]
    fn opp_over_haagerup_swaps() {
        let x = BaseM(1, 2);
        let y = BaseM(3, 1);
        let s = SpaceExpr::opp(SpaceExpr::tens_h(x.clone(), y.clone()));
        let e = SpaceElement::vector(s, &unit_vec(6, 3)).unwrap();
        let pushed = conj_opp_push(&e);
        assert_eq!(pushed.space, SpaceExpr::tens_h(SpaceExpr::opp(y), SpaceExpr::opp(x)));
        // source (tx, ty) = (1, 0) sits at 1·3 + 0; its image (ty, tx) at 0·2 + 1
        assert_eq!(pushed.coords.data(), &unit_vec(6, 1)[..]);
        assert!((norm_at(&pushed).unwrap().upper - norm_at(&e).unwrap().upper).abs() < 1e-9);
    }

    #[test]
    fn dual_of_inclusion_is_quotient_on_samples() {
        // ι: M(1,2) ↪ M(2) as the first row; ι* restricts a functional on M(2) to that row
        let mut r = rng(7);
        let row = BaseM(1, 2);
        for k in 1..=2 {
            for _ in 0..10 {
                let g = SpaceElement::new(SpaceExpr::dual(row.clone()), k, random_matrix(&mut r, k, 2 * k)).unwrap();
                let ng = norm_at(&g).unwrap().upper;
                let mut ext = CMatrix::zeros(k, 4 * k);
                for p in 0..k {
                    for q in 0..k {
                        let src = g.entry(p, q);
                        ext[(p, q * 4)] = src[0];
                        ext[(p, q * 4 + 1)] = src[1];
                    }
                }
                let lift = SpaceElement::new(SpaceExpr::t(2), k, ext).unwrap();
                let nl = norm_at(&lift).unwrap().upper;
                assert!((nl - ng).abs() <= 1e-3 * ng.max(1.0), "level {k}: {nl} vs {ng}");
            }
        }
    }
}
