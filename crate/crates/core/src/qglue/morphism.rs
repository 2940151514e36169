use serde::{Deserialize, Serialize};

use super::member::{in_ball, member, Membership};
use super::{QObject, SetSpec};
use crate::error::{OscatError, Result};
use crate::normlab::{cb_norm, NormBracket, Picture};
use crate::osx::SpaceExpr;
use crate::supop::{classify, SuperOp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MorphismStatus {
    Valid,
    Invalid,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorphismCheck {
    pub status: MorphismStatus,
    pub reason: String,
    pub cb_norm: Option<NormBracket>,
    pub transport: Membership,
    /// Agreement with CPU (for `H → H`) or CPTP (for `S → S`) classification.
    pub cross_check: Option<bool>,
}

/// Block shape and picture of a sum of full matrix or trace-class spaces.
fn block_picture(space: &SpaceExpr, dualized: bool) -> Option<(Picture, Vec<usize>)> {
    use SpaceExpr::*;
    match space {
        BaseM(n, m) if n == m => Some((if dualized { Picture::Trace } else { Picture::Operator }, vec![*n])),
        Dual(x) => block_picture(x, !dualized),
        SumInf(x, y) | Sum1(x, y) => {
            let (p, mut s) = block_picture(x, dualized)?;
            let (q, t) = block_picture(y, dualized)?;
            let effective_inf = matches!(space, SumInf(..)) != dualized;
            if p != q || effective_inf != (p == Picture::Operator) {
                return None;
            }
            s.extend(t);
            Some((p, s))
        }
        _ => None,
    }
}

fn unknown(reason: &str, cb: Option<NormBracket>) -> MorphismCheck {
    MorphismCheck {
        status: MorphismStatus::Unknown,
        reason: reason.into(),
        cb_norm: cb,
        transport: Membership::Unknown,
        cross_check: None,
    }
}

/// Whether `f` is a complete contraction `a.space → b.space` carrying `a.set` into `b.set`.
pub fn check_morphism(f: &SuperOp, a: &QObject, b: &QObject, tol: f64) -> Result<MorphismCheck> {
    let (Some((pa, sa)), Some((pb, sb))) = (block_picture(&a.space, false), block_picture(&b.space, false)) else {
        return Ok(unknown(
            "spaces are not block sums of matrix or trace-class spaces",
            None,
        ));
    };
    if sa != f.dom() || sb != f.cod() {
        return Err(OscatError::ShapeMismatch(format!(
            "map {:?} -> {:?} against objects on {} and {}",
            f.dom(),
            f.cod(),
            a.space,
            b.space
        )));
    }
    if pa != pb {
        return Ok(unknown("source and target use different pictures", None));
    }
    let cb = cb_norm(f, pa)?;
    let cc = in_ball(&cb, tol);

    let m = f.coord_matrix();
    let transport = match (&a.set, &b.set) {
        (SetSpec::DensityOps { .. }, SetSpec::DensityOps { .. }) => {
            // complete contractions preserve densities exactly when they are counital
            if classify(f, tol)?.tp {
                Membership::Yes
            } else {
                Membership::No
            }
        }
        (s, _) => match s.generators() {
            Some(gens) => {
                let mut acc = Membership::Yes;
                for g in gens {
                    let img = m.mul_vec(&g);
                    acc = match (acc, member(&b.set, &b.space, &img, tol)?) {
                        (Membership::No, _) | (_, Membership::No) => Membership::No,
                        (Membership::Yes, Membership::Yes) => Membership::Yes,
                        _ => Membership::Unknown,
                    };
                }
                acc
            }
            None => Membership::Unknown,
        },
    };

    let (status, reason) = match (cc, transport) {
        (Some(false), _) => (
            MorphismStatus::Invalid,
            format!("not a complete contraction: cb-norm ≥ {:.6}", cb.lower),
        ),
        (_, Membership::No) => (
            MorphismStatus::Invalid,
            match &a.set {
                SetSpec::UnitSet { .. } => "unit not preserved".to_string(),
                SetSpec::DensityOps { .. } => "density operators not preserved".to_string(),
                _ => "image leaves the target set".to_string(),
            },
        ),
        (Some(true), Membership::Yes) => (MorphismStatus::Valid, "complete contraction preserving the set".into()),
        (None, _) => (
            MorphismStatus::Unknown,
            format!("cb-norm bracket [{:.6}, {:.6}] straddles 1", cb.lower, cb.upper),
        ),
        _ => (MorphismStatus::Unknown, "set transport undecided".into()),
    };

    let cross_check = match (&a.set, &b.set, status) {
        (_, _, MorphismStatus::Unknown) => None,
        (SetSpec::UnitSet { .. }, SetSpec::UnitSet { .. }, s) => {
            let fl = classify(f, tol)?;
            Some((s == MorphismStatus::Valid) == (fl.cp && fl.unital))
        }
        (SetSpec::DensityOps { .. }, SetSpec::DensityOps { .. }, s) => {
            let fl = classify(f, tol)?;
            Some((s == MorphismStatus::Valid) == (fl.cp && fl.tp))
        }
        _ => None,
    };

    Ok(MorphismCheck {
        status,
        reason,
        cb_norm: Some(cb),
        transport,
        cross_check,
    })
}
