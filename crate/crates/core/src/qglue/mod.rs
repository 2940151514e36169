//! The glued category of bipolar pairs `(X, S)`: sets with three-valued membership,
//! polars, the MALL connectives, the embeddings of (co)algebras, morphism checks and the
//! quantum switch.

mod member;
mod morphism;
mod switch;

pub use member::Membership;
pub use morphism::{check_morphism, MorphismCheck, MorphismStatus};
pub use switch::{
    qsw_apply, qsw_map, quantum_switch, ContractivityEvidence, SwitchCaps, SwitchReport, UnitaryEvidence,
    ViolationSearch, ViolationWitness,
};

use serde::{Deserialize, Serialize};

use crate::error::{OscatError, Result};
use crate::matcore::{BlockMatrix, CMatrix, C64};
use crate::osx::SpaceExpr;
use crate::vnstruct::{VnAlgebra, VnCoalgebra};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Closure {
    /// Known to equal its bipolar.
    Bipolar,
    NotClosed,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decidability {
    Decidable,
    /// Decided whenever the norms involved come back exact.
    Semi,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetSpec {
    /// `{1_A}` in `⊕ M_k`.
    UnitSet {
        shape: Vec<usize>,
    },
    /// Density operators of `⊕ T_k`: positive with unit trace.
    DensityOps {
        shape: Vec<usize>,
    },
    SingletonUnitary {
        u: BlockMatrix,
    },
    FiniteSet {
        elements: Vec<Vec<C64>>,
        closure: Closure,
    },
    PolarOf(Box<SetSpec>),
    /// `S × R`.
    ProductSet(Box<SetSpec>, Box<SetSpec>),
    /// `(S° + R°)°`.
    SumPolarSet(Box<SetSpec>, Box<SetSpec>),
    /// `(S ⊗ R)°°`.
    TensorBipolar(Box<SetSpec>, Box<SetSpec>),
    /// `(S° ⊗ R°)°`.
    ParPolar(Box<SetSpec>, Box<SetSpec>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QObject {
    pub space: SpaceExpr,
    pub set: SetSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Connective {
    Dual,
    With,
    Plus,
    Tensor,
    Par,
}

fn unitary_generator(s: &SetSpec) -> Option<Vec<C64>> {
    match s {
        SetSpec::UnitSet { shape } => Some(BlockMatrix::identity(shape).coords()),
        SetSpec::SingletonUnitary { u } => Some(u.coords()),
        _ => None,
    }
}

pub(crate) fn kron_coords(x: &[C64], y: &[C64]) -> Vec<C64> {
    CMatrix::column(x).kron(&CMatrix::column(y)).into_data()
}

impl SetSpec {
    pub fn empty() -> SetSpec {
        SetSpec::FiniteSet {
            elements: Vec::new(),
            closure: Closure::Unknown,
        }
    }

    pub fn singleton(u: BlockMatrix) -> SetSpec {
        SetSpec::SingletonUnitary { u }
    }

    /// Finite generators `G` with `S° = G°`, when known.
    pub(crate) fn generators(&self) -> Option<Vec<Vec<C64>>> {
        match self {
            SetSpec::UnitSet { .. } | SetSpec::SingletonUnitary { .. } => unitary_generator(self).map(|g| vec![g]),
            SetSpec::FiniteSet { elements, .. } => Some(elements.clone()),
            SetSpec::TensorBipolar(a, b) => {
                let (ga, gb) = (a.generators()?, b.generators()?);
                Some(
                    ga.iter()
                        .flat_map(|x| gb.iter().map(move |y| kron_coords(x, y)))
                        .collect(),
                )
            }
            _ => None,
        }
    }

    /// Sets that equal their bipolar: the embedded families and every connective of objects.
    pub(crate) fn known_bipolar(&self) -> bool {
        match self {
            SetSpec::FiniteSet { closure, .. } => *closure == Closure::Bipolar,
            _ => true,
        }
    }

    pub fn decidability(&self) -> Decidability {
        use Decidability::*;
        match self {
            SetSpec::UnitSet { .. } | SetSpec::DensityOps { .. } | SetSpec::SingletonUnitary { .. } => Decidable,
            SetSpec::FiniteSet { .. } => Decidable,
            SetSpec::PolarOf(inner) => match inner.as_ref() {
                SetSpec::DensityOps { .. } => Decidable,
                SetSpec::FiniteSet { elements, .. } if elements.is_empty() => Semi,
                SetSpec::PolarOf(x) if matches!(x.as_ref(), SetSpec::FiniteSet { elements, .. } if elements.is_empty()) => {
                    Unknown
                }
                SetSpec::PolarOf(x) if x.known_bipolar() => x.decidability(),
                SetSpec::PolarOf(_) => Unknown,
                other if other.generators().is_some() => Semi,
                SetSpec::ProductSet(a, b) | SetSpec::SumPolarSet(a, b) | SetSpec::ParPolar(a, b) => {
                    let pa = SetSpec::PolarOf(a.clone()).decidability();
                    let pb = SetSpec::PolarOf(b.clone()).decidability();
                    pa.max(pb).max(Semi)
                }
                _ => Unknown,
            },
            SetSpec::ProductSet(a, b) => a.decidability().max(b.decidability()),
            SetSpec::SumPolarSet(a, b) => a.decidability().max(b.decidability()).max(Semi),
            SetSpec::TensorBipolar(a, b) => match (a.as_ref(), b.as_ref()) {
                (SetSpec::DensityOps { .. }, SetSpec::DensityOps { .. }) => Decidable,
                _ if unitary_generator(a).is_some() && unitary_generator(b).is_some() => Decidable,
                _ if self.generators().is_some() => Semi,
                _ => Unknown,
            },
            SetSpec::ParPolar(a, b) if unitary_generator(a).is_some() && unitary_generator(b).is_some() => Decidable,
            SetSpec::ParPolar(..) => Unknown,
        }
    }
}

/// `S°`, with the simplifications `S°°° = S°` and `S°° = S` for known bipolar `S`.
pub fn polar(s: &SetSpec) -> SetSpec {
    match s {
        SetSpec::PolarOf(inner) => match inner.as_ref() {
            SetSpec::PolarOf(x) => SetSpec::PolarOf(x.clone()),
            x if x.known_bipolar() => x.clone(),
            _ => SetSpec::PolarOf(Box::new(s.clone())),
        },
        other => SetSpec::PolarOf(Box::new(other.clone())),
    }
}

impl QObject {
    pub fn new(space: SpaceExpr, set: SetSpec) -> Self {
        QObject { space, set }
    }

    /// `(C, {1})`, the tensor unit.
    pub fn unit() -> Self {
        QObject::new(SpaceExpr::m(1, 1), SetSpec::UnitSet { shape: vec![1] })
    }

    pub fn unitary(u: &BlockMatrix) -> Result<Self> {
        let shape = u.shape();
        let one = BlockMatrix::identity(&shape);
        if u.adjoint().mul(u)?.max_abs_diff(&one) > 1e-9 || u.mul(&u.adjoint())?.max_abs_diff(&one) > 1e-9 {
            return Err(OscatError::InvalidInput("singleton element is not unitary".into()));
        }
        Ok(QObject::new(
            crate::vnstruct::make_algebra(&shape).space,
            SetSpec::SingletonUnitary { u: u.clone() },
        ))
    }

    pub fn contains(&self, x: &[C64], tol: f64) -> Result<Membership> {
        member::member(&self.set, &self.space, x, tol)
    }

    pub fn decidability(&self) -> Decidability {
        self.set.decidability()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("objects serialize")
    }
}

/// `H(A) = (A, {1_A})`.
pub fn embed_h(a: &VnAlgebra) -> QObject {
    let set = match &a.shape {
        Some(shape) => SetSpec::UnitSet { shape: shape.clone() },
        None => SetSpec::FiniteSet {
            elements: vec![a.unit.clone()],
            closure: Closure::Bipolar,
        },
    };
    QObject::new(a.space.clone(), set)
}

/// `S(C) = (C, P_C)`.
pub fn embed_s(c: &VnCoalgebra) -> Result<QObject> {
    let shape = c
        .shape
        .clone()
        .ok_or_else(|| OscatError::Unsupported("density operators need a block-basis coalgebra".into()))?;
    Ok(QObject::new(c.space.clone(), SetSpec::DensityOps { shape }))
}

fn collapse_singletons(a: &SetSpec, b: &SetSpec) -> Option<SetSpec> {
    let (u, v) = (unitary_generator(a)?, unitary_generator(b)?);
    Some(SetSpec::FiniteSet {
        elements: vec![kron_coords(&u, &v)],
        closure: Closure::Bipolar,
    })
}

/// Binary connectives take `b`; `Dual` ignores it.
pub fn connective(kind: Connective, a: &QObject, b: Option<&QObject>) -> Result<QObject> {
    if kind == Connective::Dual {
        return Ok(QObject::new(SpaceExpr::dual(a.space.clone()), polar(&a.set)));
    }
    let b = b.ok_or_else(|| OscatError::InvalidInput(format!("{kind:?} needs two objects")))?;
    let (x, y) = (a.space.clone(), b.space.clone());
    let (s, r) = (&a.set, &b.set);
    let bx = |t: &SetSpec| Box::new(t.clone());
    Ok(match kind {
        Connective::Dual => unreachable!(),
        Connective::With => {
            let set = match (s, r) {
                (SetSpec::UnitSet { shape: p }, SetSpec::UnitSet { shape: q }) => SetSpec::UnitSet {
                    shape: p.iter().chain(q).copied().collect(),
                },
                _ => SetSpec::ProductSet(bx(s), bx(r)),
            };
            QObject::new(SpaceExpr::sum_inf(x, y), set)
        }
        Connective::Plus => {
            let set = match (s, r) {
                (SetSpec::DensityOps { shape: p }, SetSpec::DensityOps { shape: q }) => SetSpec::DensityOps {
                    shape: p.iter().chain(q).copied().collect(),
                },
                _ => SetSpec::SumPolarSet(bx(s), bx(r)),
            };
            QObject::new(SpaceExpr::sum1(x, y), set)
        }
        Connective::Tensor => {
            let set = collapse_singletons(s, r).unwrap_or_else(|| SetSpec::TensorBipolar(bx(s), bx(r)));
            QObject::new(SpaceExpr::tens_proj(x, y), set)
        }
        Connective::Par => {
            let set = collapse_singletons(s, r).unwrap_or_else(|| SetSpec::ParPolar(bx(s), bx(r)));
            QObject::new(SpaceExpr::tens_min(x, y), set)
        }
    })
}

#[cfg(test)]
mod tests;
