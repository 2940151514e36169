//! Syntax tree of a session. Positions are not stored, so a printed session reparses
//! to an equal tree.

use oscat_core::osx::SpaceExpr;
use oscat_core::{CMatrix, C64};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Session {
    pub statements: Vec<Statement>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Statement {
    Space {
        name: String,
        expr: SpaceExpr,
    },
    Alg {
        name: String,
        expr: StructExpr,
    },
    Coalg {
        name: String,
        expr: StructExpr,
    },
    Map {
        name: String,
        expr: MapExpr,
    },
    Obj {
        name: String,
        expr: ObjExpr,
    },
    Check {
        mode: CheckMode,
        map: MapExpr,
        typing: Option<(String, String)>,
    },
    Norm(NormCommand),
    Demo(Demo),
    AssertLaws {
        target: StructExpr,
    },
}

impl Statement {
    pub fn is_definition(&self) -> bool {
        matches!(
            self,
            Statement::Space { .. }
                | Statement::Alg { .. }
                | Statement::Coalg { .. }
                | Statement::Map { .. }
                | Statement::Obj { .. }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructField {
    Mult,
    Comult,
    Unit,
    Counit,
    Invol,
}

impl StructField {
    pub const ALL: [(&'static str, StructField); 5] = [
        ("mult", StructField::Mult),
        ("comult", StructField::Comult),
        ("unit", StructField::Unit),
        ("counit", StructField::Counit),
        ("invol", StructField::Invol),
    ];

    pub fn keyword(self) -> &'static str {
        Self::ALL
            .iter()
            .find(|(_, f)| *f == self)
            .map(|(k, _)| *k)
            .unwrap_or("mult")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StructExpr {
    Name(String),
    Shape(Vec<usize>),
    Tensor(Box<StructExpr>, Box<StructExpr>),
    Sum(Box<StructExpr>, Box<StructExpr>),
    Dual(Box<StructExpr>),
    /// Adds `value` to entry `(row, col)` of one structure map; vectors use `col = 0`.
    Perturb {
        base: Box<StructExpr>,
        field: StructField,
        row: usize,
        col: usize,
        value: C64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum MapExpr {
    Name(String),
    Identity(Vec<usize>),
    Transpose(Vec<usize>),
    Negate(Vec<usize>),
    Trace(Vec<usize>),
    Depolarizing(usize),
    /// `x ↦ u x u*`.
    Unitary(CMatrix),
    Kraus(Vec<CMatrix>),
    Choi {
        n: usize,
        m: usize,
        choi: CMatrix,
    },
    /// `x ↦ tr(f x)` on a single block.
    Functional(CMatrix),
    /// `z ↦ z a`.
    Point(CMatrix),
    Qsw(usize),
    RandomCptp {
        n: usize,
        rank: usize,
        seed: u64,
    },
    Adjoint(Box<MapExpr>),
    Compose(Box<MapExpr>, Box<MapExpr>),
    Tensor(Box<MapExpr>, Box<MapExpr>),
    Sum(Box<MapExpr>, Box<MapExpr>),
    Add(Box<MapExpr>, Box<MapExpr>),
    Scale(Box<MapExpr>, C64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ObjExpr {
    Name(String),
    Unit,
    H(StructExpr),
    S(StructExpr),
    Unitary(CMatrix),
    Dual(Box<ObjExpr>),
    With(Box<ObjExpr>, Box<ObjExpr>),
    Plus(Box<ObjExpr>, Box<ObjExpr>),
    Tensor(Box<ObjExpr>, Box<ObjExpr>),
    Par(Box<ObjExpr>, Box<ObjExpr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckMode {
    Cp,
    Tp,
    Unital,
    Cpu,
    Cptp,
    AlgHom,
    CoalgHom,
    Morphism,
}

impl CheckMode {
    pub const ALL: [(&'static str, CheckMode); 8] = [
        ("cp", CheckMode::Cp),
        ("tp", CheckMode::Tp),
        ("unital", CheckMode::Unital),
        ("cpu", CheckMode::Cpu),
        ("cptp", CheckMode::Cptp),
        ("alghom", CheckMode::AlgHom),
        ("coalghom", CheckMode::CoalgHom),
        ("morphism", CheckMode::Morphism),
    ];

    pub fn keyword(self) -> &'static str {
        Self::ALL
            .iter()
            .find(|(_, m)| *m == self)
            .map(|(k, _)| *k)
            .unwrap_or("cp")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TensorNorm {
    Haagerup,
    Proj,
    Inj,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NormCommand {
    /// Operator norm of a matrix, or the matrix norm of a level element of a named space.
    Op {
        x: CMatrix,
        space: Option<String>,
    },
    Tr(CMatrix),
    Diamond(MapExpr),
    Cb(MapExpr),
    /// `x ∈ M_k(M_n ⊗ M_m)` as a level matrix.
    Tensor {
        kind: TensorNorm,
        x: CMatrix,
        n: usize,
        m: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Demo {
    QSwitch(usize),
}
