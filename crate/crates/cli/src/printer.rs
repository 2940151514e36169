//! Canonical text form of sessions; `parse(print(s)) == s`.

use std::fmt::{self, Display, Formatter};

use oscat_core::matcore::{format_complex, format_matrix};

use crate::ast::*;

fn shape(f: &mut Formatter<'_>, s: &[usize]) -> fmt::Result {
    let parts: Vec<String> = s.iter().map(|k| k.to_string()).collect();
    write!(f, "[{}]", parts.join(", "))
}

impl Display for Session {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        for st in &self.statements {
            writeln!(f, "{st}")?;
        }
        Ok(())
    }
}

impl Display for Statement {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Space { name, expr } => write!(f, "space {name} = {expr};"),
            Statement::Alg { name, expr } => write!(f, "alg {name} = {expr};"),
            Statement::Coalg { name, expr } => write!(f, "coalg {name} = {expr};"),
            Statement::Map { name, expr } => write!(f, "map {name} = {expr};"),
            Statement::Obj { name, expr } => write!(f, "obj {name} = {expr};"),
            Statement::Check { mode, map, typing } => {
                write!(f, "check {} {map}", mode.keyword())?;
                if let Some((a, b)) = typing {
                    write!(f, " : {a} -> {b}")?;
                }
                write!(f, ";")
            }
            Statement::Norm(n) => write!(f, "norm {n};"),
            Statement::Demo(Demo::QSwitch(n)) => write!(f, "demo qswitch {n};"),
            Statement::AssertLaws { target } => write!(f, "assert laws {target};"),
        }
    }
}

impl Display for StructExpr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            StructExpr::Name(n) => write!(f, "{n}"),
            StructExpr::Shape(s) => shape(f, s),
            StructExpr::Tensor(a, b) => write!(f, "tensor({a}, {b})"),
            StructExpr::Sum(a, b) => write!(f, "sum({a}, {b})"),
            StructExpr::Dual(a) => write!(f, "dual({a})"),
            StructExpr::Perturb {
                base,
                field,
                row,
                col,
                value,
            } => write!(
                f,
                "perturb({base}, {}, {row}, {col}, {})",
                field.keyword(),
                format_complex(*value)
            ),
        }
    }
}

impl Display for MapExpr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        let shaped = |f: &mut Formatter<'_>, name: &str, s: &[usize]| {
            write!(f, "{name}(")?;
            shape(f, s)?;
            write!(f, ")")
        };
        match self {
            MapExpr::Name(n) => write!(f, "{n}"),
            MapExpr::Identity(s) => shaped(f, "identity", s),
            MapExpr::Transpose(s) => shaped(f, "transpose", s),
            MapExpr::Negate(s) => shaped(f, "negate", s),
            MapExpr::Trace(s) => shaped(f, "trace", s),
            MapExpr::Depolarizing(n) => write!(f, "depolarizing({n})"),
            MapExpr::Unitary(u) => write!(f, "unitary({})", format_matrix(u)),
            MapExpr::Kraus(ks) => {
                let parts: Vec<String> = ks.iter().map(format_matrix).collect();
                write!(f, "kraus({})", parts.join(", "))
            }
            MapExpr::Choi { n, m, choi } => write!(f, "choi({n}, {m}, {})", format_matrix(choi)),
            MapExpr::Functional(a) => write!(f, "functional({})", format_matrix(a)),
            MapExpr::Point(a) => write!(f, "point({})", format_matrix(a)),
            MapExpr::Qsw(n) => write!(f, "qsw({n})"),
            MapExpr::RandomCptp { n, rank, seed } => write!(f, "random_cptp({n}, {rank}, {seed})"),
            MapExpr::Adjoint(a) => write!(f, "adjoint({a})"),
            MapExpr::Compose(a, b) => write!(f, "compose({a}, {b})"),
            MapExpr::Tensor(a, b) => write!(f, "tensor({a}, {b})"),
            MapExpr::Sum(a, b) => write!(f, "sum({a}, {b})"),
            MapExpr::Add(a, b) => write!(f, "add({a}, {b})"),
            MapExpr::Scale(a, z) => write!(f, "scale({a}, {})", format_complex(*z)),
        }
    }
}

impl Display for ObjExpr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            ObjExpr::Name(n) => write!(f, "{n}"),
            ObjExpr::Unit => write!(f, "unit"),
            ObjExpr::H(s) => write!(f, "H({s})"),
            ObjExpr::S(s) => write!(f, "S({s})"),
            ObjExpr::Unitary(u) => write!(f, "unitary({})", format_matrix(u)),
            ObjExpr::Dual(a) => write!(f, "dual({a})"),
            ObjExpr::With(a, b) => write!(f, "with({a}, {b})"),
            ObjExpr::Plus(a, b) => write!(f, "plus({a}, {b})"),
            ObjExpr::Tensor(a, b) => write!(f, "tensor({a}, {b})"),
            ObjExpr::Par(a, b) => write!(f, "par({a}, {b})"),
        }
    }
}

impl Display for NormCommand {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            NormCommand::Op { x, space } => {
                write!(f, "op {}", format_matrix(x))?;
                if let Some(s) = space {
                    write!(f, " in {s}")?;
                }
                Ok(())
            }
            NormCommand::Tr(x) => write!(f, "tr {}", format_matrix(x)),
            NormCommand::Diamond(m) => write!(f, "diamond {m}"),
            NormCommand::Cb(m) => write!(f, "cb {m}"),
            NormCommand::Tensor { kind, x, n, m } => {
                let k = match kind {
                    TensorNorm::Haagerup => "haagerup",
                    TensorNorm::Proj => "proj",
                    TensorNorm::Inj => "inj",
                };
                write!(f, "{k} {} over {n}, {m}", format_matrix(x))
            }
        }
    }
}
