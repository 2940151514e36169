use serde::{Deserialize, Serialize};

use super::{apply_antilinear, basis_vec, nonzero, Structure, StructureKind, StructureSpec, VnAlgebra, VnCoalgebra};
use crate::error::{OscatError, Result};
use crate::matcore::{C64, ZERO};
use crate::normlab::{cb_norm, NormBracket, Picture};
use crate::supop::{classify, ChannelFlags, SuperOp};

/// Slack for the complete-contraction cross-check.
const CC_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MorphismMode {
    Cpu,
    Cptp,
    AlgHom,
    CoalgHom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub mode: MorphismMode,
    pub holds: bool,
    pub checks: Vec<Check>,
    pub flags: Option<ChannelFlags>,
    pub cb_norm: Option<NormBracket>,
    /// Whether the cb-norm agrees with the verdict: for unital (counital) maps,
    /// complete positivity must coincide with complete contractivity.
    pub cross_check: Option<bool>,
}

/// Wire form of a morphism claim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorphismClaim {
    pub choi: serde_json::Value,
    pub src: StructureSpec,
    pub dst: StructureSpec,
    pub mode: MorphismMode,
}

impl MorphismClaim {
    pub fn certify(&self, tol: f64) -> Result<Verdict> {
        let f = SuperOp::from_json(&self.choi)?;
        certify_morphism(
            &f,
            &Structure::from_spec(&self.src),
            &Structure::from_spec(&self.dst),
            self.mode,
            tol,
        )
    }
}

fn check(name: &str, defect: f64, tol: f64) -> Check {
    Check {
        name: name.into(),
        passed: defect <= tol,
        defect,
    }
}

fn diff(x: &[C64], y: &[C64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
}

pub fn certify_morphism(
    f: &SuperOp,
    src: &Structure,
    dst: &Structure,
    mode: MorphismMode,
    tol: f64,
) -> Result<Verdict> {
    if src.shape() != Some(f.dom()) || dst.shape() != Some(f.cod()) {
        return Err(OscatError::ShapeMismatch(format!(
            "map {:?} -> {:?} against structures {:?} -> {:?}",
            f.dom(),
            f.cod(),
            src.shape(),
            dst.shape()
        )));
    }
    let want = match mode {
        MorphismMode::Cpu | MorphismMode::AlgHom => StructureKind::Algebra,
        MorphismMode::Cptp | MorphismMode::CoalgHom => StructureKind::Coalgebra,
    };
    if src.kind() != want || dst.kind() != want {
        return Err(OscatError::InvalidInput(format!("{mode:?} needs {want:?} endpoints")));
    }
    match (src, dst) {
        (Structure::Algebra(a), Structure::Algebra(b)) if mode == MorphismMode::AlgHom => alg_hom(f, a, b, tol),
        (Structure::Coalgebra(a), Structure::Coalgebra(b)) if mode == MorphismMode::CoalgHom => coalg_hom(f, a, b, tol),
        _ => channel(f, mode, tol),
    }
}

fn channel(f: &SuperOp, mode: MorphismMode, tol: f64) -> Result<Verdict> {
    let flags = classify(f, tol)?;
    let (norm_flag, norm_defect, picture, label) = match mode {
        MorphismMode::Cpu => (flags.unital, flags.unit_defect, Picture::Operator, "unital"),
        _ => (flags.tp, flags.trace_defect, Picture::Trace, "trace_preserving"),
    };
    let checks = vec![
        Check {
            name: "completely_positive".into(),
            passed: flags.cp,
            defect: (-flags.min_choi_eig).max(0.0).max(flags.herm_defect),
        },
        Check {
            name: label.into(),
            passed: norm_flag,
            defect: norm_defect,
        },
    ];
    let holds = flags.cp && norm_flag;
    let cb = cb_norm(f, picture)?;
    let cross_check = if !norm_flag {
        None
    } else if cb.upper <= 1.0 + CC_TOL {
        Some(holds)
    } else if cb.lower > 1.0 + CC_TOL {
        Some(!holds)
    } else {
        None
    };
    Ok(Verdict {
        mode,
        holds,
        checks,
        flags: Some(flags),
        cb_norm: Some(cb),
        cross_check,
    })
}

fn alg_hom(f: &SuperOp, a: &VnAlgebra, b: &VnAlgebra, tol: f64) -> Result<Verdict> {
    let m = f.coord_matrix();
    let d = a.dim();
    let mut mult: f64 = 0.0;
    for s in 0..d {
        let fs = m.col(s);
        for t in 0..d {
            let lhs = m.mul_vec(&a.product(&basis_vec(d, s), &basis_vec(d, t)));
            let rhs = b.product(&fs, &m.col(t));
            mult = mult.max(diff(&lhs, &rhs));
        }
    }
    let unital = diff(&m.mul_vec(&a.unit), &b.unit);
    let invol = (0..d)
        .map(|t| diff(&m.mul_vec(&a.star(&basis_vec(d, t))), &b.star(&m.col(t))))
        .fold(0.0, f64::max);
    Ok(structural(
        MorphismMode::AlgHom,
        vec![
            check("multiplicative", mult, tol),
            check("unital", unital, tol),
            check("involutive", invol, tol),
        ],
    ))
}

fn coalg_hom(f: &SuperOp, a: &VnCoalgebra, b: &VnCoalgebra, tol: f64) -> Result<Verdict> {
    let m = f.coord_matrix();
    let (d, e) = (a.dim(), b.dim());
    let mut comult: f64 = 0.0;
    let mut counit: f64 = 0.0;
    let mut invol: f64 = 0.0;
    for t in 0..d {
        let ft = m.col(t);
        let lhs = b.coproduct(&ft);
        let mut rhs = vec![ZERO; e * e];
        for (r, z) in nonzero(&a.coproduct(&basis_vec(d, t))) {
            let (fs, fu) = (m.col(r / d), m.col(r % d));
            for (i, x) in nonzero(&fs) {
                for (j, y) in nonzero(&fu) {
                    rhs[i * e + j] += z * x * y;
                }
            }
        }
        comult = comult.max(diff(&lhs, &rhs));
        let eps: C64 = ft.iter().zip(&b.counit).map(|(x, y)| x * y).sum();
        counit = counit.max((eps - a.counit[t]).norm());
        invol = invol.max(diff(
            &m.mul_vec(&apply_antilinear(&a.invol, &basis_vec(d, t))),
            &b.star(&ft),
        ));
    }
    Ok(structural(
        MorphismMode::CoalgHom,
        vec![
            check("comultiplicative", comult, tol),
            check("counital", counit, tol),
            check("involutive", invol, tol),
        ],
    ))
}

fn structural(mode: MorphismMode, checks: Vec<Check>) -> Verdict {
    Verdict {
        mode,
        holds: checks.iter().all(|c| c.passed),
        checks,
        flags: None,
        cb_norm: None,
        cross_check: None,
    }
}
