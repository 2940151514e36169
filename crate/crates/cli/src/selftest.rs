//! Compact in-binary version of the acceptance suite: every criterion at reduced sample
//! counts, against closed-form values. The full suite with independent oracles is the
//! `acceptance` test target.

use oscat_core::matcore::{c, op_norm, tr_norm};
use oscat_core::normlab::{
    cb_norm, diamond_norm, haagerup_bracket, inj_norm, proj_bracket, NormConfig, Picture, TensorShape,
};
use oscat_core::qglue::{embed_s, quantum_switch, Membership, SwitchCaps};
use oscat_core::random::{below, random_density, random_hermitian, random_matrix, split};
use oscat_core::supop::{adjoint_map, classify, functional, point_map, random_cptp, trace_map, transpose_map};
use oscat_core::vnstruct::{check_laws, make_algebra, make_coalgebra, Structure};
use oscat_core::{BlockMatrix, Result};

use crate::report::{emit_report, Format};
use crate::{parse_session, run_session, RunConfig};

pub const TUTORIAL: &str = include_str!("../sessions/tutorial.oscat");

#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn trace_norms() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for n in 1..=4 {
        let tr = trace_map(&[n]);
        let op = cb_norm(&tr, Picture::Operator)?;
        let t = cb_norm(&tr, Picture::Trace)?;
        worst = worst.max((op.upper - n as f64).abs()).max((op.lower - n as f64).abs());
        worst = worst.max((t.upper - 1.0).abs()).max((t.lower - 1.0).abs());
    }
    Ok((worst <= 1e-6, format!("max deviation {worst:.2e}")))
}

fn cb_equals_op(seed: u64) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let mut r = split(seed, i);
        let n = 2 + (i as usize % 2);
        let f = random_matrix(&mut r, n, n);
        let b = cb_norm(&functional(&BlockMatrix::single(f.clone())?), Picture::Operator)?;
        let expect = tr_norm(&f)?;
        worst = worst.max((b.upper - expect).abs()).max((b.lower - expect).abs());
        let a = random_matrix(&mut r, n, n);
        let b = cb_norm(&point_map(&BlockMatrix::single(a.clone())?), Picture::Operator)?;
        let expect = op_norm(&a)?;
        worst = worst.max((b.upper - expect).abs()).max((b.lower - expect).abs());
    }
    Ok((worst <= 1e-6, format!("max |cb − op| {worst:.2e} over 40 maps")))
}

fn channels(seed: u64) -> Result<(bool, String)> {
    let fl = classify(&transpose_map(&[2]), 1e-9)?;
    let t_ok = !fl.cp && within(fl.min_choi_eig, -1.0, 1e-9);
    let d = diamond_norm(&transpose_map(&[2]))?;
    let d_ok = within(d.lower, 2.0, 1e-4) && within(d.upper, 2.0, 1e-4);
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        let mut r = split(seed, i);
        let n = 2 + below(&mut r, 2);
        let rank = 1 + below(&mut r, n * n);
        let b = diamond_norm(&random_cptp(&mut r, n, n, rank))?;
        worst = worst.max((b.upper - 1.0).abs()).max((b.lower - 1.0).abs());
    }
    Ok((
        t_ok && d_ok && worst <= 1e-6,
        format!(
            "min Choi eig {:.3}, ‖T‖◇ ∈ [{:.6}, {:.6}], channel deviation {worst:.2e}",
            fl.min_choi_eig, d.lower, d.upper
        ),
    ))
}

fn laws() -> Result<(bool, String)> {
    let mut ok = true;
    for shape in [vec![1], vec![2], vec![2, 1]] {
        for s in [
            Structure::Algebra(make_algebra(&shape)),
            Structure::Coalgebra(make_coalgebra(&shape)),
        ] {
            ok &= check_laws(&s, 20, 1e-9).all_passed();
        }
    }
    let mut bad = make_coalgebra(&[2]);
    bad.comult[(0, 0)] += c(1.0, 0.0);
    let caught = !check_laws(&Structure::Coalgebra(bad), 20, 1e-9).all_passed();
    Ok((
        ok && caught,
        format!("standard shapes pass: {ok}, mutation caught: {caught}"),
    ))
}

fn duality(seed: u64) -> Result<(bool, String)> {
    let mut ok = true;
    for shape in [vec![2], vec![2, 1]] {
        let a = make_algebra(&shape);
        ok &= a.dualize().dualize() == a;
    }
    for i in 0..20 {
        let mut r = split(seed, i);
        let f = random_cptp(&mut r, 2, 2, 2).scale(c(if i % 2 == 0 { 1.0 } else { 0.7 }, 0.0));
        ok &= classify(&f, 1e-9)?.tp == classify(&adjoint_map(&f), 1e-9)?.unital;
    }
    Ok((ok, "double dual and tp ⇔ unital(adjoint) on 20 maps".into()))
}

fn positivity(seed: u64) -> Result<(bool, String)> {
    let co = make_coalgebra(&[2, 1]);
    let mut disagreements = 0;
    for i in 0..40 {
        let mut r = split(seed, i);
        let blocks = [2, 1]
            .iter()
            .map(|&k| {
                if i % 2 == 0 {
                    random_density(&mut r, k)
                } else {
                    random_hermitian(&mut r, k)
                }
            })
            .collect();
        let f = BlockMatrix::new(blocks)?;
        disagreements += (co.abstract_positive(&f)? != f.psd_check(1e-8)?.is_psd()) as usize;
    }
    Ok((
        disagreements == 0,
        format!("{disagreements} disagreements on 40 functionals"),
    ))
}

fn bipolar(seed: u64) -> Result<(bool, String)> {
    let p = embed_s(&make_coalgebra(&[3]))?;
    let mut disagreements = 0;
    for i in 0..100 {
        let mut r = split(seed, i);
        let h = if i % 2 == 0 {
            random_density(&mut r, 3)
        } else {
            random_hermitian(&mut r, 3)
        };
        let rho = h.scale_re(1.0 / h.trace().re);
        let positive = p.contains(&rho.vec(), 1e-9)? == Membership::Yes;
        let normed = within(tr_norm(&rho)?, 1.0, 1e-9);
        disagreements += (positive != normed) as usize;
    }
    Ok((
        disagreements == 0,
        format!("{disagreements} disagreements on 100 Hermitian samples"),
    ))
}

fn ordering(seed: u64) -> Result<(bool, String)> {
    let shape = TensorShape::square(2, 2);
    let cfg = NormConfig::default();
    let mut crossings = 0;
    for i in 0..10 {
        let mut r = split(seed, i);
        let v = random_matrix(&mut r, 4, 4);
        let (inj, h, p) = (
            inj_norm(&v, shape)?,
            haagerup_bracket(&v, shape, &cfg)?,
            proj_bracket(&v, shape, &cfg)?,
        );
        crossings += (inj.lower > h.upper + 1e-6) as usize + (h.lower > p.upper + 1e-6) as usize;
    }
    Ok((crossings == 0, format!("{crossings} crossings on 10 level-1 samples")))
}

fn switch() -> Result<(bool, String)> {
    let caps = SwitchCaps {
        contractivity_samples: 40,
        ..SwitchCaps::default()
    };
    let (_, rep) = quantum_switch(2, &caps, &NormConfig::default())?;
    let verdicts: Vec<String> = rep
        .records()
        .iter()
        .map(|r| r["verdict"].as_str().unwrap_or("?").to_string())
        .collect();
    Ok((
        !verdicts.iter().any(|v| v == "fail"),
        format!("verdicts {}", verdicts.join(", ")),
    ))
}

fn cli() -> (bool, String) {
    let Ok(session) = parse_session(TUTORIAL) else {
        return (false, "tutorial does not parse".into());
    };
    let cfg = RunConfig::default();
    let a = emit_report(&run_session(&session, &cfg), Format::Json);
    let b = emit_report(&run_session(&session, &cfg), Format::Json);
    let reparsed = parse_session(&session.to_string()).ok() == Some(session);
    (
        a == b && reparsed,
        format!("deterministic: {}, round trip: {reparsed}", a == b),
    )
}

pub fn run_selftest(seed: u64) -> Vec<CheckLine> {
    let line = |id, name, r: Result<(bool, String)>| match r {
        Ok((passed, detail)) => CheckLine {
            id,
            name,
            passed,
            detail,
        },
        Err(e) => CheckLine {
            id,
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    };
    vec![
        line(1, "trace functional norms", trace_norms()),
        line(2, "cb-norm equals norm for functionals and points", cb_equals_op(seed)),
        line(3, "channel calculus", channels(seed)),
        line(4, "von Neumann law suites", laws()),
        line(5, "duality", duality(seed)),
        line(6, "abstract and concrete positivity", positivity(seed)),
        line(7, "density operators two ways", bipolar(seed)),
        line(8, "tensor norm ordering", ordering(seed)),
        line(9, "quantum switch", switch()),
        line(10, "session determinism", Ok(cli())),
    ]
}

pub fn selftest_exit_code(lines: &[CheckLine]) -> i32 {
    if lines.iter().all(|l| l.passed) {
        0
    } else {
        1
    }
}
