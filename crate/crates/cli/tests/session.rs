use std::process::Command;

use oscat_cli::ast::*;
use oscat_cli::{emit_report, parse_session, run_session, Format, RunConfig, Status};
use oscat_core::matcore::c;
use oscat_core::CMatrix;
use proptest::prelude::*;

fn run(text: &str) -> oscat_cli::Report {
    run_session(&parse_session(text).unwrap(), &RunConfig::default())
}

#[test]
fn qswitch_demo_has_three_evidence_records() {
    let r = run("demo qswitch 2;");
    assert_eq!(r.records.len(), 1);
    let rec = &r.records[0];
    assert_eq!(rec.status, Status::Pass);
    let evidence = rec.detail.as_ref().unwrap()["records"].as_array().unwrap();
    assert_eq!(evidence.len(), 3);
    for e in evidence {
        assert!(e.get("claim").is_some() && e.get("verdict").is_some() && e.get("evidence").is_some());
    }
    assert_eq!(rec.witness_ref.as_deref(), Some("qswitch-2/level-1"));
}

#[test]
fn diamond_norm_of_identity() {
    let r = run("norm diamond identity([3]);");
    let v = r.records[0].value.unwrap();
    assert!((v - 1.0).abs() <= 1e-6, "{v}");
}

#[test]
fn corrupted_coalgebra_names_coassociativity() {
    let r = run("coalg C = [2];\nassert laws perturb(C, comult, 5, 2, 0.25);");
    assert_eq!(r.records.len(), 1);
    assert_eq!(r.records[0].status, Status::Fail);
    assert!(r.records[0].message.as_ref().unwrap().contains("coassociativity"));
}

#[test]
fn failures_do_not_abort_later_commands() {
    let r = run("norm diamond g;\nmap f = identity([2]);\nmap f = negate([2]);\ncheck cptp f;\ncheck cptp compose(f, identity([3]));");
    let statuses: Vec<Status> = r.records.iter().map(|x| x.status).collect();
    assert_eq!(statuses, vec![Status::Fail, Status::Fail, Status::Pass, Status::Fail]);
    assert!(r.records[0].message.as_ref().unwrap().contains("undefined name 'g'"));
    assert!(r.records[1].message.as_ref().unwrap().contains("already defined"));
    assert!(r.records[3].message.as_ref().unwrap().contains("shape mismatch"));
}

#[test]
fn exit_code_contract() {
    assert_eq!(run("").exit_code(), 0);
    assert!(run("").records.is_empty());
    assert_eq!(run("check cp transpose([2]);\nnorm tr [[1]];").exit_code(), 1);
    let unknown = "space Z = (M(2) (*h) M(2)) (*proj) M(1);\n\
                   norm op [[1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1]] in Z;\nnorm tr [[1]];";
    assert_eq!(run(unknown).exit_code(), 2);
}

#[test]
fn size_caps_are_per_command_failures() {
    let r = run("norm diamond identity([100]);\ndemo qswitch 50;\nnorm tr [[2]];");
    assert_eq!(r.records[0].status, Status::Fail);
    assert!(r.records[0].message.as_ref().unwrap().contains("size limit"));
    assert_eq!(r.records[1].status, Status::Fail);
    assert_eq!(r.records[2].status, Status::Pass);
}

#[test]
fn config_precedence() {
    let env = |k: &str| match k {
        "OSCAT_SEED" => Some("11".to_string()),
        "OSCAT_TOL" => Some("1e-7".to_string()),
        _ => None,
    };
    let from_env = RunConfig::resolve(None, None, env).unwrap();
    assert_eq!((from_env.seed, from_env.tol), (11, 1e-7));
    let flags = RunConfig::resolve(Some(3), Some(1e-5), env).unwrap();
    assert_eq!((flags.seed, flags.tol), (3, 1e-5));
    let defaults = RunConfig::resolve(None, None, |_| None).unwrap();
    assert_eq!(defaults, RunConfig::default());
    assert!(RunConfig::resolve(None, None, |_| Some("x".into())).is_err());
    assert!(RunConfig::resolve(None, Some(-1.0), |_| None).is_err());
}

#[test]
fn tutorial_reproduces_its_golden_report() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/sessions/tutorial.oscat")).unwrap();
    let golden = std::fs::read(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/tutorial.json")).unwrap();
    let got = emit_report(&run(&text), Format::Json);
    assert!(got == golden, "tutorial report drifted from tests/golden/tutorial.json");
}

#[test]
fn binary_reports_parse_errors_with_exit_3() {
    let dir = std::env::temp_dir().join(format!("oscat-session-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.oscat");
    std::fs::write(&bad, "space A = M(2,;\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_oscat"))
        .arg("run")
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1, col 15"));

    let good = dir.join("good.oscat");
    std::fs::write(&good, "norm tr [[1, 0], [0, -1]];\n").unwrap();
    let json = dir.join("out.json");
    let out = Command::new(env!("CARGO_BIN_EXE_oscat"))
        .args([
            "run",
            good.to_str().unwrap(),
            "--seed",
            "4",
            "--json",
            json.to_str().unwrap(),
        ])
        .env("OSCAT_SEED", "99")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(&json).unwrap()).unwrap();
    assert_eq!(report["seed"], 4);
    assert_eq!(report["records"][0]["value"], 2.0);
    std::fs::remove_dir_all(&dir).ok();
}

fn name() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9_]{0,5}x".prop_map(|s| s)
}

fn shape() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..4, 1..3)
}

fn complex() -> impl Strategy<Value = oscat_core::C64> {
    (-1e3f64..1e3, -1e3f64..1e3, 0..3u8).prop_map(|(re, im, k)| match k {
        0 => c(re, 0.0),
        1 => c(0.0, im),
        _ => c(re, im),
    })
}

fn matrix() -> impl Strategy<Value = CMatrix> {
    (1usize..3, 1usize..3)
        .prop_flat_map(|(r, k)| (Just(r), Just(k), prop::collection::vec(complex(), r * k)))
        .prop_map(|(r, k, v)| CMatrix::from_vec(r, k, v).unwrap())
}

fn structure() -> impl Strategy<Value = StructExpr> {
    let leaf = prop_oneof![name().prop_map(StructExpr::Name), shape().prop_map(StructExpr::Shape)];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| StructExpr::Tensor(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| StructExpr::Sum(Box::new(a), Box::new(b))),
            inner.clone().prop_map(|a| StructExpr::Dual(Box::new(a))),
            (inner, 0..5usize, 0..5usize, complex(), 0..5usize).prop_map(|(a, row, col, value, f)| {
                StructExpr::Perturb {
                    base: Box::new(a),
                    field: StructField::ALL[f].1,
                    row,
                    col,
                    value,
                }
            }),
        ]
    })
}

fn map() -> impl Strategy<Value = MapExpr> {
    let leaf = prop_oneof![
        name().prop_map(MapExpr::Name),
        shape().prop_map(MapExpr::Identity),
        shape().prop_map(MapExpr::Transpose),
        shape().prop_map(MapExpr::Trace),
        (1usize..4).prop_map(MapExpr::Depolarizing),
        matrix().prop_map(MapExpr::Unitary),
        prop::collection::vec(matrix(), 1..3).prop_map(MapExpr::Kraus),
        (1usize..3, 1usize..3, matrix()).prop_map(|(n, m, choi)| MapExpr::Choi { n, m, choi }),
        (1usize..3).prop_map(MapExpr::Qsw),
        (1usize..3, 1usize..3, any::<u64>()).prop_map(|(n, rank, seed)| MapExpr::RandomCptp { n, rank, seed }),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| MapExpr::Adjoint(Box::new(a))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| MapExpr::Compose(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| MapExpr::Tensor(Box::new(a), Box::new(b))),
            (inner.clone(), complex()).prop_map(|(a, z)| MapExpr::Scale(Box::new(a), z)),
        ]
    })
}

fn obj() -> impl Strategy<Value = ObjExpr> {
    let leaf = prop_oneof![
        name().prop_map(ObjExpr::Name),
        Just(ObjExpr::Unit),
        structure().prop_map(ObjExpr::H),
        structure().prop_map(ObjExpr::S),
        matrix().prop_map(ObjExpr::Unitary),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| ObjExpr::Dual(Box::new(a))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| ObjExpr::With(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| ObjExpr::Par(Box::new(a), Box::new(b))),
            (inner.clone(), inner).prop_map(|(a, b)| ObjExpr::Tensor(Box::new(a), Box::new(b))),
        ]
    })
}

fn statement() -> impl Strategy<Value = Statement> {
    prop_oneof![
        (name(), structure()).prop_map(|(name, expr)| Statement::Alg { name, expr }),
        (name(), structure()).prop_map(|(name, expr)| Statement::Coalg { name, expr }),
        (name(), map()).prop_map(|(name, expr)| Statement::Map { name, expr }),
        (name(), obj()).prop_map(|(name, expr)| Statement::Obj { name, expr }),
        (0..8usize, map(), prop::option::of((name(), name()))).prop_map(|(m, map, typing)| Statement::Check {
            mode: CheckMode::ALL[m].1,
            map,
            typing
        }),
        (matrix(), prop::option::of(name())).prop_map(|(x, space)| Statement::Norm(NormCommand::Op { x, space })),
        map().prop_map(|m| Statement::Norm(NormCommand::Diamond(m))),
        (matrix(), 1usize..4, 1usize..4).prop_map(|(x, n, m)| Statement::Norm(NormCommand::Tensor {
            kind: TensorNorm::Haagerup,
            x,
            n,
            m
        })),
        (1usize..5).prop_map(|n| Statement::Demo(Demo::QSwitch(n))),
        structure().prop_map(|target| Statement::AssertLaws { target }),
    ]
}

proptest! {
    #[test]
    fn printed_asts_reparse(stmts in prop::collection::vec(statement(), 0..6)) {
        let s = Session { statements: stmts };
        let text = s.to_string();
        prop_assert_eq!(parse_session(&text).unwrap(), s);
    }

    #[test]
    fn parser_is_total_on_mutated_sessions(
        base in prop::collection::vec(statement(), 1..4),
        cut in any::<prop::sample::Index>(),
        insert in "[\\[\\](),;:#=a-z0-9 \n.+*-]{0,8}",
    ) {
        let text = Session { statements: base }.to_string();
        let mut at = cut.index(text.len() + 1);
        while !text.is_char_boundary(at) {
            at -= 1;
        }
        let mutated = format!("{}{}{}", &text[..at], insert, &text[at..]);
        let _ = parse_session(&mutated);
    }
}
