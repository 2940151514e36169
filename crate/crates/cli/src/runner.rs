//! Executes a session statement by statement. A failing statement becomes a `fail`
//! record and later statements still run.

use std::collections::HashMap;
use std::time::Instant;

use oscat_core::normlab::{
    cb_norm_with, diamond_norm_with, haagerup_bracket, inj_norm, proj_bracket, NormBracket, NormConfig, NormStatus,
    Picture, TensorShape,
};
use oscat_core::osx::{norm_at, SpaceElement, SpaceExpr};
use oscat_core::qglue::{
    check_morphism, connective, embed_h, embed_s, qsw_map, quantum_switch, Connective, MorphismStatus, QObject,
    SwitchCaps,
};
use oscat_core::random::rng;
use oscat_core::supop::{
    adjoint_map, classify, combine, depolarizing, from_kraus, functional, identity_map, negate_map, point_map,
    random_cptp, trace_map, transpose_map, unitary_conjugation,
};
use oscat_core::vnstruct::{
    certify_morphism, check_laws_seeded, make_algebra, make_coalgebra, MorphismMode, Structure, VnAlgebra, VnCoalgebra,
};
use oscat_core::{matcore, BlockMatrix, CMatrix, CombineMode, OscatError, SuperOp};

use crate::ast::*;
use crate::report::{BracketView, Record, Report, Status};

pub const DEFAULT_SEED: u64 = 0x05ca7;
pub const DEFAULT_TOL: f64 = 1e-9;
/// Samples per sampled law in `assert laws`.
const LAW_SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunCaps {
    /// Largest `Σ k` of a block shape accepted by constructors.
    pub max_blocks_total: usize,
    /// Largest coordinate dimension of a (co)algebra.
    pub max_struct_dim: usize,
    /// Largest side of a matrix literal.
    pub max_matrix: usize,
    pub switch: SwitchCaps,
}

impl Default for RunCaps {
    fn default() -> Self {
        RunCaps {
            max_blocks_total: 16,
            max_struct_dim: 64,
            max_matrix: 64,
            switch: SwitchCaps::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub tol: f64,
    pub caps: RunCaps,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: DEFAULT_SEED,
            tol: DEFAULT_TOL,
            caps: RunCaps::default(),
        }
    }
}

impl RunConfig {
    /// Flags override `OSCAT_SEED` / `OSCAT_TOL`, which override the defaults.
    pub fn resolve(
        seed_flag: Option<u64>,
        tol_flag: Option<f64>,
        env: impl Fn(&str) -> Option<String>,
    ) -> Result<RunConfig, String> {
        let seed = match seed_flag {
            Some(s) => s,
            None => match env("OSCAT_SEED") {
                Some(v) => v
                    .trim()
                    .parse()
                    .map_err(|_| format!("OSCAT_SEED is not an integer: {v:?}"))?,
                None => DEFAULT_SEED,
            },
        };
        let tol = match tol_flag {
            Some(t) => t,
            None => match env("OSCAT_TOL") {
                Some(v) => v
                    .trim()
                    .parse()
                    .map_err(|_| format!("OSCAT_TOL is not a number: {v:?}"))?,
                None => DEFAULT_TOL,
            },
        };
        if !(tol.is_finite() && tol > 0.0) {
            return Err(format!("tolerance must be positive and finite, got {tol}"));
        }
        Ok(RunConfig {
            seed,
            tol,
            caps: RunCaps::default(),
        })
    }

    fn norm_config(&self) -> NormConfig {
        NormConfig {
            seed: self.seed,
            ..NormConfig::default()
        }
    }
}

#[derive(Debug, Clone)]
enum Value {
    Space(SpaceExpr),
    Alg(VnAlgebra),
    Coalg(VnCoalgebra),
    Map(SuperOp),
    Obj(QObject),
}

impl Value {
    fn kind(&self) -> &'static str {
        match self {
            Value::Space(_) => "space",
            Value::Alg(_) => "algebra",
            Value::Coalg(_) => "coalgebra",
            Value::Map(_) => "map",
            Value::Obj(_) => "object",
        }
    }
}

type RunResult<T> = Result<T, String>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Algebra,
    Coalgebra,
}

impl Kind {
    fn flip(self) -> Kind {
        match self {
            Kind::Algebra => Kind::Coalgebra,
            Kind::Coalgebra => Kind::Algebra,
        }
    }
}

fn core(e: OscatError) -> String {
    e.to_string()
}

struct Runner {
    cfg: RunConfig,
    env: HashMap<String, Value>,
}

pub fn run_session(session: &Session, cfg: &RunConfig) -> Report {
    let mut runner = Runner {
        cfg: *cfg,
        env: HashMap::new(),
    };
    let mut records = Vec::new();
    for st in &session.statements {
        let started = Instant::now();
        let command = st.to_string();
        let outcome = runner.statement(st, &command);
        let rec = match outcome {
            Ok(Some(r)) => Some(r),
            Ok(None) => None,
            Err(msg) => Some(Record::failure(command, msg)),
        };
        if let Some(mut r) = rec {
            r.elapsed = started.elapsed();
            records.push(r);
        }
    }
    Report::new(cfg.seed, cfg.tol, records)
}

fn pass_fail(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

fn bracket_status(b: &NormBracket) -> Status {
    match b.status {
        NormStatus::Exact | NormStatus::Bracket => Status::Pass,
        NormStatus::UpperOnly | NormStatus::Unknown => Status::Unknown,
    }
}

fn norm_record(command: &str, b: &NormBracket) -> Record {
    Record {
        value: b.value(),
        bracket: Some(BracketView::from(b)),
        ..Record::new(command.to_string(), bracket_status(b))
    }
}

fn json<T: serde::Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("serializable")
}

impl Runner {
    fn lookup(&self, name: &str) -> RunResult<&Value> {
        self.env.get(name).ok_or_else(|| format!("undefined name '{name}'"))
    }

    fn bind(&mut self, name: &str, v: Value) -> RunResult<()> {
        if self.env.contains_key(name) {
            return Err(format!("'{name}' is already defined"));
        }
        self.env.insert(name.to_string(), v);
        Ok(())
    }

    fn statement(&mut self, st: &Statement, command: &str) -> RunResult<Option<Record>> {
        match st {
            Statement::Space { name, expr } => {
                self.bind(name, Value::Space(expr.clone()))?;
                Ok(None)
            }
            Statement::Alg { name, expr } => {
                let v = match self.structure(expr, Kind::Algebra)? {
                    Structure::Algebra(a) => Value::Alg(a),
                    Structure::Coalgebra(_) => return Err(format!("'{expr}' is a coalgebra")),
                };
                self.bind(name, v)?;
                Ok(None)
            }
            Statement::Coalg { name, expr } => {
                let v = match self.structure(expr, Kind::Coalgebra)? {
                    Structure::Coalgebra(c) => Value::Coalg(c),
                    Structure::Algebra(_) => return Err(format!("'{expr}' is an algebra")),
                };
                self.bind(name, v)?;
                Ok(None)
            }
            Statement::Map { name, expr } => {
                let m = self.map(expr)?;
                self.bind(name, Value::Map(m))?;
                Ok(None)
            }
            Statement::Obj { name, expr } => {
                let o = self.obj(expr)?;
                self.bind(name, Value::Obj(o))?;
                Ok(None)
            }
            Statement::Check { mode, map, typing } => self.check(*mode, map, typing.as_ref(), command).map(Some),
            Statement::Norm(n) => self.norm(n, command).map(Some),
            Statement::Demo(Demo::QSwitch(n)) => self.qswitch(*n, command).map(Some),
            Statement::AssertLaws { target } => {
                let s = self.structure(target, Kind::Algebra)?;
                let rep = check_laws_seeded(&s, LAW_SAMPLES, self.cfg.tol, self.cfg.seed);
                let failed: Vec<&str> = rep.laws.iter().filter(|l| !l.passed).map(|l| l.name.as_str()).collect();
                let mut rec = Record::new(command.to_string(), pass_fail(failed.is_empty()));
                rec.value = Some(rep.laws.iter().map(|l| l.max_defect).fold(0.0, f64::max));
                if !failed.is_empty() {
                    rec.message = Some(format!("failed laws: {}", failed.join(", ")));
                }
                rec.detail = Some(json(&rep));
                Ok(Some(rec))
            }
        }
    }

    fn check_shape(&self, shape: &[usize]) -> RunResult<()> {
        let total: usize = shape.iter().sum();
        if shape.is_empty() || shape.contains(&0) {
            return Err("block shapes need positive sizes".into());
        }
        if total > self.cfg.caps.max_blocks_total {
            return Err(core(OscatError::SizeLimit {
                what: "total block size",
                requested: total,
                cap: self.cfg.caps.max_blocks_total,
            }));
        }
        Ok(())
    }

    fn check_matrix(&self, m: &CMatrix) -> RunResult<()> {
        let side = m.rows().max(m.cols());
        if side > self.cfg.caps.max_matrix {
            return Err(core(OscatError::SizeLimit {
                what: "matrix literal side",
                requested: side,
                cap: self.cfg.caps.max_matrix,
            }));
        }
        Ok(())
    }

    fn check_struct_dim(&self, d: usize) -> RunResult<()> {
        if d > self.cfg.caps.max_struct_dim {
            return Err(core(OscatError::SizeLimit {
                what: "structure dimension",
                requested: d,
                cap: self.cfg.caps.max_struct_dim,
            }));
        }
        Ok(())
    }

    /// `kind` decides what a bare block shape stands for.
    fn structure(&self, e: &StructExpr, kind: Kind) -> RunResult<Structure> {
        match e {
            StructExpr::Name(n) => match self.lookup(n)? {
                Value::Alg(a) => Ok(Structure::Algebra(a.clone())),
                Value::Coalg(c) => Ok(Structure::Coalgebra(c.clone())),
                other => Err(format!("'{n}' is a {}, not a structure", other.kind())),
            },
            StructExpr::Shape(s) => {
                self.check_shape(s)?;
                self.check_struct_dim(s.iter().map(|k| k * k).sum())?;
                Ok(match kind {
                    Kind::Algebra => Structure::Algebra(make_algebra(s)),
                    Kind::Coalgebra => Structure::Coalgebra(make_coalgebra(s)),
                })
            }
            StructExpr::Dual(x) => Ok(self.structure(x, kind.flip())?.dualize()),
            StructExpr::Tensor(x, y) | StructExpr::Sum(x, y) => {
                let (a, b) = (self.structure(x, kind)?, self.structure(y, kind)?);
                let tensor = matches!(e, StructExpr::Tensor(..));
                let d = if tensor { a.dim() * b.dim() } else { a.dim() + b.dim() };
                self.check_struct_dim(d)?;
                match (a, b) {
                    (Structure::Algebra(a), Structure::Algebra(b)) => {
                        Ok(Structure::Algebra(if tensor { a.tensor(&b) } else { a.direct_sum(&b) }))
                    }
                    (Structure::Coalgebra(a), Structure::Coalgebra(b)) => Ok(Structure::Coalgebra(if tensor {
                        a.tensor(&b)
                    } else {
                        a.direct_sum(&b)
                    })),
                    _ => Err("cannot combine an algebra with a coalgebra".into()),
                }
            }
            StructExpr::Perturb {
                base,
                field,
                row,
                col,
                value,
            } => {
                let mut s = self.structure(base, kind)?;
                let out_of_range = || format!("entry ({row}, {col}) is outside {}", field.keyword());
                let bump_matrix = |m: &mut CMatrix| -> RunResult<()> {
                    if *row >= m.rows() || *col >= m.cols() {
                        return Err(out_of_range());
                    }
                    m[(*row, *col)] += *value;
                    Ok(())
                };
                let bump_vec = |v: &mut Vec<oscat_core::C64>| -> RunResult<()> {
                    if *col != 0 || *row >= v.len() {
                        return Err(out_of_range());
                    }
                    v[*row] += *value;
                    Ok(())
                };
                match (&mut s, field) {
                    (Structure::Algebra(a), StructField::Mult) => bump_matrix(&mut a.mult)?,
                    (Structure::Algebra(a), StructField::Unit) => bump_vec(&mut a.unit)?,
                    (Structure::Algebra(a), StructField::Invol) => bump_matrix(&mut a.invol)?,
                    (Structure::Coalgebra(c), StructField::Comult) => bump_matrix(&mut c.comult)?,
                    (Structure::Coalgebra(c), StructField::Counit) => bump_vec(&mut c.counit)?,
                    (Structure::Coalgebra(c), StructField::Invol) => bump_matrix(&mut c.invol)?,
                    (Structure::Algebra(_), f) => return Err(format!("an algebra has no field {}", f.keyword())),
                    (Structure::Coalgebra(_), f) => return Err(format!("a coalgebra has no field {}", f.keyword())),
                }
                Ok(s)
            }
        }
    }

    fn map(&self, e: &MapExpr) -> RunResult<SuperOp> {
        let shaped = |s: &Vec<usize>| self.check_shape(s);
        let n_ok = |n: usize| self.check_shape(&[n]);
        Ok(match e {
            MapExpr::Name(n) => match self.lookup(n)? {
                Value::Map(m) => m.clone(),
                other => return Err(format!("'{n}' is a {}, not a map", other.kind())),
            },
            MapExpr::Identity(s) => {
                shaped(s)?;
                identity_map(s)
            }
            MapExpr::Transpose(s) => {
                shaped(s)?;
                transpose_map(s)
            }
            MapExpr::Negate(s) => {
                shaped(s)?;
                negate_map(s)
            }
            MapExpr::Trace(s) => {
                shaped(s)?;
                trace_map(s)
            }
            MapExpr::Depolarizing(n) => {
                n_ok(*n)?;
                depolarizing(*n)
            }
            MapExpr::Unitary(u) => {
                self.check_matrix(u)?;
                n_ok(u.rows())?;
                let uu = u.adjoint().matmul(u);
                if !u.is_square() || uu.max_abs_diff(&CMatrix::identity(u.rows())) > 1e-9 {
                    return Err("unitary(...) needs a unitary matrix".into());
                }
                unitary_conjugation(u).map_err(core)?
            }
            MapExpr::Kraus(ks) => {
                for k in ks {
                    self.check_matrix(k)?;
                    n_ok(k.rows().max(k.cols()))?;
                }
                from_kraus(ks).map_err(core)?
            }
            MapExpr::Choi { n, m, choi } => {
                n_ok(*n)?;
                n_ok(*m)?;
                self.check_matrix(choi)?;
                SuperOp::from_choi(*n, *m, choi.clone()).map_err(core)?
            }
            MapExpr::Functional(f) => {
                self.check_matrix(f)?;
                n_ok(f.rows())?;
                functional(&BlockMatrix::single(f.clone()).map_err(core)?)
            }
            MapExpr::Point(a) => {
                self.check_matrix(a)?;
                n_ok(a.rows())?;
                point_map(&BlockMatrix::single(a.clone()).map_err(core)?)
            }
            MapExpr::Qsw(n) => {
                if *n > self.cfg.caps.switch.max_n {
                    return Err(core(OscatError::SizeLimit {
                        what: "quantum switch size n",
                        requested: *n,
                        cap: self.cfg.caps.switch.max_n,
                    }));
                }
                qsw_map(*n).map_err(core)?
            }
            MapExpr::RandomCptp { n, rank, seed } => {
                n_ok(*n)?;
                if *rank > n * n {
                    return Err(format!("rank {rank} exceeds n² = {}", n * n));
                }
                random_cptp(&mut rng(*seed), *n, *n, *rank)
            }
            MapExpr::Adjoint(f) => adjoint_map(&self.map(f)?),
            MapExpr::Compose(f, g) => combine(&self.map(f)?, &self.map(g)?, CombineMode::Compose).map_err(core)?,
            MapExpr::Tensor(f, g) => {
                let (f, g) = (self.map(f)?, self.map(g)?);
                let side = |s: &[usize]| s.iter().sum::<usize>();
                let total = side(f.dom()) * side(g.dom()) + side(f.cod()) * side(g.cod());
                if total > 2 * self.cfg.caps.max_blocks_total {
                    return Err(core(OscatError::SizeLimit {
                        what: "tensor map size",
                        requested: total,
                        cap: 2 * self.cfg.caps.max_blocks_total,
                    }));
                }
                combine(&f, &g, CombineMode::Tensor).map_err(core)?
            }
            MapExpr::Sum(f, g) => combine(&self.map(f)?, &self.map(g)?, CombineMode::DirectSum).map_err(core)?,
            MapExpr::Add(f, g) => self.map(f)?.add(&self.map(g)?).map_err(core)?,
            MapExpr::Scale(f, z) => self.map(f)?.scale(*z),
        })
    }

    fn obj(&self, e: &ObjExpr) -> RunResult<QObject> {
        let bin = |k: Connective, a: &ObjExpr, b: &ObjExpr| -> RunResult<QObject> {
            connective(k, &self.obj(a)?, Some(&self.obj(b)?)).map_err(core)
        };
        match e {
            ObjExpr::Name(n) => match self.lookup(n)? {
                Value::Obj(o) => Ok(o.clone()),
                other => Err(format!("'{n}' is a {}, not an object", other.kind())),
            },
            ObjExpr::Unit => Ok(QObject::unit()),
            ObjExpr::H(s) => match self.structure(s, Kind::Algebra)? {
                Structure::Algebra(a) => Ok(embed_h(&a)),
                Structure::Coalgebra(_) => Err("H(...) needs an algebra".into()),
            },
            ObjExpr::S(s) => match self.structure(s, Kind::Coalgebra)? {
                Structure::Coalgebra(c) => embed_s(&c).map_err(core),
                Structure::Algebra(_) => Err("S(...) needs a coalgebra".into()),
            },
            ObjExpr::Unitary(u) => {
                self.check_matrix(u)?;
                self.check_shape(&[u.rows()])?;
                QObject::unitary(&BlockMatrix::single(u.clone()).map_err(core)?).map_err(core)
            }
            ObjExpr::Dual(a) => connective(Connective::Dual, &self.obj(a)?, None).map_err(core),
            ObjExpr::With(a, b) => bin(Connective::With, a, b),
            ObjExpr::Plus(a, b) => bin(Connective::Plus, a, b),
            ObjExpr::Tensor(a, b) => bin(Connective::Tensor, a, b),
            ObjExpr::Par(a, b) => bin(Connective::Par, a, b),
        }
    }

    fn named_structure(&self, name: &str) -> RunResult<Structure> {
        self.structure(&StructExpr::Name(name.to_string()), Kind::Algebra)
    }

    fn check(
        &self,
        mode: CheckMode,
        map: &MapExpr,
        typing: Option<&(String, String)>,
        command: &str,
    ) -> RunResult<Record> {
        let f = self.map(map)?;
        let tol = self.cfg.tol;
        if mode == CheckMode::Morphism {
            let (a, b) = typing.ok_or("check morphism needs a typing ': A -> B'")?;
            let (a, b) = (
                self.obj(&ObjExpr::Name(a.clone()))?,
                self.obj(&ObjExpr::Name(b.clone()))?,
            );
            let m = check_morphism(&f, &a, &b, tol).map_err(core)?;
            let status = match m.status {
                MorphismStatus::Valid => Status::Pass,
                MorphismStatus::Invalid => Status::Fail,
                MorphismStatus::Unknown => Status::Unknown,
            };
            let mut rec = Record::new(command.to_string(), status);
            if let Some(cb) = &m.cb_norm {
                rec.value = cb.value();
                rec.bracket = Some(BracketView::from(cb));
            }
            rec.message = Some(m.reason.clone());
            rec.detail = Some(json(&m));
            return Ok(rec);
        }
        let certify_mode = match mode {
            CheckMode::Cpu => Some(MorphismMode::Cpu),
            CheckMode::Cptp => Some(MorphismMode::Cptp),
            CheckMode::AlgHom => Some(MorphismMode::AlgHom),
            CheckMode::CoalgHom => Some(MorphismMode::CoalgHom),
            _ => None,
        };
        if let (Some(mm), Some((a, b))) = (certify_mode, typing) {
            let (sa, sb) = (self.named_structure(a)?, self.named_structure(b)?);
            let v = certify_morphism(&f, &sa, &sb, mm, tol).map_err(core)?;
            let mut rec = Record::new(command.to_string(), pass_fail(v.holds));
            let failed: Vec<&str> = v.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
            if !failed.is_empty() {
                rec.message = Some(format!("failed checks: {}", failed.join(", ")));
            }
            rec.detail = Some(json(&v));
            return Ok(rec);
        }
        if certify_mode.is_some() && matches!(mode, CheckMode::AlgHom | CheckMode::CoalgHom) {
            return Err(format!("check {} needs a typing ': A -> B'", mode.keyword()));
        }
        if let Some((a, b)) = typing {
            let (sa, sb) = (self.named_structure(a)?, self.named_structure(b)?);
            if sa.shape() != Some(f.dom()) || sb.shape() != Some(f.cod()) {
                return Err(core(OscatError::ShapeMismatch(format!(
                    "map {:?} -> {:?} against {a} -> {b}",
                    f.dom(),
                    f.cod()
                ))));
            }
        }
        let fl = classify(&f, tol).map_err(core)?;
        let ok = match mode {
            CheckMode::Cp => fl.cp,
            CheckMode::Tp => fl.tp,
            CheckMode::Unital => fl.unital,
            CheckMode::Cpu => fl.cp && fl.unital,
            _ => fl.cp && fl.tp,
        };
        let mut rec = Record::new(command.to_string(), pass_fail(ok));
        rec.value = Some(fl.min_choi_eig);
        rec.detail = Some(json(&fl));
        Ok(rec)
    }

    fn norm(&self, n: &NormCommand, command: &str) -> RunResult<Record> {
        let cfg = self.cfg.norm_config();
        let exact = |v: f64| {
            let mut r = norm_record(command, &NormBracket::exact(v));
            r.bracket = None;
            r
        };
        match n {
            NormCommand::Op { x, space: None } => {
                self.check_matrix(x)?;
                Ok(exact(matcore::op_norm(x).map_err(core)?))
            }
            NormCommand::Op { x, space: Some(s) } => {
                self.check_matrix(x)?;
                let space = match self.lookup(s)? {
                    Value::Space(e) => e.clone(),
                    other => return Err(format!("'{s}' is a {}, not a space", other.kind())),
                };
                let el = SpaceElement::new(space, x.rows(), x.clone()).map_err(core)?;
                Ok(norm_record(command, &norm_at(&el).map_err(core)?))
            }
            NormCommand::Tr(x) => {
                self.check_matrix(x)?;
                Ok(exact(matcore::tr_norm(x).map_err(core)?))
            }
            NormCommand::Diamond(m) => Ok(norm_record(
                command,
                &diamond_norm_with(&self.map(m)?, &cfg).map_err(core)?,
            )),
            NormCommand::Cb(m) => Ok(norm_record(
                command,
                &cb_norm_with(&self.map(m)?, Picture::Operator, &cfg).map_err(core)?,
            )),
            NormCommand::Tensor { kind, x, n, m } => {
                self.check_matrix(x)?;
                let shape = TensorShape::square(*n, *m);
                let b = match kind {
                    TensorNorm::Haagerup => haagerup_bracket(x, shape, &cfg),
                    TensorNorm::Proj => proj_bracket(x, shape, &cfg),
                    TensorNorm::Inj => inj_norm(x, shape),
                }
                .map_err(core)?;
                Ok(norm_record(command, &b))
            }
        }
    }

    fn qswitch(&self, n: usize, command: &str) -> RunResult<Record> {
        let (_, rep) = quantum_switch(n, &self.cfg.caps.switch, &self.cfg.norm_config()).map_err(core)?;
        let records = rep.records();
        let verdicts: Vec<&str> = records
            .iter()
            .map(|r| r["verdict"].as_str().unwrap_or("unknown"))
            .collect();
        let status = if verdicts.contains(&"fail") {
            Status::Fail
        } else if verdicts.contains(&"unknown") {
            Status::Unknown
        } else {
            Status::Pass
        };
        let mut rec = Record::new(command.to_string(), status);
        if let Some(w) = &rep.violation.witness {
            rec.value = Some(w.ratio);
            rec.witness_ref = Some(format!("qswitch-{n}/level-{}", w.level));
        }
        rec.detail = Some(serde_json::json!({ "records": records }));
        Ok(rec)
    }
}
