//! Recursive-descent parser for sessions.
//!
//! One `;`-terminated statement per line, `#` starts a comment. Space expressions are
//! handed to the osx parser; matrix literals to the matcore literal parser.

use std::fmt;

use oscat_core::matcore::{parse_complex, parse_matrix};
use oscat_core::osx::parse_space_prefix;
use oscat_core::{CMatrix, OscatError, C64};
use thiserror::Error;

use crate::ast::*;

const MAX_DEPTH: usize = 64;

/// Words that cannot name a definition.
pub const RESERVED: &[&str] = &[
    "space",
    "alg",
    "coalg",
    "map",
    "obj",
    "check",
    "norm",
    "demo",
    "assert",
    "laws",
    "qswitch",
    "in",
    "over",
    "unit",
    "tensor",
    "sum",
    "dual",
    "perturb",
    "identity",
    "transpose",
    "negate",
    "trace",
    "depolarizing",
    "unitary",
    "kraus",
    "choi",
    "functional",
    "point",
    "qsw",
    "random_cptp",
    "adjoint",
    "compose",
    "add",
    "scale",
    "H",
    "S",
    "with",
    "plus",
    "par",
    "M",
    "T",
    "conj",
    "opp",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, col {}: expected ", self.line, self.col)?;
        match self.expected.as_slice() {
            [one] => write!(f, "{one}")?,
            many => write!(f, "one of {}", many.join(", "))?,
        }
        write!(f, ", found {}", self.found)
    }
}

type PResult<T> = Result<T, ParseError>;

pub fn parse_session(text: &str) -> PResult<Session> {
    let mut p = Parser {
        src: text,
        b: text.as_bytes(),
        pos: 0,
        depth: 0,
    };
    let mut statements = Vec::new();
    loop {
        p.ws();
        if p.pos >= p.b.len() {
            break;
        }
        statements.push(p.statement()?);
    }
    Ok(Session { statements })
}

struct Parser<'a> {
    src: &'a str,
    b: &'a [u8],
    pos: usize,
    depth: usize,
}

fn is_ident_start(c: u8) -> bool {
    c.is_ascii_alphabetic() || c == b'_'
}

fn is_ident_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_'
}

impl<'a> Parser<'a> {
    fn ws(&mut self) {
        while let Some(&c) = self.b.get(self.pos) {
            if c.is_ascii_whitespace() {
                self.pos += 1;
            } else if c == b'#' {
                while self.pos < self.b.len() && self.b[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn error_at(&self, pos: usize, expected: &[&str]) -> ParseError {
        let before = &self.src[..pos];
        let line = before.bytes().filter(|&c| c == b'\n').count() + 1;
        let line_start = before.rfind('\n').map_or(0, |i| i + 1);
        let col = self.src[line_start..pos].chars().count() + 1;
        let found = match self.src[pos..].chars().next() {
            None => "end of input".to_string(),
            Some(_) if is_ident_start(self.b[pos]) => {
                let end = (pos..self.b.len())
                    .find(|&i| !is_ident_char(self.b[i]))
                    .unwrap_or(self.b.len());
                format!("'{}'", &self.src[pos..end])
            }
            Some(ch) => format!("{ch:?}"),
        };
        ParseError {
            line,
            col,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found,
        }
    }

    fn err(&mut self, expected: &[&str]) -> ParseError {
        self.ws();
        self.error_at(self.pos, expected)
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.b.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8, label: &str) -> PResult<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&[label]))
        }
    }

    fn expect_str(&mut self, s: &str, label: &str) -> PResult<()> {
        self.ws();
        if self.src[self.pos..].starts_with(s) {
            self.pos += s.len();
            Ok(())
        } else {
            Err(self.err(&[label]))
        }
    }

    /// Identifier at the cursor, without consuming it.
    fn peek_ident(&mut self) -> &'a str {
        self.ws();
        let start = self.pos;
        if !self.b.get(start).is_some_and(|&c| is_ident_start(c)) {
            return "";
        }
        let end = (start..self.b.len())
            .find(|&i| !is_ident_char(self.b[i]))
            .unwrap_or(self.b.len());
        &self.src[start..end]
    }

    fn keyword(&mut self, options: &[&'static str]) -> PResult<&'static str> {
        let word = self.peek_ident();
        match options.iter().find(|&&k| k == word) {
            Some(&k) => {
                self.pos += k.len();
                Ok(k)
            }
            None => Err(self.err(options)),
        }
    }

    fn name(&mut self) -> PResult<String> {
        let word = self.peek_ident();
        if word.is_empty() || RESERVED.contains(&word) {
            return Err(self.err(&["a name"]));
        }
        self.pos += word.len();
        Ok(word.to_string())
    }

    fn integer(&mut self) -> PResult<u64> {
        self.ws();
        let start = self.pos;
        let end = (start..self.b.len())
            .find(|&i| !self.b[i].is_ascii_digit())
            .unwrap_or(self.b.len());
        match self.src[start..end].parse::<u64>() {
            Ok(v) => {
                self.pos = end;
                Ok(v)
            }
            Err(_) => Err(self.error_at(start, &["an integer"])),
        }
    }

    fn count(&mut self) -> PResult<usize> {
        self.ws();
        let start = self.pos;
        let v = self.integer()?;
        usize::try_from(v).map_err(|_| self.error_at(start, &["an integer"]))
    }

    fn positive(&mut self) -> PResult<usize> {
        self.ws();
        let start = self.pos;
        match self.count()? {
            0 => Err(self.error_at(start, &["a positive integer"])),
            v => Ok(v),
        }
    }

    fn complex(&mut self) -> PResult<C64> {
        self.ws();
        let start = self.pos;
        let end = (start..self.b.len())
            .find(|&i| !matches!(self.b[i], b'0'..=b'9' | b'.' | b'e' | b'E' | b'+' | b'-' | b'i'))
            .unwrap_or(self.b.len());
        match parse_complex(&self.src[start..end]) {
            Some(z) => {
                self.pos = end;
                Ok(z)
            }
            None => Err(self.error_at(start, &["a complex number"])),
        }
    }

    fn shape(&mut self) -> PResult<Vec<usize>> {
        self.expect(b'[', "'['")?;
        let mut out = vec![self.positive()?];
        while self.eat(b',') {
            out.push(self.positive()?);
        }
        self.expect(b']', "',' or ']'")?;
        Ok(out)
    }

    fn matrix(&mut self) -> PResult<CMatrix> {
        self.ws();
        let start = self.pos;
        if self.b.get(start) != Some(&b'[') {
            return Err(self.error_at(start, &["a matrix literal"]));
        }
        let mut depth = 0usize;
        let mut end = None;
        for i in start..self.b.len() {
            match self.b[i] {
                b'[' => depth += 1,
                b']' => {
                    depth -= 1;
                    if depth == 0 {
                        end = Some(i + 1);
                        break;
                    }
                }
                b';' | b'#' => break,
                _ => {}
            }
        }
        let Some(end) = end else {
            return Err(self.error_at(start, &["a closed matrix literal"]));
        };
        match parse_matrix(&self.src[start..end]) {
            Ok(m) if m.rows() > 0 && m.cols() > 0 => {
                self.pos = end;
                Ok(m)
            }
            Ok(_) => Err(self.error_at(start, &["a nonempty matrix literal"])),
            Err(OscatError::Parse { offset, message }) => {
                Err(self.error_at(start + offset.min(end - start), &[&message]))
            }
            Err(_) => Err(self.error_at(start, &["a matrix literal"])),
        }
    }

    fn nested<T>(&mut self, f: impl FnOnce(&mut Self) -> PResult<T>) -> PResult<T> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.err(&["a shallower expression"]));
        }
        let out = f(self);
        self.depth -= 1;
        out
    }

    fn statement(&mut self) -> PResult<Statement> {
        let kw = self.keyword(&["space", "alg", "coalg", "map", "obj", "check", "norm", "demo", "assert"])?;
        let st = match kw {
            "space" | "alg" | "coalg" | "map" | "obj" => {
                let name = self.name()?;
                self.expect(b'=', "'='")?;
                match kw {
                    "space" => Statement::Space {
                        name,
                        expr: self.space()?,
                    },
                    "alg" => Statement::Alg {
                        name,
                        expr: self.structure()?,
                    },
                    "coalg" => Statement::Coalg {
                        name,
                        expr: self.structure()?,
                    },
                    "map" => Statement::Map {
                        name,
                        expr: self.map()?,
                    },
                    _ => Statement::Obj {
                        name,
                        expr: self.obj()?,
                    },
                }
            }
            "check" => {
                let keys: Vec<&'static str> = CheckMode::ALL.iter().map(|(k, _)| *k).collect();
                let k = self.keyword(&keys)?;
                let mode = CheckMode::ALL
                    .iter()
                    .find(|(w, _)| *w == k)
                    .map(|(_, m)| *m)
                    .expect("listed mode");
                let map = self.map()?;
                let typing = if self.eat(b':') {
                    let a = self.name()?;
                    self.expect_str("->", "'->'")?;
                    let b = self.name()?;
                    Some((a, b))
                } else {
                    None
                };
                Statement::Check { mode, map, typing }
            }
            "norm" => Statement::Norm(self.norm()?),
            "demo" => {
                self.keyword(&["qswitch"])?;
                Statement::Demo(Demo::QSwitch(self.count()?))
            }
            _ => {
                self.keyword(&["laws"])?;
                Statement::AssertLaws {
                    target: self.structure()?,
                }
            }
        };
        self.expect(b';', "';'")?;
        Ok(st)
    }

    fn space(&mut self) -> PResult<oscat_core::osx::SpaceExpr> {
        self.ws();
        let start = self.pos;
        let rest = &self.src[start..];
        // keep the space parser inside the statement
        let stmt_end = rest.find([';', '#']).unwrap_or(rest.len());
        match parse_space_prefix(&rest[..stmt_end]) {
            Ok((e, used)) => {
                self.pos = start + used;
                Ok(e)
            }
            Err(OscatError::Parse { offset, message }) => {
                Err(self.error_at(start + offset.min(stmt_end), &["a space expression", &message]))
            }
            Err(_) => Err(self.error_at(start, &["a space expression"])),
        }
    }

    fn structure(&mut self) -> PResult<StructExpr> {
        self.nested(|p| {
            if p.peek() == Some(b'[') {
                return Ok(StructExpr::Shape(p.shape()?));
            }
            let word = p.peek_ident();
            let e = match word {
                "tensor" | "sum" | "dual" | "perturb" => {
                    p.pos += word.len();
                    p.expect(b'(', "'('")?;
                    let first = Box::new(p.structure()?);
                    let e = match word {
                        "dual" => StructExpr::Dual(first),
                        "perturb" => {
                            p.expect(b',', "','")?;
                            let keys: Vec<&'static str> = StructField::ALL.iter().map(|(k, _)| *k).collect();
                            let k = p.keyword(&keys)?;
                            let field = StructField::ALL
                                .iter()
                                .find(|(w, _)| *w == k)
                                .map(|(_, f)| *f)
                                .expect("listed");
                            p.expect(b',', "','")?;
                            let row = p.count()?;
                            p.expect(b',', "','")?;
                            let col = p.count()?;
                            p.expect(b',', "','")?;
                            let value = p.complex()?;
                            StructExpr::Perturb {
                                base: first,
                                field,
                                row,
                                col,
                                value,
                            }
                        }
                        _ => {
                            p.expect(b',', "','")?;
                            let second = Box::new(p.structure()?);
                            if word == "tensor" {
                                StructExpr::Tensor(first, second)
                            } else {
                                StructExpr::Sum(first, second)
                            }
                        }
                    };
                    p.expect(b')', "')'")?;
                    e
                }
                _ => match p.name() {
                    Ok(n) => StructExpr::Name(n),
                    Err(_) => return Err(p.err(&["a block shape", "a name", "tensor", "sum", "dual", "perturb"])),
                },
            };
            Ok(e)
        })
    }

    fn map_pair(&mut self) -> PResult<(Box<MapExpr>, Box<MapExpr>)> {
        let a = Box::new(self.map()?);
        self.expect(b',', "','")?;
        let b = Box::new(self.map()?);
        Ok((a, b))
    }

    fn map(&mut self) -> PResult<MapExpr> {
        const BUILTINS: [&str; 19] = [
            "identity",
            "transpose",
            "negate",
            "trace",
            "depolarizing",
            "unitary",
            "kraus",
            "choi",
            "functional",
            "point",
            "qsw",
            "random_cptp",
            "adjoint",
            "compose",
            "tensor",
            "sum",
            "add",
            "scale",
            "a name",
        ];
        self.nested(|p| {
            let word = p.peek_ident();
            if !BUILTINS[..18].contains(&word) {
                return match p.name() {
                    Ok(n) => Ok(MapExpr::Name(n)),
                    Err(_) => Err(p.err(&BUILTINS)),
                };
            }
            p.pos += word.len();
            p.expect(b'(', "'('")?;
            let e = match word {
                "identity" => MapExpr::Identity(p.shape()?),
                "transpose" => MapExpr::Transpose(p.shape()?),
                "negate" => MapExpr::Negate(p.shape()?),
                "trace" => MapExpr::Trace(p.shape()?),
                "depolarizing" => MapExpr::Depolarizing(p.positive()?),
                "unitary" => MapExpr::Unitary(p.matrix()?),
                "kraus" => {
                    let mut ks = vec![p.matrix()?];
                    while p.eat(b',') {
                        ks.push(p.matrix()?);
                    }
                    MapExpr::Kraus(ks)
                }
                "choi" => {
                    let n = p.positive()?;
                    p.expect(b',', "','")?;
                    let m = p.positive()?;
                    p.expect(b',', "','")?;
                    MapExpr::Choi {
                        n,
                        m,
                        choi: p.matrix()?,
                    }
                }
                "functional" => MapExpr::Functional(p.matrix()?),
                "point" => MapExpr::Point(p.matrix()?),
                "qsw" => MapExpr::Qsw(p.positive()?),
                "random_cptp" => {
                    let n = p.positive()?;
                    p.expect(b',', "','")?;
                    let rank = p.positive()?;
                    p.expect(b',', "','")?;
                    MapExpr::RandomCptp {
                        n,
                        rank,
                        seed: p.integer()?,
                    }
                }
                "adjoint" => MapExpr::Adjoint(Box::new(p.map()?)),
                "scale" => {
                    let f = Box::new(p.map()?);
                    p.expect(b',', "','")?;
                    MapExpr::Scale(f, p.complex()?)
                }
                _ => {
                    let (a, b) = p.map_pair()?;
                    match word {
                        "compose" => MapExpr::Compose(a, b),
                        "tensor" => MapExpr::Tensor(a, b),
                        "sum" => MapExpr::Sum(a, b),
                        _ => MapExpr::Add(a, b),
                    }
                }
            };
            p.expect(b')', "')'")?;
            Ok(e)
        })
    }

    fn obj(&mut self) -> PResult<ObjExpr> {
        const FORMS: [&str; 10] = [
            "unit", "H", "S", "unitary", "dual", "with", "plus", "tensor", "par", "a name",
        ];
        self.nested(|p| {
            let word = p.peek_ident();
            if word == "unit" {
                p.pos += 4;
                return Ok(ObjExpr::Unit);
            }
            if !FORMS[1..9].contains(&word) {
                return match p.name() {
                    Ok(n) => Ok(ObjExpr::Name(n)),
                    Err(_) => Err(p.err(&FORMS)),
                };
            }
            p.pos += word.len();
            p.expect(b'(', "'('")?;
            let e = match word {
                "H" => ObjExpr::H(p.structure()?),
                "S" => ObjExpr::S(p.structure()?),
                "unitary" => ObjExpr::Unitary(p.matrix()?),
                "dual" => ObjExpr::Dual(Box::new(p.obj()?)),
                _ => {
                    let a = Box::new(p.obj()?);
                    p.expect(b',', "','")?;
                    let b = Box::new(p.obj()?);
                    match word {
                        "with" => ObjExpr::With(a, b),
                        "plus" => ObjExpr::Plus(a, b),
                        "tensor" => ObjExpr::Tensor(a, b),
                        _ => ObjExpr::Par(a, b),
                    }
                }
            };
            p.expect(b')', "')'")?;
            Ok(e)
        })
    }

    fn norm(&mut self) -> PResult<NormCommand> {
        let kind = self.keyword(&["op", "tr", "diamond", "cb", "haagerup", "proj", "inj"])?;
        Ok(match kind {
            "op" => {
                let x = self.matrix()?;
                let space = if self.peek_ident() == "in" {
                    self.pos += 2;
                    Some(self.name()?)
                } else {
                    None
                };
                NormCommand::Op { x, space }
            }
            "tr" => NormCommand::Tr(self.matrix()?),
            "diamond" => NormCommand::Diamond(self.map()?),
            "cb" => NormCommand::Cb(self.map()?),
            _ => {
                let x = self.matrix()?;
                self.keyword(&["over"])?;
                let n = self.positive()?;
                self.expect(b',', "','")?;
                let m = self.positive()?;
                let kind = match kind {
                    "haagerup" => TensorNorm::Haagerup,
                    "proj" => TensorNorm::Proj,
                    _ => TensorNorm::Inj,
                };
                NormCommand::Tensor { kind, x, n, m }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn space_definition() {
        let s = parse_session("space A = M(2);").unwrap();
        assert_eq!(s.statements.len(), 1);
        assert!(matches!(&s.statements[0], Statement::Space { name, .. } if name == "A"));
    }

    #[test]
    fn check_command() {
        let s = parse_session("check cptp f : S2 -> S2;").unwrap();
        assert_eq!(
            s.statements,
            vec![Statement::Check {
                mode: CheckMode::Cptp,
                map: MapExpr::Name("f".into()),
                typing: Some(("S2".into(), "S2".into())),
            }]
        );
    }

    #[test]
    fn malformed_space_reports_column() {
        let e = parse_session("space A = M(2,;").unwrap_err();
        assert_eq!((e.line, e.col), (1, 15));
        assert!(!e.expected.is_empty());
    }

    #[test]
    fn errors_carry_expected_sets() {
        let e = parse_session("\n\nnorm foo [[1]];").unwrap_err();
        assert_eq!((e.line, e.col), (3, 6));
        assert!(e.expected.contains(&"diamond".to_string()));
        assert_eq!(e.found, "'foo'");
        let e = parse_session("map f = identity([2])").unwrap_err();
        assert_eq!(e.expected, vec!["';'"]);
        assert_eq!(e.found, "end of input");
    }

    #[test]
    fn comments_and_blank_lines() {
        let s = parse_session("# header\n\n  demo qswitch 2; # trailing\n").unwrap();
        assert_eq!(s.statements, vec![Statement::Demo(Demo::QSwitch(2))]);
    }

    #[test]
    fn keywords_cannot_be_names() {
        assert!(parse_session("map unit = identity([1]);").is_err());
        assert!(parse_session("obj o = unit;").is_ok());
    }

    #[test]
    fn deep_nesting_is_an_error() {
        let text = format!("map f = {}identity([1]){};", "adjoint(".repeat(200), ")".repeat(200));
        assert!(parse_session(&text).is_err());
    }

    #[test]
    fn unicode_does_not_break_positions() {
        let e = parse_session("# ünïcode\nspace é = M(2);").unwrap_err();
        assert_eq!((e.line, e.col), (2, 7));
    }
}
