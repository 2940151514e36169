//! Operator-space expressions: constructors, a text grammar, levelled elements, a norm
//! oracle and the canonical maps between constructions.
//!
//! Every constructor shares the underlying vector space of its parts: `M(n,m)` has the
//! lexicographic basis `e_ij`, duals the dual basis, sums concatenate coordinates and all
//! three tensors use `t = t_x · dim Y + t_y`. With these conventions the dual, conjugate
//! and double-dual identifications are coordinate identities.

mod canonical;
mod norm;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{OscatError, Result};
use crate::matcore::{CMatrix, C64, DEFAULT_DIM_CAP};

pub use canonical::{canonical_map, conj_opp_push, pair, CanonicalKind, CanonicalMap, TensorKind};
pub use norm::{norm_at, normalize, NormOracle};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceExpr {
    BaseM(usize, usize),
    Dual(Box<SpaceExpr>),
    Conj(Box<SpaceExpr>),
    Opp(Box<SpaceExpr>),
    SumInf(Box<SpaceExpr>, Box<SpaceExpr>),
    Sum1(Box<SpaceExpr>, Box<SpaceExpr>),
    TensMin(Box<SpaceExpr>, Box<SpaceExpr>),
    TensProj(Box<SpaceExpr>, Box<SpaceExpr>),
    TensH(Box<SpaceExpr>, Box<SpaceExpr>),
}

use SpaceExpr::*;

impl SpaceExpr {
    pub fn m(n: usize, m: usize) -> Self {
        BaseM(n, m)
    }

    /// `T_n = M_n*`.
    pub fn t(n: usize) -> Self {
        Dual(Box::new(BaseM(n, n)))
    }

    pub fn dual(x: SpaceExpr) -> Self {
        Dual(Box::new(x))
    }

    pub fn conj(x: SpaceExpr) -> Self {
        match x {
            Conj(inner) => *inner,
            other => Conj(Box::new(other)),
        }
    }

    pub fn opp(x: SpaceExpr) -> Self {
        match x {
            Opp(inner) => *inner,
            other => Opp(Box::new(other)),
        }
    }

    pub fn sum_inf(x: SpaceExpr, y: SpaceExpr) -> Self {
        SumInf(Box::new(x), Box::new(y))
    }

    pub fn sum1(x: SpaceExpr, y: SpaceExpr) -> Self {
        Sum1(Box::new(x), Box::new(y))
    }

    pub fn tens_min(x: SpaceExpr, y: SpaceExpr) -> Self {
        TensMin(Box::new(x), Box::new(y))
    }

    pub fn tens_proj(x: SpaceExpr, y: SpaceExpr) -> Self {
        TensProj(Box::new(x), Box::new(y))
    }

    pub fn tens_h(x: SpaceExpr, y: SpaceExpr) -> Self {
        TensH(Box::new(x), Box::new(y))
    }

    pub fn dim(&self) -> usize {
        match self {
            BaseM(n, m) => n * m,
            Dual(x) | Conj(x) | Opp(x) => x.dim(),
            SumInf(x, y) | Sum1(x, y) => x.dim() + y.dim(),
            TensMin(x, y) | TensProj(x, y) | TensH(x, y) => x.dim() * y.dim(),
        }
    }

    /// Constructor nesting depth; base spaces have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            BaseM(..) => 0,
            Dual(x) | Conj(x) | Opp(x) => 1 + x.depth(),
            SumInf(x, y) | Sum1(x, y) | TensMin(x, y) | TensProj(x, y) | TensH(x, y) => 1 + x.depth().max(y.depth()),
        }
    }

    fn is_binary(&self) -> bool {
        matches!(self, SumInf(..) | Sum1(..) | TensMin(..) | TensProj(..) | TensH(..))
    }
}

impl fmt::Display for SpaceExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let child = |f: &mut fmt::Formatter<'_>, x: &SpaceExpr| {
            if x.is_binary() {
                write!(f, "({x})")
            } else {
                write!(f, "{x}")
            }
        };
        let (x, op, y) = match self {
            BaseM(n, m) if n == m => return write!(f, "M({n})"),
            BaseM(n, m) => return write!(f, "M({n},{m})"),
            Dual(x) => match **x {
                BaseM(n, m) if n == m => return write!(f, "T({n})"),
                _ => return write!(f, "dual({x})"),
            },
            Conj(x) => return write!(f, "conj({x})"),
            Opp(x) => return write!(f, "opp({x})"),
            SumInf(x, y) => (x, "(+inf)", y),
            Sum1(x, y) => (x, "(+1)", y),
            TensMin(x, y) => (x, "(*min)", y),
            TensProj(x, y) => (x, "(*proj)", y),
            TensH(x, y) => (x, "(*h)", y),
        };
        child(f, x)?;
        write!(f, " {op} ")?;
        child(f, y)
    }
}

struct SpaceParser<'a> {
    src: &'a [u8],
    pos: usize,
    depth: usize,
}

const MAX_NESTING: usize = 64;

const BINOPS: [&str; 5] = ["(+inf)", "(+1)", "(*min)", "(*proj)", "(*h)"];

impl<'a> SpaceParser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(OscatError::Parse {
            offset: self.pos,
            message: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek_binop(&mut self) -> Option<&'static str> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let squeezed: Vec<u8> = rest
            .iter()
            .copied()
            .take(16)
            .filter(|c| !c.is_ascii_whitespace())
            .collect();
        BINOPS.into_iter().find(|op| squeezed.starts_with(op.as_bytes()))
    }

    fn eat_binop(&mut self, op: &str) {
        let mut want = op.bytes().peekable();
        while want.peek().is_some() {
            if self.src[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            } else {
                self.pos += 1;
                want.next();
            }
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        self.skip_ws();
        if self.src.get(self.pos) == Some(&c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected '{}'", c as char))
        }
    }

    fn number(&mut self) -> Result<usize> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a positive integer");
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        match text.parse::<usize>() {
            Ok(n) if (1..=DEFAULT_DIM_CAP).contains(&n) => Ok(n),
            _ => {
                self.pos = start;
                self.err(format!("dimension must be in 1..={DEFAULT_DIM_CAP}"))
            }
        }
    }

    fn ident(&mut self) -> &'a str {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).expect("ascii letters")
    }

    fn expr(&mut self) -> Result<SpaceExpr> {
        let mut lhs = self.term()?;
        while let Some(op) = self.peek_binop() {
            self.eat_binop(op);
            let rhs = self.term()?;
            lhs = match op {
                "(+inf)" => SpaceExpr::sum_inf(lhs, rhs),
                "(+1)" => SpaceExpr::sum1(lhs, rhs),
                "(*min)" => SpaceExpr::tens_min(lhs, rhs),
                "(*proj)" => SpaceExpr::tens_proj(lhs, rhs),
                _ => SpaceExpr::tens_h(lhs, rhs),
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<SpaceExpr> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return self.err(format!("nesting deeper than {MAX_NESTING}"));
        }
        let out = self.term_inner();
        self.depth -= 1;
        out
    }

    fn term_inner(&mut self) -> Result<SpaceExpr> {
        self.skip_ws();
        if self.src.get(self.pos) == Some(&b'(') && self.peek_binop().is_none() {
            self.pos += 1;
            let e = self.expr()?;
            self.expect(b')')?;
            return Ok(e);
        }
        let at = self.pos;
        let word = self.ident();
        match word {
            "M" => {
                self.expect(b'(')?;
                let n = self.number()?;
                self.skip_ws();
                let m = if self.src.get(self.pos) == Some(&b',') {
                    self.pos += 1;
                    self.number()?
                } else {
                    n
                };
                self.expect(b')')?;
                Ok(BaseM(n, m))
            }
            "T" => {
                self.expect(b'(')?;
                let n = self.number()?;
                self.expect(b')')?;
                Ok(SpaceExpr::t(n))
            }
            "dual" | "conj" | "opp" => {
                self.expect(b'(')?;
                let inner = self.expr()?;
                self.expect(b')')?;
                Ok(match word {
                    "dual" => SpaceExpr::dual(inner),
                    "conj" => SpaceExpr::conj(inner),
                    _ => SpaceExpr::opp(inner),
                })
            }
            _ => {
                self.pos = at;
                self.err("expected one of M, T, dual, conj, opp, '('")
            }
        }
    }
}

/// Parses a space expression at the start of `text`, returning it with the number of bytes
/// consumed; trailing input is left for the caller.
pub fn parse_space_prefix(text: &str) -> Result<(SpaceExpr, usize)> {
    let mut p = SpaceParser {
        src: text.as_bytes(),
        pos: 0,
        depth: 0,
    };
    let e = p.expr()?;
    Ok((e, p.pos))
}

/// Parses a complete space expression, e.g. `M(2) (*h) opp(T(3))`.
pub fn parse_space(text: &str) -> Result<SpaceExpr> {
    let (e, used) = parse_space_prefix(text)?;
    if !text[used..].trim().is_empty() {
        return Err(OscatError::Parse {
            offset: used + (text[used..].len() - text[used..].trim_start().len()),
            message: "unexpected trailing input".into(),
        });
    }
    Ok(e)
}

/// An element of `M_k(X)`: `coords` is `k x (k·dim X)` with the coordinates of entry
/// `x_pq` in row `p`, columns `q·dim .. (q+1)·dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceElement {
    pub space: SpaceExpr,
    pub level: usize,
    pub coords: CMatrix,
}

impl SpaceElement {
    pub fn new(space: SpaceExpr, level: usize, coords: CMatrix) -> Result<Self> {
        let d = space.dim();
        if level == 0 || coords.rows() != level || coords.cols() != level * d {
            return Err(OscatError::ShapeMismatch(format!(
                "level-{level} coordinates for a space of dimension {d} must be {level}x{}, got {}x{}",
                level * d,
                coords.rows(),
                coords.cols()
            )));
        }
        if !coords.is_finite() {
            return Err(OscatError::InvalidInput("non-finite coordinates".into()));
        }
        Ok(SpaceElement { space, level, coords })
    }

    /// Level-1 element from its coordinate vector.
    pub fn vector(space: SpaceExpr, coords: &[C64]) -> Result<Self> {
        let n = coords.len();
        Self::new(space, 1, CMatrix::from_vec(1, n, coords.to_vec())?)
    }

    /// Element of `M_k(M(n,m))` from the `k·n x k·m` block matrix `[x_pq]`.
    pub fn from_level_matrix(n: usize, m: usize, big: &CMatrix) -> Result<Self> {
        let k = big.rows() / n.max(1);
        if n == 0 || m == 0 || big.rows() != k * n || big.cols() != k * m {
            return Err(OscatError::ShapeMismatch(
                "level matrix does not tile into blocks".into(),
            ));
        }
        let d = n * m;
        let coords = CMatrix::from_fn(k, k * d, |p, qt| {
            let (q, t) = (qt / d, qt % d);
            big[(p * n + t / m, q * m + t % m)]
        });
        Self::new(BaseM(n, m), k, coords)
    }

    /// Coordinates of the entry `x_pq`.
    pub fn entry(&self, p: usize, q: usize) -> &[C64] {
        let d = self.space.dim();
        let row = &self.coords.data()[p * self.level * d..(p + 1) * self.level * d];
        &row[q * d..(q + 1) * d]
    }

    /// `x ↦ x ⊕ 0` into level `k + extra`.
    pub fn pad(&self, extra: usize) -> SpaceElement {
        let d = self.space.dim();
        let k = self.level + extra;
        let mut coords = CMatrix::zeros(k, k * d);
        for p in 0..self.level {
            for q in 0..self.level {
                for (t, &z) in self.entry(p, q).iter().enumerate() {
                    coords[(p, q * d + t)] = z;
                }
            }
        }
        SpaceElement {
            space: self.space.clone(),
            level: k,
            coords,
        }
    }

    /// Same level structure with every entry's coordinates reindexed by `map` (new → old).
    pub(crate) fn remap(&self, space: SpaceExpr, map: &[usize]) -> SpaceElement {
        let (k, d_old, d_new) = (self.level, self.space.dim(), map.len());
        let coords = CMatrix::from_fn(k, k * d_new, |p, qt| {
            let (q, t) = (qt / d_new, qt % d_new);
            self.coords[(p, q * d_old + map[t])]
        });
        SpaceElement {
            space,
            level: k,
            coords,
        }
    }

    /// Level-index transpose `[x_pq] ↦ [x_qp]`.
    pub fn level_transpose(&self) -> SpaceElement {
        let (k, d) = (self.level, self.space.dim());
        let coords = CMatrix::from_fn(k, k * d, |p, qt| self.coords[(qt / d, p * d + qt % d)]);
        SpaceElement {
            space: self.space.clone(),
            level: k,
            coords,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn grammar_examples() {
        assert_eq!(parse_space("M(2)").unwrap(), BaseM(2, 2));
        assert_eq!(parse_space(" M( 2 , 3 ) ").unwrap(), BaseM(2, 3));
        assert_eq!(parse_space("T(2)").unwrap(), SpaceExpr::t(2));
        let e = parse_space("M(2) (*h) opp(T(3)) (+inf) M(1)").unwrap();
        assert_eq!(
            e,
            SpaceExpr::sum_inf(
                SpaceExpr::tens_h(BaseM(2, 2), SpaceExpr::opp(SpaceExpr::t(3))),
                BaseM(1, 1)
            )
        );
        let g = parse_space("M(2) (*h) (M(3) ( * min ) M(1))").unwrap();
        assert_eq!(
            g,
            SpaceExpr::tens_h(BaseM(2, 2), SpaceExpr::tens_min(BaseM(3, 3), BaseM(1, 1)))
        );
        assert_eq!(e.dim(), 4 * 9 + 1);
    }

    #[test]
    fn grammar_errors() {
        for bad in [
            "",
            "M(",
            "M(2,",
            "M(0)",
            "N(2)",
            "M(2) (+2) M(2)",
            "dual(M(2)",
            "M(2) M(2)",
        ] {
            assert!(matches!(parse_space(bad), Err(OscatError::Parse { .. })), "{bad}");
        }
        let Err(OscatError::Parse { offset, .. }) = parse_space("M(2,") else {
            panic!()
        };
        assert_eq!(offset, 4);
        let deep = format!("{}M(1){}", "dual(".repeat(500), ")".repeat(500));
        assert!(parse_space(&deep).is_err());
    }

    #[test]
    fn involutions_normalize() {
        let x = SpaceExpr::tens_h(BaseM(2, 2), SpaceExpr::t(2));
        assert_eq!(SpaceExpr::conj(SpaceExpr::conj(x.clone())), x);
        assert_eq!(SpaceExpr::opp(SpaceExpr::opp(x.clone())), x);
    }

    #[test]
    fn level_matrix_round_trip() {
        let big = CMatrix::from_fn(4, 6, |i, j| C64::new(i as f64, j as f64));
        let e = SpaceElement::from_level_matrix(2, 3, &big).unwrap();
        assert_eq!(e.level, 2);
        assert_eq!(e.entry(1, 0)[3], big[(3, 0)]);
        let t = e.level_transpose();
        assert_eq!(t.entry(0, 1), e.entry(1, 0));
    }

    fn arb_space() -> impl Strategy<Value = SpaceExpr> {
        let leaf = prop_oneof![
            (1usize..4, 1usize..4).prop_map(|(n, m)| BaseM(n, m)),
            (1usize..4).prop_map(SpaceExpr::t)
        ];
        leaf.prop_recursive(3, 12, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(SpaceExpr::dual),
                inner.clone().prop_map(SpaceExpr::conj),
                inner.clone().prop_map(SpaceExpr::opp),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| SpaceExpr::sum_inf(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| SpaceExpr::sum1(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| SpaceExpr::tens_min(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| SpaceExpr::tens_proj(a, b)),
                (inner.clone(), inner).prop_map(|(a, b)| SpaceExpr::tens_h(a, b)),
            ]
        })
    }

    proptest! {
        #[test]
        fn display_reparses(e in arb_space()) {
            prop_assert_eq!(parse_space(&e.to_string()).unwrap(), e);
        }
    }
}
