//! Text form of matrices: `[[1, 0+1i], [-0.5-2i, 3]]`, rows in order.

use super::{c, CMatrix, C64};
use crate::error::{OscatError, Result};

/// Formats a scalar as `a`, `bi` or `a+bi`, using the shortest round-tripping decimal form.
pub fn format_complex(z: C64) -> String {
    let re = clean_zero(z.re);
    let im = clean_zero(z.im);
    if im == 0.0 {
        format!("{re}")
    } else if re == 0.0 {
        format!("{im}i")
    } else if im < 0.0 {
        format!("{re}{im}i")
    } else {
        format!("{re}+{im}i")
    }
}

fn clean_zero(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

pub fn format_matrix(m: &CMatrix) -> String {
    let mut s = String::from("[");
    for i in 0..m.rows() {
        if i > 0 {
            s.push_str(", ");
        }
        s.push('[');
        for j in 0..m.cols() {
            if j > 0 {
                s.push_str(", ");
            }
            s.push_str(&format_complex(m[(i, j)]));
        }
        s.push(']');
    }
    s.push(']');
    s
}

/// Parses one scalar such as `3`, `-2.5e-3`, `4i`, `-i` or `1-0.5i`.
pub fn parse_complex(text: &str) -> Option<C64> {
    let t: String = text.chars().filter(|ch| !ch.is_whitespace()).collect();
    if t.is_empty() {
        return None;
    }
    let Some(body) = t.strip_suffix('i') else {
        return parse_real(&t).map(|r| c(r, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (parse_real(&body[..k])?, parse_imag(&body[k..])?),
        None => (0.0, parse_imag(body)?),
    };
    Some(c(re, im))
}

fn parse_real(s: &str) -> Option<f64> {
    let first = s.chars().next()?;
    if !(first.is_ascii_digit() || first == '-' || first == '+' || first == '.') {
        return None;
    }
    if s.chars().any(|ch| ch.is_ascii_alphabetic() && ch != 'e' && ch != 'E') {
        return None;
    }
    let v: f64 = s.parse().ok()?;
    v.is_finite().then_some(v)
}

fn parse_imag(s: &str) -> Option<f64> {
    match s {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        _ => parse_real(s),
    }
}

/// Parses a rectangular nested-bracket literal. Error offsets are byte offsets into `text`.
pub fn parse_matrix(text: &str) -> Result<CMatrix> {
    let mut p = Lit {
        s: text.as_bytes(),
        pos: 0,
        src: text,
    };
    let m = p.matrix()?;
    p.ws();
    if p.pos != p.s.len() {
        return Err(p.err("trailing input after matrix literal"));
    }
    Ok(m)
}

struct Lit<'a> {
    s: &'a [u8],
    pos: usize,
    src: &'a str,
}

impl Lit<'_> {
    fn err(&self, msg: &str) -> OscatError {
        OscatError::Parse {
            offset: self.pos,
            message: msg.to_string(),
        }
    }

    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn expect(&mut self, b: u8) -> Result<()> {
        self.ws();
        if self.s.get(self.pos) == Some(&b) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", b as char)))
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.pos).copied()
    }

    fn matrix(&mut self) -> Result<CMatrix> {
        self.expect(b'[')?;
        let mut rows: Vec<Vec<C64>> = Vec::new();
        if self.peek() == Some(b']') {
            self.pos += 1;
            return Ok(CMatrix::zeros(0, 0));
        }
        loop {
            rows.push(self.row()?);
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b']') => {
                    self.pos += 1;
                    break;
                }
                _ => return Err(self.err("expected ',' or ']'")),
            }
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(self.err("ragged matrix literal"));
        }
        let nrows = rows.len();
        CMatrix::from_vec(nrows, cols, rows.into_iter().flatten().collect())
    }

    fn row(&mut self) -> Result<Vec<C64>> {
        self.expect(b'[')?;
        let mut out = Vec::new();
        if self.peek() == Some(b']') {
            self.pos += 1;
            return Ok(out);
        }
        loop {
            self.ws();
            let start = self.pos;
            while self.pos < self.s.len() && !matches!(self.s[self.pos], b',' | b']' | b'[') {
                self.pos += 1;
            }
            let tok = &self.src[start..self.pos];
            match parse_complex(tok) {
                Some(z) => out.push(z),
                None => {
                    self.pos = start;
                    return Err(self.err("expected complex number"));
                }
            }
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b']') => {
                    self.pos += 1;
                    return Ok(out);
                }
                _ => return Err(self.err("expected ',' or ']'")),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn scalars() {
        assert_eq!(parse_complex("3"), Some(c(3.0, 0.0)));
        assert_eq!(parse_complex("-i"), Some(c(0.0, -1.0)));
        assert_eq!(parse_complex("0+1i"), Some(c(0.0, 1.0)));
        assert_eq!(parse_complex("-0.5-2i"), Some(c(-0.5, -2.0)));
        assert_eq!(parse_complex("1e-3+2E+1i"), Some(c(1e-3, 20.0)));
        assert_eq!(parse_complex("2.5e-3i"), Some(c(0.0, 2.5e-3)));
        assert_eq!(parse_complex("nan"), None);
        assert_eq!(parse_complex("inf"), None);
        assert_eq!(parse_complex("1+"), None);
        assert_eq!(parse_complex(""), None);
    }

    #[test]
    fn matrix_literal() {
        let m = parse_matrix("[[1, 0+1i], [-0.5-2i, 3]]").unwrap();
        assert_eq!(m[(0, 1)], c(0.0, 1.0));
        assert_eq!(m[(1, 0)], c(-0.5, -2.0));
        assert!(parse_matrix("[[1, 2], [3]]").is_err());
        match parse_matrix("[[1, x]]") {
            Err(OscatError::Parse { offset, .. }) => assert_eq!(offset, 5),
            other => panic!("{other:?}"),
        }
    }

    proptest! {
        #[test]
        fn format_parse_round_trip(vals in proptest::collection::vec((-1e6f64..1e6, -1e6f64..1e6), 1..10)) {
            let n = vals.len();
            let m = CMatrix::from_fn(1, n, |_, j| c(vals[j].0, vals[j].1));
            let back = parse_matrix(&format_matrix(&m)).unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
