//! Salamon notation: `0,0,e^{12},e^{13}+2e^{24}`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{LieAlgebra, MAX_DIM};
use crate::error::{Error, Result};
use crate::rational::Rational;

struct Cursor<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    len: usize,
    _src: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Self { chars: src.char_indices().collect(), pos: 0, len: src.len(), _src: src }
    }

    fn offset(&self) -> usize {
        self.chars.get(self.pos).map_or(self.len, |c| c.0)
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|c| c.1)
    }

    fn peek_at(&self, ahead: usize) -> Option<char> {
        self.chars.get(self.pos + ahead).map(|c| c.1)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        self.pos += 1;
        c
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{c}`")))
        }
    }

    fn error(&self, msg: impl Into<String>) -> Error {
        Error::syntax(self.offset(), msg)
    }

    /// `+1`, `-1`, or `None` if no sign is present.
    fn sign(&mut self) -> Option<i32> {
        match self.peek() {
            Some('+') => {
                self.pos += 1;
                Some(1)
            }
            Some('-') | Some('\u{2212}') => {
                self.pos += 1;
                Some(-1)
            }
            _ => None,
        }
    }

    fn digits(&mut self) -> Option<String> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        (self.pos > start).then(|| self.chars[start..self.pos].iter().map(|c| c.1).collect())
    }

    /// `12` or `3/4`.
    fn number(&mut self) -> Result<Option<Rational>> {
        let Some(num) = self.digits() else {
            return Ok(None);
        };
        let num: BigInt = num.parse().expect("digits");
        let save = self.pos;
        self.skip_ws();
        if self.eat('/') {
            self.skip_ws();
            let at = self.offset();
            let den: BigInt =
                self.digits().ok_or_else(|| self.error("expected a denominator"))?.parse().expect("digits");
            if den.is_zero() {
                return Err(Error::syntax(at, "zero denominator"));
            }
            Ok(Some(Rational::new(num, den)))
        } else {
            self.pos = save;
            Ok(Some(Rational::from_integer(num)))
        }
    }

    fn at_wedge(&self) -> bool {
        self.peek() == Some('e') && self.peek_at(1) == Some('^')
    }

    fn identifier(&mut self) -> Option<String> {
        let save = self.pos;
        self.eat('\\');
        if !self.peek().is_some_and(char::is_alphabetic) || self.at_wedge() {
            self.pos = save;
            return None;
        }
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        Some(self.chars[start..self.pos].iter().map(|c| c.1).collect())
    }
}

/// Index pair of a wedge, 1-based as written.
fn wedge_indices(c: &mut Cursor) -> Result<(usize, usize, usize)> {
    let at = c.offset();
    let single = |c: &mut Cursor| -> Result<usize> {
        match c.bump() {
            Some(d) if d.is_ascii_digit() => Ok(d.to_digit(10).unwrap() as usize),
            _ => {
                c.pos -= 1;
                Err(c.error("expected an index digit"))
            }
        }
    };
    if c.eat('{') {
        c.skip_ws();
        let start = c.pos;
        let first = c.digits().ok_or_else(|| c.error("expected an index"))?;
        c.skip_ws();
        if c.eat(',') {
            c.skip_ws();
            let second = c.digits().ok_or_else(|| c.error("expected an index"))?;
            c.skip_ws();
            c.expect('}')?;
            let i = first.parse().map_err(|_| Error::syntax(at, "index too large"))?;
            let j = second.parse().map_err(|_| Error::syntax(at, "index too large"))?;
            return Ok((i, j, at));
        }
        if first.len() != 2 {
            c.pos = start;
            return Err(c.error("expected two single-digit indices or `i,j`"));
        }
        c.expect('}')?;
        let b = first.as_bytes();
        return Ok(((b[0] - b'0') as usize, (b[1] - b'0') as usize, at));
    }
    let i = single(c)?;
    let j = single(c)?;
    Ok((i, j, at))
}

struct Term {
    coeff: Rational,
    i: usize,
    j: usize,
    at: usize,
}

fn parse_term(c: &mut Cursor, subst: &BTreeMap<String, Rational>, first: bool) -> Result<Term> {
    c.skip_ws();
    let mut coeff = Rational::one();
    match c.sign() {
        Some(s) => {
            if s < 0 {
                coeff = -coeff;
            }
        }
        None if !first => return Err(c.error("expected `+`, `-`, `,` or end of input")),
        None => {}
    }
    loop {
        c.skip_ws();
        if c.at_wedge() {
            break;
        }
        if c.eat('*') {
            continue;
        }
        if let Some(q) = c.number()? {
            coeff *= q;
            continue;
        }
        let at = c.offset();
        if let Some(name) = c.identifier() {
            let v = subst.get(&name).ok_or_else(|| Error::UndeclaredParameter(name.clone()))?;
            let _ = at;
            coeff *= v.clone();
            continue;
        }
        return Err(c.error("expected a coefficient or `e^`"));
    }
    c.bump();
    c.bump();
    let (i, j, at) = wedge_indices(c)?;
    Ok(Term { coeff, i, j, at })
}

/// Parses Salamon notation; parameter names must be present in `subst`.
pub fn parse_algebra(text: &str, subst: &BTreeMap<String, Rational>) -> Result<LieAlgebra> {
    let mut c = Cursor::new(text);
    let mut rows: Vec<Vec<Term>> = Vec::new();
    let mut used = BTreeMap::new();
    loop {
        c.skip_ws();
        let mut terms = Vec::new();
        let save = c.pos;
        let zero = c.eat('0') && {
            c.skip_ws();
            matches!(c.peek(), None | Some(','))
        };
        if !zero {
            c.pos = save;
            let mut first = true;
            loop {
                let before = c.pos;
                c.skip_ws();
                if !first && matches!(c.peek(), None | Some(',')) {
                    break;
                }
                c.pos = before;
                let start = c.pos;
                let t = parse_term(&mut c, subst, first)?;
                for (name, v) in subst {
                    let written: String = c.chars[start..c.pos].iter().map(|x| x.1).collect();
                    if contains_identifier(&written, name) {
                        used.insert(name.clone(), v.clone());
                    }
                }
                terms.push(t);
                first = false;
            }
        }
        rows.push(terms);
        c.skip_ws();
        match c.bump() {
            None => break,
            Some(',') => continue,
            Some(_) => {
                c.pos -= 1;
                return Err(c.error("expected `,`"));
            }
        }
    }
    let n = rows.len();
    if !(1..=MAX_DIM).contains(&n) {
        return Err(Error::Dimension(n));
    }
    let mut l = LieAlgebra::abelian(n)?;
    for (k, terms) in rows.into_iter().enumerate() {
        for t in terms {
            for x in [t.i, t.j] {
                if x == 0 || x > n {
                    let _ = t.at;
                    return Err(Error::IndexOutOfRange { index: x, dim: n });
                }
            }
            if t.i == t.j {
                return Err(Error::RepeatedIndex(t.i));
            }
            let (i, j) = (t.i - 1, t.j - 1);
            let cur = l.coeff(k, i, j).clone();
            l.set(k, i, j, cur + t.coeff);
        }
    }
    Ok(l.with_params(used))
}

fn contains_identifier(text: &str, name: &str) -> bool {
    text.split(|c: char| !(c.is_alphanumeric() || c == '_')).any(|w| w == name)
}

fn wedge(n: usize, i: usize, j: usize) -> String {
    if n <= 9 {
        format!("e^{{{}{}}}", i + 1, j + 1)
    } else {
        format!("e^{{{},{}}}", i + 1, j + 1)
    }
}

pub(super) fn serialize(l: &LieAlgebra) -> String {
    let n = l.dim();
    (0..n)
        .map(|k| {
            let terms = l.differential(k);
            if terms.is_empty() {
                return "0".to_string();
            }
            let mut s = String::new();
            for (t, (i, j, c)) in terms.iter().enumerate() {
                if c.is_negative() {
                    s.push('-');
                } else if t > 0 {
                    s.push('+');
                }
                let a = c.abs();
                if !a.is_one() {
                    s.push_str(&a.to_string());
                }
                s.push_str(&wedge(n, *i, *j));
            }
            s
        })
        .collect::<Vec<_>>()
        .join(",")
}

/// Parses a comma-separated list of vectors such as `e1+e2, 1/2(e1-e2), -2e3`
/// into coordinate vectors of length `n`. `e_1` is accepted for `e1`.
pub fn parse_vectors(text: &str, n: usize) -> Result<Vec<Vec<Rational>>> {
    let mut c = Cursor::new(text);
    let mut out = Vec::new();
    loop {
        let v = vector_sum(&mut c, n)?;
        out.push(v);
        c.skip_ws();
        match c.bump() {
            None => break,
            Some(',') => continue,
            Some(_) => {
                c.pos -= 1;
                return Err(c.error("expected `,`"));
            }
        }
    }
    Ok(out)
}

fn vector_sum(c: &mut Cursor, n: usize) -> Result<Vec<Rational>> {
    let mut acc = vec![Rational::zero(); n];
    let mut first = true;
    loop {
        c.skip_ws();
        if !first && matches!(c.peek(), None | Some(',') | Some(')')) {
            return Ok(acc);
        }
        let mut coeff = Rational::one();
        match c.sign() {
            Some(s) if s < 0 => coeff = -coeff,
            Some(_) => {}
            None if !first => return Err(c.error("expected `+` or `-`")),
            None => {}
        }
        c.skip_ws();
        if let Some(q) = c.number()? {
            coeff *= q;
            c.skip_ws();
            c.eat('*');
            c.skip_ws();
        }
        let v = if c.eat('(') {
            let inner = vector_sum(c, n)?;
            c.skip_ws();
            c.expect(')')?;
            inner
        } else if c.eat('e') {
            c.eat('_');
            let braced = c.eat('{');
            let at = c.offset();
            let d = c.digits().ok_or_else(|| c.error("expected an index"))?;
            if braced {
                c.expect('}')?;
            }
            let i: usize = d.parse().map_err(|_| Error::syntax(at, "index too large"))?;
            if i == 0 || i > n {
                return Err(Error::IndexOutOfRange { index: i, dim: n });
            }
            let mut v = vec![Rational::zero(); n];
            v[i - 1] = Rational::one();
            v
        } else {
            return Err(c.error("expected `e<index>` or `(`"));
        };
        for (a, x) in acc.iter_mut().zip(v) {
            *a += &coeff * x;
        }
        first = false;
    }
}
