//! Reader for the polynomial literal syntax, e.g. `3/2*z^2*zb*dzb - I*x`.

use crate::algebra::{Algebra, Element};
use crate::coeff::{CoefficientField, Coeff, Q};
use crate::error::{Error, ParseClass, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Op(char),
}

fn err(class: ParseClass, col: usize, message: impl Into<String>) -> Error {
    Error::Parse { class, line: 1, column: col, message: message.into() }
}

fn lex(s: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            out.push((Tok::Num(chars[start..i].iter().collect()), col));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
        } else if "+-*/^()".contains(c) {
            out.push((Tok::Op(c), col));
            i += 1;
        } else {
            return Err(err(ParseClass::Syntax, col, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    alg: &'a Algebra,
    end_col: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.1)
    }

    fn expr(&mut self) -> Result<Element> {
        let mut acc = self.term()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let t = self.term()?;
            acc = if c == '+' { &acc + &t } else { &acc - &t };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Element> {
        let mut neg = false;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            if c == '-' {
                neg = !neg;
            }
        }
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some(Tok::Op('*')) => {
                    self.pos += 1;
                    let f = self.power()?;
                    acc = &acc * &f;
                }
                Some(Tok::Op('/')) => {
                    self.pos += 1;
                    let col = self.col();
                    let d = self.power()?;
                    let c = d
                        .as_constant()
                        .filter(|c| !c.is_zero())
                        .ok_or_else(|| err(ParseClass::Syntax, col, "division by a non-constant or zero"))?;
                    acc = acc.scale(&c.recip());
                }
                _ => break,
            }
        }
        Ok(if neg { -acc } else { acc })
    }

    fn power(&mut self) -> Result<Element> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let col = self.col();
            match self.peek().cloned() {
                Some(Tok::Num(n)) => {
                    self.pos += 1;
                    let k: u32 = n
                        .parse()
                        .map_err(|_| err(ParseClass::Syntax, col, "exponent too large"))?;
                    Ok(base.pow(k))
                }
                _ => Err(err(ParseClass::Syntax, col, "expected an integer exponent")),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Element> {
        let col = self.col();
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                let q = Q::parse(&n).ok_or_else(|| err(ParseClass::Syntax, col, "bad number"))?;
                Ok(self.alg.constant(Coeff::from(q)))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if name == "I" {
                    if self.alg.field() != CoefficientField::GaussianRationals {
                        return Err(err(
                            ParseClass::Schema,
                            col,
                            "imaginary unit used over the rationals",
                        ));
                    }
                    return Ok(self.alg.constant(Coeff::i()));
                }
                self.alg.try_var(&name).map_err(|_| {
                    err(ParseClass::UnresolvedReference, col, format!("undeclared generator `{name}`"))
                })
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                match self.peek() {
                    Some(Tok::Op(')')) => {
                        self.pos += 1;
                        Ok(e)
                    }
                    _ => Err(err(ParseClass::Syntax, self.col(), "expected `)`")),
                }
            }
            Some(t) => Err(err(ParseClass::Syntax, col, format!("unexpected token {t:?}"))),
            None => Err(err(ParseClass::Syntax, col, "unexpected end of expression")),
        }
    }
}

/// Parses an element of `alg`. Columns in errors are 1-based within `s`.
pub fn parse_element(alg: &Algebra, s: &str) -> Result<Element> {
    let toks = lex(s)?;
    let mut p = Parser { toks, pos: 0, alg, end_col: s.chars().count() + 1 };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(err(ParseClass::Syntax, p.col(), "trailing input"));
    }
    Ok(e)
}
