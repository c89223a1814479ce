//! Recursive-descent parser for Lagrangian expressions.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := unary (('*' | '/') unary)*
//! unary    := ('-' | '+') unary | power
//! power    := primary ('^' exponent)*
//! exponent := ['-'] number | '(' ['-'] number ['/' number] ')'
//! primary  := number | invariant | 'sqrt' '(' expr ')' | '(' expr ')'
//! invariant:= 'z' | 'a' | 'alpha' | 'b' | 'beta' | 'y'
//! ```
//!
//! Exponents must be literal integers or halves (`2`, `-1`, `0.5`, `(3/2)`).

use super::expr::{Exponent, Expr, Invariant};
use super::Kind;
use crate::error::{Error, Result};

/// Parses `text` as a Lagrangian of the given kind.
pub fn parse_lagrangian(text: &str, kind: Kind) -> Result<Expr> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        kind,
    };
    p.skip_ws();
    if p.at_end() {
        return Err(Error::parse(p.pos, "empty expression"));
    }
    let e = p.expr()?;
    p.skip_ws();
    if !p.at_end() {
        let c = p.src[p.pos] as char;
        let msg = if c == ')' {
            "unbalanced ')'".to_string()
        } else {
            format!("unexpected '{c}'")
        };
        return Err(Error::parse(p.pos, msg));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    kind: Kind,
}

impl Parser<'_> {
    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else if self.at_end() && c == b')' {
            Err(Error::parse(self.pos, "unbalanced '(': missing ')'"))
        } else if self.at_end() {
            Err(Error::parse(
                self.pos,
                format!("expected '{}' before end of input", c as char),
            ))
        } else {
            Err(Error::parse(
                self.pos,
                format!("expected '{}', found '{}'", c as char, self.src[self.pos] as char),
            ))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else if self.eat(b'+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let mut base = self.primary()?;
        while self.eat(b'^') {
            let e = self.exponent()?;
            base = Expr::Pow(Box::new(base), e);
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<Exponent> {
        self.skip_ws();
        let start = self.pos;
        let value = if self.eat(b'(') {
            let neg = self.eat(b'-');
            let num = self.number()?;
            let den = if self.eat(b'/') { self.number()? } else { 1.0 };
            self.expect(b')')?;
            if den == 0.0 {
                return Err(Error::parse(start, "zero denominator in exponent"));
            }
            if neg {
                -num / den
            } else {
                num / den
            }
        } else {
            let neg = self.eat(b'-');
            self.skip_ws();
            match self.peek() {
                Some(c) if c.is_ascii_digit() || c == b'.' => {}
                _ => {
                    return Err(Error::parse(
                        self.pos,
                        "exponent must be a numeric literal (integer or half-integer)",
                    ))
                }
            }
            let n = self.number()?;
            if neg {
                -n
            } else {
                n
            }
        };
        let halves = 2.0 * value;
        if halves.fract() != 0.0 || halves.abs() > i32::MAX as f64 {
            return Err(Error::parse(
                start,
                format!("exponent {value} is not an integer or half-integer"),
            ));
        }
        Ok(Exponent { halves: halves as i32 })
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while matches!(p.peek(), Some(c) if c.is_ascii_digit()) {
                p.pos += 1;
            }
            p.pos - s
        };
        let int = digits(self);
        let mut frac = 0;
        if self.peek() == Some(b'.') {
            self.pos += 1;
            frac = digits(self);
        }
        if int + frac == 0 {
            return Err(Error::parse(start, "malformed number"));
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                return Err(Error::parse(save, "malformed number exponent"));
            }
        }
        if matches!(self.peek(), Some(b'.')) {
            return Err(Error::parse(start, "malformed number"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        text.parse::<f64>().map_err(|_| Error::parse(start, "malformed number"))
    }

    fn primary(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            None => Err(Error::parse(start, "unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => Ok(Expr::Const(self.number()?)),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                    self.pos += 1;
                }
                let ident = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii ident");
                let var = match ident {
                    "sqrt" => {
                        self.expect(b'(')?;
                        let e = self.expr()?;
                        self.expect(b')')?;
                        return Ok(Expr::Sqrt(Box::new(e)));
                    }
                    "z" => Invariant::Z,
                    "a" | "alpha" => Invariant::Alpha,
                    "b" | "beta" => Invariant::Beta,
                    "y" => Invariant::Y,
                    other => return Err(Error::parse(start, format!("unknown identifier `{other}`"))),
                };
                if !self.kind.allows(var) {
                    return Err(Error::Kind {
                        name: ident.to_string(),
                        offset: start,
                        kind: self.kind.to_string(),
                    });
                }
                Ok(Expr::Var(var))
            }
            Some(c) => Err(Error::parse(start, format!("unexpected '{}'", c as char))),
        }
    }
}
