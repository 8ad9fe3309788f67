//! Tiny arithmetic expressions in the family index `n`.
//!
//! Scenario files describe function families as builder trees whose scalar
//! leaves may be strings like `"1/n"`, `"2*n"` or `"(-1)^n"`. The grammar is
//! `+ - * / ^` over numbers, `n` and parentheses; `^` binds tightest and is
//! right-associative.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("expression uses `n` but no index was supplied")]
    IndexRequired,
    #[error("expression evaluated to a non-finite value")]
    NonFinite,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Index,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr, ExprError> {
        let mut p = Parser {
            bytes: src.as_bytes(),
            pos: 0,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.bytes.len() {
            return Err(ExprError::Parse {
                pos: p.pos,
                msg: "trailing input".into(),
            });
        }
        Ok(e)
    }

    pub fn uses_index(&self) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Index => true,
            Expr::Neg(a) => a.uses_index(),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => a.uses_index() || b.uses_index(),
        }
    }

    pub fn eval(&self, n: Option<f64>) -> Result<f64, ExprError> {
        let v = self.eval_inner(n)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ExprError::NonFinite)
        }
    }

    fn eval_inner(&self, n: Option<f64>) -> Result<f64, ExprError> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Index => n.ok_or(ExprError::IndexRequired)?,
            Expr::Neg(a) => -a.eval_inner(n)?,
            Expr::Add(a, b) => a.eval_inner(n)? + b.eval_inner(n)?,
            Expr::Sub(a, b) => a.eval_inner(n)? - b.eval_inner(n)?,
            Expr::Mul(a, b) => a.eval_inner(n)? * b.eval_inner(n)?,
            Expr::Div(a, b) => a.eval_inner(n)? / b.eval_inner(n)?,
            Expr::Pow(a, b) => {
                let base = a.eval_inner(n)?;
                let exp = b.eval_inner(n)?;
                if exp.fract() == 0.0 && exp.abs() < 2_147_483_647.0 {
                    base.powi(exp as i32)
                } else {
                    base.powf(exp)
                }
            }
        })
    }
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn err(&self, msg: &str) -> ExprError {
        ExprError::Parse {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        let base = self.unary()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            // right-associative
            let exp = self.factor()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(b'n') => {
                self.pos += 1;
                Ok(Expr::Index)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                while self.pos < self.bytes.len() {
                    let b = self.bytes[self.pos];
                    if b.is_ascii_digit() || b == b'.' {
                        self.pos += 1;
                    } else if (b == b'e' || b == b'E')
                        && self.pos + 1 < self.bytes.len()
                        && (self.bytes[self.pos + 1].is_ascii_digit()
                            || self.bytes[self.pos + 1] == b'-'
                            || self.bytes[self.pos + 1] == b'+')
                    {
                        self.pos += 2;
                    } else {
                        break;
                    }
                }
                let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
                text.parse::<f64>()
                    .map(Expr::Num)
                    .map_err(|_| self.err("bad number literal"))
            }
            _ => Err(self.err("expected number, `n` or `(`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_family_scalars() {
        let e = Expr::parse("1/n").unwrap();
        assert_eq!(e.eval(Some(4.0)).unwrap(), 0.25);
        let e = Expr::parse("1 + 1/n^2").unwrap();
        assert_eq!(e.eval(Some(2.0)).unwrap(), 1.25);
        let e = Expr::parse("(-1)^n").unwrap();
        assert_eq!(e.eval(Some(3.0)).unwrap(), -1.0);
        assert_eq!(e.eval(Some(4.0)).unwrap(), 1.0);
        let e = Expr::parse("2*n").unwrap();
        assert!(e.uses_index());
    }

    #[test]
    fn constant_expressions_need_no_index() {
        let e = Expr::parse("3.5e-2").unwrap();
        assert!(!e.uses_index());
        assert_eq!(e.eval(None).unwrap(), 3.5e-2);
    }

    #[test]
    fn rejects_garbage() {
        assert!(Expr::parse("1 +").is_err());
        assert!(Expr::parse("x").is_err());
        assert!(Expr::parse("(1").is_err());
        assert!(Expr::parse("1/n)").is_err());
    }

    #[test]
    fn division_by_zero_is_caught_at_eval() {
        let e = Expr::parse("1/(n-1)").unwrap();
        assert_eq!(e.eval(Some(1.0)).unwrap_err(), ExprError::NonFinite);
    }
}
