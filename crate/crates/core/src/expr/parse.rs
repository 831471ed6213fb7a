//! Recursive-descent parser for the expression grammar
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := atom ('^' atom)?
//! atom   := number | 'x1' | 'x2' | 'pi' | func '(' expr ')' | '(' expr ')' | '-' atom
//! func   := 'sin' | 'cos' | 'exp' | 'log'
//! ```
//!
//! Unary minus binds tighter than `^`, so `-x1^2` is `(-x1)^2`.

use thiserror::Error;

use super::Expr;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier '{name}' at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("function '{name}' at byte {offset} takes 1 argument, got {found}")]
    Arity {
        name: String,
        offset: usize,
        found: usize,
    },
    #[error("exponent at byte {offset} is not a constant")]
    NonConstantExponent { offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownIdentifier { offset, .. }
            | ParseError::Arity { offset, .. }
            | ParseError::NonConstantExponent { offset } => *offset,
        }
    }
}

pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax(format!("unexpected '{}'", p.src[p.pos] as char)));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn syntax(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.syntax(format!("expected '{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    terms.push(self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    terms.push(Expr::neg(self.term()?));
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::sum(terms)
        })
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut factors = vec![self.factor()?];
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    factors.push(self.factor()?);
                }
                Some(b'/') => {
                    self.pos += 1;
                    factors.push(Expr::pow(self.factor()?, -1.0));
                }
                _ => break,
            }
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Expr::product(factors)
        })
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let at = self.pos;
            let exponent = self.atom()?;
            match exponent.as_const() {
                Some(n) => Ok(Expr::pow(base, n)),
                None => Err(ParseError::NonConstantExponent { offset: at }),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            None => Err(self.syntax("unexpected end of input")),
            Some(b'-') => {
                self.pos += 1;
                Ok(Expr::neg(self.atom()?))
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.identifier(),
            Some(c) => Err(self.syntax(format!("unexpected '{}'", c as char))),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut n = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            self.pos = start;
            return Err(self.syntax("malformed number"));
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
                return Err(self.syntax("malformed exponent in number"));
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Expr::Const(v)),
            _ => Err(ParseError::Syntax {
                offset: start,
                message: format!("number '{text}' is not a finite double"),
            }),
        }
    }

    fn identifier(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        match name {
            "x1" => return Ok(Expr::x1()),
            "x2" => return Ok(Expr::x2()),
            "pi" => return Ok(Expr::Const(std::f64::consts::PI)),
            "sin" | "cos" | "exp" | "log" => {}
            _ => {
                return Err(ParseError::UnknownIdentifier {
                    name: name.to_string(),
                    offset: start,
                })
            }
        }
        let name = name.to_string();
        if self.peek() != Some(b'(') {
            return Err(ParseError::Arity {
                name,
                offset: start,
                found: 0,
            });
        }
        self.pos += 1;
        if self.peek() == Some(b')') {
            return Err(ParseError::Arity {
                name,
                offset: start,
                found: 0,
            });
        }
        let arg = self.expr()?;
        if self.peek() == Some(b',') {
            let mut found = 1;
            while self.peek() == Some(b',') {
                self.pos += 1;
                self.expr()?;
                found += 1;
            }
            return Err(ParseError::Arity {
                name,
                offset: start,
                found,
            });
        }
        self.expect(b')')?;
        Ok(match name.as_str() {
            "sin" => Expr::sin(arg),
            "cos" => Expr::cos(arg),
            "exp" => Expr::exp(arg),
            _ => Expr::log(arg),
        })
    }
}
