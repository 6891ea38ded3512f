//! Recursive-descent parser for field expressions.
//!
//! ```text
//! field   := vector | expr
//! vector  := '(' expr ',' expr ',' expr ')'
//! expr    := term (('+' | '-') term)*
//! term    := factor (('*' | '/') factor)*
//! factor  := '-' factor | base ('^' integer)?
//! base    := number | 'pi' | variable | function '(' expr ')' | '(' expr ')'
//! ```
//!
//! Positions in errors are 0-based character offsets.

use super::ast::{Expr, Func, Var};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

struct Lexer;

impl Lexer {
    fn tokens(text: &str) -> Result<Vec<(Tok, usize)>> {
        let chars: Vec<char> = text.chars().collect();
        let mut out = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_digit() || c == '.' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let s: String = chars[start..i].iter().collect();
                let v = s.parse::<f64>().map_err(|_| Error::Syntax {
                    pos: start,
                    msg: format!("malformed number `{s}`"),
                })?;
                out.push((Tok::Num(v), start));
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), start));
            } else if "+-*/^(),".contains(c) {
                out.push((Tok::Sym(c), i));
                i += 1;
            } else {
                return Err(Error::Syntax {
                    pos: i,
                    msg: format!("unexpected character `{c}`"),
                });
            }
        }
        out.push((Tok::End, chars.len()));
        Ok(out)
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("expected `{c}`")))
        }
    }

    fn unexpected(&self, what: &str) -> Error {
        let found = match self.peek() {
            Tok::End => "end of input".to_string(),
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Sym(c) => format!("`{c}`"),
        };
        Error::Syntax {
            pos: self.pos(),
            msg: format!("{what}, found {found}"),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::add(lhs, self.term()?);
            } else if self.eat('-') {
                lhs = Expr::sub(lhs, self.term()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat('*') {
                lhs = Expr::mul(lhs, self.factor()?);
            } else if *self.peek() == Tok::Sym('/') {
                self.bump();
                let pos = self.pos();
                let rhs = self.factor()?;
                if rhs.as_num() == Some(0.0) {
                    return Err(Error::DivisionByZero(pos));
                }
                lhs = Expr::div(lhs, rhs);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::neg(self.factor()?));
        }
        let base = self.base()?;
        if self.eat('^') {
            let neg = if self.eat('(') {
                let neg = self.eat('-');
                let n = self.integer()?;
                self.expect(')')?;
                return Ok(Expr::pow(base, if neg { -n } else { n }));
            } else {
                self.eat('-')
            };
            let n = self.integer()?;
            return Ok(Expr::pow(base, if neg { -n } else { n }));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<i32> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Num(v) if v.fract() == 0.0 && v.abs() <= 1e6 => {
                self.bump();
                Ok(v as i32)
            }
            Tok::Num(_) => Err(Error::Syntax {
                pos,
                msg: "exponent must be an integer".into(),
            }),
            _ => Err(self.unexpected("expected integer exponent")),
        }
    }

    fn base(&mut self) -> Result<Expr> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::num(v))
            }
            Tok::Sym('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                let func = match name.as_str() {
                    "pi" => return Ok(Expr::num(std::f64::consts::PI)),
                    "x" => return Ok(Expr::var(Var::X)),
                    "y" => return Ok(Expr::var(Var::Y)),
                    "z" => return Ok(Expr::var(Var::Z)),
                    "t" => return Ok(Expr::var(Var::T)),
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "exp" => Func::Exp,
                    _ => return Err(Error::UnknownIdentifier { pos, name }),
                };
                self.expect('(')?;
                let arg = self.expr()?;
                self.expect(')')?;
                Ok(Expr::call(func, arg))
            }
            _ => Err(self.unexpected("expected a number, variable, function or `(`")),
        }
    }

    fn finish(&self) -> Result<()> {
        match self.peek() {
            Tok::End => Ok(()),
            _ => Err(self.unexpected("expected end of input")),
        }
    }
}

/// Parses a scalar expression or a parenthesised 3-vector of expressions.
pub fn parse_components(text: &str) -> Result<Vec<Expr>> {
    let mut p = Parser {
        toks: Lexer::tokens(text)?,
        at: 0,
    };
    if *p.peek() == Tok::Sym('(') {
        p.bump();
        let first = p.expr()?;
        if p.eat(',') {
            let second = p.expr()?;
            p.expect(',')?;
            let third = p.expr()?;
            p.expect(')')?;
            p.finish()?;
            return Ok(vec![first, second, third]);
        }
        // Not a vector: restart as a scalar expression.
        p.at = 0;
    }
    let e = p.expr()?;
    p.finish()?;
    Ok(vec![e])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval1(text: &str, v: [f64; 4]) -> f64 {
        let c = parse_components(text).unwrap();
        assert_eq!(c.len(), 1);
        c[0].eval(&v)
    }

    #[test]
    fn precedence() {
        assert_eq!(eval1("x^2 + y", [1.0, 2.0, 3.0, 0.0]), 3.0);
        assert_eq!(eval1("2*3+4", [0.0; 4]), 10.0);
        assert_eq!(eval1("-x^2", [3.0, 0.0, 0.0, 0.0]), -9.0);
        assert_eq!(eval1("8/2/2", [0.0; 4]), 2.0);
        assert_eq!(eval1("1.5e1 - t", [0.0, 0.0, 0.0, 5.0]), 10.0);
        assert_eq!(eval1("x^(-2)", [2.0, 0.0, 0.0, 0.0]), 0.25);
    }

    #[test]
    fn syntax_error_position() {
        match parse_components("x +") {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_components("(x, y)"), Err(Error::Syntax { pos: 5, .. })));
        assert!(matches!(parse_components("x y"), Err(Error::Syntax { pos: 2, .. })));
    }

    #[test]
    fn unknown_identifier() {
        assert!(matches!(
            parse_components("sinh(x)"),
            Err(Error::UnknownIdentifier { pos: 0, .. })
        ));
        assert!(matches!(
            parse_components("x + w"),
            Err(Error::UnknownIdentifier { pos: 4, .. })
        ));
    }

    #[test]
    fn division_by_constant_zero() {
        assert!(matches!(parse_components("x / (1 - 1)"), Err(Error::DivisionByZero(4))));
        assert!(parse_components("x / (1 - y)").is_ok());
    }

    #[test]
    fn vector_and_parenthesised_scalar() {
        let v = parse_components("(sin(pi*x)*sin(pi*y)*sin(pi*z), 0, 0)").unwrap();
        assert_eq!(v.len(), 3);
        for p in [[0.0, 0.3, 0.4, 0.0], [1.0, 0.5, 0.5, 0.0], [0.2, 0.3, 1.0, 0.0]] {
            assert!(v[0].eval(&p).abs() < 1e-15);
        }
        let s = parse_components("(x + 1) * 2").unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].eval(&[1.0, 0.0, 0.0, 0.0]), 4.0);
    }
}
