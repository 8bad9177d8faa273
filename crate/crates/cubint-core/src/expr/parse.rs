//! Infix expression parser. `^` for powers, `sqrt`/`sin`/`cos` functions,
//! names like `x1 x2 r th xi eta u v hbar sigma A300 .. A003`.
//! The printer and parser round-trip exactly on normalized expressions.

use super::Expr;
use crate::rat::Rat;
use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use num_bigint::BigInt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub at: usize,
    pub message: String,
}

impl core::fmt::Display for ParseError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "parse error at byte {}: {}", self.at, self.message)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let mut toks = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                toks.push((i, Tok::Plus));
                i += 1;
            }
            '-' => {
                toks.push((i, Tok::Minus));
                i += 1;
            }
            '*' => {
                toks.push((i, Tok::Star));
                i += 1;
            }
            '/' => {
                toks.push((i, Tok::Slash));
                i += 1;
            }
            '^' => {
                toks.push((i, Tok::Caret));
                i += 1;
            }
            '(' => {
                toks.push((i, Tok::LParen));
                i += 1;
            }
            ')' => {
                toks.push((i, Tok::RParen));
                i += 1;
            }
            ',' => {
                toks.push((i, Tok::Comma));
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = src[start..i].parse().map_err(|_| ParseError {
                    at: start,
                    message: "bad integer".to_string(),
                })?;
                toks.push((start, Tok::Int(n)));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                toks.push((start, Tok::Ident(src[start..i].to_string())));
            }
            _ => {
                return Err(ParseError {
                    at: i,
                    message: alloc::format!("unexpected character `{c}`"),
                })
            }
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }
    fn at(&self) -> usize {
        self.toks.get(self.pos).map(|(i, _)| *i).unwrap_or(usize::MAX)
    }
    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }
    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(ParseError {
                at: self.at(),
                message: alloc::format!("expected {t:?}"),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = lhs + rhs;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = lhs - rhs;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    lhs = lhs * rhs;
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    lhs = lhs / rhs;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            let e = self.unary()?;
            Ok(-e)
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let exp = self.exponent()?;
            Ok(Expr::Pow(Box::new(base), exp))
        } else {
            Ok(base)
        }
    }

    /// Exponent forms: `2`, `-3`, `(1/2)`, `(-3/2)`.
    fn exponent(&mut self) -> Result<Rat, ParseError> {
        let at = self.at();
        let negate = if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            true
        } else {
            false
        };
        let r = match self.bump() {
            Some(Tok::Int(n)) => Rat::from_integer(n),
            Some(Tok::LParen) => {
                let inner_neg = if self.peek() == Some(&Tok::Minus) {
                    self.pos += 1;
                    true
                } else {
                    false
                };
                let num = match self.bump() {
                    Some(Tok::Int(n)) => n,
                    _ => {
                        return Err(ParseError {
                            at,
                            message: "expected rational exponent".to_string(),
                        })
                    }
                };
                let r = if self.peek() == Some(&Tok::Slash) {
                    self.pos += 1;
                    let den = match self.bump() {
                        Some(Tok::Int(d)) => d,
                        _ => {
                            return Err(ParseError {
                                at,
                                message: "expected exponent denominator".to_string(),
                            })
                        }
                    };
                    Rat::new(num, den)
                } else {
                    Rat::from_integer(num)
                };
                self.expect(Tok::RParen)?;
                if inner_neg {
                    -r
                } else {
                    r
                }
            }
            _ => {
                return Err(ParseError {
                    at,
                    message: "expected exponent".to_string(),
                })
            }
        };
        Ok(if negate { -r } else { r })
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let at = self.at();
        match self.bump() {
            Some(Tok::Int(n)) => Ok(Expr::Num(Rat::from_integer(n))),
            Some(Tok::Ident(name)) => {
                if self.peek() == Some(&Tok::LParen)
                    && matches!(name.as_str(), "sin" | "cos" | "sqrt")
                {
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen)?;
                    Ok(match name.as_str() {
                        "sin" => arg.sin(),
                        "cos" => arg.cos(),
                        _ => arg.sqrt(),
                    })
                } else {
                    Ok(Expr::sym(&name))
                }
            }
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            _ => Err(ParseError {
                at,
                message: "expected an atom".to_string(),
            }),
        }
    }
}

/// Parse expression text; the result is normalized.
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(ParseError {
            at: p.at(),
            message: "trailing input".to_string(),
        });
    }
    Ok(e.normalize())
}
