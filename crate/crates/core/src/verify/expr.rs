//! Arithmetic expressions over integer literals.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('×' | '*' | '÷' | '/') unary)*
//! unary  := '-' unary | atom
//! atom   := digits | '(' expr ')'
//! ```
//!
//! Whitespace between tokens is ignored. `×`/`÷` bind tighter than `+`/`-`
//! and every binary operator is left-associative.

use std::fmt;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Zero};
use thiserror::Error;

use crate::model::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
}

impl Op {
    pub fn symbol(self) -> char {
        match self {
            Op::Add => '+',
            Op::Sub => '-',
            Op::Mul => '×',
            Op::Div => '÷',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            Op::Add | Op::Sub => 1,
            Op::Mul | Op::Div => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Lit(i64),
    Neg(Box<Expr>),
    Bin(Op, Box<Expr>, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("syntax error at token {position}: {message}")]
pub struct ParseError {
    /// Zero-based index of the offending token (the token count at end of input).
    pub position: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("arithmetic overflow")]
    Overflow,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Num(i64),
    Op(Op),
    Open,
    Close,
}

fn tokenize(text: &str) -> Result<Vec<Tok>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let tok = match c {
            '0'..='9' => {
                let mut v: i64 = 0;
                while let Some(&d) = chars.peek() {
                    let Some(digit) = d.to_digit(10) else { break };
                    v = v
                        .checked_mul(10)
                        .and_then(|v| v.checked_add(digit as i64))
                        .ok_or_else(|| ParseError {
                            position: out.len(),
                            message: "integer literal too large".into(),
                        })?;
                    chars.next();
                }
                out.push(Tok::Num(v));
                continue;
            }
            '+' => Tok::Op(Op::Add),
            '-' | '−' => Tok::Op(Op::Sub),
            '×' | '*' => Tok::Op(Op::Mul),
            '÷' | '/' => Tok::Op(Op::Div),
            '(' => Tok::Open,
            ')' => Tok::Close,
            other => {
                return Err(ParseError {
                    position: out.len(),
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        chars.next();
        out.push(tok);
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            position: self.pos,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn binary(&mut self, level: u8) -> Result<Expr, ParseError> {
        let mut lhs = if level == 2 { self.unary()? } else { self.binary(2)? };
        while let Some(Tok::Op(op)) = self.peek().cloned() {
            if op.precedence() != level {
                break;
            }
            self.pos += 1;
            let rhs = if level == 2 { self.unary()? } else { self.binary(2)? };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(&Tok::Op(Op::Sub)) {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Lit(v))
            }
            Some(Tok::Open) => {
                self.pos += 1;
                let e = self.binary(1)?;
                if self.peek() != Some(&Tok::Close) {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(Tok::Close) => Err(self.err("unexpected `)`")),
            Some(Tok::Op(op)) => Err(self.err(format!("unexpected operator `{}`", op.symbol()))),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

pub fn parse_expression(text: &str) -> Result<Expr, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.binary(1)?;
    if p.pos != p.toks.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

impl Expr {
    pub fn eval(&self) -> Result<Rational, EvalError> {
        self.eval_ratio().map(Rational)
    }

    fn eval_ratio(&self) -> Result<Ratio<i64>, EvalError> {
        match self {
            Expr::Lit(v) => Ok(Ratio::from_integer(*v)),
            Expr::Neg(e) => {
                let v = e.eval_ratio()?;
                Ratio::zero().checked_sub(&v).ok_or(EvalError::Overflow)
            }
            Expr::Bin(op, a, b) => {
                let (x, y) = (a.eval_ratio()?, b.eval_ratio()?);
                match op {
                    Op::Add => x.checked_add(&y).ok_or(EvalError::Overflow),
                    Op::Sub => x.checked_sub(&y).ok_or(EvalError::Overflow),
                    Op::Mul => x.checked_mul(&y).ok_or(EvalError::Overflow),
                    Op::Div if y.is_zero() => Err(EvalError::DivisionByZero),
                    Op::Div => x.checked_div(&y).ok_or(EvalError::Overflow),
                }
            }
        }
    }

    /// Every division divides one integer by another without remainder.
    pub fn divisions_exact(&self) -> bool {
        match self {
            Expr::Lit(_) => true,
            Expr::Neg(e) => e.divisions_exact(),
            Expr::Bin(op, a, b) => {
                if !a.divisions_exact() || !b.divisions_exact() {
                    return false;
                }
                if *op != Op::Div {
                    return true;
                }
                match (a.eval_ratio(), b.eval_ratio()) {
                    (Ok(x), Ok(y)) if !y.is_zero() && x.is_integer() && y.is_integer() => {
                        (x / y).is_integer()
                    }
                    _ => false,
                }
            }
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, parent: u8, right: bool) -> fmt::Result {
        match self {
            Expr::Lit(v) => write!(f, "{v}"),
            Expr::Neg(e) => {
                f.write_str("-")?;
                e.fmt_prec(f, 3, false)
            }
            Expr::Bin(op, a, b) => {
                let p = op.precedence();
                let paren = p < parent || (right && p == parent);
                if paren {
                    f.write_str("(")?;
                }
                a.fmt_prec(f, p, false)?;
                write!(f, "{}", op.symbol())?;
                b.fmt_prec(f, p, true)?;
                if paren {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0, false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_associativity() {
        let v = |s: &str| parse_expression(s).unwrap().eval().unwrap();
        assert_eq!(v("7"), Rational::integer(7));
        assert_eq!(v("2+3×4"), Rational::integer(14));
        assert_eq!(v("8-3-2"), Rational::integer(3));
        assert_eq!(v("8÷4÷2"), Rational::integer(1));
        assert_eq!(v("(2+3)*4"), Rational::integer(20));
        assert_eq!(v("7/2"), Rational::new(7, 2));
    }

    #[test]
    fn errors_carry_token_position() {
        let e = parse_expression("3+×4").unwrap_err();
        assert_eq!(e.position, 2);
        assert_eq!(parse_expression("3+").unwrap_err().position, 2);
        assert_eq!(parse_expression("3 4").unwrap_err().position, 1);
        assert_eq!(parse_expression("").unwrap_err().position, 0);
        assert!(parse_expression("2÷0").unwrap().eval().is_err());
    }

    #[test]
    fn exact_division_check() {
        assert!(parse_expression("8÷2+1").unwrap().divisions_exact());
        assert!(!parse_expression("7÷2×4").unwrap().divisions_exact());
    }

    #[test]
    fn display_round_trips() {
        for s in ["1-(2-3)", "2×(3+4)", "8÷(4÷2)", "1+2×3-4", "-3+4"] {
            let e = parse_expression(s).unwrap();
            assert_eq!(parse_expression(&e.to_string()).unwrap(), e, "{s}");
        }
    }
}
