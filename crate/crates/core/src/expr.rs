//! Arithmetic expressions in the coordinates `x1, x2, x3`.
//!
//! Grammar: `+ - * / ^`, unary minus, parentheses, numbers, `pi`, and the
//! functions `exp`, `sin`, `cos`. `^` is right associative.

use crate::error::{Error, Result};
use crate::point::Point;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Bin(Op, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Sin,
    Cos,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

fn lex(src: &str) -> Result<Vec<Tok>> {
    let mut out = vec![];
    let cs: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < cs.len() && (cs[i].is_ascii_digit() || cs[i] == '.') {
                i += 1;
            }
            // exponent part, e.g. 1e-3
            if i < cs.len() && (cs[i] == 'e' || cs[i] == 'E') {
                let mut j = i + 1;
                if j < cs.len() && (cs[j] == '+' || cs[j] == '-') {
                    j += 1;
                }
                if j < cs.len() && cs[j].is_ascii_digit() {
                    i = j;
                    while i < cs.len() && cs[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = cs[start..i].iter().collect();
            out.push(Tok::Num(s.parse().map_err(|_| Error::Config(format!("bad number '{s}'")))?));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < cs.len() && cs[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push(Tok::Ident(cs[start..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Sym(c));
            i += 1;
        } else {
            return Err(Error::Config(format!("unexpected character '{c}' in expression")));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
    dim: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut lhs = self.product()?;
        loop {
            let op = if self.eat('+') {
                Op::Add
            } else if self.eat('-') {
                Op::Sub
            } else {
                return Ok(lhs);
            };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.product()?));
        }
    }

    fn product(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                Op::Mul
            } else if self.eat('/') {
                Op::Div
            } else {
                return Ok(lhs);
            };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat('^') {
            return Ok(Expr::Bin(Op::Pow, Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let tok = self.peek().cloned().ok_or_else(|| Error::Config("expression ends unexpectedly".into()))?;
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::Sym('(') => {
                let e = self.sum()?;
                if !self.eat(')') {
                    return Err(Error::Config("missing ')'".into()));
                }
                Ok(e)
            }
            Tok::Ident(name) => {
                let func = match name.as_str() {
                    "exp" => Some(Func::Exp),
                    "sin" => Some(Func::Sin),
                    "cos" => Some(Func::Cos),
                    _ => None,
                };
                if let Some(f) = func {
                    if !self.eat('(') {
                        return Err(Error::Config(format!("'{name}' needs an argument in parentheses")));
                    }
                    let arg = self.sum()?;
                    if !self.eat(')') {
                        return Err(Error::Config("missing ')'".into()));
                    }
                    return Ok(Expr::Call(f, Box::new(arg)));
                }
                if name == "pi" {
                    return Ok(Expr::Num(std::f64::consts::PI));
                }
                match name.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
                    Some(i) if (1..=self.dim).contains(&i) => Ok(Expr::Var(i - 1)),
                    _ => Err(Error::Config(format!("unknown identifier '{name}'"))),
                }
            }
            Tok::Sym(c) => Err(Error::Config(format!("unexpected '{c}'"))),
        }
    }
}

impl Expr {
    /// Parses `src` allowing the variables `x1 .. x{dim}`.
    pub fn parse(src: &str, dim: usize) -> Result<Expr> {
        let mut p = Parser { toks: lex(src)?, pos: 0, dim };
        let e = p.sum()?;
        if p.pos != p.toks.len() {
            return Err(Error::Config(format!("trailing input in expression '{src}'")));
        }
        Ok(e)
    }

    pub fn eval(&self, x: &Point) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => x[*i],
            Expr::Neg(e) => -e.eval(x),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                match op {
                    Op::Add => a + b,
                    Op::Sub => a - b,
                    Op::Mul => a * b,
                    Op::Div => a / b,
                    Op::Pow => a.powf(b),
                }
            }
            Expr::Call(f, e) => {
                let v = e.eval(x);
                match f {
                    Func::Exp => v.exp(),
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, x: Point) -> f64 {
        Expr::parse(s, 3).unwrap().eval(&x)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1 + 2 * 3", [0.0; 3]), 7.0);
        assert_eq!(ev("2 ^ 3 ^ 2", [0.0; 3]), 512.0);
        assert_eq!(ev("-2 ^ 2", [0.0; 3]), -4.0);
        assert_eq!(ev("8 / 4 / 2", [0.0; 3]), 1.0);
        assert_eq!(ev("(1 - x1) * x2 - x3", [0.5, 4.0, 1.0]), 1.0);
        assert_eq!(ev("1.5e-1 * 2", [0.0; 3]), 0.3);
    }

    #[test]
    fn functions() {
        let v = ev("exp(-x1^2) + sin(pi / 2) + cos(0)", [1.0, 0.0, 0.0]);
        assert!((v - ((-1f64).exp() + 2.0)).abs() < 1e-15);
    }

    #[test]
    fn errors_are_config_errors() {
        for bad in ["1 +", "x4", "sqrt(2)", "(1", "2 $ 3", "exp 2", "1 2"] {
            let e = Expr::parse(bad, 3).unwrap_err();
            assert!(e.is_config_error(), "{bad}");
        }
        assert!(Expr::parse("x3", 2).is_err());
    }
}
