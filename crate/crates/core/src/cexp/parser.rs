//! Recursive-descent parser for rational terms and expressions.
//!
//! ```text
//! sum     := prod (('+' | '-') prod)*
//! prod    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' exponent)?
//! exponent:= int | '-' int | '(' '-'? int ')'
//! primary := number | ident | ident '(' sum (',' sum)* ')' | '(' sum ')'
//! ```
//!
//! Generators are `abs`, `ord`, `psi` and `damp`; constants are rationals,
//! `i` and `zeta(p^r)`. Variables `x1, x2, …` may only occur inside
//! generator arguments.

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::{Atom, CexpExpr, RationalTerm};
use crate::padic::Prime;
use crate::{Error, ExactComplex, Rat, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    LParen,
    RParen,
    Comma,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    End,
}

#[derive(Debug, Clone, Copy)]
struct Pos {
    line: usize,
    column: usize,
}

fn syntax(pos: Pos, message: impl Into<String>) -> Error {
    Error::Syntax {
        line: pos.line,
        column: pos.column,
        message: message.into(),
    }
}

fn tokenize(src: &str) -> Result<Vec<(Tok, Pos)>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut line, mut col) = (1, 1);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            col += 1;
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            out.push((Tok::Num(text.parse().expect("digits")), pos));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            out.push((Tok::Ident(text), pos));
            continue;
        }
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '+' => Tok::Plus,
            '-' | '−' => Tok::Minus,
            '*' | '·' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            _ => return Err(syntax(pos, format!("unexpected character `{c}`"))),
        };
        out.push((tok, pos));
        col += 1;
        i += 1;
    }
    out.push((Tok::End, Pos { line, column: col }));
    Ok(out)
}

#[derive(Debug, Clone)]
enum Node {
    Num(BigInt),
    Ident(String),
    Call(String, Vec<Node>),
    Neg(Box<Node>),
    Bin(char, Box<Node>, Box<Node>),
    Pow(Box<Node>, i64),
}

#[derive(Debug, Clone)]
struct Located {
    node: Node,
    pos: Pos,
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(syntax(self.pos(), format!("expected {what}")))
        }
    }

    fn sum(&mut self) -> Result<Located> {
        let mut lhs = self.prod()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => '+',
                Tok::Minus => '-',
                _ => return Ok(lhs),
            };
            let pos = self.bump().1;
            let rhs = self.prod()?;
            lhs = Located {
                node: Node::Bin(op, Box::new(lhs.node), Box::new(rhs.node)),
                pos,
            };
        }
    }

    fn prod(&mut self) -> Result<Located> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => '*',
                Tok::Slash => '/',
                _ => return Ok(lhs),
            };
            let pos = self.bump().1;
            let rhs = self.unary()?;
            lhs = Located {
                node: Node::Bin(op, Box::new(lhs.node), Box::new(rhs.node)),
                pos,
            };
        }
    }

    fn unary(&mut self) -> Result<Located> {
        if *self.peek() == Tok::Minus {
            let pos = self.bump().1;
            let inner = self.unary()?;
            return Ok(Located {
                node: Node::Neg(Box::new(inner.node)),
                pos,
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Located> {
        let base = self.primary()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let e = self.exponent()?;
        Ok(Located {
            node: Node::Pow(Box::new(base.node), e),
            pos: base.pos,
        })
    }

    fn exponent(&mut self) -> Result<i64> {
        let pos = self.pos();
        let paren = *self.peek() == Tok::LParen;
        if paren {
            self.bump();
        }
        let neg = *self.peek() == Tok::Minus;
        if neg {
            self.bump();
        }
        let (tok, npos) = self.bump();
        let Tok::Num(n) = tok else {
            return Err(syntax(npos, "expected an integer exponent"));
        };
        let n = n
            .to_i64()
            .ok_or_else(|| syntax(pos, "exponent out of range"))?;
        if paren {
            self.expect(Tok::RParen, "`)`")?;
        }
        Ok(if neg { -n } else { n })
    }

    fn primary(&mut self) -> Result<Located> {
        let (tok, pos) = self.bump();
        let node = match tok {
            Tok::Num(n) => Node::Num(n),
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    self.bump();
                    let mut args = vec![self.sum()?.node];
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        args.push(self.sum()?.node);
                    }
                    self.expect(Tok::RParen, "`)`")?;
                    Node::Call(name, args)
                } else {
                    Node::Ident(name)
                }
            }
            Tok::LParen => {
                let inner = self.sum()?;
                self.expect(Tok::RParen, "`)`")?;
                inner.node
            }
            Tok::End => return Err(syntax(pos, "unexpected end of input")),
            other => return Err(syntax(pos, format!("unexpected token {other:?}"))),
        };
        Ok(Located { node, pos })
    }
}

fn parse_node(src: &str) -> Result<Located> {
    let mut parser = Parser {
        toks: tokenize(src)?,
        at: 0,
    };
    let out = parser.sum()?;
    if *parser.peek() != Tok::End {
        return Err(syntax(parser.pos(), "trailing input"));
    }
    Ok(out)
}

fn variable_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('x')?;
    if digits.is_empty() || digits.starts_with('0') || !digits.bytes().all(|b| b.is_ascii_digit())
    {
        return None;
    }
    digits.parse::<usize>().ok().map(|k| k - 1)
}

fn to_term(node: &Node, pos: Pos) -> Result<RationalTerm> {
    Ok(match node {
        Node::Num(n) => RationalTerm::Const(Rat::from_integer(n.clone())),
        Node::Ident(name) => RationalTerm::Var(
            variable_index(name).ok_or_else(|| Error::UnknownSymbol(name.clone()))?,
        ),
        Node::Call(name, _) => {
            return Err(syntax(pos, format!("`{name}(…)` cannot appear inside a rational term")))
        }
        Node::Neg(a) => to_term(a, pos)?.neg(),
        Node::Bin(op, a, b) => {
            let (a, b) = (to_term(a, pos)?, to_term(b, pos)?);
            match op {
                '+' => a.add(b),
                '-' => a.sub(b),
                '*' => a.mul(b),
                _ => a.div(b),
            }
        }
        Node::Pow(a, k) => to_term(a, pos)?.pow(*k),
    })
}

fn to_expr(node: &Node, pos: Pos, p: Prime) -> Result<CexpExpr> {
    Ok(match node {
        Node::Num(n) => CexpExpr::constant(ExactComplex::from_rat(p, Rat::from_integer(n.clone()))),
        Node::Ident(name) if name == "i" => CexpExpr::constant(ExactComplex::i(p)),
        Node::Ident(name) if variable_index(name).is_some() => {
            return Err(syntax(
                pos,
                format!("variable `{name}` must appear inside abs, ord, psi or damp"),
            ))
        }
        Node::Ident(name) => return Err(Error::UnknownSymbol(name.clone())),
        Node::Call(name, args) => call(name, args, pos, p)?,
        Node::Neg(a) => to_expr(a, pos, p)?.neg(),
        Node::Bin(op, a, b) => {
            let (a, b) = (to_expr(a, pos, p)?, to_expr(b, pos, p)?);
            // constant subexpressions fold into a single coefficient
            if let (Some(x), Some(y), '+' | '-') = (a.as_constant(), b.as_constant(), op) {
                let v = if *op == '+' { &x + &y } else { &x - &y };
                return Ok(CexpExpr::constant(v));
            }
            match op {
                '+' => a.add(&b),
                '-' => a.add(&b.neg()),
                '*' => a.mul(&b),
                _ => {
                    let c = b
                        .as_constant()
                        .ok_or_else(|| syntax(pos, "division is only allowed by constants"))?;
                    let inv = c.inv().map_err(|_| syntax(pos, "division by zero"))?;
                    a.scale(&inv)
                }
            }
        }
        Node::Pow(a, k) => {
            if let Node::Call(name, args) = a.as_ref() {
                if name == "abs" {
                    let t = single_arg(name, args, pos)?;
                    return Ok(CexpExpr::atom(p, Atom::Abs(t, *k)));
                }
            }
            let base = to_expr(a, pos, p)?;
            let (base, k) = if *k < 0 {
                let inv = base
                    .try_inverse()
                    .ok_or_else(|| syntax(pos, "negative powers need an invertible product"))?;
                (inv, k.unsigned_abs())
            } else {
                (base, *k as u64)
            };
            let mut acc = CexpExpr::constant(ExactComplex::one(p));
            for _ in 0..k {
                acc = acc.mul(&base);
            }
            acc
        }
    })
}

fn single_arg(name: &str, args: &[Node], pos: Pos) -> Result<RationalTerm> {
    match args {
        [a] => to_term(a, pos),
        _ => Err(syntax(pos, format!("`{name}` takes one argument"))),
    }
}

fn call(name: &str, args: &[Node], pos: Pos, p: Prime) -> Result<CexpExpr> {
    Ok(match name {
        "abs" => CexpExpr::atom(p, Atom::Abs(single_arg(name, args, pos)?, 1)),
        "ord" => CexpExpr::atom(p, Atom::Ord(single_arg(name, args, pos)?, 1)),
        "psi" => CexpExpr::atom(p, Atom::Psi(single_arg(name, args, pos)?)),
        "damp" => {
            let ts = args
                .iter()
                .map(|a| to_term(a, pos))
                .collect::<Result<Vec<_>>>()?;
            CexpExpr::atom(p, Atom::Damp(ts))
        }
        "zeta" => {
            let (q, r) = match args {
                [Node::Pow(base, r)] => match base.as_ref() {
                    Node::Num(q) => (q.clone(), *r),
                    _ => return Err(syntax(pos, "expected zeta(p^r)")),
                },
                [Node::Num(q)] => (q.clone(), 1),
                _ => return Err(syntax(pos, "expected zeta(p^r)")),
            };
            if q != BigInt::from(p.get()) {
                return Err(syntax(pos, format!("zeta({q}^{r}) does not match the prime {p}")));
            }
            if r < 0 {
                return Err(syntax(pos, "negative cyclotomic level"));
            }
            CexpExpr::constant(ExactComplex::zeta(p, r as u32, 1)?)
        }
        _ => return Err(Error::UnknownSymbol(name.to_string())),
    })
}

/// Parses an expression over the prime `p`.
pub fn parse(src: &str, p: Prime) -> Result<CexpExpr> {
    let node = parse_node(src)?;
    to_expr(&node.node, node.pos, p)
}

/// Parses a rational term in `x1, x2, …`.
pub fn parse_term(src: &str) -> Result<RationalTerm> {
    let node = parse_node(src)?;
    to_term(&node.node, node.pos)
}

/// Parses a constant such as `1/2 - 3*i*zeta(5^2)^7`.
pub fn parse_constant(src: &str, p: Prime) -> Result<ExactComplex> {
    let e = parse(src, p)?;
    e.as_constant().ok_or_else(|| Error::Syntax {
        line: 1,
        column: 1,
        message: format!("`{src}` is not a constant"),
    })
}

/// Parses a rational number written with the term grammar (`-3/7`, `2^-3`).
pub fn parse_rational(src: &str) -> Result<Rat> {
    let t = parse_term(src)?;
    if t.arity() > 0 {
        return Err(Error::Syntax {
            line: 1,
            column: 1,
            message: format!("`{src}` is not a rational constant"),
        });
    }
    t.eval(&[])
}
