use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::padic::fmt_rat;
use crate::poly::Poly;
use crate::{Error, Rat, Result};

/// A rational function of `x1, x2, …` as an expression tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RationalTerm {
    Const(Rat),
    /// Zero-based variable index: `Var(0)` is `x1`.
    Var(usize),
    Neg(Box<RationalTerm>),
    Add(Box<RationalTerm>, Box<RationalTerm>),
    Sub(Box<RationalTerm>, Box<RationalTerm>),
    Mul(Box<RationalTerm>, Box<RationalTerm>),
    Div(Box<RationalTerm>, Box<RationalTerm>),
    Pow(Box<RationalTerm>, i64),
}

impl RationalTerm {
    pub fn constant(c: Rat) -> Self {
        RationalTerm::Const(c)
    }

    pub fn int(n: i64) -> Self {
        RationalTerm::Const(Rat::from_integer(n.into()))
    }

    pub fn var(i: usize) -> Self {
        RationalTerm::Var(i)
    }

    pub fn neg(self) -> Self {
        RationalTerm::Neg(Box::new(self))
    }

    pub fn add(self, o: RationalTerm) -> Self {
        RationalTerm::Add(Box::new(self), Box::new(o))
    }

    pub fn sub(self, o: RationalTerm) -> Self {
        RationalTerm::Sub(Box::new(self), Box::new(o))
    }

    pub fn mul(self, o: RationalTerm) -> Self {
        RationalTerm::Mul(Box::new(self), Box::new(o))
    }

    pub fn div(self, o: RationalTerm) -> Self {
        RationalTerm::Div(Box::new(self), Box::new(o))
    }

    pub fn pow(self, k: i64) -> Self {
        RationalTerm::Pow(Box::new(self), k)
    }

    /// Substitutes `x_{i+1} ↦ vals[i]`.
    pub fn subst(&self, vals: &[RationalTerm]) -> RationalTerm {
        let b = |t: &RationalTerm| Box::new(t.subst(vals));
        match self {
            RationalTerm::Const(_) => self.clone(),
            RationalTerm::Var(i) => vals.get(*i).cloned().unwrap_or_else(|| self.clone()),
            RationalTerm::Neg(a) => RationalTerm::Neg(b(a)),
            RationalTerm::Add(x, y) => RationalTerm::Add(b(x), b(y)),
            RationalTerm::Sub(x, y) => RationalTerm::Sub(b(x), b(y)),
            RationalTerm::Mul(x, y) => RationalTerm::Mul(b(x), b(y)),
            RationalTerm::Div(x, y) => RationalTerm::Div(b(x), b(y)),
            RationalTerm::Pow(a, k) => RationalTerm::Pow(b(a), *k),
        }
    }

    /// Number of variables referenced (highest index plus one).
    pub fn arity(&self) -> usize {
        match self {
            RationalTerm::Const(_) => 0,
            RationalTerm::Var(i) => i + 1,
            RationalTerm::Neg(a) | RationalTerm::Pow(a, _) => a.arity(),
            RationalTerm::Add(a, b)
            | RationalTerm::Sub(a, b)
            | RationalTerm::Mul(a, b)
            | RationalTerm::Div(a, b) => a.arity().max(b.arity()),
        }
    }

    /// Exact value; division by zero is a domain error.
    pub fn eval(&self, x: &[Rat]) -> Result<Rat> {
        Ok(match self {
            RationalTerm::Const(c) => c.clone(),
            RationalTerm::Var(i) => x
                .get(*i)
                .cloned()
                .ok_or_else(|| Error::NotInDomain(format!("x{} is not bound", i + 1)))?,
            RationalTerm::Neg(a) => -a.eval(x)?,
            RationalTerm::Add(a, b) => a.eval(x)? + b.eval(x)?,
            RationalTerm::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            RationalTerm::Mul(a, b) => a.eval(x)? * b.eval(x)?,
            RationalTerm::Div(a, b) => {
                let d = b.eval(x)?;
                if d.is_zero() {
                    return Err(Error::NotInDomain(format!("pole of {self}")));
                }
                a.eval(x)? / d
            }
            RationalTerm::Pow(a, k) => {
                let v = a.eval(x)?;
                if *k < 0 && v.is_zero() {
                    return Err(Error::NotInDomain(format!("pole of {self}")));
                }
                num_traits::pow::Pow::pow(v, *k as i32)
            }
        })
    }

    /// Numerator and denominator polynomials in `nvars` variables, with the
    /// common monomial factor removed and constant denominators cleared.
    pub fn to_fraction(&self, nvars: usize) -> Result<(Poly, Poly)> {
        let (num, den) = self.fraction_raw(nvars)?;
        Ok(simplify(num, den))
    }

    fn fraction_raw(&self, n: usize) -> Result<(Poly, Poly)> {
        Ok(match self {
            RationalTerm::Const(c) => (Poly::constant(n, c.clone()), Poly::one(n)),
            RationalTerm::Var(i) => (Poly::var(*i, n), Poly::one(n)),
            RationalTerm::Neg(a) => {
                let (p, q) = a.fraction_raw(n)?;
                (-&p, q)
            }
            RationalTerm::Add(a, b) | RationalTerm::Sub(a, b) => {
                let (p1, q1) = a.fraction_raw(n)?;
                let (p2, q2) = b.fraction_raw(n)?;
                let left = &p1 * &q2;
                let right = &p2 * &q1;
                let num = if matches!(self, RationalTerm::Add(..)) {
                    &left + &right
                } else {
                    &left - &right
                };
                simplify(num, &q1 * &q2)
            }
            RationalTerm::Mul(a, b) => {
                let (p1, q1) = a.fraction_raw(n)?;
                let (p2, q2) = b.fraction_raw(n)?;
                simplify(&p1 * &p2, &q1 * &q2)
            }
            RationalTerm::Div(a, b) => {
                let (p1, q1) = a.fraction_raw(n)?;
                let (p2, q2) = b.fraction_raw(n)?;
                if p2.is_zero() {
                    return Err(Error::NotInDomain(format!("{self} divides by zero")));
                }
                simplify(&p1 * &q2, &q1 * &p2)
            }
            RationalTerm::Pow(a, k) => {
                let (p, q) = a.fraction_raw(n)?;
                let e = k.unsigned_abs() as u32;
                if *k >= 0 {
                    (p.pow(e), q.pow(e))
                } else {
                    if p.is_zero() {
                        return Err(Error::NotInDomain(format!("{self} divides by zero")));
                    }
                    (q.pow(e), p.pow(e))
                }
            }
        })
    }

    /// Builds a term from a polynomial.
    pub fn from_poly(p: &Poly) -> RationalTerm {
        let mut acc: Option<RationalTerm> = None;
        for (e, c) in p.terms() {
            let mut t: Option<RationalTerm> = None;
            if !c.abs().is_one() || e.iter().all(|&k| k == 0) {
                t = Some(RationalTerm::Const(c.abs()));
            }
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let f = if k == 1 {
                    RationalTerm::Var(i)
                } else {
                    RationalTerm::Var(i).pow(k as i64)
                };
                t = Some(match t {
                    None => f,
                    Some(t) => t.mul(f),
                });
            }
            let t = t.expect("nonempty monomial");
            acc = Some(match (acc, c.is_negative()) {
                (None, false) => t,
                (None, true) => t.neg(),
                (Some(a), false) => a.add(t),
                (Some(a), true) => a.sub(t),
            });
        }
        acc.unwrap_or_else(|| RationalTerm::int(0))
    }

    pub fn from_fraction(num: &Poly, den: &Poly) -> RationalTerm {
        let n = RationalTerm::from_poly(num);
        match den.as_constant() {
            Some(c) if c.is_one() => n,
            _ => n.div(RationalTerm::from_poly(den)),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            RationalTerm::Add(..) | RationalTerm::Sub(..) => 1,
            RationalTerm::Mul(..) | RationalTerm::Div(..) => 2,
            RationalTerm::Neg(_) => 3,
            RationalTerm::Pow(..) => 4,
            RationalTerm::Const(c) if c.is_negative() || !c.is_integer() => 2,
            RationalTerm::Const(_) | RationalTerm::Var(_) => 5,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let prec = self.precedence();
        if prec < min {
            write!(f, "(")?;
        }
        match self {
            RationalTerm::Const(c) => write!(f, "{}", fmt_rat(c))?,
            RationalTerm::Var(i) => write!(f, "x{}", i + 1)?,
            RationalTerm::Neg(a) => {
                write!(f, "-")?;
                a.fmt_prec(f, 4)?;
            }
            RationalTerm::Add(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " + ")?;
                b.fmt_prec(f, 2)?;
            }
            RationalTerm::Sub(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " - ")?;
                b.fmt_prec(f, 2)?;
            }
            RationalTerm::Mul(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, "*")?;
                b.fmt_prec(f, 3)?;
            }
            RationalTerm::Div(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, "/")?;
                b.fmt_prec(f, 3)?;
            }
            RationalTerm::Pow(a, k) => {
                a.fmt_prec(f, 5)?;
                if *k < 0 {
                    write!(f, "^({k})")?;
                } else {
                    write!(f, "^{k}")?;
                }
            }
        }
        if prec < min {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for RationalTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// Cancels the common monomial factor and a constant denominator.
fn simplify(num: Poly, den: Poly) -> (Poly, Poly) {
    let n = num.nvars().max(den.nvars());
    let (num, den) = (num.widen(n), den.widen(n));
    if num.is_zero() {
        return (num, Poly::one(n));
    }
    let mut common: Vec<u32> = vec![u32::MAX; n];
    for (e, _) in num.terms().chain(den.terms()) {
        for (c, &k) in common.iter_mut().zip(e) {
            *c = (*c).min(k);
        }
    }
    let (num, den) = if common.iter().any(|&c| c > 0 && c != u32::MAX) {
        let strip = |p: &Poly| {
            Poly::from_terms(
                n,
                p.terms().map(|(e, c)| {
                    (e.iter().zip(&common).map(|(k, m)| k - m).collect(), c.clone())
                }),
            )
        };
        (strip(&num), strip(&den))
    } else {
        (num, den)
    };
    match den.as_constant() {
        Some(c) if !c.is_one() => {
            let inv = c.recip();
            (num.scale(&inv), Poly::one(n))
        }
        _ => (num, den),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::{rat, rat_frac};

    #[test]
    fn eval_and_poles() {
        let t = RationalTerm::int(1).div(RationalTerm::var(0));
        assert_eq!(t.eval(&[rat(4)]).unwrap(), rat_frac(1, 4));
        assert!(matches!(t.eval(&[rat(0)]), Err(Error::NotInDomain(_))));
        let u = RationalTerm::var(0).pow(-2);
        assert_eq!(u.eval(&[rat(3)]).unwrap(), rat_frac(1, 9));
    }

    #[test]
    fn fraction_form() {
        // (x1^2 * x2) / (3*x1)
        let t = RationalTerm::var(0)
            .pow(2)
            .mul(RationalTerm::var(1))
            .div(RationalTerm::int(3).mul(RationalTerm::var(0)));
        let (num, den) = t.to_fraction(2).unwrap();
        assert!(den.as_constant().unwrap().is_one());
        assert_eq!(num.to_string(), "1/3*x1*x2");
    }

    #[test]
    fn display_minimal_parens() {
        let t = RationalTerm::var(0)
            .add(RationalTerm::int(1))
            .mul(RationalTerm::var(1).pow(-1));
        assert_eq!(t.to_string(), "(x1 + 1)*x2^(-1)");
    }
}
