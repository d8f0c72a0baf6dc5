use std::fmt;

use num_traits::{One, Zero};

use super::RationalTerm;
use crate::padic::{valuation, Prime, Valuation};
use crate::schwartz::psi;
use crate::{Error, ExactComplex, Rat, Result};

/// A generator of the expression algebra.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Atom {
    /// `|t|^s`.
    Abs(RationalTerm, i64),
    /// `(ord t)^k`.
    Ord(RationalTerm, u32),
    /// `ψ(t)`.
    Psi(RationalTerm),
    /// `p^{-α}` with `α = Σ ord t_i` over the `t_i` with `0 < |t_i| <= 1`;
    /// terms that vanish or have a pole at the point are skipped.
    Damp(Vec<RationalTerm>),
}

impl Atom {
    pub fn arity(&self) -> usize {
        match self {
            Atom::Abs(t, _) | Atom::Ord(t, _) | Atom::Psi(t) => t.arity(),
            Atom::Damp(ts) => ts.iter().map(RationalTerm::arity).max().unwrap_or(0),
        }
    }

    pub fn subst(&self, vals: &[RationalTerm]) -> Atom {
        match self {
            Atom::Abs(t, s) => Atom::Abs(t.subst(vals), *s),
            Atom::Ord(t, k) => Atom::Ord(t.subst(vals), *k),
            Atom::Psi(t) => Atom::Psi(t.subst(vals)),
            Atom::Damp(ts) => Atom::Damp(ts.iter().map(|t| t.subst(vals)).collect()),
        }
    }

    pub fn eval(&self, x: &[Rat], p: Prime) -> Result<ExactComplex> {
        match self {
            Atom::Abs(t, s) => {
                let v = t.eval(x)?;
                Ok(ExactComplex::from_rat(p, abs_power(&v, *s, p, t)?))
            }
            Atom::Ord(t, k) => {
                let v = t.eval(x)?;
                match valuation(&v, p) {
                    Valuation::Finite(o) => {
                        Ok(ExactComplex::from_rat(p, Rat::from_integer(o.pow(*k).into())))
                    }
                    Valuation::Infinite => Err(Error::NotInDomain(format!("ord of zero: {t}"))),
                }
            }
            Atom::Psi(t) => psi(&t.eval(x)?, p),
            Atom::Damp(ts) => {
                let mut alpha = 0i64;
                for t in ts {
                    if let Ok(v) = t.eval(x) {
                        if let Valuation::Finite(o) = valuation(&v, p) {
                            if o >= 0 {
                                alpha += o;
                            }
                        }
                    }
                }
                Ok(ExactComplex::from_rat(p, p.rpow(-alpha)))
            }
        }
    }
}

fn abs_power(v: &Rat, s: i64, p: Prime, t: &RationalTerm) -> Result<Rat> {
    match valuation(v, p) {
        Valuation::Finite(o) => Ok(p.rpow(-o * s)),
        Valuation::Infinite if s > 0 => Ok(Rat::zero()),
        Valuation::Infinite if s == 0 => Ok(Rat::one()),
        Valuation::Infinite => Err(Error::NotInDomain(format!("negative power of |{t}| at zero"))),
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Abs(t, 1) => write!(f, "abs({t})"),
            Atom::Abs(t, s) if *s < 0 => write!(f, "abs({t})^({s})"),
            Atom::Abs(t, s) => write!(f, "abs({t})^{s}"),
            Atom::Ord(t, 1) => write!(f, "ord({t})"),
            Atom::Ord(t, k) => write!(f, "ord({t})^{k}"),
            Atom::Psi(t) => write!(f, "psi({t})"),
            Atom::Damp(ts) => {
                let parts: Vec<String> = ts.iter().map(ToString::to_string).collect();
                write!(f, "damp({})", parts.join(", "))
            }
        }
    }
}

/// `coeff · Π atoms`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Product {
    pub coeff: ExactComplex,
    pub atoms: Vec<Atom>,
}

impl Product {
    pub fn eval(&self, x: &[Rat], p: Prime) -> Result<ExactComplex> {
        let mut acc = self.coeff.clone();
        for a in &self.atoms {
            let v = a.eval(x, p)?;
            acc = &acc * &v;
        }
        Ok(acc)
    }

    fn mul(&self, other: &Product) -> Product {
        let mut atoms = self.atoms.clone();
        for a in &other.atoms {
            push_atom(&mut atoms, a.clone());
        }
        Product {
            coeff: &self.coeff * &other.coeff,
            atoms,
        }
    }
}

/// Appends an atom, merging powers of equal `abs`/`ord` arguments.
fn push_atom(atoms: &mut Vec<Atom>, a: Atom) {
    for existing in atoms.iter_mut() {
        match (existing, &a) {
            (Atom::Abs(t1, s1), Atom::Abs(t2, s2)) if t1 == t2 => {
                *s1 += s2;
                return;
            }
            (Atom::Ord(t1, k1), Atom::Ord(t2, k2)) if t1 == t2 => {
                *k1 += k2;
                return;
            }
            _ => {}
        }
    }
    atoms.push(a);
}

/// A finite sum of products of generators with cyclotomic coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CexpExpr {
    p: Prime,
    terms: Vec<Product>,
}

impl CexpExpr {
    pub fn zero(p: Prime) -> Self {
        CexpExpr { p, terms: vec![] }
    }

    pub fn constant(c: ExactComplex) -> Self {
        let p = c.p();
        if c.is_zero() {
            return CexpExpr::zero(p);
        }
        CexpExpr {
            p,
            terms: vec![Product {
                coeff: c,
                atoms: vec![],
            }],
        }
    }

    pub fn atom(p: Prime, a: Atom) -> Self {
        CexpExpr {
            p,
            terms: vec![Product {
                coeff: ExactComplex::one(p),
                atoms: vec![a],
            }],
        }
    }

    pub fn from_products(p: Prime, terms: Vec<Product>) -> Self {
        CexpExpr {
            p,
            terms: terms.into_iter().filter(|t| !t.coeff.is_zero()).collect(),
        }
    }

    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn products(&self) -> &[Product] {
        &self.terms
    }

    pub fn is_zero_expr(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of variables referenced.
    pub fn arity(&self) -> usize {
        self.terms
            .iter()
            .flat_map(|t| t.atoms.iter().map(Atom::arity))
            .max()
            .unwrap_or(0)
    }

    /// The constant value when there are no generators.
    pub fn as_constant(&self) -> Option<ExactComplex> {
        let mut acc = ExactComplex::zero(self.p);
        for t in &self.terms {
            if !t.atoms.is_empty() {
                return None;
            }
            acc += &t.coeff;
        }
        Some(acc)
    }

    pub fn add(&self, other: &CexpExpr) -> CexpExpr {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        CexpExpr::from_products(self.p, terms)
    }

    pub fn mul(&self, other: &CexpExpr) -> CexpExpr {
        let mut terms = Vec::new();
        for a in &self.terms {
            for b in &other.terms {
                terms.push(a.mul(b));
            }
        }
        CexpExpr::from_products(self.p, terms)
    }

    pub fn scale(&self, c: &ExactComplex) -> CexpExpr {
        let terms = self
            .terms
            .iter()
            .map(|t| Product {
                coeff: &t.coeff * c,
                atoms: t.atoms.clone(),
            })
            .collect();
        CexpExpr::from_products(self.p, terms)
    }

    pub fn neg(&self) -> CexpExpr {
        self.scale(&ExactComplex::from_int(self.p, -1))
    }

    pub fn eval(&self, x: &[Rat]) -> Result<ExactComplex> {
        let mut acc = ExactComplex::zero(self.p);
        for t in &self.terms {
            acc += &t.eval(x, self.p)?;
        }
        Ok(acc)
    }

    /// Substitutes `x_{i+1} ↦ vals[i]` in every generator.
    pub fn subst(&self, vals: &[RationalTerm]) -> CexpExpr {
        let terms = self
            .terms
            .iter()
            .map(|t| Product {
                coeff: t.coeff.clone(),
                atoms: t.atoms.iter().map(|a| a.subst(vals)).collect(),
            })
            .collect();
        CexpExpr { p: self.p, terms }
    }

    /// Multiplicative inverse of a single product whose generators are all
    /// `abs` or `psi` atoms.
    pub fn try_inverse(&self) -> Option<CexpExpr> {
        let [t] = self.terms.as_slice() else {
            return None;
        };
        let mut atoms = Vec::new();
        for a in &t.atoms {
            atoms.push(match a {
                Atom::Abs(u, s) => Atom::Abs(u.clone(), -s),
                Atom::Psi(u) => Atom::Psi(u.clone().neg()),
                _ => return None,
            });
        }
        Some(CexpExpr {
            p: self.p,
            terms: vec![Product {
                coeff: t.coeff.inv().ok()?,
                atoms,
            }],
        })
    }
}

impl fmt::Display for CexpExpr {
    /// Canonical serialization, accepted by [`super::parse`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let mut factors: Vec<String> = Vec::new();
            let plain = t.coeff.as_rational().filter(|q| q.is_integer() && *q >= Rat::zero());
            match plain {
                Some(q) if q.is_one() && !t.atoms.is_empty() => {}
                Some(q) => factors.push(q.to_string()),
                None => factors.push(format!("({})", t.coeff)),
            }
            factors.extend(t.atoms.iter().map(ToString::to_string));
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}
