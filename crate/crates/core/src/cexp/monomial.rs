use num_traits::One;

use super::{Atom, CexpExpr, Product, RationalTerm};
use crate::padic::{valuation, Prime, Valuation};
use crate::poly::Poly;
use crate::{Error, ExactComplex, Rat, Result};

/// The normal form
/// `c·ψ(u(x)·M(x)^{η1})·Π|x_i|^{η2·s_i}·(ord x_i)^{t_i}` on `(Z_p \ {0})^m`,
/// with `u` a polynomial unit (`u(0)` a unit, `u ≡ u(0) mod p`) and
/// `M = d·x^μ` a monomial.
#[derive(Debug, Clone, PartialEq)]
pub struct CexpMonomialData {
    pub c: ExactComplex,
    pub unit: Poly,
    pub d: Rat,
    pub mu: Vec<u32>,
    pub eta1: i8,
    pub eta2: i8,
    pub s: Vec<u32>,
    pub t: Vec<u32>,
}

impl CexpMonomialData {
    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    /// Checks the unit and monomial hypotheses.
    pub fn validate(&self, p: Prime) -> Result<()> {
        let m = self.dim();
        if self.s.len() != m || self.t.len() != m || self.unit.nvars() > m {
            return Err(Error::DimensionMismatch(m, self.s.len()));
        }
        if ![1, -1].contains(&self.eta1) || ![1, -1].contains(&self.eta2) {
            return Err(Error::HypothesisViolated("signs must be ±1".into()));
        }
        if valuation(&self.unit.constant_term(), p) != Valuation::Finite(0) {
            return Err(Error::HypothesisViolated("u(0) is not a unit".into()));
        }
        let tail = &self.unit - &Poly::constant(self.unit.nvars(), self.unit.constant_term());
        if tail.terms().any(|(_, c)| !valuation(c, p).at_least(1)) {
            return Err(Error::HypothesisViolated("u is not constant mod p".into()));
        }
        if !valuation(&self.d, p).at_least(0) || valuation(&self.d, p).is_infinite() {
            return Err(Error::HypothesisViolated("d must be a nonzero element of Z_p".into()));
        }
        Ok(())
    }

    /// The same function as an expression.
    pub fn to_expr(&self, p: Prime) -> CexpExpr {
        let m = self.dim();
        let mut monomial = RationalTerm::constant(self.d.clone());
        for (i, &k) in self.mu.iter().enumerate() {
            if k > 0 {
                monomial = monomial.mul(RationalTerm::var(i).pow(k as i64));
            }
        }
        let unit = RationalTerm::from_poly(&self.unit.widen(m));
        let phase = if self.eta1 == 1 {
            unit.mul(monomial)
        } else {
            unit.div(monomial)
        };
        let mut atoms = vec![Atom::Psi(phase)];
        for i in 0..m {
            if self.s[i] > 0 {
                atoms.push(Atom::Abs(RationalTerm::var(i), self.eta2 as i64 * self.s[i] as i64));
            }
            if self.t[i] > 0 {
                atoms.push(Atom::Ord(RationalTerm::var(i), self.t[i]));
            }
        }
        CexpExpr::from_products(
            p,
            vec![Product {
                coeff: self.c.clone(),
                atoms,
            }],
        )
    }

    /// `|x|^s` on `m` variables with trivial phase.
    pub fn abs_power(p: Prime, m: usize, s: Vec<u32>) -> Self {
        CexpMonomialData {
            c: ExactComplex::one(p),
            unit: Poly::one(m),
            d: Rat::one(),
            mu: vec![0; m],
            eta1: 1,
            eta2: 1,
            s,
            t: vec![0; m],
        }
    }
}
