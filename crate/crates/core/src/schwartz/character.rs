use crate::padic::{residue, valuation, Prime, Valuation};
use crate::{ExactComplex, Rat, Result};

/// The additive character `ψ(x) = exp(2πi·{x/p}_p)`, trivial on `pZ_p` and
/// nontrivial on `Z_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Character {
    pub p: Prime,
}

impl Character {
    pub fn new(p: Prime) -> Self {
        Character { p }
    }

    pub fn eval(&self, x: &Rat) -> Result<ExactComplex> {
        psi(x, self.p)
    }
}

/// `(s, a)` with `ψ(x) = ζ_{p^s}^a`, `0 <= a < p^s`.
pub fn psi_exponent(x: &Rat, p: Prime) -> (u32, u64) {
    let y = x / Rat::from_integer(p.big());
    match valuation(&y, p) {
        Valuation::Finite(v) if v < 0 => {
            let s = (-v) as u32;
            let scaled = y * p.rpow(s as i64);
            let a = residue(&scaled, p, s);
            let a = crate::padic::to_u64(&a).expect("residue fits in u64");
            (s, a)
        }
        _ => (0, 0),
    }
}

pub fn psi(x: &Rat, p: Prime) -> Result<ExactComplex> {
    let (s, a) = psi_exponent(x, p);
    ExactComplex::zeta(p, s, a as i64)
}
