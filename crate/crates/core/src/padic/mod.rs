//! Exact arithmetic in `Q ⊂ Q_p`: valuations, norms, ultrametric balls and
//! finite unions of balls.
//!
//! `Q` is dense in `Q_p` and every construction here only ever inspects
//! finitely many valuations, so rationals are an exact stand-in for points
//! of `Q_p`.

mod ball;
mod clopen;
mod urysohn;

use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::{Error, Rat, Result};

pub use ball::Ball;
pub use clopen::{ClopenSet, SetOp};
pub use urysohn::{refine_partition, urysohn_clopen, UrysohnSource};

/// A validated prime number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Self> {
        if p < 2 || (2..).take_while(|d| d * d <= p).any(|d| p % d == 0) {
            return Err(Error::NotPrime(p));
        }
        Ok(Prime(p))
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }

    pub fn big(self) -> BigInt {
        BigInt::from(self.0)
    }

    /// `p^e` as an integer, `e >= 0`.
    pub fn pow(self, e: u32) -> BigInt {
        num_traits::pow(self.big(), e as usize)
    }

    /// `p^e` as a rational for any integer `e`.
    pub fn rpow(self, e: i64) -> Rat {
        let base = Rat::from_integer(self.pow(e.unsigned_abs() as u32));
        if e >= 0 {
            base
        } else {
            base.recip()
        }
    }

    /// `p^e` as `u64`, if it fits.
    pub fn pow_u64(self, e: u32) -> Option<u64> {
        self.0.checked_pow(e)
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A `p`-adic valuation: an integer, or `+∞` for zero.
///
/// The derived order puts every finite value below `Infinite`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinite)
    }

    /// True iff `self >= level`.
    pub fn at_least(self, level: i64) -> bool {
        self >= Valuation::Finite(level)
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

/// Exponent of `p` in a nonzero integer.
pub fn int_valuation(n: &BigInt, p: Prime) -> u64 {
    debug_assert!(!n.is_zero());
    let pb = p.big();
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&pb);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

/// `v_p(x)`; `+∞` for zero.
pub fn valuation(x: &Rat, p: Prime) -> Valuation {
    if x.is_zero() {
        return Valuation::Infinite;
    }
    let vn = int_valuation(x.numer(), p) as i64;
    let vd = int_valuation(x.denom(), p) as i64;
    Valuation::Finite(vn - vd)
}

/// `|x|_p = p^{-v(x)}`, with `|0| = 0`.
pub fn norm(x: &Rat, p: Prime) -> Rat {
    match valuation(x, p) {
        Valuation::Finite(v) => p.rpow(-v),
        Valuation::Infinite => Rat::zero(),
    }
}

/// Minimum valuation over the coordinates of a tuple.
pub fn tuple_valuation(xs: &[Rat], p: Prime) -> Valuation {
    xs.iter()
        .map(|x| valuation(x, p))
        .min()
        .unwrap_or(Valuation::Infinite)
}

/// Residue of a `p`-integral rational modulo `p^k`, in `[0, p^k)`.
///
/// Panics if `x` is not `p`-integral; callers check valuations first.
pub fn residue(x: &Rat, p: Prime, k: u32) -> BigInt {
    let modulus = p.pow(k);
    if k == 0 {
        return BigInt::zero();
    }
    let den = x.denom();
    assert!(
        !(den % p.big()).is_zero(),
        "residue() needs a p-integral rational"
    );
    let num = x.numer().mod_floor(&modulus);
    let inv = den
        .mod_floor(&modulus)
        .modinv(&modulus)
        .expect("denominator is a unit mod p^k");
    (num * inv).mod_floor(&modulus)
}

/// Canonical representative of `x + p^level Z_p`: the unique element of
/// `Z[1/p] ∩ [0, p^level)` congruent to `x`.
pub fn reduce_mod(x: &Rat, p: Prime, level: i64) -> Rat {
    let v = match valuation(x, p) {
        Valuation::Infinite => return Rat::zero(),
        Valuation::Finite(v) => v,
    };
    if v >= level {
        return Rat::zero();
    }
    let shift = (-v).max(0);
    let scaled = x * p.rpow(shift);
    let a = residue(&scaled, p, (shift + level) as u32);
    Rat::new(a, p.pow(shift as u32))
}

/// A rational viewed as an element of `Q_p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PAdicScalar {
    pub value: Rat,
    pub p: Prime,
}

impl PAdicScalar {
    pub fn new(value: Rat, p: Prime) -> Self {
        PAdicScalar { value, p }
    }

    pub fn from_int(n: i64, p: Prime) -> Self {
        PAdicScalar::new(Rat::from_integer(n.into()), p)
    }

    pub fn valuation(&self) -> Valuation {
        valuation(&self.value, self.p)
    }

    pub fn norm(&self) -> Rat {
        norm(&self.value, self.p)
    }

    /// The unit part `x / p^{v(x)}`; `None` for zero.
    pub fn unit_part(&self) -> Option<Rat> {
        self.valuation()
            .finite()
            .map(|v| &self.value * self.p.rpow(-v))
    }
}

impl fmt::Display for PAdicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", fmt_rat(&self.value))
    }
}

/// Canonical `a/b` text (or `a` when the denominator is one).
pub fn fmt_rat(x: &Rat) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `a`, `-a` or `a/b`.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(Rat::new(n, d))
}

#[cfg(test)]
pub(crate) fn rat(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

#[cfg(test)]
pub(crate) fn rat_frac(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}

/// Sign-aware check that an integer is nonnegative; used when converting
/// residues back to machine integers.
pub(crate) fn to_u64(n: &BigInt) -> Option<u64> {
    if n.sign() == Sign::Minus {
        return None;
    }
    let (_, digits) = n.to_u64_digits();
    match digits.len() {
        0 => Some(0),
        1 => Some(digits[0]),
        _ => None,
    }
}
