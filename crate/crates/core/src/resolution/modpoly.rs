//! Polynomials with coefficients in `Z / p^k` for `p^k < 2^64`.

use std::collections::BTreeMap;

use num_traits::ToPrimitive;

use crate::padic::{residue, valuation, Prime, Valuation};
use crate::poly::{Monomial, Poly};
use crate::{Error, Rat, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct ModPoly {
    nvars: usize,
    p: u128,
    m: u128,
    terms: BTreeMap<Monomial, u128>,
}

pub(crate) fn modulus(p: Prime, k: i64) -> Result<u128> {
    let m = p
        .pow_u64(k as u32)
        .ok_or_else(|| Error::TooLarge(format!("{p}^{k} exceeds the chart arithmetic range")))?;
    Ok(m as u128)
}

/// Residue of a `p`-integral rational modulo `m = p^k`.
pub(crate) fn res(x: &Rat, p: Prime, k: i64) -> Result<u128> {
    if valuation(x, p) < Valuation::Finite(0) {
        return Err(Error::NotInDomain(format!("{x} is not p-integral")));
    }
    Ok(residue(x, p, k as u32).to_u128().expect("residue below p^k"))
}

impl ModPoly {
    pub fn zero(nvars: usize, p: Prime, k: i64) -> Result<Self> {
        Ok(ModPoly {
            nvars,
            p: p.get() as u128,
            m: modulus(p, k)?,
            terms: BTreeMap::new(),
        })
    }

    fn empty_like(&self) -> Self {
        ModPoly {
            nvars: self.nvars,
            p: self.p,
            m: self.m,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant_like(&self, c: u128) -> Self {
        let mut out = self.empty_like();
        out.add_term(vec![0; self.nvars], c);
        out
    }

    pub fn var_like(&self, i: usize) -> Self {
        let mut e = vec![0; self.nvars];
        e[i] = 1;
        let mut out = self.empty_like();
        out.add_term(e, 1);
        out
    }

    pub fn from_poly(f: &Poly, p: Prime, k: i64) -> Result<Self> {
        let mut out = ModPoly::zero(f.nvars(), p, k)?;
        for (e, c) in f.terms() {
            out.add_term(e.clone(), res(c, p, k)?);
        }
        Ok(out)
    }

    pub fn to_poly(&self) -> Poly {
        Poly::from_terms(
            self.nvars,
            self.terms
                .iter()
                .map(|(e, &c)| (e.clone(), Rat::from_integer(c.into()))),
        )
    }

    /// The same polynomial modulo a divisor `p^j` of the modulus.
    pub fn reduced(&self, p: Prime, j: i64) -> Result<Self> {
        let m = modulus(p, j)?;
        let mut out = ModPoly {
            m,
            ..self.empty_like()
        };
        for (e, &c) in &self.terms {
            out.add_term(e.clone(), c % m);
        }
        Ok(out)
    }

    fn add_term(&mut self, e: Monomial, c: u128) {
        let c = c % self.m;
        if c == 0 {
            return;
        }
        let slot = self.terms.entry(e.clone()).or_insert(0);
        *slot = (*slot + c) % self.m;
        if *slot == 0 {
            self.terms.remove(&e);
        }
    }



    pub fn add(&self, o: &ModPoly) -> ModPoly {
        let mut out = self.clone();
        for (e, &c) in &o.terms {
            out.add_term(e.clone(), c);
        }
        out
    }

    pub fn sub(&self, o: &ModPoly) -> ModPoly {
        let mut out = self.clone();
        for (e, &c) in &o.terms {
            out.add_term(e.clone(), self.m - c);
        }
        out
    }

    pub fn scale(&self, c: u128) -> ModPoly {
        let mut out = self.empty_like();
        for (e, &a) in &self.terms {
            out.add_term(e.clone(), a * (c % self.m) % self.m);
        }
        out
    }

    pub fn mul(&self, o: &ModPoly) -> ModPoly {
        let mut acc: BTreeMap<Monomial, u128> = BTreeMap::new();
        for (ea, &a) in &self.terms {
            for (eb, &b) in &o.terms {
                let e: Monomial = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                let slot = acc.entry(e).or_insert(0);
                *slot = (*slot + a * b % self.m) % self.m;
            }
        }
        acc.retain(|_, c| *c != 0);
        ModPoly {
            terms: acc,
            ..self.empty_like()
        }
    }

    pub fn pow(&self, k: u64) -> ModPoly {
        let mut acc = self.constant_like(1);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// `self(subs)`; the substitutions live in their own variable count.
    pub fn compose(&self, subs: &[ModPoly]) -> ModPoly {
        let Some(template) = subs.first() else {
            return self.clone();
        };
        let mut powers: Vec<Vec<ModPoly>> = subs.iter().map(|s| vec![s.constant_like(1)]).collect();
        let mut out = template.empty_like();
        for (e, &c) in &self.terms {
            let mut t = template.constant_like(c);
            for (i, &k) in e.iter().enumerate() {
                while powers[i].len() <= k as usize {
                    let next = powers[i].last().expect("nonempty").mul(&subs[i]);
                    powers[i].push(next);
                }
                if k > 0 {
                    t = t.mul(&powers[i][k as usize]);
                }
            }
            out = out.add(&t);
        }
        out
    }

    pub fn eval(&self, x: &[u128]) -> u128 {
        let mut acc = 0u128;
        for (e, &c) in &self.terms {
            let mut t = c;
            for (xi, &k) in x.iter().zip(e) {
                t = t * pow_mod(*xi, k as u64, self.m) % self.m;
            }
            acc = (acc + t) % self.m;
        }
        acc
    }

    /// Smallest `p`-adic valuation among the coefficients.
    pub fn min_valuation(&self) -> Option<u32> {
        self.terms
            .values()
            .map(|&c| {
                let (mut c, mut v) = (c, 0);
                while c % self.p == 0 {
                    c /= self.p;
                    v += 1;
                }
                v
            })
            .min()
    }


    /// Divides by `x_t`, if every term contains it.
    pub fn divide_by_var(&self, t: usize) -> Option<ModPoly> {
        let mut out = self.empty_like();
        for (e, &c) in &self.terms {
            if e[t] == 0 {
                return None;
            }
            let mut e = e.clone();
            e[t] -= 1;
            out.add_term(e, c);
        }
        Some(out)
    }

    pub fn modulus(&self) -> u128 {
        self.m
    }
}

pub(crate) fn pow_mod(x: u128, k: u64, m: u128) -> u128 {
    let (mut acc, mut base, mut k) = (1 % m, x % m, k);
    while k > 0 {
        if k & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        k >>= 1;
    }
    acc
}

/// Inverse of a unit modulo `m`.
pub(crate) fn inv_mod(a: u128, m: u128) -> Option<u128> {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    (old_r == 1).then(|| old_s.rem_euclid(m as i128) as u128)
}
