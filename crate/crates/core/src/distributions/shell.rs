//! Closed forms for radial integrals over balls around zero.

use num_traits::{One, Zero};

use crate::padic::Prime;
use crate::{Error, Rat, Result};

fn binomial(n: u32, k: u32) -> Rat {
    let mut acc = Rat::one();
    for i in 0..k {
        acc = acc * Rat::from_integer((n - i).into()) / Rat::from_integer((i + 1).into());
    }
    acc
}

/// Stirling numbers of the second kind `S(a, b)` for `b <= a`.
fn stirling2(a: u32) -> Vec<Rat> {
    let mut row = vec![Rat::one()];
    for n in 1..=a {
        let mut next = vec![Rat::zero(); n as usize + 1];
        for k in 1..=n as usize {
            let carry = row.get(k).cloned().unwrap_or_else(Rat::zero);
            next[k] = Rat::from_integer((k as i64).into()) * carry + row[k - 1].clone();
        }
        row = next;
    }
    row
}

/// `Σ_{i>=0} i^a q^i` for `|q| < 1` (with `0^0 = 1`).
fn polylog_neg(a: u32, q: &Rat) -> Rat {
    let one = Rat::one();
    let s = stirling2(a);
    let mut total = Rat::zero();
    let mut fact = Rat::one();
    for (b, sab) in s.iter().enumerate() {
        if b > 0 {
            fact *= Rat::from_integer((b as i64).into());
        }
        if sab.is_zero() {
            continue;
        }
        let num = num_traits::pow(q.clone(), b);
        let den = num_traits::pow(&one - q, b + 1);
        total += sab * &fact * num / den;
    }
    total
}

/// `Σ_{j>=start} j^t q^j` for `0 < q < 1`.
pub fn power_geometric_tail(t: u32, q: &Rat, start: i64) -> Rat {
    let start_r = Rat::from_integer(start.into());
    let lead = if start >= 0 {
        num_traits::pow(q.clone(), start as usize)
    } else {
        num_traits::pow(q.recip(), start.unsigned_abs() as usize)
    };
    let mut total = Rat::zero();
    for a in 0..=t {
        let coeff = binomial(t, a) * num_traits::pow(start_r.clone(), (t - a) as usize);
        if coeff.is_zero() {
            continue;
        }
        total += coeff * polylog_neg(a, q);
    }
    lead * total
}

/// `∫_{p^ℓ Z_p} |x|^σ (ord x)^t dx`.
pub fn shell_integral(p: Prime, sigma: i64, t: u32, level: i64) -> Result<Rat> {
    if sigma + 1 <= 0 {
        return Err(Error::NonIntegrable(format!(
            "|x|^{sigma}·ord(x)^{t} near 0: the shell series diverges"
        )));
    }
    let q = p.rpow(-(sigma + 1));
    let unit_mass = Rat::one() - p.rpow(-1);
    Ok(unit_mass * power_geometric_tail(t, &q, level))
}

/// `∫ |x|^σ (ord x)^t` over the single shell `v(x) = j`.
pub fn shell_term(p: Prime, sigma: i64, t: u32, j: i64) -> Rat {
    let unit_mass = Rat::one() - p.rpow(-1);
    let jt = num_traits::pow(Rat::from_integer(j.into()), t as usize);
    unit_mass * p.rpow(-j * (sigma + 1)) * jt
}
