//! Exact integration of expression densities against test functions.
//!
//! Each product of the density is brought to the shape
//! `c·ψ(h)·Π|x_i|^{σ_i}(ord x_i)^{t_i}` where the phase `h` is either a
//! polynomial or `d·x^{-κ}`. Radial factors on balls around a coordinate
//! hyperplane are summed in closed form; oscillating shells beyond the
//! conductor vanish and the remaining finitely many are summed exactly.

use num_traits::{One, Zero};

use super::map::{phase_integral, Polydisc};
use super::shell::shell_integral;
use crate::cexp::{Atom, CexpExpr, RationalTerm};
use crate::padic::{int_valuation, valuation, ClopenSet, Prime, Valuation};
use crate::poly::Poly;
use crate::schwartz::{psi, SchwartzBruhat};
use crate::{Error, ExactComplex, Rat, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Phase {
    None,
    Polynomial(Poly),
    /// `d·x^{-κ}` with some `κ_i >= 1`.
    Inverse { d: Rat, kappa: Vec<u32> },
}

/// `coeff·ψ(phase)·Π|x_i|^{sigma_i}(ord x_i)^{tpow_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialTerm {
    pub coeff: ExactComplex,
    pub sigma: Vec<i64>,
    pub tpow: Vec<u32>,
    pub phase: Phase,
}

fn monomial_of(t: &RationalTerm, n: usize) -> Result<Option<(Rat, Vec<i64>)>> {
    let (num, den) = t.to_fraction(n)?;
    if num.is_zero() {
        return Ok(None);
    }
    let unsupported = || Error::UnsupportedShape(format!("{t} is not a monomial"));
    let (a, ea) = num.as_monomial().ok_or_else(unsupported)?;
    let (b, eb) = den.as_monomial().ok_or_else(unsupported)?;
    let e = (0..n)
        .map(|i| ea.get(i).copied().unwrap_or(0) as i64 - eb.get(i).copied().unwrap_or(0) as i64)
        .collect();
    Ok(Some((a / b, e)))
}

fn unsupported(msg: impl Into<String>) -> Error {
    Error::UnsupportedShape(msg.into())
}

/// Brings every product of `e` (in `n` variables) to monomial shape.
pub fn recognize(e: &CexpExpr, n: usize) -> Result<Vec<MonomialTerm>> {
    let p = e.p();
    let mut out = Vec::new();
    'products: for prod in e.products() {
        let mut coeff = prod.coeff.clone();
        let mut sigma = vec![0i64; n];
        // polynomial in the variables o_i = ord x_i
        let mut ords = Poly::one(n);
        let mut phase = RationalTerm::int(0);
        for atom in &prod.atoms {
            match atom {
                Atom::Abs(t, s) => match monomial_of(t, n)? {
                    None if *s > 0 => continue 'products,
                    None if *s == 0 => {}
                    None => return Err(Error::NotInDomain(format!("|{t}|^({s}) is nowhere defined"))),
                    Some((c, ex)) => {
                        let v = valuation(&c, p).finite().expect("nonzero");
                        coeff = coeff.scale(&p.rpow(-v * s));
                        for (sg, k) in sigma.iter_mut().zip(&ex) {
                            *sg += k * s;
                        }
                    }
                },
                Atom::Ord(t, k) => {
                    let (c, ex) = monomial_of(t, n)?
                        .ok_or_else(|| Error::NotInDomain(format!("ord({t}) is nowhere defined")))?;
                    let v = valuation(&c, p).finite().expect("nonzero");
                    let mut lin = Poly::constant(n, Rat::from_integer(v.into()));
                    for (i, &a) in ex.iter().enumerate() {
                        if a != 0 {
                            lin = &lin + &Poly::var(i, n).scale(&Rat::from_integer(a.into()));
                        }
                    }
                    ords = &ords * &lin.pow(*k);
                }
                Atom::Psi(t) => phase = phase.add(t.clone()),
                Atom::Damp(ts) => {
                    if ts.iter().any(|t| t.arity() > 0) {
                        return Err(unsupported("damp factors are not integrated"));
                    }
                    coeff = &coeff * &atom.eval(&[], p)?;
                }
            }
        }
        let (num, den) = phase.to_fraction(n)?;
        let phase = if num.is_zero() {
            Phase::None
        } else if let Some(c) = den.as_constant() {
            let h = num.scale(&c.recip());
            match h.as_constant() {
                Some(h0) => {
                    coeff = &coeff * &psi(&h0, p)?;
                    Phase::None
                }
                None => Phase::Polynomial(h),
            }
        } else {
            let nc = num
                .as_constant()
                .ok_or_else(|| unsupported(format!("phase ({num})/({den}) is not d·x^(-k)")))?;
            let (b, kappa) = den
                .as_monomial()
                .ok_or_else(|| unsupported(format!("phase denominator {den} is not a monomial")))?;
            Phase::Inverse {
                d: nc / b,
                kappa: (0..n).map(|i| kappa.get(i).copied().unwrap_or(0)).collect(),
            }
        };
        for (tau, c) in ords.terms() {
            out.push(MonomialTerm {
                coeff: coeff.scale(c),
                sigma: sigma.clone(),
                tpow: (0..n).map(|i| tau.get(i).copied().unwrap_or(0)).collect(),
                phase: phase.clone(),
            });
        }
    }
    Ok(out)
}

/// Fails when a radial factor is not integrable near a coordinate
/// hyperplane that meets `domain`.
pub fn check_integrable(terms: &[MonomialTerm], domain: &ClopenSet) -> Result<()> {
    for t in terms {
        for (i, &s) in t.sigma.iter().enumerate() {
            if s > -1 {
                continue;
            }
            let damped = matches!(&t.phase, Phase::Inverse { kappa, .. } if kappa[i] > 0);
            if damped {
                continue;
            }
            if domain.balls().iter().any(|b| b.coordinate_valuation(i).is_none()) {
                return Err(Error::NonIntegrable(format!(
                    "|x{}|^({s}) is not integrable near x{} = 0",
                    i + 1,
                    i + 1
                )));
            }
        }
    }
    Ok(())
}

fn radial_factor(p: Prime, sigma: i64, t: u32, disc: &Polydisc, i: usize) -> Result<Rat> {
    let level = disc.levels[i];
    match disc.coordinate_valuation(i) {
        Some(v) => {
            let ord = num_traits::pow(Rat::from_integer(v.into()), t as usize);
            Ok(p.rpow(-v * sigma) * ord * p.rpow(-level))
        }
        None => shell_integral(p, sigma, t, level),
    }
}

fn sub_disc(disc: &Polydisc, coords: &[usize]) -> Polydisc {
    Polydisc {
        p: disc.p,
        center: coords.iter().map(|&i| disc.center[i].clone()).collect(),
        levels: coords.iter().map(|&i| disc.levels[i]).collect(),
    }
}

/// Re-indexes `f` onto the variables `coords` (all others must be absent).
fn restrict_vars(f: &Poly, coords: &[usize]) -> Poly {
    let k = coords.len();
    Poly::from_terms(
        k,
        f.terms()
            .map(|(e, c)| (coords.iter().map(|&i| e.get(i).copied().unwrap_or(0)).collect(), c.clone())),
    )
}

fn s_exponent(p: Prime, kappa: u32) -> i64 {
    let v = int_valuation(&kappa.into(), p) as i64;
    1 + v + i64::from(p.get() == 2 && v >= 1)
}

impl MonomialTerm {
    /// `∫_disc` of the term.
    pub fn integrate(&self, disc: &Polydisc) -> Result<ExactComplex> {
        let p = disc.p;
        let n = disc.dim();
        let active: Vec<usize> = match &self.phase {
            Phase::None => vec![],
            Phase::Polynomial(h) => h.support_vars(),
            Phase::Inverse { kappa, .. } => (0..n).filter(|&i| kappa[i] > 0).collect(),
        };
        let mut passive = Rat::one();
        for i in (0..n).filter(|i| !active.contains(i)) {
            passive *= radial_factor(p, self.sigma[i], self.tpow[i], disc, i)?;
            if passive.is_zero() {
                return Ok(ExactComplex::zero(p));
            }
        }
        let sigma: Vec<i64> = active.iter().map(|&i| self.sigma[i]).collect();
        let tpow: Vec<u32> = active.iter().map(|&i| self.tpow[i]).collect();
        let weight = move |d: &Polydisc| -> Result<Rat> {
            let mut w = Rat::one();
            for j in 0..d.dim() {
                w *= radial_factor(p, sigma[j], tpow[j], d, j)?;
            }
            Ok(w)
        };
        let sub = sub_disc(disc, &active);
        let active_part = match &self.phase {
            Phase::None => ExactComplex::one(p),
            Phase::Polynomial(h) => {
                phase_integral(&restrict_vars(h, &active), &Poly::one(active.len()), &sub, &weight)?
            }
            Phase::Inverse { d, kappa } => {
                let kap: Vec<u32> = active.iter().map(|&i| kappa[i]).collect();
                inverse_phase_integral(p, d, &kap, &sub, &weight)?
            }
        };
        Ok(active_part.scale(&passive) * self.coeff.clone())
    }
}

/// `∫_disc ψ(d·x^{-κ})·w` with every `κ_i >= 1`.
fn inverse_phase_integral(
    p: Prime,
    d: &Rat,
    kappa: &[u32],
    disc: &Polydisc,
    weight: &dyn Fn(&Polydisc) -> Result<Rat>,
) -> Result<ExactComplex> {
    let k = kappa.len();
    let mut den_exp = vec![0u32; k];
    den_exp.copy_from_slice(kappa);
    let den = Poly::monomial(den_exp, Rat::one());
    let num = Poly::constant(k, d.clone());
    let Valuation::Finite(vd) = valuation(d, p) else {
        return Ok(ExactComplex::zero(p));
    };
    let zero_coords: Vec<usize> = (0..k).filter(|&i| disc.coordinate_valuation(i).is_none()).collect();
    if zero_coords.is_empty() {
        return phase_integral(&num, &den, disc, weight);
    }
    let mut base_v = vd;
    for i in (0..k).filter(|i| !zero_coords.contains(i)) {
        base_v -= kappa[i] as i64 * disc.coordinate_valuation(i).expect("nonzero coordinate");
    }
    let s_min = zero_coords.iter().map(|&i| s_exponent(p, kappa[i])).min().expect("nonempty");
    let mut acc = ExactComplex::zero(p);
    let mut tuples = Vec::new();
    shell_tuples(&zero_coords, kappa, &disc.levels, base_v, s_min, &mut vec![], &mut tuples);
    let units: Vec<u64> = (1..p.get()).collect();
    for js in tuples {
        // every choice of leading digit on each shell
        let mut choices: Vec<Vec<u64>> = vec![vec![]];
        for _ in &zero_coords {
            choices = choices
                .into_iter()
                .flat_map(|c| {
                    units.iter().map(move |&u| {
                        let mut c2 = c.clone();
                        c2.push(u);
                        c2
                    })
                })
                .collect();
        }
        for digits in choices {
            let mut center = disc.center.clone();
            let mut levels = disc.levels.clone();
            for ((&i, &j), &u) in zero_coords.iter().zip(&js).zip(&digits) {
                center[i] = p.rpow(j) * Rat::from_integer(u.into());
                levels[i] = j + 1;
            }
            let piece = Polydisc::new(p, center, levels);
            acc += &phase_integral(&num, &den, &piece, weight)?;
        }
    }
    Ok(acc)
}

/// Shell valuations `j_i >= levels[i]` on the zero coordinates for which the
/// phase valuation `base_v - Σ κ_i j_i` exceeds `-s_min`.
fn shell_tuples(
    coords: &[usize],
    kappa: &[u32],
    levels: &[i64],
    base_v: i64,
    s_min: i64,
    prefix: &mut Vec<i64>,
    out: &mut Vec<Vec<i64>>,
) {
    let pos = prefix.len();
    if pos == coords.len() {
        out.push(prefix.clone());
        return;
    }
    // the remaining coordinates contribute at least their minimum shells
    let rest: i64 = coords[pos + 1..]
        .iter()
        .map(|&i| kappa[i] as i64 * levels[i])
        .sum();
    let i = coords[pos];
    let mut j = levels[i];
    while base_v - kappa[i] as i64 * j - rest > -s_min {
        prefix.push(j);
        shell_tuples(
            coords,
            kappa,
            levels,
            base_v - kappa[i] as i64 * j,
            s_min,
            prefix,
            out,
        );
        prefix.pop();
        j += 1;
    }
}

/// A density `e(x) dx` on a box union.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    pub expr: CexpExpr,
    pub domain: ClopenSet,
    pub terms: Vec<MonomialTerm>,
}

impl Density {
    pub fn new(expr: CexpExpr, domain: ClopenSet) -> Result<Self> {
        let dens = Density::with_singular_support(expr, domain)?;
        check_integrable(&dens.terms, &dens.domain)?;
        Ok(dens)
    }

    /// A density on the domain minus the coordinate hyperplanes: only test
    /// functions vanishing near the hyperplanes are guaranteed to evaluate.
    pub fn with_singular_support(expr: CexpExpr, domain: ClopenSet) -> Result<Self> {
        if expr.arity() > domain.dim() {
            return Err(Error::DimensionMismatch(domain.dim(), expr.arity()));
        }
        if expr.p() != domain.p() {
            return Err(Error::PrimeMismatch(domain.p().get(), expr.p().get()));
        }
        let terms = recognize(&expr, domain.dim())?;
        Ok(Density {
            expr,
            domain,
            terms,
        })
    }

    /// `∫_disc e`.
    pub fn integrate_disc(&self, disc: &Polydisc) -> Result<ExactComplex> {
        let mut acc = ExactComplex::zero(disc.p);
        for t in &self.terms {
            acc += &t.integrate(disc)?;
        }
        Ok(acc)
    }

    pub fn eval(&self, phi: &SchwartzBruhat) -> Result<ExactComplex> {
        let restricted = phi.restrict(&self.domain)?.canonical();
        let mut acc = ExactComplex::zero(self.domain.p());
        for (ball, v) in restricted.entries() {
            let part = self.integrate_disc(&Polydisc::from_ball(&ball))?;
            acc += &(&part * v);
        }
        Ok(acc)
    }
}

/// `∫_disc e` for the monomial shapes of `e`.
pub fn integrate_expr(e: &CexpExpr, disc: &Polydisc) -> Result<ExactComplex> {
    let mut acc = ExactComplex::zero(disc.p);
    for t in recognize(e, disc.dim())? {
        acc += &t.integrate(disc)?;
    }
    Ok(acc)
}
