//! Alteration charts that monomialize `unit · monomial` tuples: power
//! substitutions `x ↦ λ x^N`, Hensel charts absorbing a unit into a
//! coordinate, membership in chart images, and sampled certificates for the
//! properties of the resulting cover.

use std::fmt;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distributions::{ChartMap, Distribution, RationalMap};
use crate::padic::{fmt_rat, reduce_mod, residue, valuation, Ball, ClopenSet, Prime};
use crate::poly::Poly;

mod modpoly;

use modpoly::{inv_mod, res, ModPoly};
use crate::schwartz::SchwartzBruhat;
use crate::{Error, ExactComplex, Rat, Result};

/// Default working precision of Hensel charts.
pub const DEFAULT_PREC: i64 = 20;
/// Default sampling level of certificates.
pub const DEFAULT_LEVEL: i64 = 6;

fn vp(x: &Rat, p: Prime) -> i64 {
    valuation(x, p).finite().unwrap_or(i64::MAX)
}

fn int_vp(n: u64, p: Prime) -> u32 {
    let (mut n, mut e) = (n, 0);
    while n > 0 && n % p.get() == 0 {
        n /= p.get();
        e += 1;
    }
    e
}

fn rpow(x: &Rat, k: u64) -> Rat {
    num_traits::pow(x.clone(), k as usize)
}

/// Whether `x` is a nonzero `n`-th power in `Q_p`.
pub fn nth_power_test(x: &Rat, n: u64, p: Prime) -> Result<bool> {
    if x.is_zero() {
        return Err(Error::NotInDomain("0 is not in Q_p^x".into()));
    }
    if n == 0 {
        return Err(Error::InvalidLevel("exponent must be positive".into()));
    }
    let v = vp(x, p);
    if v.rem_euclid(n as i64) != 0 {
        return Ok(false);
    }
    let u = x * p.rpow(-v);
    let e = int_vp(n, p);
    if p.get() == 2 {
        if n % 2 == 1 {
            return Ok(true);
        }
        return Ok(residue(&u, p, 2 + e) == BigInt::one());
    }
    let g = n.gcd(&(p.get() - 1));
    let modp = p.big();
    let r = residue(&u, p, 1);
    if r.modpow(&BigInt::from((p.get() - 1) / g), &modp) != BigInt::one() {
        return Ok(false);
    }
    let m = p.pow(1 + e);
    Ok(residue(&u, p, 1 + e).modpow(&BigInt::from(p.get() - 1), &m) == BigInt::one())
}

/// Number of `n`-th roots of unity in `Q_p`.
pub fn fiber_size(n: u64, p: Prime) -> u64 {
    if p.get() == 2 {
        if n % 2 == 0 {
            2
        } else {
            1
        }
    } else {
        n.gcd(&(p.get() - 1))
    }
}

/// Newton iteration for a root of `y^n = u` from `y0`, until
/// `v(y^n - u) >= target`.
fn newton_power_root(u: &Rat, n: u64, y0: Rat, p: Prime, target: i64, keep: i64) -> Result<Rat> {
    let nn = Rat::from_integer(n.into());
    let mut y = y0;
    for _ in 0..200 {
        let err = rpow(&y, n) - u;
        if vp(&err, p) >= target {
            return Ok(y);
        }
        let step = err / (&nn * rpow(&y, n - 1));
        y = reduce_mod(&(y - step), p, keep);
    }
    Err(Error::Certification(format!("Newton iteration for an {n}-th root stalled")))
}

/// One `n`-th root of the unit `u` to precision `prec`, if any.
fn unit_root(u: &Rat, n: u64, p: Prime, prec: i64) -> Result<Option<Rat>> {
    if !nth_power_test(u, n, p)? {
        return Ok(None);
    }
    let e = int_vp(n, p) as i64;
    let k = (2 * e + 1) as u32;
    let modulus = p.pow(k);
    let target = residue(u, p, k);
    let nb = BigInt::from(n);
    let mut y = BigInt::one();
    while &y < &modulus {
        if !(&y % p.big()).is_zero() && y.modpow(&nb, &modulus) == target {
            let root = newton_power_root(u, n, Rat::from_integer(y), p, prec + e, prec + 2 * e + 2)?;
            return Ok(Some(reduce_mod(&root, p, prec)));
        }
        y += 1;
    }
    Err(Error::Certification(format!("no residue root although {u} is an {n}-th power")))
}

/// The `n`-th roots of unity in `Q_p`, to precision `prec`.
pub fn roots_of_unity(n: u64, p: Prime, prec: i64) -> Result<Vec<Rat>> {
    if p.get() == 2 {
        let mut out = vec![Rat::one()];
        if n % 2 == 0 {
            out.push(reduce_mod(&-Rat::one(), p, prec));
        }
        return Ok(out);
    }
    let g = fiber_size(n, p);
    let mut out = Vec::new();
    for a in 1..p.get() {
        if BigInt::from(a).modpow(&BigInt::from(g), &p.big()) == BigInt::one() {
            let z = newton_power_root(&Rat::one(), g, Rat::from_integer(a.into()), p, prec, prec + 2)?;
            out.push(reduce_mod(&z, p, prec));
        }
    }
    Ok(out)
}

/// All `y ∈ Q_p` with `y^n = w`, each to relative precision `prec`.
pub fn nth_roots(w: &Rat, n: u64, p: Prime, prec: i64) -> Result<Vec<Rat>> {
    if w.is_zero() || !nth_power_test(w, n, p)? {
        return Ok(Vec::new());
    }
    let v = vp(w, p);
    let b = v / n as i64;
    let u = w * p.rpow(-v);
    let root = unit_root(&u, n, p, prec)?.expect("power test passed");
    let scale = p.rpow(b);
    Ok(roots_of_unity(n, p, prec)?
        .iter()
        .map(|z| reduce_mod(&(&root * z), p, prec) * &scale)
        .collect())
}

/// Representatives `p^a w` of `(Z_p \ {0})` modulo `n`-th powers, with
/// `0 <= a < n` and `w` a positive integer unit.
pub fn power_class_reps(n: u64, p: Prime) -> Result<Vec<Rat>> {
    let e = int_vp(n, p);
    let index = fiber_size(n, p) * p.get().pow(e);
    let bound = p.get().pow(2 * e + 3);
    let mut units: Vec<Rat> = Vec::new();
    for w in 1..bound {
        if units.len() as u64 == index {
            break;
        }
        if w % p.get() == 0 {
            continue;
        }
        let w = Rat::from_integer(w.into());
        let mut fresh = true;
        for r in &units {
            if nth_power_test(&(&w / r), n, p)? {
                fresh = false;
                break;
            }
        }
        if fresh {
            units.push(w);
        }
    }
    let mut out = Vec::new();
    for a in 0..n {
        for w in &units {
            out.push(p.rpow(a as i64) * w);
        }
    }
    Ok(out)
}

/// Whether `u` has `p`-integral coefficients and `u ≡ 1 mod p`.
pub fn is_principal_unit(u: &Poly, p: Prime) -> bool {
    let c0 = u.constant_term();
    let zero = vec![0; u.nvars()];
    vp(&(c0 - Rat::one()), p) >= 1 && u.terms().all(|(e, c)| *e == zero || vp(c, p) >= 1)
}

fn check_root_hypotheses(u: &Poly, k1: u64, p: Prime) -> Result<()> {
    if !is_principal_unit(u, p) {
        return Err(Error::HypothesisViolated(format!("{u} is not 1 mod {p}")));
    }
    if k1 == 0 || k1 % p.get() == 0 {
        return Err(Error::HypothesisViolated(format!("exponent {k1} is divisible by {p}")));
    }
    Ok(())
}

/// The iteration `v ← v - (v^k1 - u)/k1`, which gains at least one digit
/// per step.
fn root_mod(u: &ModPoly, k1: u64) -> Result<ModPoly> {
    let m = u.modulus();
    let inv_k = inv_mod(k1 as u128 % m, m).expect("k1 is a unit");
    let mut v = u.constant_like(1);
    let mut last = 0;
    loop {
        let err = v.pow(k1).sub(u);
        let Some(level) = err.min_valuation() else {
            return Ok(v);
        };
        if level <= last {
            return Err(Error::Certification(format!(
                "root iteration stalled at level {level}"
            )));
        }
        last = level;
        v = v.sub(&err.scale(inv_k));
    }
}

/// A polynomial `v ≡ 1 mod p` with `v^k1 ≡ u` coefficientwise mod
/// `p^prec`, for `u ≡ 1 mod p` and `p ∤ k1`.
pub fn hensel_root(u: &Poly, k1: u64, prec: i64, p: Prime) -> Result<Poly> {
    check_root_hypotheses(u, k1, p)?;
    Ok(root_mod(&ModPoly::from_poly(u, p, prec)?, k1)?.to_poly())
}

/// `1/v` for `v ≡ 1 mod p`, by Newton's iteration `w ← w (2 - v w)`.
fn inverse_unit(v: &ModPoly) -> Result<ModPoly> {
    let one = v.constant_like(1);
    let two = v.constant_like(2);
    let mut w = one.clone();
    for _ in 0..64 {
        let vw = v.mul(&w);
        if vw == one {
            return Ok(w);
        }
        w = w.mul(&two.sub(&vw));
    }
    Err(Error::Certification("unit inversion did not converge".into()))
}

fn residues(x: &[Rat], p: Prime, prec: i64) -> Result<Vec<u128>> {
    x.iter().map(|c| res(c, p, prec)).collect()
}

fn from_residues(x: &[u128]) -> Vec<Rat> {
    x.iter().map(|&c| Rat::from_integer(c.into())).collect()
}

/// `x ↦ (λ_1 x_1^N, …, λ_n x_n^N)` on `Z_p^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerChart {
    p: Prime,
    lambda: Vec<Rat>,
    exponent: u64,
}

impl PowerChart {
    pub fn new(p: Prime, lambda: Vec<Rat>, exponent: u64) -> Result<Self> {
        if exponent == 0 {
            return Err(Error::InvalidLevel("power chart exponent must be positive".into()));
        }
        if let Some(l) = lambda.iter().find(|l| l.is_zero() || vp(l, p) < 0) {
            return Err(Error::NotInDomain(format!("multiplier {} not in Z_p \\ {{0}}", fmt_rat(l))));
        }
        Ok(PowerChart { p, lambda, exponent })
    }

    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    pub fn lambda(&self) -> &[Rat] {
        &self.lambda
    }

    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn apply(&self, x: &[Rat]) -> Vec<Rat> {
        x.iter()
            .zip(&self.lambda)
            .map(|(xi, l)| l * rpow(xi, self.exponent))
            .collect()
    }

    pub fn polys(&self) -> Vec<Poly> {
        let n = self.dim();
        self.lambda
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let mut e = vec![0; n];
                e[i] = self.exponent as u32;
                Poly::monomial(e, l.clone())
            })
            .collect()
    }

    /// Size of the fibers over the image of `(Z_p \ {0})^n`.
    pub fn fiber_size(&self) -> u64 {
        fiber_size(self.exponent, self.p).pow(self.dim() as u32)
    }

    /// Whether the images of `self` and `other` on `(Z_p \ {0})^n` are
    /// disjoint, read off from the multipliers.
    pub fn separated_from(&self, other: &PowerChart) -> Result<bool> {
        for (a, b) in self.lambda.iter().zip(&other.lambda) {
            if !nth_power_test(&(a / b), self.exponent, self.p)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

impl fmt::Display for PowerChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l: Vec<String> = self.lambda.iter().map(fmt_rat).collect();
        write!(f, "power(N={}; lambda=({}))", self.exponent, l.join(","))
    }
}

/// Membership of a point in a power chart image, with its fiber.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageMembership {
    pub inside: bool,
    pub reps: Vec<Vec<Rat>>,
}

/// Whether `x ∈ φ_λ((Z_p \ {0})^n)`; when it is, the preimages to relative
/// precision `prec`.
pub fn chart_image_membership(chart: &PowerChart, x: &[Rat], prec: i64) -> Result<ImageMembership> {
    if x.len() != chart.dim() {
        return Err(Error::DimensionMismatch(chart.dim(), x.len()));
    }
    let p = chart.p;
    let mut per_coord = Vec::with_capacity(x.len());
    for (xi, l) in x.iter().zip(&chart.lambda) {
        if xi.is_zero() {
            return Ok(ImageMembership { inside: false, reps: vec![] });
        }
        let w = xi / l;
        if vp(&w, p) < 0 || !nth_power_test(&w, chart.exponent, p)? {
            return Ok(ImageMembership { inside: false, reps: vec![] });
        }
        per_coord.push(nth_roots(&w, chart.exponent, p, prec)?);
    }
    let mut reps: Vec<Vec<Rat>> = vec![vec![]];
    for roots in per_coord {
        reps = reps
            .into_iter()
            .flat_map(|r| {
                roots.iter().map(move |y| {
                    let mut r = r.clone();
                    r.push(y.clone());
                    r
                })
            })
            .collect();
    }
    Ok(ImageMembership { inside: true, reps })
}

/// Counts `y mod p^level` with `λ y^N = x` solvable, by enumerating unit
/// residues: `y = p^b y'` with `y'^N ≡ x/(λ p^{Nb}) mod p^{level + v_p(N)}`.
pub fn enumerate_preimages(lambda: &Rat, exponent: u64, x: &Rat, p: Prime, level: i64) -> u64 {
    if x.is_zero() {
        return 0;
    }
    let w = x / lambda;
    let v = vp(&w, p);
    if v < 0 || v % exponent as i64 != 0 {
        return 0;
    }
    let u = w * p.rpow(-v);
    let e = int_vp(exponent, p);
    let k = level as u32 + e;
    let modulus = p.pow(k).to_u128().expect("small modulus");
    let target = residue(&u, p, k).to_u128().expect("small residue");
    let step = p.get().pow(level as u32) as u128;
    let pp = p.get() as u128;
    let mut count = 0;
    for y in 1..step {
        if y % pp == 0 {
            continue;
        }
        let mut acc = 1u128;
        for _ in 0..exponent {
            acc = acc * y % modulus;
        }
        if acc == target {
            count += 1;
        }
    }
    count
}

/// `x ↦ (x_t v(x), …)` with `v^k1 = u`, used through its inverse `h`, which
/// satisfies `u(h(x)) · h_t(x)^k1 = x_t^k1 · (…)` and so turns `u · x_t^k1`
/// into `x_t^k1`.
#[derive(Debug, Clone, PartialEq)]
pub struct HenselChart {
    p: Prime,
    target: usize,
    k1: u64,
    root: ModPoly,
    inverse: Vec<ModPoly>,
    prec: i64,
}

impl HenselChart {
    pub fn new(u: &Poly, k1: u64, target: usize, prec: i64, p: Prime) -> Result<Self> {
        let n = u.nvars();
        if target >= n {
            return Err(Error::DimensionMismatch(n, target + 1));
        }
        check_root_hypotheses(u, k1, p)?;
        let root = root_mod(&ModPoly::from_poly(u, p, prec)?, k1)?;
        let w = inverse_unit(&root)?;
        let x_t = root.var_like(target);
        let mut subs: Vec<ModPoly> = (0..n).map(|i| root.var_like(i)).collect();
        let mut converged = false;
        for _ in 0..=(prec + 4) {
            let next = x_t.mul(&w.compose(&subs));
            if next == subs[target] {
                converged = true;
                break;
            }
            subs[target] = next;
        }
        if !converged {
            return Err(Error::Certification("inverse of the unit chart did not settle".into()));
        }
        Ok(HenselChart {
            p,
            target,
            k1,
            root,
            inverse: subs,
            prec,
        })
    }

    pub fn dim(&self) -> usize {
        self.inverse.len()
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn k1(&self) -> u64 {
        self.k1
    }

    pub fn root(&self) -> Poly {
        self.root.to_poly()
    }

    pub fn precision(&self) -> i64 {
        self.prec
    }

    /// The explicit map `x ↦ (x_t v(x), …)` on `p`-integral points, mod
    /// `p^prec`.
    pub fn forward(&self, x: &[Rat]) -> Result<Vec<Rat>> {
        let mut y = residues(x, self.p, self.prec)?;
        let m = self.root.modulus();
        y[self.target] = y[self.target] * self.root.eval(&y) % m;
        Ok(from_residues(&y))
    }

    /// Its inverse, which is the chart map.
    pub fn apply(&self, x: &[Rat]) -> Vec<Rat> {
        self.polys().iter().map(|f| f.eval(x)).collect()
    }

    /// Inverse of `forward` at a `p`-integral point by fixed-point
    /// iteration mod `p^prec`.
    pub fn invert_point(&self, y: &[Rat]) -> Result<Vec<Rat>> {
        let y = residues(y, self.p, self.prec)?;
        let m = self.root.modulus();
        let mut x = y.clone();
        for _ in 0..=(self.prec + 2) {
            let v = inv_mod(self.root.eval(&x), m).expect("root is a unit");
            x[self.target] = y[self.target] * v % m;
        }
        Ok(from_residues(&x))
    }

    pub fn polys(&self) -> Vec<Poly> {
        self.inverse.iter().map(ModPoly::to_poly).collect()
    }
}

/// A chart, applied left to right in the composite case.
#[derive(Debug, Clone, PartialEq)]
pub enum Chart {
    Power(PowerChart),
    Hensel(HenselChart),
    Composite(Vec<Chart>),
}

impl Chart {
    pub fn apply(&self, x: &[Rat]) -> Vec<Rat> {
        match self {
            Chart::Power(c) => c.apply(x),
            Chart::Hensel(c) => c.apply(x),
            Chart::Composite(cs) => cs.iter().fold(x.to_vec(), |y, c| c.apply(&y)),
        }
    }

    /// Precision of the polynomial presentation, `None` when exact.
    pub fn precision(&self) -> Option<i64> {
        match self {
            Chart::Power(_) => None,
            Chart::Hensel(c) => Some(c.prec),
            Chart::Composite(cs) => cs.iter().filter_map(Chart::precision).min(),
        }
    }

    pub fn fiber_size(&self) -> u64 {
        match self {
            Chart::Power(c) => c.fiber_size(),
            Chart::Hensel(_) => 1,
            Chart::Composite(cs) => cs.iter().map(Chart::fiber_size).product(),
        }
    }

    /// The chart as polynomials in `n` variables (reduced mod `p^prec` when
    /// a Hensel chart is involved).
    pub fn polys(&self, n: usize, p: Prime) -> Result<Vec<Poly>> {
        match self.precision() {
            Some(prec) => Ok(self.mod_polys(n, p, prec)?.iter().map(ModPoly::to_poly).collect()),
            None => Ok(self.exact_polys(n)),
        }
    }

    fn exact_polys(&self, n: usize) -> Vec<Poly> {
        match self {
            Chart::Power(c) => c.polys(),
            Chart::Hensel(c) => c.polys(),
            Chart::Composite(cs) => {
                let mut cur: Vec<Poly> = (0..n).map(|i| Poly::var(i, n)).collect();
                for c in cs {
                    cur = c.exact_polys(n).iter().map(|f| f.compose(&cur)).collect();
                }
                cur
            }
        }
    }

    fn mod_polys(&self, n: usize, p: Prime, prec: i64) -> Result<Vec<ModPoly>> {
        match self {
            Chart::Power(c) => c.polys().iter().map(|f| ModPoly::from_poly(f, p, prec)).collect(),
            Chart::Hensel(c) if c.prec == prec => Ok(c.inverse.clone()),
            Chart::Hensel(c) => c.inverse.iter().map(|f| f.reduced(p, prec)).collect(),
            Chart::Composite(cs) => {
                let zero = ModPoly::zero(n, p, prec)?;
                let mut cur: Vec<ModPoly> = (0..n).map(|i| zero.var_like(i)).collect();
                for c in cs {
                    cur = c.mod_polys(n, p, prec)?.iter().map(|f| f.compose(&cur)).collect();
                }
                Ok(cur)
            }
        }
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Chart::Power(c) => write!(f, "{c}"),
            Chart::Hensel(c) => write!(
                f,
                "unit(x{} <- x{}*v, v^{} = u, prec={})",
                c.target + 1,
                c.target + 1,
                c.k1,
                c.prec
            ),
            Chart::Composite(cs) if cs.is_empty() => write!(f, "identity"),
            Chart::Composite(cs) => {
                let parts: Vec<String> = cs.iter().map(ToString::to_string).collect();
                write!(f, "{}", parts.join(" then "))
            }
        }
    }
}

/// `coeff · x^exponents · unit`, with `unit ≡ 1 mod p`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalForm {
    pub coeff: Rat,
    pub exponents: Vec<u32>,
    pub unit: Poly,
}

impl NormalForm {
    pub fn is_monomial(&self) -> bool {
        self.unit.as_constant().is_some_and(|c| c.is_one())
    }

    pub fn is_unit(&self) -> bool {
        self.exponents.iter().all(|&e| e == 0)
    }

    pub fn monomial_value(&self, x: &[Rat]) -> Rat {
        let mut out = self.coeff.clone();
        for (xi, &e) in x.iter().zip(&self.exponents) {
            out *= rpow(xi, e as u64);
        }
        out
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", fmt_rat(&self.coeff))?;
        for (i, &e) in self.exponents.iter().enumerate() {
            match e {
                0 => {}
                1 => write!(f, "*x{}", i + 1)?,
                _ => write!(f, "*x{}^{e}", i + 1)?,
            }
        }
        if !self.is_monomial() {
            write!(f, "*({})", self.unit)?;
        }
        Ok(())
    }
}

/// Splits `f = c · x^α · u` with `u ≡ 1 mod p`.
pub fn split_unit_monomial(f: &Poly, p: Prime) -> Result<NormalForm> {
    let n = f.nvars();
    if f.is_zero() {
        return Err(Error::UnsupportedShape("the zero function has no normal form".into()));
    }
    let alpha: Vec<u32> = (0..n)
        .map(|i| f.terms().map(|(e, _)| e[i]).min().unwrap_or(0))
        .collect();
    let c = f
        .terms()
        .find(|(e, _)| **e == alpha)
        .map(|(_, c)| c.clone())
        .ok_or_else(|| Error::UnsupportedShape(format!("{f} is not a unit times a monomial")))?;
    let unit = Poly::from_terms(
        n,
        f.terms().map(|(e, k)| {
            let e: Vec<u32> = e.iter().zip(&alpha).map(|(a, b)| a - b).collect();
            (e, k / &c)
        }),
    );
    if !is_principal_unit(&unit, p) {
        return Err(Error::UnsupportedShape(format!(
            "{f}: the unit factor {unit} is not 1 mod {p}"
        )));
    }
    Ok(NormalForm {
        coeff: c,
        exponents: alpha,
        unit,
    })
}

/// A chart absorbing the unit of `u · x^exps` into coordinate `target`.
#[derive(Debug, Clone, PartialEq)]
pub struct Swallow {
    pub chart: Chart,
    pub form: NormalForm,
}

/// Pulls back `u · x^exps` to a monomial (or records `M = 1`).
pub fn unit_swallow_chart(u: &Poly, exps: &[u32], target: usize, prec: i64, p: Prime) -> Result<Swallow> {
    let n = u.nvars();
    if exps.len() != n {
        return Err(Error::DimensionMismatch(n, exps.len()));
    }
    if exps.iter().all(|&e| e == 0) || u.as_constant().is_some_and(|c| c.is_one()) {
        return Ok(Swallow {
            chart: Chart::Composite(vec![]),
            form: NormalForm {
                coeff: Rat::one(),
                exponents: exps.to_vec(),
                unit: u.clone(),
            },
        });
    }
    if target >= n {
        return Err(Error::DimensionMismatch(n, target + 1));
    }
    let k1 = exps[target] as u64;
    if k1 == 0 {
        return Err(Error::HypothesisViolated(format!("x{} does not divide the monomial", target + 1)));
    }
    let h = HenselChart::new(u, k1, target, prec, p)?;
    let unit = pulled_unit(u, exps, &h, &h.inverse, p, prec)?.to_poly();
    Ok(Swallow {
        chart: Chart::Hensel(h),
        form: NormalForm {
            coeff: Rat::one(),
            exponents: exps.to_vec(),
            unit,
        },
    })
}

/// Unit of `(unit · x^exps) ∘ chart` after the Hensel step `h` of a chart
/// whose polynomials are `full`.
fn pulled_unit(unit: &Poly, exps: &[u32], h: &HenselChart, full: &[ModPoly], p: Prime, prec: i64) -> Result<ModPoly> {
    let q = h.inverse[h.target]
        .divide_by_var(h.target)
        .ok_or_else(|| Error::Certification("unit chart does not fix the hyperplane".into()))?;
    let a = exps[h.target] as u64;
    let pulled = ModPoly::from_poly(unit, p, prec)?.compose(full);
    Ok(pulled.mul(&q.pow(a)))
}

/// One chart of a resolution with the normal forms of the pulled-back
/// functions.
#[derive(Debug, Clone)]
pub struct ResolvedChart {
    pub power: PowerChart,
    pub chart: Chart,
    pub polys: Vec<Poly>,
    pub forms: Vec<NormalForm>,
    residue_polys: Vec<ModPoly>,
    residue_prec: i64,
}

impl ResolvedChart {
    pub fn dim(&self) -> usize {
        self.power.dim()
    }

    pub fn apply(&self, x: &[Rat]) -> Vec<Rat> {
        self.polys.iter().map(|f| f.eval(x)).collect()
    }

    pub fn fiber_size(&self) -> u64 {
        self.chart.fiber_size()
    }

    pub fn precision(&self) -> Option<i64> {
        self.chart.precision()
    }

    /// Precision of the residue arithmetic used by the certificate.
    pub fn residue_precision(&self) -> i64 {
        self.residue_prec
    }

    /// The chart at a `p`-integral point, mod `p^prec`.
    pub fn apply_residues(&self, x: &[Rat]) -> Result<Vec<Rat>> {
        let x = residues(x, self.power.p(), self.residue_prec)?;
        Ok(from_residues(&self.residue_polys.iter().map(|f| f.eval(&x)).collect::<Vec<_>>()))
    }

    /// The chart on `Z_p^n` as a pushforward-ready map.
    pub fn chart_map(&self, certified: bool) -> ChartMap {
        self.build_map(self.polys.clone(), self.precision(), certified)
    }

    /// The chart reduced mod `p^level`, enough for test functions constant
    /// on cosets of that level.
    pub fn chart_map_at(&self, level: i64, certified: bool) -> Result<ChartMap> {
        let p = self.power.p();
        match self.precision() {
            Some(prec) if level < prec => {
                let polys = self
                    .residue_polys
                    .iter()
                    .map(|f| f.reduced(p, level.max(0)).map(|g| g.to_poly()))
                    .collect::<Result<Vec<_>>>()?;
                Ok(self.build_map(polys, Some(level), certified))
            }
            _ => Ok(self.chart_map(certified)),
        }
    }

    fn build_map(&self, polys: Vec<Poly>, precision: Option<i64>, certified: bool) -> ChartMap {
        let p = self.power.p();
        let n = self.dim();
        ChartMap {
            map: RationalMap::from_polys(n, polys),
            domain: ClopenSet::from_ball(Ball::origin(p, n, 0)),
            fiber_size: self.fiber_size(),
            precision,
            certified,
            label: self.chart.to_string(),
        }
    }
}

/// Charts `x ↦ λ h(x)^N`, one per tuple of power-class representatives, with
/// `h` absorbing the unit of the first function.
pub fn resolve(f: &[Poly], p: Prime, exponent: u64, prec: i64) -> Result<Vec<ResolvedChart>> {
    let first = f
        .first()
        .ok_or_else(|| Error::UnsupportedShape("empty function tuple".into()))?;
    let n = first.nvars();
    if let Some(g) = f.iter().find(|g| g.nvars() != n) {
        return Err(Error::DimensionMismatch(n, g.nvars()));
    }
    let forms = f
        .iter()
        .map(|g| split_unit_monomial(g, p))
        .collect::<Result<Vec<_>>>()?;
    let reps = power_class_reps(exponent, p)?;
    let mut tuples: Vec<Vec<Rat>> = vec![vec![]];
    for _ in 0..n {
        tuples = tuples
            .into_iter()
            .flat_map(|t| {
                reps.iter().map(move |r| {
                    let mut t = t.clone();
                    t.push(r.clone());
                    t
                })
            })
            .collect();
    }
    let lead = &forms[0];
    let target = if lead.is_unit() || lead.is_monomial() {
        None
    } else {
        let t = (0..n).find(|&i| {
            lead.exponents[i] > 0 && (exponent * lead.exponents[i] as u64) % p.get() != 0
        });
        Some(t.ok_or_else(|| {
            Error::HypothesisViolated(format!(
                "every exponent of the first monomial times {exponent} is divisible by {p}"
            ))
        })?)
    };
    let mut out = Vec::with_capacity(tuples.len());
    for lambda in tuples {
        let power = PowerChart::new(p, lambda, exponent)?;
        let ppolys = power.polys();
        let scaled = |g: &NormalForm| -> (Rat, Vec<u32>) {
            let mut c = g.coeff.clone();
            for (l, &a) in power.lambda.iter().zip(&g.exponents) {
                c *= rpow(l, a as u64);
            }
            let e = g.exponents.iter().map(|&a| a * exponent as u32).collect();
            (c, e)
        };
        let Some(t) = target else {
            let forms = forms
                .iter()
                .map(|g| {
                    let (coeff, exponents) = scaled(g);
                    NormalForm {
                        coeff,
                        exponents,
                        unit: g.unit.compose(&ppolys),
                    }
                })
                .collect();
            let residue_polys = ppolys
                .iter()
                .map(|f| ModPoly::from_poly(f, p, prec))
                .collect::<Result<Vec<_>>>()?;
            out.push(ResolvedChart {
                chart: Chart::Power(power.clone()),
                polys: ppolys,
                power,
                forms,
                residue_polys,
                residue_prec: prec,
            });
            continue;
        };
        let lead_unit = lead.unit.compose(&ppolys);
        let k1 = exponent * lead.exponents[t] as u64;
        let h = HenselChart::new(&lead_unit, k1, t, prec, p)?;
        let chart = Chart::Composite(vec![Chart::Hensel(h.clone()), Chart::Power(power.clone())]);
        let residue_polys = chart.mod_polys(n, p, prec)?;
        let polys: Vec<Poly> = residue_polys.iter().map(ModPoly::to_poly).collect();
        let mut pulled = Vec::with_capacity(forms.len());
        for g in &forms {
            let (coeff, exponents) = scaled(g);
            let unit = pulled_unit(&g.unit, &exponents, &h, &residue_polys, p, prec)?.to_poly();
            pulled.push(NormalForm {
                coeff,
                exponents,
                unit,
            });
        }
        out.push(ResolvedChart {
            power,
            chart,
            polys,
            forms: pulled,
            residue_polys,
            residue_prec: prec,
        });
    }
    Ok(out)
}

/// Outcome of one conclusion of a certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct ConclusionVerdict {
    pub conclusion: u8,
    pub name: &'static str,
    pub passed: bool,
    pub evidence: Vec<String>,
}

/// `ξ_*(1_B)` for `ξ` Haar measure on the chart domain, against
/// `fiber size × vol(one preimage coset)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MassCheck {
    pub coset: Ball,
    pub computed: ExactComplex,
    pub expected: Rat,
}

impl MassCheck {
    pub fn passed(&self) -> bool {
        self.computed.as_rational().is_some_and(|q| q == self.expected)
    }
}

#[derive(Debug, Clone)]
pub struct ResolutionCertificate {
    pub p: Prime,
    pub level: i64,
    pub prec: i64,
    pub charts: Vec<ResolvedChart>,
    pub verdicts: Vec<ConclusionVerdict>,
    pub fiber_counts: Vec<(usize, Vec<Rat>, u64, u64)>,
    pub mass_checks: Vec<MassCheck>,
}

impl ResolutionCertificate {
    pub fn passes(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed) && self.mass_checks.iter().all(MassCheck::passed)
    }

    pub fn verdict(&self, conclusion: u8) -> Option<&ConclusionVerdict> {
        self.verdicts.iter().find(|v| v.conclusion == conclusion)
    }

    pub fn report(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "p = {}, level = {}, prec = {}, charts = {}", self.p, self.level, self.prec, self.charts.len());
        for (i, c) in self.charts.iter().enumerate() {
            let forms: Vec<String> = c.forms.iter().map(ToString::to_string).collect();
            let _ = writeln!(s, "chart {i}: {} ; fiber {} ; forms [{}]", c.chart, c.fiber_size(), forms.join("; "));
        }
        for v in &self.verdicts {
            let _ = writeln!(s, "({}) {}: {}", v.conclusion, v.name, if v.passed { "pass" } else { "FAIL" });
            for e in &v.evidence {
                let _ = writeln!(s, "    {e}");
            }
        }
        for m in &self.mass_checks {
            let _ = writeln!(
                s,
                "mass {}: computed {} expected {} {}",
                m.coset,
                m.computed,
                fmt_rat(&m.expected),
                if m.passed() { "pass" } else { "FAIL" }
            );
        }
        s
    }
}

fn random_unit_point(rng: &mut ChaCha8Rng, p: Prime, n: usize, level: i64) -> Vec<Rat> {
    let bound = p.get().pow(level as u32);
    (0..n)
        .map(|_| loop {
            let y = rng.gen_range(1..bound);
            if y % p.get() != 0 || level <= 1 {
                break Rat::from_integer(y.into());
            }
        })
        .collect()
}

fn random_nonzero_point(rng: &mut ChaCha8Rng, p: Prime, n: usize, level: i64) -> Vec<Rat> {
    let bound = p.get().pow(level as u32);
    (0..n)
        .map(|_| Rat::from_integer(rng.gen_range(1..bound).into()))
        .collect()
}

/// Level at which membership in a power class is decided for `x`.
fn class_level(x: &[Rat], exponent: u64, p: Prime) -> i64 {
    let e = int_vp(exponent, p) as i64;
    let extra = if p.get() == 2 { 2 } else { 1 };
    x.iter().map(|c| vp(c, p)).max().unwrap_or(0) + e + extra
}

/// `p^-s g(φ(x))` and `p^-s c x^α U(x)` mod `p^prec`, with `p^-s` clearing
/// the denominators of `g`.
fn normal_form_residues(c: &ResolvedChart, g: &Poly, form: &NormalForm, x: &[Rat]) -> Result<(u128, u128)> {
    let p = c.power.p();
    let prec = c.residue_prec;
    let clear = p.rpow(-g.min_coefficient_valuation(p).unwrap_or(0).min(0));
    let gm = ModPoly::from_poly(&g.scale(&clear), p, prec)?;
    let y = residues(&c.apply_residues(x)?, p, prec)?;
    let lhs = gm.eval(&y);
    let xr = residues(x, p, prec)?;
    let m = gm.modulus();
    let mut rhs = res(&(&form.coeff * &clear), p, prec)?;
    for (xi, &e) in xr.iter().zip(&form.exponents) {
        rhs = rhs * modpoly::pow_mod(*xi, e as u64, m) % m;
    }
    rhs = rhs * ModPoly::from_poly(&form.unit, p, prec)?.eval(&xr) % m;
    Ok((lhs, rhs))
}

/// Samples the chart cover at `level` and checks the five conclusions:
/// open images, constant fiber size, normal forms, disjoint and dense
/// images, and a monomial or unit first function.
pub fn certify_resolution(charts: &[ResolvedChart], f: &[Poly], level: i64, seed: u64) -> ResolutionCertificate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = charts.first().map(|c| c.power.p()).unwrap_or(Prime::new(2).expect("prime"));
    let prec = charts.iter().map(ResolvedChart::residue_precision).min().unwrap_or(DEFAULT_PREC);
    let n = charts.first().map_or(0, ResolvedChart::dim);
    let per_chart = 8usize;
    let mut verdicts = Vec::new();

    // (1) images open: membership is stable on a sub-coset of each sample
    let mut ev = Vec::new();
    let mut ok = !charts.is_empty();
    for (i, c) in charts.iter().enumerate() {
        for _ in 0..per_chart {
            let y = random_unit_point(&mut rng, p, n, level);
            let x = c.power.apply(&y);
            let l = class_level(&x, c.power.exponent(), p);
            for _ in 0..4 {
                let t = random_nonzero_point(&mut rng, p, n, level);
                let x2: Vec<Rat> = x.iter().zip(&t).map(|(a, b)| a + p.rpow(l) * b).collect();
                match chart_image_membership(&c.power, &x2, prec) {
                    Ok(m) if m.inside => {}
                    other => {
                        ok = false;
                        ev.push(format!("chart {i}: {x2:?} left the image near {x:?}: {other:?}"));
                    }
                }
            }
        }
    }
    ev.push(format!("{} sub-coset probes", charts.len() * per_chart * 4));
    verdicts.push(ConclusionVerdict { conclusion: 1, name: "images open", passed: ok, evidence: ev });

    // (2) fibers: enumeration, membership reps, and replay through the chart
    let mut ev = Vec::new();
    let mut ok = !charts.is_empty();
    let mut fiber_counts = Vec::new();
    for s in 0..100 {
        let i = s % charts.len().max(1);
        let Some(c) = charts.get(i) else { break };
        let y = random_unit_point(&mut rng, p, n, level);
        let x = c.power.apply(&y);
        let enumerated: u64 = x
            .iter()
            .zip(c.power.lambda())
            .map(|(xi, l)| enumerate_preimages(l, c.power.exponent(), xi, p, level))
            .product();
        let expected = c.fiber_size();
        fiber_counts.push((i, x.clone(), enumerated, expected));
        if enumerated != expected {
            ok = false;
            ev.push(format!("chart {i}: {enumerated} preimages of {x:?}, expected {expected}"));
            continue;
        }
        let m = match chart_image_membership(&c.power, &x, prec) {
            Ok(m) => m,
            Err(e) => {
                ok = false;
                ev.push(format!("chart {i}: {e}"));
                continue;
            }
        };
        if m.reps.len() as u64 != expected {
            ok = false;
            ev.push(format!("chart {i}: {} roots of {x:?}", m.reps.len()));
        }
        let hensel = match &c.chart {
            Chart::Composite(cs) => cs.iter().find_map(|c| match c {
                Chart::Hensel(h) => Some(h),
                _ => None,
            }),
            _ => None,
        };
        let target = match residues(&x, p, c.residue_prec) {
            Ok(t) => from_residues(&t),
            Err(e) => {
                ok = false;
                ev.push(format!("chart {i}: {e}"));
                continue;
            }
        };
        for r in &m.reps {
            let back = match hensel {
                Some(h) => h.forward(r).and_then(|pre| c.apply_residues(&pre)),
                None => c.apply_residues(r),
            };
            if back.as_ref().ok() != Some(&target) {
                ok = false;
                ev.push(format!("chart {i}: rep {r:?} maps to {back:?}, not {x:?}"));
            }
        }
    }
    ev.push(format!("{} fibers enumerated at level {level}", fiber_counts.len()));
    verdicts.push(ConclusionVerdict { conclusion: 2, name: "constant fiber size", passed: ok, evidence: ev });

    // (3) f_j(φ(x)) ≡ c x^α U(x) with U a unit
    let mut ev = Vec::new();
    let mut ok = !charts.is_empty() && f.len() == charts[0].forms.len();
    for (i, c) in charts.iter().enumerate() {
        for (j, form) in c.forms.iter().enumerate() {
            if !is_principal_unit(&form.unit, p) {
                ok = false;
                ev.push(format!("chart {i}, f{}: {} is not a unit", j + 1, form.unit));
            }
        }
        for _ in 0..per_chart {
            let x = random_nonzero_point(&mut rng, p, n, level);
            for (j, (g, form)) in f.iter().zip(&c.forms).enumerate() {
                match normal_form_residues(c, g, form, &x) {
                    Ok((lhs, rhs)) if lhs == rhs => {}
                    Ok((lhs, rhs)) => {
                        ok = false;
                        ev.push(format!("chart {i}, f{} at {x:?}: {lhs} vs {rhs} mod {p}^{}", j + 1, c.residue_prec));
                    }
                    Err(e) => {
                        ok = false;
                        ev.push(format!("chart {i}, f{}: {e}", j + 1));
                    }
                }
            }
        }
    }
    ev.push(format!("{} sample points per chart", per_chart));
    verdicts.push(ConclusionVerdict { conclusion: 3, name: "unit times monomial", passed: ok, evidence: ev });

    // (4) disjoint images covering the complement of the hyperplanes
    let mut ev = Vec::new();
    let mut ok = !charts.is_empty();
    for a in 0..charts.len() {
        for b in a + 1..charts.len() {
            match charts[a].power.separated_from(&charts[b].power) {
                Ok(true) => {}
                other => {
                    ok = false;
                    ev.push(format!("charts {a} and {b} not separated: {other:?}"));
                }
            }
        }
    }
    for _ in 0..100 {
        let x = random_nonzero_point(&mut rng, p, n, level);
        let hits = charts
            .iter()
            .filter(|c| chart_image_membership(&c.power, &x, prec).is_ok_and(|m| m.inside))
            .count();
        if hits != 1 {
            ok = false;
            ev.push(format!("{x:?} lies in {hits} images"));
        }
    }
    ev.push("100 density probes".into());
    verdicts.push(ConclusionVerdict { conclusion: 4, name: "disjoint dense images", passed: ok, evidence: ev });

    // (5) first function pulls back to a monomial or a unit
    let mut ev = Vec::new();
    let mut ok = !charts.is_empty();
    for (i, c) in charts.iter().enumerate() {
        match c.forms.first() {
            Some(form) if form.is_monomial() || form.is_unit() => {}
            Some(form) => {
                ok = false;
                ev.push(format!("chart {i}: first form {form}"));
            }
            None => ok = false,
        }
    }
    verdicts.push(ConclusionVerdict { conclusion: 5, name: "monomial or unit", passed: ok, evidence: ev });

    let mut mass_checks = Vec::new();
    for c in charts {
        let y = random_unit_point(&mut rng, p, n, level.min(3));
        match pushforward_mass_check(c, &y) {
            Ok(m) => mass_checks.push(m),
            Err(e) => {
                if let Some(v) = verdicts.get_mut(1) {
                    v.passed = false;
                    v.evidence.push(format!("pushforward failed: {e}"));
                }
            }
        }
    }

    ResolutionCertificate {
        p,
        level,
        prec,
        charts: charts.to_vec(),
        verdicts,
        fiber_counts,
        mass_checks,
    }
}

/// Pushes Haar measure on `Z_p^n` through the chart and integrates the
/// indicator of a small ball around the image of `y`.
pub fn pushforward_mass_check(chart: &ResolvedChart, y: &[Rat]) -> Result<MassCheck> {
    let p = chart.power.p();
    let n = chart.dim();
    let exponent = chart.power.exponent();
    let z = chart.power.apply(y);
    let e = int_vp(exponent, p) as i64;
    let extra = if p.get() == 2 { 2 } else { 1 };
    let level = z.iter().map(|c| vp(c, p)).max().unwrap_or(0) + 2 * e + extra;
    let coset = Ball::new(p, z.clone(), level);
    let mut expected = Rat::from_integer(chart.fiber_size().into()) * p.rpow(-(n as i64) * level);
    for (yi, l) in y.iter().zip(chart.power.lambda()) {
        let deriv = Rat::from_integer(exponent.into()) * l * rpow(yi, exponent - 1);
        expected *= p.rpow(vp(&deriv, p));
    }
    let haar = Distribution::haar_on(ClopenSet::from_ball(Ball::origin(p, n, 0)));
    let push = Distribution::pushforward_chart(&haar, chart.chart_map_at(level, true)?)?;
    let computed = push.eval(&SchwartzBruhat::indicator_ball(&coset)?)?;
    Ok(MassCheck {
        coset,
        computed,
        expected,
    })
}
