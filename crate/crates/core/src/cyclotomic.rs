//! Exact arithmetic in `Q(i, ζ_{p^r})`.
//!
//! Elements are stored on the power basis `{ζ^j : 0 <= j < φ(p^r)}` of
//! `Q(ζ_{p^r})`, tensored with `{1, i}` for odd `p`. For `p = 2` the unit `i`
//! is `ζ_4` and lives in the tower itself. Values are kept canonical: zero
//! coordinates are dropped and the level is lowered as far as possible, so
//! structural equality is field equality.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::padic::{fmt_rat, Prime};
use crate::{Error, Rat, Result};

/// Largest admissible cyclotomic level `r`.
pub const MAX_LEVEL: u32 = 12;

type Coords = BTreeMap<u64, Rat>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExactComplex {
    p: Prime,
    level: u32,
    re: Coords,
    im: Coords,
}

fn order(p: Prime, level: u32) -> u64 {
    p.get().pow(level)
}

fn phi(p: Prime, level: u32) -> u64 {
    if level == 0 {
        1
    } else {
        (p.get() - 1) * p.get().pow(level - 1)
    }
}

/// Adds `c·ζ^e` to `coords`, reducing `e` onto the power basis.
fn add_term(coords: &mut Coords, p: Prime, level: u32, e: u64, c: &Rat) {
    let e = e % order(p, level);
    let f = phi(p, level);
    if e < f {
        bump(coords, e, c.clone());
        return;
    }
    // Σ_{j<p} ζ^{t + j·p^{r-1}} = 0
    let step = order(p, level - 1);
    let t = e - f;
    for j in 0..p.get() - 1 {
        bump(coords, t + j * step, -c.clone());
    }
}

fn bump(coords: &mut Coords, e: u64, c: Rat) {
    use std::collections::btree_map::Entry;
    match coords.entry(e) {
        Entry::Vacant(v) => {
            if !c.is_zero() {
                v.insert(c);
            }
        }
        Entry::Occupied(mut o) => {
            *o.get_mut() += c;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

fn lift(coords: &Coords, factor: u64) -> Coords {
    coords.iter().map(|(e, c)| (e * factor, c.clone())).collect()
}

fn poly_mul(a: &Coords, b: &Coords, p: Prime, level: u32) -> Coords {
    let mut out = Coords::new();
    if a.is_empty() || b.is_empty() {
        return out;
    }
    // multiply in Z[x]/(x^{p^r} - 1) over a common denominator, then reduce
    // onto the power basis once
    let n = order(p, level) as usize;
    let (da, na) = integral(a);
    let (db, nb) = integral(b);
    let conv = convolve_small(&na, &nb, n).unwrap_or_else(|| convolve_big(&na, &nb, n));
    let den = da * db;
    for (e, c) in conv.into_iter().enumerate() {
        if !c.is_zero() {
            add_term(&mut out, p, level, e as u64, &Rat::new(c, den.clone()));
        }
    }
    out
}

/// Common denominator and integer numerators of the coordinates.
fn integral(a: &Coords) -> (BigInt, Vec<(u64, BigInt)>) {
    let den = a.values().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let nums = a
        .iter()
        .map(|(e, c)| (*e, c.numer() * (&den / c.denom())))
        .collect();
    (den, nums)
}

fn convolve_small(a: &[(u64, BigInt)], b: &[(u64, BigInt)], n: usize) -> Option<Vec<BigInt>> {
    let small = |v: &[(u64, BigInt)]| -> Option<Vec<(usize, i128)>> {
        v.iter().map(|(e, c)| c.to_i64().map(|x| (*e as usize, x as i128))).collect()
    };
    let (a, b) = (small(a)?, small(b)?);
    let mut acc = vec![0i128; n];
    for &(ea, ca) in &a {
        for &(eb, cb) in &b {
            let slot = &mut acc[(ea + eb) % n];
            *slot = slot.checked_add(ca * cb)?;
        }
    }
    Some(acc.into_iter().map(BigInt::from).collect())
}

fn convolve_big(a: &[(u64, BigInt)], b: &[(u64, BigInt)], n: usize) -> Vec<BigInt> {
    let mut acc = vec![BigInt::zero(); n];
    for (ea, ca) in a {
        for (eb, cb) in b {
            acc[(ea + eb) as usize % n] += ca * cb;
        }
    }
    acc
}

fn poly_add(a: &Coords, b: &Coords) -> Coords {
    let mut out = a.clone();
    for (e, c) in b {
        bump(&mut out, *e, c.clone());
    }
    out
}

fn poly_neg(a: &Coords) -> Coords {
    a.iter().map(|(e, c)| (*e, -c)).collect()
}

impl ExactComplex {
    pub fn zero(p: Prime) -> Self {
        ExactComplex {
            p,
            level: 0,
            re: Coords::new(),
            im: Coords::new(),
        }
    }

    pub fn one(p: Prime) -> Self {
        ExactComplex::from_rat(p, Rat::one())
    }

    pub fn from_rat(p: Prime, q: Rat) -> Self {
        let mut re = Coords::new();
        bump(&mut re, 0, q);
        ExactComplex {
            p,
            level: 0,
            re,
            im: Coords::new(),
        }
    }

    pub fn from_int(p: Prime, n: i64) -> Self {
        ExactComplex::from_rat(p, Rat::from_integer(n.into()))
    }

    /// The imaginary unit.
    pub fn i(p: Prime) -> Self {
        if p.get() == 2 {
            return ExactComplex::zeta(p, 2, 1).expect("level 2 is below the cap");
        }
        let mut im = Coords::new();
        im.insert(0, Rat::one());
        ExactComplex {
            p,
            level: 0,
            re: Coords::new(),
            im,
        }
    }

    /// `a + b·i` with rational `a`, `b`.
    pub fn gaussian(p: Prime, a: Rat, b: Rat) -> Self {
        ExactComplex::from_rat(p, a) + ExactComplex::i(p).scale(&b)
    }

    /// `ζ_{p^r}^e` with `ζ_{p^r} = exp(2πi/p^r)`.
    pub fn zeta(p: Prime, r: u32, e: i64) -> Result<Self> {
        if r > MAX_LEVEL {
            return Err(Error::LevelCap(r));
        }
        let n = order(p, r) as i64;
        let mut re = Coords::new();
        add_term(&mut re, p, r, e.rem_euclid(n) as u64, &Rat::one());
        Ok(ExactComplex {
            p,
            level: r,
            re,
            im: Coords::new(),
        }
        .canonical())
    }

    pub fn p(&self) -> Prime {
        self.p
    }

    /// Current (minimal) cyclotomic level.
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_empty() && self.im.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_rational().is_some_and(|q| q.is_one())
    }

    /// The value as a rational, when it is one.
    pub fn as_rational(&self) -> Option<Rat> {
        if self.level != 0 || !self.im.is_empty() {
            return None;
        }
        Some(self.re.get(&0).cloned().unwrap_or_else(Rat::zero))
    }

    fn check_prime(&self, other: &ExactComplex) {
        assert_eq!(
            self.p, other.p,
            "cyclotomic values over different primes cannot be combined"
        );
    }

    /// The same value expressed at level `r >= self.level`.
    fn coords_at(&self, r: u32) -> (Coords, Coords) {
        debug_assert!(r >= self.level);
        let factor = self.p.get().pow(r - self.level);
        (lift(&self.re, factor), lift(&self.im, factor))
    }

    fn canonical(mut self) -> Self {
        let p = self.p.get();
        while self.level > 0
            && self.re.keys().chain(self.im.keys()).all(|e| e % p == 0)
        {
            self.re = self.re.iter().map(|(e, c)| (e / p, c.clone())).collect();
            self.im = self.im.iter().map(|(e, c)| (e / p, c.clone())).collect();
            self.level -= 1;
        }
        if self.re.is_empty() && self.im.is_empty() {
            self.level = 0;
        }
        self
    }

    pub fn scale(&self, q: &Rat) -> Self {
        if q.is_zero() {
            return ExactComplex::zero(self.p);
        }
        ExactComplex {
            p: self.p,
            level: self.level,
            re: self.re.iter().map(|(e, c)| (*e, c * q)).collect(),
            im: self.im.iter().map(|(e, c)| (*e, c * q)).collect(),
        }
    }

    /// `self · ζ_{p^r}^e`.
    pub fn mul_zeta(&self, r: u32, e: i64) -> Result<Self> {
        if r > MAX_LEVEL {
            return Err(Error::LevelCap(r));
        }
        if self.is_zero() {
            return Ok(self.clone());
        }
        let level = r.max(self.level);
        let (re, im) = self.coords_at(level);
        let n = order(self.p, level) as i64;
        let base = e.rem_euclid(order(self.p, r) as i64) as u64;
        let shift = (base * self.p.get().pow(level - r)) % n as u64;
        let mut out_re = Coords::new();
        let mut out_im = Coords::new();
        for (k, c) in &re {
            add_term(&mut out_re, self.p, level, k + shift, c);
        }
        for (k, c) in &im {
            add_term(&mut out_im, self.p, level, k + shift, c);
        }
        Ok(ExactComplex {
            p: self.p,
            level,
            re: out_re,
            im: out_im,
        }
        .canonical())
    }

    /// Complex conjugate.
    pub fn conj(&self) -> Self {
        let n = order(self.p, self.level);
        let flip = |coords: &Coords, sign: bool| {
            let mut out = Coords::new();
            for (e, c) in coords {
                let c = if sign { -c } else { c.clone() };
                add_term(&mut out, self.p, self.level, (n - e) % n, &c);
            }
            out
        };
        ExactComplex {
            p: self.p,
            level: self.level,
            re: flip(&self.re, false),
            im: flip(&self.im, true),
        }
        .canonical()
    }

    /// Multiplicative inverse.
    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivideByZero);
        }
        if self.im.is_empty() {
            return Ok(self.inv_real_part(&self.re));
        }
        // (a + bi)^{-1} = (a - bi) / (a² + b²)
        let a = ExactComplex {
            im: Coords::new(),
            ..self.clone()
        };
        let b = ExactComplex {
            re: self.im.clone(),
            im: Coords::new(),
            ..self.clone()
        };
        let n = &a * &a + &b * &b;
        let n_inv = n.inv_real_part(&n.re);
        let conj_i = a - &b * &ExactComplex::i(self.p);
        Ok(&conj_i * &n_inv)
    }

    /// Inverse of a nonzero element of `Q(ζ_{p^r})` by solving the
    /// multiplication-matrix system over `Q`.
    /// Inverse of the element of `Q(ζ_{p^level})` with power-basis
    /// coordinates `coords`.
    ///
    /// Above the base field this divides the product of the conjugates over
    /// `Q(ζ_{p^{level-1}})` by the relative norm, which lies one level down.
    fn inv_real_part(&self, coords: &Coords) -> Self {
        let (p, level) = (self.p, self.level);
        if level >= 2 {
            let modulus = order(p, level);
            let step = order(p, level - 1);
            let element = ExactComplex {
                p,
                level,
                re: coords.clone(),
                im: Coords::new(),
            };
            let mut others = ExactComplex::one(p);
            for k in 1..p.get() {
                let mult = 1 + k * step;
                let mut conj = Coords::new();
                for (e, c) in coords {
                    add_term(&mut conj, p, level, e * mult % modulus, c);
                }
                let sigma = ExactComplex {
                    p,
                    level,
                    re: conj,
                    im: Coords::new(),
                }
                .canonical();
                others = &others * &sigma;
            }
            let norm = &element * &others;
            if norm.level < level && norm.im.is_empty() {
                return &others * &norm.inv_real_part(&norm.re);
            }
        }
        self.inv_by_elimination(coords)
    }

    fn inv_by_elimination(&self, coords: &Coords) -> Self {
        let (p, level) = (self.p, self.level);
        let dim = phi(p, level) as usize;
        // column j = coords · ζ^j
        let mut m = vec![vec![Rat::zero(); dim + 1]; dim];
        for j in 0..dim {
            let mut col = Coords::new();
            for (e, c) in coords {
                add_term(&mut col, p, level, e + j as u64, c);
            }
            for (row, c) in col {
                m[row as usize][j] = c;
            }
        }
        m[0][dim] = Rat::one();
        for col in 0..dim {
            let pivot = (col..dim)
                .find(|&r| !m[r][col].is_zero())
                .expect("nonzero field element has an invertible matrix");
            m.swap(col, pivot);
            let lead = m[col][col].clone();
            for x in m[col][col..].iter_mut() {
                *x /= &lead;
            }
            let pivot_row = m[col].clone();
            for (r, row) in m.iter_mut().enumerate() {
                if r == col || row[col].is_zero() {
                    continue;
                }
                let f = row[col].clone();
                for (x, y) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                    *x -= &f * y;
                }
            }
        }
        let mut re = Coords::new();
        for (j, row) in m.into_iter().enumerate() {
            bump(&mut re, j as u64, row[dim].clone());
        }
        ExactComplex {
            p,
            level,
            re,
            im: Coords::new(),
        }
        .canonical()
    }

    pub fn try_div(&self, other: &ExactComplex) -> Result<Self> {
        Ok(self * &other.inv()?)
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = ExactComplex::one(self.p);
        let mut sq = base;
        let mut k = e.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &sq;
            }
            k >>= 1;
            if k > 0 {
                sq = &sq * &sq;
            }
        }
        Ok(acc)
    }

    /// Floating-point embedding `(re, im)`, for reporting only.
    pub fn to_f64(&self) -> (f64, f64) {
        let n = order(self.p, self.level) as f64;
        let (mut x, mut y) = (0.0, 0.0);
        let mut acc = |coords: &Coords, rot: bool| {
            for (e, c) in coords {
                let c = c.to_f64().unwrap_or(f64::NAN);
                let t = std::f64::consts::TAU * (*e as f64) / n;
                let (s, co) = t.sin_cos();
                if rot {
                    x -= c * s;
                    y += c * co;
                } else {
                    x += c * co;
                    y += c * s;
                }
            }
        };
        acc(&self.re, false);
        acc(&self.im, true);
        (x, y)
    }

    pub fn modulus_f64(&self) -> f64 {
        let (x, y) = self.to_f64();
        x.hypot(y)
    }

    /// Float rendering `a+bi` with `digits` significant decimals.
    pub fn format_float(&self, digits: usize) -> String {
        let (x, y) = self.to_f64();
        let clean = |v: f64| if v.abs() < 0.5 * 10f64.powi(-(digits as i32)) { 0.0 } else { v };
        let (x, y) = (clean(x), clean(y));
        if y == 0.0 {
            format!("{x:.digits$}")
        } else if y < 0.0 {
            format!("{x:.digits$}-{:.digits$}i", -y)
        } else {
            format!("{x:.digits$}+{y:.digits$}i")
        }
    }

    fn terms(&self) -> Vec<(Rat, bool, u64)> {
        let mut out: Vec<(Rat, bool, u64)> = self
            .re
            .iter()
            .map(|(e, c)| (c.clone(), false, *e))
            .collect();
        out.extend(self.im.iter().map(|(e, c)| (c.clone(), true, *e)));
        out
    }
}

/// Running sum of rotated values at a fixed level.
#[derive(Debug, Clone)]
pub struct Accumulator {
    p: Prime,
    level: u32,
    re: Coords,
    im: Coords,
}

impl Accumulator {
    pub fn new(p: Prime, level: u32) -> Result<Self> {
        if level > MAX_LEVEL {
            return Err(Error::LevelCap(level));
        }
        Ok(Accumulator {
            p,
            level,
            re: Coords::new(),
            im: Coords::new(),
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Adds `value · ζ_{p^level}^e`; `value.level()` must not exceed the
    /// accumulator level.
    pub fn add_rotated(&mut self, value: &ExactComplex, e: u64) {
        assert!(value.level <= self.level, "accumulator level too small");
        let n = order(self.p, self.level);
        let factor = self.p.get().pow(self.level - value.level);
        for (k, c) in &value.re {
            add_term(&mut self.re, self.p, self.level, (k * factor + e) % n, c);
        }
        for (k, c) in &value.im {
            add_term(&mut self.im, self.p, self.level, (k * factor + e) % n, c);
        }
    }

    pub fn add(&mut self, value: &ExactComplex) {
        self.add_rotated(value, 0);
    }

    pub fn add_rational_rotated(&mut self, q: &Rat, e: u64) {
        let n = order(self.p, self.level);
        add_term(&mut self.re, self.p, self.level, e % n, q);
    }

    pub fn finish(self) -> ExactComplex {
        ExactComplex {
            p: self.p,
            level: self.level,
            re: self.re,
            im: self.im,
        }
        .canonical()
    }
}

impl fmt::Display for ExactComplex {
    /// Literal syntax `c*i*zeta(p^r)^e` joined by `+`/`-`; parseable by the
    /// expression language.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (c, imag, e)) in self.terms().into_iter().enumerate() {
            let negative = c.is_negative();
            let mag = c.abs();
            if k == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if negative { " - " } else { " + " })?;
            }
            let mut factors = Vec::new();
            if !mag.is_one() || (!imag && e == 0) {
                factors.push(fmt_rat(&mag));
            }
            if imag {
                factors.push("i".to_string());
            }
            if e != 0 {
                factors.push(format!("zeta({}^{})^{}", self.p, self.level, e));
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

impl<'a> Add<&'a ExactComplex> for &'a ExactComplex {
    type Output = ExactComplex;

    fn add(self, rhs: &ExactComplex) -> ExactComplex {
        self.check_prime(rhs);
        let level = self.level.max(rhs.level);
        let (ar, ai) = self.coords_at(level);
        let (br, bi) = rhs.coords_at(level);
        ExactComplex {
            p: self.p,
            level,
            re: poly_add(&ar, &br),
            im: poly_add(&ai, &bi),
        }
        .canonical()
    }
}

impl Add for ExactComplex {
    type Output = ExactComplex;

    fn add(self, rhs: ExactComplex) -> ExactComplex {
        &self + &rhs
    }
}

impl AddAssign<&ExactComplex> for ExactComplex {
    fn add_assign(&mut self, rhs: &ExactComplex) {
        if rhs.is_zero() {
            return;
        }
        if self.level >= rhs.level {
            self.check_prime(rhs);
            let factor = self.p.get().pow(self.level - rhs.level);
            for (e, c) in &rhs.re {
                bump(&mut self.re, e * factor, c.clone());
            }
            for (e, c) in &rhs.im {
                bump(&mut self.im, e * factor, c.clone());
            }
            let taken = std::mem::replace(self, ExactComplex::zero(rhs.p));
            *self = taken.canonical();
        } else {
            *self = &*self + rhs;
        }
    }
}

impl<'a> Sub<&'a ExactComplex> for &'a ExactComplex {
    type Output = ExactComplex;

    fn sub(self, rhs: &ExactComplex) -> ExactComplex {
        self + &(-rhs)
    }
}

impl Sub for ExactComplex {
    type Output = ExactComplex;

    fn sub(self, rhs: ExactComplex) -> ExactComplex {
        &self - &rhs
    }
}

impl Neg for &ExactComplex {
    type Output = ExactComplex;

    fn neg(self) -> ExactComplex {
        ExactComplex {
            p: self.p,
            level: self.level,
            re: poly_neg(&self.re),
            im: poly_neg(&self.im),
        }
    }
}

impl Neg for ExactComplex {
    type Output = ExactComplex;

    fn neg(self) -> ExactComplex {
        -&self
    }
}

impl<'a> Mul<&'a ExactComplex> for &'a ExactComplex {
    type Output = ExactComplex;

    fn mul(self, rhs: &ExactComplex) -> ExactComplex {
        self.check_prime(rhs);
        let p = self.p;
        if let Some(q) = rhs.as_rational() {
            return self.scale(&q);
        }
        if let Some(q) = self.as_rational() {
            return rhs.scale(&q);
        }
        let level = self.level.max(rhs.level);
        let (ar, ai) = self.coords_at(level);
        let (br, bi) = rhs.coords_at(level);
        let re = poly_add(
            &poly_mul(&ar, &br, p, level),
            &poly_neg(&poly_mul(&ai, &bi, p, level)),
        );
        let im = poly_add(&poly_mul(&ar, &bi, p, level), &poly_mul(&ai, &br, p, level));
        ExactComplex { p, level, re, im }.canonical()
    }
}

impl Mul for ExactComplex {
    type Output = ExactComplex;

    fn mul(self, rhs: ExactComplex) -> ExactComplex {
        &self * &rhs
    }
}
