//! Schwartz-Bruhat functions on `Q_p^n` and their Fourier transform.
//!
//! A function with support level `m` and constancy level `k` is supported in
//! `p^{-m} Z_p^n` and constant on cosets of `p^k Z_p^n`. Its table is indexed
//! by `a ∈ [0, p^{m+k})^n`, the coset of the point `a·p^{-m}`.

mod character;
mod fourier;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::Zero;

use crate::padic::{fmt_rat, residue, to_u64, valuation, Ball, ClopenSet, Prime, Valuation};
use crate::{Error, ExactComplex, Rat, Result};

pub use character::{psi, psi_exponent, Character};

/// Coset index of a Schwartz-Bruhat table.
pub type Index = Vec<u64>;

/// Largest table (number of cosets) the crate will materialize.
pub const MAX_CELLS: u64 = 1 << 24;

#[derive(Debug, Clone)]
pub struct SchwartzBruhat {
    p: Prime,
    n: usize,
    m: i64,
    k: i64,
    table: BTreeMap<Index, ExactComplex>,
}

fn side_len(p: Prime, n: usize, span: i64) -> Result<u64> {
    if span < 0 {
        return Err(Error::InvalidLevel(format!(
            "support level plus constancy level is {span} < 0"
        )));
    }
    p.pow_u64(span as u32)
        .filter(|s| s.checked_pow(n as u32).is_some_and(|c| c <= MAX_CELLS))
        .ok_or_else(|| Error::TooLarge(format!("{p}^({n}*{span}) cosets")))
}

impl SchwartzBruhat {
    pub fn new(
        p: Prime,
        n: usize,
        m: i64,
        k: i64,
        table: BTreeMap<Index, ExactComplex>,
    ) -> Result<Self> {
        let side = side_len(p, n, m + k)?;
        for (idx, v) in &table {
            if idx.len() != n {
                return Err(Error::DimensionMismatch(n, idx.len()));
            }
            if idx.iter().any(|&a| a >= side) {
                return Err(Error::InvalidLevel(format!("index {idx:?} outside [0, {side})")));
            }
            if v.p() != p {
                return Err(Error::PrimeMismatch(p.get(), v.p().get()));
            }
        }
        let table = table.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        Ok(SchwartzBruhat { p, n, m, k, table })
    }

    pub fn zero(p: Prime, n: usize) -> Self {
        SchwartzBruhat {
            p,
            n,
            m: 0,
            k: 0,
            table: BTreeMap::new(),
        }
    }

    /// Tabulates `f` on coset representatives at levels `(m, k)`.
    pub fn from_fn(
        p: Prime,
        n: usize,
        m: i64,
        k: i64,
        mut f: impl FnMut(&[Rat]) -> Result<ExactComplex>,
    ) -> Result<Self> {
        let side = side_len(p, n, m + k)?;
        let mut table = BTreeMap::new();
        for idx in indices(n, side) {
            let x = point_of(p, m, &idx);
            let v = f(&x)?;
            if !v.is_zero() {
                table.insert(idx, v);
            }
        }
        Ok(SchwartzBruhat { p, n, m, k, table })
    }

    pub fn indicator_ball(ball: &Ball) -> Result<Self> {
        let set = ClopenSet::from_ball(ball.clone());
        SchwartzBruhat::indicator(&set)
    }

    /// `1_X` for a bounded box union `X`.
    pub fn indicator(set: &ClopenSet) -> Result<Self> {
        let (p, n) = (set.p(), set.dim());
        if set.is_empty() {
            return Ok(SchwartzBruhat::zero(p, n));
        }
        let k = set.max_level().expect("nonempty");
        let mut m = -set.min_level().expect("nonempty");
        for b in set.balls() {
            for c in b.center() {
                if let Valuation::Finite(v) = valuation(c, p) {
                    m = m.max(-v);
                }
            }
        }
        let one = ExactComplex::one(p);
        let mut table = BTreeMap::new();
        for b in set.cosets_at(k)? {
            table.insert(index_of(p, m, k, b.center()), one.clone());
        }
        SchwartzBruhat::new(p, n, m, k, table)
    }

    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn support_level(&self) -> i64 {
        self.m
    }

    pub fn constancy_level(&self) -> i64 {
        self.k
    }

    /// Number of cosets per axis, `p^{m+k}`.
    pub fn side(&self) -> u64 {
        side_len(self.p, self.n, self.m + self.k).expect("validated at construction")
    }

    /// Nonzero entries.
    pub fn table(&self) -> &BTreeMap<Index, ExactComplex> {
        &self.table
    }

    pub fn is_zero(&self) -> bool {
        self.table.is_empty()
    }

    /// Canonical representative point of a table index.
    pub fn point(&self, idx: &[u64]) -> Vec<Rat> {
        point_of(self.p, self.m, idx)
    }

    /// The coset ball of a table index.
    pub fn ball(&self, idx: &[u64]) -> Ball {
        Ball::new(self.p, self.point(idx), self.k)
    }

    /// Nonzero values paired with their coset balls.
    pub fn entries(&self) -> impl Iterator<Item = (Ball, &ExactComplex)> + '_ {
        self.table.iter().map(|(i, v)| (self.ball(i), v))
    }

    /// Table index of `x`, or `None` when `x` lies outside the support box.
    pub fn index_at(&self, x: &[Rat]) -> Option<Index> {
        assert_eq!(x.len(), self.n);
        if x.iter().any(|c| !valuation(c, self.p).at_least(-self.m)) {
            return None;
        }
        Some(index_of(self.p, self.m, self.k, x))
    }

    pub fn value_at(&self, x: &[Rat]) -> ExactComplex {
        self.index_at(x)
            .and_then(|i| self.table.get(&i).cloned())
            .unwrap_or_else(|| ExactComplex::zero(self.p))
    }

    /// The same function tabulated at finer levels `m2 >= m`, `k2 >= k`.
    pub fn refine(&self, m2: i64, k2: i64) -> Result<Self> {
        if m2 < self.m || k2 < self.k {
            return Err(Error::InvalidLevel(format!(
                "cannot refine levels ({}, {}) to ({m2}, {k2})",
                self.m, self.k
            )));
        }
        side_len(self.p, self.n, m2 + k2)?;
        let shift = self.p.pow_u64((m2 - self.m) as u32).expect("fits");
        let step = self.p.pow_u64((m2 + self.k) as u32).expect("fits");
        let count = self.p.pow_u64((k2 - self.k) as u32).expect("fits");
        let mut table = BTreeMap::new();
        for (idx, v) in &self.table {
            let base: Vec<u64> = idx.iter().map(|a| a * shift).collect();
            for offs in indices(self.n, count) {
                let new_idx = base.iter().zip(&offs).map(|(b, j)| b + j * step).collect();
                table.insert(new_idx, v.clone());
            }
        }
        Ok(SchwartzBruhat {
            p: self.p,
            n: self.n,
            m: m2,
            k: k2,
            table,
        })
    }

    fn common_pair(&self, other: &SchwartzBruhat) -> Result<(SchwartzBruhat, SchwartzBruhat)> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch(self.p.get(), other.p.get()));
        }
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        let (m, k) = (self.m.max(other.m), self.k.max(other.k));
        Ok((self.refine(m, k)?, other.refine(m, k)?))
    }

    fn zip_with(
        &self,
        other: &SchwartzBruhat,
        union: bool,
        f: impl Fn(&ExactComplex, &ExactComplex) -> ExactComplex,
    ) -> Result<SchwartzBruhat> {
        let (a, b) = self.common_pair(other)?;
        let zero = ExactComplex::zero(self.p);
        let mut keys: Vec<&Index> = a.table.keys().collect();
        if union {
            keys.extend(b.table.keys());
            keys.sort();
            keys.dedup();
        }
        let mut table = BTreeMap::new();
        for key in keys {
            let v = f(a.table.get(key).unwrap_or(&zero), b.table.get(key).unwrap_or(&zero));
            if !v.is_zero() {
                table.insert(key.clone(), v);
            }
        }
        Ok(SchwartzBruhat { table, ..a })
    }

    pub fn add(&self, other: &SchwartzBruhat) -> Result<SchwartzBruhat> {
        self.zip_with(other, true, |x, y| x + y)
    }

    pub fn sub(&self, other: &SchwartzBruhat) -> Result<SchwartzBruhat> {
        self.zip_with(other, true, |x, y| x - y)
    }

    /// Pointwise product.
    pub fn mul(&self, other: &SchwartzBruhat) -> Result<SchwartzBruhat> {
        self.zip_with(other, false, |x, y| x * y)
    }

    pub fn scale(&self, c: &ExactComplex) -> SchwartzBruhat {
        self.map_values(|v| v * c)
    }

    pub fn scale_rat(&self, q: &Rat) -> SchwartzBruhat {
        self.map_values(|v| v.scale(q))
    }

    pub fn conj(&self) -> SchwartzBruhat {
        self.map_values(ExactComplex::conj)
    }

    fn map_values(&self, f: impl Fn(&ExactComplex) -> ExactComplex) -> SchwartzBruhat {
        let table = self
            .table
            .iter()
            .filter_map(|(i, v)| {
                let w = f(v);
                (!w.is_zero()).then(|| (i.clone(), w))
            })
            .collect();
        SchwartzBruhat {
            table,
            ..self.clone()
        }
    }

    /// `x ↦ φ(-x)`.
    pub fn reflect(&self) -> SchwartzBruhat {
        let side = self.side();
        let table = self
            .table
            .iter()
            .map(|(i, v)| (i.iter().map(|a| (side - a) % side).collect(), v.clone()))
            .collect();
        SchwartzBruhat {
            table,
            ..self.clone()
        }
    }

    /// `x ↦ φ(x - a)`.
    pub fn translate(&self, a: &[Rat]) -> Result<SchwartzBruhat> {
        let mut m = self.m;
        for c in a {
            if let Valuation::Finite(v) = valuation(c, self.p) {
                m = m.max(-v);
            }
        }
        let k = self.k.max(-m);
        SchwartzBruhat::from_fn(self.p, self.n, m, k, |x| {
            let y: Vec<Rat> = x.iter().zip(a).map(|(xi, ai)| xi - ai).collect();
            Ok(self.value_at(&y))
        })
    }

    /// Restriction `φ·1_X`.
    pub fn restrict(&self, set: &ClopenSet) -> Result<SchwartzBruhat> {
        self.mul(&SchwartzBruhat::indicator(set)?)
    }

    /// `∫ φ` with `vol(Z_p^n) = 1`.
    pub fn integrate(&self) -> ExactComplex {
        let mut acc = ExactComplex::zero(self.p);
        for v in self.table.values() {
            acc += v;
        }
        acc.scale(&self.p.rpow(-(self.n as i64) * self.k))
    }

    /// `∫ φ·conj(φ')`.
    pub fn plancherel(&self, other: &SchwartzBruhat) -> Result<ExactComplex> {
        Ok(self.mul(&other.conj())?.integrate())
    }

    /// Coarsest equivalent levels: support shrunk and constancy coarsened as
    /// far as the values allow.
    pub fn canonical(&self) -> SchwartzBruhat {
        let mut cur = self.clone();
        if cur.table.is_empty() {
            return SchwartzBruhat::zero(self.p, self.n);
        }
        loop {
            if let Some(next) = cur.shrink_support().or_else(|| cur.coarsen()) {
                cur = next;
            } else {
                return cur;
            }
        }
    }

    fn shrink_support(&self) -> Option<SchwartzBruhat> {
        if self.m + self.k == 0 {
            return None;
        }
        let p = self.p.get();
        if !self.table.keys().all(|i| i.iter().all(|a| a % p == 0)) {
            return None;
        }
        let table = self
            .table
            .iter()
            .map(|(i, v)| (i.iter().map(|a| a / p).collect(), v.clone()))
            .collect();
        Some(SchwartzBruhat {
            m: self.m - 1,
            table,
            ..self.clone()
        })
    }

    fn coarsen(&self) -> Option<SchwartzBruhat> {
        if self.m + self.k == 0 {
            return None;
        }
        let parent_side = self.p.pow_u64((self.m + self.k - 1) as u32)?;
        let siblings = self.p.pow_u64(self.n as u32)? as usize;
        let mut groups: BTreeMap<Index, Vec<&ExactComplex>> = BTreeMap::new();
        for (i, v) in &self.table {
            let parent: Index = i.iter().map(|a| a % parent_side).collect();
            groups.entry(parent).or_default().push(v);
        }
        let mut table = BTreeMap::new();
        for (parent, vals) in groups {
            if vals.len() != siblings || vals.iter().any(|v| *v != vals[0]) {
                return None;
            }
            table.insert(parent, vals[0].clone());
        }
        Some(SchwartzBruhat {
            k: self.k - 1,
            table,
            ..self.clone()
        })
    }

    /// CSV rows `rep,level,value_exact,value_float` for nonzero cosets.
    pub fn to_csv(&self, float_digits: usize) -> String {
        let mut out = String::from("rep,level,value_exact,value_float\n");
        for (idx, v) in &self.table {
            let rep: Vec<String> = self.point(idx).iter().map(fmt_rat).collect();
            let _ = writeln!(
                out,
                "\"({})\",{},\"{}\",{}",
                rep.join(","),
                self.k,
                v,
                v.format_float(float_digits)
            );
        }
        out
    }
}

impl PartialEq for SchwartzBruhat {
    fn eq(&self, other: &SchwartzBruhat) -> bool {
        match self.common_pair(other) {
            Ok((a, b)) => a.table == b.table,
            Err(_) => false,
        }
    }
}

/// All indices of `[0, side)^n` in lexicographic order.
pub(crate) fn indices(n: usize, side: u64) -> impl Iterator<Item = Index> {
    let total = side.pow(n as u32);
    (0..total).map(move |mut flat| {
        let mut idx = vec![0; n];
        for slot in idx.iter_mut().rev() {
            *slot = flat % side;
            flat /= side;
        }
        idx
    })
}

fn point_of(p: Prime, m: i64, idx: &[u64]) -> Vec<Rat> {
    let scale = p.rpow(-m);
    idx.iter()
        .map(|&a| Rat::from_integer(a.into()) * &scale)
        .collect()
}

/// Index of the level-`k` coset of `x ∈ p^{-m} Z_p^n`.
fn index_of(p: Prime, m: i64, k: i64, x: &[Rat]) -> Index {
    let scale = p.rpow(m);
    let span = (m + k) as u32;
    x.iter()
        .map(|c| {
            let y = c * &scale;
            if y.is_zero() {
                0
            } else {
                to_u64(&residue(&y, p, span)).expect("residue fits")
            }
        })
        .collect()
}
