//! Rational maps on polydiscs with certified moduli of continuity, and the
//! exact cell integrals built on them.

use num_traits::Zero;

use crate::padic::{valuation, Ball, Prime, Valuation};
use crate::poly::Poly;
use crate::schwartz::{psi, SchwartzBruhat};
use crate::{Error, ExactComplex, Rat, Result};

/// How many levels below its starting cell a subdivision may descend.
pub const REFINE_DEPTH: i64 = 40;

/// A product of balls with independent radii: `Π (c_i + p^{ℓ_i} Z_p)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polydisc {
    pub p: Prime,
    pub center: Vec<Rat>,
    pub levels: Vec<i64>,
}

impl Polydisc {
    pub fn new(p: Prime, center: Vec<Rat>, levels: Vec<i64>) -> Self {
        let center = center
            .iter()
            .zip(&levels)
            .map(|(c, &l)| crate::padic::reduce_mod(c, p, l))
            .collect();
        Polydisc { p, center, levels }
    }

    pub fn from_ball(b: &Ball) -> Self {
        Polydisc {
            p: b.p(),
            center: b.center().to_vec(),
            levels: vec![b.level(); b.dim()],
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn volume(&self) -> Rat {
        self.p.rpow(-self.levels.iter().sum::<i64>())
    }

    pub fn max_level(&self) -> i64 {
        self.levels.iter().copied().max().unwrap_or(0)
    }

    /// Valuation of coordinate `i` on the disc, or `None` if it contains 0.
    pub fn coordinate_valuation(&self, i: usize) -> Option<i64> {
        match valuation(&self.center[i], self.p) {
            Valuation::Finite(v) if v < self.levels[i] => Some(v),
            _ => None,
        }
    }

    /// Splits every coordinate one level down.
    pub fn children(&self) -> Vec<Polydisc> {
        let p = self.p.get();
        let mut out = vec![Vec::<Rat>::new()];
        for (c, &l) in self.center.iter().zip(&self.levels) {
            let step = self.p.rpow(l);
            let mut next = Vec::with_capacity(out.len() * p as usize);
            for prefix in &out {
                for d in 0..p {
                    let mut v = prefix.clone();
                    v.push(c + &step * Rat::from_integer(d.into()));
                    next.push(v);
                }
            }
            out = next;
        }
        let levels: Vec<i64> = self.levels.iter().map(|l| l + 1).collect();
        out.into_iter()
            .map(|c| Polydisc::new(self.p, c, levels.clone()))
            .collect()
    }

    pub fn contains_point(&self, x: &[Rat]) -> bool {
        self.center
            .iter()
            .zip(&self.levels)
            .zip(x)
            .all(|((c, &l), y)| valuation(&(y - c), self.p).at_least(l))
    }
}

/// `f(t0 + u)` as a polynomial in `u`.
pub fn taylor(f: &Poly, t0: &[Rat]) -> Poly {
    let n = t0.len();
    if f.nvars() == 0 || n == 0 {
        return f.widen(n);
    }
    let f = f.widen(n);
    let subs: Vec<Poly> = t0
        .iter()
        .enumerate()
        .map(|(i, c)| &Poly::var(i, n) + &Poly::constant(n, c.clone()))
        .collect();
    f.compose(&subs)
}

/// Lower bound for `v(Σ c_α u^α)` over the terms of degree at least
/// `min_degree`, when `v(u_i) >= levels[i]`.
pub fn variation(shifted: &Poly, levels: &[i64], p: Prime, min_degree: u32) -> Valuation {
    let mut best = Valuation::Infinite;
    for (e, c) in shifted.terms() {
        if e.iter().sum::<u32>() < min_degree {
            continue;
        }
        if let Valuation::Finite(v) = valuation(c, p) {
            let shift: i64 = e.iter().zip(levels).map(|(&k, &l)| k as i64 * l).sum();
            best = best.min(Valuation::Finite(v + shift));
        }
    }
    best
}

fn val_gt(a: Valuation, b: i64) -> bool {
    a > Valuation::Finite(b)
}

/// Local behaviour of one component on a polydisc.
#[derive(Debug, Clone, PartialEq)]
pub enum LocalComponent {
    /// `f(t) - f(t0)` has valuation at least `variation` on the disc.
    Tame { value: Rat, variation: Valuation },
    /// The disc contains a pole and `v(f(t)) <= max_valuation` wherever `f`
    /// is defined on it.
    Escape { max_valuation: i64 },
}

/// A map `Q_p^d ⊃ U → Q_p^n` with rational components `num_i / den_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalMap {
    nvars: usize,
    comps: Vec<(Poly, Poly)>,
}

impl RationalMap {
    pub fn new(nvars: usize, comps: Vec<(Poly, Poly)>) -> Self {
        let comps = comps
            .into_iter()
            .map(|(a, b)| (a.widen(nvars), b.widen(nvars)))
            .collect();
        RationalMap { nvars, comps }
    }

    pub fn from_polys(nvars: usize, polys: Vec<Poly>) -> Self {
        RationalMap::new(
            nvars,
            polys.into_iter().map(|f| (f, Poly::one(nvars))).collect(),
        )
    }

    pub fn from_terms(nvars: usize, terms: &[crate::cexp::RationalTerm]) -> Result<Self> {
        let comps = terms
            .iter()
            .map(|t| t.to_fraction(nvars))
            .collect::<Result<Vec<_>>>()?;
        Ok(RationalMap::new(nvars, comps))
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn components(&self) -> &[(Poly, Poly)] {
        &self.comps
    }

    /// The polynomial components, if every denominator is constant.
    pub fn as_polys(&self) -> Option<Vec<Poly>> {
        self.comps
            .iter()
            .map(|(n, d)| d.as_constant().map(|c| n.scale(&c.recip())))
            .collect()
    }

    pub fn eval(&self, t: &[Rat]) -> Option<Vec<Rat>> {
        self.comps
            .iter()
            .map(|(n, d)| {
                let dv = d.eval(t);
                (!dv.is_zero()).then(|| n.eval(t) / dv)
            })
            .collect()
    }

    /// Per-component local data on `cell`; `None` when some component can be
    /// certified neither as tame nor as escaping.
    pub fn local(&self, cell: &Polydisc) -> Option<Vec<LocalComponent>> {
        let p = cell.p;
        let t0 = &cell.center;
        let mut out = Vec::with_capacity(self.comps.len());
        for (num, den) in &self.comps {
            if let Some(c) = den.as_constant() {
                let shifted = taylor(num, t0);
                out.push(LocalComponent::Tame {
                    value: shifted.constant_term() / &c,
                    variation: variation(&shifted.scale(&c.recip()), &cell.levels, p, 1),
                });
                continue;
            }
            let n_sh = taylor(num, t0);
            let d_sh = taylor(den, t0);
            let n0 = n_sh.constant_term();
            let d0 = d_sh.constant_term();
            let var_d = variation(&d_sh, &cell.levels, p, 1);
            if d0.is_zero() {
                let Valuation::Finite(vn0) = valuation(&n0, p) else {
                    return None;
                };
                if !val_gt(variation(&n_sh, &cell.levels, p, 1), vn0) {
                    return None;
                }
                let Valuation::Finite(vd) = var_d else {
                    return None;
                };
                out.push(LocalComponent::Escape {
                    max_valuation: vn0 - vd,
                });
                continue;
            }
            let Valuation::Finite(vd0) = valuation(&d0, p) else {
                unreachable!()
            };
            if !val_gt(var_d, vd0) {
                return None;
            }
            // f(t0+u) - f(t0) = (N(t0+u)·D0 - N0·D(t0+u)) / (D(t0+u)·D0)
            let a = &n_sh.scale(&d0) - &d_sh.scale(&n0);
            let var = match variation(&a, &cell.levels, p, 1) {
                Valuation::Finite(v) => Valuation::Finite(v - 2 * vd0),
                Valuation::Infinite => Valuation::Infinite,
            };
            out.push(LocalComponent::Tame {
                value: n0 / d0,
                variation: var,
            });
        }
        Some(out)
    }
}

fn depth_error(cell: &Polydisc) -> Error {
    Error::Certification(format!(
        "modulus of continuity not certified down to level {} near {:?}",
        cell.max_level(),
        cell.center.iter().map(crate::padic::fmt_rat).collect::<Vec<_>>()
    ))
}

/// Cells of `domain` on which `φ∘map` is constant, paired with the value;
/// cells where the value is zero are dropped.
pub fn pullback_cells(
    phi: &SchwartzBruhat,
    map: &RationalMap,
    domain: &[Polydisc],
) -> Result<Vec<(Polydisc, ExactComplex)>> {
    let m = phi.support_level();
    let k = phi.constancy_level();
    let mut out = Vec::new();
    let mut stack: Vec<(Polydisc, i64)> = domain.iter().map(|c| (c.clone(), c.max_level())).collect();
    while let Some((cell, start)) = stack.pop() {
        let local = map.local(&cell);
        let mut done = false;
        if let Some(local) = &local {
            let mut outside = false;
            let mut constant = true;
            let mut y0 = Vec::with_capacity(local.len());
            for comp in local {
                match comp {
                    LocalComponent::Escape { max_valuation } => {
                        if *max_valuation < -m {
                            outside = true;
                        } else {
                            constant = false;
                        }
                    }
                    LocalComponent::Tame { value, variation } => {
                        if let Valuation::Finite(v) = valuation(value, phi.p()) {
                            if v < -m && val_gt(*variation, v) {
                                outside = true;
                            }
                        }
                        if !variation.at_least(k) {
                            constant = false;
                        }
                        y0.push(value.clone());
                    }
                }
            }
            if outside {
                done = true;
            } else if constant {
                let v = phi.value_at(&y0);
                if !v.is_zero() {
                    out.push((cell.clone(), v));
                }
                done = true;
            }
        }
        if !done {
            if cell.max_level() >= start + REFINE_DEPTH {
                return Err(depth_error(&cell));
            }
            stack.extend(cell.children().into_iter().map(|c| (c, start)));
        }
    }
    Ok(out)
}

/// `∫_domain φ(map(t)) dt`.
pub fn pullback_integral(
    phi: &SchwartzBruhat,
    map: &RationalMap,
    domain: &[Polydisc],
) -> Result<ExactComplex> {
    let mut acc = ExactComplex::zero(phi.p());
    for (cell, v) in pullback_cells(phi, map, domain)? {
        acc += &v.scale(&cell.volume());
    }
    Ok(acc)
}

/// `∫ 1_target(map(t)) ψ(⟨w, map(t)⟩) dt` over `domain`, for a polynomial
/// map. Cells on which the phase is affine up to `pZ_p` are summed in closed
/// form.
pub fn character_integral(
    map: &[Poly],
    domain: &[Polydisc],
    target: &Ball,
    w: &[Rat],
) -> Result<ExactComplex> {
    let p = target.p();
    let nvars = domain.first().map_or(0, Polydisc::dim);
    let mut phase = Poly::zero(nvars);
    for (f, wi) in map.iter().zip(w) {
        phase = &phase + &f.widen(nvars).scale(wi);
    }
    let mut acc = ExactComplex::zero(p);
    let mut stack: Vec<(Polydisc, i64)> = domain.iter().map(|c| (c.clone(), c.max_level())).collect();
    while let Some((cell, start)) = stack.pop() {
        match classify_target(map, &cell, target) {
            Membership::Outside => continue,
            Membership::Inside => {
                let shifted = taylor(&phase, &cell.center);
                if variation(&shifted, &cell.levels, p, 2).at_least(1) {
                    let linear_ok = (0..nvars).all(|i| {
                        let mut e = vec![0u32; nvars];
                        e[i] = 1;
                        let c = shifted
                            .terms()
                            .find(|(m, _)| **m == e)
                            .map(|(_, c)| c.clone())
                            .unwrap_or_else(Rat::zero);
                        valuation(&c, p).at_least(1 - cell.levels[i])
                    });
                    if linear_ok {
                        let v = psi(&shifted.constant_term(), p)?;
                        acc += &v.scale(&cell.volume());
                    }
                    continue;
                }
            }
            Membership::Unknown => {}
        }
        if cell.max_level() >= start + REFINE_DEPTH {
            return Err(depth_error(&cell));
        }
        stack.extend(cell.children().into_iter().map(|c| (c, start)));
    }
    Ok(acc)
}

enum Membership {
    Inside,
    Outside,
    Unknown,
}

fn classify_target(map: &[Poly], cell: &Polydisc, target: &Ball) -> Membership {
    let p = target.p();
    let mut inside = true;
    for (f, c) in map.iter().zip(target.center()) {
        let shifted = taylor(f, &cell.center);
        let var = variation(&shifted, &cell.levels, p, 1);
        let gap = shifted.constant_term() - c;
        match valuation(&gap, p) {
            Valuation::Finite(v) if v < target.level() => {
                if val_gt(var, v) {
                    return Membership::Outside;
                }
                inside = false;
            }
            _ => {
                if !var.at_least(target.level()) {
                    inside = false;
                }
            }
        }
    }
    if inside {
        Membership::Inside
    } else {
        Membership::Unknown
    }
}

/// `∫_cell ψ(num/den)·w`, subdividing until the phase is constant mod `pZ_p`;
/// `weight(d)` must return `∫_d w` for each such sub-disc `d`.
pub fn phase_integral(
    num: &Poly,
    den: &Poly,
    cell: &Polydisc,
    weight: &dyn Fn(&Polydisc) -> Result<Rat>,
) -> Result<ExactComplex> {
    let p = cell.p;
    let map = RationalMap::new(cell.dim(), vec![(num.clone(), den.clone())]);
    let start = cell.max_level();
    let mut acc = ExactComplex::zero(p);
    let mut stack = vec![cell.clone()];
    while let Some(d) = stack.pop() {
        if let Some(local) = map.local(&d) {
            if let LocalComponent::Tame { value, variation } = &local[0] {
                if variation.at_least(1) {
                    let w = weight(&d)?;
                    if !w.is_zero() {
                        acc += &psi(value, p)?.scale(&w);
                    }
                    continue;
                }
            }
        }
        if d.max_level() >= start + REFINE_DEPTH {
            return Err(depth_error(&d));
        }
        stack.extend(d.children());
    }
    Ok(acc)
}
