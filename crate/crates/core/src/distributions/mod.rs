//! Distributions on `Q_p^n`: point masses, Haar measure on box unions,
//! measures on graph manifolds, expression densities, and the operations
//! that combine them.

mod density;
mod graph;
pub mod map;
pub mod shell;

use std::fmt;
use std::sync::Arc;

use crate::cexp::CexpExpr;
use crate::padic::{valuation, Ball, ClopenSet, Prime, Valuation};
use crate::schwartz::{psi, SchwartzBruhat};
use crate::{Error, ExactComplex, Rat, Result};

pub use density::{check_integrable, integrate_expr, recognize, Density, MonomialTerm, Phase};
pub use graph::GraphManifold;
pub use map::{Polydisc, RationalMap};

/// Evaluation callback for distributions built from other distributions.
pub type EvalFn = Arc<dyn Fn(&SchwartzBruhat) -> Result<ExactComplex> + Send + Sync>;

/// Where a distribution lives.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Everywhere,
    Clopen(ClopenSet),
    Manifold(GraphManifold),
    Strata(Vec<GraphManifold>),
}

/// A closed-form wave front set component.
#[derive(Debug, Clone, PartialEq)]
pub enum KnownWf {
    /// Every direction over the point.
    Point(Vec<Rat>),
    /// The conormal bundle of a graph manifold.
    Conormal(GraphManifold),
}

/// A smooth chart `Z_p^d ⊃ U → Q_p^d` with certification metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartMap {
    pub map: RationalMap,
    pub domain: ClopenSet,
    /// Number of preimages of a generic point.
    pub fiber_size: u64,
    /// The map is exact modulo `p^precision`, if set.
    pub precision: Option<i64>,
    pub certified: bool,
    pub label: String,
}

#[derive(Clone)]
enum Kind {
    Dirac(Vec<Rat>),
    Haar(ClopenSet),
    Graph(GraphManifold),
    Density(Density),
    Loci { g: CexpExpr, strata: Vec<GraphManifold> },
    Pushforward { inner: Box<Distribution>, chart: ChartMap },
    Combination(Vec<(ExactComplex, Distribution)>),
    Custom(EvalFn),
}

/// A continuous linear functional on Schwartz-Bruhat functions, evaluated
/// exactly.
#[derive(Clone)]
pub struct Distribution {
    p: Prime,
    n: usize,
    kind: Kind,
    domain: Domain,
    wf: Option<Vec<KnownWf>>,
    label: String,
}

impl fmt::Debug for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Distribution")
            .field("p", &self.p)
            .field("n", &self.n)
            .field("label", &self.label)
            .finish()
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label)
    }
}

fn fmt_point(a: &[Rat]) -> String {
    a.iter().map(crate::padic::fmt_rat).collect::<Vec<_>>().join(",")
}

impl Distribution {
    pub fn dirac(p: Prime, a: Vec<Rat>) -> Self {
        Distribution {
            p,
            n: a.len(),
            label: format!("dirac({})", fmt_point(&a)),
            domain: Domain::Everywhere,
            wf: Some(vec![KnownWf::Point(a.clone())]),
            kind: Kind::Dirac(a),
        }
    }

    /// Haar measure restricted to `set`.
    pub fn haar_on(set: ClopenSet) -> Self {
        Distribution {
            p: set.p(),
            n: set.dim(),
            label: format!("haar({set})"),
            domain: Domain::Clopen(set.clone()),
            wf: Some(vec![]),
            kind: Kind::Haar(set),
        }
    }

    /// `φ ↦ ∫_V φ(t, g(t)) dt` for the graph `W` of `g` over `V`.
    pub fn graph_measure(w: GraphManifold) -> Result<Self> {
        w.check_defined(w.base().max_level().unwrap_or(0).max(0))?;
        Ok(Distribution {
            p: w.p(),
            n: w.ambient_dim(),
            label: format!("graph_measure({w})"),
            domain: Domain::Manifold(w.clone()),
            wf: Some(vec![KnownWf::Conormal(w.clone())]),
            kind: Kind::Graph(w),
        })
    }

    /// `φ ↦ ∫_X e(x) φ(x) dx`.
    pub fn density(e: CexpExpr, set: ClopenSet) -> Result<Self> {
        let dens = Density::new(e, set.clone())?;
        Ok(Distribution {
            p: set.p(),
            n: set.dim(),
            label: format!("density({}; {set})", dens.expr),
            domain: Domain::Clopen(set),
            wf: None,
            kind: Kind::Density(dens),
        })
    }

    /// `φ ↦ ∫_X e(x) φ(x) dx` for `e` defined off the coordinate
    /// hyperplanes; test functions must vanish near the hyperplanes where
    /// `e` is not integrable.
    pub fn density_singular(e: CexpExpr, set: ClopenSet) -> Result<Self> {
        let dens = Density::with_singular_support(e, set.clone())?;
        Ok(Distribution {
            p: set.p(),
            n: set.dim(),
            label: format!("density({}; {set} minus hyperplanes)", dens.expr),
            domain: Domain::Clopen(set),
            wf: None,
            kind: Kind::Density(dens),
        })
    }

    /// `φ ↦ Σ_strata ∫ g·φ` against the graph measures of the strata.
    pub fn loci(g: CexpExpr, strata: Vec<GraphManifold>) -> Result<Self> {
        let first = strata
            .first()
            .ok_or_else(|| Error::InvalidStratification("no strata".into()))?;
        let (p, n) = (first.p(), first.ambient_dim());
        for s in &strata {
            if s.ambient_dim() != n {
                return Err(Error::DimensionMismatch(n, s.ambient_dim()));
            }
            if s.p() != p {
                return Err(Error::PrimeMismatch(p.get(), s.p().get()));
            }
            // shape check on each stratum
            let pulled = g.subst(&s.embedding_terms());
            recognize(&pulled, s.dim())?;
        }
        if g.arity() > n {
            return Err(Error::DimensionMismatch(n, g.arity()));
        }
        Ok(Distribution {
            p,
            n,
            label: format!("loci({g})"),
            domain: Domain::Strata(strata.clone()),
            wf: None,
            kind: Kind::Loci { g, strata },
        })
    }

    /// `φ ↦ ξ(φ∘chart)`.
    pub fn pushforward_chart(xi: &Distribution, chart: ChartMap) -> Result<Self> {
        if !chart.certified {
            return Err(Error::Certification(format!(
                "chart {} carries no certificate",
                chart.label
            )));
        }
        if chart.map.nvars() != xi.n {
            return Err(Error::DimensionMismatch(xi.n, chart.map.nvars()));
        }
        Ok(Distribution {
            p: xi.p,
            n: chart.map.len(),
            label: format!("push({}, {})", xi.label, chart.label),
            domain: Domain::Everywhere,
            wf: None,
            kind: Kind::Pushforward {
                inner: Box::new(xi.clone()),
                chart,
            },
        })
    }

    /// `Σ c_i ξ_i`.
    pub fn combination(parts: Vec<(ExactComplex, Distribution)>) -> Result<Self> {
        let (_, first) = parts
            .first()
            .ok_or_else(|| Error::InvalidLevel("empty linear combination".into()))?;
        let (p, n) = (first.p, first.n);
        for (_, d) in &parts {
            if d.n != n {
                return Err(Error::DimensionMismatch(n, d.n));
            }
            if d.p != p {
                return Err(Error::PrimeMismatch(p.get(), d.p.get()));
            }
        }
        let label = parts
            .iter()
            .map(|(c, d)| format!("({c})*{}", d.label))
            .collect::<Vec<_>>()
            .join(" + ");
        Ok(Distribution {
            p,
            n,
            label,
            domain: Domain::Everywhere,
            wf: None,
            kind: Kind::Combination(parts),
        })
    }

    /// A distribution given by an evaluation callback.
    pub fn custom(p: Prime, n: usize, domain: Domain, label: impl Into<String>, f: EvalFn) -> Self {
        Distribution {
            p,
            n,
            label: label.into(),
            domain,
            wf: None,
            kind: Kind::Custom(f),
        }
    }

    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// The closed-form wave front set, when known.
    pub fn known_wf(&self) -> Option<&[KnownWf]> {
        self.wf.as_deref()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// The density expression, for density distributions.
    pub fn density_expr(&self) -> Option<&CexpExpr> {
        match &self.kind {
            Kind::Density(d) => Some(&d.expr),
            _ => None,
        }
    }

    fn check(&self, phi: &SchwartzBruhat) -> Result<()> {
        if phi.p() != self.p {
            return Err(Error::PrimeMismatch(self.p.get(), phi.p().get()));
        }
        if phi.dim() != self.n {
            return Err(Error::DimensionMismatch(self.n, phi.dim()));
        }
        Ok(())
    }

    pub fn eval(&self, phi: &SchwartzBruhat) -> Result<ExactComplex> {
        self.check(phi)?;
        let p = self.p;
        match &self.kind {
            Kind::Dirac(a) => Ok(phi.value_at(a)),
            Kind::Haar(set) => Ok(phi.restrict(set)?.integrate()),
            Kind::Graph(w) => map::pullback_integral(phi, &w.embedding()?, &w.base_cells()),
            Kind::Density(d) => d.eval(phi),
            Kind::Loci { g, strata } => {
                let mut acc = ExactComplex::zero(p);
                for s in strata {
                    let pulled = g.subst(&s.embedding_terms());
                    let terms = recognize(&pulled, s.dim())?;
                    for (cell, v) in map::pullback_cells(phi, &s.embedding()?, &s.base_cells())? {
                        for t in &terms {
                            acc += &(&t.integrate(&cell)? * &v);
                        }
                    }
                }
                Ok(acc)
            }
            Kind::Pushforward { inner, chart } => {
                if let Some(prec) = chart.precision {
                    if phi.constancy_level() > prec {
                        return Err(Error::Certification(format!(
                            "test function needs precision {} but chart {} is exact to {prec}",
                            phi.constancy_level(),
                            chart.label
                        )));
                    }
                }
                let cells: Vec<Polydisc> = chart.domain.balls().iter().map(Polydisc::from_ball).collect();
                let pulled = map::pullback_cells(phi, &chart.map, &cells)?;
                inner.eval(&cells_to_function(p, inner.n, pulled)?)
            }
            Kind::Combination(parts) => {
                let mut acc = ExactComplex::zero(p);
                for (c, d) in parts {
                    acc += &(c * &d.eval(phi)?);
                }
                Ok(acc)
            }
            Kind::Custom(f) => f(phi),
        }
    }

    /// Certified emptiness of the support inside `cell`; `false` means
    /// "not known to be null".
    pub fn is_null_on(&self, cell: &Ball) -> Result<bool> {
        match &self.kind {
            Kind::Dirac(a) => Ok(!cell.contains_point(a)),
            Kind::Haar(set) => Ok(set.intersect_ball(cell).is_empty()),
            // a positive measure vanishes on the cell iff its mass does
            Kind::Graph(_) => Ok(self.eval(&SchwartzBruhat::indicator_ball(cell)?)?.is_zero()),
            _ => Ok(false),
        }
    }

    /// `ξ(1_cell · ψ(⟨w, ·⟩))`.
    pub fn eval_character(&self, cell: &Ball, w: &[Rat]) -> Result<ExactComplex> {
        if cell.dim() != self.n || w.len() != self.n {
            return Err(Error::DimensionMismatch(self.n, cell.dim().max(w.len())));
        }
        let p = self.p;
        let dot = |x: &[Rat]| -> Rat { x.iter().zip(w).map(|(a, b)| a * b).sum() };
        match &self.kind {
            Kind::Dirac(a) => {
                if cell.contains_point(a) {
                    psi(&dot(a), p)
                } else {
                    Ok(ExactComplex::zero(p))
                }
            }
            Kind::Haar(set) => {
                let mut acc = ExactComplex::zero(p);
                for b in set.intersect_ball(cell).balls() {
                    let orth = w.iter().all(|wi| valuation(wi, p).at_least(1 - b.level()));
                    if orth {
                        acc += &psi(&dot(b.center()), p)?.scale(&b.volume());
                    }
                }
                Ok(acc)
            }
            Kind::Graph(gm) => match gm.polynomial_embedding() {
                Some(polys) => map::character_integral(&polys, &gm.base_cells(), cell, w),
                None => self.eval(&character_test_function(cell, w)?),
            },
            _ => self.eval(&character_test_function(cell, w)?),
        }
    }

    /// `ξ(1_{B(x, |r|) ∩ X})`, the mass of the ball of radius `|r|` around
    /// `x` (intersected with the domain when it is a box union).
    pub fn b_function(&self, x: &[Rat], r: &Rat) -> Result<ExactComplex> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch(self.n, x.len()));
        }
        let Valuation::Finite(level) = valuation(r, self.p) else {
            return Err(Error::InvalidLevel("radius must be nonzero".into()));
        };
        let ball = Ball::new(self.p, x.to_vec(), level);
        let set = match &self.domain {
            Domain::Clopen(x_set) => x_set.intersect_ball(&ball),
            _ => ClopenSet::from_ball(ball),
        };
        self.eval(&SchwartzBruhat::indicator(&set)?)
    }
}

/// `1_cell · ψ(⟨w, ·⟩)` as a tabulated function.
pub fn character_test_function(cell: &Ball, w: &[Rat]) -> Result<SchwartzBruhat> {
    let p = cell.p();
    let mut m = -cell.level();
    for c in cell.center() {
        if let Valuation::Finite(v) = valuation(c, p) {
            m = m.max(-v);
        }
    }
    let mut k = cell.level();
    for wi in w {
        if let Valuation::Finite(v) = valuation(wi, p) {
            k = k.max(1 - v);
        }
    }
    SchwartzBruhat::from_fn(p, cell.dim(), m, k, |x| {
        if cell.contains_point(x) {
            psi(&x.iter().zip(w).map(|(a, b)| a * b).sum(), p)
        } else {
            Ok(ExactComplex::zero(p))
        }
    })
}

/// Tabulates a function given as constant values on disjoint polydiscs.
pub fn cells_to_function(
    p: Prime,
    n: usize,
    cells: Vec<(Polydisc, ExactComplex)>,
) -> Result<SchwartzBruhat> {
    if cells.is_empty() {
        return Ok(SchwartzBruhat::zero(p, n));
    }
    let k = cells
        .iter()
        .map(|(c, _)| c.max_level())
        .max()
        .unwrap_or(0)
        .max(0);
    let mut m = 0i64;
    for (c, _) in &cells {
        for (x, &l) in c.center.iter().zip(&c.levels) {
            m = m.max(-l);
            if let Valuation::Finite(v) = valuation(x, p) {
                m = m.max(-v);
            }
        }
    }
    let mut values = Vec::new();
    for (c, v) in cells {
        let mut pieces = vec![c];
        while pieces.iter().any(|d| d.levels.iter().any(|&l| l < k)) {
            pieces = pieces
                .into_iter()
                .flat_map(|d| {
                    if d.levels.iter().all(|&l| l >= k) {
                        vec![d]
                    } else {
                        split_coarse(&d, k)
                    }
                })
                .collect();
        }
        for d in pieces {
            values.push((d.center, v.clone()));
        }
    }
    let lookup: std::collections::HashMap<Vec<Rat>, ExactComplex> = values.into_iter().collect();
    SchwartzBruhat::from_fn(p, n, m, k, |x| {
        let key: Vec<Rat> = x.iter().map(|c| crate::padic::reduce_mod(c, p, k)).collect();
        Ok(lookup.get(&key).cloned().unwrap_or_else(|| ExactComplex::zero(p)))
    })
}

/// Splits the coordinates of `d` that are coarser than `k` by one level.
fn split_coarse(d: &Polydisc, k: i64) -> Vec<Polydisc> {
    let mut out = vec![d.clone()];
    for i in 0..d.dim() {
        if d.levels[i] >= k {
            continue;
        }
        out = out
            .into_iter()
            .flat_map(|e| {
                let step = d.p.rpow(e.levels[i]);
                (0..d.p.get()).map(move |j| {
                    let mut c = e.center.clone();
                    c[i] = &c[i] + &step * Rat::from_integer(j.into());
                    let mut l = e.levels.clone();
                    l[i] += 1;
                    Polydisc::new(e.p, c, l)
                })
            })
            .collect();
    }
    out
}
