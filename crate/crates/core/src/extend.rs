//! Extension of distributions across closed sets: tubular sections of graph
//! manifolds, the splitting `φ ↦ φ̃` of test functions, the regularization
//! it induces, and the minimal-coordinate lift used to extend densities
//! across coordinate hyperplanes.

use std::sync::Arc;

use num_traits::Zero;

use crate::distributions::map::{pullback_cells, LocalComponent};
use crate::distributions::{cells_to_function, Distribution, Domain, GraphManifold, Polydisc, RationalMap};
use crate::padic::{valuation, Ball, ClopenSet, Prime, Valuation};
use crate::schwartz::SchwartzBruhat;
use crate::{Error, Rat, Result};

/// How far past the natural levels the constructions refine before giving up.
const LEVEL_CAP: i64 = 40;

/// The section `ν: S(Z) → S(X)` of restriction to a graph manifold `Z`:
/// `ν(f)(x) = f(π(x)) · 1_{B(π(x))}(x)`, where `B(z)` is the largest ball of
/// level `≥ 0` around the point of `Z` over `z` inside `X` and missing the
/// avoided points.
#[derive(Debug, Clone)]
pub struct GraphSection {
    stratum: GraphManifold,
    x: ClopenSet,
    avoid: Vec<Vec<Rat>>,
    embedding: RationalMap,
}

pub fn graph_section_nu(z: &GraphManifold, x: &ClopenSet) -> Result<GraphSection> {
    GraphSection::new(z.clone(), x.clone(), Vec::new())
}

impl GraphSection {
    pub fn new(stratum: GraphManifold, x: ClopenSet, avoid: Vec<Vec<Rat>>) -> Result<Self> {
        if stratum.p() != x.p() {
            return Err(Error::PrimeMismatch(x.p().get(), stratum.p().get()));
        }
        if stratum.ambient_dim() != x.dim() {
            return Err(Error::DimensionMismatch(x.dim(), stratum.ambient_dim()));
        }
        if let Some(a) = avoid.iter().find(|a| a.len() != x.dim()) {
            return Err(Error::DimensionMismatch(x.dim(), a.len()));
        }
        let embedding = stratum.embedding()?;
        let sec = GraphSection {
            stratum,
            x,
            avoid,
            embedding,
        };
        sec.check_inside()?;
        Ok(sec)
    }

    pub fn stratum(&self) -> &GraphManifold {
        &self.stratum
    }

    pub fn ambient(&self) -> &ClopenSet {
        &self.x
    }

    fn p(&self) -> Prime {
        self.x.p()
    }

    /// Certifies that the graph lies inside `X` by covering the base with
    /// discs whose image balls are contained in `X`.
    fn check_inside(&self) -> Result<()> {
        if self.stratum.is_point() {
            let a = self.stratum.lift(&[]).expect("points are defined");
            if !self.x.contains_point(&a) {
                return Err(Error::ContainmentViolated(format!("{} not inside {}", self.stratum, self.x)));
            }
            return Ok(());
        }
        let start = self
            .x
            .max_level()
            .unwrap_or(0)
            .max(self.stratum.base().max_level().unwrap_or(0))
            .max(0);
        let mut stack: Vec<Polydisc> = self
            .stratum
            .base()
            .cosets_at(start)?
            .iter()
            .map(Polydisc::from_ball)
            .collect();
        while let Some(cell) = stack.pop() {
            let level = cell.max_level();
            if level > start + LEVEL_CAP {
                return Err(Error::Certification(format!(
                    "cannot certify {} inside {}",
                    self.stratum, self.x
                )));
            }
            let local = self.embedding.local(&cell).ok_or_else(|| {
                Error::NotInDomain(format!("graph map undefined near {:?}", cell.center))
            })?;
            let mut image = Vec::with_capacity(local.len());
            let mut tame = true;
            for c in local {
                match c {
                    LocalComponent::Tame { value, variation } => {
                        tame &= variation >= Valuation::Finite(level);
                        image.push(value);
                    }
                    LocalComponent::Escape { .. } => {
                        return Err(Error::ContainmentViolated(format!(
                            "{} is unbounded near {:?}",
                            self.stratum, cell.center
                        )))
                    }
                }
            }
            if tame {
                let ball = Ball::new(self.p(), image, level);
                if ClopenSet::from_ball(ball.clone()).is_subset(&self.x)? {
                    continue;
                }
                if self.x.intersect_ball(&ball).is_empty() {
                    return Err(Error::ContainmentViolated(format!(
                        "{} leaves {} near {ball}",
                        self.stratum, self.x
                    )));
                }
            }
            stack.extend(cell.children());
        }
        Ok(())
    }

    /// Level of the ball `B` around the ambient point `y`.
    pub fn ball_level(&self, y: &[Rat]) -> Result<i64> {
        let cap = self.x.max_level().unwrap_or(0).max(0) + LEVEL_CAP;
        for l in 0..=cap {
            let ball = Ball::new(self.p(), y.to_vec(), l);
            if self.avoid.iter().any(|a| ball.contains_point(a)) {
                continue;
            }
            if ClopenSet::from_ball(ball).is_subset(&self.x)? {
                return Ok(l);
            }
        }
        Err(Error::ContainmentViolated(format!(
            "no ball of level <= {cap} around {y:?} inside {} avoiding {:?}",
            self.x, self.avoid
        )))
    }

    /// `ν(f)` for `f` a function on the base of the stratum.
    pub fn apply(&self, f: &SchwartzBruhat) -> Result<SchwartzBruhat> {
        let (p, n, d) = (self.p(), self.x.dim(), self.stratum.dim());
        if f.p() != p {
            return Err(Error::PrimeMismatch(p.get(), f.p().get()));
        }
        if f.dim() != d {
            return Err(Error::DimensionMismatch(d, f.dim()));
        }
        if f.is_zero() {
            return Ok(SchwartzBruhat::zero(p, n));
        }
        if d == 0 {
            let a = self.stratum.lift(&[]).expect("points are defined");
            let l = self.ball_level(&a)?;
            let v = f.value_at(&[]);
            return Ok(SchwartzBruhat::indicator_ball(&Ball::new(p, a, l))?.scale(&v));
        }
        let support = ClopenSet::from_balls(p, d, f.entries().map(|(b, _)| b).collect())?;
        let support = support.intersect(self.stratum.base())?;
        let start = f
            .constancy_level()
            .max(self.x.max_level().unwrap_or(0))
            .max(support.max_level().unwrap_or(0))
            .max(0);
        let mut k = start;
        'refine: loop {
            if k > start + LEVEL_CAP {
                return Err(Error::Certification(format!(
                    "graph section of {} does not settle by level {k}",
                    self.stratum
                )));
            }
            let mut cells = Vec::new();
            for b in support.cosets_at(k)? {
                let z = b.center();
                let v = f.value_at(z);
                if v.is_zero() {
                    continue;
                }
                let cell = Polydisc::from_ball(&b);
                let settled = self.embedding.local(&cell).is_some_and(|loc| {
                    loc.iter().all(|c| {
                        matches!(c, LocalComponent::Tame { variation, .. }
                            if *variation >= Valuation::Finite(k))
                    })
                });
                if !settled {
                    k += 1;
                    continue 'refine;
                }
                let y = self
                    .stratum
                    .lift(z)
                    .ok_or_else(|| Error::NotInDomain(format!("graph map undefined at {z:?}")))?;
                let l = self.ball_level(&y)?;
                if l > k {
                    k = l;
                    continue 'refine;
                }
                let mut levels = vec![l; n];
                for &i in self.stratum.base_coords() {
                    levels[i] = k;
                }
                cells.push((Polydisc::new(p, y, levels), v));
            }
            return cells_to_function(p, n, cells);
        }
    }
}

/// `φ|_Z` as a function on the base of `Z`.
pub fn restrict_to_stratum(phi: &SchwartzBruhat, z: &GraphManifold) -> Result<SchwartzBruhat> {
    let p = z.p();
    if z.is_point() {
        let a = z.lift(&[]).expect("points are defined");
        let v = phi.value_at(&a);
        return SchwartzBruhat::from_fn(p, 0, 0, 0, |_| Ok(v.clone()));
    }
    let cells = pullback_cells(phi, &z.embedding()?, &z.base_cells())?;
    cells_to_function(p, z.dim(), cells)
}

/// The splitting `φ ↦ φ̃` of `S(X)` onto test functions vanishing near a
/// closed set `Z = Z_0 ∪ {a_1, …, a_r}`, where `Z_0` is a graph manifold and
/// the `a_i` are points; the open set is `U = X \ Z`.
#[derive(Debug, Clone)]
pub struct TestSplit {
    x: ClopenSet,
    strata: Vec<GraphManifold>,
    points: Vec<(Vec<Rat>, GraphSection)>,
    main: Option<GraphSection>,
}

/// Builds the splitting for `U = X \ (strata[0] ∪ strata[1] ∪ …)`, where
/// every stratum after the first is a point.
pub fn test_split(x: &ClopenSet, strata: &[GraphManifold]) -> Result<TestSplit> {
    if let Some(s) = strata.iter().skip(1).find(|s| !s.is_point()) {
        return Err(Error::InvalidStratification(format!(
            "only points may follow the first stratum, found {s}"
        )));
    }
    let pts: Vec<Vec<Rat>> = strata
        .iter()
        .filter(|s| s.is_point())
        .map(|s| s.lift(&[]).expect("points are defined"))
        .collect();
    let mut points = Vec::new();
    for (i, a) in pts.iter().enumerate() {
        let others: Vec<Vec<Rat>> = pts
            .iter()
            .enumerate()
            .filter(|&(j, b)| j != i && b != a)
            .map(|(_, b)| b.clone())
            .collect();
        let z = GraphManifold::point(x.p(), a.clone());
        let sec = GraphSection::new(z, x.clone(), others).map_err(as_stratification)?;
        points.push((a.clone(), sec));
    }
    let main = match strata.first() {
        Some(s) if !s.is_point() => {
            Some(GraphSection::new(s.clone(), x.clone(), pts.clone()).map_err(as_stratification)?)
        }
        _ => None,
    };
    Ok(TestSplit {
        x: x.clone(),
        strata: strata.to_vec(),
        points,
        main,
    })
}

fn as_stratification(e: Error) -> Error {
    match e {
        Error::ContainmentViolated(msg) => Error::InvalidStratification(msg),
        e => e,
    }
}

impl TestSplit {
    pub fn ambient(&self) -> &ClopenSet {
        &self.x
    }

    pub fn strata(&self) -> &[GraphManifold] {
        &self.strata
    }

    /// Whether `x` lies in `U`.
    pub fn in_open(&self, x: &[Rat]) -> bool {
        self.x.contains_point(x) && !self.strata.iter().any(|s| s.contains(x))
    }

    pub fn apply(&self, phi: &SchwartzBruhat) -> Result<SchwartzBruhat> {
        if phi.dim() != self.x.dim() {
            return Err(Error::DimensionMismatch(self.x.dim(), phi.dim()));
        }
        let mut cur = phi.restrict(&self.x)?;
        for (a, sec) in &self.points {
            let v = cur.value_at(a);
            if !v.is_zero() {
                let f = SchwartzBruhat::from_fn(self.x.p(), 0, 0, 0, |_| Ok(v.clone()))?;
                cur = cur.sub(&sec.apply(&f)?)?;
            }
        }
        if let Some(sec) = &self.main {
            let f = restrict_to_stratum(&cur, sec.stratum())?;
            cur = cur.sub(&sec.apply(&f)?)?;
        }
        Ok(cur.canonical())
    }
}

/// The extension `κ(ξ)(φ) = ξ(φ̃)` of a distribution on `U` to `X`.
pub fn regularize(xi: &Distribution, split: &TestSplit) -> Result<Distribution> {
    let x = split.ambient();
    if xi.p() != x.p() {
        return Err(Error::PrimeMismatch(x.p().get(), xi.p().get()));
    }
    if xi.dim() != x.dim() {
        return Err(Error::DimensionMismatch(x.dim(), xi.dim()));
    }
    let label = format!("regularize({})", xi.label());
    let (xi, split) = (xi.clone(), split.clone());
    Ok(Distribution::custom(
        x.p(),
        x.dim(),
        Domain::Clopen(x.clone()),
        label,
        Arc::new(move |phi| xi.eval(&split.apply(phi)?)),
    ))
}

/// Index of the coordinate zeroed by the minimal-coordinate map: the first
/// coordinate of largest valuation (zero counts as largest).
pub fn min_coord_index(x: &[Rat], p: Prime) -> usize {
    let mut best = 0;
    let mut best_v = valuation(&x[0], p);
    for (i, c) in x.iter().enumerate().skip(1) {
        let v = valuation(c, p);
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    best
}

/// The map `x ↦ x` with its minimal-coordinate entry set to zero; it lands
/// on the union of the coordinate hyperplanes.
pub fn min_coord_map(x: &[Rat], p: Prime) -> Vec<Rat> {
    let mut out = x.to_vec();
    if !out.is_empty() {
        out[min_coord_index(x, p)] = Rat::zero();
    }
    out
}

/// `L(φ0)(x) = φ0(min_coord_map(x))` on `Z_p^m`, for `φ0` constant at its
/// constancy level on the coordinate hyperplanes.
pub fn min_coord_lift(phi0: &SchwartzBruhat, m: usize) -> Result<SchwartzBruhat> {
    if phi0.dim() != m {
        return Err(Error::DimensionMismatch(m, phi0.dim()));
    }
    let p = phi0.p();
    if m == 0 {
        return Ok(phi0.clone());
    }
    let k = phi0.constancy_level().max(0);
    SchwartzBruhat::from_fn(p, m, 0, k, |x| {
        // A coordinate below the constancy level stands for any point of
        // its coset, so zeroing it does not change the value of phi0.
        let small = x.iter().position(|c| valuation(c, p) >= Valuation::Finite(k));
        let mut y = x.to_vec();
        match small {
            Some(i) => y[i] = Rat::zero(),
            None => y = min_coord_map(x, p),
        }
        Ok(phi0.value_at(&y))
    })
}

/// Extends a distribution `μ` on `(Z_p \ {0})^m` to `Z_p^m` by
/// `ξ(φ) = μ(φ - L(φ))`; `φ - L(φ)` vanishes near the coordinate hyperplanes.
pub fn extend_min_coord(mu: &Distribution) -> Result<Distribution> {
    let (p, m) = (mu.p(), mu.dim());
    let cube = ClopenSet::from_ball(Ball::origin(p, m, 0));
    let label = format!("extend({})", mu.label());
    let mu = mu.clone();
    Ok(Distribution::custom(
        p,
        m,
        Domain::Clopen(cube.clone()),
        label,
        Arc::new(move |phi| {
            let phi = phi.restrict(&cube)?;
            let away = phi.sub(&min_coord_lift(&phi, m)?)?;
            mu.eval(&away)
        }),
    ))
}
