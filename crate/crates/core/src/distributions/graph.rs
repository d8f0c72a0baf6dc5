use std::fmt;

use num_traits::Zero;

use super::map::{Polydisc, RationalMap};
use crate::cexp::RationalTerm;
use crate::padic::{fmt_rat, ClopenSet, Prime};
use crate::poly::Poly;
use crate::{Error, Rat, Result};

/// A smooth submanifold presented as the graph of a rational map over an
/// open box union of a coordinate subspace.
///
/// The coordinates listed in `base_coords` parametrize the manifold; the
/// remaining ambient coordinates, in increasing order, are given by `map`
/// as rational functions of the base coordinates (`x1` is the first base
/// coordinate). A zero-dimensional base presents a single point.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphManifold {
    base: ClopenSet,
    base_coords: Vec<usize>,
    map: Vec<RationalTerm>,
    excluded: Vec<Vec<Rat>>,
    ambient: usize,
}

impl GraphManifold {
    pub fn new(base: ClopenSet, base_coords: Vec<usize>, map: Vec<RationalTerm>) -> Result<Self> {
        let d = base.dim();
        if base_coords.len() != d {
            return Err(Error::DimensionMismatch(d, base_coords.len()));
        }
        let ambient = d + map.len();
        let mut seen = vec![false; ambient];
        for &i in &base_coords {
            if i >= ambient || seen[i] {
                return Err(Error::InvalidStratification(format!(
                    "base coordinate {i} repeated or outside 0..{ambient}"
                )));
            }
            seen[i] = true;
        }
        if let Some(t) = map.iter().find(|t| t.arity() > d) {
            return Err(Error::DimensionMismatch(d, t.arity()));
        }
        Ok(GraphManifold {
            base,
            base_coords,
            map,
            excluded: Vec::new(),
            ambient,
        })
    }

    /// Graph over the leading coordinates.
    pub fn over_leading(base: ClopenSet, map: Vec<RationalTerm>) -> Result<Self> {
        let coords = (0..base.dim()).collect();
        GraphManifold::new(base, coords, map)
    }

    /// The single point `a`.
    pub fn point(p: Prime, a: Vec<Rat>) -> Self {
        let base = ClopenSet::from_ball(crate::padic::Ball::origin(p, 0, 0));
        GraphManifold {
            base,
            base_coords: vec![],
            ambient: a.len(),
            map: a.into_iter().map(RationalTerm::Const).collect(),
            excluded: vec![],
        }
    }

    /// The same manifold with the base points `pts` removed.
    pub fn excluding(mut self, pts: Vec<Vec<Rat>>) -> Result<Self> {
        for pt in &pts {
            if pt.len() != self.dim() {
                return Err(Error::DimensionMismatch(self.dim(), pt.len()));
            }
        }
        self.excluded.extend(pts);
        Ok(self)
    }

    pub fn p(&self) -> Prime {
        self.base.p()
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn base(&self) -> &ClopenSet {
        &self.base
    }

    pub fn base_coords(&self) -> &[usize] {
        &self.base_coords
    }

    pub fn fiber_coords(&self) -> Vec<usize> {
        (0..self.ambient)
            .filter(|i| !self.base_coords.contains(i))
            .collect()
    }

    pub fn map(&self) -> &[RationalTerm] {
        &self.map
    }

    pub fn excluded(&self) -> &[Vec<Rat>] {
        &self.excluded
    }

    pub fn is_point(&self) -> bool {
        self.dim() == 0
    }

    /// The embedding `t ↦ x` of the base into the ambient space.
    pub fn embedding_terms(&self) -> Vec<RationalTerm> {
        let fiber = self.fiber_coords();
        let mut out = vec![RationalTerm::int(0); self.ambient];
        for (j, &i) in self.base_coords.iter().enumerate() {
            out[i] = RationalTerm::var(j);
        }
        for (t, &i) in self.map.iter().zip(&fiber) {
            out[i] = t.clone();
        }
        out
    }

    pub fn embedding(&self) -> Result<RationalMap> {
        RationalMap::from_terms(self.dim(), &self.embedding_terms())
    }

    pub fn base_cells(&self) -> Vec<Polydisc> {
        self.base.balls().iter().map(Polydisc::from_ball).collect()
    }

    pub fn project(&self, x: &[Rat]) -> Vec<Rat> {
        self.base_coords.iter().map(|&i| x[i].clone()).collect()
    }

    /// Ambient point over the base point `t`, if the map is defined there.
    pub fn lift(&self, t: &[Rat]) -> Option<Vec<Rat>> {
        let fiber = self.fiber_coords();
        let mut out = vec![Rat::zero(); self.ambient];
        for (j, &i) in self.base_coords.iter().enumerate() {
            out[i] = t[j].clone();
        }
        for (term, &i) in self.map.iter().zip(&fiber) {
            out[i] = term.eval(t).ok()?;
        }
        Some(out)
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        if x.len() != self.ambient {
            return false;
        }
        let t = self.project(x);
        if !self.base.contains_point(&t) || self.excluded.contains(&t) {
            return false;
        }
        self.lift(&t).is_some_and(|y| y == x)
    }

    /// Jacobian of the fiber map at `t`: row `r` holds the partials of the
    /// `r`-th fiber coordinate.
    pub fn jacobian(&self, t: &[Rat]) -> Result<Vec<Vec<Rat>>> {
        let d = self.dim();
        let mut rows = Vec::with_capacity(self.map.len());
        for term in &self.map {
            let (num, den) = term.to_fraction(d)?;
            let dv = den.eval(t);
            if dv.is_zero() {
                return Err(Error::NotInDomain(format!("pole of {term}")));
            }
            let nv = num.eval(t);
            let row = (0..d)
                .map(|i| {
                    let dn = num.derivative(i).eval(t);
                    let dd = den.derivative(i).eval(t);
                    (dn * &dv - &nv * dd) / (&dv * &dv)
                })
                .collect();
            rows.push(row);
        }
        Ok(rows)
    }

    /// Checks that the map is defined at every level-`k` coset
    /// representative of the base, apart from excluded points.
    pub fn check_defined(&self, k: i64) -> Result<()> {
        for b in self.base.cosets_at(k)? {
            let t = b.center();
            if self.excluded.iter().any(|e| e.as_slice() == t) {
                continue;
            }
            if self.lift(t).is_none() {
                return Err(Error::NotInDomain(format!(
                    "graph map undefined at ({})",
                    t.iter().map(fmt_rat).collect::<Vec<_>>().join(",")
                )));
            }
        }
        Ok(())
    }

    /// Polynomial fiber map, if every component is polynomial.
    pub fn polynomial_embedding(&self) -> Option<Vec<Poly>> {
        self.embedding().ok()?.as_polys()
    }
}

impl fmt::Display for GraphManifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .embedding_terms()
            .iter()
            .map(ToString::to_string)
            .collect();
        write!(f, "graph ({}) over {}", parts.join(", "), self.base)
    }
}
