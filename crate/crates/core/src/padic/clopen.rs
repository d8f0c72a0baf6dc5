use std::fmt;

use num_traits::Zero;

use super::{Ball, Prime};
use crate::{Error, Rat, Result};

/// Binary operations of the clopen-set algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetOp {
    Union,
    Intersect,
    Diff,
}

/// A finite union of pairwise-disjoint balls of a common dimension.
///
/// The canonical form has no nested balls, merges every complete family of
/// `p^n` siblings into their parent, and keeps balls sorted; equal sets have
/// equal canonical forms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClopenSet {
    p: Prime,
    dim: usize,
    balls: Vec<Ball>,
}

impl ClopenSet {
    pub fn empty(p: Prime, dim: usize) -> Self {
        ClopenSet {
            p,
            dim,
            balls: Vec::new(),
        }
    }

    pub fn from_ball(ball: Ball) -> Self {
        ClopenSet::from_balls(ball.p(), ball.dim(), vec![ball])
            .expect("a single ball has consistent dimension")
    }

    /// Builds the union of arbitrary (possibly overlapping) balls.
    pub fn from_balls(p: Prime, dim: usize, balls: Vec<Ball>) -> Result<Self> {
        for b in &balls {
            if b.p() != p {
                return Err(Error::PrimeMismatch(p.get(), b.p().get()));
            }
            if b.dim() != dim {
                return Err(Error::DimensionMismatch(dim, b.dim()));
            }
        }
        let mut s = ClopenSet { p, dim, balls };
        s.normalize();
        Ok(s)
    }

    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn balls(&self) -> &[Ball] {
        &self.balls
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    fn normalize(&mut self) {
        if self.dim == 0 {
            if !self.balls.is_empty() {
                self.balls = vec![Ball::origin(self.p, 0, 0)];
            }
            return;
        }
        let fanout = self
            .p
            .pow_u64(self.dim as u32)
            .expect("sibling count fits in u64") as usize;
        loop {
            // drop nested balls: process coarse levels first
            self.balls.sort();
            self.balls.dedup();
            let mut kept: Vec<Ball> = Vec::with_capacity(self.balls.len());
            for b in std::mem::take(&mut self.balls) {
                if !kept.iter().any(|k| k.contains_ball(&b)) {
                    kept.push(b);
                }
            }
            // merge complete sibling families
            let mut merged = false;
            let mut by_parent: std::collections::BTreeMap<Ball, Vec<usize>> = Default::default();
            for (i, b) in kept.iter().enumerate() {
                by_parent.entry(b.parent()).or_default().push(i);
            }
            let mut remove = vec![false; kept.len()];
            let mut parents = Vec::new();
            for (parent, idx) in by_parent {
                if idx.len() == fanout {
                    merged = true;
                    for i in idx {
                        remove[i] = true;
                    }
                    parents.push(parent);
                }
            }
            self.balls = kept
                .into_iter()
                .zip(remove)
                .filter_map(|(b, r)| (!r).then_some(b))
                .chain(parents)
                .collect();
            if !merged {
                self.balls.sort();
                return;
            }
        }
    }

    fn check_compatible(&self, other: &ClopenSet) -> Result<()> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch(self.p.get(), other.p.get()));
        }
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        Ok(())
    }

    pub fn apply(&self, other: &ClopenSet, op: SetOp) -> Result<ClopenSet> {
        match op {
            SetOp::Union => self.union(other),
            SetOp::Intersect => self.intersect(other),
            SetOp::Diff => self.difference(other),
        }
    }

    pub fn union(&self, other: &ClopenSet) -> Result<ClopenSet> {
        self.check_compatible(other)?;
        let balls = self.balls.iter().chain(&other.balls).cloned().collect();
        ClopenSet::from_balls(self.p, self.dim, balls)
    }

    pub fn intersect(&self, other: &ClopenSet) -> Result<ClopenSet> {
        self.check_compatible(other)?;
        let balls = self
            .balls
            .iter()
            .flat_map(|a| other.balls.iter().filter_map(move |b| a.intersect(b)))
            .collect();
        ClopenSet::from_balls(self.p, self.dim, balls)
    }

    pub fn difference(&self, other: &ClopenSet) -> Result<ClopenSet> {
        self.check_compatible(other)?;
        let mut pieces = self.balls.clone();
        for b in &other.balls {
            pieces = pieces
                .into_iter()
                .flat_map(|piece| subtract_ball(&piece, b))
                .collect();
        }
        ClopenSet::from_balls(self.p, self.dim, pieces)
    }

    pub fn intersect_ball(&self, ball: &Ball) -> ClopenSet {
        self.intersect(&ClopenSet::from_ball(ball.clone()))
            .expect("ball shares prime and dimension")
    }

    pub fn is_subset(&self, other: &ClopenSet) -> Result<bool> {
        Ok(self.difference(other)?.is_empty())
    }

    pub fn contains_point(&self, x: &[Rat]) -> bool {
        self.balls.iter().any(|b| b.contains_point(x))
    }

    /// The ball of `self` containing `x`, if any.
    pub fn ball_containing(&self, x: &[Rat]) -> Option<&Ball> {
        self.balls.iter().find(|b| b.contains_point(x))
    }

    pub fn volume(&self) -> Rat {
        self.balls
            .iter()
            .fold(Rat::zero(), |acc, b| acc + b.volume())
    }

    pub fn max_level(&self) -> Option<i64> {
        self.balls.iter().map(Ball::level).max()
    }

    pub fn min_level(&self) -> Option<i64> {
        self.balls.iter().map(Ball::level).min()
    }

    /// Splits every ball down to level `k` (balls finer than `k` are kept).
    pub fn cosets_at(&self, k: i64) -> Result<Vec<Ball>> {
        let mut out = Vec::new();
        for b in &self.balls {
            if b.level() >= k {
                out.push(b.clone());
            } else {
                out.extend(b.enumerate_cosets(k)?);
            }
        }
        Ok(out)
    }
}

/// `piece \ b` as a list of disjoint balls.
fn subtract_ball(piece: &Ball, b: &Ball) -> Vec<Ball> {
    if b.contains_ball(piece) {
        return Vec::new();
    }
    if !piece.contains_ball(b) {
        return vec![piece.clone()];
    }
    let mut out = Vec::new();
    let mut cur = piece.clone();
    while cur.level() < b.level() {
        let mut next = None;
        for child in cur.children() {
            if child.contains_ball(b) {
                next = Some(child);
            } else {
                out.push(child);
            }
        }
        cur = next.expect("one child contains b");
    }
    out
}

impl fmt::Display for ClopenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.balls.is_empty() {
            return write!(f, "empty({})", self.dim);
        }
        let parts: Vec<String> = self.balls.iter().map(Ball::to_string).collect();
        write!(f, "{}", parts.join(";"))
    }
}
