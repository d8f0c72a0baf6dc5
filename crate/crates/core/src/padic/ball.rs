use std::fmt;

use num_traits::Zero;

use super::{fmt_rat, reduce_mod, valuation, Prime, Valuation};
use crate::{Error, Rat, Result};

/// The ultrametric ball `{y : v(y_i - c_i) >= level for all i}` in `Q_p^n`.
///
/// The center is stored in canonical form (see [`reduce_mod`]), so two balls
/// are equal as sets iff they are equal as values.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ball {
    level: i64,
    center: Vec<Rat>,
    p: Prime,
}

impl Ball {
    pub fn new(p: Prime, center: Vec<Rat>, level: i64) -> Self {
        let center = center.iter().map(|c| reduce_mod(c, p, level)).collect();
        Ball { level, center, p }
    }

    /// `p^level Z_p^n`.
    pub fn origin(p: Prime, dim: usize, level: i64) -> Self {
        Ball::new(p, vec![Rat::zero(); dim], level)
    }

    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn level(&self) -> i64 {
        self.level
    }

    pub fn center(&self) -> &[Rat] {
        &self.center
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn contains_point(&self, x: &[Rat]) -> bool {
        debug_assert_eq!(x.len(), self.dim());
        self.center
            .iter()
            .zip(x)
            .all(|(c, y)| valuation(&(y - c), self.p).at_least(self.level))
    }

    /// `other ⊆ self`.
    pub fn contains_ball(&self, other: &Ball) -> bool {
        other.level >= self.level && self.contains_point(&other.center)
    }

    pub fn is_disjoint(&self, other: &Ball) -> bool {
        !self.contains_ball(other) && !other.contains_ball(self)
    }

    /// Balls are nested or disjoint, so the intersection is a ball or empty.
    pub fn intersect(&self, other: &Ball) -> Option<Ball> {
        if self.contains_ball(other) {
            Some(other.clone())
        } else if other.contains_ball(self) {
            Some(self.clone())
        } else {
            None
        }
    }

    pub fn parent(&self) -> Ball {
        Ball::new(self.p, self.center.clone(), self.level - 1)
    }

    /// The `p^n` sub-balls one level down.
    pub fn children(&self) -> Vec<Ball> {
        self.enumerate_cosets(self.level + 1)
            .expect("child level is above the ball level")
    }

    /// The `p^{n(k - level)}` disjoint level-`k` sub-balls, in lexicographic
    /// order of their digit offsets.
    pub fn enumerate_cosets(&self, k: i64) -> Result<Vec<Ball>> {
        if k < self.level {
            return Err(Error::InvalidLevel(format!(
                "cannot enumerate level-{k} cosets of a level-{} ball",
                self.level
            )));
        }
        let p = self.p;
        let span = (k - self.level) as u32;
        let per_axis = p
            .pow_u64(span)
            .filter(|&c| c.checked_pow(self.dim() as u32).is_some_and(|t| t <= 1 << 26))
            .ok_or_else(|| Error::TooLarge(format!("{p}^{span} cosets per axis")))?;
        let step = p.rpow(self.level);
        let mut out = Vec::new();
        let mut digits = vec![0u64; self.dim()];
        loop {
            let center: Vec<Rat> = self
                .center
                .iter()
                .zip(&digits)
                .map(|(c, &d)| c + &step * Rat::from_integer(d.into()))
                .collect();
            out.push(Ball::new(p, center, k));
            // odometer increment
            let mut i = 0;
            loop {
                if i == digits.len() {
                    return Ok(out);
                }
                digits[i] += 1;
                if digits[i] < per_axis {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
        }
    }

    /// Haar volume `p^{-n·level}` (with `vol(Z_p^n) = 1`).
    pub fn volume(&self) -> Rat {
        self.p.rpow(-(self.dim() as i64) * self.level)
    }

    /// Smallest valuation attained by coordinate `i` on the ball, or `None`
    /// when the coordinate ranges over a ball around zero (valuations are
    /// then unbounded above and bounded below by the level).
    pub fn coordinate_valuation(&self, i: usize) -> Option<i64> {
        match valuation(&self.center[i], self.p) {
            Valuation::Finite(v) if v < self.level => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let coords: Vec<String> = self.center.iter().map(fmt_rat).collect();
        write!(f, "box({}; {})", coords.join(","), self.level)
    }
}
