use std::collections::BTreeMap;

use super::CexpExpr;
use crate::padic::Ball;
use crate::{Error, ExactComplex, Rat, Result};

/// Probe settings for [`constancy_level`].
#[derive(Debug, Clone, Copy)]
pub struct ConstancyOptions {
    /// Extra levels below the candidate level at which the expression is
    /// sampled.
    pub probe_depth: i64,
    /// Largest candidate level.
    pub max_level: i64,
    /// Evaluation budget per candidate level.
    pub max_points: u64,
}

impl Default for ConstancyOptions {
    fn default() -> Self {
        ConstancyOptions {
            probe_depth: 2,
            max_level: 8,
            max_points: 1 << 20,
        }
    }
}

/// Outcome of [`constancy_level`].
#[derive(Debug, Clone, PartialEq)]
pub enum Constancy {
    /// The least level `k` at which every level-`k` coset of the ball gives
    /// a single value on all probe points.
    Level(i64),
    /// No level up to the cap works; two probe points in one coset of the
    /// last tried level with different values.
    Fail {
        level: i64,
        witness: (Vec<Rat>, Vec<Rat>),
        values: (ExactComplex, ExactComplex),
    },
}

/// Finite-scale local constancy test of `e` on the ball `b`.
///
/// Candidate levels start at `min(0, level of b)`; a level-`k` cell is the
/// intersection of a level-`k` ball with `b`.
///
/// Probe points where `e` is undefined are skipped; the level search fails
/// only through a witness pair or an exhausted budget.
pub fn constancy_level(e: &CexpExpr, b: &Ball, opts: ConstancyOptions) -> Result<Constancy> {
    let mut last = None;
    let start = b.level().min(0);
    let stop = opts.max_level.max(start);
    for k in start..=stop {
        let probe = k.max(b.level()) + opts.probe_depth;
        let count = b
            .p()
            .pow_u64((probe - b.level()) as u32)
            .and_then(|c| c.checked_pow(b.dim() as u32));
        if count.map_or(true, |c| c > opts.max_points) {
            break;
        }
        let mut seen: BTreeMap<Ball, (Vec<Rat>, ExactComplex)> = BTreeMap::new();
        let mut any_defined = false;
        let mut clash = None;
        for rep in b.enumerate_cosets(probe)? {
            let x = rep.center().to_vec();
            let v = match e.eval(&x) {
                Ok(v) => v,
                Err(Error::NotInDomain(_)) => continue,
                Err(err) => return Err(err),
            };
            any_defined = true;
            let cell = Ball::new(b.p(), x.clone(), k);
            match seen.get(&cell) {
                Some((x0, v0)) if *v0 != v => {
                    clash = Some((x0.clone(), x, v0.clone(), v));
                    break;
                }
                Some(_) => {}
                None => {
                    seen.insert(cell, (x, v));
                }
            }
        }
        if !any_defined {
            return Err(Error::NotInDomain(format!(
                "{e} is undefined at every level-{probe} probe point of {b}"
            )));
        }
        match clash {
            None => return Ok(Constancy::Level(k)),
            Some((x0, x1, v0, v1)) => {
                last = Some(Constancy::Fail {
                    level: k,
                    witness: (x0, x1),
                    values: (v0, v1),
                })
            }
        }
    }
    last.ok_or_else(|| Error::TooLarge(format!("probe grid of {b} exceeds the evaluation budget")))
}
