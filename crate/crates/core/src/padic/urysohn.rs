use super::{Ball, ClopenSet};
use crate::{Error, Rat, Result};

/// The closed set handed to [`urysohn_clopen`]: a clopen box union or a
/// finite set of rational points.
#[derive(Debug, Clone)]
pub enum UrysohnSource {
    Set(ClopenSet),
    Points(Vec<Vec<Rat>>),
}

/// A clopen `C` with `Z ⊆ C ⊆ U`, built as the union over `z ∈ Z` of the
/// largest ball `B` around `z` of level `>= 0` with `B ∩ X ⊆ U`.
///
/// `X` is a finite box union, so every `B ∩ X` is compact. Ball levels are
/// searched from `0` upward; the search ends at the level of the ball of `Z`
/// (or of `U`, for points) containing `z`, which is always admissible.
pub fn urysohn_clopen(z: &UrysohnSource, u: &ClopenSet, x: &ClopenSet) -> Result<ClopenSet> {
    if !u.is_subset(x)? {
        return Err(Error::ContainmentViolated("U is not contained in X".into()));
    }
    let (p, dim) = (u.p(), u.dim());
    let mut seeds: Vec<(Vec<Rat>, i64)> = Vec::new();
    match z {
        UrysohnSource::Set(zs) => {
            if !zs.is_subset(u)? {
                return Err(Error::ContainmentViolated("Z is not contained in U".into()));
            }
            for b in zs.cosets_at(0)? {
                seeds.push((b.center().to_vec(), b.level()));
            }
        }
        UrysohnSource::Points(points) => {
            for pt in points {
                if pt.len() != dim {
                    return Err(Error::DimensionMismatch(dim, pt.len()));
                }
                let host = u.ball_containing(pt).ok_or_else(|| {
                    Error::ContainmentViolated(format!("point {pt:?} is not in U"))
                })?;
                seeds.push((pt.clone(), host.level().max(0)));
            }
        }
    }
    let mut pieces = ClopenSet::empty(p, dim);
    for (center, top) in seeds {
        let mut chosen = None;
        for level in 0..=top {
            let ball = Ball::new(p, center.clone(), level);
            let part = x.intersect_ball(&ball);
            if part.is_subset(u)? {
                chosen = Some(part);
                break;
            }
        }
        let part = chosen.expect("the seed level is always admissible");
        pieces = pieces.union(&part)?;
    }
    Ok(pieces)
}

/// Disjoint clopen sets `V_i ⊆ U_i` covering `X`.
///
/// Greedy construction `V_i = (U_i ∩ X) \ (V_1 ∪ … ∪ V_{i-1})`. Each `V_i`
/// contains the closed set `(X \ ∪_{j<i} V_j) \ ∪_{j>i} U_j` that the
/// Urysohn recursion would start from; this is asserted.
pub fn refine_partition(cover: &[ClopenSet], x: &ClopenSet) -> Result<Vec<ClopenSet>> {
    let mut union = ClopenSet::empty(x.p(), x.dim());
    for u in cover {
        union = union.union(u)?;
    }
    if !x.is_subset(&union)? {
        return Err(Error::CoverIncomplete);
    }
    let mut taken = ClopenSet::empty(x.p(), x.dim());
    let mut out = Vec::with_capacity(cover.len());
    for (i, u) in cover.iter().enumerate() {
        let part = u.intersect(x)?.difference(&taken)?;
        let mut later = ClopenSet::empty(x.p(), x.dim());
        for w in &cover[i + 1..] {
            later = later.union(w)?;
        }
        let forced = x.difference(&taken)?.difference(&later)?;
        debug_assert!(forced.is_subset(&part)?);
        taken = taken.union(&part)?;
        out.push(part);
    }
    Ok(out)
}
