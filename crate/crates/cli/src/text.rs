//! Canonical text for points, boxes and box unions.

use padlab::cexp::parse_rational;
use padlab::padic::fmt_rat;
use padlab::{Ball, ClopenSet, Prime, Rat};

/// `(a1,...,an)`; the empty tuple is `()`.
pub fn parse_point(src: &str) -> Result<Vec<Rat>, String> {
    let s = src.trim();
    let inner = s
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| format!("expected a parenthesized tuple, found `{s}`"))?;
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    inner
        .split(',')
        .map(|c| parse_rational(c.trim()).map_err(|e| format!("in `{s}`: {e}")))
        .collect()
}

pub fn fmt_point(x: &[Rat]) -> String {
    format!("({})", x.iter().map(fmt_rat).collect::<Vec<_>>().join(","))
}

/// `box(c1,...,cn; r)`.
pub fn parse_box(src: &str, p: Prime) -> Result<Ball, String> {
    let s = src.trim();
    let inner = s
        .strip_prefix("box(")
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| format!("expected `box(c1,...,cn; r)`, found `{s}`"))?;
    let (coords, level) = inner
        .split_once(';')
        .ok_or_else(|| format!("missing `; level` in `{s}`"))?;
    let center = if coords.trim().is_empty() {
        Vec::new()
    } else {
        parse_point(&format!("({coords})"))?
    };
    let level: i64 = level
        .trim()
        .parse()
        .map_err(|_| format!("bad level `{}` in `{s}`", level.trim()))?;
    Ok(Ball::new(p, center, level))
}

/// Boxes joined by `;`, or `empty(n)`.
pub fn parse_clopen(src: &str, p: Prime) -> Result<ClopenSet, String> {
    let s = src.trim();
    if let Some(d) = s.strip_prefix("empty(").and_then(|s| s.strip_suffix(')')) {
        let dim = d.trim().parse().map_err(|_| format!("bad dimension in `{s}`"))?;
        return Ok(ClopenSet::empty(p, dim));
    }
    let mut balls = Vec::new();
    let mut rest = s;
    while !rest.is_empty() {
        let end = rest
            .find(')')
            .ok_or_else(|| format!("unterminated box in `{s}`"))?;
        balls.push(parse_box(&rest[..=end], p)?);
        rest = rest[end + 1..].trim_start();
        if let Some(r) = rest.strip_prefix(';') {
            rest = r.trim_start();
            if rest.is_empty() {
                return Err(format!("trailing `;` in `{s}`"));
            }
        } else if !rest.is_empty() {
            return Err(format!("expected `;` before `{rest}`"));
        }
    }
    let dim = balls
        .first()
        .map(Ball::dim)
        .ok_or_else(|| format!("no boxes in `{s}`"))?;
    ClopenSet::from_balls(p, dim, balls).map_err(|e| e.to_string())
}

/// Comma-separated list, ignoring blanks.
pub fn split_list(src: &str) -> Vec<String> {
    src.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

/// Points joined by `;`.
pub fn parse_points(src: &str) -> Result<Vec<Vec<Rat>>, String> {
    src.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse_point)
        .collect()
}

pub fn fmt_points(pts: &[Vec<Rat>]) -> String {
    pts.iter().map(|x| fmt_point(x)).collect::<Vec<_>>().join("; ")
}
