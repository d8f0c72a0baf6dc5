//! Finite-scale wave front scans.
//!
//! A point `(x, y)` of the cotangent space is micro-locally smooth for `ξ`
//! when `F(φξ)(λ·y')` vanishes for all large `|λ|`, all `φ` near `x` and all
//! `y'` near `y`. The scanner tests this on a grid of ball pairs: position
//! cosets at level `k_x`, direction cosets at level `k_y` on the unit sphere,
//! test indicators at level `k_test`, and `|λ| = p^N` for `N` in a range.
//! A cell is `VanishingAtScale` when every value vanishes from some onset
//! depth up to `N_max`.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::distributions::{Distribution, GraphManifold, KnownWf};
use crate::padic::{fmt_rat, valuation, Ball, ClopenSet, Prime, Valuation};
use crate::{Error, ExactComplex, Rat, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanParams {
    pub k_x: i64,
    pub k_y: i64,
    pub k_test: i64,
    pub n_min: i64,
    pub n_max: i64,
}

impl Default for ScanParams {
    fn default() -> Self {
        ScanParams {
            k_x: 2,
            k_y: 2,
            k_test: 3,
            n_min: 1,
            n_max: 5,
        }
    }
}

impl ScanParams {
    pub fn validate(&self) -> Result<()> {
        if self.k_test < self.k_x {
            return Err(Error::InvalidLevel(format!(
                "k_test = {} below k_x = {}",
                self.k_test, self.k_x
            )));
        }
        if self.k_y < 1 {
            return Err(Error::InvalidLevel("k_y must be at least 1".into()));
        }
        if self.n_min < 1 || self.n_max < self.n_min {
            return Err(Error::InvalidLevel(format!(
                "frequency range {}..{} is not 1 <= N_min <= N_max",
                self.n_min, self.n_max
            )));
        }
        Ok(())
    }
}

/// A replayable nonzero value `ξ(1_test · ψ(⟨λy, ·⟩))`.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub test_cell: Ball,
    pub lambda: Rat,
    pub y: Vec<Rat>,
    pub value: ExactComplex,
}

impl Witness {
    pub fn replay(&self, xi: &Distribution) -> Result<ExactComplex> {
        let w: Vec<Rat> = self.y.iter().map(|c| c * &self.lambda).collect();
        xi.eval_character(&self.test_cell, &w)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    /// All tested values vanish for `N` in `onset..=N_max`.
    VanishingAtScale { onset: i64 },
    Nonvanishing(Witness),
}

impl Verdict {
    pub fn is_nonvanishing(&self) -> bool {
        matches!(self, Verdict::Nonvanishing(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanCell {
    pub x_cell: Ball,
    pub direction: Ball,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    pub params: ScanParams,
    pub cells: Vec<ScanCell>,
}

impl ScanReport {
    pub fn nonvanishing(&self) -> impl Iterator<Item = &ScanCell> {
        self.cells.iter().filter(|c| c.verdict.is_nonvanishing())
    }

    /// CSV rows `x_rep,y_rep,verdict,witness_lambda,witness_value_float`.
    pub fn to_csv(&self, float_digits: usize) -> String {
        let mut out = String::from("x_rep,y_rep,verdict,witness_lambda,witness_value_float\n");
        for c in &self.cells {
            let x = fmt_tuple(c.x_cell.center());
            let y = fmt_tuple(c.direction.center());
            let _ = match &c.verdict {
                Verdict::VanishingAtScale { onset } => {
                    writeln!(out, "\"{x}\",\"{y}\",vanishing(onset={onset}),,")
                }
                Verdict::Nonvanishing(w) => writeln!(
                    out,
                    "\"{x}\",\"{y}\",nonvanishing,{},{}",
                    fmt_rat(&w.lambda),
                    w.value.format_float(float_digits)
                ),
            };
        }
        out
    }
}

fn fmt_tuple(x: &[Rat]) -> String {
    format!("({})", x.iter().map(fmt_rat).collect::<Vec<_>>().join(","))
}

/// Direction cosets at level `k_y` on the unit sphere `min_i v(y_i) = 0`.
pub fn direction_cosets(p: Prime, n: usize, k_y: i64) -> Result<Vec<Ball>> {
    let all = Ball::origin(p, n, 0).enumerate_cosets(k_y)?;
    Ok(all
        .into_iter()
        .filter(|d| {
            d.center()
                .iter()
                .any(|c| valuation(c, p) == Valuation::Finite(0))
        })
        .collect())
}

/// Scans `region` for micro-local non-smoothness of `ξ`.
pub fn wf_scan(xi: &Distribution, region: &ClopenSet, params: &ScanParams) -> Result<ScanReport> {
    params.validate()?;
    let p = xi.p();
    let n = xi.dim();
    if region.dim() != n {
        return Err(Error::DimensionMismatch(n, region.dim()));
    }
    let x_cells = region.cosets_at(params.k_x)?;
    let dirs = direction_cosets(p, n, params.k_y)?;
    // test cells that can carry a nonzero value, per position coset
    let tests: Vec<Vec<Ball>> = x_cells
        .par_iter()
        .map(|c| {
            let mut live = Vec::new();
            for t in c.enumerate_cosets(params.k_test.max(c.level()))? {
                if !xi.is_null_on(&t)? {
                    live.push(t);
                }
            }
            Ok(live)
        })
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> = (0..x_cells.len())
        .flat_map(|i| (0..dirs.len()).map(move |j| (i, j)))
        .collect();
    let cells = jobs
        .par_iter()
        .map(|&(i, j)| {
            let verdict = scan_cell(xi, &tests[i], &dirs[j], params)?;
            Ok(ScanCell {
                x_cell: x_cells[i].clone(),
                direction: dirs[j].clone(),
                verdict,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanReport {
        params: *params,
        cells,
    })
}

fn scan_cell(xi: &Distribution, tests: &[Ball], dir: &Ball, params: &ScanParams) -> Result<Verdict> {
    let p = xi.p();
    let y = dir.center().to_vec();
    let mut onset = params.n_max + 1;
    for big_n in (params.n_min..=params.n_max).rev() {
        let lambda = p.rpow(-big_n);
        let w: Vec<Rat> = y.iter().map(|c| c * &lambda).collect();
        for t in tests {
            let value = xi.eval_character(t, &w).map_err(|e| {
                Error::Certification(format!("evaluation failed on test cell {t} at N = {big_n}: {e}"))
            })?;
            if !value.is_zero() {
                if big_n == params.n_max {
                    return Ok(Verdict::Nonvanishing(Witness {
                        test_cell: t.clone(),
                        lambda,
                        y,
                        value,
                    }));
                }
                return Ok(Verdict::VanishingAtScale { onset });
            }
        }
        onset = big_n;
    }
    Ok(Verdict::VanishingAtScale { onset })
}

/// A conormal bundle `CN_W` presented through the graph structure of `W`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConormalPresentation {
    pub manifold: GraphManifold,
}

impl ConormalPresentation {
    pub fn new(manifold: GraphManifold) -> Self {
        ConormalPresentation { manifold }
    }

    pub fn point(p: Prime, a: Vec<Rat>) -> Self {
        ConormalPresentation::new(GraphManifold::point(p, a))
    }

    fn covector_test(&self, t: &[Rat], ycov: &[Rat]) -> Result<bool> {
        let w = &self.manifold;
        let jac = w.jacobian(t)?;
        let fiber = w.fiber_coords();
        for (j, &bi) in w.base_coords().iter().enumerate() {
            let mut s = ycov[bi].clone();
            for (r, &fi) in fiber.iter().enumerate() {
                s += &jac[r][j] * &ycov[fi];
            }
            if s != Rat::from_integer(0.into()) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Exact membership of `(x, ycov)` in the conormal bundle.
    pub fn contains(&self, x: &[Rat], ycov: &[Rat]) -> Result<bool> {
        let w = &self.manifold;
        if x.len() != w.ambient_dim() || ycov.len() != w.ambient_dim() {
            return Err(Error::DimensionMismatch(w.ambient_dim(), x.len()));
        }
        if !w.contains(x) {
            return Err(Error::NotInDomain(format!("{} is not on {w}", fmt_tuple(x))));
        }
        self.covector_test(&w.project(x), ycov)
    }

    /// Whether some point of `W ∩ x_cell` carries a conormal covector in the
    /// cone over `direction`, decided on base representatives at
    /// `probe_level`.
    pub fn meets_cell(&self, x_cell: &Ball, direction: &Ball, probe_level: i64) -> Result<bool> {
        let w = &self.manifold;
        let p = w.p();
        let ky = direction.level();
        let fiber = w.fiber_coords();
        for b in w.base().cosets_at(probe_level)? {
            let t = b.center().to_vec();
            if w.excluded().contains(&t) {
                continue;
            }
            let Some(x) = w.lift(&t) else { continue };
            if !x_cell.contains_point(&x) {
                continue;
            }
            let jac = w.jacobian(&t)?;
            let e = jac
                .iter()
                .flatten()
                .filter_map(|c| valuation(c, p).finite())
                .min()
                .unwrap_or(0)
                .min(0)
                .unsigned_abs() as i64;
            // θ ≡ direction on the fiber coordinates, known to precision k_y + e
            let dfib: Vec<Rat> = fiber.iter().map(|&i| direction.center()[i].clone()).collect();
            let lifts = Ball::new(p, dfib, ky).enumerate_cosets(ky + e)?;
            for theta in lifts {
                let ok = w.base_coords().iter().enumerate().all(|(j, &bi)| {
                    let mut eta = Rat::from_integer(0.into());
                    for (r, th) in theta.center().iter().enumerate() {
                        eta -= &jac[r][j] * th;
                    }
                    valuation(&(eta - &direction.center()[bi]), p).at_least(ky)
                });
                if ok {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }
}

/// `(x, ycov) ∈ CN_W`, exactly.
pub fn conormal_contains(cp: &ConormalPresentation, x: &[Rat], ycov: &[Rat]) -> Result<bool> {
    cp.contains(x, ycov)
}

/// Conormal presentations of a closed-form wave front set.
pub fn presentations_of(p: Prime, wf: &[KnownWf]) -> Vec<ConormalPresentation> {
    wf.iter()
        .map(|c| match c {
            KnownWf::Point(a) => ConormalPresentation::point(p, a.clone()),
            KnownWf::Conormal(w) => ConormalPresentation::new(w.clone()),
        })
        .collect()
}

/// Default probe level for cell-level conormal tests under `params`.
pub fn probe_level(params: &ScanParams) -> i64 {
    params.k_x.max(params.k_y).max(params.k_test)
}

/// The grid cells met by a union of conormal bundles.
pub fn closed_form_cells(
    report_grid: &[(Ball, Ball)],
    candidates: &[ConormalPresentation],
    probe: i64,
) -> Result<Vec<bool>> {
    report_grid
        .par_iter()
        .map(|(c, d)| {
            for cp in candidates {
                if cp.meets_cell(c, d, probe)? {
                    return Ok(true);
                }
            }
            Ok(false)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Containment {
    /// The witness pair itself lies in a candidate bundle.
    Exact,
    /// The cell meets a candidate bundle.
    AtScale,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolonomicityVerdict {
    pub passes: bool,
    pub contained: Vec<(Ball, Ball, Containment)>,
    pub violations: Vec<(Ball, Ball)>,
}

/// Checks that every nonvanishing cell of `report` lies in one of the
/// candidate conormal bundles.
pub fn holonomicity_check(
    report: &ScanReport,
    candidates: &[ConormalPresentation],
) -> Result<HolonomicityVerdict> {
    let probe = probe_level(&report.params);
    let mut contained = Vec::new();
    let mut violations = Vec::new();
    for cell in report.nonvanishing() {
        let Verdict::Nonvanishing(wit) = &cell.verdict else {
            unreachable!()
        };
        let x = wit.test_cell.center();
        let mut how = None;
        for cp in candidates {
            if cp.manifold.contains(x) && cp.contains(x, &wit.y)? {
                how = Some(Containment::Exact);
                break;
            }
        }
        if how.is_none() {
            for cp in candidates {
                if cp.meets_cell(&cell.x_cell, &cell.direction, probe)? {
                    how = Some(Containment::AtScale);
                    break;
                }
            }
        }
        match how {
            Some(h) => contained.push((cell.x_cell.clone(), cell.direction.clone(), h)),
            None => violations.push((cell.x_cell.clone(), cell.direction.clone())),
        }
    }
    Ok(HolonomicityVerdict {
        passes: violations.is_empty(),
        contained,
        violations,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum SmoothVerdict {
    LocallyConstantDensity { gamma: ExactComplex },
    NotSmoothAtScale { witness: Ball, value: ExactComplex },
}

/// Splits `region` into cosets at `level` and tests each for a locally
/// constant density down to `depth` further levels.
pub fn smooth_locus_scan(
    xi: &Distribution,
    region: &ClopenSet,
    level: i64,
    depth: i64,
) -> Result<Vec<(Ball, SmoothVerdict)>> {
    if depth < 0 {
        return Err(Error::InvalidLevel(format!("depth {depth} < 0")));
    }
    region
        .cosets_at(level)?
        .par_iter()
        .map(|c| {
            let mass = |b: &Ball| xi.eval(&crate::SchwartzBruhat::indicator_ball(b)?);
            let gamma = mass(c)?.scale(&c.volume().recip());
            for k in c.level() + 1..=c.level() + depth {
                for sub in c.enumerate_cosets(k)? {
                    let v = mass(&sub)?;
                    if v != gamma.scale(&sub.volume()) {
                        return Ok((
                            c.clone(),
                            SmoothVerdict::NotSmoothAtScale {
                                witness: sub,
                                value: v,
                            },
                        ));
                    }
                }
            }
            Ok((c.clone(), SmoothVerdict::LocallyConstantDensity { gamma }))
        })
        .collect()
}
