//! Randomized self-checks run by `padlab check`.

use padlab::distributions::Distribution;
use padlab::padic::{refine_partition, urysohn_clopen, UrysohnSource};
use padlab::{Ball, ClopenSet, ExactComplex, Prime, Rat, SchwartzBruhat};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::CliError;

/// Outcome of a battery: trials run and the first counterexample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub trials: usize,
    pub counterexample: Option<String>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }

    pub fn line(&self) -> String {
        match &self.counterexample {
            None => format!("{}: pass ({} trials)", self.name, self.trials),
            Some(c) => format!("{}: FAIL after {} trials: {c}", self.name, self.trials),
        }
    }
}

/// Bound on cosets times the order of the roots of unity an exact transform
/// of span `m + k` has to handle.
const MAX_COST: u64 = 20_000;

/// Largest span `m + k <= 5` whose exact transform stays within `MAX_COST`.
pub fn max_span(p: Prime, n: usize) -> u32 {
    let mut span = 5;
    while span > 1 && p.get().pow((n as u32 + 1) * span) > MAX_COST {
        span -= 1;
    }
    span
}

/// A random function on `p^{-m} Z_p^n` constant on level-`k` cosets, with
/// `m + k <= max_span(p, n)`.
pub fn random_function(rng: &mut ChaCha8Rng, p: Prime, n: usize) -> Result<SchwartzBruhat, CliError> {
    let span = max_span(p, n);
    let total = rng.gen_range(1..=span as i64);
    let m = rng.gen_range(0..=total.min(2));
    let k = total - m;
    let f = SchwartzBruhat::from_fn(p, n, m, k, |_| {
        if rng.gen_bool(0.4) {
            return Ok(ExactComplex::zero(p));
        }
        let re = Rat::new(rng.gen_range(-4..=4).into(), rng.gen_range(1..=3).into());
        let im = Rat::from_integer(rng.gen_range(-2..=2).into());
        Ok(ExactComplex::gaussian(p, re, im))
    })?;
    Ok(f)
}

pub fn fourier_inversion(p: Prime, n: usize, trials: usize, rng: &mut ChaCha8Rng) -> Result<CheckOutcome, CliError> {
    let scale = p.rpow(-(n as i64));
    for t in 0..trials {
        let f = random_function(rng, p, n)?;
        let ff = f.fourier()?.fourier()?;
        let expected = f.reflect().scale_rat(&scale);
        if ff != expected {
            return Ok(CheckOutcome {
                name: "fourier-inversion",
                trials: t + 1,
                counterexample: Some(format!("F(F(f)) differs from p^-n f(-x) for\n{}", f.to_csv(6))),
            });
        }
    }
    Ok(CheckOutcome {
        name: "fourier-inversion",
        trials,
        counterexample: None,
    })
}

pub fn plancherel(p: Prime, n: usize, trials: usize, rng: &mut ChaCha8Rng) -> Result<CheckOutcome, CliError> {
    let scale = p.rpow(-(n as i64));
    for t in 0..trials {
        let f = random_function(rng, p, n)?;
        let g = random_function(rng, p, n)?;
        let lhs = f.fourier()?.plancherel(&g.fourier()?)?;
        let rhs = f.plancherel(&g)?.scale(&scale);
        if lhs != rhs {
            return Ok(CheckOutcome {
                name: "plancherel",
                trials: t + 1,
                counterexample: Some(format!("<Ff, Fg> = {lhs} but p^-n <f, g> = {rhs}")),
            });
        }
    }
    Ok(CheckOutcome {
        name: "plancherel",
        trials,
        counterexample: None,
    })
}

fn random_ball_in(rng: &mut ChaCha8Rng, outer: &Ball, max_depth: i64) -> Ball {
    let p = outer.p();
    let depth = rng.gen_range(0..=max_depth);
    let scale = p.rpow(outer.level());
    let center: Vec<Rat> = outer
        .center()
        .iter()
        .map(|c| c + &scale * Rat::from_integer(rng.gen_range(0..p.get().pow(depth as u32)).into()))
        .collect();
    Ball::new(p, center, outer.level() + depth)
}

/// A union of up to four random boxes inside `outer`.
pub fn random_union(rng: &mut ChaCha8Rng, outer: &Ball, max_depth: i64) -> Result<ClopenSet, CliError> {
    let count = rng.gen_range(1..=4);
    let balls = (0..count).map(|_| random_ball_in(rng, outer, max_depth)).collect();
    Ok(ClopenSet::from_balls(outer.p(), outer.dim(), balls)?)
}

pub fn urysohn(p: Prime, n: usize, trials: usize, rng: &mut ChaCha8Rng) -> Result<CheckOutcome, CliError> {
    let cube = Ball::origin(p, n, 0);
    let x = ClopenSet::from_ball(cube.clone());
    for t in 0..trials {
        let u = random_union(rng, &cube, 2)?;
        let u_ball = u.balls()[rng.gen_range(0..u.balls().len())].clone();
        let z = if rng.gen_bool(0.5) {
            UrysohnSource::Set(random_union(rng, &u_ball, 2)?)
        } else {
            let pts = (0..rng.gen_range(1..=3))
                .map(|_| random_ball_in(rng, &u_ball, 4).center().to_vec())
                .collect();
            UrysohnSource::Points(pts)
        };
        let c = urysohn_clopen(&z, &u, &x)?;
        let z_inside = match &z {
            UrysohnSource::Set(s) => s.is_subset(&c)?,
            UrysohnSource::Points(pts) => pts.iter().all(|q| c.contains_point(q)),
        };
        if !z_inside || !c.is_subset(&u)? {
            return Ok(CheckOutcome {
                name: "urysohn",
                trials: t + 1,
                counterexample: Some(format!("Z = {z:?}, U = {u}, C = {c}")),
            });
        }
    }
    Ok(CheckOutcome {
        name: "urysohn",
        trials,
        counterexample: None,
    })
}

pub fn partition(p: Prime, n: usize, trials: usize, rng: &mut ChaCha8Rng) -> Result<CheckOutcome, CliError> {
    let cube = Ball::origin(p, n, 0);
    let x = ClopenSet::from_ball(cube.clone());
    for t in 0..trials {
        let mut cover: Vec<ClopenSet> = (0..rng.gen_range(1..=3))
            .map(|_| random_union(rng, &cube, 2))
            .collect::<Result<_, _>>()?;
        let mut covered = ClopenSet::empty(p, n);
        for u in &cover {
            covered = covered.union(u)?;
        }
        let rest = x.difference(&covered)?;
        if !rest.is_empty() {
            let extra = random_union(rng, &cube, 1)?.union(&rest)?;
            cover.insert(rng.gen_range(0..=cover.len()), extra);
        }
        let parts = refine_partition(&cover, &x)?;
        let mut union = ClopenSet::empty(p, n);
        let mut problem = None;
        for (i, (v, u)) in parts.iter().zip(&cover).enumerate() {
            if !v.is_subset(u)? {
                problem = Some(format!("part {i} = {v} not inside {u}"));
                break;
            }
            if !union.intersect(v)?.is_empty() {
                problem = Some(format!("part {i} = {v} overlaps earlier parts"));
                break;
            }
            union = union.union(v)?;
        }
        if problem.is_none() && (parts.len() != cover.len() || !union.is_subset(&x)? || !x.is_subset(&union)?) {
            problem = Some(format!("parts do not cover {x}"));
        }
        if let Some(m) = problem {
            return Ok(CheckOutcome {
                name: "partition",
                trials: t + 1,
                counterexample: Some(m),
            });
        }
    }
    Ok(CheckOutcome {
        name: "partition",
        trials,
        counterexample: None,
    })
}

/// Mass of `B(x, |r|) ∩ Z_p`: `p^{-max(ord r, 0)}` for `x ∈ Z_p`, `1` when
/// `ord r <= v(x) < 0`, and `0` otherwise.
pub fn haar_ball_mass(p: Prime, vx: i64, ord_r: i64) -> Rat {
    if vx >= 0 {
        p.rpow(-ord_r.max(0))
    } else if ord_r <= vx {
        Rat::from_integer(1.into())
    } else {
        Rat::from_integer(0.into())
    }
}

pub fn bfun_haar(p: Prime, rng: &mut ChaCha8Rng) -> Result<CheckOutcome, CliError> {
    let haar = Distribution::haar_on(ClopenSet::from_ball(Ball::origin(p, 1, 0)));
    let mut cells = 0;
    for vx in -4..=4 {
        for ord_r in -4..=4 {
            let unit = loop {
                let u = rng.gen_range(1..(p.get() * p.get() * 7));
                if u % p.get() != 0 {
                    break Rat::from_integer(u.into());
                }
            };
            let x = p.rpow(vx) * unit;
            let r = p.rpow(ord_r);
            let got = haar.b_function(&[x.clone()], &r)?;
            let want = haar_ball_mass(p, vx, ord_r);
            if got.as_rational() != Some(want.clone()) {
                return Ok(CheckOutcome {
                    name: "bfun-haar",
                    trials: cells + 1,
                    counterexample: Some(format!("x = {x}, ord r = {ord_r}: got {got}, expected {want}")),
                });
            }
            cells += 1;
        }
    }
    Ok(CheckOutcome {
        name: "bfun-haar",
        trials: cells,
        counterexample: None,
    })
}
