#![allow(dead_code)]

use padlab::{Ball, ClopenSet, ExactComplex, Prime, Rat, SchwartzBruhat};
use rand::Rng;

pub fn prime(p: u64) -> Prime {
    Prime::new(p).unwrap()
}

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

pub fn frac(a: i64, b: i64) -> Rat {
    Rat::new(a.into(), b.into())
}

pub fn unit_cube(p: Prime, n: usize) -> ClopenSet {
    ClopenSet::from_ball(Ball::origin(p, n, 0))
}

pub fn int_value(p: Prime, n: i64) -> ExactComplex {
    ExactComplex::from_int(p, n)
}

/// Random function on `Z_p^n` constant at level `k` with small integer
/// values, roughly half of them zero.
pub fn random_function(rng: &mut impl Rng, p: Prime, n: usize, k: i64) -> SchwartzBruhat {
    SchwartzBruhat::from_fn(p, n, 0, k, |_| {
        let v = if rng.gen_bool(0.5) { 0 } else { rng.gen_range(-3..=3) };
        Ok(ExactComplex::from_int(p, v))
    })
    .unwrap()
}

/// Level-`k` coset representatives of `Z_p^n`.
pub fn reps(p: Prime, n: usize, k: i64) -> Vec<Vec<Rat>> {
    Ball::origin(p, n, 0)
        .enumerate_cosets(k)
        .unwrap()
        .into_iter()
        .map(|b| b.center().to_vec())
        .collect()
}
