mod common;

use common::*;
use num_traits::ToPrimitive;
use padlab::schwartz::psi;
use padlab::{Ball, ExactComplex, Prime, Rat, SchwartzBruhat};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// `ψ(x) = exp(2πi {x/p})` with the fractional part computed from an
/// explicit modular inverse.
fn psi_float(x: &Rat, p: u64) -> (f64, f64) {
    let y = x / Rat::from_integer(p.into());
    let (num, mut den) = (y.numer().to_i128().unwrap(), y.denom().to_i128().unwrap());
    let p = p as i128;
    let mut pk = 1i128;
    while den % p == 0 {
        den /= p;
        pk *= p;
    }
    if pk == 1 {
        return (1.0, 0.0);
    }
    let inv = (1..pk).find(|t| (t * den).rem_euclid(pk) == 1).unwrap();
    let frac = (num * inv).rem_euclid(pk) as f64 / pk as f64;
    ((2.0 * PI * frac).cos(), (2.0 * PI * frac).sin())
}

fn cmul(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

fn random_sb(rng: &mut ChaCha8Rng, p: Prime, n: usize, m: i64, k: i64) -> SchwartzBruhat {
    SchwartzBruhat::from_fn(p, n, m, k, |_| {
        if rng.gen_bool(0.3) {
            return Ok(ExactComplex::zero(p));
        }
        let re = frac(rng.gen_range(-4..=4), rng.gen_range(1..=3));
        Ok(ExactComplex::gaussian(p, re, rat(rng.gen_range(-2..=2))))
    })
    .unwrap()
}

/// `∫ f(x) ψ(x·ξ) dx` as a Riemann sum over level-`fine` cosets, fine enough
/// that both factors are constant on each coset.
fn riemann_transform(f: &SchwartzBruhat, xi: &[Rat], fine: i64) -> (f64, f64) {
    let p = f.p();
    let n = f.dim();
    let big = Ball::origin(p, n, -f.support_level());
    let vol = p.rpow(-(n as i64) * fine).to_f64().unwrap();
    let mut acc = (0.0, 0.0);
    for c in big.enumerate_cosets(fine).unwrap() {
        let x = c.center();
        let v = f.value_at(x).to_f64();
        if v == (0.0, 0.0) {
            continue;
        }
        let dot: Rat = x.iter().zip(xi).map(|(a, b)| a * b).sum();
        let t = cmul(v, psi_float(&dot, p.get()));
        acc.0 += t.0 * vol;
        acc.1 += t.1 * vol;
    }
    acc
}

#[test]
fn character_matches_fractional_part() {
    for pp in [2u64, 3, 5, 7] {
        let p = prime(pp);
        for a in -60..60 {
            for b in [1, 2, 3, 4, 9, 25, 27, 49, 50, 125] {
                let x = frac(a, b);
                let got = psi(&x, p).unwrap().to_f64();
                let want = psi_float(&x, pp);
                assert!((got.0 - want.0).abs() < 1e-9 && (got.1 - want.1).abs() < 1e-9, "p = {pp}, x = {x}");
            }
        }
    }
}

#[test]
fn transform_matches_riemann_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (pp, n, m, k) in [(2u64, 1usize, 1i64, 2i64), (3, 1, 1, 1), (3, 2, 0, 1), (5, 1, 1, 1), (2, 2, 1, 1), (7, 1, 0, 1)] {
        let p = prime(pp);
        let f = random_sb(&mut rng, p, n, m, k);
        let g = f.fourier().unwrap();
        // ψ(x·ξ) is constant on level-(m+1) cosets for every ξ in the output range
        let fine = k.max(m + 1);
        let out = Ball::origin(p, n, -g.support_level());
        for c in out.enumerate_cosets(g.constancy_level()).unwrap() {
            let xi = c.center();
            let got = g.value_at(xi).to_f64();
            let want = riemann_transform(&f, xi, fine);
            assert!(
                (got.0 - want.0).abs() < 1e-9 && (got.1 - want.1).abs() < 1e-9,
                "p = {pp}, n = {n}, ξ = {xi:?}: {got:?} vs {want:?}"
            );
        }
    }
}

#[test]
fn transform_of_balls() {
    for pp in [2u64, 3, 5] {
        let p = prime(pp);
        for (c, l) in [(vec![rat(0)], 0i64), (vec![rat(1)], 1), (vec![frac(1, pp as i64)], -1), (vec![rat(2)], 2)] {
            let f = SchwartzBruhat::indicator_ball(&Ball::new(p, c.clone(), l)).unwrap();
            let g = f.fourier().unwrap();
            let want = SchwartzBruhat::from_fn(p, 1, g.support_level(), g.constancy_level(), |xi| {
                if padlab::padic::valuation(&xi[0], p).at_least(1 - l) {
                    Ok(psi(&(&c[0] * &xi[0]), p)?.scale(&p.rpow(-l)))
                } else {
                    Ok(ExactComplex::zero(p))
                }
            })
            .unwrap();
            assert_eq!(g, want, "p = {pp}, center {c:?}, level {l}");
        }
    }
}

fn small_case() -> impl Strategy<Value = (u64, usize, i64, i64, u64)> {
    (prop::sample::select(vec![2u64, 3, 5]), 1usize..=2, 0i64..=1, 0i64..=2, any::<u64>())
        .prop_filter("small tables", |(p, n, m, k, _)| p.pow((*n as u32) * (m + k) as u32) <= 81)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn double_transform_reflects((p, n, m, k, seed) in small_case()) {
        let p = prime(p);
        let f = random_sb(&mut ChaCha8Rng::seed_from_u64(seed), p, n, m, k);
        let ff = f.fourier().unwrap().fourier().unwrap();
        prop_assert_eq!(ff, f.reflect().scale_rat(&p.rpow(-(n as i64))));
    }

    #[test]
    fn plancherel_and_linearity((p, n, m, k, seed) in small_case()) {
        let p = prime(p);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_sb(&mut rng, p, n, m, k);
        let g = random_sb(&mut rng, p, n, k.min(1), m + 1);
        let (hf, hg) = (f.fourier().unwrap(), g.fourier().unwrap());
        let lhs = hf.plancherel(&hg).unwrap();
        prop_assert_eq!(lhs, f.plancherel(&g).unwrap().scale(&p.rpow(-(n as i64))));
        let c = ExactComplex::gaussian(p, frac(2, 3), rat(-1));
        let combo = f.scale(&c).add(&g).unwrap();
        prop_assert_eq!(combo.fourier().unwrap(), hf.scale(&c).add(&hg).unwrap());
    }

    #[test]
    fn translation_becomes_modulation((p, n, m, k, seed) in small_case(), shift in prop::collection::vec(-6i64..6, 2)) {
        let p = prime(p);
        let f = random_sb(&mut ChaCha8Rng::seed_from_u64(seed), p, n, m, k);
        let a: Vec<Rat> = shift[..n].iter().map(|&s| frac(s, p.get() as i64)).collect();
        let lhs = f.translate(&a).unwrap().fourier().unwrap();
        let hf = f.fourier().unwrap();
        let want = SchwartzBruhat::from_fn(p, n, lhs.support_level(), lhs.constancy_level(), |xi| {
            let dot: Rat = a.iter().zip(xi).map(|(u, v)| u * v).sum();
            Ok(&psi(&dot, p)? * &hf.value_at(xi))
        })
        .unwrap();
        prop_assert_eq!(lhs, want);
    }

    #[test]
    fn refinement_keeps_values_and_integral((p, n, m, k, seed) in small_case()) {
        let p = prime(p);
        let f = random_sb(&mut ChaCha8Rng::seed_from_u64(seed), p, n, m, k);
        let r = f.refine(m + 1, k + 1).unwrap();
        prop_assert_eq!(&r, &f);
        prop_assert_eq!(r.integrate(), f.integrate());
        for (ball, v) in f.entries() {
            prop_assert_eq!(&r.value_at(ball.center()), v);
        }
    }
}
