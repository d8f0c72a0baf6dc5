mod common;

use common::*;
use padlab::cexp::{parse, RationalTerm};
use padlab::distributions::{character_test_function, Distribution, GraphManifold};
use padlab::padic::valuation;
use padlab::schwartz::psi;
use padlab::{Ball, ClopenSet, ExactComplex, Prime, Rat, SchwartzBruhat};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `Σ_c f(c) vol(c)` over the level-`level` cosets `c` of `Z_p^n`.
fn riemann(p: Prime, n: usize, level: i64, mut f: impl FnMut(&[Rat]) -> ExactComplex) -> ExactComplex {
    let vol = p.rpow(-(n as i64) * level);
    reps(p, n, level)
        .iter()
        .fold(ExactComplex::zero(p), |acc, x| acc + f(x).scale(&vol))
}

fn setup() -> impl Strategy<Value = (u64, i64, u64)> {
    (prop::sample::select(vec![2u64, 3, 5]), 1i64..=2, any::<u64>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn haar_and_dirac((p, k, seed) in setup(), a in 0i64..30, b in 0i64..30) {
        let p = prime(p);
        let phi = random_function(&mut ChaCha8Rng::seed_from_u64(seed), p, 2, k);
        let set = ClopenSet::from_balls(p, 2, vec![Ball::new(p, vec![rat(a), rat(b)], 1), Ball::origin(p, 2, 2)]).unwrap();
        let haar = Distribution::haar_on(set.clone());
        let want = riemann(p, 2, k.max(2), |x| if set.contains_point(x) { phi.value_at(x) } else { ExactComplex::zero(p) });
        prop_assert_eq!(haar.eval(&phi).unwrap(), want);
        let point = vec![rat(a), frac(b, 1)];
        prop_assert_eq!(Distribution::dirac(p, point.clone()).eval(&phi).unwrap(), phi.value_at(&point));
    }

    #[test]
    fn parabola_measure_is_a_pullback((p, k, seed) in setup()) {
        let p = prime(p);
        let phi = random_function(&mut ChaCha8Rng::seed_from_u64(seed), p, 2, k);
        let w = GraphManifold::over_leading(unit_cube(p, 1), vec![RationalTerm::var(0).pow(2)]).unwrap();
        let mu = Distribution::graph_measure(w).unwrap();
        // t ↦ (t, t^2) maps level-k cosets of Z_p into level-k cosets
        let want = riemann(p, 1, k, |t| phi.value_at(&[t[0].clone(), &t[0] * &t[0]]));
        prop_assert_eq!(mu.eval(&phi).unwrap(), want);
    }

    #[test]
    fn oscillating_density_matches_fine_sums((p, k, seed) in setup()) {
        let p = prime(p);
        let phi = random_function(&mut ChaCha8Rng::seed_from_u64(seed), p, 1, k);
        let scale = Rat::from_integer(p.pow(2));
        let e = parse(&format!("psi(x1^2/{})", p.pow(2)), p).unwrap();
        let d = Distribution::density(e, unit_cube(p, 1)).unwrap();
        // (t + h)^2 - t^2 has valuation >= 3 when v(h) >= 3, so level 3 is exact
        let want = riemann(p, 1, k.max(3), |t| &psi(&(&t[0] * &t[0] / &scale), p).unwrap() * &phi.value_at(t));
        prop_assert_eq!(d.eval(&phi).unwrap(), want);
    }

    #[test]
    fn combinations_are_linear((p, k, seed) in setup(), a in 0i64..9) {
        let p = prime(p);
        let phi = random_function(&mut ChaCha8Rng::seed_from_u64(seed), p, 2, k);
        let dirac = Distribution::dirac(p, vec![rat(a), rat(1)]);
        let haar = Distribution::haar_on(unit_cube(p, 2));
        let c1 = ExactComplex::gaussian(p, frac(1, 2), rat(1));
        let c2 = int_value(p, -3);
        let combo = Distribution::combination(vec![(c1.clone(), dirac.clone()), (c2.clone(), haar.clone())]).unwrap();
        let want = &(&c1 * &dirac.eval(&phi).unwrap()) + &(&c2 * &haar.eval(&phi).unwrap());
        prop_assert_eq!(combo.eval(&phi).unwrap(), want);
    }
}

#[test]
fn b_functions_of_haar_and_dirac() {
    for pp in [2u64, 3, 5] {
        let p = prime(pp);
        let haar = Distribution::haar_on(unit_cube(p, 1));
        let dirac = Distribution::dirac(p, vec![rat(0)]);
        for x in [rat(0), rat(1), frac(1, pp as i64), rat(pp as i64)] {
            for j in -2i64..=3 {
                let r = p.rpow(j);
                let vx = valuation(&x, p).finite().unwrap_or(i64::MAX);
                // mass of B(x, p^-j) ∩ Z_p
                let want_haar = if vx >= 0 {
                    p.rpow(-j.max(0))
                } else if j <= vx {
                    rat(1)
                } else {
                    rat(0)
                };
                assert_eq!(haar.b_function(&[x.clone()], &r).unwrap(), ExactComplex::from_rat(p, want_haar), "p = {pp}, x = {x}, j = {j}");
                let near = vx >= j;
                assert_eq!(dirac.b_function(&[x.clone()], &r).unwrap(), int_value(p, i64::from(near)));
            }
        }
    }
}

#[test]
fn character_tests_against_haar() {
    // ∫_{a + p^l Z_p} ψ(w x) dx vanishes exactly when v(w) < 1 - l
    for pp in [2u64, 3, 5] {
        let p = prime(pp);
        let haar = Distribution::haar_on(unit_cube(p, 1));
        for l in 0..=2i64 {
            let cell = Ball::new(p, vec![rat(1)], l);
            for j in -3i64..=1 {
                let w = vec![p.rpow(j)];
                let got = haar.eval(&character_test_function(&cell, &w).unwrap()).unwrap();
                let via_char = haar.eval_character(&cell, &w).unwrap();
                assert_eq!(got, via_char);
                if j < 1 - l {
                    assert!(got.is_zero(), "p = {pp}, l = {l}, j = {j}");
                } else {
                    assert_eq!(got, psi(&w[0], p).unwrap().scale(&p.rpow(-l)));
                }
            }
        }
    }
}

#[test]
fn non_integrable_density_is_rejected() {
    let p = prime(3);
    let e = parse("abs(x1)^-1", p).unwrap();
    let d = Distribution::density(e, unit_cube(p, 1));
    let evaluated = d.and_then(|d| d.eval(&SchwartzBruhat::indicator(&unit_cube(p, 1)).unwrap()));
    assert!(evaluated.is_err());
}
