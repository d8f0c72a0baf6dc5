mod common;

use common::*;
use padlab::cexp::{parse, RationalTerm};
use padlab::distributions::{Distribution, GraphManifold};
use padlab::extend::*;
use padlab::padic::valuation;
use padlab::schwartz::psi;
use padlab::{Ball, ClopenSet, ExactComplex, Prime, Rat, SchwartzBruhat, Valuation};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn axis_line(p: Prime) -> GraphManifold {
    GraphManifold::over_leading(unit_cube(p, 1), vec![RationalTerm::int(0)]).unwrap()
}

fn parabola(p: Prime) -> GraphManifold {
    GraphManifold::over_leading(unit_cube(p, 1), vec![RationalTerm::var(0).pow(2)]).unwrap()
}

/// `X` minus the tube `{v(x_2 - g(x_1)) >= j}` around a graph over `Z_p`.
fn off_tube(p: Prime, g: impl Fn(&Rat) -> Rat, j: i64) -> SchwartzBruhat {
    SchwartzBruhat::from_fn(p, 2, 0, j, |x| {
        let near = valuation(&(&x[1] - g(&x[0])), p) >= Valuation::Finite(j);
        Ok(ExactComplex::from_int(p, i64::from(!near)))
    })
    .unwrap()
}

#[test]
fn section_of_axis_fills_the_square() {
    for pp in [2, 3, 5] {
        let p = prime(pp);
        let nu = graph_section_nu(&axis_line(p), &unit_cube(p, 2)).unwrap();
        let f = SchwartzBruhat::indicator(&unit_cube(p, 1)).unwrap();
        let out = nu.apply(&f).unwrap();
        assert_eq!(out, SchwartzBruhat::indicator(&unit_cube(p, 2)).unwrap());
        assert!(nu.apply(&SchwartzBruhat::zero(p, 1)).unwrap().is_zero());
    }
}

#[test]
fn section_inside_smaller_ambient() {
    let p = prime(3);
    let x = ClopenSet::from_balls(
        p,
        2,
        vec![
            Ball::new(p, vec![rat(0), rat(0)], 1),
            Ball::new(p, vec![rat(1), rat(1)], 2),
        ],
    )
    .unwrap();
    let base = ClopenSet::from_balls(
        p,
        1,
        vec![Ball::new(p, vec![rat(0)], 1), Ball::new(p, vec![rat(1)], 2)],
    )
    .unwrap();
    let z = GraphManifold::over_leading(base.clone(), vec![RationalTerm::var(0).pow(2)]).unwrap();
    let nu = graph_section_nu(&z, &x).unwrap();
    let f = SchwartzBruhat::indicator(&base).unwrap();
    let out = nu.apply(&f).unwrap();
    assert_eq!(out, SchwartzBruhat::indicator(&x).unwrap());
}

#[test]
fn graph_outside_ambient_is_rejected() {
    let p = prime(3);
    let x = ClopenSet::from_ball(Ball::new(p, vec![rat(0), rat(1)], 1));
    let base = ClopenSet::from_ball(Ball::new(p, vec![rat(0)], 1));
    let z = GraphManifold::over_leading(base, vec![RationalTerm::int(0)]).unwrap();
    assert!(graph_section_nu(&z, &x).is_err());
}

#[test]
fn section_restricts_back() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for pp in [2, 3, 5] {
        let p = prime(pp);
        for z in [axis_line(p), parabola(p)] {
            let nu = graph_section_nu(&z, &unit_cube(p, 2)).unwrap();
            for k in 0..=3 {
                let f = random_function(&mut rng, p, 1, k);
                let back = restrict_to_stratum(&nu.apply(&f).unwrap(), &z).unwrap();
                assert_eq!(back, f, "p = {pp}, k = {k}, stratum {z}");
            }
        }
    }
}

#[test]
fn point_split_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for pp in [2, 3, 5] {
        let p = prime(pp);
        let x = unit_cube(p, 1);
        let split = test_split(&x, &[GraphManifold::point(p, vec![rat(0)])]).unwrap();
        let one = SchwartzBruhat::indicator(&x).unwrap();
        for k in 0..=3 {
            let phi = random_function(&mut rng, p, 1, k);
            let expect = phi.sub(&one.scale(&phi.value_at(&[rat(0)]))).unwrap();
            assert_eq!(split.apply(&phi).unwrap(), expect);
        }
    }
}

#[test]
fn identity_without_strata() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let p = prime(3);
    let x = unit_cube(p, 2);
    let split = test_split(&x, &[]).unwrap();
    let phi = random_function(&mut rng, p, 2, 2);
    assert_eq!(split.apply(&phi).unwrap(), phi);
}

#[test]
fn line_split_vanishes_on_line_and_fixes_functions_off_it() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for pp in [2, 3] {
        let p = prime(pp);
        let x = unit_cube(p, 2);
        let line = axis_line(p);
        let split = test_split(&x, &[line.clone()]).unwrap();
        for k in 0..=3 {
            let phi = random_function(&mut rng, p, 2, k);
            let tilde = split.apply(&phi).unwrap();
            assert!(restrict_to_stratum(&tilde, &line).unwrap().is_zero());
            let away = phi.mul(&off_tube(p, |_| rat(0), k.max(1))).unwrap();
            assert_eq!(split.apply(&away).unwrap(), away.canonical());
        }
    }
}

#[test]
fn parabola_with_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let p = prime(3);
    let x = unit_cube(p, 2);
    let z0 = parabola(p).excluding(vec![vec![rat(1)]]).unwrap();
    let strata = vec![
        z0.clone(),
        GraphManifold::point(p, vec![rat(1), rat(1)]),
        GraphManifold::point(p, vec![rat(0), rat(2)]),
    ];
    let split = test_split(&x, &strata).unwrap();
    for k in 0..=2 {
        let phi = random_function(&mut rng, p, 2, k);
        let tilde = split.apply(&phi).unwrap();
        assert!(tilde.value_at(&[rat(1), rat(1)]).is_zero());
        assert!(tilde.value_at(&[rat(0), rat(2)]).is_zero());
        assert!(restrict_to_stratum(&tilde, &parabola(p)).unwrap().is_zero());
        let far = SchwartzBruhat::from_fn(p, 2, 0, 3, |y| {
            let on_curve = valuation(&(&y[1] - &y[0] * &y[0]), p) >= Valuation::Finite(3);
            let near_pt = valuation(&y[0], p) >= Valuation::Finite(3)
                && valuation(&(&y[1] - rat(2)), p) >= Valuation::Finite(3);
            Ok(ExactComplex::from_int(p, i64::from(!on_curve && !near_pt)))
        })
        .unwrap();
        let away = phi.mul(&far).unwrap();
        assert_eq!(split.apply(&away).unwrap(), away.canonical());
    }
}

#[test]
fn non_point_later_stratum_is_invalid() {
    let p = prime(3);
    let err = test_split(&unit_cube(p, 2), &[axis_line(p), parabola(p)]);
    assert!(matches!(err, Err(padlab::Error::InvalidStratification(_))));
}

#[test]
fn regularized_haar_on_punctured_line() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for pp in [2, 3, 5] {
        let p = prime(pp);
        let x = unit_cube(p, 1);
        let split = test_split(&x, &[GraphManifold::point(p, vec![rat(0)])]).unwrap();
        let haar = Distribution::haar_on(x.clone());
        let kappa = regularize(&haar, &split).unwrap();
        let one = SchwartzBruhat::indicator(&x).unwrap();
        assert!(kappa.eval(&one).unwrap().is_zero());
        for k in 1..=3 {
            let phi = random_function(&mut rng, p, 1, k);
            let hole = SchwartzBruhat::indicator_ball(&Ball::new(p, vec![rat(0)], k)).unwrap();
            let away = phi.sub(&phi.mul(&hole).unwrap()).unwrap();
            assert_eq!(kappa.eval(&away).unwrap(), haar.eval(&away).unwrap());
        }
    }
}

#[test]
fn lift_matches_pointwise_minimal_coordinate_map() {
    for pp in [2, 3, 5] {
        let p = prime(pp);
        // 1 on {x1 ≡ 0 mod p^2, |x2| = 1}
        let phi0 = SchwartzBruhat::from_fn(p, 2, 0, 2, |x| {
            let hit = valuation(&x[0], p) >= Valuation::Finite(2)
                && valuation(&x[1], p) == Valuation::Finite(0);
            Ok(ExactComplex::from_int(p, i64::from(hit)))
        })
        .unwrap();
        let lift = min_coord_lift(&phi0, 2).unwrap();
        for x in reps(p, 2, 3) {
            let expect = phi0.value_at(&min_coord_map(&x, p));
            assert_eq!(lift.value_at(&x), expect, "p = {pp}, x = {x:?}");
            let by_hand = valuation(&x[1], p) == Valuation::Finite(0);
            assert_eq!(expect.is_one(), by_hand);
        }
    }
}

#[test]
fn lift_examples() {
    let p = prime(3);
    let point = SchwartzBruhat::indicator_ball(&Ball::new(p, vec![rat(0)], 4)).unwrap();
    let lifted = min_coord_lift(&point, 1).unwrap();
    assert_eq!(lifted, SchwartzBruhat::indicator(&unit_cube(p, 1)).unwrap());
}

fn level_preserving(p: Prime, m: usize, k: i64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi0 = random_function(&mut rng, p, m, k);
    let lift = min_coord_lift(&phi0, m).unwrap();
    assert!(lift.constancy_level() <= k.max(0));
    for x in reps(p, m, k + 1) {
        let v = lift.value_at(&x);
        // Every zeroing of a coordinate of valuation >= k lands in the same
        // level-k coset, so all candidates agree.
        let mut candidates = vec![min_coord_map(&x, p)];
        for i in 0..m {
            if valuation(&x[i], p) >= Valuation::Finite(k) {
                let mut y = x.clone();
                y[i] = rat(0);
                candidates.push(y);
            }
        }
        for y in candidates {
            assert_eq!(phi0.value_at(&y), v);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lift_preserves_level(pi in 0usize..3, m in 1usize..=3, k in 0i64..=2, seed in any::<u64>()) {
        let p = prime([2, 3, 5][pi]);
        prop_assume!(p.get().pow((m as u32) * (k as u32 + 1)) <= 20_000);
        level_preserving(p, m, k, seed);
    }

    #[test]
    fn split_is_linear(pi in 0usize..2, k in 0i64..=2, seed in any::<u64>()) {
        let p = prime([2, 3][pi]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = unit_cube(p, 2);
        let split = test_split(&x, &[parabola(p), GraphManifold::point(p, vec![rat(1), rat(0)])]).unwrap();
        let a = random_function(&mut rng, p, 2, k);
        let b = random_function(&mut rng, p, 2, k);
        let c = ExactComplex::from_int(p, 3);
        let lhs = split.apply(&a.add(&b.scale(&c)).unwrap()).unwrap();
        let rhs = split.apply(&a).unwrap().add(&split.apply(&b).unwrap().scale(&c)).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn lift_is_linear(pi in 0usize..3, k in 0i64..=2, seed in any::<u64>()) {
        let p = prime([2, 3, 5][pi]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_function(&mut rng, p, 2, k);
        let b = random_function(&mut rng, p, 2, k);
        let lhs = min_coord_lift(&a.sub(&b).unwrap(), 2).unwrap();
        let rhs = min_coord_lift(&a, 2).unwrap().sub(&min_coord_lift(&b, 2).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}

#[test]
fn extended_haar_kills_the_cube() {
    for pp in [2, 3, 5] {
        let p = prime(pp);
        for m in 1..=2 {
            let cube = unit_cube(p, m);
            let mu = Distribution::density_singular(parse("1", p).unwrap(), cube.clone()).unwrap();
            let xi = extend_min_coord(&mu).unwrap();
            let one = SchwartzBruhat::indicator(&cube).unwrap();
            assert!(xi.eval(&one).unwrap().is_zero());
        }
    }
}

/// `Σ ψ(1/x) p^{-level}` over level-`level` representatives of
/// `Z_p \ p^k Z_p`.
fn shell_sum(p: Prime, k: i64, level: i64) -> ExactComplex {
    let mut acc = ExactComplex::zero(p);
    for x in reps(p, 1, level) {
        if valuation(&x[0], p) < Valuation::Finite(k) {
            acc = acc + psi(&x[0].recip(), p).unwrap();
        }
    }
    acc.scale(&p.rpow(-level))
}

#[test]
fn extended_oscillating_density_matches_shell_sums() {
    for pp in [2, 3, 5] {
        let p = prime(pp);
        let cube = unit_cube(p, 1);
        let mu = Distribution::density_singular(parse("psi(1/x1)", p).unwrap(), cube).unwrap();
        let xi = extend_min_coord(&mu).unwrap();
        for k in 0..=3 {
            let phi = SchwartzBruhat::indicator_ball(&Ball::new(p, vec![rat(0)], k)).unwrap();
            // φ - L(φ) = -1 off p^k Z_p, and ψ(1/x) only needs x mod p^{2k}.
            let expect = -shell_sum(p, k, (2 * k).max(1));
            assert_eq!(xi.eval(&phi).unwrap(), expect, "p = {pp}, k = {k}");
        }
    }
}

#[test]
fn extension_agrees_off_hyperplanes() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for pp in [2, 3] {
        let p = prime(pp);
        let cube = unit_cube(p, 2);
        let e = parse("abs(x1)^(-1) * abs(x2)^(-2) * psi(1/x1)", p).unwrap();
        let mu = Distribution::density_singular(e, cube.clone()).unwrap();
        let xi = extend_min_coord(&mu).unwrap();
        for k in 1..=3 {
            let phi = random_function(&mut rng, p, 2, k);
            let away = SchwartzBruhat::from_fn(p, 2, 0, k, |x| {
                let off = x.iter().all(|c| valuation(c, p) < Valuation::Finite(k));
                Ok(if off { phi.value_at(x) } else { ExactComplex::zero(p) })
            })
            .unwrap();
            assert_eq!(xi.eval(&away).unwrap(), mu.eval(&away).unwrap());
            let twice = xi.eval(&phi.scale_rat(&rat(2))).unwrap();
            assert_eq!(twice, xi.eval(&phi).unwrap().scale(&rat(2)));
        }
    }
}

#[test]
fn extension_rejects_wrong_inputs() {
    let p = prime(3);
    let f = SchwartzBruhat::indicator(&unit_cube(p, 2)).unwrap();
    assert!(min_coord_lift(&f, 1).is_err());
}
