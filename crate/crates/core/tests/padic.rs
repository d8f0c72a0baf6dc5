mod common;

use common::*;
use padlab::padic::{norm, reduce_mod, refine_partition, residue, urysohn_clopen, valuation, UrysohnSource};
use padlab::{Ball, ClopenSet, Rat, Valuation};
use num_bigint::BigInt;
use proptest::prelude::*;

/// Valuation of a nonzero `a / b` by repeated division.
fn naive_valuation(a: i64, b: i64, p: i64) -> i64 {
    let count = |mut m: i64| {
        let mut v = 0;
        while m % p == 0 {
            m /= p;
            v += 1;
        }
        v
    };
    count(a) - count(b)
}

fn ball_strategy(n: usize) -> impl Strategy<Value = (u64, Vec<(i64, i64)>, i64)> {
    (
        prop::sample::select(vec![2u64, 3, 5]),
        prop::collection::vec((-60i64..60, 1i64..30), n),
        -2i64..4,
    )
}

fn to_point(raw: &[(i64, i64)]) -> Vec<Rat> {
    raw.iter().map(|&(a, b)| frac(a, b)).collect()
}

proptest! {
    #[test]
    fn valuation_matches_division(p in prop::sample::select(vec![2i64, 3, 5, 7]), a in -5000i64..5000, b in 1i64..5000) {
        prop_assume!(a != 0);
        let v = valuation(&frac(a, b), prime(p as u64));
        prop_assert_eq!(v, Valuation::Finite(naive_valuation(a, b, p)));
    }

    #[test]
    fn norm_is_multiplicative_and_ultrametric(
        p in prop::sample::select(vec![2u64, 3, 5]),
        a in -500i64..500, b in 1i64..200, c in -500i64..500, d in 1i64..200,
    ) {
        let p = prime(p);
        let (x, y) = (frac(a, b), frac(c, d));
        prop_assert_eq!(norm(&(&x * &y), p), norm(&x, p) * norm(&y, p));
        let s = norm(&(&x + &y), p);
        prop_assert!(s <= norm(&x, p).max(norm(&y, p)));
    }

    #[test]
    fn reduce_mod_is_a_congruent_representative(
        p in prop::sample::select(vec![2u64, 3, 5]),
        a in -2000i64..2000, b in 1i64..300, level in -2i64..5,
    ) {
        let p = prime(p);
        let x = frac(a, b);
        let r = reduce_mod(&x, p, level);
        prop_assert!(valuation(&(&x - &r), p).at_least(level));
        prop_assert!(r >= rat(0));
        prop_assert!(r < p.rpow(level));
        prop_assert_eq!(reduce_mod(&r, p, level), r);
    }

    #[test]
    fn residue_agrees_with_modular_inverse(p in prop::sample::select(vec![3i64, 5, 7]), a in -300i64..300, b in 1i64..60) {
        prop_assume!(b % p != 0);
        let m = p.pow(3);
        let inv = (1..m).find(|t| (t * b).rem_euclid(m) == 1).unwrap();
        let want = (a * inv).rem_euclid(m);
        prop_assert_eq!(residue(&frac(a, b), prime(p as u64), 3), BigInt::from(want));
    }

    #[test]
    fn balls_are_nested_or_disjoint((p, c1, l1) in ball_strategy(2), c2 in prop::collection::vec((-60i64..60, 1i64..30), 2), l2 in -2i64..4) {
        let p = prime(p);
        let a = Ball::new(p, to_point(&c1), l1);
        let b = Ball::new(p, to_point(&c2), l2);
        let nested = a.contains_ball(&b) || b.contains_ball(&a);
        prop_assert!(nested ^ a.is_disjoint(&b));
        match a.intersect(&b) {
            Some(i) => prop_assert!(a.contains_ball(&i) && b.contains_ball(&i)),
            None => prop_assert!(a.is_disjoint(&b)),
        }
    }

    #[test]
    fn membership_is_coordinatewise_valuation((p, c, l) in ball_strategy(2), x in prop::collection::vec((-60i64..60, 1i64..30), 2)) {
        let p = prime(p);
        let b = Ball::new(p, to_point(&c), l);
        let x = to_point(&x);
        let want = x.iter().zip(b.center()).all(|(xi, ci)| valuation(&(xi - ci), p).at_least(l));
        prop_assert_eq!(b.contains_point(&x), want);
    }

    #[test]
    fn cosets_tile_the_ball((p, c, l) in ball_strategy(2), extra in 0i64..2) {
        let p = prime(p);
        let b = Ball::new(p, to_point(&c), l);
        let cosets = b.enumerate_cosets(l + extra).unwrap();
        prop_assert_eq!(cosets.len() as u64, p.get().pow(2 * extra as u32));
        let total: Rat = cosets.iter().map(Ball::volume).sum();
        prop_assert_eq!(total, b.volume());
        for (i, u) in cosets.iter().enumerate() {
            prop_assert!(b.contains_ball(u));
            for w in &cosets[i + 1..] {
                prop_assert!(u.is_disjoint(w));
            }
        }
    }
}

/// Random box union inside `Z_p^2` built from level-`1..=2` cosets.
fn random_set(p: u64, picks: &[bool]) -> ClopenSet {
    let p = prime(p);
    let balls: Vec<Ball> = Ball::origin(p, 2, 0)
        .enumerate_cosets(1)
        .unwrap()
        .into_iter()
        .zip(picks)
        .filter(|(_, keep)| **keep)
        .map(|(b, _)| b)
        .collect();
    ClopenSet::from_balls(p, 2, balls).unwrap()
}

proptest! {
    #[test]
    fn set_algebra_matches_pointwise_logic(
        p in prop::sample::select(vec![2u64, 3]),
        a in prop::collection::vec(any::<bool>(), 9),
        b in prop::collection::vec(any::<bool>(), 9),
    ) {
        let (sa, sb) = (random_set(p, &a), random_set(p, &b));
        let union = sa.union(&sb).unwrap();
        let inter = sa.intersect(&sb).unwrap();
        let diff = sa.difference(&sb).unwrap();
        prop_assert_eq!(union.volume() + inter.volume(), sa.volume() + sb.volume());
        prop_assert_eq!(diff.volume() + inter.volume(), sa.volume());
        for x in reps(prime(p), 2, 2) {
            let (ia, ib) = (sa.contains_point(&x), sb.contains_point(&x));
            prop_assert_eq!(union.contains_point(&x), ia || ib);
            prop_assert_eq!(inter.contains_point(&x), ia && ib);
            prop_assert_eq!(diff.contains_point(&x), ia && !ib);
        }
        prop_assert!(inter.is_subset(&sa).unwrap());
    }

    #[test]
    fn urysohn_separates(
        p in prop::sample::select(vec![2u64, 3, 5]),
        z in prop::collection::vec((0i64..25, 0i64..25), 1..4),
        gap in 1i64..3,
    ) {
        let pr = prime(p);
        let x = unit_cube(pr, 2);
        let pts: Vec<Vec<Rat>> = z.iter().map(|&(a, b)| vec![rat(a), rat(b)]).collect();
        let near: Vec<Ball> = pts.iter().map(|c| Ball::new(pr, c.clone(), gap)).collect();
        let u = ClopenSet::from_balls(pr, 2, near).unwrap();
        let c = urysohn_clopen(&UrysohnSource::Points(pts.clone()), &u, &x).unwrap();
        prop_assert!(c.is_subset(&u).unwrap());
        for q in &pts {
            prop_assert!(c.contains_point(q));
        }
    }

    #[test]
    fn refinement_is_a_partition_subordinate_to_the_cover(
        p in prop::sample::select(vec![2u64, 3]),
        a in prop::collection::vec(any::<bool>(), 9),
        b in prop::collection::vec(any::<bool>(), 9),
    ) {
        let pr = prime(p);
        let x = unit_cube(pr, 2);
        let sa = random_set(p, &a);
        let sb = random_set(p, &b);
        let rest = x.difference(&sa.union(&sb).unwrap()).unwrap();
        let cover = vec![sa, sb, rest];
        let parts = refine_partition(&cover, &x).unwrap();
        prop_assert_eq!(parts.len(), cover.len());
        let total: Rat = parts.iter().map(ClopenSet::volume).sum();
        prop_assert_eq!(total, x.volume());
        for (part, member) in parts.iter().zip(&cover) {
            prop_assert!(part.is_subset(member).unwrap());
        }
        for pt in reps(pr, 2, 2) {
            prop_assert_eq!(parts.iter().filter(|s| s.contains_point(&pt)).count(), 1);
        }
    }
}

#[test]
fn urysohn_from_a_set_source() {
    let p = prime(3);
    let x = unit_cube(p, 1);
    let z = ClopenSet::from_ball(Ball::new(p, vec![rat(1)], 2));
    let u = ClopenSet::from_ball(Ball::new(p, vec![rat(1)], 1));
    let c = urysohn_clopen(&UrysohnSource::Set(z.clone()), &u, &x).unwrap();
    assert!(z.is_subset(&c).unwrap());
    assert!(c.is_subset(&u).unwrap());
}
