mod common;

use common::*;
use padlab::cyclotomic::Accumulator;
use padlab::{ExactComplex, Prime};
use proptest::prelude::*;
use std::f64::consts::PI;

/// A random element given as `Σ c_j ζ_{p^r}^{e_j}` (times `i` when flagged),
/// together with its value computed with floats.
fn element(p: Prime, r: u32, terms: &[(i64, i64, i64, bool)]) -> (ExactComplex, (f64, f64)) {
    let mut acc = ExactComplex::zero(p);
    let (mut re, mut im) = (0.0, 0.0);
    let order = p.get().pow(r) as f64;
    for &(num, den, e, twist) in terms {
        let mut z = ExactComplex::zeta(p, r, e).unwrap().scale(&frac(num, den));
        let angle = 2.0 * PI * e as f64 / order;
        let c = num as f64 / den as f64;
        let (mut a, mut b) = (c * angle.cos(), c * angle.sin());
        if twist {
            z = &z * &ExactComplex::i(p);
            (a, b) = (-b, a);
        }
        acc += &z;
        re += a;
        im += b;
    }
    (acc, (re, im))
}

fn close(a: (f64, f64), b: (f64, f64)) -> bool {
    let scale = 1.0 + a.0.abs() + a.1.abs();
    (a.0 - b.0).abs() < 1e-9 * scale && (a.1 - b.1).abs() < 1e-9 * scale
}

fn terms() -> impl Strategy<Value = Vec<(i64, i64, i64, bool)>> {
    prop::collection::vec((-5i64..=5, 1i64..=4, -40i64..40, any::<bool>()), 1..6)
}

fn setup() -> impl Strategy<Value = (u64, u32)> {
    (prop::sample::select(vec![2u64, 3, 5, 7]), 0u32..=3)
}

proptest! {
    #[test]
    fn float_embedding_is_a_ring_map((p, r) in setup(), ta in terms(), tb in terms()) {
        let p = prime(p);
        let (a, fa) = element(p, r, &ta);
        let (b, fb) = element(p, r, &tb);
        prop_assert!(close(a.to_f64(), fa));
        let sum = &a + &b;
        prop_assert!(close(sum.to_f64(), (fa.0 + fb.0, fa.1 + fb.1)));
        let prod = &a * &b;
        prop_assert!(close(prod.to_f64(), (fa.0 * fb.0 - fa.1 * fb.1, fa.0 * fb.1 + fa.1 * fb.0)));
        prop_assert!(close(a.conj().to_f64(), (fa.0, -fa.1)));
    }

    #[test]
    fn field_axioms((p, r) in setup(), ta in terms(), tb in terms(), tc in terms()) {
        let p = prime(p);
        let (a, _) = element(p, r, &ta);
        let (b, _) = element(p, r, &tb);
        let (c, _) = element(p, r, &tc);
        prop_assert_eq!(&(&a + &b) * &c, &(&a * &c) + &(&b * &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert!((&a - &a).is_zero());
        prop_assert_eq!((&a * &b).conj(), &a.conj() * &b.conj());
        if !a.is_zero() {
            prop_assert!((&a * &a.inv().unwrap()).is_one());
            prop_assert_eq!((&b * &a).try_div(&a).unwrap(), b.clone());
        }
    }

    #[test]
    fn representation_is_canonical((p, r) in setup(), ta in terms(), shift in 0i64..50) {
        // the same element built in a different order and at a higher level
        let p = prime(p);
        let (a, _) = element(p, r, &ta);
        let mut reordered = ta.clone();
        reordered.reverse();
        let (b, _) = element(p, r, &reordered);
        prop_assert_eq!(&a, &b);
        let period = p.get().pow(r + 1) as i64;
        let lifted: Vec<_> = ta.iter().map(|&(n, d, e, t)| (n, d, e * p.get() as i64 + shift * period, t)).collect();
        let (c, _) = element(p, r + 1, &lifted);
        prop_assert_eq!(&a, &c);
        prop_assert!(c.level() <= r.max(1) + 1);
    }

    #[test]
    fn accumulator_matches_repeated_addition((p, r) in setup(), ts in prop::collection::vec((terms(), 0u64..200), 1..5)) {
        let p = prime(p);
        let level = r + 2;
        let mut acc = Accumulator::new(p, level).unwrap();
        let mut direct = ExactComplex::zero(p);
        for (t, e) in &ts {
            let (v, _) = element(p, r, t);
            acc.add_rotated(&v, *e);
            direct += &v.mul_zeta(level, *e as i64).unwrap();
        }
        prop_assert_eq!(acc.finish(), direct);
    }
}

#[test]
fn roots_of_unity_relations() {
    for pp in [2, 3, 5, 7] {
        let p = prime(pp);
        for r in 1..=3 {
            let order = pp.pow(r) as i64;
            let z = ExactComplex::zeta(p, r, 1).unwrap();
            assert!(z.pow(order).unwrap().is_one());
            assert!(!z.pow(order / pp as i64).unwrap().is_one());
            let total = (0..order).fold(ExactComplex::zero(p), |s, e| s + ExactComplex::zeta(p, r, e).unwrap());
            assert!(total.is_zero(), "p = {pp}, r = {r}");
            assert_eq!(z.inv().unwrap(), ExactComplex::zeta(p, r, -1).unwrap());
        }
        let i = ExactComplex::i(p);
        assert_eq!(&i * &i, int_value(p, -1));
        assert_eq!(ExactComplex::gaussian(p, rat(3), rat(4)).modulus_f64(), 5.0);
    }
}

#[test]
fn rational_detection() {
    let p = prime(3);
    let z = ExactComplex::zeta(p, 2, 1).unwrap();
    let real = &z + &z.conj();
    assert!(real.as_rational().is_none());
    let norm = &z * &z.conj();
    assert_eq!(norm.as_rational(), Some(rat(1)));
    assert_eq!(int_value(p, 7).as_rational(), Some(rat(7)));
}
