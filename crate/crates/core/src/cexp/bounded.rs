use num_traits::ToPrimitive;

use super::{Atom, CexpExpr, Product, RationalTerm};

/// Output of [`bounded_rewrite`].
#[derive(Debug, Clone)]
pub struct BoundedRewrite {
    /// `h = f·e` with `f = p^{-α}`.
    pub h: CexpExpr,
    /// The generators `t_i` entering `α`, with multiplicity.
    pub generators: Vec<RationalTerm>,
    /// `(number of summands)·(largest coefficient modulus)`; `|h| <=` this
    /// bound wherever `e` is defined.
    pub bound: f64,
}

/// Multiplies `e` by `f(x) = p^{-α(x)}`, `α(x) = max(0, Σ_{0<|t_i(x)|<=1}
/// ord t_i(x))`.
///
/// For `|t|^s` with `s < 0` the list gets `t` (|s| times), for `s > 0` it
/// gets `1/t` (s times), and `(ord t)^k` contributes both `t` and `1/t`
/// (k times each). Then `f` is the product of `min(1, |t_i|)`, which cancels
/// the growth of every generator, so each rewritten product is bounded by
/// the modulus of its coefficient. `f` never vanishes, so `h` and `e` have
/// the same zero set.
pub fn bounded_rewrite(e: &CexpExpr) -> BoundedRewrite {
    let mut generators = Vec::new();
    for t in e.products() {
        for a in &t.atoms {
            match a {
                Atom::Abs(u, s) if *s < 0 => {
                    generators.extend(std::iter::repeat(u.clone()).take(s.unsigned_abs() as usize))
                }
                Atom::Abs(u, s) if *s > 0 => {
                    let inv = RationalTerm::int(1).div(u.clone());
                    generators.extend(std::iter::repeat(inv).take(*s as usize));
                }
                Atom::Ord(u, k) => {
                    for _ in 0..*k {
                        generators.push(u.clone());
                        generators.push(RationalTerm::int(1).div(u.clone()));
                    }
                }
                _ => {}
            }
        }
    }
    let h = if generators.is_empty() {
        e.clone()
    } else {
        let damp = CexpExpr::atom(e.p(), Atom::Damp(generators.clone()));
        let terms: Vec<Product> = e.mul(&damp).products().to_vec();
        CexpExpr::from_products(e.p(), terms)
    };
    let max_coeff = e
        .products()
        .iter()
        .map(|t| t.coeff.modulus_f64())
        .fold(0.0, f64::max);
    let bound = e.products().len().to_f64().unwrap_or(f64::MAX) * max_coeff;
    BoundedRewrite {
        h,
        generators,
        bound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cexp::parse;
    use crate::padic::{rat, Prime};

    #[test]
    fn inverse_abs_is_tamed() {
        let p = Prime::new(3).unwrap();
        let e = parse("abs(x1)^(-1)", p).unwrap();
        let r = bounded_rewrite(&e);
        for j in 0..=6 {
            let x = [p.rpow(j) * rat(2)];
            let v = r.h.eval(&x).unwrap();
            assert!(v.is_one(), "shell {j}: {v}");
        }
    }

    #[test]
    fn zero_stays_zero() {
        let p = Prime::new(5).unwrap();
        let r = bounded_rewrite(&CexpExpr::zero(p));
        assert!(r.h.is_zero_expr());
        assert_eq!(r.bound, 0.0);
    }
}
