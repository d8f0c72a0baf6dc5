//! The expression language for functions built from `|f|`, `ord g` and
//! `ψ(h)` with rational functions `f`, `g`, `h`.

mod bounded;
mod constancy;
mod expr;
mod monomial;
mod parser;
mod term;

pub use bounded::{bounded_rewrite, BoundedRewrite};
pub use constancy::{constancy_level, Constancy, ConstancyOptions};
pub use expr::{Atom, CexpExpr, Product};
pub use monomial::CexpMonomialData;
pub use parser::{parse, parse_constant, parse_rational, parse_term};
pub use term::RationalTerm;
