//! Complex polynomial arithmetic, root finding, the `(w - z)`-shifted basis
//! and falling factorials.

mod bipoly;
mod factorial;
pub mod parse;
mod roots;
mod shifted;
mod unipoly;

pub use bipoly::BiPoly;
pub use factorial::{falling_factorial, falling_ratio};
pub use parse::{parse_bipoly, parse_unipoly, parse_with_vars};
pub use roots::{
    lex_cmp, poly_roots, raw_roots, Root, RootMultiset, SpherePoint, DEFAULT_CLUSTER_TOL,
    MAX_ITERATIONS,
};
pub use shifted::{from_shifted_basis, to_shifted_basis, ShiftedForm};
pub use unipoly::{Degree, UniPoly};

use num_complex::Complex64;

/// Horner evaluation of `p` at `z`.
pub fn poly_eval(p: &UniPoly, z: Complex64) -> Complex64 {
    p.eval(z)
}
