//! Exact computation of operadic Massey products.
//!
//! The crate implements, over the rational numbers:
//!
//! * sparse exact linear algebra with canonical echelon subspaces ([`linalg`]),
//! * planar tree monomials with symmetric-group actions and Koszul signs ([`trees`]),
//! * quadratic operad presentations and their weight-graded cells ([`operad`]),
//! * Koszul dual cooperads, the decomposition coproduct, and the inductive
//!   splitting map that drives defining systems ([`kdual`]),
//! * finite-dimensional dg algebras over a presented operad ([`algebra`]),
//! * indexing sets, defining systems, and higher Massey product sets ([`massey`]),
//! * the weight-filtration spectral sequence of the operadic bar-type complex
//!   together with the staircase comparison for Massey differentials ([`emss`]),
//! * homotopy transfer of the strict structure to homology, including transfers
//!   seeded by a defining system ([`htt`]),
//! * a command line front end with cached cell computations ([`cli`]).
//!
//! The linear algebra layer is generic over a [`linalg::Field`] scalar; the rest
//! of the crate instantiates it at arbitrary-precision rationals via the [`Rat`]
//! alias. All arithmetic is exact: there are no tolerances anywhere.

pub mod algebra;
pub mod cli;
pub mod emss;
pub mod htt;
pub mod kdual;
pub mod linalg;
pub mod massey;
pub mod operad;
pub mod trees;

/// Ground field scalar used by every domain module: arbitrary-precision `p/q`.
pub type Rat = num_rational::BigRational;

/// Sparse matrix over the ground field.
pub type QMat = linalg::Mat<Rat>;

/// Canonical echelon subspace over the ground field.
pub type QSubspace = linalg::Subspace<Rat>;

/// Convenience constructor for a rational from a numerator/denominator pair.
pub fn rat(num: i64, den: i64) -> Rat {
    use num_bigint::BigInt;
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Convenience constructor for an integer rational.
pub fn rint(num: i64) -> Rat {
    rat(num, 1)
}
