//! p-adic power series, exponential sums `sum e(f(m)/p^n)` over short
//! intervals, exponent pairs with their p-adic data, and central values of
//! Dirichlet L-functions modulo prime powers.
//!
//! Modules build on each other in order: [`padic_core`] (residues and
//! rationals), [`series`] (series and phases), [`expsum`], [`pairs`],
//! [`characters`], [`lvalue`]. The guide in `book/` walks through each.

// `!(x < t)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod characters;
pub mod error;
pub mod lvalue;
pub mod padic_core;
pub mod pairs;
pub mod expsum;
pub mod series;

pub use error::{Error, Result};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
mod book_introduction {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/padic.md")]
mod book_padic {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/phases.md")]
mod book_phases {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/pairs.md")]
mod book_pairs {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/characters.md")]
mod book_characters {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/lvalues.md")]
mod book_lvalues {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}
