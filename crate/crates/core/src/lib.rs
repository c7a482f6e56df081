//! Inverse semigroup of compatible metrics on the double of a finite metric
//! space.
//!
//! * [`metric`]: finite pointed spaces, cross metrics, scale families, `ρ_A`.
//! * [`algebra`]: min-plus composition, pseudoinverse, idempotent identities.
//! * [`coarse`]: distortion profiles and three-valued coarse equivalence.
//! * [`sphi`]: the `S_Φ` construction over finite inverse semigroups.
//! * [`rays`]: per-ray gluing bounds `f_ρ` and their strata.
//! * [`tree`]: rooted trees, prefix maps of the boundary, `χ` and `ψ`.
//! * [`euclid`]: polar grids in the plane or space, partial isometries, `χ` and `ψ`.
//! * [`io`] and [`cli`]: JSON documents and the batch front end.

// `!(a < b)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod cli;
pub mod coarse;
pub mod error;
pub mod euclid;
pub mod fixtures;
pub mod io;
pub mod matrix;
pub mod metric;
pub mod random;
pub mod rays;
pub mod sphi;
pub mod tree;

pub use error::{Error, Result};
