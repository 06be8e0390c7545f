//! Exact toolkit for packing and partitioning orbitopes.
//!
//! A *packing orbitope* is the convex hull of the 0/1 matrices with `p` rows
//! and `q` columns (`p >= q >= 1`) that have at most one 1 per row and whose
//! columns are in lexicographically non-increasing order; the *partitioning*
//! variant requires exactly one 1 per row.  This crate provides
//!
//! * [`optimizer`] — linear optimization over either polytope in `O(pq)` time
//!   and exact rational arithmetic, via a longest-path sweep over the layered
//!   digraph of [`digraph`];
//! * [`formulations`] — the flow-based extended formulation and its very
//!   compact reformulation (fewer than `2pq` variables), with LP/MPS emission;
//! * [`sci`] — enumeration and exact separation of shifted-column
//!   inequalities, driven by the flow lifting of [`lifting`];
//! * [`lp_oracle`] — desk-scale ground truth: brute-force enumerators and an
//!   exact rational simplex used to verify everything else.
//!
//! All arithmetic is exact ([`Rational`] is a big-integer fraction); nothing
//! in the crate rounds.
//!
//! ```
//! use orbikit::{optimize_packing, OrbiMatrix, Params, rat};
//!
//! let params = Params::new(2, 2).unwrap();
//! let d = OrbiMatrix::from_entries(
//!     params,
//!     [((1, 1), rat(1)), ((2, 1), rat(-1)), ((2, 2), rat(3))],
//! )
//! .unwrap();
//! let opt = optimize_packing(&d);
//! assert_eq!(opt.value, rat(4)); // picks x_11 = x_22 = 1
//! ```

mod error;
mod rat;

pub mod digraph;
pub mod formulations;
pub mod lifting;
pub mod linsys;
pub mod lp_oracle;
pub mod matrix;
pub mod optimizer;
pub mod sci;

pub use crate::error::Error;
pub use crate::matrix::{index_set, Cell, Kind, OrbiMatrix, Params};
pub use crate::optimizer::{optimize_packing, optimize_partitioning, OptResult};
pub use crate::rat::{parse_rational, rat, ratio, Rational};
