//! A Benders decomposition engine for bounded mixed-integer linear programs
//! with pluggable cut-selection strategies.
//!
//! The crate decomposes a MILP `min c'x + f'y  s.t.  Ax + By >= b, x >= 0, y in Y`
//! into a master problem over the integer variables `y` (plus an epigraph
//! variable) and an LP subproblem, and closes the gap with cutting planes.
//! Which cut gets added each round is decided by a [`separation`] strategy:
//! the classical Benders dual subproblem, linear pseudonorm normalizations
//! (MIS, relaxed l1, Magnanti-Wong-Papadakos, Conforti-Wolsey), or lp-deepest
//! cuts obtained either by direct LP/QP reformulation or by the guided
//! projections algorithm in [`gpa`].
//!
//! Module map:
//! - [`model`]: problem data, certificates, cuts and the scaling between them
//! - [`kernel`]: the LP simplex / convex QP solving layer
//! - [`separation`]: distance functions and their separation problems
//! - [`gpa`]: guided projections for deepest cuts via a classical-cut oracle
//! - [`master`]: branch-and-bound master problem and the decomposition driver
//! - [`cflp`]: capacitated facility location toolkit (instances, oracles, cuts)
//! - [`bench`]: experiment harness, CSV reporting and the brute-force oracle

pub mod bench;
pub mod cflp;
pub mod gpa;
pub mod kernel;
pub mod master;
pub mod model;
pub mod separation;
